//! Quasiprobability constructions: operational (OQ), Kirkwood-Dirac (KDQ) and
//! Margenau-Hill (MHQ), the characteristic-function route to the OQ, and the
//! negativity toolkit.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qmath::{dephase_operator, DensityState, SpectralDecomp};
use crate::schemes::{epm_prob, tpm_prob, wtpm_prob, Povm};
use crate::table::{DistKind, KdqDist, QuasiDist, NORMALIZATION_TOL, ROUNDOFF_CLAMP};

/// `q_if = p^TPM_if + (p^EPM_f - sum_i p^TPM_if) / n_A`, where `n_A` is the
/// number of outcomes of the first measurement.
pub fn oq(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<QuasiDist> {
    let tpm = tpm_prob(rho, a, b_h)?;
    let epm = epm_prob(rho, b_h)?;
    let cols = tpm.marginal_f();
    let n_a = a.len() as f64;
    let mut values = Vec::with_capacity(a.len() * b_h.len());
    for i in 0..a.len() {
        for f in 0..b_h.len() {
            values.push(tpm.get(i, f) + (epm[f] - cols[f]) / n_a);
        }
    }
    QuasiDist::new(
        DistKind::Oq,
        a.len(),
        b_h.len(),
        values,
        a.energies().map(<[f64]>::to_vec),
        b_h.energies().map(<[f64]>::to_vec),
    )
}

/// Discrete characteristic function `chi_mn` over outcome indices, with roots
/// of unity of order `rows` (first index) and `cols` (second index).
#[derive(Clone, Debug, PartialEq)]
pub struct CharTable {
    rows: usize,
    cols: usize,
    values: Vec<C64>,
}

fn roots_of_unity(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect()
}

impl CharTable {
    /// Requires `chi_00 = 1`.
    pub fn new(rows: usize, cols: usize, values: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::DimMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if (values[0] - C64::new(1.0, 0.0)).norm() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(values[0].re));
        }
        Ok(Self { rows, cols, values })
    }

    /// Forward transform `chi_mn = sum_if g_r^{im} g_c^{fn} q_if`.
    pub fn from_table(q: &QuasiDist) -> Result<Self> {
        let (rows, cols) = (q.rows(), q.cols());
        let (gr, gc) = (roots_of_unity(rows), roots_of_unity(cols));
        let mut values = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..rows {
                    for f in 0..cols {
                        acc += gr[(i * m) % rows] * gc[(f * n) % cols] * q.get(i, f);
                    }
                }
                values.push(acc);
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.values[m * self.cols + n]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `q_if = (1 / (rows * cols)) sum_mn g_r^{-im} g_c^{-fn} chi_mn`; the
    /// imaginary parts must cancel.
    pub fn inverse(
        &self,
        kind: DistKind,
        energies_i: Option<Vec<f64>>,
        energies_f: Option<Vec<f64>>,
    ) -> Result<QuasiDist> {
        let (rows, cols) = (self.rows, self.cols);
        let (gr, gc) = (roots_of_unity(rows), roots_of_unity(cols));
        let norm = 1.0 / (rows * cols) as f64;
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for f in 0..cols {
                let mut acc = C64::new(0.0, 0.0);
                for m in 0..rows {
                    for n in 0..cols {
                        acc += gr[(i * m) % rows].conj() * gc[(f * n) % cols].conj() * self.get(m, n);
                    }
                }
                let q = acc * norm;
                if q.im.abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidOperator(format!(
                        "inverse transform has imaginary part {:e}",
                        q.im
                    )));
                }
                values.push(q.re);
            }
        }
        QuasiDist::new(kind, rows, cols, values, energies_i, energies_f)
    }
}

/// Characteristic function of the OQ: the `m = 0` row comes from the EPM
/// statistics, every other row from the TPM statistics.
pub fn oq_characteristic(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<CharTable> {
    let tpm = tpm_prob(rho, a, b_h)?;
    let epm = epm_prob(rho, b_h)?;
    let (rows, cols) = (a.len(), b_h.len());
    let (gr, gc) = (roots_of_unity(rows), roots_of_unity(cols));
    let mut values = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        for n in 0..cols {
            let chi = if m == 0 && n == 0 {
                C64::new(1.0, 0.0)
            } else if m == 0 {
                (0..cols).map(|f| gc[(f * n) % cols] * epm[f]).sum()
            } else {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..rows {
                    for f in 0..cols {
                        acc += gr[(i * m) % rows] * gc[(f * n) % cols] * tpm.get(i, f);
                    }
                }
                acc
            };
            values.push(chi);
        }
    }
    CharTable::new(rows, cols, values)
}

/// OQ obtained by inverting [`oq_characteristic`].
pub fn oq_via_characteristic(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<QuasiDist> {
    oq_characteristic(rho, a, b_h)?.inverse(
        DistKind::Oq,
        a.energies().map(<[f64]>::to_vec),
        b_h.energies().map(<[f64]>::to_vec),
    )
}

/// `q_if = Tr(rho A_i B^H_f)`.
pub fn kdq(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<KdqDist> {
    for m in [a, b_h] {
        if m.dim() != rho.dim() {
            return Err(Error::DimMismatch {
                expected: m.dim(),
                found: rho.dim(),
            });
        }
    }
    let mut values = Vec::with_capacity(a.len() * b_h.len());
    for ai in a.effects() {
        let left = rho.op().matmul(ai);
        for b in b_h.effects() {
            values.push(left.trace_product(b));
        }
    }
    KdqDist::new(
        a.len(),
        b_h.len(),
        values,
        a.energies().map(<[f64]>::to_vec),
        b_h.energies().map(<[f64]>::to_vec),
    )
}

/// Real part of the KDQ.
pub fn mhq_direct(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<QuasiDist> {
    kdq(rho, a, b_h)?.real_part()
}

/// `p^TPM_if + (p^EPM_f - p^wTPM_if) / 2`.
pub fn mhq_via_schemes(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<QuasiDist> {
    let tpm = tpm_prob(rho, a, b_h)?;
    let wtpm = wtpm_prob(rho, a, b_h)?;
    let epm = epm_prob(rho, b_h)?;
    let mut values = Vec::with_capacity(a.len() * b_h.len());
    for i in 0..a.len() {
        for f in 0..b_h.len() {
            values.push(tpm.get(i, f) + 0.5 * (epm[f] - wtpm.get(i, f)));
        }
    }
    QuasiDist::new(
        DistKind::Mhq,
        a.len(),
        b_h.len(),
        values,
        a.energies().map(<[f64]>::to_vec),
        b_h.energies().map(<[f64]>::to_vec),
    )
}

/// `sum |q_if| - 1`.
pub fn negativity(q: &QuasiDist) -> Result<f64> {
    let total = q.total();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(q.values().iter().map(|v| v.abs()).sum::<f64>() - 1.0)
}

/// `sum |q_if| - 1` with the complex modulus.
pub fn negativity_kdq(q: &KdqDist) -> f64 {
    q.values().iter().map(|v| v.norm()).sum::<f64>() - 1.0
}

/// True when no entry is below `-ROUNDOFF_CLAMP`.
pub fn is_nonnegative(q: &QuasiDist) -> bool {
    q.min_entry() >= -ROUNDOFF_CLAMP
}

fn check_partition(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for block in blocks {
        if block.is_empty() {
            return Err(Error::BadPartition("empty block".into()));
        }
        for &k in block {
            if k >= n {
                return Err(Error::BadPartition(format!("index {k} out of range 0..{n}")));
            }
            if seen[k] {
                return Err(Error::BadPartition(format!("index {k} appears twice")));
            }
            seen[k] = true;
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::BadPartition(format!("index {k} not covered")));
    }
    Ok(())
}

/// Sums the table over blocks of outcome indices. Energy labels are dropped.
pub fn coarse_grain(
    q: &QuasiDist,
    partition_i: &[Vec<usize>],
    partition_f: &[Vec<usize>],
) -> Result<QuasiDist> {
    check_partition(partition_i, q.rows())?;
    check_partition(partition_f, q.cols())?;
    let mut values = Vec::with_capacity(partition_i.len() * partition_f.len());
    for bi in partition_i {
        for bf in partition_f {
            values.push(
                bi.iter()
                    .flat_map(|&i| bf.iter().map(move |&f| (i, f)))
                    .map(|(i, f)| q.get(i, f))
                    .sum(),
            );
        }
    }
    QuasiDist::new(
        DistKind::Classical,
        partition_i.len(),
        partition_f.len(),
        values,
        None,
        None,
    )
}

/// `(1 - s) rho + s D[rho]` with `D` the dephasing in `basis`.
pub fn decohere_state(rho: &DensityState, basis: &SpectralDecomp, s: f64) -> Result<DensityState> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::BadMixingWeight(s));
    }
    if basis.dim() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            found: basis.dim(),
        });
    }
    let dephased = dephase_operator(rho.op(), basis);
    DensityState::new((&rho.op().scale(1.0 - s) + &dephased.scale(s)).hermitian_part())
}
