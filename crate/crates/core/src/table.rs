//! Outcome-pair tables shared by the measurement schemes and the quasiprobabilities.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Normalization tolerance for every emitted table.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Entries of probability tables in `[-ROUNDOFF_CLAMP, 0)` are clamped to zero.
pub const ROUNDOFF_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistKind {
    /// Operational quasiprobability.
    Oq,
    /// Margenau-Hill (real part of Kirkwood-Dirac).
    Mhq,
    /// Two-point measurement probabilities.
    Tpm,
    /// Weak (nonselective first measurement) two-point probabilities. Each
    /// row is a distribution on its own, so the table sums to the row count.
    Wtpm,
    /// Any other table, e.g. coarse-grained or mixed.
    Classical,
}

impl DistKind {
    pub fn is_probability(self) -> bool {
        matches!(self, DistKind::Tpm | DistKind::Wtpm)
    }

    fn expected_total(self, rows: usize) -> f64 {
        match self {
            DistKind::Wtpm => rows as f64,
            _ => 1.0,
        }
    }
}

/// Real table `q[i][f]` over first-measurement outcomes `i` and
/// second-measurement outcomes `f`, optionally labelled with energies.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiDist {
    kind: DistKind,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    energies_i: Option<Vec<f64>>,
    energies_f: Option<Vec<f64>>,
}

impl QuasiDist {
    /// Validates normalization (and non-negativity for probability kinds, after
    /// clamping round-off negatives).
    pub fn new(
        kind: DistKind,
        rows: usize,
        cols: usize,
        mut values: Vec<f64>,
        energies_i: Option<Vec<f64>>,
        energies_f: Option<Vec<f64>>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::DimMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if let Some(e) = &energies_i {
            if e.len() != rows {
                return Err(Error::DimMismatch {
                    expected: rows,
                    found: e.len(),
                });
            }
        }
        if let Some(e) = &energies_f {
            if e.len() != cols {
                return Err(Error::DimMismatch {
                    expected: cols,
                    found: e.len(),
                });
            }
        }
        if kind.is_probability() {
            for v in &mut values {
                if *v < 0.0 {
                    if *v < -ROUNDOFF_CLAMP {
                        return Err(Error::NegativeProbability(*v));
                    }
                    *v = 0.0;
                }
            }
        }
        let total: f64 = values.iter().sum();
        if !total.is_finite() || (total - kind.expected_total(rows)).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self {
            kind,
            rows,
            cols,
            values,
            energies_i,
            energies_f,
        })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.values[i * self.cols + f]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn energies_i(&self) -> Option<&[f64]> {
        self.energies_i.as_deref()
    }

    pub fn energies_f(&self) -> Option<&[f64]> {
        self.energies_f.as_deref()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `sum_f q[i][f]` for each `i`.
    pub fn marginal_i(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|f| self.get(i, f)).sum())
            .collect()
    }

    /// `sum_i q[i][f]` for each `f`.
    pub fn marginal_f(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|f| (0..self.rows).map(|i| self.get(i, f)).sum())
            .collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "table shape mismatch"
        );
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn with_kind(mut self, kind: DistKind) -> Self {
        self.kind = kind;
        self
    }

    /// Entrywise convex combination; energy labels come from the first table.
    pub fn mixture(parts: &[(f64, &QuasiDist)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::BadPartition("empty mixture".into()))?
            .1;
        let mut values = vec![0.0; first.values.len()];
        for (w, q) in parts {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::BadMixingWeight(*w));
            }
            if (q.rows, q.cols) != (first.rows, first.cols) {
                return Err(Error::DimMismatch {
                    expected: first.values.len(),
                    found: q.values.len(),
                });
            }
            for (acc, v) in values.iter_mut().zip(&q.values) {
                *acc += w * v;
            }
        }
        Self::new(
            first.kind,
            first.rows,
            first.cols,
            values,
            first.energies_i.clone(),
            first.energies_f.clone(),
        )
    }
}

/// Complex Kirkwood-Dirac table `Tr(rho A_i B_f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KdqDist {
    rows: usize,
    cols: usize,
    values: Vec<C64>,
    energies_i: Option<Vec<f64>>,
    energies_f: Option<Vec<f64>>,
}

impl KdqDist {
    /// Requires the complex total to equal one (imaginary part vanishing) to
    /// [`NORMALIZATION_TOL`].
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<C64>,
        energies_i: Option<Vec<f64>>,
        energies_f: Option<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        let total: C64 = values.iter().sum();
        if (total.re - 1.0).abs() > NORMALIZATION_TOL || total.im.abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total.re));
        }
        Ok(Self {
            rows,
            cols,
            values,
            energies_i,
            energies_f,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, f: usize) -> C64 {
        self.values[i * self.cols + f]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn total(&self) -> C64 {
        self.values.iter().sum()
    }

    /// Margenau-Hill table (real part).
    pub fn real_part(&self) -> Result<QuasiDist> {
        QuasiDist::new(
            DistKind::Mhq,
            self.rows,
            self.cols,
            self.values.iter().map(|z| z.re).collect(),
            self.energies_i.clone(),
            self.energies_f.clone(),
        )
    }
}
