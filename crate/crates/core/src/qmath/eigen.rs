//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! spectral calculus built on it (matrix functions, unitary propagators).

use num_complex::Complex64 as C64;

use super::Operator;
use crate::error::Result;

/// Tolerance for accepting an input as Hermitian, relative to its largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below this
/// (relative to the matrix norm when that exceeds one).
const OFF_DIAGONAL_STOP: f64 = 1e-14;

/// Eigenvalues closer than this (relative to the spectral scale) share a projector.
const GROUPING_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Spectral form `H = sum_x E_x Pi_x` of a Hermitian operator.
///
/// `eigenvalues`, `projectors` and `multiplicities` run over *distinct*
/// eigenvalues in ascending order. `eigenvectors` keeps one orthonormal vector
/// per eigenvalue counted with multiplicity (also ascending), with the phase of
/// each fixed so its first non-negligible component is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Operator>,
    pub multiplicities: Vec<usize>,
    pub eigenvectors: Vec<Vec<C64>>,
    /// Eigenvalue belonging to each entry of `eigenvectors`.
    pub vector_eigenvalues: Vec<f64>,
    /// Index into `eigenvalues` for each entry of `eigenvectors`.
    pub vector_level: Vec<usize>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn levels(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.levels() < self.dim()
    }

    /// `sum_x f(E_x) Pi_x`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Operator {
        let mut out = Operator::zeros(self.dim());
        for (e, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = &out + &p.scale_c(f(*e));
        }
        out
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Operator {
        self.map(|e| C64::new(f(e), 0.0))
    }

    pub fn reconstruct(&self) -> Operator {
        self.map_real(|e| e)
    }

    /// Eigenvalues repeated according to multiplicity, ascending.
    pub fn all_eigenvalues(&self) -> &[f64] {
        &self.vector_eigenvalues
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(op: &Operator) -> Result<SpectralDecomp> {
    op.ensure_hermitian(HERMITIAN_TOL)?;
    let d = op.dim();
    let (values, vectors) = jacobi(&op.hermitian_part());

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vector_eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&k| fix_phase((0..d).map(|r| vectors[(r, k)]).collect()))
        .collect();

    let scale = vector_eigenvalues
        .iter()
        .fold(1.0_f64, |m, e| m.max(e.abs()));
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut vector_level = Vec::with_capacity(d);
    for (k, &e) in vector_eigenvalues.iter().enumerate() {
        match eigenvalues.last() {
            Some(&last) if (e - last).abs() <= GROUPING_TOL * scale => {
                members.last_mut().unwrap().push(k);
            }
            _ => {
                eigenvalues.push(e);
                members.push(vec![k]);
            }
        }
        vector_level.push(eigenvalues.len() - 1);
    }
    // A group's eigenvalue is the mean of its members.
    for (value, group) in eigenvalues.iter_mut().zip(&members) {
        *value = group.iter().map(|&k| vector_eigenvalues[k]).sum::<f64>() / group.len() as f64;
    }
    let projectors = members
        .iter()
        .map(|group| {
            let mut p = Operator::zeros(d);
            for &k in group {
                p = &p + &Operator::outer(&eigenvectors[k], &eigenvectors[k]);
            }
            p.hermitian_part()
        })
        .collect();
    let multiplicities = members.iter().map(Vec::len).collect();

    Ok(SpectralDecomp {
        eigenvalues,
        projectors,
        multiplicities,
        eigenvectors,
        vector_eigenvalues,
        vector_level,
    })
}

/// `exp(sign * i * t * H)` for Hermitian `H`; `sign = -1` is the Schrodinger propagator.
pub fn expm_hermitian_generator(h: &Operator, t: f64, sign: f64) -> Result<Operator> {
    let decomp = eig_hermitian(h)?;
    Ok(decomp.map(|e| C64::from_polar(1.0, sign.signum() * t * e)))
}

fn fix_phase(mut v: Vec<C64>) -> Vec<C64> {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-8 * norm)
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm() / norm;
    for z in &mut v {
        *z *= phase;
    }
    v
}

/// Cyclic Jacobi for a Hermitian matrix. Returns unsorted eigenvalues and the
/// unitary whose columns are the corresponding eigenvectors.
fn jacobi(h: &Operator) -> (Vec<f64>, Operator) {
    let d = h.dim();
    let mut a = h.clone();
    let mut v = Operator::identity(d);
    let stop = OFF_DIAGONAL_STOP * h.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) < stop {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let values = (0..d).map(|k| a[(k, k)].re).collect();
    (values, v)
}

fn off_diagonal_mass(a: &Operator) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                acc += a[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `a[p][q]` with the unitary plane rotation
/// `G = [[c, -s e^{i phi}], [s e^{-i phi}, c]]` on rows/columns `p, q`,
/// where `a[p][q] = |a[p][q]| e^{i phi}`.
fn rotate(a: &mut Operator, v: &mut Operator, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        -1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
    } else {
        1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = C64::new(c, 0.0);
    let g_pq = -phase * s;
    let g_qp = phase.conj() * s;
    let g_qq = C64::new(c, 0.0);

    let d = a.dim();
    // A <- A G ; V <- V G
    for k in 0..d {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    // A <- G^dagger A
    for k in 0..d {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}
