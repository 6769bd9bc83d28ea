use num_complex::Complex64 as C64;

use super::eigen::{eig_hermitian, SpectralDecomp};
use super::Operator;
use crate::error::{Error, Result};

/// Tolerance used to validate density operators (Hermiticity, positivity, trace).
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues below this contribute nothing to entropies (`x ln x -> 0`).
const ENTROPY_CUTOFF: f64 = 1e-12;

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    op: Operator,
}

impl DensityState {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_finite() {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        let defect = op.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NonHermitian(defect));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::NotUnitTrace(tr.re));
        }
        let op = op.hermitian_part();
        let min_eig = eig_hermitian(&op)?.eigenvalues[0];
        if min_eig < -STATE_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { op })
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidOperator("zero state vector".into()));
        }
        Self::new(Operator::projector(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Convex combination `sum_k w_k rho_k`. Weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityState)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidOperator("empty mixture".into()))?;
        let mut op = Operator::zeros(first.1.dim());
        for (w, rho) in parts {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::BadMixingWeight(*w));
            }
            op.ensure_same_dim(rho.op())?;
            op = &op + &rho.op.scale(*w);
        }
        Self::new(op)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// `Tr(rho X)`.
    pub fn expectation(&self, x: &Operator) -> C64 {
        self.op.trace_product(x)
    }
}

/// Inverse temperature together with the initial and final Hamiltonians.
#[derive(Clone, Debug)]
pub struct ThermoParams {
    pub beta: f64,
    pub h_initial: Operator,
    pub h_final: Operator,
}

impl ThermoParams {
    pub fn new(beta: f64, h_initial: Operator, h_final: Operator) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::BetaNegative(beta));
        }
        h_initial.ensure_hermitian(STATE_TOL)?;
        h_final.ensure_hermitian(STATE_TOL)?;
        h_initial.ensure_same_dim(&h_final)?;
        Ok(Self {
            beta,
            h_initial,
            h_final,
        })
    }

    pub fn log_partition_initial(&self) -> Result<f64> {
        Ok(log_partition(&eig_hermitian(&self.h_initial)?, self.beta))
    }

    pub fn log_partition_final(&self) -> Result<f64> {
        Ok(log_partition(&eig_hermitian(&self.h_final)?, self.beta))
    }

    /// `Delta F = -(1/beta) ln(Z_f / Z_i)`; at `beta = 0` the limit
    /// `(Tr H_f - Tr H_i) / d` is returned.
    pub fn delta_free_energy(&self) -> Result<f64> {
        let fi = eig_hermitian(&self.h_initial)?;
        let ff = eig_hermitian(&self.h_final)?;
        Ok(delta_free_energy(&fi, &ff, self.beta))
    }
}

/// `ln Tr exp(-beta H)` evaluated with the ground energy factored out.
pub fn log_partition(decomp: &SpectralDecomp, beta: f64) -> f64 {
    let energies = decomp.all_eigenvalues();
    let shift = if beta >= 0.0 {
        energies[0]
    } else {
        energies[energies.len() - 1]
    };
    let sum: f64 = energies.iter().map(|e| (-beta * (e - shift)).exp()).sum();
    -beta * shift + sum.ln()
}

pub(crate) fn delta_free_energy(initial: &SpectralDecomp, fin: &SpectralDecomp, beta: f64) -> f64 {
    if beta == 0.0 {
        let mean = |d: &SpectralDecomp| {
            d.all_eigenvalues().iter().sum::<f64>() / d.dim() as f64
        };
        return mean(fin) - mean(initial);
    }
    -(log_partition(fin, beta) - log_partition(initial, beta)) / beta
}

/// Gibbs operator `exp(-beta H) / Z` for any finite `beta`; negative values give
/// population-inverted states, which the generating-function machinery needs.
pub(crate) fn gibbs_operator(decomp: &SpectralDecomp, beta: f64) -> Operator {
    let log_z = log_partition(decomp, beta);
    decomp.map_real(|e| (-beta * e - log_z).exp()).hermitian_part()
}

/// Thermal state `exp(-beta H) / Tr exp(-beta H)`.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<DensityState> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::BetaNegative(beta));
    }
    let decomp = eig_hermitian(h)?;
    let mut op = gibbs_operator(&decomp, beta);
    // Renormalize away the last ulp so Tr = 1 to machine precision.
    let tr = op.trace().re;
    op = op.scale(1.0 / tr);
    Ok(DensityState { op })
}

/// Splits `rho` into its block-diagonal part `sum_x Pi_x rho Pi_x` in the given
/// basis and the traceless remainder.
pub fn dephase(rho: &DensityState, basis: &SpectralDecomp) -> Result<(DensityState, Operator)> {
    rho.op().ensure_same_dim(&basis.projectors[0])?;
    let diag = dephase_operator(rho.op(), basis);
    let off = rho.op() - &diag;
    Ok((DensityState { op: diag }, off))
}

pub(crate) fn dephase_operator(op: &Operator, basis: &SpectralDecomp) -> Operator {
    let mut out = Operator::zeros(op.dim());
    for p in &basis.projectors {
        out = &out + &p.matmul(op).matmul(p);
    }
    out.hermitian_part()
}

/// Von Neumann entropy `-Tr(rho ln rho)` in nats.
pub fn entropy_vn(rho: &DensityState) -> f64 {
    let decomp = eig_hermitian(rho.op()).expect("density operators are Hermitian");
    decomp
        .all_eigenvalues()
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Relative entropy of coherence `S(rho_D) - S(rho)`.
pub fn coherence_rel_entropy(rho: &DensityState, basis: &SpectralDecomp) -> Result<f64> {
    let (diag, _) = dephase(rho, basis)?;
    Ok(entropy_vn(&diag) - entropy_vn(rho))
}

/// l1-norm of coherence: sum of `|rho_ab|` over basis-vector pairs that lie in
/// different eigenspaces of `basis`.
pub fn coherence_l1(rho: &DensityState, basis: &SpectralDecomp) -> Result<f64> {
    rho.op().ensure_same_dim(&basis.projectors[0])?;
    let vecs = &basis.eigenvectors;
    let mut total = 0.0;
    for (a, va) in vecs.iter().enumerate() {
        let rho_vb: Vec<Vec<C64>> = vecs.iter().map(|vb| rho.op().apply(vb)).collect();
        for (b, rvb) in rho_vb.iter().enumerate() {
            if basis.vector_level[a] == basis.vector_level[b] {
                continue;
            }
            let elem: C64 = va.iter().zip(rvb).map(|(x, y)| x.conj() * y).sum();
            total += elem.norm();
        }
    }
    Ok(total)
}

/// Sum of singular values. Hermitian input uses `sum |lambda|` directly.
pub fn trace_norm(op: &Operator) -> f64 {
    if op.is_hermitian(1e-12 * op.max_abs().max(1.0)) {
        let dec = eig_hermitian(&op.hermitian_part()).expect("checked Hermitian");
        return dec.all_eigenvalues().iter().map(|l| l.abs()).sum();
    }
    let gram = op.adjoint().matmul(op);
    let dec = eig_hermitian(&gram.hermitian_part()).expect("Gram matrices are Hermitian");
    dec.all_eigenvalues()
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn plus_state() -> DensityState {
        DensityState::new(Operator::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap())
            .unwrap()
    }

    fn z_basis() -> SpectralDecomp {
        eig_hermitian(&Operator::pauli_z()).unwrap()
    }

    #[test]
    fn validation_errors() {
        let not_unit = Operator::diag(&[0.5, 0.6]);
        assert!(matches!(DensityState::new(not_unit), Err(Error::NotUnitTrace(_))));
        let neg = Operator::diag(&[1.2, -0.2]);
        assert!(matches!(DensityState::new(neg), Err(Error::NotPsd(_))));
        let mut nh = Operator::diag(&[0.5, 0.5]);
        nh[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityState::new(nh), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn gibbs_examples() {
        let g0 = gibbs_state(&Operator::pauli_x(), 0.0).unwrap();
        assert!(g0.op().max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);

        let h = Operator::diag(&[-0.5, 0.5]);
        let g = gibbs_state(&h, 1.0).unwrap();
        let z = 0.5f64.exp() + (-0.5f64).exp();
        let expected = Operator::diag(&[0.5f64.exp() / z, (-0.5f64).exp() / z]);
        assert!(g.op().max_abs_diff(&expected) < 1e-15);
        assert!(matches!(gibbs_state(&h, -1.0), Err(Error::BetaNegative(_))));
    }

    #[test]
    fn gibbs_of_rotating_field_qubit_matches_spectral_oracle() {
        let delta = 2f64.sqrt() + 1.0;
        let h = &Operator::pauli_x().scale(0.5) + &Operator::pauli_z().scale(0.5 * delta);
        let g = gibbs_state(&h, 1.0).unwrap();
        // Oracle: closed form exp(-H) = cosh(a) I - sinh(a) H / a for H^2 = a^2 I.
        let a = (1.0 + delta * delta).sqrt() / 2.0;
        let expm = &Operator::identity(2).scale(a.cosh()) - &h.scale(a.sinh() / a);
        let oracle = expm.scale(1.0 / expm.trace().re);
        assert!(g.op().max_abs_diff(&oracle) < 1e-14);
        assert!(g.op().commutator(&h).max_abs() < 1e-10);
        assert!((g.op().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gibbs_random_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let h = random::hermitian(3, 1.0, &mut rng);
            for beta in [0.0, 0.3, 5.0] {
                let g = gibbs_state(&h, beta).unwrap();
                assert!((g.op().trace().re - 1.0).abs() < 1e-12);
                assert!(g.op().commutator(&h).max_abs() < 1e-10);
            }
            let tiny = gibbs_state(&h, 1e-12).unwrap();
            assert!(tiny.op().max_abs_diff(&Operator::identity(3).scale(1.0 / 3.0)) < 1e-11);
        }
    }

    #[test]
    fn dephase_examples() {
        let (diag, off) = dephase(&plus_state(), &z_basis()).unwrap();
        assert!(diag.op().max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
        assert!(off.max_abs_diff(&Operator::pauli_x().scale(0.5)) < 1e-15);

        let incoherent = DensityState::new(Operator::diag(&[0.3, 0.7])).unwrap();
        let (_, off) = dephase(&incoherent, &z_basis()).unwrap();
        assert_eq!(off.max_abs(), 0.0);
    }

    #[test]
    fn dephase_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let rho = random::density(3, &mut rng);
            let basis = eig_hermitian(&random::hermitian(3, 1.0, &mut rng)).unwrap();
            let (diag, off) = dephase(&rho, &basis).unwrap();
            assert!((&diag.op().clone() + &off).max_abs_diff(rho.op()) < 1e-12);
            assert!(off.trace().norm() < 1e-12);
            for p in &basis.projectors {
                assert!(diag.op().commutator(p).max_abs() < 1e-10);
            }
            assert!(coherence_rel_entropy(&diag, &basis).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy_vn(&plus_state()).abs() < 1e-12);
        assert!((entropy_vn(&DensityState::maximally_mixed(2)) - LN_2).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random::density(2, &mut rng);
        let r = super::super::bloch::state_to_bloch(&rho);
        let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let (l1, l2) = ((1.0 + n) / 2.0, (1.0 - n) / 2.0);
        let oracle = -l1 * l1.ln() - l2 * l2.ln();
        assert!((entropy_vn(&rho) - oracle).abs() < 1e-12);
    }

    #[test]
    fn coherence_examples() {
        let basis = z_basis();
        let inc = DensityState::new(Operator::diag(&[0.25, 0.75])).unwrap();
        assert!(coherence_rel_entropy(&inc, &basis).unwrap().abs() < 1e-12);
        assert_eq!(coherence_l1(&inc, &basis).unwrap(), 0.0);

        let plus = plus_state();
        assert!((coherence_rel_entropy(&plus, &basis).unwrap() - LN_2).abs() < 1e-12);
        assert!((coherence_l1(&plus, &basis).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_measures_vanish_together() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let rho = random::density(3, &mut rng);
            let basis = eig_hermitian(&random::hermitian(3, 1.0, &mut rng)).unwrap();
            let crel = coherence_rel_entropy(&rho, &basis).unwrap();
            let cl1 = coherence_l1(&rho, &basis).unwrap();
            assert!(crel >= -1e-10 && cl1 >= -1e-10);
            let (diag, _) = dephase(&rho, &basis).unwrap();
            assert!(coherence_l1(&diag, &basis).unwrap() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&Operator::zeros(3)), 0.0);
        // rho_off for c = 1/2 has eigenvalues +-1/2.
        assert!((trace_norm(&Operator::pauli_x().scale(0.5)) - 1.0).abs() < 1e-15);
        // Non-Hermitian: |0><1| has a single singular value 1.
        let mut e01 = Operator::zeros(2);
        e01[(0, 1)] = C64::new(1.0, 0.0);
        assert!((trace_norm(&e01) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_is_a_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let a = random::hermitian(3, 1.0, &mut rng);
            let b = random::hermitian(3, 1.0, &mut rng);
            let dec = eig_hermitian(&a).unwrap();
            let oracle: f64 = dec.all_eigenvalues().iter().map(|l| l.abs()).sum();
            assert!((trace_norm(&a) - oracle).abs() < 1e-12);
            assert!(trace_norm(&(&a + &b)) <= trace_norm(&a) + trace_norm(&b) + 1e-12);
            assert!((trace_norm(&a.scale(-2.5)) - 2.5 * trace_norm(&a)).abs() < 1e-11);
            let g = random::ginibre(3, &mut rng);
            let k = C64::new(0.3, -1.1);
            assert!((trace_norm(&g.scale_c(k)) - k.norm() * trace_norm(&g)).abs() < 1e-10);
        }
    }
}
