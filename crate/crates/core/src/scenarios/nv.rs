use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_marginals, uniform_grid, validate_grid};
use crate::error::{Error, Result};
use crate::qmath::{eig_hermitian, expm_hermitian_generator, DensityState, Operator, HERMITIAN_TOL};
use crate::quasiprob::{mhq_direct, mhq_via_schemes, negativity, oq};
use crate::schemes::{epm_prob, outcome_probs, wtpm_prob, Channel};
use crate::thermo::{work_moment, Protocol};

/// Populations may deviate from one by this much before renormalization.
const POPULATION_SLACK: f64 = 1e-2;

fn default_nv_grid() -> Vec<f64> {
    uniform_grid(0.0, 0.5, 400)
}

/// Three-level system with levels `|1>, |0>, |-1>` (basis indices 0, 1, 2)
/// driven on the `|1> <-> |0>` and `|0> <-> |-1>` transitions. Times in
/// microseconds, rates in rad per microsecond.
///
/// The input state is `sum_k sqrt(p_k) e^{2 pi i a_k} |E_k>` where `k` runs over
/// `1, 0, -1` and `|E_1>, |E_0>, |E_-1>` are the eigenvectors of `H(0)` with
/// the highest, middle and lowest energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NvScenarioConfig {
    #[serde(rename = "Omega1")]
    pub omega1: f64,
    #[serde(rename = "Omega2")]
    pub omega2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub p_amplitudes: [f64; 3],
    pub a_phases: [f64; 3],
    #[serde(default = "default_nv_grid")]
    pub t_grid: Vec<f64>,
}

impl Default for NvScenarioConfig {
    /// Resonant driving at `Omega = 4.4 pi`, `phi = 1.09 Omega` and the state
    /// that minimizes the MHQ entry of the `|-1> -> |1>` transition.
    fn default() -> Self {
        let omega = 4.4 * PI;
        Self {
            omega1: omega,
            omega2: omega,
            phi1: 1.09 * omega,
            phi2: 1.09 * omega,
            p_amplitudes: [0.7654, 0.0009, 0.2338],
            a_phases: [0.0073, 0.2787, 0.0002],
            t_grid: default_nv_grid(),
        }
    }
}

impl NvScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let scalars = [self.omega1, self.omega2, self.phi1, self.phi2];
        if scalars.iter().any(|x| !x.is_finite()) {
            return Err(Error::ConfigInvalid("non-finite parameter".into()));
        }
        if let Some(p) = self.p_amplitudes.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::ConfigInvalid(format!("population {p} is negative")));
        }
        let total: f64 = self.p_amplitudes.iter().sum();
        if (total - 1.0).abs() > POPULATION_SLACK {
            return Err(Error::ConfigInvalid(format!(
                "populations sum to {total}, too far from 1 to renormalize"
            )));
        }
        if let Some(a) = self.a_phases.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::ConfigInvalid(format!("phase fraction {a} outside [0, 1)")));
        }
        validate_grid(&self.t_grid)
    }

    /// Populations scaled to sum to one, and the original sum.
    pub fn normalized_populations(&self) -> ([f64; 3], f64) {
        let total: f64 = self.p_amplitudes.iter().sum();
        (self.p_amplitudes.map(|p| p / total), total)
    }

    /// `Omega1 Sx1 - phi1 Sz1 + Omega2 Sx2 + phi2 Sz2`.
    pub fn effective_hamiltonian(&self) -> Operator {
        let ops = Spin1Ops::new();
        let parts = [
            ops.sx1.scale(self.omega1),
            ops.sz1.scale(-self.phi1),
            ops.sx2.scale(self.omega2),
            ops.sz2.scale(self.phi2),
        ];
        parts
            .iter()
            .fold(Operator::zeros(3), |acc, p| &acc + p)
    }
}

struct Spin1Ops {
    sx1: Operator,
    sy1: Operator,
    sx2: Operator,
    sy2: Operator,
    sz1: Operator,
    sz2: Operator,
}

impl Spin1Ops {
    fn new() -> Self {
        let s = FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let re = C64::new(s, 0.0);
        let im = C64::new(0.0, s);
        let pair = |a: usize, b: usize, v: C64| {
            Operator::from_fn(3, |r, c| {
                if (r, c) == (a, b) {
                    v
                } else if (r, c) == (b, a) {
                    v.conj()
                } else {
                    z
                }
            })
        };
        Self {
            sx1: pair(0, 1, re),
            sy1: pair(0, 1, -im),
            sx2: pair(1, 2, re),
            sy2: pair(1, 2, -im),
            sz1: Operator::diag(&[1.0, 0.0, 0.0]),
            sz2: Operator::diag(&[0.0, 0.0, -1.0]),
        }
    }
}

/// `Omega1 [Sx1 cos(phi1 t) + Sy1 sin(phi1 t)] + Omega2 [Sx2 cos(phi2 t) - Sy2 sin(phi2 t)]`.
pub fn nv_hamiltonian(cfg: &NvScenarioConfig, t: f64) -> Operator {
    let ops = Spin1Ops::new();
    let (s1, c1) = (cfg.phi1 * t).sin_cos();
    let (s2, c2) = (cfg.phi2 * t).sin_cos();
    let first = &ops.sx1.scale(cfg.omega1 * c1) + &ops.sy1.scale(cfg.omega1 * s1);
    let second = &ops.sx2.scale(cfg.omega2 * c2) - &ops.sy2.scale(cfg.omega2 * s2);
    (&first + &second).hermitian_part()
}

/// `exp(-i t phi1 Sz1) exp(i t phi2 Sz2) exp(-i t H_eff)`.
pub fn nv_unitary(cfg: &NvScenarioConfig, t: f64) -> Operator {
    let ops = Spin1Ops::new();
    let frame1 = expm_hermitian_generator(&ops.sz1.scale(cfg.phi1), t, -1.0)
        .expect("diagonal generator");
    let frame2 = expm_hermitian_generator(&ops.sz2.scale(cfg.phi2), t, 1.0)
        .expect("diagonal generator");
    let drive = expm_hermitian_generator(&cfg.effective_hamiltonian(), t, -1.0)
        .expect("Hermitian by construction");
    frame1.matmul(&frame2).matmul(&drive)
}

pub fn nv_initial_state(cfg: &NvScenarioConfig) -> Result<DensityState> {
    cfg.validate()?;
    let basis = eig_hermitian(&nv_hamiltonian(cfg, 0.0))?;
    if basis.levels() != 3 {
        return Err(Error::ConfigInvalid("H(0) is degenerate".into()));
    }
    let (p, _) = cfg.normalized_populations();
    let mut psi = vec![C64::new(0.0, 0.0); 3];
    // Labels 1, 0, -1 take the eigenvectors in descending energy order.
    for (k, (pk, ak)) in p.iter().zip(&cfg.a_phases).enumerate() {
        let amp = C64::from_polar(pk.sqrt(), TAU * ak);
        for (r, x) in basis.eigenvectors[2 - k].iter().enumerate() {
            psi[r] += amp * x;
        }
    }
    DensityState::pure(&psi)
}

/// One time point of the NV sweep. Tables are row-major `(i, f)` with outcomes
/// in ascending energy order, so index 1 is the zero-energy (dark) level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NvRow {
    pub t: f64,
    pub oq: [f64; 9],
    pub mhq: [f64; 9],
    pub neg_oq: f64,
    pub neg_mhq: f64,
    pub w_oq: f64,
    pub w_mhq: f64,
    pub p_a: [f64; 3],
    pub epm: [f64; 3],
    pub tpm: [f64; 9],
    pub wtpm: [f64; 9],
    pub dark_epm: f64,
}

fn to_array<const N: usize>(v: &[f64]) -> [f64; N] {
    let mut out = [0.0; N];
    out.copy_from_slice(v);
    out
}

fn nv_row(cfg: &NvScenarioConfig, rho: &DensityState, h0: &Operator, t: f64) -> Result<NvRow> {
    let h = nv_hamiltonian(cfg, t);
    h.ensure_hermitian(HERMITIAN_TOL)?;
    let u = nv_unitary(cfg, t);
    let protocol = Protocol::new(h0.clone(), h, Channel::unitary(u)?)?;
    if protocol.decomp_final().levels() != 3 {
        return Err(Error::ConfigInvalid(format!("H({t}) is degenerate")));
    }
    let (a, b_h) = (protocol.a(), protocol.b_h());
    let q = oq(rho, a, b_h)?;
    let m = mhq_direct(rho, a, b_h)?;
    let m_schemes = mhq_via_schemes(rho, a, b_h)?;
    if m.max_abs_diff(&m_schemes) > super::ROW_TOL {
        return Err(Error::NotNormalized(1.0 + m.max_abs_diff(&m_schemes)));
    }
    let p_a = outcome_probs(rho, a)?;
    let epm = epm_prob(rho, b_h)?;
    check_marginals(&q, &p_a, &epm)?;
    check_marginals(&m, &p_a, &epm)?;
    Ok(NvRow {
        t,
        oq: to_array(q.values()),
        mhq: to_array(m.values()),
        neg_oq: negativity(&q)?,
        neg_mhq: negativity(&m)?,
        w_oq: work_moment(&q, 1)?,
        w_mhq: work_moment(&m, 1)?,
        p_a: to_array(&p_a),
        epm: to_array(&epm),
        tpm: to_array(protocol.tpm(rho)?.values()),
        wtpm: to_array(wtpm_prob(rho, a, b_h)?.values()),
        dark_epm: epm[1],
    })
}

/// Evaluates every grid time in parallel; rows come back in grid order.
pub fn run_nv_sweep(cfg: &NvScenarioConfig) -> Result<Vec<NvRow>> {
    let rho = nv_initial_state(cfg)?;
    let h0 = nv_hamiltonian(cfg, 0.0);
    cfg.t_grid
        .par_iter()
        .map(|&t| nv_row(cfg, &rho, &h0, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `exp(-i t H)` by a 20-term Taylor series with scaling and squaring.
    fn taylor_expm(h: &Operator, t: f64) -> Operator {
        let norm = h.frobenius_norm() * t.abs();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scale = t / 2f64.powi(squarings);
        let x = h.scale_c(C64::new(0.0, -scale));
        let mut term = Operator::identity(h.dim());
        let mut sum = term.clone();
        for k in 1..=20 {
            term = term.matmul(&x).scale(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn effective_propagator_matches_taylor_series() {
        let cfg = NvScenarioConfig::default();
        let h = cfg.effective_hamiltonian();
        let spectral = expm_hermitian_generator(&h, 0.05, -1.0).unwrap();
        assert!(spectral.max_abs_diff(&taylor_expm(&h, 0.05)) < 1e-9);
    }

    #[test]
    fn hamiltonian_and_unitary_at_zero() {
        let cfg = NvScenarioConfig::default();
        let ops = Spin1Ops::new();
        let expect = &ops.sx1.scale(cfg.omega1) + &ops.sx2.scale(cfg.omega2);
        assert!(nv_hamiltonian(&cfg, 0.0).max_abs_diff(&expect) < 1e-15);
        assert!(nv_unitary(&cfg, 0.0).max_abs_diff(&Operator::identity(3)) < 1e-15);
    }

    #[test]
    fn unitary_across_grid() {
        let cfg = NvScenarioConfig::default();
        for &t in cfg.t_grid.iter().step_by(7) {
            let u = nv_unitary(&cfg, t);
            assert!(u.matmul(&u.adjoint()).max_abs_diff(&Operator::identity(3)) < 1e-10);
            assert!(nv_hamiltonian(&cfg, t).hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn unitary_solves_the_schroedinger_equation() {
        let cfg = NvScenarioConfig::default();
        let (t, h) = (0.13, 1e-6);
        let du = &nv_unitary(&cfg, t + h) - &nv_unitary(&cfg, t - h);
        let lhs = du.scale(0.5 / h);
        let rhs = nv_hamiltonian(&cfg, t)
            .matmul(&nv_unitary(&cfg, t))
            .scale_c(C64::new(0.0, -1.0));
        assert!(lhs.max_abs_diff(&rhs) < 1e-6);
    }

    #[test]
    fn populations_are_renormalized() {
        let cfg = NvScenarioConfig::default();
        let (p, total) = cfg.normalized_populations();
        assert!((total - 1.0001).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let rho = nv_initial_state(&cfg).unwrap();
        let basis = eig_hermitian(&nv_hamiltonian(&cfg, 0.0)).unwrap();
        let top = rho.expectation(&basis.projectors[2]).re;
        assert!((top - p[0]).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = NvScenarioConfig::default();
        cfg.a_phases[1] = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = NvScenarioConfig::default();
        cfg.p_amplitudes = [0.5, 0.5, 0.5];
        assert!(cfg.validate().is_err());
        let mut cfg = NvScenarioConfig::default();
        cfg.p_amplitudes[0] = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_sweep_rows_are_consistent() {
        let mut cfg = NvScenarioConfig::default();
        cfg.t_grid = uniform_grid(0.0, 0.5, 12);
        let rows = run_nv_sweep(&cfg).unwrap();
        for row in &rows {
            assert!((row.w_oq - row.w_mhq).abs() < 1e-9);
            assert!((row.oq.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
