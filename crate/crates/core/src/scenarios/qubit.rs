use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_marginals, uniform_grid, validate_grid};
use crate::error::{Error, Result};
use crate::jointmeas::{smeared_energy_measurements, work_extraction_compare};
use crate::qmath::{eig_hermitian, expm_hermitian_generator, DensityState, Operator};
use crate::quasiprob::{negativity, oq};
use crate::schemes::{epm_prob, outcome_probs, Channel};
use crate::thermo::{jarzynski_check, work_moment, Protocol};

fn default_phase() -> f64 {
    FRAC_PI_2
}

fn default_qubit_grid() -> Vec<f64> {
    uniform_grid(0.0, TAU, 400)
}

/// Qubit driven by a field of strength `Omega` rotating about `z` at the
/// detuning `delta`, measured at times `0` and `t`.
///
/// The input state is `[[p, c e^{i phase}], [c e^{-i phase}, 1 - p]]` in the
/// eigenbasis of `H(0)`, ground level first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitScenarioConfig {
    #[serde(rename = "Omega")]
    pub omega: f64,
    pub delta: f64,
    pub p: f64,
    pub c: f64,
    pub mu: f64,
    #[serde(default = "default_qubit_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_phase")]
    pub coherence_phase: f64,
}

impl Default for QubitScenarioConfig {
    /// `p = c = 1/2`, `Omega = 1`, `delta = (sqrt 2 + 1) Omega`, sharp
    /// measurements, 400 times on `[0, 2 pi]`.
    fn default() -> Self {
        Self {
            omega: 1.0,
            delta: std::f64::consts::SQRT_2 + 1.0,
            p: 0.5,
            c: 0.5,
            mu: 1.0,
            t_grid: default_qubit_grid(),
            beta: None,
            coherence_phase: FRAC_PI_2,
        }
    }
}

impl QubitScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.delta, self.p, self.c, self.mu, self.coherence_phase];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::ConfigInvalid("non-finite parameter".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::ConfigInvalid(format!("p = {} outside [0, 1]", self.p)));
        }
        if self.p * (1.0 - self.p) < self.c * self.c - 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "p (1 - p) = {} < c^2 = {}: state is not positive",
                self.p * (1.0 - self.p),
                self.c * self.c
            )));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::ConfigInvalid(format!("mu = {} outside [0, 1]", self.mu)));
        }
        if self.omega == 0.0 && self.delta == 0.0 {
            return Err(Error::ConfigInvalid("Omega and delta both vanish".into()));
        }
        if let Some(beta) = self.beta {
            if !(beta >= 0.0) || !beta.is_finite() {
                return Err(Error::ConfigInvalid(format!("beta = {beta} must be >= 0")));
            }
        }
        validate_grid(&self.t_grid)
    }

    /// `sqrt(delta^2 + Omega^2)`.
    pub fn gap(&self) -> f64 {
        self.delta.hypot(self.omega)
    }
}

/// `H(t) = [Omega (cos(delta t) X + sin(delta t) Y) + delta Z] / 2`.
pub fn qubit_hamiltonian(cfg: &QubitScenarioConfig, t: f64) -> Operator {
    let (s, c) = (cfg.delta * t).sin_cos();
    let field = &Operator::pauli_x().scale(c) + &Operator::pauli_y().scale(s);
    (&field.scale(cfg.omega) + &Operator::pauli_z().scale(cfg.delta)).scale(0.5)
}

/// `U(t) = exp(-i delta Z t / 2) exp(-i Omega X t / 2)`.
pub fn qubit_unitary(cfg: &QubitScenarioConfig, t: f64) -> Operator {
    let frame = expm_hermitian_generator(&Operator::pauli_z().scale(0.5 * cfg.delta), t, -1.0)
        .expect("Pauli generators are Hermitian");
    let drive = expm_hermitian_generator(&Operator::pauli_x().scale(0.5 * cfg.omega), t, -1.0)
        .expect("Pauli generators are Hermitian");
    frame.matmul(&drive)
}

pub fn qubit_initial_state(cfg: &QubitScenarioConfig) -> Result<DensityState> {
    cfg.validate()?;
    let basis = eig_hermitian(&qubit_hamiltonian(cfg, 0.0))?;
    let coherence = C64::from_polar(cfg.c, cfg.coherence_phase);
    let local = Operator::from_rows(&[
        vec![C64::new(cfg.p, 0.0), coherence],
        vec![coherence.conj(), C64::new(1.0 - cfg.p, 0.0)],
    ])?;
    let v = Operator::from_fn(2, |r, k| basis.eigenvectors[k][r]);
    DensityState::new(v.matmul(&local).matmul(&v.adjoint()).hermitian_part())
}

/// One time point of the qubit sweep. Tables are indexed `(i, f)` with
/// outcome 0 the ground level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitRow {
    pub t: f64,
    /// OQ at sharpness `mu`, row-major.
    pub q: [f64; 4],
    pub neg_oq: f64,
    /// `-<w>` over the OQ at sharpness `mu`.
    pub w_q: f64,
    /// Classical bound optimized over jointly measurable sharpness.
    pub w_cl: f64,
    pub mu_star: f64,
    /// `-<w>` over the sharp TPM distribution.
    pub w_tpm: f64,
    pub busch_margin: f64,
    pub nonclassical: bool,
    pub p_a: [f64; 2],
    pub p_b: [f64; 2],
    /// `<exp(-beta w)>` over the sharp OQ, when `beta` is configured.
    pub jarzynski_lhs: Option<f64>,
    /// `Gamma_OQ` of the sharp protocol, when `beta` is configured.
    pub gamma_oq: Option<f64>,
}

fn qubit_row(cfg: &QubitScenarioConfig, rho: &DensityState, h0: &Operator, t: f64) -> Result<QubitRow> {
    let protocol = Protocol::new(
        h0.clone(),
        qubit_hamiltonian(cfg, t),
        Channel::unitary(qubit_unitary(cfg, t))?,
    )?;
    let (a, b_h) = smeared_energy_measurements(&protocol, cfg.mu)?;
    let q = oq(rho, &a, &b_h)?;
    let p_a = outcome_probs(rho, &a)?;
    let p_b = epm_prob(rho, &b_h)?;
    check_marginals(&q, &p_a, &p_b)?;
    let cmp = work_extraction_compare(rho, &protocol, cfg.mu)?;
    let jarzynski = match cfg.beta {
        Some(beta) => Some(jarzynski_check(rho, &protocol, beta)?),
        None => None,
    };
    Ok(QubitRow {
        t,
        q: [q.get(0, 0), q.get(0, 1), q.get(1, 0), q.get(1, 1)],
        neg_oq: negativity(&q)?,
        w_q: cmp.w_q,
        w_cl: cmp.w_cl_max,
        mu_star: cmp.mu_star,
        w_tpm: -work_moment(&protocol.tpm(rho)?, 1)?,
        busch_margin: cmp.busch_margin,
        nonclassical: cmp.nonclassical,
        p_a: [p_a[0], p_a[1]],
        p_b: [p_b[0], p_b[1]],
        jarzynski_lhs: jarzynski.map(|j| j.jarzynski_lhs),
        gamma_oq: jarzynski.map(|j| j.gamma),
    })
}

/// Evaluates every grid time in parallel; rows come back in grid order.
pub fn run_qubit_sweep(cfg: &QubitScenarioConfig) -> Result<Vec<QubitRow>> {
    let rho = qubit_initial_state(cfg)?;
    let h0 = qubit_hamiltonian(cfg, 0.0);
    cfg.t_grid
        .par_iter()
        .map(|&t| qubit_row(cfg, &rho, &h0, t))
        .collect()
}
