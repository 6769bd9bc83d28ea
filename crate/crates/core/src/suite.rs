//! Seeded invariant suite: one check per acceptance criterion, used by the
//! `check` command and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::jointmeas::{busch_criterion, oq_positivity_certificate};
use crate::qmath::{
    bloch_to_state, eig_hermitian, gibbs_state, DensityState, Operator, Vec3,
};
use crate::quasiprob::{
    coarse_grain, decohere_state, mhq_direct, mhq_via_schemes, negativity, oq,
    oq_via_characteristic,
};
use crate::random;
use crate::scenarios::{run_nv_sweep, run_qubit_sweep, NvScenarioConfig, QubitScenarioConfig};
use crate::schemes::{epm_prob, heisenberg, outcome_probs, tpm_prob, Channel, Povm};
use crate::table::QuasiDist;
use crate::thermo::{
    gamma_terms, hoelder_bound_check, jarzynski_check, second_law_decomposition,
    second_moment_bound_check, trace_norm_witness, work_generating_function, work_split,
    Protocol,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    /// `PASS [ 3] name: detail`.
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn outcome(id: u32, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionOutcome {
    match body() {
        Ok((passed, detail)) => CriterionOutcome {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(id))
}

fn dim_for(k: usize) -> usize {
    2 + k % 3
}

/// Random projective `A`, random projective `B` transported by a random unitary.
fn random_setting(d: usize, rng: &mut ChaCha8Rng) -> Result<(Povm, Povm)> {
    let a = random::projective_povm(d, rng);
    let b = random::projective_povm(d, rng);
    let ch = Channel::unitary(random::unitary(d, rng))?;
    Ok((a, heisenberg(&b, &ch)?))
}

fn random_protocol(d: usize, half_width: f64, rng: &mut ChaCha8Rng) -> Result<Protocol> {
    let hi = random::hamiltonian(d, half_width, rng);
    let hf = random::hamiltonian(d, half_width, rng);
    Protocol::new(hi, hf, Channel::unitary(random::unitary(d, rng))?)
}

pub fn marginality(seed: u64) -> CriterionOutcome {
    outcome(1, "marginality", || {
        let mut rng = rng_for(seed, 1);
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let d = dim_for(k);
            let rho = random::density(d, &mut rng);
            let (a, b_h) = random_setting(d, &mut rng)?;
            let q = oq(&rho, &a, &b_h)?;
            let pa = outcome_probs(&rho, &a)?;
            let pb = epm_prob(&rho, &b_h)?;
            for (x, y) in q.marginal_i().iter().zip(&pa).chain(q.marginal_f().iter().zip(&pb)) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max marginal error {worst:.2e} over 1000 instances")))
    })
}

pub fn tpm_and_convexity(seed: u64) -> CriterionOutcome {
    outcome(2, "TPM reproducibility and convex linearity", || {
        let mut rng = rng_for(seed, 2);
        let mut worst_t2: f64 = 0.0;
        let mut worst_t3: f64 = 0.0;
        for k in 0..500 {
            let d = dim_for(k);
            let (a, b_h) = random_setting(d, &mut rng)?;
            let rho = random::incoherent_state(&a, &mut rng);
            worst_t2 = worst_t2.max(oq(&rho, &a, &b_h)?.max_abs_diff(&tpm_prob(&rho, &a, &b_h)?));
        }
        for k in 0..500 {
            let d = dim_for(k);
            let (a, b_h) = random_setting(d, &mut rng)?;
            let parts = 2 + k % 3;
            let states: Vec<DensityState> = (0..parts).map(|_| random::density(d, &mut rng)).collect();
            let raw: Vec<f64> = (0..parts).map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let mix = DensityState::mixture(
                &weights.iter().copied().zip(states.iter()).collect::<Vec<_>>(),
            )?;
            let tables = states
                .iter()
                .map(|s| oq(s, &a, &b_h))
                .collect::<Result<Vec<_>>>()?;
            let combined = QuasiDist::mixture(
                &weights.iter().copied().zip(tables.iter()).collect::<Vec<_>>(),
            )?;
            worst_t3 = worst_t3.max(oq(&mix, &a, &b_h)?.max_abs_diff(&combined));
        }
        Ok((
            worst_t2 <= 1e-11 && worst_t3 <= 1e-11,
            format!("incoherent OQ vs TPM {worst_t2:.2e}, mixture linearity {worst_t3:.2e}"),
        ))
    })
}

pub fn fourier_oracle(seed: u64) -> CriterionOutcome {
    outcome(3, "OQ equals inverse-Fourier construction", || {
        let mut rng = rng_for(seed, 3);
        let mut worst: f64 = 0.0;
        for k in 0..500 {
            let d = dim_for(k);
            let rho = random::density(d, &mut rng);
            let (a, b_h) = random_setting(d, &mut rng)?;
            worst = worst.max(oq(&rho, &a, &b_h)?.max_abs_diff(&oq_via_characteristic(&rho, &a, &b_h)?));
        }
        Ok((worst <= 1e-11, format!("max entry difference {worst:.2e} over 500 instances")))
    })
}

pub fn jarzynski_gibbs(seed: u64) -> CriterionOutcome {
    outcome(4, "Jarzynski equality for Gibbs input", || {
        let mut rng = rng_for(seed, 4);
        let mut worst: f64 = 0.0;
        for beta in [0.1, 1.0, 10.0] {
            for k in 0..200 {
                let p = random_protocol(dim_for(k), 0.5, &mut rng)?;
                let rho = gibbs_state(p.h_initial(), beta)?;
                let s = jarzynski_check(&rho, &p, beta)?;
                let target = (-beta * s.delta_f).exp();
                worst = worst.max(((s.jarzynski_lhs - target) / target).abs());
            }
        }
        Ok((worst <= 1e-9, format!("max relative error {worst:.2e} over 600 runs")))
    })
}

pub fn modified_jarzynski(seed: u64) -> CriterionOutcome {
    outcome(5, "modified Jarzynski equality", || {
        let mut rng = rng_for(seed, 5);
        let mut worst_coherent: f64 = 0.0;
        let mut worst_incoherent: f64 = 0.0;
        for k in 0..300 {
            let p = random_protocol(dim_for(k), 1.0, &mut rng)?;
            let beta = [0.1, 0.5, 1.0, 2.0, 5.0][k % 5];
            let rho = random::density(p.dim(), &mut rng);
            let q = p.oq(&rho)?;
            let direct = work_generating_function(&q, beta)?;
            let s = jarzynski_check(&rho, &p, beta)?;
            let closed = (-beta * s.delta_f).exp() * s.gamma;
            worst_coherent = worst_coherent.max((direct - closed).abs() / closed.abs().max(1.0));
            let incoherent = random::incoherent_state(p.a(), &mut rng);
            let g = gamma_terms(&incoherent, &p, beta)?;
            worst_incoherent = worst_incoherent.max((g.oq - g.tpm).abs());
        }
        Ok((
            worst_coherent <= 1e-9 && worst_incoherent <= 1e-11,
            format!(
                "table sum vs closed form {worst_coherent:.2e}, incoherent Gamma_OQ - Gamma_TPM {worst_incoherent:.2e}"
            ),
        ))
    })
}

pub fn moment_identities(seed: u64) -> CriterionOutcome {
    outcome(6, "work split, second-law decomposition and bounds", || {
        let mut rng = rng_for(seed, 6);
        let mut split_err: f64 = 0.0;
        let mut law_err: f64 = 0.0;
        let mut law_gap: f64 = f64::INFINITY;
        let mut hoelder_violation: f64 = f64::NEG_INFINITY;
        let mut moment_violation: f64 = f64::NEG_INFINITY;
        for k in 0..1000 {
            let d = dim_for(k);
            let mut hi = random::hamiltonian(d, 1.0, &mut rng);
            let shift = hi.trace().re / d as f64;
            hi = &hi - &Operator::identity(d).scale(shift);
            let hf = random::hamiltonian(d, 1.0, &mut rng);
            let p = Protocol::new(hi, hf, Channel::unitary(random::unitary(d, &mut rng))?)?;
            let rho = if k % 4 == 0 {
                random::pure_state(d, &mut rng)
            } else {
                random::density(d, &mut rng)
            };
            let s = work_split(&rho, &p)?;
            split_err = split_err.max((s.w_oq - s.w_tpm - s.coherent).abs());
            let beta = 0.2 + 2.0 * rng.random::<f64>();
            let law = second_law_decomposition(&rho, &p, beta)?;
            law_err = law_err.max(law.residual());
            law_gap = law_gap.min(law.delta_f - law.delta_w);
            let h = hoelder_bound_check(&rho, &p)?;
            hoelder_violation = hoelder_violation.max(h.abs_delta_w - h.bound);
            let m = second_moment_bound_check(&rho, &p)?;
            moment_violation = moment_violation.max(m.lower_bound - m.m2);
        }
        let passed = split_err <= 1e-9
            && law_err <= 1e-9
            && law_gap >= -1e-9
            && hoelder_violation <= 1e-9
            && moment_violation <= 1e-9;
        Ok((
            passed,
            format!(
                "split {split_err:.2e}, decomposition {law_err:.2e}, min(dF - dw) {law_gap:.2e}, \
                 Hoelder excess {hoelder_violation:.2e}, second-moment excess {moment_violation:.2e}"
            ),
        ))
    })
}

pub fn oq_equals_mhq_qubit(seed: u64) -> CriterionOutcome {
    outcome(7, "OQ equals MHQ for binary qubit measurements", || {
        let mut rng = rng_for(seed, 7);
        let mut worst: f64 = 0.0;
        let mut worst_schemes: f64 = 0.0;
        for _ in 0..1000 {
            let rho = random::density(2, &mut rng);
            let a = random::binary_qubit_povm(&mut rng);
            let b = random::binary_qubit_povm(&mut rng);
            let q = oq(&rho, &a, &b)?;
            worst = worst.max(q.max_abs_diff(&mhq_direct(&rho, &a, &b)?));
            worst_schemes = worst_schemes.max(q.max_abs_diff(&mhq_via_schemes(&rho, &a, &b)?));
        }
        // Same comparison with the first measurement unbiased.
        let mut worst_unbiased: f64 = 0.0;
        for _ in 0..1000 {
            let rho = random::density(2, &mut rng);
            let mu = rng.random::<f64>();
            let a = random::binary_qubit_povm_with(0.0, &crate::qmath::scale(&random::unit_vec3(&mut rng), mu));
            let b = random::binary_qubit_povm(&mut rng);
            worst_unbiased = worst_unbiased.max(oq(&rho, &a, &b)?.max_abs_diff(&mhq_direct(&rho, &a, &b)?));
        }
        Ok((
            worst <= 1e-10,
            format!(
                "max |OQ - MHQ| {worst:.2e} with biased A, {worst_unbiased:.2e} with unbiased A \
                 (scheme route {worst_schemes:.2e})"
            ),
        ))
    })
}

/// OQ tables at `r = 0` and along each axis; by affinity in `rho` these give
/// the table at any Bloch vector.
fn affine_oq(a: &Povm, b: &Povm) -> Result<[[f64; 4]; 4]> {
    let mut out = [[0.0; 4]; 4];
    let axes: [Vec3; 4] = [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (k, r) in axes.iter().enumerate() {
        let q = oq(&bloch_to_state(r)?, a, b)?;
        out[k].copy_from_slice(q.values());
    }
    Ok(out)
}

pub fn positivity_grid(seed: u64) -> CriterionOutcome {
    outcome(8, "positivity certificate, Busch criterion and sampled positivity agree", || {
        let mut rng = rng_for(seed, 8);
        let states: Vec<Vec3> = (0..10_000).map(|_| random::unit_vec3(&mut rng)).collect();
        let points: Vec<(f64, f64)> = (0..25)
            .flat_map(|k| {
                let theta = 0.1 + (3.04 - 0.1) * k as f64 / 24.0;
                (0..20).map(move |l| (theta, 0.05 + 0.95 * l as f64 / 19.0))
            })
            .collect();
        let results = points
            .par_iter()
            .map(|&(theta, mu)| -> Result<Option<bool>> {
                let v_i: Vec3 = [0.0, 0.0, mu];
                let v_f: Vec3 = [mu * theta.sin(), 0.0, mu * theta.cos()];
                let (jm, margin) = busch_criterion(&v_i, &v_f);
                if margin.abs() < 1e-9 {
                    return Ok(None);
                }
                let cert = oq_positivity_certificate(&v_i, &v_f);
                let a = crate::jointmeas::make_unbiased_povm(&[0.0, 0.0, 1.0], mu)?;
                let b = crate::jointmeas::make_unbiased_povm(&[theta.sin(), 0.0, theta.cos()], mu)?;
                let base = affine_oq(&a, &b)?;
                let min = states
                    .iter()
                    .map(|r| {
                        (0..4)
                            .map(|c| {
                                let q0 = base[0][c];
                                q0 + r[0] * (base[1][c] - q0)
                                    + r[1] * (base[2][c] - q0)
                                    + r[2] * (base[3][c] - q0)
                            })
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::INFINITY, f64::min);
                let sampled = min >= -1e-12;
                Ok(Some(cert == jm && jm == sampled))
            })
            .collect::<Result<Vec<_>>>()?;
        let checked = results.iter().filter(|r| r.is_some()).count();
        let disagreements = results.iter().filter(|r| **r == Some(false)).count();
        Ok((
            disagreements == 0,
            format!("{disagreements} disagreements over {checked} grid points"),
        ))
    })
}

/// Regression values of the qubit sweep at the default configuration.
pub const QUBIT_MIN_Q01: f64 = -0.101_1;
pub const QUBIT_MAX_GAP: f64 = 0.151_6;

pub fn qubit_scenario(_seed: u64) -> CriterionOutcome {
    outcome(9, "qubit work extraction beyond the classical bound", || {
        let cfg = QubitScenarioConfig::default();
        let rows = run_qubit_sweep(&cfg)?;
        let delta = cfg.gap();
        let min_q01 = rows.iter().map(|r| r.q[1]).fold(f64::INFINITY, f64::min);
        let max_gap = rows.iter().map(|r| r.w_q - r.w_cl).fold(f64::NEG_INFINITY, f64::max);
        let tpm = rows.iter().map(|r| r.w_tpm.abs()).fold(0.0, f64::max);
        let nonclassical = rows.iter().filter(|r| r.nonclassical).count();
        let consistent = rows.iter().filter(|r| r.nonclassical).all(|r| r.busch_margin < 0.0);
        let passed = min_q01 < -1e-3
            && max_gap > 1e-3 * delta
            && consistent
            && tpm <= 1e-10
            && (min_q01 - QUBIT_MIN_Q01).abs() < 1e-3
            && (max_gap - QUBIT_MAX_GAP).abs() < 1e-3;
        Ok((
            passed,
            format!(
                "min q01 {min_q01:.4}, max W_q - W_cl {max_gap:.4} (Delta {delta:.4}), \
                 {nonclassical} nonclassical points, max |W_TPM| {tpm:.1e}"
            ),
        ))
    })
}

/// Smallest accepted `max_t |N[OQ] - N[MHQ]|` in the NV sweep.
pub const NV_NEGATIVITY_GAP_FLOOR: f64 = 0.05;

pub fn nv_scenario(_seed: u64) -> CriterionOutcome {
    outcome(10, "NV center: equal work, different negativity, dark level", || {
        let cfg = NvScenarioConfig::default();
        let rows = run_nv_sweep(&cfg)?;
        let work_gap = rows.iter().map(|r| (r.w_oq - r.w_mhq).abs()).fold(0.0, f64::max);
        let neg_gap = rows.iter().map(|r| (r.neg_oq - r.neg_mhq).abs()).fold(0.0, f64::max);
        let dark = rows.iter().map(|r| r.dark_epm).fold(0.0, f64::max);
        let (p, _) = cfg.normalized_populations();
        let dark_bound = p[1] + 1e-9;
        Ok((
            work_gap <= 1e-9 && neg_gap > NV_NEGATIVITY_GAP_FLOOR && dark <= dark_bound && dark < 1e-3,
            format!(
                "max |<w>_OQ - <w>_MHQ| {work_gap:.1e}, max |N_OQ - N_MHQ| {neg_gap:.4}, \
                 max dark EPM {dark:.3e} (bound {dark_bound:.3e})"
            ),
        ))
    })
}

fn random_partition(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let blocks = 1 + rng.random_range(0..n);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for k in 0..n {
        let b = if k < blocks { k } else { rng.random_range(0..blocks) };
        out[b].push(k);
    }
    out
}

pub fn negativity_properties(seed: u64) -> CriterionOutcome {
    outcome(11, "negativity properties", || {
        let mut rng = rng_for(seed, 11);
        let mut failures = Vec::new();
        let mut faithful: f64 = 0.0;
        let mut witness_hits = 0;
        let mut convex: f64 = f64::NEG_INFINITY;
        let mut decoherence: f64 = f64::NEG_INFINITY;
        let mut coarse: f64 = f64::NEG_INFINITY;
        for k in 0..500 {
            let d = dim_for(k);
            let (a, b_h) = if k % 5 == 0 {
                // Commuting measurements.
                let a = random::projective_povm(d, &mut rng);
                (a.clone(), a)
            } else {
                random_setting(d, &mut rng)?
            };
            let rho = if k % 7 == 0 {
                random::incoherent_state(&a, &mut rng)
            } else {
                random::density(d, &mut rng)
            };
            let q = oq(&rho, &a, &b_h)?;
            let n = negativity(&q)?;
            let neg_mass: f64 = q.values().iter().filter(|v| **v < 0.0).map(|v| -v).sum();
            faithful = faithful.max((n - 2.0 * neg_mass).abs()).max(-n);

            if n > 1e-9 {
                witness_hits += 1;
                let state_nc = a.effects().iter().any(|e| rho.op().commutator(e).max_abs() > 1e-9);
                let meas_nc = a.effects().iter().any(|e| {
                    b_h.effects().iter().any(|f| e.commutator(f).max_abs() > 1e-9)
                });
                if !(state_nc && meas_nc) {
                    failures.push(format!("negativity {n:.2e} with commuting operators"));
                }
            }

            let other = oq(&random::density(d, &mut rng), &a, &b_h)?;
            let w = rng.random::<f64>();
            let mixed = QuasiDist::mixture(&[(w, &q), (1.0 - w, &other)])?;
            convex = convex.max(negativity(&mixed)? - w * n - (1.0 - w) * negativity(&other)?);

            let basis = eig_hermitian(&{
                let mut obs = Operator::zeros(d);
                for (k, e) in a.effects().iter().enumerate() {
                    obs = &obs + &e.scale(k as f64);
                }
                obs
            })?;
            let mut prev = n;
            for s in [0.25, 0.5, 0.75, 1.0] {
                let ns = negativity(&oq(&decohere_state(&rho, &basis, s)?, &a, &b_h)?)?;
                decoherence = decoherence.max(ns - prev);
                prev = ns;
            }

            let coarse_q = coarse_grain(
                &q,
                &random_partition(q.rows(), &mut rng),
                &random_partition(q.cols(), &mut rng),
            )?;
            coarse = coarse.max(negativity(&coarse_q)? - n);
        }
        let passed = failures.is_empty()
            && faithful <= 1e-11
            && convex <= 1e-11
            && decoherence <= 1e-11
            && coarse <= 1e-11;
        Ok((
            passed,
            format!(
                "faithfulness {faithful:.1e}, witness checked on {witness_hits} negative tables \
                 ({} failures), convexity {convex:.1e}, decoherence {decoherence:.1e}, coarse-graining {coarse:.1e}",
                failures.len()
            ),
        ))
    })
}

pub fn trace_norm_witness_scan(seed: u64) -> CriterionOutcome {
    outcome(12, "trace-norm coherence witness", || {
        let mut rng = rng_for(seed, 12);
        let a = Povm::projective(&eig_hermitian(&Operator::pauli_z())?);
        let mut worst: f64 = 0.0;
        for c in [0.1, 0.3, 0.5] {
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let z = num_complex::Complex64::from_polar(c, phase);
            let rho = DensityState::new(Operator::from_rows(&[
                vec![num_complex::Complex64::new(0.5, 0.0), z],
                vec![z.conj(), num_complex::Complex64::new(0.5, 0.0)],
            ])?)?;
            let w = trace_norm_witness(&rho, &a, (360, 720))?;
            worst = worst.max((w - 2.0 * c).abs());
        }
        Ok((worst <= 1e-3, format!("max |scan - 2|c|| {worst:.2e}")))
    })
}

const CHECKS: [fn(u64) -> CriterionOutcome; 12] = [
    marginality,
    tpm_and_convexity,
    fourier_oracle,
    jarzynski_gibbs,
    modified_jarzynski,
    moment_identities,
    oq_equals_mhq_qubit,
    positivity_grid,
    qubit_scenario,
    nv_scenario,
    negativity_properties,
    trace_norm_witness_scan,
];

/// All criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CHECKS.iter().map(|f| f(seed)).collect()
}

/// The criteria with the given ids (1-based), in the order given; unknown ids are skipped.
pub fn run_selected(seed: u64, ids: &[u32]) -> Vec<CriterionOutcome> {
    ids.iter()
        .filter_map(|&id| CHECKS.get((id as usize).checked_sub(1)?))
        .map(|f| f(seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_preserves_ids() {
        let out = run_selected(3, &[12, 1, 99]);
        assert_eq!(out.iter().map(|o| o.id).collect::<Vec<_>>(), vec![12, 1]);
        assert!(out.iter().all(|o| o.passed));
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(run_selected(5, &[3]), run_selected(5, &[3]));
    }

    #[test]
    fn line_format() {
        let o = CriterionOutcome {
            id: 4,
            name: "x",
            passed: false,
            detail: "d".into(),
        };
        assert_eq!(o.line(), "FAIL [ 4] x: d");
    }
}
