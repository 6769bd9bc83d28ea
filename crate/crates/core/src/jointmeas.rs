//! Binary qubit measurements: Bloch parameterization, the Busch
//! joint-measurability criterion, OQ positivity, classical work-extraction
//! bounds and their optimization over sharpness.
//!
//! Effect `k` of a binary measurement has Bloch vector `(-1)^k v`, so `v`
//! always refers to outcome 0. Outcome 0 is the lower energy level.

use crate::error::{Error, Result};
use crate::qmath::{
    bloch_to_state, dot, eig_hermitian, norm, operator_bloch, pauli_combination, scale, sub,
    DensityState, Vec3,
};
use crate::quasiprob::oq;
use crate::schemes::Povm;
use crate::thermo::{golden_section_max, work_moment, Protocol};

/// Tolerance for the Busch margin and the positivity conditions.
pub const JM_TOL: f64 = 1e-12;

/// Pair of binary qubit measurements sharing a bias.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochEffectPair {
    pub v_i: Vec3,
    pub v_f: Vec3,
    pub bias_x: f64,
}

impl BlochEffectPair {
    /// Requires `1 +- x +- |v| >= 0` for both measurements.
    pub fn new(v_i: Vec3, v_f: Vec3, bias_x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&bias_x) {
            return Err(Error::InvalidPovm(format!("bias {bias_x} outside [0, 1]")));
        }
        for v in [&v_i, &v_f] {
            if 1.0 - bias_x - norm(v) < -JM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "Bloch length {} exceeds 1 - bias",
                    norm(v)
                )));
            }
        }
        Ok(Self { v_i, v_f, bias_x })
    }

    pub fn mu_i(&self) -> f64 {
        norm(&self.v_i)
    }

    pub fn mu_f(&self) -> f64 {
        norm(&self.v_f)
    }

    pub fn povm_i(&self) -> Result<Povm> {
        binary_povm(self.bias_x, &self.v_i)
    }

    pub fn povm_f(&self) -> Result<Povm> {
        binary_povm(self.bias_x, &self.v_f)
    }
}

fn binary_povm(bias: f64, v: &Vec3) -> Result<Povm> {
    Povm::new(
        vec![
            pauli_combination(1.0 + bias, v).scale(0.5),
            pauli_combination(1.0 - bias, &scale(v, -1.0)).scale(0.5),
        ],
        None,
    )
}

/// `{(I + mu n.sigma) / 2, (I - mu n.sigma) / 2}`.
pub fn make_unbiased_povm(direction: &Vec3, mu: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::SharpnessOutOfRange(mu));
    }
    let len = norm(direction);
    if (len - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPovm(format!(
            "direction has length {len}, expected 1"
        )));
    }
    binary_povm(0.0, &scale(direction, mu / len))
}

/// `(jointly measurable, 2 - |v_i + v_f| - |v_i - v_f|)`.
pub fn busch_criterion(v_i: &Vec3, v_f: &Vec3) -> (bool, f64) {
    let margin = 2.0 - norm(&crate::qmath::add(v_i, v_f)) - norm(&sub(v_i, v_f));
    (margin >= -JM_TOL, margin)
}

/// `q_{x_i x_f} = [1 + s_i s_f v_i.v_f + (s_i v_i + s_f v_f).r] / 4` with
/// `s = (-1)^x`, for unbiased measurements.
pub fn oq_bloch_closed_form(r: &Vec3, v_i: &Vec3, v_f: &Vec3, x_i: usize, x_f: usize) -> Result<f64> {
    let len = norm(r);
    if len > 1.0 + 1e-10 {
        return Err(Error::BlochOutOfBall(len));
    }
    let s_i = if x_i % 2 == 0 { 1.0 } else { -1.0 };
    let s_f = if x_f % 2 == 0 { 1.0 } else { -1.0 };
    Ok(0.25 * (1.0 + s_i * s_f * dot(v_i, v_f) + s_i * dot(v_i, r) + s_f * dot(v_f, r)))
}

/// The two signed conditions `1 + v_i.v_f - |v_i + v_f| >= 0` and
/// `1 - v_i.v_f - |v_i - v_f| >= 0`; each is the minimum over the Bloch ball of
/// a pair of OQ entries (times four).
pub fn positivity_conditions(v_i: &Vec3, v_f: &Vec3) -> (f64, f64) {
    let d = dot(v_i, v_f);
    (
        1.0 + d - norm(&crate::qmath::add(v_i, v_f)),
        1.0 - d - norm(&sub(v_i, v_f)),
    )
}

/// True iff the OQ of the unbiased pair is nonnegative for every qubit state.
pub fn oq_positivity_certificate(v_i: &Vec3, v_f: &Vec3) -> bool {
    let (same, opposite) = positivity_conditions(v_i, v_f);
    same >= -JM_TOL && opposite >= -JM_TOL
}

/// State-independent bound `(Delta/4)(1 - v_i.v_f + |v_i - v_f|)` on the work
/// extractable through the de-excitation cell `(1, 0)`.
pub fn classical_bound(v_i: &Vec3, v_f: &Vec3, delta: f64) -> f64 {
    0.25 * delta * (1.0 - dot(v_i, v_f) + norm(&sub(v_i, v_f)))
}

/// `r = -(v_i - v_f) / |v_i - v_f|`, which puts the bound's mass on the
/// de-excitation cell.
pub fn saturating_state(v_i: &Vec3, v_f: &Vec3) -> Result<Vec3> {
    let diff = sub(v_i, v_f);
    let len = norm(&diff);
    if len < 1e-12 {
        return Err(Error::DegenerateDirections);
    }
    Ok(scale(&diff, -1.0 / len))
}

/// Largest common sharpness for which two unbiased measurements at angle
/// `theta` are jointly measurable.
pub fn mu_jm(theta: f64) -> f64 {
    let half = 0.5 * theta;
    (1.0 / (half.cos() + half.sin())).min(1.0)
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos()
}

/// Maximizes [`classical_bound`] over a common sharpness `mu` in the jointly
/// measurable range `[0, mu_jm(theta)]`. Returns `(mu*, bound at mu*)`.
pub fn optimize_bound_over_sharpness(dir_i: &Vec3, dir_f: &Vec3, delta: f64) -> (f64, f64) {
    let theta = angle_between(dir_i, dir_f);
    let upper = mu_jm(theta);
    let (c, s) = (theta.cos(), (0.5 * theta).sin());
    let w = |mu: f64| 0.25 * delta * (1.0 - mu * mu * c + 2.0 * mu * s);
    let (mu_in, w_in) = golden_section_max(0.0, upper, 1e-10, w);
    [(0.0, w(0.0)), (upper, w(upper)), (mu_in, w_in)]
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Quantum versus classical extractable work for one protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkComparison {
    /// `-<w>` over the OQ at the requested sharpness.
    pub w_q: f64,
    /// Optimized classical bound for the protocol's measurement directions.
    pub w_cl_max: f64,
    pub mu_star: f64,
    pub busch_margin: f64,
    pub nonclassical: bool,
}

/// Bloch direction of the outcome-0 projector of a sharp binary measurement.
fn sharp_direction(povm: &Povm) -> Result<Vec3> {
    let (_, v) = operator_bloch(povm.effect(0));
    let len = norm(&v);
    if povm.len() != 2 || len < 1e-9 {
        return Err(Error::NonSharpMeasurement);
    }
    Ok(scale(&v, 1.0 / len))
}

fn gap(energies: &[f64]) -> f64 {
    energies[energies.len() - 1] - energies[0]
}

fn ensure_qubit_protocol(protocol: &Protocol) -> Result<f64> {
    if protocol.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: protocol.dim(),
        });
    }
    if !protocol.is_sharp()
        || protocol.decomp_initial().levels() != 2
        || protocol.decomp_final().levels() != 2
    {
        return Err(Error::NonSharpMeasurement);
    }
    let delta_i = gap(&protocol.decomp_initial().eigenvalues);
    let delta_f = gap(&protocol.decomp_final().eigenvalues);
    if (delta_i - delta_f).abs() > 1e-9 * delta_i.abs().max(1.0) {
        return Err(Error::GapMismatch(delta_i, delta_f));
    }
    Ok(delta_i)
}

/// The protocol's two energy measurements smeared to sharpness `mu`,
/// `mu Pi_x + (1 - mu) I / 2`, keeping the energy labels.
pub fn smeared_energy_measurements(protocol: &Protocol, mu: f64) -> Result<(Povm, Povm)> {
    ensure_qubit_protocol(protocol)?;
    let (dir_i, dir_f) = protocol_directions(protocol)?;
    let a = make_unbiased_povm(&dir_i, mu)?
        .with_energies(protocol.decomp_initial().eigenvalues.clone())?;
    let b_h = make_unbiased_povm(&dir_f, mu)?
        .with_energies(protocol.decomp_final().eigenvalues.clone())?;
    Ok((a, b_h))
}

/// Evaluates `W_q` with both energy measurements smeared to sharpness `mu`
/// and compares it with the classical bound optimized over sharpness.
pub fn work_extraction_compare(
    rho: &DensityState,
    protocol: &Protocol,
    mu: f64,
) -> Result<WorkComparison> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let delta = ensure_qubit_protocol(protocol)?;
    let (a, b_h) = smeared_energy_measurements(protocol, mu)?;
    let w_q = -work_moment(&oq(rho, &a, &b_h)?, 1)?;
    let (dir_i, dir_f) = protocol_directions(protocol)?;
    let (mu_star, w_cl_max) = optimize_bound_over_sharpness(&dir_i, &dir_f, delta);
    let (_, busch_margin) = busch_criterion(&scale(&dir_i, mu), &scale(&dir_f, mu));
    Ok(WorkComparison {
        w_q,
        w_cl_max,
        mu_star,
        busch_margin,
        nonclassical: w_q > w_cl_max + 1e-10,
    })
}

/// Unbiased qubit measurement pair along the sharp energy directions of a
/// protocol, as Bloch vectors of outcome 0.
pub fn protocol_directions(protocol: &Protocol) -> Result<(Vec3, Vec3)> {
    Ok((sharp_direction(protocol.a())?, sharp_direction(protocol.b_h())?))
}

/// Qubit state with Bloch vector `r`.
pub fn state_from_bloch(r: &Vec3) -> Result<DensityState> {
    bloch_to_state(r)
}

/// Smallest eigenvalue over both effects of a binary POVM built from `v` and `bias`.
pub fn min_effect_eigenvalue(bias: f64, v: &Vec3) -> f64 {
    [
        pauli_combination(1.0 + bias, v).scale(0.5),
        pauli_combination(1.0 - bias, &scale(v, -1.0)).scale(0.5),
    ]
    .iter()
    .map(|e| eig_hermitian(e).expect("Hermitian").eigenvalues[0])
    .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::Operator;
    use crate::random;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Z: Vec3 = [0.0, 0.0, 1.0];
    const X: Vec3 = [1.0, 0.0, 0.0];

    #[test]
    fn unbiased_povm_examples() {
        let sharp = make_unbiased_povm(&Z, 1.0).unwrap();
        assert!(sharp.effect(0).max_abs_diff(&Operator::diag(&[1.0, 0.0])) < 1e-15);
        let trivial = make_unbiased_povm(&Z, 0.0).unwrap();
        assert!(trivial.effect(1).max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
        let smeared = make_unbiased_povm(&X, 0.8).unwrap();
        let expect = &Operator::identity(2).scale(0.5) + &Operator::pauli_x().scale(0.4);
        assert!(smeared.effect(0).max_abs_diff(&expect) < 1e-15);
        assert!(matches!(
            make_unbiased_povm(&Z, 1.2),
            Err(Error::SharpnessOutOfRange(_))
        ));
    }

    #[test]
    fn busch_examples() {
        let s = FRAC_1_SQRT_2;
        let (jm, margin) = busch_criterion(&scale(&X, s), &scale(&Z, s));
        assert!(jm && margin.abs() < 1e-12);
        assert!(!busch_criterion(&scale(&X, 0.75), &scale(&Z, 0.75)).0);
        assert!(busch_criterion(&scale(&X, 1.0), &scale(&X, 0.3)).0);
        assert!(oq_positivity_certificate(&scale(&X, s), &scale(&Z, s)));
        assert!(!oq_positivity_certificate(&X, &Z));
    }

    #[test]
    fn closed_form_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random::unit_vec3(&mut rng);
        let r = random::ball_vec3(&mut rng);
        let q00 = oq_bloch_closed_form(&r, &v, &v, 0, 0).unwrap();
        assert!((q00 - 0.5 * (1.0 + dot(&v, &r))).abs() < 1e-15);
        assert!(oq_bloch_closed_form(&r, &v, &v, 0, 1).unwrap().abs() < 1e-15);
        assert!(matches!(
            oq_bloch_closed_form(&[1.0, 1.0, 0.0], &v, &v, 0, 0),
            Err(Error::BlochOutOfBall(_))
        ));
    }

    #[test]
    fn closed_form_matches_matrix_oq() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let r = random::ball_vec3(&mut rng);
            let v_i = random::ball_vec3(&mut rng);
            let v_f = random::ball_vec3(&mut rng);
            let a = make_unbiased_povm(&crate::qmath::normalize(&v_i), norm(&v_i)).unwrap();
            let b = make_unbiased_povm(&crate::qmath::normalize(&v_f), norm(&v_f)).unwrap();
            let q = oq(&bloch_to_state(&r).unwrap(), &a, &b).unwrap();
            for xi in 0..2 {
                for xf in 0..2 {
                    let c = oq_bloch_closed_form(&r, &v_i, &v_f, xi, xf).unwrap();
                    assert!((q.get(xi, xf) - c).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn classical_bound_examples() {
        assert!((classical_bound(&Z, &scale(&Z, -1.0), 2.0) - 2.0).abs() < 1e-15);
        let s = FRAC_1_SQRT_2;
        assert!((classical_bound(&scale(&X, s), &scale(&Z, s), 3.0) - 1.5).abs() < 1e-15);
        assert!(matches!(saturating_state(&Z, &Z), Err(Error::DegenerateDirections)));
    }

    #[test]
    fn saturating_state_attains_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v_i = random::ball_vec3(&mut rng);
            let v_f = random::ball_vec3(&mut rng);
            let r = saturating_state(&v_i, &v_f).unwrap();
            let q10 = oq_bloch_closed_form(&r, &v_i, &v_f, 1, 0).unwrap();
            assert!((q10 - classical_bound(&v_i, &v_f, 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sharpness_optimization_examples() {
        let (mu, w) = optimize_bound_over_sharpness(&Z, &scale(&Z, -1.0), 1.0);
        assert!((mu - 1.0).abs() < 1e-9 && (w - 1.0).abs() < 1e-12);
        let (mu, w) = optimize_bound_over_sharpness(&X, &Z, 2.0);
        assert!(mu <= FRAC_1_SQRT_2 + 1e-12);
        let grid = (0..=100_000)
            .map(|k| {
                let m = FRAC_1_SQRT_2 * k as f64 / 100_000.0;
                0.5 * (1.0 + 2.0 * m * (0.5 * FRAC_PI_2).sin())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((w - grid).abs() < 1e-9);
        assert!((mu_jm(PI) - 1.0).abs() < 1e-15);
        assert!((mu_jm(FRAC_PI_2) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn effect_pair_validation() {
        assert!(BlochEffectPair::new(scale(&Z, 0.5), X, 0.0).is_ok());
        assert!(BlochEffectPair::new(scale(&Z, 0.5), X, 0.2).is_err());
        let pair = BlochEffectPair::new(scale(&Z, 0.3), scale(&X, 0.6), 0.4).unwrap();
        assert!((pair.mu_f() - 0.6).abs() < 1e-15);
        assert!(pair.povm_i().is_ok() && pair.povm_f().is_ok());
        assert!(min_effect_eigenvalue(0.4, &scale(&X, 0.6)) >= -1e-15);
    }
}
