//! Work statistics over quasiprobability tables: moments, the Jarzynski
//! equality and its coherence correction, the coherent work split and its
//! bounds, and the trace-norm coherence witness.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmath::{
    coherence_l1, coherence_rel_entropy, delta_free_energy, dephase, eig_hermitian, entropy_vn,
    gibbs_operator, pauli_combination, trace_norm, DensityState, Operator, SpectralDecomp,
    HERMITIAN_TOL,
};
use crate::quasiprob::oq;
use crate::schemes::{heisenberg, tpm_prob, Channel, Povm};
use crate::table::QuasiDist;

/// Two-time protocol: energy measurement of `h_initial`, evolution through
/// `channel`, energy measurement of `h_final`. Measurements are sharp unless
/// replaced with [`Protocol::with_measurements`].
#[derive(Clone, Debug)]
pub struct Protocol {
    h_initial: Operator,
    h_final: Operator,
    channel: Channel,
    decomp_i: SpectralDecomp,
    decomp_f: SpectralDecomp,
    a: Povm,
    b_h: Povm,
    sharp: bool,
}

impl Protocol {
    pub fn new(h_initial: Operator, h_final: Operator, channel: Channel) -> Result<Self> {
        h_initial.ensure_same_dim(&h_final)?;
        if channel.dim() != h_initial.dim() {
            return Err(Error::DimMismatch {
                expected: h_initial.dim(),
                found: channel.dim(),
            });
        }
        let decomp_i = eig_hermitian(&h_initial)?;
        let decomp_f = eig_hermitian(&h_final)?;
        let a = Povm::projective(&decomp_i);
        let b_h = heisenberg(&Povm::projective(&decomp_f), &channel)?;
        Ok(Self {
            h_initial: h_initial.hermitian_part(),
            h_final: h_final.hermitian_part(),
            channel,
            decomp_i,
            decomp_f,
            a,
            b_h,
            sharp: true,
        })
    }

    /// Replaces both measurements; each must carry energy labels.
    pub fn with_measurements(mut self, a: Povm, b_h: Povm) -> Result<Self> {
        for m in [&a, &b_h] {
            if m.dim() != self.h_initial.dim() {
                return Err(Error::DimMismatch {
                    expected: self.h_initial.dim(),
                    found: m.dim(),
                });
            }
            if m.energies().is_none() {
                return Err(Error::MissingEnergies);
            }
        }
        self.sharp = false;
        self.a = a;
        self.b_h = b_h;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h_initial.dim()
    }

    pub fn h_initial(&self) -> &Operator {
        &self.h_initial
    }

    pub fn h_final(&self) -> &Operator {
        &self.h_final
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn decomp_initial(&self) -> &SpectralDecomp {
        &self.decomp_i
    }

    pub fn decomp_final(&self) -> &SpectralDecomp {
        &self.decomp_f
    }

    pub fn a(&self) -> &Povm {
        &self.a
    }

    pub fn b_h(&self) -> &Povm {
        &self.b_h
    }

    /// True while both measurements are the energy projectors.
    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    /// `Phi^dagger(H_f)`.
    pub fn h_final_heisenberg(&self) -> Operator {
        self.channel.dual(&self.h_final).hermitian_part()
    }

    pub fn oq(&self, rho: &DensityState) -> Result<QuasiDist> {
        oq(rho, &self.a, &self.b_h)
    }

    pub fn tpm(&self, rho: &DensityState) -> Result<QuasiDist> {
        tpm_prob(rho, &self.a, &self.b_h)
    }

    fn ensure_sharp(&self) -> Result<()> {
        if !self.sharp {
            return Err(Error::NonSharpMeasurement);
        }
        Ok(())
    }

    fn ensure_state(&self, rho: &DensityState) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

fn work_values(q: &QuasiDist) -> Result<(&[f64], &[f64])> {
    match (q.energies_i(), q.energies_f()) {
        (Some(ei), Some(ef)) => Ok((ei, ef)),
        _ => Err(Error::MissingEnergies),
    }
}

/// `sum_if q_if (E_f - E_i)^n`.
pub fn work_moment(q: &QuasiDist, n: u32) -> Result<f64> {
    let (ei, ef) = work_values(q)?;
    let mut acc = 0.0;
    for (i, e_i) in ei.iter().enumerate() {
        for (f, e_f) in ef.iter().enumerate() {
            acc += q.get(i, f) * (e_f - e_i).powi(n as i32);
        }
    }
    Ok(acc)
}

/// `sum_if q_if exp(-beta (E_f - E_i))`.
pub fn work_generating_function(q: &QuasiDist, beta: f64) -> Result<f64> {
    let (ei, ef) = work_values(q)?;
    let mut acc = 0.0;
    for (i, e_i) in ei.iter().enumerate() {
        for (f, e_f) in ef.iter().enumerate() {
            acc += q.get(i, f) * (-beta * (e_f - e_i)).exp();
        }
    }
    Ok(acc)
}

/// Coherence corrections to the Jarzynski equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaTerms {
    pub tpm: f64,
    pub oq: f64,
    pub kdq: C64,
}

/// `Z_i exp(beta E_x)` per distinct level, without forming either factor.
fn inverse_gibbs_weights(decomp: &SpectralDecomp, beta: f64) -> Vec<f64> {
    decomp
        .eigenvalues
        .iter()
        .map(|ex| {
            decomp
                .eigenvalues
                .iter()
                .zip(&decomp.multiplicities)
                .map(|(ey, &m)| m as f64 * (-beta * (ey - ex)).exp())
                .sum()
        })
        .collect()
}

/// `Gamma_TPM = Tr[rho_G,i^{-1} rho_D Phi^dagger(rho_G,f)]`,
/// `Gamma_KDQ = Tr[rho_G,i^{-1} rho Phi^dagger(rho_G,f)]` and
/// `Gamma_OQ = Gamma_TPM + (W / n) Tr[rho_off Phi^dagger(rho_G,f)]`, where `n` is
/// the number of distinct initial levels and `W = Z_i sum_x exp(beta E_x)` over
/// those levels (`W = Tr rho_G,i^{-1}` for a nondegenerate `H_i`).
///
/// Any finite `beta` is accepted, negative values included.
pub fn gamma_terms(rho: &DensityState, protocol: &Protocol, beta: f64) -> Result<GammaTerms> {
    protocol.ensure_sharp()?;
    protocol.ensure_state(rho)?;
    if !beta.is_finite() {
        return Err(Error::SingularGibbs);
    }
    let weights = inverse_gibbs_weights(&protocol.decomp_i, beta);
    let mut inv_gibbs = Operator::zeros(protocol.dim());
    for (w, p) in weights.iter().zip(&protocol.decomp_i.projectors) {
        inv_gibbs = &inv_gibbs + &p.scale(*w);
    }
    let gibbs_f_h = protocol
        .channel
        .dual(&gibbs_operator(&protocol.decomp_f, beta));
    let (diag, off) = dephase(rho, &protocol.decomp_i)?;
    let right = gibbs_f_h.matmul(&inv_gibbs);
    let tpm = diag.op().trace_product(&right).re;
    let kdq = rho.op().trace_product(&right);
    let levels = protocol.decomp_i.levels() as f64;
    let w_sum: f64 = weights.iter().sum();
    let oq = tpm + w_sum / levels * off.trace_product(&gibbs_f_h).re;
    if !(tpm.is_finite() && oq.is_finite() && kdq.re.is_finite() && kdq.im.is_finite()) {
        return Err(Error::SingularGibbs);
    }
    Ok(GammaTerms { tpm, oq, kdq })
}

/// `Delta F = -(1/beta) ln(Z_f / Z_i)` for the protocol's Hamiltonians, with
/// the `beta -> 0` limit at zero.
pub fn delta_free_energy_of(protocol: &Protocol, beta: f64) -> f64 {
    delta_free_energy(&protocol.decomp_i, &protocol.decomp_f, beta)
}

/// Work statistics of the OQ table at one inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkStats {
    pub mean: f64,
    pub second_moment: f64,
    /// `<exp(-beta w)>` over the OQ.
    pub jarzynski_lhs: f64,
    pub delta_f: f64,
    /// `Gamma_OQ`, so that `jarzynski_lhs = exp(-beta delta_f) gamma`.
    pub gamma: f64,
}

pub fn jarzynski_check(rho: &DensityState, protocol: &Protocol, beta: f64) -> Result<WorkStats> {
    if !(beta >= 0.0) {
        return Err(Error::BetaNegative(beta));
    }
    protocol.ensure_sharp()?;
    let q = protocol.oq(rho)?;
    let gamma = gamma_terms(rho, protocol, beta)?;
    Ok(WorkStats {
        mean: work_moment(&q, 1)?,
        second_moment: work_moment(&q, 2)?,
        jarzynski_lhs: work_generating_function(&q, beta)?,
        delta_f: delta_free_energy_of(protocol, beta),
        gamma: gamma.oq,
    })
}

/// Average OQ work, average TPM work and the coherent term `Tr(rho_off H^H_f)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkSplit {
    pub w_oq: f64,
    pub w_tpm: f64,
    pub coherent: f64,
}

pub fn work_split(rho: &DensityState, protocol: &Protocol) -> Result<WorkSplit> {
    protocol.ensure_sharp()?;
    let w_oq = work_moment(&protocol.oq(rho)?, 1)?;
    let w_tpm = work_moment(&protocol.tpm(rho)?, 1)?;
    let (_, off) = dephase(rho, &protocol.decomp_i)?;
    let coherent = off.trace_product(&protocol.h_final_heisenberg()).re;
    Ok(WorkSplit {
        w_oq,
        w_tpm,
        coherent,
    })
}

/// Pieces of `delta_w = delta_F - T C_rel(rho)`, where `delta_w` is the OQ
/// minus TPM average work and `delta_F = F(rho) - F(rho_D)` with
/// `F(s) = Tr(s H^H_f) - T S(s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondLaw {
    pub delta_w: f64,
    pub delta_f: f64,
    /// `T C_rel(rho)`, never negative.
    pub coherence_term: f64,
}

impl SecondLaw {
    /// `|delta_w - (delta_F - T C_rel)|`.
    pub fn residual(&self) -> f64 {
        (self.delta_w - (self.delta_f - self.coherence_term)).abs()
    }
}

pub fn second_law_decomposition(
    rho: &DensityState,
    protocol: &Protocol,
    beta: f64,
) -> Result<SecondLaw> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::BetaNonPositive(beta));
    }
    let split = work_split(rho, protocol)?;
    let temperature = 1.0 / beta;
    let (diag, _) = dephase(rho, &protocol.decomp_i)?;
    let hh = protocol.h_final_heisenberg();
    let free = |s: &DensityState| s.op().trace_product(&hh).re - temperature * entropy_vn(s);
    Ok(SecondLaw {
        delta_w: split.w_oq - split.w_tpm,
        delta_f: free(rho) - free(&diag),
        coherence_term: temperature * coherence_rel_entropy(rho, &protocol.decomp_i)?,
    })
}

/// Largest `|<a|X|b>|` over basis vectors `a, b` in different levels.
fn max_off_block(x: &Operator, basis: &SpectralDecomp) -> f64 {
    let vecs = &basis.eigenvectors;
    let mut worst: f64 = 0.0;
    for (a, va) in vecs.iter().enumerate() {
        for (b, vb) in vecs.iter().enumerate() {
            if basis.vector_level[a] == basis.vector_level[b] {
                continue;
            }
            let xb = x.apply(vb);
            let elem: C64 = va.iter().zip(&xb).map(|(p, q)| p.conj() * q).sum();
            worst = worst.max(elem.norm());
        }
    }
    worst
}

/// `|delta_w|` against `C_l1(rho) ||H^H_f,off||_inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoelderCheck {
    pub abs_delta_w: f64,
    /// Both factors evaluated in the eigenbasis of the first measurement.
    pub bound: f64,
    /// Off-diagonal maximum taken in the eigenbasis of `rho` instead; reported
    /// only, since the inequality does not hold in that form.
    pub bound_state_basis: f64,
}

impl HoelderCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.abs_delta_w <= self.bound + tol
    }
}

pub fn hoelder_bound_check(rho: &DensityState, protocol: &Protocol) -> Result<HoelderCheck> {
    let split = work_split(rho, protocol)?;
    let hh = protocol.h_final_heisenberg();
    let c_l1 = coherence_l1(rho, &protocol.decomp_i)?;
    let rho_basis = eig_hermitian(rho.op())?;
    Ok(HoelderCheck {
        abs_delta_w: (split.w_oq - split.w_tpm).abs(),
        bound: c_l1 * max_off_block(&hh, &protocol.decomp_i),
        bound_state_basis: c_l1 * max_off_block(&hh, &rho_basis),
    })
}

/// `<w^2>_OQ` and its lower bound `Tr[rho_off (H^H_f)^2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMomentCheck {
    pub m2: f64,
    pub lower_bound: f64,
}

pub fn second_moment_bound_check(
    rho: &DensityState,
    protocol: &Protocol,
) -> Result<SecondMomentCheck> {
    protocol.ensure_sharp()?;
    let tr = protocol.h_initial.trace().re;
    if tr.abs() > HERMITIAN_TOL * protocol.h_initial.max_abs().max(1.0) {
        return Err(Error::NotTraceless(tr));
    }
    let m2 = work_moment(&protocol.oq(rho)?, 2)?;
    let hh = protocol.h_final_heisenberg();
    let (_, off) = dephase(rho, &protocol.decomp_i)?;
    Ok(SecondMomentCheck {
        m2,
        lower_bound: off.trace_product(&hh.matmul(&hh)).re,
    })
}

fn unit_direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// `sum_if |q^OQ_if - p^TPM_if|` for a sharp qubit measurement along `n`.
fn witness_objective(rho: &DensityState, a: &Povm, theta: f64, phi: f64) -> f64 {
    let n = unit_direction(theta, phi);
    let b = Povm::assemble(
        vec![
            pauli_combination(1.0, &n).scale(0.5),
            pauli_combination(1.0, &[-n[0], -n[1], -n[2]]).scale(0.5),
        ],
        None,
    );
    let q = oq(rho, a, &b).expect("valid qubit measurement");
    let p = tpm_prob(rho, a, &b).expect("valid qubit measurement");
    q.values()
        .iter()
        .zip(p.values())
        .map(|(x, y)| (x - y).abs())
        .sum()
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal function on `[lo, hi]`.
pub(crate) fn golden_section_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid point ordering: larger value first, ties to smaller `theta` then `phi`.
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    if a.0 > b.0 || (a.0 == b.0 && (a.1, a.2) <= (b.1, b.2)) {
        a
    } else {
        b
    }
}

/// Maximum over sharp qubit measurements `B^H` of the distance between OQ and
/// TPM tables, found by a `(n_theta x n_phi)` Bloch-sphere scan refined by
/// golden-section search around the best cell. Equals `||rho - rho_D||_tr`
/// up to grid error.
pub fn trace_norm_witness(
    rho: &DensityState,
    a: &Povm,
    resolution: (usize, usize),
) -> Result<f64> {
    if rho.dim() != 2 || a.dim() != 2 {
        return Err(Error::UnsupportedDim(rho.dim().max(a.dim())));
    }
    if !a.is_projective() {
        return Err(Error::NonSharpMeasurement);
    }
    let (n_theta, n_phi) = (resolution.0.max(2), resolution.1.max(1));
    a.roots()?;
    let d_theta = PI / (n_theta - 1) as f64;
    let d_phi = TAU / n_phi as f64;
    let best = (0..n_theta)
        .into_par_iter()
        .map(|k| {
            let theta = k as f64 * d_theta;
            (0..n_phi)
                .map(|l| (witness_objective(rho, a, theta, l as f64 * d_phi), k, l))
                .fold((f64::NEG_INFINITY, usize::MAX, usize::MAX), better)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), better);
    let (mut value, k, l) = best;
    let (mut theta, mut phi) = (k as f64 * d_theta, l as f64 * d_phi);
    let (mut half_t, mut half_p) = (d_theta, d_phi);
    for _ in 0..4 {
        let (t, v) = golden_section_max(
            (theta - half_t).max(0.0),
            (theta + half_t).min(PI),
            1e-10,
            |t| witness_objective(rho, a, t, phi),
        );
        if v > value {
            theta = t;
            value = v;
        }
        let (p, v) = golden_section_max(phi - half_p, phi + half_p, 1e-10, |p| {
            witness_objective(rho, a, theta, p)
        });
        if v > value {
            phi = p;
            value = v;
        }
        half_t *= 0.5;
        half_p *= 0.5;
    }
    Ok(value)
}

/// `||rho - rho_D||_tr` in the eigenbasis of a projective measurement.
pub fn coherence_trace_norm(rho: &DensityState, basis: &SpectralDecomp) -> Result<f64> {
    let (_, off) = dephase(rho, basis)?;
    Ok(trace_norm(&off))
}
