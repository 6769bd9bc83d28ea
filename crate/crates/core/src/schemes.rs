//! Measurement schemes: end-point (EPM), two-point (TPM) and weak two-point
//! (wTPM) statistics, plus Heisenberg-picture transport of the late measurement.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::qmath::{eig_hermitian, DensityState, Operator, SpectralDecomp, HERMITIAN_TOL};
use crate::table::{DistKind, QuasiDist, ROUNDOFF_CLAMP};

/// Joint probability table produced by the TPM and wTPM schemes.
pub type JointDist = QuasiDist;

/// Tolerance for effect positivity, completeness and channel checks.
pub const POVM_TOL: f64 = 1e-10;

/// Ordered list of positive effects summing to the identity, optionally
/// labelled with an energy per outcome.
#[derive(Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<Operator>,
    energies: Option<Vec<f64>>,
    roots: OnceLock<Vec<(Operator, Operator)>>,
}

impl Povm {
    pub fn new(effects: Vec<Operator>, energies: Option<Vec<f64>>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dim = first.dim();
        let mut total = Operator::zeros(dim);
        for (k, e) in effects.iter().enumerate() {
            e.ensure_same_dim(first)?;
            if !e.is_finite() {
                return Err(Error::InvalidOperator(format!("effect {k} has non-finite entries")));
            }
            e.ensure_hermitian(HERMITIAN_TOL)?;
            let min = eig_hermitian(&e.hermitian_part())?.eigenvalues[0];
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has negative eigenvalue {min:e}"
                )));
            }
            total = &total + e;
        }
        let defect = total.max_abs_diff(&Operator::identity(dim));
        if defect > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:e}"
            )));
        }
        if let Some(en) = &energies {
            if en.len() != effects.len() {
                return Err(Error::DimMismatch {
                    expected: effects.len(),
                    found: en.len(),
                });
            }
        }
        Ok(Self::assemble(
            effects.into_iter().map(|e| e.hermitian_part()).collect(),
            energies,
        ))
    }

    /// Sharp measurement onto the eigenspaces of a decomposition, labelled by
    /// its eigenvalues.
    pub fn projective(decomp: &SpectralDecomp) -> Self {
        Self::assemble(decomp.projectors.clone(), Some(decomp.eigenvalues.clone()))
    }

    /// Skips validation; callers guarantee the POVM invariants by construction.
    pub(crate) fn assemble(effects: Vec<Operator>, energies: Option<Vec<f64>>) -> Self {
        Self {
            dim: effects[0].dim(),
            effects,
            energies,
            roots: OnceLock::new(),
        }
    }

    pub fn with_energies(self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.effects.len() {
            return Err(Error::DimMismatch {
                expected: self.effects.len(),
                found: energies.len(),
            });
        }
        Ok(Self::assemble(self.effects, Some(energies)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &Operator {
        &self.effects[k]
    }

    pub fn energies(&self) -> Option<&[f64]> {
        self.energies.as_deref()
    }

    /// True when every effect is idempotent.
    pub fn is_projective(&self) -> bool {
        self.effects
            .iter()
            .all(|e| e.matmul(e).max_abs_diff(e) <= POVM_TOL)
    }

    /// `sum_k E_k M_k`, the observable measured by an energy-labelled POVM.
    pub fn observable(&self) -> Result<Operator> {
        let energies = self.energies().ok_or(Error::MissingEnergies)?;
        let mut out = Operator::zeros(self.dim);
        for (e, m) in energies.iter().zip(&self.effects) {
            out = &out + &m.scale(*e);
        }
        Ok(out)
    }

    /// `(sqrt(M_k), sqrt(I - M_k))` for each effect, computed once.
    pub(crate) fn roots(&self) -> Result<&[(Operator, Operator)]> {
        if let Some(r) = self.roots.get() {
            return Ok(r);
        }
        let identity = Operator::identity(self.dim);
        let mut roots = Vec::with_capacity(self.effects.len());
        for e in &self.effects {
            roots.push((sqrt_effect(e)?, sqrt_effect(&(&identity - e))?));
        }
        Ok(self.roots.get_or_init(|| roots))
    }

    fn ensure_dim(&self, rho: &DensityState) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Povm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Povm")
            .field("dim", &self.dim)
            .field("effects", &self.effects)
            .field("energies", &self.energies)
            .finish()
    }
}

/// Heisenberg-picture action `X -> Phi^dagger(X)` of a quantum channel.
pub trait DualMap: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Operator) -> Operator;
}

/// Evolution between the two measurements.
#[derive(Clone)]
pub enum Channel {
    /// `rho -> U rho U^dagger`, dual `X -> U^dagger X U`.
    Unitary(Operator),
    /// Any unital dual map supplied by the caller.
    Dual(Arc<dyn DualMap>),
}

impl Channel {
    pub fn unitary(u: Operator) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::InvalidOperator("non-finite unitary".into()));
        }
        let defect = u.unitarity_defect();
        if defect > POVM_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Channel::Unitary(u))
    }

    pub fn identity(dim: usize) -> Self {
        Channel::Unitary(Operator::identity(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Channel::Unitary(u) => u.dim(),
            Channel::Dual(m) => m.dim(),
        }
    }

    pub fn dual(&self, x: &Operator) -> Operator {
        match self {
            Channel::Unitary(u) => x.conjugate_by(u),
            Channel::Dual(m) => m.apply(x),
        }
    }

    /// Fails with `ChannelNotUnital` if `Phi^dagger(I) != I`.
    pub fn ensure_unital(&self) -> Result<()> {
        let id = Operator::identity(self.dim());
        let defect = self.dual(&id).max_abs_diff(&id);
        if defect > POVM_TOL {
            return Err(Error::ChannelNotUnital(defect));
        }
        Ok(())
    }
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Unitary(u) => f.debug_tuple("Unitary").field(u).finish(),
            Channel::Dual(m) => write!(f, "Dual(dim = {})", m.dim()),
        }
    }
}

/// Transports the late measurement to the initial time, keeping energy labels.
pub fn heisenberg(b: &Povm, ch: &Channel) -> Result<Povm> {
    if ch.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: b.dim(),
            found: ch.dim(),
        });
    }
    ch.ensure_unital()?;
    let effects: Vec<Operator> = b.effects().iter().map(|e| ch.dual(e)).collect();
    match ch {
        Channel::Unitary(_) => Ok(Povm::assemble(
            effects.into_iter().map(|e| e.hermitian_part()).collect(),
            b.energies.clone(),
        )),
        Channel::Dual(_) => Povm::new(effects, b.energies.clone()),
    }
}

/// Principal square root of a positive semidefinite effect.
pub fn sqrt_effect(e: &Operator) -> Result<Operator> {
    e.ensure_hermitian(HERMITIAN_TOL)?;
    let e = e.hermitian_part();
    // Projectors are their own roots; the spectral route would turn round-off
    // eigenvalues near zero into errors of their square-root size.
    if e.matmul(&e).max_abs_diff(&e) <= 1e-13 {
        return Ok(e);
    }
    let decomp = eig_hermitian(&e)?;
    let min = decomp.eigenvalues[0];
    if min < -POVM_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(decomp.map_real(|x| x.max(0.0).sqrt()).hermitian_part())
}

fn clamp_probability(p: f64) -> Result<f64> {
    if p < 0.0 {
        if p < -ROUNDOFF_CLAMP {
            return Err(Error::NegativeProbability(p));
        }
        return Ok(0.0);
    }
    Ok(p)
}

/// `p_f = Tr(rho B^H_f)`.
pub fn epm_prob(rho: &DensityState, b_h: &Povm) -> Result<Vec<f64>> {
    b_h.ensure_dim(rho)?;
    let probs = b_h
        .effects()
        .iter()
        .map(|b| clamp_probability(rho.op().trace_product(b).re))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > crate::table::NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(probs)
}

/// `p_i = Tr(rho A_i)`.
pub fn outcome_probs(rho: &DensityState, a: &Povm) -> Result<Vec<f64>> {
    epm_prob(rho, a)
}

fn energies_pair(a: &Povm, b_h: &Povm) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    (a.energies.clone(), b_h.energies.clone())
}

/// `p_if = Tr(sqrt(A_i) rho sqrt(A_i) B^H_f)`.
pub fn tpm_prob(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<JointDist> {
    a.ensure_dim(rho)?;
    b_h.ensure_dim(rho)?;
    let roots = a.roots()?;
    let mut values = Vec::with_capacity(a.len() * b_h.len());
    for (s, _) in roots {
        let post = s.matmul(rho.op()).matmul(s);
        for b in b_h.effects() {
            values.push(post.trace_product(b).re);
        }
    }
    let (ei, ef) = energies_pair(a, b_h);
    QuasiDist::new(DistKind::Tpm, a.len(), b_h.len(), values, ei, ef)
}

/// Post-measurement state when outcome `i` is only distinguished from its
/// complement: `sqrt(A_i) rho sqrt(A_i) + sqrt(I - A_i) rho sqrt(I - A_i)`.
pub fn nonselective_state(rho: &DensityState, a: &Povm, i: usize) -> Result<DensityState> {
    a.ensure_dim(rho)?;
    let (s, sc) = &a.roots()?[i];
    let op = &s.matmul(rho.op()).matmul(s) + &sc.matmul(rho.op()).matmul(sc);
    DensityState::new(op.hermitian_part())
}

/// `p^wTPM_if = Tr(rho_NS,i B^H_f)`.
pub fn wtpm_prob(rho: &DensityState, a: &Povm, b_h: &Povm) -> Result<JointDist> {
    b_h.ensure_dim(rho)?;
    let mut values = Vec::with_capacity(a.len() * b_h.len());
    for i in 0..a.len() {
        let ns = nonselective_state(rho, a, i)?;
        for b in b_h.effects() {
            values.push(ns.op().trace_product(b).re);
        }
    }
    let (ei, ef) = energies_pair(a, b_h);
    QuasiDist::new(DistKind::Wtpm, a.len(), b_h.len(), values, ei, ef)
}
