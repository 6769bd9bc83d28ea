//! Dense complex linear algebra and single-system quantum-state utilities.

mod bloch;
mod eigen;
mod operator;
mod state;

pub use bloch::{
    add, bloch_to_state, dot, norm, normalize, operator_bloch, pauli_combination, scale,
    state_to_bloch, sub, Vec3,
};
pub use eigen::{eig_hermitian, expm_hermitian_generator, SpectralDecomp, HERMITIAN_TOL};
pub use operator::Operator;
pub use state::{
    coherence_l1, coherence_rel_entropy, dephase, entropy_vn, gibbs_state, log_partition,
    trace_norm, DensityState, ThermoParams, STATE_TOL,
};

pub(crate) use state::{delta_free_energy, dephase_operator, gibbs_operator};
