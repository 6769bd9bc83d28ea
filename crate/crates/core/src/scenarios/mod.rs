//! Parameter sweeps for the rotating-field qubit and the driven three-level
//! NV center.

mod nv;
mod qubit;

pub use nv::{nv_hamiltonian, nv_initial_state, nv_unitary, run_nv_sweep, NvRow, NvScenarioConfig};
pub use qubit::{
    qubit_hamiltonian, qubit_initial_state, qubit_unitary, run_qubit_sweep, QubitRow,
    QubitScenarioConfig,
};

use crate::error::{Error, Result};
use crate::table::QuasiDist;

/// Tolerance for the per-row marginal checks done before a row is emitted.
pub const ROW_TOL: f64 = 1e-10;

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::ConfigInvalid("t_grid is empty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::ConfigInvalid(format!("t_grid contains {t}")));
    }
    Ok(())
}

/// Fails unless the row and column sums of `q` reproduce `p_a` and `p_b`.
pub(crate) fn check_marginals(q: &QuasiDist, p_a: &[f64], p_b: &[f64]) -> Result<()> {
    let rows = q.marginal_i();
    let cols = q.marginal_f();
    let worst = rows
        .iter()
        .zip(p_a)
        .chain(cols.iter().zip(p_b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if worst > ROW_TOL {
        return Err(Error::NotNormalized(1.0 + worst));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(0.0, 2.0, 5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(uniform_grid(1.0, 2.0, 1), vec![1.0]);
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[0.0, f64::NAN]).is_err());
    }
}
