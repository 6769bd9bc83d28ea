use num_complex::Complex64 as C64;

use super::{DensityState, Operator};
use crate::error::{Error, Result};

/// Real 3-vector (Bloch coordinates, measurement directions).
pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn normalize(a: &Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// `a0 I + r . sigma` for a real scalar part and Bloch vector.
pub fn pauli_combination(a0: f64, r: &Vec3) -> Operator {
    let (x, y, z) = (r[0], r[1], r[2]);
    let mut op = Operator::zeros(2);
    op[(0, 0)] = C64::new(a0 + z, 0.0);
    op[(1, 1)] = C64::new(a0 - z, 0.0);
    op[(0, 1)] = C64::new(x, -y);
    op[(1, 0)] = C64::new(x, y);
    op
}

/// Decomposes a Hermitian qubit operator as `(a0 I + r . sigma) / 2`.
pub fn operator_bloch(op: &Operator) -> (f64, Vec3) {
    assert_eq!(op.dim(), 2, "Bloch coordinates need a qubit operator");
    let a0 = op[(0, 0)].re + op[(1, 1)].re;
    let x = op[(0, 1)].re + op[(1, 0)].re;
    let y = op[(1, 0)].im - op[(0, 1)].im;
    let z = op[(0, 0)].re - op[(1, 1)].re;
    (a0, [x, y, z])
}

/// `rho = (I + r . sigma) / 2`.
pub fn bloch_to_state(r: &Vec3) -> Result<DensityState> {
    let n = norm(r);
    if n > 1.0 + 1e-10 || !n.is_finite() {
        return Err(Error::BlochOutOfBall(n));
    }
    DensityState::new(pauli_combination(1.0, r).scale(0.5))
}

pub fn state_to_bloch(rho: &DensityState) -> Vec3 {
    operator_bloch(rho.op()).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let mixed = bloch_to_state(&[0.0; 3]).unwrap();
        assert!(mixed.op().max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
        let up = bloch_to_state(&[0.0, 0.0, 1.0]).unwrap();
        assert!(up.op().max_abs_diff(&Operator::diag(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(bloch_to_state(&[0.8, 0.8, 0.0]), Err(Error::BlochOutOfBall(_))));
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let r = scale(&random::unit_vec3(&mut rng), 0.7);
            let back = state_to_bloch(&bloch_to_state(&r).unwrap());
            assert!(norm(&sub(&r, &back)) < 1e-12);
        }
    }

    #[test]
    fn pauli_components() {
        let (a0, r) = operator_bloch(&Operator::pauli_y());
        assert_eq!(a0, 0.0);
        assert_eq!(r, [0.0, 2.0, 0.0]);
    }
}
