//! Seeded random instance generators for the invariant suites.
//!
//! All generators take an explicit `Rng` so that every suite run is
//! reproducible from a single seed.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmath::{eig_hermitian, pauli_combination, DensityState, Operator, Vec3};
use crate::schemes::Povm;

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    Operator::from_fn(dim, |_, _| gaussian_c64(rng))
}

/// Haar-random unitary (Gram-Schmidt on Ginibre columns).
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v: Vec<C64> = (0..dim).map(|r| g[(r, c)]).collect();
        for _pass in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    Operator::from_fn(dim, |r, c| cols[c][r])
}

/// Random Hermitian operator with spectrum spread of order `scale`.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> Operator {
    let g = ginibre(dim, rng);
    (&g + &g.adjoint())
        .scale(0.5 * scale / (dim as f64).sqrt())
        .hermitian_part()
}

/// Hermitian operator `U diag(E) U^dagger` with energies drawn uniformly from
/// `[-half_width, half_width]`.
pub fn hamiltonian<R: Rng + ?Sized>(dim: usize, half_width: f64, rng: &mut R) -> Operator {
    let energies: Vec<f64> = (0..dim)
        .map(|_| rng.random_range(-half_width..=half_width))
        .collect();
    let u = unitary(dim, rng);
    Operator::diag(&energies).conjugate_by(&u.adjoint()).hermitian_part()
}

/// Full-rank mixed state `G G^dagger / Tr(G G^dagger)`.
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityState {
    let g = ginibre(dim, rng);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    DensityState::new(w.scale(1.0 / tr).hermitian_part()).expect("Wishart matrices are states")
}

pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityState {
    let psi: Vec<C64> = (0..dim).map(|_| gaussian_c64(rng)).collect();
    DensityState::pure(&psi).expect("non-zero Gaussian vector")
}

/// State diagonal in the eigenbasis of `povm` effects (assumed projective).
pub fn incoherent_state<R: Rng + ?Sized>(povm: &Povm, rng: &mut R) -> DensityState {
    let weights: Vec<f64> = (0..povm.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights
        .iter()
        .zip(povm.effects())
        .map(|(w, e)| w * e.trace().re)
        .sum();
    let mut op = Operator::zeros(povm.dim());
    for (w, e) in weights.iter().zip(povm.effects()) {
        op = &op + &e.scale(w / total);
    }
    DensityState::new(op.hermitian_part()).expect("positive combination of projectors")
}

pub fn unit_vec3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v: Vec3 = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = crate::qmath::norm(&v);
        if n > 1e-6 {
            return crate::qmath::scale(&v, 1.0 / n);
        }
    }
}

/// Uniform point in the closed unit ball.
pub fn ball_vec3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let radius = rng.random::<f64>().cbrt();
    crate::qmath::scale(&unit_vec3(rng), radius)
}

/// Projective measurement onto a Haar-random orthonormal basis.
pub fn projective_povm<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Povm {
    let h = hermitian(dim, 1.0, rng);
    Povm::projective(&eig_hermitian(&h).expect("Hermitian by construction"))
}

/// General binary qubit POVM `A_i = [(1 + (-1)^i x) I + (-1)^i v . sigma] / 2`
/// with bias `x` in `[0, 1)` and `|v|` drawn inside the positivity region
/// `1 - x - |v| >= 0`.
pub fn binary_qubit_povm<R: Rng + ?Sized>(rng: &mut R) -> Povm {
    let bias = rng.random_range(0.0..1.0);
    let mu = rng.random::<f64>() * (1.0 - bias);
    binary_qubit_povm_with(bias, &crate::qmath::scale(&unit_vec3(rng), mu))
}

pub fn binary_qubit_povm_with(bias: f64, v: &Vec3) -> Povm {
    let e0 = pauli_combination(1.0 + bias, v).scale(0.5);
    let e1 = pauli_combination(1.0 - bias, &crate::qmath::scale(v, -1.0)).scale(0.5);
    Povm::new(vec![e0, e1], None).expect("positivity region respected")
}
