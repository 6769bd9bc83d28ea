//! Reference values and qualitative behaviour of the two scenarios.

use oqwork::qmath::{coherence_l1, dephase, eig_hermitian, gibbs_state};
use oqwork::scenarios::{
    nv_hamiltonian, run_nv_sweep, run_qubit_sweep, NvScenarioConfig, QubitScenarioConfig,
};
use oqwork::thermo::{jarzynski_check, Protocol};
use oqwork::{random, Channel, DensityState, Operator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn half_half() -> DensityState {
    DensityState::new(Operator::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()).unwrap()
}

#[test]
fn qubit_state_with_p_c_one_half() {
    let rho = half_half();
    let basis = eig_hermitian(&Operator::pauli_z()).unwrap();
    let (diag, off) = dephase(&rho, &basis).unwrap();
    assert!(diag.op().max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
    assert!(off.max_abs_diff(&Operator::pauli_x().scale(0.5)) < 1e-15);
    assert!((coherence_l1(&rho, &basis).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn qubit_parameters() {
    let cfg = QubitScenarioConfig::default();
    assert_eq!((cfg.p, cfg.c, cfg.omega, cfg.mu), (0.5, 0.5, 1.0, 1.0));
    assert!((cfg.delta - (2f64.sqrt() + 1.0)).abs() < 1e-15);
    assert!((cfg.gap() - 2.61313).abs() < 1e-5);
}

#[test]
fn excitation_entry_turns_negative_and_beats_classical_bound() {
    let rows = run_qubit_sweep(&QubitScenarioConfig::default()).unwrap();
    assert!(rows.iter().any(|r| r.q[1] < 0.0));
    let best_classical = rows.iter().map(|r| r.w_cl).fold(f64::NEG_INFINITY, f64::max);
    let best_quantum = rows.iter().map(|r| r.w_q).fold(f64::NEG_INFINITY, f64::max);
    assert!(rows.iter().any(|r| r.nonclassical));
    assert!(best_quantum > 0.0);
    // Two-point statistics extract nothing for this drive.
    assert!(rows.iter().all(|r| r.w_tpm.abs() < 1e-10));
    assert!(best_classical > 0.0);
}

#[test]
fn deep_jointly_measurable_region_is_classical() {
    let cfg = QubitScenarioConfig {
        mu: 0.3,
        ..QubitScenarioConfig::default()
    };
    assert!(run_qubit_sweep(&cfg).unwrap().iter().all(|r| !r.nonclassical));
}

#[test]
fn jarzynski_for_gibbs_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(281);
    for d in 2..=4 {
        let p = Protocol::new(
            random::hamiltonian(d, 1.0, &mut rng),
            random::hamiltonian(d, 1.0, &mut rng),
            Channel::unitary(random::unitary(d, &mut rng)).unwrap(),
        )
        .unwrap();
        let rho = gibbs_state(p.h_initial(), 1.0).unwrap();
        let s = jarzynski_check(&rho, &p, 1.0).unwrap();
        assert!((s.jarzynski_lhs - (-s.delta_f).exp()).abs() < 1e-12);
    }
}

#[test]
fn nv_parameters() {
    let cfg = NvScenarioConfig::default();
    let omega = 4.4 * std::f64::consts::PI;
    assert!((cfg.omega1 - omega).abs() < 1e-12 && (cfg.omega2 - omega).abs() < 1e-12);
    assert!((cfg.phi1 - 1.09 * omega).abs() < 1e-12 && (cfg.phi2 - 1.09 * omega).abs() < 1e-12);
    assert_eq!(cfg.p_amplitudes, [0.7654, 0.0009, 0.2338]);
    assert_eq!(cfg.a_phases, [0.0073, 0.2787, 0.0002]);
    let (p, raw) = cfg.normalized_populations();
    assert!((raw - 1.0001).abs() < 1e-12);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn nv_equal_work_unequal_negativity() {
    let cfg = NvScenarioConfig::default();
    let rows = run_nv_sweep(&cfg).unwrap();
    assert!(rows.iter().all(|r| (r.w_oq - r.w_mhq).abs() < 1e-9));
    assert!(rows.iter().any(|r| (r.neg_oq - r.neg_mhq).abs() > 1e-3));
    assert!(rows.iter().any(|r| r.neg_oq > 1e-3) && rows.iter().any(|r| r.neg_mhq > 1e-3));
    for r in &rows {
        for table in [&r.oq, &r.mhq, &r.tpm] {
            assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn nv_initial_hamiltonian_is_hermitian_with_zero_trace() {
    let h = nv_hamiltonian(&NvScenarioConfig::default(), 0.0);
    assert!(h.hermiticity_defect() < 1e-15);
    assert!(h.trace().norm() < 1e-12);
}
