use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::grid::TimeGrid;
use crate::linalg::{pauli, Complex64, ComplexMatrix};

fn constant(h: ComplexMatrix) -> impl Fn(f64) -> Result<ComplexMatrix> {
    move |_| Ok(h.clone())
}

fn driven(t: f64) -> Result<ComplexMatrix> {
    Ok(&pauli::x().scale_real(t.cos()) + &pauli::z().scale_real(0.5 * t))
}

fn labels() -> Vec<(String, usize)> {
    vec![("g".into(), 0), ("e".into(), 1)]
}

#[test]
fn resonant_pulse_inverts_population() {
    let omega = 2.0;
    let h = pauli::x().scale_real(omega / 2.0);
    let grid = TimeGrid::new(0.0, PI / omega, 50).unwrap();
    let g = StateVector::basis(2, 0);
    let traj = propagate_schrodinger(constant(h), &g, &grid).unwrap();
    let last = traj.states.last().unwrap();
    assert!((last.population(1) - 1.0).abs() < 1e-12);
    assert!(traj.diagnostics.max_norm_drift < 1e-12);
    let r = metrics(&traj, &StateVector::basis(2, 1), &labels()).unwrap();
    assert_eq!(r.labels, vec!["e", "g"]);
    assert!((r.final_fidelity() - 1.0).abs() < 1e-12);
    let mid = r.index_at(PI / omega / 2.0);
    assert!((r.population("e", mid).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    let psi0 = StateVector::basis(2, 0);
    let end = |steps| {
        let grid = TimeGrid::new(0.0, 2.0, steps).unwrap();
        propagate_schrodinger(driven, &psi0, &grid).unwrap().states.pop().unwrap()
    };
    let reference = end(8192);
    let errors: Vec<f64> = [64, 128, 256].iter().map(|&n| end(n).sub(&reference).norm()).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }
}

#[test]
fn unitary_columns_match_state_propagation() {
    let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
    let u = propagate_unitary(driven, 2, &grid).unwrap();
    let psi = propagate_schrodinger(driven, &StateVector::basis(2, 1), &grid).unwrap();
    let col = u[100].apply(&StateVector::basis(2, 1)).unwrap();
    assert!(col.sub(psi.states.last().unwrap()).norm() < 1e-14);
    let uu = u[100].adjoint().matmul(&u[100]).unwrap();
    assert!((&uu - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-13);
}

#[test]
fn non_hermitian_hamiltonian_is_rejected() {
    let mut h = ComplexMatrix::zeros(2, 2);
    h[(0, 1)] = Complex64::new(1.0, 0.0);
    let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
    let err = propagate_schrodinger(constant(h.clone()), &StateVector::basis(2, 0), &grid).unwrap_err();
    assert!(matches!(err, Error::NonHermitian { .. }));
    let rho = DensityMatrix::from_pure(&StateVector::basis(2, 0));
    assert!(propagate_lindblad(constant(h), &[], &rho, &grid).is_err());
}

#[test]
fn unnormalized_initial_state_is_rejected() {
    let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
    let psi = StateVector::basis(2, 0).scale(Complex64::new(2.0, 0.0));
    assert!(propagate_schrodinger(driven, &psi, &grid).is_err());
}

#[test]
fn spontaneous_decay_is_exponential() {
    let kappa = 0.7;
    let decay = Dissipator::new(pauli::lowering(), kappa).unwrap();
    let rho = DensityMatrix::from_pure(&StateVector::basis(2, 1));
    let grid = TimeGrid::new(0.0, 3.0, 600).unwrap();
    let traj = propagate_lindblad(constant(ComplexMatrix::zeros(2, 2)), &[decay], &rho, &grid).unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        assert!((s.population(1) - (-kappa * t).exp()).abs() < 1e-9);
    }
    assert!(traj.diagnostics.max_trace_drift < 1e-12);
    assert!(traj.diagnostics.min_eigenvalue.unwrap() > -1e-12);
}

#[test]
fn lossless_master_equation_matches_schrodinger() {
    let psi0 = StateVector::basis(2, 0);
    let grid = TimeGrid::new(0.0, 2.0, 2000).unwrap();
    let pure = propagate_schrodinger(driven, &psi0, &grid).unwrap();
    let decay = Dissipator::new(pauli::lowering(), 0.0).unwrap();
    let mixed = propagate_lindblad(driven, &[decay], &DensityMatrix::from_pure(&psi0), &grid).unwrap();
    for (p, m) in pure.states.iter().zip(&mixed.states) {
        assert!((&p.to_density().into_matrix() - m.matrix()).frobenius_norm() < 1e-6);
    }
}

#[test]
fn unstable_step_is_reported() {
    let decay = Dissipator::new(pauli::lowering(), 1e3).unwrap();
    let rho = DensityMatrix::from_pure(&StateVector::basis(2, 1));
    let grid = TimeGrid::new(0.0, 1.0, 20).unwrap();
    let err = propagate_lindblad(constant(ComplexMatrix::zeros(2, 2)), &[decay], &rho, &grid).unwrap_err();
    assert!(matches!(err, Error::Diagnostic(_) | Error::TraceDrift { .. }), "{err:?}");
}

#[test]
fn dissipator_validates_its_input() {
    assert!(Dissipator::new(pauli::lowering(), -1.0).is_err());
    assert!(Dissipator::new(ComplexMatrix::zeros(2, 3), 1.0).is_err());
    let rho = DensityMatrix::from_pure(&StateVector::basis(3, 0));
    let d = Dissipator::new(pauli::lowering(), 1.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
    assert!(propagate_lindblad(constant(ComplexMatrix::zeros(3, 3)), &[d], &rho, &grid).is_err());
}

#[test]
fn results_join_without_repeating_the_seam() {
    let psi0 = StateVector::basis(2, 0);
    let target = StateVector::basis(2, 1);
    let first = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let second = TimeGrid::new(1.0, 2.0, 10).unwrap();
    let a = propagate_schrodinger(driven, &psi0, &first).unwrap();
    let b = propagate_schrodinger(driven, a.states.last().unwrap(), &second).unwrap();
    let mut joined = metrics(&a, &target, &labels()).unwrap();
    joined.append(metrics(&b, &target, &labels()).unwrap()).unwrap();
    assert_eq!(joined.times.len(), 21);
    assert_eq!(joined.header(), vec!["t", "P_e", "P_g", "F", "residual"]);
    assert!(joined.row(20)[4].is_nan());
    let whole = propagate_schrodinger(driven, &psi0, &TimeGrid::new(0.0, 2.0, 20).unwrap()).unwrap();
    assert!(whole.states[20].sub(b.states.last().unwrap()).norm() < 1e-12);
}

#[test]
fn recorder_rejects_bad_targets() {
    let half = StateVector::basis(2, 0).scale(Complex64::new(0.5, 0.0));
    assert!(MetricsRecorder::new(&half, &labels(), 2).is_err());
    assert!(MetricsRecorder::new(&StateVector::basis(3, 0), &labels(), 2).is_err());
    assert!(MetricsRecorder::new(&StateVector::basis(2, 0), &[("x".into(), 5)], 2).is_err());
}

#[test]
fn diagnostics_merge_keeps_worst_values() {
    let a = Diagnostics {
        max_norm_drift: 1e-3,
        min_eigenvalue: Some(-1e-9),
        ..Diagnostics::default()
    };
    let b = Diagnostics {
        max_trace_drift: 1e-8,
        min_eigenvalue: Some(1e-4),
        max_residual: Some(2.0),
        ..Diagnostics::default()
    };
    let m = a.merge(b);
    assert_eq!(m.max_norm_drift, 1e-3);
    assert_eq!(m.max_trace_drift, 1e-8);
    assert_eq!(m.min_eigenvalue, Some(-1e-9));
    assert_eq!(m.max_residual, Some(2.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_evolution_preserves_the_norm(a in -3.0f64..3.0, b in -3.0f64..3.0, steps in 5usize..60) {
        let h = move |t: f64| Ok(&pauli::x().scale_real(a * t) + &pauli::y().scale_real(b));
        let psi0 = StateVector::basis(2, 0);
        let traj = propagate_schrodinger(h, &psi0, &TimeGrid::new(0.0, 1.0, steps).unwrap()).unwrap();
        prop_assert!(traj.diagnostics.max_norm_drift < 1e-12);
    }

    #[test]
    fn master_equation_keeps_trace_and_positivity(kappa in 0.0f64..2.0, a in -2.0f64..2.0) {
        let h = move |t: f64| Ok(pauli::x().scale_real(a * (1.0 + t)));
        let d = Dissipator::new(pauli::lowering(), kappa).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis(2, 1));
        let traj = propagate_lindblad(h, &[d], &rho, &TimeGrid::new(0.0, 1.0, 200).unwrap()).unwrap();
        prop_assert!(traj.diagnostics.max_trace_drift < 1e-10);
        prop_assert!(traj.diagnostics.min_eigenvalue.unwrap() > -1e-10);
    }
}
