use hampath::continuous::{qhd_path, Grid1D, ScheduleParams};
use hampath::dynamics::{
    basis_state, evolve, fidelity, measure, required_time, state_norm, to_complex, EvolutionSpec, Reversed,
};
use hampath::operator::{build_from_pauli, DiagonalOperator, PauliTerm, PauliTermList};
use hampath::path::{random_sparse_stoquastic_path, PiecewiseLinearPath};
use num_complex::Complex64;
use proptest::prelude::*;

fn x_to_z() -> PiecewiseLinearPath {
    let x = build_from_pauli(&PauliTermList::uniform_x(1, 1.0)).unwrap();
    let z = build_from_pauli(&PauliTermList { num_qubits: 1, terms: vec![PauliTerm::z(-1.0, 0)] }).unwrap();
    PiecewiseLinearPath::uniform(vec![x, z]).unwrap()
}

fn plus(n: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    to_complex(&vec![(1.0 / dim as f64).sqrt(); dim])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_is_unitary_and_reversible(seed in 0u64..1000, t in 0.5f64..20.0) {
        let (p, _) = random_sparse_stoquastic_path(3, 2, 2.0, 2, seed).unwrap();
        let init = plus(3);
        let fwd = evolve(&EvolutionSpec { path: &p, total_time: t, steps: 200, initial: init.clone() }).unwrap();
        prop_assert!((state_norm(&fwd.state) - 1.0).abs() <= 1e-9);
        let back = evolve(&EvolutionSpec { path: &Reversed(&p), total_time: -t, steps: 200, initial: fwd.state }).unwrap();
        prop_assert!(1.0 - fidelity(&back.state, &init).unwrap() <= 1e-6);
    }
}

#[test]
fn krylov_evolution_is_reversible() {
    // 2^10 states: above the dense-exponential crossover.
    let x = build_from_pauli(&PauliTermList::uniform_x(10, 1.0)).unwrap();
    let d = DiagonalOperator::new(10, (0..1024).map(|v| ((v * 7919) % 1013) as f64 / 1013.0 - 0.5).collect()).unwrap();
    let p = PiecewiseLinearPath::uniform(vec![x, d.to_sparse()]).unwrap();
    let init = plus(10);
    let fwd = evolve(&EvolutionSpec { path: &p, total_time: 5.0, steps: 20, initial: init.clone() }).unwrap();
    assert!(fwd.norm_drift <= 1e-9);
    let back = evolve(&EvolutionSpec { path: &Reversed(&p), total_time: -5.0, steps: 20, initial: fwd.state }).unwrap();
    assert!(1.0 - fidelity(&back.state, &init).unwrap() <= 1e-6);
}

#[test]
fn constant_generator_is_step_independent() {
    let h = build_from_pauli(&PauliTermList { num_qubits: 2, terms: vec![PauliTerm::x(-1.0, 0), PauliTerm::zz(0.7, 0, 1)] }).unwrap();
    let p = PiecewiseLinearPath::uniform(vec![h.clone(), h]).unwrap();
    let init = basis_state(4, 1);
    let a = evolve(&EvolutionSpec { path: &p, total_time: 3.0, steps: 10, initial: init.clone() }).unwrap();
    let b = evolve(&EvolutionSpec { path: &p, total_time: 3.0, steps: 400, initial: init }).unwrap();
    let diff: f64 = a.state.iter().zip(&b.state).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    assert!(diff <= 1e-9);
}

#[test]
fn adiabatic_fidelity_at_the_heuristic_time() {
    let p = x_to_z();
    let t = required_time(1.0, 2f64.sqrt(), 0.1);
    let out = evolve(&EvolutionSpec { path: &p, total_time: t, steps: 2000, initial: plus(1) }).unwrap();
    assert!(fidelity(&out.state, &basis_state(2, 0)).unwrap() >= 0.99);
    let out = evolve(&EvolutionSpec { path: &p, total_time: 50.0, steps: 500, initial: plus(1) }).unwrap();
    assert!(fidelity(&out.state, &basis_state(2, 0)).unwrap() >= 0.99);
}

#[test]
fn plus_state_measurement_statistics() {
    let psi = plus(1);
    let hist = measure(&psi, 100_000, 3).unwrap();
    for k in 0..2 {
        let f = hist[&k] as f64 / 1e5;
        assert!((f - 0.5).abs() <= 0.01, "{f}");
    }
    assert_eq!(hist, measure(&psi, 100_000, 3).unwrap());
    assert_eq!(measure(&basis_state(8, 5), 1000, 1).unwrap().into_iter().collect::<Vec<_>>(), vec![(5, 1000)]);
}

#[test]
fn required_time_scaling() {
    assert!((required_time(1.0, 1.0, 0.1) - 100.0).abs() <= 1e-12);
    let base = required_time(1.3, 0.7, 0.2);
    assert!((required_time(2.6, 0.7, 0.2) / base - 4.0).abs() <= 1e-12);
    assert!((required_time(1.3, 0.35, 0.2) / base - 8.0).abs() <= 1e-12);
}

#[test]
fn grid_path_evolution_preserves_norm() {
    let h = DiagonalOperator::new(1, vec![-0.7, -0.2]).unwrap();
    let p = ScheduleParams::new(2.0, vec![1.0], Grid1D::new(64).unwrap(), 0.25, None).unwrap();
    let path = qhd_path(&h, &p, 8.0).unwrap();
    let init = to_complex(&vec![1.0 / 8.0; 64]);
    let out = evolve(&EvolutionSpec { path: &path, total_time: 0.05, steps: 50, initial: init }).unwrap();
    assert!(out.norm_drift <= 1e-9);
}
