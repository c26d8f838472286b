use hampath::continuous::{
    build_hat_hamiltonian, discretize_double_well, double_well_basis, hat_diag_value, objective_f, qhd_path,
    restricted_inner, schedule, Grid1D, ScheduleParams,
};
use hampath::operator::DiagonalOperator;
use proptest::prelude::*;

#[test]
fn grid_convergence_at_lambda_30() {
    let coarse = double_well_basis(30.0, &Grid1D::new(2048).unwrap()).unwrap();
    let fine = double_well_basis(30.0, &Grid1D::new(4096).unwrap()).unwrap();
    assert!((coarse.mu0 - fine.mu0).abs() <= 1e-4);
    assert!((coarse.mu1 - fine.mu1).abs() <= 1e-4);
}

#[test]
fn parity_and_normalization() {
    let g = Grid1D::new(2048).unwrap();
    for lam in [10.0, 25.0, 40.0] {
        let b = double_well_basis(lam, &g).unwrap();
        let (p0, p1) = b.parities();
        assert!(p0 >= 1.0 - 1e-8 && p1 <= -(1.0 - 1e-8));
        let full = restricted_inner(&b.chi0, &b.chi0, &[g], &[(-1.0, 1.0)]).unwrap();
        assert!((full - 1.0).abs() <= 1e-9);
        assert!(restricted_inner(&b.hat0, &b.hat1, &[g], &[(-1.0, 1.0)]).unwrap().abs() <= 1e-9);
        assert!(b.big_lambda > 0.0 && b.mu2 > b.mu1);
    }
}

#[test]
fn kronecker_sum_for_zero_diagonal() {
    let g = Grid1D::new(64).unwrap();
    let lam = 10.0;
    let a = [1.0, 1.5];
    let d = DiagonalOperator::zeros(2).unwrap();
    let h = build_hat_hamiltonian(&a, &d, lam, &[g, g], 0.25).unwrap();
    let got = h.lowest(6).unwrap().values;
    let axis = discretize_double_well(lam, &g);
    let mu: Vec<f64> = (0..6).map(|j| axis.eigenvalue(j)).collect();
    let mut want: Vec<f64> = mu.iter().flat_map(|x| mu.iter().map(move |y| a[0] * x + a[1] * y)).collect();
    want.sort_by(f64::total_cmp);
    for (x, y) in got.iter().zip(&want) {
        assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{x} vs {y}");
    }
}

proptest! {
    #[test]
    fn hat_diag_is_lipschitz(vals in prop::collection::vec(-1.0f64..1.0, 4), x in prop::collection::vec(-1.0f64..1.0, 2), y in prop::collection::vec(-1.0f64..1.0, 2)) {
        let d = DiagonalOperator::new(2, vals.clone()).unwrap();
        let w = 0.25;
        let lip = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())) / w;
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        let (fx, fy) = (hat_diag_value(&d, &x, w).unwrap(), hat_diag_value(&d, &y, w).unwrap());
        prop_assert!((fx - fy).abs() <= lip * dist + 1e-12);
    }

    #[test]
    fn hat_diag_minimum(vals in prop::collection::vec(-1.0f64..1.0, 4)) {
        let d = DiagonalOperator::new(2, vals.clone()).unwrap();
        let want = d.min().min(0.0);
        let mut best = f64::INFINITY;
        for i in 0..=80 {
            for j in 0..=80 {
                let xi = [-1.0 + i as f64 / 40.0, -1.0 + j as f64 / 40.0];
                best = best.min(hat_diag_value(&d, &xi, 0.25).unwrap());
            }
        }
        prop_assert!((best - want).abs() <= 1e-12);
    }
}

#[test]
fn boundary_values_vanish() {
    let d = DiagonalOperator::new(2, vec![-0.5, 0.3, -0.9, 0.2]).unwrap();
    for t in [-1.0, -0.3, 0.0, 0.6, 1.0] {
        assert_eq!(hat_diag_value(&d, &[0.0, t], 0.25).unwrap(), 0.0);
        assert_eq!(hat_diag_value(&d, &[t, 0.0], 0.25).unwrap(), 0.0);
    }
}

#[test]
fn schedule_inversion_and_objective() {
    let h = DiagonalOperator::new(1, vec![-0.7, -0.2]).unwrap();
    let p = ScheduleParams::new(2.0, vec![1.0], Grid1D::new(64).unwrap(), 0.25, None).unwrap();
    let path = qhd_path(&h, &p, 12.0).unwrap();
    let (lo, hi) = path.domain();
    for k in 0..=10 {
        let t = lo + (hi - lo) * k as f64 / 10.0;
        let lam = path.lambda_at(t).unwrap();
        assert!((schedule(&p, lam).unwrap().t - t).abs() <= 1e-9 * hi.abs().max(1.0));
    }
    let f_left = objective_f(&h, &[1.0], 0.25, &[-0.5]).unwrap();
    let f_right = objective_f(&h, &[1.0], 0.25, &[0.5]).unwrap();
    assert!(f_right < f_left);
    let op = path.operator_at(hi).unwrap();
    let ground = op.lowest(1).unwrap();
    let v = &ground.vectors[0];
    // Final ground state is concentrated at ξ > 0, the orthant of the minimizer |0⟩.
    let g = p.grid;
    let right = restricted_inner(v, v, &[g], &[(0.0, 1.0)]).unwrap() / restricted_inner(v, v, &[g], &[(-1.0, 1.0)]).unwrap();
    assert!(right > 0.9, "{right}");
}
