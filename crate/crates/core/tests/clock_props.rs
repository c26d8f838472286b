use hampath::clock::{
    assemble_final, clock_eigen, clock_window, linearize, state_distance, tilt_extend, unary_index, unary_level,
    window_residual, ClockParams, LinearAssembly,
};
use hampath::operator::{DiagonalOperator, PauliTermList};
use proptest::prelude::*;

fn unit(dim: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[k] = 1.0;
    v
}

fn assembly(nb: usize, ell: usize, vals: &[f64]) -> LinearAssembly {
    let mut it = vals.iter().copied().cycle();
    let ds = (0..=ell)
        .map(|_| DiagonalOperator::new(nb, (0..1 << nb).map(|_| it.next().unwrap()).collect()).unwrap())
        .collect();
    LinearAssembly::with_defaults(ds, PauliTermList::uniform_x(nb, 1.0), 0.1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clock_gap_over_the_full_range(ell in 1usize..=5, u in 0.0f64..1.0) {
        let p = ClockParams::new(ell, 0.05).unwrap();
        let span = 2.0 * (ell * ell) as f64;
        let sol = clock_eigen(&p, -span + 2.0 * span * u).unwrap();
        prop_assert!(sol.values[1] - sol.values[0] >= 0.5);
    }

    #[test]
    fn ground_state_sits_in_the_window(ell in 1usize..=5, u in 0.0f64..1.0) {
        let p = ClockParams::new(ell, 0.05).unwrap();
        let t = (ell + 1) as f64 * u;
        let sol = clock_eigen(&p, t).unwrap();
        let (a, b) = clock_window(ell, t);
        prop_assert!(window_residual(ell, &sol.vectors[0], a, b) <= 10.0 * p.eps_l);
    }

    #[test]
    fn lambda_robust_outside_the_schedule(ell in 1usize..=5, lambda in 0.0f64..=2.0, u in 0.0f64..1.0, left in any::<bool>()) {
        let p = ClockParams::new(ell, 0.05).unwrap().with_lambda(lambda);
        let span = 2.0 * (ell * ell) as f64;
        let (t, level) = if left { (-span * u, 0) } else { ((ell + 1) as f64 + (span - (ell + 1) as f64) * u, ell) };
        let sol = clock_eigen(&p, t).unwrap();
        prop_assert!(sol.values[1] - sol.values[0] >= 0.5);
        let target = unit(1 << ell, unary_index(ell, level));
        prop_assert!(state_distance(&sol.vectors[0], &target) <= 10.0 * p.eps_l);
    }

    #[test]
    fn linearize_and_tilt_are_affine(vals in prop::collection::vec(-1.0f64..1.0, 12), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        let a = assembly(2, 2, &vals);
        let mid = linearize(&a, 0.5 * (t1 + t2)).unwrap();
        let avg = linearize(&a, t1).unwrap().combine(0.5, &linearize(&a, t2).unwrap(), 0.5).unwrap();
        prop_assert!(mid.sub(&avg).unwrap().max_abs() <= 1e-12 * mid.max_abs());
        let r = 1.0 / a.eta;
        let (u1, u2) = (s1 * r, s2 * r);
        let mid = tilt_extend(&a, 0.5 * (u1 + u2)).unwrap();
        let avg = tilt_extend(&a, u1).unwrap().combine(0.5, &tilt_extend(&a, u2).unwrap(), 0.5).unwrap();
        prop_assert!(mid.sub(&avg).unwrap().max_abs() <= 1e-12 * mid.max_abs());
    }

    #[test]
    fn final_diagonal_ordering(nb in 1usize..=3, ell in 1usize..=3, vals in prop::collection::vec(-1.0f64..-0.01, 32)) {
        let a = assembly(nb, ell, &vals);
        prop_assume!(a.d_list[ell].unique_argmin().is_some());
        let f = assemble_final(&a).unwrap();
        let d = f.d_final.values();
        let top = unary_index(ell, ell);
        let at = |v: usize, c: usize| d[(v << ell) | c];
        for v in 0..1usize << nb {
            for c in 0..1usize << ell {
                if c != top {
                    prop_assert!(at(v, c) > at(v, top));
                }
                if unary_level(ell, c).is_none() {
                    prop_assert!((0..=ell).any(|j| at(v, c) > at(v, unary_index(ell, j))));
                }
            }
            if v != f.u {
                prop_assert!(at(v, top) > at(f.u, top));
            }
        }
        let brute = (0..d.len()).min_by(|&x, &y| d[x].total_cmp(&d[y])).unwrap();
        prop_assert_eq!(brute, f.ground_index);
    }
}

#[test]
fn tilt_domain_is_enforced() {
    let a = assembly(1, 1, &[-0.4, -0.1, -0.3, -0.2]);
    let r = 1.0 / a.eta;
    assert!(tilt_extend(&a, r * 1.01).is_err());
    assert!(tilt_extend(&a, -r).is_ok());
    assert!(tilt_extend(&a, r).unwrap().is_diagonal());
}

#[test]
fn assembled_start_is_near_the_product_state() {
    let a = assembly(2, 2, &[-0.3, -0.9, -0.5, -0.6, -0.2, -0.7, -0.1, -0.4, -0.8, -0.5, -0.3, -0.6]);
    let f = assemble_final(&a).unwrap();
    assert!(f.product_distance <= 0.05);
}
