use hampath::operator::{build_from_pauli, validate_structure, PauliTerm, PauliTermList, SparseSymmetricOperator};
use hampath::path::{eval_path, random_sparse_stoquastic_path, HamiltonianPath, PiecewiseLinearPath};
use proptest::prelude::*;

fn tfi_list(n: usize, coeffs: &[f64]) -> PauliTermList {
    let mut p = PauliTermList::new(n);
    let mut it = coeffs.iter().copied().cycle();
    for q in 0..n {
        p.push(PauliTerm::x(it.next().unwrap(), q));
        p.push(PauliTerm::z(it.next().unwrap(), q));
        for r in q + 1..n {
            p.push(PauliTerm::zz(it.next().unwrap(), q, r));
        }
    }
    p
}

fn random_symmetric(n: usize, vals: &[f64]) -> SparseSymmetricOperator {
    let dim = 1usize << n;
    let mut it = vals.iter().copied().cycle();
    let mut op = SparseSymmetricOperator::zeros(n).unwrap();
    for i in 0..dim {
        for j in i..dim {
            let v = it.next().unwrap();
            if v.abs() > 0.5 {
                op.set(i, j, v).unwrap();
            }
        }
    }
    op
}

proptest! {
    #[test]
    fn induced_norm_dominates_entries(n in 1usize..5, vals in prop::collection::vec(-3.0f64..3.0, 1..64)) {
        let op = random_symmetric(n, &vals);
        let r = validate_structure(&op);
        prop_assert!(r.induced_one_norm >= op.max_abs());
    }

    #[test]
    fn tfi_lists_build_tfd_hypercube_operators(n in 1usize..6, coeffs in prop::collection::vec(-2.0f64..2.0, 1..20)) {
        let h = build_from_pauli(&tfi_list(n, &coeffs)).unwrap();
        let r = validate_structure(&h);
        prop_assert!(r.tfd);
        prop_assert!(r.hypercube);
        prop_assert!(r.induced_one_norm >= h.max_abs());
    }

    #[test]
    fn path_is_affine_within_segments(seed in 0u64..500, k in 0usize..3, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (p, _) = random_sparse_stoquastic_path(2, 2, 1.0, 3, seed).unwrap();
        let path = HamiltonianPath::Piecewise(p);
        let (t1, t2) = ((k as f64 + a) / 3.0, (k as f64 + b) / 3.0);
        let mid = eval_path(&path, 0.5 * (t1 + t2)).unwrap();
        let avg = eval_path(&path, t1).unwrap().combine(0.5, &eval_path(&path, t2).unwrap(), 0.5).unwrap();
        prop_assert!(mid.sub(&avg).unwrap().max_abs() <= 1e-12);
    }
}

#[test]
fn breakpoints_are_exact() {
    let (p, _) = random_sparse_stoquastic_path(2, 2, 1.0, 4, 9).unwrap();
    for (t, op) in p.breakpoints().to_vec() {
        assert_eq!(p.eval(t).unwrap(), op);
    }
}

#[test]
fn generated_paths_respect_the_constraint() {
    for seed in 0..20 {
        let (p, c) = random_sparse_stoquastic_path(3, 3, 2.0, 2, seed).unwrap();
        for (_, op) in p.breakpoints() {
            let r = validate_structure(op);
            assert!(r.stoquastic && r.induced_one_norm <= 2.0 + 1e-12);
            assert!(op.off_diagonal().all(|(i, j, _)| c.contains(i, j)));
            assert!(c.max_row_sparsity() <= 3);
        }
    }
}

#[test]
fn uniform_path_domain() {
    let x = build_from_pauli(&PauliTermList::uniform_x(1, 1.0)).unwrap();
    let p = PiecewiseLinearPath::uniform(vec![x.clone(), x.scaled(2.0), x]).unwrap();
    assert_eq!(p.domain(), (0.0, 1.0));
    assert!(p.eval(1.5).is_err());
}
