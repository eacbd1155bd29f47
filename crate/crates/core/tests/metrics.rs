use graphlearn::metrics::{binarize_edges, connectivity, evaluate, f_measure, relative_degree_error, relative_edge_error};
use graphlearn::{EdgeVector, Norm};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = EdgeVector> {
    proptest::collection::vec(prop_oneof![2 => Just(0.0), 3 => 0.0..5.0f64], 28)
        .prop_map(|w| EdgeVector::new(8, w).unwrap())
}

proptest! {
    #[test]
    fn self_comparison_is_perfect(w in weights()) {
        prop_assume!(w.nonzeros() > 0);
        let r = evaluate(&w, &w, 1e-4).unwrap();
        prop_assert_eq!(r.f_measure, 1.0);
        prop_assert!(r.edge_l1 <= 1e-15 && r.edge_l2 <= 1e-15);
        prop_assert!(r.degree_l1 <= 1e-15 && r.degree_l2 <= 1e-15);
    }

    #[test]
    fn errors_ignore_learned_scale(a in weights(), b in weights(), c in 1e-3..1e3f64) {
        prop_assume!(b.nonzeros() > 0);
        let scaled = a.scaled(c).unwrap();
        for p in [Norm::L1, Norm::L2] {
            let e1 = relative_edge_error(&a, &b, p).unwrap();
            let e2 = relative_edge_error(&scaled, &b, p).unwrap();
            prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
            let d1 = relative_degree_error(&a, &b, p).unwrap();
            let d2 = relative_degree_error(&scaled, &b, p).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12 * d1.max(1.0));
        }
        let f = f_measure(&a, &b, 1e-4).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn connectivity_bounds(w in weights(), t1 in 0.0..0.9f64, t2 in 0.0..0.9f64) {
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let (c_lo, d_lo) = connectivity(&w, lo);
        let (c_hi, d_hi) = connectivity(&w, hi);
        prop_assert!(c_lo <= c_hi, "components grow with the cut");
        prop_assert!(d_lo <= d_hi);
        prop_assert!(d_lo <= c_lo && (1..=8).contains(&c_lo));
        let kept = binarize_edges(&w, lo).iter().filter(|&&b| b).count();
        prop_assert!(c_lo + kept >= 8, "a forest bound: components >= m - edges");
    }
}

#[test]
fn disjoint_supports() {
    let a = EdgeVector::new(3, vec![1.0, 0.0, 0.0]).unwrap();
    let b = EdgeVector::new(3, vec![0.0, 2.0, 0.0]).unwrap();
    assert_eq!(relative_edge_error(&a, &b, Norm::L1).unwrap(), 2.0);
    assert!((relative_edge_error(&a, &b, Norm::L2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(f_measure(&a, &b, 1e-4).unwrap(), 0.0);
}

#[test]
fn half_precision_full_recall() {
    // truth has 3 edges; learned adds 3 false ones: P = 1/2, R = 1
    let truth = EdgeVector::from_fn(5, |i, j| if j == i + 1 && i < 3 { 1.0 } else { 0.0 }).unwrap();
    let learned = EdgeVector::from_fn(5, |i, j| if (j == i + 1 && i < 3) || (i == 0 && j >= 2) { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(learned.nonzeros(), 6);
    assert!((f_measure(&learned, &truth, 1e-4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
}
