mod support;

use graphlearn::graph::{degree_map, edge_count};
use graphlearn::solvers::prox::{
    prox_conjugate_log_barrier, prox_conjugate_log_barrier_scalar, prox_log_barrier_scalar, prox_weighted_l1_nonneg,
};
use graphlearn::solvers::{gaussian_kernel_objective, l2_degree_smooth_gradient, log_degree_smooth_gradient};
use graphlearn::{
    gaussian_kernel, learn_l2_degree, learn_log_degree, objective_value, scale_to_unit_alpha, DistanceVector, Model,
    SolverConfig,
};
use proptest::prelude::*;
use rand::Rng;
use support::*;

fn tight() -> SolverConfig {
    SolverConfig::default().with_tolerance(1e-10).with_max_iterations(2_000_000)
}

#[test]
fn log_degree_matches_projected_gradient_oracle() {
    let mut r = rng(101);
    for case in 0..12 {
        let m = 3 + case % 4;
        let z = random_distances(&mut r, m, 3);
        let alpha = log_uniform(&mut r, 0.3, 3.0);
        let beta = log_uniform(&mut r, 0.1, 3.0);
        let oracle = oracle_log_degree(m, &z, alpha, beta);
        let dz = DistanceVector::new(m, z.clone()).unwrap();
        let res = learn_log_degree(&dz, alpha, beta, &tight()).unwrap();
        assert!(res.converged);
        let w = res.weights.weights();
        assert!(rel_l2(w, &oracle) <= 1e-3, "case {case}: {w:?} vs {oracle:?}");
        let fo = log_objective(m, &z, &oracle, alpha, beta);
        assert!(res.final_objective <= fo + 1e-3 * fo.abs(), "case {case}");
        assert!((res.final_objective - log_objective(m, &z, w, alpha, beta)).abs() <= 1e-12 * fo.abs().max(1.0));
    }
}

#[test]
fn l2_degree_matches_simplex_oracle() {
    let mut r = rng(202);
    for case in 0..12 {
        let m = 3 + case % 4;
        let z = random_distances(&mut r, m, 3);
        let alpha = log_uniform(&mut r, 0.05, 3.0);
        let s = log_uniform(&mut r, 0.5, 5.0);
        let oracle = oracle_l2_degree(m, &z, alpha, s);
        let dz = DistanceVector::new(m, z.clone()).unwrap();
        let res = learn_l2_degree(&dz, alpha, s, &tight()).unwrap();
        assert!(res.converged);
        let w = res.weights.weights();
        assert!(rel_l2(w, &oracle) <= 1e-3, "case {case}: {w:?} vs {oracle:?}");
        let fo = l2_objective(m, &z, &oracle, alpha);
        assert!(res.final_objective <= fo + 1e-3 * fo.abs(), "case {case}");
        let total: f64 = 2.0 * w.iter().sum::<f64>();
        assert!((total - s).abs() <= 1e-6 * s);
    }
}

#[test]
fn three_node_log_oracle_at_default_tolerance() {
    let mut r = rng(7);
    let z = random_distances(&mut r, 3, 2);
    let oracle = oracle_log_degree(3, &z, 1.0, 1.0);
    let res = learn_log_degree(&DistanceVector::new(3, z).unwrap(), 1.0, 1.0, &SolverConfig::default()).unwrap();
    assert!(rel_l2(res.weights.weights(), &oracle) <= 1e-3);
}

#[test]
fn unit_alpha_rescaling() {
    let mut r = rng(303);
    for _ in 0..5 {
        let m = 20;
        let z = DistanceVector::new(m, random_distances(&mut r, m, 4)).unwrap();
        let alpha = log_uniform(&mut r, 0.2, 5.0);
        let beta = log_uniform(&mut r, 0.05, 2.0);
        let direct = learn_log_degree(&z, alpha, beta, &tight()).unwrap();
        let unit = scale_to_unit_alpha(&z, alpha * beta, &tight()).unwrap();
        let scaled: Vec<f64> = unit.weights.weights().iter().map(|x| alpha * x).collect();
        assert!(rel_inf(direct.weights.weights(), &scaled) <= 1e-4);

        // gamma form: F(z, a, b) = g F(z, a / g, b g)
        let g = 3.0;
        let other = learn_log_degree(&z, alpha / g, beta * g, &tight()).unwrap();
        let scaled: Vec<f64> = other.weights.weights().iter().map(|x| g * x).collect();
        assert!(rel_inf(direct.weights.weights(), &scaled) <= 1e-4);
    }
}

#[test]
fn l2_degree_shift_and_scale() {
    let mut r = rng(404);
    for _ in 0..5 {
        let m = 20;
        let zv = random_distances(&mut r, m, 4);
        let z = DistanceVector::new(m, zv.clone()).unwrap();
        let alpha = log_uniform(&mut r, 0.01, 1.0);
        let s = log_uniform(&mut r, 1.0, 40.0);
        let base = learn_l2_degree(&z, alpha, s, &tight()).unwrap();
        let shifted = learn_l2_degree(&z.shifted(2.5).unwrap(), alpha, s, &tight()).unwrap();
        assert!(rel_inf(shifted.weights.weights(), base.weights.weights()) <= 1e-4);
        let unit = learn_l2_degree(&z, alpha * s, 1.0, &tight()).unwrap();
        let scaled: Vec<f64> = unit.weights.weights().iter().map(|x| s * x).collect();
        assert!(rel_inf(base.weights.weights(), &scaled) <= 1e-4);
    }
}

#[test]
fn zero_beta_keeps_every_degree_positive() {
    let mut r = rng(505);
    for _ in 0..5 {
        let m = 30;
        let z = DistanceVector::new(m, random_distances(&mut r, m, 2)).unwrap();
        let res = learn_log_degree(&z, 1.0, 0.0, &SolverConfig::default()).unwrap();
        assert!(res.degrees.iter().all(|&d| d > 0.0), "{:?}", res.degrees);
        assert!(res.weights.weights().iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn solver_is_deterministic() {
    let mut r = rng(606);
    let z = DistanceVector::new(15, random_distances(&mut r, 15, 3)).unwrap();
    let a = learn_log_degree(&z, 1.0, 0.5, &SolverConfig::default()).unwrap();
    let b = learn_log_degree(&z, 1.0, 0.5, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn objective_traces_decrease_to_the_optimum() {
    let mut r = rng(707);
    let z = DistanceVector::new(10, random_distances(&mut r, 10, 3)).unwrap();
    let cfg = SolverConfig {
        trace_interval: 10,
        ..tight()
    };
    let res = learn_log_degree(&z, 1.0, 0.5, &cfg).unwrap();
    let last = *res.objective_trace.last().unwrap();
    assert_eq!(last, res.final_objective);
    let finite: Vec<f64> = res.objective_trace.iter().copied().filter(|v| v.is_finite()).collect();
    assert!(finite.len() > 2);
    assert!(finite.iter().all(|&v| v >= last - 1e-9 * last.abs()));
}

#[test]
fn smooth_gradients_match_finite_differences() {
    let mut r = rng(808);
    for _ in 0..10 {
        let m = 6;
        let ne = edge_count(m);
        let w: Vec<f64> = (0..ne).map(|_| r.random::<f64>() + 0.1).collect();
        let alpha = log_uniform(&mut r, 0.1, 5.0);
        let beta = log_uniform(&mut r, 0.1, 5.0);
        let f_log = |v: &[f64]| beta * v.iter().map(|x| x * x).sum::<f64>();
        let f_l2 = |v: &[f64]| {
            let d = degree_matrix(m) * nalgebra::DVector::from_column_slice(v);
            alpha * (2.0 * v.iter().map(|x| x * x).sum::<f64>() + d.norm_squared())
        };
        let g_log = log_degree_smooth_gradient(&w, beta);
        let g_l2 = l2_degree_smooth_gradient(m, &w, alpha);
        let h = 1e-5;
        for k in 0..ne {
            let mut up = w.clone();
            let mut dn = w.clone();
            up[k] += h;
            dn[k] -= h;
            let fd_log = (f_log(&up) - f_log(&dn)) / (2.0 * h);
            let fd_l2 = (f_l2(&up) - f_l2(&dn)) / (2.0 * h);
            assert!(rel(fd_log, g_log[k]) <= 1e-6, "{fd_log} {}", g_log[k]);
            assert!(rel(fd_l2, g_l2[k]) <= 1e-6, "{fd_l2} {}", g_l2[k]);
        }
    }
}

#[test]
fn gaussian_kernel_is_coordinatewise_optimal() {
    let mut r = rng(909);
    for _ in 0..10 {
        let m = 8;
        let zv = random_distances(&mut r, m, 3);
        let z = DistanceVector::new(m, zv.clone()).unwrap();
        let sigma = log_uniform(&mut r, 0.2, 3.0);
        let w = gaussian_kernel(&z, sigma).unwrap();
        let base = gaussian_kernel_objective(w.weights(), &zv, sigma);
        for k in 0..w.len() {
            for delta in [1e-3, -1e-3] {
                let mut p = w.weights().to_vec();
                p[k] += delta;
                if p[k] < 0.0 {
                    continue;
                }
                assert!(gaussian_kernel_objective(&p, &zv, sigma) >= base);
            }
        }
    }
}

#[test]
fn objective_matches_dense_oracle() {
    let mut r = rng(1001);
    let m = 5;
    let zv = random_distances(&mut r, m, 2);
    let w: Vec<f64> = (0..edge_count(m)).map(|_| r.random::<f64>()).collect();
    let z = DistanceVector::new(m, zv.clone()).unwrap();
    let we = graphlearn::EdgeVector::new(m, w.clone()).unwrap();
    let a = objective_value(&Model::LogDegree { alpha: 1.3, beta: 0.7 }, &z, &we).unwrap();
    assert!(rel(a, log_objective(m, &zv, &w, 1.3, 0.7)) < 1e-13);
    let b = objective_value(&Model::L2Degree { alpha: 0.4, s: 2.0 }, &z, &we).unwrap();
    assert!(rel(b, l2_objective(m, &zv, &w, 0.4)) < 1e-13);
    assert_eq!(degree_map(&we).values().len(), m);
}

proptest! {
    #[test]
    fn prox_operators_are_nonexpansive(
        a in proptest::collection::vec(-50.0..50.0f64, 6),
        b in proptest::collection::vec(-50.0..50.0f64, 6),
        z in proptest::collection::vec(0.0..10.0f64, 6),
        alpha in 0.01..10.0f64,
        gamma in 0.001..5.0f64,
    ) {
        let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let ab = dist(&a, &b);
        let pa = prox_weighted_l1_nonneg(&a, &z, gamma);
        let pb = prox_weighted_l1_nonneg(&b, &z, gamma);
        prop_assert!(dist(&pa, &pb) <= ab * (1.0 + 1e-12));
        let qa = prox_conjugate_log_barrier(&a, alpha, gamma);
        let qb = prox_conjugate_log_barrier(&b, alpha, gamma);
        prop_assert!(dist(&qa, &qb) <= ab * (1.0 + 1e-12));
    }

    #[test]
    fn log_barrier_prox_is_scalar_optimal(y in -100.0..100.0f64, alpha in 0.01..10.0f64, lambda in 0.01..10.0f64) {
        // stationarity of 1/2 (u - y)^2 - lambda alpha log u:  u - y - lambda alpha / u = 0
        let u = prox_log_barrier_scalar(y, alpha, lambda);
        prop_assert!(u > 0.0);
        let resid = u - y - lambda * alpha / u;
        prop_assert!(resid.abs() <= 1e-12 * (u.abs() + y.abs() + lambda * alpha / u));
        // Moreau: prox_{g f*}(y) + g prox_{f/g}(y/g) = y
        let dual = prox_conjugate_log_barrier_scalar(y, alpha, lambda);
        let primal = lambda * prox_log_barrier_scalar(y / lambda, alpha, 1.0 / lambda);
        prop_assert!((dual + primal - y).abs() <= 1e-12 * y.abs().max(1.0));
    }
}
