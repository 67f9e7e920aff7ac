use std::path::PathBuf;

use approach_core::approach_full::convex_approachable_full;
use approach_core::approach_partial::{compatible_payoffs_flat, convex_approachable_partial};
use approach_core::condition::Verdict;
use approach_core::convex::{Halfspace, Polytope};
use approach_core::game::Game;
use approach_core::harness::{run, Mode, RunConfig};
use approach_core::lp::{LinearProgram, Relation};
use approach_core::transport::{displacement_interpolate, w2, w2_distance, DiscreteMeasure};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|a| a / s).collect()
    })
}

fn points(n: std::ops::RangeInclusive<usize>, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), n)
}

fn measure(dim: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1usize..=5).prop_flat_map(move |n| {
        (points(n..=n, dim), simplex(n)).prop_map(|(a, w)| DiscreteMeasure::new(a, w).unwrap())
    })
}

fn polytope(dim: usize) -> impl Strategy<Value = Polytope> {
    points(1..=6, dim).prop_map(|p| Polytope::from_vertices(&p).unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixed_payoff_is_bilinear(x in simplex(2), y1 in simplex(3), y2 in simplex(3), t in 0.0f64..1.0) {
        let g = Game::example1();
        let y: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let lhs = g.mixed_payoff(&x, &y).unwrap();
        let p1 = g.mixed_payoff(&x, &y1).unwrap();
        let p2 = g.mixed_payoff(&x, &y2).unwrap();
        for c in 0..2 {
            prop_assert!((lhs[c] - (t * p1[c] + (1.0 - t) * p2[c])).abs() < 1e-12);
        }
    }

    #[test]
    fn flag_is_linear_and_stochastic(y1 in simplex(3), y2 in simplex(3), t in 0.0f64..1.0) {
        let g = Game::example1();
        let y: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let f = g.flag_vector(&y);
        let (f1, f2) = (g.flag_vector(&y1), g.flag_vector(&y2));
        for c in 0..f.len() {
            prop_assert!((f[c] - (t * f1[c] + (1.0 - t) * f2[c])).abs() < 1e-12);
        }
        let rows = g.flag_of(&y).unwrap();
        for row in rows.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn preimage_vertices_share_the_flag(y in simplex(3)) {
        let g = Game::example1();
        let f = g.flag_vector(&y);
        let verts = g.preimage_vertices_flat(&f, 1e-9).unwrap();
        prop_assert!(!verts.is_empty());
        for v in &verts {
            let fv = g.flag_vector(v);
            prop_assert!(fv.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }

    #[test]
    fn compatible_payoffs_contain_true_payoff(x in simplex(2), y in simplex(3)) {
        let g = Game::example1();
        let set = compatible_payoffs_flat(&g, &x, &g.flag_vector(&y)).unwrap();
        prop_assert!(set.contains(&g.mixed_payoff(&x, &y).unwrap(), 1e-7));
    }

    #[test]
    fn projection_satisfies_variational_inequality(p in polytope(3), z in prop::collection::vec(-4.0f64..4.0, 3)) {
        let (u, d) = p.project(&z);
        let r: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a - b).collect();
        prop_assert!((dot(&r, &r).sqrt() - d).abs() < 1e-9);
        for q in p.vertices() {
            let s: Vec<f64> = q.iter().zip(&u).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&r, &s) <= 1e-8);
        }
    }

    #[test]
    fn distance_is_one_lipschitz(p in polytope(2), a in prop::collection::vec(-4.0f64..4.0, 2), b in prop::collection::vec(-4.0f64..4.0, 2)) {
        let gap = (p.distance(&a) - p.distance(&b)).abs();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert!(gap <= dot(&ab, &ab).sqrt() + 1e-9);
    }

    #[test]
    fn w2_is_a_metric(mu in measure(2), nu in measure(2), la in measure(2)) {
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| w2_distance(a, b).unwrap();
        prop_assert!(d(&mu, &mu) < 1e-7);
        prop_assert!((d(&mu, &nu) - d(&nu, &mu)).abs() < 1e-9);
        prop_assert!(d(&mu, &la) <= d(&mu, &nu) + d(&nu, &la) + 1e-9);
        prop_assert!(w2(&mu, &nu).unwrap().duality_gap() < 1e-8);
    }

    #[test]
    fn interpolation_is_a_geodesic(mu in measure(2), nu in measure(2), t in 0.0f64..=1.0) {
        let full = w2_distance(&mu, &nu).unwrap();
        let mid = displacement_interpolate(&mu, &nu, t).unwrap();
        prop_assert!((w2_distance(&mu, &mid).unwrap() - t * full).abs() < 1e-7);
        prop_assert!((w2_distance(&mid, &nu).unwrap() - (1.0 - t) * full).abs() < 1e-7);
        // reversing the endpoints reflects the time
        let back = displacement_interpolate(&nu, &mu, 1.0 - t).unwrap();
        prop_assert!(w2_distance(&mid, &back).unwrap() < 1e-7);
    }

    #[test]
    fn lp_duals_close_the_gap(
        a in prop::collection::vec(prop::collection::vec(0.1f64..2.0, 3), 1..=4),
        b in prop::collection::vec(0.5f64..3.0, 4),
        c in prop::collection::vec(0.1f64..2.0, 3),
    ) {
        // min c·x with A x >= b, x >= 0: feasible and bounded for positive data
        let mut lp = LinearProgram::new(3);
        lp.set_objective(&c);
        for (row, rhs) in a.iter().zip(&b) {
            lp.add_dense(row, Relation::Ge, *rhs);
        }
        let sol = lp.minimize().unwrap();
        let yb: f64 = sol.duals.iter().zip(&b).map(|(y, r)| y * r).sum();
        prop_assert!((yb - sol.objective).abs() < 1e-7 * (1.0 + sol.objective.abs()));
        for (k, ck) in c.iter().enumerate() {
            prop_assert!(sol.duals.iter().all(|y| *y >= -1e-9));
            let reduced = ck - a.iter().zip(&sol.duals).map(|(row, y)| row[k] * y).sum::<f64>();
            prop_assert!(reduced >= -1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn full_and_partial_checkers_agree_under_full_monitoring(
        payoffs in prop::collection::vec(prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2), 2),
        a in prop::collection::vec(-1.0f64..1.0, 2),
        b in -0.5f64..0.5,
    ) {
        prop_assume!(dot(&a, &a) > 0.01);
        let g = Game::full_monitoring(payoffs).unwrap();
        let c = Polytope::halfspaces_in_box(&[Halfspace::new(a, b).unwrap()], &[-3.0, -3.0], &[3.0, 3.0]).unwrap();
        let full = convex_approachable_full(&g, &c, 10).unwrap().verdict;
        let partial = convex_approachable_partial(&g, &c, 10).unwrap().verdict;
        if full != Verdict::Undetermined && partial != Verdict::Undetermined {
            prop_assert_eq!(full, partial);
        }
    }
}

#[test]
fn traces_are_deterministic_per_seed() {
    for (mode, game, target, adversary) in [
        (Mode::Full, Some("xor.json"), "xor_target.json", "uniform"),
        (Mode::Partial, Some("example1.json"), "example1_approachable.json", "uniform"),
        (Mode::Informative, Some("xor.json"), "xor_lifted_target.json", "best_response"),
        (Mode::Displacement, None, "diagonal.json", "uniform"),
    ] {
        let mut cfg = RunConfig::new(mode, game.map(fixture), fixture(target));
        cfg.horizon = 60;
        cfg.seed = 11;
        cfg.sampled = true;
        cfg.adversary = adversary.into();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a[0].to_csv(), b[0].to_csv(), "{mode}");
        cfg.seed = 12;
        let c = run(&cfg).unwrap();
        assert_eq!(c[0].len(), 60);
    }
}

#[test]
fn horizon_one_gives_one_row() {
    let mut cfg = RunConfig::new(Mode::Full, Some(fixture("xor.json")), fixture("xor_target.json"));
    cfg.horizon = 1;
    let t = run(&cfg).unwrap();
    assert_eq!(t[0].len(), 1);
    assert_eq!(t[0].column("stage").unwrap(), vec![1.0]);
}

#[test]
fn replicas_use_consecutive_seeds() {
    let mut cfg = RunConfig::new(Mode::Displacement, None, fixture("diagonal.json"));
    cfg.horizon = 20;
    cfg.replicas = 3;
    cfg.seed = 5;
    let traces = run(&cfg).unwrap();
    assert_eq!(traces.len(), 3);
    for (r, t) in traces.iter().enumerate() {
        assert!(t.metadata().iter().any(|(k, v)| k == "seed" && v == &(5 + r).to_string()));
        let mut single = cfg.clone();
        single.replicas = 1;
        single.seed = 5 + r as u64;
        assert_eq!(run(&single).unwrap()[0].rows(), t.rows());
    }
}
