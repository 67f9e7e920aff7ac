//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line to stderr
//! (unbuffered, so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::path::PathBuf;

use approach_core::approach_full::b_set_response;
use approach_core::approach_partial::{
    convex_approachable_partial, flag_estimator, BlockConfig, BlockStrategy, FixedInner, Observation,
};
use approach_core::condition::Verdict;
use approach_core::convex::{Halfspace, Polytope, TargetSet};
use approach_core::displacement::{gradient_normal_inner, DisplacementTarget};
use approach_core::game::Game;
use approach_core::harness::fit::{fit_rate, RateFit};
use approach_core::harness::rng::{stream, Role};
use approach_core::harness::sim::{simulate_displacement_with, simulate_full, simulate_informative, Adversary, SimOptions};
use approach_core::harness::{run, Mode, RunConfig};
use approach_core::informative::{compatible_lipschitz, image_excess, smooth, theorem3_check, MeasureTarget, ProductGrid};
use approach_core::transport::{w2, DiscreteMeasure};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated; their test asserts the failure is
/// the predicted one instead of asserting a pass.
const EXPECTED_FAIL: &[u32] = &[9];

fn report(n: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} criterion {n}: {detail}");
    if !EXPECTED_FAIL.contains(&n) {
        assert!(pass, "criterion {n} failed: {detail}");
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn unit_vector(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 0.1 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

fn boxed(hs: &[Halfspace], k: usize, half: f64) -> Polytope {
    Polytope::halfspaces_in_box(hs, &vec![-half; k], &vec![half; k]).unwrap()
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_displacement_rate() {
    let start = std::time::Instant::now();
    let target_path = fixture("diagonal.json");
    let text = std::fs::read_to_string(&target_path).unwrap();
    let spec = approach_core::harness::DisplacementSpec::from_json(&text).unwrap();
    let diam = spec.build().unwrap().ambient_diameter();
    let mut worst_ratio = 0.0f64;
    let mut worst_slope = f64::NEG_INFINITY;
    let mut runs = 0;
    for adversary in ["uniform", "stationary:1", "best_response"] {
        let mut cfg = RunConfig::new(Mode::Displacement, None, target_path.clone());
        cfg.horizon = 10_000;
        cfg.replicas = 20;
        cfg.adversary = adversary.into();
        for trace in run(&cfg).unwrap() {
            runs += 1;
            assert_eq!(trace.len(), 10_000);
            for (i, d) in trace.distances().iter().enumerate() {
                assert!(*d >= 0.0);
                let n = i + 1;
                if n >= 10 {
                    worst_ratio = worst_ratio.max(d * (n as f64).sqrt() / diam);
                }
            }
            match fit_rate(trace.distances(), 10).unwrap() {
                RateFit::Fit { slope, .. } => worst_slope = worst_slope.max(slope),
                RateFit::ConvergedExactly => worst_slope = worst_slope.max(f64::NEG_INFINITY),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_ratio <= 1.0 && worst_slope <= -0.45 && secs <= 60.0;
    report(
        1,
        pass,
        &format!("{runs} runs, max √n·W₂/diam = {worst_ratio:.4}, max slope = {worst_slope:.4}, {secs:.1}s"),
    );
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_2_blackwell_full_monitoring() {
    let game = Game::from_file(fixture("xor.json")).unwrap();
    let target = TargetSet::from_json(&std::fs::read_to_string(fixture("xor_target.json")).unwrap()).unwrap();
    let k = game.payoff_diameter();
    let mut worst = 0.0f64;
    let mut runs = 0;
    for adv in ["uniform", "best_response", "stationary:0.5,0.5", "stationary:1,0"] {
        let adv = Adversary::parse(adv).unwrap();
        for seed in 0..5 {
            let trace = simulate_full(&game, &target, &adv, &SimOptions::new(10_000, seed)).unwrap();
            runs += 1;
            for (i, d) in trace.distances().iter().enumerate().skip(9) {
                worst = worst.max(d * ((i + 1) as f64).sqrt() / k);
            }
        }
    }
    // the response certificate itself is a B-set witness at an outside point
    let cert = b_set_response(&game, &target, &[0.4]).unwrap();
    report(
        2,
        worst <= 1.0 && cert.slack <= 1e-12,
        &format!("{runs} runs, K = {k}, max √n·d/K = {worst:.4}, slack at 0.4 = {:.2e}", cert.slack),
    );
}

// ---------------------------------------------------------------- 3

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn criterion_3_ot_matches_permutation_oracle() {
    let mut r = rng(3);
    let mut worst_err = 0.0f64;
    let mut worst_gap = 0.0f64;
    for inst in 0..200 {
        let n = 2 + inst % 4;
        let dim = 1 + (inst / 4) % 3;
        let pts = |r: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..n).map(|_| (0..dim).map(|_| r.random_range(-2.0..2.0)).collect()).collect()
        };
        let (a, b) = (pts(&mut r), pts(&mut r));
        let mu = DiscreteMeasure::uniform(a.clone()).unwrap();
        let nu = DiscreteMeasure::uniform(b.clone()).unwrap();
        let sol = w2(&mu, &nu).unwrap();
        let best = permutations(n)
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| a[i].iter().zip(&b[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .sum::<f64>()
                    / n as f64
            })
            .fold(f64::INFINITY, f64::min);
        worst_err = worst_err.max((sol.squared_cost - best).abs());
        worst_gap = worst_gap.max(sol.duality_gap());
    }
    report(
        3,
        worst_err <= 1e-9 && worst_gap <= 1e-8,
        &format!("200 instances, max |cost - oracle| = {worst_err:.2e}, max duality gap = {worst_gap:.2e}"),
    );
}

// ---------------------------------------------------------------- 4

/// Points of `{y ∈ Δ(J) : s(y) = ξ}` that include all its vertices, for
/// `J ≤ 3`: matching pure actions, edge crossings, and the unique interior
/// solution when the flag map is injective.
fn fiber_points(flags: &[Vec<f64>], xi: &[f64]) -> Vec<Vec<f64>> {
    let nj = flags.len();
    let close = |v: &[f64]| v.iter().zip(xi).all(|(a, b)| (a - b).abs() <= 1e-9);
    let mut out = Vec::new();
    for j in 0..nj {
        if close(&flags[j]) {
            let mut y = vec![0.0; nj];
            y[j] = 1.0;
            out.push(y);
        }
    }
    for j in 0..nj {
        for k in j + 1..nj {
            let d: Vec<f64> = flags[j].iter().zip(&flags[k]).map(|(a, b)| a - b).collect();
            let dd: f64 = d.iter().map(|v| v * v).sum();
            if dd < 1e-18 {
                continue;
            }
            let t = xi.iter().zip(&flags[k]).zip(&d).map(|((x, s), dv)| (x - s) * dv).sum::<f64>() / dd;
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                continue;
            }
            let p: Vec<f64> = flags[k].iter().zip(&d).map(|(s, dv)| s + t * dv).collect();
            if close(&p) {
                let mut y = vec![0.0; nj];
                y[j] = t.clamp(0.0, 1.0);
                y[k] = 1.0 - y[j];
                out.push(y);
            }
        }
    }
    if nj == 3 {
        // y = (a, b, 1 - a - b): normal equations of the 2-parameter fit
        let u: Vec<f64> = flags[0].iter().zip(&flags[2]).map(|(p, q)| p - q).collect();
        let v: Vec<f64> = flags[1].iter().zip(&flags[2]).map(|(p, q)| p - q).collect();
        let w: Vec<f64> = xi.iter().zip(&flags[2]).map(|(p, q)| p - q).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (uu, uv, vv, uw, vw) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&u, &w), dot(&v, &w));
        let det = uu * vv - uv * uv;
        if det.abs() > 1e-12 {
            let a = (uw * vv - vw * uv) / det;
            let b = (vw * uu - uw * uv) / det;
            let y = vec![a, b, 1.0 - a - b];
            let s: Vec<f64> = (0..xi.len()).map(|c| a * u[c] + b * v[c] + flags[2][c]).collect();
            if y.iter().all(|v| *v >= -1e-12) && close(&s) {
                out.push(y.into_iter().map(|v| v.max(0.0)).collect());
            }
        }
    }
    out
}

fn grid_points(parts: usize, step_inv: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(parts - 1, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, step_inv, &mut Vec::new(), &mut out);
    out.into_iter().map(|c| c.into_iter().map(|v| v as f64 / step_inv as f64).collect()).collect()
}

enum Oracle {
    Yes,
    No,
    Unclear,
}

/// Brute force: `max_ξ min_x max_{y' ∈ fiber(ξ), l} (<a_l, ρ(x, y')> - b_l) / |a_l|`
/// with `x` on the 0.01 grid and `ξ` the flags of a 0.05 grid over `Δ(J)`.
fn brute_force(payoffs: &[Vec<Vec<f64>>], law: &[Vec<Vec<f64>>], hs: &[(Vec<f64>, f64)]) -> Oracle {
    let (ni, nj) = (payoffs.len(), payoffs[0].len());
    let flag = |y: &[f64]| -> Vec<f64> {
        let mut f = Vec::new();
        for row in law {
            let ns = row[0].len();
            for s in 0..ns {
                f.push((0..nj).map(|j| y[j] * row[j][s]).sum());
            }
        }
        f
    };
    let pure_flags: Vec<Vec<f64>> = (0..nj)
        .map(|j| {
            let mut y = vec![0.0; nj];
            y[j] = 1.0;
            flag(&y)
        })
        .collect();
    let xs = grid_points(ni, 100);
    let mut value = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    for y in grid_points(nj, 20) {
        let fiber = fiber_points(&pure_flags, &flag(&y));
        assert!(!fiber.is_empty(), "fiber of a realised flag is nonempty");
        // h[(fiber, l)][i] = (<a_l, ρ(i, y')> - b_l) / |a_l|
        let mut h: Vec<Vec<f64>> = Vec::new();
        for yp in &fiber {
            for (a, b) in hs {
                let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                let row: Vec<f64> = (0..ni)
                    .map(|i| {
                        let p: Vec<f64> = (0..a.len()).map(|c| (0..nj).map(|j| yp[j] * payoffs[i][j][c]).sum()).collect();
                        (a.iter().zip(&p).map(|(u, v)| u * v).sum::<f64>() - b) / na
                    })
                    .collect();
                let spread = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - row.iter().cloned().fold(f64::INFINITY, f64::min);
                scale = scale.max(spread);
                h.push(row);
            }
        }
        let best = xs
            .iter()
            .map(|x| h.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        value = value.max(best);
    }
    // moving x by one grid step changes each affine piece by at most this
    let x_err = scale * 0.01 * ni as f64;
    if value <= 1e-9 {
        Oracle::Yes
    } else if value > x_err {
        Oracle::No
    } else {
        Oracle::Unclear
    }
}

#[test]
fn criterion_4_condition_checker_vs_brute_force() {
    let mut r = rng(4);
    let (mut agree, mut disagree, mut band, mut unclear) = (0, 0, 0, 0);
    let (mut yes, mut no) = (0, 0);
    let mut notes = Vec::new();
    for inst in 0..100 {
        let ni = r.random_range(1..=3);
        let nj = r.random_range(1..=3);
        let k = r.random_range(1..=2);
        let ns = r.random_range(1..=2);
        let payoffs: Vec<Vec<Vec<f64>>> =
            (0..ni).map(|_| (0..nj).map(|_| (0..k).map(|_| r.random_range(-1.0..1.0)).collect()).collect()).collect();
        let stochastic = r.random_bool(0.5);
        let law: Vec<Vec<Vec<f64>>> = (0..ni)
            .map(|_| {
                (0..nj)
                    .map(|_| {
                        if stochastic {
                            uniform_simplex(&mut r, ns)
                        } else {
                            let mut w = vec![0.0; ns];
                            w[r.random_range(0..ns)] = 1.0;
                            w
                        }
                    })
                    .collect()
            })
            .collect();
        let labels = (0..ns).map(|s| format!("s{s}")).collect();
        let game = Game::new(payoffs.clone(), labels, law.clone()).unwrap();
        let mut hs: Vec<(Vec<f64>, f64)> = (0..r.random_range(1..=2))
            .map(|_| (unit_vector(&mut r, k), r.random_range(-0.6..0.6)))
            .collect();
        let half = 3.0;
        for c in 0..k {
            let mut e = vec![0.0; k];
            e[c] = 1.0;
            hs.push((e.clone(), half));
            e[c] = -1.0;
            hs.push((e, half));
        }
        let extra: Vec<Halfspace> = hs[..hs.len() - 2 * k].iter().map(|(a, b)| Halfspace::new(a.clone(), *b).unwrap()).collect();
        let c = match Polytope::halfspaces_in_box(&extra, &vec![-half; k], &vec![half; k]) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let rep = convex_approachable_partial(&game, &c, 20).unwrap();
        let oracle = brute_force(&payoffs, &law, &hs);
        match (&rep.verdict, oracle) {
            (Verdict::Undetermined, _) => band += 1,
            (_, Oracle::Unclear) => unclear += 1,
            (Verdict::Approachable, Oracle::Yes) => {
                agree += 1;
                yes += 1
            }
            (Verdict::NotApproachable, Oracle::No) => {
                agree += 1;
                no += 1
            }
            (v, _) => {
                disagree += 1;
                notes.push(format!("instance {inst}: checker {v:?}, max margin {:.3e}", rep.max_margin));
            }
        }
    }
    let total = agree + disagree + band + unclear;
    let pass = disagree == 0 && (band as f64) < 0.05 * total as f64;
    report(
        4,
        pass,
        &format!(
            "{total} instances: {agree} agree ({yes} approachable, {no} not), {disagree} disagree, {band} in band, {unclear} oracle-unresolved {notes:?}"
        ),
    );
}

// ---------------------------------------------------------------- 5

fn random_det_game(r: &mut ChaCha8Rng) -> Game {
    let (ni, nj) = (2, 3);
    let payoffs: Vec<Vec<Vec<f64>>> =
        (0..ni).map(|_| (0..nj).map(|_| (0..2).map(|_| r.random_range(-1.0..1.0)).collect()).collect()).collect();
    let law = (0..ni)
        .map(|_| {
            (0..nj)
                .map(|_| {
                    let mut w = vec![0.0; 2];
                    w[r.random_range(0..2)] = 1.0;
                    w
                })
                .collect()
        })
        .collect();
    Game::new(payoffs, vec!["a".into(), "b".into()], law).unwrap()
}

#[test]
fn criterion_5_image_excess_bound() {
    let mut r = rng(5);
    let mut games = vec![Game::example1()];
    games.extend((0..4).map(|_| random_det_game(&mut r)));
    let setups: Vec<(Game, ProductGrid, f64)> = games
        .into_iter()
        .map(|g| {
            let grid = ProductGrid::for_game(&g, 5, 5).unwrap();
            let l = compatible_lipschitz(&g, &grid).unwrap();
            (g, grid, l)
        })
        .collect();
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut done = 0;
    while done < 500 {
        let (game, grid, l) = &setups[done % setups.len()];
        // a halfspace target through a random atom's image keeps ρ⁻¹(C) nonempty
        let anchor = r.random_range(0..grid.len());
        let img = approach_core::informative::rho_image(game, &DiscreteMeasure::dirac(grid.atoms()[anchor].clone())).unwrap();
        let a = unit_vector(&mut r, 2);
        let top = img.vertices().iter().map(|v| a[0] * v[0] + a[1] * v[1]).fold(f64::NEG_INFINITY, f64::max);
        let c = boxed(&[Halfspace::new(a, top + r.random_range(0.0..0.5)).unwrap()], 2, 10.0);
        let target = MeasureTarget::rho_preimage(game, grid.clone(), &c).unwrap();
        let mut w = vec![0.0; grid.len()];
        let mut idx: Vec<usize> = (0..grid.len()).collect();
        idx.shuffle(&mut r);
        let support = &idx[..r.random_range(1..=6)];
        let mass = uniform_simplex(&mut r, support.len());
        for (i, m) in support.iter().zip(mass) {
            w[*i] = m;
        }
        let theta = grid.measure(w).unwrap();
        let (proj, sol) = target.project(&theta).unwrap();
        let dist = sol.squared_cost.max(0.0).sqrt();
        let excess = image_excess(game, &theta, &proj).unwrap();
        let bound = (2.0f64).sqrt() * l * dist + 1e-6;
        worst = worst.max(excess - bound);
        if excess > bound {
            violations += 1;
        }
        done += 1;
    }
    report(5, violations == 0, &format!("500 pairs, {violations} violations, max(excess - bound) = {worst:.3e}"));
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_lifted_check_matches_condition() {
    let game = Game::example1();
    let grid = ProductGrid::for_game(&game, 10, 2).unwrap();
    let mut r = rng(6);
    let (mut same, mut yes, mut no) = (0, 0, 0);
    let mut min_ratio = f64::INFINITY;
    let mut notes = Vec::new();
    for t in 0..10 {
        let a = unit_vector(&mut r, 2);
        let b = a[0] * 1.5 - a[1] * 2.0 + r.random_range(-1.5..1.5);
        let c = boxed(&[Halfspace::new(a, b).unwrap()], 2, 10.0);
        let partial = convex_approachable_partial(&game, &c, 10).unwrap();
        let target = match MeasureTarget::rho_preimage(&game, grid.clone(), &c) {
            Ok(t) => t,
            Err(_) => {
                // an empty preimage is never approachable
                if partial.verdict == Verdict::NotApproachable {
                    same += 1;
                    no += 1;
                } else {
                    notes.push(format!("target {t}: empty preimage, checker {:?}", partial.verdict));
                }
                continue;
            }
        };
        let th3 = theorem3_check(&target).unwrap();
        let agree = match partial.verdict {
            Verdict::Approachable => th3.approachable,
            Verdict::NotApproachable => !th3.approachable,
            Verdict::Undetermined => false,
        };
        if !agree {
            notes.push(format!("target {t}: checker {:?}, lifted {}", partial.verdict, th3.approachable));
            continue;
        }
        same += 1;
        if th3.approachable {
            yes += 1;
            continue;
        }
        no += 1;
        let delta = th3.delta.unwrap();
        let xi = grid.xis()[th3.witness.unwrap()].clone();
        let trace = simulate_informative(&game, &target, &Adversary::Stationary(xi), &SimOptions::new(150, t)).unwrap();
        for d in &trace.distances()[99..] {
            min_ratio = min_ratio.min(d / delta);
        }
    }
    let pass = same == 10 && min_ratio >= 0.5;
    report(
        6,
        pass,
        &format!("{same}/10 verdicts agree ({yes} yes, {no} no), min W₂/δ over n ≥ 100 = {min_ratio:.4} {notes:?}"),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_7_dirac_induction() {
    let target = DisplacementTarget::in_unit_boxes(1, 1, Polytope::from_vertices(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()).unwrap();
    let wide = DisplacementTarget::in_unit_boxes(2, 1, boxed(&[Halfspace::new(vec![1.0, 1.0, -1.0], 0.5).unwrap()], 3, 1.0)).unwrap();
    let mut worst = 0.0f64;
    let mut non_dirac = 0;
    let mut stages = 0;
    for (t, adv) in [(&target, "uniform"), (&target, "best_response"), (&wide, "uniform"), (&wide, "best_response")] {
        let adv = Adversary::parse(adv).unwrap();
        let mut sx = vec![0.0; t.x_dim()];
        let mut sy = vec![0.0; t.y_space().dim()];
        simulate_displacement_with(t, &adv, &SimOptions::new(10_000, 7), |state, x, y| {
            stages += 1;
            sx.iter_mut().zip(x).for_each(|(a, b)| *a += b);
            sy.iter_mut().zip(y).for_each(|(a, b)| *a += b);
            let n = state.stage() as f64;
            let th = state.theta_hat();
            if th.len() != 1 || (th.weights()[0] - 1.0).abs() > 1e-12 {
                non_dirac += 1;
                return;
            }
            let exact: Vec<f64> = sx.iter().chain(&sy).map(|s| s / n).collect();
            for (a, b) in th.atoms()[0].iter().zip(&exact) {
                worst = worst.max((a - b).abs());
            }
        })
        .unwrap();
    }
    report(
        7,
        non_dirac == 0 && worst <= 1e-10,
        &format!("{stages} stages, {non_dirac} non-Dirac states, max |θ̂ atom - running mean| = {worst:.2e}"),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_gradient_normal_sign() {
    let mut r = rng(8);
    let mut worst = f64::NEG_INFINITY;
    let mut done = 0;
    while done < 1000 {
        let (dx, dy) = (r.random_range(1..=2), r.random_range(1..=2));
        let dim = dx + dy;
        let pts: Vec<Vec<f64>> = (0..r.random_range(1..=6)).map(|_| (0..dim).map(|_| r.random::<f64>()).collect()).collect();
        let Ok(d) = Polytope::from_vertices(&pts) else { continue };
        let outside: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..2.0)).collect();
        let (u, dist) = d.project(&outside);
        if dist <= 1e-9 {
            continue;
        }
        let lam = uniform_simplex(&mut r, d.vertices().len());
        let mut inner = vec![0.0; dim];
        for (l, v) in lam.iter().zip(d.vertices()) {
            inner.iter_mut().zip(v).for_each(|(a, b)| *a += l * b);
        }
        let pbar: Vec<f64> = u.iter().zip(&outside).map(|(a, b)| a - b).collect();
        let g = gradient_normal_inner(&DiscreteMeasure::dirac(u.clone()), &[pbar], &inner[..dx], &inner[dx..]).unwrap();
        worst = worst.max(g);
        done += 1;
    }
    report(8, worst <= 1e-9, &format!("1000 triples, max inner product = {worst:.3e}"));
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_9_flag_estimator() {
    let game = Game::example1();
    let y = [0.5, 0.0, 0.5];
    let truth = game.flag_vector(&y);
    let config = BlockConfig { block_length: 1000, eta: 0.1, doubling: false };
    let mut good = 0;
    let mut explored_per_action = 0.0;
    for seed in 0..200u64 {
        let mut strat = BlockStrategy::new(&game, config, FixedInner::new(vec![0.5, 0.5])).unwrap();
        let mut obs = Vec::new();
        for n in 1..=1000u64 {
            let (i, explored) = strat.step(&mut stream(seed, n, Role::Player)).unwrap();
            let mut ar = stream(seed, n, Role::Adversary);
            let j = if ar.random::<f64>() < 0.5 { 0 } else { 2 };
            let signal = game.signal_law(i, j).iter().position(|p| *p == 1.0).unwrap();
            obs.push(Observation { action: i, signal, explored });
        }
        explored_per_action += obs.iter().filter(|o| o.explored).count() as f64 / 2.0;
        if let Ok(est) = flag_estimator(&obs, &game) {
            let err = est.flatten().iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if err <= 0.05 {
                good += 1;
            }
        }
    }
    explored_per_action /= 200.0;
    // deterministic signals: exact whenever all actions were explored
    let mut exact = true;
    for (seed, j) in (0..60u64).zip([0usize, 1, 2].iter().cycle()) {
        let mut strat = BlockStrategy::new(&game, BlockConfig { block_length: 200, eta: 0.3, doubling: false }, FixedInner::new(vec![1.0, 0.0])).unwrap();
        let mut obs = Vec::new();
        for n in 1..=200u64 {
            let (i, explored) = strat.step(&mut stream(seed, n, Role::Player)).unwrap();
            let signal = game.signal_law(i, *j).iter().position(|p| *p == 1.0).unwrap();
            obs.push(Observation { action: i, signal, explored });
        }
        if let Ok(est) = flag_estimator(&obs, &game) {
            let mut pure = vec![0.0; 3];
            pure[*j] = 1.0;
            exact &= est.flatten() == game.flag_vector(&pure);
        }
    }
    let freq = good as f64 / 200.0;
    let pass = freq >= 0.95 && exact;
    // With m exploration samples per action the per-row error of a fair
    // binary signal has standard deviation 0.5/√m. Predicted pass rate for
    // both rows at m = 50: P(|Bin(50, ½)/50 - ½| ≤ 0.05)² ≈ 0.28.
    let sd = 0.5 / explored_per_action.sqrt();
    report(
        9,
        pass,
        &format!(
            "{good}/200 seeds within 0.05 (freq {freq:.3}), {explored_per_action:.1} exploration samples per action (sd {sd:.3}), deterministic exactness {exact}"
        ),
    );
    assert!(exact, "deterministic-signal exactness must hold");
    if EXPECTED_FAIL.contains(&9) {
        assert!(!pass && (0.1..0.5).contains(&freq), "pass rate {freq} outside the predicted range");
    }
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_smoothing_contract() {
    let mut r = rng(10);
    let mut worst = f64::NEG_INFINITY;
    let mut not_full = 0;
    for _ in 0..500 {
        let n = r.random_range(2..=20);
        let dim = r.random_range(1..=3);
        let atoms: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let mut w = vec![0.0; n];
        let support = r.random_range(1..=n);
        let mass = uniform_simplex(&mut r, support);
        for (i, m) in mass.into_iter().enumerate() {
            w[i] = m;
        }
        let theta = DiscreteMeasure::new(atoms, w).unwrap();
        let eps = 10f64.powf(r.random_range(-4.0..0.0));
        let (s, _) = smooth(&theta, eps).unwrap();
        if s.len() != theta.len() || s.weights().iter().any(|w| *w <= 0.0) {
            not_full += 1;
        }
        worst = worst.max(w2(&theta, &s).unwrap().squared_cost - eps);
    }
    report(
        10,
        not_full == 0 && worst <= 0.0,
        &format!("500 measures, {not_full} without full support, max(W₂² - ε) = {worst:.3e}"),
    );
}
