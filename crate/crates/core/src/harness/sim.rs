//! Simulation loops, one per mode. Each loop is deterministic given the
//! options' seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rng::{stream, Role};
use super::trace::{fmt_f, fmt_vec, Trace};
use crate::approach_full::b_set_response;
use crate::approach_partial::{sample_index, BlockConfig, BlockEnd, BlockStrategy, Observation};
use crate::convex::{Polytope, TargetSet};
use crate::displacement::{hat_b_response, hat_update, DisplacementTarget, HatState};
use crate::error::{invalid, Result};
use crate::game::{Game, MixedAction};
use crate::informative::{MeasureTarget, ProductGrid, TildeStrategy};
use crate::linalg;
use crate::simplex_grid::SimplexGrid;

/// Player 2's behaviour. Vectors are mixed actions over J in the full and
/// partial modes, mixed actions over J or flattened flags in the
/// informative mode, and points of Χ in the displacement mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Adversary {
    Stationary(Vec<f64>),
    /// A uniformly random pure action (or grid flag, or point of Χ) each
    /// stage.
    Uniform,
    /// Greedy one-step maximiser of the next distance to the target over
    /// pure actions and a coarse grid.
    BestResponse,
    /// Replays the listed moves cyclically.
    Replay(Vec<Vec<f64>>),
}

impl Adversary {
    /// Parses `stationary:<v1,v2,...>`, `uniform`, `best_response` or
    /// `replay:<file>` (one comma-separated move per line).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "uniform" {
            return Ok(Adversary::Uniform);
        }
        if spec == "best_response" {
            return Ok(Adversary::BestResponse);
        }
        if let Some(v) = spec.strip_prefix("stationary:") {
            return Ok(Adversary::Stationary(parse_vector(v)?));
        }
        if let Some(path) = spec.strip_prefix("replay:") {
            let text = std::fs::read_to_string(path)?;
            let moves: Vec<Vec<f64>> = text
                .lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .map(parse_vector)
                .collect::<Result<_>>()?;
            if moves.is_empty() {
                return Err(invalid("replay file has no moves"));
            }
            return Ok(Adversary::Replay(moves));
        }
        Err(invalid(format!("unknown adversary '{spec}'")))
    }

    fn fixed_move(&self, stage: usize) -> Option<&[f64]> {
        match self {
            Adversary::Stationary(v) => Some(v),
            Adversary::Replay(m) => Some(&m[(stage - 1) % m.len()]),
            _ => None,
        }
    }
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split([',', ';', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("'{t}' is not a number"))))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub horizon: usize,
    pub seed: u64,
    /// Draw realized actions instead of using expected payoffs.
    pub sampled: bool,
    /// Smoothing parameter of the lifted-game strategy.
    pub epsilon: f64,
}

impl SimOptions {
    pub fn new(horizon: usize, seed: u64) -> Self {
        SimOptions { horizon, seed, sampled: false, epsilon: 1e-2 }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        Ok(())
    }
}

fn mixed_over_j(v: &[f64], nj: usize) -> Result<Vec<f64>> {
    if v.len() != nj {
        return Err(invalid(format!("adversary move has {} entries, game has {} actions", v.len(), nj)));
    }
    Ok(MixedAction::new(v.to_vec())?.into_weights())
}

/// Pure actions followed by a density-4 grid of the simplex.
fn candidate_mixed_actions(nj: usize) -> Vec<Vec<f64>> {
    let mut c: Vec<Vec<f64>> = (0..nj).map(|j| MixedAction::pure(nj, j).into_weights()).collect();
    c.extend(SimplexGrid::new(nj, 4).points());
    c
}

fn argmax_by(cands: &[Vec<f64>], score: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut best = 0;
    let mut best_s = f64::NEG_INFINITY;
    for (i, c) in cands.iter().enumerate() {
        let s = score(c);
        if s > best_s + 1e-15 {
            best = i;
            best_s = s;
        }
    }
    cands[best].clone()
}

fn opponent_mixed(adv: &Adversary, stage: usize, nj: usize, rng: &mut ChaCha8Rng, score: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    match adv {
        Adversary::Stationary(_) | Adversary::Replay(_) => mixed_over_j(adv.fixed_move(stage).expect("fixed"), nj),
        Adversary::Uniform => Ok(MixedAction::pure(nj, rng.random_range(0..nj)).into_weights()),
        Adversary::BestResponse => Ok(argmax_by(&candidate_mixed_actions(nj), score)),
    }
}

/// Blackwell's strategy under full monitoring.
/// Columns: stage, distance, slack, action_p1, action_p2, seed.
pub fn simulate_full(game: &Game, target: &TargetSet, adv: &Adversary, opts: &SimOptions) -> Result<Trace> {
    opts.validate()?;
    if target.dim() != game.payoff_dim() {
        return Err(invalid("target dimension differs from the payoff dimension"));
    }
    let nj = game.num_actions_p2();
    let k = game.payoff_dim();
    let mut trace = Trace::new(&["stage", "distance", "slack", "action_p1", "action_p2", "seed"]);
    let mut sum = vec![0.0; k];
    for n in 1..=opts.horizon {
        let nf = n as f64;
        let z = if n == 1 { game.payoff(0, 0).to_vec() } else { linalg::scale(&sum, 1.0 / (nf - 1.0)) };
        let cert = b_set_response(game, target, &z)?;
        let x = cert.x_star.weights();
        let mut arng = stream(opts.seed, n as u64, Role::Adversary);
        let y = opponent_mixed(adv, n, nj, &mut arng, |y| {
            let p = game.mixed_payoff(x, y).expect("dimensions checked");
            target.distance(&linalg::scale(&linalg::add(&sum, &p), 1.0 / nf))
        })?;
        let (payoff, a1, a2) = if opts.sampled {
            let i = sample_index(x, stream(opts.seed, n as u64, Role::Player).random());
            let j = sample_index(&y, arng.random());
            (game.payoff(i, j).to_vec(), i.to_string(), j.to_string())
        } else {
            (game.mixed_payoff(x, &y)?, fmt_vec(x), fmt_vec(&y))
        };
        linalg::axpy(&mut sum, 1.0, &payoff);
        let d = target.distance(&linalg::scale(&sum, 1.0 / nf));
        trace.push(vec![n.to_string(), fmt_f(d), fmt_f(cert.slack), a1, a2, opts.seed.to_string()], d);
    }
    Ok(trace)
}

/// Block strategy with the lifted-game strategy inside, targeting `c`.
/// Columns: stage, distance, block, explored, action_p1, action_p2, signal,
/// seed.
pub fn simulate_partial(
    game: &Game,
    c: &Polytope,
    grid_density: usize,
    block: BlockConfig,
    adv: &Adversary,
    opts: &SimOptions,
) -> Result<Trace> {
    opts.validate()?;
    let grid = ProductGrid::for_game(game, grid_density, grid_density)?;
    let target = MeasureTarget::rho_preimage(game, grid, c)?;
    let inner = TildeStrategy::new(target, opts.epsilon)?;
    let mut strat = BlockStrategy::new(game, block, inner)?;
    let ni = game.num_actions_p1();
    let nj = game.num_actions_p2();
    let uniform_i = MixedAction::uniform(ni).into_weights();
    let mut trace =
        Trace::new(&["stage", "distance", "block", "explored", "action_p1", "action_p2", "signal", "seed"]);
    let mut sum = vec![0.0; game.payoff_dim()];
    for n in 1..=opts.horizon {
        let nf = n as f64;
        let mut prng = stream(opts.seed, n as u64, Role::Player);
        let (i, explored) = strat.step(&mut prng)?;
        let played = strat.current_mixed().unwrap_or_else(|| uniform_i.clone());
        let mut arng = stream(opts.seed, n as u64, Role::Adversary);
        let y = opponent_mixed(adv, n, nj, &mut arng, |y| {
            let p = game.mixed_payoff(&played, y).expect("dimensions checked");
            c.distance(&linalg::scale(&linalg::add(&sum, &p), 1.0 / nf))
        })?;
        let mut srng = stream(opts.seed, n as u64, Role::Signal);
        let (payoff, law, a2) = if opts.sampled {
            let j = sample_index(&y, arng.random());
            (game.payoff(i, j).to_vec(), game.signal_law(i, j).to_vec(), j.to_string())
        } else {
            let law = (0..nj).fold(vec![0.0; game.num_signals()], |mut acc, j| {
                linalg::axpy(&mut acc, y[j], game.signal_law(i, j));
                acc
            });
            (game.payoff_of_pure(i, &y), law, fmt_vec(&y))
        };
        let signal = sample_index(&law, srng.random());
        linalg::axpy(&mut sum, 1.0, &payoff);
        let d = c.distance(&linalg::scale(&sum, 1.0 / nf));
        let block_no = strat.blocks_done();
        if let Some(BlockEnd::Skipped { action }) = strat.observe(Observation { action: i, signal, explored })? {
            trace.add_metadata(&format!("block {block_no}"), format!("skipped, action {action} unexplored"));
        }
        trace.push(
            vec![
                n.to_string(),
                fmt_f(d),
                block_no.to_string(),
                u8::from(explored).to_string(),
                i.to_string(),
                a2,
                signal.to_string(),
                opts.seed.to_string(),
            ],
            d,
        );
    }
    Ok(trace)
}

/// The projection-and-potential strategy of the lifted game.
/// Columns: stage, W2_to_target, slack, projection_cost, seed.
pub fn simulate_informative(game: &Game, target: &MeasureTarget, adv: &Adversary, opts: &SimOptions) -> Result<Trace> {
    opts.validate()?;
    let grid = target.grid().clone();
    let nj = game.num_actions_p2();
    let mut strat = TildeStrategy::new(target.clone(), opts.epsilon)?;
    let mut trace = Trace::new(&["stage", "W2_to_target", "slack", "projection_cost", "seed"]);
    let to_flag = |v: &[f64]| -> Result<usize> {
        let flag = if v.len() == nj {
            game.flag_vector(&mixed_over_j(v, nj)?)
        } else if v.len() == game.flag_dim() {
            v.to_vec()
        } else {
            return Err(invalid("adversary move is neither a mixed action nor a flag"));
        };
        Ok(grid.nearest_xi(&flag))
    };
    for n in 1..=opts.horizon {
        let r = strat.respond()?.clone();
        let mut arng = stream(opts.seed, n as u64, Role::Adversary);
        let c = match adv {
            Adversary::Stationary(_) | Adversary::Replay(_) => to_flag(adv.fixed_move(n).expect("fixed"))?,
            Adversary::Uniform => arng.random_range(0..grid.xis().len()),
            Adversary::BestResponse => {
                let base = strat.state().weights();
                let nf = n as f64;
                let mut best = (0, f64::NEG_INFINITY);
                for c in 0..grid.xis().len() {
                    let step = grid.product_with_column(&r.x, c);
                    let w: Vec<f64> = base.iter().zip(&step).map(|(b, s)| (b * (nf - 1.0) + s) / nf).collect();
                    let d = target.distance(&grid.measure(w)?)?;
                    if d > best.1 + 1e-15 {
                        best = (c, d);
                    }
                }
                best.0
            }
        };
        strat.record(c)?;
        let d = target.distance(&strat.state().theta_bar()?)?;
        trace.push(
            vec![n.to_string(), fmt_f(d), fmt_f(r.slack), fmt_f(r.projection_cost), opts.seed.to_string()],
            d,
        );
    }
    Ok(trace)
}

fn uniform_point(space: &Polytope, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let vs = space.vertices();
    let dim = space.dim();
    let lo: Vec<f64> = (0..dim).map(|k| vs.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..dim).map(|k| vs.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    for _ in 0..1000 {
        let p: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
        if space.max_violation(&p) <= 0.0 {
            return p;
        }
    }
    vs[0].clone()
}

/// Displacement-game strategy with a per-stage observer receiving the
/// state and the stage's moves.
pub fn simulate_displacement_with(
    target: &DisplacementTarget,
    adv: &Adversary,
    opts: &SimOptions,
    mut observe: impl FnMut(&HatState, &[f64], &[f64]),
) -> Result<Trace> {
    opts.validate()?;
    let dy = target.y_space().dim();
    let mut trace = Trace::new(&["stage", "hat_w2", "slack", "projection_cost", "seed"]);
    let mut cands: Vec<Vec<f64>> = target.y_space().vertices().to_vec();
    cands.extend(SimplexGrid::new(cands.len(), 4).points().iter().map(|l| {
        let mut y = vec![0.0; dy];
        for (w, v) in l.iter().zip(target.y_space().vertices()) {
            linalg::axpy(&mut y, *w, v);
        }
        y
    }));
    let mut state: Option<HatState> = None;
    for n in 1..=opts.horizon {
        let (x, slack, cost) = match &state {
            None => (target.x_space().vertices()[0].clone(), 0.0, 0.0),
            Some(s) => {
                let r = hat_b_response(s, target)?;
                (r.x, r.slack, r.distance * r.distance)
            }
        };
        let mut arng = stream(opts.seed, n as u64, Role::Adversary);
        let y = match adv {
            Adversary::Stationary(_) | Adversary::Replay(_) => {
                let v = adv.fixed_move(n).expect("fixed");
                if v.len() != dy || target.y_space().max_violation(v) > 1e-9 {
                    return Err(invalid("adversary move is not a point of the opponent space"));
                }
                v.to_vec()
            }
            Adversary::Uniform => uniform_point(target.y_space(), &mut arng),
            Adversary::BestResponse => argmax_by(&cands, |y| {
                let next = linalg::concat(&x, y);
                let p = match &state {
                    None => next,
                    Some(s) => {
                        let t = 1.0 / n as f64;
                        s.point().iter().zip(&next).map(|(a, b)| a + (b - a) * t).collect()
                    }
                };
                target.distance(&p)
            }),
        };
        let next = match &state {
            None => HatState::start(&x, &y),
            Some(s) => hat_update(s, &x, &y)?,
        };
        observe(&next, &x, &y);
        let d = target.distance(&next.point());
        trace.push(vec![n.to_string(), fmt_f(d), fmt_f(slack), fmt_f(cost), opts.seed.to_string()], d);
        state = Some(next);
    }
    Ok(trace)
}

/// Columns: stage, hat_w2, slack, projection_cost, seed.
pub fn simulate_displacement(target: &DisplacementTarget, adv: &Adversary, opts: &SimOptions) -> Result<Trace> {
    simulate_displacement_with(target, adv, opts, |_, _, _| {})
}
