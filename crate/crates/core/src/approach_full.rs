//! Blackwell approachability when Player 1 observes Player 2's actions.

use serde::Serialize;

use crate::condition::{self, ConditionReport, MixedSpace, Verdict};
use crate::convex::{hull_distance, Polytope, TargetSet};
use crate::error::{invalid, Error, Result};
use crate::game::{Game, MixedAction};
use crate::linalg;
use crate::lp::solve_min_max;

/// Grid refinements attempted before the checker gives up on a band case.
pub const DEFAULT_REFINEMENTS: usize = 2;

#[derive(Clone, Debug, Serialize)]
pub struct ResponseCertificate {
    pub x_star: MixedAction,
    /// Projection of the queried point onto the target.
    pub p: Vec<f64>,
    /// Outward normal `z - p`.
    pub q: Vec<f64>,
    /// `max_j <ρ(x*, j) - p, q>`; nonpositive certifies the B-set inequality.
    pub slack: f64,
}

/// Response to the current average payoff `z`: for each projection `p` of
/// `z`, solves `min_x max_j <ρ(x, j) - p, z - p>` and keeps the smallest.
pub fn b_set_response(game: &Game, target: &TargetSet, z: &[f64]) -> Result<ResponseCertificate> {
    if z.len() != game.payoff_dim() || target.dim() != game.payoff_dim() {
        return Err(invalid("point, target and payoffs must share a dimension"));
    }
    let proj = target.distance_and_projection(z)?;
    let ni = game.num_actions_p1();
    if proj.distance <= 1e-12 {
        return Ok(ResponseCertificate {
            x_star: MixedAction::pure(ni, 0),
            p: z.to_vec(),
            q: vec![0.0; z.len()],
            slack: -proj.distance,
        });
    }
    let mut best: Option<ResponseCertificate> = None;
    for p in proj.projections {
        let q = linalg::sub(z, &p);
        let a: Vec<Vec<f64>> = (0..ni)
            .map(|i| {
                (0..game.num_actions_p2())
                    .map(|j| linalg::dot(&linalg::sub(game.payoff(i, j), &p), &q))
                    .collect()
            })
            .collect();
        let sol = solve_min_max(&a)?;
        if best.as_ref().is_none_or(|b| sol.value < b.slack) {
            best = Some(ResponseCertificate { x_star: MixedAction::new(sol.strategy)?, p, q, slack: sol.value });
        }
    }
    Ok(best.expect("a nonempty target has at least one projection"))
}

/// Mixed action to play at stage `n` given the average payoff of the first
/// `n - 1` stages. At `n = 1` there is no history and the response is to
/// the payoff of the first pure pair; `running_mean` is then ignored.
pub fn blackwell_step(game: &Game, target: &TargetSet, running_mean: &[f64], n: usize) -> Result<MixedAction> {
    if n == 0 {
        return Err(invalid("stages are numbered from 1"));
    }
    let z = if n == 1 { game.payoff(0, 0).to_vec() } else { running_mean.to_vec() };
    Ok(b_set_response(game, target, &z)?.x_star)
}

/// Decides `∀y ∃x ρ(x, y) ∈ C` on a grid over Δ(J) with cell certificates.
pub fn convex_approachable_full(game: &Game, c: &Polytope, grid_density: usize) -> Result<ConditionReport> {
    convex_approachable_full_with(game, c, grid_density, DEFAULT_REFINEMENTS)
}

pub fn convex_approachable_full_with(
    game: &Game,
    c: &Polytope,
    grid_density: usize,
    max_refinements: usize,
) -> Result<ConditionReport> {
    check_dims(game, c)?;
    let space = MixedSpace { nj: game.num_actions_p2() };
    let mut report = condition::check(game, c, &space, grid_density, max_refinements)?;
    if report.verdict == Verdict::NotApproachable {
        let y = report.witness().point.clone();
        report.exclusion_margin = Some(exclusion_margin(game, c, &y));
    }
    Ok(report)
}

pub(crate) fn check_dims(game: &Game, c: &Polytope) -> Result<()> {
    if c.dim() != game.payoff_dim() {
        return Err(invalid(format!("target has dimension {} but payoffs have {}", c.dim(), game.payoff_dim())));
    }
    Ok(())
}

/// `min_x d(ρ(x, y), C)`.
pub fn exclusion_margin(game: &Game, c: &Polytope, y: &[f64]) -> f64 {
    let rows: Vec<Vec<f64>> = (0..game.num_actions_p1()).map(|i| game.payoff_of_pure(i, y)).collect();
    hull_distance(&rows, c.vertices())
}

/// Player 2's stationary strategy that keeps every average payoff at
/// distance `delta` from `C`.
#[derive(Clone, Debug, Serialize)]
pub struct ExclusionStrategy {
    pub y: MixedAction,
    pub delta: f64,
}

impl ExclusionStrategy {
    pub fn action(&self, _stage: usize) -> &MixedAction {
        &self.y
    }
}

pub fn exclusion_strategy(game: &Game, c: &Polytope, witness_y: &MixedAction) -> Result<ExclusionStrategy> {
    check_dims(game, c)?;
    if witness_y.len() != game.num_actions_p2() {
        return Err(invalid("witness has the wrong number of actions"));
    }
    let delta = exclusion_margin(game, c, witness_y.weights());
    if delta <= 1e-12 {
        return Err(Error::InvalidWitness { margin: delta });
    }
    Ok(ExclusionStrategy { y: witness_y.clone(), delta })
}
