//! Approachability when Player 1 only observes signals: compatible payoff
//! sets, the flag-based condition checker, and the block strategy that
//! estimates flags from exploration stages.

use rand::Rng;
use serde::Serialize;

use crate::approach_full::{check_dims, DEFAULT_REFINEMENTS};
use crate::condition::{self, ConditionReport, FlagSpace, Verdict};
use crate::convex::{dedup_points, project_onto_hull};
use crate::error::{invalid, Error, Result};
use crate::game::{Flag, Game};
use crate::convex::Polytope;

/// Hull of `ρ(x, y)` over the opponent actions compatible with a flag.
#[derive(Clone, Debug, Serialize)]
pub struct CompatiblePayoffSet {
    pub vertices: Vec<Vec<f64>>,
}

impl CompatiblePayoffSet {
    pub fn distance(&self, z: &[f64]) -> f64 {
        project_onto_hull(&self.vertices, z).1
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.distance(z) <= tol
    }
}

/// `P(x, ξ)` for a flattened flag.
pub fn compatible_payoffs_flat(game: &Game, x: &[f64], flag: &[f64]) -> Result<CompatiblePayoffSet> {
    if x.len() != game.num_actions_p1() {
        return Err(invalid("mixed action has the wrong number of actions"));
    }
    let ys = game.preimage_vertices_flat(flag, 1e-7)?;
    let pts: Vec<Vec<f64>> = ys.iter().map(|y| game.mixed_payoff(x, y)).collect::<Result<_>>()?;
    Ok(CompatiblePayoffSet { vertices: dedup_points(&pts, 1e-12) })
}

pub fn compatible_payoffs(game: &Game, x: &[f64], flag: &Flag) -> Result<CompatiblePayoffSet> {
    compatible_payoffs_flat(game, x, &flag.flatten())
}

/// Decides `∀ξ ∃x P(x, ξ) ⊂ C` on a grid over the flag polytope.
pub fn convex_approachable_partial(game: &Game, c: &Polytope, grid_density: usize) -> Result<ConditionReport> {
    convex_approachable_partial_with(game, c, grid_density, DEFAULT_REFINEMENTS)
}

pub fn convex_approachable_partial_with(
    game: &Game,
    c: &Polytope,
    grid_density: usize,
    max_refinements: usize,
) -> Result<ConditionReport> {
    check_dims(game, c)?;
    let space = FlagSpace::new(game);
    let mut report = condition::check(game, c, &space, grid_density, max_refinements)?;
    if report.verdict == Verdict::NotApproachable {
        report.exclusion_margin = Some(report.max_margin);
    }
    Ok(report)
}

/// One stage as Player 1 sees it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub action: usize,
    pub signal: usize,
    pub explored: bool,
}

/// Row `i` is the empirical signal distribution over exploration stages
/// where `i` was played.
pub fn flag_estimator(observations: &[Observation], game: &Game) -> Result<Flag> {
    let ni = game.num_actions_p1();
    let ns = game.num_signals();
    let mut counts = vec![vec![0usize; ns]; ni];
    for o in observations.iter().filter(|o| o.explored) {
        if o.action >= ni || o.signal >= ns {
            return Err(invalid("observation out of range"));
        }
        counts[o.action][o.signal] += 1;
    }
    let mut rows = Vec::with_capacity(ni);
    for (action, row) in counts.into_iter().enumerate() {
        let total: usize = row.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientExploration { action });
        }
        rows.push(row.into_iter().map(|c| c as f64 / total as f64).collect());
    }
    Flag::new(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockConfig {
    pub block_length: usize,
    pub eta: f64,
    pub doubling: bool,
}

impl BlockConfig {
    /// Requires `N·η ≥ |I|` so every action is explored at least once per
    /// block in expectation.
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        if self.block_length == 0 {
            return Err(invalid("block length must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid("exploration rate must lie in [0, 1]"));
        }
        if (self.block_length as f64) * self.eta < num_actions as f64 - 1e-9 {
            return Err(invalid(format!(
                "block length {} with exploration rate {} explores fewer than {} stages",
                self.block_length, self.eta, num_actions
            )));
        }
        Ok(())
    }
}

/// Blocks per epoch when doubling is on.
pub const BLOCKS_PER_EPOCH: usize = 4;

/// `N_k = N·2^k`, `η_k = η·2^(-k/3)`, with `η_k` raised when needed to keep
/// `N_k·η_k ≥ |I|`.
pub fn doubling_schedule(base_n: usize, base_eta: f64, k: u32, num_actions: usize) -> BlockConfig {
    let n = base_n << k;
    let eta = (base_eta * 2f64.powf(-(k as f64) / 3.0)).max(num_actions as f64 / n as f64).min(1.0);
    BlockConfig { block_length: n, eta, doubling: true }
}

/// A strategy of the lifted game as consumed by the block strategy: it
/// prescribes a mixed action (the mean of its measure-valued move) and is
/// told the flag Player 2 produced over the block.
pub trait InnerStrategy {
    fn prescription(&mut self) -> Result<Vec<f64>>;
    fn feed(&mut self, flag: &[f64]) -> Result<()>;
}

/// Inner strategy that always prescribes the same mixed action.
#[derive(Clone, Debug)]
pub struct FixedInner {
    pub x: Vec<f64>,
    pub fed: Vec<Vec<f64>>,
}

impl FixedInner {
    pub fn new(x: Vec<f64>) -> Self {
        FixedInner { x, fed: Vec::new() }
    }
}

impl InnerStrategy for FixedInner {
    fn prescription(&mut self) -> Result<Vec<f64>> {
        Ok(self.x.clone())
    }
    fn feed(&mut self, flag: &[f64]) -> Result<()> {
        self.fed.push(flag.to_vec());
        Ok(())
    }
}

/// Result of closing a block.
#[derive(Clone, Debug)]
pub enum BlockEnd {
    /// The estimated flag, projected onto the flag polytope, was fed to the
    /// inner strategy.
    Fed(Vec<f64>),
    /// Some action was never explored; the inner strategy was not updated.
    Skipped { action: usize },
}

pub struct BlockStrategy<'g, S: InnerStrategy> {
    game: &'g Game,
    base: BlockConfig,
    config: BlockConfig,
    inner: S,
    epoch: u32,
    blocks_done: usize,
    stage_in_block: usize,
    current_x: Option<Vec<f64>>,
    observations: Vec<Observation>,
}

impl<'g, S: InnerStrategy> BlockStrategy<'g, S> {
    pub fn new(game: &'g Game, config: BlockConfig, inner: S) -> Result<Self> {
        config.validate(game.num_actions_p1())?;
        Ok(BlockStrategy {
            game,
            base: config,
            config,
            inner,
            epoch: 0,
            blocks_done: 0,
            stage_in_block: 0,
            current_x: None,
            observations: Vec::new(),
        })
    }

    pub fn config(&self) -> BlockConfig {
        self.config
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn blocks_done(&self) -> usize {
        self.blocks_done
    }

    /// Mixed action `(1 - η) x + η · uniform` of the current block, once
    /// `step` has been called in it.
    pub fn current_mixed(&self) -> Option<Vec<f64>> {
        let ni = self.game.num_actions_p1() as f64;
        let eta = self.config.eta;
        self.current_x.as_ref().map(|x| x.iter().map(|v| (1.0 - eta) * v + eta / ni).collect())
    }

    /// Draws the stage action; returns `(action, explored)`.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Result<(usize, bool)> {
        let ni = self.game.num_actions_p1();
        if self.current_x.is_none() {
            self.current_x = Some(self.inner.prescription()?);
        }
        if rng.random::<f64>() < self.config.eta {
            return Ok((rng.random_range(0..ni), true));
        }
        let x = self.current_x.as_ref().expect("set above");
        Ok((sample_index(x, rng.random::<f64>()), false))
    }

    /// Records the stage outcome. Returns the block summary when the stage
    /// closes a block.
    pub fn observe(&mut self, obs: Observation) -> Result<Option<BlockEnd>> {
        self.observations.push(obs);
        self.stage_in_block += 1;
        if self.stage_in_block < self.config.block_length {
            return Ok(None);
        }
        let end = match flag_estimator(&self.observations, self.game) {
            Ok(flag) => {
                let xi = self.game.snap_flag(&flag.flatten(), f64::INFINITY)?;
                self.inner.feed(&xi)?;
                BlockEnd::Fed(xi)
            }
            Err(Error::InsufficientExploration { action }) => BlockEnd::Skipped { action },
            Err(e) => return Err(e),
        };
        self.observations.clear();
        self.stage_in_block = 0;
        self.current_x = None;
        self.blocks_done += 1;
        if self.base.doubling && self.blocks_done % BLOCKS_PER_EPOCH == 0 {
            self.epoch += 1;
            self.config =
                doubling_schedule(self.base.block_length, self.base.eta, self.epoch, self.game.num_actions_p1());
        }
        Ok(Some(end))
    }
}

/// Index drawn from a probability vector by inversion of `u ∈ [0, 1)`.
pub fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|w| *w > 0.0).unwrap_or(p.len() - 1)
}
