//! Experiment harness: input loading, simulations, rate fits and the
//! condition checks behind the command line.

pub mod fit;
pub mod rng;
pub mod sim;
pub mod trace;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::approach_full::convex_approachable_full;
use crate::approach_partial::{convex_approachable_partial, BlockConfig};
use crate::condition::{ConditionReport, Verdict};
use crate::convex::{PieceSpec, Polytope, TargetSet, TargetSpec};
use crate::displacement::{is_convex_game, theorem5_check, ConvexityReport, DisplacementTarget};
use crate::error::{invalid, Error, Result};
use crate::game::Game;
use crate::informative::{theorem3_check, MeasureTarget, ProductGrid};
use crate::transport::LinearConstraint;
use sim::{Adversary, SimOptions};
use trace::{content_hash, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Partial,
    Informative,
    Displacement,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "partial" => Ok(Mode::Partial),
            "informative" => Ok(Mode::Informative),
            "displacement" => Ok(Mode::Displacement),
            _ => Err(invalid(format!("unknown mode '{s}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Full => "full",
            Mode::Partial => "partial",
            Mode::Informative => "informative",
            Mode::Displacement => "displacement",
        };
        f.write_str(s)
    }
}

/// Targets for the lifted game. A plain target object (with `pieces`) is
/// read as the preimage `ρ⁻¹(C)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureTargetSpec {
    RhoPreimage {
        target: TargetSpec,
    },
    Linear {
        constraints: Vec<LinearConstraint>,
        #[serde(default)]
        description: Option<String>,
    },
    SupportedOn {
        atoms: Vec<usize>,
    },
    Everything,
}

impl MeasureTargetSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        if v.get("kind").is_some() {
            Ok(serde_json::from_value(v)?)
        } else {
            Ok(MeasureTargetSpec::RhoPreimage { target: serde_json::from_value(v)? })
        }
    }

    pub fn build(&self, game: &Game, grid: ProductGrid) -> Result<MeasureTarget> {
        match self {
            MeasureTargetSpec::RhoPreimage { target } => {
                let t = TargetSet::from_spec(target)?;
                MeasureTarget::rho_preimage(game, grid, t.as_convex()?)
            }
            MeasureTargetSpec::Linear { constraints, description } => MeasureTarget::linear(
                grid,
                constraints.clone(),
                description.clone().unwrap_or_else(|| "linear constraints".into()),
            ),
            MeasureTargetSpec::SupportedOn { atoms } => MeasureTarget::supported_on(grid, atoms),
            MeasureTargetSpec::Everything => MeasureTarget::everything(grid),
        }
    }
}

/// Displacement targets. Spaces default to unit cubes of the given
/// dimensions.
#[derive(Clone, Debug, Deserialize)]
pub struct DisplacementSpec {
    #[serde(default)]
    pub x_dim: Option<usize>,
    #[serde(default)]
    pub y_dim: Option<usize>,
    #[serde(default)]
    pub x_space: Option<PieceSpec>,
    #[serde(default)]
    pub y_space: Option<PieceSpec>,
    pub region: PieceSpec,
}

impl DisplacementSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<DisplacementTarget> {
        let space = |p: &Option<PieceSpec>, d: Option<usize>, name: &str| -> Result<Polytope> {
            match (p, d) {
                (Some(p), _) => p.build(),
                (None, Some(d)) if d > 0 => Ok(Polytope::unit_cube(d)),
                _ => Err(invalid(format!("displacement target needs {name}_space or {name}_dim"))),
            }
        };
        DisplacementTarget::new(space(&self.x_space, self.x_dim, "x")?, space(&self.y_space, self.y_dim, "y")?, self.region.build()?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub game: Option<PathBuf>,
    pub target: PathBuf,
    pub horizon: usize,
    pub seed: u64,
    pub grid_density: usize,
    pub eta: f64,
    pub block_length: usize,
    pub doubling: bool,
    pub adversary: String,
    pub sampled: bool,
    pub epsilon: f64,
    pub replicas: usize,
}

impl RunConfig {
    pub fn new(mode: Mode, game: Option<PathBuf>, target: PathBuf) -> Self {
        RunConfig {
            mode,
            game,
            target,
            horizon: 1000,
            seed: 0,
            grid_density: 10,
            eta: 0.1,
            block_length: 100,
            doubling: false,
            adversary: "uniform".into(),
            sampled: false,
            epsilon: 1e-2,
            replicas: 1,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_game(path: Option<&PathBuf>) -> Result<(Game, String)> {
    let path = path.ok_or_else(|| invalid("this mode needs a game file"))?;
    let text = read(path)?;
    Ok((Game::from_json(&text)?, text))
}

enum Prepared {
    Full(Game, TargetSet),
    Partial(Game, Polytope, BlockConfig),
    Informative(Game, MeasureTarget),
    Displacement(DisplacementTarget),
}

/// Runs `replicas` independent simulations with seeds `seed, seed + 1, ...`
/// (in parallel) and returns their traces in seed order.
pub fn run(cfg: &RunConfig) -> Result<Vec<Trace>> {
    if cfg.replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    let target_text = read(&cfg.target)?;
    let mut hashed: Vec<String> = Vec::new();
    let prepared = match cfg.mode {
        Mode::Full => {
            let (g, t) = load_game(cfg.game.as_ref())?;
            hashed.push(t);
            Prepared::Full(g, TargetSet::from_json(&target_text)?)
        }
        Mode::Partial => {
            let (g, t) = load_game(cfg.game.as_ref())?;
            hashed.push(t);
            let c = TargetSet::from_json(&target_text)?.as_convex()?.clone();
            let block = BlockConfig { block_length: cfg.block_length, eta: cfg.eta, doubling: cfg.doubling };
            block.validate(g.num_actions_p1())?;
            Prepared::Partial(g, c, block)
        }
        Mode::Informative => {
            let (g, t) = load_game(cfg.game.as_ref())?;
            hashed.push(t);
            let grid = ProductGrid::for_game(&g, cfg.grid_density, cfg.grid_density)?;
            let target = MeasureTargetSpec::from_json(&target_text)?.build(&g, grid)?;
            Prepared::Informative(g, target)
        }
        Mode::Displacement => Prepared::Displacement(DisplacementSpec::from_json(&target_text)?.build()?),
    };
    hashed.push(target_text);
    let parts: Vec<&[u8]> = hashed.iter().map(|s| s.as_bytes()).collect();
    let input_hash = content_hash(&parts);
    let adversary = Adversary::parse(&cfg.adversary)?;
    let config_json = serde_json::to_string(cfg).expect("config serializes");

    (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let opts = SimOptions { horizon: cfg.horizon, seed: cfg.seed + r, sampled: cfg.sampled, epsilon: cfg.epsilon };
            let mut trace = match &prepared {
                Prepared::Full(g, t) => sim::simulate_full(g, t, &adversary, &opts)?,
                Prepared::Partial(g, c, b) => sim::simulate_partial(g, c, cfg.grid_density, *b, &adversary, &opts)?,
                Prepared::Informative(g, t) => sim::simulate_informative(g, t, &adversary, &opts)?,
                Prepared::Displacement(t) => sim::simulate_displacement(t, &adversary, &opts)?,
            };
            trace.add_metadata("config", config_json.clone());
            trace.add_metadata("input_hash", input_hash.clone());
            trace.add_metadata("replica", r.to_string());
            trace.add_metadata("seed", opts.seed.to_string());
            if let Prepared::Partial(..) = prepared {
                if cfg.doubling {
                    trace.add_metadata(
                        "block_schedule",
                        format!(
                            "epoch k: length {}*2^k, exploration {}*2^(-k/3), {} blocks per epoch",
                            cfg.block_length,
                            cfg.eta,
                            crate::approach_partial::BLOCKS_PER_EPOCH
                        ),
                    );
                }
            }
            Ok(trace)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub mode: Mode,
    pub game: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub grid_density: usize,
    /// Test convexity of the game instead of a target.
    pub convex_game: bool,
    pub samples: usize,
    pub seed: u64,
}

impl CheckConfig {
    pub fn new(mode: Mode, game: Option<PathBuf>, target: Option<PathBuf>) -> Self {
        CheckConfig { mode, game, target, grid_density: 10, convex_game: false, samples: 2000, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub mode: Mode,
    /// `approachable`, `not_approachable`, `undetermined`, `convex` or
    /// `not_convex`.
    pub verdict: String,
    pub details: Value,
}

impl CheckReport {
    pub fn is_undetermined(&self) -> bool {
        self.verdict == "undetermined"
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut out = format!("mode: {}\nverdict: {}\n", self.mode, self.verdict);
        let d = &self.details;
        for key in ["witness", "delta", "max_margin", "band", "exclusion_margin", "density_used", "distance"] {
            if let Some(v) = d.get(key).filter(|v| !v.is_null()) {
                out.push_str(&format!("{key}: {v}\n"));
            }
        }
        let rows = [("table", "point", "margin"), ("columns", "xi", "delta"), ("points", "y", "delta")];
        for (list, at, value) in rows {
            let Some(entries) = d.get(list).and_then(Value::as_array) else { continue };
            out.push_str(&format!("{at}\t{value}\n"));
            for e in entries {
                let shown = e.get(value).filter(|v| !v.is_null()).map_or("ok".to_string(), |v| v.to_string());
                out.push_str(&format!("{}\t{}\n", e[at], shown));
            }
        }
        out
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Approachable => "approachable",
        Verdict::NotApproachable => "not_approachable",
        Verdict::Undetermined => "undetermined",
    }
}

fn condition_details(rep: &ConditionReport) -> Value {
    let mut v = serde_json::to_value(rep).expect("report serializes");
    v["witness"] = serde_json::to_value(&rep.witness().point).expect("vector serializes");
    v
}

/// Decides the approachability condition of the chosen mode, or the
/// convexity of the game when `convex_game` is set.
pub fn check(cfg: &CheckConfig) -> Result<CheckReport> {
    let target_text = || -> Result<String> { read(cfg.target.as_ref().ok_or_else(|| invalid("a target file is required"))?) };
    if cfg.convex_game {
        let (g, _) = load_game(cfg.game.as_ref())?;
        let rep = is_convex_game(&g, cfg.samples, 1e-9, cfg.seed)?;
        let verdict = match rep {
            ConvexityReport::Convex { .. } => "convex",
            ConvexityReport::Counterexample { .. } => "not_convex",
        };
        return Ok(CheckReport { mode: cfg.mode, verdict: verdict.into(), details: serde_json::to_value(&rep)? });
    }
    let (verdict, details) = match cfg.mode {
        Mode::Full | Mode::Partial => {
            let (g, _) = load_game(cfg.game.as_ref())?;
            let t = TargetSet::from_json(&target_text()?)?;
            let c = t.as_convex()?;
            let rep = if cfg.mode == Mode::Full {
                convex_approachable_full(&g.with_full_monitoring(), c, cfg.grid_density)?
            } else {
                convex_approachable_partial(&g, c, cfg.grid_density)?
            };
            (verdict_name(rep.verdict).to_string(), condition_details(&rep))
        }
        Mode::Informative => {
            let (g, _) = load_game(cfg.game.as_ref())?;
            let grid = ProductGrid::for_game(&g, cfg.grid_density, cfg.grid_density)?;
            let target = MeasureTargetSpec::from_json(&target_text()?)?.build(&g, grid)?;
            let rep = theorem3_check(&target)?;
            let v = if rep.approachable { "approachable" } else { "not_approachable" };
            (v.to_string(), serde_json::to_value(&rep)?)
        }
        Mode::Displacement => {
            let target = DisplacementSpec::from_json(&target_text()?)?.build()?;
            let rep = theorem5_check(&target, cfg.grid_density)?;
            let v = if rep.approachable { "approachable" } else { "not_approachable" };
            (v.to_string(), serde_json::to_value(&rep)?)
        }
    };
    Ok(CheckReport { mode: cfg.mode, verdict, details })
}
