//! Grid certification of "for every opponent move there is a mixed action
//! whose compatible payoffs lie in C".
//!
//! The opponent side is a simplex `Δ(V)` mapped affinely onto the relevant
//! set (mixed actions under full monitoring, flags under partial
//! monitoring). On every grid point the exact margin
//! `m = min_x max_{y, l} <a_l, ρ(x, y)> - b_l` is computed by linear
//! programming over the finitely many relevant opponent actions `y`.
//! Every Freudenthal cell is then certified exactly: if a single `x` keeps
//! all vertices of the cell's lifted opponent set inside `C`, the condition
//! holds on the whole cell.

use serde::Serialize;

use crate::convex::{hausdorff, standard_form_vertices, Polytope};
use crate::error::Result;
use crate::game::Game;
use crate::linalg;
use crate::lp::solve_min_max;
use crate::simplex_grid::SimplexGrid;

/// Margins at or below this count as satisfied.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Approachable,
    NotApproachable,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridWitness {
    /// Barycentric coordinates on the opponent simplex.
    pub lambda: Vec<f64>,
    /// The opponent move: a mixed action over J or a flattened flag.
    pub point: Vec<f64>,
    /// Best response mixed action over I.
    pub x: Vec<f64>,
    /// `min_x max` normalised halfspace violation; positive means no mixed
    /// action works at this point.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub density_used: usize,
    pub table: Vec<GridWitness>,
    /// Index into `table` of the worst grid point.
    pub worst: usize,
    pub max_margin: f64,
    /// Certification band `K · L · h` at `density_used`.
    pub band: f64,
    /// Lipschitz constant of the opponent-set map used in the band.
    pub lipschitz: f64,
    pub uncertified_cells: usize,
    pub total_cells: usize,
    /// Lower bound on `min_x` distance to the target at the witness, set for
    /// negative verdicts.
    pub exclusion_margin: Option<f64>,
}

impl ConditionReport {
    pub fn witness(&self) -> &GridWitness {
        &self.table[self.worst]
    }
}

/// `min_x max_{y ∈ ys, l} <a_l, ρ(x, y)> - b_l` and its minimiser.
pub fn margin(game: &Game, ys: &[Vec<f64>], c: &Polytope) -> Result<(f64, Vec<f64>)> {
    let ni = game.num_actions_p1();
    let mut cols_per_i: Vec<Vec<f64>> = vec![Vec::new(); ni];
    for y in ys {
        let rows: Vec<Vec<f64>> = (0..ni).map(|i| game.payoff_of_pure(i, y)).collect();
        for h in c.halfspaces() {
            for i in 0..ni {
                cols_per_i[i].push(linalg::dot(&h.a, &rows[i]) - h.b);
            }
        }
    }
    let sol = solve_min_max(&cols_per_i)?;
    Ok((sol.value, sol.strategy))
}

/// Lipschitz constant in `y` (Euclidean) of `<a_l, ρ(x, y)>`, uniform in
/// `x` and `l`.
pub fn payoff_lipschitz_in_y(game: &Game, c: &Polytope) -> f64 {
    let nj = game.num_actions_p2();
    let mut k = 0.0f64;
    for i in 0..game.num_actions_p1() {
        for h in c.halfspaces() {
            let vals: Vec<f64> = (0..nj).map(|j| linalg::dot(&h.a, game.payoff(i, j))).collect();
            let mean = vals.iter().sum::<f64>() / nj as f64;
            k = k.max(vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt());
        }
    }
    k
}

pub(crate) trait OpponentSpace {
    fn parts(&self) -> usize;
    /// Coordinates of the opponent move at barycentric `lambda`.
    fn point(&self, lambda: &[f64]) -> Vec<f64>;
    /// Opponent mixed actions whose hull is the compatible set at `point`.
    fn ys_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>>;
    /// Opponent mixed actions whose hull covers every compatible action for
    /// every move in the hull of `cell`.
    fn ys_on_cell(&self, cell: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
    /// Lipschitz constant of `point ↦ hull(ys_at(point))` in Hausdorff
    /// distance, estimated from grid edges.
    fn lipschitz(&self, edges: &[(Vec<f64>, Vec<f64>)]) -> Result<f64>;
}

/// Mixed actions over J directly.
pub(crate) struct MixedSpace {
    pub nj: usize,
}

impl OpponentSpace for MixedSpace {
    fn parts(&self) -> usize {
        self.nj
    }
    fn point(&self, lambda: &[f64]) -> Vec<f64> {
        lambda.to_vec()
    }
    fn ys_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(vec![point.to_vec()])
    }
    fn ys_on_cell(&self, cell: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(cell.to_vec())
    }
    fn lipschitz(&self, _edges: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
        Ok(1.0)
    }
}

/// Flags, parameterised by barycentric coordinates on the distinct pure
/// flags.
pub(crate) struct FlagSpace<'a> {
    pub game: &'a Game,
    pub pure_flags: Vec<Vec<f64>>,
}

impl<'a> FlagSpace<'a> {
    pub fn new(game: &'a Game) -> Self {
        FlagSpace { game, pure_flags: game.pure_flags() }
    }
}

impl OpponentSpace for FlagSpace<'_> {
    fn parts(&self) -> usize {
        self.pure_flags.len()
    }
    fn point(&self, lambda: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.game.flag_dim()];
        for (l, pf) in lambda.iter().zip(&self.pure_flags) {
            linalg::axpy(&mut f, *l, pf);
        }
        f
    }
    fn ys_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.game.preimage_vertices_flat(point, 1e-7)
    }
    fn ys_on_cell(&self, cell: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        // vertices of {(y, λ) : y ∈ Δ(J), λ ∈ Δ(cell), s(y) = Σ λ_v ξ_v}
        let nj = self.game.num_actions_p2();
        let fd = self.game.flag_dim();
        let mut cols = Vec::with_capacity(nj + cell.len());
        for j in 0..nj {
            let mut c = vec![1.0, 0.0];
            let mut e = vec![0.0; nj];
            e[j] = 1.0;
            c.extend(self.game.flag_vector(&e));
            cols.push(c);
        }
        for xi in cell {
            let mut c = vec![0.0, 1.0];
            c.extend(xi.iter().map(|v| -v));
            cols.push(c);
        }
        let mut b = vec![1.0, 1.0];
        b.extend(std::iter::repeat_n(0.0, fd));
        let verts = standard_form_vertices(&cols, &b, 1e-9);
        let ys: Vec<Vec<f64>> = verts.into_iter().map(|v| v[..nj].to_vec()).collect();
        Ok(crate::convex::dedup_points(&ys, 1e-12))
    }
    fn lipschitz(&self, edges: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
        let mut l = 0.0f64;
        for (a, b) in edges {
            let d = linalg::dist(a, b);
            if d > 1e-12 {
                let h = hausdorff(&self.ys_at(a)?, &self.ys_at(b)?);
                l = l.max(h / d);
            }
        }
        Ok(l)
    }
}

pub(crate) fn check<S: OpponentSpace>(
    game: &Game,
    c: &Polytope,
    space: &S,
    density: usize,
    max_refinements: usize,
) -> Result<ConditionReport> {
    let k_y = payoff_lipschitz_in_y(game, c);
    let mut density = density.max(1);
    let mut last = None;
    for round in 0..=max_refinements {
        let grid = SimplexGrid::new(space.parts(), density);
        let lambdas = grid.points();
        let points: Vec<Vec<f64>> = lambdas.iter().map(|l| space.point(l)).collect();
        let mut table = Vec::with_capacity(points.len());
        for (lambda, point) in lambdas.iter().zip(&points) {
            let ys = space.ys_at(point)?;
            let (m, x) = margin(game, &ys, c)?;
            table.push(GridWitness { lambda: lambda.clone(), point: point.clone(), x, margin: m });
        }
        let cells = grid.cells();
        let mut h = 0.0f64;
        let mut edges = Vec::new();
        for cell in &cells {
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    h = h.max(linalg::dist(&points[cell[a]], &points[cell[b]]));
                    edges.push((points[cell[a]].clone(), points[cell[b]].clone()));
                }
            }
        }
        let lipschitz = space.lipschitz(&edges)?;
        let band = k_y * lipschitz * h;
        let worst = (0..table.len()).fold(0, |w, i| if table[i].margin > table[w].margin { i } else { w });
        let max_margin = table[worst].margin;

        let mut uncertified = 0;
        if max_margin <= MARGIN_TOL {
            for cell in &cells {
                let cell_points: Vec<Vec<f64>> = cell.iter().map(|&i| points[i].clone()).collect();
                let ys = space.ys_on_cell(&cell_points)?;
                if margin(game, &ys, c)?.0 > MARGIN_TOL {
                    uncertified += 1;
                }
            }
        }
        let verdict = if max_margin > MARGIN_TOL && max_margin > band {
            Verdict::NotApproachable
        } else if max_margin <= MARGIN_TOL && uncertified == 0 {
            Verdict::Approachable
        } else {
            Verdict::Undetermined
        };
        let report = ConditionReport {
            verdict,
            density_used: density,
            table,
            worst,
            max_margin,
            band,
            lipschitz,
            uncertified_cells: uncertified,
            total_cells: cells.len(),
            exclusion_margin: None,
        };
        if verdict != Verdict::Undetermined || round == max_refinements {
            return Ok(report);
        }
        last = Some(report);
        density *= 2;
    }
    Ok(last.expect("at least one round runs"))
}
