//! The lifted game whose stage outcome is the product measure `x ⊗ ξ` of a
//! distribution over Player 1's mixed actions and a distribution over flags.
//!
//! Both spaces are replaced by finite grids, so every measure lives on the
//! fixed product grid and every oracle is a finite linear program.

use serde::Serialize;

use crate::approach_partial::{compatible_payoffs_flat, InnerStrategy};
use crate::convex::{hausdorff, hull_vertices, minkowski_sum, project_onto_hull, Polytope, TargetSet};
use crate::error::{invalid, Error, Result};
use crate::game::Game;
use crate::linalg;
use crate::lp::{clean_distribution, solve_min_max, LinearProgram, Relation};
use crate::simplex_grid::SimplexGrid;
use crate::transport::{project_measure, project_measure_with_normal, w2, DiscreteMeasure, LinearConstraint, TransportSolution};

/// Grid over `Δ(I) × 𝒮`. Atom `(a, c)` sits at index `a * xis.len() + c`
/// with coordinates `(x_a, ξ_c)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProductGrid {
    xs: Vec<Vec<f64>>,
    xis: Vec<Vec<f64>>,
    atoms: Vec<Vec<f64>>,
}

impl ProductGrid {
    pub fn from_parts(xs: Vec<Vec<f64>>, xis: Vec<Vec<f64>>) -> Result<Self> {
        if xs.is_empty() || xis.is_empty() {
            return Err(invalid("product grid needs at least one point per factor"));
        }
        let atoms = xs.iter().flat_map(|x| xis.iter().map(move |xi| linalg::concat(x, xi))).collect();
        Ok(ProductGrid { xs, xis, atoms })
    }

    /// Simplex grid of density `x_density` over `Δ(I)` times a simplex grid
    /// of density `xi_density` over the hull of the pure flags.
    pub fn for_game(game: &Game, x_density: usize, xi_density: usize) -> Result<Self> {
        let xs = SimplexGrid::new(game.num_actions_p1(), x_density).points();
        let pure = game.pure_flags();
        let xis = SimplexGrid::new(pure.len(), xi_density)
            .points()
            .iter()
            .map(|l| {
                let mut f = vec![0.0; game.flag_dim()];
                for (w, pf) in l.iter().zip(&pure) {
                    linalg::axpy(&mut f, *w, pf);
                }
                f
            })
            .collect::<Vec<_>>();
        ProductGrid::from_parts(xs, crate::convex::dedup_points(&xis, 1e-12))
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn xis(&self) -> &[Vec<f64>] {
        &self.xis
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index(&self, a: usize, c: usize) -> usize {
        a * self.xis.len() + c
    }

    /// Splits atom coordinates into the mixed action and the flag.
    pub fn split<'p>(&self, atom: &'p [f64]) -> (&'p [f64], &'p [f64]) {
        atom.split_at(self.xs[0].len())
    }

    pub fn measure(&self, weights: Vec<f64>) -> Result<DiscreteMeasure> {
        if weights.len() != self.len() {
            return Err(invalid("weight vector does not match the product grid"));
        }
        DiscreteMeasure::new(self.atoms.clone(), weights)
    }

    /// Weights of `theta` on the grid atoms. Errors when `theta` has mass
    /// off the grid.
    pub fn weights_of(&self, theta: &DiscreteMeasure) -> Result<Vec<f64>> {
        let w: Vec<f64> = self.atoms.iter().map(|a| theta.mass_at(a)).collect();
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("measure is not supported on the product grid"));
        }
        Ok(w)
    }

    /// `x ⊗ δ_{ξ_c}` for `x` given as weights over the x-grid.
    pub fn product_with_column(&self, x: &[f64], c: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for (a, xa) in x.iter().enumerate() {
            w[self.index(a, c)] = *xa;
        }
        w
    }

    /// Mean mixed action `E_x` of weights over the x-grid.
    pub fn mean_action(&self, x: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.xs[0].len()];
        for (w, p) in x.iter().zip(&self.xs) {
            linalg::axpy(&mut m, *w, p);
        }
        m
    }

    /// Index of the grid flag nearest to `flag`.
    pub fn nearest_xi(&self, flag: &[f64]) -> usize {
        (0..self.xis.len())
            .min_by(|&a, &b| linalg::dist2(&self.xis[a], flag).total_cmp(&linalg::dist2(&self.xis[b], flag)))
            .expect("grid is nonempty")
    }
}

/// A convex set of measures on the product grid cut out by linear
/// constraints on the weights.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureTarget {
    grid: ProductGrid,
    constraints: Vec<LinearConstraint>,
    description: String,
}

impl MeasureTarget {
    pub fn linear(grid: ProductGrid, constraints: Vec<LinearConstraint>, description: impl Into<String>) -> Result<Self> {
        if constraints.iter().any(|c| c.coeffs.len() != grid.len()) {
            return Err(invalid("constraint length differs from the product grid size"));
        }
        let t = MeasureTarget { grid, constraints, description: description.into() };
        let mut lp = LinearProgram::new(t.grid.len());
        t.add_constraints(&mut lp, |b| b);
        lp.add_sparse((0..t.grid.len()).map(|b| (b, 1.0)).collect(), Relation::Eq, 1.0);
        match lp.feasible_point() {
            Ok(_) => Ok(t),
            Err(Error::Infeasible(_)) => Err(Error::Infeasible(format!("measure target '{}' is empty", t.description))),
            Err(e) => Err(e),
        }
    }

    /// All probability measures on the grid.
    pub fn everything(grid: ProductGrid) -> Result<Self> {
        MeasureTarget::linear(grid, Vec::new(), "all measures")
    }

    /// Measures whose payoff image lies in `c`: for every halfspace
    /// `<h, z> ≤ b` of `c`, `Σ_a θ_a max_κ <h, ρ(x_a, y_κ(ξ_a))> ≤ b`.
    pub fn rho_preimage(game: &Game, grid: ProductGrid, c: &Polytope) -> Result<Self> {
        if c.dim() != game.payoff_dim() {
            return Err(invalid("target dimension differs from the payoff dimension"));
        }
        let sets: Vec<Vec<Vec<f64>>> = grid
            .atoms()
            .iter()
            .map(|a| {
                let (x, xi) = grid.split(a);
                compatible_payoffs_flat(game, x, xi).map(|s| s.vertices)
            })
            .collect::<Result<_>>()?;
        let constraints = c
            .halfspaces()
            .iter()
            .map(|h| LinearConstraint {
                coeffs: sets
                    .iter()
                    .map(|vs| vs.iter().map(|v| linalg::dot(&h.a, v)).fold(f64::NEG_INFINITY, f64::max))
                    .collect(),
                rel: Relation::Le,
                rhs: h.b,
            })
            .collect();
        MeasureTarget::linear(grid, constraints, "payoff preimage")
    }

    /// Every measure putting full mass on the listed atoms.
    pub fn supported_on(grid: ProductGrid, atoms: &[usize]) -> Result<Self> {
        let mut coeffs = vec![0.0; grid.len()];
        for &a in atoms {
            coeffs[a] = 1.0;
        }
        MeasureTarget::linear(grid, vec![LinearConstraint { coeffs, rel: Relation::Eq, rhs: 1.0 }], "support restriction")
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn support(&self) -> &[Vec<f64>] {
        self.grid.atoms()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Adds the target constraints with grid weight `b` mapped to the LP
    /// variable `var(b)`.
    fn add_constraints(&self, lp: &mut LinearProgram, var: impl Fn(usize) -> usize) {
        for c in &self.constraints {
            let coeffs = c.coeffs.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(b, v)| (var(b), *v)).collect();
            lp.add_sparse(coeffs, c.rel, c.rhs);
        }
    }

    /// Largest constraint violation of grid weights `w`.
    pub fn violation(&self, w: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let lhs = linalg::dot(&c.coeffs, w);
                match c.rel {
                    Relation::Le => lhs - c.rhs,
                    Relation::Ge => c.rhs - lhs,
                    Relation::Eq => (lhs - c.rhs).abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, theta: &DiscreteMeasure, tol: f64) -> Result<bool> {
        Ok(self.violation(&self.grid.weights_of(theta)?) <= tol)
    }

    /// W₂-projection onto the target.
    pub fn project(&self, theta: &DiscreteMeasure) -> Result<(DiscreteMeasure, TransportSolution)> {
        project_measure(theta, self.grid.atoms(), &self.constraints)
    }

    pub fn distance(&self, theta: &DiscreteMeasure) -> Result<f64> {
        Ok(self.project(theta)?.1.squared_cost.max(0.0).sqrt())
    }

    /// `min over x ∈ Δ(grid_X)` of `W₂²(base + scale · x ⊗ δ_{ξ_c}, target)`
    /// where `base` are nonnegative grid weights of total mass `1 - scale`.
    /// Returns the value and the minimising `x`.
    fn min_sq_distance_with_column(&self, base: &[f64], scale: f64, c: usize) -> Result<(f64, Vec<f64>)> {
        let g = &self.grid;
        let nx = g.xs().len();
        let n = g.len();
        let mut sources: Vec<usize> = (0..n).filter(|&s| base[s] > 0.0).collect();
        for a in 0..nx {
            let s = g.index(a, c);
            if !sources.contains(&s) {
                sources.push(s);
            }
        }
        let gamma = |r: usize, b: usize| nx + r * n + b;
        let mut lp = LinearProgram::new(nx + sources.len() * n);
        for (r, &s) in sources.iter().enumerate() {
            for b in 0..n {
                lp.set_cost(gamma(r, b), linalg::dist2(&g.atoms()[s], &g.atoms()[b]));
            }
            let mut row: Vec<(usize, f64)> = (0..n).map(|b| (gamma(r, b), 1.0)).collect();
            if s % g.xis().len() == c && scale > 0.0 {
                row.push((s / g.xis().len(), -scale));
            }
            lp.add_sparse(row, Relation::Eq, base[s]);
        }
        lp.add_sparse((0..nx).map(|a| (a, 1.0)).collect(), Relation::Eq, 1.0);
        let rows = sources.len();
        for con in &self.constraints {
            let coeffs = (0..rows)
                .flat_map(|r| con.coeffs.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(b, v)| (gamma(r, b), *v)))
                .collect();
            lp.add_sparse(coeffs, con.rel, con.rhs);
        }
        let sol = lp.minimize()?;
        Ok((sol.objective.max(0.0), clean_distribution(&sol.x[..nx])))
    }
}

/// Aumann integral `∫ P(x, ξ) dθ`: the weighted Minkowski sum of the
/// compatible payoff sets of the atoms.
pub fn rho_image(game: &Game, theta: &DiscreteMeasure) -> Result<Polytope> {
    let ni = game.num_actions_p1();
    if theta.dim() != ni + game.flag_dim() {
        return Err(invalid("measure atoms must be (mixed action, flattened flag) pairs"));
    }
    let mut acc = vec![vec![0.0; game.payoff_dim()]];
    for (atom, w) in theta.atoms().iter().zip(theta.weights()) {
        if *w <= 0.0 {
            continue;
        }
        let (x, xi) = atom.split_at(ni);
        let set = compatible_payoffs_flat(game, x, xi)?;
        let scaled: Vec<Vec<f64>> = set.vertices.iter().map(|v| linalg::scale(v, *w)).collect();
        acc = hull_vertices(&minkowski_sum(&acc, &scaled));
    }
    Polytope::from_vertices(&acc)
}

/// Whether every vertex of the payoff image of `theta` lies in `e`.
pub fn rho_preimage_member(game: &Game, theta: &DiscreteMeasure, e: &TargetSet, tol: f64) -> Result<bool> {
    Ok(rho_image(game, theta)?.vertices().iter().all(|v| e.contains(v, tol)))
}

/// Largest `H(P(a), P(b)) / |a - b|` over pairs of product-grid atoms, where
/// `P(a)` is the compatible payoff set of atom `a`.
pub fn compatible_lipschitz(game: &Game, grid: &ProductGrid) -> Result<f64> {
    let sets: Vec<Vec<Vec<f64>>> = grid
        .atoms()
        .iter()
        .map(|a| {
            let (x, xi) = grid.split(a);
            compatible_payoffs_flat(game, x, xi).map(|s| s.vertices)
        })
        .collect::<Result<_>>()?;
    let mut l = 0.0f64;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let d = linalg::dist(&grid.atoms()[a], &grid.atoms()[b]);
            if d > 1e-12 {
                l = l.max(hausdorff(&sets[a], &sets[b]) / d);
            }
        }
    }
    Ok(l)
}

/// `sup_{z ∈ ρ(θ̄)} d(z, ρ(θ̲))`.
pub fn image_excess(game: &Game, theta_bar: &DiscreteMeasure, theta_under: &DiscreteMeasure) -> Result<f64> {
    let a = rho_image(game, theta_bar)?;
    let b = rho_image(game, theta_under)?;
    Ok(a.vertices().iter().map(|v| project_onto_hull(b.vertices(), v).1).fold(0.0, f64::max))
}

/// Mixes `theta` with the uniform measure on its own atoms:
/// `(1 - λ) θ + λ U` with the largest `λ ≤ 1/2` found by bisection such that
/// `W₂²(θ, result) ≤ ε`. Returns the mixture and `λ`.
pub fn smooth(theta: &DiscreteMeasure, epsilon: f64) -> Result<(DiscreteMeasure, f64)> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(invalid("smoothing parameter must be positive"));
    }
    let n = theta.len() as f64;
    let mix = |l: f64| -> Result<DiscreteMeasure> {
        let w = theta.weights().iter().map(|w| (1.0 - l) * w + l / n).collect();
        DiscreteMeasure::new(theta.atoms().to_vec(), w)
    };
    let cost = |m: &DiscreteMeasure| -> Result<f64> { Ok(w2(theta, m)?.squared_cost) };
    let half = mix(0.5)?;
    if cost(&half)? <= epsilon {
        return Ok((half, 0.5));
    }
    let to_uniform = cost(&mix(1.0)?)?;
    // W₂²(θ, mix(λ)) ≤ λ W₂²(θ, U), so lo is admissible; the shave keeps
    // rounding in the solver from landing just above ε
    let mut lo = (epsilon * (1.0 - 1e-9) / to_uniform).min(0.5);
    let mut hi = 0.5;
    let mut best = mix(lo)?;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let m = mix(mid)?;
        if cost(&m)? <= epsilon {
            lo = mid;
            best = m;
        } else {
            hi = mid;
        }
    }
    Ok((best, lo))
}

/// Running average of stage outcomes `x_m ⊗ ξ_m` on the product grid,
/// accumulated with compensated summation.
#[derive(Clone, Debug)]
pub struct InformativeState {
    grid: ProductGrid,
    sums: Vec<f64>,
    comp: Vec<f64>,
    n: usize,
    epsilon: f64,
}

impl InformativeState {
    pub fn new(grid: ProductGrid, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(invalid("smoothing parameter must be positive"));
        }
        let n = grid.len();
        Ok(InformativeState { grid, sums: vec![0.0; n], comp: vec![0.0; n], n: 0, epsilon })
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn stage(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Adds the outcome `x ⊗ ξ`, both given as weights over the factor grids.
    pub fn push(&mut self, x: &[f64], xi: &[f64]) -> Result<()> {
        if x.len() != self.grid.xs().len() || xi.len() != self.grid.xis().len() {
            return Err(invalid("outcome weights do not match the grid factors"));
        }
        for (a, xa) in x.iter().enumerate() {
            for (c, xc) in xi.iter().enumerate() {
                let idx = self.grid.index(a, c);
                let y = xa * xc - self.comp[idx];
                let t = self.sums[idx] + y;
                self.comp[idx] = (t - self.sums[idx]) - y;
                self.sums[idx] = t;
            }
        }
        self.n += 1;
        Ok(())
    }

    /// Grid weights of `θ̄_n`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.sums.iter().map(|s| s / n).collect()
    }

    pub fn theta_bar(&self) -> Result<DiscreteMeasure> {
        if self.n == 0 {
            return Err(invalid("no stage has been played"));
        }
        self.grid.measure(self.weights())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TildeResponse {
    /// Weights over the x-grid.
    pub x: Vec<f64>,
    /// `max_ξ ∫ψ d(θ̲ - x ⊗ δ_ξ)` with `ψ` the potential on the projection
    /// side; nonpositive certifies the B̃ inequality at this state.
    pub slack: f64,
    /// `W₂²(θ̄^ε, target)`.
    pub projection_cost: f64,
    /// Smoothing weight used.
    pub lambda: f64,
}

/// Projection-and-potential response at the smoothed running average.
/// Before the first stage it plays the first grid action.
pub fn tilde_b_response(state: &InformativeState, target: &MeasureTarget) -> Result<TildeResponse> {
    let g = state.grid();
    let nx = g.xs().len();
    let first = {
        let mut x = vec![0.0; nx];
        x[0] = 1.0;
        x
    };
    if state.stage() == 0 {
        return Ok(TildeResponse { x: first, slack: 0.0, projection_cost: 0.0, lambda: 0.0 });
    }
    let (smoothed, lambda) = smooth(&state.theta_bar()?, state.epsilon())?;
    let (x, slack, projection_cost) = potential_response(&smoothed, target)?;
    Ok(TildeResponse { x: x.unwrap_or(first), slack, projection_cost, lambda })
}

/// Minimax response to the potential of the projection of `theta`. Returns
/// `None` for the action when `theta` already lies in the target.
fn potential_response(theta: &DiscreteMeasure, target: &MeasureTarget) -> Result<(Option<Vec<f64>>, f64, f64)> {
    let g = target.grid();
    let (nu, sol, psi) = project_measure_with_normal(theta, target.support(), target.constraints())?;
    if sol.squared_cost <= 1e-12 {
        return Ok((None, 0.0, sol.squared_cost.max(0.0)));
    }
    let at_proj: f64 = nu.weights().iter().zip(&psi).map(|(w, p)| w * p).sum();
    let a: Vec<Vec<f64>> = (0..g.xs().len())
        .map(|a| (0..g.xis().len()).map(|c| at_proj - psi[g.index(a, c)]).collect())
        .collect();
    let mg = solve_min_max(&a)?;
    Ok((Some(mg.strategy), mg.value, sol.squared_cost))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub inside: bool,
    pub slack: f64,
    pub holds: bool,
    pub x: Option<Vec<f64>>,
}

/// Tests the B̃ inequality at each probe measure.
pub fn is_tilde_b_set(target: &MeasureTarget, probes: &[DiscreteMeasure], tol: f64) -> Result<Vec<ProbeReport>> {
    probes
        .iter()
        .map(|p| {
            let (x, slack, _) = potential_response(p, target)?;
            let inside = x.is_none();
            Ok(ProbeReport { inside, slack, holds: inside || slack <= tol, x })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnCheck {
    pub xi_index: usize,
    pub xi: Vec<f64>,
    /// Weights over the x-grid with `x ⊗ δ_ξ` in the target, when one
    /// exists.
    pub x: Option<Vec<f64>>,
    /// `min_x W₂(x ⊗ δ_ξ, target)` for infeasible columns.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem3Report {
    pub approachable: bool,
    pub columns: Vec<ColumnCheck>,
    /// Column with the largest `delta` when not approachable.
    pub witness: Option<usize>,
    pub delta: Option<f64>,
}

/// For each grid flag, whether some `x ∈ Δ(grid_X)` has `x ⊗ δ_ξ` in the
/// target.
pub fn theorem3_check(target: &MeasureTarget) -> Result<Theorem3Report> {
    let g = target.grid();
    let nx = g.xs().len();
    let mut columns = Vec::with_capacity(g.xis().len());
    for c in 0..g.xis().len() {
        // only column c carries mass; other weights are zero
        let mut lp_col = LinearProgram::new(nx);
        for con in target.constraints() {
            let coeffs = (0..nx).map(|a| (a, con.coeffs[g.index(a, c)])).filter(|(_, v)| *v != 0.0).collect();
            lp_col.add_sparse(coeffs, con.rel, con.rhs);
        }
        lp_col.add_sparse((0..nx).map(|a| (a, 1.0)).collect(), Relation::Eq, 1.0);
        let check = match lp_col.feasible_point() {
            Ok(x) => ColumnCheck { xi_index: c, xi: g.xis()[c].clone(), x: Some(clean_distribution(&x)), delta: None },
            Err(Error::Infeasible(_)) => {
                let (v, _) = target.min_sq_distance_with_column(&vec![0.0; g.len()], 1.0, c)?;
                ColumnCheck { xi_index: c, xi: g.xis()[c].clone(), x: None, delta: Some(v.sqrt()) }
            }
            Err(e) => return Err(e),
        };
        columns.push(check);
    }
    let witness = columns
        .iter()
        .filter_map(|c| c.delta.map(|d| (c.xi_index, d)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((i, d)),
        });
    Ok(Theorem3Report {
        approachable: witness.is_none(),
        columns,
        witness: witness.map(|w| w.0),
        delta: witness.map(|w| w.1),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondaryReport {
    /// `(λ, min_x W₂(λ θ₀ + (1 - λ) x ⊗ δ_ξ, target))` per grid value.
    pub per_lambda: Vec<(f64, f64)>,
    /// Best certified margin over the grid, when positive.
    pub delta: Option<f64>,
}

/// Probes whether `theta0` is secondary with respect to the flag with
/// index `xi` using constant mixing weights from `lambda_grid ⊂ (0, 1]`.
pub fn secondary_point_probe(
    target: &MeasureTarget,
    theta0: &DiscreteMeasure,
    xi: usize,
    lambda_grid: &[f64],
) -> Result<SecondaryReport> {
    let g = target.grid();
    if xi >= g.xis().len() {
        return Err(invalid("flag index outside the grid"));
    }
    if lambda_grid.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return Err(invalid("mixing weights must lie in (0, 1]"));
    }
    let w0 = g.weights_of(theta0)?;
    let mut per_lambda = Vec::with_capacity(lambda_grid.len());
    for &l in lambda_grid {
        let base: Vec<f64> = w0.iter().map(|w| l * w).collect();
        let (v, _) = target.min_sq_distance_with_column(&base, 1.0 - l, xi)?;
        per_lambda.push((l, v.sqrt()));
    }
    let best = per_lambda.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SecondaryReport { per_lambda, delta: (best > 1e-9).then_some(best) })
}

/// Strategy of the lifted game that plays the projection-and-potential
/// response, with Player 2's flags snapped to the nearest grid flag.
pub struct TildeStrategy {
    state: InformativeState,
    target: MeasureTarget,
    pending: Option<TildeResponse>,
    last: Option<TildeResponse>,
}

impl TildeStrategy {
    pub fn new(target: MeasureTarget, epsilon: f64) -> Result<Self> {
        let state = InformativeState::new(target.grid().clone(), epsilon)?;
        Ok(TildeStrategy { state, target, pending: None, last: None })
    }

    pub fn state(&self) -> &InformativeState {
        &self.state
    }

    pub fn target(&self) -> &MeasureTarget {
        &self.target
    }

    /// Response computed for the most recent stage.
    pub fn last_response(&self) -> Option<&TildeResponse> {
        self.last.as_ref()
    }

    /// Weights over the x-grid to play now.
    pub fn respond(&mut self) -> Result<&TildeResponse> {
        if self.pending.is_none() {
            self.pending = Some(tilde_b_response(&self.state, &self.target)?);
        }
        Ok(self.pending.as_ref().expect("set above"))
    }

    /// Records Player 2's move as an index into the flag grid.
    pub fn record(&mut self, xi: usize) -> Result<()> {
        self.respond()?;
        let r = self.pending.take().expect("respond sets a response");
        let mut col = vec![0.0; self.state.grid().xis().len()];
        col[xi] = 1.0;
        self.state.push(&r.x, &col)?;
        self.last = Some(r);
        Ok(())
    }
}

impl InnerStrategy for TildeStrategy {
    fn prescription(&mut self) -> Result<Vec<f64>> {
        let x = self.respond()?.x.clone();
        Ok(self.state.grid().mean_action(&x))
    }

    fn feed(&mut self, flag: &[f64]) -> Result<()> {
        let c = self.state.grid().nearest_xi(flag);
        self.record(c)
    }
}
