//! Convex games and the displacement game, where outcomes are averaged
//! along optimal transport plans instead of linearly.
//!
//! Targets are families of Dirac masses `{δ_c : c ∈ D}` over a convex
//! polytope `D ⊂ X × Χ`. Under pure-action play the averaged outcome stays a
//! Dirac mass at the running means, so projections reduce to Euclidean ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approach_partial::compatible_payoffs_flat;
use crate::convex::{hull_distance, Polytope};
use crate::error::{invalid, Error, Result};
use crate::game::Game;
use crate::informative::rho_image;
use crate::linalg;
use crate::lp::{LinearProgram, Relation};
use crate::simplex_grid::SimplexGrid;
use crate::transport::{interpolate_along, w2, DiscreteMeasure};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConvexityReport {
    Convex { samples: usize },
    Counterexample { atoms: Vec<Vec<f64>>, weights: Vec<f64>, vertex: Vec<f64>, distance: f64 },
}

/// Draws a uniform point of the simplex with `n` parts.
fn random_simplex_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Samples finitely supported measures `q` on `Δ(I) × 𝒮` and checks that
/// every vertex of `ρ(q)` lies in `P(E_q[x], E_q[ξ])`.
pub fn is_convex_game(game: &Game, sample_count: usize, tol: f64, seed: u64) -> Result<ConvexityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ni = game.num_actions_p1();
    let nj = game.num_actions_p2();
    for _ in 0..sample_count {
        let k = rng.random_range(1..=4usize);
        let mut atoms = Vec::with_capacity(k);
        for _ in 0..k {
            // favour pure actions, where violations are largest
            let x = if rng.random::<f64>() < 0.5 {
                crate::game::MixedAction::pure(ni, rng.random_range(0..ni)).into_weights()
            } else {
                random_simplex_point(&mut rng, ni)
            };
            let y = if rng.random::<f64>() < 0.5 {
                crate::game::MixedAction::pure(nj, rng.random_range(0..nj)).into_weights()
            } else {
                random_simplex_point(&mut rng, nj)
            };
            atoms.push(linalg::concat(&x, &game.flag_vector(&y)));
        }
        let weights = random_simplex_point(&mut rng, k);
        let q = DiscreteMeasure::new(atoms.clone(), weights.clone())?;
        let mean = q.mean();
        let (ex, exi) = mean.split_at(ni);
        let p = compatible_payoffs_flat(game, ex, exi)?;
        for v in rho_image(game, &q)?.vertices() {
            let d = p.distance(v);
            if d > tol {
                return Ok(ConvexityReport::Counterexample { atoms, weights, vertex: v.clone(), distance: d });
            }
        }
    }
    Ok(ConvexityReport::Convex { samples: sample_count })
}

/// `D ⊂ X × Χ` with `X`, `Χ` polytopes; points are `(x, y)` concatenated.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementTarget {
    x_space: Polytope,
    y_space: Polytope,
    region: Polytope,
}

impl DisplacementTarget {
    pub fn new(x_space: Polytope, y_space: Polytope, region: Polytope) -> Result<Self> {
        if region.dim() != x_space.dim() + y_space.dim() {
            return Err(invalid("region dimension must equal dim X + dim Χ"));
        }
        Ok(DisplacementTarget { x_space, y_space, region })
    }

    /// `X = [0,1]^dx`, `Χ = [0,1]^dy`.
    pub fn in_unit_boxes(dx: usize, dy: usize, region: Polytope) -> Result<Self> {
        DisplacementTarget::new(Polytope::unit_cube(dx), Polytope::unit_cube(dy), region)
    }

    pub fn x_space(&self) -> &Polytope {
        &self.x_space
    }

    pub fn y_space(&self) -> &Polytope {
        &self.y_space
    }

    pub fn region(&self) -> &Polytope {
        &self.region
    }

    pub fn x_dim(&self) -> usize {
        self.x_space.dim()
    }

    /// Diameter of `X × Χ`.
    pub fn ambient_diameter(&self) -> f64 {
        self.x_space.diameter().hypot(self.y_space.diameter())
    }

    /// `W₂(δ_z, {δ_c : c ∈ D}) = d(z, D)`.
    pub fn distance(&self, z: &[f64]) -> f64 {
        self.region.distance(z)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HatState {
    theta_hat: DiscreteMeasure,
    x_bar: Vec<f64>,
    y_bar: Vec<f64>,
    n: usize,
}

impl HatState {
    /// State after the first stage.
    pub fn start(x: &[f64], y: &[f64]) -> Self {
        HatState {
            theta_hat: DiscreteMeasure::dirac(linalg::concat(x, y)),
            x_bar: x.to_vec(),
            y_bar: y.to_vec(),
            n: 1,
        }
    }

    pub fn theta_hat(&self) -> &DiscreteMeasure {
        &self.theta_hat
    }

    pub fn x_bar(&self) -> &[f64] {
        &self.x_bar
    }

    pub fn y_bar(&self) -> &[f64] {
        &self.y_bar
    }

    pub fn point(&self) -> Vec<f64> {
        linalg::concat(&self.x_bar, &self.y_bar)
    }

    pub fn stage(&self) -> usize {
        self.n
    }
}

/// `θ̂_{n+1} = σ_{1/(n+1)} ♯ γ` with `γ` optimal from `θ̂_n` to
/// `δ_(x_new, y_new)`. The result is checked against the running-mean update.
pub fn hat_update(state: &HatState, x_new: &[f64], y_new: &[f64]) -> Result<HatState> {
    if x_new.len() != state.x_bar.len() || y_new.len() != state.y_bar.len() {
        return Err(invalid("new outcome has the wrong dimensions"));
    }
    let t = 1.0 / (state.n + 1) as f64;
    let sol = w2(&state.theta_hat, &DiscreteMeasure::dirac(linalg::concat(x_new, y_new)))?;
    let theta_hat = interpolate_along(&sol, t)?;
    let step = |bar: &[f64], new: &[f64]| -> Vec<f64> { bar.iter().zip(new).map(|(b, v)| b + (v - b) * t).collect() };
    let x_bar = step(&state.x_bar, x_new);
    let y_bar = step(&state.y_bar, y_new);
    let mean = linalg::concat(&x_bar, &y_bar);
    if theta_hat.len() == 1 {
        let gap = linalg::max_abs_diff(&theta_hat.atoms()[0], &mean);
        if gap > 1e-12 {
            return Err(Error::Numerical(format!("interpolated outcome drifted {gap:.3e} from the running mean")));
        }
    }
    Ok(HatState { theta_hat, x_bar, y_bar, n: state.n + 1 })
}

/// `Σ_z w(z) <p̄(z), z - (x, y)>` over the atoms of `theta_under`.
pub fn gradient_normal_inner(theta_under: &DiscreteMeasure, pbar: &[Vec<f64>], x: &[f64], y: &[f64]) -> Result<f64> {
    let xy = linalg::concat(x, y);
    if pbar.len() != theta_under.len() || xy.len() != theta_under.dim() || pbar.iter().any(|p| p.len() != xy.len()) {
        return Err(invalid("normal field, measure and point dimensions disagree"));
    }
    Ok(theta_under
        .atoms()
        .iter()
        .zip(theta_under.weights())
        .zip(pbar)
        .map(|((z, w), p)| w * linalg::dot(p, &linalg::sub(z, &xy)))
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct HatResponse {
    pub x: Vec<f64>,
    /// Projection of the running point onto `D`.
    pub projection: Vec<f64>,
    /// `running point - projection`.
    pub q: Vec<f64>,
    /// `min_x max_y <q, (x, y) - projection>`; nonpositive certifies the
    /// inner-product condition.
    pub slack: f64,
    pub distance: f64,
}

/// Minimiser over `X` of `max_{y ∈ Χ} <q, (x, y) - proj>`. The objective is
/// separable, so the minimiser is a vertex of `X` and the maximiser a vertex
/// of `Χ`.
pub fn hat_b_response(state: &HatState, target: &DisplacementTarget) -> Result<HatResponse> {
    let z = state.point();
    if z.len() != target.region.dim() {
        return Err(invalid("state dimension differs from the target"));
    }
    let (proj, distance) = target.region.project(&z);
    let xs = target.x_space.vertices();
    if distance <= 1e-12 {
        return Ok(HatResponse { x: xs[0].clone(), projection: proj, q: vec![0.0; z.len()], slack: -distance, distance });
    }
    let q = linalg::sub(&z, &proj);
    let (qx, qy) = q.split_at(target.x_dim());
    let mut best = 0;
    for (i, v) in xs.iter().enumerate() {
        if linalg::dot(qx, v) < linalg::dot(qx, &xs[best]) - 1e-15 {
            best = i;
        }
    }
    let y_term = target.y_space.support(qy);
    let slack = linalg::dot(qx, &xs[best]) + y_term - linalg::dot(&q, &proj);
    Ok(HatResponse { x: xs[best].clone(), projection: proj, q, slack, distance })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPointCheck {
    pub y: Vec<f64>,
    pub x: Option<Vec<f64>>,
    /// `min_x d((x, y), D)` when no `x` works.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem5Report {
    pub approachable: bool,
    pub points: Vec<GridPointCheck>,
    pub witness: Option<usize>,
    pub delta: Option<f64>,
}

/// For each grid point `y` of `Χ` (a simplex grid over its vertices), is
/// there `x ∈ X` with `(x, y) ∈ D`? The set of such `y` is convex, so the
/// grid verdict is exact as soon as the vertices of `Χ` are on the grid.
pub fn theorem5_check(target: &DisplacementTarget, grid_density: usize) -> Result<Theorem5Report> {
    let vy = target.y_space.vertices();
    let dx = target.x_dim();
    let grid = SimplexGrid::new(vy.len(), grid_density.max(1));
    let mut points = Vec::with_capacity(grid.len());
    for l in grid.points() {
        let mut y = vec![0.0; target.y_space.dim()];
        for (w, v) in l.iter().zip(vy) {
            linalg::axpy(&mut y, *w, v);
        }
        let mut lp = LinearProgram::new(dx);
        for i in 0..dx {
            lp.set_free(i);
        }
        for h in target.x_space.halfspaces() {
            lp.add_dense(&h.a, Relation::Le, h.b);
        }
        for h in target.region.halfspaces() {
            let (ax, ay) = h.a.split_at(dx);
            lp.add_dense(ax, Relation::Le, h.b - linalg::dot(ay, &y));
        }
        let check = match lp.feasible_point() {
            Ok(x) => GridPointCheck { y, x: Some(x), delta: None },
            Err(Error::Infeasible(_)) => {
                let slice: Vec<Vec<f64>> = target.x_space.vertices().iter().map(|v| linalg::concat(v, &y)).collect();
                let d = hull_distance(&slice, target.region.vertices());
                GridPointCheck { y, x: None, delta: Some(d) }
            }
            Err(e) => return Err(e),
        };
        points.push(check);
    }
    let witness = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.delta.map(|d| (i, d)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((i, d)),
        });
    Ok(Theorem5Report {
        approachable: witness.is_none(),
        points,
        witness: witness.map(|w| w.0),
        delta: witness.map(|w| w.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Halfspace;

    fn region(extra: &[Halfspace]) -> Polytope {
        Polytope::halfspaces_in_box(extra, &[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn diagonal() -> Polytope {
        Polytope::from_vertices(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn example1_is_convex() {
        assert!(matches!(is_convex_game(&Game::example1(), 200, 1e-9, 3).unwrap(), ConvexityReport::Convex { .. }));
    }

    #[test]
    fn separable_full_monitoring_is_convex_but_xor_is_not() {
        // ρ(i, j) = f(i) + g(j)
        let f = [[0.0, 1.0], [2.0, -1.0]];
        let g = [[1.0, 1.0], [0.0, 3.0], [-2.0, 0.5]];
        let payoffs = f
            .iter()
            .map(|fi| g.iter().map(|gj| vec![fi[0] + gj[0], fi[1] + gj[1]]).collect())
            .collect();
        let sep = Game::full_monitoring(payoffs).unwrap();
        assert!(matches!(is_convex_game(&sep, 200, 1e-9, 5).unwrap(), ConvexityReport::Convex { .. }));

        let xor = Game::full_monitoring(vec![vec![vec![-0.5], vec![0.5]], vec![vec![0.5], vec![-0.5]]]).unwrap();
        assert!(matches!(is_convex_game(&xor, 200, 1e-9, 5).unwrap(), ConvexityReport::Counterexample { .. }));
    }

    #[test]
    fn update_is_running_mean() {
        let s = HatState::start(&[0.0], &[0.0]);
        let s = hat_update(&s, &[1.0], &[1.0]).unwrap();
        assert_eq!(s.theta_hat().atoms(), &[vec![0.5, 0.5]]);
        let s = hat_update(&s, &[2.0], &[-1.0]).unwrap();
        assert!((s.x_bar()[0] - 1.0).abs() < 1e-15);
        let before = s.point();
        let s = hat_update(&s, &before[..1], &before[1..]).unwrap();
        assert!(linalg::max_abs_diff(&s.point(), &before) < 1e-15);
    }

    #[test]
    fn gradient_inner_examples() {
        let u = vec![1.0, 2.0];
        let v = vec![0.5, -1.0];
        let d = DiscreteMeasure::dirac(u.clone());
        let p = linalg::sub(&u, &v);
        assert_eq!(gradient_normal_inner(&d, &[vec![0.0, 0.0]], &[3.0], &[4.0]).unwrap(), 0.0);
        let n2 = linalg::dot(&p, &p);
        assert!((gradient_normal_inner(&d, &[p.clone()], &v[..1], &v[1..]).unwrap() - n2).abs() < 1e-12);
        // reflecting v through u reverses the sign
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.0 * a - b).collect();
        assert!((gradient_normal_inner(&d, &[p], &w[..1], &w[1..]).unwrap() + n2).abs() < 1e-12);
    }

    #[test]
    fn response_drives_toward_region() {
        // D = {u ≥ v}
        let t = DisplacementTarget::in_unit_boxes(1, 1, region(&[Halfspace::new(vec![-1.0, 1.0], 0.0).unwrap()])).unwrap();
        let s = HatState::start(&[0.0], &[1.0]);
        let r = hat_b_response(&s, &t).unwrap();
        assert_eq!(r.x, vec![1.0]);
        assert!(r.slack <= 1e-12);
        let inside = HatState::start(&[1.0], &[0.0]);
        let r = hat_b_response(&inside, &t).unwrap();
        assert_eq!(r.x, t.x_space().vertices()[0]);
    }

    #[test]
    fn theorem5_examples() {
        let full = DisplacementTarget::in_unit_boxes(1, 1, Polytope::unit_cube(2)).unwrap();
        assert!(theorem5_check(&full, 4).unwrap().approachable);
        let diag = DisplacementTarget::in_unit_boxes(1, 1, diagonal()).unwrap();
        let rep = theorem5_check(&diag, 4).unwrap();
        assert!(rep.approachable);
        for p in &rep.points {
            assert!((p.x.as_ref().unwrap()[0] - p.y[0]).abs() < 1e-9);
        }
        let low = DisplacementTarget::in_unit_boxes(1, 1, region(&[Halfspace::new(vec![0.0, 1.0], 0.25).unwrap()])).unwrap();
        let rep = theorem5_check(&low, 4).unwrap();
        assert!(!rep.approachable);
        let w = &rep.points[rep.witness.unwrap()];
        assert_eq!(w.y, vec![1.0]);
        assert!((rep.delta.unwrap() - 0.75).abs() < 1e-9);
    }
}
