//! Discrete optimal transport between finitely supported measures.
//!
//! Plans and Kantorovich potentials come from an exact transportation
//! simplex (spanning-tree bases, Dantzig pricing with a Bland fallback).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, dist, dist2};
use crate::lp::{clean_distribution, LinearProgram, Relation};

const ATOM_TOL: f64 = 1e-12;
const DUALITY_TOL: f64 = 1e-8;

/// Finitely supported probability measure on `ℝ^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates, renormalises, and merges atoms closer than 1e-12 (first
    /// appearance wins the position). Zero-weight atoms are kept.
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(invalid("measure needs as many weights as atoms, at least one"));
        }
        let dim = atoms[0].len();
        if atoms.iter().any(|a| a.len() != dim || a.iter().any(|x| !x.is_finite())) {
            return Err(invalid("measure atoms must be finite and share a dimension"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-12) {
            return Err(invalid("measure weights must be nonnegative"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("measure weights sum to {s}, not 1")));
        }
        let mut out_atoms: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut out_w: Vec<f64> = Vec::with_capacity(atoms.len());
        for (a, w) in atoms.into_iter().zip(weights) {
            match out_atoms.iter().position(|b| linalg::max_abs_diff(&a, b) <= ATOM_TOL) {
                Some(p) => out_w[p] += w.max(0.0),
                None => {
                    out_atoms.push(a);
                    out_w.push(w.max(0.0));
                }
            }
        }
        let s: f64 = out_w.iter().sum();
        out_w.iter_mut().for_each(|w| *w /= s);
        Ok(DiscreteMeasure { atoms: out_atoms, weights: out_w })
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        DiscreteMeasure { atoms: vec![point], weights: vec![1.0] }
    }

    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        DiscreteMeasure::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            linalg::axpy(&mut m, *w, a);
        }
        m
    }

    /// Weight of the atom equal (within 1e-12) to `point`, zero if absent.
    pub fn mass_at(&self, point: &[f64]) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| linalg::max_abs_diff(a, point) <= ATOM_TOL)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialises")
    }
}

#[derive(Clone, Debug)]
pub struct TransportPlan {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    /// `coupling[i][j]` is the mass moved from source atom `i` to target
    /// atom `j`.
    pub coupling: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub squared_cost: f64,
    pub plan: TransportPlan,
    pub potential_phi: Vec<f64>,
    pub potential_psi: Vec<f64>,
    /// Index of the source atom where `φ` is pinned to zero.
    pub anchor: usize,
}

impl TransportSolution {
    pub fn duality_gap(&self) -> f64 {
        let d: f64 = linalg::dot(&self.potential_phi, self.plan.source.weights())
            + linalg::dot(&self.potential_psi, self.plan.target.weights());
        (d - self.squared_cost).abs()
    }

    /// Atomwise barycentric displacement `p(x) = x - E_γ[y | x]` on source
    /// atoms with positive mass (zero elsewhere).
    pub fn barycentric_field(&self) -> Vec<Vec<f64>> {
        let src = &self.plan.source;
        let tgt = &self.plan.target;
        src.atoms()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let w = src.weights()[i];
                if w <= 0.0 {
                    return vec![0.0; x.len()];
                }
                let mut m = vec![0.0; x.len()];
                for (j, y) in tgt.atoms().iter().enumerate() {
                    linalg::axpy(&mut m, self.plan.coupling[i][j] / w, y);
                }
                linalg::sub(x, &m)
            })
            .collect()
    }
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(invalid(format!("measures live in dimensions {} and {}", mu.dim(), nu.dim())));
    }
    Ok(())
}

/// Quadratic-cost optimal transport.
pub fn w2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportSolution> {
    check_dims(mu, nu)?;
    solve(mu, nu, dist2)
}

/// `W₁(μ, ν)` with Euclidean ground cost.
pub fn w1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_dims(mu, nu)?;
    Ok(solve(mu, nu, dist)?.squared_cost)
}

/// `W₂(μ, ν)` as a distance.
pub fn w2_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(w2(mu, nu)?.squared_cost.max(0.0).sqrt())
}

fn solve(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: fn(&[f64], &[f64]) -> f64) -> Result<TransportSolution> {
    let cost: Vec<Vec<f64>> = mu.atoms().iter().map(|x| nu.atoms().iter().map(|y| c(x, y)).collect()).collect();
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu.weights()[j] > 0.0).collect();
    let sub_cost: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| cost[i][j]).collect()).collect();
    let a: Vec<f64> = rows.iter().map(|&i| mu.weights()[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| nu.weights()[j]).collect();
    let core = network_simplex(&a, &b, &sub_cost)?;

    let (m, n) = (mu.len(), nu.len());
    let mut coupling = vec![vec![0.0; n]; m];
    let mut phi = vec![f64::NAN; m];
    let mut psi = vec![f64::NAN; n];
    for (ri, &i) in rows.iter().enumerate() {
        phi[i] = core.u[ri];
        for (cj, &j) in cols.iter().enumerate() {
            coupling[i][j] = core.flow[ri][cj];
        }
    }
    for (cj, &j) in cols.iter().enumerate() {
        psi[j] = core.v[cj];
    }
    // c-transforms extend the potentials to zero-mass atoms
    for i in 0..m {
        if phi[i].is_nan() {
            phi[i] = cols.iter().map(|&j| cost[i][j] - psi[j]).fold(f64::INFINITY, f64::min);
        }
    }
    for j in 0..n {
        if psi[j].is_nan() {
            psi[j] = (0..m).map(|i| cost[i][j] - phi[i]).fold(f64::INFINITY, f64::min);
        }
    }
    let anchor = (0..m).min_by(|&x, &y| linalg::lex_cmp(&mu.atoms()[x], &mu.atoms()[y])).unwrap();
    let shift = phi[anchor];
    phi.iter_mut().for_each(|p| *p -= shift);
    psi.iter_mut().for_each(|p| *p += shift);

    let squared_cost: f64 = (0..m).map(|i| (0..n).map(|j| coupling[i][j] * cost[i][j]).sum::<f64>()).sum();
    let sol = TransportSolution {
        squared_cost,
        plan: TransportPlan { source: mu.clone(), target: nu.clone(), coupling },
        potential_phi: phi,
        potential_psi: psi,
        anchor,
    };
    let scale = cost.iter().flatten().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let gap = sol.duality_gap();
    if gap > DUALITY_TOL * scale {
        return Err(Error::Numerical(format!("transport duality gap {gap:.3e}")));
    }
    for i in 0..m {
        for j in 0..n {
            let excess = sol.potential_phi[i] + sol.potential_psi[j] - cost[i][j];
            if excess > DUALITY_TOL * scale {
                return Err(Error::Numerical(format!("transport potentials infeasible by {excess:.3e}")));
            }
        }
    }
    Ok(sol)
}

struct CoreSolution {
    flow: Vec<Vec<f64>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

/// Transportation simplex on strictly positive supplies and demands.
fn network_simplex(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> Result<CoreSolution> {
    let (m, n) = (a.len(), b.len());
    let mut flow = vec![vec![0.0; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);

    // north-west corner start: m + n - 1 cells forming a spanning tree
    let mut s = a.to_vec();
    let mut d = b.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let q = s[i].min(d[j]).max(0.0);
        flow[i][j] = q;
        basic[i][j] = true;
        basis.push((i, j));
        s[i] -= q;
        d[j] -= q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let scale = cost.iter().flatten().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let rc_tol = 1e-12 * scale;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut degenerate = 0usize;
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_iter {
        // tree adjacency: nodes 0..m rows, m..m+n columns
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for &(r, c) in &basis {
            adj[r].push(m + c);
            adj[m + c].push(r);
        }
        // potentials by traversal from row 0
        let mut seen = vec![false; m + n];
        let mut stack = vec![0usize];
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &nb in &adj[node] {
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                if node < m {
                    v[nb - m] = cost[node][nb - m] - u[node];
                } else {
                    u[nb] = cost[nb][node - m] - v[node - m];
                }
                stack.push(nb);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Numerical("transport basis is not a spanning tree".into()));
        }
        // pricing
        let bland = degenerate > 2 * (m + n);
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -rc_tol;
        'price: for r in 0..m {
            for c in 0..n {
                if basic[r][c] {
                    continue;
                }
                let rc = cost[r][c] - u[r] - v[c];
                if rc < best {
                    enter = Some((r, c));
                    if bland {
                        break 'price;
                    }
                    best = rc;
                }
            }
        }
        let Some((er, ec)) = enter else {
            return Ok(CoreSolution { flow, u, v });
        };
        // tree path from column node ec to row node er
        let mut parent = vec![usize::MAX; m + n];
        let mut stack = vec![er];
        parent[er] = er;
        while let Some(node) = stack.pop() {
            if node == m + ec {
                break;
            }
            for &nb in &adj[node] {
                if parent[nb] == usize::MAX {
                    parent[nb] = node;
                    stack.push(nb);
                }
            }
        }
        let mut cycle: Vec<(usize, usize)> = Vec::new();
        let mut node = m + ec;
        while node != er {
            let p = parent[node];
            let cell = if node >= m { (p, node - m) } else { (node, p - m) };
            cycle.push(cell);
            node = p;
        }
        // cycle[0], cycle[2], ... lose flow; cycle[1], cycle[3], ... gain
        let mut theta = f64::INFINITY;
        let mut leave = 0usize;
        for (k, &(r, c)) in cycle.iter().enumerate().step_by(2) {
            let f = flow[r][c];
            let better = f < theta - 1e-15
                || (f <= theta + 1e-15 && (r * n + c) < (cycle[leave].0 * n + cycle[leave].1));
            if better {
                theta = f;
                leave = k;
            }
        }
        theta = theta.max(0.0);
        degenerate = if theta <= 1e-15 { degenerate + 1 } else { 0 };
        for (k, &(r, c)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                flow[r][c] = (flow[r][c] - theta).max(0.0);
            } else {
                flow[r][c] += theta;
            }
        }
        let (lr, lc) = cycle[leave];
        flow[lr][lc] = 0.0;
        basic[lr][lc] = false;
        let pos = basis.iter().position(|&x| x == (lr, lc)).unwrap();
        basis[pos] = (er, ec);
        basic[er][ec] = true;
        flow[er][ec] = theta;
    }
    Err(Error::Numerical("transport simplex iteration limit reached".into()))
}

/// Pushes `mu` forward through `map`, merging coinciding images.
pub fn pushforward(map: impl Fn(&[f64]) -> Vec<f64>, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(mu.atoms().iter().map(|a| map(a)).collect(), mu.weights().to_vec())
}

/// `σ_t ♯ γ` with `σ_t(x, y) = (1 - t) x + t y` and `γ` an optimal plan.
pub fn displacement_interpolate(mu: &DiscreteMeasure, nu: &DiscreteMeasure, t: f64) -> Result<DiscreteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("interpolation time {t} outside [0, 1]")));
    }
    check_dims(mu, nu)?;
    if t == 0.0 {
        return Ok(mu.clone());
    }
    if t == 1.0 {
        return Ok(nu.clone());
    }
    let sol = w2(mu, nu)?;
    interpolate_along(&sol, t)
}

/// Pushes an existing plan forward by `σ_t`.
pub fn interpolate_along(sol: &TransportSolution, t: f64) -> Result<DiscreteMeasure> {
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (i, x) in sol.plan.source.atoms().iter().enumerate() {
        for (j, y) in sol.plan.target.atoms().iter().enumerate() {
            let g = sol.plan.coupling[i][j];
            if g > 0.0 {
                atoms.push(x.iter().zip(y).map(|(a, b)| (1.0 - t) * a + t * b).collect());
                weights.push(g);
            }
        }
    }
    DiscreteMeasure::new(atoms, weights)
}

/// Product measure on concatenated coordinates.
pub fn product_measure(x: &DiscreteMeasure, xi: &DiscreteMeasure) -> DiscreteMeasure {
    let mut atoms = Vec::with_capacity(x.len() * xi.len());
    let mut weights = Vec::with_capacity(x.len() * xi.len());
    for (a, wa) in x.atoms().iter().zip(x.weights()) {
        for (b, wb) in xi.atoms().iter().zip(xi.weights()) {
            atoms.push(linalg::concat(a, b));
            weights.push(wa * wb);
        }
    }
    DiscreteMeasure { atoms, weights }
}

/// Linear constraint `Σ_j coeffs[j] ν_j  rel  rhs` on target weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// W₂-projection of `mu` onto measures on `support` whose weights satisfy
/// `constraints`: one linear program over couplings with free second
/// marginal, followed by an exact transport solve for plan and potentials.
pub fn project_measure(
    mu: &DiscreteMeasure,
    support: &[Vec<f64>],
    constraints: &[LinearConstraint],
) -> Result<(DiscreteMeasure, TransportSolution)> {
    project_measure_with_normal(mu, support, constraints).map(|(nu, ts, _)| (nu, ts))
}

/// As `project_measure`, also returning the potential `ψ` on `support` built
/// from the constraint multipliers of the projection program,
/// `ψ_j = Σ_l μ_l coeffs_l[j]`. Together with the row multipliers it is an
/// optimal Kantorovich pair between `mu` and the projection `ν`, and
/// `∫ψ d(ν' - ν) ≥ 0` for every feasible `ν'`.
pub fn project_measure_with_normal(
    mu: &DiscreteMeasure,
    support: &[Vec<f64>],
    constraints: &[LinearConstraint],
) -> Result<(DiscreteMeasure, TransportSolution, Vec<f64>)> {
    let n = support.len();
    if n == 0 || support.iter().any(|s| s.len() != mu.dim()) {
        return Err(invalid("projection support must be nonempty and match the measure dimension"));
    }
    if constraints.iter().any(|c| c.coeffs.len() != n) {
        return Err(invalid("constraint length differs from the support size"));
    }
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let nv = rows.len() * n;
    let mut lp = LinearProgram::new(nv);
    for (r, &i) in rows.iter().enumerate() {
        for (j, y) in support.iter().enumerate() {
            lp.set_cost(r * n + j, dist2(&mu.atoms()[i], y));
        }
        lp.add_sparse((0..n).map(|j| (r * n + j, 1.0)).collect(), Relation::Eq, mu.weights()[i]);
    }
    for c in constraints {
        let coeffs: Vec<(usize, f64)> = (0..rows.len())
            .flat_map(|r| c.coeffs.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (r * n + j, *v)))
            .collect();
        lp.add_sparse(coeffs, c.rel, c.rhs);
    }
    let sol = match lp.minimize() {
        Ok(s) => s,
        Err(Error::Infeasible(msg)) => return Err(Error::Infeasible(format!("measure constraints: {msg}"))),
        Err(e) => return Err(e),
    };
    let nu_w: Vec<f64> = (0..n).map(|j| (0..rows.len()).map(|r| sol.x[r * n + j]).sum()).collect();
    let nu = DiscreteMeasure::new(support.to_vec(), clean_distribution(&nu_w))?;
    let ts = w2(mu, &nu)?;
    let mut psi = vec![0.0; n];
    for (c, m) in constraints.iter().zip(&sol.duals[rows.len()..]) {
        for (p, a) in psi.iter_mut().zip(&c.coeffs) {
            *p += m * a;
        }
    }
    Ok((nu, ts, psi))
}

/// `ψ(b) = min_a [c(a, b) - φ(a)]` over source atoms with positive mass.
pub fn c_transform(sol: &TransportSolution, points: &[Vec<f64>]) -> Vec<f64> {
    let src = &sol.plan.source;
    points
        .iter()
        .map(|b| {
            src.atoms()
                .iter()
                .zip(src.weights())
                .zip(&sol.potential_phi)
                .filter(|((_, w), _)| **w > 0.0)
                .map(|((a, _), p)| dist2(a, b) - p)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
