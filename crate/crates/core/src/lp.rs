//! Dense two-phase primal simplex.
//!
//! Problems in this crate are small (at most a few thousand columns and a
//! hundred rows), so a dense tableau is adequate. Entering columns follow
//! Dantzig's rule; after a run of degenerate pivots the solver switches to
//! Bland's rule until progress resumes, which rules out cycling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

/// `minimize c·x` subject to linear rows, with `x >= 0` unless a variable is
/// marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row, in insertion order, with `c - Aᵀy` of the
    /// sign required by each variable (zero on free variables) and `y·b`
    /// equal to the optimum.
    pub duals: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 200_000;
const DEGENERATE_STREAK: usize = 50;

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { n_vars, objective: vec![0.0; n_vars], free: vec![false; n_vars], rows: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set_cost(&mut self, var: usize, c: f64) {
        self.objective[var] = c;
    }

    pub fn set_objective(&mut self, c: &[f64]) {
        assert_eq!(c.len(), self.n_vars);
        self.objective.copy_from_slice(c);
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn add_dense(&mut self, coeffs: &[f64], rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n_vars);
        let sparse = coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| (i, *c)).collect();
        self.rows.push(Row { coeffs: sparse, rel, rhs });
    }

    pub fn add_sparse(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|(i, _)| *i < self.n_vars));
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Finds any feasible point.
    pub fn feasible_point(&self) -> Result<Vec<f64>> {
        let mut lp = self.clone();
        lp.objective.iter_mut().for_each(|c| *c = 0.0);
        lp.minimize().map(|s| s.x)
    }

    pub fn minimize(&self) -> Result<LpSolution> {
        Tableau::build(self)?.solve(self)
    }
}

struct Tableau {
    m: usize,
    width: usize, // columns + rhs
    t: Vec<f64>,
    basis: Vec<usize>,
    /// structural column of each original variable, and its negative part
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
    artificial: Vec<bool>,
    /// column holding `e_r` initially for each row, and whether the row was
    /// negated
    unit_col: Vec<usize>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let mut ncols = 0;
        let mut pos_col = Vec::with_capacity(lp.n_vars);
        let mut neg_col = Vec::with_capacity(lp.n_vars);
        for j in 0..lp.n_vars {
            pos_col.push(ncols);
            ncols += 1;
            if lp.free[j] {
                neg_col.push(Some(ncols));
                ncols += 1;
            } else {
                neg_col.push(None);
            }
        }
        // normalise rows to nonnegative rhs
        let rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let rel = match r.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (r.coeffs.iter().map(|(i, c)| (*i, -c)).collect(), rel, -r.rhs)
                } else {
                    (r.coeffs.clone(), r.rel, r.rhs)
                }
            })
            .collect();
        let mut extra = Vec::with_capacity(rows.len());
        for (_, rel, _) in &rows {
            match rel {
                Relation::Le => {
                    extra.push((Some(ncols), None));
                    ncols += 1;
                }
                Relation::Ge => {
                    extra.push((Some(ncols), Some(ncols + 1)));
                    ncols += 2;
                }
                Relation::Eq => {
                    extra.push((None, Some(ncols)));
                    ncols += 1;
                }
            }
        }
        let m = rows.len();
        let width = ncols + 1;
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut artificial = vec![false; ncols];
        let mut unit_col = vec![0; m];
        let flipped: Vec<bool> = lp.rows.iter().map(|r| r.rhs < 0.0).collect();
        for (r, ((coeffs, rel, rhs), (slack, art))) in rows.iter().zip(&extra).enumerate() {
            let row = &mut t[r * width..(r + 1) * width];
            for &(j, c) in coeffs {
                if !c.is_finite() {
                    return Err(Error::Numerical("non-finite LP coefficient".into()));
                }
                row[pos_col[j]] += c;
                if let Some(nc) = neg_col[j] {
                    row[nc] -= c;
                }
            }
            row[width - 1] = *rhs;
            match rel {
                Relation::Le => {
                    row[slack.unwrap()] = 1.0;
                    basis[r] = slack.unwrap();
                }
                Relation::Ge => {
                    row[slack.unwrap()] = -1.0;
                    row[art.unwrap()] = 1.0;
                    basis[r] = art.unwrap();
                    artificial[art.unwrap()] = true;
                }
                Relation::Eq => {
                    row[art.unwrap()] = 1.0;
                    basis[r] = art.unwrap();
                    artificial[art.unwrap()] = true;
                }
            }
            unit_col[r] = basis[r];
        }
        Ok(Tableau { m, width, t, basis, pos_col, neg_col, artificial, unit_col, flipped })
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; self.width];
        d[..cost.len()].copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.width..(r + 1) * self.width];
                for (dj, tj) in d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        d
    }

    fn pivot(&mut self, d: &mut [f64], r: usize, j: usize) {
        let w = self.width;
        let p = self.t[r * w + j];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[j];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[j] = 0.0;
            }
        }
        let f = d[j];
        if f != 0.0 {
            for (a, b) in d.iter_mut().zip(prow.iter()) {
                *a -= f * b;
            }
            d[j] = 0.0;
        }
        self.basis[r] = j;
    }

    fn run(&mut self, d: &mut [f64], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        let w = self.width;
        let ncols = w - 1;
        let mut streak = 0usize;
        for _ in 0..MAX_ITERS {
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..ncols {
                if d[j] < best && allowed(j) {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d[j];
                }
            }
            let Some(j) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[r * w + j];
                if a > PIVOT_TOL {
                    let ratio = self.t[r * w + ncols].max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return Err(Error::Unbounded) };
            streak = if ratio <= 1e-12 { streak + 1 } else { 0 };
            self.pivot(d, r, j);
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let w = self.width;
        let ncols = w - 1;
        if self.artificial.iter().any(|a| *a) {
            let c1: Vec<f64> = (0..ncols).map(|j| if self.artificial[j] { 1.0 } else { 0.0 }).collect();
            let mut d = self.reduced_costs(&c1);
            self.run(&mut d, &|_| true)?;
            let infeas = -d[ncols];
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if infeas > FEAS_TOL * scale {
                return Err(Error::Infeasible(format!("phase-one residual {infeas:.3e}")));
            }
            // drive remaining artificials out of the basis
            for r in 0..self.m {
                if self.artificial[self.basis[r]] {
                    let pick = (0..ncols)
                        .filter(|&j| !self.artificial[j])
                        .max_by(|&a, &b| self.t[r * w + a].abs().total_cmp(&self.t[r * w + b].abs()));
                    if let Some(j) = pick {
                        if self.t[r * w + j].abs() > PIVOT_TOL {
                            self.pivot(&mut d, r, j);
                        }
                    }
                }
            }
        }
        let mut c2 = vec![0.0; ncols];
        for j in 0..lp.n_vars {
            c2[self.pos_col[j]] = lp.objective[j];
            if let Some(nc) = self.neg_col[j] {
                c2[nc] = -lp.objective[j];
            }
        }
        let mut d = self.reduced_costs(&c2);
        let artificial = self.artificial.clone();
        self.run(&mut d, &|j| !artificial[j])?;

        let mut col_val = vec![0.0; ncols];
        for r in 0..self.m {
            col_val[self.basis[r]] = self.t[r * w + ncols];
        }
        let x: Vec<f64> = (0..lp.n_vars)
            .map(|j| col_val[self.pos_col[j]] - self.neg_col[j].map_or(0.0, |c| col_val[c]))
            .collect();
        let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        let duals = (0..self.m)
            .map(|r| {
                let y = -d[self.unit_col[r]];
                if self.flipped[r] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(LpSolution { x, objective, duals })
    }
}

#[derive(Clone, Debug)]
pub struct MatrixGameSolution {
    pub strategy: Vec<f64>,
    pub value: f64,
}

/// Solves `min over x in Δ(rows) of max over columns j of Σ_i x_i a[i][j]`.
/// The returned value is recomputed from the cleaned strategy, so it is the
/// exact worst-case loss of that strategy.
pub fn solve_min_max(a: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let n = a.len();
    if n == 0 || a[0].is_empty() {
        return Err(Error::InvalidArgument("empty matrix game".into()));
    }
    let cols = a[0].len();
    let v = n;
    let mut lp = LinearProgram::new(n + 1);
    lp.set_free(v);
    lp.set_cost(v, 1.0);
    for j in 0..cols {
        let mut coeffs: Vec<(usize, f64)> = (0..n).map(|i| (i, a[i][j])).collect();
        coeffs.push((v, -1.0));
        lp.add_sparse(coeffs, Relation::Le, 0.0);
    }
    lp.add_sparse((0..n).map(|i| (i, 1.0)).collect(), Relation::Eq, 1.0);
    let sol = lp.minimize()?;
    let strategy = clean_distribution(&sol.x[..n]);
    let value = (0..cols)
        .map(|j| (0..n).map(|i| strategy[i] * a[i][j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MatrixGameSolution { strategy, value })
}

/// Clamps tiny negative entries and renormalises onto the simplex.
pub fn clean_distribution(w: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = w.iter().map(|x| if *x < 0.0 { 0.0 } else { *x }).collect();
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x /= s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[-3.0, -5.0]);
        lp.add_dense(&[1.0, 0.0], Relation::Le, 4.0);
        lp.add_dense(&[0.0, 2.0], Relation::Le, 12.0);
        lp.add_dense(&[3.0, 2.0], Relation::Le, 18.0);
        let s = lp.minimize().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn duals_of_mixed_rows() {
        // min x + 2y s.t. x + y >= 1, x <= 0.4, -y <= -0.1 (flipped row)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 2.0]);
        lp.add_dense(&[1.0, 1.0], Relation::Ge, 1.0);
        lp.add_dense(&[1.0, 0.0], Relation::Le, 0.4);
        lp.add_dense(&[0.0, -1.0], Relation::Le, -0.1);
        let s = lp.minimize().unwrap();
        assert!((s.objective - 1.6).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
        assert!((s.duals[1] + 1.0).abs() < 1e-9);
        assert!(s.duals[2].abs() < 1e-9);
        let textbook = {
            let mut lp = LinearProgram::new(2);
            lp.set_objective(&[-3.0, -5.0]);
            lp.add_dense(&[1.0, 0.0], Relation::Le, 4.0);
            lp.add_dense(&[0.0, 2.0], Relation::Le, 12.0);
            lp.add_dense(&[3.0, 2.0], Relation::Le, 18.0);
            lp.minimize().unwrap()
        };
        // y·b equals the optimum
        let yb = textbook.duals[0] * 4.0 + textbook.duals[1] * 12.0 + textbook.duals[2] * 18.0;
        assert!((yb - textbook.objective).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, x >= 0.25
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[-1.0, 2.0]);
        lp.add_dense(&[1.0, 1.0], Relation::Eq, 1.0);
        lp.add_dense(&[1.0, 0.0], Relation::Ge, 0.25);
        let s = lp.minimize().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-9 && s.x[1].abs() < 1e-9);
    }

    #[test]
    fn free_variables_and_negative_rhs() {
        // min z s.t. z >= -3, z free
        let mut lp = LinearProgram::new(1);
        lp.set_free(0);
        lp.set_cost(0, 1.0);
        lp.add_dense(&[1.0], Relation::Ge, -3.0);
        let s = lp.minimize().unwrap();
        assert!((s.x[0] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_dense(&[1.0], Relation::Ge, 2.0);
        lp.add_dense(&[1.0], Relation::Le, 1.0);
        assert!(matches!(lp.minimize(), Err(Error::Infeasible(_))));

        let mut lp = LinearProgram::new(1);
        lp.set_cost(0, -1.0);
        assert!(matches!(lp.minimize(), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 0.0]);
        lp.add_dense(&[1.0, 1.0], Relation::Eq, 1.0);
        lp.add_dense(&[2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.minimize().unwrap();
        assert!(s.x[0].abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matching_pennies() {
        let g = solve_min_max(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!((g.strategy[0] - 0.5).abs() < 1e-9);
        assert!(g.value.abs() < 1e-9);
    }

    #[test]
    fn dominated_row() {
        let g = solve_min_max(&[vec![3.0, 4.0], vec![1.0, 2.0]]).unwrap();
        assert!((g.strategy[1] - 1.0).abs() < 1e-12);
        assert!((g.value - 2.0).abs() < 1e-12);
    }
}
