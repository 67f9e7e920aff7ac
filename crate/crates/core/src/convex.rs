//! Euclidean convex geometry on polytopes: hulls, V/H conversion, Wolfe's
//! minimum-norm-point projection, distances, and targets made of unions of
//! polytopes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::lp::{LinearProgram, Relation};

const DEDUP_TOL: f64 = 1e-12;
const GEOM_TOL: f64 = 1e-9;

/// `<a, z> <= b` with `|a| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    /// Normalises the normal to unit length. A zero normal is rejected.
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        let n = norm(&a);
        if !(n > 0.0) || !b.is_finite() {
            return Err(invalid("halfspace needs a nonzero finite normal"));
        }
        Ok(Halfspace { a: a.iter().map(|x| x / n).collect(), b: b / n })
    }

    pub fn violation(&self, z: &[f64]) -> f64 {
        dot(&self.a, z) - self.b
    }
}

/// Result of Wolfe's algorithm: the point of minimum norm in the hull of a
/// point set, and convex weights on the inputs reproducing it.
#[derive(Clone, Debug)]
pub struct MinNormPoint {
    pub point: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Wolfe's minimum-norm-point algorithm on `conv(points)`.
pub fn min_norm_point(points: &[Vec<f64>]) -> MinNormPoint {
    assert!(!points.is_empty());
    let n = points.len();
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let gap_tol = 1e-15 * scale;
    let start = (0..n).min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b]))).unwrap();
    let mut support = vec![start];
    let mut lam = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * n + 100) {
        let (j, val) = (0..n)
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dot(&x, &x) - val <= gap_tol || support.contains(&j) {
            break;
        }
        support.push(j);
        lam.push(0.0);
        let mut stalled = false;
        loop {
            let Some(alpha) = affine_min(points, &support) else {
                stalled = true;
                break;
            };
            if alpha.iter().all(|a| *a > 1e-14) {
                lam = alpha;
                break;
            }
            let mut theta = f64::INFINITY;
            let mut drop = 0;
            for k in 0..support.len() {
                if alpha[k] <= 1e-14 {
                    let t = lam[k] / (lam[k] - alpha[k]);
                    if t < theta {
                        theta = t;
                        drop = k;
                    }
                }
            }
            for k in 0..support.len() {
                lam[k] = (1.0 - theta) * lam[k] + theta * alpha[k];
            }
            debug_assert!(theta <= 1.0 + 1e-12);
            lam[drop] = 0.0;
            let mut k = 0;
            while k < support.len() {
                if lam[k] <= 1e-14 {
                    support.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
        }
        x = combine(points, &support, &lam);
        if stalled {
            break;
        }
    }
    let mut weights = vec![0.0; n];
    for (k, &s) in support.iter().enumerate() {
        weights[s] = lam[k];
    }
    MinNormPoint { point: x, weights }
}

fn combine(points: &[Vec<f64>], support: &[usize], lam: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; points[0].len()];
    for (k, &s) in support.iter().enumerate() {
        linalg::axpy(&mut x, lam[k], &points[s]);
    }
    x
}

/// Minimum-norm point of the affine hull of `points[support]`, as affine
/// weights.
fn affine_min(points: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&points[support[i]], &points[support[j]]);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let sol = linalg::solve(&a, &rhs, 1e-13 * scale.max(1.0))?;
    Some(sol[..m].to_vec())
}

/// Euclidean projection of `z` onto `conv(vertices)`.
pub fn project_onto_hull(vertices: &[Vec<f64>], z: &[f64]) -> (Vec<f64>, f64) {
    let shifted: Vec<Vec<f64>> = vertices.iter().map(|v| sub(v, z)).collect();
    let mnp = min_norm_point(&shifted);
    let p = linalg::add(&mnp.point, z);
    let d = norm(&mnp.point);
    (p, d)
}

/// Distance between `conv(a)` and `conv(b)` via the difference set.
pub fn hull_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let diffs: Vec<Vec<f64>> = a.iter().flat_map(|u| b.iter().map(move |v| sub(u, v))).collect();
    norm(&min_norm_point(&diffs).point)
}

/// Hausdorff distance between two polytopes given by vertices. Exact
/// because the distance to a convex set is convex, so its maximum over a
/// polytope is attained at a vertex.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter().map(|p| project_onto_hull(to, p).1).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

pub fn dedup_points(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| linalg::max_abs_diff(p, q) <= tol) {
            out.push(p.clone());
        }
    }
    out
}

/// Affine hull of a point set: origin and an orthonormal basis of the
/// direction space.
pub fn affine_hull(points: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let o = points[0].clone();
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &o)).collect();
    let scale = diffs.iter().map(|d| norm(d)).fold(0.0, f64::max).max(1.0);
    (o, linalg::orthonormal_basis(&diffs, 1e-10 * scale))
}

/// Extreme points of `conv(points)`.
pub fn hull_vertices(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pts = dedup_points(points, DEDUP_TOL);
    if pts.len() <= 1 {
        return pts;
    }
    let (o, basis) = affine_hull(&pts);
    match basis.len() {
        0 => vec![pts[0].clone()],
        1 => {
            let t: Vec<f64> = pts.iter().map(|p| dot(&sub(p, &o), &basis[0])).collect();
            let lo = (0..pts.len()).min_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap();
            let hi = (0..pts.len()).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap();
            let mut v = vec![pts[lo].clone(), pts[hi].clone()];
            v.sort_by(|a, b| linalg::lex_cmp(a, b));
            v
        }
        2 => {
            let uv: Vec<[f64; 2]> = pts
                .iter()
                .map(|p| {
                    let d = sub(p, &o);
                    [dot(&d, &basis[0]), dot(&d, &basis[1])]
                })
                .collect();
            monotone_chain(&uv).into_iter().map(|i| pts[i].clone()).collect()
        }
        _ => {
            let scale = pts.iter().map(|p| norm(p)).fold(0.0, f64::max).max(1.0);
            (0..pts.len())
                .filter(|&i| {
                    let others: Vec<Vec<f64>> =
                        pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
                    project_onto_hull(&others, &pts[i]).1 > 1e-10 * scale
                })
                .map(|i| pts[i].clone())
                .collect()
        }
    }
}

/// Andrew's monotone chain; returns indices of hull vertices in
/// counter-clockwise order, collinear points dropped.
fn monotone_chain(p: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[a][0].total_cmp(&p[b][0]).then(p[a][1].total_cmp(&p[b][1])));
    let scale = p.iter().map(|q| q[0].abs().max(q[1].abs())).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * scale * scale;
    let cross = |o: usize, a: usize, b: usize| {
        (p[a][0] - p[o][0]) * (p[b][1] - p[o][1]) - (p[a][1] - p[o][1]) * (p[b][0] - p[o][0])
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * p.len());
    for &i in &idx {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= tol {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= tol {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Vertices of `{z >= 0 : sum_j z_j cols[j] = b}` by enumerating supports
/// with linearly independent columns (basic feasible solutions).
pub fn standard_form_vertices(cols: &[Vec<f64>], b: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let n = cols.len();
    assert!(n <= 24, "support enumeration is limited to 24 columns");
    let rank = linalg::rank(cols, 1e-10);
    let bscale = norm(b).max(1.0);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() as usize > rank {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub_cols: Vec<Vec<f64>> = support.iter().map(|&j| cols[j].clone()).collect();
        if linalg::rank(&sub_cols, 1e-10) < support.len() {
            continue;
        }
        let Some(zs) = linalg::least_squares_cols(&sub_cols, b, 1e-13) else { continue };
        if zs.iter().any(|z| *z < -tol) {
            continue;
        }
        let mut resid = b.to_vec();
        for (z, c) in zs.iter().zip(&sub_cols) {
            linalg::axpy(&mut resid, -z, c);
        }
        if norm(&resid) > tol * bscale {
            continue;
        }
        let mut v = vec![0.0; n];
        for (k, &j) in support.iter().enumerate() {
            v[j] = zs[k].max(0.0);
        }
        if !out.iter().any(|q| linalg::max_abs_diff(q, &v) <= GEOM_TOL) {
            out.push(v);
        }
    }
    out
}

/// Facet halfspaces (plus equality pairs for lower-dimensional sets) of the
/// hull of `vertices`, which must already be extreme points.
pub fn halfspaces_from_vertices(vertices: &[Vec<f64>]) -> Vec<Halfspace> {
    let dim = vertices[0].len();
    let (o, basis) = affine_hull(vertices);
    let r = basis.len();
    let mut out = Vec::new();
    // directions orthogonal to the affine hull give equalities
    let mut all = basis.clone();
    let units: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect();
    all.extend(units);
    let full = linalg::orthonormal_basis(&all, 1e-10);
    for c in &full[r..] {
        let b = dot(c, &o);
        out.push(Halfspace { a: c.clone(), b });
        out.push(Halfspace { a: c.iter().map(|x| -x).collect(), b: -b });
    }
    if r == 0 {
        return out;
    }
    let u: Vec<Vec<f64>> = vertices.iter().map(|v| basis.iter().map(|bv| dot(&sub(v, &o), bv)).collect()).collect();
    let scale = u.iter().map(|p| norm(p)).fold(0.0, f64::max).max(1.0);
    let side_tol = 1e-10 * scale;
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut consider = |n: Vec<f64>, beta: f64| {
        let above = u.iter().any(|p| dot(&n, p) > beta + side_tol);
        let below = u.iter().any(|p| dot(&n, p) < beta - side_tol);
        let (n, beta) = match (above, below) {
            (false, _) => (n, beta),
            (true, false) => (n.iter().map(|x| -x).collect(), -beta),
            (true, true) => return,
        };
        if !facets.iter().any(|(m, g)| linalg::max_abs_diff(m, &n) < 1e-9 && (g - beta).abs() < 1e-9 * scale) {
            facets.push((n, beta));
        }
    };
    if r == 1 {
        consider(vec![1.0], u.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max));
        consider(vec![-1.0], -u.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min));
    } else {
        for subset in k_subsets(u.len(), r) {
            let rows: Vec<Vec<f64>> = subset[1..].iter().map(|&i| sub(&u[i], &u[subset[0]])).collect();
            let ns = linalg::nullspace(&rows, r, 1e-10 * scale);
            if ns.len() != 1 {
                continue;
            }
            let nn = norm(&ns[0]);
            let n: Vec<f64> = ns[0].iter().map(|x| x / nn).collect();
            let beta = dot(&n, &u[subset[0]]);
            consider(n, beta);
        }
    }
    for (n, beta) in facets {
        let mut a = vec![0.0; dim];
        for (k, bv) in basis.iter().enumerate() {
            linalg::axpy(&mut a, n[k], bv);
        }
        let b = beta + dot(&a, &o);
        out.push(Halfspace::new(a, b).expect("facet normal lies in the hull directions"));
    }
    out
}

pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Vertices of a bounded H-polytope in `dim` dimensions.
pub fn vertices_from_halfspaces(hs: &[Halfspace], dim: usize) -> Result<Vec<Vec<f64>>> {
    // boundedness and feasibility
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut lp = LinearProgram::new(dim);
            (0..dim).for_each(|j| lp.set_free(j));
            lp.set_cost(k, sign);
            for h in hs {
                lp.add_dense(&h.a, Relation::Le, h.b);
            }
            match lp.minimize() {
                Ok(_) => {}
                Err(Error::Unbounded) => return Err(invalid("halfspace description is unbounded")),
                Err(e) => return Err(e),
            }
        }
    }
    let mut verts = Vec::new();
    for subset in k_subsets(hs.len(), dim) {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| hs[i].a.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| hs[i].b).collect();
        let Some(z) = linalg::solve(&a, &b, 1e-10) else { continue };
        let scale = norm(&z).max(1.0);
        if hs.iter().all(|h| h.violation(&z) <= 1e-9 * scale) {
            verts.push(z);
        }
    }
    if verts.is_empty() {
        return Err(Error::Infeasible("halfspace description has no vertices".into()));
    }
    Ok(hull_vertices(&dedup_points(&verts, 1e-9)))
}

/// Convex polytope with synchronised vertex and halfspace descriptions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    halfspaces: Vec<Halfspace>,
}

impl Polytope {
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("polytope needs at least one point"));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim || p.iter().any(|x| !x.is_finite())) {
            return Err(invalid("polytope points must share a positive dimension and be finite"));
        }
        let vertices = hull_vertices(points);
        let halfspaces = halfspaces_from_vertices(&vertices);
        Ok(Polytope { vertices, halfspaces })
    }

    pub fn from_halfspaces(hs: Vec<Halfspace>) -> Result<Self> {
        if hs.is_empty() {
            return Err(invalid("polytope needs at least one halfspace"));
        }
        let dim = hs[0].a.len();
        if hs.iter().any(|h| h.a.len() != dim) {
            return Err(invalid("halfspaces must share a dimension"));
        }
        let verts = vertices_from_halfspaces(&hs, dim)?;
        Polytope::from_vertices(&verts)
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        let mut hs = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            hs.push(Halfspace::new(e.clone(), hi[k])?);
            e[k] = -1.0;
            hs.push(Halfspace::new(e, -lo[k])?);
        }
        Polytope::from_halfspaces(hs)
    }

    pub fn unit_cube(dim: usize) -> Self {
        Polytope::cuboid(&vec![0.0; dim], &vec![1.0; dim]).expect("unit cube is bounded")
    }

    /// Intersection of extra halfspaces with a box.
    pub fn halfspaces_in_box(extra: &[Halfspace], lo: &[f64], hi: &[f64]) -> Result<Self> {
        let mut hs = Polytope::cuboid(lo, hi)?.halfspaces;
        hs.extend(extra.iter().cloned());
        Polytope::from_halfspaces(hs)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Largest normalised halfspace violation; a lower bound on the distance
    /// and nonpositive exactly on the polytope.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        self.halfspaces.iter().map(|h| h.violation(z)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn project(&self, z: &[f64]) -> (Vec<f64>, f64) {
        if self.max_violation(z) <= 0.0 {
            return (z.to_vec(), 0.0);
        }
        project_onto_hull(&self.vertices, z)
    }

    pub fn distance(&self, z: &[f64]) -> f64 {
        self.project(z).1
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        let v = self.max_violation(z);
        if v <= 0.0 {
            return true;
        }
        if v > tol {
            return false;
        }
        self.distance(z) <= tol
    }

    /// Support function `max_{v} <h, v>`.
    pub fn support(&self, h: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(h, v)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(linalg::dist(a, b));
            }
        }
        d
    }
}

/// Minkowski sum of two point hulls, reduced to extreme points.
pub fn minkowski_sum(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let sums: Vec<Vec<f64>> = a.iter().flat_map(|u| b.iter().map(move |v| linalg::add(u, v))).collect();
    hull_vertices(&sums)
}

/// A closed set given as a finite union of polytopes.
#[derive(Clone, Debug)]
pub struct TargetSet {
    pieces: Vec<Polytope>,
    convex: bool,
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub distance: f64,
    /// One minimiser per piece attaining the distance (within 1e-9), in
    /// piece order.
    pub projections: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PieceSpec {
    Vertices { vertices: Vec<Vec<f64>> },
    Halfspaces { halfspaces: Vec<HalfspaceSpec> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfspaceSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(default)]
    pub convex: Option<bool>,
    pub pieces: Vec<PieceSpec>,
}

impl PieceSpec {
    pub fn build(&self) -> Result<Polytope> {
        match self {
            PieceSpec::Vertices { vertices } => Polytope::from_vertices(vertices),
            PieceSpec::Halfspaces { halfspaces } => Polytope::from_halfspaces(
                halfspaces.iter().map(|h| Halfspace::new(h.a.clone(), h.b)).collect::<Result<_>>()?,
            ),
        }
    }
}

impl TargetSet {
    pub fn new(pieces: Vec<Polytope>, convex: bool) -> Result<Self> {
        if pieces.is_empty() {
            return Err(invalid("target set needs at least one piece"));
        }
        if convex && pieces.len() != 1 {
            return Err(invalid("a convex target must consist of exactly one piece"));
        }
        let dim = pieces[0].dim();
        if pieces.iter().any(|p| p.dim() != dim) {
            return Err(invalid("target pieces must share a dimension"));
        }
        Ok(TargetSet { pieces, convex })
    }

    pub fn convex(p: Polytope) -> Self {
        TargetSet { pieces: vec![p], convex: true }
    }

    pub fn from_spec(spec: &TargetSpec) -> Result<Self> {
        let pieces = spec.pieces.iter().map(PieceSpec::build).collect::<Result<Vec<_>>>()?;
        let convex = spec.convex.unwrap_or(pieces.len() == 1);
        TargetSet::new(pieces, convex)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: TargetSpec = serde_json::from_str(text)?;
        TargetSet::from_spec(&spec)
    }

    pub fn pieces(&self) -> &[Polytope] {
        &self.pieces
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    /// The single piece of a convex target.
    pub fn as_convex(&self) -> Result<&Polytope> {
        if self.convex {
            Ok(&self.pieces[0])
        } else {
            Err(invalid("operation requires a convex target"))
        }
    }

    pub fn distance_and_projection(&self, z: &[f64]) -> Result<Projection> {
        if z.len() != self.dim() {
            return Err(invalid(format!("point has dimension {}, target {}", z.len(), self.dim())));
        }
        let per: Vec<(Vec<f64>, f64)> = self.pieces.iter().map(|p| p.project(z)).collect();
        let distance = per.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
        let projections = per.into_iter().filter(|(_, d)| *d <= distance + GEOM_TOL).map(|(p, _)| p).collect();
        Ok(Projection { distance, projections })
    }

    pub fn distance(&self, z: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.distance(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(z, tol))
    }

    /// First projection `p` and the normal `q = z - p`.
    pub fn proximal_normal(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let proj = self.distance_and_projection(z)?;
        if proj.distance <= GEOM_TOL {
            return Err(Error::NoNormal);
        }
        let p = proj.projections[0].clone();
        let q = sub(z, &p);
        Ok((p, q))
    }
}
