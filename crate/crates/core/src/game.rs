//! Finite two-player games with vector payoffs and random signals.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::convex::{self, standard_form_vertices};
use crate::error::{invalid, Error, Result};
use crate::linalg;

const PROB_TOL: f64 = 1e-9;

/// A probability vector over a finite action set.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedAction {
    weights: Vec<f64>,
}

impl MixedAction {
    /// Accepts vectors that are a probability vector up to 1e-9 and
    /// renormalises them exactly.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_probability(&weights, "mixed action")?;
        Ok(MixedAction { weights: normalise(weights) })
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        MixedAction { weights: w }
    }

    pub fn uniform(n: usize) -> Self {
        MixedAction { weights: vec![1.0 / n as f64; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

fn check_probability(w: &[f64], what: &str) -> Result<()> {
    if w.is_empty() {
        return Err(invalid(format!("{what} is empty")));
    }
    if w.iter().any(|x| !x.is_finite() || *x < -PROB_TOL) {
        return Err(invalid(format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(invalid(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

fn normalise(w: Vec<f64>) -> Vec<f64> {
    let mut w: Vec<f64> = w.into_iter().map(|x| x.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// One signal law per own action: the information Player 1 can hope to
/// learn about the opponent's mixed action.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Flag {
    rows: Vec<Vec<f64>>,
}

impl Flag {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("flag has no rows"));
        }
        let s = rows[0].len();
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != s {
                return Err(invalid("flag rows differ in length"));
            }
            check_probability(&r, "flag row")?;
            out.push(normalise(r));
        }
        Ok(Flag { rows: out })
    }

    pub fn from_flat(v: &[f64], num_signals: usize) -> Result<Self> {
        if num_signals == 0 || v.len() % num_signals != 0 {
            return Err(invalid("flat flag length is not a multiple of the signal count"));
        }
        Flag::new(v.chunks(num_signals).map(|c| c.to_vec()).collect())
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.rows.concat()
    }
}

/// Finite game: payoffs `ρ(i,j) ∈ ℝ^k` and signal laws `s(i,j) ∈ Δ(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    num_actions_p1: usize,
    num_actions_p2: usize,
    payoff_dim: usize,
    payoffs: Vec<Vec<Vec<f64>>>,
    signal_labels: Vec<String>,
    signal_law: Vec<Vec<Vec<f64>>>,
}

impl Game {
    pub fn new(
        payoffs: Vec<Vec<Vec<f64>>>,
        signal_labels: Vec<String>,
        signal_law: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let ni = payoffs.len();
        if ni == 0 || payoffs[0].is_empty() || payoffs[0][0].is_empty() {
            return Err(invalid("game needs at least one action each and k >= 1"));
        }
        let nj = payoffs[0].len();
        let k = payoffs[0][0].len();
        for row in &payoffs {
            if row.len() != nj || row.iter().any(|v| v.len() != k || v.iter().any(|x| !x.is_finite())) {
                return Err(invalid("payoff array must be |I| x |J| x k with finite entries"));
            }
        }
        if signal_labels.is_empty() {
            return Err(invalid("game needs at least one signal label"));
        }
        if signal_law.len() != ni {
            return Err(invalid("signal array must have |I| rows"));
        }
        let mut law = Vec::with_capacity(ni);
        for row in signal_law {
            if row.len() != nj {
                return Err(invalid("signal array must have |J| columns"));
            }
            let mut r = Vec::with_capacity(nj);
            for cell in row {
                if cell.len() != signal_labels.len() {
                    return Err(invalid("signal law length differs from the label count"));
                }
                check_probability(&cell, "signal law")?;
                r.push(normalise(cell));
            }
            law.push(r);
        }
        Ok(Game { num_actions_p1: ni, num_actions_p2: nj, payoff_dim: k, payoffs, signal_labels, signal_law: law })
    }

    /// Full monitoring: Player 1 observes Player 2's action.
    pub fn full_monitoring(payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let ni = payoffs.len();
        let nj = payoffs.first().map_or(0, |r| r.len());
        let labels = (0..nj).map(|j| format!("j{j}")).collect();
        let law = vec![(0..nj).map(|j| MixedAction::pure(nj, j).into_weights()).collect(); ni];
        Game::new(payoffs, labels, law)
    }

    /// The same payoffs with full monitoring signals.
    pub fn with_full_monitoring(&self) -> Self {
        Game::full_monitoring(self.payoffs.clone()).expect("payoffs already validated")
    }

    /// Two actions {T, B} against {L, C, R}, signals {a, b}; L and C are
    /// indistinguishable.
    pub fn example1() -> Self {
        let payoffs = vec![
            vec![vec![0.0, -1.0], vec![1.0, -2.0], vec![2.0, -4.0]],
            vec![vec![1.0, 0.0], vec![2.0, -1.0], vec![3.0, -3.0]],
        ];
        let a = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        let law = vec![vec![a.clone(), a.clone(), b.clone()], vec![a.clone(), a, b]];
        Game::new(payoffs, vec!["a".into(), "b".into()], law).expect("example is well formed")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Game::from_value(&v)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Game::from_json(&std::fs::read_to_string(path)?)
    }

    fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("game must be a JSON object".into()))?;
        let get_usize = |key: &str| -> Result<usize> {
            obj.get(key)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("missing or invalid key \"{key}\"")))
        };
        let (ni, nj, k) = (get_usize("I")?, get_usize("J")?, get_usize("k")?);
        let payoffs: Vec<Vec<Vec<f64>>> = serde_json::from_value(
            obj.get("payoffs").cloned().ok_or_else(|| Error::Parse("missing key \"payoffs\"".into()))?,
        )?;
        if payoffs.len() != ni || payoffs.iter().any(|r| r.len() != nj || r.iter().any(|p| p.len() != k)) {
            return Err(Error::Parse(format!("payoffs must be a {ni} x {nj} x {k} array")));
        }
        let Some(sig) = obj.get("signals") else {
            return Game::full_monitoring(payoffs);
        };
        let rows = sig.as_array().ok_or_else(|| Error::Parse("signals must be an array".into()))?;
        if rows.len() != ni {
            return Err(Error::Parse(format!("signals must have {ni} rows")));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut cells: Vec<Vec<Vec<(usize, f64)>>> = Vec::new();
        let label_index = |l: &str, labels: &mut Vec<String>| -> usize {
            match labels.iter().position(|x| x == l) {
                Some(p) => p,
                None => {
                    labels.push(l.to_string());
                    labels.len() - 1
                }
            }
        };
        for row in rows {
            let row = row.as_array().ok_or_else(|| Error::Parse("signal rows must be arrays".into()))?;
            if row.len() != nj {
                return Err(Error::Parse(format!("signal rows must have {nj} entries")));
            }
            let mut out_row = Vec::new();
            for cell in row {
                let entry = match cell {
                    Value::String(s) => vec![(label_index(s, &mut labels), 1.0)],
                    Value::Object(m) => {
                        let mut e = Vec::new();
                        for (l, p) in m {
                            let p = p.as_f64().ok_or_else(|| Error::Parse("signal probabilities must be numbers".into()))?;
                            e.push((label_index(l, &mut labels), p));
                        }
                        e
                    }
                    _ => return Err(Error::Parse("signal entries must be a label or a label->probability object".into())),
                };
                out_row.push(entry);
            }
            cells.push(out_row);
        }
        let ns = labels.len();
        let law = cells
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|entry| {
                        let mut w = vec![0.0; ns];
                        for (l, p) in entry {
                            w[l] += p;
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        Game::new(payoffs, labels, law)
    }

    pub fn to_json(&self) -> String {
        let signals: Vec<Vec<Value>> = self
            .signal_law
            .iter()
            .map(|row| {
                row.iter()
                    .map(|w| match w.iter().position(|p| *p == 1.0) {
                        Some(l) => Value::String(self.signal_labels[l].clone()),
                        None => {
                            let mut m = Map::new();
                            for (l, p) in w.iter().enumerate() {
                                if *p > 0.0 {
                                    m.insert(self.signal_labels[l].clone(), json!(p));
                                }
                            }
                            Value::Object(m)
                        }
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "I": self.num_actions_p1,
            "J": self.num_actions_p2,
            "k": self.payoff_dim,
            "payoffs": self.payoffs,
            "signals": signals,
        }))
        .expect("game serialises")
    }

    pub fn num_actions_p1(&self) -> usize {
        self.num_actions_p1
    }

    pub fn num_actions_p2(&self) -> usize {
        self.num_actions_p2
    }

    pub fn payoff_dim(&self) -> usize {
        self.payoff_dim
    }

    pub fn num_signals(&self) -> usize {
        self.signal_labels.len()
    }

    pub fn signal_labels(&self) -> &[String] {
        &self.signal_labels
    }

    pub fn payoff(&self, i: usize, j: usize) -> &[f64] {
        &self.payoffs[i][j]
    }

    pub fn payoffs(&self) -> &[Vec<Vec<f64>>] {
        &self.payoffs
    }

    pub fn signal_law(&self, i: usize, j: usize) -> &[f64] {
        &self.signal_law[i][j]
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_actions_p1 {
            return Err(invalid(format!("mixed action over I has length {}, expected {}", x.len(), self.num_actions_p1)));
        }
        Ok(())
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.num_actions_p2 {
            return Err(invalid(format!("mixed action over J has length {}, expected {}", y.len(), self.num_actions_p2)));
        }
        Ok(())
    }

    /// Bilinear extension `ρ(x,y) = Σ x_i y_j ρ(i,j)`.
    pub fn mixed_payoff(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        self.check_y(y)?;
        let mut out = vec![0.0; self.payoff_dim];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj != 0.0 {
                    linalg::axpy(&mut out, xi * yj, &self.payoffs[i][j]);
                }
            }
        }
        Ok(out)
    }

    /// `ρ(x, j)` for a pure opponent action.
    pub fn payoff_vs_pure(&self, x: &[f64], j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.payoff_dim];
        for (i, xi) in x.iter().enumerate() {
            linalg::axpy(&mut out, *xi, &self.payoffs[i][j]);
        }
        out
    }

    /// `ρ(i, y)` for a pure own action.
    pub fn payoff_of_pure(&self, i: usize, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.payoff_dim];
        for (j, yj) in y.iter().enumerate() {
            linalg::axpy(&mut out, *yj, &self.payoffs[i][j]);
        }
        out
    }

    /// Flattened flag `(s(i,y))_i`, row-major over (i, signal).
    pub fn flag_vector(&self, y: &[f64]) -> Vec<f64> {
        let ns = self.num_signals();
        let mut out = vec![0.0; self.num_actions_p1 * ns];
        for i in 0..self.num_actions_p1 {
            for (j, yj) in y.iter().enumerate() {
                linalg::axpy(&mut out[i * ns..(i + 1) * ns], *yj, &self.signal_law[i][j]);
            }
        }
        out
    }

    pub fn flag_of(&self, y: &[f64]) -> Result<Flag> {
        self.check_y(y)?;
        Flag::from_flat(&self.flag_vector(y), self.num_signals())
    }

    /// Dimension of flattened flags, `|I|·|S|`.
    pub fn flag_dim(&self) -> usize {
        self.num_actions_p1 * self.num_signals()
    }

    /// Distinct flags of pure opponent actions, in order of first
    /// appearance. Their hull is the flag polytope.
    pub fn pure_flags(&self) -> Vec<Vec<f64>> {
        let all: Vec<Vec<f64>> =
            (0..self.num_actions_p2).map(|j| self.flag_vector(&MixedAction::pure(self.num_actions_p2, j).weights)).collect();
        convex::dedup_points(&all, 1e-12)
    }

    /// Projects a flattened flag onto the flag polytope. Errors when the
    /// distance exceeds `tol`.
    pub fn snap_flag(&self, flag: &[f64], tol: f64) -> Result<Vec<f64>> {
        if flag.len() != self.flag_dim() {
            return Err(invalid(format!("flag has {} coordinates, expected {}", flag.len(), self.flag_dim())));
        }
        let (p, d) = convex::project_onto_hull(&self.pure_flags(), flag);
        if d > tol {
            return Err(Error::InfeasibleFlag { distance: d, tol });
        }
        Ok(p)
    }

    /// Vertices of `{y ∈ Δ(J) : s(y) = flag}` for a flattened flag, sorted
    /// lexicographically decreasing.
    pub fn preimage_vertices_flat(&self, flag: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
        let xi = self.snap_flag(flag, tol)?;
        let cols: Vec<Vec<f64>> = (0..self.num_actions_p2)
            .map(|j| {
                let mut c = vec![1.0];
                c.extend(self.flag_vector(&MixedAction::pure(self.num_actions_p2, j).weights));
                c
            })
            .collect();
        let mut b = vec![1.0];
        b.extend(xi);
        let mut verts: Vec<Vec<f64>> =
            standard_form_vertices(&cols, &b, 1e-8).into_iter().map(normalise).collect();
        if verts.is_empty() {
            return Err(Error::Numerical("flag preimage vertex enumeration found no vertex".into()));
        }
        verts.sort_by(|a, b| linalg::lex_cmp(b, a));
        Ok(verts)
    }

    pub fn flag_preimage_vertices(&self, flag: &Flag, tol: f64) -> Result<Vec<MixedAction>> {
        Ok(self
            .preimage_vertices_flat(&flag.flatten(), tol)?
            .into_iter()
            .map(|weights| MixedAction { weights })
            .collect())
    }

    /// Diameter of the hull of pure payoffs.
    pub fn payoff_diameter(&self) -> f64 {
        let pts: Vec<&Vec<f64>> = self.payoffs.iter().flatten().collect();
        let mut d = 0.0f64;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                d = d.max(linalg::dist(p, q));
            }
        }
        d
    }

    /// Largest ratio `H(Y(a), Y(b)) / |a - b|` over pairs of the given
    /// flattened flags, where `Y` is the flag preimage and `H` the Hausdorff
    /// distance.
    pub fn preimage_lipschitz(&self, flags: &[Vec<f64>]) -> Result<f64> {
        let sets: Vec<Vec<Vec<f64>>> =
            flags.iter().map(|f| self.preimage_vertices_flat(f, 1e-7)).collect::<Result<_>>()?;
        let mut l = 0.0f64;
        for a in 0..flags.len() {
            for b in a + 1..flags.len() {
                let d = linalg::dist(&flags[a], &flags[b]);
                if d > 1e-12 {
                    l = l.max(convex::hausdorff(&sets[a], &sets[b]) / d);
                }
            }
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        linalg::max_abs_diff(a, b) < 1e-12
    }

    #[test]
    fn example1_payoffs() {
        let g = Game::example1();
        assert_eq!(g.mixed_payoff(&[1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        let third = 1.0 / 3.0;
        let p = g.mixed_payoff(&[0.5, 0.5], &[third, third, third]).unwrap();
        assert!(close(&p, &[1.5, -11.0 / 6.0]));
        assert!(g.mixed_payoff(&[1.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn example1_flags() {
        let g = Game::example1();
        let f = g.flag_of(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.rows(), &[vec![1.0, 0.0], vec![1.0, 0.0]]);
        let f = g.flag_of(&[0.5, 0.0, 0.5]).unwrap();
        assert_eq!(f.rows(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(g.pure_flags().len(), 2);
    }

    #[test]
    fn example1_preimages() {
        let g = Game::example1();
        let v = g.flag_preimage_vertices(&Flag::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(), 1e-9).unwrap();
        let v: Vec<&[f64]> = v.iter().map(|m| m.weights()).collect();
        assert_eq!(v, vec![&[1.0, 0.0, 0.0][..], &[0.0, 1.0, 0.0][..]]);
        let v = g.flag_preimage_vertices(&Flag::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap(), 1e-9).unwrap();
        assert_eq!(v.len(), 1);
        assert!(close(v[0].weights(), &[0.0, 0.0, 1.0]));
        let v = g.flag_preimage_vertices(&Flag::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(), 1e-9).unwrap();
        assert_eq!(v.len(), 2);
        assert!(close(v[0].weights(), &[0.5, 0.0, 0.5]));
        assert!(close(v[1].weights(), &[0.0, 0.5, 0.5]));
    }

    #[test]
    fn infeasible_flag_is_rejected() {
        let g = Game::example1();
        let f = Flag::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(g.flag_preimage_vertices(&f, 1e-9), Err(Error::InfeasibleFlag { .. })));
    }

    #[test]
    fn json_round_trip() {
        let g = Game::example1();
        let back = Game::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let text = r#"{"I":1,"J":2,"k":1,"payoffs":[[[0],[1]]],"signals":[[{"u":0.25,"v":0.75},"u"]]}"#;
        let g = Game::from_json(text).unwrap();
        assert_eq!(g.signal_law(0, 0), &[0.25, 0.75]);
        assert_eq!(g.signal_law(0, 1), &[1.0, 0.0]);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Game::from_json("{\"I\": 2,\n \"J\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn full_monitoring_preimage_is_singleton() {
        let g = Game::example1().with_full_monitoring();
        for j in 0..3 {
            let y = MixedAction::pure(3, j);
            let v = g.flag_preimage_vertices(&g.flag_of(y.weights()).unwrap(), 1e-9).unwrap();
            assert_eq!(v.len(), 1);
            assert!(close(v[0].weights(), y.weights()));
        }
    }
}
