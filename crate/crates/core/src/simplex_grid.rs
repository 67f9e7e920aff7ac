//! Regular grids on the probability simplex and their Freudenthal (Kuhn)
//! triangulation.
//!
//! A grid of density `d` over `m` parts is the set of compositions of `d`
//! into `m` nonnegative integers, scaled by `1/d`. The first point is always
//! `(1, 0, ..., 0)`.

use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct SimplexGrid {
    parts: usize,
    density: usize,
    compositions: Vec<Vec<usize>>,
}

/// All compositions of `total` into `parts` parts, lexicographically
/// decreasing.
pub fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(parts - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(parts >= 1);
    let mut out = Vec::new();
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

impl SimplexGrid {
    pub fn new(parts: usize, density: usize) -> Self {
        assert!(parts >= 1 && density >= 1, "grid needs at least one part and density >= 1");
        SimplexGrid { parts, density, compositions: compositions(parts, density) }
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn density(&self) -> usize {
        self.density
    }

    pub fn len(&self) -> usize {
        self.compositions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compositions.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let d = self.density as f64;
        self.compositions[idx].iter().map(|&c| c as f64 / d).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Cells of the Freudenthal triangulation, each given as `parts` grid
    /// indices. There are `density^(parts-1)` cells and they cover the
    /// simplex.
    ///
    /// Works in cumulative coordinates `s_j = sum_{l >= j} c_l` for
    /// `j = 1..parts`, where the simplex becomes the region
    /// `d >= s_1 >= ... >= s_{m-1} >= 0`, a union of Freudenthal simplices of
    /// the integer lattice.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let m = self.parts;
        if m == 1 {
            return vec![vec![0]];
        }
        let d = self.density as i64;
        let index: HashMap<&[usize], usize> =
            self.compositions.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
        let dim = m - 1;
        let to_comp = |s: &[i64]| -> Option<Vec<usize>> {
            // s is (s_1..s_{m-1}); c_0 = d - s_1, c_j = s_j - s_{j+1}, c_{m-1} = s_{m-1}
            let mut c = Vec::with_capacity(m);
            let mut prev = d;
            for &sj in s {
                if sj > prev || sj < 0 {
                    return None;
                }
                c.push((prev - sj) as usize);
                prev = sj;
            }
            c.push(prev as usize);
            Some(c)
        };
        let perms = permutations(dim);
        let mut cells = Vec::new();
        let mut base = vec![0i64; dim];
        loop {
            for perm in &perms {
                let mut v = base.clone();
                let mut ids = Vec::with_capacity(m);
                let mut ok = true;
                match to_comp(&v) {
                    Some(c) => ids.push(index[c.as_slice()]),
                    None => ok = false,
                }
                for &axis in perm {
                    if !ok {
                        break;
                    }
                    v[axis] += 1;
                    match to_comp(&v) {
                        Some(c) => ids.push(index[c.as_slice()]),
                        None => ok = false,
                    }
                }
                if ok {
                    cells.push(ids);
                }
            }
            // advance base over {0..d-1}^dim
            let mut k = 0;
            loop {
                if k == dim {
                    return cells;
                }
                base[k] += 1;
                if base[k] < d {
                    break;
                }
                base[k] = 0;
                k += 1;
            }
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}
