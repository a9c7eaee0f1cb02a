//! Points of the torus `S^1 x S^1` up to the swap `(s, t) <-> (t, s)`.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

/// Signed circular difference `a - b` in `(-pi, pi]`.
pub fn circ_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// A pair of loop parameters, stored with both angles in `[0, 2 pi)` and
/// `s <= t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPoint {
    pub s: f64,
    pub t: f64,
}

impl PairPoint {
    pub fn new(s: f64, t: f64) -> Self {
        let s = wrap(s);
        let t = wrap(t);
        if s <= t {
            Self { s, t }
        } else {
            Self { s: t, t: s }
        }
    }

    /// Flat-torus distance to the diagonal `{s = t}`.
    pub fn diagonal_distance(&self) -> f64 {
        circ_diff(self.s, self.t).abs() / SQRT_2
    }

    /// Flat-torus distance between unordered pairs.
    pub fn distance(&self, other: &PairPoint) -> f64 {
        let direct = circ_diff(self.s, other.s).hypot(circ_diff(self.t, other.t));
        let swapped = circ_diff(self.s, other.t).hypot(circ_diff(self.t, other.s));
        direct.min(swapped)
    }

    pub fn swapped(&self) -> (f64, f64) {
        (self.t, self.s)
    }
}

fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Sorts points by `(s, t)` and keeps the first point of every cluster of
/// radius `radius`, preferring smaller `key` within a cluster.
pub fn dedup_by_key<T, F, K>(mut items: Vec<T>, radius: f64, point: F, key: K) -> Vec<T>
where
    F: Fn(&T) -> PairPoint,
    K: Fn(&T) -> f64,
{
    items.sort_by(|a, b| {
        key(a)
            .total_cmp(&key(b))
            .then_with(|| point(a).s.total_cmp(&point(b).s))
            .then_with(|| point(a).t.total_cmp(&point(b).t))
    });
    let mut kept: Vec<T> = Vec::new();
    for it in items {
        let p = point(&it);
        if kept.iter().all(|k| point(k).distance(&p) > radius) {
            kept.push(it);
        }
    }
    kept.sort_by(|a, b| {
        point(a)
            .s
            .total_cmp(&point(b).s)
            .then_with(|| point(a).t.total_cmp(&point(b).t))
    });
    kept
}

/// Greedy one-to-one matching of two point sets within `radius`. Returns the
/// matched index pairs and the unmatched indices of each side.
pub fn match_sets(
    a: &[PairPoint],
    b: &[PairPoint],
    radius: f64,
) -> (Vec<(usize, usize)>, Vec<usize>, Vec<usize>) {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = p.distance(q);
            if d <= radius {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut matched = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            matched.push((i, j));
        }
    }
    matched.sort();
    let ua = (0..a.len()).filter(|i| !used_a[*i]).collect();
    let ub = (0..b.len()).filter(|j| !used_b[*j]).collect();
    (matched, ua, ub)
}
