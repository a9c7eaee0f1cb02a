//! Double points `f(s) = f(t)` and antipodal points `f(s) = -f(t)` of a loop.
//!
//! The off-diagonal torus is scanned on a grid for local minima of
//! `|f(s) -+ f(t)|`; each candidate is refined by Gauss-Newton on the
//! three-component residual and deduplicated.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{QuadricLoop, SpaceCurve};
use crate::quadric::line_angle;
use crate::torus::{dedup_by_key, PairPoint};
use crate::trig::grid;

pub const DEFAULT_CENSUS_GRID: usize = 1024;
/// Residual accepted after refinement.
pub const CROSSING_TOL: f64 = 1e-8;
/// Crossings with a smaller tangent angle are flagged as non-transversal.
pub const TRANSVERSALITY_ANGLE: f64 = 1e-3;
pub const DEDUP_RADIUS: f64 = 1e-4;
/// This many non-transversal coincidences of one kind are reported as a
/// coincident family rather than enumerated.
const CONTINUUM_MIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingKind {
    Double,
    Antipodal,
}

impl CrossingKind {
    fn sign(self) -> f64 {
        match self {
            CrossingKind::Double => 1.0,
            CrossingKind::Antipodal => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingPair {
    pub location: PairPoint,
    /// `|f(s) -+ f(t)|` after refinement.
    pub residual: f64,
    /// Line angle between `f'(s)` and `f'(t)`.
    pub angle: f64,
    pub transversal: bool,
    /// Distance travelled during refinement, in grid cells (max-norm).
    #[serde(skip)]
    pub moved_cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionCensus {
    pub grid: usize,
    pub double_points: Vec<CrossingPair>,
    pub antipodal_points: Vec<CrossingPair>,
    pub a: usize,
    pub b: usize,
    /// The loop coincides with itself along an arc (e.g. traversed twice).
    pub double_continuum: bool,
    /// The loop coincides with its antipodal image along an arc.
    pub antipodal_continuum: bool,
}

impl IntersectionCensus {
    /// All crossings transversal and no coincident families.
    pub fn is_generic(&self) -> bool {
        !self.double_continuum
            && !self.antipodal_continuum
            && self
                .double_points
                .iter()
                .chain(&self.antipodal_points)
                .all(|p| p.transversal)
    }

    pub fn pairs(&self, kind: CrossingKind) -> &[CrossingPair] {
        match kind {
            CrossingKind::Double => &self.double_points,
            CrossingKind::Antipodal => &self.antipodal_points,
        }
    }

    /// Which census set, if any, contains `p` within `radius`.
    pub fn classify(&self, p: &PairPoint, radius: f64) -> Option<CrossingKind> {
        if self.double_points.iter().any(|c| c.location.distance(p) <= radius) {
            Some(CrossingKind::Double)
        } else if self.antipodal_points.iter().any(|c| c.location.distance(p) <= radius) {
            Some(CrossingKind::Antipodal)
        } else {
            None
        }
    }
}

/// Double and antipodal points of a loop on a quadric.
pub fn census(l: &QuadricLoop, grid_size: usize) -> IntersectionCensus {
    census_curve(l, grid_size, true)
}

/// Census of an arbitrary space curve. Antipodal points are only meaningful
/// for central quadrics and are skipped when `antipodal` is false.
pub fn census_curve<C: SpaceCurve + ?Sized>(
    curve: &C,
    grid_size: usize,
    antipodal: bool,
) -> IntersectionCensus {
    let n = grid_size.max(8);
    let points: Vec<_> = grid(n).map(|t| curve.point(t)).collect();
    let vmax = grid(n).map(|t| curve.tangent(t).norm()).fold(0.0, f64::max);
    let (double_points, double_continuum) = crossings(curve, &points, vmax, CrossingKind::Double);
    let (antipodal_points, antipodal_continuum) = if antipodal {
        crossings(curve, &points, vmax, CrossingKind::Antipodal)
    } else {
        (Vec::new(), false)
    };
    IntersectionCensus {
        grid: n,
        a: double_points.len(),
        b: antipodal_points.len(),
        double_points,
        antipodal_points,
        double_continuum,
        antipodal_continuum,
    }
}

fn crossings<C: SpaceCurve + ?Sized>(
    curve: &C,
    points: &[nalgebra::Vector3<f64>],
    vmax: f64,
    kind: CrossingKind,
) -> (Vec<CrossingPair>, bool) {
    let n = points.len();
    let h = TAU / n as f64;
    let sign = kind.sign();
    let dist = |i: usize, j: usize| (points[i % n] - points[j % n] * sign).norm();
    let threshold = 2.0 * h * vmax;
    // double points closer than two cells to the diagonal are not resolved
    let min_gap = if kind == CrossingKind::Double { 2 } else { 0 };

    let seeds: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n)
                .filter(move |&j| {
                    let gap = (j - i).min(n - (j - i));
                    gap >= min_gap.max(1)
                })
                .filter_map(move |j| {
                    let d = dist(i, j);
                    if d > threshold {
                        return None;
                    }
                    for di in [n - 1, 0, 1] {
                        for dj in [n - 1, 0, 1] {
                            if (di, dj) != (0, 0) && dist(i + di, j + dj) < d {
                                return None;
                            }
                        }
                    }
                    Some((i, j))
                })
        })
        .collect();

    let refined: Vec<CrossingPair> = seeds
        .par_iter()
        .filter_map(|&(i, j)| refine(curve, i as f64 * h, j as f64 * h, sign, h))
        .filter(|c| kind == CrossingKind::Antipodal || c.location.diagonal_distance() > h)
        .collect();
    let refined = dedup_by_key(refined, DEDUP_RADIUS, |c| c.location, |c| c.residual);
    let degenerate = refined.iter().filter(|c| !c.transversal).count();
    if degenerate >= CONTINUUM_MIN {
        let kept = refined.into_iter().filter(|c| c.transversal).collect();
        return (kept, true);
    }
    (refined, false)
}

fn refine<C: SpaceCurve + ?Sized>(
    curve: &C,
    s0: f64,
    t0: f64,
    sign: f64,
    h: f64,
) -> Option<CrossingPair> {
    let (mut s, mut t) = (s0, t0);
    let mut js = curve.jet(s);
    let mut jt = curve.jet(t);
    let mut r = js.pos - jt.pos * sign;
    for _ in 0..40 {
        let rn = r.norm();
        if rn <= 1e-15 * (1.0 + js.pos.norm()) {
            break;
        }
        let a = js.d1;
        let b = -jt.d1 * sign;
        let jtj = Matrix2::new(a.dot(&a), a.dot(&b), a.dot(&b), b.dot(&b));
        let rhs = -Vector2::new(a.dot(&r), b.dot(&r));
        let lm = 1e-14 * jtj.trace();
        let step = (jtj + Matrix2::identity() * lm).lu().solve(&rhs)?;
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let (sn, tn) = (s + alpha * step.x, t + alpha * step.y);
            let (jsn, jtn) = (curve.jet(sn), curve.jet(tn));
            let rn_new = jsn.pos - jtn.pos * sign;
            if rn_new.norm() < rn {
                (s, t, js, jt, r) = (sn, tn, jsn, jtn, rn_new);
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let residual = r.norm();
    if residual > CROSSING_TOL {
        return None;
    }
    let moved_cells = (s - s0).abs().max((t - t0).abs()) / h;
    if moved_cells > 3.0 {
        return None;
    }
    let angle = line_angle(&js.d1, &jt.d1).ok()?;
    Some(CrossingPair {
        location: PairPoint::new(s, t),
        residual,
        angle,
        transversal: angle > TRANSVERSALITY_ANGLE,
        moved_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::LoopMode;
    use crate::quadric::Quadric;
    use crate::trig::{TrigLoop, TrigSeries};

    fn figure_eight_sphere() -> QuadricLoop {
        let raw = TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(2.0, vec![1.0], vec![0.0]),
        ])
        .unwrap();
        QuadricLoop::normalized(raw, Quadric::sphere()).unwrap()
    }

    #[test]
    fn latitude_circle_has_no_crossings() {
        let r = (1.0f64 - 0.25).sqrt();
        let l = QuadricLoop::new(
            TrigLoop::circle(&[0.0, 0.0, 0.5], r),
            Quadric::sphere(),
            LoopMode::Exact,
        )
        .unwrap();
        let c = census(&l, 1024);
        assert_eq!((c.a, c.b), (0, 0));
        assert!(c.is_generic());
    }

    #[test]
    fn equator_antipodal_family_is_nongeneric() {
        let l = QuadricLoop::new(
            TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0),
            Quadric::sphere(),
            LoopMode::Exact,
        )
        .unwrap();
        let c = census(&l, 1024);
        assert!(c.antipodal_continuum);
        assert_eq!(c.b, 0);
        assert!(!c.is_generic());
    }

    #[test]
    fn figure_eight_has_one_double_point() {
        let l = figure_eight_sphere();
        let c = census(&l, 1024);
        assert_eq!(c.a, 1);
        assert_eq!(c.b, 0);
        let p = c.double_points[0];
        assert!(p.transversal);
        assert!(p.residual <= CROSSING_TOL);
        assert!(p.moved_cells <= 1.0);
        // raw crossing of (sin 2t, sin t) at t = 0, pi
        assert!((p.location.s - 0.0).abs() < 1e-9 || (p.location.s - TAU).abs() < 1e-9);
        assert!((p.location.t - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn brute_force_scan_agrees_on_figure_eight() {
        // independent check: count sign structure of the nearest-approach function
        let l = figure_eight_sphere();
        let n = 2048;
        let pts: Vec<_> = grid(n).map(|t| l.point(t)).collect();
        let h = TAU / n as f64;
        let mut close = Vec::new();
        for i in 0..n {
            for j in i + 8..n.min(i + n - 8) {
                if (pts[i] - pts[j]).norm() < 2.0 * h {
                    close.push(PairPoint::new(i as f64 * h, j as f64 * h));
                }
            }
        }
        let clusters = dedup_by_key(close, 0.5, |p| *p, |_| 0.0);
        assert_eq!(clusters.len(), 1);
    }

    #[test]
    fn upper_sheet_has_no_antipodal_points() {
        let raw = TrigLoop::new(vec![
            TrigSeries::new(0.1, vec![0.8, 0.05], vec![0.1, 0.0]),
            TrigSeries::new(-0.2, vec![0.0, 0.1], vec![0.9, -0.05]),
            TrigSeries::new(1.6, vec![0.1], vec![0.0]),
        ])
        .unwrap();
        let l = QuadricLoop::normalized(raw, Quadric::two_sheeted()).unwrap();
        let c = census(&l, 1024);
        assert_eq!(c.b, 0);
        assert_eq!(c.a, 0);
    }
}
