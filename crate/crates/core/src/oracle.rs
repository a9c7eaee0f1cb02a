//! Brute-force detection of parallel tangent pairs.
//!
//! Works directly on tangent directions: scans the torus for small angles
//! between tangent lines and refines each local minimum by Gauss-Newton on
//! `u(s) x u(t)`, where `u` is the unit tangent. Nothing here uses the pair
//! function of [`crate::pair`], so the two can check each other.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::TAU;

use log::debug;
use nalgebra::{Matrix2, Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::SpaceCurve;
use crate::error::{Error, Result};
use crate::quadric::line_angle;
use crate::torus::{dedup_by_key, PairPoint};
use crate::trig::grid;

pub const DEFAULT_ORACLE_GRID: usize = 1024;
pub const DEFAULT_BAND: f64 = 0.02;
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Grid minima below this angle are refined. Loops whose tangent turns
/// quickly get a larger threshold, see [`scan`].
pub const CANDIDATE_ANGLE: f64 = 0.05;
/// Refined pairs must reach this angle.
pub const ACCEPT_ANGLE: f64 = 1e-9;
/// Angles below this are rounding noise and compare equal when choosing
/// the witness of a certificate.
const ANGLE_FLOOR: f64 = 1e-12;

/// Angle between the tangent lines at `p.s` and `p.t`, in `[0, pi/2]`.
pub fn tangent_angle<C: SpaceCurve + ?Sized>(curve: &C, p: &PairPoint) -> Result<f64> {
    line_angle(&curve.tangent(p.s), &curve.tangent(p.t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OraclePair {
    pub location: PairPoint,
    pub angle: f64,
}

/// Outcome of a full scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleScan {
    pub grid: usize,
    pub band: f64,
    pub pairs: Vec<OraclePair>,
    /// Parallel pairs form a curve in the torus; `pairs` is then empty.
    pub continuum: bool,
    /// Threshold below which grid minima were refined.
    pub candidate_angle: f64,
    pub candidates: usize,
    pub rejected: usize,
    /// Smallest angle over off-band grid cells.
    pub min_grid_angle: f64,
    pub min_grid_pair: PairPoint,
}

impl OracleScan {
    pub fn locations(&self) -> Vec<PairPoint> {
        self.pairs.iter().map(|p| p.location).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewCertificate {
    pub is_skew: bool,
    pub min_angle: f64,
    pub witness_pair: PairPoint,
    pub grid: usize,
    pub exclusion_band: f64,
    pub margin: f64,
    pub pairs_found: usize,
    pub continuum: bool,
}

/// Refined parallel tangent pairs, or [`Error::ContinuumDetected`] when they
/// form a family.
pub fn brute_force_pairs<C: SpaceCurve + ?Sized>(curve: &C, grid: usize, band: f64) -> Result<Vec<OraclePair>> {
    let scan = scan(curve, grid, band)?;
    if scan.continuum {
        return Err(Error::ContinuumDetected);
    }
    Ok(scan.pairs)
}

pub fn certify_skew<C: SpaceCurve + ?Sized>(
    curve: &C,
    grid: usize,
    band: f64,
    margin: f64,
) -> Result<SkewCertificate> {
    if margin <= 0.0 {
        return Err(Error::InvalidInput(format!("margin must be positive, got {margin}")));
    }
    let scan = scan(curve, grid, band)?;
    let (mut min_angle, mut witness) = (scan.min_grid_angle, scan.min_grid_pair);
    for p in &scan.pairs {
        if p.angle.max(ANGLE_FLOOR) < min_angle.max(ANGLE_FLOOR) {
            (min_angle, witness) = (p.angle, p.location);
        }
    }
    Ok(SkewCertificate {
        is_skew: scan.pairs.is_empty() && !scan.continuum && min_angle > margin,
        min_angle,
        witness_pair: witness,
        grid: scan.grid,
        exclusion_band: band,
        margin,
        pairs_found: scan.pairs.len(),
        continuum: scan.continuum,
    })
}

struct TangentGrid {
    n: usize,
    h: f64,
    units: Vec<Vector3<f64>>,
    threshold: f64,
}

impl TangentGrid {
    fn angle(&self, i: usize, j: usize) -> f64 {
        let (u, v) = (&self.units[i % self.n], &self.units[j % self.n]);
        u.cross(v).norm().atan2(u.dot(v).abs())
    }

    fn off_band(&self, i: usize, j: usize, band: f64) -> bool {
        PairPoint::new(i as f64 * self.h, j as f64 * self.h).diagonal_distance() > band
    }

    /// Canonical cell index of `(i, j)` up to the swap.
    fn canonical(&self, i: usize, j: usize) -> (usize, usize) {
        let (i, j) = (i % self.n, j % self.n);
        (i.min(j), i.max(j))
    }
}

/// Full scan of the torus.
///
/// The grid node nearest to a parallel pair `(s, t)` sees an angle of at
/// most `h (|u'(s)| + |u'(t)|) / 2`, so the candidate threshold is raised to
/// `1.5 h max|u'|` when that exceeds [`CANDIDATE_ANGLE`].
pub fn scan<C: SpaceCurve + ?Sized>(curve: &C, grid_size: usize, band: f64) -> Result<OracleScan> {
    if grid_size < 1024 {
        return Err(Error::InvalidInput(format!("oracle grid {grid_size} is below 1024")));
    }
    let n = grid_size;
    let h = TAU / n as f64;
    let mut units = Vec::with_capacity(n);
    let mut turning: f64 = 0.0;
    for t in grid(n) {
        let (u, du) = unit_jet(curve, t).ok_or(Error::Immersion { t })?;
        turning = turning.max(du.norm());
        units.push(u);
    }
    let threshold = CANDIDATE_ANGLE.max(1.5 * h * turning);
    let tg = TangentGrid { n, h, units, threshold };

    // minimum over off-band cells, ties broken row-major
    let (min_key, mi, mj) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
            for j in i + 1..n {
                if tg.off_band(i, j, band) {
                    let a = tg.angle(i, j).max(ANGLE_FLOOR);
                    if a < best.0 {
                        best = (a, i, j);
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |x, y| if y.0 < x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
        );
    if mi == usize::MAX {
        return Err(Error::InvalidInput(format!("band {band} leaves no cells to scan")));
    }
    let min_grid_angle = if min_key <= ANGLE_FLOOR { tg.angle(mi, mj) } else { min_key };
    let min_grid_pair = PairPoint::new(mi as f64 * tg.h, mj as f64 * tg.h);

    let minima: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let tg = &tg;
            (i + 1..n).filter_map(move |j| {
                if !tg.off_band(i, j, band) {
                    return None;
                }
                let a = tg.angle(i, j);
                if a >= tg.threshold {
                    return None;
                }
                // minima along a row or a column also catch zeros sitting in
                // long shallow valleys, where the 2-D grid minimum can drift
                // far from the zero
                let row_min = tg.angle(i, j + n - 1) >= a && tg.angle(i, j + 1) >= a;
                let col_min = tg.angle(i + n - 1, j) >= a && tg.angle(i + 1, j) >= a;
                (row_min || col_min).then_some((i, j))
            })
        })
        .collect();

    let refined: Vec<Option<OraclePair>> = minima
        .par_iter()
        .map(|&(i, j)| refine(curve, i as f64 * tg.h, j as f64 * tg.h, band))
        .collect();
    let rejected = refined.iter().filter(|r| r.is_none()).count();
    if rejected > 0 {
        debug!("{rejected} oracle candidates failed to refine below {ACCEPT_ANGLE}");
    }
    let pairs = dedup_by_key(refined.into_iter().flatten().collect(), 1e-4, |p| p.location, |p| p.angle);

    let continuum = detect_continuum(curve, &tg, band, &minima);
    Ok(OracleScan {
        grid: n,
        band,
        pairs: if continuum { Vec::new() } else { pairs },
        continuum,
        candidate_angle: tg.threshold,
        candidates: minima.len(),
        rejected,
        min_grid_angle,
        min_grid_pair,
    })
}

/// A connected set of below-threshold cells whose projection covers more
/// than 5% of either axis is probed from evenly spaced cells. Along a
/// family of parallel pairs nearly every probe refines to its own zero;
/// near isolated zeros the probes collapse onto a few points.
fn detect_continuum<C: SpaceCurve + ?Sized>(curve: &C, tg: &TangentGrid, band: f64, minima: &[(usize, usize)]) -> bool {
    const PROBES: usize = 16;
    const DISTINCT: usize = 12;
    let n = tg.n;
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for &start in minima {
        if seen.contains(&start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        let mut rows = HashSet::new();
        let mut cols = HashSet::new();
        let mut cells = Vec::new();
        while let Some((i, j)) = queue.pop_front() {
            rows.insert(i);
            cols.insert(j);
            cells.push((i, j));
            for di in [n - 1, 0, 1] {
                for dj in [n - 1, 0, 1] {
                    let c = tg.canonical(i + di, j + dj);
                    if c.0 != c.1 && !seen.contains(&c) && tg.off_band(c.0, c.1, band) && tg.angle(c.0, c.1) < tg.threshold {
                        seen.insert(c);
                        queue.push_back(c);
                    }
                }
            }
        }
        if (rows.len().max(cols.len()) as f64) <= 0.05 * n as f64 {
            continue;
        }
        cells.sort_unstable();
        let stride = (cells.len() / PROBES).max(1);
        let probes: Vec<OraclePair> = cells
            .iter()
            .step_by(stride)
            .take(PROBES)
            .filter_map(|&(i, j)| refine(curve, i as f64 * tg.h, j as f64 * tg.h, band))
            .collect();
        if dedup_by_key(probes, 1e-3, |p| p.location, |p| p.angle).len() >= DISTINCT {
            return true;
        }
    }
    false
}

fn unit_jet<C: SpaceCurve + ?Sized>(curve: &C, t: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let j = curve.jet(t);
    let speed = j.d1.norm();
    if !(speed > 0.0) {
        return None;
    }
    let u = j.d1 / speed;
    let du = (j.d2 - u * j.d2.dot(&u)) / speed;
    Some((u, du))
}

/// Gauss-Newton with Levenberg-Marquardt damping on `u(s) x u(t) = 0`.
fn refine<C: SpaceCurve + ?Sized>(curve: &C, s0: f64, t0: f64, band: f64) -> Option<OraclePair> {
    let (mut s, mut t) = (s0, t0);
    let (mut us, mut dus) = unit_jet(curve, s)?;
    let (mut ut, mut dut) = unit_jet(curve, t)?;
    let mut r = us.cross(&ut);
    let mut lambda = 1e-6;
    for _ in 0..60 {
        let rn = r.norm();
        if rn <= 1e-15 {
            break;
        }
        let a = dus.cross(&ut);
        let b = us.cross(&dut);
        let jtj = Matrix2::new(a.dot(&a), a.dot(&b), a.dot(&b), b.dot(&b));
        let rhs = -Vector2::new(a.dot(&r), b.dot(&r));
        let mut improved = false;
        for _ in 0..30 {
            let damped = jtj + Matrix2::identity() * (lambda * jtj.trace().max(1e-300));
            let Some(step) = damped.lu().solve(&rhs) else {
                lambda *= 10.0;
                continue;
            };
            let step = if step.norm() > 0.5 { step * (0.5 / step.norm()) } else { step };
            let (sn, tn) = (s + step.x, t + step.y);
            let (Some((usn, dusn)), Some((utn, dutn))) = (unit_jet(curve, sn), unit_jet(curve, tn)) else {
                return None;
            };
            let rnew = usn.cross(&utn);
            if rnew.norm() < rn {
                (s, t, us, dus, ut, dut, r) = (sn, tn, usn, dusn, utn, dutn, rnew);
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let location = PairPoint::new(s, t);
    let angle = r.norm().atan2(us.dot(&ut).abs());
    (angle <= ACCEPT_ANGLE && location.diagonal_distance() > band).then_some(OraclePair { location, angle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{LoopMode, QuadricLoop};
    use crate::quadric::Quadric;
    use crate::trig::{TrigLoop, TrigSeries};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn great_circle() -> QuadricLoop {
        QuadricLoop::new(TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0), Quadric::sphere(), LoopMode::Exact)
            .unwrap()
    }

    #[test]
    fn great_circle_angles() {
        let l = great_circle();
        assert_abs_diff_eq!(tangent_angle(&l, &PairPoint::new(0.0, PI)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tangent_angle(&l, &PairPoint::new(0.0, FRAC_PI_2)).unwrap(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn angle_symmetric() {
        let g = TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![1.0, 0.2], vec![0.0, 0.1]),
            TrigSeries::new(0.0, vec![0.0, 0.3], vec![1.0]),
            TrigSeries::new(0.0, vec![0.0, 0.0, 0.2], vec![0.1]),
        ])
        .unwrap();
        for (s, t) in [(0.1, 2.0), (3.0, 5.5)] {
            let a = tangent_angle(&g, &PairPoint { s, t }).unwrap();
            let b = tangent_angle(&g, &PairPoint { s: t, t: s }).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn great_circle_is_a_continuum_with_witness() {
        let l = great_circle();
        assert_eq!(brute_force_pairs(&l, 1024, DEFAULT_BAND), Err(Error::ContinuumDetected));
        let cert = certify_skew(&l, 1024, DEFAULT_BAND, DEFAULT_MARGIN).unwrap();
        assert!(!cert.is_skew);
        assert!(cert.continuum);
        assert!(cert.witness_pair.distance(&PairPoint::new(0.0, PI)) < 1e-12);
        assert!(cert.min_angle < 1e-12);
    }

    #[test]
    fn planar_circle_in_space_is_continuum() {
        let c = TrigLoop::circle(&[3.0, -1.0, 2.0], 0.7);
        assert_eq!(brute_force_pairs(&c, 1024, DEFAULT_BAND), Err(Error::ContinuumDetected));
    }

    #[test]
    fn ellipse_in_space_has_two_pairs() {
        // twisted ellipse: tangent lines parallel only at opposite vertices
        // and at the two ends of the other axis
        let e = TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![2.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(0.0, vec![0.0, 0.3], vec![0.0]),
        ])
        .unwrap();
        let pairs = brute_force_pairs(&e, 1024, DEFAULT_BAND).unwrap();
        // at (0, pi) and (pi/2, 3pi/2) the tangents are (0, 1, -0.6 sin 2t) = (0, +-1, 0)
        // and (-2, 0, 0) up to sign
        assert!(pairs.iter().any(|p| p.location.distance(&PairPoint::new(0.0, PI)) < 1e-8));
        assert!(pairs.iter().any(|p| p.location.distance(&PairPoint::new(FRAC_PI_2, 1.5 * PI)) < 1e-8));
        for p in &pairs {
            assert!(tangent_angle(&e, &p.location).unwrap() <= ACCEPT_ANGLE);
        }
    }

    #[test]
    fn rejects_small_grid_and_bad_margin() {
        let l = great_circle();
        assert!(scan(&l, 512, DEFAULT_BAND).is_err());
        assert!(certify_skew(&l, 1024, DEFAULT_BAND, 0.0).is_err());
    }
}
