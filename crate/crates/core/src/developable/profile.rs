use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use super::surface::FoliationKind;
use super::unfold::Unfolded;
use crate::curve::{golden_min, SpaceCurve};
use crate::error::{Error, Result};
use crate::quadric::line_angle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSettings {
    /// Leaves sampled at `t_k = (k + 1/2) / grid`.
    pub grid: usize,
    /// Change of an angle across one cell that marks a suspected jump.
    pub jump_threshold: f64,
    /// A located jump is kept when the one-sided values still differ by this.
    pub jump_confirm: f64,
    /// Bisection stops once the bracket in `t` is this short.
    pub bisection_tol: f64,
    /// Cells that contain a jump are split this many times before the
    /// crossing search gives up on them.
    pub refine: usize,
    /// Line angle in space accepted for a located pair.
    pub parallel_tol: f64,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        Self { grid: 1024, jump_threshold: 0.5, jump_confirm: 0.1, bisection_tol: 1e-12, refine: 16, parallel_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSide {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpDirection {
    Ascending,
    Descending,
}

/// A discontinuity of `alpha_minus` or `alpha_plus`, where the extreme
/// intersection point of the leaf switches to another branch of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub side: ProfileSide,
    pub t: f64,
    /// One-sided values at the ends of the final bisection bracket.
    pub before: f64,
    pub after: f64,
    pub direction: JumpDirection,
}

/// Extreme intersections of one leaf with the developed loop. `minus` and
/// `plus` are the points with the smallest and largest leaf coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafExtremes {
    pub t: f64,
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub c_minus: [f64; 2],
    pub c_plus: [f64; 2],
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

impl LeafExtremes {
    pub fn beta(&self) -> f64 {
        self.alpha_plus - self.alpha_minus
    }

    fn alpha(&self, side: ProfileSide) -> f64 {
        match side {
            ProfileSide::Minus => self.alpha_minus,
            ProfileSide::Plus => self.alpha_plus,
        }
    }
}

/// One row of the profile table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub t: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub beta: f64,
    /// A located jump lies in `(t_prev, t]`.
    pub jump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoliationAngleProfile {
    pub settings: ProfileSettings,
    pub leaves: Vec<LeafExtremes>,
    pub jumps: Vec<Jump>,
}

impl FoliationAngleProfile {
    pub fn samples(&self) -> Vec<ProfileSample> {
        let mut prev = 0.0;
        self.leaves
            .iter()
            .map(|l| {
                let jump = self.jumps.iter().any(|j| j.t > prev && j.t <= l.t);
                prev = l.t;
                ProfileSample { t: l.t, alpha_minus: l.alpha_minus, alpha_plus: l.alpha_plus, beta: l.beta(), jump }
            })
            .collect()
    }

    fn jump_in(&self, a: f64, b: f64) -> bool {
        self.jumps.iter().any(|j| j.t >= a && j.t <= b)
    }
}

/// A pair of loop points on one leaf whose developed tangents are parallel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafPair {
    pub t0: f64,
    pub ruling: f64,
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub c_minus: [f64; 2],
    pub c_plus: [f64; 2],
    /// `beta` at `t0`.
    pub beta: f64,
    /// Angle between the tangent lines in space.
    pub angle: f64,
}

/// Intersections of the leaf `t` with the developed loop, reduced to the
/// extreme ones, with the angles `alpha` they make with the leaf.
///
/// The loop tangent is oriented towards increasing `t`, and `alpha` is its
/// angle with the backward leaf direction. Near `t = 0` this gives
/// `alpha_minus` close to 0 and `alpha_plus` close to `pi`.
pub fn leaf_extremes(un: &Unfolded, t: f64) -> Result<LeafExtremes> {
    let roots = un.crossings(t);
    if roots.len() < 2 {
        return Err(Error::InvalidInput(format!("leaf t = {t} meets the loop {} times", roots.len())));
    }
    let curve = un.curve();
    let surface = un.surface();
    let mut lo = (f64::INFINITY, 0.0);
    let mut hi = (f64::NEG_INFINITY, 0.0);
    for tau in roots {
        let v = curve.coords(tau)[0].y;
        if v < lo.0 {
            lo = (v, tau);
        }
        if v > hi.0 {
            hi = (v, tau);
        }
    }
    let alpha = |tau: f64| -> (f64, Vector2<f64>) {
        let [uv, w1, _] = curve.coords(tau);
        let [p, d1, _] = curve.planar_jet(tau);
        let dir = surface.plane_jet(uv.x, uv.y).pv;
        let w = d1.normalize() * w1.x.signum();
        ((-w.dot(&dir)).clamp(-1.0, 1.0).acos(), p)
    };
    let (am, cm) = alpha(lo.1);
    let (ap, cp) = alpha(hi.1);
    Ok(LeafExtremes {
        t,
        tau_minus: lo.1,
        tau_plus: hi.1,
        v_minus: lo.0,
        v_plus: hi.0,
        c_minus: [cm.x, cm.y],
        c_plus: [cp.x, cp.y],
        alpha_minus: am,
        alpha_plus: ap,
    })
}

/// Samples `alpha_minus`, `alpha_plus` on the leaf grid and locates their
/// jumps.
pub fn angle_profiles(un: &Unfolded, settings: &ProfileSettings) -> Result<FoliationAngleProfile> {
    if settings.grid < 8 || settings.refine < 2 {
        return Err(Error::InvalidInput("profile grid below 8 or refine below 2".into()));
    }
    let n = settings.grid;
    let leaves = (0..n)
        .into_par_iter()
        .map(|k| leaf_extremes(un, (k as f64 + 0.5) / n as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut jumps = Vec::new();
    for w in leaves.windows(2) {
        for side in [ProfileSide::Minus, ProfileSide::Plus] {
            if (w[1].alpha(side) - w[0].alpha(side)).abs() > settings.jump_threshold {
                if let Some(j) = locate_jump(un, side, &w[0], &w[1], settings)? {
                    jumps.push(j);
                }
            }
        }
    }
    Ok(FoliationAngleProfile { settings: *settings, leaves, jumps })
}

fn locate_jump(
    un: &Unfolded,
    side: ProfileSide,
    a: &LeafExtremes,
    b: &LeafExtremes,
    settings: &ProfileSettings,
) -> Result<Option<Jump>> {
    let (mut lo, mut hi) = (a.t, b.t);
    let (mut flo, mut fhi) = (a.alpha(side), b.alpha(side));
    while hi - lo > settings.bisection_tol {
        let mid = 0.5 * (lo + hi);
        let fm = leaf_extremes(un, mid)?.alpha(side);
        if (fm - flo).abs() < (fm - fhi).abs() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if (fhi - flo).abs() <= settings.jump_confirm {
        return Ok(None);
    }
    let direction = if fhi > flo { JumpDirection::Ascending } else { JumpDirection::Descending };
    Ok(Some(Jump { side, t: 0.5 * (lo + hi), before: flo, after: fhi, direction }))
}

fn pair_at(un: &Unfolded, t: f64, settings: &ProfileSettings) -> Result<LeafPair> {
    let e = leaf_extremes(un, t)?;
    let curve = un.curve();
    let angle = line_angle(&curve.tangent(e.tau_minus), &curve.tangent(e.tau_plus))?;
    if !(angle <= settings.parallel_tol) {
        return Err(Error::ParallelCheckFailed { angle });
    }
    Ok(LeafPair {
        t0: t,
        ruling: un.ruling_of(t),
        tau_minus: e.tau_minus,
        tau_plus: e.tau_plus,
        c_minus: e.c_minus,
        c_plus: e.c_plus,
        beta: e.beta(),
        angle,
    })
}

/// Smallest `t0` where `beta` changes sign from positive to non-positive on
/// an interval where both angle profiles are continuous. The pair found is
/// checked for parallel tangents in space.
pub fn find_parallel_on_leaf(un: &Unfolded, profile: &FoliationAngleProfile) -> Result<LeafPair> {
    let s = &profile.settings;
    let beta = |t: f64| leaf_extremes(un, t).map(|e| e.beta());
    for w in profile.leaves.windows(2) {
        let (a, b) = (w[0].t, w[1].t);
        let cells: Vec<(f64, f64, f64, f64)> = if profile.jump_in(a, b) {
            let m = s.refine;
            let ts: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
            let bs = ts.iter().map(|t| beta(*t)).collect::<Result<Vec<_>>>()?;
            (0..m)
                .filter(|i| !profile.jump_in(ts[*i], ts[i + 1]))
                .map(|i| (ts[i], ts[i + 1], bs[i], bs[i + 1]))
                .collect()
        } else {
            vec![(a, b, w[0].beta(), w[1].beta())]
        };
        for (mut lo, mut hi, blo, bhi) in cells {
            if !(blo > 0.0 && bhi <= 0.0) {
                continue;
            }
            let (mut flo, mut fhi) = (blo, bhi);
            while hi - lo > s.bisection_tol {
                let mid = 0.5 * (lo + hi);
                let fm = beta(mid)?;
                if fm > 0.0 {
                    (lo, flo) = (mid, fm);
                } else {
                    (hi, fhi) = (mid, fm);
                }
            }
            // an undetected small jump leaves a gap in beta
            if (flo - fhi).abs() > 1e-6 {
                continue;
            }
            return pair_at(un, 0.5 * (lo + hi), s);
        }
    }
    Err(Error::NotFound)
}

fn shortcut<F: Fn(&LeafExtremes) -> f64>(
    un: &Unfolded,
    profile: &FoliationAngleProfile,
    objective: F,
) -> Result<LeafPair> {
    let leaves = &profile.leaves;
    let k = (0..leaves.len())
        .max_by(|i, j| objective(&leaves[*i]).total_cmp(&objective(&leaves[*j])))
        .ok_or(Error::NotFound)?;
    let a = if k == 0 { 0.0 } else { leaves[k - 1].t };
    let b = if k + 1 == leaves.len() { 1.0 } else { leaves[k + 1].t };
    if profile.jump_in(a, b) {
        return Err(Error::InvalidInput(format!("chord maximum near t = {} sits at a jump", leaves[k].t)));
    }
    let f = |t: f64| leaf_extremes(un, t).map(|e| -objective(&e)).unwrap_or(f64::INFINITY);
    let (t, _) = golden_min(f, a, b, profile.settings.bisection_tol);
    pair_at(un, t, &profile.settings)
}

/// For parallel leaves: the leaf with the longest chord between its
/// extreme intersections.
pub fn cylinder_shortcut(un: &Unfolded, profile: &FoliationAngleProfile) -> Result<LeafPair> {
    if !matches!(un.foliation(), FoliationKind::Parallel { .. }) {
        return Err(Error::InvalidInput("cylinder shortcut needs parallel leaves".into()));
    }
    shortcut(un, profile, |e| e.v_plus - e.v_minus)
}

/// For leaves through a common point `O`: the leaf maximizing `|Ox| / |Oy|`
/// over its extreme intersections `x`, `y`.
pub fn cone_shortcut(un: &Unfolded, profile: &FoliationAngleProfile) -> Result<LeafPair> {
    if !matches!(un.foliation(), FoliationKind::Concurrent { .. }) {
        return Err(Error::InvalidInput("cone shortcut needs concurrent leaves".into()));
    }
    shortcut(un, profile, |e| (e.v_plus / e.v_minus).ln())
}
