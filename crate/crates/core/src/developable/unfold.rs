use std::f64::consts::TAU;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gauss;
use super::surface::{DevelopableSurface, FoliationKind};
use super::surface_loop::SurfaceLoop;
use crate::curve::{golden_min, SpaceCurve};
use crate::error::{Error, Result};
use crate::trig::{grid, TrigLoop};

/// Samples of `u` along the loop used to bracket leaf intersections.
pub(crate) const ROOT_GRID: usize = 4096;
/// Sub-arcs compared when verifying the isometry.
const ISOMETRY_ARCS: usize = 100;

/// Quality of the development measured on one loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryCheck {
    /// Largest relative difference between developed and space lengths
    /// over random sub-arcs.
    pub max_length_error: f64,
    /// Largest distance of a developed ruling sample from the straight leaf.
    pub max_straightness_residual: f64,
}

/// A loop on a developable surface together with its development and the
/// foliation of the plane by developed rulings. Leaves are indexed by
/// `t in [0, 1]`; `t = 0` and `t = 1` are the rulings that support the loop.
#[derive(Debug, Clone)]
pub struct Unfolded {
    curve: SurfaceLoop,
    u_lo: f64,
    u_hi: f64,
    /// Loop parameters where the supporting leaves touch.
    tau_lo: f64,
    tau_hi: f64,
    u_samples: Vec<f64>,
    isometry: IsometryCheck,
}

/// Develops a loop lying on `surface` into the plane.
pub fn unfold(surface: &DevelopableSurface, curve: &TrigLoop) -> Result<Unfolded> {
    Unfolded::new(SurfaceLoop::from_space_curve(surface.clone(), curve.clone())?)
}

impl Unfolded {
    pub fn new(curve: SurfaceLoop) -> Result<Self> {
        let u_samples: Vec<f64> = grid(ROOT_GRID).map(|t| curve.coords(t)[0].x).collect();
        let h = TAU / ROOT_GRID as f64;
        let u = |t: f64| curve.coords(t)[0].x;
        let (imin, imax) = u_samples.iter().enumerate().fold((0, 0), |(lo, hi), (i, x)| {
            (if *x < u_samples[lo] { i } else { lo }, if *x > u_samples[hi] { i } else { hi })
        });
        let (tau_lo, u_lo) = golden_min(u, (imin as f64 - 1.0) * h, (imin as f64 + 1.0) * h, 1e-12);
        let (tau_hi, neg) = golden_min(|t| -u(t), (imax as f64 - 1.0) * h, (imax as f64 + 1.0) * h, 1e-12);
        let u_hi = -neg;
        if !(u_hi - u_lo > 1e-9) {
            return Err(Error::InvalidInput("loop lies on a single ruling".into()));
        }
        let isometry = check_isometry(&curve, u_lo, u_hi);
        Ok(Self {
            curve,
            u_lo,
            u_hi,
            tau_lo: tau_lo.rem_euclid(TAU),
            tau_hi: tau_hi.rem_euclid(TAU),
            u_samples,
            isometry,
        })
    }

    pub fn curve(&self) -> &SurfaceLoop {
        &self.curve
    }

    pub fn surface(&self) -> &DevelopableSurface {
        self.curve.surface()
    }

    pub fn foliation(&self) -> FoliationKind {
        self.surface().foliation()
    }

    /// Ruling parameters of the two supporting leaves.
    pub fn ruling_range(&self) -> (f64, f64) {
        (self.u_lo, self.u_hi)
    }

    /// Loop parameters where the loop touches the supporting leaves.
    pub fn contact_parameters(&self) -> (f64, f64) {
        (self.tau_lo, self.tau_hi)
    }

    pub fn isometry(&self) -> IsometryCheck {
        self.isometry
    }

    pub fn ruling_of(&self, t: f64) -> f64 {
        self.u_lo + t * (self.u_hi - self.u_lo)
    }

    pub fn leaf_of(&self, u: f64) -> f64 {
        (u - self.u_lo) / (self.u_hi - self.u_lo)
    }

    /// Point at `v = 0` and unit direction of the leaf `t`.
    pub fn leaf(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        self.surface().leaf(self.ruling_of(t))
    }

    /// Loop parameters where the loop crosses the leaf `t`, in increasing
    /// order. Brackets come from a fixed grid, so near-tangential double
    /// crossings within one grid cell are missed.
    pub fn crossings(&self, t: f64) -> Vec<f64> {
        let target = self.ruling_of(t);
        let n = ROOT_GRID;
        let h = TAU / n as f64;
        let g = |tau: f64| self.curve.coords(tau)[0].x - target;
        let mut roots = Vec::new();
        for i in 0..n {
            let (a, b) = (self.u_samples[i] - target, self.u_samples[(i + 1) % n] - target);
            if a == 0.0 {
                roots.push(i as f64 * h);
                continue;
            }
            if a * b >= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (i as f64 * h, (i + 1) as f64 * h);
            let mut glo = a;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm * glo > 0.0 {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let mut root = 0.5 * (lo + hi);
            // one Newton step recovers the last bits
            let [uv, w1, _] = self.curve.coords(root);
            if w1.x.abs() > 1e-12 {
                let step = (uv.x - target) / w1.x;
                if step.abs() < hi - lo + 1e-12 {
                    root -= step;
                }
            }
            roots.push(root.rem_euclid(TAU));
        }
        roots.sort_by(f64::total_cmp);
        roots
    }
}

fn check_isometry(curve: &SurfaceLoop, u_lo: f64, u_hi: f64) -> IsometryCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(0x15_0e_7a);
    let mut worst = 0.0f64;
    for _ in 0..ISOMETRY_ARCS {
        let a = rng.random_range(0.0..TAU);
        let len = rng.random_range(0.05..TAU);
        let panels = 64;
        let h = len / panels as f64;
        let (mut space, mut plane) = (0.0, 0.0);
        for k in 0..panels {
            let lo = a + k as f64 * h;
            space += gauss(lo, lo + h, &|t: f64| curve.tangent(t).norm());
            plane += gauss(lo, lo + h, &|t: f64| curve.planar_jet(t)[1].norm());
        }
        worst = worst.max((space - plane).abs() / space);
    }
    let surface = curve.surface();
    let w = surface.window();
    let mut straight = 0.0f64;
    for i in 0..=16 {
        let u = u_lo + (u_hi - u_lo) * i as f64 / 16.0;
        let (p0, d) = surface.leaf(u);
        for k in 0..=8 {
            let v = w.v[0] + (w.v[1] - w.v[0]) * k as f64 / 8.0;
            let q = surface.develop(u, v) - p0;
            straight = straight.max((q.x * d.y - q.y * d.x).abs());
        }
    }
    IsometryCheck { max_length_error: worst, max_straightness_residual: straight }
}
