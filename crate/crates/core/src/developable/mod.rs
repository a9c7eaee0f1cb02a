//! Ruled developable surfaces, their development to the plane, and the
//! search for parallel tangents of loops drawn on them.

mod burago;
mod profile;
mod surface;
mod surface_loop;
mod unfold;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::TrigLoop;

pub use burago::{BuragoFixture, BuragoParams, Fold, FoldedSurface, FIT_TOLERANCE};
pub use profile::{
    angle_profiles, cone_shortcut, cylinder_shortcut, find_parallel_on_leaf, leaf_extremes, FoliationAngleProfile, Jump,
    JumpDirection, LeafExtremes, LeafPair, ProfileSample, ProfileSettings, ProfileSide,
};
pub use surface::{
    classify_patch, Cone, Cylinder, DevelopableSurface, FoliationKind, PlaneJet, RuledClass, SurfaceJet, SurfacePatch,
    TangentDevelopable, Window,
};
pub use surface_loop::SurfaceLoop;
pub use surface_loop::ON_SURFACE_TOL;
pub use unfold::{unfold, IsometryCheck, Unfolded};

/// A trigonometric loop plus a linear drift: `c(t) = drift * t + base(t)`.
/// Used for arcs such as a helix, and for loops that wind around a closed
/// cylinder or cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftCurve {
    pub drift: Vec<f64>,
    pub base: TrigLoop,
}

impl DriftCurve {
    pub fn new(drift: Vec<f64>, base: TrigLoop) -> Result<Self> {
        if drift.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: drift.len() });
        }
        Ok(Self { drift, base })
    }

    /// A closed curve.
    pub fn closed(base: TrigLoop) -> Self {
        Self { drift: vec![0.0; base.dim()], base }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_closed(&self) -> bool {
        self.drift.iter().all(|d| *d == 0.0)
    }

    /// Value and derivatives of orders 0 to 3, indexed `[order][coordinate]`.
    pub fn jets(&self, t: f64) -> [Vec<f64>; 4] {
        let cj = self.base.coord_jets(t);
        std::array::from_fn(|o| {
            cj.iter()
                .zip(&self.drift)
                .map(|(j, d)| match o {
                    0 => j[0] + d * t,
                    1 => j[1] + d,
                    _ => j[o],
                })
                .collect()
        })
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.jets(t)[0].clone()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        const N: usize = 8;
        (0..N)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=N {
                        let k = k as f64;
                        (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                    }
                    dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn gauss<F: Fn(f64) -> f64>(a: f64, b: f64, f: &F) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre().iter().map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// Cumulative integral `F(u) = int_{a}^{u} f` of a smooth function, stored as
/// values at uniform panel boundaries. The integrand is supplied again at
/// evaluation time to integrate the last partial panel.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Antiderivative {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl Antiderivative {
    pub(crate) fn new<F: Fn(f64) -> f64>(start: f64, end: f64, max_step: f64, f: F) -> Self {
        let panels = (((end - start) / max_step).ceil() as usize).max(1);
        let step = (end - start) / panels as f64;
        let mut values = Vec::with_capacity(panels + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..panels {
            let a = start + k as f64 * step;
            acc += gauss(a, a + step, &f);
            values.push(acc);
        }
        Self { start, step, values }
    }

    pub(crate) fn eval<F: Fn(f64) -> f64>(&self, u: f64, f: F) -> f64 {
        let last = self.values.len() - 2;
        let k = (((u - self.start) / self.step).floor().max(0.0) as usize).min(last);
        let a = self.start + k as f64 * self.step;
        self.values[k] + gauss(a, u, &f)
    }
}
