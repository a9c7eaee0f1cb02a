use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};

use super::surface::{DevelopableSurface, RuledClass};
use crate::curve::SpaceCurve;
use crate::error::{Error, Result};
use crate::trig::{grid, Jet, TrigLoop};

/// Distance from the surface allowed for a loop given in space.
pub const ON_SURFACE_TOL: f64 = 1e-9;
/// Parameter samples used to validate a loop and seed the inversion.
const SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    /// `tau -> (u, v)` directly.
    Coordinates(TrigLoop),
    /// A loop in space together with its surface coordinates at the sample
    /// parameters, used as Newton seeds.
    Space { curve: TrigLoop, seeds: Vec<Vector2<f64>> },
}

/// A loop drawn on a developable surface, with access to its surface
/// coordinates, its space jets and its developed image.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceLoop {
    surface: DevelopableSurface,
    source: Source,
}

/// Surface coordinates `(u, v)` and two derivatives along the loop.
pub type CoordJet = [Vector2<f64>; 3];

impl SurfaceLoop {
    /// A loop given by its surface coordinates, a planar [`TrigLoop`].
    pub fn from_coordinates(surface: DevelopableSurface, coords: TrigLoop) -> Result<Self> {
        if coords.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: coords.dim() });
        }
        let l = Self { surface, source: Source::Coordinates(coords) };
        for t in grid(SAMPLES) {
            l.check_window(t, l.coords(t)[0])?;
        }
        Ok(l)
    }

    /// A loop given in space. Every sample must lie within
    /// [`ON_SURFACE_TOL`] of the surface, inside the window.
    pub fn from_space_curve(surface: DevelopableSurface, curve: TrigLoop) -> Result<Self> {
        if curve.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: curve.dim() });
        }
        let mut seeds = Vec::with_capacity(SAMPLES);
        let mut prev = coarse_seed(&surface, &curve.jet3(0.0)[0]);
        for t in grid(SAMPLES) {
            let p = curve.jet3(t)[0];
            let uv = project(&surface, &p, prev);
            let distance = (surface.point(uv.x, uv.y) - p).norm();
            if distance > ON_SURFACE_TOL {
                // far from the surface near the singular locus means the
                // loop runs into it
                if touches_singular(&surface, uv) {
                    return Err(Error::Singular { t });
                }
                return Err(Error::NotOnSurface { t, distance });
            }
            seeds.push(uv);
            prev = uv;
        }
        let l = Self { surface, source: Source::Space { curve, seeds } };
        for (t, uv) in grid(SAMPLES).zip(l.seeds()) {
            l.check_window(t, uv)?;
        }
        Ok(l)
    }

    fn seeds(&self) -> Vec<Vector2<f64>> {
        match &self.source {
            Source::Space { seeds, .. } => seeds.clone(),
            Source::Coordinates(_) => grid(SAMPLES).map(|t| self.coords(t)[0]).collect(),
        }
    }

    fn check_window(&self, t: f64, uv: Vector2<f64>) -> Result<()> {
        if touches_singular(&self.surface, uv) {
            return Err(Error::Singular { t });
        }
        if !self.surface.window().contains(uv.x, uv.y) {
            return Err(Error::OutOfWindow { t });
        }
        Ok(())
    }

    pub fn surface(&self) -> &DevelopableSurface {
        &self.surface
    }

    /// Surface coordinates and their first two derivatives at `t`.
    pub fn coords(&self, t: f64) -> CoordJet {
        match &self.source {
            Source::Coordinates(c) => {
                let j = c.jet2(t);
                [j[0], j[1], j[2]]
            }
            Source::Space { curve, seeds } => {
                let h = TAU / SAMPLES as f64;
                let k = ((t.rem_euclid(TAU) / h).round() as usize) % SAMPLES;
                let [p, d1, d2, _] = curve.jet3(t);
                let uv = project(&self.surface, &p, seeds[k]);
                // differentiate X(u(t), v(t)) = f(t) twice
                let s = self.surface.jet(uv.x, uv.y);
                let frame = Matrix3x2::from_columns(&[s.xu, s.xv]);
                let normal = frame.transpose() * frame;
                let solve = |rhs: Vector3<f64>| -> Vector2<f64> {
                    normal.lu().solve(&(frame.transpose() * rhs)).unwrap_or_else(Vector2::zeros)
                };
                let w1 = solve(d1);
                let curvature = s.xuu * (w1.x * w1.x) + s.xuv * (2.0 * w1.x * w1.y) + s.xvv * (w1.y * w1.y);
                let w2 = solve(d2 - curvature);
                [uv, w1, w2]
            }
        }
    }

    /// Developed point, tangent and second derivative at `t`.
    pub fn planar_jet(&self, t: f64) -> [Vector2<f64>; 3] {
        let [uv, w1, w2] = self.coords(t);
        let p = self.surface.plane_jet(uv.x, uv.y);
        let d1 = p.pu * w1.x + p.pv * w1.y;
        let d2 = p.puu * (w1.x * w1.x) + p.puv * (2.0 * w1.x * w1.y) + p.pvv * (w1.y * w1.y) + p.pu * w2.x + p.pv * w2.y;
        [p.p, d1, d2]
    }

    pub fn planar_point(&self, t: f64) -> Vector2<f64> {
        let uv = self.coords(t)[0];
        self.surface.develop(uv.x, uv.y)
    }

    /// The original loop in space when the loop was given that way.
    pub fn space_curve(&self) -> Option<&TrigLoop> {
        match &self.source {
            Source::Space { curve, .. } => Some(curve),
            Source::Coordinates(_) => None,
        }
    }
}

impl SpaceCurve for SurfaceLoop {
    fn jet(&self, t: f64) -> Jet {
        if let Source::Space { curve, .. } = &self.source {
            return curve.jet(t);
        }
        let [uv, w1, w2] = self.coords(t);
        let s = self.surface.jet(uv.x, uv.y);
        Jet {
            pos: s.x,
            d1: s.xu * w1.x + s.xv * w1.y,
            d2: s.xuu * (w1.x * w1.x)
                + s.xuv * (2.0 * w1.x * w1.y)
                + s.xvv * (w1.y * w1.y)
                + s.xu * w2.x
                + s.xv * w2.y,
        }
    }
}

fn touches_singular(surface: &DevelopableSurface, uv: Vector2<f64>) -> bool {
    match surface.class() {
        RuledClass::Cylinder => false,
        RuledClass::Cone | RuledClass::TangentDevelopable => uv.y <= 0.0,
    }
}

/// Starting coordinates for the first sample. When the loop point is hit
/// by several rulings (a closed directrix with a long window) the one with
/// the smallest `u` wins.
fn coarse_seed(surface: &DevelopableSurface, p: &Vector3<f64>) -> Vector2<f64> {
    let w = surface.window();
    let n = 64;
    let mut cells = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for k in 0..=n {
            let u = w.u[0] + (w.u[1] - w.u[0]) * i as f64 / n as f64;
            let v = w.v[0] + (w.v[1] - w.v[0]) * k as f64 / n as f64;
            cells.push(((surface.point(u, v) - p).norm_squared(), Vector2::new(u, v)));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let projected: Vec<Vector2<f64>> = cells.iter().take(16).map(|c| project(surface, p, c.1)).collect();
    projected
        .iter()
        .filter(|uv| (surface.point(uv.x, uv.y) - p).norm() <= ON_SURFACE_TOL)
        .min_by(|a, b| a.x.total_cmp(&b.x))
        .copied()
        .unwrap_or(projected[0])
}

/// Closest surface coordinates to `p` by damped Gauss-Newton from `seed`.
fn project(surface: &DevelopableSurface, p: &Vector3<f64>, seed: Vector2<f64>) -> Vector2<f64> {
    let mut uv = seed;
    let mut lambda = 1e-12;
    for _ in 0..60 {
        let s = surface.jet(uv.x, uv.y);
        let r = s.x - p;
        let jtj = Matrix2::new(s.xu.dot(&s.xu), s.xu.dot(&s.xv), s.xu.dot(&s.xv), s.xv.dot(&s.xv));
        let g = Vector2::new(s.xu.dot(&r), s.xv.dot(&r));
        let Some(step) = (jtj + Matrix2::identity() * lambda).lu().solve(&-g) else {
            break;
        };
        let step = if step.norm() > 0.5 { step * (0.5 / step.norm()) } else { step };
        let next = uv + step;
        if (surface.point(next.x, next.y) - p).norm() <= r.norm() {
            uv = next;
            lambda = (lambda * 0.1).max(1e-14);
            if step.norm() < 1e-15 * (1.0 + uv.norm()) {
                break;
            }
        } else {
            lambda = lambda.max(1e-6) * 10.0;
            if lambda > 1e6 {
                break;
            }
        }
    }
    uv
}

#[cfg(test)]
mod tests {
    use super::super::surface::{Cylinder, Window};
    use super::super::DriftCurve;
    use super::*;
    use crate::trig::TrigSeries;

    fn cylinder() -> DevelopableSurface {
        let c = DriftCurve::closed(TrigLoop::circle(&[0.0, 0.0], 1.0));
        DevelopableSurface::Cylinder(
            Cylinder::new(Vector3::zeros(), Vector3::z(), c, Window::new([-0.5, 7.0], [-1.0, 1.0]).unwrap()).unwrap(),
        )
    }

    fn wavy() -> TrigLoop {
        TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(0.0, vec![0.0], vec![0.3]),
        ])
        .unwrap()
    }

    #[test]
    fn cylinder_unrolls_to_a_graph() {
        let l = SurfaceLoop::from_space_curve(cylinder(), wavy()).unwrap();
        // the development starts at the window edge u = -0.5
        let origin = l.planar_point(0.0);
        for t in [0.0, 0.4, 2.0, 3.9, 6.0] {
            let p = l.planar_point(t) - origin;
            assert!((p - Vector2::new(t, 0.3 * t.sin())).norm() < 1e-12, "{t} {p}");
            let [_, d1, _] = l.planar_jet(t);
            assert!((d1 - Vector2::new(1.0, 0.3 * t.cos())).norm() < 1e-10);
        }
    }

    fn check_jets(l: &SurfaceLoop) {
        let h = 1e-5;
        for t in [0.3, 2.5, 5.0] {
            let j = l.jet(t);
            let fd1 = (l.point(t + h) - l.point(t - h)) / (2.0 * h);
            let fd2 = (l.jet(t + h).d1 - l.jet(t - h).d1) / (2.0 * h);
            assert!((j.d1 - fd1).norm() < 1e-8);
            assert!((j.d2 - fd2).norm() < 1e-7);
            let [_, p1, p2] = l.planar_jet(t);
            let q1 = (l.planar_point(t + h) - l.planar_point(t - h)) / (2.0 * h);
            let q2 = (l.planar_jet(t + h)[1] - l.planar_jet(t - h)[1]) / (2.0 * h);
            assert!((p1 - q1).norm() < 1e-8);
            assert!((p2 - q2).norm() < 1e-7);
        }
    }

    #[test]
    fn chain_rule_jets() {
        let coords = TrigLoop::new(vec![
            TrigSeries::new(3.0, vec![0.8], vec![0.1]),
            TrigSeries::new(0.0, vec![0.0, 0.1], vec![0.5]),
        ])
        .unwrap();
        check_jets(&SurfaceLoop::from_coordinates(cylinder(), coords).unwrap());
        check_jets(&SurfaceLoop::from_space_curve(cylinder(), wavy()).unwrap());
    }

    #[test]
    fn window_and_surface_errors() {
        let coords = TrigLoop::circle(&[3.0, 0.0], 2.0);
        let err = SurfaceLoop::from_coordinates(cylinder(), coords).unwrap_err();
        assert!(matches!(err, Error::OutOfWindow { .. }));
        let off = TrigLoop::circle(&[0.0, 0.0, 0.0], 1.1);
        let err = SurfaceLoop::from_space_curve(cylinder(), off).unwrap_err();
        assert!(matches!(err, Error::NotOnSurface { .. }));
    }
}
