//! A convex loop drawn on a folded triangle: a planar rounded triangle whose
//! three corners are bent up along chords that cut across them. The folded
//! loop has no parallel tangents even though the surface carrying it is
//! developable, because the surface has flat pieces and is not ruled.

use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::surface::{SurfaceJet, SurfacePatch, Window};
use super::Antiderivative;
use crate::error::{Error, Result};
use crate::trig::{grid, TrigLoop, TrigSeries};

/// Largest allowed distance between the fitted loop and the exact model.
pub const FIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuragoParams {
    /// Bending radius of the fold strips.
    pub fold_radius: f64,
    /// Angle between each flap and the plane of the base, in radians.
    pub dihedral: f64,
    /// Radius of curvature at the corner tips of the planar loop.
    pub corner_radius: f64,
    /// Weight of the flat sides in the radius of curvature.
    pub side_weight: f64,
    /// Exponent that concentrates the turning at the corners.
    pub sharpness: u32,
    /// Arc length from each corner tip to the fold chord, before and after
    /// the tip. Unequal values keep the chords away from the directions of
    /// the sides.
    pub cut: [f64; 2],
    /// Degree of the fitted trigonometric loop.
    pub degree: usize,
    /// Samples used for the fit.
    pub samples: usize,
}

impl Default for BuragoParams {
    fn default() -> Self {
        Self {
            fold_radius: 0.05,
            dihedral: PI / 3.0,
            corner_radius: 0.1,
            side_weight: 2.4,
            sharpness: 8,
            cut: [0.2, 0.4],
            degree: 1024,
            samples: 8192,
        }
    }
}

/// One fold: points with `b . p - offset > -width / 2` are bent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fold {
    /// Corner tip parameter of the planar loop.
    pub corner: f64,
    /// Loop parameters where the chord meets the loop.
    pub chord: [f64; 2],
    /// Unit chord direction and unit normal towards the tip.
    pub direction: [f64; 2],
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Cross-section of a fold strip: the bending angle rises smoothly from 0
/// to the dihedral over the strip width, and `profile` integrates
/// `(cos, sin)` of it.
#[derive(Debug, Clone, PartialEq)]
struct CrossSection {
    dihedral: f64,
    width: f64,
    cos: Antiderivative,
    sin: Antiderivative,
}

/// Seventh-order smoothstep: zero first three derivatives at both ends.
fn smoothstep(x: f64) -> [f64; 2] {
    let x = x.clamp(0.0, 1.0);
    let x3 = x * x * x;
    let value = x3 * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
    let slope = 140.0 * x3 * (1.0 - x).powi(3);
    [value, slope]
}

impl CrossSection {
    fn new(dihedral: f64, radius: f64) -> Self {
        let width = radius * dihedral;
        let angle = |x: f64| dihedral * smoothstep(x / width)[0];
        let (cos, sin) = if width > 0.0 {
            (
                Antiderivative::new(0.0, width, width / 64.0, |x| angle(x).cos()),
                Antiderivative::new(0.0, width, width / 64.0, |x| angle(x).sin()),
            )
        } else {
            let empty = Antiderivative { start: 0.0, step: 1.0, values: vec![0.0, 0.0] };
            (empty.clone(), empty)
        };
        Self { dihedral, width, cos, sin }
    }

    fn angle(&self, x: f64) -> [f64; 2] {
        if self.width == 0.0 {
            return [if x > 0.0 { self.dihedral } else { 0.0 }, 0.0];
        }
        let [s, ds] = smoothstep(x / self.width);
        [self.dihedral * s, self.dihedral * ds / self.width]
    }

    /// Position of the bent cross-section at unbent distance `x` from the
    /// start of the strip, with first and second derivatives.
    fn profile(&self, x: f64) -> [Vector2<f64>; 3] {
        let [phi, dphi] = self.angle(x);
        let (s, c) = phi.sin_cos();
        let p = if x <= 0.0 {
            Vector2::new(x, 0.0)
        } else if x >= self.width {
            let w = self.width;
            let end = if w > 0.0 {
                Vector2::new(self.cos.eval(w, |t| self.angle(t)[0].cos()), self.sin.eval(w, |t| self.angle(t)[0].sin()))
            } else {
                Vector2::zeros()
            };
            end + Vector2::new(c, s) * (x - w)
        } else {
            Vector2::new(self.cos.eval(x, |t| self.angle(t)[0].cos()), self.sin.eval(x, |t| self.angle(t)[0].sin()))
        };
        [p, Vector2::new(c, s), Vector2::new(-s, c) * dphi]
    }
}

/// The folded triangle and the loop on it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuragoFixture {
    params: BuragoParams,
    planar: TrigLoop,
    folds: Vec<Fold>,
    section: CrossSection,
    curve: TrigLoop,
    fit_deviation: f64,
}

/// Coefficients `r_j` of the radius of curvature `sum_j r_j cos(3 j theta)`.
fn radius_coefficients(p: &BuragoParams) -> Vec<f64> {
    let m = p.sharpness as usize;
    let binom = |n: usize, k: usize| (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64);
    let scale = p.side_weight / 4f64.powi(m as i32);
    (0..=m)
        .map(|j| match j {
            0 => p.corner_radius + scale * binom(2 * m, m),
            _ => 2.0 * scale * binom(2 * m, m - j),
        })
        .collect()
}

/// The planar loop with tangent angle `theta` and the radius of curvature
/// above, written out as a trigonometric polynomial.
fn planar_loop(r: &[f64]) -> TrigLoop {
    let degree = 3 * (r.len() - 1) + 1;
    let mut xb = vec![0.0; degree];
    let mut ya = vec![0.0; degree];
    xb[0] += r[0];
    ya[0] -= r[0];
    for (j, rj) in r.iter().enumerate().skip(1) {
        for (k, sign) in [(3 * j + 1, 1.0), (3 * j - 1, -1.0)] {
            let kf = k as f64;
            xb[k - 1] += 0.5 * rj / kf;
            ya[k - 1] -= sign * 0.5 * rj / kf;
        }
    }
    TrigLoop::new(vec![TrigSeries::new(0.0, vec![0.0; degree], xb), TrigSeries::new(0.0, ya, vec![0.0; degree])])
        .expect("finite coefficients")
}

fn arclength(r: &[f64], theta: f64) -> f64 {
    r[0] * theta + r.iter().enumerate().skip(1).map(|(j, rj)| rj * (3.0 * j as f64 * theta).sin() / (3.0 * j as f64)).sum::<f64>()
}

/// Parameter where the arc length from `theta0` equals `length` (signed).
fn arc_to(r: &[f64], theta0: f64, length: f64) -> f64 {
    let target = arclength(r, theta0) + length;
    let (mut lo, mut hi) = (theta0 - TAU, theta0 + TAU);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if arclength(r, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl BuragoFixture {
    pub fn new(params: BuragoParams) -> Result<Self> {
        let p = &params;
        let invalid = |m: &str| Err(Error::InvalidFixture(m.to_string()));
        if !(p.fold_radius > 0.0 && p.fold_radius.is_finite()) {
            return invalid("fold radius must be positive");
        }
        if !(0.0..PI).contains(&p.dihedral) {
            return invalid("dihedral must lie in [0, pi); larger angles push the flaps through the base");
        }
        if !(p.corner_radius > 0.0 && p.side_weight > 0.0 && p.sharpness >= 1) {
            return invalid("corner radius, side weight and sharpness must be positive");
        }
        if p.samples <= 2 * p.degree {
            return invalid("too few samples for the fit degree");
        }
        let r = radius_coefficients(p);
        let side = (arclength(&r, TAU) / 3.0) / 2.0;
        if !(p.cut.iter().all(|c| *c > 0.0 && *c < side)) {
            return invalid("cut lengths must be positive and shorter than half a side");
        }
        let planar = planar_loop(&r);
        let section = CrossSection::new(p.dihedral, p.fold_radius);
        let folds: Vec<Fold> = (0..3)
            .map(|c| {
                let corner = PI / 3.0 + TAU * c as f64 / 3.0;
                let chord = [arc_to(&r, corner, -p.cut[0]), arc_to(&r, corner, p.cut[1])];
                let a = planar.jet2(chord[0])[0];
                let b = planar.jet2(chord[1])[0];
                let d = (b - a).normalize();
                let mut n = Vector2::new(d.y, -d.x);
                if n.dot(&(planar.jet2(corner)[0] - a)) < 0.0 {
                    n = -n;
                }
                Fold { corner, chord, direction: [d.x, d.y], normal: [n.x, n.y], offset: n.dot(&a) }
            })
            .collect();
        let mut fixture = Self { params, planar, folds, section, curve: TrigLoop::circle(&[0.0; 3], 0.0), fit_deviation: 0.0 };
        fixture.check_folds()?;
        let samples: Vec<Vec<f64>> = grid(p.samples).map(|t| fixture.exact(t).iter().copied().collect()).collect();
        fixture.curve = TrigLoop::fit_samples(&samples, p.degree)?;
        let h = TAU / p.samples as f64;
        fixture.fit_deviation = grid(p.samples)
            .flat_map(|t| [t, t + 0.5 * h])
            .map(|t| (fixture.curve.jet3(t)[0] - fixture.exact(t)).norm())
            .fold(0.0, f64::max);
        if fixture.fit_deviation > FIT_TOLERANCE {
            return Err(Error::InvalidFixture(format!(
                "trigonometric fit deviates by {:e}; raise the degree",
                fixture.fit_deviation
            )));
        }
        Ok(fixture)
    }

    /// Fold regions must not meet inside the triangle, and each must cut off
    /// a single arc of the loop.
    fn check_folds(&self) -> Result<()> {
        let half = 0.5 * self.section.width;
        let n = 4096;
        for (k, f) in self.folds.iter().enumerate() {
            let inside: Vec<bool> = grid(n).map(|t| self.signed(f, self.planar.jet2(t)[0]) > -half).collect();
            let runs = (0..n).filter(|i| inside[*i] && !inside[(i + n - 1) % n]).count();
            if runs != 1 {
                return Err(Error::InvalidFixture(format!("fold {k} meets the loop in {runs} arcs")));
            }
            if self.signed(f, self.planar.jet2(f.corner)[0]) <= half {
                return Err(Error::InvalidFixture(format!("fold strip {k} covers its corner")));
            }
        }
        for r in [0.25, 0.5, 0.75, 1.0] {
            for t in grid(n) {
                let q = self.planar.jet2(t)[0] * r;
                let active = self.folds.iter().filter(|f| self.signed(f, q) > -half).count();
                if active > 1 {
                    return Err(Error::InvalidFixture(format!("fold regions overlap near {q:?}")));
                }
            }
        }
        Ok(())
    }

    fn signed(&self, f: &Fold, p: Vector2<f64>) -> f64 {
        f.normal[0] * p.x + f.normal[1] * p.y - f.offset
    }

    /// The folding map of the plane and its first two derivatives as
    /// `[F, F_x, F_y, F_xx, F_xy, F_yy]`.
    pub fn fold_jet(&self, p: Vector2<f64>) -> [Vector3<f64>; 6] {
        let half = 0.5 * self.section.width;
        let flat = [
            Vector3::new(p.x, p.y, 0.0),
            Vector3::x(),
            Vector3::y(),
            Vector3::zeros(),
            Vector3::zeros(),
            Vector3::zeros(),
        ];
        let Some(f) = self.folds.iter().find(|f| self.signed(f, p) > -half) else {
            return flat;
        };
        let x = self.signed(f, p) + half;
        let b = Vector3::new(f.normal[0], f.normal[1], 0.0);
        let lift = |c: Vector2<f64>| b * c.x + Vector3::z() * c.y;
        let [c, c1, c2] = self.section.profile(x);
        let (bx, by) = (f.normal[0], f.normal[1]);
        let first = lift(c1) - b;
        [
            flat[0] + lift(c) - b * x,
            Vector3::x() + first * bx,
            Vector3::y() + first * by,
            lift(c2) * (bx * bx),
            lift(c2) * (bx * by),
            lift(c2) * (by * by),
        ]
    }

    /// The folded loop evaluated from the exact model.
    pub fn exact(&self, t: f64) -> Vector3<f64> {
        self.fold_jet(self.planar.jet2(t)[0])[0]
    }

    pub fn params(&self) -> &BuragoParams {
        &self.params
    }

    /// The fitted loop in space.
    pub fn curve(&self) -> &TrigLoop {
        &self.curve
    }

    /// The rounded triangle before folding.
    pub fn planar(&self) -> &TrigLoop {
        &self.planar
    }

    pub fn folds(&self) -> &[Fold] {
        &self.folds
    }

    pub fn fit_deviation(&self) -> f64 {
        self.fit_deviation
    }

    /// The folded disc bounded by the loop, parameterized by
    /// `(r, theta) -> F(r * planar(theta))`.
    pub fn surface(&self) -> FoldedSurface<'_> {
        FoldedSurface { fixture: self }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FoldedSurface<'a> {
    fixture: &'a BuragoFixture,
}

impl SurfacePatch for FoldedSurface<'_> {
    fn domain(&self) -> Window {
        Window { u: [0.2, 1.0], v: [0.0, TAU] }
    }

    fn surface_jet(&self, r: f64, theta: f64) -> SurfaceJet {
        let [g, g1, g2, _] = self.fixture.planar.jet2(theta);
        let [f, fx, fy, fxx, fxy, fyy] = self.fixture.fold_jet(g * r);
        let d = |w: Vector2<f64>| fx * w.x + fy * w.y;
        let dd = |a: Vector2<f64>, b: Vector2<f64>| fxx * (a.x * b.x) + fxy * (a.x * b.y + a.y * b.x) + fyy * (a.y * b.y);
        let (pr, pt) = (g, g1 * r);
        SurfaceJet {
            x: f,
            xu: d(pr),
            xv: d(pt),
            xuu: dd(pr, pr),
            xuv: dd(pr, pt) + d(g1),
            xvv: dd(pt, pt) + d(g2 * r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::surface::{classify_patch, DevelopableSurface};
    use super::*;

    fn quick(dihedral: f64) -> BuragoFixture {
        BuragoFixture::new(BuragoParams { dihedral, degree: 768, samples: 4096, ..Default::default() }).unwrap_or_else(|e| panic!("{e}"))
    }

    #[test]
    fn planar_loop_turns_with_its_parameter() {
        let r = radius_coefficients(&BuragoParams::default());
        let g = planar_loop(&r);
        for t in [0.0, 0.7, 1.0, 2.5, 4.0] {
            let [_, d1, _, _] = g.jet2(t);
            let rho: f64 = r.iter().enumerate().map(|(j, rj)| rj * (3.0 * j as f64 * t).cos()).sum();
            assert!((d1 - Vector2::new(t.cos(), t.sin()) * rho).norm() < 1e-13);
        }
        let speed = |t: f64| g.jet2(t)[1].norm();
        let table = Antiderivative::new(0.0, 2.0, 0.01, speed);
        assert!((arclength(&r, 2.0) - arclength(&r, 0.0) - table.eval(2.0, speed)).abs() < 1e-12);
    }

    #[test]
    fn folding_is_an_isometry() {
        let fx = quick(PI / 3.0);
        // the first fundamental form of the folding map is the identity
        for t in grid(97) {
            for r in [0.5, 0.9, 0.99, 1.0] {
                let [_, a, b, ..] = fx.fold_jet(fx.planar.jet2(t)[0] * r);
                assert!((a.norm() - 1.0).abs() < 1e-12 && (b.norm() - 1.0).abs() < 1e-12 && a.dot(&b).abs() < 1e-12);
            }
        }
        let h = 1e-6;
        let p = Vector2::from(fx.folds[0].normal) * (fx.folds[0].offset) + Vector2::from(fx.folds[0].direction) * 0.01;
        let j = fx.fold_jet(p);
        let fd = (fx.fold_jet(p + Vector2::x() * h)[1] - fx.fold_jet(p - Vector2::x() * h)[1]) / (2.0 * h);
        assert!((j[3] - fd).norm() < 1e-5 * (1.0 + j[3].norm()));
    }

    #[test]
    fn fit_is_close_to_the_model() {
        let fx = BuragoFixture::new(BuragoParams::default()).unwrap();
        assert!(fx.fit_deviation() <= FIT_TOLERANCE);
    }

    #[test]
    fn folded_surface_is_not_ruled() {
        let fx = quick(PI / 3.0);
        let err = classify_patch(&fx.surface(), 8).unwrap_err();
        assert!(matches!(err, Error::NonRuled(_)));
        let _ = DevelopableSurface::class;
    }

    #[test]
    fn invalid_parameters() {
        for params in [
            BuragoParams { dihedral: 4.0, ..Default::default() },
            BuragoParams { fold_radius: -1.0, ..Default::default() },
            BuragoParams { cut: [1.5, 1.5], ..Default::default() },
            BuragoParams { fold_radius: 5.0, ..Default::default() },
        ] {
            assert!(matches!(BuragoFixture::new(params), Err(Error::InvalidFixture(_))), "{params:?}");
        }
    }
}
