use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{Antiderivative, DriftCurve};
use crate::error::{Error, Result};

/// Quadrature panel width for arc length and turning angle tables.
const PANEL: f64 = TAU / 512.0;
/// Samples per unit of `u` when validating a surface over its window.
const CHECK_DENSITY: f64 = 256.0;

/// Parameter rectangle `[u0, u1] x [v0, v1]`. `u` labels rulings, `v` is the
/// unit-speed coordinate along a ruling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Window {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Result<Self> {
        if !(u[0] < u[1] && v[0] < v[1]) || !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(format!("empty or non-finite window u={u:?} v={v:?}")));
        }
        Ok(Self { u, v })
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let tol = 1e-12;
        u >= self.u[0] - tol && u <= self.u[1] + tol && v >= self.v[0] - tol && v <= self.v[1] + tol
    }

    fn u_samples(&self) -> impl Iterator<Item = f64> + '_ {
        let n = (((self.u[1] - self.u[0]) * CHECK_DENSITY).ceil() as usize).max(16);
        (0..=n).map(move |k| self.u[0] + (self.u[1] - self.u[0]) * k as f64 / n as f64)
    }
}

/// Position and partial derivatives up to order two of a surface patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub x: Vector3<f64>,
    pub xu: Vector3<f64>,
    pub xv: Vector3<f64>,
    pub xuu: Vector3<f64>,
    pub xuv: Vector3<f64>,
    pub xvv: Vector3<f64>,
}

impl SurfaceJet {
    pub fn normal(&self) -> Vector3<f64> {
        self.xu.cross(&self.xv).normalize()
    }
}

/// Same as [`SurfaceJet`] for the development map into the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneJet {
    pub p: Vector2<f64>,
    pub pu: Vector2<f64>,
    pub pv: Vector2<f64>,
    pub puu: Vector2<f64>,
    pub puv: Vector2<f64>,
    pub pvv: Vector2<f64>,
}

/// A twice differentiable parametric surface.
pub trait SurfacePatch: Sync {
    fn domain(&self) -> Window;
    fn surface_jet(&self, u: f64, v: f64) -> SurfaceJet;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuledClass {
    Cylinder,
    Cone,
    TangentDevelopable,
}

/// Shape of the foliation of the developed domain by developed rulings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FoliationKind {
    /// All leaves parallel to `direction`.
    Parallel { direction: Vector2<f64> },
    /// All leaves pass through `center`.
    Concurrent { center: Vector2<f64> },
    /// Leaves tangent to the developed edge of regression.
    Tangent,
}

/// `origin + e1 c_x(u) + e2 c_y(u) + axis v` over a planar directrix `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    origin: Vector3<f64>,
    axis: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    directrix: DriftCurve,
    window: Window,
    arclength: Antiderivative,
}

/// `apex + v w(u)` with `w` the unit direction from the apex to a directrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    apex: Vector3<f64>,
    directrix: DriftCurve,
    window: Window,
    angle: Antiderivative,
}

/// `e(u) + v T(u)` for an edge of regression `e` with unit tangent `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDevelopable {
    edge: DriftCurve,
    window: Window,
    arclength: Antiderivative,
    turning: Antiderivative,
    developed_x: Antiderivative,
    developed_y: Antiderivative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DevelopableSurface {
    Cylinder(Cylinder),
    Cone(Cone),
    TangentDevelopable(TangentDevelopable),
}

fn v3(c: &[f64]) -> Vector3<f64> {
    Vector3::new(c[0], c[1], c[2])
}

fn v2(c: &[f64]) -> Vector2<f64> {
    Vector2::new(c[0], c[1])
}

fn perp(a: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-a.y, a.x)
}

/// Unit vector `m / |m|` and its first two derivatives.
fn unit_jets(m: Vector3<f64>, m1: Vector3<f64>, m2: Vector3<f64>) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>, f64) {
    let r = m.norm();
    let w = m / r;
    let r1 = m1.dot(&w);
    let w1 = (m1 - w * r1) / r;
    let r2 = m2.dot(&w) + m1.dot(&w1);
    let w2 = (m2 - w * r2 - w1 * (2.0 * r1)) / r;
    (w, w1, w2, r)
}

impl Cylinder {
    /// The frame `e1, e2` of the directrix plane is fixed by the axis: `e1`
    /// is the normalized projection of the x-axis (the y-axis when the axis
    /// is parallel to x) and `e2 = axis x e1`.
    pub fn new(origin: Vector3<f64>, axis: Vector3<f64>, directrix: DriftCurve, window: Window) -> Result<Self> {
        if directrix.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: directrix.dim() });
        }
        // a unit axis is kept bit for bit so that files read back unchanged
        let axis = if (axis.norm_squared() - 1.0).abs() < 4.0 * f64::EPSILON {
            axis
        } else {
            axis.try_normalize(1e-12).ok_or(Error::ZeroVector)?
        };
        let seed = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (seed - axis * seed.dot(&axis)).normalize();
        let e2 = axis.cross(&e1);
        let speed = |u: f64| v2(&directrix.jets(u)[1]).norm();
        for u in window.u_samples() {
            if speed(u) < 1e-9 {
                return Err(Error::Singular { t: u });
            }
        }
        let arclength = Antiderivative::new(window.u[0], window.u[1], PANEL, speed);
        Ok(Self { origin, axis, e1, e2, directrix, window, arclength })
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }

    pub fn directrix(&self) -> &DriftCurve {
        &self.directrix
    }

    fn lift(&self, c: &[f64]) -> Vector3<f64> {
        self.e1 * c[0] + self.e2 * c[1]
    }

    fn jet(&self, u: f64, v: f64) -> SurfaceJet {
        let j = self.directrix.jets(u);
        SurfaceJet {
            x: self.origin + self.lift(&j[0]) + self.axis * v,
            xu: self.lift(&j[1]),
            xv: self.axis,
            xuu: self.lift(&j[2]),
            xuv: Vector3::zeros(),
            xvv: Vector3::zeros(),
        }
    }

    fn plane_jet(&self, u: f64, v: f64) -> PlaneJet {
        let j = self.directrix.jets(u);
        let (c1, c2) = (v2(&j[1]), v2(&j[2]));
        let speed = c1.norm();
        let sigma = self.arclength.eval(u, |x| v2(&self.directrix.jets(x)[1]).norm());
        PlaneJet {
            p: Vector2::new(sigma, v),
            pu: Vector2::new(speed, 0.0),
            pv: Vector2::new(0.0, 1.0),
            puu: Vector2::new(c1.dot(&c2) / speed, 0.0),
            puv: Vector2::zeros(),
            pvv: Vector2::zeros(),
        }
    }
}

impl Cone {
    pub fn new(apex: Vector3<f64>, directrix: DriftCurve, window: Window) -> Result<Self> {
        if directrix.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: directrix.dim() });
        }
        if window.v[0] <= 0.0 {
            return Err(Error::Singular { t: window.u[0] });
        }
        let s = Self { apex, directrix, window, angle: Antiderivative { start: 0.0, step: 1.0, values: vec![0.0, 0.0] } };
        for u in window.u_samples() {
            let j = s.directrix.jets(u);
            let m = v3(&j[0]) - apex;
            if m.norm() < 1e-9 {
                return Err(Error::Singular { t: u });
            }
            if s.direction(u).1.norm() < 1e-9 {
                return Err(Error::NonRuled(format!("cone rulings stall at u = {u}")));
            }
        }
        let angle = Antiderivative::new(window.u[0], window.u[1], PANEL, |u| s.direction(u).1.norm());
        Ok(Self { angle, ..s })
    }

    pub fn apex(&self) -> Vector3<f64> {
        self.apex
    }

    pub fn directrix(&self) -> &DriftCurve {
        &self.directrix
    }

    fn direction(&self, u: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let j = self.directrix.jets(u);
        let (w, w1, w2, _) = unit_jets(v3(&j[0]) - self.apex, v3(&j[1]), v3(&j[2]));
        (w, w1, w2)
    }

    /// Developed polar angle of the ruling `u`.
    pub fn developed_angle(&self, u: f64) -> f64 {
        self.angle.eval(u, |x| self.direction(x).1.norm())
    }

    fn jet(&self, u: f64, v: f64) -> SurfaceJet {
        let (w, w1, w2) = self.direction(u);
        SurfaceJet { x: self.apex + w * v, xu: w1 * v, xv: w, xuu: w2 * v, xuv: w1, xvv: Vector3::zeros() }
    }

    fn plane_jet(&self, u: f64, v: f64) -> PlaneJet {
        let (_, w1, w2) = self.direction(u);
        let psi = self.developed_angle(u);
        let (d1, d2) = (w1.norm(), w1.dot(&w2) / w1.norm());
        let radial = Vector2::new(psi.cos(), psi.sin());
        let around = perp(radial);
        PlaneJet {
            p: radial * v,
            pu: around * (v * d1),
            pv: radial,
            puu: (around * d2 - radial * (d1 * d1)) * v,
            puv: around * d1,
            pvv: Vector2::zeros(),
        }
    }
}

struct EdgeJet {
    e: Vector3<f64>,
    e1: Vector3<f64>,
    t: Vector3<f64>,
    t1: Vector3<f64>,
    t2: Vector3<f64>,
    /// `|e'|` and its derivative.
    speed: f64,
    speed1: f64,
    /// Turning rate `|e' x e''| / |e'|^2` and its derivative.
    turn: f64,
    turn1: f64,
}

impl TangentDevelopable {
    /// The window's `v` range must be positive: the sheet on one side of the
    /// edge of regression.
    pub fn new(edge: DriftCurve, window: Window) -> Result<Self> {
        if edge.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: edge.dim() });
        }
        if window.v[0] <= 0.0 {
            return Err(Error::Singular { t: window.u[0] });
        }
        let placeholder = Antiderivative { start: 0.0, step: 1.0, values: vec![0.0, 0.0] };
        let mut s = Self {
            edge,
            window,
            arclength: placeholder.clone(),
            turning: placeholder.clone(),
            developed_x: placeholder.clone(),
            developed_y: placeholder,
        };
        for u in window.u_samples() {
            let j = s.edge_jet(u);
            if j.speed < 1e-9 {
                return Err(Error::Singular { t: u });
            }
            if j.turn < 1e-9 {
                return Err(Error::NonRuled(format!("edge of regression has vanishing curvature at u = {u}")));
            }
        }
        let (a, b) = (window.u[0], window.u[1]);
        s.arclength = Antiderivative::new(a, b, PANEL, |u| s.edge_jet(u).speed);
        s.turning = Antiderivative::new(a, b, PANEL, |u| s.edge_jet(u).turn);
        s.developed_x = Antiderivative::new(a, b, PANEL, |u| s.edge_jet(u).speed * s.theta(u).cos());
        s.developed_y = Antiderivative::new(a, b, PANEL, |u| s.edge_jet(u).speed * s.theta(u).sin());
        Ok(s)
    }

    pub fn edge(&self) -> &DriftCurve {
        &self.edge
    }

    fn edge_jet(&self, u: f64) -> EdgeJet {
        let j = self.edge.jets(u);
        let (e, e1, e2, e3) = (v3(&j[0]), v3(&j[1]), v3(&j[2]), v3(&j[3]));
        let speed = e1.norm();
        let t = e1 / speed;
        let speed1 = e2.dot(&t);
        let t1 = (e2 - t * speed1) / speed;
        let speed2 = (e2.dot(&e2) + e1.dot(&e3) - speed1 * speed1) / speed;
        let t2 = (e3 - t * speed2 - t1 * (2.0 * speed1)) / speed;
        let c = e1.cross(&e2);
        let cn = c.norm();
        let turn = cn / (speed * speed);
        let cn1 = if cn > 0.0 { c.dot(&e1.cross(&e3)) / cn } else { 0.0 };
        let turn1 = cn1 / (speed * speed) - 2.0 * cn * speed1 / speed.powi(3);
        EdgeJet { e, e1, t, t1, t2, speed, speed1, turn, turn1 }
    }

    /// Developed tangent angle of the edge.
    pub fn theta(&self, u: f64) -> f64 {
        self.turning.eval(u, |x| self.edge_jet(x).turn)
    }

    pub fn developed_edge(&self, u: f64) -> Vector2<f64> {
        let fx = |x: f64| self.edge_jet(x).speed * self.theta(x).cos();
        let fy = |x: f64| self.edge_jet(x).speed * self.theta(x).sin();
        Vector2::new(self.developed_x.eval(u, fx), self.developed_y.eval(u, fy))
    }

    /// Arc length of the edge from the start of the window.
    pub fn edge_length(&self, u: f64) -> f64 {
        self.arclength.eval(u, |x| self.edge_jet(x).speed)
    }

    fn jet(&self, u: f64, v: f64) -> SurfaceJet {
        let j = self.edge_jet(u);
        let e2 = v3(&self.edge.jets(u)[2]);
        SurfaceJet { x: j.e + j.t * v, xu: j.e1 + j.t1 * v, xv: j.t, xuu: e2 + j.t2 * v, xuv: j.t1, xvv: Vector3::zeros() }
    }

    fn plane_jet(&self, u: f64, v: f64) -> PlaneJet {
        let j = self.edge_jet(u);
        let theta = self.theta(u);
        let tb = Vector2::new(theta.cos(), theta.sin());
        let nb = perp(tb);
        let (th1, th2) = (j.turn, j.turn1);
        PlaneJet {
            p: self.developed_edge(u) + tb * v,
            pu: tb * j.speed + nb * (v * th1),
            pv: tb,
            puu: tb * j.speed1 + nb * (j.speed * th1) + (nb * th2 - tb * (th1 * th1)) * v,
            puv: nb * th1,
            pvv: Vector2::zeros(),
        }
    }
}

impl DevelopableSurface {
    pub fn class(&self) -> RuledClass {
        match self {
            Self::Cylinder(_) => RuledClass::Cylinder,
            Self::Cone(_) => RuledClass::Cone,
            Self::TangentDevelopable(_) => RuledClass::TangentDevelopable,
        }
    }

    pub fn window(&self) -> Window {
        match self {
            Self::Cylinder(s) => s.window,
            Self::Cone(s) => s.window,
            Self::TangentDevelopable(s) => s.window,
        }
    }

    pub fn jet(&self, u: f64, v: f64) -> SurfaceJet {
        match self {
            Self::Cylinder(s) => s.jet(u, v),
            Self::Cone(s) => s.jet(u, v),
            Self::TangentDevelopable(s) => s.jet(u, v),
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Vector3<f64> {
        self.jet(u, v).x
    }

    /// The development map and its derivatives.
    pub fn plane_jet(&self, u: f64, v: f64) -> PlaneJet {
        match self {
            Self::Cylinder(s) => s.plane_jet(u, v),
            Self::Cone(s) => s.plane_jet(u, v),
            Self::TangentDevelopable(s) => s.plane_jet(u, v),
        }
    }

    pub fn develop(&self, u: f64, v: f64) -> Vector2<f64> {
        self.plane_jet(u, v).p
    }

    /// Point at `v = 0` and unit direction of the ruling `u`.
    pub fn ruling(&self, u: f64) -> (Vector3<f64>, Vector3<f64>) {
        let j = self.jet(u, 0.0);
        (j.x, j.xv)
    }

    /// Developed ruling: point at `v = 0` and unit direction, oriented by
    /// increasing `v`.
    pub fn leaf(&self, u: f64) -> (Vector2<f64>, Vector2<f64>) {
        let j = self.plane_jet(u, 0.0);
        (j.p, j.pv)
    }

    pub fn foliation(&self) -> FoliationKind {
        match self {
            Self::Cylinder(_) => FoliationKind::Parallel { direction: Vector2::new(0.0, 1.0) },
            Self::Cone(_) => FoliationKind::Concurrent { center: Vector2::zeros() },
            Self::TangentDevelopable(_) => FoliationKind::Tangent,
        }
    }

    /// First fundamental forms of the surface and of its development at
    /// `(u, v)`, as `[E, F, G]`.
    pub fn metrics(&self, u: f64, v: f64) -> ([f64; 3], [f64; 3]) {
        let (s, p) = (self.jet(u, v), self.plane_jet(u, v));
        (
            [s.xu.dot(&s.xu), s.xu.dot(&s.xv), s.xv.dot(&s.xv)],
            [p.pu.dot(&p.pu), p.pu.dot(&p.pv), p.pv.dot(&p.pv)],
        )
    }
}

impl SurfacePatch for DevelopableSurface {
    fn domain(&self) -> Window {
        self.window()
    }

    fn surface_jet(&self, u: f64, v: f64) -> SurfaceJet {
        self.jet(u, v)
    }
}

/// Decides from samples whether a patch is a cylinder, a cone or a tangent
/// developable. Patches with planar pieces have no well-defined ruling there
/// and are rejected, as are patches with non-zero Gaussian curvature.
pub fn classify_patch<P: SurfacePatch + ?Sized>(patch: &P, samples: usize) -> Result<RuledClass> {
    let w = patch.domain();
    let n = samples.max(4);
    let mut lines: Vec<(Vector3<f64>, Vector3<f64>)> = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let u = w.u[0] + (w.u[1] - w.u[0]) * (i as f64 + 0.5) / n as f64;
            let v = w.v[0] + (w.v[1] - w.v[0]) * (k as f64 + 0.5) / n as f64;
            let j = patch.surface_jet(u, v);
            let normal = j.normal();
            let first = Matrix2::new(j.xu.dot(&j.xu), j.xu.dot(&j.xv), j.xu.dot(&j.xv), j.xv.dot(&j.xv));
            let second = Matrix2::new(j.xuu.dot(&normal), j.xuv.dot(&normal), j.xuv.dot(&normal), j.xvv.dot(&normal));
            let scale = first.norm();
            if second.norm() <= 1e-9 * scale {
                return Err(Error::NonRuled(format!("planar piece around (u, v) = ({u}, {v})")));
            }
            let gauss = second.determinant() / first.determinant();
            if gauss.abs() > 1e-8 * (second.norm() / scale).powi(2).max(1.0) {
                return Err(Error::NonRuled(format!("Gaussian curvature {gauss:e} at (u, v) = ({u}, {v})")));
            }
            // the ruling is the null direction of the second fundamental form
            let eig = second.symmetric_eigen();
            let idx = if eig.eigenvalues[0].abs() < eig.eigenvalues[1].abs() { 0 } else { 1 };
            let d = eig.eigenvectors.column(idx);
            lines.push((j.x, (j.xu * d[0] + j.xv * d[1]).normalize()));
        }
    }
    let r0 = lines[0].1;
    if lines.iter().all(|(_, r)| r.cross(&r0).norm() < 1e-6) {
        return Ok(RuledClass::Cylinder);
    }
    // least-squares common point of all rulings
    let mut a = nalgebra::Matrix3::zeros();
    let mut b = Vector3::zeros();
    for (p, r) in &lines {
        let proj = nalgebra::Matrix3::identity() - r * r.transpose();
        a += proj;
        b += proj * p;
    }
    if let Some(apex) = a.lu().solve(&b) {
        let scale = lines.iter().map(|(p, _)| (p - apex).norm()).fold(0.0, f64::max);
        let residual = lines.iter().map(|(p, r)| (p - apex).cross(r).norm()).fold(0.0, f64::max);
        if residual < 1e-6 * scale.max(1.0) {
            return Ok(RuledClass::Cone);
        }
    }
    Ok(RuledClass::TangentDevelopable)
}
