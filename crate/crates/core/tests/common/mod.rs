//! Independent oracles shared by the integration tests. Nothing here calls
//! the analytic derivatives, the development maps or the parallel finders
//! of the library; everything is rebuilt from point evaluations.

#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2, Vector3};
use skewloops::curve::SpaceCurve;
use skewloops::pair::PairObjective;

/// Finite-difference step used for derivative checks.
pub const FD_STEP: f64 = 1e-5;

/// Central differences of `f` at `(s, t)`.
pub fn fd_grad(f: impl Fn(f64, f64) -> f64, s: f64, t: f64, h: f64) -> Vector2<f64> {
    Vector2::new((f(s + h, t) - f(s - h, t)) / (2.0 * h), (f(s, t + h) - f(s, t - h)) / (2.0 * h))
}

/// Central differences of the value, second order in `h`.
pub fn fd_hess(f: impl Fn(f64, f64) -> f64, s: f64, t: f64, h: f64) -> Matrix2<f64> {
    let c = f(s, t);
    let ss = (f(s + h, t) - 2.0 * c + f(s - h, t)) / (h * h);
    let tt = (f(s, t + h) - 2.0 * c + f(s, t - h)) / (h * h);
    let st = (f(s + h, t + h) - f(s + h, t - h) - f(s - h, t + h) + f(s - h, t - h)) / (4.0 * h * h);
    Matrix2::new(ss, st, st, tt)
}

/// Central differences of an analytic gradient, which is how the Hessian
/// check avoids the cancellation of second differences of the value.
pub fn fd_jacobian(g: impl Fn(f64, f64) -> Vector2<f64>, s: f64, t: f64, h: f64) -> Matrix2<f64> {
    let ds = (g(s + h, t) - g(s - h, t)) / (2.0 * h);
    let dt = (g(s, t + h) - g(s, t - h)) / (2.0 * h);
    Matrix2::from_columns(&[ds, dt])
}

/// Largest relative error of gradient and Hessian against finite
/// differences, each measured against `max(norm, 1)`.
pub fn derivative_errors<O: PairObjective + ?Sized>(obj: &O, s: f64, t: f64) -> (f64, f64) {
    let g = obj.grad(s, t);
    let fg = fd_grad(|a, b| obj.value(a, b), s, t, FD_STEP);
    let h = obj.hess(s, t);
    let fh = fd_jacobian(|a, b| obj.grad(a, b), s, t, FD_STEP);
    let fh_value = fd_hess(|a, b| obj.value(a, b), s, t, 1e-3);
    // the value-based Hessian is a coarse cross-check of the gradient-based one
    assert!((fh - fh_value).norm() <= 1e-4 * fh.norm().max(1.0), "inconsistent FD Hessians at ({s}, {t})");
    ((g - fg).norm() / g.norm().max(1.0), (h - fh).norm() / h.norm().max(1.0))
}

/// Unit tangent from central differences of positions.
pub fn fd_tangent(point: impl Fn(f64) -> Vector3<f64>, t: f64) -> Vector3<f64> {
    let h = 1e-5;
    let d = (point(t + h) - point(t - h)) / (2.0 * h);
    d.normalize()
}

/// Angle between tangent lines, in `[0, pi/2]`, from finite differences.
pub fn fd_line_angle(point: impl Fn(f64) -> Vector3<f64>, s: f64, t: f64) -> f64 {
    let (u, v) = (fd_tangent(&point, s), fd_tangent(&point, t));
    u.cross(&v).norm().atan2(u.dot(&v).abs())
}

/// Same, for a library curve.
pub fn curve_line_angle<C: SpaceCurve + ?Sized>(c: &C, s: f64, t: f64) -> f64 {
    fd_line_angle(|x| c.point(x), s, t)
}

/// Length of `p` over `[a, b]` by a fine polyline with Richardson
/// extrapolation.
pub fn polyline_length<P: Fn(f64) -> Vec<f64>>(p: P, a: f64, b: f64, n: usize) -> f64 {
    let len = |m: usize| -> f64 {
        let h = (b - a) / m as f64;
        let mut prev = p(a);
        let mut total = 0.0;
        for k in 1..=m {
            let next = p(a + k as f64 * h);
            total += prev.iter().zip(&next).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            prev = next;
        }
        total
    };
    // chord error is second order in h
    (4.0 * len(2 * n) - len(n)) / 3.0
}

/// Flat-torus distance between unordered pairs, written out directly.
pub fn pair_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let direct = circ(a.0, b.0).hypot(circ(a.1, b.1));
    let swapped = circ(a.0, b.1).hypot(circ(a.1, b.0));
    direct.min(swapped)
}
