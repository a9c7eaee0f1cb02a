//! Loops on a quadric and the [`SpaceCurve`] abstraction shared by the
//! critical-point solver, the oracle and the developable module.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadric::{AmbientVector, Quadric};
use crate::trig::{grid, Jet, TrigLoop};

/// Number of grid points used to validate loops.
pub const VALIDATION_GRID: usize = 4096;

/// A closed, twice differentiable curve in three-space with period `2 pi`.
pub trait SpaceCurve: Sync {
    fn jet(&self, t: f64) -> Jet;

    fn point(&self, t: f64) -> AmbientVector {
        self.jet(t).pos
    }

    fn tangent(&self, t: f64) -> AmbientVector {
        self.jet(t).d1
    }
}

impl SpaceCurve for TrigLoop {
    fn jet(&self, t: f64) -> Jet {
        let [pos, d1, d2, _] = self.jet3(t);
        Jet { pos, d1, d2 }
    }
}

/// How a [`QuadricLoop`] puts its raw trigonometric curve on the quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopMode {
    /// The raw curve already lies on the quadric.
    Exact,
    /// `f = g / sqrt(g.g)`.
    Normalized,
}

impl LoopMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LoopMode::Exact => "exact",
            LoopMode::Normalized => "normalized",
        }
    }
}

/// A loop `f: S^1 -> Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricLoop {
    raw: TrigLoop,
    quadric: Quadric,
    mode: LoopMode,
}

impl QuadricLoop {
    /// Validates quadric membership on a 4096-point grid. Immersion is
    /// checked separately by [`QuadricLoop::check_immersion`].
    pub fn new(raw: TrigLoop, quadric: Quadric, mode: LoopMode) -> Result<Self> {
        if raw.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: raw.dim(),
            });
        }
        let l = Self { raw, quadric, mode };
        for t in grid(VALIDATION_GRID) {
            match mode {
                LoopMode::Normalized => {
                    let g = l.raw.point(t);
                    let n2 = l.quadric.dot(&g, &g);
                    if n2 <= 0.0 {
                        return Err(Error::NotNormalizable {
                            norm2: n2,
                            param: Some(t),
                        });
                    }
                }
                LoopMode::Exact => {
                    let x = l.raw.point(t);
                    let residual = (l.quadric.dot(&x, &x) - 1.0).abs();
                    if residual > 1e-9 {
                        return Err(Error::OffQuadric { t, residual });
                    }
                }
            }
        }
        Ok(l)
    }

    pub fn normalized(raw: TrigLoop, quadric: Quadric) -> Result<Self> {
        Self::new(raw, quadric, LoopMode::Normalized)
    }

    pub fn raw(&self) -> &TrigLoop {
        &self.raw
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    pub fn mode(&self) -> LoopMode {
        self.mode
    }

    /// `f(t)`, `f'(t)` or `f''(t)`.
    pub fn eval(&self, t: f64, order: usize) -> AmbientVector {
        self.jet(t).order(order)
    }

    /// Fails with [`Error::Immersion`] if `|f'|` vanishes (relative to the
    /// largest speed) anywhere on the loop.
    pub fn check_immersion(&self) -> Result<()> {
        check_immersion(self)
    }

    /// Smallest value of `f'.f'` (pseudo-metric) over the validation grid and
    /// where it occurs. Positive means space-like.
    pub fn min_tangent_square(&self) -> (f64, f64) {
        grid(VALIDATION_GRID)
            .map(|t| {
                let d = self.eval(t, 1);
                (self.quadric.dot(&d, &d), t)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Largest value of `f'.f'` over the validation grid.
    pub fn max_tangent_square(&self) -> f64 {
        grid(VALIDATION_GRID)
            .map(|t| {
                let d = self.eval(t, 1);
                self.quadric.dot(&d, &d)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SpaceCurve for QuadricLoop {
    fn jet(&self, t: f64) -> Jet {
        let [g, g1, g2, _] = self.raw.jet3(t);
        match self.mode {
            LoopMode::Exact => Jet {
                pos: g,
                d1: g1,
                d2: g2,
            },
            LoopMode::Normalized => {
                // f = w g with w = n^{-1/2}, n = g.g
                let q = &self.quadric;
                let n = q.dot(&g, &g);
                let n1 = 2.0 * q.dot(&g, &g1);
                let n2 = 2.0 * (q.dot(&g1, &g1) + q.dot(&g, &g2));
                let w = 1.0 / n.sqrt();
                let w1 = -0.5 * w / n * n1;
                let w2 = 0.75 * w / (n * n) * n1 * n1 - 0.5 * w / n * n2;
                Jet {
                    pos: g * w,
                    d1: g * w1 + g1 * w,
                    d2: g * w2 + g1 * (2.0 * w1) + g2 * w,
                }
            }
        }
    }
}

/// Minimum speed of a curve, refined around grid minima by golden-section
/// search. Returns `(min_speed, parameter, max_speed)`.
pub fn speed_extrema<C: SpaceCurve + ?Sized>(curve: &C, n: usize) -> (f64, f64, f64) {
    let speeds: Vec<f64> = grid(n).map(|t| curve.tangent(t).norm()).collect();
    let max = speeds.iter().copied().fold(0.0, f64::max);
    let h = TAU / n as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let prev = speeds[(i + n - 1) % n];
        let next = speeds[(i + 1) % n];
        if speeds[i] <= prev && speeds[i] <= next {
            let t0 = i as f64 * h;
            let (t, v) = golden_min(|t| curve.tangent(t).norm(), t0 - h, t0 + h, 1e-12);
            if v < best.0 {
                best = (v, t.rem_euclid(TAU));
            }
        }
    }
    (best.0, best.1, max)
}

/// Ratio below which `|f'|_min / |f'|_max` counts as a failed immersion.
pub const IMMERSION_RATIO: f64 = 1e-7;

pub fn check_immersion<C: SpaceCurve + ?Sized>(curve: &C) -> Result<()> {
    let (min, t, max) = speed_extrema(curve, VALIDATION_GRID);
    if !(max > 0.0) || min <= IMMERSION_RATIO * max {
        return Err(Error::Immersion { t });
    }
    Ok(())
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigSeries;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn latitude_perturbed() -> QuadricLoop {
        let raw = TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![1.0], vec![0.0]),
            TrigSeries::new(0.0, vec![0.0], vec![1.0]),
            TrigSeries::new(1.2, vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.1]),
        ])
        .unwrap();
        QuadricLoop::normalized(raw, Quadric::two_sheeted()).unwrap()
    }

    #[test]
    fn great_circle_tangent() {
        let l = QuadricLoop::new(
            TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0),
            Quadric::sphere(),
            LoopMode::Exact,
        )
        .unwrap();
        let d = l.eval(0.0, 1);
        assert!((d - AmbientVector::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constant_normalization() {
        let raw = TrigLoop::new(vec![
            TrigSeries::constant(0.0),
            TrigSeries::constant(0.0),
            TrigSeries::new(2.0, vec![0.0], vec![0.0]),
        ])
        .unwrap();
        let l = QuadricLoop::normalized(raw, Quadric::two_sheeted()).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_eq!(l.eval(t, 0), AmbientVector::new(0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn normalized_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let base = TrigLoop::circle(&[0.0, 0.0, 1.5], 1.0);
        for q in [Quadric::sphere(), Quadric::two_sheeted()] {
            let raw = TrigLoop::random_perturbation(&base, 8, 0.3, &mut rng);
            let l = QuadricLoop::normalized(raw, q).unwrap();
            let h = 1e-5;
            for &t in &[0.3, 2.0, 4.4] {
                for order in 1..=2 {
                    let fd = (l.eval(t + h, order - 1) - l.eval(t - h, order - 1)) / (2.0 * h);
                    let exact = l.eval(t, order);
                    assert!(
                        (fd - exact).norm() <= 1e-7 * exact.norm().max(1.0),
                        "order {order}: {fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn normalization_consistency() {
        let l = latitude_perturbed();
        let q = l.quadric();
        for t in grid(512) {
            let j = l.jet(t);
            assert!((q.dot(&j.pos, &j.pos) - 1.0).abs() < 1e-10);
            assert!(q.dot(&j.pos, &j.d1).abs() < 1e-10);
        }
    }

    #[test]
    fn periodicity_all_orders() {
        let l = latitude_perturbed();
        for order in 0..=2 {
            let a = l.eval(1.1, order);
            let b = l.eval(1.1 + TAU, order);
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0) * 10.0);
        }
    }

    #[test]
    fn rejects_ray_missing_quadric() {
        let raw = TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0);
        let err = QuadricLoop::normalized(raw, Quadric::two_sheeted()).unwrap_err();
        assert!(matches!(err, Error::NotNormalizable { param: Some(_), .. }));
    }

    #[test]
    fn exact_mode_checks_membership() {
        let raw = TrigLoop::circle(&[0.0, 0.0, 0.1], 1.0);
        assert!(matches!(
            QuadricLoop::new(raw, Quadric::sphere(), LoopMode::Exact),
            Err(Error::OffQuadric { .. })
        ));
    }

    #[test]
    fn cusp_fails_immersion() {
        // g'(0) = 0 in every coordinate
        let raw = TrigLoop::new(vec![
            TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.2, -0.1]),
            TrigSeries::new(0.0, vec![-0.2, 0.05], vec![0.0, 0.0]),
            TrigSeries::constant(1.0),
        ])
        .unwrap();
        let d = raw.eval(0.0, 1);
        assert!(d.iter().all(|v| v.abs() < 1e-15));
        let l = QuadricLoop::normalized(raw, Quadric::sphere()).unwrap();
        assert!(matches!(l.check_immersion(), Err(Error::Immersion { .. })));
        assert!(latitude_perturbed().check_immersion().is_ok());
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
