//! Closed curves as trigonometric polynomials of period `2 pi`.
//!
//! Each coordinate is `c0 + sum_k (a_k cos kt + b_k sin kt)`; derivatives are
//! taken term by term, so they are exact up to rounding.

use std::f64::consts::TAU;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximal degree for generated loops.
pub const DEFAULT_DEGREE: usize = 8;

/// One coordinate of a [`TrigLoop`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub c0: f64,
    /// cosine coefficients `a_1..a_K`
    pub a: Vec<f64>,
    /// sine coefficients `b_1..b_K`
    pub b: Vec<f64>,
}

impl TrigSeries {
    pub fn constant(c0: f64) -> Self {
        Self {
            c0,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// `c0 + sum a_k cos kt + b_k sin kt` from explicit coefficient lists.
    pub fn new(c0: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        let mut s = Self { c0, a, b };
        let k = s.a.len().max(s.b.len());
        s.a.resize(k, 0.0);
        s.b.resize(k, 0.0);
        s
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    fn pad(&mut self, k: usize) {
        self.a.resize(k, 0.0);
        self.b.resize(k, 0.0);
    }

    /// Coefficients flattened as `c0, a1, b1, a2, b2, ...`.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + 2 * self.degree());
        out.push(self.c0);
        for (a, b) in self.a.iter().zip(&self.b) {
            out.push(*a);
            out.push(*b);
        }
        out
    }

    pub fn from_interleaved(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "expected 1 + 2K coefficients, got {}",
                values.len()
            )));
        }
        let k = (values.len() - 1) / 2;
        Ok(Self {
            c0: values[0],
            a: (0..k).map(|i| values[1 + 2 * i]).collect(),
            b: (0..k).map(|i| values[2 + 2 * i]).collect(),
        })
    }
}

/// Value and derivatives up to order 3 of one coordinate.
type CoordJet = [f64; 4];

/// A closed curve `t -> R^dim` of period `2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigLoop {
    coords: Vec<TrigSeries>,
}

/// Position and first two derivatives of a space curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
}

impl Jet {
    pub fn order(&self, order: usize) -> Vector3<f64> {
        match order {
            0 => self.pos,
            1 => self.d1,
            _ => self.d2,
        }
    }
}

impl TrigLoop {
    pub fn new(mut coords: Vec<TrigSeries>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("loop needs at least one coordinate".into()));
        }
        if coords
            .iter()
            .any(|c| !c.c0.is_finite() || c.a.iter().chain(&c.b).any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let k = coords.iter().map(TrigSeries::degree).max().unwrap_or(0);
        for c in &mut coords {
            c.pad(k);
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn degree(&self) -> usize {
        self.coords[0].degree()
    }

    pub fn coords(&self) -> &[TrigSeries] {
        &self.coords
    }

    /// Circle `c + r (cos t, sin t)` in the first two coordinates, constant
    /// `rest` in the remaining ones.
    pub fn circle(center: &[f64], radius: f64) -> Self {
        let coords = center
            .iter()
            .enumerate()
            .map(|(i, c)| match i {
                0 => TrigSeries::new(*c, vec![radius], vec![0.0]),
                1 => TrigSeries::new(*c, vec![0.0], vec![radius]),
                _ => TrigSeries::constant(*c),
            })
            .collect();
        Self::new(coords).expect("finite circle")
    }

    /// Coordinate values and derivatives up to order 3.
    pub fn coord_jets(&self, t: f64) -> Vec<CoordJet> {
        let k = self.degree();
        let (s1, c1) = t.sin_cos();
        let mut out: Vec<CoordJet> = self.coords.iter().map(|c| [c.c0, 0.0, 0.0, 0.0]).collect();
        // cos(kt), sin(kt) by rotation; re-seeded every 64 terms to bound drift
        let (mut ck, mut sk) = (c1, s1);
        for j in 0..k {
            let kk = (j + 1) as f64;
            if j > 0 {
                if j % 64 == 0 {
                    (sk, ck) = (kk * t).sin_cos();
                } else {
                    (ck, sk) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
                }
            }
            for (o, c) in out.iter_mut().zip(&self.coords) {
                let (a, b) = (c.a[j], c.b[j]);
                let cs = a * ck + b * sk;
                let sc = b * ck - a * sk;
                o[0] += cs;
                o[1] += kk * sc;
                o[2] -= kk * kk * cs;
                o[3] -= kk * kk * kk * sc;
            }
        }
        out
    }

    /// Derivative of the given order (0..=3) at `t`, as a coordinate vector.
    pub fn eval(&self, t: f64, order: usize) -> Vec<f64> {
        assert!(order <= 3, "derivative order above 3");
        self.coord_jets(t).iter().map(|j| j[order]).collect()
    }

    /// Position and derivatives of a three-dimensional loop.
    pub fn jet3(&self, t: f64) -> [Vector3<f64>; 4] {
        debug_assert_eq!(self.dim(), 3);
        let j = self.coord_jets(t);
        std::array::from_fn(|o| Vector3::new(j[0][o], j[1][o], j[2][o]))
    }

    /// Position and derivatives of a planar loop.
    pub fn jet2(&self, t: f64) -> [Vector2<f64>; 4] {
        debug_assert_eq!(self.dim(), 2);
        let j = self.coord_jets(t);
        std::array::from_fn(|o| Vector2::new(j[0][o], j[1][o]))
    }

    /// Random loop `base + sum_k` with `|a_k|, |b_k| <= amplitude / k^2`.
    pub fn random_perturbation<R: Rng>(
        base: &TrigLoop,
        degree: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        let coords = base
            .coords
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.pad(c.degree().max(degree));
                for k in 1..=degree {
                    let bound = amplitude / (k * k) as f64;
                    c.a[k - 1] += rng.random_range(-bound..=bound);
                    c.b[k - 1] += rng.random_range(-bound..=bound);
                }
                c
            })
            .collect();
        Self::new(coords).expect("finite coefficients")
    }

    /// Least-squares trigonometric fit of degree `degree` to `samples`, where
    /// `samples[i]` is the point at `t_i = 2 pi i / n`. Requires
    /// `n > 2 * degree`.
    pub fn fit_samples(samples: &[Vec<f64>], degree: usize) -> Result<Self> {
        let n = samples.len();
        if n <= 2 * degree {
            return Err(Error::InvalidInput(format!(
                "{n} samples cannot resolve degree {degree}"
            )));
        }
        let dim = samples[0].len();
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidInput("ragged samples".into()));
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let coords = (0..dim)
            .map(|d| {
                let mut buf: Vec<Complex<f64>> =
                    samples.iter().map(|s| Complex::new(s[d], 0.0)).collect();
                fft.process(&mut buf);
                let scale = 2.0 / n as f64;
                TrigSeries {
                    c0: buf[0].re / n as f64,
                    a: (1..=degree).map(|k| buf[k].re * scale).collect(),
                    b: (1..=degree).map(|k| -buf[k].im * scale).collect(),
                }
            })
            .collect();
        Self::new(coords)
    }

    /// Loop traversed backwards: `t -> -t`.
    pub fn reversed(&self) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|c| TrigSeries {
                c0: c.c0,
                a: c.a.clone(),
                b: c.b.iter().map(|v| -v).collect(),
            })
            .collect();
        Self { coords }
    }

    /// Largest absolute coefficient of order `k` over all coordinates.
    pub fn harmonic_magnitude(&self, k: usize) -> f64 {
        if k == 0 {
            return self.coords.iter().map(|c| c.c0.abs()).fold(0.0, f64::max);
        }
        self.coords
            .iter()
            .map(|c| c.a[k - 1].hypot(c.b[k - 1]))
            .fold(0.0, f64::max)
    }
}

/// Uniform parameter grid `2 pi i / n`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| TAU * i as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_loop(seed: u64, degree: usize) -> TrigLoop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = TrigLoop::circle(&[0.0, 0.0, 0.5], 1.0);
        TrigLoop::random_perturbation(&base, degree, 0.5, &mut rng)
    }

    #[test]
    fn circle_derivative() {
        let c = TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0);
        let d = c.eval(0.0, 1);
        assert_relative_eq!(d[0], 0.0);
        assert_relative_eq!(d[1], 1.0);
        assert_relative_eq!(d[2], 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let l = random_loop(7, 8);
        let h = 1e-5;
        for &t in &[0.1, 1.3, 2.9, 5.5] {
            for order in 1..=3 {
                let fd: Vec<f64> = l
                    .eval(t + h, order - 1)
                    .iter()
                    .zip(l.eval(t - h, order - 1))
                    .map(|(p, m)| (p - m) / (2.0 * h))
                    .collect();
                let exact = l.eval(t, order);
                let scale = exact.iter().map(|v| v.abs()).fold(1.0, f64::max);
                for (a, b) in fd.iter().zip(&exact) {
                    assert!((a - b).abs() <= 1e-7 * scale, "order {order}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn periodic() {
        let l = random_loop(3, 8);
        for order in 0..=3 {
            let a = l.eval(0.7, order);
            let b = l.eval(0.7 + TAU, order);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn high_degree_recurrence_is_accurate() {
        let k = 300;
        let mut a = vec![0.0; k];
        a[k - 1] = 1.0;
        let l = TrigLoop::new(vec![TrigSeries::new(0.0, a, vec![0.0; k])]).unwrap();
        for &t in &[0.123, 2.5, 6.0] {
            let v = l.eval(t, 0)[0];
            assert!((v - (k as f64 * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_coefficients() {
        let l = random_loop(11, 6);
        let samples: Vec<Vec<f64>> = grid(64).map(|t| l.eval(t, 0)).collect();
        let fit = TrigLoop::fit_samples(&samples, 6).unwrap();
        for (c, d) in l.coords().iter().zip(fit.coords()) {
            for (x, y) in c.interleaved().iter().zip(d.interleaved()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interleaved_round_trip() {
        let s = TrigSeries::new(1.0, vec![2.0, 4.0], vec![3.0, 5.0]);
        assert_eq!(s.interleaved(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(TrigSeries::from_interleaved(&s.interleaved()).unwrap(), s);
        assert!(TrigSeries::from_interleaved(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn reversed_runs_backwards() {
        let l = random_loop(5, 4);
        let r = l.reversed();
        let a = l.eval(-0.4, 0);
        let b = r.eval(0.4, 0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
