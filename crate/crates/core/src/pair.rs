//! The pair function `phi(s, t) = f(s) . f(t)` on the torus, the graph
//! variant `psi(s, t) = tau(g(s) - g(t))`, and a Newton solver for their
//! critical points.
//!
//! Off the diagonal and off the double and antipodal sets, a critical point
//! of `phi` is exactly a pair of parameters with parallel tangents.

use std::f64::consts::TAU;

use log::debug;
use nalgebra::{Matrix2, Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::census::{census, CrossingKind, IntersectionCensus, DEFAULT_CENSUS_GRID};
use crate::curve::{QuadricLoop, SpaceCurve};
use crate::error::{Error, Result};
use crate::quadric::{line_angle, PseudoMetric};
use crate::torus::{dedup_by_key, PairPoint};
use crate::trig::{grid, Jet, TrigLoop};

/// A smooth symmetric function on the torus with second derivatives.
pub trait PairObjective: Sync {
    fn value(&self, s: f64, t: f64) -> f64;
    fn grad(&self, s: f64, t: f64) -> Vector2<f64>;
    fn hess(&self, s: f64, t: f64) -> Matrix2<f64>;

    /// Gradient on the `n x n` grid, row-major in `s`.
    fn grad_grid(&self, n: usize) -> Vec<Vector2<f64>> {
        let h = TAU / n as f64;
        (0..n * n)
            .into_par_iter()
            .map(|k| self.grad((k / n) as f64 * h, (k % n) as f64 * h))
            .collect()
    }

    /// Angle between the tangent lines of the underlying space curve at `s`
    /// and `t`, when the objective comes from one.
    fn tangent_angle(&self, _s: f64, _t: f64) -> Option<f64> {
        None
    }
}

/// `phi` for a space curve and a pseudo-scalar product.
pub struct PhiObjective<'a, C: SpaceCurve + ?Sized> {
    curve: &'a C,
    metric: &'a PseudoMetric,
}

impl<'a, C: SpaceCurve + ?Sized> PhiObjective<'a, C> {
    pub fn new(curve: &'a C, metric: &'a PseudoMetric) -> Self {
        Self { curve, metric }
    }

    fn dot(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        self.metric.dot(u, v)
    }

    fn grad_from(&self, a: &Jet, b: &Jet) -> Vector2<f64> {
        Vector2::new(self.dot(&a.d1, &b.pos), self.dot(&a.pos, &b.d1))
    }
}

impl<C: SpaceCurve + ?Sized> PairObjective for PhiObjective<'_, C> {
    fn value(&self, s: f64, t: f64) -> f64 {
        self.dot(&self.curve.point(s), &self.curve.point(t))
    }

    fn grad(&self, s: f64, t: f64) -> Vector2<f64> {
        self.grad_from(&self.curve.jet(s), &self.curve.jet(t))
    }

    fn hess(&self, s: f64, t: f64) -> Matrix2<f64> {
        let (a, b) = (self.curve.jet(s), self.curve.jet(t));
        let mixed = self.dot(&a.d1, &b.d1);
        Matrix2::new(self.dot(&a.d2, &b.pos), mixed, mixed, self.dot(&a.pos, &b.d2))
    }

    fn grad_grid(&self, n: usize) -> Vec<Vector2<f64>> {
        let jets: Vec<Jet> = grid(n).map(|t| self.curve.jet(t)).collect();
        (0..n * n)
            .into_par_iter()
            .map(|k| self.grad_from(&jets[k / n], &jets[k % n]))
            .collect()
    }

    fn tangent_angle(&self, s: f64, t: f64) -> Option<f64> {
        line_angle(&self.curve.tangent(s), &self.curve.tangent(t)).ok()
    }
}

pub fn phi(l: &QuadricLoop, p: &PairPoint) -> f64 {
    PhiObjective::new(l, l.quadric().metric()).value(p.s, p.t)
}

pub fn phi_grad(l: &QuadricLoop, p: &PairPoint) -> Vector2<f64> {
    PhiObjective::new(l, l.quadric().metric()).grad(p.s, p.t)
}

pub fn phi_hess(l: &QuadricLoop, p: &PairPoint) -> Matrix2<f64> {
    PhiObjective::new(l, l.quadric().metric()).hess(p.s, p.t)
}

/// The degenerate quadric `z = tau(x)` over a plane `W` with a
/// non-degenerate diagonal form `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphQuadric {
    tau_signs: Vec<i8>,
}

impl GraphQuadric {
    pub fn new(tau_signs: &[i8]) -> Result<Self> {
        if tau_signs.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: tau_signs.len() });
        }
        if tau_signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidMetric(format!("tau signs must be +-1, got {tau_signs:?}")));
        }
        Ok(Self { tau_signs: tau_signs.to_vec() })
    }

    /// `z = x^2 + y^2`.
    pub fn elliptic() -> Self {
        Self { tau_signs: vec![1, 1] }
    }

    /// `z = x^2 - y^2`.
    pub fn hyperbolic() -> Self {
        Self { tau_signs: vec![1, -1] }
    }

    pub fn tau_signs(&self) -> &[i8] {
        &self.tau_signs
    }

    /// The polar bilinear form of `tau`.
    pub fn form(&self, u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
        f64::from(self.tau_signs[0]) * u.x * v.x + f64::from(self.tau_signs[1]) * u.y * v.y
    }

    pub fn tau(&self, u: &Vector2<f64>) -> f64 {
        self.form(u, u)
    }

    /// Drops the last coordinate.
    pub fn project(&self, x: &Vector3<f64>) -> Vector2<f64> {
        x.xy()
    }
}

/// A planar loop `g` together with its lift `(g, tau(g))` to a graph quadric.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLoop {
    quadric: GraphQuadric,
    g: TrigLoop,
}

impl GraphLoop {
    pub fn new(quadric: GraphQuadric, g: TrigLoop) -> Result<Self> {
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: g.dim() });
        }
        Ok(Self { quadric, g })
    }

    pub fn quadric(&self) -> &GraphQuadric {
        &self.quadric
    }

    pub fn planar(&self) -> &TrigLoop {
        &self.g
    }

    fn planar_jet(&self, t: f64) -> [Vector2<f64>; 3] {
        let [p, d1, d2, _] = self.g.jet2(t);
        [p, d1, d2]
    }
}

impl SpaceCurve for GraphLoop {
    fn jet(&self, t: f64) -> Jet {
        let [g, g1, g2] = self.planar_jet(t);
        let q = &self.quadric;
        Jet {
            pos: Vector3::new(g.x, g.y, q.tau(&g)),
            d1: Vector3::new(g1.x, g1.y, 2.0 * q.form(&g, &g1)),
            d2: Vector3::new(g2.x, g2.y, 2.0 * q.form(&g1, &g1) + 2.0 * q.form(&g, &g2)),
        }
    }
}

impl PairObjective for GraphLoop {
    fn value(&self, s: f64, t: f64) -> f64 {
        let d = self.planar_jet(s)[0] - self.planar_jet(t)[0];
        self.quadric.tau(&d)
    }

    fn grad(&self, s: f64, t: f64) -> Vector2<f64> {
        let ([gs, gs1, _], [gt, gt1, _]) = (self.planar_jet(s), self.planar_jet(t));
        let d = gs - gt;
        let q = &self.quadric;
        Vector2::new(2.0 * q.form(&d, &gs1), -2.0 * q.form(&d, &gt1))
    }

    fn hess(&self, s: f64, t: f64) -> Matrix2<f64> {
        let ([gs, gs1, gs2], [gt, gt1, gt2]) = (self.planar_jet(s), self.planar_jet(t));
        let d = gs - gt;
        let q = &self.quadric;
        let mixed = -2.0 * q.form(&gs1, &gt1);
        Matrix2::new(
            2.0 * q.form(&gs1, &gs1) + 2.0 * q.form(&d, &gs2),
            mixed,
            mixed,
            2.0 * q.form(&gt1, &gt1) - 2.0 * q.form(&d, &gt2),
        )
    }

    fn tangent_angle(&self, s: f64, t: f64) -> Option<f64> {
        line_angle(&self.tangent(s), &self.tangent(t)).ok()
    }
}

pub fn psi(l: &GraphLoop, p: &PairPoint) -> f64 {
    l.value(p.s, p.t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriticalClass {
    Diagonal,
    Double,
    Antipodal,
    ParallelTangent,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointRecord {
    pub location: PairPoint,
    pub value: f64,
    pub class: CriticalClass,
    /// Number of negative Hessian eigenvalues; absent for degenerate points.
    pub morse_index: Option<u8>,
    pub hessian_eigenvalues: [f64; 2],
    pub gradient_residual: f64,
    /// Angle between the tangent lines at `s` and `t`, when defined.
    pub tangent_angle: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Seeds per axis.
    pub grid: usize,
    /// Newton stops once the gradient norm is below this.
    pub newton_tol: f64,
    /// Converged points must reach this gradient norm.
    pub accept_tol: f64,
    pub max_iter: usize,
    /// Torus distance around the diagonal treated as diagonal data.
    pub band: f64,
    pub dedup_radius: f64,
    /// `|det H|` below this marks a degenerate critical point.
    pub det_tol: f64,
    /// At most this many degenerate points are kept as samples.
    pub degenerate_samples: usize,
    pub census_grid: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid: 512,
            newton_tol: 1e-12,
            accept_tol: 1e-10,
            max_iter: 50,
            band: 0.02,
            dedup_radius: 1e-4,
            det_tol: 1e-10,
            degenerate_samples: 64,
            census_grid: DEFAULT_CENSUS_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    /// Records sorted by location; degenerate points are sampled.
    pub records: Vec<CriticalPointRecord>,
    pub degenerate_total: usize,
    /// Converged points that fell inside the diagonal band.
    pub diagonal_hits: usize,
    pub seeds: usize,
    pub rejected_seeds: usize,
    /// Degenerate critical points or a non-generic census.
    pub non_generic: bool,
    pub settings: SolverSettings,
}

impl CriticalSet {
    pub fn of_class(&self, class: CriticalClass) -> impl Iterator<Item = &CriticalPointRecord> {
        self.records.iter().filter(move |r| r.class == class)
    }

    pub fn parallel_pairs(&self) -> Vec<PairPoint> {
        self.of_class(CriticalClass::ParallelTangent).map(|r| r.location).collect()
    }
}

/// Critical points of `phi` for a loop on a quadric.
pub fn find_critical_points(l: &QuadricLoop, settings: &SolverSettings) -> Result<CriticalSet> {
    let c = census(l, settings.census_grid);
    find_critical_points_with(l, &c, settings)
}

/// As [`find_critical_points`] with a precomputed intersection census.
pub fn find_critical_points_with(
    l: &QuadricLoop,
    c: &IntersectionCensus,
    settings: &SolverSettings,
) -> Result<CriticalSet> {
    if settings.grid < 256 {
        return Err(Error::InvalidInput(format!("solver grid {} is below 256", settings.grid)));
    }
    let objective = PhiObjective::new(l, l.quadric().metric());
    let mut set = solve(&objective, settings, |p| match c.classify(p, settings.dedup_radius) {
        Some(CrossingKind::Double) => Some(CriticalClass::Double),
        Some(CrossingKind::Antipodal) => Some(CriticalClass::Antipodal),
        None => None,
    });
    set.non_generic |= !c.is_generic();
    Ok(set)
}

/// Critical points of `psi` for a loop on a graph quadric. Points where the
/// planar curve crosses itself are classified as double points.
pub fn find_graph_critical_points(l: &GraphLoop, settings: &SolverSettings) -> Result<CriticalSet> {
    if settings.grid < 256 {
        return Err(Error::InvalidInput(format!("solver grid {} is below 256", settings.grid)));
    }
    Ok(solve(l, settings, |p| {
        let d = l.planar_jet(p.s)[0] - l.planar_jet(p.t)[0];
        (d.norm() < 1e-6).then_some(CriticalClass::Double)
    }))
}

/// Parallel tangent pairs of a loop on a quadric.
pub fn parallel_pairs(l: &QuadricLoop) -> Result<(Vec<PairPoint>, bool)> {
    let set = find_critical_points(l, &SolverSettings::default())?;
    Ok((set.parallel_pairs(), set.non_generic))
}

/// Seeds Newton's method at grid cells where both gradient components change
/// sign, refines, deduplicates and classifies.
pub fn solve<O, F>(objective: &O, settings: &SolverSettings, coincidence: F) -> CriticalSet
where
    O: PairObjective + ?Sized,
    F: Fn(&PairPoint) -> Option<CriticalClass>,
{
    let n = settings.grid;
    let h = TAU / n as f64;
    let g = objective.grad_grid(n);
    let at = |i: usize, j: usize| g[(i % n) * n + (j % n)];

    let seeds: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i..n).filter_map(move |j| {
                if PairPoint::new(i as f64 * h, j as f64 * h).diagonal_distance() <= settings.band / 2.0 {
                    return None;
                }
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for di in [n - 1, 0, 1] {
                    for dj in [n - 1, 0, 1] {
                        let v = at(i + di, j + dj);
                        for c in 0..2 {
                            lo[c] = lo[c].min(v[c]);
                            hi[c] = hi[c].max(v[c]);
                        }
                    }
                }
                (lo[0] <= 0.0 && hi[0] >= 0.0 && lo[1] <= 0.0 && hi[1] >= 0.0).then_some((i, j))
            })
        })
        .collect();

    let converged: Vec<Option<(PairPoint, f64)>> = seeds
        .par_iter()
        .map(|&(i, j)| newton(objective, i as f64 * h, j as f64 * h, settings))
        .collect();
    let rejected_seeds = converged.iter().filter(|c| c.is_none()).count();
    debug!("{} of {} seeds failed to converge", rejected_seeds, seeds.len());

    let points = dedup_by_key(
        converged.into_iter().flatten().collect(),
        settings.dedup_radius,
        |c| c.0,
        |c| c.1,
    );

    let mut diagonal_hits = 0;
    let mut records = Vec::new();
    for (p, residual) in points {
        if p.diagonal_distance() <= settings.band {
            diagonal_hits += 1;
            continue;
        }
        records.push(classify(objective, p, residual, settings, &coincidence));
    }

    let degenerate_total = records.iter().filter(|r| r.class == CriticalClass::Degenerate).count();
    if degenerate_total > settings.degenerate_samples {
        let stride = degenerate_total.div_ceil(settings.degenerate_samples);
        let mut k = 0;
        records.retain(|r| {
            if r.class != CriticalClass::Degenerate {
                return true;
            }
            k += 1;
            (k - 1) % stride == 0
        });
    }

    CriticalSet {
        records,
        degenerate_total,
        diagonal_hits,
        seeds: seeds.len(),
        rejected_seeds,
        non_generic: degenerate_total > 0,
        settings: *settings,
    }
}

fn classify<O, F>(
    objective: &O,
    p: PairPoint,
    residual: f64,
    settings: &SolverSettings,
    coincidence: &F,
) -> CriticalPointRecord
where
    O: PairObjective + ?Sized,
    F: Fn(&PairPoint) -> Option<CriticalClass>,
{
    let hess = objective.hess(p.s, p.t);
    let mut eig = hess.symmetric_eigenvalues();
    if eig[0] > eig[1] {
        eig.swap_rows(0, 1);
    }
    let det = hess.determinant();
    let class = coincidence(&p).unwrap_or(if det.abs() < settings.det_tol {
        CriticalClass::Degenerate
    } else {
        CriticalClass::ParallelTangent
    });
    let morse_index = (det.abs() >= settings.det_tol)
        .then(|| eig.iter().filter(|&&e| e < 0.0).count() as u8);
    CriticalPointRecord {
        location: p,
        value: objective.value(p.s, p.t),
        class,
        morse_index,
        hessian_eigenvalues: [eig[0], eig[1]],
        gradient_residual: residual,
        tangent_angle: objective.tangent_angle(p.s, p.t),
    }
}

/// Damped Newton on the gradient with a Levenberg-Marquardt step when the
/// Hessian is nearly singular. Returns the point and its gradient norm.
pub fn newton<O: PairObjective + ?Sized>(
    objective: &O,
    s0: f64,
    t0: f64,
    settings: &SolverSettings,
) -> Option<(PairPoint, f64)> {
    const MAX_STEP: f64 = 0.5;
    let (mut s, mut t) = (s0, t0);
    let mut g = objective.grad(s, t);
    let mut gn = g.norm();
    for _ in 0..settings.max_iter {
        if gn <= settings.newton_tol {
            break;
        }
        let hess = objective.hess(s, t);
        let scale = hess.norm().max(1e-300);
        let mut step = if hess.determinant().abs() > 1e-8 * scale * scale {
            hess.lu().solve(&(-g))?
        } else {
            let lambda = 1e-6 * scale * scale;
            (hess.transpose() * hess + Matrix2::identity() * lambda)
                .lu()
                .solve(&(-(hess.transpose() * g)))?
        };
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        let len = step.norm();
        if len > MAX_STEP {
            step *= MAX_STEP / len;
        }
        let mut accepted = false;
        for _ in 0..=20 {
            let (sn, tn) = (s + step.x, t + step.y);
            let gnew = objective.grad(sn, tn);
            if gnew.norm() < gn {
                (s, t, g, gn) = (sn, tn, gnew, gnew.norm());
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (gn <= settings.accept_tol).then(|| (PairPoint::new(s, t), gn))
}
