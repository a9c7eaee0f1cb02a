//! Morse-Bott bookkeeping for the pair function of a loop.
//!
//! The critical set of `phi` on the torus `L = M x M` consists of the
//! diagonal `D`, the double points `A`, the antipodal points `B` and the
//! isolated parallel tangent pairs. With `mu_i` the index and `P(N_i)` the
//! Poincare polynomial of each critical manifold, the Morse inequalities say
//!
//! ```text
//! sum_i t^mu_i P(N_i) = P(L) + (1 + t) Q(t),  Q >= 0 coefficientwise.
//! ```
//!
//! Everything in the ledger is integer arithmetic; indices come from
//! measured Hessians, never from closed-form predictions.

use std::fmt;

use serde::Serialize;

use crate::census::{CrossingKind, IntersectionCensus};
use crate::curve::{QuadricLoop, SpaceCurve, VALIDATION_GRID};
use crate::error::{Error, Result};
use crate::pair::{phi_grad, phi_hess, CriticalClass, CriticalSet};
use crate::quadric::Quadric;
use crate::torus::PairPoint;
use crate::trig::grid;

/// Eigenvalues closer to zero than this make a critical point degenerate.
pub const EIGEN_TOL: f64 = 1e-10;

/// Polynomial in `t` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<i64>,
}

/// Poincare polynomials are polynomials with non-negative coefficients.
pub type PoincarePoly = Poly;

impl Poly {
    pub fn new(coeffs: &[i64]) -> Self {
        let mut p = Self { coeffs: coeffs.to_vec() };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Self { coeffs: c }
    }

    /// `(1 + t)^2`, the torus.
    pub fn torus() -> Self {
        Self::new(&[1, 2, 1])
    }

    /// `1 + t`, the circle.
    pub fn circle() -> Self {
        Self::new(&[1, 1])
    }

    /// `k` points.
    pub fn points(k: i64) -> Self {
        Self::new(&[k])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> i64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(&(0..n).map(|k| self.coeff(k) + other.coeff(k)).collect::<Vec<_>>())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(&(0..n).map(|k| self.coeff(k) - other.coeff(k)).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(&c)
    }

    /// `t^k * self`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.coeffs);
        Poly::new(&c)
    }

    /// Quotient and remainder of division by `1 + t`. The remainder is the
    /// constant `self(-1)`.
    pub fn div_one_plus_t(&self) -> (Poly, i64) {
        let Some(deg) = self.degree() else {
            return (Poly::zero(), 0);
        };
        if deg == 0 {
            return (Poly::zero(), self.coeff(0));
        }
        // synthetic division from the top coefficient down
        let mut q = vec![0; deg];
        let mut carry = 0;
        for k in (1..=deg).rev() {
            carry = self.coeff(k) - carry;
            q[k - 1] = carry;
        }
        let rem = self.coeff(0) - carry;
        let quotient = Poly::new(&q);
        debug_assert_eq!(quotient.mul(&Poly::circle()).add(&Poly::points(rem)), *self);
        (quotient, rem)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (k, &c)) in self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0).enumerate() {
            let a = c.abs();
            let body = match (k, a) {
                (0, _) => a.to_string(),
                (1, 1) => "t".to_string(),
                (1, _) => format!("{a}t"),
                (_, 1) => format!("t^{k}"),
                _ => format!("{a}t^{k}"),
            };
            match (n, c < 0) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ManifoldKind {
    Diagonal,
    Double,
    Antipodal,
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalManifoldRecord {
    pub kind: ManifoldKind,
    pub morse_index: u8,
    pub poincare: PoincarePoly,
    /// Number of points for zero-dimensional records.
    pub multiplicity: u64,
}

impl CriticalManifoldRecord {
    pub fn diagonal(index: u8) -> Self {
        Self { kind: ManifoldKind::Diagonal, morse_index: index, poincare: Poly::circle(), multiplicity: 0 }
    }

    pub fn points(kind: ManifoldKind, index: u8, count: u64) -> Self {
        Self { kind, morse_index: index, poincare: Poly::points(count as i64), multiplicity: count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseLedger {
    pub records: Vec<CriticalManifoldRecord>,
    pub ambient_poincare: PoincarePoly,
    /// `sum_i t^mu_i P(N_i)`.
    pub lhs: Poly,
    pub quotient: Poly,
    /// Nonzero when `lhs - P(L)` is not divisible by `1 + t`.
    pub remainder: i64,
    pub satisfied: bool,
}

/// Fills the ledger for the given records over the ambient manifold `L`.
pub fn check_morse_inequalities(records: Vec<CriticalManifoldRecord>, ambient: PoincarePoly) -> MorseLedger {
    let lhs = records
        .iter()
        .fold(Poly::zero(), |acc, r| acc.add(&r.poincare.shift(r.morse_index as usize)));
    let (quotient, remainder) = lhs.sub(&ambient).div_one_plus_t();
    let satisfied = remainder == 0 && quotient.is_nonnegative();
    MorseLedger { records, ambient_poincare: ambient, lhs, quotient, remainder, satisfied }
}

/// Index of a critical point of `phi` in the torus. Double and antipodal
/// points of a loop are isolated, so this is the index of the full Hessian.
pub fn point_index(l: &QuadricLoop, p: &PairPoint) -> Result<u8> {
    let g = phi_grad(l, p).norm();
    if g > 1e-9 {
        return Err(Error::InvalidInput(format!("({}, {}) is not critical: gradient {g:e}", p.s, p.t)));
    }
    let eig = phi_hess(l, p).symmetric_eigenvalues();
    if let Some(e) = eig.iter().find(|e| e.abs() < EIGEN_TOL) {
        return Err(Error::Degenerate { eigenvalue: *e });
    }
    Ok(eig.iter().filter(|&&e| e < 0.0).count() as u8)
}

/// Index of the diagonal: the second derivative of `phi` across `D`, along
/// `(1, -1)`, equals `-4 f'.f'`. The sign must be constant along the loop.
pub fn diagonal_index(l: &QuadricLoop) -> Result<u8> {
    let metric = l.quadric().metric();
    let mut sign = 0i8;
    for t in grid(VALIDATION_GRID) {
        let d = l.tangent(t);
        let normal = -4.0 * metric.dot(&d, &d);
        if normal.abs() < EIGEN_TOL {
            return Err(Error::Degenerate { eigenvalue: normal });
        }
        let s = if normal < 0.0 { -1 } else { 1 };
        if sign != 0 && s != sign {
            return Err(Error::NonConstantType);
        }
        sign = s;
    }
    Ok(u8::from(sign < 0))
}

/// The diagonal index as stated for each quadric type: 1 on the sphere and
/// 0 on both hyperboloids. On the one-sheeted hyperboloid a space-like loop
/// measures 1, see [`MeasuredLedger::diagonal_discrepancy`].
pub fn stated_diagonal_index(q: &Quadric) -> u8 {
    match q.metric().pq() {
        (2, 0) => 1,
        _ => 0,
    }
}

/// Predicted indices of double and antipodal points: `p` and `q`.
pub fn predicted_point_index(kind: CrossingKind, q: &Quadric) -> u8 {
    let (p, qm) = q.metric().pq();
    match kind {
        CrossingKind::Double => p as u8,
        CrossingKind::Antipodal => qm as u8,
    }
}

/// Numbers of parallel tangent pairs of index 0, 1 and 2, counted once per
/// unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IndexCounts {
    pub d0: u64,
    pub d1: u64,
    pub d2: u64,
}

impl IndexCounts {
    pub fn from_critical_set(set: &CriticalSet) -> Self {
        let mut c = IndexCounts::default();
        for r in set.of_class(CriticalClass::ParallelTangent) {
            match r.morse_index {
                Some(0) => c.d0 += 1,
                Some(1) => c.d1 += 1,
                Some(2) => c.d2 += 1,
                _ => {}
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.d0 + self.d1 + self.d2
    }
}

/// Ledger built from measurements, with the predicted indices kept
/// next to them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredLedger {
    pub ledger: MorseLedger,
    pub diagonal_index: u8,
    pub stated_diagonal_index: u8,
    /// Measured diagonal index differs from the stated one.
    pub diagonal_discrepancy: bool,
    /// Measured indices of double points, one per unordered pair.
    pub double_indices: Vec<u8>,
    pub antipodal_indices: Vec<u8>,
    /// Every double point measured `p` and every antipodal point `q`.
    pub point_indices_match: bool,
    pub counts: IndexCounts,
}

/// Feeds measured data into the ledger. Each unordered pair enters twice,
/// as `(s, t)` and `(t, s)`.
pub fn measured_ledger(l: &QuadricLoop, census: &IntersectionCensus, set: &CriticalSet) -> Result<MeasuredLedger> {
    let q = l.quadric();
    let diagonal_index = diagonal_index(l)?;
    let mut records = vec![CriticalManifoldRecord::diagonal(diagonal_index)];
    let indices = |kind: CrossingKind| -> Result<Vec<u8>> {
        census.pairs(kind).iter().map(|c| point_index(l, &c.location)).collect()
    };
    let double_indices = indices(CrossingKind::Double)?;
    let antipodal_indices = indices(CrossingKind::Antipodal)?;
    for (kind, list) in [(ManifoldKind::Double, &double_indices), (ManifoldKind::Antipodal, &antipodal_indices)] {
        for k in 0..=2u8 {
            let n = list.iter().filter(|&&i| i == k).count() as u64;
            if n > 0 {
                records.push(CriticalManifoldRecord::points(kind, k, 2 * n));
            }
        }
    }
    let counts = IndexCounts::from_critical_set(set);
    for (k, n) in [(0u8, counts.d0), (1, counts.d1), (2, counts.d2)] {
        if n > 0 {
            records.push(CriticalManifoldRecord::points(ManifoldKind::Isolated, k, 2 * n));
        }
    }
    let point_indices_match = double_indices
        .iter()
        .all(|&i| i == predicted_point_index(CrossingKind::Double, q))
        && antipodal_indices
            .iter()
            .all(|&i| i == predicted_point_index(CrossingKind::Antipodal, q));
    let stated = stated_diagonal_index(q);
    Ok(MeasuredLedger {
        ledger: check_morse_inequalities(records, Poly::torus()),
        diagonal_index,
        stated_diagonal_index: stated,
        diagonal_discrepancy: stated != diagonal_index,
        double_indices,
        antipodal_indices,
        point_indices_match,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadricCase {
    /// Signature `(3, 0)`.
    Sphere,
    /// Signature `(1, 2)`, `p = 0`, `q = 2`.
    TwoSheeted,
    /// Signature `(2, 1)`, `p = q = 1`.
    OneSheeted,
}

impl QuadricCase {
    pub fn of(q: &Quadric) -> Result<Self> {
        match q.metric().pq() {
            (2, 0) => Ok(Self::Sphere),
            (0, 2) => Ok(Self::TwoSheeted),
            (1, 1) => Ok(Self::OneSheeted),
            pq => Err(Error::InvalidMetric(format!("no bounds for (p, q) = {pq:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub measured: u64,
    pub required: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub case: QuadricCase,
    pub a: u64,
    pub b: u64,
    pub counts: IndexCounts,
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

fn check(name: &str, measured: u64, required: u64) -> BoundCheck {
    BoundCheck { name: name.to_string(), measured, required, holds: measured >= required }
}

/// Lower bounds on parallel tangent pairs for each quadric type.
///
/// On the two-sheeted hyperboloid: `d1 >= 1 + a`, `d2 >= 1` and
/// `d1 + d2 >= 2 + a`. On the one-sheeted hyperboloid, for space-like loops:
/// `d0 + d2 >= a + b`, and at least two pairs when `a = b = 0`. On the
/// sphere: at least one pair, and at least `a + 2` when `b = 0`.
pub fn theorem_bounds(l: &QuadricLoop, census: &IntersectionCensus, counts: IndexCounts) -> Result<BoundsReport> {
    let case = QuadricCase::of(l.quadric())?;
    let (a, b) = (census.a as u64, census.b as u64);
    let mut checks = Vec::new();
    match case {
        QuadricCase::TwoSheeted => {
            checks.push(check("d1 >= 1 + a", counts.d1, 1 + a));
            checks.push(check("d2 >= 1", counts.d2, 1));
            checks.push(check("d1 + d2 >= 2 + a", counts.d1 + counts.d2, 2 + a));
        }
        QuadricCase::OneSheeted => {
            require_space_like(l)?;
            checks.push(check("d0 + d2 >= a + b", counts.d0 + counts.d2, a + b));
            if a == 0 && b == 0 {
                checks.push(check("d0 + d1 + d2 >= 2", counts.total(), 2));
            }
        }
        QuadricCase::Sphere => {
            checks.push(check("d0 + d1 + d2 >= 1", counts.total(), 1));
            if b == 0 {
                checks.push(check("d0 + d1 + d2 >= a + 2", counts.total(), a + 2));
            }
        }
    }
    let passed = checks.iter().all(|c| c.holds);
    Ok(BoundsReport { case, a, b, counts, checks, passed })
}

/// `f'.f' > 0` everywhere on the loop.
pub fn require_space_like(l: &QuadricLoop) -> Result<()> {
    let metric = l.quadric().metric();
    for t in grid(VALIDATION_GRID) {
        let d = l.tangent(t);
        let value = metric.dot(&d, &d);
        if !(value > 0.0) {
            return Err(Error::SpaceLikeViolation { t, value });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn circle_height_function() {
        let records = vec![
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 0, 1),
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 1, 1),
        ];
        let l = check_morse_inequalities(records, Poly::circle());
        assert!(l.satisfied);
        assert!(l.quotient.is_zero());
    }

    #[test]
    fn sphere_skew_hypothesis_violates() {
        let l = check_morse_inequalities(vec![CriticalManifoldRecord::diagonal(1)], Poly::torus());
        assert_eq!(l.lhs.sub(&l.ambient_poincare), Poly::new(&[-1, -1]));
        assert_eq!(l.quotient, Poly::new(&[-1]));
        assert_eq!(l.remainder, 0);
        assert!(!l.satisfied);
    }

    #[test]
    fn two_sheeted_example() {
        let records = vec![
            CriticalManifoldRecord::diagonal(0),
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 1, 2),
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 2, 2),
        ];
        let l = check_morse_inequalities(records, Poly::torus());
        assert_eq!(l.lhs, Poly::new(&[1, 3, 2]));
        assert_eq!(l.quotient, Poly::monomial(1));
        assert!(l.satisfied);
    }

    #[test]
    fn inexact_division_reported() {
        let l = check_morse_inequalities(vec![CriticalManifoldRecord::points(ManifoldKind::Isolated, 0, 2)], Poly::torus());
        assert_ne!(l.remainder, 0);
        assert!(!l.satisfied);
    }

    #[test]
    fn display() {
        assert_eq!(Poly::new(&[1, 2, 1]).to_string(), "1 + 2t + t^2");
        assert_eq!(Poly::new(&[-1, -1]).to_string(), "-1 - t");
        assert_eq!(Poly::new(&[0, 0, 3]).to_string(), "3t^2");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    fn poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(-20i64..20, 0..6).prop_map(|c| Poly::new(&c))
    }

    proptest! {
        #[test]
        fn division_round_trips(p in poly()) {
            let (q, r) = p.div_one_plus_t();
            prop_assert_eq!(q.mul(&Poly::circle()).add(&Poly::points(r)), p.clone());
            // remainder is the value at t = -1
            let at_minus_one: i64 = p.coeffs().iter().enumerate().map(|(k, c)| if k % 2 == 0 { *c } else { -*c }).sum();
            prop_assert_eq!(r, at_minus_one);
        }

        #[test]
        fn ring_laws(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).sub(&b), a.clone());
            prop_assert_eq!(a.shift(2), a.mul(&Poly::monomial(2)));
        }
    }
}
