//! Pseudo-Euclidean linear algebra on a diagonal form of signature `(p+1, q)`
//! and the unit quadric `Q = {x : x.x = 1}`.
//!
//! Metrics are stored as sign sequences. Parallelism of lines is an affine
//! notion and is always measured with the Euclidean reference product.

use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};

/// Points and tangent vectors of the ambient space `V`.
pub type AmbientVector = Vector3<f64>;

/// Default angular tolerance for [`lines_parallel`].
pub const DEFAULT_ANGLE_TOL: f64 = 1e-7;

/// Default half-width `R` of the window used for unbounded hyperbola branches.
pub const DEFAULT_SECTION_WINDOW: f64 = 10.0;

/// A diagonal bilinear form `sum_i signs[i] u_i v_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PseudoMetric {
    signs: Vec<i8>,
}

impl PseudoMetric {
    /// Builds a metric from a sequence of `+1` / `-1` entries.
    pub fn new(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidMetric("empty sign sequence".into()));
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidMetric(format!("sign {bad} is not +1 or -1")));
        }
        Ok(Self {
            signs: signs.to_vec(),
        })
    }

    /// `x^2 + y^2 + z^2`.
    pub fn euclidean() -> Self {
        Self { signs: vec![1, 1, 1] }
    }

    /// `z^2 - x^2 - y^2`: the unit quadric is the two-sheeted hyperboloid.
    pub fn two_sheeted() -> Self {
        Self { signs: vec![-1, -1, 1] }
    }

    /// `x^2 + y^2 - z^2`: the unit quadric is the one-sheeted hyperboloid.
    pub fn one_sheeted() -> Self {
        Self { signs: vec![1, 1, -1] }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    /// Number of `+1` entries (`p + 1`).
    pub fn p_plus(&self) -> usize {
        self.signs.iter().filter(|s| **s > 0).count()
    }

    /// Number of `-1` entries (`q`).
    pub fn q_minus(&self) -> usize {
        self.signs.iter().filter(|s| **s < 0).count()
    }

    /// The Morse-index parameters `(p, q)` of the quadric `x.x = 1`.
    pub fn pq(&self) -> (usize, usize) {
        (self.p_plus().saturating_sub(1), self.q_minus())
    }

    /// Pseudo inner product of two coordinate slices.
    pub fn dot_slices(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(self
            .signs
            .iter()
            .zip(u.iter().zip(v))
            .map(|(s, (a, b))| f64::from(*s) * a * b)
            .sum())
    }

    /// Pseudo inner product in three dimensions.
    ///
    /// Only valid for three-dimensional metrics, which every [`Quadric`]
    /// guarantees.
    #[inline]
    pub fn dot(&self, u: &AmbientVector, v: &AmbientVector) -> f64 {
        debug_assert_eq!(self.dim(), 3);
        f64::from(self.signs[0]) * u.x * v.x
            + f64::from(self.signs[1]) * u.y * v.y
            + f64::from(self.signs[2]) * u.z * v.z
    }
}

/// `sum_i signs[i] u_i v_i` with a dimension check.
pub fn pseudo_dot(u: &[f64], v: &[f64], metric: &PseudoMetric) -> Result<f64> {
    metric.dot_slices(u, v)
}

/// The unit pseudosphere `{x : x.x = 1}` of a three-dimensional metric.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quadric {
    metric: PseudoMetric,
}

impl Quadric {
    pub fn new(metric: PseudoMetric) -> Result<Self> {
        if metric.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: metric.dim(),
            });
        }
        if metric.p_plus() == 0 {
            return Err(Error::InvalidMetric(
                "negative definite form: x.x = 1 is empty".into(),
            ));
        }
        Ok(Self { metric })
    }

    pub fn sphere() -> Self {
        Self {
            metric: PseudoMetric::euclidean(),
        }
    }

    pub fn two_sheeted() -> Self {
        Self {
            metric: PseudoMetric::two_sheeted(),
        }
    }

    pub fn one_sheeted() -> Self {
        Self {
            metric: PseudoMetric::one_sheeted(),
        }
    }

    pub fn metric(&self) -> &PseudoMetric {
        &self.metric
    }

    #[inline]
    pub fn dot(&self, u: &AmbientVector, v: &AmbientVector) -> f64 {
        self.metric.dot(u, v)
    }

    /// `|x.x - 1| <= tol`.
    pub fn contains(&self, x: &AmbientVector, tol: f64) -> bool {
        (self.dot(x, x) - 1.0).abs() <= tol
    }

    /// Radial projection `g / sqrt(g.g)`.
    pub fn normalize(&self, g: &AmbientVector) -> Result<AmbientVector> {
        let n2 = self.dot(g, g);
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NotNormalizable {
                norm2: n2,
                param: None,
            });
        }
        Ok(g / n2.sqrt())
    }
}

pub fn on_quadric(x: &AmbientVector, q: &Quadric, tol: f64) -> bool {
    q.contains(x, tol)
}

pub fn normalize_to_quadric(g: &AmbientVector, q: &Quadric) -> Result<AmbientVector> {
    q.normalize(g)
}

/// Unoriented angle between the lines spanned by `v1` and `v2`, measured with
/// the Euclidean reference product.
pub fn line_angle(v1: &AmbientVector, v2: &AmbientVector) -> Result<f64> {
    let n1 = v1.norm();
    let n2 = v2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    // same as asin(|v1 x v2| / (|v1||v2|)), without the loss of precision near pi/2
    let a = v1 / n1;
    let b = v2 / n2;
    Ok(a.cross(&b).norm().atan2(a.dot(&b).abs()))
}

/// True iff the unoriented angle between the two lines is at most `angle_tol`.
pub fn lines_parallel(v1: &AmbientVector, v2: &AmbientVector, angle_tol: f64) -> Result<bool> {
    Ok(line_angle(v1, v2)? <= angle_tol)
}

/// Shape of a plane section `U cap Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    /// One closed branch.
    Ellipse,
    /// Two branches, sampled over a hyperbolic-angle window.
    Hyperbola,
    /// Restricted form is degenerate: two parallel lines.
    LinePair,
}

#[derive(Debug, Clone)]
pub struct PlaneSection {
    pub kind: SectionKind,
    pub branches: Vec<Vec<AmbientVector>>,
}

impl PlaneSection {
    pub fn points(&self) -> impl Iterator<Item = &AmbientVector> {
        self.branches.iter().flatten()
    }
}

/// Samples the section of `Q` by the plane `U = span(u1, u2)` using the
/// default window `R = 10` for unbounded branches.
pub fn plane_section(
    u1: &AmbientVector,
    u2: &AmbientVector,
    q: &Quadric,
    samples: usize,
) -> Result<PlaneSection> {
    plane_section_windowed(u1, u2, q, samples, DEFAULT_SECTION_WINDOW)
}

pub fn plane_section_windowed(
    u1: &AmbientVector,
    u2: &AmbientVector,
    q: &Quadric,
    samples: usize,
    window: f64,
) -> Result<PlaneSection> {
    if u1.cross(u2).norm() <= 1e-12 * u1.norm() * u2.norm() {
        return Err(Error::InvalidInput(
            "plane_section needs linearly independent vectors".into(),
        ));
    }
    let samples = samples.max(2);
    // Euclidean-orthonormal basis of U keeps the Gram matrix well scaled.
    let b1 = u1.normalize();
    let b2 = (u2 - b1 * b1.dot(u2)).normalize();
    let gram = Matrix2::new(q.dot(&b1, &b1), q.dot(&b1, &b2), q.dot(&b1, &b2), q.dot(&b2, &b2));
    let eig = gram.symmetric_eigen();
    let mut pairs: Vec<(f64, AmbientVector)> = (0..2)
        .map(|k| {
            let w = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], b1 * w[0] + b2 * w[1])
        })
        .collect();
    // largest eigenvalue first
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (l1, e1) = pairs[0];
    let (l2, e2) = pairs[1];
    let zero = 1e-12;
    if l1 <= zero {
        return Err(Error::EmptySection);
    }
    let e1 = e1 / l1.sqrt();
    if l2 > zero {
        let e2 = e2 / l2.sqrt();
        let pts = (0..samples)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / samples as f64;
                e1 * th.cos() + e2 * th.sin()
            })
            .collect();
        return Ok(PlaneSection {
            kind: SectionKind::Ellipse,
            branches: vec![pts],
        });
    }
    let hmax = window.asinh();
    if l2 < -zero {
        let e2 = e2 / (-l2).sqrt();
        let branch = |sign: f64| -> Vec<AmbientVector> {
            (0..samples)
                .map(|k| {
                    let h = -hmax + 2.0 * hmax * k as f64 / (samples - 1) as f64;
                    e1 * (sign * h.cosh()) + e2 * h.sinh()
                })
                .collect()
        };
        return Ok(PlaneSection {
            kind: SectionKind::Hyperbola,
            branches: vec![branch(1.0), branch(-1.0)],
        });
    }
    // null direction: x = +-e1 + lambda n
    let branch = |sign: f64| -> Vec<AmbientVector> {
        (0..samples)
            .map(|k| {
                let lam = -window + 2.0 * window * k as f64 / (samples - 1) as f64;
                e1 * sign + e2 * lam
            })
            .collect()
    };
    Ok(PlaneSection {
        kind: SectionKind::LinePair,
        branches: vec![branch(1.0), branch(-1.0)],
    })
}

/// The pseudo-normal of the plane `span(a, b)`: the line `U^perp`.
///
/// Any vector `w` with `w.a = w.b = 0` under the metric; computed as the
/// Euclidean cross product pulled back through the diagonal form.
pub fn pseudo_normal(a: &AmbientVector, b: &AmbientVector, metric: &PseudoMetric) -> AmbientVector {
    let c = a.cross(b);
    let s = metric.signs();
    AmbientVector::new(
        c.x * f64::from(s[0]),
        c.y * f64::from(s[1]),
        c.z * f64::from(s[2]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pseudo_dot_examples() {
        let e = PseudoMetric::euclidean();
        assert_eq!(pseudo_dot(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &e).unwrap(), 1.0);
        let m = PseudoMetric::two_sheeted();
        assert_eq!(pseudo_dot(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &m).unwrap(), 1.0);
        let m = PseudoMetric::one_sheeted();
        assert_eq!(pseudo_dot(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &m).unwrap(), 1.0);
    }

    #[test]
    fn pseudo_dot_dimension_mismatch() {
        let e = PseudoMetric::euclidean();
        assert!(matches!(
            pseudo_dot(&[1.0, 0.0], &[1.0, 0.0, 0.0], &e),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn metric_validation() {
        assert!(PseudoMetric::new(&[1, 0, 1]).is_err());
        assert!(Quadric::new(PseudoMetric::new(&[-1, -1, -1]).unwrap()).is_err());
        assert!(Quadric::new(PseudoMetric::new(&[1, 1]).unwrap()).is_err());
        let m = PseudoMetric::two_sheeted();
        assert_eq!((m.p_plus(), m.q_minus()), (1, 2));
        assert_eq!(m.pq(), (0, 2));
    }

    #[test]
    fn on_quadric_examples() {
        let h = Quadric::two_sheeted();
        assert!(on_quadric(&AmbientVector::new(0.0, 0.0, 1.0), &h, 1e-12));
        assert!(!on_quadric(&AmbientVector::new(1.0, 0.0, 0.0), &h, 1e-12));
        assert!(on_quadric(&AmbientVector::new(0.6, 0.8, 0.0), &Quadric::sphere(), 1e-12));
    }

    #[test]
    fn normalize_examples() {
        let h = Quadric::two_sheeted();
        let x = normalize_to_quadric(&AmbientVector::new(0.0, 0.0, 2.0), &h).unwrap();
        assert_eq!(x, AmbientVector::new(0.0, 0.0, 1.0));
        let x = normalize_to_quadric(&AmbientVector::new(3.0, 4.0, 0.0), &Quadric::sphere()).unwrap();
        assert_abs_diff_eq!(x, AmbientVector::new(0.6, 0.8, 0.0), epsilon = 1e-15);
        assert!(matches!(
            normalize_to_quadric(&AmbientVector::new(1.0, 0.0, 0.0), &h),
            Err(Error::NotNormalizable { .. })
        ));
    }

    #[test]
    fn lines_parallel_examples() {
        let v = |x, y, z| AmbientVector::new(x, y, z);
        assert!(lines_parallel(&v(1.0, 2.0, 3.0), &v(-2.0, -4.0, -6.0), DEFAULT_ANGLE_TOL).unwrap());
        assert!(!lines_parallel(&v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0), DEFAULT_ANGLE_TOL).unwrap());
        assert!(lines_parallel(&v(1.0, 0.0, 0.0), &v(1.0, 1e-9, 0.0), 1e-6).unwrap());
        assert_eq!(
            lines_parallel(&v(0.0, 0.0, 0.0), &v(1.0, 0.0, 0.0), 1e-6),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn line_angle_near_right_angle() {
        let a = line_angle(&AmbientVector::x(), &AmbientVector::new(1e-9, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a, std::f64::consts::FRAC_PI_2 - 1e-9, epsilon = 1e-15);
    }

    #[test]
    fn equator_section() {
        let s = plane_section(&AmbientVector::x(), &AmbientVector::y(), &Quadric::sphere(), 64).unwrap();
        assert_eq!(s.kind, SectionKind::Ellipse);
        for p in s.points() {
            assert_abs_diff_eq!(p.z, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hyperbola_section() {
        let q = Quadric::two_sheeted();
        let s = plane_section(&AmbientVector::x(), &AmbientVector::z(), &q, 101).unwrap();
        assert_eq!(s.kind, SectionKind::Hyperbola);
        assert_eq!(s.branches.len(), 2);
        for p in s.points() {
            assert!(on_quadric(p, &q, 1e-10));
            assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        }
        let zs: Vec<f64> = s.branches.iter().map(|b| b[50].z.signum()).collect();
        assert_eq!(zs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn empty_section() {
        let q = Quadric::two_sheeted();
        assert!(matches!(
            plane_section(&AmbientVector::x(), &AmbientVector::y(), &q, 16),
            Err(Error::EmptySection)
        ));
    }

    #[test]
    fn light_like_plane_gives_lines() {
        let q = Quadric::one_sheeted();
        // span{x, y + z}: restricted form diag(1, 0)
        let s = plane_section(&AmbientVector::x(), &AmbientVector::new(0.0, 1.0, 1.0), &q, 21).unwrap();
        assert_eq!(s.kind, SectionKind::LinePair);
        for p in s.points() {
            assert!(on_quadric(p, &q, 1e-10));
        }
    }

    #[test]
    fn pseudo_normal_is_orthogonal() {
        let m = PseudoMetric::one_sheeted();
        let a = AmbientVector::new(0.3, -1.0, 2.0);
        let b = AmbientVector::new(1.5, 0.2, -0.7);
        let n = pseudo_normal(&a, &b, &m);
        assert_abs_diff_eq!(m.dot(&n, &a), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.dot(&n, &b), 0.0, epsilon = 1e-14);
    }

    fn vec3() -> impl Strategy<Value = AmbientVector> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| AmbientVector::new(x, y, z))
    }

    fn metric() -> impl Strategy<Value = PseudoMetric> {
        prop::sample::select(vec![
            PseudoMetric::euclidean(),
            PseudoMetric::two_sheeted(),
            PseudoMetric::one_sheeted(),
        ])
    }

    proptest! {
        #[test]
        fn dot_symmetric_bilinear(m in metric(), u in vec3(), v in vec3(), w in vec3(), a in -3.0..3.0f64) {
            prop_assert_eq!(m.dot(&u, &v), m.dot(&v, &u));
            let lhs = m.dot(&(u * a + w), &v);
            let rhs = a * m.dot(&u, &v) + m.dot(&w, &v);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn normalize_idempotent(m in metric(), g in vec3()) {
            let q = Quadric::new(m).unwrap();
            prop_assume!(q.dot(&g, &g) > 1e-3);
            let x = q.normalize(&g).unwrap();
            let y = q.normalize(&x).unwrap();
            prop_assert!(on_quadric(&x, &q, 1e-12));
            prop_assert!((x - y).norm() <= 1e-13 * (1.0 + x.norm_squared()));
        }

        #[test]
        fn parallel_scale_invariant(u in vec3(), v in vec3(), a in 0.1..10.0f64, b in -10.0..-0.1f64) {
            prop_assume!(u.norm() > 1e-3 && v.norm() > 1e-3);
            let base = line_angle(&u, &v).unwrap();
            let scaled = line_angle(&(u * a), &(v * b)).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-12);
        }
    }
}
