//! Aggregated genericity checks for a loop on a quadric: immersion,
//! transversal crossings and non-degenerate critical points of `phi`.

use serde::Serialize;

use crate::census::{census, IntersectionCensus, TRANSVERSALITY_ANGLE};
use crate::curve::QuadricLoop;
use crate::pair::{find_critical_points_with, CriticalClass, CriticalSet, SolverSettings};
use crate::torus::PairPoint;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenericityIssue {
    Immersion { t: f64 },
    TangentialCrossing { location: PairPoint, angle: f64 },
    SelfCoincidence,
    AntipodalCoincidence,
    DegenerateCritical { location: PairPoint, eigenvalues: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub passed: bool,
    pub issues: Vec<GenericityIssue>,
    /// Number of degenerate critical points found, including unsampled ones.
    pub degenerate_total: usize,
    pub transversality_threshold: f64,
    pub determinant_threshold: f64,
}

/// Runs the census and the critical-point solver with default settings.
pub fn genericity_report(l: &QuadricLoop) -> GenericityReport {
    let settings = SolverSettings::default();
    if let Err(crate::Error::Immersion { t }) = l.check_immersion() {
        return GenericityReport {
            passed: false,
            issues: vec![GenericityIssue::Immersion { t }],
            degenerate_total: 0,
            transversality_threshold: TRANSVERSALITY_ANGLE,
            determinant_threshold: settings.det_tol,
        };
    }
    let c = census(l, settings.census_grid);
    // the solver only fails on bad settings, and the defaults are valid
    let set = find_critical_points_with(l, &c, &settings).expect("default solver settings");
    report_from(&c, &set)
}

/// Builds the report from results that were already computed.
pub fn report_from(c: &IntersectionCensus, set: &CriticalSet) -> GenericityReport {
    let mut issues = Vec::new();
    for p in c.double_points.iter().chain(&c.antipodal_points) {
        if !p.transversal {
            issues.push(GenericityIssue::TangentialCrossing { location: p.location, angle: p.angle });
        }
    }
    if c.double_continuum {
        issues.push(GenericityIssue::SelfCoincidence);
    }
    if c.antipodal_continuum {
        issues.push(GenericityIssue::AntipodalCoincidence);
    }
    for r in set.of_class(CriticalClass::Degenerate) {
        issues.push(GenericityIssue::DegenerateCritical { location: r.location, eigenvalues: r.hessian_eigenvalues });
    }
    GenericityReport {
        passed: issues.is_empty(),
        issues,
        degenerate_total: set.degenerate_total,
        transversality_threshold: TRANSVERSALITY_ANGLE,
        determinant_threshold: set.settings.det_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures;

    #[test]
    fn equator_fails() {
        let r = genericity_report(&fixtures::great_circle());
        assert!(!r.passed);
        assert!(r.issues.contains(&GenericityIssue::AntipodalCoincidence));
        assert!(r.degenerate_total > 0);
    }

    #[test]
    fn perturbed_latitude_passes() {
        let r = genericity_report(&fixtures::sphere_perturbed_latitude());
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn cusp_fails_immersion() {
        let r = genericity_report(&fixtures::sphere_cusp());
        assert!(matches!(r.issues[..], [GenericityIssue::Immersion { .. }]));
    }
}
