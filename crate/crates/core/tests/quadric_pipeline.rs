mod common;

use skewloops::census::CrossingKind;
use skewloops::corpus::{fixtures, RandomFamily};
use skewloops::curve::{QuadricLoop, SpaceCurve};
use skewloops::format::CurveFile;
use skewloops::morse::QuadricCase;
use skewloops::pair::{PairObjective, PhiObjective};
use skewloops::pipeline::{analyze_quadric, AnalysisSettings, QuadricAnalysis, Status};

use common::{curve_line_angle, fd_hess};

fn analyze(l: &QuadricLoop) -> QuadricAnalysis {
    analyze_quadric(&CurveFile::from_quadric_loop(l), &AnalysisSettings::default()).unwrap().0
}

/// Number of negative eigenvalues of the finite-difference Hessian of phi.
fn fd_index(l: &QuadricLoop, s: f64, t: f64) -> u8 {
    let obj = PhiObjective::new(l, l.quadric().metric());
    let h = fd_hess(|a, b| obj.value(a, b), s, t, 1e-4);
    h.symmetric_eigenvalues().iter().filter(|e| **e < 0.0).count() as u8
}

#[test]
fn perturbed_latitude_on_the_upper_sheet_passes_with_two_pairs_or_more() {
    let a = analyze(&fixtures::upper_sheet_perturbed_latitude());
    assert_eq!(a.verdicts.status, Status::Pass);
    let b = a.bounds.unwrap();
    assert!(b.counts.d1 + b.counts.d2 >= 2);
    assert_eq!(a.pairs_ordered, 2 * a.pairs_unordered);
}

#[test]
fn great_circle_is_not_generic() {
    let a = analyze(&fixtures::great_circle());
    assert_eq!(a.verdicts.status, Status::NonGeneric);
    assert_eq!(a.verdicts.exit_code, 3);
}

#[test]
fn figure_eights_have_a_double_point_and_at_least_three_pairs() {
    for l in [fixtures::sphere_figure_eight(), fixtures::upper_sheet_figure_eight()] {
        let a = analyze(&l);
        assert_eq!((a.census.a, a.census.b), (1, 0));
        assert!(a.pairs_unordered >= 3);
        assert_eq!(a.verdicts.status, Status::Pass);
    }
}

#[test]
fn crossing_indices_match_finite_difference_hessians() {
    let loops = [
        fixtures::sphere_figure_eight(),
        fixtures::sphere_antipodal_crossings(),
        fixtures::upper_sheet_figure_eight(),
        fixtures::one_sheeted_double_winding(),
        fixtures::one_sheeted_antipodal_crossings(),
    ];
    for l in &loops {
        let a = analyze(l);
        let (p, q) = l.quadric().metric().pq();
        let ledger = a.ledger.as_ref().unwrap();
        for (kind, expected, measured) in [
            (CrossingKind::Double, p as u8, &ledger.double_indices),
            (CrossingKind::Antipodal, q as u8, &ledger.antipodal_indices),
        ] {
            let points = a.census.pairs(kind);
            assert_eq!(points.len(), measured.len());
            for (c, m) in points.iter().zip(measured) {
                assert_eq!(*m, expected, "{kind:?} at {:?}", c.location);
                assert_eq!(fd_index(l, c.location.s, c.location.t), expected);
            }
        }
    }
}

#[test]
fn loops_with_crossings_cover_both_kinds_on_each_surface_that_allows_them() {
    let a = analyze(&fixtures::sphere_antipodal_crossings());
    assert!(a.census.b > 0);
    let a = analyze(&fixtures::one_sheeted_double_winding());
    assert!(a.census.a > 0 && a.census.b > 0);
}

#[test]
fn random_loops_agree_with_the_oracle_and_their_pairs_are_parallel() {
    for case in [QuadricCase::Sphere, QuadricCase::TwoSheeted, QuadricCase::OneSheeted] {
        for l in RandomFamily::for_case(case).generic_loops(3, 77) {
            let a = analyze(&l);
            assert_eq!(a.verdicts.status, Status::Pass, "{case:?}");
            assert!(a.agreement.agree);
            for p in a.critical.parallel_pairs() {
                let angle = curve_line_angle(&l, p.s, p.t);
                assert!(angle <= 1e-6, "{case:?}: {angle:e} at {p:?}");
                // the tangents really are parallel as vectors, not by luck of the metric
                let (u, v) = (l.tangent(p.s).normalize(), l.tangent(p.t).normalize());
                assert!(u.cross(&v).norm() <= 1e-6);
            }
        }
    }
}

#[test]
fn one_sheeted_diagonal_discrepancy_is_reported_and_bounds_still_hold() {
    let a = analyze(&fixtures::one_sheeted_raised_equator());
    let ledger = a.ledger.unwrap();
    assert_eq!(ledger.diagonal_index, 1);
    assert_eq!(ledger.stated_diagonal_index, 0);
    assert!(ledger.diagonal_discrepancy);
    assert!(a.bounds.unwrap().passed);
}

#[test]
fn cusp_is_rejected_before_analysis() {
    let err = analyze_quadric(&CurveFile::from_quadric_loop(&fixtures::sphere_cusp()), &AnalysisSettings::default()).unwrap_err();
    assert!(matches!(err, skewloops::Error::Immersion { .. }));
}
