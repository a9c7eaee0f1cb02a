mod common;

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use proptest::prelude::*;
use skewloops::corpus::developable::{all, cones, cylinders, tangent_developables, DevelopableFixture};
use skewloops::developable::{
    classify_patch, unfold, BuragoFixture, BuragoParams, Cylinder, DevelopableSurface, DriftCurve, SurfaceLoop,
    TangentDevelopable, Window,
};
use skewloops::format::{CurveFile, CurveMode};
use skewloops::pipeline::{analyze_unfold, AnalysisSettings, Status};
use skewloops::trig::{TrigLoop, TrigSeries};
use skewloops::Error;

use common::{fd_line_angle, pair_distance, polyline_length};

fn surface_loop(f: &DevelopableFixture) -> SurfaceLoop {
    SurfaceLoop::from_coordinates(f.surface.clone(), f.coords.clone()).unwrap()
}

fn space_point(l: &SurfaceLoop, t: f64) -> Vec<f64> {
    let uv = l.coords(t)[0];
    l.surface().point(uv.x, uv.y).as_slice().to_vec()
}

fn plane_point(l: &SurfaceLoop, t: f64) -> Vec<f64> {
    l.planar_point(t).as_slice().to_vec()
}

/// Relative length error over `[a, a + len]`, measured with polylines.
fn length_error(l: &SurfaceLoop, a: f64, len: f64) -> f64 {
    let space = polyline_length(|t| space_point(l, t), a, a + len, 4000);
    let plane = polyline_length(|t| plane_point(l, t), a, a + len, 4000);
    (space - plane).abs() / space
}

#[test]
fn every_fixture_yields_an_oracle_confirmed_parallel_pair() {
    for f in all() {
        let file = CurveFile { signature: None, mode: CurveMode::Surface, curve: f.coords.clone() };
        let (a, _, _) = analyze_unfold(&f.surface, &file, &AnalysisSettings::default()).unwrap();
        assert_eq!(a.status, Status::Pass, "{}", f.name);
        let pair = a.pair.unwrap();
        // check the located pair directly on the space curve
        let l = surface_loop(&f);
        let curve = |t: f64| {
            let p = space_point(&l, t);
            Vector3::new(p[0], p[1], p[2])
        };
        let angle = fd_line_angle(curve, pair.tau_minus, pair.tau_plus);
        assert!(angle <= 1e-6, "{}: space angle {angle:e}", f.name);
        assert!(pair_distance((pair.tau_minus, pair.tau_plus), (0.0, 0.0)) > 0.1, "{}: pair on the diagonal", f.name);
        assert!(a.oracle.confirmed, "{}", f.name);
    }
}

#[test]
fn shortcuts_agree_with_the_leaf_finder_on_cylinders_and_cones() {
    for f in cylinders().into_iter().chain(cones()) {
        let file = CurveFile { signature: None, mode: CurveMode::Surface, curve: f.coords.clone() };
        let (a, _, _) = analyze_unfold(&f.surface, &file, &AnalysisSettings::default()).unwrap();
        let s = a.shortcut.unwrap_or_else(|| panic!("{} has no shortcut", f.name));
        assert!(s.distance <= 1e-6, "{}: {:e}", f.name, s.distance);
    }
}

#[test]
fn developments_are_isometric_on_sub_arcs() {
    for f in all() {
        let l = surface_loop(&f);
        for (a, len) in [(0.0, TAU), (0.3, 1.0), (2.0, 3.5), (5.0, 0.2)] {
            let e = length_error(&l, a, len);
            assert!(e <= 1e-9, "{}: relative error {e:e} on [{a}, {}]", f.name, a + len);
        }
    }
}

#[test]
fn unit_cylinder_unrolls_to_a_sine_graph() {
    let cyl = DevelopableSurface::Cylinder(
        Cylinder::new(
            Vector3::zeros(),
            Vector3::z(),
            DriftCurve::closed(TrigLoop::circle(&[0.0, 0.0], 1.0)),
            Window::new([-0.5, 7.0], [-1.0, 1.0]).unwrap(),
        )
        .unwrap(),
    );
    let space = TrigLoop::new(vec![
        TrigSeries::new(0.0, vec![1.0], vec![0.0]),
        TrigSeries::new(0.0, vec![0.0], vec![1.0]),
        TrigSeries::new(0.0, vec![0.0], vec![0.3]),
    ])
    .unwrap();
    let un = unfold(&cyl, &space).unwrap();
    let p0 = un.curve().planar_point(0.0);
    for s in [0.5, 1.0, 2.0, 3.0, 4.5, 6.0] {
        let p = un.curve().planar_point(s) - p0;
        assert!((p.x - s).abs() < 1e-9 && (p.y - 0.3 * s.sin()).abs() < 1e-9, "{s}: {p:?}");
    }
}

#[test]
fn cone_development_closes_up_with_angle_pi_root_two() {
    let f = &cones()[0];
    let DevelopableSurface::Cone(cone) = &f.surface else { panic!("first cone fixture is a cone") };
    let turn = cone.developed_angle(TAU) - cone.developed_angle(0.0);
    assert!((turn - PI * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn helix_tangent_developable_preserves_lengths_of_an_offset_curve() {
    let helix = DriftCurve::new(vec![0.0, 0.0, 0.5], TrigLoop::circle(&[0.0, 0.0, 0.0], 1.0)).unwrap();
    let surface =
        DevelopableSurface::TangentDevelopable(TangentDevelopable::new(helix, Window::new([0.0, 5.0], [0.1, 2.0]).unwrap()).unwrap());
    // a closed loop at roughly constant distance from the edge
    let coords = TrigLoop::new(vec![
        TrigSeries::new(2.5, vec![1.5], vec![0.0]),
        TrigSeries::new(0.8, vec![0.0, 0.05], vec![0.3, 0.0]),
    ])
    .unwrap();
    let l = SurfaceLoop::from_coordinates(surface, coords).unwrap();
    assert!(length_error(&l, 0.0, TAU) <= 1e-9);
}

#[test]
fn folded_triangle_is_not_a_ruled_developable() {
    let fixture = BuragoFixture::new(BuragoParams { degree: 768, ..BuragoParams::default() }).unwrap();
    assert!(matches!(classify_patch(&fixture.surface(), 24), Err(Error::NonRuled(_))));
}

#[test]
fn loops_leaving_the_window_are_rejected() {
    let f = &cylinders()[0];
    let wide = TrigLoop::new(vec![TrigSeries::new(3.0, vec![1.2], vec![0.0]), TrigSeries::new(0.0, vec![0.0], vec![2.5])]).unwrap();
    assert!(matches!(SurfaceLoop::from_coordinates(f.surface.clone(), wide), Err(Error::OutOfWindow { .. })));
}

#[test]
fn tangent_developables_have_no_shortcut() {
    for f in tangent_developables() {
        let file = CurveFile { signature: None, mode: CurveMode::Surface, curve: f.coords.clone() };
        let (a, _, _) = analyze_unfold(&f.surface, &file, &AnalysisSettings::default()).unwrap();
        assert!(a.shortcut.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sub_arcs_keep_their_length(which in 0usize..10, a in 0.0..TAU, len in 0.05..TAU) {
        let f = &all()[which];
        let l = surface_loop(f);
        prop_assert!(length_error(&l, a, len) <= 1e-9);
    }

    #[test]
    fn developed_rulings_are_straight(which in 0usize..10, s in 0.0f64..1.0) {
        let f = &all()[which];
        let w = f.surface.window();
        let u = w.u[0] + s * (w.u[1] - w.u[0]);
        let (p0, d) = f.surface.leaf(u);
        for k in 0..=10 {
            let v = w.v[0] + (w.v[1] - w.v[0]) * k as f64 / 10.0;
            let q = f.surface.develop(u, v) - p0;
            prop_assert!((q.x * d.y - q.y * d.x).abs() <= 1e-10);
        }
    }
}
