//! Unfolding loops on cylinders, cones and tangent developables.
//!
//! The loop is developed into the plane, the angles it makes with each
//! ruling are profiled, and a leaf carrying two parallel tangents is
//! located. The pair is then checked against the brute-force scan in space.
//!
//! Run with `cargo run --release --example developable_unfold`.

use skewloops::corpus::developable;
use skewloops::format::{CurveFile, CurveMode};
use skewloops::pipeline::{analyze_unfold, AnalysisSettings};
use skewloops::report::profile_csv;

pub fn run_example() -> anyhow::Result<()> {
    let settings = AnalysisSettings::default();
    for f in developable::all() {
        let file = CurveFile { signature: None, mode: CurveMode::Surface, curve: f.coords.clone() };
        let (a, _, _) = analyze_unfold(&f.surface, &file, &settings)?;
        print!("{:<24} isometry {:.1e}", f.name, a.isometry.max_length_error);
        match &a.pair {
            Some(p) => print!(
                "  leaf {:.4}: tangents at {:.4} and {:.4}, space angle {:.1e}",
                p.t0, p.tau_minus, p.tau_plus, p.angle
            ),
            None => print!("  no pair ({})", a.failure.as_deref().unwrap_or("unknown")),
        }
        if let Some(s) = &a.shortcut {
            print!("  closed-form pair off by {:.1e}", s.distance);
        }
        println!("  scan confirms {}", a.oracle.confirmed);
    }

    // The first few rows of one angle profile.
    let f = &developable::cones()[0];
    let file = CurveFile { signature: None, mode: CurveMode::Surface, curve: f.coords.clone() };
    let (_, profile, _) = analyze_unfold(&f.surface, &file, &settings)?;
    for line in profile_csv(&profile).lines().take(5) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
