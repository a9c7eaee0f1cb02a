//! Parallel tangent pairs of loops on the round sphere and on both
//! hyperboloids.
//!
//! Each loop goes through the full pipeline: crossing census, critical
//! points of the pair function, a brute-force tangent scan for comparison,
//! the Morse ledger and the lower bounds by index.
//!
//! Run with `cargo run --release --example quadric_pairs`.

use skewloops::corpus::fixtures;
use skewloops::curve::QuadricLoop;
use skewloops::format::CurveFile;
use skewloops::pair::CriticalClass;
use skewloops::pipeline::{analyze_quadric, AnalysisSettings};

fn describe(name: &str, l: &QuadricLoop) -> anyhow::Result<()> {
    let (a, timings) = analyze_quadric(&CurveFile::from_quadric_loop(l), &AnalysisSettings::default())?;
    println!("{name}");
    println!("  double points a = {}, antipodal points b = {}", a.census.a, a.census.b);
    println!(
        "  {} parallel pairs, solver and scan agree: {}",
        a.pairs_unordered, a.agreement.agree
    );
    for r in a.critical.records.iter().filter(|r| r.class == CriticalClass::ParallelTangent) {
        println!(
            "    (s, t) = ({:.6}, {:.6})  index {}  angle {:.1e}",
            r.location.s,
            r.location.t,
            r.morse_index.map_or("-".to_string(), |i| i.to_string()),
            r.tangent_angle.unwrap_or(f64::NAN)
        );
    }
    if let Some(ledger) = &a.ledger {
        println!(
            "  ledger quotient {} (diagonal index {}, expected {})",
            ledger.ledger.quotient, ledger.diagonal_index, ledger.stated_diagonal_index
        );
    }
    if let Some(bounds) = &a.bounds {
        for c in &bounds.checks {
            println!("  bound {}: {} >= {} {}", c.name, c.measured, c.required, if c.holds { "ok" } else { "FAILS" });
        }
    }
    println!("  status {:?} in {:.3} s", a.verdicts.status, timings.values().sum::<f64>());
    Ok(())
}

pub fn run_example() -> anyhow::Result<()> {
    describe("perturbed latitude on the sphere", &fixtures::sphere_perturbed_latitude())?;
    describe("figure eight on the upper sheet", &fixtures::upper_sheet_figure_eight())?;
    describe("raised equator on the one-sheeted hyperboloid", &fixtures::one_sheeted_raised_equator())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
