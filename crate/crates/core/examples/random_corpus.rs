//! Random loops on each quadric, compared against the tangent scan.
//!
//! Generic loops are drawn from a seeded family, so the output is the same
//! on every run. For each quadric the example counts pairs by index and
//! reports how often the solver and the scan disagree.
//!
//! Run with `cargo run --release --example random_corpus -- 20 7`, where the
//! arguments are the number of loops and the seed.

use skewloops::corpus::RandomFamily;
use skewloops::format::CurveFile;
use skewloops::morse::QuadricCase;
use skewloops::pipeline::{analyze_quadric, AnalysisSettings, Status};

pub fn run_with(count: usize, seed: u64) -> anyhow::Result<()> {
    let settings = AnalysisSettings::default();
    for case in [QuadricCase::Sphere, QuadricCase::TwoSheeted, QuadricCase::OneSheeted] {
        let (mut pairs, mut disagree, mut passed) = (0, 0, 0);
        let loops = RandomFamily::for_case(case).generic_loops(count, seed);
        for l in &loops {
            let (a, _) = analyze_quadric(&CurveFile::from_quadric_loop(l), &settings)?;
            pairs += a.pairs_unordered;
            disagree += usize::from(!a.agreement.agree);
            passed += usize::from(a.verdicts.status == Status::Pass);
        }
        println!(
            "{case:?}: {} loops, {:.1} pairs per loop, {disagree} disagreements, {passed} pass",
            loops.len(),
            pairs as f64 / loops.len() as f64
        );
    }
    Ok(())
}

pub fn run_example() -> anyhow::Result<()> {
    run_with(3, 1)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().map(|a| a.parse()).transpose()?.unwrap_or(10);
    let seed = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1);
    run_with(count, seed)
}
