//! Curve files in, JSON reports and tables out.
//!
//! Writes a curve in the `skewloop-curve/1` text format, reads it back,
//! analyzes it and prints the report envelope along with the critical
//! point table.
//!
//! Run with `cargo run --release --example files_and_reports`.

use skewloops::corpus::fixtures;
use skewloops::format::CurveFile;
use skewloops::pipeline::{analyze_quadric, AnalysisSettings};
use skewloops::report::{critical_plotdata, Report};

pub fn run_example() -> anyhow::Result<()> {
    let text = CurveFile::from_quadric_loop(&fixtures::sphere_figure_eight()).to_text();
    println!("{}", text.lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("...");

    let file = CurveFile::parse(&text)?;
    let (analysis, timings) = analyze_quadric(&file, &AnalysisSettings::default())?;
    let report = Report::new("analyze-quadric", &analysis).with_timings(timings);
    let json = report.to_json();
    println!("report: {} bytes, digest {}", json.len(), report.digest());

    // Reading verifies the digest, which ignores the timings.
    let back = Report::from_json(&json)?;
    assert_eq!(back.body, report.body);

    print!("{}", critical_plotdata(&analysis.critical.records));
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
