//! Morse inequalities with exact integer Poincare polynomials.
//!
//! A list of critical manifolds, each with an index and a Poincare
//! polynomial, is compared against the ambient manifold. The inequalities
//! hold when `sum t^index P(N) - P(M)` equals `(1 + t) Q(t)` with every
//! coefficient of `Q` nonnegative.
//!
//! Run with `cargo run --example morse_ledger`.

use skewloops::format::RecordsFile;
use skewloops::morse::{check_morse_inequalities, CriticalManifoldRecord, ManifoldKind, Poly};
use skewloops::pipeline::analyze_records;

pub fn run_example() -> anyhow::Result<()> {
    // Height on a round circle: one minimum and one maximum.
    let circle = check_morse_inequalities(
        vec![
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 0, 1),
            CriticalManifoldRecord::points(ManifoldKind::Isolated, 1, 1),
        ],
        Poly::circle(),
    );
    println!("circle: lhs {}, Q = {}, satisfied {}", circle.lhs, circle.quotient, circle.satisfied);

    // A loop on the sphere with only the diagonal as critical set would
    // need Q = -1, so it must have more critical points.
    let sphere = check_morse_inequalities(vec![CriticalManifoldRecord::diagonal(1)], Poly::torus());
    println!("sphere, diagonal only: Q = {}, satisfied {}", sphere.quotient, sphere.satisfied);

    // The same check from the records text format.
    let text = "\
format = skewloop-records/1
ambient = 1 2 1
record = diagonal 0 1 1
record = isolated 1 2
record = isolated 2 2
";
    let parsed = analyze_records(&RecordsFile::parse(text)?);
    println!(
        "hyperboloid from text: Q = {}, satisfied {}, exit code {}",
        parsed.ledger.quotient, parsed.ledger.satisfied, parsed.exit_code
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
