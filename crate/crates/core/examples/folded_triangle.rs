//! A closed curve with no parallel tangent lines.
//!
//! A rounded planar triangle has its three corners bent up along short
//! cylindrical folds. The result is fitted by a trigonometric loop and
//! scanned for pairs of parallel tangents. With the flaps lying flat the
//! loop is planar and every direction repeats, so the certificate fails.
//!
//! Run with `cargo run --release --example folded_triangle`.

use skewloops::developable::{BuragoFixture, BuragoParams};
use skewloops::oracle::{DEFAULT_BAND, DEFAULT_MARGIN};
use skewloops::pipeline::certify_folded;

const GRID: usize = 2048;

pub fn run_example() -> anyhow::Result<()> {
    for dihedral in [std::f64::consts::FRAC_PI_3, 0.0] {
        let fixture = BuragoFixture::new(BuragoParams { dihedral, ..BuragoParams::default() })?;
        let cert = certify_folded(&fixture, GRID, DEFAULT_BAND, DEFAULT_MARGIN)?;
        let c = &cert.certificate;
        println!("dihedral {:.4} rad, fit deviation {:.2e}", dihedral, cert.fit_deviation);
        if c.is_skew {
            println!(
                "  skew: smallest tangent angle {:.4e} at (s, t) = ({:.4}, {:.4})",
                c.min_angle, c.witness_pair.s, c.witness_pair.t
            );
        } else {
            println!("  not skew: {} isolated pairs, continuum {}", c.pairs_found, c.continuum);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
