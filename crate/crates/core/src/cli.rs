//! The `skewloop` command-line tool.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | all checks pass (for `certify-skew`: the loop is skew) |
//! | 1    | `certify-skew` found parallel tangents |
//! | 2    | a guaranteed property failed; the full report is still written |
//! | 3    | the loop is not generic |
//! | 64   | malformed input file |
//! | 65   | the curve is not an immersion |
//! | 66   | the surface is not a ruled developable |
//! | 67   | the loop leaves the surface window or meets its singular locus |
//! | 70   | any other analysis error |
//! | 74   | file could not be read or written |
//!
//! `SKEWLOOP_THREADS` sets the size of the worker pool.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::corpus::{fixtures, RandomFamily};
use crate::developable::{classify_patch, BuragoFixture, BuragoParams};
use crate::error::Error as CoreError;
use crate::format::{CurveFile, RecordsFile, SurfaceFile};
use crate::morse::QuadricCase;
use crate::pipeline::{analyze_quadric, analyze_records, analyze_skew, analyze_unfold, AnalysisSettings};
use crate::report::{critical_csv, critical_plotdata, profile_csv, Report};

pub const THREADS_ENV: &str = "SKEWLOOP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: CoreError },
    #[error(transparent)]
    Analysis(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 74,
            CliError::Input { source, .. } | CliError::Analysis(source) => match source {
                CoreError::Parse { .. } => 64,
                CoreError::Immersion { .. } => 65,
                CoreError::NonRuled(_) => 66,
                CoreError::OutOfWindow { .. } | CoreError::Singular { .. } | CoreError::NotOnSurface { .. } => 67,
                _ => 70,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "skewloop", version, about = "Parallel tangent pairs of closed loops on quadrics and developable surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Census, critical points, oracle, Morse ledger and bounds for a loop on a quadric.
    AnalyzeQuadric {
        curve: PathBuf,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Outputs,
    },
    /// Certify that a loop has no pair of parallel tangents.
    CertifySkew {
        curve: PathBuf,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Outputs,
    },
    /// Develop a loop on a ruled developable and locate a parallel pair on one leaf.
    Unfold {
        surface: PathBuf,
        curve: PathBuf,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Outputs,
    },
    /// Check a hand-written list of critical manifolds against the Morse inequalities.
    MorseReport {
        records: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
    /// Write a built-in fixture as curve (and surface) files.
    ExportFixture {
        #[arg(value_enum)]
        name: FixtureName,
        /// Curve file to write.
        #[arg(long)]
        curve: PathBuf,
        /// Surface file to write, for fixtures that have one.
        #[arg(long)]
        surface: Option<PathBuf>,
        /// Seed for `random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Quadric for `random`.
        #[arg(long, value_enum, default_value_t = CaseArg::Sphere)]
        case: CaseArg,
        /// Dihedral angle of the folds of `folded-triangle`, in radians.
        #[arg(long)]
        dihedral: Option<f64>,
        /// Radius of the folds of `folded-triangle`.
        #[arg(long)]
        fold_radius: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    GreatCircle,
    SpherePerturbedLatitude,
    UpperSheetPerturbedLatitude,
    SphereFigureEight,
    UpperSheetFigureEight,
    OneSheetedRaisedEquator,
    SphereAntipodalCrossings,
    OneSheetedDoubleWinding,
    OneSheetedAntipodalCrossings,
    SphereCusp,
    Random,
    FoldedTriangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Sphere,
    TwoSheeted,
    OneSheeted,
}

impl From<CaseArg> for QuadricCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Sphere => QuadricCase::Sphere,
            CaseArg::TwoSheeted => QuadricCase::TwoSheeted,
            CaseArg::OneSheeted => QuadricCase::OneSheeted,
        }
    }
}

/// Numerical settings; each defaults to the library default.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Seed grid of the critical-point solver, oracle grid for
    /// `certify-skew`, leaf count for `unfold`.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Oracle grid used for cross-checks in `analyze-quadric` and `unfold`.
    #[arg(long)]
    pub oracle_grid: Option<usize>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Half-width of the excluded band around the diagonal.
    #[arg(long)]
    pub band: Option<f64>,
    /// Line angle accepted as parallel.
    #[arg(long)]
    pub angle_tol: Option<f64>,
    /// Smallest tangent angle a skew certificate accepts.
    #[arg(long)]
    pub margin: Option<f64>,
}

impl Flags {
    fn settings(&self, command: &str) -> AnalysisSettings {
        let mut s = AnalysisSettings::default();
        if let Some(g) = self.grid {
            match command {
                "certify-skew" => s.oracle_grid = g,
                "unfold" => s.profile.grid = g,
                _ => s.solver.grid = g,
            }
        }
        if let Some(g) = self.oracle_grid {
            s.oracle_grid = g;
        }
        if let Some(t) = self.newton_tol {
            s.solver.newton_tol = t;
        }
        if let Some(b) = self.band {
            s.band = b;
            s.solver.band = b;
        }
        if let Some(a) = self.angle_tol {
            s.angle_tol = a;
            s.profile.parallel_tol = a;
        }
        if let Some(m) = self.margin {
            s.margin = m;
        }
        s
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Outputs {
    /// JSON report; `-` writes to standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// CSV table: the critical points, or the angle profile for `unfold`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Critical-point table as whitespace-separated columns.
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> crate::Result<T>) -> Result<T, CliError> {
    f(&read(path)?).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

fn emit_json(out: &Outputs, report: &Report) -> Result<(), CliError> {
    match &out.json {
        Some(p) => write(p, &report.to_json()),
        None => Ok(()),
    }
}

/// Configures the worker pool from `SKEWLOOP_THREADS`, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses arguments, runs one command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    configure_threads();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns its exit code.
pub fn run(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::AnalyzeQuadric { curve, flags, out } => {
            let file = parse(curve, CurveFile::parse)?;
            let (analysis, timings) = analyze_quadric(&file, &flags.settings("analyze-quadric"))?;
            let report = Report::new("analyze-quadric", &analysis).with_timings(timings);
            emit_json(out, &report)?;
            if let Some(p) = &out.csv {
                write(p, &critical_csv(&analysis.critical.records))?;
            }
            if let Some(p) = &out.plotdata {
                write(p, &critical_plotdata(&analysis.critical.records))?;
            }
            let v = &analysis.verdicts;
            eprintln!(
                "a = {}, b = {}, parallel pairs = {}, oracle agrees = {:?}, ledger = {:?}, bounds = {:?}: {:?}",
                analysis.census.a, analysis.census.b, analysis.pairs_unordered, v.oracle_agreement, v.ledger_satisfied,
                v.bounds_passed, v.status
            );
            Ok(v.exit_code)
        }
        Command::CertifySkew { curve, flags, out } => {
            let file = parse(curve, CurveFile::parse)?;
            let (analysis, timings) = analyze_skew(&file, &flags.settings("certify-skew"))?;
            emit_json(out, &Report::new("certify-skew", &analysis).with_timings(timings))?;
            let c = &analysis.certificate;
            eprintln!(
                "skew = {}, min angle = {:e} at ({}, {}), pairs = {}",
                c.is_skew, c.min_angle, c.witness_pair.s, c.witness_pair.t, c.pairs_found
            );
            Ok(analysis.exit_code)
        }
        Command::Unfold { surface, curve, flags, out } => {
            let surface = match parse(surface, SurfaceFile::parse)? {
                SurfaceFile::Ruled(s) => s,
                SurfaceFile::FoldedTriangle(params) => {
                    let fixture = BuragoFixture::new(params)?;
                    // the folded triangle always fails this check
                    classify_patch(&fixture.surface(), 24)?;
                    return Err(CoreError::NonRuled("surface file describes a folded sheet".into()).into());
                }
            };
            let file = parse(curve, CurveFile::parse)?;
            let (analysis, profile, timings) = analyze_unfold(&surface, &file, &flags.settings("unfold"))?;
            emit_json(out, &Report::new("unfold", &analysis).with_timings(timings))?;
            if let Some(p) = &out.csv {
                write(p, &profile_csv(&profile))?;
            }
            match (&analysis.pair, &analysis.failure) {
                (Some(p), _) => eprintln!(
                    "leaf t0 = {}, loop parameters ({}, {}), angle = {:e}, oracle confirmed = {}",
                    p.t0, p.tau_minus, p.tau_plus, p.angle, analysis.oracle.confirmed
                ),
                (None, Some(f)) => eprintln!("no pair: {f}"),
                (None, None) => {}
            }
            Ok(analysis.exit_code)
        }
        Command::MorseReport { records, out } => {
            let file = parse(records, RecordsFile::parse)?;
            let analysis = analyze_records(&file);
            emit_json(out, &Report::new("morse-report", &analysis))?;
            let l = &analysis.ledger;
            eprintln!("Q(t) = {}, remainder = {}, satisfied = {}", l.quotient, l.remainder, l.satisfied);
            Ok(analysis.exit_code)
        }
        Command::ExportFixture { name, curve, surface, seed, case, dihedral, fold_radius } => {
            let loop_file = |l: crate::curve::QuadricLoop| CurveFile::from_quadric_loop(&l);
            let (c, s) = match name {
                FixtureName::GreatCircle => (loop_file(fixtures::great_circle()), None),
                FixtureName::SpherePerturbedLatitude => (loop_file(fixtures::sphere_perturbed_latitude()), None),
                FixtureName::UpperSheetPerturbedLatitude => (loop_file(fixtures::upper_sheet_perturbed_latitude()), None),
                FixtureName::SphereFigureEight => (loop_file(fixtures::sphere_figure_eight()), None),
                FixtureName::UpperSheetFigureEight => (loop_file(fixtures::upper_sheet_figure_eight()), None),
                FixtureName::OneSheetedRaisedEquator => (loop_file(fixtures::one_sheeted_raised_equator()), None),
                FixtureName::SphereAntipodalCrossings => (loop_file(fixtures::sphere_antipodal_crossings()), None),
                FixtureName::OneSheetedDoubleWinding => (loop_file(fixtures::one_sheeted_double_winding()), None),
                FixtureName::OneSheetedAntipodalCrossings => (loop_file(fixtures::one_sheeted_antipodal_crossings()), None),
                FixtureName::SphereCusp => (loop_file(fixtures::sphere_cusp()), None),
                FixtureName::Random => {
                    let l = RandomFamily::for_case((*case).into()).generic_loops(1, *seed).remove(0);
                    (loop_file(l), None)
                }
                FixtureName::FoldedTriangle => {
                    let mut p = BuragoParams::default();
                    if let Some(d) = dihedral {
                        p.dihedral = *d;
                    }
                    if let Some(r) = fold_radius {
                        p.fold_radius = *r;
                    }
                    let f = BuragoFixture::new(p)?;
                    (CurveFile::space(f.curve().clone()), Some(SurfaceFile::FoldedTriangle(p)))
                }
            };
            write(curve, &c.to_text())?;
            match (surface, s) {
                (Some(path), Some(s)) => write(path, &s.to_text())?,
                (Some(_), None) => {
                    return Err(CoreError::InvalidInput("this fixture has no surface file".into()).into());
                }
                _ => {}
            }
            Ok(0)
        }
    }
}
