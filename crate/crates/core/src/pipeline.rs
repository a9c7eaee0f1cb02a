//! End-to-end analyses behind the command-line tool.
//!
//! Each analysis returns a serializable result with a verdict and the
//! wall-clock time of its stages. The result is what goes into the report
//! body; the timings go into the report's separate timing section.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::census::census;
use crate::curve::{QuadricLoop, SpaceCurve};
use crate::developable::{
    angle_profiles, cone_shortcut, cylinder_shortcut, find_parallel_on_leaf, BuragoFixture, DevelopableSurface,
    FoliationAngleProfile, FoliationKind, IsometryCheck, Jump, LeafPair, ProfileSettings, SurfaceLoop, Unfolded,
};
use crate::error::{Error, Result};
use crate::format::{CurveFile, CurveMode, RecordsFile};
use crate::genericity::{report_from, GenericityReport};
use crate::morse::{check_morse_inequalities, measured_ledger, theorem_bounds, BoundsReport, MeasuredLedger, MorseLedger};
use crate::oracle::{certify_skew, scan, tangent_angle, SkewCertificate, DEFAULT_BAND, DEFAULT_MARGIN, DEFAULT_ORACLE_GRID};
use crate::pair::{find_critical_points_with, CriticalSet, SolverSettings};
use crate::quadric::DEFAULT_ANGLE_TOL;
use crate::torus::{match_sets, PairPoint};
use crate::trig::TrigLoop;

/// Solver and oracle pairs closer than this are the same pair.
pub const AGREEMENT_RADIUS: f64 = 1e-5;
/// A developable pair is confirmed when an oracle pair lies this close.
pub const CONFIRM_RADIUS: f64 = 1e-4;
/// Shortcut and general finder must agree to this distance in the plane.
pub const SHORTCUT_AGREEMENT: f64 = 1e-6;

/// Exit status of an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// A check that the theory guarantees came out false.
    Violation,
    NonGeneric,
    NotSkew,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::NotSkew => 1,
            Status::Violation => 2,
            Status::NonGeneric => 3,
        }
    }
}

/// Settings shared by all analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisSettings {
    pub solver: SolverSettings,
    pub oracle_grid: usize,
    pub band: f64,
    pub margin: f64,
    pub angle_tol: f64,
    pub profile: ProfileSettings,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            oracle_grid: DEFAULT_ORACLE_GRID,
            band: DEFAULT_BAND,
            margin: DEFAULT_MARGIN,
            angle_tol: DEFAULT_ANGLE_TOL,
            profile: ProfileSettings::default(),
        }
    }
}

#[derive(Default)]
struct Clock {
    stages: BTreeMap<String, f64>,
}

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.insert(stage.to_string(), start.elapsed().as_secs_f64());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveEcho {
    pub signature: Option<Vec<i8>>,
    pub mode: &'static str,
    pub degree: usize,
    pub curve: TrigLoop,
}

impl CurveEcho {
    fn of(file: &CurveFile) -> Self {
        Self {
            signature: file.signature.clone(),
            mode: match file.mode {
                CurveMode::Exact => "exact",
                CurveMode::Normalized => "normalized",
                CurveMode::Surface => "surface",
            },
            degree: file.curve.degree(),
            curve: file.curve.clone(),
        }
    }
}

/// Comparison of the solver's parallel pairs with the oracle's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub radius: f64,
    pub matched: usize,
    pub solver_only: Vec<PairPoint>,
    pub oracle_only: Vec<PairPoint>,
    /// Both sets are finite and match one to one.
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    /// At least one parallel tangent pair.
    pub nonempty: bool,
    pub oracle_agreement: Option<bool>,
    pub ledger_satisfied: Option<bool>,
    pub bounds_passed: Option<bool>,
    /// Reasons a check could not run.
    pub not_applicable: Vec<String>,
    pub status: Status,
    pub exit_code: i32,
}

/// Everything computed for one loop on a quadric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadricAnalysis {
    pub input: CurveEcho,
    pub settings: AnalysisSettings,
    pub census: crate::census::IntersectionCensus,
    pub critical: CriticalSet,
    pub oracle: crate::oracle::OracleScan,
    pub agreement: Agreement,
    /// Parallel pairs counted once and as ordered pairs.
    pub pairs_unordered: usize,
    pub pairs_ordered: usize,
    pub ledger: Option<MeasuredLedger>,
    pub bounds: Option<BoundsReport>,
    pub genericity: GenericityReport,
    pub verdicts: Verdicts,
}

/// Runs census, solver, oracle, ledger and bounds on a loop on a quadric.
pub fn analyze_quadric(file: &CurveFile, settings: &AnalysisSettings) -> Result<(QuadricAnalysis, BTreeMap<String, f64>)> {
    let mut clock = Clock::default();
    let l = file.quadric_loop()?;
    l.check_immersion()?;
    analyze_loop(&l, file, settings, &mut clock).map(|a| (a, clock.stages))
}

fn analyze_loop(l: &QuadricLoop, file: &CurveFile, settings: &AnalysisSettings, clock: &mut Clock) -> Result<QuadricAnalysis> {
    let solver = SolverSettings { band: settings.band, ..settings.solver };
    let c = clock.time("census", || census(l, solver.census_grid));
    let set = clock.time("critical", || find_critical_points_with(l, &c, &solver))?;
    let oracle = clock.time("oracle", || scan(l, settings.oracle_grid, settings.band))?;
    let genericity = report_from(&c, &set);

    let pairs = set.parallel_pairs();
    let oracle_pairs = oracle.locations();
    let (matched, solver_only, oracle_only) = match_sets(&pairs, &oracle_pairs, AGREEMENT_RADIUS);
    let agreement = Agreement {
        radius: AGREEMENT_RADIUS,
        matched: matched.len(),
        agree: solver_only.is_empty() && oracle_only.is_empty() && !oracle.continuum,
        solver_only: solver_only.into_iter().map(|i| pairs[i]).collect(),
        oracle_only: oracle_only.into_iter().map(|j| oracle_pairs[j]).collect(),
    };

    let generic = genericity.passed && c.is_generic() && !set.non_generic;
    let mut not_applicable = Vec::new();
    let ledger = clock.time("ledger", || match measured_ledger(l, &c, &set) {
        Ok(m) => Some(m),
        Err(e) => {
            not_applicable.push(format!("ledger: {e}"));
            None
        }
    });
    let counts = crate::morse::IndexCounts::from_critical_set(&set);
    let bounds = match theorem_bounds(l, &c, counts) {
        Ok(b) => Some(b),
        Err(e) => {
            not_applicable.push(format!("bounds: {e}"));
            None
        }
    };

    let nonempty = !pairs.is_empty();
    let ledger_satisfied = ledger.as_ref().map(|m| m.ledger.satisfied);
    let bounds_passed = bounds.as_ref().map(|b| b.passed);
    let status = if !generic {
        Status::NonGeneric
    } else if !nonempty || !agreement.agree || ledger_satisfied == Some(false) || bounds_passed == Some(false) {
        Status::Violation
    } else {
        Status::Pass
    };
    let verdicts = Verdicts {
        nonempty,
        oracle_agreement: generic.then_some(agreement.agree),
        ledger_satisfied,
        bounds_passed,
        not_applicable,
        status,
        exit_code: status.exit_code(),
    };
    Ok(QuadricAnalysis {
        input: CurveEcho::of(file),
        settings: *settings,
        census: c,
        pairs_unordered: pairs.len(),
        pairs_ordered: 2 * pairs.len(),
        critical: set,
        oracle,
        agreement,
        ledger,
        bounds,
        genericity,
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewAnalysis {
    pub input: CurveEcho,
    pub certificate: SkewCertificate,
    pub status: Status,
    pub exit_code: i32,
}

/// Certifies that a loop has no parallel tangents.
pub fn analyze_skew(file: &CurveFile, settings: &AnalysisSettings) -> Result<(SkewAnalysis, BTreeMap<String, f64>)> {
    let mut clock = Clock::default();
    let certificate = match file.mode {
        CurveMode::Surface => return Err(Error::InvalidInput("certify-skew needs a space curve".into())),
        _ if file.signature.is_some() => {
            let l = file.quadric_loop()?;
            clock.time("oracle", || certify_skew(&l, settings.oracle_grid, settings.band, settings.margin))?
        }
        _ => clock.time("oracle", || certify_skew(&file.curve, settings.oracle_grid, settings.band, settings.margin))?,
    };
    let status = if certificate.is_skew { Status::Pass } else { Status::NotSkew };
    let analysis = SkewAnalysis { input: CurveEcho::of(file), certificate, status, exit_code: status.exit_code() };
    Ok((analysis, clock.stages))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceEcho {
    pub kind: crate::developable::RuledClass,
    pub window: crate::developable::Window,
    pub foliation: FoliationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortcutCheck {
    pub pair: LeafPair,
    /// Distance in the plane between the shortcut pair and the finder pair.
    pub distance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfirmation {
    pub grid: usize,
    pub pairs: usize,
    /// Torus distance from the located pair to the nearest oracle pair.
    pub nearest: Option<f64>,
    pub confirmed: bool,
}

/// Everything computed for one loop on a developable surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldAnalysis {
    pub input: CurveEcho,
    pub surface: SurfaceEcho,
    pub settings: AnalysisSettings,
    pub ruling_range: (f64, f64),
    pub contact_parameters: (f64, f64),
    pub isometry: IsometryCheck,
    pub jumps: Vec<Jump>,
    pub pair: Option<LeafPair>,
    /// Why no pair was located.
    pub failure: Option<String>,
    pub shortcut: Option<ShortcutCheck>,
    pub oracle: OracleConfirmation,
    pub status: Status,
    pub exit_code: i32,
}

/// Builds the loop on the surface described by a curve file: either
/// surface coordinates or a space curve that must lie on the surface.
pub fn surface_loop(surface: &DevelopableSurface, file: &CurveFile) -> Result<SurfaceLoop> {
    match file.mode {
        CurveMode::Surface => SurfaceLoop::from_coordinates(surface.clone(), file.curve.clone()),
        CurveMode::Exact if file.signature.is_none() => SurfaceLoop::from_space_curve(surface.clone(), file.curve.clone()),
        _ => Err(Error::InvalidInput("the loop must be given in surface coordinates or as a plain space curve".into())),
    }
}

/// Develops a loop, builds its angle profiles and locates a parallel pair
/// on one leaf. Where the foliation allows it the shortcut is run too, and
/// the pair is checked against the oracle on the space curve.
pub fn analyze_unfold(
    surface: &DevelopableSurface,
    file: &CurveFile,
    settings: &AnalysisSettings,
) -> Result<(UnfoldAnalysis, FoliationAngleProfile, BTreeMap<String, f64>)> {
    let mut clock = Clock::default();
    let curve = surface_loop(surface, file)?;
    crate::curve::check_immersion(&curve)?;
    let un = clock.time("unfold", || Unfolded::new(curve))?;
    let profile_settings = ProfileSettings { parallel_tol: settings.angle_tol.max(settings.profile.parallel_tol), ..settings.profile };
    let profile = clock.time("profile", || angle_profiles(&un, &profile_settings))?;
    let (pair, failure) = match clock.time("finder", || find_parallel_on_leaf(&un, &profile)) {
        Ok(p) => (Some(p), None),
        Err(e @ (Error::NotFound | Error::ParallelCheckFailed { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    let shortcut = match (pair, un.foliation()) {
        (Some(p), FoliationKind::Parallel { .. } | FoliationKind::Concurrent { .. }) => {
            let s = clock.time("shortcut", || match un.foliation() {
                FoliationKind::Parallel { .. } => cylinder_shortcut(&un, &profile),
                _ => cone_shortcut(&un, &profile),
            });
            match s {
                Ok(s) => {
                    let d = planar_distance(&p, &s);
                    Some(ShortcutCheck { pair: s, distance: d, agrees: d <= SHORTCUT_AGREEMENT })
                }
                Err(e) => {
                    log::warn!("shortcut failed: {e}");
                    None
                }
            }
        }
        _ => None,
    };

    let scan = clock.time("oracle", || scan(un.curve(), settings.oracle_grid, settings.band))?;
    let nearest = pair.and_then(|p| {
        let loc = PairPoint::new(p.tau_minus, p.tau_plus);
        scan.pairs.iter().map(|o| o.location.distance(&loc)).min_by(f64::total_cmp)
    });
    let oracle = OracleConfirmation {
        grid: scan.grid,
        pairs: scan.pairs.len(),
        nearest,
        confirmed: nearest.is_some_and(|d| d <= CONFIRM_RADIUS),
    };

    let shortcut_ok = shortcut.as_ref().is_none_or(|s| s.agrees);
    let status = if pair.is_some() && oracle.confirmed && shortcut_ok { Status::Pass } else { Status::Violation };
    let analysis = UnfoldAnalysis {
        input: CurveEcho::of(file),
        surface: SurfaceEcho { kind: surface.class(), window: surface.window(), foliation: un.foliation() },
        settings: *settings,
        ruling_range: un.ruling_range(),
        contact_parameters: un.contact_parameters(),
        isometry: un.isometry(),
        jumps: profile.jumps.clone(),
        pair,
        failure,
        shortcut,
        oracle,
        status,
        exit_code: status.exit_code(),
    };
    Ok((analysis, profile, clock.stages))
}

/// Larger of the distances between corresponding developed points, with
/// the two points of either pair allowed to swap.
fn planar_distance(a: &LeafPair, b: &LeafPair) -> f64 {
    let d = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    let direct = d(a.c_minus, b.c_minus).max(d(a.c_plus, b.c_plus));
    let swapped = d(a.c_minus, b.c_plus).max(d(a.c_plus, b.c_minus));
    direct.min(swapped)
}

/// Angle between the space tangents of a located pair.
pub fn pair_angle<C: SpaceCurve + ?Sized>(curve: &C, p: &LeafPair) -> Result<f64> {
    tangent_angle(curve, &PairPoint::new(p.tau_minus, p.tau_plus))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseAnalysis {
    pub ledger: MorseLedger,
    pub status: Status,
    pub exit_code: i32,
}

/// Checks a hand-written list of critical manifolds against the ambient
/// Poincare polynomial.
pub fn analyze_records(file: &RecordsFile) -> MorseAnalysis {
    let ledger = check_morse_inequalities(file.records.clone(), file.ambient.clone());
    let status = if ledger.satisfied { Status::Pass } else { Status::Violation };
    MorseAnalysis { ledger, status, exit_code: status.exit_code() }
}

/// Certificate of the folded-triangle loop together with its fit quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldedCertificate {
    pub params: crate::developable::BuragoParams,
    pub fit_deviation: f64,
    pub certificate: SkewCertificate,
}

pub fn certify_folded(fixture: &BuragoFixture, grid: usize, band: f64, margin: f64) -> Result<FoldedCertificate> {
    Ok(FoldedCertificate {
        params: *fixture.params(),
        fit_deviation: fixture.fit_deviation(),
        certificate: certify_skew(fixture.curve(), grid, band, margin)?,
    })
}
