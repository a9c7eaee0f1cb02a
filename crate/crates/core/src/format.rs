//! Text formats for curves, surfaces and critical-manifold records.
//!
//! Every file is a list of `key = value ...` lines. `#` starts a comment and
//! the first key must be `format`, naming the file type and version. Floats
//! are written with 17 significant digits, so a write then read gives back
//! the same bits.
//!
//! ```text
//! format = skewloop-curve/1
//! signature = -1 -1 1
//! mode = normalized
//! degree = 3
//! x = 0 1 0 0 0 0 0
//! y = 0 0 1 0 0 0 0
//! z = 1.2 0 0 0 0 0 0.1
//! ```
//!
//! Coefficients are listed as `c0 a1 b1 a2 b2 ...` for
//! `c0 + sum_k a_k cos kt + b_k sin kt`.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::curve::{LoopMode, QuadricLoop};
use crate::developable::{BuragoParams, Cone, Cylinder, DevelopableSurface, DriftCurve, TangentDevelopable, Window};
use crate::error::{Error, Result};
use crate::morse::{CriticalManifoldRecord, ManifoldKind, Poly};
use crate::quadric::{PseudoMetric, Quadric};
use crate::trig::{TrigLoop, TrigSeries};

pub const CURVE_FORMAT: &str = "skewloop-curve/1";
pub const SURFACE_FORMAT: &str = "skewloop-surface/1";
pub const RECORDS_FORMAT: &str = "skewloop-records/1";

/// Shortest decimal form that keeps 17 significant digits.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    text: String,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    line: usize,
    column: usize,
    values: Vec<Token>,
}

impl Entry {
    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, column, message: message.into() }
    }

    fn end_column(&self) -> usize {
        self.values.last().map(|t| t.column + t.text.len()).unwrap_or(self.column + self.key.len())
    }

    fn numbers<T: FromStr>(&self) -> Result<Vec<T>> {
        self.values
            .iter()
            .map(|t| t.text.parse::<T>().map_err(|_| self.error(t.column, format!("cannot read '{}' as a number", t.text))))
            .collect()
    }

    fn fixed<const N: usize>(&self) -> Result<[f64; N]> {
        let v: Vec<f64> = self.numbers()?;
        v.try_into().map_err(|v: Vec<f64>| self.error(self.column, format!("'{}' needs {N} values, got {}", self.key, v.len())))
    }

    fn single(&self) -> Result<&Token> {
        match &self.values[..] {
            [t] => Ok(t),
            _ => Err(self.error(self.column, format!("'{}' needs exactly one value", self.key))),
        }
    }
}

/// Parsed `key = value` document.
#[derive(Debug, Clone, PartialEq)]
struct Document {
    entries: Vec<Entry>,
    last_line: usize,
}

impl Document {
    fn parse(text: &str, format: &str, repeatable: &[&str]) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let column = content.len() - content.trim_start().len() + 1;
                return Err(Error::Parse { line, column, message: "expected 'key = value'".into() });
            };
            let key_part = &content[..eq];
            let key = key_part.trim().to_string();
            let column = key_part.len() - key_part.trim_start().len() + 1;
            if key.is_empty() {
                return Err(Error::Parse { line, column: eq + 1, message: "missing key before '='".into() });
            }
            if !repeatable.contains(&key.as_str()) {
                if let Some(prev) = entries.iter().find(|e| e.key == key) {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("duplicate key '{key}' (first on line {})", prev.line),
                    });
                }
            }
            let mut values = Vec::new();
            let rest = &content[eq + 1..];
            let mut offset = eq + 1;
            for piece in rest.split(char::is_whitespace) {
                if !piece.is_empty() {
                    values.push(Token { text: piece.to_string(), column: offset + 1 });
                }
                offset += piece.len() + 1;
            }
            entries.push(Entry { key, line, column, values });
        }
        let doc = Self { entries, last_line };
        match doc.entries.first() {
            Some(e) if e.key == "format" => {
                let t = e.single()?;
                if t.text != format {
                    return Err(e.error(t.column, format!("expected format {format}, found {}", t.text)));
                }
            }
            Some(e) => return Err(e.error(e.column, "the first key must be 'format'")),
            None => return Err(Error::Parse { line: 1, column: 1, message: "empty document".into() }),
        }
        Ok(doc)
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: self.last_line.max(1),
            column: 1,
            message: format!("missing key '{key}'"),
        })
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !known.contains(&e.key.as_str()) {
                return Err(e.error(e.column, format!("unknown key '{}'", e.key)));
            }
        }
        Ok(())
    }

    fn series(&self, key: &str, degree: Option<usize>) -> Result<TrigSeries> {
        let e = self.require(key)?;
        let values: Vec<f64> = e.numbers()?;
        if let Some(d) = degree {
            if values.len() != 1 + 2 * d {
                return Err(e.error(e.end_column(), format!("'{key}' needs {} coefficients for degree {d}, got {}", 1 + 2 * d, values.len())));
            }
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(e.error(e.values[bad].column, "coefficient is not finite"));
        }
        TrigSeries::from_interleaved(&values).map_err(|err| e.error(e.column, err.to_string()))
    }

    fn trig(&self, keys: &[&str], degree: Option<usize>) -> Result<TrigLoop> {
        let coords = keys.iter().map(|k| self.series(k, degree)).collect::<Result<Vec<_>>>()?;
        TrigLoop::new(coords)
    }
}

fn write_series(out: &mut String, key: &str, s: &TrigSeries) {
    let values: Vec<String> = s.interleaved().into_iter().map(float17).collect();
    let _ = writeln!(out, "{key} = {}", values.join(" "));
}

fn write_floats(out: &mut String, key: &str, values: &[f64]) {
    let values: Vec<String> = values.iter().copied().map(float17).collect();
    let _ = writeln!(out, "{key} = {}", values.join(" "));
}

/// How the coefficients of a curve file are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    /// A loop in space; with a signature it must lie on the quadric.
    Exact,
    /// A loop in space pushed onto the quadric along rays.
    Normalized,
    /// Coordinates `(u, v)` on a developable surface.
    Surface,
}

impl CurveMode {
    fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Normalized => "normalized",
            Self::Surface => "surface",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub signature: Option<Vec<i8>>,
    pub mode: CurveMode,
    pub curve: TrigLoop,
}

impl CurveFile {
    pub fn space(curve: TrigLoop) -> Self {
        Self { signature: None, mode: CurveMode::Exact, curve }
    }

    pub fn from_quadric_loop(l: &QuadricLoop) -> Self {
        Self {
            signature: Some(l.quadric().metric().signs().to_vec()),
            mode: match l.mode() {
                LoopMode::Exact => CurveMode::Exact,
                LoopMode::Normalized => CurveMode::Normalized,
            },
            curve: l.raw().clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text, CURVE_FORMAT, &[])?;
        let mode_entry = doc.get("mode");
        let mode = match mode_entry.map(|e| e.single().map(|t| (e, t))).transpose()? {
            None => CurveMode::Exact,
            Some((_, t)) if t.text == "exact" => CurveMode::Exact,
            Some((_, t)) if t.text == "normalized" => CurveMode::Normalized,
            Some((_, t)) if t.text == "surface" => CurveMode::Surface,
            Some((e, t)) => return Err(e.error(t.column, format!("unknown mode '{}'", t.text))),
        };
        let signature = match doc.get("signature") {
            Some(e) => {
                let signs: Vec<i8> = e.numbers()?;
                PseudoMetric::new(&signs).map_err(|err| e.error(e.column, err.to_string()))?;
                if signs.len() != 3 {
                    return Err(e.error(e.column, "only three-dimensional signatures are supported"));
                }
                Some(signs)
            }
            None => None,
        };
        let degree = match doc.get("degree") {
            Some(e) => Some(e.single()?.text.parse::<usize>().map_err(|_| e.error(e.values[0].column, "degree must be a non-negative integer"))?),
            None => None,
        };
        let keys: &[&str] = if mode == CurveMode::Surface { &["u", "v"] } else { &["x", "y", "z"] };
        if mode == CurveMode::Surface && signature.is_some() {
            let e = doc.get("signature").expect("present");
            return Err(e.error(e.column, "surface coordinates take no signature"));
        }
        if mode == CurveMode::Normalized && signature.is_none() {
            let e = mode_entry.expect("present");
            return Err(e.error(e.column, "normalized mode needs a signature"));
        }
        let mut known = vec!["format", "signature", "mode", "degree"];
        known.extend_from_slice(keys);
        doc.reject_unknown(&known)?;
        let curve = doc.trig(keys, degree)?;
        Ok(Self { signature, mode, curve })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format = {CURVE_FORMAT}");
        if let Some(s) = &self.signature {
            let s: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "signature = {}", s.join(" "));
        }
        let _ = writeln!(out, "mode = {}", self.mode.as_str());
        let _ = writeln!(out, "degree = {}", self.curve.degree());
        let keys: &[&str] = if self.mode == CurveMode::Surface { &["u", "v"] } else { &["x", "y", "z"] };
        for (k, s) in keys.iter().zip(self.curve.coords()) {
            write_series(&mut out, k, s);
        }
        out
    }

    /// The loop on the quadric named by the signature.
    pub fn quadric_loop(&self) -> Result<QuadricLoop> {
        let signs = self.signature.as_ref().ok_or_else(|| Error::InvalidInput("curve file has no signature".into()))?;
        let quadric = Quadric::new(PseudoMetric::new(signs)?)?;
        let mode = match self.mode {
            CurveMode::Exact => LoopMode::Exact,
            CurveMode::Normalized => LoopMode::Normalized,
            CurveMode::Surface => return Err(Error::InvalidInput("surface coordinates do not describe a quadric loop".into())),
        };
        QuadricLoop::new(self.curve.clone(), quadric, mode)
    }
}

/// Contents of a surface file.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceFile {
    Ruled(DevelopableSurface),
    /// The folded triangle, which carries flat pieces.
    FoldedTriangle(BuragoParams),
}

fn drift_curve(doc: &Document, prefix: &str, dim: usize) -> Result<DriftCurve> {
    let names = ["x", "y", "z"];
    let keys: Vec<String> = names[..dim].iter().map(|n| format!("{prefix}.{n}")).collect();
    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    let base = doc.trig(&refs, None)?;
    let drift = match doc.get("drift") {
        Some(e) => {
            let d: Vec<f64> = e.numbers()?;
            if d.len() != dim {
                return Err(e.error(e.column, format!("drift needs {dim} values")));
            }
            d
        }
        None => vec![0.0; dim],
    };
    DriftCurve::new(drift, base)
}

fn vector(doc: &Document, key: &str) -> Result<Vector3<f64>> {
    Ok(Vector3::from(doc.require(key)?.fixed::<3>()?))
}

impl SurfaceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text, SURFACE_FORMAT, &[])?;
        let kind_entry = doc.require("kind")?;
        let kind = kind_entry.single()?;
        let window = |doc: &Document| -> Result<Window> {
            let u = doc.require("window.u")?.fixed::<2>()?;
            let v = doc.require("window.v")?.fixed::<2>()?;
            Window::new(u, v)
        };
        fn with<'a>(extra: &[&'a str]) -> Vec<&'a str> {
            ["format", "kind", "window.u", "window.v", "drift"].iter().chain(extra).copied().collect()
        }
        let surface = match kind.text.as_str() {
            "cylinder" => {
                doc.reject_unknown(&with(&["origin", "axis", "directrix.x", "directrix.y"]))?;
                let c = Cylinder::new(vector(&doc, "origin")?, vector(&doc, "axis")?, drift_curve(&doc, "directrix", 2)?, window(&doc)?)?;
                DevelopableSurface::Cylinder(c)
            }
            "cone" => {
                doc.reject_unknown(&with(&["apex", "directrix.x", "directrix.y", "directrix.z"]))?;
                DevelopableSurface::Cone(Cone::new(vector(&doc, "apex")?, drift_curve(&doc, "directrix", 3)?, window(&doc)?)?)
            }
            "tangent-developable" => {
                doc.reject_unknown(&with(&["edge.x", "edge.y", "edge.z"]))?;
                DevelopableSurface::TangentDevelopable(TangentDevelopable::new(drift_curve(&doc, "edge", 3)?, window(&doc)?)?)
            }
            "folded-triangle" => {
                doc.reject_unknown(&[
                    "format", "kind", "fold_radius", "dihedral", "corner_radius", "side_weight", "sharpness", "cut", "degree",
                    "samples",
                ])?;
                let mut p = BuragoParams::default();
                let float = |key: &str, slot: &mut f64| -> Result<()> {
                    if let Some(e) = doc.get(key) {
                        *slot = e.fixed::<1>()?[0];
                    }
                    Ok(())
                };
                float("fold_radius", &mut p.fold_radius)?;
                float("dihedral", &mut p.dihedral)?;
                float("corner_radius", &mut p.corner_radius)?;
                float("side_weight", &mut p.side_weight)?;
                if let Some(e) = doc.get("cut") {
                    p.cut = e.fixed::<2>()?;
                }
                for (key, slot) in [("degree", &mut p.degree), ("samples", &mut p.samples)] {
                    if let Some(e) = doc.get(key) {
                        *slot = e.single()?.text.parse().map_err(|_| e.error(e.values[0].column, format!("{key} must be an integer")))?;
                    }
                }
                if let Some(e) = doc.get("sharpness") {
                    p.sharpness = e.single()?.text.parse().map_err(|_| e.error(e.values[0].column, "sharpness must be an integer"))?;
                }
                return Ok(Self::FoldedTriangle(p));
            }
            other => return Err(kind_entry.error(kind.column, format!("unknown surface kind '{other}'"))),
        };
        Ok(Self::Ruled(surface))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format = {SURFACE_FORMAT}");
        let s = match self {
            Self::FoldedTriangle(p) => {
                let _ = writeln!(out, "kind = folded-triangle");
                write_floats(&mut out, "fold_radius", &[p.fold_radius]);
                write_floats(&mut out, "dihedral", &[p.dihedral]);
                write_floats(&mut out, "corner_radius", &[p.corner_radius]);
                write_floats(&mut out, "side_weight", &[p.side_weight]);
                let _ = writeln!(out, "sharpness = {}", p.sharpness);
                write_floats(&mut out, "cut", &p.cut);
                let _ = writeln!(out, "degree = {}", p.degree);
                let _ = writeln!(out, "samples = {}", p.samples);
                return out;
            }
            Self::Ruled(s) => s,
        };
        let (kind, prefix, curve) = match s {
            DevelopableSurface::Cylinder(c) => {
                write_floats(&mut out, "origin", c.origin().as_slice());
                write_floats(&mut out, "axis", c.axis().as_slice());
                ("cylinder", "directrix", c.directrix())
            }
            DevelopableSurface::Cone(c) => {
                write_floats(&mut out, "apex", c.apex().as_slice());
                ("cone", "directrix", c.directrix())
            }
            DevelopableSurface::TangentDevelopable(t) => ("tangent-developable", "edge", t.edge()),
        };
        let _ = writeln!(out, "kind = {kind}");
        let w = s.window();
        write_floats(&mut out, "window.u", &w.u);
        write_floats(&mut out, "window.v", &w.v);
        write_floats(&mut out, "drift", &curve.drift);
        for (n, series) in ["x", "y", "z"].iter().zip(curve.base.coords()) {
            write_series(&mut out, &format!("{prefix}.{n}"), series);
        }
        out
    }
}

/// Critical-manifold records for a ledger-only Morse check.
///
/// ```text
/// format = skewloop-records/1
/// ambient = 1 2 1
/// record = diagonal 1 1 1
/// record = isolated 0 2
/// ```
///
/// Each record is `kind index poincare...`, with kind one of `diagonal`,
/// `double`, `antipodal`, `isolated`. `ambient` defaults to the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordsFile {
    pub ambient: Poly,
    pub records: Vec<CriticalManifoldRecord>,
}

impl RecordsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text, RECORDS_FORMAT, &["record"])?;
        doc.reject_unknown(&["format", "ambient", "record"])?;
        let ambient = match doc.get("ambient") {
            Some(e) => Poly::new(&e.numbers::<i64>()?),
            None => Poly::torus(),
        };
        let mut records = Vec::new();
        for e in doc.entries.iter().filter(|e| e.key == "record") {
            let [kind, index, poincare @ ..] = &e.values[..] else {
                return Err(e.error(e.column, "a record needs a kind, an index and Poincare coefficients"));
            };
            let kind_value = match kind.text.as_str() {
                "diagonal" => ManifoldKind::Diagonal,
                "double" => ManifoldKind::Double,
                "antipodal" => ManifoldKind::Antipodal,
                "isolated" => ManifoldKind::Isolated,
                other => return Err(e.error(kind.column, format!("unknown manifold kind '{other}'"))),
            };
            let morse_index: u8 = index.text.parse().map_err(|_| e.error(index.column, "index must be a small non-negative integer"))?;
            if poincare.is_empty() {
                return Err(e.error(e.end_column(), "missing Poincare coefficients"));
            }
            let coeffs = poincare
                .iter()
                .map(|t| t.text.parse::<i64>().map_err(|_| e.error(t.column, format!("'{}' is not an integer", t.text))))
                .collect::<Result<Vec<_>>>()?;
            let poly = Poly::new(&coeffs);
            let multiplicity = if poly.degree().unwrap_or(0) == 0 { poly.coeff(0).max(0) as u64 } else { 0 };
            records.push(CriticalManifoldRecord { kind: kind_value, morse_index, poincare: poly, multiplicity });
        }
        Ok(Self { ambient, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures;
    use proptest::prelude::*;

    #[test]
    fn curve_round_trip_is_exact() {
        for l in [fixtures::upper_sheet_perturbed_latitude(), fixtures::great_circle(), fixtures::sphere_figure_eight()] {
            let f = CurveFile::from_quadric_loop(&l);
            let text = f.to_text();
            let back = CurveFile::parse(&text).unwrap();
            assert_eq!(back, f);
            assert_eq!(back.to_text(), text);
            assert_eq!(back.quadric_loop().unwrap(), l);
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let bad = "format = skewloop-curve/1\nsignature = 1 1 1\nmode = exact\nx = 0 1 0\ny = 0 0 zz\nz = 0\n";
        match CurveFile::parse(bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (5, 9)),
            other => panic!("{other:?}"),
        }
        let missing = "format = skewloop-curve/1\nx = 0\ny = 0\n";
        assert!(matches!(CurveFile::parse(missing), Err(Error::Parse { message, .. }) if message.contains("'z'")));
        let no_eq = "format = skewloop-curve/1\n  what\n";
        assert!(matches!(CurveFile::parse(no_eq), Err(Error::Parse { line: 2, column: 3, .. })));
        let wrong = "format = skewloop-surface/1\n";
        assert!(matches!(CurveFile::parse(wrong), Err(Error::Parse { line: 1, .. })));
        let degree = "format = skewloop-curve/1\ndegree = 1\nx = 0 1 0\ny = 0 0 1\nz = 0\n";
        assert!(matches!(CurveFile::parse(degree), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn surfaces_round_trip() {
        let cyl = DevelopableSurface::Cylinder(
            Cylinder::new(
                Vector3::new(0.5, 0.0, -1.0),
                Vector3::new(0.0, 1.0, 1.0),
                DriftCurve::closed(TrigLoop::circle(&[0.0, 0.0], 1.5)),
                Window::new([0.0, 6.0], [-1.0, 1.0]).unwrap(),
            )
            .unwrap(),
        );
        let files = [SurfaceFile::Ruled(cyl), SurfaceFile::FoldedTriangle(BuragoParams::default())];
        for f in files {
            let text = f.to_text();
            let back = SurfaceFile::parse(&text).unwrap();
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn records_parse() {
        let text = "format = skewloop-records/1\n# two-point circle\nambient = 1 1\nrecord = isolated 0 1\nrecord = isolated 1 1\n";
        let r = RecordsFile::parse(text).unwrap();
        assert_eq!(r.ambient, Poly::circle());
        assert_eq!(r.records.len(), 2);
        assert_eq!(r.records[1].morse_index, 1);
        assert_eq!(r.records[1].multiplicity, 1);
    }

    proptest! {
        #[test]
        fn floats_survive_the_text_form(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(float17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
