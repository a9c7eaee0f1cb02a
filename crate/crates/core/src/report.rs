//! Report envelopes and their JSON, CSV and plotdata forms.
//!
//! A report has a deterministic body and a separate timing section. The
//! digest covers the serialized body only, so two runs with the same input
//! agree on it even though their timings differ.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

use crate::developable::FoliationAngleProfile;
use crate::error::{Error, Result};
use crate::format::float17;
use crate::pair::{CriticalClass, CriticalPointRecord};

pub const REPORT_FORMAT: &str = "skewloop-report/1";
pub const PROFILE_CSV_HEADER: &str = "t,alpha_minus,alpha_plus,beta,jump";

/// JSON formatter that writes every float with 17 significant digits.
struct Exact<F>(F);

impl<F: Formatter> Formatter for Exact<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(float17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_with<F: Formatter>(value: &Value, formatter: F) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Exact(formatter));
    // writing a Value into memory cannot fail
    value.serialize(&mut ser).expect("in-memory JSON");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Indented JSON with sorted keys and 17-digit floats.
pub fn to_json_string(value: &Value) -> String {
    let mut s = write_with(value, PrettyFormatter::with_indent(b"  "));
    s.push('\n');
    s
}

fn to_compact(value: &Value) -> String {
    write_with(value, CompactFormatter)
}

/// Converts any serializable value into a JSON tree. Non-finite floats
/// become `null`.
pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    serde_json::to_value(value).expect("report data serializes")
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Output of one CLI command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub body: Value,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new<T: Serialize + ?Sized>(command: &str, body: &T) -> Self {
        Self { command: command.to_string(), body: to_value(body), timings: BTreeMap::new() }
    }

    pub fn with_timings(mut self, timings: BTreeMap<String, f64>) -> Self {
        self.timings = timings;
        self
    }

    pub fn digest(&self) -> String {
        format!("{:016x}", fnv1a(to_compact(&self.body).as_bytes()))
    }

    pub fn to_value(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("format".into(), Value::from(REPORT_FORMAT));
        map.insert("command".into(), Value::from(self.command.clone()));
        map.insert("body".into(), self.body.clone());
        map.insert("digest".into(), Value::from(self.digest()));
        map.insert("timings".into(), to_value(&self.timings));
        Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        to_json_string(&self.to_value())
    }

    /// Reads a report written by [`Report::to_json`] and checks its digest.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let field = |key: &str| value.get(key).ok_or_else(|| Error::InvalidInput(format!("report has no '{key}'")));
        if field("format")?.as_str() != Some(REPORT_FORMAT) {
            return Err(Error::InvalidInput(format!("not a {REPORT_FORMAT} document")));
        }
        let command = field("command")?.as_str().unwrap_or_default().to_string();
        let timings: BTreeMap<String, f64> =
            serde_json::from_value(field("timings")?.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let report = Self { command, body: field("body")?.clone(), timings };
        let stored = field("digest")?.as_str().unwrap_or_default();
        if stored != report.digest() {
            return Err(Error::InvalidInput(format!("digest mismatch: stored {stored}, computed {}", report.digest())));
        }
        Ok(report)
    }
}

/// Per-leaf angle profile as CSV. `jump` is 1 on cells that contain a
/// recorded jump of either angle.
pub fn profile_csv(profile: &FoliationAngleProfile) -> String {
    let mut out = String::from(PROFILE_CSV_HEADER);
    out.push('\n');
    for s in profile.samples() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            float17(s.t),
            float17(s.alpha_minus),
            float17(s.alpha_plus),
            float17(s.beta),
            u8::from(s.jump)
        );
    }
    out
}

fn class_name(c: CriticalClass) -> &'static str {
    match c {
        CriticalClass::Diagonal => "diagonal",
        CriticalClass::Double => "double",
        CriticalClass::Antipodal => "antipodal",
        CriticalClass::ParallelTangent => "parallel",
        CriticalClass::Degenerate => "degenerate",
    }
}

fn sorted_records(records: &[CriticalPointRecord]) -> Vec<&CriticalPointRecord> {
    let mut rows: Vec<&CriticalPointRecord> = records.iter().collect();
    rows.sort_by(|a, b| a.location.s.total_cmp(&b.location.s).then(a.location.t.total_cmp(&b.location.t)));
    rows
}

/// Critical-point table as whitespace-separated columns, one row per
/// record, sorted by `s` then `t`. Lines starting with `#` are comments.
pub fn critical_plotdata(records: &[CriticalPointRecord]) -> String {
    let mut out = String::from("# s t value class index lambda1 lambda2 residual\n");
    for r in sorted_records(records) {
        let index = r.morse_index.map(|i| i.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            float17(r.location.s),
            float17(r.location.t),
            float17(r.value),
            class_name(r.class),
            index,
            float17(r.hessian_eigenvalues[0]),
            float17(r.hessian_eigenvalues[1]),
            float17(r.gradient_residual)
        );
    }
    out
}

/// The same table as CSV.
pub fn critical_csv(records: &[CriticalPointRecord]) -> String {
    let mut out = String::from("s,t,value,class,index,lambda1,lambda2,residual\n");
    for r in sorted_records(records) {
        let index = r.morse_index.map(|i| i.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            float17(r.location.s),
            float17(r.location.t),
            float17(r.value),
            class_name(r.class),
            index,
            float17(r.hessian_eigenvalues[0]),
            float17(r.hessian_eigenvalues[1]),
            float17(r.gradient_residual)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::PairPoint;
    use serde_json::json;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let body = json!({"zeta": 0.1, "alpha": [1, 2.5, -3e-300], "mid": {"b": true, "a": null}});
        let mut timings = BTreeMap::new();
        timings.insert("total".to_string(), 0.25);
        let r = Report::new("demo", &body).with_timings(timings);
        let text = r.to_json();
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(text.contains("1.0000000000000001e-1"));
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn timings_do_not_touch_the_digest() {
        let r = Report::new("demo", &json!({"x": 1.5}));
        let mut t = BTreeMap::new();
        t.insert("total".to_string(), 3.0);
        assert_eq!(r.digest(), r.clone().with_timings(t).digest());
    }

    #[test]
    fn tampered_reports_are_rejected() {
        let text = Report::new("demo", &json!({"x": 1.5})).to_json().replace("1.5000000000000000e0", "2.5000000000000000e0");
        assert!(Report::from_json(&text).is_err());
    }

    #[test]
    fn plotdata_rows_are_sorted() {
        let rec = |s, t| CriticalPointRecord {
            location: PairPoint::new(s, t),
            value: 0.0,
            class: CriticalClass::ParallelTangent,
            morse_index: Some(1),
            hessian_eigenvalues: [-1.0, 1.0],
            gradient_residual: 0.0,
            tangent_angle: None,
        };
        let text = critical_plotdata(&[rec(2.0, 3.0), rec(1.0, 4.0), rec(1.0, 2.0)]);
        let s: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let mut f = l.split(' ').map(|x| x.parse::<f64>().unwrap_or(f64::NAN));
                (f.next().unwrap(), f.next().unwrap())
            })
            .collect();
        assert_eq!(s, vec![(1.0, 2.0), (1.0, 4.0), (2.0, 3.0)]);
    }
}
