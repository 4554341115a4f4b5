//! Versioned JSON envelopes and CSV tables.
//!
//! Every float is written with 17 significant digits so that parsing a
//! report back reproduces the original bits.

use std::io::{self, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::engine::IterationReport;
use crate::error::{KamError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `d.dddddddddddddddde±x`; non-finite values become `null`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any value with full-precision floats, pretty-printed.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| KamError::InvalidReport(e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub schema: u32,
    pub command: String,
    pub result: T,
}

pub fn envelope_json<T: Serialize>(command: &str, result: &T) -> Result<String> {
    to_json(&Envelope {
        schema: SCHEMA_VERSION,
        command: command.to_string(),
        result,
    })
}

pub fn parse_envelope<T: DeserializeOwned>(text: &str) -> Result<Envelope<T>> {
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| KamError::InvalidReport(e.to_string()))?;
    if env.schema != SCHEMA_VERSION {
        return Err(KamError::InvalidReport(format!(
            "schema {} is not supported (expected {SCHEMA_VERSION})",
            env.schema
        )));
    }
    Ok(env)
}

pub fn report_json(report: &IterationReport) -> Result<String> {
    envelope_json("kam", report)
}

pub fn parse_report_json(text: &str) -> Result<IterationReport> {
    Ok(parse_envelope(text)?.result)
}

/// Columns of [`report_csv`].
pub const REPORT_CSV_HEADER: [&str; 5] = ["level", "scale", "defect_before", "defect_after", "exponent_estimate"];

/// `ln(defect_after) / ln(defect_before)`, the one-step order of decay.
pub fn step_exponent(before: f64, after: f64) -> Option<f64> {
    (before > 0.0 && after > 0.0 && before != 1.0).then(|| after.ln() / before.ln())
}

/// Builds a CSV table from a header and rows of cells.
pub fn csv_table<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| KamError::InvalidReport(e.to_string());
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| KamError::InvalidReport(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

/// One row per step; an empty `exponent_estimate` means it is undefined.
pub fn report_csv(report: &IterationReport) -> Result<String> {
    csv_table(
        &REPORT_CSV_HEADER,
        report.steps.iter().map(|s| {
            vec![
                s.level.to_string(),
                format_f64(s.scale),
                format_f64(s.defect_before),
                format_f64(s.defect_after),
                step_exponent(s.defect_before, s.defect_after).map(format_f64).unwrap_or_default(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{StepRecord, Verdict};

    fn sample_report() -> IterationReport {
        IterationReport {
            verdict: Verdict::Converged,
            steps: vec![StepRecord {
                level: 0,
                scale: 0.4,
                next_scale: 0.30000000000000004,
                truncation: 1,
                defect_before: 1.0 / 3.0,
                defect_after: 1e-300,
                potential_norm: 2.5e-3,
                counterterm: vec![3e-4, 0.0],
                lie_order: 3,
                dropped_tail: 0.0,
                closure_correction: 0.0,
                potential: None,
            }],
            final_level: 1,
            final_scale: 0.30000000000000004,
            final_defect: 1e-300,
            final_tau: vec![-1.6177339887, 1.0],
            total_shift: vec![3e-4, 0.0],
            fitted_exponent: None,
            resonance: None,
            message: None,
        }
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_f64(f64::NAN), "null");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample_report();
        let text = report_json(&r).unwrap();
        assert!(text.contains("\"schema\": 1"));
        assert!(text.contains("\"verdict\": \"converged\""));
        assert_eq!(parse_report_json(&text).unwrap(), r);
        assert_eq!(report_json(&parse_report_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn wrong_schema_rejected() {
        let text = report_json(&sample_report()).unwrap().replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(parse_report_json(&text), Err(KamError::InvalidReport(_))));
    }

    #[test]
    fn csv_has_one_row_per_step() {
        let mut r = sample_report();
        let csv = report_csv(&r).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,scale,defect_before,defect_after,exponent_estimate");
        assert_eq!(lines.len(), 2);
        r.steps.clear();
        assert_eq!(report_csv(&r).unwrap().lines().count(), 1);
    }
}
