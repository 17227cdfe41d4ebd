//! Deterministic CSV and JSON output.
//!
//! Floats are written in their shortest round-trip form, fields in
//! declaration order, and nothing time-dependent is recorded, so identical
//! inputs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::objectives::Objective;
use crate::stabreg_convex::ConvexTrace;
use crate::stabreg_rel::MirrorTrace;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

/// Pretty JSON `{schema_version, kind, data}` with a trailing newline.
pub fn to_json<T: Serialize>(kind: &str, data: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        data,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, data: &T) -> Result<()> {
    write_text(path, &to_json(kind, data)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}

/// Shortest round-trip form, with an exponent for very large or small
/// magnitudes (`0.1`, `1.0`, `1e-300`).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Rows of preformatted cells under a header.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// `t,obj_gap,epoch_k,lambda_k` for `t = 0..=T_max`, with the gap of the
/// anytime output `x_t` and the epoch in progress at `t`.
pub fn convex_trace_csv<F: Objective + ?Sized>(trace: &ConvexTrace, f: &F, f_star: f64) -> Result<String> {
    let outputs = trace.outputs();
    let gaps: Vec<f64> = outputs.iter().map(|(_, x)| f.value(x) - f_star).collect();
    csv_string(
        &["t", "obj_gap", "epoch_k", "lambda_k"],
        (0..=trace.max_steps).map(|t| {
            let c = trace.completed_by(t);
            let (k, lambda) = trace.epoch_at(t);
            vec![t.to_string(), fmt_f64(gaps[c]), k.to_string(), fmt_f64(lambda)]
        }),
    )
}

/// `t,obj_gap` for `t = 0..=T`.
pub fn mirror_trace_csv<F: Objective + ?Sized>(trace: &MirrorTrace, f: &F, f_star: f64) -> Result<String> {
    csv_string(
        &["t", "obj_gap"],
        trace
            .iterates
            .iter()
            .enumerate()
            .map(|(t, x)| vec![t.to_string(), fmt_f64(f.value(x) - f_star)]),
    )
}

/// `x,y` plot data.
pub fn curve_csv(points: &[(f64, f64)]) -> Result<String> {
    csv_string(&["x", "y"], points.iter().map(|&(x, y)| vec![fmt_f64(x), fmt_f64(y)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_envelope_is_stable() {
        let a = to_json("demo", &vec![0.1, 1.0 / 3.0]).unwrap();
        assert_eq!(a, to_json("demo", &vec![0.1, 1.0 / 3.0]).unwrap());
        assert!(a.starts_with("{\n  \"schema_version\": 1,\n  \"kind\": \"demo\""));
        assert!(a.contains("0.3333333333333333"));
    }

    #[test]
    fn curve_csv_round_trips_floats() {
        let s = curve_csv(&[(1.0, 0.1), (2.0, 1e-300)]).unwrap();
        assert_eq!(s, "x,y\n1.0,0.1\n2.0,1e-300\n");
    }
}
