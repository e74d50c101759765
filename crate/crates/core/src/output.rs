//! Flat-file serialization of sweep tables and reports.
//!
//! Floats are written in their shortest round-trip decimal form, so files are
//! byte-stable and re-parse to identical values.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::SweepRow;

pub const SWEEP_HEADER: [&str; 8] =
    ["swept_value", "beta", "pi", "delta_analytic", "delta_sim", "delta_sim_ci", "b_star", "delta_star"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.swept_value),
            fmt_f64(r.beta),
            fmt_f64(r.pi),
            fmt_f64(r.delta_analytic),
            fmt_opt(r.delta_sim),
            fmt_opt(r.delta_sim_ci),
            fmt_opt(r.b_star),
            fmt_opt(r.delta_star),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field(field: &str, name: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|e| Error::Domain(format!("column {name}: cannot parse {field:?}: {e}")))
}

fn parse_opt(field: &str, name: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, name).map(Some)
    }
}

/// Reads a sweep table written by [`write_sweep_csv`]. The rate and flag
/// columns are not part of the schema and come back as `None`.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::Domain(format!("unexpected sweep header {header:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            Ok(SweepRow {
                swept_value: parse_field(f(0), SWEEP_HEADER[0])?,
                rate_bpcu: None,
                beta: parse_field(f(1), SWEEP_HEADER[1])?,
                pi: parse_field(f(2), SWEEP_HEADER[2])?,
                delta_analytic: parse_field(f(3), SWEEP_HEADER[3])?,
                delta_sim: parse_opt(f(4), SWEEP_HEADER[4])?,
                delta_sim_ci: parse_opt(f(5), SWEEP_HEADER[5])?,
                b_star: parse_opt(f(6), SWEEP_HEADER[6])?,
                delta_star: parse_opt(f(7), SWEEP_HEADER[7])?,
                flag: None,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes a header line followed by one row of `name = value` pairs.
pub fn write_record_csv<W: Write>(fields: &[(&str, String)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(fields.iter().map(|(k, _)| *k))?;
    w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(values: [f64; 4], optional: [Option<f64>; 4]) -> SweepRow {
        SweepRow {
            swept_value: values[0],
            rate_bpcu: None,
            beta: values[1],
            pi: values[2],
            delta_analytic: values[3],
            delta_sim: optional[0],
            delta_sim_ci: optional[1],
            b_star: optional[2],
            delta_star: optional[3],
            flag: None,
        }
    }

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_sweep_csv(&[row([1e-4, 48.5, 0.07, 622.3], [None, None, Some(3.3e-4), None])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("swept_value,beta,pi,delta_analytic,delta_sim,delta_sim_ci,b_star,delta_star"));
        assert_eq!(lines.next(), Some("0.0001,48.5,0.07,622.3,,,0.00033,"));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_sweep_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![proptest::num::f64::NORMAL, proptest::num::f64::SUBNORMAL, Just(0.0)]
    }

    proptest! {
        #[test]
        fn csv_round_trips_bit_exact(
            values in proptest::array::uniform4(finite()),
            optional in proptest::array::uniform4(proptest::option::of(finite())),
        ) {
            let rows = vec![row(values, optional), row(values, [None; 4])];
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf).unwrap();
            let back = read_sweep_csv(buf.as_slice()).unwrap();
            let bits = |r: &SweepRow| {
                [Some(r.swept_value), Some(r.beta), Some(r.pi), Some(r.delta_analytic),
                 r.delta_sim, r.delta_sim_ci, r.b_star, r.delta_star].map(|v| v.map(f64::to_bits))
            };
            prop_assert_eq!(rows.iter().map(bits).collect::<Vec<_>>(), back.iter().map(bits).collect::<Vec<_>>());
        }
    }
}
