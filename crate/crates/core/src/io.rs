//! Time-series CSV and density dump files.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::heat::{HeatGrid, HeatState};

pub const CSV_HEADER: &str = "t,E,S,mass,dSdt,degL,degM,relEnt,e";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders records as CSV text; `relEnt` is left empty when absent.
pub fn timeseries_csv(records: &[DiagnosticsRecord<f64>]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::invalid("records", "cannot write an empty time series"));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let rel = r.rel_ent.map(num).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.energy),
            num(r.entropy),
            num(r.mass),
            num(r.dsdt),
            num(r.deg_l),
            num(r.deg_m),
            rel,
            num(r.e)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord<f64>]) -> Result<()> {
    let text = timeseries_csv(records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_field(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::io(path, format!("line {line}: cannot parse `{field}` as a number")))
}

pub fn parse_timeseries(path: &Path, text: &str) -> Result<Vec<DiagnosticsRecord<f64>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::io(path, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::io(path, format!("line {line_no}: expected 9 fields, found {}", fields.len())));
        }
        let f = |k: usize| parse_field(path, line_no, fields[k]);
        records.push(DiagnosticsRecord {
            t: f(0)?,
            energy: f(1)?,
            entropy: f(2)?,
            mass: f(3)?,
            dsdt: f(4)?,
            deg_l: f(5)?,
            deg_m: f(6)?,
            rel_ent: if fields[7].trim().is_empty() { None } else { Some(f(7)?) },
            e: f(8)?,
        });
    }
    Ok(records)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_timeseries(path, &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Kfp,
    Heat,
}

/// Contents of a density dump. Heat dumps have `np = 1` and `pmax = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityDump {
    pub kind: DumpKind,
    pub nq: usize,
    pub np: usize,
    pub lq: f64,
    pub pmax: f64,
    pub t: f64,
    pub rho: Vec<f64>,
}

/// Phase-space dump: header lines then `qIndex,pIndex,q,p,rho` rows.
pub fn kfp_dump(grid: &PhaseGrid<f64>, rho: &[f64], t: f64) -> String {
    let mut out = String::from("# kind=kfp\n");
    writeln!(out, "# Nq={} Np={} Lq={} Pmax={} t={}", grid.nq, grid.np, num(grid.lq), num(grid.pmax), num(t)).unwrap();
    for i in 0..grid.nq {
        for j in 0..grid.np {
            writeln!(out, "{i},{j},{},{},{}", num(grid.q(i)), num(grid.p(j)), num(rho[grid.index(i, j)])).unwrap();
        }
    }
    out
}

/// Spatial dump: header lines then `qIndex,q,rho` rows.
pub fn heat_dump(grid: &HeatGrid<f64>, state: &HeatState<f64>) -> String {
    let mut out = String::from("# kind=heat\n");
    writeln!(out, "# Nq={} Lq={} t={}", grid.n, num(grid.length), num(state.t)).unwrap();
    for i in 0..grid.n {
        writeln!(out, "{i},{},{}", num(grid.x(i)), num(state.rho[i])).unwrap();
    }
    out
}

pub fn write_kfp_dump(path: &Path, grid: &PhaseGrid<f64>, rho: &[f64], t: f64) -> Result<()> {
    fs::write(path, kfp_dump(grid, rho, t)).map_err(|e| Error::io(path, e))
}

pub fn write_heat_dump(path: &Path, grid: &HeatGrid<f64>, state: &HeatState<f64>) -> Result<()> {
    fs::write(path, heat_dump(grid, state)).map_err(|e| Error::io(path, e))
}

pub fn parse_dump(path: &Path, text: &str) -> Result<DensityDump> {
    let bad = |msg: String| Error::io(path, msg);
    let mut lines = text.lines();
    let kind = match lines.next().map(str::trim) {
        Some("# kind=kfp") => DumpKind::Kfp,
        Some("# kind=heat") => DumpKind::Heat,
        _ => return Err(bad("missing `# kind=` header".into())),
    };
    let header = lines.next().ok_or_else(|| bad("missing dimension header".into()))?;
    let header = header.strip_prefix('#').ok_or_else(|| bad("malformed dimension header".into()))?;
    let mut nq = None;
    let mut np = if kind == DumpKind::Heat { Some(1) } else { None };
    let (mut lq, mut pmax, mut t) = (None, if kind == DumpKind::Heat { Some(0.0) } else { None }, None);
    for item in header.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("malformed header item `{item}`")))?;
        let int = || v.parse::<usize>().map_err(|_| bad(format!("bad value for {k}")));
        let float = || v.parse::<f64>().map_err(|_| bad(format!("bad value for {k}")));
        match k {
            "Nq" => nq = Some(int()?),
            "Np" if kind == DumpKind::Kfp => np = Some(int()?),
            "Lq" => lq = Some(float()?),
            "Pmax" if kind == DumpKind::Kfp => pmax = Some(float()?),
            "t" => t = Some(float()?),
            _ => return Err(bad(format!("unexpected header item `{k}`"))),
        }
    }
    let (nq, np, lq, pmax, t) = match (nq, np, lq, pmax, t) {
        (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
        _ => return Err(bad("incomplete dimension header".into())),
    };
    let width = if kind == DumpKind::Kfp { 5 } else { 3 };
    let mut rho = vec![f64::NAN; nq * np];
    let mut seen = 0;
    for (n, line) in lines.enumerate() {
        let line_no = n + 3;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(format!("line {line_no}: expected {width} fields")));
        }
        let i: usize = fields[0].parse().map_err(|_| bad(format!("line {line_no}: bad q index")))?;
        let j: usize = if kind == DumpKind::Kfp {
            fields[1].parse().map_err(|_| bad(format!("line {line_no}: bad p index")))?
        } else {
            0
        };
        if i >= nq || j >= np {
            return Err(bad(format!("line {line_no}: index out of range")));
        }
        rho[i * np + j] = parse_field(path, line_no, fields[width - 1])?;
        seen += 1;
    }
    if seen != nq * np || rho.iter().any(|x| x.is_nan()) {
        return Err(bad(format!("expected {} density rows, found {seen}", nq * np)));
    }
    Ok(DensityDump { kind, nq, np, lq, pmax, t, rho })
}

pub fn read_dump(path: &Path) -> Result<DensityDump> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dump(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rel: Option<f64>) -> DiagnosticsRecord<f64> {
        DiagnosticsRecord {
            t: 0.1,
            energy: 1.0 / 3.0,
            entropy: -2.5e-17,
            mass: 1.0,
            dsdt: 3.3e200,
            deg_l: 0.0,
            deg_m: 1e-300,
            rel_ent: rel,
            e: -7.0,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let recs = vec![record(Some(0.123_456_789_012_345_68)), record(None)];
        let text = timeseries_csv(&recs).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(parse_timeseries(Path::new("x"), &text).unwrap(), recs);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(timeseries_csv(&[]).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let g = PhaseGrid::new(8, 8, 2.0, 3.0).unwrap();
        let rho: Vec<f64> = (0..g.len()).map(|k| (k as f64).sqrt() / 7.0).collect();
        let d = parse_dump(Path::new("x"), &kfp_dump(&g, &rho, 0.25)).unwrap();
        assert_eq!((d.kind, d.nq, d.np, d.lq, d.pmax, d.t), (DumpKind::Kfp, 8, 8, 2.0, 3.0, 0.25));
        assert_eq!(d.rho, rho);

        let hg = HeatGrid::new(10, 1.0).unwrap();
        let s = HeatState { rho: (0..10).map(|i| 0.1 * i as f64).collect(), t: 0.5 };
        let d = parse_dump(Path::new("x"), &heat_dump(&hg, &s)).unwrap();
        assert_eq!((d.kind, d.nq, d.np), (DumpKind::Heat, 10, 1));
        assert_eq!(d.rho, s.rho);
    }

    #[test]
    fn malformed_dump_rejected() {
        assert!(parse_dump(Path::new("x"), "# kind=kfp\n# Nq=8\n").is_err());
        assert!(parse_dump(Path::new("x"), "hello").is_err());
    }
}
