//! CSV and JSON persistence for pairs, lines, decay samples, connections and
//! curves.
//!
//! Every CSV starts with a header row; floats are written in shortest
//! round-trip form so values survive a write/read cycle exactly.  JSON
//! documents carry a `schema_version` field.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::connections::MeromorphicConnection;
use crate::curvegraph::NodalCurve;
use crate::cylinder::{CylinderDomain, Pair};
use crate::error::{invalid, Error, Result};
use crate::gradflow::Line;
use crate::target::TargetManifold;

/// Version of every CSV/JSON layout written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn float_rows<R: Read>(r: R, expected: &[&str]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    for (k, name) in expected.iter().enumerate() {
        if header.get(k).map(String::as_str) != Some(*name) {
            return Err(Error::Parse(format!("column {k} should be `{name}`, header is {header:?}")));
        }
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.deserialize::<Vec<f64>>().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", line + 2, rec.len(), header.len())));
        }
        rows.push(rec);
    }
    Ok((header, rows))
}

/// JSON sidecar describing a pair CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairHeader {
    pub schema_version: u32,
    pub domain: CylinderDomain,
    pub target: TargetManifold,
}

impl PairHeader {
    pub fn of(pair: &Pair) -> Self {
        PairHeader { schema_version: SCHEMA_VERSION, domain: pair.domain, target: pair.target.clone() }
    }
}

/// Columns `t, theta, a, phi0, …` in row-major grid order.
pub fn write_pair_csv<W: Write>(pair: &Pair, w: W) -> Result<()> {
    let mut wr = writer(w);
    let d = pair.dim();
    let mut header = vec!["t".to_string(), "theta".into(), "a".into()];
    header.extend((0..d).map(|c| format!("phi{c}")));
    wr.write_record(&header).map_err(csv_err)?;
    let dom = &pair.domain;
    for i in 0..dom.n_t {
        for j in 0..dom.n_theta {
            let mut row = vec![dom.t(i), dom.theta(j), pair.a_at(i, j)];
            row.extend_from_slice(pair.point(i, j));
            wr.serialize(row).map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn read_pair_csv<R: Read>(header: &PairHeader, r: R) -> Result<Pair> {
    check_version(header.schema_version)?;
    let (cols, rows) = float_rows(r, &["t", "theta", "a"])?;
    let d = header.target.real_dim();
    if cols.len() != 3 + d {
        return Err(Error::Parse(format!("expected {} columns for this target, found {}", 3 + d, cols.len())));
    }
    if rows.len() != header.domain.len() {
        return Err(Error::Parse(format!("expected {} rows, found {}", header.domain.len(), rows.len())));
    }
    let a = rows.iter().map(|r| r[2]).collect();
    let phi = rows.iter().flat_map(|r| r[3..].iter().copied()).collect();
    Pair::new(header.domain, header.target.clone(), a, phi)
}

/// Writes `<stem>.csv` and `<stem>.json`.
pub fn save_pair(pair: &Pair, dir: &Path, stem: &str) -> Result<()> {
    write_pair_csv(pair, File::create(dir.join(format!("{stem}.csv")))?)?;
    write_json(&dir.join(format!("{stem}.json")), &PairHeader::of(pair))
}

pub fn load_pair(dir: &Path, stem: &str) -> Result<Pair> {
    let header: PairHeader = read_json(&dir.join(format!("{stem}.json")))?;
    read_pair_csv(&header, File::open(dir.join(format!("{stem}.csv")))?)
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

/// Columns `t, x0, x1, …`.
pub fn write_line_csv<W: Write>(line: &Line, w: W) -> Result<()> {
    let mut wr = writer(w);
    let d = line.points.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..d).map(|c| format!("x{c}")));
    wr.write_record(&header).map_err(csv_err)?;
    for (i, p) in line.points.iter().enumerate() {
        let mut row = vec![line.time(i)];
        row.extend_from_slice(p);
        wr.serialize(row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a line CSV; the time column must be uniformly spaced.
pub fn read_line_csv<R: Read>(r: R) -> Result<Line> {
    let (_, rows) = float_rows(r, &["t"])?;
    if rows.len() < 2 {
        return Err(Error::Parse("a line needs at least two samples".into()));
    }
    let n = rows.len();
    let start = rows[0][0];
    let step = (rows[n - 1][0] - start) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::Parse("time column must be increasing".into()));
    }
    if let Some(i) = (0..n).find(|&i| (rows[i][0] - (start + i as f64 * step)).abs() > 1e-9 * step.max(1.0)) {
        return Err(Error::Parse(format!("time column is not uniform at row {}", i + 2)));
    }
    Ok(Line { start, step, points: rows.into_iter().map(|r| r[1..].to_vec()).collect() })
}

/// Columns `t, value`.
pub fn write_samples_csv<W: Write>(samples: &[(f64, f64)], w: W) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t", "value"]).map_err(csv_err)?;
    for &(t, v) in samples {
        wr.serialize((t, v)).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let (cols, rows) = float_rows(r, &["t", "value"])?;
    if cols.len() != 2 {
        return Err(Error::Parse(format!("expected columns t,value, found {cols:?}")));
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

/// Generic table writer: a header and rows of floats.
pub fn write_table_csv<W: Write>(header: &[&str], rows: &[Vec<f64>], w: W) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Shape { expected: header.len(), got: row.len() });
        }
        wr.serialize(row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize, Deserialize)]
struct ConnectionDoc {
    connection: MeromorphicConnection,
}

#[derive(Serialize, Deserialize)]
struct CurveDoc {
    curve: NodalCurve,
}

pub fn connection_to_json(conn: &MeromorphicConnection) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body: ConnectionDoc { connection: conn.clone() },
    })?)
}

pub fn connection_from_json(s: &str) -> Result<MeromorphicConnection> {
    let doc: Versioned<ConnectionDoc> = serde_json::from_str(s)?;
    check_version(doc.schema_version)?;
    Ok(doc.body.connection)
}

pub fn curve_to_json(curve: &NodalCurve) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body: CurveDoc { curve: curve.clone() },
    })?)
}

/// Accepts either a versioned document `{schema_version, curve}` or a bare
/// curve object.
pub fn curve_from_json(s: &str) -> Result<NodalCurve> {
    let v: serde_json::Value = serde_json::from_str(s)?;
    if v.get("curve").is_some() {
        let doc: Versioned<CurveDoc> = serde_json::from_value(v)?;
        check_version(doc.schema_version)?;
        return Ok(doc.body.curve);
    }
    Ok(serde_json::from_value(v)?)
}

/// Curvature density sampled on the square `[−half_width, half_width]²`
/// with `n × n` points: columns `x, y, density`.
pub fn write_curvature_csv<W: Write>(conn: &MeromorphicConnection, half_width: f64, n: usize, w: W) -> Result<()> {
    if n < 2 || !(half_width > 0.0) {
        return invalid("curvature grid needs n ≥ 2 and a positive width");
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (-half_width + i as f64 * h, -half_width + j as f64 * h)))
        .map(|(x, y)| vec![x, y, conn.curvature_density(x, y)])
        .collect();
    write_table_csv(&["x", "y", "density"], &rows, w)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    Ok(serde_json::from_str(&s)?)
}
