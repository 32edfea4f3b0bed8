//! Text formats: parameter files (TOML), lattice states and series (CSV),
//! and JSON with lossless float rendering.
//!
//! Every float is written with 17 significant digits so a write/read cycle
//! reproduces the `f64` bit pattern.

use num_complex::Complex64;
use serde::Deserialize;

use crate::dynamics::EvolutionRun;
use crate::error::{Error, Result};
use crate::lattice::{VectorState, WindowSpec};
use crate::params::CoinParameters;

pub const STATE_HEADER: [&str; 10] = ["x1", "x2", "re1", "im1", "re2", "im2", "re3", "im3", "re4", "im4"];

/// Largest half-width accepted from a state file.
pub const MAX_STATE_HALF_WIDTH: usize = 4096;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    p: [f64; 2],
    q: [[f64; 2]; 2],
    phi: [[f64; 2]; 4],
    omega: [[f64; 2]; 4],
}

fn complex_pairs<const K: usize>(v: [[f64; 2]; K]) -> [Complex64; K] {
    v.map(|[re, im]| Complex64::new(re, im))
}

/// Parse a parameter file. Complex entries are `[re, im]` pairs:
///
/// ```toml
/// p = [0.0, 0.0]
/// q = [[1.0, 0.0], [1.0, 0.0]]
/// phi = [[0.7071067811865476, 0.0], [0.0, 0.0], [0.5, 0.0], [0.5, 0.0]]
/// omega = [[0.5291502622129181, 0.0], [0.0, 0.0], [-0.6, 0.0], [0.6, 0.0]]
/// ```
///
/// Only syntax and finiteness are checked here; the algebraic constraints
/// belong to [`crate::params::validate_parameters`].
pub fn parse_params_toml(text: &str) -> Result<CoinParameters> {
    let file: ParamsFile = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
    let all = file
        .p
        .iter()
        .chain(file.q.iter().flatten())
        .chain(file.phi.iter().flatten())
        .chain(file.omega.iter().flatten());
    if all.clone().any(|x| !x.is_finite()) {
        return Err(Error::Parse("parameter entries must be finite".into()));
    }
    Ok(CoinParameters::new(
        file.p,
        complex_pairs(file.q),
        complex_pairs(file.phi),
        complex_pairs(file.omega),
    ))
}

pub fn params_to_toml(params: &CoinParameters) -> String {
    let c = |z: &Complex64| format!("[{:?}, {:?}]", z.re, z.im);
    let list = |zs: &[Complex64]| zs.iter().map(c).collect::<Vec<_>>().join(", ");
    format!(
        "p = [{:?}, {:?}]\nq = [{}]\nphi = [{}]\nomega = [{}]\n",
        params.p[0],
        params.p[1],
        list(&params.q),
        list(&params.phi),
        list(&params.omega)
    )
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Every window site in storage order, one row per site.
pub fn state_to_csv(state: &VectorState) -> String {
    let mut w = csv_writer();
    w.write_record(STATE_HEADER).expect("in-memory write");
    let window = state.window();
    for (i, v) in state.values().iter().enumerate() {
        let (x1, x2) = window.site(i);
        let mut row = vec![x1.to_string(), x2.to_string()];
        for z in v {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, col: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value {s:?} in column {col}")))
}

/// Read a state written by [`state_to_csv`]. Rows may come in any order, but
/// together they must cover a full square window `{−N..N}²` exactly once.
/// The returned state has margin 0.
pub fn state_from_csv(text: &str) -> Result<VectorState> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().map(str::trim).ne(STATE_HEADER) {
        return Err(Error::Parse(format!("state header must be {}", STATE_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    let mut reach: u64 = 0;
    for (n, record) in reader.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != STATE_HEADER.len() {
            return Err(Error::Parse(format!("line {line}: expected 10 fields, found {}", record.len())));
        }
        let x1: i64 = parse_field(&record[0], line, "x1")?;
        let x2: i64 = parse_field(&record[1], line, "x2")?;
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for (c, z) in v.iter_mut().enumerate() {
            let re: f64 = parse_field(&record[2 + 2 * c], line, STATE_HEADER[2 + 2 * c])?;
            let im: f64 = parse_field(&record[3 + 2 * c], line, STATE_HEADER[3 + 2 * c])?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("line {line}: non-finite amplitude")));
            }
            *z = Complex64::new(re, im);
        }
        reach = reach.max(x1.unsigned_abs()).max(x2.unsigned_abs());
        if reach > MAX_STATE_HALF_WIDTH as u64 {
            return Err(Error::Parse(format!("line {line}: site outside the largest supported window")));
        }
        rows.push(((x1, x2), v));
    }
    let n = reach as usize;
    let window = WindowSpec::new(n.max(1), 0)?;
    if n == 0 || rows.len() != window.site_count() {
        return Err(Error::Parse(format!(
            "state has {} rows; a window of half-width {n} needs {}",
            rows.len(),
            window.site_count()
        )));
    }
    let mut values = vec![None; window.site_count()];
    for (site, v) in rows {
        let i = window.index(site).expect("within reach");
        if values[i].replace(v).is_some() {
            return Err(Error::Parse(format!("site ({}, {}) listed twice", site.0, site.1)));
        }
    }
    let values = values.into_iter().map(|v| v.expect("count matched and no duplicates")).collect();
    VectorState::from_values(window, values)
}

/// `t` followed by one column per probe.
pub fn time_series_to_csv(run: &EvolutionRun) -> String {
    let mut w = csv_writer();
    let mut header = vec!["t".to_string()];
    header.extend(run.labels.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (t, row) in run.series.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(|&p| fmt_f64(p)));
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// Generic table: a header and rows of floats.
pub fn table_to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv_writer();
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x))).expect("in-memory write");
    }
    finish(w)
}

/// The same table as a JSON array of objects keyed by the header.
pub fn table_to_json(header: &[&str], rows: &[Vec<f64>]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|row| {
                let obj = header.iter().zip(row).map(|(h, &x)| (h.to_string(), json_f64(x))).collect();
                serde_json::Value::Object(obj)
            })
            .collect(),
    )
}

/// A JSON number carrying exactly the 17 digits used in CSV output.
pub fn json_f64(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let n: serde_json::Number = fmt_f64(x).parse().expect("scientific literal is valid JSON");
    serde_json::Value::Number(n)
}

/// Rewrite every float in `value` to the 17-digit form, recursively.
pub fn canonical_json(value: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) => json_f64(x),
            None => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(canonical_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical_json(v))).collect()),
        other => other,
    }
}

/// Serialize, then canonicalize floats; pretty-printed with a trailing newline.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&canonical_json(v)).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// State rows as JSON objects with the CSV column names.
pub fn state_to_json(state: &VectorState) -> serde_json::Value {
    let window = state.window();
    serde_json::Value::Array(
        state
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (x1, x2) = window.site(i);
                let mut obj = serde_json::Map::new();
                obj.insert("x1".into(), x1.into());
                obj.insert("x2".into(), x2.into());
                for (c, z) in v.iter().enumerate() {
                    obj.insert(STATE_HEADER[2 + 2 * c].into(), json_f64(z.re));
                    obj.insert(STATE_HEADER[3 + 2 * c].into(), json_f64(z.im));
                }
                serde_json::Value::Object(obj)
            })
            .collect(),
    )
}
