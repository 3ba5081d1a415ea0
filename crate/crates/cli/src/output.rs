//! Result tables and their on-disk formats.
//!
//! CSV columns: `point`, one column per sweep axis (config units), `time_s`
//! (`inf` for stationary states), `S`, `mean_phase`, `re_a`, `im_a`,
//! `n_mean`, `purity`, then `ring_radius` and `r_c` for limit-cycle runs,
//! then `wigner_file` and `error`. Floats are written in shortest
//! round-trip form; absent values are empty fields.
//!
//! Wigner grids are plain text: `key value...` header lines followed by one
//! line of `n_phi` values per radius.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use qvdp_core::tomography::WignerGrid;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema: {0}")]
    Schema(String),
}

fn schema(msg: impl Into<String>) -> OutputError {
    OutputError::Schema(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub s: f64,
    pub mean_phase: Option<f64>,
    pub re_a: f64,
    pub im_a: f64,
    pub n_mean: f64,
    pub purity: f64,
    /// Limit-cycle runs only.
    pub ring_radius: Option<f64>,
    pub r_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub point: usize,
    /// Sweep coordinates in config units.
    pub coords: Vec<f64>,
    /// Seconds; infinite for stationary states.
    pub time_s: f64,
    /// Absent when the point failed.
    pub observables: Option<Observables>,
    /// Path relative to the output directory.
    pub wigner_file: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub axes: Vec<String>,
    /// Adds the `ring_radius` and `r_c` columns.
    pub ring_columns: bool,
    pub rows: Vec<ResultRow>,
}

const OBSERVABLE_COLUMNS: [&str; 7] = ["time_s", "S", "mean_phase", "re_a", "im_a", "n_mean", "purity"];
const RING_COLUMNS: [&str; 2] = ["ring_radius", "r_c"];
const TAIL_COLUMNS: [&str; 2] = ["wigner_file", "error"];

impl ResultTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["point".to_string()];
        h.extend(self.axes.iter().cloned());
        h.extend(OBSERVABLE_COLUMNS.iter().map(|s| s.to_string()));
        if self.ring_columns {
            h.extend(RING_COLUMNS.iter().map(|s| s.to_string()));
        }
        h.extend(TAIL_COLUMNS.iter().map(|s| s.to_string()));
        h
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// True when there are rows and every one of them failed.
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.failed_rows() == self.rows.len()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, OutputError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in &self.rows {
            w.write_record(self.record(row))?;
        }
        w.into_inner().map_err(|e| OutputError::Io(e.into_error()))
    }

    fn record(&self, row: &ResultRow) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let o = row.observables.as_ref();
        let mut rec = vec![row.point.to_string()];
        rec.extend(row.coords.iter().map(|c| fmt_f64(*c)));
        rec.push(fmt_f64(row.time_s));
        rec.push(opt(o.map(|o| o.s)));
        rec.push(opt(o.and_then(|o| o.mean_phase)));
        rec.push(opt(o.map(|o| o.re_a)));
        rec.push(opt(o.map(|o| o.im_a)));
        rec.push(opt(o.map(|o| o.n_mean)));
        rec.push(opt(o.map(|o| o.purity)));
        if self.ring_columns {
            rec.push(opt(o.and_then(|o| o.ring_radius)));
            rec.push(opt(o.and_then(|o| o.r_c)));
        }
        rec.push(row.wigner_file.clone().unwrap_or_default());
        rec.push(row.error.clone().unwrap_or_default());
        rec
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, OutputError> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("point") {
            return Err(schema("first column must be `point`"));
        }
        let t = header.iter().position(|h| h == "time_s").ok_or_else(|| schema("no `time_s` column"))?;
        let axes = header[1..t].to_vec();
        let ring_columns = header.iter().any(|h| h == "ring_radius");
        let table = ResultTable { axes, ring_columns, rows: Vec::new() };
        let expected = table.header();
        if header != expected {
            return Err(schema(format!("columns {header:?} do not match {expected:?}")));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(table.parse_record(&rec?)?);
        }
        Ok(ResultTable { rows, ..table })
    }

    fn parse_record(&self, rec: &csv::StringRecord) -> Result<ResultRow, OutputError> {
        let header = self.header();
        let field = |i: usize| rec.get(i).ok_or_else(|| schema(format!("row is missing column `{}`", header[i])));
        let num = |i: usize| -> Result<f64, OutputError> {
            let s = field(i)?;
            s.parse::<f64>().map_err(|_| schema(format!("column `{}`: `{s}` is not a number", header[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>, OutputError> {
            if field(i)?.is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let text = |i: usize| -> Result<Option<String>, OutputError> {
            let s = field(i)?;
            Ok((!s.is_empty()).then(|| s.to_string()))
        };
        let point = field(0)?.parse::<usize>().map_err(|_| schema("column `point`: not an integer"))?;
        let n_axes = self.axes.len();
        let coords = (1..=n_axes).map(num).collect::<Result<Vec<_>, _>>()?;
        let base = 1 + n_axes;
        let time_s = num(base)?;
        let s = opt(base + 1)?;
        let mean_phase = opt(base + 2)?;
        let mut i = base + 7;
        let (ring_radius, r_c) = if self.ring_columns {
            i += 2;
            (opt(base + 7)?, opt(base + 8)?)
        } else {
            (None, None)
        };
        let observables = match s {
            None => None,
            Some(s) => Some(Observables {
                s,
                mean_phase,
                re_a: num(base + 3)?,
                im_a: num(base + 4)?,
                n_mean: num(base + 5)?,
                purity: num(base + 6)?,
                ring_radius,
                r_c,
            }),
        };
        Ok(ResultRow { point, coords, time_s, observables, wigner_file: text(i)?, error: text(i + 1)? })
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), OutputError> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, OutputError> {
        Self::from_csv(&std::fs::read(path)?)
    }
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Serializes a grid with extra `key value` metadata lines.
pub fn wigner_to_text(grid: &WignerGrid, meta: &[(String, String)]) -> String {
    let mut out = String::from("# wigner function W(r, phi) on a polar grid\n");
    for (k, v) in meta {
        writeln!(out, "{k} {v}").unwrap();
    }
    let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
    writeln!(out, "levels {}", grid.levels).unwrap();
    writeln!(out, "max_imag {}", fmt_f64(grid.max_imag)).unwrap();
    writeln!(out, "n_r {}", grid.n_r()).unwrap();
    writeln!(out, "n_phi {}", grid.n_phi()).unwrap();
    writeln!(out, "r_axis {}", join(&grid.r_axis)).unwrap();
    writeln!(out, "phi_axis {}", join(&grid.phi_axis)).unwrap();
    out.push_str("# rows: r_axis[i]; columns: phi_axis[j]\n");
    for i in 0..grid.n_r() {
        writeln!(out, "{}", join(grid.row(i))).unwrap();
    }
    out
}

/// Parses [`wigner_to_text`] output into the grid and its metadata.
pub fn wigner_from_text(text: &str) -> Result<(WignerGrid, Vec<(String, String)>), OutputError> {
    let mut meta = Vec::new();
    let mut r_axis = None;
    let mut phi_axis = None;
    let mut levels = None;
    let mut max_imag = None;
    let mut values = Vec::new();
    let parse_list = |s: &str| -> Result<Vec<f64>, OutputError> {
        s.split_whitespace().map(|x| x.parse::<f64>().map_err(|_| schema(format!("`{x}` is not a number")))).collect()
    };
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if key.parse::<f64>().is_ok() {
            values.extend(parse_list(line)?);
            continue;
        }
        match key {
            "r_axis" => r_axis = Some(parse_list(rest)?),
            "phi_axis" => phi_axis = Some(parse_list(rest)?),
            "levels" => levels = Some(rest.parse::<usize>().map_err(|_| schema("`levels` is not an integer"))?),
            "max_imag" => max_imag = Some(rest.parse::<f64>().map_err(|_| schema("`max_imag` is not a number"))?),
            "n_r" | "n_phi" => {}
            _ => meta.push((key.to_string(), rest.to_string())),
        }
    }
    let r_axis = r_axis.ok_or_else(|| schema("missing `r_axis`"))?;
    let phi_axis = phi_axis.ok_or_else(|| schema("missing `phi_axis`"))?;
    if values.len() != r_axis.len() * phi_axis.len() {
        return Err(schema(format!("{} values for a {}x{} grid", values.len(), r_axis.len(), phi_axis.len())));
    }
    let grid = WignerGrid {
        r_axis,
        phi_axis,
        values,
        max_imag: max_imag.ok_or_else(|| schema("missing `max_imag`"))?,
        levels: levels.ok_or_else(|| schema("missing `levels`"))?,
    };
    Ok((grid, meta))
}
