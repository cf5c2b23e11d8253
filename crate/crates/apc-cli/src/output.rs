//! File writers. Everything lands via write-temp-then-rename so a reader
//! never sees half a file.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use apc_lab::experiments::ScalingFit;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A header and rows of already formatted fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }
}

pub fn write_csv(table: &Table, path: &Path) -> io::Result<()> {
    write_atomic(path, &table.to_csv()?)
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// One row per named fit.
pub fn fits_table<'a>(fits: impl IntoIterator<Item = (&'a str, &'a ScalingFit)>) -> Table {
    let mut t = Table::new(&["name", "slope", "slope_lo", "slope_hi", "log10_prefactor", "residual_rms", "used", "window_lo", "window_hi"]);
    for (name, f) in fits {
        t.push(vec![
            name.to_string(),
            fmt_f64(f.slope),
            fmt_f64(f.slope_ci.0),
            fmt_f64(f.slope_ci.1),
            fmt_f64(f.intercept),
            fmt_f64(f.residual_rms),
            f.used.to_string(),
            fmt_f64(f.window.0),
            fmt_f64(f.window.1),
        ]);
    }
    t
}
