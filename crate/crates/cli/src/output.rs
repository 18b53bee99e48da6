//! Output files: CSVs with an echoed configuration header and gnuplot scripts.
//!
//! Files are rendered in memory and written in one go, so a failed run never
//! leaves half a CSV behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dronesim_core::Method;

use crate::error::{CliError, CliResult};

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn save(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(CliError::io(&path))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.written
    }
}

pub const SWEEP_HEADER: &str = "t_s,gamma_db,coverage,rate_nats,method,ci_half_width";

/// One row of a coverage or rate sweep. Blank cells are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t_s: f64,
    pub gamma_db: Option<f64>,
    pub coverage: Option<f64>,
    pub rate_nats: Option<f64>,
    pub method: Method,
    pub ci_half_width: Option<f64>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Sweep CSV with `echo` as its comment header.
pub fn sweep_csv(echo: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(echo);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t_s,
            cell(r.gamma_db),
            cell(r.coverage),
            cell(r.rate_nats),
            r.method.as_str(),
            cell(r.ci_half_width)
        );
    }
    out
}

/// A curve for [`gnuplot_script`]: `file` plotted as column `x` against `y`.
pub struct Series<'a> {
    pub file: &'a str,
    pub x: usize,
    pub y: usize,
    pub title: &'a str,
    /// gnuplot `every` filter such as `::0::10`, if the file mixes curves.
    pub filter: Option<String>,
}

pub fn gnuplot_script(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set datafile commentschars '#'");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set title '{title}'");
    let _ = writeln!(out, "set xlabel '{xlabel}'");
    let _ = writeln!(out, "set ylabel '{ylabel}'");
    let _ = writeln!(out, "set grid");
    let plots: Vec<String> = series
        .iter()
        .map(|s| {
            let every = s.filter.as_deref().map(|f| format!(" every {f}")).unwrap_or_default();
            format!("'{}'{every} using {}:{} with lines title '{}'", s.file, s.x, s.y, s.title)
        })
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}
