//! Whitespace-separated tables for gnuplot, built from run artifacts.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::snapshot::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Series,
    Snapshot,
    Spectrum,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(PlotKind::Series),
            "snapshot" => Ok(PlotKind::Snapshot),
            "spectrum" => Ok(PlotKind::Spectrum),
            _ => Err(Error::Config(vec![format!(
                "plot kind: unknown kind `{s}` (expected series, snapshot or spectrum)"
            )])),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PlotOptions {
    /// Series column; `E_s` by default, `hs_u` for Whitham runs.
    pub column: Option<String>,
    /// Snapshot file name or step number; the last snapshot by default.
    pub snapshot: Option<String>,
    /// Field index for spectra.
    pub field: usize,
}

fn run_config(dir: &Path) -> Result<RunConfig> {
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("metadata.json"))?)?;
    Ok(serde_json::from_value(meta["config"].clone())?)
}

fn snapshot_path(dir: &Path, which: Option<&str>) -> Result<PathBuf> {
    let snaps = dir.join("snapshots");
    if let Some(w) = which {
        let name = match w.parse::<usize>() {
            Ok(step) => format!("step_{step:08}.bin"),
            Err(_) => w.to_string(),
        };
        return Ok(snaps.join(name));
    }
    let mut names: Vec<PathBuf> = fs::read_dir(&snaps)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    names.sort();
    names
        .pop()
        .ok_or_else(|| Error::Format(format!("no snapshots in {}", snaps.display())))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn series_table(dir: &Path, column: Option<&str>) -> Result<String> {
    let text = fs::read_to_string(dir.join("series.csv"))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let name = column.unwrap_or(if header.contains(&"E_s") { "E_s" } else { "hs_u" });
    let idx = header
        .iter()
        .position(|c| *c == name)
        .ok_or_else(|| Error::Config(vec![format!("plot column: `{name}` is not one of {}", header.join(", "))]))?;
    let mut out = format!("# t {name}\n");
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let _ = writeln!(out, "{} {}", cells[0], cells[idx]);
    }
    Ok(out)
}

fn snapshot_table(snap: &Snapshot, period: &[f64]) -> String {
    let [n0, n1] = [snap.n[0] as usize, snap.n[1] as usize];
    let mut out = String::new();
    for i in 0..n0 {
        for j in 0..n1 {
            let flat = i * n1 + j;
            let mut row = vec![num(period[0] * i as f64 / n0 as f64)];
            if snap.dim == 2 {
                row.push(num(period[1] * j as f64 / n1 as f64));
            }
            row.extend(snap.fields.iter().map(|f| num(f[flat])));
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        if snap.dim == 2 {
            out.push('\n');
        }
    }
    out
}

/// Shell-binned amplitude `sqrt(sum |f^(k)|^2)` over shells of width
/// `2 pi / max L`; rows are emitted for every shell up to the largest.
fn spectrum_table(snap: &Snapshot, period: &[f64], field: usize) -> Result<String> {
    let values = snap
        .fields
        .get(field)
        .ok_or_else(|| Error::Config(vec![format!("plot field: index {field} out of range")]))?;
    let n: Vec<usize> = snap.n[..snap.dim as usize].iter().map(|&v| v as usize).collect();
    let grid = Grid::new(GridSpec::new(&n, &period[..n.len()])?);
    let spec = grid.forward(values);
    let dk = 2.0 * PI / period[..n.len()].iter().cloned().fold(0.0, f64::max);
    let moduli = grid.wavenumber_moduli();
    let shells = moduli.iter().map(|k| (k / dk).round() as usize).max().unwrap_or(0);
    let mut power = vec![0.0; shells + 1];
    for (c, k) in spec.iter().zip(moduli) {
        power[(k / dk).round() as usize] += c.norm_sqr();
    }
    let mut out = String::from("# |k| amplitude\n");
    for (i, p) in power.iter().enumerate() {
        let _ = writeln!(out, "{} {}", num(i as f64 * dk), num(p.sqrt()));
    }
    Ok(out)
}

/// Builds the table of the given kind for the run directory `dir`.
pub fn emit_plot_data(dir: &Path, kind: &str, opts: &PlotOptions) -> Result<String> {
    match kind.parse::<PlotKind>()? {
        PlotKind::Series => series_table(dir, opts.column.as_deref()),
        kind => {
            let cfg = run_config(dir)?;
            let snap = Snapshot::read(&snapshot_path(dir, opts.snapshot.as_deref())?)?;
            if kind == PlotKind::Snapshot {
                Ok(snapshot_table(&snap, &cfg.period))
            } else {
                spectrum_table(&snap, &cfg.period, opts.field)
            }
        }
    }
}
