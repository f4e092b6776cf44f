//! Run execution and artifact writing.
//!
//! A run directory holds `metadata.json`, `series.csv` and
//! `snapshots/step_XXXXXXXX.bin`. Nothing written depends on wall-clock
//! time or thread scheduling, so equal configurations give equal bytes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::config::RunConfig;
use crate::config::ModelKind;
use crate::energy::{modified_energy_1d, modified_energy_2d, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, RealField, Spectrum};
use crate::initial::{initial_1d, initial_2d, InitialData};
use crate::integrator::{integrate, Evolution};
use crate::model1d::{hamiltonian, Boussinesq1d, State1D, Whitham};
use crate::model2d::{curl_norm, hamiltonian_2d, relative_l2, velocity_norm, Boussinesq2d, State2D};
use crate::monitors::{energy_inequality_monitor, existence_time, noncavitation_monitor, ExistenceEstimate};
use crate::ops::{lp_norm, sobolev_norm, Lp};
use crate::snapshot::Snapshot;
use crate::symbols::eval_k;

/// Sobolev norms above this count as blow-up.
pub const BLOWUP_NORM: f64 = 1e6;
pub const MASS_TOL: f64 = 1e-8;
pub const HAMILTONIAN_TOL: f64 = 1e-6;
pub const CURL_TOL: f64 = 1e-8;
pub const PLANE_WAVE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub monitor: String,
    pub status: Status,
    pub detail: String,
}

fn verdict(monitor: &str, pass: bool, detail: String) -> Verdict {
    Verdict {
        monitor: monitor.into(),
        status: if pass { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn skipped(monitor: &str, detail: &str) -> Verdict {
    Verdict {
        monitor: monitor.into(),
        status: Status::Skipped,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Empirical {
    pub energy_sup_ratio: Option<f64>,
    pub naive_sup_ratio: Option<f64>,
    pub max_relative_curl: Option<f64>,
    pub mass_drift: Option<f64>,
    pub momentum_drift: Option<f64>,
    pub hamiltonian_drift: Option<f64>,
    pub min_depth: Option<f64>,
    pub h0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// `completed`, `blowup at t=...` or `cavitation at t=...`.
    pub status: String,
    pub blowup_time: Option<f64>,
    pub final_t: f64,
    pub steps: usize,
    pub verdicts: Vec<Verdict>,
    pub existence: Option<ExistenceEstimate>,
    pub empirical: Empirical,
    pub plane_wave_error: Option<f64>,
}

impl RunSummary {
    /// The run completed and no enabled monitor failed.
    pub fn all_pass(&self) -> bool {
        self.status == "completed" && self.verdicts.iter().all(|v| v.status != Status::Fail)
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    program: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    config_text: String,
    columns: &'a [&'static str],
    snapshots: Vec<String>,
    #[serde(flatten)]
    summary: &'a RunSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub metadata: PathBuf,
    pub series: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub summary: RunSummary,
}

enum Sim {
    B1(Boussinesq1d),
    B2(Boussinesq2d),
    W(Whitham),
}

impl Sim {
    fn evolution(&self) -> &dyn Evolution {
        match self {
            Sim::B1(m) => m,
            Sim::B2(m) => m,
            Sim::W(m) => m,
        }
    }
}

pub fn columns(model: ModelKind) -> &'static [&'static str] {
    match model {
        ModelKind::Boussinesq1d => &[
            "t", "hs_eta", "hs12_u", "E_s", "cubic", "lower", "upper", "min_depth", "ratio", "naive", "mass",
            "momentum", "hamiltonian",
        ],
        ModelKind::Boussinesq2d => &[
            "t", "hs_eta", "hs12_u", "E_s", "cubic", "lower", "upper", "min_depth", "ratio", "naive",
            "curl_norm", "mass", "momentum1", "momentum2", "hamiltonian",
        ],
        ModelKind::Whitham1d => &["t", "hs_u", "mass", "l2_energy"],
    }
}

fn energy_columns(r: &EnergyReport) -> [f64; 10] {
    [
        r.t, r.hs_eta, r.hs12_u, r.e_s, r.cubic, r.lower, r.upper, r.min_depth, 0.0, r.naive(),
    ]
}

/// `1/2 int eta |u|^2`, removed from the Hamiltonian of linearized runs.
fn cubic_hamiltonian(eta: &RealField, u: &[&RealField]) -> f64 {
    let dv = eta.grid.spec().cell_volume();
    0.5 * (0..eta.values.len())
        .map(|i| eta.values[i] * u.iter().map(|f| f.values[i] * f.values[i]).sum::<f64>())
        .sum::<f64>()
        * dv
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    grid: Arc<Grid>,
    rows: Vec<Vec<f64>>,
    reports: Vec<EnergyReport>,
    snapshots: Vec<PathBuf>,
    snap_dir: PathBuf,
    floor: Option<f64>,
    max_curl: f64,
}

impl Recorder<'_> {
    fn fields(&self, v: &[Spectrum]) -> Vec<RealField> {
        v.iter().map(|s| RealField::from_spectrum(&self.grid, s)).collect()
    }

    fn check_norms(&self, t: f64, norms: &[f64]) -> Result<()> {
        if norms.iter().any(|x| !x.is_finite() || *x > BLOWUP_NORM) {
            return Err(Error::NumericalBlowup { t });
        }
        Ok(())
    }

    fn record(&mut self, step: usize, t: f64, v: &[Spectrum]) -> Result<()> {
        let f = self.fields(v);
        let s = self.cfg.diagnostics.s;
        let nonlinear = self.cfg.integrator.nonlinear;
        let beta = self.cfg.beta;
        let (row, min_depth) = match self.cfg.model {
            ModelKind::Boussinesq1d => {
                let st = State1D::new(f[0].clone(), f[1].clone(), t)?;
                let r = modified_energy_1d(&st, s).map_err(|e| match e {
                    Error::NumericalBlowup { .. } => Error::NumericalBlowup { t },
                    e => e,
                })?;
                self.check_norms(t, &[r.hs_eta, r.hs12_u])?;
                let mut h = hamiltonian(&st, beta);
                if !nonlinear {
                    h -= cubic_hamiltonian(&st.eta, &[&st.u]);
                }
                let mut row = energy_columns(&r).to_vec();
                row.extend([st.eta.integral(), st.u.integral(), h]);
                self.reports.push(r);
                (row, Some(st.min_depth()))
            }
            ModelKind::Boussinesq2d => {
                let st = State2D::new(f[0].clone(), f[1].clone(), f[2].clone(), t)?;
                let r = modified_energy_2d(&st, s).map_err(|e| match e {
                    Error::NumericalBlowup { .. } => Error::NumericalBlowup { t },
                    e => e,
                })?;
                self.check_norms(t, &[r.hs_eta, r.hs12_u])?;
                let curl = curl_norm(&st.u1, &st.u2);
                let scale = velocity_norm(&st.u1, &st.u2, 1.0);
                if scale > 0.0 {
                    self.max_curl = self.max_curl.max(curl / scale);
                }
                let mut h = hamiltonian_2d(&st, beta);
                if !nonlinear {
                    h -= cubic_hamiltonian(&st.eta, &[&st.u1, &st.u2]);
                }
                let mut row = energy_columns(&r).to_vec();
                row.extend([curl, st.eta.integral(), st.u1.integral(), st.u2.integral(), h]);
                self.reports.push(r);
                (row, Some(st.min_depth()))
            }
            ModelKind::Whitham1d => {
                let u = &f[0];
                let hs = sobolev_norm(u, s);
                self.check_norms(t, &[hs])?;
                let l2 = 0.5 * lp_norm(u, Lp::Two).powi(2);
                (vec![t, hs, u.integral(), l2], None)
            }
        };
        self.rows.push(row);
        let spec = self.grid.spec();
        let snap = Snapshot {
            dim: spec.dim as u32,
            n: [spec.n[0] as u32, *spec.n.get(1).unwrap_or(&1) as u32],
            t,
            fields: f.into_iter().map(|x| x.values).collect(),
        };
        let path = self.snap_dir.join(format!("step_{step:08}.bin"));
        snap.write(&path)?;
        self.snapshots.push(path);
        if let (Some(floor), Some(depth)) = (self.floor, min_depth) {
            if !(depth >= floor) {
                return Err(Error::Cavitation {
                    t,
                    min_depth: depth,
                    floor,
                });
            }
        }
        Ok(())
    }
}

fn plane_wave_exact(grid: &Arc<Grid>, mode: usize, a: f64, beta: f64, t: f64) -> (RealField, RealField) {
    let k = 2.0 * PI * mode as f64 / grid.spec().period[0];
    let kk = eval_k(k, beta);
    let omega = k * kk.sqrt();
    let c = a / kk.sqrt();
    (
        RealField::from_fn(grid, |x| a * (k * x[0] - omega * t).cos()),
        RealField::from_fn(grid, |x| c * (k * x[0] - omega * t).cos()),
    )
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

fn drift(values: impl Iterator<Item = f64>, q0: f64, scale: f64) -> f64 {
    let den = q0.abs().max(scale);
    values
        .map(|q| {
            let d = (q - q0).abs();
            if d == 0.0 {
                0.0
            } else {
                d / den
            }
        })
        .fold(0.0, f64::max)
}

/// `h0` (configured, else `min(min(1 + eta0), 0.99)` for non-cavitating
/// data) and the existence times of Boussinesq initial data.
fn existence_of(cfg: &RunConfig, fields0: &[RealField]) -> Result<(Option<f64>, Option<ExistenceEstimate>)> {
    if cfg.model == ModelKind::Whitham1d {
        return Ok((None, None));
    }
    let d = &cfg.diagnostics;
    let min_depth0 = 1.0 + fields0[0].min();
    let h0 = d.h0.or_else(|| (min_depth0 > 0.0).then(|| min_depth0.min(0.99)));
    let Some(h) = h0 else {
        return Ok((None, None));
    };
    let eta_norm = sobolev_norm(&fields0[0], d.s);
    let u_norm = fields0[1..]
        .iter()
        .map(|f| sobolev_norm(f, d.s + 0.5).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((h0, Some(existence_time(eta_norm, u_norm, h, d.c1, d.c2)?)))
}

/// Existence times of the configured initial data; `None` for Whitham runs
/// and for data that cavitate.
pub fn existence_estimate(cfg: &RunConfig) -> Result<Option<ExistenceEstimate>> {
    let grid = Grid::new(GridSpec::new(&cfg.n, &cfg.period)?);
    let fields = match cfg.model {
        ModelKind::Boussinesq1d => {
            let st = initial_1d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
            vec![st.eta, st.u]
        }
        ModelKind::Boussinesq2d => {
            let st = initial_2d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
            vec![st.eta, st.u1, st.u2]
        }
        ModelKind::Whitham1d => return Ok(None),
    };
    Ok(existence_of(cfg, &fields)?.1)
}

/// Executes one configured run and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let grid = Grid::new(GridSpec::new(&cfg.n, &cfg.period)?);
    let ic = &cfg.integrator;
    let (sim, v0, fields0) = match cfg.model {
        ModelKind::Boussinesq1d => {
            let st = initial_1d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
            let f = vec![st.eta.clone(), st.u.clone()];
            (Sim::B1(Boussinesq1d::for_config(&grid, cfg.beta, ic)?), st.to_spectra(), f)
        }
        ModelKind::Boussinesq2d => {
            let st = initial_2d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
            let f = vec![st.eta.clone(), st.u1.clone(), st.u2.clone()];
            (Sim::B2(Boussinesq2d::for_config(&grid, cfg.beta, ic)?), st.to_spectra(), f)
        }
        ModelKind::Whitham1d => {
            let st = initial_1d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
            (Sim::W(Whitham::for_config(&grid, cfg.beta, ic)?), vec![st.u.spectrum()], vec![st.u])
        }
    };
    let boussinesq = cfg.model != ModelKind::Whitham1d;
    let d = &cfg.diagnostics;

    let min_depth0 = if boussinesq { 1.0 + fields0[0].min() } else { f64::NAN };
    let (h0, existence) = existence_of(cfg, &fields0)?;

    fs::create_dir_all(&cfg.output_dir)?;
    let snap_dir = cfg.output_dir.join("snapshots");
    if snap_dir.exists() {
        fs::remove_dir_all(&snap_dir)?;
    }
    fs::create_dir_all(&snap_dir)?;
    let mut rec = Recorder {
        cfg,
        grid: Arc::clone(&grid),
        rows: Vec::new(),
        reports: Vec::new(),
        snapshots: Vec::new(),
        snap_dir,
        floor: (boussinesq && d.enforce_noncavitation).then(|| 0.5 * h0.unwrap_or(0.0)),
        max_curl: 0.0,
    };
    let mut v = v0;
    let mut last_step = 0;
    let outcome = integrate(sim.evolution(), &mut v, 0.0, ic, |step, t, v| {
        last_step = step;
        rec.record(step, t, v)
    });
    let (status, blowup_time, final_t) = match outcome {
        Ok(t) => ("completed".to_string(), None, t),
        Err(Error::NumericalBlowup { t }) => (format!("blowup at t={t}"), Some(t), rec.rows.last().map_or(0.0, |r| r[0])),
        Err(Error::Cavitation { t, .. }) => (format!("cavitation at t={t}"), None, t),
        Err(e) => return Err(e),
    };

    let header = columns(cfg.model);
    let mut verdicts = Vec::new();
    let mut emp = Empirical {
        h0,
        ..Default::default()
    };
    let m = d.monitors;

    if boussinesq {
        let t: Vec<f64> = rec.reports.iter().map(|r| r.t).collect();
        let e: Vec<f64> = rec.reports.iter().map(|r| r.e_s).collect();
        let naive: Vec<f64> = rec.reports.iter().map(|r| r.naive()).collect();
        match (energy_inequality_monitor(&t, &e), energy_inequality_monitor(&t, &naive)) {
            (Ok(rep), Ok(nrep)) => {
                for (row, r) in rec.rows.iter_mut().zip(&rep.ratios) {
                    row[8] = *r;
                }
                emp.energy_sup_ratio = Some(rep.sup_ratio);
                emp.naive_sup_ratio = Some(nrep.sup_ratio);
                if m.energy {
                    verdicts.push(verdict(
                        "energy",
                        rep.sup_ratio.is_finite(),
                        format!(
                            "sup |dE/dt|/(E+E^2) = {:e} at t={}; unmodified energy {:e}",
                            rep.sup_ratio, rep.argmax_t, nrep.sup_ratio
                        ),
                    ));
                }
            }
            _ => {
                if m.energy {
                    verdicts.push(skipped("energy", "fewer than 3 recorded samples"));
                }
            }
        }
        if m.sandwich {
            let bad = rec.reports.iter().filter(|r| !r.sandwich_holds(1e-12)).count();
            verdicts.push(verdict(
                "sandwich",
                bad == 0,
                format!("{bad} of {} samples outside the coercivity bounds", rec.reports.len()),
            ));
        }
        let depths: Vec<(f64, f64)> = rec.reports.iter().map(|r| (r.t, r.min_depth)).collect();
        emp.min_depth = depths.iter().map(|p| p.1).reduce(f64::min);
        if m.noncavitation {
            match (&existence, h0) {
                (Some(est), Some(h0)) => {
                    let nv = noncavitation_monitor(&depths, h0, est.t2);
                    verdicts.push(verdict(
                        "noncavitation",
                        nv.holds,
                        match nv.first_violation {
                            None => format!(
                                "min(1+eta) = {} >= h0/2 = {} on samples up to t={} (T2 = {:e})",
                                nv.min_depth, nv.floor, nv.checked_until, est.t2
                            ),
                            Some(t) => format!("min(1+eta) fell below h0/2 = {} at t={t}", nv.floor),
                        },
                    ));
                }
                _ => verdicts.push(verdict(
                    "noncavitation",
                    false,
                    format!("initial data cavitate: min(1+eta0) = {min_depth0}"),
                )),
            }
        }
    }

    let scale: f64 = fields0.iter().map(|f| lp_norm(f, Lp::One)).sum();
    let col = |name: &str| header.iter().position(|c| *c == name).expect("known column");
    let rows = &rec.rows;
    let column = |name: &str| {
        let c = col(name);
        rows.iter().map(move |r| r[c])
    };
    if let Some(first) = rec.rows.first().cloned() {
        let mass = drift(column("mass"), first[col("mass")], scale);
        emp.mass_drift = Some(mass);
        let momentum = match cfg.model {
            ModelKind::Boussinesq1d => Some(drift(column("momentum"), first[col("momentum")], scale)),
            ModelKind::Boussinesq2d => Some(
                drift(column("momentum1"), first[col("momentum1")], scale)
                    .max(drift(column("momentum2"), first[col("momentum2")], scale)),
            ),
            ModelKind::Whitham1d => None,
        };
        emp.momentum_drift = momentum;
        let ham = boussinesq.then(|| drift(column("hamiltonian"), first[col("hamiltonian")], 0.0));
        emp.hamiltonian_drift = ham;
        if m.conservation {
            let pass = mass <= MASS_TOL
                && momentum.is_none_or(|p| p <= MASS_TOL)
                && ham.is_none_or(|h| h <= HAMILTONIAN_TOL);
            verdicts.push(verdict(
                "conservation",
                pass,
                format!("relative drift: mass {mass:e}, momentum {momentum:?}, hamiltonian {ham:?}"),
            ));
        }
    }
    if cfg.model == ModelKind::Boussinesq2d {
        emp.max_relative_curl = Some(rec.max_curl);
        if m.curl {
            verdicts.push(verdict(
                "curl",
                rec.max_curl <= CURL_TOL,
                format!("max |curl u| / |u|_H1 = {:e}", rec.max_curl),
            ));
        }
    }

    let mut plane_wave_error = None;
    if let (InitialData::PlaneWave { mode, amplitude }, true, false) = (&cfg.initial, boussinesq, ic.nonlinear) {
        let (eta, u) = plane_wave_exact(&grid, *mode, *amplitude, cfg.beta, final_t);
        let fin: Vec<RealField> = v.iter().map(|s| RealField::from_spectrum(&grid, s)).collect();
        let err = relative_l2(&[&fin[0], &fin[1]], &[&eta, &u]);
        plane_wave_error = Some(err);
        if m.plane_wave {
            verdicts.push(verdict(
                "plane-wave",
                err <= PLANE_WAVE_TOL,
                format!("relative L2 error against the exact wave at t={final_t}: {err:e}"),
            ));
        }
    }

    let summary = RunSummary {
        status,
        blowup_time,
        final_t,
        steps: last_step,
        verdicts,
        existence,
        empirical: emp,
        plane_wave_error,
    };
    let series = cfg.output_dir.join("series.csv");
    write_csv(&series, header, &rec.rows)?;
    let metadata = cfg.output_dir.join("metadata.json");
    let meta = Metadata {
        program: "fdbouss",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        config_text: cfg.to_text(),
        columns: header,
        snapshots: rec
            .snapshots
            .iter()
            .map(|p| format!("snapshots/{}", p.file_name().expect("file").to_string_lossy()))
            .collect(),
        summary: &summary,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&metadata, text)?;
    Ok(Artifacts {
        dir: cfg.output_dir.clone(),
        metadata,
        series,
        snapshots: rec.snapshots,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub model: String,
    pub n: usize,
    pub beta: f64,
    pub family: String,
    pub output_dir: String,
    pub status: String,
    pub all_pass: bool,
    pub t_star: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub final_t: Option<f64>,
}

/// Runs every configuration with at most `parallelism` concurrent runs.
/// Rows follow the input order; a failing run fills its row with the error.
pub fn sweep(configs: &[RunConfig], parallelism: usize) -> Result<Vec<SweepRow>> {
    let mut errors = Vec::new();
    if configs.is_empty() {
        errors.push("sweep: at least one configuration is required".to_string());
    }
    if parallelism == 0 {
        errors.push("sweep: parallelism must be at least 1".to_string());
    }
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Domain(e.to_string()))?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, cfg)| {
                let mut row = SweepRow {
                    index,
                    model: cfg.model.as_str().into(),
                    n: cfg.n[0],
                    beta: cfg.beta,
                    family: cfg.initial.name().into(),
                    output_dir: cfg.output_dir.display().to_string(),
                    status: String::new(),
                    all_pass: false,
                    t_star: None,
                    energy_ratio: None,
                    final_t: None,
                };
                match run(cfg) {
                    Ok(a) => {
                        row.all_pass = a.summary.all_pass();
                        row.status = a.summary.status.clone();
                        row.t_star = a.summary.blowup_time;
                        row.energy_ratio = a.summary.empirical.energy_sup_ratio;
                        row.final_t = Some(a.summary.final_t);
                    }
                    Err(e) => row.status = format!("error: {}", e.to_string().replace('\n', " ")),
                }
                row
            })
            .collect()
    });
    Ok(rows)
}

/// Writes `summary.csv` and `summary.json` into `dir`.
pub fn write_sweep_summary(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.16e}"));
    let mut s = String::from("index,model,n,beta,family,status,all_pass,t_star,energy_ratio,final_t,output_dir\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:?},{},\"{}\",{},{},{},{},{}",
            r.index,
            r.model,
            r.n,
            r.beta,
            r.family,
            r.status.replace('"', "'"),
            r.all_pass,
            opt(r.t_star),
            opt(r.energy_ratio),
            opt(r.final_t),
            r.output_dir
        );
    }
    fs::write(dir.join("summary.csv"), s)?;
    let mut j = serde_json::to_string_pretty(rows)?;
    j.push('\n');
    fs::write(dir.join("summary.json"), j)?;
    Ok(())
}
