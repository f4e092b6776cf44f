//! `fdbouss` command-line driver.
//!
//! Exit status: 0 when every enabled monitor passed, 1 when a monitor failed
//! or a run blew up, 2 for usage and configuration errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use fdbouss::config::{parse_pairs, ModelKind, RunConfig};
use fdbouss::gronwall::gronwall_experiment;
use fdbouss::initial::initial_1d;
use fdbouss::lab::{multiplier_study, refinement_study, Estimate, Family, LeibnizParams};
use fdbouss::monitors::existence_time;
use fdbouss::plot::{emit_plot_data, PlotOptions};
use fdbouss::run::{existence_estimate, run, sweep, write_sweep_summary};
use fdbouss::studies::{spatial_convergence, temporal_order};
use fdbouss::{Error, Grid};

#[derive(Parser)]
#[command(name = "fdbouss", version, about = "Full-dispersion Boussinesq simulator and energy diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its artifacts.
    Simulate {
        config: PathBuf,
        /// Override a configuration key, e.g. `--set grid.n=512`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run several configurations, optionally crossed with `--vary` lists.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// `KEY=V1,V2,...`; repeated flags form a cartesian product.
        #[arg(long, value_name = "KEY=VALUES")]
        vary: Vec<String>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Each run writes to `<output>/run_XXX`; the summary goes to `<output>`.
        #[arg(long, default_value = "sweep")]
        output: PathBuf,
    },
    /// Empirical ratios for the commutator, Leibniz and multiplier estimates.
    VerifyInequalities {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        band: usize,
        #[arg(long, default_value_t = 1.0)]
        decay: f64,
        /// Sobolev index of the multiplier study.
        #[arg(long, default_value_t = 2.6)]
        s: f64,
    },
    /// Existence times T1, T2, T0, from a configuration or from norms.
    ExistenceTime {
        #[arg(conflicts_with_all = ["eta_norm", "u_norm"])]
        config: Option<PathBuf>,
        /// `|eta0|_{H^s}`.
        #[arg(long, requires_all = ["u_norm", "h0"])]
        eta_norm: Option<f64>,
        /// `|u0|_{H^{s+1/2}}`.
        #[arg(long)]
        u_norm: Option<f64>,
        #[arg(long)]
        h0: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long, default_value_t = 10.0)]
        c2: f64,
    },
    /// Difference energy of two 1D solutions and its Gronwall bound.
    Difference {
        first: PathBuf,
        second: PathBuf,
        /// Defaults to `diagnostics.s` of the first configuration.
        #[arg(long)]
        s: Option<f64>,
    },
    /// Temporal order by dt-halving and spatial convergence against a fine grid.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 512)]
        n_ref: usize,
    },
    /// Plain-text tables from a run directory: series, snapshot or spectrum.
    EmitPlot {
        run_dir: PathBuf,
        kind: String,
        #[arg(long)]
        column: Option<String>,
        /// Step number or file name; the last snapshot by default.
        #[arg(long)]
        snapshot: Option<String>,
        #[arg(long, default_value_t = 0)]
        field: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn split_assignment(s: &str) -> anyhow::Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => bail!("expected KEY=VALUE, got `{s}`"),
    }
}

fn read_pairs(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pairs(&text).map_err(|e| Error::Config(e).into())
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn load(path: &Path, set: &[String]) -> anyhow::Result<RunConfig> {
    let mut pairs = read_pairs(path)?;
    for s in set {
        let (k, v) = split_assignment(s)?;
        pairs.insert(k, v);
    }
    Ok(RunConfig::from_pairs(&pairs, base_dir(path))?)
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn simulate(config: &Path, set: &[String], output: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let mut cfg = load(config, set)?;
    if let Some(dir) = output {
        cfg.output_dir = dir;
    }
    let art = run(&cfg)?;
    let s = &art.summary;
    println!("{} ({} steps, t = {})", s.status, s.steps, s.final_t);
    for v in &s.verdicts {
        println!("{:>13} {:?}: {}", v.monitor, v.status, v.detail);
    }
    println!("artifacts in {}", art.dir.display());
    Ok(status(s.all_pass()))
}

fn sweep_cmd(configs: &[PathBuf], vary: &[String], parallel: usize, output: &Path) -> anyhow::Result<ExitCode> {
    let mut axes = Vec::new();
    for v in vary {
        let (k, vals) = split_assignment(v)?;
        let vals: Vec<String> = vals.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
        if vals.is_empty() {
            bail!("--vary {k}: no values");
        }
        axes.push((k, vals));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, vals) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vals.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((k.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let mut cfgs = Vec::new();
    let mut errors = Vec::new();
    for path in configs {
        for combo in &combos {
            let set: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
            match load(path, &set) {
                Ok(mut cfg) => {
                    cfg.output_dir = output.join(format!("run_{:03}", cfgs.len()));
                    cfgs.push(cfg);
                }
                Err(e) => errors.push(format!("{} {}: {e:#}", path.display(), set.join(" "))),
            }
        }
    }
    if !errors.is_empty() {
        return Err(Error::Config(errors).into());
    }
    let rows = sweep(&cfgs, parallel)?;
    write_sweep_summary(output, &rows)?;
    for r in &rows {
        println!(
            "run_{:03} beta={} n={} {} t*={:?} ratio={:?}",
            r.index, r.beta, r.n, r.status, r.t_star, r.energy_ratio
        );
    }
    println!("summary in {}", output.join("summary.csv").display());
    Ok(status(rows.iter().all(|r| r.all_pass)))
}

fn verify(trials: usize, ns: &[usize], family: Family, s: f64) -> anyhow::Result<ExitCode> {
    let estimates = [
        Estimate::KatoPonce { s: 1.0 },
        Estimate::KatoPonce { s },
        Estimate::FracLeibniz {
            params: LeibnizParams::INTERIOR,
        },
        Estimate::FracLeibniz {
            params: LeibnizParams::ENDPOINT,
        },
        Estimate::DmpCommutator { s: s - 1.0 },
    ];
    let mut reports = Vec::new();
    for est in &estimates {
        let r = refinement_study(est, &family, trials, ns)?;
        eprintln!("{}: max ratio {:.4e}, spread {:.3}", r.estimate, r.max_ratio, r.spread());
        reports.push(r);
    }
    let m = multiplier_study(s, &family, trials, ns)?;
    eprintln!(
        "multipliers: r_M {:.4e}, r_Minf {:.4e}, r_BR {:.6}, violations {}",
        m.max_r_m, m.max_r_minf, m.max_r_br, m.violations
    );
    let pass = m.violations == 0;
    print_json(&json!({ "family": family, "estimates": reports, "multipliers": m }))?;
    Ok(status(pass))
}

fn one_d(path: &Path) -> anyhow::Result<RunConfig> {
    let cfg = load(path, &[])?;
    if cfg.model != ModelKind::Boussinesq1d {
        bail!("{}: this command needs model = boussinesq-1d", path.display());
    }
    Ok(cfg)
}

fn difference(first: &Path, second: &Path, s: Option<f64>) -> anyhow::Result<ExitCode> {
    let (a, b) = (one_d(first)?, one_d(second)?);
    if a.n != b.n || a.period != b.period {
        return Err(Error::GridMismatch.into());
    }
    let grid = Grid::line(a.n[0], a.period[0])?;
    let d1 = initial_1d(&grid, &a.initial, a.seed, a.beta)?;
    let d2 = initial_1d(&grid, &b.initial, b.seed, a.beta)?;
    let report = gronwall_experiment(&d1, &d2, &a.integrator, a.beta, s.unwrap_or(a.diagnostics.s))?;
    eprintln!(
        "E~(0) = {:e}, C^ = {:e}, rate = {:e}, bound holds: {}",
        report.e0, report.c_hat, report.rate, report.bound_holds
    );
    print_json(&json!(report))?;
    Ok(status(report.bound_holds))
}

fn convergence(path: &Path, levels: usize, ns: &[usize], n_ref: usize) -> anyhow::Result<ExitCode> {
    let cfg = one_d(path)?;
    let ic = &cfg.integrator;
    let grid = Grid::line(cfg.n[0], cfg.period[0])?;
    let data = initial_1d(&grid, &cfg.initial, cfg.seed, cfg.beta)?;
    let order = temporal_order(&data, cfg.beta, ic.scheme, ic.dt, ic.t_end, levels)?;
    let spatial = spatial_convergence(&cfg.initial, cfg.period[0], cfg.beta, ic, ns, n_ref)?;
    eprintln!("temporal orders {:?}", order.orders);
    print_json(&json!({ "temporal": order, "spatial": spatial }))?;
    Ok(ExitCode::SUCCESS)
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, set, output } => simulate(&config, &set, output),
        Command::Sweep {
            configs,
            vary,
            parallel,
            output,
        } => sweep_cmd(&configs, &vary, parallel, &output),
        Command::VerifyInequalities {
            trials,
            n,
            seed,
            band,
            decay,
            s,
        } => {
            let family = Family {
                band,
                decay,
                base_seed: seed,
                ..Family::default()
            };
            verify(trials, &n, family, s)
        }
        Command::ExistenceTime {
            config,
            eta_norm,
            u_norm,
            h0,
            c1,
            c2,
        } => {
            let est = match (config, eta_norm, u_norm, h0) {
                (Some(path), ..) => match existence_estimate(&load(&path, &[])?)? {
                    Some(e) => e,
                    None => bail!("no existence time: Whitham model or cavitating data"),
                },
                (None, Some(e), Some(u), Some(h)) => existence_time(e, u, h, c1, c2)?,
                _ => bail!("give a configuration file or --eta-norm, --u-norm and --h0"),
            };
            print_json(&json!(est))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Difference { first, second, s } => difference(&first, &second, s),
        Command::Convergence {
            config,
            levels,
            ns,
            n_ref,
        } => convergence(&config, levels, &ns, n_ref),
        Command::EmitPlot {
            run_dir,
            kind,
            column,
            snapshot,
            field,
            output,
        } => {
            let table = emit_plot_data(
                &run_dir,
                &kind,
                &PlotOptions {
                    column,
                    snapshot,
                    field,
                },
            )?;
            match output {
                Some(p) => fs::write(&p, table).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NumericalBlowup { .. } | Error::Cavitation { .. } | Error::Inconsistency { .. }) => {
                    ExitCode::from(1)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}
