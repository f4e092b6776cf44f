//! Run configuration in a flat `key = value` format with dotted keys.
//!
//! ```text
//! # comments start with '#'
//! model = boussinesq-1d
//! grid.n = 256
//! grid.lx = 6.283185307179586
//! physics.beta = 1
//! initial.family = gaussian
//! initial.amplitude = 0.1
//! integrator.dt = 0.001
//! ```
//!
//! Validation reports every violated precondition at once.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::initial::InitialData;
use crate::integrator::{IntegratorConfig, Scheme, RK4_STABILITY_LIMIT};
use crate::ops::Dealias;
use crate::symbols::eval_k;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Boussinesq1d,
    Boussinesq2d,
    Whitham1d,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Boussinesq1d => "boussinesq-1d",
            ModelKind::Boussinesq2d => "boussinesq-2d",
            ModelKind::Whitham1d => "whitham-1d",
        }
    }

    pub fn dim(self) -> usize {
        if self == ModelKind::Boussinesq2d {
            2
        } else {
            1
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "boussinesq-1d" => Ok(ModelKind::Boussinesq1d),
            "boussinesq-2d" => Ok(ModelKind::Boussinesq2d),
            "whitham-1d" => Ok(ModelKind::Whitham1d),
            _ => Err(format!("unknown model '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monitors {
    pub energy: bool,
    pub sandwich: bool,
    pub noncavitation: bool,
    pub conservation: bool,
    pub curl: bool,
    pub plane_wave: bool,
}

impl Monitors {
    pub const NAMES: [&'static str; 6] = ["energy", "sandwich", "noncavitation", "conservation", "curl", "plane-wave"];

    pub fn all() -> Self {
        Self {
            energy: true,
            sandwich: true,
            noncavitation: true,
            conservation: true,
            curl: true,
            plane_wave: true,
        }
    }

    pub fn none() -> Self {
        Self {
            energy: false,
            sandwich: false,
            noncavitation: false,
            conservation: false,
            curl: false,
            plane_wave: false,
        }
    }

    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "all" => return Ok(Self::all()),
            "none" | "" => return Ok(Self::none()),
            _ => {}
        }
        let mut m = Self::none();
        for name in s.split(',').map(str::trim) {
            match name {
                "energy" => m.energy = true,
                "sandwich" => m.sandwich = true,
                "noncavitation" => m.noncavitation = true,
                "conservation" => m.conservation = true,
                "curl" => m.curl = true,
                "plane-wave" => m.plane_wave = true,
                _ => return Err(format!("unknown monitor '{name}'")),
            }
        }
        Ok(m)
    }

    fn to_text(self) -> String {
        let on = [
            self.energy,
            self.sandwich,
            self.noncavitation,
            self.conservation,
            self.curl,
            self.plane_wave,
        ];
        if on.iter().all(|&b| b) {
            return "all".into();
        }
        if on.iter().all(|&b| !b) {
            return "none".into();
        }
        Self::NAMES
            .iter()
            .zip(on)
            .filter(|(_, b)| *b)
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub s: f64,
    pub output_stride: usize,
    pub monitors: Monitors,
    /// Non-cavitation floor of the data; `None` means `min(min(1 + eta0), 0.99)`.
    pub h0: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    /// Abort the run when `min(1 + eta)` drops below `h0 / 2`.
    pub enforce_noncavitation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n: Vec<usize>,
    pub period: Vec<f64>,
    pub beta: f64,
    pub initial: InitialData,
    /// Files the array family was read from, echoed in the metadata.
    pub initial_files: Vec<PathBuf>,
    pub integrator: IntegratorConfig,
    pub diagnostics: Diagnostics,
    pub output_dir: PathBuf,
    pub seed: u64,
}

const KEYS: [&str; 28] = [
    "model",
    "seed",
    "grid.n",
    "grid.lx",
    "grid.ly",
    "physics.beta",
    "initial.family",
    "initial.amplitude",
    "initial.width",
    "initial.velocity",
    "initial.mode",
    "initial.decay",
    "initial.band",
    "initial.eta_file",
    "initial.u1_file",
    "initial.u2_file",
    "integrator.scheme",
    "integrator.dt",
    "integrator.t_end",
    "integrator.dealias",
    "integrator.nonlinear",
    "diagnostics.s",
    "diagnostics.output_stride",
    "diagnostics.monitors",
    "diagnostics.h0",
    "diagnostics.c1",
    "diagnostics.c2",
    "diagnostics.enforce_noncavitation",
];

/// Parses `key = value` lines, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> std::result::Result<BTreeMap<String, String>, Vec<String>> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {}: expected key = value", no + 1));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) && k != "output.dir" {
            errors.push(format!("line {}: unknown key '{k}'", no + 1));
        } else if map.insert(k.to_string(), v.to_string()).is_some() {
            errors.push(format!("line {}: duplicate key '{k}'", no + 1));
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(errors)
    }
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn get<T: FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => default,
            Some(v) => match v.parse() {
                Ok(x) => x,
                Err(e) => {
                    self.errors.push(format!("{key}: cannot parse '{v}': {e}"));
                    default
                }
            },
        }
    }

    fn get_with<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> std::result::Result<T, String>) -> T {
        match self.map.get(key) {
            None => default,
            Some(v) => parse(v).unwrap_or_else(|e| {
                self.errors.push(format!("{key}: {e}"));
                default
            }),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }
}

fn read_array(path: &Path) -> std::result::Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|e| format!("{}: '{w}': {e}", path.display())))
        .collect()
}

impl RunConfig {
    /// Parses and validates a configuration; relative array paths resolve
    /// against the working directory.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_in(text, Path::new("."))
    }

    /// As [`RunConfig::parse`] with array paths resolved against `base`.
    pub fn parse_in(text: &str, base: &Path) -> Result<Self> {
        let map = parse_pairs(text).map_err(Error::Config)?;
        Self::from_pairs(&map, base)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_in(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_pairs(map: &BTreeMap<String, String>, base: &Path) -> Result<Self> {
        let mut r = Reader {
            map,
            errors: Vec::new(),
        };
        let model = r.get_with("model", ModelKind::Boussinesq1d, |s| s.parse());
        let dim = model.dim();
        let n1 = r.get("grid.n", 256usize);
        let lx = r.get("grid.lx", 2.0 * PI);
        let ly = r.get("grid.ly", lx);
        if dim == 1 && r.has("grid.ly") {
            r.errors.push("grid.ly: only meaningful for boussinesq-2d".into());
        }
        let (n, period) = if dim == 1 {
            (vec![n1], vec![lx])
        } else {
            (vec![n1, n1], vec![lx, ly])
        };
        let beta = r.get("physics.beta", 1.0);
        let seed = r.get("seed", 0u64);

        let family = r.get("initial.family", "gaussian".to_string());
        let mut initial_files = Vec::new();
        let initial = match family.as_str() {
            "rest" => InitialData::Rest,
            "gaussian" => InitialData::Gaussian {
                amplitude: r.get("initial.amplitude", 0.1),
                width: r.get("initial.width", lx / 16.0),
                velocity: r.get("initial.velocity", 0.0),
            },
            "plane-wave" => InitialData::PlaneWave {
                mode: r.get("initial.mode", 1usize),
                amplitude: r.get("initial.amplitude", 1e-3),
            },
            "random" => InitialData::Random {
                decay: r.get("initial.decay", 1.5),
                band: r.get("initial.band", n1 / 8),
                amplitude: r.get("initial.amplitude", 0.1),
                velocity: r.get("initial.velocity", 0.1),
            },
            "arrays" => {
                let mut load = |key: &str, required: bool| -> Vec<f64> {
                    match map.get(key) {
                        None => {
                            if required {
                                r.errors.push(format!("{key}: required by the arrays family"));
                            }
                            Vec::new()
                        }
                        Some(p) => {
                            let path = base.join(p);
                            initial_files.push(PathBuf::from(p));
                            read_array(&path).unwrap_or_else(|e| {
                                r.errors.push(format!("{key}: {e}"));
                                Vec::new()
                            })
                        }
                    }
                };
                let eta = load("initial.eta_file", true);
                let u1 = load("initial.u1_file", true);
                let u2 = load("initial.u2_file", dim == 2);
                InitialData::Arrays { eta, u1, u2 }
            }
            other => {
                r.errors.push(format!("initial.family: unknown family '{other}'"));
                InitialData::Rest
            }
        };

        let scheme = r.get_with("integrator.scheme", Scheme::Ifrk4, |s| match s {
            "ifrk4" => Ok(Scheme::Ifrk4),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(format!("unknown scheme '{s}'")),
        });
        let dealias = r.get_with("integrator.dealias", Dealias::TwoThirds, |s| match s {
            "two-thirds" => Ok(Dealias::TwoThirds),
            "none" => Ok(Dealias::None),
            _ => Err(format!("unknown dealiasing '{s}'")),
        });
        let output_stride = r.get("diagnostics.output_stride", 10usize);
        let integrator = IntegratorConfig {
            dt: r.get("integrator.dt", 1e-3),
            scheme,
            dealias,
            t_end: r.get("integrator.t_end", 1.0),
            output_stride,
            nonlinear: r.get("integrator.nonlinear", true),
        };
        let default_s = if dim == 2 { 3.1 } else { 2.6 };
        let h0 = map.get("diagnostics.h0").map(|_| r.get("diagnostics.h0", 0.5));
        let diagnostics = Diagnostics {
            s: r.get("diagnostics.s", default_s),
            output_stride,
            monitors: r.get_with("diagnostics.monitors", Monitors::all(), Monitors::parse),
            h0,
            c1: r.get("diagnostics.c1", 1.0),
            c2: r.get("diagnostics.c2", 10.0),
            enforce_noncavitation: r.get("diagnostics.enforce_noncavitation", false),
        };
        let output_dir = PathBuf::from(map.get("output.dir").map(String::as_str).unwrap_or("out"));
        let cfg = RunConfig {
            model,
            n,
            period,
            beta,
            initial,
            initial_files,
            integrator,
            diagnostics,
            output_dir,
            seed,
        };
        let mut errors = r.errors;
        errors.extend(cfg.violations());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Every violated precondition.
    pub fn violations(&self) -> Vec<String> {
        let mut e = Vec::new();
        let dim = self.model.dim();
        if let Err(err) = GridSpec::new(&self.n, &self.period) {
            let key = if self.n.iter().any(|&n| n < 8 || !n.is_power_of_two()) {
                "grid.n"
            } else {
                "grid.lx/grid.ly"
            };
            e.push(format!("{key}: {err}"));
        }
        let beta_ok = match self.model {
            ModelKind::Whitham1d => self.beta >= 0.0 && self.beta.is_finite(),
            _ => self.beta > 0.0 && self.beta.is_finite(),
        };
        if !beta_ok {
            e.push(format!("physics.beta: {} is outside the admissible range", self.beta));
        }
        let ic = &self.integrator;
        if !(ic.dt > 0.0 && ic.dt.is_finite()) {
            e.push(format!("integrator.dt: must be positive, got {}", ic.dt));
        }
        if !(ic.t_end > 0.0 && ic.t_end.is_finite()) {
            e.push(format!("integrator.t_end: must be positive, got {}", ic.t_end));
        }
        if self.diagnostics.output_stride == 0 {
            e.push("diagnostics.output_stride: must be at least 1".into());
        }
        if ic.scheme == Scheme::Rk4 && ic.dt > 0.0 && self.beta >= 0.0 {
            let kmax = self
                .n
                .iter()
                .zip(&self.period)
                .map(|(&n, &l)| (PI * n as f64 / l).powi(2))
                .sum::<f64>()
                .sqrt();
            let omega = kmax * eval_k(kmax, self.beta).sqrt();
            if ic.dt * omega > RK4_STABILITY_LIMIT {
                e.push(format!(
                    "integrator.dt: rk4 needs dt * omega_max <= {RK4_STABILITY_LIMIT}, got {:.4}",
                    ic.dt * omega
                ));
            }
        }
        let d = &self.diagnostics;
        let s_min = match (self.model, d.monitors.energy) {
            (ModelKind::Boussinesq2d, _) => 3.0,
            (ModelKind::Boussinesq1d, true) => 2.5,
            (ModelKind::Boussinesq1d, false) => 2.0,
            (ModelKind::Whitham1d, _) => f64::NEG_INFINITY,
        };
        if !(d.s > s_min) || !d.s.is_finite() {
            e.push(format!("diagnostics.s: must exceed {s_min} for {}, got {}", self.model.as_str(), d.s));
        }
        if let Some(h0) = d.h0 {
            if !(h0 > 0.0 && h0 < 1.0) {
                e.push(format!("diagnostics.h0: must lie in (0, 1), got {h0}"));
            }
        }
        if !(d.c1 > 0.0 && d.c1.is_finite()) {
            e.push(format!("diagnostics.c1: must be positive, got {}", d.c1));
        }
        if !(d.c2 > 0.0 && d.c2.is_finite()) {
            e.push(format!("diagnostics.c2: must be positive, got {}", d.c2));
        }
        let n_min = *self.n.iter().min().unwrap_or(&0);
        match &self.initial {
            InitialData::Gaussian { width, .. } if !(*width > 0.0) => {
                e.push(format!("initial.width: must be positive, got {width}"))
            }
            InitialData::PlaneWave { mode, .. } if *mode == 0 || 2 * mode >= self.n[0] => {
                e.push(format!("initial.mode: {mode} must lie in [1, n/2)"))
            }
            InitialData::Random { band, decay, .. } => {
                if *band == 0 || 2 * band >= n_min {
                    e.push(format!("initial.band: {band} must lie in [1, n/2)"));
                }
                if !(*decay > 0.0) {
                    e.push(format!("initial.decay: must be positive, got {decay}"));
                }
            }
            InitialData::Arrays { eta, u1, u2 } => {
                let len: usize = self.n.iter().product();
                let mut check = |name: &str, v: &Vec<f64>| {
                    if v.len() != len {
                        e.push(format!("initial.{name}_file: {} values, the grid has {len}", v.len()));
                    }
                };
                check("eta", eta);
                check("u1", u1);
                if dim == 2 {
                    check("u2", u2);
                }
            }
            _ => {}
        }
        e
    }

    /// Canonical `key = value` text; parsing it yields this configuration
    /// (array families refer to their source files).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", self.model.as_str().into());
        kv("seed", self.seed.to_string());
        kv("grid.n", self.n[0].to_string());
        kv("grid.lx", format!("{:?}", self.period[0]));
        if self.model.dim() == 2 {
            kv("grid.ly", format!("{:?}", self.period[1]));
        }
        kv("physics.beta", format!("{:?}", self.beta));
        kv("initial.family", self.initial.name().into());
        match &self.initial {
            InitialData::Rest => {}
            InitialData::Gaussian {
                amplitude,
                width,
                velocity,
            } => {
                kv("initial.amplitude", format!("{amplitude:?}"));
                kv("initial.width", format!("{width:?}"));
                kv("initial.velocity", format!("{velocity:?}"));
            }
            InitialData::PlaneWave { mode, amplitude } => {
                kv("initial.mode", mode.to_string());
                kv("initial.amplitude", format!("{amplitude:?}"));
            }
            InitialData::Random {
                decay,
                band,
                amplitude,
                velocity,
            } => {
                kv("initial.decay", format!("{decay:?}"));
                kv("initial.band", band.to_string());
                kv("initial.amplitude", format!("{amplitude:?}"));
                kv("initial.velocity", format!("{velocity:?}"));
            }
            InitialData::Arrays { .. } => {
                for (key, p) in ["initial.eta_file", "initial.u1_file", "initial.u2_file"]
                    .iter()
                    .zip(&self.initial_files)
                {
                    kv(key, p.display().to_string());
                }
            }
        }
        let ic = &self.integrator;
        kv(
            "integrator.scheme",
            match ic.scheme {
                Scheme::Ifrk4 => "ifrk4",
                Scheme::Rk4 => "rk4",
            }
            .into(),
        );
        kv("integrator.dt", format!("{:?}", ic.dt));
        kv("integrator.t_end", format!("{:?}", ic.t_end));
        kv(
            "integrator.dealias",
            match ic.dealias {
                Dealias::TwoThirds => "two-thirds",
                Dealias::None => "none",
            }
            .into(),
        );
        kv("integrator.nonlinear", ic.nonlinear.to_string());
        let d = &self.diagnostics;
        kv("diagnostics.s", format!("{:?}", d.s));
        kv("diagnostics.output_stride", d.output_stride.to_string());
        kv("diagnostics.monitors", d.monitors.to_text());
        if let Some(h0) = d.h0 {
            kv("diagnostics.h0", format!("{h0:?}"));
        }
        kv("diagnostics.c1", format!("{:?}", d.c1));
        kv("diagnostics.c2", format!("{:?}", d.c2));
        kv("diagnostics.enforce_noncavitation", d.enforce_noncavitation.to_string());
        kv("output.dir", self.output_dir.display().to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.model, ModelKind::Boussinesq1d);
        assert_eq!(cfg.n, vec![256]);
        assert_eq!(cfg.diagnostics.s, 2.6);
        assert_eq!(cfg.integrator.output_stride, 10);
    }

    #[test]
    fn every_violation_is_listed() {
        let text = "grid.n = 100\nphysics.beta = -1\nintegrator.dt = 0\ndiagnostics.s = 2\n\
                    diagnostics.h0 = 1.5\nbogus = 1\n";
        let Err(Error::Config(errs)) = RunConfig::parse(text) else {
            panic!("expected a config error");
        };
        // the unknown key is reported before value validation
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("bogus"));
        let Err(Error::Config(errs)) = RunConfig::parse(&text.replace("bogus = 1\n", "")) else {
            panic!("expected a config error");
        };
        for key in ["grid", "physics.beta", "integrator.dt", "diagnostics.s", "diagnostics.h0"] {
            assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
        }
    }

    #[test]
    fn rk4_guard_is_checked() {
        let text = "integrator.scheme = rk4\nintegrator.dt = 0.01\ngrid.n = 512\n";
        let Err(Error::Config(errs)) = RunConfig::parse(text) else {
            panic!("expected a config error");
        };
        assert!(errs[0].contains("omega_max"));
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "model = boussinesq-2d\ngrid.n = 32\ngrid.ly = 3.5\ninitial.family = random\n\
                    initial.band = 5\nseed = 4\ndiagnostics.monitors = energy,curl\n\
                    integrator.scheme = rk4\nintegrator.dt = 1e-4\n";
        let cfg = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.diagnostics.s, 3.1);
        assert!(cfg.diagnostics.monitors.curl && !cfg.diagnostics.monitors.sandwich);
    }

    #[test]
    fn malformed_lines_are_reported() {
        let Err(Error::Config(errs)) = RunConfig::parse("grid.n 12\ngrid.n = 8\ngrid.n = 16\n") else {
            panic!("expected a config error");
        };
        assert_eq!(errs.len(), 2);
    }
}
