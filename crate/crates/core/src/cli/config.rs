//! Flat `section.key = value` run configuration.
//!
//! Lines are trimmed; blank lines and lines starting with `#` are ignored.
//! Every key may appear once. Lists are comma separated; index pairs are
//! written `m:s`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::picard::{PicardConfig, WindowMode};
use crate::verify::ManufacturedCase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// amplitude * exp(-((x - center) / width)^2)
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// amplitude * cos(wavenumber x) * exp(-(x / envelope_width)^2)
    CosinePacket { amplitude: f64, wavenumber: f64, envelope_width: f64 },
    /// `x,u` snapshot on the configured grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Zero,
    /// Forcing of the manufactured solution; the initial condition is taken from it.
    Manufactured { case: ManufacturedCase, amplitude: f64 },
    /// Rows `t, f(x_0), ..., f(x_{N-1})`, interpolated linearly in t.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: Vec<f64>,
    /// (m, s) pairs for |||u|||_{m,s}^2 columns.
    pub seminorms: Vec<(u32, u32)>,
    /// (k, n) pairs for sup |x|^k |d^n u| columns.
    pub sup_pairs: Vec<(u32, u32)>,
    pub norms: bool,
    pub report: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub k: f64,
    pub gamma: f64,
    pub half_length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Absent only with manufactured forcing.
    pub ic: Option<InitialCondition>,
    pub forcing: ForcingSpec,
    pub picard: PicardConfig,
    pub output: OutputConfig,
    pub seed: u64,
    /// Use the linear solver directly when gamma = 0.
    pub fast_linear: bool,
}

const KEYS: &[&str] = &[
    "model.beta",
    "model.a",
    "model.b",
    "model.c",
    "model.d",
    "model.k",
    "model.gamma",
    "grid.L",
    "grid.N",
    "time.dt",
    "time.T",
    "ic.kind",
    "ic.amplitude",
    "ic.width",
    "ic.center",
    "ic.wavenumber",
    "ic.envelope_width",
    "ic.path",
    "forcing.kind",
    "forcing.case",
    "forcing.amplitude",
    "forcing.path",
    "picard.tol",
    "picard.max_iter",
    "picard.window_mode",
    "picard.window",
    "picard.k_hat",
    "picard.a_hat",
    "picard.div_factor",
    "output.dir",
    "output.snapshots",
    "output.seminorms",
    "output.sup_pairs",
    "output.norms",
    "output.report",
    "run.seed",
    "run.decay_tol",
    "run.fast_linear",
    "run.ceiling",
];

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{s}`") })?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
            if value.is_empty() {
                return Err(ConfigError::Value { line, key: key.into(), msg: "empty value".into() });
            }
            if map.insert(*known, (line, value.to_string())).is_some() {
                return Err(ConfigError::Duplicate { line, key: key.into() });
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &'static str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn value<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::Value { line, key: key.into(), msg: format!("cannot parse `{v}`") }),
        }
    }

    fn or<T: std::str::FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError> {
        Ok(self.value(key)?.unwrap_or(default))
    }

    fn required<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError> {
        self.value(key)?.ok_or(ConfigError::Missing(key))
    }

    fn bad(&self, key: &'static str, msg: impl Into<String>) -> ConfigError {
        let line = self.raw(key).map_or(0, |(l, _)| l);
        ConfigError::Value { line, key: key.into(), msg: msg.into() }
    }

    fn list<T>(&self, key: &'static str, item: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>, ConfigError> {
        let Some((_, v)) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|s| item(s.trim()).ok_or_else(|| self.bad(key, format!("bad list entry `{}`", s.trim()))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn pairs(&self, key: &'static str) -> Result<Option<Vec<(u32, u32)>>, ConfigError> {
        self.list(key, |s| {
            let (a, b) = s.split_once(':')?;
            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
        })
    }

    /// Keys of a section that are only meaningful for some `kind`s.
    fn reject_unused(&self, allowed: &[&str], section: &str, kind: &str) -> Result<(), ConfigError> {
        for (key, (line, _)) in &self.map {
            if key.starts_with(section) && !key.ends_with(".kind") && !allowed.contains(key) {
                return Err(ConfigError::Value {
                    line: *line,
                    key: key.to_string(),
                    msg: format!("not used by kind `{kind}`"),
                });
            }
        }
        Ok(())
    }
}

fn positive(e: &Entries, key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(e.bad(key, format!("must be positive, got {v}")))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = Entries::parse(text)?;
    let beta: f64 = e.required("model.beta")?;
    let a: f64 = e.required("model.a")?;
    let half_length: f64 = e.required("grid.L")?;
    let n_points: usize = e.required("grid.N")?;
    let dt: f64 = e.required("time.dt")?;
    let t_final: f64 = e.required("time.T")?;

    let forcing = match e.raw("forcing.kind").map(|(_, v)| v) {
        None | Some("zero") => {
            e.reject_unused(&[], "forcing.", "zero")?;
            ForcingSpec::Zero
        }
        Some("manufactured") => {
            e.reject_unused(&["forcing.case", "forcing.amplitude"], "forcing.", "manufactured")?;
            let case = match e.raw("forcing.case").map(|(_, v)| v) {
                None | Some("nonlinear") => ManufacturedCase::Nonlinear,
                Some("linear") => ManufacturedCase::Linear,
                Some(other) => return Err(e.bad("forcing.case", format!("expected linear or nonlinear, got `{other}`"))),
            };
            ForcingSpec::Manufactured { case, amplitude: e.or("forcing.amplitude", 1.0)? }
        }
        Some("file") => {
            e.reject_unused(&["forcing.path"], "forcing.", "file")?;
            ForcingSpec::File { path: e.required::<String>("forcing.path")?.into() }
        }
        Some(other) => return Err(e.bad("forcing.kind", format!("expected zero, manufactured or file, got `{other}`"))),
    };

    let ic = match e.raw("ic.kind").map(|(_, v)| v) {
        None if matches!(forcing, ForcingSpec::Manufactured { .. }) => {
            e.reject_unused(&[], "ic.", "manufactured")?;
            None
        }
        None => return Err(ConfigError::Missing("ic.kind")),
        Some(_) if matches!(forcing, ForcingSpec::Manufactured { .. }) => {
            return Err(e.bad("ic.kind", "manufactured forcing fixes the initial condition"));
        }
        Some("gaussian") => {
            e.reject_unused(&["ic.amplitude", "ic.width", "ic.center"], "ic.", "gaussian")?;
            Some(InitialCondition::Gaussian {
                amplitude: e.or("ic.amplitude", 1.0)?,
                width: positive(&e, "ic.width", e.or("ic.width", 1.0)?)?,
                center: e.or("ic.center", 0.0)?,
            })
        }
        Some("cosine_packet") => {
            e.reject_unused(&["ic.amplitude", "ic.wavenumber", "ic.envelope_width"], "ic.", "cosine_packet")?;
            Some(InitialCondition::CosinePacket {
                amplitude: e.or("ic.amplitude", 1.0)?,
                wavenumber: e.or("ic.wavenumber", 1.0)?,
                envelope_width: positive(&e, "ic.envelope_width", e.or("ic.envelope_width", 1.0)?)?,
            })
        }
        Some("file") => {
            e.reject_unused(&["ic.path"], "ic.", "file")?;
            Some(InitialCondition::File { path: e.required::<String>("ic.path")?.into() })
        }
        Some(other) => {
            return Err(e.bad("ic.kind", format!("expected gaussian, cosine_packet or file, got `{other}`")))
        }
    };

    let window_mode = match e.raw("picard.window_mode").map(|(_, v)| v) {
        None | Some("single") => WindowMode::Single,
        Some("auto") => WindowMode::Auto,
        Some("fixed") => WindowMode::Fixed(e.required("picard.window")?),
        Some(other) => return Err(e.bad("picard.window_mode", format!("expected single, auto or fixed, got `{other}`"))),
    };
    if !matches!(window_mode, WindowMode::Fixed(_)) && e.raw("picard.window").is_some() {
        return Err(e.bad("picard.window", "only used with window_mode = fixed"));
    }
    let defaults = PicardConfig::default();
    let picard = PicardConfig {
        tol: e.or("picard.tol", defaults.tol)?,
        max_iter: e.or("picard.max_iter", defaults.max_iter)?,
        window_mode,
        k_hat: e.value("picard.k_hat")?,
        a_hat: e.value("picard.a_hat")?,
        div_factor: e.or("picard.div_factor", defaults.div_factor)?,
        decay_tol: e.or("run.decay_tol", defaults.decay_tol)?,
        ceiling: e.or("run.ceiling", defaults.ceiling)?,
    };

    let output = OutputConfig {
        dir: e.or::<String>("output.dir", "out".into())?.into(),
        snapshots: e.list("output.snapshots", |s| s.parse().ok())?.unwrap_or_else(|| vec![t_final]),
        seminorms: e.pairs("output.seminorms")?.unwrap_or_else(|| (0..4).map(|i| (i, i)).collect()),
        sup_pairs: e.pairs("output.sup_pairs")?.unwrap_or_else(|| vec![(0, 0), (1, 1)]),
        norms: e.or("output.norms", true)?,
        report: e.or("output.report", true)?,
    };

    let cfg = RunConfig {
        beta,
        a,
        b: e.or("model.b", 0.0)?,
        c: e.or("model.c", 0.0)?,
        d: e.or("model.d", 0.0)?,
        k: e.or("model.k", 0.0)?,
        gamma: e.or("model.gamma", 0.0)?,
        half_length,
        n_points,
        dt,
        t_final,
        ic,
        forcing,
        picard,
        output,
        seed: e.or("run.seed", 0)?,
        fast_linear: e.or("run.fast_linear", true)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return inv(format!("model.beta = {} violates 0 < beta < 1", self.beta));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return inv(format!("model.a = {} violates a > 0", self.a));
        }
        for (name, v) in [("b", self.b), ("c", self.c), ("d", self.d), ("k", self.k), ("gamma", self.gamma)] {
            if !v.is_finite() {
                return inv(format!("model.{name} = {v} is not finite"));
            }
        }
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return inv(format!("grid.L = {} violates L > 0", self.half_length));
        }
        if self.n_points < 8 || !self.n_points.is_multiple_of(2) {
            return inv(format!("grid.N = {} violates N even and N >= 8", self.n_points));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return inv(format!("time.dt = {} violates dt > 0", self.dt));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return inv(format!("time.T = {} violates T >= dt = {}", self.t_final, self.dt));
        }
        if let Some(&t) = self.output.snapshots.iter().find(|&&t| !(0.0..=self.t_final * (1.0 + 1e-12)).contains(&t)) {
            return inv(format!("output.snapshots entry {t} outside [0, T]"));
        }
        if let ForcingSpec::Manufactured { case: ManufacturedCase::Linear, .. } = self.forcing {
            if self.gamma != 0.0 {
                return inv("forcing.case = linear requires model.gamma = 0".into());
            }
        }
        self.picard.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The resolved configuration with every default spelled out.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let f = |x: f64| format!("{x:?}");
        kv("model.beta", f(self.beta));
        kv("model.a", f(self.a));
        kv("model.b", f(self.b));
        kv("model.c", f(self.c));
        kv("model.d", f(self.d));
        kv("model.k", f(self.k));
        kv("model.gamma", f(self.gamma));
        kv("grid.L", f(self.half_length));
        kv("grid.N", self.n_points.to_string());
        kv("time.dt", f(self.dt));
        kv("time.T", f(self.t_final));
        match &self.ic {
            None => {}
            Some(InitialCondition::Gaussian { amplitude, width, center }) => {
                kv("ic.kind", "gaussian".into());
                kv("ic.amplitude", f(*amplitude));
                kv("ic.width", f(*width));
                kv("ic.center", f(*center));
            }
            Some(InitialCondition::CosinePacket { amplitude, wavenumber, envelope_width }) => {
                kv("ic.kind", "cosine_packet".into());
                kv("ic.amplitude", f(*amplitude));
                kv("ic.wavenumber", f(*wavenumber));
                kv("ic.envelope_width", f(*envelope_width));
            }
            Some(InitialCondition::File { path }) => {
                kv("ic.kind", "file".into());
                kv("ic.path", path.to_string_lossy().into_owned());
            }
        }
        match &self.forcing {
            ForcingSpec::Zero => kv("forcing.kind", "zero".into()),
            ForcingSpec::Manufactured { case, amplitude } => {
                kv("forcing.kind", "manufactured".into());
                let c = match case {
                    ManufacturedCase::Linear => "linear",
                    ManufacturedCase::Nonlinear => "nonlinear",
                };
                kv("forcing.case", c.into());
                kv("forcing.amplitude", f(*amplitude));
            }
            ForcingSpec::File { path } => {
                kv("forcing.kind", "file".into());
                kv("forcing.path", path.to_string_lossy().into_owned());
            }
        }
        let p = &self.picard;
        kv("picard.tol", f(p.tol));
        kv("picard.max_iter", p.max_iter.to_string());
        match p.window_mode {
            WindowMode::Single => kv("picard.window_mode", "single".into()),
            WindowMode::Auto => kv("picard.window_mode", "auto".into()),
            WindowMode::Fixed(t1) => {
                kv("picard.window_mode", "fixed".into());
                kv("picard.window", f(t1));
            }
        }
        if let Some(k) = p.k_hat {
            kv("picard.k_hat", f(k));
        }
        if let Some(a) = p.a_hat {
            kv("picard.a_hat", f(a));
        }
        kv("picard.div_factor", f(p.div_factor));
        let o = &self.output;
        let join_pairs = |v: &[(u32, u32)]| v.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(",");
        kv("output.dir", o.dir.to_string_lossy().into_owned());
        kv("output.snapshots", o.snapshots.iter().map(|t| f(*t)).collect::<Vec<_>>().join(","));
        kv("output.seminorms", join_pairs(&o.seminorms));
        kv("output.sup_pairs", join_pairs(&o.sup_pairs));
        kv("output.norms", o.norms.to_string());
        kv("output.report", o.report.to_string());
        kv("run.seed", self.seed.to_string());
        kv("run.decay_tol", f(p.decay_tol));
        kv("run.fast_linear", self.fast_linear.to_string());
        kv("run.ceiling", f(p.ceiling));
        s
    }
}
