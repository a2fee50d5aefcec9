//! Experiment specification: flag/config-file resolution into a validated
//! grid description.
//!
//! Precedence per field: command-line flag, then config-file entry, then
//! the `AOII_SEED` environment variable (seed only), then the built-in
//! default. The config file is a flat `key = value` format mirroring the
//! flag names; `#` starts a comment.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use aoii_core::{Assumption, DelaySpec, PolicyThreshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Exact engine only: one CSV row per grid point.
    Analytic,
    /// Monte Carlo only: mean and standard error per grid point.
    Simulate,
    /// Both, plus a z-score column; nonzero exit if any |z| > 3.
    Compare,
    /// Both, plus an SVG chart (analytic lines, simulation markers).
    Sweep,
    /// Oracle equivalence suites; nonzero exit on any failure.
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub enum DelayKind {
    Geometric(f64),
    Zipf(f64),
    File(PathBuf),
}

impl DelayKind {
    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("geometric:") {
            let p_s: f64 = rest
                .parse()
                .map_err(|e| format!("bad geometric parameter '{rest}': {e}"))?;
            Ok(DelayKind::Geometric(p_s))
        } else if let Some(rest) = s.strip_prefix("zipf:") {
            let a: f64 = rest
                .parse()
                .map_err(|e| format!("bad zipf parameter '{rest}': {e}"))?;
            Ok(DelayKind::Zipf(a))
        } else if let Some(rest) = s.strip_prefix("file:") {
            Ok(DelayKind::File(PathBuf::from(rest)))
        } else {
            Err(format!(
                "unknown delay '{s}' (expected geometric:<p_s>, zipf:<a> or file:<path>)"
            ))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DelayKind::Geometric(_) => "geometric",
            DelayKind::Zipf(_) => "zipf",
            DelayKind::File(_) => "file",
        }
    }

    pub fn params_string(&self) -> String {
        match self {
            DelayKind::Geometric(p_s) => format!("{p_s}"),
            DelayKind::Zipf(a) => format!("{a}"),
            DelayKind::File(path) => path.display().to_string(),
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub assumption: Assumption,
    pub delay_kind: DelayKind,
    pub t_max: usize,
    pub ps: Vec<f64>,
    pub taus: Vec<PolicyThreshold>,
    pub runs: u32,
    pub epochs: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub trace: bool,
}

impl ExperimentSpec {
    /// Materialize the delay spec. For `file:` delays the pmf length in the
    /// file defines `t_max` and the `--tmax` flag is ignored.
    pub fn delay_spec(&self) -> Result<DelaySpec, String> {
        match &self.delay_kind {
            DelayKind::Geometric(p_s) => {
                aoii_core::geometric_delay(*p_s, self.t_max, self.assumption)
                    .map_err(|e| e.to_string())
            }
            DelayKind::Zipf(a) => aoii_core::zipf_delay(*a, self.t_max).map_err(|e| e.to_string()),
            DelayKind::File(path) => {
                DelaySpec::from_file(path, self.assumption).map_err(|e| e.to_string())
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.ps.is_empty() {
            return Err("p grid is empty".into());
        }
        for &p in &self.ps {
            if !(p > 0.0 && p <= 0.5) {
                return Err(format!("p = {p} outside (0, 0.5]"));
            }
        }
        if self.taus.is_empty() {
            return Err("tau grid is empty".into());
        }
        Ok(())
    }
}

/// Raw option bag shared by the flag parser and the config file.
#[derive(Debug, Default, Clone)]
pub struct RawOptions {
    pub mode: Option<String>,
    pub assumption: Option<String>,
    pub delay: Option<String>,
    pub tmax: Option<usize>,
    pub p: Option<String>,
    pub tau: Option<String>,
    pub runs: Option<u32>,
    pub epochs: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trace: Option<bool>,
}

impl RawOptions {
    /// Fill unset fields from `fallback`.
    pub fn or(mut self, fallback: RawOptions) -> RawOptions {
        self.mode = self.mode.or(fallback.mode);
        self.assumption = self.assumption.or(fallback.assumption);
        self.delay = self.delay.or(fallback.delay);
        self.tmax = self.tmax.or(fallback.tmax);
        self.p = self.p.or(fallback.p);
        self.tau = self.tau.or(fallback.tau);
        self.runs = self.runs.or(fallback.runs);
        self.epochs = self.epochs.or(fallback.epochs);
        self.seed = self.seed.or(fallback.seed);
        self.out = self.out.or(fallback.out);
        self.trace = self.trace.or(fallback.trace);
        self
    }
}

/// Parse the flat `key = value` config file.
pub fn parse_config_file(path: &Path) -> Result<RawOptions, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map: HashMap<String, String> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            format!(
                "{} line {}: expected 'key = value'",
                path.display(),
                lineno + 1
            )
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut opts = RawOptions::default();
    for (key, value) in map {
        match key.as_str() {
            "mode" => opts.mode = Some(value),
            "assumption" => opts.assumption = Some(value),
            "delay" => opts.delay = Some(value),
            "tmax" => opts.tmax = Some(parse_field(&value, "tmax")?),
            "p" => opts.p = Some(value),
            "tau" => opts.tau = Some(value),
            "runs" => opts.runs = Some(parse_field(&value, "runs")?),
            "epochs" => opts.epochs = Some(parse_field(&value, "epochs")?),
            "seed" => opts.seed = Some(parse_field(&value, "seed")?),
            "out" => opts.out = Some(PathBuf::from(value)),
            "trace" => {
                opts.trace = Some(match value.as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(format!("bad trace value '{other}'")),
                })
            }
            other => return Err(format!("unknown config key '{other}'")),
        }
    }
    Ok(opts)
}

fn parse_field<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad {key} value '{value}': {e}"))
}

/// Resolve merged options into a validated spec.
pub fn resolve(opts: RawOptions, mode_from_flag: Option<Mode>) -> Result<ExperimentSpec, String> {
    let mode = match mode_from_flag {
        Some(m) => m,
        None => match opts.mode.as_deref() {
            Some("analytic") => Mode::Analytic,
            Some("simulate") => Mode::Simulate,
            Some("compare") => Mode::Compare,
            Some("sweep") => Mode::Sweep,
            Some("verify") => Mode::Verify,
            Some(other) => return Err(format!("unknown mode '{other}'")),
            None => return Err("no mode given (flag --mode or config key 'mode')".into()),
        },
    };

    let assumption: Assumption = opts
        .assumption
        .as_deref()
        .unwrap_or("a1")
        .parse()
        .map_err(|e: String| e)?;
    let delay_kind = DelayKind::parse(opts.delay.as_deref().unwrap_or("geometric:0.7"))?;
    let t_max = opts.tmax.unwrap_or(5);

    let ps = parse_list::<f64>(opts.p.as_deref().unwrap_or("0.1,0.2,0.3,0.4"), "p")?;
    let taus = parse_list::<PolicyThreshold>(opts.tau.as_deref().unwrap_or("0,1,2,3,inf"), "tau")?;

    let seed = match opts.seed {
        Some(s) => s,
        None => match std::env::var("AOII_SEED") {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|e| format!("bad AOII_SEED '{v}': {e}"))?,
            Err(_) => 0,
        },
    };

    let spec = ExperimentSpec {
        mode,
        assumption,
        delay_kind,
        t_max,
        ps,
        taus,
        runs: opts.runs.unwrap_or(15),
        epochs: opts.epochs.unwrap_or(25_000),
        seed,
        out: opts.out.unwrap_or_else(|| PathBuf::from(".")),
        trace: opts.trace.unwrap_or(false),
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_list<T: std::str::FromStr>(text: &str, key: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| format!("bad {key} entry '{s}': {e}"))
        })
        .collect()
}
