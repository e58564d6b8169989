//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! task = msd
//! seed = 42            # optional, used by task = simulate
//! out = results        # optional output directory
//!
//! [kernel]
//! family = exp_sum     # exp_sum | rouse | power_law_h | power_law_alpha | cm_atoms | squared_cm
//! terms = 1:1, 0.5:0.1 # weight:rate pairs
//!
//! [params]
//! m = 1
//! lambda = 0
//! beta = 1
//!
//! [msd]
//! t_min = 0.01
//! t_max = 1e4
//! ```
//!
//! Only the section named by `task` may appear besides `[kernel]` and `[params]`.
//! Keys may not repeat; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use gle_core::kernels::{KernelSpec, RouseModes, SamplingPlan};
use gle_core::spectral::GleParams;
use gle_core::synth::{CellRule, SynthesisConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {key}: {msg}")]
    Domain { line: usize, key: String, msg: String },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key '{key}' (first set on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("missing required key '{key}' in [{section}]")]
    Missing { section: String, key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Check,
    Transform,
    Spectral,
    Msd,
    Simulate,
    Transient,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Check => "check",
            Task::Transform => "transform",
            Task::Spectral => "spectral",
            Task::Msd => "msd",
            Task::Simulate => "simulate",
            Task::Transient => "transient",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "check" => Task::Check,
            "transform" => Task::Transform,
            "spectral" => Task::Spectral,
            "msd" => Task::Msd,
            "simulate" => Task::Simulate,
            "transient" => Task::Transient,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouseCount {
    Finite(usize),
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelConfig {
    ExpSum(Vec<(f64, f64)>),
    Rouse { p: f64, tau0: f64, n: RouseCount, shifted: bool },
    PowerLawH { h: f64 },
    PowerLawAlpha { c: f64, alpha: f64 },
    CmAtoms(Vec<(f64, f64)>),
    SquaredCm(Vec<(f64, f64)>),
}

impl KernelConfig {
    pub fn build(&self) -> gle_core::Result<KernelSpec> {
        match self {
            KernelConfig::ExpSum(t) => KernelSpec::sum_of_exponentials(t.clone()),
            KernelConfig::Rouse { p, tau0, n, shifted } => {
                let modes = match (n, shifted) {
                    (RouseCount::Limit, _) => RouseModes::Limit,
                    (RouseCount::Finite(n), true) => RouseModes::FiniteShifted(*n),
                    (RouseCount::Finite(n), false) => RouseModes::Finite(*n),
                };
                KernelSpec::rouse(*p, *tau0, modes)
            }
            KernelConfig::PowerLawH { h } => KernelSpec::power_law_h(*h),
            KernelConfig::PowerLawAlpha { c, alpha } => KernelSpec::power_law_alpha(*c, *alpha),
            KernelConfig::CmAtoms(a) => KernelSpec::cm_atoms(a.clone()),
            KernelConfig::SquaredCm(a) => KernelSpec::squared_cm(a.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        gle_core::msd::geometric_times(self.min, self.max, self.per_decade)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub plan: SamplingPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOptions {
    pub omega: Grid,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    pub omega: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdOptions {
    pub times: Grid,
    pub fit_window: Option<(f64, f64)>,
    pub rel_tol: f64,
    /// Points of an optional covariance grid on (0, t_max]; 0 disables it.
    pub covariance_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub synth: SynthesisConfig,
    pub dump_paths: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientOptions {
    pub n_values: Vec<usize>,
    pub horizon: f64,
    pub grid: usize,
    pub times: Grid,
    pub alpha_target: f64,
    pub slope_tol: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskOptions {
    Check(CheckOptions),
    Transform(TransformOptions),
    Spectral(SpectralOptions),
    Msd(MsdOptions),
    Simulate(SimulateOptions),
    Transient(TransientOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub closed_form: bool,
    pub kernel: KernelConfig,
    pub params: GleParams,
    pub options: TaskOptions,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Key/value entries of one section, consumed as they are read.
struct Section {
    name: String,
    header_line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|e| e.line).unwrap_or(self.header_line)
    }

    fn domain(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Domain { line: self.line_of(key), key: key.into(), msg: msg.into() }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::Domain { line, key: key.into(), msg: format!("'{v}' is not {what}") }),
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(self.domain(key, "must be finite"));
            }
        }
        Ok(v)
    }

    fn f64_req(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(key)?.ok_or_else(|| ConfigError::Missing { section: self.name.clone(), key: key.into() })
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = match default {
            Some(d) => self.f64_or(key, d)?,
            None => self.f64_req(key)?,
        };
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.domain(key, "must be > 0"))
        }
    }

    fn usize_or(&mut self, key: &str, default: usize, min: usize) -> Result<usize, ConfigError> {
        let v = self.parsed::<usize>(key, "a nonnegative integer")?.unwrap_or(default);
        if v < min {
            return Err(self.domain(key, format!("must be >= {min}")));
        }
        Ok(v)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        Ok(self.parsed::<bool>(key, "true or false")?.unwrap_or(default))
    }

    fn pairs(&mut self, key: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
        let (v, line) = self.take(key).ok_or_else(|| ConfigError::Missing { section: self.name.clone(), key: key.into() })?;
        let bad = |msg: String| ConfigError::Domain { line, key: key.into(), msg };
        v.split(',')
            .map(|item| {
                let (a, b) = item.trim().split_once(':').ok_or_else(|| bad(format!("'{}' is not weight:rate", item.trim())))?;
                let a: f64 = a.trim().parse().map_err(|_| bad(format!("'{a}' is not a number")))?;
                let b: f64 = b.trim().parse().map_err(|_| bad(format!("'{b}' is not a number")))?;
                Ok((a, b))
            })
            .collect()
    }

    fn grid(&mut self, prefix: &str, default: Grid) -> Result<Grid, ConfigError> {
        let (kmin, kmax) = (format!("{prefix}_min"), format!("{prefix}_max"));
        let g = Grid {
            min: self.positive(&kmin, Some(default.min))?,
            max: self.positive(&kmax, Some(default.max))?,
            per_decade: self.usize_or("per_decade", default.per_decade, 1)?,
        };
        if g.max <= g.min {
            return Err(self.domain(&kmax, format!("must exceed {kmin}")));
        }
        Ok(g)
    }

    fn finish(&self) -> Result<(), ConfigError> {
        match self.entries.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(ConfigError::UnknownKey { line: e.line, section: self.name.clone(), key: k.clone() }),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections = vec![Section { name: String::new(), header_line: 0, entries: BTreeMap::new() }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("malformed section header '{content}'") })?;
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(ConfigError::Duplicate { line, key: format!("[{name}]"), first: prev.header_line });
            }
            sections.push(Section { name: name.to_string(), header_line: line, entries: BTreeMap::new() });
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected 'key = value', found '{content}'") })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Syntax { line, msg: format!("invalid key '{k}'") });
        }
        if v.is_empty() {
            return Err(ConfigError::Syntax { line, msg: format!("empty value for '{k}'") });
        }
        let sec = sections.last_mut().expect("root section");
        if let Some(prev) = sec.entries.get(k) {
            return Err(ConfigError::Duplicate { line, key: k.to_string(), first: prev.line });
        }
        sec.entries.insert(k.to_string(), Entry { value: v.to_string(), line, used: false });
    }
    Ok(sections)
}

fn parse_kernel(s: &mut Section) -> Result<KernelConfig, ConfigError> {
    let (family, _) = s.take("family").ok_or_else(|| ConfigError::Missing { section: "kernel".into(), key: "family".into() })?;
    let k = match family.as_str() {
        "exp_sum" => KernelConfig::ExpSum(s.pairs("terms")?),
        "rouse" => {
            let p = s.f64_or("p", 2.0)?;
            let tau0 = s.f64_or("tau0", 1.0)?;
            let n = match s.take("n") {
                None => return Err(ConfigError::Missing { section: "kernel".into(), key: "n".into() }),
                Some((v, _)) if v == "limit" => RouseCount::Limit,
                Some((v, line)) => RouseCount::Finite(v.parse().map_err(|_| ConfigError::Domain {
                    line,
                    key: "n".into(),
                    msg: format!("'{v}' is not a positive integer or 'limit'"),
                })?),
            };
            let shifted = match s.take("modes") {
                None => true,
                Some((v, _)) if v == "shifted" => true,
                Some((v, _)) if v == "unshifted" => false,
                Some((v, line)) => {
                    return Err(ConfigError::Domain { line, key: "modes".into(), msg: format!("'{v}' is not shifted or unshifted") })
                }
            };
            KernelConfig::Rouse { p, tau0, n, shifted }
        }
        "power_law_h" => KernelConfig::PowerLawH { h: s.f64_req("h")? },
        "power_law_alpha" => KernelConfig::PowerLawAlpha { c: s.f64_or("c", 1.0)?, alpha: s.f64_req("alpha")? },
        "cm_atoms" => KernelConfig::CmAtoms(s.pairs("atoms")?),
        "squared_cm" => KernelConfig::SquaredCm(s.pairs("atoms")?),
        other => return Err(s.domain("family", format!("unknown family '{other}'"))),
    };
    // family-level validation reported against the [kernel] header
    k.build().map_err(|e| ConfigError::Domain { line: s.line_of("family"), key: "kernel".into(), msg: e.to_string() })?;
    Ok(k)
}

fn parse_params(s: &mut Section) -> Result<GleParams, ConfigError> {
    let m = s.f64_req("m")?;
    if m < 0.0 {
        return Err(s.domain("m", "must satisfy m >= 0"));
    }
    let lambda = s.f64_req("lambda")?;
    if lambda < 0.0 {
        return Err(s.domain("lambda", "must satisfy lambda >= 0"));
    }
    let beta = s.f64_or("beta", 1.0)?;
    if beta <= 0.0 {
        return Err(s.domain("beta", "must satisfy beta > 0"));
    }
    GleParams::new(m, lambda, beta).map_err(|e| s.domain("m", e.to_string()))
}

fn parse_options(task: Task, s: &mut Section) -> Result<TaskOptions, ConfigError> {
    Ok(match task {
        Task::Check => {
            let d = SamplingPlan::default();
            let t = s.grid("t", Grid { min: d.t_min, max: d.t_max, per_decade: d.per_decade })?;
            let wmin = s.positive("omega_min", Some(d.omega_min))?;
            let wmax = s.positive("omega_max", Some(d.omega_max))?;
            if wmax <= wmin {
                return Err(s.domain("omega_max", "must exceed omega_min"));
            }
            let plan = SamplingPlan {
                t_min: t.min,
                t_max: t.max,
                per_decade: t.per_decade,
                onset_max: s.positive("onset_max", Some(d.onset_max))?,
                omega_min: wmin,
                omega_max: wmax,
                omega_per_decade: s.usize_or("omega_per_decade", d.omega_per_decade, 1)?,
                log_b: match s.f64_opt("log_b")? {
                    Some(b) if b <= 0.0 => return Err(s.domain("log_b", "must be > 0")),
                    b => b,
                },
            };
            TaskOptions::Check(CheckOptions { plan })
        }
        Task::Transform => {
            let omega = s.grid("omega", Grid { min: 1e-2, max: 1e2, per_decade: 10 })?;
            let tol = match s.f64_opt("tol")? {
                Some(t) if t <= 0.0 => return Err(s.domain("tol", "must be > 0")),
                t => t,
            };
            TaskOptions::Transform(TransformOptions { omega, tol })
        }
        Task::Spectral => TaskOptions::Spectral(SpectralOptions { omega: s.grid("omega", Grid { min: 1e-3, max: 1e3, per_decade: 10 })? }),
        Task::Msd => {
            let times = s.grid("t", Grid { min: 1e-2, max: 1e4, per_decade: 8 })?;
            let fit_window = match (s.f64_opt("fit_lo")?, s.f64_opt("fit_hi")?) {
                (None, None) => None,
                (Some(a), Some(b)) if a > 0.0 && b > a => Some((a, b)),
                (Some(_), Some(_)) => return Err(s.domain("fit_hi", "need 0 < fit_lo < fit_hi")),
                _ => return Err(s.domain("fit_lo", "fit_lo and fit_hi must be given together")),
            };
            let rel_tol = s.positive("tol", Some(1e-6))?;
            let covariance_points = s.usize_or("covariance_points", 0, 0)?;
            TaskOptions::Msd(MsdOptions { times, fit_window, rel_tol, covariance_points })
        }
        Task::Simulate => {
            let dt = s.positive("dt", Some(0.1))?;
            let n_steps = s.usize_or("n_steps", 100, 1)?;
            let n_paths = s.usize_or("n_paths", 1000, 2)?;
            let mut synth = SynthesisConfig::auto(dt, n_steps, n_paths);
            synth.omega_min = s.positive("omega_min", Some(synth.omega_min))?;
            synth.omega_split = s.positive("omega_split", Some(synth.omega_split))?;
            synth.d_omega = s.positive("d_omega", Some(synth.d_omega))?;
            synth.omega_max = s.positive("omega_max", Some(synth.omega_max))?;
            synth.mass_budget = s.positive("mass_budget", Some(synth.mass_budget))?;
            synth.max_cell_phase = s.positive("max_cell_phase", Some(synth.max_cell_phase))?;
            synth.cell_rule = match s.take("cell_rule") {
                None => CellRule::Midpoint,
                Some((v, _)) if v == "midpoint" => CellRule::Midpoint,
                Some((v, _)) if v == "trapezoid" => CellRule::Trapezoid,
                Some((v, line)) => {
                    return Err(ConfigError::Domain { line, key: "cell_rule".into(), msg: format!("'{v}' is not midpoint or trapezoid") })
                }
            };
            if !(synth.omega_min < synth.omega_split && synth.omega_split < synth.omega_max) {
                return Err(s.domain("omega_split", "need omega_min < omega_split < omega_max"));
            }
            TaskOptions::Simulate(SimulateOptions { synth, dump_paths: s.bool_or("dump_paths", false)? })
        }
        Task::Transient => {
            let n_values: Vec<usize> = match s.take("n_values") {
                None => vec![4, 16, 64],
                Some((v, line)) => {
                    let bad = |m: String| ConfigError::Domain { line, key: "n_values".into(), msg: m };
                    if v == "none" {
                        Vec::new()
                    } else {
                        v.split(',')
                            .map(|x| x.trim().parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| bad(format!("'{}' is not a positive integer", x.trim()))))
                            .collect::<Result<_, _>>()?
                    }
                }
            };
            if n_values.is_empty() {
                return Err(s.domain("n_values", "N list must not be empty"));
            }
            let opts = TransientOptions {
                n_values,
                horizon: s.positive("horizon", Some(10.0))?,
                grid: s.usize_or("grid", 64, 2)?,
                times: s.grid("t", Grid { min: 1e-2, max: 1e6, per_decade: 8 })?,
                alpha_target: s.positive("alpha_target", Some(0.5))?,
                slope_tol: s.positive("slope_tol", Some(0.05))?,
                kappa: s.positive("kappa", Some(0.6))?,
            };
            if opts.kappa >= 1.0 {
                return Err(s.domain("kappa", "must lie in (0, 1)"));
            }
            if (opts.times.max / opts.times.min).log10() < 4.0 {
                return Err(s.domain("t_max", "slope profiles need t_max / t_min >= 1e4"));
            }
            TaskOptions::Transient(opts)
        }
    })
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut sections = split_sections(text)?;
    let mut root = sections.remove(0);
    root.name = "top level".into();
    let task = match root.take("task") {
        None => return Err(ConfigError::Missing { section: "top level".into(), key: "task".into() }),
        Some((v, line)) => Task::parse(&v).ok_or_else(|| ConfigError::Domain {
            line,
            key: "task".into(),
            msg: format!("'{v}' is not one of check, transform, spectral, msd, simulate, transient"),
        })?,
    };
    let seed = root.parsed::<u64>("seed", "an unsigned integer")?.unwrap_or(0);
    let out = root.take("out").map(|(v, _)| PathBuf::from(v));
    root.finish()?;

    let mut kernel_sec = None;
    let mut params_sec = None;
    let mut task_sec = None;
    for sec in sections {
        match sec.name.as_str() {
            "kernel" => kernel_sec = Some(sec),
            "params" => params_sec = Some(sec),
            n if n == task.name() => task_sec = Some(sec),
            n => {
                return Err(ConfigError::Syntax { line: sec.header_line, msg: format!("section [{n}] does not apply to task = {}", task.name()) })
            }
        }
    }
    let mut ks = kernel_sec.ok_or_else(|| ConfigError::Missing { section: "kernel".into(), key: "family".into() })?;
    let closed_form = ks.bool_or("closed_form", true)?;
    let kernel = parse_kernel(&mut ks)?;
    if task == Task::Transient && !matches!(kernel, KernelConfig::Rouse { n: RouseCount::Limit, .. }) {
        return Err(ks.domain("family", "task = transient needs family = rouse with n = limit (the limit kernel)"));
    }
    ks.finish()?;
    let mut ps = params_sec.ok_or_else(|| ConfigError::Missing { section: "params".into(), key: "m".into() })?;
    let params = parse_params(&mut ps)?;
    ps.finish()?;
    let mut ts = task_sec.unwrap_or(Section { name: task.name().into(), header_line: 0, entries: BTreeMap::new() });
    let options = parse_options(task, &mut ts)?;
    ts.finish()?;
    Ok(ExperimentConfig { task, seed, out, closed_form, kernel, params, options })
}

fn pairs_text(p: &[(f64, f64)]) -> String {
    p.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Kernel with the closed-form switch applied.
    pub fn kernel_spec(&self) -> gle_core::Result<KernelSpec> {
        let k = self.kernel.build()?;
        Ok(if self.closed_form { k } else { k.without_closed_form() })
    }

    /// Canonical text with every option explicit; parses back to an equal config.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "task = {}", self.task.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        let _ = writeln!(s, "\n[kernel]");
        match &self.kernel {
            KernelConfig::ExpSum(t) => {
                let _ = writeln!(s, "family = exp_sum\nterms = {}", pairs_text(t));
            }
            KernelConfig::Rouse { p, tau0, n, shifted } => {
                let n = match n {
                    RouseCount::Limit => "limit".to_string(),
                    RouseCount::Finite(n) => n.to_string(),
                };
                let modes = if *shifted { "shifted" } else { "unshifted" };
                let _ = writeln!(s, "family = rouse\np = {p}\ntau0 = {tau0}\nn = {n}\nmodes = {modes}");
            }
            KernelConfig::PowerLawH { h } => {
                let _ = writeln!(s, "family = power_law_h\nh = {h}");
            }
            KernelConfig::PowerLawAlpha { c, alpha } => {
                let _ = writeln!(s, "family = power_law_alpha\nc = {c}\nalpha = {alpha}");
            }
            KernelConfig::CmAtoms(a) => {
                let _ = writeln!(s, "family = cm_atoms\natoms = {}", pairs_text(a));
            }
            KernelConfig::SquaredCm(a) => {
                let _ = writeln!(s, "family = squared_cm\natoms = {}", pairs_text(a));
            }
        }
        let _ = writeln!(s, "closed_form = {}", self.closed_form);
        let p = self.params;
        let _ = writeln!(s, "\n[params]\nm = {}\nlambda = {}\nbeta = {}", p.m, p.lambda, p.beta);
        let _ = writeln!(s, "\n[{}]", self.task.name());
        let grid = |s: &mut String, pre: &str, g: &Grid| {
            let _ = writeln!(s, "{pre}_min = {}\n{pre}_max = {}\nper_decade = {}", g.min, g.max, g.per_decade);
        };
        match &self.options {
            TaskOptions::Check(o) => {
                let p = &o.plan;
                grid(&mut s, "t", &Grid { min: p.t_min, max: p.t_max, per_decade: p.per_decade });
                let _ = writeln!(
                    s,
                    "onset_max = {}\nomega_min = {}\nomega_max = {}\nomega_per_decade = {}",
                    p.onset_max, p.omega_min, p.omega_max, p.omega_per_decade
                );
                if let Some(b) = p.log_b {
                    let _ = writeln!(s, "log_b = {b}");
                }
            }
            TaskOptions::Transform(o) => {
                grid(&mut s, "omega", &o.omega);
                if let Some(t) = o.tol {
                    let _ = writeln!(s, "tol = {t}");
                }
            }
            TaskOptions::Spectral(o) => grid(&mut s, "omega", &o.omega),
            TaskOptions::Msd(o) => {
                grid(&mut s, "t", &o.times);
                if let Some((a, b)) = o.fit_window {
                    let _ = writeln!(s, "fit_lo = {a}\nfit_hi = {b}");
                }
                let _ = writeln!(s, "tol = {}\ncovariance_points = {}", o.rel_tol, o.covariance_points);
            }
            TaskOptions::Simulate(o) => {
                let c = &o.synth;
                let rule = match c.cell_rule {
                    CellRule::Midpoint => "midpoint",
                    CellRule::Trapezoid => "trapezoid",
                };
                let _ = writeln!(
                    s,
                    "dt = {}\nn_steps = {}\nn_paths = {}\nomega_min = {}\nomega_split = {}\nd_omega = {}\nomega_max = {}\n\
                     mass_budget = {}\nmax_cell_phase = {}\ncell_rule = {rule}\ndump_paths = {}",
                    c.dt, c.n_steps, c.n_paths, c.omega_min, c.omega_split, c.d_omega, c.omega_max, c.mass_budget, c.max_cell_phase, o.dump_paths
                );
            }
            TaskOptions::Transient(o) => {
                let ns = o.n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ");
                let _ = writeln!(s, "n_values = {ns}\nhorizon = {}\ngrid = {}", o.horizon, o.grid);
                grid(&mut s, "t", &o.times);
                let _ = writeln!(s, "alpha_target = {}\nslope_tol = {}\nkappa = {}", o.alpha_target, o.slope_tol, o.kappa);
            }
        }
        s
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "task = msd\n[kernel]\nfamily = exp_sum\nterms = 1:1\n[params]\nm = 1\nlambda = 0\nbeta = 1\n";

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.task, Task::Msd);
        assert_eq!(c.kernel, KernelConfig::ExpSum(vec![(1.0, 1.0)]));
        assert!(matches!(c.options, TaskOptions::Msd(_)));
    }

    #[test]
    fn negative_mass_names_the_constraint() {
        let e = parse_config(&MINIMAL.replace("m = 1", "m = -1")).unwrap_err();
        assert!(matches!(&e, ConfigError::Domain { line: 6, key, .. } if key == "m"), "{e}");
        assert!(e.to_string().contains("m >= 0"));
    }

    #[test]
    fn duplicate_key_rejected() {
        let e = parse_config(&format!("{MINIMAL}beta = 2\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Duplicate { line: 9, first: 8, .. }), "{e}");
    }

    #[test]
    fn unknown_key_and_section_rejected() {
        let e = parse_config(&format!("{MINIMAL}gamma = 2\n")).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: 9, .. }), "{e}");
        let e = parse_config(&format!("{MINIMAL}[simulate]\ndt = 1\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 9, .. }), "{e}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let e = parse_config("task = msd\nnonsense\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
        let e = parse_config("task = msd\n[kernel\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn empty_n_list_rejected() {
        let text = "task = transient\n[kernel]\nfamily = rouse\nn = limit\n[params]\nm = 1\nlambda = 0\n[transient]\nn_values = none\n";
        assert!(matches!(parse_config(text), Err(ConfigError::Domain { line: 9, .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.to_canonical()).unwrap(), c);
    }
}
