//! Task dispatch and artifact emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gle_core::kernels::{check_admissibility, CheckStatus, KernelSpec, RouseModes};
use gle_core::msd::{fit_exponent, MsdConfig, MsdEngine};
use gle_core::spectral::SpectralDensity;
use gle_core::synth::{empirical_msd, synthesize, write_binary};
use gle_core::transform::TransformTable;
use gle_core::transient::{check_convergence_hypotheses, run_transient, TransientConfig};
use gle_core::GleError;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, KernelConfig, TaskOptions};
use crate::output::{field, num, numeric_csv, write_atomic};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("computation: {0}")]
    Compute(#[from] GleError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Files written and human-readable summary lines (the last one is printed last).
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

struct Sink<'a> {
    dir: &'a Path,
    out: RunOutcome,
}

impl Sink<'_> {
    fn file(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let p = write_atomic(self.dir, name, bytes)?;
        self.out.files.push(p);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.out.summary.push(line);
    }
}

fn status(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Inapplicable => "n/a",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Runs the configured task, writing artifacts and the manifest into `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let mut sink = Sink { dir, out: RunOutcome::default() };
    let kernel = cfg.kernel_spec()?;
    match &cfg.options {
        TaskOptions::Check(o) => {
            let rep = check_admissibility(&kernel, &o.plan);
            let mut s = String::from("condition,status,margin,detail\n");
            for c in &rep.checks {
                s += &format!("{},{},{},{}\n", field(c.id.label()), status(c.status), num(c.margin), field(&c.detail));
            }
            sink.file("admissibility.csv", s.as_bytes())?;
            let tail = kernel.classify_tail().map(|t| format!("{t:?}")).unwrap_or_else(|e| e.to_string());
            let summary = format!(
                "key,value\nassumption1,{}\nassumption2,{}\nonset,{}\nsigma1,{}\nsigma2,{}\ntail,{}\n",
                rep.assumption1(),
                rep.assumption2(),
                opt(rep.onset),
                opt(rep.sigma1),
                opt(rep.sigma2),
                field(&tail)
            );
            sink.file("admissibility_summary.csv", summary.as_bytes())?;
            sink.say(format!("assumption1={} assumption2={}", rep.assumption1(), rep.assumption2()));
        }
        TaskOptions::Transform(o) => {
            let t = TransformTable::build(&kernel, &o.omega.points(), o.tol)?;
            let rows = (0..t.omegas.len()).map(|i| vec![t.omegas[i], t.f_cos[i], t.f_sin[i], t.err_est[i]]);
            sink.file("transform.csv", numeric_csv(&["omega", "f_cos", "f_sin", "err_est"], rows).as_bytes())?;
            sink.say(format!("{} frequencies", t.omegas.len()));
        }
        TaskOptions::Spectral(o) => {
            let sd = SpectralDensity::new(cfg.params, kernel)?;
            let t = sd.build_table(&o.omega.points())?;
            let rhat = t.rhat.clone().unwrap_or_default();
            let rows = (0..t.omegas.len()).map(|i| vec![t.omegas[i], t.f_cos[i], t.f_sin[i], rhat[i], t.err_est[i]]);
            sink.file("spectral.csv", numeric_csv(&["omega", "f_cos", "f_sin", "rhat", "err_est"], rows).as_bytes())?;
            let lim = sd.rhat_smallomega_scaled()?;
            sink.say(format!("regime={} small-omega limit={} +- {}", sd.regime().label(), num(lim.value), num(lim.uncertainty)));
        }
        TaskOptions::Msd(o) => {
            let sd = SpectralDensity::new(cfg.params, kernel)?;
            let engine = MsdEngine::with_config(&sd, MsdConfig { rel_tol: o.rel_tol, ..MsdConfig::default() });
            let mut curve = engine.curve(&o.times.points())?;
            if let Some(w) = o.fit_window {
                curve.fitted = Some(fit_exponent(&curve, w)?);
            }
            let rows = (0..curve.times.len()).map(|i| vec![curve.times[i], curve.values[i], curve.errors[i]]);
            sink.file("msd.csv", numeric_csv(&["t", "msd", "err_est"], rows).as_bytes())?;
            let fit = curve.fitted.ok_or(GleError::InsufficientPoints { needed: 8, have: 0 })?;
            let fit_csv = format!(
                "eta_fit,halfwidth,prefactor,window_lo,window_hi,eta_pred\n{},{},{},{},{},{}\n",
                num(fit.eta),
                num(fit.halfwidth),
                num(fit.prefactor),
                num(fit.window.0),
                num(fit.window.1),
                opt(curve.predicted)
            );
            sink.file("exponent.csv", fit_csv.as_bytes())?;
            if o.covariance_points > 0 {
                let n = o.covariance_points;
                let times: Vec<f64> = (1..=n).map(|j| o.times.max * j as f64 / n as f64).collect();
                let g = engine.covariance_grid(&times)?;
                let mut s = String::from("t");
                for t in &times {
                    s += &format!(",{}", num(*t));
                }
                s.push('\n');
                for (i, row) in g.cov.iter().enumerate() {
                    s += &num(times[i]);
                    for v in row {
                        s += &format!(",{}", num(*v));
                    }
                    s.push('\n');
                }
                sink.file("covariance.csv", s.as_bytes())?;
            }
            let pred = curve.predicted.map(|p| format!("{p:.3}")).unwrap_or_else(|| "unavailable".into());
            sink.say(format!("eta_pred={pred} eta_fit≈{:.2}", fit.eta));
        }
        TaskOptions::Simulate(o) => {
            let sd = SpectralDensity::new(cfg.params, kernel)?;
            let ens = synthesize(&sd, &o.synth, cfg.seed)?;
            let emp = empirical_msd(&ens)?;
            let engine = MsdEngine::new(&sd);
            let mut rows = Vec::with_capacity(ens.n_steps + 1);
            let mut within = 0usize;
            for (j, &t) in emp.curve.times.iter().enumerate() {
                let q = engine.msd_raw(t)?.value;
                if (emp.curve.values[j] - q).abs() <= 3.0 * emp.se[j] {
                    within += 1;
                }
                rows.push(vec![t, emp.curve.values[j], emp.se[j], q]);
            }
            sink.file("ensemble.csv", numeric_csv(&["t", "empirical_msd", "se", "quadrature_msd"], rows).as_bytes())?;
            let krows = (1..=ens.n_steps).map(|j| vec![emp.curve.times[j], emp.kurtosis[j]]);
            sink.file("kurtosis.csv", numeric_csv(&["t", "kurtosis"], krows).as_bytes())?;
            if o.dump_paths {
                let mut buf = Vec::with_capacity(32 + 8 * ens.positions.len());
                write_binary(&ens, &mut buf)?;
                sink.file("paths.bin", &buf)?;
            }
            sink.say(format!("{} modes; {within}/{} times within 3 SE of quadrature", ens.n_modes, ens.n_steps + 1));
        }
        TaskOptions::Transient(o) => {
            let (p, tau0, shifted) = match cfg.kernel {
                KernelConfig::Rouse { p, tau0, shifted, .. } => (p, tau0, shifted),
                _ => unreachable!("validated at parse time"),
            };
            let limit = cfg.kernel_spec()?;
            let member = |n: usize| {
                let modes = if shifted { RouseModes::FiniteShifted(n) } else { RouseModes::Finite(n) };
                KernelSpec::rouse(p, tau0, modes).map(|k| if cfg.closed_form { k } else { k.without_closed_form() })
            };
            let seq: Vec<KernelSpec> = o.n_values.iter().map(|&n| member(n)).collect::<Result<_, _>>()?;
            let hyp = check_convergence_hypotheses(&seq, &limit, o.kappa)?;
            let mut s = String::from("hypothesis,passed,detail\n");
            for c in &hyp.checks {
                s += &format!("{},{},{}\n", field(c.hypothesis.label()), c.passed, field(&c.detail));
            }
            sink.file("hypotheses.csv", s.as_bytes())?;
            let tcfg = TransientConfig {
                horizon: o.horizon,
                grid: o.grid,
                curve_times: o.times.points(),
                alpha_target: o.alpha_target,
                slope_tol: o.slope_tol,
            };
            let rep = run_transient(member, &o.n_values, &limit, cfg.params, &tcfg)?;
            let mut s = String::from("N,sup_dev,bound,l1_dev\n");
            for i in 0..rep.n_values.len() {
                s += &format!("{},{},{},{}\n", rep.n_values[i], num(rep.sup_dev[i]), num(rep.bound[i]), num(rep.l1_dev[i]));
            }
            sink.file("transient.csv", s.as_bytes())?;
            let mut s = String::from("N,t,slope\n");
            for (n, prof) in rep.n_values.iter().zip(&rep.slope_profiles) {
                for (t, sl) in prof {
                    s += &format!("{n},{},{}\n", num(*t), num(*sl));
                }
            }
            sink.file("slopes.csv", s.as_bytes())?;
            let mut s = String::from("N,t_lo,t_hi\n");
            for (n, w) in rep.n_values.iter().zip(&rep.tad_windows) {
                s += &format!("{n},{},{}\n", opt(w.map(|w| w.0)), opt(w.map(|w| w.1)));
            }
            sink.file("tad_windows.csv", s.as_bytes())?;
            sink.say(format!(
                "hypotheses {}; bound dominates: {}; sup_dev strictly decreasing: {}",
                if hyp.all_passed() { "all pass" } else { "not all pass" },
                rep.bound_dominates(),
                rep.strictly_decreasing()
            ));
        }
    }
    let manifest = format!(
        "# gle {}\n# seed = {}\n# wall_time_s = {:.3}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        start.elapsed().as_secs_f64(),
        cfg.to_canonical()
    );
    sink.file("manifest.txt", manifest.as_bytes())?;
    Ok(sink.out)
}
