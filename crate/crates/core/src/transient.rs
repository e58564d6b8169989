//! Covariance convergence for kernel sequences K_n → K and transient
//! anomalous-diffusion windows.

use rayon::prelude::*;

use crate::error::{GleError, Result};
use crate::kernels::{KernelSpec, TailClass};
use crate::msd::{geometric_times, Estimate, MsdCurve, MsdEngine};
use crate::quadrature::integrate_adaptive;
use crate::spectral::{GleParams, SpectralDensity};

/// Hypotheses on a kernel sequence for covariance convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// (a) every K_n integrable and convex.
    IntegrableConvex,
    /// (b) the limit has a power tail.
    LimitPowerTail,
    /// (c) K_n → K pointwise.
    PointwiseConvergence,
    /// (d) every K_n nonincreasing and decaying.
    Decay,
    /// (e) sup_n sup_{t ≤ 1} t^κ K_n(t) < ∞.
    UniformBound,
}

impl Hypothesis {
    pub fn label(&self) -> &'static str {
        match self {
            Hypothesis::IntegrableConvex => "(a) integrable and convex",
            Hypothesis::LimitPowerTail => "(b) limit power tail",
            Hypothesis::PointwiseConvergence => "(c) pointwise convergence",
            Hypothesis::Decay => "(d) decay",
            Hypothesis::UniformBound => "(e) uniform bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// Measured sup_n sup_{t ∈ [t_min, 1]} t^κ K_n(t).
    pub uniform_bound: f64,
}

impl HypothesisReport {
    pub fn passed(&self, h: Hypothesis) -> bool {
        self.checks.iter().any(|c| c.hypothesis == h && c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn convex_on_grid(k: &KernelSpec) -> Result<bool> {
    for t in geometric_times(1e-3, 1e3, 10) {
        let h = 0.05 * t;
        let d2 = k.eval(t - h)? + k.eval(t + h)? - 2.0 * k.eval(t)?;
        if d2 < -1e-10 * k.eval(t)?.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numeric verification of the sequence hypotheses, one entry per hypothesis.
pub fn check_convergence_hypotheses(seq: &[KernelSpec], limit: &KernelSpec, kappa: f64) -> Result<HypothesisReport> {
    if seq.is_empty() {
        return Err(GleError::Domain("kernel sequence is empty".into()));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(GleError::Domain(format!("kappa = {kappa} must lie in (0, 1)")));
    }
    let mut checks = Vec::new();

    let mut bad = Vec::new();
    for (i, k) in seq.iter().enumerate() {
        let integrable = matches!(k.classify_tail(), Ok(TailClass::Integrable));
        if !integrable || !k.is_convex() || !convex_on_grid(k)? {
            bad.push(i);
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::IntegrableConvex,
        passed: bad.is_empty(),
        detail: if bad.is_empty() { "all members".into() } else { format!("fails for members {bad:?}") },
    });

    let tail = limit.classify_tail();
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::LimitPowerTail,
        passed: matches!(tail, Ok(TailClass::PowerTail { .. })),
        detail: format!("{tail:?}"),
    });

    let grid = geometric_times(1e-2, 1e2, 5);
    let mut devs = Vec::with_capacity(seq.len());
    for k in seq {
        let mut d: f64 = 0.0;
        for &t in &grid {
            let kl = limit.eval(t)?;
            d = d.max((k.eval(t)? - kl).abs() / kl.abs().max(f64::MIN_POSITIVE));
        }
        devs.push(d);
    }
    let monotone = devs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let shrinking = devs.len() >= 2 && devs.last() < devs.first();
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::PointwiseConvergence,
        passed: monotone && shrinking,
        detail: format!("max relative grid deviation per member {devs:?}"),
    });

    let mut bad = Vec::new();
    let decay_grid = geometric_times(1e-6, 1e6, 4);
    for (i, k) in seq.iter().enumerate() {
        let vals: Result<Vec<f64>> = decay_grid.iter().map(|&t| k.eval(t)).collect();
        let vals = vals?;
        let nonincreasing = vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let decays = vals[vals.len() - 1] <= 1e-3 * vals[0];
        if !(nonincreasing && decays) {
            bad.push(i);
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::Decay,
        passed: bad.is_empty(),
        detail: if bad.is_empty() { "all members".into() } else { format!("fails for members {bad:?}") },
    });

    let bound_grid = geometric_times(1e-6, 1.0, 20);
    let mut bound: f64 = 0.0;
    let mut growing = Vec::new();
    for (i, k) in seq.iter().enumerate() {
        let vals: Result<Vec<f64>> = bound_grid.iter().map(|&t| Ok(t.powf(kappa) * k.eval(t)?)).collect();
        let vals = vals?;
        // t^κ K_n still rising toward the origin signals an unbounded member
        if vals[0] > 1.01 * vals[20] {
            growing.push(i);
        }
        bound = vals.iter().fold(bound, |a, &v| a.max(v));
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::UniformBound,
        passed: bound.is_finite() && growing.is_empty(),
        detail: format!("sup t^kappa K_n = {bound:.6e}; growing at the origin for members {growing:?}"),
    });

    Ok(HypothesisReport { checks, uniform_bound: bound })
}

/// ∫_ℝ |r̂_a - r̂_b| dω, integrated over log ω on [10⁻¹², Ω] with power-law remainders.
/// Ω starts at 10⁸ and drops by decades while the difference is lost in rounding
/// (when m = 0 both densities tend to the same constant).
pub fn l1_deviation(a: &SpectralDensity, b: &SpectralDensity) -> Result<Estimate> {
    let diff = |w: f64| -> Result<f64> { Ok((a.rhat(w)? - b.rhat(w)?).abs()) };
    let resolved = |w: f64| -> Result<bool> { Ok(diff(w)? > 1e-8 * (a.rhat(w)? + b.rhat(w)?)) };
    let lo = 1e-12f64;
    let mut hi = 1e8f64;
    while hi > 1e2 && !(resolved(hi)? && resolved(0.5 * hi)?) {
        hi /= 10.0;
    }
    let mut failure = None;
    let q = integrate_adaptive(
        |u: f64| {
            let w = u.exp();
            match diff(w) {
                Ok(d) => w * d,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        lo.ln(),
        hi.ln(),
        1e-15,
        1e-9,
        4000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let d_hi = diff(hi)?;
    let d_half = diff(0.5 * hi)?;
    let slope = if d_hi > 0.0 && d_half > 0.0 { (d_hi / d_half).log2() } else { -2.0 };
    if slope > -1.05 {
        return Err(GleError::NotConverged { value: q.value, err_est: f64::INFINITY, bound: f64::INFINITY });
    }
    let tail = d_hi * hi / (-slope - 1.0);
    let head = diff(lo)? * lo;
    let value = 2.0 * (q.value + tail + head);
    let err_est = 2.0 * (q.err_est + 0.1 * tail + head);
    Ok(Estimate { value, err_est })
}

/// Sampled covariance deviation and its analytic envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    pub sup_dev: f64,
    /// (t, s) where the sampled sup is attained.
    pub argmax: (f64, f64),
    /// Combined quadrature error of the two covariances at the argmax.
    pub err_est: f64,
    pub l1_dev: Estimate,
    /// T² · ∫|r̂_n - r̂|, i.e. 2T² · sup (1 - cos ω)/ω² · l1_dev.
    pub bound: f64,
}

/// sup over a `grid`×`grid` lattice on [0, T]² of |E[X_n(t)X_n(s)] - E[X(t)X(s)]|.
pub fn sup_covariance_deviation(sd_n: &SpectralDensity, sd: &SpectralDensity, horizon: f64, grid: usize) -> Result<DeviationReport> {
    if !(horizon > 0.0 && horizon.is_finite()) || grid < 2 {
        return Err(GleError::Domain("need T > 0 and at least 2 grid points".into()));
    }
    // cov(·, 0) = 0 for both processes, so the origin row is skipped
    let times: Vec<f64> = (1..grid).map(|j| horizon * j as f64 / (grid - 1) as f64).collect();
    let (ga, gb) = rayon::join(|| MsdEngine::new(sd_n).covariance_grid(&times), || MsdEngine::new(sd).covariance_grid(&times));
    let (ga, gb) = (ga?, gb?);
    let mut best = (0.0, (0.0, 0.0), 0.0);
    for i in 0..times.len() {
        for j in 0..=i {
            let d = (ga.cov[i][j] - gb.cov[i][j]).abs();
            if d > best.0 {
                best = (d, (times[i], times[j]), ga.err[i][j] + gb.err[i][j]);
            }
        }
    }
    let l1 = l1_deviation(sd_n, sd)?;
    Ok(DeviationReport {
        sup_dev: best.0,
        argmax: best.1,
        err_est: best.2,
        l1_dev: l1,
        bound: horizon * horizon * l1.value,
    })
}

/// Centered log-log slope of a geometric-grid curve over ±0.25 decade,
/// one-sided at the ends.
pub fn slope_profile(curve: &MsdCurve) -> Result<Vec<(f64, f64)>> {
    let t = &curve.times;
    if t.len() < 3 {
        return Err(GleError::InsufficientPoints { needed: 3, have: t.len() });
    }
    let h = (t[1] / t[0]).log10();
    if !(h > 0.0) || t.windows(2).any(|w| ((w[1] / w[0]).log10() - h).abs() > 1e-6 * h.max(1e-3)) {
        return Err(GleError::Precondition("slope profile needs a geometric time grid".into()));
    }
    if curve.values.iter().any(|v| !(*v > 0.0)) {
        return Err(GleError::Precondition("slope profile needs positive msd values".into()));
    }
    let k = ((0.25 / h).round() as usize).max(1);
    let n = t.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(k);
            let hi = (i + k).min(n - 1);
            let s = (curve.values[hi] / curve.values[lo]).ln() / (t[hi] / t[lo]).ln();
            (t[i], s)
        })
        .collect())
}

/// Longest contiguous range (in log t) where the local slope is within
/// `alpha ± tol`; `None` if it spans less than half a decade.
pub fn detect_tad_window(curve: &MsdCurve, alpha: f64, tol: f64) -> Result<Option<(f64, f64)>> {
    let (first, last) = match (curve.times.first(), curve.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(GleError::InsufficientPoints { needed: 3, have: 0 }),
    };
    if (last / first).log10() < 4.0 - 1e-9 {
        return Err(GleError::Precondition("TAD detection needs a curve spanning at least 4 decades".into()));
    }
    let prof = slope_profile(curve)?;
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<usize> = None;
    for i in 0..=prof.len() {
        let inside = i < prof.len() && (prof[i].1 - alpha).abs() <= tol;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let cand = (prof[s].0, prof[i - 1].0);
                if best.is_none_or(|b| (cand.1 / cand.0) > (b.1 / b.0)) {
                    best = Some(cand);
                }
                start = None;
            }
            _ => {}
        }
    }
    Ok(best.filter(|b| (b.1 / b.0).log10() >= 0.5))
}

/// Options for a transient-analysis run.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientConfig {
    pub horizon: f64,
    /// Lattice size per axis for the covariance sup.
    pub grid: usize,
    /// Time grid for the slope profiles (geometric).
    pub curve_times: Vec<f64>,
    pub alpha_target: f64,
    pub slope_tol: f64,
}

impl TransientConfig {
    pub fn new(horizon: f64) -> Self {
        TransientConfig {
            horizon,
            grid: 64,
            curve_times: geometric_times(1e-2, 1e6, 8),
            alpha_target: 0.5,
            slope_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientReport {
    pub n_values: Vec<usize>,
    pub sup_dev: Vec<f64>,
    pub bound: Vec<f64>,
    pub l1_dev: Vec<f64>,
    pub slope_profiles: Vec<Vec<(f64, f64)>>,
    pub tad_windows: Vec<Option<(f64, f64)>>,
    pub curves: Vec<MsdCurve>,
}

impl TransientReport {
    /// Sampled sup within the envelope for every N.
    pub fn bound_dominates(&self) -> bool {
        self.sup_dev.iter().zip(&self.bound).all(|(d, b)| d <= b)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.sup_dev.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs deviation, l1 and TAD analysis for each N of `family` against `limit`.
/// Entries are computed concurrently and assembled in the order of `n_values`.
pub fn run_transient<F>(family: F, n_values: &[usize], limit: &KernelSpec, params: GleParams, cfg: &TransientConfig) -> Result<TransientReport>
where
    F: Fn(usize) -> Result<KernelSpec> + Sync,
{
    if n_values.is_empty() {
        return Err(GleError::Domain("N list is empty".into()));
    }
    let sd = SpectralDensity::new(params, limit.clone())?;
    type Entry = (DeviationReport, MsdCurve, Vec<(f64, f64)>, Option<(f64, f64)>);
    let entries: Result<Vec<Entry>> = n_values
        .par_iter()
        .map(|&n| {
            let sd_n = SpectralDensity::new(params, family(n)?)?;
            let dev = sup_covariance_deviation(&sd_n, &sd, cfg.horizon, cfg.grid)?;
            let curve = MsdEngine::new(&sd_n).curve(&cfg.curve_times)?;
            let prof = slope_profile(&curve)?;
            let win = detect_tad_window(&curve, cfg.alpha_target, cfg.slope_tol)?;
            Ok((dev, curve, prof, win))
        })
        .collect();
    let entries = entries?;
    Ok(TransientReport {
        n_values: n_values.to_vec(),
        sup_dev: entries.iter().map(|e| e.0.sup_dev).collect(),
        bound: entries.iter().map(|e| e.0.bound).collect(),
        l1_dev: entries.iter().map(|e| e.0.l1_dev.value).collect(),
        slope_profiles: entries.iter().map(|e| e.2.clone()).collect(),
        tad_windows: entries.iter().map(|e| e.3).collect(),
        curves: entries.into_iter().map(|e| e.1).collect(),
    })
}
