//! MSD, covariance and velocity ACF by quadrature against r̂.
//!
//! (0, ∞) is cut into geometric panels [ρ^i, ρ^{i+1}]. Each panel stores r̂ at
//! Gauss–Legendre nodes of two orders plus the Legendre coefficients of
//! g = r̂/ω², so every time t reuses the same spectral evaluations. Panels with
//! tω ≤ 4 use the regularized integrand 2sin²(tω/2)g; the rest use a
//! Legendre–Filon rule for ∫ g cos(tω). The order difference is the error estimate.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{GleError, Result};
use crate::fit::ols;
use crate::kernels::TailClass;
use crate::quadrature::{filon_legendre, GaussLegendre};
use crate::spectral::{GleParams, Regime, SpectralDensity};

/// Quadrature configuration of the MSD engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsdConfig {
    /// Panels per octave of ω.
    pub panels_per_octave: u32,
    pub n_lo: usize,
    pub n_hi: usize,
    /// Upper frequency cut (raised to 10⁴/t for very small t).
    pub omega_max: f64,
    /// Lower cut is lo_factor / t.
    pub lo_factor: f64,
    /// Relative tolerance on the error estimate.
    pub rel_tol: f64,
}

impl Default for MsdConfig {
    fn default() -> Self {
        MsdConfig { panels_per_octave: 2, n_lo: 16, n_hi: 24, omega_max: 1e8, lo_factor: 1e-8, rel_tol: 1e-6 }
    }
}

/// Value with absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

#[derive(Debug)]
struct Rule {
    omegas: Vec<f64>,
    r: Vec<f64>,
    g: Vec<f64>,
    g_coeff: Vec<f64>,
    r_coeff: Vec<f64>,
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    lo: Rule,
    hi: Rule,
}

impl Panel {
    fn center_half(&self) -> (f64, f64) {
        (0.5 * (self.a + self.b), 0.5 * (self.b - self.a))
    }
}

fn build_rule(sd: &SpectralDensity, a: f64, b: f64, n: usize) -> Result<Rule> {
    let gl = GaussLegendre::get(n);
    let omegas: Vec<f64> = gl.mapped_nodes(a, b).collect();
    let r: Result<Vec<f64>> = omegas.iter().map(|&w| sd.rhat(w)).collect();
    let r = r?;
    let g: Vec<f64> = r.iter().zip(&omegas).map(|(r, w)| r / (w * w)).collect();
    let g_coeff = gl.legendre_coefficients(&g);
    let r_coeff = gl.legendre_coefficients(&r);
    Ok(Rule { omegas, r, g, g_coeff, r_coeff })
}

/// ∫_a^b (1 - cos tω) g(ω) dω on one panel.
fn one_minus_cos_integral(p: &Panel, rule: &Rule, n: usize, t: f64) -> f64 {
    let (c, h) = p.center_half();
    if t * p.b <= 4.0 {
        let gl = GaussLegendre::get(n);
        let mut s = 0.0;
        for j in 0..n {
            let x = (0.5 * t * rule.omegas[j]).sin();
            s += gl.weights[j] * 2.0 * x * x * rule.g[j];
        }
        s * h
    } else {
        let plain = 2.0 * h * rule.g_coeff[0];
        let (re, im) = filon_legendre(&rule.g_coeff, t * h);
        let (sn, cs) = (t * c).sin_cos();
        plain - h * (cs * re - sn * im)
    }
}

/// ∫_a^b cos(tω) r̂(ω) dω on one panel.
fn cos_integral(p: &Panel, rule: &Rule, t: f64) -> f64 {
    let (c, h) = p.center_half();
    let (re, im) = filon_legendre(&rule.r_coeff, t * h);
    let (sn, cs) = (t * c).sin_cos();
    h * (cs * re - sn * im)
}

fn log_slope(rule: &Rule) -> f64 {
    let n = rule.r.len();
    let (r0, r1) = (rule.r[0], rule.r[n - 1]);
    if r0 > 0.0 && r1 > 0.0 {
        (r1 / r0).ln() / (rule.omegas[n - 1] / rule.omegas[0]).ln()
    } else {
        0.0
    }
}

/// MSD/covariance quadrature engine over a spectral density, with a panel cache.
#[derive(Debug)]
pub struct MsdEngine<'a> {
    sd: &'a SpectralDensity,
    cfg: MsdConfig,
    panels: RwLock<HashMap<i64, Arc<Panel>>>,
}

impl<'a> MsdEngine<'a> {
    pub fn new(sd: &'a SpectralDensity) -> Self {
        Self::with_config(sd, MsdConfig::default())
    }

    pub fn with_config(sd: &'a SpectralDensity, cfg: MsdConfig) -> Self {
        MsdEngine { sd, cfg, panels: RwLock::new(HashMap::new()) }
    }

    pub fn spectral(&self) -> &SpectralDensity {
        self.sd
    }

    pub fn config(&self) -> MsdConfig {
        self.cfg
    }

    fn edge(&self, i: i64) -> f64 {
        2f64.powf(i as f64 / self.cfg.panels_per_octave as f64)
    }

    fn index_floor(&self, w: f64) -> i64 {
        (w.log2() * self.cfg.panels_per_octave as f64).floor() as i64
    }

    fn panel(&self, i: i64) -> Result<Arc<Panel>> {
        if let Some(p) = self.panels.read().expect("panel cache poisoned").get(&i) {
            return Ok(p.clone());
        }
        let (a, b) = (self.edge(i), self.edge(i + 1));
        let p = Arc::new(Panel {
            a,
            b,
            lo: build_rule(self.sd, a, b, self.cfg.n_lo)?,
            hi: build_rule(self.sd, a, b, self.cfg.n_hi)?,
        });
        self.panels.write().expect("panel cache poisoned").insert(i, p.clone());
        Ok(p)
    }

    fn range(&self, t: f64) -> (i64, i64) {
        let lo = self.index_floor(self.cfg.lo_factor / t);
        let top = self.cfg.omega_max.max(1e4 / t);
        let hi = self.index_floor(top) + 1;
        (lo, hi.max(lo + 1))
    }

    /// E[X²(t)] = 4 ∫₀^∞ (1 - cos tω)/ω² r̂(ω) dω, without the tolerance check.
    pub fn msd_raw(&self, t: f64) -> Result<Estimate> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(GleError::Domain(format!("t = {t} must be finite and >= 0")));
        }
        if t == 0.0 {
            return Ok(Estimate { value: 0.0, err_est: 0.0 });
        }
        let (ilo, ihi) = self.range(t);
        let (mut s_lo, mut s_hi) = (0.0, 0.0);
        for i in ilo..ihi {
            let p = self.panel(i)?;
            s_lo += one_minus_cos_integral(&p, &p.lo, self.cfg.n_lo, t);
            s_hi += one_minus_cos_integral(&p, &p.hi, self.cfg.n_hi, t);
        }
        // (0, ω_lo]: (1 - cos tω)/ω² ≈ t²/2, r̂ ≈ r̂(ω_lo)(ω/ω_lo)^s
        let first = self.panel(ilo)?;
        let w_lo = first.a;
        let s = log_slope(&first.hi).clamp(-0.9, 3.0);
        let s_next = log_slope(&self.panel(ilo + 1)?.hi).clamp(-0.9, 3.0);
        let r_lo = self.sd.rhat(w_lo)?;
        let rem = 0.5 * t * t * r_lo * w_lo / (1.0 + s);
        let rem_err = rem * ((s - s_next).abs() / (1.0 + s) + (t * w_lo).powi(2) / 12.0);
        // [Ω, ∞): 1 - cos averages to 1, r̂ ≈ r̂(Ω)(ω/Ω)^s
        let last = self.panel(ihi - 1)?;
        let w_hi = last.b;
        let s_top = log_slope(&last.hi);
        let s_prev = log_slope(&self.panel(ihi - 2)?.hi);
        let r_hi = self.sd.rhat(w_hi)?;
        let (tail, tail_err) = if s_top < 0.95 {
            let tail = r_hi / (w_hi * (1.0 - s_top));
            (tail, tail * (s_top - s_prev).abs() / (1.0 - s_top) + 2.0 * r_hi / (t * w_hi * w_hi))
        } else {
            (0.0, f64::INFINITY)
        };
        let value = 4.0 * (s_hi + rem + tail);
        let quad_err = (s_hi - s_lo).abs() + 16.0 * f64::EPSILON * s_hi.abs();
        let err_est = 4.0 * (quad_err + rem_err + tail_err);
        Ok(Estimate { value, err_est })
    }

    /// MSD with the configured relative tolerance enforced.
    pub fn msd(&self, t: f64) -> Result<Estimate> {
        let e = self.msd_raw(t)?;
        if !(e.err_est <= self.cfg.rel_tol * e.value.abs()) && e.value != 0.0 {
            return Err(GleError::NotConverged { value: e.value, err_est: e.err_est, bound: e.err_est });
        }
        Ok(e)
    }

    /// E[X(t)X(s)] from the covariance integrand
    /// (1-cos tω) + (1-cos sω) - (1-cos (t-s)ω), over ω² and against r̂.
    pub fn covariance(&self, t: f64, s: f64) -> Result<Estimate> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(GleError::Domain("covariance needs t, s >= 0".into()));
        }
        let (a, b) = if t <= s { (t, s) } else { (s, t) };
        let ea = self.msd(a)?;
        let eb = self.msd(b)?;
        let ed = self.msd(b - a)?;
        Ok(Estimate { value: 0.5 * (ea.value + eb.value - ed.value), err_est: 0.5 * (ea.err_est + eb.err_est + ed.err_est) })
    }

    /// Covariance matrix on a time grid; each unordered pair computed once.
    pub fn covariance_grid(&self, times: &[f64]) -> Result<CovarianceGrid> {
        let n = times.len();
        let mut needed: Vec<f64> = times.to_vec();
        needed.push(0.0);
        for i in 0..n {
            for j in 0..i {
                needed.push((times[i] - times[j]).abs());
            }
        }
        needed.sort_by(f64::total_cmp);
        needed.dedup();
        let vals: Result<Vec<(u64, Estimate)>> = needed.par_iter().map(|&t| Ok((t.to_bits(), self.msd(t)?))).collect();
        let memo: HashMap<u64, Estimate> = vals?.into_iter().collect();
        let mut cov = vec![vec![0.0; n]; n];
        let mut err = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let (ti, tj) = (times[i], times[j]);
                let ei = memo[&ti.to_bits()];
                let ej = memo[&tj.to_bits()];
                let ed = memo[&(ti - tj).abs().to_bits()];
                let v = 0.5 * (ei.value + ej.value - ed.value);
                let e = 0.5 * (ei.err_est + ej.err_est + ed.err_est);
                cov[i][j] = v;
                cov[j][i] = v;
                err[i][j] = e;
                err[j][i] = e;
            }
        }
        Ok(CovarianceGrid { times: times.to_vec(), cov, err })
    }

    /// r(t) = 2∫₀^∞ cos(tω) r̂(ω) dω; only where V(t) exists (m > 0).
    pub fn acf_velocity(&self, t: f64) -> Result<Estimate> {
        match self.sd.regime() {
            Regime::MposLzero | Regime::MposLpos => {}
            _ => return Err(GleError::Precondition("V(t) is not well-defined for m = 0".into())),
        }
        let t = t.abs();
        let ilo = self.index_floor(1e-10 / t.max(1.0));
        let ihi = self.index_floor(self.cfg.omega_max) + 1;
        let (mut s_lo, mut s_hi) = (0.0, 0.0);
        for i in ilo..ihi {
            let p = self.panel(i)?;
            s_lo += cos_integral(&p, &p.lo, t);
            s_hi += cos_integral(&p, &p.hi, t);
        }
        let first = self.panel(ilo)?;
        let s = log_slope(&first.hi).clamp(-0.9, 3.0);
        let rem = self.sd.rhat(first.a)? * first.a / (1.0 + s);
        let last = self.panel(ihi - 1)?;
        let s_top = log_slope(&last.hi);
        let tail_mag = if s_top < -1.05 { self.sd.rhat(last.b)? * last.b / (-1.0 - s_top) } else { f64::INFINITY };
        let tail = if t * last.b < 1.0 { tail_mag } else { 0.0 };
        let value = 2.0 * (s_hi + rem + tail);
        let err_est = 2.0 * ((s_hi - s_lo).abs() + 0.05 * rem.abs() + tail_mag + 16.0 * f64::EPSILON * s_hi.abs());
        Ok(Estimate { value, err_est })
    }

    /// Cross-check 2∫₀^t (t-s) r(s) ds against msd(t). Returns (lhs, rhs, tolerance)
    /// with tolerance 10× the summed inner error estimates.
    pub fn acf_msd_crosscheck(&self, t: f64) -> Result<(f64, f64, f64)> {
        let gl = GaussLegendre::get(48);
        let mut lhs = 0.0;
        let mut inner_err = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = 0.5 * t * (1.0 + x);
            let r = self.acf_velocity(s)?;
            lhs += w * (t - s) * r.value;
            inner_err += w * (t - s) * r.err_est;
        }
        lhs *= t; // 2 · (t/2) · Σ
        inner_err *= t;
        let m = self.msd(t)?;
        Ok((lhs, m.value, 10.0 * (inner_err + m.err_est)))
    }
}

/// Symmetric covariance matrix with entrywise error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceGrid {
    pub times: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub err: Vec<Vec<f64>>,
}

impl CovarianceGrid {
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.times.len();
        if n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.cov[i][j]);
        m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        (0..self.times.len()).map(|i| self.cov[i][i]).sum()
    }
}

/// Fitted log-log exponent with confidence halfwidth (2 standard errors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub eta: f64,
    pub halfwidth: f64,
    /// Worst-case slope shift from the per-point quadrature error estimates and
    /// the rounding of the log values.
    pub quad_halfwidth: f64,
    /// exp(intercept): measured prefactor of t^η.
    pub prefactor: f64,
    pub n: usize,
    pub window: (f64, f64),
}

impl ExponentFit {
    /// 2·sqrt(SE² + quadrature slope error²).
    pub fn combined_halfwidth(&self) -> f64 {
        self.halfwidth.hypot(2.0 * self.quad_halfwidth)
    }
}

/// MSD samples with optional fitted and predicted exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MsdCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub regime: Option<Regime>,
    pub fitted: Option<ExponentFit>,
    pub predicted: Option<f64>,
}

/// Geometric time grid with `per_decade` points per decade, both ends included.
pub fn geometric_times(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}

impl<'a> MsdEngine<'a> {
    /// MSD curve on `times` (evaluated concurrently), with the default-window fit
    /// (top two decades) and the predicted exponent when available.
    pub fn curve(&self, times: &[f64]) -> Result<MsdCurve> {
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !(*t > 0.0)) {
            return Err(GleError::Precondition("times must be positive and strictly increasing".into()));
        }
        let est: Result<Vec<Estimate>> = times.par_iter().map(|&t| self.msd(t)).collect();
        let est = est?;
        let mut curve = MsdCurve {
            times: times.to_vec(),
            values: est.iter().map(|e| e.value).collect(),
            errors: est.iter().map(|e| e.err_est).collect(),
            regime: Some(self.sd.regime()),
            fitted: None,
            predicted: predict_exponent(self.sd.tail(), self.sd.params(), self.sd.kernel().satisfies_assumption2()).ok(),
        };
        if let Some(&hi) = times.last() {
            curve.fitted = fit_exponent(&curve, (hi / 100.0, hi)).ok();
        }
        Ok(curve)
    }
}

/// Least-squares slope of log msd vs log t over `window` (≥ 8 points).
pub fn fit_exponent(curve: &MsdCurve, window: (f64, f64)) -> Result<ExponentFit> {
    let tol = 1e-12;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rel = Vec::new();
    for ((t, v), e) in curve.times.iter().zip(&curve.values).zip(&curve.errors) {
        if *t >= window.0 * (1.0 - tol) && *t <= window.1 * (1.0 + tol) && *v > 0.0 {
            let (x, y) = (t.ln(), v.ln());
            rel.push(e / v + 4.0 * f64::EPSILON * (x.abs() + y.abs()));
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 8 {
        return Err(GleError::InsufficientPoints { needed: 8, have: xs.len() });
    }
    let f = ols(&xs, &ys)?;
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let quad = xs.iter().zip(&rel).map(|(x, d)| (x - xbar).abs() * d).sum::<f64>() / sxx;
    Ok(ExponentFit {
        eta: f.slope,
        halfwidth: 2.0 * f.se_slope,
        quad_halfwidth: quad,
        prefactor: f.intercept.exp(),
        n: f.n,
        window,
    })
}

/// Fits over successively farther windows.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    /// The accepted fit (last window examined).
    pub fit: ExponentFit,
    /// Every window fitted, in order.
    pub trail: Vec<ExponentFit>,
    /// Whether two consecutive windows agreed.
    pub converged: bool,
}

/// Two-decade windows [10^d, 10^(d+2)] with d = d0, 2·d0, 4·d0, ... (at most
/// 10^130); stops at the first window whose fit agrees with its predecessor within
/// the combined halfwidth.
pub fn fit_exponent_asymptotic(engine: &MsdEngine, d0: u32, per_decade: usize) -> Result<AsymptoticFit> {
    if d0 == 0 {
        return Err(GleError::Domain("starting decade must be >= 1".into()));
    }
    let mut trail: Vec<ExponentFit> = Vec::new();
    let mut d = d0;
    while d + 2 <= 130 {
        let lo = 10f64.powi(d as i32);
        let hi = lo * 100.0;
        let times = geometric_times(lo, hi, per_decade);
        let fit = fit_exponent(&engine.curve(&times)?, (lo, hi))?;
        let agreed = trail.last().is_some_and(|prev| (prev.eta - fit.eta).abs() <= fit.combined_halfwidth());
        trail.push(fit);
        if agreed {
            return Ok(AsymptoticFit { fit, trail, converged: true });
        }
        d *= 2;
    }
    let fit = *trail.last().expect("at least one window");
    Ok(AsymptoticFit { fit, trail, converged: false })
}

/// η = 1 for Integrable tails, α for PowerTail(α); unavailable for m = λ = 0
/// without Assumption 2.
pub fn predict_exponent(tail: TailClass, params: GleParams, assumption2: bool) -> Result<f64> {
    if params.regime() == Regime::MzeroLzero && !assumption2 {
        return Err(GleError::PredictionUnavailable(
            "m = lambda = 0 needs Assumption 2; the dichotomy does not cover this kernel".into(),
        ));
    }
    Ok(match tail {
        TailClass::Integrable => 1.0,
        TailClass::PowerTail { alpha, .. } => alpha,
    })
}
