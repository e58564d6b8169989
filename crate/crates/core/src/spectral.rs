//! Regime-dependent spectral densities r̂(ω).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{GleError, Result};
use crate::kernels::{KernelSpec, TailClass};
use crate::transform::{default_tol, extrapolate_geometric, fourier_cos, fourier_sin, validate_grid, TransformTable};

/// Mass m ≥ 0, viscous drag λ ≥ 0, elastic drag β > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GleParams {
    pub m: f64,
    pub lambda: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    MposLzero,
    MposLpos,
    MzeroLpos,
    MzeroLzero,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::MposLzero => "m>0,lambda=0",
            Regime::MposLpos => "m>0,lambda>0",
            Regime::MzeroLpos => "m=0,lambda>0",
            Regime::MzeroLzero => "m=0,lambda=0",
        }
    }
}

impl GleParams {
    pub fn new(m: f64, lambda: f64, beta: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(GleError::Domain(format!("m = {m} must be >= 0")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(GleError::Domain(format!("lambda = {lambda} must be >= 0")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(GleError::Domain(format!("beta = {beta} must be > 0")));
        }
        Ok(GleParams { m, lambda, beta })
    }

    pub fn regime(&self) -> Regime {
        match (self.m > 0.0, self.lambda > 0.0) {
            (true, false) => Regime::MposLzero,
            (true, true) => Regime::MposLpos,
            (false, true) => Regime::MzeroLpos,
            (false, false) => Regime::MzeroLzero,
        }
    }
}

/// Extrapolated limit with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    fc: f64,
    fs: f64,
    err: f64,
    rhat: f64,
}

/// Spectral density of the stationary velocity (or its generalized counterpart).
#[derive(Debug)]
pub struct SpectralDensity {
    params: GleParams,
    kernel: KernelSpec,
    regime: Regime,
    tail: TailClass,
    cache: RwLock<HashMap<u64, Entry>>,
}

impl Clone for SpectralDensity {
    fn clone(&self) -> Self {
        let cache = self.cache.read().map(|c| c.clone()).unwrap_or_default();
        SpectralDensity {
            params: self.params,
            kernel: self.kernel.clone(),
            regime: self.regime,
            tail: self.tail,
            cache: RwLock::new(cache),
        }
    }
}

impl SpectralDensity {
    /// Validates the kernel for the regime; m = λ = 0 needs Assumption 2.
    pub fn new(params: GleParams, kernel: KernelSpec) -> Result<Self> {
        let params = GleParams::new(params.m, params.lambda, params.beta)?;
        let tail = kernel.classify_tail()?;
        let regime = params.regime();
        if regime == Regime::MzeroLzero && !kernel.satisfies_assumption2() {
            return Err(GleError::Inadmissible("m = lambda = 0 requires a kernel satisfying Assumption 2".into()));
        }
        Ok(SpectralDensity { params, kernel, regime, tail, cache: RwLock::new(HashMap::new()) })
    }

    pub fn params(&self) -> GleParams {
        self.params
    }
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn tail(&self) -> TailClass {
        self.tail
    }

    fn entry(&self, omega: f64) -> Result<Entry> {
        if !(omega.is_finite() && omega != 0.0) {
            return Err(GleError::Domain(format!("rhat needs finite nonzero omega, got {omega}")));
        }
        let w = omega.abs();
        let key = w.to_bits();
        if let Some(e) = self.cache.read().expect("cache poisoned").get(&key) {
            return Ok(*e);
        }
        let tol = default_tol(&self.kernel, w);
        let c = fourier_cos(&self.kernel, w, tol)?;
        let s = fourier_sin(&self.kernel, w, tol)?;
        let rhat = self.formula(w, c.value, s.value)?;
        let e = Entry { fc: c.value, fs: s.value, err: c.err_est.max(s.err_est), rhat };
        self.cache.write().expect("cache poisoned").insert(key, e);
        Ok(e)
    }

    fn formula(&self, w: f64, fc: f64, fs: f64) -> Result<f64> {
        let GleParams { m, lambda, beta } = self.params;
        let (num, den) = match self.regime {
            Regime::MzeroLzero => (2.0 * fc, PI * beta * (fc * fc + fs * fs)),
            _ => {
                let a = lambda + beta * fc;
                let b = m * w - beta * fs;
                (2.0 * lambda + 2.0 * beta * fc, 2.0 * PI * (a * a + b * b))
            }
        };
        if !(den > 0.0) || num < 0.0 {
            return Err(GleError::Inadmissible(format!(
                "nonpositive spectral denominator or negative numerator at omega = {w:e} (F_cos = {fc:e})"
            )));
        }
        Ok(num / den)
    }

    /// r̂(ω) for ω ≠ 0; even in ω.
    pub fn rhat(&self, omega: f64) -> Result<f64> {
        Ok(self.entry(omega)?.rhat)
    }

    /// (F_cos, F_sin, error estimate) at |ω|, shared with r̂.
    pub fn transforms(&self, omega: f64) -> Result<(f64, f64, f64)> {
        let e = self.entry(omega)?;
        Ok((e.fc, e.fs, e.err))
    }

    /// Number of cached frequencies.
    pub fn cache_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    /// r̂(0) (Integrable tail) or lim r̂(ω)/ω^{1-α} (power tail), by extrapolation.
    pub fn rhat_smallomega_scaled(&self) -> Result<LimitEstimate> {
        let expo = match self.tail {
            TailClass::Integrable => 0.0,
            TailClass::PowerTail { alpha, .. } => 1.0 - alpha,
        };
        let omegas: Vec<f64> = (0..24).map(|k| 1e-2 * 0.5f64.powi(k)).collect();
        let vals: Result<Vec<f64>> = omegas.iter().map(|&w| Ok(self.rhat(w)? / w.powf(expo))).collect();
        let (value, uncertainty) = extrapolate_geometric(&vals?);
        Ok(LimitEstimate { value, uncertainty })
    }

    /// Transform table extended with the r̂ column.
    pub fn build_table(&self, grid: &[f64]) -> Result<TransformTable> {
        validate_grid(grid)?;
        let rows: Result<Vec<Entry>> = grid.par_iter().map(|&w| self.entry(w)).collect();
        let rows = rows?;
        Ok(TransformTable {
            omegas: grid.to_vec(),
            f_cos: rows.iter().map(|e| e.fc).collect(),
            f_sin: rows.iter().map(|e| e.fs).collect(),
            err_est: rows.iter().map(|e| e.err).collect(),
            rhat: Some(rows.iter().map(|e| e.rhat).collect()),
        })
    }
}
