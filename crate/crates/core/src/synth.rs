//! Spectral synthesis of X(t) ensembles and their empirical statistics.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GleError, Result};
use crate::msd::{CovarianceGrid, MsdCurve, MsdEngine};
use crate::spectral::SpectralDensity;

/// How a cell's variance is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRule {
    /// r̂ at the cell midpoint times the width.
    Midpoint,
    /// Mean of r̂ at the two cell edges times the width.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    /// Lowest resolved frequency; the geometric grid starts here.
    pub omega_min: f64,
    /// Boundary between geometric and linear cells.
    pub omega_split: f64,
    /// Linear cell width above `omega_split`.
    pub d_omega: f64,
    /// Highest frequency Ω.
    pub omega_max: f64,
    pub cell_rule: CellRule,
    /// Allowed truncated spectral mass relative to msd(T).
    pub mass_budget: f64,
    /// Allowed phase change T·Δω across one cell.
    pub max_cell_phase: f64,
}

impl SynthesisConfig {
    /// Grid chosen from the horizon T = n_steps·dt: Δω = 0.1/T, ω_min = 10⁻³/T,
    /// Ω = max(4π/dt, 20).
    pub fn auto(dt: f64, n_steps: usize, n_paths: usize) -> Self {
        let horizon = dt * n_steps as f64;
        SynthesisConfig {
            dt,
            n_steps,
            n_paths,
            omega_min: 1e-3 / horizon,
            omega_split: 1.0,
            d_omega: (0.1 / horizon).min(0.01),
            omega_max: (4.0 * PI / dt).max(20.0),
            cell_rule: CellRule::Midpoint,
            mass_budget: 1e-3,
            max_cell_phase: 0.1,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GleError::Domain(format!("{name} = {v} must be > 0")))
            }
        };
        pos(self.dt, "dt")?;
        pos(self.omega_min, "omega_min")?;
        pos(self.d_omega, "d_omega")?;
        pos(self.mass_budget, "mass_budget")?;
        pos(self.max_cell_phase, "max_cell_phase")?;
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(GleError::Domain("n_steps and n_paths must be >= 1".into()));
        }
        if !(self.omega_min < self.omega_split && self.omega_split < self.omega_max) {
            return Err(GleError::Domain("need omega_min < omega_split < omega_max".into()));
        }
        Ok(())
    }
}

/// Frequency cells (left edge, right edge).
pub fn frequency_cells(cfg: &SynthesisConfig) -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    let q = 1.0 + cfg.d_omega / cfg.omega_split;
    let n_geo = ((cfg.omega_split / cfg.omega_min).ln() / q.ln()).ceil() as usize;
    let q = (cfg.omega_split / cfg.omega_min).powf(1.0 / n_geo as f64);
    for k in 0..n_geo {
        cells.push((cfg.omega_min * q.powi(k as i32), cfg.omega_min * q.powi(k as i32 + 1)));
    }
    if let Some(last) = cells.last_mut() {
        last.1 = cfg.omega_split;
    }
    let n_lin = ((cfg.omega_max - cfg.omega_split) / cfg.d_omega).ceil() as usize;
    let h = (cfg.omega_max - cfg.omega_split) / n_lin as f64;
    for k in 0..n_lin {
        cells.push((cfg.omega_split + k as f64 * h, cfg.omega_split + (k + 1) as f64 * h));
    }
    cells
}

/// Simulated trajectories; positions are row-major n_paths × (n_steps + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub master_seed: u64,
    pub positions: Vec<f64>,
    pub omega_max: f64,
    pub n_modes: usize,
}

impl PathEnsemble {
    pub fn path(&self, p: usize) -> &[f64] {
        let w = self.n_steps + 1;
        &self.positions[p * w..(p + 1) * w]
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|j| j as f64 * self.dt).collect()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.path(p)[j]).collect()
    }
}

/// Pairwise summation in a fixed tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

/// Gaussian pairs for one path: stream `path` of a ChaCha8 generator seeded by
/// `master_seed`; mode k consumes words 4k..4k+3, so draws are keyed by (seed, path, mode).
fn gaussian_pairs(master_seed: u64, path: usize, n_modes: usize, xi: &mut [f64], eta: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path as u64);
    let unit = |x: u64| ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    for k in 0..n_modes {
        let u1 = unit(rng.next_u64());
        let u2 = unit(rng.next_u64());
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        xi[k] = r * c;
        eta[k] = r * s;
    }
}

/// Spectral mass outside [ω_min, Ω] relative to msd(T).
fn truncated_mass(sd: &SpectralDensity, cfg: &SynthesisConfig, msd_t: f64) -> Result<(f64, f64)> {
    let t = cfg.horizon();
    let lo = sd.rhat(cfg.omega_min)?;
    let low = 2.0 * t * t * lo * cfg.omega_min;
    let (r1, r2) = (sd.rhat(cfg.omega_max)?, sd.rhat(2.0 * cfg.omega_max)?);
    let s = if r1 > 0.0 && r2 > 0.0 { (r2 / r1).log2() } else { -2.0 };
    let high = if s < 0.95 { 8.0 * r1 / (cfg.omega_max * (1.0 - s)) } else { f64::INFINITY };
    Ok((low / msd_t, high / msd_t))
}

/// Spectral synthesis: X(t_j) = Σ_k √(2 r̂_k Δω_k)[ξ_k(1 - cos ω_k t_j) + η_k sin ω_k t_j]/ω_k.
pub fn synthesize(sd: &SpectralDensity, cfg: &SynthesisConfig, master_seed: u64) -> Result<PathEnsemble> {
    cfg.validate()?;
    let horizon = cfg.horizon();
    let t_max = 0.1 * 2.0 * PI / cfg.omega_min;
    if horizon > t_max {
        return Err(GleError::Budget(format!("horizon {horizon} exceeds fidelity limit 0.1*2pi/omega_min = {t_max}")));
    }
    let cells = frequency_cells(cfg);
    let widest = cells.iter().map(|c| c.1 - c.0).fold(0.0, f64::max);
    if horizon * widest > cfg.max_cell_phase {
        return Err(GleError::Budget(format!(
            "cell phase T*dw = {:.3e} exceeds {:.3e}; reduce d_omega",
            horizon * widest,
            cfg.max_cell_phase
        )));
    }
    let msd_t = MsdEngine::new(sd).msd_raw(horizon)?.value;
    let (low, high) = truncated_mass(sd, cfg, msd_t)?;
    if low + high > cfg.mass_budget {
        return Err(GleError::Budget(format!(
            "truncated spectral mass below omega_min {low:.3e} + above Omega {high:.3e} exceeds {:.3e}",
            cfg.mass_budget
        )));
    }
    let modes: Result<Vec<(f64, f64)>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let w = 0.5 * (a + b);
            let r = match cfg.cell_rule {
                CellRule::Midpoint => sd.rhat(w)?,
                CellRule::Trapezoid => 0.5 * (sd.rhat(a)? + sd.rhat(b)?),
            };
            Ok((w, (2.0 * r * (b - a)).sqrt() / w))
        })
        .collect();
    let modes = modes?;
    let m = modes.len();
    let nt = cfg.n_steps + 1;
    // basis[j] = (amp(1 - cos ωt_j), amp sin ωt_j) per mode
    let basis: Vec<(Vec<f64>, Vec<f64>)> = (0..nt)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 * cfg.dt;
            modes
                .iter()
                .map(|&(w, amp)| {
                    let (s, c) = (0.5 * w * t).sin_cos();
                    (amp * 2.0 * s * s, amp * 2.0 * s * c)
                })
                .unzip()
        })
        .collect();
    let mut positions = vec![0.0; cfg.n_paths * nt];
    positions.par_chunks_mut(nt).enumerate().for_each(|(p, row)| {
        let mut xi = vec![0.0; m];
        let mut eta = vec![0.0; m];
        gaussian_pairs(master_seed, p, m, &mut xi, &mut eta);
        for (j, x) in row.iter_mut().enumerate().skip(1) {
            let (c, s) = &basis[j];
            let mut acc = 0.0;
            for k in 0..m {
                acc += c[k] * xi[k] + s[k] * eta[k];
            }
            *x = acc;
        }
    });
    Ok(PathEnsemble {
        dt: cfg.dt,
        n_steps: cfg.n_steps,
        n_paths: cfg.n_paths,
        master_seed,
        positions,
        omega_max: cfg.omega_max,
        n_modes: m,
    })
}

/// Per-time ensemble statistics of X(t).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMsd {
    pub curve: MsdCurve,
    /// Standard error of the mean of X² per time.
    pub se: Vec<f64>,
    /// Sample kurtosis of X(t) per time (NaN where the variance vanishes).
    pub kurtosis: Vec<f64>,
    /// Standard error of the ensemble mean of X(t).
    pub mean_x: Vec<f64>,
    pub mean_x_se: Vec<f64>,
}

/// Sample mean of X², its standard error, kurtosis and mean per time.
pub fn empirical_msd(ens: &PathEnsemble) -> Result<EmpiricalMsd> {
    if ens.n_paths < 2 {
        return Err(GleError::Precondition("empirical statistics need at least 2 paths".into()));
    }
    let n = ens.n_paths as f64;
    let stats: Vec<(f64, f64, f64, f64, f64)> = (0..=ens.n_steps)
        .into_par_iter()
        .map(|j| {
            let col = ens.column(j);
            let sq: Vec<f64> = col.iter().map(|x| x * x).collect();
            let m2 = mean(&sq);
            let var_sq = mean(&sq.iter().map(|v| (v - m2).powi(2)).collect::<Vec<_>>()) * n / (n - 1.0);
            let mx = mean(&col);
            let c2: Vec<f64> = col.iter().map(|x| (x - mx).powi(2)).collect();
            let cm2 = mean(&c2);
            let cm4 = mean(&c2.iter().map(|v| v * v).collect::<Vec<_>>());
            let kurt = if cm2 > 0.0 { cm4 / (cm2 * cm2) } else { f64::NAN };
            let se_x = (cm2 * n / (n - 1.0) / n).sqrt();
            (m2, (var_sq / n).sqrt(), kurt, mx, se_x)
        })
        .collect();
    Ok(EmpiricalMsd {
        curve: MsdCurve {
            times: ens.times(),
            values: stats.iter().map(|s| s.0).collect(),
            errors: stats.iter().map(|s| s.1).collect(),
            regime: None,
            fitted: None,
            predicted: None,
        },
        se: stats.iter().map(|s| s.1).collect(),
        kurtosis: stats.iter().map(|s| s.2).collect(),
        mean_x: stats.iter().map(|s| s.3).collect(),
        mean_x_se: stats.iter().map(|s| s.4).collect(),
    })
}

/// Time-averaged MSD per path at a lag of `lag_steps` steps.
pub fn time_averaged_msd(ens: &PathEnsemble, lag_steps: usize) -> Result<Vec<f64>> {
    if lag_steps == 0 || lag_steps > ens.n_steps {
        return Err(GleError::Domain(format!("lag {lag_steps} must lie in 1..={}", ens.n_steps)));
    }
    Ok((0..ens.n_paths)
        .map(|p| {
            let x = ens.path(p);
            let d: Vec<f64> = (0..=ens.n_steps - lag_steps).map(|j| (x[j + lag_steps] - x[j]).powi(2)).collect();
            mean(&d)
        })
        .collect())
}

/// Ensemble variance of the increment X(t_j + lag) - X(t_j) with its standard error.
pub fn increment_variance(ens: &PathEnsemble, j: usize, lag_steps: usize) -> Result<(f64, f64)> {
    if j + lag_steps > ens.n_steps || lag_steps == 0 {
        return Err(GleError::Domain("increment outside the time grid".into()));
    }
    let sq: Vec<f64> = (0..ens.n_paths).map(|p| (ens.path(p)[j + lag_steps] - ens.path(p)[j]).powi(2)).collect();
    let m = mean(&sq);
    let n = sq.len() as f64;
    let v = mean(&sq.iter().map(|x| (x - m).powi(2)).collect::<Vec<_>>()) * n / (n - 1.0);
    Ok((m, (v / n).sqrt()))
}

/// Sample covariance on a subset of time indices, with entrywise standard errors.
pub fn empirical_covariance(ens: &PathEnsemble, indices: &[usize]) -> Result<(CovarianceGrid, Vec<Vec<f64>>)> {
    if ens.n_paths < 2 {
        return Err(GleError::Precondition("empirical covariance needs at least 2 paths".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i > ens.n_steps) {
        return Err(GleError::Domain(format!("time index {bad} outside 0..={}", ens.n_steps)));
    }
    let n = ens.n_paths as f64;
    let cols: Vec<Vec<f64>> = indices.iter().map(|&j| ens.column(j)).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let k = indices.len();
    let mut cov = vec![vec![0.0; k]; k];
    let mut se = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..=a {
            let prod: Vec<f64> = cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - means[a]) * (y - means[b])).collect();
            let c = pairwise_sum(&prod) / (n - 1.0);
            let mp = mean(&prod);
            let v = mean(&prod.iter().map(|p| (p - mp).powi(2)).collect::<Vec<_>>()) * n / (n - 1.0);
            cov[a][b] = c;
            cov[b][a] = c;
            se[a][b] = (v / n).sqrt();
            se[b][a] = se[a][b];
        }
    }
    let times = indices.iter().map(|&j| j as f64 * ens.dt).collect();
    Ok((CovarianceGrid { times, cov, err: se.clone() }, se))
}

/// Raw-path dump: "GLEP", version u32, n_paths u64, n_steps u64, dt f64, then
/// row-major f64 positions; all little-endian.
pub const DUMP_MAGIC: &[u8; 4] = b"GLEP";
pub const DUMP_VERSION: u32 = 1;

pub fn write_binary<W: std::io::Write>(ens: &PathEnsemble, mut w: W) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(ens.n_paths as u64).to_le_bytes())?;
    w.write_all(&(ens.n_steps as u64).to_le_bytes())?;
    w.write_all(&ens.dt.to_le_bytes())?;
    for x in &ens.positions {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()
}

/// Reads a dump back as (n_paths, n_steps, dt, positions).
pub fn read_binary<R: std::io::Read>(mut r: R) -> Result<(usize, usize, f64, Vec<f64>)> {
    let io = |e: std::io::Error| GleError::Domain(format!("path dump: {e}"));
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(io)?;
    if &b4 != DUMP_MAGIC {
        return Err(GleError::Domain("path dump: bad magic".into()));
    }
    r.read_exact(&mut b4).map_err(io)?;
    if u32::from_le_bytes(b4) != DUMP_VERSION {
        return Err(GleError::Domain("path dump: unsupported version".into()));
    }
    r.read_exact(&mut b8).map_err(io)?;
    let n_paths = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let n_steps = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let dt = f64::from_le_bytes(b8);
    let len = n_paths
        .checked_mul(n_steps + 1)
        .ok_or_else(|| GleError::Domain("path dump: size overflow".into()))?;
    let mut positions = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b8).map_err(io)?;
        positions.push(f64::from_le_bytes(b8));
    }
    Ok((n_paths, n_steps, dt, positions))
}
