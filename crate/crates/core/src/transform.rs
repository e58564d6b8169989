//! Improper Fourier cosine/sine transforms and Abelian-limit diagnostics.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GleError, Result};
use crate::kernels::{decrease_onset, KernelSpec, OriginBehaviour, SamplingPlan, TailClass};
use crate::quadrature::{integrate_adaptive, WynnEpsilon};

/// Transform value with its error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub value: f64,
    pub err_est: f64,
    /// Second-mean-value bound 4K(A')/ω at the stopping point A' (0 for closed forms).
    pub tail_bound: f64,
    /// Number of half-period terms summed (0 for closed forms).
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Cos,
    Sin,
}

impl Weight {
    fn apply(self, x: f64) -> f64 {
        match self {
            Weight::Cos => x.cos(),
            Weight::Sin => x.sin(),
        }
    }
}

const MAX_TERMS: usize = 20_000;

/// Default absolute tolerance: 1e-9 for ω ≥ 1, scaled by ω^{α-1} below.
pub fn default_tol(spec: &KernelSpec, omega: f64) -> f64 {
    if omega >= 1.0 {
        return 1e-9;
    }
    match spec.classify_tail() {
        Ok(TailClass::PowerTail { alpha, .. }) => 1e-9 * omega.powf(alpha - 1.0),
        _ => 1e-9,
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(GleError::Domain(format!("omega = {omega} must be finite and > 0")));
    }
    Ok(())
}

fn closed(spec: &KernelSpec, omega: f64, w: Weight) -> Option<Result<TransformValue>> {
    spec.closed_form_transforms(omega).map(|r| {
        r.map(|(c, s)| {
            let v = if w == Weight::Cos { c } else { s };
            TransformValue { value: v, err_est: 4.0 * f64::EPSILON * v.abs(), tail_bound: 0.0, terms: 0 }
        })
    })
}

/// ∫₀^∞ K(t) cos(tω) dt.
pub fn fourier_cos(spec: &KernelSpec, omega: f64, tol: f64) -> Result<TransformValue> {
    check_omega(omega)?;
    closed(spec, omega, Weight::Cos).unwrap_or_else(|| fourier_numeric(spec, omega, Weight::Cos, tol))
}

/// ∫₀^∞ K(t) sin(tω) dt.
pub fn fourier_sin(spec: &KernelSpec, omega: f64, tol: f64) -> Result<TransformValue> {
    check_omega(omega)?;
    closed(spec, omega, Weight::Sin).unwrap_or_else(|| fourier_numeric(spec, omega, Weight::Sin, tol))
}

/// ∫₀^z K(t) w(ωt) dt with the origin singularity flattened by t = z v^q.
fn head_integral<W: Fn(f64) -> f64>(spec: &KernelSpec, z: f64, weight: W, tol: f64) -> (f64, f64) {
    match spec.origin() {
        OriginBehaviour::Singular { sigma, c0 } => {
            let q = 1.0 / (1.0 - sigma);
            let scale = q * z.powf(1.0 - sigma);
            let f = |v: f64| {
                let t = z * v.powf(q);
                // K(t) t^σ → c0 as t → 0
                let kt = if t > 0.0 { spec.eval(t).map(|k| k * t.powf(sigma)).unwrap_or(c0) } else { c0 };
                kt * scale * weight(t)
            };
            let r = integrate_adaptive(f, 0.0, 1.0, tol, 1e-14, 4000);
            (r.value, r.err_est)
        }
        OriginBehaviour::Finite { .. } => {
            let r = integrate_adaptive(|t| spec.eval(t).unwrap_or(f64::NAN) * weight(t), 0.0, z, tol, 1e-14, 4000);
            (r.value, r.err_est)
        }
    }
}

/// Accelerated sum of ∫ over consecutive half periods [z_j, z_{j+1}] starting at `z0`.
/// `env(t)` must bound |integrand weight factor| monotonically for the certified bound.
fn oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    env: impl Fn(f64) -> f64,
    z0: f64,
    half: f64,
    omega: f64,
    tol: f64,
    head: (f64, f64),
) -> Result<TransformValue> {
    let mut wynn = WynnEpsilon::new();
    let mut sum = head.0;
    let mut abs_sum = head.0.abs();
    let mut err_terms = head.1;
    let mut z = z0;
    for n in 1..=MAX_TERMS {
        let a = z;
        let b = z0 + n as f64 * half;
        let r = integrate_adaptive(&f, a, b, 1e-3 * tol, 1e-14, 200);
        sum += r.value;
        abs_sum += r.value.abs();
        err_terms += r.err_est;
        z = b;
        let (est, wynn_err) = wynn.push(sum);
        let bound = 4.0 * env(z) / omega;
        let floor = 8.0 * f64::EPSILON * abs_sum;
        if bound <= 1e-3 * tol {
            return Ok(TransformValue { value: sum, err_est: bound + err_terms + floor, tail_bound: bound, terms: n });
        }
        if n >= 6 && wynn_err.is_finite() && wynn_err < 0.5 * tol {
            return Ok(TransformValue { value: est, err_est: wynn_err + err_terms + floor, tail_bound: bound, terms: n });
        }
    }
    let bound = 4.0 * env(z) / omega;
    Err(GleError::NotConverged { value: sum, err_est: bound + err_terms, bound })
}

/// Numeric transform: adaptive head on [0, A'] and accelerated half-period tail.
pub fn fourier_numeric(spec: &KernelSpec, omega: f64, weight: Weight, tol: f64) -> Result<TransformValue> {
    check_omega(omega)?;
    spec.classify_tail()?;
    let onset = decrease_onset(spec, &SamplingPlan::default())
        .ok_or_else(|| GleError::Inadmissible("no onset of monotone decrease found".into()))?;
    let half = PI / omega;
    let offset = if weight == Weight::Cos { 0.5 * half } else { half };
    let j = ((onset - offset) / half).ceil().max(0.0);
    let z0 = offset + j * half;
    let w = move |t: f64| weight.apply(omega * t);
    let head = head_integral(spec, z0, w, 1e-2 * tol);
    let f = |t: f64| spec.eval(t).unwrap_or(f64::NAN) * w(t);
    let env = |t: f64| spec.eval(t).unwrap_or(f64::NAN);
    oscillatory_tail(f, env, z0, half, omega, tol, head)
}

/// Convex representation (1/ω²) ∫₀^∞ K''(t)(1 - cos tω) dt using analytic K''.
pub fn fourier_cos_convex(spec: &KernelSpec, omega: f64, tol: f64) -> Result<TransformValue> {
    check_omega(omega)?;
    if !spec.is_convex() {
        return Err(GleError::Precondition("convex representation requires a convex kernel".into()));
    }
    spec.classify_tail()?;
    let w2 = omega * omega;
    let half = PI / omega;
    let z = 0.5 * half;
    let tol_inner = tol * w2;
    // head on [0, z] of K''(t)·2 sin²(ωt/2)
    let head = match spec.origin() {
        OriginBehaviour::Singular { sigma, c0 } => {
            let q = 1.0 / (1.0 - sigma);
            let scale = q * z.powf(1.0 - sigma);
            let lim = sigma * (sigma + 1.0) * c0;
            let f = |v: f64| {
                let t = z * v.powf(q);
                if t > 0.0 {
                    let k2 = spec.derivative(2, t).map(|d| d * t.powf(sigma + 2.0)).unwrap_or(lim);
                    let s = (0.5 * omega * t).sin();
                    k2 * 2.0 * s * s / (t * t) * scale
                } else {
                    lim * 0.5 * w2 * scale
                }
            };
            let r = integrate_adaptive(f, 0.0, 1.0, 1e-2 * tol_inner, 1e-14, 4000);
            (r.value, r.err_est)
        }
        OriginBehaviour::Finite { .. } => {
            let f = |t: f64| {
                let s = (0.5 * omega * t).sin();
                spec.derivative(2, t).unwrap_or(f64::NAN) * 2.0 * s * s
            };
            let r = integrate_adaptive(f, 0.0, z, 1e-2 * tol_inner, 1e-14, 4000);
            (r.value, r.err_est)
        }
    };
    // tail: ∫_z^∞ K'' (1 - cos) = -K'(z) - ∫_z^∞ K'' cos
    let k1 = spec.derivative(1, z)?;
    let f = |t: f64| -spec.derivative(2, t).unwrap_or(f64::NAN) * (omega * t).cos();
    let env = |t: f64| spec.derivative(2, t).unwrap_or(f64::NAN).abs();
    let tail = oscillatory_tail(f, env, z, half, omega, tol_inner, (head.0 - k1, head.1))?;
    Ok(TransformValue {
        value: tail.value / w2,
        err_est: tail.err_est / w2,
        tail_bound: tail.tail_bound / w2,
        terms: tail.terms,
    })
}

/// Aitken three-point extrapolation of a geometrically converging sequence.
/// Returns (limit, uncertainty = last increment of the extrapolated estimates).
pub fn extrapolate_geometric(xs: &[f64]) -> (f64, f64) {
    let aitken = |x0: f64, x1: f64, x2: f64| {
        let d1 = x1 - x0;
        let d2 = x2 - x1;
        let den = d2 - d1;
        if d1 * d2 > 0.0 && den.abs() > 1e-300 && d2.abs() < d1.abs() {
            x2 - d2 * d2 / den
        } else {
            x2
        }
    };
    let n = xs.len();
    match n {
        0 => (f64::NAN, f64::INFINITY),
        1 => (xs[0], f64::INFINITY),
        2 => (xs[1], (xs[1] - xs[0]).abs()),
        3 => (aitken(xs[0], xs[1], xs[2]), (xs[2] - xs[1]).abs()),
        _ => {
            let l = aitken(xs[n - 3], xs[n - 2], xs[n - 1]);
            let p = aitken(xs[n - 4], xs[n - 3], xs[n - 2]);
            (l, (l - p).abs())
        }
    }
}

/// Scaled transforms along a geometric ω sequence with extrapolated limits and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianReport {
    pub omegas: Vec<f64>,
    pub scaled_cos: Vec<f64>,
    pub scaled_sin: Vec<f64>,
    pub limit_cos: f64,
    pub limit_sin: f64,
    pub unc_cos: f64,
    pub unc_sin: f64,
    pub target_cos: f64,
    pub target_sin: f64,
}

fn scaled_sequence(spec: &KernelSpec, omegas: &[f64], power: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let vals: Result<Vec<(f64, f64)>> = omegas
        .par_iter()
        .map(|&w| {
            let tol = default_tol(spec, w) * 1e-2;
            let c = fourier_cos(spec, w, tol)?.value;
            let s = fourier_sin(spec, w, tol)?.value;
            Ok((w.powf(power.0) * c, w.powf(power.1) * s))
        })
        .collect();
    Ok(vals?.into_iter().unzip())
}

/// lim_{ω→0} ω^{1-α} F_cos(ω), ω^{1-α} F_sin(ω) for power-tail kernels.
pub fn abelian_small_omega(spec: &KernelSpec, alpha: f64) -> Result<AbelianReport> {
    let TailClass::PowerTail { alpha: a, c } = spec.classify_tail()? else {
        return Err(GleError::Precondition("small-omega Abelian limit needs a power-tail kernel".into()));
    };
    if (a - alpha).abs() > 1e-12 {
        return Err(GleError::Precondition(format!("alpha {alpha} does not match the kernel tail exponent {a}")));
    }
    let omegas: Vec<f64> = (0..10).map(|k| 1e-2 * 0.5f64.powi(k)).collect();
    let (sc, ss) = scaled_sequence(spec, &omegas, (1.0 - alpha, 1.0 - alpha))?;
    let (lc, uc) = extrapolate_geometric(&sc);
    let (ls, us) = extrapolate_geometric(&ss);
    Ok(AbelianReport {
        omegas,
        scaled_cos: sc,
        scaled_sin: ss,
        limit_cos: lc,
        limit_sin: ls,
        unc_cos: uc,
        unc_sin: us,
        target_cos: c * crate::special::cos_power_integral(alpha),
        target_sin: c * crate::special::sin_power_integral(alpha),
    })
}

/// Large-ω limits. Under V (finite K(0)): ω^{2-σ1}F_cos → 0 and ωF_sin → K(0).
/// Under VI: ω^{1-σ2}F_cos, ω^{1-σ2}F_sin → c0Γ(1-σ2)(sin, cos)(πσ2/2).
/// `sigma` overrides σ1 (default 0.5) or σ2 (default: the measured origin exponent).
pub fn abelian_large_omega(spec: &KernelSpec, sigma: Option<f64>) -> Result<AbelianReport> {
    if !spec.satisfies_assumption2() {
        return Err(GleError::Precondition("large-omega Abelian limits need Assumption 2".into()));
    }
    let omegas: Vec<f64> = (0..10).map(|k| 1e2 * 2f64.powi(k)).collect();
    match spec.origin() {
        OriginBehaviour::Finite { k0 } => {
            let s1 = sigma.unwrap_or(0.5);
            let (sc, ss) = scaled_sequence(spec, &omegas, (2.0 - s1, 1.0))?;
            let (lc, uc) = extrapolate_geometric(&sc);
            let (ls, us) = extrapolate_geometric(&ss);
            Ok(AbelianReport {
                omegas,
                scaled_cos: sc,
                scaled_sin: ss,
                limit_cos: lc,
                limit_sin: ls,
                unc_cos: uc,
                unc_sin: us,
                target_cos: 0.0,
                target_sin: k0,
            })
        }
        OriginBehaviour::Singular { sigma: s_nat, c0 } => {
            let s2 = sigma.unwrap_or(s_nat);
            let (sc, ss) = scaled_sequence(spec, &omegas, (1.0 - s2, 1.0 - s2))?;
            let (lc, uc) = extrapolate_geometric(&sc);
            let (ls, us) = extrapolate_geometric(&ss);
            Ok(AbelianReport {
                omegas,
                scaled_cos: sc,
                scaled_sin: ss,
                limit_cos: lc,
                limit_sin: ls,
                unc_cos: uc,
                unc_sin: us,
                target_cos: c0 * crate::special::cos_power_integral(s2),
                target_sin: c0 * crate::special::sin_power_integral(s2),
            })
        }
    }
}

/// Sampled transforms, optionally extended with r̂.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformTable {
    pub omegas: Vec<f64>,
    pub f_cos: Vec<f64>,
    pub f_sin: Vec<f64>,
    pub err_est: Vec<f64>,
    pub rhat: Option<Vec<f64>>,
}

/// Rejects grids that are not strictly increasing and positive.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(GleError::Precondition("frequency grid must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GleError::Precondition("frequency grid must be strictly increasing".into()));
    }
    Ok(())
}

impl TransformTable {
    /// Evaluates both transforms at every grid point (concurrently).
    pub fn build(spec: &KernelSpec, grid: &[f64], tol: Option<f64>) -> Result<Self> {
        validate_grid(grid)?;
        let rows: Result<Vec<(f64, f64, f64)>> = grid
            .par_iter()
            .map(|&w| {
                let t = tol.unwrap_or_else(|| default_tol(spec, w));
                let c = fourier_cos(spec, w, t)?;
                let s = fourier_sin(spec, w, t)?;
                Ok((c.value, s.value, c.err_est.max(s.err_est)))
            })
            .collect();
        let rows = rows?;
        Ok(TransformTable {
            omegas: grid.to_vec(),
            f_cos: rows.iter().map(|r| r.0).collect(),
            f_sin: rows.iter().map(|r| r.1).collect(),
            err_est: rows.iter().map(|r| r.2).collect(),
            rhat: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RouseModes;

    fn exp1() -> KernelSpec {
        KernelSpec::exponential(1.0).unwrap()
    }

    #[test]
    fn exponential_closed_and_numeric() {
        let k = exp1();
        assert!((fourier_cos(&k, 1.0, 1e-10).unwrap().value - 0.5).abs() < 1e-15);
        assert!((fourier_sin(&k, 1.0, 1e-10).unwrap().value - 0.5).abs() < 1e-15);
        let kn = exp1().without_closed_form();
        let c = fourier_cos(&kn, 1.0, 1e-11).unwrap();
        let s = fourier_sin(&kn, 1.0, 1e-11).unwrap();
        assert!((c.value - 0.5).abs() < 1e-10, "{c:?}");
        assert!((s.value - 0.5).abs() < 1e-10, "{s:?}");
        assert!((c.value - 0.5).abs() <= 3.0 * c.err_est.max(1e-16));
    }

    #[test]
    fn fresnel_numeric() {
        let k = KernelSpec::power_law_alpha(1.0, 0.5).unwrap().without_closed_form();
        let t = (PI / 2.0).sqrt();
        let c = fourier_cos(&k, 1.0, 1e-10).unwrap();
        let s = fourier_sin(&k, 1.0, 1e-10).unwrap();
        assert!((c.value - t).abs() < 1e-8, "{c:?}");
        assert!((s.value - t).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn sine_transform_large_omega() {
        let v = fourier_sin(&exp1(), 1e6, 1e-12).unwrap().value;
        assert!((v - 1e6 / (1.0 + 1e12)).abs() < 1e-20);
    }

    #[test]
    fn rouse_with_constant_mode_rejected() {
        let k = KernelSpec::rouse(2.0, 1.0, RouseModes::Finite(4)).unwrap();
        assert!(matches!(fourier_cos(&k, 1.0, 1e-9), Err(GleError::Inadmissible(_))));
        let kn = k.without_closed_form();
        assert!(matches!(fourier_cos(&kn, 1.0, 1e-9), Err(GleError::Inadmissible(_))));
    }

    #[test]
    fn rouse_limit_closed_form_matches_numeric() {
        let k = KernelSpec::rouse(2.0, 1.0, RouseModes::Limit).unwrap();
        let kn = k.clone().without_closed_form();
        for &w in &[0.05, 1.0, 7.0] {
            let a = fourier_cos(&k, w, 1e-10).unwrap().value;
            let b = fourier_cos(&kn, w, 1e-10).unwrap().value;
            assert!((a - b).abs() < 1e-8, "ω={w}: {a} vs {b}");
            let a = fourier_sin(&k, w, 1e-10).unwrap().value;
            let b = fourier_sin(&kn, w, 1e-10).unwrap().value;
            assert!((a - b).abs() < 1e-8, "ω={w}: {a} vs {b}");
        }
    }

    #[test]
    fn gaussian_closed_form_matches_numeric() {
        let k = KernelSpec::squared_cm(vec![(1.0, 1.0), (0.5, 3.0)]).unwrap();
        let kn = k.clone().without_closed_form();
        for &w in &[0.2, 1.0, 4.0] {
            let a = fourier_cos(&k, w, 1e-11).unwrap().value;
            let b = fourier_cos(&kn, w, 1e-11).unwrap().value;
            assert!((a - b).abs() < 1e-9, "cos ω={w}: {a} vs {b}");
            let a = fourier_sin(&k, w, 1e-11).unwrap().value;
            let b = fourier_sin(&kn, w, 1e-11).unwrap().value;
            assert!((a - b).abs() < 1e-9, "sin ω={w}: {a} vs {b}");
        }
    }

    #[test]
    fn convex_representation_agrees() {
        let k = exp1();
        let v = fourier_cos_convex(&k, 1.0, 1e-11).unwrap();
        assert!((v.value - 0.5).abs() < 1e-9, "{v:?}");
        let p = KernelSpec::power_law_alpha(1.0, 0.5).unwrap();
        let a = fourier_cos(&p, 2.0, 1e-12).unwrap().value;
        let b = fourier_cos_convex(&p, 2.0, 1e-11).unwrap();
        assert!((a - b.value).abs() < 1e-8, "{a} vs {b:?}");
        let g = KernelSpec::squared_cm(vec![(1.0, 1.0)]).unwrap();
        assert!(matches!(fourier_cos_convex(&g, 1.0, 1e-9), Err(GleError::Precondition(_))));
    }

    #[test]
    fn abelian_small_examples() {
        let k = KernelSpec::power_law_alpha(1.0, 0.5).unwrap();
        let r = abelian_small_omega(&k, 0.5).unwrap();
        let t = (PI / 2.0).sqrt();
        assert!((r.limit_cos - t).abs() < 1e-10 && (r.limit_sin - t).abs() < 1e-10);
        let rl = KernelSpec::rouse(2.0, 1.0, RouseModes::Limit).unwrap();
        let r = abelian_small_omega(&rl, 0.5).unwrap();
        let target = PI.sqrt() / 2.0 * t;
        assert!((r.target_cos - target).abs() < 1e-12);
        assert!((r.limit_cos - target).abs() < 1e-3 * target, "{r:?}");
        assert!(abelian_small_omega(&exp1(), 0.5).is_err());
    }

    #[test]
    fn abelian_large_examples() {
        let r = abelian_large_omega(&exp1(), Some(0.5)).unwrap();
        assert!((r.limit_sin - 1.0).abs() < 1e-6);
        assert!(r.scaled_cos.last().unwrap().abs() < 0.01);
        let p = KernelSpec::power_law_alpha(1.0, 0.5).unwrap();
        let r = abelian_large_omega(&p, Some(0.5)).unwrap();
        assert!((r.limit_cos - (PI / 2.0).sqrt()).abs() < 1e-10);
        let g = KernelSpec::squared_cm(vec![(1.0, 1.0)]).unwrap();
        assert!(abelian_large_omega(&g, None).is_err());
    }

    #[test]
    fn table_grid_validation() {
        let k = exp1();
        assert!(TransformTable::build(&k, &[], None).unwrap().omegas.is_empty());
        assert!(TransformTable::build(&k, &[2.0, 1.0], None).is_err());
        let t = TransformTable::build(&k, &[1.0], None).unwrap();
        assert!((t.f_cos[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_of_geometric_sequence() {
        let xs: Vec<f64> = (0..6).map(|k| 3.0 + 0.7 * 0.5f64.powi(k)).collect();
        let (l, u) = extrapolate_geometric(&xs);
        assert!((l - 3.0).abs() < 1e-12 && u < 1e-10);
    }
}
