//! Memory-kernel families, tail classification and admissibility checks.

use std::f64::consts::PI;

use crate::error::{GleError, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::special::{dawson, gamma, lower_incomplete_gamma};

/// Mode set of a generalized Rouse kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RouseModes {
    /// (1/N) Σ_{k=0}^{N-1} e^{-|t/τ0| (k/N)^p}; the k=0 term is the constant 1/N.
    Finite(usize),
    /// (1/N) Σ_{k=1}^{N} e^{-|t/τ0| (k/N)^p}; drops the constant term.
    FiniteShifted(usize),
    /// ∫₀¹ e^{-|t/τ0| x^p} dx.
    Limit,
}

/// Kernel family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// Σ c_k e^{-λ_k |t|}, c_k > 0, λ_k > 0.
    SumOfExponentials(Vec<(f64, f64)>),
    GeneralizedRouse { p: f64, tau0: f64, modes: RouseModes },
    /// 2H(2H-1)|t|^{2H-2}.
    PowerLawH { h: f64 },
    /// c |t|^{-α}.
    PowerLawAlpha { c: f64, alpha: f64 },
    /// Σ w_k e^{-x_k |t|}, w_k > 0, x_k ≥ 0.
    CompletelyMonotoneAtoms(Vec<(f64, f64)>),
    /// Σ w_k e^{-x_k t²}.
    SquaredArgumentCM(Vec<(f64, f64)>),
    /// Σ w_j K_j(t) with w_j > 0.
    WeightedSum(Vec<(f64, KernelSpec)>),
}

/// An immutable memory kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    closed_form: bool,
}

/// Long-time class of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    Integrable,
    /// K(t) ~ c t^{-α}, α ∈ (0,1).
    PowerTail { alpha: f64, c: f64 },
}

impl TailClass {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            TailClass::Integrable => None,
            TailClass::PowerTail { alpha, .. } => Some(*alpha),
        }
    }
}

/// Behaviour at the origin relevant to the large-ω conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginBehaviour {
    /// K(0) finite.
    Finite { k0: f64 },
    /// K(t) ~ c0 t^{-σ} as t → 0.
    Singular { sigma: f64, c0: f64 },
}

fn check_atoms(atoms: &[(f64, f64)], allow_zero_rate: bool, what: &str) -> Result<()> {
    if atoms.is_empty() {
        return Err(GleError::InvalidKernel(format!("{what}: empty atom list")));
    }
    for &(w, r) in atoms {
        if !(w.is_finite() && w > 0.0) {
            return Err(GleError::InvalidKernel(format!("{what}: weight {w} must be > 0")));
        }
        let ok = if allow_zero_rate { r >= 0.0 } else { r > 0.0 };
        if !(r.is_finite() && ok) {
            let bound = if allow_zero_rate { ">= 0" } else { "> 0" };
            return Err(GleError::InvalidKernel(format!("{what}: rate {r} must be {bound}")));
        }
    }
    Ok(())
}

impl KernelSpec {
    fn new(family: KernelFamily) -> Self {
        KernelSpec { family, closed_form: true }
    }

    pub fn sum_of_exponentials(terms: Vec<(f64, f64)>) -> Result<Self> {
        check_atoms(&terms, false, "SumOfExponentials")?;
        Ok(Self::new(KernelFamily::SumOfExponentials(terms)))
    }

    /// Single exponential e^{-rate |t|}.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::sum_of_exponentials(vec![(1.0, rate)])
    }

    pub fn rouse(p: f64, tau0: f64, modes: RouseModes) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(GleError::InvalidKernel(format!("Rouse: p = {p} must be >= 1")));
        }
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(GleError::InvalidKernel(format!("Rouse: tau0 = {tau0} must be > 0")));
        }
        if let RouseModes::Finite(0) | RouseModes::FiniteShifted(0) = modes {
            return Err(GleError::InvalidKernel("Rouse: N must be >= 1".into()));
        }
        Ok(Self::new(KernelFamily::GeneralizedRouse { p, tau0, modes }))
    }

    pub fn power_law_h(h: f64) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) {
            return Err(GleError::InvalidKernel(format!("PowerLawH: H = {h} must lie in (1/2, 1)")));
        }
        Ok(Self::new(KernelFamily::PowerLawH { h }))
    }

    pub fn power_law_alpha(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(GleError::InvalidKernel(format!("PowerLawAlpha: c = {c} must be > 0")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(GleError::InvalidKernel(format!("PowerLawAlpha: alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(Self::new(KernelFamily::PowerLawAlpha { c, alpha }))
    }

    pub fn cm_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        check_atoms(&atoms, true, "CompletelyMonotoneAtoms")?;
        Ok(Self::new(KernelFamily::CompletelyMonotoneAtoms(atoms)))
    }

    pub fn squared_cm(base: Vec<(f64, f64)>) -> Result<Self> {
        check_atoms(&base, true, "SquaredArgumentCM")?;
        Ok(Self::new(KernelFamily::SquaredArgumentCM(base)))
    }

    pub fn weighted_sum(parts: Vec<(f64, KernelSpec)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(GleError::InvalidKernel("WeightedSum: no components".into()));
        }
        if let Some((w, _)) = parts.iter().find(|(w, _)| !(w.is_finite() && *w > 0.0)) {
            return Err(GleError::InvalidKernel(format!("WeightedSum: weight {w} must be > 0")));
        }
        Ok(Self::new(KernelFamily::WeightedSum(parts)))
    }

    /// Same kernel with closed-form transforms disabled (forces the numeric path).
    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = false;
        if let KernelFamily::WeightedSum(parts) = &mut self.family {
            for (_, k) in parts.iter_mut() {
                *k = k.clone().without_closed_form();
            }
        }
        self
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form
    }

    /// Exponential atoms (weight, rate) for families that are finite exponential sums.
    pub fn exponential_atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.family {
            KernelFamily::SumOfExponentials(a) | KernelFamily::CompletelyMonotoneAtoms(a) => Some(a.clone()),
            KernelFamily::GeneralizedRouse { p, tau0, modes } => {
                let (lo, n) = match *modes {
                    RouseModes::Finite(n) => (0, n),
                    RouseModes::FiniteShifted(n) => (1, n),
                    RouseModes::Limit => return None,
                };
                let w = 1.0 / n as f64;
                Some((lo..lo + n).map(|k| (w, (k as f64 / n as f64).powf(*p) / tau0)).collect())
            }
            _ => None,
        }
    }

    /// Behaviour of K near t = 0.
    pub fn origin(&self) -> OriginBehaviour {
        match &self.family {
            KernelFamily::PowerLawH { h } => {
                OriginBehaviour::Singular { sigma: 2.0 - 2.0 * h, c0: 2.0 * h * (2.0 * h - 1.0) }
            }
            KernelFamily::PowerLawAlpha { c, alpha } => OriginBehaviour::Singular { sigma: *alpha, c0: *c },
            KernelFamily::WeightedSum(parts) => {
                let mut k0 = 0.0;
                let mut sing: Option<(f64, f64)> = None;
                for (w, k) in parts {
                    match k.origin() {
                        OriginBehaviour::Finite { k0: v } => k0 += w * v,
                        OriginBehaviour::Singular { sigma, c0 } => {
                            sing = match sing {
                                None => Some((sigma, w * c0)),
                                Some((s, _)) if sigma > s => Some((sigma, w * c0)),
                                Some((s, c)) if sigma == s => Some((s, c + w * c0)),
                                other => other,
                            };
                        }
                    }
                }
                match sing {
                    Some((sigma, c0)) => OriginBehaviour::Singular { sigma, c0 },
                    None => OriginBehaviour::Finite { k0 },
                }
            }
            KernelFamily::SumOfExponentials(a)
            | KernelFamily::CompletelyMonotoneAtoms(a)
            | KernelFamily::SquaredArgumentCM(a) => OriginBehaviour::Finite { k0: a.iter().map(|x| x.0).sum() },
            KernelFamily::GeneralizedRouse { .. } => OriginBehaviour::Finite { k0: 1.0 },
        }
    }

    /// K(|t|). Errors at t = 0 for kernels with K(0) = ∞.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.derivative(0, t)
    }

    /// d^n K / dt^n at |t| > 0 (n ≤ 2), or at t = 0 where finite.
    pub fn derivative(&self, n: u32, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(GleError::Domain(format!("t = {t} is not finite")));
        }
        if n > 2 {
            return Err(GleError::Domain(format!("derivative order {n} unsupported")));
        }
        let t = t.abs();
        let sgn = if n % 2 == 1 { -1.0 } else { 1.0 };
        let v = match &self.family {
            KernelFamily::SumOfExponentials(a) | KernelFamily::CompletelyMonotoneAtoms(a) => {
                a.iter().map(|&(w, r)| sgn * w * r.powi(n as i32) * (-r * t).exp()).sum()
            }
            KernelFamily::GeneralizedRouse { p, tau0, modes } => match modes {
                RouseModes::Limit => rouse_limit_derivative(*p, *tau0, n, t),
                _ => {
                    let atoms = self.exponential_atoms().expect("finite Rouse has atoms");
                    atoms.iter().map(|&(w, r)| sgn * w * r.powi(n as i32) * (-r * t).exp()).sum()
                }
            },
            KernelFamily::PowerLawH { .. } | KernelFamily::PowerLawAlpha { .. } => {
                let OriginBehaviour::Singular { sigma, c0 } = self.origin() else { unreachable!() };
                if t == 0.0 {
                    return Err(GleError::Domain("K(0) is infinite for power-law kernels".into()));
                }
                let coef = match n {
                    0 => 1.0,
                    1 => -sigma,
                    _ => sigma * (sigma + 1.0),
                };
                c0 * coef * t.powf(-sigma - n as f64)
            }
            KernelFamily::SquaredArgumentCM(a) => a
                .iter()
                .map(|&(w, x)| {
                    let e = (-x * t * t).exp();
                    w * e * match n {
                        0 => 1.0,
                        1 => -2.0 * x * t,
                        _ => 4.0 * x * x * t * t - 2.0 * x,
                    }
                })
                .sum(),
            KernelFamily::WeightedSum(parts) => {
                let mut s = 0.0;
                for (w, k) in parts {
                    s += w * k.derivative(n, t)?;
                }
                s
            }
        };
        Ok(v)
    }

    /// Closed-form (F_cos(ω), F_sin(ω)) when the family admits them and they are enabled.
    /// Returns `None` when unavailable; errors when the transform does not exist.
    pub fn closed_form_transforms(&self, omega: f64) -> Option<Result<(f64, f64)>> {
        if !self.closed_form {
            return None;
        }
        let w = omega.abs();
        let out = match &self.family {
            KernelFamily::SumOfExponentials(_)
            | KernelFamily::CompletelyMonotoneAtoms(_)
            | KernelFamily::GeneralizedRouse { modes: RouseModes::Finite(_) | RouseModes::FiniteShifted(_), .. } => {
                let atoms = self.exponential_atoms().expect("exponential family");
                if atoms.iter().any(|a| a.1 == 0.0) {
                    return Some(Err(GleError::Inadmissible(
                        "constant component: K does not decay, transform undefined".into(),
                    )));
                }
                let fc = atoms.iter().map(|&(c, l)| c * l / (l * l + w * w)).sum();
                let fs = atoms.iter().map(|&(c, l)| c * w / (l * l + w * w)).sum();
                (fc, fs)
            }
            KernelFamily::GeneralizedRouse { p, tau0, modes: RouseModes::Limit } => rouse_limit_transforms(*p, *tau0, w),
            KernelFamily::PowerLawH { .. } | KernelFamily::PowerLawAlpha { .. } => {
                let OriginBehaviour::Singular { sigma: a, c0 } = self.origin() else { unreachable!() };
                let g = gamma(1.0 - a) * w.powf(a - 1.0);
                (c0 * g * (PI * a / 2.0).sin(), c0 * g * (PI * a / 2.0).cos())
            }
            KernelFamily::SquaredArgumentCM(a) => {
                if a.iter().any(|x| x.1 == 0.0) {
                    return Some(Err(GleError::Inadmissible(
                        "constant component: K does not decay, transform undefined".into(),
                    )));
                }
                let fc = a.iter().map(|&(c, x)| c * 0.5 * (PI / x).sqrt() * (-w * w / (4.0 * x)).exp()).sum();
                let fs = a.iter().map(|&(c, x)| c / x.sqrt() * dawson(w / (2.0 * x.sqrt()))).sum();
                (fc, fs)
            }
            KernelFamily::WeightedSum(parts) => {
                let (mut fc, mut fs) = (0.0, 0.0);
                for (wt, k) in parts {
                    match k.closed_form_transforms(w)? {
                        Ok((c, s)) => {
                            fc += wt * c;
                            fs += wt * s;
                        }
                        Err(e) => return Some(Err(e)),
                    }
                }
                (fc, fs)
            }
        };
        Some(Ok(out))
    }

    /// Analytic tail classification (no numerics).
    pub fn classify_tail(&self) -> Result<TailClass> {
        let no_decay = || GleError::Inadmissible("K(t) does not decay to 0 (constant component)".into());
        match &self.family {
            KernelFamily::SumOfExponentials(_) => Ok(TailClass::Integrable),
            KernelFamily::CompletelyMonotoneAtoms(a) | KernelFamily::SquaredArgumentCM(a) => {
                if a.iter().any(|x| x.1 == 0.0) {
                    Err(no_decay())
                } else {
                    Ok(TailClass::Integrable)
                }
            }
            KernelFamily::GeneralizedRouse { p, tau0, modes } => match modes {
                RouseModes::Finite(_) => Err(no_decay()),
                RouseModes::FiniteShifted(_) => Ok(TailClass::Integrable),
                RouseModes::Limit => {
                    let alpha = 1.0 / p;
                    if alpha >= 1.0 {
                        return Err(GleError::Inadmissible(
                            "Rouse limit with p = 1 has a 1/t tail: neither integrable nor alpha < 1".into(),
                        ));
                    }
                    Ok(TailClass::PowerTail { alpha, c: tau0.powf(alpha) / p * gamma(alpha) })
                }
            },
            KernelFamily::PowerLawH { h } => {
                Ok(TailClass::PowerTail { alpha: 2.0 - 2.0 * h, c: 2.0 * h * (2.0 * h - 1.0) })
            }
            KernelFamily::PowerLawAlpha { c, alpha } => Ok(TailClass::PowerTail { alpha: *alpha, c: *c }),
            KernelFamily::WeightedSum(parts) => {
                let mut best: Option<(f64, f64)> = None;
                for (w, k) in parts {
                    if let TailClass::PowerTail { alpha, c } = k.classify_tail()? {
                        best = match best {
                            None => Some((alpha, w * c)),
                            Some((a, _)) if alpha < a => Some((alpha, w * c)),
                            Some((a, cc)) if alpha == a => Some((a, cc + w * c)),
                            other => other,
                        };
                    }
                }
                Ok(match best {
                    Some((alpha, c)) => TailClass::PowerTail { alpha, c },
                    None => TailClass::Integrable,
                })
            }
        }
    }

    /// Whether K is convex on (0, ∞), decided from the family.
    pub fn is_convex(&self) -> bool {
        match &self.family {
            KernelFamily::SquaredArgumentCM(_) => false,
            KernelFamily::WeightedSum(parts) => parts.iter().all(|(_, k)| k.is_convex()),
            _ => true,
        }
    }

    /// Assumption 2 (convexity plus condition V or VI), decided from the family.
    pub fn satisfies_assumption2(&self) -> bool {
        self.is_convex()
    }
}

/// n-th derivative of the Rouse limit kernel through incomplete gamma functions.
fn rouse_limit_derivative(p: f64, tau0: f64, n: u32, t: f64) -> f64 {
    let sgn = if n % 2 == 1 { -1.0 } else { 1.0 };
    let a = n as f64 + 1.0 / p;
    let x = t / tau0;
    if x < 1e-8 {
        // series: ∫₀¹ x^{np} e^{-x^p t/τ} dx / τ^n ≈ (1/(np+1) - (t/τ)/(np+p+1)) / τ^n
        let np = n as f64 * p;
        return sgn * (1.0 / (np + 1.0) - x / (np + p + 1.0)) / tau0.powi(n as i32);
    }
    sgn * tau0.powf(1.0 / p) / (p * t.powf(a)) * lower_incomplete_gamma(a, x)
}

/// F_cos, F_sin of the Rouse limit as mixtures ∫₀¹ (r, ω)/(r² + ω²) dx, r = x^p/τ0,
/// evaluated with x = e^{-s} by composite Gauss-Legendre on panels of width ≤ 1.
/// Poles sit at Im s = ±π/(2p), so the panel width scales with 1/p.
fn rouse_limit_transforms(p: f64, tau0: f64, w: f64) -> (f64, f64) {
    let s_star = (-(w * tau0).ln() / p).max(0.0);
    let span = 45.0;
    let width = (2.0 / p).min(1.0);
    let rule = GaussLegendre::get(16);
    let (mut c, mut sn) = (0.0, 0.0);
    let mut panel = |a: f64, b: f64| {
        let h = 0.5 * (b - a);
        for x in rule.mapped_nodes(a, b).zip(&rule.weights) {
            let (s, wt) = x;
            let r = (-p * s).exp() / tau0;
            let e = (-s).exp() * wt * h / (r * r + w * w);
            c += e * r;
            sn += e * w;
        }
    };
    for (a, b) in [(0.0, s_star), (s_star, s_star + span)] {
        let n = ((b - a) / width).ceil() as usize;
        for k in 0..n {
            let lo = a + (b - a) * k as f64 / n as f64;
            let hi = a + (b - a) * (k + 1) as f64 / n as f64;
            panel(lo, hi);
        }
    }
    let u = s_star + span;
    c += (-(p + 1.0) * u).exp() / ((p + 1.0) * tau0 * w * w);
    sn += (-u).exp() / w;
    (c, sn)
}

/// Numeric tail classification from the log-log slope of K on [t0, 10⁴ t0].
pub fn classify_tail_numeric(spec: &KernelSpec, t0: f64) -> Result<TailClass> {
    let n = 41;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let k_first = spec.eval(t0)?;
    let k_last = spec.eval(t0 * 1e4)?;
    if k_first > 0.0 && k_last / k_first < 1e-30 {
        return Ok(TailClass::Integrable);
    }
    for i in 0..n {
        let t = t0 * 10f64.powf(4.0 * i as f64 / (n - 1) as f64);
        let k = spec.eval(t)?;
        if !(k > 0.0) {
            return Ok(TailClass::Integrable);
        }
        xs.push(t.ln());
        ys.push(k.ln());
    }
    let fit = crate::fit::ols(&xs, &ys)?;
    if fit.r2 < 0.999 {
        return Err(GleError::Unclassified { r2: fit.r2 });
    }
    let alpha = -fit.slope;
    if alpha > 1.05 {
        Ok(TailClass::Integrable)
    } else if alpha > 0.02 && alpha < 0.98 {
        // c from the mean of log(t^α K) over the window
        let c = (xs.iter().zip(&ys).map(|(x, y)| y + alpha * x).sum::<f64>() / n as f64).exp();
        Ok(TailClass::PowerTail { alpha, c })
    } else {
        Err(GleError::Unclassified { r2: fit.r2 })
    }
}

/// Sampling plan for admissibility checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Largest t at which the onset of decrease may be placed.
    pub onset_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_per_decade: usize,
    /// Exponent b of the optional diagnostic K(0) - K(t) = O(|log t|^{-b}).
    pub log_b: Option<f64>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            t_min: 1e-6,
            t_max: 1e6,
            per_decade: 20,
            onset_max: 1e3,
            omega_min: 1e-3,
            omega_max: 1e3,
            omega_per_decade: 5,
            log_b: None,
        }
    }
}

/// Condition identifiers of the admissibility report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    Symmetry,
    Positivity,
    DecayMonotone,
    LocalIntegrability,
    FourierPositivity,
    Convexity,
    FiniteOriginV,
    SingularOriginVI,
    LogModulus,
}

impl ConditionId {
    pub fn label(&self) -> &'static str {
        match self {
            ConditionId::Symmetry => "I.a symmetry",
            ConditionId::Positivity => "I.a positivity",
            ConditionId::DecayMonotone => "I.b decay, eventually decreasing",
            ConditionId::LocalIntegrability => "I.c local integrability",
            ConditionId::FourierPositivity => "I.d F_cos positivity",
            ConditionId::Convexity => "IV convexity",
            ConditionId::FiniteOriginV => "V finite K(0), sigma1",
            ConditionId::SingularOriginVI => "VI singular K(0), sigma2",
            ConditionId::LogModulus => "log-modulus diagnostic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub id: ConditionId,
    pub status: CheckStatus,
    /// Signed margin; positive means satisfied with room to spare.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConditionCheck>,
    /// Measured onset of monotone decrease.
    pub onset: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
}

impl AdmissibilityReport {
    pub fn status(&self, id: ConditionId) -> CheckStatus {
        self.checks.iter().find(|c| c.id == id).map(|c| c.status).unwrap_or(CheckStatus::Inapplicable)
    }

    /// Assumption 1: I.a–I.d all pass.
    pub fn assumption1(&self) -> bool {
        use ConditionId::*;
        [Symmetry, Positivity, DecayMonotone, LocalIntegrability, FourierPositivity]
            .iter()
            .all(|&c| self.status(c) == CheckStatus::Pass)
    }

    /// Assumption 2: IV plus V or VI.
    pub fn assumption2(&self) -> bool {
        self.status(ConditionId::Convexity) == CheckStatus::Pass
            && (self.status(ConditionId::FiniteOriginV) == CheckStatus::Pass
                || self.status(ConditionId::SingularOriginVI) == CheckStatus::Pass)
    }
}

/// All values positive, except exact zeros that follow a sample below 1e-100 (underflow).
/// Returns (ok, smallest positive value).
fn positive_up_to_underflow(vals: &[f64]) -> (bool, f64) {
    let mut ok = true;
    let mut min_seen = f64::INFINITY;
    for &v in vals {
        ok &= v > 0.0 || (v == 0.0 && min_seen < 1e-100);
        if v > 0.0 {
            min_seen = min_seen.min(v);
        }
    }
    (ok, min_seen)
}

fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}

/// Smallest grid time after which sampled K is non-increasing up to the end of the grid.
pub fn decrease_onset(spec: &KernelSpec, plan: &SamplingPlan) -> Option<f64> {
    let grid = geometric_grid(plan.t_min, plan.t_max, plan.per_decade);
    let vals: Vec<f64> = grid.iter().map(|&t| spec.eval(t).unwrap_or(f64::NAN)).collect();
    let mut onset = grid.len() - 1;
    for i in (0..grid.len() - 1).rev() {
        if vals[i + 1] <= vals[i] && vals[i].is_finite() {
            onset = i;
        } else {
            break;
        }
    }
    let t = grid[onset];
    if t <= plan.onset_max && onset < grid.len() - 1 {
        Some(t)
    } else {
        None
    }
}

/// Numeric admissibility report for Assumption 1 and Assumption 2.
pub fn check_admissibility(spec: &KernelSpec, plan: &SamplingPlan) -> AdmissibilityReport {
    let mut checks = Vec::new();
    let grid = geometric_grid(plan.t_min, plan.t_max, plan.per_decade);
    let vals: Vec<f64> = grid.iter().map(|&t| spec.eval(t).unwrap_or(f64::NAN)).collect();

    // I.a symmetry
    let asym = grid
        .iter()
        .zip(&vals)
        .map(|(&t, &v)| {
            let m = spec.eval(-t).unwrap_or(f64::NAN);
            if m == v {
                0.0
            } else {
                (m - v).abs().max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max);
    checks.push(ConditionCheck {
        id: ConditionId::Symmetry,
        status: if asym == 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: -asym,
        detail: format!("max |K(t) - K(-t)| = {asym:e}"),
    });

    // I.a positivity
    let (pos_ok, min_seen) = positive_up_to_underflow(&vals);
    checks.push(ConditionCheck {
        id: ConditionId::Positivity,
        status: if pos_ok { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: if min_seen.is_finite() { min_seen } else { 0.0 },
        detail: format!("min sampled K = {min_seen:e}"),
    });

    // I.b eventual decrease and decay
    let onset = decrease_onset(spec, plan);
    let n = grid.len();
    let tail_from = n.saturating_sub(2 * plan.per_decade + 1);
    let (k_a, k_b) = (vals[tail_from], vals[n - 1]);
    let tail_slope = if k_a > 0.0 && k_b > 0.0 { (k_b / k_a).ln() / (grid[n - 1] / grid[tail_from]).ln() } else { f64::NEG_INFINITY };
    let k_ref = onset.and_then(|t| spec.eval(t).ok()).unwrap_or(f64::NAN);
    let decays = tail_slope < -0.05 || k_b <= 1e-12 * k_ref;
    checks.push(ConditionCheck {
        id: ConditionId::DecayMonotone,
        status: if onset.is_some() && decays { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: -tail_slope,
        detail: match onset {
            Some(a) => format!("decreasing from t = {a:e}; top two-decade log slope {tail_slope:.4}"),
            None => format!("no onset of decrease within [{:e}, {:e}]", plan.t_min, plan.onset_max),
        },
    });

    // I.c local integrability: ∫_ε^1 K for ε = 10^{-2}, 10^{-4}, ... (log substitution)
    let mut prev: Option<f64> = None;
    let mut incs = Vec::new();
    let mut total = 0.0;
    let mut eps_hi = 1.0;
    for j in 1..=8 {
        let eps = 10f64.powi(-2 * j);
        let piece = integrate_adaptive(
            |u: f64| {
                let t = u.exp();
                spec.eval(t).unwrap_or(f64::NAN) * t
            },
            eps.ln(),
            f64::ln(eps_hi),
            0.0,
            1e-12,
            500,
        )
        .value;
        total += piece;
        if prev.is_some() {
            incs.push(piece);
        }
        prev = Some(total);
        eps_hi = eps;
    }
    let last = *incs.last().unwrap_or(&0.0);
    let first = *incs.first().unwrap_or(&0.0);
    let converging = last.is_finite() && (last <= 1e-6 * total.abs() || (first > 0.0 && last < 0.5 * first));
    checks.push(ConditionCheck {
        id: ConditionId::LocalIntegrability,
        status: if converging { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: if total > 0.0 { 1.0 - last / total } else { 0.0 },
        detail: format!("∫_(1e-16)^1 K ≈ {total:.6e}; last refinement increment {last:.3e}"),
    });

    // I.d positivity of F_cos
    let omegas = geometric_grid(plan.omega_min, plan.omega_max, plan.omega_per_decade);
    let mut fcs = Vec::new();
    let mut fc_err = None;
    for &w in &omegas {
        match crate::transform::fourier_cos(spec, w, 1e-10) {
            Ok(v) => fcs.push(v.value),
            Err(e) => {
                fc_err = Some(e.to_string());
                break;
            }
        }
    }
    let (fc_pos, min_fc) = positive_up_to_underflow(&fcs);
    checks.push(ConditionCheck {
        id: ConditionId::FourierPositivity,
        status: if fc_err.is_none() && fc_pos { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: min_fc,
        detail: match fc_err {
            Some(e) => format!("transform failed: {e}"),
            None => format!("min F_cos on [{:e}, {:e}] = {min_fc:e}", plan.omega_min, plan.omega_max),
        },
    });

    // IV convexity by undivided centered second differences, h = 0.05 t
    let mut worst = f64::INFINITY;
    let mut fail_lo = f64::NAN;
    let mut fail_hi = f64::NAN;
    for &t in &grid {
        let h = 0.05 * t;
        let (Ok(a), Ok(b), Ok(c)) = (spec.eval(t - h), spec.eval(t), spec.eval(t + h)) else { continue };
        let d2 = a - 2.0 * b + c;
        let scale = b.max(1.0);
        let norm = d2 / scale;
        worst = worst.min(norm);
        if d2 < -1e-10 * scale {
            if fail_lo.is_nan() {
                fail_lo = t;
            }
            fail_hi = t;
        }
    }
    checks.push(ConditionCheck {
        id: ConditionId::Convexity,
        status: if fail_lo.is_nan() { CheckStatus::Pass } else { CheckStatus::Fail },
        margin: worst,
        detail: if fail_lo.is_nan() {
            format!("min normalized second difference {worst:.3e}")
        } else {
            format!("negative second differences on [{fail_lo:.4e}, {fail_hi:.4e}]")
        },
    });

    // V / VI: log-log regression on [1e-6, 1e-2]
    let near: Vec<f64> = geometric_grid(1e-6, 1e-2, 10);
    let xs: Vec<f64> = near.iter().map(|t| t.ln()).collect();
    let finite_origin = spec.eval(0.0).is_ok();
    let mut sigma1 = None;
    let mut sigma2 = None;
    if finite_origin {
        let d1: Vec<f64> = near.iter().map(|&t| spec.derivative(1, t).map(f64::abs).unwrap_or(f64::NAN)).collect();
        let d2: Vec<f64> = near.iter().map(|&t| spec.derivative(2, t).unwrap_or(f64::NAN)).collect();
        let d2_monotone = d2.windows(2).all(|w| w[1] <= w[0]) || d2.windows(2).all(|w| w[1] >= w[0]);
        // |K'(t)| ~ t^{-s}; need some σ1 ∈ (0,1) with t^{σ1}K'(t) → 0, i.e. s < 1.
        let s = if d1.iter().all(|v| *v > 0.0) {
            let ys: Vec<f64> = d1.iter().map(|v| v.ln()).collect();
            crate::fit::ols(&xs, &ys).map(|f| -f.slope).unwrap_or(f64::NAN)
        } else {
            0.0
        };
        let s = s.max(0.0);
        sigma1 = Some(0.5 * (s + 1.0));
        let pass = s < 0.98 && d2_monotone;
        checks.push(ConditionCheck {
            id: ConditionId::FiniteOriginV,
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            margin: 1.0 - s,
            detail: format!("|K'(t)| ~ t^-{s:.4}; sigma1 = {:.4}; K'' monotone near 0: {d2_monotone}", 0.5 * (s + 1.0)),
        });
        checks.push(ConditionCheck {
            id: ConditionId::SingularOriginVI,
            status: CheckStatus::Inapplicable,
            margin: 0.0,
            detail: "K(0) finite".into(),
        });
    } else {
        checks.push(ConditionCheck {
            id: ConditionId::FiniteOriginV,
            status: CheckStatus::Inapplicable,
            margin: 0.0,
            detail: "K(0) infinite".into(),
        });
        let ys: Vec<f64> = near.iter().map(|&t| spec.eval(t).map(f64::ln).unwrap_or(f64::NAN)).collect();
        let (status, margin, detail) = match crate::fit::ols(&xs, &ys) {
            Ok(f) => {
                let s = -f.slope;
                sigma2 = Some(s);
                let ok = s > 0.0 && s < 1.0 && f.r2 > 0.999;
                (
                    if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                    s.min(1.0 - s),
                    format!("K(t) ~ t^-{s:.4} near 0 (R^2 = {:.6})", f.r2),
                )
            }
            Err(e) => (CheckStatus::Fail, f64::NAN, e.to_string()),
        };
        checks.push(ConditionCheck { id: ConditionId::SingularOriginVI, status, margin, detail });
    }

    // optional modulus diagnostic
    match (plan.log_b, spec.eval(0.0)) {
        (Some(b), Ok(k0)) => {
            let ts = geometric_grid(1e-12, 1e-2, 5);
            let r: Vec<f64> = ts.iter().map(|&t| (k0 - spec.eval(t).unwrap_or(f64::NAN)) * t.ln().abs().powf(b)).collect();
            let bounded = r.iter().all(|v| v.is_finite()) && r[0] <= r[r.len() - 1] * (1.0 + 1e-6) + 1e-12;
            checks.push(ConditionCheck {
                id: ConditionId::LogModulus,
                status: if bounded { CheckStatus::Pass } else { CheckStatus::Fail },
                margin: r[r.len() - 1] - r[0],
                detail: format!("(K(0)-K(t))|log t|^{b} from {:.3e} (t=1e-12) to {:.3e} (t=1e-2)", r[0], r[r.len() - 1]),
            });
        }
        (Some(_), Err(_)) => checks.push(ConditionCheck {
            id: ConditionId::LogModulus,
            status: CheckStatus::Inapplicable,
            margin: 0.0,
            detail: "K(0) infinite".into(),
        }),
        _ => {}
    }

    AdmissibilityReport { checks, onset, sigma1, sigma2 }
}
