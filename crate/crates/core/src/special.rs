//! Special functions used by the kernel families and the quadrature rules.

use std::f64::consts::PI;

use crate::quadrature::integrate_adaptive;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Unregularized lower incomplete gamma γ(a, x) for a > 0, x ≥ 0.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(a, x) * gamma(a)
}

/// ∫₀^∞ cos(z) z^{-α} dz = Γ(1-α) sin(πα/2), for α ∈ (0,1).
pub fn cos_power_integral(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * (PI * alpha / 2.0).sin()
}

/// ∫₀^∞ sin(z) z^{-α} dz = Γ(1-α) cos(πα/2), for α ∈ (0,1).
pub fn sin_power_integral(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * (PI * alpha / 2.0).cos()
}

/// ∫₀^∞ (1 - cos z) z^{-1-a} dz = Γ(1-a) cos(πa/2) / a, for a ∈ (0,2), a ≠ 1.
/// At a = 1 the value is π/2.
pub fn one_minus_cos_power_integral(a: f64) -> f64 {
    if (a - 1.0).abs() < 1e-12 {
        return PI / 2.0;
    }
    // removable singularity at a = 1 handled above
    gamma(1.0 - a) * (PI * a / 2.0).cos() / a
}

/// Dawson function D(x) = e^{-x²} ∫₀^x e^{u²} du.
pub fn dawson(x: f64) -> f64 {
    if x < 0.0 {
        return -dawson(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > 50.0 {
        let y = 1.0 / (2.0 * x * x);
        // asymptotic series 1/(2x) Σ (2k-1)!! y^k
        return (1.0 + y * (1.0 + y * (3.0 + y * (15.0 + y * 105.0)))) / (2.0 * x);
    }
    // e^{-x²} e^{u²} = e^{-(x-u)(x+u)}; write as ∫₀^x e^{-v(2x-v)} dv with v = x - u.
    let f = |v: f64| (-v * (2.0 * x - v)).exp();
    integrate_adaptive(f, 0.0, x, 0.0, 1e-15, 400).value
}

/// Spherical Bessel functions j_0..j_{n-1} at x ≥ 0.
pub fn spherical_bessel_j(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if x < 0.5 {
        // power series j_k(x) = x^k/(2k+1)!! Σ_m (-x²/2)^m / (m! (2k+3)(2k+5)...(2k+2m+1))
        let x2 = x * x;
        let mut lead = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= x / (2 * k + 1) as f64;
            }
            if lead == 0.0 {
                break;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..40 {
                term *= -x2 / (2.0 * m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > n as f64 {
        // upward recurrence is stable while k < x
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2 * k + 1) as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    // Miller's downward recurrence, normalized against j0 or j1.
    let start = n + 20 + x as usize;
    let mut jp1 = 0.0_f64;
    let mut jk = 1e-300_f64;
    let mut tmp = vec![0.0; n];
    for k in (1..=start).rev() {
        let jm1 = (2 * k + 1) as f64 / x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if k - 1 < n {
            tmp[k - 1] = jk;
        }
        if jk.abs() > 1e250 {
            jk *= 1e-250;
            jp1 *= 1e-250;
            for t in tmp.iter_mut() {
                *t *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() || n < 2 { j0 / tmp[0] } else { j1 / tmp[1] };
    for k in 0..n {
        out[k] = tmp[k] * scale;
    }
    out
}
