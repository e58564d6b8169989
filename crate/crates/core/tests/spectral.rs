use std::f64::consts::PI;

use gle_core::kernels::{KernelSpec, RouseModes};
use gle_core::spectral::{GleParams, SpectralDensity};
use proptest::prelude::*;

fn kernel(i: usize) -> KernelSpec {
    match i {
        0 => KernelSpec::exponential(1.0).unwrap(),
        1 => KernelSpec::power_law_h(0.75).unwrap(),
        2 => KernelSpec::power_law_alpha(1.0, 0.3).unwrap(),
        _ => KernelSpec::rouse(2.0, 1.0, RouseModes::FiniteShifted(8)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhat_even_nonnegative_and_bounded(
        k in 0usize..4,
        m in prop::sample::select(vec![0.0, 0.5, 2.0]),
        lambda in prop::sample::select(vec![0.0, 0.3, 1.0, 4.0]),
        lw in -4.0f64..4.0,
    ) {
        let w = 10f64.powf(lw);
        let sd = SpectralDensity::new(GleParams::new(m, lambda, 1.0).unwrap(), kernel(k)).unwrap();
        let r = sd.rhat(w).unwrap();
        prop_assert!(r >= 0.0 && r.is_finite());
        prop_assert_eq!(r, sd.rhat(-w).unwrap());
        if lambda > 0.0 {
            prop_assert!(r <= 1.0 / (PI * lambda) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn exponential_kernel_rhat_matches_rational_form() {
    // K = e^{-t}: F_cos = 1/(1+w^2), F_sin = w/(1+w^2)
    let sd = SpectralDensity::new(GleParams::new(1.0, 0.5, 1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()).unwrap();
    for w in [0.01, 0.3, 1.0, 7.0, 100.0] {
        let d = 1.0 + w * w;
        let (fc, fs) = (1.0 / d, w / d);
        let a = 0.5 + fc;
        let b = w - fs;
        let exact = (1.0 + 2.0 * fc) / (2.0 * PI * (a * a + b * b));
        let r = sd.rhat(w).unwrap();
        assert!((r / exact - 1.0).abs() < 1e-13, "omega {w}: {r} vs {exact}");
    }
}

#[test]
fn zero_frequency_rejected() {
    let sd = SpectralDensity::new(GleParams::new(1.0, 0.0, 1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()).unwrap();
    assert!(sd.rhat(0.0).is_err());
    assert!(GleParams::new(-1.0, 0.0, 1.0).is_err());
}
