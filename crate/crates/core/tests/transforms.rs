use gle_core::kernels::KernelSpec;
use gle_core::transform::{fourier_cos, fourier_sin};
use proptest::prelude::*;

fn terms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.05f64..3.0, 0.02f64..5.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_matches_exponential_oracle(t in terms(), w in 0.01f64..100.0) {
        let k = KernelSpec::sum_of_exponentials(t.clone()).unwrap();
        let c = fourier_cos(&k, w, 1e-12).unwrap().value;
        let s = fourier_sin(&k, w, 1e-12).unwrap().value;
        let (c0, s0) = t.iter().fold((0.0, 0.0), |(c, s), &(a, r)| {
            let d = r * r + w * w;
            (c + a * r / d, s + a * w / d)
        });
        prop_assert!((c - c0).abs() <= 1e-12 * c0.abs());
        prop_assert!((s - s0).abs() <= 1e-12 * s0.abs());
    }

    #[test]
    fn numeric_transforms_are_linear(a in terms(), b in terms(), x in 0.1f64..3.0, w in 0.05f64..20.0) {
        let ka = KernelSpec::sum_of_exponentials(a.clone()).unwrap().without_closed_form();
        let kb = KernelSpec::sum_of_exponentials(b.clone()).unwrap().without_closed_form();
        let scaled: Vec<(f64, f64)> = a.iter().map(|&(c, r)| (x * c, r)).chain(b.iter().copied()).collect();
        let kab = KernelSpec::sum_of_exponentials(scaled).unwrap().without_closed_form();
        for f in [fourier_cos, fourier_sin] {
            let lhs = f(&kab, w, 1e-12).unwrap().value;
            let rhs = x * f(&ka, w, 1e-12).unwrap().value + f(&kb, w, 1e-12).unwrap().value;
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1e-3), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn error_estimates_are_honest(t in terms(), w in 0.05f64..50.0) {
        let k = KernelSpec::sum_of_exponentials(t).unwrap();
        let exact = fourier_cos(&k, w, 1e-14).unwrap().value;
        let num = fourier_cos(&k.without_closed_form(), w, 1e-7 * exact).unwrap();
        prop_assert!((num.value - exact).abs() <= 10.0 * num.err_est.max(1e-15 * exact.abs()),
            "err {} vs estimate {}", (num.value - exact).abs(), num.err_est);
    }
}

#[test]
fn power_law_transform_matches_gamma_formula() {
    // K(t) = t^-a: F_cos = Γ(1-a) sin(πa/2) ω^{a-1}
    let a: f64 = 0.5;
    let k = KernelSpec::power_law_alpha(1.0, a).unwrap();
    for w in [0.1, 1.0, 10.0] {
        let v = fourier_cos(&k, w, 1e-10).unwrap().value;
        let exact = std::f64::consts::PI.sqrt() * (std::f64::consts::PI * a / 2.0).sin() * w.powf(a - 1.0);
        assert!((v / exact - 1.0).abs() < 1e-6, "omega {w}: {v} vs {exact}");
    }
}
