use gle_core::kernels::{check_admissibility, KernelSpec, RouseModes, SamplingPlan, TailClass};
use proptest::prelude::*;

fn exp_sum() -> impl Strategy<Value = KernelSpec> {
    prop::collection::vec((0.05f64..3.0, 0.01f64..5.0), 1..5).prop_map(|t| KernelSpec::sum_of_exponentials(t).unwrap())
}

proptest! {
    #[test]
    fn kernels_are_even(k in exp_sum(), t in 0.001f64..50.0) {
        prop_assert_eq!(k.eval(t).unwrap(), k.eval(-t).unwrap());
    }

    #[test]
    fn cm_derivative_signs(k in exp_sum(), t in 0.001f64..50.0) {
        prop_assert!(k.eval(t).unwrap() >= 0.0);
        prop_assert!(k.derivative(1, t).unwrap() <= 0.0);
        prop_assert!(k.derivative(2, t).unwrap() >= 0.0);
    }

    #[test]
    fn power_law_derivative_signs(alpha in 0.1f64..0.95, t in 0.01f64..1e4) {
        let k = KernelSpec::power_law_alpha(1.0, alpha).unwrap();
        prop_assert!(k.eval(t).unwrap() > 0.0);
        prop_assert!(k.derivative(1, t).unwrap() < 0.0);
        prop_assert!(k.derivative(2, t).unwrap() > 0.0);
    }
}

#[test]
fn shifted_rouse_converges_to_limit() {
    let lim = KernelSpec::rouse(2.0, 1.0, RouseModes::Limit).unwrap();
    let mut prev = f64::INFINITY;
    for n in [4, 16, 64, 256] {
        let k = KernelSpec::rouse(2.0, 1.0, RouseModes::FiniteShifted(n)).unwrap();
        let dev = [0.5, 1.0, 5.0, 20.0]
            .iter()
            .map(|&t| (k.eval(t).unwrap() - lim.eval(t).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(dev < prev, "N = {n}: deviation {dev} did not shrink from {prev}");
        prev = dev;
    }
    assert!(prev < 1e-2);
}

#[test]
fn tail_classes() {
    assert_eq!(KernelSpec::exponential(1.0).unwrap().classify_tail().unwrap(), TailClass::Integrable);
    let pl = KernelSpec::power_law_alpha(1.0, 0.4).unwrap().classify_tail().unwrap();
    assert!((pl.alpha().unwrap() - 0.4).abs() < 1e-6, "{pl:?}");
    let rl = KernelSpec::rouse(2.0, 1.0, RouseModes::Limit).unwrap().classify_tail().unwrap();
    assert!((rl.alpha().unwrap() - 0.5).abs() < 1e-3, "{rl:?}");
}

#[test]
fn standard_kernels_are_admissible() {
    for k in [
        KernelSpec::exponential(1.0).unwrap(),
        KernelSpec::power_law_h(0.75).unwrap(),
        KernelSpec::rouse(2.0, 1.0, RouseModes::Limit).unwrap(),
    ] {
        let rep = check_admissibility(&k, &SamplingPlan::default());
        assert!(rep.assumption1(), "{k:?}: {:?}", rep.checks);
    }
}

#[test]
fn invalid_parameters_rejected() {
    assert!(KernelSpec::rouse(0.5, 1.0, RouseModes::Limit).is_err());
    assert!(KernelSpec::rouse(2.0, 1.0, RouseModes::FiniteShifted(0)).is_err());
    assert!(KernelSpec::power_law_alpha(1.0, 1.5).is_err());
    assert!(KernelSpec::sum_of_exponentials(vec![(-1.0, 1.0)]).is_err());
}
