use gle_core::kernels::KernelSpec;
use gle_core::msd::MsdEngine;
use gle_core::spectral::{GleParams, SpectralDensity};
use gle_core::synth::{empirical_msd, increment_variance, read_binary, synthesize, write_binary, SynthesisConfig};

fn ensemble(seed: u64) -> (SpectralDensity, gle_core::synth::PathEnsemble) {
    let sd = SpectralDensity::new(GleParams::new(1.0, 0.0, 1.0).unwrap(), KernelSpec::power_law_h(0.75).unwrap()).unwrap();
    let ens = synthesize(&sd, &SynthesisConfig::auto(0.25, 40, 4000), seed).unwrap();
    (sd, ens)
}

#[test]
fn increments_are_stationary_and_mean_is_zero() {
    let (sd, ens) = ensemble(11);
    let eng = MsdEngine::new(&sd);
    let lag = 4;
    let target = eng.msd(lag as f64 * ens.dt).unwrap().value;
    for j in [0, 10, 20, 36] {
        let (v, se) = increment_variance(&ens, j, lag).unwrap();
        assert!((v - target).abs() <= 4.0 * se, "start {j}: {v} vs {target} (se {se})");
    }
    let emp = empirical_msd(&ens).unwrap();
    for j in 1..=ens.n_steps {
        assert!(emp.mean_x[j].abs() <= 4.0 * emp.mean_x_se[j], "step {j}: mean {} se {}", emp.mean_x[j], emp.mean_x_se[j]);
    }
}

#[test]
fn seeds_are_independent_and_reproducible() {
    let (_, a) = ensemble(5);
    let (_, b) = ensemble(5);
    let (_, c) = ensemble(6);
    assert_eq!(a.positions, b.positions);
    assert_ne!(a.positions, c.positions);
    let mut buf = Vec::new();
    write_binary(&a, &mut buf).unwrap();
    let (np, ns, dt, pos) = read_binary(buf.as_slice()).unwrap();
    assert_eq!((np, ns, dt), (a.n_paths, a.n_steps, a.dt));
    assert_eq!(pos, a.positions);
}

#[test]
fn paths_start_at_origin() {
    let (_, ens) = ensemble(1);
    for p in 0..ens.n_paths {
        assert_eq!(ens.path(p)[0], 0.0);
    }
}

#[test]
fn refining_the_spectrum_leaves_msd_unchanged() {
    let sd = SpectralDensity::new(GleParams::new(1.0, 0.0, 1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()).unwrap();
    let coarse = SynthesisConfig::auto(0.25, 20, 4000);
    let mut fine = coarse;
    fine.d_omega *= 0.5;
    fine.omega_max *= 2.0;
    let a = empirical_msd(&synthesize(&sd, &coarse, 3).unwrap()).unwrap();
    let b = empirical_msd(&synthesize(&sd, &fine, 3).unwrap()).unwrap();
    for j in [5, 10, 20] {
        let tol = 4.0 * a.se[j].hypot(b.se[j]) + coarse.mass_budget * a.curve.values[j];
        assert!((a.curve.values[j] - b.curve.values[j]).abs() <= tol, "step {j}");
    }
}

#[test]
fn viscous_massless_paths_obey_half_holder_bound() {
    // m = 0, λ > 0: E|X(t)-X(s)|^2 <= (2√T/λ) |t-s|^{1/2}
    let lambda = 1.0;
    let sd = SpectralDensity::new(GleParams::new(0.0, lambda, 1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()).unwrap();
    let mut cfg = SynthesisConfig::auto(0.05, 16, 1000);
    cfg.d_omega = 0.1;
    cfg.omega_max = 4000.0;
    let ens = synthesize(&sd, &cfg, 17).unwrap();
    let c = 2.0 * cfg.horizon().sqrt() / lambda;
    for lag in [1, 2, 4, 8, 16] {
        let (v, se) = increment_variance(&ens, 0, lag).unwrap();
        let h = lag as f64 * cfg.dt;
        assert!(v - 3.0 * se <= c * h.sqrt(), "lag {h}: {v} +- {se} vs {}", c * h.sqrt());
    }
}
