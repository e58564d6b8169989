//! Python bindings for the GLE toolkit.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gle_core::kernels::{self, KernelSpec, RouseModes, SamplingPlan, TailClass};
use gle_core::msd::{self, MsdEngine};
use gle_core::spectral::{self, GleParams};
use gle_core::synth::{self, SynthesisConfig};
use gle_core::GleError;

fn err(e: GleError) -> PyErr {
    match e {
        GleError::NotConverged { .. } | GleError::Budget(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Memory kernel K(t).
#[pyclass(name = "Kernel", module = "gle_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Kernel(KernelSpec);

#[pymethods]
impl Kernel {
    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        KernelSpec::exponential(rate).map(Self).map_err(err)
    }

    /// Σ w_i exp(-r_i t) from (w, r) pairs.
    #[staticmethod]
    fn sum_of_exponentials(terms: Vec<(f64, f64)>) -> PyResult<Self> {
        KernelSpec::sum_of_exponentials(terms).map(Self).map_err(err)
    }

    /// Rouse kernel; `n=None` gives the infinite-mode limit.
    #[staticmethod]
    #[pyo3(signature = (p, tau0, n=None, shifted=true))]
    fn rouse(p: f64, tau0: f64, n: Option<usize>, shifted: bool) -> PyResult<Self> {
        let modes = match n {
            None => RouseModes::Limit,
            Some(n) if shifted => RouseModes::FiniteShifted(n),
            Some(n) => RouseModes::Finite(n),
        };
        KernelSpec::rouse(p, tau0, modes).map(Self).map_err(err)
    }

    #[staticmethod]
    fn power_law_h(h: f64) -> PyResult<Self> {
        KernelSpec::power_law_h(h).map(Self).map_err(err)
    }

    #[staticmethod]
    fn power_law_alpha(c: f64, alpha: f64) -> PyResult<Self> {
        KernelSpec::power_law_alpha(c, alpha).map(Self).map_err(err)
    }

    /// Same kernel with closed-form transforms disabled.
    fn numeric(&self) -> Self {
        Self(self.0.clone().without_closed_form())
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(err)
    }

    #[pyo3(signature = (omega, tol=1e-10))]
    fn fourier_cos(&self, omega: f64, tol: f64) -> PyResult<f64> {
        gle_core::transform::fourier_cos(&self.0, omega, tol).map(|v| v.value).map_err(err)
    }

    #[pyo3(signature = (omega, tol=1e-10))]
    fn fourier_sin(&self, omega: f64, tol: f64) -> PyResult<f64> {
        gle_core::transform::fourier_sin(&self.0, omega, tol).map(|v| v.value).map_err(err)
    }

    /// None for integrable tails, else the power-law exponent.
    fn tail_exponent(&self) -> PyResult<Option<f64>> {
        self.0.classify_tail().map(|t| t.alpha()).map_err(err)
    }

    /// Admissibility checks on the default sampling plan.
    fn check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rep = kernels::check_admissibility(&self.0, &SamplingPlan::default());
        let d = PyDict::new(py);
        d.set_item("assumption1", rep.assumption1())?;
        d.set_item("assumption2", rep.assumption2())?;
        d.set_item("onset", rep.onset)?;
        let checks = PyDict::new(py);
        for c in &rep.checks {
            checks.set_item(c.id.label(), format!("{:?}", c.status).to_lowercase())?;
        }
        d.set_item("checks", checks)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?})", self.0.family())
    }
}

/// Spectral density r̂(ω) of the GLE driven by a kernel.
#[pyclass(name = "SpectralDensity", module = "gle_py", frozen)]
struct SpectralDensity(spectral::SpectralDensity);

#[pymethods]
impl SpectralDensity {
    #[new]
    #[pyo3(signature = (kernel, m, lam, beta=1.0))]
    fn new(kernel: &Kernel, m: f64, lam: f64, beta: f64) -> PyResult<Self> {
        let p = GleParams::new(m, lam, beta).map_err(err)?;
        spectral::SpectralDensity::new(p, kernel.0.clone()).map(Self).map_err(err)
    }

    fn rhat(&self, omega: f64) -> PyResult<f64> {
        self.0.rhat(omega).map_err(err)
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.0.regime().label()
    }

    /// (value, error estimate) of the mean squared displacement.
    fn msd(&self, py: Python<'_>, t: f64) -> PyResult<(f64, f64)> {
        py.detach(|| MsdEngine::new(&self.0).msd(t)).map(|e| (e.value, e.err_est)).map_err(err)
    }

    fn msd_curve(&self, py: Python<'_>, times: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| MsdEngine::new(&self.0).curve(&times)).map(|c| c.values).map_err(err)
    }

    fn covariance(&self, t: f64, s: f64) -> PyResult<f64> {
        MsdEngine::new(&self.0).covariance(t, s).map(|e| e.value).map_err(err)
    }

    /// Long-time MSD exponent implied by the tail class and regime.
    fn predicted_exponent(&self) -> PyResult<f64> {
        let a2 = self.0.kernel().satisfies_assumption2();
        msd::predict_exponent(self.0.tail(), self.0.params(), a2).map_err(err)
    }

    /// (eta, halfwidth) of a log-log fit on [lo, hi].
    #[pyo3(signature = (lo, hi, per_decade=8))]
    fn fit_exponent(&self, py: Python<'_>, lo: f64, hi: f64, per_decade: usize) -> PyResult<(f64, f64)> {
        py.detach(|| {
            let c = MsdEngine::new(&self.0).curve(&msd::geometric_times(lo, hi, per_decade))?;
            msd::fit_exponent(&c, (lo, hi))
        })
        .map(|f| (f.eta, f.halfwidth))
        .map_err(err)
    }

    /// Synthesizes paths; returns (times, positions as n_paths lists).
    fn simulate(&self, py: Python<'_>, dt: f64, n_steps: usize, n_paths: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let ens = py.detach(|| synth::synthesize(&self.0, &SynthesisConfig::auto(dt, n_steps, n_paths), seed)).map_err(err)?;
        Ok((ens.times(), (0..ens.n_paths).map(|p| ens.path(p).to_vec()).collect()))
    }
}

fn tail_name(t: TailClass) -> String {
    match t {
        TailClass::Integrable => "integrable".into(),
        TailClass::PowerTail { alpha, .. } => format!("power-tail(alpha={alpha})"),
    }
}

/// Tail class of a kernel as a short string.
#[pyfunction]
fn classify_tail(kernel: &Kernel) -> PyResult<String> {
    kernel.0.classify_tail().map(tail_name).map_err(err)
}

#[pymodule]
fn gle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_class::<SpectralDensity>()?;
    m.add_function(wrap_pyfunction!(classify_tail, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
