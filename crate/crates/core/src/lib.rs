//! Generalized Langevin equation toolkit: admissible memory kernels, improper
//! Fourier transforms, spectral densities, MSD/covariance quadrature, spectral
//! path synthesis and transient anomalous-diffusion analysis.

pub mod error;
pub mod fit;
pub mod kernels;
pub mod msd;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod synth;
pub mod transient;
pub mod transform;

pub use error::{GleError, Result};
pub use kernels::{KernelFamily, KernelSpec, RouseModes, TailClass};
