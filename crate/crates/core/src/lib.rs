//! Active learning for expensive black-box functions on the unit hypercube.
//!
//! The crate provides
//!
//! * correlation kernels, including the multiplicative inverse-multiquadric
//!   (MIM) kernel ([`kernels`]),
//! * ordinary-kriging surrogates fitted by maximum likelihood ([`gp`]),
//! * initial designs: one-factor-at-a-time screening blocks, maximin and
//!   MaxPro Latin hypercubes, Sobol' points ([`designs`]),
//! * ALM and EI acquisitions plus the sequential loop ([`acquisition`]),
//! * numerical checks of the small-length-scale limits of the posterior
//!   variance ([`theory`]),
//! * total Sobol' indices and elementary effects ([`sensitivity`]),
//! * the benchmark functions ([`testfns`]).
//!
//! The kernel, linear-algebra and kriging code is generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the common double-precision case.

pub mod acquisition;
pub mod designs;
mod error;
pub mod gp;
pub mod kernels;
pub mod numeric;
mod points;
mod scalar;
pub mod sensitivity;
pub mod testfns;
pub mod theory;

pub use error::{Error, Result};
pub use points::Points;
pub use scalar::Scalar;

pub use acquisition::{AcquisitionKind, AcquisitionSpec, RunLog};
pub use designs::{DesignMatrix, Generator};
pub use gp::{FitOptions, Prediction};
pub use kernels::KernelFamily;
pub use numeric::BoxOptimizerConfig;
pub use testfns::TestFunction;

pub type KernelSpec = kernels::KernelSpec<f64>;
pub type KernelSpec32 = kernels::KernelSpec<f32>;
pub type GpModel = gp::GpModel<f64>;
pub type GpModel32 = gp::GpModel<f32>;
pub type CholeskyFactor = numeric::CholeskyFactor<f64>;
pub type PointSet = Points<f64>;
