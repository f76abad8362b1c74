//! Deterministic error envelopes for kernel regressors.
//!
//! Given samples `y_n = f(x_n) + δ_n` with `|δ_n| ≤ δ̄_n` and a bound `Γ` on
//! the RKHS norm of the unknown `f`, this crate fits
//!
//! * the minimum-norm interpolant,
//! * kernel ridge regression (KRR),
//! * hard-margin ε-support-vector regression (SVR),
//!
//! and evaluates interval functions `[s(x) − e(x), s(x) + e(x)]` that are
//! guaranteed to contain `f(x)`.
//!
//! Gram matrices of smooth kernels on realistic designs are numerically
//! singular in `f64` (condition numbers of 1e20 to 1e30 are routine), so all
//! kernel evaluations, factorizations and solves that feed a bound are done in
//! 237-bit binary floating point (`f256`). That resolves condition numbers up
//! to about 1e60; a Gram matrix beyond that is reported as singular rather
//! than silently mis-solved. The public surface takes and returns `f64`.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature for
//! `std::error::Error` impls, and `serde`
//! for (de)serializable configuration types.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
mod linalg;
mod wide;

pub mod bounds;
pub mod geometry;
pub mod gram;
pub mod kernel;
pub mod models;
pub mod qp;

pub use bounds::{
    bound_comparison, bound_krr, bound_noise_free, bound_svr, envelope, intersect_envelopes, point_bound, BoundContext,
    BoundKind, ErrorEnvelope, Intersection, PointBound, PreparedBound,
};
pub use error::{Error, Result};
pub use geometry::{
    boundary_points, fill_distance, sample_grid, sample_jittered, sample_uniform, separation_distance, thin,
    thin_indices, DomainBox, SampleRng,
};
pub use gram::{factorize, posterior_deviation, GramFactorization, PowerValue, RidgedFactorization};
pub use kernel::{eval_kernel, gram, kernel_vector, GramMatrix, KernelFamily, KernelSpec, Sites};
pub use models::{
    fit_interpolant, fit_interpolant_with, fit_krr, fit_krr_with, fit_svr, fit_svr_with, predict, rkhs_norm_estimate,
    Dataset, FittedModel, ModelKind, ModelParts,
};
pub use qp::{solve_delta, solve_svr, QpOptions, QpSolution, Termination};
