//! Numerical core for generalized kinetic Maxwell models in Fourier
//! representation.
//!
//! The central object is the multilinear collision operator
//!
//! ```text
//! Γ(u)(x) = Σₙ Σⱼ wⱼ · u(a₁x)···u(aₙx)
//! ```
//!
//! acting on bounded functions of `x = |k|² ≥ 0` (isotropic characteristic
//! functions). Models are stored as discrete measures: lists of interaction
//! terms with quadrature weights and scale points, which covers both
//! continuous angular kernels (discretized once at construction) and delta
//! kernels of one-dimensional models.
//!
//! The crate computes:
//!
//! * the operators `Γ` and the positive linear majorant `L` on log-grid
//!   sampled functions ([`model`]),
//! * eigenvalues `λ(p)` of `L` on `x^p`, the spectral function
//!   `μ(p) = (λ(p)−1)/p`, its minimizer `p₀`, inverse, tail-order root `s*`
//!   and the thermostat coupling threshold `θ*` ([`spectral`]),
//! * self-similar profiles `w` solving `μ x w′ + w = Γ(w)` by a monotone
//!   fixed-point iteration, with verified profile properties ([`selfsim`]),
//! * the relaxation dynamics `uₜ + u = Γ(u)` with an exponential
//!   predictor-corrector integrator and a Picard short-time oracle
//!   ([`evolve`]),
//! * integer moments of the profile measure by an exact-rational recursion
//!   ([`moments`]),
//! * velocity-space densities from characteristic functions by inverse
//!   radial Fourier transforms in d = 1 and d = 3 ([`transform`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables the platform float intrinsics and `std::error::Error`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod apply;

pub mod error;
pub mod evolve;
pub mod exact;
pub mod fit;
pub mod grid;
pub mod math;
pub mod model;
pub mod moments;
pub mod quad;
pub mod roots;
pub mod selfsim;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use model::{InteractionTerm, MaxwellModel, TermNode, TransformKind};
pub use selfsim::SelfSimilarProfile;
pub use spectral::SpectralProfile;
