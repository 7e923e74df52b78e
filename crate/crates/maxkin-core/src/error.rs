//! Error type shared by all modules.

use core::fmt;

/// Errors reported by model construction, operator application and the
/// solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument violated its documented domain.
    InvalidParameter { name: &'static str, value: f64, requirement: &'static str },
    /// An angular kernel was negative at a quadrature node.
    NegativeKernel { s: f64, value: f64 },
    /// A model must contain at least one interaction term.
    EmptyModel,
    /// Total mass Σ αₙ must lie in (0, 1].
    MassOutOfRange(f64),
    /// A term weight or scale was negative.
    NegativeTermData { weight: f64, scale: f64 },
    /// A term node listed a different number of scales than the term order.
    WrongArity { order: usize, got: usize },
    /// The operator contract is only guaranteed on the unit ball.
    NormExceedsUnitBall(f64),
    /// The spectral function of a purely linear model has no minimum.
    PurelyLinear,
    /// `invert_mu` target below the spectral minimum μ(p₀).
    BelowSpectralMinimum { target: f64, minimum: f64 },
    /// Requested profile exponent p not inside (0, p₀).
    OutsideAttractionBranch { p: f64, p0: f64 },
    /// The rescaled exponent must satisfy p·μ(p) > −1.
    ExponentBelowMinusOne(f64),
    /// The fixed-point iteration did not reach the tolerance.
    NoConvergence { iterations: usize, last_delta: f64, observed_ratio: f64 },
    /// Picard iteration requested outside its contraction window.
    OutsidePicardWindow { t: f64, t_max: f64 },
    /// The grid is too small for the requested operation.
    GridTooSmall { needed: usize, got: usize },
    /// Grid nodes must be strictly increasing and positive.
    InvalidGrid,
    /// Initial weighted norm ‖(u₁−u₂)/xᵖ‖ diverges as x → 0.
    InfiniteWeightedNorm { p: f64 },
    /// Rescaled evaluation left the covered x-range.
    WindowOutsideGrid { x: f64, x_max: f64 },
    /// Inverse transforms are implemented for d ∈ {1, 3} only.
    UnsupportedDimension(u32),
    /// Inverse transforms need a decaying input (tail limit 0).
    NonzeroTail(f64),
    /// Tail fitting refused: density not positive on the window.
    NonPositiveDensity { r: f64, value: f64 },
    /// Moment recursion denominator vanished away from an integer root.
    DegenerateDenominator { s: u32 },
    /// A supposedly finite moment came out nonpositive (missed divergence).
    NonPositiveMoment { s: u32, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, requirement } => {
                write!(f, "invalid parameter {name} = {value}: requires {requirement}")
            }
            Error::NegativeKernel { s, value } => {
                write!(f, "angular kernel negative at s = {s}: g = {value}")
            }
            Error::EmptyModel => write!(f, "model has no interaction terms"),
            Error::MassOutOfRange(m) => {
                write!(f, "total mass {m} outside (0, 1]")
            }
            Error::NegativeTermData { weight, scale } => {
                write!(f, "negative term data: weight = {weight}, scale = {scale}")
            }
            Error::WrongArity { order, got } => {
                write!(f, "term of order {order} given {got} scales")
            }
            Error::NormExceedsUnitBall(n) => {
                write!(f, "sup-norm {n} exceeds the unit ball")
            }
            Error::PurelyLinear => {
                write!(f, "purely linear model: spectral function has no minimum")
            }
            Error::BelowSpectralMinimum { target, minimum } => {
                write!(f, "mu target {target} not above the spectral minimum {minimum}")
            }
            Error::OutsideAttractionBranch { p, p0 } => {
                write!(f, "p = {p} not inside the attraction branch (0, {p0})")
            }
            Error::ExponentBelowMinusOne(mu) => {
                write!(f, "exponent mu = {mu} must be > -1")
            }
            Error::NoConvergence { iterations, last_delta, observed_ratio } => write!(
                f,
                "no convergence after {iterations} iterations: last delta {last_delta}, observed ratio {observed_ratio}"
            ),
            Error::OutsidePicardWindow { t, t_max } => {
                write!(f, "t = {t} outside the Picard contraction window (0, {t_max})")
            }
            Error::GridTooSmall { needed, got } => {
                write!(f, "grid too small: need {needed} nodes, got {got}")
            }
            Error::InvalidGrid => write!(f, "grid nodes must be positive and strictly increasing"),
            Error::InfiniteWeightedNorm { p } => {
                write!(f, "weighted norm with weight x^-{p} diverges at small x")
            }
            Error::WindowOutsideGrid { x, x_max } => {
                write!(f, "rescaled evaluation point {x} beyond covered range {x_max}")
            }
            Error::UnsupportedDimension(d) => {
                write!(f, "inverse radial transform supports d in {{1, 3}}, got {d}")
            }
            Error::NonzeroTail(t) => {
                write!(f, "input must decay at infinity, tail limit = {t}")
            }
            Error::NonPositiveDensity { r, value } => {
                write!(f, "density not positive on fit window: f({r}) = {value}")
            }
            Error::DegenerateDenominator { s } => {
                write!(f, "moment recursion denominator vanished at s = {s}")
            }
            Error::NonPositiveMoment { s, value } => {
                write!(f, "nonpositive moment m_{s} = {value}: missed divergence or invalid model")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Helper for the common "name must satisfy requirement" validations.
pub(crate) fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, requirement })
    }
}
