//! Spectral analysis of the linear operator L.
//!
//! L acts diagonally on powers: L x^p = λ(p) x^p with
//! λ(p) = Σ atoms w·Σₖ aₖ^p. Everything downstream is driven by the spectral
//! function μ(p) = (λ(p) − 1)/p: its minimizer p₀ bounds the attraction
//! branch of self-similar profiles, the maximal root s* of μ(s) = μ(1)
//! separates finite from divergent profile moments, and γ(p, μ) =
//! λ(p)/(1 + pμ) is the contraction factor of the profile iteration.
//!
//! λ′ is differentiated exactly at atom level (a^p ln a), so the minimizer
//! search needs no step-size tuning. Scales exactly 0 contribute nothing for
//! p > 0 and count once for p = 0 (measure convention for ∫K(a)aᵖ).

use crate::error::{require, Error, Result};
use crate::math::{x_ln_x, z_plus_one_minus_z_ln};
use crate::model::MaxwellModel;
use crate::quad::GaussLegendre;
use crate::roots::brent;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Search range for p₀ and s*: scales ≤ 1 make λ decay monotonically, so
/// roots beyond 64 are numerically indistinguishable from the +∞ flag.
pub const P_SEARCH_LO: f64 = 1e-3;
pub const P_SEARCH_HI: f64 = 64.0;

/// Root-finder tolerance on function values.
pub const ROOT_FTOL: f64 = 1e-12;

/// A positive abscissa that may be pushed to +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl Cutoff {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Cutoff::Finite(v) => Some(*v),
            Cutoff::Infinite => None,
        }
    }
}

/// Location of the spectral minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralMinimum {
    Finite { p0: f64, mu_p0: f64 },
    /// μ is monotone decreasing on the whole search range (shape A).
    Infinite,
}

/// The four qualitative shapes of the spectral function μ(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralShape {
    /// No minimum: μ decreasing, all scales ≤ 1.
    A,
    /// Minimum exists, all scales ≤ 1.
    B,
    /// Scales above 1 present and μ(p₀) > 0.
    C,
    /// Scales above 1 present and μ(p₀) < 0.
    D,
}

impl SpectralShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralShape::A => "a",
            SpectralShape::B => "b",
            SpectralShape::C => "c",
            SpectralShape::D => "d",
        }
    }
}

/// λ(p) = Σ w Σₖ aₖ^p for p ≥ 0 (λ(0) counts every slot).
pub fn lambda(model: &MaxwellModel, p: f64) -> Result<f64> {
    require(p >= 0.0, "p", p, ">= 0")?;
    let mut acc = 0.0;
    for (w, scales) in model.atoms() {
        let mut s = 0.0;
        for &a in scales {
            if p == 0.0 {
                s += 1.0;
            } else if a > 0.0 {
                s += a.powf(p);
            }
        }
        acc += w * s;
    }
    Ok(acc)
}

/// λ′(p) = Σ w Σₖ aₖ^p ln aₖ (slots at 0 contribute nothing).
pub fn lambda_prime(model: &MaxwellModel, p: f64) -> Result<f64> {
    require(p >= 0.0, "p", p, ">= 0")?;
    let mut acc = 0.0;
    for (w, scales) in model.atoms() {
        for &a in scales {
            if a > 0.0 {
                acc += w * a.powf(p) * a.ln();
            }
        }
    }
    Ok(acc)
}

/// μ(p) = (λ(p) − 1)/p for p > 0.
pub fn mu(model: &MaxwellModel, p: f64) -> Result<f64> {
    require(p > 0.0, "p", p, "> 0")?;
    Ok((lambda(model, p)? - 1.0) / p)
}

/// ψ(p) = pλ′(p) − λ(p) + 1: the increasing function whose unique zero is
/// the spectral minimum (μ′ = ψ/p²).
pub fn psi(model: &MaxwellModel, p: f64) -> Result<f64> {
    Ok(p * lambda_prime(model, p)? - lambda(model, p)? + 1.0)
}

/// μ′(p) = ψ(p)/p².
pub fn mu_prime(model: &MaxwellModel, p: f64) -> Result<f64> {
    require(p > 0.0, "p", p, "> 0")?;
    Ok(psi(model, p)? / (p * p))
}

/// Locate the minimizer of μ by bracketing the zero of ψ on
/// [P_SEARCH_LO, P_SEARCH_HI]. Returns the +∞ flag when ψ stays negative
/// (no minimum in range). Errors on purely linear models.
pub fn find_p0(model: &MaxwellModel, tol: f64) -> Result<SpectralMinimum> {
    require(tol > 0.0, "tol", tol, "> 0")?;
    if model.is_linear() {
        return Err(Error::PurelyLinear);
    }
    let psi_hi = psi(model, P_SEARCH_HI)?;
    if psi_hi < 0.0 {
        return Ok(SpectralMinimum::Infinite);
    }
    let psi_lo = psi(model, P_SEARCH_LO)?;
    if psi_lo >= 0.0 {
        // minimum at or below the search floor; clamp there
        return Ok(SpectralMinimum::Finite { p0: P_SEARCH_LO, mu_p0: mu(model, P_SEARCH_LO)? });
    }
    let r = brent(|p| psi(model, p).unwrap_or(f64::NAN), P_SEARCH_LO, P_SEARCH_HI, tol, 200);
    Ok(SpectralMinimum::Finite { p0: r.root, mu_p0: mu(model, r.root)? })
}

/// Unique p ∈ (0, p₀) with μ(p) = mu_star, on the decreasing branch.
pub fn invert_mu(model: &MaxwellModel, mu_star: f64) -> Result<f64> {
    let hi = match find_p0(model, ROOT_FTOL)? {
        SpectralMinimum::Finite { p0, mu_p0 } => {
            if mu_star <= mu_p0 {
                return Err(Error::BelowSpectralMinimum { target: mu_star, minimum: mu_p0 });
            }
            p0
        }
        SpectralMinimum::Infinite => {
            let floor = mu(model, P_SEARCH_HI)?;
            if mu_star <= floor {
                return Err(Error::BelowSpectralMinimum { target: mu_star, minimum: floor });
            }
            P_SEARCH_HI
        }
    };
    let lo = 1e-6;
    if mu(model, lo)? < mu_star {
        return Err(Error::BelowSpectralMinimum { target: mu_star, minimum: mu(model, lo)? });
    }
    let r = brent(
        |p| mu(model, p).map(|m| m - mu_star).unwrap_or(f64::NAN),
        lo,
        hi,
        ROOT_FTOL,
        200,
    );
    Ok(r.root)
}

/// Maximal root s* > 1 of μ(s) = μ(1), or the +∞ flag when μ stays below
/// μ(1) on (1, 64] (all profile moments finite). Requires p₀ > 1.
pub fn find_s_star(model: &MaxwellModel) -> Result<Cutoff> {
    let p0 = match find_p0(model, ROOT_FTOL)? {
        SpectralMinimum::Finite { p0, .. } => {
            if p0 <= 1.0 {
                return Err(Error::InvalidParameter {
                    name: "p0",
                    value: p0,
                    requirement: "> 1 for the p = 1 moment theory",
                });
            }
            p0
        }
        // μ monotone decreasing: s = 1 is the only root.
        SpectralMinimum::Infinite => return Ok(Cutoff::Infinite),
    };
    let mu1 = mu(model, 1.0)?;
    let phi_hi = mu(model, P_SEARCH_HI)? - mu1;
    if phi_hi < 0.0 {
        return Ok(Cutoff::Infinite);
    }
    // μ decreases to μ(p₀) then increases: the maximal root sits in [p₀, hi].
    let r = brent(
        |s| mu(model, s).map(|m| m - mu1).unwrap_or(f64::NAN),
        p0,
        P_SEARCH_HI,
        ROOT_FTOL,
        200,
    );
    Ok(Cutoff::Finite(r.root))
}

/// Shape classification: minimum or not, and the sign of μ(p₀) when scales
/// above 1 occur. Purely linear models are class (a) by convention.
pub fn classify(model: &MaxwellModel) -> SpectralShape {
    if model.is_linear() {
        return SpectralShape::A;
    }
    match find_p0(model, ROOT_FTOL) {
        Err(_) | Ok(SpectralMinimum::Infinite) => SpectralShape::A,
        Ok(SpectralMinimum::Finite { mu_p0, .. }) => {
            let scales_above_one = model
                .atoms()
                .any(|(w, scales)| w > 0.0 && scales.iter().any(|a| *a > 1.0 + 1e-12));
            if !scales_above_one {
                SpectralShape::B
            } else if mu_p0 >= 0.0 {
                SpectralShape::C
            } else {
                SpectralShape::D
            }
        }
    }
}

/// Thermostat coupling threshold
///
/// θ* = −∫G(s)[s ln s + (1−s)ln(1−s)]ds / ∫G(s)[βs + (1−βs)ln(1−βs)]ds,
///
/// β = 4m/(1+m)². Both quadratures run over the unnormalized G, so the ratio
/// does not depend on the kernel normalization (nor on θ). Returns +∞ when
/// the denominator degenerates (β → 0).
pub fn theta_star<G: Fn(f64) -> f64>(d: u32, g: G, m: f64) -> Result<f64> {
    require(d >= 2, "d", d as f64, ">= 2")?;
    require(m > 0.0, "m", m, "> 0")?;
    let beta = 4.0 * m / ((1.0 + m) * (1.0 + m));
    let rule = GaussLegendre::new(256);
    let mut num = 0.0;
    let mut den = 0.0;
    for (theta, w) in rule.mapped(0.0, core::f64::consts::PI) {
        let s = 0.5 * (1.0 - theta.cos());
        let gz = g(1.0 - 2.0 * s);
        if gz < 0.0 {
            return Err(Error::NegativeKernel { s, value: gz });
        }
        let weight = w * gz * (0.5 * theta.sin()).powi(d as i32 - 2);
        num -= weight * (x_ln_x(s) + x_ln_x(1.0 - s));
        den += weight * z_plus_one_minus_z_ln(beta * s);
    }
    if den <= 1e-13 * num.abs() {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

/// Contraction factor γ(p, μ) = λ(p)/(1 + p·μ) of the profile iteration;
/// requires p·μ > −1. γ(p, μ(p)) = 1 identically.
pub fn contraction_factor(model: &MaxwellModel, p: f64, mu_star: f64) -> Result<f64> {
    require(p > 0.0, "p", p, "> 0")?;
    if p * mu_star <= -1.0 {
        return Err(Error::ExponentBelowMinusOne(p * mu_star));
    }
    Ok(lambda(model, p)? / (1.0 + p * mu_star))
}

/// Immutable spectral snapshot of a model.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub lambda0: f64,
    pub minimum: SpectralMinimum,
    pub class: SpectralShape,
    /// Maximal root of μ(s) = μ(1); present when p₀ > 1.
    pub s_star: Option<Cutoff>,
    pub mu1: f64,
}

impl SpectralProfile {
    pub fn analyze(model: &MaxwellModel) -> Result<Self> {
        let lambda0 = lambda(model, 0.0)?;
        let mu1 = mu(model, 1.0)?;
        if model.is_linear() {
            return Ok(SpectralProfile {
                lambda0,
                minimum: SpectralMinimum::Infinite,
                class: SpectralShape::A,
                s_star: None,
                mu1,
            });
        }
        let minimum = find_p0(model, ROOT_FTOL)?;
        let class = classify(model);
        let s_star = match minimum {
            SpectralMinimum::Infinite => Some(Cutoff::Infinite),
            SpectralMinimum::Finite { p0, .. } if p0 > 1.0 => Some(find_s_star(model)?),
            _ => None,
        };
        Ok(SpectralProfile { lambda0, minimum, class, s_star, mu1 })
    }
}
