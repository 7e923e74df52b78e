//! Integer moments of the profile measure.
//!
//! The canonical (p = 1) profile is the Laplace transform of a probability
//! measure R with unit mass and unit mean, w(x) = ∫R(τ)e^{−τx}dτ. Its
//! moments m_s = ∫R τ^s satisfy a closed recursion: multiplying the profile
//! equation by τ^s and splitting the diagonal part of the collision moment
//! gives
//!
//! ```text
//! s·(μ(1) − μ(s))·m_s = Σ_{n≥2} Σ_nodes w Σ_{k₁+..+kₙ=s, kᵢ≥1}
//!                        multinomial(s; k)·Π aᵢ^{kᵢ}·Π m_{kᵢ}
//! ```
//!
//! The coefficient s(μ(1) − μ(s)) is positive exactly for s < s*, the
//! maximal root of μ(s) = μ(1): moments above s* diverge (power-like tails),
//! and the denominator's sign change reproduces that threshold. Models whose
//! kernel data are rational (constant angular kernels in odd dimension,
//! custom atom models) carry an exact kernel form, and the recursion then
//! runs in exact rational arithmetic alongside the floating mirror.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{require, Error, Result};
use crate::exact::ExactModel;
use crate::model::MaxwellModel;
use crate::spectral::{self, Cutoff, SpectralMinimum};

#[allow(unused_imports)]
use num_traits::Float as _;

/// Finiteness classification of a moment order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentVerdict {
    Finite,
    Divergent,
    /// Order sits at the threshold (denominator vanishes).
    Boundary,
}

/// Moments m_s of the profile measure with per-order verdicts.
#[derive(Debug, Clone)]
pub struct MomentTable {
    /// Orders 0..=s_max.
    pub orders: Vec<u32>,
    /// Floating values; None where the verdict withholds a value.
    pub values: Vec<Option<f64>>,
    /// Exact rationals when the model carries exact kernel data.
    pub exact_values: Option<Vec<Option<BigRational>>>,
    pub verdicts: Vec<MomentVerdict>,
    /// Tail order from the spectral module.
    pub s_star: Cutoff,
}

/// Mixed scale moment Σ_nodes w·Πᵢ aᵢ^{kᵢ} over the terms whose order
/// matches the tuple length (other orders are skipped).
pub fn mixed_moment(model: &MaxwellModel, k: &[u32]) -> f64 {
    let mut acc = 0.0;
    for term in &model.terms {
        if term.order != k.len() {
            continue;
        }
        for node in &term.nodes {
            let mut prod = node.weight;
            for (a, &ki) in node.scales.iter().zip(k) {
                prod *= a.powi(ki as i32);
            }
            acc += prod;
        }
    }
    acc
}

fn mixed_moment_exact(exact: &ExactModel, k: &[u32]) -> BigRational {
    let mut acc = BigRational::zero();
    for term in &exact.terms {
        if term.order() == k.len() {
            acc += term.mixed_power(k);
        }
    }
    acc
}

/// Moment finiteness for a profile of order p ∈ (0, 1]: below p = 1 only
/// orders s < p are finite; at p = 1 the threshold is s*.
pub fn moment_verdict(model: &MaxwellModel, p: f64, s: f64) -> Result<MomentVerdict> {
    require(s > 0.0, "s", s, "> 0")?;
    require(p > 0.0 && p <= 1.0, "p", p, "in (0, 1]")?;
    if p < 1.0 {
        return Ok(if s < p {
            MomentVerdict::Finite
        } else if s == p {
            MomentVerdict::Boundary
        } else {
            MomentVerdict::Divergent
        });
    }
    match spectral::find_s_star(model)? {
        Cutoff::Infinite => Ok(MomentVerdict::Finite),
        Cutoff::Finite(s_star) => Ok(if s < s_star {
            MomentVerdict::Finite
        } else if s > s_star {
            MomentVerdict::Divergent
        } else {
            MomentVerdict::Boundary
        }),
    }
}

/// Compositions of s into `parts` positive integers, in lexicographic order.
fn for_each_composition<F: FnMut(&[u32])>(s: u32, parts: usize, f: &mut F) {
    fn rec<F: FnMut(&[u32])>(remaining: u32, pos: usize, buf: &mut [u32], f: &mut F) {
        let parts = buf.len();
        if pos == parts - 1 {
            buf[pos] = remaining;
            f(buf);
            return;
        }
        let slots_after = (parts - pos - 1) as u32;
        for k in 1..=remaining - slots_after {
            buf[pos] = k;
            rec(remaining - k, pos + 1, buf, f);
        }
    }
    let mut buf = alloc::vec![0u32; parts];
    rec(s, 0, &mut buf, f);
}

fn multinomial_big(s: u32, k: &[u32]) -> BigInt {
    let mut acc = factorial_big(s);
    for &ki in k {
        acc /= factorial_big(ki);
    }
    acc
}

fn factorial_big(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Run the moment recursion up to order `s_max` (the profile is taken at
/// p = 1, so the model must have p₀ > 1).
pub fn moment_table(model: &MaxwellModel, s_max: u32) -> Result<MomentTable> {
    require(s_max >= 2, "s_max", s_max as f64, ">= 2")?;
    let max_order = model.max_order();
    require(max_order >= 2, "max interaction order", max_order as f64, ">= 2 (nonlinear model)")?;
    if max_order > 8 {
        return Err(Error::InvalidParameter {
            name: "max interaction order",
            value: max_order as f64,
            requirement: "<= 8 for the multinomial expansion",
        });
    }
    match spectral::find_p0(model, spectral::ROOT_FTOL)? {
        SpectralMinimum::Finite { p0, .. } if p0 <= 1.0 => {
            return Err(Error::InvalidParameter {
                name: "p0",
                value: p0,
                requirement: "> 1 for the p = 1 moment theory",
            });
        }
        _ => {}
    }
    let s_star = spectral::find_s_star(model)?;
    let mu1 = spectral::mu(model, 1.0)?;

    let exact = model.exact.as_ref();
    let mu1_exact = exact.map(|e| e.mu(1));

    let mut values: Vec<Option<f64>> = alloc::vec![Some(1.0), Some(1.0)];
    let mut exact_values: Vec<Option<BigRational>> =
        alloc::vec![Some(BigRational::one()), Some(BigRational::one())];
    let mut verdicts = alloc::vec![MomentVerdict::Finite, MomentVerdict::Finite];
    let mut diverged = false;

    for s in 2..=s_max {
        if diverged {
            verdicts.push(MomentVerdict::Divergent);
            values.push(None);
            exact_values.push(None);
            continue;
        }
        let denom = s as f64 * (mu1 - spectral::mu(model, s as f64)?);
        let denom_exact = match (&mu1_exact, exact) {
            (Some(m1), Some(e)) => {
                Some(BigRational::from_integer(BigInt::from(s)) * (m1 - e.mu(s)))
            }
            _ => None,
        };
        // boundary/divergence from the sign of s(μ(1) − μ(s))
        let at_boundary = match &denom_exact {
            Some(d) => d.is_zero(),
            None => denom.abs() < 1e-12,
        };
        let negative = match &denom_exact {
            Some(d) => d.is_negative(),
            None => denom < 0.0,
        };
        if at_boundary {
            verdicts.push(MomentVerdict::Boundary);
            values.push(None);
            exact_values.push(None);
            diverged = true;
            continue;
        }
        if negative {
            verdicts.push(MomentVerdict::Divergent);
            values.push(None);
            exact_values.push(None);
            diverged = true;
            continue;
        }

        // assemble Σ_{n≥2} Σ_k multinomial·mixed·Π m_{k_i}
        let mut rhs = 0.0;
        let mut rhs_exact = BigRational::zero();
        for term_order in 2..=max_order {
            if !model.terms.iter().any(|t| t.order == term_order) || (term_order as u32) > s {
                continue;
            }
            for_each_composition(s, term_order, &mut |k| {
                let multi = multinomial_big(s, k);
                let mut prod = 1.0;
                for &ki in k {
                    prod *= values[ki as usize].unwrap_or(f64::NAN);
                }
                rhs += multi.to_f64().unwrap() * mixed_moment(model, k) * prod;
                if let Some(e) = exact {
                    let mut prod = BigRational::from_integer(multi.clone());
                    for &ki in k {
                        if let Some(Some(m)) = exact_values.get(ki as usize) {
                            prod *= m;
                        }
                    }
                    rhs_exact += prod * mixed_moment_exact(e, k);
                }
            });
        }
        if rhs < -1e-12 {
            return Err(Error::NonPositiveMoment { s, value: rhs });
        }
        let m = rhs / denom;
        if m <= 0.0 {
            return Err(Error::NonPositiveMoment { s, value: m });
        }
        values.push(Some(m));
        exact_values.push(denom_exact.map(|d| rhs_exact / d));
        verdicts.push(MomentVerdict::Finite);
    }

    Ok(MomentTable {
        orders: (0..=s_max).collect(),
        values,
        exact_values: exact.map(|_| exact_values),
        verdicts,
        s_star,
    })
}
