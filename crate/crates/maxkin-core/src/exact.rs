//! Exact rational descriptions of model kernels.
//!
//! Presets built from constant angular kernels in odd dimension and custom
//! atom models have polynomial kernel data with rational coefficients, so
//! eigenvalues at integer orders and mixed scale moments are exact rationals.
//! The moment recursion uses this path when available; the floating path over
//! the discretized atoms mirrors it.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// One interaction term in exact form.
#[derive(Debug, Clone)]
pub enum ExactTerm {
    /// c · ∫₀¹ w(s) Πₖ u[(αₖ + βₖ s)·x] ds with polynomial weight w.
    Poly {
        coeff: BigRational,
        /// Coefficients of w(s), constant term first. Normalized so that
        /// ∫₀¹ w(s) ds = 1.
        weight_poly: Vec<BigRational>,
        /// Affine scale per slot: a(s) = α + β·s.
        slots: Vec<(BigRational, BigRational)>,
    },
    /// c · Πₖ u(aₖ·x): a single quadrature atom.
    Atom { weight: BigRational, scales: Vec<BigRational> },
}

impl ExactTerm {
    pub fn order(&self) -> usize {
        match self {
            ExactTerm::Poly { slots, .. } => slots.len(),
            ExactTerm::Atom { scales, .. } => scales.len(),
        }
    }

    /// Weight carried by the term (the αₙ share).
    pub fn mass(&self) -> BigRational {
        match self {
            ExactTerm::Poly { coeff, weight_poly, .. } => coeff * integrate_unit(weight_poly),
            ExactTerm::Atom { weight, .. } => weight.clone(),
        }
    }

    /// ∫ w(s)·Πᵢ aᵢ(s)^{kᵢ} ds (or the atom product) including the term
    /// coefficient.
    pub fn mixed_power(&self, k: &[u32]) -> BigRational {
        debug_assert_eq!(k.len(), self.order());
        match self {
            ExactTerm::Poly { coeff, weight_poly, slots } => {
                let mut poly = weight_poly.clone();
                for ((alpha, beta), &ki) in slots.iter().zip(k) {
                    poly = poly_mul(&poly, &affine_pow(alpha, beta, ki));
                }
                coeff * integrate_unit(&poly)
            }
            ExactTerm::Atom { weight, scales } => {
                let mut acc = weight.clone();
                for (a, &ki) in scales.iter().zip(k) {
                    acc *= rational_pow(a, ki);
                }
                acc
            }
        }
    }
}

/// Exact kernel data for a whole model.
#[derive(Debug, Clone, Default)]
pub struct ExactModel {
    pub terms: Vec<ExactTerm>,
}

impl ExactModel {
    /// λ(s) at integer order: Σ terms Σ slots of the slot power moment.
    /// Scales identically zero contribute 0 for s > 0 and 1 for s = 0,
    /// matching the counting-measure convention.
    pub fn lambda(&self, s: u32) -> BigRational {
        let mut acc = BigRational::zero();
        for term in &self.terms {
            let n = term.order();
            for slot in 0..n {
                let mut k = alloc::vec![0u32; n];
                k[slot] = s;
                if s == 0 {
                    acc += term.mass();
                } else {
                    acc += term.mixed_power(&k);
                }
            }
        }
        acc
    }

    /// μ(s) = (λ(s) − 1)/s for integer s ≥ 1.
    pub fn mu(&self, s: u32) -> BigRational {
        debug_assert!(s >= 1);
        (self.lambda(s) - BigRational::one()) / BigRational::from_integer(BigInt::from(s))
    }
}

/// Product of two polynomials with rational coefficients.
pub fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = alloc::vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// (α + β·s)^k expanded by the binomial theorem.
pub fn affine_pow(alpha: &BigRational, beta: &BigRational, k: u32) -> Vec<BigRational> {
    let mut out = alloc::vec![BigRational::zero(); k as usize + 1];
    let mut binom = BigRational::one();
    for j in 0..=k {
        // binom = C(k, j)
        out[j as usize] = &binom * rational_pow(alpha, k - j) * rational_pow(beta, j);
        if j < k {
            binom = binom * BigRational::from_integer(BigInt::from(k - j))
                / BigRational::from_integer(BigInt::from(j + 1));
        }
    }
    out
}

/// ∫₀¹ p(s) ds = Σ cⱼ/(j+1).
pub fn integrate_unit(poly: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (j, c) in poly.iter().enumerate() {
        acc += c / BigRational::from_integer(BigInt::from(j as u64 + 1));
    }
    acc
}

pub fn rational_pow(a: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= a;
    }
    acc
}

/// [s(1−s)]^ν normalized to unit integral, as polynomial coefficients.
pub fn beta_weight_poly(nu: u32) -> Vec<BigRational> {
    // s^ν (1−s)^ν
    let s_pow = {
        let mut p = alloc::vec![BigRational::zero(); nu as usize + 1];
        p[nu as usize] = BigRational::one();
        p
    };
    let one_minus = affine_pow(&BigRational::one(), &-BigRational::one(), nu);
    let raw = poly_mul(&s_pow, &one_minus);
    normalize_poly(raw)
}

/// (1−s)^ν normalized to unit integral.
pub fn one_minus_s_weight_poly(nu: u32) -> Vec<BigRational> {
    normalize_poly(affine_pow(&BigRational::one(), &-BigRational::one(), nu))
}

fn normalize_poly(poly: Vec<BigRational>) -> Vec<BigRational> {
    let total = integrate_unit(&poly);
    poly.into_iter().map(|c| c / &total).collect()
}
