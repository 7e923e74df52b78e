//! Generalized Maxwell models as discrete measures.
//!
//! A model is a mixture of multilinear interaction terms
//!
//! ```text
//! Γ(u)(x) = Σ_terms Σ_nodes w · Π_{k=1}^n u(aₖ·x),     Σ w = total mass ≤ 1,
//! ```
//!
//! together with the positive linear majorant
//!
//! ```text
//! L(u)(x) = Σ_terms Σ_nodes w · Σ_{k=1}^n u(aₖ·x),
//! ```
//!
//! which dominates pointwise differences: |Γ(u₁) − Γ(u₂)| ≤ L(|u₁ − u₂|) on
//! the unit ball. Continuous angular kernels are discretized once at
//! construction by Gauss–Legendre quadrature after a substitution that
//! absorbs the endpoint weight [s(1−s)]^((d−3)/2), so a single weighted-atom
//! representation serves continuous kernels and delta kernels uniformly.

use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{require, Error, Result};
use crate::exact::{beta_weight_poly, one_minus_s_weight_poly, ExactModel, ExactTerm};
use crate::grid::GridFunction;
use crate::quad::GaussLegendre;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Whether the working variable x is |k|² (Fourier) or the Laplace variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Fourier,
    Laplace,
}

/// One quadrature atom of an interaction term: weight and n scale points.
#[derive(Debug, Clone, PartialEq)]
pub struct TermNode {
    pub weight: f64,
    pub scales: Vec<f64>,
}

/// A multilinearity level: all atoms of a fixed interaction order n.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    pub order: usize,
    pub nodes: Vec<TermNode>,
}

impl InteractionTerm {
    pub fn new(order: usize, nodes: Vec<TermNode>) -> Result<Self> {
        require(order >= 1, "order", order as f64, ">= 1")?;
        for node in &nodes {
            if node.scales.len() != order {
                return Err(Error::WrongArity { order, got: node.scales.len() });
            }
            if node.weight < 0.0 || node.scales.iter().any(|a| *a < 0.0) {
                let bad_scale = node.scales.iter().copied().find(|a| *a < 0.0).unwrap_or(0.0);
                return Err(Error::NegativeTermData { weight: node.weight, scale: bad_scale });
            }
        }
        Ok(InteractionTerm { order, nodes })
    }

    /// Σ of node weights (this term's share of the total mass).
    pub fn mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

/// A generalized Maxwell model in discrete-measure form.
#[derive(Debug, Clone)]
pub struct MaxwellModel {
    pub terms: Vec<InteractionTerm>,
    pub total_mass: f64,
    pub dimension_hint: Option<u32>,
    pub transform: TransformKind,
    /// Compact-support bound: max over atoms of √(Σ aₖ²).
    pub support_radius: f64,
    /// Exact rational kernel data when the construction admits it.
    pub exact: Option<ExactModel>,
}

impl MaxwellModel {
    fn assemble(
        terms: Vec<InteractionTerm>,
        dimension_hint: Option<u32>,
        transform: TransformKind,
        exact: Option<ExactModel>,
    ) -> Result<Self> {
        if terms.is_empty() || terms.iter().all(|t| t.nodes.is_empty()) {
            return Err(Error::EmptyModel);
        }
        let total_mass: f64 = terms.iter().map(|t| t.mass()).sum();
        if !(total_mass > 0.0 && total_mass <= 1.0 + 1e-12) {
            return Err(Error::MassOutOfRange(total_mass));
        }
        let mut radius: f64 = 0.0;
        for term in &terms {
            for node in &term.nodes {
                let r2: f64 = node.scales.iter().map(|a| a * a).sum();
                radius = radius.max(r2.sqrt());
            }
        }
        Ok(MaxwellModel {
            terms,
            total_mass,
            dimension_hint,
            transform,
            support_radius: radius,
            exact,
        })
    }

    /// Elastic model with a constant angular kernel (the isotropic case).
    /// Carries exact rational kernel data for odd d.
    pub fn elastic(d: u32, n_quad: usize) -> Result<Self> {
        let mut model = Self::elastic_with_kernel(d, |_| 1.0, n_quad)?;
        model.exact = elastic_exact(d);
        Ok(model)
    }

    /// Elastic model: one bilinear term with nodes (s, 1−s) and weights from
    /// the angular kernel g, normalized to total mass 1. The substitution
    /// s = (1 − cos θ)/2 keeps the endpoint weight smooth for every d ≥ 2.
    pub fn elastic_with_kernel<G: Fn(f64) -> f64>(d: u32, g: G, n_quad: usize) -> Result<Self> {
        require(d >= 2, "d", d as f64, ">= 2")?;
        require(n_quad >= 2, "n_quad", n_quad as f64, ">= 2")?;
        let nodes = angular_atoms(d, &g, n_quad)?;
        let nodes = normalize(nodes, 1.0);
        let term = InteractionTerm::new(
            2,
            nodes.into_iter().map(|(w, s)| TermNode { weight: w, scales: alloc::vec![s, 1.0 - s] }).collect(),
        )?;
        Self::assemble(alloc::vec![term], Some(d), TransformKind::Fourier, None)
    }

    /// Thermostat model (cold background, coupling θ): the elastic bilinear
    /// term with weight 1/(1+θ) plus a linear term with scales
    /// c(s) = 1 − βs, β = 4m/(1+m)², and weight θ/(1+θ).
    pub fn thermostat(d: u32, m: f64, theta: f64, n_quad: usize) -> Result<Self> {
        let mut model = Self::thermostat_with_kernel(d, |_| 1.0, m, theta, n_quad)?;
        model.exact = thermostat_exact(d, m, theta);
        Ok(model)
    }

    pub fn thermostat_with_kernel<G: Fn(f64) -> f64>(
        d: u32,
        g: G,
        m: f64,
        theta: f64,
        n_quad: usize,
    ) -> Result<Self> {
        require(d >= 2, "d", d as f64, ">= 2")?;
        require(m > 0.0, "m", m, "> 0")?;
        require(theta > 0.0, "theta", theta, "> 0")?;
        require(n_quad >= 2, "n_quad", n_quad as f64, ">= 2")?;
        let beta = 4.0 * m / ((1.0 + m) * (1.0 + m));
        let atoms = angular_atoms(d, &g, n_quad)?;
        let atoms = normalize(atoms, 1.0);
        let bilinear = InteractionTerm::new(
            2,
            atoms
                .iter()
                .map(|&(w, s)| TermNode { weight: w / (1.0 + theta), scales: alloc::vec![s, 1.0 - s] })
                .collect(),
        )?;
        let linear = InteractionTerm::new(
            1,
            atoms
                .iter()
                .map(|&(w, s)| TermNode {
                    weight: theta * w / (1.0 + theta),
                    scales: alloc::vec![1.0 - beta * s],
                })
                .collect(),
        )?;
        Self::assemble(alloc::vec![linear, bilinear], Some(d), TransformKind::Fourier, None)
    }

    /// Inelastic model with restitution coefficient e ∈ (0, 1]: one bilinear
    /// term with nodes (a·s, 1 − b·s), a = (1+e)²/4, b = (1+e)(3−e)/4.
    pub fn inelastic(d: u32, e: f64, n_quad: usize) -> Result<Self> {
        require(d >= 2, "d", d as f64, ">= 2")?;
        require(e > 0.0 && e <= 1.0, "e", e, "in (0, 1]")?;
        require(n_quad >= 2, "n_quad", n_quad as f64, ">= 2")?;
        let a = (1.0 + e) * (1.0 + e) / 4.0;
        let b = (1.0 + e) * (3.0 - e) / 4.0;
        // kernel (1−s)^((d−3)/2), made smooth by 1 − s = v².
        let rule = GaussLegendre::new(n_quad);
        let mut atoms = Vec::with_capacity(n_quad);
        for (v, w) in rule.mapped(0.0, 1.0) {
            let s = 1.0 - v * v;
            let weight = w * 2.0 * v.powi(d as i32 - 2);
            atoms.push((weight, s));
        }
        let atoms = normalize(atoms, 1.0);
        let term = InteractionTerm::new(
            2,
            atoms
                .into_iter()
                .map(|(w, s)| TermNode { weight: w, scales: alloc::vec![a * s, 1.0 - b * s] })
                .collect(),
        )?;
        let exact = inelastic_exact(d, e);
        Self::assemble(alloc::vec![term], Some(d), TransformKind::Fourier, exact)
    }

    /// Custom model from explicit terms (delta kernels are single-node
    /// terms). Sub-stochastic total mass is accepted.
    pub fn custom(
        terms: Vec<InteractionTerm>,
        transform: TransformKind,
        dimension_hint: Option<u32>,
    ) -> Result<Self> {
        let exact = atoms_exact(&terms);
        Self::assemble(terms, dimension_hint, transform, exact)
    }

    /// Total mass strictly below 1 (Γ(1) < 1; L is then not the
    /// linearization of Γ at 1, but keeps its majorant role).
    pub fn is_substochastic(&self) -> bool {
        self.total_mass < 1.0 - 1e-12
    }

    /// Largest multilinearity order with positive mass.
    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| t.mass() > 0.0)
            .map(|t| t.order)
            .max()
            .unwrap_or(1)
    }

    /// True when every term is linear (no n ≥ 2 interaction).
    pub fn is_linear(&self) -> bool {
        self.max_order() <= 1
    }

    /// The rescaled model under x̃ = x^p: every scale aₖ ↦ aₖ^p, weights
    /// unchanged. Its eigenvalues satisfy λ̃(q) = λ(p·q).
    pub fn rescale(&self, p: f64) -> Result<MaxwellModel> {
        require(p > 0.0, "p", p, "> 0")?;
        if p == 1.0 {
            return Ok(self.clone());
        }
        let terms: Vec<InteractionTerm> = self
            .terms
            .iter()
            .map(|t| InteractionTerm {
                order: t.order,
                nodes: t
                    .nodes
                    .iter()
                    .map(|n| TermNode {
                        weight: n.weight,
                        scales: n.scales.iter().map(|a| if *a > 0.0 { a.powf(p) } else { 0.0 }).collect(),
                    })
                    .collect(),
            })
            .collect();
        Self::assemble(terms, self.dimension_hint, self.transform, None)
    }

    /// Iterate (weight, scales) over every atom.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.terms
            .iter()
            .flat_map(|t| t.nodes.iter().map(|n| (n.weight, n.scales.as_slice())))
    }

    /// Γ(u): mixture of scale-dilated products. Requires ‖u‖ ≤ 1.
    pub fn gamma(&self, u: &GridFunction) -> Result<GridFunction> {
        let norm = u.norm();
        if norm > 1.0 + 1e-9 {
            return Err(Error::NormExceedsUnitBall(norm));
        }
        Ok(crate::apply::apply_gamma(self, u))
    }

    /// L(u): the positive linear majorant. Defined for any bounded u.
    pub fn l_apply(&self, u: &GridFunction) -> GridFunction {
        crate::apply::apply_l(self, u)
    }
}

/// Discretize the elastic angular kernel: returns raw (weight, s) atoms with
/// the substitution s = (1 − cos θ)/2, where the Jacobian together with
/// [s(1−s)]^((d−3)/2) becomes (sin θ / 2)^(d−2).
fn angular_atoms<G: Fn(f64) -> f64>(d: u32, g: &G, n_quad: usize) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n_quad);
    let mut atoms = Vec::with_capacity(n_quad);
    for (theta, w) in rule.mapped(0.0, core::f64::consts::PI) {
        let s = 0.5 * (1.0 - theta.cos());
        let gz = g(1.0 - 2.0 * s);
        if gz < 0.0 {
            return Err(Error::NegativeKernel { s, value: gz });
        }
        let weight = w * gz * (0.5 * theta.sin()).powi(d as i32 - 2);
        atoms.push((weight, s));
    }
    Ok(atoms)
}

/// Scale raw atom weights so they sum to `target` (the numeric normalization
/// constant A_d or C_d is absorbed here).
fn normalize(mut atoms: Vec<(f64, f64)>, target: f64) -> Vec<(f64, f64)> {
    let total: f64 = atoms.iter().map(|(w, _)| w).sum();
    for (w, _) in atoms.iter_mut() {
        *w *= target / total;
    }
    atoms
}

fn odd_dimension_nu(d: u32) -> Option<u32> {
    if d >= 3 && d % 2 == 1 {
        Some((d - 3) / 2)
    } else {
        None
    }
}

fn elastic_exact(d: u32) -> Option<ExactModel> {
    let nu = odd_dimension_nu(d)?;
    Some(ExactModel {
        terms: alloc::vec![ExactTerm::Poly {
            coeff: BigRational::one(),
            weight_poly: beta_weight_poly(nu),
            slots: alloc::vec![
                (BigRational::zero(), BigRational::one()),
                (BigRational::one(), -BigRational::one()),
            ],
        }],
    })
}

fn thermostat_exact(d: u32, m: f64, theta: f64) -> Option<ExactModel> {
    let nu = odd_dimension_nu(d)?;
    let m = BigRational::from_float(m)?;
    let theta = BigRational::from_float(theta)?;
    let one = BigRational::one();
    let one_plus_m = &one + &m;
    let beta = BigRational::from_integer(4.into()) * &m / (&one_plus_m * &one_plus_m);
    let poly = beta_weight_poly(nu);
    let bilinear = ExactTerm::Poly {
        coeff: &one / (&one + &theta),
        weight_poly: poly.clone(),
        slots: alloc::vec![
            (BigRational::zero(), BigRational::one()),
            (BigRational::one(), -BigRational::one()),
        ],
    };
    let linear = ExactTerm::Poly {
        coeff: &theta / (&one + &theta),
        weight_poly: poly,
        slots: alloc::vec![(BigRational::one(), -beta)],
    };
    Some(ExactModel { terms: alloc::vec![linear, bilinear] })
}

fn inelastic_exact(d: u32, e: f64) -> Option<ExactModel> {
    let nu = odd_dimension_nu(d)?;
    let e = BigRational::from_float(e)?;
    let one = BigRational::one();
    let four = BigRational::from_integer(4.into());
    let a = (&one + &e) * (&one + &e) / &four;
    let b = (&one + &e) * (BigRational::from_integer(3.into()) - &e) / &four;
    Some(ExactModel {
        terms: alloc::vec![ExactTerm::Poly {
            coeff: BigRational::one(),
            weight_poly: one_minus_s_weight_poly(nu),
            slots: alloc::vec![(BigRational::zero(), a), (BigRational::one(), -b)],
        }],
    })
}

fn atoms_exact(terms: &[InteractionTerm]) -> Option<ExactModel> {
    let mut out = Vec::new();
    for term in terms {
        for node in &term.nodes {
            let weight = BigRational::from_float(node.weight)?;
            let scales = node
                .scales
                .iter()
                .map(|a| BigRational::from_float(*a))
                .collect::<Option<Vec<_>>>()?;
            out.push(ExactTerm::Atom { weight, scales });
        }
    }
    Some(ExactModel { terms: out })
}
