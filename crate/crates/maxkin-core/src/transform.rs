//! Velocity-space densities from isotropic characteristic functions.
//!
//! For u(x) with x = |k|², the inverse radial Fourier transform reduces to
//! one-dimensional sine/cosine integrals:
//!
//! ```text
//! d = 3:  f(r) = (2π²r)⁻¹ ∫₀^∞ k sin(kr) u(k²) dk
//! d = 1:  f(r) = π⁻¹      ∫₀^∞ cos(kr) u(k²) dk
//! ```
//!
//! evaluated with oscillation-aware composite panels (width ≤ π/(4r),
//! 16-node Gauss–Legendre per panel) truncated where u has decayed. Small
//! negative ringing in the result is quadrature error, not a defect of the
//! input: characteristic-type profiles are mixtures of infinitely divisible
//! laws and their densities are nonnegative.

use alloc::vec::Vec;

use crate::error::{require, Error, Result};
use crate::fit::{fit_quadratic, log_log_slope};
use crate::grid::GridFunction;
use crate::quad::GaussLegendre;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Magnitude below which the characteristic function counts as decayed.
const TRUNCATION_CUT: f64 = 1e-12;

/// A radial density sampled on increasing abscissas.
#[derive(Debug, Clone)]
pub struct RadialDistribution {
    pub r_nodes: Vec<f64>,
    pub density: Vec<f64>,
    pub dimension: u32,
    /// ∫ f dv estimated by composite quadrature over the sample nodes.
    pub mass_estimate: f64,
}

impl RadialDistribution {
    pub fn min_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Reconstruct the radial density in d ∈ {1, 3} from a decaying
/// characteristic-type u at the given output radii.
pub fn inverse_radial_fourier(
    u: &GridFunction,
    d: u32,
    r_nodes: &[f64],
) -> Result<RadialDistribution> {
    if d != 1 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if u.tail_limit != 0.0 {
        return Err(Error::NonzeroTail(u.tail_limit));
    }
    require(!r_nodes.is_empty(), "r_nodes", 0.0, "nonempty")?;
    if r_nodes[0] < 0.0 || r_nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid);
    }

    let k_cut = truncation_wavenumber(u);
    let rule = GaussLegendre::new(16);
    let density: Vec<f64> = r_nodes
        .iter()
        .map(|&r| {
            // panel width resolves the oscillation: ≤ π/(4r), at least 16
            // panels over the whole range for the smooth part
            let width = (core::f64::consts::PI / (4.0 * r)).min(k_cut / 16.0);
            let n_panels = (k_cut / width).ceil() as usize;
            let mut acc = 0.0;
            for p in 0..n_panels {
                let a = k_cut * p as f64 / n_panels as f64;
                let b = k_cut * (p + 1) as f64 / n_panels as f64;
                acc += rule.integrate(a, b, |k| {
                    let uv = u.eval_nonneg(k * k);
                    match (d, r == 0.0) {
                        (3, false) => k * (k * r).sin() * uv,
                        (3, true) => k * k * uv,
                        (1, false) => (k * r).cos() * uv,
                        _ => uv,
                    }
                });
            }
            match d {
                3 => {
                    if r == 0.0 {
                        acc / (2.0 * core::f64::consts::PI * core::f64::consts::PI)
                    } else {
                        acc / (2.0 * core::f64::consts::PI * core::f64::consts::PI * r)
                    }
                }
                _ => acc / core::f64::consts::PI,
            }
        })
        .collect();

    let mass = match d {
        3 => integrate_samples(r_nodes, &density, |r, f| {
            4.0 * core::f64::consts::PI * r * r * f
        }),
        _ => integrate_samples(r_nodes, &density, |_, f| 2.0 * f),
    };
    Ok(RadialDistribution { r_nodes: r_nodes.to_vec(), density, dimension: d, mass_estimate: mass })
}

/// Smallest wavenumber beyond which |u| stays below the truncation cut.
fn truncation_wavenumber(u: &GridFunction) -> f64 {
    let mut x_cut = u.grid.x_max();
    for (v, &x) in u.values.iter().zip(&u.grid.nodes).rev() {
        if v.abs() >= TRUNCATION_CUT {
            break;
        }
        x_cut = x;
    }
    x_cut.sqrt()
}

/// Composite Simpson (uniform nodes) or trapezoid over samples of g(r, f).
fn integrate_samples<W: Fn(f64, f64) -> f64>(r: &[f64], f: &[f64], weight: W) -> f64 {
    let n = r.len();
    if n < 2 {
        return 0.0;
    }
    let h = r[1] - r[0];
    let uniform = r.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h);
    let g: Vec<f64> = r.iter().zip(f).map(|(&ri, &fi)| weight(ri, fi)).collect();
    if uniform && n >= 3 {
        let mut acc = 0.0;
        let pairs = (n - 1) / 2;
        for p in 0..pairs {
            let i = 2 * p;
            acc += h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
        }
        if (n - 1) % 2 == 1 {
            acc += 0.5 * h * (g[n - 2] + g[n - 1]);
        }
        acc
    } else {
        let mut acc = 0.0;
        for i in 0..n - 1 {
            acc += 0.5 * (r[i + 1] - r[i]) * (g[i] + g[i + 1]);
        }
        acc
    }
}

/// Power-tail fit result.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    /// Positive decay order: f ~ r^{−exponent}.
    pub exponent: f64,
    pub r_squared: f64,
    /// Quadratic coefficient of the log-log fit; ≈ 0 for a true power law.
    pub curvature: f64,
    /// Curvature test verdict.
    pub power_law: bool,
}

/// Least-squares slope of log f against log r over [r_lo, r_hi]; refuses to
/// fit through nonpositive densities.
pub fn tail_fit(dist: &RadialDistribution, r_lo: f64, r_hi: f64) -> Result<TailFit> {
    require(r_lo > 0.0, "r_lo", r_lo, "> 0")?;
    require(r_hi > r_lo, "r_hi", r_hi, "> r_lo")?;
    let mut rs = Vec::new();
    let mut fs = Vec::new();
    for (&r, &f) in dist.r_nodes.iter().zip(&dist.density) {
        if r < r_lo || r > r_hi {
            continue;
        }
        if f <= 0.0 {
            return Err(Error::NonPositiveDensity { r, value: f });
        }
        rs.push(r);
        fs.push(f);
    }
    if rs.len() < 3 {
        return Err(Error::GridTooSmall { needed: 3, got: rs.len() });
    }
    let line = log_log_slope(&rs, &fs).expect("positive samples");
    let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = fs.iter().map(|f| f.ln()).collect();
    let quad = fit_quadratic(&lx, &ly);
    Ok(TailFit {
        exponent: -line.slope,
        r_squared: line.r_squared,
        curvature: quad[2],
        power_law: quad[2].abs() <= 0.1,
    })
}
