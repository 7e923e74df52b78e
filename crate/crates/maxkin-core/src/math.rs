//! Small special-function and numeric helpers.

#[allow(unused_imports)]
use num_traits::Float as _;

/// Lanczos approximation of ln Γ(x) for x > 0 (g = 7, 9 coefficients).
///
/// Relative accuracy ~1e-14 on (0, 170); arguments below 1/2 go through the
/// reflection formula.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    const PI: f64 = core::f64::consts::PI;

    if x < 0.5 {
        // ln Γ(x) = ln(π / sin πx) − ln Γ(1 − x)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `z + (1 − z)·ln(1 − z)` evaluated without cancellation for small z.
///
/// This is the denominator integrand of the thermostat threshold; it behaves
/// like z²/2 + z³/6 + … as z → 0.
pub fn z_plus_one_minus_z_ln(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        // Σ_{k≥2} zᵏ / (k(k−1))
        let mut pow = z * z;
        let mut acc = 0.0;
        for k in 2..9_u32 {
            acc += pow / ((k * (k - 1)) as f64);
            pow *= z;
        }
        acc
    } else {
        z + (1.0 - z) * (-z).ln_1p()
    }
}

/// `x · ln x` with the continuous extension 0 at x = 0.
pub fn x_ln_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}
