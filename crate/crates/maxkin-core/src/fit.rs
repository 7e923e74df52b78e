//! Least-squares helpers for small diagnostic fits.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Ordinary least squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 2, "line fit needs at least two points");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LineFit { intercept, slope, r_squared }
}

/// Least-squares parabola `y = c0 + c1·x + c2·x²` via the 3×3 normal
/// equations. Used for curvature tests on log-log data.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 3, "quadratic fit needs at least three points");
    // Shift x for conditioning.
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut s = [0.0_f64; 5];
    let mut t = [0.0_f64; 3];
    for (x, y) in xs.iter().zip(ys) {
        let d = x - mx;
        let mut p = 1.0;
        for sk in s.iter_mut() {
            *sk += p;
            p *= d;
        }
        let mut p = 1.0;
        for tk in t.iter_mut() {
            *tk += p * y;
            p *= d;
        }
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let c = solve3(a, t);
    // Un-shift: y = c0 + c1(x-mx) + c2(x-mx)^2
    [c[0] - c[1] * mx + c[2] * mx * mx, c[1] - 2.0 * c[2] * mx, c[2]]
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let diag = a[col][col];
        for row in col + 1..3 {
            let factor = a[row][col] / diag;
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// Log-log slope of positive samples, ignoring any pair with a non-positive
/// ordinate (the caller decides whether those are errors).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        if *x > 0.0 && *y > 0.0 {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    if lx.len() < 2 {
        return None;
    }
    Some(fit_line(&lx, &ly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&xs, &ys);
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 1.0, max_relative = 1e-14);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn quadratic_fit_recovers_parabola() {
        let xs: alloc::vec::Vec<f64> = (0..7).map(|i| 1.0 + 0.5 * i as f64).collect();
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x| 2.0 - x + 0.25 * x * x).collect();
        let c = fit_quadratic(&xs, &ys);
        assert_relative_eq!(c[0], 2.0, max_relative = 1e-10);
        assert_relative_eq!(c[1], -1.0, max_relative = 1e-10);
        assert_relative_eq!(c[2], 0.25, max_relative = 1e-10);
    }
}
