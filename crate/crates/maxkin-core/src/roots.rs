//! Safeguarded scalar root finding on a bracket.

#[allow(unused_imports)]
use num_traits::Float as _;

/// Result of a bracketing solve.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub f_root: f64,
    pub iterations: usize,
}

/// Brent's method on a sign-changing bracket [a, b].
///
/// Stops when |f| ≤ `ftol` or the bracket width shrinks below machine level;
/// when both bracket ends satisfy the tolerance the smaller abscissa wins.
/// Panics if `f(a)` and `f(b)` have the same strict sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, ftol: f64, max_iter: usize) -> RootResult {
    let mut a = a;
    let mut b = b;
    let mut fa = f(a);
    let mut fb = f(b);
    assert!(
        fa * fb <= 0.0,
        "brent: no sign change on bracket [{a}, {b}]: f = ({fa}, {fb})"
    );
    if fa.abs() <= ftol && fb.abs() <= ftol {
        let (x, fx) = if a < b { (a, fa) } else { (b, fb) };
        return RootResult { root: x, f_root: fx, iterations: 0 };
    }
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for it in 1..=max_iter {
        if fb.abs() <= ftol {
            return RootResult { root: b, f_root: fb, iterations: it };
        }
        let s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !(s > lo.min(b) && s < lo.max(b))
            || (mflag && (s - b).abs() >= 0.5 * (b - c).abs())
            || (!mflag && (s - b).abs() >= 0.5 * (c - d).abs())
            || (mflag && (b - c).abs() < 1e-300)
            || (!mflag && (c - d).abs() < 1e-300);
        let s = if cond {
            mflag = true;
            0.5 * (a + b)
        } else {
            mflag = false;
            s
        };
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
        if (a - b).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(1e-300) {
            let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
            return RootResult { root: x, f_root: fx, iterations: it };
        }
    }
    RootResult { root: b, f_root: fb, iterations: max_iter }
}

/// Scan [lo, hi] on a geometric ladder for a sign change of `f`, returning
/// the first bracketing pair, or None if `f` keeps the sign of `f(lo)`.
pub fn scan_bracket<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, steps: usize) -> Option<(f64, f64)> {
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        return Some((x0, x0));
    }
    for i in 1..=steps {
        let x1 = if i == steps { hi } else { lo * ratio.powi(i as i32) };
        let f1 = f(x1);
        if f0 * f1 <= 0.0 {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}
