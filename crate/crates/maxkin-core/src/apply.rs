//! Application of Γ and L to grid functions.
//!
//! On a uniform log grid, evaluating u(a·xᵢ) is an index shift by
//! ln a / h plus one fixed interpolation fraction, identical for every i.
//! Each scale slot therefore streams through the value array once with two
//! contiguous loads per node; boundary nodes fall back to the generic
//! evaluation rules. Summation order per output node is fixed
//! (terms → nodes → slots), so results do not depend on any parallel
//! decomposition a caller might add around whole applications.

use alloc::vec::Vec;

use crate::grid::GridFunction;
use crate::model::MaxwellModel;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Interior index range and interpolation data for one scale on a uniform
/// log grid: u(a·xᵢ) = (1−frac)·v[i+m] + frac·v[i+m+1] for lo ≤ i < hi.
struct Shift {
    m: i64,
    frac: f64,
    lo: usize,
    hi: usize,
}

fn shift_for(scale: f64, h: f64, n: usize) -> Shift {
    let pos = scale.ln() / h;
    let mf = pos.floor();
    let frac = pos - mf;
    let m = mf as i64;
    let lo = (-m).clamp(0, n as i64) as usize;
    let hi = (n as i64 - 1 - m).clamp(0, n as i64) as usize;
    Shift { m, frac, lo, hi }
}

fn multiply_slot(scratch: &mut [f64], u: &GridFunction, scale: f64) {
    let n = scratch.len();
    let nodes = &u.grid.nodes;
    if scale == 0.0 {
        let v0 = u.value_at_zero;
        for s in scratch.iter_mut() {
            *s *= v0;
        }
        return;
    }
    if let Some(h) = u.grid.uniform_log_step() {
        let sh = shift_for(scale, h, n);
        for i in 0..sh.lo {
            scratch[i] *= u.eval_nonneg(scale * nodes[i]);
        }
        let c0 = 1.0 - sh.frac;
        let c1 = sh.frac;
        let vals = &u.values;
        if sh.hi > sh.lo {
            let base = (sh.lo as i64 + sh.m) as usize;
            let upper = &vals[base..];
            for (k, i) in (sh.lo..sh.hi).enumerate() {
                scratch[i] *= c0 * upper[k] + c1 * upper[k + 1];
            }
        }
        for i in sh.hi..n {
            scratch[i] *= eval_at_or_beyond_max(u, scale, nodes[i], sh.m, sh.frac, i, n);
        }
    } else {
        for (s, &x) in scratch.iter_mut().zip(nodes.iter()) {
            *s *= u.eval_nonneg(scale * x);
        }
    }
}

fn add_slot(out: &mut [f64], u: &GridFunction, scale: f64, weight: f64) {
    let n = out.len();
    let nodes = &u.grid.nodes;
    if scale == 0.0 {
        let v0 = weight * u.value_at_zero;
        for o in out.iter_mut() {
            *o += v0;
        }
        return;
    }
    if let Some(h) = u.grid.uniform_log_step() {
        let sh = shift_for(scale, h, n);
        for i in 0..sh.lo {
            out[i] += weight * u.eval_nonneg(scale * nodes[i]);
        }
        let c0 = weight * (1.0 - sh.frac);
        let c1 = weight * sh.frac;
        let vals = &u.values;
        if sh.hi > sh.lo {
            let base = (sh.lo as i64 + sh.m) as usize;
            let upper = &vals[base..];
            for (k, i) in (sh.lo..sh.hi).enumerate() {
                out[i] += c0 * upper[k] + c1 * upper[k + 1];
            }
        }
        for i in sh.hi..n {
            out[i] += weight * eval_at_or_beyond_max(u, scale, nodes[i], sh.m, sh.frac, i, n);
        }
    } else {
        for (o, &x) in out.iter_mut().zip(nodes.iter()) {
            *o += weight * u.eval_nonneg(scale * x);
        }
    }
}

/// Value of u(scale·xᵢ) when the shifted index lands at or beyond the last
/// node: exactly the last node when the shift is integral, else the tail rule.
fn eval_at_or_beyond_max(u: &GridFunction, scale: f64, x: f64, m: i64, frac: f64, i: usize, n: usize) -> f64 {
    if frac == 0.0 && i as i64 + m == n as i64 - 1 {
        u.values[n - 1]
    } else {
        u.tail_value(scale * x)
    }
}

/// Write u(scale·xᵢ) for every grid node into `out`.
pub(crate) fn gather_slot(u: &GridFunction, scale: f64, out: &mut [f64]) {
    let n = out.len();
    let nodes = &u.grid.nodes;
    if scale == 0.0 {
        out.fill(u.value_at_zero);
        return;
    }
    if let Some(h) = u.grid.uniform_log_step() {
        let sh = shift_for(scale, h, n);
        for i in 0..sh.lo {
            out[i] = u.eval_nonneg(scale * nodes[i]);
        }
        let c0 = 1.0 - sh.frac;
        let c1 = sh.frac;
        let vals = &u.values;
        if sh.hi > sh.lo {
            let base = (sh.lo as i64 + sh.m) as usize;
            let upper = &vals[base..];
            for (k, i) in (sh.lo..sh.hi).enumerate() {
                out[i] = c0 * upper[k] + c1 * upper[k + 1];
            }
        }
        for i in sh.hi..n {
            out[i] = eval_at_or_beyond_max(u, scale, nodes[i], sh.m, sh.frac, i, n);
        }
    } else {
        for (o, &x) in out.iter_mut().zip(nodes.iter()) {
            *o = u.eval_nonneg(scale * x);
        }
    }
}

pub(crate) fn apply_gamma(model: &MaxwellModel, u: &GridFunction) -> GridFunction {
    let n = u.len();
    let mut out = alloc::vec![0.0; n];
    let mut scratch: Vec<f64> = alloc::vec![0.0; n];
    let mut value_at_zero = 0.0;
    let mut tail = 0.0;
    for term in &model.terms {
        for node in &term.nodes {
            scratch.fill(node.weight);
            for &scale in &node.scales {
                multiply_slot(&mut scratch, u, scale);
            }
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += s;
            }
            value_at_zero += node.weight * u.value_at_zero.powi(term.order as i32);
            let mut t = node.weight;
            for &scale in &node.scales {
                t *= if scale > 0.0 { u.tail_limit } else { u.value_at_zero };
            }
            tail += t;
        }
    }
    GridFunction {
        grid: u.grid.clone(),
        values: out,
        value_at_zero,
        tail_limit: tail,
        tail_exponent: None,
        characteristic: u.characteristic && (model.total_mass - 1.0).abs() <= 1e-12,
    }
}

pub(crate) fn apply_l(model: &MaxwellModel, u: &GridFunction) -> GridFunction {
    let n = u.len();
    let mut out = alloc::vec![0.0; n];
    let mut value_at_zero = 0.0;
    let mut tail = 0.0;
    for term in &model.terms {
        for node in &term.nodes {
            for &scale in &node.scales {
                add_slot(&mut out, u, scale, node.weight);
                value_at_zero += node.weight * u.value_at_zero;
                tail += node.weight * if scale > 0.0 { u.tail_limit } else { u.value_at_zero };
            }
        }
    }
    GridFunction {
        grid: u.grid.clone(),
        values: out,
        value_at_zero,
        tail_limit: tail,
        tail_exponent: None,
        characteristic: false,
    }
}
