//! Acceptance suite: one test per headline criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned here; the reference values come from closed
//! forms (Beta integrals, the elastic minimizer root, exact rationals of the
//! moment recursion) or from independent quadrature oracles.

use std::sync::Arc;

use maxkin_core::evolve::{self, EvolveOptions, Scheme};
use maxkin_core::grid::{Grid, GridFunction};
use maxkin_core::model::MaxwellModel;
use maxkin_core::moments::{self, MomentVerdict};
use maxkin_core::roots;
use maxkin_core::selfsim::{self, SolveOptions};
use maxkin_core::spectral::{self, Cutoff, SpectralMinimum};
use maxkin_core::transform;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] {}: {}", if pass { "PASS" } else { "FAIL" }, criterion, detail);
    assert!(pass, "{criterion}: {detail}");
}

fn elastic() -> MaxwellModel {
    MaxwellModel::elastic(3, 64).unwrap()
}

fn inelastic_half() -> MaxwellModel {
    MaxwellModel::inelastic(3, 0.5, 64).unwrap()
}

fn thermostat() -> MaxwellModel {
    MaxwellModel::thermostat(3, 1.0, 4.0 / 3.0, 64).unwrap()
}

fn medium_grid() -> Arc<Grid> {
    Grid::log_spaced(1e-8, 1e6, 8193).unwrap()
}

#[test]
fn criterion_01_thermostat_threshold() {
    let ts = spectral::theta_star(3, |_| 1.0, 1.0).unwrap();
    let err = (ts - 2.0).abs();
    report("criterion 1, thermostat threshold", err <= 1e-10, &format!("theta* = {ts:.14}, |err| = {err:.2e}"));
}

#[test]
fn criterion_02_elastic_spectral_identities() {
    let model = elastic();
    let mu1 = spectral::mu(&model, 1.0).unwrap();
    let mu2 = spectral::mu(&model, 2.0).unwrap();
    let mu3 = spectral::mu(&model, 3.0).unwrap();
    let mut pass = mu1.abs() <= 1e-12 && (mu2 - mu3).abs() <= 1e-10;
    let mut worst_kernel_gap: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(271828);
    for _ in 0..5 {
        let c0: f64 = rng.gen_range(0.1..2.0);
        let c1: f64 = rng.gen_range(0.0..1.0);
        let c2: f64 = rng.gen_range(0.0..1.5);
        let random = MaxwellModel::elastic_with_kernel(3, |z| c0 + c1 * (1.0 + z) + c2 * z * z, 64).unwrap();
        let gap = (spectral::mu(&random, 2.0).unwrap() - spectral::mu(&random, 3.0).unwrap()).abs();
        worst_kernel_gap = worst_kernel_gap.max(gap);
    }
    pass &= worst_kernel_gap <= 1e-8;
    report(
        "criterion 2, elastic spectral identities",
        pass,
        &format!("mu(1) = {mu1:.2e}, |mu(2)-mu(3)| = {:.2e}, worst random-kernel gap = {worst_kernel_gap:.2e}", (mu2 - mu3).abs()),
    );
}

#[test]
fn criterion_03_elastic_minimizer() {
    let model = elastic();
    match spectral::find_p0(&model, 1e-12).unwrap() {
        SpectralMinimum::Finite { p0, mu_p0 } => {
            let p0_exact = 1.0 + std::f64::consts::SQRT_2;
            let mu_exact = 2.0 * std::f64::consts::SQRT_2 - 3.0;
            let pass = (p0 - p0_exact).abs() <= 1e-8
                && p0 > 2.0
                && p0 < 3.0
                && (mu_p0 - mu_exact).abs() <= 1e-8;
            report(
                "criterion 3, elastic minimizer",
                pass,
                &format!("p0 = {p0:.12} (exact {p0_exact:.12}), mu(p0) = {mu_p0:.12}"),
            );
        }
        SpectralMinimum::Infinite => report("criterion 3, elastic minimizer", false, "no finite minimum found"),
    }
}

#[test]
fn criterion_04_contraction_identity() {
    let presets = [elastic(), thermostat(), inelastic_half()];
    let mut rng = ChaCha8Rng::seed_from_u64(314159);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let model = &presets[i % 3];
        let p0 = match spectral::find_p0(model, 1e-12).unwrap() {
            SpectralMinimum::Finite { p0, .. } => p0,
            SpectralMinimum::Infinite => 8.0,
        };
        let p: f64 = rng.gen_range(0.05..p0 * 0.98);
        let mu = spectral::mu(model, p).unwrap();
        let gamma = spectral::contraction_factor(model, p, mu).unwrap();
        worst = worst.max((gamma - 1.0).abs());
    }
    report(
        "criterion 4, contraction identity",
        worst <= 1e-13,
        &format!("worst |gamma(p, mu(p)) - 1| over 50 draws = {worst:.2e}"),
    );
}

#[test]
fn criterion_05_maxwellian_fixed_point() {
    let model = elastic();
    let grid = Grid::default_grid();
    let e = GridFunction::exponential(&grid);
    let fixed_point_err = model.gamma(&e).unwrap().sup_diff(&e);
    let mut pass = fixed_point_err <= 1e-8;

    let opts = EvolveOptions { dt: 0.1, out_stride: 2.0, scheme: Scheme::PredictorCorrector };
    let trace = evolve::evolve(&model, &e, 10.0, &opts).unwrap();
    let mut worst_drift: f64 = 0.0;
    for state in &trace.states {
        worst_drift = worst_drift.max(state.sup_diff(&e));
    }
    pass &= worst_drift <= 1e-8;
    report(
        "criterion 5, Maxwellian fixed point",
        pass,
        &format!("|Gamma(e^-x) - e^-x| = {fixed_point_err:.2e}, evolve drift up to t=10: {worst_drift:.2e}"),
    );
}

#[test]
fn criterion_06_inelastic_profile() {
    let model = inelastic_half();
    let opts = SolveOptions { tol: 1e-10, max_iter: 400, grid: None, initial: None };
    let profile = selfsim::solve_profile(&model, 1.0, &opts).unwrap();
    let r = &profile.report;
    let residual_ok = profile.sup_residual <= 1e-6;
    let bounds_ok = r.lower_margin >= -1e-10 && r.upper_margin <= 1e-10;
    let slope_ok = (r.slope_at_zero + 1.0).abs() <= 1e-3;
    let monotone_ok = profile.monotone_margin >= -1e-12;
    let pass = residual_ok && bounds_ok && slope_ok && monotone_ok;
    report(
        "criterion 6, inelastic profile",
        pass,
        &format!(
            "iters = {}, residual = {:.2e}, barrier margins = ({:.2e}, {:.2e}), slope(0) = {:.6}, iterate monotonicity margin = {:.2e}",
            profile.iterations,
            profile.sup_residual,
            r.lower_margin,
            r.upper_margin,
            r.slope_at_zero,
            profile.monotone_margin
        ),
    );
}

#[test]
fn criterion_07_attraction_rate() {
    let model = inelastic_half();
    let grid = medium_grid();
    let opts = SolveOptions { tol: 1e-10, max_iter: 400, grid: Some(grid.clone()), initial: None };
    let profile = selfsim::solve_profile(&model, 1.0, &opts).unwrap();

    let u0 = GridFunction::exponential(&grid);
    let evolve_opts = EvolveOptions { dt: 1e-2, out_stride: 1.0, scheme: Scheme::PredictorCorrector };
    let trace = evolve::evolve(&model, &u0, 40.0, &evolve_opts).unwrap();
    let mu1 = -3.0 / 16.0;
    let samples = evolve::rescaled_deviation(&trace, mu1, &profile.w, 1.0, (1e-3, 1e2)).unwrap();

    let beta = 21.0 / 128.0;
    let mut ts = Vec::new();
    let mut lns = Vec::new();
    for s in &samples {
        assert!(s.covered, "rescaled window left the grid at t = {}", s.t);
        if s.t >= 4.0 && s.sup > 0.0 {
            ts.push(s.t);
            lns.push(s.sup.ln());
        }
    }
    let fit = maxkin_core::fit::fit_line(&ts, &lns);
    let exponent = -fit.slope;
    let decreasing = samples.windows(2).skip(2).all(|w| w[1].sup <= w[0].sup * 1.01);
    let pass = exponent >= 0.8 * beta && decreasing;
    report(
        "criterion 7, self-similar attraction rate",
        pass,
        &format!("empirical exponent = {exponent:.4} vs 0.8*beta = {:.4} (beta = {beta:.4}), r^2 = {:.4}", 0.8 * beta, fit.r_squared),
    );
}

#[test]
fn criterion_08_moment_recursion() {
    let one = BigRational::from_integer(1.into());
    let nine_sevenths = BigRational::new(9.into(), 7.into());

    let table_a = moments::moment_table(&elastic(), 3).unwrap();
    let exact_a = table_a.exact_values.as_ref().unwrap();
    let table_c = moments::moment_table(&inelastic_half(), 2).unwrap();
    let exact_c = table_c.exact_values.as_ref().unwrap();

    let exact_ok = exact_a[2].as_ref() == Some(&one)
        && exact_a[3].as_ref() == Some(&one)
        && exact_c[2].as_ref() == Some(&nine_sevenths);
    let float_ok = (table_a.values[2].unwrap() - 1.0).abs() <= 1e-12
        && (table_a.values[3].unwrap() - 1.0).abs() <= 1e-12
        && (table_c.values[2].unwrap() - 9.0 / 7.0).abs() <= 1e-12;
    report(
        "criterion 8, moment recursion",
        exact_ok && float_ok,
        &format!(
            "model A: m2 = {}, m3 = {} (exact), model C: m2 = {} (exact), float m2 = {:.15}",
            exact_a[2].as_ref().unwrap(),
            exact_a[3].as_ref().unwrap(),
            exact_c[2].as_ref().unwrap(),
            table_c.values[2].unwrap()
        ),
    );
}

#[test]
fn criterion_09_tail_order() {
    let model = inelastic_half();
    let s_star = match spectral::find_s_star(&model).unwrap() {
        Cutoff::Finite(s) => s,
        Cutoff::Infinite => {
            report("criterion 9, tail order", false, "expected a finite s*");
            return;
        }
    };
    // independent bracketing of the recursion denominator s(mu(1) - mu(s))
    let mu1 = spectral::mu(&model, 1.0).unwrap();
    let denom = |s: f64| s * (mu1 - spectral::mu(&model, s).unwrap());
    let root = roots::brent(denom, s_star - 1.0, 64.0, 1e-14, 200).root;
    let bracket_ok = (root - s_star).abs() <= 1e-8;

    let s_max = s_star.ceil() as u32 + 2;
    let table = moments::moment_table(&model, s_max).unwrap();
    let mut verdicts_ok = true;
    for (s, v) in table.orders.iter().zip(&table.verdicts) {
        let expect = if (*s as f64) < s_star { MomentVerdict::Finite } else { MomentVerdict::Divergent };
        verdicts_ok &= *v == expect;
    }
    report(
        "criterion 9, tail order",
        bracket_ok && verdicts_ok,
        &format!("s* = {s_star:.10}, denominator sign change at {root:.10}, verdicts flip across it: {verdicts_ok}"),
    );
}

#[test]
fn criterion_10_lipschitz_and_contraction_suites() {
    let grid = Grid::log_spaced(1e-8, 1e6, 4097).unwrap();
    let model = inelastic_half();
    let mut rng = ChaCha8Rng::seed_from_u64(1618);
    let mut worst_slack = f64::NEG_INFINITY;
    for _ in 0..100 {
        let mk = |rng: &mut ChaCha8Rng| {
            let c1: f64 = rng.gen_range(0.05..5.0);
            let c2: f64 = rng.gen_range(0.05..5.0);
            let a: f64 = rng.gen_range(0.0..1.0);
            GridFunction::characteristic(&grid, move |x| a * (-c1 * x).exp() + (1.0 - a) * (-c2 * x).exp())
        };
        let u1 = mk(&mut rng);
        let u2 = mk(&mut rng);
        worst_slack = worst_slack.max(evolve::lipschitz_check(&model, &u1, &u2).unwrap());
    }
    let lipschitz_ok = worst_slack <= 1e-9;

    let u1 = GridFunction::exponential(&grid);
    let u2 = GridFunction::characteristic(&grid, |x| (-x).exp() * (1.0 + 0.1 * x * x * (-x).exp()));
    let opts = EvolveOptions { dt: 1e-2, out_stride: 0.5, scheme: Scheme::PredictorCorrector };
    let mut worst_violation: f64 = 0.0;
    for model in [elastic(), thermostat(), inelastic_half()] {
        let samples = evolve::contraction_check(&model, &u1, &u2, 2.0, 4.0, &opts, (1e-4, 1e2)).unwrap();
        for s in &samples {
            if s.bound > 0.0 {
                worst_violation = worst_violation.max(s.ratio / s.bound - 1.0);
            }
        }
    }
    let contraction_ok = worst_violation <= 0.02;
    report(
        "criterion 10, L-Lipschitz and contraction suites",
        lipschitz_ok && contraction_ok,
        &format!("worst Lipschitz slack = {worst_slack:.2e}, worst contraction overshoot = {:.2}%", worst_violation * 100.0),
    );
}

#[test]
fn criterion_11_transform_round_trip() {
    let grid = Grid::default_grid();

    // Gaussian pair on r in [0, 6]
    let e = GridFunction::exponential(&grid);
    let r6: Vec<f64> = (0..=120).map(|i| 6.0 * i as f64 / 120.0).collect();
    let gauss = transform::inverse_radial_fourier(&e, 3, &r6).unwrap();
    let norm = (4.0 * std::f64::consts::PI).powf(-1.5);
    let mut worst_gauss: f64 = 0.0;
    for (f, &r) in gauss.density.iter().zip(&r6) {
        let expect = norm * (-r * r / 4.0).exp();
        worst_gauss = worst_gauss.max((f - expect).abs() / expect);
    }

    // Poisson kernel pair on r in [0, 20], tail order on [10, 100]
    let sqrt_exp = GridFunction::characteristic(&grid, |x| (-x.sqrt()).exp());
    let r100: Vec<f64> = (0..=2000).map(|i| 100.0 * i as f64 / 2000.0).collect();
    let poisson = transform::inverse_radial_fourier(&sqrt_exp, 3, &r100).unwrap();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut worst_poisson: f64 = 0.0;
    for (f, &r) in poisson.density.iter().zip(&r100) {
        if r <= 20.0 {
            let expect = 1.0 / (pi2 * (1.0 + r * r).powi(2));
            worst_poisson = worst_poisson.max((f - expect).abs() / expect);
        }
    }
    let fit = transform::tail_fit(&poisson, 10.0, 100.0).unwrap();

    let pass = worst_gauss <= 1e-4 && worst_poisson <= 1e-3 && (fit.exponent - 4.0).abs() <= 0.2;
    report(
        "criterion 11, transform round trip",
        pass,
        &format!(
            "Gaussian worst rel err = {worst_gauss:.2e}, Poisson worst rel err = {worst_poisson:.2e}, tail exponent = {:.3}",
            fit.exponent
        ),
    );
}

#[test]
fn criterion_12_i_mu_bounds() {
    let ys = [0.0, 0.01, 0.05, 0.25, 1.0, 2.5, 5.0, 10.0, 15.0, 20.0];
    let mus = [
        -0.9499, -0.9, -0.75, -0.6, -0.51, -0.5, -0.49, -0.25, -0.1, 0.1, 0.5, 1.0, 1.5, 2.0,
    ];
    let mut worst_low: f64 = 0.0;
    let mut worst_high: f64 = 0.0;
    for &y in &ys {
        for &mu in &mus {
            let r = selfsim::i_mu(y, mu).unwrap();
            worst_low = worst_low.max(-r.remainder);
            worst_high = worst_high.max(r.remainder - r.bound);
        }
    }
    let pass = worst_low <= 1e-10 && worst_high <= 1e-10;
    report(
        "criterion 12, I_mu remainder bounds",
        pass,
        &format!("worst 0 <= r violation = {worst_low:.2e}, worst r <= B violation = {worst_high:.2e}"),
    );
}
