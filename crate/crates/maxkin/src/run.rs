//! Task execution: build the model and grid from a [`RunConfig`], run the
//! requested computation, emit CSVs and the summary.

use std::path::Path;
use std::sync::Arc;

use maxkin_core::evolve::{self, EvolveOptions, Scheme};
use maxkin_core::grid::{Grid, GridFunction};
use maxkin_core::model::MaxwellModel;
use maxkin_core::moments::{self, MomentVerdict};
use maxkin_core::selfsim::{self, SolveOptions};
use maxkin_core::spectral::{self, Cutoff, SpectralMinimum, SpectralProfile};
use maxkin_core::transform;

use crate::config::{ModelSpec, Numerics, RunConfig, Task, U0Spec};
use crate::modelfile;
use crate::output::{fmt, model_hash, Csv, Summary};

/// Errors of a run, split by exit code: usage/config/model problems exit
/// with 1, numerical non-convergence with 2.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("model error: {0}")]
    Model(maxkin_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(maxkin_core::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

/// Route a core error: non-convergence is a numerical failure, everything
/// else is a usage-level problem with the request.
fn core_err(e: maxkin_core::Error) -> RunError {
    match e {
        maxkin_core::Error::NoConvergence { .. } => RunError::Numerical(e),
        _ => RunError::Model(e),
    }
}

fn build_model(spec: &ModelSpec) -> Result<MaxwellModel, RunError> {
    match spec {
        ModelSpec::Elastic { d, n_quad } => MaxwellModel::elastic(*d, *n_quad).map_err(RunError::Model),
        ModelSpec::Thermostat { d, m, theta, n_quad } => {
            MaxwellModel::thermostat(*d, *m, *theta, *n_quad).map_err(RunError::Model)
        }
        ModelSpec::Inelastic { d, e, n_quad } => {
            MaxwellModel::inelastic(*d, *e, *n_quad).map_err(RunError::Model)
        }
        ModelSpec::File(path) => modelfile::read_model(path),
    }
}

fn config_echo(cfg: &RunConfig) -> String {
    let model = match &cfg.model {
        ModelSpec::Elastic { d, n_quad } => format!("preset=elastic d={d} n_quad={n_quad}"),
        ModelSpec::Thermostat { d, m, theta, n_quad } => {
            format!("preset=thermostat d={d} m={m} theta={theta} n_quad={n_quad}")
        }
        ModelSpec::Inelastic { d, e, n_quad } => format!("preset=inelastic d={d} e={e} n_quad={n_quad}"),
        ModelSpec::File(path) => format!("file={}", path.display()),
    };
    let n = &cfg.numerics;
    format!(
        "task={} seed={} {model} grid_size={} x_min={} x_max={} tol={} dt={} t_end={}",
        cfg.task.as_str(),
        cfg.seed,
        n.grid_size,
        n.x_min,
        n.x_max,
        n.tol,
        n.dt,
        n.t_end
    )
}

fn echo_config_into(summary: &mut Summary, cfg: &RunConfig, model: &MaxwellModel) {
    summary.section("run");
    summary.push("task", cfg.task.as_str());
    summary.push("seed", cfg.seed.to_string());
    summary.push("threads", cfg.threads.to_string());
    summary.push("model_hash", format!("{:016x}", model_hash(model)));
    summary.push("total_mass", fmt(model.total_mass));
    summary.section("model");
    match &cfg.model {
        ModelSpec::Elastic { d, n_quad } => {
            summary.push("preset", "elastic");
            summary.push("d", d.to_string());
            summary.push("n_quad", n_quad.to_string());
        }
        ModelSpec::Thermostat { d, m, theta, n_quad } => {
            summary.push("preset", "thermostat");
            summary.push("d", d.to_string());
            summary.push("m", fmt(*m));
            summary.push("theta", fmt(*theta));
            summary.push("n_quad", n_quad.to_string());
        }
        ModelSpec::Inelastic { d, e, n_quad } => {
            summary.push("preset", "inelastic");
            summary.push("d", d.to_string());
            summary.push("e", fmt(*e));
            summary.push("n_quad", n_quad.to_string());
        }
        ModelSpec::File(path) => summary.push("file", path.display().to_string()),
    }
    let n = &cfg.numerics;
    summary.section("numerics");
    summary.push("grid_size", n.grid_size.to_string());
    summary.push("x_min", fmt(n.x_min));
    summary.push("x_max", fmt(n.x_max));
    summary.push("tol", fmt(n.tol));
    summary.push("max_iter", n.max_iter.to_string());
}

fn make_grid(n: &Numerics) -> Result<Arc<Grid>, RunError> {
    Grid::log_spaced(n.x_min, n.x_max, n.grid_size).map_err(RunError::Model)
}

fn cutoff_str(c: &Cutoff) -> String {
    match c {
        Cutoff::Finite(v) => fmt(*v),
        Cutoff::Infinite => "inf".into(),
    }
}

/// Execute the configured task. Output files land in `config.output_dir`.
pub fn run(config: &RunConfig) -> Result<(), RunError> {
    let model = build_model(&config.model)?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut summary = Summary::default();
    echo_config_into(&mut summary, config, &model);
    match config.task {
        Task::Spectral => run_spectral(config, &model, &mut summary)?,
        Task::Profile => run_profile(config, &model, &mut summary)?,
        Task::Evolve => run_evolve(config, &model, &mut summary)?,
        Task::Moments => run_moments(config, &model, &mut summary)?,
        Task::Invert => run_invert(config, &model, &mut summary)?,
    }
    summary.write_to(&config.output_dir)?;
    Ok(())
}

fn spectral_summary_lines(model: &MaxwellModel, profile: &SpectralProfile, out: &mut Vec<String>) {
    out.push(format!("lambda0 = {}", fmt(profile.lambda0)));
    out.push(format!("mu1 = {}", fmt(profile.mu1)));
    match profile.minimum {
        SpectralMinimum::Finite { p0, mu_p0 } => {
            out.push(format!("p0 = {}", fmt(p0)));
            out.push(format!("mu_p0 = {}", fmt(mu_p0)));
        }
        SpectralMinimum::Infinite => {
            out.push("p0 = inf".into());
            out.push("mu_p0 = n/a".into());
        }
    }
    out.push(format!("class = {}", profile.class.as_str()));
    out.push(format!(
        "s_star = {}",
        profile.s_star.as_ref().map_or("n/a".into(), cutoff_str)
    ));
    out.push(format!("substochastic = {}", model.is_substochastic()));
}

fn run_spectral(config: &RunConfig, model: &MaxwellModel, summary: &mut Summary) -> Result<(), RunError> {
    let n = &config.numerics;
    let profile = SpectralProfile::analyze(model).map_err(core_err)?;
    let mut csv = Csv::new("spectral", model, &config_echo(config));
    csv.header("p,lambda,mu");
    for i in 0..n.p_samples {
        let p = n.p_min + (n.p_max - n.p_min) * i as f64 / (n.p_samples - 1) as f64;
        let lambda = spectral::lambda(model, p).map_err(core_err)?;
        let mu = spectral::mu(model, p).map_err(core_err)?;
        csv.row(&[fmt(p), fmt(lambda), fmt(mu)]);
    }
    let mut lines = Vec::new();
    spectral_summary_lines(model, &profile, &mut lines);
    if let ModelSpec::Thermostat { d, m, .. } = &config.model {
        let ts = spectral::theta_star(*d, |_| 1.0, *m).map_err(core_err)?;
        lines.push(format!("theta_star = {}", fmt(ts)));
    }
    summary.section("results");
    for line in &lines {
        csv.comment(line);
        if let Some((k, v)) = line.split_once(" = ") {
            summary.push(k, v);
        }
    }
    csv.write_to(&config.output_dir, "spectral.csv")
}

fn run_profile(config: &RunConfig, model: &MaxwellModel, summary: &mut Summary) -> Result<(), RunError> {
    let n = &config.numerics;
    let grid = make_grid(n)?;
    let opts = SolveOptions { tol: n.tol, max_iter: n.max_iter, grid: Some(grid), initial: None };
    let profile = selfsim::solve_profile(model, n.p, &opts).map_err(core_err)?;

    let mut csv = Csv::new("profile", model, &config_echo(config));
    csv.header("x_tilde,w,e_minus_x");
    for (v, &x) in profile.w.values.iter().zip(&profile.w.grid.nodes) {
        csv.row(&[fmt(x), fmt(*v), fmt((-x).exp())]);
    }
    summary.section("results");
    summary.push("p", fmt(profile.p));
    summary.push("mu_star", fmt(profile.mu_star));
    summary.push("mu_tilde", fmt(profile.mu_tilde));
    summary.push("iterations", profile.iterations.to_string());
    summary.push("residual_integral", fmt(profile.sup_residual));
    summary.push("monotone_iteration_margin", fmt(profile.monotone_margin));
    if let Some(eps) = profile.epsilon_hat {
        summary.push("epsilon_hat", fmt(eps));
    }
    let r = &profile.report;
    summary.push("bounds_ok", r.bounds_ok.to_string());
    summary.push("monotone_ok", r.monotone_ok.to_string());
    summary.push("slope_at_zero", fmt(r.slope_at_zero));
    summary.push("slope_ok", r.slope_ok.to_string());
    summary.push("derivative_bounded", r.derivative_bounded.to_string());
    summary.push("tail_value", fmt(r.tail_value));
    summary.push("tail_ok", r.tail_ok.to_string());
    summary.push("fitted_order", fmt(r.fitted_order));
    summary.push("expected_order", fmt(r.expected_order));
    summary.push("order_ok", r.order_ok.to_string());
    for line in summary.lines().iter().skip_while(|l| *l != "# results").skip(1) {
        csv.comment(line);
    }
    csv.write_to(&config.output_dir, "profile.csv")
}

fn build_u0(spec: &U0Spec, grid: &Arc<Grid>) -> Result<GridFunction, RunError> {
    match spec {
        U0Spec::Exp => Ok(GridFunction::exponential(grid)),
        U0Spec::ExpP(p) => Ok(GridFunction::stretched_exponential(grid, *p)),
        U0Spec::File(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut value_at_zero = 1.0;
            let mut nodes = Vec::new();
            let mut values = Vec::new();
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() || line.starts_with("x,") {
                    continue;
                }
                let (xs, us) = line.split_once(',').ok_or_else(|| RunError::Config {
                    line: idx + 1,
                    message: format!("expected x,u got {line:?}"),
                })?;
                let x: f64 = xs.trim().parse().map_err(|_| RunError::Config {
                    line: idx + 1,
                    message: format!("invalid abscissa {xs:?}"),
                })?;
                let u: f64 = us.trim().parse().map_err(|_| RunError::Config {
                    line: idx + 1,
                    message: format!("invalid value {us:?}"),
                })?;
                if x == 0.0 {
                    value_at_zero = u;
                } else {
                    nodes.push(x);
                    values.push(u);
                }
            }
            let source_grid = Grid::from_nodes(nodes).map_err(RunError::Model)?;
            let source = GridFunction {
                grid: source_grid,
                values,
                value_at_zero,
                tail_limit: 0.0,
                tail_exponent: None,
                characteristic: false,
            };
            let mut u0 = GridFunction::sample(grid, |x| source.eval(x).unwrap_or(0.0), value_at_zero, 0.0);
            u0.characteristic = (value_at_zero - 1.0).abs() < 1e-12 && u0.norm() <= 1.0 + 1e-12;
            Ok(u0)
        }
    }
}

fn run_evolve(config: &RunConfig, model: &MaxwellModel, summary: &mut Summary) -> Result<(), RunError> {
    let n = &config.numerics;
    let grid = make_grid(n)?;
    let u0 = build_u0(&n.u0, &grid)?;
    let opts = EvolveOptions { dt: n.dt, out_stride: n.out_stride, scheme: Scheme::PredictorCorrector };
    let trace = evolve::evolve(model, &u0, n.t_end, &opts).map_err(core_err)?;

    // deviation diagnostics against a self-similar profile, when requested
    let deviation = match n.deviation_p {
        Some(p) => {
            let solve = SolveOptions {
                tol: n.tol,
                max_iter: n.max_iter,
                grid: Some(grid.clone()),
                initial: None,
            };
            let profile = selfsim::solve_profile(model, p, &solve).map_err(core_err)?;
            let samples = evolve::rescaled_deviation(
                &trace,
                profile.mu_star,
                &profile.w,
                p,
                (n.window_lo, n.window_hi),
            )
            .map_err(core_err)?;
            summary.section("reference profile");
            summary.push("deviation_p", fmt(p));
            summary.push("mu_star", fmt(profile.mu_star));
            summary.push("profile_iterations", profile.iterations.to_string());
            Some(samples)
        }
        None => None,
    };

    let mut states = Csv::new("evolve states", model, &config_echo(config));
    states.header("t,x,u");
    for (t, state) in trace.times.iter().zip(&trace.states) {
        for (v, &x) in state.values.iter().zip(&state.grid.nodes) {
            states.row(&[fmt(*t), fmt(x), fmt(*v)]);
        }
    }
    states.write_to(&config.output_dir, "states.csv")?;

    let mut diag = Csv::new("evolve diagnostics", model, &config_echo(config));
    if deviation.is_some() {
        diag.header("t,u0val,slope0,supnorm,dev_sup,dev_weighted");
    } else {
        diag.header("t,u0val,slope0,supnorm");
    }
    for (i, (t, d)) in trace.times.iter().zip(&trace.diagnostics).enumerate() {
        let mut row = vec![fmt(*t), fmt(d.value_at_zero), fmt(d.slope_at_zero), fmt(d.sup_norm)];
        if let Some(samples) = &deviation {
            row.push(fmt(samples[i].sup));
            row.push(fmt(samples[i].weighted_sup));
        }
        diag.row(&row);
    }
    diag.write_to(&config.output_dir, "diagnostics.csv")?;

    let last = trace.diagnostics.last().expect("nonempty trace");
    summary.section("results");
    summary.push("recorded_states", trace.times.len().to_string());
    summary.push("final_t", fmt(*trace.times.last().unwrap()));
    summary.push("final_u0val", fmt(last.value_at_zero));
    summary.push("final_slope0", fmt(last.slope_at_zero));
    summary.push("final_supnorm", fmt(last.sup_norm));
    if let Some(samples) = &deviation {
        summary.push("final_dev_sup", fmt(samples.last().unwrap().sup));
    }
    Ok(())
}

fn run_moments(config: &RunConfig, model: &MaxwellModel, summary: &mut Summary) -> Result<(), RunError> {
    let n = &config.numerics;
    let table = moments::moment_table(model, n.s_max).map_err(core_err)?;
    let mut csv = Csv::new("moments", model, &config_echo(config));
    csv.header("s,m_s,verdict");
    for (i, s) in table.orders.iter().enumerate() {
        let (value, verdict) = match table.verdicts[i] {
            MomentVerdict::Finite => (fmt(table.values[i].expect("finite moment")), "finite"),
            MomentVerdict::Divergent => ("div".to_string(), "divergent"),
            MomentVerdict::Boundary => ("div".to_string(), "boundary"),
        };
        csv.row(&[s.to_string(), value, verdict.to_string()]);
    }
    let p0 = match spectral::find_p0(model, spectral::ROOT_FTOL).map_err(core_err)? {
        SpectralMinimum::Finite { p0, .. } => fmt(p0),
        SpectralMinimum::Infinite => "inf".into(),
    };
    let mu1 = spectral::mu(model, 1.0).map_err(core_err)?;
    summary.section("results");
    summary.push("s_star", cutoff_str(&table.s_star));
    summary.push("p0", p0);
    summary.push("mu1", fmt(mu1));
    summary.push("exact_arithmetic", table.exact_values.is_some().to_string());
    if let Some(exact) = &table.exact_values {
        for (i, s) in table.orders.iter().enumerate() {
            if let Some(Some(v)) = exact.get(i) {
                csv.comment(&format!("exact m_{s} = {v}"));
            }
        }
    }
    for line in summary.lines().iter().skip_while(|l| *l != "# results").skip(1) {
        csv.comment(line);
    }
    csv.write_to(&config.output_dir, "moments.csv")
}

fn run_invert(config: &RunConfig, model: &MaxwellModel, summary: &mut Summary) -> Result<(), RunError> {
    let n = &config.numerics;
    let grid = make_grid(n)?;
    // characteristic function: the physical self-similar profile at p
    let solve = SolveOptions { tol: n.tol, max_iter: n.max_iter, grid: Some(grid), initial: None };
    let profile = selfsim::solve_profile(model, n.p, &solve).map_err(core_err)?;
    let u = profile.physical();

    let r_nodes: Vec<f64> = (0..n.r_samples)
        .map(|i| n.r_max * i as f64 / (n.r_samples - 1) as f64)
        .collect();
    let dist = transform::inverse_radial_fourier(&u, n.dim, &r_nodes).map_err(core_err)?;

    let mut csv = Csv::new("invert", model, &config_echo(config));
    csv.header("r,f");
    for (f, &r) in dist.density.iter().zip(&dist.r_nodes) {
        csv.row(&[fmt(r), fmt(*f)]);
    }
    summary.section("results");
    summary.push("p", fmt(n.p));
    summary.push("dim", n.dim.to_string());
    summary.push("mass", fmt(dist.mass_estimate));
    summary.push("min_density", fmt(dist.min_density()));
    summary.push("max_density", fmt(dist.max_density()));
    if let Some((a, b)) = n.fit_window {
        let fit = transform::tail_fit(&dist, a, b).map_err(core_err)?;
        summary.push("tail_exponent", fmt(fit.exponent));
        summary.push("tail_r_squared", fmt(fit.r_squared));
        summary.push("tail_power_law", fit.power_law.to_string());
    }
    for line in summary.lines().iter().skip_while(|l| *l != "# results").skip(1) {
        csv.comment(line);
    }
    csv.write_to(&config.output_dir, "invert.csv")
}

/// Convenience wrapper used by tests: parse, resolve against a task, run.
pub fn run_config_text(text: &str, task: Task, out_dir: &Path) -> Result<(), RunError> {
    let mut draft = crate::config::parse_config(text)?;
    draft.output_dir = Some(out_dir.to_path_buf());
    let config = draft.resolve(task)?;
    run(&config)
}
