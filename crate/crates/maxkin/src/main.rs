use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maxkin::config::{parse_config, ConfigDraft, Task, U0Spec};
use maxkin::run::{run, RunError};

/// Kinetic Maxwell models in Fourier representation: spectral functions,
/// self-similar profiles, relaxation dynamics, moments and velocity-space
/// reconstruction.
#[derive(Parser)]
#[command(name = "maxkin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue sweep and spectral summary (p0, class, s*, theta*)
    Spectral(TaskArgs),
    /// Solve the self-similar profile equation at exponent p
    Profile(TaskArgs),
    /// Integrate the relaxation equation from an initial datum
    Evolve(TaskArgs),
    /// Integer moments of the profile measure with finiteness verdicts
    Moments(TaskArgs),
    /// Reconstruct the velocity-space density of a profile
    Invert(TaskArgs),
}

#[derive(Args)]
struct TaskArgs {
    /// Run configuration file (key = value with [model]/[numerics]/[output])
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into outputs; randomized suites live in the test tree
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on internal parallelism (computations are deterministic)
    #[arg(long)]
    threads: Option<usize>,

    /// Model preset: elastic | thermostat | inelastic
    #[arg(long)]
    preset: Option<String>,
    /// Model file (mutually exclusive with --preset)
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Dimension of the preset models (>= 2)
    #[arg(long)]
    d: Option<u32>,
    /// Restitution coefficient of the inelastic preset, in (0, 1]
    #[arg(long)]
    e: Option<f64>,
    /// Thermostat particle mass ratio (> 0)
    #[arg(long)]
    m: Option<f64>,
    /// Thermostat coupling strength (> 0)
    #[arg(long)]
    theta: Option<f64>,
    /// Quadrature nodes for kernel discretization
    #[arg(long)]
    n_quad: Option<usize>,

    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    out_stride: Option<f64>,
    /// Profile exponent p in (0, p0)
    #[arg(long)]
    p: Option<f64>,
    /// Largest moment order for the moments task
    #[arg(long)]
    s_max: Option<u32>,
    /// Velocity-space dimension for the invert task (1 or 3)
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_samples: Option<usize>,
    /// Initial datum: exp, exp_p:<p> or file:<path>
    #[arg(long)]
    u0: Option<String>,
    /// Compare the evolved state against the profile at this exponent
    #[arg(long)]
    deviation_p: Option<f64>,
    /// Tail-fit window for the invert task
    #[arg(long)]
    fit_r_min: Option<f64>,
    #[arg(long)]
    fit_r_max: Option<f64>,
}

fn merge(args: TaskArgs) -> Result<ConfigDraft, RunError> {
    let mut draft = match &args.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => ConfigDraft::default(),
    };
    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = Some(v);
            }
        };
    }
    set!(draft.seed, args.seed);
    set!(draft.threads, args.threads);
    set!(draft.preset, args.preset);
    set!(draft.model_file, args.model_file);
    set!(draft.d, args.d);
    set!(draft.e, args.e);
    set!(draft.m, args.m);
    set!(draft.theta, args.theta);
    set!(draft.n_quad, args.n_quad);
    set!(draft.output_dir, args.out);
    let n = &mut draft.numerics;
    set!(n.grid_size, args.grid_size);
    set!(n.x_min, args.x_min);
    set!(n.x_max, args.x_max);
    set!(n.tol, args.tol);
    set!(n.max_iter, args.max_iter);
    set!(n.dt, args.dt);
    set!(n.t_end, args.t_end);
    set!(n.out_stride, args.out_stride);
    set!(n.p, args.p);
    set!(n.s_max, args.s_max);
    set!(n.dim, args.dim);
    set!(n.r_max, args.r_max);
    set!(n.r_samples, args.r_samples);
    set!(n.deviation_p, args.deviation_p);
    set!(n.fit_r_min, args.fit_r_min);
    set!(n.fit_r_max, args.fit_r_max);
    if let Some(text) = args.u0 {
        n.u0 = Some(parse_u0_flag(&text)?);
    }
    Ok(draft)
}

fn parse_u0_flag(text: &str) -> Result<U0Spec, RunError> {
    if text == "exp" {
        Ok(U0Spec::Exp)
    } else if let Some(p) = text.strip_prefix("exp_p:") {
        p.parse()
            .map(U0Spec::ExpP)
            .map_err(|_| RunError::Usage(format!("invalid u0 exponent {p:?}")))
    } else if let Some(path) = text.strip_prefix("file:") {
        Ok(U0Spec::File(PathBuf::from(path)))
    } else {
        Err(RunError::Usage(format!(
            "invalid --u0 {text:?}: expected exp, exp_p:<p> or file:<path>"
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Spectral(a) => (Task::Spectral, a),
        Command::Profile(a) => (Task::Profile, a),
        Command::Evolve(a) => (Task::Evolve, a),
        Command::Moments(a) => (Task::Moments, a),
        Command::Invert(a) => (Task::Invert, a),
    };
    let result = merge(args).and_then(|draft| draft.resolve(task)).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("maxkin: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
