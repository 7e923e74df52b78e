//! Line-oriented run configuration: `key = value` entries under `[model]`,
//! `[numerics]` and `[output]` sections, `#` comments, fail-closed parsing.

use std::path::PathBuf;

use crate::run::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Spectral,
    Profile,
    Evolve,
    Moments,
    Invert,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Spectral => "spectral",
            Task::Profile => "profile",
            Task::Evolve => "evolve",
            Task::Moments => "moments",
            Task::Invert => "invert",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "spectral" => Some(Task::Spectral),
            "profile" => Some(Task::Profile),
            "evolve" => Some(Task::Evolve),
            "moments" => Some(Task::Moments),
            "invert" => Some(Task::Invert),
            _ => None,
        }
    }
}

/// Which model to build (presets resolve their normalization numerically).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Elastic { d: u32, n_quad: usize },
    Thermostat { d: u32, m: f64, theta: f64, n_quad: usize },
    Inelastic { d: u32, e: f64, n_quad: usize },
    File(PathBuf),
}

/// Initial datum for the evolve task.
#[derive(Debug, Clone, PartialEq)]
pub enum U0Spec {
    /// e^{−x}
    Exp,
    /// e^{−x^p}
    ExpP(f64),
    /// Two-column x,u samples resampled onto the run grid.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub grid_size: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dt: f64,
    pub t_end: f64,
    pub out_stride: f64,
    pub p: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub p_samples: usize,
    pub s_max: u32,
    pub dim: u32,
    pub r_max: f64,
    pub r_samples: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub fit_window: Option<(f64, f64)>,
    pub deviation_p: Option<f64>,
    pub u0: U0Spec,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            grid_size: maxkin_core::grid::DEFAULT_GRID_SIZE,
            x_min: maxkin_core::grid::DEFAULT_X_MIN,
            x_max: maxkin_core::grid::DEFAULT_X_MAX,
            tol: 1e-10,
            max_iter: 400,
            dt: 1e-2,
            t_end: 1.0,
            out_stride: 0.1,
            p: 1.0,
            p_min: 0.05,
            p_max: 8.0,
            p_samples: 160,
            s_max: 8,
            dim: 3,
            r_max: 20.0,
            r_samples: 201,
            window_lo: 1e-3,
            window_hi: 1e2,
            fit_window: None,
            deviation_p: None,
            u0: U0Spec::Exp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub seed: u64,
    pub threads: usize,
    pub model: ModelSpec,
    pub numerics: Numerics,
    pub output_dir: PathBuf,
}

/// Partially specified configuration, as read from a file; the CLI merges
/// its overrides before validation resolves a [`RunConfig`].
#[derive(Debug, Clone, Default)]
pub struct ConfigDraft {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub preset: Option<String>,
    pub model_file: Option<PathBuf>,
    pub d: Option<u32>,
    pub e: Option<f64>,
    pub m: Option<f64>,
    pub theta: Option<f64>,
    pub n_quad: Option<usize>,
    pub numerics: NumericsDraft,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct NumericsDraft {
    pub grid_size: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub out_stride: Option<f64>,
    pub p: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub p_samples: Option<usize>,
    pub s_max: Option<u32>,
    pub dim: Option<u32>,
    pub r_max: Option<f64>,
    pub r_samples: Option<usize>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub fit_r_min: Option<f64>,
    pub fit_r_max: Option<f64>,
    pub deviation_p: Option<f64>,
    pub u0: Option<U0Spec>,
}

fn config_err(line: usize, message: impl Into<String>) -> RunError {
    RunError::Config { line, message: message.into() }
}

fn parse_num<T: core::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, RunError> {
    value
        .parse::<T>()
        .map_err(|_| config_err(line, format!("invalid value for {key}: {value:?}")))
}

fn parse_u0(line: usize, value: &str) -> Result<U0Spec, RunError> {
    if value == "exp" {
        Ok(U0Spec::Exp)
    } else if let Some(p) = value.strip_prefix("exp_p:") {
        Ok(U0Spec::ExpP(parse_num(line, "u0", p)?))
    } else if let Some(path) = value.strip_prefix("file:") {
        Ok(U0Spec::File(PathBuf::from(path)))
    } else {
        Err(config_err(line, format!("invalid u0 spec {value:?}: expected exp, exp_p:<p> or file:<path>")))
    }
}

/// Parse the documented config text into a draft. Unknown sections or keys
/// and duplicate keys are errors (fail-closed).
pub fn parse_config(text: &str) -> Result<ConfigDraft, RunError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        Top,
        Model,
        Numerics,
        Output,
    }
    let mut section = Section::Top;
    let mut draft = ConfigDraft::default();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(line_no, format!("malformed section header {line:?}")))?;
            section = match name {
                "model" => Section::Model,
                "numerics" => Section::Numerics,
                "output" => Section::Output,
                other => return Err(config_err(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| config_err(line_no, format!("expected key = value, got {line:?}")))?;
        if value.is_empty() {
            return Err(config_err(line_no, format!("empty value for key {key}")));
        }
        let scoped = format!(
            "{}{key}",
            match section {
                Section::Top => "",
                Section::Model => "model.",
                Section::Numerics => "numerics.",
                Section::Output => "output.",
            }
        );
        if seen.contains(&scoped) {
            return Err(config_err(line_no, format!("duplicate key {scoped}")));
        }
        seen.push(scoped);

        match section {
            Section::Top => match key {
                "task" => {
                    draft.task = Some(
                        Task::parse(value)
                            .ok_or_else(|| config_err(line_no, format!("unknown task {value:?}")))?,
                    )
                }
                "seed" => draft.seed = Some(parse_num(line_no, key, value)?),
                "threads" => draft.threads = Some(parse_num(line_no, key, value)?),
                other => return Err(config_err(line_no, format!("unknown key {other} (top level)"))),
            },
            Section::Model => match key {
                "preset" => draft.preset = Some(value.to_string()),
                "file" => draft.model_file = Some(PathBuf::from(value)),
                "d" => draft.d = Some(parse_num(line_no, key, value)?),
                "e" => draft.e = Some(parse_num(line_no, key, value)?),
                "m" => draft.m = Some(parse_num(line_no, key, value)?),
                "theta" => draft.theta = Some(parse_num(line_no, key, value)?),
                "n_quad" => draft.n_quad = Some(parse_num(line_no, key, value)?),
                other => return Err(config_err(line_no, format!("unknown key {other} in [model]"))),
            },
            Section::Numerics => {
                let n = &mut draft.numerics;
                match key {
                    "grid_size" => n.grid_size = Some(parse_num(line_no, key, value)?),
                    "x_min" => n.x_min = Some(parse_num(line_no, key, value)?),
                    "x_max" => n.x_max = Some(parse_num(line_no, key, value)?),
                    "tol" => n.tol = Some(parse_num(line_no, key, value)?),
                    "max_iter" => n.max_iter = Some(parse_num(line_no, key, value)?),
                    "dt" => n.dt = Some(parse_num(line_no, key, value)?),
                    "t_end" => n.t_end = Some(parse_num(line_no, key, value)?),
                    "out_stride" => n.out_stride = Some(parse_num(line_no, key, value)?),
                    "p" => n.p = Some(parse_num(line_no, key, value)?),
                    "p_min" => n.p_min = Some(parse_num(line_no, key, value)?),
                    "p_max" => n.p_max = Some(parse_num(line_no, key, value)?),
                    "p_samples" => n.p_samples = Some(parse_num(line_no, key, value)?),
                    "s_max" => n.s_max = Some(parse_num(line_no, key, value)?),
                    "dim" => n.dim = Some(parse_num(line_no, key, value)?),
                    "r_max" => n.r_max = Some(parse_num(line_no, key, value)?),
                    "r_samples" => n.r_samples = Some(parse_num(line_no, key, value)?),
                    "window_lo" => n.window_lo = Some(parse_num(line_no, key, value)?),
                    "window_hi" => n.window_hi = Some(parse_num(line_no, key, value)?),
                    "fit_r_min" => n.fit_r_min = Some(parse_num(line_no, key, value)?),
                    "fit_r_max" => n.fit_r_max = Some(parse_num(line_no, key, value)?),
                    "deviation_p" => n.deviation_p = Some(parse_num(line_no, key, value)?),
                    "u0" => n.u0 = Some(parse_u0(line_no, value)?),
                    other => {
                        return Err(config_err(line_no, format!("unknown key {other} in [numerics]")))
                    }
                }
            }
            Section::Output => match key {
                "dir" => draft.output_dir = Some(PathBuf::from(value)),
                other => return Err(config_err(line_no, format!("unknown key {other} in [output]"))),
            },
        }
    }
    Ok(draft)
}

impl ConfigDraft {
    /// Validate the draft into a runnable configuration; `task` wins over a
    /// conflicting config entry only if they agree.
    pub fn resolve(self, task: Task) -> Result<RunConfig, RunError> {
        if let Some(cfg_task) = self.task {
            if cfg_task != task {
                return Err(RunError::Usage(format!(
                    "config sets task = {} but the {} subcommand was invoked",
                    cfg_task.as_str(),
                    task.as_str()
                )));
            }
        }
        let model = self.resolve_model()?;
        let defaults = Numerics::default();
        let d = self.numerics;
        let numerics = Numerics {
            grid_size: d.grid_size.unwrap_or(defaults.grid_size),
            x_min: d.x_min.unwrap_or(defaults.x_min),
            x_max: d.x_max.unwrap_or(defaults.x_max),
            tol: d.tol.unwrap_or(defaults.tol),
            max_iter: d.max_iter.unwrap_or(defaults.max_iter),
            dt: d.dt.unwrap_or(defaults.dt),
            t_end: d.t_end.unwrap_or(defaults.t_end),
            out_stride: d.out_stride.unwrap_or(defaults.out_stride),
            p: d.p.unwrap_or(defaults.p),
            p_min: d.p_min.unwrap_or(defaults.p_min),
            p_max: d.p_max.unwrap_or(defaults.p_max),
            p_samples: d.p_samples.unwrap_or(defaults.p_samples),
            s_max: d.s_max.unwrap_or(defaults.s_max),
            dim: d.dim.unwrap_or(defaults.dim),
            r_max: d.r_max.unwrap_or(defaults.r_max),
            r_samples: d.r_samples.unwrap_or(defaults.r_samples),
            window_lo: d.window_lo.unwrap_or(defaults.window_lo),
            window_hi: d.window_hi.unwrap_or(defaults.window_hi),
            fit_window: match (d.fit_r_min, d.fit_r_max) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(RunError::Usage(
                        "fit_r_min and fit_r_max must be given together".into(),
                    ))
                }
            },
            deviation_p: d.deviation_p,
            u0: d.u0.unwrap_or(defaults.u0),
        };
        validate_numerics(&numerics)?;
        Ok(RunConfig {
            task,
            seed: self.seed.unwrap_or(0),
            threads: self.threads.unwrap_or(1).max(1),
            model,
            numerics,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("maxkin_out")),
        })
    }

    fn resolve_model(&self) -> Result<ModelSpec, RunError> {
        match (&self.preset, &self.model_file) {
            (Some(_), Some(_)) => {
                Err(RunError::Usage("model preset and model file are mutually exclusive".into()))
            }
            (None, Some(path)) => Ok(ModelSpec::File(path.clone())),
            (None, None) => Err(RunError::Usage(
                "no model given: set [model] preset = elastic|thermostat|inelastic or file = <path>".into(),
            )),
            (Some(name), None) => {
                let d = self.d.unwrap_or(3);
                let n_quad = self.n_quad.unwrap_or(64);
                match name.as_str() {
                    "elastic" => Ok(ModelSpec::Elastic { d, n_quad }),
                    "thermostat" => Ok(ModelSpec::Thermostat {
                        d,
                        m: self.m.ok_or_else(|| {
                            RunError::Usage("thermostat preset requires m".into())
                        })?,
                        theta: self.theta.ok_or_else(|| {
                            RunError::Usage("thermostat preset requires theta".into())
                        })?,
                        n_quad,
                    }),
                    "inelastic" => Ok(ModelSpec::Inelastic {
                        d,
                        e: self
                            .e
                            .ok_or_else(|| RunError::Usage("inelastic preset requires e".into()))?,
                        n_quad,
                    }),
                    other => Err(RunError::Usage(format!("unknown preset {other:?}"))),
                }
            }
        }
    }
}

fn validate_numerics(n: &Numerics) -> Result<(), RunError> {
    let check = |ok: bool, key: &str, requirement: &str| -> Result<(), RunError> {
        if ok {
            Ok(())
        } else {
            Err(RunError::Usage(format!("invalid {key}: requires {requirement}")))
        }
    };
    check(n.grid_size >= 64, "grid_size", ">= 64")?;
    check(n.x_min > 0.0 && n.x_max > n.x_min, "x range", "positive and increasing")?;
    check(n.tol > 0.0, "tol", "> 0")?;
    check(n.max_iter >= 1, "max_iter", ">= 1")?;
    check(n.dt > 0.0, "dt", "> 0")?;
    check(n.t_end > 0.0, "t_end", "> 0")?;
    check(n.out_stride > 0.0, "out_stride", "> 0")?;
    check(n.p > 0.0, "p", "> 0")?;
    check(n.p_min > 0.0 && n.p_max > n.p_min, "p sweep range", "positive and increasing")?;
    check(n.p_samples >= 2, "p_samples", ">= 2")?;
    check(n.s_max >= 2, "s_max", ">= 2")?;
    check(n.dim == 1 || n.dim == 3, "dim", "1 or 3")?;
    check(n.r_max > 0.0, "r_max", "> 0")?;
    check(n.r_samples >= 3, "r_samples", ">= 3")?;
    check(n.window_lo > 0.0 && n.window_hi > n.window_lo, "window", "positive and increasing")?;
    if let Some((a, b)) = n.fit_window {
        check(a > 0.0 && b > a, "fit window", "positive and increasing")?;
    }
    if let Some(p) = n.deviation_p {
        check(p > 0.0, "deviation_p", "> 0")?;
    }
    if let U0Spec::ExpP(p) = n.u0 {
        check(p > 0.0 && p <= 1.0, "u0 exponent", "in (0, 1]")?;
    }
    Ok(())
}
