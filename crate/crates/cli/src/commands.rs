//! The four subcommands. Each resolves its config, runs, and writes CSV
//! tables prefixed with the resolved-config header line.

use std::path::{Path, PathBuf};

use gapp_core::continuum::{self, eigensolver_oracle, Boundary, ContinuumModel, EvolveConfig, Grid1D, WaveFunctionSet};
use gapp_core::discrete::{self, Init, SolverConfig};
use gapp_core::energy::{parse_model_file, Assignment};
use gapp_core::ldpc::{self, ChannelKind, DecoderConfig, LdpcCode};
use thiserror::Error;

use crate::config::{Config, ConfigError, Schema};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] gapp_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(gapp_core::Error::NoConvergence { .. }) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Whether the run reached its convergence target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

/// Where tables go: the `out` path (siblings next to it), or stdout.
struct Sink {
    out: Option<PathBuf>,
    header: String,
}

impl Sink {
    fn new(cfg: &Config, command: &str) -> Self {
        Self {
            out: cfg.raw("out").map(PathBuf::from),
            header: cfg.header(command),
        }
    }

    fn write_to(&self, path: Option<&Path>, body: &str) -> CliResult<()> {
        let text = format!("{}{body}", self.header);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn main(&self, body: &str) -> CliResult<()> {
        self.write_to(self.out.as_deref(), body)
    }

    /// `run.csv` gets `run.<tag>.csv` beside it.
    fn sibling(&self, tag: &str, body: &str) -> CliResult<()> {
        let path = self.out.as_ref().map(|p| sibling_path(p, tag));
        self.write_to(path.as_deref(), body)
    }
}

pub fn sibling_path(out: &Path, tag: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

// ------------------------------------------------------------------ solve

pub const SOLVE: Schema = Schema {
    keys: &[
        "model", "alpha", "beta", "hbar", "max_iter", "tol", "init", "out", "seed",
    ],
    required: &["model"],
    defaults: &[
        ("alpha", "1"),
        ("beta", "0"),
        ("max_iter", "1000"),
        ("tol", "1e-10"),
        ("init", "uniform"),
        ("seed", "0"),
    ],
};

fn parse_init(spec: &str) -> CliResult<Init> {
    if spec == "uniform" {
        return Ok(Init::Uniform);
    }
    let values = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("init must be `uniform` or a list of values, got `{spec}`")))?;
    Ok(Init::Delta(Assignment::new(values)))
}

pub fn solve(cfg: &Config) -> CliResult<Outcome> {
    let mut model = parse_model_file(&read(cfg.str("model")?)?)?;
    if let Some(hbar) = cfg.opt::<f64>("hbar")? {
        model.set_hbar(hbar);
    }
    let solver = SolverConfig {
        alpha: cfg.get("alpha")?,
        beta: cfg.get("beta")?,
        max_iter: cfg.get("max_iter")?,
        tol: cfg.get("tol")?,
        init: parse_init(cfg.str("init")?)?,
        record_trace: false,
    };
    let (psi, report) = discrete::run_solver(&model, &solver)?;
    let sink = Sink::new(cfg, "solve");
    sink.main(&discrete::beliefs_csv(&psi, &report))?;
    sink.sibling("summary", &discrete::summary_csv(&report))?;
    Ok(if report.converged {
        Outcome::Converged
    } else {
        Outcome::NotConverged
    })
}

// ------------------------------------------------------------ schrodinger

const GRID_KEYS: [(&str, &str); 7] = [
    ("x_min", "-8"),
    ("x_max", "8"),
    ("points", "512"),
    ("boundary", "truncated"),
    ("hbar", "1"),
    ("mass", "1"),
    ("potential", "harmonic"),
];

pub const SCHRODINGER: Schema = Schema {
    keys: &[
        "x_min",
        "x_max",
        "points",
        "boundary",
        "hbar",
        "particles",
        "mass",
        "mass_",
        "potential",
        "potential_",
        "pair",
        "dt",
        "tol",
        "max_steps",
        "residual_tol",
        "out",
        "seed",
    ],
    required: &[],
    defaults: &[
        GRID_KEYS[0],
        GRID_KEYS[1],
        GRID_KEYS[2],
        GRID_KEYS[3],
        GRID_KEYS[4],
        GRID_KEYS[5],
        GRID_KEYS[6],
        ("particles", "1"),
        ("pair", "none"),
        ("dt", "1e-3"),
        ("tol", "1e-6"),
        ("max_steps", "200000"),
        ("residual_tol", "1e-2"),
        ("seed", "0"),
    ],
};

fn grid(cfg: &Config) -> CliResult<Grid1D> {
    let boundary = match cfg.str("boundary")? {
        "periodic" => Boundary::Periodic,
        "truncated" => Boundary::Truncated,
        other => {
            return Err(CliError::Usage(format!(
                "boundary must be periodic or truncated, got `{other}`"
            )))
        }
    };
    Ok(Grid1D::new(
        cfg.get("x_min")?,
        cfg.get("x_max")?,
        cfg.get("points")?,
        boundary,
    )?)
}

/// `zero`, `constant:c`, `harmonic` or `harmonic:omega[:center]`, the last
/// meaning `omega^2 (x - center)^2 / 2`.
fn potential(spec: &str) -> CliResult<Box<dyn Fn(f64) -> f64>> {
    let bad = || CliError::Usage(format!("unrecognised potential `{spec}`"));
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or("");
    let nums = parts
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(match (kind, nums.as_slice()) {
        ("zero", []) => Box::new(|_| 0.0),
        ("constant", &[c]) => Box::new(move |_| c),
        ("harmonic", []) => Box::new(|x| 0.5 * x * x),
        ("harmonic", &[w]) => Box::new(move |x| 0.5 * w * w * x * x),
        ("harmonic", &[w, c]) => Box::new(move |x| 0.5 * w * w * (x - c) * (x - c)),
        _ => return Err(bad()),
    })
}

fn per_particle<'a>(cfg: &'a Config, key: &str, i: usize) -> CliResult<&'a str> {
    Ok(cfg.raw(&format!("{key}_{i}")).map_or_else(|| cfg.str(key), Ok)?)
}

fn continuum_model(cfg: &Config, particles: usize) -> CliResult<ContinuumModel> {
    let masses = (0..particles)
        .map(|i| {
            per_particle(cfg, "mass", i)?
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("mass of particle {i} is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut model = ContinuumModel::new(grid(cfg)?, cfg.get("hbar")?, masses)?;
    for i in 0..particles {
        model = model.with_unary(i, potential(per_particle(cfg, "potential", i)?)?)?;
    }
    Ok(model)
}

pub fn schrodinger(cfg: &Config) -> CliResult<Outcome> {
    let particles: usize = cfg.get("particles")?;
    if particles == 0 {
        return Err(CliError::Usage("particles must be at least 1".into()));
    }
    let mut model = continuum_model(cfg, particles)?;
    match cfg.str("pair")?.split_once(':') {
        None if cfg.str("pair")? == "none" => {}
        Some(("bilinear", g)) => {
            let g: f64 = g
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad coupling `{g}`")))?;
            for i in 0..particles {
                for j in i + 1..particles {
                    model = model.with_pair(i, j, move |x, y| g * x * y)?;
                }
            }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "pair must be `none` or `bilinear:g`, got `{}`",
                cfg.str("pair")?
            )))
        }
    }
    let evolve = EvolveConfig {
        dt: cfg.get("dt")?,
        tol: cfg.get("tol")?,
        max_steps: cfg.get("max_steps")?,
        residual_tol: cfg.get("residual_tol")?,
    };
    let (psi, report) = continuum::evolve_from(&model, WaveFunctionSet::uniform(&model), &evolve, |_, _| {})?;
    let sink = Sink::new(cfg, "schrodinger");
    sink.main(&continuum::grid_csv(&model, &psi))?;
    sink.sibling("report", &continuum::report_csv(&report))?;
    Ok(if report.converged {
        Outcome::Converged
    } else {
        Outcome::NotConverged
    })
}

// ------------------------------------------------------------------- ldpc

pub const LDPC: Schema = Schema {
    keys: &[
        "alist", "channel", "points", "frames", "decoders", "alpha", "beta", "hbar", "max_iter", "rate", "out", "seed",
    ],
    required: &["alist", "points"],
    defaults: &[
        ("channel", "bsc"),
        ("frames", "1000"),
        ("decoders", "bp,gapp"),
        ("alpha", "1"),
        ("beta", "0"),
        ("hbar", "1"),
        ("max_iter", "50"),
        ("seed", "0"),
    ],
};

pub fn ldpc(cfg: &Config) -> CliResult<Outcome> {
    let code = LdpcCode::parse_alist(&read(cfg.str("alist")?)?)?;
    let kind = match cfg.str("channel")? {
        "bsc" => ChannelKind::Bsc,
        "biawgn" => ChannelKind::BiAwgnEbN0 {
            rate: cfg.opt("rate")?.unwrap_or_else(|| code.design_rate()),
        },
        other => return Err(CliError::Usage(format!("channel must be bsc or biawgn, got `{other}`"))),
    };
    let max_iter: usize = cfg.get("max_iter")?;
    let hbar: f64 = cfg.get("hbar")?;
    let mut decoders = Vec::new();
    for name in cfg.list::<String>("decoders")? {
        match name.as_str() {
            "uncoded" => decoders.push(DecoderConfig::Uncoded),
            "bp" => decoders.push(DecoderConfig::Bp { max_iter }),
            "gapp" => {
                for alpha in cfg.list::<f64>("alpha")? {
                    for beta in cfg.list::<f64>("beta")? {
                        decoders.push(DecoderConfig::Gapp {
                            alpha,
                            beta,
                            hbar,
                            max_iter,
                        });
                    }
                }
            }
            other => return Err(CliError::Usage(format!("unknown decoder `{other}`"))),
        }
    }
    let rows = ldpc::sweep(
        &code,
        kind,
        &cfg.list::<f64>("points")?,
        &decoders,
        cfg.get("frames")?,
        cfg.get("seed")?,
    )?;
    Sink::new(cfg, "ldpc").main(&ldpc::sweep_csv(&rows))?;
    Ok(Outcome::Converged)
}

// ----------------------------------------------------------------- oracle

pub const ORACLE: Schema = Schema {
    keys: &[
        "kind",
        "model",
        "x_min",
        "x_max",
        "points",
        "boundary",
        "hbar",
        "mass",
        "potential",
        "out",
        "seed",
    ],
    required: &["kind"],
    defaults: &[
        GRID_KEYS[0],
        GRID_KEYS[1],
        GRID_KEYS[2],
        GRID_KEYS[3],
        GRID_KEYS[4],
        GRID_KEYS[5],
        GRID_KEYS[6],
        ("seed", "0"),
    ],
};

pub fn oracle(cfg: &Config) -> CliResult<Outcome> {
    let sink = Sink::new(cfg, "oracle");
    match cfg.str("kind")? {
        "brute_force" => {
            let model = parse_model_file(&read(cfg.str("model")?)?)?;
            let (a, e) = discrete::brute_force_min(&model)?;
            let values: Vec<String> = a.values().iter().map(ToString::to_string).collect();
            sink.main(&format!("energy,assignment\n{e:?},{}\n", values.join(" ")))?;
        }
        "eigensolver" => {
            let model = continuum_model(cfg, 1)?;
            let frozen = WaveFunctionSet::uniform(&model);
            let (e, state) = eigensolver_oracle(&model, 0, &frozen)?;
            let grid = model.grid();
            sink.main(&format!("energy,points,h\n{e:?},{},{:?}\n", grid.points(), grid.h()))?;
            let mut body = String::from("x,psi\n");
            for (k, v) in state.iter().enumerate() {
                body.push_str(&format!("{:?},{v:?}\n", grid.x(k)));
            }
            sink.sibling("state", &body)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "kind must be brute_force or eigensolver, got `{other}`"
            )));
        }
    }
    Ok(Outcome::Converged)
}
