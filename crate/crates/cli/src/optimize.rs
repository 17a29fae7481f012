use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use statpriv::optimizer::{binary_search_mechanism, GridProblem};

use crate::{io, load_config, parse, usage, Common};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dp,
    Greedy,
    Binary,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Distortion budget (dp, greedy).
    #[arg(long)]
    budget: Option<f64>,
    /// Privacy target (binary).
    #[arg(long)]
    privacy_target: Option<f64>,
    /// Budget search range `lo,hi` (binary).
    #[arg(long)]
    search: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    theta_lo: Option<f64>,
    #[arg(long)]
    theta_hi: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OptimizeConfig {
    problem: Option<GridProblem>,
    mode: Option<Mode>,
    budget: Option<f64>,
    privacy_target: Option<f64>,
    search: Option<(f64, f64)>,
    eta: Option<f64>,
    out: Option<std::path::PathBuf>,
}

pub fn run(common: &Common, args: OptimizeArgs) -> Result<()> {
    let cfg: OptimizeConfig = load_config(common.config.as_deref())?;
    let mut problem = match cfg.problem {
        Some(p) => p,
        None => {
            let Some(f) = &common.family else { return usage("optimize needs a problem in --config or --family") };
            let (Some(lo), Some(hi), Some(n)) = (args.theta_lo, args.theta_hi, args.grid_count) else {
                return usage("optimize needs --theta-lo, --theta-hi and --grid-count");
            };
            GridProblem {
                family: parse::family(f)?,
                secret: statpriv::SecretSpec::Mean,
                epsilon: 0.01,
                theta_lo: lo,
                theta_hi: hi,
                grid_count: n,
                prior: Default::default(),
            }
        }
    };
    if let Some(f) = &common.family {
        problem.family = parse::family(f)?;
    }
    if let Some(s) = &common.secret {
        problem.secret = parse::secret(s)?;
    }
    if let Some(e) = common.epsilon {
        problem.epsilon = e;
    }
    if let Some(v) = args.theta_lo {
        problem.theta_lo = v;
    }
    if let Some(v) = args.theta_hi {
        problem.theta_hi = v;
    }
    if let Some(v) = args.grid_count {
        problem.grid_count = v;
    }
    let grid = problem.grid()?;
    let mode = args.mode.or(cfg.mode).unwrap_or(Mode::Dp);
    let table = match mode {
        Mode::Dp | Mode::Greedy => {
            let Some(budget) = args.budget.or(cfg.budget) else { return usage("dp/greedy need --budget") };
            if mode == Mode::Dp {
                grid.dp(budget)?
            } else {
                grid.greedy(budget)?
            }
        }
        Mode::Binary => {
            let Some(target) = args.privacy_target.or(cfg.privacy_target) else {
                return usage("binary mode needs --privacy-target");
            };
            let (lo, hi) = match args.search {
                Some(s) => match parse::floats(&s)?.as_slice() {
                    [lo, hi] => (*lo, *hi),
                    _ => return usage("--search takes lo,hi"),
                },
                None => cfg.search.unwrap_or((0.0, grid.bin_distortion_idx(0, grid.len()).0)),
            };
            binary_search_mechanism(&problem, target, lo, hi, args.eta.or(cfg.eta).unwrap_or(1e-4))?
        }
    };
    io::emit_json(&table, common.out.clone().or(cfg.out).as_deref())
}
