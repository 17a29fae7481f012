use anyhow::Result;
use clap::Args;
use serde::Deserialize;
use statpriv::analysis::{gamma, gamma_closed_form, BoundReport, GammaMethod};
use statpriv::Prior;

use crate::{io, load_config, parse, usage, Common};

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Prior box; needed when γ has no closed form.
    #[arg(long = "box")]
    prior_box: Option<String>,
    /// Privacy budgets T in (0,1), comma separated.
    #[arg(long)]
    privacy_budgets: Option<String>,
    /// Distortion budgets, comma separated.
    #[arg(long)]
    distortion_budgets: Option<String>,
    #[arg(long)]
    gamma_grid: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundConfig {
    family: Option<String>,
    secret: Option<String>,
    epsilon: Option<f64>,
    prior: Option<Prior>,
    privacy_budgets: Option<Vec<f64>>,
    distortion_budgets: Option<Vec<f64>>,
    gamma_grid: Option<usize>,
    out: Option<std::path::PathBuf>,
}

pub fn run(common: &Common, args: BoundArgs) -> Result<()> {
    let cfg: BoundConfig = load_config(common.config.as_deref())?;
    let Some(family) = common.family.clone().or(cfg.family) else { return usage("bound needs --family") };
    let family = parse::family(&family)?;
    let secret = parse::secret(&common.secret.clone().or(cfg.secret).unwrap_or_else(|| "mean".into()))?;
    let eps = common.epsilon.or(cfg.epsilon).unwrap_or(0.01);
    if !(eps > 0.0) {
        return usage("epsilon must be positive");
    }
    let grid = args.gamma_grid.or(cfg.gamma_grid).unwrap_or(64);
    let prior = match args.prior_box {
        Some(b) => Some(parse::prior_box(&b)?),
        None => cfg.prior,
    };
    let report = match (gamma_closed_form(family, &secret)?, prior) {
        (Some(g), _) => BoundReport { family, secret, gamma: g, method: GammaMethod::ClosedForm },
        (None, Some(p)) => gamma(family, &secret, &p, grid)?,
        (None, None) => return usage("no closed-form gamma for this pair; give a prior box with --box"),
    };
    let tp = match args.privacy_budgets {
        Some(s) => parse::floats(&s)?,
        None => cfg.privacy_budgets.unwrap_or_else(|| (1..20).map(|k| k as f64 * 0.05).collect()),
    };
    let td = match args.distortion_budgets {
        Some(s) => parse::floats(&s)?,
        None => cfg.distortion_budgets.unwrap_or_else(|| [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0].map(|m| m * eps).to_vec()),
    };
    let method = match report.method {
        GammaMethod::ClosedForm => "closed_form",
        GammaMethod::NumericInf => "numeric_inf",
    };
    let mut rows = Vec::new();
    for t in tp {
        let v = report.distortion_lower_bound(eps, t)?;
        rows.push(vec!["distortion_lb".into(), parse::num(t), parse::num(report.gamma), method.into(), parse::num(v)]);
    }
    for t in td {
        let v = report.privacy_lower_bound(eps, t)?;
        rows.push(vec!["privacy_lb".into(), parse::num(t), parse::num(report.gamma), method.into(), parse::num(v)]);
    }
    io::emit_csv(&["kind", "budget", "gamma", "method", "bound"], &rows, common.out.clone().or(cfg.out).as_deref())
}
