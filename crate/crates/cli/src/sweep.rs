use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;
use statpriv::analysis::{surrogate_distortion, surrogate_privacy};
use statpriv::mechanisms::{release_baseline, release_dataset};
use statpriv::{BaselineMechanism, Dataset, Family, Prior, QuantizationMechanism, SecretSpec};

use crate::{io, load_config, parse, svg, synth, usage, Common, PartialFailure};

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Input CSV; alternatively --synth.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator spec, e.g. `exponential:2`.
    #[arg(long)]
    synth: Option<String>,
    /// Sample count for --synth.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "box")]
    prior_box: Option<String>,
    /// Scatter plot output.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Fill the wallclock_ms column (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
}

/// One mechanism with its hyperparameter grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismGrid {
    Quantization { bin_counts: Vec<u32> },
    ApGaussian { betas: Vec<f64> },
    DistpLaplace { betas: Vec<f64> },
    /// (bin count, Laplace scale) pairs.
    DpHistogram { pairs: Vec<(u32, f64)> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub input: Option<PathBuf>,
    pub synth: Option<String>,
    pub n: Option<usize>,
    pub family: Option<String>,
    pub secret: Option<String>,
    pub epsilon: Option<f64>,
    pub prior: Option<Prior>,
    pub mechanisms: Option<Vec<MechanismGrid>>,
    pub rng_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub timing: bool,
}

/// Grids used when the spec lists no mechanisms. Chosen for curve coverage only.
fn default_grids(with_quantization: bool) -> Vec<MechanismGrid> {
    let betas = vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
    let mut g = vec![
        MechanismGrid::ApGaussian { betas: betas.clone() },
        MechanismGrid::DistpLaplace { betas: betas.clone() },
        MechanismGrid::DpHistogram {
            pairs: [10u32, 50, 200].iter().flat_map(|&m| betas.iter().map(move |&b| (m, b * 100.0))).collect(),
        },
    ];
    if with_quantization {
        g.push(MechanismGrid::Quantization { bin_counts: vec![1, 2, 5, 10, 20, 50, 100, 200, 500] });
    }
    g
}

#[derive(Debug, Clone)]
enum Point {
    Quantization(u32),
    Ap(f64),
    DistP(f64),
    Dp(u32, f64),
}

impl Point {
    fn mechanism(&self) -> &'static str {
        match self {
            Point::Quantization(_) => "quantization",
            Point::Ap(_) => "ap_gaussian",
            Point::DistP(_) => "distp_laplace",
            Point::Dp(..) => "dp_histogram",
        }
    }
    fn params(&self) -> String {
        match self {
            Point::Quantization(b) => format!("bin_count={b}"),
            Point::Ap(b) | Point::DistP(b) => format!("beta={}", parse::num(*b)),
            Point::Dp(m, b) => format!("bins={m};beta={}", parse::num(*b)),
        }
    }
    fn key(&self) -> (&'static str, f64, f64) {
        match self {
            Point::Quantization(b) => (self.mechanism(), *b as f64, 0.0),
            Point::Ap(b) | Point::DistP(b) => (self.mechanism(), *b, 0.0),
            Point::Dp(m, b) => (self.mechanism(), *m as f64, *b),
        }
    }
}

pub struct Row {
    pub mechanism: &'static str,
    pub params: String,
    pub result: std::result::Result<(f64, f64), String>,
    pub wallclock_ms: Option<f64>,
}

struct Ctx<'a> {
    data: &'a Dataset,
    family: Family,
    secret: SecretSpec,
    prior: Option<&'a Prior>,
}

fn evaluate(ctx: &Ctx, point: &Point, seed: u64) -> Result<(f64, f64)> {
    let released = match point {
        Point::Quantization(bins) => {
            let Some(prior) = ctx.prior else { return usage("quantization needs a prior box") };
            let mech = QuantizationMechanism::new(ctx.family, ctx.secret, prior.clone(), *bins)?;
            release_dataset(ctx.data, &mech)?
        }
        Point::Ap(beta) => release_baseline(ctx.data, &BaselineMechanism::ApGaussian { beta: *beta, rng_seed: seed })?,
        Point::DistP(beta) => {
            release_baseline(ctx.data, &BaselineMechanism::DistPLaplace { beta: *beta, rng_seed: seed })?
        }
        Point::Dp(bins, beta) => release_baseline(
            ctx.data,
            &BaselineMechanism::DpHistogram { bin_count: *bins as usize, beta: *beta, rng_seed: seed },
        )?,
    };
    Ok((surrogate_privacy(ctx.data, &released, &ctx.secret)?, surrogate_distortion(ctx.data, &released)))
}

pub fn run(common: &Common, args: SweepArgs) -> Result<Option<PartialFailure>> {
    let spec: SweepSpec = load_config(common.config.as_deref())?;
    let family = parse::family(&common.family.clone().or(spec.family).unwrap_or_else(|| "gaussian".into()))?;
    let secret = parse::secret(&common.secret.clone().or(spec.secret).unwrap_or_else(|| "mean".into()))?;
    let seed = common.seed.or(spec.rng_seed).unwrap_or(0);
    if let Some(eps) = common.epsilon.or(spec.epsilon) {
        if !(eps > 0.0) {
            return usage("epsilon must be positive");
        }
    }
    let prior = match args.prior_box {
        Some(b) => Some(parse::prior_box(&b)?),
        None => spec.prior,
    };
    let prior = prior.or(match family {
        Family::Categorical { c } => Some(Prior::UniformSimplex { c }),
        _ => None,
    });

    let data = match (args.input.or(spec.input), args.synth.or(spec.synth)) {
        (Some(p), None) => io::read_dataset(&p)?,
        (None, Some(g)) => synth::generate(&synth::parse_generator(&g)?, args.n.or(spec.n).unwrap_or(10_000), seed)?,
        (Some(_), Some(_)) => return usage("give either an input file or a generator, not both"),
        (None, None) => return usage("sweep needs --input or --synth"),
    };

    let grids = spec.mechanisms.unwrap_or_else(|| default_grids(prior.is_some()));
    let mut points = Vec::new();
    for g in &grids {
        let before = points.len();
        match g {
            MechanismGrid::Quantization { bin_counts } => points.extend(bin_counts.iter().map(|&b| Point::Quantization(b))),
            MechanismGrid::ApGaussian { betas } => points.extend(betas.iter().map(|&b| Point::Ap(b))),
            MechanismGrid::DistpLaplace { betas } => points.extend(betas.iter().map(|&b| Point::DistP(b))),
            MechanismGrid::DpHistogram { pairs } => points.extend(pairs.iter().map(|&(m, b)| Point::Dp(m, b))),
        }
        if points.len() == before {
            return usage("mechanism hyperparameter grids must be non-empty");
        }
    }
    if points.is_empty() {
        return usage("sweep has no mechanisms");
    }
    points.sort_by(|a, b| {
        let (ka, kb) = (a.key(), b.key());
        ka.0.cmp(kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
    });

    let ctx = Ctx { data: &data, family, secret, prior: prior.as_ref() };
    let timing = args.timing || spec.timing;
    let rows: Vec<Row> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let start = Instant::now();
            let result = evaluate(&ctx, p, seed.wrapping_add(i as u64)).map_err(|e| format!("{e:#}"));
            Row {
                mechanism: p.mechanism(),
                params: p.params(),
                result,
                wallclock_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
            }
        })
        .collect();

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let (p, d, err) = match &r.result {
                Ok((p, d)) => (parse::num(*p), parse::num(*d), String::new()),
                Err(e) => (String::new(), String::new(), e.clone()),
            };
            let ms = r.wallclock_ms.map(|m| format!("{m:.3}")).unwrap_or_default();
            vec![r.mechanism.to_string(), r.params.clone(), p, d, ms, err]
        })
        .collect();
    let out = common.out.clone().or(spec.out);
    io::emit_csv(
        &["mechanism", "params", "surrogate_privacy", "surrogate_distortion", "wallclock_ms", "error"],
        &table,
        out.as_deref(),
    )?;
    if let Some(path) = args.svg.or(spec.svg) {
        svg::write_scatter(&path, &rows, secret == SecretSpec::Mean)?;
    }
    Ok(rows.iter().any(|r| r.result.is_err()).then_some(PartialFailure))
}
