use anyhow::{bail, Context, Result};
use clap::Args;
use rand_distr::{Distribution, LogNormal, Pareto};
use serde::Deserialize;
use statpriv::model::{rng_for, sample};
use statpriv::{Dataset, FamilyParams};

use crate::{io, load_config, usage, Common};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Generator, e.g. `exponential:2`, `gaussian:0:1`, `lognormal:3:1.2`, `pareto:1:1.5`.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SynthConfig {
    generator: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Family(FamilyParams),
    /// Page-view style counts: log-normal body.
    LogNormal { mu: f64, sigma: f64 },
    /// One-sided heavy tail.
    Pareto { scale: f64, shape: f64 },
}

pub fn parse_generator(spec: &str) -> Result<Generator> {
    let mut parts = spec.trim().split(':');
    let name = parts.next().unwrap_or_default().to_ascii_lowercase().replace('-', "_");
    let args: Vec<f64> = parts.map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().context("generator arguments")?;
    let need = |k: usize| -> Result<()> {
        if args.len() != k {
            bail!("generator `{name}` takes {k} argument(s), got {}", args.len());
        }
        Ok(())
    };
    let g = match name.as_str() {
        "" => return usage("empty generator spec"),
        "gaussian" => {
            need(2)?;
            Generator::Family(FamilyParams::gaussian(args[0], args[1])?)
        }
        "uniform" => {
            need(2)?;
            Generator::Family(FamilyParams::uniform(args[0], args[1])?)
        }
        "exponential" => {
            need(1)?;
            Generator::Family(FamilyParams::exponential(args[0])?)
        }
        "shifted_exponential" => {
            need(2)?;
            Generator::Family(FamilyParams::shifted_exponential(args[0], args[1])?)
        }
        "geometric" => {
            need(1)?;
            Generator::Family(FamilyParams::geometric(args[0])?)
        }
        "poisson" => {
            need(1)?;
            Generator::Family(FamilyParams::poisson(args[0])?)
        }
        "binomial" => {
            need(2)?;
            if !(args[0] >= 1.0 && args[0].fract() == 0.0) {
                bail!("binomial trial count must be a positive integer");
            }
            Generator::Family(FamilyParams::binomial(args[0] as u32, args[1])?)
        }
        "categorical" => Generator::Family(FamilyParams::categorical(args)?),
        "lognormal" => {
            need(2)?;
            LogNormal::new(args[0], args[1]).context("lognormal parameters")?;
            Generator::LogNormal { mu: args[0], sigma: args[1] }
        }
        "pareto" => {
            need(2)?;
            Pareto::new(args[0], args[1]).context("pareto parameters")?;
            Generator::Pareto { scale: args[0], shape: args[1] }
        }
        other => return usage(format!("unknown generator `{other}`")),
    };
    Ok(g)
}

pub fn generate(g: &Generator, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return usage("sample count must be at least 1");
    }
    let mut rng = rng_for(seed, 0);
    Ok(match g {
        Generator::Family(theta) => sample(theta, n, seed)?,
        Generator::LogNormal { mu, sigma } => {
            let d = LogNormal::new(*mu, *sigma)?;
            Dataset::new((0..n).map(|_| d.sample(&mut rng).round()).collect())?
        }
        Generator::Pareto { scale, shape } => {
            let d = Pareto::new(*scale, *shape)?;
            Dataset::new((0..n).map(|_| d.sample(&mut rng)).collect())?
        }
    })
}

pub fn run(common: &Common, args: SynthArgs) -> Result<()> {
    let cfg: SynthConfig = load_config(common.config.as_deref())?;
    let Some(spec) = args.generator.or(cfg.generator) else { return usage("synth needs --generator") };
    let g = parse_generator(&spec)?;
    let n = args.n.or(cfg.n).unwrap_or(1000);
    let data = generate(&g, n, common.seed.or(cfg.seed).unwrap_or(0))?;
    let Some(out) = common.out.clone().or(cfg.out) else { return usage("synth needs --out") };
    io::write_dataset(&out, &data)
}
