use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use statpriv::analysis::{surrogate_distortion, surrogate_privacy};
use statpriv::mechanisms::release_dataset;
use statpriv::model::fit_params;
use statpriv::optimizer::BinTable;
use statpriv::{Family, FamilyParams, ParamMechanism, Prior, QuantizationMechanism, SecretSpec};

use crate::{io, load_config, parse, usage, Common};

#[derive(Args, Debug)]
pub struct ReleaseArgs {
    /// Input CSV (one numeric column).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Prior box, `lo:hi` per coordinate separated by commas.
    #[arg(long = "box")]
    prior_box: Option<String>,
    #[arg(long)]
    bin_count: Option<u32>,
    /// Synthesized bin table (JSON) used instead of a closed-form mechanism.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReleaseConfig {
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    family: Option<String>,
    secret: Option<String>,
    prior: Option<Prior>,
    bin_count: Option<u32>,
    table: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    family: Family,
    secret: SecretSpec,
    n: usize,
    fitted: FamilyParams,
    released: FamilyParams,
    surrogate_privacy: f64,
    surrogate_distortion: f64,
}

pub fn run(common: &Common, args: ReleaseArgs) -> Result<()> {
    let cfg: ReleaseConfig = load_config(common.config.as_deref())?;
    let Some(input) = args.input.or(cfg.input) else { return usage("release needs --input") };
    let Some(out) = common.out.clone().or(cfg.out) else { return usage("release needs --out") };
    let Some(family) = common.family.clone().or(cfg.family) else { return usage("release needs --family") };
    let family = parse::family(&family)?;
    let secret = parse::secret(&common.secret.clone().or(cfg.secret).unwrap_or_else(|| "mean".into()))?;

    let prior = match (args.prior_box, cfg.prior, family) {
        (Some(b), _, _) => parse::prior_box(&b)?,
        (None, Some(p), _) => p,
        (None, None, Family::Categorical { c }) => Prior::UniformSimplex { c },
        (None, None, _) => return usage("release needs a prior box (--box lo:hi,...)"),
    };
    let mech = match args.table.or(cfg.table) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let table: BinTable = serde_json::from_str(&text)?;
            QuantizationMechanism::from_table(prior, table)?
        }
        None => {
            let Some(bins) = args.bin_count.or(cfg.bin_count) else { return usage("release needs --bin-count") };
            QuantizationMechanism::new(family, secret, prior, bins)?
        }
    };
    if mech.family() != family {
        return usage(format!("table family {} differs from --family {}", mech.family().name(), family.name()));
    }

    let data = io::read_dataset(&input)?;
    let fitted = fit_params(&data, family)?;
    let released = mech.release(&fitted)?;
    let out_data = release_dataset(&data, &mech)?;
    io::write_dataset(&out, &out_data)?;

    if !common.quiet {
        let summary = Summary {
            family,
            secret,
            n: data.len(),
            fitted,
            released,
            surrogate_privacy: surrogate_privacy(&data, &out_data, &secret)?,
            surrogate_distortion: surrogate_distortion(&data, &out_data),
        };
        io::emit_json(&summary, None)?;
    }
    Ok(())
}
