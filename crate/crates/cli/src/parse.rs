//! String forms shared by flags and config files.

use anyhow::{anyhow, bail, Context, Result};
use statpriv::{Family, Interval, Prior, SecretSpec};

/// `gaussian`, `binomial:10`, `categorical:4`, ...
pub fn family(s: &str) -> Result<Family> {
    let (name, arg) = split(s);
    let need_arg = |what: &str| arg.ok_or_else(|| anyhow!("family `{name}` needs `{name}:{what}`"));
    let f = match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "gaussian" | "normal" => Family::Gaussian,
        "uniform" => Family::Uniform,
        "exponential" | "exp" => Family::Exponential,
        "shifted_exponential" | "sexp" => Family::ShiftedExponential,
        "geometric" => Family::Geometric,
        "poisson" => Family::Poisson,
        "binomial" => Family::Binomial { n_trials: need_arg("N")?.parse().context("binomial trial count")? },
        "categorical" => Family::Categorical { c: need_arg("C")?.parse().context("category count")? },
        other => bail!("unknown family `{other}`"),
    };
    if arg.is_some() && !matches!(f, Family::Binomial { .. } | Family::Categorical { .. }) {
        bail!("family `{name}` takes no argument");
    }
    Ok(f)
}

/// `mean`, `std`, `quantile:0.95`, `fraction:2`.
pub fn secret(s: &str) -> Result<SecretSpec> {
    let (name, arg) = split(s);
    let arg = || arg.ok_or_else(|| anyhow!("secret `{name}` needs an argument, e.g. `{name}:1`"));
    Ok(match name.to_ascii_lowercase().as_str() {
        "mean" => SecretSpec::Mean,
        "std" => SecretSpec::Std,
        "quantile" => SecretSpec::Quantile { alpha: arg()?.parse().context("quantile level")? },
        "fraction" => SecretSpec::Fraction { j: arg()?.parse().context("fraction index")? },
        other => bail!("unknown secret `{other}`"),
    })
}

/// `lo:hi,lo:hi` in prior coordinate order.
pub fn prior_box(s: &str) -> Result<Prior> {
    let bounds = s
        .split(',')
        .map(|part| {
            let (lo, hi) = part.split_once(':').ok_or_else(|| anyhow!("box entry `{part}` is not lo:hi"))?;
            Ok(Interval::new(lo.trim().parse()?, hi.trim().parse()?)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prior::UniformBox { bounds })
}

/// Comma separated floats.
pub fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number `{v}`"))).collect()
}

fn split(s: &str) -> (&str, Option<&str>) {
    match s.trim().split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s.trim(), None),
    }
}

/// Float with 12 significant digits, printed in its shortest form.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float");
    if r == 0.0 {
        "0".into()
    } else if (1e-6..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}
