//! Release mechanisms: closed-form quantizers per (family, secret), grid-synthesized
//! tables, the dataset wrapper, and the DP / AP / DistP baselines.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, unsupported, Error, Result};
use crate::model::{fit_params, open_unit, rng_for, Dataset, Family, FamilyParams, Interval, Prior, SecretSpec};
use crate::optimizer::BinTable;
use crate::specialfn::{lambert_w, std_normal_cdf, std_normal_pdf, std_normal_quantile, Branch};

/// Anything that maps θ to a released θ′.
pub trait ParamMechanism: Sync {
    fn release(&self, theta: &FamilyParams) -> Result<FamilyParams>;
}

/// Releases θ unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMechanism;

impl ParamMechanism for IdentityMechanism {
    fn release(&self, theta: &FamilyParams) -> Result<FamilyParams> {
        Ok(theta.clone())
    }
}

/// Releases the same θ′ for every input.
#[derive(Debug, Clone)]
pub struct ConstantMechanism(pub FamilyParams);

impl ParamMechanism for ConstantMechanism {
    fn release(&self, _theta: &FamilyParams) -> Result<FamilyParams> {
        Ok(self.0.clone())
    }
}

/// Which closed-form quantizer applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Mean,
    QuantileExponential,
    QuantileShiftedExponential,
    QuantileGaussian,
    QuantileUniform,
    StdGaussian,
    StdUniform,
    StdExponential,
    StdShiftedExponential,
    FractionCategorical,
    Table,
}

impl MechanismKind {
    pub fn resolve(family: Family, secret: &SecretSpec) -> Result<Self> {
        use Family as F;
        use SecretSpec as S;
        Ok(match (family, secret) {
            (F::Gaussian | F::Uniform | F::ShiftedExponential, S::Mean) => Self::Mean,
            (F::Exponential, S::Quantile { .. }) => Self::QuantileExponential,
            (F::ShiftedExponential, S::Quantile { .. }) => Self::QuantileShiftedExponential,
            (F::Gaussian, S::Quantile { .. }) => Self::QuantileGaussian,
            (F::Uniform, S::Quantile { .. }) => Self::QuantileUniform,
            (F::Gaussian, S::Std) => Self::StdGaussian,
            (F::Uniform, S::Std) => Self::StdUniform,
            // Mean and std of the exponential are both λ.
            (F::Exponential, S::Std | S::Mean) => Self::StdExponential,
            (F::ShiftedExponential, S::Std) => Self::StdShiftedExponential,
            (F::Categorical { .. }, S::Fraction { .. }) => Self::FractionCategorical,
            (f, s) => {
                return unsupported(format!(
                    "no closed-form mechanism for {} / {}; synthesize a bin table instead",
                    f.name(),
                    s.label()
                ))
            }
        })
    }
}

/// t₀ for the shifted-exponential quantile mechanism.
pub fn t0_shifted_exponential_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha {alpha} outside (0,1)"));
    }
    let l = (-alpha).ln_1p();
    let z = -(l + 1.0) / (2.0 * (1.0 - alpha) * E);
    let branch = if alpha < 1.0 - (-1.0f64).exp() { Branch::Minus1 } else { Branch::Principal };
    Ok(-1.0 - l - lambert_w(branch, z)?)
}

/// Objective whose minimizer is the Gaussian slope: φ(t) - t(½ - Φ(t)).
pub fn gaussian_slope_objective(t: f64) -> f64 {
    std_normal_pdf(t) - t * (0.5 - std_normal_cdf(t))
}

/// t₀ for the Gaussian std mechanism: the stationarity condition Φ(t) = ½ gives 0.
pub fn t0_gaussian_std() -> f64 {
    0.0
}

/// Golden-section minimization on [a, b].
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// t₀ for the Gaussian quantile mechanism: argmin of the slope objective over |t + Q_α|.
///
/// The ratio has a pole at t = -Q_α, so a coarse scan on [-10, 10] brackets the
/// minimum before golden-section refinement to 1e-10.
pub fn t0_gaussian_quantile(alpha: f64) -> Result<f64> {
    let q = std_normal_quantile(alpha)?;
    let f = |t: f64| {
        let den = (t + q).abs();
        if den == 0.0 {
            f64::INFINITY
        } else {
            gaussian_slope_objective(t) / den
        }
    };
    let steps = 4000;
    let h = 20.0 / steps as f64;
    let mut best = (f64::INFINITY, -10.0);
    for k in 0..=steps {
        let t = -10.0 + k as f64 * h;
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    let a = (best.1 - h).max(-10.0);
    let b = (best.1 + h).min(10.0);
    let t = golden_section(f, a, b, 1e-10);
    // Comparisons alone pin the argmin to ~1e-8; finish on the stationarity condition
    // (Φ(t) - ½)(t + Q) = h(t), when a sign change brackets t away from the pole.
    let stat = |t: f64| (std_normal_cdf(t) - 0.5) * (t + q) - gaussian_slope_objective(t);
    let (mut lo, mut hi) = (t - 1e-6, t + 1e-6);
    if (lo + q) * (hi + q) > 0.0 && stat(lo) * stat(hi) < 0.0 {
        let up = stat(hi) > 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (stat(mid) > 0.0) == up {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(0.5 * (lo + hi));
    }
    Ok(t)
}

/// t₀ for the uniform quantile mechanism.
pub fn t0_uniform_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha {alpha} outside (0,1)"));
    }
    let root = (alpha * alpha - alpha + 0.5).sqrt();
    let l = if alpha <= 0.5 { alpha + root } else { alpha - root };
    let denom = 1.0 / l - 1.0;
    if denom.abs() < 1e-12 {
        return unsupported("uniform median: the slope constant diverges");
    }
    Ok(1.0 / denom)
}

/// Index of the half-open bin [lo + i s, lo + (i+1) s) containing x; the last bin is closed.
///
/// Values within 1e-12 (relative) of an interior boundary are snapped onto it so that
/// boundary points land in the right-hand bin.
pub fn bin_index(x: f64, lo: f64, hi: f64, bins: u32) -> Result<u32> {
    if !(x >= lo && x <= hi) {
        return domain(format!("value {x} outside the prior range [{lo}, {hi}]"));
    }
    let s = (hi - lo) / bins as f64;
    let r = (x - lo) / s;
    let k = r.round();
    let r = if (r - k).abs() <= 1e-12 * k.abs().max(1.0) { k } else { r };
    Ok((r.floor() as u32).min(bins - 1))
}

/// Mean mechanism on a location coordinate: u ↦ lo + (i + ½)s.
pub fn release_mean_continuous(theta: &FamilyParams, mu_lo: f64, s: f64) -> Result<FamilyParams> {
    let (u, _) = location(theta)?;
    let i = offset_index(u, mu_lo, s)?;
    shift_location(theta, mu_lo + (i as f64 + 0.5) * s - u)
}

/// Exponential quantile mechanism: λ ↦ λ̲ + (i + ½)s.
pub fn release_quantile_exponential(theta: &FamilyParams, lambda_lo: f64, s: f64) -> Result<FamilyParams> {
    match theta {
        FamilyParams::Exponential { lambda } => {
            let i = offset_index(*lambda, lambda_lo, s)?;
            FamilyParams::exponential(lambda_lo + (i as f64 + 0.5) * s)
        }
        _ => config("expected exponential parameters"),
    }
}

/// Shifted-exponential quantile mechanism along the diagonal of slope t₀.
pub fn release_quantile_shifted_exponential(
    theta: &FamilyParams,
    lambda_lo: f64,
    s: f64,
    alpha: f64,
) -> Result<FamilyParams> {
    diagonal_shifted_exponential(theta, lambda_lo, s, t0_shifted_exponential_quantile(alpha)?)
}

/// Gaussian quantile mechanism: σ quantized, μ moved against the offset with slope t₀.
pub fn release_quantile_gaussian(theta: &FamilyParams, sigma_lo: f64, s: f64, alpha: f64) -> Result<FamilyParams> {
    diagonal_gaussian(theta, sigma_lo, s, t0_gaussian_quantile(alpha)?)
}

/// Gaussian std mechanism (t₀ = 0: only σ is quantized).
pub fn release_std_gaussian(theta: &FamilyParams, sigma_lo: f64, s: f64) -> Result<FamilyParams> {
    diagonal_gaussian(theta, sigma_lo, s, t0_gaussian_std())
}

fn diagonal_gaussian(theta: &FamilyParams, sigma_lo: f64, s: f64, t0: f64) -> Result<FamilyParams> {
    match theta {
        FamilyParams::Gaussian { mu, sigma } => {
            let i = offset_index(*sigma, sigma_lo, s)?;
            let mid = sigma_lo + (i as f64 + 0.5) * s;
            FamilyParams::gaussian(mu - t0 * (sigma - mid), mid)
        }
        _ => config("expected gaussian parameters"),
    }
}

/// Uniform quantile mechanism: width quantized from 0, left end moved with slope t₀.
pub fn release_quantile_uniform(theta: &FamilyParams, s: f64, alpha: f64) -> Result<FamilyParams> {
    let t0 = t0_uniform_quantile(alpha)?;
    match theta {
        FamilyParams::Uniform { m, n } => {
            let w = n - m;
            let mid = (offset_index(w, 0.0, s)? as f64 + 0.5) * s;
            let left = m + t0 * (w - mid) / (t0 + 1.0);
            FamilyParams::uniform(left, left + mid)
        }
        _ => config("expected uniform parameters"),
    }
}

/// Uniform std mechanism: width quantized from 0, both ends moved symmetrically.
pub fn release_std_uniform(theta: &FamilyParams, s: f64) -> Result<FamilyParams> {
    match theta {
        FamilyParams::Uniform { m, n } => {
            let w = n - m;
            let mid = (offset_index(w, 0.0, s)? as f64 + 0.5) * s;
            let left = m + 0.5 * (w - mid);
            FamilyParams::uniform(left, left + mid)
        }
        _ => config("expected uniform parameters"),
    }
}

/// Exponential std mechanism (same bins as the quantile mechanism).
pub fn release_std_exponential(theta: &FamilyParams, lambda_lo: f64, s: f64) -> Result<FamilyParams> {
    release_quantile_exponential(theta, lambda_lo, s)
}

/// Shifted-exponential std mechanism (slope ln 2).
pub fn release_std_shifted_exponential(theta: &FamilyParams, lambda_lo: f64, s: f64) -> Result<FamilyParams> {
    diagonal_shifted_exponential(theta, lambda_lo, s, LN_2)
}

fn offset_index(x: f64, lo: f64, s: f64) -> Result<u32> {
    if !(s > 0.0) || !(x >= lo) {
        return domain(format!("value {x} below the prior lower bound {lo}"));
    }
    let r = (x - lo) / s;
    let k = r.round();
    let r = if (r - k).abs() <= 1e-12 * k.abs().max(1.0) { k } else { r };
    Ok(r.floor() as u32)
}

fn diagonal_shifted_exponential(theta: &FamilyParams, lambda_lo: f64, s: f64, t0: f64) -> Result<FamilyParams> {
    match theta {
        FamilyParams::ShiftedExponential { lambda, h } => {
            let i = offset_index(*lambda, lambda_lo, s)?;
            let mid = lambda_lo + (i as f64 + 0.5) * s;
            let t = lambda - mid;
            FamilyParams::shifted_exponential(mid, h + t0 * t)
        }
        _ => config("expected shifted exponential parameters"),
    }
}

/// Location coordinate u and its index in `coords()`.
fn location(theta: &FamilyParams) -> Result<(f64, usize)> {
    match theta {
        FamilyParams::Gaussian { mu, .. } => Ok((*mu, 0)),
        FamilyParams::Uniform { m, .. } => Ok((*m, 0)),
        FamilyParams::ShiftedExponential { h, .. } => Ok((*h, 1)),
        _ => config("mean mechanism needs a location family (gaussian, uniform, shifted exponential)"),
    }
}

fn shift_location(theta: &FamilyParams, delta: f64) -> Result<FamilyParams> {
    match theta {
        FamilyParams::Gaussian { mu, sigma } => FamilyParams::gaussian(mu + delta, *sigma),
        FamilyParams::Uniform { m, n } => FamilyParams::uniform(m + delta, n + delta),
        FamilyParams::ShiftedExponential { lambda, h } => FamilyParams::shifted_exponential(*lambda, h + delta),
        _ => config("mean mechanism needs a location family"),
    }
}

/// Categorical fraction mechanism for coordinate j with bin size s = 1/bins.
pub fn release_fraction_categorical(theta: &FamilyParams, j: usize, bins: u32) -> Result<FamilyParams> {
    let p = match theta {
        FamilyParams::Categorical { p } => p,
        _ => return config("expected categorical parameters"),
    };
    let c = p.len();
    if j >= c {
        return config(format!("fraction index {j} >= C = {c}"));
    }
    let s = 1.0 / bins as f64;
    let k = bin_index(p[j], 0.0, 1.0, bins)?;
    let mid = (k as f64 + 0.5) * s;
    let spread = (mid - p[j]) / (c - 1) as f64;
    let mut out: Vec<f64> = p.iter().map(|v| v - spread).collect();
    out[j] = mid;
    let t = out.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| *v).fold(0.0, f64::min);
    for (i, v) in out.iter_mut().enumerate() {
        if i == j {
            *v += (c - 1) as f64 * t;
        } else {
            *v = (*v - t).max(0.0);
        }
    }
    FamilyParams::categorical(out)
}

/// Serializable mechanism description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub family: Family,
    pub secret: SecretSpec,
    pub prior: Prior,
    /// Number of bins over the quantized range; s = range / bin_count.
    #[serde(default)]
    pub bin_count: u32,
    /// Synthesized table (single-parameter families only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BinTable>,
}

/// A deterministic quantization mechanism M(θ) = θ★ of the bin containing θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MechanismConfig", into = "MechanismConfig")]
pub struct QuantizationMechanism {
    family: Family,
    secret: SecretSpec,
    prior: Prior,
    bin_count: u32,
    kind: MechanismKind,
    t0: f64,
    table: Option<BinTable>,
}

impl TryFrom<MechanismConfig> for QuantizationMechanism {
    type Error = Error;
    fn try_from(c: MechanismConfig) -> Result<Self> {
        match c.table {
            Some(table) => Self::from_table(c.prior, table),
            None => Self::new(c.family, c.secret, c.prior, c.bin_count),
        }
    }
}

impl From<QuantizationMechanism> for MechanismConfig {
    fn from(m: QuantizationMechanism) -> Self {
        MechanismConfig { family: m.family, secret: m.secret, prior: m.prior, bin_count: m.bin_count, table: m.table }
    }
}

impl QuantizationMechanism {
    /// Closed-form mechanism for (family, secret) under a uniform prior.
    pub fn new(family: Family, secret: SecretSpec, prior: Prior, bin_count: u32) -> Result<Self> {
        secret.check(family)?;
        prior.check(family)?;
        if bin_count == 0 {
            return config("bin_count must be at least 1");
        }
        let kind = MechanismKind::resolve(family, &secret)?;
        let t0 = match (kind, secret) {
            (MechanismKind::QuantileShiftedExponential, SecretSpec::Quantile { alpha }) => {
                t0_shifted_exponential_quantile(alpha)?
            }
            (MechanismKind::QuantileGaussian, SecretSpec::Quantile { alpha }) => t0_gaussian_quantile(alpha)?,
            (MechanismKind::QuantileUniform, SecretSpec::Quantile { alpha }) => t0_uniform_quantile(alpha)?,
            (MechanismKind::StdGaussian, _) => t0_gaussian_std(),
            (MechanismKind::StdShiftedExponential, _) => LN_2,
            _ => 0.0,
        };
        match (kind, &prior) {
            (MechanismKind::FractionCategorical, Prior::UniformSimplex { .. }) => {}
            (MechanismKind::FractionCategorical, _) => return config("categorical mechanism needs a simplex prior"),
            (_, Prior::UniformBox { .. }) => {}
            _ => return config("closed-form mechanisms need a uniform box prior"),
        }
        Ok(Self { family, secret, prior, bin_count, kind, t0, table: None })
    }

    /// Wrap a synthesized bin table.
    pub fn from_table(prior: Prior, table: BinTable) -> Result<Self> {
        if table.bins.is_empty() {
            return config("empty bin table");
        }
        Ok(Self {
            family: table.family,
            secret: table.secret,
            prior,
            bin_count: table.bins.len() as u32,
            kind: MechanismKind::Table,
            t0: 0.0,
            table: Some(table),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn secret(&self) -> SecretSpec {
        self.secret
    }
    pub fn prior(&self) -> &Prior {
        &self.prior
    }
    pub fn kind(&self) -> MechanismKind {
        self.kind
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn bin_count(&self) -> u32 {
        self.bin_count
    }
    pub fn table(&self) -> Option<&BinTable> {
        self.table.as_ref()
    }

    /// The interval that is cut into `bin_count` bins.
    pub fn quantized_range(&self) -> Result<Interval> {
        let b = match self.kind {
            MechanismKind::FractionCategorical => return Interval::new(0.0, 1.0),
            MechanismKind::Table => {
                let t = self.table.as_ref().expect("table kind");
                return Interval::new(t.bins[0].lo, t.bins.last().expect("non-empty").hi);
            }
            _ => self.prior.bounds()?,
        };
        match self.kind {
            MechanismKind::Mean => Ok(match self.family {
                Family::ShiftedExponential => b[1],
                _ => b[0],
            }),
            MechanismKind::QuantileGaussian | MechanismKind::StdGaussian => Ok(b[1]),
            MechanismKind::QuantileUniform | MechanismKind::StdUniform => Interval::new(0.0, uniform_range(b)?.width()),
            _ => Ok(b[0]),
        }
    }

    /// Bin size s.
    pub fn bin_size(&self) -> Result<f64> {
        Ok(self.quantized_range()?.width() / self.bin_count as f64)
    }

    fn check_support(&self, theta: &FamilyParams) -> Result<()> {
        if theta.family() != self.family {
            return config(format!("mechanism for {} got {}", self.family.name(), theta.family().name()));
        }
        if !self.prior.contains(theta) {
            return domain(format!("{theta:?} lies outside the prior support"));
        }
        Ok(())
    }
}

/// [m̲, m̄] for the uniform family (both coordinates share it).
fn uniform_range(b: &[Interval]) -> Result<Interval> {
    Interval::new(b[0].lo.min(b[1].lo), b[0].hi.max(b[1].hi))
}

impl ParamMechanism for QuantizationMechanism {
    fn release(&self, theta: &FamilyParams) -> Result<FamilyParams> {
        self.check_support(theta)?;
        let range = self.quantized_range()?;
        let s = range.width() / self.bin_count as f64;
        let idx = |x: f64| bin_index(x, range.lo, range.hi, self.bin_count);
        let mid = |i: u32| range.lo + (i as f64 + 0.5) * s;
        use FamilyParams as P;
        match (self.kind, theta) {
            (MechanismKind::Mean, _) => {
                let (u, _) = location(theta)?;
                shift_location(theta, mid(idx(u)?) - u)
            }
            (MechanismKind::QuantileExponential | MechanismKind::StdExponential, P::Exponential { lambda }) => {
                FamilyParams::exponential(mid(idx(*lambda)?))
            }
            (
                MechanismKind::QuantileShiftedExponential | MechanismKind::StdShiftedExponential,
                P::ShiftedExponential { lambda, h },
            ) => {
                let c = mid(idx(*lambda)?);
                FamilyParams::shifted_exponential(c, h + self.t0 * (lambda - c))
            }
            (MechanismKind::QuantileGaussian | MechanismKind::StdGaussian, P::Gaussian { mu, sigma }) => {
                let c = mid(idx(*sigma)?);
                FamilyParams::gaussian(mu - self.t0 * (sigma - c), c)
            }
            (MechanismKind::QuantileUniform, P::Uniform { m, n }) => {
                // Width offset u = (t0 + 1) t, with the left end moving by -t0 t.
                let w = n - m;
                let c = mid(idx(w)?);
                let t = (w - c) / (self.t0 + 1.0);
                let left = m + self.t0 * t;
                FamilyParams::uniform(left, left + c)
            }
            (MechanismKind::StdUniform, P::Uniform { m, n }) => {
                let w = n - m;
                let c = mid(idx(w)?);
                let left = m + 0.5 * (w - c);
                FamilyParams::uniform(left, left + c)
            }
            (MechanismKind::FractionCategorical, _) => match self.secret {
                SecretSpec::Fraction { j } => release_fraction_categorical(theta, j, self.bin_count),
                _ => unreachable!("resolved kind"),
            },
            (MechanismKind::Table, _) => {
                let t = self.table.as_ref().expect("table kind");
                let c = theta.coords();
                FamilyParams::from_coords(self.family, &[t.lookup(c[0])?])
            }
            _ => config("parameters do not match the mechanism family"),
        }
    }
}

fn nearly_equal(a: &FamilyParams, b: &FamilyParams) -> bool {
    let (x, y) = (a.coords(), b.coords());
    x.len() == y.len() && x.iter().zip(&y).all(|(u, v)| (u - v).abs() <= 1e-12 * u.abs().max(v.abs()).max(1.0))
}

/// Apply a parameter mechanism to a dataset by transforming its samples so that the
/// fitted parameters of the output equal the released parameters.
pub fn release_dataset(data: &Dataset, mechanism: &QuantizationMechanism) -> Result<Dataset> {
    let fitted = fit_params(data, mechanism.family())?;
    let released = mechanism.release(&fitted)?;
    if nearly_equal(&fitted, &released) {
        return Ok(data.clone());
    }
    transform_samples(data, &fitted, &released)
}

/// Map samples fitted as `from` onto `to` (affine for continuous families).
pub fn transform_samples(data: &Dataset, from: &FamilyParams, to: &FamilyParams) -> Result<Dataset> {
    use FamilyParams as P;
    let xs = data.samples();
    let out: Vec<f64> = match (from, to) {
        (P::Gaussian { mu, sigma }, P::Gaussian { mu: mu2, sigma: s2 }) => {
            if sigma == s2 {
                xs.iter().map(|x| x - mu + mu2).collect()
            } else {
                let r = s2 / sigma;
                xs.iter().map(|x| mu2 + (x - mu) * r).collect()
            }
        }
        (P::Uniform { m, n }, P::Uniform { m: m2, n: n2 }) => {
            if (n - m) == (n2 - m2) {
                xs.iter().map(|x| x - m + m2).collect()
            } else {
                let r = (n2 - m2) / (n - m);
                xs.iter().map(|x| m2 + (x - m) * r).collect()
            }
        }
        (P::Exponential { lambda }, P::Exponential { lambda: l2 }) => {
            let r = l2 / lambda;
            xs.iter().map(|x| x * r).collect()
        }
        (P::ShiftedExponential { lambda, h }, P::ShiftedExponential { lambda: l2, h: h2 }) => {
            if lambda == l2 {
                xs.iter().map(|x| x - h + h2).collect()
            } else {
                let r = l2 / lambda;
                xs.iter().map(|x| h2 + (x - h) * r).collect()
            }
        }
        (P::Categorical { .. }, P::Categorical { p }) => reassign_categories(xs, p),
        _ => {
            return unsupported(format!(
                "sample-level release is not defined for {} data",
                from.family().name()
            ))
        }
    };
    Dataset::new(out)
}

/// Relabel samples so category counts match round(n·p) (largest remainder).
///
/// Surplus samples are taken from the end of the data, donors visited round-robin by
/// category index, and handed to deficit categories in index order.
fn reassign_categories(xs: &[f64], p: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let c = p.len();
    let raw: Vec<f64> = p.iter().map(|v| v * n as f64).collect();
    let mut target: Vec<usize> = raw.iter().map(|v| v.floor() as usize).collect();
    let mut short = n - target.iter().sum::<usize>().min(n);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if short == 0 {
            break;
        }
        target[k] += 1;
        short -= 1;
    }
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &x) in xs.iter().enumerate() {
        positions[x as usize].push(i);
    }
    let mut surplus: Vec<usize> = (0..c).map(|k| positions[k].len().saturating_sub(target[k])).collect();
    let mut deficit: Vec<usize> = (0..c).map(|k| target[k].saturating_sub(positions[k].len())).collect();
    let mut out = xs.to_vec();
    let mut receiver = 0;
    loop {
        let mut moved = false;
        for donor in 0..c {
            if surplus[donor] == 0 {
                continue;
            }
            while receiver < c && deficit[receiver] == 0 {
                receiver += 1;
            }
            if receiver == c {
                break;
            }
            let idx = positions[donor].pop().expect("surplus implies samples");
            out[idx] = receiver as f64;
            surplus[donor] -= 1;
            deficit[receiver] -= 1;
            moved = true;
        }
        if !moved {
            break;
        }
    }
    out
}

/// Baseline mechanisms operating directly on samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineMechanism {
    /// Laplace-noised histogram with `bin_count` bins, resampled at bin midpoints.
    DpHistogram { bin_count: usize, beta: f64, rng_seed: u64 },
    /// Per-sample Gaussian noise with standard deviation β.
    ApGaussian { beta: f64, rng_seed: u64 },
    /// Per-sample Laplace noise with standard deviation β.
    DistPLaplace { beta: f64, rng_seed: u64 },
}

impl BaselineMechanism {
    pub fn validate(&self) -> Result<()> {
        let (beta, bins) = match self {
            Self::DpHistogram { bin_count, beta, .. } => (*beta, *bin_count),
            Self::ApGaussian { beta, .. } | Self::DistPLaplace { beta, .. } => (*beta, 1),
        };
        if !(beta >= 0.0 && beta.is_finite()) || bins == 0 {
            return config("baseline needs beta >= 0 and at least one bin");
        }
        Ok(())
    }
}

fn laplace<R: rand::RngCore + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u = open_unit(rng) - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Run a baseline on a dataset.
pub fn release_baseline(data: &Dataset, baseline: &BaselineMechanism) -> Result<Dataset> {
    baseline.validate()?;
    let xs = data.samples();
    let out = match *baseline {
        BaselineMechanism::ApGaussian { beta, rng_seed } => {
            if beta == 0.0 {
                return Ok(data.clone());
            }
            let mut rng = rng_for(rng_seed, 0);
            xs.iter()
                .map(|x| Ok(x + beta * std_normal_quantile(open_unit(&mut rng))?))
                .collect::<Result<Vec<_>>>()?
        }
        BaselineMechanism::DistPLaplace { beta, rng_seed } => {
            if beta == 0.0 {
                return Ok(data.clone());
            }
            let mut rng = rng_for(rng_seed, 0);
            let b = beta / 2f64.sqrt();
            xs.iter().map(|x| x + laplace(&mut rng, b)).collect()
        }
        BaselineMechanism::DpHistogram { bin_count, beta, rng_seed } => {
            let (lo, hi) = (data.min(), data.max());
            if lo == hi {
                return Ok(data.clone());
            }
            let width = (hi - lo) / bin_count as f64;
            let mut counts = vec![0.0f64; bin_count];
            for &x in xs {
                let k = (((x - lo) / width).floor() as usize).min(bin_count - 1);
                counts[k] += 1.0;
            }
            let mut rng = rng_for(rng_seed, 0);
            if beta > 0.0 {
                let b = beta / 2f64.sqrt();
                for c in counts.iter_mut() {
                    *c = (*c + laplace(&mut rng, b)).max(0.0);
                }
            }
            let total: f64 = counts.iter().sum();
            if total <= 0.0 {
                counts.iter_mut().for_each(|c| *c = 1.0);
            }
            let mut cum = Vec::with_capacity(bin_count);
            let mut acc = 0.0;
            for c in &counts {
                acc += c;
                cum.push(acc);
            }
            (0..xs.len())
                .map(|_| {
                    let u = open_unit(&mut rng) * acc;
                    let k = cum.partition_point(|&c| c <= u).min(bin_count - 1);
                    lo + (k as f64 + 0.5) * width
                })
                .collect()
        }
    };
    Dataset::new(out)
}
