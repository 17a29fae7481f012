//! Privacy and distortion evaluation, surrogate metrics, γ and lower bounds.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, unsupported, Result};
use crate::mechanisms::{
    gaussian_slope_objective, t0_gaussian_quantile, t0_shifted_exponential_quantile, t0_uniform_quantile,
    MechanismKind, ParamMechanism, QuantizationMechanism,
};
use crate::model::{
    aux_distance, rng_for, secret_range, secret_value, wasserstein1, Dataset, Family, FamilyParams,
    LipschitzDescriptor, Prior, SecretSpec,
};
use crate::specialfn::std_normal_quantile;

/// Samples per Monte-Carlo shard. Fixed so results do not depend on the thread count.
const SHARD: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub epsilon: f64,
    pub mc_samples: usize,
    pub rng_seed: u64,
    pub gamma_grid: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { epsilon: 0.01, mc_samples: 100_000, rng_seed: 0, gamma_grid: 64 }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return config(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.mc_samples == 0 {
            return config("mc_samples must be at least 1");
        }
        if self.gamma_grid < 16 {
            return config("gamma_grid must be at least 16");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    ClosedForm,
    NumericInf,
}

/// γ together with the two lower-bound curves it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: Family,
    pub secret: SecretSpec,
    pub gamma: f64,
    pub method: GammaMethod,
}

impl BoundReport {
    pub fn distortion_lower_bound(&self, epsilon: f64, privacy_budget: f64) -> Result<f64> {
        distortion_lower_bound(self.gamma, epsilon, privacy_budget)
    }
    pub fn privacy_lower_bound(&self, epsilon: f64, distortion_budget: f64) -> Result<f64> {
        privacy_lower_bound(self.gamma, epsilon, distortion_budget)
    }
}

/// ⌈x⌉ with values within 1e-8 (relative) of an integer snapped onto it.
fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-8 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Δ > (⌈1/T⌉ - 1)·2γε for any mechanism with Π ≤ T.
pub fn distortion_lower_bound(gamma: f64, epsilon: f64, privacy_budget: f64) -> Result<f64> {
    let t = privacy_budget;
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("privacy budget must lie in (0,1), got {t}"));
    }
    Ok((snapped_ceil(1.0 / t) - 1.0) * 2.0 * gamma * epsilon)
}

/// Π ≥ 1/⌈T/(2γε)⌉ for any mechanism with Δ ≤ T.
pub fn privacy_lower_bound(gamma: f64, epsilon: f64, distortion_budget: f64) -> Result<f64> {
    let t = distortion_budget;
    if !(t > 0.0) {
        return domain(format!("distortion budget must be positive, got {t}"));
    }
    let k = snapped_ceil(t / (2.0 * gamma * epsilon)).max(1.0);
    Ok(1.0 / k)
}

/// Closed-form γ where one is known.
pub fn gamma_closed_form(family: Family, secret: &SecretSpec) -> Result<Option<f64>> {
    secret.check(family)?;
    use Family as F;
    use SecretSpec as S;
    Ok(match (family, *secret) {
        (F::Gaussian | F::Uniform | F::Exponential | F::ShiftedExponential, S::Mean) => Some(0.5),
        (F::Categorical { .. }, S::Fraction { .. }) => Some(0.5),
        (F::Exponential, S::Quantile { alpha }) => Some(-0.5 / (-alpha).ln_1p()),
        (F::ShiftedExponential, S::Quantile { alpha }) => {
            let t0 = t0_shifted_exponential_quantile(alpha)?;
            Some((t0 + 2.0 * (-t0).exp() - 1.0) / (2.0 * ((-alpha).ln_1p() + t0).abs()))
        }
        (F::Gaussian, S::Quantile { alpha }) => {
            let t0 = t0_gaussian_quantile(alpha)?;
            Some(gaussian_slope_objective(t0) / (t0 + std_normal_quantile(alpha)?).abs())
        }
        (F::Uniform, S::Quantile { alpha }) => {
            t0_uniform_quantile(alpha)?;
            let root = (alpha * alpha - alpha + 0.5).sqrt();
            Some(if alpha <= 0.5 { root + alpha - 0.5 } else { root - alpha + 0.5 })
        }
        (F::Gaussian, S::Std) => Some(gaussian_slope_objective(0.0)),
        (F::Uniform, S::Std) => Some(3f64.sqrt() / 4.0),
        (F::Exponential, S::Std) => Some(0.5),
        (F::ShiftedExponential, S::Std) => Some(LN_2 / 2.0),
        _ => None,
    })
}

/// γ: closed form where available, otherwise a two-level grid infimum of D/R.
pub fn gamma(family: Family, secret: &SecretSpec, prior: &Prior, grid: usize) -> Result<BoundReport> {
    if let Some(g) = gamma_closed_form(family, secret)? {
        return Ok(BoundReport { family, secret: *secret, gamma: g, method: GammaMethod::ClosedForm });
    }
    let g = gamma_numeric(family, secret, prior, grid)?;
    Ok(BoundReport { family, secret: *secret, gamma: g, method: GammaMethod::NumericInf })
}

fn ratio(family: Family, secret: &SecretSpec, a: &[f64], b: &[f64]) -> Option<f64> {
    let t1 = FamilyParams::from_coords(family, a).ok()?;
    let t2 = FamilyParams::from_coords(family, b).ok()?;
    let r = secret_range(&t1, &t2, secret).ok()?;
    if !(r > 1e-13) {
        return None;
    }
    let d = aux_distance(&t1, &t2).ok()?;
    Some(d / r)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + k as f64 * h })
}

/// Grid infimum of D/R over pairs in the prior box.
///
/// One-parameter families scan (θ1, θ2) pairs. Two-parameter continuous families scan the
/// difference vector about the box center, since D and R only depend on the difference.
/// Both use a coarse `grid`² pass and a 4·`grid` per-axis refinement around the argmin.
pub fn gamma_numeric(family: Family, secret: &SecretSpec, prior: &Prior, grid: usize) -> Result<f64> {
    secret.check(family)?;
    if grid < 16 {
        return config("gamma grid must be at least 16");
    }
    if matches!(family, Family::Categorical { .. }) {
        return unsupported("numeric γ for categorical families");
    }
    let b = prior.bounds()?.to_vec();
    let fine = 4 * grid;
    let best = if family.dim() == 1 {
        let (lo, hi) = (b[0].lo, b[0].hi);
        let scan = |alo: f64, ahi: f64, blo: f64, bhi: f64, n: usize| {
            let xs: Vec<f64> = linspace(alo, ahi, n).collect();
            let ys: Vec<f64> = linspace(blo, bhi, n).collect();
            xs.par_iter()
                .map(|&x| {
                    let mut best = (f64::INFINITY, x, x);
                    for &y in &ys {
                        if y > x {
                            if let Some(v) = ratio(family, secret, &[x], &[y]) {
                                if v < best.0 {
                                    best = (v, x, y);
                                }
                            }
                        }
                    }
                    best
                })
                .reduce(|| (f64::INFINITY, 0.0, 0.0), |p, q| if q.0 < p.0 { q } else { p })
        };
        let coarse = scan(lo, hi, lo, hi, grid);
        if !coarse.0.is_finite() {
            return unsupported("secret does not vary over the prior box");
        }
        let h = (hi - lo) / (grid - 1) as f64;
        let refined = scan(
            (coarse.1 - h).max(lo),
            (coarse.1 + h).min(hi),
            (coarse.2 - h).max(lo),
            (coarse.2 + h).min(hi),
            fine,
        );
        coarse.0.min(refined.0)
    } else {
        let center: Vec<f64> = b.iter().map(|i| 0.5 * (i.lo + i.hi)).collect();
        let w: Vec<f64> = b.iter().map(|i| i.width()).collect();
        let eval = |d0: f64, d1: f64| {
            let a = [center[0] - 0.5 * d0, center[1] - 0.5 * d1];
            let c = [center[0] + 0.5 * d0, center[1] + 0.5 * d1];
            ratio(family, secret, &a, &c)
        };
        let scan = |r0: (f64, f64), r1: (f64, f64), n: usize| {
            let xs: Vec<f64> = linspace(r0.0, r0.1, n).collect();
            let ys: Vec<f64> = linspace(r1.0, r1.1, n).collect();
            xs.par_iter()
                .map(|&x| {
                    let mut best = (f64::INFINITY, x, 0.0);
                    for &y in &ys {
                        if let Some(v) = eval(x, y) {
                            if v < best.0 {
                                best = (v, x, y);
                            }
                        }
                    }
                    best
                })
                .reduce(|| (f64::INFINITY, 0.0, 0.0), |p, q| if q.0 < p.0 { q } else { p })
        };
        let coarse = scan((-w[0], w[0]), (-w[1], w[1]), grid);
        if !coarse.0.is_finite() {
            return unsupported("secret does not vary over the prior box");
        }
        let h0 = 2.0 * w[0] / (grid - 1) as f64;
        let h1 = 2.0 * w[1] / (grid - 1) as f64;
        let refined = scan(
            ((coarse.1 - h0).max(-w[0]), (coarse.1 + h0).min(w[0])),
            ((coarse.2 - h1).max(-w[1]), (coarse.2 + h1).min(w[1])),
            fine,
        );
        coarse.0.min(refined.0)
    };
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyKind {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPrivacy {
    pub value: f64,
    pub kind: PrivacyKind,
}

fn alpha_of(secret: &SecretSpec) -> f64 {
    match secret {
        SecretSpec::Quantile { alpha } => *alpha,
        _ => f64::NAN,
    }
}

/// Π of a closed-form mechanism under its uniform prior, clamped to [0, 1].
pub fn analytic_privacy(mechanism: &QuantizationMechanism, cfg: &AnalysisConfig) -> Result<AnalyticPrivacy> {
    cfg.validate()?;
    let eps = cfg.epsilon;
    let s = mechanism.bin_size()?;
    let t0 = mechanism.t0();
    let alpha = alpha_of(&mechanism.secret());
    let bounds = || mechanism.prior().bounds();
    use MechanismKind as K;
    use PrivacyKind::*;
    let (value, kind) = match mechanism.kind() {
        K::Mean | K::StdGaussian | K::StdExponential => (2.0 * eps / s, Exact),
        K::QuantileExponential => (2.0 * eps / (-(-alpha).ln_1p() * s), Exact),
        K::QuantileShiftedExponential => {
            let h = bounds()?[1].width();
            (2.0 * eps / (((-alpha).ln_1p() + t0).abs() * s) + t0.abs() * s / h, UpperBound)
        }
        K::QuantileGaussian => {
            let q = std_normal_quantile(alpha)?;
            let mu = bounds()?[0].width();
            (2.0 * eps / ((t0 + q).abs() * s) + t0.abs() * s / mu, UpperBound)
        }
        K::QuantileUniform => {
            let r = mechanism.quantized_range()?.width();
            let v = 2.0 * eps * (t0 + 1.0) / (((1.0 - alpha) * t0 - alpha).abs() * s)
                + 2.0 * s * t0 / ((t0 + 1.0) * r)
                + s * s / (2.0 * r * r);
            (v, UpperBound)
        }
        K::StdUniform => {
            let r = mechanism.quantized_range()?.width();
            (4.0 * 3f64.sqrt() * eps / s + s / r + s * s / (2.0 * r * r), UpperBound)
        }
        K::StdShiftedExponential => {
            let h = bounds()?[1].width();
            (2.0 * eps / s + s * LN_2 / h, UpperBound)
        }
        K::FractionCategorical => {
            let c = match mechanism.family() {
                Family::Categorical { c } => c as f64,
                _ => unreachable!("categorical kind"),
            };
            (2.0 * eps / s + 1.0 - (1.0 - s / (c - 1.0)).powf(c - 1.0), UpperBound)
        }
        K::Table => {
            let t = mechanism.table().expect("table kind");
            if (t.epsilon - eps).abs() > 1e-12 * eps {
                return unsupported("table privacy is only known at the epsilon it was built for");
            }
            (t.privacy, Exact)
        }
    };
    Ok(AnalyticPrivacy { value: value.clamp(0.0, 1.0), kind })
}

/// Δ of a closed-form mechanism.
pub fn analytic_distortion(mechanism: &QuantizationMechanism) -> Result<f64> {
    let s = mechanism.bin_size()?;
    let t0 = mechanism.t0();
    use MechanismKind as K;
    Ok(match mechanism.kind() {
        K::Mean | K::QuantileExponential | K::StdExponential | K::FractionCategorical => s / 2.0,
        K::QuantileShiftedExponential => 0.5 * s * (t0 - 1.0) + s * (-t0).exp(),
        K::QuantileGaussian | K::StdGaussian => s * gaussian_slope_objective(t0),
        K::QuantileUniform => (t0 * t0 + 1.0) * s / (4.0 * (t0 + 1.0) * (t0 + 1.0)),
        K::StdUniform => s / 8.0,
        K::StdShiftedExponential => s * LN_2 / 2.0,
        K::Table => mechanism.table().expect("table kind").distortion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

struct Draw {
    secret: f64,
    released_secret: f64,
    key: Vec<u64>,
}

fn draw_shards<M: ParamMechanism + ?Sized>(
    mechanism: &M,
    prior: &Prior,
    family: Family,
    secret: &SecretSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<Draw>> {
    let shards = n.div_ceil(SHARD);
    let parts: Vec<Result<Vec<Draw>>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let count = SHARD.min(n - k * SHARD);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let theta = prior.sample(family, &mut rng)?;
                let released = mechanism.release(&theta)?;
                out.push(Draw {
                    secret: secret_value(&theta, secret)?,
                    released_secret: secret_value(&released, secret)?,
                    key: released.coords().iter().map(|v| v.to_bits()).collect(),
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(n);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Center of the width-2ε window covering the most of `values` (sorted in place).
fn best_window_center(values: &mut [f64], eps: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let (mut best, mut center, mut hi) = (0usize, values[0] + eps, 0usize);
    for lo in 0..values.len() {
        while hi < values.len() && values[hi] <= values[lo] + 2.0 * eps {
            hi += 1;
        }
        if hi - lo > best {
            best = hi - lo;
            center = values[lo] + eps;
        }
    }
    center
}

/// Monte-Carlo estimate of Π.
///
/// Two attackers are run: the plug-in guess g(θ′) and, per released value, the 2ε window
/// with the most posterior mass, fitted on one half of the draws and scored on the other
/// (both ways). The larger success rate is reported.
pub fn mc_privacy<M: ParamMechanism + ?Sized>(
    mechanism: &M,
    prior: &Prior,
    family: Family,
    secret: &SecretSpec,
    cfg: &AnalysisConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    let eps = cfg.epsilon;
    let n = cfg.mc_samples;
    let draws = draw_shards(mechanism, prior, family, secret, n, cfg.rng_seed)?;

    let plug_in = draws.iter().filter(|d| (d.released_secret - d.secret).abs() <= eps).count();

    let mut folds: [BTreeMap<&[u64], Vec<f64>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for (i, d) in draws.iter().enumerate() {
        folds[i % 2].entry(d.key.as_slice()).or_default().push(d.secret);
    }
    let mut centers: [BTreeMap<&[u64], f64>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for f in 0..2 {
        for (k, v) in folds[f].iter_mut() {
            centers[f].insert(k, best_window_center(v, eps));
        }
    }
    let window = draws
        .iter()
        .enumerate()
        .filter(|(i, d)| {
            let guess = centers[1 - i % 2].get(d.key.as_slice()).copied().unwrap_or(d.released_secret);
            (guess - d.secret).abs() <= eps
        })
        .count();

    let p = plug_in.max(window) as f64 / n as f64;
    Ok(McEstimate { estimate: p, stderr: (p * (1.0 - p) / n as f64).sqrt() })
}

/// max over `n_probe` prior draws of W1(θ, M(θ)).
pub fn empirical_distortion<M: ParamMechanism + ?Sized>(
    mechanism: &M,
    prior: &Prior,
    family: Family,
    n_probe: usize,
    rng_seed: u64,
) -> Result<f64> {
    let shards = n_probe.div_ceil(SHARD);
    let parts: Vec<Result<f64>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(rng_seed, k as u64);
            let mut worst = 0.0f64;
            for _ in 0..SHARD.min(n_probe - k * SHARD) {
                let theta = prior.sample(family, &mut rng)?;
                worst = worst.max(wasserstein1(&theta, &mechanism.release(&theta)?)?);
            }
            Ok(worst)
        })
        .collect();
    parts.into_iter().try_fold(0.0f64, |acc, p| Ok(acc.max(p?)))
}

/// Type-7 empirical quantile of sorted data.
fn sample_quantile(sorted: &[f64], alpha: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * alpha;
    let k = h.floor() as usize;
    if k + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[k] + (h - k as f64) * (sorted[k + 1] - sorted[k])
}

fn sorted(x: &Dataset) -> Vec<f64> {
    let mut v = x.samples().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Nonparametric estimate of the secret from samples.
pub fn sample_secret(x: &Dataset, secret: &SecretSpec) -> Result<f64> {
    Ok(match *secret {
        SecretSpec::Mean => x.mean(),
        SecretSpec::Std => x.std(),
        SecretSpec::Quantile { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return domain(format!("alpha {alpha} outside (0,1)"));
            }
            sample_quantile(&sorted(x), alpha)
        }
        SecretSpec::Fraction { j } => {
            x.samples().iter().filter(|&&v| v == j as f64).count() as f64 / x.len() as f64
        }
    })
}

/// Π̃ = -|g(X) - g(Y)|.
pub fn surrogate_privacy(x: &Dataset, y: &Dataset, secret: &SecretSpec) -> Result<f64> {
    Ok(-(sample_secret(x, secret)? - sample_secret(y, secret)?).abs())
}

/// Δ̃: W1 between the empirical distributions (exact quantile-function integral).
pub fn surrogate_distortion(x: &Dataset, y: &Dataset) -> f64 {
    let (a, b) = (sorted(x), sorted(y));
    let (n, m) = (a.len(), b.len());
    if n == m {
        return a.iter().zip(&b).map(|(u, v)| (u - v).abs()).sum::<f64>() / n as f64;
    }
    // Merge the breakpoints i/n and j/m; compare i·m with j·n to stay in integers.
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = 0u128;
    let mut acc = 0.0;
    let nm = (n as u128) * (m as u128);
    while i < n && j < m {
        let ni = (i as u128 + 1) * m as u128;
        let nj = (j as u128 + 1) * n as u128;
        let next = ni.min(nj);
        acc += (next - prev) as f64 * (a[i] - b[j]).abs();
        prev = next;
        if ni == next {
            i += 1;
        }
        if nj == next {
            j += 1;
        }
    }
    acc / nm as f64
}

/// M(x, c, L, A): largest value of an L-Lipschitz function on an interval of length x with
/// integral A and lower bound c.
pub fn lipschitz_max_value(x: f64, c: f64, l: f64, a: f64) -> f64 {
    if c <= a / x - l * x / 2.0 {
        a / x + l * x / 2.0
    } else {
        c + (2.0 * l * (a - c * x)).max(0.0).sqrt()
    }
}

/// Largest fraction of mass an L-Lipschitz density with lower bound c can put in a window
/// of width δ inside an interval of length `len`.
pub fn lipschitz_window_fraction(len: f64, delta: f64, c: f64, l: f64) -> f64 {
    if delta >= len {
        return 1.0;
    }
    if l <= 0.0 {
        return delta / len;
    }
    let r = c / l - delta / 2.0;
    let y = (r * r + 2.0 * c * len / l).sqrt() - r;
    (delta * (c + l * (y - delta / 2.0)) / (c * len + 0.5 * l * y * y)).min(1.0)
}

/// Privacy upper bound under a Lipschitz prior.
pub fn relaxed_bounds(
    family: Family,
    secret: &SecretSpec,
    prior: &LipschitzDescriptor,
    s: f64,
    epsilon: f64,
) -> Result<f64> {
    secret.check(family)?;
    if prior.params.len() != family.dim() {
        return config(format!("{} needs {} Lipschitz entries", family.name(), family.dim()));
    }
    if !(s > 0.0 && epsilon > 0.0) {
        return domain("bin size and epsilon must be positive");
    }
    for p in &prior.params {
        if !(p.hi > p.lo && p.lipschitz >= 0.0 && p.lower >= 0.0) {
            return config("Lipschitz entries need hi > lo, L >= 0 and c >= 0");
        }
    }
    let one_dim = |idx: usize, eps: f64| {
        let p = prior.params[idx];
        lipschitz_window_fraction(s, 2.0 * eps, p.lower, p.lipschitz)
    };
    // Diagonal bins: `q` is the quantized coordinate, `o` the other, `slope` = |t0|.
    let diagonal = |q: usize, o: usize, slope: f64, eps: f64| {
        let (pq, po) = (prior.params[q], prior.params[o]);
        let c = pq.lower * po.lower;
        let l = pq.lipschitz * lipschitz_max_value(po.range(), po.lower, po.lipschitz, 1.0)
            + slope * po.lipschitz * lipschitz_max_value(pq.range(), pq.lower, pq.lipschitz, 1.0);
        let main = lipschitz_window_fraction(s, 2.0 * eps, c, l);
        let edge = lipschitz_max_value(po.range(), po.lower, po.lipschitz, 1.0)
            * lipschitz_max_value(pq.range(), pq.lower, pq.lipschitz, 1.0)
            * pq.range()
            * slope
            * s;
        main + edge
    };
    use Family as F;
    use SecretSpec as S;
    let v = match (family, *secret) {
        (F::Gaussian | F::Uniform, S::Mean) => one_dim(0, epsilon),
        (F::ShiftedExponential, S::Mean) => one_dim(1, epsilon),
        (F::Exponential, S::Mean | S::Std) => one_dim(0, epsilon),
        (F::Exponential, S::Quantile { alpha }) => one_dim(0, epsilon / -(-alpha).ln_1p()),
        (F::ShiftedExponential, S::Quantile { alpha }) => {
            let t0 = t0_shifted_exponential_quantile(alpha)?;
            diagonal(0, 1, t0.abs(), epsilon / ((-alpha).ln_1p() + t0).abs())
        }
        (F::ShiftedExponential, S::Std) => diagonal(0, 1, LN_2, epsilon),
        (F::Gaussian, S::Quantile { alpha }) => {
            let t0 = t0_gaussian_quantile(alpha)?;
            diagonal(1, 0, t0.abs(), epsilon / (t0 + std_normal_quantile(alpha)?).abs())
        }
        (F::Gaussian, S::Std) => diagonal(1, 0, 0.0, epsilon),
        (f, s) => return unsupported(format!("no relaxed bound for {} / {}", f.name(), s.label())),
    };
    Ok(v.min(1.0))
}

/// One point of a privacy–distortion sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub mechanism: String,
    pub params: String,
    pub surrogate_privacy: f64,
    pub surrogate_distortion: f64,
}
