//! Distribution families, secrets, priors, and closed-form distances.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::specialfn::{ln_gamma, reg_gamma_q, reg_inc_beta, std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// The repo-wide random generator. Changing it changes every seeded output.
pub type StatRng = ChaCha8Rng;

/// Build the repo-wide generator from a seed and a stream index.
pub fn rng_for(seed: u64, stream: u64) -> StatRng {
    let mut rng = StatRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in the open interval (0, 1).
pub(crate) fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Family tag, including fixed hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Uniform,
    Exponential,
    ShiftedExponential,
    Geometric,
    Binomial { n_trials: u32 },
    Poisson,
    Categorical { c: usize },
}

impl Family {
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Family::Geometric | Family::Binomial { .. } | Family::Poisson | Family::Categorical { .. }
        )
    }

    /// Number of free coordinates used by priors and grids.
    pub fn dim(&self) -> usize {
        match self {
            Family::Gaussian | Family::Uniform | Family::ShiftedExponential => 2,
            Family::Exponential | Family::Geometric | Family::Binomial { .. } | Family::Poisson => 1,
            Family::Categorical { c } => *c,
        }
    }

    /// Short lowercase name.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::ShiftedExponential => "shifted_exponential",
            Family::Geometric => "geometric",
            Family::Binomial { .. } => "binomial",
            Family::Poisson => "poisson",
            Family::Categorical { .. } => "categorical",
        }
    }
}

/// Parameter vector θ of one of the eight families.
///
/// Coordinate order (used by priors): Gaussian (mu, sigma), Uniform (m, n),
/// Exponential (lambda), ShiftedExponential (lambda, h), Geometric/Binomial/Poisson (theta),
/// Categorical (p_0..p_{C-1}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { m: f64, n: f64 },
    /// Scale parameterization: pdf (1/λ)e^{-x/λ}.
    Exponential { lambda: f64 },
    ShiftedExponential { lambda: f64, h: f64 },
    /// pmf (1-θ)^k θ on k ≥ 0.
    Geometric { theta: f64 },
    Binomial { n_trials: u32, theta: f64 },
    Poisson { theta: f64 },
    Categorical { p: Vec<f64> },
}

impl FamilyParams {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::Gaussian { mu, sigma }.validated()
    }
    pub fn uniform(m: f64, n: f64) -> Result<Self> {
        Self::Uniform { m, n }.validated()
    }
    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::Exponential { lambda }.validated()
    }
    pub fn shifted_exponential(lambda: f64, h: f64) -> Result<Self> {
        Self::ShiftedExponential { lambda, h }.validated()
    }
    pub fn geometric(theta: f64) -> Result<Self> {
        Self::Geometric { theta }.validated()
    }
    pub fn binomial(n_trials: u32, theta: f64) -> Result<Self> {
        Self::Binomial { n_trials, theta }.validated()
    }
    pub fn poisson(theta: f64) -> Result<Self> {
        Self::Poisson { theta }.validated()
    }
    pub fn categorical(p: Vec<f64>) -> Result<Self> {
        Self::Categorical { p }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Check finiteness and the family's domain constraints.
    pub fn validate(&self) -> Result<()> {
        let coords = self.coords();
        if coords.iter().any(|v| !v.is_finite()) {
            return domain(format!("non-finite parameter in {self:?}"));
        }
        let ok = match self {
            Self::Gaussian { sigma, .. } => *sigma > 0.0,
            Self::Uniform { m, n } => m < n,
            Self::Exponential { lambda } | Self::ShiftedExponential { lambda, .. } => *lambda > 0.0,
            Self::Geometric { theta } => *theta > 0.0 && *theta < 1.0,
            Self::Binomial { n_trials, theta } => *n_trials > 0 && *theta > 0.0 && *theta < 1.0,
            Self::Poisson { theta } => *theta > 0.0,
            Self::Categorical { p } => {
                p.len() >= 2
                    && p.iter().all(|&v| v >= 0.0)
                    && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-12
            }
        };
        if ok {
            Ok(())
        } else {
            domain(format!("parameters outside family domain: {self:?}"))
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Gaussian { .. } => Family::Gaussian,
            Self::Uniform { .. } => Family::Uniform,
            Self::Exponential { .. } => Family::Exponential,
            Self::ShiftedExponential { .. } => Family::ShiftedExponential,
            Self::Geometric { .. } => Family::Geometric,
            Self::Binomial { n_trials, .. } => Family::Binomial { n_trials: *n_trials },
            Self::Poisson { .. } => Family::Poisson,
            Self::Categorical { p } => Family::Categorical { c: p.len() },
        }
    }

    /// Coordinates in the documented order.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Self::Gaussian { mu, sigma } => vec![*mu, *sigma],
            Self::Uniform { m, n } => vec![*m, *n],
            Self::Exponential { lambda } => vec![*lambda],
            Self::ShiftedExponential { lambda, h } => vec![*lambda, *h],
            Self::Geometric { theta } | Self::Binomial { theta, .. } | Self::Poisson { theta } => vec![*theta],
            Self::Categorical { p } => p.clone(),
        }
    }

    /// Inverse of [`coords`](Self::coords).
    pub fn from_coords(family: Family, c: &[f64]) -> Result<Self> {
        if c.len() != family.dim() {
            return config(format!("{} expects {} coordinates, got {}", family.name(), family.dim(), c.len()));
        }
        let p = match family {
            Family::Gaussian => Self::Gaussian { mu: c[0], sigma: c[1] },
            Family::Uniform => Self::Uniform { m: c[0], n: c[1] },
            Family::Exponential => Self::Exponential { lambda: c[0] },
            Family::ShiftedExponential => Self::ShiftedExponential { lambda: c[0], h: c[1] },
            Family::Geometric => Self::Geometric { theta: c[0] },
            Family::Binomial { n_trials } => Self::Binomial { n_trials, theta: c[0] },
            Family::Poisson => Self::Poisson { theta: c[0] },
            Family::Categorical { .. } => Self::Categorical { p: c.to_vec() },
        };
        p.validated()
    }

    /// Distribution mean (for geometric this is (1-θ)/θ, not the secret convention).
    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mu, .. } => *mu,
            Self::Uniform { m, n } => 0.5 * (m + n),
            Self::Exponential { lambda } => *lambda,
            Self::ShiftedExponential { lambda, h } => h + lambda,
            Self::Geometric { theta } => (1.0 - theta) / theta,
            Self::Binomial { n_trials, theta } => *n_trials as f64 * theta,
            Self::Poisson { theta } => *theta,
            Self::Categorical { p } => p.iter().enumerate().map(|(k, v)| k as f64 * v).sum(),
        }
    }

    /// Probability mass at k (discrete families; 0 for continuous ones).
    pub fn pmf(&self, k: u64) -> f64 {
        match self {
            Self::Geometric { theta } => (1.0 - theta).powf(k as f64) * theta,
            Self::Binomial { n_trials, theta } => {
                let n = *n_trials as u64;
                if k > n {
                    return 0.0;
                }
                let (n, kf) = (n as f64, k as f64);
                (ln_gamma(n + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(n - kf + 1.0)
                    + kf * theta.ln()
                    + (n - kf) * (1.0 - theta).ln())
                .exp()
            }
            Self::Poisson { theta } => {
                let kf = k as f64;
                (kf * theta.ln() - theta - ln_gamma(kf + 1.0)).exp()
            }
            Self::Categorical { p } => p.get(k as usize).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// P(X ≤ k) for the ordinal discrete families.
    pub fn discrete_cdf(&self, k: u64) -> Result<f64> {
        match self {
            Self::Geometric { theta } => Ok(1.0 - (1.0 - theta).powf(k as f64 + 1.0)),
            Self::Binomial { n_trials, theta } => {
                let n = *n_trials as u64;
                if k >= n {
                    return Ok(1.0);
                }
                reg_inc_beta(1.0 - theta, (n - k) as f64, k as f64 + 1.0)
            }
            Self::Poisson { theta } => reg_gamma_q(k as f64 + 1.0, *theta),
            _ => config("discrete_cdf needs an ordinal discrete family"),
        }
    }

    /// Quantile function F⁻¹(u) for continuous families, u in (0,1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return domain(format!("quantile level {u} outside (0,1)"));
        }
        match self {
            Self::Gaussian { mu, sigma } => Ok(mu + sigma * std_normal_quantile(u)?),
            Self::Uniform { m, n } => Ok(m + u * (n - m)),
            Self::Exponential { lambda } => Ok(-lambda * (-u).ln_1p()),
            Self::ShiftedExponential { lambda, h } => Ok(h - lambda * (-u).ln_1p()),
            _ => config("quantile function needs a continuous family"),
        }
    }
}

/// The scalar functional of θ to protect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SecretSpec {
    Mean,
    Quantile { alpha: f64 },
    Std,
    Fraction { j: usize },
}

impl SecretSpec {
    /// Check that the secret is meaningful for the family.
    pub fn check(&self, family: Family) -> Result<()> {
        match (self, family) {
            (SecretSpec::Quantile { alpha }, f) => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return config(format!("quantile alpha {alpha} must lie in (0,1)"));
                }
                if f.is_discrete() {
                    return config("quantile secret needs a continuous family");
                }
                Ok(())
            }
            (SecretSpec::Fraction { j }, f) => match f {
                Family::Binomial { n_trials } if *j > n_trials as usize => {
                    config(format!("fraction index {j} exceeds n_trials {n_trials}"))
                }
                Family::Categorical { c } if *j >= c => config(format!("fraction index {j} >= C = {c}")),
                f if !f.is_discrete() => config("fraction secret needs a discrete family"),
                _ => Ok(()),
            },
            (SecretSpec::Mean | SecretSpec::Std, Family::Categorical { .. }) => {
                config("mean/std secrets are undefined for categorical data")
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SecretSpec::Mean => "mean".into(),
            SecretSpec::Std => "std".into(),
            SecretSpec::Quantile { alpha } => format!("quantile:{alpha}"),
            SecretSpec::Fraction { j } => format!("fraction:{j}"),
        }
    }
}

/// Closed interval [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("invalid interval [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Per-coordinate Lipschitz-prior description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzParam {
    pub lo: f64,
    pub hi: f64,
    /// Lipschitz constant of the marginal density.
    pub lipschitz: f64,
    /// Lower bound of the marginal density.
    pub lower: f64,
}

impl LipschitzParam {
    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Lipschitz-bounded prior, one entry per coordinate (bound calculators only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzDescriptor {
    pub params: Vec<LipschitzParam>,
}

/// Distribution over θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    /// Independent uniform coordinates. For the uniform family, pairs with m ≥ n are rejected.
    UniformBox { bounds: Vec<Interval> },
    /// Uniform over the probability simplex with C categories.
    UniformSimplex { c: usize },
    Lipschitz(LipschitzDescriptor),
}

impl Prior {
    pub fn uniform_box(bounds: &[(f64, f64)]) -> Result<Self> {
        let bounds = bounds.iter().map(|&(l, h)| Interval::new(l, h)).collect::<Result<Vec<_>>>()?;
        Ok(Prior::UniformBox { bounds })
    }

    /// Validate against a family.
    pub fn check(&self, family: Family) -> Result<()> {
        match self {
            Prior::UniformBox { bounds } => {
                if bounds.len() != family.dim() || matches!(family, Family::Categorical { .. }) {
                    return config(format!("uniform box with {} intervals does not fit {}", bounds.len(), family.name()));
                }
                for b in bounds {
                    Interval::new(b.lo, b.hi)?;
                }
                Ok(())
            }
            Prior::UniformSimplex { c } => match family {
                Family::Categorical { c: fc } if fc == *c && *c >= 2 => Ok(()),
                _ => config("uniform simplex prior needs a categorical family of the same size"),
            },
            Prior::Lipschitz(d) => {
                if d.params.iter().any(|p| !(p.lo < p.hi) || p.lipschitz < 0.0 || p.lower < 0.0) {
                    return config("invalid Lipschitz descriptor");
                }
                Ok(())
            }
        }
    }

    pub fn bounds(&self) -> Result<&[Interval]> {
        match self {
            Prior::UniformBox { bounds } => Ok(bounds),
            _ => config("a uniform box prior is required"),
        }
    }

    /// True when θ lies in the support (closure of the box).
    pub fn contains(&self, theta: &FamilyParams) -> bool {
        match self {
            Prior::UniformBox { bounds } => {
                let c = theta.coords();
                c.len() == bounds.len() && c.iter().zip(bounds).all(|(v, b)| b.contains(*v))
            }
            Prior::UniformSimplex { c } => matches!(theta, FamilyParams::Categorical { p } if p.len() == *c),
            Prior::Lipschitz(d) => {
                let c = theta.coords();
                c.len() == d.params.len() && c.iter().zip(&d.params).all(|(v, p)| *v >= p.lo && *v <= p.hi)
            }
        }
    }

    /// Draw θ from the prior.
    pub fn sample<R: RngCore + ?Sized>(&self, family: Family, rng: &mut R) -> Result<FamilyParams> {
        match self {
            Prior::UniformBox { bounds } => {
                for _ in 0..10_000 {
                    let c: Vec<f64> = bounds.iter().map(|b| b.lo + open_unit(rng) * b.width()).collect();
                    if let Ok(p) = FamilyParams::from_coords(family, &c) {
                        return Ok(p);
                    }
                }
                domain("prior box has (almost) no valid parameters for the family")
            }
            Prior::UniformSimplex { c } => {
                let e: Vec<f64> = (0..*c).map(|_| -open_unit(rng).ln()).collect();
                let s: f64 = e.iter().sum();
                let mut p: Vec<f64> = e.iter().map(|v| v / s).collect();
                let last = 1.0 - p[..c - 1].iter().sum::<f64>();
                p[c - 1] = last.max(0.0);
                FamilyParams::from_coords(family, &p)
            }
            Prior::Lipschitz(_) => config("Lipschitz descriptors are not sampleable"),
        }
    }
}

/// A non-empty vector of finite samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<f64>,
}

impl Dataset {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Fit("dataset is empty".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return domain("dataset contains non-finite values");
        }
        Ok(Self { samples })
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
    /// Sample standard deviation with the n-1 denominator (0 for n = 1).
    pub fn std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn same_family(a: &FamilyParams, b: &FamilyParams) -> Result<()> {
    if a.family() != b.family() {
        return config(format!("family mismatch: {} vs {}", a.family().name(), b.family().name()));
    }
    Ok(())
}

/// g(θ) for a compatible (family, secret) pair.
pub fn secret_value(theta: &FamilyParams, secret: &SecretSpec) -> Result<f64> {
    secret.check(theta.family())?;
    use FamilyParams as P;
    let v = match (theta, secret) {
        (P::Geometric { theta }, SecretSpec::Mean) => 1.0 / theta,
        (t, SecretSpec::Mean) => t.mean(),
        (t, SecretSpec::Quantile { alpha }) => match t {
            P::Gaussian { mu, sigma } => mu + sigma * std_normal_quantile(*alpha)?,
            P::Uniform { m, n } => m + alpha * (n - m),
            P::Exponential { lambda } => -lambda * (-alpha).ln_1p(),
            P::ShiftedExponential { lambda, h } => h - lambda * (-alpha).ln_1p(),
            _ => unreachable!("checked above"),
        },
        (t, SecretSpec::Std) => match t {
            P::Gaussian { sigma, .. } => *sigma,
            P::Uniform { m, n } => (n - m) / 12f64.sqrt(),
            P::Exponential { lambda } | P::ShiftedExponential { lambda, .. } => *lambda,
            P::Geometric { theta } => (1.0 - theta).sqrt() / theta,
            P::Binomial { n_trials, theta } => (*n_trials as f64 * theta * (1.0 - theta)).sqrt(),
            P::Poisson { theta } => theta.sqrt(),
            P::Categorical { .. } => unreachable!("checked above"),
        },
        (t, SecretSpec::Fraction { j }) => t.pmf(*j as u64),
    };
    Ok(v)
}

/// E|A + B·Z| for Z ~ N(0,1).
fn abs_normal_mean(a: f64, b: f64) -> f64 {
    let b = b.abs();
    if b == 0.0 {
        return a.abs();
    }
    let z = a / b;
    a * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * b * std_normal_pdf(z)
}

/// E|c + d·Y| for Y ~ Exp(1).
fn abs_exp_mean(c: f64, d: f64) -> f64 {
    if d == 0.0 {
        return c.abs();
    }
    let (c, d) = if d < 0.0 { (-c, -d) } else { (c, d) };
    let a = -c / d;
    // E|Y - a| = a - 1 + 2e^{-a} for a > 0, and 1 - a otherwise.
    let e = if a > 0.0 { a - 1.0 + 2.0 * (-a).exp() } else { 1.0 - a };
    d * e
}

/// Wasserstein-1 distance between two members of the same family.
///
/// Categorical uses the discrete metric, so it equals the total variation distance.
pub fn wasserstein1(theta1: &FamilyParams, theta2: &FamilyParams) -> Result<f64> {
    same_family(theta1, theta2)?;
    use FamilyParams as P;
    let w = match (theta1, theta2) {
        (P::Gaussian { mu: m1, sigma: s1 }, P::Gaussian { mu: m2, sigma: s2 }) => abs_normal_mean(m1 - m2, s1 - s2),
        (P::Uniform { m: m1, n: n1 }, P::Uniform { m: m2, n: n2 }) => {
            let (a, b) = (m2 - m1, n2 - n1);
            if a * b >= 0.0 {
                0.5 * (a + b).abs()
            } else {
                (a * a + b * b) / (2.0 * (a.abs() + b.abs()))
            }
        }
        (P::Exponential { lambda: l1 }, P::Exponential { lambda: l2 }) => (l1 - l2).abs(),
        (P::ShiftedExponential { lambda: l1, h: h1 }, P::ShiftedExponential { lambda: l2, h: h2 }) => {
            abs_exp_mean(h1 - h2, l1 - l2)
        }
        // Stochastically ordered in θ, so the CDFs never cross.
        (P::Geometric { .. }, _) | (P::Binomial { .. }, _) | (P::Poisson { .. }, _) => {
            (theta1.mean() - theta2.mean()).abs()
        }
        (P::Categorical { .. }, _) => tv_distance(theta1, theta2)?,
        _ => unreachable!("same family checked"),
    };
    Ok(w)
}

/// Total variation distance ½Σ|p₁(k) - p₂(k)| for discrete families, via the crossing point.
pub fn tv_distance(theta1: &FamilyParams, theta2: &FamilyParams) -> Result<f64> {
    same_family(theta1, theta2)?;
    use FamilyParams as P;
    let tv = match (theta1, theta2) {
        (P::Geometric { theta: t1 }, P::Geometric { theta: t2 }) => {
            if t1 == t2 {
                return Ok(0.0);
            }
            let (a, b) = if t1 > t2 { (*t1, *t2) } else { (*t2, *t1) };
            let kp = (b / a).ln() / ((1.0 - a) / (1.0 - b)).ln();
            let k0 = kp.floor() + 1.0;
            (1.0 - b).powf(k0) - (1.0 - a).powf(k0)
        }
        (P::Binomial { n_trials, theta: t1 }, P::Binomial { theta: t2, .. }) => {
            if t1 == t2 {
                return Ok(0.0);
            }
            let (a, b) = if t1 > t2 { (*t1, *t2) } else { (*t2, *t1) };
            let n = *n_trials as f64;
            let kp = n * ((1.0 - b) / (1.0 - a)).ln() / (a * (1.0 - b) / (b * (1.0 - a))).ln();
            let k0 = (kp.floor().max(0.0) as u64).min(*n_trials as u64);
            let lo = P::Binomial { n_trials: *n_trials, theta: b };
            let hi = P::Binomial { n_trials: *n_trials, theta: a };
            lo.discrete_cdf(k0)? - hi.discrete_cdf(k0)?
        }
        (P::Poisson { theta: t1 }, P::Poisson { theta: t2 }) => {
            if t1 == t2 {
                return Ok(0.0);
            }
            let (a, b) = if t1 > t2 { (*t1, *t2) } else { (*t2, *t1) };
            let k0 = ((a - b) / (a.ln() - b.ln())).floor() + 1.0;
            reg_gamma_q(k0, b)? - reg_gamma_q(k0, a)?
        }
        (P::Categorical { p: p1 }, P::Categorical { p: p2 }) => {
            0.5 * p1.iter().zip(p2).map(|(a, b)| (a - b).abs()).sum::<f64>()
        }
        _ => return config("tv_distance needs a discrete family"),
    };
    Ok(tv.abs().min(1.0))
}

/// D(θ₁, θ₂) = ½·d, with d = W1 for continuous and TV for discrete families.
pub fn aux_distance(theta1: &FamilyParams, theta2: &FamilyParams) -> Result<f64> {
    same_family(theta1, theta2)?;
    if theta1.family().is_discrete() {
        Ok(0.5 * tv_distance(theta1, theta2)?)
    } else {
        Ok(0.5 * wasserstein1(theta1, theta2)?)
    }
}

/// R(θ₁, θ₂) = |g(θ₁) - g(θ₂)|.
pub fn secret_range(theta1: &FamilyParams, theta2: &FamilyParams, secret: &SecretSpec) -> Result<f64> {
    same_family(theta1, theta2)?;
    Ok((secret_value(theta1, secret)? - secret_value(theta2, secret)?).abs())
}

fn nonneg_integers(data: &Dataset) -> Result<()> {
    if data.samples().iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
        return Err(Error::Fit("discrete family needs non-negative integer samples".into()));
    }
    Ok(())
}

fn fit_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Fit(msg.into()))
}

/// Moment / plug-in estimate of θ.
pub fn fit_params(data: &Dataset, family: Family) -> Result<FamilyParams> {
    let mean = data.mean();
    let fitted = match family {
        Family::Gaussian => {
            let sigma = data.std();
            if !(sigma > 0.0) {
                return fit_err("gaussian fit needs at least two distinct samples");
            }
            FamilyParams::Gaussian { mu: mean, sigma }
        }
        Family::Uniform => {
            let (m, n) = (data.min(), data.max());
            if !(m < n) {
                return fit_err("uniform fit needs distinct samples");
            }
            FamilyParams::Uniform { m, n }
        }
        Family::Exponential => {
            if data.min() < 0.0 || !(mean > 0.0) {
                return fit_err("exponential fit needs non-negative data with positive mean");
            }
            FamilyParams::Exponential { lambda: mean }
        }
        Family::ShiftedExponential => {
            let h = data.min();
            let lambda = mean - h;
            if !(lambda > 0.0) {
                return fit_err("shifted exponential fit needs distinct samples");
            }
            FamilyParams::ShiftedExponential { lambda, h }
        }
        Family::Geometric => {
            nonneg_integers(data)?;
            if !(mean > 0.0) {
                return fit_err("geometric fit needs a positive mean");
            }
            FamilyParams::Geometric { theta: 1.0 / (1.0 + mean) }
        }
        Family::Binomial { n_trials } => {
            nonneg_integers(data)?;
            let theta = mean / n_trials as f64;
            if !(theta > 0.0 && theta < 1.0) {
                return fit_err(format!("binomial fit gives theta = {theta}"));
            }
            FamilyParams::Binomial { n_trials, theta }
        }
        Family::Poisson => {
            nonneg_integers(data)?;
            if !(mean > 0.0) {
                return fit_err("poisson fit needs a positive mean");
            }
            FamilyParams::Poisson { theta: mean }
        }
        Family::Categorical { c } => {
            nonneg_integers(data)?;
            let mut counts = vec![0usize; c];
            for &x in data.samples() {
                let k = x as usize;
                if k >= c {
                    return fit_err(format!("category {k} outside 0..{c}"));
                }
                counts[k] += 1;
            }
            let n = data.len() as f64;
            let mut p: Vec<f64> = counts.iter().map(|&k| k as f64 / n).collect();
            let rest: f64 = p[..c - 1].iter().sum();
            p[c - 1] = (1.0 - rest).max(0.0);
            FamilyParams::Categorical { p }
        }
    };
    fitted.validate().map_err(|e| Error::Fit(e.to_string()))?;
    Ok(fitted)
}

/// Draw a dataset of `n` i.i.d. samples from θ.
pub fn sample(theta: &FamilyParams, n: usize, rng_seed: u64) -> Result<Dataset> {
    theta.validate()?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let mut rng = rng_for(rng_seed, 0);
    let samples = draw(theta, n, &mut rng)?;
    Dataset::new(samples)
}

/// Draw `n` samples with a caller-supplied generator.
pub fn draw<R: RngCore + ?Sized>(theta: &FamilyParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    use FamilyParams as P;
    let mut out = Vec::with_capacity(n);
    match theta {
        P::Gaussian { .. } | P::Uniform { .. } | P::Exponential { .. } | P::ShiftedExponential { .. } => {
            for _ in 0..n {
                out.push(theta.quantile(open_unit(rng))?);
            }
        }
        P::Geometric { theta } => {
            let l = (-theta).ln_1p();
            for _ in 0..n {
                out.push((open_unit(rng).ln() / l).floor());
            }
        }
        P::Binomial { n_trials, theta } => {
            let d = rand_distr::Binomial::new(*n_trials as u64, *theta)
                .map_err(|e| Error::Domain(e.to_string()))?;
            for _ in 0..n {
                out.push(d.sample(rng) as f64);
            }
        }
        P::Poisson { theta } => {
            let d = rand_distr::Poisson::new(*theta).map_err(|e| Error::Domain(e.to_string()))?;
            for _ in 0..n {
                let v: f64 = d.sample(rng);
                out.push(v);
            }
        }
        P::Categorical { p } => {
            let mut cum = Vec::with_capacity(p.len());
            let mut acc = 0.0;
            for v in p {
                acc += v;
                cum.push(acc);
            }
            for _ in 0..n {
                let u = open_unit(rng) * acc;
                let k = cum.partition_point(|&c| c <= u).min(p.len() - 1);
                out.push(k as f64);
            }
        }
    }
    Ok(out)
}
