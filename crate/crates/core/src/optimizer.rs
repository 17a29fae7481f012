//! Grid synthesis of quantization mechanisms for single-parameter families:
//! dynamic programming, binary search over distortion budgets, and a greedy baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::model::{secret_value, wasserstein1, Family, FamilyParams, SecretSpec};

/// Largest grid accepted; the synthesis loop is quadratic in the grid size.
pub const MAX_GRID: usize = 20_000;

/// Candidate counts above this are scored in parallel.
const PAR_THRESHOLD: usize = 512;

/// Prior over θ restricted to [θ̲, θ̄].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridPrior {
    #[default]
    Uniform,
    /// Density at each cell midpoint (length = grid_count); cell mass = density · κ.
    Density { values: Vec<f64> },
}

/// A single-parameter synthesis problem on an integer grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProblem {
    pub family: Family,
    pub secret: SecretSpec,
    pub epsilon: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Number of grid cells N; κ = (θ̄ - θ̲)/N.
    pub grid_count: usize,
    #[serde(default)]
    pub prior: GridPrior,
}

/// One synthesized bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub release: f64,
    pub distortion: f64,
    pub privacy: f64,
}

/// Synthesized mechanism: contiguous bins tiling [θ̲, θ̄].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinTable {
    pub family: Family,
    pub secret: SecretSpec,
    /// Secret tolerance the privacy values refer to.
    pub epsilon: f64,
    pub bins: Vec<Bin>,
    pub privacy: f64,
    pub distortion: f64,
    /// Distortion budget the table was built under.
    pub budget: f64,
}

impl BinTable {
    /// Released θ★ for θ. Bins are half-open except the last.
    pub fn lookup(&self, theta: f64) -> Result<f64> {
        let first = self.bins.first().ok_or_else(|| Error::Config("empty bin table".into()))?;
        let last = self.bins.last().expect("non-empty");
        if !(theta >= first.lo && theta <= last.hi) {
            return Err(Error::Domain(format!("theta {theta} outside [{}, {}]", first.lo, last.hi)));
        }
        let idx = self.bins.partition_point(|b| b.hi <= theta).min(self.bins.len() - 1);
        Ok(self.bins[idx].release)
    }
}

/// Precomputed grid quantities.
#[derive(Debug, Clone)]
pub struct Grid {
    problem: GridProblem,
    params: Vec<FamilyParams>,
    points: Vec<f64>,
    secrets: Vec<f64>,
    /// Prefix prior mass: cdf[k] = mass of [θ_0, θ_k].
    cdf: Vec<f64>,
}

impl GridProblem {
    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Exponential | Family::Geometric | Family::Binomial { .. } | Family::Poisson => {}
            f => return config(format!("grid synthesis supports single-parameter families, got {}", f.name())),
        }
        self.secret.check(self.family)?;
        if !(self.epsilon > 0.0) {
            return config("epsilon must be positive");
        }
        if !(self.theta_lo.is_finite() && self.theta_hi.is_finite() && self.theta_lo < self.theta_hi) {
            return config("theta range must be finite with lo < hi");
        }
        if self.grid_count == 0 {
            return config("grid_count must be at least 1");
        }
        if self.grid_count > MAX_GRID {
            return config(format!("grid_count {} exceeds the limit {MAX_GRID}", self.grid_count));
        }
        if let GridPrior::Density { values } = &self.prior {
            if values.len() != self.grid_count || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return config("prior density needs grid_count non-negative finite values");
            }
            if values.iter().sum::<f64>() <= 0.0 {
                return config("prior density has zero mass");
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        (self.theta_hi - self.theta_lo) / self.grid_count as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k == self.grid_count {
            return self.theta_hi;
        }
        self.theta_lo + k as f64 * self.kappa()
    }

    /// Grid index of an on-grid θ.
    pub fn index_of(&self, theta: f64) -> Result<usize> {
        let kappa = self.kappa();
        let r = (theta - self.theta_lo) / kappa;
        let k = r.round();
        if !(k >= 0.0 && k <= self.grid_count as f64) || (r - k).abs() > 1e-9 {
            return config(format!("theta {theta} is not on the grid"));
        }
        Ok(k as usize)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.clone())
    }
}

impl Grid {
    pub fn new(problem: GridProblem) -> Result<Self> {
        problem.validate()?;
        let n = problem.grid_count;
        let points: Vec<f64> = (0..=n).map(|k| problem.point(k)).collect();
        let params = points
            .iter()
            .map(|&t| FamilyParams::from_coords(problem.family, &[t]))
            .collect::<Result<Vec<_>>>()?;
        let secrets = params.iter().map(|p| secret_value(p, &problem.secret)).collect::<Result<Vec<_>>>()?;
        let kappa = problem.kappa();
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            acc += match &problem.prior {
                GridPrior::Uniform => kappa,
                GridPrior::Density { values } => values[k] * kappa,
            };
            cdf.push(acc);
        }
        Ok(Self { problem, params, points, secrets, cdf })
    }

    pub fn problem(&self) -> &GridProblem {
        &self.problem
    }
    pub fn len(&self) -> usize {
        self.problem.grid_count
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn point(&self, k: usize) -> f64 {
        self.points[k]
    }
    pub fn secret(&self, k: usize) -> f64 {
        self.secrets[k]
    }
    /// Prior mass between grid points a ≤ b.
    pub fn mass(&self, a: usize, b: usize) -> f64 {
        self.cdf[b] - self.cdf[a]
    }
    pub fn total_mass(&self) -> f64 {
        self.cdf[self.len()]
    }

    /// W1 between the distributions at grid points a and b.
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        wasserstein1(&self.params[a], &self.params[b]).expect("same family on a grid")
    }

    /// (D, argmin index) for the bin [a, b].
    ///
    /// The candidate set is the grid points inside the bin; the worst case over the bin
    /// sits at an endpoint because the families are stochastically ordered in θ.
    pub fn bin_distortion_idx(&self, a: usize, b: usize) -> (f64, usize) {
        debug_assert!(a <= b);
        if a == b {
            return (0.0, a);
        }
        let cost = |c: usize| self.dist(a, c).max(self.dist(c, b));
        // d(a, c) grows and d(c, b) shrinks with c: find the first c where they cross.
        let (mut lo, mut hi) = (a, b);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.dist(a, mid) >= self.dist(mid, b) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut best = (cost(lo), lo);
        if lo > a {
            let alt = cost(lo - 1);
            if alt <= best.0 {
                best = (alt, lo - 1);
            }
        }
        best
    }

    /// Largest conditional prior mass of a secret window of width ≤ 2ε inside [a, b].
    pub fn bin_privacy_idx(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a < b);
        let total = self.mass(a, b);
        if total <= 0.0 {
            return 0.0;
        }
        let width = 2.0 * self.problem.epsilon;
        let tol = 1e-12 * width.max(1.0);
        let g = &self.secrets[a..=b];
        let increasing = g.windows(2).all(|w| w[1] >= w[0]);
        let decreasing = g.windows(2).all(|w| w[1] <= w[0]);
        let best = if increasing || decreasing {
            let mut best = 0.0f64;
            let mut l = a;
            for r in a..=b {
                while (self.secrets[r] - self.secrets[l]).abs() > width + tol {
                    l += 1;
                }
                best = best.max(self.mass(l, r));
            }
            best
        } else {
            // Cells carry the secret interval spanned by their endpoints.
            let cells: Vec<(f64, f64, f64)> = (a..b)
                .map(|k| {
                    let (x, y) = (self.secrets[k], self.secrets[k + 1]);
                    (x.min(y), x.max(y), self.mass(k, k + 1))
                })
                .collect();
            let mut best = 0.0f64;
            for &(_, top, _) in &cells {
                let floor = top - width - tol;
                let m: f64 = cells.iter().filter(|c| c.0 >= floor && c.1 <= top).map(|c| c.2).sum();
                best = best.max(m);
            }
            best
        };
        (best / total).min(1.0)
    }

    fn table_from_cuts(&self, cuts: &[usize], budget: f64, cost: f64) -> BinTable {
        let bins = cuts
            .windows(2)
            .map(|w| {
                let (d, arg) = self.bin_distortion_idx(w[0], w[1]);
                Bin {
                    lo: self.point(w[0]),
                    hi: self.point(w[1]),
                    release: self.point(arg),
                    distortion: d,
                    privacy: self.bin_privacy_idx(w[0], w[1]),
                }
            })
            .collect::<Vec<_>>();
        let distortion = bins.iter().map(|b| b.distortion).fold(0.0, f64::max);
        let total = self.total_mass();
        BinTable {
            family: self.problem.family,
            secret: self.problem.secret,
            epsilon: self.problem.epsilon,
            bins,
            privacy: if total > 0.0 { cost / total } else { 0.0 },
            distortion,
            budget,
        }
    }

    /// Prior-weighted privacy of an arbitrary partition given by its cut indices.
    pub fn partition_privacy(&self, cuts: &[usize]) -> f64 {
        let cost: f64 = cuts.windows(2).map(|w| self.mass(w[0], w[1]) * self.bin_privacy_idx(w[0], w[1])).sum();
        cost / self.total_mass()
    }

    /// Bellman recursion over grid prefixes.
    ///
    /// Works with the unnormalized cost F(t)·pri(t), which orders candidates exactly as
    /// the normalized recursion does.
    pub fn dp(&self, budget: f64) -> Result<BinTable> {
        if !(budget >= 0.0) {
            return config("distortion budget must be non-negative");
        }
        let n = self.len();
        let mut cost = vec![f64::INFINITY; n + 1];
        let mut prev = vec![usize::MAX; n + 1];
        cost[0] = 0.0;
        for t in 1..=n {
            // Feasible left endpoints form a suffix [first, t-1].
            let mut first = t;
            while first > 0 && self.bin_distortion_idx(first - 1, t).0 <= budget {
                first -= 1;
            }
            if first == t {
                continue;
            }
            let score = |theta: usize| {
                if cost[theta].is_finite() {
                    cost[theta] + self.mass(theta, t) * self.bin_privacy_idx(theta, t)
                } else {
                    f64::INFINITY
                }
            };
            // Scan order is t-1 down to `first` with a strict improvement test.
            let best = if t - first > PAR_THRESHOLD {
                let scored: Vec<(f64, usize)> = (first..t).into_par_iter().map(|th| (score(th), th)).collect();
                scored.into_iter().rev().fold((f64::INFINITY, usize::MAX), |acc, c| if c.0 < acc.0 { c } else { acc })
            } else {
                (first..t).rev().fold((f64::INFINITY, usize::MAX), |acc, th| {
                    let s = score(th);
                    if s < acc.0 {
                        (s, th)
                    } else {
                        acc
                    }
                })
            };
            cost[t] = best.0;
            prev[t] = best.1;
        }
        if !cost[n].is_finite() {
            return Err(Error::Infeasible(format!("no partition meets distortion budget {budget}")));
        }
        let mut cuts = vec![n];
        let mut t = n;
        while t > 0 {
            t = prev[t];
            cuts.push(t);
        }
        cuts.reverse();
        Ok(self.table_from_cuts(&cuts, budget, cost[n]))
    }

    /// Left-to-right scan taking the lowest-privacy feasible right endpoint (last wins on ties).
    pub fn greedy(&self, budget: f64) -> Result<BinTable> {
        if !(budget >= 0.0) {
            return config("distortion budget must be non-negative");
        }
        let n = self.len();
        let mut cuts = vec![0];
        let mut left = 0;
        let mut cost = 0.0;
        while left < n {
            let mut min_p = f64::INFINITY;
            let mut min_r = None;
            for r in left + 1..=n {
                if self.bin_distortion_idx(left, r).0 > budget {
                    break;
                }
                let p = self.bin_privacy_idx(left, r);
                if p <= min_p {
                    min_p = p;
                    min_r = Some(r);
                }
            }
            let r = min_r.ok_or_else(|| {
                Error::Infeasible(format!("greedy scan stuck at theta = {} under budget {budget}", self.point(left)))
            })?;
            cost += self.mass(left, r) * min_p;
            cuts.push(r);
            left = r;
        }
        Ok(self.table_from_cuts(&cuts, budget, cost))
    }
}

/// D(θ₁, θ₂) and its minimizing θ★ for on-grid endpoints.
pub fn bin_distortion(problem: &GridProblem, theta1: f64, theta2: f64) -> Result<(f64, f64)> {
    let grid = problem.grid()?;
    let (a, b) = (problem.index_of(theta1)?, problem.index_of(theta2)?);
    if a > b {
        return config("bin endpoints must satisfy theta1 <= theta2");
    }
    let (d, arg) = grid.bin_distortion_idx(a, b);
    Ok((d, grid.point(arg)))
}

/// P(θ₁, θ₂) for on-grid endpoints θ₁ < θ₂.
pub fn bin_privacy(problem: &GridProblem, theta1: f64, theta2: f64) -> Result<f64> {
    let grid = problem.grid()?;
    let (a, b) = (problem.index_of(theta1)?, problem.index_of(theta2)?);
    if a >= b {
        return config("bin endpoints must satisfy theta1 < theta2");
    }
    Ok(grid.bin_privacy_idx(a, b))
}

/// Minimal prior-weighted privacy over contiguous partitions meeting the budget.
pub fn dp_optimize(problem: &GridProblem, budget: f64) -> Result<BinTable> {
    problem.grid()?.dp(budget)
}

/// Greedy baseline.
pub fn greedy_optimize(problem: &GridProblem, budget: f64) -> Result<BinTable> {
    problem.grid()?.greedy(budget)
}

/// Smallest distortion budget in [b_lo, b_hi] (to within η) whose DP table reaches privacy ≤ target.
pub fn binary_search_mechanism(
    problem: &GridProblem,
    privacy_target: f64,
    b_lo: f64,
    b_hi: f64,
    eta: f64,
) -> Result<BinTable> {
    if !(eta > 0.0) {
        return config("eta must be positive");
    }
    if !(b_lo >= 0.0 && b_lo <= b_hi) {
        return config("search range must satisfy 0 <= lo <= hi");
    }
    let grid = problem.grid()?;
    let meets = |t: &BinTable| t.privacy <= privacy_target + 1e-12;
    let top = grid.dp(b_hi)?;
    if !meets(&top) {
        return Err(Error::Infeasible(format!(
            "privacy {} at the largest budget {b_hi} exceeds target {privacy_target}",
            top.privacy
        )));
    }
    let (mut lo, mut hi) = (b_lo, b_hi);
    let mut best = top;
    while hi - lo >= eta {
        let mid = 0.5 * (lo + hi);
        match grid.dp(mid) {
            Ok(t) if meets(&t) => {
                hi = mid;
                best = t;
            }
            Ok(_) | Err(Error::Infeasible(_)) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}
