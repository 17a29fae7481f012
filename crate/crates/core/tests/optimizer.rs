use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statpriv::model::{secret_value, wasserstein1, Family, FamilyParams, SecretSpec};
use statpriv::optimizer::*;
use statpriv::Error;

fn problem(family: Family, secret: SecretSpec, eps: f64, lo: f64, hi: f64, n: usize) -> GridProblem {
    GridProblem { family, secret, epsilon: eps, theta_lo: lo, theta_hi: hi, grid_count: n, prior: GridPrior::Uniform }
}

/// Independent grid evaluation used by the exhaustive oracles.
struct Oracle {
    params: Vec<FamilyParams>,
    secrets: Vec<f64>,
    mass: Vec<f64>,
    eps: f64,
}

impl Oracle {
    fn new(p: &GridProblem) -> Self {
        let n = p.grid_count;
        let step = (p.theta_hi - p.theta_lo) / n as f64;
        let params: Vec<FamilyParams> = (0..=n)
            .map(|k| {
                let t = if k == n { p.theta_hi } else { p.theta_lo + k as f64 * step };
                FamilyParams::from_coords(p.family, &[t]).unwrap()
            })
            .collect();
        let secrets = params.iter().map(|q| secret_value(q, &p.secret).unwrap()).collect();
        let mass = match &p.prior {
            GridPrior::Uniform => vec![step; n],
            GridPrior::Density { values } => values.iter().map(|v| v * step).collect(),
        };
        Self { params, secrets, mass, eps: p.epsilon }
    }

    /// min over candidates of the max distance to every grid point in [a, b].
    fn distortion(&self, a: usize, b: usize) -> f64 {
        (a..=b)
            .map(|c| (a..=b).map(|k| wasserstein1(&self.params[k], &self.params[c]).unwrap()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest conditional mass of any set of cells whose secret images fit in a 2ε window.
    fn privacy(&self, a: usize, b: usize) -> f64 {
        let cells: Vec<(f64, f64, f64)> = (a..b)
            .map(|k| {
                let (x, y) = (self.secrets[k], self.secrets[k + 1]);
                (x.min(y), x.max(y), self.mass[k])
            })
            .collect();
        let total: f64 = cells.iter().map(|c| c.2).sum();
        let mut best = 0.0f64;
        for set in 1u32..(1 << cells.len()) {
            let chosen = cells.iter().enumerate().filter(|(i, _)| set >> i & 1 == 1).map(|(_, c)| c);
            let (mut lo, mut hi, mut m) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for c in chosen {
                lo = lo.min(c.0);
                hi = hi.max(c.1);
                m += c.2;
            }
            if hi - lo <= 2.0 * self.eps * (1.0 + 1e-12) {
                best = best.max(m);
            }
        }
        best / total
    }

    /// Exhaustive minimum over all contiguous partitions meeting the budget.
    fn best_partition(&self, budget: f64) -> Option<f64> {
        let n = self.mass.len();
        let total: f64 = self.mass.iter().sum();
        let mut d = vec![vec![0.0; n + 1]; n + 1];
        let mut p = vec![vec![0.0; n + 1]; n + 1];
        for a in 0..n {
            for b in a + 1..=n {
                d[a][b] = self.distortion(a, b);
                p[a][b] = self.privacy(a, b) * self.mass[a..b].iter().sum::<f64>();
            }
        }
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << (n - 1)) {
            let mut cuts = vec![0];
            cuts.extend((1..n).filter(|i| mask >> (i - 1) & 1 == 1));
            cuts.push(n);
            if cuts.windows(2).any(|w| d[w[0]][w[1]] > budget) {
                continue;
            }
            let cost: f64 = cuts.windows(2).map(|w| p[w[0]][w[1]]).sum::<f64>() / total;
            best = Some(best.map_or(cost, |b: f64| b.min(cost)));
        }
        best
    }
}

fn random_problem(rng: &mut ChaCha8Rng, family_idx: usize, secret_idx: usize) -> GridProblem {
    let n = rng.random_range(3..=11);
    let (family, lo, hi) = match family_idx {
        0 => {
            let lo = rng.random_range(0.1..0.5);
            (Family::Geometric, lo, lo + rng.random_range(0.1..0.45))
        }
        1 => {
            let lo = rng.random_range(0.05..0.5);
            (Family::Binomial { n_trials: rng.random_range(3..20) }, lo, lo + rng.random_range(0.1..0.45))
        }
        _ => {
            let lo = rng.random_range(0.2..3.0);
            (Family::Poisson, lo, lo + rng.random_range(0.5..4.0))
        }
    };
    let secret = match secret_idx {
        0 => SecretSpec::Mean,
        1 => SecretSpec::Std,
        _ => SecretSpec::Fraction { j: rng.random_range(0..3) },
    };
    let eps = match secret_idx {
        2 => rng.random_range(0.005..0.05),
        _ => rng.random_range(0.02..0.3),
    };
    let mut p = problem(family, secret, eps, lo, hi, n);
    if rng.random_bool(0.5) {
        p.prior = GridPrior::Density { values: (0..n).map(|_| rng.random_range(0.1..2.0)).collect() };
    }
    p
}

#[test]
fn dp_matches_exhaustive_partition_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for round in 0..30 {
        let p = random_problem(&mut rng, round % 3, (round / 3) % 3);
        let grid = p.grid().unwrap();
        let oracle = Oracle::new(&p);
        let n = p.grid_count;
        // Budgets at every attainable bin distortion plus one value below the smallest.
        let mut budgets: Vec<f64> = (0..n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).map(|(a, b)| oracle.distortion(a, b)).collect();
        budgets.push(0.0);
        budgets.sort_by(f64::total_cmp);
        budgets.dedup();
        for &budget in &budgets {
            let want = oracle.best_partition(budget);
            match (grid.dp(budget), want) {
                (Ok(t), Some(w)) => {
                    assert!((t.privacy - w).abs() <= 1e-12, "{p:?} budget {budget}: {} vs {w}", t.privacy);
                    assert!(t.distortion <= budget);
                    checked += 1;
                }
                (Err(Error::Infeasible(_)), None) => {}
                (got, want) => panic!("{p:?} budget {budget}: {got:?} vs {want:?}"),
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn bin_distortion_matches_scan() {
    let p = problem(Family::Exponential, SecretSpec::Mean, 0.1, 1.0, 2.0, 10);
    let (d, arg) = bin_distortion(&p, 1.0, 1.2).unwrap();
    assert!((d - 0.1).abs() < 1e-12);
    assert!((arg - 1.1).abs() < 1e-12);

    let p = problem(Family::Geometric, SecretSpec::Mean, 0.1, 0.1, 0.9, 80);
    let (d, arg) = bin_distortion(&p, 0.3, 0.5).unwrap();
    let o = Oracle::new(&p);
    let (a, b) = (20, 40);
    let scan = (a..=b)
        .map(|c| ((a..=b).map(|k| wasserstein1(&o.params[k], &o.params[c]).unwrap()).fold(0.0, f64::max), c))
        .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
    assert!((d - scan.0).abs() < 1e-12);
    let w = |t: f64| wasserstein1(&FamilyParams::geometric(t).unwrap(), &FamilyParams::geometric(arg).unwrap()).unwrap();
    assert!((w(0.3).max(w(0.5)) - scan.0).abs() < 1e-12);
    assert!(matches!(bin_distortion(&p, 0.3, 0.505), Err(Error::Config(_))));
    assert!(bin_distortion(&p, 0.5, 0.3).is_err());
}

#[test]
fn bin_privacy_matches_window_scan() {
    let p = problem(Family::Geometric, SecretSpec::Mean, 0.25, 0.2, 0.8, 60);
    let o = Oracle::new(&p);
    let (a, b) = (10, 40);
    // Sliding windows over contiguous cell runs; the secret is monotone here.
    let mut best = 0.0f64;
    for l in a..b {
        for r in l + 1..=b {
            if (o.secrets[l] - o.secrets[r]).abs() <= 2.0 * p.epsilon {
                best = best.max((r - l) as f64);
            }
        }
    }
    let want = best / (b - a) as f64;
    let got = bin_privacy(&p, p.theta_lo + 10.0 * 0.01, p.theta_lo + 40.0 * 0.01).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!(bin_privacy(&p, 0.3, 0.3).is_err());
}

#[test]
fn greedy_never_beats_dp() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..50 {
        let s = rng.random_range(0..3);
        let mut p = random_problem(&mut rng, round % 3, s);
        p.grid_count = rng.random_range(10..80);
        if let GridPrior::Density { .. } = p.prior {
            p.prior = GridPrior::Density { values: (0..p.grid_count).map(|_| rng.random_range(0.1..2.0)).collect() };
        }
        let grid = p.grid().unwrap();
        let full = grid.bin_distortion_idx(0, p.grid_count).0;
        let budget = full * rng.random_range(0.05..1.0);
        match (grid.dp(budget), grid.greedy(budget)) {
            (Ok(d), Ok(g)) => assert!(g.privacy >= d.privacy - 1e-12, "{p:?}: greedy {} dp {}", g.privacy, d.privacy),
            (Ok(_), Err(Error::Infeasible(_))) | (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {}
            (d, g) => panic!("{d:?} {g:?}"),
        }
    }
}

#[test]
fn greedy_equals_dp_when_one_bin_fits() {
    let p = problem(Family::Poisson, SecretSpec::Mean, 0.2, 1.0, 3.0, 40);
    let grid = p.grid().unwrap();
    let budget = grid.bin_distortion_idx(0, 40).0;
    let d = grid.dp(budget).unwrap();
    let g = grid.greedy(budget).unwrap();
    assert_eq!(d.bins.len(), 1);
    assert_eq!(d, g);
}

#[test]
fn dp_privacy_nonincreasing_in_budget() {
    let p = problem(Family::Geometric, SecretSpec::Mean, 0.1, 0.1, 0.9, 80);
    let grid = p.grid().unwrap();
    let top = grid.bin_distortion_idx(0, 80).0;
    let mut last = f64::INFINITY;
    for k in 1..=20 {
        match grid.dp(top * k as f64 / 20.0) {
            Ok(t) => {
                assert!(t.privacy <= last + 1e-12);
                last = t.privacy;
            }
            Err(Error::Infeasible(_)) => assert!(last.is_infinite()),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn tables_tile_the_range() {
    let p = problem(Family::Binomial { n_trials: 10 }, SecretSpec::Std, 0.1, 0.1, 0.9, 64);
    let t = dp_optimize(&p, 0.3).unwrap();
    assert_eq!(t.bins.first().unwrap().lo, 0.1);
    assert_eq!(t.bins.last().unwrap().hi, 0.9);
    for w in t.bins.windows(2) {
        assert_eq!(w[0].hi, w[1].lo);
    }
    for b in &t.bins {
        assert!(b.distortion <= 0.3);
        assert!(b.release >= b.lo && b.release <= b.hi);
        p.index_of(b.release).unwrap();
    }
    assert_eq!(t.lookup(0.1).unwrap(), t.bins[0].release);
    assert_eq!(t.lookup(0.9).unwrap(), t.bins.last().unwrap().release);
    let mid = t.bins[1].lo;
    assert_eq!(t.lookup(mid).unwrap(), t.bins[1].release);
    assert!(matches!(t.lookup(0.95), Err(Error::Domain(_))));
    let text = serde_json::to_string(&t).unwrap();
    assert_eq!(serde_json::from_str::<BinTable>(&text).unwrap(), t);
}

#[test]
fn geometric_mean_curve_point() {
    let p = problem(Family::Geometric, SecretSpec::Mean, 0.5, 0.1, 0.9, 80);
    let t = dp_optimize(&p, 1.0).unwrap();
    let g = greedy_optimize(&p, 1.0).unwrap();
    assert!(t.privacy <= g.privacy);
    assert!(t.privacy > 0.0 && t.privacy < 1.0);
    // Reproducible across runs.
    assert_eq!(dp_optimize(&p, 1.0).unwrap(), t);
}

#[test]
fn binary_search_matches_budget_scan() {
    let p = problem(Family::Geometric, SecretSpec::Mean, 0.2, 0.2, 0.8, 60);
    let grid = p.grid().unwrap();
    let hi = grid.bin_distortion_idx(0, 60).0;
    let eta = 1e-3;
    for target in [0.35, 0.5, 0.7] {
        let t = binary_search_mechanism(&p, target, 0.0, hi, eta).unwrap();
        assert!(t.privacy <= target + 1e-12);
        let mut b = 0.0;
        let scan = loop {
            if let Ok(s) = grid.dp(b) {
                if s.privacy <= target + 1e-12 {
                    break b;
                }
            }
            b += eta / 4.0;
        };
        assert!((t.budget - scan).abs() <= eta, "target {target}: {} vs {scan}", t.budget);
    }
    assert!(matches!(binary_search_mechanism(&p, 0.0, 0.0, hi, eta), Err(Error::Infeasible(_))));
    assert!(matches!(binary_search_mechanism(&p, 0.5, 0.0, hi, 0.0), Err(Error::Config(_))));
}

#[test]
fn problem_validation() {
    let mut p = problem(Family::Gaussian, SecretSpec::Mean, 0.1, 0.0, 1.0, 10);
    assert!(matches!(p.grid(), Err(Error::Config(_))));
    p.family = Family::Poisson;
    p.grid_count = MAX_GRID + 1;
    assert!(matches!(p.grid(), Err(Error::Config(_))));
    p.grid_count = 10;
    p.prior = GridPrior::Density { values: vec![1.0; 9] };
    assert!(p.grid().is_err());
    p.prior = GridPrior::Uniform;
    p.epsilon = 0.0;
    assert!(p.grid().is_err());
    let ok = problem(Family::Poisson, SecretSpec::Mean, 0.1, 1.0, 2.0, 10);
    assert!(matches!(ok.grid().unwrap().dp(0.0), Err(Error::Infeasible(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_table_respects_budget(seed in 0u64..u64::MAX, frac in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = random_problem(&mut rng, (seed % 3) as usize, ((seed / 3) % 3) as usize);
        p.grid_count = 30;
        p.prior = GridPrior::Uniform;
        let grid = p.grid().unwrap();
        let budget = grid.bin_distortion_idx(0, 30).0 * frac;
        if let Ok(t) = grid.dp(budget) {
            prop_assert!(t.bins.iter().all(|b| b.distortion <= budget));
            prop_assert!((0.0..=1.0).contains(&t.privacy));
            let cuts: Vec<usize> = std::iter::once(0).chain(t.bins.iter().map(|b| p.index_of(b.hi).unwrap())).collect();
            prop_assert!((grid.partition_privacy(&cuts) - t.privacy).abs() < 1e-12);
        }
    }
}
