//! Monte-Carlo checks against independent oracles: KS and CLT bounds,
//! binomial tails and linearity of expectation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use randcover::cantor::{
    build, chebyshev_bound, plan_levels, sample_mu, sample_mu_indexed, CantorLevel, Mode, Node,
    PlanOptions, Word,
};
use randcover::stats::{binomial_cdf, ks_critical_95, ks_critical_99, ks_uniform};
use randcover::{
    coverage_fraction, covering_number, sample_xi, CoverConfig, CoverageGrid, ShapeSequence,
    TorusPoint, TorusRectangle, XiStream,
};

fn one_dim(scale: f64, a: f64) -> ShapeSequence {
    ShapeSequence::power_law(vec![scale], vec![a]).unwrap()
}

/// 99% quantile of the chi-square law (Wilson–Hilferty).
fn chi2_99(k: usize) -> f64 {
    let k = k as f64;
    let h = 2.0 / (9.0 * k);
    k * (1.0 - h + 2.326 * h.sqrt()).powi(3)
}

#[test]
fn xi_draws_pass_ks_and_clt() {
    let n = 100_000u64;
    let s = XiStream::new(2024, 1);
    let xs: Vec<f64> = (1..=n).map(|i| s.xi::<f64>(i).coords()[0]).collect();
    assert!(ks_uniform(&xs) < ks_critical_95(xs.len()));
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sigma = 1.0 / (12.0 * n as f64).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
}

#[test]
fn replay_and_distinct_draws() {
    let mut a = ChaCha8Rng::seed_from_u64(5);
    let mut b = ChaCha8Rng::seed_from_u64(5);
    let p: TorusPoint = sample_xi(&mut a, 3);
    let q: TorusPoint = sample_xi(&mut a, 3);
    assert_ne!(p, q);
    assert_eq!(p, sample_xi::<f64, _>(&mut b, 3));
    assert_eq!(XiStream::new(9, 2).xi::<f64>(77), XiStream::new(9, 2).xi::<f64>(77));
}

#[test]
fn mean_covering_number_matches_expected_volume() {
    // Oracle: E C_N(x) = sum_{n <= N} vol(g_n) for every x. Cells are positively
    // correlated, so the per-seed sigma uses the fully correlated bound.
    let shape = ShapeSequence::power_law(vec![0.7, 0.4], vec![0.6, 0.9]).unwrap();
    let (n_a, n_b) = (2u64, 3_000u64);
    let vols: Vec<f64> = (n_a..=n_b).map(|n| shape.volume(n).unwrap()).collect();
    let expected: f64 = vols.iter().sum();
    let var: f64 = vols.iter().map(|v| v * (1.0 - v)).sum();
    let seeds = 10u64;
    let mut total = 0.0;
    for seed in 0..seeds {
        let cfg = CoverConfig::new(shape.clone(), n_b, seed).unwrap();
        total += CoverageGrid::accumulate(&cfg, n_a, n_b, 6).unwrap().stats().mean;
    }
    let mean = total / seeds as f64;
    let sigma = (var / seeds as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * sigma, "{mean} vs {expected} ± {sigma}");
}

#[test]
fn covering_number_grows_like_gamma_log_n() {
    let cfg = CoverConfig::new(one_dim(2.0, 1.0), 100_000, 11).unwrap();
    let points: Vec<TorusPoint> = (0..1000)
        .map(|i| TorusPoint::wrap(&[(i as f64 + 0.5) / 1000.0]).unwrap())
        .collect();
    let st = covering_number(&cfg, &points, 100_000).unwrap();
    let ratio = st.mean / (2.0 * 100_000f64.ln());
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    assert!(st.min <= st.mean && st.mean <= st.max);
    let zero = covering_number(&cfg, &points, 0).unwrap();
    assert_eq!((zero.max, zero.frac), (0.0, 0.0));
}

#[test]
fn divergent_window_is_almost_covered() {
    // P(x uncovered) = prod (1 - 1/n) = (N_a - 1)/N_b.
    let cfg = CoverConfig::new(one_dim(1.0, 1.0), 100_000, 3).unwrap();
    let f = coverage_fraction(&cfg, 1_000, 100_000, 10).unwrap();
    let oracle = 1.0 - 999.0 / 100_000.0;
    assert!((f - oracle).abs() < 0.02, "{f}");
}

#[test]
fn convergent_window_obeys_union_bound() {
    let cfg = CoverConfig::new(one_dim(1.0, 2.0), 10_000, 3).unwrap();
    let f = coverage_fraction(&cfg, 1_000, 10_000, 10).unwrap();
    let bound: f64 = (1_000..=10_000u64).map(|n| (n as f64).powi(-2)).sum();
    let sigma = (bound / 1024.0).sqrt();
    assert!(f <= bound + 3.0 * sigma, "{f}");
}

#[test]
fn single_cover_fraction() {
    // One interval of length 0.99 covers 99% of the 1024 cell centers, up to one cell.
    let shape = ShapeSequence::lengths(vec![0.99], true).unwrap();
    let cfg = CoverConfig::new(shape, 1, 4).unwrap();
    let f = coverage_fraction(&cfg, 1, 1, 10).unwrap();
    assert!((f - 0.99).abs() <= 1.0 / 1024.0 + 1e-12, "{f}");
}

#[test]
fn hit_rate_inside_shrunken_parent() {
    let parent = TorusRectangle::axis_aligned(TorusPoint::wrap(&[0.95]).unwrap(), vec![0.1]).unwrap();
    let target = parent.shrink_similar(0.9).unwrap();
    let s = XiStream::new(17, 1);
    let m = 10_000u64;
    let hits = (1..=m).filter(|&i| target.contains_point(&s.xi(i))).count() as f64;
    let p = 0.09;
    let sigma = (p * (1.0 - p) / m as f64).sqrt();
    assert!((hits / m as f64 - p).abs() < 3.0 * sigma);
}

#[test]
fn chebyshev_bound_dominates_binomial_tails() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let trials = 100_000u64;
    for (n, vol) in [(100u64, 0.5f64), (50, 0.2)] {
        let bound = chebyshev_bound(n, vol).unwrap();
        let cut = 0.5 * n as f64 * vol;
        let mut low = 0u64;
        for _ in 0..trials {
            let m = (0..n).filter(|_| rand::Rng::random::<f64>(&mut rng) < vol).count() as f64;
            if m <= cut {
                low += 1;
            }
        }
        let freq = low as f64 / trials as f64;
        let exact = binomial_cdf(cut.floor() as u64, n, vol);
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt().max(1.0 / trials as f64);
        assert!(freq <= bound, "n={n}: {freq} > {bound}");
        assert!((freq - exact).abs() <= 4.0 * sigma, "n={n}: {freq} vs exact {exact}");
    }
    assert!((chebyshev_bound(100, 0.5).unwrap() - 0.04f64).abs() < 1e-15);
    assert!((chebyshev_bound(50, 0.2).unwrap() - 0.32f64).abs() < 1e-15);
}

fn single_node_level(rect: TorusRectangle) -> CantorLevel {
    CantorLevel {
        k: 1,
        nodes: vec![Node {
            word: Word::from_digits(vec![1]),
            index: 1,
            corner: rect.corner().clone(),
            rect,
        }],
    }
}

#[test]
fn natural_measure_of_one_node_is_uniform() {
    let rect = TorusRectangle::axis_aligned(TorusPoint::wrap(&[0.8, 0.1]).unwrap(), vec![0.3, 0.05]).unwrap();
    let level = single_node_level(rect.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 20_000;
    let mut u = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    for _ in 0..n {
        let p = sample_mu(&level, &mut rng).unwrap();
        let local = rect.local_coords(&p);
        u[0].push(local[0] / 0.3);
        u[1].push(local[1] / 0.05);
    }
    for axis in &u {
        assert!(ks_uniform(axis) < ks_critical_99(n));
    }
}

#[test]
fn natural_measure_support_and_node_frequencies() {
    let plan = plan_levels(&one_dim(4.0, 2.0), 0.4, 2, Mode::Relaxed, PlanOptions::default()).unwrap();
    let c = (0..50u64)
        .map(|s| build(&plan, s).unwrap())
        .find(|c| c.complete(&plan))
        .expect("a complete build");
    let level = &c.levels[1];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples = 100_000;
    let mut freq = vec![0u64; level.len()];
    for _ in 0..samples {
        let (i, p) = sample_mu_indexed(level, &mut rng).unwrap();
        assert!(level.contains_point(&p));
        freq[i] += 1;
    }
    let expected = samples as f64 / level.len() as f64;
    let chi2: f64 = freq.iter().map(|&f| (f as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < chi2_99(level.len() - 1), "chi2 {chi2}");
}

#[test]
fn accepted_translations_are_uniform_in_shrunken_parents() {
    let plan = plan_levels(&one_dim(4.0, 2.0), 0.4, 2, Mode::Relaxed, PlanOptions::default()).unwrap();
    let a = plan.level(2).unwrap().a;
    let mut u = Vec::new();
    for seed in 0..200u64 {
        let c = build(&plan, seed).unwrap();
        if !c.complete(&plan) {
            continue;
        }
        for node in &c.levels[1].nodes {
            let pw = node.word.parent().unwrap();
            let parent = c.levels[0].nodes.iter().find(|p| p.word == pw).unwrap();
            let target = parent.rect.shrink_similar(a).unwrap();
            u.push(target.local_coords(&node.corner)[0] / target.edges()[0]);
        }
    }
    assert!(u.len() > 100, "only {} accepted translations", u.len());
    assert!(ks_uniform(&u) < ks_critical_99(u.len()));
}

#[test]
fn pair_correlation_is_bounded_by_the_common_ancestor() {
    // E[1_{G(j)}(y) 1_{G(i)}(x)] <= (prod 1/a_l)^{2d} det_ratio E[1_{G(i^j)}(y) 1_{G(i^j)}(x)]
    // on a grid fine enough that every level-2 set contains grid points.
    let plan = plan_levels(&one_dim(0.45, 1.05), 0.5, 2, Mode::Relaxed, PlanOptions::default()).unwrap();
    let (wi, wj) = (Word::from_digits(vec![1, 1]), Word::from_digits(vec![1, 2]));
    let wa = wi.common_prefix(&wj);
    let vol = |k: usize| plan.shape().volume(plan.n(k)).unwrap();
    let det_ratio = vol(2) * vol(2) / (vol(1) * vol(1));
    let inv_a: f64 = (0..=2).map(|l| 1.0 / plan.options().shrink.a(l).unwrap()).product();
    let factor = inv_a.powi(2) * det_ratio;

    let g = 1024usize;
    let grid_in = |r: &TorusRectangle| -> Vec<usize> {
        (0..g)
            .filter(|&k| r.contains_coords(&[(k as f64 + 0.5) / g as f64]))
            .collect()
    };
    let rect_of = |level: &CantorLevel, w: &Word| level.nodes.iter().find(|n| n.word == *w).map(|n| n.rect.clone());
    let seeds = 2_000u64;
    let mut lhs = vec![0u32; g * g];
    let mut rhs = vec![0u32; g * g];
    let (mut lhs_sum, mut rhs_sum) = (Vec::new(), Vec::new());
    for seed in 0..seeds {
        let c = build(&plan, seed).unwrap();
        let anc = grid_in(&rect_of(&c.levels[0], &wa).unwrap());
        for &x in &anc {
            for &y in &anc {
                rhs[x * g + y] += 1;
            }
        }
        rhs_sum.push((anc.len() * anc.len()) as f64);
        let pair = c.levels.get(1).map(|l| (rect_of(l, &wi).unwrap(), rect_of(l, &wj).unwrap()));
        let mut hits = 0.0;
        if let Some((gi, gj)) = pair {
            let (xs, ys) = (grid_in(&gi), grid_in(&gj));
            for &x in &xs {
                for &y in &ys {
                    lhs[x * g + y] += 1;
                }
            }
            hits = (xs.len() * ys.len()) as f64;
        }
        lhs_sum.push(hits);
    }
    assert!(lhs.iter().any(|&l| l > 0), "no pair was ever covered");
    let s = seeds as f64;
    for (l, r) in lhs.iter().zip(&rhs) {
        let p = f64::from(*l) / s;
        let q = f64::from(*r) / s;
        let sigma = (p * (1.0 - p) / s).sqrt() + (q * (1.0 - q) / s).sqrt() * factor;
        assert!(p <= factor * q + 3.0 * sigma, "{p} > {factor} * {q}");
    }
    // Summed over all grid pairs the comparison has far smaller relative noise.
    let mean_sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / s;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s - 1.0);
        (m, (var / s).sqrt())
    };
    let (ml, sl) = mean_sd(&lhs_sum);
    let (mr, sr) = mean_sd(&rhs_sum);
    assert!(ml > 0.0);
    assert!(ml <= factor * mr + 3.0 * (sl + factor * sr), "{ml} > {factor} * {mr}");
}
