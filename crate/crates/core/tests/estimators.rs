use randcover::estimate::{
    ball_like_dimension, box_count_series, box_dim_fit, energy_mc, falconer_check, tail_cover_sum,
    uniform_sampler, DEFAULT_CAP,
};
use randcover::exponent::default_window;
use randcover::{
    f_hat_windowed, s0_analytic, s0_numeric, ShapeSequence, ShapeSequenceF32, TorusPoint,
    TorusRectangle, Window,
};

fn unit_power_law(exps: &[f64]) -> ShapeSequence {
    ShapeSequence::power_law_unit(exps.to_vec()).unwrap()
}

/// Euler-Maclaurin value of `sum_{n >= start} n^-p`, with error `O(start^{-p-3})`.
fn zeta_tail(p: f64, start: u64) -> f64 {
    let n = start as f64;
    n.powf(1.0 - p) / (p - 1.0) + 0.5 * n.powf(-p) + p / 12.0 * n.powf(-p - 1.0)
}

#[test]
fn numeric_exponent_of_one_parameter_laws() {
    for alpha in [1.5, 2.0, 3.0] {
        let seq = unit_power_law(&[alpha]);
        let r = s0_numeric(&seq, 1e-6, None).unwrap();
        assert!((r.s0 - 1.0 / alpha).abs() < 1e-4, "alpha {alpha}: {}", r.s0);
        assert!((s0_analytic(&seq).unwrap().s0 - 1.0 / alpha).abs() < 1e-14);
    }
}

#[test]
fn numeric_and_analytic_agree_in_two_dimensions() {
    // (0.6, 0.9): the first exponent alone stays below one, so s0 = 1 + 0.4 / 0.9.
    let seq = unit_power_law(&[0.6, 0.9]);
    let oracle = 1.0 + 0.4 / 0.9;
    assert!((s0_analytic(&seq).unwrap().s0 - oracle).abs() < 1e-12);
    assert!((s0_numeric(&seq, 1e-6, None).unwrap().s0 - oracle).abs() < 1e-4);
    // Non-unit scales only move the finite-window estimate slightly.
    let scaled = ShapeSequence::power_law(vec![0.5, 0.5], vec![0.6, 0.9]).unwrap();
    assert!((s0_numeric(&scaled, 1e-6, None).unwrap().s0 - oracle).abs() < 0.05);
}

#[test]
fn explicit_list_exponent() {
    let values: Vec<f64> = (1..=20_000u64).map(|n| (n as f64).powi(-2)).collect();
    let seq = ShapeSequence::lengths(values, false).unwrap();
    let r = s0_numeric(&seq, 1e-6, None).unwrap();
    assert!((r.s0 - 0.5).abs() < 1e-3, "{}", r.s0);
    let w = default_window(&seq).unwrap();
    assert!(f_hat_windowed(&seq, 0.9 * r.s0, w).unwrap() > 1.0);
    assert!(f_hat_windowed(&seq, 1.1 * r.s0, w).unwrap() < 1.0);
}

#[test]
fn single_precision_matches_double() {
    let s32 = s0_analytic(&ShapeSequenceF32::power_law_unit(vec![0.6, 0.9]).unwrap())
        .unwrap()
        .s0;
    let s64 = s0_analytic(&unit_power_law(&[0.6, 0.9])).unwrap().s0;
    assert!((f64::from(s32) - s64).abs() < 1e-6);
    let w = Window::new(2, 1_000_000).unwrap();
    let seq = ShapeSequenceF32::power_law_unit(vec![2.0]).unwrap();
    assert!((f_hat_windowed(&seq, 0.25f32, w).unwrap() - 2.0).abs() < 1e-4);
}

#[test]
fn uniform_energy_on_the_circle() {
    // 2 int_0^{1/2} r^-s dr = 2^s / (1 - s); 2 sqrt 2 at s = 1/2.
    let e = energy_mc(uniform_sampler::<f64>(1), 0.5, DEFAULT_CAP, 200_000, 7).unwrap();
    let oracle = 2.0 * 2f64.sqrt();
    assert!((e.mean - oracle).abs() < 3.0 * e.stderr, "{} +- {}", e.mean, e.stderr);
    // Same law on the 2-torus at s = 1: int over the unit square of 1/|x|.
    let e2 = energy_mc(uniform_sampler::<f64>(2), 1.0, DEFAULT_CAP, 200_000, 8).unwrap();
    let oracle2 = 4.0 * (1.0 + 2f64.sqrt()).ln();
    assert!((e2.mean - oracle2).abs() < 3.0 * e2.stderr, "{} vs {oracle2}", e2.mean);
}

#[test]
fn falconer_scalar_constant() {
    // int_0^1 (x/2)^-1/2 dx * (1/2)^1/2 = 2.
    let r = falconer_check(&[0.5], 1, 0.5, 1_000_000, 3).unwrap();
    assert!((r.product - 2.0).abs() < 3.0 * r.product_stderr, "{} +- {}", r.product, r.product_stderr);
    assert!(!r.unreliable);
}

#[test]
fn falconer_diagonal_constant_is_bounded() {
    for t in [0.9, 0.5, 0.3] {
        let r = falconer_check(&[t, 0.0, 0.0, t * t], 2, 1.5, 100_000, 4).unwrap();
        assert!((r.phi - t * (t * t).sqrt()).abs() < 1e-12);
        assert!(r.product > 0.5 && r.product < 10.0, "t = {t}: {}", r.product);
    }
}

#[test]
fn tail_sum_matches_zeta_tail() {
    let seq = unit_power_law(&[2.0]);
    for (s, start) in [(0.6, 10u64), (0.6, 1_000), (0.75, 100)] {
        let got = tail_cover_sum(&seq, s, start, 100_000).unwrap();
        let oracle = zeta_tail(2.0 * s, start);
        assert!(got >= oracle * (1.0 - 1e-6), "s {s} start {start}: {got} < {oracle}");
        assert!(got <= oracle * 1.001, "s {s} start {start}: {got} vs {oracle}");
    }
    // Two dimensions at s = 1.5: factor 2 (sqrt 2)^1.5 and Phi = n^-1.5.
    let seq2 = unit_power_law(&[1.0, 1.0]);
    let got = tail_cover_sum(&seq2, 1.5, 50, 100_000).unwrap();
    let oracle = 2.0 * 2f64.sqrt().powf(1.5) * zeta_tail(1.5, 50);
    assert!((got / oracle - 1.0).abs() < 1e-3, "{got} vs {oracle}");
}

#[test]
fn ball_like_examples() {
    assert_eq!(ball_like_dimension(&unit_power_law(&[2.0]), 1).unwrap(), 0.5);
    assert_eq!(ball_like_dimension(&unit_power_law(&[0.5]), 1).unwrap(), 1.0);
    assert_eq!(ball_like_dimension(&unit_power_law(&[1.0 / 3.0]), 2).unwrap(), 2.0);
    let radii: Vec<f64> = (1..=20_000u64).map(|n| (n as f64).powi(-4)).collect();
    let listed = ShapeSequence::lengths(radii, false).unwrap();
    assert!((ball_like_dimension(&listed, 3).unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn box_dimension_of_simple_sets() {
    // Four thin rectangles spanning a horizontal circle: dimension 1 in the plane.
    let strip: Vec<TorusRectangle> = (0..4)
        .map(|k| {
            let corner = TorusPoint::wrap(&[0.25 * f64::from(k), 0.3]).unwrap();
            TorusRectangle::axis_aligned(corner, vec![0.2499, 1e-9]).unwrap()
        })
        .collect();
    let series = box_count_series(&strip, 1..=12).unwrap();
    let fit = box_dim_fit(&series, 1, 12).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-3, "{}", fit.slope);
    assert_eq!(fit.clone().with_target(1.0, 0.15).verdict, Some(true));
    // Middle-thirds-like union of 2^6 intervals of length 4^-6: slope 1/2 on j <= 12.
    let mut rects = Vec::new();
    for w in 0..64i32 {
        let x: f64 = (0..6).map(|b| f64::from((w >> b) & 1) * 2.0 * 4f64.powi(-b - 1)).sum();
        rects.push(TorusRectangle::axis_aligned(TorusPoint::wrap(&[x]).unwrap(), vec![4f64.powi(-6)]).unwrap());
    }
    let series = box_count_series(&rects, 2..=12).unwrap();
    let fit = box_dim_fit(&series, 2, 12).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.05, "{}", fit.slope);
}
