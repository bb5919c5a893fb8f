use proptest::prelude::*;

use randcover::cantor::{plan_levels, Mode, PlanOptions, ShrinkSequence, Word};
use randcover::estimate::{box_count_series, mtp_transform};
use randcover::exponent::f_power_law;
use randcover::{
    coverage_fraction, generate_cover, phi_s, s0_analytic, singular_values, torus_distance, wrap,
    CoverConfig, Frame, ShapeSequence, SingularSpectrum, TorusPoint, TorusRectangle, XiStream,
};

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

fn ascending_exponents(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..4.0, d).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    })
}

/// Axis-aligned or rotated rectangle in dimension 1 or 2 with diameter below 1/2.
fn rectangle() -> impl Strategy<Value = TorusRectangle> {
    (1usize..=2, 0.0f64..1.0, 0.0f64..1.0, 0.01f64..0.34, 0.01f64..0.34, 0.0f64..6.3).prop_map(
        |(d, x, y, e0, e1, theta)| {
            if d == 1 {
                TorusRectangle::axis_aligned(wrap(&[x]).unwrap(), vec![e0]).unwrap()
            } else {
                TorusRectangle::new(wrap(&[x, y]).unwrap(), Frame::rotation_2d(theta), vec![e0, e1])
                    .unwrap()
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wrap_lands_in_unit_cube(x in coords(3)) {
        let p = wrap(&x).unwrap();
        prop_assert!(p.coords().iter().all(|&c| (0.0..1.0).contains(&c)));
        let shifted: Vec<f64> = x.iter().map(|c| c + 2.0).collect();
        let q = wrap(&shifted).unwrap();
        for (a, b) in p.coords().iter().zip(q.coords()) {
            prop_assert!((a - b).abs() < 1e-12 || (a - b).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn torus_distance_is_a_bounded_metric(a in coords(2), b in coords(2), c in coords(2)) {
        let (p, q, r) = (wrap(&a).unwrap(), wrap(&b).unwrap(), wrap(&c).unwrap());
        let pq = torus_distance(&p, &q).unwrap();
        prop_assert!((pq - torus_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(pq <= 2f64.sqrt() / 2.0 + 1e-12);
        prop_assert!(torus_distance(&p, &p).unwrap() == 0.0);
        let via = torus_distance(&p, &r).unwrap() + torus_distance(&r, &q).unwrap();
        prop_assert!(pq <= via + 1e-12);
    }

    #[test]
    fn fast_membership_matches_general(r in rectangle(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let pt: Vec<f64> = [x, y][..r.dim()].to_vec();
        let p = TorusPoint::wrap(&pt).unwrap();
        prop_assert_eq!(r.contains_coords(p.coords()), r.contains_point(&p));
    }

    #[test]
    fn shrunk_copy_is_inside_and_concentric(r in rectangle(), a in 0.05f64..1.0) {
        let s = r.shrink_similar(a).unwrap();
        prop_assert!(r.contains_rect(&s));
        prop_assert!(torus_distance(&r.center(), &s.center()).unwrap() < 1e-12);
        prop_assert!((s.volume() - a.powi(r.dim() as i32) * r.volume()).abs() < 1e-12);
    }

    #[test]
    fn placed_copy_is_inside(r in rectangle(), f0 in 0.01f64..1.0, f1 in 0.01f64..1.0) {
        let sorted = r.sorted_edges();
        let inner: Vec<f64> = [f0, f1][..r.dim()].iter().zip(&sorted).map(|(f, e)| f * e).collect();
        let c = r.place_copy_inside(&inner).unwrap();
        prop_assert!(r.contains_rect(&c));
        let mut want = inner.clone();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert_eq!(c.sorted_edges(), want);
    }

    #[test]
    fn vertices_are_contained(r in rectangle()) {
        for v in r.vertices() {
            prop_assert!(r.contains_point(&v));
        }
        prop_assert!(r.contains_point(&r.center()));
    }

    #[test]
    fn diagonal_singular_values_are_sorted_abs_entries(
        a in 0.01f64..0.99, b in 0.01f64..0.99, c in 0.01f64..0.99, theta in 0.0f64..6.3
    ) {
        let sv = singular_values(&[a, 0.0, 0.0, 0.0, b, 0.0, 0.0, 0.0, c], 3).unwrap();
        let mut want = vec![a, b, c];
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (got, w) in sv.alphas().iter().zip(&want) {
            prop_assert!((got - w).abs() <= 1e-12 * w.max(1.0));
        }
        // Rotations do not change singular values: R diag(a, b).
        let (cs, sn) = (theta.cos(), theta.sin());
        let m = [cs * a, -sn * b, sn * a, cs * b];
        let sv2 = singular_values(&m, 2).unwrap();
        let (hi, lo) = (a.max(b), a.min(b));
        prop_assert!((sv2.alphas()[0] - hi).abs() < 1e-10 && (sv2.alphas()[1] - lo).abs() < 1e-10);
    }

    #[test]
    fn phi_is_decreasing_in_s_for_contractions(e in prop::collection::vec(0.01f64..0.99, 1..4)) {
        let spec = SingularSpectrum::new(e.clone()).unwrap();
        let d = e.len() as f64;
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let s = d * i as f64 / 20.0;
            let v = phi_s(&spec, s).unwrap();
            prop_assert!(v <= prev * (1.0 + 1e-12));
            prev = v;
        }
        // Integer s gives the product of the largest s singular values.
        let mut sorted = e.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert!((phi_s(&spec, d).unwrap() - sorted.iter().product::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn f_is_strictly_decreasing_below_d(exps in ascending_exponents(3)) {
        let mut prev = f64::INFINITY;
        for i in 1..=30 {
            let s = 3.0 * i as f64 / 30.0;
            let f = f_power_law(&exps, s).unwrap();
            prop_assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn analytic_exponent_is_where_f_crosses_one(exps in ascending_exponents(3)) {
        let seq = ShapeSequence::power_law_unit(exps.clone()).unwrap();
        let s0 = s0_analytic(&seq).unwrap().s0;
        prop_assert!(s0 > 0.0 && s0 <= 3.0);
        if s0 < 3.0 {
            prop_assert!((f_power_law(&exps, s0).unwrap() - 1.0).abs() < 1e-9);
        } else {
            prop_assert!(f_power_law(&exps, 3.0).unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn cover_edges_do_not_depend_on_the_seed(
        s1 in any::<u64>(), s2 in any::<u64>(), n in 2u64..10_000, a in 1.0f64..3.0
    ) {
        let shape = ShapeSequence::power_law(vec![0.5], vec![a]).unwrap();
        let g1 = generate_cover(&CoverConfig::new(shape.clone(), 10_000, s1).unwrap(), n).unwrap();
        let g2 = generate_cover(&CoverConfig::new(shape, 10_000, s2).unwrap(), n).unwrap();
        prop_assert_eq!(g1.edges(), g2.edges());
        prop_assert!((g1.volume() - 0.5 * (n as f64).powf(-a)).abs() < 1e-15);
    }

    #[test]
    fn xi_stream_is_random_access(seed in any::<u64>(), n in 1u64..100_000) {
        let s = XiStream::new(seed, 2);
        let direct: TorusPoint = s.xi(n);
        let (_, via_iter) = s.iter_from::<f64>(n).next().unwrap();
        prop_assert_eq!(direct, via_iter);
    }

    #[test]
    fn coverage_grows_with_the_window(seed in any::<u64>(), end in 20u64..400) {
        let shape = ShapeSequence::power_law(vec![0.3], vec![0.8]).unwrap();
        let cfg = CoverConfig::new(shape, 400, seed).unwrap();
        let short = coverage_fraction(&cfg, 10, end, 8).unwrap();
        let long = coverage_fraction(&cfg, 10, 400, 8).unwrap();
        prop_assert!((0.0..=1.0).contains(&short) && short <= long);
    }

    #[test]
    fn box_counts_are_consistent(seed in any::<u64>(), count in 1usize..40) {
        let s = XiStream::new(seed, 2);
        let rects: Vec<TorusRectangle> = (1..=count as u64)
            .map(|n| TorusRectangle::axis_aligned(s.xi(n), vec![0.05, 0.013]).unwrap())
            .collect();
        let series = box_count_series(&rects, 1..=9).unwrap();
        prop_assert!(series.is_consistent());
    }

    #[test]
    fn word_prefix_relations(digits in prop::collection::vec(1u32..5, 0..8), extra in 1u32..5) {
        let w = Word::from_digits(digits.clone());
        let child = w.child(extra);
        prop_assert_eq!(child.len(), w.len() + 1);
        prop_assert!(w.is_prefix_of(&child));
        prop_assert_eq!(child.parent().unwrap(), w.clone());
        prop_assert_eq!(w.common_prefix(&child), w.clone());
        prop_assert_eq!(child.prefix(w.len()), w);
    }

    #[test]
    fn dyadic_shrink_product_is_bounded(l in 0usize..40) {
        let s = ShrinkSequence::<f64>::default();
        let a = s.a(l).unwrap();
        prop_assert!((0.5..1.0).contains(&a));
        prop_assert!(s.inverse_product(l) < 4.0);
    }

    #[test]
    fn mtp_transform_composes(r in 1e-6f64..0.5, s in 0.1f64..2.0) {
        let v = mtp_transform(r, s, 2);
        prop_assert!((v.ln() - s / 2.0 * r.ln()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Node counts follow `N_k = N_{k-1} M_k` and satisfy the deterministic bounds.
    #[test]
    fn plan_counts_follow_the_recursion(a in 1.5f64..3.0, scale in 1.0f64..8.0, frac in 0.5f64..0.9) {
        let shape = ShapeSequence::power_law(vec![scale], vec![a]).unwrap();
        let s = frac / a;
        let plan = plan_levels(&shape, s, 3, Mode::Relaxed, PlanOptions::default()).unwrap();
        let mut prev = 1u64;
        for l in plan.levels() {
            prop_assert_eq!(l.big_n, prev * l.big_m);
            prop_assert!(l.big_m >= 2);
            prop_assert!(l.n >= 4 * l.n_prev);
            let span = (l.n - l.n_prev) as f64 * l.vol_prev;
            prop_assert!(l.big_n as f64 <= span + 1e-9);
            prop_assert!(l.big_n as f64 >= 0.125 * l.a.powi(1) * span - 1e-9);
            prev = l.big_n;
        }
    }
}
