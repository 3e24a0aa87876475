mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use srm_ltrc::estimators::{estimate_emp, estimate_prod, srm_from_quantile, EstimationContext, EstimatorKind};
use srm_ltrc::inference::{bootstrap_ci, estimate_sigma2, BootstrapPlan, VariancePlugin};
use srm_ltrc::io::{ltrc_to_csv, parse_claims_str, ClaimsFormat};
use srm_ltrc::pl::{fit_pl, pl_quantile, LtrcObservation, LtrcSample, QuantileFunction};
use srm_ltrc::spectrum::Spectrum;

fn ltrc_sample(max_n: usize) -> impl Strategy<Value = LtrcSample> {
    prop::collection::vec((0u32..40, 0u32..40, prop::bool::weighted(0.7)), 1..max_n).prop_map(|rows| {
        let obs = rows
            .into_iter()
            .map(|(t, gap, d)| {
                let t = f64::from(t) * 0.5;
                LtrcObservation::new(t + f64::from(gap) * 0.25, t, d).unwrap()
            })
            .collect();
        LtrcSample::new(obs).unwrap()
    })
}

fn step_quantile() -> impl Strategy<Value = QuantileFunction> {
    (prop::collection::vec((0.01f64..1.0, 0.0f64..10.0), 1..25), -100.0f64..100.0).prop_map(|(parts, base)| {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        let (mut acc, mut level) = (0.0, base);
        for (w, step) in &parts {
            acc += w / total;
            level += step;
            breaks.push(acc);
            values.push(level);
        }
        *breaks.last_mut().unwrap() = 1.0;
        breaks.dedup();
        values.truncate(breaks.len() - 1);
        QuantileFunction::from_parts(breaks, values).unwrap()
    })
}

fn k_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(5.0), Just(10.0), Just(20.0), Just(100.0), Just(200.0), 0.1f64..300.0]
}

proptest! {
    #[test]
    fn pl_is_a_distribution(sample in ltrc_sample(60)) {
        let f = fit_pl(&sample);
        let vals = f.values();
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(f.eval(sample.max_y()), 1.0);
        prop_assert_eq!(f.eval(f64::NEG_INFINITY), 0.0);
        for y in sample.sorted_y() {
            prop_assert!(sample.uncensored_subdist(*y) <= sample.sorted_y().iter().filter(|v| *v <= y).count() as f64 / sample.len() as f64);
        }
    }

    #[test]
    fn quantile_is_generalized_inverse(sample in ltrc_sample(60), p in 0.001f64..=1.0) {
        let f = fit_pl(&sample);
        let q = pl_quantile(&f).unwrap();
        let x = q.eval(p);
        prop_assert!(f.eval(x) >= p);
        for &z in f.knots().iter().filter(|&&z| z < x) {
            prop_assert!(f.eval(z) < p);
        }
    }

    #[test]
    fn srm_nondecreasing_in_k(q in step_quantile(), k1 in k_value(), k2 in k_value()) {
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let a = srm_from_quantile(&q, &Spectrum::exponential(lo).unwrap());
        let b = srm_from_quantile(&q, &Spectrum::exponential(hi).unwrap());
        prop_assert!(b >= a - 1e-12 * a.abs().max(1.0));
        let first = q.segment_values()[0];
        let last = *q.segment_values().last().unwrap();
        prop_assert!(a >= first - 1e-9 && a <= last + 1e-9);
    }

    #[test]
    fn segment_integrals_add_up(k in k_value(), mut cuts in prop::collection::vec(0.0f64..=1.0, 0..30)) {
        let s = Spectrum::exponential(k).unwrap();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        let sum: f64 = cuts.windows(2).map(|w| s.segment_integral(w[0], w[1])).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn expected_shortfall_is_tail_average(q in step_quantile(), p in 0.0f64..0.999) {
        let got = srm_from_quantile(&q, &Spectrum::expected_shortfall(p).unwrap());
        let tail: f64 = q.segments().map(|(a, b, v)| v * (b - a.max(p)).max(0.0)).sum::<f64>() / (1.0 - p);
        prop_assert!((got - tail).abs() <= 1e-9 * tail.abs().max(1.0));
    }

    #[test]
    fn prod_and_emp_are_affine_equivariant(sample in ltrc_sample(50), scale in 0.1f64..10.0, shift in -50.0f64..50.0, k in k_value()) {
        let s = Spectrum::exponential(k).unwrap();
        let moved = sample.affine(scale, shift).unwrap();
        for f in [estimate_prod, estimate_emp] {
            let base = f(&sample, &s).unwrap();
            let got = f(&moved, &s).unwrap();
            let want = scale * base + shift;
            prop_assert!((got - want).abs() <= 1e-12 * (want.abs() + scale * base.abs() + shift.abs()));
        }
    }

    #[test]
    fn ltrc_csv_round_trips(sample in ltrc_sample(40), jitter in 0.0f64..1.0) {
        let obs: Vec<LtrcObservation> = sample
            .observations()
            .iter()
            .map(|o| LtrcObservation::new(o.y + jitter / 3.0, o.t, o.delta).unwrap())
            .collect();
        let parsed = parse_claims_str(&ltrc_to_csv(&obs), ClaimsFormat::LtrcTriples, None).unwrap();
        prop_assert_eq!(parsed.rows, obs.len());
        prop_assert_eq!(parsed.all_observations(), obs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bootstrap_shifts_with_the_data(sample in ltrc_sample(40), shift in -20i32..20, seed in any::<u64>()) {
        let ctx = EstimationContext::new(f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let spectra = [Spectrum::exponential(5.0).unwrap()];
        let plan = BootstrapPlan { replicates: 60, seed, ci_level: 0.9 };
        let base = &bootstrap_ci(&sample, &EstimatorKind::Prod, &spectra, &ctx, &plan).unwrap()[0];
        let moved_sample = sample.affine(1.0, f64::from(shift)).unwrap();
        let moved = &bootstrap_ci(&moved_sample, &EstimatorKind::Prod, &spectra, &ctx, &plan).unwrap()[0];
        let c = f64::from(shift);
        let tol = 1e-9 * (base.point.abs() + c.abs() + 1.0);
        prop_assert!((moved.point - base.point - c).abs() <= tol);
        prop_assert!((moved.ci_low.unwrap() - base.ci_low.unwrap() - c).abs() <= tol);
        prop_assert!((moved.ci_high.unwrap() - base.ci_high.unwrap() - c).abs() <= tol);
        prop_assert!((moved.std_error.unwrap() - base.std_error.unwrap()).abs() <= tol);
        prop_assert!(base.ci_low.unwrap() <= base.ci_high.unwrap());
    }

    #[test]
    fn variance_ignores_input_order(values in prop::collection::vec(0.5f64..50.0, 30..120), rotate in 0usize..30) {
        let s = Spectrum::exponential(5.0).unwrap();
        let plugin = VariancePlugin::default();
        let mut shuffled = values.clone();
        shuffled.rotate_left(rotate % values.len());
        shuffled.reverse();
        let a = estimate_sigma2(&LtrcSample::from_complete(&values).unwrap(), &s, &plugin);
        let b = estimate_sigma2(&LtrcSample::from_complete(&shuffled).unwrap(), &s, &plugin);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a.sigma2 - b.sigma2).abs() <= 1e-9 * a.sigma2.abs().max(1e-12)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "order changed the outcome: {:?} vs {:?}", a, b),
        }
    }
}

#[test]
fn variance_is_scale_homogeneous() {
    let mut rng = srm_ltrc::rng::stream_rng(11, 0);
    let values = common::random_complete(&mut rng, 400);
    let scaled: Vec<f64> = values.iter().map(|v| 4.0 * v).collect();
    let s = Spectrum::exponential(1.0).unwrap();
    let plugin = VariancePlugin::default();
    let a = estimate_sigma2(&LtrcSample::from_complete(&values).unwrap(), &s, &plugin).unwrap();
    let b = estimate_sigma2(&LtrcSample::from_complete(&scaled).unwrap(), &s, &plugin).unwrap();
    assert_relative_eq!(b.sigma2, 16.0 * a.sigma2, max_relative = 1e-9);
}

#[test]
fn identical_claims_give_a_degenerate_interval() {
    let sample = LtrcSample::from_complete(&[7.5; 25]).unwrap();
    let ctx = EstimationContext::new(f64::NEG_INFINITY, f64::INFINITY, 0.0);
    let spectra = [Spectrum::exponential(10.0).unwrap()];
    let plan = BootstrapPlan { replicates: 100, seed: 3, ci_level: 0.9 };
    let r = &bootstrap_ci(&sample, &EstimatorKind::Prod, &spectra, &ctx, &plan).unwrap()[0];
    assert_eq!((r.point, r.ci_low, r.ci_high), (7.5, Some(7.5), Some(7.5)));
}
