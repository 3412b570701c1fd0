use std::sync::Arc;

use ciu_core::minmax::{linspace, DEFAULT_GRID_CAP};
use ciu_core::{
    exhaustive_minmax, explain, CiuResult, Coalition, EngineConfig, FeatureSpace, FeatureSpec,
    Instance, OutputSpec, PredictorHandle, UtilityDirection,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct LinearCase {
    weights: Vec<f64>,
    ranges: Vec<(f64, f64)>,
    instance: Vec<f64>,
}

fn linear_case() -> impl Strategy<Value = LinearCase> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![-5.0..-0.05f64, 0.05..5.0f64], n),
            prop::collection::vec((-10.0..10.0f64, 0.1..10.0f64), n),
            prop::collection::vec(0.0..=1.0f64, n),
        )
            .prop_map(|(weights, r, t)| {
                let ranges: Vec<(f64, f64)> = r.iter().map(|&(a, w)| (a, a + w)).collect();
                let instance = ranges.iter().zip(&t).map(|(&(a, b), &t)| a + t * (b - a)).collect();
                LinearCase {
                    weights,
                    ranges,
                    instance,
                }
            })
    })
}

fn space_of(ranges: &[(f64, f64)]) -> FeatureSpace {
    FeatureSpace::new(
        ranges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| FeatureSpec::numeric(format!("x{}", i + 1), a, b).unwrap())
            .collect(),
    )
    .unwrap()
}

fn linear_handle(w: &[f64]) -> PredictorHandle {
    let w = w.to_vec();
    PredictorHandle::from_fn(w.len(), vec!["y".into()], move |x| {
        vec![w.iter().zip(x).map(|(a, b)| a * b).sum()]
    })
    .unwrap()
}

fn linear_output(case: &LinearCase) -> OutputSpec {
    let lo: f64 = case.weights.iter().zip(&case.ranges).map(|(w, &(a, b))| (w * a).min(w * b)).sum();
    let hi: f64 = case.weights.iter().zip(&case.ranges).map(|(w, &(a, b))| (w * a).max(w * b)).sum();
    OutputSpec::new("y", lo, hi, UtilityDirection::Increasing).unwrap()
}

/// A bounded nonlinear model with interactions, parameterized by `p`.
fn wavy(p: [f64; 4]) -> PredictorHandle {
    PredictorHandle::from_fn(3, vec!["y".into()], move |x| {
        let v = 0.5 + 0.2 * (p[0] * x[0]).sin() + 0.15 * (p[1] * x[1] * x[2]).cos() + 0.1 * p[2] * x[2] - 0.05 * p[3];
        vec![v]
    })
    .unwrap()
}

fn unit_space(n: usize) -> FeatureSpace {
    space_of(&vec![(0.0, 1.0); n])
}

fn all_singletons_and_pairs(space: &FeatureSpace) -> Vec<(String, Coalition)> {
    let mut out = Vec::new();
    for i in 0..space.len() {
        out.push((format!("{i}"), Coalition::single(i, space).unwrap()));
        for j in i + 1..space.len() {
            out.push((format!("{i}{j}"), Coalition::new([i, j], space).unwrap()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_models_match_closed_form(case in linear_case(), seed in any::<u64>()) {
        let space = space_of(&case.ranges);
        let cfg = EngineConfig::new(space, vec![linear_output(&case)]).unwrap()
            .with_samples(8).unwrap()
            .with_seed(seed);
        let res = explain(&cfg, &linear_handle(&case.weights), &Instance::new(case.instance.clone()), &[], None).unwrap();
        let total: f64 = case.weights.iter().zip(&case.ranges).map(|(w, &(a, b))| w.abs() * (b - a)).sum();
        for (i, row) in res.rows.iter().enumerate() {
            let (a, b) = case.ranges[i];
            let w = case.weights[i];
            let ci = w.abs() * (b - a) / total;
            let t = (case.instance[i] - a) / (b - a);
            let cu = if w > 0.0 { t } else { 1.0 - t };
            prop_assert!((row.ci - ci).abs() < 1e-9, "ci {} vs {}", row.ci, ci);
            prop_assert!((row.cu - cu).abs() < 1e-9, "cu {} vs {}", row.cu, cu);
            prop_assert!(!row.instability_flag);
        }
    }

    #[test]
    fn rows_obey_identity_range_law_and_bracketing(
        p in prop::array::uniform4(-3.0..3.0f64),
        x in prop::collection::vec(0.0..=1.0f64, 3),
        cu_ref in 0.0..=1.0f64,
        n in 1usize..40,
        seed in any::<u64>(),
    ) {
        let space = unit_space(3);
        let coalitions = all_singletons_and_pairs(&space);
        let cfg = EngineConfig::new(space, vec![OutputSpec::new("y", -1.0, 2.0, UtilityDirection::Increasing).unwrap()])
            .unwrap()
            .with_neutral_cu(cu_ref).unwrap()
            .with_samples(n).unwrap()
            .with_seed(seed);
        let res = explain(&cfg, &wavy(p), &Instance::new(x), &[], Some(&coalitions)).unwrap();
        prop_assert_eq!(res.rows.len(), coalitions.len());
        for r in &res.rows {
            prop_assert_eq!(r.influence, r.ci * (r.cu - r.cu_ref_used));
            prop_assert!((0.0..=1.0).contains(&r.ci) && (0.0..=1.0).contains(&r.cu));
            prop_assert!(r.influence >= -r.cu_ref_used && r.influence <= 1.0 - r.cu_ref_used);
            prop_assert!(r.ymin <= r.out_value && r.out_value <= r.ymax);
        }
    }

    #[test]
    fn explanations_are_deterministic_and_round_trip(
        p in prop::array::uniform4(-3.0..3.0f64),
        x in prop::collection::vec(0.0..=1.0f64, 3),
        seed in any::<u64>(),
    ) {
        let cfg = EngineConfig::new(unit_space(3), vec![OutputSpec::probability("y")]).unwrap()
            .with_samples(25).unwrap()
            .with_seed(seed);
        let inst = Instance::new(x);
        let a = explain(&cfg, &wavy(p), &inst, &[], None).unwrap();
        let b = explain(&cfg, &wavy(p), &inst, &[], None).unwrap();
        prop_assert_eq!(&a, &b);
        let back = CiuResult::from_json(&a.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn affine_output_transform_preserves_ci_and_cu(
        p in prop::array::uniform4(-3.0..3.0f64),
        x in prop::collection::vec(0.0..=1.0f64, 3),
        seed in any::<u64>(),
    ) {
        let space = unit_space(3);
        let base = wavy(p);
        let inner = base.clone();
        let shifted = PredictorHandle::from_fn(3, vec!["y".into()], move |x| {
            inner.predict_one(x).unwrap().iter().map(|y| 3.0 * y + 7.0).collect()
        }).unwrap();
        let cfg = |lo: f64, hi: f64| {
            EngineConfig::new(space.clone(), vec![OutputSpec::new("y", lo, hi, UtilityDirection::Increasing).unwrap()])
                .unwrap().with_samples(30).unwrap().with_seed(seed)
        };
        let inst = Instance::new(x);
        let a = explain(&cfg(-1.0, 2.0), &base, &inst, &[], None).unwrap();
        let b = explain(&cfg(4.0, 13.0), &shifted, &inst, &[], None).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert!((ra.ci - rb.ci).abs() <= 1e-12);
            // The model rounds 3y + 7 itself, so CU over a tiny span is only
            // as accurate as that rounding allows.
            let span = ra.ymax - ra.ymin;
            let tol = if span >= 1e-2 { 1e-12 } else { 1e-12 + 8.0 * f64::EPSILON * 13.0 / (3.0 * span) };
            prop_assert!((ra.cu - rb.cu).abs() <= tol, "{} vs {} over span {}", ra.cu, rb.cu, span);
        }
    }

    #[test]
    fn exhaustive_extremes_grow_with_coalitions(
        p in prop::array::uniform4(-3.0..3.0f64),
        k in prop::collection::vec(0usize..9, 3),
    ) {
        let space = unit_space(3);
        let h = wavy(p);
        // Grid-aligned instance, so each smaller grid is a slice of the larger one.
        let grid = linspace(0.0, 1.0, 9);
        let inst = Instance::new(k.iter().map(|&i| grid[i]).collect());
        let est = |c: &[usize]| {
            exhaustive_minmax(&h, &space, &inst, &Coalition::new(c.iter().copied(), &space).unwrap(), 9, DEFAULT_GRID_CAP).unwrap()
        };
        let single = est(&[0]);
        let pair = est(&[0, 1]);
        let all = est(&[0, 1, 2]);
        prop_assert!(pair.ymin[0] <= single.ymin[0] && pair.ymax[0] >= single.ymax[0]);
        prop_assert!(all.ymin[0] <= pair.ymin[0] && all.ymax[0] >= pair.ymax[0]);
    }

    #[test]
    fn linspace_is_monotone_with_exact_endpoints(a in -100.0..100.0f64, w in 0.001..50.0f64, n in 2usize..200) {
        let v = linspace(a, a + w, n);
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], a);
        prop_assert_eq!(v[n - 1], a + w);
        prop_assert!(v.windows(2).all(|p| p[0] <= p[1]));
    }
}

#[test]
fn handles_share_state_across_clones() {
    let calls = Arc::new(std::sync::atomic::AtomicUsize::new(0));
    let c = Arc::clone(&calls);
    let h = PredictorHandle::from_fn(1, vec!["y".into()], move |x| {
        c.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        vec![x[0]]
    })
    .unwrap();
    let h2 = h.clone();
    h.predict(&[vec![0.5]]).unwrap();
    h2.predict(&[vec![0.5]]).unwrap();
    assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 2);
}
