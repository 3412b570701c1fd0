//! Engine behaviour checked against closed-form answers.

use ciu_core::minmax::DEFAULT_GRID_CAP;
use ciu_core::{
    beeswarm_data, ci_cu_from_minmax, exhaustive_minmax, explain, io_curve, io_surface,
    mean_output_utility, BuiltinModel, ClampPolicy, Coalition, Dataset, EngineConfig,
    FeatureSpace, FeatureSpec, Instance, OutputSpec, PredictorHandle, UtilityDirection,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_space(n: usize) -> FeatureSpace {
    FeatureSpace::new(
        (1..=n)
            .map(|i| FeatureSpec::numeric(format!("x{i}"), 0.0, 1.0).unwrap())
            .collect(),
    )
    .unwrap()
}

fn linear(w: &[f64]) -> PredictorHandle {
    PredictorHandle::builtin(BuiltinModel::linear(w.to_vec(), 0.0), vec![]).unwrap()
}

#[test]
fn ci_cu_from_observed_extremes() {
    // Linear oracle 0.5x1 + 0.5x2 at (0.3, 0.6), feature x2: y = 0.45, extremes 0.15 + {0, 0.5}.
    let y = 0.5 * 0.3 + 0.5 * 0.6;
    let (ymin, ymax) = (0.5 * 0.3, 0.5 * 0.3 + 0.5);
    let c = ci_cu_from_minmax(y, ymin, ymax, 0.0, 1.0, UtilityDirection::Increasing, ClampPolicy::ClampAndFlag)
        .unwrap();
    assert!((c.ci - 0.5).abs() < 1e-12);
    assert!((c.cu - 0.6).abs() < 1e-12);
}

#[test]
fn io_curve_on_linear_oracle() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let curve = io_curve(&cfg, &linear(&[0.5, 0.5]), &Instance::new(vec![0.3, 0.6]), 0, &[], 3).unwrap();
    assert_eq!(curve.axis.values, vec![0.0, 0.5, 1.0]);
    let expected = [0.30, 0.55, 0.80];
    for (got, want) in curve.outputs[0].y.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12);
    }
    // Instance point lies on the curve: linear interpolation between grid points.
    let o = &curve.outputs[0];
    let on_curve = o.y[0] + (o.y[1] - o.y[0]) * (0.3 / 0.5);
    assert!((o.out_value - on_curve).abs() < 1e-12);
    assert!((o.ymin - 0.30).abs() < 1e-12 && (o.ymax - 0.80).abs() < 1e-12);
}

#[test]
fn io_curve_categorical_has_one_point_per_category() {
    let space = FeatureSpace::new(vec![
        FeatureSpec::categorical("c", ["a", "b", "c"]).unwrap(),
        FeatureSpec::numeric("x", 0.0, 1.0).unwrap(),
    ])
    .unwrap();
    let cfg = EngineConfig::new(space, vec![OutputSpec::probability("y")]).unwrap();
    let h = linear(&[0.25, 0.5]);
    let curve = io_curve(&cfg, &h, &Instance::new(vec![1.0, 0.5]), 0, &[], 10).unwrap();
    assert_eq!(curve.outputs[0].y.len(), 3);
    // Numeric × categorical surface: points × categories.
    let s = io_surface(&cfg, &h, &Instance::new(vec![1.0, 0.5]), (1, 0), 4, 0).unwrap();
    assert_eq!(s.z.len(), 3);
    assert!(s.z.iter().all(|r| r.len() == 4));
}

#[test]
fn surfaces_show_additivity_and_interaction() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let inst = Instance::new(vec![0.3, 0.6]);
    let s = io_surface(&cfg, &linear(&[0.5, 0.5]), &inst, (0, 1), 5, 0).unwrap();
    for row in &s.z[1..] {
        let offset = row[0] - s.z[0][0];
        for (a, b) in row.iter().zip(&s.z[0]) {
            assert!((a - b - offset).abs() < 1e-12);
        }
    }
    let product = PredictorHandle::builtin(BuiltinModel::parse("product:0*1=1").unwrap(), vec![]).unwrap();
    let s = io_surface(&cfg, &product, &inst, (0, 1), 3, 0).unwrap();
    assert_eq!(s.z.len() * s.z[0].len(), 9);
    let corners = [s.z[0][0], s.z[0][2], s.z[2][0], s.z[2][2]];
    assert_eq!(corners, [0.0, 0.0, 0.0, 1.0]);
}

#[test]
fn disjoint_concepts_of_additive_model_sum_to_one() {
    let space = unit_space(4);
    let w = [0.1, 0.2, 0.3, 0.4];
    let h = linear(&w);
    let inst = Instance::new(vec![0.2, 0.4, 0.6, 0.8]);
    let a = Coalition::new([0, 2], &space).unwrap();
    let b = Coalition::new([1, 3], &space).unwrap();
    let ea = exhaustive_minmax(&h, &space, &inst, &a, 11, DEFAULT_GRID_CAP).unwrap();
    let eb = exhaustive_minmax(&h, &space, &inst, &b, 11, DEFAULT_GRID_CAP).unwrap();
    let total = (ea.ymax[0] - ea.ymin[0]) + (eb.ymax[0] - eb.ymin[0]);
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn decreasing_utility_mirrors_cu() {
    let space = unit_space(2);
    let inc = EngineConfig::new(space.clone(), vec![OutputSpec::probability("y")]).unwrap();
    let dec = EngineConfig::new(
        space,
        vec![OutputSpec::new("y", 0.0, 1.0, UtilityDirection::Decreasing).unwrap()],
    )
    .unwrap();
    let h = linear(&[0.5, 0.5]);
    let inst = Instance::new(vec![0.3, 0.6]);
    let a = explain(&inc, &h, &inst, &[], None).unwrap();
    let b = explain(&dec, &h, &inst, &[], None).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.ci, rb.ci);
        assert!((ra.cu + rb.cu - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mean_utility_neutral_centres_beeswarm_influence() {
    // Symmetric uniform dataset, linear model: mean influence per feature → 0.
    let space = unit_space(3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Instance> = (0..500)
        .map(|_| Instance::new((0..3).map(|_| rng.gen::<f64>()).collect()))
        .collect();
    let data = Dataset::new(space.clone(), rows).unwrap();
    let h = linear(&[0.2, 0.3, 0.5]);
    let cfg = EngineConfig::new(space, vec![OutputSpec::probability("y")]).unwrap();
    let neutral = mean_output_utility(&cfg, &h, &data, 0).unwrap();
    assert!((neutral - 0.5).abs() < 0.05);
    let cfg = cfg.with_neutral_cu(neutral).unwrap().with_samples(20).unwrap();
    let table = beeswarm_data(&cfg, &h, &data, 0, None).unwrap();
    assert_eq!(table.len(), 1500);
    for f in ["x1", "x2", "x3"] {
        let vals: Vec<f64> = table.iter().filter(|r| r.label == f).map(|r| r.influence).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 0.05, "{f}: {mean}");
    }
}

#[test]
fn beeswarm_streams_are_reproducible_and_distinct_per_instance() {
    let space = unit_space(2);
    let h = PredictorHandle::from_fn(2, vec!["y".into()], |x| vec![(x[0] * 7.0).sin().abs() * 0.5 + 0.5 * x[1]]).unwrap();
    let data = Dataset::new(
        space.clone(),
        vec![Instance::new(vec![0.4, 0.4]), Instance::new(vec![0.4, 0.4])],
    )
    .unwrap();
    let cfg = EngineConfig::new(space, vec![OutputSpec::probability("y")])
        .unwrap()
        .with_samples(5)
        .unwrap();
    let a = beeswarm_data(&cfg, &h, &data, 0, None).unwrap();
    let b = beeswarm_data(&cfg, &h, &data, 0, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    // Same instance values, different rows: separate random streams.
    let cis: Vec<f64> = a.iter().filter(|r| r.label == "x1").map(|r| r.ci).collect();
    assert_ne!(cis[0], cis[1]);
}
