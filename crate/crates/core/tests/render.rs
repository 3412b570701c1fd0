use ciu_core::render::{
    plot_beeswarm, plot_contrastive, plot_influence, plot_io, plot_pi, plot_surface, render_svg,
    textual_explanation, BeeswarmStatistic, PiMode, PlotArtifact, PlotData, PlotDocument, Style,
    TextualThresholds, PLOT_JSON_SCHEMA,
};
use ciu_core::{
    beeswarm_data, contrastive, explain, io_curve, io_surface, BeeswarmRow, BuiltinModel,
    CiuResult, ContrastiveMode, ContrastiveValue, Dataset, EngineConfig, FeatureSpace,
    FeatureSpec, Instance, OutputSpec, PredictorHandle,
};

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

fn oracle_result() -> CiuResult {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    explain(&cfg, &linear(&[0.5, 0.5]), &Instance::new(vec![0.3, 0.6]), &[], None).unwrap()
}

fn assert_schema_valid(art: &PlotArtifact) {
    let schema: serde_json::Value = serde_json::from_str(PLOT_JSON_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&art.data.to_json().unwrap()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{:?}: {errors:?}", art.kind);
}

fn round_trips(art: &PlotArtifact) {
    let back = PlotDocument::from_json(&art.data.to_json().unwrap()).unwrap();
    assert_eq!(back, art.data);
    assert_eq!(render_svg(&back, &Style::default()).unwrap(), art.svg);
}

fn all_artifacts() -> Vec<PlotArtifact> {
    let res = oracle_result();
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let h = linear(&[0.5, 0.5]);
    let inst = Instance::new(vec![0.3, 0.6]);
    let data = Dataset::new(
        unit_space(2),
        vec![Instance::new(vec![0.1, 0.9]), Instance::new(vec![0.7, 0.2])],
    )
    .unwrap();
    let swarm = beeswarm_data(&cfg, &h, &data, 0, None).unwrap();
    vec![
        plot_influence(&res, 0).unwrap(),
        plot_pi(&res, 0, PiMode::Overlap).unwrap(),
        plot_pi(&res, 0, PiMode::Color).unwrap(),
        plot_io(&io_curve(&cfg, &h, &inst, 0, &[], 3).unwrap(), true).unwrap(),
        plot_surface(&io_surface(&cfg, &h, &inst, (0, 1), 3, 0).unwrap()).unwrap(),
        plot_beeswarm(&swarm, BeeswarmStatistic::Influence, 0.5).unwrap(),
        plot_contrastive(&contrastive(&res, &res, ContrastiveMode::Asymmetric).unwrap(), Some("A vs B"))
            .unwrap(),
    ]
}

#[test]
fn every_document_validates_and_rerenders() {
    let arts = all_artifacts();
    assert_eq!(arts.len(), 7);
    for art in &arts {
        assert_schema_valid(art);
        round_trips(art);
        assert!(art.svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(art.svg.contains(&format!("data-kind=\"{}\"", art.kind.as_str())));
    }
    // Rendering twice is byte-identical.
    let again = all_artifacts();
    for (a, b) in arts.iter().zip(&again) {
        assert_eq!(a.svg, b.svg);
    }
}

#[test]
fn result_plots_embed_metadata() {
    let art = plot_influence(&oracle_result(), 0).unwrap();
    assert_eq!(art.data.metadata.as_ref().unwrap().seed, 42);
    assert!(art.svg.contains("<metadata>{&quot;seed&quot;:42"));
}

#[test]
fn influence_bars_sorted_by_magnitude_on_fixed_axis() {
    let art = plot_influence(&oracle_result(), 0).unwrap();
    let PlotData::InfluenceBar { axis, bars, .. } = &art.data.data else { panic!() };
    assert_eq!(*axis, (-0.5, 0.5));
    assert_eq!(bars[0].label, "x1");
    assert!((bars[0].value + 0.10).abs() < 1e-12);
    assert!((bars[1].value - 0.05).abs() < 1e-12);
    // Negative bars and positive bars get their fixed colours.
    assert!(art.svg.contains("fill=\"#d73027\""));
    assert!(art.svg.contains("fill=\"#1a9850\""));
}

#[test]
fn influence_ties_keep_feature_order() {
    let cfg = EngineConfig::new(unit_space(3), vec![OutputSpec::probability("y")]).unwrap();
    let res = explain(&cfg, &linear(&[0.25, 0.25, 0.25]), &Instance::new(vec![0.5, 0.5, 0.5]), &[], None).unwrap();
    let art = plot_influence(&res, 0).unwrap();
    let PlotData::InfluenceBar { bars, .. } = &art.data.data else { panic!() };
    let labels: Vec<&str> = bars.iter().map(|b| b.label.as_str()).collect();
    assert_eq!(labels, vec!["x1", "x2", "x3"]);
    assert!(bars.iter().all(|b| b.value == 0.0));
}

#[test]
fn pi_overlap_geometry() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let res = explain(&cfg, &linear(&[0.5, 0.5]), &Instance::new(vec![0.3, 1.0]), &[], None).unwrap();
    let art = plot_pi(&res, 0, PiMode::Overlap).unwrap();
    let PlotData::PiOverlap { bars, .. } = &art.data.data else { panic!() };
    let x1 = bars.iter().find(|b| b.label == "x1").unwrap();
    assert!((x1.transparent - 0.5).abs() < 1e-12);
    assert!((x1.solid - 0.15).abs() < 1e-12);
    let x2 = bars.iter().find(|b| b.label == "x2").unwrap();
    assert_eq!(x2.solid, x2.transparent);
    // Solid width in pixels is ci·cu of the drawable axis width.
    let style = Style::default();
    let axis_w = style.width - 60.0 - style.label_width;
    assert!(art.svg.contains(&format!("width=\"{:.2}\"", 0.15 * axis_w)));
    assert!(art.svg.contains("fill-opacity=\"0.25\""));
}

#[test]
fn pi_color_scale_runs_red_to_green() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let res = explain(&cfg, &linear(&[0.5, 0.5]), &Instance::new(vec![0.0, 1.0]), &[], None).unwrap();
    let art = plot_pi(&res, 0, PiMode::Color).unwrap();
    let PlotData::PiColor { bars, .. } = &art.data.data else { panic!() };
    assert_eq!(bars[0].color, "#d73027");
    assert_eq!(bars[1].color, "#1a9850");
}

#[test]
fn io_plot_lines_follow_the_flag() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let curve = io_curve(&cfg, &linear(&[0.5, 0.5]), &Instance::new(vec![0.3, 0.6]), 0, &[], 3).unwrap();
    let with = plot_io(&curve, true).unwrap();
    let without = plot_io(&curve, false).unwrap();
    let PlotData::IoPlot { series, .. } = &without.data.data else { panic!() };
    assert!(series[0].ymin.is_none() && series[0].neutral.is_none());
    let PlotData::IoPlot { series, .. } = &with.data.data else { panic!() };
    assert!((series[0].neutral.unwrap() - 0.55).abs() < 1e-12);
    assert!(with.svg.contains("stroke=\"#ff7f00\""));
    assert!(!without.svg.contains("stroke=\"#ff7f00\""));
}

#[test]
fn multi_output_io_plot_has_a_legend_entry_per_output() {
    let cfg = EngineConfig::new(
        unit_space(2),
        vec![OutputSpec::probability("No"), OutputSpec::probability("Yes")],
    )
    .unwrap();
    let h = PredictorHandle::from_fn(2, vec!["No".into(), "Yes".into()], |x| {
        let p = 0.5 * x[0] + 0.5 * x[1];
        vec![1.0 - p, p]
    })
    .unwrap();
    let curve = io_curve(&cfg, &h, &Instance::new(vec![0.3, 0.6]), 1, &[], 4).unwrap();
    let art = plot_io(&curve, false).unwrap();
    assert_eq!(art.svg.matches("<polyline").count(), 2);
    assert!(art.svg.contains(">No</text>") && art.svg.contains(">Yes</text>"));
}

#[test]
fn heatmap_corner_shading() {
    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let h = PredictorHandle::builtin(BuiltinModel::parse("product:0*1=1").unwrap(), vec![]).unwrap();
    let art = plot_surface(&io_surface(&cfg, &h, &Instance::new(vec![0.5, 0.5]), (0, 1), 3, 0).unwrap()).unwrap();
    // 9 cells from the lightest colour to the darkest, plus the colour bar.
    assert_eq!(art.svg.matches("fill=\"#08306b\"").count(), 2);
    let constant = PredictorHandle::from_fn(2, vec!["y".into()], |_| vec![0.4]).unwrap();
    let flat = plot_surface(&io_surface(&cfg, &constant, &Instance::new(vec![0.5, 0.5]), (0, 1), 3, 0).unwrap()).unwrap();
    let PlotData::HeatmapSurface { z, .. } = &flat.data.data else { panic!() };
    assert!(z.iter().flatten().all(|&v| v == 0.4));
}

fn swarm_row(id: usize, label: &str, v: f64) -> BeeswarmRow {
    BeeswarmRow {
        instance_id: id.to_string(),
        label: label.into(),
        ci: v,
        cu: v,
        influence: v - 0.5,
        instability_flag: false,
        normalized_value: Some(0.5),
    }
}

#[test]
fn beeswarm_lanes_and_stacking() {
    let rows: Vec<BeeswarmRow> = (0..2)
        .flat_map(|i| ["a", "b", "c"].map(|l| swarm_row(i, l, 0.3 + 0.1 * i as f64)))
        .collect();
    let art = plot_beeswarm(&rows, BeeswarmStatistic::Ci, 0.5).unwrap();
    let PlotData::Beeswarm { lanes, .. } = &art.data.data else { panic!() };
    assert_eq!(lanes.len(), 3);
    assert_eq!(lanes.iter().map(|l| l.dots.len()).sum::<usize>(), 6);
    assert_eq!(art.svg.matches("<circle").count(), 6);

    // Zero variance: every dot in one bin, distinct slots, no overlap.
    let same: Vec<BeeswarmRow> = (0..9).map(|i| swarm_row(i, "a", 0.42)).collect();
    let art = plot_beeswarm(&same, BeeswarmStatistic::Influence, 0.5).unwrap();
    let PlotData::Beeswarm { axis, lanes, .. } = &art.data.data else { panic!() };
    assert_eq!(*axis, (-0.5, 0.5));
    let mut slots: Vec<i32> = lanes[0].dots.iter().map(|d| d.slot).collect();
    slots.sort();
    assert_eq!(slots, (-4..=4).collect::<Vec<_>>());
    let circles: Vec<(f64, f64)> = art
        .svg
        .lines()
        .filter(|l| l.starts_with("<circle"))
        .map(|l| {
            let attr = |name: &str| -> f64 {
                let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
                l[start..].split('"').next().unwrap().parse().unwrap()
            };
            (attr("cy"), attr("r"))
        })
        .collect();
    let r = circles[0].1;
    let mut ys: Vec<f64> = circles.iter().map(|c| c.0).collect();
    ys.sort_by(f64::total_cmp);
    assert!(ys.windows(2).all(|w| w[1] - w[0] >= 2.0 * r - 0.02));
    assert!("median".parse::<BeeswarmStatistic>().is_err());
}

#[test]
fn contrastive_bar_geometry() {
    let v = |phi: f64| ContrastiveValue {
        label: "Basement".into(),
        output_index: 0,
        phi,
    };
    let art = plot_contrastive(&[v(0.14)], Some("Why is A better than B?")).unwrap();
    let PlotData::ContrastiveBar { axis, bars } = &art.data.data else { panic!() };
    assert_eq!(*axis, (-1.0, 1.0));
    assert_eq!(bars[0].value, 0.14);
    let style = Style::default();
    let half = (style.width - 60.0 - style.label_width) / 2.0;
    assert!(art.svg.contains(&format!("width=\"{:.2}\"", 0.14 * half)));
    let full = plot_contrastive(&[v(-1.0)], None).unwrap();
    assert!(full.svg.contains(&format!("x=\"{:.2}\" y=\"44.00\" width=\"{:.2}\"", style.label_width, half)));
    assert!(plot_contrastive(&[], None).is_err());
}

#[test]
fn empty_and_malformed_inputs_are_rejected() {
    let mut res = oracle_result();
    assert!(plot_influence(&res, 3).is_err());
    res.rows.clear();
    assert!(plot_pi(&res, 0, PiMode::Overlap).is_err());
    assert!(textual_explanation(&res, &TextualThresholds::default(), false).is_err());
    assert!(plot_beeswarm(&[], BeeswarmStatistic::Ci, 0.5).is_err());

    let mut doc = plot_surface(
        &io_surface(
            &EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap(),
            &linear(&[0.5, 0.5]),
            &Instance::new(vec![0.5, 0.5]),
            (0, 1),
            3,
            0,
        )
        .unwrap(),
    )
    .unwrap()
    .data;
    if let PlotData::HeatmapSurface { z, .. } = &mut doc.data {
        z.pop();
    }
    assert!(render_svg(&doc, &Style::default()).is_err());
}

#[test]
fn textual_explanation_phrasing() {
    let res = oracle_result();
    let plain = textual_explanation(&res, &TextualThresholds::default(), false).unwrap();
    assert!(plain.contains("is important (CI=0.50) and its value is rather unfavourable (CU=0.30)"));
    assert!(plain.contains("x1 (0.3)"));
    let md = textual_explanation(&res, &TextualThresholds::default(), true).unwrap();
    assert!(md.contains("**important**"));
    assert!(md.starts_with("### "));

    let cfg = EngineConfig::new(unit_space(2), vec![OutputSpec::probability("y")]).unwrap();
    let res = explain(&cfg, &linear(&[1.0, 0.0]), &Instance::new(vec![0.3, 0.6]), &[], None).unwrap();
    let text = textual_explanation(&res, &TextualThresholds::default(), false).unwrap();
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert!(lines[0].starts_with("- x1"));
    assert!(lines[1].contains("is not important (CI=0.00)"));
}
