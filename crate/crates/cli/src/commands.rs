use std::path::Path;

use ciu_core::render::{
    plot_beeswarm, plot_contrastive, plot_influence, plot_io, plot_pi, plot_surface,
    textual_explanation, BeeswarmStatistic, PiMode, PlotArtifact, TextualThresholds,
};
use ciu_core::{
    beeswarm_data, contrastive, explain, explain_target_concept, explain_voc, io_curve,
    io_surface, CiuResult, ContrastiveMode, TargetConcept, Vocabulary,
};
use serde::Serialize;

use crate::args::{Command, Common, InstanceArgs, ModeArg, PlotArg, ReportArgs, StatArg};
use crate::error::{usage, CliError, CliResult};
use crate::setup::{OutDir, Session};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Explain {
            common,
            instance,
            report,
        } => {
            let (s, inst, out) = open(&common, &instance)?;
            let outputs = s.outputs(&report.output_sel)?;
            let result = explain(&s.config, &s.handle, &inst, &outputs, None)?;
            finish_result(&s, result, &report, &out, common.strict)
        }
        Command::ExplainVoc {
            common,
            instance,
            report,
            vocabulary,
        } => {
            let (s, inst, out) = open(&common, &instance)?;
            let voc = load_vocabulary(&s, &vocabulary)?;
            let outputs = s.outputs(&report.output_sel)?;
            let result = explain_voc(&s.config, &s.handle, &inst, &voc, &outputs)?;
            finish_result(&s, result, &report, &out, common.strict)
        }
        Command::TargetConcept {
            common,
            instance,
            report,
            vocabulary,
            target_concept,
            target_ciu,
            children,
        } => {
            let (s, inst, out) = open(&common, &instance)?;
            let voc = load_vocabulary(&s, &vocabulary)?;
            let target = match &target_ciu {
                Some(path) => TargetConcept::from_result(&CiuResult::from_json(&read(path)?)?, &target_concept)?,
                None => {
                    let coalition = voc.get(&target_concept)?.clone();
                    let est = s.config.estimate(&s.handle, &inst, &coalition, &[])?;
                    TargetConcept::from_estimate(target_concept.clone(), coalition, &est)
                }
            };
            let children = children
                .iter()
                .map(|name| Ok((name.clone(), voc.get(name)?.clone())))
                .collect::<CliResult<Vec<_>>>()?;
            let children = (!children.is_empty()).then_some(children.as_slice());
            let outputs = s.outputs(&report.output_sel)?;
            let result = explain_target_concept(&s.config, &s.handle, &inst, children, &target, &outputs)?;
            finish_result(&s, result, &report, &out, common.strict)
        }
        Command::Contrastive {
            a,
            b,
            mode,
            title,
            out,
        } => {
            let ra = CiuResult::from_json(&read(&a)?)?;
            let rb = CiuResult::from_json(&read(&b)?)?;
            let mode = match mode {
                ModeArg::Asymmetric => ContrastiveMode::Asymmetric,
                ModeArg::Symmetric => ContrastiveMode::Symmetric,
            };
            let values = contrastive(&ra, &rb, mode)?;
            let out = OutDir::prepare(&out)?;
            #[derive(Serialize)]
            struct Doc<'a> {
                mode: &'a str,
                values: &'a [ciu_core::ContrastiveValue],
                metadata: &'a ciu_core::engine::ResultMetadata,
            }
            let doc = Doc {
                mode: match mode {
                    ContrastiveMode::Asymmetric => "asymmetric",
                    ContrastiveMode::Symmetric => "symmetric",
                },
                values: &values,
                metadata: &ra.metadata,
            };
            out.write("contrastive.json", &(to_json(&doc)? + "\n"))?;
            let plot = plot_contrastive(&values, title.as_deref())?.with_metadata(&ra.metadata)?;
            write_plot(&out, "contrastive-bar", &plot)?;
            for v in &values {
                println!("{}\t{}\t{:.6}", v.label, ra.output_names[v.output_index], v.phi);
            }
            Ok(())
        }
        Command::Beeswarm {
            common,
            output,
            statistic,
        } => {
            let s = Session::load(&common)?;
            let out = OutDir::prepare(&common.out)?;
            let output = s.output(&output)?;
            let data = s.dataset()?;
            let rows = beeswarm_data(&s.config, &s.handle, data, output, None)?;
            let mut csv = String::from("instance_id,label,ci,cu,influence,instability,normalized_value\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_field(&r.instance_id),
                    csv_field(&r.label),
                    r.ci,
                    r.cu,
                    r.influence,
                    r.instability_flag,
                    r.normalized_value.map(|v| v.to_string()).unwrap_or_default()
                ));
            }
            out.write("beeswarm.csv", &csv)?;
            let statistic = match statistic {
                StatArg::Ci => BeeswarmStatistic::Ci,
                StatArg::Cu => BeeswarmStatistic::Cu,
                StatArg::Influence => BeeswarmStatistic::Influence,
            };
            let plot = plot_beeswarm(&rows, statistic, s.config.neutral_cu)?.with_metadata(&s.metadata())?;
            write_plot(&out, "beeswarm", &plot)?;
            let unstable = rows.iter().filter(|r| r.instability_flag).count();
            report_instability(unstable, common.strict)
        }
        Command::Io {
            common,
            instance,
            feature,
            points,
            no_illustrate,
            output_sel,
        } => {
            let (s, inst, out) = open(&common, &instance)?;
            let feature = s.space().resolve(&feature)?;
            let outputs = s.outputs(&output_sel)?;
            let curve = io_curve(&s.config, &s.handle, &inst, feature, &outputs, points)?;
            let plot = plot_io(&curve, !no_illustrate)?.with_metadata(&s.metadata())?;
            write_plot(&out, "io", &plot)
        }
        Command::Surface {
            common,
            instance,
            features,
            points,
            output,
        } => {
            let (s, inst, out) = open(&common, &instance)?;
            let [fx, fy] = features.as_slice() else {
                return usage(format!("--features needs exactly two features, got {}", features.len()));
            };
            let pair = (s.space().resolve(fx)?, s.space().resolve(fy)?);
            let output = s.output(&output)?;
            let surface = io_surface(&s.config, &s.handle, &inst, pair, points, output)?;
            let plot = plot_surface(&surface)?.with_metadata(&s.metadata())?;
            write_plot(&out, "surface", &plot)
        }
    }
}

fn open(common: &Common, instance: &InstanceArgs) -> CliResult<(Session, ciu_core::Instance, OutDir)> {
    let s = Session::load(common)?;
    let inst = s.instance(instance)?;
    let out = OutDir::prepare(&common.out)?;
    Ok((s, inst, out))
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn load_vocabulary(s: &Session, path: &Path) -> CliResult<Vocabulary> {
    Ok(Vocabulary::from_json_str(&read(path)?, s.space())?)
}

fn write_plot(out: &OutDir, stem: &str, plot: &PlotArtifact) -> CliResult<()> {
    out.write(&format!("{stem}.json"), &plot.data.to_json()?)?;
    out.write(&format!("{stem}.svg"), &plot.svg)
}

fn report_instability(unstable: usize, strict: bool) -> CliResult<()> {
    if unstable == 0 {
        return Ok(());
    }
    eprintln!("warning: {unstable} row(s) flagged unstable");
    if strict {
        return Err(CliError::Unstable(unstable));
    }
    Ok(())
}

fn finish_result(
    s: &Session,
    mut result: CiuResult,
    report: &ReportArgs,
    out: &OutDir,
    strict: bool,
) -> CliResult<()> {
    result.metadata = s.metadata();
    out.write("result.json", &result.to_json()?)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    out.write("result.csv", &String::from_utf8_lossy(&csv))?;

    let mut outputs: Vec<usize> = result.rows.iter().map(|r| r.output_index).collect();
    outputs.dedup();
    for &o in &outputs {
        let suffix = if outputs.len() > 1 {
            format!("-{}", result.output_names[o])
        } else {
            String::new()
        };
        for plot in &report.plots {
            let (stem, artifact) = match plot {
                PlotArg::Influence => ("influence", plot_influence(&result, o)?),
                PlotArg::Pi => ("pi", plot_pi(&result, o, PiMode::Overlap)?),
                PlotArg::PiColor => ("pi-color", plot_pi(&result, o, PiMode::Color)?),
            };
            write_plot(out, &format!("{stem}{suffix}"), &artifact)?;
        }
    }

    let thresholds = TextualThresholds::default();
    let text = textual_explanation(&result, &thresholds, false)?;
    if report.text {
        out.write("explanation.txt", &text)?;
    }
    if report.markdown {
        out.write("explanation.md", &textual_explanation(&result, &thresholds, true)?)?;
    }
    print!("{text}");

    for r in result.rows.iter().filter(|r| r.instability_flag) {
        eprintln!(
            "warning: '{}' on output '{}' is unstable (ymin {}, ymax {}, out {})",
            r.label, r.output_name, r.ymin, r.ymax, r.out_value
        );
    }
    report_instability(result.rows.iter().filter(|r| r.instability_flag).count(), strict)
}
