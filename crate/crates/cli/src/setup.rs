//! Turning flags into a feature space, a model handle and an engine config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ciu_core::engine::ResultMetadata;
use ciu_core::{
    derive_output_spec, ingest_csv, mean_output_utility, spawn_external, BuiltinModel, ClampPolicy,
    CsvOptions, Dataset, EngineConfig, ExternalOptions, FeatureSpace, FeatureSpec, Instance,
    OutputSpec, PredictorHandle, UtilityDirection,
};

use crate::args::{ClampArg, Common, DirectionArg, InstanceArgs, OutArgs};
use crate::error::{usage, CliError, CliResult};

pub struct Session {
    pub dataset: Option<Dataset>,
    pub handle: PredictorHandle,
    pub config: EngineConfig,
    pub model: String,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{what}: '{s}' is not a finite number")))
}

fn parse_pair(s: &str, what: &str) -> CliResult<(f64, f64)> {
    let Some((lo, hi)) = s.split_once(',') else {
        return usage(format!("{what}: expected 'lo,hi', got '{s}'"));
    };
    Ok((parse_f64(lo, what)?, parse_f64(hi, what)?))
}

/// `name=lo,hi` flags, in the order given.
fn parse_ranges(flags: &[String]) -> CliResult<Vec<(String, (f64, f64))>> {
    flags
        .iter()
        .map(|f| {
            let Some((name, pair)) = f.split_once('=') else {
                return usage(format!("--range: expected 'name=lo,hi', got '{f}'"));
            };
            Ok((name.trim().to_string(), parse_pair(pair, "--range")?))
        })
        .collect()
}

fn parse_categories(flags: &[String]) -> BTreeMap<String, Option<Vec<String>>> {
    flags
        .iter()
        .map(|f| match f.split_once('=') {
            Some((name, labels)) => (
                name.trim().to_string(),
                Some(labels.split(',').map(|l| l.trim().to_string()).collect()),
            ),
            None => (f.trim().to_string(), None),
        })
        .collect()
}

fn load_space(common: &Common) -> CliResult<(FeatureSpace, Option<Dataset>, Option<Vec<f64>>)> {
    let ranges = parse_ranges(&common.ranges)?;
    if let Some(path) = &common.data {
        let opts = CsvOptions {
            header: !common.no_header,
            category_columns: parse_categories(&common.categories),
            id_column: common.id_column.clone(),
            ranges: ranges.into_iter().collect(),
        };
        let mut data = ingest_csv(path, &opts)?;
        for o in &data.overrides {
            eprintln!("note: {o}");
        }
        let mut targets = None;
        if let Some(col) = &common.target_column {
            let (rest, t) = data.split_off_column(col)?;
            data = rest;
            targets = Some(t);
        }
        return Ok((data.space.clone(), Some(data), targets));
    }
    if common.target_column.is_some() {
        return usage("--target-column needs --data");
    }
    if let Some(path) = &common.space {
        let space: FeatureSpace = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let space = space.with_ranges(&ranges.into_iter().collect())?;
        return Ok((space, None, None));
    }
    if ranges.is_empty() {
        return usage(
            "feature ranges are required: pass --data, --space, or --range name=lo,hi for every feature",
        );
    }
    if !common.categories.is_empty() {
        return usage("--category needs --data or --space");
    }
    let features = ranges
        .into_iter()
        .map(|(name, (lo, hi))| FeatureSpec::numeric(name, lo, hi))
        .collect::<ciu_core::Result<Vec<_>>>()?;
    Ok((FeatureSpace::new(features)?, None, None))
}

fn load_model(common: &Common, space: &FeatureSpace) -> CliResult<PredictorHandle> {
    if let Some(cmdline) = common.model.strip_prefix("exec:") {
        let Some(mut parts) = shlex::split(cmdline).filter(|p| !p.is_empty()) else {
            return usage(format!("--model: cannot parse command line '{cmdline}'"));
        };
        let cmd = parts.remove(0);
        let secs = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(Duration::from_secs_f64(v))
            } else {
                usage(format!("{what} must be a positive number of seconds"))
            }
        };
        let opts = ExternalOptions {
            handshake_timeout: secs(common.handshake_timeout, "--handshake-timeout")?,
            predict_timeout: secs(common.predict_timeout, "--predict-timeout")?,
        };
        return Ok(spawn_external(&cmd, &parts, space, &common.outputs, &opts)?);
    }
    let model = BuiltinModel::parse(&common.model)?;
    model.check_space(space)?;
    Ok(PredictorHandle::builtin(model, common.outputs.clone())?)
}

/// One value per output, or a single value shared by all.
fn per_output<T: Clone>(values: &[T], n: usize, flag: &str) -> CliResult<Option<Vec<T>>> {
    match values.len() {
        0 => Ok(None),
        1 => Ok(Some(vec![values[0].clone(); n])),
        k if k == n => Ok(Some(values.to_vec())),
        k => usage(format!("{flag} given {k} times for {n} outputs")),
    }
}

fn output_specs(
    common: &Common,
    handle: &PredictorHandle,
    targets: Option<&[f64]>,
) -> CliResult<Vec<OutputSpec>> {
    let n = handle.n_outputs();
    let names = handle.output_names();
    let directions: Vec<UtilityDirection> = per_output(&common.direction, n, "--direction")?
        .unwrap_or_else(|| vec![DirectionArg::Increasing; n])
        .into_iter()
        .map(|d| match d {
            DirectionArg::Increasing => UtilityDirection::Increasing,
            DirectionArg::Decreasing => UtilityDirection::Decreasing,
        })
        .collect();
    let ranges = common
        .out_ranges
        .iter()
        .map(|r| parse_pair(r, "--out-range"))
        .collect::<CliResult<Vec<_>>>()?;
    match per_output(&ranges, n, "--out-range")? {
        Some(ranges) => names
            .iter()
            .zip(ranges)
            .zip(directions)
            .map(|((name, (lo, hi)), d)| Ok(OutputSpec::new(name.clone(), lo, hi, d)?))
            .collect(),
        None => match targets {
            Some(t) if n == 1 => Ok(vec![derive_output_spec(t, names[0].clone(), directions[0])?]),
            Some(_) => usage("--target-column can only set the range of a single-output model; use --out-range"),
            None => names
                .iter()
                .zip(directions)
                .map(|(name, d)| Ok(OutputSpec::new(name.clone(), 0.0, 1.0, d)?))
                .collect(),
        },
    }
}

impl Session {
    pub fn load(common: &Common) -> CliResult<Self> {
        let (space, dataset, targets) = load_space(common)?;
        let handle = load_model(common, &space)?;
        let outputs = output_specs(common, &handle, targets.as_deref())?;
        let config = EngineConfig::new(space, outputs)?
            .with_samples(common.samples)?
            .with_seed(common.seed)
            .with_clamp_policy(match common.clamp_policy {
                ClampArg::ClampAndFlag => ClampPolicy::ClampAndFlag,
                ClampArg::Error => ClampPolicy::Error,
            });
        let mut session = Session {
            dataset,
            handle,
            config,
            model: common.model.clone(),
        };
        session.set_neutral(&common.neutral_cu)?;
        Ok(session)
    }

    fn set_neutral(&mut self, flag: &str) -> CliResult<()> {
        let value = if flag == "mean-output" {
            let Some(data) = &self.dataset else {
                return usage("--neutral-cu mean-output needs --data");
            };
            let v = mean_output_utility(&self.config, &self.handle, data, 0)?;
            eprintln!("note: neutral CU set to mean output utility {v:.6}");
            v
        } else {
            parse_f64(flag, "--neutral-cu")?
        };
        self.config = self.config.clone().with_neutral_cu(value)?;
        Ok(())
    }

    pub fn metadata(&self) -> ResultMetadata {
        ResultMetadata {
            model: Some(self.model.clone()),
            ..self.config.metadata()
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.config.space
    }

    pub fn dataset(&self) -> CliResult<&Dataset> {
        self.dataset
            .as_ref()
            .ok_or_else(|| CliError::Usage("this command needs --data".into()))
    }

    /// Resolve output names or indices; empty means all.
    pub fn outputs(&self, sel: &[String]) -> CliResult<Vec<usize>> {
        sel.iter().map(|s| self.output(s)).collect()
    }

    pub fn output(&self, key: &str) -> CliResult<usize> {
        let names = self.handle.output_names();
        if let Some(i) = names.iter().position(|n| n == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < names.len() => Ok(i),
            _ => usage(format!(
                "unknown output '{key}' (available: {})",
                names.join(", ")
            )),
        }
    }

    pub fn instance(&self, args: &InstanceArgs) -> CliResult<Instance> {
        let space = self.space();
        let inst = if let Some(k) = args.instance {
            let data = self.dataset()?;
            data.rows.get(k).cloned().ok_or_else(|| {
                CliError::Usage(format!("--instance {k} out of range for {} rows", data.len()))
            })?
        } else if let Some(values) = &args.instance_values {
            let cells: Vec<&str> = values.split(',').map(str::trim).collect();
            space.parse_instance(&cells)?
        } else if let Some(path) = &args.instance_file {
            instance_from_file(space, path)?
        } else {
            return usage("an instance is required: --instance, --instance-values or --instance-file");
        };
        let report = ciu_core::validate_instance(space, &inst)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        Ok(inst)
    }
}

fn json_cell(v: &serde_json::Value) -> CliResult<String> {
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => usage(format!("instance cell {other} must be a number or a label")),
    }
}

fn instance_from_file(space: &FeatureSpace, path: &Path) -> CliResult<Instance> {
    let text = read(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let cells: Vec<String> = if is_json {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        match value {
            serde_json::Value::Array(items) => items.iter().map(json_cell).collect::<CliResult<_>>()?,
            serde_json::Value::Object(map) => space
                .names()
                .map(|n| {
                    map.get(n)
                        .ok_or_else(|| CliError::Usage(format!("instance file has no value for '{n}'")))
                        .and_then(json_cell)
                })
                .collect::<CliResult<_>>()?,
            _ => return usage("instance JSON must be an array or an object"),
        }
    } else {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr
            .headers()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            .clone();
        let Some(row) = rdr.records().next() else {
            return usage(format!("{}: no instance row", path.display()));
        };
        let row = row.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        space
            .names()
            .map(|n| {
                header
                    .iter()
                    .position(|h| h == n)
                    .and_then(|i| row.get(i))
                    .map(str::to_string)
                    .ok_or_else(|| CliError::Usage(format!("instance file has no column '{n}'")))
            })
            .collect::<CliResult<_>>()?
    };
    Ok(space.parse_instance(&cells)?)
}

/// A timestamp-free output directory that refuses to clobber without `--force`.
pub struct OutDir {
    pub path: PathBuf,
}

impl OutDir {
    pub fn prepare(args: &OutArgs) -> CliResult<Self> {
        let path = args.out.clone();
        if path.exists() {
            let non_empty = std::fs::read_dir(&path)
                .map_err(|e| CliError::io(&path, e))?
                .next()
                .is_some();
            if non_empty && !args.force {
                return usage(format!(
                    "output directory {} is not empty; pass --force to overwrite",
                    path.display()
                ));
            }
        }
        std::fs::create_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(OutDir { path })
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let p = self.path.join(name);
        std::fs::write(&p, contents).map_err(|e| CliError::io(&p, e))
    }
}
