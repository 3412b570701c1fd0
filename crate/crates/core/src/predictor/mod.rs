//! Black-box prediction behind a single batch interface.
//!
//! Every probe the engine makes goes through [`PredictorHandle::predict`],
//! one batch per coalition. A handle wraps one of three backends: a built-in
//! analytic model, an in-process closure, or an external process speaking the
//! line-delimited JSON protocol in [`protocol`].

mod builtin;
mod external;
pub mod protocol;

use std::fmt;
use std::sync::Arc;

pub use builtin::BuiltinModel;
pub use external::{spawn_external, ExternalModel, ExternalOptions};

use crate::error::{Error, Result};

/// In-process prediction function: one instance in, one output vector out.
pub type PredictFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    Function,
    ExternalProcess,
}

#[derive(Clone)]
enum Backend {
    Builtin(BuiltinModel),
    Function(PredictFn),
    External(Arc<ExternalModel>),
}

/// Cheap to clone; clones of an external handle share one process.
#[derive(Clone)]
pub struct PredictorHandle {
    output_names: Vec<String>,
    arity: usize,
    backend: Backend,
}

impl fmt::Debug for PredictorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredictorHandle")
            .field("output_names", &self.output_names)
            .field("arity", &self.arity)
            .field("backend", &self.backend_kind())
            .finish()
    }
}

impl PredictorHandle {
    /// Wrap a built-in model. `output_names` may be empty, in which case
    /// outputs are named `y`, `y2`, ...
    pub fn builtin(model: BuiltinModel, output_names: Vec<String>) -> Result<Self> {
        model.check()?;
        let output_names = default_names(output_names, model.n_outputs())?;
        Ok(PredictorHandle {
            arity: model.arity(),
            output_names,
            backend: Backend::Builtin(model),
        })
    }

    pub fn from_fn<F>(arity: usize, output_names: Vec<String>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if output_names.is_empty() {
            return Err(Error::InvalidConfig(
                "a predictor needs at least one output name".into(),
            ));
        }
        Ok(PredictorHandle {
            output_names,
            arity,
            backend: Backend::Function(Arc::new(f)),
        })
    }

    pub(crate) fn external(model: ExternalModel, arity: usize, output_names: Vec<String>) -> Self {
        PredictorHandle {
            output_names,
            arity,
            backend: Backend::External(Arc::new(model)),
        }
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn n_outputs(&self) -> usize {
        self.output_names.len()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Builtin(_) => BackendKind::Builtin,
            Backend::Function(_) => BackendKind::Function,
            Backend::External(_) => BackendKind::ExternalProcess,
        }
    }

    /// Evaluate a batch of encoded instances. Returns one row of
    /// `n_outputs()` finite values per input row.
    pub fn predict(&self, batch: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if batch.is_empty() {
            return Err(Error::Model {
                row: None,
                message: "empty batch".into(),
            });
        }
        for (i, row) in batch.iter().enumerate() {
            if row.len() != self.arity {
                return Err(Error::Model {
                    row: Some(i),
                    message: format!("row has {} cells, model arity is {}", row.len(), self.arity),
                });
            }
        }
        let out = match &self.backend {
            Backend::Builtin(m) => batch
                .iter()
                .enumerate()
                .map(|(i, r)| m.eval(r).map_err(|message| Error::Model { row: Some(i), message }))
                .collect::<Result<Vec<_>>>()?,
            Backend::Function(f) => batch.iter().map(|r| f(r)).collect(),
            Backend::External(ext) => ext.predict(batch)?,
        };
        if out.len() != batch.len() {
            return Err(Error::Protocol(format!(
                "model returned {} rows for a batch of {}",
                out.len(),
                batch.len()
            )));
        }
        for (i, row) in out.iter().enumerate() {
            if row.len() != self.n_outputs() {
                return Err(Error::Model {
                    row: Some(i),
                    message: format!(
                        "expected {} outputs, got {}",
                        self.n_outputs(),
                        row.len()
                    ),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Model {
                    row: Some(i),
                    message: format!("non-finite output {v}"),
                });
            }
        }
        Ok(out)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.predict(&[x.to_vec()])?;
        Ok(out.remove(0))
    }
}

fn default_names(names: Vec<String>, n: usize) -> Result<Vec<String>> {
    if names.is_empty() {
        return Ok((1..=n)
            .map(|i| if i == 1 { "y".to_string() } else { format!("y{i}") })
            .collect());
    }
    if names.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} output names given but the model has {n} outputs",
            names.len()
        )));
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_dot_product() {
        let h = PredictorHandle::builtin(BuiltinModel::linear(vec![0.5, 0.5], 0.0), vec![]).unwrap();
        assert_eq!(h.predict(&[vec![0.3, 0.6]]).unwrap(), vec![vec![0.5 * 0.3 + 0.5 * 0.6]]);
        assert_eq!(h.output_names(), &["y".to_string()]);
    }

    #[test]
    fn logistic_of_zero_is_half() {
        let h =
            PredictorHandle::builtin(BuiltinModel::logistic(vec![0.0, 0.0], 0.0), vec![]).unwrap();
        let y = h.predict(&[vec![3.0, -7.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(y, vec![vec![0.5], vec![0.5]]);
    }

    #[test]
    fn batch_equals_single_rows() {
        let h = PredictorHandle::builtin(
            BuiltinModel::ProductInteraction {
                pairs: vec![(0, 1, 2.0)],
                weights: vec![0.1, -0.3, 0.7],
                bias: 0.25,
            },
            vec![],
        )
        .unwrap();
        let batch: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![i as f64 * 0.1, 1.0 - i as f64 * 0.13, (i * i) as f64 * 0.01])
            .collect();
        let whole = h.predict(&batch).unwrap();
        for (row, expected) in batch.iter().zip(&whole) {
            assert_eq!(&h.predict_one(row).unwrap(), expected);
        }
    }

    #[test]
    fn non_finite_output_is_an_error_with_row() {
        let h = PredictorHandle::from_fn(1, vec!["y".into()], |x| vec![1.0 / x[0]]).unwrap();
        let err = h.predict(&[vec![1.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::Model { row: Some(1), .. }), "{err}");
    }

    #[test]
    fn arity_and_empty_batch_rejected() {
        let h = PredictorHandle::builtin(BuiltinModel::linear(vec![1.0], 0.0), vec![]).unwrap();
        assert!(h.predict(&[]).is_err());
        assert!(matches!(
            h.predict(&[vec![1.0], vec![1.0, 2.0]]),
            Err(Error::Model { row: Some(1), .. })
        ));
    }

    #[test]
    fn output_name_count_must_match() {
        assert!(PredictorHandle::builtin(
            BuiltinModel::linear(vec![1.0], 0.0),
            vec!["a".into(), "b".into()]
        )
        .is_err());
    }
}
