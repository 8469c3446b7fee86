//! Model-quality metrics and multi-model comparison reports.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::{KrigingModel, Prediction};
use crate::mfk::MfkModel;

/// Anything that can predict mean and variance at query points.
pub trait Surrogate {
    fn input_dim(&self) -> usize;
    fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction>;
}

impl Surrogate for KrigingModel {
    fn input_dim(&self) -> usize {
        self.training().dim()
    }

    fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction> {
        KrigingModel::predict(self, xq)
    }
}

impl Surrogate for MfkModel {
    fn input_dim(&self) -> usize {
        MfkModel::input_dim(self)
    }

    fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction> {
        MfkModel::predict(self, xq)
    }
}

/// Root-mean-square deviation between predictions and observations.
pub fn rmsd(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::shape(
            format!("{} observations", predicted.len()),
            format!("{}", observed.len()),
        ));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument(
            "RMSD of an empty sample is undefined".into(),
        ));
    }
    let sum_sq: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((sum_sq / predicted.len() as f64).sqrt())
}

/// Fraction of observations inside `mean ± z * sigma`.
pub fn interval_coverage(prediction: &Prediction, observed: &[f64], z: f64) -> Result<f64> {
    if prediction.mean.len() != observed.len() {
        return Err(Error::shape(
            format!("{} observations", prediction.mean.len()),
            format!("{}", observed.len()),
        ));
    }
    if !(z > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "z multiplier must be > 0, got {z}"
        )));
    }
    if observed.is_empty() {
        return Err(Error::InvalidArgument(
            "coverage of an empty sample is undefined".into(),
        ));
    }
    let hits = observed
        .iter()
        .enumerate()
        .filter(|(i, y)| {
            let half = z * prediction.variance[*i].max(0.0).sqrt();
            (*y - prediction.mean[*i]).abs() <= half
        })
        .count();
    Ok(hits as f64 / observed.len() as f64)
}

/// One row of an evaluation report.
#[derive(Debug, Clone, Serialize)]
pub struct ModelScore {
    pub rank: usize,
    pub id: String,
    pub rmsd: f64,
    pub coverage: f64,
    pub n_test: usize,
}

/// Metadata recorded alongside the scores.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub z: f64,
    pub test_label: String,
    pub split_seed: Option<u64>,
}

/// Ranked multi-model comparison on a shared test set.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub entries: Vec<ModelScore>,
    pub meta: ReportMeta,
}

impl EvalReport {
    pub fn with_split_seed(mut self, seed: u64) -> Self {
        self.meta.split_seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table, one row per model in rank order.
    pub fn to_table(&self) -> String {
        let id_width = self
            .entries
            .iter()
            .map(|e| e.id.len())
            .chain(["model".len()].into_iter())
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        out.push_str(&format!(
            "{:>4}  {:<id_width$}  {:>12}  {:>10}  {:>6}\n",
            "rank", "model", "rmsd", "coverage", "n"
        ));
        for e in &self.entries {
            out.push_str(&format!(
                "{:>4}  {:<id_width$}  {:>12.6}  {:>10.3}  {:>6}\n",
                e.rank, e.id, e.rmsd, e.coverage, e.n_test
            ));
        }
        out
    }
}

/// Evaluate every model on the same test set and rank by RMSD ascending
/// (ties by id). Model ids must be unique.
pub fn compare_models(
    models: &[(&str, &dyn Surrogate)],
    test: &Dataset,
    z: f64,
) -> Result<EvalReport> {
    if models.is_empty() {
        return Err(Error::InvalidArgument(
            "model list for comparison is empty".into(),
        ));
    }
    for (id, model) in models {
        if model.input_dim() != test.dim() {
            return Err(Error::shape(
                format!("model '{id}' of dimension {}", test.dim()),
                format!("dimension {}", model.input_dim()),
            ));
        }
    }

    let observed: Vec<f64> = test.y().iter().copied().collect();
    let mut entries = Vec::with_capacity(models.len());
    for (id, model) in models {
        let pred = model.predict(test.x())?;
        let score = rmsd(pred.mean.as_slice(), &observed)?;
        let cover = interval_coverage(&pred, &observed, z)?;
        entries.push(ModelScore {
            rank: 0,
            id: (*id).to_string(),
            rmsd: score,
            coverage: cover,
            n_test: test.n(),
        });
    }
    entries.sort_by(|a, b| {
        a.rmsd
            .partial_cmp(&b.rmsd)
            .expect("RMSD is never NaN")
            .then_with(|| a.id.cmp(&b.id))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }

    Ok(EvalReport {
        entries,
        meta: ReportMeta {
            z,
            test_label: test.label().to_string(),
            split_seed: None,
        },
    })
}
