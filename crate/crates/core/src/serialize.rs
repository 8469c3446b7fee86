//! Self-describing JSON model documents.
//!
//! Documents store the kernel (family, theta, optional PLS projection), the
//! nugget, the fitted scalars, and the full training data. Factorizations and
//! GLS coefficients are recomputed on load, so a load immediately followed by
//! prediction reproduces the saving model bit-for-bit: floats round-trip
//! exactly through shortest-representation decimals. Format tags:
//! `kriging/1` for single-fidelity models, `mfk/1` for multi-fidelity stacks.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::Surrogate;
use crate::gp::{KrigingModel, Prediction};
use crate::kernels::{KernelConfig, KernelFamily};
use crate::mfk::{rebuild_mfk, MfkModel, MfkVariant, NestingReport};
use crate::pls::PlsProjection;

pub const KRIGING_FORMAT: &str = "kriging/1";
pub const MFK_FORMAT: &str = "mfk/1";

#[derive(Serialize, Deserialize)]
struct ProjectionDto {
    /// Row-major `d x h` weight matrix.
    weights: Vec<Vec<f64>>,
    x_means: Vec<f64>,
    y_mean: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelDto {
    family: KernelFamily,
    theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<ProjectionDto>,
}

#[derive(Serialize, Deserialize)]
struct DatasetDto {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    fidelity: u32,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct KrigingDto {
    format: String,
    kernel: KernelDto,
    sigma2: f64,
    nugget: f64,
    mu: f64,
    log_likelihood: f64,
    warnings: Vec<String>,
    training: DatasetDto,
}

#[derive(Serialize, Deserialize)]
struct LevelDto {
    kernel: KernelDto,
    nugget: f64,
    sigma2: f64,
    /// GLS trend coefficients: `[mu]` at the bottom, `[rho, mu_delta]` above.
    beta: Vec<f64>,
    log_likelihood: f64,
    training: DatasetDto,
}

#[derive(Serialize, Deserialize)]
struct NestingDto {
    satisfied: bool,
    missing_points: Vec<Vec<f64>>,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct MfkDto {
    format: String,
    variant: String,
    rho: Vec<f64>,
    strict_nesting: bool,
    nesting: Vec<NestingDto>,
    warnings: Vec<String>,
    levels: Vec<LevelDto>,
}

fn kernel_to_dto(kernel: &KernelConfig) -> KernelDto {
    KernelDto {
        family: kernel.family(),
        theta: kernel.theta().to_vec(),
        projection: kernel.projection().map(|p| ProjectionDto {
            weights: (0..p.input_dim())
                .map(|l| (0..p.n_components()).map(|k| p.weights()[(l, k)]).collect())
                .collect(),
            x_means: p.x_means().to_vec(),
            y_mean: p.y_mean(),
        }),
    }
}

fn kernel_from_dto(dto: KernelDto) -> Result<KernelConfig> {
    match dto.projection {
        None => KernelConfig::new(dto.family, dto.theta),
        Some(p) => {
            let d = p.weights.len();
            if d == 0 || p.weights.iter().any(|row| row.len() != p.weights[0].len()) {
                return Err(Error::ModelFormat("ragged projection weights".into()));
            }
            let h = p.weights[0].len();
            let weights = DMatrix::from_fn(d, h, |i, j| p.weights[i][j]);
            let projection = PlsProjection::from_parts(weights, p.x_means, p.y_mean)?;
            KernelConfig::with_projection(dto.family, dto.theta, projection)
        }
    }
}

fn dataset_to_dto(data: &Dataset) -> DatasetDto {
    DatasetDto {
        x: (0..data.n()).map(|i| data.point(i)).collect(),
        y: data.y().iter().copied().collect(),
        fidelity: data.fidelity(),
        label: data.label().to_string(),
    }
}

fn dataset_from_dto(dto: DatasetDto) -> Result<Dataset> {
    Dataset::from_rows(&dto.x, &dto.y, dto.fidelity, dto.label)
}

/// Either kind of fitted model, as read back from disk.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Kriging(KrigingModel),
    Mfk(MfkModel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Kriging(_) => "kriging",
            AnyModel::Mfk(m) => m.variant().name(),
        }
    }
}

impl Surrogate for AnyModel {
    fn input_dim(&self) -> usize {
        match self {
            AnyModel::Kriging(m) => m.training().dim(),
            AnyModel::Mfk(m) => m.input_dim(),
        }
    }

    fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction> {
        match self {
            AnyModel::Kriging(m) => m.predict(xq),
            AnyModel::Mfk(m) => m.predict(xq),
        }
    }
}

/// Serialize a single-fidelity model to pretty JSON.
pub fn kriging_to_json(model: &KrigingModel) -> String {
    let dto = KrigingDto {
        format: KRIGING_FORMAT.to_string(),
        kernel: kernel_to_dto(&model.params().kernel),
        sigma2: model.params().sigma2,
        nugget: model.params().nugget,
        mu: model.params().mu,
        log_likelihood: model.log_likelihood(),
        warnings: model.warnings().to_vec(),
        training: dataset_to_dto(model.training()),
    };
    let mut s = serde_json::to_string_pretty(&dto).expect("model serializes");
    s.push('\n');
    s
}

/// Serialize a multi-fidelity stack to pretty JSON.
pub fn mfk_to_json(model: &MfkModel) -> String {
    let dto = MfkDto {
        format: MFK_FORMAT.to_string(),
        variant: model.variant().name().to_string(),
        rho: model.rho().to_vec(),
        strict_nesting: model.strict_nesting(),
        nesting: model
            .nesting_reports()
            .iter()
            .map(|r| NestingDto {
                satisfied: r.satisfied,
                missing_points: r.missing_points.clone(),
                tolerance: r.tolerance,
            })
            .collect(),
        warnings: model.warnings().to_vec(),
        levels: model
            .levels()
            .iter()
            .map(|lv| LevelDto {
                kernel: kernel_to_dto(lv.kernel()),
                nugget: lv.nugget(),
                sigma2: lv.sigma2(),
                beta: lv.beta(),
                log_likelihood: lv.log_likelihood(),
                training: dataset_to_dto(lv.training()),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&dto).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_to_json(model: &AnyModel) -> String {
    match model {
        AnyModel::Kriging(m) => kriging_to_json(m),
        AnyModel::Mfk(m) => mfk_to_json(m),
    }
}

pub fn save_kriging(path: impl AsRef<Path>, model: &KrigingModel) -> Result<()> {
    std::fs::write(path, kriging_to_json(model))?;
    Ok(())
}

pub fn save_mfk(path: impl AsRef<Path>, model: &MfkModel) -> Result<()> {
    std::fs::write(path, mfk_to_json(model))?;
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, model: &AnyModel) -> Result<()> {
    std::fs::write(path, model_to_json(model))?;
    Ok(())
}

/// Parse a model document, recomputing every factorization.
pub fn model_from_json(text: &str) -> Result<AnyModel> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::ModelFormat(format!("not valid JSON: {e}")))?;
    let format = value
        .get("format")
        .and_then(|f| f.as_str())
        .ok_or_else(|| Error::ModelFormat("missing 'format' field".into()))?;
    match format {
        KRIGING_FORMAT => {
            let dto: KrigingDto = serde_json::from_value(value)
                .map_err(|e| Error::ModelFormat(format!("bad kriging document: {e}")))?;
            let training = dataset_from_dto(dto.training)?;
            let kernel = kernel_from_dto(dto.kernel)?;
            let mut model = KrigingModel::with_hyperparameters(training, kernel, dto.nugget)?;
            model.push_warnings(dto.warnings);
            Ok(AnyModel::Kriging(model))
        }
        MFK_FORMAT => {
            let dto: MfkDto = serde_json::from_value(value)
                .map_err(|e| Error::ModelFormat(format!("bad mfk document: {e}")))?;
            let variant: MfkVariant = dto.variant.parse()?;
            let parts = dto
                .levels
                .into_iter()
                .map(|lv| {
                    Ok((
                        dataset_from_dto(lv.training)?,
                        kernel_from_dto(lv.kernel)?,
                        lv.nugget,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let nesting = dto
                .nesting
                .into_iter()
                .map(|n| NestingReport {
                    satisfied: n.satisfied,
                    missing_points: n.missing_points,
                    tolerance: n.tolerance,
                })
                .collect();
            let model = rebuild_mfk(parts, variant, nesting, dto.strict_nesting, dto.warnings)?;
            Ok(AnyModel::Mfk(model))
        }
        other => Err(Error::ModelFormat(format!(
            "unsupported format tag '{other}'"
        ))),
    }
}

/// Load a model document from disk.
pub fn load_model(path: impl AsRef<Path>) -> Result<AnyModel> {
    let text = std::fs::read_to_string(path.as_ref())?;
    model_from_json(&text)
}
