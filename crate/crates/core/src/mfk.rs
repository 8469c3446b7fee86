//! Recursive multi-fidelity co-kriging.
//!
//! Level 1 is ordinary Kriging on the cheapest data. Every level above it
//! fits a GP whose trend basis is `[m_prev(x), 1]`, where `m_prev` is the
//! posterior mean of the stack below: the GLS coefficient on the first column
//! is the scale factor `rho`, the constant is the discrepancy mean, and the
//! GP residual is the discrepancy process. Prediction recurses
//!
//! ```text
//! mean_i(x) = rho_{i-1} * mean_{i-1}(x) + mean_delta_i(x)
//! var_i(x)  = rho_{i-1}^2 * var_{i-1}(x) + var_delta_i(x)
//! ```
//!
//! with the lower level and the discrepancy treated as independent.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::{
    expanded_start, fit_gp, fit_gp_with_starts, GpFactor, Prediction, SearchConfig,
};
use crate::kernels::{kernel_matrix, KernelConfig, KernelFamily};
use crate::pls::pls_fit;

/// Which multi-fidelity flavor to fit.
///
/// `MfkPls` projects the top-level kernel onto PLS components (elsewhere also
/// written "MFK-KPLS"); `MfkPlsk` additionally expands the projected solution
/// back to full dimension and re-optimizes from that start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfkVariant {
    Mfk,
    MfkPls,
    MfkPlsk,
}

impl MfkVariant {
    pub fn name(self) -> &'static str {
        match self {
            MfkVariant::Mfk => "mfk",
            MfkVariant::MfkPls => "mfk-pls",
            MfkVariant::MfkPlsk => "mfk-plsk",
        }
    }
}

impl std::str::FromStr for MfkVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mfk" => Ok(MfkVariant::Mfk),
            "mfk-pls" | "mfk-kpls" => Ok(MfkVariant::MfkPls),
            "mfk-plsk" => Ok(MfkVariant::MfkPlsk),
            other => Err(Error::InvalidArgument(format!(
                "unknown multi-fidelity variant '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for MfkVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How to treat higher-fidelity points that are absent from the design below.
#[derive(Debug, Clone, Copy)]
pub struct NestingPolicy {
    /// Error out on a violation instead of evaluating the lower-level
    /// posterior mean at the missing points.
    pub strict: bool,
    /// Max-norm tolerance for point matching.
    pub tol: f64,
}

impl Default for NestingPolicy {
    fn default() -> Self {
        NestingPolicy {
            strict: true,
            tol: 1e-9,
        }
    }
}

/// Result of checking one design pair for nesting.
#[derive(Debug, Clone)]
pub struct NestingReport {
    pub satisfied: bool,
    pub missing_points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl std::fmt::Display for NestingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.satisfied {
            return write!(
                f,
                "nested design (tolerance {:e} in max-norm)",
                self.tolerance
            );
        }
        write!(
            f,
            "{} higher-fidelity point(s) missing from the lower design (tolerance {:e}):",
            self.missing_points.len(),
            self.tolerance
        )?;
        for p in self.missing_points.iter().take(8) {
            write!(f, " {p:?}")?;
        }
        if self.missing_points.len() > 8 {
            write!(f, " ...")?;
        }
        Ok(())
    }
}

/// Check that every point of `hf` appears in `lf` within `tol` in max-norm.
pub fn check_nesting(lf: &Dataset, hf: &Dataset, tol: f64) -> Result<NestingReport> {
    if lf.dim() != hf.dim() {
        return Err(Error::shape(
            format!("designs of dimension {}", lf.dim()),
            format!("dimension {}", hf.dim()),
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nesting tolerance must be >= 0, got {tol}"
        )));
    }
    let mut missing = Vec::new();
    for i in 0..hf.n() {
        let found = (0..lf.n()).any(|k| {
            (0..hf.dim()).all(|l| (hf.x()[(i, l)] - lf.x()[(k, l)]).abs() <= tol)
        });
        if !found {
            missing.push(hf.point(i));
        }
    }
    Ok(NestingReport {
        satisfied: missing.is_empty(),
        missing_points: missing,
        tolerance: tol,
    })
}

/// One level of the recursion: its data, kernel, and cached factorization.
#[derive(Debug, Clone)]
pub struct MfkLevel {
    data: Dataset,
    kernel: KernelConfig,
    nugget: f64,
    factor: GpFactor,
}

impl MfkLevel {
    pub fn training(&self) -> &Dataset {
        &self.data
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn sigma2(&self) -> f64 {
        self.factor.sigma2
    }

    pub fn log_likelihood(&self) -> f64 {
        self.factor.log_likelihood
    }

    /// GLS trend coefficients: `[mu]` for level 1, `[rho, mu_delta]` above.
    pub fn beta(&self) -> Vec<f64> {
        self.factor.beta.iter().copied().collect()
    }
}

/// A fitted multi-fidelity stack.
#[derive(Debug, Clone)]
pub struct MfkModel {
    levels: Vec<MfkLevel>,
    rho: Vec<f64>,
    variant: MfkVariant,
    nesting: Vec<NestingReport>,
    strict_nesting: bool,
    warnings: Vec<String>,
}

impl MfkModel {
    pub fn levels(&self) -> &[MfkLevel] {
        &self.levels
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn variant(&self) -> MfkVariant {
        self.variant
    }

    pub fn nesting_reports(&self) -> &[NestingReport] {
        &self.nesting
    }

    pub fn strict_nesting(&self) -> bool {
        self.strict_nesting
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn input_dim(&self) -> usize {
        self.levels[0].data.dim()
    }

    /// Top-of-stack training data (the most accurate level).
    pub fn top_training(&self) -> &Dataset {
        &self.levels[self.levels.len() - 1].data
    }

    /// Predict using only the first `upto` levels (1 = cheapest level alone).
    pub fn predict_levels(&self, upto: usize, xq: &DMatrix<f64>) -> Result<Prediction> {
        if upto == 0 || upto > self.levels.len() {
            return Err(Error::InvalidArgument(format!(
                "level count {upto} outside 1..={}",
                self.levels.len()
            )));
        }
        if xq.ncols() != self.input_dim() {
            return Err(Error::shape(
                format!("queries of dimension {}", self.input_dim()),
                format!("dimension {}", xq.ncols()),
            ));
        }
        let (mean, variance) = predict_stack(&self.levels[..upto], &self.rho[..upto - 1], xq)?;
        Ok(Prediction {
            mean,
            variance,
            lower: None,
            upper: None,
        })
    }

    /// Full-stack prediction.
    pub fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction> {
        self.predict_levels(self.levels.len(), xq)
    }

    /// Posterior mean of the discrepancy process of level `level` (1-based
    /// recursion index, so `level >= 1`): `mu_delta + r(x)^T alpha`, without
    /// the scaled lower-level contribution.
    pub fn discrepancy_mean(&self, level: usize, xq: &DMatrix<f64>) -> Result<DVector<f64>> {
        if level == 0 || level >= self.levels.len() {
            return Err(Error::InvalidArgument(format!(
                "discrepancy levels run from 1 to {}",
                self.levels.len() - 1
            )));
        }
        let lv = &self.levels[level];
        let r = kernel_matrix(&lv.kernel, lv.data.x(), xq)?;
        let mu_delta = lv.factor.beta[1];
        Ok(r.transpose() * &lv.factor.alpha + DVector::from_element(xq.nrows(), mu_delta))
    }
}

fn predict_stack(
    levels: &[MfkLevel],
    rho: &[f64],
    xq: &DMatrix<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = xq.nrows();
    let ones = DMatrix::from_element(m, 1, 1.0);
    let (mut mean, mut variance) =
        levels[0]
            .factor
            .predict(&levels[0].kernel, levels[0].data.x(), xq, &ones)?;
    for (i, level) in levels.iter().enumerate().skip(1) {
        let mut fq = DMatrix::from_element(m, 2, 1.0);
        fq.set_column(0, &mean);
        let (mean_i, var_i) = level
            .factor
            .predict(&level.kernel, level.data.x(), xq, &fq)?;
        let r = rho[i - 1];
        variance = r * r * variance + var_i;
        mean = mean_i;
    }
    Ok((mean, variance))
}

/// Fit the recursive multi-fidelity stack on `datasets`, ordered from the
/// least to the most accurate level.
pub fn fit_mfk(
    datasets: &[Dataset],
    variant: MfkVariant,
    family: KernelFamily,
    search: &SearchConfig,
    nesting: NestingPolicy,
) -> Result<MfkModel> {
    if datasets.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "multi-fidelity fitting needs at least 2 levels, got {}",
            datasets.len()
        )));
    }
    let dim = datasets[0].dim();
    for (i, ds) in datasets.iter().enumerate() {
        if ds.dim() != dim {
            return Err(Error::shape(
                format!("all levels of dimension {dim}"),
                format!("level {} has dimension {}", i + 1, ds.dim()),
            ));
        }
        if ds.n() < 2 {
            return Err(Error::InsufficientData(format!(
                "level {} has {} point(s); need at least 2",
                i + 1,
                ds.n()
            )));
        }
    }
    for pair in datasets.windows(2) {
        if pair[0].fidelity() >= pair[1].fidelity() {
            return Err(Error::InvalidArgument(format!(
                "fidelity tags must strictly increase across levels, got {} then {}",
                pair[0].fidelity(),
                pair[1].fidelity()
            )));
        }
    }

    let mut reports = Vec::new();
    for i in 1..datasets.len() {
        let report = check_nesting(&datasets[i - 1], &datasets[i], nesting.tol)?;
        if nesting.strict && !report.satisfied {
            return Err(Error::Nesting(report));
        }
        reports.push(report);
    }

    let mut warnings = Vec::new();
    let top = datasets.len() - 1;

    let ones0 = DMatrix::from_element(datasets[0].n(), 1, 1.0);
    let outcome = fit_gp(
        datasets[0].x(),
        datasets[0].y(),
        &ones0,
        family,
        search,
        None,
    )?;
    warnings.extend(tag_warnings(0, outcome.warnings));
    let mut levels = vec![MfkLevel {
        data: datasets[0].clone(),
        kernel: outcome.kernel,
        nugget: outcome.nugget,
        factor: outcome.factor,
    }];
    let mut rho: Vec<f64> = Vec::new();

    for (i, data) in datasets.iter().enumerate().skip(1) {
        let (m_prev, _) = predict_stack(&levels, &rho, data.x())?;
        let mut trend = DMatrix::from_element(data.n(), 2, 1.0);
        trend.set_column(0, &m_prev);

        let outcome = if i == top && variant != MfkVariant::Mfk {
            let h_max = data.dim().min(data.n() - 1);
            let h = search.pls_components.unwrap_or(3.min(data.dim()));
            if h == 0 || h > h_max {
                return Err(Error::InvalidArgument(format!(
                    "PLS component count {h} outside 1..={h_max} for the top level"
                )));
            }
            let projection = pls_fit(data.x(), data.y().as_slice(), h)?;
            let projected = fit_gp(
                data.x(),
                data.y(),
                &trend,
                family,
                search,
                Some(&projection),
            )?;
            match variant {
                MfkVariant::MfkPls => projected,
                MfkVariant::MfkPlsk => {
                    let (z0, spans) = expanded_start(
                        projected.kernel.theta(),
                        &projection,
                        data.x(),
                        search.log_theta_bounds,
                    )?;
                    let mut expanded = fit_gp_with_starts(
                        data.x(),
                        data.y(),
                        &trend,
                        family,
                        search,
                        None,
                        &spans,
                        &[z0],
                    )?;
                    expanded.warnings.splice(0..0, projected.warnings);
                    expanded
                }
                MfkVariant::Mfk => unreachable!(),
            }
        } else {
            fit_gp(data.x(), data.y(), &trend, family, search, None)?
        };

        warnings.extend(tag_warnings(i, outcome.warnings));
        rho.push(outcome.factor.beta[0]);
        levels.push(MfkLevel {
            data: data.clone(),
            kernel: outcome.kernel,
            nugget: outcome.nugget,
            factor: outcome.factor,
        });
    }

    Ok(MfkModel {
        levels,
        rho,
        variant,
        nesting: reports,
        strict_nesting: nesting.strict,
        warnings,
    })
}

fn tag_warnings(level: usize, warnings: Vec<String>) -> Vec<String> {
    warnings
        .into_iter()
        .map(|w| format!("level {}: {w}", level + 1))
        .collect()
}

/// Free-function form of [`MfkModel::predict`].
pub fn predict_mfk(model: &MfkModel, xq: &DMatrix<f64>) -> Result<Prediction> {
    model.predict(xq)
}

/// Rebuild a fitted stack from stored per-level data and kernels (used when
/// loading serialized models; factorizations and GLS coefficients are
/// recomputed from scratch).
pub(crate) fn rebuild_mfk(
    parts: Vec<(Dataset, KernelConfig, f64)>,
    variant: MfkVariant,
    nesting: Vec<NestingReport>,
    strict_nesting: bool,
    warnings: Vec<String>,
) -> Result<MfkModel> {
    if parts.len() < 2 {
        return Err(Error::ModelFormat(
            "a multi-fidelity model needs at least 2 levels".into(),
        ));
    }
    let mut levels: Vec<MfkLevel> = Vec::with_capacity(parts.len());
    let mut rho: Vec<f64> = Vec::new();
    for (i, (data, kernel, nugget)) in parts.into_iter().enumerate() {
        let factor = if i == 0 {
            let ones = DMatrix::from_element(data.n(), 1, 1.0);
            GpFactor::build(data.x(), data.y(), &ones, &kernel, nugget)?
        } else {
            let (m_prev, _) = predict_stack(&levels, &rho, data.x())?;
            let mut trend = DMatrix::from_element(data.n(), 2, 1.0);
            trend.set_column(0, &m_prev);
            let factor = GpFactor::build(data.x(), data.y(), &trend, &kernel, nugget)?;
            rho.push(factor.beta[0]);
            factor
        };
        levels.push(MfkLevel {
            data,
            kernel,
            nugget,
            factor,
        });
    }
    Ok(MfkModel {
        levels,
        rho,
        variant,
        nesting,
        strict_nesting,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{forrester, Dataset, ForresterLevel};
    use approx::assert_relative_eq;

    fn search() -> SearchConfig {
        SearchConfig {
            nugget: 0.0,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn nesting_subset_satisfied() {
        let lf = Dataset::from_1d(&[300.0, 500.0, 700.0], &[1.0, 2.0, 3.0], 1, "lf").unwrap();
        let hf = Dataset::from_1d(&[300.0, 700.0], &[1.1, 3.1], 2, "hf").unwrap();
        let r = check_nesting(&lf, &hf, 0.0).unwrap();
        assert!(r.satisfied);
        assert!(r.missing_points.is_empty());
    }

    #[test]
    fn nesting_disjoint_reports_missing() {
        let lf = Dataset::from_1d(&[300.0, 500.0], &[1.0, 2.0], 1, "lf").unwrap();
        let hf = Dataset::from_1d(&[400.0], &[1.5], 2, "hf").unwrap();
        let r = check_nesting(&lf, &hf, 0.0).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.missing_points, vec![vec![400.0]]);
    }

    #[test]
    fn nesting_with_tolerance() {
        let lf = Dataset::from_1d(&[300.0005, 500.0], &[1.0, 2.0], 1, "lf").unwrap();
        let hf = Dataset::from_1d(&[300.0], &[1.5], 2, "hf").unwrap();
        assert!(check_nesting(&lf, &hf, 1e-3).unwrap().satisfied);
        assert!(!check_nesting(&lf, &hf, 1e-6).unwrap().satisfied);
        assert!(check_nesting(&lf, &hf, -1.0).is_err());
    }

    fn forrester_pair() -> (Dataset, Dataset) {
        let lf_x: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let lf_y: Vec<f64> = lf_x
            .iter()
            .map(|&x| forrester(x, ForresterLevel::Low).unwrap())
            .collect();
        let hf_x = vec![0.0, 0.4, 0.6, 1.0];
        let hf_y: Vec<f64> = hf_x
            .iter()
            .map(|&x| forrester(x, ForresterLevel::High).unwrap())
            .collect();
        (
            Dataset::from_1d(&lf_x, &lf_y, 1, "lf").unwrap(),
            Dataset::from_1d(&hf_x, &hf_y, 2, "hf").unwrap(),
        )
    }

    #[test]
    fn constructed_affine_relation_recovers_rho() {
        let lf_x: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let lf_y: Vec<f64> = lf_x.iter().map(|&x| (2.5 * x).sin() + 1.0).collect();
        let hf_x: Vec<f64> = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let hf_y: Vec<f64> = hf_x.iter().map(|&x| 2.0 * ((2.5 * x).sin() + 1.0)).collect();
        let lf = Dataset::from_1d(&lf_x, &lf_y, 1, "lf").unwrap();
        let hf = Dataset::from_1d(&hf_x, &hf_y, 2, "hf").unwrap();

        let model = fit_mfk(
            &[lf, hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        assert_relative_eq!(model.rho()[0], 2.0, epsilon = 1e-6);
        assert!(model.levels()[1].sigma2() < 1e-10);

        // at a fresh query the prediction tracks 2 * level-1 mean
        let xq = DMatrix::from_element(1, 1, 0.37);
        let full = model.predict(&xq).unwrap();
        let lvl1 = model.predict_levels(1, &xq).unwrap();
        assert_relative_eq!(full.mean[0], 2.0 * lvl1.mean[0], epsilon = 1e-4);
    }

    #[test]
    fn identical_responses_give_unit_rho_and_flat_discrepancy() {
        let lf_x: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let lf_y: Vec<f64> = lf_x.iter().map(|&x| (3.0 * x).cos()).collect();
        let lf = Dataset::from_1d(&lf_x, &lf_y, 1, "lf").unwrap();
        let hf_x: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
        let hf_y: Vec<f64> = hf_x.iter().map(|&x| (3.0 * x).cos()).collect();
        let hf = Dataset::from_1d(&hf_x, &hf_y, 2, "hf").unwrap();

        let model = fit_mfk(
            &[lf, hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        assert_relative_eq!(model.rho()[0], 1.0, epsilon = 1e-6);

        let grid = DMatrix::from_fn(21, 1, |i, _| i as f64 / 20.0);
        let delta = model.discrepancy_mean(1, &grid).unwrap();
        for v in delta.iter() {
            assert!(v.abs() < 1e-6, "discrepancy mean should vanish, got {v}");
        }
        let full = model.predict(&grid).unwrap();
        let lvl1 = model.predict_levels(1, &grid).unwrap();
        for i in 0..grid.nrows() {
            assert_relative_eq!(full.mean[i], lvl1.mean[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn identity_recursion_from_exact_level1_responses() {
        let lf_x: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let lf_y: Vec<f64> = lf_x.iter().map(|&x| 1.5 * x + 0.3).collect();
        let lf = Dataset::from_1d(&lf_x, &lf_y, 1, "lf").unwrap();
        let level1 = crate::gp::fit_kriging(&lf, KernelFamily::SquaredExponential, &search())
            .unwrap();

        // responses are exactly the level-1 posterior means: rho = 1, delta = 0
        let hf_x = [0.0, 0.5, 1.0];
        let hf_grid = DMatrix::from_column_slice(3, 1, &hf_x);
        let m1 = level1.predict(&hf_grid).unwrap().mean;
        let hf = Dataset::from_1d(&hf_x, m1.as_slice(), 2, "hf").unwrap();

        let model = fit_mfk(
            &[lf.clone(), hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        assert_relative_eq!(model.rho()[0], 1.0, epsilon = 1e-8);

        let grid = DMatrix::from_fn(11, 1, |i, _| i as f64 / 10.0);
        let full = model.predict(&grid).unwrap();
        let lvl1 = model.predict_levels(1, &grid).unwrap();
        for i in 0..11 {
            assert_relative_eq!(full.mean[i], lvl1.mean[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn interpolates_top_level_at_shared_points() {
        let (lf, hf) = forrester_pair();
        let model = fit_mfk(
            &[lf, hf.clone()],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        let pred = model.predict(hf.x()).unwrap();
        for i in 0..hf.n() {
            assert!(
                (pred.mean[i] - hf.y()[i]).abs() <= 1e-6 * (1.0 + hf.y()[i].abs()),
                "top-level interpolation failed at point {i}: {} vs {}",
                pred.mean[i],
                hf.y()[i]
            );
            assert!(pred.variance[i] < 1e-8 * model.levels()[1].sigma2().max(1e-30));
        }
    }

    #[test]
    fn mean_decomposition_identity() {
        let (lf, hf) = forrester_pair();
        let model = fit_mfk(
            &[lf, hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        let grid = DMatrix::from_fn(33, 1, |i, _| i as f64 / 32.0);
        let full = model.predict(&grid).unwrap();
        let lvl1 = model.predict_levels(1, &grid).unwrap();
        let delta = model.discrepancy_mean(1, &grid).unwrap();
        let rho = model.rho()[0];
        let scale = full.mean.amax().max(1.0);
        for i in 0..grid.nrows() {
            let lhs = full.mean[i] - rho * lvl1.mean[i];
            assert!(
                (lhs - delta[i]).abs() <= 1e-10 * scale,
                "decomposition violated at {i}: {lhs} vs {}",
                delta[i]
            );
        }
    }

    #[test]
    fn variance_dominates_scaled_lower_level() {
        let (lf, hf) = forrester_pair();
        let model = fit_mfk(
            &[lf, hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        let grid = DMatrix::from_fn(41, 1, |i, _| i as f64 / 40.0);
        let full = model.predict(&grid).unwrap();
        let lvl1 = model.predict_levels(1, &grid).unwrap();
        let rho = model.rho()[0];
        for i in 0..grid.nrows() {
            assert!(
                full.variance[i] >= rho * rho * lvl1.variance[i] - 1e-8,
                "variance recursion lost mass at {i}"
            );
        }
    }

    #[test]
    fn three_level_stack_fits_and_predicts() {
        let x0: Vec<f64> = (0..13).map(|i| i as f64 / 12.0).collect();
        let f0 = |x: f64| (4.0 * x).sin();
        let y0: Vec<f64> = x0.iter().map(|&x| f0(x)).collect();
        let x1: Vec<f64> = (0..7).map(|i| i as f64 / 6.0).collect();
        let y1: Vec<f64> = x1.iter().map(|&x| 1.4 * f0(x) + 0.3).collect();
        let x2 = [0.0, 0.5, 1.0];
        let y2: Vec<f64> = x2.iter().map(|&x| 0.9 * (1.4 * f0(x) + 0.3) - 0.1).collect();

        let d0 = Dataset::from_1d(&x0, &y0, 1, "l1").unwrap();
        let d1 = Dataset::from_1d(&x1, &y1, 2, "l2").unwrap();
        let d2 = Dataset::from_1d(&x2, &y2, 3, "l3").unwrap();

        // x1 grid points i/6 are not all on the x0 grid i/12? they are:
        // i/6 = 2i/12, and x2 = {0, 1/2, 1} are on both.
        let model = fit_mfk(
            &[d0, d1, d2.clone()],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        )
        .unwrap();
        assert_eq!(model.levels().len(), 3);
        assert_eq!(model.rho().len(), 2);
        assert_relative_eq!(model.rho()[0], 1.4, epsilon = 1e-4);
        assert_relative_eq!(model.rho()[1], 0.9, epsilon = 1e-4);
        let pred = model.predict(d2.x()).unwrap();
        for i in 0..d2.n() {
            assert_relative_eq!(pred.mean[i], d2.y()[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn strict_nesting_violation_errors_and_relaxation_fits() {
        let lf = Dataset::from_1d(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0], 1, "lf").unwrap();
        let hf = Dataset::from_1d(&[0.25, 0.75], &[0.6, 1.6], 2, "hf").unwrap();
        let err = fit_mfk(
            &[lf.clone(), hf.clone()],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy::default(),
        );
        match err {
            Err(Error::Nesting(report)) => {
                assert_eq!(report.missing_points.len(), 2);
            }
            other => panic!("expected nesting error, got {other:?}"),
        }

        let relaxed = fit_mfk(
            &[lf, hf],
            MfkVariant::Mfk,
            KernelFamily::SquaredExponential,
            &search(),
            NestingPolicy {
                strict: false,
                tol: 0.0,
            },
        )
        .unwrap();
        assert!(!relaxed.nesting_reports()[0].satisfied);
        assert!(!relaxed.strict_nesting());
    }

    #[test]
    fn single_level_is_rejected() {
        let lf = Dataset::from_1d(&[0.0, 1.0], &[0.0, 1.0], 1, "lf").unwrap();
        assert!(matches!(
            fit_mfk(
                &[lf],
                MfkVariant::Mfk,
                KernelFamily::SquaredExponential,
                &search(),
                NestingPolicy::default(),
            ),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn fidelity_tags_must_increase() {
        let a = Dataset::from_1d(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0], 2, "a").unwrap();
        let b = Dataset::from_1d(&[0.0, 1.0], &[0.1, 2.1], 2, "b").unwrap();
        assert!(matches!(
            fit_mfk(
                &[a, b],
                MfkVariant::Mfk,
                KernelFamily::SquaredExponential,
                &search(),
                NestingPolicy::default(),
            ),
            Err(Error::InvalidArgument(_))
        ));
    }
}
