//! Single-fidelity ordinary Kriging: concentrated maximum-likelihood fitting,
//! predictive means and variances.
//!
//! The engine underneath ([`GpFactor`]) supports a general linear trend basis
//! estimated by generalized least squares; ordinary Kriging uses the constant
//! basis, and the multi-fidelity recursion reuses the same engine with a
//! two-column basis.
//!
//! Log-likelihood convention: `-(n/2) ln(sigma2) - (1/2) ln det(R + eta I)`,
//! with additive constants dropped. `sigma2` is floored at the smallest
//! positive double inside the logarithm so degenerate (zero-residual) fits
//! stay finite and comparable.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, project_theta, KernelConfig, KernelFamily};
use crate::optimize::{halton_starts, nelder_mead_box};
use crate::pls::PlsProjection;

/// Hyperparameter-search configuration.
///
/// `log_theta_bounds` are interpreted in span-normalized coordinates: the
/// search works on `z` with `theta_l = exp(z_l) / span_l^2`, where `span_l`
/// is the extent of training dimension `l`. Inputs spanning `[0, 1]` see the
/// bounds verbatim; other scales get the equivalent window for their units.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Nelder–Mead restarts taken from the seeded Halton sequence.
    pub n_restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Seed for the start-point sequence.
    pub seed: u64,
    /// Box bounds on `ln theta` in span-normalized coordinates.
    pub log_theta_bounds: (f64, f64),
    /// Initial correlation jitter; escalated tenfold up to 1e-4 when the
    /// factorization fails, and recorded as a model warning.
    pub nugget: f64,
    /// Absolute spread tolerance on the simplex objective values.
    pub ftol: f64,
    /// PLS component count for the projected variants; `None` means
    /// `min(3, d)`.
    pub pls_components: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_restarts: 10,
            max_iters: 200,
            seed: 0,
            log_theta_bounds: (-10.0, 7.0),
            nugget: 1e-10,
            ftol: 1e-9,
            pls_components: None,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_nugget(mut self, nugget: f64) -> Self {
        self.nugget = nugget;
        self
    }
}

/// Kernel, process variance, nugget, and constant trend of a fitted model.
#[derive(Debug, Clone)]
pub struct Hyperparameters {
    pub kernel: KernelConfig,
    pub sigma2: f64,
    pub nugget: f64,
    pub mu: f64,
}

/// Predictive means and variances, with optional `z`-multiplier bounds.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub mean: DVector<f64>,
    pub variance: DVector<f64>,
    pub lower: Option<DVector<f64>>,
    pub upper: Option<DVector<f64>>,
}

impl Prediction {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.len() == 0
    }

    /// Attach `mean ± z * sigma` bounds.
    pub fn with_bounds(mut self, z: f64) -> Self {
        let sd = self.variance.map(|v| v.max(0.0).sqrt());
        self.lower = Some(&self.mean - z * &sd);
        self.upper = Some(&self.mean + z * &sd);
        self
    }
}

/// Cached factorization products of one GP: Cholesky of `R + eta I`, GLS
/// trend solve, residual weights, and the concentrated likelihood value.
#[derive(Debug, Clone)]
pub(crate) struct GpFactor {
    pub(crate) chol: Cholesky<f64, Dyn>,
    pub(crate) trend: DMatrix<f64>,
    pub(crate) beta: DVector<f64>,
    pub(crate) alpha: DVector<f64>,
    pub(crate) ftrf_inv: DMatrix<f64>,
    pub(crate) sigma2: f64,
    pub(crate) nugget: f64,
    pub(crate) log_likelihood: f64,
}

impl GpFactor {
    pub(crate) fn build(
        x: &DMatrix<f64>,
        y: &DVector<f64>,
        trend: &DMatrix<f64>,
        kernel: &KernelConfig,
        nugget: f64,
    ) -> Result<GpFactor> {
        let n = x.nrows();
        if y.len() != n || trend.nrows() != n {
            return Err(Error::shape(
                format!("{n} responses and trend rows"),
                format!("{} and {}", y.len(), trend.nrows()),
            ));
        }
        if nugget < 0.0 {
            return Err(Error::InvalidArgument("nugget must be >= 0".into()));
        }
        let mut r = kernel_matrix(kernel, x, x)?;
        for i in 0..n {
            r[(i, i)] += nugget;
        }
        let chol = Cholesky::new(r).ok_or(Error::IllConditioned { nugget })?;

        // Reject numerically degenerate factorizations as well: the squared
        // ratio of extreme Cholesky pivots tracks cond(R), and roundoff eats
        // the interpolation identity once that passes ~1e7. The search treats
        // such theta as infeasible and the nugget ladder lifts the floor.
        let l = chol.l();
        let mut pivot_min = f64::INFINITY;
        let mut pivot_max = 0.0f64;
        for i in 0..n {
            let p = l[(i, i)];
            pivot_min = pivot_min.min(p);
            pivot_max = pivot_max.max(p);
        }
        if !(pivot_min > 0.0) || pivot_max / pivot_min > 3e3 {
            return Err(Error::IllConditioned { nugget });
        }

        let rinv_f = chol.solve(trend);
        let rinv_y = chol.solve(y);
        let ftrf = trend.transpose() * &rinv_f;
        let ftrf_inv = ftrf
            .try_inverse()
            .ok_or_else(|| Error::Domain("trend basis is rank deficient under GLS".into()))?;
        let beta = &ftrf_inv * (trend.transpose() * &rinv_y);
        let resid = y - trend * &beta;
        let alpha = chol.solve(&resid);
        let sigma2 = (resid.dot(&alpha) / n as f64).max(0.0);

        let mut log_det = 0.0;
        for i in 0..n {
            log_det += l[(i, i)].ln();
        }
        log_det *= 2.0;
        let log_likelihood =
            -0.5 * (n as f64) * sigma2.max(f64::MIN_POSITIVE).ln() - 0.5 * log_det;

        Ok(GpFactor {
            chol,
            trend: trend.clone(),
            beta,
            alpha,
            ftrf_inv,
            sigma2,
            nugget,
            log_likelihood,
        })
    }

    /// Predictive mean and (clamped, non-negative) variance at `xq`, given
    /// the trend values `fq` at the query points.
    pub(crate) fn predict(
        &self,
        kernel: &KernelConfig,
        x_train: &DMatrix<f64>,
        xq: &DMatrix<f64>,
        fq: &DMatrix<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let m = xq.nrows();
        if fq.nrows() != m || fq.ncols() != self.trend.ncols() {
            return Err(Error::shape(
                format!("{m}x{} trend values", self.trend.ncols()),
                format!("{}x{}", fq.nrows(), fq.ncols()),
            ));
        }
        let r = kernel_matrix(kernel, x_train, xq)?;
        let rinv_r = self.chol.solve(&r);
        let mean = fq * &self.beta + r.transpose() * &self.alpha;

        let u = fq.transpose() - self.trend.transpose() * &rinv_r;
        let mut variance = DVector::zeros(m);
        for j in 0..m {
            let rt_rinv_r = r.column(j).dot(&rinv_r.column(j));
            let uj = u.column(j);
            let gls_term = (self.ftrf_inv.clone() * uj).dot(&uj);
            let raw = self.sigma2 * (1.0 + self.nugget - rt_rinv_r + gls_term);
            debug_assert!(
                raw > -1e-8 * self.sigma2.max(f64::MIN_POSITIVE),
                "variance fell below the clamp tolerance: {raw}"
            );
            variance[j] = raw.max(0.0);
        }
        Ok((mean, variance))
    }
}

/// One fitted ordinary-Kriging level: training data, hyperparameters, and the
/// cached factorization products.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    training: Dataset,
    params: Hyperparameters,
    factor: GpFactor,
    warnings: Vec<String>,
}

impl KrigingModel {
    /// Build a model at fixed hyperparameters (no search); the trend constant
    /// and process variance come out of the GLS solve.
    pub fn with_hyperparameters(
        training: Dataset,
        kernel: KernelConfig,
        nugget: f64,
    ) -> Result<KrigingModel> {
        if kernel.input_dim() != training.dim() {
            return Err(Error::shape(
                format!("kernel for dimension {}", training.dim()),
                format!("dimension {}", kernel.input_dim()),
            ));
        }
        let trend = DMatrix::from_element(training.n(), 1, 1.0);
        let factor = GpFactor::build(training.x(), training.y(), &trend, &kernel, nugget)?;
        let params = Hyperparameters {
            kernel,
            sigma2: factor.sigma2,
            nugget,
            mu: factor.beta[0],
        };
        Ok(KrigingModel {
            training,
            params,
            factor,
            warnings: Vec::new(),
        })
    }

    pub fn training(&self) -> &Dataset {
        &self.training
    }

    pub fn params(&self) -> &Hyperparameters {
        &self.params
    }

    pub fn log_likelihood(&self) -> f64 {
        self.factor.log_likelihood
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn push_warnings(&mut self, warnings: Vec<String>) {
        self.warnings.extend(warnings);
    }

    /// Predictive mean and variance at the query points (one row each).
    pub fn predict(&self, xq: &DMatrix<f64>) -> Result<Prediction> {
        if xq.ncols() != self.training.dim() {
            return Err(Error::shape(
                format!("queries of dimension {}", self.training.dim()),
                format!("dimension {}", xq.ncols()),
            ));
        }
        let fq = DMatrix::from_element(xq.nrows(), 1, 1.0);
        let (mean, variance) =
            self.factor
                .predict(&self.params.kernel, self.training.x(), xq, &fq)?;
        Ok(Prediction {
            mean,
            variance,
            lower: None,
            upper: None,
        })
    }
}

/// Concentrated log marginal likelihood of `data` under `kernel` plus
/// `nugget`, together with the concentrated trend constant and process
/// variance `(ll, mu, sigma2)`.
pub fn log_marginal_likelihood(
    data: &Dataset,
    kernel: &KernelConfig,
    nugget: f64,
) -> Result<(f64, f64, f64)> {
    if kernel.input_dim() != data.dim() {
        return Err(Error::shape(
            format!("kernel for dimension {}", data.dim()),
            format!("dimension {}", kernel.input_dim()),
        ));
    }
    let trend = DMatrix::from_element(data.n(), 1, 1.0);
    let factor = GpFactor::build(data.x(), data.y(), &trend, kernel, nugget)?;
    Ok((factor.log_likelihood, factor.beta[0], factor.sigma2))
}

/// Outcome of the internal GP fit shared by the single- and multi-fidelity
/// paths.
pub(crate) struct FitOutcome {
    pub(crate) kernel: KernelConfig,
    pub(crate) factor: GpFactor,
    pub(crate) nugget: f64,
    pub(crate) warnings: Vec<String>,
}

fn column_spans(x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.ncols())
        .map(|j| {
            let col = x.column(j);
            let span = col.max() - col.min();
            if span > 0.0 {
                span
            } else {
                1.0
            }
        })
        .collect()
}

/// Spans of the projected score coordinates `X * w_k`.
fn projected_spans(x: &DMatrix<f64>, projection: &PlsProjection) -> Vec<f64> {
    let scores = x * projection.weights();
    column_spans(&scores)
}

fn nugget_ladder(initial: f64) -> Vec<f64> {
    let mut ladder = vec![initial];
    let mut v = if initial <= 0.0 { 1e-10 } else { initial * 10.0 };
    while v <= 1.0000000001e-4 {
        ladder.push(v);
        v *= 10.0;
    }
    ladder
}

fn check_duplicates(x: &DMatrix<f64>, y: &DVector<f64>, nugget: f64) -> Result<()> {
    let n = x.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let same = (0..x.ncols()).all(|l| x[(i, l)] == x[(j, l)]);
            if same && y[i] != y[j] && nugget == 0.0 {
                return Err(Error::DuplicateInputs { row_a: i, row_b: j });
            }
        }
    }
    Ok(())
}

/// Fit theta (and GLS trend) by restarted Nelder–Mead on the concentrated
/// likelihood, escalating the nugget when no restart can factorize.
pub(crate) fn fit_gp(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    trend: &DMatrix<f64>,
    family: KernelFamily,
    search: &SearchConfig,
    projection: Option<&PlsProjection>,
) -> Result<FitOutcome> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "hyperparameter search needs n >= 2, got {n}"
        )));
    }
    let (lo_b, hi_b) = search.log_theta_bounds;
    if !(lo_b < hi_b) {
        return Err(Error::InvalidArgument(format!(
            "empty log-theta bounds [{lo_b}, {hi_b}]"
        )));
    }
    check_duplicates(x, y, search.nugget)?;

    let spans = match projection {
        Some(p) => projected_spans(x, p),
        None => column_spans(x),
    };
    let dim = spans.len();
    let lo = vec![lo_b; dim];
    let hi = vec![hi_b; dim];
    let starts = halton_starts(search.n_restarts.max(1), &lo, &hi, search.seed);
    fit_gp_with_starts(x, y, trend, family, search, projection, &spans, &starts)
}

/// Same as [`fit_gp`] but with explicit start points in `z` space
/// (`theta_l = exp(z_l) / span_l^2`). Used by the re-optimization stage of
/// the expanded-PLS variant.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_gp_with_starts(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    trend: &DMatrix<f64>,
    family: KernelFamily,
    search: &SearchConfig,
    projection: Option<&PlsProjection>,
    spans: &[f64],
    starts: &[Vec<f64>],
) -> Result<FitOutcome> {
    let (lo_b, hi_b) = search.log_theta_bounds;
    let dim = spans.len();
    let lo = vec![lo_b; dim];
    let hi = vec![hi_b; dim];

    let theta_of = |z: &[f64]| -> Vec<f64> {
        z.iter()
            .zip(spans)
            .map(|(zl, s)| zl.exp() / (s * s))
            .collect()
    };
    let kernel_of = |z: &[f64]| -> Result<KernelConfig> {
        let theta = theta_of(z);
        match projection {
            Some(p) => KernelConfig::with_projection(family, theta, p.clone()),
            None => KernelConfig::new(family, theta),
        }
    };

    let mut warnings = Vec::new();
    for (rung, &nugget) in nugget_ladder(search.nugget).iter().enumerate() {
        let results: Vec<(usize, Vec<f64>, f64)> = starts
            .par_iter()
            .enumerate()
            .map(|(i, start)| {
                let objective = |z: &[f64]| -> f64 {
                    match kernel_of(z) {
                        Ok(kernel) => match GpFactor::build(x, y, trend, &kernel, nugget) {
                            Ok(factor) => -factor.log_likelihood,
                            Err(_) => f64::INFINITY,
                        },
                        Err(_) => f64::INFINITY,
                    }
                };
                let (z, v) =
                    nelder_mead_box(&objective, start, &lo, &hi, search.max_iters, search.ftol);
                (i, z, v)
            })
            .collect();

        // Scheduling-independent selection: best value, ties to the lowest
        // restart index.
        let mut best: Option<&(usize, Vec<f64>, f64)> = None;
        for cand in &results {
            let better = match best {
                None => true,
                Some(b) => cand.2 < b.2 || (cand.2 == b.2 && cand.0 < b.0),
            };
            if better && cand.2.is_finite() {
                best = Some(cand);
            }
        }

        if let Some((_, z, _)) = best {
            let kernel = kernel_of(z)?;
            let factor = GpFactor::build(x, y, trend, &kernel, nugget)?;
            if rung > 0 {
                warnings.push(format!(
                    "nugget escalated from {:e} to {:e} after factorization failures",
                    search.nugget, nugget
                ));
            }
            return Ok(FitOutcome {
                kernel,
                factor,
                nugget,
                warnings,
            });
        }
    }
    Err(Error::Unfittable)
}

/// Maximum-likelihood hyperparameters for ordinary Kriging on `data`.
///
/// Deterministic: the restarts come from a seeded Halton sequence, the best
/// restart wins, and ties break toward the lowest restart index regardless of
/// how restarts were scheduled.
pub fn optimize_hyperparameters(
    data: &Dataset,
    family: KernelFamily,
    search: &SearchConfig,
) -> Result<Hyperparameters> {
    let trend = DMatrix::from_element(data.n(), 1, 1.0);
    let outcome = fit_gp(data.x(), data.y(), &trend, family, search, None)?;
    Ok(Hyperparameters {
        kernel: outcome.kernel,
        sigma2: outcome.factor.sigma2,
        nugget: outcome.nugget,
        mu: outcome.factor.beta[0],
    })
}

/// Fit ordinary Kriging: optimize hyperparameters, then cache the
/// factorization products for prediction.
pub fn fit_kriging(
    data: &Dataset,
    family: KernelFamily,
    search: &SearchConfig,
) -> Result<KrigingModel> {
    let trend = DMatrix::from_element(data.n(), 1, 1.0);
    let outcome = fit_gp(data.x(), data.y(), &trend, family, search, None)?;
    let params = Hyperparameters {
        kernel: outcome.kernel,
        sigma2: outcome.factor.sigma2,
        nugget: outcome.nugget,
        mu: outcome.factor.beta[0],
    };
    Ok(KrigingModel {
        training: data.clone(),
        params,
        factor: outcome.factor,
        warnings: outcome.warnings,
    })
}

/// Predict with a fitted model (free-function form of
/// [`KrigingModel::predict`]).
pub fn predict(model: &KrigingModel, xq: &DMatrix<f64>) -> Result<Prediction> {
    model.predict(xq)
}

/// Expand a projected theta to full dimension and return the matching
/// `z`-space start for the unprojected re-optimization.
pub(crate) fn expanded_start(
    theta_h: &[f64],
    projection: &PlsProjection,
    x: &DMatrix<f64>,
    bounds: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let theta_full = project_theta(theta_h, projection)?;
    let spans = column_spans(x);
    let z0: Vec<f64> = theta_full
        .iter()
        .zip(&spans)
        .map(|(t, s)| (t * s * s).ln().clamp(bounds.0, bounds.1))
        .collect();
    Ok((z0, spans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use approx::assert_relative_eq;

    fn sqexp(theta: Vec<f64>) -> KernelConfig {
        KernelConfig::new(KernelFamily::SquaredExponential, theta).unwrap()
    }

    /// Dense-inverse oracle: everything through an explicit matrix inverse,
    /// no Cholesky anywhere.
    struct DenseOracle {
        r_inv: DMatrix<f64>,
        mu: f64,
        sigma2: f64,
        ll: f64,
        one_rinv_one: f64,
        y: DVector<f64>,
    }

    fn dense_oracle(data: &Dataset, kernel: &KernelConfig, nugget: f64) -> DenseOracle {
        let n = data.n();
        let mut r = kernel_matrix(kernel, data.x(), data.x()).unwrap();
        for i in 0..n {
            r[(i, i)] += nugget;
        }
        let det = r.determinant();
        let r_inv = r.try_inverse().unwrap();
        let ones = DVector::from_element(n, 1.0);
        let one_rinv_one = (&r_inv * &ones).dot(&ones);
        let mu = (&r_inv * data.y()).dot(&ones) / one_rinv_one;
        let resid = data.y() - mu * &ones;
        let sigma2 = ((&r_inv * &resid).dot(&resid) / n as f64).max(0.0);
        let ll = -0.5 * n as f64 * sigma2.max(f64::MIN_POSITIVE).ln() - 0.5 * det.ln();
        DenseOracle {
            r_inv,
            mu,
            sigma2,
            ll,
            one_rinv_one,
            y: data.y().clone(),
        }
    }

    impl DenseOracle {
        fn predict(
            &self,
            kernel: &KernelConfig,
            data: &Dataset,
            xq: &DMatrix<f64>,
            nugget: f64,
        ) -> (DVector<f64>, DVector<f64>) {
            let m = xq.nrows();
            let n = data.n();
            let ones = DVector::from_element(n, 1.0);
            let r = kernel_matrix(kernel, data.x(), xq).unwrap();
            let mut mean = DVector::zeros(m);
            let mut var = DVector::zeros(m);
            for j in 0..m {
                let rj = r.column(j).clone_owned();
                let rinv_rj = &self.r_inv * &rj;
                mean[j] = self.mu + rinv_rj.dot(&(&self.y - self.mu * &ones));
                let one_rinv_r = rinv_rj.dot(&ones);
                let v = self.sigma2
                    * (1.0 + nugget - rj.dot(&rinv_rj)
                        + (1.0 - one_rinv_r).powi(2) / self.one_rinv_one);
                var[j] = v.max(0.0);
            }
            (mean, var)
        }
    }

    #[test]
    fn single_point_concentrates_to_observation() {
        let data = Dataset::from_1d(&[0.4], &[3.25], 2, "one").unwrap();
        let (_, mu, sigma2) = log_marginal_likelihood(&data, &sqexp(vec![1.0]), 1e-10).unwrap();
        assert_relative_eq!(mu, 3.25, max_relative = 1e-12);
        assert!(sigma2.abs() < 1e-12);
    }

    #[test]
    fn constant_response_concentrates_to_constant() {
        let data = Dataset::from_1d(&[0.0, 1.0], &[7.5, 7.5], 2, "const").unwrap();
        let (_, mu, sigma2) = log_marginal_likelihood(&data, &sqexp(vec![0.8]), 1e-10).unwrap();
        assert_relative_eq!(mu, 7.5, max_relative = 1e-12);
        assert!(sigma2 < 1e-18);
    }

    #[test]
    fn likelihood_matches_dense_inverse_oracle() {
        let data = Dataset::from_1d(&[0.1, 0.55, 0.9], &[1.0, -0.4, 2.2], 2, "tri").unwrap();
        let kernel = sqexp(vec![2.3]);
        let nugget = 1e-10;
        let (ll, mu, sigma2) = log_marginal_likelihood(&data, &kernel, nugget).unwrap();
        let oracle = dense_oracle(&data, &kernel, nugget);
        assert_relative_eq!(mu, oracle.mu, max_relative = 1e-10);
        assert_relative_eq!(sigma2, oracle.sigma2, max_relative = 1e-10);
        assert_relative_eq!(ll, oracle.ll, max_relative = 1e-10);
    }

    #[test]
    fn predict_matches_dense_inverse_oracle() {
        let data = Dataset::from_1d(&[0.1, 0.55, 0.9], &[1.0, -0.4, 2.2], 2, "tri").unwrap();
        let kernel = sqexp(vec![2.3]);
        let nugget = 1e-10;
        let model =
            KrigingModel::with_hyperparameters(data.clone(), kernel.clone(), nugget).unwrap();
        let xq = DMatrix::from_column_slice(4, 1, &[0.0, 0.3, 0.7, 1.4]);
        let pred = model.predict(&xq).unwrap();
        let oracle = dense_oracle(&data, &kernel, nugget);
        let (om, ov) = oracle.predict(&kernel, &data, &xq, nugget);
        for j in 0..4 {
            assert_relative_eq!(pred.mean[j], om[j], max_relative = 1e-10);
            assert_relative_eq!(
                pred.variance[j],
                ov[j],
                max_relative = 1e-10,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn interpolation_at_zero_nugget() {
        let xs: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin() + 2.0).collect();
        let data = Dataset::from_1d(&xs, &ys, 2, "interp").unwrap();
        let search = SearchConfig {
            nugget: 0.0,
            ..SearchConfig::default()
        };
        let model = fit_kriging(&data, KernelFamily::SquaredExponential, &search).unwrap();
        let pred = model.predict(data.x()).unwrap();
        for i in 0..xs.len() {
            assert!(
                (pred.mean[i] - ys[i]).abs() <= 1e-8 * (1.0 + ys[i].abs()),
                "training point {i} not reproduced: {} vs {}",
                pred.mean[i],
                ys[i]
            );
            assert!(pred.variance[i] >= 0.0);
            assert!(pred.variance[i] < 1e-8 * model.params().sigma2.max(1e-30));
        }
    }

    #[test]
    fn prior_reversion_far_from_single_point() {
        let data = Dataset::from_1d(&[0.0], &[5.0], 2, "one").unwrap();
        let model = KrigingModel::with_hyperparameters(data, sqexp(vec![1.0]), 0.0).unwrap();
        let xq = DMatrix::from_element(1, 1, 1e6);
        let pred = model.predict(&xq).unwrap();
        assert_relative_eq!(pred.mean[0], 5.0, max_relative = 1e-12);
        // n = 1 gives sigma2 = 0, so the far-field variance collapses too
        let expected = model.params().sigma2 * (1.0 + 1.0 / 1.0);
        assert_relative_eq!(pred.variance[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn fit_is_deterministic_bit_for_bit() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64 / 6.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (5.0 * x).cos()).collect();
        let data = Dataset::from_1d(&xs, &ys, 2, "det").unwrap();
        let search = SearchConfig::default().with_seed(11);
        let a = optimize_hyperparameters(&data, KernelFamily::Matern52, &search).unwrap();
        let b = optimize_hyperparameters(&data, KernelFamily::Matern52, &search).unwrap();
        assert_eq!(a.kernel.theta()[0].to_bits(), b.kernel.theta()[0].to_bits());
        assert_eq!(a.sigma2.to_bits(), b.sigma2.to_bits());
        assert_eq!(a.mu.to_bits(), b.mu.to_bits());
    }

    #[test]
    fn degenerate_constant_pair_is_deterministic() {
        let data = Dataset::from_1d(&[0.0, 1.0], &[4.0, 4.0], 2, "const").unwrap();
        let search = SearchConfig::default();
        let a = optimize_hyperparameters(&data, KernelFamily::SquaredExponential, &search).unwrap();
        let b = optimize_hyperparameters(&data, KernelFamily::SquaredExponential, &search).unwrap();
        assert_eq!(a.kernel.theta()[0].to_bits(), b.kernel.theta()[0].to_bits());
        assert_relative_eq!(a.mu, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn near_linear_trend_is_recovered() {
        // y = 2x + 1 with tiny deterministic wiggle; residuals after the fit
        // must stay below the wiggle scale
        let xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let noise = 1e-3;
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.0 * x + 1.0 + noise * ((i * 7919) as f64).sin())
            .collect();
        let data = Dataset::from_1d(&xs, &ys, 2, "lin").unwrap();
        let model =
            fit_kriging(&data, KernelFamily::SquaredExponential, &SearchConfig::default())
                .unwrap();
        let pred = model.predict(data.x()).unwrap();
        for i in 0..xs.len() {
            assert!((pred.mean[i] - ys[i]).abs() < noise);
        }
    }

    #[test]
    fn stored_likelihood_matches_recomputation() {
        let xs = [0.0, 0.3, 0.6, 1.0];
        let ys = [0.2, 0.8, -0.1, 0.5];
        let data = Dataset::from_1d(&xs, &ys, 2, "ll").unwrap();
        let model = fit_kriging(&data, KernelFamily::Matern32, &SearchConfig::default()).unwrap();
        let (ll, _, _) =
            log_marginal_likelihood(&data, &model.params().kernel, model.params().nugget)
                .unwrap();
        assert_eq!(model.log_likelihood().to_bits(), ll.to_bits());
    }

    #[test]
    fn duplicate_rows_with_zero_nugget_rejected() {
        let data = Dataset::from_1d(&[0.5, 0.5, 1.0], &[1.0, 2.0, 3.0], 2, "dup").unwrap();
        let search = SearchConfig {
            nugget: 0.0,
            ..SearchConfig::default()
        };
        assert!(matches!(
            fit_kriging(&data, KernelFamily::SquaredExponential, &search),
            Err(Error::DuplicateInputs { .. })
        ));
        // with a positive nugget the same data is allowed
        let search = SearchConfig::default().with_nugget(1e-6);
        assert!(fit_kriging(&data, KernelFamily::SquaredExponential, &search).is_ok());
    }

    #[test]
    fn translation_shifts_mean_and_keeps_variance() {
        let xs = [0.0, 0.2, 0.45, 0.8, 1.0];
        let ys = [1.0, 0.4, -0.3, 0.9, 1.4];
        let data = Dataset::from_1d(&xs, &ys, 2, "shift").unwrap();
        let kernel = sqexp(vec![3.0]);
        let base = KrigingModel::with_hyperparameters(data, kernel.clone(), 1e-10).unwrap();

        let c = 12.75;
        let ys_shift: Vec<f64> = ys.iter().map(|v| v + c).collect();
        let shifted_data = Dataset::from_1d(&xs, &ys_shift, 2, "shift+c").unwrap();
        let shifted = KrigingModel::with_hyperparameters(shifted_data, kernel, 1e-10).unwrap();

        let xq = DMatrix::from_column_slice(3, 1, &[0.1, 0.5, 1.3]);
        let p0 = base.predict(&xq).unwrap();
        let p1 = shifted.predict(&xq).unwrap();
        for j in 0..3 {
            assert_relative_eq!(p1.mean[j], p0.mean[j] + c, max_relative = 1e-10);
            assert_relative_eq!(
                p1.variance[j],
                p0.variance[j],
                max_relative = 1e-10,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn bounds_attach_correctly() {
        let pred = Prediction {
            mean: DVector::from_column_slice(&[1.0, 2.0]),
            variance: DVector::from_column_slice(&[4.0, 0.0]),
            lower: None,
            upper: None,
        }
        .with_bounds(1.96);
        let lower = pred.lower.unwrap();
        let upper = pred.upper.unwrap();
        assert_relative_eq!(lower[0], 1.0 - 1.96 * 2.0, max_relative = 1e-15);
        assert_relative_eq!(upper[0], 1.0 + 1.96 * 2.0, max_relative = 1e-15);
        assert_eq!(lower[1], 2.0);
        assert_eq!(upper[1], 2.0);
    }

    #[test]
    fn cached_factor_reconstructs_the_correlation_matrix() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (6.0 * x).sin()).collect();
        let data = Dataset::from_1d(&xs, &ys, 2, "chol").unwrap();
        let model = fit_kriging(&data, KernelFamily::Matern52, &SearchConfig::default()).unwrap();

        let l = model.factor.chol.l();
        let reconstructed = &l * l.transpose();
        let mut expected =
            kernel_matrix(&model.params().kernel, data.x(), data.x()).unwrap();
        for i in 0..6 {
            expected[(i, i)] += model.params().nugget;
        }
        let diff = (&reconstructed - &expected).norm();
        assert!(
            diff <= 1e-8 * expected.norm(),
            "factor reconstruction error {diff} too large"
        );
    }

    #[test]
    fn refit_on_own_training_predictions_is_stable() {
        let xs: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).exp()).collect();
        let data = Dataset::from_1d(&xs, &ys, 2, "idem").unwrap();
        let search = SearchConfig {
            nugget: 0.0,
            ..SearchConfig::default()
        };
        let model = fit_kriging(&data, KernelFamily::SquaredExponential, &search).unwrap();
        let pred = model.predict(data.x()).unwrap();
        let data2 = Dataset::from_1d(&xs, pred.mean.as_slice(), 2, "idem2").unwrap();
        let model2 = fit_kriging(&data2, KernelFamily::SquaredExponential, &search).unwrap();
        assert_relative_eq!(
            model2.params().mu,
            model.params().mu,
            max_relative = 1e-8
        );
    }
}
