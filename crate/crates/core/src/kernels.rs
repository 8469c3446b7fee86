//! Stationary correlation kernels and their PLS-projected parameterization.
//!
//! All kernel math lives here. `theta` holds one inverse squared lengthscale
//! per input dimension, so for the squared-exponential family
//!
//! ```text
//! r(x, x') = exp(-sum_l theta_l * (x_l - x'_l)^2)
//! ```
//!
//! The Matern variants reuse the same weighted squared distance
//! `q2 = sum_l theta_l * d_l^2` through `q = sqrt(nu * q2)`, which keeps a
//! single theta convention across families.
//!
//! When a [`PlsProjection`] is attached, `theta` lives in the projected space
//! (length `h`) and the kernel expands it to a full-dimension effective theta
//! via [`project_theta`] before evaluating distances.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pls::PlsProjection;

/// Floor applied to projected theta components so a zero PLS weight cannot
/// produce an exactly-zero (degenerate) inverse lengthscale.
pub const THETA_FLOOR: f64 = 1e-10;

/// Supported stationary correlation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
    Matern32,
}

impl Default for KernelFamily {
    fn default() -> Self {
        KernelFamily::SquaredExponential
    }
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared_exponential",
            KernelFamily::Matern52 => "matern52",
            KernelFamily::Matern32 => "matern32",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "squared_exponential" | "sqexp" | "rbf" | "gaussian" => {
                Ok(KernelFamily::SquaredExponential)
            }
            "matern52" | "matern_52" => Ok(KernelFamily::Matern52),
            "matern32" | "matern_32" => Ok(KernelFamily::Matern32),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel family '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel family plus its per-dimension theta vector and optional PLS
/// projection.
#[derive(Debug, Clone)]
pub struct KernelConfig {
    family: KernelFamily,
    theta: Vec<f64>,
    projection: Option<PlsProjection>,
}

impl KernelConfig {
    /// Unprojected kernel: `theta` has one component per input dimension.
    pub fn new(family: KernelFamily, theta: Vec<f64>) -> Result<Self> {
        check_theta(&theta)?;
        Ok(KernelConfig {
            family,
            theta,
            projection: None,
        })
    }

    /// Projected (KPLS) kernel: `theta` has one component per PLS component
    /// and is expanded to the input dimension on evaluation.
    pub fn with_projection(
        family: KernelFamily,
        theta: Vec<f64>,
        projection: PlsProjection,
    ) -> Result<Self> {
        check_theta(&theta)?;
        if theta.len() != projection.n_components() {
            return Err(Error::shape(
                format!("theta of length {}", projection.n_components()),
                format!("length {}", theta.len()),
            ));
        }
        Ok(KernelConfig {
            family,
            theta,
            projection: Some(projection),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Theta as stored: projected length `h` when a projection is attached,
    /// input dimension `d` otherwise.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn projection(&self) -> Option<&PlsProjection> {
        self.projection.as_ref()
    }

    /// Dimension of the points this kernel accepts.
    pub fn input_dim(&self) -> usize {
        match &self.projection {
            Some(p) => p.input_dim(),
            None => self.theta.len(),
        }
    }

    /// Full-dimension theta actually used in distance computations.
    pub fn effective_theta(&self) -> Result<Vec<f64>> {
        match &self.projection {
            Some(p) => project_theta(&self.theta, p),
            None => Ok(self.theta.clone()),
        }
    }
}

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidArgument("theta must not be empty".into()));
    }
    if theta.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Domain(format!(
            "every theta component must be finite and > 0, got {theta:?}"
        )));
    }
    Ok(())
}

/// Correlation value for a weighted squared distance `q2 >= 0`.
fn correlation(family: KernelFamily, q2: f64) -> f64 {
    match family {
        KernelFamily::SquaredExponential => (-q2).exp(),
        KernelFamily::Matern32 => {
            let q = (3.0 * q2).sqrt();
            (1.0 + q) * (-q).exp()
        }
        KernelFamily::Matern52 => {
            let q = (5.0 * q2).sqrt();
            (1.0 + q + q * q / 3.0) * (-q).exp()
        }
    }
}

fn weighted_sq_dist(theta: &[f64], x: &[f64], x_prime: &[f64]) -> f64 {
    let mut q2 = 0.0;
    for l in 0..theta.len() {
        let d = x[l] - x_prime[l];
        q2 += theta[l] * d * d;
    }
    q2
}

/// Correlation `r(x, x')` in `(0, 1]`, with `r(x, x) = 1` exactly.
pub fn kernel_eval(config: &KernelConfig, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    let d = config.input_dim();
    if x.len() != d || x_prime.len() != d {
        return Err(Error::shape(
            format!("points of dimension {d}"),
            format!("{} and {}", x.len(), x_prime.len()),
        ));
    }
    let theta = config.effective_theta()?;
    Ok(correlation(config.family, weighted_sq_dist(&theta, x, x_prime)))
}

/// Cross-correlation matrix with entry `(i, j) = r(x_i, x'_j)`.
///
/// Rows of `x` and `x_prime` are points. When both arguments are the same
/// matrix the result is exactly symmetric with a unit diagonal.
pub fn kernel_matrix(
    config: &KernelConfig,
    x: &DMatrix<f64>,
    x_prime: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let d = config.input_dim();
    if x.ncols() != d || x_prime.ncols() != d {
        return Err(Error::shape(
            format!("point matrices with {d} columns"),
            format!("{} and {}", x.ncols(), x_prime.ncols()),
        ));
    }
    let theta = config.effective_theta()?;
    let (n, m) = (x.nrows(), x_prime.nrows());
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut q2 = 0.0;
            for l in 0..d {
                let diff = x[(i, l)] - x_prime[(j, l)];
                q2 += theta[l] * diff * diff;
            }
            out[(i, j)] = correlation(config.family, q2);
        }
    }
    Ok(out)
}

/// Expand a projected theta (length `h`) to the input dimension `d`:
/// `theta_eff[l] = sum_k theta_h[k] * w[l][k]^2`, floored at [`THETA_FLOOR`].
pub fn project_theta(theta_h: &[f64], projection: &PlsProjection) -> Result<Vec<f64>> {
    check_theta(theta_h)?;
    if theta_h.len() != projection.n_components() {
        return Err(Error::shape(
            format!("theta of length {}", projection.n_components()),
            format!("length {}", theta_h.len()),
        ));
    }
    let w = projection.weights();
    let d = projection.input_dim();
    let mut out = vec![0.0; d];
    for l in 0..d {
        let mut acc = 0.0;
        for (k, th) in theta_h.iter().enumerate() {
            let wlk = w[(l, k)];
            acc += th * wlk * wlk;
        }
        out[l] = acc.max(THETA_FLOOR);
    }
    Ok(out)
}
