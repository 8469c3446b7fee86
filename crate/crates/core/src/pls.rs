//! Single-response partial least squares (PLS1) fitted with NIPALS.
//!
//! The projection it produces feeds the KPLS kernel variants: each weight
//! column points along a direction of input space that covaries with the
//! response, and [`crate::kernels::project_theta`] turns per-component
//! inverse lengthscales back into per-dimension ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A fitted PLS projection: `d x h` weight matrix with unit-norm columns plus
/// the centering constants used during fitting.
#[derive(Debug, Clone)]
pub struct PlsProjection {
    weights: DMatrix<f64>,
    x_means: Vec<f64>,
    y_mean: f64,
}

impl PlsProjection {
    /// Rebuild a projection from stored parts, revalidating the invariants
    /// (unit-norm columns, consistent dimensions).
    pub fn from_parts(weights: DMatrix<f64>, x_means: Vec<f64>, y_mean: f64) -> Result<Self> {
        if weights.ncols() == 0 || weights.nrows() == 0 {
            return Err(Error::InvalidArgument("empty PLS weight matrix".into()));
        }
        if weights.ncols() > weights.nrows() {
            return Err(Error::InvalidArgument(format!(
                "more PLS components ({}) than input dimensions ({})",
                weights.ncols(),
                weights.nrows()
            )));
        }
        if x_means.len() != weights.nrows() {
            return Err(Error::shape(
                format!("{} centering means", weights.nrows()),
                format!("{}", x_means.len()),
            ));
        }
        for k in 0..weights.ncols() {
            let norm = weights.column(k).norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "PLS weight column {k} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(PlsProjection {
            weights,
            x_means,
            y_mean,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn x_means(&self) -> &[f64] {
        &self.x_means
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }
}

/// Fit a PLS1 projection with `h` components on `(x, y)`.
///
/// NIPALS on centered data: `w_k` is the normalized cross-covariance
/// `X_k^T y_k`, scores are `t_k = X_k w_k`, and `X` is deflated by the rank-one
/// update `t_k p_k^T` between components. The sign of each weight column is
/// fixed so its largest-magnitude entry is positive.
pub fn pls_fit(x: &DMatrix<f64>, y: &[f64], h: usize) -> Result<PlsProjection> {
    let (n, d) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::shape(
            format!("{n} responses"),
            format!("{}", y.len()),
        ));
    }
    if n < 2 {
        return Err(Error::InsufficientData(
            "PLS needs at least 2 samples".into(),
        ));
    }
    let h_max = d.min(n - 1);
    if h == 0 || h > h_max {
        return Err(Error::InvalidArgument(format!(
            "component count {h} outside 1..={h_max} for {n} samples in {d} dimensions"
        )));
    }

    let x_means: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let mut xc = x.clone();
    for j in 0..d {
        for i in 0..n {
            xc[(i, j)] -= x_means[j];
        }
    }
    let mut yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    if yc.norm_squared() <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateResponse(
            "response has zero variance".into(),
        ));
    }

    let mut weights = DMatrix::zeros(d, h);
    for k in 0..h {
        let mut w: DVector<f64> = xc.transpose() * &yc;
        let norm = w.norm();
        if norm <= f64::MIN_POSITIVE.sqrt() {
            return Err(Error::DegenerateResponse(format!(
                "component {k}: inputs carry no covariance with the response"
            )));
        }
        w /= norm;
        fix_sign(&mut w);

        let t = &xc * &w;
        let tt = t.norm_squared();
        if tt <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateResponse(format!(
                "component {k}: zero score vector"
            )));
        }
        let p = xc.transpose() * &t / tt;
        xc -= &t * p.transpose();
        let c = t.dot(&yc) / tt;
        yc -= c * &t;

        weights.set_column(k, &w);
    }

    PlsProjection::from_parts(weights, x_means, y_mean)
}

/// Flip `w` so its largest-magnitude entry is positive (first such entry on
/// ties).
fn fix_sign(w: &mut DVector<f64>) {
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, v) in w.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if w[idx] < 0.0 {
        *w = -&*w;
    }
}
