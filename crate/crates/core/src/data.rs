//! Datasets, CSV ingestion, deterministic splitting, and closed-form
//! low-fidelity generators.
//!
//! # CSV schema
//!
//! UTF-8, comma separated, header required, `#` starts a comment line.
//! A column named `fidelity` (any case) is the integer fidelity tag; of the
//! remaining columns the last one is the response and everything before it is
//! an input dimension. The canonical writer emits `x1..xd,y,fidelity`.
//! Floats are written in shortest round-trip decimal form, so a
//! write-then-read cycle reproduces every value bit-exactly.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Points, responses, and a fidelity tag (1 = least accurate).
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    fidelity: u32,
    label: String,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, fidelity: u32, label: impl Into<String>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InsufficientData("dataset has no rows".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::shape(
                format!("{} responses", x.nrows()),
                format!("{}", y.len()),
            ));
        }
        if x.ncols() == 0 {
            return Err(Error::Schema("dataset has no input columns".into()));
        }
        if fidelity == 0 {
            return Err(Error::InvalidArgument("fidelity levels start at 1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("dataset contains NaN or infinity".into()));
        }
        Ok(Dataset {
            x,
            y,
            fidelity,
            label: label.into(),
        })
    }

    /// Build from row-major points.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64], fidelity: u32, label: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InsufficientData("dataset has no rows".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::shape(format!("rows of width {d}"), "ragged rows"));
        }
        let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Dataset::new(x, DVector::from_column_slice(y), fidelity, label)
    }

    /// 1-D convenience constructor.
    pub fn from_1d(xs: &[f64], ys: &[f64], fidelity: u32, label: impl Into<String>) -> Result<Self> {
        let x = DMatrix::from_column_slice(xs.len(), 1, xs);
        Dataset::new(x, DVector::from_column_slice(ys), fidelity, label)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn fidelity(&self) -> u32 {
        self.fidelity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.x[(i, j)]).collect()
    }

    pub fn with_fidelity(mut self, fidelity: u32) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn subset(&self, idx: &[usize], label: String) -> Dataset {
        let x = DMatrix::from_fn(idx.len(), self.dim(), |i, j| self.x[(idx[i], j)]);
        let y = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.y[i]));
        Dataset {
            x,
            y,
            fidelity: self.fidelity,
            label,
        }
    }
}

/// Deterministic train/test split configuration.
///
/// The shuffle is a Fisher–Yates pass over the row indices driven by
/// `ChaCha20(seed)` with `j = next_u64() mod (i + 1)` (identifier
/// [`SplitSpec::ALGORITHM`]); the first `round(n * test_fraction)` shuffled
/// indices become the test set. Row order within each part follows the input.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub const ALGORITHM: &'static str = "fisher-yates/chacha20/v1";

    pub fn new(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            seed,
        }
    }
}

/// Split into `(train, test)` per `spec`. Deterministic given the seed.
pub fn split_dataset(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {}",
            spec.test_fraction
        )));
    }
    let n = data.n();
    if n < 2 {
        return Err(Error::InsufficientData(
            "need at least 2 rows to split".into(),
        ));
    }
    let n_test = (n as f64 * spec.test_fraction).round() as usize;
    if n_test == 0 {
        return Err(Error::InvalidArgument(format!(
            "test fraction {} selects no test rows out of {n}",
            spec.test_fraction
        )));
    }
    if n_test >= n {
        return Err(Error::InvalidArgument(format!(
            "test fraction {} leaves no training rows out of {n}",
            spec.test_fraction
        )));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    let mut test_idx: Vec<usize> = idx[..n_test].to_vec();
    let mut train_idx: Vec<usize> = idx[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();

    let train = data.subset(&train_idx, format!("{}/train", data.label));
    let test = data.subset(&test_idx, format!("{}/test", data.label));
    Ok((train, test))
}

/// Closed-form low-fidelity sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LfKind {
    /// Linear thermal-conductivity line `lambda(T) = 0.0151*T + 6.004`
    /// (W m^-1 K^-1, T in kelvin).
    WhiteU3Si2,
    /// Low-accuracy companion of the 1-D Forrester benchmark.
    ForresterLow,
    /// `y = slope * x + intercept`.
    AffineCustom { slope: f64, intercept: f64 },
}

/// A low-fidelity formula together with its validity range.
#[derive(Debug, Clone, Copy)]
pub struct LfFormula {
    pub kind: LfKind,
    pub valid_range: (f64, f64),
}

impl LfFormula {
    /// The empirical conductivity line, valid over 300..=1773 K.
    pub fn white() -> Self {
        LfFormula {
            kind: LfKind::WhiteU3Si2,
            valid_range: (300.0, 1773.0),
        }
    }

    pub fn forrester_low() -> Self {
        LfFormula {
            kind: LfKind::ForresterLow,
            valid_range: (0.0, 1.0),
        }
    }

    pub fn affine(slope: f64, intercept: f64, valid_range: (f64, f64)) -> Result<Self> {
        if !(valid_range.0 < valid_range.1) {
            return Err(Error::InvalidArgument(format!(
                "degenerate valid range {valid_range:?}"
            )));
        }
        Ok(LfFormula {
            kind: LfKind::AffineCustom { slope, intercept },
            valid_range,
        })
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            LfKind::WhiteU3Si2 => white_lambda(x),
            LfKind::ForresterLow => forrester_low_raw(x),
            LfKind::AffineCustom { slope, intercept } => slope * x + intercept,
        }
    }
}

/// How [`generate_lf`] treats grid points outside the formula's range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangePolicy {
    /// Error on the first out-of-range point.
    Strict,
    /// Evaluate anyway and report the offending points.
    WarnOnly,
}

/// The conductivity line, evaluated as `(151*T + 60040) / 10^4` so the
/// decimal coefficients stay exact in binary floating point.
pub fn white_lambda(t: f64) -> f64 {
    (151.0 * t + 60040.0) / 1e4
}

fn forrester_high_raw(x: f64) -> f64 {
    let a = 6.0 * x - 2.0;
    a * a * (12.0 * x - 4.0).sin()
}

fn forrester_low_raw(x: f64) -> f64 {
    0.5 * forrester_high_raw(x) + 10.0 * (x - 0.5) - 5.0
}

/// Fidelity selector for the Forrester benchmark pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForresterLevel {
    High,
    Low,
}

/// The 1-D Forrester benchmark on `[0, 1]`:
/// high `(6x-2)^2 sin(12x-4)`, low `0.5*high + 10(x-0.5) - 5`.
pub fn forrester(x: f64, level: ForresterLevel) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "forrester is defined on [0, 1], got {x}"
        )));
    }
    Ok(match level {
        ForresterLevel::High => forrester_high_raw(x),
        ForresterLevel::Low => forrester_low_raw(x),
    })
}

/// Evaluate `formula` on a 1-D grid, tagging the result fidelity 1.
///
/// Returns the dataset and the list of out-of-range grid points (empty under
/// [`RangePolicy::Strict`], which errors instead).
pub fn generate_lf(
    formula: &LfFormula,
    grid: &[f64],
    policy: RangePolicy,
) -> Result<(Dataset, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty generation grid".into()));
    }
    let (lo, hi) = formula.valid_range;
    let mut outside = Vec::new();
    for &g in grid {
        if !g.is_finite() {
            return Err(Error::Domain(format!("non-finite grid point {g}")));
        }
        if g < lo || g > hi {
            if policy == RangePolicy::Strict {
                return Err(Error::OutOfRange(format!(
                    "grid point {g} outside [{lo}, {hi}]"
                )));
            }
            outside.push(g);
        }
    }
    let ys: Vec<f64> = grid.iter().map(|&g| formula.eval_unchecked(g)).collect();
    let label = match formula.kind {
        LfKind::WhiteU3Si2 => "white-line",
        LfKind::ForresterLow => "forrester-low",
        LfKind::AffineCustom { .. } => "affine-lf",
    };
    let data = Dataset::from_1d(grid, &ys, 1, label)?;
    Ok((data, outside))
}

/// Uniform `start..stop` grid (inclusive start, exclusive stop).
pub fn range_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !start.is_finite() || !stop.is_finite() || stop <= start
    {
        return Err(Error::InvalidArgument(format!(
            "bad grid spec {start}:{stop}:{step}"
        )));
    }
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let v = start + k as f64 * step;
        if v >= stop {
            break;
        }
        out.push(v);
        k += 1;
        if k > 10_000_000 {
            return Err(Error::InvalidArgument(
                "grid spec generates more than 1e7 points".into(),
            ));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "grid spec {start}:{stop}:{step} generates no points"
        )));
    }
    Ok(out)
}

/// Standard normal draw via Box–Muller on 53-bit uniforms; used so generated
/// datasets never depend on distribution-crate internals.
fn standard_normal(rng: &mut rand_chacha::ChaCha20Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    let u2 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Synthetic high-fidelity analogue of a sparse conductivity measurement
/// campaign, plus a matching nested low-fidelity design.
///
/// The high-fidelity set has 12 points at uniformly spaced temperatures on
/// [400, 1300] K with responses
/// `0.0151*T + 6.004 + 1.2*sin((T - 400)/300) + eps`, `eps ~ N(0, 0.15^2)`
/// drawn from `ChaCha20(seed)`. The low-fidelity set evaluates the linear
/// line on a 25 K grid over [300, 1500) merged with the 12 high-fidelity
/// temperatures, so the pair is nested by construction. Clearly synthetic;
/// fidelity tags are 1 (line) and 2 (analogue measurements).
pub fn u3si2_analogue(seed: u64) -> (Dataset, Dataset) {
    let n_hf = 12usize;
    let (lo, hi) = (400.0, 1300.0);
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut hf_x = Vec::with_capacity(n_hf);
    let mut hf_y = Vec::with_capacity(n_hf);
    for i in 0..n_hf {
        let t = lo + (hi - lo) * i as f64 / (n_hf as f64 - 1.0);
        let noise = 0.15 * standard_normal(&mut rng);
        hf_x.push(t);
        hf_y.push(white_lambda(t) + 1.2 * ((t - 400.0) / 300.0).sin() + noise);
    }
    let hf = Dataset::from_1d(&hf_x, &hf_y, 2, "u3si2-analogue").expect("fixed-size analogue");

    let mut lf_x = range_grid(300.0, 1500.0, 25.0).expect("static grid");
    for &t in &hf_x {
        if !lf_x.iter().any(|&g| g == t) {
            lf_x.push(t);
        }
    }
    lf_x.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let lf_y: Vec<f64> = lf_x.iter().map(|&t| white_lambda(t)).collect();
    let lf = Dataset::from_1d(&lf_x, &lf_y, 1, "white-line").expect("fixed-size analogue");

    (lf, hf)
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct ParsedRows {
    dim: usize,
    rows: Vec<(Vec<f64>, f64, u32)>,
}

fn parse_csv(path: &Path) -> Result<ParsedRows> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
        .clone();
    let mut fidelity_col = None;
    for (i, h) in headers.iter().enumerate() {
        if h.eq_ignore_ascii_case("fidelity") {
            fidelity_col = Some(i);
        }
    }
    let value_cols: Vec<usize> = (0..headers.len())
        .filter(|i| Some(*i) != fidelity_col)
        .collect();
    if value_cols.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least one input column and a response column, header has {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let y_col = *value_cols.last().expect("checked non-empty");
    let x_cols = &value_cols[..value_cols.len() - 1];

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let raw = &record[i];
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column '{}': cannot parse '{raw}' as a number", &headers[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column '{}': non-finite value '{raw}'", &headers[i]),
                });
            }
            Ok(v)
        };
        let xs: Vec<f64> = x_cols.iter().map(|&i| field(i)).collect::<Result<_>>()?;
        let y = field(y_col)?;
        let fid = match fidelity_col {
            None => 2,
            Some(i) => {
                let raw = &record[i];
                let f: u32 = raw.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("fidelity '{raw}' is not a positive integer"),
                })?;
                if f == 0 {
                    return Err(Error::Parse {
                        line,
                        message: "fidelity levels start at 1".into(),
                    });
                }
                f
            }
        };
        rows.push((xs, y, fid));
    }
    if rows.is_empty() {
        return Err(Error::Schema(format!("{} contains no data rows", path.display())));
    }
    Ok(ParsedRows {
        dim: x_cols.len(),
        rows,
    })
}

fn label_from(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Load a single-fidelity CSV file. Files mixing several fidelity levels are
/// rejected; use [`load_datasets_by_fidelity`] for those.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let parsed = parse_csv(path)?;
    let fid = parsed.rows[0].2;
    if parsed.rows.iter().any(|r| r.2 != fid) {
        return Err(Error::Schema(format!(
            "{} mixes fidelity levels; load it with the by-fidelity loader",
            path.display()
        )));
    }
    build_dataset(&parsed.rows, parsed.dim, fid, label_from(path))
}

/// Load a CSV file and group rows into one dataset per fidelity level,
/// ordered from least to most accurate. Row order within each level follows
/// the file.
pub fn load_datasets_by_fidelity(path: impl AsRef<Path>) -> Result<Vec<Dataset>> {
    let path = path.as_ref();
    let parsed = parse_csv(path)?;
    let mut levels: Vec<u32> = parsed.rows.iter().map(|r| r.2).collect();
    levels.sort_unstable();
    levels.dedup();
    let label = label_from(path);
    levels
        .into_iter()
        .map(|fid| {
            let rows: Vec<_> = parsed
                .rows
                .iter()
                .filter(|r| r.2 == fid)
                .cloned()
                .collect();
            build_dataset(&rows, parsed.dim, fid, format!("{label}/f{fid}"))
        })
        .collect()
}

fn build_dataset(rows: &[(Vec<f64>, f64, u32)], dim: usize, fid: u32, label: String) -> Result<Dataset> {
    let x = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i].0[j]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    Dataset::new(x, y, fid, label)
}

/// Write one or more datasets into a single canonical CSV file
/// (`x1..xd,y,fidelity`, shortest round-trip decimals).
pub fn write_datasets(path: impl AsRef<Path>, datasets: &[&Dataset]) -> Result<()> {
    let path = path.as_ref();
    let Some(first) = datasets.first() else {
        return Err(Error::InvalidArgument("nothing to write".into()));
    };
    let d = first.dim();
    if datasets.iter().any(|ds| ds.dim() != d) {
        return Err(Error::shape(
            format!("datasets of dimension {d}"),
            "mixed dimensions",
        ));
    }
    let mut out = String::new();
    for j in 0..d {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("y,fidelity\n");
    for ds in datasets {
        for i in 0..ds.n() {
            for j in 0..d {
                out.push_str(&format!("{},", ds.x()[(i, j)]));
            }
            out.push_str(&format!("{},{}\n", ds.y()[i], ds.fidelity()));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a single dataset in the canonical schema.
pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    write_datasets(path, &[dataset])
}
