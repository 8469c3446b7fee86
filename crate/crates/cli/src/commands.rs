//! Subcommand implementations.

use std::path::{Path, PathBuf};

use mfkrig::{
    compare_models, fit_kriging, fit_mfk, generate_lf, load_dataset, load_model, save_kriging,
    save_mfk, split_dataset, u3si2_analogue, write_dataset, AnyModel, Dataset, Error, EvalReport,
    ForresterLevel, KernelFamily, LfFormula, MfkVariant, NestingPolicy, RangePolicy, Result,
    SearchConfig, SplitSpec, Surrogate,
};
use nalgebra::DMatrix;
use serde_json::json;

use crate::gridspec::{parse_grid, parse_points};
use crate::manifest::{sibling_manifest_path, write_manifest};
use crate::svg::{render, PlotSpec};
use crate::{CompareArgs, EvalArgs, FitArgs, GenArgs, GenKind, PlotArgs, SplitArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Kriging,
    Mfk(MfkVariant),
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Kriging => "kriging",
            Method::Mfk(v) => v.name(),
        }
    }
}

fn parse_method(s: &str) -> Result<Method> {
    if s.eq_ignore_ascii_case("kriging") {
        Ok(Method::Kriging)
    } else {
        Ok(Method::Mfk(s.parse()?))
    }
}

/// `MFKRIG_SEED` beats the flag when set.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("MFKRIG_SEED") {
        Err(_) => Ok(flag),
        Ok(raw) => raw.trim().parse::<u64>().map_err(|_| {
            Error::InvalidArgument(format!("MFKRIG_SEED='{raw}' is not a 64-bit integer"))
        }),
    }
}

fn parse_lf_formula(name: &str) -> Result<LfFormula> {
    match name.to_ascii_lowercase().replace('_', "-").as_str() {
        "white" => Ok(LfFormula::white()),
        "forrester-low" | "forrester" => Ok(LfFormula::forrester_low()),
        other => Err(Error::InvalidArgument(format!(
            "unknown low-fidelity formula '{other}' (expected white or forrester-low)"
        ))),
    }
}

/// Resolve the low-fidelity dataset for multi-fidelity fits, tagging it as
/// fidelity level 1 regardless of file tags (its role is explicit here).
fn resolve_lf(
    lf: &Option<PathBuf>,
    lf_formula: &Option<String>,
    lf_grid: &Option<String>,
) -> Result<Dataset> {
    match (lf, lf_formula) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "--lf and --lf-formula are mutually exclusive".into(),
        )),
        (Some(path), None) => Ok(load_dataset(path)?.with_fidelity(1)),
        (None, Some(name)) => {
            let formula = parse_lf_formula(name)?;
            let spec = lf_grid.as_ref().ok_or_else(|| {
                Error::InvalidArgument("--lf-formula requires --lf-grid".into())
            })?;
            let grid = parse_grid(spec)?;
            let (data, _) = generate_lf(&formula, &grid, RangePolicy::Strict)?;
            Ok(data)
        }
        (None, None) => Err(Error::InvalidArgument(
            "multi-fidelity methods need --lf or --lf-formula".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn search_config(
    seed: u64,
    restarts: usize,
    max_iters: usize,
    nugget: f64,
    pls_components: Option<usize>,
) -> SearchConfig {
    SearchConfig {
        n_restarts: restarts,
        max_iters,
        seed,
        nugget,
        pls_components,
        ..SearchConfig::default()
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// File stems as model ids, de-duplicated deterministically.
fn model_ids(paths: &[PathBuf]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::with_capacity(paths.len());
    for path in paths {
        let base = file_stem(path);
        let mut id = base.clone();
        let mut k = 2;
        while ids.contains(&id) {
            id = format!("{base}#{k}");
            k += 1;
        }
        ids.push(id);
    }
    ids
}

fn fit_one(
    method: Method,
    family: KernelFamily,
    hf: &Dataset,
    lf: Option<&Dataset>,
    search: &SearchConfig,
    nesting: NestingPolicy,
) -> Result<AnyModel> {
    match method {
        Method::Kriging => Ok(AnyModel::Kriging(fit_kriging(hf, family, search)?)),
        Method::Mfk(variant) => {
            let lf = lf.ok_or_else(|| {
                Error::InvalidArgument("multi-fidelity methods need --lf or --lf-formula".into())
            })?;
            let model = fit_mfk(
                &[lf.clone(), hf.clone()],
                variant,
                family,
                search,
                nesting,
            )?;
            Ok(AnyModel::Mfk(model))
        }
    }
}

fn describe_model(model: &AnyModel) {
    match model {
        AnyModel::Kriging(m) => {
            let p = m.params();
            println!("fitted kriging model on '{}' (n={})", m.training().label(), m.training().n());
            println!(
                "  kernel: {} theta={:?}",
                p.kernel.family(),
                p.kernel.theta()
            );
            println!(
                "  sigma2={:.6e} nugget={:.1e} mu={:.6}",
                p.sigma2, p.nugget, p.mu
            );
            println!("  log-likelihood: {:.6}", m.log_likelihood());
            for w in m.warnings() {
                println!("  warning: {w}");
            }
        }
        AnyModel::Mfk(m) => {
            println!(
                "fitted {} stack with {} levels, rho={:?}",
                m.variant(),
                m.levels().len(),
                m.rho()
            );
            for (i, level) in m.levels().iter().enumerate() {
                println!(
                    "  level {}: '{}' n={} kernel={} theta={:?} sigma2={:.6e} nugget={:.1e} ll={:.6}",
                    i + 1,
                    level.training().label(),
                    level.training().n(),
                    level.kernel().family(),
                    level.kernel().theta(),
                    level.sigma2(),
                    level.nugget(),
                    level.log_likelihood()
                );
            }
            for w in m.warnings() {
                println!("  warning: {w}");
            }
        }
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let method = parse_method(&args.method)?;
    let family: KernelFamily = args.kernel.parse()?;
    let seed = effective_seed(args.seed)?;
    let search = search_config(
        seed,
        args.restarts,
        args.max_iters,
        args.nugget,
        args.pls_components,
    );
    let nesting = NestingPolicy {
        strict: !args.allow_non_nested,
        tol: args.nesting_tol,
    };

    let hf = load_dataset(&args.hf)?.with_fidelity(2);
    let lf = match method {
        Method::Kriging => None,
        Method::Mfk(_) => Some(resolve_lf(&args.lf, &args.lf_formula, &args.lf_grid)?),
    };

    let model = fit_one(method, family, &hf, lf.as_ref(), &search, nesting)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    match &model {
        AnyModel::Kriging(m) => save_kriging(&args.out, m)?,
        AnyModel::Mfk(m) => save_mfk(&args.out, m)?,
    }
    describe_model(&model);
    println!("wrote {}", args.out.display());

    let config = json!({
        "method": method.name(),
        "hf": args.hf.display().to_string(),
        "lf": args.lf.as_ref().map(|p| p.display().to_string()),
        "lf_formula": args.lf_formula,
        "lf_grid": args.lf_grid,
        "out": args.out.display().to_string(),
        "kernel": family.name(),
        "seed": seed,
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "nugget": args.nugget,
        "pls_components": args.pls_components,
        "allow_non_nested": args.allow_non_nested,
        "nesting_tol": args.nesting_tol,
    });
    write_manifest(
        &sibling_manifest_path(&args.out),
        "fit",
        Some(seed),
        config,
        &[args.out.clone()],
    )
}

fn write_report(out_dir: &Path, report: &EvalReport) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join("report.json");
    let txt_path = out_dir.join("report.txt");
    std::fs::write(&json_path, report.to_json())?;
    std::fs::write(&txt_path, report.to_table())?;
    Ok((json_path, txt_path))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let test = load_dataset(&args.test)?;
    let models: Vec<AnyModel> = args
        .models
        .iter()
        .map(load_model)
        .collect::<Result<Vec<_>>>()?;
    let ids = model_ids(&args.models);
    let entries: Vec<(&str, &dyn Surrogate)> = ids
        .iter()
        .zip(&models)
        .map(|(id, m)| (id.as_str(), m as &dyn Surrogate))
        .collect();

    let mut report = compare_models(&entries, &test, args.z)?;
    if let Some(seed) = args.split_seed {
        report = report.with_split_seed(seed);
    }
    let (json_path, txt_path) = write_report(&args.out_dir, &report)?;
    for e in &report.entries {
        println!("{}: rmsd={:.6} coverage={:.3}", e.id, e.rmsd, e.coverage);
    }
    print!("{}", report.to_table());
    println!("wrote {} and {}", json_path.display(), txt_path.display());

    let config = json!({
        "models": args.models.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "test": args.test.display().to_string(),
        "z": args.z,
        "out_dir": args.out_dir.display().to_string(),
        "split_seed": args.split_seed,
    });
    write_manifest(
        &args.out_dir.join("manifest.json"),
        "eval",
        args.split_seed,
        config,
        &[json_path, txt_path],
    )
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    if model.input_dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "plotting needs a 1-D model, this one has {} input dimensions",
            model.input_dim()
        )));
    }
    if !(args.z > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "z multiplier must be > 0, got {}",
            args.z
        )));
    }
    let grid = parse_grid(&args.grid)?;
    let xq = DMatrix::from_column_slice(grid.len(), 1, &grid);
    let pred = model.predict(&xq)?.with_bounds(args.z);
    let lower = pred.lower.as_ref().expect("bounds attached");
    let upper = pred.upper.as_ref().expect("bounds attached");

    // curve CSV twin: same numbers the chart is drawn from
    let mut csv = String::from("x,mean,variance,lower,upper\n");
    for i in 0..grid.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            grid[i], pred.mean[i], pred.variance[i], lower[i], upper[i]
        ));
    }
    if let Some(parent) = args.out_csv.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&args.out_csv, &csv)?;

    let dataset_points = |d: &Dataset| -> Vec<(f64, f64)> {
        (0..d.n()).map(|i| (d.x()[(i, 0)], d.y()[i])).collect()
    };
    let (train, lf) = match &model {
        AnyModel::Kriging(m) => (dataset_points(m.training()), Vec::new()),
        AnyModel::Mfk(m) => (
            dataset_points(m.top_training()),
            dataset_points(m.levels()[0].training()),
        ),
    };
    let test = match &args.test {
        None => Vec::new(),
        Some(path) => dataset_points(&load_dataset(path)?),
    };

    let spec = PlotSpec {
        title: args
            .title
            .clone()
            .unwrap_or_else(|| file_stem(&args.model)),
        x_label: "x".into(),
        y_label: "y".into(),
        grid: grid.clone(),
        mean: pred.mean.iter().copied().collect(),
        lower: lower.iter().copied().collect(),
        upper: upper.iter().copied().collect(),
        train,
        lf,
        test,
        band_label: format!("±{}σ", args.z),
    };
    if let Some(parent) = args.out_svg.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&args.out_svg, render(&spec))?;
    println!(
        "wrote {} and {} ({} grid points)",
        args.out_svg.display(),
        args.out_csv.display(),
        grid.len()
    );

    let config = json!({
        "model": args.model.display().to_string(),
        "grid": args.grid,
        "out_svg": args.out_svg.display().to_string(),
        "out_csv": args.out_csv.display().to_string(),
        "z": args.z,
        "test": args.test.as_ref().map(|p| p.display().to_string()),
        "title": args.title,
    });
    write_manifest(
        &sibling_manifest_path(&args.out_svg),
        "plot",
        None,
        config,
        &[args.out_svg.clone(), args.out_csv.clone()],
    )
}

pub fn cmd_split(args: &SplitArgs) -> Result<()> {
    let seed = effective_seed(args.seed)?;
    let data = load_dataset(&args.data)?;
    let (train, test) = split_dataset(&data, &SplitSpec::new(args.test_fraction, seed))?;
    write_dataset(&args.train_out, &train)?;
    write_dataset(&args.test_out, &test)?;
    println!(
        "split {} rows into {} train / {} test (seed {seed}, algorithm {})",
        data.n(),
        train.n(),
        test.n(),
        SplitSpec::ALGORITHM
    );

    let config = json!({
        "data": args.data.display().to_string(),
        "test_fraction": args.test_fraction,
        "seed": seed,
        "algorithm": SplitSpec::ALGORITHM,
        "train_out": args.train_out.display().to_string(),
        "test_out": args.test_out.display().to_string(),
    });
    write_manifest(
        &sibling_manifest_path(&args.train_out),
        "split",
        Some(seed),
        config,
        &[args.train_out.clone(), args.test_out.clone()],
    )
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    match &args.kind {
        GenKind::White {
            grid,
            out,
            warn_only,
        } => {
            let points = parse_grid(grid)?;
            let policy = if *warn_only {
                RangePolicy::WarnOnly
            } else {
                RangePolicy::Strict
            };
            let (data, outside) = generate_lf(&LfFormula::white(), &points, policy)?;
            for p in &outside {
                eprintln!("warning: {p} K lies outside the validity range of the line");
            }
            write_dataset(out, &data)?;
            println!("wrote {} ({} rows, fidelity 1)", out.display(), data.n());
            let config = json!({
                "formula": "white",
                "grid": grid,
                "warn_only": warn_only,
                "out": out.display().to_string(),
            });
            write_manifest(
                &sibling_manifest_path(out),
                "gen",
                None,
                config,
                &[out.clone()],
            )
        }
        GenKind::Forrester {
            level,
            grid,
            points,
            out,
        } => {
            let lvl = match level.to_ascii_lowercase().as_str() {
                "high" => ForresterLevel::High,
                "low" => ForresterLevel::Low,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "forrester level must be high or low, got '{other}'"
                    )))
                }
            };
            let xs = match (grid, points) {
                (Some(spec), None) => parse_grid(spec)?,
                (None, Some(list)) => parse_points(list)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "give exactly one of --grid or --points".into(),
                    ))
                }
            };
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| mfkrig::forrester(x, lvl))
                .collect::<Result<_>>()?;
            let (fid, label) = match lvl {
                ForresterLevel::High => (2, "forrester-high"),
                ForresterLevel::Low => (1, "forrester-low"),
            };
            let data = Dataset::from_1d(&xs, &ys, fid, label)?;
            write_dataset(out, &data)?;
            println!("wrote {} ({} rows, fidelity {fid})", out.display(), data.n());
            let config = json!({
                "formula": "forrester",
                "level": level,
                "grid": grid,
                "points": points,
                "out": out.display().to_string(),
            });
            write_manifest(
                &sibling_manifest_path(out),
                "gen",
                None,
                config,
                &[out.clone()],
            )
        }
        GenKind::U3si2Analogue { out, lf_out, seed } => {
            let seed = effective_seed(*seed)?;
            let (lf, hf) = u3si2_analogue(seed);
            write_dataset(out, &hf)?;
            println!("wrote {} ({} rows, fidelity 2)", out.display(), hf.n());
            let mut artifacts = vec![out.clone()];
            if let Some(lf_path) = lf_out {
                write_dataset(lf_path, &lf)?;
                println!("wrote {} ({} rows, fidelity 1)", lf_path.display(), lf.n());
                artifacts.push(lf_path.clone());
            }
            let config = json!({
                "formula": "u3si2-analogue",
                "seed": seed,
                "out": out.display().to_string(),
                "lf_out": lf_out.as_ref().map(|p| p.display().to_string()),
            });
            write_manifest(
                &sibling_manifest_path(out),
                "gen",
                Some(seed),
                config,
                &artifacts,
            )
        }
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|m| parse_method(m.trim()))
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    let family: KernelFamily = args.kernel.parse()?;
    let seed = effective_seed(args.seed)?;
    let search = search_config(
        seed,
        args.restarts,
        args.max_iters,
        args.nugget,
        args.pls_components,
    );
    let nesting = NestingPolicy {
        strict: !args.allow_non_nested,
        tol: args.nesting_tol,
    };

    let hf = load_dataset(&args.hf)?.with_fidelity(2);
    let test = load_dataset(&args.test)?;
    let lf = if methods.iter().any(|m| matches!(m, Method::Mfk(_))) {
        Some(resolve_lf(&args.lf, &args.lf_formula, &args.lf_grid)?)
    } else {
        None
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let mut fitted: Vec<(String, AnyModel, PathBuf)> = Vec::with_capacity(methods.len());
    for method in &methods {
        let model = fit_one(*method, family, &hf, lf.as_ref(), &search, nesting)?;
        let path = args.out_dir.join(format!("{}.json", method.name()));
        match &model {
            AnyModel::Kriging(m) => save_kriging(&path, m)?,
            AnyModel::Mfk(m) => save_mfk(&path, m)?,
        }
        fitted.push((method.name().to_string(), model, path));
    }

    let entries: Vec<(&str, &dyn Surrogate)> = fitted
        .iter()
        .map(|(id, m, _)| (id.as_str(), m as &dyn Surrogate))
        .collect();
    let mut report = compare_models(&entries, &test, args.z)?;
    if let Some(s) = args.split_seed {
        report = report.with_split_seed(s);
    }
    let (json_path, txt_path) = write_report(&args.out_dir, &report)?;
    print!("{}", report.to_table());
    println!("wrote {} and {}", json_path.display(), txt_path.display());

    let mut artifacts: Vec<PathBuf> = fitted.iter().map(|(_, _, p)| p.clone()).collect();
    artifacts.push(json_path);
    artifacts.push(txt_path);
    let config = json!({
        "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "hf": args.hf.display().to_string(),
        "lf": args.lf.as_ref().map(|p| p.display().to_string()),
        "lf_formula": args.lf_formula,
        "lf_grid": args.lf_grid,
        "test": args.test.display().to_string(),
        "kernel": family.name(),
        "seed": seed,
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "nugget": args.nugget,
        "pls_components": args.pls_components,
        "allow_non_nested": args.allow_non_nested,
        "nesting_tol": args.nesting_tol,
        "z": args.z,
        "out_dir": args.out_dir.display().to_string(),
        "split_seed": args.split_seed,
    });
    write_manifest(
        &args.out_dir.join("manifest.json"),
        "compare",
        Some(seed),
        config,
        &artifacts,
    )
}
