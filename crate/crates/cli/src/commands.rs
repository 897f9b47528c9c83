use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hubnet_core::estimate::RestartSummary;
use hubnet_core::identify::{
    check_conditions, distributions_distinct, ConditionReport, Distinctness,
    DEFAULT_ENUMERATION_CAP, DEFAULT_TOL,
};
use hubnet_core::{
    generate_params, hard_em_fit, mislabel_fraction, mle_given_labels, rmse_a, run_replicates,
    sample_data, Error as CoreError, FitConfig, InitStrategy, LabelAssignment, ReplicateSummary,
    SimDesign, Termination, Variant,
};
use serde::{Deserialize, Serialize};

use crate::args::{
    parse_cell, CheckArgs, EmArgs, EvaluateArgs, FitArgs, ReplicateArgs, SimulateArgs,
};
use crate::config::Config;
use crate::error::{CliError, CliResult, EXIT_CONDITIONS_FAILED, EXIT_INFEASIBLE};
use crate::io::{
    matrix_rows, read_groups, read_json, read_labels, read_params, to_json, write_groups,
    write_json, write_labels, ParamsFile,
};

/// Cells of both tables when `--cells` is not given.
pub const DEFAULT_CELLS: [(usize, usize); 4] = [(10, 100), (10, 1000), (20, 100), (20, 1000)];
pub const DEFAULT_T_GRID: [usize; 3] = [1000, 1500, 2000];
pub const DEFAULT_REPLICATES: usize = 100;

pub fn simulate(args: SimulateArgs, cfg: &Config) -> CliResult<()> {
    let d = SimDesign::default();
    let design = SimDesign {
        n_leaders: cfg.pick_or(args.n_leaders, "nL", d.n_leaders)?,
        n: cfg.pick_or(args.n, "n", d.n)?,
        t: cfg.pick_or(args.t, "T", d.t)?,
        variant: cfg.pick_or(args.variant, "variant", d.variant)?,
        rho0: cfg.pick_or(args.rho0, "rho0", d.rho0)?,
        pi_const: cfg.pick_or(args.pi, "pi", d.pi_const)?,
        in_range: cfg.pick_or(args.in_range, "in-range", d.in_range)?,
        out_range: cfg.pick_or(args.out_range, "out-range", d.out_range)?,
        seed: cfg.seed(args.seed)?,
    };
    let dir = cfg.pick_or(args.out_dir, "out-dir", PathBuf::from("."))?;
    let params = generate_params(&design)?;
    let (data, labels) = sample_data(&params, design.t, design.seed)?;
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_json(&dir.join("params.json"), &ParamsFile::from_params(&params))?;
    write_groups(&dir.join("groups.csv"), &data)?;
    write_labels(&dir.join("labels.csv"), &labels)?;
    println!(
        "simulated {} model: n = {}, n_L = {}, T = {}, seed = {} -> {}",
        design.variant,
        design.n,
        design.n_leaders,
        design.t,
        design.seed,
        dir.display()
    );
    Ok(())
}

fn fit_config(em: EmArgs, cfg: &Config, variant: Variant, seed: u64) -> CliResult<FitConfig> {
    let d = FitConfig::default();
    Ok(FitConfig {
        restarts: cfg.pick_or(em.restarts, "restarts", d.restarts)?,
        max_iterations: cfg.pick_or(em.max_iterations, "max-iterations", d.max_iterations)?,
        clamp_eps: cfg.pick_or(em.clamp_eps, "clamp-eps", d.clamp_eps)?,
        smoothing: cfg.pick_or(em.smoothing, "smoothing", d.smoothing)?,
        variant,
        seed,
        ..d
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitSettings {
    pub restarts: usize,
    pub max_iterations: usize,
    pub clamp_eps: f64,
    pub smoothing: f64,
    pub seed: u64,
    pub provided_init: bool,
}

/// Contents of `fit.json`. Labels use the external convention.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitFile {
    pub variant: Variant,
    #[serde(rename = "n_L")]
    pub n_leaders: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub labels: Vec<u32>,
    #[serde(rename = "A_hat")]
    pub a_hat: Vec<Vec<f64>>,
    pub rho_hat: Vec<f64>,
    pub empty_clusters: Vec<u32>,
    pub log_profile_lik: f64,
    pub trace: Vec<f64>,
    pub restart_index: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub restarts: Vec<RestartSummary>,
    pub settings: FitSettings,
}

pub fn fit(args: FitArgs, cfg: &Config) -> CliResult<()> {
    let groups: PathBuf = cfg.require(args.groups, "groups")?;
    let variant = cfg.pick_or(args.variant, "variant", Variant::Asymmetric)?;
    let n_leaders: usize = cfg.require(args.n_leaders, "nL")?;
    let seed = cfg.seed(args.seed)?;
    let mut config = fit_config(args.em, cfg, variant, seed)?;
    let init: Option<PathBuf> = cfg.pick(args.init, "init")?;
    if let Some(path) = &init {
        config.init = InitStrategy::Provided(read_labels(path, variant, n_leaders)?);
    }
    let out = cfg.pick_or(args.out, "out", PathBuf::from("fit.json"))?;
    let labels_out: Option<PathBuf> = cfg.pick(args.labels_out, "labels-out")?;

    let data = read_groups(&groups)?;
    let fit = hard_em_fit(&data, n_leaders, &config).map_err(|e| match e {
        CoreError::Infeasible { group } => CliError {
            code: EXIT_INFEASIBLE,
            message: format!(
                "{}: row {} contains none of the {n_leaders} leader nodes; use --variant null to allow hubless groups",
                groups.display(),
                group + 1
            ),
        },
        other => other.into(),
    })?;
    let file = FitFile {
        variant,
        n_leaders,
        n: data.n(),
        t: data.len(),
        labels: fit.labels.external(),
        a_hat: matrix_rows(&fit.a_hat),
        rho_hat: fit.rho_hat.clone(),
        empty_clusters: fit
            .empty_clusters
            .iter()
            .map(|&c| variant.external_label(c))
            .collect(),
        log_profile_lik: fit.log_profile_lik,
        trace: fit.trace.clone(),
        restart_index: fit.restart_index,
        iterations: fit.iterations,
        termination: fit.termination,
        restarts: fit.restarts.clone(),
        settings: FitSettings {
            restarts: config.restarts,
            max_iterations: config.max_iterations,
            clamp_eps: config.clamp_eps,
            smoothing: config.smoothing,
            seed,
            provided_init: init.is_some(),
        },
    };
    write_json(&out, &file)?;
    if let Some(path) = labels_out {
        write_labels(&path, &fit.labels)?;
    }
    println!(
        "fitted {variant} model: log profile likelihood {:.6}, restart {} of {}, {} iterations ({:?}) -> {}",
        fit.log_profile_lik,
        fit.restart_index + 1,
        fit.restarts.len(),
        fit.iterations,
        fit.termination,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Metrics {
    #[serde(rename = "T")]
    pub t: usize,
    pub mislabel: f64,
    pub rmse: f64,
    /// Known-label RMSE; needs the group matrix.
    pub rmse_star: Option<f64>,
    pub rmse_includes_null_row: bool,
}

pub fn evaluate(args: EvaluateArgs, cfg: &Config) -> CliResult<()> {
    let fit_path: PathBuf = cfg.require(args.fit, "fit")?;
    let params_path: PathBuf = cfg.require(args.params, "params")?;
    let labels_path: PathBuf = cfg.require(args.labels, "labels")?;
    let groups: Option<PathBuf> = cfg.pick(args.groups, "groups")?;
    let out = cfg.pick_or(args.out, "out", PathBuf::from("metrics.json"))?;

    let fit: FitFile = read_json(&fit_path)?;
    let params = read_params(&params_path)?;
    if fit.variant != params.variant() || fit.n_leaders != params.n_leaders() || fit.n != params.n()
    {
        return Err(CliError::invalid(format!(
            "fit is a {} model with n_L = {}, n = {}; parameters are a {} model with n_L = {}, n = {}",
            fit.variant,
            fit.n_leaders,
            fit.n,
            params.variant(),
            params.n_leaders(),
            params.n()
        )));
    }
    let est_labels = LabelAssignment::from_external(
        fit.variant,
        fit.n_leaders,
        &fit.labels.iter().map(|&z| i64::from(z)).collect::<Vec<_>>(),
    )
    .map_err(|e| CliError::invalid(format!("{}: {e}", fit_path.display())))?;
    let truth = read_labels(&labels_path, params.variant(), params.n_leaders())?;
    let rows = fit.a_hat.len();
    let a_hat =
        ndarray::Array2::from_shape_vec((rows, fit.n), fit.a_hat.into_iter().flatten().collect())
            .map_err(|e| CliError::invalid(format!("{}: A_hat: {e}", fit_path.display())))?;

    let rmse_star = match &groups {
        Some(path) => {
            let data = read_groups(path)?;
            if data.len() != truth.len() {
                return Err(CliError::invalid(format!(
                    "{} has {} groups but {} has {} labels",
                    path.display(),
                    data.len(),
                    labels_path.display(),
                    truth.len()
                )));
            }
            Some(rmse_a(&mle_given_labels(&data, &truth)?.a, params.a())?)
        }
        None => None,
    };
    let metrics = Metrics {
        t: truth.len(),
        mislabel: mislabel_fraction(&est_labels, &truth)?,
        rmse: rmse_a(&a_hat, params.a())?,
        rmse_star,
        rmse_includes_null_row: params.variant() == Variant::NullComponent,
    };
    write_json(&out, &metrics)?;
    print!("{}", to_json(&metrics));
    Ok(())
}

/// One row of the replicate table.
struct CellOutcome {
    variant: Variant,
    n_leaders: usize,
    n: usize,
    t: usize,
    result: Result<ReplicateSummary, CliError>,
}

const CSV_HEADER: &str =
    "variant,n_L,n,T,replicates,seed,mislabel_mean,mislabel_sd,rmse_mean,rmse_sd,\
rmse_star_mean,rmse_star_sd,mislabel,rmse,rmse_star,rmse_includes_null_row,status";

/// Mean with the standard deviation times 1e4 in parentheses.
pub fn table_cell(mean: f64, sd: f64) -> String {
    format!("{mean:.4} ({:.0})", sd * 1e4)
}

fn csv_row(out: &mut String, cell: &CellOutcome, replicates: usize, seed: u64) {
    let _ = write!(
        out,
        "{},{},{},{},{replicates},{seed},",
        cell.variant, cell.n_leaders, cell.n, cell.t
    );
    match &cell.result {
        Ok(s) => {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},\"{}\",\"{}\",\"{}\",{},ok",
                s.mislabel.mean,
                s.mislabel.sd,
                s.rmse.mean,
                s.rmse.sd,
                s.rmse_star.mean,
                s.rmse_star.sd,
                table_cell(s.mislabel.mean, s.mislabel.sd),
                table_cell(s.rmse.mean, s.rmse.sd),
                table_cell(s.rmse_star.mean, s.rmse_star.sd),
                s.rmse_includes_null_row
            );
        }
        Err(e) => {
            let msg = e.message.replace('"', "'");
            let _ = writeln!(out, ",,,,,,,,,,\"error: {msg}\"");
        }
    }
}

#[derive(Serialize)]
struct ReplicateReport<'a> {
    fit: FitSettings,
    cells: Vec<&'a ReplicateSummary>,
}

pub fn replicate(args: ReplicateArgs, cfg: &Config) -> CliResult<()> {
    let variant = match (
        cfg.pick(args.table, "table")?,
        cfg.pick(args.variant, "variant")?,
    ) {
        (Some(_), Some(_)) => return Err(CliError::invalid("give either --table or --variant")),
        (Some(1), None) | (None, None) => Variant::Asymmetric,
        (Some(2), None) => Variant::NullComponent,
        (Some(other), None) => {
            return Err(CliError::invalid(format!(
                "--table must be 1 or 2, got {other}"
            )))
        }
        (None, Some(v)) => v,
    };
    let cells = if !args.cells.is_empty() {
        args.cells
    } else if let Some(list) = cfg.get::<Vec<String>>("cells")? {
        list.iter()
            .map(|c| parse_cell(c).map_err(CliError::invalid))
            .collect::<CliResult<_>>()?
    } else {
        DEFAULT_CELLS.to_vec()
    };
    let t_grid = if !args.t.is_empty() {
        args.t
    } else {
        cfg.get::<Vec<usize>>("T")?
            .unwrap_or_else(|| DEFAULT_T_GRID.to_vec())
    };
    let replicates = cfg.pick_or(args.replicates, "R", DEFAULT_REPLICATES)?;
    let seed = cfg.seed(args.seed)?;
    let fit = fit_config(args.em, cfg, variant, seed)?;
    let fail_fast = args.fail_fast || cfg.get::<bool>("fail-fast")?.unwrap_or(false);
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    let json: Option<PathBuf> = cfg.pick(args.json, "json")?;

    let mut outcomes = Vec::new();
    for &(n_leaders, n) in &cells {
        for &t in &t_grid {
            let design = SimDesign {
                n_leaders,
                n,
                t,
                variant,
                seed,
                ..SimDesign::default()
            };
            let start = Instant::now();
            let result = run_replicates(&design, &fit, replicates).map_err(CliError::from);
            match &result {
                Ok(s) => eprintln!(
                    "{variant} n_L={n_leaders} n={n} T={t}: mislabel {} rmse {} rmse* {} ({:.1}s)",
                    table_cell(s.mislabel.mean, s.mislabel.sd),
                    table_cell(s.rmse.mean, s.rmse.sd),
                    table_cell(s.rmse_star.mean, s.rmse_star.sd),
                    start.elapsed().as_secs_f64()
                ),
                Err(e) => eprintln!(
                    "{variant} n_L={n_leaders} n={n} T={t}: error: {}",
                    e.message
                ),
            }
            let failed = result.is_err();
            outcomes.push(CellOutcome {
                variant,
                n_leaders,
                n,
                t,
                result,
            });
            if failed && fail_fast {
                break;
            }
        }
        if fail_fast && outcomes.last().is_some_and(|c| c.result.is_err()) {
            break;
        }
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for cell in &outcomes {
        csv_row(&mut csv, cell, replicates, seed);
    }
    match &out {
        Some(path) => fs::write(path, &csv).map_err(|e| CliError::io(path, e))?,
        None => print!("{csv}"),
    }
    if let Some(path) = json {
        let report = ReplicateReport {
            fit: FitSettings {
                restarts: fit.restarts,
                max_iterations: fit.max_iterations,
                clamp_eps: fit.clamp_eps,
                smoothing: fit.smoothing,
                seed,
                provided_init: false,
            },
            cells: outcomes
                .iter()
                .filter_map(|c| c.result.as_ref().ok())
                .collect(),
        };
        write_json(&path, &report)?;
    }
    match outcomes.into_iter().find_map(|c| c.result.err()) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct IdentifiabilityReport {
    #[serde(flatten)]
    conditions: ConditionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Distinctness>,
}

pub fn check_identifiability(args: CheckArgs, cfg: &Config) -> CliResult<()> {
    let path: PathBuf = cfg.require(args.params, "params")?;
    let tol = cfg.pick_or(args.tol, "tol", DEFAULT_TOL)?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::invalid(format!(
            "--tol {tol} must be finite and non-negative"
        )));
    }
    let cap = cfg.pick_or(args.cap, "cap", DEFAULT_ENUMERATION_CAP)?;
    let compare: Option<PathBuf> = cfg.pick(args.compare, "compare")?;
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;

    let params = read_params(&path)?;
    let comparison = match compare {
        Some(other) => Some(distributions_distinct(
            &params,
            &read_params(&other)?,
            tol,
            cap,
        )?),
        None => None,
    };
    let report = IdentifiabilityReport {
        conditions: check_conditions(&params, tol),
        comparison,
    };
    let text = to_json(&report);
    if let Some(out) = out {
        write_text(&out, &text)?;
    }
    print!("{text}");
    if report.conditions.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .conditions
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect();
        Err(CliError {
            code: EXIT_CONDITIONS_FAILED,
            message: format!("conditions not satisfied: {}", failed.join(", ")),
        })
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
