//! Scenario files, presets, parameter sweeps and their CSV/SVG output.

pub mod config;
pub mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{self, AnalysisError, EquilibriumSpec, FieldSample, Stability};
use crate::dynamics::{self, DynamicsError, Trajectory};
use crate::model::{CommunityState, Group, ModelParams, Variant};
use crate::oracle::{self, OracleError, OracleRun};
use crate::par::{self, Execution};

pub use config::{
    parse_config, parse_document, parse_sweep_config, ConfigError, ScenarioConfig, SweepAxis,
    SweepConfig, SweepMetric, SweepParam,
};
pub use output::fmt_num;
pub use presets::{Preset, PresetKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl HarnessError {
    /// Whether the input, rather than the computation, was at fault.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_) | HarnessError::UnknownPreset(_)
        )
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Level holding the most regular mass.
pub fn regular_argmax(state: &CommunityState) -> usize {
    state
        .regular()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

/// Integrates a scenario without touching the filesystem.
pub fn simulate(config: &ScenarioConfig) -> Result<(ModelParams, Trajectory), HarnessError> {
    let params = config.model_params()?;
    let initial = config.initial_state(&params)?;
    let traj = dynamics::integrate(&initial, &params, &config.integrator_settings())?;
    Ok((params, traj))
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub params: ModelParams,
    pub trajectory: Trajectory,
    pub oracle: Option<OracleRun>,
    /// Total-variation distance between the oracle's and the ODE's final states.
    pub oracle_tv: Option<f64>,
    pub files: Vec<PathBuf>,
}

fn parameter_rows(config: &ScenarioConfig, params: &ModelParams) -> Vec<(String, String)> {
    vec![
        ("name".into(), config.name.clone()),
        ("variant".into(), params.variant.name().into()),
        ("L".into(), params.steps().to_string()),
        ("alpha".into(), fmt_num(params.behavior.alpha)),
        ("sigma".into(), fmt_num(params.behavior.sigma)),
        ("f_cl".into(), fmt_num(params.group_fraction(Group::Clique))),
        (
            "f_acl".into(),
            fmt_num(params.group_fraction(Group::AntiClique)),
        ),
        ("p_lambda".into(), fmt_num(params.effective_p_lambda())),
        ("gamma".into(), fmt_num(params.gamma())),
        ("t_end".into(), fmt_num(config.t_end)),
    ]
}

/// Integrates a scenario (and the agent oracle when configured) and writes
/// `trajectory.csv`, `trajectory.svg`, `summary.csv` and, with an oracle,
/// `oracle_trajectory.csv` into `out_dir`.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
) -> Result<ScenarioReport, HarnessError> {
    let (params, trajectory) = simulate(config)?;
    let mut files = vec![
        write_file(
            out_dir,
            "trajectory.csv",
            &output::trajectory_csv(&trajectory, &params),
        )?,
        write_file(
            out_dir,
            "trajectory.svg",
            &output::trajectory_svg(&config.name, &trajectory, &params),
        )?,
    ];

    let mut rows = parameter_rows(config, &params);
    rows.push(("final_pc".into(), fmt_num(trajectory.final_pc())));
    rows.push((
        "final_regular_argmax".into(),
        regular_argmax(trajectory.final_state()).to_string(),
    ));
    rows.push((
        "max_conservation_error".into(),
        fmt_num(trajectory.max_conservation_error()),
    ));

    let (mut oracle_run, mut oracle_tv) = (None, None);
    if let Some(settings) = config.oracle_settings() {
        let levels = config.initial_levels(&params)?;
        let run = oracle::run(&settings, &params, &levels)?;
        let tv = run
            .trajectory
            .final_state()
            .total_variation(trajectory.final_state());
        files.push(write_file(
            out_dir,
            "oracle_trajectory.csv",
            &output::trajectory_csv(&run.trajectory, &params),
        )?);
        rows.push(("oracle_n".into(), settings.n.to_string()));
        rows.push(("oracle_dt".into(), fmt_num(settings.dt)));
        rows.push(("oracle_seed".into(), settings.seed.to_string()));
        rows.push(("oracle_judged".into(), run.totals.judged.to_string()));
        rows.push(("oracle_skipped".into(), run.totals.skipped.to_string()));
        let pc = if run.totals.judged > 0 {
            run.totals.correct as f64 / run.totals.judged as f64
        } else {
            f64::NAN
        };
        rows.push(("oracle_overall_pc".into(), fmt_num(pc)));
        rows.push(("oracle_final_tv".into(), fmt_num(tv)));
        oracle_run = Some(run);
        oracle_tv = Some(tv);
    }
    files.push(write_file(
        out_dir,
        "summary.csv",
        &output::summary_csv(&rows),
    )?);
    Ok(ScenarioReport {
        params,
        trajectory,
        oracle: oracle_run,
        oracle_tv,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub params: ModelParams,
    pub ode: Trajectory,
    pub runs: Vec<OracleRun>,
    /// Final-state total-variation distance per run.
    pub tv: Vec<f64>,
}

impl OracleComparison {
    pub fn median_tv(&self) -> f64 {
        let mut v = self.tv.clone();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => v[n / 2],
            n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
        }
    }
}

/// Runs the oracle once per seed and compares each final state with the ODE.
pub fn compare_oracle(
    config: &ScenarioConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<OracleComparison, HarnessError> {
    let settings = config.oracle_settings().ok_or_else(|| ConfigError {
        line: None,
        message: "no oracle_n given".into(),
    })?;
    let (params, ode) = simulate(config)?;
    let levels = config.initial_levels(&params)?;
    let runs = oracle::run_seeds(&settings, &params, &levels, seeds, exec)?;
    let tv = runs
        .iter()
        .map(|r| {
            r.trajectory
                .final_state()
                .total_variation(ode.final_state())
        })
        .collect();
    Ok(OracleComparison {
        params,
        ode,
        runs,
        tv,
    })
}

/// Writes one `oracle_<seed>.csv` per run plus `oracle_summary.csv`.
pub fn write_oracle_comparison(
    cmp: &OracleComparison,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let mut files = vec![write_file(
        out_dir,
        "trajectory.csv",
        &output::trajectory_csv(&cmp.ode, &cmp.params),
    )?];
    let mut summary = String::from("seed,judged,skipped,final_tv\n");
    for (run, tv) in cmp.runs.iter().zip(&cmp.tv) {
        let seed = run.seed;
        files.push(write_file(
            out_dir,
            &format!("oracle_{seed}.csv"),
            &output::trajectory_csv(&run.trajectory, &cmp.params),
        )?);
        summary.push_str(&format!(
            "{seed},{},{},{}\n",
            run.totals.judged,
            run.totals.skipped,
            fmt_num(*tv)
        ));
    }
    files.push(write_file(out_dir, "oracle_summary.csv", &summary)?);
    Ok(files)
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub value1: f64,
    pub value2: f64,
    pub pc: f64,
    pub state: CommunityState,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub name: String,
    pub params: ModelParams,
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub metric: SweepMetric,
    /// `cells[i][j]` is the point `(axis1[i], axis2[j])`.
    pub cells: Vec<Vec<SweepCell>>,
}

/// Runs every grid point of a sweep to its steady state (or `t_end`).
pub fn compute_sweep(sweep: &SweepConfig, exec: Execution) -> Result<SweepResult, HarnessError> {
    let values1 = sweep.axis1.values();
    let values2 = sweep.axis2.values();
    let points: Vec<(f64, f64)> = values1
        .iter()
        .flat_map(|&a| values2.iter().map(move |&b| (a, b)))
        .collect();
    let results = par::map(
        &points,
        exec,
        |&(a, b)| -> Result<SweepCell, HarnessError> {
            let config = sweep.point(a, b)?;
            let params = config.model_params()?;
            let initial = config.initial_state(&params)?;
            let ss = dynamics::steady_state(&initial, &params, &config.integrator_settings())?;
            Ok(SweepCell {
                value1: a,
                value2: b,
                pc: ss.pc,
                state: ss.state,
                converged: ss.converged,
            })
        },
    );
    let mut flat = results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter();
    let cells = values1
        .iter()
        .map(|_| flat.by_ref().take(values2.len()).collect())
        .collect();
    Ok(SweepResult {
        name: sweep.base.name.clone(),
        params: sweep.base.model_params()?,
        axis1: sweep.axis1,
        axis2: sweep.axis2,
        metric: sweep.metric,
        cells,
    })
}

/// Axis1-major CSV: `axis1,axis2,pc` and, for `final_state`, the state columns.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = format!("{},{},pc", result.axis1.param, result.axis2.param);
    if result.metric == SweepMetric::FinalState {
        out.push(',');
        out.push_str(&output::state_columns(&result.params).join(","));
    }
    out.push('\n');
    for cell in result.cells.iter().flatten() {
        out.push_str(&format!(
            "{},{},{}",
            fmt_num(cell.value1),
            fmt_num(cell.value2),
            fmt_num(cell.pc)
        ));
        if result.metric == SweepMetric::FinalState {
            for x in cell.state.as_slice() {
                out.push(',');
                out.push_str(&fmt_num(*x));
            }
        }
        out.push('\n');
    }
    out
}

pub fn sweep_heatmap(result: &SweepResult) -> String {
    let v1 = result.axis1.values();
    let v2 = result.axis2.values();
    let cells: Vec<Vec<(f64, String)>> = result
        .cells
        .iter()
        .map(|row| row.iter().map(|c| (c.pc, fmt_num(c.pc))).collect())
        .collect();
    output::heatmap_svg(
        &format!("{}: final p_c", result.name),
        (result.axis1.param.name(), &v1),
        (result.axis2.param.name(), &v2),
        &cells,
    )
}

/// Computes a sweep and writes `sweep.csv` and `heatmap.svg`.
pub fn run_sweep(
    sweep: &SweepConfig,
    out_dir: &Path,
    exec: Execution,
) -> Result<SweepResult, HarnessError> {
    let result = compute_sweep(sweep, exec)?;
    write_file(out_dir, "sweep.csv", &sweep_csv(&result))?;
    write_file(out_dir, "heatmap.svg", &sweep_heatmap(&result))?;
    Ok(result)
}

/// Reduced three-level field of a scenario. The grid is forced to `L = 2`;
/// only the clique-free variant has a three-level reduction.
pub fn vector_field(config: &ScenarioConfig) -> Result<Vec<FieldSample>, HarnessError> {
    if config.variant != Variant::NoClique {
        return Err(ConfigError {
            line: None,
            message: format!(
                "the vector field needs variant no-clique, not {}",
                config.variant.name()
            ),
        }
        .into());
    }
    let mut three = config.clone();
    three.steps = 2;
    three.initial.clear();
    three.init_level = None;
    let params = three.model_params()?;
    Ok(analysis::vector_field_grid(&params, config.field_n)?)
}

/// Writes `field.csv` and `field.svg`.
pub fn emit_vector_field(
    config: &ScenarioConfig,
    out_dir: &Path,
) -> Result<Vec<FieldSample>, HarnessError> {
    let samples = vector_field(config)?;
    write_file(out_dir, "field.csv", &output::field_csv(&samples))?;
    write_file(
        out_dir,
        "field.svg",
        &output::field_svg(&config.name, &samples),
    )?;
    Ok(samples)
}

#[derive(Debug, Clone)]
pub struct EquilibriumRow {
    pub r0: f64,
    pub residual: f64,
    pub pc: f64,
    pub stability: Stability,
    /// Largest real part of the Jacobian spectrum.
    pub max_re: f64,
}

/// Checks the sampled members of the equilibrium family of a scenario's
/// parameters and classifies each by its linearization.
pub fn equilibria(config: &ScenarioConfig) -> Result<Vec<EquilibriumRow>, HarnessError> {
    let params = config.model_params()?;
    analysis::family_samples(&params)
        .into_iter()
        .map(|r0| {
            let state = analysis::proposition_equilibrium(EquilibriumSpec { r0 }, &params)?;
            let report = analysis::stability_report(&state, &params, analysis::DEFAULT_FD_STEP)?;
            Ok(EquilibriumRow {
                r0,
                residual: report.residual,
                pc: report.pc_at_point,
                stability: report.classify(),
                max_re: report
                    .eigenvalues
                    .iter()
                    .map(|z| z.re)
                    .fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

pub fn equilibria_csv(rows: &[EquilibriumRow]) -> String {
    let mut out = String::from("R0,residual,pc,max_re,stability\n");
    for r in rows {
        let label = match r.stability {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Critical => "critical",
        };
        out.push_str(&format!(
            "{},{},{},{},{label}\n",
            fmt_num(r.r0),
            fmt_num(r.residual),
            fmt_num(r.pc),
            fmt_num(r.max_re)
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub enum PresetOutcome {
    Scenario(Box<ScenarioReport>),
    Sweep(SweepResult),
    Field(Vec<FieldSample>),
}

/// Runs a catalog preset, writing its outputs into `out_dir`.
pub fn run_preset(
    name: &str,
    out_dir: &Path,
    exec: Execution,
) -> Result<PresetOutcome, HarnessError> {
    let preset =
        presets::find(name).ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))?;
    Ok(match preset.kind {
        PresetKind::Scenario => PresetOutcome::Scenario(Box::new(run_scenario(
            &parse_config(preset.text)?,
            out_dir,
        )?)),
        PresetKind::Sweep => {
            PresetOutcome::Sweep(run_sweep(&parse_sweep_config(preset.text)?, out_dir, exec)?)
        }
        PresetKind::Field => {
            PresetOutcome::Field(emit_vector_field(&parse_config(preset.text)?, out_dir)?)
        }
    })
}
