use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wasscov::grid::unit_grid;
use wasscov::inference::{bootstrap_test, GroupedEnsembles, TestResult};
use wasscov::io::{self, Config, MatrixDocument, QuantileTable};
use wasscov::pipeline::{ensemble_from_histograms, ensemble_from_raw, numeric_time_index};
use wasscov::simulation::{rate_experiment, LawSpec, Observation, RateExperiment, RateTarget};
use wasscov::{cov_to_corr, wasserstein_cov_kernel, wasserstein_cov_matrix, wasserstein_mean, QuantileEnsemble};

use crate::config::{Settings, TimeIndexMode};
use crate::CliError;

enum InputKind {
    Raw,
    Histogram,
    Quantiles,
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn sniff(text: &str) -> Result<InputKind, CliError> {
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields == io::RAW_HEADER {
        Ok(InputKind::Raw)
    } else if fields == io::HISTOGRAM_HEADER {
        Ok(InputKind::Histogram)
    } else if fields.len() > 2 && fields[..2] == ["subject_id", "component_id"] {
        Ok(InputKind::Quantiles)
    } else {
        Err(wasscov::Error::Parse {
            line: 1,
            message: format!("unrecognised header `{header}`"),
        }
        .into())
    }
}

fn load_quantiles(path: &Path, settings: &Settings, allow_quantiles: bool) -> Result<QuantileTable, CliError> {
    let text = read_input(path)?;
    let table = match sniff(&text)? {
        InputKind::Raw => ensemble_from_raw(&io::read_raw_csv(text.as_bytes())?, &settings.estimation())?,
        InputKind::Histogram => ensemble_from_histograms(&io::read_histogram_csv(text.as_bytes())?, &settings.estimation())?,
        InputKind::Quantiles if allow_quantiles => io::read_quantile_csv(text.as_bytes())?,
        InputKind::Quantiles => {
            return Err(CliError::Usage(format!("{} already holds quantile functions", path.display())));
        }
    };
    Ok(table)
}

fn out_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok((path, BufWriter::new(file)))
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> wasscov::Result<()>,
{
    let (path, mut w) = out_file(dir, name)?;
    f(&mut w)?;
    w.flush().map_err(|source| CliError::Io { path, source })
}

fn run_config(settings: &Settings, command: &str, input: &Path) -> Config {
    let mut c = settings.to_config();
    c.insert("command".into(), command.into());
    c.insert("input".into(), input.display().to_string());
    c
}

pub fn estimate(input: &Path, out_dir: &Path, settings: &Settings) -> Result<(), CliError> {
    let table = load_quantiles(input, settings, false)?;
    let config = run_config(settings, "estimate", input);
    write_with(out_dir, "quantiles.csv", |w| io::write_quantile_csv(w, &table, &config))
}

/// Time index of the ensemble's components under `mode`, mapped onto [0, 1].
fn attach_time_index(ens: QuantileEnsemble, mode: TimeIndexMode) -> Result<QuantileEnsemble, CliError> {
    let index = numeric_time_index(ens.labels());
    match (mode, index) {
        (TimeIndexMode::None, _) | (TimeIndexMode::Auto, None) => Ok(ens),
        (TimeIndexMode::Auto, Some(y)) => Ok(ens.clone().with_time_index(y).unwrap_or(ens)),
        (TimeIndexMode::Numeric, Some(y)) => Ok(ens.with_time_index(y)?),
        (TimeIndexMode::Numeric, None) => Err(wasscov::Error::InvalidTimeIndex(
            "component labels must be increasing numbers".into(),
        )
        .into()),
    }
}

pub fn cov(input: &Path, out_dir: &Path, settings: &Settings) -> Result<(), CliError> {
    let table = load_quantiles(input, settings, true)?;
    let ens = attach_time_index(table.ensemble, settings.time_index)?;
    let mut config = run_config(settings, "cov", input);
    config.insert("grid".into(), ens.grid_size().to_string());
    let labels = ens.labels().to_vec();

    let cov = wasserstein_cov_matrix(&ens);
    let doc = |values: Vec<Vec<f64>>| MatrixDocument {
        labels: labels.clone(),
        values,
        time_index: ens.time_index().map(<[f64]>::to_vec),
        n: ens.n(),
        grid_size: ens.grid_size(),
        config: config.clone(),
    };
    write_with(out_dir, "cov_matrix.csv", |w| io::write_matrix_csv(w, &labels, cov.matrix(), &config))?;
    write_with(out_dir, "cov_matrix.json", |w| io::write_json(w, &doc(cov.rows())))?;

    match cov_to_corr(&cov) {
        Ok(corr) => {
            write_with(out_dir, "corr_matrix.csv", |w| io::write_matrix_csv(w, &labels, corr.matrix(), &config))?;
            write_with(out_dir, "corr_matrix.json", |w| io::write_json(w, &doc(corr.rows())))?;
        }
        Err(e @ wasscov::Error::DegenerateComponent { .. }) => {
            eprintln!("warning: correlation matrix not written: {e}");
        }
        Err(e) => return Err(e.into()),
    }

    let means = (0..ens.p()).map(|j| wasserstein_mean(&ens, j)).collect::<wasscov::Result<Vec<_>>>()?;
    write_with(out_dir, "mean_quantiles.csv", |w| io::write_mean_quantiles_csv(w, &labels, &means, &config))?;
    write_with(out_dir, "mean_densities.csv", |w| io::write_mean_densities_csv(w, &labels, &means, &config))?;

    if ens.time_index().is_some() {
        let surface = wasserstein_cov_kernel(&ens)?;
        let points = unit_grid(settings.surface_grid);
        // report the surface on the scale of the original component labels
        let raw: Vec<f64> = labels.iter().map(|l| l.parse::<f64>().unwrap()).collect();
        let (lo, hi) = (raw[0], raw[raw.len() - 1]);
        let point_labels: Vec<String> = points.iter().map(|y| (lo + y * (hi - lo)).to_string()).collect();
        let sampled = surface.sample(&points);
        write_with(out_dir, "cov_surface.csv", |w| io::write_matrix_csv(w, &point_labels, &sampled, &config))?;
    }
    Ok(())
}

fn split_groups(table: QuantileTable, groups_path: &Path) -> Result<GroupedEnsembles, CliError> {
    let text = read_input(groups_path)?;
    let membership = io::read_groups_csv(text.as_bytes())?;
    let unassigned: Vec<&String> = table.subjects.iter().filter(|s| !membership.contains_key(*s)).collect();
    if !unassigned.is_empty() {
        return Err(wasscov::Error::InvalidArgument(format!(
            "subjects without a group: {}",
            unassigned.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ))
        .into());
    }
    let unknown: Vec<&String> = membership.keys().filter(|s| !table.subjects.contains(s)).collect();
    if !unknown.is_empty() {
        return Err(wasscov::Error::InvalidArgument(format!(
            "grouped subjects missing from the input: {}",
            unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ))
        .into());
    }
    let mut labels: Vec<&String> = Vec::new();
    for g in membership.values() {
        if !labels.contains(&g) {
            labels.push(g);
        }
    }
    let ens = &table.ensemble;
    let groups = labels
        .into_iter()
        .map(|g| {
            let rows: Vec<Vec<_>> = table
                .subjects
                .iter()
                .enumerate()
                .filter(|(_, s)| &membership[*s] == g)
                .map(|(i, _)| (0..ens.p()).map(|j| ens.quantile(i, j)).collect())
                .collect();
            let sub = QuantileEnsemble::new(ens.labels().to_vec(), rows).map_err(|e| match e {
                wasscov::Error::TooFewSubjects { got, .. } => {
                    wasscov::Error::InvalidArgument(format!("group {g} has {got} subject(s); at least 2 are needed"))
                }
                e => e,
            })?;
            Ok((g.clone(), sub))
        })
        .collect::<wasscov::Result<Vec<_>>>()?;
    Ok(GroupedEnsembles::new(groups)?)
}

#[derive(Serialize)]
struct TestOutput<'a> {
    #[serde(flatten)]
    result: &'a TestResult,
    config: &'a Config,
}

pub fn test(input: &Path, groups_path: &Path, out_dir: &Path, settings: &Settings) -> Result<(), CliError> {
    let table = load_quantiles(input, settings, true)?;
    let mut config = run_config(settings, "test", input);
    config.insert("grid".into(), table.ensemble.grid_size().to_string());
    config.insert("groups".into(), groups_path.display().to_string());
    let groups = split_groups(table, groups_path)?;
    let result = bootstrap_test(&groups, settings.statistic, settings.reps, settings.seed)?;
    write_with(out_dir, "test_result.json", |w| io::write_json(w, &TestOutput { result: &result, config: &config }))?;
    println!("{} = {}, p-value = {}", result.statistic_kind, result.statistic, result.p_value);
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetSpec {
    #[default]
    Matrix,
    Kernel,
}

fn default_observations() -> Vec<Observation> {
    vec![Observation::Exact]
}

fn default_eval_points() -> usize {
    101
}

/// A law plus the experiment to run on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimulationSpec {
    #[serde(flatten)]
    law: LawSpec,
    n_list: Vec<usize>,
    #[serde(default = "default_observations")]
    observations: Vec<Observation>,
    #[serde(default)]
    replicates: Option<usize>,
    #[serde(default)]
    target: TargetSpec,
    #[serde(default = "default_eval_points")]
    eval_points: usize,
}

pub fn simulate(
    input: &Path,
    out_dir: &Path,
    settings: &Settings,
    grid_flag: Option<usize>,
    reps_flag: Option<usize>,
) -> Result<(), CliError> {
    let text = read_input(input)?;
    let mut spec: SimulationSpec = serde_json::from_str(&text).map_err(wasscov::Error::from)?;
    if let Some(g) = grid_flag {
        spec.law.grid_size = g;
    }
    spec.replicates = Some(reps_flag.or(spec.replicates).unwrap_or(settings.reps));
    let law = spec.law.build()?;
    let target = match spec.target {
        TargetSpec::Matrix => RateTarget::Matrix,
        TargetSpec::Kernel => RateTarget::Kernel { truth: None, eval_points: spec.eval_points },
    };
    let mut exp = RateExperiment::new(spec.n_list.clone(), spec.observations.clone(), spec.replicates.unwrap(), settings.seed)
        .with_target(target);
    exp.bandwidth = settings.bandwidth;
    exp.density_grid = settings.density_grid;
    let table = rate_experiment(&law, &exp)?;

    let mut config = run_config(settings, "simulate", input);
    config.insert("grid".into(), spec.law.grid_size.to_string());
    config.insert("reps".into(), spec.replicates.unwrap().to_string());
    config.insert("spec".into(), serde_json::to_string(&spec).map_err(wasscov::Error::from)?);
    write_with(out_dir, "rate_table.csv", |w| io::write_rate_csv(w, &table, &config))
}
