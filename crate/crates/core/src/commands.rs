//! The `run`, `compare`, `pe` and `nodes` subcommands, independent of argument
//! parsing so they can be driven from tests.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::excitation;
use crate::io;
use crate::metrics::{self, SummaryTable, TableRow};
use crate::scenario::{trajectory_samples, ControllerKind, ControllerSpec, NetworkSource, ScenarioFile};
use crate::simulator::{self, Integrator, RunResult};
use crate::{Error, Result};

/// Values given on the command line that replace those of the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub integrator: Option<Integrator>,
    pub window: Option<[f64; 2]>,
    pub controllers: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Run,
    Compare,
    Pe,
    Nodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub subcommand: Subcommand,
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub overrides: Overrides,
}

/// Files written and non-fatal problems (e.g. one failed run in a comparison).
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Process exit status for an error: 2 config, 3 diverged, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Diverged { .. } => 3,
        _ => 1,
    }
}

/// Parses `A:B` into a window.
pub fn parse_window(s: &str) -> Result<[f64; 2]> {
    let bad = || Error::Config(format!("window '{s}' must look like A:B"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok([a, b])
}

/// Loads the scenario and applies the overrides.
pub fn load_scenario(cfg: &CliConfig) -> Result<ScenarioFile> {
    let mut file = ScenarioFile::load(&cfg.scenario)?;
    let o = &cfg.overrides;
    if let Some(d) = o.duration {
        file.duration = d;
        if o.window.is_none() && file.window.is_some_and(|w| w[1] > d) {
            file.window = None;
        }
    }
    if let Some(dt) = o.dt {
        file.dt = dt;
    }
    if let Some(seed) = o.seed {
        file.seed = seed;
    }
    if let Some(i) = o.integrator {
        file.integrator = i;
    }
    if let Some(w) = o.window {
        file.window = Some(w);
    }
    if let Some(labels) = &o.controllers {
        file.select_controllers(labels)?;
    }
    file.validate()?;
    Ok(file)
}

pub fn execute(cfg: &CliConfig) -> Result<Outcome> {
    let file = load_scenario(cfg)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", cfg.out.display())))?;
    match cfg.subcommand {
        Subcommand::Run => cmd_run(&file, &cfg.out),
        Subcommand::Compare => cmd_compare(&file, &cfg.out),
        Subcommand::Pe => cmd_pe(&file, &cfg.out),
        Subcommand::Nodes => cmd_nodes(&file, &cfg.out),
    }
}

/// `[window, last-10-s window]`, without repeats and only where the run
/// covers them.
fn report_windows(file: &ScenarioFile) -> Result<Vec<[f64; 2]>> {
    let main = file.metrics_window()?;
    let mut out = vec![main];
    let alt = [(file.duration - 10.0).max(0.0), file.duration];
    if alt != main {
        out.push(alt);
    }
    Ok(out)
}

fn run_summary(run: &RunResult, windows: &[[f64; 2]]) -> Result<Value> {
    let main = metrics::summarize(run, windows[0])?;
    let mut v = serde_json::to_value(&main)?;
    let mut alternates = Vec::new();
    for &w in &windows[1..] {
        alternates.push(serde_json::to_value(metrics::summarize(run, w)?)?);
    }
    v["alternate_windows"] = Value::Array(alternates);
    v["kind"] = serde_json::to_value(run.kind)?;
    v["samples"] = json!(run.len());
    v["final_state"] = serde_json::to_value(run.final_state)?;
    Ok(v)
}

/// Runs the first controller of the scenario.
pub fn cmd_run(file: &ScenarioFile, out: &Path) -> Result<Outcome> {
    let scenario = file.base_scenario();
    let run = simulator::run(&scenario)?;
    let windows = report_windows(file)?;
    let mut outcome = Outcome::default();

    let ts = out.join("timeseries.csv");
    io::write_timeseries_file(&ts, &run)?;
    outcome.files.push(ts);

    let summary = out.join("summary.json");
    io::write_json(&summary, &run_summary(&run, &windows)?)?;
    outcome.files.push(summary);

    let net = out.join("network_final.json");
    io::write_json(&net, &run.final_network)?;
    outcome.files.push(net);

    if run.final_network.is_some() {
        let w = out.join("weights.json");
        io::write_json(&w, &run.snapshots)?;
        outcome.files.push(w);
    }
    Ok(outcome)
}

/// File stem unique per controller entry: `{index}_{label}` with the label
/// reduced to `[A-Za-z0-9_-]`.
pub fn entry_stem(index: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:02}_{clean}")
}

/// Runs every controller and writes per-controller CSVs plus the table.
/// Fails only if every run fails.
pub fn cmd_compare(file: &ScenarioFile, out: &Path) -> Result<Outcome> {
    let base = file.base_scenario();
    let results = simulator::run_comparison(&base, &file.controllers);
    let windows = report_windows(file)?;
    let mut outcome = Outcome::default();
    let mut tables: Vec<Vec<TableRow>> = vec![Vec::new(); windows.len()];
    let mut first_error = None;
    let mut succeeded = 0;

    for (i, (spec, res)) in file.controllers.iter().zip(results).enumerate() {
        let stem = entry_stem(i, &spec.label);
        match res {
            Ok(run) => {
                succeeded += 1;
                let path = out.join(format!("{stem}.csv"));
                io::write_timeseries_file(&path, &run)?;
                outcome.files.push(path);
                if run.final_network.is_some() {
                    let path = out.join(format!("{stem}_weights.json"));
                    io::write_json(&path, &run.snapshots)?;
                    outcome.files.push(path);
                }
                for (table, &w) in tables.iter_mut().zip(&windows) {
                    table.push(match metrics::summarize(&run, w) {
                        Ok(s) => TableRow::Ok(s),
                        Err(e) => TableRow::Failed { label: spec.label.clone(), reason: e.to_string() },
                    });
                }
            }
            Err(e) => {
                outcome.warnings.push(format!("{}: {e}", spec.label));
                for table in &mut tables {
                    table.push(TableRow::Failed { label: spec.label.clone(), reason: e.to_string() });
                }
                first_error.get_or_insert(e);
            }
        }
    }
    let tables = tables
        .into_iter()
        .map(metrics::summary_table)
        .collect::<Result<Vec<SummaryTable>>>()?;
    let text: Vec<String> = tables.iter().map(SummaryTable::to_text).collect();
    let path = out.join("table.txt");
    std::fs::write(&path, text.join("\n"))?;
    outcome.files.push(path);

    let path = out.join("table.json");
    io::write_json(&path, &tables[0].to_json())?;
    outcome.files.push(path);
    if let Some(alt) = tables.get(1) {
        let path = out.join("table_alternate.json");
        io::write_json(&path, &alt.to_json())?;
        outcome.files.push(path);
    }
    match first_error {
        Some(e) if succeeded == 0 => Err(e),
        _ => Ok(outcome),
    }
}

fn network_entries(file: &ScenarioFile) -> Result<Vec<(usize, &ControllerSpec, &NetworkSource)>> {
    let nets: Vec<_> = file
        .controllers
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match (c.kind, &c.network) {
            (ControllerKind::Rbfnn, Some(src)) => Some((i, c, src)),
            _ => None,
        })
        .collect();
    if nets.is_empty() {
        return Err(Error::Config("scenario has no rbfnn controller to analyse".into()));
    }
    Ok(nets)
}

fn output_name(base: &str, ext: &str, index: usize, label: &str, single: bool) -> String {
    if single {
        format!("{base}.{ext}")
    } else {
        format!("{base}_{}.{ext}", entry_stem(index, label))
    }
}

/// Excitation report of every RBFNN controller's node distribution.
pub fn cmd_pe(file: &ScenarioFile, out: &Path) -> Result<Outcome> {
    let entries = network_entries(file)?;
    let single = entries.len() == 1;
    let window = file.pe_window();
    let mut outcome = Outcome::default();
    let mut report = serde_json::Map::new();

    for (i, spec, src) in entries {
        let net = src.build(&file.trajectory, file.seed)?;
        let r = excitation::excitation_report(&net, &file.trajectory, file.pe.t0, window, file.pe.dt)?;
        let mut v = serde_json::to_value(&r)?;
        v["verdict"] = json!(if r.persistently_exciting { "PE" } else { "not PE" });
        let key = if report.contains_key(&spec.label) { entry_stem(i, &spec.label) } else { spec.label.clone() };
        report.insert(key, v);
        if file.pe.gramian_csv {
            let path = out.join(output_name("gramian", "csv", i, &spec.label, single));
            io::write_matrix_csv_file(&path, &r.gramian)?;
            outcome.files.push(path);
        }
    }
    let path = out.join("pe_report.json");
    io::write_json(&path, &Value::Object(report))?;
    outcome.files.insert(0, path);
    Ok(outcome)
}

/// Centers of every RBFNN controller, next to the trajectory samples.
pub fn cmd_nodes(file: &ScenarioFile, out: &Path) -> Result<Outcome> {
    let entries = network_entries(file)?;
    let single = entries.len() == 1;
    let samples = trajectory_samples(&file.trajectory, file.pe.dt)?;
    let mut outcome = Outcome::default();

    for (i, spec, src) in entries {
        let (centers, sigma) = src.centers(&file.trajectory, file.seed).map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::invalid(format!("{}: {other} (seed {})", spec.label, node_seed(src, file.seed))),
        })?;
        let path = out.join(output_name("centers", "json", i, &spec.label, single));
        io::write_json(&path, &json!({"sigma": sigma, "centers": centers}))?;
        outcome.files.push(path);
        let path = out.join(output_name("nodes_vs_trajectory", "csv", i, &spec.label, single));
        io::write_nodes_vs_trajectory_file(&path, &samples, &centers)?;
        outcome.files.push(path);
    }
    Ok(outcome)
}

fn node_seed(src: &NetworkSource, scenario_seed: u64) -> u64 {
    match src {
        NetworkSource::Kmeans { seed: Some(s), .. } => *s,
        _ => scenario_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_flag_parsing() {
        assert_eq!(parse_window("1980:2000").unwrap(), [1980.0, 2000.0]);
        assert_eq!(parse_window(" 1.5 : 2 ").unwrap(), [1.5, 2.0]);
        assert!(matches!(parse_window("1980"), Err(Error::Config(_))));
        assert!(parse_window("a:b").is_err());
    }

    #[test]
    fn stems_are_filesystem_safe() {
        assert_eq!(entry_stem(3, "RBFNN-O"), "03_RBFNN-O");
        assert_eq!(entry_stem(0, "a/b c"), "00_a_b_c");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Diverged { step: 1, time: 0.01, speed: 1e7 }), 3);
        assert_eq!(exit_code(&Error::invalid("x")), 1);
    }
}
