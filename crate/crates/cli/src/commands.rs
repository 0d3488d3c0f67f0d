use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use socsim::communities::{track_evolution, write_evolution_csv, Group};
use socsim::eval::{
    calibration_loop, compare_distributions, compare_new_entities, configure, emit_report,
    fit_arrivals, fixture_log, CalibrationGrid, ComparisonReport, FixtureConfig, ReportFormat,
};
use socsim::linkpred::{evaluate_prediction, new_edges, predict_topk, CandidatePolicy, LinkModel};
use socsim::roles::{write_roles_csv, UserCategory};
use socsim::simulator::{run, SimConfig};
use socsim::sna::{all_metrics, write_metrics_csv};
use socsim::society::io::{read_path, write_csv};
use socsim::society::{snapshot, InteractionLog, SnapshotConfig, SocietySnapshot, Timestamp};

use crate::{Cli, Command, Format, Scope};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<socsim::Error> for CliError {
    fn from(e: socsim::Error) -> Self {
        if e.is_input_error() {
            CliError::input(e.to_string())
        } else {
            CliError::config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(window) = cli.window {
        cfg.step_seconds = window;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_log(path: &Path) -> Result<InteractionLog> {
    read_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// End of the window containing `last`, windows counted from `start`.
fn window_end(start: Timestamp, last: Timestamp, window: i64) -> Timestamp {
    let n = (last + 1 - start + window - 1) / window;
    start + window * n.max(1)
}

fn span(log: &InteractionLog, path: &Path) -> Result<(Timestamp, Timestamp)> {
    log.span()
        .ok_or_else(|| CliError::input(format!("{}: no events", path.display())))
}

struct Out<'a> {
    dir: &'a Path,
}

impl Out<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<fs::File>) -> socsim::Result<()>,
    ) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        Ok(path)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        // Through Value so map keys come out sorted.
        let value = serde_json::to_value(value).map_err(socsim::Error::from)?;
        let mut text = serde_json::to_string_pretty(&value).map_err(socsim::Error::from)?;
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.out)?;
    let out = Out { dir: &cli.out };
    match &cli.command {
        Command::Fixture {
            initial,
            windows,
            name,
        } => fixture(cli, &out, *initial, *windows, name),
        Command::Ingest { input } => ingest(&out, input),
        Command::Analyze { input, at } => analyze(&load_config(cli)?, &out, input, *at),
        Command::Communities { input, threshold } => {
            communities(&load_config(cli)?, &out, input, *threshold)
        }
        Command::PredictLinks {
            input,
            split,
            model,
            k,
        } => predict_links(&load_config(cli)?, &out, input, *split, model, *k),
        Command::AssignRoles { input, at } => assign_roles(&load_config(cli)?, &out, input, *at),
        Command::Simulate { input, split } => simulate(&load_config(cli)?, &out, input, *split),
        Command::Calibrate {
            input,
            split,
            rounds,
        } => calibrate(&load_config(cli)?, &out, input, *split, *rounds),
        Command::Compare {
            observed,
            predicted,
            split,
            at,
            scope,
            simulation,
        } => compare(
            &load_config(cli)?,
            &out,
            (observed, predicted),
            *split,
            *at,
            *scope,
            simulation.as_deref(),
        ),
        Command::Report { comparison, format } => report(&out, comparison, *format),
    }
}

fn fixture(cli: &Cli, out: &Out, initial: usize, windows: usize, name: &str) -> Result<()> {
    let mut fx = FixtureConfig {
        initial,
        windows,
        ..FixtureConfig::default()
    };
    if let Some(seed) = cli.seed {
        fx.seed = seed;
    }
    if let Some(window) = cli.window {
        fx.step_seconds = window;
    }
    let log = fixture_log(&fx)?;
    let path = out.write_with(name, |w| write_csv(log.events(), w))?;
    println!("wrote {} events to {}", log.len(), path.display());
    Ok(())
}

fn ingest(out: &Out, input: &Path) -> Result<()> {
    let log = load_log(input)?;
    out.write_with("events.csv", |w| write_csv(log.events(), w))?;
    match log.span() {
        Some((first, last)) => println!(
            "events={} entities={} first={first} last={last}",
            log.len(),
            log.entities().len()
        ),
        None => println!("events=0 entities=0"),
    }
    Ok(())
}

fn analysis_at(cfg: &SimConfig, input: &Path, at: Option<Timestamp>) -> Result<SocietySnapshot> {
    let log = load_log(input)?;
    let (start, last) = span(&log, input)?;
    let at = at.unwrap_or_else(|| window_end(start, last, cfg.step_seconds));
    Ok(snapshot(&log, at, &cfg.analysis())?)
}

fn analyze(cfg: &SimConfig, out: &Out, input: &Path, at: Option<Timestamp>) -> Result<()> {
    let s = analysis_at(cfg, input, at)?;
    let metrics = all_metrics(&s.relations, &cfg.analysis().sna)?;
    let mut text = s.to_canonical_json()?;
    text.push('\n');
    fs::write(out.path("snapshot.json"), text)?;
    out.write_with("metrics.csv", |w| write_metrics_csv(&metrics, w))?;
    out.write_with("roles.csv", |w| write_roles_csv(&s.roles, w))?;
    out.json("role_rules.json", &cfg.rules)?;
    out.json("groups.json", &s.groups)?;
    out.json("role_distribution.json", &s.role_distribution()?)?;
    println!(
        "t={} entities={} relations={} groups={}",
        s.time,
        s.entities.len(),
        s.relations.edge_count(),
        s.groups.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct WindowGroups<'a> {
    window_end: Timestamp,
    groups: &'a [Group],
}

fn communities(cfg: &SimConfig, out: &Out, input: &Path, threshold: f64) -> Result<()> {
    let log = load_log(input)?;
    let (start, last) = span(&log, input)?;
    let step = cfg.step_seconds;
    let end = window_end(start, last, step);
    let analysis = cfg.analysis();
    let mut per_window: Vec<(Timestamp, Vec<Group>)> = Vec::new();
    let mut t = start + step;
    while t <= end {
        per_window.push((t, snapshot(&log, t, &analysis)?.groups));
        t += step;
    }
    let mut evolution = Vec::new();
    for pair in per_window.windows(2) {
        for ev in track_evolution(&pair[0].1, &pair[1].1, threshold)? {
            evolution.push((pair[1].0, ev));
        }
    }
    let listing: Vec<WindowGroups> = per_window
        .iter()
        .map(|(t, g)| WindowGroups {
            window_end: *t,
            groups: g,
        })
        .collect();
    out.json("groups.json", &listing)?;
    out.write_with("evolution.csv", |w| write_evolution_csv(&evolution, w))?;
    println!(
        "windows={} evolution_events={}",
        per_window.len(),
        evolution.len()
    );
    Ok(())
}

fn predict_links(
    cfg: &SimConfig,
    out: &Out,
    input: &Path,
    split: Timestamp,
    model: &str,
    k: usize,
) -> Result<()> {
    let model: LinkModel = model
        .parse()
        .map_err(|e: socsim::Error| CliError::config(e.to_string()))?;
    let log = load_log(input)?;
    let (start, last) = span(&log, input)?;
    if split <= start || split > last {
        return Err(socsim::Error::DegenerateSplit(split).into());
    }
    let train = snapshot(&log, split, &cfg.analysis())?.relations;
    let end = window_end(start, last, cfg.step_seconds);
    let later_cfg = SnapshotConfig {
        lookback: end - split,
        ..cfg.analysis()
    };
    let test = snapshot(&log, end, &later_cfg)?.relations;
    let appeared = new_edges(&train, &test);
    let policy = CandidatePolicy::default();
    let preds = predict_topk(&train, model, k, policy);
    out.write_with("predictions.csv", |w| {
        socsim::linkpred::write_predictions_csv(&preds, w)
    })?;
    let score = evaluate_prediction(&train, &appeared, model, k, policy)?;
    out.json(
        "link_prediction.json",
        &json!({
            "model": model,
            "k": k,
            "split": split,
            "appeared": appeared.len(),
            "precision_at_k": score.precision_at_k,
            "recall_at_k": score.recall_at_k,
        }),
    )?;
    println!(
        "model={} k={k} precision={} recall={}",
        model.as_str(),
        score.precision_at_k,
        score.recall_at_k
    );
    Ok(())
}

fn assign_roles(cfg: &SimConfig, out: &Out, input: &Path, at: Option<Timestamp>) -> Result<()> {
    let s = analysis_at(cfg, input, at)?;
    out.write_with("roles.csv", |w| write_roles_csv(&s.roles, w))?;
    out.json("role_rules.json", &cfg.rules)?;
    let dist = s.role_distribution()?;
    out.json("role_distribution.json", &dist)?;
    for (c, v) in dist.iter() {
        println!("{c} {v}");
    }
    Ok(())
}

fn simulate(cfg: &SimConfig, out: &Out, input: &Path, split: Option<Timestamp>) -> Result<()> {
    let log = load_log(input)?;
    let (start, last) = span(&log, input)?;
    let (s0, run_cfg) = match split {
        Some(split) => configure(&log, split, cfg)?,
        None => {
            let at = window_end(start, last, cfg.step_seconds);
            let analysis = SnapshotConfig {
                lookback: at - start,
                ..cfg.analysis()
            };
            let s0 = snapshot(&log, at, &analysis)?;
            let arrival = fit_arrivals(&s0, start, cfg);
            (
                s0,
                SimConfig {
                    arrival,
                    ..cfg.clone()
                },
            )
        }
    };
    let outcome = run(&s0, &run_cfg)?;
    let mut predicted = log.before(s0.time).to_vec();
    predicted.extend_from_slice(outcome.synthetic.events());
    let predicted = InteractionLog::from_events(predicted)?;

    out.write_with("synthetic.csv", |w| {
        write_csv(outcome.synthetic.events(), w)
    })?;
    out.write_with("predicted.csv", |w| write_csv(predicted.events(), w))?;
    out.write_with("trajectory.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["step".to_owned(), "time".to_owned()];
        header.extend(UserCategory::ALL.iter().map(|c| c.to_string()));
        wtr.write_record(&header)?;
        for (i, dist) in outcome.trajectory.iter().enumerate() {
            let mut row = vec![
                (i + 1).to_string(),
                (s0.time + run_cfg.step_seconds * (i as i64 + 1)).to_string(),
            ];
            row.extend(UserCategory::ALL.iter().map(|c| dist.get(*c).to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    out.json(
        "simulation.json",
        &json!({
            "start": s0.time,
            "end": outcome.world.time,
            "initial_population": s0.entities.len(),
            "final_population": outcome.world.population(),
            "synthetic_events": outcome.synthetic.len(),
            "final_distribution": outcome.trajectory.last(),
            "config": run_cfg,
        }),
    )?;
    println!(
        "steps={} start={} end={} population={} events={}",
        run_cfg.steps,
        s0.time,
        outcome.world.time,
        outcome.world.population(),
        outcome.synthetic.len()
    );
    Ok(())
}

fn calibrate(
    cfg: &SimConfig,
    out: &Out,
    input: &Path,
    split: Timestamp,
    rounds: usize,
) -> Result<()> {
    let log = load_log(input)?;
    let result = calibration_loop(&log, split, cfg, &CalibrationGrid::default(), rounds)?;
    out.json("calibration.json", &result)?;
    out.json("calibrated_config.json", &result.best)?;
    println!(
        "best_l1={} rho={} observer_max_activity={} action_scale={}",
        result.best_l1,
        result.best.behavior.rho,
        result.best.rules.observer_max_activity,
        result.best.behavior.action_scale
    );
    Ok(())
}

fn compare(
    cfg: &SimConfig,
    out: &Out,
    (observed, predicted): (&Path, &Path),
    split: Option<Timestamp>,
    at: Option<Timestamp>,
    scope: Scope,
    simulation: Option<&Path>,
) -> Result<()> {
    let simulated = match simulation {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let v: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            v.get("config").cloned()
        }
        None => None,
    };
    let obs = load_log(observed)?;
    let pred = load_log(predicted)?;
    let (start, obs_last) = span(&obs, observed)?;
    let (_, pred_last) = span(&pred, predicted)?;
    let at = at.unwrap_or_else(|| window_end(start, obs_last.max(pred_last), cfg.step_seconds));
    let analysis = cfg.analysis();
    let report = match scope {
        Scope::All => compare_distributions(
            &snapshot(&obs, at, &analysis)?.role_distribution()?,
            &snapshot(&pred, at, &analysis)?.role_distribution()?,
        )?,
        Scope::New => {
            let split = split.ok_or_else(|| CliError::input("--scope new needs --split"))?;
            compare_new_entities(&obs, &pred, split, at, &analysis)?
        }
    };
    let scope = report.population_scope;
    let report = report.with_config(&json!({
        "at": at,
        "split": split,
        "scope": scope,
        "analysis": analysis,
        "seed": cfg.seed,
        "simulation": simulated,
    }))?;
    out.json("comparison.json", &report)?;
    println!(
        "scope={} l1={}",
        report.population_scope.as_str(),
        report.l1_distance
    );
    Ok(())
}

fn report(out: &Out, comparison: &Path, format: Format) -> Result<()> {
    let text = fs::read_to_string(comparison)
        .map_err(|e| CliError::input(format!("{}: {e}", comparison.display())))?;
    let r: ComparisonReport = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", comparison.display())))?;
    let formats: &[ReportFormat] = match format {
        Format::Csv => &[ReportFormat::Csv],
        Format::Json => &[ReportFormat::Json],
        Format::Svg => &[ReportFormat::Svg],
        Format::All => &ReportFormat::ALL,
    };
    for f in formats {
        let path = out.path(&format!("report.{}", f.extension()));
        fs::write(&path, emit_report(&r, *f)?)?;
        println!("{}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::window_end;

    #[test]
    fn window_end_rounds_up() {
        assert_eq!(window_end(0, 0, 10), 10);
        assert_eq!(window_end(0, 9, 10), 10);
        assert_eq!(window_end(0, 10, 10), 20);
        assert_eq!(window_end(5, 5, 10), 15);
    }
}
