//! Command-line runs: configuration resolution and command execution.
//!
//! Settings come from built-in defaults, then an optional TOML file
//! (`--config`), then flags; later sources win. The fully resolved settings
//! are echoed as `config.toml` in the output directory next to every artifact.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mtmf_core::analysis::{
    deviation_suite, smoothness_suite, spin_game_trace, summarize, write_deviation_csv, write_smoothness_csv,
    write_spin_csv, Grid, SpinGameTrace,
};
use mtmf_core::harness::{
    faceoff, train_with, write_faceoff_csv, write_faceoff_summary_csv, write_metrics_csv, write_purity_csv,
    write_type_log_csv, Contestant, FaceoffResult, FaceoffSpec, Lineup, TrainRun, TrainSpec, TypeSettings,
};
use mtmf_core::learning::{load_model, save_model, Algorithm, BetaSchedule, Hyperparams};
use mtmf_core::scenario::{ScenarioConfig, TypeMode};
use mtmf_core::QModelF64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Train,
    Faceoff,
    Analyze,
    Spin,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Faceoff => "faceoff",
            Command::Analyze => "analyze",
            Command::Spin => "spin",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mtmf", version, about = "Multi-type mean field Q-learning runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Self-play training; writes metrics and one model per group.
    Train(Flags),
    /// Frozen-policy games between contestants.
    Faceoff(Flags),
    /// Randomised checks of the approximation bounds.
    Analyze(Flags),
    /// The spin game trace for MFQ and MTMFQ.
    Spin(Flags),
}

impl CliCommand {
    pub fn split(self) -> (Command, Flags) {
        match self {
            CliCommand::Train(f) => (Command::Train, f),
            CliCommand::Faceoff(f) => (Command::Faceoff, f),
            CliCommand::Analyze(f) => (Command::Analyze, f),
            CliCommand::Spin(f) => (Command::Spin, f),
        }
    }
}

/// Flags shared by every command; each overrides the config file.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// TOML file with any of the settings below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in scenario (multi_battle, battle_gathering, predator_prey) or a scenario TOML file.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Use the full-scale populations of a built-in scenario.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Initial Boltzmann inverse temperature.
    #[arg(long)]
    pub beta0: Option<f64>,
    /// Number of inferred types when the scenario's types are unknown.
    #[arg(long)]
    pub types: Option<usize>,
    /// Algorithm per group, comma separated; a single name applies to all.
    /// For `spin`, the algorithms to trace.
    #[arg(long, value_delimiter = ',')]
    pub algo: Option<Vec<String>>,
    /// Spin-game stages.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Random instances per bound check.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Faceoff contestant, one per group: NAME:PATH (a model file or a
    /// training output directory) or `random`.
    #[arg(long = "contestant")]
    pub contestants: Vec<String>,
    /// Seating across games: fixed, cyclic or permutations.
    #[arg(long)]
    pub lineup: Option<Lineup>,
    /// Write per-step type labels (unknown-type training).
    #[arg(long)]
    pub log_types: bool,
}

/// Settings as read from a `--config` file; every key is optional.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub scenario: Option<String>,
    pub desk_scale: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub algorithms: Option<Vec<String>>,
    pub episodes: Option<usize>,
    pub games: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub beta0: Option<f64>,
    pub beta_growth: Option<f64>,
    pub batch_size: Option<usize>,
    pub replay_capacity: Option<usize>,
    pub radius: Option<usize>,
    pub types: Option<TypeSettings>,
    pub stages: Option<usize>,
    pub instances: Option<usize>,
    pub contestants: Option<Vec<String>>,
    pub lineup: Option<Lineup>,
    pub log_types: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: String,
    pub desk_scale: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub algorithms: Vec<String>,
    pub episodes: usize,
    pub games: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub beta0: f64,
    pub beta_growth: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub radius: usize,
    pub types: TypeSettings,
    pub stages: usize,
    pub instances: usize,
    pub contestants: Vec<String>,
    pub lineup: Lineup,
    pub log_types: bool,
}

impl RunConfig {
    /// Defaults, overlaid with `file`, overlaid with `flags`.
    pub fn resolve(command: Command, file: ConfigFile, flags: &Flags) -> Result<Self> {
        if let Some(c) = file.command {
            ensure!(c == command, "config file is for `{}`, not `{}`", c.name(), command.name());
        }
        let hyper = Hyperparams::<f64>::default();
        let default_algorithms = match command {
            Command::Spin => vec!["mfq".to_string(), "mtmfq".to_string()],
            _ => vec!["mtmfq".to_string()],
        };
        let mut types = file.types.unwrap_or_default();
        if let Some(m) = flags.types {
            types.num_types = m;
        }
        let contestants = if flags.contestants.is_empty() {
            file.contestants.unwrap_or_default()
        } else {
            flags.contestants.clone()
        };
        let config = Self {
            command,
            scenario: flags.scenario.clone().or(file.scenario).unwrap_or_else(|| "multi_battle".into()),
            desk_scale: !flags.full_scale && file.desk_scale.unwrap_or(true),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            algorithms: flags.algo.clone().or(file.algorithms).unwrap_or(default_algorithms),
            episodes: flags.episodes.or(file.episodes).unwrap_or(300),
            games: flags.games.or(file.games).unwrap_or(200),
            alpha: flags.alpha.or(file.alpha).unwrap_or(hyper.alpha),
            gamma: flags.gamma.or(file.gamma).unwrap_or(hyper.gamma),
            tau: flags.tau.or(file.tau).unwrap_or(hyper.tau),
            beta0: flags.beta0.or(file.beta0).unwrap_or(hyper.beta.initial),
            beta_growth: file.beta_growth.unwrap_or(hyper.beta.growth),
            batch_size: file.batch_size.unwrap_or(hyper.batch_size),
            replay_capacity: file.replay_capacity.unwrap_or(hyper.replay_capacity),
            radius: file.radius.unwrap_or(hyper.radius),
            types,
            stages: flags.stages.or(file.stages).unwrap_or(3),
            instances: flags.instances.or(file.instances).unwrap_or(1000),
            contestants,
            lineup: flags.lineup.or(file.lineup).unwrap_or(Lineup::Permutations),
            log_types: flags.log_types || file.log_types.unwrap_or(false),
        };
        config.parsed_algorithms()?;
        config.hyperparams().validate()?;
        config.types.validate()?;
        Ok(config)
    }

    pub fn from_flags(command: Command, flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Self::resolve(command, file, flags)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn parsed_algorithms(&self) -> Result<Vec<Algorithm>> {
        ensure!(!self.algorithms.is_empty(), "at least one algorithm is required");
        self.algorithms
            .iter()
            .map(|a| a.parse::<Algorithm>().map_err(|e| anyhow::anyhow!("algorithm `{a}`: {e}")))
            .collect()
    }

    pub fn hyperparams(&self) -> Hyperparams<f64> {
        Hyperparams {
            alpha: self.alpha,
            gamma: self.gamma,
            tau: self.tau,
            beta: BetaSchedule {
                initial: self.beta0,
                growth: self.beta_growth,
            },
            replay_capacity: self.replay_capacity,
            batch_size: self.batch_size,
            radius: self.radius,
        }
    }

    /// The scenario by built-in name or file; desk scale shrinks built-ins only.
    pub fn load_scenario(&self) -> Result<ScenarioConfig> {
        match ScenarioConfig::builtin(&self.scenario) {
            Some(s) if self.desk_scale => Ok(s.desk_scale()),
            Some(s) => Ok(s),
            None => {
                let path = Path::new(&self.scenario);
                ensure!(path.is_file(), "`{}` is neither a built-in scenario nor a file", self.scenario);
                ScenarioConfig::load(path).with_context(|| format!("loading scenario {}", path.display()))
            }
        }
    }
}

/// Model file of `group` inside a training output directory.
pub fn model_path(dir: &Path, group: usize) -> PathBuf {
    dir.join("models").join(format!("group_{group}.mtmf"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Runs `config`, writing artifacts under `config.out`. Returns the summary
/// lines meant for stdout.
pub fn execute(config: &RunConfig) -> Result<Vec<String>> {
    fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    fs::write(config.out.join("config.toml"), config.to_toml()?)?;
    match config.command {
        Command::Train => run_train(config),
        Command::Faceoff => run_faceoff(config),
        Command::Analyze => run_analyze(config),
        Command::Spin => run_spin(config),
    }
}

fn write_scenario(config: &RunConfig, scenario: &ScenarioConfig) -> Result<()> {
    fs::write(config.out.join("scenario.toml"), scenario.to_toml()?)?;
    Ok(())
}

fn per_group(algorithms: Vec<Algorithm>, groups: usize) -> Result<Vec<Algorithm>> {
    match algorithms.len() {
        1 => Ok(vec![algorithms[0]; groups]),
        n if n == groups => Ok(algorithms),
        n => bail!("{n} algorithms given for {groups} groups"),
    }
}

pub fn train_config(config: &RunConfig) -> Result<TrainSpec<f64>> {
    let scenario = config.load_scenario()?;
    let algorithms = per_group(config.parsed_algorithms()?, scenario.num_groups())?;
    Ok(TrainSpec {
        scenario,
        algorithms,
        hyper: config.hyperparams(),
        episodes: config.episodes,
        seed: config.seed,
        types: config.types,
        log_types: config.log_types,
        record_events: false,
    })
}

fn run_train(config: &RunConfig) -> Result<Vec<String>> {
    let spec = train_config(config)?;
    write_scenario(config, &spec.scenario)?;
    let algorithms = spec.algorithms.clone();
    let unknown = spec.scenario.mode == TypeMode::UnknownTypes;
    let run: TrainRun<f64> = train_with(spec, |_| {})?;

    write_metrics_csv(create(&config.out.join("metrics.csv"))?, &run.metrics, &algorithms)?;
    if unknown {
        write_purity_csv(create(&config.out.join("purity.csv"))?, &run.metrics)?;
    }
    if config.log_types {
        write_type_log_csv(create(&config.out.join("types.csv"))?, &run.type_log)?;
    }
    fs::create_dir_all(config.out.join("models"))?;
    for (g, model) in run.models.iter().enumerate() {
        save_model(model, model_path(&config.out, g))?;
    }

    let window = run.metrics.len().min(50);
    let mut lines = vec![format!("trained {} episodes", run.metrics.len())];
    for (g, alg) in algorithms.iter().enumerate() {
        let rewards: Vec<f64> = run.metrics.iter().map(|m| m.groups[g].reward).collect();
        let first = rewards[..window].iter().sum::<f64>() / window as f64;
        let last = rewards[rewards.len() - window..].iter().sum::<f64>() / window as f64;
        lines.push(format!(
            "group {g} ({alg}): mean reward first {window} episodes {first:.3}, last {window} {last:.3}"
        ));
    }
    if unknown {
        let tail: Vec<f64> = run.metrics.iter().rev().take(20).filter_map(|m| m.purity).collect();
        if !tail.is_empty() {
            lines.push(format!(
                "type purity over the last {} episodes: {:.4}",
                tail.len(),
                tail.iter().sum::<f64>() / tail.len() as f64
            ));
        }
    }
    Ok(lines)
}

/// Reads a contestant spec: `random`, `NAME:FILE` or `NAME:DIR`.
pub fn load_contestant(spec: &str, scenario: &ScenarioConfig, radius: usize) -> Result<Contestant<f64>> {
    if spec == "random" {
        return Ok(Contestant::frozen_random(scenario, radius)?);
    }
    let Some((name, path)) = spec.split_once(':') else {
        bail!("contestant `{spec}` is not `random` or NAME:PATH");
    };
    let path = Path::new(path);
    let models: Vec<QModelF64> = if path.is_dir() {
        (0..scenario.num_groups())
            .map(|g| {
                let file = model_path(path, g);
                load_model(&file).with_context(|| format!("loading {}", file.display()))
            })
            .collect::<Result<_>>()?
    } else {
        vec![load_model(path).with_context(|| format!("loading {}", path.display()))?]
    };
    Ok(Contestant::new(name, models))
}

fn run_faceoff(config: &RunConfig) -> Result<Vec<String>> {
    let scenario = config.load_scenario()?;
    let groups = scenario.num_groups();
    ensure!(
        config.contestants.len() == groups,
        "{} contestants given for {groups} groups",
        config.contestants.len()
    );
    let contestants = config
        .contestants
        .iter()
        .map(|c| load_contestant(c, &scenario, config.radius))
        .collect::<Result<Vec<_>>>()?;
    write_scenario(config, &scenario)?;
    let spec = FaceoffSpec {
        scenario,
        contestants,
        lineup: config.lineup,
        games: config.games,
        seed: config.seed,
        radius: config.radius,
        types: config.types,
    };
    let result: FaceoffResult = faceoff(&spec)?;
    write_faceoff_csv(create(&config.out.join("faceoff.csv"))?, &result)?;
    write_faceoff_summary_csv(create(&config.out.join("faceoff_summary.csv"))?, &result)?;
    let mut lines = vec![format!("played {} games", result.games)];
    for (name, wins) in result.contestants.iter().zip(&result.wins_per_contestant) {
        lines.push(format!("{name}: {wins} wins"));
    }
    Ok(lines)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_analyze(config: &RunConfig) -> Result<Vec<String>> {
    ensure!(config.instances > 0, "at least one instance is required");
    let deviation = deviation_suite(config.instances, config.seed)?;
    let smoothness = smoothness_suite(config.instances, config.seed)?;
    write_deviation_csv(create(&config.out.join("theorem12.csv"))?, &deviation)?;
    write_smoothness_csv(create(&config.out.join("theorem3.csv"))?, &smoothness)?;

    let t1 = summarize(&deviation, |r| r.holds_single);
    let t2 = summarize(&deviation, |r| r.holds_multi);
    let tighter = deviation.iter().filter(|r| r.multi_tighter).count();
    let t3 = summarize(&smoothness, |r| r.holds);
    let t3_squared = summarize(&smoothness, |r| r.holds_squared);
    let controls: Vec<_> = smoothness.iter().filter(|r| r.zero_hessian).collect();
    let exact = controls.iter().filter(|r| r.error <= 1e-12).count();
    Ok(vec![
        format!("{} theorem 1: {}/{} violations", verdict(t1.passed()), t1.violations, t1.instances),
        format!(
            "{} theorem 2: {}/{} violations, multi-type bound tighter on {tighter}/{}",
            verdict(t2.passed() && tighter == deviation.len()),
            t2.violations,
            t2.instances,
            deviation.len()
        ),
        format!(
            "{} theorem 3: {}/{} violations, zero-Hessian controls exact on {exact}/{}",
            verdict(t3.passed() && exact == controls.len()),
            t3.violations,
            t3.instances,
            controls.len()
        ),
        format!(
            "{} theorem 3 (squared-deviation bound): {}/{} violations",
            verdict(t3_squared.passed()),
            t3_squared.violations,
            t3_squared.instances
        ),
    ])
}

/// MTMFQ should never err; the single-field learners err exactly on the
/// grid-B stages.
fn spin_as_expected(trace: &SpinGameTrace<f64>) -> bool {
    match trace.algorithm {
        Algorithm::Mtmfq => trace.mistakes() == 0,
        _ => trace.stages.iter().all(|s| s.correct == (s.grid == Grid::A)),
    }
}

fn run_spin(config: &RunConfig) -> Result<Vec<String>> {
    let traces = config
        .parsed_algorithms()?
        .into_iter()
        .map(|alg| spin_game_trace(alg, config.stages, config.alpha))
        .collect::<mtmf_core::Result<Vec<_>>>()?;
    write_spin_csv(create(&config.out.join("spin.csv"))?, &traces)?;
    Ok(traces
        .iter()
        .map(|t| {
            format!(
                "{} spin {}: {} wrong moves in {} stages",
                verdict(spin_as_expected(t)),
                t.algorithm,
                t.mistakes(),
                t.stages.len()
            )
        })
        .collect())
}
