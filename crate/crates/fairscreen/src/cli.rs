//! Command-line front end. Every command writes one JSON document (compact
//! unless `--pretty`) to `--out` or stdout; failures print an error record
//! on stderr and exit with 2 (invalid input) or 3 (runtime failure).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fairscreen_core::session::{ScoreBoard, ScoreEvent};
use fairscreen_core::{AppId, Section};
use serde::Serialize;

use crate::analysis::{self, Workspace};
use crate::config::Config;
use crate::docs::{write_json, Group, ModelDocument, ScoresFile, TablesFile};
use crate::error::{Error, ErrorBody, ErrorRecord, Result};
use crate::eventlog::{read_log, write_log};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "fairscreen", version, about = "Reviewer preference modelling and inconsistency analysis")]
pub struct Cli {
    /// TOML configuration file; FAIRSCREEN_* variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized step; defaults to the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Indented output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub group: PathBuf,
    #[arg(long)]
    pub tables: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScoreSource {
    /// Scores document.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Session log; its replay gives the scores.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a group file and write it back in canonical form.
    Ingest {
        #[arg(long)]
        group: PathBuf,
    },
    /// Check a group file, and optionally its tables.
    Validate {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// The twelve group indicators with box statistics and densities.
    Stats {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        selected: Option<u64>,
    },
    /// Train a preference model for one section.
    Train {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        source: ScoreSource,
        #[arg(long, value_parser = parse_section)]
        section: Section,
        /// Training application ids, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        samples: Vec<u64>,
        #[arg(long = "C")]
        c: Option<f64>,
    },
    /// Predicted scores of every application under a model.
    Predict {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        source: ScoreSource,
        #[arg(long)]
        model: PathBuf,
    },
    /// Deviations, inversions, time anomalies and score kurtosis.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        source: ScoreSource,
        /// Model documents, any number, at most one used per section.
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Score sheets, durations and revision counts from a session log.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// Comparison-view layout for one section.
    Layout {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        source: ScoreSource,
        #[arg(long, value_parser = parse_section)]
        section: Section,
        #[arg(long)]
        perplexity: Option<f64>,
    },
    /// Run the HTTP service.
    Serve,
    /// Write a synthetic group, tables and session log.
    Synth {
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_section(raw: &str) -> std::result::Result<Section, String> {
    Section::parse(raw).ok_or_else(|| format!("unknown section `{raw}`, expected EB, Com, Ho or ExA"))
}

fn workspace(inputs: &Inputs) -> Result<Workspace> {
    Ok(Workspace::new(Group::load(&inputs.group)?, TablesFile::load(&inputs.tables)?))
}

fn board(ws: &Workspace, source: &ScoreSource) -> Result<(ScoreBoard, Option<Vec<ScoreEvent>>)> {
    match (&source.scores, &source.log) {
        (Some(path), _) => {
            let mut board = ScoreBoard::with_apps(ws.group.ids());
            for sheet in ScoresFile::load(path)? {
                if ws.group.get(sheet.app_id).is_none() {
                    return Err(Error::UnknownApp(sheet.app_id));
                }
                for section in Section::ALL {
                    board.set(sheet.app_id, section, sheet.score(section));
                }
            }
            Ok((board, None))
        }
        (None, Some(path)) => {
            let log = read_log(path)?;
            Ok((ws.replay(&log)?, Some(log)))
        }
        (None, None) => Err(Error::Usage("one of --scores or --log is required".into())),
    }
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    group_id: String,
    applications: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    tables: Option<bool>,
}

#[derive(Serialize)]
struct SynthSummary {
    group: PathBuf,
    tables: PathBuf,
    log: PathBuf,
    applications: usize,
    events: usize,
}

/// Runs one command. `Serve` blocks until the server stops.
pub fn run(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(config.seed);
    let out = cli.out.as_deref();
    let pretty = cli.pretty;
    match cli.command {
        Command::Ingest { group } => write_json(&Group::load(&group)?, out, pretty),
        Command::Validate { group, tables } => {
            let group = Group::load(&group)?;
            let tables = tables.map(|t| TablesFile::load(&t).map(|_| true)).transpose()?;
            let report = Validation {
                valid: true,
                group_id: group.group_id.clone(),
                applications: group.applications.len(),
                tables,
            };
            write_json(&report, out, pretty)
        }
        Command::Stats { inputs, selected } => {
            write_json(&analysis::stats(&workspace(&inputs)?, selected.map(AppId))?, out, pretty)
        }
        Command::Train { inputs, source, section, samples, c } => {
            let ws = workspace(&inputs)?;
            let (board, _) = board(&ws, &source)?;
            let ids: Vec<AppId> = samples.into_iter().map(AppId).collect();
            let doc = analysis::train_model(&ws, &board, section, &ids, c.unwrap_or(config.c), seed)?;
            write_json(&doc, out, pretty)
        }
        Command::Predict { inputs, source, model } => {
            let ws = workspace(&inputs)?;
            let (board, _) = board(&ws, &source)?;
            let model = ModelDocument::load(&model)?;
            write_json(&analysis::predictions(&ws, &board, &model)?, out, pretty)
        }
        Command::Report { inputs, source, model, tau } => {
            let ws = workspace(&inputs)?;
            let (board, log) = board(&ws, &source)?;
            let models = model.iter().map(|p| ModelDocument::load(p)).collect::<Result<Vec<_>>>()?;
            let doc = analysis::report(&ws, &board, &models, log.as_deref(), tau.unwrap_or(config.tau))?;
            write_json(&doc, out, pretty)
        }
        Command::Replay { log, group } => {
            let events = read_log(&log)?;
            let ws = group.map(|g| Group::load(&g).map(|g| Workspace::new(g, Default::default()))).transpose()?;
            write_json(&analysis::replay(ws.as_ref(), &events)?, out, pretty)
        }
        Command::Layout { inputs, source, section, perplexity } => {
            let ws = workspace(&inputs)?;
            let (board, _) = board(&ws, &source)?;
            let mut embedding = config.embedding(seed);
            if let Some(p) = perplexity {
                embedding.perplexity = p;
            }
            write_json(&analysis::layout(&ws, &board, section, &embedding)?, out, pretty)
        }
        Command::Serve => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            let mut config = config;
            config.seed = seed;
            runtime.block_on(crate::service::serve(config)).map_err(|e| match e.downcast::<Error>() {
                Ok(e) => e,
                Err(e) => Error::io("<serve>", std::io::Error::other(e.to_string())),
            })
        }
        Command::Synth { count, out_dir } => {
            let fixture = synth::fixture(seed, count);
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let summary = SynthSummary {
                group: out_dir.join("group.json"),
                tables: out_dir.join("tables.json"),
                log: out_dir.join("session.log"),
                applications: count,
                events: fixture.log.len(),
            };
            write_json(&fixture.group, Some(&summary.group), true)?;
            write_json(&fixture.tables, Some(&summary.tables), true)?;
            write_log(&summary.log, &fixture.log)?;
            write_json(&summary, out, pretty)
        }
    }
}

fn print_error(record: &ErrorRecord) {
    eprintln!("{}", serde_json::to_string(record).expect("error records serialize"));
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            print_error(&ErrorRecord { error: ErrorBody { kind: "Usage".into(), message: e.to_string() } });
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            print_error(&e.record());
            e.exit_code()
        }
    }
}
