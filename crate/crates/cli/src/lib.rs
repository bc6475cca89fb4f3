//! Command-line front end for `qglt-core`.
//!
//! Every subcommand prints one document to stdout: a JSON object whose
//! `manifest` key records how it was produced, or TSV preceded by a
//! `# manifest:` comment line. Exit status is 0 on success, 2 when a
//! gated check fails and 1 on usage or input errors.

pub mod args;
mod commands;
pub mod manifest;
pub mod settings;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Format};
use manifest::RunManifest;
use settings::{ConfigFile, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qglt_core::Error),
}

/// A finished command before the manifest is attached.
pub struct Output {
    pub json: Value,
    pub tsv: String,
    pub passed: bool,
}

/// Loaded input files, kept for digesting.
#[derive(Default)]
pub struct Inputs(Vec<(std::path::PathBuf, Vec<u8>)>);

impl Inputs {
    pub fn push(&mut self, path: &Path, bytes: Vec<u8>) {
        self.0.push((path.to_path_buf(), bytes));
    }
}

pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok((text, passed)) => {
            print!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Solve { .. } => "solve".into(),
        Command::Verify(v) => match v.check {
            Some(c) => format!("verify {}", serde_json::to_value(c).unwrap().as_str().unwrap_or_default()),
            None => "verify --suite".into(),
        },
        Command::Sweep(_) => "sweep".into(),
        Command::Search(_) => "search".into(),
        Command::Oracle { .. } => "oracle".into(),
    }
}

/// Run a parsed command and render it; returns the text and whether all
/// gated checks passed.
pub fn execute(cli: Cli) -> Result<(String, bool), CliError> {
    let settings = Settings::resolve(&cli.common, ConfigFile::from_env()?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let mut inputs = Inputs::default();
    let out = pool.install(|| commands::dispatch(&cli.command, &settings, &mut inputs))?;
    let digests: Vec<(&Path, &[u8])> = inputs.0.iter().map(|(p, b)| (p.as_path(), b.as_slice())).collect();
    let manifest = RunManifest::new(&command_name(&cli.command), &settings, &digests);
    let text = match settings.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("manifest".into(), serde_json::to_value(&manifest).expect("manifest serializes"));
            match out.json {
                Value::Object(map) => doc.extend(map),
                other => {
                    doc.insert("result".into(), other);
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Tsv => manifest.tsv_line() + &out.tsv,
    };
    Ok((text, out.passed))
}
