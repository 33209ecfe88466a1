use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use outletcheck::api::{self, AppState};
use outletcheck::canonical;
use outletcheck::fixtures;
use outletcheck::textfeat::tokenize;
use outletcheck::{Engine, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

/// News outlet reliability profiling and claim checking.
#[derive(Parser)]
#[command(name = "outletcheck", version)]
struct Cli {
    /// Engine config file.
    #[arg(long, short, global = true, env = "OUTLETCHECK_CONFIG", default_value = "config.toml")]
    config: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the corpus and outlet metadata.
    Ingest,
    /// Build and store profiles for every outlet.
    ProfileAll,
    /// Print the stored profile of one outlet.
    Profile { domain: String },
    /// Score one corpus article.
    ScoreArticle { id: String },
    /// Score a claim against the corpus.
    ScoreClaim {
        claim: String,
        /// Append the verdict to the store's verdict log.
        #[arg(long)]
        record: bool,
    },
    /// Train the reliability model on labeled outlets.
    Train,
    /// Summarize the profile store.
    Report,
    /// Serve the HTTP API.
    Serve {
        /// Listen address; overrides `server.bind`.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Write the golden fixture corpus and its config into a directory.
    MakeFixtures { dir: PathBuf },
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyClaim => Failure::Usage(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

fn emit(out: &Option<PathBuf>, value: &impl Serialize) -> Result<(), Failure> {
    let text = canonical::to_string(value)?;
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Data(Error::Io { path: path.clone(), source: e })),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::MakeFixtures { dir } = &cli.command {
        return emit(&cli.out, &fixtures::write_golden(dir)?);
    }
    if let Command::ScoreClaim { claim, .. } = &cli.command {
        if tokenize(claim).is_empty() {
            return Err(Failure::Usage("claim has no content tokens".into()));
        }
    }
    let engine = Engine::load(&cli.config)?;
    match cli.command {
        Command::Ingest => emit(&cli.out, &engine.ingest_report()),
        Command::ProfileAll => emit(&cli.out, &engine.profile_all()?),
        Command::Profile { domain } => {
            let domain = outletcheck::ingest::normalize_domain(&domain)?;
            let profile = engine.profile(&domain).ok_or(Error::MissingProfile(domain))?;
            emit(&cli.out, &profile)
        }
        Command::ScoreArticle { id } => emit(&cli.out, &engine.score_article_by_id(&id)?),
        Command::ScoreClaim { claim, record } => {
            let verdict = engine.score_claim(&claim)?;
            if record {
                engine.store.record_verdict(&verdict)?;
            }
            emit(&cli.out, &verdict)
        }
        Command::Train => emit(&cli.out, &engine.train()?),
        Command::Report => emit(&cli.out, &engine.report()?),
        Command::Serve { bind } => {
            let bind = bind.unwrap_or_else(|| engine.config.server.bind.clone());
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::Data(Error::Io { path: bind.clone().into(), source: e }))?;
            let state = AppState::new(engine, Some(cli.config.clone()));
            runtime.block_on(api::serve(state, &bind))?;
            Ok(())
        }
        Command::MakeFixtures { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
