use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mtbias::cli::{self, EvaluateOptions, RunStatus};
use mtbias::corpus::Suite;
use mtbias::report::single_table;

#[derive(Parser)]
#[command(name = "mtbias", version, about = "Gender bias evaluation for Hindi to English MT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the OTSC template over an occupation list.
    Generate {
        #[arg(long)]
        occupations: PathBuf,
        /// Template file; the bundled Hindi template is used when omitted.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Translate a sentence file with a configured backend.
    Translate {
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Backend name from the config file; optional if it defines only one.
        #[arg(long)]
        backend: Option<String>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Classify translations and score them.
    Evaluate {
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long)]
        translations: PathBuf,
        /// otsc, winomt or neutral
        #[arg(long)]
        suite: Suite,
        /// Exact pronoun sets and Ambiguous kept out of N.
        #[arg(long)]
        strict: bool,
        /// Count Neutral predictions as correct.
        #[arg(long)]
        neutral_as_positive: bool,
        /// Recompute WinoMT pro/anti tags from these lists.
        #[arg(long)]
        stereotype_lists: Option<PathBuf>,
        /// Custom pronoun sets, a file with [male] and [female] sections.
        #[arg(long)]
        pronouns: Option<PathBuf>,
        /// Warn instead of failing when an input does not match its manifest.
        #[arg(long)]
        allow_digest_mismatch: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Print a comparison table for report files of one suite.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> mtbias::Result<ExitCode> {
    match cli.command {
        Command::Generate {
            occupations,
            template,
            output,
        } => {
            let out = cli::cmd_generate(template.as_deref(), &occupations, &output)?;
            for (q, n) in &out.per_quadrant {
                println!("{}  {n}", q.as_str());
            }
            println!("{} sentences written to {}", out.records, output.display());
        }
        Command::Translate {
            sentences,
            config,
            backend,
            output,
        } => {
            let out = cli::cmd_translate(&sentences, &config, backend.as_deref(), &output)?;
            println!(
                "{} records: {} attempted, {} resumed, {} failed",
                out.total, out.translated_now, out.reused, out.failed
            );
            if out.status == RunStatus::Partial {
                eprintln!("partial run: {} items failed, see {}", out.failed, output.display());
                return Ok(ExitCode::from(3));
            }
        }
        Command::Evaluate {
            sentences,
            translations,
            suite,
            strict,
            neutral_as_positive,
            stereotype_lists,
            pronouns,
            allow_digest_mismatch,
            output,
        } => {
            let options = EvaluateOptions {
                strict,
                neutral_as_positive,
                stereotype_lists,
                pronoun_sets: pronouns,
                allow_digest_mismatch,
            };
            let report = cli::cmd_evaluate(&sentences, &translations, suite, &options, &output)?;
            print!("{}", single_table(&report));
        }
        Command::Report { reports } => {
            print!("{}", cli::cmd_report(&reports)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
