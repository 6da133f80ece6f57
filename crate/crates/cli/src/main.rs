use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rytov_cli::scenario::ConventionTag;
use rytov_cli::{execute, Cache, CliError, Scenario};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "rytov", version, about = "Green's functions in weakly turbulent media")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write its result files.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the scenario's `output`, else `rytov-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        convention: Option<ConventionTag>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Skip the result cache.
        #[arg(long)]
        no_cache: bool,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Validate { scenario } => {
            let s = load(&scenario)?;
            println!("{}: ok ({})", scenario.display(), s.command.as_str());
        }
        Cmd::Run {
            scenario,
            out,
            seed,
            convention,
            threads,
            no_cache,
        } => {
            let mut s = load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(c) = convention {
                s.convention = c;
            }
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring the thread pool")?;
            }
            let out = out
                .or_else(|| s.output.clone())
                .unwrap_or_else(|| PathBuf::from("rytov-out"));
            let base = scenario.parent().map(Path::to_path_buf).unwrap_or_default();
            let cache = if no_cache { None } else { Cache::from_env() };
            let start = Instant::now();
            let outcome = execute(&s, &base, &out, cache.as_ref())
                .with_context(|| format!("running {}", scenario.display()))?;
            eprintln!(
                "{} {} files -> {} ({}, digest {}, {:.3} s)",
                s.command.as_str(),
                outcome.bundle.files.len(),
                outcome.output_dir.display(),
                if outcome.cached { "cached" } else { "computed" },
                &outcome.digest[..12],
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("reading {}", path.display()))
}
