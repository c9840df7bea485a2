use clap::{Parser, Subcommand};
use rcim::analysis::Method;
use rcim::campaign::{
    cmd_analyze, cmd_report, cmd_run, preset, run_oracle, CampaignConfig, OracleOptions, RunOptions, Suite,
    OUTPUT_ROOT_ENV, PRESET_NAMES,
};
use rcim::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NOT_EQUILIBRATED: u8 = 3;
const EXIT_RUNTIME: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser)]
#[command(name = "rcim", version, about = "Random coupling Ising models for 3D color code thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign from a TOML file or a preset name.
    Run {
        /// Path to a campaign TOML file, or the name of a preset.
        config: String,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Output root (overrides the config; the environment variable overrides both).
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// Analyze a finished (or partial) campaign directory.
    Analyze {
        dir: PathBuf,
        /// Methods in priority order: heat, xi, wilson.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
    },
    /// Run the exact-oracle suites and print a JSON report.
    Oracle {
        /// Suites to run: identity, lemma, mc.
        #[arg(long, value_delimiter = ',', default_value = "identity,lemma,mc")]
        suites: Vec<Suite>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Render the markdown report of an analyzed campaign.
    Report { dir: PathBuf },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Structure(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn load_config(arg: &str) -> rcim::Result<CampaignConfig> {
    let path = PathBuf::from(arg);
    if path.exists() {
        CampaignConfig::load(&path)
    } else if PRESET_NAMES.contains(&arg) {
        preset(arg)
    } else {
        Err(Error::Config(format!("{arg:?} is neither a file nor a preset")))
    }
}

fn execute(cli: Cli) -> rcim::Result<u8> {
    match cli.command {
        Command::Run {
            config,
            resume,
            workers,
            output_root,
        } => {
            let mut cfg = load_config(&config)?;
            if output_root.is_some() {
                cfg.output_root = output_root;
            }
            let summary = cmd_run(&cfg, RunOptions { resume, workers })?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if summary.not_equilibrated.is_empty() {
                Ok(0)
            } else {
                eprintln!(
                    "warning: {} records failed the equilibration test",
                    summary.not_equilibrated.len()
                );
                Ok(EXIT_NOT_EQUILIBRATED)
            }
        }
        Command::Analyze { dir, methods } => {
            let (summary, outputs) = cmd_analyze(&dir, &methods)?;
            println!("{}", serde_json::to_string_pretty(&outputs)?);
            let poorly = summary.groups.iter().any(|g| g.equilibrated_fraction < 1.0);
            Ok(if poorly { EXIT_NOT_EQUILIBRATED } else { 0 })
        }
        Command::Oracle { suites, output, seed } => {
            let opts = OracleOptions {
                seed,
                ..Default::default()
            };
            let report = run_oracle(&suites, &opts)?;
            let text = serde_json::to_string_pretty(&report)?;
            match output {
                Some(p) => std::fs::write(p, &text)?,
                None => println!("{text}"),
            }
            Ok(if report.pass { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Report { dir } => {
            println!("{}", cmd_report(&dir)?.display());
            Ok(0)
        }
        Command::Presets { name } => {
            match name {
                Some(n) => print!("{}", preset(&n)?.to_toml()?),
                None => {
                    for n in PRESET_NAMES {
                        println!("{n}");
                    }
                    eprintln!("output root: ${OUTPUT_ROOT_ENV} overrides the configured directory");
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
