use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mascope::commands::{self, CliError};
use mascope::config;
use mascope::scenario::BuildParams;
use mascope_core::EngineKind;

#[derive(Parser)]
#[command(
    name = "mascope",
    about = "Deterministic multi-agent subgradient optimization runner",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the packaged scenarios
    List,
    /// Run a scenario and write trace.csv / trace.svg / meta.txt
    Run {
        #[arg(long)]
        scenario: String,
        /// Engine override: algo1, dual_avg or prox
        #[arg(long)]
        engine: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
        /// Output root; defaults to $MASCOPE_OUT or ./out
        #[arg(long)]
        out: Option<PathBuf>,
        /// key = value file with run overrides
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a scenario's assumptions without running it
    Validate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several engines on identical data and overlay the traces
    Compare {
        #[arg(long)]
        scenario: String,
        /// Comma-separated engine list, e.g. algo1,prox
        #[arg(long)]
        engines: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-point check for the counterexample construction
    Prop1,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own message; help/version requests exit 0
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn parse_flag_params(
    engine: Option<String>,
    seed: Option<u64>,
    iters: Option<usize>,
) -> Result<BuildParams, CliError> {
    let engine = engine
        .map(|e| EngineKind::parse(&e).map_err(|err| CliError::Usage(err.to_string())))
        .transpose()?;
    Ok(BuildParams {
        engine,
        seed,
        iters,
        ..BuildParams::default()
    })
}

fn merge(base: BuildParams, overlay: BuildParams) -> BuildParams {
    BuildParams {
        engine: overlay.engine.or(base.engine),
        seed: overlay.seed.or(base.seed),
        iters: overlay.iters.or(base.iters),
        step: overlay.step.or(base.step),
        network: overlay.network.or(base.network),
        network_d: overlay.network_d.or(base.network_d),
        log_stride: overlay.log_stride.or(base.log_stride),
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::List => {
            print!("{}", commands::list());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            engine,
            seed,
            iters,
            out,
            config: config_path,
        } => {
            let mut base = BuildParams::default();
            let mut scenario = scenario;
            if let Some(path) = config_path {
                let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let map =
                    config::parse_config(&text).map_err(|e| CliError::Usage(e.to_string()))?;
                let (file_scenario, params) =
                    config::params_from_map(&map).map_err(|e| CliError::Usage(e.to_string()))?;
                base = params;
                // the flag names the scenario; a config-file scenario key is
                // honored only when it agrees or the flag repeats the default
                if let Some(s) = file_scenario {
                    if s != scenario {
                        return Err(CliError::Usage(format!(
                            "config file names scenario '{s}' but --scenario is '{scenario}'"
                        )));
                    }
                    scenario = s;
                }
            }
            let flags = parse_flag_params(engine, seed, iters)?;
            let params = merge(base, flags);
            let summary = commands::run_scenario(&scenario, &params, &commands::output_root(out))?;
            print!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { scenario, seed } => {
            let params = BuildParams {
                seed,
                ..BuildParams::default()
            };
            let (report, all_pass) = commands::validate_scenario(&scenario, &params)?;
            print!("{report}");
            if all_pass {
                println!("validation: all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("validation: FAILED");
                Ok(ExitCode::from(1))
            }
        }
        Command::Compare {
            scenario,
            engines,
            seed,
            iters,
            out,
        } => {
            let params = parse_flag_params(None, seed, iters)?;
            let summary = commands::compare_scenario(
                &scenario,
                &engines,
                &params,
                &commands::output_root(out),
            )?;
            print!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Prop1 => {
            let report = commands::fixed_point_check()?;
            print!("{}", report.text);
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}
