use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use repcomm::harness::{self, HarnessError, PresetOutcome, ScenarioConfig};
use repcomm::par::Execution;

#[derive(Parser)]
#[command(
    name = "repcomm",
    version,
    about = "Reputation dynamics of peer-evaluating communities"
)]
struct Cli {
    /// Worker threads for sweeps and multi-seed runs (1 = sequential).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Suppress progress and summary output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Final p_c over a two-parameter grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Agent-based runs compared against the ODE.
    Oracle {
        config: PathBuf,
        /// Number of consecutive seeds, starting at oracle_seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check and classify the equilibrium family.
    Equilibria {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced three-level vector field.
    Field {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in configuration.
    Preset {
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// List available presets.
        #[arg(long)]
        list: bool,
    },
}

fn read_config(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| {
        harness::ConfigError {
            line: None,
            message: format!("{}: {e}", path.display()),
        }
        .into()
    })
}

fn out_dir(out: Option<PathBuf>, config: &ScenarioConfig) -> PathBuf {
    out.unwrap_or_else(|| config.output_dir.clone())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let exec = Execution::with_workers(cli.workers);
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match cli.command {
        Command::Simulate { config, out } => {
            let c = harness::parse_config(&read_config(&config)?)?;
            let dir = out_dir(out, &c);
            let report = harness::run_scenario(&c, &dir)?;
            say(format!(
                "final p_c = {} at t = {}; output in {}",
                harness::fmt_num(report.trajectory.final_pc()),
                harness::fmt_num(c.t_end),
                dir.display()
            ));
            if let Some(tv) = report.oracle_tv {
                say(format!(
                    "oracle final total-variation distance = {}",
                    harness::fmt_num(tv)
                ));
            }
        }
        Command::Sweep { config, out } => {
            let s = harness::parse_sweep_config(&read_config(&config)?)?;
            let dir = out_dir(out, &s.base);
            let result = harness::run_sweep(&s, &dir, exec)?;
            let cells = result.cells.iter().flatten().count();
            let unconverged = result
                .cells
                .iter()
                .flatten()
                .filter(|c| !c.converged)
                .count();
            say(format!(
                "{cells} points ({unconverged} not stationary by t_end); output in {}",
                dir.display()
            ));
        }
        Command::Oracle { config, seeds, out } => {
            let c = harness::parse_config(&read_config(&config)?)?;
            let first = c.oracle.map(|o| o.seed).unwrap_or(1);
            let list: Vec<u64> = (first..first + seeds.max(1)).collect();
            let cmp = harness::compare_oracle(&c, &list, exec)?;
            let dir = out_dir(out, &c);
            harness::write_oracle_comparison(&cmp, &dir)?;
            for (seed, tv) in list.iter().zip(&cmp.tv) {
                say(format!(
                    "seed {seed}: total-variation distance {}",
                    harness::fmt_num(*tv)
                ));
            }
            say(format!(
                "median {}; output in {}",
                harness::fmt_num(cmp.median_tv()),
                dir.display()
            ));
        }
        Command::Equilibria { config, out } => {
            let c = harness::parse_config(&read_config(&config)?)?;
            let rows = harness::equilibria(&c)?;
            let csv = harness::equilibria_csv(&rows);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::write(dir.join("equilibria.csv"), &csv))
                    .map_err(|source| HarnessError::Io {
                        path: dir.clone(),
                        source,
                    })?;
            }
            say(csv.trim_end().to_string());
        }
        Command::Field { config, out } => {
            let c = harness::parse_config(&read_config(&config)?)?;
            let dir = out_dir(out, &c);
            let samples = harness::emit_vector_field(&c, &dir)?;
            say(format!(
                "{} field samples; output in {}",
                samples.len(),
                dir.display()
            ));
        }
        Command::Preset { name, out, list } => {
            if list {
                for p in harness::presets::catalog() {
                    println!("{:<14} {}", p.name, p.description);
                }
                return Ok(());
            }
            let name = name.expect("clap requires a name without --list");
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&name));
            match harness::run_preset(&name, &dir, exec)? {
                PresetOutcome::Scenario(r) => say(format!(
                    "final p_c = {}; output in {}",
                    harness::fmt_num(r.trajectory.final_pc()),
                    dir.display()
                )),
                PresetOutcome::Sweep(s) => say(format!(
                    "{} points; output in {}",
                    s.cells.iter().flatten().count(),
                    dir.display()
                )),
                PresetOutcome::Field(f) => say(format!(
                    "{} field samples; output in {}",
                    f.len(),
                    dir.display()
                )),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
