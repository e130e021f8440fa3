use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hamrec::scenario::{bundled, bundled_names, run_scenario, write_outputs, Scenario, ScenarioOutput};
use hamrec::Result;

/// Hamiltonian reconstruction from continuous weak-measurement records.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled scenario, a scenario TOML or a previous manifest.json.
    Run {
        scenario: String,
        /// Output root; `HAMREC_OUT` if unset, else `./out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        shots: Option<usize>,
        /// Zero readout noise and a single shot.
        #[arg(long)]
        noiseless: bool,
    },
    /// List bundled scenarios.
    List,
    /// Summarize a scenario.
    Describe { scenario: String },
    /// Check a scenario without running it.
    Validate { scenario: String },
}

fn resolve(name: &str) -> Result<Scenario> {
    let path = Path::new(name);
    if path.exists() {
        Scenario::load(path)
    } else {
        bundled(name)
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::List => {
            for name in bundled_names() {
                let s = bundled(name)?;
                let summary = s.description.split_whitespace().collect::<Vec<_>>().join(" ");
                let first = summary.split(". ").next().unwrap_or_default().trim_end_matches('.');
                println!("{name:<24} {first}");
            }
        }
        Command::Describe { scenario } => print!("{}", resolve(&scenario)?.describe()),
        Command::Validate { scenario } => {
            let s = resolve(&scenario)?;
            print_warnings(&s.validate()?);
            println!("{}: ok", s.name);
        }
        Command::Run {
            scenario,
            out,
            seed,
            shots,
            noiseless,
        } => {
            let mut s = resolve(&scenario)?;
            if let Some(seed) = seed {
                s = s.with_seed(seed);
            }
            if let Some(shots) = shots {
                s = s.with_shots(shots);
            }
            if noiseless {
                s = s.into_noiseless();
            }
            let root = out
                .or_else(|| std::env::var_os("HAMREC_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let output = run_scenario(&s)?;
            let dir = write_outputs(&root, &s, &output)?;
            match &output {
                ScenarioOutput::Sweep(points) => {
                    print_warnings(&points[0].run.warnings);
                    for p in points {
                        println!("{:>8} ns  mean fidelity {:.5}", p.duration_ns, p.run.fidelity.mean);
                    }
                }
                other => {
                    let run = other.primary();
                    print_warnings(&run.warnings);
                    println!("mean reconstruction fidelity {:.5}", run.fidelity.mean);
                    if let Some(p) = &run.preconditioning {
                        println!("preconditioning gain {:+.5}", p.gain);
                    }
                }
            }
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
