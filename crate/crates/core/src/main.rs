use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lognls::harness::{self, figures, verify, RunManifest, EXIT_ASSERTION, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PASS};

#[derive(Parser)]
#[command(name = "lognls", version, about = "Logarithmic Schrödinger experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a key = value config file.
    Run {
        config: PathBuf,
        /// Extra `key=value` overrides applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Also write SVG figures into the output directory.
        #[arg(long)]
        plot: bool,
    },
    /// Run a config once per value of one key, in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Render SVG figures from the manifests under a directory.
    Figures { dir: PathBuf },
    /// Run every criterion check and print one line per criterion.
    Verify {
        #[arg(long, default_value = "out/verify")]
        work_dir: PathBuf,
    },
}

fn report(m: &RunManifest) {
    for a in &m.assertions {
        println!("  [{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.name, a.detail);
    }
    if let Some(msg) = &m.aborted {
        println!("  aborted: {msg}");
    }
    println!(
        "{}: {} ({:.2} s)",
        m.scenario,
        if m.passed() { "passed" } else { "failed" },
        m.wall_clock_seconds
    );
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config, set, plot } => {
            let scenario = harness::load_config(&config).and_then(|mut s| {
                for kv in &set {
                    let (k, v) = kv.split_once('=').ok_or_else(|| {
                        lognls::Error::InvalidParameter(format!("expected KEY=VALUE, got '{kv}'"))
                    })?;
                    s.set(k.trim(), v)?;
                }
                Ok(s)
            });
            match scenario.and_then(|s| harness::run_scenario(&s).map(|m| (m, s.params.out_dir))) {
                Ok((m, dir)) => {
                    report(&m);
                    if plot {
                        if let Err(e) = figures::emit_figures(&dir) {
                            eprintln!("figures: {e}");
                        }
                    }
                    harness::exit_code(&m)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    harness::error_exit_code(&e)
                }
            }
        }
        Command::Sweep { config, axis, values } => {
            let parent = match harness::load_config(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let mut code = EXIT_PASS;
            for (v, result) in values.iter().zip(harness::sweep(&parent, &axis, &values)) {
                println!("{axis} = {v}");
                let c = match result {
                    Ok(m) => {
                        report(&m);
                        harness::exit_code(&m)
                    }
                    Err(e) => {
                        eprintln!("  error: {e}");
                        harness::error_exit_code(&e)
                    }
                };
                code = code.max(c);
            }
            code
        }
        Command::Figures { dir } => match figures::emit_figures(&dir) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                EXIT_PASS
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        Command::Verify { work_dir } => match verify::run_all(&work_dir) {
            Ok(outcomes) => {
                for o in &outcomes {
                    println!("{o}");
                }
                if outcomes.iter().all(|o| o.passed) {
                    EXIT_PASS
                } else {
                    EXIT_ASSERTION
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                if matches!(e, lognls::Error::Config { .. } | lognls::Error::InvalidParameter(_)) {
                    EXIT_CONFIG
                } else {
                    EXIT_NUMERICAL
                }
            }
        },
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()) as u8)
}
