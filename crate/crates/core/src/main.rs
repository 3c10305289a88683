use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use drift_es::gradcheck::run_gradcheck;
use drift_es::harness::{load_config, run, write_csv};
use drift_es::{Error, Result};

#[derive(Parser)]
#[command(name = "drift-es", version, about = "ES / TD3 hybrid policy search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output CSV path from the config file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the config once per value of a swept key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Config key to sweep.
        #[arg(long)]
        key: String,
        /// Comma-separated values for the swept key.
        #[arg(long)]
        values: String,
    },
    /// Check analytic gradients against central finite differences.
    Gradcheck,
    /// Print the version string.
    Version,
}

/// Appends `_<key>_<value>` before the output file extension.
fn sweep_output(base: &Path, key: &str, value: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let safe_value = value.replace(['/', '\\'], "_");
    let mut name = format!("{stem}_{key}_{safe_value}");
    if let Some(ext) = base.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    base.with_file_name(name)
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output = out;
            }
            let logs = run(&cfg)?;
            write_csv(&logs, &cfg.output)?;
            println!(
                "{}: {} generations -> {}",
                cfg.algo,
                logs.len(),
                cfg.output.display()
            );
        }
        Command::Sweep {
            config,
            key,
            values,
        } => {
            let base = load_config(&config)?;
            let values: Vec<&str> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(Error::Config("sweep requires at least one value".into()));
            }
            for value in values {
                let mut cfg = base.clone();
                cfg.set(&key, value)?;
                cfg.validate()?;
                cfg.output = sweep_output(&base.output, &key, value);
                let logs = run(&cfg)?;
                write_csv(&logs, &cfg.output)?;
                println!("{key} = {value} -> {}", cfg.output.display());
            }
        }
        Command::Gradcheck => {
            let report = run_gradcheck(20, 0)?;
            println!("instances: {}", report.instances);
            println!("critic max rel err:          {:.3e}", report.critic_max_rel);
            println!(
                "actor (plain) max rel err:   {:.3e}",
                report.actor_none_max_rel
            );
            println!(
                "actor (L2 reg) max rel err:  {:.3e}",
                report.actor_l2_max_rel
            );
            println!(
                "actor (sq. L2) max rel err:  {:.3e}",
                report.actor_squared_max_rel
            );
            if !report.passes(1e-4) {
                return Err(Error::Numeric(format!(
                    "gradient check failed: worst relative error {:.3e} exceeds 1e-4",
                    report.worst()
                )));
            }
            println!("all gradients within 1e-4 of finite differences");
        }
        Command::Version => {
            println!("drift-es {}", env!("CARGO_PKG_VERSION"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
