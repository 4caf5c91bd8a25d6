use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ep_mimo::epcore::{DetectorParams, FloorSchedule, Variant};
use ep_mimo::sim::{run_experiment_with, ExperimentConfig};
use ep_mimo::verify::{run_all, VerifyOptions};

#[derive(Parser)]
#[command(name = "ep-mimo", version, about = "EP turbo detection for coded MIMO links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set sweep.channels=4`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Shorthand for `--set output.csv=PATH`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Shorthand for `--set output.plot_dir=DIR`.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated detector variants.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<Variant>,
        /// Print the resolved config and exit.
        #[arg(long)]
        dry_run: bool,
    },
    /// Check the detectors against closed forms and the exhaustive oracle.
    Verify {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 20_000)]
        ser_draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the self-iteration, damping and floor schedules of each variant.
    Params {
        #[arg(long, default_value_t = 5)]
        turbo_iters: usize,
    },
}

fn toml_path(p: &std::path::Path) -> String {
    format!("\"{}\"", p.display().to_string().replace('\\', "\\\\").replace('"', "\\\""))
}

fn run(cli: Cli) -> ep_mimo::Result<bool> {
    match cli.command {
        Command::Run {
            config,
            mut overrides,
            csv,
            plot_dir,
            seed,
            variants,
            dry_run,
        } => {
            if let Some(p) = csv {
                overrides.push(format!("output.csv={}", toml_path(&p)));
            }
            if let Some(p) = plot_dir {
                overrides.push(format!("output.plot_dir={}", toml_path(&p)));
            }
            if let Some(s) = seed {
                overrides.push(format!("sweep.seed={s}"));
            }
            if !variants.is_empty() {
                let names: Vec<String> = variants.iter().map(|v| format!("\"{v}\"")).collect();
                overrides.push(format!("sweep.variants=[{}]", names.join(", ")));
            }
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            if dry_run {
                print!("{}", cfg.to_toml());
                return Ok(true);
            }
            println!("variant  snr_db  ber          fer          time_s");
            run_experiment_with(&cfg, |r| {
                println!(
                    "{:<8} {:>6}  {:<12.4e} {:<12.4e} {:.2}",
                    r.variant.name(),
                    r.snr_db,
                    r.ber(),
                    r.fer(),
                    r.wall_time_s
                );
            })?;
            Ok(true)
        }
        Command::Verify {
            instances,
            ser_draws,
            seed,
        } => {
            let checks = run_all(&VerifyOptions {
                instances,
                ser_draws,
                seed,
            })?;
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Params { turbo_iters } => {
            for v in Variant::ALL {
                let p = DetectorParams::for_variant(v);
                println!("{v}: self-iterations {}, negative variances {:?}", p.self_iterations, p.negative_policy);
                let betas: Vec<String> = (0..=turbo_iters).map(|t| format!("{:.6}", p.beta(t))).collect();
                println!("  beta  t=0..{turbo_iters}: {}", betas.join(" "));
                if p.self_iterations > 0 {
                    let eps: Vec<String> = (1..=p.self_iterations).map(|l| format!("{:e}", p.epsilon(l))).collect();
                    let label = match p.floor {
                        FloorSchedule::Halving => "halving",
                        FloorSchedule::Constant(_) => "constant",
                    };
                    println!("  eps   l=1..{} ({label}): {}", p.self_iterations, eps.join(" "));
                }
                if p.uniform_tilted_prior {
                    println!("  moment matching uses a uniform prior");
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
