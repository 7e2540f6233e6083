//! `ppol` — drive the liabilities protocol from the command line.
//!
//! Verbs: `setup` (write an SRS file), `simulate` (run a workload and record
//! a transcript), `verify` (replay a transcript's checks), `attack` (run a
//! named adversarial scenario and demand detection), `bench` (phase
//! timings as CSV). Every flag can also be set through a `PPOL_`-prefixed
//! environment variable.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ppol_cli::scenario::{run_attack, Scenario};
use ppol_cli::sim::{run_simulation, SimConfig};
use ppol_cli::transcript::Transcript;
use ppol_cli::verify::{verify_transcript, Role};
use ppol_cli::{Curve, Srs};
use ppol_core::srs::{setup as srs_setup, SetupMode};

#[derive(Parser)]
#[command(
    name = "ppol",
    version,
    about = "permissioned proof-of-liabilities toolkit"
)]
struct Cli {
    /// Worker threads for MSM/FFT kernels (0 = all cores).
    #[arg(long, global = true, default_value_t = 1, env = "PPOL_THREADS")]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic (insecure, test-mode) SRS file.
    Setup {
        #[arg(long, env = "PPOL_N")]
        n: usize,
        #[arg(long, default_value_t = 0, env = "PPOL_SEED")]
        seed: u64,
        #[arg(long, env = "PPOL_OUT")]
        out: PathBuf,
    },
    /// Run a seeded workload and write transcript.bin + index.json.
    Simulate {
        #[arg(long, env = "PPOL_N")]
        n: usize,
        #[arg(long, default_value_t = 3, env = "PPOL_EPOCHS")]
        epochs: u64,
        /// Probability that an eligible user updates in an epoch.
        #[arg(
            long = "update-frac",
            default_value_t = 0.015625,
            env = "PPOL_UPDATE_FRAC"
        )]
        update_fraction: f64,
        #[arg(
            long = "regs-per-epoch",
            default_value_t = 4,
            env = "PPOL_REGS_PER_EPOCH"
        )]
        registrations_per_epoch: usize,
        #[arg(long, default_value_t = 0, env = "PPOL_SEED")]
        seed: u64,
        /// Existing SRS file; omitted = generate test-mode SRS from the seed.
        #[arg(long, env = "PPOL_SRS")]
        srs: Option<PathBuf>,
        #[arg(long, env = "PPOL_OUT")]
        out: PathBuf,
        /// Replace honest balance updates with dummy values (privacy
        /// simulator run).
        #[arg(long, default_value_t = false, env = "PPOL_SIMULATOR_MODE")]
        simulator_mode: bool,
    },
    /// Replay a recorded transcript's auditor and user checks.
    Verify {
        /// Transcript file or a directory produced by `simulate`.
        transcript: PathBuf,
        /// auditor | all | user:<index>
        #[arg(long, default_value = "all", env = "PPOL_ROLE")]
        role: String,
        #[arg(long, env = "PPOL_SRS")]
        srs: Option<PathBuf>,
    },
    /// Run one adversarial scenario (or all) and demand detection.
    Attack {
        /// otb-zeroing | unsigned-update | replay | key-removal |
        /// omitted-update | nonzero-registration | all
        #[arg(long, env = "PPOL_SCENARIO")]
        scenario: String,
        #[arg(long, default_value_t = 64, env = "PPOL_N")]
        n: usize,
        #[arg(long, default_value_t = 0, env = "PPOL_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1, env = "PPOL_TRIALS")]
        trials: u64,
    },
    /// Phase timings at size n, written as CSV.
    Bench {
        #[arg(long, env = "PPOL_N")]
        n: usize,
        #[arg(
            long = "updates-per-epoch",
            default_value_t = 16,
            env = "PPOL_UPDATES_PER_EPOCH"
        )]
        updates_per_epoch: usize,
        #[arg(long, default_value_t = 3, env = "PPOL_REPETITIONS")]
        repetitions: usize,
        #[arg(long, default_value_t = 0, env = "PPOL_SEED")]
        seed: u64,
        #[arg(long, env = "PPOL_SRS")]
        srs: Option<PathBuf>,
        /// CSV output path (stdout when omitted).
        #[arg(long, env = "PPOL_OUT")]
        out: Option<PathBuf>,
    },
}

fn load_or_generate_srs(path: Option<&Path>, n: usize, seed: u64) -> Result<Arc<Srs>> {
    match path {
        Some(p) => {
            let file = fs::File::open(p).with_context(|| format!("open SRS {}", p.display()))?;
            let srs = Srs::load(std::io::BufReader::new(file))?;
            if srs.n() != n {
                bail!("SRS capacity {} does not match --n {n}", srs.n());
            }
            Ok(Arc::new(srs))
        }
        None => {
            let (srs, _) = srs_setup::<Curve>(n, SetupMode::InsecureTest { seed })?;
            Ok(Arc::new(srs))
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let threads = if cli.threads == 0 {
        num_cpus()
    } else {
        cli.threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("build thread pool")?;
    pool.install(|| run(cli.command))
}

fn num_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Setup { n, seed, out } => {
            if !n.is_power_of_two() || n < 2 {
                bail!("--n must be a power of two ≥ 2, got {n}");
            }
            let (srs, _) = srs_setup::<Curve>(n, SetupMode::InsecureTest { seed })?;
            let mut file = std::io::BufWriter::new(fs::File::create(&out)?);
            srs.save(&mut file)?;
            println!(
                "wrote SRS: n={n} seed={seed} digest={} -> {}",
                hex::encode(srs.digest()),
                out.display()
            );
            Ok(())
        }
        Command::Simulate {
            n,
            epochs,
            update_fraction,
            registrations_per_epoch,
            seed,
            srs,
            out,
            simulator_mode,
        } => {
            let srs = load_or_generate_srs(srs.as_deref(), n, seed)?;
            let cfg = SimConfig {
                n,
                epochs,
                update_fraction,
                registrations_per_epoch,
                seed,
                simulator_mode,
            };
            let output = run_simulation(&cfg, Arc::clone(&srs))?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("transcript.bin"), output.transcript.to_bytes()?)?;
            fs::write(
                out.join("index.json"),
                serde_json::to_string_pretty(&output.transcript.json_index()?)?,
            )?;
            let mut srs_file = std::io::BufWriter::new(fs::File::create(out.join("srs.bin"))?);
            srs.save(&mut srs_file)?;
            println!(
                "simulated {} epochs at n={n}: {}",
                output.transcript.epochs.len(),
                if output.all_accepted {
                    "all checks passed"
                } else {
                    "CHECKS FAILED"
                }
            );
            if !output.all_accepted {
                bail!("in-process verification failed");
            }
            Ok(())
        }
        Command::Verify {
            transcript,
            role,
            srs,
        } => {
            let (transcript_path, default_srs) = if transcript.is_dir() {
                (
                    transcript.join("transcript.bin"),
                    Some(transcript.join("srs.bin")),
                )
            } else {
                (transcript.clone(), None)
            };
            let bytes = fs::read(&transcript_path)
                .with_context(|| format!("read {}", transcript_path.display()))?;
            let t = Transcript::from_bytes(&bytes)?;
            let srs_path = srs
                .or(default_srs)
                .context("no --srs given and the transcript path is not a simulate output dir")?;
            let file = fs::File::open(&srs_path)?;
            let srs = Srs::load(std::io::BufReader::new(file))?;

            let role = match role.as_str() {
                "auditor" => Role::Auditor,
                "all" => Role::All,
                other => match other.strip_prefix("user:") {
                    Some(i) => Role::User(i.parse().context("user index")?),
                    None => bail!("role must be auditor, all or user:<index>"),
                },
            };
            let report = verify_transcript(&t, &srs, &role)?;
            print!("{}", report.render());
            if !report.all_pass() {
                bail!("verification failed");
            }
            println!("all checks passed");
            Ok(())
        }
        Command::Attack {
            scenario,
            n,
            seed,
            trials,
        } => {
            let scenarios: Vec<Scenario> = if scenario == "all" {
                Scenario::ALL.to_vec()
            } else {
                vec![scenario.parse().map_err(anyhow::Error::msg)?]
            };
            let (srs, _) = srs_setup::<Curve>(n, SetupMode::InsecureTest { seed })?;
            let srs = Arc::new(srs);
            let mut undetected = 0u64;
            for sc in scenarios {
                for trial in 0..trials {
                    let outcome = run_attack(sc, Arc::clone(&srs), seed ^ (trial + 1))?;
                    println!(
                        "{}: trial {trial}: {}",
                        sc.name(),
                        if outcome.detected {
                            format!("detected at {}", outcome.failing_check)
                        } else {
                            "UNDETECTED".to_string()
                        }
                    );
                    if !outcome.detected {
                        undetected += 1;
                    }
                }
            }
            if undetected > 0 {
                bail!("{undetected} attack trial(s) went undetected");
            }
            Ok(())
        }
        Command::Bench {
            n,
            updates_per_epoch,
            repetitions,
            seed,
            srs,
            out,
        } => {
            let srs = load_or_generate_srs(srs.as_deref(), n, seed)?;
            let rows = ppol_cli::bench::run_bench(n, updates_per_epoch, repetitions, srs, seed)?;
            let csv = ppol_cli::bench::render_csv(&rows);
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
