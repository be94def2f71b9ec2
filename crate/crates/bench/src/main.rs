use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maqd_bench::config::ExperimentConfig;
use maqd_bench::design::{run_design, training_records};
use maqd_bench::output::{emit_csv, read_design};
use maqd_bench::sim::{run_fer, run_mi_track, with_workers, Decoder};
use maqd_bench::{inspect, workers_from_env, BenchError, DecoderKind, Result};

/// Design and evaluate coarsely quantized LDPC decoders.
///
/// Worker threads are taken from MAQD_WORKERS (default: all cores).
#[derive(Parser)]
#[command(name = "maqd", version)]
struct Cli {
    /// Experiment config (TOML); defaults apply to absent fields.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override config fields.
#[derive(Args, Default)]
struct Overrides {
    /// conventional, memory, merged-<wu>-<wp> or bp
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    msg_width: Option<u32>,
    /// flooding or layered
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    z: Option<usize>,
    #[arg(long, global = true)]
    rate: Option<String>,
    /// Design (training) seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluation seed.
    #[arg(long, global = true)]
    sweep_seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Design a decoder; the output file is rewritten after every iteration.
    Design {
        /// Design file to write.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Per-iteration training statistics as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Fixed design Eb/N0; without it the design SNR is searched.
        #[arg(long)]
        design_ebn0: Option<f64>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        inits: Option<usize>,
    },
    /// FER sweep of a design (or of the bp baseline).
    Fer {
        #[arg(long, short)]
        design: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Comma-separated Eb/N0 points in dB.
        #[arg(long, value_delimiter = ',')]
        ebn0: Option<Vec<f64>>,
        #[arg(long)]
        min_frame_errors: Option<u64>,
        #[arg(long)]
        max_frames: Option<u64>,
        /// Transmit without noise.
        #[arg(long)]
        noiseless: bool,
    },
    /// Per-iteration I(X; X_hat) of a design.
    MiTrack {
        #[arg(long, short)]
        design: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Eb/N0 in dB; defaults to the design SNR.
        #[arg(long)]
        ebn0: Option<f64>,
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Print a design in readable form.
    Inspect {
        design: PathBuf,
        /// Restrict to one region.
        #[arg(long)]
        region: Option<usize>,
        /// Print only the boundary table as CSV.
        #[arg(long)]
        boundaries: bool,
    },
}

fn apply(o: &Overrides, c: &mut ExperimentConfig) {
    if let Some(v) = &o.variant {
        c.decoder.variant = v.clone();
    }
    if let Some(w) = o.msg_width {
        c.decoder.msg_width = w;
    }
    if let Some(s) = &o.schedule {
        c.decoder.schedule = s.clone();
    }
    if let Some(m) = o.max_iter {
        c.decoder.max_iter = Some(m);
    }
    if let Some(z) = o.z {
        c.code.z = z;
    }
    if let Some(r) = &o.rate {
        c.code.rate = r.clone();
    }
    if let Some(s) = o.seed {
        c.design.seed = s;
    }
    if let Some(s) = o.sweep_seed {
        c.sweep.seed = s;
    }
}

fn design_path(flag: &Option<PathBuf>, c: &ExperimentConfig) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| c.output.design.clone())
        .ok_or_else(|| {
            BenchError::Config("no design file given (--design or output.design)".into())
        })
}

/// The decoder to evaluate and the design SNR if there is one.
fn decoder(c: &ExperimentConfig, design: &Option<PathBuf>) -> Result<(Decoder, Option<f64>)> {
    let code = c.code.build()?;
    match c.decoder.kind()? {
        DecoderKind::Bp => Ok((Decoder::bp(&code, c.decoder.max_iter()?), None)),
        DecoderKind::Quantized(_) => {
            let d = read_design(&design_path(design, c)?)?;
            let e = d.header.design_ebn0;
            Ok((Decoder::quantized(&code, &d)?, Some(e)))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    apply(&cli.overrides, &mut c);
    match &cli.command {
        Command::Design {
            design_ebn0,
            frames,
            inits,
            ..
        } => {
            if design_ebn0.is_some() {
                c.design.ebn0 = *design_ebn0;
            }
            c.design.frames = frames.unwrap_or(c.design.frames);
            c.design.inits = inits.unwrap_or(c.design.inits);
        }
        Command::Fer {
            ebn0,
            min_frame_errors,
            max_frames,
            noiseless,
            ..
        } => {
            if let Some(e) = ebn0 {
                c.sweep.ebn0 = e.clone();
            }
            c.sweep.min_frame_errors = min_frame_errors.unwrap_or(c.sweep.min_frame_errors);
            c.sweep.max_frames = max_frames.unwrap_or(c.sweep.max_frames);
            c.sweep.noiseless |= noiseless;
        }
        Command::MiTrack { frames, .. } => c.sweep.mi_frames = frames.unwrap_or(c.sweep.mi_frames),
        Command::Inspect { .. } => {}
    }
    c.validate()?;
    let workers = workers_from_env()?;
    match cli.command {
        Command::Design { out, report, .. } => {
            let path = out.or_else(|| c.output.design.clone());
            let run = with_workers(workers, || run_design(&c, path.as_deref()))?;
            if path.is_none() {
                print!("{}", run.design.to_text());
            }
            for (e, mi) in &run.attempts {
                log::info!("attempt {e:.4} dB: MI {mi:.6}");
            }
            if let Some(r) = report {
                emit_csv(&training_records(&run.report), Some(&r))?;
            }
        }
        Command::Fer { design, out, .. } => {
            let (dec, _) = decoder(&c, &design)?;
            let records = with_workers(workers, || run_fer(&dec, &c.sweep))?;
            emit_csv(&records, out.or_else(|| c.output.csv.clone()).as_deref())?;
        }
        Command::MiTrack {
            design, out, ebn0, ..
        } => {
            let (dec, design_ebn0) = decoder(&c, &design)?;
            let e = ebn0
                .or(design_ebn0)
                .or(c.sweep.ebn0.first().copied())
                .ok_or_else(|| BenchError::Config("no Eb/N0 for MI tracking".into()))?;
            let records = with_workers(workers, || {
                run_mi_track(&dec, e, c.sweep.mi_frames, c.sweep.seed, c.sweep.noiseless)
            })?;
            emit_csv(&records, out.or_else(|| c.output.csv.clone()).as_deref())?;
        }
        Command::Inspect {
            design,
            region,
            boundaries,
        } => {
            let d = read_design(&design)?;
            if region.is_some_and(|r| d.iterations.first().is_some_and(|it| r >= it.len())) {
                return Err(BenchError::Config(format!(
                    "region {} does not exist",
                    region.unwrap()
                )));
            }
            let text = if boundaries {
                inspect::boundary_table(&d, region)
            } else {
                inspect::inspect(&d, region)
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
