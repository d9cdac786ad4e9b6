//! `mdgan`: train, evaluate and inspect Mixture Density GAN runs on the
//! 2D Gaussian grid.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.

mod config;
mod svg;
mod train;

use clap::{Args, Parser, Subcommand};
use mdgan::checkpoint::Checkpoint;
use mdgan::gradcheck;
use mdgan::nn::Tensor;
use mdgan::synthdata::{write_points_csv, GridDataset};
use mdgan::trainer::{eval_rng, evaluate, generate, ObjectiveKind, TrainConfig};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mdgan", version, about = "Mixture Density GAN on the 2D Gaussian grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one or more seeds and write a run directory per seed.
    Train(train::TrainArgs),
    /// Evaluate a checkpoint and print its record as one NDJSON line.
    Eval(EvalArgs),
    /// Compare every analytic gradient with central finite differences.
    Gradcheck(GradcheckArgs),
    /// Scatter plot of generated against real samples, as SVG plus CSV.
    Plot(PlotArgs),
    /// Write generated samples as `x,y,kind` CSV.
    Sample(SampleArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint file written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Number of generated samples to score.
    #[arg(long, default_value_t = 2500)]
    samples: usize,
    /// High-quality radius in units of the data standard deviation.
    #[arg(long, default_value_t = mdgan::metrics::DEFAULT_THRESHOLD_SIGMAS)]
    threshold: f64,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Random cases per check.
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Source {
    /// Checkpoint to sample from.
    #[arg(long, required_unless_present = "ideal", conflicts_with = "ideal")]
    checkpoint: Option<PathBuf>,
    /// Sample the data distribution itself instead of a generator.
    #[arg(long)]
    ideal: bool,
    /// Number of points to draw.
    #[arg(long, default_value_t = 2500)]
    samples: usize,
    /// Sampling seed. Defaults to the checkpoint's evaluation stream.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    source: Source,
    /// Directory for `plot.svg` and `plot.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<mdgan::Error> for Failure {
    fn from(e: mdgan::Error) -> Self {
        match e {
            mdgan::Error::NonFinite { .. } => Self::numerical(e.to_string()),
            other => Self::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint, Failure> {
    Checkpoint::load(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let cfg = TrainConfig {
        eval_samples: a.samples,
        threshold_sigmas: a.threshold,
        ..TrainConfig::default()
    };
    let ds = GridDataset::with_data_sigma(ckpt.data_sigma)?;
    let rec = evaluate(&ckpt, &ds, &cfg)?;
    println!("{}", rec.to_ndjson());
    Ok(())
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<(), Failure> {
    if a.cases == 0 {
        return Err(Failure::usage("--cases must be at least 1"));
    }
    let report = gradcheck::run_suite(a.cases, a.seed)?;
    for c in &report.checks {
        println!(
            "{}",
            serde_json::json!({
                "check": c.name,
                "cases": c.cases,
                "max_rel_error": c.max_rel_error,
                "tolerance": c.tolerance,
                "passed": c.passed(),
            })
        );
    }
    if report.passed() {
        eprintln!("gradcheck passed, max relative error {:.3e}", report.max_rel_error());
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
        Err(Failure::numerical(format!("gradcheck failed: {}", failed.join(", "))))
    }
}

/// Points from a checkpoint's generator or from the data distribution.
/// Returns the points, the kind label, the dataset and a plot title.
fn draw(src: &Source) -> Result<(Tensor, &'static str, GridDataset, String), Failure> {
    if src.samples == 0 {
        return Err(Failure::usage("--samples must be at least 1"));
    }
    match &src.checkpoint {
        Some(path) => {
            let ckpt = load_checkpoint(path)?;
            let ds = GridDataset::with_data_sigma(ckpt.data_sigma)?;
            let mut rng = match src.seed {
                Some(s) => eval_rng(s, 0),
                None => eval_rng(ckpt.seed, ckpt.step),
            };
            let pts = generate(&ckpt, src.samples, &mut rng)?;
            let title = format!(
                "{} seed {} step {}",
                match ckpt.objective {
                    ObjectiveKind::MdGan => "MD-GAN",
                    ObjectiveKind::Vanilla => "vanilla GAN",
                },
                ckpt.seed,
                ckpt.step
            );
            Ok((pts, "generated", ds, title))
        }
        None => {
            let ds = GridDataset::default();
            let mut rng = eval_rng(src.seed.unwrap_or(0), 0);
            let pts = ds.sample_real(src.samples, &mut rng)?;
            Ok((pts, "ideal", ds, "ideal sampler".to_string()))
        }
    }
}

fn as_pairs(t: &Tensor) -> Vec<[f64; 2]> {
    t.iter_rows().map(|r| [r[0], r[1]]).collect()
}

fn cmd_plot(a: PlotArgs) -> Result<(), Failure> {
    let (generated, kind, ds, title) = draw(&a.source)?;
    // Reference data from a stream independent of the generated one.
    let mut rng = eval_rng(a.source.seed.unwrap_or(0) ^ 0x5eed, 1);
    let real = ds.sample_real(a.source.samples, &mut rng)?;
    std::fs::create_dir_all(&a.out)?;

    let mut csv = Vec::new();
    write_points_csv(&mut csv, &real, "real", true)?;
    write_points_csv(&mut csv, &generated, kind, false)?;
    std::fs::write(a.out.join("plot.csv"), csv)?;

    let real_pts = as_pairs(&real);
    let gen_pts = as_pairs(&generated);
    let extent = ds.spacing() * (ds.grid_size() as f64 - 1.0) / 2.0 + ds.spacing() / 2.0;
    let plot = svg::Scatter {
        title: &title,
        range: (-extent.ceil(), extent.ceil()),
        layers: vec![
            svg::Layer {
                label: "real",
                color: "#9a9a9a",
                radius: 1.4,
                points: &real_pts,
            },
            svg::Layer {
                label: kind,
                color: "#1f77b4",
                radius: 1.4,
                points: &gen_pts,
            },
        ],
        markers: ds.mode_centers(),
    };
    std::fs::write(a.out.join("plot.svg"), plot.render())?;
    eprintln!("wrote {} and {}", a.out.join("plot.svg").display(), a.out.join("plot.csv").display());
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<(), Failure> {
    let (pts, kind, _, _) = draw(&a.source)?;
    let mut buf = Vec::new();
    write_points_csv(&mut buf, &pts, kind, true)?;
    match &a.out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}
