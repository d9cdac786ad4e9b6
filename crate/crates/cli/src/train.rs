//! The `train` command: resolves the config, then runs each seed into its own
//! run directory, several seeds at a time when `MDGAN_THREADS` allows.

use crate::config;
use crate::Failure;
use clap::Args;
use mdgan::checkpoint::{self, Checkpoint};
use mdgan::trainer::{train, RunRecord, TrainConfig};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Args)]
pub struct TrainArgs {
    /// Config file path or preset name (grid_mdgan, grid_vanilla).
    #[arg(long, default_value = "grid_mdgan")]
    config: String,
    /// Single seed; overrides the config.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Several seeds, as `1,2,3` or `1-5`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    /// Parent directory; each seed writes to `<out>/seed-<n>`.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, value_parser = ["mdgan", "vanilla"])]
    objective: Option<String>,
    /// Generator steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Embedding dimension d (d + 1 clusters).
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Mixture standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Any config key, e.g. `--set generator.adam.lr=2e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = config::parse_override)]
    overrides: Vec<(String, String)>,
    /// Save a checkpoint every this many generator steps (0: final only).
    #[arg(long, default_value_t = 10_000)]
    checkpoint_every: u64,
    /// No progress lines on standard error.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Debug, PartialEq)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let bad = || format!("expected a seed list like 1,2,3 or 1-5, got {s:?}");
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(SeedList(out))
}

/// `MDGAN_THREADS`, defaulting to the number of available cores.
fn thread_cap() -> Result<usize, Failure> {
    match std::env::var("MDGAN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::usage(format!("MDGAN_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn resolve(a: &TrainArgs) -> Result<TrainConfig, Failure> {
    let mut cfg = TrainConfig::default();
    config::apply(&mut cfg, &config::flatten(&config::load_source(&a.config)?)?)?;
    let mut flags: Vec<(String, String)> = Vec::new();
    if let Some(o) = &a.objective {
        flags.push(("objective".into(), o.clone()));
    }
    if let Some(n) = a.steps {
        flags.push(("total_g_steps".into(), n.to_string()));
    }
    if let Some(d) = a.embed_dim {
        flags.push(("embed_dim".into(), d.to_string()));
    }
    if let Some(s) = a.sigma {
        flags.push(("sigma".into(), s.to_string()));
    }
    if let Some(s) = a.seed {
        flags.push(("seed".into(), s.to_string()));
    }
    config::apply(&mut cfg, &flags)?;
    config::apply(&mut cfg, &a.overrides)?;
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn run(a: TrainArgs) -> Result<(), Failure> {
    let base = resolve(&a)?;
    let seeds = a.seeds.clone().map_or_else(|| vec![base.seed], |s| s.0);
    if seeds.is_empty() {
        return Err(Failure::usage("no seeds given"));
    }
    let workers = thread_cap()?.min(seeds.len());
    fs::create_dir_all(&a.out)?;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord, Failure>>>> =
        Mutex::new((0..seeds.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&seed) = seeds.get(i) else { break };
                let cfg = TrainConfig { seed, ..base.clone() };
                let dir = a.out.join(format!("seed-{seed}"));
                let r = run_one(&cfg, &dir, a.checkpoint_every, a.quiet);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });

    let results = results.into_inner().expect("no worker panicked");
    let mut summary = String::new();
    let mut worst: Option<Failure> = None;
    for (seed, r) in seeds.iter().zip(results) {
        match r.expect("every seed was run") {
            Ok(rec) => {
                summary.push_str(&rec.to_ndjson());
                summary.push('\n');
                println!(
                    "seed {seed}: modes {}/{} hq {:.4} frechet {:.4}",
                    rec.modes.modes_captured,
                    rec.modes.per_mode_counts.len(),
                    rec.modes.hq_fraction,
                    rec.frechet
                );
            }
            Err(f) => {
                eprintln!("seed {seed}: {}", f.message);
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    if seeds.len() > 1 {
        fs::write(a.out.join("summary.ndjson"), summary)?;
    }
    match worst {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn save(ckpt: &Checkpoint, path: &Path) -> Result<(), Failure> {
    ckpt.save(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// One seed into `dir`: `config.toml`, `versions.txt`, `log.ndjson`,
/// `checkpoints/step-<n>.ckpt`, `final.ckpt` and `report.json`.
fn run_one(cfg: &TrainConfig, dir: &Path, checkpoint_every: u64, quiet: bool) -> Result<RunRecord, Failure> {
    fs::create_dir_all(dir.join("checkpoints"))?;
    fs::write(dir.join("config.toml"), config::echo(cfg))?;
    fs::write(
        dir.join("versions.txt"),
        format!(
            "mdgan {}\nmdgan-cli {}\ncheckpoint-format {}\n",
            mdgan::VERSION,
            env!("CARGO_PKG_VERSION"),
            checkpoint::VERSION
        ),
    )?;
    let mut log = BufWriter::new(File::create(dir.join("log.ndjson"))?);
    let seed = cfg.seed;
    let total = cfg.total_g_steps;
    let outcome = train(cfg, |rec, ckpt| {
        writeln!(log, "{}", rec.to_ndjson())?;
        log.flush()?;
        if checkpoint_every > 0 && rec.step % checkpoint_every == 0 {
            ckpt.save(dir.join("checkpoints").join(format!("step-{}.ckpt", rec.step)))?;
        }
        if !quiet {
            eprintln!(
                "[seed {seed}] step {}/{total}  d {:.4}  g {:.4}  modes {}  hq {:.3}  frechet {:.4}  ({:.1}s)",
                rec.step, rec.d_loss, rec.g_loss, rec.modes.modes_captured, rec.modes.hq_fraction, rec.frechet, rec.wall_time
            );
        }
        Ok(())
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let f = Failure::from(e);
            fs::write(dir.join("error.txt"), format!("{}\n", f.message))?;
            return Err(f);
        }
    };
    save(&outcome.checkpoint, &dir.join("final.ckpt"))?;
    let last = match outcome.records.last() {
        Some(r) => r.clone(),
        // Zero steps: evaluate the initial networks.
        None => mdgan::trainer::evaluate(&outcome.checkpoint, &cfg.dataset()?, cfg)?,
    };
    fs::write(dir.join("report.json"), format!("{}\n", last.to_ndjson()))?;
    Ok(last)
}
