//! Trains one run on the 25-mode grid and prints a line per evaluation.
//!
//! cargo run --release -p mdgan --example train_grid -- objective=vanilla seed=3 total_g_steps=5000

use mdgan::trainer::{train, TrainConfig};

fn main() -> mdgan::Result<()> {
    let mut cfg = TrainConfig::default();
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("arguments are key=value");
        cfg.set(k, v)?;
    }
    let out = train(&cfg, |r, _| {
        println!(
            "step {:>6}  t {:>7.1}s  d {:>9.4}  g {:>9.4}  modes {:>2}  hq {:.3}  frechet {:.4}",
            r.step, r.wall_time, r.d_loss, r.g_loss, r.modes.modes_captured, r.modes.hq_fraction, r.frechet
        );
        Ok(())
    })?;
    if let Some(r) = out.records.last() {
        println!("{}", r.to_ndjson());
    }
    Ok(())
}
