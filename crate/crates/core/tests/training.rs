//! End-to-end properties of the training loop, evaluation and checkpoints.

use mdgan::checkpoint::Checkpoint;
use mdgan::trainer::{
    embedding_snapshot, eval_rng, evaluate, evaluate_samples, train, ObjectiveKind, RunRecord, TrainConfig, Trainer,
};
use mdgan::Error;

fn small(objective: &str, steps: u64) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    for (k, v) in [
        ("objective", objective),
        ("embed_dim", "4"),
        ("batch_size", "32"),
        ("generator.hidden", "16,16"),
        ("discriminator.hidden", "16,16"),
        ("latent.latent_dim", "4"),
        ("eval_every", "10"),
        ("eval_samples", "200"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.total_g_steps = steps;
    cfg.seed = 5;
    cfg
}

#[test]
fn zero_steps_leave_initialisation_untouched() {
    let cfg = small("mdgan", 0);
    let out = train(&cfg, |_, _| panic!("no records expected")).unwrap();
    assert!(out.records.is_empty());
    let fresh = Trainer::new(cfg).unwrap().checkpoint();
    assert_eq!(out.checkpoint.to_bytes(), fresh.to_bytes());
    assert_eq!(out.checkpoint.step, 0);
}

#[test]
fn smoke_run_stays_finite() {
    let mut cfg = TrainConfig::default();
    cfg.total_g_steps = 500;
    cfg.embed_dim = 4;
    cfg.batch_size = 64;
    cfg.eval_every = 100;
    cfg.eval_samples = 500;
    let out = train(&cfg, |_, _| Ok(())).unwrap();
    let steps: Vec<u64> = out.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![100, 200, 300, 400, 500]);
    for r in &out.records {
        assert!(r.d_loss.is_finite() && r.g_loss.is_finite() && r.frechet.is_finite(), "{r:?}");
        assert!((0.0..=1.0).contains(&r.modes.hq_fraction));
    }
}

#[test]
fn final_record_when_off_cadence() {
    let out = train(&small("vanilla", 25), |_, _| Ok(())).unwrap();
    let steps: Vec<u64> = out.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![10, 20, 25]);
}

#[test]
fn identical_seeds_give_identical_logs() {
    for objective in ["mdgan", "vanilla"] {
        let cfg = small(objective, 40);
        let log = |cfg: &TrainConfig| {
            let mut lines = String::new();
            let out = train(cfg, |r, _| {
                lines.push_str(&r.to_ndjson());
                lines.push('\n');
                Ok(())
            })
            .unwrap();
            (lines, out.checkpoint.to_bytes())
        };
        let (a, ca) = log(&cfg);
        let (b, cb) = log(&cfg);
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let other = TrainConfig { seed: 6, ..cfg };
        assert_ne!(log(&other).0, a);
    }
}

fn timeless(r: &RunRecord) -> RunRecord {
    RunRecord { wall_time: 0.0, ..r.clone() }
}

#[test]
fn callback_checkpoint_matches_record() {
    let cfg = small("mdgan", 20);
    let ds = cfg.dataset().unwrap();
    train(&cfg, |r, ckpt| {
        assert_eq!(ckpt.step, r.step);
        assert_eq!(evaluate(ckpt, &ds, &cfg)?, timeless(r));
        Ok(())
    })
    .unwrap();
}

#[test]
fn callback_error_aborts() {
    let err = train(&small("mdgan", 30), |r, _| {
        if r.step == 20 {
            Err(Error::InvalidArgument("stop".into()))
        } else {
            Ok(())
        }
    })
    .unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn minimax_generator_loss_mirrors_discriminator_fake_term() {
    for d in [1, 4, 24] {
        let mut cfg = small("mdgan", 0);
        cfg.embed_dim = d;
        let mut trainer = Trainer::new(cfg).unwrap();
        for _ in 0..15 {
            trainer.step().unwrap();
        }
        let ckpt = trainer.checkpoint();
        let mut rng = eval_rng(99, d as u64);
        let fake = mdgan::trainer::generate(&ckpt, 64, &mut rng).unwrap();
        let real = trainer.config().dataset().unwrap().sample_real(64, &mut rng).unwrap();
        let dl = trainer.discriminator_loss_on(&real, &fake).unwrap();
        let g = trainer.generator_loss_on(&fake).unwrap();
        assert!((g - dl.fake_term).abs() <= 1e-10 * dl.fake_term.abs().max(1.0), "{g} vs {}", dl.fake_term);
        assert!((dl.loss.value + dl.real_term + dl.fake_term).abs() <= 1e-10 * dl.loss.value.abs().max(1.0));
    }
}

#[test]
fn step_reports_losses() {
    let mut trainer = Trainer::new(small("mdgan", 0)).unwrap();
    assert!(trainer.last_losses().d_loss.is_nan());
    let l = trainer.step().unwrap();
    assert_eq!(trainer.step_count(), 1);
    assert!(l.d_loss.is_finite() && l.g_loss.is_finite() && l.d_fake_term.is_finite());
    assert_eq!(trainer.last_losses(), l);
}

fn constant_generator(point: [f64; 2]) -> Checkpoint {
    let mut ckpt = Trainer::new(small("mdgan", 0)).unwrap().checkpoint();
    let params = ckpt.generator.params_mut();
    let n = params.len();
    params[n - 2].data_mut().fill(0.0);
    params[n - 1].data_mut().copy_from_slice(&point);
    ckpt
}

#[test]
fn constant_generator_captures_one_mode() {
    let cfg = small("mdgan", 0);
    let ds = cfg.dataset().unwrap();
    let rec = evaluate(&constant_generator([2.0, -4.0]), &ds, &cfg).unwrap();
    assert_eq!(rec.modes.modes_captured, 1);
    assert_eq!(rec.modes.hq_fraction, 1.0);
    let (hit, _) = ds.nearest_center(&[2.0, -4.0]);
    assert_eq!(rec.modes.per_mode_counts[hit], 200);

    let between = evaluate(&constant_generator([1.0, 1.0]), &ds, &cfg).unwrap();
    assert_eq!(between.modes.modes_captured, 0);
    assert_eq!(between.modes.hq_fraction, 0.0);
}

#[test]
fn ideal_sampler_scores_near_perfect() {
    // Within 3 data sigmas of a 2D isotropic Gaussian: 1 - exp(-4.5).
    let expected_hq = 1.0 - (-4.5f64).exp();
    let n = 2500;
    let sd = (expected_hq * (1.0 - expected_hq) / n as f64).sqrt();
    // Per-axis variance of the grid: spacing^2 * (k^2 - 1) / 12 + data_sigma^2.
    let var = 4.0 * 24.0 / 12.0 + 0.05f64.powi(2);
    // Mean-difference term of two independent samples has expectation 2 tr / n.
    let mean_term = 2.0 * 2.0 * var / n as f64;
    let cfg = TrainConfig::default();
    let ds = cfg.dataset().unwrap();
    for seed in 0..5 {
        let mut rng = eval_rng(seed, 7);
        let ideal = ds.sample_real(n, &mut rng).unwrap();
        let (report, frechet) = evaluate_samples(&ideal, &ds, 3.0, &mut rng).unwrap();
        assert_eq!(report.modes_captured, 25);
        assert!((report.hq_fraction - expected_hq).abs() < 5.0 * sd, "{}", report.hq_fraction);
        assert!(frechet >= 0.0 && frechet < 8.0 * mean_term, "{frechet} vs {mean_term}");
    }
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for objective in ["mdgan", "vanilla"] {
        let cfg = small(objective, 30);
        let out = train(&cfg, |_, _| Ok(())).unwrap();
        let path = dir.path().join(format!("{objective}.ckpt"));
        out.checkpoint.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, out.checkpoint);
        assert_eq!(back.to_bytes(), std::fs::read(&path).unwrap());
        let ds = cfg.dataset().unwrap();
        assert_eq!(evaluate(&back, &ds, &cfg).unwrap(), evaluate(&out.checkpoint, &ds, &cfg).unwrap());
        assert_eq!(evaluate(&back, &ds, &cfg).unwrap(), timeless(out.records.last().unwrap()));
    }
}

#[test]
fn corrupted_checkpoints_are_rejected() {
    let ckpt = train(&small("mdgan", 3), |_, _| Ok(())).unwrap().checkpoint;
    let bytes = ckpt.to_bytes();
    for cut in [0, 7, 8, 12, 60, bytes.len() - 1] {
        assert!(Checkpoint::from_bytes(&bytes[..cut]).is_err(), "truncated at {cut}");
    }
    let mut long = bytes.clone();
    long.push(0);
    assert!(Checkpoint::from_bytes(&long).is_err());
    let mut magic = bytes.clone();
    magic[0] ^= 1;
    assert!(Checkpoint::from_bytes(&magic).is_err());
    let mut version = bytes.clone();
    version[8] = 99;
    assert!(Checkpoint::from_bytes(&version).is_err());
    let mut kind = bytes;
    kind[12] = 7;
    assert!(Checkpoint::from_bytes(&kind).is_err());
}

#[test]
fn embedding_snapshot_contract() {
    let cfg = small("mdgan", 0);
    let ds = cfg.dataset().unwrap();
    let ckpt = Trainer::new(cfg.clone()).unwrap().checkpoint();
    let snap = embedding_snapshot(&ckpt, &ds, 300).unwrap();
    assert_eq!(snap.len(), 300);
    let mixture = cfg.mixture().unwrap();
    for p in &snap {
        assert_eq!(p.embedding.len(), 4);
        assert!(p.embedding.iter().all(|x| x.is_finite()) && p.distance.is_finite());
        assert!(p.component < 5);
        let (c, sq) = mixture.nearest_component(&p.embedding).unwrap();
        assert_eq!((c, sq.sqrt()), (p.component, p.distance));
    }
    assert_eq!(embedding_snapshot(&ckpt, &ds, 300).unwrap(), snap);
    assert!(matches!(embedding_snapshot(&ckpt, &ds, 0), Err(Error::InvalidArgument(_))));

    let vanilla = Trainer::new(small("vanilla", 0)).unwrap().checkpoint();
    assert_eq!(vanilla.objective, ObjectiveKind::Vanilla);
    assert!(embedding_snapshot(&vanilla, &ds, 10).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    for (k, v) in [("batch_size", "0"), ("embed_dim", "0"), ("eval_every", "0"), ("sigma", "-1")] {
        let mut cfg = TrainConfig::default();
        let ok = cfg.set(k, v).is_ok() && cfg.validate().is_ok();
        assert!(!ok, "{k}={v} accepted");
    }
}
