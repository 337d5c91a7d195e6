use std::path::PathBuf;

use dipolenet::harness::fit::{fit_points, fit_scaling};
use dipolenet::harness::sweep::{read_records_csv, run_replication, write_records_csv};
use dipolenet::harness::{
    load_config, render_svg, run_sweep, summarize, ExperimentConfig, ExperimentRecord, ScalingFit, SweepOptions,
};
use dipolenet::stats::correlation;
use dipolenet::{Error, Propagation, Solver};
use rand_distr::{Distribution, Normal};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/scatter.svg")
}

fn fixed_records() -> Vec<ExperimentRecord> {
    let mut out = Vec::new();
    for (k, n) in [100.0, 200.0, 400.0, 800.0].into_iter().enumerate() {
        for r in 0..3u64 {
            let eta = 3 + 2 * k + r as usize;
            out.push(ExperimentRecord {
                n,
                replication: r,
                seed: 1000 * k as u64 + r,
                m_n: eta + 4,
                eta_n: eta,
                solver: Solver::Tblas,
                mode: Propagation::PathLoss,
                wall_time_ms: 0,
            });
        }
    }
    out
}

#[test]
fn svg_matches_golden_file() {
    let records = fixed_records();
    let fit = ScalingFit {
        c1: -6.5,
        scale: 3.0,
        exponent: 0.25,
        fixed_exponent: Some(0.25),
        residual_rms: 0.4,
        n_range: (100.0, 800.0),
        points: 4,
    };
    let svg = render_svg(&records, Some(&fit)).unwrap();
    let path = golden_path();
    if std::env::var_os("DIPOLENET_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(svg, golden);
    assert_eq!(svg.matches("<circle").count(), records.len());
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn single_record_rerun_is_identical() {
    let cfg = ExperimentConfig {
        n_grid: vec![150.0],
        reps: 1,
        master_seed: 99,
        ..ExperimentConfig::default()
    };
    let a = run_sweep(&cfg, &SweepOptions::default(), None).unwrap();
    let b = run_sweep(&cfg, &SweepOptions::default(), None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 1);
}

#[test]
fn csv_bytes_round_trip() {
    let cfg = ExperimentConfig {
        n_grid: vec![50.0, 100.0],
        reps: 4,
        ..ExperimentConfig::default()
    };
    let recs = run_sweep(&cfg, &SweepOptions { workers: 2, ..Default::default() }, None).unwrap();
    let mut bytes = Vec::new();
    write_records_csv(&recs, &mut bytes).unwrap();
    assert!(!bytes.contains(&b'\r') && !bytes.contains(&b'"'));
    assert_eq!(read_records_csv(bytes.as_slice()).unwrap(), recs);
}

#[test]
fn replication_streams_are_uncorrelated() {
    let cfg = ExperimentConfig {
        gamma_exp: 0.2,
        ..ExperimentConfig::default()
    };
    let pairs = 1_000;
    let count = |n: f64, r: u64| run_replication(&cfg, n, r, false).unwrap().m_n as f64;
    let a: Vec<f64> = (0..pairs).map(|r| count(40.0, r)).collect();
    let next: Vec<f64> = (0..pairs).map(|r| count(40.0, r + pairs)).collect();
    let other_n: Vec<f64> = (0..pairs).map(|r| count(41.0, r)).collect();
    // |r| below about three standard errors of a null correlation
    let bound = 3.0 / (pairs as f64).sqrt();
    let c1 = correlation(&a, &next);
    let c2 = correlation(&a, &other_n);
    assert!(c1.abs() < bound, "same n, different replication: {c1}");
    assert!(c2.abs() < bound, "different n, same replication: {c2}");
}

#[test]
fn mean_good_count_grows_with_n() {
    let cfg = ExperimentConfig {
        reps: 50,
        ..ExperimentConfig::default()
    };
    let recs = run_sweep(&cfg, &SweepOptions::default(), None).unwrap();
    assert!(recs.iter().all(|r| r.eta_n <= r.m_n));
    let mut means: Vec<(f64, f64)> = Vec::new();
    for chunk in recs.chunks(cfg.reps as usize) {
        means.push((chunk[0].n, chunk.iter().map(|r| r.m_n as f64).sum::<f64>() / chunk.len() as f64));
    }
    let inversions = means.windows(2).filter(|w| w[1].1 < w[0].1).count();
    assert!(inversions <= 1, "{means:?}");
    let summary = summarize(&recs, cfg.r_min);
    assert_eq!(summary.means.len(), cfg.n_grid.len());
    assert_eq!(summary.reference_c1, Some(192.0));
}

#[test]
fn fixed_exponent_fit_recovers_constant_under_noise() {
    let c = 150.0;
    let grid: Vec<f64> = (1..=10).map(|k| 100.0 * k as f64).collect();
    let noise = Normal::new(0.0, 3.0).unwrap();
    let mut rng = dipolenet::rng::stream(2024);
    let trials = 100;
    let estimates: Vec<f64> = (0..trials)
        .map(|_| {
            let points: Vec<(f64, f64)> = grid.iter().map(|&n| (n, c + n.powf(0.25) + noise.sample(&mut rng))).collect();
            let fit = fit_points(&points, Some(0.25)).unwrap();
            assert_eq!(fit.exponent, 0.25);
            assert!(fit.residual_rms >= 0.0);
            fit.c1
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let sd = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    assert!((mean - c).abs() <= 2.0, "mean estimate {mean}, sd {sd}");
    // OLS intercept s.d. for this grid is 3 * 1.988
    assert!((sd / (3.0 * 1.988) - 1.0).abs() < 0.25, "sd {sd}");
}

#[test]
fn fit_needs_four_distinct_n() {
    let recs: Vec<ExperimentRecord> = fixed_records().into_iter().filter(|r| r.n < 800.0).collect();
    assert!(matches!(fit_scaling(&recs, None), Err(Error::Fit(_))));
    assert!(fit_scaling(&fixed_records(), Some(0.25)).is_ok());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n_grid": [10, 20], "reps": 2, "mode": "no_pathloss", "solver": "greedy"}"#).unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.n_grid, vec![10.0, 20.0]);
    assert_eq!(cfg.mode, Propagation::NoPathLoss);
    assert_eq!(cfg.solver, Solver::Greedy);
    std::fs::write(&path, r#"{"foo": 1}"#).unwrap();
    let err = load_config(&path).unwrap_err();
    assert!(err.to_string().contains("foo"));
    assert!(matches!(load_config(dir.path().join("missing.json")), Err(Error::Io(_))));
}
