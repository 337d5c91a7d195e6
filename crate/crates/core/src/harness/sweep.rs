use std::fs::{self, File};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{activate, Solver};
use crate::channel::{realize_channel_with, Propagation};
use crate::error::{Error, Result};
use crate::field::{sample_field, sample_field_fixed};
use crate::harness::config::ExperimentConfig;
use crate::rng;

pub const CSV_HEADER: &str = "n,replication,seed,m_n,eta_n,solver,mode,wall_time_ms";

/// One Monte Carlo data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: f64,
    pub replication: u64,
    pub seed: u64,
    pub m_n: usize,
    pub eta_n: usize,
    pub solver: Solver,
    pub mode: Propagation,
    pub wall_time_ms: u64,
}

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.replication,
            self.seed,
            self.m_n,
            self.eta_n,
            self.solver.as_str(),
            self.mode.as_str(),
            self.wall_time_ms
        )
    }

    pub fn parse_row(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(Error::Format(format!("expected 8 columns, got {}: `{line}`", cols.len())));
        }
        fn num<T: std::str::FromStr>(name: &str, s: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad {name} value `{s}`")))
        }
        Ok(ExperimentRecord {
            n: num("n", cols[0])?,
            replication: num("replication", cols[1])?,
            seed: num("seed", cols[2])?,
            m_n: num("m_n", cols[3])?,
            eta_n: num("eta_n", cols[4])?,
            solver: cols[5].parse()?,
            mode: cols[6].parse()?,
            wall_time_ms: num("wall_time_ms", cols[7])?,
        })
    }
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], mut out: W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in records {
        out.write_all(r.csv_row().as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(CSV_HEADER) {
        return Err(Error::Format(format!("missing header `{CSV_HEADER}`")));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(ExperimentRecord::parse_row(line.trim_end())?);
    }
    Ok(out)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    read_records_csv(std::io::BufReader::new(File::open(path)?))
}

/// Seed for replication `replication` at intensity `n`.
pub fn replication_seed(master_seed: u64, n: f64, replication: u64) -> u64 {
    rng::derive_seed2(master_seed, n.to_bits(), replication)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Store measured wall time. Off by default so output bytes depend only on
    /// the config and seed.
    pub record_timing: bool,
}

/// field -> channel -> activation for one `(n, replication)`.
pub fn run_replication(cfg: &ExperimentConfig, n: f64, replication: u64, record_timing: bool) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let params = cfg.params(n);
    let seed = replication_seed(cfg.master_seed, n, replication);
    let field = if cfg.fixed_count {
        sample_field_fixed(&params, seed, (n * cfg.window_area).round() as usize)?
    } else {
        sample_field(&params, seed)?
    };
    let channel = realize_channel_with(&field, &params, seed, cfg.mode)?;
    let result = activate(&channel, &params, cfg.solver)?;
    Ok(ExperimentRecord {
        n,
        replication,
        seed,
        m_n: result.m_n,
        eta_n: result.eta_n,
        solver: cfg.solver,
        mode: cfg.mode,
        wall_time_ms: if record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))
}

/// Runs every `(n, replication)` of the config.
///
/// Completed records are written to `sink` in completion order; the returned
/// vector is sorted by `(n, replication)`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    opts: &SweepOptions,
    mut sink: Option<&mut dyn Write>,
) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let work: Vec<(usize, f64, u64)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (0..cfg.reps).map(move |r| (k, n, r)))
        .collect();
    let pool = pool(opts.workers)?;
    let (tx, rx) = mpsc::channel::<Result<(usize, ExperimentRecord)>>();

    let mut records: Vec<(usize, ExperimentRecord)> = Vec::with_capacity(work.len());
    let mut first_err: Option<Error> = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            pool.install(|| {
                work.par_iter().for_each_with(tx, |tx, &(k, n, r)| {
                    let _ = tx.send(run_replication(cfg, n, r, opts.record_timing).map(|rec| (k, rec)));
                });
            });
        });
        for item in rx {
            match item {
                Ok((k, rec)) => {
                    if let (Some(out), None) = (sink.as_mut(), first_err.as_ref()) {
                        let line = format!("{}\n", rec.csv_row());
                        if let Err(e) = out.write_all(line.as_bytes()) {
                            first_err = Some(e.into());
                        }
                    }
                    records.push((k, rec));
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    if let Some(out) = sink {
        out.flush()?;
    }
    records.sort_by_key(|(k, rec)| (*k, rec.replication));
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

pub const RECORDS_FILE: &str = "records.csv";
pub const PARTIAL_FILE: &str = "records.partial.csv";

/// Runs a sweep writing `records.csv` under `out_dir`.
///
/// Records stream into `records.partial.csv` while the sweep runs. On success
/// the sorted file replaces it; on failure the partial file is kept and named
/// in the error.
pub fn run_sweep_to_dir(cfg: &ExperimentConfig, opts: &SweepOptions, out_dir: &Path) -> Result<(Vec<ExperimentRecord>, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let partial = out_dir.join(PARTIAL_FILE);
    let keep_partial = |source: Error| Error::Sweep {
        partial: partial.clone(),
        source: Box::new(source),
    };
    let mut stream = BufWriter::new(File::create(&partial)?);
    writeln!(stream, "{CSV_HEADER}")?;
    let records = run_sweep(cfg, opts, Some(&mut stream)).map_err(keep_partial)?;
    drop(stream);
    let path = out_dir.join(RECORDS_FILE);
    let file = File::create(&path).map_err(|e| keep_partial(e.into()))?;
    write_records_csv(&records, BufWriter::new(file)).map_err(keep_partial)?;
    fs::remove_file(&partial)?;
    Ok((records, path))
}
