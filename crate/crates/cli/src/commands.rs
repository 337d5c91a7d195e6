use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dipolenet::activation::activate;
use dipolenet::asymptotics::{
    big_jump_check, feasibility_event_decay, mz_slln_check, poisson_slln_check, x_for_tail_mass, FeasibilitySchedule,
    LimitTestReport,
};
use dipolenet::channel::{realize_channel_with, tail_probability};
use dipolenet::field::{sample_field, sample_field_fixed};
use dipolenet::harness::sweep::load_records;
use dipolenet::harness::{emit_plot, fit_scaling, load_config, run_sweep_to_dir, summarize, ExperimentConfig, SweepOptions};
use dipolenet::Error;
use serde::Serialize;

use crate::{Command, GlobalOpts};

pub struct Failure {
    pub code: u8,
    pub error: Error,
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const RUNTIME: u8 = 2;
    pub const VERDICT: u8 = 3;

    fn usage(error: Error) -> Self {
        Failure {
            code: Self::USAGE,
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Parameter(_) | Error::Config { .. } | Error::Size { .. } => Failure::USAGE,
            _ => Failure::RUNTIME,
        };
        Failure { code, error }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = Result<u8, Failure>;

const DEFAULT_OUT: &str = "dipolenet-out";

fn config(global: &GlobalOpts) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &global.config {
        Some(path) => load_config(path).map_err(|e| match e {
            Error::Io(io) => Failure::usage(Error::Config {
                key: "<file>".into(),
                message: format!("cannot read {}: {io}", path.display()),
            }),
            other => Failure::usage(other),
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn out_dir(global: &GlobalOpts) -> PathBuf {
    global.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn set_workers(workers: usize) {
    if workers > 0 {
        // only fails if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    print_line(&text)
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn print_line(text: &str) -> Result<(), Failure> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `v` rounded to `digits` significant digits, in positional notation.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), v);
    }
    let exponent = v.abs().log10().floor() as i32;
    let render = |e: i32| format!("{:.*}", (digits as i32 - 1 - e).max(0) as usize, v);
    let text = render(exponent);
    // rounding can carry into a new leading digit (9.99.. -> 10.0..)
    let rounded: f64 = text.parse().unwrap_or(v);
    if rounded.abs().log10().floor() as i32 > exponent {
        render(exponent + 1)
    } else {
        text
    }
}

fn report(report: &LimitTestReport, csv: Option<&Path>) -> CmdResult {
    if let Some(path) = csv {
        let mut w = BufWriter::new(File::create(path)?);
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    print_json(report)?;
    Ok(if report.pass { 0 } else { Failure::VERDICT })
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a ExperimentConfig,
    records: usize,
    #[serde(flatten)]
    summary: dipolenet::harness::SweepSummary,
}

#[derive(Serialize)]
struct ActivationReport {
    h0: f64,
    p0: f64,
    m_n: usize,
    eta_n: usize,
    active_indices: Vec<usize>,
    min_active_rate: Option<f64>,
}

pub fn run(global: GlobalOpts, command: Command) -> CmdResult {
    set_workers(global.workers);
    match command {
        Command::Simulate { record_timing } => {
            let cfg = config(&global)?;
            let dir = out_dir(&global);
            let opts = SweepOptions {
                workers: global.workers,
                record_timing,
            };
            let (records, path) = run_sweep_to_dir(&cfg, &opts, &dir)?;
            let summary = SimulateSummary {
                config: &cfg,
                records: records.len(),
                summary: summarize(&records, cfg.r_min),
            };
            write_json(&summary, &dir.join("summary.json"))?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
            Ok(0)
        }
        Command::Fit { records, fix_exponent } => {
            let records = load_records(&records)?;
            let fit = fit_scaling(&records, fix_exponent)?;
            if let Some(dir) = &global.out {
                fs::create_dir_all(dir)?;
                write_json(&fit, &dir.join("fit.json"))?;
            }
            print_json(&fit)?;
            Ok(0)
        }
        Command::Plot {
            records,
            fix_exponent,
            output,
        } => {
            let records = load_records(&records)?;
            let fit = match fit_scaling(&records, fix_exponent) {
                Ok(fit) => Some(fit),
                Err(e) => {
                    eprintln!("note: plotting without a fitted curve ({e})");
                    None
                }
            };
            let path = match output {
                Some(p) => p,
                None => {
                    let dir = out_dir(&global);
                    fs::create_dir_all(&dir)?;
                    dir.join("plot.svg")
                }
            };
            emit_plot(&records, fit.as_ref(), &path)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::TailEval { alpha, z } => {
            let p = tail_probability(z, alpha)?;
            print_line(&format_significant(p, 12))?;
            Ok(0)
        }
        Command::SllnTest {
            p,
            alpha,
            sizes,
            reps,
            poisson,
            csv,
        } => {
            let seed = config(&global)?.master_seed;
            let r = if poisson {
                poisson_slln_check(p, alpha, &sizes, reps, seed)?
            } else {
                mz_slln_check(p, alpha, &sizes, reps, seed)?
            };
            report(&r, csv.as_deref())
        }
        Command::BigjumpTest {
            m,
            alpha,
            x,
            mass,
            reps,
            csv,
        } => {
            let seed = config(&global)?.master_seed;
            let xs = if x.is_empty() {
                vec![x_for_tail_mass(m, alpha, mass)?]
            } else {
                x
            };
            report(&big_jump_check(m, alpha, &xs, reps, seed)?, csv.as_deref())
        }
        Command::FeasibilityTest {
            delta,
            gamma,
            p,
            alpha,
            n_grid,
            reps,
            csv,
        } => {
            let cfg = config(&global)?;
            let schedule = FeasibilitySchedule {
                delta,
                gamma_exp: gamma,
                p,
                alpha,
                r_min_nats: cfg.r_min / cfg.bandwidth_hz,
            };
            report(
                &feasibility_event_decay(&schedule, &n_grid, reps, cfg.master_seed)?,
                csv.as_deref(),
            )
        }
        Command::Activate { solver, n } => {
            let cfg = config(&global)?;
            let n = n.unwrap_or(cfg.n_grid[0]);
            let params = cfg.params(n);
            params.validate()?;
            let seed = cfg.master_seed;
            let field = if cfg.fixed_count {
                sample_field_fixed(&params, seed, (n * cfg.window_area).round() as usize)?
            } else {
                sample_field(&params, seed)?
            };
            let channel = realize_channel_with(&field, &params, seed, cfg.mode)?;
            let result = activate(&channel, &params, solver)?;
            print_json(&ActivationReport {
                h0: result.h0,
                p0: result.p0,
                m_n: result.m_n,
                eta_n: result.eta_n,
                min_active_rate: result.min_active_rate(),
                active_indices: result.active_set,
            })?;
            Ok(0)
        }
    }
}
