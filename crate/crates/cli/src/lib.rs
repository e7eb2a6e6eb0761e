//! Command-line front end for the fingerloc simulator.

// `!(x >= lo)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fingerloc::crlb::{crlb_at, crlb_closed_form, CrlbParams};
use fingerloc::experiments::{
    self, rssi_comparison, run_experiment, sweep, PresetKind, SweepAxis, CDF_POINTS,
};
use fingerloc::fingerprint::{build_database, database_to_string, load_database};
use fingerloc::matching::Matcher;
use fingerloc::{Fingerprint, MatchConfig, Method, Point};

use config::{Overrides, RunConfig};
use output::{csv_num, Outputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<fingerloc::Error> for CliError {
    fn from(e: fingerloc::Error) -> Self {
        use fingerloc::Error as E;
        match e {
            E::Io(_) => CliError::Io(e.to_string()),
            E::SingularFim { .. } | E::SingularTerm { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "fingerloc",
    version,
    about = "Hybrid RSSI + DoA fingerprinting simulator"
)]
pub struct Cli {
    /// Master seed. Defaults to a fixed constant, so runs are reproducible.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (build-db, crlb-map) or directory (simulate, sweep).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset, applied before the file's settings.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Survey every RP and write the fingerprint database.
    BuildDb(ConfigArgs),
    /// Estimate one position from a measurement against a saved database.
    Locate {
        #[arg(long)]
        db: PathBuf,
        /// Q RSSI values (dBm) then Q DoA values (degrees), comma separated.
        #[arg(long, allow_hyphen_values = true)]
        measurement: String,
        #[arg(long, default_value = "wknn")]
        method: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Compare the configured methods and write summary and CDF tables.
    Simulate(ConfigArgs),
    /// Re-run the comparison over several values of one parameter.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// One of rp_interval, ap_count, exponent, shadow_std, doa_std, k.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Tabulate the Cramer-Rao bound over a grid covering the area.
    CrlbMap {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Grid spacing in meters.
        #[arg(long, allow_hyphen_values = true)]
        step: f64,
    },
}

/// Run a parsed command line. Text for stdout is returned.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    fingerloc::with_workers(workers, move || dispatch(cli))?
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let seed = cli.seed;
    let out = cli.out;
    let resolve = |c: &ConfigArgs| {
        config::load(
            c.config.as_deref(),
            &Overrides {
                preset: c.preset.clone(),
                seed,
            },
        )
    };
    match cli.command {
        Command::BuildDb(c) => build_db(
            &resolve(&c)?,
            &out.unwrap_or_else(|| "fingerprints.csv".into()),
        ),
        Command::Locate {
            db,
            measurement,
            method,
            k,
        } => locate(&db, &measurement, &method, k),
        Command::Simulate(c) => simulate(&resolve(&c)?, &out.unwrap_or_else(|| "results".into())),
        Command::Sweep { cfg, axis, values } => {
            let mut run = resolve(&cfg)?;
            set_sweep(&mut run, axis.as_deref(), values.as_deref())?;
            simulate(&run, &out.unwrap_or_else(|| "results".into()))
        }
        Command::CrlbMap { cfg, step } => crlb_map(
            &resolve(&cfg)?,
            step,
            &out.unwrap_or_else(|| "crlb_map.csv".into()),
        ),
    }
}

fn set_sweep(
    run: &mut RunConfig,
    axis: Option<&str>,
    values: Option<&str>,
) -> Result<(), CliError> {
    let (old_axis, old_values, series) = match &run.job {
        PresetKind::Sweep {
            axis,
            values,
            series,
        } => (Some(*axis), Some(values.clone()), series.clone()),
        _ => (None, None, None),
    };
    let axis = match axis {
        Some(a) => a.parse::<SweepAxis>()?,
        None => old_axis.ok_or_else(|| {
            let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.as_str()).collect();
            CliError::Config(format!(
                "--axis is required (valid axes: {})",
                names.join(", ")
            ))
        })?,
    };
    let values = match values {
        Some(v) => {
            config::parse_list::<f64>(v).map_err(|e| CliError::Config(format!("--values: {e}")))?
        }
        None if Some(axis) == old_axis => old_values.unwrap_or_default(),
        None => return Err(CliError::Config("--values is required".into())),
    };
    if values.is_empty() {
        return Err(CliError::Config(
            "the sweep needs at least one value".into(),
        ));
    }
    // a changed axis drops a preset's secondary series
    let series = if Some(axis) == old_axis { series } else { None };
    run.job = PresetKind::Sweep {
        axis,
        values,
        series,
    };
    if run.experiment.contenders.is_empty() {
        return Err(CliError::Config("the method list is empty".into()));
    }
    Ok(())
}

fn build_db(run: &RunConfig, out: &Path) -> Result<String, CliError> {
    let cfg = &run.experiment;
    let grid = cfg.scenario.reference_points()?;
    let db = build_database(&cfg.scenario, &grid, cfg.samples_per_rp, cfg.master_seed)?;
    let mut outputs = Outputs::file(out, "build-db", run);
    outputs.add_raw(out, database_to_string(&db))?;
    outputs.finish()?;
    Ok(format!("wrote {} rows to {}\n", db.len(), out.display()))
}

fn locate(db_path: &Path, measurement: &str, method: &str, k: usize) -> Result<String, CliError> {
    if !db_path.exists() {
        return Err(CliError::Io(format!("{}: no such file", db_path.display())));
    }
    let db = load_database(db_path).map_err(|e| match e {
        fingerloc::Error::Io(io) => io_err(db_path, io),
        other => CliError::Config(format!("{}: {other}", db_path.display())),
    })?;
    let values = config::parse_list::<f64>(measurement)
        .map_err(|e| CliError::Config(format!("--measurement: {e}")))?;
    if values.len() != 2 * db.q() {
        return Err(CliError::Config(format!(
            "--measurement has {} values; the database has {} APs, so {} are needed (RSSI then DoA)",
            values.len(),
            db.q(),
            2 * db.q()
        )));
    }
    let query = Fingerprint::from_features_deg(&values)?;
    let method: Method = method.parse()?;
    let matcher = Matcher::new(&db, MatchConfig::new(method, k))?;
    let (est, neighbors) = matcher.locate(&query)?;
    let mut text = format!("x_hat,y_hat\n{},{}\n", est.x, est.y);
    text.push_str("rank,rp_index,x,y,feature_distance\n");
    for (rank, n) in neighbors.iter().enumerate() {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            rank + 1,
            n.index,
            n.rp.x,
            n.rp.y,
            n.feature_distance
        ));
    }
    Ok(text)
}

fn simulate(run: &RunConfig, dir: &Path) -> Result<String, CliError> {
    let cfg = &run.experiment;
    let mut outputs = Outputs::dir(dir, "simulate", run)?;
    match &run.job {
        PresetKind::Compare => {
            let res = run_experiment(cfg)?;
            let mut summary = String::from("method,mean_error_m,p50,p90,p95\n");
            for c in &res.contenders {
                let s = &c.stats;
                summary.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.label, s.mean, s.p50, s.p90, s.p95
                ));
            }
            outputs.add("summary.csv", &[], summary)?;

            let (grid, cols) = res.cdf_table(CDF_POINTS);
            let mut table = String::from("error_m");
            for c in &res.contenders {
                table.push(',');
                table.push_str(&c.label);
            }
            table.push('\n');
            for (i, e) in grid.iter().enumerate() {
                table.push_str(&e.to_string());
                for col in &cols {
                    table.push(',');
                    table.push_str(&col[i].to_string());
                }
                table.push('\n');
            }
            outputs.add("cdf.csv", &[], table)?;

            let mut crlb = String::from("method,mean_crlb_m2\n");
            for c in &res.contenders {
                crlb.push_str(&format!("{},{}\n", c.label, csv_num(c.mean_crlb_m2)));
            }
            outputs.add("crlb.csv", &[], crlb)?;
        }
        PresetKind::Sweep {
            axis,
            values,
            series,
        } => {
            let runs: Vec<(Option<(SweepAxis, f64)>, experiments::ExperimentConfig)> = match series
            {
                None => vec![(None, cfg.clone())],
                Some((sa, svals)) => svals
                    .iter()
                    .map(|v| Ok((Some((*sa, *v)), sa.apply(cfg, *v)?)))
                    .collect::<Result<_, fingerloc::Error>>()?,
            };
            for (tag, c) in runs {
                let result = sweep(&c, *axis, values)?;
                for contender in &c.contenders {
                    let mut table = String::from("axis_value,mean_error_m,mean_crlb_m2");
                    if *axis == SweepAxis::RpInterval {
                        table.push_str(",error_minus_interval_m");
                    }
                    table.push('\n');
                    for (v, mean, crlb) in result.series(&contender.label) {
                        table.push_str(&format!("{v},{mean},{}", csv_num(crlb)));
                        if *axis == SweepAxis::RpInterval {
                            table.push_str(&format!(",{}", mean - v));
                        }
                        table.push('\n');
                    }
                    let mut meta = vec![
                        ("sweep_axis".to_string(), axis.to_string()),
                        ("method".to_string(), contender.label.clone()),
                    ];
                    let name = match tag {
                        None => format!("sweep_{}.csv", contender.label),
                        Some((sa, sv)) => {
                            meta.push((sa.to_string(), sv.to_string()));
                            format!("sweep_{}_{}_{}.csv", contender.label, sa, sv)
                        }
                    };
                    outputs.add(&name, &meta, table)?;
                }
            }
        }
        PresetKind::RssiComparison { radios, ap } => {
            let cmp = rssi_comparison(
                &cfg.scenario,
                radios,
                *ap,
                cfg.samples_per_rp,
                cfg.master_seed,
            )?;
            let mut table = String::from("x,y,distance_m");
            for r in &cmp.radios {
                table.push_str(&format!(",rssi_{r}_dbm"));
            }
            table.push('\n');
            for (p, d, vals) in &cmp.rows {
                table.push_str(&format!("{},{},{d}", p.x, p.y));
                for v in vals {
                    table.push_str(&format!(",{v}"));
                }
                table.push('\n');
            }
            outputs.add(
                "rssi.csv",
                &[("rssi_ap".into(), (ap + 1).to_string())],
                table,
            )?;
        }
    }
    let names = outputs.finish()?;
    Ok(format!("wrote {} to {}\n", names.join(", "), dir.display()))
}

/// Grid coordinates `0, step, 2·step, …` up to `len` inclusive.
fn axis_points(len: f64, step: f64) -> Vec<f64> {
    let n = (len / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn crlb_map(run: &RunConfig, step: f64, out: &Path) -> Result<String, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Config(format!(
            "--step must be positive, got {step}"
        )));
    }
    let s = &run.experiment.scenario;
    let params = CrlbParams::from_scenario(s);
    params.validate()?;
    let mut table = String::from("x,y,crlb_numeric,crlb_closed,singular_flag\n");
    let (mut rows, mut regular) = (0usize, 0usize);
    for y in axis_points(s.area.height_m, step) {
        for x in axis_points(s.area.width_m, step) {
            let p = Point::new(x, y);
            let numeric = crlb_at(p, &params).ok();
            let closed = crlb_closed_form(p, &params).ok();
            let flag = u8::from(numeric.is_none() || closed.is_none());
            regular += usize::from(numeric.is_some());
            rows += 1;
            table.push_str(&format!(
                "{x},{y},{},{},{flag}\n",
                csv_num(numeric),
                csv_num(closed)
            ));
        }
    }
    if regular == 0 {
        return Err(CliError::Numeric(
            "the Fisher information is singular at every grid point".into(),
        ));
    }
    let mut outputs = Outputs::file(out, "crlb-map", run);
    outputs.add_at(out, &[("grid_step_m".into(), step.to_string())], table)?;
    outputs.finish()?;
    Ok(format!("wrote {rows} rows to {}\n", out.display()))
}
