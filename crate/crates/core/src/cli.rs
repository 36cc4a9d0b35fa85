//! The `semp` command-line tool.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
//! failures while running. Failures print a single line
//! `error code=<n> kind=<kind>: <message>` on stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{self, RunConfig};
use crate::experiments::{self, ExperimentPlan, TrajectoryRecord};
use crate::output;
use crate::packet_sim::{self, SimConfig};
use crate::coexistence::ParameterPack;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "semp", version, about = "OGD-SeMP experiments for LTE/WiFi duty-cycle coexistence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment plan and write its trajectories.
    Run {
        config: PathBuf,
        /// Overrides `output.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides `output.events`.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run the cross product of the `[sweep]` lists, one CSV per point.
    Sweep {
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Measured regret next to its theoretical bounds (constant-parameter plans).
    Bounds {
        config: PathBuf,
        /// Event log of a finished run; the plan is executed when absent.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Simulated versus analytic throughputs.
    SimCalibrate {
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 5, 10])]
        stations: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [50.0f64, 200.0, 500.0])]
        toff_ms: Vec<f64>,
        /// Simulated seconds per batch.
        #[arg(long, default_value_t = 50.0)]
        batch: f64,
        #[arg(long, default_value_t = 8)]
        replications: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Channel constants as a TOML `ParameterPack` table.
        #[arg(long)]
        pack: Option<PathBuf>,
    },
    /// Print the annotated configuration reference.
    Schema,
}

/// A failure together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl Failure {
    fn config(error: Error) -> Self {
        Failure {
            code: EXIT_CONFIG,
            error,
        }
    }

    fn classify(error: Error) -> Self {
        let code = if error.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME };
        Failure { code, error }
    }

    pub fn diagnostic(&self) -> String {
        let msg = self.error.to_string().replace('\n', " ");
        format!("error code={} kind={}: {}", self.code, self.error.kind(), msg)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "error code={EXIT_CONFIG} kind=usage: {first}");
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{}", f.diagnostic());
            f.code
        }
    }
}

fn load_plan(path: &Path) -> CliResult<(RunConfig, ExperimentPlan)> {
    let cfg = RunConfig::load(path).map_err(Failure::config)?;
    let mut plan = cfg.plan().map_err(Failure::config)?;
    config::apply_seed_override(&mut plan).map_err(Failure::config)?;
    Ok((cfg, plan))
}

fn io_out(e: std::io::Error) -> Failure {
    Failure::classify(Error::io("<stdout>", e))
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Run { config, csv, events } => {
            let (cfg, plan) = load_plan(&config)?;
            warn_short_batches(&plan, err);
            let records = experiments::run_plan(&plan).map_err(Failure::classify)?;
            let csv = csv.or(cfg.output.csv).unwrap_or_else(|| "trajectories.csv".into());
            output::write_csv(&records, &csv).map_err(Failure::classify)?;
            if let Some(events) = events.or(cfg.output.events) {
                output::write_events(&records, &events).map_err(Failure::classify)?;
            }
            writeln!(out, "plan {}", config::plan_hash(&plan)).map_err(io_out)?;
            report_run(&plan, &records, out).map_err(io_out)?;
            writeln!(out, "wrote {}", csv.display()).map_err(io_out)
        }
        Command::Sweep { config, out_dir } => {
            let cfg = RunConfig::load(&config).map_err(Failure::config)?;
            let mut points = cfg.sweep_points().map_err(Failure::config)?;
            for p in &mut points {
                config::apply_seed_override(&mut p.plan).map_err(Failure::config)?;
            }
            let dir = out_dir.or(cfg.output.dir).unwrap_or_else(|| "sweep".into());
            for p in &points {
                warn_short_batches(&p.plan, err);
                let records = experiments::run_plan(&p.plan).map_err(Failure::classify)?;
                let path = dir.join(format!("{}.csv", p.label));
                output::write_csv(&records, &path).map_err(Failure::classify)?;
                write!(out, "{} ", p.label).map_err(io_out)?;
                report_run(&p.plan, &records, out).map_err(io_out)?;
            }
            writeln!(out, "wrote {} files to {}", points.len(), dir.display()).map_err(io_out)
        }
        Command::Bounds { config, events } => {
            let (_, plan) = load_plan(&config)?;
            let records = match events {
                Some(path) => records_from_events(&path).map_err(Failure::classify)?,
                None => experiments::run_plan(&plan).map_err(Failure::classify)?,
            };
            let r = experiments::regret_report(&plan, &records).map_err(Failure::classify)?;
            let lines = [
                format!("rounds {}", r.rounds),
                format!("measured_regret mean={:.6} std={:.6} runs={}", r.regret.mean, r.regret.std, r.regret.count),
                format!("theorem1_bound {:.6}", r.bound),
                format!("corollary_bound {:.6}", r.corollary_bound),
                format!(
                    "constants D={:.6} G={:.6} C={:.6} L={:.6e} eta={:.6e} delta={:.6e}",
                    r.diameter, r.lipschitz, r.cost_spread, r.total_deviation, r.eta, r.delta
                ),
                format!(
                    "per_round full={:.6e} half={:.6e}",
                    r.regret.mean / r.rounds as f64,
                    r.half_regret.mean / r.half_rounds as f64
                ),
                format!("within_bound {}", r.within_bound()),
                format!("sublinear {}", r.sublinear()),
            ];
            for l in lines {
                writeln!(out, "{l}").map_err(io_out)?;
            }
            Ok(())
        }
        Command::SimCalibrate {
            stations,
            toff_ms,
            batch,
            replications,
            seed,
            pack,
        } => {
            let pack = match pack {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Failure::config(Error::io(&path, e)))?;
                    toml::from_str::<ParameterPack>(&text).map_err(|e| {
                        Failure::config(Error::Config {
                            path: path.display().to_string(),
                            message: e.message().to_string(),
                        })
                    })?
                }
                None => ParameterPack::default(),
            };
            if replications == 0 {
                return Err(Failure::config(Error::Config {
                    path: "--replications".into(),
                    message: "must be at least 1".into(),
                }));
            }
            let toffs: Vec<f64> = toff_ms.iter().map(|t| t * 1e-3).collect();
            let rows = packet_sim::calibrate(&pack, &stations, &toffs, batch, replications, seed)
                .map_err(Failure::classify)?;
            writeln!(out, "n,toff_ms,model_lte_bps,sim_lte_bps,model_wifi_bps,sim_wifi_mean_bps,max_rel_error").map_err(io_out)?;
            for r in rows {
                let wifi = r.sim_wifi.iter().sum::<f64>() / r.sim_wifi.len() as f64;
                writeln!(
                    out,
                    "{},{},{:.1},{:.1},{:.1},{:.1},{:.5}",
                    r.stations,
                    r.toff * 1e3,
                    r.model_lte,
                    r.sim_lte,
                    r.model_wifi,
                    wifi,
                    r.max_rel_error
                )
                .map_err(io_out)?;
            }
            Ok(())
        }
        Command::Schema => write!(out, "{}", config::schema_reference()).map_err(io_out),
    }
}

fn warn_short_batches(plan: &ExperimentPlan, err: &mut dyn Write) {
    if let experiments::EnvironmentSpec::PacketSim { pack, batch_duration, .. } = &plan.environment {
        let cfg = SimConfig::from_pack(pack, plan.environment.stations(), *batch_duration, 0);
        let longest = plan.interval().upper().exp() + pack.frame_time();
        if cfg.is_short_batch(longest) {
            let _ = writeln!(
                err,
                "warning: a {batch_duration} s batch spans fewer than 100 duty cycles at long off times"
            );
        }
    }
}

fn report_run(plan: &ExperimentPlan, records: &[TrajectoryRecord], out: &mut dyn Write) -> std::io::Result<()> {
    if plan.iterations == 0 {
        return writeln!(out, "runs={} iterations=0", records.len());
    }
    let Ok(s) = experiments::aggregate(records, plan.convergence_tolerance) else {
        return writeln!(out, "runs=0");
    };
    let converged = s.convergence.iter().filter(|c| c.is_some()).count();
    let time = s
        .convergence_time
        .as_ref()
        .map_or("none".to_string(), |c| format!("{:.1}", c.mean));
    writeln!(
        out,
        "runs={} iterations={} converged={}/{} mean_convergence_k={} final_toff_ms={:.3}±{:.3}",
        s.runs,
        plan.iterations,
        converged,
        s.runs,
        time,
        s.final_toff.mean * 1e3,
        s.final_toff.std * 1e3
    )
}

fn records_from_events(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let mut by_run: BTreeMap<usize, TrajectoryRecord> = BTreeMap::new();
    for e in output::read_events(path)? {
        let rec = by_run.entry(e.run_id).or_insert_with(|| TrajectoryRecord {
            run_id: e.run_id,
            seed: e.seed,
            iterations: Vec::new(),
            events: Vec::new(),
            final_center: f64::NAN,
        });
        if e.t != rec.events.len() as u64 + 1 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("run {} skips to round {}", e.run_id, e.t),
            });
        }
        rec.events.push(experiments::RoundEvent {
            t: e.t,
            k: e.k,
            x: e.x,
            cost: e.cost,
            observed: e.observed,
            stations: e.n,
        });
    }
    if by_run.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no events".into(),
        });
    }
    Ok(by_run.into_values().collect())
}
