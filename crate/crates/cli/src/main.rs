//! Command-line front end: experiment execution, ergodic analysis, and the
//! embedded reproduction suite.
//!
//! Exit codes: 0 success, 1 reproduction-check failure, 2 malformed
//! configuration, 3 assumption violation (non-strongly-connected graph where
//! that is fatal). Set `CONSENSUS_HALT_LOG=info` (or `debug`) for progress
//! logging on stderr.

mod config;
mod output;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use consensus_halt::{
    consensus_time, response_time_bound, run, ConsensusReport, NetworkState, SimConfig,
    StopThreshold, Trace, WeightMatrix,
};
use log::{debug, info};

use config::{DetectorChoice, Experiment, Mode, ThresholdChoice};
use output::{render_table, render_table_csv, report_json, LevelRow};

#[derive(Parser)]
#[command(
    name = "consensus-halt",
    version,
    about = "Simulate and analyze consensus networks whose nodes decide locally when to stop"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute an experiment file once per eps level and print the table
    Run {
        /// Experiment file (TOML)
        path: PathBuf,
        /// Directory for report.csv, report.json and per-level trajectory CSVs
        #[arg(long, value_name = "DIR")]
        csv: Option<PathBuf>,
        /// Per-slot trace CSV path (multi-level runs insert the level index)
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Exit 3 when the interaction graph is not strongly connected
        #[arg(long)]
        strict: bool,
        /// Override the file's mode
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Override the file's detector
        #[arg(long, value_enum)]
        detector: Option<DetectorChoice>,
        /// Override the file's stop-threshold rule
        #[arg(long, value_enum)]
        threshold: Option<ThresholdChoice>,
        /// Override the file's slot horizon
        #[arg(long, value_name = "INT")]
        max_steps: Option<usize>,
    },
    /// Print diameter, minimal ergodic exponent h, tau(A^h), and the
    /// response-time bound (no simulation)
    Analyze {
        /// Experiment file (TOML)
        path: PathBuf,
    },
    /// Re-run the embedded reference networks and verify the invariants
    Reproduce {
        /// Directory for the comparison CSV and trajectory files
        #[arg(long, value_name = "DIR")]
        csv: Option<PathBuf>,
        /// Run the detector at level/D instead of at the level itself
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ASSUMPTION: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter("CONSENSUS_HALT_LOG")
            .write_style("CONSENSUS_HALT_LOG_STYLE"),
    )
    .init();
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run {
            path,
            csv,
            trace,
            strict,
            mode,
            detector,
            threshold,
            max_steps,
        } => cmd_run(
            &path,
            csv.as_deref(),
            trace.as_deref(),
            strict,
            mode,
            detector,
            threshold,
            max_steps,
        ),
        Cmd::Analyze { path } => cmd_analyze(&path),
        Cmd::Reproduce { csv, mode } => reproduce::cmd_reproduce(csv.as_deref(), mode),
    };
    ExitCode::from(code)
}

/// Everything measured for one eps level.
pub struct LevelOutcome {
    pub level: f64,
    pub detector_eps: f64,
    pub report: ConsensusReport,
    pub trace: Trace,
    /// True consensus time at the level itself (the table's second column).
    pub consensus: Option<usize>,
    /// stopping − consensus, both against the level.
    pub response: Option<i64>,
}

impl LevelOutcome {
    pub fn row(&self) -> LevelRow {
        LevelRow {
            level: self.level,
            consensus: self.consensus,
            stopping: self.report.first_stop_time,
            response: self.response,
        }
    }
}

/// Run one level of an experiment under the given mode.
pub fn run_level(exp: &Experiment, level: f64, record_trace: bool) -> Result<LevelOutcome, String> {
    let g = exp.weights.graph();
    let (threshold, fell_back) = StopThreshold::for_graph(exp.threshold.into(), &g);
    if fell_back {
        debug!("diameter undefined; falling back to the size threshold");
    }
    let detector_eps = match exp.mode {
        Mode::Table1 => level,
        Mode::Theorem => level / threshold.value() as f64,
    };
    let mut cfg = SimConfig::new(exp.weights.clone(), exp.x0.clone(), detector_eps)
        .map_err(|e| e.to_string())?;
    cfg.detector = exp.detector.into();
    cfg.threshold = threshold;
    cfg.max_steps = exp.max_steps;
    cfg.record_trace = record_trace;
    let (report, trace) = run(&cfg).map_err(|e| e.to_string())?;
    let consensus =
        consensus_time(&exp.weights, &exp.x0, level, exp.max_steps).map_err(|e| e.to_string())?;
    let response = match (report.first_stop_time, consensus) {
        (Some(f), Some(k0)) => Some(f as i64 - k0 as i64),
        _ => None,
    };
    info!(
        "level {level}: detector eps {detector_eps}, consensus {:?}, stopping {:?}",
        consensus, report.first_stop_time
    );
    Ok(LevelOutcome {
        level,
        detector_eps,
        report,
        trace,
        consensus,
        response,
    })
}

/// JSON array of per-level reports.
pub fn reports_json(exp: &Experiment, outcomes: &[LevelOutcome]) -> String {
    let analysis = response_time_bound(&exp.weights).ok();
    let mut s = String::from("[\n");
    for (i, o) in outcomes.iter().enumerate() {
        let obj = report_json(
            o.level,
            o.detector_eps,
            &o.report,
            o.consensus,
            o.response,
            analysis.as_ref(),
        );
        s.push_str(obj.trim_end());
        if i + 1 < outcomes.len() {
            s.push(',');
        }
        s.push('\n');
    }
    s.push_str("]\n");
    s
}

/// `base.csv` stays `base.csv` for a single level and becomes
/// `base.2.csv` (1-based level index) otherwise.
fn trace_path(base: &Path, index: usize, total: usize) -> PathBuf {
    if total <= 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{}.{ext}", index + 1))
}

pub fn write_outputs(
    exp: &Experiment,
    outcomes: &[LevelOutcome],
    csv_dir: Option<&Path>,
    trace_base: Option<&Path>,
) -> Result<(), String> {
    let rows: Vec<LevelRow> = outcomes.iter().map(|o| o.row()).collect();
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        let write = |name: &str, body: &str| -> Result<(), String> {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| format!("cannot write {}: {e}", p.display()))
        };
        write("report.csv", &render_table_csv(&rows))?;
        write("report.json", &reports_json(exp, outcomes))?;
        for (i, o) in outcomes.iter().enumerate() {
            write(&format!("trajectory-{}.csv", i + 1), &o.trace.to_csv())?;
        }
    }
    if let Some(base) = trace_base {
        for (i, o) in outcomes.iter().enumerate() {
            let p = trace_path(base, i, outcomes.len());
            std::fs::write(&p, o.trace.to_csv())
                .map_err(|e| format!("cannot write {}: {e}", p.display()))?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    path: &Path,
    csv: Option<&Path>,
    trace: Option<&Path>,
    strict: bool,
    mode: Option<Mode>,
    detector: Option<DetectorChoice>,
    threshold: Option<ThresholdChoice>,
    max_steps: Option<usize>,
) -> u8 {
    let mut exp = match Experiment::load(path) {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_CONFIG;
        }
    };
    if let Some(m) = mode {
        exp.mode = m;
    }
    if let Some(d) = detector {
        exp.detector = d;
    }
    if let Some(t) = threshold {
        exp.threshold = t;
    }
    if let Some(s) = max_steps {
        if s == 0 {
            eprintln!("error: --max-steps must be at least 1");
            return EXIT_CONFIG;
        }
        exp.max_steps = s;
    }
    let g = exp.weights.graph();
    let connected = g.is_strongly_connected();
    if !connected && strict {
        eprintln!("error: interaction graph is not strongly connected");
        return EXIT_ASSUMPTION;
    }
    debug!(
        "n={}, edges={}, detector={:?}, threshold={:?}, mode={}",
        g.node_count(),
        g.edge_count(),
        exp.detector,
        exp.threshold,
        exp.mode
    );

    let record = csv.is_some() || trace.is_some();
    let mut outcomes = Vec::new();
    for &level in &exp.eps_levels {
        match run_level(&exp, level, record) {
            Ok(o) => outcomes.push(o),
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_CONFIG;
            }
        }
    }

    let (threshold, _) = StopThreshold::for_graph(exp.threshold.into(), &g);
    println!(
        "# mode={} detector={} threshold={}({}) max_steps={}",
        exp.mode,
        match exp.detector {
            DetectorChoice::Yz => "yz",
            DetectorChoice::MinRounds => "min-rounds",
        },
        match threshold.kind() {
            consensus_halt::ThresholdKind::Diameter => "diameter",
            consensus_halt::ThresholdKind::Size => "size",
        },
        threshold.value(),
        exp.max_steps
    );
    if !connected {
        println!("# warning: graph is not strongly connected; detector guarantees are void");
    }
    let rows: Vec<LevelRow> = outcomes.iter().map(|o| o.row()).collect();
    print!("{}", render_table(&rows));

    if let Err(msg) = write_outputs(&exp, &outcomes, csv, trace) {
        eprintln!("error: {msg}");
        return EXIT_CONFIG;
    }
    0
}

fn cmd_analyze(path: &Path) -> u8 {
    let exp = match Experiment::load(path) {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_CONFIG;
        }
    };
    match response_time_bound(&exp.weights) {
        Ok(a) => {
            println!("diameter = {}", a.diameter);
            println!("h = {}", a.h);
            println!("tau_h = {}", output::sig6(a.tau_h));
            println!("bound = {}", a.bound);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ASSUMPTION
        }
    }
}

// Re-exported for the reproduction module.
pub fn embedded_example1() -> (WeightMatrix, NetworkState) {
    (
        WeightMatrix::from_rows(&[
            vec![0.933, 0.067, 0.0, 0.0],
            vec![0.0, 0.722, 0.129, 0.149],
            vec![0.0, 0.0, 0.633, 0.367],
            vec![0.111, 0.0, 0.0, 0.889],
        ])
        .expect("static matrix is valid"),
        NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).expect("static state is valid"),
    )
}

pub fn embedded_ring3() -> (WeightMatrix, NetworkState) {
    (
        WeightMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.999, 0.001],
            vec![0.5, 0.0, 0.5],
        ])
        .expect("static matrix is valid"),
        NetworkState::from_scalars(&[0.0, 0.0, 100.0]).expect("static state is valid"),
    )
}
