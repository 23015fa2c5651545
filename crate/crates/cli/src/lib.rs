//! Command-line front end: argument parsing, job execution and file output.
//!
//! Exit codes: 0 on success, 1 for usage or I/O errors, 2 when a numerical
//! invariant of the simulation is violated.

pub mod output;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use eqw_core::{
    build_graph, degree_stats, graph_timeseries, rqd_profile, run_ensemble, run_trajectory, sweep,
    AveragingMode, CoinFamily, CoinParams, FitWindow, LogBase, RunConfig, SeriesStat, SweepGrid,
};
use output::{Cell, Format, OutputTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<eqw_core::Error> for CliError {
    fn from(e: eqw_core::Error) -> Self {
        use eqw_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InsufficientPoints(_) => CliError::Usage(e.to_string()),
            E::Invariant(_) | E::Undefined(_) | E::MissingData(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eqw", version, about = "Elephant quantum walk simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble run at one parameter point.
    Simulate(SimulateArgs),
    /// Grid over q, coin angle and coin family.
    Sweep(SweepArgs),
    /// Networks of visited sites linked by jumps.
    Network(NetworkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoinArg {
    #[value(name = "H", alias = "h")]
    H,
    #[value(name = "K", alias = "k")]
    K,
}

impl From<CoinArg> for CoinFamily {
    fn from(c: CoinArg) -> Self {
        match c {
            CoinArg::H => CoinFamily::H,
            CoinArg::K => CoinFamily::K,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    /// Natural logarithm.
    E,
    /// Bits.
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of time steps.
    #[arg(long = "tmax", default_value_t = 1000)]
    pub t_max: usize,
    /// Master seed; trajectory i uses stream i of this seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial coin phase in degrees (default: 90 for H, 0 for K).
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Averaging of spatial observables: distributions or observables.
    #[arg(long = "avg-mode", default_value = "distributions", value_parser = parse_mode)]
    pub avg_mode: AveragingMode,
    /// Probability above which a site counts as occupied.
    #[arg(long, default_value_t = 1e-9)]
    pub threshold: f64,
    /// Fit window for the spreading exponent, as fractions of tmax.
    #[arg(long = "fit-window", default_value = "0.1,1.0", value_parser = parse_window)]
    pub fit_window: FitWindow,
    /// Logarithm base of the Shannon entropy.
    #[arg(long = "entropy-base", value_enum, default_value = "e")]
    pub entropy_base: BaseArg,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Entropic index of the memory kernel (>= 0.5).
    #[arg(long, value_parser = parse_q)]
    pub q: f64,
    #[arg(long, value_enum)]
    pub coin: CoinArg,
    /// Coin angle in degrees.
    #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long = "ntraj", default_value_t = 100)]
    pub n_trajectories: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated entropic indices.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_q)]
    pub q: Vec<f64>,
    /// Comma-separated coin families.
    #[arg(long, value_delimiter = ',', value_enum, default_value = "H,K")]
    pub coins: Vec<CoinArg>,
    /// Comma-separated coin angles in degrees.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "45",
        allow_negative_numbers = true
    )]
    pub theta: Vec<f64>,
    #[arg(long = "ntraj", default_value_t = 100)]
    pub n_trajectories: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: f64,
    #[arg(long, value_enum)]
    pub coin: CoinArg,
    #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Trajectories; each one keeps every P_t(x) in memory while it runs.
    #[arg(long = "ntraj", default_value_t = 10)]
    pub n_trajectories: usize,
    /// Comma-separated times at which graph statistics are recorded
    /// (default: 20 evenly spaced times ending at tmax).
    #[arg(long, value_delimiter = ',')]
    pub samples: Option<Vec<usize>>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_q(s: &str) -> Result<f64, String> {
    let q: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if !q.is_finite() || q < eqw_core::kernel::MIN_Q {
        return Err(format!(
            "q must be finite and >= {}",
            eqw_core::kernel::MIN_Q
        ));
    }
    Ok(q)
}

fn parse_mode(s: &str) -> Result<AveragingMode, String> {
    s.parse().map_err(|e: eqw_core::Error| e.to_string())
}

fn parse_window(s: &str) -> Result<FitWindow, String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| "expected LO,HI".to_string())?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {lo}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {hi}"))?;
    FitWindow::new(lo, hi).map_err(|e| e.to_string())
}

impl Common {
    fn config(&self, q: f64, family: CoinFamily, theta_deg: f64, n: usize) -> RunConfig {
        let mut coin = CoinParams::new(family, theta_deg.to_radians());
        if let Some(phi) = self.phi {
            coin = coin.with_phi(phi.to_radians());
        }
        let mut c = RunConfig::new(q, coin)
            .t_max(self.t_max)
            .trajectories(n)
            .seed(self.seed)
            .averaging(self.avg_mode);
        c.threshold = self.threshold;
        c.fit_window = self.fit_window;
        c.entropy_base = match self.entropy_base {
            BaseArg::E => LogBase::Natural,
            BaseArg::Two => LogBase::Two,
        };
        c
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Parses `args` (program name first), runs the job and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("eqw: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    let threads = match command {
        Command::Simulate(a) => a.common.threads,
        Command::Sweep(a) => a.common.threads,
        Command::Network(a) => a.common.threads,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| match command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Network(a) => network(a),
    })
}

/// Header lines shared by every file of one job.
fn metadata(command: &str, seed: u64, extra: Vec<(&str, String)>) -> Vec<(String, String)> {
    let mut m = vec![
        ("generator".to_string(), format!("eqw {VERSION}")),
        ("command".to_string(), command.to_string()),
        ("seed".to_string(), seed.to_string()),
    ];
    m.extend(extra.into_iter().map(|(k, v)| (k.to_string(), v)));
    m
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("configuration serializes")
}

fn write_table(
    dir: &Path,
    stem: &str,
    format: Format,
    table: &OutputTable,
) -> Result<(), CliError> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let mut out = BufWriter::new(File::create(path)?);
    table.write(format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn stat_cells(stat: &SeriesStat, i: usize) -> [Cell; 2] {
    [Cell::Real(stat.mean[i]), Cell::Real(stat.stderr[i])]
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let common = &args.common;
    let config = common.config(args.q, args.coin.into(), args.theta, args.n_trajectories);
    config.validate()?;
    let result = run_ensemble(&config)?;
    let meta = || metadata("simulate", config.seed, vec![("config", to_json(&config))]);
    let format = common.format();
    prepare(&common.out)?;

    let mut variance = OutputTable::new(meta(), &["t", "second_moment", "second_moment_stderr"]);
    let mut obs = OutputTable::new(
        meta(),
        &[
            "t",
            "second_moment",
            "second_moment_stderr",
            "entropy",
            "entropy_stderr",
            "ipr",
            "ipr_stderr",
            "occupancy",
            "occupancy_stderr",
            "entanglement",
            "entanglement_stderr",
        ],
    );
    for (i, &t) in result.times.iter().enumerate() {
        let x2 = stat_cells(&result.second_moment, i);
        variance.push([vec![t.into()], x2.to_vec()].concat());
        let mut row = vec![t.into()];
        for stat in [
            &result.second_moment,
            &result.entropy,
            &result.ipr,
            &result.occupancy,
            &result.entanglement,
        ] {
            row.extend(stat_cells(stat, i));
        }
        obs.push(row);
    }

    let mut dist = OutputTable::new(meta(), &["x", "probability", "rqd"]);
    let fin = &result.final_distribution;
    for ((x, p), (_, r)) in fin.iter().zip(rqd_profile(fin)) {
        dist.push(vec![x.into(), p.into(), r.into()]);
    }

    let d = &result.diagnostics;
    let mut summary = OutputTable::new(
        meta(),
        &[
            "alpha",
            "alpha_stderr",
            "max_norm_deviation",
            "lambda_min",
            "lambda_max",
            "max_lambda_sum_error",
        ],
    );
    summary.push(vec![
        result.alpha.into(),
        result.alpha_stderr.into(),
        d.max_norm_deviation.into(),
        d.lambda_min.into(),
        d.lambda_max.into(),
        d.max_lambda_sum_error.into(),
    ]);

    write_table(&common.out, "variance", format, &variance)?;
    write_table(&common.out, "observables", format, &obs)?;
    write_table(&common.out, "distribution", format, &dist)?;
    write_table(&common.out, "summary", format, &summary)?;
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let common = &args.common;
    if args.q.is_empty() || args.theta.is_empty() || args.coins.is_empty() {
        return Err(CliError::Usage("sweep grid is empty".into()));
    }
    let template = common.config(
        args.q[0],
        args.coins[0].into(),
        args.theta[0],
        args.n_trajectories,
    );
    template.validate()?;
    let grid = SweepGrid {
        qs: args.q.clone(),
        thetas: args.theta.iter().map(|d| d.to_radians()).collect(),
        coins: args.coins.iter().map(|&c| c.into()).collect(),
        phi: common.phi.map(f64::to_radians),
    };
    let rows = sweep(&grid, &template)?;
    prepare(&common.out)?;

    let meta = metadata(
        "sweep",
        template.seed,
        vec![("config", to_json(&template)), ("grid", to_json(&grid))],
    );
    let mut table = OutputTable::new(
        meta,
        &[
            "q",
            "theta_deg",
            "coin",
            "alpha",
            "alpha_stderr",
            "second_moment",
            "entropy",
            "ipr",
            "occupancy",
            "entanglement",
            "jsd",
        ],
    );
    let per_theta = grid.coins.len();
    for (r, row) in rows.iter().enumerate() {
        let theta_deg = args.theta[(r / per_theta) % args.theta.len()];
        table.push(vec![
            row.q.into(),
            theta_deg.into(),
            row.coin.label().into(),
            row.alpha.into(),
            row.alpha_stderr.into(),
            row.second_moment.into(),
            row.entropy.into(),
            row.ipr.into(),
            row.occupancy.into(),
            row.entanglement.into(),
            row.jsd.into(),
        ]);
    }
    write_table(&common.out, "sweep", common.format(), &table)
}

fn default_samples(t_max: usize) -> Vec<usize> {
    let mut times: Vec<usize> = (1..=20).map(|i| (i * t_max).div_ceil(20)).collect();
    times.dedup();
    times
}

struct NetworkRun {
    edges: Vec<u8>,
    snapshots: Vec<eqw_core::GraphSnapshot>,
    histogram: Vec<(usize, f64)>,
}

fn network(args: &NetworkArgs) -> Result<(), CliError> {
    let common = &args.common;
    let mut config = common.config(args.q, args.coin.into(), args.theta, args.n_trajectories);
    config.keep_distributions = true;
    config.validate()?;
    let samples = match &args.samples {
        Some(s) if s.is_empty() => return Err(CliError::Usage("no sample times".into())),
        Some(s) => s.clone(),
        None => default_samples(config.t_max),
    };
    if let Some(&bad) = samples.iter().find(|&&t| t < 1 || t > config.t_max) {
        return Err(CliError::Usage(format!(
            "sample time {bad} outside 1..={}",
            config.t_max
        )));
    }
    prepare(&common.out)?;
    let meta = metadata(
        "network",
        config.seed,
        vec![("config", to_json(&config)), ("samples", to_json(&samples))],
    );

    // Each trajectory holds its full history, so at most one per worker is
    // alive at a time.
    let width = rayon::current_num_threads().max(1);
    let indices: Vec<usize> = (0..config.n_trajectories).collect();
    let mut runs = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(width) {
        let batch = chunk
            .par_iter()
            .map(|&i| -> Result<NetworkRun, CliError> {
                let record = run_trajectory(&config, i)?;
                let graph = build_graph(&record, config.threshold)?;
                let snapshots = graph_timeseries(&record, &samples, config.threshold)?;
                let mut edges = Vec::new();
                for (k, v) in &meta {
                    writeln!(edges, "# {k}: {v}")?;
                }
                writeln!(edges, "# trajectory: {i}")?;
                graph.write_edge_list(&mut edges)?;
                Ok(NetworkRun {
                    edges,
                    snapshots,
                    histogram: degree_stats(&graph).histogram,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        runs.extend(batch);
    }

    let mut series = OutputTable::new(
        meta.clone(),
        &[
            "trajectory",
            "t",
            "n_vertices",
            "n_edges",
            "degree_mean",
            "degree_std",
            "degree_skewness",
            "degree_entropy",
            "average_path_length",
            "assortativity",
        ],
    );
    let k_max = runs
        .iter()
        .flat_map(|r| r.histogram.last().map(|&(k, _)| k))
        .max()
        .unwrap_or(0);
    let mut mean_pk = vec![0.0; k_max + 1];
    for (i, run) in runs.iter().enumerate() {
        fs::write(common.out.join(format!("edges_traj{i}.txt")), &run.edges)?;
        for s in &run.snapshots {
            series.push(vec![
                i.into(),
                s.t.into(),
                s.structure.n_vertices.into(),
                s.structure.n_edges.into(),
                s.degree.mean.into(),
                s.degree.std.into(),
                s.degree.skewness.into(),
                s.degree.entropy.into(),
                s.structure.average_path_length.into(),
                s.structure.assortativity.into(),
            ]);
        }
        for &(k, p) in &run.histogram {
            mean_pk[k] += p / runs.len() as f64;
        }
    }

    let mut degrees = OutputTable::new(meta, &["k", "p_first_trajectory", "p_mean"]);
    let first = &runs[0].histogram;
    for (k, &p_mean) in mean_pk.iter().enumerate() {
        let p_first = first
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map_or(0.0, |&(_, p)| p);
        if p_mean > 0.0 {
            degrees.push(vec![k.into(), p_first.into(), p_mean.into()]);
        }
    }

    write_table(&common.out, "network", common.format(), &series)?;
    write_table(
        &common.out,
        "degree_distribution",
        common.format(),
        &degrees,
    )
}
