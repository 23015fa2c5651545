//! Seeded trajectories and their ensemble aggregation.
//!
//! Trajectory `i` of a run draws its jumps from a ChaCha8 stream keyed by the
//! master seed and the counter `i`, so every output is a function of the
//! configuration alone. Reductions always run in trajectory-index order; the
//! thread count only changes how fast the answer arrives.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelTable, MIN_Q};
use crate::observables::{
    self, distribution, fit_alpha, ipr, measure, occupancy, shannon_entropy, FitWindow, LogBase,
    Measurement, SpatialDistribution, VarianceSeries, DEFAULT_THRESHOLD,
};
use crate::walk::{coin_matrix, CoinFamily, CoinMatrix, CoinParams, WalkerState};

/// Largest tolerated `|‖Ψ‖² - 1|` before a run is aborted.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Trajectories simulated per parallel batch in observable-averaging mode.
const BATCH: usize = 32;

/// How spatial observables are combined across trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AveragingMode {
    /// Entropy, IPR and occupancy of the mean distribution `P̄_t(x)`;
    /// `x̄²` and `S_e` are still per-trajectory means.
    #[default]
    AverageDistributions,
    /// Every observable computed per trajectory, then averaged.
    AverageObservables,
}

impl std::str::FromStr for AveragingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distributions" | "average-distributions" => Ok(Self::AverageDistributions),
            "observables" | "average-observables" => Ok(Self::AverageObservables),
            other => Err(Error::InvalidParameter(format!(
                "unknown averaging mode {other:?} (expected distributions or observables)"
            ))),
        }
    }
}

impl std::fmt::Display for AveragingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AverageDistributions => "distributions",
            Self::AverageObservables => "observables",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub q: f64,
    pub coin: CoinParams,
    pub t_max: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub averaging: AveragingMode,
    pub threshold: f64,
    pub fit_window: FitWindow,
    pub entropy_base: LogBase,
    /// Keep `P_t(x)` for every `t` in trajectory records (needed by the
    /// walk-network construction).
    pub keep_distributions: bool,
}

impl RunConfig {
    pub fn new(q: f64, coin: CoinParams) -> Self {
        Self {
            q,
            coin,
            t_max: 1000,
            n_trajectories: 100,
            seed: 0,
            averaging: AveragingMode::default(),
            threshold: DEFAULT_THRESHOLD,
            fit_window: FitWindow::default(),
            entropy_base: LogBase::default(),
            keep_distributions: false,
        }
    }

    pub fn t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn trajectories(mut self, n: usize) -> Self {
        self.n_trajectories = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn averaging(mut self, mode: AveragingMode) -> Self {
        self.averaging = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.q.is_finite() || self.q < MIN_Q {
            return bad(format!("q must be finite and >= {MIN_Q}, got {}", self.q));
        }
        if self.t_max < 2 {
            return bad(format!("t_max must be >= 2, got {}", self.t_max));
        }
        if self.n_trajectories < 1 {
            return bad("need at least one trajectory".into());
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return bad(format!(
                "threshold must be positive, got {}",
                self.threshold
            ));
        }
        if !self.coin.theta.is_finite() || !self.coin.phi.is_finite() {
            return bad("coin angles must be finite".into());
        }
        FitWindow::new(self.fit_window.lo, self.fit_window.hi)?;
        Ok(())
    }
}

/// The random stream of trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Observables of one trajectory at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSample {
    pub t: usize,
    pub jump: usize,
    pub norm_deviation: f64,
    pub second_moment: f64,
    pub entropy: f64,
    pub ipr: f64,
    pub occupancy: usize,
    pub entanglement: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl StepSample {
    fn from_measurement(m: &Measurement, jump: usize) -> Result<Self> {
        let norm_deviation = (m.norm - 1.0).abs();
        if norm_deviation > NORM_TOLERANCE {
            return Err(Error::Invariant(format!(
                "norm drifted by {norm_deviation:e} at t = {}",
                m.t
            )));
        }
        let (lambda_plus, lambda_minus) = m.rdm.eigenvalues()?;
        Ok(Self {
            t: m.t,
            jump,
            norm_deviation,
            second_moment: m.second_moment,
            entropy: m.entropy,
            ipr: m.ipr,
            occupancy: m.occupancy,
            entanglement: observables::entanglement_entropy(&m.rdm)?,
            lambda_plus,
            lambda_minus,
        })
    }
}

/// One stochastic realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    /// `jumps[s]` is the jump of step `s + 1`; the first is always 1.
    pub jumps: Vec<usize>,
    /// Samples for `t = 1..=t_max`.
    pub samples: Vec<StepSample>,
    pub final_distribution: SpatialDistribution,
    /// `P_t(x)` for `t = 0..=t_max` when requested.
    pub distributions: Option<Vec<SpatialDistribution>>,
}

impl TrajectoryRecord {
    pub fn t_max(&self) -> usize {
        self.samples.len()
    }

    pub fn variance_series(&self) -> VarianceSeries {
        let values: Vec<f64> = self.samples.iter().map(|s| s.second_moment).collect();
        VarianceSeries::from_values(&values)
    }
}

struct Lane {
    rng: ChaCha8Rng,
    state: WalkerState,
    jumps: Vec<usize>,
}

impl Lane {
    fn new(config: &RunConfig, index: usize) -> Self {
        Self {
            rng: trajectory_rng(config.seed, index),
            state: WalkerState::initial(&config.coin),
            jumps: Vec::with_capacity(config.t_max),
        }
    }

    fn advance(
        &mut self,
        table: &KernelTable,
        coin: &CoinMatrix,
        config: &RunConfig,
    ) -> Result<StepSample> {
        let horizon = self.state.time() + 1;
        let jump = table.sample(horizon, &mut self.rng);
        self.state.step(coin, jump)?;
        self.jumps.push(jump);
        let m = measure(&self.state, config.threshold, config.entropy_base);
        StepSample::from_measurement(&m, jump)
    }
}

fn simulate(config: &RunConfig, table: &KernelTable, index: usize) -> Result<TrajectoryRecord> {
    let coin = coin_matrix(&config.coin);
    let mut lane = Lane::new(config, index);
    let mut samples = Vec::with_capacity(config.t_max);
    let mut history = config
        .keep_distributions
        .then(|| vec![distribution(&lane.state)]);
    for _ in 0..config.t_max {
        samples.push(lane.advance(table, &coin, config)?);
        if let Some(h) = history.as_mut() {
            h.push(distribution(&lane.state));
        }
    }
    Ok(TrajectoryRecord {
        index,
        jumps: lane.jumps,
        samples,
        final_distribution: distribution(&lane.state),
        distributions: history,
    })
}

/// Runs trajectory `index` of the configured ensemble.
pub fn run_trajectory(config: &RunConfig, index: usize) -> Result<TrajectoryRecord> {
    config.validate()?;
    let table = KernelTable::new(config.q, config.t_max)?;
    simulate(config, &table, index)
}

/// Per-time mean and standard error of the mean.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesStat {
    pub mean: Vec<f64>,
    /// Zero when the series is a single value per time (one trajectory, or
    /// an observable of the averaged distribution).
    pub stderr: Vec<f64>,
}

impl SeriesStat {
    pub fn last_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(f64::NAN)
    }

    fn exact(values: Vec<f64>) -> Self {
        let stderr = vec![0.0; values.len()];
        Self {
            mean: values,
            stderr,
        }
    }
}

/// Running mean/variance per time index (Welford).
struct SeriesAccum {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SeriesAccum {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, values: impl Iterator<Item = f64>) {
        self.n += 1;
        let n = self.n as f64;
        for ((mean, m2), v) in self.mean.iter_mut().zip(&mut self.m2).zip(values) {
            let delta = v - *mean;
            *mean += delta / n;
            *m2 += delta * (v - *mean);
        }
    }

    fn finish(self) -> SeriesStat {
        let n = self.n as f64;
        let stderr = if self.n < 2 {
            vec![0.0; self.mean.len()]
        } else {
            self.m2
                .iter()
                .map(|m2| (m2 / (n - 1.0)).max(0.0).sqrt() / n.sqrt())
                .collect()
        };
        SeriesStat {
            mean: self.mean,
            stderr,
        }
    }
}

/// Worst-case invariant figures over every trajectory and time of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_norm_deviation: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub max_lambda_sum_error: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_norm_deviation: 0.0,
            lambda_min: f64::INFINITY,
            lambda_max: f64::NEG_INFINITY,
            max_lambda_sum_error: 0.0,
        }
    }
}

impl Diagnostics {
    fn observe(&mut self, s: &StepSample) {
        self.max_norm_deviation = self.max_norm_deviation.max(s.norm_deviation);
        self.lambda_min = self.lambda_min.min(s.lambda_minus).min(s.lambda_plus);
        self.lambda_max = self.lambda_max.max(s.lambda_minus).max(s.lambda_plus);
        self.max_lambda_sum_error = self
            .max_lambda_sum_error
            .max((s.lambda_plus + s.lambda_minus - 1.0).abs());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: RunConfig,
    /// `1..=t_max`.
    pub times: Vec<usize>,
    pub second_moment: SeriesStat,
    pub entropy: SeriesStat,
    pub ipr: SeriesStat,
    pub occupancy: SeriesStat,
    pub entanglement: SeriesStat,
    /// `P̄_{t_max}(x)`.
    pub final_distribution: SpatialDistribution,
    /// Exponent of the mean `x̄²`; `None` when the fit window is too short.
    pub alpha: Option<f64>,
    /// Jackknife standard error of `alpha` over trajectories.
    pub alpha_stderr: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl EnsembleResult {
    pub fn variance_series(&self) -> VarianceSeries {
        VarianceSeries::from_values(&self.second_moment.mean)
    }
}

/// Sum of distributions over a fixed union window.
struct DistributionSum {
    x_min: i64,
    sums: Vec<f64>,
}

impl DistributionSum {
    fn spanning(lo: i64, hi: i64) -> Self {
        Self {
            x_min: lo,
            sums: vec![0.0; (hi - lo + 1) as usize],
        }
    }

    fn add_state(&mut self, state: &WalkerState) {
        let base = (state.x_min() - self.x_min) as usize;
        for (i, (l, r)) in state.left().iter().zip(state.right()).enumerate() {
            self.sums[base + 2 * i] += l.norm_sqr() + r.norm_sqr();
        }
    }

    fn add(&mut self, dist: &SpatialDistribution) {
        let base = (dist.x_min - self.x_min) as usize;
        for (s, p) in self.sums[base..].iter_mut().zip(&dist.probs) {
            *s += p;
        }
    }

    fn mean(self, t: usize, n: usize) -> SpatialDistribution {
        let n = n as f64;
        SpatialDistribution::new(
            t,
            self.x_min,
            self.sums.into_iter().map(|s| s / n).collect(),
        )
    }
}

/// Trajectories advanced together so that `P̄_t` exists at every `t`.
struct Lockstep<'a> {
    config: &'a RunConfig,
    table: &'a KernelTable,
    coin: CoinMatrix,
    lanes: Vec<Lane>,
}

impl<'a> Lockstep<'a> {
    fn new(config: &'a RunConfig, table: &'a KernelTable) -> Self {
        Self {
            config,
            table,
            coin: coin_matrix(&config.coin),
            lanes: (0..config.n_trajectories)
                .map(|i| Lane::new(config, i))
                .collect(),
        }
    }

    fn advance(&mut self) -> Result<Vec<StepSample>> {
        let (table, coin, config) = (self.table, &self.coin, self.config);
        self.lanes
            .par_iter_mut()
            .map(|lane| lane.advance(table, coin, config))
            .collect()
    }

    fn mean_distribution(&self) -> SpatialDistribution {
        let lo = self.lanes.iter().map(|l| l.state.x_min()).min().unwrap();
        let hi = self.lanes.iter().map(|l| l.state.x_max()).max().unwrap();
        let mut sum = DistributionSum::spanning(lo, hi);
        for lane in &self.lanes {
            sum.add_state(&lane.state);
        }
        sum.mean(self.lanes[0].state.time(), self.lanes.len())
    }
}

fn jackknife_alpha(per_trajectory: &[Vec<f64>], window: FitWindow) -> Result<Option<f64>> {
    let n = per_trajectory.len();
    if n < 2 {
        return Ok(None);
    }
    let len = per_trajectory[0].len();
    let mut total = vec![0.0; len];
    for series in per_trajectory {
        for (acc, v) in total.iter_mut().zip(series) {
            *acc += v;
        }
    }
    let estimates = per_trajectory
        .iter()
        .map(|series| {
            let loo: Vec<f64> = total
                .iter()
                .zip(series)
                .map(|(s, v)| (s - v) / (n - 1) as f64)
                .collect();
            fit_alpha(&VarianceSeries::from_values(&loo), window)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = estimates.iter().sum::<f64>() / n as f64;
    let ss: f64 = estimates.iter().map(|a| (a - mean).powi(2)).sum();
    Ok(Some(((n - 1) as f64 / n as f64 * ss).sqrt()))
}

fn fit_or_none(series: &VarianceSeries, window: FitWindow) -> Result<Option<f64>> {
    match fit_alpha(series, window) {
        Ok(a) => Ok(Some(a)),
        Err(Error::InsufficientPoints(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs the configured ensemble and aggregates every observable series.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let table = KernelTable::new(config.q, config.t_max)?;
    let n = config.n_trajectories;
    let t_max = config.t_max;

    let mut x2 = SeriesAccum::new(t_max);
    let mut ent = SeriesAccum::new(t_max);
    let mut per_trajectory_x2: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut diagnostics = Diagnostics::default();
    let (entropy, ipr_series, occupancy_series, final_distribution);

    match config.averaging {
        AveragingMode::AverageObservables => {
            let mut s = SeriesAccum::new(t_max);
            let mut r = SeriesAccum::new(t_max);
            let mut o = SeriesAccum::new(t_max);
            let mut finals: Vec<SpatialDistribution> = Vec::with_capacity(n);
            let light = RunConfig {
                keep_distributions: false,
                ..config.clone()
            };
            let indices: Vec<usize> = (0..n).collect();
            for batch in indices.chunks(BATCH) {
                let records = batch
                    .par_iter()
                    .map(|&i| simulate(&light, &table, i))
                    .collect::<Result<Vec<_>>>()?;
                for rec in records {
                    for sample in &rec.samples {
                        diagnostics.observe(sample);
                    }
                    x2.push(rec.samples.iter().map(|s| s.second_moment));
                    ent.push(rec.samples.iter().map(|s| s.entanglement));
                    s.push(rec.samples.iter().map(|s| s.entropy));
                    r.push(rec.samples.iter().map(|s| s.ipr));
                    o.push(rec.samples.iter().map(|s| s.occupancy as f64));
                    per_trajectory_x2.push(rec.samples.iter().map(|s| s.second_moment).collect());
                    finals.push(rec.final_distribution);
                }
            }
            let lo = finals.iter().map(|d| d.x_min).min().unwrap();
            let hi = finals.iter().map(|d| d.x_max()).max().unwrap();
            let mut sum = DistributionSum::spanning(lo, hi);
            for d in &finals {
                sum.add(d);
            }
            final_distribution = sum.mean(t_max, n);
            entropy = s.finish();
            ipr_series = r.finish();
            occupancy_series = o.finish();
        }
        AveragingMode::AverageDistributions => {
            let mut lockstep = Lockstep::new(config, &table);
            let mut per_t: Vec<Vec<StepSample>> = Vec::with_capacity(t_max);
            let mut s = Vec::with_capacity(t_max);
            let mut r = Vec::with_capacity(t_max);
            let mut o = Vec::with_capacity(t_max);
            let mut mean = None;
            for _ in 0..t_max {
                let samples = lockstep.advance()?;
                let avg = lockstep.mean_distribution();
                s.push(shannon_entropy(&avg, config.entropy_base));
                r.push(ipr(&avg));
                o.push(occupancy(&avg, config.threshold) as f64);
                mean = Some(avg);
                per_t.push(samples);
            }
            for i in 0..n {
                let samples: Vec<&StepSample> = per_t.iter().map(|row| &row[i]).collect();
                for sample in &samples {
                    diagnostics.observe(sample);
                }
                x2.push(samples.iter().map(|s| s.second_moment));
                ent.push(samples.iter().map(|s| s.entanglement));
                per_trajectory_x2.push(samples.iter().map(|s| s.second_moment).collect());
            }
            final_distribution = mean.expect("t_max >= 2");
            entropy = SeriesStat::exact(s);
            ipr_series = SeriesStat::exact(r);
            occupancy_series = SeriesStat::exact(o);
        }
    }

    let second_moment = x2.finish();
    let alpha = fit_or_none(
        &VarianceSeries::from_values(&second_moment.mean),
        config.fit_window,
    )?;
    let alpha_stderr = match alpha {
        Some(_) => jackknife_alpha(&per_trajectory_x2, config.fit_window)?,
        None => None,
    };

    Ok(EnsembleResult {
        config: config.clone(),
        times: (1..=t_max).collect(),
        second_moment,
        entropy,
        ipr: ipr_series,
        occupancy: occupancy_series,
        entanglement: ent.finish(),
        final_distribution,
        alpha,
        alpha_stderr,
        diagnostics,
    })
}

/// JSD between the ensemble-mean distributions of two runs at every
/// `t = 1..=t_max`.
///
/// The runs must share `q`, `t_max`, trajectory count and seed, so that
/// trajectory `i` of both follows the same jump sequence and only the coins
/// differ.
pub fn jsd_series(a: &RunConfig, b: &RunConfig) -> Result<Vec<f64>> {
    a.validate()?;
    b.validate()?;
    if a.q != b.q || a.t_max != b.t_max || a.n_trajectories != b.n_trajectories || a.seed != b.seed
    {
        return Err(Error::InvalidParameter(
            "JSD series requires matching q, t_max, trajectory count and seed".into(),
        ));
    }
    let table = KernelTable::new(a.q, a.t_max)?;
    let mut left = Lockstep::new(a, &table);
    let mut right = Lockstep::new(b, &table);
    (0..a.t_max)
        .map(|_| {
            left.advance()?;
            right.advance()?;
            Ok(observables::jsd(
                &left.mean_distribution(),
                &right.mean_distribution(),
            ))
        })
        .collect()
}

/// Grid of `(q, θ, coin)` points; `phi` overrides the symmetric default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub qs: Vec<f64>,
    pub thetas: Vec<f64>,
    pub coins: Vec<CoinFamily>,
    pub phi: Option<f64>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.qs.is_empty() || self.thetas.is_empty() || self.coins.is_empty()
    }

    /// Points in row order: `q` outermost, then `θ`, then coin.
    pub fn points(&self) -> Vec<(f64, f64, CoinFamily)> {
        let mut out = Vec::new();
        for &q in &self.qs {
            for &theta in &self.thetas {
                for &coin in &self.coins {
                    out.push((q, theta, coin));
                }
            }
        }
        out
    }
}

/// Summary of one sweep point; observables are the `t_max` means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub theta: f64,
    pub coin: CoinFamily,
    pub alpha: Option<f64>,
    pub alpha_stderr: Option<f64>,
    pub second_moment: f64,
    pub entropy: f64,
    pub ipr: f64,
    pub occupancy: f64,
    pub entanglement: f64,
    /// JSD between the H and K final distributions at the same `(q, θ)`, when
    /// both coins are in the grid.
    pub jsd: Option<f64>,
}

/// Runs every grid point with `template`'s remaining settings.
pub fn sweep(grid: &SweepGrid, template: &RunConfig) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for (q, theta, family) in grid.points() {
        let mut coin = CoinParams::new(family, theta);
        if let Some(phi) = grid.phi {
            coin = coin.with_phi(phi);
        }
        let config = RunConfig {
            q,
            coin,
            ..template.clone()
        };
        let result = run_ensemble(&config)?;
        rows.push(SweepRow {
            q,
            theta,
            coin: family,
            alpha: result.alpha,
            alpha_stderr: result.alpha_stderr,
            second_moment: result.second_moment.last_mean(),
            entropy: result.entropy.last_mean(),
            ipr: result.ipr.last_mean(),
            occupancy: result.occupancy.last_mean(),
            entanglement: result.entanglement.last_mean(),
            jsd: None,
        });
        finals.push(result.final_distribution);
    }
    for i in 0..rows.len() {
        if rows[i].coin != CoinFamily::H {
            continue;
        }
        let partner = (0..rows.len()).find(|&j| {
            rows[j].coin == CoinFamily::K
                && rows[j].q == rows[i].q
                && rows[j].theta == rows[i].theta
        });
        if let Some(j) = partner {
            let d = observables::jsd(&finals[i], &finals[j]);
            rows[i].jsd = Some(d);
            rows[j].jsd = Some(d);
        }
    }
    Ok(rows)
}
