//! The q-exponential jump-length kernel.
//!
//! At time `t` the walker's jump length is drawn from
//! `P(k) = C_t * [1 - (1 - q) k]_+^{1/(1 - q)}` on `k = 1..=t`. The
//! unnormalized decay does not depend on `t`, so a [`KernelTable`] built once
//! up to the largest horizon serves every step of every trajectory; only the
//! normalization changes with the horizon.

use rand::Rng;

use crate::error::{Error, Result};

/// Smallest admissible entropic index. At `q = 1/2` the support collapses to
/// `k = 1` and the walk reduces to the standard nearest-neighbour walk.
pub const MIN_Q: f64 = 0.5;

/// Bases of the deformed exponential below this are treated as exactly zero.
const BASE_FLOOR: f64 = 1e-300;

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q < MIN_Q {
        return Err(Error::InvalidParameter(format!(
            "entropic index q must be finite and >= {MIN_Q}, got {q}"
        )));
    }
    Ok(())
}

fn check_horizon(t: usize) -> Result<()> {
    if t < 1 {
        return Err(Error::InvalidParameter(
            "kernel horizon must be >= 1".into(),
        ));
    }
    Ok(())
}

/// Unnormalized `exp_q(-k) = [1 - (1 - q) k]_+^{1/(1 - q)}`.
///
/// `q == 1` uses `e^{-k}` directly. For `q < 1` the support ends strictly
/// below `1/(1 - q)`.
pub fn q_exp_decay(q: f64, k: usize) -> f64 {
    let k = k as f64;
    if q == 1.0 {
        return (-k).exp();
    }
    // exponent of the bracket, 1/(1 - q); negative for q > 1
    let r = 1.0 / (1.0 - q);
    if q < 1.0 && k >= r {
        return 0.0;
    }
    let base = 1.0 - k / r;
    if base < BASE_FLOOR {
        return 0.0;
    }
    (r * (-k / r).ln_1p()).exp()
}

/// Normalized kernel weights on `k = 1..=t`; element `k - 1` holds `P(k)`.
pub fn kernel_weights(q: f64, t: usize) -> Result<Vec<f64>> {
    Ok(MemoryKernel::new(q, t)?.weights)
}

/// The jump-length distribution for one horizon `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel {
    q: f64,
    horizon: usize,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl MemoryKernel {
    pub fn new(q: f64, horizon: usize) -> Result<Self> {
        check_q(q)?;
        check_horizon(horizon)?;
        let raw: Vec<f64> = (1..=horizon).map(|k| q_exp_decay(q, k)).collect();
        Ok(Self::from_raw(q, &raw))
    }

    fn from_raw(q: f64, raw: &[f64]) -> Self {
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc.min(1.0)
            })
            .collect();
        // the last entry closes the distribution exactly
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self {
            q,
            horizon: raw.len(),
            weights,
            cdf,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Probabilities of `k = 1..=horizon` (index `k - 1`).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Probability of jump length `k`; zero outside `1..=horizon`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.weights.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Inverse-CDF lookup of a uniform variate `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.horizon - 1) + 1
    }

    /// Draws one jump length using a single uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.random::<f64>())
    }
}

/// Unnormalized kernel with running sums up to a maximal horizon.
///
/// Sampling at horizon `t` rescales the uniform variate by the partial sum
/// `sum_{k<=t} exp_q(-k)` instead of rebuilding the normalized table, which
/// makes a whole trajectory O(t_max) in kernel work. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct KernelTable {
    q: f64,
    raw: Vec<f64>,
    prefix: Vec<f64>,
}

impl KernelTable {
    pub fn new(q: f64, max_horizon: usize) -> Result<Self> {
        check_q(q)?;
        check_horizon(max_horizon)?;
        let raw: Vec<f64> = (1..=max_horizon).map(|k| q_exp_decay(q, k)).collect();
        let mut acc = 0.0;
        let prefix = raw
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { q, raw, prefix })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max_horizon(&self) -> usize {
        self.raw.len()
    }

    /// Normalized kernel for `horizon <= max_horizon`.
    pub fn kernel(&self, horizon: usize) -> Result<MemoryKernel> {
        self.check(horizon)?;
        Ok(MemoryKernel::from_raw(self.q, &self.raw[..horizon]))
    }

    fn check(&self, horizon: usize) -> Result<()> {
        check_horizon(horizon)?;
        if horizon > self.raw.len() {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} exceeds kernel table size {}",
                self.raw.len()
            )));
        }
        Ok(())
    }

    /// Jump length at `horizon` for the uniform variate `u` in `[0, 1)`.
    ///
    /// # Panics
    /// If `horizon` is zero or exceeds the table.
    pub fn quantile(&self, horizon: usize, u: f64) -> usize {
        assert!(
            (1..=self.raw.len()).contains(&horizon),
            "horizon {horizon} outside kernel table"
        );
        let prefix = &self.prefix[..horizon];
        let target = u * prefix[horizon - 1];
        prefix.partition_point(|&c| c <= target).min(horizon - 1) + 1
    }

    /// Draws a jump length at `horizon`. Horizon 1 is degenerate and consumes
    /// no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> usize {
        if horizon == 1 {
            return 1;
        }
        self.quantile(horizon, rng.random::<f64>())
    }
}
