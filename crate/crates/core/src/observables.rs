//! Measurements on the walker: spatial moments, localization measures,
//! divergences between distributions, coin-space entanglement and the
//! diffusion-exponent fit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::WalkerState;

/// Default cutoff below which a site counts as unoccupied.
pub const DEFAULT_THRESHOLD: f64 = 1e-9;

/// Tolerance on the eigenvalue discriminant before it is declared inconsistent.
const DISCRIMINANT_SLACK: f64 = 1e-10;

/// Logarithm base for the spatial Shannon entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    #[inline]
    fn ln_scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LOG2_E,
        }
    }
}

/// `P(x)` over the contiguous window `x_min, x_min + 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialDistribution {
    pub t: usize,
    pub x_min: i64,
    pub probs: Vec<f64>,
}

impl SpatialDistribution {
    pub fn new(t: usize, x_min: i64, probs: Vec<f64>) -> Self {
        Self { t, x_min, probs }
    }

    /// Point mass at `x`.
    pub fn delta(x: i64) -> Self {
        Self::new(0, x, vec![1.0])
    }

    /// Uniform over `n` consecutive sites starting at `x_min`.
    pub fn uniform(x_min: i64, n: usize) -> Self {
        Self::new(0, x_min, vec![1.0 / n as f64; n])
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.probs.len() as i64 - 1
    }

    pub fn window_len(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, x: i64) -> f64 {
        let i = x - self.x_min;
        if i < 0 {
            return 0.0;
        }
        self.probs.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.x_min + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `P_t(x) = |ψ^L(x)|² + |ψ^R(x)|²` on the full integer window of the state.
pub fn distribution(state: &WalkerState) -> SpatialDistribution {
    let width = (state.x_max() - state.x_min()) as usize + 1;
    let mut probs = vec![0.0; width];
    for (i, (l, r)) in state.left().iter().zip(state.right()).enumerate() {
        probs[2 * i] = l.norm_sqr() + r.norm_sqr();
    }
    SpatialDistribution::new(state.time(), state.x_min(), probs)
}

pub fn first_moment(dist: &SpatialDistribution) -> f64 {
    dist.iter().map(|(x, p)| x as f64 * p).sum()
}

/// `Σ x² P(x)`.
pub fn second_moment(dist: &SpatialDistribution) -> f64 {
    dist.iter().map(|(x, p)| (x as f64).powi(2) * p).sum()
}

/// Relative quadratic deviation `(x - x̄)² P(x)`, one entry per window site.
pub fn rqd_profile(dist: &SpatialDistribution) -> Vec<(i64, f64)> {
    let mean = first_moment(dist);
    dist.iter()
        .map(|(x, p)| (x, (x as f64 - mean).powi(2) * p))
        .collect()
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `-Σ P log P` with `0 log 0 = 0`.
pub fn shannon_entropy(dist: &SpatialDistribution, base: LogBase) -> f64 {
    let s: f64 = dist.probs.iter().map(|&p| plogp(p)).sum();
    -s * base.ln_scale()
}

/// `1 / Σ P²`.
pub fn ipr(dist: &SpatialDistribution) -> f64 {
    1.0 / dist.probs.iter().map(|p| p * p).sum::<f64>()
}

/// Number of sites with `P(x) > threshold`.
pub fn occupancy(dist: &SpatialDistribution, threshold: f64) -> usize {
    dist.probs.iter().filter(|&&p| p > threshold).count()
}

/// `Σ U log₂(U/W)` over a shared window; terms with `U = 0` vanish.
pub fn kld(u: &SpatialDistribution, w: &SpatialDistribution) -> Result<f64> {
    let mut acc = 0.0;
    for (x, pu) in u.iter() {
        if pu == 0.0 {
            continue;
        }
        let pw = w.prob(x);
        if pw <= 0.0 {
            return Err(Error::Undefined(format!(
                "KLD diverges: U({x}) = {pu} but W({x}) = 0"
            )));
        }
        acc += pu * (pu / pw).log2();
    }
    Ok(acc)
}

/// Aligns two distributions on the union of their windows.
fn union_window(a: &SpatialDistribution, b: &SpatialDistribution) -> (i64, Vec<f64>, Vec<f64>) {
    let lo = a.x_min.min(b.x_min);
    let hi = a.x_max().max(b.x_max());
    let n = (hi - lo + 1) as usize;
    let spread = |d: &SpatialDistribution| {
        let mut v = vec![0.0; n];
        let off = (d.x_min - lo) as usize;
        v[off..off + d.probs.len()].copy_from_slice(&d.probs);
        v
    };
    (lo, spread(a), spread(b))
}

/// Jensen-Shannon dissimilarity in bits, `[KLD(P|M) + KLD(Q|M)] / 2` with
/// `M = (P + Q)/2` on the union window.
pub fn jsd(p: &SpatialDistribution, q: &SpatialDistribution) -> f64 {
    let (_, a, b) = union_window(p, q);
    // Terms are symmetric in (a, b), so jsd(p, q) == jsd(q, p) bitwise.
    let mut acc = 0.0;
    for (&pa, &pb) in a.iter().zip(&b) {
        let m = 0.5 * (pa + pb);
        if m <= 0.0 {
            continue;
        }
        let term = |v: f64| if v > 0.0 { v * (v / m).log2() } else { 0.0 };
        acc += term(pa) + term(pb);
    }
    (0.5 * acc).clamp(0.0, 1.0)
}

/// Coin-space reduced density matrix `[[G_a, G_ab], [G_ab*, G_b]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityMatrix {
    pub g_a: f64,
    pub g_b: f64,
    pub g_ab: Complex64,
}

impl ReducedDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.g_a + self.g_b
    }

    pub fn determinant(&self) -> f64 {
        self.g_a * self.g_b - self.g_ab.norm_sqr()
    }

    /// Eigenvalues `(λ⁺, λ⁻)` from the closed form
    /// `1/2 ± 1/2 √(1 - 4 G_a G_b + 4 |G_ab|²)`.
    pub fn eigenvalues(&self) -> Result<(f64, f64)> {
        let disc = 1.0 - 4.0 * self.g_a * self.g_b + 4.0 * self.g_ab.norm_sqr();
        if !(-DISCRIMINANT_SLACK..=1.0 + DISCRIMINANT_SLACK).contains(&disc) {
            return Err(Error::Invariant(format!(
                "reduced density matrix discriminant {disc} outside [0, 1]"
            )));
        }
        let root = disc.clamp(0.0, 1.0).sqrt();
        Ok((0.5 + 0.5 * root, 0.5 - 0.5 * root))
    }
}

/// `ρ^c = Tr_x |Ψ><Ψ|`.
pub fn reduced_density(state: &WalkerState) -> ReducedDensityMatrix {
    let mut g_a = 0.0;
    let mut g_b = 0.0;
    let mut g_ab = Complex64::new(0.0, 0.0);
    for (l, r) in state.left().iter().zip(state.right()) {
        g_a += l.norm_sqr();
        g_b += r.norm_sqr();
        g_ab += l * r.conj();
    }
    ReducedDensityMatrix { g_a, g_b, g_ab }
}

#[inline]
fn binary_entropy_bits(l_plus: f64, l_minus: f64) -> f64 {
    let h = |l: f64| if l > 0.0 { -l * l.log2() } else { 0.0 };
    h(l_minus) + h(l_plus)
}

/// Von Neumann entropy of the coin, in bits.
pub fn entanglement_entropy(rdm: &ReducedDensityMatrix) -> Result<f64> {
    let (lp, lm) = rdm.eigenvalues()?;
    Ok(binary_entropy_bits(lp, lm))
}

/// Every per-site observable of one state, accumulated in a single pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub t: usize,
    pub norm: f64,
    pub first_moment: f64,
    pub second_moment: f64,
    pub entropy: f64,
    pub ipr: f64,
    pub occupancy: usize,
    pub rdm: ReducedDensityMatrix,
}

/// Single-pass measurement over the stored sites; agrees with the
/// per-distribution functions above to rounding.
pub fn measure(state: &WalkerState, threshold: f64, base: LogBase) -> Measurement {
    let mut norm = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut plp = 0.0;
    let mut p2 = 0.0;
    let mut occ = 0usize;
    let mut g_a = 0.0;
    let mut g_b = 0.0;
    let mut g_ab = Complex64::new(0.0, 0.0);
    let mut x = state.x_min() as f64;
    for (l, r) in state.left().iter().zip(state.right()) {
        let pl = l.norm_sqr();
        let pr = r.norm_sqr();
        let p = pl + pr;
        g_a += pl;
        g_b += pr;
        g_ab += l * r.conj();
        if p > 0.0 {
            norm += p;
            m1 += x * p;
            m2 += x * x * p;
            plp += p * p.ln();
            p2 += p * p;
            if p > threshold {
                occ += 1;
            }
        }
        x += 2.0;
    }
    Measurement {
        t: state.time(),
        norm,
        first_moment: m1,
        second_moment: m2,
        entropy: -plp * base.ln_scale(),
        ipr: 1.0 / p2,
        occupancy: occ,
        rdm: ReducedDensityMatrix { g_a, g_b, g_ab },
    }
}

/// `(t, x̄²_t)` pairs with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VarianceSeries {
    points: Vec<(usize, f64)>,
}

impl VarianceSeries {
    pub fn new(points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "variance series times must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// Series for `t = 1, 2, ...`.
    pub fn from_values(values: &[f64]) -> Self {
        Self {
            points: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i + 1, v))
                .collect(),
        }
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn t_max(&self) -> Option<usize> {
        self.points.last().map(|p| p.0)
    }
}

/// Fraction of `t_max` bounding the fit window, `[lo t_max, hi t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for FitWindow {
    /// The last decade.
    fn default() -> Self {
        Self { lo: 0.1, hi: 1.0 }
    }
}

impl FitWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fit window must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Minimum number of points the exponent fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares slope of `ln x̄²` against `ln t` over the window.
pub fn fit_alpha(series: &VarianceSeries, window: FitWindow) -> Result<f64> {
    let t_max = series.t_max().ok_or(Error::InsufficientPoints(0))? as f64;
    let (lo, hi) = (window.lo * t_max, window.hi * t_max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.points() {
        let tf = t as f64;
        if tf < lo || tf > hi {
            continue;
        }
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Undefined(format!(
                "nonpositive second moment {v} at t = {t}"
            )));
        }
        xs.push(tf.ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints(xs.len()));
    }
    Ok(ols_slope(&xs, &ys))
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
