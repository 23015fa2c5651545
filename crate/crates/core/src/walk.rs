//! Walker state and the coin-then-jump evolution step.
//!
//! The state is stored on the sublattice of one parity. After any sequence of
//! jumps `t'_1, ..., t'_t` every nonzero amplitude sits on a site
//! `x ≡ Σ t'_s (mod 2)`, so index `i` of the amplitude buffers maps to site
//! `x_min + 2 i`. The window spans `[x_min, x_max]` and grows by exactly the
//! jump on each side per step; the opposite-parity sites inside it are
//! structurally zero and never stored.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The two coin families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoinFamily {
    /// Hadamard-like real coin `[[cos θ, sin θ], [sin θ, -cos θ]]`.
    H,
    /// Non-hermitian coin `[[cos θ, i sin θ], [i sin θ, cos θ]]`.
    K,
}

impl CoinFamily {
    /// Initial-state phase that makes `P_t(x)` symmetric.
    pub fn symmetric_phase(self) -> f64 {
        match self {
            CoinFamily::H => FRAC_PI_2,
            CoinFamily::K => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CoinFamily::H => "H",
            CoinFamily::K => "K",
        }
    }
}

impl std::str::FromStr for CoinFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(CoinFamily::H),
            "K" | "k" => Ok(CoinFamily::K),
            other => Err(Error::InvalidParameter(format!(
                "unknown coin family {other:?} (expected H or K)"
            ))),
        }
    }
}

impl std::fmt::Display for CoinFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Coin family, angle and initial phase; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub family: CoinFamily,
    pub theta: f64,
    pub phi: f64,
}

impl CoinParams {
    /// Coin with the family's symmetric initial phase.
    pub fn new(family: CoinFamily, theta: f64) -> Self {
        Self {
            family,
            theta,
            phi: family.symmetric_phase(),
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }
}

/// A 2×2 complex matrix acting on `(ψ^L, ψ^R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix(pub [[Complex64; 2]; 2]);

impl CoinMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        CoinMatrix([[one, ZERO], [ZERO, one]])
    }

    #[inline]
    pub fn apply(&self, l: Complex64, r: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * l + m[0][1] * r, m[1][0] * l + m[1][1] * r)
    }

    /// Largest entry of `|M M† - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let acc: Complex64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b.conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

pub fn coin_matrix(params: &CoinParams) -> CoinMatrix {
    let (s, c) = params.theta.sin_cos();
    match params.family {
        CoinFamily::H => CoinMatrix([
            [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
        ]),
        CoinFamily::K => CoinMatrix([
            [Complex64::new(c, 0.0), Complex64::new(0.0, s)],
            [Complex64::new(0.0, s), Complex64::new(c, 0.0)],
        ]),
    }
}

/// Two-component spinor field over a growing window of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    // ψ^L lives in left[left_start .. left_start + len]; the cells before
    // left_start are zeroed headroom so that shifts can prepend cheaply.
    left: Vec<Complex64>,
    left_start: usize,
    right: Vec<Complex64>,
    len: usize,
    x_min: i64,
    time: usize,
}

impl WalkerState {
    /// Localized state `(|0> + e^{iφ}|1>)/√2` at the origin, `t = 0`.
    pub fn initial(params: &CoinParams) -> Self {
        let amp = FRAC_1_SQRT_2;
        Self::from_site_amplitudes(
            0,
            vec![Complex64::new(amp, 0.0)],
            vec![Complex64::from_polar(amp, params.phi)],
        )
    }

    /// State with amplitudes on sites `x_min, x_min + 2, ...`.
    ///
    /// # Panics
    /// If the two components differ in length or are empty.
    pub fn from_site_amplitudes(x_min: i64, left: Vec<Complex64>, right: Vec<Complex64>) -> Self {
        assert_eq!(left.len(), right.len(), "component length mismatch");
        assert!(!left.is_empty(), "empty state");
        Self {
            len: left.len(),
            left,
            left_start: 0,
            right,
            x_min,
            time: 0,
        }
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// Lowest site of the window.
    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    /// Highest site of the window.
    pub fn x_max(&self) -> i64 {
        self.x_min + 2 * (self.len as i64 - 1)
    }

    /// Number of stored (same-parity) sites.
    pub fn stored_sites(&self) -> usize {
        self.len
    }

    pub fn left(&self) -> &[Complex64] {
        &self.left[self.left_start..self.left_start + self.len]
    }

    pub fn right(&self) -> &[Complex64] {
        &self.right[..self.len]
    }

    /// Site of stored index `i`.
    #[inline]
    pub fn site(&self, i: usize) -> i64 {
        self.x_min + 2 * i as i64
    }

    /// `(ψ^L(x), ψ^R(x))`, zero outside the stored sublattice.
    pub fn amplitude(&self, x: i64) -> (Complex64, Complex64) {
        let offset = x - self.x_min;
        if offset < 0 || offset % 2 != 0 {
            return (ZERO, ZERO);
        }
        let i = (offset / 2) as usize;
        if i >= self.len {
            return (ZERO, ZERO);
        }
        (self.left()[i], self.right()[i])
    }

    /// `(x, ψ^L(x), ψ^R(x))` over stored sites in increasing `x`.
    pub fn sites(&self) -> impl Iterator<Item = (i64, Complex64, Complex64)> + '_ {
        self.left()
            .iter()
            .zip(self.right())
            .enumerate()
            .map(|(i, (&l, &r))| (self.site(i), l, r))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.left()
            .iter()
            .zip(self.right())
            .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
            .sum()
    }

    /// Applies the coin sitewise.
    pub fn apply_coin(&mut self, coin: &CoinMatrix) {
        let (start, len) = (self.left_start, self.len);
        let left = &mut self.left[start..start + len];
        for (l, r) in left.iter_mut().zip(self.right.iter_mut()) {
            let (a, b) = coin.apply(*l, *r);
            *l = a;
            *r = b;
        }
    }

    /// Moves `ψ^L` to `x + jump` and `ψ^R` to `x - jump`.
    pub fn apply_shift(&mut self, jump: usize) -> Result<()> {
        if jump == 0 {
            return Err(Error::InvalidParameter("jump length must be >= 1".into()));
        }
        // On the parity sublattice, ψ^R keeps its index and ψ^L moves up by
        // `jump` indices once the window is extended down by `jump` sites.
        if self.left_start < jump {
            let headroom = jump.max(self.len + jump);
            let mut grown = vec![ZERO; headroom + self.len];
            grown[headroom..].copy_from_slice(self.left());
            self.left = grown;
            self.left_start = headroom;
        }
        self.left_start -= jump;
        self.right.resize(self.len + jump, ZERO);
        self.len += jump;
        self.x_min -= jump as i64;
        Ok(())
    }

    /// One step `Ψ_{t+1} = S_{t'} (C ⊗ Id) Ψ_t`; the jump must lie in `1..=t+1`.
    pub fn step(&mut self, coin: &CoinMatrix, jump: usize) -> Result<()> {
        if jump == 0 || jump > self.time + 1 {
            return Err(Error::InvalidParameter(format!(
                "jump {jump} outside 1..={} at t = {}",
                self.time + 1,
                self.time
            )));
        }
        self.apply_coin(coin);
        self.apply_shift(jump)?;
        self.time += 1;
        Ok(())
    }
}
