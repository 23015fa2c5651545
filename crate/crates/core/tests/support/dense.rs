//! Brute-force reference: the walk as explicit dense unitaries on a ring.
//!
//! Basis vector `2 * site + c` holds component `c` (0 = L, 1 = R) of ring site
//! `site`, which represents lattice position `site - center`. Each step is the
//! full matrix `W = S (C ⊗ Id)` built entry by entry and applied by plain
//! matrix-vector multiplication.

#![allow(dead_code)]

use num_complex::Complex64;

pub struct DenseWalk {
    pub ring: usize,
    pub center: usize,
    pub vector: Vec<Complex64>,
}

pub type Matrix = Vec<Vec<Complex64>>;

fn zeros(n: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `C ⊗ Id` on the ring.
pub fn coin_operator(ring: usize, coin: [[Complex64; 2]; 2]) -> Matrix {
    let mut m = zeros(2 * ring);
    for s in 0..ring {
        for a in 0..2 {
            for b in 0..2 {
                m[2 * s + a][2 * s + b] = coin[a][b];
            }
        }
    }
    m
}

/// Jump shift: L moves up by `jump` sites, R moves down.
pub fn shift_operator(ring: usize, jump: usize) -> Matrix {
    let mut m = zeros(2 * ring);
    for s in 0..ring {
        m[2 * ((s + jump) % ring)][2 * s] = Complex64::new(1.0, 0.0);
        m[2 * ((s + ring - jump) % ring) + 1][2 * s + 1] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn step_operator(ring: usize, coin: [[Complex64; 2]; 2], jump: usize) -> Matrix {
    matmul(&shift_operator(ring, jump), &coin_operator(ring, coin))
}

pub fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

impl DenseWalk {
    /// `(|0> + e^{iφ}|1>)/√2` at the origin of a ring reaching `±reach`.
    pub fn new(reach: usize, phi: f64) -> Self {
        let ring = 2 * reach + 1;
        let center = reach;
        let mut vector = vec![Complex64::new(0.0, 0.0); 2 * ring];
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        vector[2 * center] = Complex64::new(amp, 0.0);
        vector[2 * center + 1] = Complex64::from_polar(amp, phi);
        Self {
            ring,
            center,
            vector,
        }
    }

    pub fn apply(&mut self, m: &Matrix) {
        self.vector = apply(m, &self.vector);
    }

    pub fn amplitude(&self, x: i64) -> (Complex64, Complex64) {
        let s = (x + self.center as i64) as usize;
        (self.vector[2 * s], self.vector[2 * s + 1])
    }

    pub fn positions(&self) -> std::ops::RangeInclusive<i64> {
        -(self.center as i64)..=(self.ring - 1 - self.center) as i64
    }

    pub fn second_moment(&self) -> f64 {
        self.positions()
            .map(|x| {
                let (l, r) = self.amplitude(x);
                (x as f64).powi(2) * (l.norm_sqr() + r.norm_sqr())
            })
            .sum()
    }
}
