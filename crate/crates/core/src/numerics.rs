//! Dense row-major matrices, numerically stable probability transforms, and a
//! seeded pseudo-random number source.
//!
//! Everything in this module is deterministic by construction: reductions run
//! in a fixed left-to-right order, argmax ties resolve to the lowest index,
//! and the random number generator produces bit-identical streams for
//! identical seeds on every platform. All arithmetic uses 64-bit floats — the
//! calibration networks are tiny, so precision beats speed.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>` slices; only matrices get a
//! dedicated type.

use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, checking the length.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "a {rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice. Panics if `i` is out of bounds.
    pub fn row(&self, i: usize) -> &[f64] {
        assert!(
            i < self.rows,
            "row {i} out of bounds for {} rows",
            self.rows
        );
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Row-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// True when every entry is finite (no NaN or infinity).
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// log Σ exp(v_i), computed with max-subtraction so it is finite for any
/// finite input.
pub fn log_sum_exp(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut max = v[0];
    for &x in &v[1..] {
        if x > max {
            max = x;
        }
    }
    let mut sum = 0.0;
    for &x in v {
        sum += (x - max).exp();
    }
    Ok(max + sum.ln())
}

/// Row-wise softmax of a single vector: exp(v_i − log_sum_exp(v)).
///
/// Entries land in (0, 1] and sum to 1 within 1e-12; no renormalization is
/// applied.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    let lse = log_sum_exp(v)?;
    Ok(v.iter().map(|&x| (x - lse).exp()).collect())
}

/// v_i − log_sum_exp(v); exp of the output matches [`softmax`] elementwise.
pub fn log_softmax(v: &[f64]) -> Result<Vec<f64>> {
    let lse = log_sum_exp(v)?;
    Ok(v.iter().map(|&x| x - lse).collect())
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(v: &[f64]) -> Result<usize> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Matrix–vector product with a fixed left-to-right summation order per row.
pub fn mat_vec(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if m.cols() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but vector has length {}",
            m.rows(),
            m.cols(),
            v.len()
        )));
    }
    let mut out = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let row = m.row(i);
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(v) {
            acc += a * b;
        }
        out.push(acc);
    }
    Ok(out)
}

const TWO_POW_NEG53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded pseudo-random number source: xoshiro256++ with its 256-bit state
/// expanded from the seed via splitmix64.
///
/// The algorithm is fixed and self-contained so identical seeds yield
/// identical streams on every platform, independent of external crates or
/// platform libraries. Each generator is single-owner; clone it if two
/// consumers need independent but correlated replays of the same stream.
#[derive(Debug, Clone)]
pub struct Prng {
    state: [u64; 4],
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for slot in &mut state {
            *slot = splitmix64(&mut sm);
        }
        Self { state }
    }

    /// Generator for stream `index` of `seed`, so independent consumers
    /// (e.g. validation and test splits) draw from disjoint, well-mixed
    /// streams of a single user-facing seed.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut sm = seed;
        let mut sub = 0;
        for _ in 0..=index {
            sub = splitmix64(&mut sm);
        }
        Self::new(sub)
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG53
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "uniform bounds must satisfy lo < hi, got lo = {lo}, hi = {hi}"
            )));
        }
        Ok(lo + self.unit() * (hi - lo))
    }

    /// Normal draw via the Box–Muller transform (no caching: every call
    /// consumes exactly two uniform draws, keeping the stream layout simple
    /// and reproducible). `sigma = 0` returns exactly `mu`.
    pub fn normal(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if sigma.is_nan() || sigma < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "standard deviation must be non-negative, got {sigma}"
            )));
        }
        // u1 in (0, 1] so the logarithm is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53;
        let u2 = self.unit();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        Ok(mu + sigma * z)
    }

    /// Uniform index in [0, n). Panics on n = 0 (programmer error, not data).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw an index from an empty range");
        let i = (self.unit() * n as f64).floor() as usize;
        i.min(n - 1)
    }
}
