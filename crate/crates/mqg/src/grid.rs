//! Uniform grid on the periodic square `[0, 2pi)^2` and its wavevectors.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// An `n x n` collocation grid on the 2pi-periodic square.
///
/// Grid point `(i, j)` sits at `x = 2pi * (i/n, j/n)`; the first index is the
/// x1 direction.  The resolved integer wavevectors are
/// `K = { (k1, k2) : -n/2 < k_i <= n/2 }` in the usual FFT bin order, and
/// quadratic nonlinearities are truncated at `max(|k1|, |k2|) <= floor(n/3)`
/// (the 2/3 rule), which removes quadratic aliasing on the retained modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
    dealias_cutoff: usize,
}

impl Grid2D {
    /// Requires `n` even and at least 8, so the cutoff is >= 2 and the grid
    /// resolves at least the dyadic shells j = 0, 1.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid { n });
        }
        Ok(Grid2D { n, dealias_cutoff: n / 3 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (= number of spectral bins).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dealias_cutoff(&self) -> usize {
        self.dealias_cutoff
    }

    /// Area `(2pi/n)^2` of one grid cell; the weight of the rectangle rule.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        h * h
    }

    /// Wavevector component encoded by FFT bin `m` (0-based).
    #[inline]
    pub fn wavenumber(&self, m: usize) -> i64 {
        debug_assert!(m < self.n);
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// FFT bin holding wavevector component `k`.
    #[inline]
    pub fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn index(&self, m1: usize, m2: usize) -> usize {
        m1 * self.n + m2
    }

    /// Coordinates of grid point `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let h = 2.0 * PI / self.n as f64;
        (h * i as f64, h * j as f64)
    }

    /// Iterate over `(flat index, k1, k2)` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |m1| {
            (0..n).map(move |m2| (m1 * n + m2, self.wavenumber(m1), self.wavenumber(m2)))
        })
    }

    /// True if the mode survives the 2/3-rule truncation.
    #[inline]
    pub fn retained(&self, k1: i64, k2: i64) -> bool {
        let c = self.dealias_cutoff as i64;
        k1.abs() <= c && k2.abs() <= c
    }
}
