//! Scalar fields on the torus, in collocation and spectral form.
//!
//! The spectral representation uses Fourier-series coefficients: a real field
//! is `f(x) = sum_k c(k) e^{ik.x}` with `c(-k) = conj(c(k))`, `c(0) = 0`
//! (everything in this crate is mean-free), and `c` supported on the
//! resolved wavevector set of the grid.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Sub};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid2D;

/// Relative tolerance on the spatial mean accepted by `to_spectral`.
pub const MEAN_TOL_REL: f64 = 1e-12;
/// Relative tolerance on the imaginary residue accepted by `to_physical`.
pub const SYMMETRY_TOL_REL: f64 = 1e-12;

/// Real field sampled on the collocation grid, row-major; `values[i*n + j]`
/// is the value at `x = 2pi * (i/n, j/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: Grid2D) -> Self {
        PhysicalField { grid, values: vec![0.0; grid.len()] }
    }

    /// Wrap raw samples; rejects length mismatches and non-finite entries.
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(grid.len(), values.len()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(PhysicalField { grid, values })
    }

    /// Sample a closure of `(x1, x2)` on the grid.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.point(i, j);
                values.push(f(x1, x2));
            }
        }
        PhysicalField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Discrete L^p norm: rectangle rule `(sum |f|^p (2pi/n)^2)^(1/p)`,
    /// grid maximum for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
        if p.is_infinite() {
            return self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        }
        let sum: f64 = if p == 2.0 {
            self.values.iter().map(|&v| v * v).sum()
        } else {
            self.values.iter().map(|&v| v.abs().powf(p)).sum()
        };
        (sum * self.grid.cell_area()).powf(1.0 / p)
    }

    /// Forward transform with admissibility checks: the spatial mean must
    /// vanish to `1e-12 * ||f||_inf` (it is then zeroed exactly), and the
    /// output is symmetrized so `c(-k) = conj(c(k))` holds bit-exactly.
    pub fn to_spectral(&self) -> Result<SpectralField> {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward2(&mut buf, n);
        let scale = 1.0 / (n * n) as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        let linf = self.lp_norm(f64::INFINITY);
        if !linf.is_finite() {
            return Err(Error::NonFinite);
        }
        let mean = buf[0].norm();
        let tol = MEAN_TOL_REL * linf;
        if mean > tol {
            return Err(Error::NonZeroMean { mean, tol });
        }
        buf[0] = Complex64::new(0.0, 0.0);
        hermitian_symmetrize(&mut buf, n);
        Ok(SpectralField { grid: self.grid, coeffs: buf })
    }
}

/// Fourier coefficients of a real mean-free field, in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid2D) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavevector `(k1, k2)`.
    #[inline]
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.index(self.grid.bin(k1), self.grid.bin(k2))]
    }

    pub(crate) fn set_coeff(&mut self, k1: i64, k2: i64, c: Complex64) {
        let idx = self.grid.index(self.grid.bin(k1), self.grid.bin(k2));
        self.coeffs[idx] = c;
    }

    /// Inverse transform.  The imaginary residue must stay below
    /// `1e-12 * ||f||_2`; it is discarded after the check.
    pub fn to_physical(&self) -> Result<PhysicalField> {
        let n = self.grid.n();
        let mut buf = self.coeffs.clone();
        fft::inverse2(&mut buf, n);
        let residue = buf.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
        let tol = SYMMETRY_TOL_REL * self.l2_norm();
        if residue > tol {
            return Err(Error::BrokenSymmetry { residue, tol });
        }
        let values = buf.iter().map(|c| c.re).collect();
        Ok(PhysicalField { grid: self.grid, values })
    }

    /// Zero every mode with `max(|k1|, |k2|)` beyond the 2/3-rule cutoff.
    /// Idempotent.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for (idx, k1, k2) in grid.modes() {
            if !grid.retained(k1, k2) {
                self.coeffs[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn is_dealiased(&self) -> bool {
        self.grid
            .modes()
            .all(|(idx, k1, k2)| self.grid.retained(k1, k2) || self.coeffs[idx].norm() == 0.0)
    }

    /// L^2 norm via Parseval: `2pi * sqrt(sum |c(k)|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        2.0 * PI * s.sqrt()
    }

    /// Homogeneous Sobolev seminorm `|| |k|^s f ||_2`, computed spectrally.
    pub fn sobolev_seminorm(&self, s: f64) -> f64 {
        let mut sum = 0.0;
        for (idx, k1, k2) in self.grid.modes() {
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2 > 0.0 {
                sum += r2.powf(s) * self.coeffs[idx].norm_sqr();
            }
        }
        2.0 * PI * sum.sqrt()
    }

    /// Apply a real radial multiplier `m(|k|^2)`; the zero mode stays zero.
    pub(crate) fn radial_multiplier(&self, m: impl Fn(f64) -> f64) -> SpectralField {
        let mut out = self.clone();
        for (idx, k1, k2) in self.grid.modes() {
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2 == 0.0 {
                out.coeffs[idx] = Complex64::new(0.0, 0.0);
            } else {
                out.coeffs[idx] *= m(r2);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    pub fn all_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max over mode pairs of `|c(-k) - conj(c(k))|`; diagnostic only, the
    /// constructors keep this exactly zero.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for m1 in 0..n {
            for m2 in 0..n {
                let a = self.coeffs[m1 * n + m2];
                let b = self.coeffs[((n - m1) % n) * n + (n - m2) % n];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }
}

/// Enforce `c(-k) = conj(c(k))` exactly by averaging conjugate pairs.
pub(crate) fn hermitian_symmetrize(buf: &mut [Complex64], n: usize) {
    for m1 in 0..n {
        for m2 in 0..n {
            let a = m1 * n + m2;
            let b = ((n - m1) % n) * n + (n - m2) % n;
            if a < b {
                let c = 0.5 * (buf[a] + buf[b].conj());
                buf[a] = c;
                buf[b] = c.conj();
            } else if a == b {
                buf[a].im = 0.0;
            }
        }
    }
}

/// Forward transform for interior products: no mean admissibility check (the
/// mean of a transport term vanishes analytically, so it is zeroed outright)
/// and the same exact symmetrization as `to_spectral`.
pub(crate) fn product_to_spectral(grid: Grid2D, values: &[f64]) -> SpectralField {
    debug_assert_eq!(values.len(), grid.len());
    let n = grid.n();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward2(&mut buf, n);
    let scale = 1.0 / (n * n) as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    buf[0] = Complex64::new(0.0, 0.0);
    hermitian_symmetrize(&mut buf, n);
    SpectralField { grid, coeffs: buf }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.grid, rhs.grid, "field arithmetic requires matching grids");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "field arithmetic requires matching grids");
        let coeffs = self
            .coeffs
            .iter()
            .zip(rhs.coeffs.iter())
            .map(|(a, b)| a - b)
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n).unwrap()
    }

    #[test]
    fn cosine_transforms_to_half_amplitude_pair() {
        let f = PhysicalField::from_fn(grid(32), |x1, _| x1.cos());
        let c = f.to_spectral().unwrap();
        assert_relative_eq!(c.coeff(1, 0).re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(c.coeff(-1, 0).re, 0.5, max_relative = 1e-14);
        assert!(c.coeff(1, 0).im.abs() < 1e-15);
        // every other coefficient is at round-off level
        let mut rest = 0.0f64;
        for (idx, k1, k2) in c.grid().modes() {
            if (k1.abs(), k2) != (1, 0) {
                rest = rest.max(c.coeffs()[idx].norm());
            }
        }
        assert!(rest < 1e-15, "residual spectrum {rest:.3e}");
    }

    #[test]
    fn zero_field_is_admissible_and_stays_zero() {
        let f = PhysicalField::zeros(grid(16));
        let c = f.to_spectral().unwrap();
        assert_eq!(c.max_coeff_norm(), 0.0);
        let back = c.to_physical().unwrap();
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_offset_is_rejected() {
        let f = PhysicalField::from_fn(grid(16), |x1, _| x1.cos() + 0.5);
        match f.to_spectral() {
            Err(Error::NonZeroMean { mean, .. }) => assert_relative_eq!(mean, 0.5, max_relative = 1e-12),
            other => panic!("expected NonZeroMean, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_exact_to_machine_precision() {
        // the mean-free part of an arbitrary smooth sample survives the
        // round trip to ~1e-15 relative
        let f = PhysicalField::from_fn(grid(64), |x1, x2| {
            (x1.sin() * (2.0 * x2).cos()) + 0.3 * (3.0 * x1 + x2).sin()
        });
        let c = f.to_spectral().unwrap();
        let back = c.to_physical().unwrap();
        let scale = f.lp_norm(f64::INFINITY);
        let worst = f
            .values()
            .iter()
            .zip(back.values())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(worst < 1e-12 * scale, "round trip error {worst:.3e}");
    }

    #[test]
    fn parseval_ties_the_two_l2_norms_together() {
        let f = PhysicalField::from_fn(grid(32), |x1, x2| {
            x1.sin() + 0.5 * (2.0 * (x1 + x2)).cos() - 0.25 * (3.0 * x2).sin()
        });
        let c = f.to_spectral().unwrap();
        assert_relative_eq!(f.lp_norm(2.0), c.l2_norm(), max_relative = 1e-13);
    }

    #[test]
    fn l2_norm_of_cosine_is_sqrt_two_pi_squared() {
        let f = PhysicalField::from_fn(grid(32), |x1, _| x1.cos());
        assert_relative_eq!(f.lp_norm(2.0), (2.0 * PI * PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(f.lp_norm(f64::INFINITY), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn lp_norm_quadrature_is_exact_for_even_p_and_converges_for_odd_p() {
        // |f|^4 = f^4 of a degree-10 field is band-limited below degree
        // n - 1 for every grid used here, so the rectangle rule integrates
        // it exactly and coarse and refined grids agree to round-off.  For
        // p = 1 and p = 3 the integrand |f|^p has kinks along the zero set
        // of f, quadrature is only algebraically accurate, and the honest
        // statement is convergence under refinement, not agreement.
        let sample = |x1: f64, x2: f64| {
            let mut v = 0.0;
            for k in 1..=5i32 {
                let a = (k as f64).powi(-4);
                v += a * ((k as f64) * x1 + 0.7 * k as f64).cos();
                v += a * ((k as f64) * (x1 + x2) + 0.3).sin();
            }
            v
        };
        let norms = |n: usize| {
            let f = PhysicalField::from_fn(grid(n), sample);
            [f.lp_norm(1.0), f.lp_norm(3.0), f.lp_norm(4.0), f.lp_norm(f64::INFINITY)]
        };
        let coarse = norms(32);
        let mid = norms(64);
        let fine = norms(256);

        assert!(
            (coarse[2] - fine[2]).abs() <= 1e-12 * fine[2],
            "p = 4 must be grid-exact: {:.12e} vs {:.12e}",
            coarse[2],
            fine[2]
        );
        for (i, p) in [(0usize, 1.0), (1, 3.0)] {
            let e32 = (coarse[i] - fine[i]).abs();
            let e64 = (mid[i] - fine[i]).abs();
            println!("p = {p}: refinement errors {e32:.3e} -> {e64:.3e}");
            assert!(e64 <= 5e-4 * fine[i], "p = {p}: error {e64:.3e} too large at n = 64");
            if e32 > 1e-12 * fine[i] {
                assert!(e64 < 0.5 * e32, "p = {p}: no decay under refinement");
            }
        }
        // sup norm on the finer grid can only go up
        assert!(coarse[3] <= fine[3] + 1e-15);
    }

    #[test]
    fn dealias_zeroes_exactly_the_far_modes_and_is_idempotent() {
        let g = grid(24); // cutoff 8
        let mut c = SpectralField::zeros(g);
        c.set_coeff(8, 0, Complex64::new(1.0, 0.0));
        c.set_coeff(-8, 0, Complex64::new(1.0, 0.0));
        c.set_coeff(9, 0, Complex64::new(1.0, 0.0));
        c.set_coeff(-9, 0, Complex64::new(1.0, 0.0));
        c.set_coeff(5, -9, Complex64::new(0.0, 1.0));
        c.set_coeff(-5, 9, Complex64::new(0.0, -1.0));
        let d = c.dealias();
        assert_eq!(d.coeff(8, 0).re, 1.0);
        assert_eq!(d.coeff(9, 0).norm(), 0.0);
        assert_eq!(d.coeff(5, -9).norm(), 0.0);
        assert_eq!(&d.dealias(), &d);
        assert!(d.is_dealiased());
    }

    #[test]
    fn symmetrization_makes_hermitian_defect_exactly_zero() {
        let f = PhysicalField::from_fn(grid(16), |x1, x2| (x1 + 2.0 * x2).sin());
        let c = f.to_spectral().unwrap();
        assert_eq!(c.hermitian_defect(), 0.0);
    }
}
