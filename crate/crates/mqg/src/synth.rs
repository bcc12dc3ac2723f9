//! Deterministic initial-data constructors.
//!
//! Random-looking phases come from a per-mode splitmix64 hash of
//! `(seed, k1, k2)` rather than a sequential generator, so a given seed
//! assigns the same coefficient to the same wavevector on every grid size —
//! refinement studies then compare runs that share their initial modes
//! exactly.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid2D;
use crate::littlewood_paley::sharp_shell_contains;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mode_hash(seed: u64, k1: i64, k2: i64) -> u64 {
    let a = splitmix64(splitmix64(seed) ^ (k1 as u64));
    splitmix64(a ^ (k2 as u64))
}

/// Uniform phase in `[0, 2pi)` derived from the top 53 bits of the hash.
fn mode_phase(seed: u64, k1: i64, k2: i64) -> f64 {
    let u = (mode_hash(seed, k1, k2) >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * PI * u
}

/// One representative per conjugate pair: the open right half plane plus
/// the positive `k2` axis.
fn canonical(k1: i64, k2: i64) -> bool {
    k1 > 0 || (k1 == 0 && k2 > 0)
}

fn require_resolved(grid: Grid2D, k1: i64, k2: i64) -> Result<()> {
    if (k1, k2) == (0, 0) || !grid.retained(k1, k2) {
        return Err(Error::InvalidMode { k1, k2, cutoff: grid.dealias_cutoff() });
    }
    Ok(())
}

/// `amp * cos(k . x)`: the conjugate pair `+-k` with coefficient `amp / 2`.
pub fn single_mode(grid: Grid2D, k1: i64, k2: i64, amp: f64) -> Result<SpectralField> {
    require_resolved(grid, k1, k2)?;
    let mut f = SpectralField::zeros(grid);
    let half = Complex64::new(0.5 * amp, 0.0);
    f.set_coeff(k1, k2, half);
    f.set_coeff(-k1, -k2, half);
    Ok(f)
}

/// Superposition of two cosine modes.
pub fn two_mode(
    grid: Grid2D,
    (a1, a2, amp_a): (i64, i64, f64),
    (b1, b2, amp_b): (i64, i64, f64),
) -> Result<SpectralField> {
    let first = single_mode(grid, a1, a2, amp_a)?;
    let second = single_mode(grid, b1, b2, amp_b)?;
    Ok(&first + &second)
}

/// Power-law spectrum with hashed phases: every resolved `k != 0` carries
/// `|c(k)| = amp * |k|^{-decay}`, with the phase drawn from
/// `(seed, k1, k2)`.  Conjugate pairs are written explicitly, so the
/// symmetry is bit-exact.
pub fn randomized_power_field(grid: Grid2D, decay: f64, seed: u64, amp: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for (_, k1, k2) in grid.modes() {
        if !canonical(k1, k2) || !grid.retained(k1, k2) {
            continue;
        }
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let mag = amp * r.powf(-decay);
        let phi = mode_phase(seed, k1, k2);
        let c = Complex64::new(mag * phi.cos(), mag * phi.sin());
        f.set_coeff(k1, k2, c);
        f.set_coeff(-k1, -k2, c.conj());
    }
    f
}

/// Power-law spectrum with all coefficients real and positive.  The phases
/// all align at the origin, so the field peaks there with
/// `f(0) = sum_k amp |k|^{-decay}` — the sharpest field the spectrum
/// allows, which is the right probe when a norm is meant to detect peaking
/// rather than be fooled by phase cancellation.
pub fn aligned_power_field(grid: Grid2D, decay: f64, amp: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for (idx, k1, k2) in grid.modes() {
        if (k1, k2) == (0, 0) || !grid.retained(k1, k2) {
            continue;
        }
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        f.coeffs_mut()[idx] = Complex64::new(amp * r.powf(-decay), 0.0);
    }
    f
}

/// Hashed-phase field with unit-magnitude coefficients on one dyadic shell.
pub fn shell_field(grid: Grid2D, j: i32, seed: u64, amp: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    let mut populated = false;
    for (_, k1, k2) in grid.modes() {
        if !canonical(k1, k2) || !grid.retained(k1, k2) || !sharp_shell_contains(j, k1, k2) {
            continue;
        }
        let phi = mode_phase(seed, k1, k2);
        let c = Complex64::new(amp * phi.cos(), amp * phi.sin());
        f.set_coeff(k1, k2, c);
        f.set_coeff(-k1, -k2, c.conj());
        populated = true;
    }
    if !populated {
        return Err(Error::DegenerateField);
    }
    Ok(f)
}
