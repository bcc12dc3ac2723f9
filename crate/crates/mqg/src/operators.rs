//! Fourier-multiplier operators and the pseudo-spectral transport term.

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{product_to_spectral, PhysicalField, SpectralField};

/// `i * m * c` for real `m`: rotation by i is exact in floating point, so
/// this preserves bit-exact conjugate symmetry of multiplier outputs.
#[inline]
fn mul_i_scale(c: Complex64, m: f64) -> Complex64 {
    Complex64::new(-m * c.im, m * c.re)
}

/// Fractional Laplacian `|k|^s` acting spectrally; the zero mode maps to 0
/// for every `s`, which embeds the inverse operators (`s < 0`) on mean-free
/// fields.  `s` is restricted to `[-2, 2]`, the range the solver exercises.
pub fn fractional_laplacian(f: &SpectralField, s: f64) -> SpectralField {
    assert!((-2.0..=2.0).contains(&s), "fractional Laplacian exponent {s} outside [-2, 2]");
    f.radial_multiplier(|r2| r2.powf(0.5 * s))
}

/// Spectral gradient `(d/dx1 f, d/dx2 f)`.
pub fn gradient(f: &SpectralField) -> [SpectralField; 2] {
    let grid = f.grid();
    let mut g1 = f.clone();
    let mut g2 = f.clone();
    {
        let (c1, c2) = (g1.coeffs_mut(), g2.coeffs_mut());
        for (idx, k1, k2) in grid.modes() {
            let c = c1[idx];
            c1[idx] = mul_i_scale(c, k1 as f64);
            c2[idx] = mul_i_scale(c, k2 as f64);
        }
    }
    [g1, g2]
}

/// Divergence-free velocity on spectral components.
#[derive(Debug, Clone)]
pub struct VelocityField {
    u1: SpectralField,
    u2: SpectralField,
}

impl VelocityField {
    pub fn from_components(u1: SpectralField, u2: SpectralField) -> Self {
        assert_eq!(u1.grid(), u2.grid(), "velocity components on different grids");
        VelocityField { u1, u2 }
    }

    #[inline]
    pub fn u1(&self) -> &SpectralField {
        &self.u1
    }

    #[inline]
    pub fn u2(&self) -> &SpectralField {
        &self.u2
    }

    pub fn to_physical(&self) -> Result<(PhysicalField, PhysicalField)> {
        Ok((self.u1.to_physical()?, self.u2.to_physical()?))
    }

    /// Grid maximum of the speed `|u(x)|`.
    pub fn max_speed(&self) -> Result<f64> {
        let (p1, p2) = self.to_physical()?;
        let mut m = 0.0f64;
        for (a, b) in p1.values().iter().zip(p2.values()) {
            m = m.max(a.hypot(*b));
        }
        Ok(m)
    }

    /// Largest coefficient magnitude of `div u = i(k1 u1 + k2 u2)`; the
    /// constitutive-law velocities keep this at round-off.
    pub fn divergence_sup(&self) -> f64 {
        let grid = self.u1.grid();
        let (c1, c2) = (self.u1.coeffs(), self.u2.coeffs());
        let mut worst = 0.0f64;
        for (idx, k1, k2) in grid.modes() {
            let d = (k1 as f64) * c1[idx] + (k2 as f64) * c2[idx];
            worst = worst.max(d.norm());
        }
        worst
    }
}

/// Velocity law `u = Lambda^{alpha-1} R_perp theta`, i.e.
/// `u_hat(k) = i |k|^{alpha-2} (-k2, k1) theta_hat(k)`.
///
/// At `alpha = 1` this is the perpendicular Riesz transform, and at every
/// `alpha` the Fourier symbol is orthogonal to `k`, so the field is
/// divergence-free by construction.
pub fn velocity(theta: &SpectralField, alpha: f64) -> VelocityField {
    let grid = theta.grid();
    let mut u1 = theta.clone();
    let mut u2 = theta.clone();
    {
        let (c1, c2) = (u1.coeffs_mut(), u2.coeffs_mut());
        for (idx, k1, k2) in grid.modes() {
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2 == 0.0 {
                c1[idx] = Complex64::new(0.0, 0.0);
                c2[idx] = Complex64::new(0.0, 0.0);
                continue;
            }
            let m = r2.powf(0.5 * (alpha - 2.0));
            let c = c1[idx];
            c1[idx] = mul_i_scale(c, -(k2 as f64) * m);
            c2[idx] = mul_i_scale(c, (k1 as f64) * m);
        }
    }
    VelocityField { u1, u2 }
}

/// Perpendicular Riesz transform `R_perp theta = Lambda^{-1}(-d2 theta, d1 theta)`.
pub fn riesz_perp(theta: &SpectralField) -> VelocityField {
    velocity(theta, 1.0)
}

/// Pseudo-spectral transport term `u . grad theta`: inputs are truncated to
/// the resolved band, multiplied on the collocation grid, and the product
/// is truncated again by the 2/3 rule.  On the retained band the result
/// equals the exact convolution (no aliased image of a retained-band
/// product lands back inside the band), and the spatial mean — which
/// vanishes identically for divergence-free `u` — is zeroed outright rather
/// than round-trip checked.
pub fn advect(u: &VelocityField, theta: &SpectralField) -> Result<SpectralField> {
    let grid = theta.grid();
    assert_eq!(u.u1.grid(), grid, "velocity and scalar on different grids");
    let u1 = u.u1.dealias().to_physical()?;
    let u2 = u.u2.dealias().to_physical()?;
    let [g1, g2] = gradient(&theta.dealias());
    let g1 = g1.to_physical()?;
    let g2 = g2.to_physical()?;
    let mut prod = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        prod.push(u1.values()[i] * g1.values()[i] + u2.values()[i] * g2.values()[i]);
    }
    let mut out = product_to_spectral(grid, &prod);
    out.dealias_in_place();
    Ok(out)
}

/// Transport term of the equation itself: `u . grad theta` with the
/// constitutive velocity `u = Lambda^{alpha-1} R_perp theta`.
pub fn self_advection(theta: &SpectralField, alpha: f64) -> Result<SpectralField> {
    advect(&velocity(theta, alpha), theta)
}

/// Pairing `integral (u . grad f) |w|^{p-2} w dx` by the rectangle rule,
/// with no spectral truncation of the integrand.
pub fn advection_pairing(
    u: &VelocityField,
    f: &SpectralField,
    w: &SpectralField,
    p: f64,
) -> Result<f64> {
    assert!((2.0..).contains(&p) && p.is_finite(), "pairing defined for finite p >= 2");
    let grid = f.grid();
    assert_eq!(u.u1.grid(), grid, "velocity and scalar on different grids");
    assert_eq!(w.grid(), grid, "weight field on a different grid");
    let (u1, u2) = u.to_physical()?;
    let [f1, f2] = gradient(f);
    let f1 = f1.to_physical()?;
    let f2 = f2.to_physical()?;
    let wp = w.to_physical()?;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let wv = wp.values()[i];
        let weight = if p == 2.0 { wv } else { wv.abs().powf(p - 2.0) * wv };
        acc += (u1.values()[i] * f1.values()[i] + u2.values()[i] * f2.values()[i]) * weight;
    }
    Ok(acc * grid.cell_area())
}

/// `integral (u . grad g) |g|^{p-2} g dx`.  For divergence-free `u` and
/// `p = 2` the integrand is `(1/2) u . grad(g^2)`, whose integral vanishes
/// identically; on power-of-two grids the rectangle rule is exact for the
/// cubic integrand (its trigonometric degree stays below `n`), so the
/// computed value sits at round-off.
pub fn transport_pairing(u: &VelocityField, g: &SpectralField, p: f64) -> Result<f64> {
    advection_pairing(u, g, g, p)
}
