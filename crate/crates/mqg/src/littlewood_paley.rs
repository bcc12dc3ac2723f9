//! Dyadic frequency decomposition: shell filters, block operators, Besov
//! and Hoelder-type norms, paraproduct splitting of the transport term, the
//! block commutator, and the shell dissipation functional.
//!
//! Shell `j >= 0` collects the wavevectors with `2^{j-1} < |k| <= 2^j`
//! (half-open annuli, so the shells tile the lattice exactly).  The `Sharp`
//! profile uses the indicator of that annulus; the `Smooth` profile uses a
//! C-infinity radial cutoff whose shells overlap their neighbours but still
//! sum to one on every resolved mode.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid2D;
use crate::operators::{advect, fractional_laplacian, VelocityField};

/// Membership of `(k1, k2)` in the half-open dyadic annulus of index `j`.
/// Integer arithmetic, so the boundary `|k| = 2^j` is classified exactly.
pub fn sharp_shell_contains(j: i32, k1: i64, k2: i64) -> bool {
    if j < 0 {
        return false;
    }
    let r2 = k1 * k1 + k2 * k2;
    let upper = 1i64 << (2 * j); // 4^j
    let lower = if j == 0 { 0 } else { 1i64 << (2 * (j - 1)) };
    r2 > lower && r2 <= upper
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterProfile {
    Sharp,
    Smooth,
}

impl FilterProfile {
    pub fn parse(s: &str) -> Option<FilterProfile> {
        match s {
            "sharp" => Some(FilterProfile::Sharp),
            "smooth" => Some(FilterProfile::Smooth),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterProfile::Sharp => "sharp",
            FilterProfile::Smooth => "smooth",
        }
    }
}

/// Besov space indices `(s, p, q)`: regularity, integrability, summability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        assert!(s.is_finite(), "besov regularity must be finite");
        assert!(p >= 1.0 && q >= 1.0, "besov indices need p, q >= 1");
        BesovIndex { s, p, q }
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, strictly increasing
/// between, and exactly 0/1 at the branch points.
fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Radial cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`, smooth in between.
fn chi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        1.0 - smooth_step(s - 1.0)
    }
}

/// Precomputed shell filters for one grid.
///
/// The bank is built for the retained (dealiased) band: every mode up to
/// the two-thirds cutoff falls in exactly one sharp shell, and `j_max` is
/// chosen so the top shell reaches the retained square's corners.  Content
/// beyond the cutoff is not guaranteed to be covered; dealias first.
pub struct DyadicFilterBank {
    grid: Grid2D,
    profile: FilterProfile,
    j_max: i32,
    masks: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

impl DyadicFilterBank {
    /// Shell index that covers the largest resolved modulus:
    /// `j_max = ceil(log2(cutoff)) + 1`, so `2^{j_max}` dominates even the
    /// corner modes `|k| = sqrt(2) * cutoff` of the retained square.
    pub fn top_shell(grid: Grid2D) -> i32 {
        let c = grid.dealias_cutoff() as u64;
        (c.next_power_of_two().trailing_zeros() + 1) as i32
    }

    pub fn new(grid: Grid2D, profile: FilterProfile) -> Self {
        let j_max = Self::top_shell(grid);
        let mut masks = Vec::with_capacity((j_max + 1) as usize);
        for j in 0..=j_max {
            let mut m = vec![0.0f64; grid.len()];
            for (idx, k1, k2) in grid.modes() {
                m[idx] = match profile {
                    FilterProfile::Sharp => {
                        if sharp_shell_contains(j, k1, k2) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    FilterProfile::Smooth => {
                        let r2 = (k1 * k1 + k2 * k2) as f64;
                        if r2 == 0.0 {
                            0.0
                        } else {
                            let r = r2.sqrt();
                            let scale_j = (1i64 << j) as f64;
                            // shell j-1 scale; j = 0 pairs with chi(2r)
                            let scale_lo = if j == 0 { 0.5 } else { (1i64 << (j - 1)) as f64 };
                            chi(r / scale_j) - chi(r / scale_lo)
                        }
                    }
                };
            }
            masks.push(m);
        }
        let mut cumulative: Vec<Vec<f64>> = Vec::with_capacity(masks.len());
        for (j, m) in masks.iter().enumerate() {
            let mut c = if j == 0 { vec![0.0; grid.len()] } else { cumulative[j - 1].clone() };
            for (ci, mi) in c.iter_mut().zip(m.iter()) {
                *ci += mi;
            }
            cumulative.push(c);
        }
        DyadicFilterBank { grid, profile, j_max, masks, cumulative }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn profile(&self) -> FilterProfile {
        self.profile
    }

    /// Largest shell index in the bank (inclusive); shells run `0..=j_max`.
    #[inline]
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    fn apply_mask(&self, f: &SpectralField, mask: &[f64]) -> SpectralField {
        let mut out = f.clone();
        for (c, &m) in out.coeffs_mut().iter_mut().zip(mask.iter()) {
            *c *= m;
        }
        out
    }

    /// Dyadic block `Delta_j f`, realized as the shell-`j` Fourier
    /// multiplier.
    pub fn dyadic_block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if !(0..=self.j_max).contains(&j) {
            return Err(Error::JOutOfRange { j, j_min: 0, j_max: self.j_max });
        }
        assert_eq!(f.grid(), self.grid, "field and filter bank on different grids");
        Ok(self.apply_mask(f, &self.masks[j as usize]))
    }

    /// Exclusive low-pass `S_j f = sum_{m < j} Delta_m f`, defined for
    /// `j` in `[0, j_max + 1]`: `S_0 = 0` and `S_{j_max+1}` is the identity
    /// on resolved mean-free fields.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if !(0..=self.j_max + 1).contains(&j) {
            return Err(Error::JOutOfRange { j, j_min: 0, j_max: self.j_max + 1 });
        }
        Ok(self.low_pass_clamped(f, j))
    }

    /// `S_j` extended to every integer: empty below the bank, saturated
    /// above it.  Paraproduct windows index below zero freely; those terms
    /// are simply zero.
    fn low_pass_clamped(&self, f: &SpectralField, j: i32) -> SpectralField {
        assert_eq!(f.grid(), self.grid, "field and filter bank on different grids");
        if j <= 0 {
            return SpectralField::zeros(self.grid);
        }
        let top = (j - 1).min(self.j_max) as usize;
        self.apply_mask(f, &self.cumulative[top])
    }

    fn low_pass_velocity(&self, u: &VelocityField, j: i32) -> VelocityField {
        VelocityField::from_components(
            self.low_pass_clamped(u.u1(), j),
            self.low_pass_clamped(u.u2(), j),
        )
    }

    fn block_velocity(&self, u: &VelocityField, j: i32) -> Result<VelocityField> {
        Ok(VelocityField::from_components(
            self.dyadic_block(u.u1(), j)?,
            self.dyadic_block(u.u2(), j)?,
        ))
    }

    /// `||Delta_j f||_p` for every shell.  `p = 2` is evaluated spectrally
    /// (the rectangle rule and Parseval agree exactly on the grid); other
    /// `p` go through collocation space.
    pub fn block_norms(&self, f: &SpectralField, p: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity((self.j_max + 1) as usize);
        if p == 2.0 {
            for mask in &self.masks {
                let mut s = 0.0;
                for (c, &m) in f.coeffs().iter().zip(mask.iter()) {
                    s += (m * m) * c.norm_sqr();
                }
                out.push(2.0 * PI * s.sqrt());
            }
        } else {
            for j in 0..=self.j_max {
                out.push(self.dyadic_block(f, j)?.to_physical()?.lp_norm(p));
            }
        }
        Ok(out)
    }

    /// Besov seminorm `( sum_j (2^{js} ||Delta_j f||_p)^q )^{1/q}`, with the
    /// usual supremum convention at `q = inf`.
    pub fn besov_norm(&self, f: &SpectralField, idx: BesovIndex) -> Result<f64> {
        let norms = self.block_norms(f, idx.p)?;
        if idx.q.is_infinite() {
            let mut sup = 0.0f64;
            for (j, nj) in norms.iter().enumerate() {
                sup = sup.max(2f64.powf(idx.s * j as f64) * nj);
            }
            Ok(sup)
        } else {
            let mut acc = 0.0f64;
            for (j, nj) in norms.iter().enumerate() {
                acc += (2f64.powf(idx.s * j as f64) * nj).powf(idx.q);
            }
            Ok(acc.powf(1.0 / idx.q))
        }
    }

    /// Hoelder-type norm `||f||_inf + sup_j 2^{j delta} ||Delta_j f||_inf`,
    /// the grid-computable surrogate for the C^delta norm.
    pub fn holder_norm(&self, f: &SpectralField, delta: f64) -> Result<f64> {
        assert!((0.0..1.0).contains(&delta), "holder exponent {delta} outside [0, 1)");
        let sup = f.to_physical()?.lp_norm(f64::INFINITY);
        Ok(sup + self.besov_norm(f, BesovIndex::new(delta, f64::INFINITY, f64::INFINITY))?)
    }

    /// Paraproduct pieces of shell `j` of the transport term:
    ///
    /// * `t1`: sum over `|k-j| <= 2` of `Delta_j(S_{k-1}u . grad Delta_k theta)`
    /// * `t2`: sum over `|k-j| <= 2` of `Delta_j(Delta_k u . grad S_{k-1} theta)`
    /// * `t3`: sum over `k >= j-2`, `|l-k| <= 1` of `Delta_j(Delta_k u . grad Delta_l theta)`
    ///
    /// The `t3` window starts two shells below `j`, not one: a mode pair
    /// from shells `j-2` and `j-1` can sum into shell `j` (e.g. (2,0) and
    /// (2,3) land on (4,3), modulus 5), and the high-high class is the only
    /// one that covers such pairs.  With sharp shells the three pieces then
    /// reconstruct `Delta_j(u . grad theta)` exactly; the smooth profile's
    /// overlapping tails leak across these windows, so exactness claims are
    /// made for `Sharp` only.
    pub fn bony_terms(
        &self,
        u: &VelocityField,
        theta: &SpectralField,
        j: i32,
    ) -> Result<BonyTerms> {
        if !(0..=self.j_max).contains(&j) {
            return Err(Error::JOutOfRange { j, j_min: 0, j_max: self.j_max });
        }
        let mut t1 = SpectralField::zeros(self.grid);
        let mut t2 = SpectralField::zeros(self.grid);
        let mut t3 = SpectralField::zeros(self.grid);

        for k in (j - 2)..=(j + 2) {
            if !(0..=self.j_max).contains(&k) || k < 2 {
                // k < 2 leaves no room below: S_{k-1} is empty
                continue;
            }
            let su = self.low_pass_velocity(u, k - 1);
            let dk = self.dyadic_block(theta, k)?;
            t1 += &self.dyadic_block(&advect(&su, &dk)?, j)?;

            let du = self.block_velocity(u, k)?;
            let sk = self.low_pass_clamped(theta, k - 1);
            t2 += &self.dyadic_block(&advect(&du, &sk)?, j)?;
        }

        for k in (j - 2).max(0)..=self.j_max {
            let du = self.block_velocity(u, k)?;
            let mut tilde = SpectralField::zeros(self.grid);
            for l in (k - 1).max(0)..=(k + 1).min(self.j_max) {
                tilde += &self.dyadic_block(theta, l)?;
            }
            t3 += &self.dyadic_block(&advect(&du, &tilde)?, j)?;
        }

        Ok(BonyTerms { t1, t2, t3 })
    }

    /// Block commutator `[Delta_j, S_{k-1}u . grad] Delta_k theta
    ///   = Delta_j(S_{k-1}u . grad Delta_k theta)
    ///     - S_{k-1}u . grad (Delta_j Delta_k theta)`,
    /// defined for the shell pairs `|j-k| <= 2` that the paraproduct
    /// windows produce.
    pub fn commutator_term(
        &self,
        u: &VelocityField,
        theta: &SpectralField,
        j: i32,
        k: i32,
    ) -> Result<SpectralField> {
        if (j - k).abs() > 2 {
            return Err(Error::BadShellPair { j, k });
        }
        let su = self.low_pass_velocity(u, k - 1);
        let dk = self.dyadic_block(theta, k)?;
        let first = self.dyadic_block(&advect(&su, &dk)?, j)?;
        let second = advect(&su, &self.dyadic_block(&dk, j)?)?;
        Ok(&first - &second)
    }

    /// Shell dissipation functional:
    /// `lhs      = integral |Delta_j f|^{p-2} (Delta_j f) (Lambda^alpha Delta_j f) dx`,
    /// `rhs_unit = 2^{alpha j} ||Delta_j f||_p^p`,
    /// `ratio    = lhs / rhs_unit` (0 when the block is empty).
    ///
    /// At `p = 2`, Parseval turns `lhs` into `sum |k|^alpha |c(k)|^2` over
    /// the shell, where `|k|^alpha > 2^{alpha(j-1)}`; hence
    /// `ratio >= 2^{-alpha}` whenever the block is nonzero.
    pub fn bernstein_functional(
        &self,
        f: &SpectralField,
        j: i32,
        p: f64,
        alpha: f64,
    ) -> Result<BernsteinFunctional> {
        assert!((2.0..).contains(&p) && p.is_finite(), "functional defined for finite p >= 2");
        assert!(alpha > 0.0 && alpha < 2.0, "dissipation order {alpha} outside (0, 2)");
        let block = self.dyadic_block(f, j)?;
        let g = block.to_physical()?;
        let h = fractional_laplacian(&block, alpha).to_physical()?;
        let cell = self.grid.cell_area();
        let mut lhs = 0.0;
        let mut pp = 0.0;
        for (&gv, &hv) in g.values().iter().zip(h.values()) {
            let w = if p == 2.0 { gv } else { gv.abs().powf(p - 2.0) * gv };
            lhs += w * hv;
            pp += gv.abs().powf(p);
        }
        lhs *= cell;
        pp *= cell;
        let rhs_unit = 2f64.powf(alpha * j as f64) * pp;
        let ratio = if rhs_unit == 0.0 { 0.0 } else { lhs / rhs_unit };
        Ok(BernsteinFunctional { lhs, rhs_unit, ratio })
    }
}

/// The three windowed paraproduct pieces of `Delta_j(u . grad theta)`:
/// low-high, high-low, and the high-high remainder.
pub struct BonyTerms {
    pub t1: SpectralField,
    pub t2: SpectralField,
    pub t3: SpectralField,
}

impl BonyTerms {
    pub fn total(&self) -> SpectralField {
        &(&self.t1 + &self.t2) + &self.t3
    }
}

/// Result of `bernstein_functional`.
#[derive(Debug, Clone, Copy)]
pub struct BernsteinFunctional {
    pub lhs: f64,
    pub rhs_unit: f64,
    pub ratio: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use crate::operators::{gradient, riesz_perp, velocity};
    use approx::assert_relative_eq;
    use rustfft::num_complex::Complex64;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n).unwrap()
    }

    fn multiscale_field(g: Grid2D) -> SpectralField {
        // dealiased: the filter banks are built for the retained band
        PhysicalField::from_fn(g, |x1, x2| {
            x1.sin() + 0.8 * (3.0 * x2 + 0.4).cos() + 0.5 * (5.0 * x1 - 2.0 * x2).sin()
                + 0.25 * (9.0 * x1 + 7.0 * x2 + 1.0).cos()
                + 0.1 * (13.0 * x2 - 4.0 * x1).sin()
        })
        .to_spectral()
        .unwrap()
        .dealias()
    }

    #[test]
    fn shell_membership_is_integer_exact_on_the_boundaries() {
        // |k| = 4 sits on the closed upper edge of shell 2, |k| = 5 strictly
        // inside shell 3
        assert!(sharp_shell_contains(2, 4, 0));
        assert!(!sharp_shell_contains(3, 4, 0));
        assert!(sharp_shell_contains(3, 3, 4));
        assert!(!sharp_shell_contains(2, 3, 4));
        assert!(sharp_shell_contains(0, 1, 0));
        assert!(sharp_shell_contains(0, 0, -1));
        assert!(!sharp_shell_contains(0, 0, 0));
        assert!(sharp_shell_contains(1, 1, 1));
    }

    #[test]
    fn top_shell_covers_the_corner_modes() {
        for n in [8, 16, 128, 256] {
            let g = grid(n);
            let j_max = DyadicFilterBank::top_shell(g);
            let c = g.dealias_cutoff() as i64;
            let corner2 = 2 * c * c;
            assert!(
                corner2 <= 1i64 << (2 * j_max),
                "n = {n}: corner modulus^2 {corner2} above 4^{j_max}"
            );
        }
        assert_eq!(DyadicFilterBank::top_shell(grid(128)), 7);
        assert_eq!(DyadicFilterBank::top_shell(grid(256)), 8);
    }

    #[test]
    fn sharp_blocks_tile_a_field_bit_for_bit() {
        let g = grid(32);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let mut sum = SpectralField::zeros(g);
        for j in 0..=bank.j_max() {
            sum += &bank.dyadic_block(&f, j).unwrap();
        }
        assert_eq!(sum.coeffs(), f.dealias().coeffs());
    }

    #[test]
    fn smooth_blocks_sum_to_one_on_resolved_modes() {
        let g = grid(32);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Smooth);
        let mut sum = SpectralField::zeros(g);
        for j in 0..=bank.j_max() {
            sum += &bank.dyadic_block(&f, j).unwrap();
        }
        let defect = (&sum - &f.dealias()).max_coeff_norm();
        assert!(defect < 1e-13, "partition defect {defect:.3e}");
    }

    #[test]
    fn smooth_shells_vanish_outside_the_doubled_annulus() {
        let g = grid(64);
        let bank = DyadicFilterBank::new(g, FilterProfile::Smooth);
        for j in 0..=bank.j_max() {
            let mask = &bank.masks[j as usize];
            for (idx, k1, k2) in g.modes() {
                let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
                let lo = 2f64.powi(j - 1);
                let hi = 2f64.powi(j + 1);
                if mask[idx] != 0.0 {
                    assert!(r > lo && r < hi, "shell {j} touches |k| = {r}");
                }
            }
        }
    }

    #[test]
    fn blocks_of_disjoint_shells_annihilate() {
        let g = grid(64);
        let f = multiscale_field(g);
        let sharp = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let smooth = DyadicFilterBank::new(g, FilterProfile::Smooth);
        for j in 0..=sharp.j_max() {
            for k in 0..=sharp.j_max() {
                if (j - k).abs() < 2 {
                    continue;
                }
                let a = sharp
                    .dyadic_block(&sharp.dyadic_block(&f, j).unwrap(), k)
                    .unwrap()
                    .l2_norm();
                assert_eq!(a, 0.0, "sharp {j}/{k}");
                let b = smooth
                    .dyadic_block(&smooth.dyadic_block(&f, j).unwrap(), k)
                    .unwrap()
                    .l2_norm();
                assert!(b <= 1e-12 * f.l2_norm(), "smooth {j}/{k}: {b:.3e}");
            }
        }
    }

    #[test]
    fn low_pass_telescopes_and_hits_both_extremes() {
        let g = grid(32);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        assert_eq!(bank.low_pass(&f, 0).unwrap().max_coeff_norm(), 0.0);
        assert_eq!(
            bank.low_pass(&f, bank.j_max() + 1).unwrap().coeffs(),
            f.dealias().coeffs()
        );
        assert!(bank.low_pass(&f, bank.j_max() + 2).is_err());
        assert!(bank.low_pass(&f, -1).is_err());
        for j in 0..=bank.j_max() {
            let diff = &bank.low_pass(&f, j + 1).unwrap() - &bank.low_pass(&f, j).unwrap();
            let defect = (&diff - &bank.dyadic_block(&f, j).unwrap()).max_coeff_norm();
            assert!(defect < 1e-15, "telescope defect at {j}: {defect:.3e}");
        }
        // S_2 keeps exactly the modes with |k| <= 2
        let s2 = bank.low_pass(&f, 2).unwrap();
        for (idx, k1, k2) in g.modes() {
            let keep = (1..=4).contains(&(k1 * k1 + k2 * k2));
            if !keep {
                assert_eq!(s2.coeffs()[idx].norm(), 0.0, "mode ({k1},{k2}) survived S_2");
            }
        }
    }

    #[test]
    fn besov_of_a_single_shell_field_reduces_to_a_weighted_block_norm() {
        let g = grid(32);
        let f = PhysicalField::from_fn(g, |x1, x2| (3.0 * x1 + 4.0 * x2).cos())
            .to_spectral()
            .unwrap();
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        // |k| = 5 lives in shell 3
        for (s, p, q) in [(0.7, 2.0, 2.0), (-0.3, f64::INFINITY, f64::INFINITY), (0.5, 2.0, 1.0)] {
            let b = bank.besov_norm(&f, BesovIndex::new(s, p, q)).unwrap();
            let expected = 2f64.powf(3.0 * s) * bank.block_norms(&f, p).unwrap()[3];
            assert_relative_eq!(b, expected, max_relative = 1e-13);
        }
        // the worked single-mode value: s = 1, p = q = inf gives 2^3
        let b = bank
            .besov_norm(&f, BesovIndex::new(1.0, f64::INFINITY, f64::INFINITY))
            .unwrap();
        assert_relative_eq!(b, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn besov_s0_p2_q2_is_parseval_under_sharp_shells() {
        let g = grid(32);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let b = bank.besov_norm(&f, BesovIndex::new(0.0, 2.0, 2.0)).unwrap();
        assert_relative_eq!(b, f.l2_norm(), max_relative = 1e-13);
    }

    #[test]
    fn holder_norm_of_unit_cosine_is_two() {
        let g = grid(32);
        let f = PhysicalField::from_fn(g, |x1, _| x1.cos()).to_spectral().unwrap();
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        assert_relative_eq!(bank.holder_norm(&f, 0.5).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn holder_norm_weights_the_shell_of_the_mode() {
        let g = grid(32);
        let amp = 1.75;
        let f = PhysicalField::from_fn(g, |x1, x2| amp * (3.0 * x1 + 4.0 * x2).cos())
            .to_spectral()
            .unwrap();
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let delta = 0.4;
        let expected = amp * (1.0 + 2f64.powf(3.0 * delta));
        assert_relative_eq!(bank.holder_norm(&f, delta).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn interpolation_bound_between_holder_and_energy_holds_per_block() {
        // 2^{d1 j} ||Delta_j f||_p <= holder(f, d)^{1-2/p} ||f||_2^{2/p}
        // with d1 = (1 - 2/p) d: discrete Hoelder interpolation plus the
        // fact that every mask value lies in [0, 1]
        let g = grid(64);
        let f = multiscale_field(g);
        for profile in [FilterProfile::Sharp, FilterProfile::Smooth] {
            let bank = DyadicFilterBank::new(g, profile);
            for (delta, p) in [(0.6, 4.0), (0.6, 20.0), (0.25, 8.0)] {
                let d1 = (1.0 - 2.0 / p) * delta;
                let rhs = bank.holder_norm(&f, delta).unwrap().powf(1.0 - 2.0 / p)
                    * f.l2_norm().powf(2.0 / p);
                let norms = bank.block_norms(&f, p).unwrap();
                for (j, nj) in norms.iter().enumerate() {
                    let lhs = 2f64.powf(d1 * j as f64) * nj;
                    assert!(
                        lhs <= rhs * (1.0 + 1e-12),
                        "{} p={p} delta={delta} shell {j}: {lhs} > {rhs}",
                        profile.name()
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_block_norms_scale_like_the_shell_frequency() {
        // upper Bernstein direction: || |grad Delta_j f| ||_p <= C 2^j ||Delta_j f||_p;
        // C is profile/grid dependent, so it is measured and pinned loosely
        let g = grid(64);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let mut c_max = 0.0f64;
        for p in [2.0, f64::INFINITY] {
            for j in 0..=bank.j_max() {
                let block = bank.dyadic_block(&f, j).unwrap();
                let base = block.to_physical().unwrap().lp_norm(p);
                if base == 0.0 {
                    continue;
                }
                let [g1, g2] = gradient(&block);
                let p1 = g1.to_physical().unwrap();
                let p2 = g2.to_physical().unwrap();
                let mag: Vec<f64> = p1
                    .values()
                    .iter()
                    .zip(p2.values())
                    .map(|(a, b)| a.hypot(*b))
                    .collect();
                let grad_norm =
                    PhysicalField::from_values(g, mag).unwrap().lp_norm(p);
                let c = grad_norm / (2f64.powi(j) * base);
                c_max = c_max.max(c);
            }
        }
        println!("bernstein upper constant over shells: {c_max:.4}");
        assert!(c_max.is_finite() && c_max > 0.0);
        assert!(c_max <= 1.5, "upper constant drifted: {c_max:.4}");
    }

    #[test]
    fn bony_terms_reassemble_the_transport_block_exactly() {
        let g = grid(48); // cutoff 16, shells 0..=5
        let theta = multiscale_field(g);
        let u = velocity(&theta, 0.7);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let full = advect(&u, &theta).unwrap();
        let scale = full.max_coeff_norm();
        for j in 0..=bank.j_max() {
            let parts = bank.bony_terms(&u, &theta, j).unwrap();
            let defect = (&parts.total() - &bank.dyadic_block(&full, j).unwrap()).max_coeff_norm();
            assert!(defect < 1e-13 * scale.max(1.0), "shell {j}: defect {defect:.3e}");
        }
    }

    #[test]
    fn remainder_window_must_reach_two_shells_below_the_target() {
        // theta on shell 2 (modes +-(2,3)), u from a stream function on
        // shell 1 (modes +-(2,0)); their interaction populates shell 3
        // (modes +-(4,3), modulus 5) and enters only through the remainder
        // term with k = j - 2 = 1.
        let g = grid(32);
        let mut psi = SpectralField::zeros(g);
        psi.set_coeff(2, 0, Complex64::new(0.3, 0.1));
        psi.set_coeff(-2, 0, Complex64::new(0.3, -0.1));
        let u = riesz_perp(&psi);
        let mut theta = SpectralField::zeros(g);
        theta.set_coeff(2, 3, Complex64::new(0.5, -0.2));
        theta.set_coeff(-2, -3, Complex64::new(0.5, 0.2));

        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let j = 3;
        let target = bank.dyadic_block(&advect(&u, &theta).unwrap(), j).unwrap();
        assert!(target.max_coeff_norm() > 1e-3, "interaction must populate shell 3");

        let parts = bank.bony_terms(&u, &theta, j).unwrap();
        let defect = (&parts.total() - &target).max_coeff_norm();
        assert!(defect < 1e-14, "windowed identity defect {defect:.3e}");
        // everything arrives via the remainder, and only via its k = 1 term
        assert!(parts.t1.max_coeff_norm() < 1e-14);
        assert!(parts.t2.max_coeff_norm() < 1e-14);
        let du = bank.block_velocity(&u, 1).unwrap();
        let mut tilde = SpectralField::zeros(g);
        for l in 0..=2 {
            tilde += &bank.dyadic_block(&theta, l).unwrap();
        }
        let k1_term = bank.dyadic_block(&advect(&du, &tilde).unwrap(), j).unwrap();
        let via_k1 = (&k1_term - &target).max_coeff_norm();
        assert!(via_k1 < 1e-14, "k = j-2 term alone must carry the shell: {via_k1:.3e}");
    }

    #[test]
    fn low_high_term_vanishes_when_theta_sits_in_a_distant_shell() {
        let g = grid(64);
        // theta: single mode in shell 3; u: full multiscale velocity
        let theta = PhysicalField::from_fn(g, |x1, x2| (3.0 * x1 + 4.0 * x2).cos())
            .to_spectral()
            .unwrap();
        let u = velocity(&multiscale_field(g), 0.6);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let far = 6; // |far - 3| = 3 > 2
        let parts = bank.bony_terms(&u, &theta, far).unwrap();
        assert!(parts.t1.max_coeff_norm() < 1e-15, "t1 must vanish for distant shells");
    }

    #[test]
    fn commutator_with_zero_velocity_is_exactly_zero() {
        let g = grid(32);
        let theta = multiscale_field(g);
        let u = VelocityField::from_components(SpectralField::zeros(g), SpectralField::zeros(g));
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let c = bank.commutator_term(&u, &theta, 2, 3).unwrap();
        assert_eq!(c.max_coeff_norm(), 0.0);
        assert!(matches!(
            bank.commutator_term(&u, &theta, 0, 3),
            Err(Error::BadShellPair { .. })
        ));
    }

    #[test]
    fn commutators_rearrange_back_into_the_low_high_term() {
        let g = grid(48);
        let theta = multiscale_field(g);
        let u = velocity(&theta, 0.7);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        for j in 2..=4 {
            let mut rebuilt = SpectralField::zeros(g);
            for k in (j - 2).max(0)..=(j + 2).min(bank.j_max()) {
                if k < 2 {
                    continue;
                }
                rebuilt += &bank.commutator_term(&u, &theta, j, k).unwrap();
                let su = bank.low_pass_velocity(&u, k - 1);
                let djdk = bank
                    .dyadic_block(&bank.dyadic_block(&theta, k).unwrap(), j)
                    .unwrap();
                rebuilt += &advect(&su, &djdk).unwrap();
            }
            let t1 = bank.bony_terms(&u, &theta, j).unwrap().t1;
            let defect = (&rebuilt - &t1).max_coeff_norm();
            let scale = t1.max_coeff_norm().max(1e-300);
            assert!(
                defect <= 1e-12 * scale.max(1.0),
                "shell {j}: rearrangement defect {defect:.3e}"
            );
        }
    }

    #[test]
    fn bernstein_ratio_respects_the_dyadic_lower_bound_at_p2() {
        let g = grid(64);
        let f = multiscale_field(g);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        for alpha in [0.4, 1.0] {
            let floor = 2f64.powf(-alpha);
            for j in 0..=bank.j_max() {
                let b = bank.bernstein_functional(&f, j, 2.0, alpha).unwrap();
                if b.rhs_unit == 0.0 {
                    assert_eq!(b.ratio, 0.0);
                    continue;
                }
                assert!(
                    b.ratio >= floor - 1e-12,
                    "alpha {alpha} shell {j}: ratio {} below {floor}",
                    b.ratio
                );
            }
        }
    }

    #[test]
    fn bernstein_functional_reports_zero_on_an_empty_block() {
        let g = grid(32);
        // exactly-sparse field: only shell 3 is populated, shell 1 is
        // bit-for-bit empty (an FFT round trip would leave 1e-16 dust there)
        let f = crate::synth::single_mode(g, 5, 0, 1.0).unwrap();
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let b = bank.bernstein_functional(&f, 1, 4.0, 0.5).unwrap();
        assert_eq!((b.lhs, b.rhs_unit, b.ratio), (0.0, 0.0, 0.0));
    }
}
