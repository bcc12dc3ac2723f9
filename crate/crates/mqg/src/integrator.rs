//! Time stepping: classical fourth-order Runge-Kutta applied to the
//! integrating-factor transform of the scalar equation, so the fractional
//! dissipation semigroup is applied exactly and the step-size limit comes
//! from advection alone.
//!
//! With `L = -kappa Lambda^alpha` and `N(theta) = -u . grad theta`, one
//! step of size `h` uses the diagonal multipliers `E1 = exp(Lh/2)`,
//! `E2 = E1^2` and the stages
//!
//! ```text
//! N1 = N(y)
//! N2 = N(E1 (y + h/2 N1))
//! N3 = N(E1 y + h/2 N2)
//! N4 = N(E2 y + h E1 N3)
//! y' = E2 y + h/6 (E2 N1 + 2 E1 (N2 + N3) + N4)
//! ```
//!
//! which is the standard integrating-factor RK4; for `N = 0` it reduces to
//! the exact per-mode decay `exp(-kappa |k|^alpha h)`.

use crate::diagnostics::{DiagnosticOptions, DiagnosticRecord, Sink};
use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::Grid2D;
use crate::littlewood_paley::DyadicFilterBank;
use crate::operators::{advect, velocity};

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// Constant step, still capped so the run lands exactly on emission
    /// times and on the final time.
    Fixed(f64),
    /// Advective CFL bound with the given safety factor in (0, 1].
    Cfl(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub dt: DtPolicy,
    /// The run aborts when `max|theta|` exceeds this multiple of its
    /// initial value (or turns non-finite).
    pub blow_up_factor: f64,
}

pub const DEFAULT_BLOW_UP_FACTOR: f64 = 1e6;

impl SolverConfig {
    pub fn fixed(alpha: f64, kappa: f64, dt: f64) -> Self {
        SolverConfig { alpha, kappa, dt: DtPolicy::Fixed(dt), blow_up_factor: DEFAULT_BLOW_UP_FACTOR }
    }

    pub fn cfl(alpha: f64, kappa: f64, safety: f64) -> Self {
        SolverConfig {
            alpha,
            kappa,
            dt: DtPolicy::Cfl(safety),
            blow_up_factor: DEFAULT_BLOW_UP_FACTOR,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::BadConfig { reason });
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} outside (0, 1]", self.alpha));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa = {} must be finite and nonnegative", self.kappa));
        }
        match self.dt {
            DtPolicy::Fixed(d) if !(d > 0.0 && d.is_finite()) => {
                return bad(format!("dt = {d} must be finite and positive"));
            }
            DtPolicy::Cfl(s) if !(s > 0.0 && s <= 1.0) => {
                return bad(format!("cfl safety = {s} outside (0, 1]"));
            }
            _ => {}
        }
        if !(self.blow_up_factor > 0.0) {
            return bad(format!("blow-up factor = {} must be positive", self.blow_up_factor));
        }
        Ok(())
    }
}

/// Evolving state: spectral scalar, elapsed time, step count, and the
/// initial sup norm the blow-up guard is measured against.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub theta: SpectralField,
    pub t: f64,
    pub steps: u64,
    pub initial_sup: f64,
}

pub struct Solver {
    grid: Grid2D,
    config: SolverConfig,
    /// `kappa |k|^alpha` per mode.
    lam: Vec<f64>,
    /// Cached half/full-step decay tables for the most recent step size.
    table_h: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
}

fn apply_table(e: &[f64], f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    for (c, &m) in out.coeffs_mut().iter_mut().zip(e.iter()) {
        *c *= m;
    }
    out
}

fn axpy(dst: &mut SpectralField, s: f64, src: &SpectralField) {
    for (d, c) in dst.coeffs_mut().iter_mut().zip(src.coeffs().iter()) {
        *d += s * c;
    }
}

impl Solver {
    pub fn new(grid: Grid2D, config: SolverConfig) -> Result<Solver> {
        config.validate()?;
        let mut lam = vec![0.0f64; grid.len()];
        for (idx, k1, k2) in grid.modes() {
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2 > 0.0 {
                lam[idx] = config.kappa * r2.powf(0.5 * config.alpha);
            }
        }
        let len = grid.len();
        Ok(Solver {
            grid,
            config,
            lam,
            table_h: f64::NAN,
            e_half: vec![1.0; len],
            e_full: vec![1.0; len],
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn ensure_tables(&mut self, h: f64) {
        if self.table_h == h {
            return;
        }
        for (i, &l) in self.lam.iter().enumerate() {
            let e = (-0.5 * l * h).exp();
            self.e_half[i] = e;
            self.e_full[i] = e * e;
        }
        self.table_h = h;
    }

    /// Advective CFL step suggestion:
    /// `safety * min(2 pi / (n * max|u| + eps), 0.1 / kappa)`.
    pub fn cfl_dt(&self, theta: &SpectralField) -> Result<f64> {
        let safety = match self.config.dt {
            DtPolicy::Cfl(s) => s,
            DtPolicy::Fixed(_) => 1.0,
        };
        let umax = velocity(theta, self.config.alpha).max_speed()?;
        let advective = 2.0 * std::f64::consts::PI / (self.grid.n() as f64 * umax + 1e-30);
        let dissipative =
            if self.config.kappa > 0.0 { 0.1 / self.config.kappa } else { f64::INFINITY };
        Ok(safety * advective.min(dissipative))
    }

    fn nonlinear(&self, f: &SpectralField) -> Result<SpectralField> {
        let u = velocity(f, self.config.alpha);
        Ok(advect(&u, f)?.scaled(-1.0))
    }

    /// Advance the state by exactly one step of size `h`.
    pub fn step_by(&mut self, state: &mut SimulationState, h: f64) -> Result<()> {
        assert!(h > 0.0 && h.is_finite(), "step size must be finite and positive");
        self.ensure_tables(h);
        let y = &state.theta;

        let n1 = self.nonlinear(y)?;
        let mut s2 = y.clone();
        axpy(&mut s2, 0.5 * h, &n1);
        let n2 = self.nonlinear(&apply_table(&self.e_half, &s2))?;
        let mut s3 = apply_table(&self.e_half, y);
        axpy(&mut s3, 0.5 * h, &n2);
        let n3 = self.nonlinear(&s3)?;
        let mut s4 = apply_table(&self.e_full, y);
        axpy(&mut s4, h, &apply_table(&self.e_half, &n3));
        let n4 = self.nonlinear(&s4)?;

        let mut next = apply_table(&self.e_full, y);
        let mut acc = apply_table(&self.e_full, &n1);
        let mut pair = n2;
        pair += &n3;
        axpy(&mut acc, 2.0, &apply_table(&self.e_half, &pair));
        acc += &n4;
        axpy(&mut next, h / 6.0, &acc);

        let t_next = state.t + h;
        let guard = self.config.blow_up_factor * state.initial_sup;
        if !next.all_finite() {
            return Err(Error::BlowUp { t: t_next, linf: f64::NAN, guard });
        }
        let linf = next.to_physical()?.lp_norm(f64::INFINITY);
        if linf > guard {
            return Err(Error::BlowUp { t: t_next, linf, guard });
        }
        state.theta = next;
        state.t = t_next;
        state.steps += 1;
        Ok(())
    }

    fn fresh_state(&self, theta0: SpectralField) -> Result<SimulationState> {
        if theta0.grid() != self.grid {
            return Err(Error::GridMismatch(theta0.grid().n(), self.grid.n()));
        }
        let theta = theta0.dealias();
        let initial_sup = theta.to_physical()?.lp_norm(f64::INFINITY);
        Ok(SimulationState { theta, t: 0.0, steps: 0, initial_sup })
    }

    /// Take exactly `m` steps of exactly `h` each, with no step-size
    /// capping.  This is the entry point for discrete time-conjugacy and
    /// convergence measurements, where the step sequence itself must match
    /// across runs.
    pub fn run_steps(&mut self, theta0: SpectralField, h: f64, m: u64) -> Result<SimulationState> {
        let mut state = self.fresh_state(theta0)?;
        for _ in 0..m {
            self.step_by(&mut state, h)?;
        }
        Ok(state)
    }

    /// Integrate from `t = 0` to `t_end`, emitting diagnostics through the
    /// sinks.  Every sink sees the initial and final states; in between,
    /// each is served at its own period (`0` = every step, `inf` = never),
    /// and the step size is capped so emission times are hit exactly.
    pub fn run(
        &mut self,
        theta0: &PhysicalField,
        t_end: f64,
        opts: &DiagnosticOptions,
        sinks: &mut [&mut dyn Sink],
    ) -> Result<SimulationState> {
        self.run_spectral(theta0.to_spectral()?, t_end, opts, sinks)
    }

    pub fn run_spectral(
        &mut self,
        theta0: SpectralField,
        t_end: f64,
        opts: &DiagnosticOptions,
        sinks: &mut [&mut dyn Sink],
    ) -> Result<SimulationState> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::BadConfig {
                reason: format!("t_end = {t_end} must be finite and nonnegative"),
            });
        }
        let mut state = self.fresh_state(theta0)?;
        let outcome = self.drive(&mut state, t_end, opts, sinks);
        for s in sinks.iter_mut() {
            s.finish()?;
        }
        outcome.map(|()| state)
    }

    fn drive(
        &mut self,
        state: &mut SimulationState,
        t_end: f64,
        opts: &DiagnosticOptions,
        sinks: &mut [&mut dyn Sink],
    ) -> Result<()> {
        let end_tol = 1e-12 * t_end.max(1.0);
        if sinks.is_empty() {
            while t_end - state.t > end_tol {
                let h = self.next_dt(state, t_end, &[])?;
                self.step_by(state, h)?;
            }
            return Ok(());
        }

        let bank = DyadicFilterBank::new(self.grid, opts.profile);
        let alpha = self.config.alpha;
        // periodic emission counters: sink i is next due at every_i * count_i
        let mut counts: Vec<u64> = sinks.iter().map(|_| 1).collect();

        // initial emission for every sink
        let record =
            DiagnosticRecord::measure(&bank, &state.theta, state.t, alpha, &opts.p_list)?;
        for s in sinks.iter_mut() {
            s.emit(state, &record)?;
        }
        if t_end - state.t <= end_tol {
            return Ok(());
        }

        loop {
            let caps: Vec<f64> = sinks
                .iter()
                .zip(counts.iter())
                .filter(|(s, _)| s.every() > 0.0 && s.every().is_finite())
                .map(|(s, &c)| s.every() * c as f64)
                .collect();
            let h = self.next_dt(state, t_end, &caps)?;
            self.step_by(state, h)?;

            let at_end = t_end - state.t <= end_tol;
            let mut due: Vec<bool> = Vec::with_capacity(sinks.len());
            for (s, c) in sinks.iter().zip(counts.iter_mut()) {
                let every = s.every();
                let is_due = if at_end {
                    true
                } else if every == 0.0 {
                    true
                } else if every.is_finite() && state.t >= every * (*c as f64) - 1e-9 * every {
                    true
                } else {
                    false
                };
                if is_due && every > 0.0 && every.is_finite() {
                    while every * (*c as f64) <= state.t + 1e-9 * every {
                        *c += 1;
                    }
                }
                due.push(is_due);
            }
            if due.iter().any(|&d| d) {
                let record =
                    DiagnosticRecord::measure(&bank, &state.theta, state.t, alpha, &opts.p_list)?;
                for (s, &d) in sinks.iter_mut().zip(due.iter()) {
                    if d {
                        s.emit(state, &record)?;
                    }
                }
            }
            if at_end {
                return Ok(());
            }
        }
    }

    /// Step size for the next step: the policy value, capped by the time
    /// remaining and by the next scheduled emission.
    fn next_dt(&mut self, state: &SimulationState, t_end: f64, caps: &[f64]) -> Result<f64> {
        let mut h = match self.config.dt {
            DtPolicy::Fixed(d) => d,
            DtPolicy::Cfl(_) => self.cfl_dt(&state.theta)?,
        };
        h = h.min(t_end - state.t);
        for &due_t in caps {
            if due_t > state.t {
                h = h.min(due_t - state.t);
            }
        }
        if !(h > 0.0) {
            return Err(Error::BadConfig {
                reason: format!("step size collapsed to {h} at t = {}", state.t),
            });
        }
        Ok(h)
    }
}
