//! Command-line surface: `run`, `verify`, `analyze`, `sweep`.
//!
//! Exit codes: 0 success; 1 bad configuration, arguments, or input files;
//! 2 runtime failure during a run (blow-up guard or sink trouble);
//! 3 verification failure (some check or every sweep point FAILed).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{InitSpec, RunConfig, StepSpec, SweepConfig};
use crate::diagnostics::{CsvSink, DiagnosticOptions, Sink, SnapshotSink};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid2D;
use crate::integrator::{Solver, SolverConfig};
use crate::littlewood_paley::{BesovIndex, DyadicFilterBank, FilterProfile};
use crate::snapshot::read_snapshot;
use crate::synth::{randomized_power_field, single_mode, two_mode};
use crate::verification::{
    bootstrap_experiment, check_bootstrap_dichotomy, check_energy_balance,
    check_operator_identities, check_paraproduct_exactness, check_plane_wave_decay,
    check_scaling_conjugacy, check_shell_dissipation_bound, check_sup_decay,
    check_velocity_regularity, BootstrapParams, BootstrapReport, CheckResult, GainRegime,
};

#[derive(Parser)]
#[command(name = "mqg", about = "Pseudo-spectral solver and dyadic-analysis \
    toolkit for a modified dissipative quasi-geostrophic equation on the 2-torus")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run, writing diag.csv and snapshots.
    Run {
        /// Path to a key = value run configuration.
        config: PathBuf,
    },
    /// Execute a named verification suite and print PASS/FAIL lines.
    Verify {
        /// One of: operators, lemma, paraproduct, energy, decay, scaling,
        /// bootstrap, all.
        suite: String,
    },
    /// Print norms of a stored snapshot as CSV on standard output.
    Analyze {
        snapshot: PathBuf,
        /// Per-shell scaled norms and the aggregate: `s,p` or `s,p,q`
        /// (use `inf` for an unbounded index).
        #[arg(long)]
        besov: Option<String>,
        /// Sup norm plus the scaled-shell sup at the given exponent.
        #[arg(long)]
        holder: Option<f64>,
        /// Per-shell block norms at the given integrability index.
        #[arg(long)]
        blocks: Option<String>,
        /// Shell profile: sharp or smooth.
        #[arg(long, default_value = "sharp")]
        profile: String,
    },
    /// Run the regularity-bootstrap experiment over a parameter grid and
    /// write one row per point to sweep.csv.
    Sweep {
        /// Path to a key = value sweep configuration.
        config: PathBuf,
    },
}

pub fn main() -> i32 {
    match Cli::parse().command {
        Command::Run { config } => cmd_run(&config),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::Analyze { snapshot, besov, holder, blocks, profile } => {
            cmd_analyze(&snapshot, besov.as_deref(), holder, blocks.as_deref(), &profile)
        }
        Command::Sweep { config } => cmd_sweep(&config),
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn build_initial(cfg: &RunConfig, grid: Grid2D) -> Result<SpectralField> {
    match &cfg.init {
        InitSpec::SingleMode { k1, k2, amp } => single_mode(grid, *k1, *k2, *amp),
        InitSpec::TwoMode { a, b } => two_mode(grid, *a, *b),
        InitSpec::SpectralDecay { delta, seed } => {
            Ok(randomized_power_field(grid, 1.0 + delta, *seed, 1.0))
        }
        InitSpec::File { path } => {
            let snap = read_snapshot(path)?;
            if snap.theta.grid().n() != cfg.n {
                return Err(Error::BadConfig {
                    reason: format!(
                        "init file {} holds an n = {} field, config says n = {}",
                        path.display(),
                        snap.theta.grid().n(),
                        cfg.n
                    ),
                });
            }
            snap.theta.to_spectral()
        }
    }
}

struct PreparedRun {
    solver: Solver,
    theta0: SpectralField,
    csv: CsvSink,
    snapshots: SnapshotSink,
    opts: DiagnosticOptions,
    t_end: f64,
}

fn prepare_run(cfg: &RunConfig) -> Result<PreparedRun> {
    let grid = Grid2D::new(cfg.n)?;
    let theta0 = build_initial(cfg, grid)?;
    let solver_config = match cfg.step {
        StepSpec::Fixed(h) => SolverConfig::fixed(cfg.alpha, cfg.kappa, h),
        StepSpec::Cfl(sigma) => SolverConfig::cfl(cfg.alpha, cfg.kappa, sigma),
    };
    let solver = Solver::new(grid, solver_config)?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Io { path: cfg.output_dir.display().to_string(), message: e.to_string() })?;
    let csv = CsvSink::create(&cfg.output_dir.join("diag.csv"), cfg.diag_every)?;
    let snapshots =
        SnapshotSink::new(&cfg.output_dir, cfg.snapshot_every, cfg.alpha, cfg.kappa)?;
    let opts = DiagnosticOptions {
        profile: cfg.filter_profile,
        p_list: vec![2.0, f64::INFINITY],
    };
    Ok(PreparedRun { solver, theta0, csv, snapshots, opts, t_end: cfg.t_end })
}

fn cmd_run(config: &Path) -> i32 {
    let cfg = match RunConfig::load(config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("mqg run: {e}");
            return 1;
        }
    };
    let mut prepared = match prepare_run(&cfg) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("mqg run: {e}");
            return 1;
        }
    };
    let mut sinks: Vec<&mut dyn Sink> = vec![&mut prepared.csv, &mut prepared.snapshots];
    match prepared.solver.run_spectral(prepared.theta0, prepared.t_end, &prepared.opts, &mut sinks)
    {
        Ok(state) => {
            println!(
                "run complete: t = {:.6}, {} steps, {} snapshots, output in {}",
                state.t,
                state.steps,
                prepared.snapshots.written().len(),
                cfg.output_dir.display()
            );
            0
        }
        Err(e) => {
            eprintln!("mqg run: {e}");
            2
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

type CheckFn = fn() -> Result<Vec<CheckResult>>;

/// Suite name -> ordered list of named check functions.
pub fn suite_checks(suite: &str) -> Option<Vec<(&'static str, CheckFn)>> {
    let operators: [(&'static str, CheckFn); 2] = [
        ("operator identities", check_operator_identities),
        ("plane-wave decay", check_plane_wave_decay),
    ];
    let lemma: [(&'static str, CheckFn); 1] =
        [("shell dissipation bound", check_shell_dissipation_bound)];
    let paraproduct: [(&'static str, CheckFn); 1] =
        [("paraproduct exactness", check_paraproduct_exactness)];
    let energy: [(&'static str, CheckFn); 1] = [("energy balance", check_energy_balance)];
    let decay: [(&'static str, CheckFn); 2] = [
        ("sup-norm decay", check_sup_decay),
        ("velocity regularity", check_velocity_regularity),
    ];
    let scaling: [(&'static str, CheckFn); 1] =
        [("grid-doubling conjugacy", check_scaling_conjugacy)];
    let bootstrap: [(&'static str, CheckFn); 1] =
        [("bootstrap dichotomy", check_bootstrap_dichotomy)];
    Some(match suite {
        "operators" => operators.to_vec(),
        "lemma" => lemma.to_vec(),
        "paraproduct" => paraproduct.to_vec(),
        "energy" => energy.to_vec(),
        "decay" => decay.to_vec(),
        "scaling" => scaling.to_vec(),
        "bootstrap" => bootstrap.to_vec(),
        "all" => {
            let mut v = operators.to_vec();
            v.extend(lemma);
            v.extend(paraproduct);
            v.extend(energy);
            v.extend(decay);
            v.extend(scaling);
            v.extend(bootstrap);
            v
        }
        _ => return None,
    })
}

fn cmd_verify(suite: &str) -> i32 {
    let Some(groups) = suite_checks(suite) else {
        eprintln!(
            "mqg verify: unknown suite '{suite}' (expected operators, lemma, paraproduct, \
             energy, decay, scaling, bootstrap or all)"
        );
        return 1;
    };
    let mut total = 0usize;
    let mut failed = 0usize;
    for (group, check) in groups {
        match check() {
            Ok(results) => {
                for r in &results {
                    println!("{} {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                }
                total += results.len();
                failed += results.iter().filter(|r| !r.passed).count();
            }
            Err(e) => {
                println!("FAIL {group} — did not complete: {e}");
                total += 1;
                failed += 1;
            }
        }
    }
    println!("suite '{suite}': {total} checks, {failed} failed");
    if failed == 0 {
        0
    } else {
        3
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn parse_p(word: &str) -> Result<f64> {
    match word {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => word.parse::<f64>().map_err(|_| Error::BadConfig {
            reason: format!("cannot parse '{word}' as an integrability index"),
        }),
    }
}

/// `s,p` or `s,p,q` with `inf` allowed for `p` and `q`.
pub fn parse_besov_arg(arg: &str) -> Result<BesovIndex> {
    let words: Vec<&str> = arg.split(',').map(str::trim).collect();
    match words.as_slice() {
        [s, p] => Ok(BesovIndex::new(
            s.parse::<f64>().map_err(|_| Error::BadConfig {
                reason: format!("cannot parse '{s}' as a smoothness exponent"),
            })?,
            parse_p(p)?,
            f64::INFINITY,
        )),
        [s, p, q] => Ok(BesovIndex::new(
            s.parse::<f64>().map_err(|_| Error::BadConfig {
                reason: format!("cannot parse '{s}' as a smoothness exponent"),
            })?,
            parse_p(p)?,
            parse_p(q)?,
        )),
        _ => Err(Error::BadConfig {
            reason: format!("--besov expects 's,p' or 's,p,q', got '{arg}'"),
        }),
    }
}

fn analyze_inner(
    snapshot: &Path,
    besov: Option<&str>,
    holder: Option<f64>,
    blocks: Option<&str>,
    profile: &str,
) -> Result<()> {
    let profile = match profile {
        "sharp" => FilterProfile::Sharp,
        "smooth" => FilterProfile::Smooth,
        other => {
            return Err(Error::BadConfig {
                reason: format!("--profile expects 'sharp' or 'smooth', got '{other}'"),
            })
        }
    };
    if besov.is_none() && holder.is_none() && blocks.is_none() {
        return Err(Error::BadConfig {
            reason: "nothing to do: pass --besov, --holder and/or --blocks".to_string(),
        });
    }
    let snap = read_snapshot(snapshot)?;
    let theta = snap.theta.to_spectral()?.dealias();
    let bank = DyadicFilterBank::new(theta.grid(), profile);

    if let Some(arg) = blocks {
        let p = parse_p(arg)?;
        let norms = bank.block_norms(&theta, p)?;
        println!("j,block_norm");
        for (j, b) in norms.iter().enumerate() {
            println!("{j},{b:.16e}");
        }
    }
    if let Some(arg) = besov {
        let index = parse_besov_arg(arg)?;
        let norms = bank.block_norms(&theta, index.p)?;
        println!("j,scaled_norm");
        for (j, b) in norms.iter().enumerate() {
            println!("{j},{:.16e}", 2f64.powf(index.s * j as f64) * b);
        }
        println!("besov,{:.16e}", bank.besov_norm(&theta, index)?);
    }
    if let Some(delta) = holder {
        println!("holder,{:.16e}", bank.holder_norm(&theta, delta)?);
    }
    Ok(())
}

fn cmd_analyze(
    snapshot: &Path,
    besov: Option<&str>,
    holder: Option<f64>,
    blocks: Option<&str>,
    profile: &str,
) -> i32 {
    match analyze_inner(snapshot, besov, holder, blocks, profile) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mqg analyze: {e}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

const SWEEP_HEADER: &str = "delta,alpha,kappa,seed,p,n,t_end,dt,amp,delta_1,target_s,regime,\
     growth_t0,threshold_t0,growth_late,threshold_late,measured_gain,predicted_gain,\
     delta_prime,verdict,error";

fn sweep_row(params: &BootstrapParams, outcome: &Result<BootstrapReport>) -> String {
    let fixed = format!(
        "{:.16e},{:.16e},{:.16e},{},{:.16e},{},{:.16e},{:.16e},{:.16e}",
        params.delta,
        params.alpha,
        params.kappa,
        params.seed,
        params.p,
        params.n,
        params.t_end,
        params.dt,
        params.amp
    );
    match outcome {
        Ok(r) => {
            let regime = match r.regime {
                GainRegime::DoubleShift => "double_shift",
                GainRegime::AddAlpha => "add_alpha",
            };
            format!(
                "{fixed},{:.16e},{:.16e},{regime},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},\
                 {:.16e},{:.16e},{},",
                r.delta_1,
                r.target_s,
                r.growth_t0,
                r.threshold_t0,
                r.growth_late,
                r.threshold_late,
                r.measured_gain,
                r.predicted_gain,
                r.delta_prime,
                if r.verdict { "PASS" } else { "FAIL" }
            )
        }
        Err(e) => {
            let msg = e.to_string().replace(',', ";").replace('\n', " ");
            format!("{fixed},,,,,,,,,,,FAIL,{msg}")
        }
    }
}

fn sweep_inner(config: &Path) -> Result<i32> {
    let cfg = SweepConfig::load(config)?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Io { path: cfg.output_dir.display().to_string(), message: e.to_string() })?;
    let points = cfg.points();
    let outcomes: Vec<(BootstrapParams, Result<BootstrapReport>)> = points
        .par_iter()
        .map(|&(delta, alpha, kappa, seed)| {
            let params = BootstrapParams {
                delta,
                alpha,
                kappa,
                p: cfg.p,
                t_end: cfg.t_end,
                dt: cfg.dt,
                n: cfg.n,
                amp: cfg.amp,
                seed,
                thresholds: Default::default(),
            };
            let outcome = bootstrap_experiment(&params);
            (params, outcome)
        })
        .collect();

    let csv_path = cfg.output_dir.join("sweep.csv");
    let mut file = fs::File::create(&csv_path)
        .map_err(|e| Error::Io { path: csv_path.display().to_string(), message: e.to_string() })?;
    writeln!(file, "{SWEEP_HEADER}")
        .map_err(|e| Error::Io { path: csv_path.display().to_string(), message: e.to_string() })?;
    let mut passed = 0usize;
    for (params, outcome) in &outcomes {
        writeln!(file, "{}", sweep_row(params, outcome))
            .map_err(|e| Error::Io { path: csv_path.display().to_string(), message: e.to_string() })?;
        if matches!(outcome, Ok(r) if r.verdict) {
            passed += 1;
        }
    }
    println!(
        "sweep complete: {} points, {} passed, wrote {}",
        outcomes.len(),
        passed,
        csv_path.display()
    );
    Ok(if passed == 0 { 3 } else { 0 })
}

fn cmd_sweep(config: &Path) -> i32 {
    match sweep_inner(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mqg sweep: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_documented_suite_resolves_and_junk_does_not() {
        for suite in
            ["operators", "lemma", "paraproduct", "energy", "decay", "scaling", "bootstrap"]
        {
            assert!(suite_checks(suite).is_some(), "{suite}");
        }
        let all = suite_checks("all").unwrap();
        assert_eq!(all.len(), 9);
        assert!(suite_checks("everything").is_none());
    }

    #[test]
    fn besov_argument_grammar() {
        let b = parse_besov_arg("1,inf").unwrap();
        assert_eq!((b.s, b.p, b.q), (1.0, f64::INFINITY, f64::INFINITY));
        let b = parse_besov_arg("0.5, 2, 4").unwrap();
        assert_eq!((b.s, b.p, b.q), (0.5, 2.0, 4.0));
        assert!(parse_besov_arg("1").is_err());
        assert!(parse_besov_arg("a,b").is_err());
    }
}
