//! Plain `key = value` run and sweep configurations.
//!
//! The format is deliberately tiny: one assignment per line, `#` starts a
//! comment, keys are fixed, unknown keys are an error (typos should not
//! silently fall back to defaults), and all numbers parse with Rust's
//! locale-independent `f64`/`usize` grammar.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::littlewood_paley::FilterProfile;

fn bad(reason: String) -> Error {
    Error::BadConfig { reason }
}

/// Initial data selector.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `single_mode kx ky amp`
    SingleMode { k1: i64, k2: i64, amp: f64 },
    /// `two_mode kx1 ky1 amp1 kx2 ky2 amp2`
    TwoMode { a: (i64, i64, f64), b: (i64, i64, f64) },
    /// `spectral_decay delta seed`: hashed-phase power law
    /// `|coeff(k)| = |k|^{-(1 + delta)}`.
    SpectralDecay { delta: f64, seed: u64 },
    /// `file path`: initial data loaded from a snapshot.
    File { path: PathBuf },
}

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    /// `dt = h`
    Fixed(f64),
    /// `cfl_safety = sigma`
    Cfl(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub n: usize,
    pub t_end: f64,
    pub step: StepSpec,
    pub snapshot_every: f64,
    pub diag_every: f64,
    pub init: InitSpec,
    pub filter_profile: FilterProfile,
    pub output_dir: PathBuf,
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    match value {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => value
            .parse::<f64>()
            .map_err(|_| bad(format!("key '{key}': cannot parse '{value}' as a number"))),
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| bad(format!("key '{key}': cannot parse '{value}' as an integer")))
}

fn parse_i64(key: &str, value: &str) -> Result<i64> {
    value
        .parse::<i64>()
        .map_err(|_| bad(format!("key '{key}': cannot parse '{value}' as an integer")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| bad(format!("key '{key}': cannot parse '{value}' as an integer")))
}

fn parse_init(value: &str) -> Result<InitSpec> {
    let words: Vec<&str> = value.split_whitespace().collect();
    let key = "init";
    match words.as_slice() {
        ["single_mode", k1, k2, amp] => Ok(InitSpec::SingleMode {
            k1: parse_i64(key, k1)?,
            k2: parse_i64(key, k2)?,
            amp: parse_f64(key, amp)?,
        }),
        ["two_mode", a1, a2, amp_a, b1, b2, amp_b] => Ok(InitSpec::TwoMode {
            a: (parse_i64(key, a1)?, parse_i64(key, a2)?, parse_f64(key, amp_a)?),
            b: (parse_i64(key, b1)?, parse_i64(key, b2)?, parse_f64(key, amp_b)?),
        }),
        ["spectral_decay", delta, seed] => Ok(InitSpec::SpectralDecay {
            delta: parse_f64(key, delta)?,
            seed: parse_u64(key, seed)?,
        }),
        ["file", path] => Ok(InitSpec::File { path: PathBuf::from(path) }),
        _ => Err(bad(format!(
            "init: expected 'single_mode kx ky amp', 'two_mode kx1 ky1 amp1 kx2 ky2 amp2', \
             'spectral_decay delta seed' or 'file path', got '{value}'"
        ))),
    }
}

fn parse_profile(value: &str) -> Result<FilterProfile> {
    match value {
        "sharp" => Ok(FilterProfile::Sharp),
        "smooth" => Ok(FilterProfile::Smooth),
        _ => Err(bad(format!("filter_profile: expected 'sharp' or 'smooth', got '{value}'"))),
    }
}

/// Splits a config source into `(key, value)` pairs, rejecting anything
/// that is not an assignment.
fn assignments(source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)));
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(source: &str) -> Result<RunConfig> {
        let mut alpha = None;
        let mut kappa = None;
        let mut n = None;
        let mut t_end = None;
        let mut dt = None;
        let mut cfl_safety = None;
        let mut snapshot_every = None;
        let mut diag_every = None;
        let mut init = None;
        let mut filter_profile = None;
        let mut output_dir = None;

        for (key, value) in assignments(source)? {
            match key.as_str() {
                "alpha" => alpha = Some(parse_f64(&key, &value)?),
                "kappa" => kappa = Some(parse_f64(&key, &value)?),
                "n" => n = Some(parse_usize(&key, &value)?),
                "t_end" => t_end = Some(parse_f64(&key, &value)?),
                "dt" => dt = Some(parse_f64(&key, &value)?),
                "cfl_safety" => cfl_safety = Some(parse_f64(&key, &value)?),
                "snapshot_every" => snapshot_every = Some(parse_f64(&key, &value)?),
                "diag_every" => diag_every = Some(parse_f64(&key, &value)?),
                "init" => init = Some(parse_init(&value)?),
                "filter_profile" => filter_profile = Some(parse_profile(&value)?),
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }

        let missing = |key: &str| bad(format!("missing required key '{key}'"));
        let step = match (dt, cfl_safety) {
            (Some(h), None) => StepSpec::Fixed(h),
            (None, Some(sigma)) => StepSpec::Cfl(sigma),
            (Some(_), Some(_)) => {
                return Err(bad("'dt' and 'cfl_safety' are mutually exclusive".to_string()))
            }
            (None, None) => return Err(missing("dt (or cfl_safety)")),
        };
        Ok(RunConfig {
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            kappa: kappa.ok_or_else(|| missing("kappa"))?,
            n: n.ok_or_else(|| missing("n"))?,
            t_end: t_end.ok_or_else(|| missing("t_end"))?,
            step,
            snapshot_every: snapshot_every.ok_or_else(|| missing("snapshot_every"))?,
            diag_every: diag_every.ok_or_else(|| missing("diag_every"))?,
            init: init.ok_or_else(|| missing("init"))?,
            filter_profile: filter_profile.unwrap_or(FilterProfile::Sharp),
            output_dir: output_dir.ok_or_else(|| missing("output_dir"))?,
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let source = fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        RunConfig::parse(&source)
    }
}

/// Parameter grid for the bootstrap sweep: list-valued axes, scalar rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    pub kappa: Vec<f64>,
    pub delta: Vec<f64>,
    pub seed: Vec<u64>,
    pub n: usize,
    pub p: f64,
    pub t_end: f64,
    pub dt: f64,
    pub amp: f64,
    pub output_dir: PathBuf,
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(format!("key '{key}': empty list")));
    }
    Ok(items)
}

fn parse_u64_list(key: &str, value: &str) -> Result<Vec<u64>> {
    let items: Vec<u64> = value
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| parse_u64(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(format!("key '{key}': empty list")));
    }
    Ok(items)
}

impl SweepConfig {
    pub fn parse(source: &str) -> Result<SweepConfig> {
        let mut alpha = None;
        let mut kappa = None;
        let mut delta = None;
        let mut seed = None;
        let mut n = None;
        let mut p = None;
        let mut t_end = None;
        let mut dt = None;
        let mut amp = None;
        let mut output_dir = None;
        for (key, value) in assignments(source)? {
            match key.as_str() {
                "alpha" => alpha = Some(parse_f64_list(&key, &value)?),
                "kappa" => kappa = Some(parse_f64_list(&key, &value)?),
                "delta" => delta = Some(parse_f64_list(&key, &value)?),
                "seed" => seed = Some(parse_u64_list(&key, &value)?),
                "n" => n = Some(parse_usize(&key, &value)?),
                "p" => p = Some(parse_f64(&key, &value)?),
                "t_end" => t_end = Some(parse_f64(&key, &value)?),
                "dt" => dt = Some(parse_f64(&key, &value)?),
                "amp" => amp = Some(parse_f64(&key, &value)?),
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }
        let missing = |key: &str| bad(format!("missing required key '{key}'"));
        Ok(SweepConfig {
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            kappa: kappa.ok_or_else(|| missing("kappa"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            n: n.ok_or_else(|| missing("n"))?,
            p: p.ok_or_else(|| missing("p"))?,
            t_end: t_end.ok_or_else(|| missing("t_end"))?,
            dt: dt.ok_or_else(|| missing("dt"))?,
            amp: amp.unwrap_or(1.0),
            output_dir: output_dir.ok_or_else(|| missing("output_dir"))?,
        })
    }

    pub fn load(path: &Path) -> Result<SweepConfig> {
        let source = fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        SweepConfig::parse(&source)
    }

    /// Cartesian product in a fixed order: delta-major, seed-minor.
    pub fn points(&self) -> Vec<(f64, f64, f64, u64)> {
        let mut out = Vec::new();
        for &d in &self.delta {
            for &a in &self.alpha {
                for &k in &self.kappa {
                    for &s in &self.seed {
                        out.push((d, a, k, s));
                    }
                }
            }
        }
        out
    }
}
