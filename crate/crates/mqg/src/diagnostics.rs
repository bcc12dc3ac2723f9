//! Per-time diagnostic records, their CSV serialization, and the sink
//! abstraction the time stepper emits them through.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::integrator::SimulationState;
use crate::littlewood_paley::{DyadicFilterBank, FilterProfile};
use crate::operators::velocity;
use crate::snapshot;

/// What the stepper measures at every emission time.
#[derive(Debug, Clone)]
pub struct DiagnosticOptions {
    pub profile: FilterProfile,
    /// Block norms `||Delta_j theta||_p` are recorded for each of these.
    pub p_list: Vec<f64>,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        DiagnosticOptions { profile: FilterProfile::Sharp, p_list: vec![2.0, f64::INFINITY] }
    }
}

/// One row of diagnostics: global norms plus the dyadic block profile of
/// the scalar for every requested integrability index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    /// Homogeneous Sobolev seminorm of order half the dissipation exponent
    /// (the quantity whose square integrates the dissipation rate).
    pub h_alpha_half: f64,
    /// Hoelder-type norm of the velocity at exponent `1 - alpha`, maximised
    /// over the two components.
    pub u_holder: f64,
    pub p_list: Vec<f64>,
    /// `blocks[i][j] = ||Delta_j theta||_{p_list[i]}`.
    pub blocks: Vec<Vec<f64>>,
}

impl DiagnosticRecord {
    pub fn measure(
        bank: &DyadicFilterBank,
        theta: &SpectralField,
        t: f64,
        alpha: f64,
        p_list: &[f64],
    ) -> Result<DiagnosticRecord> {
        let l2 = theta.l2_norm();
        let linf = theta.to_physical()?.lp_norm(f64::INFINITY);
        let h_alpha_half = theta.sobolev_seminorm(0.5 * alpha);
        let u = velocity(theta, alpha);
        let delta = (1.0 - alpha).clamp(0.0, 1.0 - f64::EPSILON);
        let u_holder = bank
            .holder_norm(u.u1(), delta)?
            .max(bank.holder_norm(u.u2(), delta)?);
        let mut blocks = Vec::with_capacity(p_list.len());
        for &p in p_list {
            blocks.push(bank.block_norms(theta, p)?);
        }
        Ok(DiagnosticRecord {
            t,
            l2,
            linf,
            h_alpha_half,
            u_holder,
            p_list: p_list.to_vec(),
            blocks,
        })
    }
}

/// Compact label for an integrability index in CSV column names:
/// integers print bare, infinity prints `inf`.
pub(crate) fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else if p == p.trunc() {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

fn parse_p_label(s: &str) -> Option<f64> {
    if s == "inf" {
        Some(f64::INFINITY)
    } else {
        s.parse::<f64>().ok()
    }
}

fn csv_header(record: &DiagnosticRecord) -> String {
    let mut cols = vec![
        "t".to_string(),
        "l2".to_string(),
        "linf".to_string(),
        "h_alpha_half".to_string(),
        "u_holder".to_string(),
    ];
    for (i, &p) in record.p_list.iter().enumerate() {
        for j in 0..record.blocks[i].len() {
            cols.push(format!("b_{j}_{}", p_label(p)));
        }
    }
    cols.join(",")
}

fn csv_row(record: &DiagnosticRecord) -> String {
    let mut cols = vec![
        format!("{:.16e}", record.t),
        format!("{:.16e}", record.l2),
        format!("{:.16e}", record.linf),
        format!("{:.16e}", record.h_alpha_half),
        format!("{:.16e}", record.u_holder),
    ];
    for row in &record.blocks {
        for v in row {
            cols.push(format!("{v:.16e}"));
        }
    }
    cols.join(",")
}

/// An in-memory sequence of records with lossless CSV round-tripping
/// (values are printed with 17 significant digits).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticLog {
    records: Vec<DiagnosticRecord>,
}

impl DiagnosticLog {
    pub fn new() -> Self {
        DiagnosticLog { records: Vec::new() }
    }

    pub fn push(&mut self, r: DiagnosticRecord) {
        self.records.push(r);
    }

    pub fn records(&self) -> &[DiagnosticRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if let Some(first) = self.records.first() {
            writeln!(w, "{}", csv_header(first))?;
            for r in &self.records {
                writeln!(w, "{}", csv_row(r))?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<DiagnosticLog> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines();
        let header = match lines.next() {
            None => return Ok(DiagnosticLog::new()),
            Some(h) => h.map_err(|e| Error::BadSnapshot { reason: format!("csv: {e}") })?,
        };
        let cols: Vec<&str> = header.split(',').collect();
        let fixed = ["t", "l2", "linf", "h_alpha_half", "u_holder"];
        if cols.len() < fixed.len() || cols[..fixed.len()] != fixed {
            return Err(Error::BadSnapshot { reason: "csv: unexpected header".into() });
        }
        // block columns arrive p-major: b_0_2 ... b_J_2, b_0_inf ...
        let mut p_list: Vec<f64> = Vec::new();
        let mut shells = 0usize;
        for c in &cols[fixed.len()..] {
            let rest = c.strip_prefix("b_").ok_or_else(|| Error::BadSnapshot {
                reason: format!("csv: unexpected column {c}"),
            })?;
            let (j, label) = rest.split_once('_').ok_or_else(|| Error::BadSnapshot {
                reason: format!("csv: unexpected column {c}"),
            })?;
            let j: usize = j.parse().map_err(|_| Error::BadSnapshot {
                reason: format!("csv: bad shell index in {c}"),
            })?;
            let p = parse_p_label(label).ok_or_else(|| Error::BadSnapshot {
                reason: format!("csv: bad integrability label in {c}"),
            })?;
            if p_list.last() != Some(&p) {
                p_list.push(p);
            }
            shells = shells.max(j + 1);
        }
        let expected = fixed.len() + p_list.len() * shells;
        if cols.len() != expected {
            return Err(Error::BadSnapshot { reason: "csv: ragged block columns".into() });
        }
        let mut log = DiagnosticLog::new();
        for line in lines {
            let line = line.map_err(|e| Error::BadSnapshot { reason: format!("csv: {e}") })?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::BadSnapshot {
                        reason: format!("csv: bad value {v}"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != expected {
                return Err(Error::BadSnapshot { reason: "csv: short row".into() });
            }
            let mut blocks = Vec::with_capacity(p_list.len());
            for i in 0..p_list.len() {
                let start = fixed.len() + i * shells;
                blocks.push(vals[start..start + shells].to_vec());
            }
            log.push(DiagnosticRecord {
                t: vals[0],
                l2: vals[1],
                linf: vals[2],
                h_alpha_half: vals[3],
                u_holder: vals[4],
                p_list: p_list.clone(),
                blocks,
            });
        }
        Ok(log)
    }

    pub fn read_csv_path(path: &Path) -> Result<DiagnosticLog> {
        let f = File::open(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::read_csv(f)
    }
}

/// Receives diagnostics during a run.  `every` is the requested emission
/// period: `0` means every step, a finite positive value means that time
/// spacing (the stepper lands on the emission times exactly), and infinity
/// means endpoints only.  All sinks also receive the initial and final
/// states.
pub trait Sink {
    fn every(&self) -> f64;
    fn emit(&mut self, state: &SimulationState, record: &DiagnosticRecord) -> Result<()>;
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Collects records in memory.
pub struct MemorySink {
    every: f64,
    log: DiagnosticLog,
}

impl MemorySink {
    pub fn new(every: f64) -> Self {
        MemorySink { every, log: DiagnosticLog::new() }
    }

    pub fn log(&self) -> &DiagnosticLog {
        &self.log
    }

    pub fn into_log(self) -> DiagnosticLog {
        self.log
    }
}

impl Sink for MemorySink {
    fn every(&self) -> f64 {
        self.every
    }

    fn emit(&mut self, _state: &SimulationState, record: &DiagnosticRecord) -> Result<()> {
        self.log.push(record.clone());
        Ok(())
    }
}

/// Streams records to a CSV file as they are produced.
pub struct CsvSink {
    every: f64,
    writer: BufWriter<File>,
    header_written: bool,
    t_last: f64,
}

impl CsvSink {
    pub fn create(path: &Path, every: f64) -> Result<CsvSink> {
        let f = File::create(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(CsvSink { every, writer: BufWriter::new(f), header_written: false, t_last: f64::NAN })
    }
}

impl Sink for CsvSink {
    fn every(&self) -> f64 {
        self.every
    }

    fn emit(&mut self, state: &SimulationState, record: &DiagnosticRecord) -> Result<()> {
        self.t_last = state.t;
        let io_err = |e: std::io::Error| Error::SinkFailure {
            t: record.t,
            message: format!("csv write: {e}"),
        };
        if !self.header_written {
            writeln!(self.writer, "{}", csv_header(record)).map_err(io_err)?;
            self.header_written = true;
        }
        writeln!(self.writer, "{}", csv_row(record)).map_err(io_err)?;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::SinkFailure {
            t: self.t_last,
            message: format!("csv flush: {e}"),
        })
    }
}

/// Writes a binary state snapshot at each emission time, named
/// `snapshot_NNNN.mqg` in ascending order inside `dir`.
pub struct SnapshotSink {
    every: f64,
    dir: PathBuf,
    alpha: f64,
    kappa: f64,
    written: Vec<PathBuf>,
}

impl SnapshotSink {
    pub fn new(dir: &Path, every: f64, alpha: f64, kappa: f64) -> Result<SnapshotSink> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(SnapshotSink { every, dir: dir.to_path_buf(), alpha, kappa, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

impl Sink for SnapshotSink {
    fn every(&self) -> f64 {
        self.every
    }

    fn emit(&mut self, state: &SimulationState, record: &DiagnosticRecord) -> Result<()> {
        let path = self.dir.join(format!("snapshot_{:04}.mqg", self.written.len()));
        let phys = state.theta.to_physical().map_err(|e| Error::SinkFailure {
            t: record.t,
            message: format!("snapshot transform: {e}"),
        })?;
        snapshot::write_snapshot(&path, &phys, self.alpha, self.kappa, state.t).map_err(|e| {
            Error::SinkFailure { t: record.t, message: format!("snapshot write: {e}") }
        })?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::synth::randomized_power_field;

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = Grid2D::new(32).unwrap();
        let theta = randomized_power_field(g, 1.4, 7, 1.0);
        let bank = DyadicFilterBank::new(g, FilterProfile::Sharp);
        let p_list = [2.0, 20.0, f64::INFINITY];
        let mut log = DiagnosticLog::new();
        for (i, t) in [0.0, 0.37, 1.0 / 3.0].into_iter().enumerate() {
            let mut r = DiagnosticRecord::measure(&bank, &theta, t, 0.8, &p_list).unwrap();
            r.l2 *= 1.0 + i as f64 * 1e-3;
            log.push(r);
        }
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,l2,linf,h_alpha_half,u_holder,b_0_2"));
        assert!(text.contains("b_0_20"), "header must label each integrability index");
        assert!(text.contains("b_0_inf"));
        let back = DiagnosticLog::read_csv(&buf[..]).unwrap();
        assert_eq!(back, log, "round trip must preserve every bit");
    }

    #[test]
    fn empty_log_writes_nothing_and_reads_back_empty() {
        let log = DiagnosticLog::new();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert!(buf.is_empty());
        assert!(DiagnosticLog::read_csv(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn integrability_labels_render_compactly() {
        assert_eq!(p_label(2.0), "2");
        assert_eq!(p_label(20.0), "20");
        assert_eq!(p_label(f64::INFINITY), "inf");
        assert_eq!(p_label(2.5), "2.5");
        assert_eq!(parse_p_label("inf"), Some(f64::INFINITY));
        assert_eq!(parse_p_label("20"), Some(20.0));
    }
}
