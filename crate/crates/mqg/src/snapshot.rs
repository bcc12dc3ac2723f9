//! Binary state snapshots.
//!
//! Layout (all little-endian):
//!
//! ```text
//! bytes 0..4    magic   b"MQG1"
//! bytes 4..8    u32     format version (1)
//! bytes 8..12   u32     grid size n
//! bytes 12..20  f64     coupling/dissipation exponent alpha
//! bytes 20..28  f64     dissipation coefficient kappa
//! bytes 28..36  f64     simulation time t
//! bytes 36..    n*n f64 scalar values on the collocation grid, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::grid::Grid2D;

pub const MAGIC: &[u8; 4] = b"MQG1";
pub const VERSION: u32 = 1;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_snapshot(
    path: &Path,
    theta: &PhysicalField,
    alpha: f64,
    kappa: f64,
    t: f64,
) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    let werr = io_err(path);
    w.write_all(MAGIC).map_err(&werr)?;
    w.write_u32::<LittleEndian>(VERSION).map_err(&werr)?;
    w.write_u32::<LittleEndian>(theta.grid().n() as u32).map_err(&werr)?;
    w.write_f64::<LittleEndian>(alpha).map_err(&werr)?;
    w.write_f64::<LittleEndian>(kappa).map_err(&werr)?;
    w.write_f64::<LittleEndian>(t).map_err(&werr)?;
    for &v in theta.values() {
        w.write_f64::<LittleEndian>(v).map_err(&werr)?;
    }
    w.flush().map_err(&werr)
}

pub struct Snapshot {
    pub theta: PhysicalField,
    pub alpha: f64,
    pub kappa: f64,
    pub t: f64,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(f);
    let rerr = io_err(path);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(&rerr)?;
    if &magic != MAGIC {
        return Err(Error::BadSnapshot { reason: format!("magic {magic:?} is not {MAGIC:?}") });
    }
    let version = r.read_u32::<LittleEndian>().map_err(&rerr)?;
    if version != VERSION {
        return Err(Error::BadSnapshot { reason: format!("unsupported version {version}") });
    }
    let n = r.read_u32::<LittleEndian>().map_err(&rerr)? as usize;
    let grid = Grid2D::new(n)?;
    let alpha = r.read_f64::<LittleEndian>().map_err(&rerr)?;
    let kappa = r.read_f64::<LittleEndian>().map_err(&rerr)?;
    let t = r.read_f64::<LittleEndian>().map_err(&rerr)?;
    let mut values = vec![0.0f64; grid.len()];
    r.read_f64_into::<LittleEndian>(&mut values)
        .map_err(|e| Error::BadSnapshot { reason: format!("truncated payload: {e}") })?;
    let mut tail = [0u8; 1];
    match r.read(&mut tail) {
        Ok(0) => {}
        Ok(_) => {
            return Err(Error::BadSnapshot { reason: "trailing bytes after payload".into() })
        }
        Err(e) => return Err(rerr(e)),
    }
    let theta = PhysicalField::from_values(grid, values)?;
    Ok(Snapshot { theta, alpha, kappa, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::randomized_power_field;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.mqg");
        let g = Grid2D::new(32).unwrap();
        let theta = randomized_power_field(g, 1.2, 99, 2.5).to_physical().unwrap();
        write_snapshot(&path, &theta, 0.65, 0.125, 3.5).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.theta.values(), theta.values(), "payload must round trip bit-exactly");
        assert_eq!((snap.alpha, snap.kappa, snap.t), (0.65, 0.125, 3.5));
        let bytes = std::fs::metadata(&path).unwrap().len();
        assert_eq!(bytes, 36 + 8 * 32 * 32);
    }

    #[test]
    fn bad_magic_and_truncation_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.mqg");
        std::fs::write(&path, b"NOPE____________________________").unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::BadSnapshot { .. })));

        let g = Grid2D::new(32).unwrap();
        let theta = randomized_power_field(g, 1.2, 5, 1.0).to_physical().unwrap();
        let full = dir.path().join("full.mqg");
        write_snapshot(&full, &theta, 1.0, 0.1, 0.0).unwrap();
        let mut bytes = std::fs::read(&full).unwrap();
        bytes.truncate(bytes.len() - 16);
        let cut = dir.path().join("cut.mqg");
        std::fs::write(&cut, &bytes).unwrap();
        assert!(matches!(read_snapshot(&cut), Err(Error::BadSnapshot { .. })));
    }
}
