//! QPSV state files: `QPSV`, version byte 1, little-endian `u32` qubit
//! count, then `2^n` `(re, im)` pairs of little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use qpower_core::statevector::MAX_QUBITS;
use qpower_core::{State, C64};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"QPSV";
pub const VERSION: u8 = 1;
/// Inputs whose norm differs from one by more than this are reported.
pub const NORM_WARN: f64 = 1e-6;

pub fn write_state(mut w: impl Write, state: &State) -> CliResult<()> {
    w.write_all(MAGIC)?;
    w.write_u8(VERSION)?;
    w.write_u32::<LittleEndian>(state.n_qubits() as u32)?;
    for a in state.amplitudes() {
        w.write_f64::<LittleEndian>(a.re)?;
        w.write_f64::<LittleEndian>(a.im)?;
    }
    w.flush()?;
    Ok(())
}

/// The state exactly as stored, without normalizing.
pub fn read_state(mut r: impl Read) -> CliResult<State> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| CliError::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(CliError::Format(format!("magic {:?} is not QPSV", magic)));
    }
    let version = r.read_u8().map_err(|_| CliError::Format("truncated header".into()))?;
    if version != VERSION {
        return Err(CliError::Format(format!("unsupported version {}", version)));
    }
    let n = r.read_u32::<LittleEndian>().map_err(|_| CliError::Format("truncated header".into()))? as usize;
    if n > MAX_QUBITS {
        return Err(CliError::Format(format!("{} qubits exceeds the supported {}", n, MAX_QUBITS)));
    }
    let dim = 1usize << n;
    let mut amps = Vec::with_capacity(dim);
    for i in 0..dim {
        let re = r.read_f64::<LittleEndian>();
        let im = r.read_f64::<LittleEndian>();
        match (re, im) {
            (Ok(re), Ok(im)) => amps.push(C64::new(re, im)),
            _ => return Err(CliError::Format(format!("expected {} amplitudes for {} qubits, found {}", dim, n, i))),
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(CliError::Format(format!("trailing data after {} amplitudes", dim)));
    }
    Ok(State::from_amplitudes(n, amps)?)
}

#[derive(Clone, Debug)]
pub struct LoadedState {
    /// Normalized copy.
    pub state: State,
    pub input_norm: f64,
    pub warning: Option<String>,
}

pub fn load_state(path: &Path) -> CliResult<LoadedState> {
    let raw = read_state(BufReader::new(File::open(path)?))?;
    let input_norm = raw.norm();
    if !(input_norm > 0.0 && input_norm.is_finite()) {
        return Err(CliError::Format(format!("{}: zero or non-finite norm", path.display())));
    }
    let warning =
        ((input_norm - 1.0).abs() > NORM_WARN).then(|| format!("{}: norm {} renormalized to 1", path.display(), input_norm));
    Ok(LoadedState { state: raw.normalized()?, input_norm, warning })
}

pub fn save_state(path: &Path, state: &State) -> CliResult<()> {
    write_state(BufWriter::new(File::create(path)?), state)
}
