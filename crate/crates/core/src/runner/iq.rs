//! Raw I/Q files and their JSON sidecars.
//!
//! Layout, little-endian:
//!
//! | offset | size  | field                         |
//! |--------|-------|-------------------------------|
//! | 0      | 8     | magic `UDARIQ01`              |
//! | 8      | 4     | `N` fast-time samples, u32    |
//! | 12     | 4     | `M` symbols, u32              |
//! | 16     | 8     | carrier `f₀` Hz, f64          |
//! | 24     | 8     | symbol duration `T` s, f64    |
//! | 32     | 8·N·M | complex64 (f32 re, f32 im), symbol-major |

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioFile;
use crate::propeller::IqFrame;
use crate::waveform::{read_complex64, OfdmConfig};
use crate::{Error, Result};

pub const IQ_MAGIC: &[u8; 8] = b"UDARIQ01";
pub const IQ_HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqHeader {
    pub n: u32,
    pub m: u32,
    pub carrier_freq: f64,
    pub symbol_duration: f64,
}

pub fn write_iq<W: Write>(w: &mut W, frame: &IqFrame) -> Result<()> {
    let dims = |x: usize, what| u32::try_from(x).map_err(|_| Error::Format(format!("{what} = {x} exceeds u32")));
    let mut buf = Vec::with_capacity(IQ_HEADER_LEN + 8 * frame.values.len());
    buf.extend_from_slice(IQ_MAGIC);
    buf.extend_from_slice(&dims(frame.n, "N")?.to_le_bytes());
    buf.extend_from_slice(&dims(frame.m, "M")?.to_le_bytes());
    buf.extend_from_slice(&frame.ofdm.carrier_freq.to_le_bytes());
    buf.extend_from_slice(&frame.ofdm.symbol_duration.to_le_bytes());
    for v in &frame.values {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_iq_file(path: impl AsRef<Path>, frame: &IqFrame) -> Result<()> {
    let path = path.as_ref();
    let write = || -> Result<()> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        write_iq(&mut f, frame)?;
        f.flush()?;
        Ok(())
    };
    write().map_err(|e| e.at_path(path))
}

pub fn read_iq<R: Read>(r: &mut R) -> Result<(IqHeader, Vec<Complex64>)> {
    let mut head = [0u8; IQ_HEADER_LEN];
    r.read_exact(&mut head).map_err(|_| Error::Format("truncated I/Q header".into()))?;
    if &head[..8] != IQ_MAGIC {
        return Err(Error::Format("not a UDARIQ01 file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let header = IqHeader { n: u32_at(8), m: u32_at(12), carrier_freq: f64_at(16), symbol_duration: f64_at(24) };
    let values = read_complex64(r, header.n as usize * header.m as usize)?;
    Ok((header, values))
}

pub fn read_iq_file(path: impl AsRef<Path>) -> Result<(IqHeader, Vec<Complex64>)> {
    let path = path.as_ref();
    let mut f = std::io::BufReader::new(fs::File::open(path).map_err(|e| Error::from(e).at_path(path))?);
    read_iq(&mut f).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other.at_path(path),
    })
}

/// I/Q samples as a frame of `ofdm`, after checking the header agrees.
pub fn frame_from_iq(header: &IqHeader, values: Vec<Complex64>, ofdm: &OfdmConfig, noise_variance: f64) -> Result<IqFrame> {
    let want = (ofdm.n_subcarriers, ofdm.n_symbols);
    if (header.n as usize, header.m as usize) != want {
        return Err(Error::DimensionMismatch {
            expected: format!("N×M = {}×{}", want.0, want.1),
            got: format!("{}×{}", header.n, header.m),
        });
    }
    if header.carrier_freq != ofdm.carrier_freq || header.symbol_duration != ofdm.symbol_duration {
        return Err(Error::Format("I/Q header disagrees with the sidecar waveform".into()));
    }
    let mut frame = IqFrame::zeros(ofdm);
    frame.values = values;
    frame.noise_variance = noise_variance;
    Ok(frame)
}

/// Rounds every sample to the precision stored on disk.
pub fn quantize(frame: &mut IqFrame) {
    for v in &mut frame.values {
        *v = Complex64::new(v.re as f32 as f64, v.im as f32 as f64);
    }
}

/// JSON sidecar `<stem>.meta.json` next to every I/Q file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqMeta {
    pub format: String,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub carrier_hz: f64,
    pub symbol_duration_s: f64,
    pub slow_time_interval_s: f64,
    pub range_bin_m: f64,
    pub item_index: u64,
    pub master_seed: u64,
    pub effective_seed: u64,
    /// Initial azimuth of each propeller as simulated, degrees.
    pub phi0_deg: Vec<f64>,
    /// Scenario as run, sweep overrides applied and input paths resolved.
    pub scenario: ScenarioFile,
}

pub fn sidecar_path(iq: &Path) -> PathBuf {
    iq.with_extension("meta.json")
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<IqMeta> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: cannot read sidecar: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::Modulation;

    #[test]
    fn iq_round_trip_and_size() {
        let ofdm = OfdmConfig::new(4, 4e-9, 1e10, 3, Modulation::Psk(4), 1);
        let mut frame = IqFrame::zeros(&ofdm);
        for (i, v) in frame.values.iter_mut().enumerate() {
            *v = Complex64::new(i as f64 * 0.5, -(i as f64));
        }
        let mut buf = Vec::new();
        write_iq(&mut buf, &frame).unwrap();
        assert_eq!(buf.len(), IQ_HEADER_LEN + 8 * 12);
        assert_eq!(&buf[..8], b"UDARIQ01");
        let (h, v) = read_iq(&mut buf.as_slice()).unwrap();
        assert_eq!((h.n, h.m, h.carrier_freq, h.symbol_duration), (4, 3, 1e10, 4e-9));
        assert_eq!(v, frame.values);
        let back = frame_from_iq(&h, v, &ofdm, 0.0).unwrap();
        assert_eq!(back.values, frame.values);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_iq(&mut &b"UDARIQ02\0\0\0\0"[..]).is_err());
        let ofdm = OfdmConfig::new(2, 2e-9, 1e10, 1, Modulation::Psk(1), 1);
        let mut buf = Vec::new();
        write_iq(&mut buf, &IqFrame::zeros(&ofdm)).unwrap();
        buf.pop();
        assert!(read_iq(&mut buf.as_slice()).is_err());
    }
}
