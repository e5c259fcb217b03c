//! OFDM waveform: subcarrier grid, modulation symbols, transmit samples and
//! the binary symbol-matrix file format.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};
use crate::{Error, Result, SPEED_OF_LIGHT};

pub const SYMBOL_FILE_MAGIC: &[u8; 8] = b"UDARSYM1";
pub const SYMBOL_FILE_HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    /// k-ary PSK on the k-th roots of unity. `Psk(1)` is the unmodulated
    /// all-ones sequence, whose fast-time samples form a single-sample pulse.
    Psk(u32),
    /// Square k-QAM normalized to unit mean power.
    Qam(u32),
    /// Independent uniform phases on the unit circle.
    UnitRandomPhase,
}

impl Modulation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Modulation::Psk(k) if k >= 1 => Ok(()),
            Modulation::Qam(k) if k >= 4 && is_square_qam(k) => Ok(()),
            Modulation::UnitRandomPhase => Ok(()),
            other => Err(Error::UnsupportedModulation(format!("{other:?}"))),
        }
    }

    /// Parses `psk<k>`, `bpsk`, `qpsk`, `qam<k>` or `random_phase`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let m = match lower.as_str() {
            "bpsk" => Modulation::Psk(2),
            "qpsk" => Modulation::Psk(4),
            "random_phase" => Modulation::UnitRandomPhase,
            s => {
                let order = |rest: &str| rest.parse::<u32>().map_err(|_| Error::UnsupportedModulation(name.to_string()));
                if let Some(rest) = s.strip_prefix("psk") {
                    Modulation::Psk(order(rest)?)
                } else if let Some(rest) = s.strip_prefix("qam") {
                    Modulation::Qam(order(rest)?)
                } else {
                    return Err(Error::UnsupportedModulation(name.to_string()));
                }
            }
        };
        m.validate()?;
        Ok(m)
    }

    pub fn name(&self) -> String {
        match self {
            Modulation::Psk(k) => format!("psk{k}"),
            Modulation::Qam(k) => format!("qam{k}"),
            Modulation::UnitRandomPhase => "random_phase".into(),
        }
    }

    pub fn is_unit_modulus(&self) -> bool {
        !matches!(self, Modulation::Qam(_))
    }
}

fn is_square_qam(k: u32) -> bool {
    let s = (k as f64).sqrt().round() as u32;
    s * s == k && s.is_power_of_two()
}

/// OFDM frame parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// Number of subcarriers `N`.
    pub n_subcarriers: usize,
    /// Useful symbol duration `T`, seconds.
    pub symbol_duration: f64,
    /// Carrier (lowest subcarrier) frequency `f₀`, Hz.
    pub carrier_freq: f64,
    /// Number of simulated symbols `M`.
    pub n_symbols: usize,
    pub modulation: Modulation,
    pub seed: u64,
    /// Simulated symbols are every `symbol_spacing`-th symbol of a contiguous
    /// stream, so symbol `m` starts at `m · symbol_spacing · T`. 1 means
    /// back-to-back symbols.
    pub symbol_spacing: u64,
    /// Transmit the same symbol column in every slot (periodic sounding).
    pub repeat_symbols: bool,
}

impl OfdmConfig {
    pub fn new(
        n_subcarriers: usize,
        symbol_duration: f64,
        carrier_freq: f64,
        n_symbols: usize,
        modulation: Modulation,
        seed: u64,
    ) -> Self {
        Self {
            n_subcarriers,
            symbol_duration,
            carrier_freq,
            n_symbols,
            modulation,
            seed,
            symbol_spacing: 1,
            repeat_symbols: false,
        }
    }

    pub fn with_symbol_spacing(mut self, spacing: u64) -> Self {
        self.symbol_spacing = spacing;
        self
    }

    pub fn with_repeat_symbols(mut self, repeat: bool) -> Self {
        self.repeat_symbols = repeat;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.n_symbols == 0 {
            return Err(Error::InvalidConfig(
                "subcarrier and symbol counts must be positive".into(),
            ));
        }
        if !(self.symbol_duration > 0.0 && self.symbol_duration.is_finite()) {
            return Err(Error::InvalidConfig("symbol duration must be positive".into()));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return Err(Error::InvalidConfig("carrier frequency must be positive".into()));
        }
        if self.bandwidth() > self.carrier_freq {
            return Err(Error::InvalidConfig(format!(
                "bandwidth {:.3e} Hz exceeds carrier {:.3e} Hz",
                self.bandwidth(),
                self.carrier_freq
            )));
        }
        if self.symbol_spacing == 0 {
            return Err(Error::InvalidConfig("symbol spacing must be at least 1".into()));
        }
        self.modulation.validate()
    }

    /// `f_s = N / T`.
    pub fn sampling_freq(&self) -> f64 {
        self.n_subcarriers as f64 / self.symbol_duration
    }

    pub fn bandwidth(&self) -> f64 {
        self.sampling_freq()
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        1.0 / self.symbol_duration
    }

    /// Bistatic range covered by one fast-time sample, `c T / N`.
    pub fn range_bin(&self) -> f64 {
        SPEED_OF_LIGHT * self.symbol_duration / self.n_subcarriers as f64
    }

    /// Time between consecutive simulated symbols.
    pub fn slow_time_interval(&self) -> f64 {
        self.symbol_spacing as f64 * self.symbol_duration
    }

    /// Absolute time of fast-time sample `mu` in simulated symbol `m`.
    pub fn sample_time(&self, mu: usize, m: usize) -> f64 {
        (m as f64 * self.symbol_spacing as f64 + mu as f64 / self.n_subcarriers as f64)
            * self.symbol_duration
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn subcarrier_freq(&self, n: usize) -> f64 {
        self.carrier_freq + n as f64 / self.symbol_duration
    }
}

/// `ω_n = 2π (f₀ + n/T)` for `n = 0..N`.
pub fn subcarrier_angular_freqs(cfg: &OfdmConfig) -> Vec<f64> {
    (0..cfg.n_subcarriers)
        .map(|n| TAU * cfg.subcarrier_freq(n))
        .collect()
}

/// Complex modulation symbols `D(n, m)`, stored with `n` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    n: usize,
    m: usize,
    values: Vec<Complex64>,
    /// `None` for externally supplied matrices.
    pub modulation: Option<Modulation>,
    pub seed: Option<u64>,
}

impl SymbolMatrix {
    /// Wraps a user-supplied matrix (e.g. coefficients recorded from a real
    /// transmitter). `values[m * n_subcarriers + n]` is `D(n, m)`.
    pub fn from_values(n_subcarriers: usize, n_symbols: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n_subcarriers * n_symbols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", n_subcarriers * n_symbols),
                got: format!("{}", values.len()),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidConfig("symbol values must be finite".into()));
        }
        Ok(Self {
            n: n_subcarriers,
            m: n_symbols,
            values,
            modulation: None,
            seed: None,
        })
    }

    /// All-ones matrix.
    pub fn ones(n_subcarriers: usize, n_symbols: usize) -> Self {
        Self {
            n: n_subcarriers,
            m: n_symbols,
            values: vec![Complex64::new(1.0, 0.0); n_subcarriers * n_symbols],
            modulation: Some(Modulation::Psk(1)),
            seed: None,
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n
    }

    pub fn n_symbols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.values[m * self.n + n]
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.n..(m + 1) * self.n]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn check_matches(&self, cfg: &OfdmConfig) -> Result<()> {
        if self.n != cfg.n_subcarriers || self.m != cfg.n_symbols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", cfg.n_subcarriers, cfg.n_symbols),
                got: format!("{}x{}", self.n, self.m),
            });
        }
        Ok(())
    }
}

/// Draws `D(n, m)` deterministically from `cfg.seed`.
pub fn generate_symbols(cfg: &OfdmConfig) -> Result<SymbolMatrix> {
    cfg.modulation.validate()?;
    let (n, m) = (cfg.n_subcarriers, cfg.n_symbols);
    let mut rng = stream_rng(cfg.seed, Stream::Symbols, 0);
    let columns = if cfg.repeat_symbols { 1 } else { m };
    let mut drawn = Vec::with_capacity(n * columns);
    for _ in 0..n * columns {
        drawn.push(draw_symbol(cfg.modulation, &mut rng));
    }
    let values = if cfg.repeat_symbols {
        drawn.iter().copied().cycle().take(n * m).collect()
    } else {
        drawn
    };
    Ok(SymbolMatrix {
        n,
        m,
        values,
        modulation: Some(cfg.modulation),
        seed: Some(cfg.seed),
    })
}

fn draw_symbol<R: Rng>(modulation: Modulation, rng: &mut R) -> Complex64 {
    match modulation {
        Modulation::Psk(1) => Complex64::new(1.0, 0.0),
        Modulation::Psk(k) => {
            let idx = rng.random_range(0..k);
            Complex64::from_polar(1.0, TAU * idx as f64 / k as f64)
        }
        Modulation::Qam(k) => {
            let side = (k as f64).sqrt().round() as u32;
            let scale = (2.0 * (k as f64 - 1.0) / 3.0).sqrt();
            let i = rng.random_range(0..side) as f64;
            let q = rng.random_range(0..side) as f64;
            let off = side as f64 - 1.0;
            Complex64::new((2.0 * i - off) / scale, (2.0 * q - off) / scale)
        }
        Modulation::UnitRandomPhase => Complex64::from_polar(1.0, rng.random_range(0.0..TAU)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// `ω_n = 2π (f₀ + n/T)` in the exponent.
    Passband,
    /// `ω_n` replaced by `2π n / T`.
    Baseband,
}

/// `x(μ, m) = Σ_n D(n, m) e^{j ω_n (m + μ/N) T}`.
///
/// The time argument is the contiguous-stream symbol index, i.e. the
/// configured symbol spacing is honored.
pub fn tx_baseband_sample(
    d: &SymbolMatrix,
    cfg: &OfdmConfig,
    mu: usize,
    m: usize,
    carrier: Carrier,
) -> Result<Complex64> {
    d.check_matches(cfg)?;
    if mu >= cfg.n_subcarriers {
        return Err(Error::IndexOutOfRange {
            what: "mu",
            index: mu,
            limit: cfg.n_subcarriers,
        });
    }
    if m >= cfg.n_symbols {
        return Err(Error::IndexOutOfRange {
            what: "m",
            index: m,
            limit: cfg.n_symbols,
        });
    }
    let n_sub = cfg.n_subcarriers;
    let sum = match carrier {
        Carrier::Passband => {
            let t = cfg.sample_time(mu, m);
            (0..n_sub)
                .map(|n| d.get(n, m) * Complex64::from_polar(1.0, TAU * cfg.subcarrier_freq(n) * t))
                .sum()
        }
        // e^{j2πn m'} = 1 for integer symbol index m', only μ/N remains.
        Carrier::Baseband => (0..n_sub)
            .map(|n| {
                let k = (n * mu) % n_sub;
                d.get(n, m) * Complex64::from_polar(1.0, TAU * k as f64 / n_sub as f64)
            })
            .sum(),
    };
    Ok(sum)
}

/// Baseband fast-time samples of every symbol via an inverse FFT per column,
/// `values[m * N + μ]`.
pub fn tx_baseband_frame(d: &SymbolMatrix) -> Vec<Complex64> {
    let n = d.n;
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = d.values.clone();
    for col in out.chunks_mut(n) {
        ifft.process(col);
    }
    out
}

pub fn write_symbol_file(path: impl AsRef<Path>, d: &SymbolMatrix) -> Result<()> {
    let path = path.as_ref();
    let write = || -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write_symbols(&mut w, d)?;
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| e.at_path(path))
}

pub fn write_symbols<W: Write>(w: &mut W, d: &SymbolMatrix) -> Result<()> {
    let mut header = [0u8; SYMBOL_FILE_HEADER_LEN];
    header[..8].copy_from_slice(SYMBOL_FILE_MAGIC);
    header[8..12].copy_from_slice(&(d.n as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(d.m as u32).to_le_bytes());
    w.write_all(&header)?;
    for v in &d.values {
        w.write_all(&(v.re as f32).to_le_bytes())?;
        w.write_all(&(v.im as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_symbol_file(path: impl AsRef<Path>) -> Result<SymbolMatrix> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::from(e).at_path(path))?;
    read_symbols(&mut BufReader::new(f)).map_err(|e| e.at_path(path))
}

pub fn read_symbols<R: Read>(r: &mut R) -> Result<SymbolMatrix> {
    let mut header = [0u8; SYMBOL_FILE_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("symbol file shorter than its header".into()))?;
    if &header[..8] != SYMBOL_FILE_MAGIC {
        return Err(Error::Format("bad symbol file magic".into()));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let values = read_complex64(r, n * m)?;
    SymbolMatrix::from_values(n, m, values)
}

pub(crate) fn read_complex64<R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format(format!("expected {count} complex64 samples")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after sample block".into()));
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}
