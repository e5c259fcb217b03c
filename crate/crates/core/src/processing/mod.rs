//! Signature products: channel estimate, range-Doppler maps, Doppler spectra
//! and scalar micro-Doppler metrics.

pub mod export;
mod metrics;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

pub use export::{read_map, write_map, write_map_csv};
pub use metrics::{
    dc_fraction, detect_peaks, doppler_spectrum, local_maxima, pearson_correlation, signature_metrics, stft,
    DopplerSpectrum, SignatureMetrics, Spectrogram, EDGE_DROP_DB, MIN_SERIES_LEN, PEAK_MIN_SEPARATION, PEAK_THRESHOLD_DB,
};

use crate::propeller::IqFrame;
use crate::waveform::SymbolMatrix;
use crate::{Error, Result};

/// dB floor of exported magnitudes.
pub const DB_FLOOR: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rect,
    #[default]
    Hann,
}

impl Window {
    /// Symmetric window of length `n`.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann if n <= 1 => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Window::Rect => "rect",
            Window::Hann => "hann",
        }
    }
}

/// Per-subcarrier channel `H(n, m)`, `values[m * n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub n: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.values[m * self.n + n]
    }
}

/// DFT of every symbol over fast time, divided by `N D(n, m)`.
pub fn channel_estimate(frame: &IqFrame, d: &SymbolMatrix) -> Result<ChannelMatrix> {
    d.check_matches(&frame.ofdm)?;
    if frame.values.len() != frame.n * frame.m {
        return Err(Error::DimensionMismatch {
            expected: format!("{} samples", frame.n * frame.m),
            got: format!("{}", frame.values.len()),
        });
    }
    for m in 0..d.n_symbols() {
        for (n, v) in d.column(m).iter().enumerate() {
            if v.norm() == 0.0 {
                return Err(Error::ZeroSymbol { n, m });
            }
        }
    }
    let n = frame.n;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut values = frame.values.clone();
    for (m, col) in values.chunks_mut(n).enumerate() {
        fft.process(col);
        for (k, v) in col.iter_mut().enumerate() {
            *v /= d.get(k, m) * n as f64;
        }
    }
    Ok(ChannelMatrix { n, m: frame.m, values })
}

/// Range profiles `p(k, m) = Σ_n H(n, m) e^{j 2π n k / N}`, `values[m * N + k]`.
pub fn range_profiles(h: &ChannelMatrix) -> Vec<Complex64> {
    let ifft = FftPlanner::new().plan_fft_inverse(h.n);
    let mut values = h.values.clone();
    for col in values.chunks_mut(h.n) {
        ifft.process(col);
    }
    values
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeDopplerOptions {
    pub window: Window,
    /// Keep every `subsample`-th symbol before the Doppler FFT.
    pub subsample: usize,
    /// Doppler FFT length; zero-padded when larger than the symbol count.
    pub doppler_fft_len: Option<usize>,
}

impl Default for RangeDopplerOptions {
    fn default() -> Self {
        Self { window: Window::Hann, subsample: 1, doppler_fft_len: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub window: Window,
    pub range_fft_len: usize,
    pub doppler_fft_len: usize,
    pub subsample: usize,
    /// Slow-time interval after decimation, seconds.
    pub slow_time_interval: f64,
}

/// Magnitude over bistatic range × Doppler, rows are range bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub n_range: usize,
    pub n_doppler: usize,
    /// Linear magnitude, `magnitude[r * n_doppler + d]`.
    pub magnitude: Vec<f64>,
    /// dB relative to the map peak, floored at [`DB_FLOOR`].
    pub values_db: Vec<f64>,
    pub range_axis: Vec<f64>,
    pub doppler_axis: Vec<f64>,
    pub meta: MapMetadata,
}

impl RangeDopplerMap {
    pub fn db_at(&self, r: usize, d: usize) -> f64 {
        self.values_db[r * self.n_doppler + d]
    }

    pub fn peak(&self) -> (usize, usize) {
        let idx = argmax(&self.magnitude);
        (idx / self.n_doppler, idx % self.n_doppler)
    }

    pub fn doppler_bin_width(&self) -> f64 {
        1.0 / (self.n_doppler as f64 * self.meta.slow_time_interval)
    }

    /// Doppler power profile summed over a set of range bins.
    pub fn doppler_profile<I: IntoIterator<Item = usize>>(&self, range_bins: I) -> Result<Vec<f64>> {
        let bins = self.checked_bins(range_bins)?;
        let mut out = vec![0.0; self.n_doppler];
        for r in bins {
            for (o, v) in out.iter_mut().zip(&self.magnitude[r * self.n_doppler..(r + 1) * self.n_doppler]) {
                *o += v * v;
            }
        }
        Ok(out)
    }

    fn checked_bins<I: IntoIterator<Item = usize>>(&self, range_bins: I) -> Result<Vec<usize>> {
        let bins: Vec<usize> = range_bins.into_iter().collect();
        if bins.is_empty() {
            return Err(Error::MetricsUnavailable("no range bins selected".into()));
        }
        if let Some(&r) = bins.iter().find(|&&r| r >= self.n_range) {
            return Err(Error::IndexOutOfRange { what: "range bin", index: r, limit: self.n_range });
        }
        Ok(bins)
    }

    /// Power per range bin summed over Doppler.
    pub fn range_profile(&self) -> Vec<f64> {
        self.magnitude
            .chunks(self.n_doppler)
            .map(|row| row.iter().map(|v| v * v).sum())
            .collect()
    }

    /// Metrics of the Doppler profile over `range_bins`; the strongest of
    /// those bins is reported as the peak range bin.
    pub fn signature_metrics<I: IntoIterator<Item = usize>>(&self, range_bins: I) -> Result<SignatureMetrics> {
        let bins = self.checked_bins(range_bins)?;
        let profile = self.doppler_profile(bins.iter().copied())?;
        let mut m = signature_metrics(&self.doppler_axis, &profile)?;
        let rp = self.range_profile();
        let local: Vec<f64> = bins.iter().map(|&r| rp[r]).collect();
        m.peak_range_bin = Some(bins[argmax(&local)]);
        Ok(m)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

pub(crate) fn to_db(values: &[f64], reference: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            if reference > 0.0 && v > 0.0 {
                (20.0 * (v / reference).log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect()
}

/// `fftshift`-ordered frequency axis of an `n`-point DFT at sample interval `dt`.
pub fn shifted_freq_axis(n: usize, dt: f64) -> Vec<f64> {
    let half = n / 2;
    (0..n).map(|j| (j as f64 - half as f64) / (n as f64 * dt)).collect()
}

pub(crate) fn fftshift<T: Copy>(v: &mut [T]) {
    let n = v.len();
    v.rotate_left(n - n / 2);
}

pub(crate) fn windowed_spectrum(series: &[Complex64], window: Window, fft_len: usize, fft: &dyn Fft<f64>) -> Vec<Complex64> {
    let w = window.coefficients(series.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
    for (b, (x, c)) in buf.iter_mut().zip(series.iter().zip(&w)) {
        *b = x * c;
    }
    fft.process(&mut buf);
    fftshift(&mut buf);
    buf
}

/// Channel estimate, range IDFT per symbol, windowed Doppler FFT per range
/// bin.
pub fn range_doppler(frame: &IqFrame, d: &SymbolMatrix, opts: &RangeDopplerOptions) -> Result<RangeDopplerMap> {
    if opts.subsample == 0 {
        return Err(Error::InvalidConfig("subsample must be at least 1".into()));
    }
    let h = channel_estimate(frame, d)?;
    let profiles = range_profiles(&h);
    let n = h.n;
    let kept: Vec<usize> = (0..h.m).step_by(opts.subsample).collect();
    let n_slow = kept.len();
    let fft_len = opts.doppler_fft_len.unwrap_or(n_slow).max(n_slow);
    let fft = FftPlanner::new().plan_fft_forward(fft_len);
    let mut magnitude = Vec::with_capacity(n * fft_len);
    for k in 0..n {
        let series: Vec<Complex64> = kept.iter().map(|&m| profiles[m * n + k]).collect();
        magnitude.extend(windowed_spectrum(&series, opts.window, fft_len, fft.as_ref()).iter().map(|v| v.norm()));
    }
    let peak = magnitude.iter().copied().fold(0.0, f64::max);
    let slow = frame.ofdm.slow_time_interval() * opts.subsample as f64;
    let delta = frame.ofdm.range_bin();
    Ok(RangeDopplerMap {
        n_range: n,
        n_doppler: fft_len,
        values_db: to_db(&magnitude, peak),
        magnitude,
        range_axis: (0..n).map(|k| k as f64 * delta).collect(),
        doppler_axis: shifted_freq_axis(fft_len, slow),
        meta: MapMetadata {
            window: opts.window,
            range_fft_len: n,
            doppler_fft_len: fft_len,
            subsample: opts.subsample,
            slow_time_interval: slow,
        },
    })
}

/// Slow-time series of range bin `k` after channel estimation.
pub fn range_bin_series(frame: &IqFrame, d: &SymbolMatrix, k: usize) -> Result<Vec<Complex64>> {
    if k >= frame.n {
        return Err(Error::IndexOutOfRange { what: "range bin", index: k, limit: frame.n });
    }
    let profiles = range_profiles(&channel_estimate(frame, d)?);
    Ok((0..frame.m).map(|m| profiles[m * frame.n + k]).collect())
}
