//! Doppler spectra and micro-Doppler metrics.
//!
//! * Spike spacing: median distance between spectral peaks no more than
//!   [`PEAK_THRESHOLD_DB`] below the strongest, at least
//!   [`PEAK_MIN_SEPARATION`] bins apart.
//! * Doppler spread: width of the band where the envelope through all local
//!   maxima stays within [`EDGE_DROP_DB`] of the strongest peak. The blade-tip
//!   flashes at the band edges sit roughly 12 dB below the spectral maximum,
//!   so this edge tracks `4 ω L_B cos(β/2) sin ψ / λ₀`; the outermost −30 dB
//!   peak overshoots it by several percent.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{shifted_freq_axis, windowed_spectrum, Window, DB_FLOOR};
use crate::{Error, Result};

pub const PEAK_THRESHOLD_DB: f64 = -30.0;
pub const PEAK_MIN_SEPARATION: usize = 2;
pub const EDGE_DROP_DB: f64 = 12.0;
/// Shortest series accepted for metric extraction.
pub const MIN_SERIES_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureMetrics {
    pub spike_spacing_hz: f64,
    pub doppler_spread_hz: f64,
    /// Share of energy at zero Doppler.
    pub dc_fraction: f64,
    pub peak_range_bin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSpectrum {
    pub freqs: Vec<f64>,
    /// Power `|X(f)|²`.
    pub power: Vec<f64>,
    /// Time-domain DC fraction of the input series.
    pub dc_fraction: f64,
}

impl DopplerSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    pub fn db(&self) -> Vec<f64> {
        power_db(&self.power)
    }

    pub fn metrics(&self) -> Result<SignatureMetrics> {
        let mut m = signature_metrics(&self.freqs, &self.power)?;
        m.dc_fraction = self.dc_fraction;
        Ok(m)
    }
}

fn power_db(power: &[f64]) -> Vec<f64> {
    let max = power.iter().copied().fold(0.0, f64::max);
    power
        .iter()
        .map(|&p| if max > 0.0 && p > 0.0 { (10.0 * (p / max).log10()).max(DB_FLOOR) } else { DB_FLOOR })
        .collect()
}

/// `|Σ x|² / (M Σ |x|²)`: 1 for a constant series, 1/M for a pure tone on a
/// non-zero DFT bin.
pub fn dc_fraction(series: &[Complex64]) -> f64 {
    let energy: f64 = series.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return 0.0;
    }
    let dc: Complex64 = series.iter().sum();
    dc.norm_sqr() / (series.len() as f64 * energy)
}

/// Windowed, `fftshift`-ordered power spectrum of a slow-time series.
pub fn doppler_spectrum(
    series: &[Complex64],
    sample_interval: f64,
    window: Window,
    fft_len: Option<usize>,
) -> Result<DopplerSpectrum> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::MetricsUnavailable(format!(
            "series of {} samples, need at least {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    if !(sample_interval > 0.0) {
        return Err(Error::InvalidConfig("sample interval must be positive".into()));
    }
    let n = fft_len.unwrap_or(series.len()).max(series.len());
    let fft = FftPlanner::new().plan_fft_forward(n);
    let spec = windowed_spectrum(series, window, n, fft.as_ref());
    Ok(DopplerSpectrum {
        freqs: shifted_freq_axis(n, sample_interval),
        power: spec.iter().map(|v| v.norm_sqr()).collect(),
        dc_fraction: dc_fraction(series),
    })
}

/// Indices of local maxima above the dB floor. Plateaus report their first
/// sample; the ends count when they exceed their single neighbor.
pub fn local_maxima(power: &[f64]) -> Vec<usize> {
    let max = power.iter().copied().fold(0.0, f64::max);
    let floor = max * 10f64.powf(DB_FLOOR / 10.0);
    let n = power.len();
    (0..n)
        .filter(|&i| {
            let p = power[i];
            let left = if i == 0 { f64::NEG_INFINITY } else { power[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { power[i + 1] };
            p > floor && p > left && p >= right
        })
        .collect()
}

/// Local maxima within `threshold_db` of the strongest, strongest first
/// kept when two are closer than `min_separation` bins. Sorted by index.
pub fn detect_peaks(power: &[f64], threshold_db: f64, min_separation: usize) -> Vec<usize> {
    let max = power.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let thr = max * 10f64.powf(threshold_db / 10.0);
    let mut cand: Vec<usize> = local_maxima(power).into_iter().filter(|&i| power[i] >= thr).collect();
    cand.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in cand {
        if kept.iter().all(|&k| k.abs_diff(i) >= min_separation) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Frequency where the dB line between two maxima crosses `thr_db`.
fn crossing(f_in: f64, db_in: f64, f_out: f64, db_out: f64, thr_db: f64) -> f64 {
    if db_in == db_out {
        return f_in;
    }
    f_in + (f_out - f_in) * (db_in - thr_db) / (db_in - db_out)
}

/// Spike spacing and Doppler spread of a power spectrum on `freqs`.
pub fn signature_metrics(freqs: &[f64], power: &[f64]) -> Result<SignatureMetrics> {
    if freqs.len() != power.len() || freqs.len() < 2 {
        return Err(Error::MetricsUnavailable("spectrum too short".into()));
    }
    let peaks = detect_peaks(power, PEAK_THRESHOLD_DB, PEAK_MIN_SEPARATION);
    if peaks.len() < 2 {
        return Err(Error::MetricsUnavailable(format!("{} spectral peak(s) detected, need 2", peaks.len())));
    }
    let spacing = median(peaks.windows(2).map(|w| freqs[w[1]] - freqs[w[0]]).collect());

    let db = power_db(power);
    let maxima = local_maxima(power);
    let thr = -EDGE_DROP_DB;
    let above: Vec<usize> = (0..maxima.len()).filter(|&j| db[maxima[j]] >= thr).collect();
    let (first, last) = (above[0], *above.last().unwrap());
    let upper = match maxima.get(last + 1) {
        Some(&next) => crossing(freqs[maxima[last]], db[maxima[last]], freqs[next], db[next], thr),
        None => freqs[maxima[last]],
    };
    let lower = match first.checked_sub(1).map(|j| maxima[j]) {
        Some(prev) => crossing(freqs[maxima[first]], db[maxima[first]], freqs[prev], db[prev], thr),
        None => freqs[maxima[first]],
    };
    let dc = freqs.iter().position(|&f| f == 0.0).map_or(0.0, |z| power[z] / power.iter().sum::<f64>());
    Ok(SignatureMetrics {
        spike_spacing_hz: spacing,
        doppler_spread_hz: upper - lower,
        dc_fraction: dc,
        peak_range_bin: None,
    })
}

/// Pearson correlation of two equally long real sequences.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: format!("two sequences of equal length ≥ 2 (first has {})", a.len()),
            got: format!("{}", b.len()),
        });
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Short-time spectra on sliding windows, `power[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Center time of every frame, seconds.
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub power: Vec<Vec<f64>>,
}

pub fn stft(series: &[Complex64], sample_interval: f64, window_len: usize, hop: usize, window: Window) -> Result<Spectrogram> {
    if hop == 0 || window_len > series.len() {
        return Err(Error::InvalidConfig("STFT needs hop ≥ 1 and window no longer than the series".into()));
    }
    let mut times = Vec::new();
    let mut power = Vec::new();
    let mut freqs = Vec::new();
    let mut start = 0;
    while start + window_len <= series.len() {
        let s = doppler_spectrum(&series[start..start + window_len], sample_interval, window, None)?;
        times.push((start as f64 + 0.5 * (window_len - 1) as f64) * sample_interval);
        freqs = s.freqs;
        power.push(s.power);
        start += hop;
    }
    Ok(Spectrogram { times, freqs, power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn dc_fraction_limits() {
        let c = vec![Complex64::new(2.0, 1.0); 16];
        assert!((dc_fraction(&c) - 1.0).abs() < 1e-15);
        let tone: Vec<Complex64> = (0..16).map(|m| Complex64::from_polar(1.0, TAU * 3.0 * m as f64 / 16.0)).collect();
        assert!(dc_fraction(&tone) < 1e-28);
    }

    #[test]
    fn comb_spacing_and_spread() {
        // lines every 8 bins from -40 to +40 bins, flat top
        let n = 256;
        let dt = 1e-3;
        let series: Vec<Complex64> = (0..n)
            .map(|m| (-5..=5).map(|k| Complex64::from_polar(1.0, TAU * (8 * k) as f64 * m as f64 / n as f64)).sum())
            .collect();
        let s = doppler_spectrum(&series, dt, Window::Hann, None).unwrap();
        let m = s.metrics().unwrap();
        let bin = s.bin_width();
        assert!((m.spike_spacing_hz - 8.0 * bin).abs() < 1e-9);
        // flat comb: outermost lines are the edges
        assert!((m.doppler_spread_hz - 80.0 * bin).abs() < 1e-9, "{}", m.doppler_spread_hz / bin);
    }

    #[test]
    fn too_short_series() {
        let s = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(doppler_spectrum(&s, 1.0, Window::Hann, None), Err(Error::MetricsUnavailable(_))));
        let s = vec![Complex64::new(1.0, 0.0); 16];
        let spec = doppler_spectrum(&s, 1.0, Window::Rect, None).unwrap();
        assert!(matches!(spec.metrics(), Err(Error::MetricsUnavailable(_))));
    }

    #[test]
    fn peak_separation_rule() {
        let p = [0.0, 1.0, 0.5, 0.9, 0.0, 0.0, 0.8, 0.0];
        assert_eq!(detect_peaks(&p, -30.0, 2), vec![1, 3, 6]);
        assert_eq!(detect_peaks(&p, -30.0, 3), vec![1, 6]);
        assert_eq!(detect_peaks(&p, -0.5, 2), vec![1, 3]);
    }

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 4.0, 3.0];
        assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson_correlation(&a, &[1.0; 4]), Err(Error::ZeroVariance)));
        assert!(pearson_correlation(&a, &[1.0; 3]).is_err());
    }

    #[test]
    fn stft_frames() {
        let s: Vec<Complex64> = (0..64).map(|m| Complex64::from_polar(1.0, 0.3 * m as f64)).collect();
        let sg = stft(&s, 1e-3, 16, 8, Window::Hann).unwrap();
        assert_eq!(sg.power.len(), 7);
        assert_eq!(sg.freqs.len(), 16);
        assert!((sg.times[0] - 7.5e-3).abs() < 1e-15);
    }
}
