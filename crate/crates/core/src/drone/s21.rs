//! Frequency-domain body reflectivity profiles.
//!
//! A profile file is plain text:
//!
//! ```text
//! # f_hz re im
//! 9.9e9  0.81 -0.02
//! 1.0e10 0.80 -0.05
//! ```
//!
//! Rows are strictly ascending in frequency. A library is a directory of such
//! files named `az<deg>_el<deg>_beta<deg>.s21`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const S21_HEADER: &str = "# f_hz re im";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Profile {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
}

impl S21Profile {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != values.len() || freqs.is_empty() {
            return Err(Error::Format("profile needs matching, non-empty columns".into()));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) || !freqs.iter().all(|f| f.is_finite()) {
            return Err(Error::Format("profile frequencies must be finite and strictly ascending".into()));
        }
        Ok(Self { freqs, values })
    }

    /// Constant profile over `[f_lo, f_hi]`.
    pub fn flat(f_lo: f64, f_hi: f64, value: Complex64) -> Result<Self> {
        Self::new(vec![f_lo, f_hi], vec![value, value])
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Linear interpolation of the real and imaginary parts.
    pub fn interpolate(&self, f: f64) -> Result<Complex64> {
        let (lo, hi) = (self.freqs[0], *self.freqs.last().unwrap());
        if !(f >= lo && f <= hi) {
            return Err(Error::ProfileCoverage(f, lo, hi));
        }
        let j = self.freqs.partition_point(|&x| x <= f);
        if j == self.freqs.len() {
            return Ok(*self.values.last().unwrap());
        }
        let (f0, f1) = (self.freqs[j - 1], self.freqs[j]);
        let w = (f - f0) / (f1 - f0);
        Ok(self.values[j - 1] * (1.0 - w) + self.values[j] * w)
    }

    /// `S21(f₀ + n/T)` for every subcarrier.
    pub fn sample_subcarriers(&self, f0: f64, symbol_duration: f64, n: usize) -> Result<Vec<Complex64>> {
        (0..n)
            .map(|k| self.interpolate(f0 + k as f64 / symbol_duration))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == S21_HEADER => {}
            _ => return Err(Error::Format(format!("line 1: expected header `{S21_HEADER}`"))),
        }
        let mut freqs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            if line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<f64>> = (cols.len() == 3)
                .then(|| cols.iter().map(|c| c.parse().ok()).collect())
                .flatten();
            let Some(p) = parsed else {
                return Err(Error::Format(format!("line {}: expected `f_hz re im`", i + 1)));
            };
            freqs.push(p[0]);
            values.push(Complex64::new(p[1], p[2]));
        }
        Self::new(freqs, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{S21_HEADER}\n");
        for (f, v) in self.freqs.iter().zip(&self.values) {
            s.push_str(&format!("{f:.17e} {:.17e} {:.17e}\n", v.re, v.im));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_text())?)
    }
}

/// Aspect key of a library entry, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectKey {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub beta_deg: f64,
}

impl AspectKey {
    pub fn file_name(&self) -> String {
        format!("az{}_el{}_beta{}.s21", self.azimuth_deg, self.elevation_deg, self.beta_deg)
    }

    pub fn parse_file_name(name: &str) -> Option<Self> {
        let stem = name.strip_suffix(".s21")?;
        let mut parts = stem.split('_');
        let az = parts.next()?.strip_prefix("az")?.parse().ok()?;
        let el = parts.next()?.strip_prefix("el")?.parse().ok()?;
        let beta = parts.next()?.strip_prefix("beta")?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Self { azimuth_deg: az, elevation_deg: el, beta_deg: beta })
    }

    /// Euclidean distance in degrees, azimuth taken modulo 360.
    pub fn distance(&self, other: &AspectKey) -> f64 {
        let daz = (self.azimuth_deg - other.azimuth_deg).rem_euclid(360.0);
        let daz = daz.min(360.0 - daz);
        let del = self.elevation_deg - other.elevation_deg;
        let db = self.beta_deg - other.beta_deg;
        (daz * daz + del * del + db * db).sqrt()
    }
}

/// Multi-aspect set of profiles with nearest-neighbor lookup.
#[derive(Debug, Clone, Default)]
pub struct S21Library {
    entries: Vec<(AspectKey, PathBuf, S21Profile)>,
}

impl S21Library {
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut entries = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let Some(key) = path.file_name().and_then(|n| n.to_str()).and_then(AspectKey::parse_file_name) else {
                continue;
            };
            entries.push((key, path.clone(), S21Profile::load(&path)?));
        }
        // directory order is platform dependent
        entries.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(Self { entries })
    }

    pub fn insert(&mut self, key: AspectKey, profile: S21Profile) {
        self.entries.push((key, PathBuf::from(key.file_name()), profile));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Closest entry; ties go to the first in file-name order.
    pub fn nearest(&self, key: &AspectKey) -> Option<(&AspectKey, &S21Profile)> {
        self.entries
            .iter()
            .min_by(|a, b| a.0.distance(key).total_cmp(&b.0.distance(key)))
            .map(|(k, _, p)| (k, p))
    }
}
