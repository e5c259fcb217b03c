//! Static body returns.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::s21::S21Profile;
use crate::propeller::{twiddles, wrapped_range_bin, IqFrame};
use crate::waveform::{OfdmConfig, SymbolMatrix};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    #[default]
    None,
    Gaussian,
    #[serde(alias = "measurement")]
    MeasurementBased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyModelConfig {
    pub kind: BodyKind,
    /// `γ'`, replicated over subcarriers.
    pub gamma_prime: Complex64,
    /// Largest body dimension along the bistatic bisector, meters.
    pub d_max: f64,
    pub s21_profile: Option<S21Profile>,
}

impl Default for BodyModelConfig {
    fn default() -> Self {
        Self {
            kind: BodyKind::None,
            gamma_prime: Complex64::new(1.0, 0.0),
            d_max: 0.3,
            s21_profile: None,
        }
    }
}

impl BodyModelConfig {
    pub fn gaussian(gamma_prime: Complex64, d_max: f64) -> Self {
        Self { kind: BodyKind::Gaussian, gamma_prime, d_max, s21_profile: None }
    }

    pub fn measurement(gamma_prime: Complex64, d_max: f64, profile: S21Profile) -> Self {
        Self { kind: BodyKind::MeasurementBased, gamma_prime, d_max, s21_profile: Some(profile) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            BodyKind::None => Ok(()),
            _ if !(self.d_max > 0.0 && self.d_max.is_finite()) => {
                Err(Error::InvalidConfig("body d_max must be positive".into()))
            }
            BodyKind::MeasurementBased if self.s21_profile.is_none() => {
                Err(Error::InvalidConfig("measurement-based body needs an S21 profile".into()))
            }
            BodyKind::Gaussian if self.s21_profile.is_some() => {
                Err(Error::InvalidConfig("S21 profile given for a Gaussian body".into()))
            }
            _ => Ok(()),
        }
    }

    /// Effective extent `max(d_max cos(β/2), Δ)`; in forward scatter the
    /// extent collapses and the range resolution takes over.
    pub fn effective_extent(&self, beta: f64, delta: f64) -> f64 {
        (self.d_max * (beta / 2.0).cos()).max(delta)
    }
}

/// Signed distance from bin center `(μ − ½) Δ` to `r`, wrapped to one
/// fast-time period.
fn center_offset(mu: usize, r: f64, delta: f64, n: usize) -> f64 {
    let period = n as f64 * delta;
    let x = (mu as f64 - 0.5) * delta - r;
    x - period * (x / period + 0.5).floor()
}

/// Whether bin `mu` lies inside the body extent `d` around `r`,
/// `−d/2 ≤ (μ−½)Δ − r < d/2`. At the minimum extent this is exactly the
/// point-scatterer bin.
fn in_extent(mu: usize, r: f64, d: f64, delta: f64, n: usize) -> bool {
    if d <= delta {
        return wrapped_range_bin(r, delta, n) == mu;
    }
    let x = center_offset(mu, r, delta, n);
    x >= -0.5 * d && x < 0.5 * d
}

fn body_frame<F, G>(gamma: &[Complex64], envelope: G, range: F, d: &SymbolMatrix, cfg: &OfdmConfig) -> Result<IqFrame>
where
    F: Fn(usize, usize) -> f64 + Sync,
    G: Fn(usize, f64) -> f64 + Sync,
{
    cfg.validate()?;
    d.check_matches(cfg)?;
    let n_sub = cfg.n_subcarriers;
    let tw = twiddles(n_sub);
    let mut frame = IqFrame::zeros(cfg);
    frame
        .values
        .par_chunks_mut(n_sub)
        .enumerate()
        .for_each(|(m, out)| {
            let col = d.column(m);
            for (mu, y) in out.iter_mut().enumerate() {
                let r = range(mu, m);
                let g = envelope(mu, r);
                if g == 0.0 {
                    continue;
                }
                let sum: Complex64 = (0..n_sub)
                    .map(|n| {
                        let k = TAU * cfg.subcarrier_freq(n) / SPEED_OF_LIGHT;
                        gamma[n] * col[n] * tw[(n * mu) % n_sub] * Complex64::from_polar(1.0, -k * r)
                    })
                    .sum();
                *y = sum * g;
            }
        });
    Ok(frame)
}

/// Gaussian body: a point return at the body range `range(μ, m)` with a
/// Gaussian range envelope of width `d' = max(d_max cos(β/2), Δ)` centered on
/// the body, truncated to `|(μ−½)Δ − R| ≤ d'/2`. The envelope peaks at 1.
pub fn gaussian_body_returns<F>(
    body: &BodyModelConfig,
    d: &SymbolMatrix,
    cfg: &OfdmConfig,
    beta: f64,
    range: F,
) -> Result<IqFrame>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    body.validate()?;
    let n = cfg.n_subcarriers;
    let delta = cfg.range_bin();
    let width = body.effective_extent(beta, delta);
    let gamma = vec![body.gamma_prime; n];
    let envelope = |mu: usize, r: f64| {
        if !r.is_finite() || !in_extent(mu, r, width, delta, n) {
            return 0.0;
        }
        let x = center_offset(mu, r, delta, n);
        (-0.5 * x * x / (width * width)).exp()
    };
    body_frame(&gamma, envelope, range, d, cfg)
}

/// Measurement-based body: reflectivity `γ' S21(f₀ + n/T)` with the same
/// rectangular extent as the Gaussian model and a flat envelope.
pub fn measurement_body_returns<F>(
    body: &BodyModelConfig,
    d: &SymbolMatrix,
    cfg: &OfdmConfig,
    beta: f64,
    range: F,
) -> Result<IqFrame>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    body.validate()?;
    let profile = body
        .s21_profile
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("measurement-based body needs an S21 profile".into()))?;
    let n = cfg.n_subcarriers;
    let delta = cfg.range_bin();
    let width = body.effective_extent(beta, delta);
    let gamma: Vec<Complex64> = profile
        .sample_subcarriers(cfg.carrier_freq, cfg.symbol_duration, n)?
        .into_iter()
        .map(|s| body.gamma_prime * s)
        .collect();
    let envelope = |mu: usize, r: f64| {
        if r.is_finite() && in_extent(mu, r, width, delta, n) {
            1.0
        } else {
            0.0
        }
    };
    body_frame(&gamma, envelope, range, d, cfg)
}
