//! Multi-propeller drone: propeller composition, body, vibration and noise.
//!
//! The total return is `Σ_p y_p + y_body + z`. Every propeller is evaluated
//! with its own angles; the body return uses the drone center as a single
//! extended scatterer. Randomness is split into independent streams (initial
//! azimuths, vibration, noise) derived from the seeds, so the results do not
//! depend on evaluation order or thread count.

pub mod body;
pub mod s21;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use body::{gaussian_body_returns, measurement_body_returns, BodyKind, BodyModelConfig};
pub use s21::{AspectKey, S21Library, S21Profile};

use crate::geometry::{derive_angles, BistaticLink, PropellerGeometry, Vec3};
use crate::propeller::{propeller_returns, AngleTrack, IqFrame, PropellerReturnParams, Reflectivity};
use crate::rng::{stream_rng, Stream};
use crate::waveform::{OfdmConfig, SymbolMatrix};
use crate::{Error, Result};

/// One propeller mounted on the drone. `position` is the rotation center
/// relative to the drone center.
#[derive(Debug, Clone, PartialEq)]
pub struct DronePropeller {
    pub position: Vec3,
    pub omega_vec: Vec3,
    /// Initial azimuth; drawn uniformly in `[0, 2π)` when `None`.
    pub phi0: Option<f64>,
    pub n_blades: usize,
    pub blade_length: f64,
    pub reflectivity: Reflectivity,
}

impl DronePropeller {
    /// Propeller spinning about `axis` at `rpm`.
    pub fn new(position: Vec3, axis: Vec3, rpm: f64, n_blades: usize, blade_length: f64) -> Self {
        Self {
            position,
            omega_vec: axis.normalize() * rpm_to_rad_s(rpm),
            phi0: None,
            n_blades,
            blade_length,
            reflectivity: Reflectivity::Constant(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn with_phi0(mut self, phi0: f64) -> Self {
        self.phi0 = Some(phi0);
        self
    }

    pub fn geometry(&self, drone_center: &Vec3, phi0: f64) -> PropellerGeometry {
        PropellerGeometry {
            rotation_center: drone_center + self.position,
            omega_vec: self.omega_vec,
            phi0,
            n_blades: self.n_blades,
            blade_length: self.blade_length,
        }
    }
}

pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    TAU * rpm / 60.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibrationConfig {
    /// Largest displacement per step (one step per symbol), meters.
    pub d0: f64,
    pub enabled: bool,
    pub seed: u64,
    /// Also shift the propeller rotation centers by the walk.
    pub apply_to_propellers: bool,
}

impl Default for VibrationConfig {
    fn default() -> Self {
        Self { d0: 0.0, enabled: false, seed: 0, apply_to_propellers: false }
    }
}

/// Random walk `D(0) = 0`, `D(t) = D(t−1) + D₀ U(−1, 1)`.
pub fn vibration_walk(vib: &VibrationConfig, n_steps: usize) -> Result<Vec<f64>> {
    if !(vib.d0 >= 0.0 && vib.d0.is_finite()) {
        return Err(Error::InvalidConfig("vibration d0 must be non-negative".into()));
    }
    let mut rng = stream_rng(vib.seed, Stream::Vibration, 0);
    let mut out = Vec::with_capacity(n_steps);
    let mut x = 0.0;
    for step in 0..n_steps {
        if step > 0 {
            x += vib.d0 * rng.random_range(-1.0..=1.0);
        }
        out.push(x);
    }
    Ok(out)
}

/// Adds circular complex Gaussian noise of total per-sample variance
/// `variance` (`variance/2` per component).
pub fn add_noise(frame: &IqFrame, variance: f64, seed: u64) -> Result<IqFrame> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidConfig("noise variance must be non-negative".into()));
    }
    let mut out = frame.clone();
    if variance == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite sigma");
    let mut rng = stream_rng(seed, Stream::Noise, 0);
    for v in &mut out.values {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *v += Complex64::new(re, im);
    }
    out.noise_variance += variance;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroneConfig {
    pub link: BistaticLink,
    /// Constant drone velocity, m/s.
    pub velocity: Vec3,
    pub propellers: Vec<DronePropeller>,
    pub body: BodyModelConfig,
    pub vibration: VibrationConfig,
    pub noise_variance: f64,
    pub seed: u64,
}

impl DroneConfig {
    pub fn new(link: BistaticLink) -> Self {
        Self {
            link,
            velocity: Vec3::zeros(),
            propellers: Vec::new(),
            body: BodyModelConfig::default(),
            vibration: VibrationConfig::default(),
            noise_variance: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        if !self.velocity.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("velocity must be finite".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidConfig("noise variance must be non-negative".into()));
        }
        self.body.validate()
    }

    /// Initial azimuths, fixed ones kept and missing ones drawn per index.
    pub fn initial_azimuths(&self) -> Vec<f64> {
        self.propellers
            .iter()
            .enumerate()
            .map(|(p, prop)| {
                prop.phi0
                    .unwrap_or_else(|| stream_rng(self.seed, Stream::InitialAzimuth, p as u64).random_range(0.0..TAU))
            })
            .collect()
    }

    fn center_at(&self, t: f64) -> Vec3 {
        self.link.drone_center + self.velocity * t
    }

    /// Bistatic range of the drone center at `t`.
    pub fn body_range(&self, t: f64) -> f64 {
        self.link.bistatic_range_at(&self.center_at(t))
    }
}

/// Per-component frames of one simulation.
#[derive(Debug, Clone)]
pub struct DroneFrames {
    pub propellers: Vec<IqFrame>,
    pub body: IqFrame,
    pub vibration: Vec<f64>,
    pub phi0: Vec<f64>,
    /// Sum of all components plus noise.
    pub total: IqFrame,
}

/// Return parameters of propeller `p` for the whole frame.
pub fn propeller_params(
    cfg: &DroneConfig,
    p: usize,
    phi0: f64,
    ofdm: &OfdmConfig,
    vibration: &[f64],
) -> Result<PropellerReturnParams> {
    let prop = &cfg.propellers[p];
    let geom = prop.geometry(&cfg.link.drone_center, phi0);
    geom.validate()?;
    let shift_ro = cfg.vibration.enabled && cfg.vibration.apply_to_propellers;
    let angles = if cfg.velocity == Vec3::zeros() && !shift_ro {
        AngleTrack::Static(derive_angles(&cfg.link, &geom)?)
    } else {
        // geometry refreshed once per symbol
        let track = (0..ofdm.n_symbols)
            .map(|m| {
                let offset = cfg.velocity * ofdm.sample_time(0, m);
                let link = cfg.link.with_drone_offset(&offset);
                let mut a = derive_angles(&link, &geom.translated(&offset))?;
                if shift_ro {
                    a.r_o += vibration[m];
                }
                Ok(a)
            })
            .collect::<Result<Vec<_>>>()?;
        AngleTrack::PerSymbol(track)
    };
    Ok(PropellerReturnParams {
        angles,
        phi0,
        n_blades: prop.n_blades,
        blade_length: prop.blade_length,
        reflectivity: prop.reflectivity.clone(),
    })
}

/// Body returns alone, with the vibration walk applied when enabled.
pub fn body_returns(cfg: &DroneConfig, d: &SymbolMatrix, ofdm: &OfdmConfig, vibration: &[f64]) -> Result<IqFrame> {
    let beta = cfg.link.bistatic_angle_at(&cfg.link.drone_center)?;
    let vib_on = cfg.vibration.enabled;
    let range = |mu: usize, m: usize| {
        let r = cfg.body_range(ofdm.sample_time(mu, m));
        if vib_on {
            r + vibration[m]
        } else {
            r
        }
    };
    match cfg.body.kind {
        BodyKind::None => Ok(IqFrame::zeros(ofdm)),
        BodyKind::Gaussian => gaussian_body_returns(&cfg.body, d, ofdm, beta, range),
        BodyKind::MeasurementBased => measurement_body_returns(&cfg.body, d, ofdm, beta, range),
    }
}

pub fn simulate_drone_parts(cfg: &DroneConfig, d: &SymbolMatrix, ofdm: &OfdmConfig) -> Result<DroneFrames> {
    cfg.validate()?;
    ofdm.validate()?;
    d.check_matches(ofdm)?;
    let phi0 = cfg.initial_azimuths();
    let vibration = if cfg.vibration.enabled {
        vibration_walk(&cfg.vibration, ofdm.n_symbols)?
    } else {
        vec![0.0; ofdm.n_symbols]
    };
    let propellers = (0..cfg.propellers.len())
        .into_par_iter()
        .map(|p| {
            let params = propeller_params(cfg, p, phi0[p], ofdm, &vibration)?;
            propeller_returns(&params, d, ofdm)
        })
        .collect::<Result<Vec<_>>>()?;
    let body = body_returns(cfg, d, ofdm, &vibration)?;
    let mut clean = IqFrame::zeros(ofdm);
    for f in &propellers {
        clean.accumulate(f)?;
    }
    clean.accumulate(&body)?;
    let total = add_noise(&clean, cfg.noise_variance, cfg.seed)?;
    Ok(DroneFrames { propellers, body, vibration, phi0, total })
}

/// Total drone returns `Σ_p y_p + y_body + z`.
pub fn simulate_drone(cfg: &DroneConfig, d: &SymbolMatrix, ofdm: &OfdmConfig) -> Result<IqFrame> {
    Ok(simulate_drone_parts(cfg, d, ofdm)?.total)
}
