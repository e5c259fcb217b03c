//! Scenario files: TOML description of one simulation run.
//!
//! Every table rejects unknown keys. Angles are degrees, speeds rpm, lengths
//! meters, frequencies Hz; the README lists every key with its default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::presets::PresetSection;
use crate::drone::{BodyKind, BodyModelConfig, DroneConfig, DronePropeller, S21Library, S21Profile, AspectKey, VibrationConfig};
use crate::geometry::{derive_angles, BistaticLink, Vec3};
use crate::processing::{RangeDopplerOptions, Window};
use crate::propeller::{scatterer_amplitude_bistatic, Reflectivity};
use crate::rng::{derive_seed, Stream};
use crate::waveform::{generate_symbols, read_symbol_file, Modulation, OfdmConfig, SymbolMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Master seed; every random stream of the run derives from it.
    #[serde(default)]
    pub seed: u64,
    pub link: LinkSection,
    pub ofdm: OfdmSection,
    #[serde(default)]
    pub drone: DroneSection,
    #[serde(default)]
    pub body: BodySection,
    #[serde(default)]
    pub vibration: VibrationSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub processing: ProcessingSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub batch: BatchSection,
}

/// Station placement, either absolute (`tx_m`, `rx_m`) or relative to the
/// drone (`beta_deg` and ranges).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(default)]
    pub drone_m: [f64; 3],
    pub tx_m: Option<[f64; 3]>,
    pub rx_m: Option<[f64; 3]>,
    pub beta_deg: Option<f64>,
    pub tx_range_m: Option<f64>,
    /// Defaults to `tx_range_m`.
    pub rx_range_m: Option<f64>,
    /// Depression of both stations below the drone, seen from the drone.
    #[serde(default)]
    pub elevation_deg: f64,
    /// Azimuth of the bisector, seen from the drone.
    #[serde(default)]
    pub bisector_azimuth_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    pub n_subcarriers: usize,
    /// `B = N/T`.
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub n_symbols: usize,
    #[serde(default = "default_modulation")]
    pub modulation: String,
    /// Symbol period in units of `T`; exclusive with `slow_time_interval_s`.
    pub symbol_spacing: Option<u64>,
    /// Rounded to a whole number of symbol durations.
    pub slow_time_interval_s: Option<f64>,
    #[serde(default)]
    pub repeat_symbols: bool,
    /// Transmit symbols read from a file instead of generated.
    pub symbol_file: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn default_modulation() -> String {
    "qpsk".into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneSection {
    #[serde(default)]
    pub velocity_m_s: [f64; 3],
    pub preset: Option<PresetSection>,
    #[serde(default)]
    pub propellers: Vec<PropellerSection>,
}

/// Initial azimuth: degrees, or `"random"` for a seeded uniform draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Phi0 {
    Degrees(f64),
    Keyword(Random),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Random {
    Random,
}

impl Default for Phi0 {
    fn default() -> Self {
        Phi0::Keyword(Random::Random)
    }
}

impl Phi0 {
    pub fn radians(&self) -> Option<f64> {
        match self {
            Phi0::Degrees(d) => Some(d.to_radians()),
            Phi0::Keyword(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropellerSection {
    /// Rotation center relative to the drone center.
    pub position_m: [f64; 3],
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    pub rpm: f64,
    #[serde(default = "default_blades")]
    pub n_blades: usize,
    pub blade_length_m: f64,
    #[serde(default)]
    pub phi0_deg: Phi0,
    /// Blade reflectivity `[re, im]`.
    #[serde(default = "unit_complex")]
    pub reflectivity: [f64; 2],
    /// Scales the reflectivity by the bistatic radar-equation amplitude.
    pub rcs_m2: Option<f64>,
}

pub(crate) fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

pub(crate) fn default_blades() -> usize {
    2
}

fn unit_complex() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    #[serde(default)]
    pub kind: BodyKind,
    #[serde(default = "unit_complex")]
    pub gamma: [f64; 2],
    #[serde(default = "default_d_max")]
    pub d_max_m: f64,
    pub s21_file: Option<PathBuf>,
    /// Directory of aspect-keyed profiles; the nearest aspect is used.
    pub s21_library: Option<PathBuf>,
}

fn default_d_max() -> f64 {
    0.3
}

impl Default for BodySection {
    fn default() -> Self {
        Self { kind: BodyKind::None, gamma: unit_complex(), d_max_m: default_d_max(), s21_file: None, s21_library: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibrationSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub d0_m: f64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub apply_to_propellers: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Linear per-sample variance; exclusive with `variance_db`.
    pub variance: Option<f64>,
    pub variance_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingSection {
    #[serde(default)]
    pub window: Window,
    #[serde(default = "one")]
    pub subsample: usize,
    pub doppler_fft_len: Option<usize>,
}

fn one() -> usize {
    1
}

impl Default for ProcessingSection {
    fn default() -> Self {
        Self { window: Window::Hann, subsample: 1, doppler_fft_len: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative to the working directory.
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "yes")]
    pub rdmap: bool,
    #[serde(default = "yes")]
    pub metrics: bool,
    #[serde(default)]
    pub csv: bool,
    #[serde(default)]
    pub symbols: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_name() -> String {
    "scenario".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out_dir(), name: default_name(), rdmap: true, metrics: true, csv: false, symbols: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSection {
    pub workers: Option<usize>,
    /// `key = "start:stop:step"` or `key = [v0, v1, ...]`.
    #[serde(default)]
    pub sweep: BTreeMap<String, toml::Value>,
}

/// Everything a run needs, after seeds and paths are resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub drone: DroneConfig,
    pub ofdm: OfdmConfig,
    pub symbols: SymbolMatrix,
    pub processing: RangeDopplerOptions,
}

/// 1-based line and column of byte offset `pos`.
pub(crate) fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Line of `key` inside the `nth` table named `section` (dotted, `""` for
/// the root), best effort; anchors validation errors after deserialization.
pub(crate) fn locate(text: &str, section: &str, key: &str, nth: usize) -> Option<usize> {
    let mut current = String::new();
    let mut seen = if section.is_empty() { 1 } else { 0 };
    let mut section_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            current = h.trim_start_matches('[').trim_end_matches(']').trim().to_string();
            if current == section {
                seen += 1;
                if seen == nth + 1 {
                    section_line = Some(i + 1);
                }
            }
            continue;
        }
        if current == section && seen == nth + 1 {
            let k = line.split('=').next().unwrap_or("").trim();
            if !key.is_empty() && k == key && line.contains('=') {
                return Some(i + 1);
            }
        }
    }
    section_line
}

fn field_err(text: Option<&str>, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    field_err_nth(text, section, key, 0, msg)
}

fn field_err_nth(text: Option<&str>, section: &str, key: &str, nth: usize, msg: impl std::fmt::Display) -> Error {
    let path = match (section.is_empty(), key.is_empty()) {
        (true, _) => key.to_string(),
        (false, true) => section.to_string(),
        (false, false) => format!("{section}.{key}"),
    };
    match text.and_then(|t| locate(t, section, key, nth)) {
        Some(line) => Error::Scenario(format!("line {line}: {path}: {msg}")),
        None => Error::Scenario(format!("{path}: {msg}")),
    }
}

fn toml_err(text: &str, e: &toml::de::Error) -> Error {
    match e.span() {
        Some(span) => {
            let (line, col) = line_col(text, span.start);
            Error::Scenario(format!("line {line}, column {col}: {}", e.message().trim()))
        }
        None => Error::Scenario(e.message().trim().to_string()),
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn complex(a: [f64; 2]) -> Complex64 {
    Complex64::new(a[0], a[1])
}

impl ScenarioFile {
    /// Parses and validates; errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| toml_err(text, &e))?;
        s.check(Some(text))?;
        Ok(s)
    }

    /// Raw TOML table of a scenario file, for key overrides.
    pub fn parse_table(text: &str) -> Result<toml::Table> {
        toml::from_str(text).map_err(|e| toml_err(text, &e))
    }

    /// Builds a scenario from an already edited table.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let s: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Scenario(e.message().trim().to_string()))?;
        s.check(None)?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
        let mut s = Self::parse(&text).map_err(|e| prefix_path(path, e))?;
        s.rebase_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(s)
    }

    /// Makes input paths relative to `dir` absolute-ish (joined).
    pub fn rebase_paths(&mut self, dir: &Path) {
        for p in [&mut self.ofdm.symbol_file, &mut self.body.s21_file, &mut self.body.s21_library]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// Value checks that serde cannot express.
    fn check(&self, text: Option<&str>) -> Result<()> {
        let err = |section: &str, key: &str, msg: &str| Err(field_err(text, section, key, msg));
        let l = &self.link;
        match (l.tx_m.is_some() || l.rx_m.is_some(), l.beta_deg.is_some() || l.tx_range_m.is_some()) {
            (true, true) => return err("link", "beta_deg", "give either tx_m/rx_m or beta_deg/tx_range_m, not both"),
            (false, false) => return err("link", "", "station placement missing (tx_m/rx_m or beta_deg/tx_range_m)"),
            (true, false) if l.tx_m.is_none() || l.rx_m.is_none() => return err("link", "", "both tx_m and rx_m are required"),
            (false, true) => {
                let Some(beta) = l.beta_deg else { return err("link", "beta_deg", "required with tx_range_m") };
                if !(0.0..=180.0).contains(&beta) {
                    return err("link", "beta_deg", "must lie in [0, 180] degrees");
                }
                match l.tx_range_m {
                    Some(r) if r > 0.0 => {}
                    _ => return err("link", "tx_range_m", "must be a positive range"),
                }
                if l.rx_range_m.is_some_and(|r| !(r > 0.0)) {
                    return err("link", "rx_range_m", "must be a positive range");
                }
            }
            _ => {}
        }
        let o = &self.ofdm;
        if o.n_subcarriers == 0 {
            return err("ofdm", "n_subcarriers", "must be at least 1");
        }
        if o.n_symbols == 0 {
            return err("ofdm", "n_symbols", "must be at least 1");
        }
        if !(o.bandwidth_hz > 0.0) {
            return err("ofdm", "bandwidth_hz", "must be positive");
        }
        if !(o.carrier_hz >= o.bandwidth_hz) {
            return err("ofdm", "carrier_hz", "must be at least the bandwidth");
        }
        if let Err(e) = Modulation::from_name(&o.modulation) {
            return Err(field_err(text, "ofdm", "modulation", e));
        }
        match (o.symbol_spacing, o.slow_time_interval_s) {
            (Some(_), Some(_)) => return err("ofdm", "slow_time_interval_s", "exclusive with symbol_spacing"),
            (Some(0), None) => return err("ofdm", "symbol_spacing", "must be at least 1"),
            (None, Some(dt)) if !(dt > 0.0) => return err("ofdm", "slow_time_interval_s", "must be positive"),
            _ => {}
        }
        for (i, p) in self.drone.propellers.iter().enumerate() {
            let sec = "drone.propellers";
            let bad = |k: &str, m: &str| Err(field_err_nth(text, sec, k, i, format!("propeller {i}: {m}")));
            if !(p.rpm > 0.0 && p.rpm.is_finite()) {
                return bad("rpm", "must be positive");
            }
            if p.n_blades == 0 {
                return bad("n_blades", "must be at least 1");
            }
            if !(p.blade_length_m > 0.0) {
                return bad("blade_length_m", "must be positive");
            }
            if vec3(p.axis).norm() == 0.0 {
                return bad("axis", "must be non-zero");
            }
            if p.rcs_m2.is_some_and(|s| !(s >= 0.0)) {
                return bad("rcs_m2", "must be non-negative");
            }
        }
        if let Some(pr) = &self.drone.preset {
            if let Err(e) = pr.check() {
                return Err(field_err(text, "drone.preset", "", e));
            }
        }
        if self.drone.propellers.is_empty() && self.drone.preset.is_none() && self.body.kind == BodyKind::None {
            return err("drone", "", "no propellers and no body: nothing to simulate");
        }
        let b = &self.body;
        match b.kind {
            BodyKind::None => {}
            _ if !(b.d_max_m > 0.0) => return err("body", "d_max_m", "must be positive"),
            BodyKind::Gaussian if b.s21_file.is_some() || b.s21_library.is_some() => {
                return err("body", "kind", "S21 data given for a gaussian body")
            }
            BodyKind::MeasurementBased if b.s21_file.is_some() == b.s21_library.is_some() => {
                return err("body", "kind", "measurement_based needs exactly one of s21_file or s21_library")
            }
            _ => {}
        }
        if !(self.vibration.d0_m >= 0.0) {
            return err("vibration", "d0_m", "must be non-negative");
        }
        match (self.noise.variance, self.noise.variance_db) {
            (Some(_), Some(_)) => return err("noise", "variance_db", "exclusive with variance"),
            (Some(v), None) if !(v >= 0.0 && v.is_finite()) => return err("noise", "variance", "must be non-negative"),
            (None, Some(v)) if !v.is_finite() && v != f64::NEG_INFINITY => return err("noise", "variance_db", "must be finite"),
            _ => {}
        }
        if self.processing.subsample == 0 {
            return err("processing", "subsample", "must be at least 1");
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return err("output", "name", "must be a plain file stem");
        }
        if self.batch.workers == Some(0) {
            return err("batch", "workers", "must be at least 1");
        }
        Ok(())
    }

    pub fn link(&self) -> Result<BistaticLink> {
        let l = &self.link;
        let c = vec3(l.drone_m);
        match (l.tx_m, l.rx_m, l.beta_deg, l.tx_range_m) {
            (Some(t), Some(r), _, _) => BistaticLink::new(vec3(t), vec3(r), c),
            (_, _, Some(beta), Some(rt)) => {
                let rr = l.rx_range_m.unwrap_or(rt);
                let (el, az) = (l.elevation_deg.to_radians(), l.bisector_azimuth_deg.to_radians());
                let dir = |a: f64| Vec3::new(a.cos() * el.cos(), a.sin() * el.cos(), -el.sin());
                let half = beta.to_radians() / 2.0;
                BistaticLink::new(c + dir(az - half) * rt, c + dir(az + half) * rr, c)
            }
            _ => Err(Error::Scenario("link: station placement missing".into())),
        }
    }

    pub fn modulation(&self) -> Result<Modulation> {
        Modulation::from_name(&self.ofdm.modulation)
    }

    /// OFDM parameters with the symbol seed of batch item `item`.
    pub fn ofdm_config(&self, item: u64) -> Result<OfdmConfig> {
        let o = &self.ofdm;
        let t = o.n_subcarriers as f64 / o.bandwidth_hz;
        let spacing = match (o.symbol_spacing, o.slow_time_interval_s) {
            (Some(s), _) => s,
            (None, Some(dt)) => (dt / t).round().max(1.0) as u64,
            (None, None) => 1,
        };
        let seed = item_seed(o.seed.unwrap_or(self.seed), item);
        let cfg = OfdmConfig::new(o.n_subcarriers, t, o.carrier_hz, o.n_symbols, self.modulation()?, seed)
            .with_symbol_spacing(spacing)
            .with_repeat_symbols(o.repeat_symbols);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn symbols(&self, ofdm: &OfdmConfig) -> Result<SymbolMatrix> {
        match &self.ofdm.symbol_file {
            Some(p) => {
                let d = read_symbol_file(p).map_err(|e| prefix_path(p, e))?;
                d.check_matches(ofdm)?;
                Ok(d)
            }
            None => generate_symbols(ofdm),
        }
    }

    /// All propellers: the preset's first, then the explicit list.
    pub fn propellers(&self) -> Vec<PropellerSection> {
        let mut out = self.drone.preset.as_ref().map(|p| p.propellers()).unwrap_or_default();
        out.extend(self.drone.propellers.iter().cloned());
        out
    }

    pub fn noise_variance(&self) -> f64 {
        match (self.noise.variance, self.noise.variance_db) {
            (Some(v), _) => v,
            (None, Some(db)) => 10f64.powf(db / 10.0),
            (None, None) => 0.0,
        }
    }

    fn body_config(&self, link: &BistaticLink) -> Result<BodyModelConfig> {
        let b = &self.body;
        let gamma = complex(b.gamma);
        Ok(match b.kind {
            BodyKind::None => BodyModelConfig::default(),
            BodyKind::Gaussian => BodyModelConfig::gaussian(gamma, b.d_max_m),
            BodyKind::MeasurementBased => {
                let profile = match (&b.s21_file, &b.s21_library) {
                    (Some(f), _) => S21Profile::load(f)?,
                    (None, Some(dir)) => {
                        let lib = S21Library::load_dir(dir).map_err(|e| prefix_path(dir, e))?;
                        let key = aspect_key(link)?;
                        lib.nearest(&key)
                            .map(|(_, p)| p.clone())
                            .ok_or_else(|| Error::Scenario(format!("{}: no .s21 profiles found", dir.display())))?
                    }
                    (None, None) => return Err(Error::Scenario("body: S21 source missing".into())),
                };
                BodyModelConfig::measurement(gamma, b.d_max_m, profile)
            }
        })
    }

    /// Drone, waveform, symbols and processing options of batch item `item`;
    /// `run_scenario` is item 0.
    pub fn resolve(&self, item: u64) -> Result<Resolved> {
        let link = self.link()?;
        let ofdm = self.ofdm_config(item)?;
        let symbols = self.symbols(&ofdm)?;
        let mut drone = DroneConfig::new(link);
        drone.velocity = vec3(self.drone.velocity_m_s);
        drone.seed = item_seed(self.seed, item);
        drone.noise_variance = self.noise_variance();
        drone.body = self.body_config(&link)?;
        drone.vibration = VibrationConfig {
            d0: self.vibration.d0_m,
            enabled: self.vibration.enabled,
            seed: item_seed(self.vibration.seed.unwrap_or(self.seed), item),
            apply_to_propellers: self.vibration.apply_to_propellers,
        };
        for p in self.propellers() {
            let mut prop = DronePropeller::new(vec3(p.position_m), vec3(p.axis), p.rpm, p.n_blades, p.blade_length_m);
            prop.phi0 = p.phi0_deg.radians();
            let mut gamma = complex(p.reflectivity);
            if let Some(sigma) = p.rcs_m2 {
                let ang = derive_angles(&link, &prop.geometry(&link.drone_center, 0.0))?;
                gamma *= scatterer_amplitude_bistatic(1.0, sigma, ang.r_t, ang.r_r, ofdm.carrier_freq)?;
            }
            prop.reflectivity = Reflectivity::Constant(gamma);
            drone.propellers.push(prop);
        }
        drone.validate()?;
        let processing = RangeDopplerOptions {
            window: self.processing.window,
            subsample: self.processing.subsample,
            doppler_fft_len: self.processing.doppler_fft_len,
        };
        Ok(Resolved { drone, ofdm, symbols, processing })
    }
}

/// Seed of batch item `item` derived from `seed`.
pub fn item_seed(seed: u64, item: u64) -> u64 {
    derive_seed(seed, Stream::BatchItem, item)
}

/// Library key of the link as seen from the drone: bisector azimuth and
/// elevation, and the bistatic angle, in degrees.
pub fn aspect_key(link: &BistaticLink) -> Result<AspectKey> {
    let c = link.drone_center;
    let bis = (link.tx_pos - c).normalize() + (link.rx_pos - c).normalize();
    let beta = link.bistatic_angle_at(&c)?.to_degrees();
    let (az, el) = if bis.norm() < 1e-12 {
        (0.0, 0.0)
    } else {
        let b = bis.normalize();
        (b.y.atan2(b.x).to_degrees().rem_euclid(360.0), b.z.asin().to_degrees())
    };
    Ok(AspectKey { azimuth_deg: az, elevation_deg: el, beta_deg: beta })
}

pub(crate) fn prefix_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Scenario(m) => Error::Scenario(format!("{}: {m}", path.display())),
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
seed = 3

[link]
beta_deg = 20
tx_range_m = 50

[ofdm]
n_subcarriers = 16
bandwidth_hz = 1e9
carrier_hz = 1e10
n_symbols = 8

[[drone.propellers]]
position_m = [0, 0, 0]
rpm = 1500
blade_length_m = 0.1
"#;

    #[test]
    fn minimal_parses_with_defaults() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(s.ofdm.modulation, "qpsk");
        assert_eq!(s.drone.propellers[0].n_blades, 2);
        assert_eq!(s.drone.propellers[0].phi0_deg, Phi0::default());
        let r = s.resolve(0).unwrap();
        assert_eq!(r.ofdm.symbol_spacing, 1);
        assert!((r.drone.link.bistatic_angle_at(&r.drone.link.drone_center).unwrap().to_degrees() - 20.0).abs() < 1e-9);
        assert_eq!(r.drone.propellers.len(), 1);
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let text = MINIMAL.replace("rpm = 1500", "rpm = 1500\nspeed = 3");
        let e = ScenarioFile::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 17"), "{e}");
        assert!(e.contains("speed"), "{e}");
    }

    #[test]
    fn value_errors_are_line_anchored() {
        let text = MINIMAL.replace("rpm = 1500", "rpm = -5");
        let e = ScenarioFile::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 16") && e.contains("rpm"), "{e}");
        let text = MINIMAL.replace("carrier_hz = 1e10", "carrier_hz = 1e8");
        let e = ScenarioFile::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 11") && e.contains("carrier_hz"), "{e}");
    }

    #[test]
    fn phi0_accepts_degrees_or_random() {
        let text = MINIMAL.replace("rpm = 1500", "rpm = 1500\nphi0_deg = 90");
        let s = ScenarioFile::parse(&text).unwrap();
        assert_eq!(s.drone.propellers[0].phi0_deg, Phi0::Degrees(90.0));
        let text = MINIMAL.replace("rpm = 1500", "rpm = 1500\nphi0_deg = \"random\"");
        assert_eq!(ScenarioFile::parse(&text).unwrap().drone.propellers[0].phi0_deg, Phi0::default());
        let text = MINIMAL.replace("rpm = 1500", "rpm = 1500\nphi0_deg = \"spin\"");
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(ScenarioFile::parse(&s.to_toml().unwrap()).unwrap(), s);
    }

    #[test]
    fn item_seeds_differ() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        let (a, b) = (s.resolve(0).unwrap(), s.resolve(1).unwrap());
        assert_ne!(a.drone.seed, b.drone.seed);
        assert_ne!(a.ofdm.seed, b.ofdm.seed);
        assert_eq!(a.drone.seed, s.resolve(0).unwrap().drone.seed);
    }

    #[test]
    fn rcs_scales_reflectivity() {
        let text = MINIMAL.replace("rpm = 1500", "rpm = 1500\nrcs_m2 = 0.01");
        let s = ScenarioFile::parse(&text).unwrap();
        let r = s.resolve(0).unwrap();
        let Reflectivity::Constant(g) = r.drone.propellers[0].reflectivity else { panic!() };
        let want = scatterer_amplitude_bistatic(1.0, 0.01, 50.0, 50.0, 1e10).unwrap();
        assert!((g.re - want).abs() < 1e-12 * want && g.im == 0.0);
    }

    #[test]
    fn noise_in_db() {
        let text = format!("{MINIMAL}\n[noise]\nvariance_db = -20\n");
        let s = ScenarioFile::parse(&text).unwrap();
        assert!((s.noise_variance() - 0.01).abs() < 1e-15);
        let text = format!("{MINIMAL}\n[noise]\nvariance_db = -20\nvariance = 1\n");
        assert!(ScenarioFile::parse(&text).is_err());
    }
}
