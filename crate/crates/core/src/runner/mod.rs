//! Scenario execution, batch datasets and the on-disk formats.
//!
//! A run writes, under the output directory:
//!
//! - `<name>.iq`: raw returns (see [`iq`]),
//! - `<name>.meta.json`: waveform, seeds and the scenario as run,
//! - `<name>.rdmap` (and `.csv`): range-Doppler map in dB,
//! - `<name>.metrics.json`: per-propeller signature metrics,
//! - `<name>.sym`: transmit symbols, when requested.
//!
//! `UDAR_OUTPUT_DIR` and `UDAR_WORKERS` override the output directory and
//! batch worker count of the scenario file.

pub mod batch;
pub mod iq;
pub mod presets;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use batch::{batch_generate, verify_manifest, BatchOptions, DatasetManifest, ManifestItem, SweepAxis};
pub use iq::{read_iq_file, read_meta, write_iq_file, IqHeader, IqMeta};
pub use presets::{Preset, PresetSection};
pub use scenario::{item_seed, Phi0, PropellerSection, Resolved, ScenarioFile};

use crate::drone::{simulate_drone_parts, DroneConfig};
use crate::geometry::derive_angles;
use crate::processing::{range_doppler, write_map, write_map_csv, RangeDopplerMap, SignatureMetrics};
use crate::propeller::{spanned_bins, wrapped_range_bin, IqFrame};
use crate::waveform::{write_symbol_file, OfdmConfig};
use crate::{Error, Result};

pub const OUTPUT_DIR_ENV: &str = "UDAR_OUTPUT_DIR";
pub const WORKERS_ENV: &str = "UDAR_WORKERS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces `output.dir` of the scenario.
    pub output_dir: Option<PathBuf>,
}

impl RunOptions {
    /// Fills unset fields from the environment.
    pub fn with_env(mut self) -> Self {
        if self.output_dir.is_none() {
            self.output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        }
        self
    }
}

/// Files written by one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOutputs {
    pub iq: PathBuf,
    pub meta: PathBuf,
    pub rdmap: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub symbols: Option<PathBuf>,
}

impl RunOutputs {
    pub fn files(&self) -> Vec<&Path> {
        let mut v = vec![self.iq.as_path(), self.meta.as_path()];
        v.extend([&self.rdmap, &self.csv, &self.metrics, &self.symbols].into_iter().flatten().map(|p| p.as_path()));
        v
    }
}

/// Simulates the scenario at `path` and writes the requested outputs.
pub fn run_scenario(path: impl AsRef<Path>, opts: &RunOptions) -> Result<RunOutputs> {
    let scenario = ScenarioFile::load(path)?;
    let dir = opts.output_dir.clone().unwrap_or_else(|| scenario.output.dir.clone());
    let name = scenario.output.name.clone();
    run_item(&scenario, 0, &dir, &name)
}

/// One simulation, used by [`run_scenario`] (item 0) and by batches.
pub(crate) fn run_item(scenario: &ScenarioFile, item: u64, dir: &Path, stem: &str) -> Result<RunOutputs> {
    let r = scenario.resolve(item)?;
    let parts = simulate_drone_parts(&r.drone, &r.symbols, &r.ofdm)?;
    let mut frame = parts.total;
    if !frame.is_finite() {
        return Err(Error::InvalidConfig("simulation produced non-finite samples".into()));
    }
    // products are computed from what a reader of the file gets
    iq::quantize(&mut frame);
    fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
    let file = |ext: &str| dir.join(format!("{stem}.{ext}"));
    let mut out = RunOutputs { iq: file("iq"), meta: file("meta.json"), ..Default::default() };
    write_iq_file(&out.iq, &frame)?;
    let meta = IqMeta {
        format: String::from_utf8_lossy(iq::IQ_MAGIC).into_owned(),
        n_subcarriers: r.ofdm.n_subcarriers,
        n_symbols: r.ofdm.n_symbols,
        carrier_hz: r.ofdm.carrier_freq,
        symbol_duration_s: r.ofdm.symbol_duration,
        slow_time_interval_s: r.ofdm.slow_time_interval(),
        range_bin_m: r.ofdm.range_bin(),
        item_index: item,
        master_seed: scenario.seed,
        effective_seed: r.drone.seed,
        phi0_deg: parts.phi0.iter().map(|p| p.to_degrees()).collect(),
        scenario: scenario.clone(),
    };
    write_json(&out.meta, &meta)?;
    if scenario.output.symbols {
        let p = file("sym");
        write_symbol_file(&p, &r.symbols)?;
        out.symbols = Some(p);
    }
    let o = &scenario.output;
    if o.rdmap || o.csv || o.metrics {
        let map = range_doppler(&frame, &r.symbols, &r.processing)?;
        if o.rdmap {
            let p = file("rdmap");
            write_map(&p, &map)?;
            out.rdmap = Some(p);
        }
        if o.csv {
            let p = file("csv");
            write_csv(&p, &map)?;
            out.csv = Some(p);
        }
        if o.metrics {
            let p = file("metrics.json");
            write_json(&p, &metrics_report(&map, &r.drone, &r.ofdm)?)?;
            out.metrics = Some(p);
        }
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::from(e).at_path(path))
}

fn write_csv(path: &Path, map: &RangeDopplerMap) -> Result<()> {
    let write = || -> Result<()> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        write_map_csv(&mut f, map)?;
        std::io::Write::flush(&mut f)?;
        Ok(())
    };
    write().map_err(|e| e.at_path(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub range_bin_m: f64,
    pub doppler_bin_hz: f64,
    pub peak_range_bin: usize,
    pub peak_doppler_hz: f64,
    /// Metrics over all range bins.
    pub overall: Option<SignatureMetrics>,
    pub overall_error: Option<String>,
    pub propellers: Vec<PropellerReport>,
}

/// Measured signature of one propeller next to the values its geometry
/// predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropellerReport {
    pub index: usize,
    pub rpm: f64,
    pub n_blades: usize,
    pub rotation_center_range_m: f64,
    pub a_b: f64,
    pub expected_range_bin: usize,
    /// Bins that the blade tips sweep, in range order.
    pub range_bins: Vec<usize>,
    pub expected_spike_spacing_hz: f64,
    pub expected_doppler_spread_hz: f64,
    pub measured: Option<SignatureMetrics>,
    pub error: Option<String>,
}

/// Signature metrics of every propeller at its own range bins, with the
/// geometry at the first symbol.
pub fn metrics_report(map: &RangeDopplerMap, drone: &DroneConfig, ofdm: &OfdmConfig) -> Result<MetricsReport> {
    let (pr, pd) = map.peak();
    let delta = ofdm.range_bin();
    let n = ofdm.n_subcarriers;
    let overall = map.signature_metrics(0..map.n_range);
    let phi0 = drone.initial_azimuths();
    let mut propellers = Vec::with_capacity(drone.propellers.len());
    for (index, prop) in drone.propellers.iter().enumerate() {
        let ang = derive_angles(&drone.link, &prop.geometry(&drone.link.drone_center, phi0[index]))?;
        let reach = ang.a_b * prop.blade_length;
        let bins = spanned_bins(ang.r_o - reach, ang.r_o + reach, delta, n);
        let measured = map.signature_metrics(bins.iter().copied());
        propellers.push(PropellerReport {
            index,
            rpm: ang.omega * 60.0 / std::f64::consts::TAU,
            n_blades: prop.n_blades,
            rotation_center_range_m: ang.r_o,
            a_b: ang.a_b,
            expected_range_bin: wrapped_range_bin(ang.r_o, delta, n),
            range_bins: bins,
            expected_spike_spacing_hz: prop.n_blades as f64 * ang.omega / std::f64::consts::TAU,
            expected_doppler_spread_hz: ang.doppler_spread(prop.blade_length, ofdm.wavelength()),
            error: measured.as_ref().err().map(|e| e.to_string()),
            measured: measured.ok(),
        });
    }
    Ok(MetricsReport {
        range_bin_m: delta,
        doppler_bin_hz: map.doppler_bin_width(),
        peak_range_bin: pr,
        peak_doppler_hz: map.doppler_axis[pd],
        overall_error: overall.as_ref().err().map(|e| e.to_string()),
        overall: overall.ok(),
        propellers,
    })
}

/// Frame, sidecar and resolved scenario behind an I/Q file.
pub struct LoadedIq {
    pub meta: IqMeta,
    pub resolved: Resolved,
    pub frame: IqFrame,
}

pub fn load_iq(iq_path: impl AsRef<Path>) -> Result<LoadedIq> {
    let iq_path = iq_path.as_ref();
    let (header, values) = read_iq_file(iq_path)?;
    let meta = read_meta(iq::sidecar_path(iq_path))?;
    let resolved = meta.scenario.resolve(meta.item_index)?;
    let frame = iq::frame_from_iq(&header, values, &resolved.ofdm, resolved.drone.noise_variance)?;
    Ok(LoadedIq { meta, resolved, frame })
}

/// `metrics` on an existing I/Q file; symbols are regenerated from the
/// sidecar.
pub fn metrics_from_iq(iq_path: impl AsRef<Path>) -> Result<MetricsReport> {
    let l = load_iq(iq_path)?;
    let map = range_doppler(&l.frame, &l.resolved.symbols, &l.resolved.processing)?;
    metrics_report(&map, &l.resolved.drone, &l.resolved.ofdm)
}

pub fn metrics_to_json(report: &MetricsReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))
}

/// `rdmap` on an existing I/Q file; writes `<stem>.rdmap` (and `.csv`) next
/// to it unless `out` names another path.
pub fn rdmap_from_iq(iq_path: impl AsRef<Path>, out: Option<&Path>, csv: bool) -> Result<Vec<PathBuf>> {
    let iq_path = iq_path.as_ref();
    let l = load_iq(iq_path)?;
    let map = range_doppler(&l.frame, &l.resolved.symbols, &l.resolved.processing)?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| iq_path.with_extension("rdmap"));
    write_map(&target, &map)?;
    let mut files = vec![target.clone()];
    if csv {
        let p = target.with_extension("csv");
        write_csv(&p, &map)?;
        files.push(p);
    }
    Ok(files)
}

/// Dry-run summary of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub n_propellers: usize,
    pub range_bin_m: f64,
    pub unambiguous_range_m: f64,
    pub slow_time_interval_s: f64,
    pub doppler_bin_hz: f64,
    pub unambiguous_doppler_hz: f64,
    pub warnings: Vec<String>,
}

/// Parses and resolves a scenario, loading every referenced input, without
/// simulating.
pub fn validate_scenario(path: impl AsRef<Path>) -> Result<ValidationSummary> {
    let s = ScenarioFile::load(path)?;
    let r = s.resolve(0)?;
    let o = &r.ofdm;
    let slow = o.slow_time_interval() * r.processing.subsample as f64;
    let n_slow = o.n_symbols.div_ceil(r.processing.subsample);
    let fft = r.processing.doppler_fft_len.unwrap_or(n_slow).max(n_slow);
    let prf = 1.0 / slow;
    let phi0 = r.drone.initial_azimuths();
    let mut warnings = Vec::new();
    for (p, prop) in r.drone.propellers.iter().enumerate() {
        let ang = derive_angles(&r.drone.link, &prop.geometry(&r.drone.link.drone_center, phi0[p]))?;
        let bd = ang.doppler_spread(prop.blade_length, o.wavelength());
        if bd > prf {
            warnings.push(format!("propeller {p}: Doppler spread {bd:.1} Hz exceeds the slow-time rate {prf:.1} Hz and aliases"));
        }
        if 2.0 * ang.a_b * prop.blade_length > o.n_subcarriers as f64 * o.range_bin() {
            warnings.push(format!("propeller {p}: blade span exceeds the unambiguous range"));
        }
    }
    if o.n_symbols < crate::processing::MIN_SERIES_LEN {
        warnings.push(format!("only {} symbols; Doppler metrics need at least {}", o.n_symbols, crate::processing::MIN_SERIES_LEN));
    }
    Ok(ValidationSummary {
        n_propellers: r.drone.propellers.len(),
        range_bin_m: o.range_bin(),
        unambiguous_range_m: o.n_subcarriers as f64 * o.range_bin(),
        slow_time_interval_s: slow,
        doppler_bin_hz: 1.0 / (fft as f64 * slow),
        unambiguous_doppler_hz: prf,
        warnings,
    })
}
