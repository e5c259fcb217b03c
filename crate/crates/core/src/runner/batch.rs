//! Parameter sweeps over a scenario.
//!
//! Sweep axes are scenario keys in dotted form (`ofdm.n_symbols`,
//! `drone.propellers.0.rpm`) plus two shortcuts: `rpm` sets every propeller
//! and the preset, `beta_deg` is `link.beta_deg`. Values are
//! `start:stop:step` (stop included) or a comma list. Items enumerate the
//! cartesian grid with the last axis fastest; item `i` draws its seeds from
//! `(seed, i)`, so item 0 is exactly what `run_scenario` produces.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::{item_seed, ScenarioFile};
use super::{run_item, write_json, RunOutputs, OUTPUT_DIR_ENV, WORKERS_ENV};
use crate::{Error, Result};

pub const MANIFEST_FORMAT: &str = "udar-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

impl SweepAxis {
    /// `key=start:stop:step` or `key=v0,v1,...`.
    pub fn parse_arg(arg: &str) -> Result<Self> {
        let (key, spec) = arg
            .split_once('=')
            .ok_or_else(|| Error::Scenario(format!("sweep `{arg}`: expected key=values")))?;
        Self::new(key.trim(), &toml::Value::String(spec.trim().to_string()))
    }

    /// From a `[batch.sweep]` entry: a range string or an array.
    pub fn new(key: &str, spec: &toml::Value) -> Result<Self> {
        let bad = |m: &str| Error::Scenario(format!("sweep `{key}`: {m}"));
        if key.is_empty() {
            return Err(bad("empty key"));
        }
        let values = match spec {
            toml::Value::Array(a) => a.clone(),
            toml::Value::String(s) if s.matches(':').count() == 2 => {
                let parts: Vec<&str> = s.split(':').map(str::trim).collect();
                if parts.iter().all(|p| p.parse::<i64>().is_ok()) {
                    let v: Vec<i64> = parts.iter().map(|p| p.parse().unwrap()).collect();
                    if v[2] <= 0 || v[1] < v[0] {
                        return Err(bad("range needs start ≤ stop and a positive step"));
                    }
                    (v[0]..=v[1]).step_by(v[2] as usize).map(toml::Value::Integer).collect()
                } else {
                    let v: Vec<f64> = parts
                        .iter()
                        .map(|p| p.parse::<f64>().map_err(|_| bad("range bounds must be numbers")))
                        .collect::<Result<_>>()?;
                    if !(v[2] > 0.0) || v[1] < v[0] || v.iter().any(|x| !x.is_finite()) {
                        return Err(bad("range needs start ≤ stop and a positive step"));
                    }
                    // tolerate rounding in the last step
                    let count = ((v[1] - v[0]) / v[2] + 1e-9).floor() as usize + 1;
                    (0..count).map(|k| toml::Value::Float(v[0] + k as f64 * v[2])).collect()
                }
            }
            toml::Value::String(s) => s.split(',').map(|p| scalar(p.trim())).collect(),
            other => vec![other.clone()],
        };
        if values.is_empty() {
            return Err(bad("no values"));
        }
        Ok(Self { key: key.to_string(), values })
    }
}

fn scalar(s: &str) -> toml::Value {
    if let Ok(i) = s.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = s.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(s.to_string())
    }
}

/// Sets `key` in a scenario table.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &toml::Value) -> Result<()> {
    match key {
        "rpm" => {
            let mut hit = false;
            if let Some(drone) = table.get_mut("drone").and_then(|d| d.as_table_mut()) {
                if let Some(preset) = drone.get_mut("preset").and_then(|p| p.as_table_mut()) {
                    preset.insert("rpm".into(), value.clone());
                    hit = true;
                }
                if let Some(props) = drone.get_mut("propellers").and_then(|p| p.as_array_mut()) {
                    for p in props.iter_mut().filter_map(|p| p.as_table_mut()) {
                        p.insert("rpm".into(), value.clone());
                        hit = true;
                    }
                }
            }
            if !hit {
                return Err(Error::Scenario("sweep `rpm`: scenario has no propellers".into()));
            }
            Ok(())
        }
        "beta_deg" => set_path(table, "link.beta_deg", value),
        other => set_path(table, other, value),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: &toml::Value) -> Result<()> {
    let bad = |m: String| Error::Scenario(format!("sweep `{key}`: {m}"));
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = table;
    let mut i = 0;
    while i + 1 < parts.len() {
        let seg = parts[i];
        let entry = node.entry(seg.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            toml::Value::Array(a) => {
                let idx: usize = parts[i + 1].parse().map_err(|_| bad(format!("`{seg}` is a list; index it")))?;
                let len = a.len();
                i += 1;
                match a.get_mut(idx) {
                    Some(toml::Value::Table(t)) => t,
                    Some(_) => return Err(bad(format!("`{seg}.{idx}` is not a table"))),
                    None => return Err(bad(format!("`{seg}` has {len} entries"))),
                }
            }
            _ => return Err(bad(format!("`{seg}` is not a table"))),
        };
        i += 1;
    }
    let leaf = parts[parts.len() - 1];
    if i == parts.len() {
        // the path ended at a list index
        return Err(bad("path must end at a key".into()));
    }
    node.insert(leaf.to_string(), value.clone());
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Replaces `batch.workers`.
    pub workers: Option<usize>,
    /// Replaces `output.dir`.
    pub output_dir: Option<PathBuf>,
    /// Axes appended after those of `[batch.sweep]`.
    pub sweeps: Vec<SweepAxis>,
}

impl BatchOptions {
    /// Fills unset fields from the environment.
    pub fn with_env(mut self) -> Result<Self> {
        if self.output_dir.is_none() {
            self.output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        }
        if self.workers.is_none() {
            if let Ok(w) = std::env::var(WORKERS_ENV) {
                let n: usize = w
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::InvalidConfig(format!("{WORKERS_ENV}={w}: expected a positive integer")))?;
                self.workers = Some(n);
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the manifest.
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub index: u64,
    pub seed: u64,
    pub overrides: BTreeMap<String, serde_json::Value>,
    pub ok: bool,
    pub error: Option<String>,
    pub files: Vec<FileRecord>,
    /// Full parameter record; absent when the overrides did not parse.
    pub scenario: Option<ScenarioFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub master_seed: u64,
    pub sweep: Vec<(String, Vec<serde_json::Value>)>,
    pub items: Vec<ManifestItem>,
    pub failed: Vec<u64>,
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).at_path(path))?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

fn json(v: &toml::Value) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

/// Grid of override sets, last axis fastest.
fn grid(axes: &[SweepAxis]) -> Vec<Vec<(String, toml::Value)>> {
    let mut items = vec![Vec::new()];
    for axis in axes {
        items = items
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((axis.key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    items
}

/// Runs every grid point of the scenario at `path` and writes
/// `manifest.json` to the output directory. Failing items are recorded and
/// do not stop the others.
pub fn batch_generate(path: impl AsRef<Path>, opts: &BatchOptions) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
    // full validation with line numbers before any override
    let base = ScenarioFile::parse(&text).map_err(|e| super::scenario::prefix_path(path, e))?;
    let table = ScenarioFile::parse_table(&text)?;
    let scenario_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut axes: Vec<SweepAxis> =
        base.batch.sweep.iter().map(|(k, v)| SweepAxis::new(k, v)).collect::<Result<_>>()?;
    axes.extend(opts.sweeps.iter().cloned());
    let out_dir = opts.output_dir.clone().unwrap_or_else(|| base.output.dir.clone());
    let workers = opts
        .workers
        .or(base.batch.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    fs::create_dir_all(&out_dir)?;
    let points = grid(&axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let stem = base.output.name.clone();
    let items: Vec<ManifestItem> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, overrides)| run_point(&table, &scenario_dir, &out_dir, &stem, i as u64, overrides))
            .collect()
    });
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.into(),
        master_seed: base.seed,
        sweep: axes.iter().map(|a| (a.key.clone(), a.values.iter().map(json).collect())).collect(),
        failed: items.iter().filter(|i| !i.ok).map(|i| i.index).collect(),
        items,
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn run_point(
    table: &toml::Table,
    scenario_dir: &Path,
    out_dir: &Path,
    stem: &str,
    index: u64,
    overrides: &[(String, toml::Value)],
) -> ManifestItem {
    let mut item = ManifestItem {
        index,
        seed: 0,
        overrides: overrides.iter().map(|(k, v)| (k.clone(), json(v))).collect(),
        ok: false,
        error: None,
        files: Vec::new(),
        scenario: None,
    };
    let result = (|| -> Result<RunOutputs> {
        let mut t = table.clone();
        for (k, v) in overrides {
            apply_override(&mut t, k, v)?;
        }
        let mut s = ScenarioFile::from_table(t)?;
        s.rebase_paths(scenario_dir);
        item.seed = item_seed(s.seed, index);
        item.scenario = Some(s.clone());
        let out = run_item(&s, index, out_dir, &format!("{stem}_{index:04}"))?;
        for f in out.files() {
            let (bytes, sha256) = sha256_file(f)?;
            let rel = f.strip_prefix(out_dir).unwrap_or(f).to_path_buf();
            item.files.push(FileRecord { path: rel, bytes, sha256 });
        }
        Ok(out)
    })();
    match result {
        Ok(_) => item.ok = true,
        Err(e) => item.error = Some(e.to_string()),
    }
    item
}

/// Problems found re-hashing the files of a manifest; empty when every
/// listed file exists and matches.
pub fn verify_manifest(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    let m: DatasetManifest = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut problems = Vec::new();
    for item in &m.items {
        for f in &item.files {
            match sha256_file(&dir.join(&f.path)) {
                Ok((bytes, h)) if bytes == f.bytes && h == f.sha256 => {}
                Ok(_) => problems.push(format!("item {}: {} does not match its hash", item.index, f.path.display())),
                Err(e) => problems.push(format!("item {}: {}: {e}", item.index, f.path.display())),
            }
        }
    }
    Ok(problems)
}
