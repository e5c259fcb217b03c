//! Range-Doppler map files.
//!
//! Binary layout: UTF-8 `key = value` header lines, terminated by a line
//! `---`, followed by `n_range × n_doppler` little-endian `f32` dB values in
//! row-major order (range rows).

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{MapMetadata, RangeDopplerMap, Window};
use crate::{Error, Result};

pub const MAP_MAGIC: &str = "UDARMAP1";
const SEPARATOR: &str = "---";

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

pub fn map_to_bytes(map: &RangeDopplerMap) -> Vec<u8> {
    let mut out = Vec::new();
    let header = format!(
        "{MAP_MAGIC}\nn_range = {}\nn_doppler = {}\nwindow = {}\nsubsample = {}\nslow_time_interval_s = {:e}\nunit = dB\nrange_axis_m = {}\ndoppler_axis_hz = {}\n{SEPARATOR}\n",
        map.n_range,
        map.n_doppler,
        map.meta.window.name(),
        map.meta.subsample,
        map.meta.slow_time_interval,
        join(&map.range_axis),
        join(&map.doppler_axis),
    );
    out.extend_from_slice(header.as_bytes());
    for v in &map.values_db {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn write_map(path: impl AsRef<Path>, map: &RangeDopplerMap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, map_to_bytes(map)).map_err(|e| Error::from(e).at_path(path))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.is_empty())
        .map(|x| x.trim().parse().map_err(|_| Error::Format(format!("bad axis value `{x}`"))))
        .collect()
}

/// Reads a map written by [`write_map`]. Linear magnitudes are rebuilt from
/// the dB values relative to a unit peak.
pub fn map_from_bytes(bytes: &[u8]) -> Result<RangeDopplerMap> {
    let marker = format!("\n{SEPARATOR}\n");
    let pos = bytes
        .windows(marker.len())
        .position(|w| w == marker.as_bytes())
        .ok_or_else(|| Error::Format("map header separator not found".into()))?;
    let header = std::str::from_utf8(&bytes[..pos]).map_err(|_| Error::Format("map header is not UTF-8".into()))?;
    let mut lines = header.lines();
    if lines.next() != Some(MAP_MAGIC) {
        return Err(Error::Format("bad map magic".into()));
    }
    let mut get = std::collections::HashMap::new();
    for (i, line) in lines.enumerate() {
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| Error::Format(format!("map header line {}: expected `key = value`", i + 2)))?;
        get.insert(k, v);
    }
    let field = |k: &str| get.get(k).copied().ok_or_else(|| Error::Format(format!("map header lacks `{k}`")));
    let num = |k: &str| -> Result<f64> { field(k)?.parse().map_err(|_| Error::Format(format!("bad `{k}`"))) };
    let n_range = num("n_range")? as usize;
    let n_doppler = num("n_doppler")? as usize;
    let window = match field("window")? {
        "hann" => Window::Hann,
        "rect" => Window::Rect,
        w => return Err(Error::Format(format!("unknown window `{w}`"))),
    };
    let data = &bytes[pos + marker.len()..];
    if data.len() != n_range * n_doppler * 4 {
        return Err(Error::Format(format!("expected {} map values", n_range * n_doppler)));
    }
    let values_db: Vec<f64> = data
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(RangeDopplerMap {
        n_range,
        n_doppler,
        magnitude: values_db.iter().map(|db| 10f64.powf(db / 20.0)).collect(),
        values_db,
        range_axis: parse_list(field("range_axis_m")?)?,
        doppler_axis: parse_list(field("doppler_axis_hz")?)?,
        meta: MapMetadata {
            window,
            range_fft_len: n_range,
            doppler_fft_len: n_doppler,
            subsample: num("subsample")? as usize,
            slow_time_interval: num("slow_time_interval_s")?,
        },
    })
}

pub fn read_map(path: impl AsRef<Path>) -> Result<RangeDopplerMap> {
    let path = path.as_ref();
    map_from_bytes(&fs::read(path).map_err(|e| Error::from(e).at_path(path))?)
}

/// Wide CSV: first row holds the Doppler axis, each further row a range bin.
pub fn write_map_csv<W: Write>(w: &mut W, map: &RangeDopplerMap) -> Result<()> {
    write!(w, "range_m")?;
    for f in &map.doppler_axis {
        write!(w, ",{f}")?;
    }
    writeln!(w)?;
    for (r, row) in map.values_db.chunks(map.n_doppler).enumerate() {
        write!(w, "{}", map.range_axis[r])?;
        for v in row {
            write!(w, ",{v:.3}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
