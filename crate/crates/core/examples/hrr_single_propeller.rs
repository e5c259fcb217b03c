//! Wideband OFDM returns of one rotor, processed into a range-Doppler map
//! and written as binary map plus CSV.

use std::fs::File;
use std::io::BufWriter;

use udar::geometry::{BistaticLink, PropellerGeometry, Vec3};
use udar::processing::{range_doppler, write_map, write_map_csv, RangeDopplerOptions};
use udar::propeller::{propeller_returns, PropellerReturnParams, Reflectivity};
use udar::waveform::{generate_symbols, Modulation, OfdmConfig};

fn main() -> udar::Result<()> {
    let link = BistaticLink::new(Vec3::new(-20.0, -20.0, -5.0), Vec3::new(20.0, -25.0, -5.0), Vec3::zeros())?;
    let prop = PropellerGeometry {
        rotation_center: Vec3::zeros(),
        omega_vec: Vec3::z() * udar::drone::rpm_to_rad_s(2400.0),
        phi0: 0.0,
        n_blades: 3,
        blade_length: 0.15,
    };
    // 64 subcarriers over 2 GHz; one symbol every 50 µs
    let n = 64;
    let t = n as f64 / 2e9;
    let ofdm = OfdmConfig::new(n, t, 24e9, 1000, Modulation::Psk(1), 11).with_symbol_spacing((50e-6 / t).round() as u64);
    let d = generate_symbols(&ofdm)?;
    let params = PropellerReturnParams::from_geometry(&link, &prop, Reflectivity::Constant(udar::Complex64::new(1.0, 0.0)))?;
    let frame = propeller_returns(&params, &d, &ofdm)?;
    let map = range_doppler(&frame, &d, &RangeDopplerOptions::default())?;

    let (pr, pd) = map.peak();
    println!("range bin {:.3} m, Doppler bin {:.2} Hz", ofdm.range_bin(), map.doppler_bin_width());
    println!("peak at range bin {pr} ({:.2} m mod {:.2} m), {:.1} Hz", map.range_axis[pr], n as f64 * ofdm.range_bin(), map.doppler_axis[pd]);
    let rows: Vec<String> = map
        .range_profile()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 1e-3 * map.range_profile()[pr])
        .map(|(k, _)| k.to_string())
        .collect();
    println!("occupied range bins: {}", rows.join(" "));

    let dir = std::env::temp_dir().join("udar-examples");
    std::fs::create_dir_all(&dir)?;
    write_map(dir.join("hrr_single.rdmap"), &map)?;
    write_map_csv(&mut BufWriter::new(File::create(dir.join("hrr_single.csv"))?), &map)?;
    println!("wrote {}", dir.join("hrr_single.{rdmap,csv}").display());
    Ok(())
}
