//! Two rotors in separate range bins at 1500 and 2000 rpm: each keeps its own
//! Doppler spread in the range-Doppler map.

use udar::drone::{simulate_drone, DroneConfig, DronePropeller};
use udar::geometry::{BistaticLink, Vec3};
use udar::processing::{range_doppler, RangeDopplerOptions};
use udar::runner::metrics_report;
use udar::waveform::{generate_symbols, Modulation, OfdmConfig};

fn main() -> udar::Result<()> {
    let beta = 10f64.to_radians();
    let station = |az: f64| Vec3::new(az.cos(), az.sin(), 0.0) * 100.0;
    let mut drone = DroneConfig::new(BistaticLink::new(station(-beta / 2.0), station(beta / 2.0), Vec3::zeros())?);
    for (x, rpm) in [(0.6, 1500.0), (-0.6, 2000.0)] {
        drone.propellers.push(DronePropeller::new(Vec3::new(x, 0.0, 0.0), Vec3::z(), rpm, 2, 0.1).with_phi0(0.2));
    }

    let n = 64;
    let t = n as f64 / 1e9;
    let ofdm = OfdmConfig::new(n, t, 10e9, 1200, Modulation::Psk(1), 5).with_symbol_spacing((1e-4 / t).round() as u64);
    let d = generate_symbols(&ofdm)?;
    let frame = simulate_drone(&drone, &d, &ofdm)?;
    let map = range_doppler(&frame, &d, &RangeDopplerOptions::default())?;
    let report = metrics_report(&map, &drone, &ofdm)?;

    println!("Doppler bin {:.2} Hz", report.doppler_bin_hz);
    let mut spreads = Vec::new();
    for p in &report.propellers {
        let m = p.measured.as_ref().expect("both rotors resolved");
        println!(
            "rotor {} @ {:4.0} rpm: bins {:?} (center {}, strongest {:?}), B_D {:7.1} Hz (predicted {:7.1}), spacing {:5.1} Hz",
            p.index, p.rpm, p.range_bins, p.expected_range_bin, m.peak_range_bin, m.doppler_spread_hz, p.expected_doppler_spread_hz, m.spike_spacing_hz
        );
        spreads.push(m.doppler_spread_hz);
    }
    println!("spread ratio {:.3} (rpm ratio {:.3})", spreads[1] / spreads[0], 2000.0 / 1500.0);
    Ok(())
}
