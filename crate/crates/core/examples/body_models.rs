//! Static body returns: the Gaussian envelope against a measured S21
//! profile, and how vibration moves energy off zero Doppler.

use udar::drone::{body_returns, BodyModelConfig, DroneConfig, S21Profile, VibrationConfig};
use udar::geometry::{BistaticLink, Vec3};
use udar::processing::{dc_fraction, range_bin_series, range_doppler, RangeDopplerOptions};
use udar::propeller::wrapped_range_bin;
use udar::waveform::{generate_symbols, Modulation, OfdmConfig};
use udar::Complex64;

fn main() -> udar::Result<()> {
    let beta = 60f64.to_radians();
    let station = |az: f64| Vec3::new(az.cos(), az.sin(), -0.2) * 50.0;
    let link = BistaticLink::new(station(-beta / 2.0), station(beta / 2.0), Vec3::zeros())?;
    let n = 64;
    let t = n as f64 / 2e9;
    let ofdm = OfdmConfig::new(n, t, 10e9, 256, Modulation::Psk(1), 2).with_symbol_spacing(2000);
    let d = generate_symbols(&ofdm)?;
    let f_lo = ofdm.carrier_freq;
    let f_hi = ofdm.carrier_freq + ofdm.bandwidth();
    // a profile falling 6 dB across the band stands in for a measurement
    let measured = S21Profile::new(vec![f_lo, f_hi], vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)])?;

    let mut drone = DroneConfig::new(link);
    let still = vec![0.0; ofdm.n_symbols];
    for (name, body) in [
        ("gaussian", BodyModelConfig::gaussian(Complex64::new(1.0, 0.0), 0.5)),
        ("s21", BodyModelConfig::measurement(Complex64::new(1.0, 0.0), 0.5, measured)),
    ] {
        drone.body = body;
        let map = range_doppler(&body_returns(&drone, &d, &ofdm, &still)?, &d, &RangeDopplerOptions::default())?;
        let rp = map.range_profile();
        let top = rp.iter().copied().fold(0.0, f64::max);
        let occupied: Vec<String> = (0..n)
            .filter(|&k| rp[k] > 1e-2 * top)
            .map(|k| format!("{k}:{:.1}dB", 10.0 * (rp[k] / top).log10()))
            .collect();
        println!("{name:>8}: bins within 20 dB  {}", occupied.join("  "));
    }

    drone.body = BodyModelConfig::gaussian(Complex64::new(1.0, 0.0), 0.5);
    let k = wrapped_range_bin(drone.body_range(0.0), ofdm.range_bin(), n);
    for d0 in [0.0, 1e-3] {
        drone.vibration = VibrationConfig { d0, enabled: d0 > 0.0, seed: 4, apply_to_propellers: false };
        let walk = udar::drone::vibration_walk(&drone.vibration, ofdm.n_symbols)?;
        let frame = body_returns(&drone, &d, &ofdm, &walk)?;
        let series = range_bin_series(&frame, &d, k)?;
        println!("D0 = {:.0e} m: zero-Doppler fraction at bin {k} = {:.4}", d0, dc_fraction(&series));
    }
    Ok(())
}
