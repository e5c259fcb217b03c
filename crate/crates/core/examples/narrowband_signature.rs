//! Single-tone signature of a two-blade rotor: spectrum spikes and Doppler
//! spread against their predictions.

use udar::geometry::{BistaticLink, PropellerGeometry, Vec3};
use udar::processing::{doppler_spectrum, stft, Window};
use udar::propeller::{narrowband_returns, NarrowbandForm, PropellerReturnParams, Reflectivity, SingleToneConfig};

fn main() -> udar::Result<()> {
    let beta = 60f64.to_radians();
    let el = 20f64.to_radians();
    let station = |az: f64| Vec3::new(az.cos() * el.cos(), az.sin() * el.cos(), -el.sin()) * 100.0;
    let link = BistaticLink::new(station(-beta / 2.0), station(beta / 2.0), Vec3::zeros())?;
    let rpm = 1500.0;
    let prop = PropellerGeometry {
        rotation_center: Vec3::zeros(),
        omega_vec: Vec3::z() * udar::drone::rpm_to_rad_s(rpm),
        phi0: 0.3,
        n_blades: 2,
        blade_length: 0.1,
    };
    let params = PropellerReturnParams::from_geometry(&link, &prop, Reflectivity::Constant(udar::Complex64::new(1.0, 0.0)))?;
    // two full turns at 10 kHz
    let tone = SingleToneConfig { carrier_freq: 10e9, sample_interval: 1e-4, n_samples: 800 };
    let series = narrowband_returns(&params, &tone, NarrowbandForm::Bistatic)?;
    let spec = doppler_spectrum(&series, tone.sample_interval, Window::Hann, None)?;
    let m = spec.metrics()?;
    let ang = params.angles.at(0);
    println!("Doppler bin        {:8.2} Hz", spec.bin_width());
    println!("spike spacing      {:8.2} Hz (N_B ω/2π = {:.2})", m.spike_spacing_hz, 2.0 * rpm / 60.0);
    println!("Doppler spread     {:8.1} Hz (predicted {:.1})", m.doppler_spread_hz, ang.doppler_spread(0.1, tone.wavelength()));

    let sg = stft(&series, tone.sample_interval, 64, 16, Window::Hann)?;
    println!("spectrogram: {} frames × {} bins", sg.times.len(), sg.freqs.len());
    Ok(())
}
