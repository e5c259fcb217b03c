//! Shared reference implementations for integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udar::geometry::{derive_angles, BistaticLink, PropellerGeometry, Vec3};
use udar::propeller::{PropellerReturnParams, Reflectivity};
use udar::waveform::{generate_symbols, Modulation, OfdmConfig, SymbolMatrix};
use udar::{Complex64, SPEED_OF_LIGHT};

/// Cells per blade for the brute-force blade integral.
pub const ORACLE_CELLS: usize = 10_000;

/// Brute-force blade returns: every blade is cut into `cells` equal segments,
/// each point is a scatterer of line density 1/2 whose range is evaluated
/// directly, and the segment integral uses Simpson's rule. Segments that
/// straddle a bin edge are split at the edge, located by bisection on bin
/// membership, so no closed-form window enters the reference.
pub fn blade_oracle(
    params: &PropellerReturnParams,
    d: &SymbolMatrix,
    cfg: &OfdmConfig,
    cells: usize,
) -> Vec<Complex64> {
    let n_sub = cfg.n_subcarriers;
    let delta = SPEED_OF_LIGHT * cfg.symbol_duration / n_sub as f64;
    let lb = params.blade_length;
    let h = lb / cells as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n_sub * cfg.n_symbols];

    // bin that receives range r, modulo the fast-time period
    let bin = |r: f64| ((r / delta).ceil() as i64).rem_euclid(n_sub as i64) as usize;

    for m in 0..cfg.n_symbols {
        let ang = params.angles.at(m);
        for mu in 0..n_sub {
            let t = (m as f64 * cfg.symbol_spacing as f64 + mu as f64 / n_sub as f64) * cfg.symbol_duration;
            let mut channel = vec![Complex64::new(0.0, 0.0); n_sub];
            for i in 0..params.n_blades {
                let phase = ang.phi_b + params.phi0 + TAU * i as f64 / params.n_blades as f64;
                let psi = ang.a_b * (ang.omega * t + phase).cos();
                let range = |l: f64| ang.r_o - psi * l;
                let inside = |l: f64| bin(range(l)) == mu;
                for c in 0..cells {
                    let (a, b) = (c as f64 * h, (c + 1) as f64 * h);
                    let (ia, ib) = (inside(a), inside(b));
                    let (lo, hi) = match (ia, ib) {
                        (true, true) => (a, b),
                        (false, false) => continue,
                        _ => {
                            let (mut x_in, mut x_out) = if ia { (a, b) } else { (b, a) };
                            for _ in 0..80 {
                                let mid = 0.5 * (x_in + x_out);
                                if inside(mid) {
                                    x_in = mid;
                                } else {
                                    x_out = mid;
                                }
                            }
                            if ia {
                                (a, x_in)
                            } else {
                                (x_in, b)
                            }
                        }
                    };
                    let w = (hi - lo) / 6.0 * 0.5;
                    for (x, weight) in [(lo, w), (0.5 * (lo + hi), 4.0 * w), (hi, w)] {
                        let r = range(x);
                        // e^{−j ω_n r / c} by recurrence over n
                        let k0 = TAU * cfg.carrier_freq / SPEED_OF_LIGHT;
                        let step = Complex64::from_polar(1.0, -TAU * r / (SPEED_OF_LIGHT * cfg.symbol_duration));
                        let mut e = Complex64::from_polar(weight, -k0 * r);
                        for (n, ch) in channel.iter_mut().enumerate() {
                            *ch += params.reflectivity.at(n) * e;
                            e *= step;
                        }
                    }
                }
            }
            let y: Complex64 = (0..n_sub)
                .map(|n| {
                    let tw = Complex64::from_polar(1.0, TAU * ((n * mu) % n_sub) as f64 / n_sub as f64);
                    d.get(n, m) * tw * channel[n]
                })
                .sum();
            out[m * n_sub + mu] = y;
        }
    }
    out
}

/// `max |a − b| / max |b|`.
pub fn max_rel_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    diff / scale
}

/// One randomized high range resolution configuration.
pub struct HrrCase {
    pub params: PropellerReturnParams,
    pub cfg: OfdmConfig,
    pub symbols: SymbolMatrix,
    pub span_bins: f64,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random geometry and OFDM grid with `N ≤ 32`, `M ≤ 16`, `N_B ≤ 4` and a
/// blade spanning between one and `N − 2` bins.
pub fn random_hrr_case(seed: u64) -> HrrCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (link, prop, angles) = loop {
        let drone = Vec3::zeros();
        let tx = random_unit(&mut rng) * rng.random_range(2.0..20.0);
        let rx = random_unit(&mut rng) * rng.random_range(2.0..20.0);
        let Ok(link) = BistaticLink::new(tx, rx, drone) else { continue };
        let omega = rng.random_range(100.0..400.0);
        let prop = PropellerGeometry {
            rotation_center: random_unit(&mut rng) * 0.2,
            omega_vec: random_unit(&mut rng) * omega,
            phi0: rng.random_range(0.0..TAU),
            n_blades: rng.random_range(1..=4),
            blade_length: rng.random_range(0.05..0.3),
        };
        let Ok(angles) = derive_angles(&link, &prop) else { continue };
        if angles.a_b >= 0.2 {
            break (link, prop, angles);
        }
    };
    let _ = link;
    let n = rng.random_range(4..=32usize);
    let m = rng.random_range(2..=16usize);
    let span_bins = rng.random_range(1.0..(n as f64 - 2.0).max(1.5));
    let delta = 2.0 * angles.a_b * prop.blade_length / span_bins;
    let t = n as f64 * delta / SPEED_OF_LIGHT;
    let bandwidth = n as f64 / t;
    let f0 = rng.random_range(bandwidth..3.0 * bandwidth);
    // rotate 0.1..1 rad between simulated symbols
    let turn = rng.random_range(0.1..1.0);
    let spacing = ((turn / (angles.omega * t)).round() as u64).max(1);
    let modulation = [Modulation::Psk(1), Modulation::Psk(4), Modulation::Qam(16), Modulation::UnitRandomPhase]
        [rng.random_range(0..4)];
    let cfg = OfdmConfig::new(n, t, f0, m, modulation, rng.random()).with_symbol_spacing(spacing);
    let symbols = generate_symbols(&cfg).unwrap();
    let gamma = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..TAU));
    let params = PropellerReturnParams::new(angles, prop.phi0, prop.n_blades, prop.blade_length, Reflectivity::Constant(gamma));
    HrrCase { params, cfg, symbols, span_bins }
}

/// Transmitter and receiver at `range` from the origin, `β/2` either side of
/// the +x axis and `el` below the drone.
pub fn symmetric_link(beta: f64, el: f64, range: f64, drone: Vec3) -> BistaticLink {
    let dir = |az: f64| Vec3::new(az.cos() * el.cos(), az.sin() * el.cos(), -el.sin()) * range;
    BistaticLink::new(dir(-beta / 2.0), dir(beta / 2.0), drone).unwrap()
}

/// Measured and predicted narrowband signature of one rotor.
pub struct NarrowbandCase {
    pub bin_hz: f64,
    pub spacing_hz: f64,
    pub spacing_expected_hz: f64,
    pub spread_hz: f64,
    pub spread_expected_hz: f64,
}

/// Single-tone signature at 10 GHz, 10 kHz sampling, two full turns.
pub fn narrowband_case(beta_deg: f64, n_blades: usize, rpm: f64) -> NarrowbandCase {
    use udar::processing::{doppler_spectrum, Window};
    use udar::propeller::{narrowband_returns, NarrowbandForm, SingleToneConfig};
    let (lb, dt) = (0.1, 1e-4);
    let link = symmetric_link(beta_deg.to_radians(), 20f64.to_radians(), 100.0, Vec3::zeros());
    let omega = udar::drone::rpm_to_rad_s(rpm);
    let prop = PropellerGeometry { rotation_center: Vec3::zeros(), omega_vec: Vec3::z() * omega, phi0: 0.3, n_blades, blade_length: lb };
    let ang = derive_angles(&link, &prop).unwrap();
    let params = PropellerReturnParams::new(ang, prop.phi0, n_blades, lb, Reflectivity::Constant(Complex64::new(1.0, 0.0)));
    let n = (2.0 * TAU / omega / dt).round() as usize;
    let tone = SingleToneConfig { carrier_freq: 10e9, sample_interval: dt, n_samples: n };
    let series = narrowband_returns(&params, &tone, NarrowbandForm::Bistatic).unwrap();
    let spec = doppler_spectrum(&series, dt, Window::Hann, None).unwrap();
    let m = spec.metrics().unwrap();
    NarrowbandCase {
        bin_hz: spec.bin_width(),
        spacing_hz: m.spike_spacing_hz,
        spacing_expected_hz: n_blades as f64 * omega / TAU,
        spread_hz: m.doppler_spread_hz,
        spread_expected_hz: ang.doppler_spread(lb, tone.wavelength()),
    }
}

/// Two rotors at 1500 and 2000 rpm, 10° bistatic angle, 100 m stations,
/// B = 1 GHz, N = 64, f₀ = 10 GHz, 1200 symbols at 100 µs. Both rotation
/// centers are moved along the bisector (starting at ±0.6 m) until they sit
/// on the middle of a range bin, so both blades see the same gating.
pub fn two_rotor_setup() -> (udar::drone::DroneConfig, OfdmConfig, SymbolMatrix) {
    use udar::drone::{DroneConfig, DronePropeller};
    let link = symmetric_link(10f64.to_radians(), 0.0, 100.0, Vec3::zeros());
    let n = 64;
    let t = n as f64 / 1e9;
    let ofdm = OfdmConfig::new(n, t, 10e9, 1200, Modulation::Psk(1), 5).with_symbol_spacing((1e-4 / t).round() as u64);
    let delta = ofdm.range_bin();
    let mut drone = DroneConfig::new(link);
    for (x0, rpm) in [(0.6, 1500.0), (-0.6, 2000.0)] {
        let r_o = |x: f64| link.bistatic_range_at(&Vec3::new(x, 0.0, 0.0));
        let target = ((r_o(x0) / delta).floor() + 0.5) * delta;
        // r_o falls as x grows toward the stations
        let (mut lo, mut hi) = (x0 - delta, x0 + delta);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if r_o(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        drone.propellers.push(DronePropeller::new(Vec3::new(0.5 * (lo + hi), 0.0, 0.0), Vec3::z(), rpm, 2, 0.1).with_phi0(0.2));
    }
    let d = generate_symbols(&ofdm).unwrap();
    (drone, ofdm, d)
}
