//! Acceptance checks, one `[PASS]`/`[FAIL]` line per criterion plus its
//! wall-clock budget. Tolerances are the constants below; none is widened
//! to make a run pass.

mod common;

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use udar::drone::{body_returns, simulate_drone, vibration_walk, BodyModelConfig, DroneConfig, DronePropeller, VibrationConfig};
use udar::geometry::{bistatic_range_rotating_point, derive_angles, monostatic_range, BistaticLink, PropellerGeometry, RotationFrame, Vec3};
use udar::processing::{channel_estimate, dc_fraction, range_bin_series, range_doppler, range_profiles, RangeDopplerOptions};
use udar::propeller::{
    blade_windows_cyclic, narrowband_returns, propeller_returns, wrapped_range_bin, NarrowbandForm, PropellerReturnParams,
    Reflectivity, SingleToneConfig,
};
use udar::runner::{metrics_report, run_scenario, RunOptions};
use udar::waveform::{generate_symbols, tx_baseband_frame, Modulation, OfdmConfig};
use udar::Complex64;

// criterion 1
const ORACLE_CONFIGS: u64 = 50;
const ORACLE_REL_TOL: f64 = 1e-6;
// criteria 2–4, in Doppler bins
const SPACING_TOL_BINS: f64 = 1.0;
const SPREAD_TOL_BINS: f64 = 2.0;
const RATIO_TOL_BINS: f64 = 1.0;
// criterion 5
const MONO_SAMPLES: usize = 10_000;
// criterion 6
const DC_FRACTION_STILL: f64 = 0.99;
// criterion 7: anything below this share of the peak counts as empty
const EMPTY_BIN_LEVEL: f64 = 1e-10;
// criterion 8; blade phases near k R_O ~ 1e4 rad leave ~1e-12 of reordering noise
const ADDITIVITY_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-12;

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: [(u32, &str, u64, Check); 8] = [
        (1, "closed form vs brute-force blade", 300, closed_form_vs_oracle),
        (2, "spike spacing N_B ω/2π", 60, spike_spacing),
        (3, "Doppler spread law", 120, doppler_spread_law),
        (4, "two-rotor 4:3 spread ratio", 60, two_rotor_ratio),
        (5, "monostatic reduction", 10, monostatic_reduction),
        (6, "body DC fraction vs vibration", 60, body_vibration),
        (7, "forward-scatter clamp", 10, forward_scatter),
        (8, "property suites", 120, property_suites),
    ];
    let mut failed = 0;
    for (n, name, budget_s, check) in criteria {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = t0.elapsed();
        let budget = Duration::from_secs(budget_s);
        let (ok, detail) = match result {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget_s} s budget")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] criterion {n} {name}: {detail} ({:.2} s / {budget_s} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_form_vs_oracle() -> Result<String, String> {
    let errs: Vec<(u64, f64, usize, usize)> = (0..ORACLE_CONFIGS)
        .into_par_iter()
        .map(|seed| {
            let case = random_hrr_case(seed);
            let closed = propeller_returns(&case.params, &case.symbols, &case.cfg).unwrap();
            let oracle = blade_oracle(&case.params, &case.symbols, &case.cfg, ORACLE_CELLS);
            (seed, max_rel_error(&closed.values, &oracle), case.cfg.n_subcarriers, case.cfg.n_symbols)
        })
        .collect();
    let worst = errs.iter().copied().fold((0, 0.0, 0, 0), |a, b| if b.1 > a.1 { b } else { a });
    ensure(worst.1 <= ORACLE_REL_TOL, || format!("seed {} (N={}, M={}) rel error {:.3e} > {ORACLE_REL_TOL:e}", worst.0, worst.2, worst.3, worst.1))?;
    Ok(format!("{} configs, worst rel error {:.2e} (seed {}), tol {ORACLE_REL_TOL:e}", errs.len(), worst.1, worst.0))
}

fn spike_spacing() -> Result<String, String> {
    let classic = narrowband_case(30.0, 2, 1500.0);
    ensure((classic.spacing_hz - 50.0).abs() <= SPACING_TOL_BINS * classic.bin_hz, || {
        format!("N_B=2, 1500 rpm: Δf {:.2} Hz vs 50 Hz", classic.spacing_hz)
    })?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for nb in [2, 3, 4] {
        for rpm in [1000.0, 1500.0, 2000.0, 2500.0, 3000.0] {
            let c = narrowband_case(30.0, nb, rpm);
            let e = (c.spacing_hz - c.spacing_expected_hz).abs() / c.bin_hz;
            ensure(e <= SPACING_TOL_BINS, || format!("N_B={nb} {rpm} rpm: Δf {:.2} vs {:.2} Hz ({e:.2} bins)", c.spacing_hz, c.spacing_expected_hz))?;
            worst = worst.max(e);
            count += 1;
        }
    }
    Ok(format!("N_B=2/1500 rpm Δf = {:.2} Hz; {count} cases, worst {worst:.2} bins (tol {SPACING_TOL_BINS})", classic.spacing_hz))
}

fn doppler_spread_law() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for beta in [10.0, 30.0, 60.0, 90.0] {
        for rpm in [1000.0, 1500.0, 2000.0, 2500.0, 3000.0] {
            let c = narrowband_case(beta, 2, rpm);
            let e = (c.spread_hz - c.spread_expected_hz).abs() / c.bin_hz;
            ensure(e <= SPREAD_TOL_BINS, || format!("β={beta}° {rpm} rpm: B_D {:.1} vs {:.1} Hz ({e:.2} bins)", c.spread_hz, c.spread_expected_hz))?;
            worst = worst.max(e);
            count += 1;
        }
    }
    Ok(format!("{count} cases over β ∈ {{10,30,60,90}}°, worst {worst:.2} bins (tol {SPREAD_TOL_BINS})"))
}

fn two_rotor_ratio() -> Result<String, String> {
    let (drone, ofdm, d) = two_rotor_setup();
    let frame = simulate_drone(&drone, &d, &ofdm).map_err(|e| e.to_string())?;
    let map = range_doppler(&frame, &d, &RangeDopplerOptions::default()).map_err(|e| e.to_string())?;
    let report = metrics_report(&map, &drone, &ofdm).map_err(|e| e.to_string())?;
    let bin = report.doppler_bin_hz;
    let (a, b) = (&report.propellers[0], &report.propellers[1]);
    ensure(a.range_bins.iter().all(|k| !b.range_bins.contains(k)), || "rotor range bins overlap".into())?;
    let rp = map.range_profile();
    for p in [a, b] {
        // strongest bin in a neighbourhood wider than the blade span
        let k0 = p.expected_range_bin as i64;
        let near: Vec<usize> = (k0 - 3..=k0 + 3).map(|k| k.rem_euclid(ofdm.n_subcarriers as i64) as usize).collect();
        let strongest = *near.iter().max_by(|x, y| rp[**x].total_cmp(&rp[**y])).unwrap();
        ensure(strongest == p.expected_range_bin, || format!("rotor {} peaks in bin {strongest}, expected {}", p.index, p.expected_range_bin))?;
    }
    let spread = |p: &udar::runner::PropellerReport| p.measured.as_ref().map(|m| m.doppler_spread_hz).ok_or_else(|| p.error.clone().unwrap_or_default());
    let (b1, b2) = (spread(a)?, spread(b)?);
    let misfit = (b2 - 4.0 / 3.0 * b1).abs() / bin;
    ensure(misfit <= RATIO_TOL_BINS, || format!("B_D {b1:.1} / {b2:.1} Hz, ratio {:.4}, misfit {misfit:.2} bins", b2 / b1))?;
    Ok(format!(
        "B_D {b1:.1} / {b2:.1} Hz, ratio {:.4} (4/3), misfit {misfit:.2} bins (tol {RATIO_TOL_BINS}); bins {} / {}",
        b2 / b1,
        a.expected_range_bin,
        b.expected_range_bin
    ))
}

fn monostatic_reduction() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let station = Vec3::new(-70.0, 30.0, -20.0);
    let link = BistaticLink::monostatic(station, Vec3::zeros()).unwrap();
    let prop = PropellerGeometry {
        rotation_center: Vec3::new(0.1, -0.2, 0.05),
        omega_vec: Vec3::new(0.2, -0.1, 1.0).normalize() * 300.0,
        phi0: 0.7,
        n_blades: 3,
        blade_length: 0.2,
    };
    let ang = derive_angles(&link, &prop).unwrap();
    let frame = RotationFrame::new(&link, &prop).unwrap();
    let mut worst_first_order: f64 = 0.0;
    for _ in 0..MONO_SAMPLES {
        let l = rng.random_range(0.0..prop.blade_length);
        let t = rng.random_range(0.0..1.0);
        let p = prop.rotation_center + frame.blade_direction(ang.omega * t + prop.phi0) * l;
        let bistatic = link.bistatic_range_at(&p);
        let mono = (p - station).norm();
        ensure(bistatic == 2.0 * mono, || format!("l={l} t={t}: {bistatic} ≠ 2 × {mono}"))?;
        let approx = bistatic_range_rotating_point(&ang, l, t - prop.phi0 / ang.omega);
        let classic = 2.0 * monostatic_range(ang.r_t, ang.beta_t.sin(), l, ang.omega, t - prop.phi0 / ang.omega, 0.0);
        worst_first_order = worst_first_order.max((approx - classic).abs() / ang.r_o);
    }
    ensure(worst_first_order <= 8.0 * f64::EPSILON, || format!("first-order forms differ by {worst_first_order:.2e} relative"))?;

    let params = PropellerReturnParams::new(ang, prop.phi0, prop.n_blades, prop.blade_length, Reflectivity::Constant(Complex64::new(1.0, 0.0)));
    let tone = SingleToneConfig { carrier_freq: 10e9, sample_interval: 2e-5, n_samples: 2000 };
    let bi = narrowband_returns(&params, &tone, NarrowbandForm::Bistatic).unwrap();
    let mono = narrowband_returns(&params, &tone, NarrowbandForm::MonostaticPrinted).unwrap();
    let nb_err = max_rel_error(&bi, &mono);
    ensure(nb_err <= 1e-9, || format!("narrowband forms differ by {nb_err:.2e}"))?;
    Ok(format!(
        "{MONO_SAMPLES} samples exactly 2×; first-order gap {worst_first_order:.1e}; narrowband forms agree to {nb_err:.1e}"
    ))
}

/// Energy-weighted zero-Doppler share of the slow-time series of `bins`.
fn pooled_dc_fraction(frame: &udar::propeller::IqFrame, d: &udar::waveform::SymbolMatrix, bins: &[usize]) -> f64 {
    let (mut dc, mut total) = (0.0, 0.0);
    for &k in bins {
        let s = range_bin_series(frame, d, k).unwrap();
        let e: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        dc += dc_fraction(&s) * e;
        total += e;
    }
    dc / total
}

fn body_vibration() -> Result<String, String> {
    let link = symmetric_link(40f64.to_radians(), 15f64.to_radians(), 60.0, Vec3::zeros());
    let n = 64;
    let t = n as f64 / 1e9;
    // λ₀ = 3 cm
    let ofdm = OfdmConfig::new(n, t, 10e9, 512, Modulation::Psk(1), 6).with_symbol_spacing((1e-4 / t).round() as u64);
    let d = generate_symbols(&ofdm).unwrap();
    let mut drone = DroneConfig::new(link);
    drone.body = BodyModelConfig::gaussian(Complex64::new(1.0, 0.0), 0.5);
    let still = body_returns(&drone, &d, &ofdm, &vec![0.0; ofdm.n_symbols]).unwrap();
    let map = range_doppler(&still, &d, &RangeDopplerOptions::default()).unwrap();
    let rp = map.range_profile();
    let top = rp.iter().copied().fold(0.0, f64::max);
    let bins: Vec<usize> = (0..n).filter(|&k| rp[k] > 1e-6 * top).collect();
    let dc_still = pooled_dc_fraction(&still, &d, &bins);

    drone.vibration = VibrationConfig { d0: 1e-3, enabled: true, seed: 17, apply_to_propellers: false };
    let walk = vibration_walk(&drone.vibration, ofdm.n_symbols).unwrap();
    let shaken = body_returns(&drone, &d, &ofdm, &walk).unwrap();
    let dc_shaken = pooled_dc_fraction(&shaken, &d, &bins);
    let shaken_map = range_doppler(&shaken, &d, &RangeDopplerOptions::default()).unwrap();
    let profile = shaken_map.doppler_profile(bins.iter().copied()).unwrap();
    let bin = shaken_map.doppler_bin_width();
    // energy beyond the Hann main lobe of zero Doppler
    let off: f64 = profile.iter().zip(&shaken_map.doppler_axis).filter(|(_, f)| f.abs() > 2.5 * bin).map(|(p, _)| p).sum();
    let off_share = off / profile.iter().sum::<f64>();

    ensure(dc_still >= DC_FRACTION_STILL, || format!("still body DC fraction {dc_still:.4} < {DC_FRACTION_STILL}"))?;
    ensure(dc_shaken < dc_still, || format!("vibrating DC fraction {dc_shaken:.4} not below {dc_still:.4}"))?;
    ensure(off_share > 1e-3, || format!("only {off_share:.2e} of the energy off zero Doppler"))?;
    Ok(format!("DC fraction {dc_still:.4} still, {dc_shaken:.4} at D₀ = 1 mm; {:.1}% energy off DC, {} body bins", 100.0 * off_share, bins.len()))
}

fn forward_scatter() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("forward.toml");
    std::fs::write(
        &path,
        r#"
seed = 8
[link]
beta_deg = 180
tx_range_m = 40
[ofdm]
n_subcarriers = 64
bandwidth_hz = 1e9
carrier_hz = 10e9
n_symbols = 128
modulation = "psk1"
slow_time_interval_s = 1e-4
[[drone.propellers]]
position_m = [0.0, 0.3, 0.0]
rpm = 3000
blade_length_m = 0.1
[body]
kind = "gaussian"
d_max_m = 0.8
[output]
name = "forward"
"#,
    )
    .map_err(|e| e.to_string())?;
    let out = run_scenario(&path, &RunOptions { output_dir: Some(dir.path().to_path_buf()) }).map_err(|e| e.to_string())?;
    ensure(out.files().iter().all(|f| f.exists()), || "missing outputs".into())?;

    let scenario = udar::runner::ScenarioFile::load(&path).map_err(|e| e.to_string())?;
    let run = scenario.resolve(0).map_err(|e| e.to_string())?;
    let beta = run.drone.link.bistatic_angle_at(&run.drone.link.drone_center).unwrap();
    let body = body_returns(&run.drone, &run.symbols, &run.ofdm, &vec![0.0; run.ofdm.n_symbols]).map_err(|e| e.to_string())?;
    ensure(body.is_finite(), || "non-finite body returns".into())?;
    let map = range_doppler(&body, &run.symbols, &run.processing).map_err(|e| e.to_string())?;
    let rp = map.range_profile();
    let top = rp.iter().copied().fold(0.0, f64::max);
    let occupied: Vec<usize> = (0..rp.len()).filter(|&k| rp[k] > EMPTY_BIN_LEVEL * top).collect();
    let expected = wrapped_range_bin(run.drone.body_range(0.0), run.ofdm.range_bin(), run.ofdm.n_subcarriers);
    ensure(occupied == vec![expected], || format!("body occupies bins {occupied:?}, expected [{expected}]"))?;
    Ok(format!("β = {:.4}°, run finite, body confined to bin {expected}", beta.to_degrees()))
}

fn property_suites() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);

    // window partition: Σ over fast-time samples of (l2 − l1) = L_B
    let mut worst_partition: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(2..64usize);
        let delta = rng.random_range(0.01..0.5);
        let lb = rng.random_range(0.01..1.0);
        let r_o = rng.random_range(0.5..200.0);
        let psi = rng.random_range(-2.0..2.0);
        let total: f64 = (0..n).flat_map(|mu| blade_windows_cyclic(r_o, psi, mu, delta, n, lb)).map(|w| w.len()).sum();
        worst_partition = worst_partition.max((total - lb).abs() / lb);
    }
    ensure(worst_partition <= IDENTITY_TOL, || format!("window partition off by {worst_partition:.2e}"))?;

    // blade additivity: the rotor equals the sum of its blades
    let mut worst_add: f64 = 0.0;
    for seed in 0..20 {
        let case = random_hrr_case(500 + seed);
        let whole = propeller_returns(&case.params, &case.symbols, &case.cfg).unwrap();
        let mut sum = vec![Complex64::new(0.0, 0.0); whole.values.len()];
        for i in 0..case.params.n_blades {
            let one = propeller_returns(&case.params.single_blade(i), &case.symbols, &case.cfg).unwrap();
            sum.iter_mut().zip(&one.values).for_each(|(s, v)| *s += v);
        }
        worst_add = worst_add.max(max_rel_error(&whole.values, &sum));
    }
    ensure(worst_add <= ADDITIVITY_TOL, || format!("blade additivity off by {worst_add:.2e}"))?;

    // determinism under parallelism: bit-identical across pool sizes
    let link = symmetric_link(50f64.to_radians(), 0.2, 30.0, Vec3::zeros());
    let mut drone = DroneConfig::new(link);
    drone.seed = 99;
    drone.noise_variance = 0.1;
    drone.body = BodyModelConfig::gaussian(Complex64::new(0.5, 0.1), 0.4);
    drone.vibration = VibrationConfig { d0: 2e-4, enabled: true, seed: 3, apply_to_propellers: true };
    for k in 0..4 {
        let a = TAU * k as f64 / 4.0;
        drone.propellers.push(DronePropeller::new(Vec3::new(0.3 * a.cos(), 0.3 * a.sin(), 0.0), Vec3::z(), 2500.0 + 300.0 * k as f64, 2, 0.1));
    }
    let ofdm = OfdmConfig::new(32, 32e-9, 10e9, 64, Modulation::Psk(4), 12).with_symbol_spacing(3000);
    let d = generate_symbols(&ofdm).unwrap();
    let frames: Vec<Vec<Complex64>> = [1, 2, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| simulate_drone(&drone, &d, &ofdm).unwrap().values)
        })
        .collect();
    ensure(frames.windows(2).all(|w| w[0] == w[1]), || "frames differ across pool sizes".into())?;

    // Parseval and subcarrier orthogonality
    let mut worst_parseval: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for seed in 0..20 {
        let n = [8, 16, 31, 64][seed % 4];
        let cfg = OfdmConfig::new(n, n as f64 * 1e-9, 5e9, 6, Modulation::Qam(16), seed as u64);
        let d = generate_symbols(&cfg).unwrap();
        let x = tx_baseband_frame(&d);
        let et: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ef: f64 = d.values().iter().map(|v| v.norm_sqr()).sum();
        worst_parseval = worst_parseval.max((et - n as f64 * ef).abs() / (n as f64 * ef));
        // an unmodified transmission estimates a flat unit channel
        let mut frame = udar::propeller::IqFrame::zeros(&cfg);
        frame.values = x;
        let h = channel_estimate(&frame, &d).unwrap();
        worst_orth = worst_orth.max(h.values.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max));
        // and the range profile of that channel is a single tap at zero delay
        let p = range_profiles(&h);
        let leak = p.chunks(n).map(|c| c[1..].iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
        worst_orth = worst_orth.max(leak / n as f64);
    }
    ensure(worst_parseval <= IDENTITY_TOL, || format!("Parseval off by {worst_parseval:.2e}"))?;
    ensure(worst_orth <= IDENTITY_TOL, || format!("orthogonality off by {worst_orth:.2e}"))?;
    Ok(format!(
        "partition {worst_partition:.1e}, additivity {worst_add:.1e}, pools 1/2/8 identical, Parseval {worst_parseval:.1e}, orthogonality {worst_orth:.1e}"
    ))
}
