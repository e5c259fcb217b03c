//! Six lift rotors and a pusher from the `vtol7` preset, loaded from a
//! scenario file, with per-rotor metrics next to their predictions.

use std::path::Path;

use udar::drone::simulate_drone;
use udar::processing::range_doppler;
use udar::runner::{metrics_report, ScenarioFile};

fn main() -> udar::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/vtol7.toml");
    let scenario = ScenarioFile::load(&path)?;
    let run = scenario.resolve(0)?;
    let frame = simulate_drone(&run.drone, &run.symbols, &run.ofdm)?;
    let map = range_doppler(&frame, &run.symbols, &run.processing)?;
    let report = metrics_report(&map, &run.drone, &run.ofdm)?;

    println!("range bin {:.3} m, Doppler bin {:.2} Hz", report.range_bin_m, report.doppler_bin_hz);
    println!(" #   rpm  bins          spacing (pred)      B_D (pred)");
    for p in &report.propellers {
        let (sp, bd) = p.measured.as_ref().map_or((f64::NAN, f64::NAN), |m| (m.spike_spacing_hz, m.doppler_spread_hz));
        println!(
            "{:2} {:5.0}  {:12}  {:7.1} ({:7.1})  {:7.1} ({:7.1})",
            p.index,
            p.rpm,
            format!("{:?}", p.range_bins),
            sp,
            p.expected_spike_spacing_hz,
            bd,
            p.expected_doppler_spread_hz
        );
        if let Some(e) = &p.error {
            println!("   {e}");
        }
    }
    Ok(())
}
