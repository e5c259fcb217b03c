//! Symbol matrices and I/Q frames written to disk and read back unchanged.

use udar::propeller::IqFrame;
use udar::runner::iq::{frame_from_iq, quantize};
use udar::runner::{read_iq_file, write_iq_file};
use udar::waveform::{generate_symbols, read_symbol_file, write_symbol_file, Modulation, OfdmConfig};
use udar::Complex64;

fn main() -> udar::Result<()> {
    let dir = std::env::temp_dir().join("udar-examples");
    std::fs::create_dir_all(&dir)?;
    let ofdm = OfdmConfig::new(16, 16e-9, 10e9, 32, Modulation::Qam(16), 8);
    let d = generate_symbols(&ofdm)?;
    let sym = dir.join("qam16.sym");
    write_symbol_file(&sym, &d)?;
    let back = read_symbol_file(&sym)?;
    // stored as f32 pairs
    let err = back.values().iter().zip(d.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("{}: {}×{} symbols, max round-trip error {err:.1e}", sym.display(), back.n_subcarriers(), back.n_symbols());

    // quantize first and the I/Q round trip is exact
    let mut frame = IqFrame::zeros(&ofdm);
    for (i, v) in frame.values.iter_mut().enumerate() {
        *v = d.values()[i] * Complex64::from_polar(1.0, 0.01 * i as f64);
    }
    quantize(&mut frame);
    let iq = dir.join("frame.iq");
    write_iq_file(&iq, &frame)?;
    let (header, values) = read_iq_file(&iq)?;
    let reread = frame_from_iq(&header, values, &ofdm, 0.0)?;
    let bytes = std::fs::metadata(&iq)?.len();
    println!("{}: {bytes} bytes, header {header:?}, identical = {}", iq.display(), reread.values == frame.values);
    Ok(())
}
