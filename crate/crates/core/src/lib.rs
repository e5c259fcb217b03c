//! Bistatic OFDM micro-Doppler simulation of multi-propeller drones.
//!
//! The crate generates complex baseband returns of rotating blades, drone
//! bodies and vibration as seen by a separated transmitter/receiver pair that
//! uses an OFDM sensing waveform, and turns those returns into range-Doppler
//! maps and Doppler spectra.
//!
//! Layout:
//!
//! - [`geometry`]: bistatic angles and the bistatic range of a rotating point.
//! - [`waveform`]: OFDM subcarriers, modulation symbols and symbol files.
//! - [`propeller`]: single-propeller return models (wideband OFDM closed form,
//!   single-tone high range resolution, narrowband thin wire, point scatterer).
//! - [`drone`]: propeller composition, body models, vibration and noise.
//! - [`processing`]: channel estimation, range-Doppler maps, Doppler metrics.
//! - [`runner`]: scenario files, presets, batch generation and file formats.
//!
//! All signals are complex baseband. The blade line integral uses the
//! unnormalized `sinc(x) = sin(x)/x`.

// `!(x > 0.0)` rejects NaN along with non-positive values; keep it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drone;
pub mod error;
pub mod geometry;
pub mod processing;
pub mod propeller;
pub mod rng;
pub mod runner;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // Taylor to x^4 keeps full precision below the cutoff.
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_unnormalized() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
        assert!((sinc(1.0) - 1.0f64.sin()).abs() < 1e-16);
        let x = 1.5e-8;
        assert!((sinc(x) - x.sin() / x).abs() < 1e-15);
    }
}
