//! Single-propeller return models.
//!
//! Each blade is a thin wire of independent point scatterers along
//! `l ∈ [0, L_B]`. A point at `l` on blade `i` has bistatic range
//! `R_O − l ψ_i(t)` with `ψ_i(t) = A_B cos(ω t + φ_B(i))`. Integrating the
//! point return over the part of the blade that falls into one delay bin
//! `[l₁, l₂]` gives
//!
//! ```text
//! e^{j k (−R_O + ΔR⁺)} · (l₂ − l₁)/2 · sinc(k ΔR⁻),   ΔR± = (l₂ ± l₁)/2 · ψ_i
//! ```
//!
//! with `k = ω_n / c`. The `(l₂ − l₁)/2` amplitude corresponds to a line
//! density of one half per meter of blade.
//!
//! Fast-time sample `μ` collects bistatic ranges `((μ−1)Δ, μΔ]`, `Δ = cT/N`.
//! Without a cyclic prefix the fast-time axis is periodic in range with period
//! `N Δ = c T`; ranges outside one period alias back.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{derive_angles, BistaticLink, DerivedAngles, PropellerGeometry};
use crate::waveform::{OfdmConfig, SymbolMatrix};
use crate::{sinc, Error, Result, SPEED_OF_LIGHT};

/// Part of a blade, `[l1, l2] ⊆ [0, L_B]`, that maps into one delay bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeWindow {
    pub l1: f64,
    pub l2: f64,
}

impl BladeWindow {
    pub const EMPTY: BladeWindow = BladeWindow { l1: 0.0, l2: 0.0 };

    pub fn len(&self) -> f64 {
        self.l2 - self.l1
    }

    pub fn is_empty(&self) -> bool {
        self.l2 <= self.l1
    }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Window of a blade whose range is `r_o − ψ l`, for the bin covering
/// bistatic ranges `(r_lo, r_hi]`.
///
/// `ψ = 0` collapses the blade onto `r_o`: the whole blade is in the bin iff
/// `r_o` is.
pub fn blade_window_edges(r_o: f64, psi: f64, r_lo: f64, r_hi: f64, blade_length: f64) -> BladeWindow {
    if psi == 0.0 {
        return if r_o > r_lo && r_o <= r_hi {
            BladeWindow { l1: 0.0, l2: blade_length }
        } else {
            BladeWindow::EMPTY
        };
    }
    let a = (r_o - r_lo) / psi;
    let b = (r_o - r_hi) / psi;
    let l1 = median3(0.0, a, b).clamp(0.0, blade_length);
    let l2 = median3(blade_length, a, b).clamp(0.0, blade_length);
    if l2 <= l1 {
        BladeWindow { l1, l2: l1 }
    } else {
        BladeWindow { l1, l2 }
    }
}

/// Edge `k Δ` of the fast-time bins. Adjacent bins share a bit-identical
/// edge so windows telescope.
#[inline]
pub fn bin_edge(k: i64, delta: f64) -> f64 {
    k as f64 * delta
}

/// Window for fast-time bin `mu`, which covers `((μ−1)Δ, μΔ]`.
pub fn blade_window(r_o: f64, psi: f64, mu: usize, delta: f64, blade_length: f64) -> BladeWindow {
    let mu = mu as i64;
    blade_window_edges(r_o, psi, bin_edge(mu - 1, delta), bin_edge(mu, delta), blade_length)
}

/// Index `k` of the bin `((k−1)Δ, kΔ]` containing `r`, unwrapped.
pub fn range_bin_index(r: f64, delta: f64) -> i64 {
    // fix up rounding of the division against the shared edge expression
    let mut k = (r / delta).ceil() as i64;
    if r <= bin_edge(k - 1, delta) {
        k -= 1;
    } else if r > bin_edge(k, delta) {
        k += 1;
    }
    k
}

/// Fast-time bin that contains bistatic range `r` under the `((μ−1)Δ, μΔ]`
/// convention, or `None` when outside `0..n`.
pub fn range_bin_of(r: f64, delta: f64, n: usize) -> Option<usize> {
    if !(r / delta).is_finite() {
        return None;
    }
    let k = range_bin_index(r, delta);
    (0..n as i64).contains(&k).then_some(k as usize)
}

/// Fast-time sample that receives range `r`. Fast time is cyclic with period
/// `N Δ = c T`, so ranges beyond one symbol alias back into `0..n`.
pub fn wrapped_range_bin(r: f64, delta: f64, n: usize) -> usize {
    range_bin_index(r, delta).rem_euclid(n as i64) as usize
}

/// Fast-time samples receiving any range in `[r_lo, r_hi]`, in order of
/// increasing range; every sample at most once.
pub fn spanned_bins(r_lo: f64, r_hi: f64, delta: f64, n: usize) -> Vec<usize> {
    let (k_lo, k_hi) = (range_bin_index(r_lo, delta), range_bin_index(r_hi, delta));
    let count = (k_hi - k_lo + 1).clamp(0, n as i64);
    (0..count).map(|j| (k_lo + j).rem_euclid(n as i64) as usize).collect()
}

/// Blade pieces landing in fast-time sample `mu` of an `n`-sample symbol,
/// one per alias `μ + q N` of the bin that intersects the blade's support.
pub fn blade_windows_cyclic(
    r_o: f64,
    psi: f64,
    mu: usize,
    delta: f64,
    n: usize,
    blade_length: f64,
) -> impl Iterator<Item = BladeWindow> {
    let reach = psi.abs() * blade_length;
    let k_lo = range_bin_index(r_o - reach, delta);
    let k_hi = range_bin_index(r_o + reach, delta);
    let (mu, n) = (mu as i64, n as i64);
    let q_lo = (k_lo - mu + n - 1).div_euclid(n);
    let q_hi = (k_hi - mu).div_euclid(n);
    (q_lo..=q_hi).filter_map(move |q| {
        let k = mu + q * n;
        let w = blade_window_edges(r_o, psi, bin_edge(k - 1, delta), bin_edge(k, delta), blade_length);
        (!w.is_empty()).then_some(w)
    })
}

/// Blade reflectivity `γ_{ni}`, replicated over blades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reflectivity {
    Constant(Complex64),
    PerSubcarrier(Vec<Complex64>),
}

impl Reflectivity {
    #[inline]
    pub fn at(&self, n: usize) -> Complex64 {
        match self {
            Reflectivity::Constant(g) => *g,
            Reflectivity::PerSubcarrier(v) => v[n],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Reflectivity::Constant(g) => *g == Complex64::new(0.0, 0.0),
            Reflectivity::PerSubcarrier(v) => v.iter().all(|g| *g == Complex64::new(0.0, 0.0)),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            Reflectivity::Constant(g) if g.re.is_finite() && g.im.is_finite() => Ok(()),
            Reflectivity::PerSubcarrier(v) if v.len() != n => Err(Error::DimensionMismatch {
                expected: format!("{n} reflectivities"),
                got: format!("{}", v.len()),
            }),
            Reflectivity::PerSubcarrier(v) if v.iter().all(|g| g.re.is_finite() && g.im.is_finite()) => Ok(()),
            _ => Err(Error::InvalidConfig("reflectivity must be finite".into())),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Reflectivity::Constant(g) => Reflectivity::Constant(g * s),
            Reflectivity::PerSubcarrier(v) => Reflectivity::PerSubcarrier(v.iter().map(|g| g * s).collect()),
        }
    }
}

/// Propeller geometry as seen over the frame: fixed, or one set of angles
/// per symbol for a moving drone.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleTrack {
    Static(DerivedAngles),
    PerSymbol(Vec<DerivedAngles>),
}

impl AngleTrack {
    #[inline]
    pub fn at(&self, m: usize) -> &DerivedAngles {
        match self {
            AngleTrack::Static(a) => a,
            AngleTrack::PerSymbol(v) => &v[m],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropellerReturnParams {
    pub angles: AngleTrack,
    /// Initial physical azimuth of blade 1.
    pub phi0: f64,
    pub n_blades: usize,
    pub blade_length: f64,
    pub reflectivity: Reflectivity,
}

impl PropellerReturnParams {
    pub fn new(angles: DerivedAngles, phi0: f64, n_blades: usize, blade_length: f64, reflectivity: Reflectivity) -> Self {
        Self {
            angles: AngleTrack::Static(angles),
            phi0,
            n_blades,
            blade_length,
            reflectivity,
        }
    }

    pub fn from_geometry(link: &BistaticLink, prop: &PropellerGeometry, reflectivity: Reflectivity) -> Result<Self> {
        prop.validate()?;
        let angles = derive_angles(link, prop)?;
        Ok(Self::new(angles, prop.phi0, prop.n_blades, prop.blade_length, reflectivity))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blades == 0 {
            return Err(Error::InvalidConfig("n_blades must be at least 1".into()));
        }
        if !(self.blade_length > 0.0 && self.blade_length.is_finite()) {
            return Err(Error::InvalidConfig("blade_length must be positive".into()));
        }
        Ok(())
    }

    /// Rotation phase of blade `i` (0-based) at symbol `m`,
    /// `φ_B + φ₀ + 2π i / N_B`.
    #[inline]
    pub fn blade_phase(&self, i: usize, m: usize) -> f64 {
        self.angles.at(m).phi_b + self.phi0 + TAU * i as f64 / self.n_blades as f64
    }

    pub fn phi_b_per_blade(&self, m: usize) -> Vec<f64> {
        (0..self.n_blades).map(|i| self.blade_phase(i, m)).collect()
    }

    /// Single-blade copy that keeps the phase of blade `i`.
    pub fn single_blade(&self, i: usize) -> Self {
        Self {
            phi0: self.phi0 + TAU * i as f64 / self.n_blades as f64,
            n_blades: 1,
            ..self.clone()
        }
    }
}

/// `ψ_i(μ, m) = A_B cos(ω t(μ, m) + φ_B(i))`.
#[inline]
pub fn psi_i(params: &PropellerReturnParams, cfg: &OfdmConfig, i: usize, mu: usize, m: usize) -> f64 {
    let ang = params.angles.at(m);
    ang.a_b * (ang.omega * cfg.sample_time(mu, m) + params.blade_phase(i, m)).cos()
}

/// Complex baseband frame, `values[m * n + μ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame {
    pub n: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
    pub ofdm: OfdmConfig,
    pub noise_variance: f64,
}

impl IqFrame {
    pub fn zeros(cfg: &OfdmConfig) -> Self {
        Self {
            n: cfg.n_subcarriers,
            m: cfg.n_symbols,
            values: vec![Complex64::new(0.0, 0.0); cfg.n_subcarriers * cfg.n_symbols],
            ofdm: cfg.clone(),
            noise_variance: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, mu: usize, m: usize) -> Complex64 {
        self.values[m * self.n + mu]
    }

    pub fn symbol(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.n..(m + 1) * self.n]
    }

    pub fn accumulate(&mut self, other: &IqFrame) -> Result<()> {
        if other.n != self.n || other.m != self.m {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.n, self.m),
                got: format!("{}x{}", other.n, other.m),
            });
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        self.noise_variance += other.noise_variance;
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// `e^{j 2π n μ / N}` for `n·μ mod N`.
pub(crate) fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect()
}

fn check_symbols(d: &SymbolMatrix, cfg: &OfdmConfig) -> Result<()> {
    cfg.validate()?;
    d.check_matches(cfg)
}

/// OFDM returns of one propeller from the per-bin closed form.
pub fn propeller_returns(params: &PropellerReturnParams, d: &SymbolMatrix, cfg: &OfdmConfig) -> Result<IqFrame> {
    check_symbols(d, cfg)?;
    params.validate()?;
    params.reflectivity.check(cfg.n_subcarriers)?;
    if let AngleTrack::PerSymbol(v) = &params.angles {
        if v.len() != cfg.n_symbols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} per-symbol angle sets", cfg.n_symbols),
                got: format!("{}", v.len()),
            });
        }
    }
    let n_sub = cfg.n_subcarriers;
    let delta = cfg.range_bin();
    let tw = twiddles(n_sub);
    let k: Vec<f64> = (0..n_sub)
        .map(|n| TAU * cfg.subcarrier_freq(n) / SPEED_OF_LIGHT)
        .collect();
    let gamma: Vec<Complex64> = (0..n_sub).map(|n| params.reflectivity.at(n)).collect();

    let mut frame = IqFrame::zeros(cfg);
    if params.reflectivity.is_zero() {
        return Ok(frame);
    }
    frame
        .values
        .par_chunks_mut(n_sub)
        .enumerate()
        .for_each(|(m, out)| {
            let ang = params.angles.at(m);
            let col = d.column(m);
            let mut channel = vec![Complex64::new(0.0, 0.0); n_sub];
            for (mu, y) in out.iter_mut().enumerate() {
                let t = cfg.sample_time(mu, m);
                let mut any = false;
                channel.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
                for i in 0..params.n_blades {
                    let psi = ang.a_b * (ang.omega * t + params.blade_phase(i, m)).cos();
                    for w in blade_windows_cyclic(ang.r_o, psi, mu, delta, n_sub, params.blade_length) {
                        any = true;
                        let dr_plus = 0.5 * (w.l2 + w.l1) * psi;
                        let dr_minus = 0.5 * (w.l2 - w.l1) * psi;
                        let amp = 0.5 * w.len();
                        for n in 0..n_sub {
                            let phase = k[n] * (dr_plus - ang.r_o);
                            channel[n] += gamma[n] * Complex64::from_polar(amp * sinc(k[n] * dr_minus), phase);
                        }
                    }
                }
                if !any {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..n_sub {
                    acc += col[n] * tw[(n * mu) % n_sub] * channel[n];
                }
                *y = acc;
            }
        });
    Ok(frame)
}

/// OFDM returns of a single point scatterer with range history
/// `range(μ, m)` in bistatic meters:
///
/// `y(μ, m) = Σ_n γ_n D(n, m) e^{j 2π n μ / N} e^{−j ω_n R / c}` when `R`
/// falls in bin `μ` (modulo the `c T` fast-time period), zero otherwise.
pub fn point_scatterer_returns<F>(gamma: &Reflectivity, range: F, d: &SymbolMatrix, cfg: &OfdmConfig) -> Result<IqFrame>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    check_symbols(d, cfg)?;
    gamma.check(cfg.n_subcarriers)?;
    let n_sub = cfg.n_subcarriers;
    let delta = cfg.range_bin();
    let tw = twiddles(n_sub);
    let mut frame = IqFrame::zeros(cfg);
    frame
        .values
        .par_chunks_mut(n_sub)
        .enumerate()
        .for_each(|(m, out)| {
            let col = d.column(m);
            for (mu, y) in out.iter_mut().enumerate() {
                let r = range(mu, m);
                if !r.is_finite() || wrapped_range_bin(r, delta, n_sub) != mu {
                    continue;
                }
                *y = (0..n_sub)
                    .map(|n| {
                        let k = TAU * cfg.subcarrier_freq(n) / SPEED_OF_LIGHT;
                        gamma.at(n) * col[n] * tw[(n * mu) % n_sub] * Complex64::from_polar(1.0, -k * r)
                    })
                    .sum();
            }
        });
    Ok(frame)
}

/// Continuous-wave sampling of the narrowband model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleToneConfig {
    pub carrier_freq: f64,
    /// Slow-time sample interval, seconds.
    pub sample_interval: f64,
    pub n_samples: usize,
}

impl SingleToneConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|m| m as f64 * self.sample_interval).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NarrowbandForm {
    /// `e^{j k (−R_O + A_B L_B/2 cos)} L_B sinc(k L_B A_B/2 cos)` with the
    /// bistatic `R_O`, `A_B`.
    #[default]
    Bistatic,
    /// Classic monostatic thin-wire form
    /// `e^{j k (−2 R_T + L_B cos ψ cos)} L_B sinc(k L_B cos ψ cos)` with
    /// `cos ψ = sin β_T`. Equal to `Bistatic` when transmitter and receiver
    /// coincide.
    MonostaticPrinted,
}

/// Narrowband (single-bin) slow-time returns of one propeller.
pub fn narrowband_returns(
    params: &PropellerReturnParams,
    tone: &SingleToneConfig,
    form: NarrowbandForm,
) -> Result<Vec<Complex64>> {
    params.validate()?;
    if !(tone.carrier_freq > 0.0) || !(tone.sample_interval > 0.0) {
        return Err(Error::InvalidConfig("tone frequency and interval must be positive".into()));
    }
    let k = TAU * tone.carrier_freq / SPEED_OF_LIGHT;
    let lb = params.blade_length;
    let gamma = params.reflectivity.at(0);
    let out = (0..tone.n_samples)
        .map(|m| {
            let t = m as f64 * tone.sample_interval;
            let ang = params.angles.at(match params.angles {
                AngleTrack::Static(_) => 0,
                AngleTrack::PerSymbol(_) => m,
            });
            let (center, aspect) = match form {
                NarrowbandForm::Bistatic => (ang.r_o, 0.5 * ang.a_b),
                NarrowbandForm::MonostaticPrinted => (2.0 * ang.r_t, ang.beta_t.sin()),
            };
            (0..params.n_blades)
                .map(|i| {
                    let phase = ang.phi_b + params.phi0 + TAU * i as f64 / params.n_blades as f64;
                    let c = (ang.omega * t + phase).cos();
                    let x = lb * aspect * c;
                    gamma * Complex64::from_polar(lb * sinc(k * x), k * (x - center))
                })
                .sum()
        })
        .collect();
    Ok(out)
}

/// Single-tone high range resolution returns, `values[j * t_grid.len() + m]`
/// for delay cell `tau_grid[j]` of width `delta_r / c` and time `t_grid[m]`.
pub fn single_tone_hrr_returns(
    params: &PropellerReturnParams,
    carrier_freq: f64,
    delta_r: f64,
    t_grid: &[f64],
    tau_grid: &[f64],
) -> Result<Vec<Complex64>> {
    params.validate()?;
    if !(delta_r > 0.0) {
        return Err(Error::InvalidConfig("delay cell width must be positive".into()));
    }
    let ang = match &params.angles {
        AngleTrack::Static(a) => *a,
        AngleTrack::PerSymbol(_) => {
            return Err(Error::InvalidConfig("single-tone model needs static geometry".into()))
        }
    };
    let k = TAU * carrier_freq / SPEED_OF_LIGHT;
    let gamma = params.reflectivity.at(0);
    let mut out = Vec::with_capacity(t_grid.len() * tau_grid.len());
    for &tau in tau_grid {
        let r_lo = (tau - 0.5 * delta_r / SPEED_OF_LIGHT) * SPEED_OF_LIGHT;
        let r_hi = (tau + 0.5 * delta_r / SPEED_OF_LIGHT) * SPEED_OF_LIGHT;
        for &t in t_grid {
            let y: Complex64 = (0..params.n_blades)
                .map(|i| {
                    let psi = ang.a_b * (ang.omega * t + params.blade_phase(i, 0)).cos();
                    let w = blade_window_edges(ang.r_o, psi, r_lo, r_hi, params.blade_length);
                    if w.is_empty() {
                        return Complex64::new(0.0, 0.0);
                    }
                    let dr_plus = 0.5 * (w.l2 + w.l1) * psi;
                    let dr_minus = 0.5 * (w.l2 - w.l1) * psi;
                    gamma * Complex64::from_polar(0.5 * w.len() * sinc(k * dr_minus), k * (dr_plus - ang.r_o))
                })
                .sum();
            out.push(y);
        }
    }
    Ok(out)
}

/// `γ₀ sqrt(c σ / (4π³ R⁴ f₀²))`.
pub fn scatterer_amplitude(gamma0: f64, sigma: f64, r: f64, f0: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRange(r));
    }
    Ok(amplitude_from_r4(gamma0, sigma, r.powi(4), f0))
}

/// Bistatic amplitude with `R⁴` replaced by `R_T² R_R²`.
pub fn scatterer_amplitude_bistatic(gamma0: f64, sigma: f64, r_t: f64, r_r: f64, f0: f64) -> Result<f64> {
    for r in [r_t, r_r] {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRange(r));
        }
    }
    Ok(amplitude_from_r4(gamma0, sigma, r_t * r_t * r_r * r_r, f0))
}

fn amplitude_from_r4(gamma0: f64, sigma: f64, r4: f64, f0: f64) -> f64 {
    let pi3 = std::f64::consts::PI.powi(3);
    gamma0 * (SPEED_OF_LIGHT * sigma / (4.0 * pi3 * r4 * f0 * f0)).sqrt()
}
