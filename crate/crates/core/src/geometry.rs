//! Bistatic geometry of a rotating point scatterer.
//!
//! For a propeller with rotation center `O`, angular velocity `ω⃗` and a blade
//! point at distance `l` from the center, the bistatic range to first order in
//! `l` is
//!
//! ```text
//! R(t) ≈ R_O − A_B · l · cos(ω t + φ_B)
//! A_B  = sqrt(4 cos²(β/2) − (cos β_T + cos β_R)²)
//! φ_B  = φ_T − atan2(sin β_R sin(φ_T − φ_R), sin β_T + sin β_R cos(φ_T − φ_R))
//! ```
//!
//! Conventions used throughout the crate:
//!
//! * `β_T` / `β_R` are the angles between `ω⃗` and `O − T` / `O − R`.
//! * The in-plane reference `e₁` is the projection of the direction from `O`
//!   toward the transmitter onto the rotation plane, so `φ_T = 0`. If the
//!   transmitter lies on the axis the receiver direction is used, then a fixed
//!   perpendicular.
//! * `φ_T`, `φ_R` are measured from `e₁` about `−ω̂`, i.e. against the sense
//!   of rotation. With this gauge a blade whose physical azimuth (measured
//!   about `+ω̂` from `e₁`) is `ω t + φ₀` has bistatic range
//!   `R_O − A_B l cos(ω t + φ₀ + φ_B)`.
//! * The elevation of the stations over the rotation plane used by the classic
//!   monostatic thin-wire formula is taken as `ψ = π/2 − β_T`, so
//!   `cos ψ = sin β_T`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

const EPS_LEN: f64 = 1e-12;

/// Transmitter, receiver and drone center positions in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistaticLink {
    pub tx_pos: Vec3,
    pub rx_pos: Vec3,
    pub drone_center: Vec3,
}

impl BistaticLink {
    pub fn new(tx_pos: Vec3, rx_pos: Vec3, drone_center: Vec3) -> Result<Self> {
        let link = Self {
            tx_pos,
            rx_pos,
            drone_center,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn monostatic(station: Vec3, drone_center: Vec3) -> Result<Self> {
        Self::new(station, station, drone_center)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if !(finite(&self.tx_pos) && finite(&self.rx_pos) && finite(&self.drone_center)) {
            return Err(Error::InvalidConfig("link coordinates must be finite".into()));
        }
        Ok(())
    }

    pub fn baseline(&self) -> f64 {
        (self.rx_pos - self.tx_pos).norm()
    }

    /// Bistatic angle ∠(T, p, R) at an arbitrary point.
    pub fn bistatic_angle_at(&self, p: &Vec3) -> Result<f64> {
        let to_t = self.tx_pos - p;
        let to_r = self.rx_pos - p;
        if to_t.norm() < EPS_LEN {
            return Err(Error::CollocatedStation("transmitter"));
        }
        if to_r.norm() < EPS_LEN {
            return Err(Error::CollocatedStation("receiver"));
        }
        Ok(angle_between(&to_t, &to_r))
    }

    /// Bistatic range `‖T − p‖ + ‖R − p‖`.
    pub fn bistatic_range_at(&self, p: &Vec3) -> f64 {
        (self.tx_pos - p).norm() + (self.rx_pos - p).norm()
    }

    /// The same link with the drone displaced by `d`.
    pub fn with_drone_offset(&self, d: &Vec3) -> Self {
        Self {
            drone_center: self.drone_center + d,
            ..*self
        }
    }
}

/// One propeller: rotation center, angular velocity vector, initial azimuth,
/// blade count and blade length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropellerGeometry {
    pub rotation_center: Vec3,
    pub omega_vec: Vec3,
    pub phi0: f64,
    pub n_blades: usize,
    pub blade_length: f64,
}

impl PropellerGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_blades == 0 {
            return Err(Error::InvalidConfig("n_blades must be at least 1".into()));
        }
        if !(self.blade_length > 0.0 && self.blade_length.is_finite()) {
            return Err(Error::InvalidConfig("blade_length must be positive".into()));
        }
        if !(0.0..TAU).contains(&self.phi0) {
            return Err(Error::InvalidConfig("phi0 must lie in [0, 2π)".into()));
        }
        if !self.omega_vec.iter().all(|c| c.is_finite())
            || !self.rotation_center.iter().all(|c| c.is_finite())
        {
            return Err(Error::InvalidConfig("propeller vectors must be finite".into()));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.omega_vec.norm()
    }

    pub fn translated(&self, d: &Vec3) -> Self {
        Self {
            rotation_center: self.rotation_center + d,
            ..*self
        }
    }
}

/// Scalar geometry of one propeller as seen by one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedAngles {
    /// Rotation rate ‖ω⃗‖, rad/s.
    pub omega: f64,
    /// Bistatic range of the rotation center, `R_T + R_R`.
    pub r_o: f64,
    pub r_t: f64,
    pub r_r: f64,
    /// Bistatic angle at the rotation center.
    pub beta: f64,
    pub beta_t: f64,
    pub beta_r: f64,
    pub phi_t: f64,
    pub phi_r: f64,
    pub phi_b: f64,
    pub a_b: f64,
}

impl DerivedAngles {
    /// `ψ = π/2 − β_T`, the transmitter elevation over the rotation plane.
    pub fn elevation(&self) -> f64 {
        PI / 2.0 - self.beta_t
    }

    /// Sine of the angle between the rotation axis and the bistatic bisector,
    /// `A_B / (2 cos(β/2))`. This is the aspect factor of the Doppler spread
    /// `B_D = 4 ω L_B cos(β/2) sin ψ / λ₀`. Returns 0 in forward scatter.
    pub fn bisector_aspect_sin(&self) -> f64 {
        let c = (self.beta / 2.0).cos();
        if c < 1e-12 {
            0.0
        } else {
            (self.a_b / (2.0 * c)).min(1.0)
        }
    }

    /// Closed-form Doppler spread `4 ω L_B cos(β/2) sin ψ / λ₀` in Hz.
    pub fn doppler_spread(&self, blade_length: f64, wavelength: f64) -> f64 {
        4.0 * self.omega * blade_length * (self.beta / 2.0).cos() * self.bisector_aspect_sin()
            / wavelength
    }
}

/// Orthonormal rotation-plane frame `(e₁, e₂)` with `e₂ = ω̂ × e₁`.
///
/// A blade at physical azimuth `α` points along `cos α e₁ + sin α e₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFrame {
    pub axis: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl RotationFrame {
    pub fn new(link: &BistaticLink, prop: &PropellerGeometry) -> Result<Self> {
        let omega = prop.omega_vec.norm();
        if omega < EPS_LEN {
            return Err(Error::DegenerateAxis);
        }
        let axis = prop.omega_vec / omega;
        let project = |v: Vec3| v - axis * axis.dot(&v);
        let to_t = project(link.tx_pos - prop.rotation_center);
        let to_r = project(link.rx_pos - prop.rotation_center);
        let e1 = if to_t.norm() > EPS_LEN {
            to_t.normalize()
        } else if to_r.norm() > EPS_LEN {
            to_r.normalize()
        } else {
            any_perpendicular(&axis)
        };
        let e2 = axis.cross(&e1);
        Ok(Self { axis, e1, e2 })
    }

    pub fn blade_direction(&self, azimuth: f64) -> Vec3 {
        self.e1 * azimuth.cos() + self.e2 * azimuth.sin()
    }
}

fn any_perpendicular(axis: &Vec3) -> Vec3 {
    let trial = if axis.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    (trial - axis * axis.dot(&trial)).normalize()
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

fn wrap_tau(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Computes all bistatic quantities of one propeller.
pub fn derive_angles(link: &BistaticLink, prop: &PropellerGeometry) -> Result<DerivedAngles> {
    link.validate()?;
    let o = prop.rotation_center;
    let ot = o - link.tx_pos;
    let or = o - link.rx_pos;
    let r_t = ot.norm();
    let r_r = or.norm();
    if r_t < EPS_LEN {
        return Err(Error::CollocatedStation("transmitter"));
    }
    if r_r < EPS_LEN {
        return Err(Error::CollocatedStation("receiver"));
    }
    let frame = RotationFrame::new(link, prop)?;
    let omega = prop.omega_vec.norm();

    let beta_t = angle_between(&prop.omega_vec, &ot);
    let beta_r = angle_between(&prop.omega_vec, &or);
    let beta = angle_between(&ot, &or);

    // Station-facing directions, azimuth measured about -ω̂.
    let azimuth = |v: Vec3| -> f64 {
        let inplane = v - frame.axis * frame.axis.dot(&v);
        if inplane.norm() < EPS_LEN {
            0.0
        } else {
            wrap_tau((-inplane.dot(&frame.e2)).atan2(inplane.dot(&frame.e1)))
        }
    };
    let phi_t = azimuth(-ot);
    let phi_r = azimuth(-or);

    let half = (beta / 2.0).cos();
    let axial = beta_t.cos() + beta_r.cos();
    let a_b = (4.0 * half * half - axial * axial).max(0.0).sqrt();

    let phi_b = match compute_phi_b(phi_t, phi_r, beta_t, beta_r) {
        Ok(p) => p,
        // Both stations on the axis: A_B = 0 and the phase is immaterial.
        Err(Error::UndefinedRotationPhase) => phi_t,
        Err(e) => return Err(e),
    };

    Ok(DerivedAngles {
        omega,
        r_o: r_t + r_r,
        r_t,
        r_r,
        beta,
        beta_t,
        beta_r,
        phi_t,
        phi_r,
        phi_b,
        a_b,
    })
}

/// Rotation phase of the bistatic range term, wrapped to `[0, 2π)`.
pub fn compute_phi_b(phi_t: f64, phi_r: f64, beta_t: f64, beta_r: f64) -> Result<f64> {
    let (st, sr) = (beta_t.sin(), beta_r.sin());
    if st.abs() < EPS_LEN && sr.abs() < EPS_LEN {
        return Err(Error::UndefinedRotationPhase);
    }
    let d = phi_t - phi_r;
    Ok(wrap_tau(phi_t - (sr * d.sin()).atan2(st + sr * d.cos())))
}

/// `R_O − A_B l cos(ω t + φ_B)`.
pub fn bistatic_range_rotating_point(ang: &DerivedAngles, l: f64, t: f64) -> f64 {
    ang.r_o - ang.a_b * l * (ang.omega * t + ang.phi_b).cos()
}

/// One-way monostatic range of a rotating point, `R_T − l cos ψ cos(ω t + φ)`.
pub fn monostatic_range(r_t: f64, cos_psi: f64, l: f64, omega: f64, t: f64, phi: f64) -> f64 {
    r_t - l * cos_psi * (omega * t + phi).cos()
}
