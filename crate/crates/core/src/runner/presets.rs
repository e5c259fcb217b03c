//! Airframe presets.
//!
//! Lift rotors sit on a circle of radius `arm_length_m` in the drone's
//! horizontal plane and alternate their spin direction. `vtol7` adds a pusher
//! behind the lift ring whose axis is horizontal, orthogonal to the six lift
//! axes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scenario::{default_blades, Phi0, PropellerSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Quadcopter,
    Hexacopter,
    Vtol7,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSection {
    pub name: Preset,
    #[serde(default = "default_arm")]
    pub arm_length_m: f64,
    #[serde(default = "default_rpm")]
    pub rpm: f64,
    /// Pusher speed for `vtol7`; defaults to `rpm`.
    pub pusher_rpm: Option<f64>,
    #[serde(default = "default_blades")]
    pub n_blades: usize,
    #[serde(default = "default_blade_length")]
    pub blade_length_m: f64,
    #[serde(default)]
    pub phi0_deg: Phi0,
}

fn default_arm() -> f64 {
    0.25
}

fn default_rpm() -> f64 {
    5000.0
}

fn default_blade_length() -> f64 {
    0.12
}

impl PresetSection {
    pub fn new(name: Preset) -> Self {
        Self {
            name,
            arm_length_m: default_arm(),
            rpm: default_rpm(),
            pusher_rpm: None,
            n_blades: default_blades(),
            blade_length_m: default_blade_length(),
            phi0_deg: Phi0::default(),
        }
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if !(self.arm_length_m > 0.0) {
            return Err("arm_length_m must be positive".into());
        }
        if !(self.rpm > 0.0) || self.pusher_rpm.is_some_and(|r| !(r > 0.0)) {
            return Err("rpm must be positive".into());
        }
        if self.n_blades == 0 || !(self.blade_length_m > 0.0) {
            return Err("n_blades and blade_length_m must be positive".into());
        }
        if self.blade_length_m * 2.0 > self.arm_length_m * 2.0 * (PI / self.ring_size() as f64).sin() {
            return Err("neighbouring rotor disks overlap; lengthen the arms".into());
        }
        Ok(())
    }

    fn ring_size(&self) -> usize {
        match self.name {
            Preset::Quadcopter => 4,
            Preset::Hexacopter | Preset::Vtol7 => 6,
        }
    }

    pub fn propellers(&self) -> Vec<PropellerSection> {
        let n = self.ring_size();
        // quadcopters fly "X": rotors between the body axes
        let offset = match self.name {
            Preset::Quadcopter => PI / 4.0,
            _ => 0.0,
        };
        let prop = |position_m, axis, rpm| PropellerSection {
            position_m,
            axis,
            rpm,
            n_blades: self.n_blades,
            blade_length_m: self.blade_length_m,
            phi0_deg: self.phi0_deg,
            reflectivity: [1.0, 0.0],
            rcs_m2: None,
        };
        let mut out: Vec<PropellerSection> = (0..n)
            .map(|k| {
                let a = offset + 2.0 * PI * k as f64 / n as f64;
                let spin = if k % 2 == 0 { 1.0 } else { -1.0 };
                let pos = [self.arm_length_m * a.cos(), self.arm_length_m * a.sin(), 0.0];
                prop(pos, [0.0, 0.0, spin], self.rpm)
            })
            .collect();
        if self.name == Preset::Vtol7 {
            let r = self.pusher_rpm.unwrap_or(self.rpm);
            out.push(prop([-1.6 * self.arm_length_m, 0.0, 0.0], [1.0, 0.0, 0.0], r));
        }
        out
    }
}
