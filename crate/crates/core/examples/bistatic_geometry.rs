//! Angles of one rotor for a separated transmitter/receiver pair, and how
//! well the first-order rotating-point range tracks the exact path length.

use udar::geometry::{bistatic_range_rotating_point, derive_angles, BistaticLink, PropellerGeometry, RotationFrame, Vec3};

fn main() -> udar::Result<()> {
    let link = BistaticLink::new(Vec3::new(-40.0, -30.0, 0.0), Vec3::new(35.0, -45.0, 5.0), Vec3::new(0.0, 0.0, 20.0))?;
    let prop = PropellerGeometry {
        rotation_center: link.drone_center + Vec3::new(0.2, 0.0, 0.0),
        omega_vec: Vec3::new(0.0, 0.1, 1.0).normalize() * udar::drone::rpm_to_rad_s(3000.0),
        phi0: 0.0,
        n_blades: 2,
        blade_length: 0.12,
    };
    let ang = derive_angles(&link, &prop)?;
    println!("bistatic angle   β   = {:7.3}°", ang.beta.to_degrees());
    println!("aspect angles  β_T/β_R = {:7.3}° / {:7.3}°", ang.beta_t.to_degrees(), ang.beta_r.to_degrees());
    println!("phase          φ_B = {:7.3}°", ang.phi_b.to_degrees());
    println!("amplitude      A_B = {:7.4} (monostatic limit 2)", ang.a_b);
    println!("center range   R_O = {:7.3} m", ang.r_o);
    let lambda = udar::SPEED_OF_LIGHT / 10e9;
    println!("Doppler spread B_D = {:7.1} Hz at 10 GHz", ang.doppler_spread(prop.blade_length, lambda));

    // exact two-norm path of the blade tip against the closed form
    let frame = RotationFrame::new(&link, &prop)?;
    let mut worst: f64 = 0.0;
    for k in 0..360 {
        let t = k as f64 / 360.0 * std::f64::consts::TAU / ang.omega;
        let tip = prop.rotation_center + frame.blade_direction(ang.omega * t + prop.phi0) * prop.blade_length;
        let exact = link.bistatic_range_at(&tip);
        worst = worst.max((exact - bistatic_range_rotating_point(&ang, prop.blade_length, t)).abs());
    }
    println!("first-order range error over one turn: {:.2e} m", worst);
    Ok(())
}
