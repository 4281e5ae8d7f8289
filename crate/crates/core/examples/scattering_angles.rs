//! Planar deflection from the closed form and from a far-field integration,
//! plus the 3D angle as the axial velocity grows.

use rho2lab::classical::{
    far_field_state, integrate_orbit, scattering_angle_3d, scattering_angle_planar, scattering_deflection, IncomingRay,
    PotentialSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e_prime = 1.0;
    for (kappa, l) in [(1.0, 1.0), (0.5, 2.0), (-0.45, 1.0)] {
        let spec = PotentialSpec::new(kappa, 1.0)?;
        let closed = scattering_angle_planar(&spec, l)?;
        let start = far_field_state(&spec, e_prime, l, 2e3)?;
        let t_end = 2.0 * start.rho / (2.0 * e_prime).sqrt();
        let traj = integrate_orbit(&spec, &start, t_end, t_end / 4000.0)?;
        println!(
            "kappa {kappa:+.2} L {l:.2}: phi_scat {closed:.6} rad, integrated {:.6}",
            scattering_deflection(&spec, &traj)
        );
    }
    let spec = PotentialSpec::new(1.0, 1.0)?;
    for zdot in [0.0, 1.0, 5.0, 25.0] {
        let ray = IncomingRay::from_impact(&spec, e_prime, zdot, 1.0)?;
        println!("z_dot {zdot:>5}: theta_scat = {:.6}", scattering_angle_3d(&ray, &spec)?);
    }
    Ok(())
}
