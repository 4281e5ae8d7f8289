//! Classify planar orbits and compare the closed-form curve with RK4.

use rho2lab::classical::{classify_orbit, integrate_orbit, orbit_rho, PlanarState, PotentialSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("repulsive", 1.0, 1.0, 1.0, -0.5),
        ("bound sech", -1.0, 0.5, 1.0, 0.3),
        ("csch", -1.0, 0.5, 1.0, -2.0),
        ("circle", -1.0, 2f64.sqrt(), 1.0, 0.0),
    ];
    for (name, kappa, l, rho0, rhodot0) in cases {
        let spec = PotentialSpec::new(kappa, 1.0)?;
        let state = PlanarState::new(rho0, rhodot0, l)?;
        let orbit = classify_orbit(&spec, &state)?;
        let traj = integrate_orbit(&spec, &state, 2.0, 1e-3)?;
        let mut worst = 0.0f64;
        for s in traj.samples.iter().filter(|s| s.state.rho > 1e-3) {
            if let Ok(r) = orbit_rho(&orbit, s.state.phi) {
                worst = worst.max((r - s.state.rho).abs() / s.state.rho);
            }
        }
        println!(
            "{name:<11} kind {:?}  g = {:+.4}  E' = {:+.4}  max rel dev vs RK4 = {worst:.2e}",
            orbit.kind,
            orbit.g,
            state.e_prime(&spec)
        );
    }
    Ok(())
}
