//! Capture when 2 kappa M + L^2 < 0: closed-form fall time against RK4.

use rho2lab::classical::{fall_time, integrate_orbit, PlanarState, PotentialSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = PotentialSpec::new(-1.0, 1.0)?;
    for (l, rhodot0) in [(0.5, 0.0), (1.0, -0.3), (0.2, -2.0)] {
        let state = PlanarState::new(1.0, rhodot0, l)?;
        let tf = fall_time(&spec, &state)?;
        let traj = integrate_orbit(&spec, &state, 2.0 * tf, tf / 500.0)?;
        match traj.capture {
            Some(cap) => println!("L {l:.1}  t_f = {tf:.10}  integrated {:.10}  (turns {:.2})", cap.t, traj.last().state.phi / std::f64::consts::TAU),
            None => println!("L {l:.1}  t_f = {tf:.10}  no capture within 2 t_f"),
        }
    }
    Ok(())
}
