//! Separated parabolic solutions: ODE residuals, the sign flip of C between
//! the two factors, and the large-argument form.

use rho2lab::quantum_par::{
    coulomb_residual, h_plus, h_plus_asymptotic, ode_residual_h, ode_residual_xi, separation_bracket_eta,
    separation_bracket_xi, ParMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mode = ParMode::new(1, 4.0, 1.0, 2.0)?;
    for eta in [0.5, 2.0, 8.0] {
        let r = ode_residual_h(&mode, eta, 1e-3)?;
        let x = ode_residual_xi(&mode, eta, 1e-3)?;
        println!(
            "eta {eta}: H = {:+.6e}  residuals {:.1e} / {:.1e}  brackets {:+.6} {:+.6}",
            h_plus(&mode, eta)?.re,
            r.scaled(),
            x.scaled(),
            separation_bracket_eta(&mode, eta, 1e-3)?,
            separation_bracket_xi(&mode, eta, 1e-3)?
        );
    }
    let u = coulomb_residual(&mode, mode.c, 3.0, 1e-3)?;
    let swapped = coulomb_residual(&mode.flipped(), -mode.c, 3.0, 1e-3)?;
    println!("Coulomb form residual {:.1e}, with C -> -C {:.1e}", u.scaled(), swapped.scaled());
    for x in [50.0, 100.0, 200.0] {
        let eta = x * x / mode.e;
        let (exact, asym) = (h_plus(&mode, eta)?, h_plus_asymptotic(&mode, eta)?);
        println!("sqrt(E) eta = {x}: exact {:+.6e}  asymptotic {:+.6e}", exact.re, asym.re);
    }
    Ok(())
}
