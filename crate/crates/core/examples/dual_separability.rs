//! The same Hamiltonian checked on a lattice with a cylindrical mode and a
//! parabolic mode, each at two spacings.

use rho2lab::grid::GridSpec;
use rho2lab::quantum_cyl::{field_grid_cyl, CylMode};
use rho2lab::quantum_par::{field_grid_par, ParMode};
use rho2lab::verify::residual_convergence;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (e, big_k) = (4.0, 1.0);
    let steps = [0.1, 0.05];
    let grid = |h: f64| GridSpec::with_step((0.5, 3.0), (-1.5, 1.5), h, (3.2 / h).round() as usize);
    let cyl = CylMode::new(1, 1.0, e, big_k)?;
    let par = ParMode::new(1, e, big_k, 2.0)?;
    let rc = residual_convergence(|h| Ok(field_grid_cyl(&cyl, &grid(h)?)?), &steps, big_k, e)?;
    let rp = residual_convergence(|h| Ok(field_grid_par(&par, &grid(h)?, 0.0)?), &steps, big_k, e)?;
    for (name, r) in [("cylindrical", &rc), ("parabolic", &rp)] {
        let last = r.reports.last().expect("two spacings");
        println!("{name:<12} order {:.3}  scaled linf at h=0.05 {:.2e}", r.order, last.linf_scaled());
    }
    let wrong = residual_convergence(|h| Ok(field_grid_par(&par, &grid(h)?, 0.0)?), &steps, big_k, 1.1 * e);
    match wrong {
        Ok(r) => println!("wrong energy: order {:.3}", r.order),
        Err(err) => println!("wrong energy: {err}"),
    }
    Ok(())
}
