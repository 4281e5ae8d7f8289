//! Energy-independent phase shifts, recovered from sampled radial functions.

use rho2lab::quantum_cyl::phase_shift;
use rho2lab::verify::{angle_distance, phase_shift_extract, radial_samples};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for big_k in [0.0, 1.0, 5.0] {
        for m in [0, 1, 3] {
            let exact = phase_shift(m, big_k);
            let fit = |q: f64| -> Result<f64, Box<dyn std::error::Error>> {
                Ok(phase_shift_extract(m, q, &radial_samples(big_k, m, q, 256)?)?)
            };
            let (d1, d2) = (fit(1.0)?, fit(2.0)?);
            println!(
                "K {big_k} m {m}: delta {exact:+.6}  fit(q=1) err {:.1e}  q vs 2q {:.1e}",
                angle_distance(d1, exact),
                angle_distance(d1, d2)
            );
        }
    }
    Ok(())
}
