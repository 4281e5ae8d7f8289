#![allow(clippy::excessive_precision)]

//! Kummer's function, Bessel functions and log-gamma at a few points.

use num_complex::Complex64;
use rho2lab::specfun::{bessel_j, kummer_1f1, ln_gamma, SeriesPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pol = SeriesPolicy::default();
    let c = |re, im| Complex64::new(re, im);

    // Kummer transform: M(a;b;s) = e^s M(b-a;b;-s)
    let (a, b, s) = (c(0.75, -1.5), c(2.0, 0.0), c(0.0, 12.0));
    let lhs = kummer_1f1(a, b, s, &pol)?;
    let rhs = s.exp() * kummer_1f1(b - a, b, -s, &pol)?;
    println!("1F1({a}; {b}; {s}) = {lhs:.15}");
    println!("  via Kummer transform = {rhs:.15}");

    for (nu, x) in [(0.5, 1.0), (2.2360679774997896, 10.0), (50.0, 50.0)] {
        println!("J_{nu}({x}) = {:.16e}", bessel_j(nu, x, &pol)?);
    }
    let z = c(0.5, 3.0);
    println!("ln Gamma({z}) = {:.15}", ln_gamma(z)?);
    Ok(())
}
