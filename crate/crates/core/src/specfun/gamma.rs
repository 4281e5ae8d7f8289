use std::f64::consts::PI;

use num_complex::Complex64;

use super::{finite, SpecfunError, SpecfunResult};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn lanczos_ln_gamma(w: Complex64) -> Complex64 {
    let z = w - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// Principal-branch `ln Γ(z)`.
///
/// The imaginary part is the continuous branch that vanishes on the positive
/// real axis (the same convention as `loggamma` in mpmath): for `Re z < 1/2`
/// the argument is carried up with `ln Γ(z) = ln Γ(z+n) - Σ ln(z+k)`, which
/// never crosses a branch cut for `Im z != 0`. On the negative real axis the
/// imaginary part is taken as the limit from above.
pub fn ln_gamma(z: Complex64) -> SpecfunResult<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecfunError::Domain(format!("ln_gamma of non-finite {z}")));
    }
    if is_pole(z) {
        return Err(SpecfunError::Pole(z.re));
    }
    // +0 imaginary part so that negative reals sit above the cut
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    if z.re >= 0.5 {
        return finite(lanczos_ln_gamma(z), "ln_gamma");
    }
    let n = (0.5 - z.re).ceil() as usize;
    let mut acc = lanczos_ln_gamma(z + n as f64);
    if n <= 64 {
        for k in 0..n {
            acc -= (z + k as f64).ln();
        }
    } else {
        // Long recurrences: real part from the reflection formula instead.
        let mut im = acc.im;
        for k in 0..n {
            im -= (z + k as f64).arg();
        }
        let re = PI.ln() - ln_abs_sin_pi(z) - lanczos_ln_gamma(1.0 - z).re;
        acc = Complex64::new(re, im);
    }
    finite(acc, "ln_gamma")
}

/// `arg Γ(z)` on the continuous branch, i.e. `Im ln Γ(z)`.
pub fn gamma_arg(z: Complex64) -> SpecfunResult<f64> {
    Ok(ln_gamma(z)?.im)
}

/// `1/Γ(z)`, entire; exactly zero at the poles of `Γ`.
pub fn recip_gamma(z: Complex64) -> SpecfunResult<Complex64> {
    if is_pole(z) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((-ln_gamma(z)?).exp())
}

fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    (PI * r).sin()
}

fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    (PI * r).cos()
}

// ln |sin(pi z)| without overflow for large |Im z|.
fn ln_abs_sin_pi(z: Complex64) -> f64 {
    let y = z.im.abs();
    if y < 1.0 {
        let s = sin_pi(z.re);
        let sh = (PI * y).sinh();
        0.5 * (s * s + sh * sh).ln()
    } else {
        let e2 = (-2.0 * PI * y).exp();
        let c = cos_pi(2.0 * z.re);
        PI * y + 0.5 * ((1.0 + e2 * e2) / 2.0 - c * e2).ln() - 0.5 * 2f64.ln()
    }
}
