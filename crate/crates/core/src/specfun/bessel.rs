use std::f64::consts::PI;

use num_complex::Complex64;

use super::dd::Dd;
use super::gamma::ln_gamma;
use super::{SeriesPolicy, SpecfunError, SpecfunResult};

const INTEGER_TIE: f64 = 1e-9;
// Relative rounding floor of a double-double sum.
const DD_EPS: f64 = 1.0e-31;

/// Bessel function of the first kind `J_ν(s)` for real `ν >= 0`, `s >= 0`.
///
/// Ascending series (double-double) up to the switch radius, Hankel's
/// large-argument expansion with its `P`/`Q` correction sums beyond it. When
/// the Hankel sums cannot reach `rel_tol` (order comparable to `s`) Miller's
/// backward recurrence takes over.
pub fn bessel_j(nu: f64, s: f64, policy: &SeriesPolicy) -> SpecfunResult<f64> {
    policy.validate()?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(SpecfunError::Domain(format!("bessel_j order {nu} must be finite and >= 0")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(SpecfunError::Domain(format!("bessel_j argument {s} must be finite and >= 0")));
    }
    if s == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if s <= policy.asymptotic_switch_radius {
        return series(nu, s, policy);
    }
    match hankel(nu, s, policy) {
        Some(v) => Ok(v),
        None => miller(nu, s),
    }
}

/// Backward recurrence `J_{λ-1} = (2λ/s) J_λ - J_{λ+1}` from far above both
/// `ν` and `s`, normalized with `(s/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! J_{μ+2k}(s)`,
/// `μ = ν - ⌊ν⌋`.
fn miller(nu: f64, s: f64) -> SpecfunResult<f64> {
    let n0 = nu.floor();
    let mu = nu - n0;
    let n0 = n0 as usize;
    let mut top = (nu.max(s) + 40.0 + 2.0 * s.sqrt()).ceil() as usize;
    if top % 2 == 1 {
        top += 1;
    }
    let (mut hi, mut cur) = (0.0f64, 1e-300f64);
    let mut target = 0.0;
    // weights c_k for even offsets n = 2k
    let c0 = ln_gamma(Complex64::new(mu + 1.0, 0.0))?.re.exp();
    let weight = |n: usize| -> f64 {
        if n == 0 {
            return c0;
        }
        let k = n / 2;
        // Γ(μ+k)/k! by a short product, starting from Γ(μ+1)/1!
        let mut g = c0;
        for j in 1..k {
            g *= (mu + j as f64) / (j as f64 + 1.0);
        }
        (mu + 2.0 * k as f64) * g
    };
    let mut norm = 0.0;
    for n in (0..=top).rev() {
        // cur holds J_{μ+n}, hi holds J_{μ+n+1}
        if n == n0 {
            target = cur;
        }
        if n % 2 == 0 {
            norm += weight(n) * cur;
        }
        if n == 0 {
            break;
        }
        let lam = mu + n as f64;
        let next = 2.0 * lam / s * cur - hi;
        hi = cur;
        cur = next;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            hi *= 1e-250;
            target *= 1e-250;
            norm *= 1e-250;
        }
    }
    let scale = (0.5 * s).powf(mu) / norm;
    let v = target * scale;
    if !v.is_finite() {
        return Err(SpecfunError::NonFinite("bessel_j backward recurrence"));
    }
    Ok(v)
}

fn prefactor(nu: f64, s: f64) -> SpecfunResult<f64> {
    let n = nu.round();
    if (nu - n).abs() < INTEGER_TIE && n <= 170.0 {
        let mut fact = 1.0;
        for k in 2..=(n as u32) {
            fact *= k as f64;
        }
        let p = (0.5 * s).powi(n as i32) / fact;
        if p.is_finite() && p > 0.0 {
            return Ok(p);
        }
    }
    let lg = ln_gamma(Complex64::new(nu + 1.0, 0.0))?.re;
    Ok((nu * (0.5 * s).ln() - lg).exp())
}

fn series(nu: f64, s: f64, policy: &SeriesPolicy) -> SpecfunResult<f64> {
    let pre = prefactor(nu, s)?;
    let n = nu.round();
    let nu = if (nu - n).abs() < INTEGER_TIE { n } else { nu };
    // ratio of consecutive terms: -(s/2)^2 / ((k+1)(nu+k+1))
    let x = -Dd::from_prod(0.5 * s, 0.5 * s);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut peak = 1.0f64;
    let mut small = 0;
    // Beyond the turning point J oscillates under the envelope sqrt(2/πs);
    // accuracy is judged against that envelope so zeros do not stall the sum.
    let floor = if s > nu { (2.0 / (PI * s)).sqrt() / pre } else { 0.0 };
    for k in 0..policy.max_terms {
        let kf = k as f64;
        // nu + k + 1 must be formed exactly, a rounded double here costs digits
        let den = Dd::new(nu).add_f64(kf + 1.0).mul_f64(kf + 1.0);
        term = term * x / den;
        sum = sum + term;
        let t = term.hi.abs();
        peak = peak.max(t);
        let scale = sum.hi.abs().max(floor);
        if t < policy.rel_tol * scale {
            small += 1;
            if small >= 3 {
                if peak * DD_EPS > policy.rel_tol * scale {
                    return Err(SpecfunError::Convergence { terms: k + 1, last: peak * DD_EPS / scale });
                }
                return Ok(pre * sum.to_f64());
            }
        } else {
            small = 0;
        }
    }
    Err(SpecfunError::Convergence { terms: policy.max_terms, last: term.hi.abs() / sum.hi.abs() })
}

/// Hankel expansion. `None` when the asymptotic sums cannot meet the tolerance.
fn hankel(nu: f64, s: f64, policy: &SeriesPolicy) -> Option<f64> {
    let (p, q) = hankel_pq(nu, s, policy.rel_tol)?;
    let chi = s - (0.5 * nu + 0.25) * PI;
    let amp = (2.0 / (PI * s)).sqrt();
    Some(amp * (p * chi.cos() - q * chi.sin()))
}

/// Hankel's `P(ν, s)` and `Q(ν, s)` correction sums; `None` if the divergent
/// tail is reached before `tol` or the partial terms grow so large that
/// double-precision cancellation would exceed `tol`.
pub(crate) fn hankel_pq(nu: f64, s: f64, tol: f64) -> Option<(f64, f64)> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k(nu) / s^k
    let mut prev = f64::INFINITY;
    let mut peak = 1.0f64;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * s);
        let t = a.abs();
        if t == 0.0 {
            return Some((p, q));
        }
        if t > prev && t > tol {
            return None;
        }
        peak = peak.max(t);
        if peak * f64::EPSILON > tol {
            return None;
        }
        // signs: P = Σ (-1)^j a_{2j}, Q = Σ (-1)^j a_{2j+1}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if t < tol * 1e-2 {
            return Some((p, q));
        }
        prev = t;
    }
    None
}
