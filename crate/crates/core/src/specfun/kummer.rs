use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::dd::{CDd, Dd};
use super::gamma::{ln_gamma, recip_gamma};
use super::{finite, SeriesPolicy, SpecfunError, SpecfunResult};

const DD_EPS: f64 = 1.0e-31;
// Slack on the sector edge so that s = ±i·x (arg exactly ±π/2 after rounding) is accepted.
const SECTOR_SLACK: f64 = 1e-12;

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Kummer's function `1F1(a; b; s) = Σ (a)_n / (b)_n · s^n / n!`.
///
/// For `|s|` up to the policy's switch radius the ascending series is summed in
/// double-double arithmetic. Beyond it the full large-`|s|` expansion (both
/// exponential branches, each with its correction series summed to the
/// smallest term) is used, falling back to the series if the expansion cannot
/// meet `rel_tol`. Left-half-plane arguments go through Kummer's transform
/// `1F1(a;b;s) = e^s 1F1(b-a;b;-s)` whenever the direct sum would cancel.
pub fn kummer_1f1(a: Complex64, b: Complex64, s: Complex64, policy: &SeriesPolicy) -> SpecfunResult<Complex64> {
    policy.validate()?;
    for (name, v) in [("a", a), ("b", b), ("s", s)] {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(SpecfunError::Domain(format!("1F1 parameter {name} = {v} is not finite")));
        }
    }
    if is_nonpositive_integer(b) {
        return Err(SpecfunError::ParameterPole(b.re));
    }
    if s == Complex64::new(0.0, 0.0) || a == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let v = if s.norm() <= policy.asymptotic_switch_radius {
        series_or_transform(a, b, s, policy)?
    } else if s.arg().abs() <= FRAC_PI_2 + SECTOR_SLACK {
        match expansion(a, b, s, policy.rel_tol)? {
            Some(v) => v,
            None => series_or_transform(a, b, s, policy)?,
        }
    } else {
        match expansion(b - a, b, -s, policy.rel_tol)? {
            Some(v) => s.exp() * v,
            None => series_or_transform(a, b, s, policy)?,
        }
    };
    finite(v, "kummer_1f1")
}

fn series_or_transform(a: Complex64, b: Complex64, s: Complex64, policy: &SeriesPolicy) -> SpecfunResult<Complex64> {
    match series(a, b, s, policy) {
        Err(SpecfunError::Convergence { .. }) if s.re < 0.0 => {
            Ok(s.exp() * series(b - a, b, -s, policy)?)
        }
        other => other,
    }
}

/// Size of the two large-`|s|` branches added in magnitude. Near a zero of
/// `1F1` the sum itself is tiny, so accuracy is judged against this instead.
fn envelope(a: Complex64, b: Complex64, s: Complex64) -> f64 {
    if s.norm() < 5.0 {
        return 0.0;
    }
    let branch = |num: Complex64, den: Complex64| -> f64 {
        if is_nonpositive_integer(den) {
            return 0.0;
        }
        match (ln_gamma(b), ln_gamma(den)) {
            (Ok(lb), Ok(ld)) => (lb - ld + num).exp().norm(),
            _ => 0.0,
        }
    };
    let lns = s.ln();
    let v = branch(s + (a - b) * lns, a) + branch(-a * lns, b - a);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Ascending series in double-double. Reports a convergence failure both for
/// an exhausted term budget and for cancellation beyond the tolerance.
fn series(a: Complex64, b: Complex64, s: Complex64, policy: &SeriesPolicy) -> SpecfunResult<Complex64> {
    let floor = envelope(a, b, s);
    let sd = CDd::from(s);
    let mut term = CDd::ONE;
    let mut sum = CDd::ONE;
    let mut peak = 1.0f64;
    let mut small = 0;
    for n in 0..policy.max_terms {
        let nf = n as f64;
        let an = CDd::new(Dd::new(a.re).add_f64(nf), Dd::new(a.im));
        let bn = CDd::new(Dd::new(b.re).add_f64(nf), Dd::new(b.im));
        term = term * an * sd / bn.scale(Dd::new(nf + 1.0));
        if term.re.hi == 0.0 && term.im.hi == 0.0 {
            // terminating series (a a nonpositive integer)
            return Ok(sum.to_c64());
        }
        sum = sum + term;
        if !sum.is_finite() {
            return Err(SpecfunError::NonFinite("kummer_1f1 series"));
        }
        let t = term.norm_f64();
        let m = sum.norm_f64().max(floor);
        peak = peak.max(t);
        if t < policy.rel_tol * m {
            small += 1;
            if small >= 3 {
                if peak * DD_EPS > policy.rel_tol * m {
                    return Err(SpecfunError::Convergence { terms: n + 1, last: peak * DD_EPS / m });
                }
                return Ok(sum.to_c64());
            }
        } else {
            small = 0;
        }
    }
    Err(SpecfunError::Convergence {
        terms: policy.max_terms,
        last: term.norm_f64() / sum.norm_f64(),
    })
}

/// Partial sum of `Σ (p)_k (q)_k / k! · w^k` truncated at its smallest term.
/// Returns `(sum, smallest |term|)`.
fn asymptotic_sum(p: Complex64, q: Complex64, w: Complex64, tol: f64) -> (Complex64, f64) {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut smallest = 1.0f64;
    for k in 0..400 {
        let kf = k as f64;
        let next = term * (p + kf) * (q + kf) * w / (kf + 1.0);
        let t = next.norm();
        if t == 0.0 {
            return (sum, 0.0);
        }
        if t > smallest {
            break;
        }
        term = next;
        sum += term;
        smallest = t;
        if t < tol * 1e-3 * sum.norm() {
            break;
        }
    }
    (sum, smallest)
}

/// Phase factor `e^{±iπa}` of the recessive branch: `+` above the real axis,
/// `-` below, `cos(πa)` on it (the mean of the two one-sided limits).
fn recessive_phase(a: Complex64, s: Complex64) -> Complex64 {
    let ipa = Complex64::new(0.0, PI) * a;
    if s.im > 0.0 {
        ipa.exp()
    } else if s.im < 0.0 {
        (-ipa).exp()
    } else {
        (a * PI).cos()
    }
}

/// Full large-`|s|` expansion for `|arg s| <= π/2`. `None` when the divergent
/// correction series cannot reach `tol` relative to the result.
fn expansion(a: Complex64, b: Complex64, s: Complex64, tol: f64) -> SpecfunResult<Option<Complex64>> {
    let lgb = ln_gamma(b)?;
    let lns = s.ln();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    // the branches' own sizes: near a zero of the result they dwarf |total|
    let mut size = 0.0;
    if !is_nonpositive_integer(a) {
        let pref = (lgb - ln_gamma(a)? + s + (a - b) * lns).exp();
        let (sum, small) = asymptotic_sum(1.0 - a, b - a, 1.0 / s, tol);
        total += pref * sum;
        err += pref.norm() * small;
        size += pref.norm();
    }
    if !is_nonpositive_integer(b - a) {
        let pref = (lgb - ln_gamma(b - a)? - a * lns).exp() * recessive_phase(a, s);
        let (sum, small) = asymptotic_sum(a, a - b + 1.0, -1.0 / s, tol);
        total += pref * sum;
        err += pref.norm() * small;
        size += pref.norm();
    }
    if err <= tol * total.norm().max(size) {
        Ok(Some(total))
    } else {
        Ok(None)
    }
}

/// Leading-order large-`|s|` form
/// `Γ(b) [e^s s^{a-b} / Γ(a) + e^{±iπa} s^{-a} / Γ(b-a)]`
/// with principal powers and the recessive phase `e^{+iπa}` for `Im s > 0`,
/// `e^{-iπa}` for `Im s < 0`. Accepted for `|arg s| <= π/2`, which contains
/// the physical ray `s = i·x`.
pub fn kummer_1f1_asymptotic(a: Complex64, b: Complex64, s: Complex64) -> SpecfunResult<Complex64> {
    if is_nonpositive_integer(b) {
        return Err(SpecfunError::ParameterPole(b.re));
    }
    if s.norm() == 0.0 || !s.norm().is_finite() {
        return Err(SpecfunError::Domain(format!("asymptotic 1F1 needs finite nonzero s, got {s}")));
    }
    let arg = s.arg();
    if arg.abs() > FRAC_PI_2 + SECTOR_SLACK {
        return Err(SpecfunError::Sector { arg });
    }
    let gb = ln_gamma(b)?.exp();
    let lns = s.ln();
    let t1 = recip_gamma(a)? * (s + (a - b) * lns).exp();
    let t2 = recip_gamma(b - a)? * recessive_phase(a, s) * (-a * lns).exp();
    finite(gb * (t1 + t2), "kummer_1f1_asymptotic")
}
