//! Classical motion in parabolic coordinates `η = r + z`, `ξ = r - z`.
//!
//! The implicit clocks `t(η)` and `t(ξ)` below are the Kepler-like closed
//! forms. Each one integrates `dt = sqrt(2M) η dη / sqrt(ℰη² - 𝒞η - Λ')`
//! (with `Λ' = L²/2M + κ`), which is the separated η equation written in its
//! own time variable. Physical time runs as `dt_phys = (r/2η) dt`, so the two
//! clocks do not coincide with each other or with the lab clock.
//! [`ParabolicFlow`] solves the same problem exactly in the regularized time
//! `dτ = dt_phys/(η + ξ)`, where both coordinates are hyperbolic cosines.

use serde::{Deserialize, Serialize};

use super::{CartesianState, ClassicalError, ClassicalResult, PotentialSpec};

/// Energy and separation constant of a classical state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicInvariants {
    pub energy: f64,
    /// `𝒞 = ℰη - (M/2) r² η̇²/η - Λ'/η`; the same value from the ξ side
    /// with the sign flipped.
    pub c_sep: f64,
    pub eta: f64,
    pub xi: f64,
    pub eta_dot: f64,
    pub xi_dot: f64,
}

/// Invariants of the state `(ρ, z, ρ̇, ż)` with angular momentum `L`.
pub fn parabolic_invariants(
    spec: &PotentialSpec,
    rho: f64,
    z: f64,
    rho_dot: f64,
    z_dot: f64,
    l: f64,
) -> ClassicalResult<ParabolicInvariants> {
    if !(rho > 0.0) || ![z, rho_dot, z_dot, l].iter().all(|v| v.is_finite()) {
        return Err(ClassicalError::InvalidParameter("state must be finite with rho > 0".into()));
    }
    let m = spec.mass;
    let r = rho.hypot(z);
    let r_dot = (rho * rho_dot + z * z_dot) / r;
    let (eta, xi) = (r + z, r - z);
    let (eta_dot, xi_dot) = (r_dot + z_dot, r_dot - z_dot);
    let lp = spec.effective_strength(l);
    let energy = 0.5 * m * (rho_dot * rho_dot + z_dot * z_dot) + lp / (rho * rho);
    let c_sep = energy * eta - 0.5 * m * r * r * eta_dot * eta_dot / eta - lp / eta;
    Ok(ParabolicInvariants { energy, c_sep, eta, xi, eta_dot, xi_dot })
}

fn discriminant(spec: &PotentialSpec, e: f64, l: f64, c: f64) -> ClassicalResult<(f64, f64)> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(ClassicalError::Regime(format!("energy {e} must be positive")));
    }
    if !c.is_finite() || !l.is_finite() {
        return Err(ClassicalError::InvalidParameter("c_sep and L must be finite".into()));
    }
    let lp = spec.effective_strength(l);
    let d = c * c + 4.0 * e * lp;
    if !(d > 0.0) {
        return Err(ClassicalError::Regime(format!("C^2 + 4E(L^2/2M + kappa) = {d} is not positive")));
    }
    Ok((d, lp))
}

/// Turning point of `η`, `[𝒞 + sqrt(𝒞² + 4ℰΛ')]/(2ℰ)`.
pub fn eta_min(spec: &PotentialSpec, e_total: f64, l: f64, c_sep: f64) -> ClassicalResult<f64> {
    let (d, lp) = discriminant(spec, e_total, l, c_sep)?;
    let sd = d.sqrt();
    // avoid cancellation when 𝒞 < 0
    let v = if c_sep >= 0.0 { (c_sep + sd) / (2.0 * e_total) } else { 2.0 * lp / (sd - c_sep) };
    if !(v > 0.0) {
        return Err(ClassicalError::Regime(format!("eta turning point {v} is not positive")));
    }
    Ok(v)
}

/// Turning point of `ξ`, `[-𝒞 + sqrt(𝒞² + 4ℰΛ')]/(2ℰ)`.
pub fn xi_min(spec: &PotentialSpec, e_total: f64, l: f64, c_sep: f64) -> ClassicalResult<f64> {
    eta_min(spec, e_total, l, -c_sep)
}

/// `Q(η) = ℰη² - 𝒞η - Λ' = (η - η_min)(ℰη + Λ'/η_min)`, factored so it
/// vanishes exactly at the turning point.
fn radicand(e: f64, lp: f64, x: f64, x_min: f64) -> ClassicalResult<f64> {
    if x >= x_min {
        return Ok(((x - x_min) * (e * x + lp / x_min)).max(0.0));
    }
    if x >= x_min * (1.0 - 8.0 * f64::EPSILON) {
        return Ok(0.0);
    }
    Err(ClassicalError::Domain(format!("{x} is below the turning point {x_min}")))
}

/// `ln(arg/√D)` where `arg = 2 sqrt(ℰQ) + 2ℰx - 𝒞` and `√D = 2ℰx_min - 𝒞`.
fn log_ratio(e: f64, q: f64, x: f64, x_min: f64, sd: f64) -> ClassicalResult<f64> {
    let excess = 2.0 * (e * q).sqrt() + 2.0 * e * (x - x_min);
    let arg = sd + excess;
    if !(arg > 0.0) {
        return Err(ClassicalError::Domain(format!("log argument {arg} is not positive")));
    }
    Ok((excess / sd).ln_1p())
}

/// Implicit clock of the η equation, zero at `η_min`:
///
/// `t = sqrt(2MQ)/ℰ + sqrt(M) 𝒞/(sqrt2 ℰ^{3/2}) ln[(2 sqrt(ℰQ) + 2ℰη - 𝒞)/sqrt(𝒞² + 4ℰΛ')]`.
pub fn time_of_eta(spec: &PotentialSpec, e_total: f64, l: f64, c_sep: f64, eta: f64) -> ClassicalResult<f64> {
    let (d, lp) = discriminant(spec, e_total, l, c_sep)?;
    let em = eta_min(spec, e_total, l, c_sep)?;
    if !eta.is_finite() {
        return Err(ClassicalError::Domain(format!("eta = {eta}")));
    }
    let q = radicand(e_total, lp, eta, em)?;
    let m = spec.mass;
    let mut t = (2.0 * m * q).sqrt() / e_total;
    if c_sep != 0.0 {
        let coef = m.sqrt() * c_sep / (std::f64::consts::SQRT_2 * e_total.powf(1.5));
        t += coef * log_ratio(e_total, q, eta, em, d.sqrt())?;
    }
    Ok(t)
}

/// Implicit clock of the ξ equation anchored at `ξ(0) = xi0`; the η formula
/// with `𝒞 → -𝒞`, differenced between `xi0` and `xi`.
pub fn time_of_xi(spec: &PotentialSpec, e_total: f64, l: f64, c_sep: f64, xi: f64, xi0: f64) -> ClassicalResult<f64> {
    Ok(time_of_eta(spec, e_total, l, -c_sep, xi)? - time_of_eta(spec, e_total, l, -c_sep, xi0)?)
}

/// Increasing root of `time_of_eta = t` on the `η ≥ η_min` branch. The
/// clock is even about the turning point, so negative `t` maps to the same
/// `η` as `|t|`.
pub fn invert_time_of_eta(spec: &PotentialSpec, e_total: f64, l: f64, c_sep: f64, t: f64) -> ClassicalResult<f64> {
    let lo = eta_min(spec, e_total, l, c_sep)?;
    if !t.is_finite() {
        return Err(ClassicalError::Domain(format!("t = {t}")));
    }
    let target = t.abs();
    bisect_increasing(|x| time_of_eta(spec, e_total, l, c_sep, x), lo, target)
}

/// Root of `time_of_xi = t` on the `ξ ≥ ξ_min` branch.
pub fn invert_time_of_xi(
    spec: &PotentialSpec,
    e_total: f64,
    l: f64,
    c_sep: f64,
    xi0: f64,
    t: f64,
) -> ClassicalResult<f64> {
    let lo = xi_min(spec, e_total, l, c_sep)?;
    let t_lo = time_of_xi(spec, e_total, l, c_sep, lo, xi0)?;
    if !t.is_finite() || t < t_lo {
        return Err(ClassicalError::Domain(format!("t = {t} precedes the xi turning point at {t_lo}")));
    }
    bisect_increasing(|x| time_of_xi(spec, e_total, l, c_sep, x, xi0), lo, t)
}

fn bisect_increasing<F>(f: F, lo: f64, target: f64) -> ClassicalResult<f64>
where
    F: Fn(f64) -> ClassicalResult<f64>,
{
    if f(lo)? >= target {
        return Ok(lo);
    }
    let mut a = lo;
    let mut b = lo.max(1e-300) * 2.0;
    let mut grow = 0;
    while f(b)? < target {
        a = b;
        b *= 2.0;
        grow += 1;
        if grow > 1100 {
            return Err(ClassicalError::Domain(format!("cannot bracket t = {target}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid)? < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `φ(t) = φ₀ + (L/M) ∫ dt'/(η ξ)` by cumulative quadrature over the sampled
/// `(t, η, ξ)`. Each interval is integrated with the quadratic through its
/// neighbours, so the error is third order in the spacing.
pub fn phi_of_t(
    spec: &PotentialSpec,
    times: &[f64],
    eta: &[f64],
    xi: &[f64],
    l: f64,
    phi0: f64,
) -> ClassicalResult<Vec<f64>> {
    let n = times.len();
    if eta.len() != n || xi.len() != n {
        return Err(ClassicalError::InvalidParameter("times, eta and xi lengths differ".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ClassicalError::InvalidParameter("times must be strictly increasing".into()));
    }
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        if !(eta[i] > 0.0) || !(xi[i] > 0.0) {
            return Err(ClassicalError::Domain(format!("eta = {}, xi = {} at sample {i}", eta[i], xi[i])));
        }
        f.push(l / (spec.mass * eta[i] * xi[i]));
    }
    let mut out = vec![phi0; n];
    for i in 0..n - 1 {
        let (a, b) = (times[i], times[i + 1]);
        let step = if n < 3 {
            0.5 * (b - a) * (f[i] + f[i + 1])
        } else {
            let j = if i + 2 < n { i } else { i - 1 };
            let (x, y) = ([times[j], times[j + 1], times[j + 2]], [f[j], f[j + 1], f[j + 2]]);
            let m = 0.5 * (a + b);
            let mut pm = 0.0;
            for k in 0..3 {
                let mut w = 1.0;
                for q in 0..3 {
                    if q != k {
                        w *= (m - x[q]) / (x[k] - x[q]);
                    }
                }
                pm += w * y[k];
            }
            (b - a) / 6.0 * (f[i] + 4.0 * pm + f[i + 1])
        };
        out[i + 1] = out[i] + step;
    }
    Ok(out)
}

/// Exact parabolic solution in the regularized time `τ`, `dt = (η + ξ) dτ`:
///
/// `η = 𝒞/2ℰ + A cosh ω(τ - τ_η)`, `ξ = -𝒞/2ℰ + A cosh ω(τ - τ_ξ)`,
/// `ω = sqrt(8ℰ/M)`, `A = sqrt(𝒞² + 4ℰΛ')/2ℰ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicFlow {
    pub spec: PotentialSpec,
    pub invariants: ParabolicInvariants,
    pub l: f64,
    pub phi0: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub tau_eta: f64,
    pub tau_xi: f64,
}

impl ParabolicFlow {
    /// Needs `ℰ > 0` and `Λ' > 0`, so neither coordinate reaches zero.
    pub fn from_state(spec: &PotentialSpec, s: &CartesianState) -> ClassicalResult<Self> {
        let p = s.to_planar(spec.mass);
        let inv = parabolic_invariants(spec, p.rho, p.z, p.rho_dot, p.z_dot, p.l)?;
        if !(spec.effective_strength(p.l) > 0.0) {
            return Err(ClassicalError::Regime("L^2/2M + kappa <= 0: the orbit reaches the axis".into()));
        }
        let (d, _) = discriminant(spec, inv.energy, p.l, inv.c_sep)?;
        let e = inv.energy;
        let omega = (8.0 * e / spec.mass).sqrt();
        let amplitude = d.sqrt() / (2.0 * e);
        let r = s.r();
        // dη/dτ = 2r η̇ = A ω sinh(-ω τ_η)
        let tau_eta = -(2.0 * r * inv.eta_dot / (amplitude * omega)).asinh() / omega;
        let tau_xi = -(2.0 * r * inv.xi_dot / (amplitude * omega)).asinh() / omega;
        Ok(ParabolicFlow { spec: *spec, invariants: inv, l: p.l, phi0: p.phi, omega, amplitude, tau_eta, tau_xi })
    }

    fn centre(&self) -> f64 {
        self.invariants.c_sep / (2.0 * self.invariants.energy)
    }

    pub fn eta(&self, tau: f64) -> f64 {
        self.centre() + self.amplitude * (self.omega * (tau - self.tau_eta)).cosh()
    }

    pub fn xi(&self, tau: f64) -> f64 {
        -self.centre() + self.amplitude * (self.omega * (tau - self.tau_xi)).cosh()
    }

    /// Lab time at `τ`; the centres cancel in `η + ξ`.
    pub fn time(&self, tau: f64) -> f64 {
        let (w, a) = (self.omega, self.amplitude);
        let s = |t0: f64| (w * (tau - t0)).sinh() - (-w * t0).sinh();
        a / w * (s(self.tau_eta) + s(self.tau_xi))
    }

    /// `∫₀^τ dτ'/(c + A cosh ω(τ' - τ₀))` for `A > |c|`.
    fn inv_integral(&self, c: f64, t0: f64, tau: f64) -> f64 {
        let a = self.amplitude;
        let k = (a * a - c * c).sqrt();
        let q = ((a - c) / (a + c)).sqrt();
        let prim = |x: f64| 2.0 / (self.omega * k) * (q * (0.5 * self.omega * (x - t0)).tanh()).atan();
        prim(tau) - prim(0.0)
    }

    /// `φ(τ) = φ₀ + (L/M) ∫ (1/η + 1/ξ) dτ`.
    pub fn phi(&self, tau: f64) -> f64 {
        let c = self.centre();
        self.phi0
            + self.l / self.spec.mass * (self.inv_integral(c, self.tau_eta, tau) + self.inv_integral(-c, self.tau_xi, tau))
    }

    /// Regularized time reached at lab time `t` (Newton, safeguarded).
    pub fn tau_at(&self, t: f64) -> ClassicalResult<f64> {
        if !t.is_finite() {
            return Err(ClassicalError::Domain(format!("t = {t}")));
        }
        let (mut a, mut b) = (0.0f64, 0.0f64);
        let mut width = 1.0 / self.omega;
        while self.time(b) < t {
            b += width;
            width *= 2.0;
        }
        while self.time(a) > t {
            a -= width;
            width *= 2.0;
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let f = self.time(x) - t;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let newton = x - f / (self.eta(x) + self.xi(x));
            let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// `(η, ξ, φ)` at lab time `t`.
    pub fn at_time(&self, t: f64) -> ClassicalResult<(f64, f64, f64)> {
        let tau = self.tau_at(t)?;
        Ok((self.eta(tau), self.xi(tau), self.phi(tau)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{integrate_cartesian, IntegratorOptions, PlanarState};
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn unit() -> PotentialSpec {
        PotentialSpec::new(0.0, 1.0).unwrap()
    }

    // Oracle: quadrature of sqrt(2M) x / sqrt(ℰx² ∓ 𝒞x - Λ') with x = x_min + s²
    // to remove the endpoint singularity.
    fn oracle(spec: &PotentialSpec, e: f64, l: f64, c: f64, x0: f64, x1: f64) -> f64 {
        let lp = spec.effective_strength(l);
        // larger root of ℰx² - 𝒞x - Λ', without cancellation
        let sd = (c * c + 4.0 * e * lp).sqrt();
        let xm = if c >= 0.0 { (c + sd) / (2.0 * e) } else { 2.0 * lp / (sd - c) };
        let other = c / e - xm;
        let m = spec.mass;
        let f = |s: f64| {
            let x = xm + s * s;
            2.0 * (2.0 * m).sqrt() * x / (e * (x - other)).sqrt()
        };
        integrate(f, if x0 <= xm { 0.0 } else { (x0 - xm).sqrt() }, (x1 - xm).sqrt(), 1e-13, 0.0).unwrap()
    }

    #[test]
    fn eta_min_examples() {
        let s = PotentialSpec::new(1.0, 0.5).unwrap();
        // L²/2M + κ = 1 with L = 0, κ = 1
        assert!((eta_min(&s, 1.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eta_min(&unit(), 1.0, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(eta_min(&unit(), 1.0, 0.0, -2.0).is_err());
        assert!(eta_min(&unit(), -1.0, 1.0, 0.0).is_err());
        for (c, l) in [(0.7, 1.3), (-5.0, 0.4), (3.0, 2.0)] {
            let s = PotentialSpec::new(0.2, 1.7).unwrap();
            let em = eta_min(&s, 1.3, l, c).unwrap();
            assert!(time_of_eta(&s, 1.3, l, c, em).unwrap().abs() < 1e-14);
            let q = 1.3 * em * em - c * em - s.effective_strength(l);
            assert!(q.abs() < 1e-13 * (1.3 * em * em + c.abs() * em));
        }
    }

    #[test]
    fn c_zero_reduces_to_root() {
        let s = PotentialSpec::new(0.3, 2.0).unwrap();
        let (e, l) = (1.5, 0.8);
        for eta in [1.0, 2.0, 10.0] {
            let t = time_of_eta(&s, e, l, 0.0, eta).unwrap();
            let want = (2.0 * 2.0 * e * eta * eta - l * l - 2.0 * 2.0 * 0.3).sqrt() / e;
            assert!((t - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn oracle_example() {
        // 𝒞 = 1, ℰ = 1, M = 1, L² + 2Mκ = 1, η = 5
        let s = PotentialSpec::new(0.5, 1.0).unwrap();
        let t = time_of_eta(&s, 1.0, 0.0, 1.0, 5.0).unwrap();
        let want = oracle(&s, 1.0, 0.0, 1.0, 0.0, 5.0);
        assert!((t - want).abs() < 1e-12 * want, "{t} vs {want}");
        // at M = 1 the defining integrand √(M/2)/√(ℰ/4 - 𝒞/4η - (L²+2Mκ)/8η²) is the same
        let g = |x: f64| (0.5f64).sqrt() / (0.25 - 0.25 / x - 1.0 / (8.0 * x * x)).sqrt();
        let em = eta_min(&s, 1.0, 0.0, 1.0).unwrap();
        let direct = integrate(|u: f64| 2.0 * u * g(em + u * u), 0.0, (5.0 - em).sqrt(), 1e-13, 0.0).unwrap();
        assert!((direct - want).abs() < 1e-11 * want);
    }

    #[test]
    fn xi_examples() {
        let s = PotentialSpec::new(0.4, 1.0).unwrap();
        assert_eq!(time_of_xi(&s, 1.0, 1.0, 0.5, 3.0, 3.0).unwrap(), 0.0);
        // 𝒞 = 0: same as the η clock
        let a = time_of_xi(&s, 1.0, 1.0, 0.0, 4.0, xi_min(&s, 1.0, 1.0, 0.0).unwrap()).unwrap();
        let b = time_of_eta(&s, 1.0, 1.0, 0.0, 4.0).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(time_of_xi(&s, 1.0, 1.0, 0.5, 0.01, 3.0).is_err());
        assert!(time_of_eta(&s, 1.0, 1.0, 0.5, 0.01).is_err());
    }

    #[test]
    fn inversion_roundtrip() {
        let s = PotentialSpec::new(-0.2, 1.4).unwrap();
        let (e, l, c) = (0.9, 1.1, -0.6);
        for eta in [0.8, 1.5, 7.0, 40.0] {
            if let Ok(t) = time_of_eta(&s, e, l, c, eta) {
                let back = invert_time_of_eta(&s, e, l, c, t).unwrap();
                assert!((back - eta).abs() < 1e-12 * eta);
                assert_eq!(back, invert_time_of_eta(&s, e, l, c, -t).unwrap());
            }
        }
        let x0 = 2.0;
        for xi in [1.0, 3.0, 20.0] {
            let t = time_of_xi(&s, e, l, c, xi, x0).unwrap();
            let back = invert_time_of_xi(&s, e, l, c, x0, t).unwrap();
            assert!((back - xi).abs() < 1e-12 * xi, "{back} {xi}");
        }
        assert!(invert_time_of_xi(&s, e, l, c, x0, -100.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let s = unit();
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let eta = vec![2.0; 50];
        let xi = vec![0.5; 50];
        let p = phi_of_t(&s, &t, &eta, &xi, 0.0, 0.3).unwrap();
        assert!(p.iter().all(|&v| v == 0.3));
        let p = phi_of_t(&s, &t, &eta, &xi, 1.5, 0.0).unwrap();
        for (ti, pi) in t.iter().zip(&p) {
            assert!((pi - 1.5 * ti).abs() < 1e-13);
        }
        let mut bad = xi.clone();
        bad[7] = 0.0;
        assert!(phi_of_t(&s, &t, &eta, &bad, 1.0, 0.0).is_err());
    }

    #[test]
    fn invariants_are_conserved() {
        let spec = PotentialSpec::new(0.7, 1.3).unwrap();
        let st = PlanarState::new(1.2, -0.4, 0.9).unwrap().with_z(-0.5, 0.6);
        let c0 = CartesianState::from_planar(&st, spec.mass);
        let tr = integrate_cartesian(&spec, &c0, 6.0, 1e-3, &IntegratorOptions::default()).unwrap();
        let inv = |s: &CartesianState| {
            let p = s.to_planar(spec.mass);
            parabolic_invariants(&spec, p.rho, p.z, p.rho_dot, p.z_dot, p.l).unwrap()
        };
        let first = inv(&tr.samples[0].state);
        for smp in &tr.samples {
            let i = inv(&smp.state);
            assert!((i.energy - first.energy).abs() < 1e-10);
            assert!((i.c_sep - first.c_sep).abs() < 1e-9, "{} {}", i.c_sep, first.c_sep);
            // product and difference identities
            let (eta, xi) = smp.state.eta_xi();
            assert!((eta * xi - smp.state.rho().powi(2)).abs() < 1e-9 * eta * xi);
            assert!((eta - xi - 2.0 * smp.state.pos[2]).abs() < 1e-12 * (eta + xi));
        }
        // the ξ side gives -𝒞
        let lp = spec.effective_strength(st.l);
        let r = first.eta * 0.5 + first.xi * 0.5;
        let cx = first.energy * first.xi - 0.5 * spec.mass * r * r * first.xi_dot.powi(2) / first.xi - lp / first.xi;
        assert!((cx + first.c_sep).abs() < 1e-12);
    }

    #[test]
    fn flow_matches_cartesian() {
        let spec = PotentialSpec::new(0.4, 1.0).unwrap();
        let st = PlanarState::new(1.5, -0.8, 0.7).unwrap().with_z(1.0, -0.3).with_phi(0.2);
        let c0 = CartesianState::from_planar(&st, 1.0);
        let flow = ParabolicFlow::from_state(&spec, &c0).unwrap();
        assert!((flow.eta(0.0) - flow.invariants.eta).abs() < 1e-12);
        assert!((flow.xi(0.0) - flow.invariants.xi).abs() < 1e-12);
        let tr = integrate_cartesian(&spec, &c0, 8.0, 1e-3, &IntegratorOptions { record_every: 100, ..Default::default() })
            .unwrap();
        for smp in &tr.samples {
            let (eta, xi, phi) = flow.at_time(smp.t).unwrap();
            let (e2, x2) = smp.state.eta_xi();
            assert!((eta - e2).abs() < 1e-8 * e2.max(1.0), "t={} {eta} {e2}", smp.t);
            assert!((xi - x2).abs() < 1e-8 * x2.max(1.0));
            assert!((phi - smp.phi).abs() < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn closed_forms_match_quadrature(
            e in 0.2f64..3.0, c in -2.0f64..2.0, l in 0.2f64..2.0,
            kappa in -0.05f64..1.0, mass in 0.5f64..2.0, span in 0.1f64..20.0, x0off in 0.0f64..2.0,
        ) {
            let s = PotentialSpec::new(kappa, mass).unwrap();
            prop_assume!(s.effective_strength(l) > 0.0);
            let em = eta_min(&s, e, l, c).unwrap();
            let eta = em + span;
            let t = time_of_eta(&s, e, l, c, eta).unwrap();
            let want = oracle(&s, e, l, c, em, eta);
            prop_assert!((t - want).abs() <= 1e-10 * want.abs());
            let xm = xi_min(&s, e, l, c).unwrap();
            let (x0, x1) = (xm + x0off, xm + x0off + span);
            let t = time_of_xi(&s, e, l, c, x1, x0).unwrap();
            let want = oracle(&s, e, l, -c, x0, x1);
            prop_assert!((t - want).abs() <= 1e-10 * want.abs());
        }
    }
}
