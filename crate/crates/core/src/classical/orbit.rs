use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{ClassicalError, ClassicalResult, PlanarState, PotentialSpec};

/// Relative tolerance used to snap `g = 1 + 2κM/L²` and `|B| - |C|` to zero.
const SNAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitKind {
    /// `ρ = A sec(ωφ + δ)`, `g > 0`, `κ ≠ 0`.
    ScatterSecant,
    /// `ρ = A sech(ωφ + δ)`, `g < 0`, `ℰ' < 0`: spirals in from a maximum radius.
    BoundSech,
    /// `ρ = A csch(ωφ + δ)`, `g < 0`, `ℰ' > 0`: runs between `ρ = ∞` and `ρ = 0`.
    /// Bound only in the loose sense that it ends at the centre.
    BoundCsch,
    /// `ρ = A exp(-(ωφ + δ))`, `g < 0`, `ℰ' = 0`. Sign of `ω` sets the sense.
    PureSpiral,
    /// `ρ = A`, `L² = -2κM`, `ℰ' = 0`.
    Circle,
    /// `κ = 0`: `ρ = A sec(φ + δ)`.
    FreeLine,
    /// `g = 0` with `ρ̇ ≠ 0`: `ρ = 1/(ωφ + δ)`.
    HyperbolicSpiral,
    /// `L = 0`, `κ < 0`: straight fall into the axis.
    Radial,
}

/// Closed-form orbit curve.
///
/// `exponent` is `ω = sqrt|g|`, signed for the csch and spiral kinds so that
/// the argument `ωφ + δ` grows along the motion's branch. `phase` is `δ` in
/// the frame of the state the orbit was fitted to; [`ClassicalOrbit::canonical`]
/// shifts the `φ` origin to make it zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOrbit {
    pub kind: OrbitKind,
    pub amplitude: f64,
    pub phase: f64,
    pub exponent: f64,
    /// `g = 1 + 2κM/L²`, kept for reporting.
    pub g: f64,
}

impl ClassicalOrbit {
    /// Same curve with the `φ` origin moved so that `δ = 0`.
    pub fn canonical(&self) -> Self {
        let mut c = *self;
        c.phase = 0.0;
        c
    }

    /// Open interval of `φ` on which the curve is finite and positive
    /// (may be unbounded).
    pub fn phi_domain(&self) -> (f64, f64) {
        let w = self.exponent;
        let d = self.phase;
        match self.kind {
            OrbitKind::ScatterSecant | OrbitKind::FreeLine => ((-FRAC_PI_2 - d) / w, (FRAC_PI_2 - d) / w),
            OrbitKind::BoundCsch | OrbitKind::HyperbolicSpiral => {
                if w > 0.0 {
                    (-d / w, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, -d / w)
                }
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Angle swept between the two asymptotes (secant kinds only).
    pub fn swept_angle(&self) -> Option<f64> {
        match self.kind {
            OrbitKind::ScatterSecant | OrbitKind::FreeLine => Some(std::f64::consts::PI / self.exponent),
            _ => None,
        }
    }
}

/// Fit the closed-form orbit through a phase-space point.
///
/// With `u = 1/ρ`, `u(φ₀) = B = 1/ρ₀` and `u'(φ₀) = -Mρ̇₀/L`; `C = u'(φ₀)/ω`.
pub fn classify_orbit(spec: &PotentialSpec, state: &PlanarState) -> ClassicalResult<ClassicalOrbit> {
    state.validate()?;
    let m = spec.mass;
    let l = state.l;
    if l == 0.0 {
        if spec.kappa >= 0.0 {
            return Err(ClassicalError::DegenerateInput(
                "L = 0 with kappa >= 0 is pure radial motion, there is no orbit curve".into(),
            ));
        }
        return Ok(ClassicalOrbit { kind: OrbitKind::Radial, amplitude: state.rho, phase: 0.0, exponent: 0.0, g: f64::NEG_INFINITY });
    }
    let g = spec.orbit_g(l);
    let b = 1.0 / state.rho;
    let du = -m * state.rho_dot / l;
    let phi0 = state.phi;

    if spec.kappa == 0.0 {
        let theta = du.atan2(b);
        let a = 1.0 / b.hypot(du);
        return Ok(ClassicalOrbit { kind: OrbitKind::FreeLine, amplitude: a, phase: -phi0 - theta, exponent: 1.0, g });
    }
    if g.abs() <= SNAP {
        if (du / b).abs() <= SNAP {
            return Ok(ClassicalOrbit { kind: OrbitKind::Circle, amplitude: state.rho, phase: 0.0, exponent: 0.0, g });
        }
        // u = B + u'(φ - φ₀)
        return Ok(ClassicalOrbit {
            kind: OrbitKind::HyperbolicSpiral,
            amplitude: 1.0,
            phase: b - du * phi0,
            exponent: du,
            g,
        });
    }
    let w = g.abs().sqrt();
    let c = du / w;
    if g > 0.0 {
        let theta = c.atan2(b);
        let a = 1.0 / b.hypot(c);
        return Ok(ClassicalOrbit { kind: OrbitKind::ScatterSecant, amplitude: a, phase: -w * phi0 - theta, exponent: w, g });
    }
    // g < 0: u = B cosh(ω(φ-φ₀)) + C sinh(ω(φ-φ₀)), B > 0
    let diff = (b - c.abs()) / b;
    if diff.abs() <= SNAP * SNAP {
        // u = B exp(σω(φ-φ₀)), ρ = ρ₀ exp(-σω(φ-φ₀))
        let sw = c.signum() * w;
        return Ok(ClassicalOrbit { kind: OrbitKind::PureSpiral, amplitude: state.rho, phase: -sw * phi0, exponent: sw, g });
    }
    if b > c.abs() {
        let a = 1.0 / ((b - c) * (b + c)).sqrt();
        let phase = -w * phi0 + (c / b).atanh();
        Ok(ClassicalOrbit { kind: OrbitKind::BoundSech, amplitude: a, phase, exponent: w, g })
    } else {
        let sigma = c.signum();
        let a = 1.0 / ((c - b) * (c + b)).sqrt();
        let phase = sigma * (-w * phi0 + (b / c).atanh());
        Ok(ClassicalOrbit { kind: OrbitKind::BoundCsch, amplitude: a, phase, exponent: sigma * w, g })
    }
}

/// `ρ(φ)` on the fitted branch.
pub fn orbit_rho(orbit: &ClassicalOrbit, phi: f64) -> ClassicalResult<f64> {
    if !phi.is_finite() {
        return Err(ClassicalError::Domain(format!("phi = {phi}")));
    }
    let x = orbit.exponent * phi + orbit.phase;
    let rho = match orbit.kind {
        OrbitKind::ScatterSecant | OrbitKind::FreeLine => {
            let c = x.cos();
            if x.abs() >= FRAC_PI_2 || c <= 0.0 {
                return Err(ClassicalError::Domain(format!("phi = {phi} is beyond the secant asymptote")));
            }
            orbit.amplitude / c
        }
        OrbitKind::BoundSech => orbit.amplitude / x.cosh(),
        OrbitKind::BoundCsch => {
            if x <= 0.0 {
                return Err(ClassicalError::Domain(format!("phi = {phi} is beyond the csch pole")));
            }
            orbit.amplitude / x.sinh()
        }
        OrbitKind::PureSpiral => orbit.amplitude * (-x).exp(),
        OrbitKind::Circle => orbit.amplitude,
        OrbitKind::HyperbolicSpiral => {
            if x <= 0.0 {
                return Err(ClassicalError::Domain(format!("phi = {phi} is beyond the spiral asymptote")));
            }
            1.0 / x
        }
        OrbitKind::Radial => {
            return Err(ClassicalError::DegenerateInput("radial motion has no rho(phi) curve".into()));
        }
    };
    if rho.is_finite() && rho > 0.0 {
        Ok(rho)
    } else {
        Err(ClassicalError::Domain(format!("rho(phi = {phi}) = {rho}")))
    }
}

/// Time to reach `ρ = 0` in the capture regime `2κM + L² < 0`.
///
/// `ρ²(t) = ρ₀² + 2ρ₀ρ̇₀t + (2ℰ'/M)t²` exactly, so the arrival time is its
/// first positive root. For `ℰ' < 0` this is
/// `t_f = [sqrt|2κM + L²| - Mρ₀|ρ̇₀|] / (2|ℰ'|)`; it is evaluated in the
/// equivalent cancellation-free form `Mρ₀² / (sqrt|2κM + L²| + Mρ₀|ρ̇₀|)`,
/// which also covers inward motion with `ℰ' >= 0`.
pub fn fall_time(spec: &PotentialSpec, state: &PlanarState) -> ClassicalResult<f64> {
    state.validate()?;
    let m = spec.mass;
    let lam = 2.0 * spec.kappa * m + state.l * state.l;
    if !(lam < 0.0) {
        return Err(ClassicalError::Regime(format!("2 kappa M + L^2 = {lam} is not negative: no fall to the centre")));
    }
    if state.rho_dot > 0.0 {
        return Err(ClassicalError::Regime(format!("rho_dot = {} is outward", state.rho_dot)));
    }
    let p = m * state.rho * state.rho_dot.abs();
    Ok(m * state.rho * state.rho / ((-lam).sqrt() + p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(k: f64) -> PotentialSpec {
        PotentialSpec::new(k, 1.0).unwrap()
    }

    #[test]
    fn repulsive_always_scatters() {
        for (l, rd) in [(0.3, -2.0), (1.0, 0.0), (-4.0, 3.0)] {
            let o = classify_orbit(&spec(1.0), &PlanarState::new(2.0, rd, l).unwrap()).unwrap();
            assert_eq!(o.kind, OrbitKind::ScatterSecant);
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn circle_example() {
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(1.0, 0.0, 2f64.sqrt()).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::Circle);
        // also with a seven-digit L
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(3.0, 0.0, 1.414_213_5).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::Circle);
        assert_eq!(orbit_rho(&o, 123.0).unwrap(), 3.0);
    }

    #[test]
    fn sech_or_csch_by_b_and_c() {
        // κ=-1, L=1: g = -1, ω = 1, B = 1, C = 0.5 -> sech
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(1.0, -0.5, 1.0).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::BoundSech);
        assert!((o.amplitude - 1.0 / 0.75f64.sqrt()).abs() < 1e-15);
        let st = PlanarState::new(1.0, -0.5, 1.0).unwrap();
        assert!(st.e_prime(&spec(-1.0)) < 0.0);
        // C = 2 > B -> csch, positive in-plane energy
        let st = PlanarState::new(1.0, -2.0, 1.0).unwrap();
        let o = classify_orbit(&spec(-1.0), &st).unwrap();
        assert_eq!(o.kind, OrbitKind::BoundCsch);
        assert!(st.e_prime(&spec(-1.0)) > 0.0);
        // C = B exactly -> pure spiral
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(1.0, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::PureSpiral);
    }

    #[test]
    fn curve_passes_through_the_state() {
        let cases = [
            (1.0, 2.0, -0.7, 1.3, 0.4),
            (-1.0, 1.0, -0.5, 1.0, 0.0),
            (-1.0, 1.0, 0.3, 1.0, -2.0),
            (-1.0, 1.5, -2.0, 0.8, 1.0),
            (-1.0, 1.5, 2.0, -0.8, 1.0),
            (-1.0, 0.7, -0.9, 0.9 * 0.7 * 1.0, 0.3),
            (0.0, 3.0, 1.0, 2.0, 0.5),
        ];
        for (k, rho, rd, l, phi) in cases {
            let st = PlanarState::new(rho, rd, l).unwrap().with_phi(phi);
            let o = classify_orbit(&spec(k), &st).unwrap();
            let r = orbit_rho(&o, phi).unwrap();
            assert!((r - rho).abs() < 1e-13 * rho, "{o:?}: {r} vs {rho}");
            // slope: dρ/dφ = ρ̇ / φ̇
            let h = 1e-6;
            let slope = (orbit_rho(&o, phi + h).unwrap() - orbit_rho(&o, phi - h).unwrap()) / (2.0 * h);
            let want = rd / st.phi_dot(&spec(k));
            assert!((slope - want).abs() < 1e-6 * (1.0 + want.abs()), "{o:?}: {slope} vs {want}");
        }
    }

    #[test]
    fn perihelion_and_maximum_at_zero_phase() {
        let o = classify_orbit(&spec(1.0), &PlanarState::new(2.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(o.phase, 0.0);
        assert_eq!(orbit_rho(&o.canonical(), 0.0).unwrap(), o.amplitude);
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::BoundSech);
        assert_eq!(orbit_rho(&o.canonical(), 0.0).unwrap(), o.amplitude);
    }

    #[test]
    fn domain_errors() {
        let o = classify_orbit(&spec(1.0), &PlanarState::new(2.0, 0.0, 1.0).unwrap()).unwrap();
        let (lo, hi) = o.phi_domain();
        assert!(orbit_rho(&o, hi + 1e-9).is_err());
        assert!(orbit_rho(&o, lo - 1e-9).is_err());
        assert!((hi - lo - o.swept_angle().unwrap()).abs() < 1e-12);
        assert!((o.swept_angle().unwrap() - PI / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn radial_cases() {
        let r = classify_orbit(&spec(1.0), &PlanarState::new(1.0, -1.0, 0.0).unwrap());
        assert!(matches!(r, Err(ClassicalError::DegenerateInput(_))));
        let o = classify_orbit(&spec(-1.0), &PlanarState::new(1.0, -1.0, 0.0).unwrap()).unwrap();
        assert_eq!(o.kind, OrbitKind::Radial);
    }

    #[test]
    fn fall_time_examples() {
        let st = PlanarState::new(1.0, 0.0, 0.0).unwrap();
        assert!((fall_time(&spec(-1.0), &st).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        // the textbook form with |ℰ'| in the denominator
        let s = spec(-1.0);
        let st = PlanarState::new(0.8, -0.3, 0.5).unwrap();
        let ep = st.e_prime(&s);
        assert!(ep < 0.0);
        let textbook = ((1.75f64).sqrt() - 0.8 * 0.3) / (2.0 * ep.abs());
        assert!((fall_time(&s, &st).unwrap() - textbook).abs() < 1e-14);
        // M ρ₀ |ρ̇₀| = sqrt|2κM + L²| means ℰ' = 0: ρ² is linear, t = ρ₀ / (2|ρ̇₀|)
        let rd = -(1.75f64).sqrt();
        let st = PlanarState::new(1.0, rd, 0.5).unwrap();
        assert!(st.e_prime(&s).abs() < 1e-15);
        assert!((fall_time(&s, &st).unwrap() - 1.0 / (2.0 * rd.abs())).abs() < 1e-15);
        // regime errors
        assert!(fall_time(&spec(1.0), &PlanarState::new(1.0, 0.0, 0.0).unwrap()).is_err());
        assert!(fall_time(&spec(-1.0), &PlanarState::new(1.0, 0.1, 0.0).unwrap()).is_err());
        assert!(fall_time(&spec(-1.0), &PlanarState::new(1.0, 0.0, 1.5).unwrap()).is_err());
    }

    #[test]
    fn fall_time_scaling_and_monotonicity() {
        let s = spec(-2.0);
        let base = PlanarState::new(1.3, -0.2, 0.7).unwrap();
        let t0 = fall_time(&s, &base).unwrap();
        for alpha in [0.5, 2.0, 3.7] {
            let st = PlanarState::new(alpha * base.rho, base.rho_dot / alpha, base.l).unwrap();
            let t = fall_time(&s, &st).unwrap();
            assert!((t - alpha * alpha * t0).abs() < 1e-13 * t);
        }
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let st = PlanarState::new(1.3, -0.1 * k as f64, 0.7).unwrap();
            let t = fall_time(&s, &st).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }
}
