use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ClassicalError, ClassicalResult, PotentialSpec};

/// Incoming particle: in-plane energy, axial velocity and impact parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomingRay {
    pub e_prime: f64,
    pub z_dot: f64,
    pub l: f64,
    pub impact_parameter: f64,
}

impl IncomingRay {
    /// Build from the impact parameter, `L = sqrt(2Mℰ') b`.
    pub fn from_impact(spec: &PotentialSpec, e_prime: f64, z_dot: f64, b: f64) -> ClassicalResult<Self> {
        if !(e_prime > 0.0) || !e_prime.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("e_prime = {e_prime} must be positive")));
        }
        if !b.is_finite() || !z_dot.is_finite() {
            return Err(ClassicalError::InvalidParameter("impact parameter and z_dot must be finite".into()));
        }
        let l = (2.0 * spec.mass * e_prime).sqrt() * b;
        Ok(IncomingRay { e_prime, z_dot, l, impact_parameter: b })
    }

    /// Build from the angular momentum.
    pub fn from_angular_momentum(spec: &PotentialSpec, e_prime: f64, z_dot: f64, l: f64) -> ClassicalResult<Self> {
        if !(e_prime > 0.0) || !e_prime.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("e_prime = {e_prime} must be positive")));
        }
        let b = l / (2.0 * spec.mass * e_prime).sqrt();
        Ok(IncomingRay { e_prime, z_dot, l, impact_parameter: b })
    }

    pub fn is_consistent(&self, spec: &PotentialSpec) -> bool {
        let lhs = self.impact_parameter * (2.0 * spec.mass * self.e_prime).sqrt();
        (lhs - self.l).abs() <= 1e-12 * self.l.abs().max(f64::MIN_POSITIVE)
    }
}

/// Planar deflection `φ_scat = π |1 - 1/sqrt(1 + 2κM/L²)|`.
///
/// Depends on `L` only. For attractive `κ` close to capture the orbit winds
/// and the result exceeds `2π`; it is returned unreduced.
pub fn scattering_angle_planar(spec: &PotentialSpec, l: f64) -> ClassicalResult<f64> {
    if l == 0.0 || !l.is_finite() {
        return Err(ClassicalError::Regime(format!("L = {l}: no scattering orbit")));
    }
    let g = spec.orbit_g(l);
    if !(g > 0.0) {
        return Err(ClassicalError::Regime(format!("1 + 2 kappa M / L^2 = {g} <= 0: capture, not scattering")));
    }
    Ok(PI * (1.0 - 1.0 / g.sqrt()).abs())
}

/// Three-dimensional deflection of a ray with axial velocity `ż`:
/// `cos ϑ = cos φ + [2ż² / (2ℰ'/M + ż²)] sin²(φ/2)`.
pub fn scattering_angle_3d(ray: &IncomingRay, spec: &PotentialSpec) -> ClassicalResult<f64> {
    if !(ray.e_prime > 0.0) {
        return Err(ClassicalError::Regime(format!("e_prime = {} must be positive", ray.e_prime)));
    }
    let phi = scattering_angle_planar(spec, ray.l)?;
    let zz = ray.z_dot * ray.z_dot;
    let w = 2.0 * zz / (2.0 * ray.e_prime / spec.mass + zz);
    let half = (0.5 * phi).sin();
    let c = (phi.cos() + w * half * half).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// Impact parameter that produces a given deflection in a repulsive potential:
/// `b = sqrt(κ/ℰ') u / sqrt(1 - u²)`, `u = 1 - φ/π`.
pub fn impact_parameter_for_angle(spec: &PotentialSpec, e_prime: f64, phi: f64) -> ClassicalResult<f64> {
    check_repulsive(spec, e_prime, phi)?;
    let u = 1.0 - phi / PI;
    Ok((spec.kappa / e_prime).sqrt() * u / (1.0 - u * u).sqrt())
}

/// Classical 2D cross section per unit angle, `dσ/dφ = |db/dφ|`
/// `= sqrt(κ/ℰ') / (π (1 - u²)^{3/2})`, `u = 1 - φ/π`, one side of the axis.
///
/// Note the `sqrt(κ)` dependence: at fixed angle the cross section grows by
/// `sqrt 2` when `κ` doubles.
pub fn classical_cross_section_2d(spec: &PotentialSpec, e_prime: f64, phi: f64) -> ClassicalResult<f64> {
    check_repulsive(spec, e_prime, phi)?;
    let u = 1.0 - phi / PI;
    let w = 1.0 - u * u;
    Ok((spec.kappa / e_prime).sqrt() / (PI * w * w.sqrt()))
}

fn check_repulsive(spec: &PotentialSpec, e_prime: f64, phi: f64) -> ClassicalResult<()> {
    if !(spec.kappa > 0.0) {
        return Err(ClassicalError::Regime(format!(
            "kappa = {} is not repulsive; attractive orbits wind and the cross section is multivalued",
            spec.kappa
        )));
    }
    if !(e_prime > 0.0) {
        return Err(ClassicalError::InvalidParameter(format!("e_prime = {e_prime} must be positive")));
    }
    if !(phi > 0.0 && phi < PI) {
        return Err(ClassicalError::Domain(format!("phi = {phi} outside (0, pi)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn spec(k: f64) -> PotentialSpec {
        PotentialSpec::new(k, 1.0).unwrap()
    }

    #[test]
    fn planar_examples() {
        assert_eq!(scattering_angle_planar(&spec(0.0), 1.3).unwrap(), 0.0);
        // 2κM/L² = 3
        let v = scattering_angle_planar(&spec(1.5), 1.0).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-15);
        // 2|κ|M/L² = 3/4 -> g = 1/4
        let v = scattering_angle_planar(&spec(-0.375), 1.0).unwrap();
        assert!((v - PI).abs() < 1e-15);
        assert!(scattering_angle_planar(&spec(-0.5), 1.0).is_err());
        assert!(scattering_angle_planar(&spec(1.0), 0.0).is_err());
    }

    #[test]
    fn three_d_examples() {
        let s = spec(1.5);
        let ray = IncomingRay::from_angular_momentum(&s, 1.0, 2f64.sqrt(), 1.0).unwrap();
        let v = scattering_angle_3d(&ray, &s).unwrap();
        assert!((v - PI / 3.0).abs() < 1e-14);
        let ray = IncomingRay::from_angular_momentum(&s, 1.0, 0.0, 1.0).unwrap();
        assert!((scattering_angle_3d(&ray, &s).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let ray = IncomingRay::from_angular_momentum(&spec(0.0), 1.0, 0.7, 1.0).unwrap();
        assert_eq!(scattering_angle_3d(&ray, &spec(0.0)).unwrap(), 0.0);
        // axial motion dominating squeezes the angle
        let mut prev = f64::INFINITY;
        for zd in [0.0, 0.5, 1.0, 3.0, 10.0, 100.0] {
            let ray = IncomingRay::from_angular_momentum(&s, 1.0, zd, 1.0).unwrap();
            let v = scattering_angle_3d(&ray, &s).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.03);
    }

    #[test]
    fn ray_consistency() {
        let s = PotentialSpec::new(1.0, 2.5).unwrap();
        let r = IncomingRay::from_impact(&s, 0.7, 0.0, 1.3).unwrap();
        assert!(r.is_consistent(&s));
        let r2 = IncomingRay::from_angular_momentum(&s, 0.7, 0.0, r.l).unwrap();
        assert!((r2.impact_parameter - 1.3).abs() < 1e-15);
    }

    #[test]
    fn inversion_identity() {
        let s = spec(0.8);
        let mut phi = 0.1;
        while phi < 3.0 {
            let b = impact_parameter_for_angle(&s, 1.7, phi).unwrap();
            let l = (2.0 * 1.7f64).sqrt() * b;
            let back = scattering_angle_planar(&s, l).unwrap();
            assert!((back - phi).abs() < 1e-12, "phi={phi} back={back}");
            phi += 0.05;
        }
        // head-on limit
        assert!(impact_parameter_for_angle(&s, 1.7, PI - 1e-9).unwrap() < 1e-4);
    }

    #[test]
    fn cross_section_is_derivative() {
        let s = spec(0.8);
        for phi in [0.2, 1.0, 2.5] {
            let h = 1e-5;
            let db = (impact_parameter_for_angle(&s, 1.7, phi + h).unwrap()
                - impact_parameter_for_angle(&s, 1.7, phi - h).unwrap())
                / (2.0 * h);
            let xs = classical_cross_section_2d(&s, 1.7, phi).unwrap();
            assert!((xs - db.abs()).abs() < 1e-8 * xs);
        }
    }

    #[test]
    fn cross_section_scales_with_root_kappa() {
        for phi in [0.05, 0.3, 1.5] {
            let a = classical_cross_section_2d(&spec(1.0), 2.0, phi).unwrap();
            let b = classical_cross_section_2d(&spec(2.0), 2.0, phi).unwrap();
            assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_section_regimes() {
        assert!(classical_cross_section_2d(&spec(-1.0), 1.0, 1.0).is_err());
        assert!(classical_cross_section_2d(&spec(1.0), 1.0, 0.0).is_err());
        assert!(classical_cross_section_2d(&spec(1.0), 1.0, PI).is_err());
    }
}
