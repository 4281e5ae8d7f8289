//! Classical motion in the potential `V = κ/ρ²`, `ρ² = x² + y²`.
//!
//! The `z` motion is free, so everything interesting happens in the plane:
//! with `u = 1/ρ` the orbit equation is `u'' + g u = 0`, `g = 1 + 2κM/L²`,
//! which gives secant scattering orbits for `g > 0` and sech/csch/exponential
//! spirals for `g < 0`. `ρ²(t)` is exactly quadratic in time.

mod cartesian;
mod integrate;
mod orbit;
mod parabolic;
mod scattering;

pub use cartesian::{integrate_cartesian, CartesianSample, CartesianState, CartesianTrajectory};
pub use integrate::{
    far_field_state, integrate_orbit, integrate_orbit_with, scattering_deflection, CaptureEvent, IntegratorOptions,
    Trajectory, TrajectorySample,
};
pub use orbit::{classify_orbit, fall_time, orbit_rho, ClassicalOrbit, OrbitKind};
pub use parabolic::{
    eta_min, invert_time_of_eta, invert_time_of_xi, parabolic_invariants, phi_of_t, time_of_eta, time_of_xi,
    xi_min, ParabolicFlow, ParabolicInvariants,
};
pub use scattering::{
    classical_cross_section_2d, impact_parameter_for_angle, scattering_angle_3d, scattering_angle_planar,
    IncomingRay,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("wrong regime: {0}")]
    Regime(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("integration step failed: {0}")]
    Step(String),
}

pub type ClassicalResult<T> = Result<T, ClassicalError>;

/// Strength and particle mass of `V = κ/ρ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// `κ`, energy·length². Positive is repulsive.
    pub kappa: f64,
    /// `M > 0`.
    pub mass: f64,
    /// `ħ > 0`, only used when converting to the scaled quantum variables.
    pub hbar: f64,
}

impl PotentialSpec {
    pub fn new(kappa: f64, mass: f64) -> ClassicalResult<Self> {
        Self::with_hbar(kappa, mass, 1.0)
    }

    pub fn with_hbar(kappa: f64, mass: f64, hbar: f64) -> ClassicalResult<Self> {
        if !kappa.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("kappa = {kappa}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("mass = {mass} must be positive")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("hbar = {hbar} must be positive")));
        }
        Ok(PotentialSpec { kappa, mass, hbar })
    }

    /// `K = 2Mκ/ħ²`.
    pub fn scaled_strength(&self) -> f64 {
        2.0 * self.mass * self.kappa / (self.hbar * self.hbar)
    }

    /// `E = 2Mℰ/ħ²`.
    pub fn scaled_energy(&self, energy: f64) -> f64 {
        2.0 * self.mass * energy / (self.hbar * self.hbar)
    }

    /// `g = 1 + 2κM/L²`, the squared angular frequency of `u = 1/ρ` in `φ`.
    pub fn orbit_g(&self, l: f64) -> f64 {
        1.0 + 2.0 * self.kappa * self.mass / (l * l)
    }

    /// Coefficient of `1/ρ²` in the in-plane energy, `κ + L²/2M`.
    pub fn effective_strength(&self, l: f64) -> f64 {
        self.kappa + l * l / (2.0 * self.mass)
    }
}

/// Effective potential `V = -2αλ²/ρ²` of a polarizable particle near a line
/// charge `λ`. Unit mass, `ħ = 1`.
pub fn wire_potential(polarizability: f64, line_charge: f64) -> ClassicalResult<PotentialSpec> {
    if !(polarizability > 0.0) || !polarizability.is_finite() {
        return Err(ClassicalError::InvalidParameter(format!("polarizability = {polarizability} must be positive")));
    }
    PotentialSpec::new(-2.0 * polarizability * line_charge * line_charge, 1.0)
}

/// Point in phase space. `L` is held as a parameter (it is conserved).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub rho: f64,
    pub rho_dot: f64,
    pub phi: f64,
    /// `L_z`
    pub l: f64,
    pub z: f64,
    pub z_dot: f64,
}

impl PlanarState {
    pub fn new(rho: f64, rho_dot: f64, l: f64) -> ClassicalResult<Self> {
        let s = PlanarState { rho, rho_dot, phi: 0.0, l, z: 0.0, z_dot: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn with_z(mut self, z: f64, z_dot: f64) -> Self {
        self.z = z;
        self.z_dot = z_dot;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> ClassicalResult<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(ClassicalError::InvalidParameter(format!("rho = {} must be positive", self.rho)));
        }
        for (name, v) in [("rho_dot", self.rho_dot), ("phi", self.phi), ("L", self.l), ("z", self.z), ("z_dot", self.z_dot)] {
            if !v.is_finite() {
                return Err(ClassicalError::InvalidParameter(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    /// In-plane energy `ℰ' = ½Mρ̇² + (κ + L²/2M)/ρ²`.
    pub fn e_prime(&self, spec: &PotentialSpec) -> f64 {
        0.5 * spec.mass * self.rho_dot * self.rho_dot + spec.effective_strength(self.l) / (self.rho * self.rho)
    }

    /// Total energy `ℰ = ℰ' + ½Mż²`.
    pub fn e_total(&self, spec: &PotentialSpec) -> f64 {
        self.e_prime(spec) + 0.5 * spec.mass * self.z_dot * self.z_dot
    }

    pub fn phi_dot(&self, spec: &PotentialSpec) -> f64 {
        self.l / (spec.mass * self.rho * self.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_examples() {
        assert_eq!(wire_potential(1.0, 1.0).unwrap().kappa, -2.0);
        assert_eq!(wire_potential(0.5, 2.0).unwrap().kappa, -4.0);
        assert_eq!(wire_potential(3.0, 0.0).unwrap().kappa, 0.0);
        assert!(wire_potential(0.0, 1.0).is_err());
        assert!(wire_potential(-1.0, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PotentialSpec::new(1.0, 0.0).is_err());
        assert!(PotentialSpec::with_hbar(1.0, 1.0, -1.0).is_err());
        assert!(PotentialSpec::new(f64::NAN, 1.0).is_err());
        let s = PotentialSpec::with_hbar(1.5, 2.0, 0.5).unwrap();
        assert_eq!(s.scaled_strength(), 2.0 * 2.0 * 1.5 / 0.25);
    }

    #[test]
    fn state_energy() {
        let spec = PotentialSpec::new(-1.0, 1.0).unwrap();
        let st = PlanarState::new(1.0, 0.0, 2f64.sqrt()).unwrap();
        assert!(st.e_prime(&spec).abs() < 1e-15);
        assert!(PlanarState::new(0.0, 0.0, 1.0).is_err());
        let st = st.with_z(0.0, 2.0);
        assert!((st.e_total(&spec) - 2.0).abs() < 1e-15);
    }
}
