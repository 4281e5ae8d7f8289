//! Cartesian 3D integrator, independent of the planar reduction.

use serde::{Deserialize, Serialize};

use super::{ClassicalError, ClassicalResult, IntegratorOptions, PlanarState, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub pos: [f64; 3],
    pub vel: [f64; 3],
}

impl CartesianState {
    pub fn from_planar(s: &PlanarState, mass: f64) -> Self {
        let (sp, cp) = s.phi.sin_cos();
        let vt = s.l / (mass * s.rho);
        CartesianState {
            pos: [s.rho * cp, s.rho * sp, s.z],
            vel: [s.rho_dot * cp - vt * sp, s.rho_dot * sp + vt * cp, s.z_dot],
        }
    }

    pub fn rho(&self) -> f64 {
        self.pos[0].hypot(self.pos[1])
    }

    pub fn r(&self) -> f64 {
        self.rho().hypot(self.pos[2])
    }

    pub fn l_z(&self, mass: f64) -> f64 {
        mass * (self.pos[0] * self.vel[1] - self.pos[1] * self.vel[0])
    }

    pub fn energy(&self, spec: &PotentialSpec) -> f64 {
        let v2: f64 = self.vel.iter().map(|v| v * v).sum();
        let r2 = self.pos[0] * self.pos[0] + self.pos[1] * self.pos[1];
        0.5 * spec.mass * v2 + spec.kappa / r2
    }

    /// Parabolic coordinates `(η, ξ) = (r + z, r - z)`.
    pub fn eta_xi(&self) -> (f64, f64) {
        let r = self.r();
        (r + self.pos[2], r - self.pos[2])
    }

    pub fn to_planar(&self, mass: f64) -> PlanarState {
        let rho = self.rho();
        let (cp, sp) = (self.pos[0] / rho, self.pos[1] / rho);
        PlanarState {
            rho,
            rho_dot: self.vel[0] * cp + self.vel[1] * sp,
            phi: self.pos[1].atan2(self.pos[0]),
            l: self.l_z(mass),
            z: self.pos[2],
            z_dot: self.vel[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianSample {
    pub t: f64,
    pub state: CartesianState,
    /// Azimuth unwrapped along the run.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianTrajectory {
    pub samples: Vec<CartesianSample>,
    pub captured: bool,
}

type V6 = [f64; 6];

fn deriv(k2: f64, y: &V6) -> V6 {
    // F/M = (2κ/M) (x, y, 0)/ρ⁴
    let r2 = y[0] * y[0] + y[1] * y[1];
    let f = k2 / (r2 * r2);
    [y[3], y[4], y[5], f * y[0], f * y[1], 0.0]
}

fn add(y: &V6, h: f64, d: &V6) -> V6 {
    let mut o = *y;
    for i in 0..6 {
        o[i] += h * d[i];
    }
    o
}

fn rk4(k2: f64, y: &V6, h: f64) -> V6 {
    let a = deriv(k2, y);
    let b = deriv(k2, &add(y, 0.5 * h, &a));
    let c = deriv(k2, &add(y, 0.5 * h, &b));
    let d = deriv(k2, &add(y, h, &c));
    let mut o = *y;
    for i in 0..6 {
        o[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    }
    o
}

fn timescale(k2: f64, y: &V6) -> f64 {
    let rho = y[0].hypot(y[1]);
    let v = (y[3] * y[3] + y[4] * y[4]).sqrt();
    let acc = (k2 / (rho * rho * rho)).abs();
    let mut tau = f64::INFINITY;
    if v > 0.0 {
        tau = tau.min(rho / v);
    }
    if acc > 0.0 {
        tau = tau.min((rho / acc).sqrt());
    }
    tau
}

/// RK4 for `M r̈ = 2κ (x, y, 0)/ρ⁴` with the same step-halving rule as the
/// planar integrator. Samples every base step (thinned by `record_every`).
pub fn integrate_cartesian(
    spec: &PotentialSpec,
    start: &CartesianState,
    t_end: f64,
    dt: f64,
    opts: &IntegratorOptions,
) -> ClassicalResult<CartesianTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(ClassicalError::Step(format!("bad time grid t_end = {t_end}, dt = {dt}")));
    }
    if !(start.rho() > 0.0) {
        return Err(ClassicalError::InvalidParameter("start on the axis".into()));
    }
    let k2 = 2.0 * spec.kappa / spec.mass;
    let mut y: V6 = [start.pos[0], start.pos[1], start.pos[2], start.vel[0], start.vel[1], start.vel[2]];
    let mut phi = y[1].atan2(y[0]);
    let mk = |t: f64, y: &V6, phi: f64| CartesianSample {
        t,
        state: CartesianState { pos: [y[0], y[1], y[2]], vel: [y[3], y[4], y[5]] },
        phi,
    };
    let mut samples = vec![mk(0.0, &y, phi)];
    let n = (t_end / dt).ceil() as usize;
    for i in 0..n {
        let t0 = i as f64 * dt;
        let span = ((i + 1) as f64 * dt).min(t_end) - t0;
        let mut done = 0.0;
        while done < span {
            let remaining = span - done;
            let mut h = remaining;
            let tau = timescale(k2, &y);
            let mut halvings = 0;
            while h > opts.step_fraction * tau && halvings < 200 {
                h *= 0.5;
                halvings += 1;
            }
            let next = rk4(k2, &y, h);
            if !next.iter().all(|v| v.is_finite()) {
                return Err(ClassicalError::Step(format!("non-finite state at t = {}", t0 + done)));
            }
            let old = y[1].atan2(y[0]);
            let new = next[1].atan2(next[0]);
            let mut d = new - old;
            d -= 2.0 * std::f64::consts::PI * (d / (2.0 * std::f64::consts::PI)).round();
            phi += d;
            y = next;
            if y[0].hypot(y[1]) < opts.rho_floor {
                samples.push(mk(t0 + done + h, &y, phi));
                return Ok(CartesianTrajectory { samples, captured: true });
            }
            done = if remaining - h <= 1e-15 * span { span } else { done + h };
        }
        if (i + 1) % opts.record_every == 0 || i + 1 == n {
            samples.push(mk(t0 + span, &y, phi));
        }
    }
    Ok(CartesianTrajectory { samples, captured: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{integrate_orbit, scattering_angle_3d, IncomingRay};

    #[test]
    fn planar_roundtrip() {
        let st = PlanarState::new(1.3, -0.4, 0.9).unwrap().with_phi(2.0).with_z(0.5, 0.25);
        let c = CartesianState::from_planar(&st, 2.0);
        let back = c.to_planar(2.0);
        for (a, b) in [(st.rho, back.rho), (st.rho_dot, back.rho_dot), (st.phi, back.phi), (st.l, back.l), (st.z_dot, back.z_dot)] {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn agrees_with_planar_integrator() {
        let spec = PotentialSpec::new(0.6, 1.0).unwrap();
        let st = PlanarState::new(1.0, -0.3, 0.8).unwrap().with_z(0.0, 0.4);
        let p = integrate_orbit(&spec, &st, 5.0, 1e-3).unwrap();
        let c = integrate_cartesian(&spec, &CartesianState::from_planar(&st, 1.0), 5.0, 1e-3, &Default::default()).unwrap();
        let l0 = st.l;
        for (a, b) in p.samples.iter().zip(&c.samples) {
            assert!((a.state.rho - b.state.rho()).abs() < 1e-9);
            assert!((a.state.phi - b.phi).abs() < 1e-9);
            assert!((b.state.l_z(1.0) - l0).abs() < 1e-9);
            assert!((b.state.pos[2] - a.state.z).abs() < 1e-12);
        }
    }

    #[test]
    fn three_d_angle_from_trajectory() {
        // ℰ' = 1, M = 1, ż = sqrt 2, φ_scat = π/2 needs 2κ/L² = 3
        let spec = PotentialSpec::new(1.5, 1.0).unwrap();
        let l = 1.0;
        let st = crate::classical::far_field_state(&spec, 1.0, l, 2e3).unwrap().with_z(0.0, 2f64.sqrt());
        let c0 = CartesianState::from_planar(&st, 1.0);
        let opts = IntegratorOptions { record_every: 10_000, ..Default::default() };
        let tr = integrate_cartesian(&spec, &c0, 2.0 * 2e3 / 2f64.sqrt(), 0.05, &opts).unwrap();
        let v0 = c0.vel;
        let v1 = tr.samples.last().unwrap().state.vel;
        let dot: f64 = (0..3).map(|i| v0[i] * v1[i]).sum();
        let n0: f64 = v0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n1: f64 = v1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let theta = (dot / (n0 * n1)).acos();
        let ray = IncomingRay::from_angular_momentum(&spec, 1.0, 2f64.sqrt(), l).unwrap();
        let want = scattering_angle_3d(&ray, &spec).unwrap();
        assert!((want - std::f64::consts::PI / 3.0).abs() < 1e-14);
        assert!((theta - want).abs() < 1e-4, "{theta} vs {want}");
    }
}
