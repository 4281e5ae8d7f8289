use serde::{Deserialize, Serialize};

use super::{ClassicalError, ClassicalResult, PlanarState, PotentialSpec};

/// Knobs of the fixed-step RK4 oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Capture is declared when `ρ` drops below this.
    pub rho_floor: f64,
    /// A base step is halved until it is below this fraction of the local
    /// dynamical time `min(ρ/|v|, sqrt(ρ/|ρ̈|))`.
    pub step_fraction: f64,
    /// Keep every n-th base step in the output (the last sample is always kept).
    pub record_every: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rho_floor: 1e-8, step_fraction: 2e-3, record_every: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: PlanarState,
    /// In-plane energy recomputed from the sample (a conservation diagnostic).
    pub e_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureEvent {
    /// Interpolated time at which `ρ` crossed the floor.
    pub t: f64,
    pub rho_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub capture: Option<CaptureEvent>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

#[derive(Clone, Copy)]
struct Y {
    rho: f64,
    rd: f64,
    phi: f64,
    z: f64,
}

impl Y {
    fn axpy(self, h: f64, d: Y) -> Y {
        Y { rho: self.rho + h * d.rho, rd: self.rd + h * d.rd, phi: self.phi + h * d.phi, z: self.z + h * d.z }
    }
}

struct Rhs {
    force: f64, // (2κ + L²/M)/M
    omega: f64, // L/M
    zd: f64,
}

impl Rhs {
    fn eval(&self, y: Y) -> Y {
        let r2 = y.rho * y.rho;
        Y { rho: y.rd, rd: self.force / (r2 * y.rho), phi: self.omega / r2, z: self.zd }
    }

    fn step(&self, y: Y, h: f64) -> Y {
        let k1 = self.eval(y);
        let k2 = self.eval(y.axpy(0.5 * h, k1));
        let k3 = self.eval(y.axpy(0.5 * h, k2));
        let k4 = self.eval(y.axpy(h, k3));
        Y {
            rho: y.rho + h / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho),
            rd: y.rd + h / 6.0 * (k1.rd + 2.0 * k2.rd + 2.0 * k3.rd + k4.rd),
            phi: y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
            z: y.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        }
    }

    fn timescale(&self, y: Y) -> f64 {
        let vt = self.omega / y.rho;
        let v = y.rd.hypot(vt);
        let acc = (self.force / (y.rho * y.rho * y.rho)).abs();
        let mut tau = f64::INFINITY;
        if v > 0.0 {
            tau = tau.min(y.rho / v);
        }
        if acc > 0.0 {
            tau = tau.min((y.rho / acc).sqrt());
        }
        tau
    }
}

/// Fixed-step RK4 integration of `ρ̈ = (2κ + L²/M)/(Mρ³)`, `φ̇ = L/(Mρ²)`,
/// `ż = const`, with the default options.
pub fn integrate_orbit(spec: &PotentialSpec, state: &PlanarState, t_end: f64, dt: f64) -> ClassicalResult<Trajectory> {
    integrate_orbit_with(spec, state, t_end, dt, &IntegratorOptions::default())
}

/// RK4 on a fixed grid of base steps `dt`. Inside a base step the step is
/// halved until it resolves the local dynamical time, which keeps the scheme
/// deterministic while following the `ρ → 0` singularity down to the floor.
/// Capture ends the run early and is reported in [`Trajectory::capture`].
pub fn integrate_orbit_with(
    spec: &PotentialSpec,
    state: &PlanarState,
    t_end: f64,
    dt: f64,
    opts: &IntegratorOptions,
) -> ClassicalResult<Trajectory> {
    state.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ClassicalError::Step(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(ClassicalError::Step(format!("t_end = {t_end} must be finite and >= 0")));
    }
    if !(opts.rho_floor >= 0.0) || !(opts.step_fraction > 0.0) || opts.record_every == 0 {
        return Err(ClassicalError::InvalidParameter(format!("bad integrator options {opts:?}")));
    }
    let m = spec.mass;
    let rhs = Rhs { force: (2.0 * spec.kappa + state.l * state.l / m) / m, omega: state.l / m, zd: state.z_dot };
    let mk = |t: f64, y: Y| {
        let st = PlanarState { rho: y.rho, rho_dot: y.rd, phi: y.phi, l: state.l, z: y.z, z_dot: state.z_dot };
        TrajectorySample { t, state: st, e_prime: st.e_prime(spec) }
    };
    let mut y = Y { rho: state.rho, rd: state.rho_dot, phi: state.phi, z: state.z };
    let mut samples = vec![mk(0.0, y)];
    let n_steps = (t_end / dt).ceil() as usize;
    for i in 0..n_steps {
        let t0 = i as f64 * dt;
        let t1 = ((i + 1) as f64 * dt).min(t_end);
        let span = t1 - t0;
        let mut done = 0.0;
        while done < span {
            let remaining = span - done;
            let mut h = remaining;
            let tau = rhs.timescale(y);
            let mut halvings = 0;
            while h > opts.step_fraction * tau && halvings < 200 {
                h *= 0.5;
                halvings += 1;
            }
            let mut next = rhs.step(y, h);
            while !(next.rho > 0.0 && next.rho.is_finite() && next.rd.is_finite()) {
                h *= 0.5;
                halvings += 1;
                if halvings > 400 {
                    return Err(ClassicalError::Step(format!("no admissible step at t = {}", t0 + done)));
                }
                next = rhs.step(y, h);
            }
            if next.rho < opts.rho_floor {
                // ρ² is locally linear in t: interpolate the crossing
                let (a, b) = (y.rho * y.rho, next.rho * next.rho);
                let f = opts.rho_floor * opts.rho_floor;
                let frac = if a > b { ((a - f) / (a - b)).clamp(0.0, 1.0) } else { 1.0 };
                let tc = t0 + done + frac * h;
                samples.push(mk(t0 + done + h, next));
                return Ok(Trajectory { samples, capture: Some(CaptureEvent { t: tc, rho_floor: opts.rho_floor }) });
            }
            y = next;
            done = if remaining - h <= 1e-15 * span { span } else { done + h };
        }
        if (i + 1) % opts.record_every == 0 || i + 1 == n_steps {
            samples.push(mk(t1, y));
        }
    }
    Ok(Trajectory { samples, capture: None })
}

/// Inbound state at radius `r0` for given in-plane energy and `L`, `φ = 0`.
pub fn far_field_state(spec: &PotentialSpec, e_prime: f64, l: f64, r0: f64) -> ClassicalResult<PlanarState> {
    let kin = e_prime - spec.effective_strength(l) / (r0 * r0);
    if !(kin > 0.0) {
        return Err(ClassicalError::Domain(format!("r0 = {r0} is inside the turning point")));
    }
    PlanarState::new(r0, -(2.0 * kin / spec.mass).sqrt(), l)
}

/// Total rotation of the in-plane velocity between the first and last sample,
/// `Δφ + Δα` with `α = atan2(L/(Mρ), ρ̇)` the angle between velocity and the
/// radial direction. Unreduced, so winding orbits give more than `2π`.
pub fn scattering_deflection(spec: &PotentialSpec, traj: &Trajectory) -> f64 {
    let a = traj.samples[0].state;
    let b = traj.last().state;
    let alpha = |s: &PlanarState| (s.l / (spec.mass * s.rho)).atan2(s.rho_dot);
    ((b.phi - a.phi) + (alpha(&b) - alpha(&a))).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classify_orbit, fall_time, orbit_rho, scattering_angle_planar};

    fn spec(k: f64) -> PotentialSpec {
        PotentialSpec::new(k, 1.0).unwrap()
    }

    #[test]
    fn free_radial_line() {
        // κ = 0, L = 0: ρ(t) = |ρ₀ + v t| exactly
        let st = PlanarState::new(2.0, -0.5, 0.0).unwrap();
        let tr = integrate_orbit(&spec(0.0), &st, 3.0, 0.01).unwrap();
        for s in &tr.samples {
            assert!((s.state.rho - (2.0 - 0.5 * s.t)).abs() < 1e-12);
        }
    }

    #[test]
    fn free_line_with_angular_momentum() {
        // straight line at distance 1 from the axis: ρ² = 1 + t²
        let st = PlanarState::new(1.0, 0.0, 1.0).unwrap();
        let tr = integrate_orbit(&spec(0.0), &st, 5.0, 1e-2).unwrap();
        for s in &tr.samples {
            assert!((s.state.rho - (1.0 + s.t * s.t).sqrt()).abs() < 1e-10);
            assert!((s.state.phi - s.t.atan()).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_stays_round() {
        let st = PlanarState::new(1.0, 0.0, 2f64.sqrt()).unwrap();
        let period = 2.0 * std::f64::consts::PI / st.phi_dot(&spec(-1.0));
        let tr = integrate_orbit(&spec(-1.0), &st, 10.0 * period, 1e-3).unwrap();
        for s in &tr.samples {
            assert!((s.state.rho - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_conservation() {
        for (k, rho, rd, l) in [(1.0, 1.0, 0.3, 0.7), (-1.0, 1.0, -0.5, 1.0), (-0.2, 2.0, 0.1, 1.0)] {
            let s = spec(k);
            let st = PlanarState::new(rho, rd, l).unwrap();
            let tr = integrate_orbit(&s, &st, 10.0, 1e-3).unwrap();
            let e0 = st.e_prime(&s);
            // the sample past the capture floor is not expected to conserve anything
            let n = tr.samples.len() - usize::from(tr.capture.is_some());
            for smp in &tr.samples[..n] {
                assert!((smp.e_prime - e0).abs() <= 1e-8 * e0.abs() + 1e-12, "{k} {}: {}", smp.t, smp.e_prime - e0);
            }
        }
    }

    #[test]
    fn sech_orbit_matches_closed_form() {
        let s = spec(-1.0);
        let st = PlanarState::new(1.0, 0.0, 1.0).unwrap();
        let o = classify_orbit(&s, &st).unwrap();
        let tr = integrate_orbit(&s, &st, 0.8, 1e-3).unwrap();
        let mut hit = false;
        for smp in &tr.samples {
            let r = orbit_rho(&o, smp.state.phi).unwrap();
            assert!((r - smp.state.rho).abs() < 1e-6 * smp.state.rho);
            hit |= smp.state.phi > 0.5;
        }
        assert!(hit);
    }

    #[test]
    fn capture_time_matches_formula() {
        let s = spec(-1.0);
        let st = PlanarState::new(1.0, 0.0, 0.0).unwrap();
        let opts = IntegratorOptions { rho_floor: 1e-6, ..Default::default() };
        let tr = integrate_orbit_with(&s, &st, 2.0, 1e-3, &opts).unwrap();
        let tc = tr.capture.unwrap().t;
        assert!((tc - fall_time(&s, &st).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn scale_invariance() {
        let s = spec(-0.3);
        let st = PlanarState::new(1.0, 0.2, 0.9).unwrap();
        let a = integrate_orbit(&s, &st, 4.0, 1e-3).unwrap();
        let alpha = 2.0;
        let st2 = PlanarState::new(alpha * st.rho, st.rho_dot / alpha, st.l).unwrap();
        let b = integrate_orbit(&s, &st2, 4.0 * alpha * alpha, 1e-3 * alpha * alpha).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((y.state.rho / alpha - x.state.rho).abs() < 1e-8 * x.state.rho);
            assert!((y.state.phi - x.state.phi).abs() < 1e-8);
        }
    }

    #[test]
    fn deflection_matches_closed_form() {
        let s = spec(1.0);
        let st = far_field_state(&s, 1.0, 1.0, 1e3).unwrap();
        let opts = IntegratorOptions { record_every: 1000, ..Default::default() };
        let t = 2.0 * 1e3 / 2f64.sqrt();
        let tr = integrate_orbit_with(&s, &st, t, 0.05, &opts).unwrap();
        let d = scattering_deflection(&s, &tr);
        assert!((d - scattering_angle_planar(&s, 1.0).unwrap()).abs() < 1e-3, "{d}");
    }

    #[test]
    fn bad_steps() {
        let st = PlanarState::new(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(integrate_orbit(&spec(1.0), &st, 1.0, 0.0), Err(ClassicalError::Step(_))));
        assert!(matches!(integrate_orbit(&spec(1.0), &st, 1.0, -1.0), Err(ClassicalError::Step(_))));
        assert!(integrate_orbit(&spec(1.0), &st, 1.0, f64::NAN).is_err());
    }
}
