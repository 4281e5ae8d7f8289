//! Cylindrical separated solutions `ψ = J_ν(qρ) e^{ikz} e^{imφ}`,
//! `ν = sqrt(m² + K)`, `q = sqrt(E - k²)`, in the scaled units `E = 2Mℰ/ħ²`,
//! `K = 2Mκ/ħ²`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{FieldGrid, GridError, GridSpec, ModeDescriptor};
use crate::specfun::{bessel_j, SeriesPolicy, SpecfunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CylError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("wrong regime: {0}")]
    Regime(String),
    #[error("q rho = {0} is below the asymptotic zone (needs >= 5)")]
    AsymptoticZone(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Special(#[from] SpecfunError),
}

pub type CylResult<T> = Result<T, CylError>;

/// Policy used for all Bessel evaluations here: tighter than the default so
/// that finite-difference checks see smooth data.
pub fn policy() -> SeriesPolicy {
    SeriesPolicy { rel_tol: 1e-15, ..SeriesPolicy::default() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylMode {
    pub m: i32,
    /// Axial wavenumber.
    pub k: f64,
    /// Scaled total energy.
    #[serde(rename = "E")]
    pub e: f64,
    /// Scaled strength, `K >= 0`.
    #[serde(rename = "K")]
    pub big_k: f64,
    pub amplitude: Complex64,
}

impl CylMode {
    pub fn new(m: i32, k: f64, e: f64, big_k: f64) -> CylResult<Self> {
        let mode = CylMode { m, k, e, big_k, amplitude: Complex64::new(1.0, 0.0) };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> CylResult<()> {
        if !self.k.is_finite() || !self.e.is_finite() || !self.amplitude.re.is_finite() || !self.amplitude.im.is_finite() {
            return Err(CylError::InvalidParameter(format!("non-finite mode {self:?}")));
        }
        if !(self.big_k >= 0.0) || !self.big_k.is_finite() {
            return Err(CylError::InvalidParameter(format!("K = {} must be >= 0", self.big_k)));
        }
        if !(self.e - self.k * self.k > 0.0) {
            return Err(CylError::Regime(format!("E - k^2 = {} <= 0: evanescent mode", self.e - self.k * self.k)));
        }
        Ok(())
    }

    /// Radial wavenumber `q = sqrt(E - k²)`.
    pub fn q(&self) -> f64 {
        (self.e - self.k * self.k).sqrt()
    }

    /// Bessel order `sqrt(m² + K)`.
    pub fn nu(&self) -> f64 {
        bessel_order(self.m, self.big_k)
    }

    pub fn descriptor(&self) -> ModeDescriptor {
        ModeDescriptor::Cylindrical { m: self.m, k: self.k, e: self.e, big_k: self.big_k }
    }

    /// `ψ(ρ, φ, z)` including the amplitude.
    pub fn value(&self, rho: f64, phi: f64, z: f64) -> CylResult<Complex64> {
        let p = radial_p(self, rho)?;
        Ok(self.amplitude * p * Complex64::from_polar(1.0, self.k * z + self.m as f64 * phi))
    }
}

pub fn bessel_order(m: i32, big_k: f64) -> f64 {
    let m = m as f64;
    (m * m + big_k).sqrt()
}

/// Regular radial function `P(ρ) = J_ν(qρ)`.
pub fn radial_p(mode: &CylMode, rho: f64) -> CylResult<f64> {
    mode.validate()?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(CylError::InvalidParameter(format!("rho = {rho}")));
    }
    Ok(bessel_j(mode.nu(), mode.q() * rho, &policy())?)
}

/// Energy-independent phase shift `δ_m = -(π/2)(sqrt(m² + K) - |m|)`,
/// evaluated as `-(π/2) K / (sqrt(m² + K) + |m|)` to keep precision at large `|m|`.
pub fn phase_shift(m: i32, big_k: f64) -> f64 {
    if big_k == 0.0 {
        return 0.0;
    }
    let am = (m as f64).abs();
    -FRAC_PI_2 * big_k / (bessel_order(m, big_k) + am)
}

/// Coefficients `ε_m i^m` of `e^{iqx} = Σ ε_m i^m cos(mφ) J_m(qρ)`,
/// `ε_0 = 1`, `ε_m = 2`.
pub fn plane_wave_coeffs(m_max: usize) -> Vec<Complex64> {
    let powers = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
    (0..=m_max).map(|m| powers[m % 4] * if m == 0 { 1.0 } else { 2.0 }).collect()
}

/// Truncated partial-wave sum of the plane wave `e^{iqx}`, `x = ρ cos φ`.
pub fn plane_wave_sum(q: f64, rho: f64, phi: f64, m_max: usize) -> CylResult<Complex64> {
    let pol = policy();
    let mut sum = Complex64::new(0.0, 0.0);
    for (m, c) in plane_wave_coeffs(m_max).into_iter().enumerate() {
        sum += c * (m as f64 * phi).cos() * bessel_j(m as f64, q * rho, &pol)?;
    }
    Ok(sum)
}

fn check_scattering_args(big_k: f64, q: f64, rho: f64, phi: f64) -> CylResult<()> {
    if !(big_k >= 0.0) || !big_k.is_finite() {
        return Err(CylError::InvalidParameter(format!("K = {big_k} must be >= 0")));
    }
    if !(q > 0.0) || !q.is_finite() || !(rho > 0.0) || !rho.is_finite() || !phi.is_finite() {
        return Err(CylError::InvalidParameter(format!("q = {q}, rho = {rho}, phi = {phi}")));
    }
    Ok(())
}

/// Far-field scattering state `e^{iqx} + ψ_scat`, where each partial wave of
/// `ψ_scat` is the difference between the shifted and the free cosine,
/// `sqrt(2/πqρ) ε_m i^m cos(mφ) [cos(qρ - mπ/2 - π/4 + δ_m) - cos(qρ - mπ/2 - π/4)]`.
/// The incident wave is kept exact.
pub fn scattering_state_asymptotic(big_k: f64, q: f64, rho: f64, phi: f64, m_max: usize) -> CylResult<Complex64> {
    check_scattering_args(big_k, q, rho, phi)?;
    let s = q * rho;
    if s < 5.0 {
        return Err(CylError::AsymptoticZone(s));
    }
    let pre = (2.0 / (PI * s)).sqrt();
    let mut scat = Complex64::new(0.0, 0.0);
    for (m, c) in plane_wave_coeffs(m_max).into_iter().enumerate() {
        let free = s - m as f64 * FRAC_PI_2 - FRAC_PI_4;
        let d = phase_shift(m as i32, big_k);
        // cos(free + d) - cos(free) without cancellation for small d
        let diff = -2.0 * (free + 0.5 * d).sin() * (0.5 * d).sin();
        scat += c * (m as f64 * phi).cos() * diff;
    }
    Ok(Complex64::from_polar(1.0, q * rho * phi.cos()) + pre * scat)
}

/// Exact counterpart of [`scattering_state_asymptotic`]: `e^{iqx}` plus the
/// partial-wave sum of `J_{ν_m}(qρ) - J_m(qρ)`.
pub fn scattering_state_exact(big_k: f64, q: f64, rho: f64, phi: f64, m_max: usize) -> CylResult<Complex64> {
    check_scattering_args(big_k, q, rho, phi)?;
    let pol = policy();
    let s = q * rho;
    let mut scat = Complex64::new(0.0, 0.0);
    for (m, c) in plane_wave_coeffs(m_max).into_iter().enumerate() {
        let nu = bessel_order(m as i32, big_k);
        let diff = bessel_j(nu, s, &pol)? - bessel_j(m as f64, s, &pol)?;
        scat += c * (m as f64 * phi).cos() * diff;
    }
    Ok(Complex64::from_polar(1.0, s * phi.cos()) + scat)
}

/// Two-dimensional scattering amplitude from the phase shifts,
/// `f(φ) = sqrt(2/(πq)) e^{-iπ/4} Σ ε_m e^{iδ_m} sin δ_m cos(mφ)`, in the
/// convention `ψ → e^{iqx} + f(φ) e^{iqρ}/sqrt(ρ)`. Differential cross section
/// per unit angle is `|f|²`.
pub fn scattering_amplitude_2d(big_k: f64, q: f64, phi: f64, m_max: usize) -> CylResult<Complex64> {
    check_scattering_args(big_k, q, 1.0, phi)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..=m_max {
        let d = phase_shift(m as i32, big_k);
        let eps = if m == 0 { 1.0 } else { 2.0 };
        sum += eps * Complex64::from_polar(d.sin(), d) * (m as f64 * phi).cos();
    }
    Ok((2.0 / (PI * q)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4) * sum)
}

pub fn differential_cross_section_2d(big_k: f64, q: f64, phi: f64, m_max: usize) -> CylResult<f64> {
    Ok(scattering_amplitude_2d(big_k, q, phi, m_max)?.norm_sqr())
}

/// Sample the mode on a lattice.
pub fn field_grid_cyl(mode: &CylMode, grid: &GridSpec) -> CylResult<FieldGrid> {
    mode.validate()?;
    let m = *mode;
    FieldGrid::sample_azimuthal(*grid, mode.descriptor(), mode.m, move |rho, z| -> CylResult<Complex64> {
        Ok(m.amplitude * radial_p(&m, rho)? * Complex64::from_polar(1.0, m.k * z))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn radial_examples() {
        let m = CylMode::new(0, 0.0, 1.0, 0.0).unwrap();
        assert!((radial_p(&m, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        let m = CylMode::new(1, 0.0, 1.0, 0.0).unwrap();
        assert!((radial_p(&m, 1.0).unwrap() - 0.44005058574493352).abs() < 1e-15);
        // ν = 1 from K = 1, m = 0
        let m = CylMode::new(0, 0.0, 1.0, 1.0).unwrap();
        assert!((radial_p(&m, 2.0).unwrap() - 0.57672480775687339).abs() < 1e-15);
        // k shifts q: E = 5, k = 2 gives q = 1
        let m = CylMode::new(1, 2.0, 5.0, 0.0).unwrap();
        assert!((radial_p(&m, 1.0).unwrap() - 0.44005058574493352).abs() < 1e-15);
        assert!(CylMode::new(0, 2.0, 4.0, 0.0).is_err());
        assert!(CylMode::new(0, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn phase_shift_examples() {
        for m in -3..4 {
            assert_eq!(phase_shift(m, 0.0), 0.0);
        }
        assert!((phase_shift(0, 1.0) + FRAC_PI_2).abs() < 1e-15);
        assert!((phase_shift(2, 5.0) + FRAC_PI_2).abs() < 1e-15);
        // large |m| tail -πK/(4|m|)
        let d = phase_shift(1000, 3.0);
        assert!((d + PI * 3.0 / 4000.0).abs() < 1e-6 * d.abs());
        assert_eq!(phase_shift(-4, 2.0), phase_shift(4, 2.0));
    }

    #[test]
    fn plane_wave_reconstruction() {
        let c = plane_wave_coeffs(4);
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
        assert_eq!(c[1], Complex64::new(0.0, 2.0));
        assert_eq!(c[2], Complex64::new(-2.0, 0.0));
        let v = plane_wave_sum(1.0, 1.0, 0.0, 20).unwrap();
        assert!((v - Complex64::from_polar(1.0, 1.0)).norm() < 1e-12);
        let (q, rho, phi) = (1.0, 5.0, PI / 3.0);
        let v = plane_wave_sum(q, rho, phi, 40).unwrap();
        assert!((v - Complex64::from_polar(1.0, q * rho * phi.cos())).norm() < 1e-10);
        assert_eq!(plane_wave_sum(2.0, 0.0, 0.3, 0).unwrap(), Complex64::new(1.0, 0.0));
        // doubling m_max beyond qρ + 10 changes nothing at small qρ ...
        let a = plane_wave_sum(1.0, 1.0, 0.7, 11).unwrap();
        let b = plane_wave_sum(1.0, 1.0, 0.7, 22).unwrap();
        assert!((a - b).norm() < 1e-10);
        // ... but the Bessel tail at qρ = 20 needs a wider margin
        let a = plane_wave_sum(1.0, 20.0, 0.7, 30).unwrap();
        let b = plane_wave_sum(1.0, 20.0, 0.7, 60).unwrap();
        assert!((a - b).norm() > 1e-6);
        let a = plane_wave_sum(1.0, 20.0, 0.7, 45).unwrap();
        let b = plane_wave_sum(1.0, 20.0, 0.7, 90).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn scattering_state_limits() {
        // K = 0: pure plane wave
        let v = scattering_state_asymptotic(0.0, 1.0, 20.0, 0.4, 40).unwrap();
        assert!((v - Complex64::from_polar(1.0, 20.0 * 0.4f64.cos())).norm() < 1e-15);
        assert!(matches!(scattering_state_asymptotic(1.0, 1.0, 4.0, 0.0, 20), Err(CylError::AsymptoticZone(_))));
        // single m = 0 term: argument shifted by δ₀ = -(π/2)sqrt 3
        let s: f64 = 12.0;
        let v = scattering_state_asymptotic(3.0, 1.0, s, 0.0, 0).unwrap() - Complex64::from_polar(1.0, s);
        let pre = (2.0 / (PI * s)).sqrt();
        let want = pre * ((s - FRAC_PI_4 - FRAC_PI_2 * 3f64.sqrt()).cos() - (s - FRAC_PI_4).cos());
        assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn scattering_state_vs_exact_sum() {
        // The leading-order Bessel asymptote is poor for partial waves with
        // m² ≳ qρ, and the slow δ_m ~ 1/m tail keeps those waves relevant, so
        // the deviation only falls like 1/sqrt(qρ): about 0.25 at qρ = 50.
        let mut prev = f64::INFINITY;
        for s in [25.0, 50.0, 100.0, 200.0] {
            let mut worst: f64 = 0.0;
            for phi in [0.0, 0.7, 1.9, 3.0] {
                let m_max = (s as usize) + 12;
                let a = scattering_state_asymptotic(1.0, 1.0, s, phi, m_max).unwrap();
                let e = scattering_state_exact(1.0, 1.0, s, phi, m_max).unwrap();
                worst = worst.max((a - e).norm() / e.norm().max(0.1));
            }
            assert!(worst < prev, "qrho={s}: {worst} vs {prev}");
            let scaled = worst * s.sqrt();
            assert!((1.6..2.2).contains(&scaled), "qrho={s}: {scaled}");
            prev = worst;
        }
        assert!(prev < 0.15);
    }

    #[test]
    fn cross_section_shape() {
        // 2D optical theorem: Im[f(0) e^{iπ/4}] = sqrt(q/8π) σ_tot
        let (k, q) = (1.0, 2.0);
        let m_max = 200;
        let n = 4000;
        let mut tot = 0.0;
        for i in 0..n {
            let phi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            tot += differential_cross_section_2d(k, q, phi, m_max).unwrap() * 2.0 * PI / n as f64;
        }
        let f0 = scattering_amplitude_2d(k, q, 0.0, m_max).unwrap();
        let lhs = (f0 * Complex64::from_polar(1.0, FRAC_PI_4)).im;
        let rhs = (q / (8.0 * PI)).sqrt() * tot;
        assert!((lhs - rhs).abs() < 1e-3 * rhs, "{lhs} {rhs}");
        // |f|² depends on q only through the 1/q prefactor
        let a = differential_cross_section_2d(k, 1.0, 0.8, 100).unwrap();
        let b = differential_cross_section_2d(k, 4.0, 0.8, 100).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_single_valued() {
        let mode = CylMode::new(2, 0.5, 2.0, 1.0).unwrap();
        let g = GridSpec::with_step((0.5, 2.0), (-1.0, 1.0), 0.25, 16).unwrap();
        let f = field_grid_cyl(&mode, &g).unwrap();
        for i in 0..g.n_rho {
            for k in 0..g.n_z {
                for j in 0..g.n_phi {
                    let v = mode.value(g.rho(i), g.phi(j) + 2.0 * PI, g.z(k)).unwrap();
                    assert!((v - f.at(i, j, k)).norm() < 1e-13);
                }
            }
        }
        let mode = CylMode::new(0, 0.0, 2.0, 0.0).unwrap();
        let f = field_grid_cyl(&mode, &g).unwrap();
        assert!(f.values.iter().all(|v| v.im == 0.0));
    }

    proptest! {
        #[test]
        fn free_reduction(m in 0i32..6, s in 0.01f64..60.0) {
            let mode = CylMode::new(m, 0.0, 1.0, 0.0).unwrap();
            let a = radial_p(&mode, s).unwrap();
            let b = bessel_j(m as f64, s, &SeriesPolicy::default()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }

        #[test]
        fn phase_shift_properties(k in 0.01f64..50.0, m in 0i32..40) {
            let a = phase_shift(m, k);
            let b = phase_shift(m + 1, k);
            prop_assert!(a < 0.0 && b < 0.0);
            prop_assert!(b.abs() < a.abs());
        }
    }
}
