//! Parabolic separated solutions `ψ = H(η) Ξ(ξ) e^{imφ}` with
//! `η = r + z`, `ξ = r - z`, in the same scaled units as the cylindrical
//! solver. The regular solution is
//! `h₊(η) = η^{ν/2} e^{-i√E η/2} 1F1(a; b; i√E η)`,
//! `a = (1 + ν)/2 - iC/(4√E)`, `b = 1 + ν`, `ν = sqrt(m² + K)`,
//! and `Ξ` is the same function with `C → -C`.
//!
//! For real `C`, Kummer's transform gives `h₊ = conj(h₊)`: the separated
//! functions are real even though they are assembled from complex pieces.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{eta_xi, FieldGrid, GridError, GridSpec, ModeDescriptor};
use crate::quadrature::{integrate, QuadratureError};
use crate::specfun::{gamma_arg, kummer_1f1, ln_gamma, SeriesPolicy, SpecfunError, ASYMPTOTIC_SWITCH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sqrt(E) * coordinate = {0} is below the asymptotic zone (needs > {ASYMPTOTIC_SWITCH})")]
    AsymptoticZone(f64),
    #[error("point (eta = {eta}, xi = {xi}) is too close to the axis for the asymptotic form")]
    AxisProximity { eta: f64, xi: f64 },
    #[error("stencil step {h} too large at coordinate {at} (needs h <= coordinate/10)")]
    Step { h: f64, at: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Special(#[from] SpecfunError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type ParResult<T> = Result<T, ParError>;

/// Below this coordinate the separated functions are replaced by their
/// leading power `t^{ν/2}`.
pub const AXIS_LIMIT: f64 = 1e-8;

pub fn policy() -> SeriesPolicy {
    SeriesPolicy { rel_tol: 1e-15, ..SeriesPolicy::default() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParMode {
    pub m: i32,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    /// Separation constant; enters the `η` equation as `+C` and the `ξ` one as `-C`.
    #[serde(rename = "C")]
    pub c: f64,
    pub amplitude: Complex64,
}

impl ParMode {
    pub fn new(m: i32, e: f64, big_k: f64, c: f64) -> ParResult<Self> {
        let mode = ParMode { m, e, big_k, c, amplitude: Complex64::new(1.0, 0.0) };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> ParResult<()> {
        if !(self.e > 0.0) || !self.e.is_finite() {
            return Err(ParError::InvalidParameter(format!("E = {} must be > 0", self.e)));
        }
        if !(self.big_k >= 0.0) || !self.big_k.is_finite() {
            return Err(ParError::InvalidParameter(format!("K = {} must be >= 0", self.big_k)));
        }
        if !self.c.is_finite() || !self.amplitude.re.is_finite() || !self.amplitude.im.is_finite() {
            return Err(ParError::InvalidParameter(format!("non-finite mode {self:?}")));
        }
        Ok(())
    }

    pub fn nu(&self) -> f64 {
        let m = self.m as f64;
        (m * m + self.big_k).sqrt()
    }

    /// Coefficient of the logarithmic phase, `C/(4√E)`.
    pub fn gamma(&self) -> f64 {
        self.c / (4.0 * self.e.sqrt())
    }

    pub fn a(&self) -> Complex64 {
        Complex64::new(0.5 * (1.0 + self.nu()), -self.gamma())
    }

    pub fn b(&self) -> f64 {
        1.0 + self.nu()
    }

    /// The same mode with `C → -C`: its `h₊` is this mode's `Ξ`.
    pub fn flipped(&self) -> Self {
        ParMode { c: -self.c, ..*self }
    }

    pub fn descriptor(&self, shift: f64) -> ModeDescriptor {
        ModeDescriptor::Parabolic { m: self.m, e: self.e, big_k: self.big_k, c: self.c, shift }
    }

    /// `ψ(ρ, φ, z) = amplitude · H(η) Ξ(ξ) e^{imφ}`.
    pub fn value(&self, rho: f64, phi: f64, z: f64) -> ParResult<Complex64> {
        Ok(self.amplitude * separated_product(self, rho, z)? * Complex64::from_polar(1.0, self.m as f64 * phi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicPoint {
    pub eta: f64,
    pub xi: f64,
    pub phi: f64,
}

pub fn to_parabolic(rho: f64, z: f64) -> ParabolicPoint {
    let (eta, xi) = eta_xi(rho.abs(), z);
    ParabolicPoint { eta, xi, phi: 0.0 }
}

pub fn from_parabolic(p: ParabolicPoint) -> (f64, f64) {
    ((p.eta * p.xi).sqrt(), 0.5 * (p.eta - p.xi))
}

/// Regular separated solution of the `η` equation.
pub fn h_plus(mode: &ParMode, eta: f64) -> ParResult<Complex64> {
    mode.validate()?;
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(ParError::InvalidParameter(format!("eta = {eta}")));
    }
    let half_nu = 0.5 * mode.nu();
    if eta < AXIS_LIMIT {
        return Ok(Complex64::new(if half_nu == 0.0 { 1.0 } else { eta.powf(half_nu) }, 0.0));
    }
    let x = mode.e.sqrt() * eta;
    let f = kummer_1f1(mode.a(), Complex64::new(mode.b(), 0.0), Complex64::new(0.0, x), &policy())?;
    Ok(eta.powf(half_nu) * Complex64::from_polar(1.0, -0.5 * x) * f)
}

/// Regular separated solution of the `ξ` equation (`h₊` with `C → -C`).
pub fn xi_solution(mode: &ParMode, xi: f64) -> ParResult<Complex64> {
    h_plus(&mode.flipped(), xi)
}

/// `H(η) Ξ(ξ)` at a cylindrical point, without amplitude or azimuthal factor.
pub fn separated_product(mode: &ParMode, rho: f64, z: f64) -> ParResult<Complex64> {
    let p = to_parabolic(rho, z);
    Ok(h_plus(mode, p.eta)? * xi_solution(mode, p.xi)?)
}

/// Absolute residual of a differential equation together with the size of
/// its largest term, so that `scaled()` is a relative measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeResidual {
    pub residual: f64,
    pub scale: f64,
}

impl OdeResidual {
    pub fn scaled(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

fn stencil<F: Fn(f64) -> ParResult<Complex64>>(f: F, t: f64, h: f64) -> ParResult<[Complex64; 3]> {
    if !(h > 0.0) || h > t / 10.0 {
        return Err(ParError::Step { h, at: t });
    }
    let (lo, mid, hi) = (f(t - h)?, f(t)?, f(t + h)?);
    Ok([mid, (hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h)])
}

fn residual_of(terms: &[Complex64]) -> OdeResidual {
    let sum: Complex64 = terms.iter().sum();
    OdeResidual { residual: sum.norm(), scale: terms.iter().map(|t| t.norm()).fold(0.0, f64::max) }
}

/// `4η²H″ + 4ηH′ + (Eη² - c_eq η - (m² + K))H` with `H = h₊` of `mode` and
/// derivatives from central differences; `c_eq` is the constant written into
/// the equation (normally `mode.c`).
pub fn ode_residual_h_with(mode: &ParMode, c_eq: f64, eta: f64, h_step: f64) -> ParResult<OdeResidual> {
    let [v, d1, d2] = stencil(|t| h_plus(mode, t), eta, h_step)?;
    let nu2 = mode.nu().powi(2);
    Ok(residual_of(&[
        4.0 * eta * eta * d2,
        4.0 * eta * d1,
        mode.e * eta * eta * v,
        -c_eq * eta * v,
        -nu2 * v,
    ]))
}

pub fn ode_residual_h(mode: &ParMode, eta: f64, h_step: f64) -> ParResult<OdeResidual> {
    ode_residual_h_with(mode, mode.c, eta, h_step)
}

/// Same equation for `Ξ(ξ)`, in which the constant enters as `-C`.
pub fn ode_residual_xi(mode: &ParMode, xi: f64, h_step: f64) -> ParResult<OdeResidual> {
    ode_residual_h_with(&mode.flipped(), -mode.c, xi, h_step)
}

/// `[4ηH″ + 4H′ + EηH - (m² + K)H/η] / H`, which the separated `η` equation
/// pins to `+C`. Evaluate away from zeros of `H`.
pub fn separation_bracket_eta(mode: &ParMode, eta: f64, h_step: f64) -> ParResult<f64> {
    let [v, d1, d2] = stencil(|t| h_plus(mode, t), eta, h_step)?;
    let nu2 = mode.nu().powi(2);
    Ok(((4.0 * eta * d2 + 4.0 * d1 + mode.e * eta * v - nu2 * v / eta) / v).re)
}

/// The `ξ` counterpart, which equals `-C`.
pub fn separation_bracket_xi(mode: &ParMode, xi: f64, h_step: f64) -> ParResult<f64> {
    separation_bracket_eta(&mode.flipped(), xi, h_step)
}

/// `U₁(η) = sqrt(η) h₊(η)`; `U₂(ξ)` is `coulomb_form_u(&mode.flipped(), ξ)`.
pub fn coulomb_form_u(mode: &ParMode, t: f64) -> ParResult<Complex64> {
    Ok(t.sqrt() * h_plus(mode, t)?)
}

/// Residual of `-U″ + (c_eq/4t)U + ((m² + K - 1)/4t²)U - (E/4)U` for
/// `U = coulomb_form_u(mode, ·)`.
pub fn coulomb_residual(mode: &ParMode, c_eq: f64, t: f64, h_step: f64) -> ParResult<OdeResidual> {
    let [v, _, d2] = stencil(|s| coulomb_form_u(mode, s), t, h_step)?;
    let nu2 = mode.nu().powi(2);
    Ok(residual_of(&[-d2, c_eq / (4.0 * t) * v, (nu2 - 1.0) / (4.0 * t * t) * v, -0.25 * mode.e * v]))
}

fn check_zone(x: f64) -> ParResult<()> {
    if !(x > ASYMPTOTIC_SWITCH) {
        return Err(ParError::AsymptoticZone(x));
    }
    Ok(())
}

/// Argument of the large-`η` cosine,
/// `x/2 - γ ln x - arg Γ(a) - πν/4 - π/4` with `x = √E η`, `γ = C/(4√E)`.
pub fn asymptotic_phase(mode: &ParMode, eta: f64) -> ParResult<f64> {
    let x = mode.e.sqrt() * eta;
    Ok(0.5 * x - mode.gamma() * x.ln() - gamma_arg(mode.a())? - 0.25 * PI * mode.nu() - FRAC_PI_4)
}

/// `ln[2 Γ(b) e^{πγ/2} / |Γ(a)|]`, the constant in front of the asymptotic cosine.
fn ln_asymptotic_amplitude(mode: &ParMode) -> ParResult<f64> {
    let lg_b = ln_gamma(Complex64::new(mode.b(), 0.0))?.re;
    let lg_a = ln_gamma(mode.a())?.re;
    Ok(2f64.ln() + lg_b + 0.5 * PI * mode.gamma() - lg_a)
}

/// Leading large-`η` form of `h₊`:
/// `η^{ν/2} · 2Γ(b) e^{πγ/2} x^{-(ν+1)/2} / |Γ(a)| · cos(asymptotic_phase)`.
pub fn h_plus_asymptotic(mode: &ParMode, eta: f64) -> ParResult<Complex64> {
    mode.validate()?;
    let x = mode.e.sqrt() * eta;
    check_zone(x)?;
    let nu = mode.nu();
    let ln_env = ln_asymptotic_amplitude(mode)? + 0.5 * nu * eta.ln() - 0.5 * (nu + 1.0) * x.ln();
    Ok(Complex64::new(ln_env.exp() * asymptotic_phase(mode, eta)?.cos(), 0.0))
}

/// Far-field form of `H(η)Ξ(ξ)` away from the axis:
/// `(N/2ρ){cos[√E r - γ ln(η/ξ) - π(ν+1)/2] + cos[√E z - γ ln(Eρ²) - 2 arg Γ(a)]}`
/// with `N = 4Γ(b)² E^{-(ν+1)/2} / |Γ(a)|²`. This is exactly the product of
/// the two single-coordinate forms.
pub fn product_asymptotic(mode: &ParMode, point: ParabolicPoint) -> ParResult<Complex64> {
    mode.validate()?;
    let k = mode.e.sqrt();
    let (eta, xi) = (point.eta, point.xi);
    if !(k * eta > ASYMPTOTIC_SWITCH && k * xi > ASYMPTOTIC_SWITCH) {
        return Err(ParError::AxisProximity { eta, xi });
    }
    let nu = mode.nu();
    let g = mode.gamma();
    let (rho, z) = from_parabolic(point);
    let r = 0.5 * (eta + xi);
    let lg_b = ln_gamma(Complex64::new(mode.b(), 0.0))?.re;
    let lg_a = ln_gamma(mode.a())?.re;
    let n = (2.0 * (2f64.ln() + lg_b - lg_a) - 0.5 * (nu + 1.0) * mode.e.ln()).exp();
    let first = (k * r - g * (eta / xi).ln() - 0.5 * PI * (nu + 1.0)).cos();
    let second = (k * z - g * (mode.e * rho * rho).ln() - 2.0 * gamma_arg(mode.a())?).cos();
    Ok(Complex64::new(n / (2.0 * rho) * (first + second), 0.0))
}

/// The mode translated by `a_shift` along `z`, evaluated at `(ρ, φ, z)`.
pub fn translate_solution(mode: &ParMode, a_shift: f64, rho: f64, phi: f64, z: f64) -> ParResult<Complex64> {
    if !(rho > 0.0) {
        return Err(ParError::InvalidParameter(format!("rho = {rho} must be > 0")));
    }
    mode.value(rho, phi, z - a_shift)
}

/// Mode whose solution at `(αη, αξ)` is proportional to this one at
/// `(η, ξ)`: `E → E/α²`, `C → C/α`.
pub fn rescale_mode(mode: &ParMode, alpha: f64) -> ParResult<ParMode> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(ParError::InvalidParameter(format!("alpha = {alpha}")));
    }
    Ok(ParMode { e: mode.e / (alpha * alpha), c: mode.c / alpha, ..*mode })
}

/// Sample the (optionally translated) mode on a lattice.
pub fn field_grid_par(mode: &ParMode, grid: &GridSpec, shift: f64) -> ParResult<FieldGrid> {
    mode.validate()?;
    if !shift.is_finite() {
        return Err(ParError::InvalidParameter(format!("shift = {shift}")));
    }
    let md = *mode;
    FieldGrid::sample_azimuthal(*grid, mode.descriptor(shift), mode.m, move |rho, z| -> ParResult<Complex64> {
        Ok(md.amplitude * separated_product(&md, rho, z - shift)?)
    })
}

/// Density `(1/η + 1/ξ)|U₁(η) U₂(ξ)|²` of the normalization integral.
pub fn normalization_integrand(mode: &ParMode, eta: f64, xi: f64) -> ParResult<f64> {
    let u1 = coulomb_form_u(mode, eta)?.norm_sqr();
    let u2 = coulomb_form_u(&mode.flipped(), xi)?.norm_sqr();
    Ok((1.0 / eta + 1.0 / xi) * u1 * u2)
}

/// Integral of [`normalization_integrand`] over the square `[ε, Λ]²`. The
/// density splits as `|H|²|U₂|² + |U₁|²|Ξ|²`, so this is a sum of products
/// of one-dimensional integrals.
pub fn normalization_slab(mode: &ParMode, eps: f64, lambda: f64) -> ParResult<f64> {
    if !(eps > 0.0 && lambda > eps && lambda.is_finite()) {
        return Err(ParError::InvalidParameter(format!("slab [{eps}, {lambda}]")));
    }
    let one_d = |md: ParMode, weight_t: bool| -> ParResult<f64> {
        let f = |t: f64| match h_plus(&md, t) {
            Ok(v) => v.norm_sqr() * if weight_t { t } else { 1.0 },
            Err(_) => f64::NAN,
        };
        Ok(integrate(f, eps, lambda, 1e-10, 0.0)?)
    };
    let flip = mode.flipped();
    Ok(one_d(*mode, false)? * one_d(flip, true)? + one_d(*mode, true)? * one_d(flip, false)?)
}
