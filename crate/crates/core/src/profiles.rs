//! Velocity profiles g(|ξ|), their Fourier transforms and marginals, and the
//! interaction potentials ŵ.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quad::{integrate, integrate_real, QuadOptions};
use crate::special::{bessel_j, sphere_area};

/// Number of intervals used when tabulating marginals.
const MARGINAL_INTERVALS: usize = 4096;
/// exp(-43) is below 1e-18: beyond this exponent a Gaussian factor is treated as zero.
const GAUSS_CUT: f64 = 43.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileFamily {
    Gaussian { beta: f64 },
    FermiDirac { beta: f64, mu: f64 },
    /// Two Gaussians centred at ±separation·e₁.
    TwoStream { beta: f64, separation: f64 },
    BallIndicator { mu: f64 },
    /// Radial samples g(r_i); zero beyond the last radius.
    TabulatedRadial { r: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileWarning {
    /// ∫ t |ĝ(t ω)| dt is infinite, so the Penrose scan hypotheses fail.
    MomentHypothesisFails,
}

#[derive(Debug)]
struct HermiteTable {
    step: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl HermiteTable {
    fn rho_max(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn eval(&self, rho: f64) -> f64 {
        let u = rho / self.step;
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let s = u - i as f64;
        let h = self.step;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.values[i] + h10 * h * self.derivs[i] + h01 * self.values[i + 1] + h11 * h * self.derivs[i + 1]
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VelocityProfile {
    dim: usize,
    amplitude: f64,
    family: ProfileFamily,
    #[serde(skip)]
    table: Option<Pchip>,
    #[serde(skip)]
    fourier_cache: OnceLock<HermiteTable>,
}

impl Clone for VelocityProfile {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            amplitude: self.amplitude,
            family: self.family.clone(),
            table: self.table.clone(),
            fourier_cache: OnceLock::new(),
        }
    }
}

impl PartialEq for VelocityProfile {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.amplitude == other.amplitude && self.family == other.family
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

impl VelocityProfile {
    pub fn new(dim: usize, amplitude: f64, family: ProfileFamily) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::DimensionError(format!("profiles are supported for d = 1, 2, 3 (got {dim})")));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::InvalidInput(format!("amplitude must be finite and non-negative, got {amplitude}")));
        }
        let mut table = None;
        match &family {
            ProfileFamily::Gaussian { beta } => check_positive("beta", *beta)?,
            ProfileFamily::FermiDirac { beta, mu } => {
                check_positive("beta", *beta)?;
                if !mu.is_finite() {
                    return Err(Error::InvalidInput("mu must be finite".into()));
                }
            }
            ProfileFamily::TwoStream { beta, separation } => {
                check_positive("beta", *beta)?;
                if !separation.is_finite() || *separation < 0.0 {
                    return Err(Error::InvalidInput("separation must be finite and non-negative".into()));
                }
            }
            ProfileFamily::BallIndicator { mu } => check_positive("mu", *mu)?,
            ProfileFamily::TabulatedRadial { r, values } => {
                if r.first().is_some_and(|&r0| r0 < 0.0) {
                    return Err(Error::InvalidInput("tabulated radii must be non-negative".into()));
                }
                if values.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidInput("tabulated profile values must be non-negative".into()));
                }
                table = Some(Pchip::new(r.clone(), values.clone())?);
            }
        }
        Ok(Self {
            dim,
            amplitude,
            family,
            table,
            fourier_cache: OnceLock::new(),
        })
    }

    pub fn gaussian(dim: usize, beta: f64, amplitude: f64) -> Result<Self> {
        Self::new(dim, amplitude, ProfileFamily::Gaussian { beta })
    }

    pub fn fermi_dirac(dim: usize, beta: f64, mu: f64, amplitude: f64) -> Result<Self> {
        Self::new(dim, amplitude, ProfileFamily::FermiDirac { beta, mu })
    }

    pub fn two_stream(dim: usize, beta: f64, separation: f64, amplitude: f64) -> Result<Self> {
        Self::new(dim, amplitude, ProfileFamily::TwoStream { beta, separation })
    }

    pub fn ball(dim: usize, mu: f64, amplitude: f64) -> Result<Self> {
        Self::new(dim, amplitude, ProfileFamily::BallIndicator { mu })
    }

    pub fn tabulated(dim: usize, r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(dim, 1.0, ProfileFamily::TabulatedRadial { r, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn family(&self) -> &ProfileFamily {
        &self.family
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.family, ProfileFamily::TwoStream { .. }) || self.dim == 1
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
            || matches!(&self.family, ProfileFamily::TabulatedRadial { values, .. } if values.iter().all(|v| *v == 0.0))
    }

    pub fn warnings(&self) -> Vec<ProfileWarning> {
        match self.family {
            // ĝ decays like ρ^{-(d+1)/2}, so ∫ ρ |ĝ| dρ diverges for d ≤ 3.
            ProfileFamily::BallIndicator { .. } if self.dim <= 3 => vec![ProfileWarning::MomentHypothesisFails],
            _ => vec![],
        }
    }

    /// g at a momentum vector of length `dim`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        match self.family {
            ProfileFamily::TwoStream { beta, separation } => {
                let rest: f64 = xi[1..].iter().map(|v| v * v).sum();
                let a = (xi[0] - separation).powi(2) + rest;
                let b = (xi[0] + separation).powi(2) + rest;
                self.amplitude * ((-beta * a).exp() + (-beta * b).exp())
            }
            _ => self.eval_radial(xi.iter().map(|v| v * v).sum::<f64>().sqrt()),
        }
    }

    /// g(r) for radial profiles. For a non-radial profile this evaluates along e₁.
    pub fn eval_radial(&self, r: f64) -> f64 {
        let a = self.amplitude;
        match &self.family {
            ProfileFamily::Gaussian { beta } => a * (-beta * r * r).exp(),
            ProfileFamily::FermiDirac { beta, mu } => {
                let x = beta * (r * r - mu);
                if x > 0.0 {
                    let e = (-x).exp();
                    a * e / (1.0 + e)
                } else {
                    a / (1.0 + x.exp())
                }
            }
            ProfileFamily::TwoStream { beta, separation } => {
                a * ((-beta * (r - separation).powi(2)).exp() + (-beta * (r + separation).powi(2)).exp())
            }
            ProfileFamily::BallIndicator { mu } => {
                if r * r <= *mu {
                    a
                } else {
                    0.0
                }
            }
            ProfileFamily::TabulatedRadial { .. } => {
                let t = self.table.as_ref().expect("tabulated profile has a table");
                if r > t.x_max() {
                    0.0
                } else {
                    (a * t.eval(r.max(t.x()[0]))).max(0.0)
                }
            }
        }
    }

    /// ∂_r g.
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        let a = self.amplitude;
        Ok(match &self.family {
            ProfileFamily::Gaussian { beta } => -2.0 * beta * r * a * (-beta * r * r).exp(),
            ProfileFamily::FermiDirac { beta, .. } => {
                let g = self.eval_radial(r) / a.max(f64::MIN_POSITIVE);
                -2.0 * beta * r * a * g * (1.0 - g)
            }
            ProfileFamily::TwoStream { beta, separation } => {
                if self.dim > 1 {
                    return Err(Error::NotRadial("two-stream profile in d ≥ 2".into()));
                }
                let (p, m) = (r - separation, r + separation);
                -2.0 * beta * a * (p * (-beta * p * p).exp() + m * (-beta * m * m).exp())
            }
            ProfileFamily::BallIndicator { mu } => {
                if (r * r - mu).abs() <= 1e-14 * mu {
                    return Err(Error::NotDifferentiable(r));
                }
                0.0
            }
            ProfileFamily::TabulatedRadial { .. } => {
                let t = self.table.as_ref().unwrap();
                let rmax = t.x_max();
                if r > rmax {
                    0.0
                } else if r == rmax && *t.y().last().unwrap() != 0.0 {
                    return Err(Error::NotDifferentiable(r));
                } else {
                    a * t.eval_with_derivative(r.max(t.x()[0])).1
                }
            }
        })
    }

    /// Radius beyond which g is negligible (exactly zero for compact families).
    pub fn support_radius(&self) -> f64 {
        match &self.family {
            ProfileFamily::Gaussian { beta } => (GAUSS_CUT / beta).sqrt(),
            ProfileFamily::FermiDirac { beta, mu } => (mu.max(0.0) + GAUSS_CUT / beta).sqrt(),
            ProfileFamily::TwoStream { beta, separation } => separation + (GAUSS_CUT / beta).sqrt(),
            ProfileFamily::BallIndicator { mu } => mu.sqrt(),
            ProfileFamily::TabulatedRadial { .. } => self.table.as_ref().unwrap().x_max(),
        }
    }

    fn radial_quad(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let r_max = self.support_radius();
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 400 };
        let pieces = 8;
        let mut s = 0.0;
        for k in 0..pieces {
            let a = r_max * k as f64 / pieces as f64;
            let b = r_max * (k + 1) as f64 / pieces as f64;
            s += integrate_real(&f, a, b, &opts)?;
        }
        Ok(s)
    }

    /// ∫ g(ξ) dξ over R^d.
    pub fn mass(&self) -> Result<f64> {
        let d = self.dim as f64;
        Ok(match self.family {
            ProfileFamily::Gaussian { beta } => self.amplitude * (PI / beta).powf(d / 2.0),
            ProfileFamily::TwoStream { beta, .. } => 2.0 * self.amplitude * (PI / beta).powf(d / 2.0),
            ProfileFamily::BallIndicator { mu } => self.amplitude * sphere_area(self.dim) / d * mu.powf(d / 2.0),
            _ => sphere_area(self.dim) * self.radial_quad(|r| self.eval_radial(r) * r.powi(self.dim as i32 - 1))?,
        })
    }

    /// Radius containing `fraction` of the mass (measured from the origin).
    pub fn momentum_radius(&self, fraction: f64) -> Result<f64> {
        if let ProfileFamily::TwoStream { beta, separation } = self.family {
            if self.dim > 1 {
                // Each stream is a Gaussian of width 1/sqrt(2β) around ±separation·e₁.
                let w = (-(1.0 - fraction).ln() / beta).sqrt();
                return Ok(separation + w);
            }
        }
        let total = self.mass()?;
        if total == 0.0 {
            return Ok(0.0);
        }
        let area = sphere_area(self.dim);
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 400 };
        let mass_to = |r: f64| -> Result<f64> {
            // For d = 1 radial profiles the full line doubles the half-line integral.
            integrate_real(|s| self.eval_radial(s) * s.powi(self.dim as i32 - 1), 0.0, r, &opts).map(|v| v * area)
        };
        let (mut lo, mut hi) = (0.0, self.support_radius());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mass_to(mid)? < fraction * total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// ĝ at a position vector x (unitary convention).
    pub fn fourier(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionError(format!("expected a {}-vector, got {}", self.dim, x.len())));
        }
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self.family {
            ProfileFamily::TwoStream { beta, separation } => {
                let d = self.dim as f64;
                let env = (2.0 * beta).powf(-d / 2.0) * (-rho * rho / (4.0 * beta)).exp();
                Ok(Complex64::new(self.amplitude * 2.0 * (separation * x[0]).cos() * env, 0.0))
            }
            _ => Ok(Complex64::new(self.fourier_radial(rho)?, 0.0)),
        }
    }

    /// ĝ(ρ) for a radial profile, or along e₁ for a two-stream profile.
    pub fn fourier_radial(&self, rho: f64) -> Result<f64> {
        let d = self.dim as f64;
        let a = self.amplitude;
        match self.family {
            ProfileFamily::Gaussian { beta } => {
                Ok(a * (2.0 * beta).powf(-d / 2.0) * (-rho * rho / (4.0 * beta)).exp())
            }
            ProfileFamily::TwoStream { beta, separation } => Ok(a
                * 2.0
                * (separation * rho).cos()
                * (2.0 * beta).powf(-d / 2.0)
                * (-rho * rho / (4.0 * beta)).exp()),
            ProfileFamily::BallIndicator { mu } => Ok(a * ball_fourier(self.dim, mu.sqrt(), rho)),
            _ => self.fourier_radial_quadrature(rho).map(|(v, _)| v),
        }
    }

    /// Radial transform and its ρ-derivative by direct quadrature.
    fn fourier_radial_quadrature(&self, rho: f64) -> Result<(f64, f64)> {
        let d = self.dim;
        let c = (2.0 * PI).powf(-(d as f64) / 2.0) * sphere_area(d);
        let r_max = self.support_radius();
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_subdivisions: 400 };
        let pieces = ((rho * r_max / PI).ceil() as usize + 1).max(8);
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..pieces {
            let a = r_max * k as f64 / pieces as f64;
            let b = r_max * (k + 1) as f64 / pieces as f64;
            let r = integrate(
                |r| {
                    let g = self.eval_radial(r) * r.powi(d as i32 - 1);
                    let z = rho * r;
                    let (j, dj) = radial_kernel(d, z);
                    Complex64::new(g * j, g * r * dj)
                },
                a,
                b,
                &opts,
            )?;
            s += r.value;
        }
        Ok((c * s.re, c * s.im))
    }

    /// ĝ along e₁ for use inside dispersion integrals: closed forms where available,
    /// otherwise a cubic Hermite table built once per profile.
    pub(crate) fn fourier_radial_fast(&self, rho: f64) -> Result<f64> {
        match self.family {
            ProfileFamily::FermiDirac { .. } | ProfileFamily::TabulatedRadial { .. } => {
                let t = self.fourier_table()?;
                if rho <= t.rho_max() {
                    Ok(t.eval(rho))
                } else if t.values.last().unwrap().abs() == 0.0 {
                    Ok(0.0)
                } else {
                    self.fourier_radial(rho)
                }
            }
            _ => self.fourier_radial(rho),
        }
    }

    fn fourier_table(&self) -> Result<&HermiteTable> {
        if let Some(t) = self.fourier_cache.get() {
            return Ok(t);
        }
        let r_max = self.support_radius();
        let step = 0.02 / r_max;
        let (v0, _) = self.fourier_radial_quadrature(0.0)?;
        let floor = 1e-15 * v0.abs().max(1e-300);
        let mut values = vec![];
        let mut derivs = vec![];
        let window = ((2.0 * PI / r_max) / step).ceil() as usize * 2;
        let cap = 400.0;
        let mut quiet = 0usize;
        let mut k = 0usize;
        loop {
            let rho = k as f64 * step;
            let (v, dv) = self.fourier_radial_quadrature(rho)?;
            values.push(v);
            derivs.push(dv);
            if v.abs() < floor && (dv * step).abs() < floor {
                quiet += 1;
            } else {
                quiet = 0;
            }
            k += 1;
            if quiet > window {
                // Decayed: pin the tail to zero so lookups beyond it return 0.
                *values.last_mut().unwrap() = 0.0;
                break;
            }
            if rho > cap {
                break;
            }
        }
        let _ = self.fourier_cache.set(HermiteTable { step, values, derivs });
        Ok(self.fourier_cache.get().unwrap())
    }

    /// sup over directions of ∫_0^∞ |ĝ(s ω)| ds.
    pub fn fourier_line_integral(&self) -> Result<f64> {
        match self.family {
            ProfileFamily::Gaussian { beta } | ProfileFamily::TwoStream { beta, .. } => {
                let d = self.dim as f64;
                let k = if matches!(self.family, ProfileFamily::TwoStream { .. }) { 2.0 } else { 1.0 };
                // |cos| ≤ 1 makes this an upper bound for the two-stream family.
                Ok(k * self.amplitude * (2.0 * beta).powf(-d / 2.0) * (PI * beta).sqrt())
            }
            _ => radial_abs_moment(self, 0),
        }
    }
}

/// Kernel j_d(z) of the radial Fourier transform and its derivative.
fn radial_kernel(d: usize, z: f64) -> (f64, f64) {
    match d {
        1 => (z.cos(), -z.sin()),
        2 => (bessel_j(0, z), -bessel_j(1, z)),
        _ => {
            if z.abs() < 1e-3 {
                let z2 = z * z;
                (1.0 - z2 / 6.0 + z2 * z2 / 120.0, -z / 3.0 + z * z2 / 30.0)
            } else {
                let (s, c) = z.sin_cos();
                (s / z, (z * c - s) / (z * z))
            }
        }
    }
}

fn ball_fourier(d: usize, radius: f64, rho: f64) -> f64 {
    let r = radius;
    let z = r * rho;
    match d {
        1 => {
            let sinc = if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
            (2.0 / PI).sqrt() * r * sinc
        }
        2 => {
            if z.abs() < 1e-4 {
                r * r / 2.0 * (1.0 - z * z / 8.0)
            } else {
                r * bessel_j(1, z) / rho
            }
        }
        _ => {
            // (2π)^{-3/2} 4π r³ (sin z - z cos z)/z³
            let f = if z.abs() < 1e-2 {
                let z2 = z * z;
                1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0
            } else {
                (z.sin() - z * z.cos()) / (z * z * z)
            };
            (2.0 * PI).powf(-1.5) * 4.0 * PI * r.powi(3) * f
        }
    }
}

/// ∫_0^∞ |ĝ(r)| r^k dr along e₁, integrated in dyadic shells.
///
/// Divergence is declared once shell contributions stop shrinking; a geometric tail
/// is extrapolated when the cap on the radius is reached.
pub fn radial_abs_moment(p: &VelocityProfile, k: i32) -> Result<f64> {
    if !p.is_radial() {
        return Err(Error::NotRadial("moment integrals need a radial profile".into()));
    }
    let osc = p.support_radius().max(1.0);
    let panel = (PI / (2.0 * osc)).min(0.5);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-10, max_subdivisions: 200 };
    let shell = |a: f64, b: f64| -> Result<f64> {
        let n = ((b - a) / panel).ceil() as usize;
        let mut s = 0.0;
        for i in 0..n {
            let x0 = a + (b - a) * i as f64 / n as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / n as f64;
            s += integrate(
                |r| Complex64::new(p.fourier_radial_fast(r).map(|v| v.abs()).unwrap_or(f64::NAN) * r.powi(k), 0.0),
                x0,
                x1,
                &opts,
            )?
            .value
            .re;
        }
        if s.is_nan() {
            return Err(Error::QuadratureNotConverged { what: "fourier transform in moment".into(), estimate: f64::NAN });
        }
        Ok(s)
    };
    let mut total = shell(0.0, 1.0)?;
    let mut prev = total;
    let mut growing = 0;
    let mut ratios: Vec<f64> = vec![];
    let max_k = 14;
    for j in 0..max_k {
        let a = (1u64 << j) as f64;
        let c = shell(a, 2.0 * a)?;
        total += c;
        let q = if prev > 0.0 { c / prev } else { 0.0 };
        ratios.push(q);
        if c <= 1e-13 * total.max(1e-300) {
            return Ok(total);
        }
        if j >= 5 && q >= 0.7 {
            growing += 1;
            if growing >= 3 {
                return Err(Error::IntegralDiverges(format!(
                    "∫|ĝ(r)| r^{k} dr: dyadic shell contributions stall (ratio {q:.3} near r = {})",
                    2.0 * a
                )));
            }
        } else {
            growing = 0;
        }
        prev = c;
    }
    let q = *ratios.last().unwrap();
    if q < 0.7 {
        Ok(total + prev * q / (1.0 - q))
    } else {
        Err(Error::IntegralDiverges(format!("∫|ĝ(r)| r^{k} dr: no decay by r = {}", (1u64 << max_k) as f64)))
    }
}

/// |S^{d-1}| ∫_0^∞ |ĝ(r)| r dr for radial g.
pub fn penrose_moment_integral(p: &VelocityProfile) -> Result<f64> {
    Ok(sphere_area(p.dim()) * radial_abs_moment(p, 1)?)
}

/// Marginal φ(r) = ∫_{R^{d-1}} g(√(r² + |s|²)) ds as a one-dimensional tabulated profile.
pub fn profile_marginal(p: &VelocityProfile) -> Result<VelocityProfile> {
    let d = p.dim();
    if d == 1 {
        return Err(Error::DimensionError("the marginal is defined for d ≥ 2".into()));
    }
    if !p.is_radial() {
        return Err(Error::NotRadial("marginal of a non-radial profile".into()));
    }
    let big_r = p.support_radius();
    let area = sphere_area(d - 1);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_subdivisions: 400 };
    let n = MARGINAL_INTERVALS;
    let mut r = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ri = big_r * i as f64 / n as f64;
        let s_max = (big_r * big_r - ri * ri).max(0.0).sqrt();
        let v = integrate_real(
            |s| p.eval_radial((ri * ri + s * s).sqrt()) * s.powi(d as i32 - 2),
            0.0,
            s_max,
            &opts,
        )?;
        r.push(ri);
        values.push((area * v).max(0.0));
    }
    VelocityProfile::tabulated(1, r, values)
}

/// Identity on d = 1 profiles, marginal otherwise.
pub fn profile_marginal_or_identity(p: &VelocityProfile) -> Result<VelocityProfile> {
    if p.dim() == 1 {
        Ok(p.clone())
    } else {
        profile_marginal(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialFamily {
    Delta { coupling: f64 },
    Gaussian { coupling: f64, width: f64 },
    Yukawa { coupling: f64, mass: f64 },
    /// Radial samples of ŵ; clamped to the last value beyond the table.
    TabulatedRadial { xi: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionPotential {
    dim: usize,
    family: PotentialFamily,
    #[serde(skip)]
    table: Option<Pchip>,
}

impl PartialEq for InteractionPotential {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.family == other.family
    }
}

impl InteractionPotential {
    pub fn new(dim: usize, family: PotentialFamily) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::DimensionError(format!("potentials are supported for d = 1, 2, 3 (got {dim})")));
        }
        let mut table = None;
        match &family {
            PotentialFamily::Delta { coupling } => {
                if !coupling.is_finite() {
                    return Err(Error::InvalidInput("coupling must be finite".into()));
                }
            }
            PotentialFamily::Gaussian { coupling, width } => {
                if !coupling.is_finite() {
                    return Err(Error::InvalidInput("coupling must be finite".into()));
                }
                check_positive("width", *width)?;
            }
            PotentialFamily::Yukawa { coupling, mass } => {
                if !coupling.is_finite() {
                    return Err(Error::InvalidInput("coupling must be finite".into()));
                }
                check_positive("mass", *mass)?;
            }
            PotentialFamily::TabulatedRadial { xi, values } => {
                table = Some(Pchip::new(xi.clone(), values.clone())?);
            }
        }
        Ok(Self { dim, family, table })
    }

    pub fn delta(dim: usize, coupling: f64) -> Result<Self> {
        Self::new(dim, PotentialFamily::Delta { coupling })
    }

    pub fn gaussian(dim: usize, coupling: f64, width: f64) -> Result<Self> {
        Self::new(dim, PotentialFamily::Gaussian { coupling, width })
    }

    pub fn yukawa(dim: usize, coupling: f64, mass: f64) -> Result<Self> {
        Self::new(dim, PotentialFamily::Yukawa { coupling, mass })
    }

    /// Delta potential whose transform has the given constant value.
    pub fn delta_with_fourier(dim: usize, what: f64) -> Result<Self> {
        Self::delta(dim, what * (2.0 * PI).powf(dim as f64 / 2.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    fn norm_const(&self) -> f64 {
        (2.0 * PI).powf(-(self.dim as f64) / 2.0)
    }

    /// ŵ at |ξ|.
    pub fn fourier_radial(&self, k: f64) -> f64 {
        let c0 = self.norm_const();
        match self.family {
            PotentialFamily::Delta { coupling } => coupling * c0,
            PotentialFamily::Gaussian { coupling, width } => coupling * c0 * (-width * width * k * k / 2.0).exp(),
            PotentialFamily::Yukawa { coupling, mass } => coupling * c0 / (k * k + mass * mass),
            PotentialFamily::TabulatedRadial { .. } => {
                let t = self.table.as_ref().expect("tabulated potential has a table");
                if k >= t.x_max() {
                    *t.y().last().unwrap()
                } else {
                    t.eval(k.max(t.x()[0]))
                }
            }
        }
    }

    pub fn fourier(&self, xi: &[f64]) -> f64 {
        self.fourier_radial(xi.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }

    /// sup |ŵ| over |ξ| ≥ k.
    pub fn sup_beyond(&self, k: f64) -> f64 {
        match &self.family {
            PotentialFamily::TabulatedRadial { xi, values } => {
                let mut m = self.fourier_radial(k).abs();
                for (x, v) in xi.iter().zip(values) {
                    if *x >= k {
                        m = m.max(v.abs());
                    }
                }
                m
            }
            _ => self.fourier_radial(k).abs(),
        }
    }

    /// ‖ŵ‖_∞.
    pub fn sup_norm(&self) -> f64 {
        self.sup_beyond(0.0)
    }

    /// ‖ŵ₋‖_∞ with ŵ₋ = max(-ŵ, 0).
    pub fn negative_sup_norm(&self) -> f64 {
        match &self.family {
            // Shape preservation puts the extrema of the interpolant at the nodes.
            PotentialFamily::TabulatedRadial { values, .. } => values.iter().fold(0.0, |m, v| m.max(-v)),
            _ => (-self.fourier_radial(0.0)).max(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_closed_forms() {
        let p = VelocityProfile::gaussian(3, 1.0, 1.0).unwrap();
        assert!((p.mass().unwrap() - PI.powf(1.5)).abs() < 1e-12);
        // (2π)^{d/2} ĝ(0) = ∫ g
        let g0 = p.fourier_radial(0.0).unwrap();
        assert!(((2.0 * PI).powf(1.5) * g0 - p.mass().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_transform_matches_closed_form_ball() {
        for d in 1..=3 {
            let ball = VelocityProfile::ball(d, 1.3, 0.7).unwrap();
            let table: Vec<f64> = (0..=2000).map(|i| i as f64 * 1.3f64.sqrt() / 2000.0).collect();
            let vals = vec![0.7; table.len()];
            // A flat table reproduces the ball exactly, so the quadrature route must agree.
            let tab = VelocityProfile::tabulated(d, table, vals).unwrap();
            for rho in [0.0, 0.4, 2.5, 7.0] {
                let a = ball.fourier_radial(rho).unwrap();
                let b = tab.fourier_radial(rho).unwrap();
                assert!((a - b).abs() < 1e-10, "d={d} rho={rho} {a} {b}");
            }
        }
    }

    #[test]
    fn fermi_dirac_mass_matches_transform_at_origin() {
        for d in 1..=3 {
            let p = VelocityProfile::fermi_dirac(d, 2.0, 1.0, 1.5).unwrap();
            let m = p.mass().unwrap();
            let g0 = p.fourier_radial(0.0).unwrap();
            assert!(((2.0 * PI).powf(d as f64 / 2.0) * g0 - m).abs() < 1e-10 * m);
        }
    }

    #[test]
    fn hermite_table_tracks_direct_transform() {
        let p = VelocityProfile::fermi_dirac(3, 1.0, 1.0, 1.0).unwrap();
        for rho in [0.0, 0.31, 1.7, 4.4, 9.1] {
            let a = p.fourier_radial(rho).unwrap();
            let b = p.fourier_radial_fast(rho).unwrap();
            assert!((a - b).abs() < 1e-9, "rho={rho} {a} {b}");
        }
    }

    #[test]
    fn moment_integrals() {
        // d=3 Gaussian β=1: |S²| ∫ r (2)^{-3/2} e^{-r²/4} dr = 4π · 2^{-3/2} · 2
        let p = VelocityProfile::gaussian(3, 1.0, 1.0).unwrap();
        let m = penrose_moment_integral(&p).unwrap();
        assert!((m - 4.0 * PI * 2f64.powf(-1.5) * 2.0).abs() < 1e-9);
        let ball = VelocityProfile::ball(3, 1.0, 1.0).unwrap();
        assert!(matches!(penrose_moment_integral(&ball), Err(Error::IntegralDiverges(_))));
        let ts = VelocityProfile::two_stream(2, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(penrose_moment_integral(&ts), Err(Error::NotRadial(_))));
    }

    #[test]
    fn marginal_of_gaussian_and_ball() {
        let p = VelocityProfile::gaussian(3, 2.0, 1.0).unwrap();
        let phi = profile_marginal(&p).unwrap();
        for r in [0.0f64, 0.3, 1.1, 2.0] {
            let exact = PI / 2.0 * (-2.0 * r * r).exp();
            assert!((phi.eval_radial(r) - exact).abs() < 1e-9, "r={r}");
        }
        let b = VelocityProfile::ball(3, 1.0, 1.0).unwrap();
        let phi = profile_marginal(&b).unwrap();
        for r in [0.0f64, 0.5, 0.9] {
            assert!((phi.eval_radial(r) - PI * (1.0 - r * r)).abs() < 1e-9);
        }
        assert!(matches!(profile_marginal(&VelocityProfile::gaussian(1, 1.0, 1.0).unwrap()), Err(Error::DimensionError(_))));
    }

    #[test]
    fn potentials() {
        let w = InteractionPotential::yukawa(3, 2.0, 0.5).unwrap();
        assert!((w.sup_norm() - 2.0 * (2.0 * PI).powf(-1.5) / 0.25).abs() < 1e-14);
        assert_eq!(w.negative_sup_norm(), 0.0);
        let w = InteractionPotential::gaussian(2, -1.0, 1.0).unwrap();
        assert!((w.negative_sup_norm() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let w = InteractionPotential::delta_with_fourier(1, 0.25).unwrap();
        assert!((w.fourier_radial(3.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ball_derivative_at_edge() {
        let b = VelocityProfile::ball(2, 4.0, 1.0).unwrap();
        assert!(matches!(b.radial_derivative(2.0), Err(Error::NotDifferentiable(_))));
        assert_eq!(b.radial_derivative(1.0).unwrap(), 0.0);
    }
}
