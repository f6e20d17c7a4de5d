//! The dispersion function M(τ, ω, ξ), Penrose-type stability scans, dispersion
//! roots and the one-dimensional reduced function m.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{
    penrose_moment_integral, InteractionPotential, ProfileFamily, ProfileWarning, VelocityProfile,
};
use crate::quad::{integrate_half_line, PanelOptions};
use crate::special::{erfcx, sphere_area};

/// Absolute tolerance for the half-line quadratures.
const M_ABS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMethod {
    /// Closed form through the Faddeeva function when the family allows it.
    #[default]
    Auto,
    Quadrature,
}

/// ∫_0^∞ e^{-a t² - z t} dt.
fn gauss_laplace(a: f64, z: Complex64) -> Complex64 {
    0.5 * (PI / a).sqrt() * erfcx(z / (2.0 * a.sqrt()))
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Closed form of M for the Gaussian and two-stream families.
fn m_closed_form(p: &VelocityProfile, tau: f64, omega: f64, xi: &[f64]) -> Option<Complex64> {
    let q = xi.iter().map(|v| v * v).sum::<f64>();
    if q == 0.0 {
        return Some(Complex64::new(0.0, 0.0));
    }
    let d = p.dim() as f64;
    let s = Complex64::new(tau, omega);
    let i = Complex64::i();
    match *p.family() {
        ProfileFamily::Gaussian { beta } => {
            let amp = p.amplitude() * (2.0 * beta).powf(-d / 2.0);
            let a = q / beta;
            let v = gauss_laplace(a, s - i * q) - gauss_laplace(a, s + i * q);
            Some(amp * v / (2.0 * i))
        }
        ProfileFamily::TwoStream { beta, separation } => {
            let amp = p.amplitude() * (2.0 * beta).powf(-d / 2.0);
            let a = q / beta;
            let b = 2.0 * separation * xi[0];
            let mut v = Complex64::new(0.0, 0.0);
            for sb in [b, -b] {
                v += gauss_laplace(a, s - i * (q + sb)) - gauss_laplace(a, s + i * (q - sb));
            }
            Some(amp * v / (2.0 * i))
        }
        _ => None,
    }
}

/// ĝ(r ξ̂) for a unit direction.
fn ghat_along(p: &VelocityProfile, dir: &[f64], r: f64) -> Result<f64> {
    match *p.family() {
        ProfileFamily::TwoStream { beta, separation } => {
            let d = p.dim() as f64;
            Ok(p.amplitude()
                * 2.0
                * (separation * r * dir[0]).cos()
                * (2.0 * beta).powf(-d / 2.0)
                * (-r * r / (4.0 * beta)).exp())
        }
        _ => p.fourier_radial_fast(r),
    }
}

fn oscillation_scale(p: &VelocityProfile) -> f64 {
    match *p.family() {
        ProfileFamily::Gaussian { .. } => 0.0,
        ProfileFamily::TwoStream { separation, .. } => separation,
        _ => p.support_radius(),
    }
}

/// M(τ, ω, ξ) by quadrature after the substitution t' = t|ξ|.
pub fn dispersion_m_quadrature(p: &VelocityProfile, tau: f64, omega: f64, xi: &[f64]) -> Result<Complex64> {
    check_args(p, tau, xi)?;
    let k = norm(xi);
    if k == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let dir: Vec<f64> = xi.iter().map(|v| v / k).collect();
    let s = Complex64::new(tau, omega) / k;
    let panel = PI / ((omega / k).abs() + k + 2.0 * oscillation_scale(p) + 1.0);
    let opts = PanelOptions { panel, abs_tol: M_ABS_TOL * k, max_panels: 200_000 };
    let mut failure = None;
    let f = |t: f64| -> Complex64 {
        match ghat_along(p, &dir, 2.0 * t) {
            Ok(g) => (-s * t).exp() * (t * k).sin() * g,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let tail_gauss;
    let tail: Option<&dyn Fn(f64) -> f64> = match *p.family() {
        ProfileFamily::Gaussian { beta } | ProfileFamily::TwoStream { beta, .. } => {
            let d = p.dim() as f64;
            let c = if matches!(p.family(), ProfileFamily::TwoStream { .. }) { 2.0 } else { 1.0 };
            let amp = c * p.amplitude() * (2.0 * beta).powf(-d / 2.0);
            // ∫_T^∞ e^{-t²/β} dt ≤ (β / 2T) e^{-T²/β}
            tail_gauss = move |t: f64| amp * beta / (2.0 * t) * (-t * t / beta).exp();
            Some(&tail_gauss)
        }
        _ => None,
    };
    let r = integrate_half_line(f, &opts, tail)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value / k)
}

fn check_args(p: &VelocityProfile, tau: f64, xi: &[f64]) -> Result<()> {
    if xi.len() != p.dim() {
        return Err(Error::DimensionError(format!("ξ has length {}, profile has d = {}", xi.len(), p.dim())));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("τ must be non-negative, got {tau}")));
    }
    Ok(())
}

/// M(τ, ω, ξ) = ∫_0^∞ e^{-tτ} e^{-itω} sin(t|ξ|²) ĝ(2tξ) dt.
pub fn dispersion_m(p: &VelocityProfile, tau: f64, omega: f64, xi: &[f64]) -> Result<Complex64> {
    dispersion_m_with(p, tau, omega, xi, DispersionMethod::Auto)
}

pub fn dispersion_m_with(
    p: &VelocityProfile,
    tau: f64,
    omega: f64,
    xi: &[f64],
    method: DispersionMethod,
) -> Result<Complex64> {
    check_args(p, tau, xi)?;
    if method == DispersionMethod::Auto {
        if let Some(v) = m_closed_form(p, tau, omega, xi) {
            return Ok(v);
        }
    }
    dispersion_m_quadrature(p, tau, omega, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub tau: f64,
    pub omega: f64,
    pub xi: f64,
    pub m: Complex64,
    pub penrose_value: Complex64,
}

/// 1 + 2 ŵ(ξ) M(τ, ω, ξ).
pub fn penrose_value(
    p: &VelocityProfile,
    w: &InteractionPotential,
    tau: f64,
    omega: f64,
    xi: &[f64],
    method: DispersionMethod,
) -> Result<Complex64> {
    let m = dispersion_m_with(p, tau, omega, xi, method)?;
    Ok(1.0 + 2.0 * w.fourier(xi) * m)
}

/// Samples along ξ = k e₁ for a range of ω.
pub fn dispersion_samples(
    p: &VelocityProfile,
    w: &InteractionPotential,
    tau: f64,
    omegas: &[f64],
    k: f64,
) -> Result<Vec<DispersionSample>> {
    let xi = along_e1(p.dim(), k);
    omegas
        .iter()
        .map(|&omega| {
            let m = dispersion_m(p, tau, omega, &xi)?;
            Ok(DispersionSample { tau, omega, xi: k, m, penrose_value: 1.0 + 2.0 * w.fourier(&xi) * m })
        })
        .collect()
}

fn along_e1(d: usize, k: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = k;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub tau_grid: Vec<f64>,
    pub n_omega: usize,
    pub n_xi: usize,
    /// Upper edge of the |ξ| range; derived from a tail certificate when absent.
    pub xi_max: Option<f64>,
    pub rel_tol: f64,
    pub max_refinements: usize,
    pub stability_threshold: f64,
    pub force: bool,
    pub method: DispersionMethod,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let mut tau_grid = vec![0.0];
        let n = 25;
        for i in 0..n {
            let e = -4.0 + 5.0 * i as f64 / (n - 1) as f64;
            tau_grid.push(10f64.powf(e));
        }
        Self {
            tau_grid,
            n_omega: 65,
            n_xi: 32,
            xi_max: None,
            rel_tol: 1e-2,
            max_refinements: 4,
            stability_threshold: 1e-3,
            force: false,
            method: DispersionMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub tau: f64,
    pub omega: f64,
    pub xi: f64,
    pub value: Complex64,
}

impl ScanPoint {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenroseReport {
    pub margin: f64,
    pub argmin: Option<ScanPoint>,
    pub stable: bool,
    /// Minimum over the τ = 0 samples.
    pub boundary_min: f64,
    /// Minimum over the τ > 0 samples.
    pub interior_min: f64,
    /// True when every ξ shell attains its minimum on τ = 0.
    pub boundary_dominated: bool,
    /// Shells whose minimum sits at τ > 0.
    pub interior_shells: Vec<f64>,
    pub xi_max: f64,
    /// Margins at successive refinement levels.
    pub refinement_margins: Vec<f64>,
    pub n_omega: usize,
    pub n_xi: usize,
    pub warnings: Vec<ProfileWarning>,
    #[serde(skip)]
    pub grid: Vec<ScanPoint>,
}

/// Smallest Ξ for which 2|ŵ(ξ) M| < 0.01 is guaranteed on |ξ| ≥ Ξ.
pub fn certified_xi_max(p: &VelocityProfile, w: &InteractionPotential) -> Result<f64> {
    let b = p.fourier_line_integral()?;
    // |2 ŵ M| ≤ sup_{|η|≥|ξ|} |ŵ(η)| · B / |ξ|
    let mut x = 100.0 * w.sup_norm() * b;
    for _ in 0..200 {
        let nx = 100.0 * w.sup_beyond(x) * b;
        if (x - nx).abs() <= 1e-9 * x {
            break;
        }
        x = nx;
    }
    let v = p.momentum_radius(0.99)?;
    Ok(x.max(2.0 * v).max(1e-3))
}

struct Grid {
    n_omega: usize,
    n_xi: usize,
}

fn scan_once(
    p: &VelocityProfile,
    w: &InteractionPotential,
    cfg: &ScanConfig,
    xi_max: f64,
    v_max: f64,
    grid: &Grid,
) -> Result<Vec<ScanPoint>> {
    let d = p.dim();
    let mut out = Vec::with_capacity(cfg.tau_grid.len() * grid.n_omega * grid.n_xi);
    for &tau in &cfg.tau_grid {
        for j in 0..grid.n_omega {
            for l in 1..=grid.n_xi {
                let k = xi_max * l as f64 / grid.n_xi as f64;
                let big = 4.0 * (k * k + k * v_max);
                let omega = if grid.n_omega == 1 {
                    0.0
                } else {
                    -big + 2.0 * big * j as f64 / (grid.n_omega - 1) as f64
                };
                let xi = along_e1(d, k);
                let value = penrose_value(p, w, tau, omega, &xi, cfg.method)?;
                out.push(ScanPoint { tau, omega, xi: k, value });
            }
        }
    }
    Ok(out)
}

fn argmin(points: &[ScanPoint]) -> Option<ScanPoint> {
    // Sequential reduction over the canonical (τ, ω, ξ) order keeps the first of
    // several equal minima, which is the lexicographically smallest.
    let mut best: Option<ScanPoint> = None;
    for pt in points {
        if best.is_none_or(|b| pt.abs() < b.abs()) {
            best = Some(*pt);
        }
    }
    best
}

/// Grid estimate of inf |1 + 2ŵ(ξ) M(τ, ω, ξ)| over τ ≥ 0, ω ∈ R, ξ along e₁.
pub fn penrose_margin(p: &VelocityProfile, w: &InteractionPotential, cfg: &ScanConfig) -> Result<PenroseReport> {
    if p.dim() != w.dim() {
        return Err(Error::DimensionError("profile and potential dimensions differ".into()));
    }
    let warnings = p.warnings();
    if warnings.contains(&ProfileWarning::MomentHypothesisFails) && !cfg.force {
        return Err(Error::HypothesisFailed("∫ t |ĝ(tω)| dt diverges for this profile".into()));
    }
    if cfg.tau_grid.is_empty() || cfg.n_xi == 0 || cfg.n_omega == 0 {
        return Err(Error::InvalidInput("scan grids must be non-empty".into()));
    }
    if w.is_zero() || p.is_zero() {
        return Ok(PenroseReport {
            margin: 1.0,
            argmin: None,
            stable: true,
            boundary_min: 1.0,
            interior_min: 1.0,
            boundary_dominated: true,
            interior_shells: vec![],
            xi_max: 0.0,
            refinement_margins: vec![1.0],
            n_omega: 0,
            n_xi: 0,
            warnings,
            grid: vec![],
        });
    }
    let xi_max = match cfg.xi_max {
        Some(x) => x,
        None => certified_xi_max(p, w)?,
    };
    let v_max = p.momentum_radius(0.99)?;
    let mut margins = vec![];
    let mut grid = Grid { n_omega: cfg.n_omega, n_xi: cfg.n_xi };
    let mut points = scan_once(p, w, cfg, xi_max, v_max, &grid)?;
    margins.push(argmin(&points).map_or(1.0, |b| b.abs()));
    loop {
        let level = margins.len();
        if level > cfg.max_refinements {
            return Err(Error::ScanTooCoarse { margins });
        }
        let finer = Grid { n_omega: 2 * (grid.n_omega - 1).max(1) + 1, n_xi: 2 * grid.n_xi };
        let next = scan_once(p, w, cfg, xi_max, v_max, &finer)?;
        let m = argmin(&next).map_or(1.0, |b| b.abs());
        let prev = *margins.last().unwrap();
        margins.push(m);
        points = next;
        grid = finer;
        if (m - prev).abs() <= cfg.rel_tol * m.max(cfg.stability_threshold) {
            break;
        }
    }
    let best = argmin(&points);
    let margin = best.map_or(1.0, |b| b.abs());
    let boundary_min = points.iter().filter(|q| q.tau == 0.0).map(|q| q.abs()).fold(f64::INFINITY, f64::min);
    let interior_min = points.iter().filter(|q| q.tau > 0.0).map(|q| q.abs()).fold(f64::INFINITY, f64::min);
    let mut interior_shells = vec![];
    for l in 1..=grid.n_xi {
        let k = xi_max * l as f64 / grid.n_xi as f64;
        let shell: Vec<ScanPoint> = points.iter().copied().filter(|q| q.xi == k).collect();
        if let Some(b) = argmin(&shell) {
            if b.tau > 0.0 && shell.iter().filter(|q| q.tau == 0.0).all(|q| q.abs() > b.abs()) {
                interior_shells.push(k);
            }
        }
    }
    Ok(PenroseReport {
        margin,
        argmin: best,
        stable: margin > cfg.stability_threshold,
        boundary_min,
        interior_min,
        boundary_dominated: interior_shells.is_empty(),
        interior_shells,
        xi_max,
        refinement_margins: margins,
        n_omega: grid.n_omega,
        n_xi: grid.n_xi,
        warnings,
        grid: points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoot {
    pub tau: f64,
    pub omega: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100, fd_step: 1e-6 }
    }
}

/// Damped Newton search for 1 + 2ŵ(ξ) M(τ, ω, ξ) = 0 in the closed half plane τ ≥ 0.
pub fn dispersion_root(
    p: &VelocityProfile,
    w: &InteractionPotential,
    xi: &[f64],
    guess: (f64, f64),
    opts: &RootOptions,
) -> Result<DispersionRoot> {
    let f = |tau: f64, omega: f64| penrose_value(p, w, tau, omega, xi, DispersionMethod::Auto);
    let (mut tau, mut omega) = guess;
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput("initial τ must be non-negative".into()));
    }
    let mut val = f(tau, omega)?;
    let h = opts.fd_step;
    for it in 0..opts.max_iter {
        if val.norm() <= opts.tol {
            return Ok(DispersionRoot { tau, omega, residual: val.norm(), iterations: it });
        }
        let d_tau = if tau >= h {
            (f(tau + h, omega)? - f(tau - h, omega)?) / (2.0 * h)
        } else {
            (f(tau + h, omega)? - val) / h
        };
        let d_omega = (f(tau, omega + h)? - f(tau, omega - h)?) / (2.0 * h);
        let det = d_tau.re * d_omega.im - d_omega.re * d_tau.im;
        let scale = d_tau.norm() * d_omega.norm();
        if !(det.abs() > 1e-14 * scale) || scale == 0.0 {
            if it == 0 {
                return Err(Error::JacobianSingular { tau, omega });
            }
            return Err(Error::NoRoot(format!("Jacobian degenerate at τ = {tau:.4e}, ω = {omega:.4e}")));
        }
        let dt = -(d_omega.im * val.re - d_omega.re * val.im) / det;
        let dw = -(-d_tau.im * val.re + d_tau.re * val.im) / det;
        let mut lambda = 1.0;
        loop {
            let nt = tau + lambda * dt;
            let nw = omega + lambda * dw;
            if nt >= 0.0 {
                let nv = f(nt, nw)?;
                if nv.norm() < val.norm() {
                    tau = nt;
                    omega = nw;
                    val = nv;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(Error::NoRoot(format!(
                    "Newton stalled at τ = {tau:.4e}, ω = {omega:.4e} with |F| = {:.3e}",
                    val.norm()
                )));
            }
        }
    }
    if val.norm() <= opts.tol {
        return Ok(DispersionRoot { tau, omega, residual: val.norm(), iterations: opts.max_iter });
    }
    Err(Error::NoRoot(format!("no convergence in {} iterations (|F| = {:.3e})", opts.max_iter, val.norm())))
}

/// m(τ, ω, ξ) = ∫_0^∞ e^{-tτ} e^{-itω} (sin(t|ξ|)/|ξ|) ĝ(t) dt for a one-dimensional profile.
pub fn reduced_m(p: &VelocityProfile, tau: f64, omega: f64, xi: f64) -> Result<Complex64> {
    if p.dim() != 1 {
        return Err(Error::DimensionError("the reduced function needs a one-dimensional profile".into()));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("τ must be non-negative, got {tau}")));
    }
    let k = xi.abs();
    let s = Complex64::new(tau, omega);
    let panel = PI / (omega.abs() + k + 2.0 * oscillation_scale(p) + 1.0);
    let opts = PanelOptions { panel, abs_tol: M_ABS_TOL, max_panels: 200_000 };
    let mut failure = None;
    let f = |t: f64| -> Complex64 {
        let kern = if k == 0.0 { t } else { (t * k).sin() / k };
        match p.fourier_radial_fast(t) {
            Ok(g) => (-s * t).exp() * kern * g,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let r = integrate_half_line(f, &opts, None)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

/// Im m(0, ω, ξ) for ω > 0 from the profile itself.
pub fn im_m_boundary(p: &VelocityProfile, omega: f64, xi: f64) -> Result<f64> {
    if p.dim() != 1 {
        return Err(Error::DimensionError("boundary formula is one-dimensional".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidInput("ω must be positive".into()));
    }
    let k = xi.abs();
    if k == 0.0 {
        return Ok((PI / 2.0).sqrt() * p.radial_derivative(omega)?);
    }
    Ok(PI.sqrt() / (2.0 * 2f64.sqrt() * k) * (p.eval_radial(omega + k) - p.eval_radial((omega - k).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    /// ‖ŵ‖_∞ ∫_0^∞ |ĝ(r)| r dr / 2; condition 1 asks for < 1.
    pub cond1_ratio: f64,
    pub cond1: Verdict,
    pub monotone: Verdict,
    pub derivative_continuous: bool,
    /// |S^{d-1}| ∫ |∂_ρ ĝ(ρ)| ρ dρ, if finite.
    pub gradient_moment: Option<f64>,
    /// ‖ŵ₋‖_∞ ∫_0^∞ |ĝ(r)| r dr / 2; condition 2 asks for < 1.
    pub negative_ratio: f64,
    pub cond2: Verdict,
}

/// Checks the two sufficient conditions for Penrose stability of a radial profile.
pub fn penrose_sufficient_check(p: &VelocityProfile, w: &InteractionPotential) -> Result<SufficiencyReport> {
    if !p.is_radial() {
        return Err(Error::NotRadial("sufficient conditions need a radial profile".into()));
    }
    let area = sphere_area(p.dim());
    let moment = match penrose_moment_integral(p) {
        Ok(v) => Some(v / area),
        Err(Error::IntegralDiverges(_)) => None,
        Err(e) => return Err(e),
    };
    let cond1_ratio = moment.map_or(f64::INFINITY, |m| w.sup_norm() * m / 2.0);
    let negative_ratio = moment.map_or(f64::INFINITY, |m| w.negative_sup_norm() * m / 2.0);
    let cond1 = if cond1_ratio < 1.0 { Verdict::Holds } else { Verdict::Fails };

    let mut derivative_continuous = true;
    let monotone = if p.dim() >= 3 {
        Verdict::Holds
    } else {
        monotone_check(p, &mut derivative_continuous)
    };
    if p.dim() >= 3 {
        monotone_check(p, &mut derivative_continuous);
    }

    let gradient_moment = {
        let g = |r: f64| -> f64 {
            let h = 1e-5 * r.max(1.0);
            let a = p.fourier_radial_fast(r + h).unwrap_or(f64::NAN);
            let b = p.fourier_radial_fast((r - h).abs()).unwrap_or(f64::NAN);
            ((a - b) / (2.0 * h)).abs()
        };
        match shell_integral(p, |r| g(r) * r) {
            Ok(v) => Some(area * v),
            Err(_) => None,
        }
    };

    let cond2 = if !derivative_continuous || gradient_moment.is_none() || negative_ratio >= 1.0 {
        Verdict::Fails
    } else {
        monotone
    };
    Ok(SufficiencyReport {
        cond1_ratio,
        cond1,
        monotone,
        derivative_continuous,
        gradient_moment,
        negative_ratio,
        cond2,
    })
}

fn monotone_check(p: &VelocityProfile, continuous: &mut bool) -> Verdict {
    let r_max = p.support_radius();
    let probes: Vec<f64> = match p.family() {
        ProfileFamily::TabulatedRadial { r, .. } => {
            if r.len() < 16 {
                return Verdict::Indeterminate;
            }
            let mut v = vec![];
            for w in r.windows(2) {
                v.push(w[0]);
                v.push(0.5 * (w[0] + w[1]));
            }
            v.push(*r.last().unwrap());
            v
        }
        _ => (1..=512).map(|i| r_max * i as f64 / 512.0).collect(),
    };
    let mut ok = true;
    for r in probes {
        if r <= 0.0 {
            continue;
        }
        match p.radial_derivative(r) {
            Ok(d) => {
                if p.eval_radial(r) > 1e-200 && !(d < 0.0) {
                    ok = false;
                }
            }
            Err(_) => {
                *continuous = false;
                ok = false;
            }
        }
    }
    if let ProfileFamily::BallIndicator { .. } = p.family() {
        *continuous = false;
        ok = false;
    }
    if ok {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// ∫_0^∞ f(r) dr for non-negative f that decays at least like ĝ, by dyadic shells.
fn shell_integral(p: &VelocityProfile, f: impl Fn(f64) -> f64) -> Result<f64> {
    use crate::quad::{integrate_real, QuadOptions};
    let osc = p.support_radius().max(1.0);
    let panel = (PI / (2.0 * osc)).min(0.5);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-10, max_subdivisions: 200 };
    let shell = |a: f64, b: f64| -> Result<f64> {
        let n = ((b - a) / panel).ceil() as usize;
        let mut s = 0.0;
        for i in 0..n {
            let x0 = a + (b - a) * i as f64 / n as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / n as f64;
            s += integrate_real(&f, x0, x1, &opts)?;
        }
        Ok(s)
    };
    let mut total = shell(0.0, 1.0)?;
    let mut prev = total;
    let mut stalls = 0;
    for j in 0..14 {
        let a = (1u64 << j) as f64;
        let c = shell(a, 2.0 * a)?;
        total += c;
        if c <= 1e-13 * total.max(1e-300) {
            return Ok(total);
        }
        if j >= 5 && c >= 0.7 * prev {
            stalls += 1;
            if stalls >= 3 {
                return Err(Error::IntegralDiverges("shell contributions stall".into()));
            }
        } else {
            stalls = 0;
        }
        prev = c;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature() {
        let cases: Vec<(VelocityProfile, Vec<f64>)> = vec![
            (VelocityProfile::gaussian(1, 1.0, 1.0).unwrap(), vec![0.7]),
            (VelocityProfile::gaussian(3, 0.5, 2.0).unwrap(), vec![0.3, -0.4, 1.1]),
            (VelocityProfile::two_stream(1, 2.0, 1.5, 1.0).unwrap(), vec![0.8]),
            (VelocityProfile::two_stream(2, 1.0, 1.0, 0.5).unwrap(), vec![0.6, 0.4]),
        ];
        for (p, xi) in cases {
            for (tau, omega) in [(0.0, 0.0), (0.0, 1.3), (0.2, -2.0), (1.5, 0.7), (0.01, 6.0)] {
                let a = dispersion_m(&p, tau, omega, &xi).unwrap();
                let b = dispersion_m_quadrature(&p, tau, omega, &xi).unwrap();
                assert!((a - b).norm() < 1e-9, "{:?} τ={tau} ω={omega}: {a} vs {b}", p.family());
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let p = VelocityProfile::fermi_dirac(1, 2.0, 1.0, 1.0).unwrap();
        let a = dispersion_m(&p, 0.1, 0.9, &[0.5]).unwrap();
        let b = dispersion_m(&p, 0.1, -0.9, &[0.5]).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn ball_at_boundary_does_not_converge() {
        let p = VelocityProfile::ball(1, 1.0, 1.0).unwrap();
        let r = dispersion_m(&p, 0.0, 0.5, &[0.7]);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })), "{r:?}");
    }

    #[test]
    fn reduced_relation_in_one_dimension() {
        let p = VelocityProfile::gaussian(1, 1.3, 1.0).unwrap();
        for (tau, omega, xi) in [(0.0, 0.4, 0.9), (0.3, -1.0, 0.5), (0.0, 2.0, 1.7)] {
            let big = dispersion_m(&p, tau, omega, &[xi]).unwrap();
            let small = reduced_m(&p, tau / (2.0 * xi), omega / (2.0 * xi), xi / 2.0).unwrap();
            assert!((big - small / 4.0).norm() < 1e-9);
        }
    }

    #[test]
    fn boundary_imaginary_part() {
        let p = VelocityProfile::gaussian(1, 1.0, 1.0).unwrap();
        let v = im_m_boundary(&p, 1.0, 0.0).unwrap();
        assert!((v + (2.0 * PI).sqrt() * (-1.0f64).exp()).abs() < 1e-14);
        for (omega, xi) in [(0.7, 0.0), (1.2, 0.4), (0.3, 1.5)] {
            let q = reduced_m(&p, 0.0, omega, xi).unwrap();
            let c = im_m_boundary(&p, omega, xi).unwrap();
            assert!((q.im - c).abs() < 1e-8, "ω={omega} ξ={xi}: {} vs {c}", q.im);
        }
    }
}
