//! Linear response kernel, the Volterra operator 𝓛 and its inverse, and growth-rate fits.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::free_conjugate;
use crate::error::{Error, Result};
use crate::profiles::{InteractionPotential, VelocityProfile};
use crate::spectral::{density_coefficients, DensityMatrixState, DensityRule, SpaceTimeField, TimeGrid, TorusGrid, C64};

/// K(t, ξ) = 2 ŵ(ξ) sin(t|ξ|²) ĝ(2tξ).
pub fn kernel_eval(p: &VelocityProfile, w: &InteractionPotential, t: f64, xi: &[f64]) -> Result<f64> {
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    if k2 == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let x: Vec<f64> = xi.iter().map(|v| 2.0 * t * v).collect();
    Ok(2.0 * w.fourier(xi) * (t * k2).sin() * p.fourier(&x)?.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    /// The whole-space kernel sampled at lattice momenta.
    #[default]
    Continuum,
    /// The torus kernel, consistent with the discrete density and propagation.
    Lattice(DensityRule),
}

/// Kernel samples K(t_i, q) for every lattice mode and every time of a grid.
#[derive(Debug, Clone)]
pub struct ResponseKernel {
    pub grid: TorusGrid,
    pub time: TimeGrid,
    pub source: KernelSource,
    samples: Vec<Arc<Vec<C64>>>,
}

fn int_norm2(m: [i64; 3]) -> i64 {
    m.iter().map(|v| v * v).sum()
}

impl ResponseKernel {
    pub fn build(
        p: &VelocityProfile,
        w: &InteractionPotential,
        grid: &TorusGrid,
        time: TimeGrid,
        source: KernelSource,
    ) -> Result<Self> {
        if p.dim() != grid.dim() || w.dim() != grid.dim() {
            return Err(Error::DimensionError("profile, potential and grid must share d".into()));
        }
        let samples = match source {
            KernelSource::Continuum => Self::continuum(p, w, grid, time)?,
            KernelSource::Lattice(rule) => Self::lattice(p, w, grid, time, rule),
        };
        Ok(Self { grid: grid.clone(), time, source, samples })
    }

    fn continuum(p: &VelocityProfile, w: &InteractionPotential, grid: &TorusGrid, time: TimeGrid) -> Result<Vec<Arc<Vec<C64>>>> {
        let radial = p.is_radial();
        let mut shells: HashMap<i64, Arc<Vec<C64>>> = HashMap::new();
        let mut out = Vec::with_capacity(grid.size());
        for q in 0..grid.size() {
            let key = int_norm2(grid.mode(q));
            if radial {
                if let Some(s) = shells.get(&key) {
                    out.push(s.clone());
                    continue;
                }
            }
            let xi = grid.momentum(q);
            let mut v = Vec::with_capacity(time.len());
            for i in 0..time.len() {
                v.push(C64::new(kernel_eval(p, w, time.time(i), &xi)?, 0.0));
            }
            let v = Arc::new(v);
            if radial {
                shells.insert(key, v.clone());
            }
            out.push(v);
        }
        Ok(out)
    }

    fn lattice(
        p: &VelocityProfile,
        w: &InteractionPotential,
        grid: &TorusGrid,
        time: TimeGrid,
        rule: DensityRule,
    ) -> Vec<Arc<Vec<C64>>> {
        let m = grid.size();
        let g: Vec<f64> = (0..m).map(|k| p.eval(&grid.momentum(k))).collect();
        let unit = (2.0 * PI / grid.length()).powi(2);
        let pref = (2.0 * PI).powf(grid.dim() as f64 / 2.0) / grid.volume();
        let mut out = Vec::with_capacity(m);
        for q in 0..m {
            // Group the sum by the integer frequency |n_{k+q}|² - |n_k|².
            let mut amps: HashMap<i64, f64> = HashMap::new();
            for k in 0..m {
                if rule == DensityRule::Truncated && !grid.sum_in_box(k, q) {
                    continue;
                }
                let kq = grid.wrap_add(k, q);
                let a = g[k] - g[kq];
                if a != 0.0 {
                    *amps.entry(int_norm2(grid.mode(kq)) - int_norm2(grid.mode(k))).or_insert(0.0) += a;
                }
            }
            let mut terms: Vec<(i64, f64)> = amps.into_iter().collect();
            terms.sort_by_key(|t| t.0);
            let wq = w.fourier(&grid.momentum(q));
            let c = C64::new(0.0, pref * wq);
            let v: Vec<C64> = (0..time.len())
                .map(|i| {
                    let s = time.time(i);
                    let sum: C64 = terms.iter().map(|(f, a)| C64::from_polar(*a, -s * unit * *f as f64)).sum();
                    c * sum
                })
                .collect();
            out.push(Arc::new(v));
        }
        out
    }

    /// Kernel samples K(t_i, q) for mode `q`.
    pub fn mode(&self, q: usize) -> &[C64] {
        &self.samples[q]
    }

    /// Builds a kernel from explicit per-mode samples.
    pub fn from_samples(grid: &TorusGrid, time: TimeGrid, samples: Vec<Vec<C64>>) -> Result<Self> {
        if samples.len() != grid.size() || samples.iter().any(|s| s.len() != time.len()) {
            return Err(Error::DimensionError("kernel samples do not match the grids".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            time,
            source: KernelSource::Continuum,
            samples: samples.into_iter().map(Arc::new).collect(),
        })
    }
}

/// (𝓛f)(t_i) = ∫_0^{t_i} K(t_i - τ) f(τ) dτ by the trapezoid rule.
pub fn volterra_apply(kernel: &[C64], dt: f64, f: &[C64]) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 1..n {
        let mut s = 0.5 * (kernel[i] * f[0] + kernel[0] * f[i]);
        for j in 1..i {
            s += kernel[i - j] * f[j];
        }
        out[i] = s * dt;
    }
    out
}

/// Solves f + 𝓛f = h with the same quadrature as [`volterra_apply`].
pub fn volterra_solve(kernel: &[C64], dt: f64, h: &[C64]) -> Result<Vec<C64>> {
    let n = h.len();
    let mut f = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(f);
    }
    f[0] = h[0];
    let diag = 1.0 + 0.5 * dt * kernel[0];
    if diag.norm() < 1e-8 {
        return Err(Error::NearSingularStep(diag.norm()));
    }
    for i in 1..n {
        let mut s = 0.5 * kernel[i] * f[0];
        for j in 1..i {
            s += kernel[i - j] * f[j];
        }
        f[i] = (h[i] - dt * s) / diag;
    }
    Ok(f)
}

fn check_field(k: &ResponseKernel, f: &SpaceTimeField) -> Result<()> {
    if f.grid != k.grid || f.time.n_steps != k.time.n_steps || (f.time.dt - k.time.dt).abs() > 1e-14 * k.time.dt {
        return Err(Error::DimensionError("field and kernel grids differ".into()));
    }
    Ok(())
}

fn per_mode(
    k: &ResponseKernel,
    f: &SpaceTimeField,
    op: impl Fn(&[C64], &[C64]) -> Result<Vec<C64>>,
) -> Result<SpaceTimeField> {
    check_field(k, f)?;
    let coef = f.to_coefficients();
    let nt = f.time.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); f.grid.size()]; nt];
    let mut series = vec![C64::new(0.0, 0.0); nt];
    for q in 0..f.grid.size() {
        for i in 0..nt {
            series[i] = coef[i][q];
        }
        let r = op(k.mode(q), &series)?;
        for i in 0..nt {
            out[i][q] = r[i];
        }
    }
    Ok(SpaceTimeField::from_coefficient_slices(&f.grid, f.time, &out))
}

/// 𝓛ϱ mode by mode.
pub fn apply_response(k: &ResponseKernel, rho: &SpaceTimeField) -> Result<SpaceTimeField> {
    let dt = k.time.dt;
    per_mode(k, rho, |kern, s| Ok(volterra_apply(kern, dt, s)))
}

/// (1 + 𝓛)^{-1} h mode by mode.
pub fn invert_response(k: &ResponseKernel, h: &SpaceTimeField) -> Result<SpaceTimeField> {
    let dt = k.time.dt;
    per_mode(k, h, |kern, s| volterra_solve(kern, dt, s))
}

/// Density of the freely evolving perturbation, ρ[e^{itΔ} Q e^{-itΔ}](t).
pub fn free_density(q_in: &DensityMatrixState, time: TimeGrid, rule: DensityRule) -> SpaceTimeField {
    let mut slices = Vec::with_capacity(time.len());
    for i in 0..time.len() {
        let qt = free_conjugate(q_in, time.time(i));
        slices.push(density_coefficients(&qt, rule));
    }
    SpaceTimeField::from_coefficient_slices(&q_in.grid, time, &slices)
}

/// Linearised density ϱ = (1 + 𝓛)^{-1} ρ[e^{itΔ} Q_in e^{-itΔ}].
pub fn linear_solve(q_in: &DensityMatrixState, k: &ResponseKernel) -> Result<SpaceTimeField> {
    let rule = match k.source {
        KernelSource::Lattice(r) => r,
        KernelSource::Continuum => DensityRule::Collocation,
    };
    invert_response(k, &free_density(q_in, k.time, rule))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start_fraction: f64,
    pub end_fraction: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { start_fraction: 0.5, end_fraction: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub rate: f64,
    /// -d arg f / dt, so that e^{-iωt} has frequency ω.
    pub frequency: f64,
    pub r2: f64,
    pub points: usize,
}

fn line_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let slope = sty / stt;
    let icpt = my - slope * mt;
    let ss_res: f64 = t.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, icpt, r2)
}

/// Least-squares fit of log|f| and of the unwrapped phase over a time window.
pub fn growth_rate_fit(series: &[C64], time: TimeGrid, window: FitWindow) -> Result<GrowthFit> {
    let n = series.len();
    let i0 = (window.start_fraction * (n - 1) as f64).round() as usize;
    let i1 = ((window.end_fraction * (n - 1) as f64).round() as usize).min(n - 1);
    if i1 < i0 || i1 - i0 + 1 < 32 {
        return Err(Error::InvalidInput("growth fit needs at least 32 samples in the window".into()));
    }
    let mut t = vec![];
    let mut logs = vec![];
    let mut phase = vec![];
    let mut prev: Option<f64> = None;
    for i in i0..=i1 {
        let v = series[i];
        if v.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("series vanishes at sample {i}")));
        }
        t.push(time.time(i));
        logs.push(v.norm().ln());
        let mut a = v.arg();
        if let Some(p) = prev {
            a += (2.0 * PI) * ((p - a) / (2.0 * PI)).round();
        }
        prev = Some(a);
        phase.push(a);
    }
    let (rate, _, r2) = line_fit(&t, &logs);
    let (ph, _, _) = line_fit(&t, &phase);
    Ok(GrowthFit { rate, frequency: -ph, r2, points: t.len() })
}
