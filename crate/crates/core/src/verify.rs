//! Desk-scale checks of the estimate infrastructure: a random sampler for the
//! orthonormal Strichartz inequality, the discrete Hilbert–Schmidt identity, and the
//! weight integral behind the Hilbert–Schmidt bound.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_real, QuadOptions};
use crate::spectral::{weighted_schatten_norm_two_sided, DensityMatrixState, SpaceTimeField, TimeGrid, TorusGrid, C64};

pub const SAMPLE_RANKS: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzParams {
    /// Derivatives on the density side, ‖ρ‖_{L^p_t W^{s,q}_x}.
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Allow non-admissible exponents; the sample is then a trend probe.
    #[serde(default)]
    pub probe_sharpness: bool,
}

impl StrichartzParams {
    /// σ1 = σ2 = s, (p, q) = (2, 2), α = 2d/(d+1).
    pub fn energy_point(d: usize) -> Self {
        let s = (d as f64 / 2.0 - 1.0).max(0.0);
        let alpha = 2.0 * d as f64 / (d as f64 + 1.0);
        Self { s, p: 2.0, q: 2.0, alpha, sigma1: s, sigma2: s, probe_sharpness: false }
    }

    /// Violations of 2/p + d/q = d - σ1 - σ2 + s, 1/α ≥ 1/(dp) + 1/q and α < p.
    pub fn admissibility_violations(&self, d: usize) -> Vec<String> {
        let d = d as f64;
        let mut out = vec![];
        for (name, v) in [("p", self.p), ("q", self.q), ("alpha", self.alpha)] {
            if !(v > 1.0 && v.is_finite()) {
                out.push(format!("{name} = {v} is outside (1, ∞)"));
            }
        }
        if self.s < 0.0 || self.sigma1 < 0.0 || self.sigma2 < 0.0 {
            out.push("negative regularity index".into());
        }
        let lhs = 2.0 / self.p + d / self.q;
        let rhs = d - self.sigma1 - self.sigma2 + self.s;
        if (lhs - rhs).abs() > 1e-12 {
            out.push(format!("2/p + d/q = {lhs} but d - σ1 - σ2 + s = {rhs}"));
        }
        if 1.0 / self.alpha < 1.0 / (d * self.p) + 1.0 / self.q - 1e-12 {
            out.push(format!("1/α = {} < 1/(dp) + 1/q", 1.0 / self.alpha));
        }
        if self.alpha >= self.p {
            out.push(format!("α = {} is not below p = {}", self.alpha, self.p));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSample {
    pub d: usize,
    pub n: usize,
    pub params: StrichartzParams,
    pub admissible: bool,
    pub seed: u64,
    pub ranks: Vec<usize>,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// Low-rank factors γ = A B*.
#[derive(Debug, Clone)]
pub struct Factors {
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
}

impl Factors {
    pub fn draw<R: Rng>(m: usize, rank: usize, rng: &mut R) -> Self {
        let mut gauss = || C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
        let mut a = DMatrix::from_fn(m, rank, |_, _| gauss());
        let mut b = DMatrix::from_fn(m, rank, |_, _| gauss());
        let na = a.norm();
        let nb = b.norm();
        a /= C64::new(na, 0.0);
        b /= C64::new(nb, 0.0);
        Self { a, b }
    }

    pub fn gamma(&self, grid: &TorusGrid) -> DensityMatrixState {
        DensityMatrixState { grid: grid.clone(), matrix: &self.a * self.b.adjoint(), label: "sample".into() }
    }
}

fn lq_norm(grid: &TorusGrid, values: &[C64], q: f64) -> f64 {
    let cell = grid.volume() / grid.size() as f64;
    (values.iter().map(|v| v.norm().powf(q)).sum::<f64>() * cell).powf(1.0 / q)
}

/// ρ of e^{itΔ} A B* e^{-itΔ} at the grid points, through the columns of A and B.
pub fn evolved_density(grid: &TorusGrid, f: &Factors, t: f64) -> Vec<C64> {
    let k2 = grid.k2();
    let m = grid.size();
    let mut rho = vec![C64::new(0.0, 0.0); m];
    let evolve = |col: nalgebra::DVectorView<C64>| -> Vec<C64> {
        let c: Vec<C64> = col.iter().zip(k2).map(|(v, k)| v * C64::from_polar(1.0, -t * k)).collect();
        grid.from_coefficients(&c)
    };
    for r in 0..f.a.ncols() {
        let u = evolve(f.a.column(r));
        let v = evolve(f.b.column(r));
        for j in 0..m {
            rho[j] += u[j] * v[j].conj();
        }
    }
    let inv = 1.0 / grid.volume();
    rho.iter_mut().for_each(|v| *v *= inv);
    rho
}

/// ‖ρ‖_{L^p_t W^{s,q}_x} for the free evolution of A B* over the window.
pub fn density_norm(grid: &TorusGrid, time: TimeGrid, f: &Factors, params: &StrichartzParams) -> f64 {
    let b = grid.bracket();
    let mut acc = 0.0;
    for i in 0..time.len() {
        let mut rho = evolved_density(grid, f, time.time(i));
        if params.s != 0.0 {
            let mut c = grid.to_coefficients(&rho);
            c.iter_mut().zip(&b).for_each(|(v, w)| *v *= w.powf(params.s));
            rho = grid.from_coefficients(&c);
        }
        acc += time.trapezoid_weight(i) * time.dt * lq_norm(grid, &rho, params.q).powf(params.p);
    }
    acc.powf(1.0 / params.p)
}

/// Random-draw ratios ‖ρ‖_{L^p_t W^{s,q}_x} / ‖⟨∇⟩^{σ1} γ ⟨∇⟩^{σ2}‖_{S^α}.
pub fn strichartz_sample(
    grid: &TorusGrid,
    time: TimeGrid,
    params: &StrichartzParams,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateSample> {
    let violations = params.admissibility_violations(grid.dim());
    if !violations.is_empty() && !params.probe_sharpness {
        return Err(Error::InvalidInput(format!("non-admissible exponents: {}", violations.join("; "))));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let m = grid.size();
    let draws: Vec<Result<(usize, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let rank = SAMPLE_RANKS[i % SAMPLE_RANKS.len()].min(m);
            loop {
                let f = Factors::draw(m, rank, &mut rng);
                let den = weighted_schatten_norm_two_sided(&f.gamma(grid), params.sigma1, params.sigma2, params.alpha)?;
                if den > 0.0 {
                    return Ok((rank, density_norm(grid, time, &f, params) / den));
                }
            }
        })
        .collect();
    let mut ranks = Vec::with_capacity(n_samples);
    let mut ratios = Vec::with_capacity(n_samples);
    for d in draws {
        let (r, v) = d?;
        ranks.push(r);
        ratios.push(v);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(EstimateSample {
        d: grid.dim(),
        n: grid.n(),
        params: *params,
        admissible: violations.is_empty(),
        seed,
        ranks,
        ratios,
        max,
        mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub levels: Vec<EstimateSample>,
    /// max ratio at the finest level over max ratio at the coarsest.
    pub growth: f64,
    pub stable: bool,
}

/// The sampler at N, 2N, … (same box, window and seed). Stability means the maximal
/// ratio moves by less than a factor 2 between consecutive levels.
pub fn strichartz_ladder(
    grid: &TorusGrid,
    time: TimeGrid,
    params: &StrichartzParams,
    n_samples: usize,
    seed: u64,
    levels: usize,
) -> Result<LadderReport> {
    let mut out = Vec::with_capacity(levels);
    let mut g = grid.clone();
    for l in 0..levels.max(1) {
        if l > 0 {
            g = g.refined()?;
        }
        out.push(strichartz_sample(&g, time, params, n_samples, seed)?);
    }
    let stable = out.windows(2).all(|w| {
        let r = w[1].max / w[0].max;
        (0.5..=2.0).contains(&r)
    });
    let growth = out.last().unwrap().max / out[0].max;
    Ok(LadderReport { levels: out, growth, stable })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

fn negate(grid: &TorusGrid, i: usize) -> usize {
    let m = grid.mode(i);
    grid.flat_index(&[-m[0], -m[1], -m[2]][..grid.dim()])
}

/// Both sides of ‖⟨∇⟩^{-α1} Σ_t Δt e^{-itΔ} V(t) e^{itΔ} ⟨∇⟩^{-α2}‖²_{S²}
/// = Σ_{p,q} |Ṽ(p,q)|² ⟨p⟩^{-2α1} ⟨q⟩^{-2α2}; the left side goes through dense matrices.
pub fn hs_identity_check(v: &SpaceTimeField, alpha1: f64, alpha2: f64) -> HsIdentity {
    let grid = &v.grid;
    let time = v.time;
    let m = grid.size();
    let k2 = grid.k2();
    let coefs = v.to_coefficients();
    let neg: Vec<usize> = (0..m).map(|i| negate(grid, i)).collect();

    let mut sum = DMatrix::<C64>::zeros(m, m);
    for (i, c) in coefs.iter().enumerate() {
        let w = time.trapezoid_weight(i) * time.dt;
        let t = time.time(i);
        let vm = DMatrix::from_fn(m, m, |p, q| c[grid.wrap_add(p, neg[q])]);
        let e_plus = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, k2.iter().map(|k| C64::from_polar(1.0, t * k))));
        sum += (&e_plus * vm * e_plus.adjoint()) * C64::new(w, 0.0);
    }
    let b = grid.bracket();
    let left = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, b.iter().map(|x| C64::new(x.powf(-alpha1), 0.0))));
    let right = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, b.iter().map(|x| C64::new(x.powf(-alpha2), 0.0))));
    let lhs = (left * sum * right).norm_squared();

    let mut rhs = 0.0;
    for p in 0..m {
        for q in 0..m {
            let r = grid.wrap_add(p, neg[q]);
            let mut vt = C64::new(0.0, 0.0);
            for (i, c) in coefs.iter().enumerate() {
                let w = time.trapezoid_weight(i) * time.dt;
                vt += c[r] * C64::from_polar(w, time.time(i) * (k2[p] - k2[q]));
            }
            rhs += vt.norm_sqr() * b[p].powf(-2.0 * alpha1) * b[q].powf(-2.0 * alpha2);
        }
    }
    let scale = lhs.abs().max(rhs.abs());
    let rel_err = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    HsIdentity { lhs, rhs, rel_err }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRegime {
    BothBelow,
    MaxAtThreshold,
    MaxAbove,
}

/// The exponent α0 gained in each regime of (α1, α2) against (d-1)/2; in the borderline
/// regime any value below min(α1, α2) works and 0.99·min is used.
pub fn alpha0(d: usize, alpha1: f64, alpha2: f64) -> (f64, AlphaRegime) {
    let h = (d as f64 - 1.0) / 2.0;
    let hi = alpha1.max(alpha2);
    let lo = alpha1.min(alpha2);
    if (hi - h).abs() < 1e-12 {
        (0.99 * lo, AlphaRegime::MaxAtThreshold)
    } else if hi < h {
        (alpha1 + alpha2 - h, AlphaRegime::BothBelow)
    } else {
        (lo, AlphaRegime::MaxAbove)
    }
}

/// ∫_0^∞ s^{d-2} ⟨a, s⟩^{-2α1} ⟨b, s⟩^{-2α2} ds with ⟨a, s⟩ = (1 + a² + s²)^{1/2},
/// summed over dyadic shells until they decay or visibly stall.
pub fn weight_integral(d: usize, alpha1: f64, alpha2: f64, a: f64, b: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionError("the angular weight integral needs d ≥ 2".into()));
    }
    let f = |s: f64| {
        s.powi(d as i32 - 2) * (1.0 + a * a + s * s).powf(-alpha1) * (1.0 + b * b + s * s).powf(-alpha2)
    };
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_subdivisions: 400 };
    let start = (1.0 + a.abs().max(b.abs())).log2().ceil().max(0.0) as i32;
    let s0 = 2f64.powi(start);
    let mut total = integrate_real(f, 0.0, s0, &opts)?;
    let mut prev = total;
    let mut stalled = 0;
    for j in 0..4000 {
        let lo = s0 * 2f64.powi(j);
        let c = integrate_real(f, lo, 2.0 * lo, &opts)?;
        total += c;
        if c <= 1e-13 * total {
            return Ok(total);
        }
        if j >= 3 && c >= 0.999 * prev {
            stalled += 1;
            if stalled >= 8 {
                return Err(Error::IntegralDiverges(format!(
                    "dyadic shells stop decaying near s = {lo:.3e} (2α1 + 2α2 = {} against d - 1 = {})",
                    2.0 * (alpha1 + alpha2),
                    d - 1
                )));
            }
        } else {
            stalled = 0;
        }
        prev = c;
    }
    Err(Error::QuadratureNotConverged { what: "weight integral tail".into(), estimate: prev })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPoint {
    pub rho_prime: f64,
    pub r: f64,
    pub integral: f64,
    /// ⟨r⟩^{2α0} times the integral.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha0: f64,
    pub regime: AlphaRegime,
    pub points: Vec<WeightPoint>,
    /// Empirical constant: the largest weighted value on the probe grid.
    pub constant: f64,
}

pub fn default_probe() -> Vec<(f64, f64)> {
    let rhos = [0.0, 0.1, 1.0, 10.0, 100.0, 1e3];
    let rs = [0.25, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 300.0];
    rhos.iter().flat_map(|&p| rs.iter().map(move |&r| (p, r))).collect()
}

/// Checks that ⟨r⟩^{2α0} ∫ s^{d-2} ds / (⟨ρ'/r + r, s⟩^{2α1} ⟨ρ'/r - r, s⟩^{2α2}) stays bounded
/// over the probe points (ρ', r).
pub fn weight_sum_bound(d: usize, alpha1: f64, alpha2: f64, probe: &[(f64, f64)]) -> Result<WeightReport> {
    if alpha1 < 0.0 || alpha2 < 0.0 {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    if probe.iter().any(|&(p, r)| p < 0.0 || r <= 0.0) {
        return Err(Error::InvalidInput("probe points need ρ' ≥ 0 and r > 0".into()));
    }
    let (a0, regime) = alpha0(d, alpha1, alpha2);
    let mut points = Vec::with_capacity(probe.len());
    for &(rho, r) in probe {
        let integral = weight_integral(d, alpha1, alpha2, rho / r + r, rho / r - r)?;
        let weighted = (1.0 + r * r).powf(a0) * integral;
        points.push(WeightPoint { rho_prime: rho, r, integral, weighted });
    }
    let constant = points.iter().map(|p| p.weighted).fold(0.0, f64::max);
    Ok(WeightReport { d, alpha1, alpha2, alpha0: a0, regime, points, constant })
}
