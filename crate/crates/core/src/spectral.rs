//! Periodic grids, density matrices in the plane-wave basis, densities, fields and
//! the norms used throughout.
//!
//! Modes are stored in FFT-natural order along each axis (0, 1, …, N/2-1, -N/2, …, -1)
//! and flattened row-major with the last axis fastest. The Nyquist index -N/2 is kept
//! as is and never symmetrised.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{InteractionPotential, VelocityProfile};

pub type C64 = Complex64;

/// Largest N^d accepted; density matrices are dense.
pub const MAX_MODES: usize = 4096;

#[derive(Clone)]
struct Ffts {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    length: f64,
    centered: Vec<[i64; 3]>,
    k2: Vec<f64>,
    ffts: Ffts,
    add_table: Arc<OnceLock<Vec<u32>>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid").field("dim", &self.dim).field("n", &self.n).field("length", &self.length).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

fn centered_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::DimensionError(format!("grids exist for d = 1, 2, 3 (got {dim})")));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("N must be even and at least 2 (got {n})")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("L must be positive (got {length})")));
        }
        let total = n.pow(dim as u32);
        if total > MAX_MODES {
            return Err(Error::DimensionError(format!("N^d = {total} exceeds the {MAX_MODES}-mode limit")));
        }
        let mut centered = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let scale = 2.0 * PI / length;
        for flat in 0..total {
            let mut idx = [0i64; 3];
            let mut rem = flat;
            for a in (0..dim).rev() {
                idx[a] = centered_index(rem % n, n);
                rem /= n;
            }
            k2.push(idx.iter().map(|&c| (c as f64 * scale).powi(2)).sum());
            centered.push(idx);
        }
        let mut planner = FftPlanner::new();
        let ffts = Ffts { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) };
        Ok(Self { dim, n, length, centered, k2, ffts, add_table: Arc::new(OnceLock::new()) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of modes N^d.
    pub fn size(&self) -> usize {
        self.centered.len()
    }

    /// L^d.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Integer mode vector of a flat index (unused trailing axes are zero).
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        self.centered[flat]
    }

    pub fn momentum(&self, flat: usize) -> Vec<f64> {
        let s = 2.0 * PI / self.length;
        self.centered[flat][..self.dim].iter().map(|&c| c as f64 * s).collect()
    }

    /// |k|² for every mode.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn flat_index(&self, mode: &[i64]) -> usize {
        let n = self.n as i64;
        mode[..self.dim].iter().fold(0usize, |acc, &m| acc * self.n + m.rem_euclid(n) as usize)
    }

    /// Flat index of [a + b] with wrap-around.
    pub fn wrap_add(&self, a: usize, b: usize) -> usize {
        self.add_table()[a * self.size() + b] as usize
    }

    fn add_table(&self) -> &Vec<u32> {
        self.add_table.get_or_init(|| {
            let m = self.size();
            let mut t = Vec::with_capacity(m * m);
            for a in 0..m {
                for b in 0..m {
                    let (ma, mb) = (self.centered[a], self.centered[b]);
                    let s = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
                    t.push(self.flat_index(&s) as u32);
                }
            }
            t
        })
    }

    /// Whether a + b stays inside the centred box without wrapping.
    pub fn sum_in_box(&self, a: usize, b: usize) -> bool {
        let h = self.n as i64 / 2;
        (0..self.dim).all(|i| {
            let s = self.centered[a][i] + self.centered[b][i];
            (-h..h).contains(&s)
        })
    }

    /// Position of grid point `flat`.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut rem = flat;
        let h = self.length / self.n as f64;
        for a in (0..self.dim).rev() {
            out[a] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        out
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.ffts.inverse } else { &self.ffts.forward };
        let total = self.size();
        debug_assert_eq!(data.len(), total);
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![C64::new(0.0, 0.0); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    fft.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * n;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    for (i, l) in line.iter_mut().enumerate() {
                        *l = data[base + off + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, l) in line.iter().enumerate() {
                        data[base + off + i * stride] = *l;
                    }
                }
            }
        }
    }

    /// Unnormalised forward DFT (e^{-ikx}).
    pub fn fft_forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    /// Unnormalised inverse DFT (e^{+ikx}).
    pub fn fft_inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    /// Coefficients c_q with f(x_j) = Σ_q c_q e^{iqx_j}.
    pub fn to_coefficients(&self, values: &[C64]) -> Vec<C64> {
        let mut c = values.to_vec();
        self.fft_forward(&mut c);
        let s = 1.0 / self.size() as f64;
        c.iter_mut().for_each(|v| *v *= s);
        c
    }

    pub fn from_coefficients(&self, coef: &[C64]) -> Vec<C64> {
        let mut v = coef.to_vec();
        self.fft_inverse(&mut v);
        v
    }

    /// Japanese bracket ⟨k⟩ = (1 + |k|²)^{1/2} for every mode.
    pub fn bracket(&self) -> Vec<f64> {
        self.k2.iter().map(|k| (1.0 + k).sqrt()).collect()
    }

    /// Same box, twice the modes along each axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, 2 * self.n, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive (got {dt})")));
        }
        Ok(Self { dt, n_steps })
    }

    pub fn from_final(t_final: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidInput("need at least one time step".into()));
        }
        Self::new(t_final / n_steps as f64, n_steps)
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Same horizon with half the step.
    pub fn halved(&self) -> Self {
        Self { dt: self.dt / 2.0, n_steps: 2 * self.n_steps }
    }

    /// Trapezoid weights (in units of dt).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_steps {
            0.5
        } else {
            1.0
        }
    }
}

/// Complex samples on a grid at every time of a [`TimeGrid`], stored slice by slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: TorusGrid,
    pub time: TimeGrid,
    pub data: Vec<C64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &TorusGrid, time: TimeGrid) -> Self {
        Self { grid: grid.clone(), time, data: vec![C64::new(0.0, 0.0); grid.size() * time.len()] }
    }

    pub fn from_fn(grid: &TorusGrid, time: TimeGrid, f: impl Fn(f64, &[f64]) -> C64) -> Self {
        let mut out = Self::zeros(grid, time);
        let m = grid.size();
        for i in 0..time.len() {
            let t = time.time(i);
            for j in 0..m {
                out.data[i * m + j] = f(t, &grid.position(j));
            }
        }
        out
    }

    pub fn slice(&self, i: usize) -> &[C64] {
        let m = self.grid.size();
        &self.data[i * m..(i + 1) * m]
    }

    pub fn slice_mut(&mut self, i: usize) -> &mut [C64] {
        let m = self.grid.size();
        &mut self.data[i * m..(i + 1) * m]
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| *a *= s);
        out
    }

    /// Drops imaginary parts (used for densities and potentials of Hermitian states).
    pub fn real_part(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| a.im = 0.0);
        out
    }

    /// Per-slice transform to coefficients.
    pub fn to_coefficients(&self) -> Vec<Vec<C64>> {
        (0..self.time.len()).map(|i| self.grid.to_coefficients(self.slice(i))).collect()
    }

    pub fn from_coefficient_slices(grid: &TorusGrid, time: TimeGrid, slices: &[Vec<C64>]) -> Self {
        let mut out = Self::zeros(grid, time);
        for (i, c) in slices.iter().enumerate() {
            out.slice_mut(i).copy_from_slice(&grid.from_coefficients(c));
        }
        out
    }
}

/// A potential V(t, x) on the space-time grid, optionally tagged with the density that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub values: SpaceTimeField,
    pub density: Option<SpaceTimeField>,
}

impl PotentialField {
    pub fn prescribed(values: SpaceTimeField) -> Self {
        Self { values, density: None }
    }

    /// V = w ∗ ϱ with provenance.
    pub fn from_density(w: &InteractionPotential, density: &SpaceTimeField) -> Self {
        let mut values = SpaceTimeField::zeros(&density.grid, density.time);
        for i in 0..density.time.len() {
            let v = convolve_potential(w, &density.grid, density.slice(i));
            values.slice_mut(i).copy_from_slice(&v);
        }
        Self { values, density: Some(density.clone()) }
    }
}

/// How momentum pairs (k, k') whose difference leaves the box contribute to the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityRule {
    /// Differences wrap around; this equals the pointwise diagonal on the collocation grid.
    #[default]
    Collocation,
    /// Only pairs with k' + q inside the box contribute.
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixState {
    pub grid: TorusGrid,
    pub matrix: DMatrix<C64>,
    pub label: String,
}

impl DensityMatrixState {
    pub fn new(grid: &TorusGrid, matrix: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        let m = grid.size();
        if matrix.nrows() != m || matrix.ncols() != m {
            return Err(Error::DimensionError(format!(
                "matrix is {}×{}, grid needs {m}×{m}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { grid: grid.clone(), matrix, label: label.into() })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        let m = grid.size();
        Self { grid: grid.clone(), matrix: DMatrix::zeros(m, m), label: "zero".into() }
    }

    /// Diagonal operator g(k) δ_{kk'}.
    pub fn background(grid: &TorusGrid, g: &VelocityProfile) -> Self {
        let m = grid.size();
        let mut matrix = DMatrix::zeros(m, m);
        for k in 0..m {
            matrix[(k, k)] = C64::new(g.eval(&grid.momentum(k)), 0.0);
        }
        Self { grid: grid.clone(), matrix, label: "background".into() }
    }

    /// ε |u⟩⟨u| with u the unit-normalised plane-wave coefficients of a position function.
    pub fn rank_one(grid: &TorusGrid, eps: f64, u: impl Fn(&[f64]) -> C64) -> Self {
        let m = grid.size();
        let vals: Vec<C64> = (0..m).map(|j| u(&grid.position(j))).collect();
        let mut c = grid.to_coefficients(&vals);
        let nrm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            c.iter_mut().for_each(|v| *v /= nrm);
        }
        let v = nalgebra::DVector::from_vec(c);
        let matrix = &v * v.adjoint() * C64::new(eps, 0.0);
        Self { grid: grid.clone(), matrix, label: "rank_one".into() }
    }

    /// Random Hermitian matrix with Gaussian entries of the given scale.
    pub fn random_hermitian<R: Rng>(grid: &TorusGrid, scale: f64, rng: &mut R) -> Self {
        let m = grid.size();
        let a = DMatrix::from_fn(m, m, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale
        });
        let matrix = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        Self { grid: grid.clone(), matrix, label: "random".into() }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// max |Q - Q*| entrywise.
    pub fn herm_defect(&self) -> f64 {
        herm_defect(&self.matrix)
    }

    pub fn hermitize(&mut self) {
        hermitize(&mut self.matrix);
    }
}

pub fn herm_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = a;
            m[(j, i)] = a.conj();
        }
    }
}

/// Density coefficients c_q = L^{-d} Σ_{k'} Q_{[k'+q], k'}.
pub fn density_coefficients(q: &DensityMatrixState, rule: DensityRule) -> Vec<C64> {
    let g = &q.grid;
    let m = g.size();
    let mut c = vec![C64::new(0.0, 0.0); m];
    let inv_vol = 1.0 / g.volume();
    for (qi, cq) in c.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for kp in 0..m {
            if rule == DensityRule::Truncated && !g.sum_in_box(kp, qi) {
                continue;
            }
            s += q.matrix[(g.wrap_add(kp, qi), kp)];
        }
        *cq = s * inv_vol;
    }
    c
}

/// ρ(x_j) for a density matrix.
pub fn rho_from_matrix(q: &DensityMatrixState, rule: DensityRule) -> Vec<C64> {
    q.grid.from_coefficients(&density_coefficients(q, rule))
}

/// (w ∗ ρ)(x_j) through the multiplier (2π)^{d/2} ŵ(q).
pub fn convolve_potential(w: &InteractionPotential, grid: &TorusGrid, rho: &[C64]) -> Vec<C64> {
    let mut c = grid.to_coefficients(rho);
    let f = (2.0 * PI).powf(grid.dim() as f64 / 2.0);
    for (i, v) in c.iter_mut().enumerate() {
        *v *= f * w.fourier(&grid.momentum(i));
    }
    grid.from_coefficients(&c)
}

/// ‖f‖_{H^s}² = L^d Σ_q ⟨q⟩^{2s} |c_q|² for a single time slice.
pub fn sobolev_norm_slice(grid: &TorusGrid, values: &[C64], s: f64) -> f64 {
    let c = grid.to_coefficients(values);
    let sum: f64 = c.iter().zip(grid.k2()).map(|(v, k2)| (1.0 + k2).powf(s) * v.norm_sqr()).sum();
    (grid.volume() * sum).sqrt()
}

/// ‖f‖_{L²_t H^s_x} with trapezoid weights in time.
pub fn sobolev_norm(field: &SpaceTimeField, s: f64) -> f64 {
    let t = field.time;
    let mut acc = 0.0;
    for i in 0..t.len() {
        let v = sobolev_norm_slice(&field.grid, field.slice(i), s);
        acc += t.trapezoid_weight(i) * t.dt * v * v;
    }
    acc.sqrt()
}

/// Singular values, reporting failure instead of panicking.
pub fn singular_values(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let svd = nalgebra::SVD::try_new(m.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::SvdFailure(format!("{}×{} matrix", m.nrows(), m.ncols())))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Schatten norm from singular values; α = ∞ gives the operator norm.
pub fn schatten_from_singular(sv: &[f64], alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return sv.iter().fold(0.0, |m, v| m.max(*v));
    }
    let top = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    if top == 0.0 {
        return 0.0;
    }
    top * sv.iter().map(|v| (v / top).powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

pub fn schatten_norm(m: &DMatrix<C64>, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidInput(format!("Schatten index must be ≥ 1 (got {alpha})")));
    }
    Ok(schatten_from_singular(&singular_values(m)?, alpha))
}

/// ‖⟨∇⟩^{σ1} Q ⟨∇⟩^{σ2}‖_{S^α}.
pub fn weighted_schatten_norm_two_sided(q: &DensityMatrixState, sigma1: f64, sigma2: f64, alpha: f64) -> Result<f64> {
    let b = q.grid.bracket();
    let mut m = q.matrix.clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= b[i].powf(sigma1) * b[j].powf(sigma2);
        }
    }
    schatten_norm(&m, alpha)
}

/// ‖⟨∇⟩^s Q ⟨∇⟩^s‖_{S^α}.
pub fn weighted_schatten_norm(q: &DensityMatrixState, s: f64, alpha: f64) -> Result<f64> {
    weighted_schatten_norm_two_sided(q, s, s, alpha)
}

/// Fourier multiplier applied to a single field slice.
pub fn apply_multiplier_field(grid: &TorusGrid, values: &[C64], m: impl Fn(&[f64]) -> C64) -> Vec<C64> {
    let mut c = grid.to_coefficients(values);
    for (i, v) in c.iter_mut().enumerate() {
        *v *= m(&grid.momentum(i));
    }
    grid.from_coefficients(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// m(∇) Q or Q m(∇) in the plane-wave basis.
pub fn apply_multiplier_matrix(q: &DensityMatrixState, m: impl Fn(&[f64]) -> C64, side: Side) -> DensityMatrixState {
    let vals: Vec<C64> = (0..q.grid.size()).map(|k| m(&q.grid.momentum(k))).collect();
    let mut out = q.clone();
    for j in 0..out.matrix.ncols() {
        for i in 0..out.matrix.nrows() {
            out.matrix[(i, j)] *= match side {
                Side::Left => vals[i],
                Side::Right => vals[j],
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ordering_and_wrap() {
        let g = TorusGrid::new(2, 4, 2.0 * PI).unwrap();
        assert_eq!(g.mode(0), [0, 0, 0]);
        assert_eq!(g.mode(2), [0, -2, 0]);
        assert_eq!(g.mode(4 + 3), [1, -1, 0]);
        let a = g.flat_index(&[1, 1]);
        let b = g.flat_index(&[1, 1]);
        // [1 + 1] = [2] wraps to -2
        assert_eq!(g.mode(g.wrap_add(a, b)), [-2, -2, 0]);
        assert!(!g.sum_in_box(a, b));
    }

    #[test]
    fn fft_round_trip_three_dimensions() {
        let g = TorusGrid::new(3, 4, 3.0).unwrap();
        let v: Vec<C64> = (0..g.size()).map(|i| C64::new(i as f64, (i * i % 7) as f64)).collect();
        let back = g.from_coefficients(&g.to_coefficients(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficients_of_a_plane_wave() {
        let g = TorusGrid::new(2, 8, 5.0).unwrap();
        let k = g.flat_index(&[2, -3]);
        let kv = g.momentum(k);
        let vals: Vec<C64> = (0..g.size())
            .map(|j| {
                let x = g.position(j);
                C64::from_polar(1.0, kv[0] * x[0] + kv[1] * x[1])
            })
            .collect();
        let c = g.to_coefficients(&vals);
        for (i, v) in c.iter().enumerate() {
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_one_density_is_pointwise_modulus() {
        let g = TorusGrid::new(1, 16, 7.0).unwrap();
        let u = |x: &[f64]| C64::new((x[0]).sin() + 0.3, (2.0 * x[0]).cos() * 0.2);
        let q = DensityMatrixState::rank_one(&g, 1.0, u);
        let rho = rho_from_matrix(&q, DensityRule::Collocation);
        // u normalised in ℓ²(coefficients) means ∫|u|² = L |c|²... compare shapes directly.
        let vals: Vec<f64> = (0..g.size()).map(|j| u(&g.position(j)).norm_sqr()).collect();
        let ratio = rho[0].re / vals[0];
        for j in 0..g.size() {
            assert!((rho[j].re - ratio * vals[j]).abs() < 1e-12);
            assert!(rho[j].im.abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_schatten() {
        let g = TorusGrid::new(1, 8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = DensityMatrixState::random_hermitian(&g, 1.0, &mut rng);
        let fro: f64 = q.matrix.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((schatten_norm(&q.matrix, 2.0).unwrap() - fro).abs() < 1e-10);
        let op = schatten_norm(&q.matrix, f64::INFINITY).unwrap();
        assert!(op <= fro + 1e-12);
    }
}
