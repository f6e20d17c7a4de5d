//! Time evolution of density matrices: free conjugation, Strang splitting under
//! prescribed or self-consistent potentials, diagnostics, the Duhamel check and the
//! split of the density response into linear and higher-order parts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{InteractionPotential, VelocityProfile};
use crate::response::{apply_response, KernelSource, ResponseKernel};
use crate::spectral::{
    convolve_potential, density_coefficients, herm_defect, hermitize, schatten_from_singular, singular_values,
    sobolev_norm_slice, DensityMatrixState, DensityRule, PotentialField, SpaceTimeField, TimeGrid, TorusGrid, C64,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub time: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub herm_defect: f64,
    pub rho_l2: f64,
    pub rho_hs: f64,
}

/// e^{itΔ} Q e^{-itΔ}: multiplies Q_{kk'} by e^{-it(|k|² - |k'|²)}.
pub fn free_conjugate(q: &DensityMatrixState, t: f64) -> DensityMatrixState {
    let k2 = q.grid.k2();
    let mut out = q.clone();
    let m = k2.len();
    for j in 0..m {
        for i in 0..m {
            if i != j {
                out.matrix[(i, j)] *= C64::from_polar(1.0, -t * (k2[i] - k2[j]));
            }
        }
    }
    out
}

/// Splitting propagator on a fixed grid and step.
pub struct Propagator {
    grid: TorusGrid,
    h: f64,
    half: DMatrix<C64>,
    full: DMatrix<C64>,
    half_left: Vec<C64>,
}

fn phase_matrix(k2: &[f64], t: f64) -> DMatrix<C64> {
    let m = k2.len();
    DMatrix::from_fn(m, m, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, -t * (k2[i] - k2[j])) })
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

impl Propagator {
    pub fn new(grid: &TorusGrid, h: f64) -> Self {
        let k2 = grid.k2();
        Self {
            grid: grid.clone(),
            h,
            half: phase_matrix(k2, h / 2.0),
            full: phase_matrix(k2, h),
            half_left: k2.iter().map(|k| C64::from_polar(1.0, -h / 2.0 * k)).collect(),
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Columns of `a` ← e^{-ihV} applied in position space.
    fn potential_columns(&self, a: &mut DMatrix<C64>, phases: &[C64]) {
        let m = self.grid.size();
        let scale = 1.0 / m as f64;
        let cols = a.ncols();
        let data = a.as_mut_slice();
        for j in 0..cols {
            let col = &mut data[j * m..(j + 1) * m];
            self.grid.fft_inverse(col);
            col.iter_mut().zip(phases).for_each(|(c, p)| *c *= p);
            self.grid.fft_forward(col);
            col.iter_mut().for_each(|c| *c *= scale);
        }
    }

    fn potential_phases(&self, v: &[f64]) -> Vec<C64> {
        v.iter().map(|x| C64::from_polar(1.0, -self.h * x)).collect()
    }

    /// One Strang step Q ← S Q S* with S = e^{ihΔ/2} e^{-ihV} e^{ihΔ/2}.
    pub fn step(&self, q: &mut DMatrix<C64>, v: &[f64]) {
        if is_constant(v) {
            // A constant potential is a global phase and cancels in the conjugation.
            q.component_mul_assign(&self.full);
            return;
        }
        q.component_mul_assign(&self.half);
        let ph = self.potential_phases(v);
        self.potential_columns(q, &ph);
        let mut t = q.adjoint();
        self.potential_columns(&mut t, &ph);
        *q = t.adjoint();
        q.component_mul_assign(&self.half);
    }

    /// One step acting on the left only: A ← S A.
    pub fn step_left(&self, a: &mut DMatrix<C64>, v: &[f64]) {
        let m = self.grid.size();
        for j in 0..a.ncols() {
            for i in 0..m {
                a[(i, j)] *= self.half_left[i];
            }
        }
        if !is_constant(v) || v[0] != 0.0 {
            let ph = self.potential_phases(v);
            self.potential_columns(a, &ph);
        }
        for j in 0..a.ncols() {
            for i in 0..m {
                a[(i, j)] *= self.half_left[i];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelfConsistentScheme {
    /// V frozen at the start of each step.
    #[default]
    Explicit,
    /// Predict with V_n, correct with (V_n + V_{n+1})/2.
    PredictorCorrector,
}

pub enum Drive<'a> {
    /// V given on the time grid; each step uses the average of its end values.
    Prescribed(&'a PotentialField),
    /// V = w ∗ ρ_Q computed from the state itself.
    SelfConsistent { potential: &'a InteractionPotential, scheme: SelfConsistentScheme },
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub store_stride: usize,
    /// Sobolev index for the rho_hs column.
    pub s: f64,
    pub rule: DensityRule,
    pub breach_tol: f64,
    /// Evolve g + Q and report Q (g must be diagonal and is left untouched by free flow).
    pub background: Option<VelocityProfile>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self { store_stride: 1, s: 0.0, rule: DensityRule::Collocation, breach_tol: 1e-8, background: None }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub time: TimeGrid,
    pub snapshots: Vec<(usize, DensityMatrixState)>,
    /// ρ_Q at every time step.
    pub density: SpaceTimeField,
    pub ledger: Vec<DiagnosticRow>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrixState {
        &self.snapshots.last().expect("trajectory has snapshots").1
    }
}

fn real_parts(v: &[C64]) -> Vec<f64> {
    v.iter().map(|c| c.re).collect()
}

/// Evolves Q under the chosen drive, recording diagnostics at stored steps.
pub fn propagate(q0: &DensityMatrixState, drive: &Drive, time: TimeGrid, opts: &PropagateOptions) -> Result<Trajectory> {
    let grid = &q0.grid;
    if let Drive::Prescribed(v) = drive {
        if v.values.grid != *grid || v.values.time.n_steps != time.n_steps {
            return Err(Error::DimensionError("potential field does not match the grids".into()));
        }
    }
    let stride = opts.store_stride.max(1);
    let prop = Propagator::new(grid, time.dt);
    let bg = opts.background.as_ref().map(|p| DensityMatrixState::background(grid, p).matrix);
    let mut gamma = q0.matrix.clone();
    if let Some(b) = &bg {
        gamma += b;
    }
    let tr0 = gamma.trace();
    let scale = tr0.norm().max(1.0);
    let q_of = |g: &DMatrix<C64>| -> DensityMatrixState {
        let mut m = g.clone();
        if let Some(b) = &bg {
            m -= b;
        }
        DensityMatrixState { grid: grid.clone(), matrix: m, label: q0.label.clone() }
    };

    let mut density = SpaceTimeField::zeros(grid, time);
    let mut snapshots = vec![];
    let mut ledger = vec![];
    let mut defect = herm_defect(&gamma);
    let self_potential = |q: &DensityMatrixState, w: &InteractionPotential| -> Vec<f64> {
        let rho = grid.from_coefficients(&density_coefficients(q, opts.rule));
        real_parts(&convolve_potential(w, grid, &rho))
    };

    for n in 0..=time.n_steps {
        let q = q_of(&gamma);
        let rho = grid.from_coefficients(&density_coefficients(&q, opts.rule));
        density.slice_mut(n).copy_from_slice(&rho);
        let tr = gamma.trace();
        let drift = (tr - tr0).norm();
        let stored = n % stride == 0 || n == time.n_steps;
        if stored {
            let tq = q.trace();
            ledger.push(DiagnosticRow {
                step: n,
                time: time.time(n),
                trace_re: tq.re,
                trace_im: tq.im,
                herm_defect: defect,
                rho_l2: sobolev_norm_slice(grid, &rho, 0.0),
                rho_hs: sobolev_norm_slice(grid, &rho, opts.s),
            });
            snapshots.push((n, q.clone()));
        }
        if drift > opts.breach_tol * scale || defect > opts.breach_tol * scale {
            if !stored {
                let tq = q.trace();
                ledger.push(DiagnosticRow {
                    step: n,
                    time: time.time(n),
                    trace_re: tq.re,
                    trace_im: tq.im,
                    herm_defect: defect,
                    rho_l2: sobolev_norm_slice(grid, &rho, 0.0),
                    rho_hs: sobolev_norm_slice(grid, &rho, opts.s),
                });
            }
            let reason = if drift > opts.breach_tol * scale {
                format!("trace drift {drift:.3e}")
            } else {
                format!("hermiticity defect {defect:.3e}")
            };
            return Err(Error::DiagnosticBreach { step: n, reason, ledger });
        }
        if n == time.n_steps {
            break;
        }
        let v: Vec<f64> = match drive {
            Drive::Prescribed(f) => {
                let a = f.values.slice(n);
                let b = f.values.slice(n + 1);
                a.iter().zip(b).map(|(x, y)| 0.5 * (x.re + y.re)).collect()
            }
            Drive::SelfConsistent { potential, scheme } => {
                let vn = self_potential(&q, potential);
                match scheme {
                    SelfConsistentScheme::Explicit => vn,
                    SelfConsistentScheme::PredictorCorrector => {
                        let mut pred = gamma.clone();
                        prop.step(&mut pred, &vn);
                        let v1 = self_potential(&q_of(&pred), potential);
                        vn.iter().zip(&v1).map(|(a, b)| 0.5 * (a + b)).collect()
                    }
                }
            }
        };
        prop.step(&mut gamma, &v);
        defect = herm_defect(&gamma);
        hermitize(&mut gamma);
    }
    Ok(Trajectory { time, snapshots, density, ledger })
}

/// Q(t) = U_V(t) Q0 U_V(t)* under a prescribed potential.
pub fn propagate_uv(q0: &DensityMatrixState, v: &PotentialField, opts: &PropagateOptions) -> Result<Trajectory> {
    propagate(q0, &Drive::Prescribed(v), v.values.time, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub max_defect: f64,
    pub defects: Vec<f64>,
}

/// max_t ‖U_V(t)Q0 - e^{itΔ}Q0 + i∫_0^t e^{i(t-τ)Δ} V(τ) U_V(τ) Q0 dτ‖_op, with the
/// integral done by the trapezoid rule on the same grid.
pub fn duhamel_defect(v: &PotentialField, probe: &DMatrix<C64>) -> Result<DuhamelReport> {
    let grid = &v.values.grid;
    let time = v.values.time;
    let m = grid.size();
    if probe.nrows() != m {
        return Err(Error::DimensionError("probe rows must match the grid".into()));
    }
    let prop = Propagator::new(grid, time.dt);
    let k2 = grid.k2();
    let mut a = probe.clone();
    let mut acc = DMatrix::<C64>::zeros(m, probe.ncols());
    let mut prev_y: Option<DMatrix<C64>> = None;
    let mut defects = vec![];
    let apply_v = |a: &DMatrix<C64>, i: usize| -> DMatrix<C64> {
        let vals = v.values.slice(i);
        let mut out = a.clone();
        let cols = out.ncols();
        let data = out.as_mut_slice();
        for j in 0..cols {
            let col = &mut data[j * m..(j + 1) * m];
            grid.fft_inverse(col);
            col.iter_mut().zip(vals).for_each(|(c, p)| *c *= p.re);
            grid.fft_forward(col);
            col.iter_mut().for_each(|c| *c /= m as f64);
        }
        out
    };
    let rows = |a: &mut DMatrix<C64>, t: f64| {
        for j in 0..a.ncols() {
            for i in 0..m {
                a[(i, j)] *= C64::from_polar(1.0, -t * k2[i]);
            }
        }
    };
    for n in 0..=time.n_steps {
        let t = time.time(n);
        // Interaction-picture integrand e^{-itΔ} V(t) U(t) Q0.
        let mut y = apply_v(&a, n);
        rows(&mut y, -t);
        if let Some(py) = &prev_y {
            acc += (py + &y) * C64::new(0.5 * time.dt, 0.0);
        }
        let mut duh = acc.clone() * C64::new(0.0, -1.0);
        rows(&mut duh, t);
        let mut free = probe.clone();
        rows(&mut free, t);
        let diff = &a - free - duh;
        defects.push(schatten_from_singular(&singular_values(&diff)?, f64::INFINITY));
        prev_y = Some(y);
        if n < time.n_steps {
            let vm: Vec<f64> =
                v.values.slice(n).iter().zip(v.values.slice(n + 1)).map(|(x, y)| 0.5 * (x.re + y.re)).collect();
            prop.step_left(&mut a, &vm);
        }
    }
    Ok(DuhamelReport { max_defect: defects.iter().fold(0.0, |m, d| m.max(*d)), defects })
}

#[derive(Debug, Clone)]
pub struct ReactionTerms {
    /// ρ[U_V g U_V* - g].
    pub full: SpaceTimeField,
    /// -𝓛ϱ with the lattice kernel.
    pub linear: SpaceTimeField,
    pub higher: SpaceTimeField,
}

/// Splits the background response to V = w ∗ ϱ into its linear and higher-order parts.
pub fn reaction_terms(
    v: &PotentialField,
    p: &VelocityProfile,
    w: &InteractionPotential,
    rule: DensityRule,
) -> Result<ReactionTerms> {
    let rho = v.density.as_ref().ok_or(Error::MissingProvenance)?;
    let grid = &v.values.grid;
    let opts = PropagateOptions { background: Some(p.clone()), rule, ..Default::default() };
    let traj = propagate_uv(&DensityMatrixState::zeros(grid), v, &opts)?;
    let full = traj.density;
    let k = ResponseKernel::build(p, w, grid, v.values.time, KernelSource::Lattice(rule))?;
    let linear = apply_response(&k, rho)?.scale(-1.0);
    let higher = full.sub(&linear);
    Ok(ReactionTerms { full, linear, higher })
}

/// Linear response of the background to a prescribed V by direct quadrature in the
/// interaction picture: -i ∫_0^t e^{i(t-τ)Δ} [V(τ), g] e^{-i(t-τ)Δ} dτ, then ρ.
pub fn linear_response_direct(v: &SpaceTimeField, p: &VelocityProfile, rule: DensityRule) -> Result<SpaceTimeField> {
    let grid = &v.grid;
    let time = v.time;
    let m = grid.size();
    let k2 = grid.k2();
    let g: Vec<f64> = (0..m).map(|k| p.eval(&grid.momentum(k))).collect();
    let mut acc = DMatrix::<C64>::zeros(m, m);
    let mut prev: Option<DMatrix<C64>> = None;
    let mut slices = vec![];
    for n in 0..time.len() {
        let t = time.time(n);
        let vc = grid.to_coefficients(v.slice(n));
        // e^{-itΔ} [V, g] e^{itΔ} entry (k, k') = e^{it(|k|²-|k'|²)} v_{[k-k']} (g(k') - g(k))
        let mut y = DMatrix::<C64>::zeros(m, m);
        for kp in 0..m {
            for q in 0..m {
                let k = grid.wrap_add(kp, q);
                if rule == DensityRule::Truncated && !grid.sum_in_box(kp, q) {
                    continue;
                }
                y[(k, kp)] = vc[q] * (g[kp] - g[k]) * C64::from_polar(1.0, t * (k2[k] - k2[kp]));
            }
        }
        if let Some(py) = &prev {
            acc += (py + &y) * C64::new(0.5 * time.dt, 0.0);
        }
        let mut qn = acc.clone() * C64::new(0.0, -1.0);
        for j in 0..m {
            for i in 0..m {
                qn[(i, j)] *= C64::from_polar(1.0, -t * (k2[i] - k2[j]));
            }
        }
        let st = DensityMatrixState { grid: grid.clone(), matrix: qn, label: "linear".into() };
        slices.push(density_coefficients(&st, rule));
        prev = Some(y);
    }
    Ok(SpaceTimeField::from_coefficient_slices(grid, time, &slices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid1() -> TorusGrid {
        TorusGrid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn zero_potential_matches_free_conjugation_exactly() {
        let g = grid1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = DensityMatrixState::random_hermitian(&g, 0.1, &mut rng);
        let prop = Propagator::new(&g, 0.01);
        let mut m = q.matrix.clone();
        prop.step(&mut m, &vec![0.0; g.size()]);
        assert_eq!(m, free_conjugate(&q, 0.01).matrix);
    }

    #[test]
    fn free_conjugation_group_law() {
        let g = TorusGrid::new(2, 4, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = DensityMatrixState::random_hermitian(&g, 1.0, &mut rng);
        let a = free_conjugate(&free_conjugate(&q, 0.3), 0.5);
        let b = free_conjugate(&q, 0.8);
        assert!((a.matrix - b.matrix).norm() < 1e-12);
    }

    #[test]
    fn strang_step_is_unitary_conjugation() {
        let g = grid1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = DensityMatrixState::random_hermitian(&g, 1.0, &mut rng);
        let v: Vec<f64> = (0..g.size()).map(|j| g.position(j)[0].cos()).collect();
        let prop = Propagator::new(&g, 0.05);
        let mut m = q.matrix.clone();
        prop.step(&mut m, &v);
        assert!((m.trace() - q.matrix.trace()).norm() < 1e-12);
        let sq = |x: &DMatrix<C64>| (x * x).trace().re;
        assert!((sq(&m) - sq(&q.matrix)).abs() < 1e-10);
        // Left action composed with its adjoint reproduces the conjugation.
        let mut u = DMatrix::<C64>::identity(g.size(), g.size());
        prop.step_left(&mut u, &v);
        let conj = &u * &q.matrix * u.adjoint();
        assert!((conj - m).norm() < 1e-12);
    }
}
