//! Nonlinear solvers: direct self-consistent propagation and Picard iteration of the
//! density map Φ, plus scattering diagnostics in the interaction picture.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{free_conjugate, propagate, Drive, PropagateOptions, Propagator, SelfConsistentScheme, Trajectory};
use crate::error::{Error, Result};
use crate::profiles::{InteractionPotential, VelocityProfile};
use crate::response::{apply_response, invert_response, KernelSource, ResponseKernel};
use crate::spectral::{
    density_coefficients, sobolev_norm, weighted_schatten_norm, DensityMatrixState, DensityRule, PotentialField,
    SpaceTimeField, TimeGrid, C64,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// ‖Φ(ϱ_n) - ϱ_n‖ in L²_t H^s_x.
    pub residual: f64,
    /// ‖ϱ_{n+1} - ϱ_n‖.
    pub step_norm: f64,
    /// step_norm / previous step_norm.
    pub factor: Option<f64>,
}

/// Default Sobolev index d/2 - 1; d = 1 falls back to 0 and is outside the theorem.
pub fn default_sobolev_index(d: usize) -> (f64, bool) {
    if d == 1 {
        (0.0, true)
    } else {
        (d as f64 / 2.0 - 1.0, d < 3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub s: Option<f64>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50, damping: 1.0, s: None }
    }
}

/// Everything Φ needs besides its argument.
pub struct Problem<'a> {
    pub profile: &'a VelocityProfile,
    pub potential: &'a InteractionPotential,
    pub q_in: &'a DensityMatrixState,
    pub time: TimeGrid,
    pub rule: DensityRule,
}

pub struct PhiMap<'a> {
    problem: Problem<'a>,
    kernel: ResponseKernel,
}

impl<'a> PhiMap<'a> {
    pub fn new(problem: Problem<'a>) -> Result<Self> {
        let kernel = ResponseKernel::build(
            problem.profile,
            problem.potential,
            &problem.q_in.grid,
            problem.time,
            KernelSource::Lattice(problem.rule),
        )?;
        Ok(Self { problem, kernel })
    }

    pub fn kernel(&self) -> &ResponseKernel {
        &self.kernel
    }

    /// Φ(ϱ) = (1 + 𝓛)^{-1}(ρ[U (g + Q_in) U* - g] + 𝓛ϱ) with U driven by w ∗ ϱ.
    pub fn apply(&self, rho: &SpaceTimeField) -> Result<SpaceTimeField> {
        let pr = &self.problem;
        let v = PotentialField::from_density(pr.potential, &rho.real_part());
        let opts = PropagateOptions { background: Some(pr.profile.clone()), rule: pr.rule, ..Default::default() };
        let traj = propagate(pr.q_in, &Drive::Prescribed(&v), pr.time, &opts)?;
        let lin = apply_response(&self.kernel, rho)?;
        invert_response(&self.kernel, &traj.density.add(&lin))
    }

    /// Φ assembled term by term from dense propagators: the free-evolved Q_in term and
    /// the three D_V cross terms, each integrated by the trapezoid rule.
    pub fn apply_four_term(&self, rho: &SpaceTimeField) -> Result<SpaceTimeField> {
        let pr = &self.problem;
        let grid = &pr.q_in.grid;
        let time = pr.time;
        let m = grid.size();
        let v = PotentialField::from_density(pr.potential, &rho.real_part());
        let prop = Propagator::new(grid, time.dt);
        let k2 = grid.k2();
        let g: Vec<f64> = (0..m).map(|k| pr.profile.eval(&grid.momentum(k))).collect();

        // U(t_j) for every step.
        let mut us = Vec::with_capacity(time.len());
        let mut u = DMatrix::<C64>::identity(m, m);
        us.push(u.clone());
        for n in 0..time.n_steps {
            let vm: Vec<f64> =
                v.values.slice(n).iter().zip(v.values.slice(n + 1)).map(|(a, b)| 0.5 * (a.re + b.re)).collect();
            prop.step_left(&mut u, &vm);
            us.push(u.clone());
        }
        let free = |s: f64| -> DMatrix<C64> {
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, k2.iter().map(|k| C64::from_polar(1.0, -s * k))))
        };
        let commutator = |j: usize| -> DMatrix<C64> {
            let vc = grid.to_coefficients(v.values.slice(j));
            let mut c = DMatrix::<C64>::zeros(m, m);
            for kp in 0..m {
                for q in 0..m {
                    if pr.rule == DensityRule::Truncated && !grid.sum_in_box(kp, q) {
                        continue;
                    }
                    let k = grid.wrap_add(kp, q);
                    c[(k, kp)] = C64::new(vc[q].re, 0.0) * (g[kp] - g[k]);
                }
            }
            c
        };
        let comms: Vec<DMatrix<C64>> = (0..time.len()).map(commutator).collect();
        let mi = C64::new(0.0, -1.0);
        let mut slices = Vec::with_capacity(time.len());
        for n in 0..time.len() {
            let un = &us[n];
            let first = DensityMatrixState { grid: grid.clone(), matrix: un * &pr.q_in.matrix * un.adjoint(), label: String::new() };
            let mut cross = DMatrix::<C64>::zeros(m, m);
            for j in 0..=n {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 } * time.dt;
                if n == 0 {
                    break;
                }
                let e = free(time.time(n) - time.time(j));
                let unj = un * us[j].adjoint();
                let d = &unj - &e;
                let c = &comms[j];
                let t2 = &e * c * d.adjoint();
                let t3 = &d * c * e.adjoint();
                let t4 = &d * c * d.adjoint();
                cross += (t2 + t3 + t4) * (mi * w);
            }
            let cross = DensityMatrixState { grid: grid.clone(), matrix: cross, label: String::new() };
            let mut c = density_coefficients(&first, pr.rule);
            for (a, b) in c.iter_mut().zip(density_coefficients(&cross, pr.rule)) {
                *a += b;
            }
            slices.push(c);
        }
        let h = SpaceTimeField::from_coefficient_slices(grid, time, &slices);
        invert_response(&self.kernel, &h)
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub density: SpaceTimeField,
    pub history: Vec<IterationRecord>,
    pub s: f64,
    pub outside_theorem: bool,
}

impl FixedPointOutcome {
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.history.iter().filter_map(|r| r.factor).collect()
    }
}

/// Damped Picard iteration ϱ ← (1-θ)ϱ + θΦ(ϱ) from ϱ = 0.
pub fn solve_fixed_point(problem: Problem, cfg: &FixedPointConfig) -> Result<FixedPointOutcome> {
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 || !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::InvalidInput("need tol > 0, max_iter ≥ 1 and damping in (0, 1]".into()));
    }
    let (s_default, outside) = default_sobolev_index(problem.q_in.grid.dim());
    let s = cfg.s.unwrap_or(s_default);
    let grid = problem.q_in.grid.clone();
    let time = problem.time;
    let phi = PhiMap::new(problem)?;
    let mut rho = SpaceTimeField::zeros(&grid, time);
    let mut history: Vec<IterationRecord> = vec![];
    for it in 1..=cfg.max_iter {
        let next = phi.apply(&rho)?;
        let diff = next.sub(&rho);
        let residual = sobolev_norm(&diff, s);
        let step = diff.scale(cfg.damping);
        let step_norm = cfg.damping * residual;
        let factor = history.last().and_then(|p| (p.step_norm > 0.0).then(|| step_norm / p.step_norm));
        history.push(IterationRecord { iteration: it, residual, step_norm, factor });
        if residual <= cfg.tol {
            return Ok(FixedPointOutcome { density: next, history, s, outside_theorem: outside });
        }
        rho = rho.add(&step);
    }
    Err(Error::NotConverged { max_iter: cfg.max_iter, history })
}

#[derive(Debug, Clone)]
pub struct DirectOutcome {
    pub trajectory: Trajectory,
    /// ‖⟨∇⟩^s Q_in ⟨∇⟩^s‖ in the Schatten class 2d/(d+1).
    pub initial_norm: f64,
}

/// Self-consistent propagation of γ = g + Q.
pub fn solve_direct(
    q_in: &DensityMatrixState,
    profile: &VelocityProfile,
    potential: &InteractionPotential,
    time: TimeGrid,
    scheme: SelfConsistentScheme,
    opts: &PropagateOptions,
) -> Result<DirectOutcome> {
    let d = q_in.grid.dim();
    let (s, _) = default_sobolev_index(d);
    let alpha = 2.0 * d as f64 / (d as f64 + 1.0);
    let initial_norm = weighted_schatten_norm(q_in, s, alpha)?;
    let mut o = opts.clone();
    o.background = Some(profile.clone());
    let drive = Drive::SelfConsistent { potential, scheme };
    Ok(DirectOutcome { trajectory: propagate(q_in, &drive, time, &o)?, initial_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringVerdict {
    Scatters,
    NoScattering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// Symmetric table of weighted Schatten distances between W(t_i) and W(t_j).
    pub distances: Vec<Vec<f64>>,
    pub first_tail: f64,
    pub last_tail: f64,
    pub verdict: ScatteringVerdict,
    pub s: f64,
    pub alpha: f64,
    pub outside_theorem: bool,
}

/// Cauchy test on W(t) = e^{-itΔ} Q(t) e^{itΔ} over the snapshots with t in [t_start, t_end].
pub fn scattering_diagnostic(traj: &Trajectory, t_start: f64, t_end: f64) -> Result<ScatteringReport> {
    let snaps: Vec<&(usize, DensityMatrixState)> = traj
        .snapshots
        .iter()
        .filter(|(n, _)| {
            let t = traj.time.time(*n);
            t >= t_start - 1e-12 && t <= t_end + 1e-12
        })
        .collect();
    let m = snaps.len();
    if m < 5 {
        return Err(Error::InvalidInput(format!("scattering window holds {m} snapshots, need at least 5")));
    }
    let d = snaps[0].1.grid.dim();
    let (s, outside) = default_sobolev_index(d);
    let alpha = if d == 1 { f64::INFINITY } else { 2.0 * d as f64 / (d as f64 - 1.0) };
    let ws: Vec<DensityMatrixState> = snaps.iter().map(|(n, q)| free_conjugate(q, -traj.time.time(*n))).collect();
    let mut table = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let diff = DensityMatrixState { grid: ws[i].grid.clone(), matrix: &ws[i].matrix - &ws[j].matrix, label: String::new() };
            let v = weighted_schatten_norm(&diff, s, alpha)?;
            table[i][j] = v;
            table[j][i] = v;
        }
    }
    let bounds: Vec<usize> = (0..=4).map(|k| ((k * (m - 1)) as f64 / 4.0).round() as usize).collect();
    let tail = |a: usize, b: usize| -> f64 {
        let mut t: f64 = 0.0;
        for i in a..=b {
            for j in i + 1..=b {
                t = t.max(table[i][j]);
            }
        }
        t
    };
    let first_tail = tail(bounds[0], bounds[1]);
    let last_tail = tail(bounds[3], bounds[4]);
    let verdict = if last_tail <= 1e-10 || last_tail < first_tail {
        ScatteringVerdict::Scatters
    } else {
        ScatteringVerdict::NoScattering
    };
    Ok(ScatteringReport {
        times: snaps.iter().map(|(n, _)| traj.time.time(*n)).collect(),
        distances: table,
        first_tail,
        last_tail,
        verdict,
        s,
        alpha,
        outside_theorem: outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    fn setup() -> (TorusGrid, VelocityProfile, InteractionPotential) {
        let g = TorusGrid::new(1, 16, 12.0).unwrap();
        let p = VelocityProfile::gaussian(1, 1.0, 1.0).unwrap();
        let w = InteractionPotential::delta_with_fourier(1, 0.3).unwrap();
        (g, p, w)
    }

    #[test]
    fn zero_data_converges_immediately() {
        let (g, p, w) = setup();
        let q = DensityMatrixState::zeros(&g);
        let t = TimeGrid::new(0.05, 40).unwrap();
        let out = solve_fixed_point(
            Problem { profile: &p, potential: &w, q_in: &q, time: t, rule: DensityRule::Collocation },
            &FixedPointConfig::default(),
        )
        .unwrap();
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.density.max_abs(), 0.0);
    }

    #[test]
    fn four_term_assembly_agrees_to_second_order() {
        let (g, p, w) = setup();
        let q = DensityMatrixState::rank_one(&g, 0.05, |x| C64::new((-(x[0] - 6.0).powi(2)).exp(), 0.0));
        let mut errs = vec![];
        for n in [20usize, 40] {
            let t = TimeGrid::from_final(1.0, n).unwrap();
            let phi = PhiMap::new(Problem { profile: &p, potential: &w, q_in: &q, time: t, rule: DensityRule::Collocation }).unwrap();
            let rho = SpaceTimeField::from_fn(&g, t, |tt, x| C64::new(0.2 * (x[0] * 2.0 * std::f64::consts::PI / 12.0).cos() * (1.0 + tt), 0.0));
            let a = phi.apply(&rho).unwrap();
            let b = phi.apply_four_term(&rho).unwrap();
            errs.push(sobolev_norm(&a.sub(&b), 0.0) / sobolev_norm(&a, 0.0));
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{errs:?}");
    }
}
