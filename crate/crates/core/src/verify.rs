//! Measurable versions of the analytical claims: discrete bounds, L-scheme
//! contraction, τ self-convergence, ε→0 convergence and a linear
//! manufactured-solution order check.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constitutive::LinearModel;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lsolver::{mass_distance, IterationHistory};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::CsrMatrix;
use crate::timestepper::{run, Scenario, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
    /// `(min u, max u)` at each time stamp, initial data included.
    pub per_step: Vec<(f64, f64)>,
    pub global_min: f64,
    pub global_max: f64,
    /// Largest distance of any nodal value outside `[lower, upper]`.
    pub worst_violation: f64,
    /// Time index and node of the worst violation.
    pub worst_at: Option<(usize, usize)>,
    pub passed: bool,
}

/// Checks every nodal value of `traj` against `[lower − tol, upper + tol]`.
pub fn check_bounds(traj: &Trajectory, lower: f64, upper: f64, tol: f64) -> BoundsReport {
    let mut per_step = Vec::with_capacity(traj.states.len());
    let mut worst = 0.0;
    let mut worst_at = None;
    for (n, u) in traj.states.iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &v) in u.iter().enumerate() {
            lo = lo.min(v);
            hi = hi.max(v);
            let viol = (lower - v).max(v - upper).max(0.0);
            if viol > worst || (viol.is_nan() && worst_at.is_none()) {
                worst = viol;
                worst_at = Some((n, i));
            }
        }
        per_step.push((lo, hi));
    }
    let global_min = per_step.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let global_max = per_step.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    BoundsReport {
        lower,
        upper,
        tol,
        per_step,
        global_min,
        global_max,
        worst_violation: worst,
        worst_at,
        passed: worst <= tol && global_min.is_finite() && global_max.is_finite(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    /// `eⁱ = ‖Uⁱ − U_ref‖`, `i = 0, 1, …`.
    pub errors: Vec<f64>,
    /// `eⁱ / eⁱ⁻¹` for the iterations above the noise floor.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub geometric_mean_ratio: f64,
}

impl RateSummary {
    /// Whether `eⁱ ≤ eⁱ⁻¹ + tol` for every recorded iteration.
    pub fn non_increasing(&self, tol: f64) -> bool {
        self.errors.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Errors of the recorded iterates against `reference`. Ratios involving an
/// error below `floor` are left out, since they measure solver noise.
pub fn lscheme_rate(history: &IterationHistory, reference: &[f64], mass: &[f64], floor: f64) -> Result<RateSummary> {
    let iterates = history
        .iterates
        .as_ref()
        .ok_or_else(|| Error::InvalidStudy("rate analysis needs recorded iterates".into()))?;
    let errors: Vec<f64> = iterates.iter().map(|u| mass_distance(mass, u, reference)).collect();
    let ratios: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let geometric_mean_ratio = if ratios.is_empty() {
        0.0
    } else {
        (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
    };
    Ok(RateSummary { errors, ratios, max_ratio, geometric_mean_ratio })
}

/// `(Σᵢ τ|Uⁱ − U_ref|²_ω, (L/2)‖U⁰ − U_ref‖²)`: the summed error inequality
/// of the L-scheme bounds the first by the second.
pub fn seminorm_summability(
    history: &IterationHistory,
    reference: &[f64],
    mass: &[f64],
    stiffness: &CsrMatrix,
    tau: f64,
    l: f64,
) -> Result<(f64, f64)> {
    let iterates = history
        .iterates
        .as_ref()
        .ok_or_else(|| Error::InvalidStudy("summability needs recorded iterates".into()))?;
    let diff = |u: &Vec<f64>| -> Vec<f64> { u.iter().zip(reference).map(|(a, b)| a - b).collect() };
    let lhs: f64 = iterates[1..].iter().map(|u| tau * stiffness.quadratic_form(&diff(u)).max(0.0)).sum();
    let e0 = mass_distance(mass, &iterates[0], reference);
    Ok((lhs, 0.5 * l * e0 * e0))
}

/// Space-time `L²` distance between two piecewise-constant-in-time
/// trajectories on the same mesh (`u(t) = Uⁿ` on `(t_{n−1}, t_n]`), exact
/// on the merged time partition.
pub fn l2_space_time_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.mass.len() != b.mass.len() {
        return Err(Error::InvalidStudy("trajectories live on different meshes".into()));
    }
    let (ta, tb) = (*a.times.last().unwrap(), *b.times.last().unwrap());
    if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
        return Err(Error::InvalidStudy(format!("final times differ: {ta} vs {tb}")));
    }
    let (mut i, mut j) = (1, 1);
    let mut t = 0.0;
    let mut sum = 0.0;
    while i < a.times.len() && j < b.times.len() {
        let next = a.times[i].min(b.times[j]);
        let d = mass_distance(&a.mass, &a.states[i], &b.states[j]);
        sum += (next - t) * d * d;
        t = next;
        let close = |x: f64| (x - next).abs() <= 1e-12 * next.abs().max(1.0);
        if close(a.times[i]) {
            i += 1;
        }
        if close(b.times[j]) {
            j += 1;
        }
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    /// `"tau"` or `"eps"`.
    pub parameter: &'static str,
    pub values: Vec<f64>,
    pub distances: Vec<f64>,
    /// `log(d_{k−1}/d_k) / log(p_{k−1}/p_k)`; `None` for the first row.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceTable {
    fn new(parameter: &'static str, values: Vec<f64>, distances: Vec<f64>) -> Self {
        let orders = (0..values.len())
            .map(|k| {
                (k > 0).then(|| (distances[k - 1] / distances[k]).ln() / (values[k - 1] / values[k]).ln())
            })
            .collect();
        Self { parameter, values, distances, orders }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }

    /// Least-squares slope of `log d` against `log p`.
    pub fn fitted_order(&self) -> Option<f64> {
        let n = self.values.len();
        if n < 2 {
            return None;
        }
        let xs: Vec<f64> = self.values.iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = self.distances.iter().map(|v| v.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / n as f64, ys.iter().sum::<f64>() / n as f64);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(sxy / sxx)
    }
}

fn steps_for(final_time: f64, tau: f64) -> Result<usize> {
    let n = (final_time / tau).round();
    if !(n >= 1.0) || ((n * tau - final_time).abs() > 1e-9 * final_time) {
        return Err(Error::InvalidStudy(format!("tau = {tau} does not divide T = {final_time}")));
    }
    Ok(n as usize)
}

/// Solver settings for reference runs: increments below 1e-13.
pub fn reference_solver(scenario: &Scenario) -> Scenario {
    let mut s = scenario.clone();
    s.solver.atol = 1e-13;
    s.solver.rtol = 0.0;
    s.solver.max_iters = s.solver.max_iters.max(5000);
    s
}

/// Distances of `u^τ` to a reference run at `min(taus)/4`. `taus` must be a
/// strictly decreasing halving sequence dividing `T`.
pub fn tau_convergence_study(scenario: &Scenario, taus: &[f64]) -> Result<ConvergenceTable> {
    if taus.is_empty() {
        return Err(Error::InvalidStudy("empty tau list".into()));
    }
    let steps: Vec<usize> = taus.iter().map(|&t| steps_for(scenario.final_time, t)).collect::<Result<_>>()?;
    if steps.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidStudy("tau list must be a halving sequence".into()));
    }
    let reference = Scenario { steps: 4 * steps[steps.len() - 1], ..reference_solver(scenario) };
    let mut runs: Vec<Scenario> = steps.iter().map(|&n| Scenario { steps: n, ..scenario.clone() }).collect();
    runs.push(reference);
    let trajs: Vec<Trajectory> = runs.par_iter().map(run).collect::<Result<_>>()?;
    let (ref_traj, rest) = trajs.split_last().unwrap();
    let d = rest.iter().map(|t| l2_space_time_distance(t, ref_traj)).collect::<Result<_>>()?;
    Ok(ConvergenceTable::new("tau", taus.to_vec(), d))
}

/// Distances `‖u^{τ,ε} − u^{τ,0}‖` for each `ε` at fixed `τ`.
pub fn eps_convergence_study(scenario: &Scenario, eps: &[f64], tau: f64) -> Result<ConvergenceTable> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidStudy("eps list must be positive and strictly decreasing".into()));
    }
    let steps = steps_for(scenario.final_time, tau)?;
    let base = Scenario { steps, epsilon: 0.0, ..scenario.clone() };
    let mut runs = vec![base.clone()];
    runs.extend(eps.iter().map(|&e| Scenario { epsilon: e, ..base.clone() }));
    let trajs: Vec<Trajectory> = runs.par_iter().map(run).collect::<Result<_>>()?;
    let (zero, rest) = trajs.split_first().unwrap();
    let d = rest.iter().map(|t| l2_space_time_distance(t, zero)).collect::<Result<_>>()?;
    Ok(ConvergenceTable::new("eps", eps.to_vec(), d))
}

/// `u(z, t) = sin(πz)·e^{−t}`
pub fn mms_exact(z: f64, t: f64) -> f64 {
    (PI * z).sin() * (-t).exp()
}

/// Linear heat-equation scenario on `[0, 1]` whose exact solution is
/// [`mms_exact`].
pub fn mms_scenario(n_cells: usize, final_time: f64, steps: usize) -> Result<Scenario> {
    let mesh = Arc::new(Mesh::uniform_interval(n_cells, 0.0, 1.0)?);
    let mut s = Scenario::new(Arc::new(LinearModel::default()), mesh, final_time, steps);
    s.initial = Field::new("sin(pi*z)", |_: f64, z: f64, _: f64, _: f64| mms_exact(z, 0.0));
    let exact_bc = Field::new("sin(pi*z)*exp(-t)", |_: f64, z: f64, t: f64, _: f64| mms_exact(z, t));
    s = s.with_boundary(BoundaryTag::Bottom, exact_bc.clone()).with_boundary(BoundaryTag::Top, exact_bc);
    s.source = Field::new("(pi^2-1)*sin(pi*z)*exp(-t)", |_: f64, z: f64, t: f64, _: f64| {
        (PI * PI - 1.0) * mms_exact(z, t)
    });
    Ok(s)
}

/// `‖u^τ − u‖_{L²(Ω×I)}` against the exact solution, with 3-point Gauss
/// quadrature in time on each step and lumped quadrature in space.
pub fn mms_error(traj: &Trajectory, mesh: &Mesh) -> f64 {
    let gauss = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let mut sum = 0.0;
    for n in 1..traj.times.len() {
        let (t0, t1) = (traj.times[n - 1], traj.times[n]);
        let (c, h) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
        for (xi, w) in gauss {
            let t = c + h * xi;
            let e2: f64 = mesh
                .nodes()
                .iter()
                .zip(&traj.states[n])
                .zip(&traj.mass)
                .map(|((p, u), m)| m * (u - mms_exact(p[1], t)).powi(2))
                .sum();
            sum += w * h * e2;
        }
    }
    sum.sqrt()
}

/// Errors of the manufactured solution for each step count.
pub fn mms_linear_sanity(n_cells: usize, final_time: f64, steps: &[usize]) -> Result<ConvergenceTable> {
    let scenarios: Vec<Scenario> = steps.iter().map(|&n| mms_scenario(n_cells, final_time, n)).collect::<Result<_>>()?;
    let errors: Vec<f64> = scenarios
        .par_iter()
        .map(|s| run(s).map(|t| mms_error(&t, &s.mesh)))
        .collect::<Result<_>>()?;
    let taus = steps.iter().map(|&n| final_time / n as f64).collect();
    Ok(ConvergenceTable::new("tau", taus, errors))
}

/// Per-step balance residuals `|Σ mᵢΔθᵢ − τ(S_total + boundary flux)|`.
pub fn mass_balance(traj: &Trajectory) -> Vec<f64> {
    traj.diagnostics.iter().map(|d| d.balance_residual).collect()
}
