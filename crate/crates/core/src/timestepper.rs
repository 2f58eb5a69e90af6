//! Semi-implicit Euler time loop with coefficients frozen at the previous
//! time level, and its ε-regularized variant.

use std::sync::Arc;

use crate::assembly::{
    convection_load, element_values, lumped_mass, source_load, stiffness_pattern, weighted_stiffness_into,
    DirichletConstraints, WeightRule,
};
use crate::constitutive::Constitutive;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lsolver::{lscheme_solve, FrozenStep, IterationHistory, LschemeConfig};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::CsrMatrix;

/// Tolerance on the physical range check of initial and boundary data.
const BOUNDS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: Arc<dyn Constitutive>,
    pub mesh: Arc<Mesh>,
    pub final_time: f64,
    /// Number of time steps `N`; `τ = T/N`.
    pub steps: usize,
    pub initial: Field,
    /// Dirichlet data per boundary tag, evaluated at `(x, z, t_n, u_{n−1})`.
    pub boundary: Vec<(BoundaryTag, Field)>,
    /// Source, evaluated at `(x, z, t_{n−1}, u_{n−1})`.
    pub source: Field,
    /// Added to the diffusion weight; 0 gives the degenerate scheme.
    pub epsilon: f64,
    pub solver: LschemeConfig,
    pub weight_rule: WeightRule,
    /// Require initial and boundary data to lie in `[0, u*]`.
    pub physical_bounds: bool,
    pub abort_on_nonconvergence: bool,
}

impl Scenario {
    /// Scenario with zero data, default solver settings and no source.
    pub fn new(model: Arc<dyn Constitutive>, mesh: Arc<Mesh>, final_time: f64, steps: usize) -> Self {
        let tags: Vec<BoundaryTag> = {
            let mut t: Vec<_> = mesh.boundary_nodes().iter().map(|&(_, t)| t).collect();
            t.sort();
            t.dedup();
            t
        };
        Self {
            model,
            mesh,
            final_time,
            steps,
            initial: Field::zero(),
            boundary: tags.into_iter().map(|t| (t, Field::zero())).collect(),
            source: Field::zero(),
            epsilon: 0.0,
            solver: LschemeConfig::default(),
            weight_rule: WeightRule::default(),
            physical_bounds: false,
            abort_on_nonconvergence: false,
        }
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.final_time
        } else {
            n as f64 * self.tau()
        }
    }

    pub fn with_boundary(mut self, tag: BoundaryTag, f: Field) -> Self {
        self.boundary.retain(|(t, _)| *t != tag);
        self.boundary.push((tag, f));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidInput("step count N must be at least 1".into()));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::InvalidInput(format!("final time {} must be positive", self.final_time)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon {} must be non-negative", self.epsilon)));
        }
        self.solver.validate(self.model.lipschitz_theta())?;
        let u0 = self.initial_state();
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial condition is not finite".into()));
        }
        let bc = self.dirichlet(0.0, &u0)?;
        if self.physical_bounds {
            let hi = self.model.upper_bound().unwrap_or(f64::INFINITY);
            let outside = |v: f64| v < -BOUNDS_SLACK || v > hi + BOUNDS_SLACK;
            if let Some((i, v)) = u0.iter().enumerate().find(|(_, v)| outside(**v)) {
                return Err(Error::InvalidInput(format!("initial value {v} at node {i} outside [0, {hi}]")));
            }
            if let Some(v) = bc.values().iter().find(|v| outside(**v)) {
                return Err(Error::InvalidInput(format!("boundary value {v} outside [0, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.mesh.nodes().iter().map(|p| self.initial.eval(p[0], p[1], 0.0, 0.0)).collect()
    }

    /// Dirichlet values at time `t`; `u` supplies the state argument.
    pub fn dirichlet(&self, t: f64, u: &[f64]) -> Result<DirichletConstraints> {
        let nodes = self.mesh.nodes();
        let mut pairs = Vec::with_capacity(self.mesh.boundary_nodes().len());
        for &(i, tag) in self.mesh.boundary_nodes() {
            let f = self
                .boundary
                .iter()
                .find(|(t, _)| *t == tag)
                .map(|(_, f)| f)
                .ok_or(Error::MissingBoundaryValue(i))?;
            pairs.push((i, f.eval(nodes[i][0], nodes[i][1], t, u[i])));
        }
        DirichletConstraints::for_mesh(&self.mesh, &pairs)
    }

    /// Frozen operators of step `n` (from `t_{n−1}` to `t_n`).
    pub fn freeze(&self, u_prev: &[f64], n: usize) -> Result<FrozenStep> {
        let mut ws = Workspace::new(&self.mesh);
        Ok(self.assemble(&mut ws, u_prev, n)?.0)
    }

    fn assemble(&self, ws: &mut Workspace, u_prev: &[f64], n: usize) -> Result<(FrozenStep, f64)> {
        let mesh = &*self.mesh;
        let model = &*self.model;
        let tau = self.tau();
        let (t_prev, t_n) = (self.time(n - 1), self.time(n));
        let eps = self.epsilon;
        let w = element_values(mesh, u_prev, |u| model.conductivity(u) + eps, self.weight_rule);
        weighted_stiffness_into(mesh, &w, &mut ws.pattern)?;
        let kbar: Vec<[f64; 2]> = element_values(mesh, u_prev, |u| model.convection_z(u), self.weight_rule)
            .into_iter()
            .map(|k| [0.0, k])
            .collect();
        let f_conv = convection_load(mesh, &kbar);
        let s: Vec<f64> = mesh
            .nodes()
            .iter()
            .zip(u_prev)
            .map(|(p, &u)| self.source.eval(p[0], p[1], t_prev, u))
            .collect();
        let f_src = source_load(&ws.mass, &s);
        let source_total: f64 = f_src.iter().sum();
        let load = f_src.iter().zip(&f_conv).map(|(s, c)| tau * (s - c)).collect();
        let frozen = FrozenStep {
            tau,
            mass: ws.mass.clone(),
            stiffness: ws.pattern.clone(),
            theta_prev: u_prev.iter().map(|&u| model.theta(u)).collect(),
            load,
            constraints: self.dirichlet(t_n, u_prev)?,
        };
        Ok((frozen, source_total))
    }
}

struct Workspace {
    mass: Vec<f64>,
    pattern: CsrMatrix,
}

impl Workspace {
    fn new(mesh: &Mesh) -> Self {
        Self { mass: lumped_mass(mesh), pattern: stiffness_pattern(mesh) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `Σ mᵢ θ(Uⁿᵢ)`
    pub theta_mass: f64,
    /// Net inflow through the Dirichlet boundary, recovered from the
    /// unconstrained residual at constrained rows.
    pub boundary_flux: f64,
    pub source_total: f64,
    /// `|Σ mᵢ Δθᵢ − τ (source_total + boundary_flux)|`
    pub balance_residual: f64,
    pub lscheme_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Vec<f64>,
    pub history: IterationHistory,
    pub diagnostics: StepDiagnostics,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `t₀ = 0, t₁, …, t_N`
    pub times: Vec<f64>,
    /// Nodal states at each time stamp, `states[0]` being the initial data.
    pub states: Vec<Vec<f64>>,
    pub histories: Vec<IterationHistory>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Lumped mass of the mesh, for discrete norms.
    pub mass: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }
}

/// Advances `u_prev` (at `t_{n−1}`) to `t_n`.
pub fn step(scenario: &Scenario, u_prev: &[f64], n: usize) -> Result<StepOutcome> {
    let mut ws = Workspace::new(&scenario.mesh);
    step_with(scenario, &mut ws, u_prev, n)
}

fn step_with(scenario: &Scenario, ws: &mut Workspace, u_prev: &[f64], n: usize) -> Result<StepOutcome> {
    if n == 0 || n > scenario.steps {
        return Err(Error::InvalidInput(format!("step {n} outside 1..={}", scenario.steps)));
    }
    if u_prev.len() != scenario.mesh.n_nodes() {
        return Err(Error::InvalidInput(format!(
            "state has {} values for {} nodes",
            u_prev.len(),
            scenario.mesh.n_nodes()
        )));
    }
    let model = &*scenario.model;
    let (frozen, source_total) = scenario.assemble(ws, u_prev, n)?;
    let out = lscheme_solve(model, &frozen, u_prev, &scenario.solver)?;
    let h = &out.history;
    if !h.converged && scenario.abort_on_nonconvergence {
        return Err(Error::LschemeNotConverged {
            step: n,
            iterations: h.iterations(),
            increment: h.increments.last().copied().unwrap_or(f64::NAN),
        });
    }

    let u = out.u;
    let r = frozen.residual(model, &u);
    // water injected at constrained nodes to hold their values
    let reaction: f64 = frozen.constraints.nodes().iter().map(|&i| r[i]).sum();
    let boundary_flux = reaction / frozen.tau;
    let delta_theta: f64 = (0..u.len())
        .map(|i| frozen.mass[i] * (model.theta(u[i]) - frozen.theta_prev[i]))
        .sum();
    let diagnostics = StepDiagnostics {
        step: n,
        t: scenario.time(n),
        min_u: u.iter().copied().fold(f64::INFINITY, f64::min),
        max_u: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        theta_mass: (0..u.len()).map(|i| frozen.mass[i] * model.theta(u[i])).sum(),
        boundary_flux,
        source_total,
        balance_residual: (delta_theta - frozen.tau * (source_total + boundary_flux)).abs(),
        lscheme_iters: h.iterations(),
        converged: h.converged,
    };
    Ok(StepOutcome { u, history: out.history, diagnostics })
}

/// Runs all `N` steps. Non-converged steps are recorded and the loop
/// continues unless `abort_on_nonconvergence` is set.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let mut ws = Workspace::new(&scenario.mesh);
    let u0 = scenario.initial_state();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0],
        histories: Vec::with_capacity(scenario.steps),
        diagnostics: Vec::with_capacity(scenario.steps),
        mass: ws.mass.clone(),
    };
    for n in 1..=scenario.steps {
        let out = step_with(scenario, &mut ws, traj.final_state(), n)?;
        if !out.diagnostics.converged {
            log::warn!("step {n}: L-scheme stopped after {} iterations without converging", out.diagnostics.lscheme_iters);
        }
        traj.times.push(scenario.time(n));
        traj.states.push(out.u);
        traj.histories.push(out.history);
        traj.diagnostics.push(out.diagnostics);
    }
    Ok(traj)
}

/// [`run`] with diffusion weight `K + eps`.
pub fn run_regularized(scenario: &Scenario, eps: f64) -> Result<Trajectory> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("regularization {eps} must be positive")));
    }
    let s = Scenario { epsilon: eps, ..scenario.clone() };
    run(&s)
}
