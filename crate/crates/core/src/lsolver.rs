//! L-scheme linearization of one semi-implicit time step.
//!
//! Each iteration solves the SPD system
//!
//! ```text
//! (L·M + τ·A_ω) Uⁱ = L·M·Uⁱ⁻¹ − M·θ(Uⁱ⁻¹) + M·θ(U_{n−1}) + τ·(F_src − F_conv)
//! ```
//!
//! with lumped mass `M`, frozen weighted stiffness `A_ω`, and Dirichlet
//! rows eliminated symmetrically.

use log::warn;

use crate::assembly::{apply_dirichlet, ConstrainedSystem, DirichletConstraints};
use crate::constitutive::Constitutive;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LschemeConfig {
    /// Stabilization parameter `L`.
    pub l: f64,
    pub atol: f64,
    pub rtol: f64,
    pub max_iters: usize,
    /// Relative residual target of the inner CG solve.
    pub lin_tol: f64,
    pub lin_max_iters: usize,
    /// Keep every iterate in the history (needed for rate studies).
    pub record_iterates: bool,
}

impl Default for LschemeConfig {
    fn default() -> Self {
        Self {
            l: 1.0,
            atol: 1e-10,
            rtol: 1e-8,
            max_iters: 200,
            lin_tol: 1e-12,
            lin_max_iters: 10_000,
            record_iterates: false,
        }
    }
}

impl LschemeConfig {
    /// Rejects `L ≤ L_θ/2` and non-positive tolerances; warns when
    /// `L_θ/2 < L < L_θ`, where contraction is not guaranteed.
    pub fn validate(&self, l_theta: f64) -> Result<()> {
        if !(self.l > 0.5 * l_theta) || !self.l.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "L = {} must exceed L_theta/2 = {}",
                self.l,
                0.5 * l_theta
            )));
        }
        if !(self.atol >= 0.0 && self.rtol >= 0.0 && self.atol + self.rtol > 0.0) {
            return Err(Error::InvalidConfig("atol and rtol must be non-negative and not both zero".into()));
        }
        if !(self.lin_tol > 0.0) {
            return Err(Error::InvalidConfig("lin_tol must be positive".into()));
        }
        if self.max_iters == 0 || self.lin_max_iters == 0 {
            return Err(Error::InvalidConfig("iteration limits must be positive".into()));
        }
        if self.l < l_theta {
            warn!("L = {} is below L_theta = {l_theta}; contraction is not guaranteed", self.l);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖`.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients, starting from `x`.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iters: usize) -> Result<CgOutcome> {
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgOutcome { iterations: 0, residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = a.mul(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut res = norm(&r) / b_norm;
    if res <= tol {
        return Ok(CgOutcome { iterations: 0, residual: res });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iters {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::CgNotConverged { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r) / b_norm;
        if res <= tol {
            return Ok(CgOutcome { iterations: it, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNotConverged { iterations: max_iters, residual: res })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Discrete `L²` norm with lumped mass: `sqrt(Σ mᵢ vᵢ²)`.
pub fn mass_norm(mass: &[f64], v: &[f64]) -> f64 {
    mass.iter().zip(v).map(|(m, x)| m * x * x).sum::<f64>().sqrt()
}

/// `sqrt(Σ mᵢ (aᵢ − bᵢ)²)`
pub fn mass_distance(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    mass.iter().zip(a.iter().zip(b)).map(|(m, (x, y))| m * (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Everything about one time step that stays fixed during the iteration.
#[derive(Debug, Clone)]
pub struct FrozenStep {
    pub tau: f64,
    pub mass: Vec<f64>,
    /// `A_ω` without the factor `τ` and before constraints.
    pub stiffness: CsrMatrix,
    /// `θ(U_{n−1})`
    pub theta_prev: Vec<f64>,
    /// `τ·(F_src − F_conv)`
    pub load: Vec<f64>,
    pub constraints: DirichletConstraints,
}

impl FrozenStep {
    /// `M(θ(u) − θ(U_{n−1})) + τA_ω u − load`, unconstrained. At free rows
    /// this vanishes for the exact step solution; at constrained rows it is
    /// the reaction, `τ` times the inflow through that node.
    pub fn residual(&self, model: &dyn Constitutive, u: &[f64]) -> Vec<f64> {
        let au = self.stiffness.mul(u);
        (0..u.len())
            .map(|i| self.mass[i] * (model.theta(u[i]) - self.theta_prev[i]) + self.tau * au[i] - self.load[i])
            .collect()
    }
}

/// The constrained operator `L·M + τ·A_ω` of one step.
#[derive(Debug, Clone)]
pub struct LschemeSystem<'a> {
    frozen: &'a FrozenStep,
    l: f64,
    system: ConstrainedSystem,
}

impl<'a> LschemeSystem<'a> {
    pub fn new(frozen: &'a FrozenStep, l: f64) -> Self {
        let lm: Vec<f64> = frozen.mass.iter().map(|m| l * m).collect();
        let a = frozen.stiffness.scaled_plus_diagonal(frozen.tau, &lm);
        let system = apply_dirichlet(&a, &frozen.constraints);
        Self { frozen, l, system }
    }

    pub fn system(&self) -> &ConstrainedSystem {
        &self.system
    }

    /// One L-scheme iteration from `u_prev_iter`. Returns the new iterate and
    /// the CG iteration count.
    pub fn step(&self, model: &dyn Constitutive, u_prev_iter: &[f64], lin_tol: f64, lin_max_iters: usize) -> Result<(Vec<f64>, usize)> {
        let f = self.frozen;
        let raw: Vec<f64> = (0..u_prev_iter.len())
            .map(|i| {
                let u = u_prev_iter[i];
                f.mass[i] * (self.l * u - model.theta(u) + f.theta_prev[i]) + f.load[i]
            })
            .collect();
        let b = self.system.rhs(&raw);
        let mut x = u_prev_iter.to_vec();
        f.constraints.impose(&mut x);
        let out = cg_solve(self.system.matrix(), &b, &mut x, lin_tol, lin_max_iters)?;
        Ok((x, out.iterations))
    }
}

/// One L-scheme iteration; see [`LschemeSystem::step`].
pub fn lscheme_step(model: &dyn Constitutive, frozen: &FrozenStep, u_prev_iter: &[f64], cfg: &LschemeConfig) -> Result<(Vec<f64>, usize)> {
    LschemeSystem::new(frozen, cfg.l).step(model, u_prev_iter, cfg.lin_tol, cfg.lin_max_iters)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationHistory {
    /// `‖Uⁱ − Uⁱ⁻¹‖` in the lumped `L²` norm, `i = 1, 2, …`.
    pub increments: Vec<f64>,
    /// `|Uⁱ|_ω = sqrt(Uⁱᵀ A_ω Uⁱ)`.
    pub seminorms: Vec<f64>,
    pub cg_iters: Vec<usize>,
    /// `U⁰, U¹, …` when requested by the configuration.
    pub iterates: Option<Vec<Vec<f64>>>,
    pub converged: bool,
}

impl IterationHistory {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }
}

#[derive(Debug, Clone)]
pub struct LschemeOutcome {
    pub u: Vec<f64>,
    pub history: IterationHistory,
}

/// Iterates from `u0` until `‖Uⁱ − Uⁱ⁻¹‖ ≤ atol + rtol·‖Uⁱ‖` or `max_iters`.
/// Exhausting the budget is not an error: the last iterate is returned with
/// `history.converged == false`.
pub fn lscheme_solve(model: &dyn Constitutive, frozen: &FrozenStep, u0: &[f64], cfg: &LschemeConfig) -> Result<LschemeOutcome> {
    cfg.validate(model.lipschitz_theta())?;
    let sys = LschemeSystem::new(frozen, cfg.l);
    let mut u = u0.to_vec();
    let mut history = IterationHistory {
        iterates: cfg.record_iterates.then(|| vec![u0.to_vec()]),
        ..Default::default()
    };
    for _ in 0..cfg.max_iters {
        let (next, cg) = sys.step(model, &u, cfg.lin_tol, cfg.lin_max_iters)?;
        let inc = mass_distance(&frozen.mass, &next, &u);
        let size = mass_norm(&frozen.mass, &next);
        history.increments.push(inc);
        history.seminorms.push(frozen.stiffness.quadratic_form(&next).max(0.0).sqrt());
        history.cg_iters.push(cg);
        if let Some(it) = history.iterates.as_mut() {
            it.push(next.clone());
        }
        u = next;
        if inc <= cfg.atol + cfg.rtol * size {
            history.converged = true;
            break;
        }
    }
    Ok(LschemeOutcome { u, history })
}
