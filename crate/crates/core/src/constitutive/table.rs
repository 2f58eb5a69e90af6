//! Tabulated effective saturation `θ = U⁻¹` and its global extension.
//!
//! Rather than inverting the endpoint-singular integral `U`, the table is
//! produced by integrating the autonomous ODE `θ'(η) = (1 - θ^c)^b`,
//! `θ(0) = 0`, with classical RK4. The integration state is the deficit
//! `w = 1 - θ`, which keeps full relative precision as θ → 1, and the step
//! is graded so each step removes at most a fixed fraction of `w`.

use super::vgm::ln_relative_permeability;
use super::SoilParams;
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature;

/// Integration stops once the deficit `1 - θ` drops below this.
pub const SATURATION_CUTOFF: f64 = 1e-12;

/// Below this saturation the conductivity is reported as exactly zero.
pub const THETA_FLOOR: f64 = 1e-12;

/// Fraction of the remaining deficit a single graded step may consume.
const GRADING: f64 = 0.02;

pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstitutiveTable {
    b: f64,
    c: f64,
    u_star: f64,
    curve: MonotoneCubic,
}

/// `1 - (1 - w)^c` without cancellation.
fn one_minus_pow(w: f64, c: f64) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    -(c * (-w).ln_1p()).exp_m1()
}

/// Right-hand side in deficit form: `dθ/dη = (1 - (1-w)^c)^b`.
fn slope_from_deficit(w: f64, b: f64, c: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if w <= 0.0 {
        return 0.0;
    }
    one_minus_pow(w.min(1.0), c).powf(b)
}

/// `∫_{1-w}^{1} (1 - s^c)^(-b) ds` for tiny `w`, from the expansion
/// `1 - (1-v)^c = c v (1 - (c-1) v / 2 + O(v²))`.
fn tail_integral(w: f64, b: f64, c: f64) -> f64 {
    c.powf(-b) * (w.powf(1.0 - b) / (1.0 - b) + b * (c - 1.0) / (2.0 * (2.0 - b)) * w.powf(2.0 - b))
}

impl ConstitutiveTable {
    /// Tabulates θ on `[0, u*]`. `n_samples` sets the bulk step `1/n_samples`;
    /// graded steps near saturation add further samples.
    pub fn build(params: &SoilParams, n_samples: usize) -> Result<Self> {
        params.validate()?;
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "table needs at least {MIN_SAMPLES} samples, got {n_samples}"
            )));
        }
        let (b, c) = (params.b, params.c);
        let h_max = 1.0 / n_samples as f64;
        let budget = 20 * n_samples + 200_000;
        let f = |w: f64| slope_from_deficit(w, b, c);

        let mut eta = vec![0.0];
        let mut theta = vec![0.0];
        let mut slope = vec![1.0];
        let (mut e, mut w) = (0.0f64, 1.0f64);
        let mut steps = 0usize;
        while w > SATURATION_CUTOFF {
            if steps >= budget {
                return Err(Error::TableBuild { steps, theta: 1.0 - w });
            }
            let fw = f(w);
            let h = if fw > 0.0 { h_max.min(GRADING * w / fw) } else { h_max };
            let k1 = fw;
            let k2 = f(w - 0.5 * h * k1);
            let k3 = f(w - 0.5 * h * k2);
            let k4 = f(w - h * k3);
            let w_next = w - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !(w_next < w) || w_next <= 0.0 {
                return Err(Error::TableBuild { steps, theta: 1.0 - w });
            }
            e += h;
            w = w_next;
            steps += 1;
            eta.push(e);
            theta.push(1.0 - w);
            slope.push(f(w));
        }
        let u_star = e + tail_integral(w, b, c);
        eta.push(u_star);
        theta.push(1.0);
        slope.push(f(0.0));
        // drop samples that rounded onto the same saturation value
        let mut keep = vec![true; eta.len()];
        for i in 1..eta.len() - 1 {
            if theta[i] <= theta[i - 1] || theta[i] >= 1.0 {
                keep[i] = false;
            }
        }
        let pick = |v: Vec<f64>| -> Vec<f64> {
            v.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(x, _)| x).collect()
        };
        let curve = MonotoneCubic::new(pick(eta), pick(theta), pick(slope))?;
        Ok(Self { b, c, u_star, curve })
    }

    /// Assembles a table from raw samples without the monotonicity checks
    /// the builder guarantees. Used to exercise certification failure paths.
    #[cfg(test)]
    pub(crate) fn from_raw(b: f64, c: f64, u_star: f64, eta: Vec<f64>, theta: Vec<f64>, slope: Vec<f64>) -> Self {
        let curve = MonotoneCubic::new(eta, theta, slope).unwrap();
        Self { b, c, u_star, curve }
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eta_grid(&self) -> &[f64] {
        self.curve.x()
    }

    pub fn theta_grid(&self) -> &[f64] {
        self.curve.y()
    }

    /// `sup θ'`, equal to 1 for this family.
    pub fn l_theta(&self) -> f64 {
        1.0
    }

    /// Growth constant `α = 1/(2u*)`.
    pub fn alpha(&self) -> f64 {
        0.5 / self.u_star
    }

    /// Hölder exponent `δ = 1 - b` of `U` on `[0, 2]`.
    pub fn delta_holder(&self) -> f64 {
        1.0 - self.b
    }

    /// Hölder constant `C_H = 2/(1 - b)`.
    pub fn c_holder(&self) -> f64 {
        2.0 / (1.0 - self.b)
    }

    /// `H_θ = max(1, C_H)`.
    pub fn h_theta(&self) -> f64 {
        self.c_holder().max(1.0)
    }

    pub(crate) fn curve(&self) -> &MonotoneCubic {
        &self.curve
    }

    /// Globally extended saturation: identity below 0, the tabulated
    /// inverse on `[0, u*]`, and point symmetry about `(u*, 1)` above.
    pub fn theta(&self, eta: f64) -> f64 {
        if eta < 0.0 {
            eta
        } else if eta <= self.u_star {
            self.curve.eval(eta)
        } else {
            2.0 - self.theta(2.0 * self.u_star - eta)
        }
    }

    /// `θ'(η)`: `(1 - θ^c)^b` on `[0, u*]`, mirrored on `(u*, 2u*)`, 1 elsewhere.
    pub fn theta_prime(&self, eta: f64) -> f64 {
        if eta <= 0.0 || eta >= 2.0 * self.u_star {
            1.0
        } else if eta <= self.u_star {
            let th = self.curve.eval(eta);
            slope_from_deficit(1.0 - th, self.b, self.c)
        } else {
            self.theta_prime(2.0 * self.u_star - eta)
        }
    }

    /// The transform `U = θ⁻¹`, extended consistently with [`Self::theta`].
    pub fn transform(&self, theta: f64) -> f64 {
        if theta < 0.0 {
            theta
        } else if theta <= 1.0 {
            self.curve.inverse(theta)
        } else if theta <= 2.0 {
            2.0 * self.u_star - self.curve.inverse(2.0 - theta)
        } else {
            theta - 2.0 + 2.0 * self.u_star
        }
    }

    /// Conductivity `K(η) = (C/φ) K_s K_r(θ) θ^(-a)` on `[0, u*]`, constant
    /// `C*` above `u*`, even in η. Evaluated in log form and clamped to 0
    /// for θ below [`THETA_FLOOR`].
    pub fn conductivity(&self, eta: f64, params: &SoilParams) -> f64 {
        let e = eta.abs();
        if e >= self.u_star {
            return params.k_saturated();
        }
        let th = self.curve.eval(e);
        if th < THETA_FLOOR {
            return 0.0;
        }
        let ln_k = ln_relative_permeability(th, params.m) - params.a * th.ln();
        params.k_saturated() * ln_k.exp()
    }

    /// Vertical component of `K̄₁(η) = θ^a / C`, constant `1/C` above `u*`, even in η.
    pub fn kbar1_z(&self, eta: f64, params: &SoilParams) -> f64 {
        let e = eta.abs();
        if e >= self.u_star {
            return 1.0 / params.c_scale;
        }
        let th = self.curve.eval(e).max(0.0);
        th.powf(params.a) / params.c_scale
    }

    /// Vertical convection coefficient `K̄_z = K · K̄₁_z`.
    pub fn kbar_z(&self, eta: f64, params: &SoilParams) -> f64 {
        self.conductivity(eta, params) * self.kbar1_z(eta, params)
    }

    /// Kirchhoff transform `Φ(u) = ∫₀ᵘ K`.
    pub fn kirchhoff(&self, u: f64, params: &SoilParams) -> f64 {
        let e = u.abs();
        let inner = quadrature::integrate(|s| self.conductivity(s, params), 0.0, e.min(self.u_star), 1e-13);
        let outer = params.k_saturated() * (e - self.u_star).max(0.0);
        u.signum() * (inner + outer)
    }
}
