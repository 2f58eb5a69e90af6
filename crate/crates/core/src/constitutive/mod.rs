//! Saturation, conductivity and convection laws in the bounded variable `u`.

mod certify;
mod params;
mod table;
mod vgm;

pub use certify::{
    certify_hypotheses, CertificationReport, JunctionResidual, FD_STEP, FD_TOL, GROWTH_TOL, HOLDER_TOL,
    JUNCTION_MARGIN, JUNCTION_TOL,
};
pub use params::SoilParams;
pub use table::{ConstitutiveTable, MIN_SAMPLES, SATURATION_CUTOFF, THETA_FLOOR};
pub use vgm::{vg_pressure_head, vg_relative_permeability};

use std::fmt::Debug;

use crate::error::Result;

/// The coefficient functions the time stepper needs: `θ(u)`, `K(u)` and
/// the vertical convection coefficient `K̄_z(u)`.
pub trait Constitutive: Debug + Send + Sync {
    fn theta(&self, u: f64) -> f64;
    fn theta_prime(&self, u: f64) -> f64;
    /// Lipschitz constant `L_θ` of θ.
    fn lipschitz_theta(&self) -> f64;
    fn conductivity(&self, u: f64) -> f64;
    fn convection_z(&self, u: f64) -> f64;
    /// Upper end of the physical range of `u`, when one exists.
    fn upper_bound(&self) -> Option<f64> {
        None
    }
}

/// Transformed van Genuchten–Mualem model backed by a saturation table.
#[derive(Debug, Clone)]
pub struct SoilModel {
    params: SoilParams,
    table: ConstitutiveTable,
}

pub const DEFAULT_TABLE_SAMPLES: usize = 4096;

impl SoilModel {
    pub fn new(params: SoilParams, n_samples: usize) -> Result<Self> {
        let table = ConstitutiveTable::build(&params, n_samples)?;
        Ok(Self { params, table })
    }

    pub fn params(&self) -> &SoilParams {
        &self.params
    }

    pub fn table(&self) -> &ConstitutiveTable {
        &self.table
    }

    pub fn u_star(&self) -> f64 {
        self.table.u_star()
    }

    pub fn kbar1_z(&self, u: f64) -> f64 {
        self.table.kbar1_z(u, &self.params)
    }

    pub fn kirchhoff(&self, u: f64) -> f64 {
        self.table.kirchhoff(u, &self.params)
    }

    pub fn certify(&self, n_probe: usize) -> CertificationReport {
        certify_hypotheses(&self.params, &self.table, n_probe)
    }
}

impl Constitutive for SoilModel {
    fn theta(&self, u: f64) -> f64 {
        self.table.theta(u)
    }

    fn theta_prime(&self, u: f64) -> f64 {
        self.table.theta_prime(u)
    }

    fn lipschitz_theta(&self) -> f64 {
        self.table.l_theta()
    }

    fn conductivity(&self, u: f64) -> f64 {
        self.table.conductivity(u, &self.params)
    }

    fn convection_z(&self, u: f64) -> f64 {
        self.table.kbar_z(u, &self.params)
    }

    fn upper_bound(&self) -> Option<f64> {
        Some(self.table.u_star())
    }
}

/// `θ(u) = u` with constant coefficients; the non-degenerate reference case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub conductivity: f64,
    pub convection_z: f64,
}

impl Default for LinearModel {
    fn default() -> Self {
        Self { conductivity: 1.0, convection_z: 0.0 }
    }
}

impl Constitutive for LinearModel {
    fn theta(&self, u: f64) -> f64 {
        u
    }

    fn theta_prime(&self, _u: f64) -> f64 {
        1.0
    }

    fn lipschitz_theta(&self) -> f64 {
        1.0
    }

    fn conductivity(&self, _u: f64) -> f64 {
        self.conductivity
    }

    fn convection_z(&self, _u: f64) -> f64 {
        self.convection_z
    }
}
