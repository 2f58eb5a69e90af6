//! van Genuchten–Mualem retention and relative permeability.

use super::SoilParams;
use crate::error::{Error, Result};

/// `1 - (1 - θ^(1/m))^m`, evaluated without cancellation for small θ.
pub(crate) fn mualem_bracket(theta: f64, m: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let x = (theta.ln() / m).exp();
    -(m * (-x).ln_1p()).exp_m1()
}

/// `ln K_r(θ)` for θ in (0, 1].
pub(crate) fn ln_relative_permeability(theta: f64, m: f64) -> f64 {
    0.5 * theta.ln() + 2.0 * mualem_bracket(theta, m).ln()
}

/// Mualem relative permeability `K_r(θ) = θ^(1/2) [1 - (1 - θ^(1/m))^m]^2`.
pub fn vg_relative_permeability(theta: f64, m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::SaturationOutOfRange(theta));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let br = mualem_bracket(theta, m);
    Ok(theta.sqrt() * br * br)
}

/// Pressure head `ψ(θ) = -h_cap (θ^(-1/m) - 1)^(1/n)`; diagnostic only.
///
/// Zero saturation has no finite pressure head and is reported as
/// [`Error::SingularPressure`].
pub fn vg_pressure_head(theta: f64, params: &SoilParams) -> Result<f64> {
    if theta == 0.0 {
        return Err(Error::SingularPressure);
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::SaturationOutOfRange(theta));
    }
    let m = params.m;
    let n = params.n();
    let s = (-theta.ln() / m).exp_m1();
    Ok(-params.h_cap * s.powf(1.0 / n))
}
