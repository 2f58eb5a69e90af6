use crate::error::{Error, Result};

/// Constitutive constants of the transformed van Genuchten–Mualem family.
///
/// `b` and `c` shape the change of variable `U(θ) = ∫₀^θ (1 - s^c)^(-b) ds`,
/// `a` is the exponent of the singular factor `θ^(-a)` in the conductivity,
/// and `m` (with `n = 1/(1 - m)`) is the van Genuchten shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilParams {
    pub b: f64,
    pub c: f64,
    pub a: f64,
    pub m: f64,
    /// Capillary length.
    pub h_cap: f64,
    /// Saturated hydraulic conductivity.
    pub k_s: f64,
    /// Hydraulic scaling constant `C`. No physical default exists; callers
    /// must supply it.
    pub c_scale: f64,
    /// `θ_s - θ_r`.
    pub porosity: f64,
}

impl Default for SoilParams {
    /// `c = 5/3`, `b = 3/5`, `m = 0.6`, `a = 5/3`, `K_s·C = 1`, unit porosity
    /// and capillary length.
    fn default() -> Self {
        Self {
            b: 0.6,
            c: 5.0 / 3.0,
            a: 5.0 / 3.0,
            m: 0.6,
            h_cap: 1.0,
            k_s: 1.0,
            c_scale: 1.0,
            porosity: 1.0,
        }
    }
}

impl SoilParams {
    /// van Genuchten `n = 1/(1 - m)`.
    pub fn n(&self) -> f64 {
        1.0 / (1.0 - self.m)
    }

    /// `1/2 + 2/m - a`: leading-order exponent of `K_r(θ) θ^(-a)` as θ → 0.
    pub fn removability_exponent(&self) -> f64 {
        0.5 + 2.0 / self.m - self.a
    }

    /// Saturated conductivity value `C* = (C/φ) K_s`.
    pub fn k_saturated(&self) -> f64 {
        self.c_scale / self.porosity * self.k_s
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("b", self.b),
            ("c", self.c),
            ("a", self.a),
            ("m", self.m),
            ("h_cap", self.h_cap),
            ("k_s", self.k_s),
            ("c_scale", self.c_scale),
            ("porosity", self.porosity),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.b) {
            return Err(Error::InvalidParams(format!("b must lie in [0,1), got {}", self.b)));
        }
        if self.c < 1.0 {
            return Err(Error::InvalidParams(format!("c must be >= 1, got {}", self.c)));
        }
        if self.a < 1.0 {
            return Err(Error::InvalidParams(format!("a must be >= 1, got {}", self.a)));
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return Err(Error::InvalidParams(format!("m must lie in (0,1), got {}", self.m)));
        }
        for (name, v) in [
            ("h_cap", self.h_cap),
            ("k_s", self.k_s),
            ("c_scale", self.c_scale),
            ("porosity", self.porosity),
        ] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let r = self.removability_exponent();
        if r <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "removability exponent 1/2 + 2/m - a = {r} must be positive \
                 (K_r(theta) theta^-a does not vanish at theta = 0)"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_is_valid() {
        let p = SoilParams::default();
        p.validate().unwrap();
        assert!((p.n() - 2.5).abs() < 1e-15);
        assert!(p.removability_exponent() > 2.0);
    }

    #[test]
    fn rejects_b_out_of_range() {
        let p = SoilParams { b: 1.5, ..Default::default() };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("b must lie in [0,1)"), "{msg}");
        assert!(SoilParams { b: 1.0, ..Default::default() }.validate().is_err());
        assert!(SoilParams { b: -0.1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn rejects_non_removable_singularity() {
        // 1/2 + 2/0.5 - 5 = -0.5
        let p = SoilParams { m: 0.5, a: 5.0, ..Default::default() };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("removability exponent"), "{msg}");
    }

    #[test]
    fn rejects_small_c_and_a() {
        assert!(SoilParams { c: 0.9, ..Default::default() }.validate().is_err());
        assert!(SoilParams { a: 0.5, ..Default::default() }.validate().is_err());
        assert!(SoilParams { m: 1.0, ..Default::default() }.validate().is_err());
        assert!(SoilParams { c_scale: 0.0, ..Default::default() }.validate().is_err());
    }
}
