//! Sampling-based certification of the structural hypotheses on θ and K.
//!
//! Every check is an inequality over a continuum, so it is probed on a
//! deterministic pseudo-random sample (fixed seed) plus a few structured
//! points where the bounds are tightest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConstitutiveTable, SoilParams, THETA_FLOOR};

pub const FD_STEP: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-6;
pub const GROWTH_TOL: f64 = 1e-12;
pub const HOLDER_TOL: f64 = 1e-10;
pub const JUNCTION_TOL: f64 = 1e-4;
/// Finite-difference probes keep this distance from the kinks at 0, u*, 2u*.
pub const JUNCTION_MARGIN: f64 = 1e-3;

const SEED: u64 = 0x5eed_7e7a;

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionResidual {
    pub eta: f64,
    /// `|θ(η⁻) - θ(η⁺)|` between the two branch formulas.
    pub value_jump: f64,
    /// Largest disagreement among the left and right difference quotients
    /// (step [`FD_STEP`]) and the derivative formula at η. Where `θ'` vanishes
    /// like `(u* - η)^(b/(1-b))` this is of order `FD_STEP^(b/(1-b))`.
    pub slope_jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub n_probe: usize,
    /// max |θ'_analytic - θ'_FD| over probes away from junctions.
    pub theta_prime_fd_error: f64,
    pub theta_prime_min: f64,
    pub theta_prime_max: f64,
    /// min over probes of `θ(η)η - αη²` on `[-3u*, 3u*]`.
    pub growth_margin: f64,
    /// max over probe pairs of `|U(θ₁) - U(θ₂)| - C_H |θ₁ - θ₂|^δ` on `[0, 2]`.
    pub holder_excess: f64,
    pub junctions: [JunctionResidual; 2],
    /// `K(η) = 0` exactly when `θ(η) = 0` on every probe.
    pub k_vanishes_only_at_dry: bool,
}

impl CertificationReport {
    pub fn theta_prime_ok(&self) -> bool {
        self.theta_prime_fd_error <= FD_TOL && self.theta_prime_min >= 0.0 && self.theta_prime_max <= 1.0
    }

    pub fn growth_ok(&self) -> bool {
        self.growth_margin >= -GROWTH_TOL
    }

    pub fn holder_ok(&self) -> bool {
        self.holder_excess <= HOLDER_TOL
    }

    pub fn junctions_ok(&self) -> bool {
        self.junctions
            .iter()
            .all(|j| j.value_jump <= JUNCTION_TOL && j.slope_jump <= JUNCTION_TOL)
    }

    pub fn passed(&self) -> bool {
        self.theta_prime_ok() && self.growth_ok() && self.holder_ok() && self.junctions_ok() && self.k_vanishes_only_at_dry
    }

    /// `(check, value, threshold, pass)` rows for reporting.
    pub fn rows(&self) -> Vec<(&'static str, f64, f64, bool)> {
        let [j0, j1] = &self.junctions;
        vec![
            ("theta_prime_fd_error", self.theta_prime_fd_error, FD_TOL, self.theta_prime_fd_error <= FD_TOL),
            ("theta_prime_min", self.theta_prime_min, 0.0, self.theta_prime_min >= 0.0),
            ("theta_prime_max", self.theta_prime_max, 1.0, self.theta_prime_max <= 1.0),
            ("growth_margin", self.growth_margin, -GROWTH_TOL, self.growth_ok()),
            ("holder_excess", self.holder_excess, HOLDER_TOL, self.holder_ok()),
            ("junction0_value_jump", j0.value_jump, JUNCTION_TOL, j0.value_jump <= JUNCTION_TOL),
            ("junction0_slope_jump", j0.slope_jump, JUNCTION_TOL, j0.slope_jump <= JUNCTION_TOL),
            ("junction_ustar_value_jump", j1.value_jump, JUNCTION_TOL, j1.value_jump <= JUNCTION_TOL),
            ("junction_ustar_slope_jump", j1.slope_jump, JUNCTION_TOL, j1.slope_jump <= JUNCTION_TOL),
            (
                "k_vanishes_only_at_dry",
                if self.k_vanishes_only_at_dry { 1.0 } else { 0.0 },
                1.0,
                self.k_vanishes_only_at_dry,
            ),
        ]
    }
}

fn near_junction(eta: f64, u_star: f64) -> bool {
    [0.0, u_star, 2.0 * u_star]
        .iter()
        .any(|j| (eta - j).abs() < JUNCTION_MARGIN + FD_STEP)
}

/// Runs every structural probe against `table`.
pub fn certify_hypotheses(params: &SoilParams, table: &ConstitutiveTable, n_probe: usize) -> CertificationReport {
    let u = table.u_star();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // (i) derivative formula vs centered differences, and its range
    let mut fd_err = 0.0f64;
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut probes: Vec<f64> = (0..n_probe).map(|_| rng.gen_range(-u..3.0 * u)).collect();
    probes.extend([0.0, u, 2.0 * u, 0.5 * u, 1.5 * u]);
    for &e in &probes {
        let d = table.theta_prime(e);
        dmin = dmin.min(d);
        dmax = dmax.max(d);
        if near_junction(e, u) {
            continue;
        }
        let fd = (table.theta(e + FD_STEP) - table.theta(e - FD_STEP)) / (2.0 * FD_STEP);
        fd_err = fd_err.max((fd - d).abs());
    }

    // (ii) growth θ(η)η ≥ αη²
    let alpha = table.alpha();
    let mut growth = f64::INFINITY;
    let mut gp: Vec<f64> = (0..n_probe).map(|_| rng.gen_range(-3.0 * u..=3.0 * u)).collect();
    gp.extend([-3.0 * u, 0.0, 1e-9, u, 2.0 * u, 3.0 * u]);
    for e in gp {
        growth = growth.min(table.theta(e) * e - alpha * e * e);
    }

    // (iii) Hölder continuity of U on [0, 2]
    let (ch, delta) = (table.c_holder(), table.delta_holder());
    let mut holder = f64::NEG_INFINITY;
    let mut check = |t1: f64, t2: f64| {
        let lhs = (table.transform(t1) - table.transform(t2)).abs();
        let rhs = ch * (t1 - t2).abs().powf(delta);
        holder = holder.max(lhs - rhs);
    };
    for _ in 0..n_probe {
        check(rng.gen_range(0.0..=2.0), rng.gen_range(0.0..=2.0));
    }
    // pairs straddling and touching the saturation point, where U' blows up
    for k in 0..=24 {
        let d = 10f64.powf(-(k as f64) / 2.0);
        check(1.0 - d, 1.0 + d);
        check(1.0 - d, 1.0);
        check(1.0, 1.0 + d);
        check(0.0, d);
    }

    // (iv) C¹ junctions: value jump between the branch formulas, and the
    // spread between the one-sided difference quotients and θ'(j).
    let curve = table.curve();
    let junction = |j: f64, value_jump: f64| {
        let h = FD_STEP;
        let left = (table.theta(j) - table.theta(j - h)) / h;
        let right = (table.theta(j + h) - table.theta(j)) / h;
        let exact = table.theta_prime(j);
        JunctionResidual {
            eta: j,
            value_jump,
            slope_jump: (left - right).abs().max((left - exact).abs()).max((right - exact).abs()),
        }
    };
    let j0 = junction(0.0, curve.eval(0.0).abs());
    let below = curve.eval(u);
    let above = 2.0 - curve.eval(2.0 * u - u);
    let ju = junction(u, (below - above).abs().max((below - 1.0).abs()));

    // K vanishes only where θ does
    let mut k_ok = table.conductivity(0.0, params) == 0.0;
    for &e in &probes {
        let th = table.theta(e.abs());
        let k = table.conductivity(e, params);
        if k < 0.0 || (th >= THETA_FLOOR) != (k > 0.0) {
            k_ok = false;
        }
    }

    CertificationReport {
        n_probe,
        theta_prime_fd_error: fd_err,
        theta_prime_min: dmin,
        theta_prime_max: dmax,
        growth_margin: growth,
        holder_excess: holder,
        junctions: [j0, ju],
        k_vanishes_only_at_dry: k_ok,
    }
}
