//! Independent oracles for the tabulated constitutive functions.

use richards_core::constitutive::{ConstitutiveTable, SoilParams};

/// `u* = ∫₀¹ (1 - s^c)^(-b) ds` after the substitution
/// `s = 1 - w^(1/(1-b))`, which removes the endpoint singularity.
pub fn u_star_by_substitution(b: f64, c: f64) -> f64 {
    let p = 1.0 / (1.0 - b);
    let g = |w: f64| -> f64 {
        if w <= 0.0 {
            // limit of p w^{p b}/(1 - s^c)^b as w -> 0
            return p * c.powf(-b);
        }
        let v = w.powf(p); // 1 - s
        let one_minus_sc = -(c * (-v).ln_1p()).exp_m1();
        // (1/(1-b)) w^{b/(1-b)} (1 - s^c)^{-b} = p (v / (1 - s^c))^b
        p * (v / one_minus_sc).powf(b)
    };
    adaptive_simpson(&g, 0.0, 1.0, 1e-14)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 40)
}

#[test]
fn u_star_matches_substitution_quadrature() {
    for (b, c) in [(0.0, 1.0), (0.6, 5.0 / 3.0), (0.3, 2.0), (0.5, 1.5), (0.8, 3.0)] {
        let p = SoilParams { b, c, ..Default::default() };
        let table = ConstitutiveTable::build(&p, 4096).unwrap();
        let oracle = u_star_by_substitution(b, c);
        let err = (table.u_star() - oracle).abs();
        println!("b={b} c={c}: table {:.15} oracle {:.15} err {err:.3e}", table.u_star(), oracle);
        assert!(err <= 1e-8, "b={b} c={c}: |{} - {}| = {err}", table.u_star(), oracle);
    }
    assert_eq!(u_star_by_substitution(0.0, 1.0), 1.0);
}

#[test]
fn kirchhoff_at_u_star_matches_composite_simpson() {
    let p = SoilParams::default();
    let t = ConstitutiveTable::build(&p, 4096).unwrap();
    let u = t.u_star();
    let n = 200_000;
    let h = u / n as f64;
    let mut sum = t.conductivity(0.0, &p) + t.conductivity(u, &p);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * t.conductivity(i as f64 * h, &p);
    }
    let oracle = sum * h / 3.0;
    let phi = t.kirchhoff(u, &p);
    assert!((phi - oracle).abs() <= 1e-8, "{phi} vs {oracle}");
}

#[test]
fn theta_prime_matches_centered_difference_across_range() {
    let p = SoilParams::default();
    let t = ConstitutiveTable::build(&p, 4096).unwrap();
    let u = t.u_star();
    let h = 1e-6;
    for k in 1..400 {
        let e = -u + k as f64 * 4.0 * u / 400.0;
        if [0.0, u, 2.0 * u].iter().any(|j| (e - j).abs() < 1e-3) {
            continue;
        }
        let fd = (t.theta(e + h) - t.theta(e - h)) / (2.0 * h);
        assert!((fd - t.theta_prime(e)).abs() < 1e-6, "eta {e}: fd {fd} vs {}", t.theta_prime(e));
    }
}
