//! Dense brute-force oracles for the sparse assembly and constrained solves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use richards_core::assembly::*;
use richards_core::lsolver::cg_solve;
use richards_core::{Mesh, Rect};

fn random_mesh(rng: &mut ChaCha8Rng) -> Mesh {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(1..=19);
        let z0 = rng.gen_range(-1.0..1.0);
        Mesh::uniform_interval(n, z0, z0 + rng.gen_range(0.1..3.0)).unwrap()
    } else {
        let (nx, ny) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let x0 = rng.gen_range(-1.0..1.0);
        let z0 = rng.gen_range(-1.0..1.0);
        let r = Rect { x0, x1: x0 + rng.gen_range(0.2..2.0), z0, z1: z0 + rng.gen_range(0.2..2.0) };
        Mesh::structured_triangles(nx, ny, r).unwrap()
    }
}

/// Element loop into a dense matrix, with gradients from the inverse
/// Jacobian rather than the closed-form cofactors.
fn dense_stiffness(mesh: &Mesh, w: &[f64]) -> Vec<Vec<f64>> {
    let n = mesh.n_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for e in 0..mesh.n_elements() {
        let (g, vol) = oracle_gradients(mesh, e);
        let v = mesh.element(e);
        for p in 0..v.len() {
            for q in 0..v.len() {
                a[v[p]][v[q]] += w[e] * vol * (g[p].0 * g[q].0 + g[p].1 * g[q].1);
            }
        }
    }
    a
}

fn oracle_gradients(mesh: &Mesh, e: usize) -> (Vec<(f64, f64)>, f64) {
    let v = mesh.element(e);
    let p = |k: usize| mesh.nodes()[v[k]];
    if mesh.dim() == 1 {
        let h = p(1)[1] - p(0)[1];
        return (vec![(0.0, -1.0 / h), (0.0, 1.0 / h)], h.abs());
    }
    // J = [p1 - p0, p2 - p0]; ∇φ_{1,2} = rows of J^{-1}, ∇φ_0 = -(sum)
    let (a, b) = (p(1)[0] - p(0)[0], p(2)[0] - p(0)[0]);
    let (c, d) = (p(1)[1] - p(0)[1], p(2)[1] - p(0)[1]);
    let det = a * d - b * c;
    let g1 = (d / det, -b / det);
    let g2 = (-c / det, a / det);
    (vec![(-g1.0 - g2.0, -g1.1 - g2.1), g1, g2], 0.5 * det.abs())
}

fn dense_convection(mesh: &Mesh, k: &[[f64; 2]]) -> Vec<f64> {
    let mut f = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        let (g, vol) = oracle_gradients(mesh, e);
        for (p, &i) in mesh.element(e).iter().enumerate() {
            f[i] += vol * (k[e][0] * g[p].0 + k[e][1] * g[p].1);
        }
    }
    f
}

/// Solve with Dirichlet rows by eliminating the known unknowns and running
/// Gaussian elimination on the reduced free-node system.
fn dense_constrained_solve(a: &[Vec<f64>], b: &[f64], fixed: &[(usize, f64)]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut is_fixed = vec![false; n];
    for &(i, v) in fixed {
        x[i] = v;
        is_fixed[i] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
    let m = free.len();
    let mut r: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| a[i][j]).collect()).collect();
    let mut rhs: Vec<f64> = free
        .iter()
        .map(|&i| b[i] - fixed.iter().map(|&(j, v)| a[i][j] * v).sum::<f64>())
        .collect();
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| r[i][k].abs().total_cmp(&r[j][k].abs())).unwrap();
        r.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..m {
            let f = r[i][k] / r[k][k];
            for j in k..m {
                r[i][j] -= f * r[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|j| r[i][j] * y[j]).sum();
        y[i] = (rhs[i] - s) / r[i][i];
    }
    for (k, &i) in free.iter().enumerate() {
        x[i] = y[k];
    }
    x
}

#[test]
fn randomized_assembly_matches_dense_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for trial in 0..100 {
        let mesh = random_mesh(&mut rng);
        let ne = mesh.n_elements();
        let w: Vec<f64> = (0..ne).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..3.0) }).collect();
        let a = weighted_stiffness(&mesh, &w).unwrap();
        let d = dense_stiffness(&mesh, &w);
        let scale = d.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for (i, row) in d.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((a.get(i, j) - v).abs() <= 1e-12 * scale, "trial {trial}: A[{i}][{j}]");
            }
            let row_sum: f64 = row.iter().sum();
            assert!(row_sum.abs() <= 1e-12 * scale);
        }
        assert!(a.is_symmetric());

        let k: Vec<[f64; 2]> = (0..ne).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let k = if mesh.dim() == 1 { k.iter().map(|v| [0.0, v[1]]).collect() } else { k };
        let f = convection_load(&mesh, &k);
        for (x, y) in f.iter().zip(dense_convection(&mesh, &k)) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "trial {trial}: convection");
        }

        let mass = lumped_mass(&mesh);
        let s: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let src = source_load(&mass, &s);
        for i in 0..s.len() {
            assert_eq!(src[i], mass[i] * s[i]);
        }

        // SPD system L·M + τ·A with random Dirichlet data on the boundary
        let tau = rng.gen_range(0.01..1.0);
        let sys = a.scaled_plus_diagonal(tau, &mass);
        let pairs: Vec<(usize, f64)> = mesh.boundary_nodes().iter().map(|&(i, _)| (i, rng.gen_range(-1.0..1.0))).collect();
        let c = DirichletConstraints::for_mesh(&mesh, &pairs).unwrap();
        let cs = apply_dirichlet(&sys, &c);
        assert!(cs.matrix().is_symmetric());
        let rhs: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = cs.rhs(&rhs);
        let mut x = vec![0.0; b.len()];
        cg_solve(cs.matrix(), &b, &mut x, 1e-15, 10_000).unwrap();
        let oracle = dense_constrained_solve(&sys.to_dense(), &rhs, c.nodes().iter().copied().zip(c.values().iter().copied()).collect::<Vec<_>>().as_slice());
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0), "trial {trial}: solve {p} vs {q}");
        }
    }
}

#[test]
fn stiffness_is_psd_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mesh = Mesh::structured_triangles(5, 4, Rect::unit()).unwrap();
    let w: Vec<f64> = (0..mesh.n_elements()).map(|_| rng.gen_range(0.0..2.0)).collect();
    let a = weighted_stiffness(&mesh, &w).unwrap();
    for _ in 0..100 {
        let x: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(a.quadratic_form(&x) >= -1e-13);
    }
    let b = weighted_stiffness(&mesh, &w).unwrap();
    let bytes = |m: &richards_core::CsrMatrix| m.values().iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>();
    assert_eq!(bytes(&a), bytes(&b));
}

#[test]
fn constant_dirichlet_gives_constant_harmonic_solution() {
    let mesh = Mesh::structured_triangles(4, 3, Rect::unit()).unwrap();
    let a = weighted_stiffness(&mesh, &vec![1.0; mesh.n_elements()]).unwrap();
    let pairs: Vec<(usize, f64)> = mesh.boundary_nodes().iter().map(|&(i, _)| (i, 0.37)).collect();
    let c = DirichletConstraints::for_mesh(&mesh, &pairs).unwrap();
    let cs = apply_dirichlet(&a, &c);
    let b = cs.rhs(&vec![0.0; mesh.n_nodes()]);
    let mut x = vec![0.0; b.len()];
    cg_solve(cs.matrix(), &b, &mut x, 1e-14, 1000).unwrap();
    assert!(x.iter().all(|v| (v - 0.37).abs() < 1e-12));
}

#[test]
fn shifted_system_stays_spd_under_full_degeneracy() {
    let mesh = Mesh::uniform_interval(12, 0.0, 1.0).unwrap();
    let mut w = vec![0.0; 12];
    w[5] = 1.0;
    let a = weighted_stiffness(&mesh, &w).unwrap();
    let sys = a.scaled_plus_diagonal(0.1, &lumped_mass(&mesh));
    assert!(sys.diagonal().iter().all(|&d| d > 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(sys.quadratic_form(&x) > 0.0);
    }
}
