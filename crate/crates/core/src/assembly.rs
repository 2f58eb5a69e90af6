//! P1 finite-element operators: lumped mass, weighted stiffness, convection
//! and source loads, and Dirichlet elimination.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// How a nodal coefficient is reduced to one value per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightRule {
    /// Coefficient evaluated at the element mean of the nodal state.
    #[default]
    NodalMean,
    /// Element mean of the coefficient evaluated at each node.
    MeanOfNodal,
}

impl WeightRule {
    pub fn name(self) -> &'static str {
        match self {
            Self::NodalMean => "nodal_mean",
            Self::MeanOfNodal => "mean_of_nodal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "nodal_mean" => Some(Self::NodalMean),
            "mean_of_nodal" => Some(Self::MeanOfNodal),
            _ => None,
        }
    }
}

/// One value of `f` per element, from the nodal state `u`.
pub fn element_values(mesh: &Mesh, u: &[f64], f: impl Fn(f64) -> f64, rule: WeightRule) -> Vec<f64> {
    mesh.elements()
        .map(|el| {
            let k = el.len() as f64;
            match rule {
                WeightRule::NodalMean => f(el.iter().map(|&i| u[i]).sum::<f64>() / k),
                WeightRule::MeanOfNodal => el.iter().map(|&i| f(u[i])).sum::<f64>() / k,
            }
        })
        .collect()
}

/// Row-sum lumped mass: node `i` receives `|e| / (dim + 1)` from each
/// adjacent element.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_nodes()];
    let share = 1.0 / (mesh.dim() + 1) as f64;
    for (e, el) in mesh.elements().enumerate() {
        let w = mesh.measure(e) * share;
        for &i in el {
            m[i] += w;
        }
    }
    m
}

/// Zero matrix with the P1 node-adjacency pattern of `mesh`.
pub fn stiffness_pattern(mesh: &Mesh) -> CsrMatrix {
    let mut rows = vec![Vec::new(); mesh.n_nodes()];
    for el in mesh.elements() {
        for &i in el {
            rows[i].extend_from_slice(el);
        }
    }
    CsrMatrix::from_pattern(rows)
}

/// `A_ij = Σ_e w_e |e| ∇φ_i·∇φ_j` with one weight per element.
pub fn weighted_stiffness(mesh: &Mesh, weights: &[f64]) -> Result<CsrMatrix> {
    let mut a = stiffness_pattern(mesh);
    weighted_stiffness_into(mesh, weights, &mut a)?;
    Ok(a)
}

/// As [`weighted_stiffness`], reusing the pattern of `a` (built by
/// [`stiffness_pattern`]).
pub fn weighted_stiffness_into(mesh: &Mesh, weights: &[f64], a: &mut CsrMatrix) -> Result<()> {
    if weights.len() != mesh.n_elements() {
        return Err(Error::InvalidInput(format!(
            "{} element weights for {} elements",
            weights.len(),
            mesh.n_elements()
        )));
    }
    if let Some((e, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput(format!("weight {w} on element {e} must be finite and non-negative")));
    }
    a.clear();
    for (e, el) in mesh.elements().enumerate() {
        let w = weights[e];
        if w == 0.0 {
            continue;
        }
        let g = mesh.gradients(e);
        let s = w * mesh.measure(e);
        for (p, &i) in el.iter().enumerate() {
            for (q, &j) in el.iter().enumerate() {
                a.add(i, j, s * (g[p][0] * g[q][0] + g[p][1] * g[q][1]));
            }
        }
    }
    Ok(())
}

/// `F_i = Σ_e |e| K̄_e·∇φ_i` for one `[x, z]` vector per element.
pub fn convection_load(mesh: &Mesh, kbar: &[[f64; 2]]) -> Vec<f64> {
    assert_eq!(kbar.len(), mesh.n_elements(), "one convection vector per element");
    let mut f = vec![0.0; mesh.n_nodes()];
    for (e, el) in mesh.elements().enumerate() {
        let [kx, kz] = kbar[e];
        if kx == 0.0 && kz == 0.0 {
            continue;
        }
        let g = mesh.gradients(e);
        let s = mesh.measure(e);
        for (p, &i) in el.iter().enumerate() {
            f[i] += s * (kx * g[p][0] + kz * g[p][1]);
        }
    }
    f
}

/// Lumped source load `mass_i · S_i`.
pub fn source_load(mass: &[f64], s: &[f64]) -> Vec<f64> {
    mass.iter().zip(s).map(|(m, v)| m * v).collect()
}

/// Prescribed nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletConstraints {
    nodes: Vec<usize>,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl DirichletConstraints {
    /// Constraints on arbitrary nodes. Later duplicates override earlier ones.
    pub fn new(n_nodes: usize, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut value = vec![None; n_nodes];
        for &(i, v) in pairs {
            if i >= n_nodes {
                return Err(Error::InvalidInput(format!("constrained node {i} out of range ({n_nodes} nodes)")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite boundary value at node {i}")));
            }
            value[i] = Some(v);
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut mask = vec![false; n_nodes];
        for (i, v) in value.into_iter().enumerate() {
            if let Some(v) = v {
                nodes.push(i);
                values.push(v);
                mask[i] = true;
            }
        }
        Ok(Self { nodes, values, mask })
    }

    /// Constraints that must cover every boundary node of `mesh`.
    pub fn for_mesh(mesh: &Mesh, pairs: &[(usize, f64)]) -> Result<Self> {
        let c = Self::new(mesh.n_nodes(), pairs)?;
        if let Some(&(i, _)) = mesh.boundary_nodes().iter().find(|(i, _)| !c.mask[*i]) {
            return Err(Error::MissingBoundaryValue(i));
        }
        Ok(c)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Overwrites the constrained entries of `x`.
    pub fn impose(&self, x: &mut [f64]) {
        for (&i, &v) in self.nodes.iter().zip(&self.values) {
            x[i] = v;
        }
    }
}

/// A symmetric system with Dirichlet rows and columns eliminated.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    matrix: CsrMatrix,
    /// `Σ_j a_ij g_j` over constrained `j`, for free rows `i`.
    lift: Vec<f64>,
    constraints: DirichletConstraints,
}

/// Replaces constrained rows by identity rows and moves the known column
/// contributions to the right-hand side, keeping the matrix symmetric.
pub fn apply_dirichlet(matrix: &CsrMatrix, constraints: &DirichletConstraints) -> ConstrainedSystem {
    let mut a = matrix.clone();
    let mut lift = vec![0.0; a.n()];
    for i in 0..a.n() {
        let row_fixed = constraints.is_constrained(i);
        for k in a.row_range(i) {
            let j = a.col(k);
            let v = &mut a.values_mut()[k];
            if row_fixed {
                *v = if i == j { 1.0 } else { 0.0 };
            } else if constraints.is_constrained(j) {
                // value lookup is by position in the sorted constraint list
                let p = constraints.nodes.binary_search(&j).expect("constrained node listed");
                lift[i] += *v * constraints.values[p];
                *v = 0.0;
            }
        }
    }
    ConstrainedSystem { matrix: a, lift, constraints: constraints.clone() }
}

impl ConstrainedSystem {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn constraints(&self) -> &DirichletConstraints {
        &self.constraints
    }

    /// Right-hand side of the constrained system for an unconstrained `rhs`.
    pub fn rhs(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b: Vec<f64> = rhs.iter().zip(&self.lift).map(|(r, l)| r - l).collect();
        self.constraints.impose(&mut b);
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;

    #[test]
    fn lumped_mass_examples() {
        let m = Mesh::uniform_interval(2, 0.0, 1.0).unwrap();
        assert_eq!(lumped_mass(&m), vec![0.25, 0.5, 0.25]);
        let m = Mesh::structured_triangles(1, 1, Rect::unit()).unwrap();
        let d = lumped_mass(&m);
        // nodes 0 and 3 (the diagonal) touch both triangles
        let third = 0.5 / 3.0;
        let expect = [2.0 * third, third, third, 2.0 * third];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_weight_gives_laplacian() {
        let m = Mesh::uniform_interval(10, 0.0, 1.0).unwrap();
        let a = weighted_stiffness(&m, &[1.0; 10]).unwrap();
        for i in 1..10 {
            assert!((a.get(i, i) - 20.0).abs() < 1e-12);
            assert!((a.get(i, i - 1) + 10.0).abs() < 1e-12);
            assert!((a.get(i, i + 1) + 10.0).abs() < 1e-12);
        }
        let z = weighted_stiffness(&m, &[0.0; 10]).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert!(weighted_stiffness(&m, &[-1.0; 10]).is_err());
    }

    #[test]
    fn constant_convection_telescopes() {
        let m = Mesh::uniform_interval(8, 0.0, 2.0).unwrap();
        let f = convection_load(&m, &[[0.0, 0.7]; 8]);
        assert!(f[1..8].iter().all(|v| v.abs() < 1e-15));
        assert!((f[0] + 0.7).abs() < 1e-15 && (f[8] - 0.7).abs() < 1e-15);
        assert!(convection_load(&m, &[[0.0, 0.0]; 8]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn element_value_rules() {
        let m = Mesh::uniform_interval(1, 0.0, 1.0).unwrap();
        let u = [0.0, 2.0];
        assert_eq!(element_values(&m, &u, |x| x * x, WeightRule::NodalMean), vec![1.0]);
        assert_eq!(element_values(&m, &u, |x| x * x, WeightRule::MeanOfNodal), vec![2.0]);
    }

    #[test]
    fn dirichlet_coverage_and_elimination() {
        let m = Mesh::uniform_interval(2, 0.0, 1.0).unwrap();
        assert_eq!(DirichletConstraints::for_mesh(&m, &[(0, 1.0)]), Err(Error::MissingBoundaryValue(2)));
        let c = DirichletConstraints::for_mesh(&m, &[(2, 3.0), (0, 1.0)]).unwrap();
        assert_eq!(c.nodes(), &[0, 2]);
        let a = weighted_stiffness(&m, &[1.0, 1.0]).unwrap();
        let sys = apply_dirichlet(&a, &c);
        assert!(sys.matrix().is_symmetric());
        let b = sys.rhs(&[0.0, 0.0, 0.0]);
        // 4 u1 = 2·1 + 2·3
        assert_eq!(b, vec![1.0, 8.0, 3.0]);
        assert_eq!(sys.matrix().get(1, 1), 4.0);
    }
}
