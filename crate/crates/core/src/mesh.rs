//! Structured simplicial meshes.
//!
//! 1D meshes are vertical columns: the single coordinate is the elevation
//! `z` (positive upward), so gravity acts along the mesh. Nodes are stored
//! as `[x, z]` in both dimensions, with `x = 0` in 1D.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    Bottom,
    Top,
    Left,
    Right,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [Self::Bottom, Self::Top, Self::Left, Self::Right];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bottom => "bottom",
            Self::Top => "top",
            Self::Left => "left",
            Self::Right => "right",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Rectangle `[x0, x1] × [z0, z1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Rect {
    pub fn unit() -> Self {
        Self { x0: 0.0, x1: 1.0, z0: 0.0, z1: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    /// Vertex indices; 1D elements use the first two entries only.
    elements: Vec<[usize; 3]>,
    boundary: Vec<(usize, BoundaryTag)>,
    is_boundary: Vec<bool>,
}

impl Mesh {
    /// `n_cells` equal segments on `[z0, z1]`; boundary = {bottom, top}.
    pub fn uniform_interval(n_cells: usize, z0: f64, z1: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidMesh("interval mesh needs at least one cell".into()));
        }
        if !(z1 > z0) || !z0.is_finite() || !z1.is_finite() {
            return Err(Error::InvalidMesh(format!("invalid interval [{z0}, {z1}]")));
        }
        let h = (z1 - z0) / n_cells as f64;
        let nodes: Vec<[f64; 2]> = (0..=n_cells)
            .map(|i| [0.0, if i == n_cells { z1 } else { z0 + i as f64 * h }])
            .collect();
        let elements = (0..n_cells).map(|i| [i, i + 1, usize::MAX]).collect();
        let boundary = vec![(0, BoundaryTag::Bottom), (n_cells, BoundaryTag::Top)];
        Ok(Self::finish(1, nodes, elements, boundary))
    }

    /// `nx × ny` rectangles, each split along the diagonal from its
    /// lower-left to upper-right corner. Corner nodes carry the bottom/top tag.
    pub fn structured_triangles(nx: usize, ny: usize, rect: Rect) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh("triangle mesh needs nx, ny >= 1".into()));
        }
        let Rect { x0, x1, z0, z1 } = rect;
        if !(x1 > x0 && z1 > z0) || ![x0, x1, z0, z1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMesh(format!("invalid rectangle {rect:?}")));
        }
        let (hx, hz) = ((x1 - x0) / nx as f64, (z1 - z0) / ny as f64);
        let coord = |i: usize, n: usize, a: f64, b: f64, h: f64| if i == n { b } else { a + i as f64 * h };
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([coord(i, nx, x0, x1, hx), coord(j, ny, z0, z1, hz)]);
                let tag = if j == 0 {
                    Some(BoundaryTag::Bottom)
                } else if j == ny {
                    Some(BoundaryTag::Top)
                } else if i == 0 {
                    Some(BoundaryTag::Left)
                } else if i == nx {
                    Some(BoundaryTag::Right)
                } else {
                    None
                };
                if let Some(t) = tag {
                    boundary.push((id(i, j), t));
                }
            }
        }
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            }
        }
        Ok(Self::finish(2, nodes, elements, boundary))
    }

    fn finish(dim: usize, nodes: Vec<[f64; 2]>, elements: Vec<[usize; 3]>, boundary: Vec<(usize, BoundaryTag)>) -> Self {
        let mut is_boundary = vec![false; nodes.len()];
        for &(i, _) in &boundary {
            is_boundary[i] = true;
        }
        Self { dim, nodes, elements, boundary, is_boundary }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Vertex indices of element `e` (2 in 1D, 3 in 2D).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim + 1]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.elements.iter().map(move |e| &e[..self.dim + 1])
    }

    pub fn boundary_nodes(&self) -> &[(usize, BoundaryTag)] {
        &self.boundary
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.is_boundary[i]
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn measure(&self, e: usize) -> f64 {
        let v = self.element(e);
        if self.dim == 1 {
            (self.nodes[v[1]][1] - self.nodes[v[0]][1]).abs()
        } else {
            let [p, q, r] = [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]];
            0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])).abs()
        }
    }

    /// Gradients `[∂x, ∂z]` of the P1 basis functions of element `e`.
    pub fn gradients(&self, e: usize) -> [[f64; 2]; 3] {
        let v = self.element(e);
        if self.dim == 1 {
            let h = self.nodes[v[1]][1] - self.nodes[v[0]][1];
            [[0.0, -1.0 / h], [0.0, 1.0 / h], [0.0, 0.0]]
        } else {
            let [p, q, r] = [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]];
            let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
            [
                [(q[1] - r[1]) / det, (r[0] - q[0]) / det],
                [(r[1] - p[1]) / det, (p[0] - r[0]) / det],
                [(p[1] - q[1]) / det, (q[0] - p[0]) / det],
            ]
        }
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.measure(e)).sum()
    }
}
