//! Lagrange reference elements on the unit tetrahedron and triangle.
//!
//! Node lattices follow the GMSH convention: vertices first, then
//! edge-interior nodes (each edge walked from its first to its second
//! vertex), then face-interior nodes (outward-oriented), then interior
//! nodes ordered recursively as a lower-degree lattice.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Tetrahedron,
    Triangle,
}

impl CellKind {
    /// Number of barycentric components (vertices of the simplex).
    pub fn n_bary(self) -> usize {
        match self {
            CellKind::Tetrahedron => 4,
            CellKind::Triangle => 3,
        }
    }

    /// Dimension of the reference cell.
    pub fn dim(self) -> usize {
        self.n_bary() - 1
    }

    /// Degrees of freedom of a P_m element on this cell.
    pub fn dof(self, m: usize) -> usize {
        match self {
            CellKind::Tetrahedron => (m + 3) * (m + 2) * (m + 1) / 6,
            CellKind::Triangle => (m + 2) * (m + 1) / 2,
        }
    }
}

/// Lattice multi-index; components are nonnegative and sum to the degree.
/// Barycentric coordinates of the node are `components / m`.
/// Triangles use the first three entries (the fourth stays zero).
pub type BarycentricIndex = [u32; 4];

/// Edges of the reference tetrahedron in lattice order, each as
/// (first, second) vertex; interior nodes run from first to second.
const TET_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 0), (3, 0), (3, 2), (3, 1)];

/// Faces of the reference tetrahedron in lattice order, oriented so the
/// right-hand normal points outward.
const TET_FACES: [[usize; 3]; 4] = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [3, 1, 2]];

const TRI_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

fn tri_lattice(m: usize) -> Vec<[u32; 3]> {
    if m == 0 {
        return vec![[0, 0, 0]];
    }
    let mu = m as u32;
    let mut nodes = Vec::with_capacity((m + 2) * (m + 1) / 2);
    for v in 0..3 {
        let mut idx = [0u32; 3];
        idx[v] = mu;
        nodes.push(idx);
    }
    for &(a, b) in &TRI_EDGES {
        for k in 1..mu {
            let mut idx = [0u32; 3];
            idx[a] = mu - k;
            idx[b] = k;
            nodes.push(idx);
        }
    }
    if m >= 3 {
        for inner in tri_lattice(m - 3) {
            nodes.push([inner[0] + 1, inner[1] + 1, inner[2] + 1]);
        }
    }
    nodes
}

fn tet_lattice(m: usize) -> Vec<BarycentricIndex> {
    if m == 0 {
        return vec![[0; 4]];
    }
    let mu = m as u32;
    let mut nodes = Vec::with_capacity((m + 3) * (m + 2) * (m + 1) / 6);
    for v in 0..4 {
        let mut idx = [0u32; 4];
        idx[v] = mu;
        nodes.push(idx);
    }
    for &(a, b) in &TET_EDGES {
        for k in 1..mu {
            let mut idx = [0u32; 4];
            idx[a] = mu - k;
            idx[b] = k;
            nodes.push(idx);
        }
    }
    if m >= 3 {
        for face in &TET_FACES {
            for inner in tri_lattice(m - 3) {
                let mut idx = [0u32; 4];
                for (slot, &v) in face.iter().enumerate() {
                    idx[v] = inner[slot] + 1;
                }
                nodes.push(idx);
            }
        }
    }
    if m >= 4 {
        for inner in tet_lattice(m - 4) {
            nodes.push([inner[0] + 1, inner[1] + 1, inner[2] + 1, inner[3] + 1]);
        }
    }
    nodes
}

fn check_degree(m: usize) -> Result<()> {
    if (1..=4).contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree(m))
    }
}

/// GMSH-ordered lattice of the P_m tetrahedron.
pub fn tet_node_order(m: usize) -> Result<Vec<BarycentricIndex>> {
    check_degree(m)?;
    Ok(tet_lattice(m))
}

/// GMSH-ordered lattice of the P_m triangle (fourth component unused).
pub fn tri_node_order(m: usize) -> Result<Vec<BarycentricIndex>> {
    check_degree(m)?;
    Ok(tri_lattice(m)
        .into_iter()
        .map(|n| [n[0], n[1], n[2], 0])
        .collect())
}

/// Reference element: node lattice plus shape-function evaluators.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub cell: CellKind,
    pub degree: usize,
    pub nodes: Vec<BarycentricIndex>,
    pub dof: usize,
}

impl ReferenceElement {
    pub fn new(cell: CellKind, degree: usize) -> Result<Self> {
        let nodes = match cell {
            CellKind::Tetrahedron => tet_node_order(degree)?,
            CellKind::Triangle => tri_node_order(degree)?,
        };
        let dof = nodes.len();
        debug_assert_eq!(dof, cell.dof(degree));
        Ok(ReferenceElement {
            cell,
            degree,
            nodes,
            dof,
        })
    }

    /// Barycentric coordinates of reference-Cartesian point `xhat`.
    pub fn bary_from_cartesian(&self, xhat: &[f64]) -> [f64; 4] {
        let mut lam = [0.0f64; 4];
        let d = self.cell.dim();
        let mut s = 0.0;
        for k in 0..d {
            lam[k + 1] = xhat[k];
            s += xhat[k];
        }
        lam[0] = 1.0 - s;
        lam
    }

    /// Barycentric coordinates of local node `r`.
    pub fn node_bary(&self, r: usize) -> [f64; 4] {
        let m = self.degree as f64;
        let idx = self.nodes[r];
        [
            idx[0] as f64 / m,
            idx[1] as f64 / m,
            idx[2] as f64 / m,
            idx[3] as f64 / m,
        ]
    }

    /// Per-component factor P_n(lambda_n) of the shape-function product, and
    /// its derivative. The full product formula is
    /// N_r = prod_n prod_{l < i_n} (lambda_n - l/m) / ((i_n - l)/m).
    fn factor(&self, count: u32, lam: f64) -> (f64, f64) {
        let m = self.degree as f64;
        // terms t_l = (lambda - l/m) * m/(i_n - l)
        let mut value = 1.0;
        for l in 0..count {
            value *= (lam - l as f64 / m) * m / (count - l) as f64;
        }
        // derivative by leave-one-out products
        let mut deriv = 0.0;
        for l in 0..count {
            let mut prod = m / (count - l) as f64;
            for lp in 0..count {
                if lp != l {
                    prod *= (lam - lp as f64 / m) * m / (count - lp) as f64;
                }
            }
            deriv += prod;
        }
        (value, deriv)
    }

    /// Shape function N_r at barycentric point `lam`.
    pub fn shape_value(&self, r: usize, lam: &[f64]) -> f64 {
        let idx = self.nodes[r];
        let m = self.degree as f64;
        let mut value = 1.0;
        for n in 0..self.cell.n_bary() {
            for l in 0..idx[n] {
                value *= (lam[n] - l as f64 / m) * m / (idx[n] - l) as f64;
            }
        }
        value
    }

    /// N_r and its gradient with respect to the barycentric coordinates.
    pub fn shape_value_bary_grad(&self, r: usize, lam: &[f64]) -> (f64, [f64; 4]) {
        let idx = self.nodes[r];
        let nb = self.cell.n_bary();
        let mut vals = [1.0f64; 4];
        let mut ders = [0.0f64; 4];
        for n in 0..nb {
            let (v, d) = self.factor(idx[n], lam[n]);
            vals[n] = v;
            ders[n] = d;
        }
        let mut value = 1.0;
        for v in vals.iter().take(nb) {
            value *= v;
        }
        let mut grad = [0.0f64; 4];
        for n in 0..nb {
            let mut g = ders[n];
            for np in 0..nb {
                if np != n {
                    g *= vals[np];
                }
            }
            grad[n] = g;
        }
        (value, grad)
    }

    /// Gradient of N_r with respect to reference Cartesian coordinates, at a
    /// barycentric point. Triangles fill only the first two components.
    pub fn shape_grad_bary(&self, r: usize, lam: &[f64]) -> [f64; 3] {
        let (_, dl) = self.shape_value_bary_grad(r, lam);
        let mut g = [0.0f64; 3];
        for k in 0..self.cell.dim() {
            // d(lambda_{k+1})/dxhat_k = 1, d(lambda_0)/dxhat_k = -1
            g[k] = dl[k + 1] - dl[0];
        }
        g
    }

    /// Gradient of N_r at a reference-Cartesian point.
    pub fn shape_grad(&self, r: usize, xhat: &[f64]) -> [f64; 3] {
        let lam = self.bary_from_cartesian(xhat);
        self.shape_grad_bary(r, &lam)
    }
}

/// Tet-local indices of the nodes on face `face` (the nodes whose
/// `face`-th lattice component vanishes), listed in the triangle's own
/// lattice order under the face's outward orientation. The triangle's
/// vertex order is the remaining vertices ascending, reflected when the
/// right-hand normal would point inward. Diagnostic use only; boundary
/// assembly works from the stored boundary connectivity instead.
pub fn face_node_map(m: usize, face: usize) -> Result<Vec<usize>> {
    check_degree(m)?;
    assert!(face < 4, "face index out of range");
    // remaining vertices in ascending order
    let mut verts = [0usize; 3];
    let mut k = 0;
    for v in 0..4 {
        if v != face {
            verts[k] = v;
            k += 1;
        }
    }
    // Reference vertices: x0=(0,0,0), x1=(1,0,0), x2=(0,1,0), x3=(0,0,1).
    const XV: [[f64; 3]; 4] = [[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]];
    let e1 = sub(XV[verts[1]], XV[verts[0]]);
    let e2 = sub(XV[verts[2]], XV[verts[0]]);
    let n = cross(e1, e2);
    // outward test against the opposite vertex
    let to_opp = sub(XV[face], XV[verts[0]]);
    if dot(n, to_opp) > 0.0 {
        verts.swap(1, 2);
    }
    let tet_nodes = tet_lattice(m);
    let mut map = Vec::with_capacity(CellKind::Triangle.dof(m));
    for tri_idx in tri_lattice(m) {
        let mut want = [0u32; 4];
        for (slot, &v) in verts.iter().enumerate() {
            want[v] = tri_idx[slot];
        }
        let local = tet_nodes
            .iter()
            .position(|&n| n == want)
            .expect("face node present in tet lattice");
        map.push(local);
    }
    Ok(map)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
