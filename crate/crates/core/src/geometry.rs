//! Per-element geometry, face connectivity, boundary classification and
//! mesh quality.

use crate::error::{Error, Result};
use crate::msh::Mesh;

pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Precomputed affine-map data: determinants, rows of the inverse map, and
/// boundary-triangle normals.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    /// det(B_K) per tetrahedron; equals six times the element volume.
    pub det_b: Vec<f64>,
    /// Rows of B_K^-1 (cross-product representation divided by det).
    pub binv_rows: Vec<[[f64; 3]; 3]>,
    /// Non-normalized outward normal of each boundary triangle.
    pub bd_normal: Vec<[f64; 3]>,
    /// Norm of `bd_normal`; equals twice the triangle area.
    pub bd_area2: Vec<f64>,
}

impl GeometryCache {
    /// Total mesh volume, sum of det/6.
    pub fn total_volume(&self) -> f64 {
        self.det_b.iter().sum::<f64>() / 6.0
    }
}

pub fn compute_geometry(mesh: &Mesh) -> Result<GeometryCache> {
    let n = mesh.n_tets();
    let mut det_b = Vec::with_capacity(n);
    let mut binv_rows = Vec::with_capacity(n);
    for k in 0..n {
        let [x0, x1, x2, x3] = mesh.tet_vertices(k);
        let v01 = sub(x1, x0);
        let v02 = sub(x2, x0);
        let v03 = sub(x3, x0);
        let det = dot(v01, cross(v02, v03));
        let h = tet_diameter(&[x0, x1, x2, x3]);
        if det.abs() < 1e-14 * h.powi(3) {
            return Err(Error::DegenerateElement(k, det));
        }
        if det < 0.0 {
            return Err(Error::NegativeOrientation(k, det));
        }
        let b1 = cross(v02, v03);
        let b2 = cross(v03, v01);
        let b3 = cross(v01, v02);
        binv_rows.push([
            [b1[0] / det, b1[1] / det, b1[2] / det],
            [b2[0] / det, b2[1] / det, b2[2] / det],
            [b3[0] / det, b3[1] / det, b3[2] / det],
        ]);
        det_b.push(det);
    }

    let n_tris = mesh.n_boundary_tris();
    let mut bd_normal = Vec::with_capacity(n_tris);
    let mut bd_area2 = Vec::with_capacity(n_tris);
    for k in 0..mesh.n_boundary_tris() {
        let [x0, x1, x2] = mesh.tri_vertices(k);
        let l1 = sub(x0, x1);
        let l2 = sub(x0, x2);
        let n = cross(l1, l2);
        bd_area2.push(norm(n));
        bd_normal.push(n);
    }
    Ok(GeometryCache {
        det_b,
        binv_rows,
        bd_normal,
        bd_area2,
    })
}

fn tet_diameter(v: &[[f64; 3]; 4]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            h = h.max(norm(sub(v[i], v[j])));
        }
    }
    h
}

/// Local vertex columns of the four faces of a tetrahedron, oriented so the
/// right-hand normal points outward.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

/// Face connectivity: deduplicated faces with owner tetrahedra.
#[derive(Debug, Clone)]
pub struct Connectivity {
    /// Vertex-index rows, outward-oriented for the first owner.
    pub faces: Vec<[usize; 3]>,
    /// Global face ids of each tetrahedron's four faces.
    pub tet_faces: Vec<[usize; 4]>,
    /// First and (for interior faces) second owner of each face.
    pub face_tets: Vec<(usize, Option<usize>)>,
}

impl Connectivity {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.face_tets
            .iter()
            .filter(|(_, second)| second.is_none())
            .count()
    }
}

pub fn build_connectivity(mesh: &Mesh) -> Result<Connectivity> {
    let n_tets = mesh.n_tets();
    // linear order mirrors column-stacked enumeration: all first faces,
    // then all second faces, and so on
    let mut entries: Vec<([usize; 3], [usize; 3], usize, usize)> = Vec::with_capacity(4 * n_tets);
    for (local, cols) in LOCAL_FACES.iter().enumerate() {
        for t in 0..n_tets {
            let row = mesh.tets.row(t);
            let oriented = [row[cols[0]], row[cols[1]], row[cols[2]]];
            let mut sorted = oriented;
            sorted.sort_unstable();
            entries.push((sorted, oriented, t, local));
        }
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by_key(|&i| entries[i].0); // stable: equal keys keep linear order

    let mut faces = Vec::new();
    let mut face_tets = Vec::new();
    let mut tet_faces = vec![[usize::MAX; 4]; n_tets];
    let mut i = 0;
    while i < order.len() {
        let key = entries[order[i]].0;
        let mut j = i;
        while j < order.len() && entries[order[j]].0 == key {
            j += 1;
        }
        let count = j - i;
        if count > 2 {
            return Err(Error::NonConformal(key));
        }
        let face_id = faces.len();
        let first = &entries[order[i]];
        faces.push(first.1);
        let second = if count == 2 {
            let last = &entries[order[j - 1]];
            tet_faces[last.2][last.3] = face_id;
            Some(last.2)
        } else {
            None
        };
        tet_faces[first.2][first.3] = face_id;
        face_tets.push((first.2, second));
        i = j;
    }
    Ok(Connectivity {
        faces,
        tet_faces,
        face_tets,
    })
}

/// Node partition induced by the Dirichlet groups.
#[derive(Debug, Clone)]
pub struct BoundaryClassification {
    /// Marks boundary-triangle rows lying on the Dirichlet boundary.
    pub gamma_d: Vec<bool>,
    /// Sorted Dirichlet node indices.
    pub dirichlet_nodes: Vec<usize>,
    /// Sorted complement of `dirichlet_nodes` in the full node range.
    pub free_nodes: Vec<usize>,
    /// Boundary-triangle rows not on the Dirichlet boundary.
    pub robin_rows: Vec<usize>,
}

pub fn classify_boundary(
    mesh: &Mesh,
    dirichlet_groups: &[String],
) -> Result<BoundaryClassification> {
    let mut tags: Vec<i32> = Vec::new();
    for name in dirichlet_groups {
        let entity_tags = mesh
            .groups
            .get(name)
            .ok_or_else(|| Error::UnknownGroup(name.clone()))?;
        tags.extend_from_slice(entity_tags);
    }
    let gamma_d: Vec<bool> = mesh.tri_entity.iter().map(|t| tags.contains(t)).collect();
    let mut is_dirichlet = vec![false; mesh.n_nodes()];
    for (row, &on) in gamma_d.iter().enumerate() {
        if on {
            for &node in mesh.tris.row(row) {
                is_dirichlet[node] = true;
            }
        }
    }
    let dirichlet_nodes: Vec<usize> = (0..mesh.n_nodes()).filter(|&i| is_dirichlet[i]).collect();
    let free_nodes: Vec<usize> = (0..mesh.n_nodes()).filter(|&i| !is_dirichlet[i]).collect();
    let robin_rows: Vec<usize> = (0..mesh.n_boundary_tris())
        .filter(|&r| !gamma_d[r])
        .collect();
    Ok(BoundaryClassification {
        gamma_d,
        dirichlet_nodes,
        free_nodes,
        robin_rows,
    })
}

/// Element diameters, inradii, and the worst diameter/inradius ratio.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub diameters: Vec<f64>,
    pub inradii: Vec<f64>,
    pub chunkiness: f64,
}

impl QualityReport {
    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn compute_quality(mesh: &Mesh, geom: &GeometryCache) -> QualityReport {
    let n = mesh.n_tets();
    let mut diameters = Vec::with_capacity(n);
    let mut inradii = Vec::with_capacity(n);
    let mut chunkiness: f64 = 0.0;
    for k in 0..n {
        let verts = mesh.tet_vertices(k);
        let h = tet_diameter(&verts);
        // inradius = 3 V / (total face area), exact for simplices
        let volume = geom.det_b[k] / 6.0;
        let mut area = 0.0;
        for cols in &LOCAL_FACES {
            let a = verts[cols[0]];
            let b = verts[cols[1]];
            let c = verts[cols[2]];
            area += 0.5 * norm(cross(sub(b, a), sub(c, a)));
        }
        let rho = 3.0 * volume / area;
        chunkiness = chunkiness.max(h / rho);
        diameters.push(h);
        inradii.push(rho);
    }
    QualityReport {
        diameters,
        inradii,
        chunkiness,
    }
}
