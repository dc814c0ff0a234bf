//! Shared fixtures for unit tests.

use crate::geometry::LOCAL_FACES;
use crate::msh::{ElementTable, Mesh};
use std::collections::BTreeMap;

pub const REF_TET: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

/// One P1 tetrahedron whose four faces are all boundary triangles, each on
/// its own boundary entity tag (1..=4 in local-face order).
pub fn single_tet_mesh(verts: [[f64; 3]; 4]) -> Mesh {
    let mut tets = ElementTable::new(4);
    tets.push_row(&[0, 1, 2, 3]);
    let mut tris = ElementTable::new(3);
    for cols in &LOCAL_FACES {
        tris.push_row(&[cols[0], cols[1], cols[2]]);
    }
    Mesh {
        coords: verts.to_vec(),
        tets,
        tris,
        tet_entity: vec![1],
        tri_entity: vec![1, 2, 3, 4],
        degree: 1,
        groups: BTreeMap::new(),
        group_dims: BTreeMap::new(),
    }
}
