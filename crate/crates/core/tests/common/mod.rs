//! Shared test support: a small literal sample mesh, a structured
//! tetrahedral mesh generator emitting GMSH 4.1 ASCII text, and a naive
//! node-loop assembly oracle.
#![allow(dead_code)]

use femtet::element::{tet_node_order, tri_node_order, CellKind, ReferenceElement};
use femtet::expr::{CoefficientField, Expr};
use femtet::msh::Mesh;
use femtet::quadrature::QuadratureRule;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Tetrahedral unit-tetrahedron domain with four physical groups; seven
/// nodes, four tets, ten boundary triangles in fifteen element blocks.
pub const SAMPLE_MSH: &str = "\
$MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
4
2 8 \"DirichletCondition\"
2 9 \"SolutionAtSurface\"
2 10 \"NeumannCondition\"
3 7 \"Volume1\"
$EndPhysicalNames
$Entities
4 6 4 1
1 0 0 0 0
2 1 0 0 0
3 0 1 0 0
4 0 0 1 0
1 0 0 0 0 0 1 0 2 1 -4
2 0 0 0 1 0 1 0 2 4 -2
3 0 0 0 1 0 0 0 2 2 -1
4 0 0 0 0 1 0 0 2 1 -3
5 0 0 0 0 1 1 0 2 3 -4
6 0 0 0 1 1 0 0 2 3 -2
1 0 0 0 1 1 1 1 10 3 5 2 -6
2 0 0 0 0 1 1 1 10 3 1 -5 -4
3 0 0 0 1 1 0 1 8 3 3 4 6
4 0 0 0 1 0 1 2 8 9 3 1 2 3
1 0 0 0 1 1 1 1 7 4 1 2 4 3
$EndEntities
$Nodes
15 7 1 7
0 1 0 1
1
0 0 0
0 2 0 1
2
1 0 0
0 3 0 1
3
0 1 0
0 4 0 1
4
0 0 1
1 1 0 0
1 2 0 1
5
0.5 0 0.5
1 3 0 0
1 4 0 0
1 5 0 1
6
0 0.5 0.5
1 6 0 1
7
0.5 0.5 0
2 1 0 0
2 2 0 0
2 3 0 0
2 4 0 0
3 1 0 0
$EndNodes
$Elements
15 27 1 27
0 1 15 1
1 1
0 2 15 1
2 2
0 3 15 1
3 3
0 4 15 1
4 4
1 1 1 1
5 1 4
1 2 1 2
6 4 5
7 5 2
1 3 1 1
8 2 1
1 4 1 1
9 1 3
1 5 1 2
10 3 6
11 6 4
1 6 1 2
12 3 7
13 7 2
2 1 2 4
14 7 5 2
15 6 7 3
16 5 6 4
17 5 7 6
2 2 2 2
18 6 3 1
19 4 6 1
2 3 2 2
20 7 2 1
21 3 7 1
2 4 2 2
22 5 2 1
23 4 5 1
3 1 4 4
24 5 6 1 4
25 1 7 3 6
26 1 7 5 2
27 1 7 6 5
$EndElements
";

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

/// Outward-oriented local faces of a positively oriented tetrahedron.
const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

const TET_CODES: [i32; 4] = [4, 11, 29, 30];
const TRI_CODES: [i32; 4] = [2, 9, 21, 23];

pub type CoordinateMap = Box<dyn Fn([f64; 3]) -> [f64; 3]>;

pub struct GeneratorOptions {
    /// Cells per axis in x/y (and z unless overridden).
    pub n: usize,
    pub nz: usize,
    pub degree: usize,
    /// Group names for the -x, +x, -y, +y, -z, +z cube sides.
    pub face_names: [&'static str; 6],
    pub volume_name: &'static str,
    /// Coordinate transform applied to the unit-cube vertices.
    pub map: Option<CoordinateMap>,
}

impl GeneratorOptions {
    pub fn cube(n: usize, degree: usize) -> Self {
        GeneratorOptions {
            n,
            nz: n,
            degree,
            face_names: ["Left", "Right", "Front", "Back", "Bottom", "Top"],
            volume_name: "Domain",
            map: None,
        }
    }

    /// Unit-height cylinder of radius 1/2 around the z axis: the square
    /// cross-section is carried onto the disk by max-norm radial scaling.
    pub fn cylinder(n: usize, nz: usize, degree: usize) -> Self {
        GeneratorOptions {
            n,
            nz,
            degree,
            face_names: ["Side", "Side", "Side", "Side", "Bottom", "Top"],
            volume_name: "Domain",
            map: Some(Box::new(|p| {
                let u = 2.0 * p[0] - 1.0;
                let v = 2.0 * p[1] - 1.0;
                let m = u.abs().max(v.abs());
                let rho = (u * u + v * v).sqrt();
                if rho == 0.0 {
                    return [0.0, 0.0, p[2]];
                }
                let s = 0.5 * m / rho;
                [u * s, v * s, p[2]]
            })),
        }
    }
}

/// Generate a GMSH 4.1 ASCII mesh of the (possibly mapped) unit cube with
/// six Kuhn tetrahedra per cell and order-`degree` Lagrange elements.
pub fn generate_msh(opts: &GeneratorOptions) -> String {
    let (n, nz, m) = (opts.n, opts.nz, opts.degree);
    assert!((1..=4).contains(&m));
    let idx = |i: usize, j: usize, k: usize| -> usize { i + j * (n + 1) + k * (n + 1) * (n + 1) };

    // grid vertices, mapped
    let mut verts: Vec<[f64; 3]> = Vec::with_capacity((n + 1) * (n + 1) * (nz + 1));
    let mut grid: Vec<[usize; 3]> = Vec::with_capacity(verts.capacity());
    for k in 0..=nz {
        for j in 0..=n {
            for i in 0..=n {
                let p = [
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    k as f64 / nz as f64,
                ];
                let p = match &opts.map {
                    Some(f) => f(p),
                    None => p,
                };
                verts.push(p);
                grid.push([i, j, k]);
            }
        }
    }

    // six tetrahedra per cell (Kuhn split along coordinate orderings)
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets: Vec<[usize; 4]> = Vec::with_capacity(6 * n * n * nz);
    for k in 0..nz {
        for j in 0..n {
            for i in 0..n {
                let base = [i, j, k];
                for perm in &PERMS {
                    let mut corners = [[0usize; 3]; 4];
                    corners[0] = base;
                    let mut cur = base;
                    for (step, &axis) in perm.iter().enumerate() {
                        cur[axis] += 1;
                        corners[step + 1] = cur;
                    }
                    let mut tet = [
                        idx(corners[0][0], corners[0][1], corners[0][2]),
                        idx(corners[1][0], corners[1][1], corners[1][2]),
                        idx(corners[2][0], corners[2][1], corners[2][2]),
                        idx(corners[3][0], corners[3][1], corners[3][2]),
                    ];
                    let det = dot(
                        sub(verts[tet[1]], verts[tet[0]]),
                        cross(
                            sub(verts[tet[2]], verts[tet[0]]),
                            sub(verts[tet[3]], verts[tet[0]]),
                        ),
                    );
                    if det < 0.0 {
                        tet.swap(2, 3);
                    }
                    assert!(
                        dot(
                            sub(verts[tet[1]], verts[tet[0]]),
                            cross(
                                sub(verts[tet[2]], verts[tet[0]]),
                                sub(verts[tet[3]], verts[tet[0]])
                            ),
                        ) > 0.0,
                        "generator produced a degenerate tetrahedron"
                    );
                    tets.push(tet);
                }
            }
        }
    }

    // boundary faces: vertex triples seen exactly once, kept outward
    let mut face_count: HashMap<[usize; 3], (usize, [usize; 3])> = HashMap::new();
    for tet in &tets {
        for cols in &LOCAL_FACES {
            let oriented = [tet[cols[0]], tet[cols[1]], tet[cols[2]]];
            let mut key = oriented;
            key.sort_unstable();
            face_count
                .entry(key)
                .and_modify(|e| e.0 += 1)
                .or_insert((1, oriented));
        }
    }
    // classify by cube side using pre-map grid indices
    let side_of = |f: &[usize; 3]| -> usize {
        let gs = [grid[f[0]], grid[f[1]], grid[f[2]]];
        if gs.iter().all(|g| g[0] == 0) {
            0
        } else if gs.iter().all(|g| g[0] == n) {
            1
        } else if gs.iter().all(|g| g[1] == 0) {
            2
        } else if gs.iter().all(|g| g[1] == n) {
            3
        } else if gs.iter().all(|g| g[2] == 0) {
            4
        } else if gs.iter().all(|g| g[2] == nz) {
            5
        } else {
            panic!("boundary face not on a cube side");
        }
    };
    let mut boundary: Vec<(usize, [usize; 3])> = face_count
        .values()
        .filter(|(count, _)| *count == 1)
        .map(|(_, oriented)| (side_of(oriented), *oriented))
        .collect();
    boundary.sort_unstable();

    // order-m nodes, shared through (vertex, multiplicity) keys
    let tet_lattice = tet_node_order(m).unwrap();
    let tri_lattice = tri_node_order(m).unwrap();
    let mut node_ids: HashMap<Vec<(usize, u32)>, usize> = HashMap::new();
    let mut node_coords: Vec<[f64; 3]> = Vec::new();
    let mut key_buf: Vec<(usize, u32)> = Vec::new();
    let mut get_node = |vertices: &[usize],
                        weights: &[u32],
                        node_ids: &mut HashMap<Vec<(usize, u32)>, usize>,
                        node_coords: &mut Vec<[f64; 3]>|
     -> usize {
        key_buf.clear();
        for (v, w) in vertices.iter().zip(weights) {
            if *w > 0 {
                key_buf.push((*v, *w));
            }
        }
        key_buf.sort_unstable();
        if let Some(&id) = node_ids.get(&key_buf) {
            return id;
        }
        let mut p = [0.0f64; 3];
        for (v, w) in vertices.iter().zip(weights) {
            for c in 0..3 {
                p[c] += verts[*v][c] * *w as f64 / m as f64;
            }
        }
        let id = node_coords.len();
        node_coords.push(p);
        node_ids.insert(key_buf.clone(), id);
        id
    };

    let mut tet_rows: Vec<Vec<usize>> = Vec::with_capacity(tets.len());
    for tet in &tets {
        let row: Vec<usize> = tet_lattice
            .iter()
            .map(|bary| get_node(tet, bary, &mut node_ids, &mut node_coords))
            .collect();
        tet_rows.push(row);
    }
    let mut tri_rows: Vec<(usize, Vec<usize>)> = Vec::with_capacity(boundary.len());
    for (side, f) in &boundary {
        let row: Vec<usize> = tri_lattice
            .iter()
            .map(|bary| get_node(f, &bary[..3], &mut node_ids, &mut node_coords))
            .collect();
        tri_rows.push((*side, row));
    }

    // physical groups: one per distinct face name, plus the volume
    let mut group_tags: BTreeMap<&str, i32> = BTreeMap::new();
    let mut next_tag = 11;
    for name in &opts.face_names {
        group_tags.entry(name).or_insert_with(|| {
            let t = next_tag;
            next_tag += 1;
            t
        });
    }
    let volume_tag = next_tag;

    let mut out = String::new();
    out.push_str("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n");
    out.push_str("$PhysicalNames\n");
    writeln!(out, "{}", group_tags.len() + 1).unwrap();
    for (name, tag) in &group_tags {
        writeln!(out, "2 {tag} \"{name}\"").unwrap();
    }
    writeln!(out, "3 {volume_tag} \"{}\"", opts.volume_name).unwrap();
    out.push_str("$EndPhysicalNames\n");

    out.push_str("$Entities\n");
    out.push_str("0 0 6 1\n");
    for side in 0..6usize {
        let tag = side + 1;
        let ptag = group_tags[opts.face_names[side]];
        writeln!(out, "{tag} 0 0 0 1 1 1 1 {ptag} 0").unwrap();
    }
    writeln!(out, "1 0 0 0 1 1 1 1 {volume_tag} 0").unwrap();
    out.push_str("$EndEntities\n");

    let total_nodes = node_coords.len();
    out.push_str("$Nodes\n");
    writeln!(out, "1 {total_nodes} 1 {total_nodes}").unwrap();
    writeln!(out, "3 1 0 {total_nodes}").unwrap();
    for id in 1..=total_nodes {
        writeln!(out, "{id}").unwrap();
    }
    for p in &node_coords {
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    out.push_str("$EndNodes\n");

    let total_elems = tri_rows.len() + tet_rows.len();
    out.push_str("$Elements\n");
    let mut blocks: Vec<(usize, Vec<&Vec<usize>>)> = Vec::new();
    for side in 0..6usize {
        let rows: Vec<&Vec<usize>> = tri_rows
            .iter()
            .filter(|(s, _)| *s == side)
            .map(|(_, r)| r)
            .collect();
        if !rows.is_empty() {
            blocks.push((side, rows));
        }
    }
    writeln!(out, "{} {total_elems} 1 {total_elems}", blocks.len() + 1).unwrap();
    let mut elem_id = 1usize;
    for (side, rows) in &blocks {
        writeln!(out, "2 {} {} {}", side + 1, TRI_CODES[m - 1], rows.len()).unwrap();
        for row in rows {
            write!(out, "{elem_id}").unwrap();
            for v in row.iter() {
                write!(out, " {}", v + 1).unwrap();
            }
            out.push('\n');
            elem_id += 1;
        }
    }
    writeln!(out, "3 1 {} {}", TET_CODES[m - 1], tet_rows.len()).unwrap();
    for row in &tet_rows {
        write!(out, "{elem_id}").unwrap();
        for v in row {
            write!(out, " {}", v + 1).unwrap();
        }
        out.push('\n');
        elem_id += 1;
    }
    out.push_str("$EndElements\n");
    out
}

/// Dense operators produced by the naive node-centric loop of the sort the
/// element-by-element assembly replaces: for every node (pair), search the
/// connectivity for the containing elements and integrate locally.
pub struct NaiveOperators {
    pub stiffness: Vec<Vec<f64>>,
    pub mass: Vec<Vec<f64>>,
    pub advection: Vec<Vec<f64>>,
    pub boundary_mass: Vec<Vec<f64>>,
    pub load: Vec<f64>,
    pub robin: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn naive_assemble(
    mesh: &Mesh,
    kappa: &CoefficientField,
    beta: &CoefficientField,
    c: &Expr,
    alpha: &Expr,
    f: &Expr,
    g: &Expr,
    robin_rows: &[usize],
    vol_rule: &QuadratureRule,
    bd_rule: &QuadratureRule,
    time: f64,
) -> NaiveOperators {
    let n = mesh.n_nodes();
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree).unwrap();
    let tri = ReferenceElement::new(CellKind::Triangle, mesh.degree).unwrap();

    let tet_geom = |k: usize| -> (f64, [[f64; 3]; 3]) {
        let vs = mesh.tet_vertices(k);
        let v01 = sub(vs[1], vs[0]);
        let v02 = sub(vs[2], vs[0]);
        let v03 = sub(vs[3], vs[0]);
        let det = dot(v01, cross(v02, v03));
        let b1 = cross(v02, v03);
        let b2 = cross(v03, v01);
        let b3 = cross(v01, v02);
        let binv = [
            [b1[0] / det, b1[1] / det, b1[2] / det],
            [b2[0] / det, b2[1] / det, b2[2] / det],
            [b3[0] / det, b3[1] / det, b3[2] / det],
        ];
        (det, binv)
    };
    let map_point = |k: usize, lam: &[f64; 4]| -> [f64; 3] {
        let vs = mesh.tet_vertices(k);
        let mut x = [0.0f64; 3];
        for (nv, v) in vs.iter().enumerate() {
            for ci in 0..3 {
                x[ci] += lam[nv] * v[ci];
            }
        }
        x
    };
    let kappa_at = |x: [f64; 3], tag: i32| -> [[f64; 3]; 3] {
        match kappa {
            CoefficientField::Scalar(e) => {
                let v = e.eval(x[0], x[1], x[2], time, tag as f64);
                [[v, 0.0, 0.0], [0.0, v, 0.0], [0.0, 0.0, v]]
            }
            CoefficientField::Matrix3(comps) => {
                let mut out = [[0.0f64; 3]; 3];
                for (slot, e) in comps.iter().enumerate() {
                    out[slot / 3][slot % 3] = e.eval(x[0], x[1], x[2], time, tag as f64);
                }
                out
            }
            CoefficientField::Vector3(_) => panic!("kappa cannot be a vector"),
        }
    };
    let beta_at = |x: [f64; 3], tag: i32| -> [f64; 3] {
        match beta {
            CoefficientField::Vector3(comps) => [
                comps[0].eval(x[0], x[1], x[2], time, tag as f64),
                comps[1].eval(x[0], x[1], x[2], time, tag as f64),
                comps[2].eval(x[0], x[1], x[2], time, tag as f64),
            ],
            _ => panic!("beta must be a vector"),
        }
    };

    let mut stiffness = vec![vec![0.0f64; n]; n];
    let mut mass = vec![vec![0.0f64; n]; n];
    let mut advection = vec![vec![0.0f64; n]; n];
    let mut boundary_mass = vec![vec![0.0f64; n]; n];
    let mut load = vec![0.0f64; n];
    let mut robin = vec![0.0f64; n];

    for i in 0..n {
        // search every element for this node, as the naive loop would
        let containing: Vec<(usize, usize)> = (0..mesh.n_tets())
            .filter_map(|k| {
                mesh.tets
                    .row(k)
                    .iter()
                    .position(|&v| v == i)
                    .map(|r| (k, r))
            })
            .collect();
        for &(k, r) in &containing {
            let (det, binv) = tet_geom(k);
            let tag = mesh.tet_entity[k];
            // load
            let mut acc = 0.0;
            for (q, lam) in vol_rule.points.iter().enumerate() {
                let x = map_point(k, lam);
                acc += vol_rule.weights[q]
                    * f.eval(x[0], x[1], x[2], time, tag as f64)
                    * elem.shape_value(r, lam);
            }
            load[i] += det / 6.0 * acc;

            for j in 0..n {
                let s = match mesh.tets.row(k).iter().position(|&v| v == j) {
                    Some(s) => s,
                    None => continue,
                };
                let mut m_acc = 0.0;
                let mut s_acc = 0.0;
                let mut a_acc = 0.0;
                for (q, lam) in vol_rule.points.iter().enumerate() {
                    let x = map_point(k, lam);
                    let w = vol_rule.weights[q];
                    let ni = elem.shape_value(r, lam);
                    let nj = elem.shape_value(s, lam);
                    m_acc += w * c.eval(x[0], x[1], x[2], time, tag as f64) * ni * nj;

                    let gi = elem.shape_grad_bary(r, lam);
                    let gj = elem.shape_grad_bary(s, lam);
                    let kap = kappa_at(x, tag);
                    // khat_{ab} = det * binv_a . kappa . binv_b
                    let mut contrib = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            let mut kab = 0.0;
                            for p1 in 0..3 {
                                let mut kb = 0.0;
                                for p2 in 0..3 {
                                    kb += kap[p1][p2] * binv[b][p2];
                                }
                                kab += binv[a][p1] * kb;
                            }
                            contrib += det * kab * gi[a] * gj[b];
                        }
                    }
                    s_acc += w * contrib;

                    let bvec = beta_at(x, tag);
                    let bhat = [
                        binv[0][0] * bvec[0] + binv[0][1] * bvec[1] + binv[0][2] * bvec[2],
                        binv[1][0] * bvec[0] + binv[1][1] * bvec[1] + binv[1][2] * bvec[2],
                        binv[2][0] * bvec[0] + binv[2][1] * bvec[1] + binv[2][2] * bvec[2],
                    ];
                    a_acc += w * ni * (gj[0] * bhat[0] + gj[1] * bhat[1] + gj[2] * bhat[2]);
                }
                mass[i][j] += det / 6.0 * m_acc;
                stiffness[i][j] += s_acc / 6.0;
                advection[i][j] += det / 6.0 * a_acc;
            }
        }

        // boundary terms over the Robin rows containing this node
        for &row in robin_rows {
            let r = match mesh.tris.row(row).iter().position(|&v| v == i) {
                Some(r) => r,
                None => continue,
            };
            let vs = mesh.tri_vertices(row);
            let area2 = {
                let l1 = sub(vs[0], vs[1]);
                let l2 = sub(vs[0], vs[2]);
                let c = cross(l1, l2);
                dot(c, c).sqrt()
            };
            let tag = mesh.tri_entity[row];
            let tri_point = |lam: &[f64; 4]| -> [f64; 3] {
                let mut x = [0.0f64; 3];
                for (nv, v) in vs.iter().enumerate() {
                    for ci in 0..3 {
                        x[ci] += lam[nv] * v[ci];
                    }
                }
                x
            };
            let mut t_acc = 0.0;
            for (q, lam) in bd_rule.points.iter().enumerate() {
                let x = tri_point(lam);
                t_acc += bd_rule.weights[q]
                    * g.eval(x[0], x[1], x[2], time, tag as f64)
                    * tri.shape_value(r, lam);
            }
            robin[i] += area2 / 2.0 * t_acc;

            for j in 0..n {
                let s = match mesh.tris.row(row).iter().position(|&v| v == j) {
                    Some(s) => s,
                    None => continue,
                };
                let mut r_acc = 0.0;
                for (q, lam) in bd_rule.points.iter().enumerate() {
                    let x = tri_point(lam);
                    r_acc += bd_rule.weights[q]
                        * alpha.eval(x[0], x[1], x[2], time, tag as f64)
                        * tri.shape_value(r, lam)
                        * tri.shape_value(s, lam);
                }
                boundary_mass[i][j] += area2 / 2.0 * r_acc;
            }
        }
    }

    NaiveOperators {
        stiffness,
        mass,
        advection,
        boundary_mass,
        load,
        robin,
    }
}

pub fn max_abs_diff_dense(a: &femtet::sparse::CsrMatrix, b: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows {
        for (j, row) in b[i].iter().enumerate() {
            worst = worst.max((a.get(i, j) - row).abs());
        }
    }
    worst
}

/// One P1 reference tetrahedron with its four faces as boundary triangles
/// on entity tags 1..=4 (local-face order: the z=0 face is row 3).
pub fn single_ref_tet_mesh() -> Mesh {
    let mut tets = femtet::msh::ElementTable::new(4);
    tets.push_row(&[0, 1, 2, 3]);
    let mut tris = femtet::msh::ElementTable::new(3);
    for cols in &LOCAL_FACES {
        tris.push_row(&[cols[0], cols[1], cols[2]]);
    }
    Mesh {
        coords: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        tets,
        tris,
        tet_entity: vec![1],
        tri_entity: vec![1, 2, 3, 4],
        degree: 1,
        groups: BTreeMap::new(),
        group_dims: BTreeMap::new(),
    }
}

pub fn scalar_field(src: &str) -> CoefficientField {
    CoefficientField::Scalar(femtet::expr::parse_expr(src).unwrap())
}

pub fn vector_field(x: &str, y: &str, z: &str) -> CoefficientField {
    CoefficientField::Vector3(Box::new([
        femtet::expr::parse_expr(x).unwrap(),
        femtet::expr::parse_expr(y).unwrap(),
        femtet::expr::parse_expr(z).unwrap(),
    ]))
}

pub fn expr(src: &str) -> Expr {
    femtet::expr::parse_expr(src).unwrap()
}
