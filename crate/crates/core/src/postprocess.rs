//! Point location, solution evaluation, error norms, and legacy VTK export.

use crate::element::{CellKind, ReferenceElement};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::GeometryCache;
use crate::msh::Mesh;
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Containment tolerances on barycentric negativity: strict pass first,
/// then one retry absorbing face-adjacent roundoff.
const TOL_LOC: [f64; 2] = [1e-12, 1e-8];

/// Element count above which the axis-aligned bounding-box prefilter kicks
/// in (results are identical to the brute-force scan).
const BBOX_THRESHOLD: usize = 10_000;

fn bary_in_tet(mesh: &Mesh, geom: &GeometryCache, k: usize, x: [f64; 3]) -> [f64; 4] {
    let x0 = mesh.coords[mesh.tets.row(k)[0]];
    let d = [x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]];
    let b = &geom.binv_rows[k];
    let l1 = b[0][0] * d[0] + b[0][1] * d[1] + b[0][2] * d[2];
    let l2 = b[1][0] * d[0] + b[1][1] * d[1] + b[1][2] * d[2];
    let l3 = b[2][0] * d[0] + b[2][1] * d[1] + b[2][2] * d[2];
    [1.0 - l1 - l2 - l3, l1, l2, l3]
}

fn clamp_bary(mut lam: [f64; 4]) -> [f64; 4] {
    let mut sum = 0.0;
    for l in lam.iter_mut() {
        *l = l.clamp(0.0, 1.0);
        sum += *l;
    }
    for l in lam.iter_mut() {
        *l /= sum;
    }
    lam
}

struct BBoxes {
    boxes: Vec<([f64; 3], [f64; 3])>,
}

impl BBoxes {
    fn build(mesh: &Mesh, pad: f64) -> Self {
        let boxes = (0..mesh.n_tets())
            .map(|k| {
                let v = mesh.tet_vertices(k);
                let mut lo = v[0];
                let mut hi = v[0];
                for p in &v[1..] {
                    for c in 0..3 {
                        lo[c] = lo[c].min(p[c]);
                        hi[c] = hi[c].max(p[c]);
                    }
                }
                let diag: f64 = (0..3).map(|c| (hi[c] - lo[c]).powi(2)).sum::<f64>().sqrt();
                let eps = pad * (1.0 + diag);
                for c in 0..3 {
                    lo[c] -= eps;
                    hi[c] += eps;
                }
                (lo, hi)
            })
            .collect();
        BBoxes { boxes }
    }

    #[inline]
    fn maybe_contains(&self, k: usize, x: [f64; 3]) -> bool {
        let (lo, hi) = self.boxes[k];
        (0..3).all(|c| x[c] >= lo[c] && x[c] <= hi[c])
    }
}

/// Element index and clamped barycentric coordinates of a located point;
/// `None` when the point lies outside the mesh.
pub type LocatedPoint = Option<(usize, [f64; 4])>;

/// For each point, the lowest-index element containing it (barycentric
/// coordinates all above -tol) and the clamped barycentric coordinates.
pub fn locate_points(mesh: &Mesh, geom: &GeometryCache, points: &[[f64; 3]]) -> Vec<LocatedPoint> {
    let prefilter = if mesh.n_tets() > BBOX_THRESHOLD {
        Some(BBoxes::build(mesh, TOL_LOC[1]))
    } else {
        None
    };
    let locate_one = |&x: &[f64; 3]| -> LocatedPoint {
        for tol in TOL_LOC {
            for k in 0..mesh.n_tets() {
                if let Some(bb) = &prefilter {
                    if !bb.maybe_contains(k, x) {
                        continue;
                    }
                }
                let lam = bary_in_tet(mesh, geom, k, x);
                if lam.iter().all(|&l| l >= -tol) {
                    return Some((k, clamp_bary(lam)));
                }
            }
        }
        None
    };
    points.par_iter().map(locate_one).collect()
}

/// Sparse evaluation operator: row p holds the shape-function values of the
/// element containing point p at its node columns.
#[derive(Debug, Clone)]
pub struct EvalMatrix {
    pub matrix: CsrMatrix,
    pub cells: Vec<usize>,
    pub bary: Vec<[f64; 4]>,
}

impl EvalMatrix {
    pub fn evaluate(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.matvec(u)
    }
}

pub fn build_eval_matrix(
    mesh: &Mesh,
    points: &[[f64; 3]],
    located: &[LocatedPoint],
) -> Result<EvalMatrix> {
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let mut row_ptr = Vec::with_capacity(located.len() + 1);
    row_ptr.push(0usize);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    let mut cells = Vec::with_capacity(located.len());
    let mut bary = Vec::with_capacity(located.len());
    for (p, loc) in located.iter().enumerate() {
        let (k, lam) = loc.ok_or(Error::UnlocatedPoint {
            index: p,
            x: points[p][0],
            y: points[p][1],
            z: points[p][2],
        })?;
        let nodes = mesh.tets.row(k);
        // sort columns for CSR validity
        let mut entries: Vec<(usize, f64)> = (0..elem.dof)
            .map(|r| (nodes[r], elem.shape_value(r, &lam)))
            .collect();
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
        cells.push(k);
        bary.push(lam);
    }
    let matrix = CsrMatrix {
        nrows: located.len(),
        ncols: mesh.n_nodes(),
        row_ptr,
        col_idx,
        vals,
    };
    Ok(EvalMatrix {
        matrix,
        cells,
        bary,
    })
}

/// L2 and H1-seminorm errors of the nodal field `u` against an exact
/// solution and its gradient, by elementwise quadrature.
pub fn error_norms(
    mesh: &Mesh,
    geom: &GeometryCache,
    u: &[f64],
    exact: &Expr,
    exact_grad: &[Expr; 3],
    rule: &QuadratureRule,
    t: f64,
) -> Result<(f64, f64)> {
    assert_eq!(rule.cell, CellKind::Tetrahedron);
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let table = crate::assembly::ShapeTable::new(&elem, rule);
    let nq = rule.len();
    let mut l2 = 0.0f64;
    let mut h1 = 0.0f64;
    let mut points = Vec::with_capacity(nq);
    for k in 0..mesh.n_tets() {
        points.clear();
        let verts = mesh.tet_vertices(k);
        for lam in &rule.points {
            let mut x = [0.0f64; 3];
            for (n, v) in verts.iter().enumerate() {
                for c in 0..3 {
                    x[c] += lam[n] * v[c];
                }
            }
            points.push(x);
        }
        let tags = vec![mesh.tet_entity[k]; nq];
        let ue = exact.eval_batch(&points, t, &tags)?;
        let gx = exact_grad[0].eval_batch(&points, t, &tags)?;
        let gy = exact_grad[1].eval_batch(&points, t, &tags)?;
        let gz = exact_grad[2].eval_batch(&points, t, &tags)?;
        let nodes = mesh.tets.row(k);
        let binv = &geom.binv_rows[k];
        let scale = geom.det_b[k] / 6.0;
        for q in 0..nq {
            let mut uh = 0.0;
            let mut ghat = [0.0f64; 3];
            for r in 0..table.dof {
                let ur = u[nodes[r]];
                uh += ur * table.value(r, q);
                let g = table.grad(r, q);
                for c in 0..3 {
                    ghat[c] += ur * g[c];
                }
            }
            // physical gradient: grad_x = sum_k ghat_k * binv_row_k
            let gphys = [
                ghat[0] * binv[0][0] + ghat[1] * binv[1][0] + ghat[2] * binv[2][0],
                ghat[0] * binv[0][1] + ghat[1] * binv[1][1] + ghat[2] * binv[2][1],
                ghat[0] * binv[0][2] + ghat[1] * binv[1][2] + ghat[2] * binv[2][2],
            ];
            let w = rule.weights[q] * scale;
            let du = uh - ue[q];
            l2 += w * du * du;
            let dg = [gphys[0] - gx[q], gphys[1] - gy[q], gphys[2] - gz[q]];
            h1 += w * (dg[0] * dg[0] + dg[1] * dg[1] + dg[2] * dg[2]);
        }
    }
    // rules with negative weights can leave a tiny negative residue
    Ok((l2.max(0.0).sqrt(), h1.max(0.0).sqrt()))
}

/// Write nodal fields as a legacy ASCII VTK unstructured grid. Cells are
/// vertex-only tetrahedra (type 10) from the first four connectivity
/// columns; for degree >= 2 the remaining nodes are exported as points
/// carrying data but attached to no cell.
pub fn write_vtk(mesh: &Mesh, fields: &[(&str, &[f64])], path: &Path) -> Result<()> {
    for (name, data) in fields {
        if data.len() != mesh.n_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "field \"{name}\" has {} values for {} nodes",
                data.len(),
                mesh.n_nodes()
            )));
        }
    }
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "femtet output")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", mesh.n_nodes())?;
        for p in &mesh.coords {
            writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
        }
        writeln!(w, "CELLS {} {}", mesh.n_tets(), mesh.n_tets() * 5)?;
        for k in 0..mesh.n_tets() {
            let r = mesh.tets.row(k);
            writeln!(w, "4 {} {} {} {}", r[0], r[1], r[2], r[3])?;
        }
        writeln!(w, "CELL_TYPES {}", mesh.n_tets())?;
        for _ in 0..mesh.n_tets() {
            writeln!(w, "10")?;
        }
        writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
        for (name, data) in fields {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *data {
                writeln!(w, "{v}")?;
            }
        }
        w.flush()
    };
    emit().map_err(io_err)
}
