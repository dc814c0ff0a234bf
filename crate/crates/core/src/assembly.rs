//! Element-by-element assembly of the global FEM operators: stiffness,
//! mass, advection, boundary mass, load vector and Robin vector.
//!
//! Elements are processed in fixed-size chunks; each chunk evaluates its
//! coefficients in one batch and produces a triplet buffer. Buffers are
//! merged in chunk order and duplicate-summed after a stable sort, so the
//! assembled values are bitwise identical regardless of thread count.

use crate::element::{CellKind, ReferenceElement};
use crate::error::{Error, Result};
use crate::expr::CoefficientField;
use crate::geometry::GeometryCache;
use crate::msh::Mesh;
use crate::quadrature::QuadratureRule;
use crate::sparse::{CsrMatrix, TripletBuffer};
use rayon::prelude::*;

const CHUNK: usize = 512;

/// Quadrature exactness used by default for all operators of a degree-m
/// space: exact for constant coefficients, adequate for smooth ones.
pub fn default_rule_degree(m: usize) -> usize {
    2 * m
}

/// Shape-function values and reference gradients tabulated at the points of
/// a quadrature rule; computed once per assembly call and shared across
/// elements.
pub struct ShapeTable {
    pub dof: usize,
    pub nq: usize,
    values: Vec<f64>,
    grads: Vec<[f64; 3]>,
}

impl ShapeTable {
    pub fn new(elem: &ReferenceElement, rule: &QuadratureRule) -> Self {
        assert_eq!(elem.cell, rule.cell);
        let dof = elem.dof;
        let nq = rule.len();
        let mut values = Vec::with_capacity(dof * nq);
        let mut grads = Vec::with_capacity(dof * nq);
        for r in 0..dof {
            for p in &rule.points {
                let (v, dl) = elem.shape_value_bary_grad(r, p);
                values.push(v);
                let mut g = [0.0; 3];
                for k in 0..elem.cell.dim() {
                    g[k] = dl[k + 1] - dl[0];
                }
                grads.push(g);
            }
        }
        ShapeTable {
            dof,
            nq,
            values,
            grads,
        }
    }

    #[inline]
    pub fn value(&self, r: usize, q: usize) -> f64 {
        self.values[r * self.nq + q]
    }

    #[inline]
    pub fn grad(&self, r: usize, q: usize) -> [f64; 3] {
        self.grads[r * self.nq + q]
    }
}

/// Physical coordinates of the rule points inside tetrahedron `k`.
fn map_tet_points(mesh: &Mesh, k: usize, rule: &QuadratureRule, out: &mut Vec<[f64; 3]>) {
    let verts = mesh.tet_vertices(k);
    for lam in &rule.points {
        let mut x = [0.0f64; 3];
        for (n, v) in verts.iter().enumerate() {
            for c in 0..3 {
                x[c] += lam[n] * v[c];
            }
        }
        out.push(x);
    }
}

fn map_tri_points(mesh: &Mesh, row: usize, rule: &QuadratureRule, out: &mut Vec<[f64; 3]>) {
    let verts = mesh.tri_vertices(row);
    for lam in &rule.points {
        let mut x = [0.0f64; 3];
        for (n, v) in verts.iter().enumerate() {
            for c in 0..3 {
                x[c] += lam[n] * v[c];
            }
        }
        out.push(x);
    }
}

fn chunk_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(n))
        .collect()
}

/// Batched coefficient evaluation at the mapped quadrature points of an
/// element range: one value per (element, point) pair.
fn eval_on_tet_chunk(
    mesh: &Mesh,
    rule: &QuadratureRule,
    range: &std::ops::Range<usize>,
    e: &crate::expr::Expr,
    t: f64,
) -> Result<Vec<f64>> {
    let nq = rule.len();
    let mut points = Vec::with_capacity(range.len() * nq);
    let mut tags = Vec::with_capacity(range.len() * nq);
    for k in range.clone() {
        map_tet_points(mesh, k, rule, &mut points);
        tags.extend(std::iter::repeat_n(mesh.tet_entity[k], nq));
    }
    e.eval_batch(&points, t, &tags)
}

/// Load vector: b_i = sum over elements of det/6 * sum_q w_q f(x_q) N_r(q).
pub fn assemble_load(
    mesh: &Mesh,
    geom: &GeometryCache,
    f: &CoefficientField,
    rule: &QuadratureRule,
    t: f64,
) -> Result<Vec<f64>> {
    assert_eq!(rule.cell, CellKind::Tetrahedron);
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let fe = f.as_scalar();
    let nq = rule.len();

    let chunks = chunk_ranges(mesh.n_tets());
    let partials: Vec<Vec<(u32, f64)>> = chunks
        .par_iter()
        .map(|range| -> Result<Vec<(u32, f64)>> {
            let fv = eval_on_tet_chunk(mesh, rule, range, fe, t)?;
            let mut out = Vec::with_capacity(range.len() * table.dof);
            for (ei, k) in range.clone().enumerate() {
                let scale = geom.det_b[k] / 6.0;
                let row = mesh.tets.row(k);
                for r in 0..table.dof {
                    let mut acc = 0.0;
                    for q in 0..nq {
                        acc += rule.weights[q] * fv[ei * nq + q] * table.value(r, q);
                    }
                    out.push((row[r] as u32, scale * acc));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut b = vec![0.0f64; mesh.n_nodes()];
    for part in partials {
        for (i, v) in part {
            b[i as usize] += v;
        }
    }
    Ok(b)
}

/// Robin vector over the given boundary rows:
/// t_i = sum of |l1 x l2|/2 * sum_q w_q g(x_q) N_r(q).
pub fn assemble_robin_vector(
    mesh: &Mesh,
    geom: &GeometryCache,
    g: &CoefficientField,
    robin_rows: &[usize],
    rule: &QuadratureRule,
    t: f64,
) -> Result<Vec<f64>> {
    assert_eq!(rule.cell, CellKind::Triangle);
    let elem = ReferenceElement::new(CellKind::Triangle, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let ge = g.as_scalar();
    let nq = rule.len();

    let mut b = vec![0.0f64; mesh.n_nodes()];
    let mut points = Vec::new();
    let mut tags = Vec::new();
    for &row in robin_rows {
        points.clear();
        tags.clear();
        map_tri_points(mesh, row, rule, &mut points);
        tags.extend(std::iter::repeat_n(mesh.tri_entity[row], nq));
        let gv = ge.eval_batch(&points, t, &tags)?;
        let scale = geom.bd_area2[row] / 2.0;
        let nodes = mesh.tris.row(row);
        for r in 0..table.dof {
            let mut acc = 0.0;
            for q in 0..nq {
                acc += rule.weights[q] * gv[q] * table.value(r, q);
            }
            b[nodes[r]] += scale * acc;
        }
    }
    Ok(b)
}

/// Mass matrix M_c with a scalar coefficient.
pub fn assemble_mass(
    mesh: &Mesh,
    geom: &GeometryCache,
    c: &CoefficientField,
    rule: &QuadratureRule,
    t: f64,
) -> Result<CsrMatrix> {
    assert_eq!(rule.cell, CellKind::Tetrahedron);
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let ce = c.as_scalar();
    let nq = rule.len();
    let dof = table.dof;
    let n = mesh.n_nodes();

    let chunks = chunk_ranges(mesh.n_tets());
    let buffers: Vec<TripletBuffer> = chunks
        .par_iter()
        .map(|range| -> Result<TripletBuffer> {
            let cv = eval_on_tet_chunk(mesh, rule, range, ce, t)?;
            let mut buf = TripletBuffer::with_capacity(n, n, range.len() * dof * dof);
            let mut local = vec![0.0f64; dof * dof];
            for (ei, k) in range.clone().enumerate() {
                local.iter_mut().for_each(|v| *v = 0.0);
                let scale = geom.det_b[k] / 6.0;
                for q in 0..nq {
                    let wq = rule.weights[q] * cv[ei * nq + q] * scale;
                    if wq == 0.0 {
                        continue;
                    }
                    for r in 0..dof {
                        let nr = table.value(r, q) * wq;
                        for s in 0..dof {
                            local[r * dof + s] += nr * table.value(s, q);
                        }
                    }
                }
                let nodes = mesh.tets.row(k);
                for r in 0..dof {
                    for s in 0..dof {
                        buf.push(nodes[r], nodes[s], local[r * dof + s]);
                    }
                }
            }
            Ok(buf)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(buffers, n))
}

/// Boundary mass matrix R_alpha over the given rows.
pub fn assemble_boundary_mass(
    mesh: &Mesh,
    geom: &GeometryCache,
    alpha: &CoefficientField,
    robin_rows: &[usize],
    rule: &QuadratureRule,
    t: f64,
) -> Result<CsrMatrix> {
    assert_eq!(rule.cell, CellKind::Triangle);
    let elem = ReferenceElement::new(CellKind::Triangle, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let ae = alpha.as_scalar();
    let nq = rule.len();
    let dof = table.dof;
    let n = mesh.n_nodes();

    let mut buf = TripletBuffer::with_capacity(n, n, robin_rows.len() * dof * dof);
    let mut points = Vec::new();
    let mut tags = Vec::new();
    for &row in robin_rows {
        points.clear();
        tags.clear();
        map_tri_points(mesh, row, rule, &mut points);
        tags.extend(std::iter::repeat_n(mesh.tri_entity[row], nq));
        let av = ae.eval_batch(&points, t, &tags)?;
        let scale = geom.bd_area2[row] / 2.0;
        let nodes = mesh.tris.row(row);
        for r in 0..dof {
            for s in 0..dof {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * av[q] * table.value(r, q) * table.value(s, q);
                }
                buf.push(nodes[r], nodes[s], scale * acc);
            }
        }
    }
    Ok(buf.to_csr())
}

/// Per-point diffusion tensor components at the chunk's quadrature points,
/// row-major; a scalar field is promoted to k*I.
fn eval_kappa_chunk(
    mesh: &Mesh,
    rule: &QuadratureRule,
    range: &std::ops::Range<usize>,
    kappa: &CoefficientField,
    t: f64,
) -> Result<[Vec<f64>; 9]> {
    match kappa {
        CoefficientField::Matrix3(comps) => {
            let mut out: [Vec<f64>; 9] = Default::default();
            for (slot, e) in comps.iter().enumerate() {
                out[slot] = eval_on_tet_chunk(mesh, rule, range, e, t)?;
            }
            Ok(out)
        }
        CoefficientField::Scalar(e) => {
            let kv = eval_on_tet_chunk(mesh, rule, range, e, t)?;
            let zeros = vec![0.0; kv.len()];
            Ok([
                kv.clone(),
                zeros.clone(),
                zeros.clone(),
                zeros.clone(),
                kv.clone(),
                zeros.clone(),
                zeros.clone(),
                zeros,
                kv,
            ])
        }
        CoefficientField::Vector3(_) => Err(Error::ShapeMismatch(
            "diffusion coefficient must be a scalar or a 3x3 matrix field".into(),
        )),
    }
}

/// Stiffness matrix S_kappa. The transformed tensor
/// `det(B) * Binv * kappa * Binv^T` is formed per element and quadrature
/// point from the cached inverse-map rows; the quadrature application then
/// carries only the 1/6 reference measure.
pub fn assemble_stiffness(
    mesh: &Mesh,
    geom: &GeometryCache,
    kappa: &CoefficientField,
    rule: &QuadratureRule,
    t: f64,
) -> Result<CsrMatrix> {
    assert_eq!(rule.cell, CellKind::Tetrahedron);
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let nq = rule.len();
    let dof = table.dof;
    let n = mesh.n_nodes();

    let chunks = chunk_ranges(mesh.n_tets());
    let buffers: Vec<TripletBuffer> = chunks
        .par_iter()
        .map(|range| -> Result<TripletBuffer> {
            let kv = eval_kappa_chunk(mesh, rule, range, kappa, t)?;
            let mut buf = TripletBuffer::with_capacity(n, n, range.len() * dof * dof);
            let mut local = vec![0.0f64; dof * dof];
            let mut hs = vec![[0.0f64; 3]; dof];
            for (ei, k) in range.clone().enumerate() {
                local.iter_mut().for_each(|v| *v = 0.0);
                let det = geom.det_b[k];
                let binv = &geom.binv_rows[k];
                for q in 0..nq {
                    let at = |slot: usize| kv[slot][ei * nq + q];
                    let kap = [
                        [at(0), at(1), at(2)],
                        [at(3), at(4), at(5)],
                        [at(6), at(7), at(8)],
                    ];
                    // kappa_hat[a][b] = det * binv_a . (kappa binv_b)
                    let mut khat = [[0.0f64; 3]; 3];
                    for a in 0..3 {
                        for b in 0..3 {
                            let mut acc = 0.0;
                            for i in 0..3 {
                                let mut kb = 0.0;
                                for j in 0..3 {
                                    kb += kap[i][j] * binv[b][j];
                                }
                                acc += binv[a][i] * kb;
                            }
                            khat[a][b] = det * acc;
                        }
                    }
                    let w6 = rule.weights[q] / 6.0;
                    for (s, h) in hs.iter_mut().enumerate() {
                        let g = table.grad(s, q);
                        for a in 0..3 {
                            h[a] = khat[a][0] * g[0] + khat[a][1] * g[1] + khat[a][2] * g[2];
                        }
                    }
                    for r in 0..dof {
                        let gr = table.grad(r, q);
                        for s in 0..dof {
                            let h = hs[s];
                            local[r * dof + s] += w6 * (gr[0] * h[0] + gr[1] * h[1] + gr[2] * h[2]);
                        }
                    }
                }
                let nodes = mesh.tets.row(k);
                for r in 0..dof {
                    for s in 0..dof {
                        buf.push(nodes[r], nodes[s], local[r * dof + s]);
                    }
                }
            }
            Ok(buf)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(buffers, n))
}

/// Advection matrix A_beta:
/// entries det/6 * sum_q w_q N_r (grad_hat N_s . Binv beta).
pub fn assemble_advection(
    mesh: &Mesh,
    geom: &GeometryCache,
    beta: &CoefficientField,
    rule: &QuadratureRule,
    t: f64,
) -> Result<CsrMatrix> {
    assert_eq!(rule.cell, CellKind::Tetrahedron);
    let comps = match beta {
        CoefficientField::Vector3(v) => v,
        _ => {
            return Err(Error::ShapeMismatch(
                "velocity coefficient must be a 3-vector field".into(),
            ))
        }
    };
    let elem = ReferenceElement::new(CellKind::Tetrahedron, mesh.degree)?;
    let table = ShapeTable::new(&elem, rule);
    let nq = rule.len();
    let dof = table.dof;
    let n = mesh.n_nodes();

    let chunks = chunk_ranges(mesh.n_tets());
    let buffers: Vec<TripletBuffer> = chunks
        .par_iter()
        .map(|range| -> Result<TripletBuffer> {
            let bx = eval_on_tet_chunk(mesh, rule, range, &comps[0], t)?;
            let by = eval_on_tet_chunk(mesh, rule, range, &comps[1], t)?;
            let bz = eval_on_tet_chunk(mesh, rule, range, &comps[2], t)?;
            let mut buf = TripletBuffer::with_capacity(n, n, range.len() * dof * dof);
            let mut local = vec![0.0f64; dof * dof];
            for (ei, k) in range.clone().enumerate() {
                local.iter_mut().for_each(|v| *v = 0.0);
                let scale = geom.det_b[k] / 6.0;
                let binv = &geom.binv_rows[k];
                for q in 0..nq {
                    let b = [bx[ei * nq + q], by[ei * nq + q], bz[ei * nq + q]];
                    let bhat = [
                        binv[0][0] * b[0] + binv[0][1] * b[1] + binv[0][2] * b[2],
                        binv[1][0] * b[0] + binv[1][1] * b[1] + binv[1][2] * b[2],
                        binv[2][0] * b[0] + binv[2][1] * b[1] + binv[2][2] * b[2],
                    ];
                    let wq = rule.weights[q] * scale;
                    for s in 0..dof {
                        let gs = table.grad(s, q);
                        let adv = (gs[0] * bhat[0] + gs[1] * bhat[1] + gs[2] * bhat[2]) * wq;
                        if adv == 0.0 {
                            continue;
                        }
                        for r in 0..dof {
                            local[r * dof + s] += table.value(r, q) * adv;
                        }
                    }
                }
                let nodes = mesh.tets.row(k);
                for r in 0..dof {
                    for s in 0..dof {
                        buf.push(nodes[r], nodes[s], local[r * dof + s]);
                    }
                }
            }
            Ok(buf)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(buffers, n))
}

fn merge(buffers: Vec<TripletBuffer>, n: usize) -> CsrMatrix {
    let mut all = TripletBuffer::with_capacity(n, n, buffers.iter().map(|b| b.len()).sum());
    for mut b in buffers {
        all.append(&mut b);
    }
    all.to_csr()
}

/// C = S + R + A + M and d = b + t.
pub fn combine_system(
    s: &CsrMatrix,
    r: &CsrMatrix,
    a: &CsrMatrix,
    m: &CsrMatrix,
    b: &[f64],
    t: &[f64],
) -> Result<(CsrMatrix, Vec<f64>)> {
    if b.len() != t.len() || b.len() != s.nrows {
        return Err(Error::ShapeMismatch(format!(
            "vector lengths {} and {} against {} rows",
            b.len(),
            t.len(),
            s.nrows
        )));
    }
    let c = s.add(r)?.add(a)?.add(m)?;
    let d = b.iter().zip(t).map(|(x, y)| x + y).collect();
    Ok((c, d))
}
