//! Dirichlet elimination, iterative and dense linear solvers, and
//! Crank-Nicolson time stepping.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::BoundaryClassification;
use crate::msh::Mesh;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// cg when the reduced matrix is symmetric, bicgstab otherwise.
    Auto,
    Cg,
    BiCgStab,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Relative residual target, in (0, 1).
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Auto,
            tol: 1e-10,
            max_iter: 10_000,
            preconditioner: Preconditioner::Jacobi,
            verbose: false,
        }
    }
}

/// Largest reduced system the dense fallback accepts.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone)]
pub struct Solution {
    /// Nodal values; Dirichlet entries hold the prescribed data verbatim.
    pub u: Vec<f64>,
    pub iterations: usize,
    /// True residual of the reduced system, recomputed from scratch.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn jacobi_diag(a: &CsrMatrix, precond: Preconditioner) -> Option<Vec<f64>> {
    match precond {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(
            a.diag()
                .into_iter()
                .map(|d| if d.abs() > 0.0 { d } else { 1.0 })
                .collect(),
        ),
    }
}

struct IterOutcome {
    x: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn cg_inner(a: &CsrMatrix, rhs: &[f64], x0: Option<&[f64]>, cfg: &SolverConfig) -> IterOutcome {
    let n = rhs.len();
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return IterOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let diag = jacobi_diag(a, cfg.preconditioner);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = rhs.to_vec();
    let ax = a.matvec(&x);
    for i in 0..n {
        r[i] -= ax[i];
    }
    let apply_m = |r: &[f64]| -> Vec<f64> {
        match &diag {
            Some(d) => r.iter().zip(d).map(|(v, di)| v / di).collect(),
            None => r.to_vec(),
        }
    };
    let mut z = apply_m(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = cfg.tol * bnorm;
    let mut iterations = 0;
    let mut q = vec![0.0; n];
    while iterations < cfg.max_iter {
        if norm(&r) <= target {
            break;
        }
        a.matvec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq == 0.0 {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        z = apply_m(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        if cfg.verbose && iterations % 50 == 0 {
            eprintln!("cg iter {iterations}: residual {:.3e}", norm(&r));
        }
    }
    // recompute the true residual
    let ax = a.matvec(&x);
    let res = rhs
        .iter()
        .zip(&ax)
        .map(|(b, v)| (b - v) * (b - v))
        .sum::<f64>()
        .sqrt();
    IterOutcome {
        x,
        iterations,
        residual: res,
        converged: res <= target,
    }
}

fn bicgstab_inner(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterOutcome> {
    let n = rhs.len();
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok(IterOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }
    let diag = jacobi_diag(a, cfg.preconditioner);
    let apply_m = |r: &[f64]| -> Vec<f64> {
        match &diag {
            Some(d) => r.iter().zip(d).map(|(v, di)| v / di).collect(),
            None => r.to_vec(),
        }
    };
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = rhs.to_vec();
    let ax = a.matvec(&x);
    for i in 0..n {
        r[i] -= ax[i];
    }
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let target = cfg.tol * bnorm;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        if norm(&r) <= target {
            break;
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::BreakdownDetected(rho_new));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = apply_m(&p);
        a.matvec_into(&ph, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < 1e-300 {
            return Err(Error::BreakdownDetected(rv));
        }
        alpha = rho / rv;
        let s: Vec<f64> = (0..n).map(|i| r[i] - alpha * v[i]).collect();
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            iterations += 1;
            break;
        }
        let sh = apply_m(&s);
        let t_vec = a.matvec(&sh);
        let tt = dot(&t_vec, &t_vec);
        omega = if tt > 0.0 { dot(&t_vec, &s) / tt } else { 0.0 };
        if omega == 0.0 {
            return Err(Error::BreakdownDetected(0.0));
        }
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t_vec[i];
        }
        iterations += 1;
        if cfg.verbose && iterations % 50 == 0 {
            eprintln!("bicgstab iter {iterations}: residual {:.3e}", norm(&r));
        }
    }
    let ax = a.matvec(&x);
    let res = rhs
        .iter()
        .zip(&ax)
        .map(|(b, w)| (b - w) * (b - w))
        .sum::<f64>()
        .sqrt();
    Ok(IterOutcome {
        x,
        iterations,
        residual: res,
        converged: res <= target,
    })
}

/// Conjugate gradients for symmetric positive definite systems.
pub fn cg_solve(a: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, usize, f64)> {
    let out = cg_inner(a, rhs, None, cfg);
    if out.converged {
        Ok((out.x, out.iterations, out.residual))
    } else {
        Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.residual,
        })
    }
}

/// BiCGSTAB for general nonsingular systems.
pub fn bicgstab_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, usize, f64)> {
    let out = bicgstab_inner(a, rhs, None, cfg)?;
    if out.converged {
        Ok((out.x, out.iterations, out.residual))
    } else {
        Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.residual,
        })
    }
}

/// Dense LU with partial pivoting; intended for small test systems.
pub fn dense_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    if n > DENSE_LIMIT {
        return Err(Error::Config(format!(
            "dense solver limited to {DENSE_LIMIT} unknowns, got {n}"
        )));
    }
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (c, v) in cols.iter().zip(vals) {
            m[i * n + c] = *v;
        }
    }
    let scale = a.max_abs().max(1e-300);
    let mut x = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = m[perm[k] * n + k].abs();
        for r in (k + 1)..n {
            let v = m[perm[r] * n + k].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= 1e-14 * scale {
            return Err(Error::SingularSystem(k));
        }
        perm.swap(k, pivot_row);
        let pk = perm[k];
        let inv = 1.0 / m[pk * n + k];
        for r in (k + 1)..n {
            let pr = perm[r];
            let f = m[pr * n + k] * inv;
            if f == 0.0 {
                continue;
            }
            m[pr * n + k] = 0.0;
            for c in (k + 1)..n {
                m[pr * n + c] -= f * m[pk * n + c];
            }
            x[pr] -= f * x[pk];
        }
    }
    let mut sol = vec![0.0; n];
    for k in (0..n).rev() {
        let pk = perm[k];
        let mut acc = x[pk];
        for c in (k + 1)..n {
            acc -= m[pk * n + c] * sol[c];
        }
        sol[k] = acc / m[pk * n + k];
    }
    Ok(sol)
}

/// Reduced system after Dirichlet elimination: the free-node block of `c`
/// and the right-hand side with the fixed-node coupling moved over.
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    /// (local free row, global fixed column, value) couplings into iD.
    couplings: Vec<(usize, usize, f64)>,
    /// Global index of each local unknown.
    pub free: Vec<usize>,
    /// Global-to-local map; usize::MAX marks fixed nodes.
    local_of: Vec<usize>,
}

impl ReducedSystem {
    pub fn new(c: &CsrMatrix, bc: &BoundaryClassification) -> Self {
        let n = c.nrows;
        let mut local_of = vec![usize::MAX; n];
        for (loc, &g) in bc.free_nodes.iter().enumerate() {
            local_of[g] = loc;
        }
        let nf = bc.free_nodes.len();
        let mut row_ptr = Vec::with_capacity(nf + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut couplings = Vec::new();
        for (loc, &g) in bc.free_nodes.iter().enumerate() {
            let (cols, vs) = c.row(g);
            for (cj, v) in cols.iter().zip(vs) {
                let lj = local_of[*cj];
                if lj == usize::MAX {
                    couplings.push((loc, *cj, *v));
                } else {
                    col_idx.push(lj);
                    vals.push(*v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let matrix = CsrMatrix {
            nrows: nf,
            ncols: nf,
            row_ptr,
            col_idx,
            vals,
        };
        ReducedSystem {
            matrix,
            couplings,
            free: bc.free_nodes.clone(),
            local_of,
        }
    }

    /// d(free) - C(free, fixed) * u(fixed), with `fixed_values` full length.
    pub fn reduce_rhs(&self, d: &[f64], fixed_values: &[f64]) -> Vec<f64> {
        let mut rhs: Vec<f64> = self.free.iter().map(|&g| d[g]).collect();
        for &(loc, gcol, v) in &self.couplings {
            rhs[loc] -= v * fixed_values[gcol];
        }
        rhs
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        match self.local_of[global] {
            usize::MAX => None,
            l => Some(l),
        }
    }
}

/// Solve the reduced system with the configured method, restarting the
/// Krylov iteration (fresh search space from the current iterate) up to two
/// times if the recomputed residual misses the target.
fn solve_reduced(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, usize, f64)> {
    let method = match cfg.method {
        Method::Auto => {
            let scale = a.max_abs().max(1e-300);
            if a.asymmetry() <= 1e-12 * scale {
                Method::Cg
            } else {
                Method::BiCgStab
            }
        }
        m => m,
    };
    match method {
        Method::Dense => {
            let x = dense_solve(a, rhs)?;
            let ax = a.matvec(&x);
            let res = rhs
                .iter()
                .zip(&ax)
                .map(|(b, v)| (b - v) * (b - v))
                .sum::<f64>()
                .sqrt();
            Ok((x, 1, res))
        }
        m => {
            let mut guess: Option<Vec<f64>> = x0.map(|v| v.to_vec());
            let mut total_iters = 0;
            let mut last = None;
            for _attempt in 0..3 {
                let out = match m {
                    Method::Cg => cg_inner(a, rhs, guess.as_deref(), cfg),
                    Method::BiCgStab => bicgstab_inner(a, rhs, guess.as_deref(), cfg)?,
                    _ => unreachable!(),
                };
                total_iters += out.iterations;
                if out.converged {
                    return Ok((out.x, total_iters, out.residual));
                }
                guess = Some(out.x.clone());
                last = Some(out);
            }
            let out = last.expect("at least one attempt");
            Err(Error::NoConvergence {
                iterations: total_iters,
                residual: out.residual,
            })
        }
    }
}

/// Dirichlet values at the boundary nodes, evaluated face by face so the
/// expression sees the owning entity tag; nodes shared by several Dirichlet
/// faces take the value of the last face in row order.
pub fn dirichlet_values(
    mesh: &Mesh,
    bc: &BoundaryClassification,
    u_d: &Expr,
    t: f64,
) -> Result<Vec<f64>> {
    let mut values = vec![0.0f64; mesh.n_nodes()];
    for (row, &on) in bc.gamma_d.iter().enumerate() {
        if !on {
            continue;
        }
        let tag = mesh.tri_entity[row];
        for &node in mesh.tris.row(row) {
            values[node] = u_d.eval_checked(mesh.coords[node], t, tag)?;
        }
    }
    Ok(values)
}

/// Steady solve: impose Dirichlet data by elimination, solve the free
/// block, and scatter back.
pub fn solve_steady(
    mesh: &Mesh,
    c: &CsrMatrix,
    d: &[f64],
    bc: &BoundaryClassification,
    u_d: &Expr,
    cfg: &SolverConfig,
    t: f64,
) -> Result<Solution> {
    if c.nrows != mesh.n_nodes() || d.len() != c.nrows {
        return Err(Error::ShapeMismatch(format!(
            "system is {}x{} with rhs {} for {} nodes",
            c.nrows,
            c.ncols,
            d.len(),
            mesh.n_nodes()
        )));
    }
    let fixed = dirichlet_values(mesh, bc, u_d, t)?;
    let reduced = ReducedSystem::new(c, bc);
    let rhs = reduced.reduce_rhs(d, &fixed);
    let (x, iterations, residual) = solve_reduced(&reduced.matrix, &rhs, None, cfg)?;
    let mut u = vec![0.0f64; mesh.n_nodes()];
    for &g in &bc.dirichlet_nodes {
        u[g] = fixed[g];
    }
    for (loc, &g) in reduced.free.iter().enumerate() {
        u[g] = x[loc];
    }
    Ok(Solution {
        u,
        iterations,
        residual,
    })
}

/// Crank-Nicolson stepping of `M_rho du/dt + C u = d(t)`:
/// `(M/tau + C/2) u_next = (M/tau - C/2) u + (d_next + d)/2`,
/// with Dirichlet data imposed at the new time level each step. The reduced
/// left-hand matrix is built once and reused across all steps.
#[allow(clippy::too_many_arguments)]
pub fn crank_nicolson(
    mesh: &Mesh,
    m_rho: &CsrMatrix,
    c: &CsrMatrix,
    mut rhs_at: impl FnMut(f64) -> Result<Vec<f64>>,
    u0: &[f64],
    tau: f64,
    t_start: f64,
    t_end: f64,
    bc: &BoundaryClassification,
    u_d: &Expr,
    cfg: &SolverConfig,
    snapshot_every: usize,
) -> Result<Vec<(f64, Solution)>> {
    assert!(tau > 0.0, "time step must be positive");
    let n_steps = (((t_end - t_start) / tau) - 1e-9).ceil().max(1.0) as usize;
    let lhs = m_rho.add_scaled(1.0 / tau, c, 0.5)?;
    let rhs_mat = m_rho.add_scaled(1.0 / tau, c, -0.5)?;
    let reduced = ReducedSystem::new(&lhs, bc);

    let mut u = u0.to_vec();
    let fixed0 = dirichlet_values(mesh, bc, u_d, t_start)?;
    for &g in &bc.dirichlet_nodes {
        u[g] = fixed0[g];
    }

    let every = snapshot_every.max(1);
    let mut snapshots = Vec::new();
    let mut d_old = rhs_at(t_start)?;
    let mut warm: Option<Vec<f64>> = None;
    for step in 1..=n_steps {
        let t_new = t_start + tau * step as f64;
        let d_new = rhs_at(t_new)?;
        let mut full_rhs = rhs_mat.matvec(&u);
        for i in 0..full_rhs.len() {
            full_rhs[i] += 0.5 * (d_new[i] + d_old[i]);
        }
        let fixed = dirichlet_values(mesh, bc, u_d, t_new)?;
        let rhs = reduced.reduce_rhs(&full_rhs, &fixed);
        let (x, iterations, residual) = solve_reduced(&reduced.matrix, &rhs, warm.as_deref(), cfg)?;
        for &g in &bc.dirichlet_nodes {
            u[g] = fixed[g];
        }
        for (loc, &g) in reduced.free.iter().enumerate() {
            u[g] = x[loc];
        }
        warm = Some(x);
        d_old = d_new;
        if step % every == 0 || step == n_steps {
            snapshots.push((
                t_new,
                Solution {
                    u: u.clone(),
                    iterations,
                    residual,
                },
            ));
        }
    }
    Ok(snapshots)
}
