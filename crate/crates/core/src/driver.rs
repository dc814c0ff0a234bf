//! End-to-end pipeline shared by the CLI subcommands: parse, preprocess,
//! assemble, solve (steady or Crank-Nicolson), and produce outputs.

use crate::assembly::{
    assemble_advection, assemble_boundary_mass, assemble_load, assemble_mass,
    assemble_robin_vector, assemble_stiffness, combine_system, default_rule_degree,
};
use crate::config::{RunConfig, TransientSpec};
use crate::element::CellKind;
use crate::error::{Error, Result};
use crate::expr::{CoefficientField, Expr};
use crate::geometry::{
    classify_boundary, compute_geometry, compute_quality, BoundaryClassification, GeometryCache,
};
use crate::msh::{read_mesh, Mesh};
use crate::postprocess::{build_eval_matrix, error_norms, locate_points, write_vtk};
use crate::quadrature::simplex_rule;
use crate::solver::{crank_nicolson, solve_steady, Solution};
use std::path::{Path, PathBuf};

/// Everything a solve run produced.
pub struct SolveReport {
    pub mesh_nodes: usize,
    pub mesh_tets: usize,
    pub final_solution: Solution,
    pub snapshots: Vec<(f64, Solution)>,
    pub vtk_files: Vec<PathBuf>,
    pub probe_csv: Option<String>,
    /// (L2, H1-seminorm) against the configured exact solution.
    pub errors: Option<(f64, f64)>,
}

fn read_mesh_file(path: &Path, degree: usize) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_mesh(&text, degree)
}

pub struct Pipeline {
    pub mesh: Mesh,
    pub geom: GeometryCache,
    pub bc: BoundaryClassification,
    dirichlet_value: Expr,
    volume_degree: usize,
}

/// Assembled steady operators at a fixed time.
struct System {
    c: crate::sparse::CsrMatrix,
    d: Vec<f64>,
}

impl Pipeline {
    pub fn new(cfg: &RunConfig) -> Result<Pipeline> {
        let mesh = read_mesh_file(&cfg.mesh_path, cfg.degree)?;
        Self::with_mesh(cfg, mesh)
    }

    pub fn with_mesh(cfg: &RunConfig, mesh: Mesh) -> Result<Pipeline> {
        let geom = compute_geometry(&mesh)?;
        let dir_groups = cfg.validate_boundary(&mesh)?;
        let bc = classify_boundary(&mesh, &dir_groups)?;
        let dirichlet_value = cfg
            .dirichlet
            .as_ref()
            .map(|d| d.value.clone())
            .unwrap_or(Expr::num(0.0));
        let volume_degree = cfg
            .quadrature_degree
            .unwrap_or(0)
            .max(default_rule_degree(cfg.degree));
        Ok(Pipeline {
            mesh,
            geom,
            bc,
            dirichlet_value,
            volume_degree,
        })
    }

    fn assemble(&self, cfg: &RunConfig, t: f64) -> Result<System> {
        let vol_rule = simplex_rule(CellKind::Tetrahedron, self.volume_degree)?;
        let bd_rule = simplex_rule(CellKind::Triangle, self.volume_degree)?;
        let s = assemble_stiffness(&self.mesh, &self.geom, &cfg.kappa, &vol_rule, t)?;
        let m = assemble_mass(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(cfg.c.clone()),
            &vol_rule,
            t,
        )?;
        let a = assemble_advection(&self.mesh, &self.geom, &cfg.beta, &vol_rule, t)?;
        let (alpha, g) = match &cfg.robin {
            Some(r) => (r.alpha.clone(), r.g.clone()),
            None => (Expr::num(0.0), Expr::num(0.0)),
        };
        let r = assemble_boundary_mass(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(alpha),
            &self.bc.robin_rows,
            &bd_rule,
            t,
        )?;
        let b = assemble_load(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(cfg.f.clone()),
            &vol_rule,
            t,
        )?;
        let t_r = assemble_robin_vector(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(g),
            &self.bc.robin_rows,
            &bd_rule,
            t,
        )?;
        let (c, d) = combine_system(&s, &r, &a, &m, &b, &t_r)?;
        Ok(System { c, d })
    }

    fn rhs_only(&self, cfg: &RunConfig, t: f64) -> Result<Vec<f64>> {
        let vol_rule = simplex_rule(CellKind::Tetrahedron, self.volume_degree)?;
        let bd_rule = simplex_rule(CellKind::Triangle, self.volume_degree)?;
        let g = cfg
            .robin
            .as_ref()
            .map(|r| r.g.clone())
            .unwrap_or(Expr::num(0.0));
        let b = assemble_load(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(cfg.f.clone()),
            &vol_rule,
            t,
        )?;
        let t_r = assemble_robin_vector(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(g),
            &self.bc.robin_rows,
            &bd_rule,
            t,
        )?;
        Ok(b.iter().zip(&t_r).map(|(x, y)| x + y).collect())
    }

    fn run_transient(
        &self,
        cfg: &RunConfig,
        tr: &TransientSpec,
        system: &System,
    ) -> Result<Vec<(f64, Solution)>> {
        let vol_rule = simplex_rule(CellKind::Tetrahedron, self.volume_degree)?;
        let m_rho = assemble_mass(
            &self.mesh,
            &self.geom,
            &CoefficientField::Scalar(tr.rho_cp.clone()),
            &vol_rule,
            tr.t_start,
        )?;
        let mut u0 = Vec::with_capacity(self.mesh.n_nodes());
        for p in &self.mesh.coords {
            u0.push(tr.initial.eval_checked(*p, tr.t_start, 0)?);
        }
        let time_dependent_rhs = cfg.f.depends_on_time()
            || cfg
                .robin
                .as_ref()
                .map(|r| r.g.depends_on_time())
                .unwrap_or(false);
        let frozen = system.d.clone();
        let rhs_at = |t: f64| -> Result<Vec<f64>> {
            if time_dependent_rhs {
                self.rhs_only(cfg, t)
            } else {
                Ok(frozen.clone())
            }
        };
        crank_nicolson(
            &self.mesh,
            &m_rho,
            &system.c,
            rhs_at,
            &u0,
            tr.dt,
            tr.t_start,
            tr.t_end,
            &self.bc,
            &self.dirichlet_value,
            &cfg.solver,
            tr.snapshot_every,
        )
    }

    /// Evaluate the solution at probe points; unlocated points yield NaN.
    pub fn probe_csv(&self, points: &[[f64; 3]], u: &[f64]) -> String {
        let located = locate_points(&self.mesh, &self.geom, points);
        let mut csv = String::from("x,y,z,value\n");
        for (p, loc) in points.iter().zip(&located) {
            let value = match loc {
                Some(_) => {
                    let em = build_eval_matrix(&self.mesh, &[*p], &[*loc]).expect("located point");
                    em.evaluate(u)[0]
                }
                None => f64::NAN,
            };
            csv.push_str(&format!("{},{},{},{}\n", p[0], p[1], p[2], value));
        }
        csv
    }
}

fn vtk_path(pattern: &str, step: usize) -> PathBuf {
    if pattern.contains("{step}") {
        PathBuf::from(pattern.replace("{step}", &format!("{step:06}")))
    } else {
        PathBuf::from(pattern)
    }
}

/// Full solve: steady or transient per the config.
pub fn run_solve(cfg: &RunConfig, verbose: bool, dump_dir: Option<&Path>) -> Result<SolveReport> {
    let mut solver_cfg = cfg.clone();
    solver_cfg.solver.verbose = verbose;
    let cfg = &solver_cfg;

    let pipeline = Pipeline::new(cfg)?;
    let t0 = cfg.transient.as_ref().map(|t| t.t_start).unwrap_or(0.0);
    let system = pipeline.assemble(cfg, t0)?;
    if verbose {
        eprintln!(
            "mesh: {} nodes, {} tets, {} boundary tris; system nnz {}",
            pipeline.mesh.n_nodes(),
            pipeline.mesh.n_tets(),
            pipeline.mesh.n_boundary_tris(),
            system.c.nnz()
        );
    }
    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let path = dir.join("system.coo");
        let file = std::fs::File::create(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        system
            .c
            .write_coo(std::io::BufWriter::new(file))
            .map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
    }

    let mut vtk_files = Vec::new();
    let (final_solution, snapshots) = match &cfg.transient {
        None => {
            let sol = solve_steady(
                &pipeline.mesh,
                &system.c,
                &system.d,
                &pipeline.bc,
                &pipeline.dirichlet_value,
                &cfg.solver,
                0.0,
            )?;
            if let Some(pattern) = &cfg.output.vtk {
                let path = vtk_path(pattern, 0);
                write_vtk(&pipeline.mesh, &[("u", &sol.u)], &path)?;
                vtk_files.push(path);
            }
            (sol, Vec::new())
        }
        Some(tr) => {
            let snaps = pipeline.run_transient(cfg, tr, &system)?;
            if let Some(pattern) = &cfg.output.vtk {
                for (i, (_, sol)) in snaps.iter().enumerate() {
                    let path = vtk_path(pattern, i + 1);
                    write_vtk(&pipeline.mesh, &[("u", &sol.u)], &path)?;
                    vtk_files.push(path);
                }
            }
            let last = snaps.last().expect("at least one step").1.clone();
            (last, snaps)
        }
    };

    let probe_csv = if cfg.output.probes.is_empty() {
        None
    } else {
        Some(pipeline.probe_csv(&cfg.output.probes, &final_solution.u))
    };

    let errors = match &cfg.output.errors {
        None => None,
        Some(spec) => {
            let degree = cfg.quadrature_degree.unwrap_or(0).max(2 * cfg.degree + 2);
            let rule = simplex_rule(CellKind::Tetrahedron, degree)?;
            Some(error_norms(
                &pipeline.mesh,
                &pipeline.geom,
                &final_solution.u,
                &spec.exact,
                &spec.exact_grad,
                &rule,
                cfg.transient.as_ref().map(|t| t.t_end).unwrap_or(0.0),
            )?)
        }
    };

    Ok(SolveReport {
        mesh_nodes: pipeline.mesh.n_nodes(),
        mesh_tets: pipeline.mesh.n_tets(),
        final_solution,
        snapshots,
        vtk_files,
        probe_csv,
        errors,
    })
}

/// Mesh report: counts, volume, per-group element counts, quality.
pub fn run_inspect(mesh_path: &Path, degree: usize) -> Result<String> {
    let mesh = read_mesh_file(mesh_path, degree)?;
    let geom = compute_geometry(&mesh)?;
    let quality = compute_quality(&mesh, &geom);
    let mut out = String::new();
    out.push_str(&format!(
        "nodes {}, tets {}, boundary tris {}, volume {:.7}\n",
        mesh.n_nodes(),
        mesh.n_tets(),
        mesh.n_boundary_tris(),
        geom.total_volume()
    ));
    for (name, tags) in &mesh.groups {
        let dim = mesh.group_dims[name];
        let count = match dim {
            2 => mesh.tri_entity.iter().filter(|t| tags.contains(t)).count(),
            3 => mesh.tet_entity.iter().filter(|t| tags.contains(t)).count(),
            _ => 0,
        };
        let tag_list: Vec<String> = tags.iter().map(|t| t.to_string()).collect();
        out.push_str(&format!(
            "group {name}: dim {dim}, {} entities (tags {}), {count} elements\n",
            tags.len(),
            tag_list.join(" ")
        ));
    }
    let mut h = quality.diameters.clone();
    h.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pct = |p: f64| -> f64 {
        if h.is_empty() {
            return 0.0;
        }
        let idx = ((h.len() - 1) as f64 * p).round() as usize;
        h[idx]
    };
    out.push_str(&format!(
        "quality: h_p50 {:.6}, h_p90 {:.6}, h_max {:.6}, chunkiness {:.4}\n",
        pct(0.5),
        pct(0.9),
        pct(1.0),
        quality.chunkiness
    ));
    Ok(out)
}

/// Solve once, then sample the solution at points read from a CSV file
/// (one `x,y,z` triple per line; `#` starts a comment).
pub fn run_probe(cfg: &RunConfig, points_path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(points_path).map_err(|e| Error::Io {
        path: points_path.display().to_string(),
        source: e,
    })?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.starts_with(|c: char| c.is_alphabetic()) {
            continue; // header row
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "probe file line {}: expected x,y,z",
                lineno + 1
            )));
        }
        let mut p = [0.0f64; 3];
        for (slot, part) in p.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| {
                Error::Config(format!(
                    "probe file line {}: bad number \"{part}\"",
                    lineno + 1
                ))
            })?;
        }
        points.push(p);
    }
    let pipeline = Pipeline::new(cfg)?;
    let t0 = cfg.transient.as_ref().map(|t| t.t_start).unwrap_or(0.0);
    let system = pipeline.assemble(cfg, t0)?;
    let solution = match &cfg.transient {
        None => solve_steady(
            &pipeline.mesh,
            &system.c,
            &system.d,
            &pipeline.bc,
            &pipeline.dirichlet_value,
            &cfg.solver,
            0.0,
        )?,
        Some(tr) => {
            pipeline
                .run_transient(cfg, tr, &system)?
                .pop()
                .expect("at least one step")
                .1
        }
    };
    Ok(pipeline.probe_csv(&points, &solution.u))
}

/// Solve the same problem on a ladder of meshes and emit the error table
/// with observed convergence rates.
pub fn run_convergence(cfg: &RunConfig, mesh_paths: &[PathBuf]) -> Result<String> {
    let spec = cfg
        .output
        .errors
        .as_ref()
        .ok_or_else(|| Error::Config("convergence requires an output.errors block".into()))?
        .clone();
    let mut rows: Vec<(f64, usize, f64, f64)> = Vec::new();
    for path in mesh_paths {
        let mesh = read_mesh_file(path, cfg.degree)?;
        let pipeline = Pipeline::with_mesh(cfg, mesh)?;
        let system = pipeline.assemble(cfg, 0.0)?;
        let sol = solve_steady(
            &pipeline.mesh,
            &system.c,
            &system.d,
            &pipeline.bc,
            &pipeline.dirichlet_value,
            &cfg.solver,
            0.0,
        )?;
        let degree = cfg.quadrature_degree.unwrap_or(0).max(2 * cfg.degree + 2);
        let rule = simplex_rule(CellKind::Tetrahedron, degree)?;
        let (l2, h1) = error_norms(
            &pipeline.mesh,
            &pipeline.geom,
            &sol.u,
            &spec.exact,
            &spec.exact_grad,
            &rule,
            0.0,
        )?;
        let quality = compute_quality(&pipeline.mesh, &pipeline.geom);
        rows.push((quality.max_diameter(), pipeline.mesh.n_nodes(), l2, h1));
    }
    let mut csv = String::from("level,h,nNodes,L2,H1semi,rate_L2,rate_H1\n");
    for (i, (h, n, l2, h1)) in rows.iter().enumerate() {
        let (rate_l2, rate_h1) = if i == 0 {
            (String::new(), String::new())
        } else {
            let (hp, _, l2p, h1p) = rows[i - 1];
            let denom = (hp / h).ln();
            (
                format!("{}", (l2p / l2).ln() / denom),
                format!("{}", (h1p / h1).ln() / denom),
            )
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i, h, n, l2, h1, rate_l2, rate_h1
        ));
    }
    Ok(csv)
}
