//! JSON run configuration: coefficient expressions, boundary assignment,
//! solver and transient settings, and output requests.

use crate::error::{Error, Result};
use crate::expr::{parse_expr, CoefficientField, Expr};
use crate::msh::Mesh;
use crate::solver::{Method, Preconditioner, SolverConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mesh: String,
    degree: usize,
    coefficients: RawCoefficients,
    boundary: RawBoundary,
    #[serde(default)]
    solver: Option<RawSolver>,
    #[serde(default)]
    transient: Option<RawTransient>,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    quadrature_degree: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficients {
    kappa: KappaSpec,
    #[serde(default)]
    beta: Option<[String; 3]>,
    #[serde(default)]
    c: Option<String>,
    #[serde(default)]
    f: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum KappaSpec {
    /// Shorthand `"k"` for the isotropic matrix k*I.
    Scalar(String),
    /// Nine expressions, row-major.
    Matrix(Box<[String; 9]>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    #[serde(default)]
    dirichlet: Option<RawDirichlet>,
    #[serde(default)]
    robin: Option<RawRobin>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDirichlet {
    groups: Vec<String>,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobin {
    groups: GroupSpec,
    #[serde(default)]
    alpha: Option<String>,
    #[serde(default)]
    g: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GroupSpec {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    preconditioner: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransient {
    rho_cp: String,
    #[serde(default)]
    t_start: Option<f64>,
    t_end: f64,
    dt: f64,
    #[serde(default)]
    initial: Option<String>,
    #[serde(default)]
    snapshot_every: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    vtk: Option<String>,
    #[serde(default)]
    probes: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    errors: Option<RawErrors>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawErrors {
    exact: String,
    exact_grad: [String; 3],
}

#[derive(Debug, Clone)]
pub struct DirichletSpec {
    pub groups: Vec<String>,
    pub value: Expr,
}

#[derive(Debug, Clone)]
pub enum RobinGroups {
    /// All boundary entities not claimed by the Dirichlet groups.
    Rest,
    Named(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct RobinSpec {
    pub groups: RobinGroups,
    pub alpha: Expr,
    pub g: Expr,
}

#[derive(Debug, Clone)]
pub struct TransientSpec {
    pub rho_cp: Expr,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub initial: Expr,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone)]
pub struct ErrorSpec {
    pub exact: Expr,
    pub exact_grad: [Expr; 3],
}

#[derive(Debug, Clone, Default)]
pub struct OutputSpec {
    pub vtk: Option<String>,
    pub probes: Vec<[f64; 3]>,
    pub errors: Option<ErrorSpec>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh_path: PathBuf,
    pub degree: usize,
    pub kappa: CoefficientField,
    pub beta: CoefficientField,
    pub c: Expr,
    pub f: Expr,
    pub dirichlet: Option<DirichletSpec>,
    pub robin: Option<RobinSpec>,
    pub solver: SolverConfig,
    pub transient: Option<TransientSpec>,
    pub output: OutputSpec,
    pub quadrature_degree: Option<usize>,
}

fn cfg_err(detail: impl Into<String>) -> Error {
    Error::Config(detail.into())
}

fn parse_field(what: &str, src: &str) -> Result<Expr> {
    parse_expr(src).map_err(|e| cfg_err(format!("{what}: {e}")))
}

impl RunConfig {
    /// Load and validate a config file; mesh paths are resolved relative to
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| cfg_err(format!("invalid JSON: {e}")))?;
        if !(1..=4).contains(&raw.degree) {
            return Err(cfg_err(format!("degree {} outside 1..=4", raw.degree)));
        }
        let kappa = match &raw.coefficients.kappa {
            KappaSpec::Scalar(s) => {
                CoefficientField::isotropic(parse_field("coefficients.kappa", s)?)
            }
            KappaSpec::Matrix(m) => {
                let mut comps = Vec::with_capacity(9);
                for (i, s) in m.iter().enumerate() {
                    comps.push(parse_field(&format!("coefficients.kappa[{i}]"), s)?);
                }
                CoefficientField::Matrix3(Box::new(comps.try_into().expect("nine components")))
            }
        };
        let beta = match &raw.coefficients.beta {
            None => CoefficientField::Vector3(Box::new([
                Expr::num(0.0),
                Expr::num(0.0),
                Expr::num(0.0),
            ])),
            Some(b) => CoefficientField::Vector3(Box::new([
                parse_field("coefficients.beta[0]", &b[0])?,
                parse_field("coefficients.beta[1]", &b[1])?,
                parse_field("coefficients.beta[2]", &b[2])?,
            ])),
        };
        let c = match &raw.coefficients.c {
            None => Expr::num(0.0),
            Some(s) => parse_field("coefficients.c", s)?,
        };
        let f = match &raw.coefficients.f {
            None => Expr::num(0.0),
            Some(s) => parse_field("coefficients.f", s)?,
        };

        let dirichlet = match &raw.boundary.dirichlet {
            None => None,
            Some(d) => Some(DirichletSpec {
                groups: d.groups.clone(),
                value: parse_field("boundary.dirichlet.value", &d.value)?,
            }),
        };
        let robin = match &raw.boundary.robin {
            None => None,
            Some(r) => {
                let groups = match &r.groups {
                    GroupSpec::Keyword(k) if k == "rest" => RobinGroups::Rest,
                    GroupSpec::Keyword(k) => {
                        return Err(cfg_err(format!(
                            "boundary.robin.groups: expected \"rest\" or a list, got \"{k}\""
                        )))
                    }
                    GroupSpec::List(names) => RobinGroups::Named(names.clone()),
                };
                Some(RobinSpec {
                    groups,
                    alpha: match &r.alpha {
                        None => Expr::num(0.0),
                        Some(s) => parse_field("boundary.robin.alpha", s)?,
                    },
                    g: match &r.g {
                        None => Expr::num(0.0),
                        Some(s) => parse_field("boundary.robin.g", s)?,
                    },
                })
            }
        };
        if dirichlet.is_none() && robin.is_none() {
            return Err(cfg_err(
                "boundary must declare dirichlet and/or robin conditions",
            ));
        }

        let mut solver = SolverConfig::default();
        if let Some(s) = &raw.solver {
            if let Some(m) = &s.method {
                solver.method = match m.as_str() {
                    "cg" => Method::Cg,
                    "bicgstab" => Method::BiCgStab,
                    "dense" => Method::Dense,
                    "auto" => Method::Auto,
                    other => return Err(cfg_err(format!("solver.method \"{other}\" unknown"))),
                };
            }
            if let Some(tol) = s.tol {
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(cfg_err(format!("solver.tol {tol} outside (0, 1)")));
                }
                solver.tol = tol;
            }
            if let Some(mi) = s.max_iter {
                if mi < 1 {
                    return Err(cfg_err("solver.max_iter must be at least 1"));
                }
                solver.max_iter = mi;
            }
            if let Some(p) = &s.preconditioner {
                solver.preconditioner = match p.as_str() {
                    "none" => Preconditioner::None,
                    "jacobi" => Preconditioner::Jacobi,
                    other => {
                        return Err(cfg_err(format!(
                            "solver.preconditioner \"{other}\" unknown"
                        )))
                    }
                };
            }
        }

        let transient = match &raw.transient {
            None => None,
            Some(tr) => {
                let t_start = tr.t_start.unwrap_or(0.0);
                if tr.dt <= 0.0 {
                    return Err(cfg_err("transient.dt must be positive"));
                }
                if tr.t_end <= t_start {
                    return Err(cfg_err("transient.t_end must exceed t_start"));
                }
                Some(TransientSpec {
                    rho_cp: parse_field("transient.rho_cp", &tr.rho_cp)?,
                    t_start,
                    t_end: tr.t_end,
                    dt: tr.dt,
                    initial: match &tr.initial {
                        None => Expr::num(0.0),
                        Some(s) => parse_field("transient.initial", s)?,
                    },
                    snapshot_every: tr.snapshot_every.unwrap_or(1).max(1),
                })
            }
        };

        let output = match &raw.output {
            None => OutputSpec::default(),
            Some(o) => OutputSpec {
                vtk: o.vtk.clone(),
                probes: o.probes.clone().unwrap_or_default(),
                errors: match &o.errors {
                    None => None,
                    Some(e) => Some(ErrorSpec {
                        exact: parse_field("output.errors.exact", &e.exact)?,
                        exact_grad: [
                            parse_field("output.errors.exact_grad[0]", &e.exact_grad[0])?,
                            parse_field("output.errors.exact_grad[1]", &e.exact_grad[1])?,
                            parse_field("output.errors.exact_grad[2]", &e.exact_grad[2])?,
                        ],
                    }),
                },
            },
        };
        for p in &output.probes {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(cfg_err("output.probes must be finite coordinates"));
            }
        }
        if let Some(q) = raw.quadrature_degree {
            if q > crate::quadrature::MAX_DEGREE {
                return Err(cfg_err(format!(
                    "quadrature_degree {q} exceeds maximum {}",
                    crate::quadrature::MAX_DEGREE
                )));
            }
        }

        Ok(RunConfig {
            mesh_path: base_dir.join(&raw.mesh),
            degree: raw.degree,
            kappa,
            beta,
            c,
            f,
            dirichlet,
            robin,
            solver,
            transient,
            output,
            quadrature_degree: raw.quadrature_degree,
        })
    }

    /// Check group existence and boundary coverage against a loaded mesh;
    /// returns the Dirichlet group names to classify with.
    pub fn validate_boundary(&self, mesh: &Mesh) -> Result<Vec<String>> {
        let mut dir_tags: Vec<i32> = Vec::new();
        let dir_groups = self
            .dirichlet
            .as_ref()
            .map(|d| d.groups.clone())
            .unwrap_or_default();
        for name in &dir_groups {
            let tags = mesh
                .groups
                .get(name)
                .ok_or_else(|| cfg_err(format!("unknown dirichlet group \"{name}\"")))?;
            if mesh.group_dims.get(name) != Some(&2) {
                return Err(cfg_err(format!(
                    "dirichlet group \"{name}\" is not a surface group"
                )));
            }
            dir_tags.extend_from_slice(tags);
        }
        let mut boundary_tags: Vec<i32> = mesh.tri_entity.clone();
        boundary_tags.sort_unstable();
        boundary_tags.dedup();

        let robin_tags: Vec<i32> = match &self.robin {
            None => Vec::new(),
            Some(r) => match &r.groups {
                RobinGroups::Rest => boundary_tags
                    .iter()
                    .copied()
                    .filter(|t| !dir_tags.contains(t))
                    .collect(),
                RobinGroups::Named(names) => {
                    let mut tags = Vec::new();
                    for name in names {
                        let entity_tags = mesh
                            .groups
                            .get(name)
                            .ok_or_else(|| cfg_err(format!("unknown robin group \"{name}\"")))?;
                        if mesh.group_dims.get(name) != Some(&2) {
                            return Err(cfg_err(format!(
                                "robin group \"{name}\" is not a surface group"
                            )));
                        }
                        tags.extend_from_slice(entity_tags);
                    }
                    tags
                }
            },
        };
        let overlap: Vec<i32> = robin_tags
            .iter()
            .copied()
            .filter(|t| dir_tags.contains(t))
            .collect();
        if !overlap.is_empty() {
            return Err(cfg_err(format!(
                "dirichlet and robin groups overlap on entity tags {overlap:?}"
            )));
        }
        let uncovered: Vec<i32> = boundary_tags
            .iter()
            .copied()
            .filter(|t| !dir_tags.contains(t) && !robin_tags.contains(t))
            .collect();
        if !uncovered.is_empty() {
            return Err(cfg_err(format!(
                "boundary entity tags {uncovered:?} are covered by neither dirichlet nor robin groups"
            )));
        }
        Ok(dir_groups)
    }
}
