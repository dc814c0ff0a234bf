//! Numerical integration on the reference triangle and tetrahedron.
//!
//! Rules are stated in barycentric coordinates with weights summing to one;
//! the reference measure (1/6 for the tetrahedron, 1/2 for the triangle) is
//! applied by the caller together with the element Jacobian.

use crate::element::CellKind;
use crate::error::{Error, Result};

/// Largest polynomial degree `simplex_rule` will produce a rule for.
pub const MAX_DEGREE: usize = 20;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub cell: CellKind,
    /// Barycentric points; triangles use the first three components.
    pub points: Vec<[f64; 4]>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
    /// Declared polynomial exactness.
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule with exactness >= `required_degree`. Deterministic per input.
///
/// Degrees up to 3 use hard-coded fully symmetric rules with positive
/// weights; higher degrees use Grundmann-Moller rules of odd exactness
/// (which contain negative weights — the exactness audit is the gate).
pub fn simplex_rule(cell: CellKind, required_degree: usize) -> Result<QuadratureRule> {
    if required_degree > MAX_DEGREE {
        return Err(Error::DegreeTooHigh(required_degree, MAX_DEGREE));
    }
    let rule = match required_degree {
        0 | 1 => centroid_rule(cell),
        2 => symmetric_rule_deg2(cell),
        3 => symmetric_rule_deg3(cell),
        d => grundmann_moller(cell, (d - 1).div_ceil(2)),
    };
    Ok(rule)
}

fn centroid_rule(cell: CellKind) -> QuadratureRule {
    let nb = cell.n_bary();
    let mut p = [0.0f64; 4];
    for v in p.iter_mut().take(nb) {
        *v = 1.0 / nb as f64;
    }
    QuadratureRule {
        cell,
        points: vec![p],
        weights: vec![1.0],
        exactness: 1,
    }
}

/// All placements of `value` into one slot of an `(a, a, .., value)` pattern.
fn orbit(cell: CellKind, a: f64, value: f64) -> Vec<[f64; 4]> {
    let nb = cell.n_bary();
    (0..nb)
        .map(|pos| {
            let mut p = [0.0f64; 4];
            for v in p.iter_mut().take(nb) {
                *v = a;
            }
            p[pos] = value;
            p
        })
        .collect()
}

fn symmetric_rule_deg2(cell: CellKind) -> QuadratureRule {
    match cell {
        CellKind::Tetrahedron => {
            // vertices-of-inner-tet rule: a = (5 + 3 sqrt 5)/20, b = (5 - sqrt 5)/20
            let a = (5.0 + 3.0 * 5.0f64.sqrt()) / 20.0;
            let b = (1.0 - a) / 3.0;
            let points = orbit(cell, b, a);
            QuadratureRule {
                cell,
                points,
                weights: vec![0.25; 4],
                exactness: 2,
            }
        }
        CellKind::Triangle => {
            let points = orbit(cell, 1.0 / 6.0, 2.0 / 3.0);
            QuadratureRule {
                cell,
                points,
                weights: vec![1.0 / 3.0; 3],
                exactness: 2,
            }
        }
    }
}

fn symmetric_rule_deg3(cell: CellKind) -> QuadratureRule {
    match cell {
        CellKind::Tetrahedron => {
            // two orbits of (a, a, a, 1-3a); solved from the moment equations
            let a1 = 0.328_688_598_709_407_51;
            let w1 = 0.127_384_203_296_505_65;
            let a2 = 0.111_965_872_511_663_26;
            let w2 = 0.122_615_796_703_494_35;
            let mut points = orbit(cell, a1, 1.0 - 3.0 * a1);
            points.extend(orbit(cell, a2, 1.0 - 3.0 * a2));
            let mut weights = vec![w1; 4];
            weights.extend(vec![w2; 4]);
            QuadratureRule {
                cell,
                points,
                weights,
                exactness: 3,
            }
        }
        CellKind::Triangle => {
            // two orbits of (a, a, 1-2a)
            let a1 = 0.445_894_121_852_841_31;
            let w1 = 0.221_935_799_650_540_63;
            let a2 = 0.092_757_074_428_209_05;
            let w2 = 0.111_397_533_682_792_7;
            let mut points = orbit(cell, a1, 1.0 - 2.0 * a1);
            points.extend(orbit(cell, a2, 1.0 - 2.0 * a2));
            let mut weights = vec![w1; 3];
            weights.extend(vec![w2; 3]);
            QuadratureRule {
                cell,
                points,
                weights,
                exactness: 3,
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0f64, |acc, k| acc * k as f64)
}

/// Multi-indices of `count` nonnegative integers summing to `total`,
/// in lexicographic order.
fn multi_indices(count: usize, total: usize) -> Vec<Vec<usize>> {
    if count == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for head in 0..=total {
        for mut rest in multi_indices(count - 1, total - head) {
            let mut v = Vec::with_capacity(count);
            v.push(head);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Grundmann-Moller rule of exactness 2s+1 on the n-simplex, with weights
/// rescaled so they sum to one.
fn grundmann_moller(cell: CellKind, s: usize) -> QuadratureRule {
    let n = cell.dim();
    let d = 2 * s + 1;
    let norm = factorial(n); // raw rule integrates over a simplex of volume 1/n!
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let denom = (d + n - 2 * i) as f64;
        let coeff = sign * 0.25f64.powi(s as i32) * denom.powi(d as i32)
            / (factorial(i) * factorial(d + n - i));
        for beta in multi_indices(n + 1, s - i) {
            let mut p = [0.0f64; 4];
            for (j, &b) in beta.iter().enumerate() {
                p[j] = (2 * b + 1) as f64 / denom;
            }
            points.push(p);
            weights.push(coeff * norm);
        }
    }
    QuadratureRule {
        cell,
        points,
        weights,
        exactness: d,
    }
}

/// Exact integral of a monomial over the reference simplex:
/// `x^a y^b z^c` over the tetrahedron gives `a! b! c! / (a+b+c+3)!`,
/// `x^a y^b` over the triangle gives `a! b! / (a+b+2)!`.
pub fn monomial_integral(exponents: &[usize], cell: CellKind) -> f64 {
    match cell {
        CellKind::Tetrahedron => {
            let (a, b, c) = (exponents[0], exponents[1], exponents[2]);
            factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
        }
        CellKind::Triangle => {
            let (a, b) = (exponents[0], exponents[1]);
            factorial(a) * factorial(b) / factorial(a + b + 2)
        }
    }
}

/// Apply `rule` to `f` given in barycentric coordinates, including the
/// reference measure, so the result approximates the integral over the
/// reference simplex.
pub fn integrate_reference(rule: &QuadratureRule, mut f: impl FnMut(&[f64; 4]) -> f64) -> f64 {
    let measure = match rule.cell {
        CellKind::Tetrahedron => 1.0 / 6.0,
        CellKind::Triangle => 0.5,
    };
    let mut acc = 0.0;
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        acc += w * f(p);
    }
    measure * acc
}
