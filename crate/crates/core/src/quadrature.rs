//! Composite Gauss-Legendre quadrature on `(0, L)`, initial profiles, and the
//! L² projection onto / reconstruction from an eigenbasis.

use std::f64::consts::PI;

use crate::eigenbasis::Eigenbasis;
use crate::error::{Result, SolverError};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let n = points as f64;
    for i in 0..points.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(points, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(points, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[points - 1 - i] = x;
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    if points % 2 == 1 {
        nodes[points / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    length: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edges: Vec<f64>,
    points_per_panel: usize,
}

/// Default rule for a basis of size `n`: 8 points on `max(2n, 16)` panels.
pub fn default_rule(length: f64, n: usize, breakpoints: &[f64]) -> Result<QuadratureRule> {
    gauss_rule(length, (2 * n).max(16), 8, breakpoints)
}

pub fn gauss_rule(
    length: f64,
    panels: usize,
    points_per_panel: usize,
    breakpoints: &[f64],
) -> Result<QuadratureRule> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(SolverError::invalid(format!(
            "domain length must be positive, got {length}"
        )));
    }
    if panels == 0 {
        return Err(SolverError::invalid("at least one panel is required"));
    }
    if !(2..=16).contains(&points_per_panel) {
        return Err(SolverError::invalid(format!(
            "points per panel must be in 2..=16, got {points_per_panel}"
        )));
    }
    let mut edges: Vec<f64> = (0..=panels)
        .map(|p| length * p as f64 / panels as f64)
        .collect();
    edges[panels] = length;
    let snap = 1e-12 * length;
    for &b in breakpoints {
        if !(b > 0.0 && b < length) {
            return Err(SolverError::invalid(format!(
                "breakpoint {b} outside (0, {length})"
            )));
        }
        match edges.iter().position(|&e| e >= b - snap) {
            Some(pos) if (edges[pos] - b).abs() <= snap => edges[pos] = b,
            Some(pos) => edges.insert(pos, b),
            None => unreachable!("breakpoint below L was checked"),
        }
    }
    let (ref_nodes, ref_weights) = gauss_legendre(points_per_panel);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * points_per_panel);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in edges.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        for (xi, wi) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
    }
    Ok(QuadratureRule {
        length,
        nodes,
        weights,
        edges,
        points_per_panel,
    })
}

impl QuadratureRule {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn has_edge(&self, x: f64) -> bool {
        let snap = 1e-12 * self.length;
        self.edges.iter().any(|e| (e - x).abs() <= snap)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Weighted sum `Σ w_q v_q` of values already sampled at the nodes.
    pub fn sum(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Initial or reference profile on `(0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `exp(-((x - center) / width)²)`
    Gaussian { center: f64, width: f64 },
    /// `s²(1 - s)²` with `s = x / L`.
    PolyBump,
    /// 1 on `[a, b]`, 0 elsewhere.
    Indicator { a: f64, b: f64 },
    /// `sqrt(2/L) sin(jπx/L)`.
    SineMode(usize),
    /// `Σ c_j w_j` in whatever basis it is projected onto.
    Coefficients(Vec<f64>),
    /// Piecewise-linear interpolant through `(x, u)` samples, ascending in `x`,
    /// held constant outside the sampled range.
    Table(Vec<(f64, f64)>),
}

impl Profile {
    pub fn validate(&self, length: f64) -> Result<()> {
        match self {
            Profile::Gaussian { width, .. } if width.is_nan() || *width <= 0.0 => {
                Err(SolverError::invalid("gaussian width must be positive"))
            }
            Profile::Indicator { a, b } if !(0.0 <= *a && a < b && *b <= length) => Err(
                SolverError::invalid(format!("indicator needs 0 <= a < b <= L, got a={a}, b={b}")),
            ),
            Profile::SineMode(0) => Err(SolverError::invalid("sine mode index starts at 1")),
            Profile::Coefficients(c) if c.is_empty() => {
                Err(SolverError::invalid("coefficient list is empty"))
            }
            Profile::Table(t) if t.len() < 2 => Err(SolverError::invalid(
                "sampled table needs at least two points",
            )),
            Profile::Table(t) if t.windows(2).any(|w| w[1].0.is_nan() || w[1].0 <= w[0].0) => Err(
                SolverError::invalid("sampled table x values must be strictly ascending"),
            ),
            _ => Ok(()),
        }
    }

    /// Interior points where the profile has a jump or kink.
    pub fn breakpoints(&self, length: f64) -> Vec<f64> {
        match self {
            Profile::Indicator { a, b } => [*a, *b]
                .into_iter()
                .filter(|&p| p > 0.0 && p < length)
                .collect(),
            Profile::Table(t) => t
                .iter()
                .map(|p| p.0)
                .filter(|&p| p > 0.0 && p < length)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Pointwise value. `Coefficients` needs a basis and is evaluated with
    /// [`reconstruct`] instead; here it returns `None`.
    pub fn value(&self, x: f64, length: f64) -> Option<f64> {
        Some(match self {
            Profile::Gaussian { center, width } => {
                let z = (x - center) / width;
                (-z * z).exp()
            }
            Profile::PolyBump => {
                let s = x / length;
                s * s * (1.0 - s) * (1.0 - s)
            }
            Profile::Indicator { a, b } => {
                if (*a..=*b).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::SineMode(j) => (2.0 / length).sqrt() * (*j as f64 * PI * x / length).sin(),
            Profile::Coefficients(_) => return None,
            Profile::Table(t) => interpolate(t, x),
        })
    }

    /// Analytic derivative of order `deriv` (0..=4) for the smooth reference
    /// profiles that manufactured forcing supports.
    pub fn derivative(&self, x: f64, length: f64, deriv: u8) -> Option<f64> {
        match self {
            Profile::SineMode(j) => {
                let k = *j as f64 * PI / length;
                let amp = (2.0 / length).sqrt();
                let (s, c) = (k * x).sin_cos();
                Some(
                    match deriv % 4 {
                        0 => amp * s,
                        1 => amp * c,
                        2 => -amp * s,
                        _ => -amp * c,
                    } * k.powi(deriv as i32),
                )
            }
            Profile::PolyBump => {
                let s = x / length;
                Some(match deriv {
                    0 => s * s * (1.0 - s) * (1.0 - s),
                    1 => (2.0 * s - 6.0 * s * s + 4.0 * s * s * s) / length,
                    2 => (2.0 - 12.0 * s + 12.0 * s * s) / length.powi(2),
                    3 => (-12.0 + 24.0 * s) / length.powi(3),
                    4 => 24.0 / length.powi(4),
                    _ => 0.0,
                })
            }
            _ => None,
        }
    }
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|p| p.0 <= x);
    let (x0, u0) = table[i - 1];
    let (x1, u1) = table[i];
    u0 + (u1 - u0) * (x - x0) / (x1 - x0)
}

fn check_shared_length(basis: &Eigenbasis, rule: &QuadratureRule) -> Result<()> {
    let (a, b) = (basis.length(), rule.length());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(SolverError::invalid(format!(
            "basis length {a} and quadrature length {b} differ"
        )));
    }
    Ok(())
}

/// Orthogonal projection `c_j = (profile, w_j)`, `j = 1..=n`.
pub fn project(basis: &Eigenbasis, rule: &QuadratureRule, profile: &Profile) -> Result<Vec<f64>> {
    check_shared_length(basis, rule)?;
    let length = basis.length();
    profile.validate(length)?;
    if let Profile::Coefficients(c) = profile {
        let mut out = vec![0.0; basis.len()];
        for (o, v) in out.iter_mut().zip(c) {
            *o = *v;
        }
        return Ok(out);
    }
    for b in profile.breakpoints(length) {
        if !rule.has_edge(b) {
            return Err(SolverError::invalid(format!(
                "profile discontinuity at x = {b} is not a quadrature panel edge"
            )));
        }
    }
    let samples: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| profile.value(x, length).expect("non-coefficient profile"))
        .collect();
    Ok(project_samples(basis, rule, &samples))
}

/// `(u, w_j)` for `u` already sampled at the rule's nodes.
pub(crate) fn project_samples(
    basis: &Eigenbasis,
    rule: &QuadratureRule,
    samples: &[f64],
) -> Vec<f64> {
    (0..basis.len())
        .map(|j| {
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .zip(samples)
                .map(|((&x, &w), &u)| w * u * basis.value(j, x, 0))
                .sum()
        })
        .collect()
}

/// `u_n^{(deriv)}(x) = Σ c_j w_j^{(deriv)}(x)` at every grid point.
pub fn reconstruct(
    basis: &Eigenbasis,
    coeffs: &[f64],
    grid: &[f64],
    deriv: u8,
) -> Result<Vec<f64>> {
    if coeffs.len() > basis.len() {
        return Err(SolverError::invalid(format!(
            "{} coefficients for a basis of size {}",
            coeffs.len(),
            basis.len()
        )));
    }
    grid.iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (j, c) in coeffs.iter().enumerate() {
                if *c != 0.0 {
                    acc += c * basis.eval(j + 1, x, deriv)?;
                }
            }
            Ok(acc)
        })
        .collect()
}
