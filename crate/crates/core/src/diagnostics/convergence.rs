use crate::eigenbasis::Eigenbasis;
use crate::error::{Result, SolverError};
use crate::integrator::{solve, Discretization, Galerkin, SchemeSpec, Trajectory};
use crate::operators::ProblemSpec;
use crate::quadrature::{gauss_rule, QuadratureRule};

use super::AuditCheck;

/// Result of comparing two runs that differ only in their initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationRecord {
    /// `(t, ‖z(t)‖², ‖z(0)‖² e^{2t})` at every stored time.
    pub rows: Vec<(f64, f64, f64)>,
    pub slack: f64,
    /// Largest `‖z(t)‖² / (‖z(0)‖² e^{2t})` seen.
    pub max_ratio: f64,
    /// `‖z(T)‖ / ‖z(0)‖`.
    pub growth: f64,
    pub pass: bool,
}

impl SeparationRecord {
    pub fn as_check(&self) -> AuditCheck {
        let mut c = AuditCheck::at_most("gronwall_ratio", self.max_ratio, 1.0 + self.slack);
        c.pass = self.pass;
        c
    }
}

/// Checks `‖z_k‖² <= ‖z_0‖² e^{2 t_k} (1 + slack)` for `z = c_a - c_b`.
pub fn gronwall_separation(a: &Trajectory, b: &Trajectory, slack: f64) -> Result<SeparationRecord> {
    let (ma, mb) = (&a.meta, &b.meta);
    let mut pa = ma.problem.clone();
    pa.u0 = mb.problem.u0.clone();
    if ma.n != mb.n
        || ma.scheme != mb.scheme
        || pa != mb.problem
        || a.snapshots.len() != b.snapshots.len()
    {
        return Err(SolverError::invalid(
            "trajectories must share basis size, scheme, step and problem data",
        ));
    }
    let z0_sq = (&a.snapshots[0].c - &b.snapshots[0].c).norm_squared();
    let mut rows = Vec::with_capacity(a.snapshots.len());
    let mut max_ratio: f64 = 0.0;
    let mut pass = true;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if (sa.t - sb.t).abs() > 1e-12 * sa.t.abs().max(1.0) {
            return Err(SolverError::invalid("snapshot times differ"));
        }
        let z_sq = (&sa.c - &sb.c).norm_squared();
        let bound = z0_sq * (2.0 * sa.t).exp();
        if z_sq > bound * (1.0 + slack) {
            pass = false;
        }
        if bound > 0.0 {
            max_ratio = max_ratio.max(z_sq / bound);
        }
        rows.push((sa.t, z_sq, bound));
    }
    let growth = if z0_sq > 0.0 {
        (rows.last().expect("initial row").1 / z0_sq).sqrt()
    } else {
        0.0
    };
    Ok(SeparationRecord {
        rows,
        slack,
        max_ratio,
        growth,
        pass,
    })
}

/// `‖Σ a_j w_j - Σ b_j v_j‖_{L²}` on a given rule, for two bases of the same
/// family (lifting cancels and is ignored).
pub fn l2_distance_on(
    rule: &QuadratureRule,
    basis_a: &Eigenbasis,
    a: &[f64],
    basis_b: &Eigenbasis,
    b: &[f64],
) -> f64 {
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&x, &w)| {
            let ua: f64 = a
                .iter()
                .enumerate()
                .map(|(j, c)| c * basis_a.value(j, x, 0))
                .sum();
            let ub: f64 = b
                .iter()
                .enumerate()
                .map(|(j, c)| c * basis_b.value(j, x, 0))
                .sum();
            w * (ua - ub) * (ua - ub)
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRow {
    pub n: usize,
    pub next_n: usize,
    /// `max_k ‖u_{next_n}(t_k) - u_n(t_k)‖_{L²}`.
    pub distance: f64,
}

/// Runs `spec` at each basis size and reports successive maximal L²
/// differences over the common snapshot times.
pub fn cauchy_ladder(
    spec: &ProblemSpec,
    scheme: &SchemeSpec,
    n_list: &[usize],
) -> Result<Vec<LadderRow>> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::invalid(
            "ladder needs at least two strictly ascending sizes",
        ));
    }
    let runs: Vec<(Galerkin, Trajectory)> = n_list
        .iter()
        .map(|&n| solve(spec, &Discretization::new(n, *scheme)))
        .collect::<Result<_>>()?;
    let n_max = *n_list.last().expect("non-empty");
    let fine = gauss_rule(
        spec.length,
        (4 * n_max).max(64),
        12,
        &spec.u0.breakpoints(spec.length),
    )?;
    let mut rows = Vec::with_capacity(n_list.len() - 1);
    for pair in runs.windows(2) {
        let (ga, ta) = &pair[0];
        let (gb, tb) = &pair[1];
        let mut distance: f64 = 0.0;
        for sa in &ta.snapshots {
            let Some(sb) = tb
                .snapshots
                .iter()
                .find(|s| (s.t - sa.t).abs() <= 1e-12 * sa.t.abs().max(1.0))
            else {
                continue;
            };
            let d = l2_distance_on(
                &fine,
                &ga.basis,
                sa.c.as_slice(),
                &gb.basis,
                sb.c.as_slice(),
            );
            distance = distance.max(d);
        }
        rows.push(LadderRow {
            n: ta.meta.n,
            next_n: tb.meta.n,
            distance,
        });
    }
    Ok(rows)
}
