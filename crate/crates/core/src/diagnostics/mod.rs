//! Energy norms along a trajectory and the audits built on them.

mod convergence;
mod fd;
mod shape;

pub use convergence::{
    cauchy_ladder, gronwall_separation, l2_distance_on, LadderRow, SeparationRecord,
};
pub use fd::{fd_oracle, FdTrajectory};
pub use shape::{overshoot_metric, Overshoot};

use nalgebra::DVector;

use crate::error::{Result, SolverError};
use crate::integrator::{SpectralState, Trajectory};
use crate::operators::AssembledOperators;

/// Slack on the integrated smooth-data energy law.
pub const ENERGY_AUDIT_SLACK: f64 = 1e-6;
/// Tolerance on step-to-step energy increase.
pub const ENERGY_MONOTONE_TOL: f64 = 1e-9;
/// Young-inequality parameter used by the rough-data audit.
pub const ROUGH_ETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub l2: f64,
    pub vnorm_sq: f64,
    pub l4_4: f64,
    pub potential: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
}

/// Norms of `u_n + g` by quadrature on the operator nodes.
pub fn energy_report(
    ops: &AssembledOperators,
    state: &SpectralState,
    dissipation_cum: f64,
) -> EnergyReport {
    let u = ops.field_at_nodes(&state.c, 0);
    let w = ops.weights();
    let sq = u.component_mul(&u);
    let l2 = sq.dot(w).sqrt();
    let l4_4 = sq.component_mul(&sq).dot(w);
    let potential = ops.potential_integral(&state.c);
    let vnorm_sq = ops.vnorm_sq(&state.c);
    EnergyReport {
        t: state.t,
        l2,
        vnorm_sq,
        l4_4,
        potential,
        energy: 0.5 * vnorm_sq + potential,
        dissipation_cum,
    }
}

/// Coefficient-space L² norm; equals the quadrature `l2` when there is no lifting.
pub fn parseval_l2(c: &DVector<f64>) -> f64 {
    c.norm()
}

/// One row of `audit.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl AuditCheck {
    /// `lhs <= rhs` check.
    pub fn at_most(check: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        AuditCheck {
            check: check.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0 && margin.is_finite() || (lhs.is_finite() && rhs == f64::INFINITY),
        }
    }

    /// Strict `lhs < rhs` check.
    pub fn below(check: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        AuditCheck {
            check: check.into(),
            lhs,
            rhs,
            margin,
            pass: margin > 0.0 && margin.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditRecord {
    pub checks: Vec<AuditCheck>,
}

impl AuditRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn extend(&mut self, prefix: &str, other: AuditRecord) {
        for mut c in other.checks {
            c.check = format!("{prefix}{}", c.check);
            self.checks.push(c);
        }
    }
}

fn require_homogeneous(traj: &Trajectory) -> Result<()> {
    if !traj.is_homogeneous() {
        return Err(SolverError::invalid(
            "energy audits are defined for unforced runs with the cubic reaction",
        ));
    }
    Ok(())
}

/// Integrated energy law for smooth data:
/// `Σ τ‖δc/τ‖² + E(t_k) <= E(0)` at every step, and `E` non-increasing.
pub fn smooth_energy_audit(traj: &Trajectory) -> Result<AuditRecord> {
    require_homogeneous(traj)?;
    let e0 = traj.reports[0].energy;
    let worst = traj
        .reports
        .iter()
        .max_by(|a, b| {
            (a.dissipation_cum + a.energy)
                .partial_cmp(&(b.dissipation_cum + b.energy))
                .expect("finite energies")
        })
        .expect("at least one report");
    let law = AuditCheck::at_most(
        "energy_law",
        worst.dissipation_cum + worst.energy,
        e0 + ENERGY_AUDIT_SLACK,
    );
    let max_increase = traj
        .reports
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_increase = if max_increase.is_finite() {
        max_increase
    } else {
        0.0
    };
    let monotone = AuditCheck::at_most("energy_monotone", max_increase, ENERGY_MONOTONE_TOL);
    Ok(AuditRecord {
        checks: vec![law, monotone],
    })
}

/// Rough-data estimate obtained by testing with `u_n` and applying Young's
/// inequality `‖u‖² <= η (u⁴, 1)/2 + L/(2η)` with `η = 1/2`:
/// `½‖u(T)‖² + Σ τ (‖u‖²_V + (1 - η/2) ‖u‖⁴_{L⁴}) <= ½‖u(0)‖² + T L / (2η)`.
pub fn rough_energy_audit(traj: &Trajectory) -> Result<AuditRecord> {
    require_homogeneous(traj)?;
    if traj.meta.problem.lifting().is_some() {
        return Err(SolverError::invalid(
            "rough-data audit needs homogeneous boundary values",
        ));
    }
    let length = traj.meta.problem.length;
    let first = traj.reports[0];
    let last = *traj.final_report();
    let mut vnorm_integral = 0.0;
    let mut quartic_integral = 0.0;
    let mut max_vnorm_positive_t = 0.0f64;
    for w in traj.reports.windows(2) {
        let tau = w[1].t - w[0].t;
        vnorm_integral += tau * w[1].vnorm_sq;
        quartic_integral += tau * w[1].l4_4;
        max_vnorm_positive_t = max_vnorm_positive_t.max(w[1].vnorm_sq);
    }
    let elapsed = last.t - first.t;
    let lhs = 0.5 * last.l2 * last.l2 + vnorm_integral + (1.0 - 0.5 * ROUGH_ETA) * quartic_integral;
    let rhs = 0.5 * first.l2 * first.l2 + elapsed * length / (2.0 * ROUGH_ETA);
    let mut finite = AuditCheck::at_most("vnorm_time_integral", vnorm_integral, f64::INFINITY);
    finite.pass = vnorm_integral.is_finite();
    let mut sup = AuditCheck::at_most("vnorm_sup_positive_t", max_vnorm_positive_t, f64::INFINITY);
    sup.pass = max_vnorm_positive_t.is_finite();
    Ok(AuditRecord {
        checks: vec![AuditCheck::at_most("rough_bound", lhs, rhs), finite, sup],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenbasis::Order;
    use crate::integrator::{solve, Discretization, SchemeKind, SchemeSpec};
    use crate::operators::ProblemSpec;
    use crate::quadrature::Profile;
    use std::f64::consts::PI;

    fn fk(u0: Profile, n: usize) -> (crate::integrator::Galerkin, Trajectory) {
        let spec = ProblemSpec::new(Order::Laplacian, PI, 0.5, u0);
        solve(
            &spec,
            &Discretization::new(n, SchemeSpec::new(SchemeKind::ImexEuler, 0.01)),
        )
        .unwrap()
    }

    #[test]
    fn report_of_zero_state() {
        let (g, _) = fk(Profile::SineMode(1), 4);
        let r = energy_report(&g.ops, &SpectralState::new(0.0, DVector::zeros(4)), 0.0);
        assert_eq!(r.l2, 0.0);
        assert_eq!(r.vnorm_sq, 0.0);
        assert!((r.potential - PI / 4.0).abs() < 1e-12);
        assert!((r.energy - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn report_of_first_mode() {
        let (g, _) = fk(Profile::SineMode(1), 4);
        let mut c = DVector::zeros(4);
        c[0] = 1.0;
        let r = energy_report(&g.ops, &SpectralState::new(0.0, c.clone()), 0.0);
        assert!((r.vnorm_sq - 1.0).abs() < 1e-12);
        assert!((r.l4_4 - 3.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((r.l2 - parseval_l2(&c)).abs() < 1e-12);
    }

    #[test]
    fn zero_data_audits() {
        let (_, traj) = fk(Profile::Coefficients(vec![0.0]), 4);
        let smooth = smooth_energy_audit(&traj).unwrap();
        assert!(smooth.passed());
        assert_eq!(smooth.get("energy_monotone").unwrap().lhs, 0.0);
        let e0 = traj.reports[0].energy;
        assert_eq!(smooth.get("energy_law").unwrap().lhs, e0);
        let rough = rough_energy_audit(&traj).unwrap();
        assert!(rough.passed());
        let b = rough.get("rough_bound").unwrap();
        assert_eq!(b.lhs, 0.0);
        assert!(b.rhs > 0.0);
    }

    #[test]
    fn audits_reject_forced_runs() {
        let mut spec = ProblemSpec::new(Order::Laplacian, PI, 0.1, Profile::SineMode(1));
        spec.forcing = crate::operators::Forcing::Manufactured {
            reference: Profile::SineMode(1),
            rate: 1.0,
        };
        let (_, traj) = solve(
            &spec,
            &Discretization::new(3, SchemeSpec::new(SchemeKind::ImexEuler, 0.01)),
        )
        .unwrap();
        assert!(matches!(
            smooth_energy_audit(&traj),
            Err(SolverError::InvalidArgument(_))
        ));
        assert!(matches!(
            rough_energy_audit(&traj),
            Err(SolverError::InvalidArgument(_))
        ));
    }

    #[test]
    fn smooth_run_dissipates() {
        let (_, traj) = fk(Profile::PolyBump, 8);
        let audit = smooth_energy_audit(&traj).unwrap();
        assert!(audit.passed(), "{audit:?}");
        assert!(traj.final_report().dissipation_cum > 0.0);
    }
}
