//! IMEX time stepping of the Galerkin system `dc/dt = -A c - N(c) + F(t)`.
//!
//! The stiff linear part `A` is implicit, the cubic term explicit. Each
//! distinct `θτ` gets one cached Cholesky factor of `I + θτA`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::diagnostics::{energy_report, EnergyReport};
use crate::eigenbasis::{beam_basis, sine_basis, Eigenbasis, Order};
use crate::error::{Result, SolverError};
use crate::operators::{assemble, AssembledOperators, ProblemSpec, Reaction};
use crate::quadrature::{
    default_rule, gauss_rule, project, project_samples, Profile, QuadratureRule,
};

/// Coefficients larger than this are treated as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;
/// Allowed per-step energy increase before a run is rejected.
pub const ENERGY_GUARD_TOL: f64 = 1e-9;
pub const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    ImexEuler,
    ImexCnAb2,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::ImexEuler => "imex_euler",
            SchemeKind::ImexCnAb2 => "imex_cn_ab2",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_euler" => Ok(SchemeKind::ImexEuler),
            "imex_cn_ab2" => Ok(SchemeKind::ImexCnAb2),
            other => Err(SolverError::invalid(format!(
                "unknown scheme `{other}` (expected imex_euler or imex_cn_ab2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub tau: f64,
    /// Snapshot stride in steps.
    pub store_every: usize,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, tau: f64) -> Self {
        SchemeSpec {
            kind,
            tau,
            store_every: 1,
        }
    }

    pub fn validate(&self, final_time: f64) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(SolverError::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if final_time > 0.0 && self.tau > final_time {
            return Err(SolverError::invalid(format!(
                "tau = {} exceeds T = {final_time}",
                self.tau
            )));
        }
        if self.store_every == 0 {
            return Err(SolverError::invalid("snapshot stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub c: DVector<f64>,
    pub step_index: usize,
}

impl SpectralState {
    pub fn new(t: f64, c: DVector<f64>) -> Self {
        SpectralState {
            t,
            c,
            step_index: 0,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let max = self.c.amax();
        if !max.is_finite() || self.c.iter().any(|v| !v.is_finite()) || max > BLOW_UP_THRESHOLD {
            return Err(SolverError::BlowUp {
                t: self.t,
                max_coeff: max,
            });
        }
        Ok(())
    }
}

/// Initial Galerkin state `c = π_n(u0 - g)` at `t = 0`.
pub fn init_state(
    basis: &Eigenbasis,
    rule: &QuadratureRule,
    spec: &ProblemSpec,
) -> Result<SpectralState> {
    spec.validate()?;
    let c = match (spec.lifting(), &spec.u0) {
        (None, profile) | (Some(_), profile @ Profile::Coefficients(_)) => {
            project(basis, rule, profile)?
        }
        (Some(g), profile) => {
            // project u0 - g, checking breakpoints through a dry run on u0
            project(basis, rule, profile)?;
            let samples: Vec<f64> = rule
                .nodes()
                .iter()
                .map(|&x| profile.value(x, spec.length).expect("pointwise profile") - g.value(x))
                .collect();
            project_samples(basis, rule, &samples)
        }
    };
    Ok(SpectralState::new(0.0, DVector::from_vec(c)))
}

/// Time stepper bound to one set of assembled operators.
pub struct Stepper<'a> {
    ops: &'a AssembledOperators,
    factors: Vec<(u64, Cholesky<f64, Dyn>)>,
}

impl<'a> Stepper<'a> {
    pub fn new(ops: &'a AssembledOperators) -> Self {
        Stepper {
            ops,
            factors: Vec::new(),
        }
    }

    pub fn ops(&self) -> &AssembledOperators {
        self.ops
    }

    fn solve_shifted(&mut self, scale: f64, rhs: DVector<f64>) -> Result<DVector<f64>> {
        let key = scale.to_bits();
        let idx = match self.factors.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                let n = self.ops.n();
                let m = DMatrix::identity(n, n) + self.ops.linear() * scale;
                let chol = m.cholesky().ok_or_else(|| {
                    SolverError::Internal(format!("I + {scale:e} A is not positive definite"))
                })?;
                // the last partial step adds one more key; keep the cache small
                if self.factors.len() >= 4 {
                    self.factors.remove(0);
                }
                self.factors.push((key, chol));
                self.factors.len() - 1
            }
        };
        Ok(self.factors[idx].1.solve(&rhs))
    }

    /// `(I + τA) c^{k+1} = c^k + τ(F(t_{k+1}) - N(c^k))`.
    pub fn imex_euler_step(&mut self, state: &SpectralState, tau: f64) -> Result<SpectralState> {
        let nl = self.ops.nonlinear_term(&state.c);
        self.euler_with(state, &nl, tau)
    }

    fn euler_with(
        &mut self,
        state: &SpectralState,
        nl: &DVector<f64>,
        tau: f64,
    ) -> Result<SpectralState> {
        let t_next = state.t + tau;
        let mut rhs = &state.c - nl * tau;
        if !self.ops.forcing().is_zero() {
            rhs += self.ops.forcing_vector(t_next) * tau;
        }
        let c = self.solve_shifted(tau, rhs)?;
        let next = SpectralState {
            t: t_next,
            c,
            step_index: state.step_index + 1,
        };
        next.check_finite()?;
        Ok(next)
    }

    /// Crank-Nicolson on `A`, second-order Adams-Bashforth on `N`:
    /// `(I + τ/2 A) c^{k+1} = (I - τ/2 A) c^k - τ((1 + ω/2) N^k - (ω/2) N^{k-1}) + τ F(t_{k+1/2})`
    /// with `ω = τ / τ_prev` (1 on a uniform grid).
    pub fn imex_cn_ab2_step(
        &mut self,
        state: &SpectralState,
        prev_nonlinear: &DVector<f64>,
        prev_tau: f64,
        tau: f64,
    ) -> Result<SpectralState> {
        let nl = self.ops.nonlinear_term(&state.c);
        self.cn_ab2_with(state, &nl, prev_nonlinear, prev_tau, tau)
    }

    fn cn_ab2_with(
        &mut self,
        state: &SpectralState,
        nl: &DVector<f64>,
        prev_nonlinear: &DVector<f64>,
        prev_tau: f64,
        tau: f64,
    ) -> Result<SpectralState> {
        let omega = tau / prev_tau;
        let extrapolated = nl * (1.0 + 0.5 * omega) - prev_nonlinear * (0.5 * omega);
        let mut rhs = &state.c - self.ops.linear() * &state.c * (0.5 * tau) - extrapolated * tau;
        if !self.ops.forcing().is_zero() {
            rhs += self.ops.forcing_vector(state.t + 0.5 * tau) * tau;
        }
        let c = self.solve_shifted(0.5 * tau, rhs)?;
        let next = SpectralState {
            t: state.t + tau,
            c,
            step_index: state.step_index + 1,
        };
        next.check_finite()?;
        Ok(next)
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryMeta {
    pub problem: ProblemSpec,
    pub scheme: SchemeSpec,
    pub n: usize,
    /// Number of τ halvings applied before the run was accepted.
    pub halvings: u32,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// States at `t = 0`, every `store_every` steps, and at `t = T`.
    pub snapshots: Vec<SpectralState>,
    /// One report per time level, starting at `t = 0`.
    pub reports: Vec<EnergyReport>,
    /// `‖c^{k+1} - c^k‖ / τ_k` per step.
    pub increments: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralState {
        self.snapshots
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn final_report(&self) -> &EnergyReport {
        self.reports
            .last()
            .expect("trajectory has at least the initial report")
    }

    /// Whether the per-step energy guard applies (homogeneous, cubic problems).
    pub fn is_homogeneous(&self) -> bool {
        self.meta.problem.forcing.is_zero() && self.meta.problem.reaction == Reaction::Cubic
    }
}

/// Integrates from `init` to `spec.final_time`, calling `observer` at every
/// stored snapshot.
pub fn integrate<F>(
    ops: &AssembledOperators,
    init: SpectralState,
    spec: &ProblemSpec,
    scheme: &SchemeSpec,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&SpectralState, &EnergyReport),
{
    scheme.validate(spec.final_time)?;
    init.check_finite()?;
    let final_time = spec.final_time;
    let guard = spec.forcing.is_zero() && spec.reaction == Reaction::Cubic;
    let mut stepper = Stepper::new(ops);
    let mut dissipation = 0.0;
    let first = energy_report(ops, &init, 0.0);
    observer(&init, &first);
    let mut reports = vec![first];
    let mut snapshots = vec![init.clone()];
    let mut increments = Vec::new();

    let steps = if final_time > 0.0 {
        ((final_time / scheme.tau) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let mut state = init;
    let mut prev: Option<(DVector<f64>, f64)> = None;
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            final_time
        } else {
            (k + 1) as f64 * scheme.tau
        };
        let tau = t_next - state.t;
        let nl = ops.nonlinear_term(&state.c);
        let mut next = match (scheme.kind, &prev) {
            (SchemeKind::ImexCnAb2, Some((prev_nl, prev_tau))) => {
                stepper.cn_ab2_with(&state, &nl, prev_nl, *prev_tau, tau)?
            }
            _ => stepper.euler_with(&state, &nl, tau)?,
        };
        next.t = t_next;
        let inc = (&next.c - &state.c).norm() / tau;
        dissipation += tau * inc * inc;
        let report = energy_report(ops, &next, dissipation);
        if guard {
            let increase = report.energy - reports.last().expect("initial report").energy;
            if increase > ENERGY_GUARD_TOL {
                return Err(SolverError::EnergyIncrease {
                    t: t_next,
                    increase,
                });
            }
        }
        increments.push(inc);
        if (k + 1) % scheme.store_every == 0 || k + 1 == steps {
            observer(&next, &report);
            snapshots.push(next.clone());
        }
        reports.push(report);
        prev = Some((nl, tau));
        state = next;
    }

    Ok(Trajectory {
        snapshots,
        reports,
        increments,
        meta: TrajectoryMeta {
            problem: spec.clone(),
            scheme: *scheme,
            n: ops.n(),
            halvings: 0,
        },
    })
}

/// Spatial resolution and time scheme for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub n: usize,
    pub scheme: SchemeSpec,
    pub panels: Option<usize>,
    pub gauss_points: Option<usize>,
}

impl Discretization {
    pub fn new(n: usize, scheme: SchemeSpec) -> Self {
        Discretization {
            n,
            scheme,
            panels: None,
            gauss_points: None,
        }
    }
}

/// Basis, quadrature and operators for one problem.
pub struct Galerkin {
    pub basis: Eigenbasis,
    pub rule: QuadratureRule,
    pub ops: AssembledOperators,
}

impl Galerkin {
    pub fn new(spec: &ProblemSpec, disc: &Discretization) -> Result<Self> {
        spec.validate()?;
        let basis = match spec.order {
            Order::Laplacian => sine_basis(spec.length, disc.n)?,
            Order::Biharmonic => beam_basis(spec.length, disc.n)?,
        };
        let breaks = spec.u0.breakpoints(spec.length);
        let rule = match (disc.panels, disc.gauss_points) {
            (None, None) => default_rule(spec.length, disc.n, &breaks)?,
            (p, g) => gauss_rule(
                spec.length,
                p.unwrap_or((2 * disc.n).max(16)),
                g.unwrap_or(8),
                &breaks,
            )?,
        };
        let ops = assemble(&basis, &rule, spec)?;
        Ok(Galerkin { basis, rule, ops })
    }

    pub fn init_state(&self, spec: &ProblemSpec) -> Result<SpectralState> {
        init_state(&self.basis, &self.rule, spec)
    }

    /// Integrates from `init`, halving τ (at most [`MAX_HALVINGS`] times)
    /// after a blow-up or an energy-guard violation.
    pub fn run_from(
        &self,
        init: &SpectralState,
        spec: &ProblemSpec,
        scheme: &SchemeSpec,
    ) -> Result<Trajectory> {
        let mut scheme = *scheme;
        let mut halvings = 0;
        loop {
            match integrate(&self.ops, init.clone(), spec, &scheme, |_, _| {}) {
                Ok(mut traj) => {
                    traj.meta.halvings = halvings;
                    return Ok(traj);
                }
                Err(e @ (SolverError::BlowUp { .. } | SolverError::EnergyIncrease { .. }))
                    if halvings < MAX_HALVINGS =>
                {
                    let _ = e;
                    halvings += 1;
                    scheme.tau *= 0.5;
                    scheme.store_every *= 2;
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn run(&self, spec: &ProblemSpec, scheme: &SchemeSpec) -> Result<Trajectory> {
        let init = self.init_state(spec)?;
        self.run_from(&init, spec, scheme)
    }
}

/// Builds the discretization and integrates `spec` from its initial profile.
pub fn solve(spec: &ProblemSpec, disc: &Discretization) -> Result<(Galerkin, Trajectory)> {
    let g = Galerkin::new(spec, disc)?;
    let traj = g.run(spec, &disc.scheme)?;
    Ok((g, traj))
}
