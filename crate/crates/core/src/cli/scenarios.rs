//! Named scenarios. Each entry notes which settings come from the published
//! figures (`given`) and which were fixed here (`chosen`).

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::diagnostics::{
    cauchy_ladder, gronwall_separation, overshoot_metric, rough_energy_audit, smooth_energy_audit,
    AuditCheck, AuditRecord,
};
use crate::eigenbasis::Order;
use crate::error::{Result, SolverError};
use crate::integrator::{solve, Discretization, Galerkin, SchemeKind, SchemeSpec, Trajectory};
use crate::operators::{Forcing, ProblemSpec, Reaction};
use crate::quadrature::{gauss_rule, Profile};

use super::config::RunConfig;
use super::output::{
    ensure_dir, fmt_num, fmt_short, sample_snapshots, uniform_grid, write_audit_csv, write_run,
    write_table, SNAPSHOT_POINTS,
};

pub const REGISTRY: &[&str] = &[
    "fk_front",
    "efk_kink",
    "gamma_sweep",
    "rough_fk",
    "rough_efk",
    "energy_law",
    "gronwall",
    "converge",
    "mms",
    "heat_oracle",
];

pub const SWEEP_GAMMAS: [f64; 3] = [0.1, 0.01, 0.001];
pub const LADDER_SIZES: [usize; 4] = [4, 8, 16, 32];
pub const GRONWALL_DELTA: f64 = 1e-6;
pub const GRONWALL_SLACK: f64 = 0.05;
pub const HEAT_TAUS: [f64; 2] = [1e-2, 5e-3];

/// Command-line adjustments applied to every member run of a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub tau: Option<f64>,
    /// Applied to `m = 2` members only.
    pub gamma: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(n) = self.n {
            cfg.discretization.n = n;
        }
        if let Some(tau) = self.tau {
            // keep the snapshot spacing in time
            if let Some(every) = cfg.output.snapshot_every.as_mut() {
                *every = ((*every as f64) * cfg.discretization.scheme.tau / tau)
                    .round()
                    .max(1.0) as usize;
            }
            cfg.discretization.scheme.tau = tau;
        }
        if let (Some(g), Order::Biharmonic) = (self.gamma, cfg.problem.order) {
            cfg.problem.gamma = g;
        }
    }

    fn reject(&self, scenario: &str, n: bool, tau: bool, gamma: bool) -> Result<()> {
        for (set, allowed, what) in [
            (self.n.is_some(), n, "--n"),
            (self.tau.is_some(), tau, "--tau"),
            (self.gamma.is_some(), gamma, "--gamma"),
        ] {
            if set && !allowed {
                return Err(SolverError::invalid(format!(
                    "{scenario} sweeps over {what}; it cannot be overridden"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub n: usize,
    pub scheme: SchemeKind,
    pub tau_requested: f64,
    pub tau_used: f64,
    pub halvings: u32,
}

impl RunRecord {
    fn new(label: impl Into<String>, requested: &SchemeSpec, traj: &Trajectory) -> Self {
        RunRecord {
            label: label.into(),
            n: traj.meta.n,
            scheme: requested.kind,
            tau_requested: requested.tau,
            tau_used: traj.meta.scheme.tau,
            halvings: traj.meta.halvings,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioReport {
    pub audit: AuditRecord,
    pub runs: Vec<RunRecord>,
}

fn config(problem: ProblemSpec, n: usize, kind: SchemeKind, tau: f64, every: usize) -> RunConfig {
    let mut c = RunConfig::new(problem, Discretization::new(n, SchemeSpec::new(kind, tau)));
    c.output.snapshot_every = Some(every);
    c
}

fn fk_front() -> RunConfig {
    // given: m = 1, L = 20, u0 = exp(-x²), u(0) = 1, u(20) = 0
    // chosen: T = 10, n = 64, tau = 0.01
    let mut p = ProblemSpec::new(
        Order::Laplacian,
        20.0,
        10.0,
        Profile::Gaussian {
            center: 0.0,
            width: 1.0,
        },
    );
    p.bc_left = 1.0;
    config(p, 64, SchemeKind::ImexEuler, 0.01, 100)
}

fn efk_kink() -> RunConfig {
    // given: m = 2, gamma = 1, L = 1, u0 = x²(1-x)², clamped ends
    // chosen: beta = 1, T = 0.5, n = 32, tau = 1e-4
    let p = ProblemSpec::new(Order::Biharmonic, 1.0, 0.5, Profile::PolyBump);
    config(p, 32, SchemeKind::ImexEuler, 1e-4, 500)
}

fn rough_fk() -> RunConfig {
    // given: m = 1, u0 = indicator of [0.25, 0.75], T = 2
    // chosen: L = 1, n = 64, tau = 1e-3
    let p = ProblemSpec::new(
        Order::Laplacian,
        1.0,
        2.0,
        Profile::Indicator { a: 0.25, b: 0.75 },
    );
    config(p, 64, SchemeKind::ImexEuler, 1e-3, 200)
}

fn rough_efk() -> RunConfig {
    // given: m = 2, same u0, T = 0.05
    // chosen: gamma = beta = 1, L = 1, n = 32, tau = 1e-4
    let p = ProblemSpec::new(
        Order::Biharmonic,
        1.0,
        0.05,
        Profile::Indicator { a: 0.25, b: 0.75 },
    );
    config(p, 32, SchemeKind::ImexEuler, 1e-4, 50)
}

fn heat_base(kind: SchemeKind, tau: f64) -> RunConfig {
    // chosen throughout: exact solution e^{-t} sin x
    let mut p = ProblemSpec::new(
        Order::Laplacian,
        std::f64::consts::PI,
        1.0,
        Profile::SineMode(1),
    );
    p.reaction = Reaction::Off;
    let steps = (1.0 / tau).round() as usize;
    config(p, 4, kind, tau, steps)
}

/// `(label, config, coarsest tau)`; exact solutions `e^{-t} û`.
fn mms_cases() -> Vec<(&'static str, RunConfig, f64)> {
    // chosen throughout. The sine mode lies in the m = 1 basis, so only time
    // error remains; the m = 2 case needs n = 64 to push the projection
    // error of the bump below the time error, and gamma = 0.1 keeps the
    // coarsest step out of the stiff regime of the leading modes.
    let mut m1 = ProblemSpec::new(
        Order::Laplacian,
        std::f64::consts::PI,
        1.0,
        Profile::SineMode(1),
    );
    m1.forcing = Forcing::Manufactured {
        reference: Profile::SineMode(1),
        rate: 1.0,
    };
    let mut m2 = ProblemSpec::new(Order::Biharmonic, 1.0, 0.5, Profile::PolyBump);
    m2.gamma = 0.1;
    m2.forcing = Forcing::Manufactured {
        reference: Profile::PolyBump,
        rate: 1.0,
    };
    vec![
        (
            "m1_sine",
            config(m1, 8, SchemeKind::ImexEuler, 1e-2, 1),
            1e-2,
        ),
        (
            "m2_bump",
            config(m2, 64, SchemeKind::ImexEuler, 1e-3, 1),
            1e-3,
        ),
    ]
}

/// Setup loaded by `scenario = name` in a config file. Composite scenarios
/// report their first member.
pub fn base_config(name: &str) -> Result<RunConfig> {
    Ok(match name {
        "fk_front" | "energy_law" => fk_front(),
        "efk_kink" | "converge" => efk_kink(),
        "gamma_sweep" => {
            let mut c = efk_kink();
            c.problem.gamma = SWEEP_GAMMAS[0];
            c
        }
        "rough_fk" => rough_fk(),
        "rough_efk" => rough_efk(),
        "gronwall" => {
            let mut c = fk_front();
            c.problem.final_time = 2.0;
            c
        }
        "mms" => mms_cases().remove(0).1,
        "heat_oracle" => heat_base(SchemeKind::ImexEuler, HEAT_TAUS[0]),
        other => return Err(unknown(other)),
    })
}

fn unknown(name: &str) -> SolverError {
    SolverError::invalid(format!(
        "unknown scenario `{name}`; available: {}",
        REGISTRY.join(", ")
    ))
}

fn is_rough(p: &Profile) -> bool {
    matches!(p, Profile::Indicator { .. } | Profile::Table(_))
}

/// Integrates one configuration and writes its outputs into `dir`.
pub fn run_single(
    label: &str,
    cfg: &RunConfig,
    dir: &Path,
    svg: bool,
) -> Result<(Galerkin, Trajectory, ScenarioReport)> {
    let scheme = cfg.resolved_scheme();
    let mut disc = cfg.discretization.clone();
    disc.scheme = scheme;
    let (g, traj) = solve(&cfg.problem, &disc)?;
    write_run(dir, &g, &traj, svg || cfg.output.svg)?;

    let mut audit = AuditRecord::default();
    if traj.is_homogeneous() {
        audit.extend("", smooth_energy_audit(&traj)?);
        if is_rough(&cfg.problem.u0) && cfg.problem.lifting().is_none() {
            audit.extend("", rough_energy_audit(&traj)?);
        }
    }
    write_audit_csv(&dir.join("audit.csv"), &audit)?;

    let grid = uniform_grid(cfg.problem.length, SNAPSHOT_POINTS);
    let last = sample_snapshots(&g, &traj, &grid)?
        .pop()
        .expect("final snapshot");
    let o = overshoot_metric(&last.1, 0.0, 1.0);
    write_table(
        &dir.join("overshoot.csv"),
        &["t", "amplitude", "sign_changes"],
        &[vec![
            fmt_num(last.0),
            fmt_num(o.amplitude),
            o.sign_changes.to_string(),
        ]],
    )?;

    let report = ScenarioReport {
        audit,
        runs: vec![RunRecord::new(label, &cfg.discretization.scheme, &traj)],
    };
    write_runs(dir, &report.runs)?;
    Ok((g, traj, report))
}

fn write_runs(dir: &Path, runs: &[RunRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.n.to_string(),
                r.scheme.name().to_string(),
                fmt_num(r.tau_requested),
                fmt_num(r.tau_used),
                r.halvings.to_string(),
            ]
        })
        .collect();
    write_table(
        &dir.join("runs.csv"),
        &[
            "label",
            "n",
            "scheme",
            "tau_requested",
            "tau_used",
            "halvings",
        ],
        &rows,
    )
}

/// Final-time overshoot of a run on the snapshot grid, against `[0, 1]`.
pub fn final_overshoot(
    g: &Galerkin,
    traj: &Trajectory,
) -> Result<(f64, crate::diagnostics::Overshoot)> {
    let grid = uniform_grid(traj.meta.problem.length, SNAPSHOT_POINTS);
    let (t, u) = sample_snapshots(g, traj, &grid)?
        .pop()
        .expect("final snapshot");
    Ok((t, overshoot_metric(&u, 0.0, 1.0)))
}

/// `max_k ‖u_n(t_k) - e^{-r t_k} û‖_{L²}` over the stored snapshots of a
/// manufactured run, on a rule fine enough to resolve the basis tail.
pub fn manufactured_error(g: &Galerkin, traj: &Trajectory) -> Result<f64> {
    let spec = &traj.meta.problem;
    let Forcing::Manufactured { reference, rate } = &spec.forcing else {
        return Err(SolverError::invalid("run has no manufactured solution"));
    };
    let rule = gauss_rule(spec.length, (4 * g.basis.len()).max(128), 12, &[])?;
    let nodes = rule.nodes();
    let n = g.basis.len();
    let w = DMatrix::from_fn(nodes.len(), n, |i, j| {
        g.basis.eval(j + 1, nodes[i], 0).expect("index in range")
    });
    let exact: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            reference
                .value(x, spec.length)
                .expect("validated reference")
        })
        .collect();
    let mut worst: f64 = 0.0;
    for s in &traj.snapshots {
        let un = &w * &s.c;
        let decay = (-rate * s.t).exp();
        let e2: f64 = un
            .iter()
            .zip(&exact)
            .zip(rule.weights())
            .map(|((u, ue), q)| q * (u - decay * ue).powi(2))
            .sum();
        worst = worst.max(e2.sqrt());
    }
    Ok(worst)
}

fn order_check(name: String, ratio: f64, order: f64, rel: f64) -> AuditCheck {
    AuditCheck::at_most(name, (ratio - order).abs(), rel * order)
}

fn scheme_order(kind: SchemeKind) -> f64 {
    match kind {
        SchemeKind::ImexEuler => 2.0,
        SchemeKind::ImexCnAb2 => 4.0,
    }
}

/// Runs a named scenario, writing every output under `out`.
pub fn run_scenario(name: &str, ov: &Overrides, out: &Path, svg: bool) -> Result<ScenarioReport> {
    if !REGISTRY.contains(&name) {
        return Err(unknown(name));
    }
    let (n_ok, tau_ok, gamma_ok) = match name {
        "gamma_sweep" => (true, true, false),
        "converge" => (false, true, true),
        "mms" => (true, false, true),
        "heat_oracle" => (true, false, false),
        _ => (true, true, true),
    };
    ov.reject(name, n_ok, tau_ok, gamma_ok)?;
    ensure_dir(out)?;
    let with = |mut c: RunConfig| {
        ov.apply(&mut c);
        c
    };
    let report = match name {
        "fk_front" | "efk_kink" | "rough_fk" | "rough_efk" => {
            let cfg = with(base_config(name)?);
            return Ok(run_single(name, &cfg, out, svg)?.2);
        }
        "gamma_sweep" => {
            let mut report = ScenarioReport::default();
            let mut rows = Vec::new();
            let mut amps = Vec::new();
            for gamma in SWEEP_GAMMAS {
                let mut cfg = with(efk_kink());
                cfg.problem.gamma = gamma;
                let label = format!("gamma_{}", fmt_short(gamma));
                let (g, traj, r) = run_single(&label, &cfg, &out.join(&label), svg)?;
                report.audit.extend(&format!("{label}."), r.audit);
                report.runs.extend(r.runs);
                let (t, o) = final_overshoot(&g, &traj)?;
                rows.push(vec![
                    fmt_short(gamma),
                    fmt_num(t),
                    fmt_num(o.amplitude),
                    o.sign_changes.to_string(),
                ]);
                amps.push((gamma, o.amplitude));
            }
            for w in amps.windows(2) {
                report.audit.checks.push(AuditCheck::below(
                    format!(
                        "overshoot_gamma_{}_below_{}",
                        fmt_short(w[1].0),
                        fmt_short(w[0].0)
                    ),
                    w[1].1,
                    w[0].1,
                ));
            }
            write_table(
                &out.join("overshoot.csv"),
                &["gamma", "t", "amplitude", "sign_changes"],
                &rows,
            )?;
            report
        }
        "energy_law" => {
            let mut report = ScenarioReport::default();
            for (label, cfg) in [("efk_kink", efk_kink()), ("fk_front", fk_front())] {
                let cfg = with(cfg);
                let (_, traj, r) = run_single(label, &cfg, &out.join(label), svg)?;
                report
                    .audit
                    .extend(&format!("{label}."), smooth_energy_audit(&traj)?);
                report.runs.extend(r.runs);
            }
            report
        }
        "gronwall" => {
            let cfg = with(base_config(name)?);
            let mut scheme = cfg.resolved_scheme();
            scheme.store_every = 1;
            let g = Galerkin::new(
                &cfg.problem,
                &Discretization {
                    scheme,
                    ..cfg.discretization.clone()
                },
            )?;
            let init = g.init_state(&cfg.problem)?;
            let mut perturbed = init.clone();
            perturbed.c[0] += GRONWALL_DELTA;
            let a = g.run_from(&init, &cfg.problem, &scheme)?;
            let b = g.run_from(&perturbed, &cfg.problem, &scheme)?;
            let sep = gronwall_separation(&a, &b, GRONWALL_SLACK)?;
            write_run(&out.join("base"), &g, &a, svg)?;
            let rows: Vec<Vec<String>> = sep
                .rows
                .iter()
                .map(|(t, z, bound)| vec![fmt_num(*t), fmt_num(*z), fmt_num(*bound)])
                .collect();
            write_table(&out.join("separation.csv"), &["t", "z_sq", "bound"], &rows)?;
            ScenarioReport {
                audit: AuditRecord {
                    checks: vec![sep.as_check()],
                },
                runs: vec![
                    RunRecord::new("base", &scheme, &a),
                    RunRecord::new("perturbed", &scheme, &b),
                ],
            }
        }
        "converge" => {
            let mut report = ScenarioReport::default();
            let mut rows = Vec::new();
            for (label, cfg) in [("efk_kink", efk_kink()), ("rough_fk", rough_fk())] {
                let cfg = with(cfg);
                let ladder = cauchy_ladder(&cfg.problem, &cfg.resolved_scheme(), &LADDER_SIZES)?;
                for r in &ladder {
                    rows.push(vec![
                        label.to_string(),
                        r.n.to_string(),
                        r.next_n.to_string(),
                        fmt_num(r.distance),
                    ]);
                }
                for w in ladder.windows(2) {
                    let name = format!(
                        "{label}.d_{}_{}_vs_{}_{}",
                        w[1].n, w[1].next_n, w[0].n, w[0].next_n
                    );
                    report.audit.checks.push(if label == "efk_kink" {
                        AuditCheck::below(name, w[1].distance, w[0].distance)
                    } else {
                        AuditCheck::at_most(name, w[1].distance, w[0].distance)
                    });
                }
                if label == "efk_kink" {
                    let (first, last) = (ladder[0].distance, ladder[ladder.len() - 1].distance);
                    report.audit.checks.push(AuditCheck::below(
                        "efk_kink.last_below_first_over_10",
                        last,
                        first / 10.0,
                    ));
                }
            }
            write_table(
                &out.join("ladder.csv"),
                &["case", "n", "next_n", "distance"],
                &rows,
            )?;
            report
        }
        "mms" => {
            let mut report = ScenarioReport::default();
            let mut rows = Vec::new();
            for (label, base, tau0) in mms_cases() {
                for kind in [SchemeKind::ImexEuler, SchemeKind::ImexCnAb2] {
                    let mut errors = Vec::new();
                    for k in 0..3 {
                        let mut cfg = with(base.clone());
                        let tau = tau0 / f64::from(1u32 << k);
                        cfg.discretization.scheme = SchemeSpec::new(kind, tau);
                        let (g, traj) = solve(&cfg.problem, &cfg.discretization)?;
                        let err = manufactured_error(&g, &traj)?;
                        report.runs.push(RunRecord::new(
                            format!("{label}.{}", kind.name()),
                            &cfg.discretization.scheme,
                            &traj,
                        ));
                        let ratio = errors.last().map_or(f64::NAN, |prev: &f64| prev / err);
                        rows.push(vec![
                            label.to_string(),
                            kind.name().to_string(),
                            fmt_num(tau),
                            fmt_num(err),
                            if ratio.is_nan() {
                                String::new()
                            } else {
                                fmt_num(ratio)
                            },
                        ]);
                        if !ratio.is_nan() {
                            report.audit.checks.push(order_check(
                                format!("{label}.{}.ratio_tau_{}", kind.name(), fmt_short(tau)),
                                ratio,
                                scheme_order(kind),
                                0.2,
                            ));
                        }
                        errors.push(err);
                    }
                }
            }
            write_table(
                &out.join("mms.csv"),
                &["case", "scheme", "tau", "error", "ratio"],
                &rows,
            )?;
            report
        }
        "heat_oracle" => {
            let mut report = ScenarioReport::default();
            let mut rows = Vec::new();
            let exact = (-1.0f64).exp();
            for kind in [SchemeKind::ImexEuler, SchemeKind::ImexCnAb2] {
                let mut errors = Vec::new();
                for tau in HEAT_TAUS {
                    let cfg = with(heat_base(kind, tau));
                    let (_, traj) = solve(&cfg.problem, &cfg.discretization)?;
                    let c1 = traj.final_state().c[0];
                    let err = (c1 - exact).abs();
                    report.runs.push(RunRecord::new(
                        kind.name(),
                        &cfg.discretization.scheme,
                        &traj,
                    ));
                    report.audit.checks.push(AuditCheck::below(
                        format!("{}.error_tau_{}", kind.name(), fmt_short(tau)),
                        err,
                        2.0 * tau,
                    ));
                    let ratio = errors.last().map_or(f64::NAN, |prev: &f64| prev / err);
                    rows.push(vec![
                        kind.name().to_string(),
                        fmt_num(tau),
                        fmt_num(c1),
                        fmt_num(exact),
                        fmt_num(err),
                        if ratio.is_nan() {
                            String::new()
                        } else {
                            fmt_num(ratio)
                        },
                    ]);
                    if !ratio.is_nan() {
                        report.audit.checks.push(order_check(
                            format!("{}.ratio", kind.name()),
                            ratio,
                            scheme_order(kind),
                            0.15,
                        ));
                    }
                    errors.push(err);
                }
            }
            write_table(
                &out.join("heat.csv"),
                &["scheme", "tau", "c1", "exact", "error", "ratio"],
                &rows,
            )?;
            report
        }
        other => return Err(unknown(other)),
    };
    write_audit_csv(&out.join("audit.csv"), &report.audit)?;
    write_runs(out, &report.runs)?;
    Ok(report)
}

/// Runs a parsed configuration: its named scenario if it has one, else a single run.
pub fn run_config(
    cfg: &RunConfig,
    ov: &Overrides,
    out: &Path,
    svg: bool,
) -> Result<ScenarioReport> {
    let svg = svg || cfg.output.svg;
    let Some(name) = &cfg.scenario else {
        let mut c = cfg.clone();
        ov.apply(&mut c);
        return Ok(run_single("config", &c, out, svg)?.2);
    };
    if !is_single(name) {
        if cfg.output.snapshot_every.is_some() {
            return Err(SolverError::invalid(format!(
                "snapshot_every cannot be set for the composite scenario {name}"
            )));
        }
        return run_scenario(name, ov, out, svg);
    }
    let mut c = base_config(name)?;
    if cfg.output.snapshot_every.is_some() {
        c.output.snapshot_every = cfg.output.snapshot_every;
    }
    ov.apply(&mut c);
    Ok(run_single(name, &c, out, svg)?.2)
}

fn is_single(name: &str) -> bool {
    matches!(name, "fk_front" | "efk_kink" | "rough_fk" | "rough_efk")
}

/// Default output directory for a scenario.
pub fn default_out(name: &str) -> PathBuf {
    PathBuf::from("output").join(name)
}
