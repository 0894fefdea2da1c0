//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::DVector;

use parabolic_galerkin::cli::output::uniform_grid;
use parabolic_galerkin::cli::scenarios::{base_config, run_scenario, Overrides};
use parabolic_galerkin::cli::RunConfig;
use parabolic_galerkin::diagnostics::{cauchy_ladder, fd_oracle, overshoot_metric, Overshoot};
use parabolic_galerkin::eigenbasis::{beam_basis, sine_basis, Eigenbasis, Order};
use parabolic_galerkin::integrator::{
    solve, Discretization, Galerkin, SchemeKind, SchemeSpec, Trajectory,
};
use parabolic_galerkin::operators::{Forcing, ProblemSpec, Reaction};
use parabolic_galerkin::quadrature::{gauss_rule, reconstruct, Profile};
use parabolic_galerkin::Result;

type Profiles = Vec<(f64, Vec<f64>)>;
type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn run_cfg(cfg: &RunConfig, store_every: usize) -> Result<(Galerkin, Trajectory)> {
    let mut disc = cfg.discretization.clone();
    disc.scheme.store_every = store_every;
    solve(&cfg.problem, &disc)
}

/// `u_n + g` on `grid`.
fn field(g: &Galerkin, spec: &ProblemSpec, c: &DVector<f64>, grid: &[f64]) -> Result<Vec<f64>> {
    let mut u = reconstruct(&g.basis, c.as_slice(), grid, 0)?;
    if let Some(l) = spec.lifting() {
        for (v, &x) in u.iter_mut().zip(grid) {
            *v += l.value(x);
        }
    }
    Ok(u)
}

fn eigenbasis_correctness() -> Result<Outcome> {
    let n = 32;
    let length = 1.0;
    let rule = gauss_rule(length, 256, 12, &[])?;
    let mut worst_gram: f64 = 0.0;
    let mut worst_bc: f64 = 0.0;
    let bases: [Eigenbasis; 2] = [sine_basis(length, n)?, beam_basis(length, n)?];
    for b in &bases {
        let values: Vec<Vec<f64>> = (1..=n)
            .map(|j| {
                rule.nodes()
                    .iter()
                    .map(|&x| b.eval(j, x, 0).unwrap())
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                let ip: f64 = (0..rule.nodes().len())
                    .map(|k| rule.weights()[k] * values[i][k] * values[j][k])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst_gram = worst_gram.max((ip - target).abs());
            }
        }
        for j in 1..=n {
            worst_bc = worst_bc
                .max(b.eval(j, 0.0, 0)?.abs())
                .max(b.eval(j, length, 0)?.abs());
        }
    }
    let beam = &bases[1];
    for j in 1..=n {
        worst_bc = worst_bc
            .max(beam.eval(j, 0.0, 1)?.abs())
            .max(beam.eval(j, length, 1)?.abs());
    }
    let worst_root = beam
        .kappas()
        .iter()
        .map(|k| (k.cos() - 1.0 / k.cosh()).abs())
        .fold(0.0, f64::max);
    outcome(
        worst_gram < 1e-8 && worst_root < 1e-12 && worst_bc < 1e-8,
        format!("gram {worst_gram:.2e} (< 1e-8), root residual {worst_root:.2e} (< 1e-12), boundary {worst_bc:.2e} (< 1e-8)"),
    )
}

fn heat_oracle() -> Result<Outcome> {
    let mut spec = ProblemSpec::new(Order::Laplacian, PI, 1.0, Profile::SineMode(1));
    spec.reaction = Reaction::Off;
    let exact = (-1.0f64).exp();
    let mut pass = true;
    let mut detail = Vec::new();
    for (kind, lo, hi) in [
        (SchemeKind::ImexEuler, 1.7, 2.3),
        (SchemeKind::ImexCnAb2, 3.4, 4.6),
    ] {
        let mut errs = Vec::new();
        for tau in [1e-2, 5e-3] {
            let (_, traj) = solve(&spec, &Discretization::new(4, SchemeSpec::new(kind, tau)))?;
            let err = (traj.final_state().c[0] - exact).abs();
            pass &= err < 2.0 * tau;
            errs.push(err);
        }
        let ratio = errs[0] / errs[1];
        pass &= (lo..=hi).contains(&ratio);
        detail.push(format!(
            "{}: errors {:.3e}, {:.3e}, ratio {ratio:.3} in [{lo}, {hi}]",
            kind.name(),
            errs[0],
            errs[1]
        ));
    }
    outcome(pass, detail.join("; "))
}

fn mms_error(spec: &ProblemSpec, n: usize, kind: SchemeKind, tau: f64) -> Result<f64> {
    let (g, traj) = solve(spec, &Discretization::new(n, SchemeSpec::new(kind, tau)))?;
    let Forcing::Manufactured { reference, rate } = &spec.forcing else {
        unreachable!()
    };
    let rule = gauss_rule(spec.length, 256, 12, &[])?;
    let nodes = rule.nodes();
    let exact: Vec<f64> = nodes
        .iter()
        .map(|&x| reference.value(x, spec.length).unwrap())
        .collect();
    let basis_at: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&x| (1..=n).map(|j| g.basis.eval(j, x, 0).unwrap()).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for s in &traj.snapshots {
        let decay = (-rate * s.t).exp();
        let e2: f64 = basis_at
            .iter()
            .zip(&exact)
            .zip(rule.weights())
            .map(|((row, ue), w)| {
                let u: f64 = row.iter().zip(s.c.iter()).map(|(b, c)| b * c).sum();
                w * (u - decay * ue).powi(2)
            })
            .sum();
        worst = worst.max(e2.sqrt());
    }
    Ok(worst)
}

fn manufactured_solution() -> Result<Outcome> {
    let mut m1 = ProblemSpec::new(Order::Laplacian, PI, 1.0, Profile::SineMode(1));
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
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, spec, n, tau0) in [("m=1 sine", &m1, 8, 1e-2), ("m=2 bump", &m2, 64, 1e-3)] {
        for (kind, order) in [(SchemeKind::ImexEuler, 2.0), (SchemeKind::ImexCnAb2, 4.0)] {
            let errs: Vec<f64> = (0..3)
                .map(|k| mms_error(spec, n, kind, tau0 / f64::from(1u32 << k)))
                .collect::<Result<_>>()?;
            let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
            pass &= ratios.iter().all(|r| (r - order).abs() <= 0.2 * order);
            detail.push(format!(
                "{label} {}: ratios {:.3}, {:.3}",
                kind.name(),
                ratios[0],
                ratios[1]
            ));
        }
    }
    outcome(pass, detail.join("; "))
}

fn smooth_energy_law() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["efk_kink", "fk_front"] {
        let cfg = base_config(name)?;
        let (_, traj) = run_cfg(&cfg, 1)?;
        let e0 = traj.reports[0].energy;
        let worst_law = traj
            .reports
            .iter()
            .map(|r| r.dissipation_cum + r.energy - e0)
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_rise = traj
            .reports
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= worst_law <= 1e-6 && worst_rise <= 1e-9;
        detail.push(format!(
            "{name}: max(D+E-E0) {worst_law:.3e} (<= 1e-6), max rise {worst_rise:.3e} (<= 1e-9), halvings {}",
            traj.meta.halvings
        ));
    }
    outcome(pass, detail.join("; "))
}

fn rough_data_estimate() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["rough_fk", "rough_efk"] {
        let cfg = base_config(name)?;
        let (_, traj) = run_cfg(&cfg, 1)?;
        let r = &traj.reports;
        let mut integral = 0.0;
        let mut vmax: f64 = 0.0;
        let mut finite = true;
        for w in r.windows(2) {
            let tau = w[1].t - w[0].t;
            integral += tau * (w[1].vnorm_sq + 0.75 * w[1].l4_4);
            finite &= w[1].vnorm_sq.is_finite();
            vmax = vmax.max(w[1].vnorm_sq);
        }
        let last = r.last().unwrap();
        // Young with eta = 1/2: ||u||² <= (u⁴, 1)/4 + L
        let lhs = 0.5 * last.l2 * last.l2 + integral;
        let rhs = 0.5 * r[0].l2 * r[0].l2 + last.t * cfg.problem.length;
        pass &= rhs - lhs > 0.0 && finite;
        detail.push(format!(
            "{name}: margin {:.3e} (> 0), max ||u||_V² for t > 0 {vmax:.3e}",
            rhs - lhs
        ));
    }
    outcome(pass, detail.join("; "))
}

fn gronwall_bound() -> Result<Outcome> {
    let cfg = base_config("gronwall")?;
    assert_eq!(cfg.problem.final_time, 2.0);
    let mut scheme = cfg.discretization.scheme;
    scheme.store_every = 1;
    let g = Galerkin::new(
        &cfg.problem,
        &Discretization {
            scheme,
            ..cfg.discretization.clone()
        },
    )?;
    let a0 = g.init_state(&cfg.problem)?;
    let mut b0 = a0.clone();
    b0.c[0] += 1e-6;
    let a = g.run_from(&a0, &cfg.problem, &scheme)?;
    let b = g.run_from(&b0, &cfg.problem, &scheme)?;
    let z0 = (&a0.c - &b0.c).norm_squared();
    let mut worst: f64 = 0.0;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let z = (&sa.c - &sb.c).norm_squared();
        worst = worst.max(z / (z0 * (2.0 * sa.t).exp()));
    }
    outcome(
        worst <= 1.05 && a.snapshots.len() == b.snapshots.len(),
        format!(
            "max ||z||²/(||z0||² e^(2t)) = {worst:.4} (<= 1.05) over {} times",
            a.snapshots.len()
        ),
    )
}

fn cauchy_convergence() -> Result<Outcome> {
    let cfg = base_config("efk_kink")?;
    let rows = cauchy_ladder(&cfg.problem, &cfg.resolved_scheme(), &[4, 8, 16, 32])?;
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let strictly = d.windows(2).all(|w| w[1] < w[0]);
    let last_small = d[d.len() - 1] < d[0] / 10.0;
    outcome(
        strictly && last_small,
        format!(
            "d = {:?}; strictly decreasing {strictly}, d_last < d_first/10 {last_small}",
            d.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn spectral_vs_fd() -> Result<Outcome> {
    let mut cfg = base_config("fk_front")?;
    cfg.problem.final_time = 1.0;
    cfg.discretization.n = 32;
    let tau = cfg.discretization.scheme.tau;
    let (g, traj) = run_cfg(&cfg, 1)?;
    let fd = fd_oracle(&cfg.problem, 400, tau)?;
    let (t_fd, u_fd) = fd.at(1.0);
    let last = traj.final_state();
    let u = field(&g, &cfg.problem, &last.c, &fd.x)?;
    let worst = u
        .iter()
        .zip(u_fd)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-2 && (t_fd - 1.0).abs() < 1e-12 && (last.t - 1.0).abs() < 1e-12,
        format!("max nodal |spectral - FD| at t = 1: {worst:.3e} (< 1e-2)"),
    )
}

fn stored_profiles(name: &str) -> Result<Profiles> {
    let cfg = base_config(name)?;
    let (g, traj) = run_cfg(&cfg, cfg.resolved_scheme().store_every)?;
    let grid = uniform_grid(cfg.problem.length, 401);
    let profiles = traj
        .snapshots
        .iter()
        .map(|s| Ok((s.t, field(&g, &cfg.problem, &s.c, &grid)?)))
        .collect::<Result<_>>()?;
    Ok(profiles)
}

fn front_and_kink() -> Result<Outcome> {
    let fk = stored_profiles("fk_front")?;
    let (t, u) = fk.last().unwrap();
    let o = overshoot_metric(u, 0.0, 1.0);
    let ends = (u[0] - 1.0).abs() < 1e-3 && u[u.len() - 1].abs() < 1e-3;
    let front_ok = o.amplitude < 1e-3 && ends;

    let efk = stored_profiles("efk_kink")?;
    let metrics: Vec<(f64, Overshoot)> = efk
        .iter()
        .filter(|(t, _)| *t > 0.0)
        .map(|(t, u)| (*t, overshoot_metric(u, 0.0, 1.0)))
        .collect();
    let kink = metrics
        .iter()
        .find(|(_, o)| o.amplitude > 1e-2 && o.sign_changes >= 2);
    let (tf, of) = metrics.last().unwrap();
    let best = metrics.iter().map(|(_, o)| o.amplitude).fold(0.0, f64::max);
    outcome(
        front_ok && kink.is_some(),
        format!(
            "fk_front t = {t}: overshoot {:.3e} (< 1e-3), u(0) = {:.6}, u(L) = {:.2e}; efk_kink: final t = {tf} overshoot {:.3e}, sign changes {}, max overshoot over snapshots {best:.3e} (needs > 1e-2 with >= 2 sign changes)",
            o.amplitude,
            u[0],
            u[u.len() - 1],
            of.amplitude,
            of.sign_changes
        ),
    )
}

fn gamma_ordering() -> Result<Outcome> {
    let mut amps = Vec::new();
    for gamma in [0.1, 0.01, 0.001] {
        let mut cfg = base_config("efk_kink")?;
        cfg.problem.gamma = gamma;
        assert_eq!(cfg.problem.final_time, 0.5);
        let (g, traj) = run_cfg(&cfg, cfg.resolved_scheme().store_every)?;
        let last = traj.final_state();
        let grid = uniform_grid(cfg.problem.length, 401);
        let u = field(&g, &cfg.problem, &last.c, &grid)?;
        amps.push((gamma, last.t, overshoot_metric(&u, 0.0, 1.0)));
    }
    let strictly = amps.windows(2).all(|w| w[1].2.amplitude < w[0].2.amplitude);
    outcome(
        strictly,
        format!(
            "overshoot at t = 0.5: {} (strictly decreasing required)",
            amps.iter()
                .map(|(g, _, o)| format!("gamma {g}: {:.3e}", o.amplitude))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn same_bytes(a: &Path, b: &Path, mismatched: &mut Vec<String>, count: &mut usize) {
    let mut entries: Vec<_> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in entries {
        let q = b.join(p.file_name().unwrap());
        if p.is_dir() {
            same_bytes(&p, &q, mismatched, count);
        } else if p.extension().is_some_and(|e| e == "csv") {
            *count += 1;
            if fs::read(&p).ok() != fs::read(&q).ok() {
                mismatched.push(p.display().to_string());
            }
        }
    }
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut mismatched = Vec::new();
    let mut count = 0;
    for name in ["fk_front", "efk_kink", "gronwall", "converge"] {
        let a = dir.path().join(format!("{name}_a"));
        let b = dir.path().join(format!("{name}_b"));
        run_scenario(name, &Overrides::default(), &a, false)?;
        run_scenario(name, &Overrides::default(), &b, false)?;
        same_bytes(&a, &b, &mut mismatched, &mut count);
    }
    outcome(
        mismatched.is_empty() && count > 0,
        format!(
            "{count} CSV files compared, {} differ {:?}",
            mismatched.len(),
            mismatched
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("eigenbasis correctness", eigenbasis_correctness),
        ("heat oracle", heat_oracle),
        ("manufactured solution orders", manufactured_solution),
        ("smooth-data energy law", smooth_energy_law),
        ("rough-data estimate", rough_data_estimate),
        ("Gronwall separation bound", gronwall_bound),
        ("Galerkin Cauchy convergence", cauchy_convergence),
        ("spectral vs finite differences", spectral_vs_fd),
        ("monotone front and oscillatory kink", front_and_kink),
        ("overshoot ordering across gamma", gamma_ordering),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        match check() {
            Ok(o) => {
                println!(
                    "criterion {id:>2} {:<4} {name}: {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.detail
                );
                if !o.pass {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL {name}: error: {e}");
                failed.push(id);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
