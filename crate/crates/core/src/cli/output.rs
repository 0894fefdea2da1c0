use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::AuditRecord;
use crate::error::{Result, SolverError};
use crate::integrator::{Galerkin, Trajectory};
use crate::quadrature::reconstruct;

/// Points of the uniform grid that snapshots are sampled on.
pub const SNAPSHOT_POINTS: usize = 201;

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 500.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// 6 significant digits, plain notation where it stays short.
pub fn fmt_short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn io_err(path: &Path, source: std::io::Error) -> SolverError {
    SolverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| length * i as f64 / (points - 1) as f64)
        .collect()
}

/// `u_n + g` on `grid` for every stored snapshot, as `(t, values)`.
pub fn sample_snapshots(
    galerkin: &Galerkin,
    traj: &Trajectory,
    grid: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>> {
    let lifting = traj.meta.problem.lifting();
    traj.snapshots
        .iter()
        .map(|s| {
            let mut u = reconstruct(&galerkin.basis, s.c.as_slice(), grid, 0)?;
            if let Some(g) = lifting {
                for (v, &x) in u.iter_mut().zip(grid) {
                    *v += g.value(x);
                }
            }
            Ok((s.t, u))
        })
        .collect()
}

/// `t,x,u` in long format.
pub fn write_snapshots_csv(path: &Path, grid: &[f64], samples: &[(f64, Vec<f64>)]) -> Result<()> {
    let mut out = String::from("t,x,u\n");
    for (t, u) in samples {
        for (x, v) in grid.iter().zip(u) {
            let _ = writeln!(out, "{},{},{}", fmt_num(*t), fmt_num(*x), fmt_num(*v));
        }
    }
    write_file(path, &out)
}

pub fn write_timeseries_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,l2,vnorm_sq,l4_4,potential,energy,dissipation_cum\n");
    for r in &traj.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r.t),
            fmt_num(r.l2),
            fmt_num(r.vnorm_sq),
            fmt_num(r.l4_4),
            fmt_num(r.potential),
            fmt_num(r.energy),
            fmt_num(r.dissipation_cum)
        );
    }
    write_file(path, &out)
}

pub fn write_audit_csv(path: &Path, audit: &AuditRecord) -> Result<()> {
    let mut out = String::from("check,lhs,rhs,margin,pass\n");
    for c in &audit.checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.check,
            fmt_num(c.lhs),
            fmt_num(c.rhs),
            fmt_num(c.margin),
            c.pass
        );
    }
    write_file(path, &out)
}

/// Small ad-hoc table; cells are written verbatim.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// One polyline per snapshot on fixed 800x500 axes with a legend of times.
pub fn render_svg(grid: &[f64], samples: &[(f64, Vec<f64>)]) -> String {
    let (left, right, top, bottom) = (70.0, 150.0, 20.0, 50.0);
    let plot_w = SVG_WIDTH - left - right;
    let plot_h = SVG_HEIGHT - top - bottom;
    let (x_lo, x_hi) = (
        grid.first().copied().unwrap_or(0.0),
        grid.last().copied().unwrap_or(1.0),
    );
    let mut y_lo = samples
        .iter()
        .flat_map(|(_, u)| u.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let mut y_hi = samples
        .iter()
        .flat_map(|(_, u)| u.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    if !y_lo.is_finite() || !y_hi.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if y_hi - y_lo < 1e-12 * y_hi.abs().max(1.0) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| left + (x - x_lo) / x_span * plot_w;
    let py = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for x in ticks(x_lo, x_hi, 6) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            px(x),
            top + plot_h + 18.0,
            fmt_short(x)
        );
    }
    for y in ticks(y_lo, y_hi, 6) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(y) + 4.0,
            fmt_short(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">x</text>"#,
        left + plot_w / 2.0,
        SVG_HEIGHT - 10.0
    );
    for (i, (t, u)) in samples.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = grid
            .iter()
            .zip(u)
            .map(|(&x, &v)| format!("{:.2},{:.2}", px(x), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">t = {}</text>"#,
            lx + 26.0,
            ly + 4.0,
            fmt_short(*t)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, grid: &[f64], samples: &[(f64, Vec<f64>)]) -> Result<()> {
    write_file(path, &render_svg(grid, samples))
}

/// Writes `snapshots.csv`, `timeseries.csv` and optionally `profile.svg` for one run.
pub fn write_run(
    dir: &Path,
    galerkin: &Galerkin,
    traj: &Trajectory,
    svg: bool,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let grid = uniform_grid(traj.meta.problem.length, SNAPSHOT_POINTS);
    let samples = sample_snapshots(galerkin, traj, &grid)?;
    let mut written = vec![dir.join("snapshots.csv"), dir.join("timeseries.csv")];
    write_snapshots_csv(&written[0], &grid, &samples)?;
    write_timeseries_csv(&written[1], traj)?;
    if svg {
        let p = dir.join("profile.svg");
        write_svg(&p, &grid, &samples)?;
        written.push(p);
    }
    Ok(written)
}
