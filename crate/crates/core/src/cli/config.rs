use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::eigenbasis::Order;
use crate::error::{Result, SolverError};
use crate::integrator::{Discretization, SchemeKind, SchemeSpec};
use crate::operators::{Forcing, ProblemSpec, Reaction};
use crate::quadrature::Profile;

use super::scenarios;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    /// Snapshot stride in steps; `None` picks about ten snapshots per run.
    pub snapshot_every: Option<usize>,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub discretization: Discretization,
    pub output: OutputOptions,
    pub scenario: Option<String>,
}

impl RunConfig {
    pub fn new(problem: ProblemSpec, discretization: Discretization) -> Self {
        RunConfig {
            problem,
            discretization,
            output: OutputOptions::default(),
            scenario: None,
        }
    }

    /// Scheme with the snapshot stride resolved against `T`.
    pub fn resolved_scheme(&self) -> SchemeSpec {
        let mut scheme = self.discretization.scheme;
        scheme.store_every = self.output.snapshot_every.unwrap_or_else(|| {
            let steps = (self.problem.final_time / scheme.tau).ceil().max(1.0) as usize;
            steps.div_ceil(10).max(1)
        });
        scheme
    }
}

const PROBLEM_KEYS: &[&str] = &[
    "m", "gamma", "beta", "L", "T", "u0", "bc_left", "bc_right", "forcing", "reaction",
];
const DISCRETIZATION_KEYS: &[&str] = &["n", "scheme", "tau", "panels", "gauss_points"];
const OUTPUT_KEYS: &[&str] = &["dir", "snapshot_every", "svg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Top,
    Problem,
    Discretization,
    Output,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Top => "top level",
            Section::Problem => "problem",
            Section::Discretization => "discretization",
            Section::Output => "output",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Top => &["scenario"],
            Section::Problem => PROBLEM_KEYS,
            Section::Discretization => DISCRETIZATION_KEYS,
            Section::Output => OUTPUT_KEYS,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> SolverError {
    SolverError::Parse {
        line,
        msg: msg.into(),
    }
}

struct Entries {
    map: BTreeMap<(Section, &'static str), (usize, String)>,
    last_line: usize,
}

impl Entries {
    fn take(&mut self, section: Section, key: &'static str) -> Option<(usize, String)> {
        self.map.remove(&(section, key))
    }

    fn required(&mut self, section: Section, key: &'static str) -> Result<(usize, String)> {
        self.take(section, key).ok_or_else(|| {
            parse_err(
                self.last_line,
                format!("missing required key `{key}` in [{}]", section.name()),
            )
        })
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    let mut section = Section::Top;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, "unterminated section header"))?
                .trim();
            section = match name {
                "problem" => Section::Problem,
                "discretization" => Section::Discretization,
                "output" => Section::Output,
                other => return Err(parse_err(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let known =
            section.keys().iter().find(|k| **k == key).ok_or_else(|| {
                parse_err(line, format!("unknown key `{key}` in {}", section.name()))
            })?;
        if value.is_empty() {
            return Err(parse_err(line, format!("key `{key}` has no value")));
        }
        if map
            .insert((section, *known), (line, value.to_string()))
            .is_some()
        {
            return Err(parse_err(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(Entries { map, last_line })
}

fn number(line: usize, key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(
            line,
            format!("`{key}` expects a finite number, got `{value}`"),
        )),
    }
}

fn count(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| {
        parse_err(
            line,
            format!("`{key}` expects a non-negative integer, got `{value}`"),
        )
    })
}

/// Parses a profile such as `gaussian 0 1`, `poly_bump`, `indicator 0.25 0.75`,
/// `sine_mode 3`, `coefficients 1 0.5` or `table 0 0 0.5 1 1 0`.
pub fn parse_profile(text: &str) -> std::result::Result<Profile, String> {
    let mut tokens = text.split_whitespace();
    let kind = tokens.next().ok_or("empty profile")?;
    let args: Vec<&str> = tokens.collect();
    let nums = || -> std::result::Result<Vec<f64>, String> {
        args.iter()
            .map(|a| match a.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("malformed number `{a}` in profile")),
            })
            .collect()
    };
    let arity = |want: usize| -> std::result::Result<Vec<f64>, String> {
        let v = nums()?;
        if v.len() != want {
            return Err(format!(
                "`{kind}` takes {want} argument(s), got {}",
                v.len()
            ));
        }
        Ok(v)
    };
    match kind {
        "gaussian" => {
            let v = arity(2)?;
            Ok(Profile::Gaussian { center: v[0], width: v[1] })
        }
        "poly_bump" => arity(0).map(|_| Profile::PolyBump),
        "indicator" => {
            let v = arity(2)?;
            Ok(Profile::Indicator { a: v[0], b: v[1] })
        }
        "sine_mode" => {
            if args.len() != 1 {
                return Err(format!("`sine_mode` takes 1 argument(s), got {}", args.len()));
            }
            args[0]
                .parse::<usize>()
                .map(Profile::SineMode)
                .map_err(|_| format!("sine mode index must be a positive integer, got `{}`", args[0]))
        }
        "coefficients" => {
            let v = nums()?;
            if v.is_empty() {
                return Err("`coefficients` needs at least one value".into());
            }
            Ok(Profile::Coefficients(v))
        }
        "table" => {
            let v = nums()?;
            if v.len() < 4 || v.len() % 2 != 0 {
                return Err("`table` needs at least two `x u` pairs".into());
            }
            Ok(Profile::Table(v.chunks(2).map(|p| (p[0], p[1])).collect()))
        }
        other => Err(format!(
            "unknown profile `{other}` (expected gaussian, poly_bump, indicator, sine_mode, coefficients or table)"
        )),
    }
}

/// `zero` or `manufactured <rate> <profile>`.
pub fn parse_forcing(text: &str) -> std::result::Result<Forcing, String> {
    let trimmed = text.trim();
    if trimmed == "zero" {
        return Ok(Forcing::Zero);
    }
    let rest = trimmed.strip_prefix("manufactured").ok_or_else(|| {
        format!("unknown forcing `{trimmed}` (expected zero or manufactured <rate> <profile>)")
    })?;
    let mut parts = rest.trim_start().splitn(2, char::is_whitespace);
    let rate = parts
        .next()
        .filter(|s| !s.is_empty())
        .ok_or("manufactured forcing needs a decay rate")?;
    let rate: f64 = rate
        .parse()
        .ok()
        .filter(|r: &f64| r.is_finite())
        .ok_or_else(|| format!("malformed decay rate `{rate}`"))?;
    let reference = parse_profile(parts.next().unwrap_or(""))?;
    Ok(Forcing::Manufactured { reference, rate })
}

/// Parses the line-based `key = value` configuration format.
///
/// A top-level `scenario = name` loads that scenario's setup; only
/// `[output]` keys may accompany it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut e = tokenize(text)?;

    let mut config = if let Some((line, name)) = e.take(Section::Top, "scenario") {
        if let Some(((section, key), (l, _))) = e
            .map
            .iter()
            .find(|((s, _), _)| matches!(s, Section::Problem | Section::Discretization))
        {
            return Err(parse_err(
                *l,
                format!(
                    "`{key}` in [{}] conflicts with `scenario = {name}`; scenarios fix their own setup",
                    section.name()
                ),
            ));
        }
        let mut c =
            scenarios::base_config(&name).map_err(|err| parse_err(line, err.to_string()))?;
        c.scenario = Some(name);
        c
    } else {
        let gamma = match e.take(Section::Problem, "gamma") {
            Some((line, v)) => {
                let g = number(line, "gamma", &v)?;
                if g < 0.0 {
                    return Err(parse_err(line, format!("`gamma` must be >= 0, got {v}")));
                }
                Some(g)
            }
            None => None,
        };
        let (line, m) = e.required(Section::Problem, "m")?;
        let order = match m.as_str() {
            "1" => Order::Laplacian,
            "2" => Order::Biharmonic,
            other => {
                return Err(parse_err(
                    line,
                    format!("`m` must be 1 or 2, got `{other}`"),
                ))
            }
        };
        let (line, v) = e.required(Section::Problem, "L")?;
        let length = number(line, "L", &v)?;
        if length <= 0.0 {
            return Err(parse_err(line, "`L` must be positive"));
        }
        let (line, v) = e.required(Section::Problem, "T")?;
        let final_time = number(line, "T", &v)?;
        if final_time < 0.0 {
            return Err(parse_err(line, "`T` must be non-negative"));
        }
        let (line, v) = e.required(Section::Problem, "u0")?;
        let u0 = parse_profile(&v).map_err(|msg| parse_err(line, msg))?;
        let mut problem = ProblemSpec::new(order, length, final_time, u0);

        if let Some(g) = gamma {
            problem.gamma = g;
        }
        if let Some((line, v)) = e.take(Section::Problem, "beta") {
            problem.beta = number(line, "beta", &v)?;
            if problem.beta != 0.0 && problem.beta != 1.0 {
                return Err(parse_err(line, format!("`beta` must be 0 or 1, got {v}")));
            }
        }
        for (key, slot) in [
            ("bc_left", &mut problem.bc_left),
            ("bc_right", &mut problem.bc_right),
        ] {
            if let Some((line, v)) = e.take(Section::Problem, key) {
                *slot = number(line, key, &v)?;
            }
        }
        if let Some((line, v)) = e.take(Section::Problem, "forcing") {
            problem.forcing = parse_forcing(&v).map_err(|msg| parse_err(line, msg))?;
        }
        if let Some((line, v)) = e.take(Section::Problem, "reaction") {
            problem.reaction = match v.as_str() {
                "cubic" => Reaction::Cubic,
                "off" => Reaction::Off,
                other => {
                    return Err(parse_err(
                        line,
                        format!("`reaction` must be cubic or off, got `{other}`"),
                    ))
                }
            };
        }

        let (line, v) = e.required(Section::Discretization, "n")?;
        let n = count(line, "n", &v)?;
        if n == 0 {
            return Err(parse_err(line, "`n` must be at least 1"));
        }
        let (line, v) = e.required(Section::Discretization, "tau")?;
        let tau = number(line, "tau", &v)?;
        if tau <= 0.0 {
            return Err(parse_err(line, "`tau` must be positive"));
        }
        let kind = match e.take(Section::Discretization, "scheme") {
            Some((line, v)) => v
                .parse::<SchemeKind>()
                .map_err(|err| parse_err(line, err.to_string()))?,
            None => SchemeKind::ImexEuler,
        };
        let mut disc = Discretization::new(n, SchemeSpec::new(kind, tau));
        if let Some((line, v)) = e.take(Section::Discretization, "panels") {
            disc.panels = Some(count(line, "panels", &v)?);
        }
        if let Some((line, v)) = e.take(Section::Discretization, "gauss_points") {
            disc.gauss_points = Some(count(line, "gauss_points", &v)?);
        }
        RunConfig::new(problem, disc)
    };

    if let Some((_, v)) = e.take(Section::Output, "dir") {
        config.output.dir = Some(PathBuf::from(v));
    }
    if let Some((line, v)) = e.take(Section::Output, "snapshot_every") {
        let every = count(line, "snapshot_every", &v)?;
        if every == 0 {
            return Err(parse_err(line, "`snapshot_every` must be at least 1"));
        }
        config.output.snapshot_every = Some(every);
    }
    if let Some((line, v)) = e.take(Section::Output, "svg") {
        config.output.svg = match v.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(parse_err(
                    line,
                    format!("`svg` must be true or false, got `{other}`"),
                ))
            }
        };
    }
    debug_assert!(e.map.is_empty());
    config.problem.validate()?;
    config
        .discretization
        .scheme
        .validate(config.problem.final_time)?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FK: &str = "\
# front
[problem]
m = 1
L = 20
T = 10
u0 = gaussian 0 1
bc_left = 1
bc_right = 0

[discretization]
n = 64
tau = 0.01
";

    #[test]
    fn minimal_fk() {
        let c = parse_config(FK).unwrap();
        assert_eq!(c.problem.order, Order::Laplacian);
        assert_eq!(c.problem.length, 20.0);
        assert_eq!(c.problem.bc_left, 1.0);
        assert_eq!(
            c.problem.u0,
            Profile::Gaussian {
                center: 0.0,
                width: 1.0
            }
        );
        assert_eq!(c.discretization.n, 64);
        assert_eq!(c.discretization.scheme.kind, SchemeKind::ImexEuler);
        assert_eq!(c.resolved_scheme().store_every, 100);
        assert!(c.scenario.is_none());
    }

    #[test]
    fn negative_gamma_reports_line() {
        let text = "[problem]\nm = 2\ngamma = -1\n";
        match parse_config(text) {
            Err(SolverError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_and_section() {
        assert!(matches!(
            parse_config("[problem]\ngama = 1\n"),
            Err(SolverError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("[solver]\n"),
            Err(SolverError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("m = 1\n"),
            Err(SolverError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_and_malformed() {
        let no_tau = FK.replace("tau = 0.01\n", "");
        let err = parse_config(&no_tau).unwrap_err();
        assert!(err.to_string().contains("tau"), "{err}");
        let bad = FK.replace("L = 20", "L = twenty");
        assert!(matches!(
            parse_config(&bad),
            Err(SolverError::Parse { line: 4, .. })
        ));
        let dup = format!("{FK}n = 8\n");
        assert!(matches!(parse_config(&dup), Err(SolverError::Parse { .. })));
    }

    #[test]
    fn scenario_alone() {
        let c = parse_config("scenario = efk_kink\n").unwrap();
        assert_eq!(c.scenario.as_deref(), Some("efk_kink"));
        assert_eq!(c.problem.order, Order::Biharmonic);
        assert_eq!(c.problem.gamma, 1.0);
        assert_eq!(c.problem.beta, 1.0);
        assert_eq!(c.problem.length, 1.0);
        assert_eq!(c.problem.u0, Profile::PolyBump);
    }

    #[test]
    fn scenario_with_output_only() {
        let c = parse_config("scenario = fk_front\n[output]\nsvg = true\ndir = out/x\n").unwrap();
        assert!(c.output.svg);
        assert_eq!(c.output.dir, Some(PathBuf::from("out/x")));
        assert!(matches!(
            parse_config("scenario = fk_front\n[problem]\nL = 3\n"),
            Err(SolverError::Parse { line: 3, .. })
        ));
        let err = parse_config("scenario = nope\n").unwrap_err();
        assert!(err.to_string().contains("fk_front"), "{err}");
    }

    #[test]
    fn profiles_and_forcing() {
        assert_eq!(
            parse_profile("indicator 0.25 0.75"),
            Ok(Profile::Indicator { a: 0.25, b: 0.75 })
        );
        assert_eq!(parse_profile("sine_mode 3"), Ok(Profile::SineMode(3)));
        assert_eq!(
            parse_profile("coefficients 1 -2"),
            Ok(Profile::Coefficients(vec![1.0, -2.0]))
        );
        assert_eq!(
            parse_profile("table 0 0 1 1"),
            Ok(Profile::Table(vec![(0.0, 0.0), (1.0, 1.0)]))
        );
        assert!(parse_profile("poly_bump 2").is_err());
        assert!(parse_profile("gaussian 0 nan").is_err());
        assert_eq!(parse_forcing("zero"), Ok(Forcing::Zero));
        assert_eq!(
            parse_forcing("manufactured 1.5 sine_mode 2"),
            Ok(Forcing::Manufactured {
                reference: Profile::SineMode(2),
                rate: 1.5
            })
        );
        assert!(parse_forcing("manufactured sine_mode 2").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!(
            "# header\n\n{}\n[output] # trailing\nsnapshot_every = 7 # stride\n",
            FK
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.output.snapshot_every, Some(7));
    }
}
