//! Run configuration files.
//!
//! The format is line based. `[run]` starts a new section; inside a section
//! every non-blank line is `key = value`, `#` starts a comment. A value may
//! be a comma-separated list, in which case the section expands to the
//! Cartesian product of all listed values (the first key varies slowest).
//! Commas inside parentheses belong to the value, so
//! `noise = none, thresholded_additive(1.0, 3.5)` is a list of two models.
//! Keys that appear before the first `[run]` header form a section of
//! their own.

use crate::benchmarks::NoiseModel;
use crate::control::{param_count, DEFAULT_LAYERS};
use crate::error::{Error, Result};
use crate::restarts::InitConfig;
use crate::strategy::{default_lambda, Variant};
use crate::uncertainty::UncertaintyState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Sphere,
    Ellipsoid { k: f64 },
    Rosenbrock,
    PointMass,
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::Sphere => write!(f, "sphere"),
            Problem::Ellipsoid { k } => write!(f, "ellipsoid({k})"),
            Problem::Rosenbrock => write!(f, "rosenbrock"),
            Problem::PointMass => write!(f, "pointmass"),
        }
    }
}

/// One cell of the experiment matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub algorithm: Variant,
    pub uh: bool,
    pub problem: Problem,
    pub d: usize,
    pub noise: NoiseModel,
    pub budget: u64,
    pub runs: u32,
    pub seed: u64,
    pub sigma0: f64,
    pub init_box: (f64, f64),
    pub log_every: u64,
    pub restarts: bool,
    /// Population size override; default `4 + floor(3 ln d)`.
    pub lambda: Option<usize>,
    pub target: Option<f64>,
    /// Uncertainty-handling parameters (`n_eval` is the starting value).
    pub uh_params: UncertaintyState,
    /// Controller layer sizes for the point-mass problem.
    pub layers: Vec<usize>,
}

impl RunSpec {
    /// A spec with every optional field at its default.
    pub fn new(algorithm: Variant, problem: Problem, d: usize) -> Self {
        let pointmass = problem == Problem::PointMass;
        Self {
            algorithm,
            uh: false,
            problem,
            d,
            noise: NoiseModel::None,
            budget: 1_000_000,
            runs: 5,
            seed: 1,
            sigma0: if pointmass { 0.1 } else { 1.0 },
            init_box: if pointmass { (0.0, 0.0) } else { (-1.0, 1.0) },
            log_every: 10,
            restarts: false,
            lambda: None,
            target: None,
            uh_params: UncertaintyState::default(),
            layers: DEFAULT_LAYERS.to_vec(),
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda.unwrap_or_else(|| default_lambda(self.d))
    }

    pub fn init(&self) -> InitConfig {
        InitConfig {
            lo: self.init_box.0,
            hi: self.init_box.1,
            sigma0: self.sigma0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        if self.d == 0 {
            return bad("dimension must be positive".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        if self.budget < self.lambda() as u64 {
            return bad(format!(
                "budget {} is smaller than lambda {}",
                self.budget,
                self.lambda()
            ));
        }
        if self.problem == Problem::Rosenbrock && self.d < 2 {
            return bad("rosenbrock needs d >= 2".into());
        }
        if let Problem::Ellipsoid { k } = self.problem {
            if !(k >= 1.0) {
                return bad(format!("condition number must be >= 1, got {k}"));
            }
        }
        if self.problem == Problem::PointMass {
            let n = param_count(&self.layers)?;
            if n != self.d {
                return bad(format!(
                    "pointmass controller {:?} has {n} parameters, but d = {}",
                    self.layers, self.d
                ));
            }
        }
        self.noise.validate()?;
        self.init().validate()?;
        self.uh_params.validate()?;
        Ok(())
    }

    /// Short identifier used for output file names.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{}{}_{}_d{}_{}",
            self.algorithm.name(),
            if self.uh { "-uh" } else { "" },
            self.problem,
            self.d,
            self.noise
        );
        s.retain(|c| !c.is_whitespace());
        let mut out = String::with_capacity(s.len());
        for c in s.chars() {
            let c = if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            };
            if !(c == '_' && out.ends_with('_')) {
                out.push(c);
            }
        }
        out.trim_end_matches('_').to_string()
    }
}

const KEYS: &[&str] = &[
    "algorithm",
    "uh",
    "problem",
    "d",
    "noise",
    "budget",
    "runs",
    "seed",
    "sigma0",
    "init_box",
    "log_every",
    "restarts",
    "lambda",
    "target",
    "uh_theta",
    "uh_alpha",
    "uh_reev",
    "uh_nmax",
    "layers",
];

struct Entry {
    key: String,
    values: Vec<String>,
    line: usize,
}

struct Section {
    line: usize,
    entries: Vec<Entry>,
}

pub fn parse_config(text: &str) -> Result<Vec<RunSpec>> {
    let mut sections: Vec<Section> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[run]" {
                return Err(perr(line_no, format!("unknown section {line}")));
            }
            sections.push(Section {
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(perr(
                line_no,
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(perr(line_no, format!("unknown key {key:?}")));
        }
        let values = split_top_level(value.trim()).map_err(|m| perr(line_no, m))?;
        if values.iter().any(|v| v.is_empty()) {
            return Err(perr(line_no, format!("empty value for key {key}")));
        }
        if sections.is_empty() {
            sections.push(Section {
                line: line_no,
                entries: Vec::new(),
            });
        }
        let section = sections.last_mut().unwrap();
        if section.entries.iter().any(|e| e.key == key) {
            return Err(perr(line_no, format!("duplicate key {key}")));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            values,
            line: line_no,
        });
    }

    let mut specs = Vec::new();
    for section in &sections {
        specs.extend(expand(section)?);
    }
    if specs.is_empty() {
        return Err(perr(
            last_line.max(1),
            "configuration defines no runs".into(),
        ));
    }
    Ok(specs)
}

fn perr(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn split_top_level(s: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced parentheses".into());
                }
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    out.push(cur.trim().to_string());
    Ok(out)
}

fn expand(section: &Section) -> Result<Vec<RunSpec>> {
    for required in ["algorithm", "problem", "d"] {
        if !section.entries.iter().any(|e| e.key == required) {
            return Err(perr(section.line, format!("required key {required}")));
        }
    }
    // problem decides several defaults, so apply it first
    let mut order: Vec<&Entry> = section.entries.iter().collect();
    order.sort_by_key(|e| e.key != "problem");

    let total: usize = section.entries.iter().map(|e| e.values.len()).product();
    let mut specs = Vec::with_capacity(total);
    for combo in 0..total {
        // index of each entry's value, first key in the file varying slowest
        let mut rem = combo;
        let mut choice = vec![0; section.entries.len()];
        for (i, e) in section.entries.iter().enumerate().rev() {
            choice[i] = rem % e.values.len();
            rem /= e.values.len();
        }
        let mut spec = RunSpec::new(Variant::Simple, Problem::Sphere, 1);
        for e in &order {
            let i = section
                .entries
                .iter()
                .position(|x| std::ptr::eq(x, *e))
                .unwrap();
            apply(&mut spec, &e.key, &e.values[choice[i]]).map_err(|m| perr(e.line, m))?;
        }
        spec.validate()
            .map_err(|err| perr(section.line, err.to_string()))?;
        specs.push(spec);
    }
    Ok(specs)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse()
        .map_err(|_| format!("malformed value {v:?} for key {key}"))
}

fn boolean(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("malformed boolean {v:?} for key {key}")),
    }
}

fn apply(spec: &mut RunSpec, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "algorithm" => spec.algorithm = v.parse()?,
        "uh" => spec.uh = boolean(key, v)?,
        "problem" => {
            spec.problem = parse_problem(v)?;
            let fresh = RunSpec::new(spec.algorithm, spec.problem, spec.d);
            spec.sigma0 = fresh.sigma0;
            spec.init_box = fresh.init_box;
        }
        "d" => spec.d = num(key, v)?,
        "noise" => spec.noise = parse_noise(v)?,
        "budget" => spec.budget = parse_count(key, v)?,
        "runs" => spec.runs = num(key, v)?,
        "seed" => spec.seed = num(key, v)?,
        "sigma0" => spec.sigma0 = num(key, v)?,
        "init_box" => {
            let (lo, hi) = v
                .split_once(':')
                .ok_or_else(|| format!("init_box must be lo:hi, got {v:?}"))?;
            spec.init_box = (num(key, lo.trim())?, num(key, hi.trim())?);
        }
        "log_every" => spec.log_every = num(key, v)?,
        "restarts" => spec.restarts = boolean(key, v)?,
        "lambda" => spec.lambda = Some(num(key, v)?),
        "target" => spec.target = Some(num(key, v)?),
        "uh_theta" => spec.uh_params.theta = num(key, v)?,
        "uh_alpha" => spec.uh_params.alpha = num(key, v)?,
        "uh_reev" => spec.uh_params.reev_fraction = num(key, v)?,
        "uh_nmax" => spec.uh_params.n_max = num(key, v)?,
        "layers" => {
            spec.layers = v
                .split('-')
                .map(|s| num(key, s.trim()))
                .collect::<std::result::Result<_, _>>()?;
        }
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

/// Accepts plain integers and float notation such as `1e6`.
fn parse_count(key: &str, v: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = num(key, v)?;
    if f >= 0.0 && f.fract() == 0.0 && f < u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("malformed count {v:?} for key {key}"))
    }
}

fn call<'a>(v: &'a str, name: &str) -> Option<&'a str> {
    v.strip_prefix(name)?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn args(key: &str, inner: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("{key} takes {n} argument(s)"));
    }
    parts.iter().map(|p| num(key, p)).collect()
}

pub fn parse_problem(v: &str) -> std::result::Result<Problem, String> {
    match v {
        "sphere" => return Ok(Problem::Sphere),
        "rosenbrock" => return Ok(Problem::Rosenbrock),
        "pointmass" => return Ok(Problem::PointMass),
        _ => {}
    }
    if let Some(inner) = call(v, "ellipsoid") {
        let k = args("ellipsoid", inner, 1)?[0];
        return Ok(Problem::Ellipsoid { k });
    }
    Err(format!("unknown problem {v:?}"))
}

pub fn parse_noise(v: &str) -> std::result::Result<NoiseModel, String> {
    if v == "none" {
        return Ok(NoiseModel::None);
    }
    if let Some(inner) = call(v, "multiplicative") {
        return Ok(NoiseModel::Multiplicative {
            c: args("multiplicative", inner, 1)?[0],
        });
    }
    if let Some(inner) = call(v, "thresholded_additive") {
        let a = args("thresholded_additive", inner, 2)?;
        return Ok(NoiseModel::ThresholdedAdditive {
            epsilon: a[0],
            threshold: a[1],
        });
    }
    if let Some(inner) = call(v, "additive") {
        return Ok(NoiseModel::Additive {
            epsilon: args("additive", inner, 1)?[0],
        });
    }
    Err(format!("unknown noise model {v:?}"))
}
