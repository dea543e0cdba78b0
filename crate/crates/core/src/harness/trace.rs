//! Per-generation trace rows, their CSV form, and cross-run aggregation.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str =
    "run_id,restart_index,generation,evals_used,best_fitness,mean_fitness,ref_fitness_at_mean,sigma,n_eval,fitness_std,s_stat";

pub const AGGREGATE_HEADER: &str =
    "evals,runs,best_fitness_geomean,mean_fitness_geomean,ref_fitness_geomean,mean_fitness_mean,log_sigma_mean,n_eval_mean,fitness_std_mean";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub run_id: u32,
    pub restart_index: u32,
    /// Generations completed in the current restart.
    pub generation: u64,
    /// Evaluations used by the run so far, across restarts.
    pub evals_used: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Noise-free value at the current mean, when the objective has one.
    pub ref_fitness_at_mean: Option<f64>,
    pub sigma: f64,
    pub n_eval: u32,
    pub fitness_std: f64,
    /// Rank-change statistic; NaN without uncertainty handling.
    pub s_stat: f64,
}

impl TraceRow {
    /// Equality that treats NaN as equal to NaN.
    pub fn same_as(&self, other: &TraceRow) -> bool {
        fn eq(a: f64, b: f64) -> bool {
            a == b || (a.is_nan() && b.is_nan())
        }
        self.run_id == other.run_id
            && self.restart_index == other.restart_index
            && self.generation == other.generation
            && self.evals_used == other.evals_used
            && eq(self.best_fitness, other.best_fitness)
            && eq(self.mean_fitness, other.mean_fitness)
            && match (self.ref_fitness_at_mean, other.ref_fitness_at_mean) {
                (None, None) => true,
                (Some(a), Some(b)) => eq(a, b),
                _ => false,
            }
            && eq(self.sigma, other.sigma)
            && self.n_eval == other.n_eval
            && eq(self.fitness_std, other.fitness_std)
            && eq(self.s_stat, other.s_stat)
    }
}

/// 17 significant digits, enough to round-trip any double.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(mut out: W, rows: &[TraceRow]) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.restart_index,
            r.generation,
            r.evals_used,
            real(r.best_fitness),
            real(r.mean_fitness),
            r.ref_fitness_at_mean.map(real).unwrap_or_default(),
            real(r.sigma),
            r.n_eval,
            real(r.fitness_std),
            real(r.s_stat),
        )?;
    }
    Ok(())
}

pub fn trace_to_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim_end() != TRACE_HEADER {
                return Err(Error::Csv {
                    line: 1,
                    msg: "unexpected header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_row(&line).map_err(|msg| Error::Csv { line: line_no, msg })?);
    }
    Ok(rows)
}

fn parse_row(line: &str) -> std::result::Result<TraceRow, String> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != 11 {
        return Err(format!("expected 11 fields, got {}", f.len()));
    }
    fn p<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("bad {name}: {s:?}"))
    }
    Ok(TraceRow {
        run_id: p(f[0], "run_id")?,
        restart_index: p(f[1], "restart_index")?,
        generation: p(f[2], "generation")?,
        evals_used: p(f[3], "evals_used")?,
        best_fitness: p(f[4], "best_fitness")?,
        mean_fitness: p(f[5], "mean_fitness")?,
        ref_fitness_at_mean: if f[6].is_empty() {
            None
        } else {
            Some(p(f[6], "ref_fitness_at_mean")?)
        },
        sigma: p(f[7], "sigma")?,
        n_eval: p(f[8], "n_eval")?,
        fitness_std: p(f[9], "fitness_std")?,
        s_stat: p(f[10], "s_stat")?,
    })
}

/// Cross-run summary at one evaluation count.
///
/// Fitness columns are geometric means over the runs whose values are
/// positive at that point (NaN if none are), except `mean_fitness_mean`,
/// the arithmetic mean, which is the useful summary for objectives that
/// can be negative or zero. `log_sigma_mean` is the mean natural log of
/// sigma.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregatePoint {
    pub evals: u64,
    /// Runs whose trace covers `evals`.
    pub runs: usize,
    pub best_fitness_geomean: f64,
    pub mean_fitness_geomean: f64,
    pub ref_fitness_geomean: f64,
    pub mean_fitness_mean: f64,
    pub log_sigma_mean: f64,
    pub n_eval_mean: f64,
    pub fitness_std_mean: f64,
}

const N_SERIES: usize = 6;

fn series(r: &TraceRow) -> [f64; N_SERIES] {
    [
        r.best_fitness,
        r.mean_fitness,
        r.ref_fitness_at_mean.unwrap_or(f64::NAN),
        r.sigma.ln(),
        r.n_eval as f64,
        r.fitness_std,
    ]
}

/// Aggregates runs onto a common evaluation grid.
///
/// Each run's values are linearly interpolated (in evaluations) onto the
/// grid; a run contributes only at grid points inside its own range. The
/// default grid is the sorted union of all logged evaluation counts.
pub fn aggregate_runs(rows: &[TraceRow], grid: Option<&[u64]>) -> Result<Vec<AggregatePoint>> {
    let mut by_run: BTreeMap<u32, Vec<&TraceRow>> = BTreeMap::new();
    for r in rows {
        by_run.entry(r.run_id).or_default().push(r);
    }
    for (id, run) in &by_run {
        if run.windows(2).any(|w| w[1].evals_used <= w[0].evals_used) {
            return Err(Error::Contract(format!(
                "run {id}: evaluation counts are not strictly increasing"
            )));
        }
    }
    let grid: Vec<u64> = match grid {
        Some(g) => g.to_vec(),
        None => {
            let mut g: Vec<u64> = rows.iter().map(|r| r.evals_used).collect();
            g.sort_unstable();
            g.dedup();
            g
        }
    };

    let mut out = Vec::with_capacity(grid.len());
    for &e in &grid {
        let mut samples: Vec<[f64; N_SERIES]> = Vec::new();
        for run in by_run.values() {
            if let Some(v) = interpolate(run, e) {
                samples.push(v);
            }
        }
        if samples.is_empty() {
            continue;
        }
        let col = |k: usize| samples.iter().map(move |s| s[k]);
        out.push(AggregatePoint {
            evals: e,
            runs: samples.len(),
            best_fitness_geomean: geomean(col(0)),
            mean_fitness_geomean: geomean(col(1)),
            ref_fitness_geomean: geomean(col(2)),
            mean_fitness_mean: mean(col(1)),
            log_sigma_mean: mean(col(3)),
            n_eval_mean: mean(col(4)),
            fitness_std_mean: mean(col(5)),
        });
    }
    Ok(out)
}

fn interpolate(run: &[&TraceRow], e: u64) -> Option<[f64; N_SERIES]> {
    let first = run.first()?;
    let last = run.last()?;
    if e < first.evals_used || e > last.evals_used {
        return None;
    }
    let hi = run.partition_point(|r| r.evals_used < e);
    let b = run[hi];
    if b.evals_used == e {
        return Some(series(b));
    }
    let a = run[hi - 1];
    let t = (e - a.evals_used) as f64 / (b.evals_used - a.evals_used) as f64;
    let (sa, sb) = (series(a), series(b));
    let mut v = [0.0; N_SERIES];
    for k in 0..N_SERIES {
        v[k] = sa[k] + t * (sb[k] - sa[k]);
    }
    Some(v)
}

fn geomean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .filter(|x| *x > 0.0 && x.is_finite())
        .fold((0.0, 0usize), |(s, n), x| (s + x.ln(), n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).exp()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn write_aggregate_csv<W: Write>(mut out: W, points: &[AggregatePoint]) -> Result<()> {
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.evals,
            p.runs,
            real(p.best_fitness_geomean),
            real(p.mean_fitness_geomean),
            real(p.ref_fitness_geomean),
            real(p.mean_fitness_mean),
            real(p.log_sigma_mean),
            real(p.n_eval_mean),
            real(p.fitness_std_mean),
        )?;
    }
    Ok(())
}
