//! Experiment runner comparing the fractional optimum, the integral optimum,
//! relaxation + rounding, and the two greedy baselines.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{brute_force_opt, lfj, lfm, OracleBudget};
use crate::error::{Error, Result};
use crate::harness::gen::{derive_seed, generate, EligibilityKind, GenParams};
use crate::model::{energy, Instance};
use crate::relax::{solve_relaxation, DEFAULT_TOL};
use crate::rounding::fdr;
use crate::uniform::ecsemrpp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Frac,
    Opt,
    Fdr,
    Lfj,
    Lfm,
    Ecsemrpp,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::Frac,
        Algo::Opt,
        Algo::Fdr,
        Algo::Lfj,
        Algo::Lfm,
        Algo::Ecsemrpp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Frac => "frac",
            Algo::Opt => "opt",
            Algo::Fdr => "fdr",
            Algo::Lfj => "lfj",
            Algo::Lfm => "lfm",
            Algo::Ecsemrpp => "ecsemrpp",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Params(format!("unknown algorithm `{s}`")))
    }
}

/// Which parameter varies across cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Deadline multipliers applied to the base `C`.
    Deadline(Vec<f64>),
    /// Task counts at the base `m` (so `eta = n / m`).
    Eta(Vec<usize>),
    /// Random versus inclusive eligibility sets.
    Eligibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub base: GenParams,
    pub sweep: Sweep,
    pub algos: Vec<Algo>,
    pub repeats: usize,
    pub budget: OracleBudget,
    pub tol: f64,
    /// When false every runtime is reported as 0 so output is byte-stable.
    pub timing: bool,
}

impl BenchConfig {
    pub fn new(base: GenParams, sweep: Sweep) -> Self {
        Self {
            base,
            sweep,
            algos: vec![Algo::Frac, Algo::Opt, Algo::Fdr, Algo::Lfj, Algo::Lfm],
            repeats: 10,
            budget: OracleBudget::default(),
            tol: DEFAULT_TOL,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    /// Normalized by the integral optimum.
    Opt,
    /// Oracle unavailable; normalized by the fractional optimum.
    Frac,
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::Opt => "opt",
            Base::Frac => "frac",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub cell: String,
    pub algo: Algo,
    pub repeat: usize,
    pub energy: f64,
    pub ratio: f64,
    pub base: Base,
    pub runtime_ms: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: String,
    pub algo: Algo,
    pub mean_energy: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub mean_runtime_ms: f64,
    /// Repeats in which the oracle was unavailable and the fractional
    /// optimum served as the base.
    pub frac_based: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub const CSV_HEADER: [&str; 7] = ["cell", "algo", "energy", "ratio", "base", "runtime_ms", "seed"];

impl BenchReport {
    pub fn cells(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.cell) {
                out.push(r.cell.clone());
            }
        }
        out
    }

    /// Per (cell, algo) means, in first-appearance order.
    pub fn summaries(&self) -> Vec<CellSummary> {
        let mut out: Vec<CellSummary> = Vec::new();
        for r in &self.rows {
            let idx = match out.iter().position(|s| s.cell == r.cell && s.algo == r.algo) {
                Some(i) => i,
                None => {
                    out.push(CellSummary {
                        cell: r.cell.clone(),
                        algo: r.algo,
                        mean_energy: 0.0,
                        mean_ratio: 0.0,
                        max_ratio: f64::NEG_INFINITY,
                        mean_runtime_ms: 0.0,
                        frac_based: 0,
                        runs: 0,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[idx];
            s.mean_energy += r.energy;
            s.mean_ratio += r.ratio;
            s.max_ratio = s.max_ratio.max(r.ratio);
            s.mean_runtime_ms += r.runtime_ms;
            s.runs += 1;
            if r.base == Base::Frac {
                s.frac_based += 1;
            }
        }
        for s in &mut out {
            let k = s.runs as f64;
            s.mean_energy /= k;
            s.mean_ratio /= k;
            s.mean_runtime_ms /= k;
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_rows(&mut w).map_err(|source| Error::Csv {
            path: "<memory>".into(),
            source,
        })?;
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    fn write_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.cell.clone(),
                r.algo.to_string(),
                r.energy.to_string(),
                r.ratio.to_string(),
                r.base.as_str().to_string(),
                format!("{:.3}", r.runtime_ms),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes one CSV row per (cell, repeat, algo) under [`CSV_HEADER`].
pub fn write_report(r: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    r.write_rows(&mut w).map_err(csv_err)
}

struct Cell {
    label: String,
    params: GenParams,
}

fn cells(cfg: &BenchConfig) -> Vec<Cell> {
    let base = &cfg.base;
    match &cfg.sweep {
        Sweep::Deadline(factors) => factors
            .iter()
            .map(|&k| Cell {
                label: format!("C={}", base.deadline * k),
                params: GenParams {
                    deadline: base.deadline * k,
                    ..base.clone()
                },
            })
            .collect(),
        Sweep::Eta(ns) => ns
            .iter()
            .map(|&n| Cell {
                label: format!("n={n}"),
                params: GenParams { n, ..base.clone() },
            })
            .collect(),
        Sweep::Eligibility => [EligibilityKind::Random, EligibilityKind::Inclusive]
            .into_iter()
            .map(|kind| Cell {
                label: kind.as_str().to_string(),
                params: GenParams {
                    eligibility: kind,
                    ..base.clone()
                },
            })
            .collect(),
    }
}

/// Seed of repeat `r` in a cell. It depends only on what shapes the random
/// draws (sizes, work range, eligibility kind), so cells that differ only in
/// the deadline see identical task sets.
pub fn instance_seed(p: &GenParams, repeat: usize) -> u64 {
    let kind = match p.eligibility {
        EligibilityKind::Random => 0,
        EligibilityKind::Inclusive => 1,
    };
    derive_seed(
        p.seed,
        &[
            p.m as u64,
            p.n as u64,
            p.w_range.0,
            p.w_range.1,
            kind,
            repeat as u64,
        ],
    )
}

fn validate(cfg: &BenchConfig) -> Result<()> {
    cfg.base.validate()?;
    if cfg.algos.is_empty() {
        return Err(Error::Params("no algorithms selected".into()));
    }
    if cfg.repeats == 0 {
        return Err(Error::Params("repeats must be at least 1".into()));
    }
    if cfg.algos.contains(&Algo::Ecsemrpp) && cfg.base.w_range.0 != cfg.base.w_range.1 {
        return Err(Error::Params(
            "ecsemrpp needs uniform works (w_lo == w_hi)".into(),
        ));
    }
    match &cfg.sweep {
        Sweep::Deadline(f) if f.is_empty() || f.iter().any(|&k| !(k > 0.0)) => Err(
            Error::Params("deadline factors must be positive and nonempty".into()),
        ),
        Sweep::Eta(ns) if ns.is_empty() || ns.contains(&0) => {
            Err(Error::Params("task counts must be positive and nonempty".into()))
        }
        _ => Ok(()),
    }
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    let ms = if timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok((out, ms))
}

fn run_algo(inst: &Instance, algo: Algo, cfg: &BenchConfig) -> Result<f64> {
    let integral = |a| energy(inst, &a);
    match algo {
        Algo::Frac => Ok(solve_relaxation(inst, cfg.tol)?.1.objective),
        Algo::Opt => integral(brute_force_opt(inst, cfg.budget)?),
        Algo::Fdr => integral(fdr(inst, cfg.tol)?.assignment),
        Algo::Lfj => integral(lfj(inst)?),
        Algo::Lfm => integral(lfm(inst)?),
        Algo::Ecsemrpp => integral(ecsemrpp(inst)?),
    }
}

/// Runs every selected algorithm on `repeats` seeded instances per cell.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    validate(cfg)?;
    let mut report = BenchReport::default();
    for cell in cells(cfg) {
        for repeat in 0..cfg.repeats {
            let seed = instance_seed(&cell.params, repeat);
            let inst = generate(&GenParams {
                seed,
                ..cell.params.clone()
            })?;
            let mut results: Vec<(Algo, f64, f64)> = Vec::new();
            let mut opt_energy = None;
            for &algo in &cfg.algos {
                match timed(cfg.timing, || run_algo(&inst, algo, cfg)) {
                    Ok((e, ms)) => {
                        if algo == Algo::Opt {
                            opt_energy = Some(e);
                        }
                        results.push((algo, e, ms));
                    }
                    Err(Error::BudgetExceeded { .. }) if algo == Algo::Opt => {}
                    Err(e) => return Err(e),
                }
            }
            let (base, base_energy) = match opt_energy {
                Some(e) => (Base::Opt, e),
                None => {
                    let frac = match results.iter().find(|r| r.0 == Algo::Frac) {
                        Some(r) => r.1,
                        None => run_algo(&inst, Algo::Frac, cfg)?,
                    };
                    (Base::Frac, frac)
                }
            };
            for (algo, e, ms) in results {
                report.rows.push(BenchRow {
                    cell: cell.label.clone(),
                    algo,
                    repeat,
                    energy: e,
                    ratio: e / base_energy,
                    base,
                    runtime_ms: ms,
                    seed,
                });
            }
        }
    }
    Ok(report)
}
