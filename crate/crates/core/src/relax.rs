//! Convex relaxation: each task's work may be split across its eligible
//! processors (`0 <= x_ij <= 1`, `sum_i x_ij = 1`).
//!
//! The objective `sum_i L_i^alpha / C^(alpha-1)` is separable in the loads, so
//! the best split of a single task given all the others is a water-filling
//! problem: pour `w_j` onto its eligible processors, always onto the lowest
//! load first. [`solve_relaxation`] cycles over tasks, re-solving each one
//! exactly (block coordinate descent). Each block update can only lower the
//! objective, and the fixed points are exactly the points where every task
//! sits on its least-loaded eligible processors, i.e. the optimum.
//!
//! Convergence is certified by the Frank-Wolfe duality gap
//! `sum_j w_j (sum_i x_ij g_i - min_{i in M_j} g_i)` with `g_i` the marginal
//! cost of processor `i`, which bounds `f(x) - f*` from above when the speed
//! cap is slack.

use crate::error::{Error, Result};
use crate::model::{energy_of_loads, Assignment, Instance};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_MOVES: u64 = 1_000_000;

/// Target for the load-difference certificate, relative to the largest load.
const RESIDUAL_REL: f64 = 1e-10;

/// Fractional task to processor split. Entries exist only for eligible pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    m: usize,
    /// Per task: `(processor, x_ij)` for each eligible processor, ascending.
    rows: Vec<Vec<(usize, f64)>>,
    tol: f64,
}

impl FractionalAssignment {
    /// Builds from per-task entries; processors absent from a row are zero.
    /// Fails if an entry falls outside the task's eligibility set, leaves
    /// `[0, 1]`, or a row does not sum to 1 within `tol`.
    pub fn new(inst: &Instance, rows: Vec<Vec<(usize, f64)>>, tol: f64) -> Result<Self> {
        if rows.len() != inst.n() {
            return Err(Error::Internal(format!(
                "fractional assignment has {} rows, instance has {} tasks",
                rows.len(),
                inst.n()
            )));
        }
        let mut dense = Vec::with_capacity(rows.len());
        for (j, row) in rows.into_iter().enumerate() {
            let task = &inst.tasks[j];
            let mut full: Vec<(usize, f64)> = task.eligible.iter().map(|&i| (i, 0.0)).collect();
            let mut sum = 0.0;
            for (i, x) in row {
                let slot = task.eligible.binary_search(&i).map_err(|_| {
                    Error::Internal(format!("x[{i}][{j}] set outside the eligibility set"))
                })?;
                if !(-tol..=1.0 + tol).contains(&x) {
                    return Err(Error::Internal(format!("x[{i}][{j}] = {x} outside [0, 1]")));
                }
                full[slot].1 = x.clamp(0.0, 1.0);
                sum += x;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::Internal(format!("task {j}: fractions sum to {sum}")));
            }
            dense.push(full);
        }
        Ok(Self {
            m: inst.m,
            rows: dense,
            tol,
        })
    }

    /// The 0/1 split of an integral assignment.
    pub fn from_assignment(inst: &Instance, a: &Assignment) -> Self {
        let rows = inst
            .tasks
            .iter()
            .enumerate()
            .map(|(j, t)| {
                t.eligible
                    .iter()
                    .map(|&i| (i, if a.proc_of(j) == i { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        Self {
            m: inst.m,
            rows,
            tol: 0.0,
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn num_processors(&self) -> usize {
        self.m
    }

    pub fn num_tasks(&self) -> usize {
        self.rows.len()
    }

    /// `x_ij`; zero for ineligible pairs.
    pub fn get(&self, processor: usize, task: usize) -> f64 {
        self.rows[task]
            .iter()
            .find(|(i, _)| *i == processor)
            .map_or(0.0, |(_, x)| *x)
    }

    /// Stored `(processor, x_ij)` entries of one task.
    pub fn row(&self, task: usize) -> &[(usize, f64)] {
        &self.rows[task]
    }

    pub fn loads(&self, inst: &Instance) -> Vec<f64> {
        let mut load = vec![0.0; self.m];
        for (j, row) in self.rows.iter().enumerate() {
            let w = inst.tasks[j].work;
            for &(i, x) in row {
                load[i] += x * w;
            }
        }
        load
    }

    pub fn objective(&self, inst: &Instance) -> f64 {
        energy_of_loads(&self.loads(inst), inst.deadline, inst.alpha)
    }

    /// True when every task sits entirely on one processor (within `eps`).
    pub fn is_integral(&self, eps: f64) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().all(|&(_, x)| x <= eps || x >= 1.0 - eps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxReport {
    pub objective: f64,
    /// Single-task block updates performed.
    pub iterations: u64,
    pub sweeps: u64,
    pub max_stationarity_residual: f64,
    /// Duality gap divided by the objective at the last sweep.
    pub relative_gap: f64,
    /// Objective after every sweep, starting with the initial point.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    pub tol: f64,
    pub max_moves: u64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_moves: DEFAULT_MAX_MOVES,
        }
    }
}

/// Average-split loads `L_i = sum_{j: i in M_j} w_j / |M_j|`.
pub fn uniform_split_loads(inst: &Instance) -> Vec<f64> {
    let mut load = vec![0.0; inst.m];
    for t in &inst.tasks {
        let share = t.work / t.eligible.len() as f64;
        for &i in &t.eligible {
            load[i] += share;
        }
    }
    load
}

pub fn solve_relaxation(inst: &Instance, tol: f64) -> Result<(FractionalAssignment, RelaxReport)> {
    solve_relaxation_with(
        inst,
        RelaxOptions {
            tol,
            ..RelaxOptions::default()
        },
    )
}

pub fn solve_relaxation_with(
    inst: &Instance,
    opts: RelaxOptions,
) -> Result<(FractionalAssignment, RelaxReport)> {
    inst.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::Params(format!("tol must be positive, got {}", opts.tol)));
    }
    let capacity = inst.capacity();
    let start = uniform_split_loads(inst);
    let overloaded: Vec<usize> = (0..inst.m).filter(|&i| start[i] > capacity).collect();
    if !overloaded.is_empty() {
        return Err(Error::Infeasible {
            reason: format!(
                "average-split loads exceed s_max*C = {capacity} on {} processor(s)",
                overloaded.len()
            ),
            processors: overloaded,
        });
    }

    let mut rows: Vec<Vec<(usize, f64)>> = inst
        .tasks
        .iter()
        .map(|t| {
            let share = 1.0 / t.eligible.len() as f64;
            t.eligible.iter().map(|&i| (i, share)).collect()
        })
        .collect();
    let mut load = start;
    let objective = |load: &[f64]| energy_of_loads(load, inst.deadline, inst.alpha);
    let mut history = vec![objective(&load)];
    let mut moves = 0u64;
    let mut sweeps = 0u64;
    let mut base = Vec::new();
    let mut room = Vec::new();

    loop {
        let cert = certificate(inst, &rows, &load, opts.tol);
        let max_load = load.iter().copied().fold(0.0, f64::max);
        let gap_ok = cert.capped || cert.relative_gap <= opts.tol;
        if gap_ok && cert.residual <= RESIDUAL_REL * max_load.max(1.0) {
            let x = FractionalAssignment {
                m: inst.m,
                rows,
                tol: opts.tol,
            };
            let report = RelaxReport {
                objective: objective(&load),
                iterations: moves,
                sweeps,
                max_stationarity_residual: cert.residual,
                relative_gap: cert.relative_gap,
                history,
            };
            return Ok((x, report));
        }
        if moves >= opts.max_moves {
            return Err(Error::NonConvergence {
                moves,
                residual: cert.residual,
                gap: cert.relative_gap,
            });
        }

        for (j, task) in inst.tasks.iter().enumerate() {
            let w = task.work;
            let row = &mut rows[j];
            if row.len() == 1 {
                continue;
            }
            base.clear();
            room.clear();
            for &(i, x) in row.iter() {
                let b = (load[i] - x * w).max(0.0);
                base.push(b);
                room.push((capacity - b).clamp(0.0, w));
            }
            let Some(fill) = water_fill(&base, &room, w) else {
                return Err(Error::Internal(format!(
                    "task {j} no longer fits under the speed cap"
                )));
            };
            for (k, (i, x)) in row.iter_mut().enumerate() {
                *x = (fill[k] / w).clamp(0.0, 1.0);
                load[*i] = base[k] + fill[k];
            }
            moves += 1;
        }
        sweeps += 1;
        load = recompute_loads(inst, &rows);
        history.push(objective(&load));
    }
}

fn recompute_loads(inst: &Instance, rows: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let mut load = vec![0.0; inst.m];
    for (j, row) in rows.iter().enumerate() {
        for &(i, x) in row {
            load[i] += x * inst.tasks[j].work;
        }
    }
    load
}

/// Splits `total` over bins with levels `base` and headroom `room` so that
/// every bin that receives anything ends at a common level `lambda`, capped
/// bins excepted. Returns `None` if the headroom cannot absorb `total`.
fn water_fill(base: &[f64], room: &[f64], total: f64) -> Option<Vec<f64>> {
    let filled = |lambda: f64| -> f64 {
        base.iter()
            .zip(room)
            .map(|(&b, &u)| (lambda - b).clamp(0.0, u))
            .sum()
    };
    let mut points: Vec<f64> = base
        .iter()
        .zip(room)
        .flat_map(|(&b, &u)| [b, b + u])
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let top = *points.last()?;
    if filled(top) < total * (1.0 - 1e-12) {
        return None;
    }
    let mut lambda = top;
    let mut prev = points[0];
    for &p in &points[1..] {
        let f = filled(p);
        if f >= total {
            let f_prev = filled(prev);
            let slope = (f - f_prev) / (p - prev);
            lambda = if slope > 0.0 {
                prev + (total - f_prev) / slope
            } else {
                p
            };
            break;
        }
        prev = p;
    }
    let mut out: Vec<f64> = base
        .iter()
        .zip(room)
        .map(|(&b, &u)| (lambda - b).clamp(0.0, u))
        .collect();
    // put the rounding remainder on the largest share
    let sum: f64 = out.iter().sum();
    if let Some(k) = (0..out.len()).max_by(|&a, &b| out[a].total_cmp(&out[b])) {
        out[k] = (out[k] + total - sum).clamp(0.0, room[k]);
    }
    Some(out)
}

struct Certificate {
    residual: f64,
    relative_gap: f64,
    /// Some processor sits at the speed cap, so the uncapped gap does not apply.
    capped: bool,
}

fn certificate(inst: &Instance, rows: &[Vec<(usize, f64)>], load: &[f64], tol: f64) -> Certificate {
    let capacity = inst.capacity();
    let saturated = |l: f64| l >= capacity - 1e-9 * capacity.max(1.0);
    let residual = residual_from_rows(rows, load, tol, &saturated);
    let scale = inst.alpha / inst.deadline.powf(inst.alpha - 1.0);
    let marginal: Vec<f64> = load.iter().map(|&l| scale * l.powf(inst.alpha - 1.0)).collect();
    let mut gap = 0.0;
    for (j, row) in rows.iter().enumerate() {
        let current: f64 = row.iter().map(|&(i, x)| x * marginal[i]).sum();
        let best = row
            .iter()
            .map(|&(i, _)| marginal[i])
            .fold(f64::INFINITY, f64::min);
        gap += inst.tasks[j].work * (current - best).max(0.0);
    }
    let objective = energy_of_loads(load, inst.deadline, inst.alpha);
    Certificate {
        residual,
        relative_gap: if objective > 0.0 { gap / objective } else { 0.0 },
        capped: load.iter().any(|&l| saturated(l)),
    }
}

fn residual_from_rows(
    rows: &[Vec<(usize, f64)>],
    load: &[f64],
    tol: f64,
    saturated: &dyn Fn(f64) -> bool,
) -> f64 {
    let mut r: f64 = 0.0;
    for row in rows {
        for &(i, x) in row {
            if x <= tol {
                continue;
            }
            for &(k, _) in row {
                if k != i && !saturated(load[k]) {
                    r = r.max(load[i] - load[k]);
                }
            }
        }
    }
    r
}

/// Largest load excess of a processor holding part of task `j` over another
/// processor eligible for `j`, across all tasks. Mass below `x.tol()` is
/// ignored, as are target processors already at the speed cap. At an optimum
/// this is zero.
pub fn stationarity_residual(inst: &Instance, x: &FractionalAssignment) -> f64 {
    let load = x.loads(inst);
    let capacity = inst.capacity();
    let saturated = |l: f64| l >= capacity - 1e-9 * capacity.max(1.0);
    residual_from_rows(&x.rows, &load, x.tol, &saturated)
}
