//! Instance and assignment data model shared by every solver.
//!
//! Processors and tasks are 0-based here. File formats use 1-based indices
//! and translate at the boundary (see [`crate::harness::io`]).
//!
//! A processor `i` with load `L_i` (cycles) runs at the single speed
//! `L_i / C` and finishes exactly at the common deadline `C`, so its energy
//! is `C * (L_i / C)^alpha = L_i^alpha / C^(alpha - 1)`.

use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use crate::error::{Error, Result};

/// Absolute slack on the `load <= s_max * C` comparison.
pub const CAPACITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    /// Work in CPU cycles.
    pub work: f64,
    /// Eligible processors, 0-based, sorted ascending without duplicates.
    pub eligible: Vec<usize>,
}

impl Task {
    pub fn new(work: f64, eligible: impl IntoIterator<Item = usize>) -> Self {
        let mut eligible: Vec<usize> = eligible.into_iter().collect();
        eligible.sort_unstable();
        eligible.dedup();
        Self { work, eligible }
    }

    pub fn is_eligible(&self, processor: usize) -> bool {
        self.eligible.binary_search(&processor).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Number of processors.
    pub m: usize,
    pub tasks: Vec<Task>,
    /// Common deadline `C`.
    pub deadline: f64,
    /// Speed cap, cycles per time unit.
    pub s_max: f64,
    /// Power exponent, must exceed 1.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance has no processors")]
    NoProcessors,
    #[error("instance has no tasks")]
    NoTasks,
    #[error("deadline C must be positive, got {0}")]
    NonPositiveDeadline(f64),
    #[error("s_max must be positive, got {0}")]
    NonPositiveSpeedCap(f64),
    #[error("alpha must exceed 1, got {0}")]
    AlphaTooSmall(f64),
    #[error("task {task}: work must be positive, got {work}")]
    NonPositiveWork { task: usize, work: f64 },
    #[error("task {task}: empty eligibility set")]
    EmptyEligibility { task: usize },
    #[error("task {task}: processor index {processor} out of range (m = {m})")]
    ProcessorOutOfRange { task: usize, processor: usize, m: usize },
}

impl Instance {
    pub fn new(m: usize, tasks: Vec<Task>, deadline: f64, s_max: f64, alpha: f64) -> Self {
        Self {
            m,
            tasks,
            deadline,
            s_max,
            alpha,
        }
    }

    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    /// Largest number of cycles a processor may execute before the deadline.
    pub fn capacity(&self) -> f64 {
        self.s_max * self.deadline
    }

    pub fn total_work(&self) -> f64 {
        self.tasks.iter().map(|t| t.work).sum()
    }

    pub fn max_work(&self) -> f64 {
        self.tasks.iter().map(|t| t.work).fold(0.0, f64::max)
    }

    /// Largest eligibility set size, `p` in the rounding approximation bound.
    pub fn max_eligibility(&self) -> usize {
        self.tasks.iter().map(|t| t.eligible.len()).max().unwrap_or(0)
    }

    /// Returns every invariant violation at once. An empty list means valid.
    pub fn violations(&self) -> Vec<InstanceError> {
        let mut errs = Vec::new();
        if self.m == 0 {
            errs.push(InstanceError::NoProcessors);
        }
        if self.tasks.is_empty() {
            errs.push(InstanceError::NoTasks);
        }
        if !(self.deadline > 0.0 && self.deadline.is_finite()) {
            errs.push(InstanceError::NonPositiveDeadline(self.deadline));
        }
        if !(self.s_max > 0.0) {
            errs.push(InstanceError::NonPositiveSpeedCap(self.s_max));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            errs.push(InstanceError::AlphaTooSmall(self.alpha));
        }
        for (j, task) in self.tasks.iter().enumerate() {
            if !(task.work > 0.0 && task.work.is_finite()) {
                errs.push(InstanceError::NonPositiveWork {
                    task: j,
                    work: task.work,
                });
            }
            if task.eligible.is_empty() {
                errs.push(InstanceError::EmptyEligibility { task: j });
            }
            for &i in &task.eligible {
                if i >= self.m {
                    errs.push(InstanceError::ProcessorOutOfRange {
                        task: j,
                        processor: i,
                        m: self.m,
                    });
                }
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(errs))
        }
    }

    /// True when every task carries the same work (to 1e-12 relative).
    pub fn is_uniform(&self) -> bool {
        self.uniform_work().is_ok()
    }

    /// The common work of a uniform instance.
    pub fn uniform_work(&self) -> Result<f64> {
        let first = self.tasks.first().map(|t| t.work).unwrap_or(1.0);
        for (j, t) in self.tasks.iter().enumerate() {
            if (t.work - first).abs() > 1e-12 * first.abs() {
                return Err(Error::NonUniformWorks {
                    task: j,
                    work: t.work,
                    expected: first,
                });
            }
        }
        Ok(first)
    }

    /// Same instance with the deadline replaced.
    pub fn with_deadline(&self, deadline: f64) -> Self {
        Self {
            deadline,
            ..self.clone()
        }
    }
}

/// Integral task to processor map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    proc_of: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("assignment covers {got} tasks, instance has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("task {task} assigned to processor {processor}, outside its eligibility set")]
    Ineligible { task: usize, processor: usize },
}

impl Assignment {
    pub fn new(proc_of: Vec<usize>) -> Self {
        Self { proc_of }
    }

    pub fn proc_of(&self, task: usize) -> usize {
        self.proc_of[task]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.proc_of
    }

    pub fn len(&self) -> usize {
        self.proc_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proc_of.is_empty()
    }

    /// Checks completeness and eligibility against `inst`.
    pub fn check(&self, inst: &Instance) -> Result<(), AssignmentError> {
        if self.proc_of.len() != inst.n() {
            return Err(AssignmentError::WrongLength {
                expected: inst.n(),
                got: self.proc_of.len(),
            });
        }
        for (j, &i) in self.proc_of.iter().enumerate() {
            if !inst.tasks[j].is_eligible(i) {
                return Err(AssignmentError::Ineligible {
                    task: j,
                    processor: i,
                });
            }
        }
        Ok(())
    }

    /// Tasks assigned to each processor, in task order.
    pub fn tasks_per_processor(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); m];
        for (j, &i) in self.proc_of.iter().enumerate() {
            out[i].push(j);
        }
        out
    }
}

/// Per-processor cycle totals.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector(pub Vec<f64>);

impl Deref for LoadVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl LoadVector {
    /// Loads sorted non-increasing.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// `S_k` for k = 1..=m: the total load on the k most loaded processors.
    pub fn top_k_sums(&self) -> Vec<f64> {
        self.sorted_desc()
            .into_iter()
            .scan(0.0, |acc, l| {
                *acc += l;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WrongLength { expected: usize, got: usize },
    ProcessorOutOfRange { task: usize, processor: usize },
    Ineligible { task: usize, processor: usize },
    Capacity { processor: usize, load: f64, capacity: f64 },
}

impl Violation {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Violation::Capacity { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength { expected, got } => {
                write!(f, "assignment covers {got} tasks, expected {expected}")
            }
            Violation::ProcessorOutOfRange { task, processor } => {
                write!(f, "task {task}: processor {processor} out of range")
            }
            Violation::Ineligible { task, processor } => {
                write!(f, "task {task}: processor {processor} not eligible")
            }
            Violation::Capacity {
                processor,
                load,
                capacity,
            } => write!(
                f,
                "processor {processor}: load {load} exceeds s_max*C = {capacity}"
            ),
        }
    }
}

/// Returns the full list of invariant violations; `Ok` when none.
pub fn validate_instance(inst: &Instance) -> std::result::Result<(), Vec<InstanceError>> {
    let errs = inst.violations();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

pub fn load_vector(inst: &Instance, a: &Assignment) -> Result<LoadVector> {
    a.check(inst)?;
    Ok(loads_unchecked(inst, a))
}

pub(crate) fn loads_unchecked(inst: &Instance, a: &Assignment) -> LoadVector {
    let mut load = vec![0.0; inst.m];
    for (j, &i) in a.as_slice().iter().enumerate() {
        load[i] += inst.tasks[j].work;
    }
    LoadVector(load)
}

/// `sum_i L_i^alpha / C^(alpha-1)` for an arbitrary load vector.
pub fn energy_of_loads(loads: &[f64], deadline: f64, alpha: f64) -> f64 {
    let scale = deadline.powf(alpha - 1.0);
    loads.iter().map(|&l| l.powf(alpha)).sum::<f64>() / scale
}

pub fn energy(inst: &Instance, a: &Assignment) -> Result<f64> {
    let loads = load_vector(inst, a)?;
    Ok(energy_of_loads(&loads, inst.deadline, inst.alpha))
}

/// Lists every violated constraint: completeness, eligibility and
/// `load_i <= s_max * C` (with [`CAPACITY_TOL`] slack).
pub fn check_feasibility(inst: &Instance, a: &Assignment) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.len() != inst.n() {
        out.push(Violation::WrongLength {
            expected: inst.n(),
            got: a.len(),
        });
    }
    let mut load = vec![0.0; inst.m];
    for (j, &i) in a.as_slice().iter().enumerate().take(inst.n()) {
        if i >= inst.m {
            out.push(Violation::ProcessorOutOfRange {
                task: j,
                processor: i,
            });
            continue;
        }
        if !inst.tasks[j].is_eligible(i) {
            out.push(Violation::Ineligible {
                task: j,
                processor: i,
            });
        }
        load[i] += inst.tasks[j].work;
    }
    let capacity = inst.capacity();
    for (i, &l) in load.iter().enumerate() {
        if l > capacity + CAPACITY_TOL {
            out.push(Violation::Capacity {
                processor: i,
                load: l,
                capacity,
            });
        }
    }
    out
}

/// Per-processor speeds `L_i / C`. Every task on processor `i` runs at
/// `speed[i]` and the processor finishes exactly at the deadline.
pub fn speeds(inst: &Instance, a: &Assignment) -> Result<Vec<f64>> {
    let loads = load_vector(inst, a)?;
    Ok(loads.iter().map(|l| l / inst.deadline).collect())
}
