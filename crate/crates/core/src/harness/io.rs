//! Instance and solution files.
//!
//! Instances are JSON objects with 1-based processor indices:
//!
//! ```text
//! {
//!   "m": 2,
//!   "C": 1.0,
//!   "s_max": 10.0,
//!   "alpha": 2.0,
//!   "tasks": [
//!     {"w": 3.0, "eligible": [1]},
//!     {"w": 1.0, "eligible": [1, 2]}
//!   ]
//! }
//! ```

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_feasibility, energy_of_loads, Assignment, Instance, InstanceError, Task};
use crate::relax::FractionalAssignment;
use crate::rounding::RoundingTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Path of the offending field, e.g. `tasks[2].eligible`.
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    #[serde(rename = "C")]
    deadline: f64,
    s_max: f64,
    alpha: f64,
    tasks: Vec<TaskEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskEntry {
    w: f64,
    eligible: Vec<usize>,
}

/// Canonical text form: scalar fields first, one task per line.
pub fn instance_to_string(inst: &Instance) -> String {
    let num = |v: f64| serde_json::to_string(&v).expect("finite floats serialize");
    let mut out = String::from("{\n");
    out += &format!("  \"m\": {},\n", inst.m);
    out += &format!("  \"C\": {},\n", num(inst.deadline));
    out += &format!("  \"s_max\": {},\n", num(inst.s_max));
    out += &format!("  \"alpha\": {},\n", num(inst.alpha));
    out += "  \"tasks\": [\n";
    for (j, t) in inst.tasks.iter().enumerate() {
        let entry = TaskEntry {
            w: t.work,
            eligible: t.eligible.iter().map(|i| i + 1).collect(),
        };
        let sep = if j + 1 == inst.n() { "" } else { "," };
        out += &format!(
            "    {}{sep}\n",
            serde_json::to_string(&entry).expect("task entries serialize")
        );
    }
    out += "  ]\n}\n";
    out
}

pub fn instance_from_str(text: &str) -> std::result::Result<Instance, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let line = e.inner().line();
        let mut field = e.path().to_string();
        let mut message = e.inner().to_string();
        if let Some(missing) = missing_field(&message) {
            field = if field == "." {
                missing.to_string()
            } else {
                format!("{field}.{missing}")
            };
        }
        // serde_json appends " at line L column C"; the line is reported separately
        if let Some(idx) = message.find(" at line ") {
            message.truncate(idx);
        }
        ParseError {
            field,
            line: (line > 0).then_some(line),
            message,
        }
    })?;

    let mut tasks = Vec::with_capacity(file.tasks.len());
    for (j, entry) in file.tasks.into_iter().enumerate() {
        if let Some(&bad) = entry.eligible.iter().find(|&&i| i == 0 || i > file.m) {
            return Err(ParseError {
                field: format!("tasks[{j}].eligible"),
                line: key_line(text, "eligible", j),
                message: format!("processor index {bad} out of range 1..={}", file.m),
            });
        }
        tasks.push(Task::new(entry.w, entry.eligible.into_iter().map(|i| i - 1)));
    }
    let inst = Instance::new(file.m, tasks, file.deadline, file.s_max, file.alpha);
    if let Some(err) = inst.violations().into_iter().next() {
        let (field, key, occurrence) = match &err {
            InstanceError::NoProcessors => ("m".to_string(), "m", 0),
            InstanceError::NoTasks => ("tasks".to_string(), "tasks", 0),
            InstanceError::NonPositiveDeadline(_) => ("C".to_string(), "C", 0),
            InstanceError::NonPositiveSpeedCap(_) => ("s_max".to_string(), "s_max", 0),
            InstanceError::AlphaTooSmall(_) => ("alpha".to_string(), "alpha", 0),
            InstanceError::NonPositiveWork { task, .. } => (format!("tasks[{task}].w"), "w", *task),
            InstanceError::EmptyEligibility { task }
            | InstanceError::ProcessorOutOfRange { task, .. } => {
                (format!("tasks[{task}].eligible"), "eligible", *task)
            }
        };
        return Err(ParseError {
            field,
            line: key_line(text, key, occurrence),
            message: err.to_string(),
        });
    }
    Ok(inst)
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// 1-based line of the `occurrence`-th (0-based) appearance of `"key"`.
fn key_line(text: &str, key: &str, occurrence: usize) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let mut seen = 0;
    for (idx, line) in text.lines().enumerate() {
        let hits = line.matches(&needle).count();
        if seen + hits > occurrence {
            return Some(idx + 1);
        }
        seen += hits;
    }
    None
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    instance_from_str(&text).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        Error::Parse(e)
    })
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &instance_to_string(inst))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One `(task, processor)` entry of a solution file, both 1-based. `x` is
/// present only for fractional solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub task: usize,
    pub processor: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub algo: String,
    pub assignment: Vec<AssignmentEntry>,
    pub loads: Vec<f64>,
    pub speeds: Vec<f64>,
    pub energy: f64,
    pub feasible: bool,
    pub violations: Vec<String>,
}

impl SolutionFile {
    pub fn integral(inst: &Instance, algo: &str, a: &Assignment) -> Result<Self> {
        let loads = crate::model::load_vector(inst, a)?.0;
        let violations: Vec<String> = check_feasibility(inst, a)
            .into_iter()
            .map(|v| v.to_string())
            .collect();
        Ok(Self {
            algo: algo.to_string(),
            assignment: a
                .as_slice()
                .iter()
                .enumerate()
                .map(|(j, &i)| AssignmentEntry {
                    task: j + 1,
                    processor: i + 1,
                    x: None,
                })
                .collect(),
            speeds: loads.iter().map(|l| l / inst.deadline).collect(),
            energy: energy_of_loads(&loads, inst.deadline, inst.alpha),
            loads,
            feasible: violations.is_empty(),
            violations,
        })
    }

    /// Real-valued entries for every positive `x_ij`.
    pub fn fractional(inst: &Instance, x: &FractionalAssignment) -> Self {
        let loads = x.loads(inst);
        let capacity = inst.capacity();
        let violations: Vec<String> = loads
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > capacity + crate::model::CAPACITY_TOL)
            .map(|(i, l)| format!("processor {i}: load {l} exceeds s_max*C = {capacity}"))
            .collect();
        Self {
            algo: "frac".to_string(),
            assignment: (0..inst.n())
                .flat_map(|j| {
                    x.row(j)
                        .iter()
                        .filter(|(_, v)| *v > 0.0)
                        .map(move |&(i, v)| AssignmentEntry {
                            task: j + 1,
                            processor: i + 1,
                            x: Some(v),
                        })
                })
                .collect(),
            speeds: loads.iter().map(|l| l / inst.deadline).collect(),
            energy: energy_of_loads(&loads, inst.deadline, inst.alpha),
            loads,
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes") + "\n"
    }
}

/// Rounding audit trail with 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceFile {
    pub cycles_broken: usize,
    pub epsilon_sequence: Vec<f64>,
    pub edge_counts: Vec<usize>,
    pub phase1_fixed: usize,
    pub matched: Vec<AssignmentEntry>,
    pub max_fractional_w: f64,
    pub phase2_start_loads: Vec<f64>,
}

impl From<&RoundingTrace> for TraceFile {
    fn from(t: &RoundingTrace) -> Self {
        Self {
            cycles_broken: t.cycles_broken,
            epsilon_sequence: t.epsilon_sequence.clone(),
            edge_counts: t.edge_counts.clone(),
            phase1_fixed: t.phase1_fixed,
            matched: t
                .matched
                .iter()
                .map(|&(task, processor)| AssignmentEntry {
                    task: task + 1,
                    processor: processor + 1,
                    x: None,
                })
                .collect(),
            max_fractional_w: t.max_fractional_w,
            phase2_start_loads: t.phase2_start_loads.clone(),
        }
    }
}

pub fn write_trace(trace: &RoundingTrace, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&TraceFile::from(trace)).expect("trace serializes");
    write_text(path.as_ref(), &(text + "\n"))
}
