//! Dependent rounding of a fractional assignment.
//!
//! The support of `x` is a bipartite graph between processors and tasks with
//! edge weight `x_ij * w_j` (cycles). Cycle breaking shifts weight around
//! even cycles, alternately subtracting and adding the cycle's minimum weight,
//! until the support is a forest; every node keeps its incident weight total,
//! so loads and the fractional objective are unchanged. Tasks left with a
//! single edge are then fixed, and each remaining tree is rooted at a task and
//! every task is matched to its least-loaded child processor. A processor is a
//! child of at most one task, so it gains at most one task in that phase.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_feasibility, energy, Assignment, Instance, Violation};
use crate::relax::{solve_relaxation, FractionalAssignment, RelaxReport};

/// Fractions below this are treated as zero when building the support graph.
pub const SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportEdge {
    pub processor: usize,
    pub task: usize,
    /// `x_ij * w_j`, strictly positive.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportGraph {
    m: usize,
    works: Vec<f64>,
    edges: Vec<SupportEdge>,
}

impl SupportGraph {
    /// Builds a graph directly from edges. Used for tests and for callers
    /// that already hold support weights.
    pub fn from_edges(m: usize, works: Vec<f64>, edges: Vec<SupportEdge>) -> Self {
        let mut g = Self { m, works, edges };
        g.edges.retain(|e| e.weight > 0.0);
        g.edges.sort_by_key(|e| (e.task, e.processor));
        g
    }

    pub fn edges(&self) -> &[SupportEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn num_processors(&self) -> usize {
        self.m
    }

    pub fn num_tasks(&self) -> usize {
        self.works.len()
    }

    pub fn processor_totals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for e in &self.edges {
            out[e.processor] += e.weight;
        }
        out
    }

    pub fn task_totals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.works.len()];
        for e in &self.edges {
            out[e.task] += e.weight;
        }
        out
    }

    pub fn task_degree(&self, task: usize) -> usize {
        self.edges.iter().filter(|e| e.task == task).count()
    }

    pub fn is_forest(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Nodes are numbered processors first (`0..m`), then tasks (`m..m+n`).
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.works.len()];
        for (k, e) in self.edges.iter().enumerate() {
            let t = self.m + e.task;
            adj[e.processor].push((t, k));
            adj[t].push((e.processor, k));
        }
        adj
    }

    /// First cycle met by depth-first search from the lowest-index node, as a
    /// list of edge indices in traversal order.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let nodes = adj.len();
        let mut state = vec![0u8; nodes]; // 0 new, 1 on stack, 2 done
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
        for root in 0..nodes {
            if state[root] != 0 {
                continue;
            }
            // explicit stack of (node, next adjacency slot)
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(top) = stack.last_mut() {
                let v = top.0;
                if top.1 == adj[v].len() {
                    state[v] = 2;
                    stack.pop();
                    continue;
                }
                let (u, edge) = adj[v][top.1];
                top.1 += 1;
                if parent[v].map(|(_, e)| e) == Some(edge) {
                    continue;
                }
                match state[u] {
                    0 => {
                        state[u] = 1;
                        parent[u] = Some((v, edge));
                        stack.push((u, 0));
                    }
                    1 => {
                        // back edge v -> u closes a cycle through the tree path u .. v
                        let mut path = Vec::new();
                        let mut w = v;
                        while w != u {
                            let (p, e) = parent[w].expect("tree path reaches ancestor");
                            path.push(e);
                            w = p;
                        }
                        path.reverse();
                        path.push(edge);
                        return Some(path);
                    }
                    _ => {}
                }
            }
        }
        None
    }
}

pub fn build_support_graph(inst: &Instance, x: &FractionalAssignment) -> SupportGraph {
    let mut edges = Vec::new();
    for (j, task) in inst.tasks.iter().enumerate() {
        let row = x.row(j);
        let kept: f64 = row.iter().filter(|(_, v)| *v >= SUPPORT_EPS).map(|(_, v)| v).sum();
        for &(i, v) in row {
            if v >= SUPPORT_EPS {
                // renormalize so each task's weights still total w_j
                edges.push(SupportEdge {
                    processor: i,
                    task: j,
                    weight: task.work * v / kept,
                });
            }
        }
    }
    SupportGraph::from_edges(inst.m, inst.tasks.iter().map(|t| t.work).collect(), edges)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoundingTrace {
    pub cycles_broken: usize,
    pub epsilon_sequence: Vec<f64>,
    /// Edge count of the support graph before each cycle iteration and at the end.
    pub edge_counts: Vec<usize>,
    /// Tasks fixed because they kept a single edge.
    pub phase1_fixed: usize,
    /// `(task, processor)` pairs chosen by the matching phase, 0-based.
    pub matched: Vec<(usize, usize)>,
    /// Largest work among tasks still fractional after cycle breaking.
    pub max_fractional_w: f64,
    /// Processor loads of the acyclic fractional solution.
    pub phase2_start_loads: Vec<f64>,
}

/// Removes every cycle from the support while preserving all node totals.
pub fn break_cycles(g: &SupportGraph) -> SupportGraph {
    break_cycles_traced(g, &mut RoundingTrace::default())
}

/// [`break_cycles`] recording epsilons and edge counts into `trace`.
pub fn break_cycles_traced(g: &SupportGraph, trace: &mut RoundingTrace) -> SupportGraph {
    let mut g = g.clone();
    while let Some(cycle) = g.find_cycle() {
        trace.edge_counts.push(g.edge_count());
        let (min_pos, eps) = cycle
            .iter()
            .enumerate()
            .map(|(pos, &e)| (pos, g.edges[e].weight))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("cycles have edges");
        let min_class = min_pos % 2;
        for (pos, &e) in cycle.iter().enumerate() {
            let edge = &mut g.edges[e];
            if pos % 2 == min_class {
                edge.weight = if pos == min_pos { 0.0 } else { edge.weight - eps };
            } else {
                edge.weight += eps;
            }
        }
        g.edges.retain(|e| e.weight > 0.0);
        trace.cycles_broken += 1;
        trace.epsilon_sequence.push(eps);
    }
    trace.edge_counts.push(g.edge_count());
    g
}

/// Rounds an acyclic support graph to an integral assignment.
pub fn round_forest(inst: &Instance, g: &SupportGraph) -> Result<(Assignment, RoundingTrace)> {
    let mut trace = RoundingTrace::default();
    let a = round_forest_traced(inst, g, &mut trace)?;
    Ok((a, trace))
}

fn round_forest_traced(
    inst: &Instance,
    g: &SupportGraph,
    trace: &mut RoundingTrace,
) -> Result<Assignment> {
    let m = inst.m;
    let n = inst.n();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in g.edges.iter().enumerate() {
        incident[e.task].push(k);
    }
    let mut proc_of = vec![usize::MAX; n];
    let mut load = vec![0.0; m];
    let mut fractional = vec![false; n];
    trace.phase2_start_loads = g.processor_totals();

    for j in 0..n {
        let w = inst.tasks[j].work;
        match incident[j].len() {
            0 => {
                return Err(Error::Internal(format!(
                    "task {j} has no edge in the support graph"
                )))
            }
            1 => {
                let e = g.edges[incident[j][0]];
                if (e.weight - w).abs() > 1e-9 * w.max(1.0) {
                    return Err(Error::Internal(format!(
                        "task {j} has a single edge of weight {} but work {w}",
                        e.weight
                    )));
                }
                proc_of[j] = e.processor;
                load[e.processor] += w;
                trace.phase1_fixed += 1;
            }
            _ => {
                fractional[j] = true;
                trace.max_fractional_w = trace.max_fractional_w.max(w);
            }
        }
    }

    // processor -> incident fractional tasks
    let mut proc_tasks: Vec<Vec<usize>> = vec![Vec::new(); m];
    for e in &g.edges {
        if fractional[e.task] {
            proc_tasks[e.processor].push(e.task);
        }
    }
    let mut task_seen = vec![false; n];
    let mut proc_seen = vec![false; m];
    for root in 0..n {
        if !fractional[root] || task_seen[root] {
            continue;
        }
        task_seen[root] = true;
        // (task, parent processor)
        let mut pending = vec![(root, None::<usize>)];
        while let Some((t, parent)) = pending.pop() {
            let children: Vec<usize> = incident[t]
                .iter()
                .map(|&k| g.edges[k].processor)
                .filter(|&p| Some(p) != parent)
                .collect();
            let &choice = children
                .iter()
                .min_by(|&&a, &&b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
                .ok_or_else(|| Error::Internal(format!("fractional task {t} has no child")))?;
            for &p in &children {
                if proc_seen[p] {
                    return Err(Error::Internal("support graph is not a forest".into()));
                }
                proc_seen[p] = true;
                for &u in &proc_tasks[p] {
                    if u == t {
                        continue;
                    }
                    if task_seen[u] {
                        return Err(Error::Internal("support graph is not a forest".into()));
                    }
                    task_seen[u] = true;
                    pending.push((u, Some(p)));
                }
            }
            proc_of[t] = choice;
            load[choice] += inst.tasks[t].work;
            trace.matched.push((t, choice));
        }
    }
    trace.matched.sort_unstable();
    Ok(Assignment::new(proc_of))
}

/// `2^(alpha-1) * (2 - 1/p^alpha)`, the rounding guarantee against the
/// fractional optimum, where `p` is the largest eligibility set size.
pub fn approximation_bound(alpha: f64, p: usize) -> f64 {
    2f64.powf(alpha - 1.0) * (2.0 - 1.0 / (p as f64).powf(alpha))
}

/// Cycles per processor that make the rounded schedule respect the speed
/// cap: `max_i sum_{j: i in M_j} w_j / |M_j| + max_j w_j`.
pub fn smax_guarantee(inst: &Instance) -> f64 {
    let split = crate::relax::uniform_split_loads(inst);
    split.into_iter().fold(0.0, f64::max) + inst.max_work()
}

#[derive(Debug, Clone)]
pub struct FdrSolution {
    pub assignment: Assignment,
    pub trace: RoundingTrace,
    pub relax: RelaxReport,
    pub fractional: FractionalAssignment,
    /// Capacity violations of the rounded schedule; empty whenever
    /// `s_max * C >= smax_guarantee(inst)`.
    pub capacity_violations: Vec<Violation>,
}

impl FdrSolution {
    pub fn energy(&self, inst: &Instance) -> f64 {
        energy(inst, &self.assignment).expect("fdr output is a valid assignment")
    }
}

/// Relaxation followed by dependent rounding.
pub fn fdr(inst: &Instance, tol: f64) -> Result<FdrSolution> {
    let (fractional, relax) = solve_relaxation(inst, tol)?;
    let support = build_support_graph(inst, &fractional);
    let mut trace = RoundingTrace::default();
    let forest = break_cycles_traced(&support, &mut trace);
    let assignment = round_forest_traced(inst, &forest, &mut trace)?;
    assignment.check(inst)?;
    let capacity_violations = check_feasibility(inst, &assignment);
    Ok(FdrSolution {
        assignment,
        trace,
        relax,
        fractional,
        capacity_violations,
    })
}
