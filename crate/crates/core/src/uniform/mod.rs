//! Exact solver for uniform-work tasks.
//!
//! With equal works the energy only depends on how many tasks each processor
//! receives. [`bs_algo`] finds the smallest achievable maximum task count by
//! binary search over the source capacity of a bipartite flow network, and
//! [`ecsemrpp`] repeatedly peels off a most-loaded processor with its tasks and
//! re-solves the rest, which yields a strongly-optimal load vector.

mod flow;

use std::collections::VecDeque;

pub use flow::{build_network, max_flow, Edge, FlowNetwork, FlowResult, Node};

use crate::error::{Error, Result};
use crate::model::{Assignment, Instance, CAPACITY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxResult {
    /// Smallest achievable maximum number of tasks on one processor.
    pub l_star: usize,
    /// Lowest-indexed processor carrying `l_star` tasks in `assignment`.
    pub peel_processor: usize,
    pub peel_tasks: Vec<usize>,
    pub assignment: Assignment,
    pub max_flow_calls: usize,
}

/// One round of the peeling loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelStep {
    pub processor: usize,
    pub tasks: Vec<usize>,
    pub l_star: usize,
    pub max_flow_calls: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformSolution {
    pub assignment: Assignment,
    pub peels: Vec<PeelStep>,
}

/// Min-max task count over the active part of a network.
struct Search {
    l_star: usize,
    matching: Vec<Option<usize>>,
    calls: usize,
}

fn binary_search(net: &mut FlowNetwork) -> Result<Search> {
    let n0 = net.active_tasks();
    let (mut lo, mut hi) = (1usize, n0);
    let mut kept: Option<Vec<Option<usize>>> = None;
    let mut calls = 0;
    while lo < hi {
        let c = (lo + hi) / 2;
        net.set_source_capacity(c as u64);
        let f = max_flow(net);
        calls += 1;
        if f.value == n0 {
            hi = c;
            kept = Some(f.matching);
        } else {
            lo = c + 1;
        }
    }
    let matching = match kept {
        Some(m) => m,
        None => {
            // hi was never probed; realize it directly
            net.set_source_capacity(hi as u64);
            let f = max_flow(net);
            calls += 1;
            if f.value != n0 {
                return Err(Error::Internal(format!(
                    "only {} of {n0} tasks routable at capacity {hi}",
                    f.value
                )));
            }
            f.matching
        }
    };
    Ok(Search {
        l_star: lo,
        matching,
        calls,
    })
}

/// Moves tasks along alternating paths from a processor with `k` tasks to one
/// with at most `k - 2` until no such path exists. The maximum count never
/// grows, and the result is balanced: no single-step exchange chain can
/// reduce any convex cost of the counts.
fn balance(net: &FlowNetwork, matching: &mut [Option<usize>]) {
    let m = net.num_processors();
    let mut eligible = vec![Vec::new(); net.num_tasks()];
    for (i, j) in net.eligibility_edges() {
        eligible[j].push(i);
    }
    let mut count = vec![0usize; m];
    for p in matching.iter().flatten() {
        count[*p] += 1;
    }
    loop {
        let mut order: Vec<usize> = (0..m).filter(|&i| net.is_processor_active(i)).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(count[i]), i));
        let path = order
            .into_iter()
            .take_while(|&u| count[u] >= 2)
            .find_map(|u| improving_path(u, &count, matching, &eligible));
        let Some((target, prev)) = path else {
            return;
        };
        let mut q = target;
        count[q] += 1;
        while let Some((p, t)) = prev[q] {
            matching[t] = Some(q);
            q = p;
        }
        count[q] -= 1;
    }
}

/// Breadth-first search from `source` through `processor -> assigned task ->
/// other eligible processor` steps for a processor with at most
/// `count[source] - 2` tasks. Returns it with the predecessor links.
#[allow(clippy::type_complexity)]
fn improving_path(
    source: usize,
    count: &[usize],
    matching: &[Option<usize>],
    eligible: &[Vec<usize>],
) -> Option<(usize, Vec<Option<(usize, usize)>>)> {
    let m = count.len();
    let mut on = vec![Vec::new(); m];
    for (t, p) in matching.iter().enumerate() {
        if let Some(p) = p {
            on[*p].push(t);
        }
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut seen = vec![false; m];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(p) = queue.pop_front() {
        for &t in &on[p] {
            for &q in &eligible[t] {
                if seen[q] {
                    continue;
                }
                seen[q] = true;
                prev[q] = Some((p, t));
                if count[q] + 2 <= count[source] {
                    return Some((q, prev));
                }
                queue.push_back(q);
            }
        }
    }
    None
}

fn peel_choice(matching: &[Option<usize>], m: usize) -> (usize, Vec<usize>) {
    let mut on = vec![Vec::new(); m];
    for (t, p) in matching.iter().enumerate() {
        if let Some(p) = p {
            on[*p].push(t);
        }
    }
    let best = (0..m)
        .max_by_key(|&i| (on[i].len(), std::cmp::Reverse(i)))
        .unwrap_or(0);
    (best, std::mem::take(&mut on[best]))
}

/// Finds `L* = min max_i |tasks on P_i|` for a uniform-work instance, together
/// with an assignment attaining it.
pub fn bs_algo(inst: &Instance) -> Result<MinMaxResult> {
    let mut net = build_network(inst, inst.n() as u64)?;
    let mut search = binary_search(&mut net)?;
    balance(&net, &mut search.matching);
    let (peel_processor, peel_tasks) = peel_choice(&search.matching, inst.m);
    let proc_of = search
        .matching
        .iter()
        .map(|p| p.ok_or_else(|| Error::Internal("unassigned task after max-flow".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(MinMaxResult {
        l_star: search.l_star,
        peel_processor,
        peel_tasks,
        assignment: Assignment::new(proc_of),
        max_flow_calls: search.calls,
    })
}

/// Energy-optimal assignment for a uniform-work instance.
pub fn ecsemrpp(inst: &Instance) -> Result<Assignment> {
    ecsemrpp_traced(inst).map(|s| s.assignment)
}

/// [`ecsemrpp`] plus the sequence of peeled processors.
pub fn ecsemrpp_traced(inst: &Instance) -> Result<UniformSolution> {
    let work = {
        inst.validate()?;
        inst.uniform_work()?
    };
    let mut net = build_network(inst, inst.n() as u64)?;
    let mut proc_of = vec![usize::MAX; inst.n()];
    let mut peels = Vec::new();
    while !net.is_empty() {
        let mut search = binary_search(&mut net)?;
        balance(&net, &mut search.matching);
        let (processor, tasks) = peel_choice(&search.matching, inst.m);
        if tasks.len() != search.l_star {
            return Err(Error::Internal(format!(
                "peeled processor carries {} tasks, expected {}",
                tasks.len(),
                search.l_star
            )));
        }
        for &t in &tasks {
            proc_of[t] = processor;
        }
        net.remove(processor, &tasks);
        peels.push(PeelStep {
            processor,
            tasks,
            l_star: search.l_star,
            max_flow_calls: search.calls,
        });
    }

    let assignment = Assignment::new(proc_of);
    if let Some(first) = peels.first() {
        let max_load = first.l_star as f64 * work;
        if max_load > inst.capacity() + CAPACITY_TOL {
            let processors = peels
                .iter()
                .filter(|p| p.l_star == first.l_star)
                .map(|p| p.processor)
                .collect();
            return Err(Error::Infeasible {
                reason: format!(
                    "optimal min-max load {max_load} exceeds s_max*C = {}",
                    inst.capacity()
                ),
                processors,
            });
        }
    }
    Ok(UniformSolution { assignment, peels })
}
