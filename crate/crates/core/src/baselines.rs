//! Greedy baselines and exhaustive oracles.
//!
//! LFJ (least flexible job) hands tasks, fewest eligible processors first, to
//! their least-loaded eligible processor. LFM (least flexible machine) lets
//! processors, fewest eligible tasks first, take turns picking their largest
//! remaining eligible task. The oracles enumerate every eligible assignment
//! and are only meant for small instances.

use crate::error::{Error, Result};
use crate::model::{energy_of_loads, Assignment, Instance, CAPACITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Cap on the number of enumerated assignments.
    pub max_states: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_states: 5_000_000,
        }
    }
}

impl OracleBudget {
    pub fn new(max_states: u64) -> Result<Self> {
        if max_states == 0 {
            return Err(Error::Params("oracle budget must be positive".into()));
        }
        Ok(Self { max_states })
    }
}

pub fn lfj(inst: &Instance) -> Result<Assignment> {
    inst.validate()?;
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by_key(|&j| (inst.tasks[j].eligible.len(), j));
    let mut load = vec![0.0f64; inst.m];
    let mut proc_of = vec![0; inst.n()];
    for j in order {
        let task = &inst.tasks[j];
        let &best = task
            .eligible
            .iter()
            .min_by(|&&a, &&b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
            .expect("validated: eligibility set nonempty");
        proc_of[j] = best;
        load[best] += task.work;
    }
    Ok(Assignment::new(proc_of))
}

pub fn lfm(inst: &Instance) -> Result<Assignment> {
    inst.validate()?;
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); inst.m];
    for (j, t) in inst.tasks.iter().enumerate() {
        for &i in &t.eligible {
            candidates[i].push(j);
        }
    }
    let mut order: Vec<usize> = (0..inst.m).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));
    // largest work first, then lowest index
    for c in &mut candidates {
        c.sort_by(|&a, &b| {
            inst.tasks[b]
                .work
                .total_cmp(&inst.tasks[a].work)
                .then(a.cmp(&b))
        });
    }
    let mut proc_of = vec![usize::MAX; inst.n()];
    let mut cursor = vec![0usize; inst.m];
    let mut remaining = inst.n();
    while remaining > 0 {
        let mut progressed = false;
        for &i in &order {
            let c = &candidates[i];
            while cursor[i] < c.len() && proc_of[c[cursor[i]]] != usize::MAX {
                cursor[i] += 1;
            }
            if let Some(&j) = c.get(cursor[i]) {
                proc_of[j] = i;
                remaining -= 1;
                progressed = true;
                if remaining == 0 {
                    break;
                }
            }
        }
        if !progressed {
            return Err(Error::Internal("lfm stalled with unassigned tasks".into()));
        }
    }
    Ok(Assignment::new(proc_of))
}

fn state_count(inst: &Instance) -> u128 {
    inst.tasks
        .iter()
        .map(|t| t.eligible.len() as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX)
}

fn check_budget(inst: &Instance, budget: OracleBudget) -> Result<()> {
    let states = state_count(inst);
    if states > budget.max_states as u128 {
        return Err(Error::BudgetExceeded {
            states,
            budget: budget.max_states,
        });
    }
    Ok(())
}

/// Visits every eligible assignment in lexicographic order of `proc_of`
/// (last task varies fastest).
fn for_each_assignment(inst: &Instance, mut visit: impl FnMut(&[usize])) {
    let n = inst.n();
    let mut digit = vec![0usize; n];
    let mut proc_of: Vec<usize> = inst.tasks.iter().map(|t| t.eligible[0]).collect();
    loop {
        visit(&proc_of);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digit[k] += 1;
            if digit[k] < inst.tasks[k].eligible.len() {
                proc_of[k] = inst.tasks[k].eligible[digit[k]];
                break;
            }
            digit[k] = 0;
            proc_of[k] = inst.tasks[k].eligible[0];
        }
    }
}

/// Minimum-energy integral assignment respecting the speed cap, by full
/// enumeration. Ties go to the lexicographically smallest assignment.
pub fn brute_force_opt(inst: &Instance, budget: OracleBudget) -> Result<Assignment> {
    inst.validate()?;
    check_budget(inst, budget)?;
    let capacity = inst.capacity() + CAPACITY_TOL;
    let mut load = vec![0.0; inst.m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_assignment(inst, |proc_of| {
        load.fill(0.0);
        for (j, &i) in proc_of.iter().enumerate() {
            load[i] += inst.tasks[j].work;
        }
        if load.iter().any(|&l| l > capacity) {
            return;
        }
        let e = energy_of_loads(&load, inst.deadline, inst.alpha);
        let better = match &best {
            None => true,
            Some((b, _)) => e < b * (1.0 - 1e-12),
        };
        if better {
            best = Some((e, proc_of.to_vec()));
        }
    });
    best.map(|(_, p)| Assignment::new(p))
        .ok_or_else(|| Error::Infeasible {
            reason: "no assignment satisfies the speed cap".into(),
            processors: Vec::new(),
        })
}

/// Exact `min over assignments of max tasks per processor` for uniform works.
pub fn brute_force_minmax(inst: &Instance, budget: OracleBudget) -> Result<usize> {
    inst.validate()?;
    inst.uniform_work()?;
    check_budget(inst, budget)?;
    let mut count = vec![0usize; inst.m];
    let mut best = usize::MAX;
    for_each_assignment(inst, |proc_of| {
        count.fill(0);
        for &i in proc_of {
            count[i] += 1;
        }
        best = best.min(count.iter().copied().max().unwrap_or(0));
    });
    Ok(best)
}
