//! Test-side oracles: plain recursive enumeration, sharing no code with the
//! library's own brute-force search.
#![allow(dead_code)]

use rpsched_core::harness::gen::{derive_seed, generate, EligibilityKind, GenParams};
use rpsched_core::Instance;

/// Every eligible assignment, as `proc_of` vectors.
pub fn all_assignments(inst: &Instance) -> Vec<Vec<usize>> {
    fn rec(inst: &Instance, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j == inst.tasks.len() {
            out.push(cur.clone());
            return;
        }
        for &i in &inst.tasks[j].eligible {
            cur.push(i);
            rec(inst, j + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(inst, 0, &mut Vec::new(), &mut out);
    out
}

pub fn loads_of(inst: &Instance, proc_of: &[usize]) -> Vec<f64> {
    let mut l = vec![0.0; inst.m];
    for (j, &i) in proc_of.iter().enumerate() {
        l[i] += inst.tasks[j].work;
    }
    l
}

pub fn energy_of(inst: &Instance, loads: &[f64]) -> f64 {
    loads
        .iter()
        .map(|l| l.powf(inst.alpha) / inst.deadline.powf(inst.alpha - 1.0))
        .sum()
}

/// Minimum energy over all assignments; with `capped`, only those whose
/// loads stay within `s_max * C`.
pub fn opt_energy(inst: &Instance, capped: bool) -> Option<f64> {
    let cap = inst.s_max * inst.deadline + 1e-9;
    all_assignments(inst)
        .iter()
        .map(|a| loads_of(inst, a))
        .filter(|l| !capped || l.iter().all(|&x| x <= cap))
        .map(|l| energy_of(inst, &l))
        .min_by(f64::total_cmp)
}

/// Smallest achievable maximum task count on a processor.
pub fn min_max_count(inst: &Instance) -> usize {
    all_assignments(inst)
        .iter()
        .map(|a| {
            let mut c = vec![0usize; inst.m];
            for &i in a {
                c[i] += 1;
            }
            c.into_iter().max().unwrap_or(0)
        })
        .min()
        .unwrap()
}

pub fn prefix_sums_desc(loads: &[f64]) -> Vec<f64> {
    let mut v = loads.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn small_params(k: u64, family: u64) -> GenParams {
    let s = derive_seed(family, &[k]);
    GenParams {
        m: 1 + (s % 3) as usize,
        n: 1 + ((s >> 8) % 6) as usize,
        eligibility: if (s >> 16) & 1 == 0 {
            EligibilityKind::Random
        } else {
            EligibilityKind::Inclusive
        },
        seed: s,
        deadline: [0.5, 1.0, 2.0, 3.0][((s >> 24) % 4) as usize],
        ..GenParams::default()
    }
}

/// Small equal-work instance number `k` (m <= 3, n <= 6), cap out of reach.
pub fn small_uniform(k: u64) -> Instance {
    let mut p = small_params(k, 0x1111);
    let w = 1 + (p.seed >> 32) % 5;
    p.w_range = (w, w);
    p.alpha = [1.5, 2.0, 3.0][((p.seed >> 40) % 3) as usize];
    p.s_max = Some(1e12);
    generate(&p).unwrap()
}

/// Small general instance number `k` (m <= 3, n <= 6) at the given alpha,
/// with the speed cap at the rounding guarantee.
pub fn small_general(k: u64, alpha: f64) -> Instance {
    let mut p = small_params(k, 0x2222);
    p.w_range = (1, 100);
    p.alpha = alpha;
    generate(&p).unwrap()
}

/// Mid-size general instance (m up to 10, n up to 30).
pub fn medium_general(k: u64) -> Instance {
    let s = derive_seed(0x3333, &[k]);
    let m = 2 + (s % 9) as usize;
    let p = GenParams {
        m,
        n: m + ((s >> 8) % 21) as usize,
        eligibility: if (s >> 16) & 1 == 0 {
            EligibilityKind::Random
        } else {
            EligibilityKind::Inclusive
        },
        seed: s,
        alpha: [1.5, 2.0, 2.5, 3.0][((s >> 24) % 4) as usize],
        ..GenParams::default()
    };
    generate(&p).unwrap()
}
