//! Seeded instance generators.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Task};
use crate::rounding::smax_guarantee;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EligibilityKind {
    /// Each task draws a set size uniformly in `1..=m`, then a uniform subset.
    Random,
    /// Every task gets a prefix of one shared random processor order, so any
    /// two sets are nested.
    Inclusive,
}

impl EligibilityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EligibilityKind::Random => "random",
            EligibilityKind::Inclusive => "inclusive",
        }
    }
}

impl std::str::FromStr for EligibilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(EligibilityKind::Random),
            "inclusive" => Ok(EligibilityKind::Inclusive),
            other => Err(Error::Params(format!(
                "unknown eligibility kind `{other}` (expected random or inclusive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub m: usize,
    pub n: usize,
    /// Inclusive integer range for works, in cycles.
    pub w_range: (u64, u64),
    pub eligibility: EligibilityKind,
    pub seed: u64,
    pub alpha: f64,
    pub deadline: f64,
    /// `None` sets `s_max * C` to [`smax_guarantee`] of the generated instance.
    pub s_max: Option<f64>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            m: 10,
            n: 27,
            w_range: (1, 10_000),
            eligibility: EligibilityKind::Random,
            seed: 0,
            alpha: 2.0,
            deadline: 1.0,
            s_max: None,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.w_range;
        let mut problems = Vec::new();
        if self.m == 0 {
            problems.push("m must be at least 1".to_string());
        }
        if self.n == 0 {
            problems.push("n must be at least 1".to_string());
        }
        if lo < 1 || hi < lo {
            problems.push(format!("work range [{lo}, {hi}] needs 1 <= lo <= hi"));
        }
        if !(self.alpha > 1.0) {
            problems.push(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if !(self.deadline > 0.0) {
            problems.push(format!("C must be positive, got {}", self.deadline));
        }
        if let Some(s) = self.s_max {
            if !(s > 0.0) {
                problems.push(format!("s_max must be positive, got {s}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Params(problems.join("; ")))
        }
    }
}

pub fn generate(p: &GenParams) -> Result<Instance> {
    match p.eligibility {
        EligibilityKind::Random => gen_random(p),
        EligibilityKind::Inclusive => gen_inclusive(p),
    }
}

pub fn gen_random(p: &GenParams) -> Result<Instance> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let tasks = (0..p.n)
        .map(|_| {
            let w = rng.gen_range(p.w_range.0..=p.w_range.1) as f64;
            let size = rng.gen_range(1..=p.m);
            Task::new(w, sample(&mut rng, p.m, size))
        })
        .collect();
    Ok(finish(p, tasks))
}

pub fn gen_inclusive(p: &GenParams) -> Result<Instance> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut chain: Vec<usize> = (0..p.m).collect();
    chain.shuffle(&mut rng);
    let mut works = Vec::with_capacity(p.n);
    let mut prefixes = Vec::with_capacity(p.n);
    for _ in 0..p.n {
        works.push(rng.gen_range(p.w_range.0..=p.w_range.1) as f64);
        prefixes.push(rng.gen_range(1..=p.m));
    }
    Ok(finish(p, nested_tasks(&chain, &prefixes, &works)))
}

/// Task `j` is eligible on the first `prefixes[j]` processors of `chain`.
pub(crate) fn nested_tasks(chain: &[usize], prefixes: &[usize], works: &[f64]) -> Vec<Task> {
    works
        .iter()
        .zip(prefixes)
        .map(|(&w, &k)| Task::new(w, chain[..k].iter().copied()))
        .collect()
}

fn finish(p: &GenParams, tasks: Vec<Task>) -> Instance {
    let mut inst = Instance::new(p.m, tasks, p.deadline, 1.0, p.alpha);
    inst.s_max = match p.s_max {
        Some(s) => s,
        None => smax_guarantee(&inst) / p.deadline,
    };
    inst
}

/// Mixes a base seed with extra components (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ p))
}
