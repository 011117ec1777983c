//! Acceptance suite. Every criterion prints one line:
//!
//! ```text
//! cargo test -p rpsched-core --test acceptance -- --nocapture --test-threads 1
//! ```

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpsched_core::harness::bench::{run_bench, write_report, Algo, BenchConfig, BenchRow, Sweep};
use rpsched_core::harness::gen::{generate, EligibilityKind, GenParams};
use rpsched_core::relax::{stationarity_residual, DEFAULT_TOL};
use rpsched_core::rounding::{break_cycles_traced, RoundingTrace};
use rpsched_core::{
    approximation_bound, bs_algo, brute_force_minmax, brute_force_opt, build_support_graph,
    check_feasibility, ecsemrpp, energy, fdr, load_vector, smax_guarantee, solve_relaxation,
    FractionalAssignment, Instance, OracleBudget,
};

const UNIFORM_INSTANCES: u64 = 600;
const GENERAL_PER_ALPHA: u64 = 200;
const GUARANTEE_INSTANCES: u64 = 1000;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id:>2} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn c01_oracle_equivalence() {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for k in 0..UNIFORM_INSTANCES {
        let inst = common::small_uniform(k);
        let e = energy(&inst, &ecsemrpp(&inst).unwrap()).unwrap();
        let lib = energy(&inst, &brute_force_opt(&inst, OracleBudget::default()).unwrap()).unwrap();
        let oracle = common::opt_energy(&inst, true).unwrap();
        let d = rel_diff(e, lib).max(rel_diff(e, oracle));
        worst = worst.max(d);
        if d > TOL {
            bad += 1;
        }
    }
    report(
        1,
        "ecsemrpp energy equals exhaustive optimum",
        bad == 0,
        format!("{UNIFORM_INSTANCES} uniform instances, {bad} mismatches, worst rel diff {worst:.1e} (tol {TOL:.0e})"),
    );
}

#[test]
fn c02_strong_optimality() {
    let mut bad = 0;
    let mut compared = 0usize;
    for k in 0..UNIFORM_INSTANCES {
        let inst = common::small_uniform(k);
        let ours = load_vector(&inst, &ecsemrpp(&inst).unwrap()).unwrap().top_k_sums();
        for a in common::all_assignments(&inst) {
            let theirs = common::prefix_sums_desc(&common::loads_of(&inst, &a));
            compared += 1;
            if ours.iter().zip(&theirs).any(|(x, y)| x > y) {
                bad += 1;
            }
        }
    }
    report(
        2,
        "ecsemrpp top-k load sums minimal for every k",
        bad == 0,
        format!("{UNIFORM_INSTANCES} instances, {compared} assignments compared, {bad} violations (exact)"),
    );
}

#[test]
fn c03_minmax_and_flow_calls() {
    let mut wrong = 0;
    let mut over = 0;
    let mut max_calls = 0;
    for k in 0..UNIFORM_INSTANCES {
        let inst = common::small_uniform(k);
        let r = bs_algo(&inst).unwrap();
        let lib = brute_force_minmax(&inst, OracleBudget::default()).unwrap();
        if r.l_star != lib || r.l_star != common::min_max_count(&inst) {
            wrong += 1;
        }
        let limit = (inst.n() as f64).log2().ceil() as usize + 1;
        if r.max_flow_calls > limit {
            over += 1;
        }
        max_calls = max_calls.max(r.max_flow_calls);
    }
    report(
        3,
        "bs_algo l_star equals brute-force min-max",
        wrong == 0 && over == 0,
        format!(
            "{UNIFORM_INSTANCES} instances, {wrong} wrong, {over} over ceil(log2 n)+1 flow calls (max seen {max_calls})"
        ),
    );
}

fn general_set() -> Vec<Instance> {
    [1.5, 2.0, 3.0]
        .into_iter()
        .flat_map(|a| (0..GENERAL_PER_ALPHA).map(move |k| common::small_general(k, a)))
        .collect()
}

#[test]
fn c04_approximation_bound() {
    let mut bad = 0;
    let mut worst_slack = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let set = general_set();
    for inst in &set {
        let e = fdr(inst, DEFAULT_TOL).unwrap().energy(inst);
        let opt = energy(inst, &brute_force_opt(inst, OracleBudget::default()).unwrap()).unwrap();
        let ratio = e / opt;
        let bound = approximation_bound(inst.alpha, inst.max_eligibility());
        worst_ratio = worst_ratio.max(ratio);
        worst_slack = worst_slack.min(bound - ratio);
        if ratio > bound {
            bad += 1;
        }
    }
    report(
        4,
        "fdr / opt within 2^(a-1)(2-1/p^a)",
        bad == 0 && (approximation_bound(2.0, 2) - 3.5).abs() < 1e-12,
        format!(
            "{} instances (alpha 1.5, 2, 3), {bad} over bound, worst ratio {worst_ratio:.4}, min slack {worst_slack:.4}",
            set.len()
        ),
    );
}

/// Largest `final - (phase-2 start + max fractional work)` over processors.
fn load_excess(trace: &RoundingTrace, final_loads: &[f64]) -> f64 {
    final_loads
        .iter()
        .zip(&trace.phase2_start_loads)
        .map(|(&f, &s)| {
            let slack = 1e-9 * s.max(1.0);
            f - (s + trace.max_fractional_w + slack)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn c05_load_violation_bound() {
    let mut runs = 0;
    let mut bad = 0;
    let medium = (0..GUARANTEE_INSTANCES / 2).map(common::medium_general);
    for inst in general_set().into_iter().chain(medium) {
        let s = fdr(&inst, DEFAULT_TOL).unwrap();
        let loads = load_vector(&inst, &s.assignment).unwrap();
        runs += 1;
        if load_excess(&s.trace, &loads) >= 0.0 {
            bad += 1;
        }
    }
    report(
        5,
        "final load < phase-2 start load + max fractional work",
        bad == 0,
        format!("{runs} fdr runs, {bad} processors-runs violating (strict, slack 1e-9 relative)"),
    );
}

#[test]
fn c06_speed_cap_guarantee() {
    let mut violations = 0;
    let mut at_guarantee = 0;
    for k in 0..GUARANTEE_INSTANCES {
        let inst = common::medium_general(k);
        assert!(inst.capacity() >= smax_guarantee(&inst) * (1.0 - 1e-12));
        if (inst.capacity() - smax_guarantee(&inst)).abs() <= 1e-9 * inst.capacity() {
            at_guarantee += 1;
        }
        let s = fdr(&inst, DEFAULT_TOL).unwrap();
        violations += s.capacity_violations.len() + check_feasibility(&inst, &s.assignment).len();
    }
    report(
        6,
        "fdr respects s_max when s_max*C >= guarantee",
        violations == 0,
        format!("{GUARANTEE_INSTANCES} instances ({at_guarantee} with the cap exactly at the guarantee), {violations} violations"),
    );
}

/// A random fractional point: arbitrary positive weights over each task's set.
fn random_fractional(inst: &Instance, seed: u64) -> FractionalAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = inst
        .tasks
        .iter()
        .map(|t| {
            let raw: Vec<f64> = t.eligible.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            t.eligible.iter().zip(raw).map(|(&i, r)| (i, r / sum)).collect()
        })
        .collect();
    FractionalAssignment::new(inst, rows, DEFAULT_TOL).unwrap()
}

#[test]
fn c07_cycle_breaking_conservation() {
    const TOL: f64 = 1e-9;
    let mut calls = 0;
    let mut cycles = 0;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut check = |inst: &Instance, x: &FractionalAssignment, label: String| {
        let g = build_support_graph(inst, x);
        let mut trace = RoundingTrace::default();
        let out = break_cycles_traced(&g, &mut trace);
        calls += 1;
        cycles += trace.cycles_broken;
        let proc_diff = g
            .processor_totals()
            .iter()
            .zip(out.processor_totals())
            .map(|(a, b)| (a - b).abs() / a.max(1.0))
            .fold(0.0, f64::max);
        let task_diff = g
            .task_totals()
            .iter()
            .zip(out.task_totals())
            .map(|(a, b)| (a - b).abs() / a.max(1.0))
            .fold(0.0, f64::max);
        worst = worst.max(proc_diff).max(task_diff);
        let decreasing = trace.edge_counts.windows(2).all(|w| w[1] < w[0]);
        if proc_diff > TOL || task_diff > TOL || !out.is_forest() || !decreasing {
            bad.push(label);
        }
    };
    for (k, inst) in general_set().iter().enumerate() {
        let (x, _) = solve_relaxation(inst, DEFAULT_TOL).unwrap();
        check(inst, &x, format!("relaxed small #{k}"));
        check(inst, &random_fractional(inst, k as u64), format!("random small #{k}"));
    }
    for k in 0..300 {
        let inst = common::medium_general(k);
        let (x, _) = solve_relaxation(&inst, DEFAULT_TOL).unwrap();
        check(&inst, &x, format!("relaxed medium #{k}"));
        check(&inst, &random_fractional(&inst, 1000 + k), format!("random medium #{k}"));
    }
    report(
        7,
        "cycle breaking conserves totals, ends acyclic, drops edges each step",
        bad.is_empty(),
        format!(
            "{calls} calls, {cycles} cycles broken, worst rel drift {worst:.1e} (tol {TOL:.0e}), failures {:?}",
            &bad[..bad.len().min(5)]
        ),
    );
}

#[test]
fn c08_relaxation_lower_bound_and_certificate() {
    const OBJ_SLACK: f64 = 1e-9;
    const RESIDUAL_TOL: f64 = 1e-5;
    let mut above = 0;
    let mut max_residual: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let set = general_set();
    let uniform = (0..UNIFORM_INSTANCES).map(common::small_uniform);
    let mut count = 0;
    for inst in set.into_iter().chain(uniform) {
        let (x, rep) = solve_relaxation(&inst, DEFAULT_TOL).unwrap();
        let opt = common::opt_energy(&inst, true).unwrap();
        let excess = rep.objective / opt - 1.0;
        max_excess = max_excess.max(excess);
        if excess > OBJ_SLACK {
            above += 1;
        }
        max_residual = max_residual.max(stationarity_residual(&inst, &x));
        count += 1;
    }
    for k in 0..200 {
        let inst = common::medium_general(k);
        let (x, _) = solve_relaxation(&inst, DEFAULT_TOL).unwrap();
        max_residual = max_residual.max(stationarity_residual(&inst, &x));
    }
    report(
        8,
        "fractional objective <= integral optimum, stationarity residual small",
        above == 0 && max_residual <= RESIDUAL_TOL,
        format!(
            "{count} oracle comparisons, {above} above opt (slack {OBJ_SLACK:.0e} rel, max frac/opt - 1 = {max_excess:.1e}); \
             max residual {max_residual:.1e} over {} solves (tol {RESIDUAL_TOL:.0e})",
            count + 200
        ),
    );
}

fn reference_scale(eligibility: EligibilityKind, seed: u64) -> GenParams {
    GenParams {
        m: 10,
        n: 27,
        w_range: (1, 10_000),
        eligibility,
        seed,
        alpha: 2.0,
        ..GenParams::default()
    }
}

fn no_timing(base: GenParams, sweep: Sweep, algos: Vec<Algo>, repeats: usize) -> BenchConfig {
    let mut cfg = BenchConfig::new(base, sweep);
    cfg.algos = algos;
    cfg.repeats = repeats;
    cfg.timing = false;
    cfg
}

#[test]
fn c09_reference_scale_gap() {
    const PROXY: f64 = 1.10;
    let mut lines = Vec::new();
    let mut flagged = Vec::new();
    for seed in [0, 1] {
        let cfg = no_timing(
            reference_scale(EligibilityKind::Random, seed),
            Sweep::Eligibility,
            vec![Algo::Frac, Algo::Fdr, Algo::Lfj, Algo::Lfm],
            30,
        );
        let r = run_bench(&cfg).unwrap();
        let s = r.summaries();
        for cell in r.cells() {
            let mean = |a: Algo| {
                s.iter()
                    .find(|c| c.cell == cell && c.algo == a)
                    .map(|c| c.mean_ratio)
                    .unwrap()
            };
            let (fdr_r, lfj_r, lfm_r) = (mean(Algo::Fdr), mean(Algo::Lfj), mean(Algo::Lfm));
            let label = format!("seed {seed}/{cell}");
            if fdr_r > PROXY {
                flagged.push(label.clone());
            }
            lines.push(format!(
                "{label}: fdr/frac {fdr_r:.4}, lfj/frac {lfj_r:.4} (fdr {:+.1}%), lfm/frac {lfm_r:.4} (fdr {:+.1}%)",
                (fdr_r / lfj_r - 1.0) * 100.0,
                (fdr_r / lfm_r - 1.0) * 100.0,
            ));
        }
    }
    report(
        9,
        "m=10 n=27 alpha=2 mean fdr/frac per cell <= 1.10",
        flagged.is_empty(),
        format!("30 repeats per cell; flagged {flagged:?}"),
    );
    for l in lines {
        println!("        {l}");
    }
}

fn pair_rows(r: &[BenchRow]) -> Vec<(&BenchRow, &BenchRow)> {
    let (a, b): (Vec<&BenchRow>, Vec<&BenchRow>) = {
        let first = &r[0].cell;
        r.iter().partition(|x| &x.cell == first)
    };
    assert_eq!(a.len(), b.len());
    a.into_iter().zip(b).collect()
}

#[test]
fn c10_deadline_scaling() {
    const ENERGY_TOL: f64 = 1e-9;
    const RATIO_TOL: f64 = 1e-6;
    let mut worst_energy: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut pairs = 0;
    let configs = [
        no_timing(
            reference_scale(EligibilityKind::Random, 3),
            Sweep::Deadline(vec![1.0, 2.0]),
            vec![Algo::Frac, Algo::Fdr, Algo::Lfj, Algo::Lfm],
            10,
        ),
        no_timing(
            GenParams {
                alpha: 3.0,
                ..reference_scale(EligibilityKind::Inclusive, 4)
            },
            Sweep::Deadline(vec![1.5, 3.0]),
            vec![Algo::Frac, Algo::Fdr, Algo::Lfj, Algo::Lfm],
            10,
        ),
        no_timing(
            GenParams {
                m: 3,
                n: 8,
                alpha: 2.5,
                ..reference_scale(EligibilityKind::Random, 5)
            },
            Sweep::Deadline(vec![1.0, 2.0]),
            vec![Algo::Frac, Algo::Opt, Algo::Fdr, Algo::Lfj, Algo::Lfm],
            10,
        ),
    ];
    for cfg in &configs {
        let factor = 2f64.powf(1.0 - cfg.base.alpha);
        let r = run_bench(cfg).unwrap();
        for (x, y) in pair_rows(&r.rows) {
            assert_eq!((x.algo, x.repeat, x.seed), (y.algo, y.repeat, y.seed));
            worst_energy = worst_energy.max(rel_diff(y.energy / x.energy, factor));
            worst_ratio = worst_ratio.max((y.ratio - x.ratio).abs());
            pairs += 1;
        }
    }
    report(
        10,
        "doubling C scales energy by 2^(1-alpha), ratios unchanged",
        worst_energy <= ENERGY_TOL && worst_ratio <= RATIO_TOL,
        format!(
            "{pairs} row pairs, worst energy factor rel err {worst_energy:.1e} (tol {ENERGY_TOL:.0e}), \
             worst ratio change {worst_ratio:.1e} (tol {RATIO_TOL:.0e})"
        ),
    );
}

#[test]
fn c11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = no_timing(
        GenParams {
            m: 3,
            n: 7,
            ..reference_scale(EligibilityKind::Random, 9)
        },
        Sweep::Deadline(vec![1.0, 2.0, 3.0]),
        vec![Algo::Frac, Algo::Opt, Algo::Fdr, Algo::Lfj, Algo::Lfm],
        5,
    );
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        write_report(&run_bench(&cfg).unwrap(), p).unwrap();
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();

    // with timing on, everything except the runtime column still matches
    let timed = BenchConfig { timing: true, ..cfg.clone() };
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(5);
                f.join(",")
            })
            .collect()
    };
    let t1 = strip(run_bench(&timed).unwrap().to_csv().unwrap());
    let t2 = strip(String::from_utf8(a.clone()).unwrap());

    let inst_a = generate(&cfg.base).unwrap();
    let inst_b = generate(&cfg.base).unwrap();
    report(
        11,
        "identical seeds give byte-identical bench CSV",
        a == b && t1 == t2 && inst_a == inst_b,
        format!(
            "{} bytes, {} rows; byte-identical {}, timed run matches outside runtime_ms {}",
            a.len(),
            a.iter().filter(|&&c| c == b'\n').count() - 1,
            a == b,
            t1 == t2
        ),
    );
}
