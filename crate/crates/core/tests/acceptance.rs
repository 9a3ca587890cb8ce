//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any fails.

use std::process::Command;
use std::sync::Arc;

use kantorovich::algebras::{check_algebra_laws, check_metric_compat, ConvexAlgebra};
use kantorovich::approx::{convergence_study, count_inversions, rationalize, truncate_to_ball};
use kantorovich::brute_force_assignment;
use kantorovich::measures::DiscreteMeasure;
use kantorovich::monad::check_monad_laws;
use kantorovich::power::{multiset_distance, MultiSet};
use kantorovich::random::{
    random_composition, random_euclidean, random_float_measure, random_multiset, random_rational_measure, random_space,
    random_support, trial_rng, SamplerConfig,
};
use kantorovich::spaces::{FiniteMetricSpace, Norm};
use kantorovich::suite::{check_graded_coherence, check_isometries, check_lemmas};
use kantorovich::transport::{bistochastic_min, w1, w1_bruteforce, w1_flow, Solver};
use rand::Rng;

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// A measure with weights `k_i / den` for a given denominator.
fn measure_over(rng: &mut impl Rng, space: &Arc<FiniteMetricSpace>, den: i64) -> DiscreteMeasure {
    let k = rng.gen_range(1..=space.len().min(den as usize));
    let support = random_support(rng, space.len(), k);
    let num = random_composition(rng, den, k);
    DiscreteMeasure::from_rational(space.clone(), support, num, den).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..200 {
        let mut rng = trial_rng(SEED, t);
        let n = rng.gen_range(1..=8);
        let space = random_space(&mut rng, n);
        let den = rng.gen_range(1..=7);
        let p = measure_over(&mut rng, &space, den);
        let q = measure_over(&mut rng, &space, den);
        let flow = w1_flow(&p, &q).unwrap().cost;
        let brute = w1_bruteforce(&p, &q).unwrap();
        worst = worst.max((flow - brute).abs());
    }
    outcome(worst <= 1e-8, format!("200 instances, max |flow - brute| = {worst:e}"))
}

fn criterion_2() -> Outcome {
    let solvers = [Solver::Auto, Solver::Assignment, Solver::Flow];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..200 {
        let mut rng = trial_rng(SEED + 1, t);
        let n = rng.gen_range(1..=8);
        let space = random_space(&mut rng, n);
        let (p, q, solver) = if t % 2 == 0 {
            let p = random_rational_measure(&mut rng, &space, 4, 7);
            let q = random_rational_measure(&mut rng, &space, 4, 7);
            (p, q, solvers[(t / 2 % 3) as usize])
        } else {
            let p = random_float_measure(&mut rng, &space, 6);
            let q = random_float_measure(&mut rng, &space, 6);
            (p, q, Solver::Flow)
        };
        let gap = w1(&p, &q, solver).unwrap().gap;
        lo = lo.min(gap);
        hi = hi.max(gap);
    }
    outcome(
        lo >= 0.0 && hi <= 1e-8,
        format!("200 instances, gap range [{lo:e}, {hi:e}]"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..200 {
        let mut rng = trial_rng(SEED + 2, t);
        let pts = rng.gen_range(1..=6);
        let space = random_space(&mut rng, pts);
        let n = rng.gen_range(1..=6);
        let a: MultiSet = random_multiset(&mut rng, &space, n);
        let b: MultiSet = random_multiset(&mut rng, &space, n);
        let hungarian = multiset_distance(&a, &b).unwrap();
        let flow = bistochastic_min(&a, &b).unwrap();
        let cost: Vec<f64> = a
            .entries()
            .iter()
            .flat_map(|&x| b.entries().iter().map(move |&y| (x, y)))
            .map(|(x, y)| space.d(x, y))
            .collect();
        let brute = brute_force_assignment(&cost, n).0 / n as f64;
        worst = worst.max((hungarian - brute).abs()).max((flow - brute).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("200 pairs, max deviation from brute force = {worst:e}"),
    )
}

fn law_outcome(results: &[kantorovich::monad::LawResult], cap: impl Fn(&str) -> f64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in results {
        let ok = r.worst_discrepancy <= cap(&r.law);
        pass &= ok;
        parts.push(format!("{}={:e}", r.law, r.worst_discrepancy));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let results = check_isometries(SEED, 100, &SamplerConfig::default()).unwrap();
    law_outcome(&results, |_| 1e-8)
}

fn criterion_5() -> Outcome {
    let results = check_monad_laws(SEED, 100, &SamplerConfig::default()).unwrap();
    law_outcome(&results, |law| if law.ends_with(".exact") { 0.0 } else { 1e-12 })
}

fn criterion_6() -> Outcome {
    let results = check_graded_coherence(SEED, 100, &SamplerConfig::default()).unwrap();
    law_outcome(&results, |_| 0.0)
}

fn criterion_7() -> Outcome {
    let results = check_lemmas(SEED, 100, &SamplerConfig::default()).unwrap();
    law_outcome(&results, |_| 1e-8)
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for dim in 1..=4 {
        for norm in Norm::ALL {
            let a = ConvexAlgebra::new(dim, norm).unwrap();
            let mut results = check_algebra_laws(&a, SEED, 100).unwrap();
            results.extend(check_metric_compat(&a, SEED, 100).unwrap());
            for r in results {
                worst = worst.max(r.worst_discrepancy);
                pass &= r.worst_discrepancy <= 1e-10;
            }
        }
    }
    outcome(pass, format!("d = 1..4, all norms, worst discrepancy {worst:e}"))
}

fn criterion_9() -> Outcome {
    let mut rat_ok = true;
    let mut worst_ratio = 0.0f64;
    let mut trunc_worst = 0.0f64;
    for t in 0..200 {
        let mut rng = trial_rng(SEED + 3, t);
        let n = rng.gen_range(1..=8);
        let space = random_space(&mut rng, n);
        let p = random_float_measure(&mut rng, &space, 8);
        let eps = rng.gen_range(0.005..0.5);
        let r = rationalize(&p, eps).unwrap();
        let bound = r.bound.unwrap();
        rat_ok &= r.w1_error <= bound;
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(r.w1_error / bound);
        }

        let x0 = rng.gen_range(0..n);
        let radius = rng.gen_range(0.0..8.0);
        let tr = truncate_to_ball(&p, x0, radius).unwrap();
        trunc_worst = trunc_worst.max((tr.formula_error.unwrap() - tr.w1_error).abs());
    }

    let sizes = [8, 16, 32, 64, 128];
    let two = Arc::new(FiniteMetricSpace::from_line(&[0.0, 1.0]));
    let target_a = DiscreteMeasure::new(two, vec![0, 1], vec![0.3, 0.7]).unwrap();
    let mut rng = trial_rng(SEED + 4, 0);
    let cloud = Arc::new(random_euclidean(&mut rng, 5, 2, Norm::L2).metric_space());
    let target_b = DiscreteMeasure::new(cloud, vec![0, 1, 2, 3, 4], vec![0.1, 0.2, 0.3, 0.15, 0.25]).unwrap();
    let mut inversions = Vec::new();
    for target in [&target_a, &target_b] {
        let rows = convergence_study(target, &sizes, 50, SEED).unwrap();
        inversions.push(count_inversions(&rows));
    }
    let study_ok = inversions.iter().all(|&k| k <= 1);
    outcome(
        rat_ok && trunc_worst <= 1e-8 && study_ok,
        format!(
            "rationalize max error/bound {worst_ratio:.3}; truncation max |formula - solver| {trunc_worst:e}; \
             study inversions {inversions:?}"
        ),
    )
}

fn kanto(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kanto")).args(args).output().unwrap()
}

fn error_code(out: &std::process::Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap_or_default();
    v["error"]["code"].as_str().unwrap_or("").to_string()
}

fn criterion_10() -> Outcome {
    let a = kanto(&["laws", "--seed", "7"]);
    let b = kanto(&["laws", "--seed", "7"]);
    let identical = a.status.code() == Some(0) && a.stdout == b.stdout && !a.stdout.is_empty();

    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    };
    let space = path("space.json", r#"{"kind":"matrix","dist":[[0,3],[3,0]]}"#);
    let bad_space = path("bad_space.json", r#"{"kind":"matrix","dist":[[0,1],[5,0]]}"#);
    let good = path("p.json", r#"{"support":[0],"weights":[1]}"#);
    let bad = path("bad.json", r#"{"support":[0],"weights":[1"#);
    let missing = dir.path().join("missing.json").display().to_string();

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (
            vec!["dist", "--space", &space, "--p", &bad, "--q", &good],
            1,
            "parse.measure",
        ),
        (
            vec!["dist", "--space", &missing, "--p", &good, "--q", &good],
            1,
            "io.not_found",
        ),
        (
            vec!["dist", "--space", &bad_space, "--p", &good, "--q", &good],
            1,
            "invalid.metric",
        ),
        (vec!["laws", "--trials", "0"], 1, "invalid.trials"),
        (vec!["algebra-check", "--trials", "5", "--tolerance", "1e-300"], 2, ""),
    ];
    let mut bad_cases = Vec::new();
    for (args, code, err) in &cases {
        let out = kanto(args);
        if out.status.code() != Some(*code) || (!err.is_empty() && error_code(&out) != *err) {
            bad_cases.push(format!("{args:?} -> {:?} {}", out.status.code(), error_code(&out)));
        }
    }
    outcome(
        identical && bad_cases.is_empty(),
        format!("laws reports identical: {identical}; unexpected exits: {bad_cases:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("solver correctness: flow vs brute force", criterion_1),
        ("strong duality: gap in [0, 1e-8]", criterion_2),
        ("multiset metric: assignment = bistochastic = brute force", criterion_3),
        ("isometry suite", criterion_4),
        ("monad laws: exact and float paths", criterion_5),
        ("graded coherence", criterion_6),
        ("closed-form transport identities", criterion_7),
        ("algebra laws on normed carriers", criterion_8),
        ("density constructive steps", criterion_9),
        ("CLI determinism and exit codes", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {}: {name} ({:.2}s) -- {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failures += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
