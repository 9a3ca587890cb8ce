//! Randomized law suites: graded coherence, isometries and the closed-form
//! transport identities. Together with [`check_monad_laws`] they make up the
//! report of the `laws` command.
//!
//! Every family draws trial `t` from its own stream of `seed`, so a result
//! does not depend on which other families ran.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graded::{
    check_assoc_square, check_double_quotient, check_multiset_units, check_tuple_units, curry_flatten,
    nested_tuple_distance, NestedMultiSet, NestedTuple, Nesting3,
};
use crate::measures::{first_moment, mixture, pushforward, DiscreteMeasure, Weights};
use crate::monad::{check_expectation_square, check_iota_isometry, check_monad_laws, check_ppx_square, LawResult};
use crate::power::{multiset_distance, precompose, quotient, repeat_embedding, tuple_distance, FinUnifMap};
use crate::random::{
    random_euclidean, random_float_measure, random_grid, random_isometric_embedding, random_multiset,
    random_rational_measure, random_short_map, random_space, random_tuple, trial_rng, SamplerConfig,
};
use crate::spaces::{FiniteMetricSpace, Norm};
use crate::transport::{w1, w1_flow, Solver};
use crate::{Result, TAU_SOLVER};

const GRADED_STREAM: u64 = 1 << 40;
const ISOMETRY_STREAM: u64 = 2 << 40;
const LEMMA_STREAM: u64 = 3 << 40;

/// Largest arity of sampled nestings.
pub const MAX_ARITY: usize = 3;

fn arity<R: Rng>(rng: &mut R) -> usize {
    rng.gen_range(1..=MAX_ARITY)
}

fn measure<R: Rng>(rng: &mut R, space: &Arc<FiniteMetricSpace>, cfg: &SamplerConfig, exact: bool) -> DiscreteMeasure {
    if exact {
        random_rational_measure(rng, space, cfg.max_support, cfg.max_den)
    } else {
        random_float_measure(rng, space, cfg.max_support)
    }
}

fn uniform_map<R: Rng>(rng: &mut R, codomain: usize, fiber: usize) -> FinUnifMap {
    let mut assignment: Vec<usize> = (0..codomain * fiber).map(|s| s % codomain).collect();
    assignment.shuffle(rng);
    FinUnifMap::new(assignment, codomain).expect("uniform fibers by construction")
}

/// Unit triangles, associativity squares, the double-quotient square, the
/// naturality of the quotient maps, and the two squares relating empirical
/// measures of nested multisets to `E`. Discrepancies count mismatches, so
/// every law must hold exactly.
pub fn check_graded_coherence(seed: u64, trials: usize, cfg: &SamplerConfig) -> Result<Vec<LawResult>> {
    let mut worst = [0.0f64; 8];
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };
    for t in 0..trials {
        let mut rng = trial_rng(seed, GRADED_STREAM | t as u64);
        let n_pts = rng.gen_range(1..=cfg.max_points.max(1));
        let space = random_space(&mut rng, n_pts);
        let (m, n, l) = (arity(&mut rng), arity(&mut rng), arity(&mut rng));

        let tuple = random_tuple(&mut rng, &space, m);
        worst[0] = worst[0].max(flag(check_tuple_units(&tuple)));
        let ms = random_multiset(&mut rng, &space, m);
        worst[1] = worst[1].max(flag(check_multiset_units(&ms)));

        let grid3: Vec<Vec<Vec<usize>>> = (0..l).map(|_| random_grid(&mut rng, n_pts, n, m)).collect();
        worst[2] = worst[2].max(check_assoc_square(&Nesting3::Tuples(grid3.clone()))?);
        worst[3] = worst[3].max(check_assoc_square(&Nesting3::Multisets(grid3))?);

        let grid = random_grid(&mut rng, n_pts, n, m);
        let nested = NestedTuple::new(space.clone(), grid.clone())?;
        worst[4] = worst[4].max(flag(check_double_quotient(&nested)));

        let k = arity(&mut rng);
        let phi = uniform_map(&mut rng, m, k);
        let lhs = quotient(&precompose(&phi, &tuple)?);
        let rhs = repeat_embedding(&quotient(&tuple), k)?;
        worst[5] = worst[5].max(flag(lhs == rhs));

        let nm = NestedMultiSet::new(space.clone(), grid)?;
        worst[6] = worst[6].max(flag(check_expectation_square(&nm)?));
        worst[7] = worst[7].max(flag(check_ppx_square(&nm)?));
    }
    let names = [
        "tuple_units",
        "multiset_units",
        "tuple_associativity",
        "multiset_associativity",
        "double_quotient",
        "quotient_naturality",
        "expectation_square",
        "empirical_square",
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(name, w)| LawResult::new(format!("graded.{name}"), trials, w, 0.0))
        .collect())
}

/// Distance preservation of `δ`, the empirical map on multisets, the
/// repetition embeddings, precomposition with uniform maps, and currying.
pub fn check_isometries(seed: u64, trials: usize, cfg: &SamplerConfig) -> Result<Vec<LawResult>> {
    let mut worst = [0.0f64; 5];
    for t in 0..trials {
        let mut rng = trial_rng(seed, ISOMETRY_STREAM | t as u64);
        let n_pts = rng.gen_range(1..=cfg.max_points.max(1));
        let space = random_space(&mut rng, n_pts);

        let (x, y) = (rng.gen_range(0..n_pts), rng.gen_range(0..n_pts));
        let dx = DiscreteMeasure::dirac(space.clone(), x)?;
        let dy = DiscreteMeasure::dirac(space.clone(), y)?;
        worst[0] = worst[0].max((w1_flow(&dx, &dy)?.cost - space.d(x, y)).abs());

        let size = rng.gen_range(1..=6);
        let a = random_multiset(&mut rng, &space, size);
        let b = random_multiset(&mut rng, &space, size);
        worst[1] = worst[1].max(check_iota_isometry(&a, &b)?);

        let (m, k) = (arity(&mut rng), arity(&mut rng));
        let a = random_multiset(&mut rng, &space, m);
        let b = random_multiset(&mut rng, &space, m);
        let rep = multiset_distance(&repeat_embedding(&a, k)?, &repeat_embedding(&b, k)?)?;
        worst[2] = worst[2].max((rep - multiset_distance(&a, &b)?).abs());

        let ta = random_tuple(&mut rng, &space, m);
        let tb = random_tuple(&mut rng, &space, m);
        let phi = uniform_map(&mut rng, m, k);
        let pulled = tuple_distance(&precompose(&phi, &ta)?, &precompose(&phi, &tb)?)?;
        worst[3] = worst[3].max((pulled - tuple_distance(&ta, &tb)?).abs());

        let n = arity(&mut rng);
        let ga = NestedTuple::new(space.clone(), random_grid(&mut rng, n_pts, n, m))?;
        let gb = NestedTuple::new(space.clone(), random_grid(&mut rng, n_pts, n, m))?;
        let flat = tuple_distance(&curry_flatten(&ga), &curry_flatten(&gb))?;
        worst[4] = worst[4].max((nested_tuple_distance(&ga, &gb)? - flat).abs());
    }
    let names = ["dirac", "empirical", "repeat", "precompose", "curry"];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(name, w)| LawResult::new(format!("isometry.{name}"), trials, w, TAU_SOLVER))
        .collect())
}

/// Closed-form transport identities on random instances:
///
/// - `lemma.dirac_moment`: `W1(δ(x0), p) = Σ p_i d(x0, x_i)`;
/// - `lemma.mixture_scaling`: `W1(λq1 + (1-λ)p, λq2 + (1-λ)p) = λ W1(q1, q2)`;
/// - `lemma.pushforward_short`: `W1(f_*p, f_*q) <= W1(p, q)` for short `f`;
/// - `lemma.isometric_embedding`: `W1` is unchanged by isometric embeddings.
pub fn check_lemmas(seed: u64, trials: usize, cfg: &SamplerConfig) -> Result<Vec<LawResult>> {
    let mut worst = [0.0f64; 4];
    for t in 0..trials {
        let mut rng = trial_rng(seed, LEMMA_STREAM | t as u64);
        let exact = t % 2 == 0;
        let n_pts = rng.gen_range(1..=cfg.max_points.max(1));
        let space = random_space(&mut rng, n_pts);

        let p = measure(&mut rng, &space, cfg, exact);
        let x0 = rng.gen_range(0..n_pts);
        let dirac = DiscreteMeasure::dirac(space.clone(), x0)?;
        let cost = w1(&dirac, &p, Solver::Auto)?.cost;
        worst[0] = worst[0].max((cost - first_moment(&p, x0)?).abs());

        let q1 = measure(&mut rng, &space, cfg, exact);
        let q2 = measure(&mut rng, &space, cfg, exact);
        let (lambda, coeffs) = if exact {
            let den = rng.gen_range(1..=cfg.max_den);
            let k = rng.gen_range(0..=den);
            (k as f64 / den as f64, Weights::from_counts(&[k, den - k], den)?)
        } else {
            let l: f64 = rng.gen_range(0.0..=1.0);
            (l, Weights::new(vec![l, 1.0 - l])?)
        };
        let a = mixture(&coeffs, &[q1.clone(), p.clone()])?;
        let b = mixture(&coeffs, &[q2.clone(), p.clone()])?;
        let lhs = w1(&a, &b, Solver::Flow)?.cost;
        let rhs = lambda * w1(&q1, &q2, Solver::Flow)?.cost;
        worst[1] = worst[1].max((lhs - rhs).abs());

        let norm = Norm::ALL[rng.gen_range(0..3)];
        let dim = rng.gen_range(1..=2);
        let cloud = random_euclidean(&mut rng, n_pts, dim, norm);
        let x = Arc::new(cloud.metric_space());
        let p = measure(&mut rng, &x, cfg, exact);
        let q = measure(&mut rng, &x, cfg, exact);
        let base = w1(&p, &q, Solver::Flow)?.cost;

        let (f, y) = random_short_map(&mut rng, &cloud);
        let pushed = w1(&pushforward(&f, y.clone(), &p)?, &pushforward(&f, y, &q)?, Solver::Flow)?.cost;
        worst[2] = worst[2].max(pushed - base);

        let extra = rng.gen_range(1..=3);
        let (g, z) = random_isometric_embedding(&mut rng, &cloud, extra);
        let embedded = w1(&p.relabel(&g, z.clone())?, &q.relabel(&g, z)?, Solver::Flow)?.cost;
        worst[3] = worst[3].max((embedded - base).abs());
    }
    let names = [
        "dirac_moment",
        "mixture_scaling",
        "pushforward_short",
        "isometric_embedding",
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(name, w)| LawResult::new(format!("lemma.{name}"), trials, w.max(0.0), TAU_SOLVER))
        .collect())
}

/// All randomized law families, in a fixed order.
pub fn law_suite(seed: u64, trials: usize, cfg: &SamplerConfig) -> Result<Vec<LawResult>> {
    let mut out = check_monad_laws(seed, trials, cfg)?;
    out.extend(check_graded_coherence(seed, trials, cfg)?);
    out.extend(check_isometries(seed, trials, cfg)?);
    out.extend(check_lemmas(seed, trials, cfg)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let cfg = SamplerConfig::default();
        let a = law_suite(11, 30, &cfg).unwrap();
        for r in &a {
            assert!(r.pass, "{r:?}");
        }
        assert_eq!(a, law_suite(11, 30, &cfg).unwrap());
    }

    #[test]
    fn singleton_space_is_exact() {
        let cfg = SamplerConfig {
            max_points: 1,
            ..SamplerConfig::default()
        };
        for r in law_suite(2, 20, &cfg).unwrap() {
            assert!(r.worst_discrepancy <= 1e-15, "{r:?}");
        }
    }
}
