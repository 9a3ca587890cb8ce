//! The Kantorovich monad on finite rosters.
//!
//! - unit: [`DiscreteMeasure::dirac`], lifted to measures by [`unit_p`];
//! - multiplication: [`expectation`], `PPX -> PX`;
//! - empirical distributions [`empirical`] and [`empirical_sym`], the
//!   bridge from power spaces to measures.
//!
//! Measures on measures are [`NestedMeasure`]s (and [`NestedMeasure3`] one
//! level higher); inner measures are deduplicated so equality is decidable.

use std::sync::Arc;

use num_traits::{CheckedAdd, CheckedMul, Zero};
use rand::Rng;
use serde::Serialize;

use crate::graded::{flatten_multiset, NestedMultiSet};
use crate::measures::{
    exact_discrepancy, measures_equal, mixture, ratio_to_f64, same_space, weight_discrepancy, DiscreteMeasure,
    Rational, Weights,
};
use crate::power::{multiset_distance, MultiSet, Tuple};
use crate::random::{random_float_measure, random_rational_measure, random_space, trial_rng, SamplerConfig};
use crate::spaces::FiniteMetricSpace;
use crate::{Error, Result, TAU_WEIGHT};

/// Uniform measure on the entries of a tuple.
pub fn empirical(t: &Tuple) -> DiscreteMeasure {
    uniform_on(t.space(), t.entries())
}

/// Uniform measure on the entries of a multiset.
pub fn empirical_sym(m: &MultiSet) -> DiscreteMeasure {
    uniform_on(m.space(), m.entries())
}

fn uniform_on(space: &Arc<FiniteMetricSpace>, entries: &[usize]) -> DiscreteMeasure {
    let n = entries.len() as i64;
    DiscreteMeasure::from_rational(space.clone(), entries.to_vec(), vec![1; entries.len()], n)
        .expect("entries validated by the power type")
}

/// The length-`n` multiset whose empirical measure is `p`.
///
/// Exists iff `p` is rational with every weight a multiple of `1/n`.
pub fn multiset_witness(p: &DiscreteMeasure, n: usize) -> Result<MultiSet> {
    let exact = p.exact_weights().ok_or(Error::NotRational)?;
    let mut entries = Vec::with_capacity(n);
    for (&x, w) in p.support().iter().zip(exact) {
        let scaled = *w * Rational::from_integer(n as i64);
        if !scaled.is_integer() {
            return Err(Error::OutOfRange(format!(
                "weight {w} at point {x} is not a multiple of 1/{n}"
            )));
        }
        entries.extend(std::iter::repeat_n(x, scaled.to_integer() as usize));
    }
    MultiSet::new(p.space().clone(), entries)
}

/// Sums `(item, weight, exact)` triples over equal items.
fn merge_weighted<T>(
    items: Vec<(T, f64, Option<Rational>)>,
    eq: impl Fn(&T, &T) -> bool,
) -> (Vec<T>, Vec<f64>, Option<Vec<Rational>>) {
    let all_exact = items.iter().all(|i| i.2.is_some());
    let mut keys: Vec<T> = Vec::new();
    let mut float: Vec<f64> = Vec::new();
    let mut exact: Option<Vec<Rational>> = all_exact.then(Vec::new);
    for (item, w, e) in items {
        match keys.iter().position(|k| eq(k, &item)) {
            Some(i) => {
                float[i] += w;
                if let Some(ex) = exact.as_mut() {
                    match ex[i].checked_add(&e.unwrap()) {
                        Some(v) => ex[i] = v,
                        None => exact = None,
                    }
                }
            }
            None => {
                keys.push(item);
                float.push(w);
                if let Some(ex) = exact.as_mut() {
                    ex.push(e.unwrap());
                }
            }
        }
    }
    if let Some(ex) = &exact {
        float = ex.iter().map(ratio_to_f64).collect();
    }
    (keys, float, exact)
}

fn measure_order(a: &DiscreteMeasure, b: &DiscreteMeasure) -> std::cmp::Ordering {
    a.support().cmp(b.support()).then_with(|| {
        a.weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn same_measure(a: &DiscreteMeasure, b: &DiscreteMeasure) -> bool {
    match (a.exact_weights(), b.exact_weights()) {
        (Some(x), Some(y)) => a.support() == b.support() && x == y,
        _ => measures_equal(a, b, TAU_WEIGHT).unwrap_or(false),
    }
}

/// A finitely supported measure on `PX`: distinct inner measures with
/// positive outer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedMeasure {
    space: Arc<FiniteMetricSpace>,
    inner: Vec<DiscreteMeasure>,
    outer: Vec<f64>,
    outer_exact: Option<Vec<Rational>>,
}

impl NestedMeasure {
    /// Merges equal inner measures (exactly when rational, within
    /// [`TAU_WEIGHT`] otherwise) and sorts the result canonically.
    pub fn new(inner: Vec<DiscreteMeasure>, outer: &Weights) -> Result<Self> {
        if inner.len() != outer.len() {
            return Err(Error::LengthMismatch(inner.len(), outer.len()));
        }
        let space = inner.first().ok_or(Error::EmptySupport)?.space().clone();
        if inner.iter().any(|m| !same_space(m.space(), &space)) {
            return Err(Error::SpaceMismatch);
        }
        let items = inner
            .into_iter()
            .enumerate()
            .filter(|(i, _)| outer.as_slice()[*i] > 0.0)
            .map(|(i, m)| (m, outer.as_slice()[i], outer.exact_values().map(|e| e[i])))
            .collect();
        let (keys, float, exact) = merge_weighted(items, same_measure);
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| measure_order(&keys[a], &keys[b]));
        Ok(NestedMeasure {
            space,
            inner: order.iter().map(|&i| keys[i].clone()).collect(),
            outer: order.iter().map(|&i| float[i]).collect(),
            outer_exact: exact.map(|e| order.iter().map(|&i| e[i]).collect()),
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn inner(&self) -> &[DiscreteMeasure] {
        &self.inner
    }

    pub fn outer_weights(&self) -> &[f64] {
        &self.outer
    }

    pub fn outer_exact(&self) -> Option<&[Rational]> {
        self.outer_exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    fn weights(&self) -> Weights {
        match &self.outer_exact {
            Some(e) => Weights::exact(e.clone()).expect("stored weights are on the simplex"),
            None => Weights::new(self.outer.clone()).expect("stored weights are on the simplex"),
        }
    }
}

/// Equality of nested measures up to `tol` on both layers of weights.
pub fn nested_equal(a: &NestedMeasure, b: &NestedMeasure, tol: f64) -> bool {
    if a.len() != b.len() || !same_space(&a.space, &b.space) {
        return false;
    }
    a.inner.iter().zip(&a.outer).all(|(m, w)| {
        b.inner
            .iter()
            .zip(&b.outer)
            .any(|(m2, w2)| (w - w2).abs() <= tol && measures_equal(m, m2, tol).unwrap_or(false))
    })
}

/// `E(μ) = Σ_i α_i p_i`, the expected distribution.
pub fn expectation(mu: &NestedMeasure) -> Result<DiscreteMeasure> {
    mixture(&mu.weights(), &mu.inner)
}

/// `δ_{PX}(p)`: the nested measure concentrated on `p`.
pub fn unit_p(p: &DiscreteMeasure) -> NestedMeasure {
    NestedMeasure {
        space: p.space().clone(),
        inner: vec![p.clone()],
        outer: vec![1.0],
        outer_exact: Some(vec![Rational::from_integer(1)]),
    }
}

/// Applies a kernel `x ↦ k(x)` pointwise: the nested measure with inner
/// measures `k(x)` weighted by `p({x})`.
pub fn map_p(kernel: impl Fn(usize) -> Result<DiscreteMeasure>, p: &DiscreteMeasure) -> Result<NestedMeasure> {
    let inner = p.support().iter().map(|&x| kernel(x)).collect::<Result<Vec<_>>>()?;
    let w = match p.exact_weights() {
        Some(e) => Weights::exact(e.to_vec())?,
        None => Weights::new(p.weights().to_vec())?,
    };
    NestedMeasure::new(inner, &w)
}

/// `Pδ(p)`.
pub fn map_dirac(p: &DiscreteMeasure) -> Result<NestedMeasure> {
    let space = p.space().clone();
    map_p(|x| DiscreteMeasure::dirac(space.clone(), x), p)
}

/// A finitely supported measure on `PPX`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedMeasure3 {
    inner: Vec<NestedMeasure>,
    outer: Weights,
}

impl NestedMeasure3 {
    pub fn new(inner: Vec<NestedMeasure>, outer: Weights) -> Result<Self> {
        if inner.len() != outer.len() {
            return Err(Error::LengthMismatch(inner.len(), outer.len()));
        }
        let space = inner.first().ok_or(Error::EmptySupport)?.space.clone();
        if inner.iter().any(|m| !same_space(&m.space, &space)) {
            return Err(Error::SpaceMismatch);
        }
        Ok(NestedMeasure3 { inner, outer })
    }

    pub fn inner(&self) -> &[NestedMeasure] {
        &self.inner
    }
}

/// `E_{PX}`: flattens the two outer layers, `Σ_i α_i Σ_j β_ij δ(p_ij)`
/// to `Σ_ij α_i β_ij δ(p_ij)`.
pub fn flatten_outer(m: &NestedMeasure3) -> Result<NestedMeasure> {
    let mut inner = Vec::new();
    let mut float = Vec::new();
    let mut exact: Option<Vec<Rational>> = m.outer.exact_values().map(|_| Vec::new());
    for (i, mu) in m.inner.iter().enumerate() {
        let a = m.outer.as_slice()[i];
        for (j, p) in mu.inner.iter().enumerate() {
            inner.push(p.clone());
            float.push(a * mu.outer[j]);
            let prod = match (m.outer.exact_values(), &mu.outer_exact) {
                (Some(ea), Some(eb)) => ea[i].checked_mul(&eb[j]),
                _ => None,
            };
            match (exact.as_mut(), prod) {
                (Some(ex), Some(v)) => ex.push(v),
                _ => exact = None,
            }
        }
    }
    let w = match exact {
        Some(e) => Weights::exact(e)?,
        None => Weights::new(float)?,
    };
    NestedMeasure::new(inner, &w)
}

/// `P E`: replaces every inner nested measure by its expectation.
pub fn map_expectation(m: &NestedMeasure3) -> Result<NestedMeasure> {
    let inner = m.inner.iter().map(expectation).collect::<Result<Vec<_>>>()?;
    NestedMeasure::new(inner, &m.outer)
}

/// One law checked over many trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawResult {
    pub law: String,
    pub trials: usize,
    pub worst_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl LawResult {
    pub fn new(law: impl Into<String>, trials: usize, worst: f64, tolerance: f64) -> Self {
        LawResult {
            law: law.into(),
            trials,
            worst_discrepancy: worst,
            tolerance,
            pass: worst <= tolerance,
        }
    }
}

/// Discrepancy between two measures: exact when both are rational.
pub fn measure_discrepancy(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    match exact_discrepancy(p, q)? {
        Some(r) => Ok(ratio_to_f64(&r)),
        None => weight_discrepancy(p, q),
    }
}

/// Tolerance of the float path of [`check_monad_laws`].
pub const FLOAT_LAW_TOLERANCE: f64 = 1e-12;

fn sample_measure<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteMetricSpace>,
    cfg: &SamplerConfig,
    exact: bool,
) -> DiscreteMeasure {
    if exact {
        random_rational_measure(rng, space, cfg.max_support, cfg.max_den)
    } else {
        random_float_measure(rng, space, cfg.max_support)
    }
}

fn sample_outer<R: Rng>(rng: &mut R, k: usize, cfg: &SamplerConfig, exact: bool) -> Weights {
    if exact {
        let den = rng.gen_range(k as i64..=cfg.max_den.max(k as i64));
        let counts = crate::random::random_composition(rng, den, k);
        Weights::from_counts(&counts, den).expect("composition")
    } else {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / t).collect();
        let head: f64 = w[..k - 1].iter().sum();
        w[k - 1] = 1.0 - head;
        Weights::new(w).expect("normalised")
    }
}

/// A random nested measure with at most `cfg.max_support` inner measures.
pub fn random_nested<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteMetricSpace>,
    cfg: &SamplerConfig,
    exact: bool,
) -> NestedMeasure {
    let k = rng.gen_range(1..=cfg.max_support.max(1));
    let inner = (0..k).map(|_| sample_measure(rng, space, cfg, exact)).collect();
    let w = sample_outer(rng, k, cfg, exact);
    NestedMeasure::new(inner, &w).expect("shared space")
}

/// Checks `E∘δP = id`, `E∘Pδ = id` and `E∘PE = E∘EP` on random instances.
///
/// Runs every law on rational inputs (exact arithmetic, tolerance 0) and on
/// float inputs (tolerance [`FLOAT_LAW_TOLERANCE`]). Trial `t` draws from
/// stream `t` of `seed`.
pub fn check_monad_laws(seed: u64, trials: usize, cfg: &SamplerConfig) -> Result<Vec<LawResult>> {
    let mut out = Vec::new();
    for (exact, tag, tol) in [(true, "exact", 0.0), (false, "float", FLOAT_LAW_TOLERANCE)] {
        let mut worst = [0.0f64; 3];
        for t in 0..trials {
            let mut rng = trial_rng(seed, t as u64 * 2 + u64::from(!exact));
            let n = rng.gen_range(1..=cfg.max_points.max(1));
            let space = random_space(&mut rng, n);
            let p = sample_measure(&mut rng, &space, cfg, exact);

            let left = expectation(&unit_p(&p))?;
            worst[0] = worst[0].max(measure_discrepancy(&left, &p)?);
            let right = expectation(&map_dirac(&p)?)?;
            worst[1] = worst[1].max(measure_discrepancy(&right, &p)?);

            let k = rng.gen_range(1..=cfg.max_support.max(1));
            let inner = (0..k).map(|_| random_nested(&mut rng, &space, cfg, exact)).collect();
            let w = sample_outer(&mut rng, k, cfg, exact);
            let m3 = NestedMeasure3::new(inner, w)?;
            let a = expectation(&map_expectation(&m3)?)?;
            let b = expectation(&flatten_outer(&m3)?)?;
            worst[2] = worst[2].max(measure_discrepancy(&a, &b)?);
        }
        for (name, w) in ["left_unit", "right_unit", "associativity"].iter().zip(worst) {
            out.push(LawResult::new(format!("monad.{name}.{tag}"), trials, w, tol));
        }
    }
    Ok(out)
}

/// `|W1(ι(a), ι(b)) - d_{X_n}(a, b)|`, flow solver against assignment solver.
pub fn check_iota_isometry(a: &MultiSet, b: &MultiSet) -> Result<f64> {
    let w = crate::transport::w1_flow(&empirical_sym(a), &empirical_sym(b))?.cost;
    let d = multiset_distance(a, b)?;
    Ok((w - d).abs())
}

/// The outer empirical measure of the inner empirical measures, computed
/// both ways around the square: map inner multisets to measures and then
/// take the outer empirical measure, or take the outer empirical measure on
/// multisets and then push it along the inner empirical map.
pub fn check_ppx_square(nm: &NestedMultiSet) -> Result<bool> {
    let n = nm.outer_len();
    let inners = nm.inner_multisets();

    // Measures first, then the outer empirical measure.
    let measures: Vec<DiscreteMeasure> = inners.iter().map(empirical_sym).collect();
    let a = NestedMeasure::new(measures, &Weights::uniform(n)?)?;

    // Outer empirical measure on X_m first: distinct multisets with counts.
    let mut counts: Vec<(Vec<usize>, i64)> = Vec::new();
    for m in &inners {
        match counts.iter_mut().find(|(k, _)| k.as_slice() == m.entries()) {
            Some((_, c)) => *c += 1,
            None => counts.push((m.entries().to_vec(), 1)),
        }
    }
    let w = Weights::from_counts(&counts.iter().map(|c| c.1).collect::<Vec<_>>(), n as i64)?;
    let pushed = counts
        .iter()
        .map(|(e, _)| Ok(empirical_sym(&MultiSet::new(nm.space().clone(), e.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    let b = NestedMeasure::new(pushed, &w)?;

    Ok(a.outer_exact == b.outer_exact && a.inner == b.inner)
}

/// Expectation of the empirical measure of empirical measures against the
/// empirical measure of the flattened multiset.
pub fn check_expectation_square(nm: &NestedMultiSet) -> Result<bool> {
    let measures: Vec<DiscreteMeasure> = nm.inner_multisets().iter().map(empirical_sym).collect();
    let mu = NestedMeasure::new(measures, &Weights::uniform(nm.outer_len())?)?;
    let lhs = expectation(&mu)?;
    let rhs = empirical_sym(&flatten_multiset(nm));
    Ok(lhs.support() == rhs.support() && lhs.exact_weights() == rhs.exact_weights() && lhs.exact_weights().is_some())
}

/// Whether every weight of `p` is a multiple of `1/n` for some `n`, i.e. `p`
/// lies in the image of some empirical map.
pub fn is_empirical(p: &DiscreteMeasure) -> bool {
    p.exact_weights().is_some_and(|e| e.iter().all(|w| !w.is_zero()))
}
