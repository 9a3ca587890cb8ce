//! Power spaces `X^n` and symmetrized powers `X_n`.
//!
//! A [`Tuple`] of length `n` is a point of `X^n` with the ℓ1 metric scaled
//! by `1/n`. A [`MultiSet`] is a point of `X_n`: the tuple up to reordering,
//! stored as an ascending index list, with the distance minimized over all
//! pairings. Maps between index sets are [`FinUnifMap`]s, whose fibers all
//! have the same size; precomposition with them embeds isometrically.

use std::sync::Arc;

use crate::assignment::hungarian;
use crate::measures::same_space;
use crate::spaces::FiniteMetricSpace;
use crate::{Error, Result};

/// An ordered list of points, an element of `X^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    space: Arc<FiniteMetricSpace>,
    entries: Vec<usize>,
}

impl Tuple {
    pub fn new(space: Arc<FiniteMetricSpace>, entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::OutOfRange("tuples have length at least 1".into()));
        }
        entries.iter().try_for_each(|&e| space.check_index(e))?;
        Ok(Tuple { space, entries })
    }

    /// `(x, x, ..., x)` with `n` copies.
    pub fn diagonal(space: Arc<FiniteMetricSpace>, x: usize, n: usize) -> Result<Self> {
        Self::new(space, vec![x; n])
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A sorted list of points, an element of `X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSet {
    space: Arc<FiniteMetricSpace>,
    entries: Vec<usize>,
}

impl MultiSet {
    /// Sorts `entries` into canonical order.
    pub fn new(space: Arc<FiniteMetricSpace>, mut entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::OutOfRange("multisets have size at least 1".into()));
        }
        entries.iter().try_for_each(|&e| space.check_index(e))?;
        entries.sort_unstable();
        Ok(MultiSet { space, entries })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct points with their multiplicities, in ascending order.
    pub fn counts(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &e in &self.entries {
            match out.last_mut() {
                Some((x, c)) if *x == e => *c += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }
}

fn check_pair(sa: &Arc<FiniteMetricSpace>, a: &[usize], sb: &Arc<FiniteMetricSpace>, b: &[usize]) -> Result<()> {
    if !same_space(sa, sb) {
        return Err(Error::SpaceMismatch);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// `(1/n) Σ_i d(a_i, b_i)`.
pub fn tuple_distance(a: &Tuple, b: &Tuple) -> Result<f64> {
    check_pair(&a.space, &a.entries, &b.space, &b.entries)?;
    let n = a.len() as f64;
    let s: f64 = a.entries.iter().zip(&b.entries).map(|(&x, &y)| a.space.d(x, y)).sum();
    Ok(s / n)
}

/// Row-major cost matrix `d(a_i, b_j)`.
pub(crate) fn pairing_costs(space: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> Vec<f64> {
    let mut cost = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            cost.push(space.d(x, y));
        }
    }
    cost
}

/// `min_σ (1/n) Σ_i d(a_i, b_σ(i))`, by min-cost perfect matching.
pub fn multiset_distance(a: &MultiSet, b: &MultiSet) -> Result<f64> {
    Ok(multiset_matching(a, b)?.0)
}

/// Like [`multiset_distance`], also returning an optimal pairing `i -> σ(i)`.
pub fn multiset_matching(a: &MultiSet, b: &MultiSet) -> Result<(f64, Vec<usize>)> {
    check_pair(&a.space, &a.entries, &b.space, &b.entries)?;
    let n = a.len();
    let cost = pairing_costs(&a.space, &a.entries, &b.entries);
    let (total, perm) = hungarian(&cost, n);
    Ok((total / n as f64, perm))
}

/// Forgets the order of a tuple.
pub fn quotient(t: &Tuple) -> MultiSet {
    let mut entries = t.entries.clone();
    entries.sort_unstable();
    MultiSet {
        space: t.space.clone(),
        entries,
    }
}

/// Repeats every entry `n` times: the embedding `X_m -> X_{mn}`.
pub fn repeat_embedding(m: &MultiSet, n: usize) -> Result<MultiSet> {
    if n == 0 {
        return Err(Error::ZeroMultiplicity);
    }
    let entries = m.entries.iter().flat_map(|&e| std::iter::repeat_n(e, n)).collect();
    Ok(MultiSet {
        space: m.space.clone(),
        entries,
    })
}

/// A map `S -> T` between `{0..|S|}` and `{0..|T|}` whose fibers all have
/// `|S| / |T|` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinUnifMap {
    codomain: usize,
    assignment: Vec<usize>,
}

impl FinUnifMap {
    pub fn new(assignment: Vec<usize>, codomain: usize) -> Result<Self> {
        if assignment.is_empty() || codomain == 0 {
            return Err(Error::NotUniform("sets must be nonempty".into()));
        }
        if let Some(&t) = assignment.iter().find(|&&t| t >= codomain) {
            return Err(Error::IndexOutOfRange {
                index: t,
                size: codomain,
            });
        }
        if assignment.len() % codomain != 0 {
            return Err(Error::NotUniform(format!(
                "|T| = {codomain} does not divide |S| = {}",
                assignment.len()
            )));
        }
        let want = assignment.len() / codomain;
        let fibers = fiber_sizes(&assignment, codomain);
        if let Some((t, &size)) = fibers.iter().enumerate().find(|(_, &s)| s != want) {
            return Err(Error::NotUniform(format!(
                "fiber over {t} has {size} elements, expected {want}"
            )));
        }
        Ok(FinUnifMap { codomain, assignment })
    }

    /// The unique map `S -> {0}`.
    pub fn terminal(domain: usize) -> Result<Self> {
        Self::new(vec![0; domain], 1)
    }

    pub fn domain(&self) -> usize {
        self.assignment.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn fiber_size(&self) -> usize {
        self.assignment.len() / self.codomain
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

fn fiber_sizes(assignment: &[usize], codomain: usize) -> Vec<usize> {
    let mut sizes = vec![0; codomain];
    for &t in assignment {
        sizes[t] += 1;
    }
    sizes
}

/// Whether `assignment` (with codomain `{0..=max}`) is surjective with
/// equal-sized fibers.
pub fn validate_finunif(assignment: &[usize]) -> bool {
    let Some(&max) = assignment.iter().max() else {
        return false;
    };
    let sizes = fiber_sizes(assignment, max + 1);
    sizes[0] > 0 && sizes.iter().all(|&s| s == sizes[0])
}

/// `t ∘ φ`: the tuple `s ↦ t[φ(s)]` of length `|S|`.
pub fn precompose(phi: &FinUnifMap, t: &Tuple) -> Result<Tuple> {
    if t.len() != phi.codomain {
        return Err(Error::LengthMismatch(t.len(), phi.codomain));
    }
    Ok(Tuple {
        space: t.space.clone(),
        entries: phi.assignment.iter().map(|&s| t.entries[s]).collect(),
    })
}
