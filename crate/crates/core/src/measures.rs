//! Finitely supported probability measures on a [`FiniteMetricSpace`].
//!
//! A [`DiscreteMeasure`] refers to points by index into a shared roster, so
//! support comparisons are exact and only weights carry a tolerance. Weights
//! are `f64`; when a measure is built from exact rationals the rationals are
//! kept alongside and propagated by every operation that can do so without
//! overflow.

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive, Zero};

use crate::spaces::FiniteMetricSpace;
use crate::{Error, Result, TAU_WEIGHT};

/// Exact weights. Overflowing arithmetic drops back to the float path.
pub type Rational = Ratio<i64>;

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Whether two handles denote the same roster.
pub fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A weight vector on the simplex, optionally with exact rational values.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    float: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl Weights {
    /// Float weights; entries must be nonnegative and sum to 1 within [`TAU_WEIGHT`].
    pub fn new(float: Vec<f64>) -> Result<Self> {
        crate::spaces::check_simplex(&float, TAU_WEIGHT)?;
        Ok(Weights { float, exact: None })
    }

    /// Exact weights; entries must be nonnegative and sum to exactly 1.
    pub fn exact(exact: Vec<Rational>) -> Result<Self> {
        check_exact_simplex(&exact)?;
        let float = exact.iter().map(ratio_to_f64).collect();
        Ok(Weights {
            float,
            exact: Some(exact),
        })
    }

    /// `k_i / den` for each count `k_i`; the counts must sum to `den`.
    pub fn from_counts(counts: &[i64], den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::OutOfRange(format!("denominator {den} must be positive")));
        }
        Self::exact(counts.iter().map(|&k| Rational::new(k, den)).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_counts(&vec![1; n], n as i64)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.float
    }

    pub fn exact_values(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.float.len()
    }

    pub fn is_empty(&self) -> bool {
        self.float.is_empty()
    }
}

fn check_exact_simplex(exact: &[Rational]) -> Result<()> {
    if let Some(w) = exact.iter().find(|w| **w < Rational::zero()) {
        return Err(Error::InvalidWeight(ratio_to_f64(w)));
    }
    let sum =
        checked_sum(exact.iter().cloned()).ok_or_else(|| Error::OutOfRange("rational weights overflow".into()))?;
    if exact.is_empty() || sum != Rational::from_integer(1) {
        return Err(Error::NotOnSimplex {
            sum: ratio_to_f64(&sum),
        });
    }
    Ok(())
}

pub(crate) fn checked_sum(mut it: impl Iterator<Item = Rational>) -> Option<Rational> {
    it.try_fold(Rational::zero(), |acc, r| acc.checked_add(&r))
}

/// A finitely supported probability measure in canonical form: strictly
/// increasing support, strictly positive weights.
///
/// Equality compares roster, support and float weights; the exact block is
/// compared only when both sides carry one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    space: Arc<FiniteMetricSpace>,
    support: Vec<usize>,
    weights: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        let exact_ok = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        };
        same_space(&self.space, &other.space)
            && self.support == other.support
            && self.weights == other.weights
            && exact_ok
    }
}

struct Atom {
    point: usize,
    weight: f64,
    exact: Option<Rational>,
}

impl DiscreteMeasure {
    /// Builds and canonicalizes a measure from float weights.
    ///
    /// Repeated support points are merged and zero weights dropped.
    pub fn new(space: Arc<FiniteMetricSpace>, support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::LengthMismatch(support.len(), weights.len()));
        }
        crate::spaces::check_simplex(&weights, TAU_WEIGHT).or_else(|e| match e {
            Error::NotOnSimplex { .. } if weights.is_empty() => Err(Error::EmptySupport),
            e => Err(e),
        })?;
        let atoms = support
            .into_iter()
            .zip(weights)
            .map(|(point, weight)| Atom {
                point,
                weight,
                exact: None,
            })
            .collect();
        Self::from_atoms(space, atoms)
    }

    /// Builds a measure with exact weights `num_i / den`.
    pub fn from_rational(space: Arc<FiniteMetricSpace>, support: Vec<usize>, num: Vec<i64>, den: i64) -> Result<Self> {
        if support.len() != num.len() {
            return Err(Error::LengthMismatch(support.len(), num.len()));
        }
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let w = Weights::from_counts(&num, den)?;
        Self::with_weights(space, support, &w)
    }

    /// Builds a measure from a [`Weights`] vector, keeping exact values if present.
    pub fn with_weights(space: Arc<FiniteMetricSpace>, support: Vec<usize>, w: &Weights) -> Result<Self> {
        if support.len() != w.len() {
            return Err(Error::LengthMismatch(support.len(), w.len()));
        }
        let atoms = support
            .into_iter()
            .enumerate()
            .map(|(i, point)| Atom {
                point,
                weight: w.float[i],
                exact: w.exact.as_ref().map(|e| e[i]),
            })
            .collect();
        Self::from_atoms(space, atoms)
    }

    pub fn dirac(space: Arc<FiniteMetricSpace>, x: usize) -> Result<Self> {
        space.check_index(x)?;
        Ok(DiscreteMeasure {
            space,
            support: vec![x],
            weights: vec![1.0],
            exact: Some(vec![Rational::from_integer(1)]),
        })
    }

    fn from_atoms(space: Arc<FiniteMetricSpace>, mut atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            space.check_index(a.point)?;
        }
        atoms.sort_by_key(|a| a.point);
        let all_exact = atoms.iter().all(|a| a.exact.is_some());

        let mut support: Vec<usize> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut exact: Option<Vec<Rational>> = all_exact.then(Vec::new);
        for a in atoms {
            if support.last() == Some(&a.point) {
                *weights.last_mut().unwrap() += a.weight;
                if let Some(ex) = exact.as_mut() {
                    let last = ex.last_mut().unwrap();
                    match last.checked_add(&a.exact.unwrap()) {
                        Some(v) => *last = v,
                        None => exact = None,
                    }
                }
            } else {
                support.push(a.point);
                weights.push(a.weight);
                if let Some(ex) = exact.as_mut() {
                    ex.push(a.exact.unwrap());
                }
            }
        }

        if let Some(ex) = &exact {
            weights = ex.iter().map(ratio_to_f64).collect();
        }
        let keep: Vec<bool> = weights.iter().map(|&w| w > 0.0).collect();
        let mut k = keep.iter();
        support.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        weights.retain(|_| *k.next().unwrap());
        if let Some(ex) = exact.as_mut() {
            let mut k = keep.iter();
            ex.retain(|_| *k.next().unwrap());
        }
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(DiscreteMeasure {
            space,
            support,
            weights,
            exact,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_weights(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.exact.is_some()
    }

    /// Iterator over `(point, weight)` pairs in support order.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn weight_of(&self, x: usize) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    pub fn exact_weight_of(&self, x: usize) -> Option<Rational> {
        let ex = self.exact.as_ref()?;
        Some(match self.support.binary_search(&x) {
            Ok(i) => ex[i],
            Err(_) => Rational::zero(),
        })
    }

    /// The least common denominator of the exact weights.
    pub fn common_denominator(&self) -> Option<u64> {
        let ex = self.exact.as_ref()?;
        let mut l: i64 = 1;
        for r in ex {
            l = l.lcm(r.denom());
        }
        u64::try_from(l).ok()
    }

    /// Exact weights written over their least common denominator `D`:
    /// returns `(D, numerators)`.
    pub fn rational_block(&self) -> Option<(u64, Vec<u64>)> {
        let den = self.common_denominator()?;
        let nums = self
            .exact
            .as_ref()?
            .iter()
            .map(|r| {
                let scaled = *r * Rational::from_integer(den as i64);
                scaled.to_integer() as u64
            })
            .collect();
        Some((den, nums))
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The same weights on a different roster, via an index relabelling
    /// `embed: X -> Y` (used for isometric embeddings into larger rosters).
    pub fn relabel(&self, embed: &[usize], target: Arc<FiniteMetricSpace>) -> Result<Self> {
        pushforward(embed, target, self)
    }
}

/// `f_* p`: the image of `p` under the index map `f : X -> Y`.
///
/// Weights landing on the same point are merged in ascending order of their
/// source points, so the float result does not depend on how `p` was built.
pub fn pushforward(f: &[usize], target: Arc<FiniteMetricSpace>, p: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if f.len() != p.space.len() {
        return Err(Error::DimensionMismatch {
            expected: p.space.len(),
            got: f.len(),
        });
    }
    let atoms = p
        .support
        .iter()
        .enumerate()
        .map(|(i, &x)| Atom {
            point: f[x],
            weight: p.weights[i],
            exact: p.exact.as_ref().map(|e| e[i]),
        })
        .collect();
    DiscreteMeasure::from_atoms(target, atoms)
}

/// `Σ_i c_i p_i` for measures on one space.
pub fn mixture(coeffs: &Weights, measures: &[DiscreteMeasure]) -> Result<DiscreteMeasure> {
    if coeffs.len() != measures.len() {
        return Err(Error::LengthMismatch(coeffs.len(), measures.len()));
    }
    let space = measures.first().ok_or(Error::EmptySupport)?.space.clone();
    if measures.iter().any(|m| !same_space(&m.space, &space)) {
        return Err(Error::SpaceMismatch);
    }
    let mut atoms = Vec::new();
    for (i, m) in measures.iter().enumerate() {
        let c = coeffs.float[i];
        let ce = coeffs.exact.as_ref().map(|e| e[i]);
        for (j, &x) in m.support.iter().enumerate() {
            let exact = match (ce, m.exact.as_ref()) {
                (Some(c), Some(e)) => c.checked_mul(&e[j]),
                _ => None,
            };
            atoms.push(Atom {
                point: x,
                weight: c * m.weights[j],
                exact,
            });
        }
    }
    DiscreteMeasure::from_atoms(space, atoms)
}

/// `Σ_i w_i d(x0, x_i)`, the expected distance from `x0`.
pub fn first_moment(p: &DiscreteMeasure, x0: usize) -> Result<f64> {
    p.space.check_index(x0)?;
    Ok(p.atoms().map(|(x, w)| w * p.space.d(x0, x)).sum())
}

/// Equal supports and pointwise weights within `tol`.
pub fn measures_equal(p: &DiscreteMeasure, q: &DiscreteMeasure, tol: f64) -> Result<bool> {
    if !same_space(&p.space, &q.space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(p.support == q.support && p.weights.iter().zip(&q.weights).all(|(a, b)| (a - b).abs() <= tol))
}

/// `max_x |p({x}) - q({x})|` over the union of the supports.
pub fn weight_discrepancy(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    if !same_space(&p.space, &q.space) {
        return Err(Error::SpaceMismatch);
    }
    let mut worst = 0.0f64;
    for &x in p.support.iter().chain(&q.support) {
        worst = worst.max((p.weight_of(x) - q.weight_of(x)).abs());
    }
    Ok(worst)
}

/// Exact version of [`weight_discrepancy`]; `None` unless both are rational.
pub fn exact_discrepancy(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<Option<Rational>> {
    if !same_space(&p.space, &q.space) {
        return Err(Error::SpaceMismatch);
    }
    let mut worst = Rational::zero();
    for &x in p.support.iter().chain(&q.support) {
        let (Some(a), Some(b)) = (p.exact_weight_of(x), q.exact_weight_of(x)) else {
            return Ok(None);
        };
        let d = if a > b { a - b } else { b - a };
        worst = worst.max(d);
    }
    Ok(Some(worst))
}
