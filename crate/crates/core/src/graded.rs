//! Graded structure maps on iterated powers.
//!
//! Currying `(X^S)^T -> X^{S×T}` concatenates the rows of a grid; flattening
//! `(X_m)_n -> X_{mn}` takes the union of a multiset of multisets. Both are
//! implemented generically over the element type so the coherence checks can
//! apply them at different depths of a nesting.

use std::sync::Arc;

use crate::measures::same_space;
use crate::power::{quotient, MultiSet, Tuple};
use crate::spaces::FiniteMetricSpace;
use crate::{Error, Result};

/// Row-major concatenation of a rectangular, nonempty grid.
pub fn concat_rect<T: Clone>(grid: &[Vec<T>]) -> Result<Vec<T>> {
    let width = grid.first().map(Vec::len).ok_or(Error::Ragged("empty grid".into()))?;
    if width == 0 {
        return Err(Error::Ragged("empty row".into()));
    }
    if let Some((i, r)) = grid.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::Ragged(format!(
            "row {i} has length {}, expected {width}",
            r.len()
        )));
    }
    Ok(grid.iter().flatten().cloned().collect())
}

/// Sorted union of a list of lists.
pub fn union_sorted<T: Ord + Clone>(grid: &[Vec<T>]) -> Vec<T> {
    let mut out: Vec<T> = grid.iter().flatten().cloned().collect();
    out.sort();
    out
}

fn check_entries(space: &FiniteMetricSpace, rows: &[Vec<usize>]) -> Result<()> {
    rows.iter().flatten().try_for_each(|&e| space.check_index(e))
}

/// A `T`-indexed family of `S`-indexed families: an `n × m` grid of points.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedTuple {
    space: Arc<FiniteMetricSpace>,
    rows: Vec<Vec<usize>>,
}

impl NestedTuple {
    pub fn new(space: Arc<FiniteMetricSpace>, rows: Vec<Vec<usize>>) -> Result<Self> {
        concat_rect(&rows)?;
        check_entries(&space, &rows)?;
        Ok(NestedTuple { space, rows })
    }

    /// `t` as the single row of a `1 × m` grid.
    pub fn single_row(t: &Tuple) -> Self {
        NestedTuple {
            space: t.space().clone(),
            rows: vec![t.entries().to_vec()],
        }
    }

    /// `t` as an `m × 1` grid.
    pub fn single_column(t: &Tuple) -> Self {
        NestedTuple {
            space: t.space().clone(),
            rows: t.entries().iter().map(|&e| vec![e]).collect(),
        }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn outer_len(&self) -> usize {
        self.rows.len()
    }

    pub fn inner_len(&self) -> usize {
        self.rows[0].len()
    }
}

/// Concatenates the rows into one tuple of length `m·n`.
pub fn curry_flatten(t: &NestedTuple) -> Tuple {
    let entries = concat_rect(&t.rows).expect("NestedTuple is rectangular");
    Tuple::new(t.space.clone(), entries).expect("entries already validated")
}

/// Distance in `(X^m)^n`: the average over rows of the row distances.
pub fn nested_tuple_distance(a: &NestedTuple, b: &NestedTuple) -> Result<f64> {
    if !same_space(&a.space, &b.space) {
        return Err(Error::SpaceMismatch);
    }
    if a.outer_len() != b.outer_len() || a.inner_len() != b.inner_len() {
        return Err(Error::LengthMismatch(
            a.outer_len() * a.inner_len(),
            b.outer_len() * b.inner_len(),
        ));
    }
    let n = a.outer_len() as f64;
    let mut total = 0.0;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let ta = Tuple::new(a.space.clone(), ra.clone())?;
        let tb = Tuple::new(b.space.clone(), rb.clone())?;
        total += crate::power::tuple_distance(&ta, &tb)?;
    }
    Ok(total / n)
}

/// A multiset of `n` multisets of size `m`, in canonical form: every inner
/// list sorted, the outer list sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedMultiSet {
    space: Arc<FiniteMetricSpace>,
    inner: Vec<Vec<usize>>,
}

impl NestedMultiSet {
    pub fn new(space: Arc<FiniteMetricSpace>, mut inner: Vec<Vec<usize>>) -> Result<Self> {
        concat_rect(&inner)?;
        check_entries(&space, &inner)?;
        for r in &mut inner {
            r.sort_unstable();
        }
        inner.sort();
        Ok(NestedMultiSet { space, inner })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn inner(&self) -> &[Vec<usize>] {
        &self.inner
    }

    pub fn outer_len(&self) -> usize {
        self.inner.len()
    }

    pub fn inner_len(&self) -> usize {
        self.inner[0].len()
    }

    pub fn inner_multisets(&self) -> Vec<MultiSet> {
        self.inner
            .iter()
            .map(|r| MultiSet::new(self.space.clone(), r.clone()).expect("validated"))
            .collect()
    }
}

/// The union over the outer layer, a multiset of size `m·n`.
pub fn flatten_multiset(nm: &NestedMultiSet) -> MultiSet {
    MultiSet::new(nm.space.clone(), union_sorted(&nm.inner)).expect("validated")
}

/// Quotients every row, then the outer layer: `(X^m)^n -> (X_m)_n`.
pub fn nested_quotient(t: &NestedTuple) -> NestedMultiSet {
    NestedMultiSet::new(t.space.clone(), t.rows.clone()).expect("validated")
}

/// Whether flattening after quotienting agrees with quotienting after currying.
pub fn check_double_quotient(t: &NestedTuple) -> bool {
    flatten_multiset(&nested_quotient(t)) == quotient(&curry_flatten(t))
}

/// Unit triangles for tuples: `1 × m` and `m × 1` nestings curry back to `t`.
pub fn check_tuple_units(t: &Tuple) -> bool {
    curry_flatten(&NestedTuple::single_row(t)) == *t && curry_flatten(&NestedTuple::single_column(t)) == *t
}

/// Unit triangles for multisets: `{a}` and `{{a_1},...,{a_m}}` flatten back to `a`.
pub fn check_multiset_units(a: &MultiSet) -> bool {
    let space = a.space().clone();
    let single = NestedMultiSet::new(space.clone(), vec![a.entries().to_vec()]).expect("valid");
    let singletons = NestedMultiSet::new(space, a.entries().iter().map(|&e| vec![e]).collect()).expect("valid");
    flatten_multiset(&single) == *a && flatten_multiset(&singletons) == *a
}

/// A three-level nesting, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub enum Nesting3 {
    /// `((X^S)^T)^U`.
    Tuples(Vec<Vec<Vec<usize>>>),
    /// `((X_m)_n)_l`; canonicalized by [`check_assoc_square`].
    Multisets(Vec<Vec<Vec<usize>>>),
}

fn mismatch<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    (diff + a.len().abs_diff(b.len())) as f64
}

fn canonical3(grid: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    let mut g: Vec<Vec<Vec<usize>>> = grid
        .iter()
        .map(|mid| {
            let mut m: Vec<Vec<usize>> = mid
                .iter()
                .map(|inner| {
                    let mut v = inner.clone();
                    v.sort_unstable();
                    v
                })
                .collect();
            m.sort();
            m
        })
        .collect();
    g.sort();
    g
}

/// Evaluates both ways around the associativity square and returns the
/// number of positions where the results differ (0 when it commutes).
///
/// Tuples: currying the inner two levels first, or the outer two first.
/// Multisets: flattening inside each outer element first, or flattening
/// the outer layer first.
pub fn check_assoc_square(nesting: &Nesting3) -> Result<f64> {
    match nesting {
        Nesting3::Tuples(grid) => {
            let inner_first: Vec<Vec<usize>> = grid.iter().map(|g| concat_rect(g)).collect::<Result<_>>()?;
            let a = concat_rect(&inner_first)?;
            let outer_first: Vec<Vec<usize>> = concat_rect(grid)?;
            let b = concat_rect(&outer_first)?;
            Ok(mismatch(&a, &b))
        }
        Nesting3::Multisets(grid) => {
            for g in grid {
                concat_rect(g)?;
            }
            concat_rect(grid)?;
            let g = canonical3(grid);
            let inner_first: Vec<Vec<usize>> = g.iter().map(|m| union_sorted(m)).collect();
            let a = union_sorted(&inner_first);
            let outer_first: Vec<Vec<usize>> = union_sorted(&g);
            let b = union_sorted(&outer_first);
            Ok(mismatch(&a, &b))
        }
    }
}
