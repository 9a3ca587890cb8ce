//! Finite metric spaces.
//!
//! A [`FiniteMetricSpace`] is a roster of `n` points together with an
//! explicit `n × n` distance table. Pseudometrics (distinct points at
//! distance zero) are allowed when the space is flagged as such; nothing
//! is ever quotiented implicitly, see [`FiniteMetricSpace::metric_quotient`].

use serde::{Deserialize, Serialize};

use crate::{Error, Result, TAU_WEIGHT};

/// A finite roster of points with a symmetric distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    pseudometric_ok: bool,
}

impl FiniteMetricSpace {
    /// Builds a space from a square table of finite, nonnegative reals.
    ///
    /// Only the shape and entry ranges are checked here; the metric axioms
    /// are checked by [`validate_metric`] or [`FiniteMetricSpace::checked`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMetric("space has no points".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), n });
            }
            for v in r {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "distance {v} in row {row} is not a finite nonnegative real"
                    )));
                }
                dist.push(v);
            }
        }
        Ok(FiniteMetricSpace {
            n,
            dist,
            pseudometric_ok: false,
        })
    }

    /// Builds a space and rejects it unless every metric axiom holds within `tol`.
    pub fn checked(rows: Vec<Vec<f64>>, pseudometric_ok: bool, tol: f64) -> Result<Self> {
        let space = Self::new(rows)?.with_pseudometric(pseudometric_ok);
        let report = validate_metric(&space, tol);
        match report.violations.first() {
            None => Ok(space),
            Some(v) => Err(Error::InvalidMetric(v.to_string())),
        }
    }

    /// Points on the real line with `d(x, y) = |x - y|`.
    pub fn from_line(points: &[f64]) -> Self {
        let n = points.len();
        let mut dist = Vec::with_capacity(n * n);
        for a in points {
            for b in points {
                dist.push((a - b).abs());
            }
        }
        FiniteMetricSpace {
            n,
            dist,
            pseudometric_ok: false,
        }
    }

    /// The one-point space.
    pub fn point() -> Self {
        FiniteMetricSpace {
            n: 1,
            dist: vec![0.0],
            pseudometric_ok: false,
        }
    }

    pub fn with_pseudometric(mut self, ok: bool) -> Self {
        self.pseudometric_ok = ok;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_pseudometric(&self) -> bool {
        self.pseudometric_ok
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, size: self.n })
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Largest distance between two points of `subset`.
    pub fn diameter_of(&self, subset: &[usize]) -> f64 {
        let mut diam = 0.0f64;
        for &a in subset {
            for &b in subset {
                diam = diam.max(self.d(a, b));
            }
        }
        diam
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Identifies points at distance `<= tol`.
    ///
    /// Returns the quotient space (one representative per class, in order of
    /// first appearance) and the class index of every original point. The
    /// input should satisfy the triangle inequality, otherwise the classes
    /// depend on the representative chosen.
    pub fn metric_quotient(&self, tol: f64) -> (FiniteMetricSpace, Vec<usize>) {
        let mut reps: Vec<usize> = Vec::new();
        let mut class = vec![0; self.n];
        for i in 0..self.n {
            match reps.iter().position(|&r| self.d(r, i) <= tol) {
                Some(c) => class[i] = c,
                None => {
                    class[i] = reps.len();
                    reps.push(i);
                }
            }
        }
        let k = reps.len();
        let mut dist = Vec::with_capacity(k * k);
        for &a in &reps {
            for &b in &reps {
                dist.push(self.d(a, b));
            }
        }
        let q = FiniteMetricSpace {
            n: k,
            dist,
            pseudometric_ok: false,
        };
        (q, class)
    }
}

/// One violated metric axiom, reported with its worst offender.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    Reflexivity { i: usize, value: f64 },
    Symmetry { i: usize, j: usize, difference: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    Separation { i: usize, j: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Reflexivity { i, value } => write!(f, "d({i},{i}) = {value} is not zero"),
            Violation::Symmetry { i, j, difference } => {
                write!(f, "d({i},{j}) and d({j},{i}) differ by {difference}")
            }
            Violation::Triangle { i, j, k, excess } => write!(
                f,
                "triangle inequality d({i},{j}) <= d({i},{k}) + d({k},{j}) fails by {excess}"
            ),
            Violation::Separation { i, j } => {
                write!(f, "distinct points {i} and {j} are at distance zero")
            }
        }
    }
}

/// Result of [`validate_metric`]: at most one entry per violated axiom.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub violations: Vec<Violation>,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the (pseudo)metric axioms, keeping the worst offender for each.
pub fn validate_metric(space: &FiniteMetricSpace, tol: f64) -> MetricReport {
    let n = space.len();
    let mut refl: Option<(usize, f64)> = None;
    let mut sym: Option<(usize, usize, f64)> = None;
    let mut tri: Option<(usize, usize, usize, f64)> = None;
    let mut sep: Option<(usize, usize)> = None;

    for i in 0..n {
        let v = space.d(i, i);
        if v.abs() > tol && refl.is_none_or(|(_, w)| v > w) {
            refl = Some((i, v));
        }
        for j in 0..n {
            let diff = (space.d(i, j) - space.d(j, i)).abs();
            if diff > tol && sym.is_none_or(|(_, _, w)| diff > w) {
                sym = Some((i, j, diff));
            }
            if i != j && !space.pseudometric_ok && space.d(i, j) <= 0.0 && sep.is_none() {
                sep = Some((i, j));
            }
            for k in 0..n {
                let excess = space.d(i, j) - space.d(i, k) - space.d(k, j);
                if excess > tol && tri.is_none_or(|(_, _, _, w)| excess > w) {
                    tri = Some((i, j, k, excess));
                }
            }
        }
    }

    let mut violations = Vec::new();
    if let Some((i, value)) = refl {
        violations.push(Violation::Reflexivity { i, value });
    }
    if let Some((i, j, difference)) = sym {
        violations.push(Violation::Symmetry { i, j, difference });
    }
    if let Some((i, j, k, excess)) = tri {
        violations.push(Violation::Triangle { i, j, k, excess });
    }
    if let Some((i, j)) = sep {
        violations.push(Violation::Separation { i, j });
    }
    MetricReport { violations }
}

/// Index of the pair `(x, y)` in `X ⊗ Y`.
pub fn pair_index(x: usize, y: usize, y_len: usize) -> usize {
    x * y_len + y
}

/// `X ⊗ Y`: the cartesian product with the ℓ1 sum metric.
///
/// The pair `(x, y)` lives at index [`pair_index`]`(x, y, |Y|)`.
pub fn tensor_product(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: usize) -> Result<FiniteMetricSpace> {
    let size = x
        .len()
        .checked_mul(y.len())
        .ok_or(Error::SizeCap { size: usize::MAX, cap })?;
    if size > cap {
        return Err(Error::SizeCap { size, cap });
    }
    let mut dist = Vec::with_capacity(size * size);
    for a in 0..x.len() {
        for b in 0..y.len() {
            for a2 in 0..x.len() {
                for b2 in 0..y.len() {
                    dist.push(x.d(a, a2) + y.d(b, b2));
                }
            }
        }
    }
    Ok(FiniteMetricSpace {
        n: size,
        dist,
        pseudometric_ok: x.pseudometric_ok || y.pseudometric_ok,
    })
}

/// Mixed-radix decoding of a product index; the first factor is the most significant.
pub fn product_coords(sizes: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; sizes.len()];
    for (c, &s) in coords.iter_mut().zip(sizes).rev() {
        *c = index % s;
        index /= s;
    }
    coords
}

/// Inverse of [`product_coords`].
pub fn product_index(sizes: &[usize], coords: &[usize]) -> usize {
    coords.iter().zip(sizes).fold(0, |acc, (&c, &s)| acc * s + c)
}

/// The weighted combination `Σ λ_i d_i` on the product of the carriers.
///
/// The result is flagged as a pseudometric whenever some weight vanishes
/// (or some input already is one).
pub fn convex_combination_space(
    weights: &[f64],
    spaces: &[&FiniteMetricSpace],
    cap: usize,
) -> Result<FiniteMetricSpace> {
    if weights.len() != spaces.len() {
        return Err(Error::LengthMismatch(weights.len(), spaces.len()));
    }
    check_simplex(weights, TAU_WEIGHT)?;
    let sizes: Vec<usize> = spaces.iter().map(|s| s.len()).collect();
    let mut size: usize = 1;
    for &s in &sizes {
        size = size.checked_mul(s).filter(|&v| v <= cap).ok_or(Error::SizeCap {
            size: size.saturating_mul(s),
            cap,
        })?;
    }
    let coords: Vec<Vec<usize>> = (0..size).map(|i| product_coords(&sizes, i)).collect();
    let mut dist = Vec::with_capacity(size * size);
    for a in &coords {
        for b in &coords {
            let v: f64 = weights
                .iter()
                .zip(spaces)
                .zip(a.iter().zip(b))
                .map(|((&w, s), (&i, &j))| w * s.d(i, j))
                .sum();
            dist.push(v);
        }
    }
    let degenerate = weights.iter().any(|&w| w == 0.0) || spaces.iter().any(|s| s.pseudometric_ok);
    Ok(FiniteMetricSpace {
        n: size,
        dist,
        pseudometric_ok: degenerate,
    })
}

/// Rejects weight vectors with a negative entry or a sum off 1 by more than `tol`.
pub fn check_simplex(weights: &[f64], tol: f64) -> Result<()> {
    if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeight(w));
    }
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || (sum - 1.0).abs() > tol {
        return Err(Error::NotOnSimplex { sum });
    }
    Ok(())
}

fn check_map(f: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<()> {
    if f.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: f.len(),
        });
    }
    f.iter().try_for_each(|&v| y.check_index(v))
}

/// Whether `f` is 1-Lipschitz (short) from `x` to `y`, up to `tol`.
pub fn check_short(f: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: f64) -> Result<bool> {
    check_map(f, x, y)?;
    for a in 0..x.len() {
        for b in 0..x.len() {
            if y.d(f[a], f[b]) > x.d(a, b) + tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `f` preserves all distances, up to `tol`.
pub fn check_isometric(f: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: f64) -> Result<bool> {
    check_map(f, x, y)?;
    for a in 0..x.len() {
        for b in 0..x.len() {
            if (y.d(f[a], f[b]) - x.d(a, b)).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Vector norms available on [`EuclideanSpace`] carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Norm::Linf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::OutOfRange(format!("unknown norm {other:?}"))),
        }
    }
}

/// A roster of vectors in `ℝ^dim` under one of the [`Norm`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanSpace {
    dim: usize,
    norm: Norm,
    points: Vec<Vec<f64>>,
}

impl EuclideanSpace {
    pub fn new(dim: usize, norm: Norm, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMetric("space has no points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMetric("non-finite coordinate".into()));
            }
        }
        Ok(EuclideanSpace { dim, norm, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The induced distance table. Coincident vectors give a pseudometric.
    pub fn metric_space(&self) -> FiniteMetricSpace {
        let n = self.points.len();
        let mut dist = Vec::with_capacity(n * n);
        for a in &self.points {
            for b in &self.points {
                dist.push(self.norm.distance(a, b));
            }
        }
        let pseudo = (0..n).any(|i| (0..i).any(|j| dist[i * n + j] == 0.0));
        FiniteMetricSpace {
            n,
            dist,
            pseudometric_ok: pseudo,
        }
    }
}
