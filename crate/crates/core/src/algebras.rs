//! Barycenters on normed vector spaces and the laws they satisfy.
//!
//! A [`ConvexAlgebra`] is `ℝ^d` (or a convex region of it) under one of the
//! three norms, with structure map `e(Σ w_i δ(x_i)) = Σ w_i x_i`. The module
//! also provides the binary convex combinations `c_λ`, the simplex operad
//! composition, and law checks for all presentations of the structure: as a
//! map on measures, on multisets, on tuples, and as a convex space.
//!
//! The binary operations follow [`Convention`]: by default `λ` weights the
//! first argument, so `c_1(x, y) = x` and
//! `d(c_λ(x, z), c_λ(y, z)) = λ d(x, y)`.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::graded::{concat_rect, flatten_multiset, NestedMultiSet};
use crate::measures::{pushforward, DiscreteMeasure, Weights};
use crate::monad::{
    expectation, flatten_outer, map_expectation, measure_discrepancy, random_nested, unit_p, LawResult, NestedMeasure3,
};
use crate::power::{precompose, repeat_embedding, FinUnifMap, Tuple};
use crate::random::{random_composition, random_space, trial_rng, SamplerConfig};
use crate::spaces::{convex_combination_space, product_coords, EuclideanSpace, FiniteMetricSpace, Norm};
use crate::{Error, Result, DEFAULT_SIZE_CAP, TAU_WEIGHT};

/// Tolerance used by the algebra law checks.
pub const ALGEBRA_TOLERANCE: f64 = 1e-10;

/// Which argument of `c_λ` receives the weight `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `c_λ(x, y) = λx + (1-λ)y`.
    #[default]
    WeightOnFirst,
    /// `c_λ(x, y) = (1-λ)x + λy`.
    WeightOnSecond,
}

impl Convention {
    /// The weight on the first argument of `c_λ`.
    pub fn first_weight(self, lambda: f64) -> f64 {
        match self {
            Convention::WeightOnFirst => lambda,
            Convention::WeightOnSecond => 1.0 - lambda,
        }
    }

    /// The parameter at which `c_λ(x, y) = x`.
    pub fn unit_parameter(self) -> f64 {
        self.first_weight(1.0)
    }
}

/// Convex subsets of `ℝ^d` used as carriers.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Whole,
    /// Axis-aligned box `[lo, hi]^d`.
    Box {
        lo: f64,
        hi: f64,
    },
    /// Nonnegative vectors with coordinate sum 1.
    ProbabilitySimplex,
}

impl Region {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Region::Whole => true,
            Region::Box { lo, hi } => x.iter().all(|v| *v >= lo - tol && *v <= hi + tol),
            Region::ProbabilitySimplex => x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R, dim: usize) -> Vec<f64> {
        match self {
            Region::Whole => (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect(),
            Region::Box { lo, hi } => (0..dim).map(|_| rng.gen_range(*lo..=*hi)).collect(),
            Region::ProbabilitySimplex => {
                let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
                let t: f64 = raw.iter().sum();
                raw.iter().map(|v| v / t).collect()
            }
        }
    }
}

/// A convex region of a finite-dimensional normed space with barycenters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexAlgebra {
    dim: usize,
    norm: Norm,
    region: Region,
    convention: Convention,
}

impl ConvexAlgebra {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange("dimension must be at least 1".into()));
        }
        Ok(ConvexAlgebra {
            dim,
            norm,
            region: Region::Whole,
            convention: Convention::default(),
        })
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm.distance(a, b)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// A roster of points of this algebra as a finite metric space.
    pub fn roster(&self, points: Vec<Vec<f64>>) -> Result<EuclideanSpace> {
        EuclideanSpace::new(self.dim, self.norm, points)
    }

    fn sample_roster<R: Rng>(&self, rng: &mut R, n: usize) -> EuclideanSpace {
        let pts = (0..n).map(|_| self.region.sample(rng, self.dim)).collect();
        self.roster(pts).expect("sampled in dimension")
    }
}

/// `Σ_i w_i x_i` for explicit weighted points.
pub fn barycenter_points(a: &ConvexAlgebra, atoms: &[(f64, Vec<f64>)]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; a.dim];
    for (w, x) in atoms {
        a.check_point(x)?;
        for (o, v) in out.iter_mut().zip(x) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// `e(p) = Σ_i w_i x_i`, where `p` lives on the roster `carrier`.
pub fn barycenter(a: &ConvexAlgebra, carrier: &EuclideanSpace, p: &DiscreteMeasure) -> Result<Vec<f64>> {
    if carrier.dim() != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: carrier.dim(),
        });
    }
    if p.space().len() != carrier.len() {
        return Err(Error::SpaceMismatch);
    }
    let atoms: Vec<(f64, Vec<f64>)> = p.atoms().map(|(x, w)| (w, carrier.point(x).to_vec())).collect();
    barycenter_points(a, &atoms)
}

/// The mean of a list of points (the uniform barycenter `e_n`).
pub fn mean(a: &ConvexAlgebra, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let w = 1.0 / points.len() as f64;
    let atoms: Vec<(f64, Vec<f64>)> = points.iter().map(|p| (w, p.clone())).collect();
    barycenter_points(a, &atoms)
}

/// `c_λ(x, y)` under the algebra's convention.
pub fn c_lambda(a: &ConvexAlgebra, lambda: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("λ = {lambda} is not in [0, 1]")));
    }
    a.check_point(x)?;
    a.check_point(y)?;
    let t = a.convention.first_weight(lambda);
    Ok(x.iter().zip(y).map(|(u, v)| t * u + (1.0 - t) * v).collect())
}

/// The parameter `ν` of parametric associativity (weight-on-first form):
/// `c_λ(c_μ(x, y), z) = c_{λμ}(x, c_ν(y, z))`. `None` when `λ = μ = 1`,
/// where any `ν` works.
pub fn assoc_nu(lambda: f64, mu: f64) -> Option<f64> {
    let denom = 1.0 - lambda * mu;
    (denom > 0.0).then(|| lambda * (1.0 - mu) / denom)
}

fn max_dist(a: &ConvexAlgebra, x: &[f64], y: &[f64], worst: &mut f64) {
    *worst = worst.max(a.distance(x, y));
}

/// Unitality, idempotency, parametric commutativity and associativity of `c_λ`.
pub fn check_convex_axioms(a: &ConvexAlgebra, seed: u64, trials: usize) -> Result<Vec<LawResult>> {
    let mut worst = [0.0f64; 4];
    let conv = a.convention;
    // Translate a weight-on-first parameter into this convention.
    let param = |t: f64| match conv {
        Convention::WeightOnFirst => t,
        Convention::WeightOnSecond => 1.0 - t,
    };
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let x = a.region.sample(&mut rng, a.dim);
        let y = a.region.sample(&mut rng, a.dim);
        let z = a.region.sample(&mut rng, a.dim);
        let lambda: f64 = rng.gen_range(0.0..=1.0);
        let mu: f64 = rng.gen_range(0.0..=1.0);

        max_dist(a, &c_lambda(a, conv.unit_parameter(), &x, &y)?, &x, &mut worst[0]);
        max_dist(a, &c_lambda(a, lambda, &x, &x)?, &x, &mut worst[1]);
        max_dist(
            a,
            &c_lambda(a, lambda, &x, &y)?,
            &c_lambda(a, 1.0 - lambda, &y, &x)?,
            &mut worst[2],
        );

        let (l1, m1) = (conv.first_weight(lambda), conv.first_weight(mu));
        if let Some(nu) = assoc_nu(l1, m1) {
            let lhs = c_lambda(a, lambda, &c_lambda(a, mu, &x, &y)?, &z)?;
            let rhs = c_lambda(a, param(l1 * m1), &x, &c_lambda(a, param(nu), &y, &z)?)?;
            max_dist(a, &lhs, &rhs, &mut worst[3]);
        }
    }
    let names = ["unitality", "idempotency", "commutativity", "associativity"];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(n, w)| LawResult::new(format!("convex.{n}"), trials, w, ALGEBRA_TOLERANCE))
        .collect())
}

/// Metric compatibility of `c_λ`, in its binary form (which holds with
/// equality on a normed space) and its general form
/// `d(e(Σλ_i δx_i), e(Σλ_i δy_i)) <= Σ λ_i d(x_i, y_i)`.
pub fn check_metric_compat(a: &ConvexAlgebra, seed: u64, trials: usize) -> Result<Vec<LawResult>> {
    let mut equality = 0.0f64;
    let mut general = 0.0f64;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let x = a.region.sample(&mut rng, a.dim);
        let y = a.region.sample(&mut rng, a.dim);
        let z = a.region.sample(&mut rng, a.dim);
        let lambda = match t % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=1.0),
        };
        let lhs = a.distance(&c_lambda(a, lambda, &x, &z)?, &c_lambda(a, lambda, &y, &z)?);
        let rhs = a.convention.first_weight(lambda) * a.distance(&x, &y);
        equality = equality.max((lhs - rhs).abs());

        let k = rng.gen_range(1..=5);
        let w = random_simplex(&mut rng, k);
        let xs: Vec<Vec<f64>> = (0..k).map(|_| a.region.sample(&mut rng, a.dim)).collect();
        let ys: Vec<Vec<f64>> = (0..k).map(|_| a.region.sample(&mut rng, a.dim)).collect();
        let ex = barycenter_points(a, &w.iter().copied().zip(xs.iter().cloned()).collect::<Vec<_>>())?;
        let ey = barycenter_points(a, &w.iter().copied().zip(ys.iter().cloned()).collect::<Vec<_>>())?;
        let bound: f64 = w
            .iter()
            .zip(xs.iter().zip(&ys))
            .map(|(l, (u, v))| l * a.distance(u, v))
            .sum();
        general = general.max(a.distance(&ex, &ey) - bound);
    }
    Ok(vec![
        LawResult::new("metric_compat.equality", trials, equality, ALGEBRA_TOLERANCE),
        LawResult::new("metric_compat.general", trials, general.max(0.0), ALGEBRA_TOLERANCE),
    ])
}

fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let t: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    raw.iter().map(|v| v / t).collect()
}

/// An affine map `x ↦ Mx + b` between coordinate spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let cols = matrix.first().map(Vec::len).unwrap_or(0);
        if matrix.len() != offset.len() || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::Ragged("affine map shape".into()));
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() + b)
            .collect()
    }

    /// Operator norm of the linear part with the same norm on both sides.
    /// Exact for ℓ1 and ℓ∞; power iteration on `MᵀM` for ℓ2.
    pub fn operator_norm(&self, norm: Norm) -> f64 {
        let m = &self.matrix;
        let cols = m.first().map(Vec::len).unwrap_or(0);
        match norm {
            Norm::L1 => (0..cols)
                .map(|j| m.iter().map(|r| r[j].abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Norm::Linf => m
                .iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Norm::L2 => {
                let mut v = vec![1.0; cols];
                let mut est = 0.0;
                for _ in 0..200 {
                    let mv: Vec<f64> = m.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
                    let mtmv: Vec<f64> = (0..cols)
                        .map(|j| m.iter().zip(&mv).map(|(r, s)| r[j] * s).sum())
                        .collect();
                    let n = Norm::L2.norm(&mtmv);
                    if n == 0.0 {
                        return 0.0;
                    }
                    est = n.sqrt() * (1.0 / Norm::L2.norm(&v)).sqrt();
                    v = mtmv.iter().map(|x| x / n).collect();
                }
                est
            }
        }
    }

    /// A random affine self-map of `ℝ^dim`, rescaled to operator norm at most 1.
    pub fn random_short<R: Rng>(rng: &mut R, dim: usize, norm: Norm) -> Self {
        let matrix: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let offset = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut map = AffineMap { matrix, offset };
        let op = map.operator_norm(norm);
        if op > 0.0 {
            let s = rng.gen_range(0.5..=1.0) / op;
            for row in &mut map.matrix {
                for v in row.iter_mut() {
                    *v *= s;
                }
            }
        }
        map
    }
}

fn tuple_points(carrier: &EuclideanSpace, entries: &[usize]) -> Vec<Vec<f64>> {
    entries.iter().map(|&i| carrier.point(i).to_vec()).collect()
}

/// The P-algebra laws for all presentations, on random instances:
///
/// - `algebra.unit`: `e(δ(x)) = x`;
/// - `algebra.multiplication`: `e(E μ) = e(P e μ)` for nested measures `μ`;
/// - `algebra.multiset_triangle` / `algebra.multiset_square`: `e_m = e_{mn}∘repeat`
///   and `e_n∘(e_m)_n = e_{mn}∘flatten`;
/// - `algebra.tuple_triangle` / `algebra.tuple_square`: the same for
///   tuples, precomposition with uniform-fiber maps and currying;
/// - `algebra.affine_morphism`: `g(e(p)) = e(g_* p)` for random short affine `g`;
/// - `algebra.combination_short`: `(x_i) ↦ Σλ_i x_i` is short on the
///   weighted combination of copies of a roster;
/// - `algebra.region`: barycenters stay in the carrier region.
pub fn check_algebra_laws(a: &ConvexAlgebra, seed: u64, trials: usize) -> Result<Vec<LawResult>> {
    let cfg = SamplerConfig::default();
    let mut worst = [0.0f64; 9];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let n_pts = rng.gen_range(1..=cfg.max_points);
        let carrier = a.sample_roster(&mut rng, n_pts);
        let space = Arc::new(carrier.metric_space());
        let exact = t % 2 == 0;

        // Unit.
        let x = rng.gen_range(0..n_pts);
        let d = DiscreteMeasure::dirac(space.clone(), x)?;
        max_dist(a, &barycenter(a, &carrier, &d)?, carrier.point(x), &mut worst[0]);

        // Multiplication square.
        let mu = random_nested(&mut rng, &space, &cfg, exact);
        let via_e = barycenter(a, &carrier, &expectation(&mu)?)?;
        let mut atoms = Vec::new();
        for (p, w) in mu.inner().iter().zip(mu.outer_weights()) {
            atoms.push((*w, barycenter(a, &carrier, p)?));
        }
        let via_pe = barycenter_points(a, &atoms)?;
        max_dist(a, &via_e, &via_pe, &mut worst[1]);
        worst[8] = worst[8].max(if a.region.contains(&via_e, ALGEBRA_TOLERANCE) {
            0.0
        } else {
            1.0
        });

        // Multiset presentation.
        let m = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=3);
        let ms = crate::random::random_multiset(&mut rng, &space, m);
        let e_m = mean(a, &tuple_points(&carrier, ms.entries()))?;
        let rep = repeat_embedding(&ms, k)?;
        max_dist(
            a,
            &e_m,
            &mean(a, &tuple_points(&carrier, rep.entries()))?,
            &mut worst[2],
        );

        let grid = crate::random::random_grid(&mut rng, n_pts, k, m);
        let nm = NestedMultiSet::new(space.clone(), grid.clone())?;
        let inner_means = nm
            .inner()
            .iter()
            .map(|r| mean(a, &tuple_points(&carrier, r)))
            .collect::<Result<Vec<_>>>()?;
        let outer = mean(a, &inner_means)?;
        let flat = mean(a, &tuple_points(&carrier, flatten_multiset(&nm).entries()))?;
        max_dist(a, &outer, &flat, &mut worst[3]);

        // Tuple presentation.
        let t_short = crate::random::random_tuple(&mut rng, &space, m);
        let mut assignment: Vec<usize> = (0..m * k).map(|s| s % m).collect();
        use rand::seq::SliceRandom;
        assignment.shuffle(&mut rng);
        let phi = FinUnifMap::new(assignment, m)?;
        let pulled: Tuple = precompose(&phi, &t_short)?;
        let e_t = mean(a, &tuple_points(&carrier, t_short.entries()))?;
        let e_s = mean(a, &tuple_points(&carrier, pulled.entries()))?;
        max_dist(a, &e_t, &e_s, &mut worst[4]);

        let row_means = grid
            .iter()
            .map(|r| mean(a, &tuple_points(&carrier, r)))
            .collect::<Result<Vec<_>>>()?;
        let curried = concat_rect(&grid)?;
        max_dist(
            a,
            &mean(a, &row_means)?,
            &mean(a, &tuple_points(&carrier, &curried))?,
            &mut worst[5],
        );

        // Affine morphisms commute with barycenters.
        let g = AffineMap::random_short(&mut rng, a.dim, a.norm);
        let p = crate::random::random_float_measure(&mut rng, &space, cfg.max_support);
        let lhs = g.apply(&barycenter(a, &carrier, &p)?);
        let image: Vec<(f64, Vec<f64>)> = p.atoms().map(|(x, w)| (w, g.apply(carrier.point(x)))).collect();
        max_dist(a, &lhs, &barycenter_points(a, &image)?, &mut worst[6]);

        // Shortness of Σλ_i x_i on the weighted combination of roster copies.
        let copies = rng.gen_range(1..=3);
        let small_len = rng.gen_range(1..=3);
        let small = a.sample_roster(&mut rng, small_len);
        let small_space = small.metric_space();
        let lambda = random_simplex(&mut rng, copies);
        let factors: Vec<&FiniteMetricSpace> = vec![&small_space; copies];
        let combo = convex_combination_space(&lambda, &factors, DEFAULT_SIZE_CAP)?;
        let sizes = vec![small.len(); copies];
        let combine = |idx: usize| -> Result<Vec<f64>> {
            let coords = product_coords(&sizes, idx);
            let atoms: Vec<(f64, Vec<f64>)> = lambda
                .iter()
                .zip(&coords)
                .map(|(l, &c)| (*l, small.point(c).to_vec()))
                .collect();
            barycenter_points(a, &atoms)
        };
        let images = (0..combo.len()).map(combine).collect::<Result<Vec<_>>>()?;
        for i in 0..combo.len() {
            for j in 0..combo.len() {
                let excess = a.distance(&images[i], &images[j]) - combo.d(i, j);
                worst[7] = worst[7].max(excess);
            }
        }
    }
    let names = [
        "unit",
        "multiplication",
        "multiset_triangle",
        "multiset_square",
        "tuple_triangle",
        "tuple_square",
        "affine_morphism",
        "combination_short",
        "region",
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(n, w)| LawResult::new(format!("algebra.{n}"), trials, w.max(0.0), ALGEBRA_TOLERANCE))
        .collect())
}

/// The free algebra `PX` with structure map `E`: unit and multiplication
/// laws, compared exactly on rational instances.
pub fn check_free_algebra(seed: u64, trials: usize) -> Result<Vec<LawResult>> {
    let cfg = SamplerConfig::default();
    let mut worst = [0.0f64; 2];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let n = rng.gen_range(1..=cfg.max_points);
        let space = random_space(&mut rng, n);
        let mu = random_nested(&mut rng, &space, &cfg, true);
        let p = expectation(&mu)?;
        worst[0] = worst[0].max(measure_discrepancy(&expectation(&unit_p(&p))?, &p)?);
        let k = rng.gen_range(1..=3);
        let inner = (0..k).map(|_| random_nested(&mut rng, &space, &cfg, true)).collect();
        let den = rng.gen_range(k as i64..=cfg.max_den);
        let w = Weights::from_counts(&random_composition(&mut rng, den, k), den)?;
        let m3 = NestedMeasure3::new(inner, w)?;
        let a = expectation(&map_expectation(&m3)?)?;
        let b = expectation(&flatten_outer(&m3)?)?;
        worst[1] = worst[1].max(measure_discrepancy(&a, &b)?);
    }
    Ok(vec![
        LawResult::new("free_algebra.unit", trials, worst[0], 0.0),
        LawResult::new("free_algebra.multiplication", trials, worst[1], 0.0),
    ])
}

/// `g(e(p)) = e(g_* p)` for an index-level map between rosters that is the
/// restriction of `g`; used to exercise the pushforward on measures.
pub fn affine_pushforward_discrepancy(
    a: &ConvexAlgebra,
    g: &AffineMap,
    carrier: &EuclideanSpace,
    p: &DiscreteMeasure,
) -> Result<f64> {
    let images: Vec<Vec<f64>> = carrier.points().iter().map(|x| g.apply(x)).collect();
    let target = a.roster(images)?;
    let index: Vec<usize> = (0..carrier.len()).collect();
    let pushed = pushforward(&index, Arc::new(target.metric_space()), p)?;
    let lhs = g.apply(&barycenter(a, carrier, p)?);
    let rhs = barycenter(a, &target, &pushed)?;
    Ok(a.distance(&lhs, &rhs))
}

/// A point of the standard simplex `Δ^n`, an `n`-ary operation of the
/// simplex operad.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexWeights {
    entries: Vec<f64>,
}

impl SimplexWeights {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        crate::spaces::check_simplex(&entries, TAU_WEIGHT)?;
        Ok(SimplexWeights { entries })
    }

    /// The operad unit `(1)`.
    pub fn unit() -> Self {
        SimplexWeights { entries: vec![1.0] }
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// `ν ∘ (λ_1, ..., λ_n) = (ν_1 λ_11, ..., ν_1 λ_1m_1, ..., ν_n λ_nm_n)`.
pub fn operad_compose(nu: &SimplexWeights, lambdas: &[SimplexWeights]) -> Result<SimplexWeights> {
    if nu.arity() != lambdas.len() {
        return Err(Error::LengthMismatch(nu.arity(), lambdas.len()));
    }
    let entries = nu
        .entries
        .iter()
        .zip(lambdas)
        .flat_map(|(n, l)| l.entries.iter().map(move |v| n * v))
        .collect();
    Ok(SimplexWeights { entries })
}

fn max_entry_diff(a: &SimplexWeights, b: &SimplexWeights) -> f64 {
    if a.arity() != b.arity() {
        return f64::INFINITY;
    }
    a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_weights<R: Rng>(rng: &mut R, max_arity: usize) -> SimplexWeights {
    let k = rng.gen_range(1..=max_arity);
    SimplexWeights::new(random_simplex(rng, k)).expect("normalised")
}

/// Laws of the simplex operad and of its action on metric spaces:
///
/// - `operad.unit`: `ν ∘ (1, ..., 1) = ν` and `(1) ∘ (λ) = λ`;
/// - `operad.associativity`: `ν ∘ (λ_i ∘ (κ_ij)) = (ν ∘ (λ_i)) ∘ (κ_ij)`;
/// - `operad.equivariance`: permuting `ν` and the `λ_i` together permutes
///   the blocks of the composite;
/// - `operad.space_action`: combining spaces with weights `ν ∘ (λ_i)` gives
///   the same distance table as combining with `λ_i` and then with `ν`.
pub fn check_operad_laws(seed: u64, trials: usize) -> Result<Vec<LawResult>> {
    let mut worst = [0.0f64; 4];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let nu = random_weights(&mut rng, 3);
        let lambdas: Vec<SimplexWeights> = (0..nu.arity()).map(|_| random_weights(&mut rng, 3)).collect();
        let composite = operad_compose(&nu, &lambdas)?;

        let units = vec![SimplexWeights::unit(); nu.arity()];
        worst[0] = worst[0].max(max_entry_diff(&operad_compose(&nu, &units)?, &nu));
        let l0 = &lambdas[0];
        worst[0] = worst[0].max(max_entry_diff(
            &operad_compose(&SimplexWeights::unit(), &[l0.clone()])?,
            l0,
        ));

        let kappas: Vec<Vec<SimplexWeights>> = lambdas
            .iter()
            .map(|l| (0..l.arity()).map(|_| random_weights(&mut rng, 2)).collect())
            .collect();
        let inner = lambdas
            .iter()
            .zip(&kappas)
            .map(|(l, ks)| operad_compose(l, ks))
            .collect::<Result<Vec<_>>>()?;
        let left = operad_compose(&nu, &inner)?;
        let flat_k: Vec<SimplexWeights> = kappas.into_iter().flatten().collect();
        let right = operad_compose(&composite, &flat_k)?;
        worst[1] = worst[1].max(max_entry_diff(&left, &right));

        let mut perm: Vec<usize> = (0..nu.arity()).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let nu_p = SimplexWeights {
            entries: perm.iter().map(|&i| nu.entries[i]).collect(),
        };
        let lambdas_p: Vec<SimplexWeights> = perm.iter().map(|&i| lambdas[i].clone()).collect();
        let permuted = operad_compose(&nu_p, &lambdas_p)?;
        let mut offsets = vec![0; lambdas.len()];
        for i in 1..lambdas.len() {
            offsets[i] = offsets[i - 1] + lambdas[i - 1].arity();
        }
        let expected: Vec<f64> = perm
            .iter()
            .flat_map(|&i| composite.entries[offsets[i]..offsets[i] + lambdas[i].arity()].to_vec())
            .collect();
        let expected = SimplexWeights { entries: expected };
        worst[2] = worst[2].max(max_entry_diff(&permuted, &expected));

        let blocks: Vec<Vec<FiniteMetricSpace>> = lambdas
            .iter()
            .map(|l| {
                (0..l.arity())
                    .map(|_| {
                        let n = rng.gen_range(1..=2);
                        (*random_space(&mut rng, n)).clone()
                    })
                    .collect()
            })
            .collect();
        let inner_spaces = lambdas
            .iter()
            .zip(&blocks)
            .map(|(l, b)| convex_combination_space(l.entries(), &b.iter().collect::<Vec<_>>(), DEFAULT_SIZE_CAP))
            .collect::<Result<Vec<_>>>()?;
        let nested =
            convex_combination_space(nu.entries(), &inner_spaces.iter().collect::<Vec<_>>(), DEFAULT_SIZE_CAP)?;
        let flat_spaces: Vec<&FiniteMetricSpace> = blocks.iter().flatten().collect();
        let direct = convex_combination_space(composite.entries(), &flat_spaces, DEFAULT_SIZE_CAP)?;
        for i in 0..nested.len() {
            for j in 0..nested.len() {
                worst[3] = worst[3].max((nested.d(i, j) - direct.d(i, j)).abs());
            }
        }
    }
    let names = ["unit", "associativity", "equivariance", "space_action"];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(n, w)| LawResult::new(format!("operad.{n}"), trials, w, ALGEBRA_TOLERANCE))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1() -> ConvexAlgebra {
        ConvexAlgebra::new(1, Norm::L2).unwrap()
    }

    #[test]
    fn barycenter_examples() {
        let a = ConvexAlgebra::new(2, Norm::L2).unwrap();
        let carrier = a.roster(vec![vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        let space = Arc::new(carrier.metric_space());
        let p = DiscreteMeasure::from_rational(space.clone(), vec![0, 1], vec![1, 1], 2).unwrap();
        assert_eq!(barycenter(&a, &carrier, &p).unwrap(), vec![1.0, 2.0]);
        let d = DiscreteMeasure::dirac(space, 1).unwrap();
        assert_eq!(barycenter(&a, &carrier, &d).unwrap(), vec![2.0, 4.0]);

        let line = r1().roster(vec![vec![0.0], vec![4.0]]).unwrap();
        let q = DiscreteMeasure::from_rational(Arc::new(line.metric_space()), vec![0, 1], vec![3, 1], 4).unwrap();
        assert_eq!(barycenter(&r1(), &line, &q).unwrap(), vec![1.0]);
        assert!(barycenter(&a, &line, &q).is_err());
    }

    #[test]
    fn c_lambda_examples() {
        let a = r1();
        assert_eq!(c_lambda(&a, 1.0, &[3.0], &[7.0]).unwrap(), vec![3.0]);
        assert_eq!(c_lambda(&a, 0.0, &[3.0], &[7.0]).unwrap(), vec![7.0]);
        assert_eq!(c_lambda(&a, 0.25, &[0.0], &[10.0]).unwrap(), vec![7.5]);
        assert!(c_lambda(&a, 1.5, &[0.0], &[1.0]).is_err());

        let b = r1().with_convention(Convention::WeightOnSecond);
        assert_eq!(c_lambda(&b, 0.0, &[3.0], &[7.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn assoc_nu_examples() {
        assert!((assoc_nu(0.5, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(assoc_nu(1.0, 1.0), None);
        let a = r1();
        let (x, y, z) = ([1.0], [-2.0], [5.0]);
        let lhs = c_lambda(&a, 0.5, &c_lambda(&a, 0.5, &x, &y).unwrap(), &z).unwrap();
        let rhs = c_lambda(&a, 0.25, &x, &c_lambda(&a, 1.0 / 3.0, &y, &z).unwrap()).unwrap();
        assert!((lhs[0] - rhs[0]).abs() < 1e-12);
    }

    #[test]
    fn convex_axioms_hold_in_both_conventions() {
        for conv in [Convention::WeightOnFirst, Convention::WeightOnSecond] {
            for norm in Norm::ALL {
                let a = ConvexAlgebra::new(3, norm).unwrap().with_convention(conv);
                for r in check_convex_axioms(&a, 9, 200).unwrap() {
                    assert!(r.pass, "{conv:?} {norm:?} {r:?}");
                }
            }
        }
    }

    #[test]
    fn metric_compat_example() {
        let a = r1();
        let lhs = a.distance(
            &c_lambda(&a, 0.25, &[0.0], &[10.0]).unwrap(),
            &c_lambda(&a, 0.25, &[4.0], &[10.0]).unwrap(),
        );
        assert!((lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiplication_example() {
        // μ = ½δ(δ(0)) + ½δ(½δ(0) + ½δ(4)) on the line.
        let a = r1();
        let carrier = a.roster(vec![vec![0.0], vec![4.0]]).unwrap();
        let space = Arc::new(carrier.metric_space());
        let p1 = DiscreteMeasure::dirac(space.clone(), 0).unwrap();
        let p2 = DiscreteMeasure::from_rational(space, vec![0, 1], vec![1, 1], 2).unwrap();
        let mu = crate::monad::NestedMeasure::new(vec![p1.clone(), p2.clone()], &Weights::uniform(2).unwrap()).unwrap();
        let e = barycenter(&a, &carrier, &expectation(&mu).unwrap()).unwrap();
        assert_eq!(e, vec![1.0]);
        let pe = barycenter_points(
            &a,
            &[
                (0.5, barycenter(&a, &carrier, &p1).unwrap()),
                (0.5, barycenter(&a, &carrier, &p2).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(pe, vec![1.0]);
    }

    #[test]
    fn uniform_barycenter_is_the_mean() {
        let a = ConvexAlgebra::new(2, Norm::L1).unwrap();
        let m = mean(&a, &[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]]).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-15 && (m[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operad_examples() {
        let nu = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
        let l1 = SimplexWeights::unit();
        let l2 = SimplexWeights::new(vec![0.3, 0.7]).unwrap();
        let c = operad_compose(&nu, &[l1.clone(), l2.clone()]).unwrap();
        let want = [0.5, 0.15, 0.35];
        for (a, b) in c.entries().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(operad_compose(&SimplexWeights::unit(), &[l2.clone()]).unwrap(), l2);
        assert!(operad_compose(&nu, &[l1]).is_err());

        // Swapping ν's entries and the blocks swaps the output blocks.
        let nu2 = SimplexWeights::new(vec![0.2, 0.8]).unwrap();
        let nu2s = SimplexWeights::new(vec![0.8, 0.2]).unwrap();
        let fwd = operad_compose(&nu2, &[SimplexWeights::unit(), l2.clone()]).unwrap();
        let rev = operad_compose(&nu2s, &[l2, SimplexWeights::unit()]).unwrap();
        assert_eq!(fwd.entries()[0], rev.entries()[2]);
        assert_eq!(&fwd.entries()[1..], &rev.entries()[..2]);
    }

    #[test]
    fn operad_laws_hold() {
        for r in check_operad_laws(5, 100).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn random_affine_maps_are_short() {
        let mut rng = trial_rng(4, 0);
        for norm in Norm::ALL {
            for _ in 0..50 {
                let g = AffineMap::random_short(&mut rng, 3, norm);
                let x = Region::Whole.sample(&mut rng, 3);
                let y = Region::Whole.sample(&mut rng, 3);
                assert!(norm.distance(&g.apply(&x), &g.apply(&y)) <= norm.distance(&x, &y) + 1e-9);
            }
        }
    }

    #[test]
    fn affine_pushforward_commutes() {
        let mut rng = trial_rng(6, 0);
        let a = ConvexAlgebra::new(2, Norm::Linf).unwrap();
        let carrier = a.sample_roster(&mut rng, 4);
        let space = Arc::new(carrier.metric_space());
        let p = crate::random::random_float_measure(&mut rng, &space, 4);
        let g = AffineMap::random_short(&mut rng, 2, Norm::Linf);
        assert!(affine_pushforward_discrepancy(&a, &g, &carrier, &p).unwrap() < 1e-12);
    }

    #[test]
    fn sub_carriers_are_closed_under_barycenters() {
        for region in [Region::Box { lo: 0.0, hi: 1.0 }, Region::ProbabilitySimplex] {
            let a = ConvexAlgebra::new(3, Norm::L1).unwrap().with_region(region);
            let results = check_algebra_laws(&a, 2, 40).unwrap();
            assert!(results.iter().all(|r| r.pass), "{results:?}");
        }
    }

    #[test]
    fn free_algebra_is_exact() {
        for r in check_free_algebra(3, 40).unwrap() {
            assert_eq!(r.worst_discrepancy, 0.0, "{r:?}");
        }
    }

    #[test]
    fn singleton_carrier() {
        let a = ConvexAlgebra::new(2, Norm::L2).unwrap();
        let carrier = a.roster(vec![vec![1.0, -1.0]]).unwrap();
        let space = Arc::new(carrier.metric_space());
        let d = DiscreteMeasure::dirac(space, 0).unwrap();
        assert_eq!(barycenter(&a, &carrier, &d).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn multiset_structures_agree() {
        let a = ConvexAlgebra::new(1, Norm::L2).unwrap();
        let carrier = a.roster(vec![vec![0.0], vec![3.0], vec![9.0]]).unwrap();
        let space = Arc::new(carrier.metric_space());
        let ms = crate::power::MultiSet::new(space, vec![0, 1, 2]).unwrap();
        let m = mean(&a, &tuple_points(&carrier, ms.entries())).unwrap();
        assert_eq!(m, vec![4.0]);
    }
}
