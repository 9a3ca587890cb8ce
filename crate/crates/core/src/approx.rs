//! Approximating measures by nicer ones: rational weights, bounded support,
//! and empirical samples.

use rand::Rng;
use serde::Serialize;

use crate::measures::{DiscreteMeasure, Rational, Weights};
use crate::monad::empirical_sym;
use crate::power::MultiSet;
use crate::random::trial_rng;
use crate::transport::{w1, Solver};
use crate::{Error, Result};

/// Largest grid `N = ceil(1/ε)` accepted by [`rationalize`].
pub const MAX_GRID: f64 = 1e12;

/// An approximant together with its measured and predicted error.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub target: DiscreteMeasure,
    pub approximant: DiscreteMeasure,
    /// `W1(target, approximant)` from the flow solver.
    pub w1_error: f64,
    /// A-priori upper bound on the error, where one is known.
    pub bound: Option<f64>,
    /// Closed-form value of the error, where one is known.
    pub formula_error: Option<f64>,
    pub epsilon: Option<f64>,
    pub radius: Option<f64>,
    pub center: Option<usize>,
}

impl ApproximationReport {
    fn new(target: DiscreteMeasure, approximant: DiscreteMeasure) -> Result<Self> {
        let w1_error = w1(&target, &approximant, Solver::Flow)?.cost;
        Ok(ApproximationReport {
            target,
            approximant,
            w1_error,
            bound: None,
            formula_error: None,
            epsilon: None,
            radius: None,
            center: None,
        })
    }

    /// Whether the measured error respects the bound (vacuously true without one).
    pub fn within_bound(&self, tol: f64) -> bool {
        self.bound.is_none_or(|b| self.w1_error <= b + tol)
    }
}

fn weights_of(p: &DiscreteMeasure) -> Result<Weights> {
    match p.exact_weights() {
        Some(ex) => Weights::exact(ex.to_vec()),
        None => Weights::new(p.weights().to_vec()),
    }
}

/// Largest `k` with `k / n <= w`.
fn grid_floor(w: f64, exact: Option<Rational>, n: i64) -> i64 {
    if let Some(r) = exact {
        // floor(num * n / den) without overflow for moderate n.
        let num = *r.numer() as i128 * n as i128;
        return (num / *r.denom() as i128) as i64;
    }
    let mut k = (w * n as f64).floor() as i64;
    while k > 0 && k as f64 / n as f64 > w {
        k -= 1;
    }
    while (k + 1) as f64 / n as f64 <= w {
        k += 1;
    }
    k
}

/// Rounds every weight but the last down to the grid `1/N`, `N = ceil(1/ε)`,
/// and gives the remainder to the last support point. The error is bounded
/// by `(n-1)·ε·D`, where `n` is the support size and `D` the diameter of the
/// support.
pub fn rationalize(p: &DiscreteMeasure, epsilon: f64) -> Result<ApproximationReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::OutOfRange(format!("ε = {epsilon} must be positive")));
    }
    let grid = (1.0 / epsilon).ceil();
    if grid > MAX_GRID {
        return Err(Error::OutOfRange(format!("ε = {epsilon} is too small")));
    }
    let grid = (grid as i64).max(1);
    let n = p.len();
    let mut counts: Vec<i64> = Vec::with_capacity(n);
    for (i, &w) in p.weights().iter().enumerate().take(n - 1) {
        counts.push(grid_floor(w, p.exact_weight_of(p.support()[i]), grid));
    }
    let head: i64 = counts.iter().sum();
    if head > grid {
        return Err(Error::Solver("rounded weights exceed total mass".into()));
    }
    counts.push(grid - head);
    let q = DiscreteMeasure::from_rational(p.space().clone(), p.support().to_vec(), counts, grid)?;
    let diameter = p.space().diameter_of(p.support());
    let mut report = ApproximationReport::new(p.clone(), q)?;
    report.bound = Some((n - 1) as f64 * epsilon * diameter);
    report.epsilon = Some(epsilon);
    Ok(report)
}

/// Moves all mass outside the closed ball `B(x0, ρ)` onto `x0`. The error is
/// exactly `Σ_{d(x_i, x0) > ρ} w_i d(x_i, x0)`, reported as `formula_error`
/// next to the solver's value.
pub fn truncate_to_ball(p: &DiscreteMeasure, x0: usize, radius: f64) -> Result<ApproximationReport> {
    if !(radius >= 0.0) {
        return Err(Error::OutOfRange(format!("radius {radius} must be nonnegative")));
    }
    let space = p.space();
    space.check_index(x0)?;
    let mut moved = 0.0;
    let support: Vec<usize> = p
        .atoms()
        .map(|(x, w)| {
            let d = space.d(x, x0);
            if d > radius {
                moved += w * d;
                x0
            } else {
                x
            }
        })
        .collect();
    let q = DiscreteMeasure::with_weights(space.clone(), support, &weights_of(p)?)?;
    let mut report = ApproximationReport::new(p.clone(), q)?;
    report.formula_error = Some(moved);
    report.bound = Some(moved);
    report.radius = Some(radius);
    report.center = Some(x0);
    Ok(report)
}

/// `n` independent draws from `p` by inverse CDF over the canonical support
/// order, using the supplied generator.
pub fn sample_empirical_with<R: Rng>(p: &DiscreteMeasure, n: usize, rng: &mut R) -> Result<MultiSet> {
    if n == 0 {
        return Err(Error::ZeroMultiplicity);
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &w in p.weights() {
        acc += w;
        cdf.push(acc);
    }
    let entries = (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(p.len() - 1);
            p.support()[i]
        })
        .collect();
    MultiSet::new(p.space().clone(), entries)
}

/// `n` independent draws from `p`, deterministic in `seed`.
pub fn sample_empirical(p: &DiscreteMeasure, n: usize, seed: u64) -> Result<MultiSet> {
    sample_empirical_with(p, n, &mut trial_rng(seed, 0))
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub median_w1: f64,
    pub trials: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Stream index of trial `trial` at the `size_index`-th sample size.
pub fn study_stream(size_index: usize, trial: usize) -> u64 {
    ((size_index as u64) << 32) | trial as u64
}

/// For each sample size, the median over `trials` runs of the distance
/// between the empirical measure of an `n`-sample and `p`.
pub fn convergence_study(p: &DiscreteMeasure, sizes: &[usize], trials: usize, seed: u64) -> Result<Vec<StudyRow>> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("sample sizes must be strictly ascending".into()));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let mut dists = (0..trials)
                .map(|t| {
                    let mut rng = trial_rng(seed, study_stream(si, t));
                    let sample = sample_empirical_with(p, n, &mut rng)?;
                    Ok(w1(&empirical_sym(&sample), p, Solver::Flow)?.cost)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(StudyRow {
                n,
                median_w1: median(&mut dists),
                trials,
            })
        })
        .collect()
}

/// Number of consecutive rows whose median increases.
pub fn count_inversions(rows: &[StudyRow]) -> usize {
    rows.windows(2).filter(|w| w[1].median_w1 > w[0].median_w1).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::FiniteMetricSpace;
    use std::sync::Arc;

    fn line(points: &[f64]) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::from_line(points))
    }

    #[test]
    fn rationalize_example() {
        let s = line(&[0.0, 2.0]);
        let p = DiscreteMeasure::new(s, vec![0, 1], vec![0.35, 0.65]).unwrap();
        let r = rationalize(&p, 0.1).unwrap();
        assert_eq!(
            r.approximant.exact_weights().unwrap(),
            &[Rational::new(3, 10), Rational::new(7, 10)]
        );
        assert!((r.w1_error - 0.1).abs() < 1e-9);
        assert!((r.bound.unwrap() - 0.2).abs() < 1e-12);
        assert!(r.within_bound(1e-8));
    }

    #[test]
    fn rationalize_trivial_cases() {
        let s = line(&[0.0, 1.0, 5.0]);
        let p = DiscreteMeasure::from_rational(s.clone(), vec![0, 1, 2], vec![1, 2, 1], 4).unwrap();
        assert_eq!(rationalize(&p, 0.25).unwrap().w1_error, 0.0);
        let d = DiscreteMeasure::dirac(s, 2).unwrap();
        let r = rationalize(&d, 0.7).unwrap();
        assert_eq!((r.w1_error, r.bound), (0.0, Some(0.0)));
        assert!(rationalize(&p, 0.0).is_err());
        assert!(rationalize(&p, -1.0).is_err());
    }

    #[test]
    fn rationalize_weights_stay_below() {
        let s = line(&[0.0, 1.0, 3.0]);
        let p = DiscreteMeasure::new(s, vec![0, 1, 2], vec![0.29, 0.57, 0.14]).unwrap();
        let r = rationalize(&p, 0.01).unwrap();
        let q = r.approximant.weights();
        for i in 0..2 {
            assert!(q[i] <= p.weights()[i] + 1e-15);
            assert!(p.weights()[i] - q[i] < 0.01);
        }
        assert!(r.within_bound(1e-8));
    }

    #[test]
    fn truncation_example() {
        let s = line(&[0.0, 10.0]);
        let p = DiscreteMeasure::from_rational(s.clone(), vec![0, 1], vec![1, 1], 2).unwrap();
        let r = truncate_to_ball(&p, 0, 5.0).unwrap();
        assert_eq!(r.approximant, DiscreteMeasure::dirac(s, 0).unwrap());
        assert_eq!(r.formula_error, Some(5.0));
        assert!((r.w1_error - 5.0).abs() < 1e-12);

        let keep = truncate_to_ball(&p, 0, 10.0).unwrap();
        assert_eq!(keep.approximant, p);
        assert_eq!(keep.w1_error, 0.0);
        assert!(truncate_to_ball(&p, 0, -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_sized() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let p = DiscreteMeasure::from_rational(s.clone(), vec![0, 1, 2, 3], vec![1, 1, 1, 1], 4).unwrap();
        let a = sample_empirical(&p, 17, 3).unwrap();
        assert_eq!(a, sample_empirical(&p, 17, 3).unwrap());
        assert_eq!(a.len(), 17);
        let d = DiscreteMeasure::dirac(s, 2).unwrap();
        assert_eq!(sample_empirical(&d, 5, 9).unwrap().entries(), &[2; 5]);
        assert!(sample_empirical(&p, 0, 1).is_err());
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let p = DiscreteMeasure::from_rational(s, vec![0, 1, 2, 3], vec![1, 1, 1, 1], 4).unwrap();
        let good = (0..100)
            .filter(|&seed| {
                let e = empirical_sym(&sample_empirical(&p, 1000, seed).unwrap());
                (0..4).all(|x| (e.weight_of(x) - 0.25).abs() <= 0.05)
            })
            .count();
        assert!(good >= 95, "{good}");
    }

    #[test]
    fn dirac_study_is_zero() {
        let s = line(&[0.0, 1.0]);
        let d = DiscreteMeasure::dirac(s, 1).unwrap();
        let rows = convergence_study(&d, &[1, 2, 4], 5, 0).unwrap();
        assert!(rows.iter().all(|r| r.median_w1 == 0.0));
        assert!(convergence_study(&d, &[4, 2], 5, 0).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
