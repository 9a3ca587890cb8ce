//! Seeded random instances for law checks and studies.
//!
//! All randomness comes from ChaCha8 seeded by `(seed, stream)`; each trial
//! gets its own stream so results do not depend on execution order.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::DiscreteMeasure;
use crate::power::{MultiSet, Tuple};
use crate::spaces::{EuclideanSpace, FiniteMetricSpace, Norm};

/// Identifier written into reports that depend on these generators.
pub const RNG_ALGORITHM: &str = "chacha8-stream";

/// The generator for one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Size limits for sampled instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub max_points: usize,
    pub max_support: usize,
    pub max_den: i64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_points: 6,
            max_support: 4,
            max_den: 7,
        }
    }
}

/// `n` uniform points in `[0, 10)^dim`.
pub fn random_euclidean<R: Rng>(rng: &mut R, n: usize, dim: usize, norm: Norm) -> EuclideanSpace {
    let points = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    EuclideanSpace::new(dim, norm, points).expect("well-formed points")
}

/// A random metric space with `n` points: a point cloud in the line or the
/// plane under a random norm.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> Arc<FiniteMetricSpace> {
    let dim = rng.gen_range(1..=2);
    let norm = Norm::ALL[rng.gen_range(0..3)];
    Arc::new(random_euclidean(rng, n, dim, norm).metric_space())
}

/// Splits `total` into `parts` positive integers, uniformly over compositions.
pub fn random_composition<R: Rng>(rng: &mut R, total: i64, parts: usize) -> Vec<i64> {
    assert!(parts >= 1 && parts as i64 <= total);
    let mut cuts: Vec<i64> = (1..total).collect::<Vec<_>>();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut last = 0;
    for c in cuts {
        out.push(c - last);
        last = c;
    }
    out.push(total - last);
    out
}

/// `k` distinct points of the roster.
pub fn random_support<R: Rng>(rng: &mut R, space_len: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..space_len).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    idx
}

/// A measure with weights `k_i / den`, `den <= max_den`.
pub fn random_rational_measure<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteMetricSpace>,
    max_support: usize,
    max_den: i64,
) -> DiscreteMeasure {
    let den = rng.gen_range(1..=max_den);
    let cap = max_support.min(space.len()).min(den as usize).max(1);
    let k = rng.gen_range(1..=cap);
    let support = random_support(rng, space.len(), k);
    let num = random_composition(rng, den, k);
    DiscreteMeasure::from_rational(space.clone(), support, num, den).expect("valid composition")
}

/// A measure with generic float weights.
pub fn random_float_measure<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteMetricSpace>,
    max_support: usize,
) -> DiscreteMeasure {
    let k = rng.gen_range(1..=max_support.min(space.len()).max(1));
    let support = random_support(rng, space.len(), k);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..k - 1].iter().sum();
    weights[k - 1] = 1.0 - head;
    DiscreteMeasure::new(space.clone(), support, weights).expect("normalised weights")
}

pub fn random_tuple<R: Rng>(rng: &mut R, space: &Arc<FiniteMetricSpace>, n: usize) -> Tuple {
    let entries = (0..n).map(|_| rng.gen_range(0..space.len())).collect();
    Tuple::new(space.clone(), entries).expect("valid indices")
}

pub fn random_multiset<R: Rng>(rng: &mut R, space: &Arc<FiniteMetricSpace>, n: usize) -> MultiSet {
    let entries = (0..n).map(|_| rng.gen_range(0..space.len())).collect();
    MultiSet::new(space.clone(), entries).expect("valid indices")
}

pub fn random_grid<R: Rng>(rng: &mut R, space_len: usize, rows: usize, cols: usize) -> Vec<Vec<usize>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..space_len)).collect())
        .collect()
}

/// A short map out of a point cloud: clamp every coordinate to a random box,
/// then scale by a factor in `[0.3, 1]`. Coincident images are merged, so the
/// returned index map lands in a possibly smaller roster.
pub fn random_short_map<R: Rng>(rng: &mut R, cloud: &EuclideanSpace) -> (Vec<usize>, Arc<FiniteMetricSpace>) {
    let dim = cloud.dim();
    let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..5.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..5.0)).collect();
    let scale = rng.gen_range(0.3..=1.0);
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut map = Vec::with_capacity(cloud.len());
    for p in cloud.points() {
        let img: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, v)| v.clamp(lo[k], hi[k]) * scale)
            .collect();
        match images.iter().position(|q| *q == img) {
            Some(i) => map.push(i),
            None => {
                map.push(images.len());
                images.push(img);
            }
        }
    }
    let target = EuclideanSpace::new(dim, cloud.norm(), images).expect("same dimension");
    (map, Arc::new(target.metric_space()))
}

/// An isometric embedding of a point cloud into a larger cloud: the original
/// points plus `extra` new ones, shuffled.
pub fn random_isometric_embedding<R: Rng>(
    rng: &mut R,
    cloud: &EuclideanSpace,
    extra: usize,
) -> (Vec<usize>, Arc<FiniteMetricSpace>) {
    let more = random_euclidean(rng, extra, cloud.dim(), cloud.norm());
    let mut all: Vec<(Option<usize>, Vec<f64>)> = cloud
        .points()
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (Some(i), p))
        .chain(more.points().iter().cloned().map(|p| (None, p)))
        .collect();
    all.shuffle(rng);
    let mut map = vec![0; cloud.len()];
    for (pos, (src, _)) in all.iter().enumerate() {
        if let Some(i) = src {
            map[*i] = pos;
        }
    }
    let points = all.into_iter().map(|(_, p)| p).collect();
    let target = EuclideanSpace::new(cloud.dim(), cloud.norm(), points).expect("same dimension");
    (map, Arc::new(target.metric_space()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{check_isometric, check_short, validate_metric};
    use crate::TAU_METRIC;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 3).gen();
        let b: u64 = trial_rng(7, 3).gen();
        let c: u64 = trial_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn compositions_sum_to_total() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..200 {
            let total = rng.gen_range(1..10);
            let parts = rng.gen_range(1..=total as usize);
            let c = random_composition(&mut rng, total, parts);
            assert_eq!(c.len(), parts);
            assert_eq!(c.iter().sum::<i64>(), total);
            assert!(c.iter().all(|&x| x >= 1));
        }
    }

    #[test]
    fn sampled_spaces_are_metric() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..50 {
            let n = rng.gen_range(1..8);
            let s = random_space(&mut rng, n);
            assert!(validate_metric(&s, TAU_METRIC).is_valid());
        }
    }

    #[test]
    fn sampled_maps_are_short_or_isometric() {
        let mut rng = trial_rng(3, 0);
        for _ in 0..50 {
            let norm = Norm::ALL[rng.gen_range(0..3)];
            let cloud = random_euclidean(&mut rng, 5, 2, norm);
            let x = cloud.metric_space();
            let (f, y) = random_short_map(&mut rng, &cloud);
            assert!(check_short(&f, &x, &y, TAU_METRIC).unwrap());
            let (g, z) = random_isometric_embedding(&mut rng, &cloud, 3);
            assert_eq!(z.len(), 8);
            assert!(check_isometric(&g, &x, &z, TAU_METRIC).unwrap());
        }
    }
}
