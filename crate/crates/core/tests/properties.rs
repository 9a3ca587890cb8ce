use std::sync::Arc;

use kantorovich::graded::{check_assoc_square, curry_flatten, NestedTuple, Nesting3};
use kantorovich::measures::{first_moment, mixture, pushforward, DiscreteMeasure, Weights};
use kantorovich::monad::{empirical, empirical_sym};
use kantorovich::power::{
    multiset_distance, precompose, quotient, repeat_embedding, tuple_distance, FinUnifMap, MultiSet, Tuple,
};
use kantorovich::spaces::{check_short, EuclideanSpace, FiniteMetricSpace, Norm};
use kantorovich::transport::{w1, w1_bruteforce, w1_dual_value, Solver};
use kantorovich::TAU_METRIC;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Linf)]
}

/// A cloud of `1..=max` distinct-ish points in the plane.
fn cloud(max: usize) -> impl Strategy<Value = EuclideanSpace> {
    (
        norm(),
        prop::collection::vec(prop::collection::vec(-10i32..10, 2), 1..=max),
    )
        .prop_map(|(n, pts)| {
            let pts = pts
                .into_iter()
                .map(|p| p.into_iter().map(f64::from).collect())
                .collect();
            EuclideanSpace::new(2, n, pts).unwrap()
        })
}

/// A rational measure on a space of `n` points, as integer counts per point.
fn counts(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..4, n).prop_filter("nonzero mass", |c| c.iter().sum::<i64>() > 0)
}

fn measure(space: &Arc<FiniteMetricSpace>, counts: &[i64]) -> DiscreteMeasure {
    let den: i64 = counts.iter().sum();
    DiscreteMeasure::from_rational(space.clone(), (0..counts.len()).collect(), counts.to_vec(), den).unwrap()
}

/// A space together with three measures on it.
fn instance(max: usize) -> impl Strategy<Value = (EuclideanSpace, Vec<i64>, Vec<i64>, Vec<i64>)> {
    cloud(max).prop_flat_map(|c| {
        let n = c.len();
        (Just(c), counts(n), counts(n), counts(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn w1_is_a_metric((c, a, b, z) in instance(5)) {
        let s = Arc::new(c.metric_space());
        let (p, q, r) = (measure(&s, &a), measure(&s, &b), measure(&s, &z));
        let pq = w1(&p, &q, Solver::Auto).unwrap().cost;
        let qp = w1(&q, &p, Solver::Flow).unwrap().cost;
        let pr = w1(&p, &r, Solver::Auto).unwrap().cost;
        let rq = w1(&r, &q, Solver::Auto).unwrap().cost;
        prop_assert!(pq >= 0.0);
        prop_assert!((pq - qp).abs() < TOL);
        prop_assert!(pq <= pr + rq + TOL);
        prop_assert_eq!(w1(&p, &p, Solver::Auto).unwrap().cost, 0.0);
    }

    #[test]
    fn dual_potential_certifies((c, a, b, _z) in instance(6)) {
        let s = Arc::new(c.metric_space());
        let (p, q) = (measure(&s, &a), measure(&s, &b));
        let res = w1(&p, &q, Solver::Flow).unwrap();
        let value = w1_dual_value(&p, &q, &res.dual).unwrap();
        prop_assert!((res.cost - value).abs() < TOL);
        prop_assert!(res.gap >= 0.0 && res.gap <= TOL);
    }

    #[test]
    fn solvers_agree_on_small_denominators(c in cloud(4), a in counts(4), b in counts(4)) {
        let n = c.len();
        let s = Arc::new(c.metric_space());
        let (a, b) = (&a[..n], &b[..n]);
        prop_assume!(a.iter().sum::<i64>() > 0 && b.iter().sum::<i64>() > 0);
        let (p, q) = (measure(&s, a), measure(&s, b));
        prop_assume!(kantorovich::transport::w1_assignment(&p, &q).is_ok());
        if let Ok(brute) = w1_bruteforce(&p, &q) {
            for solver in [Solver::Flow, Solver::Assignment, Solver::Brute] {
                prop_assert!((w1(&p, &q, solver).unwrap().cost - brute).abs() < TOL);
            }
        }
    }

    #[test]
    fn dirac_distance_is_first_moment((c, a, _b, _z) in instance(6), x in 0usize..6) {
        let s = Arc::new(c.metric_space());
        let x = x % s.len();
        let p = measure(&s, &a);
        let d = DiscreteMeasure::dirac(s.clone(), x).unwrap();
        let cost = w1(&d, &p, Solver::Auto).unwrap().cost;
        prop_assert!((cost - first_moment(&p, x).unwrap()).abs() < TOL);
    }

    #[test]
    fn mixing_scales_distance((c, a, b, z) in instance(5), k in 0i64..=5) {
        let s = Arc::new(c.metric_space());
        let (q1, q2, p) = (measure(&s, &a), measure(&s, &b), measure(&s, &z));
        let w = Weights::from_counts(&[k, 5 - k], 5).unwrap();
        let m1 = mixture(&w, &[q1.clone(), p.clone()]).unwrap();
        let m2 = mixture(&w, &[q2.clone(), p]).unwrap();
        let lhs = w1(&m1, &m2, Solver::Flow).unwrap().cost;
        let rhs = k as f64 / 5.0 * w1(&q1, &q2, Solver::Flow).unwrap().cost;
        prop_assert!((lhs - rhs).abs() < TOL);
    }

    #[test]
    fn pushforward_is_functorial_and_short(
        (c, a, b, _z) in instance(6),
        f in prop::collection::vec(0usize..4, 6),
        g in prop::collection::vec(0usize..3, 4),
    ) {
        let n = c.len();
        let s = Arc::new(c.metric_space());
        let (p, q) = (measure(&s, &a), measure(&s, &b));
        let f = &f[..n];

        let y = Arc::new(FiniteMetricSpace::from_line(&[0.0, 1.0, 2.0, 3.0]));
        let z = Arc::new(FiniteMetricSpace::from_line(&[0.0, 1.0, 5.0]));
        let gf: Vec<usize> = f.iter().map(|&i| g[i]).collect();
        let two_step = pushforward(&g, z.clone(), &pushforward(f, y.clone(), &p).unwrap()).unwrap();
        prop_assert_eq!(two_step, pushforward(&gf, z, &p).unwrap());
        let id: Vec<usize> = (0..n).collect();
        prop_assert_eq!(pushforward(&id, s.clone(), &p).unwrap(), p.clone());

        if check_short(f, &s, &y, TAU_METRIC).unwrap() {
            let before = w1(&p, &q, Solver::Flow).unwrap().cost;
            let after = w1(
                &pushforward(f, y.clone(), &p).unwrap(),
                &pushforward(f, y, &q).unwrap(),
                Solver::Flow,
            ).unwrap().cost;
            prop_assert!(after <= before + TOL);
        }
    }

    #[test]
    fn embedding_preserves_distance((c, a, b, _z) in instance(5), extra in cloud(3), seed in any::<u64>()) {
        let n = c.len();
        let s = Arc::new(c.metric_space());
        let (p, q) = (measure(&s, &a), measure(&s, &b));
        let mut points: Vec<(Option<usize>, Vec<f64>)> =
            c.points().iter().cloned().enumerate().map(|(i, v)| (Some(i), v)).collect();
        points.extend(extra.points().iter().cloned().map(|v| (None, v)));
        let len = points.len();
        points.rotate_left((seed % len as u64) as usize);
        let mut embed = vec![0; n];
        for (pos, (src, _)) in points.iter().enumerate() {
            if let Some(i) = src {
                embed[*i] = pos;
            }
        }
        let big = EuclideanSpace::new(2, c.norm(), points.into_iter().map(|x| x.1).collect()).unwrap();
        let t = Arc::new(big.metric_space());
        let before = w1(&p, &q, Solver::Auto).unwrap().cost;
        let after = w1(&p.relabel(&embed, t.clone()).unwrap(), &q.relabel(&embed, t).unwrap(), Solver::Auto)
            .unwrap()
            .cost;
        prop_assert!((before - after).abs() < TOL);
    }

    #[test]
    fn multiset_metric_is_below_tuple_metric(c in cloud(5), e in prop::collection::vec((0usize..5, 0usize..5), 1..=6)) {
        let s = Arc::new(c.metric_space());
        let n = s.len();
        let ta = Tuple::new(s.clone(), e.iter().map(|x| x.0 % n).collect()).unwrap();
        let tb = Tuple::new(s.clone(), e.iter().map(|x| x.1 % n).collect()).unwrap();
        let dm = multiset_distance(&quotient(&ta), &quotient(&tb)).unwrap();
        prop_assert!(dm <= tuple_distance(&ta, &tb).unwrap() + TOL);
        let w = w1(&empirical(&ta), &empirical(&tb), Solver::Auto).unwrap().cost;
        prop_assert!((w - dm).abs() < TOL);
    }

    #[test]
    fn quotient_is_natural(
        c in cloud(5),
        e in prop::collection::vec(0usize..5, 1..=3),
        k in 1usize..=3,
        rot in 0usize..9,
    ) {
        let s = Arc::new(c.metric_space());
        let m = e.len();
        let t = Tuple::new(s.clone(), e.iter().map(|x| x % s.len()).collect()).unwrap();
        let mut assignment: Vec<usize> = (0..m * k).map(|i| i % m).collect();
        assignment.rotate_left(rot % (m * k));
        let phi = FinUnifMap::new(assignment, m).unwrap();
        let lhs = quotient(&precompose(&phi, &t).unwrap());
        prop_assert_eq!(lhs, repeat_embedding(&quotient(&t), k).unwrap());
    }

    #[test]
    fn repetition_is_isometric(c in cloud(5), e in prop::collection::vec((0usize..5, 0usize..5), 1..=3), k in 1usize..=3) {
        let s = Arc::new(c.metric_space());
        let n = s.len();
        let a = MultiSet::new(s.clone(), e.iter().map(|x| x.0 % n).collect()).unwrap();
        let b = MultiSet::new(s.clone(), e.iter().map(|x| x.1 % n).collect()).unwrap();
        let ra = repeat_embedding(&a, k).unwrap();
        let rb = repeat_embedding(&b, k).unwrap();
        prop_assert!((multiset_distance(&ra, &rb).unwrap() - multiset_distance(&a, &b).unwrap()).abs() < TOL);
        prop_assert_eq!(empirical_sym(&ra), empirical_sym(&a));
    }

    #[test]
    fn currying_is_associative(grid in prop::collection::vec(prop::collection::vec(prop::collection::vec(0usize..4, 2), 3), 1..=3)) {
        prop_assert_eq!(check_assoc_square(&Nesting3::Tuples(grid.clone())).unwrap(), 0.0);
        prop_assert_eq!(check_assoc_square(&Nesting3::Multisets(grid.clone())).unwrap(), 0.0);
        let s = Arc::new(FiniteMetricSpace::from_line(&[0.0, 1.0, 2.0, 3.0]));
        let nt = NestedTuple::new(s, grid[0].clone()).unwrap();
        prop_assert_eq!(curry_flatten(&nt).entries().to_vec(), grid[0].concat());
    }
}
