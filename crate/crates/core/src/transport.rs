//! Exact Wasserstein-1 distances between discrete measures.
//!
//! Three primal routes are available:
//!
//! - **brute force**: expand both measures to uniform multisets over their
//!   common denominator and enumerate every pairing (small denominators only);
//! - **assignment**: the same expansion, solved by the Hungarian algorithm;
//! - **flow**: successive shortest paths on the bipartite support graph,
//!   on integers scaled by the common denominator when both measures are
//!   rational, on floats otherwise.
//!
//! Every solver that returns a [`TransportResult`] also returns a
//! 1-Lipschitz dual potential read off an optimality certificate of the
//! plan, and the resulting duality gap.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assignment::{brute_force_assignment, hungarian};
use crate::flow;
use crate::measures::{same_space, DiscreteMeasure};
use crate::power::MultiSet;
use crate::{Error, Result, TAU_METRIC};

/// Largest common denominator accepted by [`w1_bruteforce`].
pub const BRUTE_FORCE_LIMIT: u64 = 8;
/// Largest common denominator for which `auto` picks the assignment route.
pub const AUTO_ASSIGNMENT_LIMIT: u64 = 64;
/// Largest common denominator accepted by the assignment route.
pub const ASSIGNMENT_LIMIT: u64 = 512;
/// Largest common denominator for which the flow runs on integers.
pub const EXACT_FLOW_LIMIT: u64 = 1_000_000;

/// Solver requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Auto,
    Assignment,
    Flow,
    Brute,
}

/// Route actually taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BruteForce,
    Assignment,
    ExactFlow,
    FloatFlow,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute-force",
            Method::Assignment => "assignment",
            Method::ExactFlow => "exact-flow",
            Method::FloatFlow => "float-flow",
        })
    }
}

/// A transport plan between `p` and `q`, indexed by their support positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    p: DiscreteMeasure,
    q: DiscreteMeasure,
    plan: Vec<f64>,
}

impl Coupling {
    /// `plan` is row-major `|supp p| × |supp q|`.
    pub fn new(p: DiscreteMeasure, q: DiscreteMeasure, plan: Vec<f64>) -> Result<Self> {
        if !same_space(p.space(), q.space()) {
            return Err(Error::SpaceMismatch);
        }
        if plan.len() != p.len() * q.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len() * q.len(),
                got: plan.len(),
            });
        }
        Ok(Coupling { p, q, plan })
    }

    /// The independent coupling `p ⊗ q`.
    pub fn product(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<Self> {
        let plan = p
            .weights()
            .iter()
            .flat_map(|a| q.weights().iter().map(move |b| a * b))
            .collect();
        Self::new(p.clone(), q.clone(), plan)
    }

    /// `p` coupled with itself along the diagonal.
    pub fn diagonal(p: &DiscreteMeasure) -> Self {
        let k = p.len();
        let mut plan = vec![0.0; k * k];
        for (i, w) in p.weights().iter().enumerate() {
            plan[i * k + i] = *w;
        }
        Coupling {
            p: p.clone(),
            q: p.clone(),
            plan,
        }
    }

    pub fn p(&self) -> &DiscreteMeasure {
        &self.p
    }

    pub fn q(&self) -> &DiscreteMeasure {
        &self.q
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.q.len() + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.plan.chunks(self.q.len()).map(|r| r.to_vec()).collect()
    }
}

/// `Σ_ij r_ij d(x_i, y_j)`.
pub fn coupling_cost(c: &Coupling) -> f64 {
    let space = c.p.space();
    let n = c.q.len();
    let mut total = 0.0;
    for (i, &x) in c.p.support().iter().enumerate() {
        for (j, &y) in c.q.support().iter().enumerate() {
            total += c.plan[i * n + j] * space.d(x, y);
        }
    }
    total
}

/// Marginal and sign check of a coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub max_row_error: f64,
    pub max_col_error: f64,
    pub min_entry: f64,
    pub valid: bool,
}

pub fn validate_coupling(c: &Coupling, tol: f64) -> CouplingReport {
    let (m, n) = (c.p.len(), c.q.len());
    let mut max_row_error = 0.0f64;
    for i in 0..m {
        let s: f64 = (0..n).map(|j| c.entry(i, j)).sum();
        max_row_error = max_row_error.max((s - c.p.weights()[i]).abs());
    }
    let mut max_col_error = 0.0f64;
    for j in 0..n {
        let s: f64 = (0..m).map(|i| c.entry(i, j)).sum();
        max_col_error = max_col_error.max((s - c.q.weights()[j]).abs());
    }
    let min_entry = c.plan.iter().copied().fold(f64::INFINITY, f64::min);
    CouplingReport {
        max_row_error,
        max_col_error,
        min_entry,
        valid: max_row_error <= tol && max_col_error <= tol && min_entry >= 0.0,
    }
}

/// A function on a finite set of points, used as a Kantorovich potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPotential {
    points: Vec<usize>,
    values: Vec<f64>,
}

impl DualPotential {
    /// Pairs `(point, value)`; points are sorted and must be distinct.
    pub fn new(mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::OutOfRange("potential defined twice at a point".into()));
        }
        let (points, values) = pairs.into_iter().unzip();
        Ok(DualPotential { points, values })
    }

    /// Evaluates a closure on the given points.
    pub fn from_fn(points: &[usize], f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(points.iter().map(|&x| (x, f(x))).collect())
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: usize) -> Option<f64> {
        self.points.binary_search(&x).ok().map(|i| self.values[i])
    }

    /// Fails on the first pair with `|f(x) - f(y)| > d(x, y) + tol`.
    pub fn check_lipschitz(&self, space: &crate::spaces::FiniteMetricSpace, tol: f64) -> Result<()> {
        for (a, &x) in self.points.iter().enumerate() {
            for (b, &y) in self.points.iter().enumerate().skip(a + 1) {
                let dist = space.d(x, y);
                if (self.values[a] - self.values[b]).abs() > dist + tol {
                    return Err(Error::NotLipschitz { x, y, dist });
                }
            }
        }
        Ok(())
    }
}

/// Optimal cost, plan, potential and duality gap.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub cost: f64,
    pub coupling: Coupling,
    pub dual: DualPotential,
    /// `cost - (E_p[f] - E_q[f])`.
    pub gap: f64,
    pub method: Method,
}

fn check_shared(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<()> {
    if same_space(p.space(), q.space()) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

fn cost_matrix(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Vec<f64> {
    crate::power::pairing_costs(p.space(), p.support(), q.support())
}

/// Common denominator of two rational measures, with numerators over it.
fn common_scale(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Option<(u64, Vec<u64>, Vec<u64>)> {
    let (dp, np) = p.rational_block()?;
    let (dq, nq) = q.rational_block()?;
    let d = num_integer::lcm(dp, dq);
    let sp = np.iter().map(|k| k * (d / dp)).collect();
    let sq = nq.iter().map(|k| k * (d / dq)).collect();
    Some((d, sp, sq))
}

/// Position in the support list of each of the `den` expanded copies.
fn expand(counts: &[u64]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect()
}

/// `W1` by enumerating all pairings of the uniform expansions.
///
/// Both measures must be rational with common denominator at most
/// [`BRUTE_FORCE_LIMIT`].
pub fn w1_bruteforce(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    Ok(bruteforce_plan(p, q)?.0)
}

fn bruteforce_plan(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<(f64, Vec<f64>)> {
    check_shared(p, q)?;
    let (den, sp, sq) = common_scale(p, q).ok_or(Error::NotRational)?;
    if den > BRUTE_FORCE_LIMIT {
        return Err(Error::DenominatorTooLarge {
            den,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    expanded_plan(p, q, den, &sp, &sq, brute_force_assignment)
}

fn expanded_plan(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    den: u64,
    sp: &[u64],
    sq: &[u64],
    solve: fn(&[f64], usize) -> (f64, Vec<usize>),
) -> Result<(f64, Vec<f64>)> {
    let rows = expand(sp);
    let cols = expand(sq);
    let d = den as usize;
    let a: Vec<usize> = rows.iter().map(|&i| p.support()[i]).collect();
    let b: Vec<usize> = cols.iter().map(|&j| q.support()[j]).collect();
    let cost = crate::power::pairing_costs(p.space(), &a, &b);
    let (total, perm) = solve(&cost, d);
    let n = q.len();
    let mut counts = vec![0u64; p.len() * n];
    for (r, &c) in perm.iter().enumerate() {
        counts[rows[r] * n + cols[c]] += 1;
    }
    let plan = counts.iter().map(|&k| k as f64 / den as f64).collect();
    Ok((total / den as f64, plan))
}

/// `W1` by assignment on the uniform expansions over the common denominator.
pub fn w1_assignment(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<TransportResult> {
    check_shared(p, q)?;
    let (den, sp, sq) = common_scale(p, q).ok_or(Error::NotRational)?;
    if den > ASSIGNMENT_LIMIT {
        return Err(Error::DenominatorTooLarge {
            den,
            limit: ASSIGNMENT_LIMIT,
        });
    }
    let (_, plan) = expanded_plan(p, q, den, &sp, &sq, hungarian)?;
    finish(p, q, plan, Method::Assignment)
}

/// `W1` by min-cost flow on the bipartite support graph.
///
/// Runs on integers when both measures are rational with common denominator
/// at most [`EXACT_FLOW_LIMIT`], otherwise on floats.
pub fn w1_flow(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<TransportResult> {
    check_shared(p, q)?;
    let cost = cost_matrix(p, q);
    match common_scale(p, q) {
        Some((den, sp, sq)) if den <= EXACT_FLOW_LIMIT => {
            let supply: Vec<i64> = sp.iter().map(|&k| k as i64).collect();
            let demand: Vec<i64> = sq.iter().map(|&k| k as i64).collect();
            let f = flow::transport(&supply, &demand, &cost);
            let plan = f.iter().map(|&k| k as f64 / den as f64).collect();
            finish(p, q, plan, Method::ExactFlow)
        }
        _ => w1_float_flow(p, q),
    }
}

/// The float route of [`w1_flow`], regardless of rational blocks.
pub fn w1_float_flow(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<TransportResult> {
    check_shared(p, q)?;
    let cost = cost_matrix(p, q);
    let plan = flow::transport(p.weights(), q.weights(), &cost);
    finish(p, q, plan, Method::FloatFlow)
}

/// Dispatches on `solver`. `Auto` prefers assignment for small common
/// denominators, then the exact flow, then the float flow.
pub fn w1(p: &DiscreteMeasure, q: &DiscreteMeasure, solver: Solver) -> Result<TransportResult> {
    match solver {
        Solver::Flow => w1_flow(p, q),
        Solver::Assignment => w1_assignment(p, q),
        Solver::Brute => {
            let (_, plan) = bruteforce_plan(p, q)?;
            finish(p, q, plan, Method::BruteForce)
        }
        Solver::Auto => match p.common_denominator().zip(q.common_denominator()) {
            Some((a, b)) if num_integer::lcm(a, b) <= AUTO_ASSIGNMENT_LIMIT => w1_assignment(p, q),
            _ => w1_flow(p, q),
        },
    }
}

/// Builds the result for an optimal plan: cost, potential, gap.
fn finish(p: &DiscreteMeasure, q: &DiscreteMeasure, plan: Vec<f64>, method: Method) -> Result<TransportResult> {
    let (m, n) = (p.len(), q.len());
    let cost = cost_matrix(p, q);
    let (_, h_cols) = flow::certify(&cost, &plan, m, n);
    let space = p.space();

    // c-transform of the column potentials: 1-Lipschitz on the whole roster.
    let mut joint: Vec<usize> = p.support().iter().chain(q.support()).copied().collect();
    joint.sort_unstable();
    joint.dedup();
    let raw = |x: usize| -> f64 {
        q.support()
            .iter()
            .zip(&h_cols)
            .map(|(&y, &h)| space.d(x, y) - h)
            .fold(f64::INFINITY, f64::min)
    };
    let base = raw(joint[0]);
    let dual = DualPotential::from_fn(&joint, |x| raw(x) - base)?;

    let coupling = Coupling::new(p.clone(), q.clone(), plan)?;
    let total = coupling_cost(&coupling);
    let value = dual_value(p, q, &dual)?;
    let mut gap = total - value;
    if (-1e-12..0.0).contains(&gap) {
        gap = 0.0;
    }
    Ok(TransportResult {
        cost: total,
        coupling,
        dual,
        gap,
        method,
    })
}

fn dual_value(p: &DiscreteMeasure, q: &DiscreteMeasure, f: &DualPotential) -> Result<f64> {
    let eval = |m: &DiscreteMeasure| -> Result<f64> {
        m.atoms()
            .map(|(x, w)| {
                f.value(x)
                    .map(|v| w * v)
                    .ok_or(Error::OutOfRange(format!("potential undefined at point {x}")))
            })
            .sum()
    };
    Ok(eval(p)? - eval(q)?)
}

/// `E_p[f] - E_q[f]` for a potential that is 1-Lipschitz on its points.
///
/// `f` must be defined on `supp p ∪ supp q`. By weak duality the value never
/// exceeds `W1(p, q)`.
pub fn w1_dual_value(p: &DiscreteMeasure, q: &DiscreteMeasure, f: &DualPotential) -> Result<f64> {
    check_shared(p, q)?;
    f.check_lipschitz(p.space(), TAU_METRIC)?;
    dual_value(p, q, f)
}

/// Minimum of `(1/n) Σ_ij B_ij d(a_i, b_j)` over bistochastic `B`, solved as
/// a transport problem between the two empirical measures.
pub fn bistochastic_min(a: &MultiSet, b: &MultiSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let p = crate::monad::empirical_sym(a);
    let q = crate::monad::empirical_sym(b);
    Ok(w1_flow(&p, &q)?.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::first_moment;
    use crate::spaces::FiniteMetricSpace;
    use crate::TAU_SOLVER;
    use std::sync::Arc;

    fn line(points: &[f64]) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::from_line(points))
    }

    fn rat(s: &Arc<FiniteMetricSpace>, support: Vec<usize>, num: Vec<i64>, den: i64) -> DiscreteMeasure {
        DiscreteMeasure::from_rational(s.clone(), support, num, den).unwrap()
    }

    #[test]
    fn dirac_to_dirac() {
        let x = line(&[0.0, 3.0]);
        let a = DiscreteMeasure::dirac(x.clone(), 0).unwrap();
        let b = DiscreteMeasure::dirac(x, 1).unwrap();
        assert_eq!(w1_bruteforce(&a, &b).unwrap(), 3.0);
        let r = w1_flow(&a, &b).unwrap();
        assert_eq!(r.cost, 3.0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn split_mass_to_midpoint() {
        let x = line(&[0.0, 1.0, 2.0]);
        let p = rat(&x, vec![0, 2], vec![1, 1], 2);
        let q = DiscreteMeasure::dirac(x, 1).unwrap();
        assert_eq!(w1_bruteforce(&p, &q).unwrap(), 1.0);
        assert_eq!(w1_flow(&p, &q).unwrap().cost, 1.0);
    }

    #[test]
    fn swap_three_tenths() {
        let x = line(&[0.0, 1.0]);
        let p = rat(&x, vec![0, 1], vec![3, 7], 10);
        let q = rat(&x, vec![0, 1], vec![7, 3], 10);
        // D = 10 exceeds the brute-force limit; assignment enumerates the same pairings.
        assert!(matches!(
            w1_bruteforce(&p, &q),
            Err(Error::DenominatorTooLarge { den: 10, .. })
        ));
        let a = w1_assignment(&p, &q).unwrap();
        let f = w1_flow(&p, &q).unwrap();
        assert!((a.cost - 0.4).abs() < 1e-12);
        assert!((f.cost - 0.4).abs() < 1e-12);
        assert_eq!(f.method, Method::ExactFlow);
    }

    #[test]
    fn brute_force_needs_rationals() {
        let x = line(&[0.0, 1.0]);
        let p = DiscreteMeasure::new(x.clone(), vec![0, 1], vec![0.5, 0.5]).unwrap();
        assert_eq!(w1_bruteforce(&p, &p), Err(Error::NotRational));
    }

    #[test]
    fn self_distance_is_zero_with_identity_plan() {
        let x = line(&[0.0, 1.0, 4.0]);
        let p = DiscreteMeasure::new(x, vec![0, 1, 2], vec![0.2, 0.3, 0.5]).unwrap();
        let r = w1_flow(&p, &p).unwrap();
        assert_eq!(r.method, Method::FloatFlow);
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.coupling, Coupling::diagonal(&p));
    }

    #[test]
    fn dual_value_examples() {
        let x = line(&[0.0, 3.0]);
        let p = DiscreteMeasure::dirac(x.clone(), 0).unwrap();
        let q = DiscreteMeasure::dirac(x.clone(), 1).unwrap();
        let pos = DualPotential::new(vec![(0, 0.0), (1, 3.0)]).unwrap();
        let neg = DualPotential::new(vec![(0, 0.0), (1, -3.0)]).unwrap();
        let flat = DualPotential::new(vec![(0, 5.0), (1, 5.0)]).unwrap();
        assert_eq!(w1_dual_value(&p, &q, &pos).unwrap(), -3.0);
        assert_eq!(w1_dual_value(&p, &q, &neg).unwrap(), 3.0);
        assert_eq!(w1_dual_value(&p, &q, &flat).unwrap(), 0.0);
        let steep = DualPotential::new(vec![(0, 0.0), (1, 4.0)]).unwrap();
        assert!(matches!(w1_dual_value(&p, &q, &steep), Err(Error::NotLipschitz { .. })));
    }

    #[test]
    fn potential_is_normalised_and_lipschitz() {
        let x = line(&[0.0, 1.0, 2.5, 7.0]);
        let p = rat(&x, vec![0, 3], vec![1, 2], 3);
        let q = rat(&x, vec![1, 2], vec![1, 1], 2);
        let r = w1_flow(&p, &q).unwrap();
        assert_eq!(r.dual.value(0), Some(0.0));
        r.dual.check_lipschitz(&x, TAU_METRIC).unwrap();
        assert!(r.gap >= 0.0 && r.gap <= TAU_SOLVER);
    }

    #[test]
    fn product_coupling_with_dirac() {
        let x = line(&[0.0, 1.0, 2.5, 7.0]);
        let d = DiscreteMeasure::dirac(x.clone(), 1).unwrap();
        let p = DiscreteMeasure::new(x, vec![0, 2, 3], vec![0.1, 0.6, 0.3]).unwrap();
        let c = Coupling::product(&d, &p).unwrap();
        assert!(validate_coupling(&c, 1e-12).valid);
        assert!((coupling_cost(&c) - first_moment(&p, 1).unwrap()).abs() < 1e-12);
        assert!(coupling_cost(&c) >= w1_flow(&d, &p).unwrap().cost - TAU_SOLVER);
        assert_eq!(coupling_cost(&Coupling::diagonal(&p)), 0.0);
    }

    #[test]
    fn coupling_shape_is_checked() {
        let x = line(&[0.0, 1.0]);
        let d = DiscreteMeasure::dirac(x, 1).unwrap();
        assert!(Coupling::new(d.clone(), d, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn invalid_coupling_is_reported() {
        let x = line(&[0.0, 1.0]);
        let p = rat(&x, vec![0, 1], vec![1, 1], 2);
        let c = Coupling::new(p.clone(), p, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let report = validate_coupling(&c, 1e-12);
        assert!(!report.valid);
        assert_eq!(report.max_row_error, 0.5);
    }

    #[test]
    fn bistochastic_example() {
        let x = line(&[0.0, 0.5, 1.0, 3.0]);
        let a = MultiSet::new(x.clone(), vec![0, 2]).unwrap();
        let b = MultiSet::new(x.clone(), vec![1, 3]).unwrap();
        assert!((bistochastic_min(&a, &b).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(bistochastic_min(&a, &a).unwrap(), 0.0);
        let c = MultiSet::new(x, vec![1]).unwrap();
        assert!(bistochastic_min(&a, &c).is_err());
    }

    #[test]
    fn auto_selects_by_denominator() {
        let x = line(&[0.0, 1.0, 2.0]);
        let p = rat(&x, vec![0, 2], vec![1, 1], 2);
        let q = rat(&x, vec![1, 2], vec![1, 2], 3);
        assert_eq!(w1(&p, &q, Solver::Auto).unwrap().method, Method::Assignment);
        let big = rat(&x, vec![0, 1], vec![1, 99], 100);
        assert_eq!(w1(&p, &big, Solver::Auto).unwrap().method, Method::ExactFlow);
        let fl = DiscreteMeasure::new(x, vec![0, 1], vec![0.25, 0.75]).unwrap();
        assert_eq!(w1(&p, &fl, Solver::Auto).unwrap().method, Method::FloatFlow);
        assert_eq!(w1(&p, &q, Solver::Brute).unwrap().method, Method::BruteForce);
    }
}
