//! Successive shortest paths for the bipartite transportation problem.
//!
//! Rows carry supplies, columns carry demands, every row-column arc has
//! unbounded capacity. Dijkstra runs on reduced costs with Johnson
//! potentials over the residual graph; ties go to the lowest node index.

use std::ops::{AddAssign, SubAssign};

/// Flow amounts: exact integers or floats.
pub(crate) trait Amount: Copy + PartialOrd + AddAssign + SubAssign {
    fn zero() -> Self;
    /// Values at or below this are treated as exhausted.
    fn negligible(self) -> bool;
}

impl Amount for i64 {
    fn zero() -> Self {
        0
    }
    fn negligible(self) -> bool {
        self <= 0
    }
}

impl Amount for f64 {
    fn zero() -> Self {
        0.0
    }
    fn negligible(self) -> bool {
        self <= 1e-15
    }
}

/// Solves `min Σ c_ij r_ij` subject to row sums `supply` and column sums
/// `demand`, where the smaller total is shipped in full.
///
/// `cost` is row-major `m × n` and must be nonnegative. Returns the flow matrix.
pub(crate) fn transport<T: Amount>(supply: &[T], demand: &[T], cost: &[f64]) -> Vec<T> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.len(), m * n);
    let nodes = m + n;
    let mut flow = vec![T::zero(); m * n];
    let mut supply = supply.to_vec();
    let mut demand = demand.to_vec();
    let mut pot = vec![0.0f64; nodes];

    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    loop {
        if supply.iter().all(|s| s.negligible()) || demand.iter().all(|d| d.negligible()) {
            break;
        }
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        for i in 0..m {
            if !supply[i].negligible() {
                dist[i] = 0.0;
            }
        }

        // Dense Dijkstra; nodes 0..m are rows, m..m+n columns.
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m {
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[u * n + j] + pot[u] - pot[v]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        prev[v] = u;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[i * n + j].negligible() {
                        continue;
                    }
                    let rc = (-cost[i * n + j] + pot[u] - pot[i]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        prev[i] = u;
                    }
                }
            }
        }

        let mut target = usize::MAX;
        for j in 0..n {
            let v = m + j;
            if !demand[j].negligible() && dist[v].is_finite() && (target == usize::MAX || dist[v] < dist[target]) {
                target = v;
            }
        }
        if target == usize::MAX {
            break;
        }

        let reach = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        for v in 0..nodes {
            pot[v] += if dist[v].is_finite() { dist[v] } else { reach };
        }

        // Bottleneck along the path: column demand, reverse-arc flows, row supply.
        let mut amount = demand[target - m];
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= m {
                let f = flow[v * n + (u - m)];
                if f < amount {
                    amount = f;
                }
            }
            v = u;
        }
        let source = v;
        if supply[source] < amount {
            amount = supply[source];
        }

        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < m {
                flow[u * n + (v - m)] += amount;
            } else {
                let f = &mut flow[v * n + (u - m)];
                *f -= amount;
                if f.negligible() {
                    *f = T::zero();
                }
            }
            v = u;
        }
        supply[source] -= amount;
        if supply[source].negligible() {
            supply[source] = T::zero();
        }
        let j = target - m;
        demand[j] -= amount;
        if demand[j].negligible() {
            demand[j] = T::zero();
        }
    }
    flow
}

/// Node potentials certifying optimality of a given plan.
///
/// Shortest distances from a virtual root over the residual graph of `plan`
/// (forward arcs everywhere, backward arcs where the plan is positive).
/// Returns `(h_rows, h_cols)` with `h_col[j] - h_row[i] <= c_ij` for every
/// arc and equality on the support of the plan, up to round-off.
pub(crate) fn certify(cost: &[f64], plan: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut hr = vec![0.0f64; m];
    let mut hc = vec![0.0f64; n];
    for _ in 0..(m + n + 1) {
        let mut changed = false;
        for i in 0..m {
            for j in 0..n {
                let c = cost[i * n + j];
                if hr[i] + c < hc[j] - 1e-15 {
                    hc[j] = hr[i] + c;
                    changed = true;
                }
                if plan[i * n + j] > 0.0 && hc[j] - c < hr[i] - 1e-15 {
                    hr[i] = hc[j] - c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (hr, hc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost_of(flow: &[i64], cost: &[f64]) -> f64 {
        flow.iter().zip(cost).map(|(&f, &c)| f as f64 * c).sum()
    }

    #[test]
    fn two_by_two_swap() {
        // Points 0 and 1 at distance 1; move 0.4 of mass across.
        let cost = [0.0, 1.0, 1.0, 0.0];
        let flow = transport(&[3i64, 7], &[7, 3], &cost);
        assert_eq!(flow, vec![3, 0, 4, 3]);
        assert_eq!(cost_of(&flow, &cost), 4.0);
    }

    #[test]
    fn needs_a_reverse_arc() {
        // Greedy routing of row 0 to column 0 must be undone.
        let cost = [1.0, 2.0, 1.0, 10.0];
        let flow = transport(&[1i64, 1], &[1, 1], &cost);
        assert_eq!(cost_of(&flow, &cost), 3.0);
        assert_eq!(flow, vec![0, 1, 1, 0]);
    }

    #[test]
    fn float_amounts() {
        let cost = [0.0, 1.0, 1.0, 0.0];
        let flow = transport(&[0.3f64, 0.7], &[0.7, 0.3], &cost);
        let c: f64 = flow.iter().zip(&cost).map(|(f, c)| f * c).sum();
        assert!((c - 0.4).abs() < 1e-15);
    }

    #[test]
    fn certificate_is_tight_on_the_plan() {
        let cost = [1.0, 2.0, 1.0, 10.0];
        let plan = [0.0, 1.0, 1.0, 0.0];
        let (hr, hc) = certify(&cost, &plan, 2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let red = cost[i * 2 + j] + hr[i] - hc[j];
                assert!(red >= -1e-12);
                if plan[i * 2 + j] > 0.0 {
                    assert!(red.abs() < 1e-12);
                }
            }
        }
    }
}
