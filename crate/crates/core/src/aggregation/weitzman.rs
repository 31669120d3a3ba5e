use crate::distances::DistanceMatrix;
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Largest suite solved by the exact subset dynamic program.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeitzmanOutcome {
    pub value: f64,
    /// True when the value is the exact recursion result.
    pub exact: bool,
    /// True when the time budget expired before the search finished.
    pub timed_out: bool,
}

/// Neighbours of each element sorted by ascending distance (ties by index),
/// so the nearest member of a subset is the first listed one it contains.
fn neighbour_orders(m: &DistanceMatrix) -> Vec<Vec<usize>> {
    let n = m.n();
    (0..n)
        .map(|x| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != x).collect();
            order.sort_by(|&a, &b| m.get(x, a).total_cmp(&m.get(x, b)).then(a.cmp(&b)));
            order
        })
        .collect()
}

/// Weitzman diversity V(S) = max over x of V(S∖{x}) + d(x, S∖{x}), with
/// V of a singleton 0 and d the distance to the nearest remaining member.
///
/// Suites of up to [`EXACT_LIMIT`] roads are solved exactly over all subsets.
/// Larger suites run a memoized search under `budget`; if it does not finish,
/// the best greedy lower bound is returned with `timed_out` set.
pub fn weitzman(m: &DistanceMatrix, budget: Duration) -> WeitzmanOutcome {
    let n = m.n();
    if n <= 1 {
        return WeitzmanOutcome {
            value: 0.0,
            exact: true,
            timed_out: false,
        };
    }
    if n <= EXACT_LIMIT {
        return WeitzmanOutcome {
            value: exact_subset_dp(m),
            exact: true,
            timed_out: false,
        };
    }
    let lower = greedy_lower_bound(m);
    if n <= 128 && !budget.is_zero() {
        let mut search = BudgetedSearch {
            m,
            orders: neighbour_orders(m),
            memo: HashMap::new(),
            deadline: Instant::now() + budget,
            nodes: 0,
            expired: false,
        };
        let full = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
        let value = search.value(full);
        if !search.expired {
            return WeitzmanOutcome {
                value,
                exact: true,
                timed_out: false,
            };
        }
    }
    WeitzmanOutcome {
        value: lower,
        exact: false,
        timed_out: true,
    }
}

fn exact_subset_dp(m: &DistanceMatrix) -> f64 {
    let n = m.n();
    // Neighbour lists flattened to (bit, distance) so the inner loop stays in cache.
    let orders: Vec<Vec<(u32, f64)>> = neighbour_orders(m)
        .into_iter()
        .enumerate()
        .map(|(x, order)| order.into_iter().map(|j| (1u32 << j, m.get(x, j))).collect())
        .collect();
    let full = (1u32 << n) - 1;
    let mut v = vec![0.0_f64; full as usize + 1];
    for set in 1..=full {
        if set & (set - 1) == 0 {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut bits = set;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = set & !(1 << x);
            let nearest = orders[x]
                .iter()
                .find(|&&(bit, _)| rest & bit != 0)
                .map(|&(_, d)| d)
                .expect("rest is non-empty");
            best = best.max(v[rest as usize] + nearest);
        }
        v[set as usize] = best;
    }
    v[full as usize]
}

/// Value of a removal chain: any order of removing elements yields a lower
/// bound on V. Two deterministic orders are tried.
fn greedy_lower_bound(m: &DistanceMatrix) -> f64 {
    let n = m.n();
    let nearest = |x: usize, alive: &[bool]| {
        (0..n)
            .filter(|&j| j != x && alive[j])
            .map(|j| m.get(x, j))
            .fold(f64::INFINITY, f64::min)
    };
    let chain = |pick_max: bool| {
        let mut alive = vec![true; n];
        let mut total = 0.0;
        for _ in 0..n - 1 {
            let mut best: Option<(usize, f64)> = None;
            for x in (0..n).filter(|&x| alive[x]) {
                let d = nearest(x, &alive);
                let better = match best {
                    None => true,
                    Some((_, b)) => (pick_max && d > b) || (!pick_max && d < b),
                };
                if better {
                    best = Some((x, d));
                }
            }
            let (x, d) = best.expect("at least two alive");
            alive[x] = false;
            total += d;
        }
        total
    };
    chain(true).max(chain(false))
}

struct BudgetedSearch<'a> {
    m: &'a DistanceMatrix,
    orders: Vec<Vec<usize>>,
    memo: HashMap<u128, f64>,
    deadline: Instant,
    nodes: u64,
    expired: bool,
}

impl BudgetedSearch<'_> {
    fn value(&mut self, set: u128) -> f64 {
        if set.count_ones() < 2 || self.expired {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&set) {
            return v;
        }
        self.nodes += 1;
        if self.nodes % 1024 == 0 && Instant::now() >= self.deadline {
            self.expired = true;
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        let mut bits = set;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = set & !(1u128 << x);
            let nearest = *self.orders[x]
                .iter()
                .find(|&&j| rest & (1u128 << j) != 0)
                .expect("rest is non-empty");
            let d = self.m.get(x, nearest);
            best = best.max(self.value(rest) + d);
            if self.expired {
                return 0.0;
            }
        }
        self.memo.insert(set, best);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(0.0..10.0);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        DistanceMatrix::from_rows(&rows).unwrap()
    }

    fn naive(m: &DistanceMatrix, set: &[usize]) -> f64 {
        if set.len() < 2 {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for (k, &x) in set.iter().enumerate() {
            let rest: Vec<usize> = set.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &v)| v).collect();
            let d = rest.iter().map(|&j| m.get(x, j)).fold(f64::INFINITY, f64::min);
            best = best.max(naive(m, &rest) + d);
        }
        best
    }

    #[test]
    fn trivial_cases() {
        let budget = Duration::from_secs(1);
        assert_eq!(weitzman(&DistanceMatrix::zeros(5), budget).value, 0.0);
        assert_eq!(weitzman(&DistanceMatrix::zeros(1), budget).value, 0.0);
        let two = DistanceMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(weitzman(&two, budget).value, 5.0);
    }

    #[test]
    fn subset_dp_matches_naive_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, 7);
            let all: Vec<usize> = (0..7).collect();
            assert_eq!(weitzman(&m, Duration::ZERO).value, naive(&m, &all));
        }
    }

    #[test]
    fn large_suite_times_out_with_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 40);
        let out = weitzman(&m, Duration::from_millis(20));
        assert!(out.timed_out && !out.exact);
        assert_eq!(out.value, greedy_lower_bound(&m));
        assert!(out.value.is_finite() && out.value > 0.0);
        // zero budget skips the search entirely
        assert_eq!(weitzman(&m, Duration::ZERO).value, out.value);
    }

    #[test]
    fn greedy_never_exceeds_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 9);
            assert!(greedy_lower_bound(&m) <= weitzman(&m, Duration::ZERO).value + 1e-12);
        }
    }

    #[test]
    fn budgeted_search_agrees_with_dp_when_it_finishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 12);
        let mut search = BudgetedSearch {
            m: &m,
            orders: neighbour_orders(&m),
            memo: HashMap::new(),
            deadline: Instant::now() + Duration::from_secs(60),
            nodes: 0,
            expired: false,
        };
        assert_eq!(search.value((1u128 << 12) - 1), exact_subset_dp(&m));
    }
}
