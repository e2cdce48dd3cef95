//! Exact Gromov–Hausdorff distance between finite metric spaces.
//!
//! Three independent solvers compute the same value by different routes:
//!
//! * [`gh_exact_maps`] enumerates all pairs of opposite maps `(f, g)` and
//!   minimises `max(dis f, codis(f,g), dis g) / 2`;
//! * [`gh_exact_correspondences`] enumerates all covering relations and
//!   minimises half the relation distortion;
//! * [`gh_branch_and_bound`] searches assignments with admissible pruning
//!   and returns the exact value when the search completes, or a bracketing
//!   interval with a feasible witness when the node budget runs out.
//!
//! The map and correspondence formulations agree exactly: the relation
//! `{(x, f(x))} ∪ {(g(y), y)}` has distortion `max(dis f, dis g, codis)`
//! term for term, and conversely any covering relation yields maps by
//! selection whose value it dominates. The tests hold all three solvers to
//! bit-level agreement on full enumerations of small integer instances.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize};

use super::maps::{Correspondence, MapPair};
use super::{FiniteMetricSpace, MetricError};

/// Default cap on exhaustive-enumeration size (number of evaluations).
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Default node budget for the branch-and-bound solver.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Which solver produced a [`GHResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhMethod {
    #[serde(rename = "brute-force-maps")]
    BruteForceMaps,
    #[serde(rename = "brute-force-correspondences")]
    BruteForceCorrespondences,
    #[serde(rename = "branch-and-bound")]
    BranchAndBound,
}

/// Witness achieving the reported upper bound.
#[derive(Clone, Debug, PartialEq)]
pub enum GhWitness {
    MapPair(MapPair),
    Correspondence(Correspondence),
}

impl GhWitness {
    /// The witness as a plain pair list (map pairs are flattened into the
    /// correspondence they induce).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        match self {
            GhWitness::MapPair(p) => p.induced_correspondence().pairs,
            GhWitness::Correspondence(c) => c.pairs.clone(),
        }
    }
}

impl Serialize for GhWitness {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let pairs = self.pairs();
        let mut seq = ser.serialize_seq(Some(pairs.len()))?;
        for (i, j) in pairs {
            seq.serialize_element(&[i, j])?;
        }
        seq.end()
    }
}

/// Result of a Gromov–Hausdorff computation.
///
/// For the exact solvers `lower == value == upper`. When branch-and-bound
/// exhausts its budget, `lower < upper` brackets the true value and the
/// witness realises `upper`.
#[derive(Clone, Debug, Serialize)]
pub struct GHResult {
    #[serde(with = "crate::real")]
    pub value: f64,
    pub method: GhMethod,
    #[serde(with = "crate::real")]
    pub lower: f64,
    #[serde(with = "crate::real")]
    pub upper: f64,
    pub witness: GhWitness,
}

impl GHResult {
    /// True when the solver certified the exact value.
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Admissible lower bound from diameters and distance-value sets.
///
/// Two ingredients, both provably below the true distance:
///
/// * half the diameter gap `|diam X - diam Y| / 2`: a pair realising the
///   larger diameter has partners whose distance differs by at most the
///   optimal distortion;
/// * half the two-sided gap between the off-diagonal distance-value sets,
///   each augmented with `0`: for an optimal relation, every distance
///   `d_X(x, x')` has partners `(y, y')` with `|d_X(x,x') - d_Y(y,y')|`
///   at most the optimal distortion, and `d_Y(y, y')` is an off-diagonal
///   distance of `Y` or zero (when the partners coincide); symmetrically
///   for `Y`. Hence the worst nearest-value gap is at most the optimal
///   distortion, and half of it is at most the distance.
///
/// Note the value-*multiset* refinement (matching sorted distance vectors
/// entrywise after padding) is **not** admissible when sizes differ — a
/// two-point space with gap 10 against a three-point space with gaps
/// {10, 10, eps} has a tiny distance but an entrywise-matching gap of 10 —
/// so this bound deliberately ignores multiplicities.
pub fn gh_lower_bound(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let diam_part = 0.5 * (x.diam() - y.diam()).abs();

    let mut dx = x.pair_distances();
    let mut dy = y.pair_distances();
    dx.push(0.0);
    dy.push(0.0);
    dx.sort_unstable_by(f64::total_cmp);
    dy.sort_unstable_by(f64::total_cmp);

    let one_sided = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .map(|&a| {
                // Nearest value in the sorted `to` list.
                let idx = to.partition_point(|&b| b < a);
                let mut best = f64::INFINITY;
                if idx < to.len() {
                    best = best.min((to[idx] - a).abs());
                }
                if idx > 0 {
                    best = best.min((to[idx - 1] - a).abs());
                }
                best
            })
            .fold(0.0, f64::max)
    };
    let value_part = 0.5 * one_sided(&dx, &dy).max(one_sided(&dy, &dx));

    diam_part.max(value_part)
}

fn enum_budget_check(needed: f64, budget: u64) -> Result<(), MetricError> {
    if !(needed <= budget as f64) {
        return Err(MetricError::BudgetExceeded {
            needed,
            budget: budget as f64,
        });
    }
    Ok(())
}

/// Distortion of every map from a `domain`-point space into `codomain`,
/// enumerated in odometer order. Index `k` encodes the map whose images are
/// the base-`codomain` digits of `k` (last point varies fastest).
fn all_map_distortions(
    domain: &FiniteMetricSpace,
    codomain: &FiniteMetricSpace,
) -> (Vec<f64>, Vec<Vec<usize>>) {
    let n = domain.len();
    let m = codomain.len();
    let count = m.pow(n as u32);
    let mut distortions = Vec::with_capacity(count);
    let mut tables = Vec::with_capacity(count);
    let mut map = vec![0usize; n];
    loop {
        let mut dis = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                dis = dis.max((codomain.d(map[i], map[j]) - domain.d(i, j)).abs());
            }
        }
        distortions.push(dis);
        tables.push(map.clone());
        // Odometer increment.
        let mut pos = n;
        loop {
            if pos == 0 {
                return (distortions, tables);
            }
            pos -= 1;
            map[pos] += 1;
            if map[pos] < m {
                break;
            }
            map[pos] = 0;
        }
    }
}

/// Exact distance by enumerating every pair of opposite maps.
///
/// The budget guards `|Y|^|X| * |X|^|Y|` total pairs; oversized instances
/// get a [`MetricError::BudgetExceeded`] pointing at the branch-and-bound
/// solver instead.
pub fn gh_exact_maps(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    budget: u64,
) -> Result<GHResult, MetricError> {
    let n = x.len();
    let m = y.len();
    let needed = (m as f64).powi(n as i32) * (n as f64).powi(m as i32);
    enum_budget_check(needed, budget)?;

    let (fwd_dis, fwd_tables) = all_map_distortions(x, y);
    let (bwd_dis, bwd_tables) = all_map_distortions(y, x);

    let mut best = f64::INFINITY;
    let mut best_pair = MapPair {
        fwd: fwd_tables[0].clone(),
        bwd: bwd_tables[0].clone(),
    };
    for (fi, fwd) in fwd_tables.iter().enumerate() {
        if fwd_dis[fi] >= best {
            continue;
        }
        for (gi, bwd) in bwd_tables.iter().enumerate() {
            let base = fwd_dis[fi].max(bwd_dis[gi]);
            if base >= best {
                continue;
            }
            let mut cost = base;
            'codis: for i in 0..n {
                for j in 0..m {
                    let defect = (y.d(fwd[i], j) - x.d(i, bwd[j])).abs();
                    if defect > cost {
                        cost = defect;
                        if cost >= best {
                            break 'codis;
                        }
                    }
                }
            }
            if cost < best {
                best = cost;
                best_pair = MapPair {
                    fwd: fwd.clone(),
                    bwd: bwd.clone(),
                };
            }
        }
    }

    let value = 0.5 * best;
    Ok(GHResult {
        value,
        method: GhMethod::BruteForceMaps,
        lower: value,
        upper: value,
        witness: GhWitness::MapPair(best_pair),
    })
}

/// Exact distance by enumerating every covering relation as a bitmask over
/// the `|X| x |Y|` cell grid.
///
/// The budget guards `2^(|X| * |Y|)` masks. Independent of the map solver:
/// nothing is shared beyond the distance matrices.
pub fn gh_exact_correspondences(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    budget: u64,
) -> Result<GHResult, MetricError> {
    let n = x.len();
    let m = y.len();
    let cells = n * m;
    let needed = (cells as f64).exp2();
    enum_budget_check(needed, budget)?;

    // Cell k = i * m + j relates x_i to y_j.
    let row_mask: Vec<u64> = (0..n)
        .map(|i| (0..m).fold(0u64, |acc, j| acc | 1 << (i * m + j)))
        .collect();
    let col_mask: Vec<u64> = (0..m)
        .map(|j| (0..n).fold(0u64, |acc, i| acc | 1 << (i * m + j)))
        .collect();
    // Pairwise defect table between cells.
    let mut defect = vec![0.0f64; cells * cells];
    for a in 0..cells {
        let (i1, j1) = (a / m, a % m);
        for b in 0..cells {
            let (i2, j2) = (b / m, b % m);
            defect[a * cells + b] = (x.d(i1, i2) - y.d(j1, j2)).abs();
        }
    }

    let min_pairs = n.max(m) as u32;
    let mut best = f64::INFINITY;
    let mut best_mask = row_mask.iter().fold(0u64, |acc, &r| acc | r); // full relation
    let mut members = Vec::with_capacity(cells);
    for mask in 1u64..(1u64 << cells) {
        if mask.count_ones() < min_pairs {
            continue;
        }
        if row_mask.iter().any(|&r| mask & r == 0) || col_mask.iter().any(|&c| mask & c == 0) {
            continue;
        }
        members.clear();
        let mut bits = mask;
        while bits != 0 {
            members.push(bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
        let mut dis = 0.0f64;
        'pairs: for (a_idx, &a) in members.iter().enumerate() {
            for &b in &members[a_idx + 1..] {
                let d = defect[a * cells + b];
                if d > dis {
                    dis = d;
                    if dis >= best {
                        break 'pairs;
                    }
                }
            }
        }
        if dis < best {
            best = dis;
            best_mask = mask;
        }
    }

    let pairs: Vec<(usize, usize)> = (0..cells)
        .filter(|&c| best_mask & (1 << c) != 0)
        .map(|c| (c / m, c % m))
        .collect();
    let witness = Correspondence::new(pairs, x, y)?;
    let value = 0.5 * best;
    Ok(GHResult {
        value,
        method: GhMethod::BruteForceCorrespondences,
        lower: value,
        upper: value,
        witness: GhWitness::Correspondence(witness),
    })
}

/// Search state for the branch-and-bound solver.
struct BnbSearch<'a> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    /// X indices in branching order (decreasing eccentricity, ties by index).
    x_order: Vec<usize>,
    /// Y indices in branching order for the cover phase.
    y_order: Vec<usize>,
    /// Assigned pairs along the current path.
    path: Vec<(usize, usize)>,
    /// Best full assignment found so far (its distortion and pairs).
    best_dis: f64,
    best_pairs: Vec<(usize, usize)>,
    nodes: u64,
    node_budget: u64,
    exhausted: bool,
    /// Stop as soon as the incumbent matches this proven lower bound.
    root_dis_lb: f64,
}

impl BnbSearch<'_> {
    /// Distortion increment caused by appending `(xi, yj)` to the path.
    fn increment(&self, xi: usize, yj: usize) -> f64 {
        let mut worst = 0.0f64;
        for &(pi, pj) in &self.path {
            worst = worst.max((self.x.d(xi, pi) - self.y.d(yj, pj)).abs());
        }
        worst
    }

    fn optimal_reached(&self) -> bool {
        self.best_dis <= self.root_dis_lb
    }

    /// Phase 1: assign a partner to each X point in branching order.
    fn assign_x(&mut self, pos: usize, partial: f64) {
        if self.exhausted || self.optimal_reached() {
            return;
        }
        if pos == self.x_order.len() {
            self.cover_y(0, partial, &mut Vec::new());
            return;
        }
        let xi = self.x_order[pos];
        let mut candidates: Vec<(f64, usize)> = (0..self.y.len())
            .map(|yj| (self.increment(xi, yj).max(partial), yj))
            .collect();
        candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (cost, yj) in candidates {
            if self.exhausted || self.optimal_reached() {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.node_budget {
                self.exhausted = true;
                return;
            }
            if cost >= self.best_dis {
                // Candidates are sorted by cost; the rest only get worse.
                return;
            }
            self.path.push((xi, yj));
            self.assign_x(pos + 1, cost);
            self.path.pop();
        }
    }

    /// Phase 2: cover the Y points missed by phase 1.
    fn cover_y(&mut self, from: usize, partial: f64, extra: &mut Vec<(usize, usize)>) {
        if self.exhausted || self.optimal_reached() {
            return;
        }
        let next = (from..self.y_order.len()).find(|&k| {
            let yj = self.y_order[k];
            !self.path.iter().any(|&(_, pj)| pj == yj)
        });
        let Some(k) = next else {
            if partial < self.best_dis {
                self.best_dis = partial;
                self.best_pairs = self.path.clone();
            }
            return;
        };
        let yj = self.y_order[k];
        let mut candidates: Vec<(f64, usize)> = (0..self.x.len())
            .map(|xi| (self.increment(xi, yj).max(partial), xi))
            .collect();
        candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (cost, xi) in candidates {
            if self.exhausted || self.optimal_reached() {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.node_budget {
                self.exhausted = true;
                return;
            }
            if cost >= self.best_dis {
                return;
            }
            self.path.push((xi, yj));
            extra.push((xi, yj));
            self.cover_y(k + 1, cost, extra);
            extra.pop();
            self.path.pop();
        }
    }
}

/// Branching order: decreasing eccentricity, ties broken by index.
fn eccentricity_order(space: &FiniteMetricSpace) -> Vec<usize> {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| {
        space
            .eccentricity(b)
            .total_cmp(&space.eccentricity(a))
            .then(a.cmp(&b))
    });
    order
}

/// Branch-and-bound Gromov–Hausdorff solver.
///
/// Branches on the partner of each X point (most eccentric first), then on
/// partners for the Y points still uncovered. A path is pruned as soon as
/// the distortion among its assigned pairs reaches the incumbent — the
/// distortion of a relation only grows as pairs are added, so the pruning
/// is admissible and a completed search is exact. Every optimal relation
/// contains an assignment of this two-phase shape, so the restricted
/// branching loses nothing.
///
/// If the node budget runs out the result degrades to a bracket: `lower`
/// from [`gh_lower_bound`], `upper` and the witness from the best feasible
/// assignment seen (initialised with a greedy assignment so an upper bound
/// always exists).
pub fn gh_branch_and_bound(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    node_budget: u64,
) -> GHResult {
    let root_lb = gh_lower_bound(x, y);
    let x_order = eccentricity_order(x);
    let y_order = eccentricity_order(y);

    // Greedy incumbent: cheapest partner per point, both directions.
    let mut greedy_pairs: Vec<(usize, usize)> = Vec::new();
    {
        let mut partial = 0.0f64;
        for &xi in &x_order {
            let (yj, cost) = (0..y.len())
                .map(|yj| {
                    let worst = greedy_pairs
                        .iter()
                        .map(|&(pi, pj)| (x.d(xi, pi) - y.d(yj, pj)).abs())
                        .fold(0.0, f64::max);
                    (yj, worst)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("codomain is non-empty");
            greedy_pairs.push((xi, yj));
            partial = partial.max(cost);
        }
        for &yj in &y_order {
            if greedy_pairs.iter().any(|&(_, pj)| pj == yj) {
                continue;
            }
            let (xi, cost) = (0..x.len())
                .map(|xi| {
                    let worst = greedy_pairs
                        .iter()
                        .map(|&(pi, pj)| (x.d(xi, pi) - y.d(yj, pj)).abs())
                        .fold(0.0, f64::max);
                    (xi, worst)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("domain is non-empty");
            greedy_pairs.push((xi, yj));
            partial = partial.max(cost);
        }
        let _ = partial;
    }
    let greedy_dis = Correspondence {
        pairs: {
            let mut p = greedy_pairs.clone();
            p.sort_unstable();
            p.dedup();
            p
        },
    }
    .distortion(x, y);

    let mut search = BnbSearch {
        x,
        y,
        x_order,
        y_order,
        path: Vec::new(),
        best_dis: greedy_dis,
        best_pairs: greedy_pairs,
        nodes: 0,
        node_budget,
        exhausted: false,
        root_dis_lb: 2.0 * root_lb,
    };
    search.assign_x(0, 0.0);

    let mut pairs = search.best_pairs.clone();
    pairs.sort_unstable();
    pairs.dedup();
    let witness = Correspondence::new(pairs, x, y).expect("search yields a covering relation");
    let upper = 0.5 * search.best_dis;
    let (lower, value) = if search.exhausted {
        (root_lb.min(upper), upper)
    } else {
        (upper, upper)
    };
    GHResult {
        value,
        method: GhMethod::BranchAndBound,
        lower,
        upper,
        witness: GhWitness::Correspondence(witness),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::space_from_matrix;

    fn one_point() -> FiniteMetricSpace {
        space_from_matrix(vec![vec![0.0]]).unwrap()
    }

    fn two_points(gap: f64) -> FiniteMetricSpace {
        space_from_matrix(vec![vec![0.0, gap], vec![gap, 0.0]]).unwrap()
    }

    #[test]
    fn maps_solver_matches_hand_enumeration() {
        // {0,1} at gap 1 against {0,3} at gap 3: best pair is a bijection
        // with distortion 2, so the distance is 1.
        let x = two_points(1.0);
        let y = two_points(3.0);
        let r = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.is_exact());
    }

    #[test]
    fn maps_solver_point_against_pair() {
        let x = one_point();
        let y = two_points(2.0);
        let r = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(r.value, 1.0, "a point sits at half the gap from a pair");
    }

    #[test]
    fn identical_spaces_have_distance_zero() {
        let x = space_from_matrix(vec![
            vec![0.0, 2.0, 3.0],
            vec![2.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ])
        .unwrap();
        for r in [
            gh_exact_maps(&x, &x, DEFAULT_ENUM_BUDGET).unwrap(),
            gh_exact_correspondences(&x, &x, DEFAULT_ENUM_BUDGET).unwrap(),
            gh_branch_and_bound(&x, &x, DEFAULT_NODE_BUDGET),
        ] {
            assert_eq!(r.value, 0.0, "method {:?} must see isometric spaces", r.method);
        }
    }

    #[test]
    fn correspondence_solver_one_point_target_gives_half_diameter() {
        let x = space_from_matrix(vec![
            vec![0.0, 2.0, 4.0],
            vec![2.0, 0.0, 2.0],
            vec![4.0, 2.0, 0.0],
        ])
        .unwrap();
        let y = one_point();
        let r = gh_exact_correspondences(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(r.value, x.diam() / 2.0);
    }

    #[test]
    fn correspondence_solver_two_by_two_enumerates_all_seven_relations() {
        // Oracle: for 2x2 there are exactly 7 covering relations; compute
        // their distortions directly and take the minimum.
        let x = two_points(1.0);
        let y = two_points(4.0);
        let mut covering = 0;
        let mut oracle = f64::INFINITY;
        for mask in 1u8..16 {
            let pairs: Vec<(usize, usize)> = (0..4)
                .filter(|&c| mask & (1 << c) != 0)
                .map(|c| (c / 2, c % 2))
                .collect();
            let covers = (0..2).all(|i| pairs.iter().any(|&(a, _)| a == i))
                && (0..2).all(|j| pairs.iter().any(|&(_, b)| b == j));
            if covers {
                covering += 1;
                let c = Correspondence { pairs };
                oracle = oracle.min(c.distortion(&x, &y));
            }
        }
        assert_eq!(covering, 7, "2x2 grid has exactly seven covering relations");
        let r = gh_exact_correspondences(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(r.value, 0.5 * oracle);
        assert_eq!(r.value, 1.5, "two gaps a, b sit at distance |a-b|/2");
    }

    #[test]
    fn enumeration_budgets_are_enforced() {
        let big = space_from_matrix(
            (0..7)
                .map(|i| {
                    (0..7)
                        .map(|j| if i == j { 0.0 } else { 2.0 + ((i + j) % 3) as f64 })
                        .collect()
                })
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            gh_exact_maps(&big, &big, 1000),
            Err(MetricError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            gh_exact_correspondences(&big, &big, 1000),
            Err(MetricError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lower_bound_examples() {
        let x = space_from_matrix(vec![
            vec![0.0, 4.0, 4.0],
            vec![4.0, 0.0, 4.0],
            vec![4.0, 4.0, 0.0],
        ])
        .unwrap();
        let y = two_points(1.0);
        assert!(gh_lower_bound(&x, &y) >= 1.5, "diameter gap 3 gives at least 1.5");
        assert_eq!(gh_lower_bound(&x, &x), 0.0, "identical spaces have bound 0");
        // One point against a pair at gap 2: the value-set bound reaches 1.
        assert_eq!(gh_lower_bound(&one_point(), &two_points(2.0)), 1.0);
    }

    #[test]
    fn lower_bound_is_admissible_on_the_multiset_trap() {
        // Sizes differ and the distance multisets differ wildly in
        // multiplicity, yet the true distance is tiny. The bound must not
        // overshoot it.
        let x = two_points(10.0);
        let eps = 1e-3;
        let y = space_from_matrix(vec![
            vec![0.0, 10.0, 10.0],
            vec![10.0, 0.0, eps],
            vec![10.0, eps, 0.0],
        ])
        .unwrap();
        let exact = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap().value;
        assert!(exact <= eps, "true distance is at most eps/2-ish, got {exact}");
        let lb = gh_lower_bound(&x, &y);
        assert!(
            lb <= exact + 1e-15,
            "lower bound {lb} must not exceed the exact value {exact}"
        );
    }

    #[test]
    fn branch_and_bound_matches_exact_solvers() {
        let instances = vec![
            (one_point(), two_points(2.0)),
            (two_points(1.0), two_points(3.0)),
            (
                space_from_matrix(vec![
                    vec![0.0, 1.0, 2.0],
                    vec![1.0, 0.0, 1.0],
                    vec![2.0, 1.0, 0.0],
                ])
                .unwrap(),
                space_from_matrix(vec![
                    vec![0.0, 3.0, 3.0],
                    vec![3.0, 0.0, 3.0],
                    vec![3.0, 3.0, 0.0],
                ])
                .unwrap(),
            ),
        ];
        for (x, y) in instances {
            let maps = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
            let corr = gh_exact_correspondences(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
            let bnb = gh_branch_and_bound(&x, &y, DEFAULT_NODE_BUDGET);
            assert_eq!(maps.value, corr.value, "map and relation routes agree");
            assert_eq!(maps.value, bnb.value, "branch-and-bound agrees");
            assert!(bnb.is_exact(), "small instances complete within budget");
        }
    }

    #[test]
    fn branch_and_bound_degrades_to_bracket_on_tiny_budget() {
        // Six points on a line, compared against a pair, with a node budget
        // far too small to finish the search.
        let coords: Vec<f64> = vec![0.0, 1.0, 2.5, 4.0, 6.0, 9.0];
        let matrix = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        let x = space_from_matrix(matrix).unwrap();
        let y = two_points(2.0);
        let r = gh_branch_and_bound(&x, &y, 3);
        assert!(r.lower <= r.upper, "bracket must be ordered");
        let exact = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap().value;
        assert!(
            r.lower <= exact + 1e-15 && exact <= r.upper + 1e-15,
            "bracket [{}, {}] must contain the exact value {exact}",
            r.lower,
            r.upper
        );
    }

    #[test]
    fn witnesses_achieve_the_reported_value() {
        let x = space_from_matrix(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let y = two_points(3.0);
        for r in [
            gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap(),
            gh_exact_correspondences(&x, &y, DEFAULT_ENUM_BUDGET).unwrap(),
            gh_branch_and_bound(&x, &y, DEFAULT_NODE_BUDGET),
        ] {
            let c = Correspondence::new(r.witness.pairs(), &x, &y)
                .expect("witness must be a covering relation");
            let achieved = 0.5 * c.distortion(&x, &y);
            assert!(
                achieved <= r.upper + 1e-15,
                "witness value {achieved} must realise the upper bound {} ({:?})",
                r.upper,
                r.method
            );
        }
    }

    #[test]
    fn scaling_both_spaces_scales_the_distance() {
        let x = space_from_matrix(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ])
        .unwrap();
        let y = two_points(3.0);
        let base = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap().value;
        for lambda in [2.0, 4.0, 8.0] {
            let xs = x.scale(lambda).unwrap();
            let ys = y.scale(lambda).unwrap();
            let scaled = gh_exact_maps(&xs, &ys, DEFAULT_ENUM_BUDGET).unwrap().value;
            assert_eq!(
                scaled,
                lambda * base,
                "power-of-two scaling must be bit-exact"
            );
        }
    }

    #[test]
    fn gh_result_serialises_witness_as_pairs() {
        let x = two_points(1.0);
        let y = two_points(3.0);
        let r = gh_exact_maps(&x, &y, DEFAULT_ENUM_BUDGET).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"witness\":[["), "witness must be a pair list: {json}");
        assert!(json.contains("\"method\":\"brute-force-maps\""));
    }
}
