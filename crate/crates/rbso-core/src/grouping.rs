//! Swarm grouping by divisive hierarchical clustering (DIANA) over personal-best
//! positions, plus fitness-based group-center selection.
//!
//! Starting from one all-inclusive group, the group with the largest internal mean
//! pairwise distance is repeatedly split at its most dissimilar pair until the group
//! count reaches `max_groups`, every group is tighter than the mean-distance
//! threshold, or the group picked for splitting is too small to split.

use crate::geometry::Point2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingParams {
    /// Maximum number of groups (m_g), at least 2.
    pub max_groups: usize,
    /// Guard on the split loop; one split per robot is always sufficient.
    pub max_iterations: usize,
    /// Internal mean pairwise distance below which a group stops splitting (m_d).
    pub mean_distance_threshold: f64,
}

/// A partition of robot indices plus one designated center per group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingResult {
    pub groups: Vec<Vec<usize>>,
    pub centers: Vec<usize>,
}

impl GroupingResult {
    /// True when `groups` exactly partitions 0..n and every center is a member.
    pub fn is_valid_partition(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for g in &self.groups {
            if g.is_empty() {
                return false;
            }
            for &i in g {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.iter().all(|&s| s)
            && self.centers.len() == self.groups.len()
            && self.centers.iter().zip(&self.groups).all(|(c, g)| g.contains(c))
    }
}

/// Mean pairwise Euclidean distance between two point sets:
/// (1/(|A|*|B|)) * sum over all cross pairs.
pub fn inter_group_mean_distance(a: &[Point2], b: &[Point2]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut sum = 0.0;
    for &x in a {
        for &y in b {
            sum += x.distance(y);
        }
    }
    sum / (a.len() as f64 * b.len() as f64)
}

/// Internal mean pairwise distance of one group: the cross-pair mean with A = B
/// excluding self pairs; zero for singletons.
pub fn internal_mean_distance(points: &[Point2], group: &[usize]) -> f64 {
    let n = group.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (k, &i) in group.iter().enumerate() {
        for &j in &group[k + 1..] {
            sum += points[i].distance(points[j]);
        }
    }
    // Unordered pairs counted once; the ordered mean over n(n-1) pairs is the same.
    sum / (n * (n - 1) / 2) as f64
}

/// Splits one group at its most dissimilar pair (i, j): every member goes to
/// whichever pole is closer, ties to the smaller-indexed pole.
fn split_group(points: &[Point2], group: &[usize]) -> (Vec<usize>, Vec<usize>) {
    debug_assert!(group.len() >= 2);
    let (mut pole_i, mut pole_j, mut best) = (group[0], group[1], -1.0f64);
    for (k, &i) in group.iter().enumerate() {
        for &j in &group[k + 1..] {
            let d = points[i].distance(points[j]);
            if d > best {
                best = d;
                pole_i = i;
                pole_j = j;
            }
        }
    }
    let mut half_i = Vec::new();
    let mut half_j = Vec::new();
    for &m in group {
        let di = points[m].distance(points[pole_i]);
        let dj = points[m].distance(points[pole_j]);
        // pole_i has the smaller index by construction, so ties go to it.
        if di <= dj {
            half_i.push(m);
        } else {
            half_j.push(m);
        }
    }
    debug_assert!(!half_i.is_empty() && !half_j.is_empty());
    (half_i, half_j)
}

/// Top-down divisive clustering of the points into index groups.
///
/// With two or more points the first split is unconditional so that at least two
/// groups exist for the two-cluster generation path; after that, groups of size two
/// or less are never split.
pub fn diana_split(points: &[Point2], params: &GroupingParams) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut groups = vec![(0..n).collect::<Vec<usize>>()];
    if n == 1 {
        return groups;
    }
    for iteration in 0.. {
        if groups.len() >= params.max_groups || iteration >= params.max_iterations {
            break;
        }
        // Pick the loosest group.
        let (loosest, spread) = groups
            .iter()
            .enumerate()
            .map(|(k, g)| (k, internal_mean_distance(points, g)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one group");
        let first_split = groups.len() == 1;
        if !first_split && spread <= params.mean_distance_threshold {
            break;
        }
        if groups[loosest].len() <= 2 && !first_split {
            break;
        }
        if groups[loosest].len() < 2 {
            break;
        }
        let group = groups.swap_remove(loosest);
        let (half_a, half_b) = split_group(points, &group);
        groups.push(half_a);
        groups.push(half_b);
    }
    // Stable presentation order: by smallest member index.
    groups.sort_by_key(|g| g.iter().copied().min().unwrap_or(usize::MAX));
    groups
}

/// Picks one center per group: the member with the highest personal-best fitness.
/// When several members tie for the maximum (including the all-zero case) the
/// center is drawn uniformly among them.
pub fn select_centers(groups: &[Vec<usize>], fitness: &[f64], rng: &mut ChaCha8Rng) -> Vec<usize> {
    groups
        .iter()
        .map(|g| {
            let best = g.iter().map(|&i| fitness[i]).fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = g.iter().copied().filter(|&i| fitness[i] == best).collect();
            if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len())]
            }
        })
        .collect()
}

/// Full grouping step: cluster on personal-best positions, then pick centers.
pub fn group_swarm(
    points: &[Point2],
    fitness: &[f64],
    params: &GroupingParams,
    rng: &mut ChaCha8Rng,
) -> GroupingResult {
    let groups = diana_split(points, params);
    let centers = select_centers(&groups, fitness, rng);
    GroupingResult { groups, centers }
}
