//! Best-first CART regression tree.
//!
//! Splits minimize the summed squared deviation of the two children from
//! their means, searched over a random subset of `m_try` features at every
//! node. Candidate thresholds are midpoints between consecutive distinct
//! feature values; ties go to the lowest feature index, then the smallest
//! threshold.
//!
//! Growth is best-first: the frontier leaf whose best split removes the most
//! cost is expanded until `max_terminal_nodes` leaves exist. A node is only
//! split while its share of the training rows is at least
//! `min_node_fraction`; the gate applies to the node being split, so its
//! children may be arbitrarily small.

use rand::Rng;

use super::{Dataset, ForestConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub m_try: usize,
    pub min_node_fraction: f64,
    pub max_terminal_nodes: usize,
}

impl From<&ForestConfig> for TreeParams {
    fn from(c: &ForestConfig) -> Self {
        Self {
            m_try: c.m_try,
            min_node_fraction: c.min_node_fraction,
            max_terminal_nodes: c.max_terminal_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// `(feature, threshold)` of every internal node in creation order.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split {
                    feature, threshold, ..
                } => Some((*feature, *threshold)),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Pending {
    node: usize,
    rows: Vec<usize>,
    choice: Option<SplitChoice>,
}

fn node_mean(targets: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64
}

fn best_split(data: &Dataset, rows: &[usize], features: &[usize]) -> Option<SplitChoice> {
    let n = rows.len();
    let targets = data.targets();
    let mu = node_mean(targets, rows);
    let parent_cost: f64 = rows.iter().map(|&i| (targets[i] - mu).powi(2)).sum();
    if parent_cost <= 0.0 {
        return None;
    }

    let mut best: Option<(f64, usize, f64)> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &j in features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (data.value(i, j), targets[i] - mu)));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total_s: f64 = pairs.iter().map(|p| p.1).sum();
        let total_ss: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
        let (mut s, mut ss) = (0.0, 0.0);
        for k in 1..n {
            let y = pairs[k - 1].1;
            s += y;
            ss += y * y;
            let (lo, hi) = (pairs[k - 1].0, pairs[k].0);
            if lo >= hi {
                continue;
            }
            let left = ss - s * s / k as f64;
            let rs = total_s - s;
            let right = (total_ss - ss) - rs * rs / (n - k) as f64;
            let cost = left + right;
            if best.is_none_or(|(c, _, _)| cost < c) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some((cost, j, threshold));
            }
        }
    }

    let (cost, feature, threshold) = best?;
    let gain = parent_cost - cost;
    (gain > parent_cost * 1e-12).then_some(SplitChoice {
        feature,
        threshold,
        gain,
    })
}

fn evaluate<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    total: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Option<SplitChoice> {
    if rows.len() < 2 || (rows.len() as f64) < params.min_node_fraction * total as f64 {
        return None;
    }
    let p = data.n_features();
    let mut features = rand::seq::index::sample(rng, p, params.m_try.min(p)).into_vec();
    features.sort_unstable();
    best_split(data, rows, &features)
}

/// Grows one tree on the given row multiset (duplicates allowed).
pub fn fit_tree_on_rows<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> RegressionTree {
    let total = rows.len();
    let targets = data.targets();
    let mut nodes = vec![Node::Leaf {
        value: node_mean(targets, rows),
    }];
    let mut frontier = vec![Pending {
        node: 0,
        rows: rows.to_vec(),
        choice: evaluate(data, rows, total, params, rng),
    }];
    let mut leaves = 1;

    while leaves < params.max_terminal_nodes {
        let mut pick: Option<(usize, f64)> = None;
        for (k, pending) in frontier.iter().enumerate() {
            if let Some(choice) = pending.choice {
                if pick.is_none_or(|(_, g)| choice.gain > g) {
                    pick = Some((k, choice.gain));
                }
            }
        }
        let Some((k, _)) = pick else { break };
        let pending = frontier.remove(k);
        let choice = pending.choice.expect("picked nodes carry a split");
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = pending
            .rows
            .iter()
            .partition(|&&i| data.value(i, choice.feature) <= choice.threshold);

        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf {
            value: node_mean(targets, &left_rows),
        });
        nodes.push(Node::Leaf {
            value: node_mean(targets, &right_rows),
        });
        nodes[pending.node] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
        };
        leaves += 1;

        let room = leaves < params.max_terminal_nodes;
        for (node, child_rows) in [(left, left_rows), (right, right_rows)] {
            let choice = if room {
                evaluate(data, &child_rows, total, params, rng)
            } else {
                None
            };
            frontier.push(Pending {
                node,
                rows: child_rows,
                choice,
            });
        }
    }
    RegressionTree { nodes }
}

/// Grows one tree on every row of `data`, without resampling.
pub fn fit_tree<R: Rng + ?Sized>(
    data: &Dataset,
    config: &ForestConfig,
    rng: &mut R,
) -> RegressionTree {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    fit_tree_on_rows(data, &rows, &TreeParams::from(config), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree_rng;

    fn params(m_try: usize, s_min: f64, k_max: usize) -> TreeParams {
        TreeParams {
            m_try,
            min_node_fraction: s_min,
            max_terminal_nodes: k_max,
        }
    }

    #[test]
    fn constant_targets_give_a_stump() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let d = Dataset::from_rows(&rows, vec![3.5; 20]).unwrap();
        let all: Vec<usize> = (0..20).collect();
        let t = fit_tree_on_rows(&d, &all, &params(2, 0.01, 50), &mut tree_rng(1, 0));
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[100.0, 0.0]), 3.5);
    }

    #[test]
    fn identity_target_is_fit_exactly_when_grown_out() {
        let xs = [0.3, -1.2, 4.0, 2.5, 0.0, 7.7, -3.1, 1.1];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let d = Dataset::from_rows(&rows, xs.to_vec()).unwrap();
        let all: Vec<usize> = (0..xs.len()).collect();
        let t = fit_tree_on_rows(&d, &all, &params(1, 1e-9, 100), &mut tree_rng(7, 0));
        assert_eq!(t.n_leaves(), xs.len());
        for &x in &xs {
            assert_eq!(t.predict(&[x]), x);
        }
    }

    #[test]
    fn two_leaves_means_one_split() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, ((i * 13) % 7) as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| ((i * i) % 11) as f64).collect();
        let d = Dataset::from_rows(&rows, y).unwrap();
        let all: Vec<usize> = (0..30).collect();
        let t = fit_tree_on_rows(&d, &all, &params(2, 0.95, 2), &mut tree_rng(3, 0));
        assert_eq!(t.n_leaves(), 2);
        assert_eq!(t.splits().len(), 1);
    }

    #[test]
    fn node_fraction_gates_the_parent_only() {
        // Root holds 100% of rows and may split; with s_min = 0.9 neither
        // child (at most 90% minus one row) may split again.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
        let d = Dataset::from_rows(&rows, y).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let t = fit_tree_on_rows(&d, &all, &params(1, 0.9, 10), &mut tree_rng(0, 0));
        assert_eq!(t.n_leaves(), 2);
        assert_eq!(t.predict(&[9.0]), 10.0);
        assert_eq!(t.predict(&[2.0]), 0.0);
    }

    #[test]
    fn tie_prefers_lowest_feature_then_smallest_threshold() {
        // Two identical columns: lowest index wins.
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let d = Dataset::from_rows(&rows, y).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let t = fit_tree_on_rows(&d, &all, &params(2, 0.01, 2), &mut tree_rng(0, 0));
        assert_eq!(t.splits(), vec![(0, 2.5)]);

        // Symmetric targets with two equally good thresholds: smallest wins.
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(&rows, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let t = fit_tree_on_rows(&d, &all, &params(1, 0.01, 2), &mut tree_rng(0, 0));
        assert_eq!(t.splits(), vec![(0, 0.5)]);
    }
}
