use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on_rows, RegressionTree, TreeParams};
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub m_try: usize,
    pub min_node_fraction: f64,
    pub max_terminal_nodes: usize,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl ForestConfig {
    /// Shallow stumps for the excess-return model.
    pub fn return_default() -> Self {
        Self {
            n_trees: 500,
            m_try: 4,
            min_node_fraction: 0.95,
            max_terminal_nodes: 2,
            bootstrap: true,
            seed: 0,
        }
    }

    /// Deeper trees for the volatility model.
    pub fn volatility_default() -> Self {
        Self {
            n_trees: 500,
            m_try: 4,
            min_node_fraction: 0.01,
            max_terminal_nodes: 12,
            bootstrap: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        if self.m_try == 0 {
            return Err(Error::Config("m_try must be at least 1".into()));
        }
        if !(self.min_node_fraction > 0.0 && self.min_node_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "min_node_fraction {} outside (0, 1]",
                self.min_node_fraction
            )));
        }
        if self.max_terminal_nodes < 2 {
            return Err(Error::Config("max_terminal_nodes must be at least 2".into()));
        }
        Ok(())
    }
}

/// Random stream for one tree. Depends only on `(seed, tree_index)`, so the
/// ensemble is identical however the trees are scheduled across threads.
pub fn tree_rng(seed: u64, tree_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn from_trees(trees: Vec<RegressionTree>) -> Self {
        assert!(!trees.is_empty(), "forest needs at least one tree");
        Self { trees }
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Arithmetic mean of the trees' predictions.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Bagged random-subspace ensemble. Trees are grown in parallel on the
/// current rayon pool.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<RandomForest> {
    config.validate()?;
    let p = data.n_features();
    if config.m_try > p {
        return Err(Error::Config(format!(
            "m_try {} exceeds the {p} available features",
            config.m_try
        )));
    }
    let n = data.n_rows();
    let params = TreeParams::from(config);
    let trees = (0..config.n_trees as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = tree_rng(config.seed, b);
            let rows: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on_rows(data, &rows, &params, &mut rng)
        })
        .collect();
    Ok(RandomForest { trees })
}
