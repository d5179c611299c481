//! Random-forest regression: bootstrap-sampled CART trees with a
//! variance-reduction criterion and per-split feature subsampling.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FlatDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(d / 3)`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            max_features: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes in an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, count } => Some((*value, *count)),
            _ => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a ForestConfig,
    n_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    n_left: usize,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let value = idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(Node::Leaf {
            value,
            count: idx.len(),
        });
        self.nodes.len() - 1
    }

    /// Exact search over sorted values of one feature.
    fn best_on_feature(&self, idx: &mut [usize], feature: usize) -> Option<BestSplit> {
        let x = self.x;
        idx.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut left_sum = 0.0;
        let mut best: Option<BestSplit> = None;
        for k in 0..n - 1 {
            left_sum += self.y[idx[k]];
            let nl = k + 1;
            let nr = n - nl;
            let (v, vn) = (x[idx[k]][feature], x[idx[k + 1]][feature]);
            if v == vn || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE reduction up to a constant: Σl²/nl + Σr²/nr - Σ²/n
            let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64
                - total * total / n as f64;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature,
                    threshold: 0.5 * (v + vn),
                    gain,
                    n_left: nl,
                });
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        if depth >= self.cfg.max_depth || n < 2 * self.cfg.min_leaf.max(1) || pure {
            return self.leaf(idx);
        }
        let m = self
            .cfg
            .max_features
            .unwrap_or(self.n_features.div_ceil(3))
            .clamp(1, self.n_features);
        let features = sample(&mut self.rng, self.n_features, m).into_vec();
        let mut best: Option<BestSplit> = None;
        for f in features {
            if let Some(s) = self.best_on_feature(idx, f) {
                if best.as_ref().is_none_or(|b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best.filter(|b| b.gain > 1e-12 * (n as f64)) else {
            return self.leaf(idx);
        };
        let x = self.x;
        idx.sort_by(|&a, &b| x[a][split.feature].total_cmp(&x[b][split.feature]));
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0, count: 0 });
        let (l, r) = idx.split_at_mut(split.n_left);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub bootstrap_seed: u64,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

impl ForestModel {
    pub fn fit(data: &FlatDataset, cfg: &ForestConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("training data has no rows".into()));
        }
        if data.len() < cfg.min_leaf {
            return Err(Error::InvalidArgument(format!(
                "{} rows is fewer than min_leaf {}",
                data.len(),
                cfg.min_leaf
            )));
        }
        if cfg.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be >= 1".into()));
        }
        let x: Vec<Vec<f64>> = (0..data.len()).map(|i| data.row(i)).collect();
        let n = data.len();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(t as u64);
                let mut idx: Vec<usize> = if cfg.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut b = Builder {
                    x: &x,
                    y: &data.targets,
                    cfg,
                    n_features: data.dim(),
                    rng,
                    nodes: Vec::new(),
                };
                b.build(&mut idx, 0);
                RegressionTree { nodes: b.nodes }
            })
            .collect();
        Ok(ForestModel {
            trees,
            n_trees: cfg.n_trees,
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            bootstrap_seed: cfg.seed,
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction input".into()));
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }
}
