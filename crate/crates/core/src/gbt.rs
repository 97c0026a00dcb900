//! Second-order gradient-boosted regression trees with exact greedy splits.
//!
//! Squared-error objective: gradient `g = ŷ − y`, hessian `h = 1`. A node with
//! gradient sum `G` and hessian sum `H` gets leaf weight `−G/(H+λ)`, scaled by
//! the learning rate before it is stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gains at or below this are round-off (e.g. a constant target whose mean
/// is not exactly representable) and never produce a split.
pub const MIN_SPLIT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Recorded for provenance; the exact greedy learner draws no random numbers.
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.lambda >= 0.0) || !(self.gamma >= 0.0) || !(self.min_child_weight >= 0.0) {
            return Err(Error::Config("lambda, gamma and min_child_weight must be >= 0".into()));
        }
        Ok(())
    }
}

/// Loss reduction of splitting a node into left/right children.
pub fn split_gain(g_l: f64, h_l: f64, g_r: f64, h_r: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(g_l, h_l) + score(g_r, h_r) - score(g_l + g_r, h_l + h_r)) - gamma
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
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
                    ..
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split {
                feature,
                threshold,
                gain,
                ..
            } => Some((feature, threshold, gain)),
            Node::Leaf { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    pub config: GbtConfig,
    /// Training MSE after each boosting round.
    pub train_mse_history: Vec<f64>,
}

impl GbtModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self.base_score + self.trees.iter().map(|t| t.predict(x)).sum::<f64>())
    }

    pub fn split_count(&self) -> usize {
        self.trees.iter().map(|t| t.splits().count()).sum()
    }

    /// Every threshold used for `feature`, sorted and deduplicated.
    pub fn thresholds(&self, feature: usize) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .trees
            .iter()
            .flat_map(|t| t.splits())
            .filter(|s| s.0 == feature)
            .map(|s| s.1)
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    cfg: &'a GbtConfig,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Builder<'_> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        self.cfg.learning_rate * (-g / (h + self.cfg.lambda))
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h = rows.len() as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(g, h),
        });
        if depth >= self.cfg.max_depth || h < 2.0 * self.cfg.min_child_weight {
            return id;
        }
        let Some(best) = self.best_split(&rows, g, h) else {
            return id;
        };
        let left = self.build(best.left, depth + 1);
        let right = self.build(best.right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], g_total: f64, h_total: f64) -> Option<BestSplit> {
        let mcw = self.cfg.min_child_weight;
        let mut best: Option<(usize, f64, f64)> = None;
        let p = self.x[rows[0]].len();
        let mut sorted = rows.to_vec();
        for feature in 0..p {
            sorted.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]).then(a.cmp(&b)));
            let (mut g_l, mut h_l) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                g_l += self.grad[sorted[k]];
                h_l += 1.0;
                let (v, next) = (self.x[sorted[k]][feature], self.x[sorted[k + 1]][feature]);
                if v == next {
                    continue;
                }
                let h_r = h_total - h_l;
                if h_l < mcw || h_r < mcw {
                    continue;
                }
                let gain = split_gain(g_l, h_l, g_total - g_l, h_r, self.cfg.lambda, self.cfg.gamma);
                if gain > MIN_SPLIT_GAIN && best.is_none_or(|(_, _, b)| gain > b) {
                    best = Some((feature, 0.5 * (v + next), gain));
                }
            }
        }
        let (feature, threshold, gain) = best?;
        let (left, right) = rows.iter().partition(|&&i| self.x[i][feature] < threshold);
        Some(BestSplit {
            feature,
            threshold,
            gain,
            left,
            right,
        })
    }
}

fn mse_of(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

pub fn fit_gbt(x: &[Vec<f64>], y: &[f64], config: &GbtConfig) -> Result<GbtModel> {
    config.validate()?;
    if x.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 rows, got {}", x.len())));
    }
    if x.len() != y.len() {
        return Err(Error::Shape {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let p = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(Error::Shape {
            expected: p,
            actual: bad.len(),
        });
    }
    let base_score = y.iter().sum::<f64>() / y.len() as f64;
    let mut pred = vec![base_score; y.len()];
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut history = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let grad: Vec<f64> = pred.iter().zip(y).map(|(p, t)| p - t).collect();
        let mut b = Builder {
            x,
            grad: &grad,
            cfg: config,
            nodes: Vec::new(),
        };
        b.build((0..x.len()).collect(), 0);
        let tree = Tree { nodes: b.nodes };
        for (p, xi) in pred.iter_mut().zip(x) {
            *p += tree.predict(xi);
        }
        history.push(mse_of(&pred, y));
        trees.push(tree);
    }
    Ok(GbtModel {
        base_score,
        n_features: p,
        trees,
        config: config.clone(),
        train_mse_history: history,
    })
}

/// Total split gain per feature normalised to sum to one, largest first
/// (ties broken by feature index). Empty when the model has no splits.
pub fn feature_importance(model: &GbtModel) -> Vec<(usize, f64)> {
    let mut totals = vec![0.0; model.n_features];
    for t in &model.trees {
        for (f, _, gain) in t.splits() {
            totals[f] += gain;
        }
    }
    let sum: f64 = totals.iter().sum();
    if model.split_count() == 0 || !(sum > 0.0) {
        return Vec::new();
    }
    let mut ranked: Vec<(usize, f64)> = totals.into_iter().map(|t| t / sum).enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}
