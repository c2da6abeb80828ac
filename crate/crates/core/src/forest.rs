//! Binary classification random forest: CART trees with Gini splits,
//! bootstrap resampling, random feature subsets, and Gini importance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; defaults to ceil(sqrt(p)) when None.
    pub mtry: Option<usize>,
    /// Minimum observations in a leaf.
    pub min_node: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_node: 5,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestParams {
    fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| math::ceil(math::sqrt(p as f64)) as usize)
            .clamp(1, p.max(1))
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::BadForestParams("n_trees must be >= 1"));
        }
        if self.min_node == 0 {
            return Err(Error::BadForestParams("min_node must be >= 1"));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > p {
                return Err(Error::BadForestParams("mtry must lie in 1..=p"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        var: usize,
        value: f64,
        left: usize,
        right: usize,
        gini_gain: f64,
        n_node: usize,
    },
    Leaf {
        prob: f64,
        n_node: usize,
    },
}

/// A single CART tree stored as an index arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Class-1 probability of the unique leaf reached by x.
    pub fn prob(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { prob, .. } => return *prob,
                TreeNode::Split {
                    var, value, left, right, ..
                } => {
                    idx = if x[*var] <= *value { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    /// Per-feature total Gini gain across all splits, divided by the
    /// number of trees.
    pub importances: Vec<f64>,
    /// Out-of-bag accuracy at the 0.5 vote threshold, when every row was
    /// out of bag at least once.
    pub oob_accuracy: Option<f64>,
    n_features: usize,
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Mean of per-tree leaf probabilities.
    pub fn prob(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let s: f64 = self.trees.iter().map(|t| t.prob(x)).sum();
        Ok(s / self.trees.len() as f64)
    }
}

fn gini_binary(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    mtry: usize,
    min_node: usize,
    max_depth: usize,
    nodes: Vec<TreeNode>,
    importance: &'a mut [f64],
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, ids: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let n = ids.len();
        let ones = ids.iter().filter(|&&i| self.y[i] == 1).count();
        let prob = ones as f64 / n as f64;
        let make_leaf = n < 2 * self.min_node
            || ones == 0
            || ones == n
            || depth >= self.max_depth;
        if !make_leaf {
            if let Some((var, value, gain, split_at)) = self.best_split(ids, rng) {
                ids.sort_unstable_by(|&a, &b| {
                    self.x.get(a, var).total_cmp(&self.x.get(b, var))
                });
                let slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { prob, n_node: n }); // placeholder
                self.importance[var] += gain;
                let (left_ids, right_ids) = ids.split_at_mut(split_at);
                let left = self.build(left_ids, depth + 1, rng);
                let right = self.build(right_ids, depth + 1, rng);
                self.nodes[slot] = TreeNode::Split {
                    var,
                    value,
                    left,
                    right,
                    gini_gain: gain,
                    n_node: n,
                };
                return slot;
            }
        }
        self.nodes.push(TreeNode::Leaf { prob, n_node: n });
        self.nodes.len() - 1
    }

    /// Best Gini-gain split over an mtry-subset of features; candidate cut
    /// points are midpoints between consecutive distinct sorted values.
    /// Returns (feature, cut value, gain, left count).
    fn best_split(&self, ids: &[usize], rng: &mut Rng) -> Option<(usize, f64, f64, usize)> {
        let p = self.x.cols();
        let n = ids.len();
        let total_ones = ids.iter().filter(|&&i| self.y[i] == 1).count() as f64;
        let parent_impurity = n as f64 * gini_binary(total_ones / n as f64);

        let mut features: Vec<usize> = (0..p).collect();
        for i in 0..self.mtry.min(p) {
            let j = i + rng.next_index(p - i);
            features.swap(i, j);
        }

        let mut best: Option<(usize, f64, f64, usize)> = None;
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &var in &features[..self.mtry.min(p)] {
            pairs.clear();
            pairs.extend(ids.iter().map(|&i| (self.x.get(i, var), self.y[i])));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_n = 0usize;
            let mut left_ones = 0f64;
            for cut in 0..n - 1 {
                left_n += 1;
                left_ones += f64::from(pairs[cut].1);
                if pairs[cut].0 == pairs[cut + 1].0 {
                    continue;
                }
                let right_n = n - left_n;
                if left_n < self.min_node || right_n < self.min_node {
                    continue;
                }
                let right_ones = total_ones - left_ones;
                let child_impurity = left_n as f64 * gini_binary(left_ones / left_n as f64)
                    + right_n as f64 * gini_binary(right_ones / right_n as f64);
                let gain = parent_impurity - child_impurity;
                if gain > 1e-12 && best.map_or(true, |(_, _, g, _)| gain > g) {
                    let value = 0.5 * (pairs[cut].0 + pairs[cut + 1].0);
                    best = Some((var, value, gain, left_n));
                }
            }
        }
        best
    }
}

/// Grows one CART tree on the given rows; both classes need not be present
/// (pure nodes become leaves).
pub fn fit_tree(x: &Matrix, y01: &[u8], params: &ForestParams, rng: &mut Rng) -> Result<Tree> {
    if x.rows() == 0 || y01.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y01.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y01.len(),
        });
    }
    params.validate(x.cols())?;
    let mut importance = vec![0.0; x.cols()];
    let mut ids: Vec<usize> = (0..x.rows()).collect();
    let mut builder = TreeBuilder {
        x,
        y: y01,
        mtry: params.resolved_mtry(x.cols()),
        min_node: params.min_node,
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        nodes: Vec::new(),
        importance: &mut importance,
    };
    builder.build(&mut ids, 0, rng);
    Ok(Tree {
        nodes: builder.nodes,
    })
}

/// Fits `n_trees` trees, each on a bootstrap resample, with per-tree
/// deterministic substreams derived from the seed. Importances accumulate
/// the Gini gain of every split per feature, divided by the tree count.
pub fn fit_forest(x: &Matrix, y01: &[u8], params: &ForestParams) -> Result<Forest> {
    let n = x.rows();
    if n == 0 || y01.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y01.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y01.len(),
        });
    }
    let p = x.cols();
    params.validate(p)?;

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut importances = vec![0.0; p];
    let mut oob_sum = vec![0.0f64; n];
    let mut oob_count = vec![0usize; n];
    let mut inbag = vec![false; n];

    for t in 0..params.n_trees {
        let mut boot_rng = Rng::substream(params.seed, (t as u64) << 1);
        let mut split_rng = Rng::substream(params.seed, ((t as u64) << 1) | 1);
        inbag.iter_mut().for_each(|b| *b = false);
        let ids: Vec<usize> = (0..n)
            .map(|_| {
                let i = boot_rng.next_index(n);
                inbag[i] = true;
                i
            })
            .collect();
        let xb = x.select_rows(&ids);
        let yb: Vec<u8> = ids.iter().map(|&i| y01[i]).collect();

        let mut imp = vec![0.0; p];
        let mut node_ids: Vec<usize> = (0..n).collect();
        let mut builder = TreeBuilder {
            x: &xb,
            y: &yb,
            mtry: params.resolved_mtry(p),
            min_node: params.min_node,
            max_depth: params.max_depth.unwrap_or(usize::MAX),
            nodes: Vec::new(),
            importance: &mut imp,
        };
        builder.build(&mut node_ids, 0, &mut split_rng);
        let tree = Tree {
            nodes: builder.nodes,
        };
        for j in 0..p {
            importances[j] += imp[j];
        }
        for i in 0..n {
            if !inbag[i] {
                oob_sum[i] += tree.prob(x.row(i));
                oob_count[i] += 1;
            }
        }
        trees.push(tree);
    }

    importances
        .iter_mut()
        .for_each(|v| *v /= params.n_trees as f64);

    let mut correct = 0usize;
    let mut counted = 0usize;
    for i in 0..n {
        if oob_count[i] > 0 {
            counted += 1;
            let vote = oob_sum[i] / oob_count[i] as f64 >= 0.5;
            if vote == (y01[i] == 1) {
                correct += 1;
            }
        }
    }
    let oob_accuracy = (counted == n && n > 0).then(|| correct as f64 / counted as f64);

    Ok(Forest {
        trees,
        params: params.clone(),
        importances,
        oob_accuracy,
        n_features: p,
    })
}
