//! Reduced-error-pruned decision tree.
//!
//! Training runs one grow/prune/backfit pipeline:
//!
//! 1. hold out one stratified fold of the training data as a prune set,
//! 2. grow a tree on the rest by information gain (numeric values are sorted
//!    once at the root; nominal attributes split multiway),
//! 3. replace subtrees bottom-up by leaves whenever that does not increase
//!    the prune-set error,
//! 4. recompute every node's class distribution from the full training data.
//!
//! Instances with a missing test value are split into fractional pieces,
//! weighted by the known-value branch weights at that node, both in training
//! and at prediction time.

mod io;
mod split;

use std::sync::Arc;

use crate::dataset::{split_grow_prune, Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};

pub use self::split::{best_split, entropy, info_gain, variance_reduction, SplitCandidate, SplitTest, Weighted};
use self::split::{best_split_presorted, class_distribution, sort_known};

/// Parameters controlling growth and pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowParams {
    pub min_instances_per_leaf: f64,
    /// `None` grows without a depth limit.
    pub max_depth: Option<usize>,
    pub prune_folds: usize,
    pub do_prune: bool,
    pub seed: u64,
}

impl Default for GrowParams {
    fn default() -> Self {
        GrowParams {
            min_instances_per_leaf: 2.0,
            max_depth: None,
            prune_folds: 3,
            do_prune: true,
            seed: 1,
        }
    }
}

impl GrowParams {
    pub fn validate(&self) -> Result<()> {
        if !self.min_instances_per_leaf.is_finite() || self.min_instances_per_leaf <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "minimum leaf weight must be positive, got {}",
                self.min_instances_per_leaf
            )));
        }
        if self.do_prune && self.prune_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "prune folds must be at least 2, got {}",
                self.prune_folds
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepNode {
    Internal {
        attribute: usize,
        test: SplitTest,
        children: Vec<RepNode>,
        /// Known-value training weight per branch; routes missing values.
        branch_weights: Vec<f64>,
        /// Class weights of the training data reaching this node.
        distribution: Vec<f64>,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

impl RepNode {
    pub fn distribution(&self) -> &[f64] {
        match self {
            RepNode::Internal { distribution, .. } | RepNode::Leaf { distribution } => distribution,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, RepNode::Leaf { .. })
    }

    pub fn num_nodes(&self) -> usize {
        match self {
            RepNode::Leaf { .. } => 1,
            RepNode::Internal { children, .. } => 1 + children.iter().map(RepNode::num_nodes).sum::<usize>(),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            RepNode::Leaf { .. } => 1,
            RepNode::Internal { children, .. } => children.iter().map(RepNode::num_leaves).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RepNode::Leaf { .. } => 0,
            RepNode::Internal { children, .. } => 1 + children.iter().map(RepNode::depth).max().unwrap_or(0),
        }
    }

    /// Pieces of an instance sent to each child: `(child, weight)`.
    fn route(&self, inst: &Instance, weight: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if let RepNode::Internal {
            attribute,
            test,
            branch_weights,
            ..
        } = self
        {
            route_value(inst.value(*attribute), *test, branch_weights, weight, out);
        }
    }

    fn partition(&self, dataset: &Dataset, items: &[Weighted]) -> Vec<Vec<Weighted>> {
        match self {
            RepNode::Internal {
                attribute,
                test,
                branch_weights,
                ..
            } => partition(dataset, *attribute, *test, branch_weights, items),
            RepNode::Leaf { .. } => Vec::new(),
        }
    }
}

fn route_value(value: Value, test: SplitTest, branch_weights: &[f64], weight: f64, out: &mut Vec<(usize, f64)>) {
    match (value, test) {
        (Value::Numeric(x), SplitTest::NumericThreshold(t)) => {
            out.push((if x <= t { 0 } else { 1 }, weight));
        }
        (Value::Nominal(v), SplitTest::NominalMultiway) => out.push((v, weight)),
        _ => {
            let total: f64 = branch_weights.iter().sum();
            for (c, bw) in branch_weights.iter().enumerate() {
                if *bw > 0.0 {
                    out.push((c, weight * bw / total));
                }
            }
        }
    }
}

/// Splits weighted items over the branches of a test, preserving order.
fn partition(
    dataset: &Dataset,
    attribute: usize,
    test: SplitTest,
    branch_weights: &[f64],
    items: &[Weighted],
) -> Vec<Vec<Weighted>> {
    let mut parts = vec![Vec::new(); branch_weights.len()];
    let mut pieces = Vec::new();
    for it in items {
        pieces.clear();
        route_value(
            dataset.instance(it.index).value(attribute),
            test,
            branch_weights,
            it.weight,
            &mut pieces,
        );
        for &(c, w) in &pieces {
            parts[c].push(Weighted {
                index: it.index,
                weight: w,
            });
        }
    }
    parts
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn all_items(dataset: &Dataset) -> Vec<Weighted> {
    dataset
        .instances()
        .iter()
        .enumerate()
        .filter(|(_, inst)| inst.class.is_some())
        .map(|(index, inst)| Weighted {
            index,
            weight: inst.weight,
        })
        .collect()
}

struct Grower<'a> {
    dataset: &'a Dataset,
    params: &'a GrowParams,
}

impl Grower<'_> {
    fn grow(&self, items: Vec<Weighted>, sorted: Vec<Vec<Weighted>>, depth: usize) -> RepNode {
        let distribution = class_distribution(self.dataset, &items);
        let total: f64 = distribution.iter().sum();
        let min_leaf = self.params.min_instances_per_leaf;
        let pure = distribution[argmax(&distribution)] >= total;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if total < 2.0 * min_leaf || pure || depth_reached {
            return RepNode::Leaf { distribution };
        }

        let mut best: Option<SplitCandidate> = None;
        for (attribute, order) in sorted.iter().enumerate() {
            let cand = best_split_presorted(self.dataset, &items, order, attribute, min_leaf);
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return RepNode::Leaf { distribution };
        };

        let child_items = partition(self.dataset, split.attribute, split.test, &split.branch_weights, &items);
        let mut child_sorted: Vec<Vec<Vec<Weighted>>> = vec![Vec::with_capacity(sorted.len()); child_items.len()];
        for list in &sorted {
            let parts = partition(self.dataset, split.attribute, split.test, &split.branch_weights, list);
            for (c, part) in parts.into_iter().enumerate() {
                child_sorted[c].push(part);
            }
        }
        let children = child_items
            .into_iter()
            .zip(child_sorted)
            .map(|(ci, cs)| self.grow(ci, cs, depth + 1))
            .collect();
        RepNode::Internal {
            attribute: split.attribute,
            test: split.test,
            children,
            branch_weights: split.branch_weights,
            distribution,
        }
    }
}

/// Grows an unpruned tree on `grow_set` by maximal information gain. Ties
/// between attributes go to the lowest attribute index.
pub fn grow_tree(grow_set: &Dataset, params: &GrowParams) -> Result<RepNode> {
    params.validate()?;
    let items = all_items(grow_set);
    if items.is_empty() {
        return Err(Error::InsufficientData(
            "cannot grow a tree on no labeled instances".into(),
        ));
    }
    let schema = grow_set.schema();
    let sorted = (0..schema.num_attributes())
        .map(|a| {
            if schema.attribute(a).is_numeric() {
                sort_known(grow_set, &items, a)
            } else {
                Vec::new()
            }
        })
        .collect();
    let grower = Grower {
        dataset: grow_set,
        params,
    };
    Ok(grower.grow(items, sorted, 0))
}

/// Class a node predicts for prune-set purposes: its training majority, or
/// the parent's when no training weight reached it.
fn node_class(node: &RepNode, inherited: usize) -> usize {
    let dist = node.distribution();
    if dist.iter().sum::<f64>() > 0.0 {
        argmax(dist)
    } else {
        inherited
    }
}

fn prune_node(node: RepNode, dataset: &Dataset, items: &[Weighted], inherited: usize) -> (RepNode, f64) {
    let holdout = class_distribution(dataset, items);
    let held: f64 = holdout.iter().sum();
    let class = node_class(&node, inherited);
    let leaf_error = held - holdout[class];
    if node.is_leaf() {
        return (node, leaf_error);
    }
    let parts = node.partition(dataset, items);
    let RepNode::Internal {
        attribute,
        test,
        children,
        branch_weights,
        distribution,
    } = node
    else {
        unreachable!()
    };
    let mut subtree_error = 0.0;
    let mut pruned = Vec::with_capacity(children.len());
    for (child, part) in children.into_iter().zip(parts) {
        let (c, e) = prune_node(child, dataset, &part, class);
        subtree_error += e;
        pruned.push(c);
    }
    if leaf_error <= subtree_error + 1e-12 * held.max(1.0) {
        (RepNode::Leaf { distribution }, leaf_error)
    } else {
        (
            RepNode::Internal {
                attribute,
                test,
                children: pruned,
                branch_weights,
                distribution,
            },
            subtree_error,
        )
    }
}

/// Reduced-error pruning: bottom-up, each subtree is replaced by a leaf
/// predicting its training majority whenever the leaf's error on
/// `prune_set` is no larger than the subtree's.
pub fn prune_tree(root: RepNode, prune_set: &Dataset) -> RepNode {
    let items = all_items(prune_set);
    let inherited = argmax(root.distribution());
    prune_node(root, prune_set, &items, inherited).0
}

/// Misclassified weight of `dataset` under the tree's hard leaf predictions.
pub fn prune_set_error(root: &RepNode, dataset: &Dataset) -> f64 {
    fn walk(node: &RepNode, dataset: &Dataset, items: &[Weighted], inherited: usize) -> f64 {
        let class = node_class(node, inherited);
        match node {
            RepNode::Leaf { .. } => {
                let holdout = class_distribution(dataset, items);
                holdout.iter().sum::<f64>() - holdout[class]
            }
            RepNode::Internal { children, .. } => node
                .partition(dataset, items)
                .iter()
                .zip(children)
                .map(|(part, child)| walk(child, dataset, part, class))
                .sum(),
        }
    }
    walk(root, dataset, &all_items(dataset), argmax(root.distribution()))
}

fn backfit_node(node: RepNode, dataset: &Dataset, items: &[Weighted]) -> RepNode {
    let distribution = class_distribution(dataset, items);
    match node {
        RepNode::Leaf { .. } => RepNode::Leaf { distribution },
        internal @ RepNode::Internal { .. } => {
            let parts = internal.partition(dataset, items);
            let RepNode::Internal {
                attribute,
                test,
                children,
                branch_weights,
                ..
            } = internal
            else {
                unreachable!()
            };
            let children = children
                .into_iter()
                .zip(parts)
                .map(|(child, part)| backfit_node(child, dataset, &part))
                .collect();
            RepNode::Internal {
                attribute,
                test,
                children,
                branch_weights,
                distribution,
            }
        }
    }
}

/// Recomputes every node's class distribution by routing `full_train`
/// through the fixed structure. Branch weights are left as grown.
pub fn backfit(root: RepNode, full_train: &Dataset) -> RepNode {
    let items = all_items(full_train);
    backfit_node(root, full_train, &items)
}

/// A trained reduced-error-pruned tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RepTreeModel {
    root: RepNode,
    schema: Arc<Schema>,
    params: GrowParams,
}

impl RepTreeModel {
    pub fn new(root: RepNode, schema: Arc<Schema>, params: GrowParams) -> Self {
        RepTreeModel { root, schema, params }
    }

    pub fn root(&self) -> &RepNode {
        &self.root
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn params(&self) -> &GrowParams {
        &self.params
    }

    /// Laplace-smoothed class probabilities. Missing test values blend the
    /// children's distributions by the node's branch weights; a leaf that
    /// received no training weight uses its parent's distribution.
    pub fn predict_distribution(&self, instance: &Instance) -> Vec<f64> {
        fn laplace(dist: &[f64]) -> Vec<f64> {
            let total: f64 = dist.iter().sum();
            let k = dist.len() as f64;
            dist.iter().map(|w| (w + 1.0) / (total + k)).collect()
        }
        fn walk(node: &RepNode, inst: &Instance, fallback: &[f64], out: &mut [f64], scale: f64) {
            let own = node.distribution();
            let effective = if own.iter().sum::<f64>() > 0.0 { own } else { fallback };
            match node {
                RepNode::Leaf { .. } => {
                    for (o, p) in out.iter_mut().zip(laplace(effective)) {
                        *o += scale * p;
                    }
                }
                RepNode::Internal { children, .. } => {
                    let mut pieces = Vec::new();
                    node.route(inst, scale, &mut pieces);
                    for (c, w) in pieces {
                        walk(&children[c], inst, effective, out, w);
                    }
                }
            }
        }
        let mut out = vec![0.0; self.schema.num_classes()];
        let root_dist = self.root.distribution().to_vec();
        walk(&self.root, instance, &root_dist, &mut out, 1.0);
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|p| *p /= total);
        }
        out
    }

    pub fn predict(&self, instance: &Instance) -> usize {
        argmax(&self.predict_distribution(instance))
    }

    pub fn to_text(&self) -> String {
        io::write_model(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        io::read_model(text)
    }
}

/// Trains a REP tree: grow on the grow set, prune against the held-out
/// fold, then backfit on all of `train`. With `do_prune` off, or when `train`
/// has fewer labeled instances than `prune_folds`, the tree is grown on all
/// of `train` and left unpruned.
pub fn train_reptree(train: &Dataset, params: &GrowParams) -> Result<RepTreeModel> {
    params.validate()?;
    let labeled = train.labeled();
    if labeled.is_empty() {
        return Err(Error::InsufficientData("no labeled training instances".into()));
    }
    let root = if params.do_prune && labeled.len() >= params.prune_folds {
        let (grow, prune) = split_grow_prune(&labeled, params.prune_folds, params.seed)?;
        let grown = grow_tree(&grow, params)?;
        let pruned = prune_tree(grown, &prune);
        backfit(pruned, &labeled)
    } else {
        grow_tree(&labeled, params)?
    };
    Ok(RepTreeModel::new(root, labeled.shared_schema(), params.clone()))
}

#[cfg(test)]
mod tests;
