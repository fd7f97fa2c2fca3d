//! Entropy, information gain, and per-attribute split search.

use crate::dataset::{AttributeKind, Dataset, Value};
use crate::error::{Error, Result};

/// Tolerance used when checking that child class weights add up to the parent.
const SUM_TOLERANCE: f64 = 1e-9;

/// Shannon entropy in bits of a class-weight vector.
pub fn entropy(class_weights: &[f64]) -> Result<f64> {
    if class_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(
            "class weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = class_weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("entropy of an all-zero weight vector".into()));
    }
    Ok(entropy_unchecked(class_weights, total))
}

pub(crate) fn entropy_unchecked(class_weights: &[f64], total: f64) -> f64 {
    let mut h = 0.0;
    for &w in class_weights {
        if w > 0.0 {
            let p = w / total;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Information gain of partitioning `parent` into `children`, in bits.
/// Empty children contribute nothing.
pub fn info_gain(parent: &[f64], children: &[Vec<f64>]) -> Result<f64> {
    let parent_h = entropy(parent)?;
    let total: f64 = parent.iter().sum();
    for (k, &p) in parent.iter().enumerate() {
        let mut s = 0.0;
        for child in children {
            if child.len() != parent.len() {
                return Err(Error::InvalidParameter(
                    "child and parent class counts differ in length".into(),
                ));
            }
            s += child[k];
        }
        if (s - p).abs() > SUM_TOLERANCE * p.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "children weights for class {k} sum to {s}, parent has {p}"
            )));
        }
    }
    Ok(parent_h - conditional_entropy(children, total)?)
}

fn conditional_entropy(children: &[Vec<f64>], total: f64) -> Result<f64> {
    let mut h = 0.0;
    for child in children {
        let w: f64 = child.iter().sum();
        if w > 0.0 {
            h += w / total * entropy(child)?;
        }
    }
    Ok(h)
}

fn gain_unchecked(parent_h: f64, total: f64, children: &[Vec<f64>]) -> f64 {
    let mut h = 0.0;
    for child in children {
        let w: f64 = child.iter().sum();
        if w > 0.0 {
            h += w / total * entropy_unchecked(child, w);
        }
    }
    parent_h - h
}

/// Weighted variance reduction for a numeric target: the regression-tree
/// analogue of [`info_gain`]. Each slice holds `(target, weight)` pairs.
pub fn variance_reduction(parent: &[(f64, f64)], children: &[Vec<(f64, f64)>]) -> Result<f64> {
    fn weighted_sse(items: &[(f64, f64)]) -> (f64, f64) {
        let w: f64 = items.iter().map(|(_, w)| w).sum();
        if w <= 0.0 {
            return (0.0, 0.0);
        }
        let mean = items.iter().map(|(y, w)| y * w).sum::<f64>() / w;
        (items.iter().map(|(y, w)| w * (y - mean).powi(2)).sum(), w)
    }
    let (parent_sse, total) = weighted_sse(parent);
    if total <= 0.0 {
        return Err(Error::InvalidParameter("empty parent for variance reduction".into()));
    }
    let child_total: f64 = children.iter().flatten().map(|(_, w)| w).sum();
    if (child_total - total).abs() > SUM_TOLERANCE * total.max(1.0) {
        return Err(Error::InvalidParameter("children do not partition the parent".into()));
    }
    let child_sse: f64 = children.iter().map(|c| weighted_sse(c).0).sum();
    Ok((parent_sse - child_sse) / total)
}

/// An instance index with the (possibly fractional) weight it carries at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weighted {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// Two branches: value `<= threshold`, value `> threshold`.
    NumericThreshold(f64),
    /// One branch per category of the attribute.
    NominalMultiway,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub attribute: usize,
    pub test: SplitTest,
    pub gain: f64,
    /// Class weights per child, missing-value instances already distributed.
    pub children: Vec<Vec<f64>>,
    /// Weight of instances with a known value going down each branch.
    pub branch_weights: Vec<f64>,
}

/// Best split of `items` on `attribute`.
///
/// Numeric attributes are tried at every midpoint between consecutive
/// distinct values; nominal attributes give one multiway split. Instances
/// missing the attribute are spread over the children in proportion to the
/// known-value branch weights. Returns `None` when the node is already pure
/// or no split is legal: a numeric split needs both children to carry at
/// least `min_leaf` weight, a nominal split at least two such children.
pub fn best_split(
    dataset: &Dataset,
    items: &[Weighted],
    attribute: usize,
    min_leaf: f64,
) -> Result<Option<SplitCandidate>> {
    if attribute >= dataset.schema().num_attributes() {
        return Err(Error::InvalidParameter(format!(
            "attribute index {attribute} out of range"
        )));
    }
    let sorted = if dataset.schema().attribute(attribute).is_numeric() {
        sort_known(dataset, items, attribute)
    } else {
        Vec::new()
    };
    Ok(best_split_presorted(dataset, items, &sorted, attribute, min_leaf))
}

pub(crate) fn sort_known(dataset: &Dataset, items: &[Weighted], attribute: usize) -> Vec<Weighted> {
    let mut known: Vec<(f64, Weighted)> = items
        .iter()
        .filter_map(|it| match dataset.instance(it.index).value(attribute) {
            Value::Numeric(x) => Some((x, *it)),
            _ => None,
        })
        .collect();
    known.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.index.cmp(&b.1.index)));
    known.into_iter().map(|(_, it)| it).collect()
}

pub(crate) fn class_distribution(dataset: &Dataset, items: &[Weighted]) -> Vec<f64> {
    let mut dist = vec![0.0; dataset.num_classes()];
    for it in items {
        if let Some(c) = dataset.instance(it.index).class {
            dist[c] += it.weight;
        }
    }
    dist
}

/// Split search with the numeric values already sorted (`sorted` holds the
/// known-valued items of `items` in ascending attribute order).
pub(crate) fn best_split_presorted(
    dataset: &Dataset,
    items: &[Weighted],
    sorted: &[Weighted],
    attribute: usize,
    min_leaf: f64,
) -> Option<SplitCandidate> {
    let parent = class_distribution(dataset, items);
    let total: f64 = parent.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let parent_h = entropy_unchecked(&parent, total);
    if parent_h <= 0.0 {
        return None;
    }
    match &dataset.schema().attribute(attribute).kind {
        AttributeKind::Numeric => numeric_split(dataset, sorted, &parent, parent_h, total, attribute, min_leaf),
        AttributeKind::Nominal(cats) => nominal_split(
            dataset,
            items,
            &parent,
            parent_h,
            total,
            attribute,
            cats.len(),
            min_leaf,
        ),
    }
}

fn numeric_split(
    dataset: &Dataset,
    sorted: &[Weighted],
    parent: &[f64],
    parent_h: f64,
    total: f64,
    attribute: usize,
    min_leaf: f64,
) -> Option<SplitCandidate> {
    let k = parent.len();
    let known = class_distribution(dataset, sorted);
    let known_total: f64 = known.iter().sum();
    if known_total <= 0.0 {
        return None;
    }
    let missing: Vec<f64> = parent.iter().zip(&known).map(|(p, q)| (p - q).max(0.0)).collect();

    let value_of = |it: &Weighted| match dataset.instance(it.index).value(attribute) {
        Value::Numeric(x) => x,
        _ => unreachable!("sorted list holds known values only"),
    };

    let mut left = vec![0.0; k];
    let mut best: Option<SplitCandidate> = None;
    for i in 0..sorted.len().saturating_sub(1) {
        if let Some(c) = dataset.instance(sorted[i].index).class {
            left[c] += sorted[i].weight;
        }
        let (v, next) = (value_of(&sorted[i]), value_of(&sorted[i + 1]));
        if v >= next {
            continue;
        }
        let left_known: f64 = left.iter().sum();
        let frac = left_known / known_total;
        let children: Vec<Vec<f64>> = vec![
            (0..k).map(|c| left[c] + missing[c] * frac).collect(),
            (0..k)
                .map(|c| (known[c] - left[c]).max(0.0) + missing[c] * (1.0 - frac))
                .collect(),
        ];
        let sizes = [children[0].iter().sum::<f64>(), children[1].iter().sum::<f64>()];
        if sizes[0] < min_leaf || sizes[1] < min_leaf {
            continue;
        }
        let gain = gain_unchecked(parent_h, total, &children);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let mut threshold = (v + next) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            best = Some(SplitCandidate {
                attribute,
                test: SplitTest::NumericThreshold(threshold),
                gain,
                children,
                branch_weights: vec![left_known, known_total - left_known],
            });
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn nominal_split(
    dataset: &Dataset,
    items: &[Weighted],
    parent: &[f64],
    parent_h: f64,
    total: f64,
    attribute: usize,
    num_categories: usize,
    min_leaf: f64,
) -> Option<SplitCandidate> {
    let k = parent.len();
    let mut per_branch = vec![vec![0.0; k]; num_categories];
    let mut missing = vec![0.0; k];
    for it in items {
        let inst = dataset.instance(it.index);
        let Some(c) = inst.class else { continue };
        match inst.value(attribute) {
            Value::Nominal(v) => per_branch[v][c] += it.weight,
            _ => missing[c] += it.weight,
        }
    }
    let branch_weights: Vec<f64> = per_branch.iter().map(|b| b.iter().sum()).collect();
    let known_total: f64 = branch_weights.iter().sum();
    if known_total <= 0.0 {
        return None;
    }
    let children: Vec<Vec<f64>> = per_branch
        .iter()
        .zip(&branch_weights)
        .map(|(b, bw)| {
            let frac = bw / known_total;
            b.iter().zip(&missing).map(|(w, m)| w + m * frac).collect()
        })
        .collect();
    let big_enough = children.iter().filter(|c| c.iter().sum::<f64>() >= min_leaf).count();
    if big_enough < 2 {
        return None;
    }
    Some(SplitCandidate {
        attribute,
        test: SplitTest::NominalMultiway,
        gain: gain_unchecked(parent_h, total, &children),
        children,
        branch_weights,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dataset::{AttributeSpec, Instance, Schema};

    fn numeric_dataset(points: &[(f64, usize)]) -> Dataset {
        let schema = Arc::new(
            Schema::new(
                "r",
                vec![AttributeSpec::numeric("x")],
                AttributeSpec::nominal("class", &["good", "bad"]),
            )
            .unwrap(),
        );
        let instances = points
            .iter()
            .map(|&(x, c)| Instance::new(vec![Value::Numeric(x)], Some(c)))
            .collect();
        Dataset::new(schema, instances).unwrap()
    }

    fn all_items(ds: &Dataset) -> Vec<Weighted> {
        ds.instances()
            .iter()
            .enumerate()
            .map(|(index, i)| Weighted {
                index,
                weight: i.weight,
            })
            .collect()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[5.0, 5.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&[10.0, 0.0]).unwrap(), 0.0);
        // -0.7 log2 0.7 - 0.3 log2 0.3 = 0.881290899...
        assert!((entropy(&[700.0, 300.0]).unwrap() - 0.881_290_899_230_693_3).abs() < 1e-4);
        assert!(entropy(&[0.0, 0.0]).is_err());
        assert!(entropy(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn info_gain_examples() {
        let perfect = info_gain(&[5.0, 5.0], &[vec![5.0, 0.0], vec![0.0, 5.0]]).unwrap();
        assert!((perfect - 1.0).abs() < 1e-12);
        let proportional = info_gain(&[5.0, 5.0], &[vec![3.0, 3.0], vec![2.0, 2.0]]).unwrap();
        assert!(proportional.abs() < 1e-12);
        assert!(info_gain(&[5.0, 5.0], &[vec![5.0, 0.0], vec![0.0, 4.0]]).is_err());
    }

    #[test]
    fn numeric_midpoint_threshold() {
        let ds = numeric_dataset(&[(1.0, 0), (2.0, 0), (10.0, 1)]);
        let cand = best_split(&ds, &all_items(&ds), 0, 1.0).unwrap().unwrap();
        assert_eq!(cand.test, SplitTest::NumericThreshold(6.0));
        // entropy(2, 1) = 0.918295834...
        assert!((cand.gain - 0.918_295_834_054_489_6).abs() < 1e-4);
        assert_eq!(cand.branch_weights, vec![2.0, 1.0]);
    }

    #[test]
    fn no_split_for_constant_or_pure() {
        let constant = numeric_dataset(&[(3.0, 0), (3.0, 1), (3.0, 0)]);
        assert_eq!(best_split(&constant, &all_items(&constant), 0, 1.0).unwrap(), None);
        let pure = numeric_dataset(&[(1.0, 0), (2.0, 0), (3.0, 0)]);
        assert_eq!(best_split(&pure, &all_items(&pure), 0, 1.0).unwrap(), None);
        assert!(best_split(&pure, &all_items(&pure), 3, 1.0).is_err());
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let ds = numeric_dataset(&[(1.0, 0), (2.0, 0), (10.0, 1)]);
        // The only gainful threshold leaves one instance on the right.
        let cand = best_split(&ds, &all_items(&ds), 0, 2.0).unwrap();
        assert_eq!(cand, None);
    }

    #[test]
    fn missing_values_spread_proportionally() {
        let schema = Arc::new(
            Schema::new(
                "r",
                vec![AttributeSpec::nominal("a", &["p", "q"])],
                AttributeSpec::nominal("class", &["good", "bad"]),
            )
            .unwrap(),
        );
        let ds = Dataset::new(
            schema,
            vec![
                Instance::new(vec![Value::Nominal(0)], Some(0)),
                Instance::new(vec![Value::Nominal(0)], Some(0)),
                Instance::new(vec![Value::Nominal(0)], Some(0)),
                Instance::new(vec![Value::Nominal(1)], Some(1)),
                Instance::new(vec![Value::Missing], Some(1)),
            ],
        )
        .unwrap();
        let cand = best_split(&ds, &all_items(&ds), 0, 1.0).unwrap().unwrap();
        assert_eq!(cand.branch_weights, vec![3.0, 1.0]);
        assert!((cand.children[0][1] - 0.75).abs() < 1e-12);
        assert!((cand.children[1][1] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn variance_reduction_perfect_split() {
        let parent = vec![(0.0, 1.0), (0.0, 1.0), (2.0, 1.0), (2.0, 1.0)];
        let children = vec![vec![(0.0, 1.0), (0.0, 1.0)], vec![(2.0, 1.0), (2.0, 1.0)]];
        assert!((variance_reduction(&parent, &children).unwrap() - 1.0).abs() < 1e-12);
    }
}
