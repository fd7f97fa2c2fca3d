use std::sync::Arc;

use super::*;
use crate::dataset::{AttributeSpec, Schema};

fn binary_schema(names: &[&str]) -> Arc<Schema> {
    Arc::new(
        Schema::new(
            "t",
            names.iter().map(|n| AttributeSpec::nominal(*n, &["0", "1"])).collect(),
            AttributeSpec::nominal("class", &["good", "bad"]),
        )
        .unwrap(),
    )
}

fn binary_rows(schema: &Arc<Schema>, rows: &[(&[usize], usize)]) -> Dataset {
    let instances = rows
        .iter()
        .map(|(vals, c)| Instance::new(vals.iter().map(|v| Value::Nominal(*v)).collect(), Some(*c)))
        .collect();
    Dataset::new(Arc::clone(schema), instances).unwrap()
}

fn loose() -> GrowParams {
    GrowParams {
        min_instances_per_leaf: 1.0,
        do_prune: false,
        ..GrowParams::default()
    }
}

#[test]
fn xor_grows_two_levels_with_zero_gain_root() {
    let schema = binary_schema(&["a", "b"]);
    let ds = binary_rows(&schema, &[(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 0)]);
    let root = grow_tree(&ds, &loose()).unwrap();
    assert_eq!(root.depth(), 2);
    assert_eq!(root.num_leaves(), 4);
    match &root {
        RepNode::Internal {
            attribute, children, ..
        } => {
            assert_eq!(*attribute, 0);
            for child in children {
                assert!(matches!(child, RepNode::Internal { attribute: 1, .. }));
            }
        }
        RepNode::Leaf { .. } => panic!("expected a split"),
    }
    for leaf_dist in leaves(&root) {
        assert_eq!(leaf_dist.iter().filter(|w| **w > 0.0).count(), 1);
    }
}

fn leaves(node: &RepNode) -> Vec<Vec<f64>> {
    match node {
        RepNode::Leaf { distribution } => vec![distribution.clone()],
        RepNode::Internal { children, .. } => children.iter().flat_map(leaves).collect(),
    }
}

#[test]
fn perfect_predictor_gives_depth_one() {
    let schema = binary_schema(&["noise", "signal"]);
    let ds = binary_rows(
        &schema,
        &[
            (&[0, 0], 0),
            (&[1, 0], 0),
            (&[0, 0], 0),
            (&[1, 1], 1),
            (&[0, 1], 1),
            (&[1, 1], 1),
        ],
    );
    let model = train_reptree(&ds, &loose()).unwrap();
    assert_eq!(model.root().depth(), 1);
    for inst in ds.instances() {
        assert_eq!(model.predict(inst), inst.class.unwrap());
    }
}

#[test]
fn single_instance_is_a_leaf() {
    let schema = binary_schema(&["a"]);
    let ds = binary_rows(&schema, &[(&[1], 1)]);
    let root = grow_tree(&ds, &loose()).unwrap();
    assert_eq!(
        root,
        RepNode::Leaf {
            distribution: vec![0.0, 1.0]
        }
    );
    // Too small to hold out a prune set: falls back to an unpruned tree.
    let model = train_reptree(&ds, &GrowParams::default()).unwrap();
    assert_eq!(model.predict(&ds.instances()[0]), 1);
}

#[test]
fn grow_rejects_empty_and_bad_params() {
    let schema = binary_schema(&["a"]);
    let empty = Dataset::empty(Arc::clone(&schema));
    assert!(grow_tree(&empty, &loose()).is_err());
    let bad = GrowParams {
        min_instances_per_leaf: 0.0,
        ..GrowParams::default()
    };
    let ds = binary_rows(&schema, &[(&[1], 1)]);
    assert!(matches!(train_reptree(&ds, &bad), Err(Error::InvalidParameter(_))));
}

fn stump(left: Vec<f64>, right: Vec<f64>, parent: Vec<f64>) -> RepNode {
    RepNode::Internal {
        attribute: 0,
        test: SplitTest::NominalMultiway,
        branch_weights: vec![left.iter().sum(), right.iter().sum()],
        children: vec![
            RepNode::Leaf { distribution: left },
            RepNode::Leaf { distribution: right },
        ],
        distribution: parent,
    }
}

#[test]
fn prune_collapses_when_children_agree_with_parent() {
    let schema = binary_schema(&["a"]);
    let root = stump(vec![5.0, 1.0], vec![3.0, 2.0], vec![8.0, 3.0]);
    let prune = binary_rows(&schema, &[(&[0], 0), (&[1], 1), (&[1], 0)]);
    let pruned = prune_tree(root, &prune);
    assert_eq!(
        pruned,
        RepNode::Leaf {
            distribution: vec![8.0, 3.0]
        }
    );
}

#[test]
fn prune_keeps_useful_split_and_collapses_on_empty_holdout() {
    let schema = binary_schema(&["a"]);
    let root = stump(vec![5.0, 1.0], vec![1.0, 5.0], vec![6.0, 6.0]);
    let prune = binary_rows(&schema, &[(&[0], 0), (&[1], 1), (&[1], 1)]);
    assert!(!prune_tree(root.clone(), &prune).is_leaf());
    // No hold-out weight reaches the node: 0 <= 0 collapses it.
    let empty = Dataset::empty(schema);
    assert!(prune_tree(root, &empty).is_leaf());
}

#[test]
fn backfit_routes_superset_and_is_idempotent_on_grow_set() {
    let schema = binary_schema(&["a", "b"]);
    let grow = binary_rows(
        &schema,
        &[(&[0, 0], 0), (&[0, 1], 0), (&[1, 0], 1), (&[1, 1], 1), (&[0, 0], 1)],
    );
    let tree = grow_tree(&grow, &loose()).unwrap();
    let same = backfit(tree.clone(), &grow);
    assert_eq!(leaves(&same), leaves(&tree));

    let mut rows: Vec<(&[usize], usize)> = vec![(&[0, 0], 0), (&[0, 1], 0), (&[1, 0], 1), (&[1, 1], 1), (&[0, 0], 1)];
    rows.extend([(&[1usize, 1usize][..], 0usize), (&[0, 1][..], 1)]);
    let full = binary_rows(&schema, &rows);
    let refit = backfit(tree.clone(), &full);
    assert_eq!(refit.num_nodes(), tree.num_nodes());
    for (before, after) in leaves(&tree).iter().zip(leaves(&refit)) {
        assert!(after.iter().sum::<f64>() >= before.iter().sum::<f64>());
    }
    assert_eq!(refit.distribution().iter().sum::<f64>(), 7.0);
}

#[test]
fn laplace_leaf_probabilities() {
    let schema = binary_schema(&["a"]);
    let model = RepTreeModel::new(
        RepNode::Leaf {
            distribution: vec![649.0, 149.0],
        },
        Arc::clone(&schema),
        GrowParams::default(),
    );
    let p = model.predict_distribution(&Instance::new(vec![Value::Nominal(0)], None));
    assert!((p[0] - 0.8125).abs() < 1e-12);
    assert!((p[1] - 0.1875).abs() < 1e-12);
}

#[test]
fn missing_root_value_blends_by_branch_weight() {
    let schema = binary_schema(&["a"]);
    let root = RepNode::Internal {
        attribute: 0,
        test: SplitTest::NominalMultiway,
        branch_weights: vec![900.0, 100.0],
        children: vec![
            RepNode::Leaf {
                distribution: vec![898.0, 0.0],
            },
            RepNode::Leaf {
                distribution: vec![0.0, 98.0],
            },
        ],
        distribution: vec![898.0, 98.0],
    };
    let model = RepTreeModel::new(root, schema, GrowParams::default());
    let p = model.predict_distribution(&Instance::new(vec![Value::Missing], None));
    // children smooth to (0.999, 0.001) and (0.01, 0.99)
    let expected0 = 0.9 * (899.0 / 900.0) + 0.1 * (1.0 / 100.0);
    assert!((p[0] - expected0).abs() < 1e-12);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn unpruned_tree_shatters_unique_numeric_attribute() {
    let schema = Arc::new(
        Schema::new(
            "t",
            vec![AttributeSpec::numeric("id")],
            AttributeSpec::nominal("class", &["good", "bad"]),
        )
        .unwrap(),
    );
    let classes = [0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 0, 1];
    let instances = classes
        .iter()
        .enumerate()
        .map(|(i, c)| Instance::new(vec![Value::Numeric(i as f64 * 1.5)], Some(*c)))
        .collect();
    let ds = Dataset::new(schema, instances).unwrap();
    let model = train_reptree(&ds, &loose()).unwrap();
    for inst in ds.instances() {
        assert_eq!(model.predict(inst), inst.class.unwrap());
    }
}

#[test]
fn depth_limit_is_respected() {
    let schema = binary_schema(&["a", "b"]);
    let ds = binary_rows(&schema, &[(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 0)]);
    let params = GrowParams {
        max_depth: Some(1),
        ..loose()
    };
    assert_eq!(grow_tree(&ds, &params).unwrap().depth(), 1);
}

#[test]
fn text_format_round_trips() {
    let schema = Arc::new(
        Schema::new(
            "mixed",
            vec![
                AttributeSpec::numeric("x"),
                AttributeSpec::nominal("c", &["p", "q", "r s"]),
            ],
            AttributeSpec::nominal("class", &["good", "bad"]),
        )
        .unwrap(),
    );
    let rows = [
        (0.1, 0, 0),
        (0.7, 1, 1),
        (1.3, 2, 1),
        (2.2, 0, 0),
        (3.1, 1, 0),
        (0.4, 2, 1),
        (5.5, 0, 1),
        (2.9, 1, 0),
    ];
    let instances = rows
        .iter()
        .map(|&(x, c, y)| Instance::new(vec![Value::Numeric(x), Value::Nominal(c)], Some(y)))
        .collect();
    let ds = Dataset::new(schema, instances).unwrap();
    let model = train_reptree(&ds, &loose()).unwrap();
    let text = model.to_text();
    let back = RepTreeModel::from_text(&text).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_text(), text);

    let broken = text.replace("@model", "@mode");
    assert!(matches!(RepTreeModel::from_text(&broken), Err(Error::Model { .. })));
}
