//! Shared fixtures and brute-force oracles for the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use credtree::dataset::{parse_arff, split_grow_prune, AttributeSpec, Dataset, Instance, Schema, Value};
use credtree::ladtree::{choose_splitter, AdtTest, LadTrainer, LadTreeModel};
use credtree::reptree::{entropy, grow_tree, info_gain, prune_set_error, prune_tree, GrowParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn german() -> Dataset {
    let text = std::fs::read_to_string(data_path("credit-g.arff")).expect("credit-g.arff present");
    parse_arff(&text).expect("credit-g.arff parses")
}

/// A small random dataset mixing numeric attributes (small integer ranges,
/// so ties are common) and nominal ones, with a few missing values. The
/// class depends loosely on the first attribute.
pub fn random_dataset(rng: &mut ChaCha8Rng, max_rows: usize, max_attrs: usize) -> Dataset {
    let num_classes = rng.gen_range(2..=3);
    let num_attrs = rng.gen_range(1..=max_attrs);
    let mut attrs = Vec::new();
    for a in 0..num_attrs {
        if rng.gen_bool(0.5) {
            attrs.push(AttributeSpec::numeric(format!("n{a}")));
        } else {
            let cats: Vec<String> = (0..rng.gen_range(2..=4)).map(|c| format!("c{c}")).collect();
            attrs.push(AttributeSpec::nominal(format!("s{a}"), &cats));
        }
    }
    let class_names: Vec<String> = (0..num_classes).map(|c| format!("k{c}")).collect();
    let schema = Arc::new(Schema::new("random", attrs, AttributeSpec::nominal("class", &class_names)).unwrap());

    let rows = rng.gen_range(4..=max_rows);
    let mut instances = Vec::with_capacity(rows);
    for _ in 0..rows {
        let values: Vec<Value> = schema
            .attributes()
            .iter()
            .map(|spec| {
                if rng.gen_bool(0.05) {
                    Value::Missing
                } else if spec.is_numeric() {
                    Value::Numeric(rng.gen_range(0..8) as f64 * 0.5)
                } else {
                    Value::Nominal(rng.gen_range(0..spec.num_categories()))
                }
            })
            .collect();
        let signal = match values[0] {
            Value::Numeric(x) => (x * 2.0) as usize,
            Value::Nominal(c) => c,
            Value::Missing => 0,
        };
        let class = if rng.gen_bool(0.7) {
            signal % num_classes
        } else {
            rng.gen_range(0..num_classes)
        };
        instances.push(Instance::new(values, Some(class)));
    }
    Dataset::new(schema, instances).unwrap()
}

pub mod oracle {
    use super::*;

    /// Entropy in bits via `log2(T) - sum(w log2 w) / T`.
    pub fn entropy_bits(weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        let weighted_logs: f64 = weights.iter().filter(|w| **w > 0.0).map(|w| w * w.ln()).sum();
        ((total.ln() - weighted_logs / total) / std::f64::consts::LN_2).max(0.0)
    }

    pub fn info_gain_bits(parent: &[f64], children: &[Vec<f64>]) -> f64 {
        let total: f64 = parent.iter().sum();
        let mut remainder = 0.0;
        for child in children {
            let t: f64 = child.iter().sum();
            if t > 0.0 {
                remainder += t / total * entropy_bits(child);
            }
        }
        entropy_bits(parent) - remainder
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct BruteChoice {
        pub host: usize,
        pub attribute: usize,
        pub test: AdtTest,
        pub sse: f64,
    }

    fn passes(test: AdtTest, value: Value) -> Option<bool> {
        match (test, value) {
            (AdtTest::NumericThreshold(t), Value::Numeric(x)) => Some(x < t),
            (AdtTest::NominalEquals(c), Value::Nominal(v)) => Some(v == c),
            _ => None,
        }
    }

    /// Prediction nodes reached by each instance, found by walking the
    /// splitter list in creation order.
    fn reached(model: &LadTreeModel, instance: &Instance) -> Vec<bool> {
        let mut hit = vec![false; model.prediction_nodes().len()];
        hit[0] = true;
        for (i, s) in model.splitters().iter().enumerate() {
            if !hit[s.host] {
                continue;
            }
            match passes(s.test, instance.value(s.attribute)) {
                Some(true) => hit[2 * i + 1] = true,
                Some(false) => hit[2 * i + 2] = true,
                None => {
                    hit[2 * i + 1] = true;
                    hit[2 * i + 2] = true;
                }
            }
        }
        hit
    }

    fn softmax(scores: &[f64]) -> Vec<f64> {
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let t: f64 = e.iter().sum();
        e.iter().map(|x| x / t).collect()
    }

    /// Earliest candidate with the smallest error.
    pub fn brute_force_splitter(model: &LadTreeModel, data: &Dataset) -> Option<BruteChoice> {
        let mut best: Option<BruteChoice> = None;
        for c in brute_force_candidates(model, data) {
            if best.as_ref().is_none_or(|b| c.sse < b.sse) {
                best = Some(c);
            }
        }
        best
    }

    /// Every legal (host, test) pair in (host, attribute, threshold or
    /// category) order, with its total weighted squared error computed from
    /// scratch. Instances outside the branch being fitted keep a fitted
    /// value of zero.
    #[allow(clippy::needless_range_loop)]
    pub fn brute_force_candidates(model: &LadTreeModel, data: &Dataset) -> Vec<BruteChoice> {
        let k = data.num_classes();
        let n = data.len();
        let mut z = vec![vec![0.0; k]; n];
        let mut w = vec![vec![0.0; k]; n];
        for (i, inst) in data.instances().iter().enumerate() {
            let p = softmax(&model.score(inst));
            for c in 0..k {
                let y = if inst.class == Some(c) { 1.0 } else { 0.0 };
                let pc = p[c].clamp(1e-5, 1.0 - 1e-5);
                w[i][c] = pc * (1.0 - pc);
                z[i][c] = ((y - pc) / w[i][c]).clamp(-4.0, 4.0);
            }
        }
        let reach: Vec<Vec<bool>> = data.instances().iter().map(|inst| reached(model, inst)).collect();

        let mut out = Vec::new();
        for host in 0..model.prediction_nodes().len() {
            for attribute in 0..data.schema().num_attributes() {
                let spec = data.schema().attribute(attribute);
                let tests: Vec<AdtTest> = if spec.is_numeric() {
                    let mut vals: Vec<f64> = (0..n)
                        .filter(|&i| reach[i][host])
                        .filter_map(|i| match data.instance(i).value(attribute) {
                            Value::Numeric(x) => Some(x),
                            _ => None,
                        })
                        .collect();
                    vals.sort_by(f64::total_cmp);
                    vals.dedup();
                    vals.windows(2)
                        .map(|p| AdtTest::NumericThreshold((p[0] + p[1]) / 2.0))
                        .collect()
                } else {
                    (0..spec.num_categories()).map(AdtTest::NominalEquals).collect()
                };
                for test in tests {
                    let side: Vec<Option<bool>> = (0..n)
                        .map(|i| {
                            if reach[i][host] {
                                passes(test, data.instance(i).value(attribute))
                            } else {
                                None
                            }
                        })
                        .collect();
                    let yes = side.iter().filter(|s| **s == Some(true)).count();
                    let no = side.iter().filter(|s| **s == Some(false)).count();
                    if yes == 0 || no == 0 {
                        continue;
                    }
                    let mut sse = 0.0;
                    for c in 0..k {
                        let fit = |branch: bool| {
                            let (mut num, mut den) = (0.0, 0.0);
                            for i in 0..n {
                                if side[i] == Some(branch) {
                                    let wt = data.instance(i).weight * w[i][c];
                                    num += wt * z[i][c];
                                    den += wt;
                                }
                            }
                            if den > 0.0 {
                                num / den
                            } else {
                                0.0
                            }
                        };
                        let (fy, fn_) = (fit(true), fit(false));
                        for i in 0..n {
                            let f = match side[i] {
                                Some(true) => fy,
                                Some(false) => fn_,
                                None => 0.0,
                            };
                            sse += data.instance(i).weight * w[i][c] * (z[i][c] - f).powi(2);
                        }
                    }
                    out.push(BruteChoice {
                        host,
                        attribute,
                        test,
                        sse,
                    });
                }
            }
        }
        out
    }
}

/// Outcome of one property suite: a short detail line either way.
pub type Check = Result<String, String>;

/// Entropy and information gain against the oracle on random weight
/// vectors and partitions.
pub fn check_entropy_oracle(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let k = rng.gen_range(2..=4);
        let arity = rng.gen_range(2..=4);
        let children: Vec<Vec<f64>> = (0..arity)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            0.0
                        } else {
                            rng.gen_range(0.0..50.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut parent = vec![0.0; k];
        for child in &children {
            for (p, c) in parent.iter_mut().zip(child) {
                *p += c;
            }
        }
        if parent.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        let h = entropy(&parent).map_err(|e| format!("case {case}: {e}"))?;
        let g = info_gain(&parent, &children).map_err(|e| format!("case {case}: {e}"))?;
        let dh = (h - oracle::entropy_bits(&parent)).abs();
        let dg = (g - oracle::info_gain_bits(&parent, &children)).abs();
        worst = worst.max(dh).max(dg);
        if dh > 1e-9 || dg > 1e-9 {
            return Err(format!("case {case}: entropy off by {dh:e}, gain off by {dg:e}"));
        }
    }
    Ok(format!("{cases} cases, max deviation {worst:.1e}"))
}

/// Reduced-error pruning never raises the prune-set error.
pub fn check_pruning(datasets: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = GrowParams {
        min_instances_per_leaf: 1.0,
        ..GrowParams::default()
    };
    let mut collapsed = 0;
    for d in 0..datasets {
        let data = random_dataset(&mut rng, 60, 4);
        let (grow, prune) = split_grow_prune(&data, 3, d as u64).map_err(|e| format!("dataset {d}: {e}"))?;
        let tree = grow_tree(&grow, &params).map_err(|e| format!("dataset {d}: {e}"))?;
        let before = prune_set_error(&tree, &prune);
        let nodes = tree.num_nodes();
        let pruned = prune_tree(tree, &prune);
        let after = prune_set_error(&pruned, &prune);
        if pruned.num_nodes() < nodes {
            collapsed += 1;
        }
        if after > before + 1e-9 {
            return Err(format!("dataset {d}: prune-set error rose from {before} to {after}"));
        }
    }
    Ok(format!("{datasets} datasets, {collapsed} trees shrank"))
}

/// Log-loss after each of `iterations` boosting steps, starting with the
/// root-only model.
pub fn logloss_trace(data: &Dataset, iterations: usize) -> Vec<f64> {
    let mut trainer = LadTrainer::new(data).unwrap();
    let mut trace = vec![trainer.log_loss()];
    for _ in 0..iterations {
        if !trainer.step() {
            break;
        }
        trace.push(trainer.log_loss());
    }
    trace
}

pub fn non_increasing(trace: &[f64]) -> Result<(), String> {
    for (i, pair) in trace.windows(2).enumerate() {
        if pair[1] > pair[0] + 1e-12 {
            return Err(format!(
                "iteration {}: log-loss rose from {} to {}",
                i + 1,
                pair[0],
                pair[1]
            ));
        }
    }
    Ok(())
}

pub fn check_logloss_random(datasets: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for d in 0..datasets {
        let data = random_dataset(&mut rng, 50, 4);
        if let Err(e) = non_increasing(&logloss_trace(&data, 10)) {
            failures.push(format!("dataset {d}: {e}"));
        }
    }
    match failures.first() {
        None => Ok(format!("{datasets} datasets x 10 iterations")),
        Some(first) => Err(format!("{} of {datasets} datasets; first {first}", failures.len())),
    }
}

/// Replays boosting on random datasets and compares every splitter choice
/// with the exhaustive scan. A differing pick is accepted only when the
/// oracle scores it within 1e-9 (relative) of the oracle's own winner.
pub fn check_splitter_oracle(datasets: usize, iterations: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut steps, mut near_ties) = (0, 0);
    for d in 0..datasets {
        let data = random_dataset(&mut rng, 50, 4);
        let mut trainer = LadTrainer::new(&data).unwrap();
        for it in 0..iterations {
            let mine = choose_splitter(trainer.model(), trainer.data(), trainer.state());
            let candidates = oracle::brute_force_candidates(trainer.model(), trainer.data());
            let theirs = oracle::brute_force_splitter(trainer.model(), trainer.data());
            let at = format!("dataset {d} iteration {it}");
            match (&mine, &theirs) {
                (None, None) => break,
                (Some(m), Some(t)) => {
                    let tol = 1e-9 * t.sse.abs().max(1.0);
                    if (m.score - t.sse).abs() > tol {
                        return Err(format!("{at}: score {} vs oracle {}", m.score, t.sse));
                    }
                    if (m.host, m.attribute, m.test) != (t.host, t.attribute, t.test) {
                        let own = candidates
                            .iter()
                            .find(|c| (c.host, c.attribute, c.test) == (m.host, m.attribute, m.test))
                            .ok_or_else(|| format!("{at}: picked a candidate the oracle never saw"))?;
                        if (own.sse - t.sse).abs() > tol {
                            return Err(format!("{at}: picked {m:?}, oracle {t:?}"));
                        }
                        near_ties += 1;
                    }
                }
                _ => return Err(format!("{at}: stop disagreement {mine:?} vs {theirs:?}")),
            }
            steps += 1;
            trainer.step();
        }
    }
    Ok(format!(
        "{datasets} datasets, {steps} choices, {near_ties} float-level ties"
    ))
}
