//! Multiclass alternating decision tree grown by LogitBoost.
//!
//! The tree alternates prediction nodes, which hold one additive score per
//! class, and splitter nodes, which hold a binary attribute test. An
//! instance's score is the sum of the values of every prediction node it
//! reaches; at a splitter whose attribute is missing it follows both
//! branches. All classes share one splitter skeleton, so the per-class trees
//! are grown in lockstep and merged from the start.
//!
//! Each boosting iteration:
//!
//! 1. turns the current scores into softmax probabilities `p`,
//! 2. computes per-class working responses `z = (y - p) / (p (1 - p))` and
//!    weights `w = p (1 - p)`, with `p` clamped to `[1e-5, 1 - 1e-5]` and `z`
//!    to `[-4, 4]`,
//! 3. picks the (prediction node, test) pair whose per-branch weighted-mean
//!    fit of `z` leaves the smallest total weighted squared error,
//! 4. attaches it as a new splitter whose two prediction nodes hold the
//!    branch means, centered across classes and scaled by `(K - 1) / K`.

mod io;

use std::sync::Arc;

use crate::dataset::{Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};
use crate::reptree::argmax;

pub const DEFAULT_ITERATIONS: usize = 10;
const P_MIN: f64 = 1e-5;
const Z_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdtTest {
    /// True branch when the value is below the threshold.
    NumericThreshold(f64),
    /// True branch when the value equals the category.
    NominalEquals(usize),
}

impl AdtTest {
    /// `None` when the value is missing.
    pub fn evaluate(&self, value: Value) -> Option<bool> {
        match (self, value) {
            (AdtTest::NumericThreshold(t), Value::Numeric(x)) => Some(x < *t),
            (AdtTest::NominalEquals(c), Value::Nominal(v)) => Some(v == *c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionNode {
    pub values: Vec<f64>,
    /// Splitters hosted by this node, in insertion order.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitterNode {
    pub host: usize,
    pub attribute: usize,
    pub test: AdtTest,
    /// Prediction node reached when the test holds.
    pub yes: usize,
    pub no: usize,
}

/// A trained alternating decision tree. Prediction node 0 is the root;
/// splitter `i` owns prediction nodes `2i + 1` (test true) and `2i + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadTreeModel {
    nodes: Vec<PredictionNode>,
    splitters: Vec<SplitterNode>,
    schema: Arc<Schema>,
}

impl LadTreeModel {
    /// A model with only a root prediction node.
    pub fn with_root(schema: Arc<Schema>, root_values: Vec<f64>) -> Self {
        LadTreeModel {
            nodes: vec![PredictionNode {
                values: root_values,
                children: Vec::new(),
            }],
            splitters: Vec::new(),
            schema,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn prediction_nodes(&self) -> &[PredictionNode] {
        &self.nodes
    }

    pub fn splitters(&self) -> &[SplitterNode] {
        &self.splitters
    }

    pub fn iterations_run(&self) -> usize {
        self.splitters.len()
    }

    /// Attaches a splitter below `host` and returns its index.
    pub fn add_splitter(
        &mut self,
        host: usize,
        attribute: usize,
        test: AdtTest,
        yes_values: Vec<f64>,
        no_values: Vec<f64>,
    ) -> usize {
        let index = self.splitters.len();
        let yes = self.nodes.len();
        self.nodes.push(PredictionNode {
            values: yes_values,
            children: Vec::new(),
        });
        self.nodes.push(PredictionNode {
            values: no_values,
            children: Vec::new(),
        });
        self.splitters.push(SplitterNode {
            host,
            attribute,
            test,
            yes,
            no: yes + 1,
        });
        self.nodes[host].children.push(index);
        index
    }

    /// Sum of the values of every prediction node the instance reaches.
    /// Nodes are added in creation order, the same order in which training
    /// accumulates them, so training-time scores are reproduced exactly.
    pub fn score(&self, instance: &Instance) -> Vec<f64> {
        let mut reached = Vec::new();
        self.visit(0, instance, &mut |node| reached.push(node));
        reached.sort_unstable();
        let mut out = vec![0.0; self.schema.num_classes()];
        for node in reached {
            for (o, v) in out.iter_mut().zip(&self.nodes[node].values) {
                *o += v;
            }
        }
        out
    }

    /// Calls `f` with every prediction node the instance reaches, parents
    /// before children.
    fn visit(&self, node: usize, instance: &Instance, f: &mut impl FnMut(usize)) {
        f(node);
        for &s in &self.nodes[node].children {
            let sp = &self.splitters[s];
            match sp.test.evaluate(instance.value(sp.attribute)) {
                Some(true) => self.visit(sp.yes, instance, f),
                Some(false) => self.visit(sp.no, instance, f),
                None => {
                    self.visit(sp.yes, instance, f);
                    self.visit(sp.no, instance, f);
                }
            }
        }
    }

    pub fn predict_distribution(&self, instance: &Instance) -> Vec<f64> {
        probabilities_from_scores(&self.score(instance))
    }

    pub fn predict(&self, instance: &Instance) -> usize {
        argmax(&self.score(instance))
    }

    pub fn to_text(&self) -> String {
        io::write_model(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        io::read_model(text)
    }
}

/// Softmax of per-class scores, shifted by the maximum for stability.
pub fn probabilities_from_scores(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// LogitBoost working response and weight for a 0/1 class indicator `y` and
/// probability `p`.
pub fn working_response_and_weight(y: f64, p: f64) -> (f64, f64) {
    let p = p.clamp(P_MIN, 1.0 - P_MIN);
    let w = p * (1.0 - p);
    let z = ((y - p) / w).clamp(-Z_MAX, Z_MAX);
    (z, w)
}

/// Weighted mean of `(z, w)` pairs: the constant minimizing `sum w (z - c)^2`.
/// Zero for an empty or zero-weight subset.
pub fn least_squares_value(pairs: &[(f64, f64)]) -> f64 {
    let (swz, sw) = pairs.iter().fold((0.0, 0.0), |(a, b), (z, w)| (a + w * z, b + w));
    if sw > 0.0 {
        swz / sw
    } else {
        0.0
    }
}

/// Per-instance, per-class boosting quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostState {
    num_classes: usize,
    /// Current additive scores, row-major `[instance][class]`.
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
    pub responses: Vec<f64>,
    pub weights: Vec<f64>,
    /// Known-valued instance indices sorted by value, per numeric attribute.
    sorted: Vec<Vec<usize>>,
}

impl BoostState {
    /// Scores every instance of `dataset` with `model` and derives p, z, w.
    /// Instances must all carry a class label.
    pub fn new(model: &LadTreeModel, dataset: &Dataset) -> Result<Self> {
        if dataset.instances().iter().any(|i| i.class.is_none()) {
            return Err(Error::InvalidParameter(
                "boosting needs every instance to carry a class label".into(),
            ));
        }
        let k = dataset.num_classes();
        let n = dataset.len();
        let mut scores = Vec::with_capacity(n * k);
        for inst in dataset.instances() {
            scores.extend(model.score(inst));
        }
        let schema = dataset.schema();
        let sorted = (0..schema.num_attributes())
            .map(|a| {
                if !schema.attribute(a).is_numeric() {
                    return Vec::new();
                }
                let mut idx: Vec<(f64, usize)> = dataset
                    .instances()
                    .iter()
                    .enumerate()
                    .filter_map(|(i, inst)| match inst.value(a) {
                        Value::Numeric(x) => Some((x, i)),
                        _ => None,
                    })
                    .collect();
                idx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                idx.into_iter().map(|(_, i)| i).collect()
            })
            .collect();
        let mut state = BoostState {
            num_classes: k,
            scores,
            probs: vec![0.0; n * k],
            responses: vec![0.0; n * k],
            weights: vec![0.0; n * k],
            sorted,
        };
        state.refresh(dataset);
        Ok(state)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn scores_of(&self, instance: usize) -> &[f64] {
        &self.scores[instance * self.num_classes..(instance + 1) * self.num_classes]
    }

    /// Recomputes p, z, w from the current scores.
    fn refresh(&mut self, dataset: &Dataset) {
        let k = self.num_classes;
        for (i, inst) in dataset.instances().iter().enumerate() {
            let p = probabilities_from_scores(&self.scores[i * k..(i + 1) * k]);
            let actual = inst.class.expect("labeled");
            for (c, pc) in p.into_iter().enumerate() {
                let y = if c == actual { 1.0 } else { 0.0 };
                let (z, w) = working_response_and_weight(y, pc);
                self.probs[i * k + c] = pc;
                self.responses[i * k + c] = z;
                self.weights[i * k + c] = w;
            }
        }
    }

    /// Weighted mean multinomial log-loss of the current scores.
    pub fn log_loss(&self, dataset: &Dataset) -> f64 {
        let k = self.num_classes;
        let mut loss = 0.0;
        let mut total = 0.0;
        for (i, inst) in dataset.instances().iter().enumerate() {
            let s = &self.scores[i * k..(i + 1) * k];
            let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + s.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            let actual = inst.class.expect("labeled");
            loss += inst.weight * (lse - s[actual]);
            total += inst.weight;
        }
        if total > 0.0 {
            loss / total
        } else {
            0.0
        }
    }
}

/// The winning (prediction node, test) pair of one boosting iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitChoice {
    pub host: usize,
    pub attribute: usize,
    pub test: AdtTest,
    /// Per-class least-squares fit of `z` on the test-true branch.
    pub yes_fit: Vec<f64>,
    pub no_fit: Vec<f64>,
    /// Total weighted squared error over all training instances after the fit.
    pub score: f64,
}

/// Instance indices reaching each prediction node.
pub fn reach_lists(model: &LadTreeModel, dataset: &Dataset) -> Vec<Vec<usize>> {
    let mut reach = vec![Vec::new(); model.nodes.len()];
    for (i, inst) in dataset.instances().iter().enumerate() {
        model.visit(0, inst, &mut |node| reach[node].push(i));
    }
    reach
}

/// Per-class sums of instance-weighted `w` and `w z` over one branch.
#[derive(Clone)]
struct BranchSums {
    w: Vec<f64>,
    wz: Vec<f64>,
    count: usize,
}

impl BranchSums {
    fn new(k: usize) -> Self {
        BranchSums {
            w: vec![0.0; k],
            wz: vec![0.0; k],
            count: 0,
        }
    }

    fn add(&mut self, state: &BoostState, instance_weight: f64, i: usize) {
        let k = state.num_classes;
        for c in 0..k {
            let w = instance_weight * state.weights[i * k + c];
            self.w[c] += w;
            self.wz[c] += w * state.responses[i * k + c];
        }
        self.count += 1;
    }

    fn minus(&self, other: &BranchSums) -> BranchSums {
        BranchSums {
            w: self.w.iter().zip(&other.w).map(|(a, b)| a - b).collect(),
            wz: self.wz.iter().zip(&other.wz).map(|(a, b)| a - b).collect(),
            count: self.count - other.count,
        }
    }

    /// Drop in squared error from fitting the branch mean per class.
    fn reduction(&self) -> f64 {
        self.w
            .iter()
            .zip(&self.wz)
            .map(|(w, wz)| if *w > 0.0 { wz * wz / w } else { 0.0 })
            .sum()
    }

    fn fit(&self) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.wz)
            .map(|(w, wz)| if *w > 0.0 { wz / w } else { 0.0 })
            .collect()
    }
}

struct Best {
    host: usize,
    attribute: usize,
    test: AdtTest,
    yes: BranchSums,
    no: BranchSums,
    reduction: f64,
}

/// Strictly better than the incumbent, so earlier candidates win ties.
fn improves(best: &Option<Best>, reduction: f64) -> bool {
    best.as_ref().is_none_or(|b| reduction > b.reduction)
}

/// Exhaustive search over every prediction node as host and every binary
/// test: numeric midpoints between consecutive distinct values reaching the
/// host, and equality with each category. Minimizes the total weighted
/// squared error; ties keep the earliest candidate in (host, attribute,
/// threshold or category) order. `None` when no test splits the instances
/// reaching any host into two non-empty groups.
pub fn choose_splitter(model: &LadTreeModel, dataset: &Dataset, state: &BoostState) -> Option<SplitChoice> {
    let k = state.num_classes;
    let n = dataset.len();
    let reach = reach_lists(model, dataset);
    let schema = dataset.schema();

    let mut baseline = 0.0;
    for (i, inst) in dataset.instances().iter().enumerate() {
        for c in 0..k {
            let z = state.responses[i * k + c];
            baseline += inst.weight * state.weights[i * k + c] * z * z;
        }
    }

    let mut best: Option<Best> = None;
    let mut in_host = vec![false; n];
    for (host, members) in reach.iter().enumerate() {
        in_host.iter_mut().for_each(|f| *f = false);
        for &i in members {
            in_host[i] = true;
        }
        for attribute in 0..schema.num_attributes() {
            let attr = schema.attribute(attribute);
            match attr.categories() {
                None => {
                    let order: Vec<usize> = state.sorted[attribute]
                        .iter()
                        .copied()
                        .filter(|&i| in_host[i])
                        .collect();
                    let mut total = BranchSums::new(k);
                    for &i in &order {
                        total.add(state, dataset.instance(i).weight, i);
                    }
                    let value = |i: usize| match dataset.instance(i).value(attribute) {
                        Value::Numeric(x) => x,
                        _ => unreachable!(),
                    };
                    let mut below = BranchSums::new(k);
                    for pos in 0..order.len().saturating_sub(1) {
                        let i = order[pos];
                        below.add(state, dataset.instance(i).weight, i);
                        let (v, next) = (value(i), value(order[pos + 1]));
                        if v >= next {
                            continue;
                        }
                        let above = total.minus(&below);
                        let reduction = below.reduction() + above.reduction();
                        if !improves(&best, reduction) {
                            continue;
                        }
                        let mut threshold = (v + next) / 2.0;
                        if threshold <= v {
                            threshold = next;
                        }
                        best = Some(Best {
                            host,
                            attribute,
                            test: AdtTest::NumericThreshold(threshold),
                            yes: below.clone(),
                            no: above,
                            reduction,
                        });
                    }
                }
                Some(cats) => {
                    let mut per_cat = vec![BranchSums::new(k); cats.len()];
                    let mut total = BranchSums::new(k);
                    for &i in members {
                        let inst = dataset.instance(i);
                        if let Value::Nominal(v) = inst.value(attribute) {
                            per_cat[v].add(state, inst.weight, i);
                            total.add(state, inst.weight, i);
                        }
                    }
                    for (category, yes) in per_cat.into_iter().enumerate() {
                        if yes.count == 0 || yes.count == total.count {
                            continue;
                        }
                        let no = total.minus(&yes);
                        let reduction = yes.reduction() + no.reduction();
                        if !improves(&best, reduction) {
                            continue;
                        }
                        best = Some(Best {
                            host,
                            attribute,
                            test: AdtTest::NominalEquals(category),
                            yes,
                            no,
                            reduction,
                        });
                    }
                }
            }
        }
    }

    best.map(|b| SplitChoice {
        host: b.host,
        attribute: b.attribute,
        test: b.test,
        yes_fit: b.yes.fit(),
        no_fit: b.no.fit(),
        score: baseline - b.reduction,
    })
}

/// Centers per-class fitted values across classes and scales by (K-1)/K.
pub fn centered_update(fit: &[f64]) -> Vec<f64> {
    let k = fit.len() as f64;
    let mean = fit.iter().sum::<f64>() / k;
    fit.iter().map(|f| (k - 1.0) / k * (f - mean)).collect()
}

/// Runs one LogitBoost iteration: picks a splitter, attaches it, and updates
/// the scores of the instances below it. Returns `false` (leaving model and
/// state untouched) when no legal splitter exists.
pub fn boost_iteration(model: &mut LadTreeModel, dataset: &Dataset, state: &mut BoostState) -> bool {
    let Some(choice) = choose_splitter(model, dataset, state) else {
        return false;
    };
    let yes_values = centered_update(&choice.yes_fit);
    let no_values = centered_update(&choice.no_fit);
    let k = state.num_classes;
    let host_members = reach_lists(model, dataset).swap_remove(choice.host);
    for i in host_members {
        let outcome = choice.test.evaluate(dataset.instance(i).value(choice.attribute));
        let row = &mut state.scores[i * k..(i + 1) * k];
        if outcome != Some(false) {
            row.iter_mut().zip(&yes_values).for_each(|(s, v)| *s += v);
        }
        if outcome != Some(true) {
            row.iter_mut().zip(&no_values).for_each(|(s, v)| *s += v);
        }
    }
    model.add_splitter(choice.host, choice.attribute, choice.test, yes_values, no_values);
    state.refresh(dataset);
    true
}

/// Root values from class priors: centered log priors, each prior clamped to
/// at least 1e-5, so the softmax of the root reproduces the class priors.
pub fn prior_scores(class_counts: &[f64]) -> Vec<f64> {
    let total: f64 = class_counts.iter().sum();
    let logs: Vec<f64> = class_counts
        .iter()
        .map(|c| {
            let p = if total > 0.0 { c / total } else { 0.0 };
            p.max(P_MIN).ln()
        })
        .collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    logs.into_iter().map(|l| l - mean).collect()
}

/// Drives boosting one iteration at a time; exposes the state for
/// inspection between steps.
pub struct LadTrainer {
    data: Dataset,
    model: LadTreeModel,
    state: BoostState,
}

impl LadTrainer {
    pub fn new(train: &Dataset) -> Result<Self> {
        let data = train.labeled();
        if data.is_empty() {
            return Err(Error::InsufficientData("no labeled training instances".into()));
        }
        let model = LadTreeModel::with_root(data.shared_schema(), prior_scores(&data.class_counts()));
        let state = BoostState::new(&model, &data)?;
        Ok(LadTrainer { data, model, state })
    }

    /// One boosting iteration; `false` once growth has stopped.
    pub fn step(&mut self) -> bool {
        boost_iteration(&mut self.model, &self.data, &mut self.state)
    }

    pub fn model(&self) -> &LadTreeModel {
        &self.model
    }

    pub fn state(&self) -> &BoostState {
        &self.state
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn log_loss(&self) -> f64 {
        self.state.log_loss(&self.data)
    }

    pub fn into_model(self) -> LadTreeModel {
        self.model
    }
}

/// Trains an alternating decision tree with up to `iterations` splitters.
pub fn train_ladtree(train: &Dataset, iterations: usize) -> Result<LadTreeModel> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    let mut trainer = LadTrainer::new(train)?;
    for _ in 0..iterations {
        if !trainer.step() {
            break;
        }
    }
    Ok(trainer.into_model())
}
