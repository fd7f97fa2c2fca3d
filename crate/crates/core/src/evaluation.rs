//! Training-set and stratified k-fold evaluation, build timing, and
//! side-by-side comparison of classifiers.

use std::fmt;
use std::time::Instant;

use crate::dataset::{stratified_folds, Dataset, FoldPlan, Instance, Schema};
use crate::error::{Error, Result};
use crate::ladtree::{self, LadTreeModel};
use crate::metrics::{EvalSummary, Prediction};
use crate::model_kind;
use crate::reptree::{self, GrowParams, RepTreeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMode {
    TrainingSet,
    CrossValidation { k: usize, seed: u64 },
}

impl TestMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestMode::CrossValidation { k, .. } if *k < 2 => Err(Error::InvalidParameter(format!(
                "cross-validation needs at least 2 folds, got {k}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_cross_validation(&self) -> bool {
        matches!(self, TestMode::CrossValidation { .. })
    }
}

impl fmt::Display for TestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestMode::TrainingSet => f.write_str("Training Set"),
            TestMode::CrossValidation { k, .. } => write!(f, "{k} Fold CV"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    RepTree(GrowParams),
    /// Training is deterministic; `seed` is carried for reporting only.
    LadTree {
        iterations: usize,
        seed: u64,
    },
}

impl ClassifierSpec {
    pub fn reptree() -> Self {
        ClassifierSpec::RepTree(GrowParams::default())
    }

    pub fn ladtree() -> Self {
        ClassifierSpec::LadTree {
            iterations: ladtree::DEFAULT_ITERATIONS,
            seed: 1,
        }
    }

    /// The same classifier with its random seed replaced: the grow/prune
    /// split seed for REP trees, the reported seed for LAD trees.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            ClassifierSpec::RepTree(p) => ClassifierSpec::RepTree(GrowParams { seed, ..p.clone() }),
            ClassifierSpec::LadTree { iterations, .. } => ClassifierSpec::LadTree {
                iterations: *iterations,
                seed,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::RepTree(_) => "reptree",
            ClassifierSpec::LadTree { .. } => "ladtree",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::RepTree(params) => params.validate(),
            ClassifierSpec::LadTree { iterations: 0, .. } => {
                Err(Error::InvalidParameter("iterations must be at least 1".into()))
            }
            ClassifierSpec::LadTree { .. } => Ok(()),
        }
    }

    pub fn train(&self, dataset: &Dataset) -> Result<Model> {
        match self {
            ClassifierSpec::RepTree(params) => reptree::train_reptree(dataset, params).map(Model::RepTree),
            ClassifierSpec::LadTree { iterations, .. } => {
                ladtree::train_ladtree(dataset, *iterations).map(Model::LadTree)
            }
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::RepTree(p) => {
                write!(f, "reptree (min leaf {}, ", p.min_instances_per_leaf)?;
                if p.do_prune {
                    write!(f, "{} prune folds, seed {})", p.prune_folds, p.seed)
                } else {
                    f.write_str("unpruned)")
                }
            }
            ClassifierSpec::LadTree { iterations, .. } => write!(f, "ladtree ({iterations} iterations)"),
        }
    }
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    RepTree(RepTreeModel),
    LadTree(LadTreeModel),
}

impl Model {
    pub fn schema(&self) -> &Schema {
        match self {
            Model::RepTree(m) => m.schema(),
            Model::LadTree(m) => m.schema(),
        }
    }

    pub fn predict_distribution(&self, instance: &Instance) -> Vec<f64> {
        match self {
            Model::RepTree(m) => m.predict_distribution(instance),
            Model::LadTree(m) => m.predict_distribution(instance),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Model::RepTree(m) => m.to_text(),
            Model::LadTree(m) => m.to_text(),
        }
    }

    /// Reads either model format, dispatching on the kind in the header.
    pub fn from_text(text: &str) -> Result<Self> {
        match model_kind(text) {
            Some("reptree") => RepTreeModel::from_text(text).map(Model::RepTree),
            Some("ladtree") => LadTreeModel::from_text(text).map(Model::LadTree),
            Some(other) => Err(Error::model(1, format!("unknown model kind '{other}'"))),
            None => Err(Error::model(1, "not a credtree model file")),
        }
    }
}

/// Trains `spec` on `dataset`, returning the model and the wall-clock
/// training time in seconds.
pub fn train_timed(spec: &ClassifierSpec, dataset: &Dataset) -> Result<(Model, f64)> {
    spec.validate()?;
    let start = Instant::now();
    let model = spec.train(dataset)?;
    Ok((model, start.elapsed().as_secs_f64()))
}

/// Wall-clock seconds spent training, excluding prediction.
pub fn measure_build_time(spec: &ClassifierSpec, dataset: &Dataset) -> Result<f64> {
    train_timed(spec, dataset).map(|(_, secs)| secs)
}

fn predictions_for<'a>(model: &Model, instances: impl Iterator<Item = &'a Instance>) -> Vec<Prediction> {
    instances
        .filter_map(|inst| inst.class.map(|c| Prediction::new(model.predict_distribution(inst), c)))
        .collect()
}

pub fn evaluate_training_set(spec: &ClassifierSpec, dataset: &Dataset) -> Result<EvalSummary> {
    let labeled = dataset.labeled();
    if labeled.is_empty() {
        return Err(Error::InsufficientData("no labeled instances to evaluate".into()));
    }
    let (model, secs) = train_timed(spec, &labeled)?;
    let predictions = predictions_for(&model, labeled.instances().iter());
    EvalSummary::from_predictions(&predictions, labeled.schema().class_names(), secs)
}

pub fn cross_validate(spec: &ClassifierSpec, dataset: &Dataset, k: usize, seed: u64) -> Result<EvalSummary> {
    TestMode::CrossValidation { k, seed }.validate()?;
    let labeled = dataset.labeled();
    let plan = stratified_folds(&labeled, k, seed)?;
    cross_validate_with_plan(spec, &labeled, &plan)
}

/// Cross-validation over precomputed folds of `dataset`. Predictions from all
/// folds are pooled into one summary; build time is the sum over folds.
pub fn cross_validate_with_plan(spec: &ClassifierSpec, dataset: &Dataset, plan: &FoldPlan) -> Result<EvalSummary> {
    spec.validate()?;
    let mut predictions = Vec::with_capacity(dataset.len());
    let mut build_time = 0.0;
    for fold in 0..plan.k() {
        let train = dataset.subset(&plan.train_indices(fold));
        let (model, secs) = train_timed(spec, &train)?;
        build_time += secs;
        predictions.extend(predictions_for(
            &model,
            plan.test_indices(fold).iter().map(|&i| dataset.instance(i)),
        ));
    }
    EvalSummary::from_predictions(&predictions, dataset.schema().class_names(), build_time)
}

pub fn evaluate(spec: &ClassifierSpec, dataset: &Dataset, mode: TestMode) -> Result<EvalSummary> {
    match mode {
        TestMode::TrainingSet => evaluate_training_set(spec, dataset),
        TestMode::CrossValidation { k, seed } => cross_validate(spec, dataset, k, seed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: TestMode,
    pub summary: EvalSummary,
}

/// All evaluations of one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub classifier: ClassifierSpec,
    pub results: Vec<ModeResult>,
    /// Mean accuracy over the cross-validation modes; `None` without any.
    pub mean_cv_accuracy: Option<f64>,
}

impl RunReport {
    pub fn new(classifier: ClassifierSpec, results: Vec<ModeResult>) -> Self {
        let cv: Vec<f64> = results
            .iter()
            .filter(|r| r.mode.is_cross_validation())
            .map(|r| r.summary.accuracy)
            .collect();
        let mean_cv_accuracy = (!cv.is_empty()).then(|| cv.iter().sum::<f64>() / cv.len() as f64);
        RunReport {
            classifier,
            results,
            mean_cv_accuracy,
        }
    }

    pub fn result(&self, mode: TestMode) -> Option<&EvalSummary> {
        self.results.iter().find(|r| r.mode == mode).map(|r| &r.summary)
    }

    /// (accuracy, mae, rmse, build time) averaged over the modes that count
    /// for ranking.
    fn ranking_key(&self, basis: RankingBasis) -> [f64; 4] {
        let chosen: Vec<&EvalSummary> = self
            .results
            .iter()
            .filter(|r| match basis {
                RankingBasis::MeanCvAccuracy => r.mode.is_cross_validation(),
                RankingBasis::TrainingAccuracy => r.mode == TestMode::TrainingSet,
            })
            .map(|r| &r.summary)
            .collect();
        let n = chosen.len().max(1) as f64;
        let mean = |f: fn(&EvalSummary) -> f64| chosen.iter().map(|s| f(s)).sum::<f64>() / n;
        [
            mean(|s| s.accuracy),
            mean(|s| s.mae),
            mean(|s| s.rmse),
            mean(|s| s.build_time),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingBasis {
    MeanCvAccuracy,
    /// Used only when no cross-validation mode was run.
    TrainingAccuracy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reports: Vec<RunReport>,
    /// Indices into `reports`, best first.
    pub ranking: Vec<usize>,
    pub basis: RankingBasis,
}

impl Comparison {
    pub fn winner(&self) -> &RunReport {
        &self.reports[self.ranking[0]]
    }
}

/// Evaluates every classifier under every mode and ranks them: higher
/// accuracy first, then lower MAE, lower RMSE, shorter build time, and
/// finally declaration order. All classifiers see the same folds.
pub fn compare(specs: &[ClassifierSpec], dataset: &Dataset, modes: &[TestMode]) -> Result<Comparison> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("nothing to compare".into()));
    }
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no test modes given".into()));
    }
    for mode in modes {
        mode.validate()?;
    }
    for spec in specs {
        spec.validate()?;
    }
    let labeled = dataset.labeled();
    let plans = modes
        .iter()
        .map(|mode| match mode {
            TestMode::TrainingSet => Ok(None),
            TestMode::CrossValidation { k, seed } => stratified_folds(&labeled, *k, *seed).map(Some),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut results = Vec::with_capacity(modes.len());
        for (mode, plan) in modes.iter().zip(&plans) {
            let summary = match plan {
                None => evaluate_training_set(spec, &labeled)?,
                Some(plan) => cross_validate_with_plan(spec, &labeled, plan)?,
            };
            results.push(ModeResult { mode: *mode, summary });
        }
        reports.push(RunReport::new(spec.clone(), results));
    }

    let basis = if modes.iter().any(TestMode::is_cross_validation) {
        RankingBasis::MeanCvAccuracy
    } else {
        RankingBasis::TrainingAccuracy
    };
    let ranking = rank(&reports, basis);
    Ok(Comparison {
        reports,
        ranking,
        basis,
    })
}

/// Report indices ordered best first under `basis`.
pub fn rank(reports: &[RunReport], basis: RankingBasis) -> Vec<usize> {
    let keys: Vec<[f64; 4]> = reports.iter().map(|r| r.ranking_key(basis)).collect();
    let mut ranking: Vec<usize> = (0..reports.len()).collect();
    ranking.sort_by(|&a, &b| {
        let (ka, kb) = (keys[a], keys[b]);
        kb[0]
            .total_cmp(&ka[0])
            .then(ka[1].total_cmp(&kb[1]))
            .then(ka[2].total_cmp(&kb[2]))
            .then(ka[3].total_cmp(&kb[3]))
            .then(a.cmp(&b))
    });
    ranking
}
