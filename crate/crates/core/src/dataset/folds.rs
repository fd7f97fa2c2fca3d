use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// A partition of instance indices into `k` disjoint, stratified folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

/// Stratified k-fold partition: each class's indices are shuffled with a
/// seeded generator, the class lists are concatenated in class order
/// (unlabeled instances last), and position `j` goes to fold `j mod k`.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "number of folds must be at least 2, got {k}"
        )));
    }
    if k > dataset.len() {
        return Err(Error::InsufficientData(format!(
            "{k} folds requested for {} instances",
            dataset.len()
        )));
    }

    let num_classes = dataset.num_classes();
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); num_classes + 1];
    for (i, inst) in dataset.instances().iter().enumerate() {
        strata[inst.class.unwrap_or(num_classes)].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut position = 0usize;
    for stratum in &mut strata {
        stratum.shuffle(&mut rng);
        for &idx in stratum.iter() {
            folds[position % k].push(idx);
            position += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { k, seed, folds })
}

/// Splits training data into a grow set and a held-out prune set. The prune
/// set is the first fold of a `prune_folds`-way stratified partition.
pub fn split_grow_prune(train: &Dataset, prune_folds: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if prune_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "prune folds must be at least 2, got {prune_folds}"
        )));
    }
    if train.len() < prune_folds {
        return Err(Error::InsufficientData(format!(
            "{} instances cannot form {prune_folds} pruning folds",
            train.len()
        )));
    }
    let plan = stratified_folds(train, prune_folds, seed)?;
    let grow = train.subset(&plan.train_indices(0));
    let prune = train.subset(plan.test_indices(0));
    Ok((grow, prune))
}
