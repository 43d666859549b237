use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Sample indices held out in `fold`.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Sample indices used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

/// Stratified fold assignment: each class is shuffled with a generator
/// seeded from `seed` and dealt round-robin across folds, continuing the
/// rotation from where the previous class stopped.
pub fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "fold count must be at least 2".into(),
        ));
    }
    if k > y.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} exceeds sample count {}",
            y.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [1u8, 0u8] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.is_empty() {
            log::warn!("class {class} has no samples; folds cannot be stratified");
            continue;
        }
        if members.len() < k {
            log::warn!(
                "class {class} has {} samples for {k} folds; some folds will lack it",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_divisibility() {
        let y = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let plan = stratified_folds(&y, 5, 7).unwrap();
        for fold in 0..5 {
            let idx = plan.test_indices(fold);
            assert_eq!(idx.len(), 2);
            assert_eq!(idx.iter().filter(|&&i| y[i] == 1).count(), 1);
        }
    }

    #[test]
    fn deterministic() {
        let y = [1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 1];
        assert_eq!(
            stratified_folds(&y, 3, 42).unwrap(),
            stratified_folds(&y, 3, 42).unwrap()
        );
    }

    #[test]
    fn minimal_case() {
        let plan = stratified_folds(&[1, 0], 2, 3).unwrap();
        let mut a = plan.assignment().to_vec();
        a.sort();
        assert_eq!(a, vec![0, 1]);
    }

    #[test]
    fn argument_errors() {
        assert!(stratified_folds(&[1, 0], 3, 0).is_err());
        assert!(stratified_folds(&[1, 0, 1], 1, 0).is_err());
    }

    #[test]
    fn single_class_is_best_effort() {
        let plan = stratified_folds(&[1, 1, 1, 1], 2, 0).unwrap();
        assert_eq!(plan.test_indices(0).len(), 2);
    }

    proptest! {
        #[test]
        fn folds_are_stratified(y in prop::collection::vec(0u8..2, 4..80), k in 2usize..6, seed: u64) {
            prop_assume!(k <= y.len());
            let plan = stratified_folds(&y, k, seed).unwrap();
            let n_pos = y.iter().filter(|&&v| v == 1).count() as f64;
            let mut covered = 0;
            for fold in 0..k {
                let idx = plan.test_indices(fold);
                covered += idx.len();
                let pos = idx.iter().filter(|&&i| y[i] == 1).count() as f64;
                prop_assert!((pos - n_pos / k as f64).abs() < 1.0);
                let sizes = y.len() as f64 / k as f64;
                prop_assert!((idx.len() as f64 - sizes).abs() < 1.0 + 1e-9);
            }
            prop_assert_eq!(covered, y.len());
            prop_assert!(plan.assignment().iter().all(|&f| f < k));
        }
    }
}
