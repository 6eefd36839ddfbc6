//! Seeded per-class train/test split, algorithm `split-v1`.
//!
//! One `ChaCha8Rng::seed_from_u64(seed)` stream drives every class, visited
//! in canonical label order. Each class's entries, in manifest order, are
//! shuffled by Fisher–Yates from the top down; the swap partner for position
//! `i` is `(next_u64() as u128 * (i + 1)) >> 64`. The first
//! `train_per_class` shuffled entries become training items; everything
//! else is test data, kept in manifest order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::manifest::{ManifestEntry, POSE_ALPHABET};
use super::PipelineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_per_class: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_per_class: 10, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Manifest indices, grouped by class in canonical order.
    pub train: Vec<usize>,
    /// Manifest indices in manifest order.
    pub test: Vec<usize>,
}

fn shuffle(items: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = ((rng.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
        items.swap(i, j);
    }
}

pub fn split(entries: &[ManifestEntry], spec: SplitSpec) -> Result<Split, PipelineError> {
    if spec.train_per_class == 0 {
        return Err(PipelineError::Split("train_per_class must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_train = vec![false; entries.len()];
    let mut train = Vec::new();
    for label in POSE_ALPHABET {
        let mut members: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].label == label).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() <= spec.train_per_class {
            return Err(PipelineError::Split(format!(
                "class {label} has {} entries, need more than {} to leave test data",
                members.len(),
                spec.train_per_class
            )));
        }
        shuffle(&mut members, &mut rng);
        for &i in &members[..spec.train_per_class] {
            is_train[i] = true;
            train.push(i);
        }
    }
    let test = (0..entries.len()).filter(|&i| !is_train[i]).collect();
    Ok(Split { train, test })
}
