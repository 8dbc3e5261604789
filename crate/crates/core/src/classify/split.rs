use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{class_of, ClassifyError, IceClass};
use crate::ingest::PixelSample;
use crate::season::WinterSeason;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    KFold,
    LeaveOneLakeOut,
    LeaveOneWinterOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub k: usize,
    pub seed: u64,
}

/// One held-out group; the training portion is the complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub name: String,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn k_fold(k: usize, seed: u64) -> Self {
        Self {
            kind: SplitKind::KFold,
            k,
            seed,
        }
    }

    pub fn leave_one_lake_out() -> Self {
        Self {
            kind: SplitKind::LeaveOneLakeOut,
            k: 0,
            seed: 0,
        }
    }

    pub fn leave_one_winter_out() -> Self {
        Self {
            kind: SplitKind::LeaveOneWinterOut,
            k: 0,
            seed: 0,
        }
    }

    /// Partition sample indices into folds. Every index appears in exactly
    /// one fold's test set.
    pub fn folds(&self, samples: &[&PixelSample]) -> Result<Vec<Fold>, ClassifyError> {
        let folds = match self.kind {
            SplitKind::KFold => self.stratified(samples)?,
            SplitKind::LeaveOneLakeOut => group_by(samples, |s| Ok(s.lake_id.clone()))?,
            SplitKind::LeaveOneWinterOut => group_by(samples, |s| {
                WinterSeason::containing(s.date)
                    .map(|w| w.id())
                    .ok_or_else(|| {
                        ClassifyError::Split(format!("sample date {} is outside any winter", s.date))
                    })
            })?,
        };
        if folds.len() < 2 {
            return Err(ClassifyError::Split(format!(
                "{:?} needs at least two groups, found {}",
                self.kind,
                folds.len()
            )));
        }
        Ok(folds)
    }

    /// Seeded shuffle within each class, then round-robin dealing that
    /// continues across classes so fold sizes differ by at most one.
    fn stratified(&self, samples: &[&PixelSample]) -> Result<Vec<Fold>, ClassifyError> {
        if self.k < 2 {
            return Err(ClassifyError::Split(format!("k-fold needs k >= 2, got {}", self.k)));
        }
        if samples.len() < self.k {
            return Err(ClassifyError::Split(format!(
                "{} samples cannot fill {} folds",
                samples.len(),
                self.k
            )));
        }
        let mut frozen = Vec::new();
        let mut open = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            match class_of(s)? {
                IceClass::Frozen => frozen.push(i),
                IceClass::NonFrozen => open.push(i),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        frozen.shuffle(&mut rng);
        open.shuffle(&mut rng);
        let mut tests = vec![Vec::new(); self.k];
        for (slot, idx) in frozen.into_iter().chain(open).enumerate() {
            tests[slot % self.k].push(idx);
        }
        Ok(tests
            .into_iter()
            .enumerate()
            .map(|(f, mut test)| {
                test.sort_unstable();
                Fold {
                    name: format!("fold{}", f + 1),
                    test,
                }
            })
            .collect())
    }
}

fn group_by(
    samples: &[&PixelSample],
    key: impl Fn(&PixelSample) -> Result<String, ClassifyError>,
) -> Result<Vec<Fold>, ClassifyError> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        groups.entry(key(s)?).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(name, test)| Fold { name, test })
        .collect())
}
