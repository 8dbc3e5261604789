//! Frozen / non-frozen pixel classification and its evaluation harness.

mod evaluate;
mod metrics;
mod split;
mod standardize;
mod svm;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use evaluate::{evaluate, grid_search, Classifier, EvaluationReport, FoldScore, GridSearchResult, LinearSvm};
pub use metrics::{m_acc, m_iou, ConfusionMatrix};
pub use split::{Fold, SplitKind, SplitPlan};
pub use standardize::{fit_standardizer, Standardizer};
pub use svm::{predict, train_linear_svm, train_linear_svm_traced, LinearModel, SvmOptions, SvmTrace};

use crate::ingest::{Label, PixelSample};

/// Cost used when none is configured.
pub const DEFAULT_COST: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("no training samples")]
    Empty,
    #[error("need at least {need} samples, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("training data contains only {0} samples")]
    SingleClass(IceClass),
    #[error("band {band} has zero variance")]
    ZeroVariance { band: usize },
    #[error("expected {expected} bands, got {got}")]
    BandMismatch { expected: usize, got: usize },
    #[error("sample for pixel {pixel_id} on {date} is unlabeled")]
    Unlabeled { pixel_id: u32, date: chrono::NaiveDate },
    #[error("cost must be positive and finite, got {0}")]
    InvalidCost(f64),
    #[error("{0}")]
    Metric(String),
    #[error("{0}")]
    Split(String),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: String,
        #[source]
        source: Box<ClassifyError>,
    },
    #[error("model json: {0}")]
    Json(String),
}

/// Two-class prediction target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IceClass {
    Frozen,
    NonFrozen,
}

impl IceClass {
    /// `+1` for frozen, `-1` for non-frozen.
    pub fn sign(self) -> f64 {
        match self {
            IceClass::Frozen => 1.0,
            IceClass::NonFrozen => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IceClass::Frozen => "frozen",
            IceClass::NonFrozen => "non_frozen",
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Frozen => Some(IceClass::Frozen),
            Label::NonFrozen => Some(IceClass::NonFrozen),
            Label::Unlabeled => None,
        }
    }
}

impl fmt::Display for IceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IceClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frozen" => Ok(IceClass::Frozen),
            "non_frozen" => Ok(IceClass::NonFrozen),
            other => Err(format!("unknown class {other:?}")),
        }
    }
}

/// Labeled, cloud-free samples: the ones usable for training and scoring.
pub fn training_subset(samples: &[PixelSample]) -> Vec<&PixelSample> {
    samples
        .iter()
        .filter(|s| !s.cloudy && s.label != Label::Unlabeled)
        .collect()
}

pub(crate) fn class_of(sample: &PixelSample) -> Result<IceClass, ClassifyError> {
    IceClass::from_label(sample.label).ok_or(ClassifyError::Unlabeled {
        pixel_id: sample.pixel_id,
        date: sample.date,
    })
}
