use serde::{Deserialize, Serialize};

use super::{ClassifyError, IceClass};

/// Two-class confusion counts, frozen as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_neg: u64, false_pos: u64, true_neg: u64) -> Self {
        Self {
            true_pos,
            false_neg,
            false_pos,
            true_neg,
        }
    }

    pub fn record(&mut self, truth: IceClass, predicted: IceClass) {
        match (truth, predicted) {
            (IceClass::Frozen, IceClass::Frozen) => self.true_pos += 1,
            (IceClass::Frozen, IceClass::NonFrozen) => self.false_neg += 1,
            (IceClass::NonFrozen, IceClass::Frozen) => self.false_pos += 1,
            (IceClass::NonFrozen, IceClass::NonFrozen) => self.true_neg += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.true_pos += other.true_pos;
        self.false_neg += other.false_neg;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
    }
}

/// Mean per-class recall, in percent.
pub fn m_acc(cm: &ConfusionMatrix) -> Result<f64, ClassifyError> {
    let frozen = cm.true_pos + cm.false_neg;
    let open = cm.true_neg + cm.false_pos;
    if frozen == 0 || open == 0 {
        return Err(ClassifyError::Metric(
            "mAcc undefined: a class has no ground-truth samples".into(),
        ));
    }
    let r_frozen = cm.true_pos as f64 / frozen as f64;
    let r_open = cm.true_neg as f64 / open as f64;
    Ok((r_frozen + r_open) / 2.0 * 100.0)
}

/// Mean per-class intersection over union, in percent.
pub fn m_iou(cm: &ConfusionMatrix) -> Result<f64, ClassifyError> {
    let union_frozen = cm.true_pos + cm.false_pos + cm.false_neg;
    let union_open = cm.true_neg + cm.false_neg + cm.false_pos;
    if union_frozen == 0 || union_open == 0 {
        return Err(ClassifyError::Metric("mIoU undefined: empty class union".into()));
    }
    let iou_frozen = cm.true_pos as f64 / union_frozen as f64;
    let iou_open = cm.true_neg as f64 / union_open as f64;
    Ok((iou_frozen + iou_open) / 2.0 * 100.0)
}
