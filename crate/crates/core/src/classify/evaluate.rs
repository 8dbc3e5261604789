use rayon::prelude::*;
use serde::Serialize;

use super::{class_of, m_acc, m_iou, train_linear_svm, ClassifyError, ConfusionMatrix, IceClass, LinearModel, SplitPlan};
use crate::ingest::PixelSample;

/// A trainable frozen / non-frozen classifier.
pub trait Classifier: Sync {
    type Model: Send + Sync;

    fn train(&self, samples: &[&PixelSample]) -> Result<Self::Model, ClassifyError>;

    fn predict(&self, model: &Self::Model, sample: &PixelSample) -> Result<IceClass, ClassifyError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSvm {
    pub cost: f64,
}

impl Classifier for LinearSvm {
    type Model = LinearModel;

    fn train(&self, samples: &[&PixelSample]) -> Result<LinearModel, ClassifyError> {
        train_linear_svm(samples, self.cost)
    }

    fn predict(&self, model: &LinearModel, sample: &PixelSample) -> Result<IceClass, ClassifyError> {
        super::predict(model, sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldScore {
    pub name: String,
    pub confusion: ConfusionMatrix,
    pub m_acc: f64,
    pub m_iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub folds: Vec<FoldScore>,
    /// Unweighted mean over folds.
    pub mean_m_acc: f64,
    pub mean_m_iou: f64,
}

/// Train on each fold's complement and score its held-out samples. Only
/// labeled samples take part; folds run in parallel and are reported in
/// fold order.
pub fn evaluate<C: Classifier>(
    samples: &[&PixelSample],
    classifier: &C,
    plan: &SplitPlan,
) -> Result<EvaluationReport, ClassifyError> {
    let folds = plan.folds(samples)?;
    let scores = folds
        .par_iter()
        .map(|fold| {
            let wrap = |e: ClassifyError| ClassifyError::Fold {
                fold: fold.name.clone(),
                source: Box::new(e),
            };
            let mut held_out = vec![false; samples.len()];
            for &i in &fold.test {
                held_out[i] = true;
            }
            let train: Vec<&PixelSample> = samples
                .iter()
                .zip(&held_out)
                .filter(|(_, &h)| !h)
                .map(|(s, _)| *s)
                .collect();
            if train.is_empty() {
                return Err(wrap(ClassifyError::Empty));
            }
            let model = classifier.train(&train).map_err(wrap)?;
            let mut cm = ConfusionMatrix::default();
            for &i in &fold.test {
                let truth = class_of(samples[i]).map_err(wrap)?;
                let pred = classifier.predict(&model, samples[i]).map_err(wrap)?;
                cm.record(truth, pred);
            }
            Ok(FoldScore {
                name: fold.name.clone(),
                confusion: cm,
                m_acc: m_acc(&cm).map_err(wrap)?,
                m_iou: m_iou(&cm).map_err(wrap)?,
            })
        })
        .collect::<Vec<Result<FoldScore, ClassifyError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let n = scores.len() as f64;
    let mean_m_acc = scores.iter().map(|s| s.m_acc).sum::<f64>() / n;
    let mean_m_iou = scores.iter().map(|s| s.m_iou).sum::<f64>() / n;
    Ok(EvaluationReport {
        folds: scores,
        mean_m_acc,
        mean_m_iou,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best_cost: f64,
    /// One entry per candidate cost, ascending.
    pub table: Vec<(f64, EvaluationReport)>,
}

/// Evaluate every cost and keep the one with the highest mean mAcc; ties go
/// to the smaller cost.
pub fn grid_search<C: Classifier>(
    samples: &[&PixelSample],
    costs: &[f64],
    plan: &SplitPlan,
    make: impl Fn(f64) -> C,
) -> Result<GridSearchResult, ClassifyError> {
    if costs.is_empty() {
        return Err(ClassifyError::Split("grid search needs at least one cost".into()));
    }
    let mut sorted = costs.to_vec();
    for &c in &sorted {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ClassifyError::InvalidCost(c));
        }
    }
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut table = Vec::with_capacity(sorted.len());
    let mut best: Option<(f64, f64)> = None;
    for c in sorted {
        let report = evaluate(samples, &make(c), plan)?;
        if best.is_none_or(|(_, score)| report.mean_m_acc > score) {
            best = Some((c, report.mean_m_acc));
        }
        table.push((c, report));
    }
    Ok(GridSearchResult {
        best_cost: best.expect("non-empty").0,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Label;
    use chrono::NaiveDate;

    /// Pixels split by a gap of 10 in band 1; two lakes, two winters.
    fn separable() -> Vec<PixelSample> {
        let mut out = Vec::new();
        for (li, lake) in ["sils", "silvaplana"].iter().enumerate() {
            for (wi, year) in [2012, 2013].iter().enumerate() {
                for i in 0..40u32 {
                    let frozen = i % 2 == 0;
                    let base = if frozen { 10.0 } else { 0.0 };
                    let date = NaiveDate::from_ymd_opt(year + 1, 1, 1 + i % 28).unwrap();
                    out.push(PixelSample {
                        lake_id: lake.to_string(),
                        date,
                        pixel_id: i,
                        cloudy: false,
                        label: if frozen { Label::Frozen } else { Label::NonFrozen },
                        bands: vec![base + (i as f64 * 0.37 + li as f64 + wi as f64).sin(), (i as f64).cos()],
                    });
                }
            }
        }
        out
    }

    #[test]
    fn separable_data_scores_perfectly_everywhere() {
        let data = separable();
        let refs: Vec<_> = data.iter().collect();
        let svm = LinearSvm { cost: 0.1 };
        for plan in [SplitPlan::k_fold(4, 1), SplitPlan::leave_one_lake_out(), SplitPlan::leave_one_winter_out()] {
            let r = evaluate(&refs, &svm, &plan).unwrap();
            assert_eq!(r.mean_m_acc, 100.0);
            assert_eq!(r.mean_m_iou, 100.0);
        }
    }

    #[test]
    fn single_class_training_fold_is_named() {
        let data: Vec<_> = separable()
            .into_iter()
            .filter(|s| s.lake_id == "sils" || s.label == Label::Frozen)
            .map(|mut s| {
                if s.lake_id == "sils" {
                    s.label = Label::NonFrozen;
                    s.bands[0] = 0.0 + s.bands[1];
                }
                s
            })
            .collect();
        let refs: Vec<_> = data.iter().collect();
        match evaluate(&refs, &LinearSvm { cost: 0.1 }, &SplitPlan::leave_one_lake_out()) {
            Err(ClassifyError::Fold { fold, .. }) => assert_eq!(fold, "sils"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_search_tie_breaks_to_smallest() {
        let data = separable();
        let refs: Vec<_> = data.iter().collect();
        let plan = SplitPlan::k_fold(4, 3);
        let r = grid_search(&refs, &[10.0, 0.1, 0.01], &plan, |c| LinearSvm { cost: c }).unwrap();
        assert_eq!(r.best_cost, 0.01);
        assert_eq!(r.table.len(), 3);
        assert!(r.table.iter().all(|(_, rep)| rep.mean_m_acc == 100.0));
        let single = grid_search(&refs, &[0.1], &plan, |c| LinearSvm { cost: c }).unwrap();
        assert_eq!(single.best_cost, 0.1);
        assert!(grid_search(&refs, &[], &plan, |c| LinearSvm { cost: c }).is_err());
    }
}
