use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::VeracityLabel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{preds} predictions but {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("no examples to score")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroF1 {
    pub macro_f1: f64,
    pub per_class: BTreeMap<VeracityLabel, ClassScores>,
    /// Classes missing from both predictions and golds; they score 0.
    pub absent_classes: Vec<VeracityLabel>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Unweighted mean of per-class F1 over both labels.
pub fn macro_f1(preds: &[VeracityLabel], golds: &[VeracityLabel]) -> Result<MacroF1, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut per_class = BTreeMap::new();
    let mut absent_classes = Vec::new();
    let mut total = 0.0;
    for class in VeracityLabel::ALL {
        let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
        for (p, g) in preds.iter().zip(golds) {
            match (*p == class, *g == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => {}
            }
        }
        if tp + fp + fneg == 0 {
            absent_classes.push(class);
        }
        let f1 = ratio(2 * tp, 2 * tp + fp + fneg);
        total += f1;
        per_class.insert(
            class,
            ClassScores {
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fneg),
                f1,
                support: tp + fneg,
            },
        );
    }
    Ok(MacroF1 {
        macro_f1: total / VeracityLabel::ALL.len() as f64,
        per_class,
        absent_classes,
    })
}

pub fn accuracy(preds: &[VeracityLabel], golds: &[VeracityLabel]) -> f64 {
    let correct = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    ratio(correct, preds.len().min(golds.len()))
}
