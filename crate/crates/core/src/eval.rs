//! Multi-label evaluation: macro-averaged F1 and ranking AUC.
//!
//! F1 is computed per category from set-membership confusion counts and
//! averaged over every category; a category with no true positives, false
//! positives, or false negatives contributes zero rather than poisoning the
//! mean with 0/0. AUC uses the rank-statistic form (equivalent to the
//! probability that a random positive outscores a random negative, ties
//! counting half), so it needs no threshold sweep. Categories without both a
//! positive and a negative document have no defined AUC; they are skipped
//! with a warning and the macro average runs over the rest.

use alloc::string::String;
use alloc::vec::Vec;

use crate::mat::Mat;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// Predictions, gold labels, and scores disagree on document count.
    LengthMismatch {
        pred: usize,
        gold: usize,
        scores: usize,
    },
    /// Score columns disagree with the category name list.
    CategoryMismatch { scores: usize, names: usize },
    /// No category had both positive and negative documents.
    NoRankableCategories,
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::LengthMismatch { pred, gold, scores } => write!(
                f,
                "document counts disagree: {pred} predicted, {gold} gold, {scores} scored"
            ),
            EvalError::CategoryMismatch { scores, names } => {
                write!(f, "{scores} score columns but {names} category names")
            }
            EvalError::NoRankableCategories => {
                write!(
                    f,
                    "no category has both positive and negative documents; AUC undefined"
                )
            }
        }
    }
}

/// Confusion counts and per-category metrics. `auc` is `None` when the
/// category lacks a positive or a negative document.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryEval {
    pub name: String,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub f1: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_category: Vec<CategoryEval>,
    pub macro_f1: f64,
    /// Mean AUC over categories where it is defined.
    pub macro_auc: f64,
    /// How many categories entered the AUC mean.
    pub auc_categories: usize,
}

/// (tp, fp, fn) per category from predicted and gold label sets.
pub fn confusion(pred: &[Vec<u16>], gold: &[Vec<u16>], cats: usize) -> Vec<(u64, u64, u64)> {
    let mut table = alloc::vec![(0u64, 0u64, 0u64); cats];
    for (p, g) in pred.iter().zip(gold) {
        for &c in p {
            if g.contains(&c) {
                table[c as usize].0 += 1;
            } else {
                table[c as usize].1 += 1;
            }
        }
        for &c in g {
            if !p.contains(&c) {
                table[c as usize].2 += 1;
            }
        }
    }
    table
}

/// F1 = 2tp / (2tp + fp + fn), zero when the category never occurs.
pub fn f1_score(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Rank-statistic AUC with average ranks for ties. `None` when the labels
/// are all positive or all negative.
pub fn auc_binary(scores: &[f64], positive: &[bool]) -> Option<f64> {
    debug_assert_eq!(scores.len(), positive.len());
    let pos = positive.iter().filter(|&&x| x).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share their mean.
        let rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if positive[idx] {
                pos_rank_sum += rank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Some((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Full report over predicted label sets, per-document category scores, and
/// gold label sets.
pub fn evaluate(
    pred: &[Vec<u16>],
    scores: &Mat,
    gold: &[Vec<u16>],
    names: &[String],
) -> Result<EvalReport, EvalError> {
    if pred.len() != gold.len() || pred.len() != scores.rows() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
            scores: scores.rows(),
        });
    }
    if scores.cols() != names.len() {
        return Err(EvalError::CategoryMismatch {
            scores: scores.cols(),
            names: names.len(),
        });
    }
    let cats = names.len();
    let table = confusion(pred, gold, cats);

    let mut per_category = Vec::with_capacity(cats);
    let mut f1_sum = 0.0;
    let mut auc_sum = 0.0;
    let mut auc_n = 0usize;
    let mut col = alloc::vec![0.0; pred.len()];
    let mut positive = alloc::vec![false; pred.len()];
    for c in 0..cats {
        let (tp, fp, fn_) = table[c];
        let f1 = f1_score(tp, fp, fn_);
        f1_sum += f1;
        for d in 0..pred.len() {
            col[d] = scores.get(d, c);
            positive[d] = gold[d].contains(&(c as u16));
        }
        let auc = auc_binary(&col, &positive);
        match auc {
            Some(a) => {
                auc_sum += a;
                auc_n += 1;
            }
            None => log::warn!(
                "category {:?} has no positive/negative split in the gold labels; skipped for AUC",
                names[c]
            ),
        }
        per_category.push(CategoryEval {
            name: names[c].clone(),
            tp,
            fp,
            fn_,
            f1,
            auc,
        });
    }
    if auc_n == 0 {
        return Err(EvalError::NoRankableCategories);
    }
    Ok(EvalReport {
        per_category,
        macro_f1: f1_sum / cats as f64,
        macro_auc: auc_sum / auc_n as f64,
        auc_categories: auc_n,
    })
}

/// CSV table of per-category results, weakest F1 first (ties by name) so
/// problem categories surface at the top. Undefined AUC prints as `NA`.
pub fn per_category_table(report: &EvalReport) -> String {
    let mut rows: Vec<&CategoryEval> = report.per_category.iter().collect();
    rows.sort_by(|a, b| {
        a.f1.partial_cmp(&b.f1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    let mut out = String::from("category,tp,fp,fn,f1,auc\n");
    for r in rows {
        let name = if r.name.contains(',') || r.name.contains('"') {
            let mut quoted = String::from("\"");
            quoted.push_str(&r.name.replace('"', "\"\""));
            quoted.push('"');
            quoted
        } else {
            r.name.clone()
        };
        match r.auc {
            Some(a) => {
                out += &alloc::format!(
                    "{},{},{},{},{:.6},{:.6}\n",
                    name,
                    r.tp,
                    r.fp,
                    r.fn_,
                    r.f1,
                    a
                )
            }
            None => out += &alloc::format!("{},{},{},{},{:.6},NA\n", name, r.tp, r.fp, r.fn_, r.f1),
        }
    }
    out
}

/// Mean and sample standard deviation (n-1 denominator; zero for a single
/// value) of a sequence of per-run metrics.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, crate::math::sqrt(var))
}
