use crate::dataset::{Dataset, ParamVector};
use crate::error::{check_dim, Error, Result};
use crate::loss::log1p_exp_neg;

/// `‖θ̂ − θ*‖²`
pub fn mse(estimate: &ParamVector, truth: &ParamVector) -> Result<f64> {
    estimate.dist2(truth)
}

fn check_label(y: f64) -> Result<()> {
    if y == 1.0 || y == -1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("labels must be +1 or -1, got {y}")))
    }
}

/// Mean of `log(1 + exp(−y⟨θ,x⟩))` over the holdout, without a ridge term.
pub fn logloss(theta: &ParamVector, holdout: &Dataset) -> Result<f64> {
    if holdout.is_empty() {
        return Err(Error::invalid("log-loss of an empty holdout"));
    }
    check_dim(theta.len(), holdout.dim())?;
    let losses = holdout
        .iter()
        .map(|s| {
            check_label(s.target)?;
            Ok(log1p_exp_neg(s.target * s.features.dot(theta)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(corrected_mean(&losses))
}

/// Two-pass mean: the residual pass removes the rounding of the first sum,
/// so a constant input comes back unchanged.
fn corrected_mean(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let first = v.iter().sum::<f64>() / n;
    first + v.iter().map(|x| x - first).sum::<f64>() / n
}

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(score⁺ > score⁻) + ½·P(tie)`, from average ranks.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_dim(scores.len(), labels.len())?;
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::invalid(format!("score {s} cannot be ranked")));
    }
    let mut n_pos = 0usize;
    for &y in labels {
        check_label(y)?;
        n_pos += usize::from(y > 0.0);
    }
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // doubled ranks stay integral under tie averaging
    let mut pos_rank2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let rank2 = (i + 1 + j) as u128;
        let pos = order[i..j].iter().filter(|&&k| labels[k] > 0.0).count() as u128;
        pos_rank2 += rank2 * pos;
        i = j;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    let u2 = pos_rank2 - p * (p + 1);
    Ok(u2 as f64 / (2.0 * p as f64 * n as f64))
}

/// Scores `⟨θ,x⟩` and labels of a holdout, for [`auc`].
pub fn holdout_scores(theta: &ParamVector, holdout: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(theta.len(), holdout.dim())?;
    Ok(holdout
        .iter()
        .map(|s| (s.features.dot(theta), s.target))
        .unzip())
}
