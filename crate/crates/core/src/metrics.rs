//! Regression scores.

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(truth: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}

pub fn rmse(truth: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    let n = truth.len() as f64;
    (truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / n).sqrt()
}

/// Fraction of `truth` values inside `[lower, upper]`.
pub fn coverage(truth: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let inside = truth
        .iter()
        .zip(lower.iter().zip(upper))
        .filter(|(t, (l, u))| *l <= *t && *t <= *u)
        .count();
    inside as f64 / truth.len() as f64
}
