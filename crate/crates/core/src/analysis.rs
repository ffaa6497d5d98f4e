//! Correlation between pre-calculated scores and overall scores, and
//! clinician-rating normalization.

use std::io::Write;

use crate::corpus::TargetKind;
use crate::error::{Error, Result};
use crate::scores::ScoreTable;

/// Sample Pearson correlation. Requires equal lengths of at least 3 and
/// non-constant inputs.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Degenerate(format!(
            "length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Degenerate(format!("{} observations; need at least 3", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Whether correlations pool both target kinds or are computed per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Pooling {
    #[default]
    Pooled,
    PerTarget,
}

/// Paired observations of `x_metric` in `x` and `y_metric` in `y`, joined
/// on (hadm_id, model_id, target) and sorted by that key so the result does
/// not depend on row order.
pub fn paired_observations(
    x: &ScoreTable,
    x_metric: &str,
    y: &ScoreTable,
    y_metric: &str,
    target: Option<TargetKind>,
) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<((&str, &str, TargetKind), f64, f64)> = Vec::new();
    for (cell, xv) in x.column(x_metric) {
        if target.is_some_and(|t| t != cell.target) {
            continue;
        }
        let hadm = x.documents()[cell.doc].as_str();
        let model = x.models()[cell.model].as_str();
        if let Some(yv) = y.get_named(hadm, model, cell.target, y_metric) {
            pairs.push(((hadm, model, cell.target), xv, yv));
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    pairs.into_iter().map(|(_, a, b)| (a, b)).unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub metrics: Vec<String>,
    pub variants: Vec<String>,
    /// `values[i][j]` correlates `metrics[i]` with `variants[j]`.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, metric: &str, variant: &str) -> Option<f64> {
        let i = self.metrics.iter().position(|m| m == metric)?;
        let j = self.variants.iter().position(|v| v == variant)?;
        Some(self.values[i][j])
    }

    /// CSV with header `metric,overall_variant,r`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "metric,overall_variant,r")?;
        for (i, m) in self.metrics.iter().enumerate() {
            for (j, v) in self.variants.iter().enumerate() {
                writeln!(w, "{m},{v},{}", self.values[i][j])?;
            }
        }
        Ok(())
    }
}

/// Correlates each of `metrics` (from `scores`) with each of `variants`
/// (from `overall`) over all shared (document, model, target) observations.
/// With [`Pooling::PerTarget`] each variant becomes `<variant>_bhc` and
/// `<variant>_di`.
pub fn correlation_matrix(
    scores: &ScoreTable,
    metrics: &[String],
    overall: &ScoreTable,
    variants: &[String],
    pooling: Pooling,
) -> Result<CorrelationMatrix> {
    let columns: Vec<(String, &str, Option<TargetKind>)> = match pooling {
        Pooling::Pooled => variants.iter().map(|v| (v.clone(), v.as_str(), None)).collect(),
        Pooling::PerTarget => variants
            .iter()
            .flat_map(|v| TargetKind::ALL.map(|t| (format!("{v}_{t}"), v.as_str(), Some(t))))
            .collect(),
    };
    let mut values = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let mut row = Vec::with_capacity(columns.len());
        for (label, variant, target) in &columns {
            let (x, y) = paired_observations(scores, metric, overall, variant, *target);
            let r = pearson(&x, &y).map_err(|e| match e {
                Error::Degenerate(why) => Error::Degenerate(format!("{metric} vs {label}: {why}")),
                other => other,
            })?;
            row.push(r);
        }
        values.push(row);
    }
    Ok(CorrelationMatrix {
        metrics: metrics.to_vec(),
        variants: columns.into_iter().map(|c| c.0).collect(),
        values,
    })
}

/// Maps 1-5 clinician ratings linearly onto `[0, 1]`.
pub fn normalize_clinician_scores(scores: &[f64]) -> Result<Vec<f64>> {
    scores
        .iter()
        .map(|&s| {
            if (1.0..=5.0).contains(&s) {
                Ok((s - 1.0) / 4.0)
            } else {
                Err(Error::Degenerate(format!("clinician score {s} outside [1, 5]")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::{MergeMode, ScoreRow};

    #[test]
    fn pearson_endpoints() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_matches_textbook_formula() {
        let x = [0.3, 1.7, 2.2, 5.1, 4.4, 0.9];
        let y = [1.1, 0.4, 2.9, 3.3, 5.0, 0.2];
        let r = pearson(&x, &y).unwrap();
        assert!((r - dexsel_oracles::pearson(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn clinician_normalization() {
        assert_eq!(
            normalize_clinician_scores(&[1.0, 3.0, 5.0]).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        let v = normalize_clinician_scores(&[3.667]).unwrap()[0];
        assert!((v - 0.6668).abs() < 1e-4, "{v}");
        assert!(normalize_clinician_scores(&[0.9]).is_err());
        assert!(normalize_clinician_scores(&[5.01]).is_err());
    }

    fn table(rows: &[(&str, &str, TargetKind, &str, f64)]) -> ScoreTable {
        let rows: Vec<ScoreRow> = rows
            .iter()
            .map(|(h, m, t, k, v)| ScoreRow {
                hadm_id: h.to_string(),
                model_id: m.to_string(),
                target: *t,
                metric: k.to_string(),
                value: *v,
            })
            .collect();
        let mut t = ScoreTable::from_rows(&rows).unwrap();
        t.merge_rows(&[], MergeMode::Any).unwrap();
        t
    }

    #[test]
    fn self_correlation_and_degenerate_column() {
        use TargetKind::*;
        let scores = table(&[
            ("a", "m", Di, "medcon_ds", 0.1),
            ("b", "m", Di, "medcon_ds", 0.5),
            ("c", "m", Di, "medcon_ds", 0.3),
            ("a", "m", Di, "cli", 7.0),
            ("b", "m", Di, "cli", 7.0),
            ("c", "m", Di, "cli", 7.0),
        ]);
        let overall = table(&[
            ("c", "m", Di, "overall", 0.3),
            ("a", "m", Di, "overall", 0.1),
            ("b", "m", Di, "overall", 0.5),
        ]);
        let m = correlation_matrix(
            &scores,
            &["medcon_ds".into()],
            &overall,
            &["overall".into()],
            Pooling::Pooled,
        )
        .unwrap();
        assert!((m.get("medcon_ds", "overall").unwrap() - 1.0).abs() < 1e-12);
        let err =
            correlation_matrix(&scores, &["cli".into()], &overall, &["overall".into()], Pooling::Pooled).unwrap_err();
        assert!(err.to_string().contains("cli"), "{err}");

        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("metric,overall_variant,r\nmedcon_ds,overall,"));
    }
}
