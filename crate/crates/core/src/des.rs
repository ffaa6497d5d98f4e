//! Dynamic expert selection: choose one model's output per document, either
//! by weighted min-max-normalized scores or by a word-count window.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize};

use crate::analysis::{paired_observations, pearson, Pooling};
use crate::corpus::{GeneratedCandidate, TargetKind};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scores::{Cell, MissingPolicy, ScoreTable};

pub const MEDCON_DS: &str = "medcon_ds";
pub const METEOR_DS: &str = "meteor_ds";
pub const ALIGNSCORE_DS: &str = "alignscore_ds";
pub const SUMMAC_DS: &str = "summac_ds";

/// The seven pre-calculated scores: four factuality proxies against the
/// discharge summary and three readability scores.
pub const PRECALCULATED_METRICS: [&str; 7] = [SUMMAC_DS, ALIGNSCORE_DS, MEDCON_DS, METEOR_DS, "fkgl", "dcrs", "cli"];

/// Which target kinds a criterion applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    Both,
    DiOnly,
    BhcOnly,
}

impl Scope {
    pub fn applies_to(self, target: TargetKind) -> bool {
        match self {
            Scope::Both => true,
            Scope::DiOnly => target == TargetKind::Di,
            Scope::BhcOnly => target == TargetKind::Bhc,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    MinMax,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// The earliest model in table order wins.
    #[default]
    First,
}

/// Parses `"num/den"` or a plain decimal.
pub fn parse_weight(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid weight {s:?}"));
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn deserialize_weight<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Number(v) => Ok(v),
        Raw::Text(s) => parse_weight(&s).map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub metric: String,
    #[serde(deserialize_with = "deserialize_weight")]
    pub weight: f64,
    #[serde(default)]
    pub scope: Scope,
}

impl Criterion {
    pub fn new(metric: &str, weight: f64, scope: Scope) -> Self {
        Criterion {
            metric: metric.to_string(),
            weight,
            scope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesConfig {
    pub name: String,
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl DesConfig {
    pub fn new(name: &str, criteria: Vec<Criterion>) -> Result<Self> {
        let config = DesConfig {
            name: name.to_string(),
            criteria,
            normalization: Normalization::MinMax,
            tie_break: TieBreak::First,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: DesConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("DES config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::Config(format!("{}: no criteria", self.name)));
        }
        let mut seen = HashSet::new();
        for c in &self.criteria {
            if c.metric.is_empty() {
                return Err(Error::Config(format!("{}: empty metric name", self.name)));
            }
            if !c.weight.is_finite() {
                return Err(Error::Config(format!(
                    "{}: non-finite weight for {}",
                    self.name, c.metric
                )));
            }
            for t in TargetKind::ALL.into_iter().filter(|t| c.scope.applies_to(*t)) {
                if !seen.insert((c.metric.as_str(), t)) {
                    return Err(Error::Config(format!(
                        "{}: {} listed twice for {t}",
                        self.name, c.metric
                    )));
                }
            }
        }
        Ok(())
    }

    /// Criteria that apply to `target`, in config order.
    pub fn criteria_for(&self, target: TargetKind) -> Vec<&Criterion> {
        self.criteria.iter().filter(|c| c.scope.applies_to(target)).collect()
    }

    /// Built-in weighted presets `des1`, `des2`, `des3`. `des4` is derived
    /// from data and `des5` is a length rule, so neither is returned here.
    pub fn preset(name: &str) -> Option<DesConfig> {
        let both = |m: &str, w: f64| Criterion::new(m, w, Scope::Both);
        let criteria = match name {
            "des1" => vec![both(MEDCON_DS, 1.0 / 2.0), both(METEOR_DS, 1.0 / 2.0)],
            "des2" => vec![
                both(MEDCON_DS, 2.0 / 5.0),
                both(METEOR_DS, 2.0 / 5.0),
                both("cli", 1.0 / 5.0),
            ],
            "des3" => {
                let mut v: Vec<Criterion> = ["fkgl", "dcrs", "cli"]
                    .iter()
                    .map(|m| Criterion::new(m, -1.0 / 9.0, Scope::DiOnly))
                    .collect();
                v.extend(
                    [MEDCON_DS, METEOR_DS, ALIGNSCORE_DS]
                        .iter()
                        .map(|m| Criterion::new(m, 2.0 / 9.0, Scope::DiOnly)),
                );
                v.extend(
                    [MEDCON_DS, METEOR_DS, ALIGNSCORE_DS]
                        .iter()
                        .map(|m| Criterion::new(m, 1.0 / 3.0, Scope::BhcOnly)),
                );
                v
            }
            _ => return None,
        };
        Some(DesConfig::new(name, criteria).expect("presets are valid"))
    }
}

/// Min-max rescaling across models. A constant column maps to all zeros.
pub fn min_max_normalize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::Degenerate("min-max normalization of an empty set".into()));
    }
    if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite score {v}")));
    }
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(raw
        .iter()
        .map(|v| if hi == lo { 0.0 } else { (v - lo) / (hi - lo) })
        .collect())
}

/// Named rule that decided a length-based choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthRule {
    InWindow,
    ShortestAboveFloor,
    TopRanked,
}

impl fmt::Display for LengthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthRule::InWindow => "in_window",
            LengthRule::ShortestAboveFloor => "shortest_above_floor",
            LengthRule::TopRanked => "top_ranked",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Basis {
    /// Average of normalized weighted scores of the winner.
    Score(f64),
    Rule(LengthRule),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Choice {
    pub hadm_id: String,
    pub model_id: String,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub strategy: String,
    pub target: TargetKind,
    pub choices: Vec<Choice>,
    /// Wins per model; models that never win are listed with 0.
    pub tally: BTreeMap<String, usize>,
}

impl SelectionResult {
    fn new(strategy: &str, target: TargetKind, models: &[String], choices: Vec<Choice>) -> Self {
        let mut tally: BTreeMap<String, usize> = models.iter().map(|m| (m.clone(), 0)).collect();
        for c in &choices {
            *tally.entry(c.model_id.clone()).or_default() += 1;
        }
        SelectionResult {
            strategy: strategy.to_string(),
            target,
            choices,
            tally,
        }
    }

    pub fn winner(&self, hadm_id: &str) -> Option<&str> {
        self.choices
            .iter()
            .find(|c| c.hadm_id == hadm_id)
            .map(|c| c.model_id.as_str())
    }

    /// The chosen texts as `(hadm_id, text)` in document order.
    pub fn submission<'a>(&self, candidates: &'a [GeneratedCandidate]) -> Result<Vec<(&str, &'a str)>> {
        let index: HashMap<(&str, &str), &GeneratedCandidate> = candidates
            .iter()
            .filter(|c| c.target == self.target)
            .map(|c| ((c.hadm_id.as_str(), c.model_id.as_str()), c))
            .collect();
        self.choices
            .iter()
            .map(|ch| {
                index
                    .get(&(ch.hadm_id.as_str(), ch.model_id.as_str()))
                    .map(|c| (ch.hadm_id.as_str(), c.text.as_str()))
                    .ok_or_else(|| {
                        Error::MissingCells(vec![format!(
                            "no {} candidate for ({}, {})",
                            self.target, ch.hadm_id, ch.model_id
                        )])
                    })
            })
            .collect()
    }
}

/// Mean of `metric` over the chosen cells. Every chosen cell must hold it.
pub fn selection_mean(table: &ScoreTable, result: &SelectionResult, metric: &str) -> Result<f64> {
    if result.choices.is_empty() {
        return Err(Error::Degenerate("empty selection".into()));
    }
    let mut sum = 0.0;
    for c in &result.choices {
        sum += table
            .get_named(&c.hadm_id, &c.model_id, result.target, metric)
            .ok_or_else(|| {
                Error::MissingCells(vec![format!(
                    "({}, {}, {}, {metric})",
                    c.hadm_id, c.model_id, result.target
                )])
            })?;
    }
    Ok(sum / result.choices.len() as f64)
}

/// Mean of `metric` over every document for one model and target.
pub fn model_mean(table: &ScoreTable, model_id: &str, target: TargetKind, metric: &str) -> Result<f64> {
    let model = table
        .model_position(model_id)
        .ok_or_else(|| Error::UnknownIds(vec![format!("model_id {model_id}")]))?;
    let n = table.documents().len();
    if n == 0 {
        return Err(Error::Degenerate("no documents".into()));
    }
    let mut sum = 0.0;
    for doc in 0..n {
        let cell = Cell { doc, model, target };
        sum += table
            .get(cell, metric)
            .ok_or_else(|| Error::MissingCells(vec![table.describe(cell, metric)]))?;
    }
    Ok(sum / n as f64)
}

/// Writes a submission as CSV with header `hadm_id,text`.
pub fn write_submission<W: Write>(w: W, rows: &[(&str, &str)]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::io("<submission>", e.into());
    writer.write_record(["hadm_id", "text"]).map_err(io)?;
    for (id, text) in rows {
        writer.write_record([id, text]).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::io("<submission>", e))?;
    Ok(())
}

/// Reads a `hadm_id,text` submission CSV.
pub fn read_submission(path: impl AsRef<std::path::Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let headers = reader.headers().map_err(|e| Error::io(path, e.into()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["hadm_id", "text"] {
        return Err(Error::parse(path, 1, "expected header hadm_id,text"));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id = record.get(0).unwrap_or_default().to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate hadm_id {id}")));
        }
        out.push((id, record.get(1).unwrap_or_default().to_string()));
    }
    Ok(out)
}

/// Per-document argmax of the weighted, normalized criteria.
///
/// In strict mode every criterion cell for every model must be present. In
/// lenient mode, per document, models with no criterion value at all are
/// out of the running, metrics missing for any remaining model are dropped,
/// and the surviving weights are rescaled to the original weight sum.
pub fn select_experts(
    table: &ScoreTable,
    config: &DesConfig,
    target: TargetKind,
    policy: MissingPolicy,
    exec: Execution,
) -> Result<SelectionResult> {
    let criteria = config.criteria_for(target);
    if criteria.is_empty() {
        return Err(Error::Config(format!("{} has no criteria for {target}", config.name)));
    }
    if table.models().is_empty() {
        return Err(Error::Degenerate("score table has no models".into()));
    }
    if policy == MissingPolicy::Strict {
        let mut missing = Vec::new();
        for doc in 0..table.documents().len() {
            for model in 0..table.models().len() {
                let cell = Cell { doc, model, target };
                for c in &criteria {
                    if table.get(cell, &c.metric).is_none() {
                        missing.push(table.describe(cell, &c.metric));
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingCells(missing));
        }
    }
    let docs: Vec<usize> = (0..table.documents().len()).collect();
    let choices = exec.try_map(&docs, |&doc| choose_for_document(table, &criteria, target, doc))?;
    Ok(SelectionResult::new(&config.name, target, table.models(), choices))
}

fn choose_for_document(table: &ScoreTable, criteria: &[&Criterion], target: TargetKind, doc: usize) -> Result<Choice> {
    let n_models = table.models().len();
    let value = |model: usize, metric: &str| table.get(Cell { doc, model, target }, metric);

    let models: Vec<usize> = (0..n_models)
        .filter(|&m| criteria.iter().any(|c| value(m, &c.metric).is_some()))
        .collect();
    let hadm_id = &table.documents()[doc];
    if models.is_empty() {
        return Err(Error::NoCandidates(hadm_id.clone()));
    }
    let kept: Vec<&Criterion> = criteria
        .iter()
        .copied()
        .filter(|c| models.iter().all(|&m| value(m, &c.metric).is_some()))
        .collect();
    let full: f64 = criteria.iter().map(|c| c.weight).sum();
    let part: f64 = kept.iter().map(|c| c.weight).sum();
    let rescale = if kept.len() < criteria.len() && part != 0.0 {
        full / part
    } else {
        1.0
    };

    let mut totals = vec![0.0; models.len()];
    for c in &kept {
        let raw: Vec<f64> = models.iter().map(|&m| value(m, &c.metric).expect("kept")).collect();
        let normalized =
            min_max_normalize(&raw).map_err(|e| Error::Degenerate(format!("{hadm_id} {}: {e}", c.metric)))?;
        let w = c.weight * rescale;
        for (t, v) in totals.iter_mut().zip(normalized) {
            *t += w * v;
        }
    }
    let n = kept.len().max(1) as f64;
    let mut best = 0;
    for i in 1..models.len() {
        if totals[i] / n > totals[best] / n {
            best = i;
        }
    }
    Ok(Choice {
        hadm_id: hadm_id.clone(),
        model_id: table.models()[models[best]].clone(),
        basis: Basis::Score(totals[best] / n),
    })
}

/// Word-count window strategy with a ranked model list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthSelectConfig {
    #[serde(default = "default_preferred_min")]
    pub preferred_min: usize,
    #[serde(default = "default_preferred_max")]
    pub preferred_max: usize,
    #[serde(default = "default_hard_min")]
    pub hard_min: usize,
    pub model_ranking: Vec<String>,
}

fn default_preferred_min() -> usize {
    100
}
fn default_preferred_max() -> usize {
    180
}
fn default_hard_min() -> usize {
    70
}

impl LengthSelectConfig {
    pub fn new(model_ranking: Vec<String>) -> Self {
        LengthSelectConfig {
            preferred_min: default_preferred_min(),
            preferred_max: default_preferred_max(),
            hard_min: default_hard_min(),
            model_ranking,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hard_min <= self.preferred_min && self.preferred_min < self.preferred_max) {
            return Err(Error::Config(format!(
                "length window needs hard_min <= preferred_min < preferred_max (got {}, {}, {})",
                self.hard_min, self.preferred_min, self.preferred_max
            )));
        }
        if self.model_ranking.is_empty() {
            return Err(Error::Config("empty model ranking".into()));
        }
        let mut seen = HashSet::new();
        if let Some(m) = self.model_ranking.iter().find(|m| !seen.insert(m.as_str())) {
            return Err(Error::Config(format!("model {m} ranked twice")));
        }
        Ok(())
    }

    /// Applies the three rules to word counts given in ranking order and
    /// returns the winning position.
    pub fn pick(&self, counts: &[usize]) -> (usize, LengthRule) {
        if let Some(i) = counts
            .iter()
            .position(|&c| (self.preferred_min..=self.preferred_max).contains(&c))
        {
            return (i, LengthRule::InWindow);
        }
        let shortest = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= self.hard_min)
            .min_by_key(|(i, &c)| (c, *i));
        match shortest {
            Some((i, _)) => (i, LengthRule::ShortestAboveFloor),
            None => (0, LengthRule::TopRanked),
        }
    }
}

/// Length-window selection for `target`. Every document that has any
/// candidate must have at least one for `target`, and the ranking must cover
/// every model.
pub fn select_by_length(
    candidates: &[GeneratedCandidate],
    target: TargetKind,
    config: &LengthSelectConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let rank: HashMap<&str, usize> = config
        .model_ranking
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();
    let mut unranked: Vec<String> = candidates
        .iter()
        .filter(|c| !rank.contains_key(c.model_id.as_str()))
        .map(|c| format!("model_id {}", c.model_id))
        .collect();
    unranked.sort();
    unranked.dedup();
    if !unranked.is_empty() {
        return Err(Error::UnknownIds(unranked));
    }

    let mut choices = Vec::new();
    for (hadm_id, group) in crate::corpus::group_by_document(candidates) {
        let mut ranked: Vec<&GeneratedCandidate> = group.into_iter().filter(|c| c.target == target).collect();
        if ranked.is_empty() {
            return Err(Error::NoCandidates(format!("{hadm_id} ({target})")));
        }
        ranked.sort_by_key(|c| rank[c.model_id.as_str()]);
        let counts: Vec<usize> = ranked.iter().map(|c| c.word_count).collect();
        let (i, rule) = config.pick(&counts);
        choices.push(Choice {
            hadm_id,
            model_id: ranked[i].model_id.clone(),
            basis: Basis::Rule(rule),
        });
    }
    Ok(SelectionResult::new("des5", target, &config.model_ranking, choices))
}

/// Builds the correlation-weighted configuration: each metric's weight is
/// its Pearson correlation with `overall_metric` in `overall`. Pooled
/// weights apply to both targets; per-target weights get scoped criteria.
pub fn derive_des4_weights(
    scores: &ScoreTable,
    overall: &ScoreTable,
    overall_metric: &str,
    metrics: &[&str],
    pooling: Pooling,
) -> Result<DesConfig> {
    let scoped: Vec<(Option<TargetKind>, Scope)> = match pooling {
        Pooling::Pooled => vec![(None, Scope::Both)],
        Pooling::PerTarget => vec![
            (Some(TargetKind::Bhc), Scope::BhcOnly),
            (Some(TargetKind::Di), Scope::DiOnly),
        ],
    };
    let mut criteria = Vec::new();
    for (target, scope) in scoped {
        for metric in metrics {
            let (x, y) = paired_observations(scores, metric, overall, overall_metric, target);
            let r = pearson(&x, &y).map_err(|e| Error::Degenerate(format!("weight for {metric}: {e}")))?;
            criteria.push(Criterion::new(metric, r, scope));
        }
    }
    DesConfig::new("des4", criteria)
}
