//! Score tables: native metric computation, external score ingestion, and
//! the eight-metric overall score.
//!
//! A [`ScoreTable`] is a dense store indexed by (document, model, target,
//! metric). Documents and models keep their insertion order; metrics are
//! always kept in a canonical order so that the same cells produce the same
//! table no matter how they were loaded.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DischargeSummary, ExtractedTargets, GeneratedCandidate, TargetKind};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::readability::{self, FamiliarWords};
use crate::relevance::{self, Interned};
use crate::textprep::{metric_words, tokenize};

/// The eight metrics averaged into the challenge overall score.
pub const CHALLENGE_METRICS: [&str; 8] = [
    "bleu4",
    "rouge_1",
    "rouge_2",
    "rouge_l",
    "bertscore",
    "meteor",
    "alignscore",
    "medcon",
];

/// Suffix for metrics computed with the whole discharge summary as reference.
pub const DS_SUFFIX: &str = "_ds";

/// Name of the derived overall-score column.
pub const OVERALL: &str = "overall";

const CANONICAL_ORDER: &[&str] = &[
    "bleu4",
    "rouge_1",
    "rouge_2",
    "rouge_l",
    "bertscore",
    "meteor",
    "alignscore",
    "medcon",
    "overall",
    "fkgl",
    "dcrs",
    "cli",
    "summac",
    "bleu4_ds",
    "rouge_1_ds",
    "rouge_2_ds",
    "rouge_l_ds",
    "bertscore_ds",
    "meteor_ds",
    "alignscore_ds",
    "medcon_ds",
    "summac_ds",
];

fn metric_rank(name: &str) -> (usize, &str) {
    (
        CANONICAL_ORDER.iter().position(|m| *m == name).unwrap_or(usize::MAX),
        name,
    )
}

/// Metrics computed by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NativeMetric {
    Bleu4,
    Rouge1,
    Rouge2,
    RougeL,
    Meteor,
    Fkgl,
    Dcrs,
    Cli,
}

impl NativeMetric {
    pub const ALL: [NativeMetric; 8] = [
        NativeMetric::Bleu4,
        NativeMetric::Rouge1,
        NativeMetric::Rouge2,
        NativeMetric::RougeL,
        NativeMetric::Meteor,
        NativeMetric::Fkgl,
        NativeMetric::Dcrs,
        NativeMetric::Cli,
    ];

    pub const REFERENCE_BASED: [NativeMetric; 5] = [
        NativeMetric::Bleu4,
        NativeMetric::Rouge1,
        NativeMetric::Rouge2,
        NativeMetric::RougeL,
        NativeMetric::Meteor,
    ];

    pub const READABILITY: [NativeMetric; 3] = [NativeMetric::Fkgl, NativeMetric::Dcrs, NativeMetric::Cli];

    pub fn name(self) -> &'static str {
        match self {
            NativeMetric::Bleu4 => "bleu4",
            NativeMetric::Rouge1 => "rouge_1",
            NativeMetric::Rouge2 => "rouge_2",
            NativeMetric::RougeL => "rouge_l",
            NativeMetric::Meteor => "meteor",
            NativeMetric::Fkgl => "fkgl",
            NativeMetric::Dcrs => "dcrs",
            NativeMetric::Cli => "cli",
        }
    }

    pub fn needs_reference(self) -> bool {
        !Self::READABILITY.contains(&self)
    }

    /// Column name when scored against the whole discharge summary.
    pub fn ds_name(self) -> String {
        format!("{}{DS_SUFFIX}", self.name())
    }
}

impl fmt::Display for NativeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NativeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NativeMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown native metric {s:?}")))
    }
}

/// True for names this crate computes itself, including `_ds` variants.
pub fn is_native_name(name: &str) -> bool {
    NativeMetric::ALL.iter().any(|m| m.name() == name)
        || NativeMetric::REFERENCE_BASED.iter().any(|m| m.ds_name() == name)
}

/// How selection and aggregation treat absent cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    #[default]
    Strict,
    Lenient,
}

/// One row of the long-form score CSV: `hadm_id,model_id,target,metric,value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub hadm_id: String,
    pub model_id: String,
    pub target: TargetKind,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub doc: usize,
    pub model: usize,
    pub target: TargetKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    documents: Vec<String>,
    doc_index: HashMap<String, usize>,
    models: Vec<String>,
    model_index: HashMap<String, usize>,
    metrics: Vec<String>,
    columns: Vec<Vec<Option<f64>>>,
}

fn index_of(items: &[String], kind: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        if index.insert(item.clone(), i).is_some() {
            return Err(Error::Config(format!("duplicate {kind} {item:?}")));
        }
    }
    Ok(index)
}

impl ScoreTable {
    pub fn new(documents: Vec<String>, models: Vec<String>) -> Result<Self> {
        Ok(ScoreTable {
            doc_index: index_of(&documents, "document")?,
            model_index: index_of(&models, "model")?,
            documents,
            models,
            metrics: Vec::new(),
            columns: Vec::new(),
        })
    }

    /// Documents and models in first-appearance order of `candidates`.
    pub fn from_candidates(candidates: &[GeneratedCandidate]) -> Self {
        let mut docs = Vec::new();
        let mut models = Vec::new();
        let mut seen_docs = BTreeSet::new();
        let mut seen_models = BTreeSet::new();
        for c in candidates {
            if seen_docs.insert(c.hadm_id.as_str()) {
                docs.push(c.hadm_id.clone());
            }
            if seen_models.insert(c.model_id.as_str()) {
                models.push(c.model_id.clone());
            }
        }
        ScoreTable::new(docs, models).expect("deduplicated ids")
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn doc_position(&self, hadm_id: &str) -> Option<usize> {
        self.doc_index.get(hadm_id).copied()
    }

    pub fn model_position(&self, model_id: &str) -> Option<usize> {
        self.model_index.get(model_id).copied()
    }

    pub fn has_metric(&self, metric: &str) -> bool {
        self.metric_position(metric).is_some()
    }

    fn metric_position(&self, metric: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == metric)
    }

    fn n_cells(&self) -> usize {
        self.documents.len() * self.models.len() * 2
    }

    fn offset(&self, cell: Cell) -> usize {
        (cell.doc * self.models.len() + cell.model) * 2 + cell.target.index()
    }

    /// Adds an empty column if absent and returns its position.
    pub fn ensure_metric(&mut self, metric: &str) -> usize {
        if let Some(k) = self.metric_position(metric) {
            return k;
        }
        let at = self
            .metrics
            .iter()
            .position(|m| metric_rank(m) > metric_rank(metric))
            .unwrap_or(self.metrics.len());
        self.metrics.insert(at, metric.to_string());
        self.columns.insert(at, vec![None; self.n_cells()]);
        at
    }

    pub fn get(&self, cell: Cell, metric: &str) -> Option<f64> {
        let k = self.metric_position(metric)?;
        self.columns[k][self.offset(cell)]
    }

    pub fn get_named(&self, hadm_id: &str, model_id: &str, target: TargetKind, metric: &str) -> Option<f64> {
        let cell = Cell {
            doc: self.doc_position(hadm_id)?,
            model: self.model_position(model_id)?,
            target,
        };
        self.get(cell, metric)
    }

    /// Writes a cell, overwriting any previous value.
    pub fn set(&mut self, cell: Cell, metric: &str, value: f64) {
        let k = self.ensure_metric(metric);
        let off = self.offset(cell);
        self.columns[k][off] = Some(value);
    }

    /// Writes a cell that must not already hold a value.
    pub fn insert(&mut self, cell: Cell, metric: &str, value: f64) -> Result<()> {
        if self.get(cell, metric).is_some() {
            return Err(Error::DuplicateCell(self.describe(cell, metric)));
        }
        self.set(cell, metric, value);
        Ok(())
    }

    pub fn describe(&self, cell: Cell, metric: &str) -> String {
        format!(
            "({}, {}, {}, {metric})",
            self.documents[cell.doc], self.models[cell.model], cell.target
        )
    }

    /// Every cell in document, model, target order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.documents.len()).flat_map(move |doc| {
            (0..self.models.len()).flat_map(move |model| {
                TargetKind::ALL
                    .into_iter()
                    .map(move |target| Cell { doc, model, target })
            })
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = ScoreRow> + '_ {
        self.cells().flat_map(move |cell| {
            self.metrics.iter().enumerate().filter_map(move |(k, metric)| {
                self.columns[k][self.offset(cell)].map(|value| ScoreRow {
                    hadm_id: self.documents[cell.doc].clone(),
                    model_id: self.models[cell.model].clone(),
                    target: cell.target,
                    metric: metric.clone(),
                    value,
                })
            })
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_score_rows(w, self.rows())
    }

    /// Builds a table from long-form rows, indexing documents and models in
    /// first-appearance order. Duplicate cells are errors.
    pub fn from_rows(rows: &[ScoreRow]) -> Result<Self> {
        let mut docs = Vec::new();
        let mut models = Vec::new();
        let mut seen_docs = BTreeSet::new();
        let mut seen_models = BTreeSet::new();
        for r in rows {
            if seen_docs.insert(r.hadm_id.as_str()) {
                docs.push(r.hadm_id.clone());
            }
            if seen_models.insert(r.model_id.as_str()) {
                models.push(r.model_id.clone());
            }
        }
        let mut table = ScoreTable::new(docs, models)?;
        table.merge_rows(rows, MergeMode::Any)?;
        Ok(table)
    }

    /// Merges rows for documents and models already in the table. The merge
    /// is all-or-nothing: on error the table is unchanged.
    pub fn merge_rows(&mut self, rows: &[ScoreRow], mode: MergeMode) -> Result<()> {
        if mode == MergeMode::External {
            if let Some(r) = rows.iter().find(|r| is_native_name(&r.metric)) {
                return Err(Error::MetricCollision(r.metric.clone()));
            }
        }
        let mut unknown = BTreeSet::new();
        for r in rows {
            if self.doc_position(&r.hadm_id).is_none() {
                unknown.insert(format!("hadm_id {}", r.hadm_id));
            }
            if self.model_position(&r.model_id).is_none() {
                unknown.insert(format!("model_id {}", r.model_id));
            }
        }
        if !unknown.is_empty() {
            return Err(Error::UnknownIds(unknown.into_iter().collect()));
        }
        let mut seen = BTreeSet::new();
        for r in rows {
            let cell = self.cell_of(r);
            if self.get(cell, &r.metric).is_some() || !seen.insert((self.offset(cell), r.metric.as_str())) {
                return Err(Error::DuplicateCell(self.describe(cell, &r.metric)));
            }
        }
        for r in rows {
            let cell = self.cell_of(r);
            self.set(cell, &r.metric, r.value);
        }
        Ok(())
    }

    fn cell_of(&self, r: &ScoreRow) -> Cell {
        Cell {
            doc: self.doc_index[&r.hadm_id],
            model: self.model_index[&r.model_id],
            target: r.target,
        }
    }

    /// Observations of `metric` for every cell where it is present.
    pub fn column(&self, metric: &str) -> Vec<(Cell, f64)> {
        let Some(k) = self.metric_position(metric) else {
            return Vec::new();
        };
        self.cells()
            .filter_map(|cell| self.columns[k][self.offset(cell)].map(|v| (cell, v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMode {
    /// Externally computed metrics only; native names are rejected.
    External,
    Any,
}

pub fn write_score_rows<W: Write>(w: W, rows: impl IntoIterator<Item = ScoreRow>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer
        .write_record(["hadm_id", "model_id", "target", "metric", "value"])
        .map_err(csv_io)?;
    for r in rows {
        writer
            .write_record([
                &r.hadm_id,
                &r.model_id,
                r.target.as_str(),
                &r.metric,
                &r.value.to_string(),
            ])
            .map_err(csv_io)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::io("<csv output>", std::io::Error::other(e))
}

/// Reads a long-form score CSV. Row numbers in errors are 1-based file lines.
pub fn read_score_rows<R: Read>(reader: R, path: &Path) -> Result<Vec<ScoreRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let expected = ["hadm_id", "model_id", "target", "metric", "value"];
    let header = rdr.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::parse(path, 1, format!("expected header {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let target: TargetKind = record[2]
            .parse()
            .map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let value: f64 = record[4]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("value {:?} is not a number", &record[4])))?;
        if !value.is_finite() {
            return Err(Error::parse(
                path,
                line,
                format!("value {:?} is not finite", &record[4]),
            ));
        }
        rows.push(ScoreRow {
            hadm_id: record[0].to_string(),
            model_id: record[1].to_string(),
            target,
            metric: record[3].to_string(),
            value,
        });
    }
    Ok(rows)
}

pub fn read_score_file(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_score_rows(std::io::BufReader::new(file), path)
}

/// Merges an external-scores CSV into `table`.
pub fn load_external_scores(path: impl AsRef<Path>, mut table: ScoreTable) -> Result<ScoreTable> {
    let rows = read_score_file(path)?;
    table.merge_rows(&rows, MergeMode::External)?;
    Ok(table)
}

/// Reference texts keyed by admission.
#[derive(Debug, Clone, Default)]
pub struct References {
    by_doc: HashMap<String, ExtractedTargets>,
}

impl References {
    pub fn new(targets: impl IntoIterator<Item = ExtractedTargets>) -> Self {
        References {
            by_doc: targets.into_iter().map(|t| (t.hadm_id.clone(), t)).collect(),
        }
    }

    pub fn get(&self, hadm_id: &str, target: TargetKind) -> Option<&str> {
        self.by_doc.get(hadm_id).map(|t| t.get(target))
    }
}

fn reference_values(candidate: &[String], reference: &[String], ids: &Interned, metric: NativeMetric) -> f64 {
    match metric {
        NativeMetric::Bleu4 => relevance::bleu4_ids(&ids.cand, &ids.refs),
        NativeMetric::Rouge1 => relevance::rouge_n_ids(&ids.cand, &ids.refs, 1),
        NativeMetric::Rouge2 => relevance::rouge_n_ids(&ids.cand, &ids.refs, 2),
        NativeMetric::RougeL => relevance::rouge_l_ids(&ids.cand, &ids.refs),
        NativeMetric::Meteor => relevance::meteor_tokens(candidate, reference),
        _ => unreachable!("readability metrics take no reference"),
    }
}

type CellValues = Vec<(String, Option<f64>)>;

fn score_candidate(
    c: &GeneratedCandidate,
    reference: Option<&str>,
    metrics: &[NativeMetric],
    familiar: &FamiliarWords,
    suffix: &str,
) -> CellValues {
    let mut out = Vec::with_capacity(metrics.len());
    let reference_based: Vec<NativeMetric> = metrics.iter().copied().filter(|m| m.needs_reference()).collect();
    if let (false, Some(reference)) = (reference_based.is_empty(), reference) {
        let cand = metric_words(&c.text);
        let refs = metric_words(reference);
        let ids = relevance::intern(&cand, &refs);
        for m in reference_based {
            out.push((
                format!("{}{suffix}", m.name()),
                Some(reference_values(&cand, &refs, &ids, m)),
            ));
        }
    }
    if metrics.iter().any(|m| !m.needs_reference()) {
        let t = tokenize(&c.text);
        for &m in metrics.iter().filter(|m| !m.needs_reference()) {
            let v = match m {
                NativeMetric::Fkgl => readability::fkgl(&t).ok(),
                NativeMetric::Dcrs => readability::dcrs(&t, familiar).ok(),
                NativeMetric::Cli => readability::cli(&t).ok(),
                _ => unreachable!(),
            };
            out.push((m.name().to_string(), v));
        }
    }
    out
}

fn assemble(candidates: &[GeneratedCandidate], values: Vec<CellValues>) -> Result<ScoreTable> {
    let mut table = ScoreTable::from_candidates(candidates);
    for (c, cell_values) in candidates.iter().zip(values) {
        let cell = Cell {
            doc: table.doc_index[&c.hadm_id],
            model: table.model_index[&c.model_id],
            target: c.target,
        };
        for (metric, v) in cell_values {
            table.ensure_metric(&metric);
            if let Some(v) = v {
                table.insert(cell, &metric, v)?;
            }
        }
    }
    Ok(table)
}

/// Scores candidates against their reference targets (reference-based
/// metrics) and on their own (readability). Readability cells for texts
/// with no words or sentences are left empty.
pub fn compute_native_scores(
    candidates: &[GeneratedCandidate],
    references: &References,
    metrics: &[NativeMetric],
    exec: Execution,
) -> Result<ScoreTable> {
    let familiar = FamiliarWords::dale_chall();
    let needs_reference = metrics.iter().any(|m| m.needs_reference());
    if needs_reference {
        if let Some(c) = candidates
            .iter()
            .find(|c| references.get(&c.hadm_id, c.target).is_none())
        {
            return Err(Error::MissingReference {
                hadm_id: c.hadm_id.clone(),
                target: c.target.to_string(),
            });
        }
    }
    let values = exec.map(candidates, |c| {
        score_candidate(c, references.get(&c.hadm_id, c.target), metrics, familiar, "")
    });
    assemble(candidates, values)
}

/// Scores candidates against the discharge summary body (targets removed).
/// Columns carry the `_ds` suffix.
pub fn compute_factuality_proxies(
    candidates: &[GeneratedCandidate],
    summaries: &[DischargeSummary],
    metrics: &[NativeMetric],
    exec: Execution,
) -> Result<ScoreTable> {
    if let Some(m) = metrics.iter().find(|m| !m.needs_reference()) {
        return Err(Error::Config(format!("{m} does not take a reference")));
    }
    let bodies: HashMap<&str, &str> = summaries
        .iter()
        .map(|s| (s.hadm_id.as_str(), s.body_without_targets.as_str()))
        .collect();
    if let Some(c) = candidates.iter().find(|c| !bodies.contains_key(c.hadm_id.as_str())) {
        return Err(Error::UnresolvedDocument(c.hadm_id.clone()));
    }
    let familiar = FamiliarWords::dale_chall();
    let values = exec.map(candidates, |c| {
        score_candidate(c, Some(bodies[c.hadm_id.as_str()]), metrics, familiar, DS_SUFFIX)
    });
    assemble(candidates, values)
}

/// Copies every cell of `other` into `table`; both must index the same
/// documents and models.
pub fn merge_tables(table: &mut ScoreTable, other: &ScoreTable) -> Result<()> {
    let rows: Vec<ScoreRow> = other.rows().collect();
    table.merge_rows(&rows, MergeMode::Any)
}

/// Mean of the eight challenge metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallScore {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
}

pub fn overall_score<'a>(components: impl IntoIterator<Item = (&'a str, f64)>) -> Result<OverallScore> {
    let components: BTreeMap<String, f64> = components.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let missing: Vec<&str> = CHALLENGE_METRICS
        .iter()
        .copied()
        .filter(|m| !components.contains_key(*m))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Components(format!("missing {}", missing.join(", "))));
    }
    let extra: Vec<&str> = components
        .keys()
        .map(String::as_str)
        .filter(|k| !CHALLENGE_METRICS.contains(k))
        .collect();
    if !extra.is_empty() {
        return Err(Error::Components(format!("unexpected {}", extra.join(", "))));
    }
    let value = CHALLENGE_METRICS.iter().map(|m| components[*m]).sum::<f64>() / CHALLENGE_METRICS.len() as f64;
    Ok(OverallScore { value, components })
}

/// Adds an `overall` column for every (document, model, target) cell that
/// has a candidate. In strict mode a cell with some but not all of the
/// eight components is an error; in lenient mode it is skipped.
pub fn add_overall_column(table: &mut ScoreTable, policy: MissingPolicy) -> Result<()> {
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for cell in table.cells() {
        let present: Vec<(&str, f64)> = CHALLENGE_METRICS
            .iter()
            .filter_map(|m| table.get(cell, m).map(|v| (*m, v)))
            .collect();
        if present.len() == CHALLENGE_METRICS.len() {
            values.push((cell, overall_score(present)?.value));
        } else if !present.is_empty() && policy == MissingPolicy::Strict {
            for m in CHALLENGE_METRICS.iter().filter(|m| table.get(cell, m).is_none()) {
                missing.push(table.describe(cell, m));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCells(missing));
    }
    table.ensure_metric(OVERALL);
    for (cell, v) in values {
        table.set(cell, OVERALL, v);
    }
    Ok(())
}

/// Headline figure: mean of the per-target overall scores that exist.
pub fn headline(bhc: Option<f64>, di: Option<f64>) -> Option<f64> {
    match (bhc, di) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        (a, b) => a.or(b),
    }
}
