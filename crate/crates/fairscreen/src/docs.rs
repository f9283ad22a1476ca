//! Versioned JSON documents read and written by the CLI and the service.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use fairscreen_core::attributes::RankTables;
use fairscreen_core::inconsistency::{DeviationClass, InversionPair, TimeAnomaly};
use fairscreen_core::indicators::IndicatorSet;
use fairscreen_core::layout::ComparisonLayout;
use fairscreen_core::prefmodel::{AttributeReport, PreferenceModel, TrainingSample};
use fairscreen_core::session::{RevisionStats, SessionSnapshot};
use fairscreen_core::stats::SectionDuration;
use fairscreen_core::{
    parse_application, AppId, Application, Level, Normalization, ParseError, Score, ScoreSheet, Section, Tier,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const GROUP_VERSION: &str = "group-v1";
pub const TABLES_VERSION: &str = "tables-v1";
pub const SCORES_VERSION: &str = "scores-v1";
pub const MODEL_VERSION: &str = "model-v1";
pub const PREDICTIONS_VERSION: &str = "predictions-v1";
pub const STATS_VERSION: &str = "stats-v1";
pub const REPORT_VERSION: &str = "report-v1";
pub const REPLAY_VERSION: &str = "replay-v1";
pub const LAYOUT_VERSION: &str = "layout-v1";
pub const SNAPSHOT_VERSION: &str = "snapshot-v1";

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e))
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let mut out = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
        .expect("documents serialize");
    out.push('\n');
    out
}

/// Writes a document to `out`, or to stdout when absent.
pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>, pretty: bool) -> Result<()> {
    let text = to_json(value, pretty);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn check_version(path: &Path, found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::format(path, format!("schema_version `{found}`, expected `{expected}`")))
    }
}

/// Turns one raw record into an [`Application`].
pub trait Extractor {
    fn extract(&self, record: &Value) -> Result<Application, ParseError>;
}

/// Records that are already structured JSON.
#[derive(Debug, Clone, Copy, Default)]
pub struct StructuredJsonExtractor;

impl Extractor for StructuredJsonExtractor {
    fn extract(&self, record: &Value) -> Result<Application, ParseError> {
        parse_application(record)
    }
}

/// A group file as stored on disk, records not yet validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub schema_version: String,
    pub group_id: String,
    pub applications: Vec<Value>,
}

/// A validated group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub schema_version: String,
    pub group_id: String,
    pub applications: Vec<Application>,
}

impl Group {
    pub fn from_file(file: &GroupFile, path: &Path, extractor: &dyn Extractor) -> Result<Group> {
        check_version(path, &file.schema_version, GROUP_VERSION)?;
        let mut seen = BTreeSet::new();
        let mut applications = Vec::with_capacity(file.applications.len());
        for (index, record) in file.applications.iter().enumerate() {
            let app = extractor.extract(record).map_err(|source| Error::Record { index, source })?;
            if !seen.insert(app.app_id) {
                return Err(Error::DuplicateApp(app.app_id));
            }
            applications.push(app);
        }
        Ok(Group { schema_version: GROUP_VERSION.into(), group_id: file.group_id.clone(), applications })
    }

    pub fn load(path: &Path) -> Result<Group> {
        let file: GroupFile = read_json(path)?;
        Group::from_file(&file, path, &StructuredJsonExtractor)
    }

    pub fn ids(&self) -> Vec<AppId> {
        self.applications.iter().map(|a| a.app_id).collect()
    }

    pub fn get(&self, id: AppId) -> Option<&Application> {
        self.applications.iter().find(|a| a.app_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesFile {
    pub schema_version: String,
    #[serde(default)]
    pub school_rank: BTreeMap<String, u16>,
    #[serde(default)]
    pub publication_tier: BTreeMap<String, Tier>,
    #[serde(default)]
    pub competition_levels: BTreeMap<String, Level>,
}

impl TablesFile {
    pub fn into_tables(self, path: &Path) -> Result<RankTables> {
        check_version(path, &self.schema_version, TABLES_VERSION)?;
        Ok(RankTables::new(self.school_rank, self.publication_tier, self.competition_levels)?)
    }

    pub fn load(path: &Path) -> Result<RankTables> {
        read_json::<TablesFile>(path)?.into_tables(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoresFile {
    pub schema_version: String,
    pub sheets: Vec<ScoreSheet>,
}

impl ScoresFile {
    pub fn load(path: &Path) -> Result<Vec<ScoreSheet>> {
        let file: ScoresFile = read_json(path)?;
        check_version(path, &file.schema_version, SCORES_VERSION)?;
        Ok(file.sheets)
    }
}

/// A trained model, complete enough to reproduce its predictions exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: String,
    /// SHA-256 of the document serialized with this field empty.
    pub version: String,
    pub section: Section,
    pub attribute_schema: String,
    pub attributes: Vec<String>,
    pub w: Vec<f64>,
    pub normalization: Normalization,
    #[serde(rename = "C")]
    pub c: f64,
    pub seed: u64,
    pub training_ids: Vec<AppId>,
    pub training_scores: Vec<Score>,
    pub objective: f64,
    pub iterations: u32,
    pub converged: bool,
}

impl ModelDocument {
    pub fn from_model(model: &PreferenceModel) -> ModelDocument {
        let mut doc = ModelDocument {
            schema_version: MODEL_VERSION.into(),
            version: String::new(),
            section: model.section,
            attribute_schema: model.schema_version.clone(),
            attributes: model.attributes.clone(),
            w: model.weights.clone(),
            normalization: model.normalization.clone(),
            c: model.c,
            seed: model.seed,
            training_ids: model.training_ids().collect(),
            training_scores: model.training_scores(),
            objective: model.objective,
            iterations: model.iterations,
            converged: model.converged,
        };
        doc.version = doc.content_hash();
        doc
    }

    pub fn content_hash(&self) -> String {
        let unversioned = ModelDocument { version: String::new(), ..self.clone() };
        let bytes = serde_json::to_vec(&unversioned).expect("documents serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_model(&self) -> PreferenceModel {
        PreferenceModel {
            section: self.section,
            schema_version: self.attribute_schema.clone(),
            attributes: self.attributes.clone(),
            weights: self.w.clone(),
            normalization: self.normalization.clone(),
            c: self.c,
            seed: self.seed,
            training: self
                .training_ids
                .iter()
                .zip(&self.training_scores)
                .map(|(app_id, score)| TrainingSample { app_id: *app_id, score: *score })
                .collect(),
            objective: self.objective,
            converged: self.converged,
            iterations: self.iterations,
        }
    }

    pub fn load(path: &Path) -> Result<ModelDocument> {
        let doc: ModelDocument = read_json(path)?;
        check_version(path, &doc.schema_version, MODEL_VERSION)?;
        if doc.training_ids.len() != doc.training_scores.len() {
            return Err(Error::format(path, "training_ids and training_scores differ in length"));
        }
        if doc.content_hash() != doc.version {
            return Err(Error::format(path, "version hash does not match content"));
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub app_id: AppId,
    pub human: Score,
    pub v: f64,
    pub s_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsDocument {
    pub schema_version: String,
    pub model_version: String,
    pub section: Section,
    pub predictions: Vec<PredictionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub schema_version: String,
    pub group_id: String,
    #[serde(flatten)]
    pub indicators: IndicatorSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub section: Section,
    pub scored: usize,
    /// Count of applications holding each score 1..=5.
    pub histogram: [usize; 5],
    /// Pearson kurtosis of the assigned scores; absent when they are all
    /// equal or fewer than two.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kurtosis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub close_share: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviations: Option<Vec<DeviationClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inversions: Option<Vec<InversionPair>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_anomalies: Option<Vec<TimeAnomaly>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub group_id: String,
    pub tau: f64,
    pub sections: Vec<SectionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayDocument {
    pub schema_version: String,
    pub events: usize,
    pub final_timestamp: u64,
    pub sheets: Vec<ScoreSheet>,
    pub durations: Vec<SectionDuration>,
    pub revisions: RevisionStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub schema_version: String,
    pub section: Section,
    #[serde(flatten)]
    pub layout: ComparisonLayout,
}

/// Payload of a successful training request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResponse {
    pub model_version: String,
    pub section: Section,
    pub report: AttributeReport,
    pub training_ids: Vec<AppId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDocument {
    pub schema_version: String,
    #[serde(flatten)]
    pub snapshot: SessionSnapshot,
}
