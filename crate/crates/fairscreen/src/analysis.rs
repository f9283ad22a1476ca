//! The computations shared by the CLI and the service. Both front ends call
//! these functions, so identical inputs give byte-identical documents.

use fairscreen_core::attributes::{derive_attributes, AttributeVector, Normalization, RankTables};
use fairscreen_core::inconsistency::{
    classify_deviations, close_share, find_inversions, flag_time_anomalies, InconsistencyError,
};
use fairscreen_core::indicators::indicator_set;
use fairscreen_core::layout::{build_layout, EmbeddingConfig};
use fairscreen_core::prefmodel::{fit, predict, ModelError, TrainConfig, TrainingSample};
use fairscreen_core::session::{replay_for_group, revision_stats, ScoreBoard, ScoreEvent};
use fairscreen_core::stats::{kurtosis, section_durations, SectionDuration};
use fairscreen_core::{AppId, Score, Section};

use crate::docs::{
    Group, LayoutDocument, ModelDocument, PredictionRow, PredictionsDocument, ReplayDocument, ReportDocument,
    SectionReport, StatsDocument, LAYOUT_VERSION, PREDICTIONS_VERSION, REPLAY_VERSION, REPORT_VERSION, STATS_VERSION,
};
use crate::error::{Error, Result};

/// A validated group together with its lookup tables.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub group: Group,
    pub tables: RankTables,
}

impl Workspace {
    pub fn new(group: Group, tables: RankTables) -> Self {
        Workspace { group, tables }
    }

    pub fn vectors(&self, section: Section) -> Vec<AttributeVector> {
        self.group.applications.iter().map(|a| derive_attributes(a, &self.tables, section)).collect()
    }

    pub fn human_scores(&self, board: &ScoreBoard, section: Section) -> Vec<Score> {
        self.group.applications.iter().map(|a| board.score(a.app_id, section)).collect()
    }

    /// Every application's sheet, in group order, from a log replay.
    pub fn replay(&self, log: &[ScoreEvent]) -> Result<ScoreBoard> {
        Ok(replay_for_group(log, self.group.ids())?)
    }
}

/// Trains a model on the listed applications with their current scores.
pub fn train_model(
    ws: &Workspace,
    board: &ScoreBoard,
    section: Section,
    ids: &[AppId],
    c: f64,
    seed: u64,
) -> Result<ModelDocument> {
    let samples = ids
        .iter()
        .map(|id| {
            if ws.group.get(*id).is_none() {
                return Err(Error::Model(ModelError::UnknownApp(*id)));
            }
            Ok(TrainingSample { app_id: *id, score: board.score(*id, section) })
        })
        .collect::<Result<Vec<_>>>()?;
    let config = TrainConfig { c, seed, ..TrainConfig::default() };
    let model = fit(section, &ws.vectors(section), &samples, &config)?;
    Ok(ModelDocument::from_model(&model))
}

pub fn predictions(ws: &Workspace, board: &ScoreBoard, model: &ModelDocument) -> Result<PredictionsDocument> {
    let human = ws.human_scores(board, model.section);
    let preds = predict(&model.to_model(), &ws.vectors(model.section), &human)?;
    Ok(PredictionsDocument {
        schema_version: PREDICTIONS_VERSION.into(),
        model_version: model.version.clone(),
        section: model.section,
        predictions: preds
            .into_iter()
            .zip(human)
            .map(|(p, human)| PredictionRow { app_id: p.app_id, human, v: p.v, s_prime: p.s_prime })
            .collect(),
    })
}

pub fn stats(ws: &Workspace, selected: Option<AppId>) -> Result<StatsDocument> {
    if let Some(id) = selected {
        if ws.group.get(id).is_none() {
            return Err(Error::UnknownApp(id));
        }
    }
    Ok(StatsDocument {
        schema_version: STATS_VERSION.into(),
        group_id: ws.group.group_id.clone(),
        indicators: indicator_set(&ws.group.applications, &ws.tables, selected)?,
    })
}

fn section_report(
    ws: &Workspace,
    board: &ScoreBoard,
    section: Section,
    model: Option<&ModelDocument>,
    durations: Option<&[SectionDuration]>,
    tau: f64,
) -> Result<SectionReport> {
    let human = ws.human_scores(board, section);
    let assigned: Vec<f64> = human.iter().filter(|s| s.is_scored()).map(|s| f64::from(s.value())).collect();
    let mut histogram = [0; 5];
    for s in human.iter().filter(|s| s.is_scored()) {
        histogram[usize::from(s.value()) - 1] += 1;
    }
    let mut report = SectionReport {
        section,
        scored: assigned.len(),
        histogram,
        kurtosis: kurtosis(&assigned).ok(),
        model_version: None,
        close_share: None,
        deviations: None,
        inversions: None,
        time_anomalies: None,
    };
    if let Some(model) = model {
        let preds = predictions(ws, board, model)?;
        let ids: Vec<AppId> = preds.predictions.iter().map(|p| p.app_id).collect();
        let h: Vec<f64> = human.iter().map(|s| f64::from(s.value())).collect();
        let p: Vec<f64> = preds.predictions.iter().map(|p| p.s_prime).collect();
        let deviations = classify_deviations(section, &ids, &h, &p, tau)?;
        report.close_share = close_share(&deviations);
        report.deviations = Some(deviations);
        report.inversions = Some(find_inversions(&ids, &h, &p)?);
        report.model_version = Some(model.version.clone());
    }
    if let Some(durations) = durations {
        let mine: Vec<SectionDuration> = durations.iter().filter(|d| d.section == section).cloned().collect();
        report.time_anomalies = match flag_time_anomalies(&mine) {
            Ok(a) => Some(a),
            Err(InconsistencyError::TooFewObservations { .. }) => None,
            Err(e) => return Err(e.into()),
        };
    }
    Ok(report)
}

/// Inconsistency and kurtosis report over all four sections. Deviation
/// classes need a model for the section; time anomalies need the log.
pub fn report(
    ws: &Workspace,
    board: &ScoreBoard,
    models: &[ModelDocument],
    log: Option<&[ScoreEvent]>,
    tau: f64,
) -> Result<ReportDocument> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Usage(format!("tau must be a nonnegative number, got {tau}")));
    }
    let durations = log.map(section_durations);
    let sections = Section::ALL
        .iter()
        .map(|section| {
            let model = models.iter().rev().find(|m| m.section == *section);
            section_report(ws, board, *section, model, durations.as_deref(), tau)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportDocument { schema_version: REPORT_VERSION.into(), group_id: ws.group.group_id.clone(), tau, sections })
}

pub fn replay(ws: Option<&Workspace>, log: &[ScoreEvent]) -> Result<ReplayDocument> {
    let board = match ws {
        Some(ws) => ws.replay(log)?,
        None => fairscreen_core::session::replay(log)?,
    };
    Ok(ReplayDocument {
        schema_version: REPLAY_VERSION.into(),
        events: log.len(),
        final_timestamp: log.last().map_or(0, |e| e.timestamp),
        sheets: board.sheets().cloned().collect(),
        durations: section_durations(log),
        revisions: revision_stats(log),
    })
}

pub fn layout(
    ws: &Workspace,
    board: &ScoreBoard,
    section: Section,
    config: &EmbeddingConfig,
) -> Result<LayoutDocument> {
    let vectors = ws.vectors(section);
    let rows = Normalization::fit(section, &vectors)?.apply_all(&vectors)?;
    let layout = build_layout(&ws.group.ids(), &rows, &ws.human_scores(board, section), config)?;
    Ok(LayoutDocument { schema_version: LAYOUT_VERSION.into(), section, layout })
}
