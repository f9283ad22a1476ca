//! Append-only scoring log, replay and revision analytics.
//!
//! Every score change is a [`ScoreEvent`]. The log is never rewritten; the
//! current score sheet is obtained by replaying it (last write wins per
//! application and section). Sessions follow a two-phase lifecycle:
//! open for phase I, submitted (which opens phase II), and finally closed
//! once phase II is submitted.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{AppId, Score, ScoreSheet, Section};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Manual,
    ModelAssisted,
}

/// One timestamped scoring action. `timestamp` is milliseconds since the
/// session started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreEvent {
    pub seq: u64,
    pub timestamp: u64,
    pub app_id: AppId,
    pub section: Section,
    pub score: Score,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("session is closed")]
    SessionClosed,
    #[error("stale sequence number {got}, expected {expected}")]
    StaleSeq { expected: u64, got: u64 },
    #[error("timestamp {got} precedes the previous event at {previous}")]
    TimestampRegression { previous: u64, got: u64 },
    #[error("cannot submit phase {requested:?} while session is in {current:?}")]
    WrongPhase { current: Phase, requested: SubmitPhase },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corrupt log at event {index}: {reason}")]
pub struct CorruptLog {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    OpenI,
    OpenII,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubmitPhase {
    I,
    II,
}

/// The sheet state captured when a phase is submitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub phase: SubmitPhase,
    pub submitted_at: u64,
    /// Sequence number of the last event included in the snapshot.
    pub last_seq: u64,
    pub sheets: Vec<ScoreSheet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_version: Option<String>,
}

/// Score sheets of a group, keyed by application.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBoard {
    sheets: BTreeMap<AppId, ScoreSheet>,
}

impl ScoreBoard {
    /// A board holding an all-zero sheet for every listed application.
    pub fn with_apps(ids: impl IntoIterator<Item = AppId>) -> Self {
        ScoreBoard { sheets: ids.into_iter().map(|id| (id, ScoreSheet::new(id))).collect() }
    }

    pub fn from_sheets(sheets: impl IntoIterator<Item = ScoreSheet>) -> Self {
        ScoreBoard { sheets: sheets.into_iter().map(|s| (s.app_id, s)).collect() }
    }

    pub fn score(&self, app: AppId, section: Section) -> Score {
        self.sheets.get(&app).map(|s| s.score(section)).unwrap_or_default()
    }

    pub fn set(&mut self, app: AppId, section: Section, score: Score) {
        self.sheets.entry(app).or_insert_with(|| ScoreSheet::new(app)).set(section, score);
    }

    pub fn sheet(&self, app: AppId) -> Option<&ScoreSheet> {
        self.sheets.get(&app)
    }

    pub fn sheets(&self) -> impl Iterator<Item = &ScoreSheet> {
        self.sheets.values()
    }

    /// Nonzero scores of a section in application order.
    pub fn assigned(&self, section: Section) -> Vec<(AppId, Score)> {
        self.sheets.values().map(|s| (s.app_id, s.score(section))).filter(|(_, s)| s.is_scored()).collect()
    }
}

/// Checks sequence continuity (1, 2, 3, ...) and timestamp monotonicity.
pub fn validate_log(log: &[ScoreEvent]) -> Result<(), CorruptLog> {
    let mut previous_time = 0;
    for (index, event) in log.iter().enumerate() {
        let expected = index as u64 + 1;
        if event.seq != expected {
            return Err(CorruptLog {
                index,
                reason: alloc::format!("sequence {} where {} was expected", event.seq, expected),
            });
        }
        if event.timestamp < previous_time {
            return Err(CorruptLog {
                index,
                reason: alloc::format!("timestamp {} decreases from {}", event.timestamp, previous_time),
            });
        }
        previous_time = event.timestamp;
    }
    Ok(())
}

/// Replays a log into score sheets, last write wins per key.
pub fn replay(log: &[ScoreEvent]) -> Result<ScoreBoard, CorruptLog> {
    validate_log(log)?;
    let mut board = ScoreBoard::default();
    for e in log {
        board.set(e.app_id, e.section, e.score);
    }
    Ok(board)
}

/// Like [`replay`], starting from an all-zero sheet for each group member.
pub fn replay_for_group(log: &[ScoreEvent], ids: impl IntoIterator<Item = AppId>) -> Result<ScoreBoard, CorruptLog> {
    validate_log(log)?;
    let mut board = ScoreBoard::with_apps(ids);
    for e in log {
        board.set(e.app_id, e.section, e.score);
    }
    Ok(board)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRevisions {
    pub app_id: AppId,
    pub section: Section,
    pub events: u64,
    pub revisions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRevisions {
    pub app_id: AppId,
    pub revisions: u64,
    /// Revisions averaged over the four sections.
    pub mean_per_section: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionStats {
    pub per_key: Vec<KeyRevisions>,
    pub per_app: Vec<AppRevisions>,
    pub total_revisions: u64,
}

/// Revision counts: every event on a key beyond the first is a revision,
/// including re-entries of the same score.
pub fn revision_stats(log: &[ScoreEvent]) -> RevisionStats {
    let mut counts: BTreeMap<(AppId, Section), u64> = BTreeMap::new();
    for e in log {
        *counts.entry((e.app_id, e.section)).or_default() += 1;
    }
    let per_key: Vec<KeyRevisions> = counts
        .iter()
        .map(|((app_id, section), events)| KeyRevisions {
            app_id: *app_id,
            section: *section,
            events: *events,
            revisions: events - 1,
        })
        .collect();
    let mut by_app: BTreeMap<AppId, u64> = BTreeMap::new();
    for k in &per_key {
        *by_app.entry(k.app_id).or_default() += k.revisions;
    }
    let per_app = by_app
        .into_iter()
        .map(|(app_id, revisions)| AppRevisions {
            app_id,
            revisions,
            mean_per_section: revisions as f64 / Section::ALL.len() as f64,
        })
        .collect();
    RevisionStats { total_revisions: per_key.iter().map(|k| k.revisions).sum(), per_key, per_app }
}

/// In-memory session: the event log plus its lifecycle state.
#[derive(Debug, Clone)]
pub struct Session {
    log: Vec<ScoreEvent>,
    phase: Phase,
    board: ScoreBoard,
    snapshots: Vec<SessionSnapshot>,
}

impl Session {
    pub fn new(ids: impl IntoIterator<Item = AppId>) -> Self {
        Session { log: Vec::new(), phase: Phase::OpenI, board: ScoreBoard::with_apps(ids), snapshots: Vec::new() }
    }

    /// Rebuilds a session from a stored log and its snapshots.
    pub fn restore(
        ids: impl IntoIterator<Item = AppId>,
        log: Vec<ScoreEvent>,
        snapshots: Vec<SessionSnapshot>,
    ) -> Result<Self, CorruptLog> {
        let board = replay_for_group(&log, ids)?;
        let phase = match snapshots.iter().map(|s| s.phase).max() {
            None => Phase::OpenI,
            Some(SubmitPhase::I) => Phase::OpenII,
            Some(SubmitPhase::II) => Phase::Closed,
        };
        Ok(Session { log, phase, board, snapshots })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn log(&self) -> &[ScoreEvent] {
        &self.log
    }

    pub fn board(&self) -> &ScoreBoard {
        &self.board
    }

    pub fn snapshots(&self) -> &[SessionSnapshot] {
        &self.snapshots
    }

    pub fn next_seq(&self) -> u64 {
        self.log.len() as u64 + 1
    }

    pub fn last_timestamp(&self) -> u64 {
        self.log.last().map_or(0, |e| e.timestamp)
    }

    /// Checks that `event` may be appended without changing state.
    pub fn check(&self, event: &ScoreEvent) -> Result<(), SessionError> {
        if self.phase == Phase::Closed {
            return Err(SessionError::SessionClosed);
        }
        if event.seq != self.next_seq() {
            return Err(SessionError::StaleSeq { expected: self.next_seq(), got: event.seq });
        }
        if event.timestamp < self.last_timestamp() {
            return Err(SessionError::TimestampRegression { previous: self.last_timestamp(), got: event.timestamp });
        }
        Ok(())
    }

    pub fn append(&mut self, event: ScoreEvent) -> Result<u64, SessionError> {
        self.check(&event)?;
        self.board.set(event.app_id, event.section, event.score);
        self.log.push(event);
        Ok(event.seq)
    }

    /// Builds the next event for a score change, assigning the sequence
    /// number. A timestamp earlier than the last event is raised to it.
    pub fn next_event(
        &self,
        timestamp: u64,
        app_id: AppId,
        section: Section,
        score: Score,
        origin: Origin,
    ) -> ScoreEvent {
        ScoreEvent {
            seq: self.next_seq(),
            timestamp: timestamp.max(self.last_timestamp()),
            app_id,
            section,
            score,
            origin,
        }
    }

    /// The snapshot `submit` would record, without changing state.
    pub fn prepare_submit(
        &self,
        phase: SubmitPhase,
        at: u64,
        model_version: Option<String>,
    ) -> Result<SessionSnapshot, SessionError> {
        let allowed = matches!((self.phase, phase), (Phase::OpenI, SubmitPhase::I) | (Phase::OpenII, SubmitPhase::II));
        if !allowed {
            return Err(SessionError::WrongPhase { current: self.phase, requested: phase });
        }
        Ok(SessionSnapshot {
            phase,
            submitted_at: at.max(self.last_timestamp()),
            last_seq: self.log.len() as u64,
            sheets: self.board.sheets().cloned().collect(),
            model_version,
        })
    }

    pub fn submit(
        &mut self,
        phase: SubmitPhase,
        at: u64,
        model_version: Option<String>,
    ) -> Result<&SessionSnapshot, SessionError> {
        let snapshot = self.prepare_submit(phase, at, model_version)?;
        self.phase = match phase {
            SubmitPhase::I => Phase::OpenII,
            SubmitPhase::II => Phase::Closed,
        };
        self.snapshots.push(snapshot);
        Ok(self.snapshots.last().expect("just pushed"))
    }
}
