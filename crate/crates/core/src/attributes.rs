//! Per-section attribute vectors and their normalization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classify::{classify_competition, classify_project_role};
use crate::model::{AppId, Application, Level, ProjectRole, Section, Tier};
use crate::schema::{Attribute, Orientation, SectionSchema, UNKNOWN_SCHOOL_RANK};

/// Lookup tables for the attributes that need outside information.
///
/// Keys are matched case-insensitively with whitespace collapsed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankTables {
    pub school_rank: BTreeMap<String, u16>,
    pub publication_tier: BTreeMap<String, Tier>,
    pub competition_levels: BTreeMap<String, Level>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("school `{school}` has rank {rank}, outside 1..=200")]
    SchoolRankOutOfRange { school: String, rank: u16 },
    #[error("duplicate key `{0}` after normalization")]
    DuplicateKey(String),
}

fn table_key(name: &str) -> String {
    let mut key = String::with_capacity(name.len());
    for word in name.split_whitespace() {
        if !key.is_empty() {
            key.push(' ');
        }
        key.extend(word.chars().flat_map(|c| c.to_lowercase()));
    }
    key
}

fn normalize_keys<V: Copy>(map: &BTreeMap<String, V>) -> Result<BTreeMap<String, V>, TableError> {
    let mut out = BTreeMap::new();
    for (k, v) in map {
        if out.insert(table_key(k), *v).is_some() {
            return Err(TableError::DuplicateKey(k.clone()));
        }
    }
    Ok(out)
}

impl RankTables {
    /// Validates ranges and normalizes keys for lookup.
    pub fn new(
        school_rank: BTreeMap<String, u16>,
        publication_tier: BTreeMap<String, Tier>,
        competition_levels: BTreeMap<String, Level>,
    ) -> Result<Self, TableError> {
        for (school, rank) in &school_rank {
            if !(1..=200).contains(rank) {
                return Err(TableError::SchoolRankOutOfRange { school: school.clone(), rank: *rank });
            }
        }
        Ok(RankTables {
            school_rank: normalize_keys(&school_rank)?,
            publication_tier: normalize_keys(&publication_tier)?,
            competition_levels: normalize_keys(&competition_levels)?,
        })
    }

    /// Rank of a school, or the sentinel 201 when unknown.
    pub fn school_rank(&self, school: &str) -> f64 {
        self.school_rank.get(&table_key(school)).map(|r| f64::from(*r)).unwrap_or(UNKNOWN_SCHOOL_RANK)
    }

    /// Venue tier; unknown venues are tier D.
    pub fn publication_tier(&self, venue: &str) -> Tier {
        self.publication_tier.get(&table_key(venue)).copied().unwrap_or(Tier::D)
    }

    /// Official level of a competition if it is listed.
    pub fn competition_level(&self, name: &str) -> Option<Level> {
        self.competition_levels.get(&table_key(name)).copied()
    }
}

/// Percentile of a class rank, `1 - (rank - 0.5) / class_size`. Higher is better.
pub fn normalized_student_rank(rank: u32, class_size: u32) -> f64 {
    1.0 - (f64::from(rank) - 0.5) / f64::from(class_size)
}

/// Numeric attributes of one application for one section, aligned to
/// [`SectionSchema`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeVector {
    pub app_id: AppId,
    pub section: Section,
    pub values: Vec<f64>,
}

/// Effective level of a competition: the official table wins over the
/// self-reported level.
pub fn competition_level(app_comp: &crate::model::Competition, tables: &RankTables) -> Level {
    tables.competition_level(&app_comp.name).unwrap_or(app_comp.level)
}

/// Effective tier of a paper: declared tier, else table lookup, else D.
pub fn paper_tier(paper: &crate::model::Paper, tables: &RankTables) -> Tier {
    paper.tier.unwrap_or_else(|| tables.publication_tier(&paper.publication))
}

fn attribute_value(app: &Application, tables: &RankTables, attribute: Attribute) -> f64 {
    let count = |n: usize| n as f64;
    let edu = &app.education;
    match attribute {
        Attribute::Cet4 => edu.cet4.map_or(0.0, f64::from),
        Attribute::Cet6 => edu.cet6.map_or(0.0, f64::from),
        Attribute::Toefl => edu.toefl.map_or(0.0, f64::from),
        Attribute::Ielts => edu.ielts.unwrap_or(0.0),
        Attribute::AwardCount(level) => {
            count(app.competitions.iter().filter(|c| competition_level(c, tables) == level).count())
        }
        Attribute::CompetitionCount(category) => {
            count(app.competitions.iter().filter(|c| classify_competition(&c.name) == category).count())
        }
        Attribute::HonorLevelCount(level) => count(app.honors.iter().filter(|h| h.level == level).count()),
        Attribute::HonorCount(category) => count(app.honors.iter().filter(|h| h.category == category).count()),
        Attribute::PublicationCount(tier) => {
            count(app.activities.papers.iter().filter(|p| paper_tier(p, tables) == tier).count())
        }
        Attribute::Projects => count(app.activities.projects.len()),
        Attribute::ProjectManager => count(
            app.activities.projects.iter().filter(|p| classify_project_role(&p.role) == ProjectRole::Manager).count(),
        ),
        Attribute::ProjectParticipant => count(
            app.activities
                .projects
                .iter()
                .filter(|p| classify_project_role(&p.role) == ProjectRole::Participant)
                .count(),
        ),
        Attribute::SchoolRank => tables.school_rank(&app.basic.school),
        Attribute::StudentRank => normalized_student_rank(edu.student_rank, edu.class_size),
    }
}

/// Derives the attribute vector of `app` for `section`.
pub fn derive_attributes(app: &Application, tables: &RankTables, section: Section) -> AttributeVector {
    let schema = SectionSchema::of(section);
    AttributeVector {
        app_id: app.app_id,
        section,
        values: schema.attributes.iter().map(|a| attribute_value(app, tables, *a)).collect(),
    }
}

/// Per-attribute min-max scaling to `[0, 1]` fitted over a group.
///
/// Lower-is-better attributes are flipped so 1 is always the best value.
/// Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub orientation: Vec<Orientation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalizationError {
    #[error("cannot fit normalization on an empty group")]
    Empty,
    #[error("vector of application {app} has {got} values, schema expects {expected}")]
    SchemaMismatch { app: AppId, expected: usize, got: usize },
    #[error("non-finite attribute value in application {0}")]
    NonFinite(AppId),
}

impl Normalization {
    pub fn fit(section: Section, vectors: &[AttributeVector]) -> Result<Self, NormalizationError> {
        let schema = SectionSchema::of(section);
        let m = schema.len();
        if vectors.is_empty() {
            return Err(NormalizationError::Empty);
        }
        let mut min = vec![f64::INFINITY; m];
        let mut max = vec![f64::NEG_INFINITY; m];
        for v in vectors {
            if v.values.len() != m {
                return Err(NormalizationError::SchemaMismatch { app: v.app_id, expected: m, got: v.values.len() });
            }
            if v.values.iter().any(|x| !x.is_finite()) {
                return Err(NormalizationError::NonFinite(v.app_id));
            }
            for (k, x) in v.values.iter().enumerate() {
                min[k] = min[k].min(*x);
                max[k] = max[k].max(*x);
            }
        }
        Ok(Normalization { min, max, orientation: schema.attributes.iter().map(|a| a.orientation()).collect() })
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>, NormalizationError> {
        if values.len() != self.len() {
            return Err(NormalizationError::SchemaMismatch { app: AppId(0), expected: self.len(), got: values.len() });
        }
        Ok(values
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let range = self.max[k] - self.min[k];
                if range <= 0.0 {
                    0.0
                } else {
                    match self.orientation[k] {
                        Orientation::HigherIsBetter => (x - self.min[k]) / range,
                        Orientation::LowerIsBetter => (self.max[k] - x) / range,
                    }
                }
            })
            .collect())
    }

    pub fn apply_all(&self, vectors: &[AttributeVector]) -> Result<Vec<Vec<f64>>, NormalizationError> {
        vectors
            .iter()
            .map(|v| {
                self.apply(&v.values).map_err(|e| match e {
                    NormalizationError::SchemaMismatch { expected, got, .. } => {
                        NormalizationError::SchemaMismatch { app: v.app_id, expected, got }
                    }
                    other => other,
                })
            })
            .collect()
    }
}
