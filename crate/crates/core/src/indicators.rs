//! The twelve group-wide indicators of the statistical sidebar.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::attributes::{competition_level, normalized_student_rank, paper_tier, RankTables};
use crate::model::{AppId, Application, Level};
use crate::stats::{box_stats, kde, Bandwidth, BoxStats, DensityCurve, StatsError};

/// Version tag of the indicator composition.
pub const INDICATOR_SET_VERSION: &str = "indicators-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatorKind {
    SchoolRank,
    StudentRank,
    CompetitionCount(Level),
    HonorCount(Level),
    PublicationCount,
    /// Best venue tier held, A = 4 .. D = 1, 0 without publications.
    BestPublicationTier,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 12] = [
        IndicatorKind::SchoolRank,
        IndicatorKind::StudentRank,
        IndicatorKind::CompetitionCount(Level::School),
        IndicatorKind::CompetitionCount(Level::Provincial),
        IndicatorKind::CompetitionCount(Level::National),
        IndicatorKind::CompetitionCount(Level::International),
        IndicatorKind::HonorCount(Level::School),
        IndicatorKind::HonorCount(Level::Provincial),
        IndicatorKind::HonorCount(Level::National),
        IndicatorKind::HonorCount(Level::International),
        IndicatorKind::PublicationCount,
        IndicatorKind::BestPublicationTier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::SchoolRank => "School Rank",
            IndicatorKind::StudentRank => "Normalized Student Rank",
            IndicatorKind::CompetitionCount(Level::School) => "School Competition Awards",
            IndicatorKind::CompetitionCount(Level::Provincial) => "Provincial Competition Awards",
            IndicatorKind::CompetitionCount(Level::National) => "National Competition Awards",
            IndicatorKind::CompetitionCount(Level::International) => "International Competition Awards",
            IndicatorKind::HonorCount(Level::School) => "School Honors",
            IndicatorKind::HonorCount(Level::Provincial) => "Provincial Honors",
            IndicatorKind::HonorCount(Level::National) => "National Honors",
            IndicatorKind::HonorCount(Level::International) => "International Honors",
            IndicatorKind::PublicationCount => "Publications",
            IndicatorKind::BestPublicationTier => "Best Publication Tier",
        }
    }

    pub fn value(self, app: &Application, tables: &RankTables) -> f64 {
        let count = |n: usize| n as f64;
        match self {
            IndicatorKind::SchoolRank => tables.school_rank(&app.basic.school),
            IndicatorKind::StudentRank => normalized_student_rank(app.education.student_rank, app.education.class_size),
            IndicatorKind::CompetitionCount(level) => {
                count(app.competitions.iter().filter(|c| competition_level(c, tables) == level).count())
            }
            IndicatorKind::HonorCount(level) => count(app.honors.iter().filter(|h| h.level == level).count()),
            IndicatorKind::PublicationCount => count(app.activities.papers.len()),
            IndicatorKind::BestPublicationTier => {
                app.activities.papers.iter().map(|p| paper_tier(p, tables).numeric()).fold(0.0, f64::max)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub kind: IndicatorKind,
    pub name: String,
    pub app_ids: Vec<AppId>,
    pub values: Vec<f64>,
    pub box_stats: BoxStats,
    pub density: DensityCurve,
    /// Value of the selected application, drawn as a highlighted dot.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub highlight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSet {
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<AppId>,
    pub indicators: Vec<Indicator>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndicatorError {
    #[error("group is empty")]
    EmptyGroup,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub fn indicator_set(
    group: &[Application],
    tables: &RankTables,
    selected: Option<AppId>,
) -> Result<IndicatorSet, IndicatorError> {
    if group.is_empty() {
        return Err(IndicatorError::EmptyGroup);
    }
    let app_ids: Vec<AppId> = group.iter().map(|a| a.app_id).collect();
    let selected_idx = selected.and_then(|id| app_ids.iter().position(|a| *a == id));
    let indicators = IndicatorKind::ALL
        .iter()
        .map(|kind| {
            let values: Vec<f64> = group.iter().map(|a| kind.value(a, tables)).collect();
            Ok(Indicator {
                kind: *kind,
                name: kind.name().into(),
                app_ids: app_ids.clone(),
                box_stats: box_stats(&values)?,
                density: kde(&values, Bandwidth::Auto)?,
                highlight: selected_idx.map(|k| values[k]),
                values,
            })
        })
        .collect::<Result<Vec<_>, IndicatorError>>()?;
    Ok(IndicatorSet { version: INDICATOR_SET_VERSION.into(), selected: selected_idx.map(|k| app_ids[k]), indicators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activities, BasicInfo, Education};
    use crate::stats::KDE_FLOOR_BANDWIDTH;
    use alloc::vec;

    fn app(id: u64, rank: u32) -> Application {
        Application {
            app_id: AppId(id),
            name: "n".into(),
            basic: BasicInfo {
                gender: "F".into(),
                hometown: "h".into(),
                school: "S".into(),
                major: "m".into(),
                skills: vec![],
            },
            education: Education {
                gpa: 3.0,
                student_rank: rank,
                class_size: 50,
                cet4: None,
                cet6: None,
                toefl: None,
                ielts: None,
                courses: vec![],
            },
            competitions: vec![],
            honors: vec![],
            activities: Activities::default(),
        }
    }

    #[test]
    fn singleton_group() {
        let set = indicator_set(&[app(1, 3)], &RankTables::default(), Some(AppId(1))).unwrap();
        assert_eq!(set.indicators.len(), 12);
        for ind in &set.indicators {
            assert_eq!(ind.values.len(), 1);
            assert_eq!(ind.highlight, Some(ind.values[0]));
        }
    }

    #[test]
    fn nobody_published() {
        let group: Vec<_> = (1..=10).map(|k| app(k, k as u32)).collect();
        let set = indicator_set(&group, &RankTables::default(), None).unwrap();
        let pubs = &set.indicators[10];
        assert!(pubs.values.iter().all(|v| *v == 0.0));
        assert_eq!(pubs.density.bandwidth, KDE_FLOOR_BANDWIDTH);
        assert!((pubs.density.integral() - 1.0).abs() < 1e-6);
        assert_eq!(set.selected, None);
    }

    #[test]
    fn empty_group() {
        assert_eq!(indicator_set(&[], &RankTables::default(), None), Err(IndicatorError::EmptyGroup));
    }
}
