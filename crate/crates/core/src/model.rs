//! Application records and score sheets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of one application inside a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AppId(pub u64);

impl fmt::Display for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four screening sections of a sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Section {
    /// Education background.
    EB,
    /// Competitions.
    Com,
    /// Honors.
    Ho,
    /// Extra activities.
    ExA,
}

impl Section {
    pub const ALL: [Section; 4] = [Section::EB, Section::Com, Section::Ho, Section::ExA];

    pub fn as_str(self) -> &'static str {
        match self {
            Section::EB => "EB",
            Section::Com => "Com",
            Section::Ho => "Ho",
            Section::ExA => "ExA",
        }
    }

    pub fn parse(s: &str) -> Option<Section> {
        match s.trim() {
            "EB" | "eb" => Some(Section::EB),
            "Com" | "com" | "COM" => Some(Section::Com),
            "Ho" | "ho" | "HO" => Some(Section::Ho),
            "ExA" | "exa" | "EXA" => Some(Section::ExA),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reviewer score. `0` means "not scored yet"; assigned scores are 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Score(u8);

impl Score {
    pub const UNSCORED: Score = Score(0);
    pub const MAX: u8 = 5;

    pub fn new(value: u8) -> Option<Score> {
        (value <= Self::MAX).then_some(Score(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_scored(self) -> bool {
        self.0 != 0
    }
}

impl TryFrom<u8> for Score {
    type Error = InvalidScore;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Score::new(value).ok_or(InvalidScore(value))
    }
}

impl From<Score> for u8 {
    fn from(s: Score) -> u8 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("score {0} outside 0..=5")]
pub struct InvalidScore(pub u8);

/// Award or honor level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    School,
    Provincial,
    National,
    International,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::School, Level::Provincial, Level::National, Level::International];

    /// Canonicalizes free-form level text. Case and surrounding noise
    /// ("-level", "level") are ignored.
    pub fn canonicalize(raw: &str) -> Option<Level> {
        let lowered = raw.trim().to_ascii_lowercase();
        let key = lowered.trim_end_matches("-level").trim_end_matches(" level").trim_end_matches("level").trim();
        LEVEL_ALIASES.iter().find(|(alias, _)| *alias == key).map(|(_, level)| *level)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::School => "School",
            Level::Provincial => "Provincial",
            Level::National => "National",
            Level::International => "International",
        }
    }
}

/// Accepted spellings for each level, all lower case.
pub const LEVEL_ALIASES: &[(&str, Level)] = &[
    ("school", Level::School),
    ("university", Level::School),
    ("college", Level::School),
    ("campus", Level::School),
    ("institutional", Level::School),
    ("provincial", Level::Provincial),
    ("province", Level::Provincial),
    ("regional", Level::Provincial),
    ("region", Level::Provincial),
    ("municipal", Level::Provincial),
    ("city", Level::Provincial),
    ("state", Level::Provincial),
    ("national", Level::National),
    ("nation", Level::National),
    ("country", Level::National),
    ("nationwide", Level::National),
    ("international", Level::International),
    ("global", Level::International),
    ("world", Level::International),
    ("worldwide", Level::International),
];

/// Venue tier of a publication. `D` doubles as "unknown venue".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    A,
    B,
    C,
    D,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::A, Tier::B, Tier::C, Tier::D];

    pub fn canonicalize(raw: &str) -> Option<Tier> {
        let lowered = raw.trim().to_ascii_lowercase();
        let key = lowered
            .trim_start_matches("tier")
            .trim_end_matches("-tier")
            .trim_end_matches(" tier")
            .trim_start_matches(['-', ' '])
            .trim();
        match key {
            "a" => Some(Tier::A),
            "b" => Some(Tier::B),
            "c" => Some(Tier::C),
            "d" | "unknown" => Some(Tier::D),
            _ => None,
        }
    }

    /// Numeric rank used by indicators: A=4 .. D=1.
    pub fn numeric(self) -> f64 {
        match self {
            Tier::A => 4.0,
            Tier::B => 3.0,
            Tier::C => 2.0,
            Tier::D => 1.0,
        }
    }
}

/// Honor categories counted by the Ho section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HonorCategory {
    Scholarship,
    ExcellentStudent,
    OutstandingStudent,
    OutstandingGraduate,
    StudentOfficer,
    Volunteer,
    SocialPractice,
    SkillCertificate,
    Other,
}

/// Subject category of a competition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CompetitionCategory {
    Mathematics,
    English,
    Computer,
    Chemistry,
    Electronics,
    Mechanical,
    Physics,
    Biology,
    InnovationEntrepreneurship,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectRole {
    Manager,
    Participant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicInfo {
    pub gender: String,
    pub hometown: String,
    pub school: String,
    pub major: String,
    #[serde(default)]
    pub skills: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub name: String,
    pub grade: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Education {
    pub gpa: f64,
    pub student_rank: u32,
    pub class_size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cet4: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cet6: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toefl: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ielts: Option<f64>,
    #[serde(default)]
    pub courses: Vec<Course>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competition {
    pub name: String,
    pub time: String,
    pub level: Level,
    pub award: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Honor {
    pub name: String,
    pub time: String,
    pub level: Level,
    pub category: HonorCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub name: String,
    pub time: String,
    pub role: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub title: String,
    pub author_order: u32,
    pub publication: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<Tier>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtherExperience {
    pub name: String,
    pub time: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Activities {
    #[serde(default)]
    pub projects: Vec<Project>,
    #[serde(default)]
    pub papers: Vec<Paper>,
    #[serde(default)]
    pub other: Vec<OtherExperience>,
}

/// One applicant's structured record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Application {
    pub app_id: AppId,
    pub name: String,
    pub basic: BasicInfo,
    pub education: Education,
    #[serde(default)]
    pub competitions: Vec<Competition>,
    #[serde(default)]
    pub honors: Vec<Honor>,
    #[serde(default)]
    pub activities: Activities,
}

/// Per-section scores and comments of one application.
///
/// All four sections are always present; an unscored section holds 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSheet")]
pub struct ScoreSheet {
    pub app_id: AppId,
    pub scores: BTreeMap<Section, Score>,
    #[serde(default)]
    pub comments: BTreeMap<Section, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSheet {
    app_id: AppId,
    scores: BTreeMap<Section, Score>,
    #[serde(default)]
    comments: BTreeMap<Section, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("score sheet for application {0} must list exactly the sections EB, Com, Ho, ExA")]
pub struct IncompleteSheet(pub AppId);

impl TryFrom<RawSheet> for ScoreSheet {
    type Error = IncompleteSheet;

    fn try_from(raw: RawSheet) -> Result<Self, Self::Error> {
        if raw.scores.len() != Section::ALL.len() {
            return Err(IncompleteSheet(raw.app_id));
        }
        Ok(ScoreSheet { app_id: raw.app_id, scores: raw.scores, comments: raw.comments })
    }
}

impl ScoreSheet {
    pub fn new(app_id: AppId) -> Self {
        ScoreSheet {
            app_id,
            scores: Section::ALL.iter().map(|s| (*s, Score::UNSCORED)).collect(),
            comments: BTreeMap::new(),
        }
    }

    pub fn score(&self, section: Section) -> Score {
        self.scores.get(&section).copied().unwrap_or_default()
    }

    pub fn set(&mut self, section: Section, score: Score) {
        self.scores.insert(section, score);
    }
}
