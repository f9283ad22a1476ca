//! Attribute schemas of the four screening sections.
//!
//! The attribute order is part of the model format: weight vectors, exported
//! models and attribute vectors are all aligned to it. Bump
//! [`SCHEMA_VERSION`] whenever the order, membership or orientation of an
//! attribute changes.

use serde::{Deserialize, Serialize};

use crate::model::{CompetitionCategory, HonorCategory, Level, Section, Tier};

/// Version tag of the attribute schema. `v1` feeds School Rank to the model
/// inverted (201 - rank) so that larger is better for every attribute.
pub const SCHEMA_VERSION: &str = "attrs-v1";

/// Rank given to schools missing from the ranking table.
pub const UNKNOWN_SCHOOL_RANK: f64 = 201.0;

/// Whether larger raw values are better. Normalization flips
/// [`Orientation::LowerIsBetter`] attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attribute {
    Cet4,
    Cet6,
    Toefl,
    Ielts,
    AwardCount(Level),
    CompetitionCount(CompetitionCategory),
    HonorLevelCount(Level),
    HonorCount(HonorCategory),
    PublicationCount(Tier),
    Projects,
    ProjectManager,
    ProjectParticipant,
    SchoolRank,
    StudentRank,
}

impl Attribute {
    pub fn name(self) -> &'static str {
        use Attribute::*;
        match self {
            Cet4 => "CET-4",
            Cet6 => "CET-6",
            Toefl => "TOEFL",
            Ielts => "IELTS",
            AwardCount(Level::School) => "School Award",
            AwardCount(Level::Provincial) => "Provincial Award",
            AwardCount(Level::National) => "National Award",
            AwardCount(Level::International) => "International Award",
            CompetitionCount(c) => match c {
                CompetitionCategory::Mathematics => "Mathematics Competition",
                CompetitionCategory::English => "English Competition",
                CompetitionCategory::Computer => "Computer Competition",
                CompetitionCategory::Chemistry => "Chemistry Competition",
                CompetitionCategory::Electronics => "Electronics Competition",
                CompetitionCategory::Mechanical => "Mechanical Competition",
                CompetitionCategory::Physics => "Physics Competition",
                CompetitionCategory::Biology => "Biology Competition",
                CompetitionCategory::InnovationEntrepreneurship => "Innovation and Entrepreneurship Competition",
                CompetitionCategory::Other => "Other Competition",
            },
            HonorLevelCount(Level::School) => "School Honor",
            HonorLevelCount(Level::Provincial) => "Provincial Honor",
            HonorLevelCount(Level::National) => "National Honor",
            HonorLevelCount(Level::International) => "International Honor",
            HonorCount(h) => match h {
                HonorCategory::Scholarship => "Scholarship",
                HonorCategory::ExcellentStudent => "Excellent Student",
                HonorCategory::OutstandingStudent => "Outstanding Student",
                HonorCategory::OutstandingGraduate => "Outstanding Graduate",
                HonorCategory::StudentOfficer => "Student Officer",
                HonorCategory::Volunteer => "Volunteer",
                HonorCategory::SocialPractice => "Social Practice",
                HonorCategory::SkillCertificate => "Skill Certificate",
                HonorCategory::Other => "Other Honor",
            },
            PublicationCount(Tier::A) => "A-tier Publication",
            PublicationCount(Tier::B) => "B-tier Publication",
            PublicationCount(Tier::C) => "C-tier Publication",
            PublicationCount(Tier::D) => "D-tier Publication",
            Projects => "Projects",
            ProjectManager => "Project Manager",
            ProjectParticipant => "Project Participant",
            SchoolRank => "School Rank",
            StudentRank => "Student Rank",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Attribute::SchoolRank => Orientation::LowerIsBetter,
            _ => Orientation::HigherIsBetter,
        }
    }

    /// Count attributes hold nonnegative integers before normalization.
    pub fn is_count(self) -> bool {
        use Attribute::*;
        matches!(
            self,
            AwardCount(_)
                | CompetitionCount(_)
                | HonorLevelCount(_)
                | HonorCount(_)
                | PublicationCount(_)
                | Projects
                | ProjectManager
                | ProjectParticipant
        )
    }
}

const EB: &[Attribute] = &[
    Attribute::Cet4,
    Attribute::Cet6,
    Attribute::Toefl,
    Attribute::Ielts,
    Attribute::SchoolRank,
    Attribute::StudentRank,
];

const COM: &[Attribute] = &[
    Attribute::AwardCount(Level::School),
    Attribute::AwardCount(Level::Provincial),
    Attribute::AwardCount(Level::National),
    Attribute::AwardCount(Level::International),
    Attribute::CompetitionCount(CompetitionCategory::Mathematics),
    Attribute::CompetitionCount(CompetitionCategory::English),
    Attribute::CompetitionCount(CompetitionCategory::Computer),
    Attribute::CompetitionCount(CompetitionCategory::Chemistry),
    Attribute::CompetitionCount(CompetitionCategory::Electronics),
    Attribute::CompetitionCount(CompetitionCategory::Mechanical),
    Attribute::CompetitionCount(CompetitionCategory::Physics),
    Attribute::CompetitionCount(CompetitionCategory::Biology),
    Attribute::CompetitionCount(CompetitionCategory::InnovationEntrepreneurship),
    Attribute::CompetitionCount(CompetitionCategory::Other),
    Attribute::SchoolRank,
    Attribute::StudentRank,
];

const HO: &[Attribute] = &[
    Attribute::HonorLevelCount(Level::School),
    Attribute::HonorLevelCount(Level::Provincial),
    Attribute::HonorLevelCount(Level::National),
    Attribute::HonorLevelCount(Level::International),
    Attribute::HonorCount(HonorCategory::Scholarship),
    Attribute::HonorCount(HonorCategory::ExcellentStudent),
    Attribute::HonorCount(HonorCategory::OutstandingStudent),
    Attribute::HonorCount(HonorCategory::OutstandingGraduate),
    Attribute::HonorCount(HonorCategory::StudentOfficer),
    Attribute::HonorCount(HonorCategory::Volunteer),
    Attribute::HonorCount(HonorCategory::SocialPractice),
    Attribute::HonorCount(HonorCategory::SkillCertificate),
    Attribute::SchoolRank,
    Attribute::StudentRank,
];

const EXA: &[Attribute] = &[
    Attribute::PublicationCount(Tier::A),
    Attribute::PublicationCount(Tier::B),
    Attribute::PublicationCount(Tier::C),
    Attribute::PublicationCount(Tier::D),
    Attribute::Projects,
    Attribute::ProjectManager,
    Attribute::ProjectParticipant,
    Attribute::SchoolRank,
    Attribute::StudentRank,
];

/// Ordered attribute list of one section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionSchema {
    pub section: Section,
    pub attributes: &'static [Attribute],
}

impl SectionSchema {
    pub fn of(section: Section) -> SectionSchema {
        let attributes = match section {
            Section::EB => EB,
            Section::Com => COM,
            Section::Ho => HO,
            Section::ExA => EXA,
        };
        SectionSchema { section, attributes }
    }

    /// Number of attributes, `M`.
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.attributes.iter().map(|a| a.name())
    }

    pub fn position(&self, attribute: Attribute) -> Option<usize> {
        self.attributes.iter().position(|a| *a == attribute)
    }
}
