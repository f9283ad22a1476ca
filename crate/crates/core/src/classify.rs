//! Deterministic keyword classifiers for free-text record fields.
//!
//! Text is lower-cased and split into tokens on anything that is not
//! alphanumeric or `+`. A rule is a phrase of token stems; a stem matches a
//! token it prefixes, or equals it exactly when written with a trailing `$`.
//! Rules are tried in table order and the first hit wins.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{CompetitionCategory, HonorCategory, ProjectRole};

type Phrase = &'static [&'static str];

/// Competition rules in priority order.
pub const COMPETITION_RULES: &[(CompetitionCategory, &[Phrase])] = &[
    (CompetitionCategory::Mathematics, &[&["math"], &["modeling"], &["modelling"], &["calculus"], &["statistic"]]),
    (CompetitionCategory::Physics, &[&["physics$"], &["physicist"]]),
    (CompetitionCategory::Chemistry, &[&["chem"]]),
    (CompetitionCategory::Biology, &[&["bio"], &["igem$"], &["life", "science"], &["genetic"]]),
    (CompetitionCategory::English, &[&["english"], &["debate"], &["speech"]]),
    (
        CompetitionCategory::Computer,
        &[
            &["comput"],
            &["program"],
            &["coding"],
            &["icpc$"],
            &["acm$"],
            &["software"],
            &["algorithm"],
            &["informatic"],
            &["hackathon"],
            &["cyber"],
            &["artificial", "intelligence"],
        ],
    ),
    (CompetitionCategory::Electronics, &[&["electr"], &["circuit"], &["embedded"], &["microcontroller"]]),
    (CompetitionCategory::Mechanical, &[&["mechan"], &["robo"], &["engineering", "design"], &["vehicle"]]),
    (
        CompetitionCategory::InnovationEntrepreneurship,
        &[
            &["innovat"],
            &["entrepreneur"],
            &["startup"],
            &["start", "up"],
            &["internet+"],
            &["challenge", "cup"],
            &["business", "plan"],
        ],
    ),
];

/// Stems that mark a project role as leading.
pub const MANAGER_RULES: &[Phrase] = &[
    &["lead"],
    &["manag"],
    &["head$"],
    &["captain"],
    &["chief"],
    &["director"],
    &["founder"],
    &["cofounder"],
    &["coordinator"],
    &["principal"],
    &["pi$"],
    &["president"],
    &["chair"],
    &["owner$"],
    &["supervisor"],
];

/// Honor rules in priority order.
pub const HONOR_RULES: &[(HonorCategory, &[Phrase])] = &[
    (HonorCategory::Scholarship, &[&["scholarship"], &["bursary"], &["stipend"], &["grant$"]]),
    (
        HonorCategory::OutstandingGraduate,
        &[&["outstanding", "graduate"], &["excellent", "graduate"], &["distinguished", "graduate"]],
    ),
    (
        HonorCategory::StudentOfficer,
        &[
            &["cadre"],
            &["officer"],
            &["student", "union"],
            &["student", "council"],
            &["student", "leader"],
            &["monitor$"],
            &["president"],
            &["secretary"],
        ],
    ),
    (
        HonorCategory::ExcellentStudent,
        &[&["excellent", "student"], &["merit", "student"], &["three", "good"], &["model", "student"]],
    ),
    (
        HonorCategory::OutstandingStudent,
        &[&["outstanding", "student"], &["outstanding", "undergraduate"], &["top", "student"]],
    ),
    (HonorCategory::Volunteer, &[&["volunteer"], &["voluntary"], &["community", "service"]]),
    (HonorCategory::SocialPractice, &[&["social", "practice"], &["social", "survey"], &["field", "practice"]]),
    (
        HonorCategory::SkillCertificate,
        &[&["certificat"], &["certified"], &["license"], &["licence"], &["qualification"]],
    ),
];

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '+'))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn stem_matches(stem: &str, token: &str) -> bool {
    match stem.strip_suffix('$') {
        Some(exact) => token == exact,
        None => token.starts_with(stem),
    }
}

fn phrase_matches(phrase: Phrase, toks: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > toks.len() {
        return false;
    }
    toks.windows(phrase.len()).any(|w| w.iter().zip(phrase).all(|(tok, stem)| stem_matches(stem, tok)))
}

fn first_rule<C: Copy>(rules: &[(C, &[Phrase])], toks: &[String]) -> Option<C> {
    rules.iter().find(|(_, phrases)| phrases.iter().any(|p| phrase_matches(p, toks))).map(|(category, _)| *category)
}

/// Subject category of a competition name; unmatched names are `Other`.
pub fn classify_competition(name: &str) -> CompetitionCategory {
    first_rule(COMPETITION_RULES, &tokens(name)).unwrap_or(CompetitionCategory::Other)
}

/// `Manager` iff the role text contains a leadership keyword.
pub fn classify_project_role(role: &str) -> ProjectRole {
    let toks = tokens(role);
    if MANAGER_RULES.iter().any(|p| phrase_matches(p, &toks)) {
        ProjectRole::Manager
    } else {
        ProjectRole::Participant
    }
}

/// Honor category from its name (or declared category text).
pub fn classify_honor(text: &str) -> HonorCategory {
    first_rule(HONOR_RULES, &tokens(text)).unwrap_or(HonorCategory::Other)
}

/// Exact spellings accepted for a declared honor category.
pub fn honor_category_from_label(label: &str) -> Option<HonorCategory> {
    let key: String = label.chars().filter(|c| c.is_alphanumeric()).flat_map(|c| c.to_lowercase()).collect();
    let category = match key.as_str() {
        "scholarship" => HonorCategory::Scholarship,
        "excellentstudent" => HonorCategory::ExcellentStudent,
        "outstandingstudent" => HonorCategory::OutstandingStudent,
        "outstandinggraduate" => HonorCategory::OutstandingGraduate,
        "studentofficer" => HonorCategory::StudentOfficer,
        "volunteer" => HonorCategory::Volunteer,
        "socialpractice" => HonorCategory::SocialPractice,
        "skillcertificate" => HonorCategory::SkillCertificate,
        "other" => HonorCategory::Other,
        _ => return None,
    };
    Some(category)
}
