//! Seeded synthetic groups, lookup tables and scoring sessions.
//!
//! Each applicant has a latent strength; the attributes of every section
//! are noisy functions of it, so a reviewer whose scores follow a linear
//! utility produces rankings a small model can learn. The generated records
//! are raw JSON with mixed-case levels and partly missing honor categories,
//! so loading them exercises the full ingestion path.

use std::collections::BTreeMap;

use fairscreen_core::attributes::{AttributeVector, Normalization};
use fairscreen_core::session::{Origin, ScoreEvent, Session};
use fairscreen_core::{AppId, Level, Score, Section, SectionSchema, Tier};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde_json::{json, Value};

use crate::analysis::Workspace;
use crate::docs::{Group, GroupFile, StructuredJsonExtractor, TablesFile, GROUP_VERSION, TABLES_VERSION};

const SCHOOLS: &[(&str, Option<u16>)] = &[
    ("Northern Institute of Technology", Some(3)),
    ("Eastern University", Some(8)),
    ("Lakeside University", Some(15)),
    ("Central Polytechnic University", Some(22)),
    ("Southern Normal University", Some(35)),
    ("Harbor University of Science", Some(47)),
    ("Riverside University", Some(60)),
    ("Western Agricultural University", Some(74)),
    ("Mountain College of Engineering", Some(88)),
    ("Coastal University", Some(103)),
    ("Plains University of Technology", Some(121)),
    ("Valley Institute", Some(140)),
    ("Highland University", Some(158)),
    ("Prairie College", Some(177)),
    ("Metropolitan College", Some(196)),
    ("Eastfield Institute", None),
];

const COMPETITIONS: &[(&str, Option<Level>)] = &[
    ("Mathematical Contest in Modeling", None),
    ("National College Mathematics Competition", Some(Level::National)),
    ("ACM-ICPC Regional Contest", None),
    ("Programming Challenge", None),
    ("Electronic Design Contest", Some(Level::National)),
    ("Physics Olympiad for Undergraduates", None),
    ("English Speech Contest", None),
    ("Chemistry Experiment Skills Contest", None),
    ("iGEM", Some(Level::International)),
    ("Robot Design Contest", None),
    ("Challenge Cup Innovation Contest", None),
    ("Internet+ Entrepreneurship Competition", None),
    ("Campus Photography Contest", None),
];

const HONORS: &[(&str, Option<&str>)] = &[
    ("First-class Scholarship", Some("Scholarship")),
    ("National Scholarship", Some("Scholarship")),
    ("Excellent Student Award", None),
    ("Outstanding Student", Some("Outstanding Student")),
    ("Outstanding Graduate", None),
    ("Student Union Officer", None),
    ("Volunteer of the Year", None),
    ("Social Practice Award", Some("social practice")),
    ("Professional Skill Certificate", None),
    ("Dormitory Star", None),
];

const VENUES: &[(&str, Option<Tier>)] = &[
    ("Journal of Applied Computing", Some(Tier::A)),
    ("Transactions on Intelligent Systems", Some(Tier::A)),
    ("Conference on Data Engineering", Some(Tier::B)),
    ("Symposium on Software Quality", Some(Tier::C)),
    ("Regional Engineering Letters", Some(Tier::C)),
    ("Student Research Bulletin", None),
];

const ROLES: &[&str] = &["Project Leader", "Team Manager", "Member", "Participant", "Developer", "Research Assistant"];
const LEVEL_SPELLINGS: &[(&str, &str, &str, &str)] = &[
    ("School", "Provincial", "National", "International"),
    ("school-level", "provincial", "NATIONAL", "international"),
    ("university", "Province", "national level", "World"),
];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub group: GroupFile,
    pub tables: TablesFile,
    pub log: Vec<ScoreEvent>,
    pub truth: Vec<f64>,
}

fn phi(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64, cap: u64) -> usize {
    let draw: f64 = Poisson::new(lambda.max(1e-3)).expect("positive rate").sample(rng);
    (draw as u64).min(cap) as usize
}

fn level_for(rng: &mut ChaCha8Rng, strength: f64) -> Level {
    let u = strength + Normal::new(0.0, 1.0).unwrap().sample(rng);
    if u > 2.0 {
        Level::International
    } else if u > 0.8 {
        Level::National
    } else if u > -0.3 {
        Level::Provincial
    } else {
        Level::School
    }
}

fn spell(rng: &mut ChaCha8Rng, level: Level) -> &'static str {
    let row = LEVEL_SPELLINGS.choose(rng).expect("nonempty");
    match level {
        Level::School => row.0,
        Level::Provincial => row.1,
        Level::National => row.2,
        Level::International => row.3,
    }
}

fn year(rng: &mut ChaCha8Rng) -> String {
    format!("{}-{:02}", rng.random_range(2019..=2023), rng.random_range(1..=12))
}

fn record(rng: &mut ChaCha8Rng, id: u64, z: f64) -> Value {
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let mut facet = |weight: f64| weight * z + (1.0 - weight * weight).sqrt() * gauss.sample(rng);
    let (z_eb, z_com, z_ho, z_exa) = (facet(0.8), facet(0.8), facet(0.8), facet(0.8));
    let z_school = facet(0.7);

    let school_idx = ((1.0 - phi(z_school)) * SCHOOLS.len() as f64).floor() as usize;
    let school = SCHOOLS[school_idx.min(SCHOOLS.len() - 1)].0;
    let class_size: u32 = rng.random_range(30..=150);
    let pct = phi(0.85 * z + 0.5 * gauss.sample(rng));
    let student_rank = (((1.0 - pct) * f64::from(class_size)).ceil() as u32).clamp(1, class_size);

    let mut education = json!({
        "gpa": ((2.4 + 1.6 * pct) * 100.0).round() / 100.0,
        "student_rank": student_rank,
        "class_size": class_size,
        "cet4": (425.0 + 250.0 * phi(z_eb + 0.3 * gauss.sample(rng))).round() as u32,
        "courses": [
            {"name": "Linear Algebra", "grade": format!("{}", (60.0 + 40.0 * pct).round())},
            {"name": "Data Structures", "grade": format!("{}", (60.0 + 40.0 * phi(z_eb)).round())}
        ]
    });
    if rng.random_bool(0.75) {
        education["cet6"] = json!((425.0 + 230.0 * phi(z_eb + 0.4 * gauss.sample(rng))).round() as u32);
    }
    if rng.random_bool(0.25) {
        education["toefl"] = json!((75.0 + 40.0 * phi(z_eb)).round() as u32);
    }
    if rng.random_bool(0.25) {
        education["ielts"] = json!(((5.5 + 2.5 * phi(z_eb)) * 2.0).round() / 2.0);
    }

    let competitions: Vec<Value> = (0..poisson(rng, (0.5 + 0.8 * z_com).exp(), 9))
        .map(|_| {
            let (name, _) = *COMPETITIONS.choose(rng).expect("nonempty");
            let level = level_for(rng, z_com);
            let award = ["First Prize", "Second Prize", "Third Prize", "Honorable Mention"][rng.random_range(0..4)];
            json!({
                "name": name,
                "time": year(rng),
                "level": spell(rng, level),
                "award": award,
            })
        })
        .collect();

    let honors: Vec<Value> = (0..poisson(rng, (0.4 + 0.7 * z_ho).exp(), 9))
        .map(|_| {
            let (name, category) = *HONORS.choose(rng).expect("nonempty");
            let level = level_for(rng, z_ho);
            let mut h = json!({"name": name, "time": year(rng), "level": spell(rng, level)});
            if let Some(c) = category {
                h["category"] = json!(c);
            }
            h
        })
        .collect();

    let projects: Vec<Value> = (0..poisson(rng, (0.3 + 0.6 * z_exa).exp(), 6))
        .map(|k| {
            let lead = rng.random_bool(phi(z_exa - 0.3));
            let role = if lead { ROLES[rng.random_range(0..2)] } else { ROLES[rng.random_range(2..ROLES.len())] };
            json!({
                "name": format!("Project {}-{}", id, k + 1),
                "time": year(rng),
                "role": role,
                "description": "Undergraduate research project."
            })
        })
        .collect();

    let papers: Vec<Value> = (0..poisson(rng, (-0.9 + 0.9 * z_exa).exp(), 4))
        .map(|k| {
            let idx = ((1.0 - phi(z_exa + gauss.sample(rng))) * VENUES.len() as f64).floor() as usize;
            let (venue, _) = VENUES[idx.min(VENUES.len() - 1)];
            json!({
                "title": format!("Study {} of applicant {}", k + 1, id),
                "author_order": rng.random_range(1..=4),
                "publication": venue,
                "summary": "A short study."
            })
        })
        .collect();

    let hometown = ["North", "South", "East", "West"][rng.random_range(0..4)];
    let major = ["Computer Science", "Software Engineering", "Data Science"][rng.random_range(0..3)];
    let gender = if rng.random_bool(0.5) { "F" } else { "M" };
    json!({
        "app_id": id,
        "name": format!("Applicant {id:03}"),
        "basic": {
            "gender": gender,
            "hometown": hometown,
            "school": school,
            "major": major,
            "skills": ["Python", "Rust"]
        },
        "education": education,
        "competitions": competitions,
        "honors": honors,
        "activities": {
            "projects": projects,
            "papers": papers,
            "other": [{"name": "Summer school", "time": year(rng)}]
        }
    })
}

pub fn tables() -> TablesFile {
    TablesFile {
        schema_version: TABLES_VERSION.into(),
        school_rank: SCHOOLS.iter().filter_map(|(s, r)| r.map(|r| (s.to_string(), r))).collect(),
        publication_tier: VENUES.iter().filter_map(|(v, t)| t.map(|t| (v.to_string(), t))).collect(),
        competition_levels: COMPETITIONS.iter().filter_map(|(c, l)| l.map(|l| (c.to_string(), l))).collect(),
    }
}

/// `count` applications with latent strengths drawn from `seed`.
pub fn group(seed: u64, count: usize) -> (GroupFile, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let mut latent = Vec::with_capacity(count);
    let applications = (1..=count as u64)
        .map(|id| {
            let z = gauss.sample(&mut rng);
            latent.push(z);
            record(&mut rng, id, z)
        })
        .collect();
    let file =
        GroupFile { schema_version: GROUP_VERSION.into(), group_id: format!("synthetic-{seed}-{count}"), applications };
    (file, latent)
}

/// Weights of the simulated reviewer over each section's normalized
/// attributes.
pub fn reviewer_weights(section: Section) -> Vec<f64> {
    let schema = SectionSchema::of(section);
    let named: &[(&str, f64)] = match section {
        Section::EB => &[("CET-4", 1.0), ("CET-6", 0.8), ("TOEFL", 0.3), ("IELTS", 0.3)],
        Section::Com => &[
            ("International Award", 1.0),
            ("National Award", 0.9),
            ("Provincial Award", 0.5),
            ("School Award", 0.2),
            ("Mathematics Competition", 0.2),
            ("Computer Competition", 0.2),
        ],
        Section::Ho => &[
            ("National Honor", 1.0),
            ("International Honor", 1.0),
            ("Provincial Honor", 0.6),
            ("School Honor", 0.3),
            ("Scholarship", 0.4),
        ],
        Section::ExA => &[
            ("A-tier Publication", 1.0),
            ("B-tier Publication", 0.7),
            ("C-tier Publication", 0.3),
            ("Projects", 0.5),
            ("Project Manager", 0.5),
        ],
    };
    schema
        .names()
        .map(|name| match name {
            "School Rank" => 0.4,
            "Student Rank" => 0.6,
            _ => named.iter().find(|(n, _)| *n == name).map_or(0.0, |(_, w)| *w),
        })
        .collect()
}

/// `w·d` on the group-normalized vectors.
pub fn utilities(vectors: &[AttributeVector], weights: &[f64]) -> Vec<f64> {
    let section = vectors.first().map_or(Section::EB, |v| v.section);
    let norm = Normalization::fit(section, vectors).expect("generated vectors are finite");
    norm.apply_all(vectors)
        .expect("schema-aligned")
        .iter()
        .map(|row| row.iter().zip(weights).map(|(a, w)| a * w).sum())
        .collect()
}

/// Scores 1..=5 by utility quintile; equal utilities share a score.
pub fn quantize(utilities: &[f64]) -> Vec<Score> {
    let n = utilities.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| utilities[*a].total_cmp(&utilities[*b]).then(a.cmp(b)));
    let mut scores = vec![Score::UNSCORED; n];
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && utilities[order[end]] == utilities[order[k]] {
            end += 1;
        }
        let bucket = (k * 5 / n.max(1)) as u8 + 1;
        for idx in &order[k..end] {
            scores[*idx] = Score::new(bucket).expect("1..=5");
        }
        k = end;
    }
    scores
}

/// A phase-I scoring session: every application is scored section by
/// section in id order, then a few are revisited.
pub fn session_log(seed: u64, ws: &Workspace, noise: f64) -> Vec<ScoreEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_10c5);
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let ids = ws.group.ids();
    let mut targets: BTreeMap<(AppId, Section), Score> = BTreeMap::new();
    for section in Section::ALL {
        let vectors = ws.vectors(section);
        let u: Vec<f64> = utilities(&vectors, &reviewer_weights(section))
            .into_iter()
            .map(|x| x + noise * gauss.sample(&mut rng))
            .collect();
        for (id, s) in ids.iter().zip(quantize(&u)) {
            targets.insert((*id, section), s);
        }
    }
    let pace = Normal::new(3.6f64, 0.45).unwrap();
    let mut session = Session::new(ids.iter().copied());
    let mut t = 0u64;
    let push = |session: &mut Session, t: u64, id: AppId, section: Section, score: Score| {
        let e = session.next_event(t, id, section, score, Origin::Manual);
        session.append(e).expect("generated events are ordered");
    };
    for id in &ids {
        for section in Section::ALL {
            let mut secs: f64 = pace.sample(&mut rng).exp();
            if rng.random_bool(0.04) {
                secs *= 6.0;
            }
            t += (secs * 1000.0) as u64;
            push(&mut session, t, *id, section, targets[&(*id, section)]);
        }
    }
    for _ in 0..ids.len() / 8 {
        let id = *ids.choose(&mut rng).expect("nonempty group");
        let section = *Section::ALL.choose(&mut rng).expect("four sections");
        let current = targets[&(id, section)].value();
        let revised = if current == 5 || (current > 1 && rng.random_bool(0.5)) { current - 1 } else { current + 1 };
        t += rng.random_range(5_000..40_000);
        push(&mut session, t, id, section, Score::new(revised).expect("1..=5"));
    }
    session.log().to_vec()
}

/// A full fixture: group, tables and a scoring session.
pub fn fixture(seed: u64, count: usize) -> Fixture {
    let (group_file, truth) = group(seed, count);
    let tables_file = tables();
    let group = Group::from_file(&group_file, "synthetic".as_ref(), &StructuredJsonExtractor)
        .expect("generated records are valid");
    let tables = tables_file.clone().into_tables("synthetic".as_ref()).expect("generated tables are valid");
    let ws = Workspace::new(group, tables);
    let log = session_log(seed, &ws, 0.15);
    Fixture { group: group_file, tables: tables_file, log, truth }
}
