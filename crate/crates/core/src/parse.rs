//! Validation of structured application records.
//!
//! Records arrive as JSON values with the field names of [`Application`].
//! Parsing canonicalizes enumerations (level, tier, honor category) and
//! rejects incomplete records, naming the offending path.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Value};

use crate::classify::{classify_honor, honor_category_from_label};
use crate::model::{
    Activities, AppId, Application, BasicInfo, Competition, Course, Education, Honor, Level, OtherExperience, Paper,
    Project, Tier,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("bad value `{value}` for enumeration at `{path}`")]
    BadEnum { path: String, value: String },
    #[error("invalid value at `{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

impl ParseError {
    /// Path of the offending field.
    pub fn path(&self) -> &str {
        match self {
            ParseError::MissingField(p) => p,
            ParseError::BadEnum { path, .. } | ParseError::Invalid { path, .. } => path,
        }
    }

    /// Same error with `prefix.` prepended to its path.
    pub fn within(self, prefix: &str) -> ParseError {
        let join = |p: String| format!("{prefix}.{p}");
        match self {
            ParseError::MissingField(p) => ParseError::MissingField(join(p)),
            ParseError::BadEnum { path, value } => ParseError::BadEnum { path: join(path), value },
            ParseError::Invalid { path, reason } => ParseError::Invalid { path: join(path), reason },
        }
    }
}

type Result<T> = core::result::Result<T, ParseError>;

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

fn invalid(path: &str, reason: &str) -> ParseError {
    ParseError::Invalid { path: path.to_owned(), reason: reason.to_owned() }
}

fn as_object<'a>(value: &'a Value, path: &str) -> Result<Obj<'a>> {
    match value {
        Value::Object(map) => Ok(Obj { map, path: path.to_owned() }),
        _ => Err(invalid(path, "expected an object")),
    }
}

impl<'a> Obj<'a> {
    fn child(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{}", self.path, key)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn required(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| ParseError::MissingField(self.child(key)))
    }

    fn string(&self, key: &str) -> Result<String> {
        let path = self.child(key);
        match self.required(key)? {
            Value::String(s) if !s.trim().is_empty() => Ok(s.trim().to_owned()),
            Value::String(_) => Err(ParseError::MissingField(path)),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(invalid(&path, "expected a string")),
        }
    }

    fn string_or_empty(&self, key: &str) -> Result<String> {
        match self.get(key) {
            None => Ok(String::new()),
            Some(Value::String(s)) => Ok(s.trim().to_owned()),
            Some(Value::Number(n)) => Ok(n.to_string()),
            Some(_) => Err(invalid(&self.child(key), "expected a string")),
        }
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let path = self.child(key);
        let v = self.required(key)?;
        number(v, &path)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => number(v, &self.child(key)).map(Some),
        }
    }

    fn u32(&self, key: &str) -> Result<u32> {
        let path = self.child(key);
        integer(self.required(key)?, &path)
    }

    fn opt_u32(&self, key: &str) -> Result<Option<u32>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => integer(v, &self.child(key)).map(Some),
        }
    }

    fn array(&self, key: &str) -> Result<&'a [Value]> {
        match self.get(key) {
            None => Ok(&[]),
            Some(Value::Array(items)) => Ok(items),
            Some(_) => Err(invalid(&self.child(key), "expected an array")),
        }
    }

    fn object(&self, key: &str) -> Result<Obj<'a>> {
        as_object(self.required(key)?, &self.child(key))
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
    .ok_or_else(|| invalid(path, "expected a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(path, "number must be finite"))
    }
}

fn integer(v: &Value, path: &str) -> Result<u32> {
    let x = number(v, path)?;
    if x < 0.0 || libm::trunc(x) != x || x > u32::MAX as f64 {
        return Err(invalid(path, "expected a nonnegative integer"));
    }
    Ok(x as u32)
}

fn level(obj: &Obj<'_>) -> Result<Level> {
    let raw = obj.string("level")?;
    Level::canonicalize(&raw).ok_or(ParseError::BadEnum { path: obj.child("level"), value: raw })
}

fn each<'a, T>(items: &'a [Value], path: &str, mut f: impl FnMut(Obj<'a>) -> Result<T>) -> Result<Vec<T>> {
    items.iter().enumerate().map(|(i, item)| as_object(item, &format!("{path}[{i}]")).and_then(&mut f)).collect()
}

/// Parses and validates one application record.
pub fn parse_application(record: &Value) -> Result<Application> {
    let root = as_object(record, "")?;

    let raw_id = root.required("app_id")?;
    let app_id = integer(raw_id, "app_id")?;
    if app_id == 0 {
        return Err(invalid("app_id", "must be a positive integer"));
    }
    let name = root.string("name")?;

    let basic_obj = root.object("basic")?;
    let skills = basic_obj
        .array("skills")?
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Value::String(s) => Ok(s.trim().to_owned()),
            _ => Err(invalid(&format!("basic.skills[{i}]"), "expected a string")),
        })
        .collect::<Result<Vec<_>>>()?;
    let basic = BasicInfo {
        gender: basic_obj.string("gender")?,
        hometown: basic_obj.string("hometown")?,
        school: basic_obj.string("school")?,
        major: basic_obj.string("major")?,
        skills,
    };

    let edu = root.object("education")?;
    let gpa = edu.f64("gpa")?;
    if gpa < 0.0 {
        return Err(invalid(&edu.child("gpa"), "must be nonnegative"));
    }
    let student_rank = edu.u32("student_rank")?;
    let class_size = edu.u32("class_size")?;
    if class_size < 1 {
        return Err(invalid(&edu.child("class_size"), "must be at least 1"));
    }
    if student_rank < 1 || student_rank > class_size {
        return Err(invalid(&edu.child("student_rank"), "must lie in 1..=class_size"));
    }
    let courses = each(edu.array("courses")?, &edu.child("courses"), |c| {
        Ok(Course { name: c.string("name")?, grade: c.string_or_empty("grade")? })
    })?;
    let education = Education {
        gpa,
        student_rank,
        class_size,
        cet4: edu.opt_u32("cet4")?,
        cet6: edu.opt_u32("cet6")?,
        toefl: edu.opt_u32("toefl")?,
        ielts: edu.opt_f64("ielts")?,
        courses,
    };

    let competitions = each(root.array("competitions")?, "competitions", |c| {
        Ok(Competition {
            name: c.string("name")?,
            time: c.string_or_empty("time")?,
            level: level(&c)?,
            award: c.string_or_empty("award")?,
        })
    })?;

    let honors = each(root.array("honors")?, "honors", |h| {
        let name = h.string("name")?;
        let label = h.string_or_empty("category")?;
        let category = if label.is_empty() {
            classify_honor(&name)
        } else {
            honor_category_from_label(&label).unwrap_or_else(|| classify_honor(&label))
        };
        Ok(Honor { name, time: h.string_or_empty("time")?, level: level(&h)?, category })
    })?;

    let activities = match root.get("activities") {
        None => Activities::default(),
        Some(v) => {
            let act = as_object(v, "activities")?;
            let projects = each(act.array("projects")?, &act.child("projects"), |p| {
                Ok(Project {
                    name: p.string("name")?,
                    time: p.string_or_empty("time")?,
                    role: p.string("role")?,
                    description: p.string_or_empty("description")?,
                })
            })?;
            let papers = each(act.array("papers")?, &act.child("papers"), |p| {
                let author_order = p.u32("author_order")?;
                if author_order == 0 {
                    return Err(invalid(&p.child("author_order"), "must be positive"));
                }
                let tier = match p.string_or_empty("tier")? {
                    t if t.is_empty() => None,
                    t => Some(Tier::canonicalize(&t).ok_or(ParseError::BadEnum { path: p.child("tier"), value: t })?),
                };
                Ok(Paper {
                    title: p.string("title")?,
                    author_order,
                    publication: p.string("publication")?,
                    tier,
                    summary: p.string_or_empty("summary")?,
                })
            })?;
            let other = each(act.array("other")?, &act.child("other"), |o| {
                Ok(OtherExperience { name: o.string("name")?, time: o.string_or_empty("time")? })
            })?;
            Activities { projects, papers, other }
        }
    };

    Ok(Application { app_id: AppId(app_id as u64), name, basic, education, competitions, honors, activities })
}
