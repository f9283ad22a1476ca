//! Reviewer preference model: a linear ranking SVM over one section's
//! attributes, trained on pairwise constraints from trusted scores.
//!
//! The workflow is: fit a [`Normalization`] over the whole group, derive
//! constraints from the selected samples' scores, train a weight vector,
//! take `v = w·d` for every application and map `v` onto the score scale.

mod constraints;
mod mapping;
mod solver;

pub use constraints::{derive_constraints, derive_pairwise, Constraint, Label, MIN_SAMPLES_EXCLUSIVE};
pub use mapping::{map_to_scores, round_cents};
pub use solver::{objective, signed_differences, train, Solution, TrainConfig};

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::attributes::{AttributeVector, Normalization, NormalizationError};
use crate::model::{AppId, Score, Section};
use crate::schema::{SectionSchema, SCHEMA_VERSION};

/// Attributes listed in an attribute report.
pub const REPORT_LENGTH: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("need more than {min} training samples, got {got}", min = MIN_SAMPLES_EXCLUSIVE)]
    TooFewSamples { got: usize },
    #[error("all training scores are tied")]
    AllTied,
    #[error("training sample {index} is unscored")]
    UnscoredSample { index: usize },
    #[error("application {0} is not part of the group")]
    UnknownApp(AppId),
    #[error("application {0} appears twice in the training set")]
    DuplicateSample(AppId),
    #[error("no constraints to train on")]
    NoConstraints,
    #[error("constraint ({i}, {j}) does not reference two distinct samples")]
    BadConstraint { i: usize, j: usize },
    #[error("soft-margin penalty C must be positive and finite")]
    InvalidPenalty,
    #[error("non-finite attribute in row {index}")]
    NonFiniteInput { index: usize },
    #[error("vector has {got} attributes, model expects {expected}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("vector belongs to section {got}, model is for {expected}")]
    SectionMismatch { expected: Section, got: Section },
    #[error("{values} values but {scores} scores")]
    LengthMismatch { values: usize, scores: usize },
    #[error("no nonzero training scores")]
    EmptyTrainingScores,
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub app_id: AppId,
    pub score: Score,
}

/// A trained model with everything needed to reproduce its predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceModel {
    pub section: Section,
    pub schema_version: String,
    pub attributes: Vec<String>,
    pub weights: Vec<f64>,
    pub normalization: Normalization,
    pub c: f64,
    pub seed: u64,
    pub training: Vec<TrainingSample>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: u32,
}

impl PreferenceModel {
    pub fn training_ids(&self) -> impl Iterator<Item = AppId> + '_ {
        self.training.iter().map(|t| t.app_id)
    }

    pub fn training_scores(&self) -> Vec<Score> {
        self.training.iter().map(|t| t.score).collect()
    }
}

/// Trains a model for `section`.
///
/// `group` holds the attribute vectors of every application in the group
/// (the normalization is fitted over all of them); `samples` lists the
/// trusted training applications with their scores.
pub fn fit(
    section: Section,
    group: &[AttributeVector],
    samples: &[TrainingSample],
    config: &TrainConfig,
) -> Result<PreferenceModel, ModelError> {
    let schema = SectionSchema::of(section);
    for v in group {
        if v.section != section {
            return Err(ModelError::SectionMismatch { expected: section, got: v.section });
        }
    }
    let normalization = Normalization::fit(section, group)?;
    let by_id: BTreeMap<AppId, &AttributeVector> = group.iter().map(|v| (v.app_id, v)).collect();

    let mut seen = BTreeMap::new();
    let mut rows = Vec::with_capacity(samples.len());
    for sample in samples {
        if seen.insert(sample.app_id, ()).is_some() {
            return Err(ModelError::DuplicateSample(sample.app_id));
        }
        let v = by_id.get(&sample.app_id).ok_or(ModelError::UnknownApp(sample.app_id))?;
        rows.push(normalization.apply(&v.values)?);
    }
    let scores: Vec<Score> = samples.iter().map(|s| s.score).collect();
    let constraints = derive_constraints(&scores)?;
    let solution = train(&constraints, &rows, config)?;

    Ok(PreferenceModel {
        section,
        schema_version: SCHEMA_VERSION.to_string(),
        attributes: schema.names().map(ToString::to_string).collect(),
        weights: solution.weights,
        normalization,
        c: config.c,
        seed: config.seed,
        training: samples.to_vec(),
        objective: solution.objective,
        converged: solution.converged,
        iterations: solution.iterations,
    })
}

/// `v(d) = w·d` on normalized vectors.
pub fn predict_values(model: &PreferenceModel, vectors: &[AttributeVector]) -> Result<Vec<f64>, ModelError> {
    vectors
        .iter()
        .map(|v| {
            if v.values.len() != model.weights.len() {
                return Err(ModelError::SchemaMismatch { expected: model.weights.len(), got: v.values.len() });
            }
            let row = model.normalization.apply(&v.values)?;
            Ok(row.iter().zip(&model.weights).map(|(a, w)| a * w).sum())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub app_id: AppId,
    pub v: f64,
    pub s_prime: f64,
}

/// Raw values and mapped scores for every application of `vectors`;
/// `human` gives each application's current score in the model's section.
pub fn predict(
    model: &PreferenceModel,
    vectors: &[AttributeVector],
    human: &[Score],
) -> Result<Vec<Prediction>, ModelError> {
    let values = predict_values(model, vectors)?;
    let mapped = map_to_scores(&values, human, &model.training_scores())?;
    Ok(vectors
        .iter()
        .zip(values)
        .zip(mapped)
        .map(|((vec, v), s_prime)| Prediction { app_id: vec.app_id, v, s_prime })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeWeight {
    pub name: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeReport {
    pub attributes: Vec<AttributeWeight>,
}

/// Orders attribute indices by |weight| descending, schema order on ties.
pub fn rank_by_magnitude(weights: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by(|a, b| libm::fabs(weights[*b]).total_cmp(&libm::fabs(weights[*a])).then(a.cmp(b)));
    idx
}

/// The ten most significant attributes (all of them when M < 10).
pub fn top_attributes(model: &PreferenceModel) -> AttributeReport {
    let attributes = rank_by_magnitude(&model.weights)
        .into_iter()
        .take(REPORT_LENGTH)
        .map(|k| AttributeWeight { name: model.attributes[k].clone(), weight: model.weights[k] })
        .collect();
    AttributeReport { attributes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model_with(section: Section, weights: Vec<f64>) -> PreferenceModel {
        let schema = SectionSchema::of(section);
        let m = schema.len();
        PreferenceModel {
            section,
            schema_version: SCHEMA_VERSION.into(),
            attributes: schema.names().map(Into::into).collect(),
            normalization: Normalization {
                min: vec![0.0; m],
                max: vec![1.0; m],
                orientation: schema.attributes.iter().map(|a| a.orientation()).collect(),
            },
            weights,
            c: 1.0,
            seed: 0,
            training: vec![],
            objective: 0.0,
            converged: false,
            iterations: 0,
        }
    }

    #[test]
    fn report_orders_by_magnitude() {
        assert_eq!(rank_by_magnitude(&[0.9, -0.5, 0.1]), vec![0, 1, 2]);
        assert_eq!(rank_by_magnitude(&[0.1, -0.5, 0.5]), vec![1, 2, 0]);
    }

    #[test]
    fn report_lengths() {
        let eb = top_attributes(&model_with(Section::EB, vec![0.1; 6]));
        assert_eq!(eb.attributes.len(), 6);
        let com = top_attributes(&model_with(Section::Com, (0..16).map(|k| k as f64).collect()));
        assert_eq!(com.attributes.len(), 10);
        assert_eq!(com.attributes[0].name, "Student Rank");
    }

    #[test]
    fn zero_and_basis_weights() {
        let vectors: Vec<AttributeVector> = (0..5)
            .map(|k| AttributeVector {
                app_id: AppId(k + 1),
                section: Section::EB,
                values: vec![k as f64 / 4.0, 0.5, 0.0, 0.0, 1.0, 0.3],
            })
            .collect();
        let zero = model_with(Section::EB, vec![0.0; 6]);
        assert!(predict_values(&zero, &vectors).unwrap().iter().all(|v| *v == 0.0));
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        let basis = model_with(Section::EB, e1);
        let v = predict_values(&basis, &vectors).unwrap();
        for (x, vec) in v.iter().zip(&vectors) {
            assert_eq!(*x, vec.values[0]);
        }
    }

    #[test]
    fn schema_mismatch() {
        let model = model_with(Section::EB, vec![0.0; 6]);
        let bad = AttributeVector { app_id: AppId(1), section: Section::EB, values: vec![1.0; 5] };
        assert_eq!(predict_values(&model, &[bad]), Err(ModelError::SchemaMismatch { expected: 6, got: 5 }));
    }
}
