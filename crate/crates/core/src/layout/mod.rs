//! Comparison-view geometry: a t-SNE map of one section's applications
//! with the centers of each human score embedded alongside them.
//!
//! Score centers are computed in attribute space, appended to the data
//! matrix and embedded in the same run, so they land among the applications
//! they summarize.

mod tsne;

pub use tsne::{
    effective_perplexity, joint_affinities, tsne_embed, Embedding, EmbeddingConfig, EmbeddingError, MIN_POINTS,
};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{AppId, Score};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("no scored applications")]
    NoScoredApps,
    #[error("{ids} ids, {rows} rows and {scores} scores")]
    LengthMismatch { ids: usize, rows: usize, scores: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Mean attribute vector of the applications holding each assigned score.
pub fn score_centroids(rows: &[Vec<f64>], scores: &[Score]) -> Result<BTreeMap<u8, Vec<f64>>, LayoutError> {
    if rows.len() != scores.len() {
        return Err(LayoutError::LengthMismatch { ids: rows.len(), rows: rows.len(), scores: scores.len() });
    }
    let m = rows.first().map_or(0, Vec::len);
    let mut sums: BTreeMap<u8, (Vec<f64>, usize)> = BTreeMap::new();
    for (row, score) in rows.iter().zip(scores) {
        if !score.is_scored() {
            continue;
        }
        let entry = sums.entry(score.value()).or_insert_with(|| (vec![0.0; m], 0));
        for (acc, x) in entry.0.iter_mut().zip(row) {
            *acc += x;
        }
        entry.1 += 1;
    }
    if sums.is_empty() {
        return Err(LayoutError::NoScoredApps);
    }
    Ok(sums
        .into_iter()
        .map(|(score, (sum, count))| (score, sum.into_iter().map(|x| x / count as f64).collect()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedApp {
    pub app_id: AppId,
    pub score: Score,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedCentroid {
    pub score: u8,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonLayout {
    pub positions: Vec<PlacedApp>,
    /// One entry per score held by at least one application, ascending.
    pub centroids: Vec<PlacedCentroid>,
    /// Scores of the centroids joined lowest to highest; empty with fewer
    /// than two centroids.
    pub polyline: Vec<u8>,
    pub config: EmbeddingConfig,
    pub kl_trace: Vec<f64>,
}

/// Embeds applications and score centroids jointly.
///
/// `rows` are normalized attribute vectors aligned with `ids` and `scores`.
pub fn build_layout(
    ids: &[AppId],
    rows: &[Vec<f64>],
    scores: &[Score],
    config: &EmbeddingConfig,
) -> Result<ComparisonLayout, LayoutError> {
    if ids.len() != rows.len() || rows.len() != scores.len() {
        return Err(LayoutError::LengthMismatch { ids: ids.len(), rows: rows.len(), scores: scores.len() });
    }
    let centroids = score_centroids(rows, scores)?;
    let mut data = rows.to_vec();
    data.extend(centroids.values().cloned());
    let embedding = tsne_embed(&data, config)?;

    let positions = ids
        .iter()
        .zip(scores)
        .zip(&embedding.positions)
        .map(|((id, score), p)| PlacedApp { app_id: *id, score: *score, x: p[0], y: p[1] })
        .collect();
    let placed: Vec<PlacedCentroid> = centroids
        .keys()
        .zip(&embedding.positions[rows.len()..])
        .map(|(score, p)| PlacedCentroid { score: *score, x: p[0], y: p[1] })
        .collect();
    let polyline = if placed.len() > 1 { placed.iter().map(|c| c.score).collect() } else { Vec::new() };
    let mut config = config.clone();
    config.perplexity = embedding.perplexity;
    Ok(ComparisonLayout { positions, centroids: placed, polyline, config, kl_trace: embedding.kl_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: u8) -> Score {
        Score::new(v).unwrap()
    }

    #[test]
    fn singleton_and_pair_means() {
        let rows = vec![vec![1.0, 2.0], vec![0.0, 4.0], vec![2.0, 0.0]];
        let c = score_centroids(&rows, &[s(3), s(4), s(4)]).unwrap();
        assert_eq!(c[&3], vec![1.0, 2.0]);
        assert_eq!(c[&4], vec![1.0, 2.0]);
        assert_eq!(score_centroids(&rows, &[s(0); 3]), Err(LayoutError::NoScoredApps));
    }

    fn grid_rows(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|k| vec![(k % 4) as f64 / 3.0, (k / 4) as f64 / 3.0, ((k * 7) % 5) as f64 / 4.0]).collect()
    }

    #[test]
    fn present_scores_only() {
        let rows = grid_rows(9);
        let ids: Vec<AppId> = (1..=9).map(AppId).collect();
        let scores: Vec<Score> = [2, 3, 5, 2, 3, 5, 0, 2, 3].iter().map(|v| s(*v)).collect();
        let layout = build_layout(&ids, &rows, &scores, &EmbeddingConfig::default()).unwrap();
        assert_eq!(layout.centroids.len(), 3);
        assert_eq!(layout.polyline, vec![2, 3, 5]);
        assert_eq!(layout.positions.len(), 9);
    }

    #[test]
    fn single_score_has_no_polyline() {
        let rows = grid_rows(6);
        let ids: Vec<AppId> = (1..=6).map(AppId).collect();
        let layout = build_layout(&ids, &rows, &[s(4); 6], &EmbeddingConfig::default()).unwrap();
        assert_eq!(layout.centroids.len(), 1);
        assert!(layout.polyline.is_empty());
    }

    proptest! {
        #[test]
        fn centroids_match_naive_mean(
            data in proptest::collection::vec((proptest::collection::vec(0f64..1.0, 4), 0u8..=5), 1..40),
            rot in 0usize..40,
        ) {
            let rows: Vec<Vec<f64>> = data.iter().map(|d| d.0.clone()).collect();
            let scores: Vec<Score> = data.iter().map(|d| s(d.1)).collect();
            match score_centroids(&rows, &scores) {
                Err(LayoutError::NoScoredApps) => prop_assert!(scores.iter().all(|x| !x.is_scored())),
                Err(e) => prop_assert!(false, "{e}"),
                Ok(c) => {
                    for (score, centroid) in &c {
                        let members: Vec<&Vec<f64>> = rows.iter().zip(&scores)
                            .filter(|(_, x)| x.value() == *score).map(|(r, _)| r).collect();
                        for k in 0..4 {
                            let mean = members.iter().map(|r| r[k]).sum::<f64>() / members.len() as f64;
                            prop_assert!((centroid[k] - mean).abs() < 1e-12);
                        }
                    }
                    // member order does not matter
                    let mut rows2 = rows.clone();
                    let mut scores2 = scores.clone();
                    let k = rot % rows2.len();
                    rows2.rotate_left(k);
                    scores2.rotate_left(k);
                    let c2 = score_centroids(&rows2, &scores2).unwrap();
                    for (score, centroid) in &c {
                        for (a, b) in centroid.iter().zip(&c2[score]) {
                            prop_assert!((a - b).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}
