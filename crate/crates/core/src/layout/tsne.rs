//! Exact t-SNE for small groups (a few hundred points).
//!
//! Rows are processed in a canonical order (sorted by content) and each
//! row's initial position is drawn from an RNG seeded by the run seed and a
//! hash of the row, so permuting the input permutes the output exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and the initial momentum.
    pub exaggeration_iterations: usize,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            perplexity: 10.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: 200.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            seed: 0,
        }
    }
}

pub const MIN_POINTS: usize = 5;
const INIT_SD: f64 = 1e-4;
const ENTROPY_TOLERANCE: f64 = 1e-5;
const SEARCH_STEPS: usize = 50;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("need at least {min} points, got {got}", min = MIN_POINTS)]
    TooFewPoints { got: usize },
    #[error("non-finite value in row {0}")]
    NonFiniteInput(usize),
    #[error("rows have differing lengths")]
    RaggedInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub positions: Vec<[f64; 2]>,
    /// KL(P‖Q) at each iteration, measured before that iteration's update.
    pub kl_trace: Vec<f64>,
    /// Perplexity actually used, see [`effective_perplexity`].
    pub perplexity: f64,
}

/// The requested perplexity, lowered to just under `(n − 1) / 3` for small
/// inputs so that every point can reach it.
pub fn effective_perplexity(requested: f64, n: usize) -> f64 {
    let cap = (n as f64 - 1.0) / 3.0;
    if requested < cap {
        requested
    } else {
        0.99 * cap
    }
}

fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// FNV-1a over the seed, the row's bit patterns and its duplicate index.
fn row_hash(seed: u64, row: &[f64], occurrence: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |word: u64| {
        for byte in word.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(seed);
    for x in row {
        // +0.0 and -0.0 hash alike
        feed(if *x == 0.0 { 0 } else { x.to_bits() });
    }
    feed(occurrence);
    h
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Conditional affinities of one point for a given precision `beta`.
/// Returns the entropy (nats).
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for (j, d) in dist.iter().enumerate() {
        out[j] = if j == i { 0.0 } else { libm::exp(-d * beta) };
        sum += out[j];
    }
    if sum <= 0.0 {
        // every neighbour vanished numerically; fall back to uniform
        let n = dist.len() - 1;
        for (j, p) in out.iter_mut().enumerate() {
            *p = if j == i { 0.0 } else { 1.0 / n as f64 };
        }
        return libm::log(n as f64);
    }
    let mut weighted = 0.0;
    for (j, p) in out.iter_mut().enumerate() {
        weighted += dist[j] * *p;
        *p /= sum;
    }
    libm::log(sum) + beta * weighted / sum
}

/// Symmetrized joint affinities `P` (row-major, n×n) via per-point binary
/// search on the Gaussian precision to match the perplexity.
pub fn joint_affinities(rows: &[Vec<f64>], perplexity: f64) -> Vec<f64> {
    let n = rows.len();
    let target = libm::log(perplexity);
    let mut cond = vec![0.0; n * n];
    let mut dist = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            dist[j] = squared_distance(&rows[i], &rows[j]);
        }
        // shift by the nearest neighbour distance for numerical range
        let nearest = (0..n).filter(|j| *j != i).map(|j| dist[j]).fold(f64::INFINITY, f64::min);
        for d in dist.iter_mut() {
            *d -= nearest;
        }
        let (mut beta, mut lo, mut hi) = (1.0, f64::NEG_INFINITY, f64::INFINITY);
        let row = &mut cond[i * n..(i + 1) * n];
        for _ in 0..SEARCH_STEPS {
            let entropy = conditional_row(&dist, i, beta, row);
            let diff = entropy - target;
            if libm::fabs(diff) < ENTROPY_TOLERANCE {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = if lo.is_finite() { 0.5 * (beta + lo) } else { beta / 2.0 };
            }
        }
        conditional_row(&dist, i, beta, row);
    }
    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / denom).max(P_FLOOR);
        }
        p[i * n + i] = 0.0;
    }
    p
}

/// Student-t kernel values `1 / (1 + ‖y_i − y_j‖²)` and their sum.
fn student_kernel(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let n = y.len();
    let mut sum = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    sum
}

fn kl_divergence(p: &[f64], num: &[f64], sum: f64) -> f64 {
    let mut kl = 0.0;
    for (pij, nij) in p.iter().zip(num) {
        if *pij > 0.0 {
            let q = (nij / sum).max(P_FLOOR);
            kl += pij * libm::log(pij / q);
        }
    }
    kl
}

fn validate(rows: &[Vec<f64>], config: &EmbeddingConfig) -> Result<(), EmbeddingError> {
    if rows.len() < MIN_POINTS {
        return Err(EmbeddingError::TooFewPoints { got: rows.len() });
    }
    let m = rows[0].len();
    for (k, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(EmbeddingError::RaggedInput);
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFiniteInput(k));
        }
    }
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !positive(config.perplexity) {
        return Err(EmbeddingError::InvalidConfig("perplexity must be positive"));
    }
    if !positive(config.learning_rate) || !positive(config.early_exaggeration) {
        return Err(EmbeddingError::InvalidConfig("learning rate and exaggeration must be positive"));
    }
    if config.iterations == 0 {
        return Err(EmbeddingError::InvalidConfig("iterations must be positive"));
    }
    Ok(())
}

/// Embeds `rows` in two dimensions.
pub fn tsne_embed(rows: &[Vec<f64>], config: &EmbeddingConfig) -> Result<Embedding, EmbeddingError> {
    validate(rows, config)?;
    let n = rows.len();

    // canonical order; duplicates are numbered in that order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| cmp_rows(&rows[*a], &rows[*b]));
    let canon: Vec<Vec<f64>> = order.iter().map(|k| rows[*k].clone()).collect();

    let normal = Normal::new(0.0, INIT_SD).expect("valid standard deviation");
    let mut y: Vec<[f64; 2]> = Vec::with_capacity(n);
    let mut occurrence = 0u64;
    for k in 0..n {
        if k > 0 && cmp_rows(&canon[k - 1], &canon[k]).is_eq() {
            occurrence += 1;
        } else {
            occurrence = 0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(row_hash(config.seed, &canon[k], occurrence));
        y.push([normal.sample(&mut rng), normal.sample(&mut rng)]);
    }

    let perplexity = effective_perplexity(config.perplexity, n);
    let p = joint_affinities(&canon, perplexity);

    let mut num = vec![0.0; n * n];
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut grad = vec![[0.0f64; 2]; n];
    let mut kl_trace = Vec::with_capacity(config.iterations);

    for iter in 0..config.iterations {
        let exaggerating = iter < config.exaggeration_iterations;
        let exaggeration = if exaggerating { config.early_exaggeration } else { 1.0 };
        let momentum = if exaggerating { config.initial_momentum } else { config.final_momentum };

        let sum = student_kernel(&y, &mut num);
        kl_trace.push(kl_divergence(&p, &num, sum));

        for i in 0..n {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let nij = num[i * n + j];
                let force = (exaggeration * p[i * n + j] - nij / sum) * nij;
                gx += force * (y[i][0] - y[j][0]);
                gy += force * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * gx, 4.0 * gy];
        }

        for i in 0..n {
            for d in 0..2 {
                let g = grad[i][d];
                let same_sign = (g > 0.0) == (update[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                if gains[i][d] < MIN_GAIN {
                    gains[i][d] = MIN_GAIN;
                }
                update[i][d] = momentum * update[i][d] - config.learning_rate * gains[i][d] * g;
                y[i][d] += update[i][d];
            }
        }

        let (mut cx, mut cy) = (0.0, 0.0);
        for point in &y {
            cx += point[0];
            cy += point[1];
        }
        cx /= n as f64;
        cy /= n as f64;
        for point in y.iter_mut() {
            point[0] -= cx;
            point[1] -= cy;
        }
    }

    let mut positions = vec![[0.0; 2]; n];
    for (canon_idx, original) in order.iter().enumerate() {
        positions[*original] = y[canon_idx];
    }
    Ok(Embedding { positions, kl_trace, perplexity })
}
