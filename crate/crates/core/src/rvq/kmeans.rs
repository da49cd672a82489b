//! Seeded k-means with k-means++ initialization and dead-code reseeding.
//! Fully sequential, so results are bit-reproducible for a given seed and
//! input order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::RvqError;

pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid, ties broken by lowest index.
pub(crate) fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::MAX;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm: k-means++ init from `seed`, then at most `max_iters`
/// rounds, stopping early when no centroid moves more than `shift_tol`.
/// Clusters that lose all members are reseeded to the sample with the
/// largest current quantization error.
pub fn kmeans(
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iters: usize,
    shift_tol: f64,
) -> Result<KMeansResult, RvqError> {
    let n = data.len();
    if n == 0 {
        return Err(RvqError::EmptyDataset);
    }
    if k == 0 || k > n {
        return Err(RvqError::CodesExceedSamples { codes: k, samples: n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(data, k, &mut rng);
    let mut assignments = vec![0usize; n];

    for _ in 0..max_iters {
        for (i, point) in data.iter().enumerate() {
            assignments[i] = nearest(point, &centroids);
        }

        let dim = data[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (point, &a) in data.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(point) {
                *s += v;
            }
        }

        let mut shift = 0.0f64;
        let mut errors: Option<Vec<f64>> = None;
        for c in 0..k {
            if counts[c] == 0 {
                // reseed to the worst-quantized sample
                let errs = errors.get_or_insert_with(|| {
                    data.iter()
                        .zip(&assignments)
                        .map(|(p, &a)| squared_distance(p, &centroids[a]))
                        .collect()
                });
                let (worst, _) = errs
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, e)| if *e > acc.1 { (i, *e) } else { acc });
                centroids[c] = data[worst].clone();
                errs[worst] = -1.0; // each dead code takes a different sample
                shift = f64::MAX;
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let mut moved = 0.0;
            for (j, s) in sums[c].iter().enumerate() {
                let v = s * inv;
                moved += (v - centroids[c][j]) * (v - centroids[c][j]);
                centroids[c][j] = v;
            }
            shift = shift.max(moved.sqrt());
        }

        if shift < shift_tol {
            break;
        }
    }

    for (i, point) in data.iter().enumerate() {
        assignments[i] = nearest(point, &centroids);
    }
    Ok(KMeansResult {
        centroids,
        assignments,
    })
}

fn plus_plus_init(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(data[rng.gen_range(0..n)].clone());
    let mut dists: Vec<f64> = data
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dists.iter().sum();
        let pick = if total <= 0.0 {
            // all remaining points coincide with a centroid; spread over
            // the dataset deterministically
            rng.gen_range(0..n)
        } else {
            let mut threshold = rng.gen::<f64>() * total;
            let mut idx = n - 1;
            for (i, d) in dists.iter().enumerate() {
                if threshold <= *d {
                    idx = i;
                    break;
                }
                threshold -= d;
            }
            idx
        };
        centroids.push(data[pick].clone());
        for (d, p) in dists.iter_mut().zip(data) {
            let nd = squared_distance(p, centroids.last().unwrap());
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}
