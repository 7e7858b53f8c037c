//! Deterministic k-means over 2D points: seeded k-means++ initialization,
//! Lloyd iterations until centers move less than 1e-7 or 300 rounds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ITERS: usize = 300;
const MOVE_TOL: f64 = 1e-7;

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn count_distinct(points: &[[f64; 2]]) -> usize {
    let mut keys: Vec<(u64, u64)> = points
        .iter()
        .map(|p| (p[0].to_bits(), p[1].to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Clusters `points` into `k` centers. `k` must not exceed the number of
/// distinct points (callers clamp). Deterministic for a fixed seed; empty
/// clusters are re-seeded to the farthest point from its current center,
/// ties broken by lowest point index.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    if k == 0 {
        return Err(Error::Argument("k must be >= 1".into()));
    }
    if k > count_distinct(points) {
        return Err(Error::Argument(format!(
            "k = {k} exceeds the number of distinct points ({})",
            count_distinct(points)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);

    let mut assignment = vec![0usize; points.len()];
    for _ in 0..MAX_ITERS {
        // Assignment step; ties go to the lowest center index.
        for (pi, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = dist2(*p, centers[0]);
            for (ci, c) in centers.iter().enumerate().skip(1) {
                let d = dist2(*p, *c);
                if d < best_d {
                    best_d = d;
                    best = ci;
                }
            }
            assignment[pi] = best;
        }

        // Update step.
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (pi, p) in points.iter().enumerate() {
            let c = assignment[pi];
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1;
        }
        let mut moved = 0.0f64;
        for ci in 0..k {
            let new = if counts[ci] == 0 {
                farthest_point(points, &centers, &assignment)
            } else {
                [
                    sums[ci][0] / counts[ci] as f64,
                    sums[ci][1] / counts[ci] as f64,
                ]
            };
            moved = moved.max(dist2(centers[ci], new).sqrt());
            centers[ci] = new;
        }
        if moved < MOVE_TOL {
            break;
        }
    }
    Ok(centers)
}

fn plus_plus_init(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(*p, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            // Weighted draw proportional to squared distance.
            let r: f64 = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if r < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is on existing centers; take the first
            // point not already a center (distinct-count precondition
            // guarantees one exists only when needed).
            points
                .iter()
                .position(|p| centers.iter().all(|c| c != p))
                .unwrap_or(0)
        };
        let c = points[next];
        centers.push(c);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(*p, c));
        }
    }
    centers
}

/// The point farthest from its assigned center, lowest index on ties.
fn farthest_point(points: &[[f64; 2]], centers: &[[f64; 2]], assignment: &[usize]) -> [f64; 2] {
    let mut best = 0usize;
    let mut best_d = -1.0f64;
    for (pi, p) in points.iter().enumerate() {
        let d = dist2(*p, centers[assignment[pi]]);
        if d > best_d {
            best_d = d;
            best = pi;
        }
    }
    points[best]
}
