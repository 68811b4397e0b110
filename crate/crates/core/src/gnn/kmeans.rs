//! k-means with k-means++ seeding and restarts, for partition extraction
//! from embedding models.

use crate::linalg::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// k-means++ seeding: sample each next center proportional to the squared
/// distance from the nearest chosen one. When all remaining mass is zero
/// (duplicate points) the lowest unchosen index is taken.
fn seed_centers(points: &Mat, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.rows;
    let mut centers = Vec::with_capacity(k);
    centers.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), points.row(centers[0])))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            (0..n).find(|i| !centers.contains(i)).unwrap_or(0)
        };
        centers.push(next);
        for i in 0..n {
            let d = sq_dist(points.row(i), points.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

fn lloyd(points: &Mat, centers: &mut Mat, assignment: &mut [usize]) -> f64 {
    let n = points.rows;
    let k = centers.rows;
    let dim = points.cols;
    let mut inertia = 0.0;
    for _ in 0..100 {
        inertia = 0.0;
        let mut changed = false;
        for i in 0..n {
            let row = points.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(row, centers.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            inertia += best_d;
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Mat::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            let dst = sums.row_mut(assignment[i]);
            for (d, &s) in dst.iter_mut().zip(points.row(i)) {
                *d += s;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let dst = centers.row_mut(c);
                for (d, &s) in dst.iter_mut().zip(sums.row(c)) {
                    *d = s / counts[c] as f64;
                }
            }
            // empty cluster: keep the stale center
        }
    }
    inertia
}

/// Clusters rows of `points` into `k` groups; `restarts` independent
/// k-means++ seedings, best inertia wins (earliest on ties). Nearest-center
/// ties go to the lowest cluster id.
pub fn kmeans(points: &Mat, k: usize, restarts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.rows;
    assert!(k >= 1 && k <= n, "k must be in [1, n]");
    if k == n {
        return (0..n).collect();
    }
    if k == 1 {
        return vec![0; n];
    }
    let mut best_assignment = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;
    for _ in 0..restarts.max(1) {
        let seeds = seed_centers(points, k, rng);
        let mut centers = Mat::zeros(k, points.cols);
        for (c, &s) in seeds.iter().enumerate() {
            centers.row_mut(c).copy_from_slice(points.row(s));
        }
        let mut assignment = vec![0usize; n];
        // initial assignment before the first Lloyd sweep is overwritten
        let inertia = lloyd(points, &mut centers, &mut assignment);
        if inertia < best_inertia {
            best_inertia = inertia;
            best_assignment = assignment;
        }
    }
    best_assignment
}
