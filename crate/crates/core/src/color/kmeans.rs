//! Seeded k-means over RGB pixels.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hsv::Rgb;

pub const MAX_ITERATIONS: usize = 50;
/// Stop once no centroid moves further than this (RGB units).
pub const CONVERGENCE_SHIFT: f64 = 0.5;

type Point = [f64; 3];

fn dist2(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<[f64; 3]>,
    pub sizes: Vec<usize>,
    pub iterations: usize,
}

impl Clustering {
    /// Index of the most populated cluster, lowest index on ties.
    pub fn largest(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.sizes.iter().enumerate() {
            if s > self.sizes[best] {
                best = i;
            }
        }
        best
    }
}

fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// k-means++ seeding followed by Lloyd iterations. `k` is reduced to the
/// number of distinct colors when there are fewer.
pub fn kmeans(pixels: &[Rgb], k: usize, seed: u64) -> Clustering {
    assert!(!pixels.is_empty(), "k-means needs at least one pixel");
    let distinct: BTreeSet<(u8, u8, u8)> = pixels.iter().map(|p| (p.r, p.g, p.b)).collect();
    let k = k.clamp(1, distinct.len());
    let points: Vec<Point> = pixels
        .iter()
        .map(|p| [p.r as f64, p.g as f64, p.b as f64])
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Point> = vec![points[rng.gen_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        // total > 0 because fewer centroids than distinct colors remain
        let mut target = rng.gen_range(0.0..total);
        let mut pick = points.len() - 1;
        for (i, &w) in d2.iter().enumerate() {
            if target < w {
                pick = i;
                break;
            }
            target -= w;
        }
        if d2[pick] == 0.0 {
            // float round-off landed on an existing centroid
            pick = d2
                .iter()
                .position(|&w| w > 0.0)
                .expect("an uncovered color exists");
        }
        let c = points[pick];
        for (w, p) in d2.iter_mut().zip(&points) {
            *w = w.min(dist2(p, &c));
        }
        centroids.push(c);
    }

    let mut assignment = vec![0usize; points.len()];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for (a, p) in assignment.iter_mut().zip(&points) {
            *a = nearest(p, &centroids);
        }
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assignment.iter().zip(&points) {
            counts[*a] += 1;
            for i in 0..3 {
                sums[*a][i] += p[i];
            }
        }
        let mut max_shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let next = sums[c].map(|s| s / counts[c] as f64);
            max_shift = max_shift.max(dist2(&next, &centroids[c]).sqrt());
            centroids[c] = next;
        }
        if max_shift < CONVERGENCE_SHIFT {
            break;
        }
    }

    let mut sizes = vec![0usize; k];
    for (a, p) in assignment.iter_mut().zip(&points) {
        *a = nearest(p, &centroids);
        sizes[*a] += 1;
    }
    Clustering {
        centroids,
        sizes,
        iterations,
    }
}

/// Centroid of the largest cluster, rounded to 8-bit channels.
pub fn dominant_color(pixels: &[Rgb], k: usize, seed: u64) -> Rgb {
    let clustering = kmeans(pixels, k, seed);
    let c = clustering.centroids[clustering.largest()];
    let ch = |v: f64| v.round().clamp(0.0, 255.0) as u8;
    Rgb::new(ch(c[0]), ch(c[1]), ch(c[2]))
}
