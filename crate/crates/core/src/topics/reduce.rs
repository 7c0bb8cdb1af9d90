//! Neighbour-graph dimensionality reduction (UMAP-style).
//!
//! Exact cosine k-nearest neighbours, smooth-kNN membership strengths, fuzzy
//! union symmetrisation, spectral initialisation, then attractive/repulsive
//! SGD on the low-dimensional layout.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceParams {
    pub n_components: usize,
    pub n_neighbors: usize,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub seed: u64,
}

impl Default for ReduceParams {
    fn default() -> Self {
        Self { n_components: 5, n_neighbors: 15, n_epochs: 500, negative_sample_rate: 5, seed: 42 }
    }
}

// Curve parameters fitted for min_dist = 0, spread = 1.
const A: f64 = 1.932808;
const B: f64 = 0.790495;
const GAMMA: f64 = 1.0;
const CLIP: f64 = 4.0;
const SPECTRAL_MAX_N: usize = 1000;

pub(crate) fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 && nb == 0.0 {
        return 0.0;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
}

/// For each point, its `k` nearest other points by cosine distance
/// (ties by index).
fn knn(data: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = data.len();
    (0..n)
        .map(|i| {
            let mut d: Vec<(usize, f64)> =
                (0..n).filter(|&j| j != i).map(|j| (j, cosine_distance(&data[i], &data[j]))).collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect()
}

/// Membership strengths exp(-(d - rho) / sigma), with sigma chosen so each
/// row sums to log2(k).
fn smooth_knn(neigh: &[Vec<(usize, f64)>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let target = (k as f64).log2();
    let mean_all = {
        let all: Vec<f64> = neigh.iter().flatten().map(|x| x.1).collect();
        all.iter().sum::<f64>() / all.len().max(1) as f64
    };
    neigh
        .iter()
        .map(|row| {
            let rho = row.iter().map(|x| x.1).find(|d| *d > 0.0).unwrap_or(0.0);
            let psum = |sigma: f64| row.iter().map(|x| (-((x.1 - rho).max(0.0)) / sigma).exp()).sum::<f64>();
            let (mut lo, mut hi, mut mid) = (0.0, f64::INFINITY, 1.0);
            for _ in 0..64 {
                let s = psum(mid);
                if (s - target).abs() < 1e-5 {
                    break;
                }
                if s > target {
                    hi = mid;
                    mid = (lo + hi) / 2.0;
                } else {
                    lo = mid;
                    mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
                }
            }
            let row_mean = row.iter().map(|x| x.1).sum::<f64>() / row.len().max(1) as f64;
            let floor = 1e-3 * if rho > 0.0 { row_mean } else { mean_all };
            let sigma = mid.max(floor).max(1e-12);
            row.iter().map(|&(j, d)| (j, (-((d - rho).max(0.0)) / sigma).exp())).collect()
        })
        .collect()
}

/// Fuzzy union a + b - ab; returns undirected edges (i < j).
fn symmetrize(strengths: &[Vec<(usize, f64)>]) -> Vec<(usize, usize, f64)> {
    let mut w = std::collections::BTreeMap::new();
    for (i, row) in strengths.iter().enumerate() {
        for &(j, v) in row {
            w.insert((i, j), v);
        }
    }
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j) in w.keys() {
        let (a, b) = (i.min(j), i.max(j));
        if !seen.insert((a, b)) {
            continue;
        }
        let x = w.get(&(a, b)).copied().unwrap_or(0.0);
        let y = w.get(&(b, a)).copied().unwrap_or(0.0);
        let v = x + y - x * y;
        if v > 0.0 {
            edges.push((a, b, v));
        }
    }
    edges
}

fn spectral_init(n: usize, dim: usize, edges: &[(usize, usize, f64)], rng: &mut ChaCha8Rng) -> Option<Vec<Vec<f64>>> {
    if n > SPECTRAL_MAX_N || n < dim + 2 {
        return None;
    }
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(i, j, v) in edges {
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    let deg: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    if deg.iter().any(|d| *d <= 0.0) {
        return None;
    }
    let mut l = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                l[(i, j)] -= w[(i, j)] / (deg[i] * deg[j]).sqrt();
            }
        }
    }
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let cols: Vec<usize> = order[1..=dim].to_vec();
    let mut coords: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|&c| eig.eigenvectors[(i, c)]).collect()).collect();
    let max = coords.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max > 0.0) || !max.is_finite() {
        return None;
    }
    let scale = 10.0 / max;
    for row in &mut coords {
        for v in row.iter_mut() {
            *v = *v * scale + rng.gen_range(-1e-4..1e-4);
        }
    }
    Some(coords)
}

fn clip(v: f64) -> f64 {
    v.clamp(-CLIP, CLIP)
}

fn optimize(y: &mut [Vec<f64>], edges: &[(usize, usize, f64)], params: &ReduceParams, rng: &mut ChaCha8Rng) {
    let n = y.len();
    let dim = params.n_components;
    let n_epochs = params.n_epochs;
    let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    // both directions of every undirected edge, dropping ones too weak to sample
    let mut directed = Vec::new();
    for &(i, j, w) in edges {
        if w >= max_w / n_epochs as f64 {
            directed.push((i, j, max_w / w));
            directed.push((j, i, max_w / w));
        }
    }
    let eps: Vec<f64> = directed.iter().map(|e| e.2).collect();
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / params.negative_sample_rate as f64).collect();
    let mut next = eps.clone();
    let mut next_neg = eps_neg.clone();
    let mut diff = vec![0.0; dim];
    for epoch in 0..n_epochs {
        let alpha = 1.0 - epoch as f64 / n_epochs as f64;
        let e_f = epoch as f64;
        for (ei, &(i, j, _)) in directed.iter().enumerate() {
            if next[ei] > e_f {
                continue;
            }
            let mut d2 = 0.0;
            for c in 0..dim {
                diff[c] = y[i][c] - y[j][c];
                d2 += diff[c] * diff[c];
            }
            let coeff = if d2 > 0.0 { -2.0 * A * B * d2.powf(B - 1.0) / (A * d2.powf(B) + 1.0) } else { 0.0 };
            for c in 0..dim {
                let g = clip(coeff * diff[c]) * alpha;
                y[i][c] += g;
                y[j][c] -= g;
            }
            next[ei] += eps[ei];
            let n_neg = ((e_f - next_neg[ei]) / eps_neg[ei]).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let k = rng.gen_range(0..n);
                if k == i {
                    continue;
                }
                let mut d2 = 0.0;
                for c in 0..dim {
                    diff[c] = y[i][c] - y[k][c];
                    d2 += diff[c] * diff[c];
                }
                let coeff = if d2 > 0.0 { 2.0 * GAMMA * B / ((0.001 + d2) * (A * d2.powf(B) + 1.0)) } else { 0.0 };
                for c in 0..dim {
                    let g = if coeff > 0.0 { clip(coeff * diff[c]) } else { CLIP };
                    y[i][c] += g * alpha;
                }
            }
            next_neg[ei] += n_neg as f64 * eps_neg[ei];
        }
    }
}

/// Projects `data` (rows) to `params.n_components` dimensions. Deterministic
/// for a fixed seed.
pub fn reduce_dimensions(data: &[Vec<f64>], params: &ReduceParams) -> Vec<Vec<f64>> {
    let n = data.len();
    let dim = params.n_components;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    if n <= 2 {
        return (0..n).map(|i| (0..dim).map(|c| if c == 0 { i as f64 } else { 0.0 }).collect()).collect();
    }
    let k = params.n_neighbors.min(n - 1).max(2);
    let neigh = knn(data, k);
    let strengths = smooth_knn(&neigh, k);
    let edges = symmetrize(&strengths);
    let mut y = spectral_init(n, dim, &edges, &mut rng)
        .unwrap_or_else(|| (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect());
    optimize(&mut y, &edges, params, &mut rng);
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for b in 0..3 {
            for _ in 0..20 {
                let mut v = vec![0.0; 16];
                v[b * 5] = 1.0;
                for x in v.iter_mut() {
                    *x += rng.gen_range(-0.05..0.05);
                }
                data.push(v);
                labels.push(b);
            }
        }
        (data, labels)
    }

    #[test]
    fn deterministic_for_seed() {
        let (data, _) = blobs(1);
        let p = ReduceParams { n_epochs: 100, ..Default::default() };
        assert_eq!(reduce_dimensions(&data, &p), reduce_dimensions(&data, &p));
    }

    #[test]
    fn keeps_blobs_apart() {
        let (data, labels) = blobs(2);
        let y = reduce_dimensions(&data, &ReduceParams::default());
        assert_eq!(y.len(), 60);
        assert!(y.iter().all(|r| r.len() == 5 && r.iter().all(|v| v.is_finite())));
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let mut max_in: f64 = 0.0;
        let mut min_out = f64::INFINITY;
        for i in 0..60 {
            for j in i + 1..60 {
                if labels[i] == labels[j] {
                    max_in = max_in.max(d(&y[i], &y[j]));
                } else {
                    min_out = min_out.min(d(&y[i], &y[j]));
                }
            }
        }
        assert!(min_out > max_in, "{min_out} vs {max_in}");
    }

    #[test]
    fn smooth_knn_rows_hit_target() {
        let (data, _) = blobs(3);
        let k = 15;
        let s = smooth_knn(&knn(&data, k), k);
        for row in s {
            let sum: f64 = row.iter().map(|x| x.1).sum();
            assert!((sum - (k as f64).log2()).abs() < 1e-3, "{sum}");
        }
    }
}
