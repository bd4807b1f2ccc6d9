use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EmbeddingTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct ClusterOptions {
    pub max_iters: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions { max_iters: 300 }
    }
}

/// Indices of the `k` points used as initial centroids for a given seed.
pub fn initial_centroids(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n, k).into_vec()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Partitions `terms` into `k` non-empty clusters with K-means over their vectors.
///
/// Clusters come back ordered by their first member's position in `terms`,
/// members in input order. Output is a pure function of the inputs and `seed`.
pub fn cluster_terms(
    terms: &[String],
    embeddings: &EmbeddingTable,
    k: usize,
    seed: u64,
    opts: ClusterOptions,
) -> Result<Vec<Vec<String>>> {
    if k == 0 || k > terms.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..={}",
            terms.len()
        )));
    }
    let points: Vec<&[f64]> = terms
        .iter()
        .map(|t| embeddings.get(t).ok_or_else(|| Error::MissingEmbedding(t.clone())))
        .collect::<Result<_>>()?;

    let mut centroids: Vec<Vec<f64>> = initial_centroids(points.len(), k, seed)
        .into_iter()
        .map(|i| points[i].to_vec())
        .collect();
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();

    for _ in 0..opts.max_iters {
        fill_empty_clusters(&points, &mut centroids, &mut assignment);
        centroids = means(&points, &assignment, k);
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    fill_empty_clusters(&points, &mut centroids, &mut assignment);

    let mut clusters: Vec<Vec<String>> = vec![Vec::new(); k];
    for (term, &c) in terms.iter().zip(&assignment) {
        clusters[c].push(term.clone());
    }
    let mut order: Vec<(usize, Vec<String>)> = clusters
        .into_iter()
        .map(|members| {
            let first = terms.iter().position(|t| t == &members[0]).unwrap_or(0);
            (first, members)
        })
        .collect();
    order.sort_by_key(|(first, _)| *first);
    Ok(order.into_iter().map(|(_, m)| m).collect())
}

// Moves the point farthest from its centroid (taken from a cluster with more
// than one member) into each empty cluster.
fn fill_empty_clusters(points: &[&[f64]], centroids: &mut [Vec<f64>], assignment: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        assignment.iter().for_each(|&c| sizes[c] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor = None;
        let mut donor_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            if sizes[c] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[c]);
            if d > donor_d {
                donor = Some(i);
                donor_d = d;
            }
        }
        let i = donor.expect("k <= n guarantees a cluster with two members");
        assignment[i] = empty;
        centroids[empty] = points[i].to_vec();
    }
}

fn means(points: &[&[f64]], assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        sums[c].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
    }
    for (sum, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            sum.iter_mut().for_each(|s| *s /= n as f64);
        }
    }
    sums
}
