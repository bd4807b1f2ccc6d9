//! Independent reference computations used to check library results.

/// Maximizer of mean log-loss plus `l2/2 * |w|^2` (bias unpenalized) by
/// Newton's method. Returns the weights followed by the bias.
pub fn newton_logistic(x: &[Vec<f64>], y: &[bool], l2: f64) -> Vec<f64> {
    let dim = x[0].len() + 1;
    let n = x.len() as f64;
    let row = |i: usize| -> Vec<f64> {
        let mut r = x[i].clone();
        r.push(1.0);
        r
    };
    let mut theta = vec![0.0; dim];
    for _ in 0..100 {
        let mut grad = vec![0.0; dim];
        let mut hess = vec![vec![0.0; dim]; dim];
        for i in 0..x.len() {
            let r = row(i);
            let z: f64 = r.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let p = 1.0 / (1.0 + (-z).exp());
            let err = p - if y[i] { 1.0 } else { 0.0 };
            for a in 0..dim {
                grad[a] += err * r[a] / n;
                for b in 0..dim {
                    hess[a][b] += p * (1.0 - p) * r[a] * r[b] / n;
                }
            }
        }
        for a in 0..dim - 1 {
            grad[a] += l2 * theta[a];
            hess[a][a] += l2;
        }
        let step = solve(hess, grad);
        theta.iter_mut().zip(&step).for_each(|(t, s)| *t -= s);
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-14 {
            break;
        }
    }
    theta
}

// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * out[c]).sum();
        out[r] = (b[r] - s) / a[r][r];
    }
    out
}

/// Largest total weight of a one-to-one matching, by exhaustive search.
/// `weights[i][j]` is `None` where row `i` may not match column `j`.
pub fn best_matching_weight(weights: &[Vec<Option<f64>>]) -> f64 {
    fn go(i: usize, weights: &[Vec<Option<f64>>], used: &mut Vec<bool>) -> f64 {
        if i == weights.len() {
            return 0.0;
        }
        let mut best = go(i + 1, weights, used);
        for j in 0..used.len() {
            if let (false, Some(w)) = (used[j], weights[i][j]) {
                used[j] = true;
                best = best.max(w + go(i + 1, weights, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    go(0, weights, &mut vec![false; cols])
}

/// Every maximum-weight one-to-one matching, as lists of (row, column).
pub fn optimal_matchings(weights: &[Vec<Option<f64>>], tol: f64) -> Vec<Vec<(usize, usize)>> {
    fn go(
        i: usize,
        weights: &[Vec<Option<f64>>],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        acc: f64,
        out: &mut Vec<(f64, Vec<(usize, usize)>)>,
    ) {
        if i == weights.len() {
            out.push((acc, cur.clone()));
            return;
        }
        go(i + 1, weights, used, cur, acc, out);
        for j in 0..used.len() {
            if let (false, Some(w)) = (used[j], weights[i][j]) {
                used[j] = true;
                cur.push((i, j));
                go(i + 1, weights, used, cur, acc + w, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    let mut all = Vec::new();
    go(0, weights, &mut vec![false; cols], &mut Vec::new(), 0.0, &mut all);
    let best = all.iter().map(|(w, _)| *w).fold(f64::NEG_INFINITY, f64::max);
    all.into_iter()
        .filter(|(w, _)| best - w <= tol)
        .map(|(_, m)| m)
        .collect()
}

/// Whether a greedy pass over the allowed pairs in order of `key` (larger
/// first, no ties assumed) picks exactly `matching`.
pub fn greedy_consistent(
    weights: &[Vec<Option<f64>>],
    matching: &[(usize, usize)],
    key: impl Fn(usize, usize) -> f64,
) -> bool {
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for (i, row) in weights.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            if w.is_some() {
                cands.push((i, j));
            }
        }
    }
    cands.sort_by(|a, b| key(b.0, b.1).total_cmp(&key(a.0, a.1)));
    // replay greedy with the matching as the only admissible picks
    let mut rows = std::collections::HashSet::new();
    let mut cols = std::collections::HashSet::new();
    for (i, j) in cands {
        if rows.contains(&i) || cols.contains(&j) {
            continue;
        }
        if !matching.contains(&(i, j)) {
            return false;
        }
        rows.insert(i);
        cols.insert(j);
    }
    rows.len() == matching.len()
}

/// Order rule checked directly on indices: every predecessor that occurs
/// has an index below `position`, every successor that occurs one above.
pub fn order_holds(seq: &[usize], position: usize, preds: &[usize], succs: &[usize]) -> bool {
    for &p in preds {
        let occurs = seq.contains(&p);
        let before = (0..position.min(seq.len())).any(|k| seq[k] == p);
        if occurs && !before {
            return false;
        }
    }
    for &s in succs {
        let occurs = seq.contains(&s);
        let after = (position + 1..seq.len()).any(|k| seq[k] == s);
        if occurs && !after {
            return false;
        }
    }
    true
}

/// All distinct orderings of a multiset of action indices.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut out = vec![sorted.clone()];
    // next lexicographic permutation until it wraps
    loop {
        let Some(i) = (0..sorted.len().saturating_sub(1)).rev().find(|&i| sorted[i] < sorted[i + 1]) else {
            return out;
        };
        let j = (i + 1..sorted.len()).rev().find(|&j| sorted[j] > sorted[i]).unwrap();
        sorted.swap(i, j);
        sorted[i + 1..].reverse();
        out.push(sorted.clone());
    }
}

/// Mean of 0/1 indicators.
pub fn indicator_mean(hits: &[bool]) -> f64 {
    hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64
}

/// Plain Lloyd iterations from the given initial centroid indices; returns
/// the final assignment. Assumes no cluster ever empties.
pub fn lloyd(points: &[Vec<f64>], init: &[usize], max_iters: usize) -> Vec<usize> {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    let mut centroids: Vec<Vec<f64>> = init.iter().map(|&i| points[i].clone()).collect();
    let assign = |centroids: &[Vec<f64>]| -> Vec<usize> {
        points
            .iter()
            .map(|p| {
                (0..centroids.len())
                    .min_by(|&a, &b| dist(p, &centroids[a]).total_cmp(&dist(p, &centroids[b])))
                    .unwrap()
            })
            .collect()
    };
    let mut assignment = assign(&centroids);
    for _ in 0..max_iters {
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points.iter().zip(&assignment).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            for (d, v) in centroid.iter_mut().enumerate() {
                *v = members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64;
            }
        }
        let next = assign(&centroids);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    assignment
}
