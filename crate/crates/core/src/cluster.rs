//! Clustering of parts (Ward on CLR profiles, amalgamation clustering) and of
//! rows (k-means), and agreement between two clusterings.

use kodama::{linkage, Method};
use nalgebra::DMatrix;
use pathfinding::matrix::Matrix;
use pathfinding::prelude::kuhn_munkres;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compmat::CompositionMatrix;
use crate::error::{invalid, CodaError, Result};
use crate::transforms::{clr, ContrastTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeightKind {
    WardDistance,
    VarianceLossPercent,
}

/// One agglomeration. Leaves are `0..D`; the node created by merge `i` is
/// `D + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    pub leaf_names: Vec<String>,
    pub height_kind: HeightKind,
}

impl Dendrogram {
    pub fn nleaves(&self) -> usize {
        self.leaf_names.len()
    }

    /// Leaves under `node`, in left-to-right order.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let d = self.nleaves();
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if n < d {
                out.push(n);
            } else {
                let m = self.merges[n - d];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Left-to-right leaf order of the whole tree.
    pub fn order(&self) -> Vec<usize> {
        if self.merges.is_empty() {
            return (0..self.nleaves()).collect();
        }
        self.leaves(self.nleaves() + self.merges.len() - 1)
    }

    /// Binary partition of the tree: one split per internal node in preorder
    /// from the root, left child as numerator.
    pub fn to_contrast_tree(&self) -> Result<ContrastTree> {
        let d = self.nleaves();
        if self.merges.len() + 1 != d {
            return Err(CodaError::InvalidTree("dendrogram is incomplete".into()));
        }
        let mut splits = Vec::with_capacity(d - 1);
        let mut stack = vec![d + self.merges.len() - 1];
        while let Some(n) = stack.pop() {
            if n < d {
                continue;
            }
            let m = self.merges[n - d];
            splits.push((self.leaves(m.left), self.leaves(m.right)));
            stack.push(m.right);
            stack.push(m.left);
        }
        ContrastTree::new(d, splits)
    }
}

/// Ward clustering of the parts, each part described by its CLR column.
/// Heights follow the Lance-Williams Ward update on Euclidean distances, so
/// two singletons merge at their distance.
pub fn ward_parts(c: &CompositionMatrix) -> Result<Dendrogram> {
    let y = clr(c)?.values;
    let d = y.ncols();
    let mut condensed = Vec::with_capacity(d * (d - 1) / 2);
    for j in 0..d {
        for k in (j + 1)..d {
            condensed.push((y.column(j) - y.column(k)).norm());
        }
    }
    let dend = linkage(&mut condensed, d, Method::Ward);
    let merges = dend
        .steps()
        .iter()
        .map(|s| Merge {
            left: s.cluster1.min(s.cluster2),
            right: s.cluster1.max(s.cluster2),
            height: s.dissimilarity,
            size: s.size,
        })
        .collect();
    Ok(Dendrogram {
        merges,
        leaf_names: c.part_names().to_vec(),
        height_kind: HeightKind::WardDistance,
    })
}

fn population_var(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - m) * (x - m)).sum::<f64>() / n
}

/// Amalgamation clustering of parts: at each step the two clusters whose
/// summation loses the least total logratio variance are merged. Cluster
/// weights are the sums of their part weights. Heights are the percentage of
/// the original total variance lost at each step; they add up to 100.
pub fn amalgamation_cluster(c: &CompositionMatrix) -> Result<Dendrogram> {
    c.require_positive("amalgamation_cluster")?;
    let d = c.nparts();
    let n = c.nrows();
    let x = c.values();
    // per active cluster: node id, weight, block sums per row, log sums
    let mut node: Vec<usize> = (0..d).collect();
    let mut weight: Vec<f64> = c.weights().to_vec();
    let mut sums: Vec<Vec<f64>> = (0..d).map(|j| x.column(j).iter().cloned().collect()).collect();
    let mut logs: Vec<Vec<f64>> = sums.iter().map(|s| s.iter().map(|v| v.ln()).collect()).collect();
    let mut sizes = vec![1usize; d];
    let tau = |a: &[f64], b: &[f64]| population_var(a.iter().zip(b).map(|(p, q)| p - q));
    let mut t: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| if a == b { 0.0 } else { tau(&logs[a], &logs[b]) }).collect())
        .collect();
    let totvar = |t: &Vec<Vec<f64>>, w: &[f64]| {
        let k = w.len();
        let mut s = 0.0;
        for a in 0..k {
            for b in (a + 1)..k {
                s += w[a] * w[b] * t[a][b];
            }
        }
        s
    };
    let original = totvar(&t, &weight);
    if original <= 0.0 {
        return Err(CodaError::Degenerate("total logratio variance is zero".into()));
    }
    let mut current = original;
    let mut merges = Vec::with_capacity(d - 1);
    while node.len() > 1 {
        let k = node.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| ((a + 1)..k).map(move |b| (a, b))).collect();
        // total after merging a and b: drop their terms, add the merged block's
        let scored: Vec<(f64, Vec<f64>)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let merged: Vec<f64> = (0..n).map(|i| (sums[a][i] + sums[b][i]).ln()).collect();
                let wm = weight[a] + weight[b];
                let mut s = current - weight[a] * weight[b] * t[a][b];
                let mut row = vec![0.0; k];
                for x in 0..k {
                    if x == a || x == b {
                        continue;
                    }
                    s -= weight[a] * weight[x] * t[a][x] + weight[b] * weight[x] * t[b][x];
                    row[x] = tau(&merged, &logs[x]);
                    s += wm * weight[x] * row[x];
                }
                (s, row)
            })
            .collect();
        let mut best = 0;
        for q in 1..pairs.len() {
            if scored[q].0 > scored[best].0 + 1e-15 * original {
                best = q;
            }
        }
        let (a, b) = pairs[best];
        let (after, row) = scored[best].clone();
        let loss = current - after;
        merges.push(Merge {
            left: node[a].min(node[b]),
            right: node[a].max(node[b]),
            height: 100.0 * loss / original,
            size: sizes[a] + sizes[b],
        });
        current = after;
        // the merged cluster takes slot a; slot b is removed
        for i in 0..n {
            sums[a][i] += sums[b][i];
            logs[a][i] = sums[a][i].ln();
        }
        weight[a] += weight[b];
        sizes[a] += sizes[b];
        node[a] = d + merges.len() - 1;
        for x in 0..k {
            if x != a && x != b {
                t[a][x] = row[x];
                t[x][a] = row[x];
            }
        }
        for v in t.iter_mut() {
            v.remove(b);
        }
        t.remove(b);
        node.remove(b);
        weight.remove(b);
        sums.remove(b);
        logs.remove(b);
        sizes.remove(b);
    }
    Ok(Dendrogram {
        merges,
        leaf_names: c.part_names().to_vec(),
        height_kind: HeightKind::VarianceLossPercent,
    })
}

#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    /// Cluster index per row, `0..k`.
    pub labels: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squares.
    pub inertia: f64,
    /// Inertia after each Lloyd iteration of the retained restart.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            seed: 0,
        }
    }
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &[Vec<f64>], g: usize) -> f64 {
    (0..x.ncols()).map(|j| (x[(i, j)] - c[g][j]).powi(2)).sum()
}

/// k-means with k-means++ seeding and Lloyd iterations; the restart with the
/// lowest inertia is kept. Restart `r` uses its own seeded stream.
pub fn kmeans(features: &DMatrix<f64>, k: usize, opts: &KMeansOptions) -> Result<ClusterAssignment> {
    let n = features.nrows();
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must be in 1..={n}")));
    }
    if opts.restarts == 0 {
        return Err(invalid("at least one restart is required"));
    }
    let runs: Vec<ClusterAssignment> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            lloyd(features, k, opts.max_iter, &mut rng)
        })
        .collect();
    let mut best = 0;
    for r in 1..runs.len() {
        if runs[r].inertia < runs[best].inertia {
            best = r;
        }
    }
    Ok(runs[best].clone())
}

fn lloyd(x: &DMatrix<f64>, k: usize, max_iter: usize, rng: &mut ChaCha8Rng) -> ClusterAssignment {
    let (n, p) = x.shape();
    let row = |i: usize| (0..p).map(|j| x[(i, j)]).collect::<Vec<f64>>();
    // k-means++ seeding
    let mut centres: Vec<Vec<f64>> = vec![row(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x, i, &centres, 0)).collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &v) in d2.iter().enumerate() {
                if u < v {
                    chosen = i;
                    break;
                }
                u -= v;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centres.push(row(pick));
        let g = centres.len() - 1;
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(x, i, &centres, g));
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut inertia = 0.0;
        for i in 0..n {
            let mut bg = 0;
            let mut bd = f64::INFINITY;
            for g in 0..k {
                let dd = sq_dist(x, i, &centres, g);
                if dd < bd {
                    bd = dd;
                    bg = g;
                }
            }
            if labels[i] != bg {
                labels[i] = bg;
                changed = true;
            }
            inertia += bd;
        }
        trace.push(inertia);
        if !changed && trace.len() > 1 {
            break;
        }
        // refill empty clusters with the point farthest from its centre
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        for g in 0..k {
            if counts[g] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| {
                        sq_dist(x, a, &centres, labels[a])
                            .total_cmp(&sq_dist(x, b, &centres, labels[b]))
                            .then(b.cmp(&a))
                    })
                    .expect("k <= n leaves a donor cluster");
                counts[labels[far]] -= 1;
                labels[far] = g;
                counts[g] = 1;
            }
        }
        let mut sums = vec![vec![0.0; p]; k];
        for i in 0..n {
            for j in 0..p {
                sums[labels[i]][j] += x[(i, j)];
            }
        }
        for g in 0..k {
            for j in 0..p {
                centres[g][j] = sums[g][j] / counts[g] as f64;
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(x, i, &centres, labels[i])).sum();
    if trace.last() != Some(&inertia) {
        trace.push(inertia);
    }
    let (labels, _) = relabel(&labels);
    ClusterAssignment {
        labels,
        k,
        inertia,
        trace,
    }
}

/// Renumbers labels by first appearance.
fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map: Vec<(usize, usize)> = Vec::new();
    let out = labels
        .iter()
        .map(|&l| match map.iter().find(|m| m.0 == l) {
            Some(m) => m.1,
            None => {
                map.push((l, map.len()));
                map.len() - 1
            }
        })
        .collect();
    (out, map.len())
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Vec<Vec<u64>>> {
    if a.len() != b.len() {
        return Err(CodaError::DimensionMismatch {
            what: "clustering lengths",
            expected: a.len(),
            found: b.len(),
        });
    }
    let (a, ka) = relabel(a);
    let (b, kb) = relabel(b);
    let mut t = vec![vec![0u64; kb]; ka];
    for (x, y) in a.iter().zip(&b) {
        t[*x][*y] += 1;
    }
    Ok(t)
}

/// Hubert-Arabie adjusted Rand index. Two trivial partitions that agree
/// (both all-in-one or both all-singletons) score 1.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    let c2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let n = a.len() as u64;
    let sum_ij: f64 = t.iter().flatten().map(|&x| c2(x)).sum();
    let sum_a: f64 = t.iter().map(|r| c2(r.iter().sum())).sum();
    let sum_b: f64 = (0..t.first().map_or(0, |r| r.len()))
        .map(|j| c2(t.iter().map(|r| r[j]).sum()))
        .sum();
    let total = c2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < 1e-300 {
        return Ok(1.0);
    }
    Ok((sum_ij - expected) / (max - expected))
}

/// Share of rows with equal labels after the best one-to-one matching of the
/// cluster labels.
pub fn matched_agreement(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    let ka = t.len();
    let kb = t.first().map_or(0, |r| r.len());
    let m = ka.max(kb);
    if a.is_empty() {
        return Ok(1.0);
    }
    let w = Matrix::from_fn(m, m, |(i, j)| {
        if i < ka && j < kb {
            t[i][j] as i64
        } else {
            0
        }
    });
    let (total, _) = kuhn_munkres(&w);
    Ok(total as f64 / a.len() as f64)
}
