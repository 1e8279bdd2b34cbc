//! Distances between rows (or parts), Procrustes correlation and stress.
//!
//! Logratio distances follow the column weights of the [`LogratioMatrix`]
//! they are computed from, so the CLR and all-pairs LR forms give the same
//! distances, and an ALR distance (weights `c_j c_ref`) is the all-pairs
//! distance with the pairs not involving the reference left out. That makes
//! ALR distances lower bounds of the CLR distances.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compmat::CompositionMatrix;
use crate::error::{invalid, CodaError, Result};
use crate::linalg::{center_columns_uniform, nuclear_norm};
use crate::transforms::{clr, LogratioMatrix};

/// Symmetric matrix of nonnegative distances with zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub values: DMatrix<f64>,
    pub ids: Vec<String>,
}

impl DistanceMatrix {
    pub fn new(values: DMatrix<f64>, ids: Vec<String>) -> Result<Self> {
        let m = values.nrows();
        if values.ncols() != m || ids.len() != m {
            return Err(CodaError::DimensionMismatch {
                what: "distance matrix",
                expected: m,
                found: ids.len(),
            });
        }
        for i in 0..m {
            if values[(i, i)] != 0.0 {
                return Err(invalid("distance matrix diagonal must be zero"));
            }
            for j in 0..i {
                let (a, b) = (values[(i, j)], values[(j, i)]);
                if a < 0.0 || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(invalid("distance matrix must be symmetric and nonnegative"));
                }
            }
        }
        Ok(Self { values, ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Upper-triangle entries in row-major order.
    pub fn condensed(&self) -> Vec<f64> {
        let m = self.len();
        let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                out.push(self.values[(i, j)]);
            }
        }
        out
    }
}

/// Euclidean distances between the rows of `m`.
pub fn euclidean_distances(m: &DMatrix<f64>, ids: Vec<String>) -> Result<DistanceMatrix> {
    let n = m.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        (m.row(i) - m.row(j)).norm()
                    }
                })
                .collect()
        })
        .collect();
    let mut values = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    // exact symmetry regardless of floating-point evaluation order
    for i in 0..n {
        for j in 0..i {
            values[(i, j)] = values[(j, i)];
        }
    }
    DistanceMatrix::new(values, ids)
}

/// Weighted Euclidean distances between rows of a logratio matrix.
pub fn lm_distances(lm: &LogratioMatrix) -> Result<DistanceMatrix> {
    euclidean_distances(&lm.metric_values(), lm.row_ids.clone())
}

/// `d(i,i') = sqrt(sum_j c_j (CLR_ij - CLR_i'j)^2)` with the composition's
/// weights.
pub fn logratio_distances(c: &CompositionMatrix) -> Result<DistanceMatrix> {
    lm_distances(&clr(c)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

/// Chi-square distances between row profiles (scaled by column masses) or
/// between column profiles (scaled by row masses). Zeros are allowed except
/// in the margins of the chosen axis and the masses used for scaling.
pub fn chi_square_distances(m: &DMatrix<f64>, axis: Axis, ids: Vec<String>) -> Result<DistanceMatrix> {
    let mt;
    let m = match axis {
        Axis::Rows => m,
        Axis::Columns => {
            mt = m.transpose();
            &mt
        }
    };
    if m.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(invalid("chi-square distances need nonnegative finite entries"));
    }
    let total: f64 = m.iter().sum();
    if total <= 0.0 {
        return Err(invalid("chi-square distances need a positive grand total"));
    }
    let (n, d) = m.shape();
    let label = |axis_rows: bool, idx: usize| -> String {
        if axis_rows {
            ids.get(idx).cloned().unwrap_or_else(|| idx.to_string())
        } else {
            format!("#{}", idx + 1)
        }
    };
    let row_sums: Vec<f64> = m.row_iter().map(|r| r.sum()).collect();
    let col_masses: Vec<f64> = m.column_iter().map(|c| c.sum() / total).collect();
    if let Some(i) = row_sums.iter().position(|&s| s <= 0.0) {
        return Err(CodaError::Degenerate(format!(
            "zero margin for '{}'",
            label(true, i)
        )));
    }
    if let Some(j) = col_masses.iter().position(|&s| s <= 0.0) {
        return Err(CodaError::Degenerate(format!(
            "zero margin for opposite-axis entry {}",
            label(false, j)
        )));
    }
    let scaled = DMatrix::from_fn(n, d, |i, j| m[(i, j)] / row_sums[i] / col_masses[j].sqrt());
    euclidean_distances(&scaled, ids)
}

/// Euclidean distances on square-rooted compositions.
pub fn hellinger_distances(c: &CompositionMatrix) -> Result<DistanceMatrix> {
    euclidean_distances(&c.values().map(f64::sqrt), c.row_ids().to_vec())
}

/// Procrustes correlation between two configurations of the same `M >= 3`
/// points: the trace of the optimal rotation fit of the column-centred
/// configurations, relative to their sizes.
pub fn procrustes_correlation(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != y.nrows() {
        return Err(CodaError::DimensionMismatch {
            what: "Procrustes configurations",
            expected: x.nrows(),
            found: y.nrows(),
        });
    }
    if x.nrows() < 3 {
        return Err(invalid("Procrustes correlation needs at least three points"));
    }
    let xc = center_columns_uniform(x);
    let yc = center_columns_uniform(y);
    let sx = xc.norm_squared();
    let sy = yc.norm_squared();
    if sx <= 0.0 || sy <= 0.0 {
        return Err(CodaError::Degenerate(
            "configuration with all points coincident".into(),
        ));
    }
    let r = nuclear_norm(&(xc.transpose() * yc)) / (sx * sy).sqrt();
    Ok(r.min(1.0))
}

/// Kruskal stress-1 of `d_sub` against `b * d_full`, with `b` fitted by least
/// squares over the distinct pairs.
pub fn stress(d_sub: &DistanceMatrix, d_full: &DistanceMatrix) -> Result<f64> {
    if d_sub.ids != d_full.ids {
        return Err(invalid("stress requires matching identifiers in the same order"));
    }
    let a = d_sub.condensed();
    let b = d_full.condensed();
    let saa: f64 = a.iter().map(|v| v * v).sum();
    if saa <= 0.0 {
        return Err(CodaError::Degenerate("all subcomposition distances are zero".into()));
    }
    let sab: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
    let sbb: f64 = b.iter().map(|v| v * v).sum();
    let scale = if sbb > 0.0 { sab / sbb } else { 0.0 };
    let resid: f64 = a
        .iter()
        .zip(&b)
        .map(|(p, q)| (p - scale * q).powi(2))
        .sum();
    Ok((resid / saa).sqrt())
}

/// Draws `count` distinct index pairs `(i, j)`, `i < j < n`, seeded.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let total = n * n.saturating_sub(1) / 2;
    if count > total {
        return Err(invalid(format!(
            "cannot draw {count} distinct pairs from {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, total, count).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|q| decode_pair(n, q)).collect())
}

/// Inverse of the row-major upper-triangle enumeration.
fn decode_pair(n: usize, mut q: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let len = n - 1 - i;
        if q < len {
            return (i, i + 1 + q);
        }
        q -= len;
        i += 1;
    }
}
