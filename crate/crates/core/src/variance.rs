//! Logratio variances: the variation matrix, the covariance identity for
//! pairwise logratios, total logratio variance and its part contributions.
//!
//! Variances use divisor N, so each row carries mass 1/N.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::compmat::CompositionMatrix;
use crate::error::{invalid, CodaError, Result};
use crate::transforms::clr_from_logs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisor {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

/// Symmetric matrix of pairwise logratio variances.
#[derive(Debug, Clone)]
pub struct VariationMatrix {
    pub tau: DMatrix<f64>,
    pub part_names: Vec<String>,
}

impl VariationMatrix {
    pub fn nparts(&self) -> usize {
        self.tau.nrows()
    }

    /// Position and value of the smallest and largest off-diagonal entries.
    pub fn extremes(&self) -> ((usize, usize, f64), (usize, usize, f64)) {
        let d = self.nparts();
        let mut lo = (0, 1, f64::INFINITY);
        let mut hi = (0, 1, f64::NEG_INFINITY);
        for j in 0..d {
            for k in (j + 1)..d {
                let t = self.tau[(j, k)];
                if t < lo.2 {
                    lo = (j, k, t);
                }
                if t > hi.2 {
                    hi = (j, k, t);
                }
            }
        }
        (lo, hi)
    }
}

fn variance(xs: impl Iterator<Item = f64> + Clone, divisor: Divisor) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    match divisor {
        Divisor::Population => ss / n,
        Divisor::Sample => ss / (n - 1.0),
    }
}

pub fn variation_matrix(c: &CompositionMatrix) -> Result<VariationMatrix> {
    variation_matrix_with(c, Divisor::Population)
}

pub fn variation_matrix_with(c: &CompositionMatrix, divisor: Divisor) -> Result<VariationMatrix> {
    if c.nrows() < 2 {
        return Err(invalid("variation matrix needs at least two rows"));
    }
    let logs = c.log_values("variation_matrix")?;
    let d = c.nparts();
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|j| {
            (0..d)
                .map(|k| {
                    if k <= j {
                        0.0
                    } else {
                        variance(
                            logs.column(j).iter().zip(logs.column(k).iter()).map(|(a, b)| a - b),
                            divisor,
                        )
                    }
                })
                .collect()
        })
        .collect();
    let mut tau = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in (j + 1)..d {
            tau[(j, k)] = rows[j][k];
            tau[(k, j)] = rows[j][k];
        }
    }
    Ok(VariationMatrix {
        tau,
        part_names: c.part_names().to_vec(),
    })
}

/// Covariance of `log(x_j/x_k)` and `log(x_u/x_v)` from the variation matrix.
pub fn lr_covariance(t: &VariationMatrix, j: usize, k: usize, u: usize, v: usize) -> Result<f64> {
    let d = t.nparts();
    if let Some(&bad) = [j, k, u, v].iter().find(|&&i| i >= d) {
        return Err(CodaError::IndexOutOfRange {
            what: "logratio covariance part",
            index: bad,
            len: d,
        });
    }
    let tau = &t.tau;
    Ok(0.5 * (tau[(j, v)] + tau[(k, u)] - tau[(j, u)] - tau[(k, v)]))
}

/// Population variances of the weighted CLR columns.
pub fn clr_variances(c: &CompositionMatrix) -> Result<Vec<f64>> {
    let logs = c.log_values("clr_variances")?;
    let y = clr_from_logs(&logs, c.weights());
    Ok(y
        .column_iter()
        .map(|col| variance(col.iter().cloned(), Divisor::Population))
        .collect())
}

/// `sum_j c_j Var(CLR_j)` with the composition's part weights.
pub fn total_variance(c: &CompositionMatrix) -> Result<f64> {
    let v = clr_variances(c)?;
    Ok(v.iter().zip(c.weights()).map(|(v, w)| v * w).sum())
}

/// The same total from pairwise variances: `sum_{j<k} c_j c_k tau_jk`.
pub fn total_variance_from_tau(t: &VariationMatrix, weights: &[f64]) -> f64 {
    let d = t.nparts();
    let mut s = 0.0;
    for j in 0..d {
        for k in (j + 1)..d {
            s += weights[j] * weights[k] * t.tau[(j, k)];
        }
    }
    s
}

/// Share of total variance contributed by each part, `c_j Var(CLR_j) / TotVar`.
pub fn clr_variance_contributions(c: &CompositionMatrix) -> Result<Vec<f64>> {
    let v = clr_variances(c)?;
    let parts: Vec<f64> = v.iter().zip(c.weights()).map(|(v, w)| v * w).collect();
    let total: f64 = parts.iter().sum();
    if total <= 0.0 {
        return Err(CodaError::Degenerate("total logratio variance is zero".into()));
    }
    Ok(parts.into_iter().map(|p| p / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportionality {
    /// Variance of `log(x_j/x_k)`; `None` when either part has zeros.
    pub lr_variance: Option<f64>,
    /// `sum x_j x_k / sqrt(sum x_j^2 sum x_k^2)` on the closed values.
    pub uncentered_correlation: f64,
}

pub fn proportionality(c: &CompositionMatrix, j: usize, k: usize) -> Result<Proportionality> {
    let d = c.nparts();
    if let Some(&bad) = [j, k].iter().find(|&&i| i >= d) {
        return Err(CodaError::IndexOutOfRange {
            what: "proportionality part",
            index: bad,
            len: d,
        });
    }
    let x = c.values();
    let a = x.column(j);
    let b = x.column(k);
    let positive = a.iter().chain(b.iter()).all(|&v| v > 0.0);
    let lr_variance = positive.then(|| {
        variance(
            a.iter().zip(b.iter()).map(|(p, q)| (p / q).ln()),
            Divisor::Population,
        )
    });
    let denom = (a.dot(&a) * b.dot(&b)).sqrt();
    let uncentered_correlation = if denom > 0.0 { a.dot(&b) / denom } else { 0.0 };
    Ok(Proportionality {
        lr_variance,
        uncentered_correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn comp(m: DMatrix<f64>) -> CompositionMatrix {
        CompositionMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn proportional_columns_have_zero_tau() {
        let c = comp(dmatrix![1.0, 2.4, 3.0; 2.0, 4.8, 1.0; 0.5, 1.2, 7.0]);
        let t = variation_matrix(&c).unwrap();
        assert!(t.tau[(0, 1)].abs() < 1e-15);
        assert!(t.tau[(0, 2)] > 0.0);
        let p = proportionality(&c, 0, 1).unwrap();
        assert!(p.lr_variance.unwrap().abs() < 1e-15);
        assert!((p.uncentered_correlation - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tau_is_population_variance() {
        let c = comp(dmatrix![1.0, 1.0; 1.0, std::f64::consts::E * std::f64::consts::E]);
        // logratios 0 and -2: mean -1, population variance 1
        let t = variation_matrix(&c).unwrap();
        assert!((t.tau[(0, 1)] - 1.0).abs() < 1e-14);
        let s = variation_matrix_with(&c, Divisor::Sample).unwrap();
        assert!((s.tau[(0, 1)] - 2.0).abs() < 1e-14);
        assert!(variation_matrix(&comp(dmatrix![1.0, 2.0])).is_err());
    }

    #[test]
    fn covariance_collapses() {
        let c = comp(dmatrix![1.0, 2.0, 3.0; 2.0, 1.0, 5.0; 3.0, 3.0, 1.0; 1.0, 4.0, 2.0]);
        let t = variation_matrix(&c).unwrap();
        assert!((lr_covariance(&t, 0, 1, 0, 1).unwrap() - t.tau[(0, 1)]).abs() < 1e-14);
        assert!((lr_covariance(&t, 0, 1, 1, 0).unwrap() + t.tau[(0, 1)]).abs() < 1e-14);
        assert!(lr_covariance(&t, 0, 1, 2, 3).is_err());
    }

    #[test]
    fn identical_rows_have_zero_total() {
        let c = comp(dmatrix![0.2, 0.3, 0.5; 0.2, 0.3, 0.5]);
        assert!(total_variance(&c).unwrap().abs() < 1e-30);
        assert!(clr_variance_contributions(&c).is_err());
    }

    #[test]
    fn uniform_total_matches_pairwise_form() {
        let c = comp(dmatrix![1.0, 2.0, 3.0; 2.0, 1.0, 5.0; 3.0, 3.0, 1.0]);
        let t = variation_matrix(&c).unwrap();
        let d = 3.0;
        let mut s = 0.0;
        for j in 0..3 {
            for k in (j + 1)..3 {
                s += t.tau[(j, k)];
            }
        }
        assert!((total_variance(&c).unwrap() - s / (d * d)).abs() < 1e-14);
        let shares = clr_variance_contributions(&c).unwrap();
        assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zeros_leave_lr_variance_undefined() {
        let c = comp(dmatrix![0.0, 0.5, 0.5; 0.3, 0.3, 0.4]);
        let p = proportionality(&c, 0, 1).unwrap();
        assert!(p.lr_variance.is_none());
        assert!(p.uncentered_correlation > 0.0);
    }
}
