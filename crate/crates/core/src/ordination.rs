//! Weighted SVD ordinations: logratio analysis (LRA), PCA of a logratio
//! matrix, and correspondence analysis (CA) with an optional power
//! transformation, plus supplementary points, contribution coordinates and
//! bootstrap confidence ellipses for group means.
//!
//! All three methods decompose `S = D_r^{1/2} Z D_c^{1/2}` for a centred
//! matrix `Z`, row masses `r` and column masses `c`. Standard coordinates are
//! the singular vectors divided by the square roots of the masses; principal
//! coordinates are standard coordinates times the singular values.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compmat::{encode_labels, CompositionMatrix};
use crate::error::{invalid, CodaError, Result};
use crate::linalg::{center_columns, svd};
use crate::transforms::{box_cox_matrix, clr, clr_from_logs, LogratioMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lra,
    Pca,
    Ca,
}

#[derive(Debug, Clone)]
pub struct Ordination {
    pub row_principal: DMatrix<f64>,
    pub row_standard: DMatrix<f64>,
    pub col_principal: DMatrix<f64>,
    pub col_standard: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub explained_shares: Vec<f64>,
    pub total_inertia: f64,
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
    pub method: Method,
    pub alpha: Option<f64>,
    pub row_ids: Vec<String>,
    pub col_labels: Vec<String>,
    /// Column means subtracted before the decomposition (LRA and PCA).
    col_offsets: Vec<f64>,
}

impl Ordination {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Right singular vectors: column standard coordinates times the square
    /// roots of the column masses.
    pub fn contribution_coordinates(&self) -> DMatrix<f64> {
        let mut v = self.col_standard.clone();
        for (j, m) in self.col_masses.iter().enumerate() {
            let s = m.sqrt();
            v.row_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        v
    }
}

/// Shared decomposition step: `z` is already centred, `scale` multiplies all
/// singular values (1/alpha for powered CA).
fn decompose(
    z: &DMatrix<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
    scale: f64,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, Vec<f64>, Vec<f64>, f64) {
    let (n, d) = z.shape();
    let sr: Vec<f64> = row_masses.iter().map(|m| m.sqrt()).collect();
    let sc: Vec<f64> = col_masses.iter().map(|m| m.sqrt()).collect();
    let s = DMatrix::from_fn(n, d, |i, j| sr[i] * z[(i, j)] * sc[j]);
    let dec = svd(&s);
    let k = dec.s.len();
    let sv: Vec<f64> = dec.s.iter().map(|x| x * scale).collect();
    let row_standard = DMatrix::from_fn(n, k, |i, a| dec.u[(i, a)] / sr[i]);
    let col_standard = DMatrix::from_fn(d, k, |j, a| dec.v[(j, a)] / sc[j]);
    let row_principal = DMatrix::from_fn(n, k, |i, a| row_standard[(i, a)] * sv[a]);
    let col_principal = DMatrix::from_fn(d, k, |j, a| col_standard[(j, a)] * sv[a]);
    let total = s.norm_squared() * scale * scale;
    let shares = sv
        .iter()
        .map(|x| if total > 0.0 { x * x / total } else { 0.0 })
        .collect();
    (row_principal, row_standard, col_principal, col_standard, sv, shares, total)
}

/// Logratio analysis: PCA of the weighted CLR, column-centred with row
/// masses 1/N and column masses equal to the part weights.
pub fn lra(c: &CompositionMatrix) -> Result<Ordination> {
    let y = clr(c)?;
    let n = c.nrows();
    let masses = vec![1.0 / n as f64; n];
    let (z, means) = center_columns(&y.values, &masses);
    let (rp, rs, cp, cs, sv, shares, total) = decompose(&z, masses.clone(), c.weights().to_vec(), 1.0);
    Ok(Ordination {
        row_principal: rp,
        row_standard: rs,
        col_principal: cp,
        col_standard: cs,
        singular_values: sv,
        explained_shares: shares,
        total_inertia: total,
        row_masses: masses,
        col_masses: c.weights().to_vec(),
        method: Method::Lra,
        alpha: None,
        row_ids: c.row_ids().to_vec(),
        col_labels: c.part_names().to_vec(),
        col_offsets: means,
    })
}

/// PCA of a logratio matrix, column-centred but not standardized; columns
/// carry the matrix's metric weights.
pub fn pca(lm: &LogratioMatrix) -> Result<Ordination> {
    let n = lm.nrows();
    if n < 2 {
        return Err(invalid("PCA needs at least two rows"));
    }
    let masses = vec![1.0 / n as f64; n];
    let (z, means) = center_columns(&lm.values, &masses);
    let (rp, rs, cp, cs, sv, shares, total) = decompose(&z, masses.clone(), lm.weights.clone(), 1.0);
    Ok(Ordination {
        row_principal: rp,
        row_standard: rs,
        col_principal: cp,
        col_standard: cs,
        singular_values: sv,
        explained_shares: shares,
        total_inertia: total,
        row_masses: masses,
        col_masses: lm.weights.clone(),
        method: Method::Pca,
        alpha: None,
        row_ids: lm.row_ids.clone(),
        col_labels: lm.column_labels.clone(),
        col_offsets: means,
    })
}

/// Correspondence analysis of a nonnegative matrix, optionally after the
/// power transform `x^alpha / alpha`. With a power, singular values and
/// coordinates are divided by alpha (inertia by alpha squared), so the
/// solution tends to the LRA with uniform part weights as alpha tends to 0.
pub fn ca(
    m: &DMatrix<f64>,
    alpha: Option<f64>,
    row_ids: Vec<String>,
    col_labels: Vec<String>,
) -> Result<Ordination> {
    let (n, d) = m.shape();
    if row_ids.len() != n || col_labels.len() != d {
        return Err(CodaError::DimensionMismatch {
            what: "CA labels",
            expected: n,
            found: row_ids.len(),
        });
    }
    let x = match alpha {
        Some(a) => box_cox_matrix(m, a)?,
        None => {
            if m.iter().any(|&v| v < 0.0) {
                return Err(invalid("CA needs nonnegative entries"));
            }
            m.clone()
        }
    };
    let total: f64 = x.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("CA needs a positive grand total"));
    }
    let p = x / total;
    let r: Vec<f64> = p.row_iter().map(|row| row.sum()).collect();
    let c: Vec<f64> = p.column_iter().map(|col| col.sum()).collect();
    if let Some(i) = r.iter().position(|&v| v <= 0.0) {
        return Err(CodaError::ZeroRowTotal {
            row: row_ids[i].clone(),
        });
    }
    if let Some(j) = c.iter().position(|&v| v <= 0.0) {
        return Err(CodaError::ZeroColumn {
            part: col_labels[j].clone(),
        });
    }
    // Z = D_r^{-1} (P - r c^T) D_c^{-1}, so that S = D_r^{1/2} Z D_c^{1/2}
    let z = DMatrix::from_fn(n, d, |i, j| (p[(i, j)] - r[i] * c[j]) / (r[i] * c[j]));
    let scale = 1.0 / alpha.unwrap_or(1.0);
    let (rp, rs, cp, cs, sv, shares, tot) = decompose(&z, r.clone(), c.clone(), scale);
    Ok(Ordination {
        row_principal: rp,
        row_standard: rs,
        col_principal: cp,
        col_standard: cs,
        singular_values: sv,
        explained_shares: shares,
        total_inertia: tot,
        row_masses: r,
        col_masses: c,
        method: Method::Ca,
        alpha,
        row_ids,
        col_labels,
        col_offsets: Vec::new(),
    })
}

/// Projects extra rows onto the solution by the transition formula, leaving
/// the active solution unchanged. For CA the rows are raw nonnegative values;
/// for LRA, positive (unclosed) compositions in the active part order; for
/// PCA, rows of the same logratio columns.
pub fn supplementary_rows(o: &Ordination, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = o.col_standard.nrows();
    if rows.ncols() != d {
        return Err(CodaError::DimensionMismatch {
            what: "supplementary columns",
            expected: d,
            found: rows.ncols(),
        });
    }
    let k = o.rank();
    let n = rows.nrows();
    let g = &o.col_standard;
    let mut out = DMatrix::zeros(n, k);
    match o.method {
        Method::Ca => {
            let scale = 1.0 / o.alpha.unwrap_or(1.0);
            for i in 0..n {
                let row: Vec<f64> = match o.alpha {
                    Some(a) => rows.row(i).iter().map(|x| x.powf(a)).collect(),
                    None => rows.row(i).iter().cloned().collect(),
                };
                if row.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                    return Err(invalid("supplementary CA rows must be nonnegative"));
                }
                let t: f64 = row.iter().sum();
                if t <= 0.0 {
                    return Err(CodaError::ZeroRowTotal {
                        row: format!("supplementary {}", i + 1),
                    });
                }
                for a in 0..k {
                    let f: f64 = (0..d).map(|j| row[j] / t * g[(j, a)]).sum();
                    out[(i, a)] = f * scale;
                }
            }
        }
        Method::Lra | Method::Pca => {
            let y = if o.method == Method::Lra {
                if rows.iter().any(|&x| !(x > 0.0)) {
                    return Err(invalid("supplementary LRA rows must be strictly positive"));
                }
                clr_from_logs(&rows.map(f64::ln), &o.col_masses)
            } else {
                rows.clone()
            };
            for i in 0..n {
                for a in 0..k {
                    out[(i, a)] = (0..d)
                        .map(|j| o.col_masses[j] * (y[(i, j)] - o.col_offsets[j]) * g[(j, a)])
                        .sum();
                }
            }
        }
    }
    Ok(out)
}

/// Column contributions to the first two dimensions.
#[derive(Debug, Clone)]
pub struct Contributions {
    /// Contribution coordinates, D×K.
    pub coordinates: DMatrix<f64>,
    /// Squared contribution coordinates; each column sums to 1.
    pub per_dimension: DMatrix<f64>,
    /// Contribution to the plane of dimensions 1 and 2.
    pub plane: Vec<f64>,
    /// Plane contribution strictly above the average `1/D`.
    pub flagged: Vec<bool>,
}

pub fn contribution_coordinates(o: &Ordination) -> Contributions {
    let v = o.contribution_coordinates();
    let per_dimension = v.map(|x| x * x);
    let d = v.nrows();
    let dims = o.rank().min(2);
    let eig: Vec<f64> = o.singular_values.iter().take(dims).map(|s| s * s).collect();
    let esum: f64 = eig.iter().sum();
    let plane: Vec<f64> = (0..d)
        .map(|j| {
            if esum > 0.0 {
                (0..dims).map(|a| eig[a] * per_dimension[(j, a)]).sum::<f64>() / esum
            } else {
                0.0
            }
        })
        .collect();
    // strictly above average, ignoring rounding at the boundary
    let avg = 1.0 / d as f64;
    let flagged = plane.iter().map(|&p| p > avg + 1e-12).collect();
    Contributions {
        coordinates: v,
        per_dimension,
        plane,
        flagged,
    }
}

#[derive(Debug, Clone)]
pub struct Ellipse {
    pub group: String,
    pub size: usize,
    pub center: [f64; 2],
    /// Major then minor semi-axis.
    pub semi_axes: [f64; 2],
    /// Angle of the major axis from the first dimension, radians.
    pub angle: f64,
}

#[derive(Debug, Clone)]
pub struct EllipseSet {
    pub ellipses: Vec<Ellipse>,
    pub level: f64,
    pub replicates: usize,
    pub dims: (usize, usize),
}

/// Confidence ellipses for group means of the row principal coordinates on
/// dimensions `dims`, from a bivariate normal fit to bootstrap replicate
/// means. Replicate `b` of group `g` draws from its own seeded stream.
pub fn bootstrap_ellipses(
    o: &Ordination,
    groups: &[String],
    replicates: usize,
    level: f64,
    seed: u64,
    dims: (usize, usize),
) -> Result<EllipseSet> {
    if groups.len() != o.row_principal.nrows() {
        return Err(CodaError::DimensionMismatch {
            what: "group labels",
            expected: o.row_principal.nrows(),
            found: groups.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level {level} not in (0, 1)")));
    }
    if replicates < 2 {
        return Err(invalid("at least two bootstrap replicates are needed"));
    }
    let k = o.rank();
    if dims.0 >= k || dims.1 >= k || dims.0 == dims.1 {
        return Err(CodaError::IndexOutOfRange {
            what: "ellipse dimension",
            index: dims.0.max(dims.1),
            len: k,
        });
    }
    let (levels, codes) = encode_labels(groups);
    if levels.len() < 2 {
        return Err(invalid("bootstrap ellipses need at least two groups"));
    }
    let members: Vec<Vec<usize>> = (0..levels.len())
        .map(|g| (0..codes.len()).filter(|&i| codes[i] == g).collect())
        .collect();
    for (g, m) in members.iter().enumerate() {
        if m.len() < 3 {
            return Err(CodaError::UndersizedGroup {
                group: levels[g].clone(),
                size: m.len(),
                min: 3,
            });
        }
    }
    let f = &o.row_principal;
    let chi2 = -2.0 * (1.0 - level).ln();
    let ellipses = members
        .iter()
        .enumerate()
        .map(|(g, idx)| {
            let pts: Vec<[f64; 2]> = idx.iter().map(|&i| [f[(i, dims.0)], f[(i, dims.1)]]).collect();
            let means: Vec<[f64; 2]> = (0..replicates)
                .into_par_iter()
                .map(|b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((g as u64) << 32) | b as u64);
                    let mut s = [0.0, 0.0];
                    for _ in 0..pts.len() {
                        let p = pts[rng.random_range(0..pts.len())];
                        s[0] += p[0];
                        s[1] += p[1];
                    }
                    [s[0] / pts.len() as f64, s[1] / pts.len() as f64]
                })
                .collect();
            let nm = pts.len() as f64;
            let center = [
                pts.iter().map(|p| p[0]).sum::<f64>() / nm,
                pts.iter().map(|p| p[1]).sum::<f64>() / nm,
            ];
            let (semi_axes, angle) = fit_ellipse(&means, chi2);
            Ellipse {
                group: levels[g].clone(),
                size: idx.len(),
                center,
                semi_axes,
                angle,
            }
        })
        .collect();
    Ok(EllipseSet {
        ellipses,
        level,
        replicates,
        dims,
    })
}

fn fit_ellipse(points: &[[f64; 2]], chi2: f64) -> ([f64; 2], f64) {
    let b = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / b;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / b;
    let mut cov = DMatrix::zeros(2, 2);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        cov[(0, 0)] += dx * dx;
        cov[(0, 1)] += dx * dy;
        cov[(1, 1)] += dy * dy;
    }
    cov[(1, 0)] = cov[(0, 1)];
    cov /= b - 1.0;
    let eig = SymmetricEigen::new(cov);
    let (major, minor) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let axis = |i: usize| (chi2 * eig.eigenvalues[i].max(0.0)).sqrt();
    let v = eig.eigenvectors.column(major);
    let mut angle = v[1].atan2(v[0]);
    // orientation is defined modulo pi
    if angle < -std::f64::consts::FRAC_PI_2 {
        angle += std::f64::consts::PI;
    } else if angle > std::f64::consts::FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }
    ([axis(major), axis(minor)], angle)
}
