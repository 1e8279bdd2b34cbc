//! Logratio transformations.
//!
//! Every transform returns a [`LogratioMatrix`] that records, next to the
//! transformed values, the log-contrast each column represents and the metric
//! weight that column carries in logratio distances and variances. With part
//! weights `c`, pairwise logratios carry `c_j c_k`, ALRs `c_j c_ref`, CLRs
//! `c_j`, and the orthonormal families weight 1. Under these weights the
//! squared distance between two rows is the same for all-pairs LRs and CLRs.
//!
//! The CLR is taken with respect to the weighted geometric mean
//! `prod x_j^{c_j}`, which reduces to the ordinary geometric mean for uniform
//! weights. Logs are natural.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::compmat::CompositionMatrix;
use crate::error::{invalid, CodaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogratioKind {
    LrAll,
    Alr,
    Clr,
    Ilr,
    Plr,
    SlrSet,
    Custom,
}

/// Transformed values together with their log-contrast representation.
#[derive(Debug, Clone)]
pub struct LogratioMatrix {
    pub values: DMatrix<f64>,
    pub column_labels: Vec<String>,
    /// K×D; row `k` holds the coefficients of column `k` on the log parts.
    /// For [`LogratioKind::SlrSet`] the rows are descriptive only.
    pub contrast: DMatrix<f64>,
    pub kind: LogratioKind,
    /// Metric weight of each column.
    pub weights: Vec<f64>,
    pub row_ids: Vec<String>,
    /// Part index pairs for pairwise columns (LR and ALR), numerator first.
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl LogratioMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }
    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let k = self.ncols();
        if let Some(&bad) = cols.iter().find(|&&j| j >= k) {
            return Err(CodaError::IndexOutOfRange {
                what: "logratio column",
                index: bad,
                len: k,
            });
        }
        let n = self.nrows();
        let d = self.contrast.ncols();
        Ok(Self {
            values: DMatrix::from_fn(n, cols.len(), |i, j| self.values[(i, cols[j])]),
            column_labels: cols.iter().map(|&j| self.column_labels[j].clone()).collect(),
            contrast: DMatrix::from_fn(cols.len(), d, |r, p| self.contrast[(cols[r], p)]),
            kind: LogratioKind::Custom,
            weights: cols.iter().map(|&j| self.weights[j]).collect(),
            row_ids: self.row_ids.clone(),
            pairs: self
                .pairs
                .as_ref()
                .map(|p| cols.iter().map(|&j| p[j]).collect()),
        })
    }

    /// Values with each column multiplied by the square root of its weight.
    pub fn metric_values(&self) -> DMatrix<f64> {
        let mut m = self.values.clone();
        for (j, w) in self.weights.iter().enumerate() {
            let s = w.sqrt();
            m.column_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        m
    }
}

/// All pairwise logratios `log(x_j / x_k)` for `j < k`, in lexicographic order.
pub fn lr_all(c: &CompositionMatrix) -> Result<LogratioMatrix> {
    let logs = c.log_values("lr_all")?;
    let d = c.nparts();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    Ok(pairwise(c, &logs, pairs, LogratioKind::LrAll))
}

/// Additive logratios `log(x_j / x_ref)` for every `j != reference`.
pub fn alr(c: &CompositionMatrix, reference: usize) -> Result<LogratioMatrix> {
    let d = c.nparts();
    if reference >= d {
        return Err(CodaError::IndexOutOfRange {
            what: "ALR reference",
            index: reference,
            len: d,
        });
    }
    let logs = c.log_values("alr")?;
    let pairs: Vec<(usize, usize)> = (0..d)
        .filter(|&j| j != reference)
        .map(|j| (j, reference))
        .collect();
    Ok(pairwise(c, &logs, pairs, LogratioKind::Alr))
}

fn pairwise(
    c: &CompositionMatrix,
    logs: &DMatrix<f64>,
    pairs: Vec<(usize, usize)>,
    kind: LogratioKind,
) -> LogratioMatrix {
    let n = c.nrows();
    let d = c.nparts();
    let w = c.weights();
    let names = c.part_names();
    let values = DMatrix::from_fn(n, pairs.len(), |i, q| {
        let (j, k) = pairs[q];
        logs[(i, j)] - logs[(i, k)]
    });
    let mut contrast = DMatrix::zeros(pairs.len(), d);
    for (q, &(j, k)) in pairs.iter().enumerate() {
        contrast[(q, j)] = 1.0;
        contrast[(q, k)] = -1.0;
    }
    LogratioMatrix {
        values,
        column_labels: pairs
            .iter()
            .map(|&(j, k)| format!("{}/{}", names[j], names[k]))
            .collect(),
        contrast,
        kind,
        weights: pairs.iter().map(|&(j, k)| w[j] * w[k]).collect(),
        row_ids: c.row_ids().to_vec(),
        pairs: Some(pairs),
    }
}

/// Centred logratios with respect to the weighted geometric mean.
pub fn clr(c: &CompositionMatrix) -> Result<LogratioMatrix> {
    let logs = c.log_values("clr")?;
    let d = c.nparts();
    let w = c.weights();
    let values = clr_from_logs(&logs, w);
    let contrast = DMatrix::from_fn(d, d, |r, p| if r == p { 1.0 } else { 0.0 } - w[p]);
    Ok(LogratioMatrix {
        values,
        column_labels: c.part_names().to_vec(),
        contrast,
        kind: LogratioKind::Clr,
        weights: w.to_vec(),
        row_ids: c.row_ids().to_vec(),
        pairs: None,
    })
}

/// Row-centres a log matrix by the weighted mean of each row.
pub(crate) fn clr_from_logs(logs: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let (n, d) = logs.shape();
    let mut out = logs.clone();
    for i in 0..n {
        let m: f64 = (0..d).map(|j| w[j] * logs[(i, j)]).sum();
        for j in 0..d {
            out[(i, j)] -= m;
        }
    }
    out
}

/// A sequential binary partition of parts, one (numerator, denominator) pair
/// per split. The first split divides all parts; every later split divides a
/// block produced by an earlier split that has not yet been divided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastTree {
    nparts: usize,
    splits: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Serializable form of one split, using part names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSplit {
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
}

impl ContrastTree {
    /// Validates a complete tree over `nparts` parts (exactly `nparts - 1`
    /// splits).
    pub fn new(nparts: usize, splits: Vec<(Vec<usize>, Vec<usize>)>) -> Result<Self> {
        let bad = |m: String| CodaError::InvalidTree(m);
        if nparts < 2 {
            return Err(bad("a tree needs at least two parts".into()));
        }
        let mut open: Vec<BTreeSet<usize>> = vec![(0..nparts).collect()];
        for (s, (num, den)) in splits.iter().enumerate() {
            if num.is_empty() || den.is_empty() {
                return Err(bad(format!("split {s} has an empty side")));
            }
            let ns: BTreeSet<usize> = num.iter().cloned().collect();
            let ds: BTreeSet<usize> = den.iter().cloned().collect();
            if ns.len() != num.len() || ds.len() != den.len() {
                return Err(bad(format!("split {s} repeats a part")));
            }
            if !ns.is_disjoint(&ds) {
                return Err(bad(format!("split {s} has overlapping sides")));
            }
            let union: BTreeSet<usize> = ns.union(&ds).cloned().collect();
            let Some(pos) = open.iter().position(|b| *b == union) else {
                return Err(bad(format!(
                    "split {s} does not divide an undivided block of an earlier split"
                )));
            };
            open.swap_remove(pos);
            for side in [ns, ds] {
                if side.len() > 1 {
                    open.push(side);
                }
            }
        }
        if !open.is_empty() || splits.len() != nparts - 1 {
            return Err(bad(format!(
                "{} splits given, a complete tree over {nparts} parts needs {}",
                splits.len(),
                nparts - 1
            )));
        }
        Ok(Self { nparts, splits })
    }

    /// Pivot tree: part `order[i]` against all parts after it.
    pub fn pivot(order: &[usize]) -> Result<Self> {
        let d = order.len();
        let set: BTreeSet<usize> = order.iter().cloned().collect();
        if set.len() != d || order.iter().any(|&p| p >= d) {
            return Err(CodaError::InvalidTree(
                "pivot order must be a permutation of the parts".into(),
            ));
        }
        let splits = (0..d.saturating_sub(1))
            .map(|i| (vec![order[i]], order[i + 1..].to_vec()))
            .collect();
        Self::new(d, splits)
    }

    pub fn nparts(&self) -> usize {
        self.nparts
    }
    pub fn splits(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.splits
    }

    /// Orthonormal contrast matrix, one row per split.
    pub fn contrast(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.splits.len(), self.nparts);
        for (s, (num, den)) in self.splits.iter().enumerate() {
            let r = num.len() as f64;
            let q = den.len() as f64;
            let scale = (r * q / (r + q)).sqrt();
            for &p in num {
                m[(s, p)] = scale / r;
            }
            for &p in den {
                m[(s, p)] = -scale / q;
            }
        }
        m
    }

    pub fn to_named(&self, names: &[String]) -> Vec<NamedSplit> {
        let n = |v: &[usize]| v.iter().map(|&p| names[p].clone()).collect();
        self.splits
            .iter()
            .map(|(a, b)| NamedSplit {
                numerator: n(a),
                denominator: n(b),
            })
            .collect()
    }

    pub fn from_named(names: &[String], splits: &[NamedSplit]) -> Result<Self> {
        let idx = |s: &String| {
            names
                .iter()
                .position(|p| p == s)
                .ok_or_else(|| CodaError::InvalidTree(format!("unknown part '{s}'")))
        };
        let mut out = Vec::with_capacity(splits.len());
        for sp in splits {
            let a = sp.numerator.iter().map(idx).collect::<Result<Vec<_>>>()?;
            let b = sp.denominator.iter().map(idx).collect::<Result<Vec<_>>>()?;
            out.push((a, b));
        }
        Self::new(names.len(), out)
    }

    fn label(&self, s: usize, names: &[String]) -> String {
        let (a, b) = &self.splits[s];
        let j = |v: &[usize]| {
            v.iter()
                .map(|&p| names[p].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{{{}}}/{{{}}}", j(a), j(b))
    }
}

/// Isometric logratios for a complete sequential binary partition.
pub fn ilr(c: &CompositionMatrix, tree: &ContrastTree) -> Result<LogratioMatrix> {
    orthonormal(c, tree, LogratioKind::Ilr, "ilr")
}

/// Pivot logratios: the ILR of the pivot tree for `order`.
pub fn plr(c: &CompositionMatrix, order: &[usize]) -> Result<LogratioMatrix> {
    if order.len() != c.nparts() {
        return Err(CodaError::InvalidTree(format!(
            "pivot order has {} entries for {} parts",
            order.len(),
            c.nparts()
        )));
    }
    let tree = ContrastTree::pivot(order)?;
    let mut lm = orthonormal(c, &tree, LogratioKind::Plr, "plr")?;
    let names = c.part_names();
    lm.column_labels = (0..tree.splits.len())
        .map(|i| format!("{}/rest", names[order[i]]))
        .collect();
    Ok(lm)
}

fn orthonormal(
    c: &CompositionMatrix,
    tree: &ContrastTree,
    kind: LogratioKind,
    op: &'static str,
) -> Result<LogratioMatrix> {
    if tree.nparts != c.nparts() {
        return Err(CodaError::DimensionMismatch {
            what: "tree parts",
            expected: c.nparts(),
            found: tree.nparts,
        });
    }
    let logs = c.log_values(op)?;
    let contrast = tree.contrast();
    let values = &logs * contrast.transpose();
    let names = c.part_names();
    Ok(LogratioMatrix {
        values,
        column_labels: (0..tree.splits.len()).map(|s| tree.label(s, names)).collect(),
        contrast,
        kind,
        weights: vec![1.0; tree.splits.len()],
        row_ids: c.row_ids().to_vec(),
        pairs: None,
    })
}

/// Summed logratio `log(sum_num x / sum_den x)` per row.
pub fn slr(c: &CompositionMatrix, num: &[usize], den: &[usize]) -> Result<Vec<f64>> {
    check_blocks(c.nparts(), num, den)?;
    let x = c.values();
    (0..c.nrows())
        .map(|i| {
            let a: f64 = num.iter().map(|&p| x[(i, p)]).sum();
            let b: f64 = den.iter().map(|&p| x[(i, p)]).sum();
            if a <= 0.0 || b <= 0.0 {
                Err(CodaError::ZeroSubtotal {
                    row: c.row_ids()[i].clone(),
                })
            } else {
                Ok((a / b).ln())
            }
        })
        .collect()
}

/// One summed logratio per split of `tree`. Columns carry unit weight; the
/// contrast rows record the balance pattern of each split for reference.
pub fn slr_tree(c: &CompositionMatrix, tree: &ContrastTree) -> Result<LogratioMatrix> {
    if tree.nparts != c.nparts() {
        return Err(CodaError::DimensionMismatch {
            what: "tree parts",
            expected: c.nparts(),
            found: tree.nparts,
        });
    }
    let k = tree.splits.len();
    let mut values = DMatrix::zeros(c.nrows(), k);
    for (s, (num, den)) in tree.splits.iter().enumerate() {
        for (i, v) in slr(c, num, den)?.into_iter().enumerate() {
            values[(i, s)] = v;
        }
    }
    let names = c.part_names();
    Ok(LogratioMatrix {
        values,
        column_labels: (0..k).map(|s| tree.label(s, names)).collect(),
        contrast: tree.contrast(),
        kind: LogratioKind::SlrSet,
        weights: vec![1.0; k],
        row_ids: c.row_ids().to_vec(),
        pairs: None,
    })
}

fn check_blocks(d: usize, num: &[usize], den: &[usize]) -> Result<()> {
    if num.is_empty() || den.is_empty() {
        return Err(invalid("summed logratio blocks must be nonempty"));
    }
    for &p in num.iter().chain(den) {
        if p >= d {
            return Err(CodaError::IndexOutOfRange {
                what: "summed logratio part",
                index: p,
                len: d,
            });
        }
    }
    if num.iter().any(|p| den.contains(p)) {
        return Err(invalid("summed logratio blocks overlap"));
    }
    Ok(())
}

/// Entrywise `x^alpha / alpha` on a nonnegative matrix.
pub fn box_cox_matrix(m: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("power {alpha} must be positive")));
    }
    if m.iter().any(|&x| x < 0.0) {
        return Err(invalid("power transform needs nonnegative entries"));
    }
    Ok(m.map(|x| x.powf(alpha) / alpha))
}

/// [`box_cox_matrix`] applied to a composition's values (left unclosed).
pub fn box_cox(c: &CompositionMatrix, alpha: f64) -> Result<DMatrix<f64>> {
    box_cox_matrix(c.values(), alpha)
}

/// `sum_j a_j log x_j` per row, for coefficients summing to zero.
pub fn log_contrast(c: &CompositionMatrix, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != c.nparts() {
        return Err(CodaError::DimensionMismatch {
            what: "log-contrast coefficients",
            expected: c.nparts(),
            found: coeffs.len(),
        });
    }
    let s: f64 = coeffs.iter().sum();
    if s.abs() > 1e-10 {
        return Err(invalid(format!(
            "log-contrast coefficients sum to {s}, not 0"
        )));
    }
    let logs = c.log_values("log_contrast")?;
    Ok(logs
        .row_iter()
        .map(|r| r.iter().zip(coeffs).map(|(l, a)| l * a).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn comp(m: DMatrix<f64>) -> CompositionMatrix {
        CompositionMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn lr_all_counts_and_values() {
        let c = comp(dmatrix![0.6, 0.3, 0.1]);
        let lr = lr_all(&c).unwrap();
        assert_eq!(lr.ncols(), 3);
        assert_eq!(lr.column_labels, vec!["P1/P2", "P1/P3", "P2/P3"]);
        assert!((lr.values[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        let wide = CompositionMatrix::from_matrix(DMatrix::from_element(1, 52, 1.0)).unwrap();
        assert_eq!(lr_all(&wide).unwrap().ncols(), 1326);
        let half = comp(dmatrix![0.5, 0.5]);
        assert_eq!(lr_all(&half).unwrap().values[(0, 0)], 0.0);
    }

    #[test]
    fn zeros_rejected() {
        let c = comp(dmatrix![0.5, 0.5, 0.0]);
        assert!(matches!(lr_all(&c), Err(CodaError::ZeroEntries { .. })));
        assert!(clr(&c).is_err());
    }

    #[test]
    fn alr_reference_last() {
        let c = comp(dmatrix![0.25, 0.25, 0.5]);
        let a = alr(&c, 2).unwrap();
        assert!((a.values[(0, 0)] - 0.5f64.ln()).abs() < 1e-15);
        assert!((a.values[(0, 1)] - 0.5f64.ln()).abs() < 1e-15);
        assert!(alr(&c, 3).is_err());
    }

    #[test]
    fn clr_examples() {
        let c = comp(dmatrix![0.1, 0.1, 0.8; 0.25, 0.25, 0.5]);
        let y = clr(&c).unwrap();
        let expect = [0.5f64.ln(), 0.5f64.ln(), 4f64.ln()];
        for j in 0..3 {
            assert!((y.values[(0, j)] - expect[j]).abs() < 1e-14);
        }
        for i in 0..2 {
            assert!(y.values.row(i).sum().abs() < 1e-14);
        }
        let uni = comp(DMatrix::from_element(1, 4, 0.25));
        assert!(clr(&uni).unwrap().values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn clr_is_mean_of_lrs() {
        let c = comp(dmatrix![0.1, 0.2, 0.3, 0.4]);
        let y = clr(&c).unwrap();
        let l = c.log_values("t").unwrap();
        for j in 0..4 {
            let m: f64 = (0..4).map(|k| l[(0, j)] - l[(0, k)]).sum::<f64>() / 4.0;
            assert!((y.values[(0, j)] - m).abs() < 1e-14);
        }
    }

    #[test]
    fn tree_first_row_matches_five_part_layout() {
        let tree = ContrastTree::new(
            5,
            vec![
                (vec![0, 1], vec![2, 3, 4]),
                (vec![0], vec![1]),
                (vec![2], vec![3, 4]),
                (vec![3], vec![4]),
            ],
        )
        .unwrap();
        let m = tree.contrast();
        let scale = (6.0f64 / 5.0).sqrt();
        let raw = [0.5, 0.5, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
        for p in 0..5 {
            assert!((m[(0, p)] - scale * raw[p]).abs() < 1e-15);
        }
        let g = &m * m.transpose();
        assert!((g - DMatrix::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn invalid_trees_rejected() {
        assert!(ContrastTree::new(3, vec![(vec![0], vec![1])]).is_err());
        assert!(ContrastTree::new(3, vec![(vec![0], vec![1, 2]), (vec![0], vec![1])]).is_err());
        assert!(ContrastTree::new(3, vec![(vec![0], vec![0, 1, 2])]).is_err());
        assert!(ContrastTree::pivot(&[0, 0, 1]).is_err());
    }

    #[test]
    fn two_part_ilr() {
        let c = comp(dmatrix![0.2, 0.8]);
        let t = ContrastTree::new(2, vec![(vec![0], vec![1])]).unwrap();
        let v = ilr(&c, &t).unwrap().values[(0, 0)];
        assert!((v - (0.25f64).ln() / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn plr_pivots() {
        let c = comp(dmatrix![0.1, 0.2, 0.3, 0.4]);
        let p = plr(&c, &[0, 1, 2, 3]).unwrap();
        let l = c.log_values("t").unwrap();
        // last pivot is the normalized logratio of the final two parts
        assert!((p.values[(0, 2)] - (l[(0, 2)] - l[(0, 3)]) / 2f64.sqrt()).abs() < 1e-14);
        // first pivot is proportional to log(x1 / gmean(x2, x3, x4))
        let g = (l[(0, 1)] + l[(0, 2)] + l[(0, 3)]) / 3.0;
        assert!((p.values[(0, 0)] - (3.0f64 / 4.0).sqrt() * (l[(0, 0)] - g)).abs() < 1e-14);
        let t = ContrastTree::pivot(&[0, 1, 2, 3]).unwrap();
        assert_eq!(ilr(&c, &t).unwrap().values, p.values);
    }

    #[test]
    fn slr_examples() {
        let c = comp(dmatrix![0.2, 0.3, 0.5; 0.0, 0.4, 0.6]);
        let v = slr(&c, &[0, 1], &[2]).unwrap();
        assert!(v[0].abs() < 1e-15);
        assert!((v[1] - (0.4f64 / 0.6).ln()).abs() < 1e-15);
        assert!(matches!(slr(&c, &[0], &[1]), Err(CodaError::ZeroSubtotal { .. })));
        assert!(slr(&c, &[0], &[0, 1]).is_err());
        let p = comp(dmatrix![0.2, 0.3, 0.5]);
        let lr = lr_all(&p).unwrap();
        assert!((slr(&p, &[0], &[1]).unwrap()[0] - lr.values[(0, 0)]).abs() < 1e-15);
    }

    #[test]
    fn box_cox_examples() {
        let m = dmatrix![0.25, 0.75];
        assert_eq!(box_cox_matrix(&m, 1.0).unwrap(), m);
        assert!((box_cox_matrix(&m, 0.5).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(box_cox_matrix(&m, 0.0).is_err());
        let a = 1e-3;
        let (x, y) = (0.3f64, 0.05f64);
        let approx = (x.powf(a) - y.powf(a)) / a;
        let exact = x.ln() - y.ln();
        assert!(((approx - exact) / exact).abs() < 1e-2);
    }

    #[test]
    fn log_contrast_examples() {
        let c = comp(dmatrix![0.1, 0.2, 0.3, 0.4]);
        let v = log_contrast(&c, &[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((v[0] - 0.5f64.ln()).abs() < 1e-15);
        let clr_coeffs = [0.75, -0.25, -0.25, -0.25];
        let y = clr(&c).unwrap();
        assert!((log_contrast(&c, &clr_coeffs).unwrap()[0] - y.values[(0, 0)]).abs() < 1e-14);
        for p in 0..4 {
            assert!((y.contrast[(0, p)] - clr_coeffs[p]).abs() < 1e-15);
        }
        assert!(log_contrast(&c, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn named_tree_round_trip() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let t = ContrastTree::new(3, vec![(vec![2], vec![0, 1]), (vec![0], vec![1])]).unwrap();
        let named = t.to_named(&names);
        assert_eq!(named[0].numerator, vec!["c"]);
        assert_eq!(ContrastTree::from_named(&names, &named).unwrap(), t);
    }
}
