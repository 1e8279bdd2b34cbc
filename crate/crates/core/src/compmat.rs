//! Compositions and their elementary operations: closure, subcompositions,
//! amalgamations, detection-limit zero replacement and part weighting.
//!
//! Zero replacement operates on already closed data: each zero in part `j` is
//! replaced by a fraction of the smallest positive value of that part and the
//! rows are closed again.

use nalgebra::DMatrix;

use crate::error::{invalid, CodaError, Result};

/// Row sums within this distance of 1 are accepted as already closed.
pub const CLOSURE_TOL: f64 = 1e-6;

/// Default detection-limit fraction for zero replacement.
pub const DEFAULT_ZERO_FRACTION: f64 = 2.0 / 3.0;

/// Nonnegative data that has not been closed, e.g. counts.
#[derive(Debug, Clone)]
pub struct RawCountMatrix {
    values: DMatrix<f64>,
    part_names: Vec<String>,
    row_ids: Vec<String>,
    groups: Option<Vec<String>>,
}

impl RawCountMatrix {
    pub fn new(
        values: DMatrix<f64>,
        part_names: Vec<String>,
        row_ids: Vec<String>,
        groups: Option<Vec<String>>,
    ) -> Result<Self> {
        check_labels(&values, &part_names, &row_ids, groups.as_deref())?;
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                let x = values[(i, j)];
                if !x.is_finite() || x < 0.0 {
                    return Err(CodaError::NegativeEntry {
                        row: row_ids[i].clone(),
                        part: part_names[j].clone(),
                    });
                }
            }
            if values.row(i).iter().all(|&x| x == 0.0) {
                return Err(CodaError::ZeroRowTotal {
                    row: row_ids[i].clone(),
                });
            }
        }
        Ok(Self {
            values,
            part_names,
            row_ids,
            groups,
        })
    }

    /// Builds a matrix with generated labels `P1..PD` and `1..N`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let (parts, rows) = default_labels(&values);
        Self::new(values, parts, rows, None)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
    pub fn part_names(&self) -> &[String] {
        &self.part_names
    }
    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }
    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }
    pub fn nparts(&self) -> usize {
        self.values.ncols()
    }

    /// Row totals ("sizes").
    pub fn totals(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }

    /// Divides every row by its total. Weights are uniform.
    pub fn close(&self) -> CompositionMatrix {
        let totals = self.totals();
        let values = DMatrix::from_fn(self.nrows(), self.nparts(), |i, j| {
            self.values[(i, j)] / totals[i]
        });
        let d = self.nparts();
        CompositionMatrix {
            values,
            part_names: self.part_names.clone(),
            row_ids: self.row_ids.clone(),
            groups: self.groups.clone(),
            weights: vec![1.0 / d as f64; d],
        }
    }
}

/// Free-function form of [`RawCountMatrix::close`].
pub fn close(raw: &RawCountMatrix) -> CompositionMatrix {
    raw.close()
}

/// How part weights are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    Uniform,
    /// Average proportion of each part.
    ColumnMeans,
    /// Positive weights, renormalized to sum to one.
    Explicit(Vec<f64>),
}

/// Closed compositions: nonnegative rows summing to one, with part weights.
#[derive(Debug, Clone)]
pub struct CompositionMatrix {
    values: DMatrix<f64>,
    part_names: Vec<String>,
    row_ids: Vec<String>,
    groups: Option<Vec<String>>,
    weights: Vec<f64>,
}

impl CompositionMatrix {
    /// Accepts rows that already sum to one within [`CLOSURE_TOL`] and
    /// renormalizes them exactly. Weights are uniform.
    pub fn new(
        values: DMatrix<f64>,
        part_names: Vec<String>,
        row_ids: Vec<String>,
        groups: Option<Vec<String>>,
    ) -> Result<Self> {
        let raw = RawCountMatrix::new(values, part_names, row_ids, groups)?;
        for (i, t) in raw.totals().into_iter().enumerate() {
            if (t - 1.0).abs() > CLOSURE_TOL {
                return Err(invalid(format!(
                    "row '{}' sums to {t}, not 1; close raw data first",
                    raw.row_ids[i]
                )));
            }
        }
        Ok(raw.close())
    }

    /// Closes an arbitrary nonnegative matrix with generated labels.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        Ok(RawCountMatrix::from_matrix(values)?.close())
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
    pub fn part_names(&self) -> &[String] {
        &self.part_names
    }
    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }
    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }
    pub fn nparts(&self) -> usize {
        self.values.ncols()
    }

    pub fn part_index(&self, name: &str) -> Option<usize> {
        self.part_names.iter().position(|p| p == name)
    }

    /// Replaces (or removes) the group labels.
    pub fn with_groups(mut self, groups: Option<Vec<String>>) -> Result<Self> {
        if let Some(g) = &groups {
            if g.len() != self.nrows() {
                return Err(CodaError::DimensionMismatch {
                    what: "group labels",
                    expected: self.nrows(),
                    found: g.len(),
                });
            }
        }
        self.groups = groups;
        Ok(self)
    }

    /// Distinct group levels (in order of first appearance) and per-row codes.
    pub fn group_codes(&self, op: &'static str) -> Result<(Vec<String>, Vec<usize>)> {
        let groups = self.groups.as_ref().ok_or(CodaError::MissingGroups(op))?;
        Ok(encode_labels(groups))
    }

    /// Fails with [`CodaError::ZeroEntries`] naming the first zero found.
    pub fn require_positive(&self, op: &'static str) -> Result<()> {
        for i in 0..self.nrows() {
            for j in 0..self.nparts() {
                if self.values[(i, j)] <= 0.0 {
                    return Err(CodaError::ZeroEntries {
                        op,
                        row: self.row_ids[i].clone(),
                        part: self.part_names[j].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Natural logarithm of every entry.
    pub fn log_values(&self, op: &'static str) -> Result<DMatrix<f64>> {
        self.require_positive(op)?;
        Ok(self.values.map(f64::ln))
    }

    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&x| x == 0.0).count()
    }

    /// Reclosed selection of parts; weights are reclosed over the selection.
    pub fn subcomposition(&self, parts: &[usize]) -> Result<Self> {
        if parts.len() < 2 {
            return Err(invalid("a subcomposition needs at least two parts"));
        }
        let d = self.nparts();
        let mut seen = vec![false; d];
        for &p in parts {
            if p >= d {
                return Err(CodaError::IndexOutOfRange {
                    what: "subcomposition part",
                    index: p,
                    len: d,
                });
            }
            if seen[p] {
                return Err(invalid(format!("part {p} selected twice")));
            }
            seen[p] = true;
        }
        let n = self.nrows();
        let mut values = DMatrix::zeros(n, parts.len());
        for i in 0..n {
            let sub: f64 = parts.iter().map(|&p| self.values[(i, p)]).sum();
            if sub <= 0.0 {
                return Err(CodaError::ZeroSubtotal {
                    row: self.row_ids[i].clone(),
                });
            }
            for (k, &p) in parts.iter().enumerate() {
                values[(i, k)] = self.values[(i, p)] / sub;
            }
        }
        let wsum: f64 = parts.iter().map(|&p| self.weights[p]).sum();
        Ok(Self {
            values,
            part_names: parts.iter().map(|&p| self.part_names[p].clone()).collect(),
            row_ids: self.row_ids.clone(),
            groups: self.groups.clone(),
            weights: parts.iter().map(|&p| self.weights[p] / wsum).collect(),
        })
    }

    /// Sums each block of parts into one part placed at the position of the
    /// block's lowest index; unlisted parts are carried through. Block weights
    /// are the sums of their members' weights, and names are joined with `+`.
    pub fn amalgamate(&self, partition: &Partition) -> Result<Self> {
        let d = self.nparts();
        let mut owner: Vec<Option<usize>> = vec![None; d];
        for (b, block) in partition.blocks().iter().enumerate() {
            for &p in block {
                if p >= d {
                    return Err(CodaError::IndexOutOfRange {
                        what: "amalgamation part",
                        index: p,
                        len: d,
                    });
                }
                owner[p] = Some(b);
            }
        }
        // Output columns: a list of source-part groups in output order.
        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut placed = vec![false; partition.blocks().len()];
        for p in 0..d {
            match owner[p] {
                None => columns.push(vec![p]),
                Some(b) if !placed[b] => {
                    placed[b] = true;
                    let mut block = partition.blocks()[b].clone();
                    block.sort_unstable();
                    columns.push(block);
                }
                Some(_) => {}
            }
        }
        let n = self.nrows();
        let values = DMatrix::from_fn(n, columns.len(), |i, k| {
            columns[k].iter().map(|&p| self.values[(i, p)]).sum()
        });
        let part_names = columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&p| self.part_names[p].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let weights = columns
            .iter()
            .map(|c| c.iter().map(|&p| self.weights[p]).sum())
            .collect();
        let mut out = Self {
            values,
            part_names,
            row_ids: self.row_ids.clone(),
            groups: self.groups.clone(),
            weights,
        };
        out.reclose();
        Ok(out)
    }

    /// Replaces each zero in part `j` by `fraction` times the smallest
    /// positive value of part `j`, then recloses the rows.
    pub fn replace_zeros(&self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(invalid(format!("zero fraction {fraction} not in (0, 1]")));
        }
        let mut values = self.values.clone();
        for j in 0..self.nparts() {
            let min_pos = self
                .values
                .column(j)
                .iter()
                .cloned()
                .filter(|&x| x > 0.0)
                .fold(f64::INFINITY, f64::min);
            if !min_pos.is_finite() {
                return Err(CodaError::ZeroColumn {
                    part: self.part_names[j].clone(),
                });
            }
            for i in 0..self.nrows() {
                if values[(i, j)] == 0.0 {
                    values[(i, j)] = fraction * min_pos;
                }
            }
        }
        let mut out = Self {
            values,
            ..self.clone()
        };
        out.reclose();
        Ok(out)
    }

    /// Returns a copy carrying the requested part weights.
    pub fn set_weights(&self, scheme: &Weighting) -> Result<Self> {
        let d = self.nparts();
        let weights = match scheme {
            Weighting::Uniform => vec![1.0 / d as f64; d],
            Weighting::ColumnMeans => {
                let n = self.nrows() as f64;
                let means: Vec<f64> = self.values.column_iter().map(|c| c.sum() / n).collect();
                let total: f64 = means.iter().sum();
                if means.iter().any(|&m| m <= 0.0) {
                    let j = means.iter().position(|&m| m <= 0.0).unwrap();
                    return Err(CodaError::ZeroColumn {
                        part: self.part_names[j].clone(),
                    });
                }
                means.into_iter().map(|m| m / total).collect()
            }
            Weighting::Explicit(w) => {
                if w.len() != d {
                    return Err(CodaError::DimensionMismatch {
                        what: "explicit weights",
                        expected: d,
                        found: w.len(),
                    });
                }
                if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                    return Err(invalid(format!("weight {bad} is not positive")));
                }
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
        };
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    /// Rows restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let values = DMatrix::from_fn(rows.len(), self.nparts(), |i, j| self.values[(rows[i], j)]);
        Self {
            values,
            part_names: self.part_names.clone(),
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
            groups: self
                .groups
                .as_ref()
                .map(|g| rows.iter().map(|&i| g[i].clone()).collect()),
            weights: self.weights.clone(),
        }
    }

    fn reclose(&mut self) {
        for i in 0..self.values.nrows() {
            let t: f64 = self.values.row(i).sum();
            for j in 0..self.values.ncols() {
                self.values[(i, j)] /= t;
            }
        }
    }
}

/// Disjoint nonempty blocks of part indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for block in &blocks {
            if block.is_empty() {
                return Err(invalid("partition blocks must be nonempty"));
            }
            for &p in block {
                if !seen.insert(p) {
                    return Err(CodaError::OverlappingBlocks(p));
                }
            }
        }
        Ok(Self { blocks })
    }

    /// Every part in its own block.
    pub fn singletons(d: usize) -> Self {
        Self {
            blocks: (0..d).map(|p| vec![p]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// Maps labels to dense codes in order of first appearance.
pub fn encode_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut levels: Vec<String> = Vec::new();
    let codes = labels
        .iter()
        .map(|l| match levels.iter().position(|x| x == l) {
            Some(k) => k,
            None => {
                levels.push(l.clone());
                levels.len() - 1
            }
        })
        .collect();
    (levels, codes)
}

fn default_labels(values: &DMatrix<f64>) -> (Vec<String>, Vec<String>) {
    (
        (1..=values.ncols()).map(|j| format!("P{j}")).collect(),
        (1..=values.nrows()).map(|i| i.to_string()).collect(),
    )
}

fn check_labels(
    values: &DMatrix<f64>,
    parts: &[String],
    rows: &[String],
    groups: Option<&[String]>,
) -> Result<()> {
    if parts.len() != values.ncols() {
        return Err(CodaError::DimensionMismatch {
            what: "part names",
            expected: values.ncols(),
            found: parts.len(),
        });
    }
    if rows.len() != values.nrows() {
        return Err(CodaError::DimensionMismatch {
            what: "row identifiers",
            expected: values.nrows(),
            found: rows.len(),
        });
    }
    if let Some(g) = groups {
        if g.len() != values.nrows() {
            return Err(CodaError::DimensionMismatch {
                what: "group labels",
                expected: values.nrows(),
                found: g.len(),
            });
        }
    }
    if values.ncols() < 2 {
        return Err(invalid("a composition needs at least two parts"));
    }
    if values.nrows() == 0 {
        return Err(invalid("no rows"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn comp(m: DMatrix<f64>) -> CompositionMatrix {
        CompositionMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn close_divides_by_row_total() {
        let c = comp(dmatrix![2.0, 2.0, 4.0; 1.0, 0.0, 0.0]);
        assert_eq!(c.values().row(0).iter().cloned().collect::<Vec<_>>(), vec![0.25, 0.25, 0.5]);
        assert_eq!(c.values().row(1).iter().cloned().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        assert_eq!(c.weights(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn close_equates_rescaled_rows() {
        let c = comp(dmatrix![3.0, 1.0; 6.0, 2.0]);
        assert_eq!(c.values()[(0, 0)], 0.75);
        assert_eq!(c.values().row(0), c.values().row(1));
    }

    #[test]
    fn zero_total_row_is_named() {
        let err = RawCountMatrix::new(
            dmatrix![1.0, 2.0; 0.0, 0.0],
            vec!["a".into(), "b".into()],
            vec!["s1".into(), "s2".into()],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, CodaError::ZeroRowTotal { ref row } if row == "s2"));
    }

    #[test]
    fn new_accepts_nearly_closed_rows() {
        let c = CompositionMatrix::new(
            dmatrix![0.3333333, 0.6666667],
            vec!["a".into(), "b".into()],
            vec!["r".into()],
            None,
        )
        .unwrap();
        assert!((c.values().row(0).sum() - 1.0).abs() < 1e-15);
        assert!(CompositionMatrix::new(
            dmatrix![0.3, 0.6],
            vec!["a".into(), "b".into()],
            vec!["r".into()],
            None
        )
        .is_err());
    }

    #[test]
    fn subcomposition_recloses() {
        let c = comp(dmatrix![0.2, 0.3, 0.5]);
        let s = c.subcomposition(&[0, 1]).unwrap();
        assert!((s.values()[(0, 0)] - 0.4).abs() < 1e-15);
        assert!((s.values()[(0, 1)] - 0.6).abs() < 1e-15);
        assert_eq!(s.weights(), &[0.5, 0.5]);
        let full = c.subcomposition(&[0, 1, 2]).unwrap();
        assert_eq!(full.values(), c.values());
    }

    #[test]
    fn subcomposition_zero_subtotal_is_named() {
        let c = comp(dmatrix![0.0, 0.0, 1.0; 0.2, 0.3, 0.5]);
        let err = c.subcomposition(&[0, 1]).unwrap_err();
        assert!(matches!(err, CodaError::ZeroSubtotal { ref row } if row == "1"));
        assert!(c.subcomposition(&[0]).is_err());
    }

    #[test]
    fn amalgamate_sums_blocks() {
        let c = comp(dmatrix![0.2, 0.3, 0.5]);
        let a = c.amalgamate(&Partition::new(vec![vec![0, 1]]).unwrap()).unwrap();
        assert_eq!(a.nparts(), 2);
        assert!((a.values()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((a.values()[(0, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(a.part_names(), &["P1+P2".to_string(), "P3".to_string()]);
        assert!((a.weights()[0] - 2.0 / 3.0).abs() < 1e-15);

        let id = c.amalgamate(&Partition::singletons(3)).unwrap();
        assert_eq!(id.values(), c.values());
    }

    #[test]
    fn overlapping_blocks_rejected() {
        assert!(matches!(
            Partition::new(vec![vec![0, 1], vec![1, 2]]),
            Err(CodaError::OverlappingBlocks(1))
        ));
        assert!(Partition::new(vec![vec![]]).is_err());
    }

    #[test]
    fn replace_zeros_uses_column_minimum() {
        // column 1 holds [0, 0.3, 0.6]
        let c = comp(dmatrix![
            0.5, 0.0, 0.5;
            0.35, 0.3, 0.35;
            0.2, 0.6, 0.2
        ]);
        let r = c.replace_zeros(2.0 / 3.0).unwrap();
        let row0: Vec<f64> = r.values().row(0).iter().cloned().collect();
        let expect = [0.5 / 1.2, 0.2 / 1.2, 0.5 / 1.2];
        for (a, b) in row0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let untouched = comp(dmatrix![0.2, 0.8; 0.4, 0.6]);
        assert_eq!(untouched.replace_zeros(0.5).unwrap().values(), untouched.values());
    }

    #[test]
    fn replace_zeros_rejects_empty_column_and_bad_fraction() {
        let c = comp(dmatrix![0.5, 0.0, 0.5; 0.4, 0.0, 0.6]);
        assert!(matches!(c.replace_zeros(0.5), Err(CodaError::ZeroColumn { ref part }) if part == "P2"));
        let ok = comp(dmatrix![0.5, 0.5]);
        assert!(ok.replace_zeros(0.0).is_err());
        assert!(ok.replace_zeros(1.5).is_err());
    }

    #[test]
    fn weighting_schemes() {
        let c = comp(dmatrix![0.2, 0.8; 0.4, 0.6]);
        let cm = c.set_weights(&Weighting::ColumnMeans).unwrap();
        assert!((cm.weights()[0] - 0.3).abs() < 1e-15);
        assert!((cm.weights()[1] - 0.7).abs() < 1e-15);
        let four = comp(dmatrix![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(four.set_weights(&Weighting::Uniform).unwrap().weights(), &[0.25; 4]);
        let ex = four.set_weights(&Weighting::Explicit(vec![1.0, 1.0, 2.0, 4.0])).unwrap();
        assert_eq!(ex.weights(), &[0.125, 0.125, 0.25, 0.5]);
        assert!(four.set_weights(&Weighting::Explicit(vec![1.0, 0.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn require_positive_names_first_zero() {
        let c = comp(dmatrix![0.5, 0.5; 0.0, 1.0]);
        match c.require_positive("clr") {
            Err(CodaError::ZeroEntries { row, part, .. }) => {
                assert_eq!(row, "2");
                assert_eq!(part, "P1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
