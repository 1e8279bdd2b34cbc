//! Coherence and convergence diagnostics, multinomial dilution, and
//! shrinkage estimation of compositions from counts.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compmat::{CompositionMatrix, DEFAULT_ZERO_FRACTION};
use crate::error::{invalid, CodaError, Result};
use crate::geometry::procrustes_correlation;
use crate::ordination::{ca, lra};

/// Retries allowed per draw when a random subcomposition is degenerate.
pub const MAX_RESAMPLES: usize = 100;

/// Part geometry compared between a subcomposition and the full composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartGeometry {
    /// CA column principal coordinates (chi-square geometry).
    ChiSquare,
    /// As `ChiSquare`, after raising the composition to a power and closing.
    ChiSquarePower(f64),
    /// LRA column principal coordinates (logratio geometry).
    Logratio,
}

#[derive(Debug, Clone)]
pub struct SizeSummary {
    pub size: usize,
    pub correlations: Vec<f64>,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub above_0999: usize,
    pub resamples: usize,
}

#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub geometry: PartGeometry,
    pub sizes: Vec<SizeSummary>,
    pub seed: u64,
}

/// Sample quantile with linear interpolation between order statistics
/// (the common "type 7" definition).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(size: usize, mut correlations: Vec<f64>, resamples: usize) -> SizeSummary {
    let mut sorted = correlations.clone();
    sorted.sort_by(f64::total_cmp);
    correlations.shrink_to_fit();
    SizeSummary {
        size,
        median: quantile(&sorted, 0.5),
        lower: quantile(&sorted, 0.025),
        upper: quantile(&sorted, 0.975),
        above_0999: sorted.iter().filter(|&&r| r > 0.999).count(),
        correlations,
        resamples,
    }
}

fn ids(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Column principal coordinates of a composition under the chosen geometry.
fn part_coordinates(c: &CompositionMatrix, geometry: PartGeometry) -> Result<DMatrix<f64>> {
    match geometry {
        PartGeometry::Logratio => Ok(lra(c)?.col_principal),
        PartGeometry::ChiSquare => {
            Ok(ca(c.values(), None, ids(c.nrows(), "r"), c.part_names().to_vec())?.col_principal)
        }
        PartGeometry::ChiSquarePower(a) => {
            let powered = CompositionMatrix::from_matrix(c.values().map(|x| x.powf(a)))?;
            Ok(ca(powered.values(), None, ids(c.nrows(), "r"), c.part_names().to_vec())?.col_principal)
        }
    }
}

/// Procrustes correlation between the part geometry of one subcomposition
/// and the full-composition geometry restricted to the same parts.
pub fn subcomposition_coherence(
    c: &CompositionMatrix,
    full: &DMatrix<f64>,
    parts: &[usize],
    geometry: PartGeometry,
) -> Result<f64> {
    let sub = c.subcomposition(parts)?;
    if parts.len() == 2 {
        // two points always match up to translation, rotation and scale
        return Ok(1.0);
    }
    let x = part_coordinates(&sub, geometry)?;
    let y = DMatrix::from_fn(parts.len(), full.ncols(), |i, a| full[(parts[i], a)]);
    procrustes_correlation(&x, &y)
}

/// Random-subcomposition sweep: for each size, `reps` uniformly drawn part
/// subsets. Draw `r` of the `s`-th size uses its own seeded stream; a draw
/// whose subcomposition is degenerate (zero subtotal, zero part margin) is
/// redrawn up to [`MAX_RESAMPLES`] times.
pub fn coherence_sweep(
    c: &CompositionMatrix,
    geometry: PartGeometry,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<CoherenceReport> {
    let d = c.nparts();
    if reps == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s < 2 || s > d) {
        return Err(invalid(format!("subcomposition size {s} not in 2..={d}")));
    }
    if geometry == PartGeometry::Logratio {
        c.require_positive("coherence_sweep")?;
    }
    let full = part_coordinates(c, geometry)?;
    let mut out = Vec::with_capacity(sizes.len());
    for (si, &s) in sizes.iter().enumerate() {
        let draws: Vec<Result<(f64, usize)>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((si as u64) << 32) | r as u64);
                let mut retries = 0;
                loop {
                    let mut parts = sample(&mut rng, d, s).into_vec();
                    parts.sort_unstable();
                    match subcomposition_coherence(c, &full, &parts, geometry) {
                        Ok(v) => return Ok((v, retries)),
                        Err(
                            e @ (CodaError::ZeroSubtotal { .. }
                            | CodaError::ZeroColumn { .. }
                            | CodaError::ZeroRowTotal { .. }
                            | CodaError::Degenerate(_)),
                        ) => {
                            retries += 1;
                            if retries > MAX_RESAMPLES {
                                return Err(CodaError::Degenerate(format!(
                                    "no valid subcomposition of size {s} after {MAX_RESAMPLES} redraws: {e}"
                                )));
                            }
                        }
                        Err(e) => return Err(e),
                    }
                }
            })
            .collect();
        let mut values = Vec::with_capacity(reps);
        let mut resamples = 0;
        for dr in draws {
            let (v, k) = dr?;
            values.push(v);
            resamples += k;
        }
        out.push(summarize(s, values, resamples));
    }
    Ok(CoherenceReport {
        geometry,
        sizes: out,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceCurve {
    pub alphas: Vec<f64>,
    pub correlations: Vec<f64>,
    pub zeros_replaced: bool,
}

impl ConvergenceCurve {
    /// Power and value of the highest correlation.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&a, &r) in self.alphas.iter().zip(&self.correlations) {
            if best.is_none_or(|b| r > b.1) {
                best = Some((a, r));
            }
        }
        best
    }
}

/// Procrustes correlation between the CA column geometry after each power
/// and the LRA column geometry. The LRA always uses zero-replaced data with
/// uniform part weights; the CA uses the replaced data or the original data
/// depending on `replace_zeros`. Deterministic.
pub fn alpha_sweep(c: &CompositionMatrix, alphas: &[f64], replace_zeros: bool) -> Result<ConvergenceCurve> {
    if let Some(&a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
        return Err(invalid(format!("power {a} not in (0, 1]")));
    }
    let replaced = if c.zero_count() > 0 {
        c.replace_zeros(DEFAULT_ZERO_FRACTION)?
    } else {
        c.clone()
    };
    let replaced = replaced.set_weights(&crate::compmat::Weighting::Uniform)?;
    let reference = lra(&replaced)?.col_principal;
    let data = if replace_zeros { replaced.values() } else { c.values() };
    let correlations = alphas
        .par_iter()
        .map(|&a| {
            let o = ca(data, Some(a), ids(c.nrows(), "r"), c.part_names().to_vec())?;
            procrustes_correlation(&o.col_principal, &reference)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceCurve {
        alphas: alphas.to_vec(),
        correlations,
        zeros_replaced: replace_zeros,
    })
}

/// Correlation between two multinomial counts with cell probabilities
/// `p_i` and `p_j`.
pub fn multinomial_correlation(p_i: f64, p_j: f64) -> Result<f64> {
    for p in [p_i, p_j] {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("probability {p} not in (0, 1)")));
        }
    }
    if p_i + p_j > 1.0 + 1e-12 {
        return Err(invalid("probabilities sum to more than 1"));
    }
    if (p_i + p_j - 1.0).abs() <= 1e-12 {
        return Ok(-1.0);
    }
    Ok(-(p_i * p_j / ((1.0 - p_i) * (1.0 - p_j))).sqrt())
}

/// For each size `s`, the multinomial correlation of the two most abundant
/// parts within the subcomposition of the `s` most abundant positive parts.
pub fn dilution_curve(counts: &[f64], sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    if counts.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(invalid("counts must be nonnegative"));
    }
    let mut order: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0.0).collect();
    if order.len() < 2 {
        return Err(invalid("dilution needs at least two positive parts"));
    }
    order.sort_by(|&a, &b| counts[b].total_cmp(&counts[a]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(sizes.len());
    for &s in sizes {
        if s < 2 || s > order.len() {
            return Err(invalid(format!(
                "size {s} not in 2..={} positive parts",
                order.len()
            )));
        }
        let sub: f64 = order[..s].iter().map(|&j| counts[j]).sum();
        let p1 = counts[order[0]] / sub;
        let p2 = counts[order[1]] / sub;
        out.push((s, multinomial_correlation(p1, p2)?));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Shrinkage {
    pub values: Vec<f64>,
    pub lambda: f64,
}

/// Shrinks empirical proportions toward the uniform composition with the
/// intensity that minimizes the estimated mean squared error.
pub fn shrink_estimate(counts: &[f64]) -> Result<Shrinkage> {
    let d = counts.len();
    if d < 2 {
        return Err(invalid("shrinkage needs at least two parts"));
    }
    if counts.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(invalid("counts must be nonnegative"));
    }
    let n: f64 = counts.iter().sum();
    if n <= 0.0 {
        return Err(CodaError::ZeroRowTotal { row: "counts".into() });
    }
    let p: Vec<f64> = counts.iter().map(|x| x / n).collect();
    let t = 1.0 / d as f64;
    let spread: f64 = p.iter().map(|q| (t - q).powi(2)).sum();
    let denom = (n - 1.0) * spread;
    let lambda = if denom > 0.0 {
        ((1.0 - p.iter().map(|q| q * q).sum::<f64>()) / denom).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut values: Vec<f64> = p.iter().map(|q| lambda * t + (1.0 - lambda) * q).collect();
    let s: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= s);
    Ok(Shrinkage { values, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert!((quantile(&v, 0.025) - 1.075).abs() < 1e-15);
    }

    #[test]
    fn multinomial_cases() {
        assert_eq!(multinomial_correlation(0.5, 0.5).unwrap(), -1.0);
        assert!(multinomial_correlation(1e-9, 0.3).unwrap().abs() < 1e-4);
        assert_eq!(
            multinomial_correlation(0.2, 0.3).unwrap(),
            multinomial_correlation(0.3, 0.2).unwrap()
        );
        assert!(multinomial_correlation(0.0, 0.3).is_err());
        assert!(multinomial_correlation(0.7, 0.6).is_err());
    }

    #[test]
    fn dilution_weakens_with_size() {
        let counts = [50.0, 30.0, 0.0, 10.0, 5.0, 3.0, 2.0];
        let curve = dilution_curve(&counts, &[2, 3, 4, 5, 6]).unwrap();
        assert_eq!(curve[0].1, -1.0);
        for w in curve.windows(2) {
            assert!(w[1].1.abs() <= w[0].1.abs());
        }
        assert!(dilution_curve(&counts, &[7]).is_err());
        assert!(dilution_curve(&[1.0, 0.0], &[2]).is_err());
    }

    #[test]
    fn shrinkage_cases() {
        let u = shrink_estimate(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(u.lambda, 1.0);
        assert!(u.values.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let s = shrink_estimate(&[10.0, 0.0, 3.0, 1.0]).unwrap();
        assert!(s.lambda > 0.0 && s.lambda <= 1.0);
        assert!(s.values.iter().all(|&v| v > 0.0));
        assert!((s.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(shrink_estimate(&[0.0, 0.0]).is_err());
        assert!(shrink_estimate(&[3.0]).is_err());
    }

    #[test]
    fn logratio_coherence_is_exact() {
        let c = CompositionMatrix::from_matrix(dmatrix![
            1.0, 2.0, 3.0, 4.0, 2.0;
            2.0, 1.0, 5.0, 1.0, 3.0;
            3.0, 3.0, 1.0, 2.0, 1.0;
            1.0, 4.0, 2.0, 6.0, 2.0;
            5.0, 1.0, 1.0, 1.0, 4.0
        ])
        .unwrap();
        let r = coherence_sweep(&c, PartGeometry::Logratio, &[3, 4], 5, 11).unwrap();
        for s in &r.sizes {
            for &v in &s.correlations {
                assert!((v - 1.0).abs() < 1e-9);
            }
        }
        let chi = coherence_sweep(&c, PartGeometry::ChiSquare, &[3], 5, 11).unwrap();
        assert!(chi.sizes[0].correlations.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(coherence_sweep(&c, PartGeometry::Logratio, &[6], 1, 0).is_err());
    }

    #[test]
    fn zero_subtotals_are_redrawn() {
        // parts 0 and 1 are zero together in row 0
        let c = CompositionMatrix::from_matrix(dmatrix![
            0.0, 0.0, 0.0, 1.0;
            1.0, 2.0, 1.0, 1.0;
            2.0, 1.0, 3.0, 2.0;
            3.0, 1.0, 1.0, 2.0
        ])
        .unwrap();
        let r = coherence_sweep(&c, PartGeometry::ChiSquare, &[3], 20, 5).unwrap();
        // only the subsets containing part 3 are valid: 3 of 4
        assert_eq!(r.sizes[0].correlations.len(), 20);
        assert!(r.sizes[0].resamples > 0);
    }

    #[test]
    fn two_part_alpha_one_is_computable() {
        let c = CompositionMatrix::from_matrix(dmatrix![1.0, 2.0, 4.0; 3.0, 1.0, 1.0; 2.0, 2.0, 1.0; 1.0, 5.0, 2.0])
            .unwrap();
        let k = alpha_sweep(&c, &[1.0, 0.5, 0.001], true).unwrap();
        assert!(k.correlations[0] < 1.0);
        assert!(k.correlations[2] > 0.99);
        assert!(alpha_sweep(&c, &[0.0], true).is_err());
    }
}
