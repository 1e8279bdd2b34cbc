//! Logratio selection: reference choice for ALRs, forward stepwise selection
//! of pairwise logratios, backward elimination of ALRs, and the θ criterion
//! for group separation with a permutation estimate of the FDR.
//!
//! Explained variance is redundancy analysis of the centred weighted CLR
//! matrix `Y` on the selected logratios. Every logratio is a linear function
//! `Y a` of the CLR, so all projections and Procrustes correlations are
//! computed from the D×D matrix `G = Yᵀ Y / N` without touching the rows
//! again.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compmat::CompositionMatrix;
use crate::error::{invalid, CodaError, Result};
use crate::linalg::{center_columns_uniform, nuclear_norm, psd_pinv};
use crate::transforms::clr;

/// Relative threshold for treating a candidate logratio as dependent on the
/// ones already selected.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// Relative gap within which two candidates are considered tied.
const TIE_TOL: f64 = 1e-12;

/// Centred weighted CLR Gram matrix and the weights it was built with.
struct ClrGram {
    g: DMatrix<f64>,
    w: Vec<f64>,
    total: f64,
}

impl ClrGram {
    fn new(c: &CompositionMatrix, op: &'static str) -> Result<Self> {
        c.require_positive(op)?;
        let y = center_columns_uniform(&clr(c)?.values);
        let n = c.nrows() as f64;
        let g = (y.transpose() * &y) / n;
        let w = c.weights().to_vec();
        let total = (0..w.len()).map(|m| w[m] * g[(m, m)]).sum();
        Ok(Self { g, w, total })
    }

    fn d(&self) -> usize {
        self.w.len()
    }

    /// Contrast matrix (D×s) for part pairs, numerator minus denominator.
    fn pair_contrasts(&self, pairs: &[(usize, usize)]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.d(), pairs.len());
        for (q, &(j, k)) in pairs.iter().enumerate() {
            a[(j, q)] += 1.0;
            a[(k, q)] -= 1.0;
        }
        a
    }

    /// Procrustes correlation between the row geometry of the pairwise
    /// logratios (weighted `c_j c_k`) and the weighted CLR geometry.
    fn procrustes(&self, pairs: &[(usize, usize)]) -> f64 {
        if pairs.is_empty() || self.total <= 0.0 {
            return 0.0;
        }
        let d = self.d();
        let a = self.pair_contrasts(pairs);
        let sw: Vec<f64> = pairs.iter().map(|&(j, k)| (self.w[j] * self.w[k]).sqrt()).collect();
        let ag = a.transpose() * &self.g;
        let m = DMatrix::from_fn(pairs.len(), d, |q, p| sw[q] * ag[(q, p)] * self.w[p].sqrt());
        let aga = &ag * &a;
        let sx: f64 = (0..pairs.len()).map(|q| sw[q] * sw[q] * aga[(q, q)]).sum();
        if sx <= 0.0 {
            return 0.0;
        }
        (nuclear_norm(&m) / (sx * self.total).sqrt()).min(1.0)
    }

    /// Share of total variance explained by the span of the pair logratios.
    fn explained(&self, pairs: &[(usize, usize)]) -> f64 {
        if pairs.is_empty() || self.total <= 0.0 {
            return 0.0;
        }
        let a = self.pair_contrasts(pairs);
        let ag = a.transpose() * &self.g;
        let (p, _) = psd_pinv(&(&ag * &a), DEPENDENCE_TOL);
        let pb = &p * &ag;
        let mut s = 0.0;
        for q in 0..pairs.len() {
            for m in 0..self.d() {
                s += self.w[m] * ag[(q, m)] * pb[(q, m)];
            }
        }
        (s / self.total).clamp(0.0, 1.0)
    }
}

/// One reference candidate for ALRs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlrReference {
    pub part: usize,
    pub name: String,
    pub procrustes: f64,
    pub log_variance: f64,
}

/// Ranks every part as an ALR reference by the Procrustes correlation of the
/// ALR geometry with the CLR geometry (descending; ties by lower log
/// variance, then lower index).
pub fn find_alr(c: &CompositionMatrix) -> Result<Vec<AlrReference>> {
    let d = c.nparts();
    if d < 2 {
        return Err(invalid("reference ranking needs at least two parts"));
    }
    let gram = ClrGram::new(c, "find_alr")?;
    let logs = c.log_values("find_alr")?;
    let n = c.nrows() as f64;
    let mut out: Vec<AlrReference> = (0..d)
        .into_par_iter()
        .map(|r| {
            let pairs: Vec<(usize, usize)> = (0..d).filter(|&j| j != r).map(|j| (j, r)).collect();
            let col = logs.column(r);
            let mean = col.sum() / n;
            let log_variance = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            AlrReference {
                part: r,
                name: c.part_names()[r].clone(),
                procrustes: if d == 2 { 1.0 } else { gram.procrustes(&pairs) },
                log_variance,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.procrustes
            .total_cmp(&a.procrustes)
            .then(a.log_variance.total_cmp(&b.log_variance))
            .then(a.part.cmp(&b.part))
    });
    Ok(out)
}

/// Stopping thresholds. Explained variance is in percent. Selection stops as
/// soon as every active threshold is met.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    pub min_explained: Option<f64>,
    pub min_procrustes: Option<f64>,
    pub max_steps: Option<usize>,
}

impl StopRule {
    fn active(&self) -> bool {
        self.min_explained.is_some() || self.min_procrustes.is_some()
    }

    fn met(&self, explained_pct: f64, procrustes: f64) -> bool {
        self.min_explained.is_none_or(|t| explained_pct >= t)
            && self.min_procrustes.is_none_or(|t| procrustes >= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    /// All active thresholds were met.
    ThresholdsMet,
    /// No further step was possible.
    Exhausted,
    /// The step limit was hit before the thresholds were met.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub label: String,
    /// Numerator and denominator part of the logratio added or removed.
    pub parts: (usize, usize),
    /// Cumulative explained variance after the step, percent.
    pub explained: f64,
    pub procrustes: f64,
}

#[derive(Debug, Clone)]
pub struct StepTrace {
    pub direction: Direction,
    /// For backward traces the starting state with all ALRs is kept in
    /// `start` and `steps` holds only eliminations.
    pub steps: Vec<Step>,
    pub start: Option<Step>,
    /// Best candidates considered at each step, best first.
    pub candidates: Vec<Vec<Step>>,
    pub status: TraceStatus,
    pub warning: Option<String>,
}

impl StepTrace {
    /// Distinct parts involved in the selected logratios (forward traces) or
    /// in the retained ALRs including the reference (backward traces).
    pub fn parts_used(&self, nparts: usize) -> Vec<usize> {
        let mut used = vec![false; nparts];
        match self.direction {
            Direction::Forward => {
                for s in &self.steps {
                    used[s.parts.0] = true;
                    used[s.parts.1] = true;
                }
            }
            Direction::Backward => {
                used.iter_mut().for_each(|u| *u = true);
                for s in &self.steps {
                    used[s.parts.0] = false;
                }
            }
        }
        (0..nparts).filter(|&p| used[p]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub stop: StopRule,
    /// Candidates reported per step.
    pub top: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::default(),
            top: 20,
        }
    }
}

/// Greedy forward selection over all pairwise logratios, maximizing the
/// cumulative explained variance at each step (ties: higher Procrustes
/// correlation, then lower `(j, k)`). Candidates linearly dependent on the
/// current selection are never chosen.
pub fn stepwise_lr(c: &CompositionMatrix, opts: &StepOptions) -> Result<StepTrace> {
    let gram = ClrGram::new(c, "stepwise_lr")?;
    let d = gram.d();
    let names = c.part_names();
    let label = |j: usize, k: usize| format!("{}/{}", names[j], names[k]);
    let all_pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    let mut r = gram.g.clone();
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut explained = 0.0;
    let mut steps = Vec::new();
    let mut candidates = Vec::new();
    let status;
    let stop = opts.stop;

    loop {
        if stop.active() {
            if let Some(last) = steps.last() {
                let last: &Step = last;
                if stop.met(last.explained, last.procrustes) {
                    status = TraceStatus::ThresholdsMet;
                    break;
                }
            }
        }
        if stop.max_steps.is_some_and(|m| steps.len() >= m) {
            status = TraceStatus::StepLimit;
            break;
        }
        // gain of each independent candidate
        let mut scored: Vec<(usize, f64)> = all_pairs
            .par_iter()
            .enumerate()
            .filter_map(|(q, &(j, k))| {
                let ra: Vec<f64> = (0..d).map(|m| r[(m, j)] - r[(m, k)]).collect();
                let resid = ra[j] - ra[k];
                let full = gram.g[(j, j)] + gram.g[(k, k)] - 2.0 * gram.g[(j, k)];
                if full <= 0.0 || resid <= DEPENDENCE_TOL * full {
                    return None;
                }
                let gain: f64 = (0..d).map(|m| gram.w[m] * ra[m] * ra[m]).sum::<f64>() / resid;
                Some((q, gain))
            })
            .collect();
        if scored.is_empty() || gram.total <= 0.0 {
            status = TraceStatus::Exhausted;
            break;
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let best_gain = scored[0].1;
        let tol = TIE_TOL * gram.total.max(best_gain);
        let with_procrustes = |q: usize, gain: f64| {
            let (j, k) = all_pairs[q];
            let mut trial = chosen.clone();
            trial.push((j, k));
            Step {
                label: label(j, k),
                parts: (j, k),
                explained: 100.0 * (explained + gain / gram.total).min(1.0),
                procrustes: gram.procrustes(&trial),
            }
        };
        let tied: Vec<(usize, f64)> = scored
            .iter()
            .take_while(|s| best_gain - s.1 <= tol)
            .cloned()
            .collect();
        let (pick_q, _) = if tied.len() == 1 {
            tied[0]
        } else {
            let mut best = tied[0];
            let mut best_p = with_procrustes(best.0, best.1).procrustes;
            for &t in &tied[1..] {
                let p = with_procrustes(t.0, t.1).procrustes;
                if p > best_p + TIE_TOL {
                    best = t;
                    best_p = p;
                }
            }
            best
        };
        candidates.push(
            scored
                .iter()
                .take(opts.top)
                .map(|&(q, g)| with_procrustes(q, g))
                .collect(),
        );

        let (j, k) = all_pairs[pick_q];
        let ra: Vec<f64> = (0..d).map(|m| r[(m, j)] - r[(m, k)]).collect();
        let resid = ra[j] - ra[k];
        for p in 0..d {
            for q in 0..d {
                r[(p, q)] -= ra[p] * ra[q] / resid;
            }
        }
        chosen.push((j, k));
        let resid_total: f64 = (0..d).map(|m| gram.w[m] * r[(m, m)]).sum();
        explained = (1.0 - resid_total / gram.total).clamp(0.0, 1.0);
        steps.push(Step {
            label: label(j, k),
            parts: (j, k),
            explained: 100.0 * explained,
            procrustes: gram.procrustes(&chosen),
        });
    }

    let warning = warn_unmet(&stop, &steps, status);
    Ok(StepTrace {
        direction: Direction::Forward,
        steps,
        start: None,
        candidates,
        status,
        warning,
    })
}

fn warn_unmet(stop: &StopRule, steps: &[Step], status: TraceStatus) -> Option<String> {
    if !stop.active() || status == TraceStatus::ThresholdsMet {
        return None;
    }
    let (e, p) = steps.last().map_or((0.0, 0.0), |s| (s.explained, s.procrustes));
    if stop.met(e, p) {
        return None;
    }
    Some(format!(
        "thresholds not reached: explained {e:.3}%, Procrustes {p:.4} after {} steps",
        steps.len()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackwardOptions {
    /// Thresholds not to cross; `max_steps` caps the eliminations.
    pub stop: StopRule,
    pub top: usize,
}

/// Backward elimination of ALRs with the given reference: starting from all
/// `D - 1` ALRs, drop at each step the one whose removal keeps the most
/// explained variance (ties: higher Procrustes correlation, then lower part
/// index), stopping before any active threshold would be crossed.
pub fn backward_alr(c: &CompositionMatrix, reference: usize, opts: &BackwardOptions) -> Result<StepTrace> {
    let d = c.nparts();
    if reference >= d {
        return Err(CodaError::IndexOutOfRange {
            what: "ALR reference",
            index: reference,
            len: d,
        });
    }
    let gram = ClrGram::new(c, "backward_alr")?;
    let names = c.part_names();
    let label = |j: usize| format!("{}/{}", names[j], names[reference]);
    let mut kept: Vec<usize> = (0..d).filter(|&j| j != reference).collect();
    let pairs_of = |set: &[usize]| set.iter().map(|&j| (j, reference)).collect::<Vec<_>>();
    let start = Step {
        label: "ALL".into(),
        parts: (reference, reference),
        explained: 100.0 * gram.explained(&pairs_of(&kept)),
        procrustes: gram.procrustes(&pairs_of(&kept)),
    };
    let mut steps: Vec<Step> = Vec::new();
    let mut candidates = Vec::new();
    let stop = opts.stop;
    let status;
    loop {
        if stop.max_steps.is_some_and(|m| steps.len() >= m) {
            status = TraceStatus::StepLimit;
            break;
        }
        if kept.len() <= 1 {
            status = TraceStatus::Exhausted;
            break;
        }
        let mut trials: Vec<Step> = kept
            .par_iter()
            .map(|&j| {
                let rest: Vec<usize> = kept.iter().cloned().filter(|&x| x != j).collect();
                let pairs = pairs_of(&rest);
                Step {
                    label: label(j),
                    parts: (j, reference),
                    explained: 100.0 * gram.explained(&pairs),
                    procrustes: gram.procrustes(&pairs),
                }
            })
            .collect();
        let tol = 100.0 * TIE_TOL;
        trials.sort_by(|a, b| {
            if (a.explained - b.explained).abs() <= tol {
                b.procrustes
                    .total_cmp(&a.procrustes)
                    .then(a.parts.0.cmp(&b.parts.0))
            } else {
                b.explained.total_cmp(&a.explained)
            }
        });
        let best = trials[0].clone();
        candidates.push(trials.into_iter().take(opts.top.max(1)).collect());
        if stop.active() && !stop.met(best.explained, best.procrustes) {
            status = TraceStatus::ThresholdsMet;
            break;
        }
        kept.retain(|&x| x != best.parts.0);
        steps.push(best);
    }
    Ok(StepTrace {
        direction: Direction::Backward,
        steps,
        start: Some(start),
        candidates,
        status,
        warning: None,
    })
}

/// The θ statistic for every pairwise logratio.
#[derive(Debug, Clone)]
pub struct ThetaTable {
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<String>,
    pub theta: Vec<f64>,
}

impl ThetaTable {
    /// Parts appearing in any logratio with θ at or below the cutoff.
    pub fn selected_parts(&self, cutoff: f64, nparts: usize) -> Vec<usize> {
        let mut used = vec![false; nparts];
        for (q, &(j, k)) in self.pairs.iter().enumerate() {
            if self.theta[q] <= cutoff {
                used[j] = true;
                used[k] = true;
            }
        }
        (0..nparts).filter(|&p| used[p]).collect()
    }

    pub fn count_at_most(&self, cutoff: f64) -> usize {
        self.theta.iter().filter(|&&t| t <= cutoff).count()
    }
}

fn group_codes_checked(c: &CompositionMatrix, op: &'static str) -> Result<(Vec<String>, Vec<usize>)> {
    let (levels, codes) = c.group_codes(op)?;
    if levels.len() < 2 {
        return Err(invalid(format!("{op} needs at least two groups")));
    }
    for (g, name) in levels.iter().enumerate() {
        let size = codes.iter().filter(|&&x| x == g).count();
        if size < 2 {
            return Err(CodaError::UndersizedGroup {
                group: name.clone(),
                size,
                min: 2,
            });
        }
    }
    Ok((levels, codes))
}

fn theta_values(logs: &DMatrix<f64>, codes: &[usize], ngroups: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    let n = logs.nrows();
    let mut sizes = vec![0.0; ngroups];
    for &g in codes {
        sizes[g] += 1.0;
    }
    pairs
        .par_iter()
        .map(|&(j, k)| {
            let mut gsum = vec![0.0; ngroups];
            let mut sum = 0.0;
            for i in 0..n {
                let v = logs[(i, j)] - logs[(i, k)];
                gsum[codes[i]] += v;
                sum += v;
            }
            let mean = sum / n as f64;
            let gmean: Vec<f64> = gsum.iter().zip(&sizes).map(|(s, n)| s / n).collect();
            let mut within = 0.0;
            let mut total = 0.0;
            for i in 0..n {
                let v = logs[(i, j)] - logs[(i, k)];
                within += (v - gmean[codes[i]]).powi(2);
                total += (v - mean).powi(2);
            }
            // relative guard: a constant logratio has no variance to split
            if total <= 1e-24 * (1.0 + sum.abs()) {
                1.0
            } else {
                (within / total).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// θ = within-group sum of squares / total sum of squares for each pairwise
/// logratio, using the composition's group labels.
pub fn theta_anova(c: &CompositionMatrix) -> Result<ThetaTable> {
    let (levels, codes) = group_codes_checked(c, "theta_anova")?;
    let logs = c.log_values("theta_anova")?;
    let d = c.nparts();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    let names = c.part_names();
    Ok(ThetaTable {
        labels: pairs
            .iter()
            .map(|&(j, k)| format!("{}/{}", names[j], names[k]))
            .collect(),
        theta: theta_values(&logs, &codes, levels.len(), &pairs),
        pairs,
    })
}

#[derive(Debug, Clone)]
pub struct FdrEstimate {
    pub cutoff: f64,
    pub observed: usize,
    pub mean_permuted: f64,
    pub fdr: f64,
    pub selected_parts: Vec<usize>,
    pub permutations: usize,
    pub seed: u64,
}

/// Plug-in FDR at `cutoff`: mean number of permuted-label θ values at or
/// below the cutoff over the observed number (at least 1). Permutation `p`
/// shuffles the labels with its own seeded stream.
pub fn permutation_fdr(c: &CompositionMatrix, cutoff: f64, permutations: usize, seed: u64) -> Result<FdrEstimate> {
    if permutations == 0 {
        return Err(invalid("at least one permutation is required"));
    }
    let table = theta_anova(c)?;
    let (levels, codes) = group_codes_checked(c, "permutation_fdr")?;
    let logs = c.log_values("permutation_fdr")?;
    let observed = table.count_at_most(cutoff);
    let counts: Vec<usize> = (0..permutations)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut perm = codes.clone();
            perm.shuffle(&mut rng);
            theta_values(&logs, &perm, levels.len(), &table.pairs)
                .into_iter()
                .filter(|&t| t <= cutoff)
                .count()
        })
        .collect();
    let mean_permuted = counts.iter().sum::<usize>() as f64 / permutations as f64;
    Ok(FdrEstimate {
        cutoff,
        observed,
        mean_permuted,
        fdr: mean_permuted / observed.max(1) as f64,
        selected_parts: table.selected_parts(cutoff, c.nparts()),
        permutations,
        seed,
    })
}
