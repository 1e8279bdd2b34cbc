use coda_core::cluster;
use coda_core::compmat::Partition;
use coda_core::diagnostics::{self, PartGeometry};
use coda_core::geometry::{self, Axis};
use coda_core::nalgebra::DMatrix;
use coda_core::ordination;
use coda_core::select::{self, BackwardOptions, StepOptions, StopRule};
use coda_core::transforms;
use coda_core::variance;
use coda_core::{CompositionMatrix, ContrastTree, RawCountMatrix, Weighting};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raw_strategy(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    (rows, cols).prop_flat_map(|(n, d)| {
        prop::collection::vec(0.05f64..20.0, n * d).prop_map(move |v| DMatrix::from_row_slice(n, d, &v))
    })
}

fn comp(m: &DMatrix<f64>) -> CompositionMatrix {
    RawCountMatrix::from_matrix(m.clone()).unwrap().close()
}

fn scale_rows(m: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: Vec<f64> = (0..m.nrows()).map(|_| rng.random_range(0.01..100.0)).collect();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * q[i])
}

fn random_tree(d: usize, seed: u64) -> ContrastTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: Vec<usize> = (0..d).collect();
    parts.shuffle(&mut rng);
    let mut splits = Vec::new();
    let mut stack = vec![parts];
    while let Some(block) = stack.pop() {
        if block.len() < 2 {
            continue;
        }
        let cut = rng.random_range(1..block.len());
        splits.push((block[..cut].to_vec(), block[cut..].to_vec()));
        stack.push(block[cut..].to_vec());
        stack.push(block[..cut].to_vec());
    }
    ContrastTree::new(d, splits).unwrap()
}

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn rotation(k: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn closure_is_idempotent_and_scale_invariant(m in raw_strategy(2..12, 2..8), seed in any::<u64>()) {
        let c = comp(&m);
        let again = comp(c.values());
        prop_assert!(max_diff(c.values(), again.values()) <= 1e-14);
        let scaled = comp(&scale_rows(&m, seed));
        prop_assert!(max_diff(c.values(), scaled.values()) <= 1e-14);
    }

    #[test]
    fn nested_subcompositions(m in raw_strategy(2..10, 4..9), seed in any::<u64>()) {
        let c = comp(&m);
        let d = c.nparts();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<usize> = (0..d).collect();
        a.shuffle(&mut rng);
        a.truncate(rng.random_range(3..=d));
        a.sort_unstable();
        let mut pos: Vec<usize> = (0..a.len()).collect();
        pos.shuffle(&mut rng);
        pos.truncate(rng.random_range(2..=a.len()));
        pos.sort_unstable();
        let b: Vec<usize> = pos.iter().map(|&p| a[p]).collect();
        let nested = c.subcomposition(&a).unwrap().subcomposition(&pos).unwrap();
        let direct = c.subcomposition(&b).unwrap();
        prop_assert!(max_diff(nested.values(), direct.values()) <= 1e-14);
        prop_assert_eq!(nested.part_names(), direct.part_names());
    }

    #[test]
    fn singleton_amalgamation_is_identity(m in raw_strategy(2..10, 2..8)) {
        let c = comp(&m);
        let a = c.amalgamate(&Partition::singletons(c.nparts())).unwrap();
        prop_assert!(max_diff(c.values(), a.values()) <= 1e-15);
        prop_assert_eq!(c.part_names(), a.part_names());
    }

    #[test]
    fn zero_replacement_keeps_positive_ratios(m in raw_strategy(3..10, 3..7), seed in any::<u64>(), frac in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = m.clone();
        for i in 0..z.nrows() {
            // at most one zero per row, never a whole column
            if i % 2 == 0 {
                let j = rng.random_range(0..z.ncols());
                z[(i, j)] = 0.0;
            }
        }
        let c = comp(&z);
        let r = c.replace_zeros(frac).unwrap();
        prop_assert_eq!(r.zero_count(), 0);
        for i in 0..c.nrows() {
            let pos: Vec<usize> = (0..c.nparts()).filter(|&j| c.values()[(i, j)] > 0.0).collect();
            for w in pos.windows(2) {
                let before = c.values()[(i, w[0])] / c.values()[(i, w[1])];
                let after = r.values()[(i, w[0])] / r.values()[(i, w[1])];
                prop_assert!((before / after - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn transforms_are_scale_invariant(m in raw_strategy(3..10, 3..8), seed in any::<u64>()) {
        let (c, s) = (comp(&m), comp(&scale_rows(&m, seed)));
        let d = c.nparts();
        let tree = random_tree(d, seed);
        let order: Vec<usize> = (0..d).rev().collect();
        let pairs = [
            (transforms::clr(&c).unwrap().values, transforms::clr(&s).unwrap().values),
            (transforms::lr_all(&c).unwrap().values, transforms::lr_all(&s).unwrap().values),
            (transforms::alr(&c, 0).unwrap().values, transforms::alr(&s, 0).unwrap().values),
            (transforms::ilr(&c, &tree).unwrap().values, transforms::ilr(&s, &tree).unwrap().values),
            (transforms::plr(&c, &order).unwrap().values, transforms::plr(&s, &order).unwrap().values),
            (transforms::slr_tree(&c, &tree).unwrap().values, transforms::slr_tree(&s, &tree).unwrap().values),
        ];
        for (a, b) in &pairs {
            prop_assert!(max_diff(a, b) <= 1e-10);
        }
    }

    #[test]
    fn clr_rows_sum_to_zero_and_lr_are_differences(m in raw_strategy(2..10, 2..8), weighted in any::<bool>()) {
        let mut c = comp(&m);
        if weighted {
            c = c.set_weights(&Weighting::ColumnMeans).unwrap();
        }
        let clr = transforms::clr(&c).unwrap();
        for i in 0..c.nrows() {
            let s: f64 = (0..c.nparts()).map(|j| c.weights()[j] * clr.values[(i, j)]).sum();
            prop_assert!(s.abs() <= 1e-12);
        }
        let lr = transforms::lr_all(&c).unwrap();
        let pairs = lr.pairs.clone().unwrap();
        for (q, &(j, k)) in pairs.iter().enumerate() {
            for i in 0..c.nrows() {
                let diff = clr.values[(i, j)] - clr.values[(i, k)];
                prop_assert!((diff - lr.values[(i, q)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn ilr_contrast_is_orthonormal(d in 2usize..12, seed in any::<u64>()) {
        let v = random_tree(d, seed).contrast();
        prop_assert!(max_diff(&(&v * v.transpose()), &DMatrix::identity(d - 1, d - 1)) <= 1e-10);
    }

    #[test]
    fn plr_equals_pivot_ilr(m in raw_strategy(2..10, 2..8), seed in any::<u64>()) {
        let c = comp(&m);
        let mut order: Vec<usize> = (0..c.nparts()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let plr = transforms::plr(&c, &order).unwrap();
        let ilr = transforms::ilr(&c, &ContrastTree::pivot(&order).unwrap()).unwrap();
        prop_assert!(max_diff(&plr.values, &ilr.values) <= 1e-12);
    }

    #[test]
    fn singleton_slr_is_lr(m in raw_strategy(2..10, 2..7)) {
        let c = comp(&m);
        let lr = transforms::lr_all(&c).unwrap();
        for (q, &(j, k)) in lr.pairs.clone().unwrap().iter().enumerate() {
            let s = transforms::slr(&c, &[j], &[k]).unwrap();
            for i in 0..c.nrows() {
                prop_assert!((s[i] - lr.values[(i, q)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn variation_matrix_structure_and_coherence(m in raw_strategy(2..12, 3..8), seed in any::<u64>()) {
        let c = comp(&m);
        let t = variance::variation_matrix(&c).unwrap();
        let d = c.nparts();
        for j in 0..d {
            prop_assert_eq!(t.tau[(j, j)], 0.0);
            for k in 0..d {
                prop_assert!(t.tau[(j, k)] >= 0.0);
                prop_assert!((t.tau[(j, k)] - t.tau[(k, j)]).abs() <= 1e-15);
            }
        }
        let mut parts: Vec<usize> = (0..d).collect();
        parts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        parts.truncate(2.max(d - 1));
        parts.sort_unstable();
        let ts = variance::variation_matrix(&c.subcomposition(&parts).unwrap()).unwrap();
        for (a, &j) in parts.iter().enumerate() {
            for (b, &k) in parts.iter().enumerate() {
                prop_assert!((ts.tau[(a, b)] - t.tau[(j, k)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lr_covariance_reversal(m in raw_strategy(3..12, 3..7), j in 0usize..3, k in 0usize..3, u in 0usize..3, v in 0usize..3) {
        prop_assume!(j != k && u != v);
        let t = variance::variation_matrix(&comp(&m)).unwrap();
        let a = variance::lr_covariance(&t, j, k, u, v).unwrap();
        let b = variance::lr_covariance(&t, k, j, u, v).unwrap();
        prop_assert!((a + b).abs() <= 1e-12);
    }

    #[test]
    fn proportional_parts_amalgamate_without_loss(m in raw_strategy(3..12, 3..7), lambda in 0.1f64..10.0) {
        let mut x = m.clone();
        let d = x.ncols();
        for i in 0..x.nrows() {
            x[(i, d - 1)] = lambda * x[(i, 0)];
        }
        let c = comp(&x).set_weights(&Weighting::ColumnMeans).unwrap();
        let before = variance::total_variance(&c).unwrap();
        let mut blocks: Vec<Vec<usize>> = vec![vec![0, d - 1]];
        blocks.extend((1..d - 1).map(|j| vec![j]));
        let a = c.amalgamate(&Partition::new(blocks).unwrap()).unwrap();
        let after = variance::total_variance(&a).unwrap();
        prop_assert!((before - after).abs() <= 1e-10, "{} vs {}", before, after);
    }

    #[test]
    fn procrustes_symmetry_and_invariance(x in raw_strategy(3..12, 2..5), seed in any::<u64>(), s in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(x.nrows(), x.ncols(), |_, _| rng.random_range(-1.0..1.0));
        let r = geometry::procrustes_correlation(&x, &y).unwrap();
        prop_assert!((geometry::procrustes_correlation(&x, &x).unwrap() - 1.0).abs() <= 1e-10);
        prop_assert!((r - geometry::procrustes_correlation(&y, &x).unwrap()).abs() <= 1e-10);
        let q = rotation(y.ncols(), seed ^ 1);
        let shift = DMatrix::from_fn(y.nrows(), y.ncols(), |_, j| j as f64 * 3.0 - 1.0);
        let moved = (&y * q) * s + shift;
        prop_assert!((r - geometry::procrustes_correlation(&x, &moved).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn alr_distances_bound_clr_distances(m in raw_strategy(2..12, 3..8), reference in 0usize..3) {
        let c = comp(&m);
        let alr = geometry::lm_distances(&transforms::alr(&c, reference).unwrap()).unwrap();
        let clr = geometry::logratio_distances(&c).unwrap();
        for i in 0..c.nrows() {
            for j in 0..c.nrows() {
                prop_assert!(alr.values[(i, j)] <= clr.values[(i, j)] + 1e-12);
            }
        }
    }

    #[test]
    fn chi_square_rows_invariant_to_row_scaling_of_compositions(m in raw_strategy(2..10, 2..7), seed in any::<u64>()) {
        let a = comp(&m);
        let b = comp(&scale_rows(&m, seed));
        let da = geometry::chi_square_distances(a.values(), Axis::Rows, a.row_ids().to_vec()).unwrap();
        let db = geometry::chi_square_distances(b.values(), Axis::Rows, b.row_ids().to_vec()).unwrap();
        prop_assert!(max_diff(&da.values, &db.values) <= 1e-12);
        let g = geometry::chi_square_distances(&(m.clone() * 7.5), Axis::Rows, a.row_ids().to_vec()).unwrap();
        let h = geometry::chi_square_distances(&m, Axis::Rows, a.row_ids().to_vec()).unwrap();
        prop_assert!(max_diff(&g.values, &h.values) <= 1e-12);
    }

    #[test]
    fn distances_are_metrics(m in raw_strategy(3..10, 2..6)) {
        let c = comp(&m);
        for dm in [
            geometry::logratio_distances(&c).unwrap(),
            geometry::hellinger_distances(&c).unwrap(),
            geometry::chi_square_distances(c.values(), Axis::Rows, c.row_ids().to_vec()).unwrap(),
        ] {
            let v = &dm.values;
            let n = v.nrows();
            for i in 0..n {
                prop_assert_eq!(v[(i, i)], 0.0);
                for j in 0..n {
                    prop_assert!((v[(i, j)] - v[(j, i)]).abs() <= 1e-12);
                    for k in 0..n {
                        prop_assert!(v[(i, k)] <= v[(i, j)] + v[(j, k)] + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lr_distances_over_common_pairs_have_zero_stress(m in raw_strategy(3..10, 4..8)) {
        // logratios are coherent: the retained pairs give the same distances
        let c = comp(&m);
        let lr = transforms::lr_all(&c).unwrap();
        let pairs = lr.pairs.clone().unwrap();
        let keep: Vec<usize> = (0..pairs.len()).filter(|&q| pairs[q].0 < 3 && pairs[q].1 < 3).collect();
        let sub = transforms::lr_all(&c.subcomposition(&[0, 1, 2]).unwrap()).unwrap();
        let full_cols = lr.select_columns(&keep).unwrap();
        let unit = |mut l: coda_core::LogratioMatrix| { l.weights = vec![1.0; l.ncols()]; l };
        let d_sub = geometry::lm_distances(&unit(sub)).unwrap();
        let d_full = geometry::lm_distances(&unit(full_cols)).unwrap();
        prop_assert!(geometry::stress(&d_sub, &d_full).unwrap() <= 1e-10);
    }

    #[test]
    fn lra_matches_clr_pca_and_coordinates_are_consistent(m in raw_strategy(4..14, 3..7)) {
        let c = comp(&m);
        let lra = ordination::lra(&c).unwrap();
        let pca = ordination::pca(&transforms::clr(&c).unwrap()).unwrap();
        prop_assert_eq!(lra.rank(), pca.rank());
        for a in 0..lra.rank() {
            let (x, y) = (lra.row_principal.column(a), pca.row_principal.column(a));
            let same = (x - y).abs().max();
            let flipped = (x + y).abs().max();
            prop_assert!(same.min(flipped) <= 1e-10);
        }
        for o in [&lra, &pca] {
            for a in 0..o.rank() {
                let s = o.singular_values[a];
                prop_assert!((o.row_principal.column(a) - o.row_standard.column(a) * s).abs().max() <= 1e-10);
                prop_assert!((o.col_principal.column(a) - o.col_standard.column(a) * s).abs().max() <= 1e-10);
            }
        }
    }

    #[test]
    fn supplementary_active_rows_reproduce_coordinates(m in raw_strategy(4..12, 3..7), alpha in 0.2f64..1.0) {
        let c = comp(&m);
        let lra = ordination::lra(&c).unwrap();
        prop_assert!(max_diff(&ordination::supplementary_rows(&lra, c.values()).unwrap(), &lra.row_principal) <= 1e-10);
        let lm = transforms::alr(&c, 0).unwrap();
        let pca = ordination::pca(&lm).unwrap();
        prop_assert!(max_diff(&ordination::supplementary_rows(&pca, &lm.values).unwrap(), &pca.row_principal) <= 1e-10);
        let ca = ordination::ca(&m, Some(alpha), c.row_ids().to_vec(), c.part_names().to_vec()).unwrap();
        prop_assert!(max_diff(&ordination::supplementary_rows(&ca, &m).unwrap(), &ca.row_principal) <= 1e-10);
    }

    #[test]
    fn stepwise_trace_properties(m in raw_strategy(6..14, 3..7)) {
        let c = comp(&m);
        let d = c.nparts();
        let trace = select::stepwise_lr(&c, &StepOptions { top: 3, ..Default::default() }).unwrap();
        prop_assert_eq!(trace.steps.len(), d - 1);
        prop_assert!(trace.steps.windows(2).all(|w| w[1].explained >= w[0].explained));
        prop_assert!((trace.steps.last().unwrap().explained - 100.0).abs() <= 1e-8);
        let mut labels: Vec<&str> = trace.steps.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        prop_assert_eq!(labels.len(), d - 1);
        // D-1 independent logratios over D parts with no cycle form a spanning tree
        let mut root: Vec<usize> = (0..d).collect();
        fn find(r: &mut Vec<usize>, x: usize) -> usize {
            if r[x] != x { let p = r[x]; r[x] = find(r, p); }
            r[x]
        }
        for s in &trace.steps {
            let (a, b) = (find(&mut root, s.parts.0), find(&mut root, s.parts.1));
            prop_assert!(a != b, "cycle through {}", s.label);
            root[a] = b;
        }
    }

    #[test]
    fn backward_trace_is_nonincreasing(m in raw_strategy(6..14, 3..8), reference in 0usize..3) {
        let c = comp(&m);
        let trace = select::backward_alr(&c, reference, &BackwardOptions { stop: StopRule::default(), top: 1 }).unwrap();
        let start = trace.start.clone().unwrap();
        prop_assert!((start.explained - 100.0).abs() <= 1e-8);
        let mut prev = start.explained;
        for s in &trace.steps {
            prop_assert!(s.explained <= prev + 1e-9);
            prev = s.explained;
        }
    }

    #[test]
    fn find_alr_values_at_most_one(m in raw_strategy(4..12, 3..8)) {
        let refs = select::find_alr(&comp(&m)).unwrap();
        prop_assert!(refs.iter().all(|r| r.procrustes <= 1.0 && r.procrustes > 0.0));
        prop_assert!(refs.windows(2).all(|w| w[0].procrustes >= w[1].procrustes));
    }

    #[test]
    fn theta_invariances(m in raw_strategy(6..15, 4..7), seed in any::<u64>()) {
        let groups: Vec<String> = (0..m.nrows()).map(|i| format!("g{}", i % 3)).collect();
        let c = comp(&m).with_groups(Some(groups.clone())).unwrap();
        let s = comp(&scale_rows(&m, seed)).with_groups(Some(groups)).unwrap();
        let (tc, ts) = (select::theta_anova(&c).unwrap(), select::theta_anova(&s).unwrap());
        for q in 0..tc.theta.len() {
            prop_assert!((tc.theta[q] - ts.theta[q]).abs() <= 1e-10);
            prop_assert!((0.0..=1.0).contains(&tc.theta[q]));
        }
        let sub = select::theta_anova(&c.subcomposition(&[0, 1, 2]).unwrap()).unwrap();
        for (q, &(j, k)) in sub.pairs.iter().enumerate() {
            let p = tc.pairs.iter().position(|&x| x == (j, k)).unwrap();
            prop_assert!((sub.theta[q] - tc.theta[p]).abs() <= 1e-10);
        }
    }

    #[test]
    fn ward_is_invariant_to_part_order(m in raw_strategy(4..12, 3..8), seed in any::<u64>()) {
        let c = comp(&m);
        let d = c.nparts();
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = c.subcomposition(&perm).unwrap();
        let clusters = |den: &coda_core::cluster::Dendrogram| {
            let mut v: Vec<(Vec<String>, i64)> = (0..den.merges.len())
                .map(|i| {
                    let mut names: Vec<String> = den.leaves(d + i).into_iter().map(|l| den.leaf_names[l].clone()).collect();
                    names.sort();
                    (names, (den.merges[i].height * 1e9).round() as i64)
                })
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(clusters(&cluster::ward_parts(&c).unwrap()), clusters(&cluster::ward_parts(&p).unwrap()));
    }

    #[test]
    fn ari_symmetric_and_label_invariant(seed in any::<u64>(), n in 5usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let perm = [3usize, 1, 0, 2];
        let pa: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        let ab = cluster::adjusted_rand(&a, &b).unwrap();
        prop_assert!((ab - cluster::adjusted_rand(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((ab - cluster::adjusted_rand(&pa, &b).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn kmeans_inertia_nonincreasing(m in raw_strategy(8..30, 2..4), seed in any::<u64>(), k in 2usize..4) {
        let res = cluster::kmeans(&m, k, &cluster::KMeansOptions { restarts: 3, max_iter: 100, seed }).unwrap();
        prop_assert!(res.trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let mut used = vec![false; k];
        res.labels.iter().for_each(|&l| used[l] = true);
        prop_assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn shrinkage_output_closed(counts in prop::collection::vec(0u32..40, 2..12)) {
        let x: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        prop_assume!(x.iter().sum::<f64>() > 0.0);
        let s = diagnostics::shrink_estimate(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.lambda));
        prop_assert!((s.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        if s.lambda > 0.0 {
            prop_assert!(s.values.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn multinomial_correlation_symmetric_negative(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        prop_assume!(a + b < 1.0);
        let r = diagnostics::multinomial_correlation(a, b).unwrap();
        prop_assert!((-1.0..0.0).contains(&r));
        prop_assert_eq!(r, diagnostics::multinomial_correlation(b, a).unwrap());
    }

    #[test]
    fn logratio_coherence_is_exact(m in raw_strategy(6..15, 4..8), seed in any::<u64>()) {
        let c = comp(&m);
        let sizes: Vec<usize> = (2..=c.nparts()).collect();
        let r = diagnostics::coherence_sweep(&c, PartGeometry::Logratio, &sizes, 4, seed).unwrap();
        for s in &r.sizes {
            prop_assert!(s.lower <= s.median && s.median <= s.upper);
            for q in &s.correlations {
                prop_assert!((q - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn alpha_sweep_converges_on_positive_data(m in raw_strategy(6..20, 3..8)) {
        let curve = diagnostics::alpha_sweep(&comp(&m), &[0.001], true).unwrap();
        prop_assert!((curve.correlations[0] - 1.0).abs() <= 0.01);
    }
}
