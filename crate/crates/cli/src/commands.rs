use coda_core::cluster::{self, Dendrogram, KMeansOptions};
use coda_core::compmat::encode_labels;
use coda_core::diagnostics::{self, PartGeometry};
use coda_core::io::{fmt_num, read_table};
use coda_core::nalgebra::DMatrix;
use coda_core::ordination::{self, Ordination};
use coda_core::select::{self, BackwardOptions, Step, StepOptions, StepTrace, StopRule};
use coda_core::svg::{self, BiplotOptions};
use coda_core::transforms::{self, NamedSplit};
use coda_core::variance::{self, Divisor};
use coda_core::{CodaError, CompositionMatrix, ContrastTree, LogratioMatrix, RawCountMatrix, Weighting};
use serde_json::{json, Value};

use crate::args::*;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, nums, Run};

type Res<T> = Result<T, CliError>;

pub struct Data {
    pub raw: RawCountMatrix,
    pub comp: CompositionMatrix,
}

pub fn load(run: &mut Run, rc: &RunConfig) -> Res<Data> {
    run.record_input(&rc.input)?;
    let raw = read_table(&rc.input)?.into_raw()?;
    let mut comp = raw.close();
    if let Some(f) = rc.zero_replace {
        comp = comp.replace_zeros(f)?;
    }
    let scheme = match rc.weights {
        WeightArg::Uniform => Weighting::Uniform,
        WeightArg::ColumnMeans => Weighting::ColumnMeans,
    };
    comp = comp.set_weights(&scheme)?;
    run.lap("read");
    Ok(Data { raw, comp })
}

fn part(c: &CompositionMatrix, name: &str) -> Res<usize> {
    c.part_index(name)
        .ok_or_else(|| CodaError::InvalidArgument(format!("unknown part '{name}'")).into())
}

fn best_reference(c: &CompositionMatrix) -> Res<usize> {
    Ok(select::find_alr(c)?[0].part)
}

fn reference_or(c: &CompositionMatrix, name: &Option<String>, default: impl FnOnce() -> Res<usize>) -> Res<usize> {
    match name {
        Some(n) => part(c, n),
        None => default(),
    }
}

fn load_tree(c: &CompositionMatrix, source: &Option<String>) -> Res<ContrastTree> {
    let source = source
        .as_deref()
        .ok_or_else(|| CodaError::InvalidArgument("this transform needs --tree (ward or a JSON file)".into()))?;
    if source == "ward" {
        return Ok(cluster::ward_parts(c)?.to_contrast_tree()?);
    }
    let text = std::fs::read_to_string(source).map_err(|e| CliError::Io(format!("{source}: {e}")))?;
    let splits: Vec<NamedSplit> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
    Ok(ContrastTree::from_named(c.part_names(), &splits)?)
}

pub fn transform(run: &mut Run, d: &Data, a: &TransformArgs) -> Res<Value> {
    let c = &d.comp;
    let kind = a.kind.unwrap_or(KindArg::Clr);
    let mut tree_json = None;
    let (values, labels) = match kind {
        KindArg::BoxCox => {
            let alpha = a
                .alpha
                .ok_or_else(|| CodaError::InvalidArgument("box-cox needs --alpha".into()))?;
            (transforms::box_cox(c, alpha)?, c.part_names().to_vec())
        }
        _ => {
            let lm: LogratioMatrix = match kind {
                KindArg::Lr => transforms::lr_all(c)?,
                KindArg::Alr => {
                    let r = reference_or(c, &a.reference, || Ok(c.nparts() - 1))?;
                    transforms::alr(c, r)?
                }
                KindArg::Clr => transforms::clr(c)?,
                KindArg::Ilr | KindArg::Slr => {
                    let tree = load_tree(c, &a.tree)?;
                    tree_json = Some(serde_json::to_value(tree.to_named(c.part_names())).expect("splits serialize"));
                    if kind == KindArg::Ilr {
                        transforms::ilr(c, &tree)?
                    } else {
                        transforms::slr_tree(c, &tree)?
                    }
                }
                KindArg::Plr => {
                    let order = if a.order.is_empty() {
                        (0..c.nparts()).collect()
                    } else {
                        a.order.iter().map(|n| part(c, n)).collect::<Res<Vec<_>>>()?
                    };
                    transforms::plr(c, &order)?
                }
                KindArg::BoxCox => unreachable!(),
            };
            (lm.values, lm.column_labels)
        }
    };
    run.lap("compute");
    run.matrix(".csv", "id", c.row_ids(), &labels, &values)?;
    if let Some(t) = &tree_json {
        run.json("-tree.json", t)?;
    }
    Ok(json!({ "kind": kind, "columns": labels.len() }))
}

pub fn variance(run: &mut Run, d: &Data, a: &VarianceArgs) -> Res<Value> {
    let c = &d.comp;
    let divisor = if a.sample { Divisor::Sample } else { Divisor::Population };
    let tau = variance::variation_matrix_with(c, divisor)?;
    let total = variance::total_variance_from_tau(&tau, c.weights());
    let shares = variance::clr_variance_contributions(c)?;
    let ((j0, k0, lo), (j1, k1, hi)) = tau.extremes();
    run.lap("compute");
    let names = c.part_names();
    run.matrix("-variation.csv", "part", names, names, &tau.tau)?;
    let rows: Vec<Vec<String>> = (0..c.nparts())
        .map(|j| {
            vec![
                names[j].clone(),
                fmt_num(c.weights()[j]),
                fmt_num(shares[j] * total),
                fmt_num(100.0 * shares[j]),
            ]
        })
        .collect();
    run.csv("-contributions.csv", &["part", "weight", "contribution", "percent"], &rows)?;
    let summary = json!({
        "total_variance": num(total),
        "divisor": if a.sample { "n-1" } else { "n" },
        "smallest_lr_variance": { "ratio": format!("{}/{}", names[j0], names[k0]), "value": num(lo) },
        "largest_lr_variance": { "ratio": format!("{}/{}", names[j1], names[k1]), "value": num(hi) },
    });
    run.json(".json", &summary)?;
    Ok(summary)
}

fn dim_labels(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn pca_input(c: &CompositionMatrix, a: &OrdinateArgs) -> Res<LogratioMatrix> {
    Ok(match a.kind.unwrap_or(KindArg::Clr) {
        KindArg::Clr => transforms::clr(c)?,
        KindArg::Lr => transforms::lr_all(c)?,
        KindArg::Alr => transforms::alr(c, reference_or(c, &a.reference, || best_reference(c))?)?,
        k => {
            return Err(CodaError::InvalidArgument(format!(
                "pca supports --kind clr, lr or alr, not {k:?}"
            ))
            .into())
        }
    })
}

pub fn ordinate(run: &mut Run, d: &Data, a: &OrdinateArgs, seed: u64) -> Res<Value> {
    let c = &d.comp;
    let method = a.method.unwrap_or(OrdMethodArg::Lra);
    let o: Ordination = match method {
        OrdMethodArg::Lra => ordination::lra(c)?,
        OrdMethodArg::Pca => ordination::pca(&pca_input(c, a)?)?,
        OrdMethodArg::Ca => ordination::ca(c.values(), a.alpha, c.row_ids().to_vec(), c.part_names().to_vec())?,
    };
    let dims = match a.dims.as_slice() {
        [] => (0, 1),
        [x, y] if *x >= 1 && *y >= 1 => (x - 1, y - 1),
        _ => return Err(CliError::Config("--dims takes two one-based dimensions, e.g. 1,2".into())),
    };
    let window = match a.window.as_slice() {
        [] => None,
        [x0, x1, y0, y1] if x0 < x1 && y0 < y1 => Some([*x0, *x1, *y0, *y1]),
        _ => return Err(CliError::Config("--window takes xmin,xmax,ymin,ymax".into())),
    };
    let contributions = ordination::contribution_coordinates(&o);
    let ellipses = if a.ellipses {
        let groups = c.groups().ok_or(CodaError::MissingGroups("ordinate --ellipses"))?;
        Some(ordination::bootstrap_ellipses(
            &o,
            groups,
            a.replicates.unwrap_or(1000),
            a.level.unwrap_or(0.95),
            seed,
            dims,
        )?)
    } else {
        None
    };
    let supplementary = match &a.supplementary {
        Some(path) => {
            run.record_input(path)?;
            let t = read_table(path)?;
            if t.part_names != c.part_names() {
                return Err(CodaError::InvalidArgument("supplementary parts differ from the input".into()).into());
            }
            let ids = t.row_ids.clone();
            let rows = match method {
                OrdMethodArg::Pca => {
                    let sc = t.into_composition()?.set_weights(&Weighting::Explicit(c.weights().to_vec()))?;
                    pca_input(&sc, a)?.values
                }
                _ => t.values,
            };
            Some((ids, ordination::supplementary_rows(&o, &rows)?))
        }
        None => None,
    };
    run.lap("compute");

    let k = o.rank();
    run.matrix("-rows.csv", "id", &o.row_ids, &dim_labels("dim", k), &o.row_principal)?;
    let mut header = vec!["label".to_string(), "mass".to_string()];
    header.extend(dim_labels("principal", k));
    header.extend(dim_labels("standard", k));
    header.extend(dim_labels("contribution", k));
    let cc = &contributions.coordinates;
    let rows: Vec<Vec<String>> = (0..o.col_labels.len())
        .map(|j| {
            let mut r = vec![o.col_labels[j].clone(), fmt_num(o.col_masses[j])];
            r.extend((0..k).map(|t| fmt_num(o.col_principal[(j, t)])));
            r.extend((0..k).map(|t| fmt_num(o.col_standard[(j, t)])));
            r.extend((0..k).map(|t| fmt_num(cc[(j, t)])));
            r
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    run.csv("-columns.csv", &hdr, &rows)?;
    if let Some((ids, s)) = &supplementary {
        run.matrix("-supplementary.csv", "id", ids, &dim_labels("dim", s.ncols()), s)?;
    }
    if let Some(es) = &ellipses {
        let rows: Vec<Vec<String>> = es
            .ellipses
            .iter()
            .map(|e| {
                vec![
                    e.group.clone(),
                    e.size.to_string(),
                    fmt_num(e.center[0]),
                    fmt_num(e.center[1]),
                    fmt_num(e.semi_axes[0]),
                    fmt_num(e.semi_axes[1]),
                    fmt_num(e.angle),
                ]
            })
            .collect();
        run.csv("-ellipses.csv", &["group", "size", "center_x", "center_y", "major", "minor", "angle"], &rows)?;
    }
    let flagged: Vec<String> = (0..o.col_labels.len())
        .filter(|&j| contributions.flagged[j])
        .map(|j| o.col_labels[j].clone())
        .collect();
    let summary = json!({
        "method": method,
        "alpha": a.alpha,
        "rank": k,
        "total_inertia": num(o.total_inertia),
        "singular_values": nums(&o.singular_values),
        "explained_percent": Value::Array(o.explained_shares.iter().map(|s| num(100.0 * s)).collect()),
        "dims": [dims.0 + 1, dims.1 + 1],
        "high_contribution_columns": flagged,
    });
    run.json("-explained.json", &summary)?;
    if k >= 2 && dims.0 < k && dims.1 < k {
        let groups = c.groups();
        let plot = svg::biplot(
            &o,
            &BiplotOptions {
                dims,
                flagged: a.contribution.then_some(contributions.flagged.as_slice()),
                groups,
                ellipses: ellipses.as_ref(),
                window,
                contribution: a.contribution,
                column_scale: 1.0,
            },
        )?;
        run.text("-biplot.svg", &plot)?;
    } else {
        eprintln!("warning: rank {k} too low for the requested biplot; no SVG written");
    }
    Ok(summary)
}

pub fn findalr(run: &mut Run, d: &Data) -> Res<Value> {
    let refs = select::find_alr(&d.comp)?;
    run.lap("compute");
    let rows: Vec<Vec<String>> = refs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                r.name.clone(),
                fmt_num(r.procrustes),
                fmt_num(r.log_variance),
            ]
        })
        .collect();
    run.csv(".csv", &["rank", "part", "procrustes", "log_variance"], &rows)?;
    let best = &refs[0];
    Ok(json!({ "best": best.name, "procrustes": num(best.procrustes) }))
}

fn step_row(n: usize, s: &Step) -> Vec<String> {
    vec![
        n.to_string(),
        s.label.clone(),
        (s.parts.0 + 1).to_string(),
        (s.parts.1 + 1).to_string(),
        fmt_num(s.explained),
        fmt_num(s.procrustes),
    ]
}

const STEP_HEADER: [&str; 6] = ["step", "ratio", "row", "col", "R2cum", "Procr"];

fn write_trace(run: &mut Run, trace: &StepTrace, c: &CompositionMatrix) -> Res<Value> {
    let mut rows = Vec::new();
    if let Some(s) = &trace.start {
        rows.push(vec![
            "0".into(),
            s.label.clone(),
            String::new(),
            String::new(),
            fmt_num(s.explained),
            fmt_num(s.procrustes),
        ]);
    }
    rows.extend(trace.steps.iter().enumerate().map(|(i, s)| step_row(i + 1, s)));
    run.csv(".csv", &STEP_HEADER, &rows)?;
    let mut cand = Vec::new();
    for (i, list) in trace.candidates.iter().enumerate() {
        for (r, s) in list.iter().enumerate() {
            let mut row = step_row(i + 1, s);
            row.insert(1, (r + 1).to_string());
            cand.push(row);
        }
    }
    run.csv("-candidates.csv", &["step", "rank", "ratio", "row", "col", "R2cum", "Procr"], &cand)?;
    if let Some(w) = &trace.warning {
        eprintln!("warning: {w}");
    }
    let used: Vec<String> = trace
        .parts_used(c.nparts())
        .into_iter()
        .map(|p| c.part_names()[p].clone())
        .collect();
    let last = trace.steps.last().or(trace.start.as_ref());
    let summary = json!({
        "status": format!("{:?}", trace.status),
        "warning": trace.warning,
        "steps": trace.steps.len(),
        "explained_percent": last.map(|s| num(s.explained)),
        "procrustes": last.map(|s| num(s.procrustes)),
        "parts_used": used,
    });
    run.json(".json", &summary)?;
    Ok(summary)
}

pub fn step(run: &mut Run, d: &Data, a: &StepArgs) -> Res<Value> {
    let opts = StepOptions {
        stop: StopRule {
            min_explained: a.min_explained,
            min_procrustes: a.min_procrustes,
            max_steps: a.max_steps,
        },
        top: a.top.unwrap_or(20),
    };
    let trace = select::stepwise_lr(&d.comp, &opts)?;
    run.lap("compute");
    write_trace(run, &trace, &d.comp)
}

pub fn backstep(run: &mut Run, d: &Data, a: &BackstepArgs) -> Res<Value> {
    let c = &d.comp;
    let reference = reference_or(c, &a.reference, || best_reference(c))?;
    let opts = BackwardOptions {
        stop: StopRule {
            min_explained: a.min_explained,
            min_procrustes: a.min_procrustes,
            max_steps: a.max_steps,
        },
        top: a.top.unwrap_or(20),
    };
    let trace = select::backward_alr(c, reference, &opts)?;
    run.lap("compute");
    let mut summary = write_trace(run, &trace, c)?;
    summary["reference"] = json!(c.part_names()[reference]);
    Ok(summary)
}

pub fn theta(run: &mut Run, d: &Data, a: &ThetaArgs, seed: u64) -> Res<Value> {
    let c = &d.comp;
    let cutoff = a.cutoff.unwrap_or(0.1);
    let table = select::theta_anova(c)?;
    let fdr = select::permutation_fdr(c, cutoff, a.permutations.unwrap_or(100), seed)?;
    run.lap("compute");
    let mut order: Vec<usize> = (0..table.theta.len()).collect();
    order.sort_by(|&x, &y| table.theta[x].total_cmp(&table.theta[y]).then(x.cmp(&y)));
    let rows: Vec<Vec<String>> = order
        .iter()
        .map(|&q| {
            let (j, k) = table.pairs[q];
            vec![
                table.labels[q].clone(),
                (j + 1).to_string(),
                (k + 1).to_string(),
                fmt_num(table.theta[q]),
            ]
        })
        .collect();
    run.csv(".csv", &["ratio", "row", "col", "theta"], &rows)?;
    let parts: Vec<String> = fdr.selected_parts.iter().map(|&p| c.part_names()[p].clone()).collect();
    let summary = json!({
        "cutoff": num(fdr.cutoff),
        "observed": fdr.observed,
        "mean_permuted": num(fdr.mean_permuted),
        "fdr": num(fdr.fdr),
        "permutations": fdr.permutations,
        "seed": fdr.seed,
        "selected_parts": parts,
    });
    run.json(".json", &summary)?;
    Ok(summary)
}

fn write_dendrogram(run: &mut Run, den: &Dendrogram) -> Res<Value> {
    let v = serde_json::to_value(den).expect("dendrogram serializes");
    run.json("-dendrogram.json", &v)?;
    run.text("-dendrogram.svg", &svg::dendrogram(den))?;
    Ok(json!({ "leaves": den.nleaves(), "merges": den.merges.len() }))
}

fn space_features(c: &CompositionMatrix, space: SpaceArg, a: &ClusterArgs) -> Res<DMatrix<f64>> {
    Ok(match space {
        SpaceArg::Clr => ordination::lra(c)?.row_principal,
        SpaceArg::Alr => {
            let r = reference_or(c, &a.reference, || best_reference(c))?;
            ordination::pca(&transforms::alr(c, r)?)?.row_principal
        }
        SpaceArg::Ca => {
            ordination::ca(c.values(), a.alpha, c.row_ids().to_vec(), c.part_names().to_vec())?.row_principal
        }
    })
}

pub fn cluster(run: &mut Run, d: &Data, a: &ClusterArgs, seed: u64) -> Res<Value> {
    let c = &d.comp;
    match a.method.unwrap_or(ClusterMethodArg::Ward) {
        ClusterMethodArg::Ward => {
            let den = cluster::ward_parts(c)?;
            run.lap("compute");
            write_dendrogram(run, &den)
        }
        ClusterMethodArg::Amalg => {
            let den = cluster::amalgamation_cluster(c)?;
            run.lap("compute");
            write_dendrogram(run, &den)
        }
        ClusterMethodArg::Kmeans => {
            let k = a.k.unwrap_or(3);
            let opts = KMeansOptions {
                restarts: a.restarts.unwrap_or(10),
                max_iter: a.max_iter.unwrap_or(300),
                seed,
            };
            let space = a.space.unwrap_or(SpaceArg::Clr);
            let first = cluster::kmeans(&space_features(c, space, a)?, k, &opts)?;
            let second = match a.compare {
                Some(s) => Some((s, cluster::kmeans(&space_features(c, s, a)?, k, &opts)?)),
                None => None,
            };
            let group_ari = match c.groups() {
                Some(g) => Some(cluster::adjusted_rand(&first.labels, &encode_labels(g).1)?),
                None => None,
            };
            let comparison = match &second {
                Some((s, b)) => Some(json!({
                    "space": s,
                    "ari": num(cluster::adjusted_rand(&first.labels, &b.labels)?),
                    "agreement": num(cluster::matched_agreement(&first.labels, &b.labels)?),
                    "inertia": num(b.inertia),
                })),
                None => None,
            };
            run.lap("compute");
            let mut header = vec!["id".to_string(), format!("{space:?}").to_lowercase()];
            if let Some((s, _)) = &second {
                header.push(format!("{s:?}").to_lowercase());
            }
            let rows: Vec<Vec<String>> = (0..c.nrows())
                .map(|i| {
                    let mut r = vec![c.row_ids()[i].clone(), (first.labels[i] + 1).to_string()];
                    if let Some((_, b)) = &second {
                        r.push((b.labels[i] + 1).to_string());
                    }
                    r
                })
                .collect();
            let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
            run.csv("-assignments.csv", &hdr, &rows)?;
            let summary = json!({
                "k": k,
                "space": space,
                "inertia": num(first.inertia),
                "restarts": opts.restarts,
                "seed": seed,
                "comparison": comparison,
                "ari_vs_groups": group_ari.map(num),
            });
            run.json(".json", &summary)?;
            Ok(summary)
        }
    }
}

pub fn diagnose(run: &mut Run, d: &Data, a: &DiagnoseArgs, seed: u64) -> Res<Value> {
    let c = &d.comp;
    match a.mode.unwrap_or(DiagnoseMode::Coherence) {
        DiagnoseMode::Coherence => {
            let geometry = match a.geometry.unwrap_or(GeometryArg::ChiSquare) {
                GeometryArg::ChiSquare => PartGeometry::ChiSquare,
                GeometryArg::ChiSquarePower => PartGeometry::ChiSquarePower(a.power.unwrap_or(0.5)),
                GeometryArg::Logratio => PartGeometry::Logratio,
            };
            let sizes = if a.sizes.is_empty() {
                (2..c.nparts().max(3)).collect()
            } else {
                a.sizes.clone()
            };
            let report = diagnostics::coherence_sweep(c, geometry, &sizes, a.reps.unwrap_or(100), seed)?;
            run.lap("compute");
            let rows: Vec<Vec<String>> = report
                .sizes
                .iter()
                .map(|z| {
                    vec![
                        z.size.to_string(),
                        z.correlations.len().to_string(),
                        z.resamples.to_string(),
                        fmt_num(z.median),
                        fmt_num(z.lower),
                        fmt_num(z.upper),
                        z.above_0999.to_string(),
                    ]
                })
                .collect();
            run.csv(".csv", &["size", "draws", "resamples", "median", "lower", "upper", "above_0999"], &rows)?;
            let draws: Vec<Vec<String>> = report
                .sizes
                .iter()
                .flat_map(|z| {
                    z.correlations
                        .iter()
                        .enumerate()
                        .map(move |(r, v)| vec![z.size.to_string(), (r + 1).to_string(), fmt_num(*v)])
                })
                .collect();
            run.csv("-draws.csv", &["size", "draw", "procrustes"], &draws)?;
            run.text(".svg", &svg::coherence_plot(&report))?;
            Ok(json!({ "geometry": format!("{geometry:?}"), "sizes": sizes, "seed": seed }))
        }
        DiagnoseMode::Alphasweep => {
            let alphas = if a.alphas.is_empty() {
                vec![1.0, 0.75, 0.5, 0.25, 0.1, 0.05, 0.01, 0.001]
            } else {
                a.alphas.clone()
            };
            let curve = diagnostics::alpha_sweep(c, &alphas, !a.keep_zeros)?;
            run.lap("compute");
            let rows: Vec<Vec<String>> = curve
                .alphas
                .iter()
                .zip(&curve.correlations)
                .map(|(x, y)| vec![fmt_num(*x), fmt_num(*y)])
                .collect();
            run.csv(".csv", &["alpha", "procrustes"], &rows)?;
            run.text(
                ".svg",
                &svg::curve_plot("CA versus LRA", "alpha", "Procrustes correlation", &curve.alphas, &curve.correlations)?,
            )?;
            let peak = curve.peak();
            let summary = json!({
                "zeros_replaced": curve.zeros_replaced,
                "peak_alpha": peak.map(|p| num(p.0)),
                "peak_procrustes": peak.map(|p| num(p.1)),
            });
            run.json(".json", &summary)?;
            Ok(summary)
        }
        DiagnoseMode::Dilution => {
            let raw = d.raw.values();
            let counts: Vec<f64> = (0..raw.ncols()).map(|j| raw.column(j).sum()).collect();
            let positive = counts.iter().filter(|&&x| x > 0.0).count();
            let sizes = if a.sizes.is_empty() {
                (2..=positive.max(2)).collect()
            } else {
                a.sizes.clone()
            };
            let curve = diagnostics::dilution_curve(&counts, &sizes)?;
            run.lap("compute");
            let rows: Vec<Vec<String>> = curve
                .iter()
                .map(|(s, r)| vec![s.to_string(), fmt_num(*r)])
                .collect();
            run.csv(".csv", &["size", "correlation"], &rows)?;
            let x: Vec<f64> = curve.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = curve.iter().map(|p| p.1).collect();
            run.text(".svg", &svg::curve_plot("Dilution of a proportion correlation", "number of parts", "correlation", &x, &y)?)?;
            Ok(json!({ "sizes": sizes }))
        }
    }
}

pub fn shrink(run: &mut Run, d: &Data) -> Res<Value> {
    let raw = d.raw.values();
    let (n, p) = raw.shape();
    let mut out = DMatrix::zeros(n, p);
    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = raw.row(i).iter().copied().collect();
        let s = diagnostics::shrink_estimate(&row).map_err(|e| match e {
            CodaError::ZeroRowTotal { .. } => CodaError::ZeroRowTotal {
                row: d.raw.row_ids()[i].clone(),
            },
            e => e,
        })?;
        for j in 0..p {
            out[(i, j)] = s.values[j];
        }
        lambdas.push(s.lambda);
    }
    run.lap("compute");
    run.matrix(".csv", "id", d.raw.row_ids(), d.raw.part_names(), &out)?;
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                d.raw.row_ids()[i].clone(),
                fmt_num(raw.row(i).sum()),
                fmt_num(lambdas[i]),
            ]
        })
        .collect();
    run.csv("-lambda.csv", &["id", "total", "lambda"], &rows)?;
    Ok(json!({ "rows": n }))
}
