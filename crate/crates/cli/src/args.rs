//! Command-line definitions. Every field is optional so that a JSON config
//! file can supply it; flags given on the command line take precedence.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "coda", version, about = "Compositional data analysis in batch")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a logratio or power transform of the input to CSV.
    Transform(Run<TransformArgs>),
    /// Total variance, per-part contributions and the variation matrix.
    Variance(Run<VarianceArgs>),
    /// LRA, logratio PCA or correspondence analysis, with a biplot.
    Ordinate(Run<OrdinateArgs>),
    /// Rank every part as an ALR reference.
    Findalr(Run<FindalrArgs>),
    /// Forward stepwise selection of pairwise logratios.
    Step(Run<StepArgs>),
    /// Backward elimination of ALRs with a fixed reference.
    Backstep(Run<BackstepArgs>),
    /// Group-discriminating logratios with a permutation FDR estimate.
    Theta(Run<ThetaArgs>),
    /// Cluster parts (ward, amalg) or samples (kmeans).
    Cluster(Run<ClusterArgs>),
    /// Subcompositional coherence, alpha sweep or dilution curves.
    Diagnose(Run<DiagnoseArgs>),
    /// Shrinkage estimates of count proportions, row by row.
    Shrink(Run<ShrinkArgs>),
}

#[derive(Debug, Args)]
pub struct Run<T: Args> {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub params: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    Uniform,
    ColumnMeans,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// Input CSV (first column ids, optional `group` column).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON config file; its keys are the long flag names in snake case.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $CODA_OUTPUT_DIR, else the working directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Part weights.
    #[arg(long, value_enum)]
    pub weights: Option<WeightArg>,
    /// Zero replacement: `off`, or the fraction of each part's smallest
    /// positive value to substitute.
    #[arg(long)]
    pub zero_replace: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Lr,
    Alr,
    Clr,
    Ilr,
    Plr,
    Slr,
    BoxCox,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// ALR reference part (name); defaults to the last part.
    #[arg(long)]
    pub reference: Option<String>,
    /// ILR/SLR tree: `ward`, or a JSON file of {"numerator": [...], "denominator": [...]} splits.
    #[arg(long)]
    pub tree: Option<String>,
    /// PLR pivot order, comma separated part names.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<String>,
    /// Box-Cox power.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceArgs {
    /// Use divisor N-1 instead of N.
    #[arg(long)]
    pub sample: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrdMethodArg {
    Lra,
    Pca,
    Ca,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrdinateArgs {
    #[arg(long, value_enum)]
    pub method: Option<OrdMethodArg>,
    /// PCA input transform: clr, lr or alr.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// ALR reference part for `--kind alr`.
    #[arg(long)]
    pub reference: Option<String>,
    /// CA Box-Cox power.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimensions to plot, one-based, e.g. `1,2`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Draw columns in contribution coordinates and label only the
    /// above-average ones.
    #[arg(long)]
    pub contribution: bool,
    /// Bootstrap confidence ellipses for the group means.
    #[arg(long)]
    pub ellipses: bool,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    /// Zoom window `xmin,xmax,ymin,ymax`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub window: Vec<f64>,
    /// CSV of rows projected as supplementary points.
    #[arg(long)]
    pub supplementary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FindalrArgs {}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepArgs {
    /// Candidates listed per step.
    #[arg(long)]
    pub top: Option<usize>,
    /// Stop once this percentage of variance is explained.
    #[arg(long)]
    pub min_explained: Option<f64>,
    /// Stop once this Procrustes correlation is reached.
    #[arg(long)]
    pub min_procrustes: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackstepArgs {
    /// Reference part; defaults to the best FINDALR reference.
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub top: Option<usize>,
    /// Do not drop below this percentage of explained variance.
    #[arg(long)]
    pub min_explained: Option<f64>,
    /// Do not drop below this Procrustes correlation.
    #[arg(long)]
    pub min_procrustes: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaArgs {
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub permutations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethodArg {
    Ward,
    Amalg,
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceArg {
    Clr,
    Alr,
    Ca,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterArgs {
    #[arg(long, value_enum)]
    pub method: Option<ClusterMethodArg>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Sample geometry for kmeans.
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    /// Second geometry to cluster and compare against (ARI, agreement).
    #[arg(long, value_enum)]
    pub compare: Option<SpaceArg>,
    /// ALR reference part for the alr space; defaults to the best FINDALR reference.
    #[arg(long)]
    pub reference: Option<String>,
    /// CA power for the ca space.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnoseMode {
    Coherence,
    Alphasweep,
    Dilution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryArg {
    ChiSquare,
    ChiSquarePower,
    Logratio,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseArgs {
    #[arg(value_enum)]
    pub mode: Option<DiagnoseMode>,
    #[arg(long, value_enum)]
    pub geometry: Option<GeometryArg>,
    /// Power for the chi-square-power geometry.
    #[arg(long)]
    pub power: Option<f64>,
    /// Subcomposition sizes (coherence) or part counts (dilution).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Alpha sweep without zero replacement.
    #[arg(long)]
    pub keep_zeros: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShrinkArgs {}
