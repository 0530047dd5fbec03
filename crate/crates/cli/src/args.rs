use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "muellerkit", version, about = "Mueller-matrix image cubes: validation, projection, decomposition, augmentation and evaluation")]
pub struct Cli {
    /// Worker threads [default: $MUELLERKIT_WORKERS, else one per core]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub workers: Option<u64>,

    /// TOML file supplying defaults for flags (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report NaN/Inf counts and the physically realizable fraction (exit 2 on findings)
    Validate(ValidateArgs),
    /// Clip negative coherency eigenvalues of unphysical matrices
    Project(ProjectArgs),
    /// Lu-Chipman decomposition into Δ, R, D and status planes
    Decompose(DecomposeArgs),
    /// Write a synthetic cube with known parameters
    Synth(SynthArgs),
    /// Quarter-turn rotation and/or mirror flip with the matching frame change
    Rotate(RotateArgs),
    /// Zero out elements a reduced polarimeter cannot measure
    Mask(MaskArgs),
    /// Divide every matrix by its m(0,0) and keep the gains as a plane
    Normalize(NormalizeArgs),
    /// Segmentation and classification metrics
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Deterministic data splits
    #[command(subcommand)]
    Split(SplitCommand),
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub input: PathBuf,
    /// Physicality tolerance on the smallest coherency eigenvalue [default: 1e-9]
    #[arg(long)]
    pub tol_phys: Option<f64>,
    /// Also write minimum-eigenvalue planes (`mineig_<λ>.mmp`) into this directory
    #[arg(long, value_name = "DIR")]
    pub planes: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Value given to negative eigenvalues [default: 1e-6]
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub tol_phys: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    pub outdir: PathBuf,
    /// Decompose unphysical matrices as-is (flagged) instead of projecting them
    #[arg(long)]
    pub no_project: bool,
    /// Wavelength indices to decompose (comma-separated or repeated) [default: all]
    #[arg(long = "wavelength", value_delimiter = ',', value_name = "K")]
    pub wavelengths: Vec<usize>,
    /// Write min-max scaled 8-bit PNG previews next to the planes
    #[arg(long)]
    pub preview: bool,
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub tol_phys: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Identity,
    Depolarizer,
    Retarder,
    Diattenuator,
    Composed,
    RandomPhysical,
    UnphysicalTile,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    pub output: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub height: usize,
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Wavelengths in nm, strictly increasing
    #[arg(long, value_delimiter = ',', default_value = "550")]
    pub wavelengths: Vec<f32>,
    /// Depolarizer diagonal a,b,c
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.5,0.4", allow_hyphen_values = true)]
    pub depolarizer: Vec<f64>,
    /// Retarder fast-axis angle (radians)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Retardance (radians)
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    pub delta: f64,
    /// Diattenuation vector x,y,z
    #[arg(long, value_delimiter = ',', default_value = "0.6,0,0", allow_hyphen_values = true)]
    pub diattenuation: Vec<f64>,
    /// Seed for random-physical [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Store 64-bit floats instead of 32-bit
    #[arg(long)]
    pub f64: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degrees {
    #[value(name = "0")]
    D0,
    #[value(name = "90")]
    D90,
    #[value(name = "180")]
    D180,
    #[value(name = "270")]
    D270,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flip {
    H,
    V,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("transform").required(true).multiple(true).args(["deg", "flip"])))]
pub struct RotateArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Counter-clockwise rotation
    #[arg(long, value_enum)]
    pub deg: Option<Degrees>,
    /// Mirror before rotating: h = left-right, v = top-bottom
    #[arg(long, value_enum)]
    pub flip: Option<Flip>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("which").required(true).args(["preset", "bits"])))]
pub struct MaskArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// full | ul3x3 | first_row_col | linear_only
    #[arg(long)]
    pub preset: Option<String>,
    /// 16-bit element mask, bit 4i+j for m(i,j), e.g. 0x0777
    #[arg(long)]
    pub bits: Option<String>,
    /// Value written into masked elements [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub fill: Option<f64>,
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum MetricsCommand {
    /// Per-class and macro Dice between two label planes
    Dice(DiceArgs),
    /// Accuracy, sensitivity and specificity
    Cls(ClsArgs),
    /// Mean and sample standard deviation over runs
    Aggregate(AggregateArgs),
}

#[derive(Args, Debug)]
pub struct DiceArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub classes: Vec<u8>,
    /// Also write a JSON run summary here
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["pred", "counts"])))]
pub struct ClsArgs {
    /// Predicted label plane
    #[arg(long, requires = "gt")]
    pub pred: Option<PathBuf>,
    #[arg(long, requires = "pred")]
    pub gt: Option<PathBuf>,
    /// Label id of the positive class in label planes
    #[arg(long, default_value_t = 1)]
    pub positive: u8,
    /// Confusion counts tp,fp,tn,fn
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<u64>>,
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["values", "input"])))]
pub struct AggregateArgs {
    /// Comma-separated run values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// File with one value per line (or comma-separated)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Metric name used in the output rows
    #[arg(long, default_value = "value")]
    pub name: String,
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SplitCommand {
    /// Seeded subset of max(1, round(fraction·n)) indices
    FewShot(FewShotArgs),
    /// All (test, val) specimen pairs, training on the rest
    NestedCv(NestedCvArgs),
    /// Seeded train/val/test partition (60/20/20 by default)
    Holdout(HoldoutArgs),
}

#[derive(Args, Debug)]
pub struct FewShotArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub fraction: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct NestedCvArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct HoldoutArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.6)]
    pub train: f64,
    #[arg(long, default_value_t = 0.2)]
    pub val: f64,
}
