use clap::{Args, Parser, Subcommand, ValueEnum};
use polydg::assembly::DEFAULT_C_SIGMA;
use polydg::solvers::{DEFAULT_LAMBDA_SAFETY, DEFAULT_MAX_ITER, DEFAULT_TOL_REL};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "polydg", version, about = "hp SIPG Poisson solver with agglomeration multigrid")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a mesh of the unit square.
    Mesh(MeshArgs),
    /// Agglomerate a mesh into a nested hierarchy.
    Hierarchy(HierarchyArgs),
    /// Solve the Poisson problem on a hierarchy.
    Solve(SolveArgs),
    /// Run one of the analysis studies.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "generator")]
pub struct GeneratorArgs {
    /// Structured triangular mesh with N x N squares split in two.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub tri: Option<u64>,
    /// Clipped Voronoi mesh with N Lloyd-relaxed cells.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(4..))]
    pub voronoi: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Lloyd iterations for Voronoi meshes.
    #[arg(long, default_value_t = polydg::mesh::DEFAULT_LLOYD_ITERS)]
    pub lloyd: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct HierarchyArgs {
    /// Fine mesh JSON file.
    #[arg(short, long, value_name = "FILE")]
    pub input: PathBuf,
    /// Number of levels including the fine mesh.
    #[arg(short = 'J', long = "levels", default_value_t = 4)]
    pub levels: usize,
    /// Target number of fine elements per aggregate.
    #[arg(long, default_value_t = polydg::hierarchy::DEFAULT_TARGET_FACTOR)]
    pub factor: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for level meshes, maps and quality.csv.
    #[arg(short, long, value_name = "DIR", default_value = "hierarchy")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Tl,
    Wcycle,
    Cg,
    Pcg,
    AmgMis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhsChoice {
    /// f = 2 pi^2 sin(pi x) sin(pi y).
    Manufactured,
    /// Random load vector from --seed.
    Random,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Hierarchy directory written by `polydg hierarchy`.
    #[arg(long, value_name = "DIR", conflicts_with = "mesh")]
    pub hierarchy: Option<PathBuf>,
    /// Fine mesh; a hierarchy with --levels levels is built on the fly.
    #[arg(short = 'i', long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverChoice::Tl)]
    pub solver: SolverChoice,
    /// Polynomial degree on every level.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Pre- and post-smoothing steps (overridden by --m1/--m2).
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long)]
    pub m1: Option<usize>,
    #[arg(long)]
    pub m2: Option<usize>,
    /// Levels used by the W-cycle (finest ones); all available by default.
    #[arg(short = 'J', long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_C_SIGMA)]
    pub c_sigma: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_SAFETY)]
    pub lambda_safety: f64,
    #[arg(long, value_enum, default_value_t = RhsChoice::Manufactured)]
    pub rhs: RhsChoice,
    /// Seed for the random right-hand side and on-the-fly agglomeration.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report CSV.
    #[arg(short, long, value_name = "FILE", default_value = "report.csv")]
    pub output: PathBuf,
    /// Residual history CSV.
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
    /// Write the fine-level matrix in Matrix Market format.
    #[arg(long, value_name = "FILE")]
    pub dump_matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(subcommand)]
    pub kind: StudyKind,
}

#[derive(Debug, Args, Clone)]
pub struct CommonStudy {
    #[arg(long, default_value_t = DEFAULT_C_SIGMA)]
    pub c_sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StudyKind {
    /// Coercivity constants on Voronoi meshes and their agglomerations.
    Coercivity {
        /// Fine cell counts.
        #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
        sets: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        p: Vec<usize>,
        /// Hierarchy levels per set (1 = fine mesh only).
        #[arg(short = 'J', long, default_value_t = 1)]
        levels: usize,
        #[command(flatten)]
        common: CommonStudy,
    },
    /// Iteration counts for TL, W-cycles and Krylov baselines.
    Iterations {
        #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
        sets: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,8,12,16,20")]
        m: Vec<usize>,
        /// Any of tl, w<J>, cg, pcg.
        #[arg(long, value_delimiter = ',', default_value = "tl,w3,w4,cg,pcg")]
        solvers: Vec<String>,
        #[arg(long, value_enum, default_value_t = RhsChoice::Random)]
        rhs: RhsChoice,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        common: CommonStudy,
    },
    /// Energy-norm contraction of the two-level and W-cycle error operators.
    Contraction {
        #[arg(long, default_value_t = 512)]
        cells: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        p: Vec<usize>,
        /// Smoothing steps: `2p2` for m = 2p^2 or a fixed integer.
        #[arg(long, default_value = "2p2")]
        m: String,
        /// Level counts to measure (2 = two-level).
        #[arg(short = 'J', long, value_delimiter = ',', default_value = "2,3")]
        levels: Vec<usize>,
        #[command(flatten)]
        common: CommonStudy,
    },
    /// Manufactured-solution convergence rates on structured meshes.
    Rates {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        n: Vec<usize>,
        #[command(flatten)]
        common: CommonStudy,
    },
    /// Largest eigenvalue scaling in h and p.
    Eigscaling {
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        n: Vec<usize>,
        #[command(flatten)]
        common: CommonStudy,
    },
    /// Unsmoothed-aggregation AMG W-cycle on the SIPG matrix.
    Amg {
        #[arg(long, default_value_t = 1024)]
        cells: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        p: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        common: CommonStudy,
    },
}
