mod commands;
mod config;
mod history;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use spca_core::data::OcclusionFill;
use spca_core::SpcaError;

use commands::{DiagnosticViolation, Method};
use config::ConfigFile;

#[derive(Parser)]
#[command(name = "spca", version, about = "Self-paced PCA experiment harness")]
struct Cli {
    /// Optional key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Occlude a fraction of a PGM image tree with blocks.
    Corrupt(CorruptArgs),
    /// Per-class train/test split into CSV matrices.
    Split(SplitArgs),
    /// Fit a model and write model.txt plus history.csv.
    Train(TrainArgs),
    /// Reconstruction error of a saved model on a test matrix.
    Eval(EvalArgs),
    /// Grid of train+eval runs appended to a results CSV (resumable).
    Sweep(SweepArgs),
    /// Write basis columns and reconstructions as PGM images.
    Export(ExportArgs),
    /// Theory spot checks over a training history.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct CorruptArgs {
    /// Root of the class-per-directory PGM tree.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fraction of images to occlude.
    #[arg(long)]
    fraction: Option<f64>,
    /// Block side as a fraction of each image side.
    #[arg(long)]
    side_ratio: Option<f64>,
    /// Fill mode: black | uniform-random.
    #[arg(long)]
    fill: Option<OcclusionFill>,
    #[arg(long)]
    seed_corrupt: Option<u64>,
}

#[derive(Args)]
struct SplitArgs {
    /// Clean PGM tree.
    #[arg(long)]
    data: PathBuf,
    /// Output directory of a previous `corrupt` run; when given, train
    /// columns take their pixels and occlusion flags from it.
    #[arg(long)]
    corrupt_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    train_ratio: Option<f64>,
    #[arg(long)]
    seed_split: Option<u64>,
}

#[derive(Args, Clone)]
struct FitArgs {
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    outer_iters: Option<usize>,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    inner_max: Option<usize>,
    #[arg(long)]
    eps_dist: Option<f64>,
    #[arg(long)]
    seed_init: Option<u64>,
    /// Random orthonormal initialization instead of the PCA basis.
    #[arg(long)]
    random_init: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Training matrix CSV (first line `d,n`).
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Clean test matrix CSV.
    #[arg(long)]
    test: PathBuf,
    /// Output results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Dataset label for the results row.
    #[arg(long, default_value = "dataset")]
    dataset: String,
    /// Method label for the results row.
    #[arg(long, default_value = "model")]
    method: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Results CSV; existing rows are kept and skipped.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "dataset")]
    dataset: String,
    /// Comma-separated methods (spca, l2p, pca).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long = "k-list", value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long = "p-list", value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    #[arg(long = "eta-list", value_delimiter = ',')]
    eta_list: Option<Vec<f64>>,
    #[arg(long = "c-list", value_delimiter = ',')]
    c_list: Option<Vec<f64>>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// PGM tree supplying image geometry and reconstruction targets.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// How many sample reconstructions to write.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// history.csv from `train`.
    #[arg(long)]
    history: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    quadrature_steps: Option<usize>,
    /// Exit with code 3 if a checked guarantee is violated.
    #[arg(long)]
    assert: bool,
}

fn resolve_fit(cfg: &ConfigFile, fit: &FitArgs, train: PathBuf, out: PathBuf) -> Result<commands::TrainOpts> {
    Ok(commands::TrainOpts {
        train,
        out,
        method: cfg.resolve(fit.method, "method", Method::Spca)?,
        k: cfg.resolve(fit.k, "k", 10)?,
        p: cfg.resolve(fit.p, "p", 1.0)?,
        eta: cfg.resolve(fit.eta, "eta", 0.1)?,
        c: cfg.resolve(fit.c, "c", 15.0)?,
        outer_iters: cfg.resolve(fit.outer_iters, "outer_iters", 10)?,
        inner_tol: cfg.resolve(fit.inner_tol, "inner_tol", 1e-6)?,
        inner_max: cfg.resolve(fit.inner_max, "inner_max", 50)?,
        eps_dist: cfg.resolve(fit.eps_dist, "eps_dist", 1e-8)?,
        seed_init: cfg.resolve(fit.seed_init, "seed_init", 0)?,
        random_init: fit.random_init,
    })
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Corrupt(a) => commands::cmd_corrupt(&commands::CorruptOpts {
            data: a.data,
            out: a.out,
            fraction: cfg.resolve(a.fraction, "fraction", 0.3)?,
            side_ratio: cfg.resolve(a.side_ratio, "side_ratio", 0.25)?,
            fill: cfg.resolve(a.fill, "fill", OcclusionFill::Black)?,
            seed_corrupt: cfg.resolve(a.seed_corrupt, "seed_corrupt", 0)?,
        }),
        Command::Split(a) => commands::cmd_split(&commands::SplitOpts {
            data: a.data,
            corrupt_dir: a.corrupt_dir,
            out: a.out,
            train_ratio: cfg.resolve(a.train_ratio, "train_ratio", 0.5)?,
            seed_split: cfg.resolve(a.seed_split, "seed_split", 0)?,
        }),
        Command::Train(a) => {
            let opts = resolve_fit(&cfg, &a.fit, a.train, a.out)?;
            commands::cmd_train(&opts)
        }
        Command::Eval(a) => commands::cmd_eval(&commands::EvalOpts {
            model: a.model,
            test: a.test,
            out: a.out,
            dataset: a.dataset,
            method: a.method,
        }),
        Command::Sweep(a) => {
            let base = resolve_fit(&cfg, &a.fit, PathBuf::new(), PathBuf::new())?;
            commands::cmd_sweep(&commands::SweepOpts {
                train: a.train,
                test: a.test,
                out: a.out,
                dataset: a.dataset,
                methods: a.methods.unwrap_or_else(|| vec![Method::Spca]),
                k_list: a.k_list.unwrap_or_else(|| vec![base.k]),
                p_list: a.p_list.unwrap_or_else(|| vec![base.p]),
                eta_list: a.eta_list.unwrap_or_else(|| vec![base.eta]),
                c_list: a.c_list.unwrap_or_else(|| vec![base.c]),
                base,
            })
        }
        Command::Export(a) => commands::cmd_export(&commands::ExportOpts {
            model: a.model,
            data: a.data,
            out: a.out,
            count: cfg.resolve(a.count, "count", 8)?,
        }),
        Command::Diagnose(a) => commands::cmd_diagnose(&commands::DiagnoseOpts {
            history: a.history,
            out: a.out,
            eta: cfg.resolve(a.eta, "eta", 0.1)?,
            c: cfg.resolve(a.c, "c", 15.0)?,
            quadrature_steps: cfg.resolve(a.quadrature_steps, "quadrature_steps", 256)?,
            assert_mode: a.assert,
        }),
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<DiagnosticViolation>().is_some() {
        return 3;
    }
    if let Some(core) = find_core_error(err) {
        return match core {
            SpcaError::InvalidArgument(_)
            | SpcaError::DimensionMismatch(_)
            | SpcaError::Parse { .. } => 1,
            SpcaError::DegenerateInput(_) | SpcaError::Io { .. } => 2,
        };
    }
    // config parse problems and bad label/path combinations are user
    // input errors; anything touching the filesystem is runtime
    if err.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) {
        2
    } else {
        1
    }
}

fn find_core_error(err: &anyhow::Error) -> Option<&SpcaError> {
    err.chain().find_map(|c| c.downcast_ref::<SpcaError>())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
