//! Implementations of the experiment-harness subcommands.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;

use spca_core::data::{
    load_image_dir, normalize_samples, occlude, select_columns, split_indices_per_class,
    ImageDataset, OcclusionFill,
};
use spca_core::diagnostics::{check_mm_monotonicity, check_robustness_bound, weight_curve};
use spca_core::io::{
    format_f64, read_data_matrix, read_model, write_matrix_csv, write_model, ModelFile,
};
use spca_core::pgm::{save_pgm, save_pgm_unit};
use spca_core::{
    fidelity, fit_pca, fit_spca, normalize_fidelity, pca_basis, reconstruct,
    reconstruction_error, update_projection, DataMatrix, InitStrategy, IterationRecord,
    SampleWeights, SelfPacedConfig, TrainingHistory,
};

use crate::history::{read_history, write_history};

/// Raised when `diagnose` finds violations in assertion mode; mapped to
/// exit code 3.
#[derive(Debug)]
pub struct DiagnosticViolation(pub String);

impl std::fmt::Display for DiagnosticViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "diagnostic violation: {}", self.0)
    }
}

impl std::error::Error for DiagnosticViolation {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spca,
    L2p,
    Pca,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spca => "spca",
            Method::L2p => "l2p",
            Method::Pca => "pca",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spca" => Ok(Method::Spca),
            "l2p" => Ok(Method::L2p),
            "pca" => Ok(Method::Pca),
            other => Err(format!("unknown method {other:?} (expected spca | l2p | pca)")),
        }
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

/// class/file suffix of a loaded image path, used to mirror trees.
fn rel_name(full: &str) -> String {
    let p = Path::new(full);
    let file = p.file_name().map(|s| s.to_string_lossy().into_owned());
    let class = p
        .parent()
        .and_then(|d| d.file_name())
        .map(|s| s.to_string_lossy().into_owned());
    match (class, file) {
        (Some(c), Some(f)) => format!("{c}/{f}"),
        (None, Some(f)) => f,
        _ => full.to_string(),
    }
}

fn write_manifest(ds: &ImageDataset, is_train: Option<&[bool]>, path: &Path) -> Result<()> {
    let mask = ds.corruption_mask.clone().unwrap_or_else(|| vec![false; ds.labels.len()]);
    let mut out = String::from("file,class,is_train,is_occluded\n");
    for i in 0..ds.labels.len() {
        let file = ds.files.get(i).map(|f| rel_name(f)).unwrap_or_default();
        let train = match is_train {
            Some(flags) => if flags[i] { "1" } else { "0" }.to_string(),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{file},{},{train},{}",
            ds.labels[i],
            if mask[i] { 1 } else { 0 }
        );
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

fn read_manifest_occlusion(path: &Path) -> Result<Vec<bool>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let mut mask = Vec::new();
    for line in text.lines().skip(1) {
        let last = line
            .rsplit(',')
            .next()
            .ok_or_else(|| anyhow!("{}: empty manifest row", path.display()))?;
        mask.push(last.trim() == "1");
    }
    Ok(mask)
}

pub struct CorruptOpts {
    pub data: PathBuf,
    pub out: PathBuf,
    pub fraction: f64,
    pub side_ratio: f64,
    pub fill: OcclusionFill,
    pub seed_corrupt: u64,
}

pub fn cmd_corrupt(opts: &CorruptOpts) -> Result<()> {
    let ds = load_image_dir(&opts.data)?;
    let corrupted = occlude(&ds, opts.fraction, opts.side_ratio, opts.fill, opts.seed_corrupt)?;

    let images_root = opts.out.join("images");
    ensure_dir(&images_root)?;
    for i in 0..corrupted.labels.len() {
        let rel = rel_name(&corrupted.files[i]);
        let target = images_root.join(&rel);
        if let Some(parent) = target.parent() {
            ensure_dir(parent)?;
        }
        let column: Vec<f64> = corrupted.matrix.matrix().column(i).iter().cloned().collect();
        save_pgm_unit(&column, corrupted.height, corrupted.width, &target)?;
    }
    write_manifest(&corrupted, None, &opts.out.join("manifest.csv"))?;
    write_meta(corrupted.height, corrupted.width, &opts.out.join("meta.csv"))?;
    Ok(())
}

fn write_meta(height: usize, width: usize, path: &Path) -> Result<()> {
    std::fs::write(path, format!("height,width\n{height},{width}\n"))
        .with_context(|| format!("cannot write {}", path.display()))
}

pub struct SplitOpts {
    /// Clean image tree (test columns are drawn from here).
    pub data: PathBuf,
    /// Optional corrupted tree produced by `corrupt`; train columns use
    /// its pixels and its manifest's occlusion flags.
    pub corrupt_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub train_ratio: f64,
    pub seed_split: u64,
}

pub fn cmd_split(opts: &SplitOpts) -> Result<()> {
    let clean = load_image_dir(&opts.data)?;
    let train_source = match &opts.corrupt_dir {
        Some(dir) => {
            let mut cor = load_image_dir(&dir.join("images"))?;
            if cor.matrix.dims() != clean.matrix.dims() || cor.labels != clean.labels {
                bail!(
                    "corrupted tree {} does not match the clean tree {}",
                    dir.display(),
                    opts.data.display()
                );
            }
            let mask = read_manifest_occlusion(&dir.join("manifest.csv"))?;
            if mask.len() != cor.labels.len() {
                bail!("manifest rows do not match image count in {}", dir.display());
            }
            cor.corruption_mask = Some(mask);
            cor
        }
        None => clean.clone(),
    };

    let (train_idx, test_idx) =
        split_indices_per_class(&clean.labels, opts.train_ratio, opts.seed_split)?;

    // the solver sees corrupted pixels, normalized after occlusion; test
    // columns are normalized from the pristine pixels
    let train = normalize_samples(&select_columns(&train_source, &train_idx)?)?;
    let test = normalize_samples(&select_columns(&clean, &test_idx)?)?;

    ensure_dir(&opts.out)?;
    write_matrix_csv(train.matrix.matrix(), &opts.out.join("train.csv"))?;
    write_matrix_csv(test.matrix.matrix(), &opts.out.join("test.csv"))?;
    write_meta(clean.height, clean.width, &opts.out.join("meta.csv"))?;

    let n = clean.labels.len();
    let mut is_train = vec![false; n];
    for &i in &train_idx {
        is_train[i] = true;
    }
    let mut annotated = clean.clone();
    annotated.corruption_mask = train_source.corruption_mask.clone();
    write_manifest(&annotated, Some(&is_train), &opts.out.join("manifest.csv"))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOpts {
    pub train: PathBuf,
    pub out: PathBuf,
    pub method: Method,
    pub k: usize,
    pub p: f64,
    pub eta: f64,
    pub c: f64,
    pub outer_iters: usize,
    pub inner_tol: f64,
    pub inner_max: usize,
    pub eps_dist: f64,
    pub seed_init: u64,
    pub random_init: bool,
}

/// Trains in memory; shared by `train` and `sweep`.
pub fn run_training(
    x: &DataMatrix,
    opts: &TrainOpts,
) -> Result<(ModelFile, TrainingHistory)> {
    let n = x.nsamples();
    let (basis, weights, history) = match opts.method {
        Method::Spca => {
            let cfg = SelfPacedConfig {
                k: opts.k,
                p: opts.p,
                eta: opts.eta,
                c: opts.c,
                outer_iters: opts.outer_iters,
                inner_tol: opts.inner_tol,
                inner_max: opts.inner_max,
                eps_dist: opts.eps_dist,
                seed: opts.seed_init,
                init: if opts.random_init {
                    InitStrategy::RandomOrthonormal
                } else {
                    InitStrategy::Pca
                },
            };
            fit_spca(x, &cfg)?
        }
        Method::L2p => {
            let u0 = if opts.random_init {
                spca_core::random_basis(x.nfeatures(), opts.k, opts.seed_init)?
            } else {
                pca_basis(x, opts.k)?
            };
            let w = SampleWeights::ones(n);
            let (u, traces) =
                update_projection(x, &w, opts.p, &u0, opts.inner_tol, opts.inner_max, opts.eps_dist)?;
            let ell_raw = fidelity(x, &u, opts.p)?;
            let ell_norm = normalize_fidelity(&ell_raw, opts.c)?;
            let history = TrainingHistory {
                records: vec![IterationRecord {
                    objective: ell_raw.values().iter().sum(),
                    ell_raw: ell_raw.values().to_vec(),
                    ell_norm: ell_norm.values().to_vec(),
                    weights: w.values().to_vec(),
                    inner_iters: traces.len(),
                    trace_objective: traces,
                }],
            };
            (u, w, history)
        }
        Method::Pca => {
            let model = fit_pca(x, opts.k)?;
            let w = SampleWeights::ones(n);
            let history = TrainingHistory {
                records: vec![IterationRecord {
                    ell_raw: Vec::new(),
                    ell_norm: Vec::new(),
                    weights: w.values().to_vec(),
                    objective: 0.0,
                    trace_objective: Vec::new(),
                    inner_iters: 0,
                }],
            };
            (model.basis, w, history)
        }
    };
    let model = ModelFile {
        k: opts.k,
        p: if opts.method == Method::Pca { 2.0 } else { opts.p },
        eta: opts.eta,
        c: opts.c,
        basis,
        weights,
    };
    Ok((model, history))
}

pub fn cmd_train(opts: &TrainOpts) -> Result<()> {
    let x = read_data_matrix(&opts.train)?;
    let (model, history) = run_training(&x, opts)?;
    ensure_dir(&opts.out)?;
    write_model(&model, &opts.out.join("model.txt"))?;
    write_history(&history, &opts.out.join("history.csv"))?;
    Ok(())
}

pub struct EvalOpts {
    pub model: PathBuf,
    pub test: PathBuf,
    pub out: PathBuf,
    pub dataset: String,
    pub method: String,
}

const RESULT_HEADER: &str = "dataset,method,p,eta,c,k,error";

fn result_row(dataset: &str, method: &str, model: &ModelFile, error: &str) -> String {
    format!(
        "{dataset},{method},{},{},{},{},{error}",
        format_f64(model.p),
        format_f64(model.eta),
        format_f64(model.c),
        model.k
    )
}

pub fn cmd_eval(opts: &EvalOpts) -> Result<()> {
    let model = read_model(&opts.model)?;
    let x = read_data_matrix(&opts.test)?;
    let e = reconstruction_error(&x, &model.basis)?;
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    out.push_str(&result_row(&opts.dataset, &opts.method, &model, &format_f64(e)));
    out.push('\n');
    std::fs::write(&opts.out, out).with_context(|| format!("cannot write {}", opts.out.display()))?;
    Ok(())
}

pub struct SweepOpts {
    pub train: PathBuf,
    pub test: PathBuf,
    pub out: PathBuf,
    pub dataset: String,
    pub methods: Vec<Method>,
    pub k_list: Vec<usize>,
    pub p_list: Vec<f64>,
    pub eta_list: Vec<f64>,
    pub c_list: Vec<f64>,
    pub base: TrainOpts,
}

pub fn cmd_sweep(opts: &SweepOpts) -> Result<()> {
    if opts.k_list.is_empty() || opts.p_list.is_empty() || opts.eta_list.is_empty()
        || opts.c_list.is_empty() || opts.methods.is_empty()
    {
        bail!("sweep lists must be non-empty");
    }
    let x_train = read_data_matrix(&opts.train)?;
    let x_test = read_data_matrix(&opts.test)?;

    // resume: a row's identity is everything before the error column
    let mut seen: HashSet<String> = HashSet::new();
    let mut file_exists = false;
    if let Ok(text) = std::fs::read_to_string(&opts.out) {
        file_exists = true;
        for line in text.lines().skip(1) {
            if let Some(key) = line.rsplit_once(',').map(|(head, _)| head.to_string()) {
                seen.insert(key);
            }
        }
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&opts.out)
        .with_context(|| format!("cannot open {}", opts.out.display()))?;
    if !file_exists {
        writeln!(file, "{RESULT_HEADER}")?;
    }

    for &method in &opts.methods {
        for &p in &opts.p_list {
            for &eta in &opts.eta_list {
                for &c in &opts.c_list {
                    for &k in &opts.k_list {
                        let mut row_opts = opts.base.clone();
                        row_opts.method = method;
                        row_opts.k = k;
                        row_opts.p = p;
                        row_opts.eta = eta;
                        row_opts.c = c;
                        let key = format!(
                            "{},{},{},{},{},{}",
                            opts.dataset,
                            method.name(),
                            format_f64(if method == Method::Pca { 2.0 } else { p }),
                            format_f64(eta),
                            format_f64(c),
                            k
                        );
                        if seen.contains(&key) {
                            continue;
                        }
                        let cell = match run_training(&x_train, &row_opts)
                            .and_then(|(model, _)| {
                                Ok(reconstruction_error(&x_test, &model.basis)?)
                            }) {
                            Ok(e) => format_f64(e),
                            Err(err) => {
                                eprintln!("sweep row {key} failed: {err}");
                                "ERROR".to_string()
                            }
                        };
                        writeln!(file, "{key},{cell}")?;
                        seen.insert(key);
                    }
                }
            }
        }
    }
    Ok(())
}

pub struct ExportOpts {
    pub model: PathBuf,
    pub data: PathBuf,
    pub out: PathBuf,
    pub count: usize,
}

pub fn cmd_export(opts: &ExportOpts) -> Result<()> {
    let model = read_model(&opts.model)?;
    let ds = normalize_samples(&load_image_dir(&opts.data)?)?;
    let d = ds.matrix.nfeatures();
    if d != model.basis.nfeatures() {
        bail!(
            "model basis has d={} but images flatten to d={d}",
            model.basis.nfeatures()
        );
    }
    ensure_dir(&opts.out)?;
    for col in 0..model.basis.subspace_dim() {
        let values: Vec<f64> = model.basis.matrix().column(col).iter().cloned().collect();
        save_pgm(
            &values,
            ds.height,
            ds.width,
            &opts.out.join(format!("eigenface_{col:03}.pgm")),
        )?;
    }
    let count = opts.count.min(ds.matrix.nsamples());
    for i in 0..count {
        let x = ds.matrix.matrix().column(i).into_owned();
        let r = reconstruct(&x, &model.basis)?;
        save_pgm(
            r.as_slice(),
            ds.height,
            ds.width,
            &opts.out.join(format!("recon_{i:03}.pgm")),
        )?;
    }
    Ok(())
}

pub struct DiagnoseOpts {
    pub history: PathBuf,
    pub out: PathBuf,
    pub eta: f64,
    pub c: f64,
    pub quadrature_steps: usize,
    /// When set, inner-trace or robustness violations become exit code 3.
    pub assert_mode: bool,
}

pub fn cmd_diagnose(opts: &DiagnoseOpts) -> Result<()> {
    let history = read_history(&opts.history)?;
    ensure_dir(&opts.out)?;

    let report = check_mm_monotonicity(&history, opts.eta, opts.quadrature_steps)?;
    let mut mono = String::from("iter,objective,delta,violation\n");
    for step in &report.surrogate_steps {
        let _ = writeln!(
            mono,
            "{},{},{},{}",
            step.iter,
            format_f64(step.objective),
            format_f64(step.delta),
            u8::from(step.violation)
        );
    }
    std::fs::write(opts.out.join("monotonicity.csv"), mono)?;

    let mut inner = String::from("outer,inner,delta\n");
    for (outer, idx, delta) in &report.inner_violations {
        let _ = writeln!(inner, "{outer},{idx},{}", format_f64(*delta));
    }
    std::fs::write(opts.out.join("inner_violations.csv"), inner)?;

    // robustness bound over the last iteration's normalized fidelities;
    // M sits just above c because normalization pins max ℓ to c exactly
    let last = history.records.last().expect("non-empty history");
    let mut robustness_violations = 0;
    if !last.ell_norm.is_empty() {
        let bound = opts.c * 1.01;
        let rep = check_robustness_bound(&last.ell_norm, opts.eta, bound, opts.quadrature_steps)?;
        robustness_violations = rep.violations;
        std::fs::write(
            opts.out.join("robustness.csv"),
            format!(
                "pairs,min_slack,violations\n{},{},{}\n",
                rep.pairs_checked,
                format_f64(rep.min_slack),
                rep.violations
            ),
        )?;
    }

    let etas = [opts.eta];
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * opts.c / 200.0).collect();
    let rows = weight_curve(&etas, &grid)?;
    let mut curve = String::from("eta,ell,w,threshold\n");
    for r in rows {
        let _ = writeln!(
            curve,
            "{},{},{},{}",
            format_f64(r.eta),
            format_f64(r.ell),
            format_f64(r.weight),
            format_f64(r.threshold)
        );
    }
    std::fs::write(opts.out.join("weight_curve.csv"), curve)?;

    if opts.assert_mode && (!report.inner_violations.is_empty() || robustness_violations > 0) {
        return Err(DiagnosticViolation(format!(
            "{} inner trace decreases, {} robustness-bound failures",
            report.inner_violations.len(),
            robustness_violations
        ))
        .into());
    }
    Ok(())
}

/// Reshapes a flattened column back into image geometry for export paths
/// that only have a matrix. Currently used by tests.
#[allow(dead_code)]
pub fn column_as_matrix(values: &[f64], height: usize, width: usize) -> DMatrix<f64> {
    DMatrix::from_fn(height, width, |r, c| values[r * width + c])
}
