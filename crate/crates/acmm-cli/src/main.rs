//! Batch experiment runner for the acmm library.
//!
//! Four subcommands: `multiply` (one coded product under a failure plan),
//! `search` (alternating-minimization code discovery), `sweep` (error/loss
//! tables against N_succ or gamma), and `train` (coded logistic regression).
//! Every command is deterministic given its flags; all randomness is seeded.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation error, 3 decoder
//! failure.

use acmm::code_search::{multi_seed_search, GeneralLinearCode, SearchOptions};
use acmm::coded_logreg::{
    read_dataset_csv, read_idx_dataset, synthetic_blobs, train, Dataset, TrainCodec,
    TrainConfig, TrainPlan,
};
use acmm::mat::Mat;
use acmm::partition::{read_matrix_file, write_matrix_csv, CodeParams};
use acmm::polydot;
use acmm::straggler_sim::{gamma_sweep, run, sweep_nsucc, Codec, FailurePlan};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// ---------------------------------------------------------------------------
// Error handling with the documented exit codes
// ---------------------------------------------------------------------------

enum CliError {
    Io(String),
    Validation(String),
    DecodeFailure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::DecodeFailure(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Validation(m) | CliError::DecodeFailure(m) => m,
        }
    }
}

impl From<acmm::Error> for CliError {
    fn from(e: acmm::Error) -> Self {
        match e {
            acmm::Error::Io(_) | acmm::Error::Parse(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// Flags
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "acmm",
    about = "Approximate coded distributed matrix multiplication experiments",
    version
)]
struct Cli {
    /// TOML config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply two matrices through a codec under a failure plan.
    Multiply(MultiplyArgs),
    /// Search for new approximate codes by alternating minimization.
    Search(SearchArgs),
    /// Tabulate error/loss against N_succ or gamma across codecs.
    Sweep(SweepArgs),
    /// Train softmax logistic regression with coded products.
    Train(TrainArgs),
}

#[derive(Args, Clone)]
struct MultiplyArgs {
    /// matdot | eps-matdot | polydot | eps-polydot | general:FILE
    #[arg(long)]
    codec: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Worker count P.
    #[arg(long = "workers", visible_alias = "P")]
    workers: Option<usize>,
    /// Recovery threshold k (survivors per scenario).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Frobenius-norm bound; defaults to the measured input norms.
    #[arg(long)]
    eta: Option<f64>,
    /// exhaustive | worst | random:SEED
    #[arg(long)]
    plan: Option<String>,
    /// Random-plan draw count.
    #[arg(long)]
    trials: Option<usize>,
    /// Chebyshev scale for the exact codecs.
    #[arg(long)]
    gamma: Option<f64>,
    /// Use the relaxed admissibility bound for eps-matdot.
    #[arg(long)]
    relaxed: bool,
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "workers", visible_alias = "P")]
    workers: Option<usize>,
    #[arg(long)]
    seeds: Option<u64>,
    /// Maximum alternating-minimization sweeps per seed.
    #[arg(long)]
    iters: Option<usize>,
    /// Disable the plateau early stop (full-length reproduction runs).
    #[arg(long)]
    no_early_stop: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// nsucc | gamma
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated codec list for nsucc mode.
    #[arg(long)]
    codecs: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "workers", visible_alias = "P")]
    workers: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Square dimension of the generated input matrices.
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for the generated input matrices.
    #[arg(long)]
    mat_seed: Option<u64>,
    /// Seed for subset sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive N_succ bounds "lo..hi" or a comma list (nsucc mode).
    #[arg(long)]
    nsucc: Option<String>,
    /// Comma-separated gamma grid (gamma mode).
    #[arg(long)]
    gammas: Option<String>,
    /// Survivor count for gamma mode.
    #[arg(long)]
    nsucc_at: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TrainArgs {
    /// synthetic | csv:PATH | mnist:DIR
    #[arg(long)]
    dataset: Option<String>,
    /// uncoded | truncated | matdot | eps-matdot | general:FILE
    #[arg(long)]
    codec: Option<String>,
    /// worst | random:SEED
    #[arg(long)]
    plan: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "workers", visible_alias = "P")]
    workers: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    relaxed: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// TOML config: flat tables keyed by subcommand
// ---------------------------------------------------------------------------

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    multiply: toml::Table,
    #[serde(default)]
    search: toml::Table,
    #[serde(default)]
    sweep: toml::Table,
    #[serde(default)]
    train: toml::Table,
}

fn load_config(path: &Option<PathBuf>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("config {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))
        }
    }
}

trait FromTomlValue: Sized {
    fn from_toml(v: &toml::Value) -> Option<Self>;
}

impl FromTomlValue for usize {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().map(|i| i as usize)
    }
}

impl FromTomlValue for u64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().map(|i| i as u64)
    }
}

impl FromTomlValue for f64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
}

impl FromTomlValue for String {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(str::to_string)
    }
}

impl FromTomlValue for PathBuf {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }
}

/// Flag value, else config-file value, else default.
fn pick<T: FromTomlValue>(flag: Option<T>, table: &toml::Table, key: &str, default: T) -> T {
    flag.or_else(|| table.get(key).and_then(T::from_toml)).unwrap_or(default)
}

fn pick_opt<T: FromTomlValue>(flag: Option<T>, table: &toml::Table, key: &str) -> Option<T> {
    flag.or_else(|| table.get(key).and_then(T::from_toml))
}

// ---------------------------------------------------------------------------
// Shared parsing helpers
// ---------------------------------------------------------------------------

fn parse_codec(
    name: &str,
    params: &CodeParams,
    gamma: f64,
    relaxed: bool,
) -> CliResult<Codec> {
    match name {
        "matdot" => Ok(Codec::MatDotExact { gamma }),
        "eps-matdot" => Ok(Codec::MatDotApprox { relaxed }),
        "eps-matdot-relaxed" => Ok(Codec::MatDotApprox { relaxed: true }),
        "polydot" => Ok(Codec::PolyDotExact { gamma }),
        "eps-polydot" => Ok(Codec::PolyDotApprox),
        other => {
            if let Some(path) = other.strip_prefix("general:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("code file {path}: {e}")))?;
                let mut code = GeneralLinearCode::from_json(&text)?;
                code.params.epsilon = params.epsilon;
                code.params.eta = params.eta;
                if code.params.workers != params.workers || code.params.m != params.m {
                    return Err(CliError::Validation(format!(
                        "code file is for (m={}, P={}), run asked (m={}, P={})",
                        code.params.m, code.params.workers, params.m, params.workers
                    )));
                }
                Ok(Codec::General(code))
            } else {
                Err(CliError::Validation(format!("unknown codec: {other}")))
            }
        }
    }
}

fn parse_plan(text: &str, k: usize, trials: usize) -> CliResult<FailurePlan> {
    if text == "exhaustive" {
        return Ok(FailurePlan::exhaustive(k));
    }
    if text == "worst" {
        return Ok(FailurePlan::worst_case(k));
    }
    if let Some(seed) = text.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| CliError::Validation(format!("bad plan seed: {text}")))?;
        return Ok(FailurePlan::random(k, seed, trials));
    }
    Err(CliError::Validation(format!(
        "unknown plan: {text} (expected exhaustive | worst | random:SEED)"
    )))
}

/// Minimum survivors the codec can decode from; requests below it are
/// rejected up front.
fn decode_threshold(codec: &Codec, params: &CodeParams) -> usize {
    match codec {
        Codec::MatDotExact { .. } | Codec::MatDotApprox { .. } => params.m,
        Codec::PolyDotExact { .. } => polydot::exact_threshold(params.p, params.q),
        Codec::PolyDotApprox => polydot::approx_threshold(params.p, params.q),
        Codec::General(code) => code.params.k,
    }
}

fn reproducibility_stamp() -> String {
    let args: Vec<String> = std::env::args().collect();
    format!("# args: {}\n", args.join(" "))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn random_square(dim: usize, seed: u64) -> Mat {
    let mut rng = acmm::rng::Rng::stream(seed, &[0x6d61_7472]);
    Mat::from_vec(dim, dim, (0..dim * dim).map(|_| rng.next_normal()).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// multiply
// ---------------------------------------------------------------------------

fn cmd_multiply(args: MultiplyArgs, file: &toml::Table) -> CliResult<()> {
    let m = pick(args.m, file, "m", 3);
    let p = pick(args.p, file, "p", 1);
    let q = pick(args.q, file, "q", if p == 1 { m } else { m / p.max(1) });
    let workers = pick(args.workers, file, "workers", 6);
    let k = pick(args.k, file, "k", m);
    let eps = pick(args.eps, file, "eps", 1e-2);
    let codec_name = pick(args.codec, file, "codec", "eps-matdot".to_string());
    let plan_text = pick(args.plan, file, "plan", "exhaustive".to_string());
    let trials = pick(args.trials, file, "trials", 10);
    let gamma = pick(args.gamma, file, "gamma", 1.0);
    let a_path = pick_opt(args.a, file, "a")
        .ok_or_else(|| CliError::Validation("--a FILE is required".into()))?;
    let b_path = pick_opt(args.b, file, "b")
        .ok_or_else(|| CliError::Validation("--b FILE is required".into()))?;
    let out = pick(args.out, file, "out", PathBuf::from("multiply-out"));

    let raw_a = read_matrix_file(&a_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", a_path.display())))?;
    let raw_b = read_matrix_file(&b_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", b_path.display())))?;

    // With an explicit eta the run is faithful to the absolute error model.
    // Without one, both operands are normalized to unit Frobenius norm and
    // encoded at eta = 1, and the measured errors scale back afterwards:
    // the guarantee turns relative, and near-zero evaluation points keep
    // their intended size no matter how large the inputs are.
    let explicit_eta = pick_opt(args.eta, file, "eta");
    let rescale = match explicit_eta {
        Some(_) => 1.0,
        None => {
            raw_a.frobenius_norm().max(1e-9) * raw_b.frobenius_norm().max(1e-9)
        }
    };
    let (a, b, eta) = match explicit_eta {
        Some(eta) => (raw_a, raw_b, eta),
        None => (
            raw_a.scale(1.0 / raw_a.frobenius_norm().max(1e-9)),
            raw_b.scale(1.0 / raw_b.frobenius_norm().max(1e-9)),
            1.0,
        ),
    };

    let params = CodeParams::new(m, p, q, workers, k, eps, eta).map_err(CliError::from)?;
    let codec = parse_codec(&codec_name, &params, gamma, args.relaxed)?;
    let threshold = decode_threshold(&codec, &params);
    if k < threshold {
        return Err(CliError::Validation(format!(
            "k = {k} is below the {codec_name} decode threshold {threshold}"
        )));
    }
    let plan = parse_plan(&plan_text, k, trials)?;

    let mut report = run(&codec, &a, &b, &params, &plan).map_err(CliError::from)?;
    if rescale != 1.0 {
        for row in &mut report.per_subset {
            row.max_entry_error = row.max_entry_error.map(|v| v * rescale);
            row.frobenius_error = row.frobenius_error.map(|v| v * rescale);
        }
        report.epsilon_measured *= rescale;
    }

    let mut csv = report.to_csv();
    csv.push_str(&reproducibility_stamp());
    write_text(&out.join("report.csv"), &csv)?;
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    write_text(&out.join("report.json"), &json)?;

    // Decoded product for the first planned subset, when it decoded.
    let first = &report.per_subset[0];
    if !first.declared_failure {
        if let Some(c_hat) =
            acmm::straggler_sim::decode_once(&codec, &a, &b, &params, &first.subset)
                .map_err(CliError::from)?
        {
            let c_hat = if rescale == 1.0 { c_hat } else { c_hat.scale(rescale) };
            let mut buf = Vec::new();
            write_matrix_csv(&c_hat, &mut buf).map_err(CliError::from)?;
            write_text(&out.join("c_hat.csv"), &String::from_utf8(buf).expect("utf8"))?;
        }
    }

    println!(
        "{} subsets decoded, epsilon_measured = {:.3e}, runtime {} ms -> {}",
        report.per_subset.len(),
        report.epsilon_measured,
        report.runtime_ms,
        out.display()
    );
    if report.per_subset.iter().any(|r| r.declared_failure) {
        return Err(CliError::DecodeFailure(
            "at least one subset declared decode failure".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

fn cmd_search(args: SearchArgs, file: &toml::Table) -> CliResult<()> {
    let m = pick(args.m, file, "m", 2);
    let k = pick(args.k, file, "k", 2);
    let workers = pick(args.workers, file, "workers", 3);
    let seeds = pick(args.seeds, file, "seeds", 100);
    let iters = pick(args.iters, file, "iters", 10_000);
    let eps = pick(args.eps, file, "eps", 1e-2);
    let eta = pick(args.eta, file, "eta", 1.0);
    let out = pick(args.out, file, "out", PathBuf::from("search-out"));

    let params = CodeParams::matdot(m, workers, k, eps, eta).map_err(CliError::from)?;
    let opts = if args.no_early_stop {
        SearchOptions::without_early_stop(iters)
    } else {
        SearchOptions::new(iters)
    };
    let outcome = multi_seed_search(&params, seeds, &opts).map_err(CliError::from)?;

    write_text(&out.join("best_code.json"), &outcome.best.to_json())?;
    let mut csv = String::from("seed,loss\n");
    for (seed, loss) in &outcome.per_seed {
        csv.push_str(&format!("{seed},{loss}\n"));
    }
    csv.push_str(&reproducibility_stamp());
    write_text(&out.join("seed_losses.csv"), &csv)?;

    let losses: Vec<f64> = outcome.per_seed.iter().map(|(_, l)| *l).collect();
    let mean = losses.iter().sum::<f64>() / losses.len() as f64;
    println!(
        "best seed {} loss {:.6e} (mean over {} seeds {:.6e}) -> {}",
        outcome.best_seed,
        outcome.best_loss,
        losses.len(),
        mean,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn parse_nsucc_range(text: &str, workers: usize) -> CliResult<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad range: {text}")))?;
        let hi: usize = hi
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad range: {text}")))?;
        if lo == 0 || hi > workers || lo > hi {
            return Err(CliError::Validation(format!("range {text} out of 1..={workers}")));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("bad n_succ: {v}")))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs, file: &toml::Table) -> CliResult<()> {
    let mode = pick(args.mode, file, "mode", "nsucc".to_string());
    let m = pick(args.m, file, "m", 3);
    let p = pick(args.p, file, "p", 1);
    let q = pick(args.q, file, "q", if p == 1 { m } else { m / p.max(1) });
    let workers = pick(args.workers, file, "workers", 6);
    let k = pick(args.k, file, "k", m);
    let eps = pick(args.eps, file, "eps", 1e-2);
    let dim = pick(args.dim, file, "dim", 21);
    let mat_seed = pick(args.mat_seed, file, "mat_seed", 0);
    let seed = pick(args.seed, file, "seed", 0);
    let out = pick(args.out, file, "out", PathBuf::from("sweep-out"));

    let a = random_square(dim, mat_seed);
    let b = random_square(dim, mat_seed + 1);
    let eta = pick_opt(args.eta, file, "eta")
        .unwrap_or_else(|| a.frobenius_norm().max(b.frobenius_norm()) * (1.0 + 1e-12));
    let params = CodeParams::new(m, p, q, workers, k, eps, eta).map_err(CliError::from)?;

    match mode.as_str() {
        "nsucc" => {
            let codec_list = pick(
                args.codecs,
                file,
                "codecs",
                "matdot,eps-matdot-relaxed".to_string(),
            );
            let range_text = pick(args.nsucc, file, "nsucc", format!("{m}..={workers}"));
            let range = parse_nsucc_range(&range_text, workers)?;
            let mut csv = String::from("codec,n_succ,subsets,failures,loss,epsilon_measured\n");
            for name in codec_list.split(',') {
                let codec = parse_codec(name.trim(), &params, 1.0, false)?;
                let rows =
                    sweep_nsucc(&codec, &a, &b, &params, &range, seed).map_err(CliError::from)?;
                for r in rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        name.trim(),
                        r.n_succ,
                        r.subsets_evaluated,
                        r.failures,
                        r.loss.map(|v| v.to_string()).unwrap_or_default(),
                        r.epsilon_measured.map(|v| v.to_string()).unwrap_or_default(),
                    ));
                }
            }
            csv.push_str(&reproducibility_stamp());
            write_text(&out.join("nsucc_sweep.csv"), &csv)?;
            println!("nsucc sweep -> {}", out.join("nsucc_sweep.csv").display());
        }
        "gamma" => {
            let gammas_text = pick(
                args.gammas,
                file,
                "gammas",
                "1,10,100,1000,10000,70000".to_string(),
            );
            let gammas: Vec<f64> = gammas_text
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Validation(format!("bad gamma: {v}")))
                })
                .collect::<CliResult<_>>()?;
            let n_succ = pick(args.nsucc_at, file, "nsucc_at", k);
            let rows =
                gamma_sweep(&a, &b, &params, &gammas, n_succ, seed).map_err(CliError::from)?;
            let mut csv = String::from("gamma,failures,epsilon_measured\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    r.gamma,
                    r.failures,
                    r.epsilon_measured.map(|v| v.to_string()).unwrap_or_default(),
                ));
            }
            csv.push_str(&reproducibility_stamp());
            write_text(&out.join("gamma_sweep.csv"), &csv)?;
            println!("gamma sweep -> {}", out.join("gamma_sweep.csv").display());
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown sweep mode: {other} (expected nsucc | gamma)"
            )))
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn load_dataset(spec: &str, seed: u64) -> CliResult<(Dataset, Dataset)> {
    if spec == "synthetic" {
        let data = synthetic_blobs(seed, 3, 6, 200);
        return Ok(data.split_train_test());
    }
    if let Some(path) = spec.strip_prefix("csv:") {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let data = read_dataset_csv(&mut &bytes[..]).map_err(CliError::from)?;
        return Ok(data.split_train_test());
    }
    if let Some(dir) = spec.strip_prefix("mnist:") {
        let dir = Path::new(dir);
        let open = |name: &str| -> CliResult<Vec<u8>> {
            std::fs::read(dir.join(name))
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
        };
        let ti = open("train-images-idx3-ubyte")?;
        let tl = open("train-labels-idx1-ubyte")?;
        let vi = open("t10k-images-idx3-ubyte")?;
        let vl = open("t10k-labels-idx1-ubyte")?;
        let train_set = read_idx_dataset(&mut &ti[..], &mut &tl[..]).map_err(CliError::from)?;
        let test_set = read_idx_dataset(&mut &vi[..], &mut &vl[..]).map_err(CliError::from)?;
        return Ok((train_set, test_set));
    }
    Err(CliError::Validation(format!(
        "unknown dataset: {spec} (expected synthetic | csv:PATH | mnist:DIR)"
    )))
}

fn cmd_train(args: TrainArgs, file: &toml::Table) -> CliResult<()> {
    let dataset = pick(args.dataset, file, "dataset", "synthetic".to_string());
    let codec_name = pick(args.codec, file, "codec", "eps-matdot".to_string());
    let plan_text = pick(args.plan, file, "plan", "random:0".to_string());
    let lr = pick(args.lr, file, "lr", 0.001);
    let batch = pick(args.batch, file, "batch", 128);
    let iters = pick(args.iters, file, "iters", 2_000);
    let m = pick(args.m, file, "m", 3);
    let workers = pick(args.workers, file, "workers", 6);
    let k = pick(args.k, file, "k", m);
    let eps = pick(args.eps, file, "eps", 1e-2);
    let seed = pick(args.seed, file, "seed", 42);
    let gamma = pick(args.gamma, file, "gamma", 1.0);
    let out = pick(args.out, file, "out", PathBuf::from("train-out"));

    let plan = if plan_text == "worst" {
        TrainPlan::WorstCase
    } else if let Some(s) = plan_text.strip_prefix("random:") {
        TrainPlan::Random {
            seed: s
                .parse()
                .map_err(|_| CliError::Validation(format!("bad plan seed: {plan_text}")))?,
        }
    } else {
        return Err(CliError::Validation(format!(
            "unknown plan: {plan_text} (expected worst | random:SEED)"
        )));
    };

    let probe_params = CodeParams::matdot(m, workers, k, eps, 1.0).map_err(CliError::from)?;
    let codec = match codec_name.as_str() {
        "uncoded" => TrainCodec::Uncoded,
        "truncated" => TrainCodec::TruncatedUncoded,
        other => {
            let inner = parse_codec(other, &probe_params, gamma, args.relaxed)?;
            if matches!(inner, Codec::PolyDotExact { .. } | Codec::PolyDotApprox) {
                return Err(CliError::Validation("training drives p = 1 codecs only".into()));
            }
            if k < m {
                return Err(CliError::Validation(format!(
                    "k = {k} below the decode threshold m = {m}"
                )));
            }
            TrainCodec::Coded(inner)
        }
    };

    let (train_set, test_set) = load_dataset(&dataset, seed)?;
    let cfg = TrainConfig {
        learning_rate: lr,
        batch_size: batch.min(train_set.samples),
        iterations: iters,
        codec,
        plan,
        seed,
        m,
        workers,
        k,
        epsilon: eps,
        eta: pick_opt(args.eta, file, "eta"),
    };
    let report = train(&train_set, &test_set, &cfg).map_err(CliError::from)?;

    let mut csv = report.trace_csv();
    csv.push_str(&format!(
        "# accuracy_train: {}, accuracy_test: {}, skipped_steps: {}\n",
        report.accuracy_train, report.accuracy_test, report.skipped_steps
    ));
    csv.push_str(&reproducibility_stamp());
    write_text(&out.join("metrics.csv"), &csv)?;
    println!(
        "accuracy train {:.4} / test {:.4}, {} skipped steps -> {}",
        report.accuracy_train,
        report.accuracy_test,
        report.skipped_steps,
        out.join("metrics.csv").display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ACMM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("acmm: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let outcome = match cli.command {
        Command::Multiply(args) => cmd_multiply(args, &config.multiply),
        Command::Search(args) => cmd_search(args, &config.search),
        Command::Sweep(args) => cmd_sweep(args, &config.sweep),
        Command::Train(args) => cmd_train(args, &config.train),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acmm: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
