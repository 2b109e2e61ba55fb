//! Command-line surface for the reduction-criterion laboratory.
//!
//! Every computation is exposed as a reproducible subcommand with CSV/JSON
//! output. File outputs get a sibling `*.manifest.json` recording the full
//! parameter set; `replay` re-executes any manifest and reproduces the files
//! byte for byte (Monte Carlo included — seeds are part of the manifest).
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input or guard.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use reduction_lab::limitlaw::{threshold_ppt, CompoundFreePoissonLaw};
use reduction_lab::moments::{closed_form_moment, exact_trace_moment, MomentQuery};
use reduction_lab::randmat::{
    ks_statistic, run_reduction_ensemble, write_eigenvalue_csv, EnsembleSummary, Normalization,
    SimulationConfig, SpectralSample,
};
use reduction_lab::verify::{run_suite, Suite};
use reduction_lab::Error;

#[derive(Parser)]
#[command(
    name = "reduction-lab",
    version,
    about = "Exact moments, limiting spectra, and entanglement thresholds for reduced Wishart matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Exact trace moments E Tr(R^p) as exact decimal integers.
    Moments(MomentsArgs),
    /// Density of the limiting law on a grid, plus its support report.
    Density(DensityArgs),
    /// Threshold curve table over a range of k.
    Thresholds(ThresholdsArgs),
    /// Monte Carlo eigenvalue histogram of R/n, optionally against the
    /// theoretical density.
    Simulate(SimulateArgs),
    /// Run the module invariant suites.
    Verify(VerifyArgs),
    /// Re-execute a recorded manifest, reproducing its outputs exactly.
    Replay(ReplayArgs),
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct MomentsArgs {
    /// First subsystem dimension.
    #[arg(long)]
    n: u64,
    /// Second subsystem dimension.
    #[arg(long)]
    k: u64,
    /// Environment dimension.
    #[arg(long)]
    s: u64,
    /// Compute E Tr(R^p) for p = 1..=p_max.
    #[arg(long = "p-max")]
    p_max: usize,
    /// Use the printed closed forms (p <= 2) instead of the full sum.
    #[arg(long)]
    #[serde(default)]
    closed: bool,
    /// Write the CSV here as well as to stdout.
    #[arg(long)]
    #[serde(default)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct DensityArgs {
    /// Second subsystem dimension (real, >= 2).
    #[arg(long)]
    k: f64,
    /// Environment scaling constant (> 0).
    #[arg(long)]
    c: f64,
    /// Left edge of the grid; defaults to 10% below the support.
    #[arg(long = "x-min")]
    #[serde(default)]
    x_min: Option<f64>,
    /// Right edge of the grid; defaults to 10% above the support.
    #[arg(long = "x-max")]
    #[serde(default)]
    x_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Write the (x, density) CSV here.
    #[arg(long)]
    #[serde(default)]
    out: Option<PathBuf>,
    /// Write the JSON support report here (it always goes to stdout).
    #[arg(long)]
    #[serde(default)]
    report: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct ThresholdsArgs {
    #[arg(long = "k-min")]
    k_min: f64,
    #[arg(long = "k-max")]
    k_max: f64,
    #[arg(long)]
    step: f64,
    /// Permit 1 < k < 2 rows (threshold columns are left empty there).
    #[arg(long)]
    #[serde(default)]
    diagnostic: bool,
    /// Write the CSV here as well as to stdout.
    #[arg(long)]
    #[serde(default)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct SimulateArgs {
    /// First subsystem dimension.
    #[arg(long)]
    n: usize,
    /// Second subsystem dimension.
    #[arg(long)]
    k: usize,
    /// Environment scaling: s = round(c n k).
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Histogram bin count.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Add the theoretical density column and the KS distance.
    #[arg(long = "compare-density")]
    #[serde(default)]
    compare_density: bool,
    /// Prefix for -eigenvalues.csv, -histogram.csv, -summary.json outputs.
    #[arg(long = "out-prefix")]
    #[serde(default)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct VerifyArgs {
    /// One of combinatorics, moments, limitlaw, randmat, all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Write the JSON report here.
    #[arg(long)]
    #[serde(default)]
    report: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ReplayArgs {
    /// Path to a *.manifest.json written by a previous run.
    #[arg(long)]
    manifest: PathBuf,
}

/// The replayable parameter set of one run.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum ManifestParams {
    Moments(MomentsArgs),
    Density(DensityArgs),
    Thresholds(ThresholdsArgs),
    Simulate(SimulateArgs),
    Verify(VerifyArgs),
}

#[derive(Serialize, Deserialize)]
struct RunManifest {
    schema: u32,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    #[serde(flatten)]
    params: ManifestParams,
    outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new(params: ManifestParams, master_seed: Option<u64>, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            schema: 1,
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            params,
            outputs,
        }
    }

    fn write_alongside(&self, primary: &Path) -> anyhow::Result<PathBuf> {
        let mut name = primary.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = primary.with_file_name(name);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Round-trippable float formatting: 17 significant digits.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_moments(args: &MomentsArgs) -> anyhow::Result<()> {
    if args.p_max < 1 {
        bail!(Error::InvalidParameter("--p-max must be >= 1".into()));
    }
    let mut csv = String::from("p,moment\n");
    for p in 1..=args.p_max {
        let query = MomentQuery::new(args.n, args.k, args.s, p)?;
        let moment = if args.closed {
            closed_form_moment(&query)?
        } else {
            exact_trace_moment(&query)?
        };
        csv.push_str(&format!("{},{}\n", p, moment.value));
    }
    print!("{csv}");
    if let Some(out) = &args.out {
        write_text(out, &csv)?;
        RunManifest::new(ManifestParams::Moments(args.clone()), None, vec![out.clone()])
            .write_alongside(out)?;
    }
    Ok(())
}

fn cmd_density(args: &DensityArgs) -> anyhow::Result<()> {
    let law = CompoundFreePoissonLaw::new(args.k, args.c)?;
    if args.points < 2 {
        bail!(Error::InvalidParameter("--points must be >= 2".into()));
    }
    let report = law.classify();
    let report_json = serde_json::json!({
        "schema": 1,
        "k": args.k,
        "c": args.c,
        "intervals": report.intervals,
        "atom_mass": report.atom_mass,
        "region": report.region.to_string(),
        "positive_support": report.positive_support,
    });
    let report_text = serde_json::to_string_pretty(&report_json)?;
    println!("{report_text}");

    let (x_min, x_max) = match (args.x_min, args.x_max) {
        (Some(a), Some(b)) if a < b => (a, b),
        (Some(_), Some(_)) => bail!(Error::InvalidParameter("--x-min must be < --x-max".into())),
        _ => {
            let lo = report.intervals.first().map(|i| i.0);
            let hi = report.intervals.last().map(|i| i.1);
            let (lo, hi) = match (lo, hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => bail!(Error::InvalidParameter(
                    "no support intervals available; pass --x-min/--x-max explicitly".into()
                )),
            };
            let margin = 0.1 * (hi - lo).max(1e-6);
            (
                args.x_min.unwrap_or(lo - margin),
                args.x_max.unwrap_or(hi + margin),
            )
        }
    };

    let mut csv = String::from("x,density\n");
    for j in 0..args.points {
        let x = x_min + (x_max - x_min) * j as f64 / (args.points - 1) as f64;
        let rho = law.density(x)?;
        csv.push_str(&format!("{},{}\n", fmt_float(x), fmt_float(rho)));
    }
    if let Some(out) = &args.out {
        write_text(out, &csv)?;
        let mut outputs = vec![out.clone()];
        if let Some(report_path) = &args.report {
            write_text(report_path, &report_text)?;
            outputs.push(report_path.clone());
        }
        RunManifest::new(ManifestParams::Density(args.clone()), None, outputs)
            .write_alongside(out)?;
    } else if let Some(report_path) = &args.report {
        write_text(report_path, &report_text)?;
        RunManifest::new(
            ManifestParams::Density(args.clone()),
            None,
            vec![report_path.clone()],
        )
        .write_alongside(report_path)?;
    } else {
        print!("{csv}");
    }
    Ok(())
}

fn cmd_thresholds(args: &ThresholdsArgs) -> anyhow::Result<()> {
    let floor = if args.diagnostic { 1.0 } else { 2.0 };
    if args.k_min < floor - 1e-12 || args.k_min.is_nan() {
        bail!(Error::InvalidParameter(format!(
            "--k-min must be >= {floor} (got {}); use --diagnostic for 1 < k < 2",
            args.k_min
        )));
    }
    if args.k_max < args.k_min || args.step <= 0.0 || args.step.is_nan() {
        bail!(Error::InvalidParameter(
            "need --k-max >= --k-min and --step > 0".into()
        ));
    }
    let mut csv = String::from("k,inv_k2,c1,c0,c2_red,c_ppt\n");
    let steps = ((args.k_max - args.k_min) / args.step).round() as usize;
    for i in 0..=steps {
        let k = args.k_min + i as f64 * args.step;
        if k > args.k_max + 1e-12 {
            break;
        }
        let c0 = reduction_lab::limitlaw::curve_c0(k)?;
        let c1 = reduction_lab::limitlaw::curve_c1(k);
        let c2 = reduction_lab::limitlaw::curve_c2(k);
        let ppt = if k >= 2.0 {
            fmt_float(threshold_ppt(k))
        } else {
            String::new()
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(k),
            fmt_float(1.0 / (k * k)),
            fmt_float(c1),
            fmt_float(c0),
            fmt_float(c2),
            ppt
        ));
    }
    print!("{csv}");
    if let Some(out) = &args.out {
        write_text(out, &csv)?;
        RunManifest::new(ManifestParams::Thresholds(args.clone()), None, vec![out.clone()])
            .write_alongside(out)?;
    }
    Ok(())
}

fn histogram_csv(
    samples: &[SpectralSample],
    bins: usize,
    law: Option<&CompoundFreePoissonLaw>,
) -> anyhow::Result<String> {
    let mut all: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (all[0], *all.last().unwrap());
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let width = span / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &all {
        let mut idx = ((x - lo) / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    let total = all.len() as f64;
    let mut csv = String::from(if law.is_some() {
        "bin_left,bin_right,count,empirical_density,theory_density\n"
    } else {
        "bin_left,bin_right,count,empirical_density\n"
    });
    for (i, &count) in counts.iter().enumerate() {
        let left = lo + i as f64 * width;
        let right = left + width;
        let empirical = count as f64 / (total * width);
        match law {
            Some(law) => {
                let theory = law.density(0.5 * (left + right))?;
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_float(left),
                    fmt_float(right),
                    count,
                    fmt_float(empirical),
                    fmt_float(theory)
                ));
            }
            None => {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_float(left),
                    fmt_float(right),
                    count,
                    fmt_float(empirical)
                ));
            }
        }
    }
    Ok(csv)
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let s = (args.c * (args.n * args.k) as f64).round().max(1.0) as usize;
    let cfg = SimulationConfig::new(args.n, args.k, s, args.seed, args.trials)?;
    if args.bins < 1 {
        bail!(Error::InvalidParameter("--bins must be >= 1".into()));
    }
    let law = if args.compare_density {
        Some(CompoundFreePoissonLaw::new(args.k as f64, args.c)?)
    } else {
        None
    };
    let samples = run_reduction_ensemble(&cfg, Normalization::OverN)?;

    let ks = match &law {
        Some(law) => {
            let table = law.cdf_table(400)?;
            let mut pooled: Vec<f64> = samples
                .iter()
                .flat_map(|s| s.eigenvalues.iter().copied())
                .collect();
            pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(ks_statistic(&pooled, |x| table.eval(x)))
        }
        None => None,
    };
    let summary = EnsembleSummary::new(&samples, ks);
    let summary_text = serde_json::to_string_pretty(&summary)?;
    println!("{summary_text}");

    let histogram = histogram_csv(&samples, args.bins, law.as_ref())?;
    if let Some(prefix) = &args.out_prefix {
        let prefix_str = prefix.to_string_lossy();
        let eig_path = PathBuf::from(format!("{prefix_str}-eigenvalues.csv"));
        let hist_path = PathBuf::from(format!("{prefix_str}-histogram.csv"));
        let summary_path = PathBuf::from(format!("{prefix_str}-summary.json"));
        let mut eig_file = std::io::BufWriter::new(
            std::fs::File::create(&eig_path)
                .with_context(|| format!("creating {}", eig_path.display()))?,
        );
        write_eigenvalue_csv(&mut eig_file, &samples)?;
        eig_file.flush()?;
        write_text(&hist_path, &histogram)?;
        write_text(&summary_path, &summary_text)?;
        RunManifest::new(
            ManifestParams::Simulate(args.clone()),
            Some(args.seed),
            vec![eig_path.clone(), hist_path, summary_path],
        )
        .write_alongside(&eig_path)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<i32> {
    let suite: Suite = args.suite.parse()?;
    let checks = run_suite(suite);
    let mut failed = 0usize;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {} ({} ms) — {}", check.name, check.millis, check.details);
        if !check.passed {
            failed += 1;
        }
    }
    println!(
        "{} checks, {} failed (suite: {})",
        checks.len(),
        failed,
        args.suite
    );
    if let Some(report) = &args.report {
        let json = serde_json::json!({
            "schema": 1,
            "suite": args.suite,
            "checks": checks,
            "failed": failed,
        });
        write_text(report, &serde_json::to_string_pretty(&json)?)?;
        RunManifest::new(ManifestParams::Verify(args.clone()), None, vec![report.clone()])
            .write_alongside(report)?;
    }
    Ok(if failed > 0 { 1 } else { 0 })
}

fn cmd_replay(args: &ReplayArgs) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
    if manifest.schema != 1 {
        bail!(Error::InvalidParameter(format!(
            "unsupported manifest schema {}",
            manifest.schema
        )));
    }
    match manifest.params {
        ManifestParams::Moments(args) => cmd_moments(&args).map(|_| 0),
        ManifestParams::Density(args) => cmd_density(&args).map(|_| 0),
        ManifestParams::Thresholds(args) => cmd_thresholds(&args).map(|_| 0),
        ManifestParams::Simulate(args) => cmd_simulate(&args).map(|_| 0),
        ManifestParams::Verify(args) => cmd_verify(&args),
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var("REDUCTION_LAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Moments(args) => cmd_moments(args).map(|_| 0),
        Command::Density(args) => cmd_density(args).map(|_| 0),
        Command::Thresholds(args) => cmd_thresholds(args).map(|_| 0),
        Command::Simulate(args) => cmd_simulate(args).map(|_| 0),
        Command::Verify(args) => cmd_verify(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
