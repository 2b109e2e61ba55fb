//! Ensemble drivers and empirical statistics.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    derive_trial_seed, hermitian_eigenvalues, reduce, sample_ginibre, wishart, Normalization,
    SimulationConfig, SpectralSample,
};
use crate::error::{Error, Result};

/// Above this dimension trials run sequentially and the threaded BLAS keeps
/// the cores busy; below it the per-call work is too small and trials are
/// farmed out to rayon instead. Either way the output is identical.
const PARALLEL_TRIAL_DIM_LIMIT: usize = 512;

fn reduction_trial(
    cfg: &SimulationConfig,
    normalization: Normalization,
    trial_index: usize,
) -> Result<SpectralSample> {
    let seed = derive_trial_seed(cfg.master_seed, trial_index as u64);
    let x = sample_ginibre(cfg.dimension(), cfg.s, seed)?;
    let w = wishart(&x);
    let r = reduce(&w, cfg.n, cfg.k)?;
    let mut eigenvalues = hermitian_eigenvalues(&r)?;
    let divisor = normalization.divisor(cfg);
    if divisor != 1.0 {
        for l in &mut eigenvalues {
            *l /= divisor;
        }
    }
    Ok(SpectralSample {
        eigenvalues,
        normalization,
        config: *cfg,
        trial_index,
    })
}

/// Runs the full reduction ensemble: per trial, sample `X`, form `W = XX*`,
/// reduce, and eigendecompose. Trials are independent streams keyed by
/// `(master_seed, trial_index)` and the result is ordered by trial index, so
/// the outcome does not depend on scheduling.
pub fn run_reduction_ensemble(
    cfg: &SimulationConfig,
    normalization: Normalization,
) -> Result<Vec<SpectralSample>> {
    cfg.validate()?;
    if cfg.dimension() >= PARALLEL_TRIAL_DIM_LIMIT {
        (0..cfg.trials)
            .map(|t| reduction_trial(cfg, normalization, t))
            .collect()
    } else {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| reduction_trial(cfg, normalization, t))
            .collect()
    }
}

/// Operator-norm deviation `|| R/(ks) - I ||` of trial 0 of the configuration.
pub fn norm_deviation(cfg: &SimulationConfig) -> Result<f64> {
    cfg.validate()?;
    let sample = reduction_trial(cfg, Normalization::OverKs, 0)?;
    Ok(sample
        .eigenvalues
        .iter()
        .map(|l| (l - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Numerical rank data for one realization in the rank-deficient regime.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct RankReport {
    /// Eigenvalues above the rank threshold `1e-8 ||R||`.
    pub observed_rank: usize,
    /// The algebraic bound `k^2 s`.
    pub bound: usize,
    /// Eigenvalues below the threshold, i.e. the numerical kernel.
    pub zero_eigenvalues: usize,
    /// Total eigenvalue count `nk`.
    pub dimension: usize,
}

/// Checks the rank bound `rank(R) <= k^2 s` on trial 0. Requires `s < n/k`,
/// otherwise the bound says nothing.
pub fn rank_check(cfg: &SimulationConfig) -> Result<RankReport> {
    cfg.validate()?;
    if cfg.s * cfg.k >= cfg.n {
        return Err(Error::InvalidParameter(format!(
            "rank check needs s < n/k (s = {}, n/k = {})",
            cfg.s,
            cfg.n as f64 / cfg.k as f64
        )));
    }
    let sample = reduction_trial(cfg, Normalization::None, 0)?;
    let norm = sample
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let threshold = 1e-8 * norm;
    let observed_rank = sample
        .eigenvalues
        .iter()
        .filter(|l| l.abs() > threshold)
        .count();
    let dimension = sample.eigenvalues.len();
    Ok(RankReport {
        observed_rank,
        bound: cfg.k * cfg.k * cfg.s,
        zero_eigenvalues: dimension - observed_rank,
        dimension,
    })
}

/// Normalized spectral edge of a Wishart matrix of parameters
/// `(n, s = ceil(cn))`: returns `||W||/n`, whose almost-sure limit is the
/// Bai-Yin edge `(sqrt(c) + 1)^2` since `||W|| ~ (sqrt(n) + sqrt(s))^2`.
/// Requires `n >= 100`; the limit statement is asymptotic.
pub fn baiyin_check(n: usize, c: f64, seed: u64) -> Result<f64> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "Bai-Yin check needs n >= 100, got {n}"
        )));
    }
    if c <= 0.0 || c.is_nan() {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let s = (c * n as f64).ceil() as usize;
    let x = sample_ginibre(n, s, seed)?;
    let w = wishart(&x);
    let eigs = hermitian_eigenvalues(&w)?;
    Ok(eigs.iter().map(|l| l.abs()).fold(0.0, f64::max) / n as f64)
}

/// Spectrum of the fluctuation matrix `Z_n = sqrt(ns) (W/(ns) - I/n)`, whose
/// even moments approach the Catalan numbers (semicircle law). Enforces
/// `s >= 20 n`.
pub fn fluctuation_sample(n: usize, s: usize, seed: u64) -> Result<SpectralSample> {
    if s < 20 * n {
        return Err(Error::InvalidParameter(format!(
            "fluctuation sampling needs s >= 20n, got n = {n}, s = {s}"
        )));
    }
    let cfg = SimulationConfig::new(n, 1, s, seed, 1)?;
    let x = sample_ginibre(n, s, seed)?;
    let mut z: Array2<Complex64> = wishart(&x);
    let ns = (n * s) as f64;
    let scale = ns.sqrt();
    for i in 0..n {
        for j in 0..n {
            let centered = z[[i, j]] / ns
                - if i == j {
                    Complex64::new(1.0 / n as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            z[[i, j]] = centered * scale;
        }
    }
    let eigenvalues = hermitian_eigenvalues(&z)?;
    Ok(SpectralSample {
        eigenvalues,
        normalization: Normalization::None,
        config: cfg,
        trial_index: 0,
    })
}

/// `p`-th empirical moment `(1/d) sum_i lambda_i^p` of one spectrum.
pub fn empirical_moment(sample: &SpectralSample, p: usize) -> f64 {
    let d = sample.eigenvalues.len() as f64;
    sample.eigenvalues.iter().map(|l| l.powi(p as i32)).sum::<f64>() / d
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical distribution
/// of `sorted` (ascending) and a reference CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max((f - (i as f64 + 1.0) / n).abs());
    }
    sup
}

/// Summary statistics of the per-trial minimum eigenvalue.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct MinEigStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub negative_trials: usize,
    pub trials: usize,
}

impl MinEigStats {
    pub fn from_samples(samples: &[SpectralSample]) -> Self {
        let mins: Vec<f64> = samples.iter().map(|s| s.eigenvalues[0]).collect();
        let trials = mins.len();
        MinEigStats {
            min: mins.iter().copied().fold(f64::INFINITY, f64::min),
            max: mins.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: mins.iter().sum::<f64>() / trials as f64,
            negative_trials: mins.iter().filter(|&&m| m < 0.0).count(),
            trials,
        }
    }
}

/// JSON summary of one ensemble run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnsembleSummary {
    pub schema: u32,
    pub config: SimulationConfig,
    pub normalization: Normalization,
    /// Trial means of `(nk)^-1 Tr(M^p)` for `p = 1..=4` of the normalized
    /// matrix.
    pub empirical_moments: Vec<f64>,
    pub min_eig_stats: MinEigStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_distance: Option<f64>,
}

impl EnsembleSummary {
    pub fn new(samples: &[SpectralSample], ks_distance: Option<f64>) -> Self {
        let first = &samples[0];
        let empirical_moments = (1..=4)
            .map(|p| {
                samples.iter().map(|s| empirical_moment(s, p)).sum::<f64>()
                    / samples.len() as f64
            })
            .collect();
        EnsembleSummary {
            schema: 1,
            config: first.config,
            normalization: first.normalization,
            empirical_moments,
            min_eig_stats: MinEigStats::from_samples(samples),
            ks_distance,
        }
    }
}

/// Writes the eigenvalue dump `trial,index,eigenvalue,normalization`.
/// Eigenvalues are printed with 17 significant digits so they round-trip.
pub fn write_eigenvalue_csv<W: std::io::Write>(
    mut out: W,
    samples: &[SpectralSample],
) -> std::io::Result<()> {
    writeln!(out, "trial,index,eigenvalue,normalization")?;
    for sample in samples {
        for (index, l) in sample.eigenvalues.iter().enumerate() {
            writeln!(
                out,
                "{},{},{:.16e},{}",
                sample.trial_index, index, l, sample.normalization
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{exact_trace_moment, MomentQuery};

    #[test]
    fn ensemble_is_deterministic_across_pool_sizes() {
        let cfg = SimulationConfig::new(4, 3, 10, 2024, 6).unwrap();
        let baseline = run_reduction_ensemble(&cfg, Normalization::None).unwrap();
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let run = pool
                .install(|| run_reduction_ensemble(&cfg, Normalization::None))
                .unwrap();
            for (a, b) in baseline.iter().zip(run.iter()) {
                assert_eq!(a.trial_index, b.trial_index);
                assert_eq!(a.eigenvalues, b.eigenvalues, "thread count changed output");
            }
        }
    }

    #[test]
    fn eigenvalues_are_sorted_and_normalized() {
        let cfg = SimulationConfig::new(3, 2, 8, 5, 2).unwrap();
        let plain = run_reduction_ensemble(&cfg, Normalization::None).unwrap();
        let scaled = run_reduction_ensemble(&cfg, Normalization::OverN).unwrap();
        for (a, b) in plain.iter().zip(scaled.iter()) {
            assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
                assert!((x / cfg.n as f64 - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empirical_mean_trace_matches_exact_moment() {
        // quick version of the MC-vs-exact bridge at (2,2,4)
        let cfg = SimulationConfig::new(2, 2, 4, 99, 4000).unwrap();
        let samples = run_reduction_ensemble(&cfg, Normalization::None).unwrap();
        let d = cfg.dimension() as f64;
        for p in 1..=3usize {
            let exact = exact_trace_moment(&MomentQuery::new(2, 2, 4, p).unwrap())
                .unwrap()
                .normalized(1.0);
            let per_trial: Vec<f64> = samples.iter().map(|s| empirical_moment(s, p)).collect();
            let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
            let var = per_trial.iter().map(|m| (m - mean).powi(2)).sum::<f64>()
                / (per_trial.len() - 1) as f64;
            let se = (var / per_trial.len() as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 5.0 * se.max(1e-9 * exact.abs()),
                "p={p}: mean {mean} exact {exact} se {se} (d={d})"
            );
        }
    }

    #[test]
    fn rank_check_bound_holds() {
        let cfg = SimulationConfig::new(50, 2, 10, 7, 1).unwrap();
        let report = rank_check(&cfg).unwrap();
        assert_eq!(report.bound, 40);
        assert!(report.observed_rank <= report.bound);
        assert!(report.zero_eigenvalues >= report.dimension - report.bound);

        // precondition: s < n/k
        let cfg = SimulationConfig::new(8, 2, 10, 7, 1).unwrap();
        assert!(rank_check(&cfg).is_err());
    }

    #[test]
    fn norm_deviation_k1_is_one() {
        // k = 1 means R = 0, so R/(ks) - I = -I
        let cfg = SimulationConfig::new(6, 1, 12, 3, 1).unwrap();
        let dev = norm_deviation(&cfg).unwrap();
        assert!((dev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fluctuation_preconditions() {
        assert!(fluctuation_sample(10, 100, 1).is_err());
        let sample = fluctuation_sample(60, 1600, 1).unwrap();
        assert_eq!(sample.eigenvalues.len(), 60);
        // crude sanity: spectrum should live near [-2, 2]
        assert!(sample.eigenvalues[0] > -3.0 && sample.eigenvalues[59] < 3.0);
    }

    #[test]
    fn baiyin_preconditions() {
        assert!(baiyin_check(50, 1.0, 0).is_err());
        assert!(baiyin_check(100, -1.0, 0).is_err());
    }

    #[test]
    fn ks_statistic_of_exact_uniform() {
        // empirical CDF of {0.5/n, 1.5/n, ...} against F(x) = x: distance 1/(2n)
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn csv_format() {
        let cfg = SimulationConfig::new(1, 2, 2, 11, 1).unwrap();
        let samples = run_reduction_ensemble(&cfg, Normalization::OverN).unwrap();
        let mut buf = Vec::new();
        write_eigenvalue_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("trial,index,eigenvalue,normalization"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,0,"));
        assert!(first.ends_with(",over_n"));
        // 17 significant digits round-trip
        let value: f64 = first.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(value, samples[0].eigenvalues[0]);
    }
}
