//! Seeded Monte Carlo engine: Ginibre/Wishart sampling, partial traces,
//! reduction maps, partial transpose, Hermitian spectra, and the empirical
//! statistics used to validate the analytic modules.
//!
//! Determinism contract: every trial derives its own RNG stream from
//! `(master_seed, trial_index)`, so scheduling and worker count cannot change
//! any output; results are assembled ordered by trial index. The generator is
//! ChaCha12 seeded through a SplitMix64 mix, normals drawn by rand_distr's
//! ziggurat; bit-exactness holds within one build of the crate.

mod ensemble;
mod linalg;

pub use ensemble::{
    baiyin_check, empirical_moment, fluctuation_sample, ks_statistic, norm_deviation, rank_check,
    run_reduction_ensemble, write_eigenvalue_csv, EnsembleSummary, MinEigStats, RankReport,
};
pub use linalg::{
    choi_composed_map, choi_reduction_map, hermitian_eigenpairs, hermitian_eigenvalues, kron,
    matrix_trace, partial_trace_first, partial_trace_second, partial_transpose, reduce,
    reduce_first, sample_ginibre, wishart,
};

use crate::error::{Error, Result};

/// Hard guard on the sampled Ginibre matrix size (`nk * s` complex entries).
pub const MAX_SAMPLE_ENTRIES: usize = 100_000_000;

/// Parameters of one reduction-ensemble simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SimulationConfig {
    /// First subsystem dimension.
    pub n: usize,
    /// Second subsystem dimension (reduced factor).
    pub k: usize,
    /// Environment dimension.
    pub s: usize,
    pub master_seed: u64,
    pub trials: usize,
}

impl SimulationConfig {
    pub fn new(n: usize, k: usize, s: usize, master_seed: u64, trials: usize) -> Result<Self> {
        let cfg = Self {
            n,
            k,
            s,
            master_seed,
            trials,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 || self.s < 1 || self.trials < 1 {
            return Err(Error::InvalidParameter(
                "simulation dimensions and trial count must be >= 1".into(),
            ));
        }
        let entries = self
            .n
            .checked_mul(self.k)
            .and_then(|nk| nk.checked_mul(self.s))
            .ok_or_else(|| Error::InvalidParameter("dimension overflow".into()))?;
        if entries > MAX_SAMPLE_ENTRIES {
            return Err(Error::SizeLimitExceeded {
                what: "Ginibre sample entries (nk * s)",
                requested: entries,
                cap: MAX_SAMPLE_ENTRIES,
            });
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.n * self.k
    }
}

/// Scaling applied to eigenvalues before they are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Divide by `n`: the second unbalanced regime.
    OverN,
    /// Divide by `ks`: the balanced and first unbalanced regimes.
    OverKs,
}

impl Normalization {
    pub fn divisor(&self, cfg: &SimulationConfig) -> f64 {
        match self {
            Normalization::None => 1.0,
            Normalization::OverN => cfg.n as f64,
            Normalization::OverKs => (cfg.k * cfg.s) as f64,
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Normalization::None => "none",
            Normalization::OverN => "over_n",
            Normalization::OverKs => "over_ks",
        };
        f.write_str(s)
    }
}

/// Sorted spectrum of one realization plus its generation metadata.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SpectralSample {
    /// Ascending real eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub normalization: Normalization,
    pub config: SimulationConfig,
    pub trial_index: usize,
}

/// SplitMix64 step, the standard seed expander.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-trial stream seed: two SplitMix64 rounds over `(master, trial)`.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ trial_index.wrapping_mul(0x9E3779B97F4A7C15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_guard() {
        assert!(SimulationConfig::new(1000, 3, 40000, 0, 1).is_err());
        assert!(SimulationConfig::new(1000, 3, 6000, 0, 1).is_ok());
        assert!(SimulationConfig::new(0, 3, 5, 0, 1).is_err());
    }

    #[test]
    fn derived_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for master in [0u64, 1, 42, u64::MAX] {
            for trial in 0..100 {
                assert!(seen.insert(derive_trial_seed(master, trial)));
            }
        }
    }
}
