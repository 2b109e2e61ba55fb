//! Exact finite-size trace moments of the reduced Wishart matrix and their
//! asymptotic limits.
//!
//! The exact moment is the double sum over permutations and choice functions
//!
//! ```text
//! E Tr(R^p) = sum_{alpha in S_p, f in F_p}
//!             (-1)^{|f^-1(2)|} s^{#alpha} n^{#(gamma^-1 alpha)}
//!             k^{1_{f==1} + #(P_f^-1 alpha)}
//! ```
//!
//! evaluated in exact integer arithmetic: magnitudes reach `s^p n^{p+1} k^{p+1}`
//! and the cancellation between signed terms is exact, so floating point is
//! not an option here. The inner loops only tally signed integer counts per
//! exponent triple; big-integer work happens once per triple at the end.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::combinatorics::{
    self, build_choice_permutation, for_each_noncrossing, ChoiceFunction,
    DEFAULT_SYMMETRIC_CAP, MAX_NONCROSSING, MAX_SYMMETRIC_CAP,
};
use crate::error::{Error, Result};

/// Default cap on `p` for the non-crossing partition sums; larger orders are
/// reachable through [`limit_moment_with_cap`] up to `Catalan(16)` products.
pub const DEFAULT_NC_CAP: usize = 12;

/// Parameters of one exact-moment evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MomentQuery {
    /// First subsystem dimension.
    pub n: u64,
    /// Second subsystem dimension (the reduced factor).
    pub k: u64,
    /// Environment dimension.
    pub s: u64,
    /// Moment order.
    pub p: usize,
}

impl MomentQuery {
    pub fn new(n: u64, k: u64, s: u64, p: usize) -> Result<Self> {
        if n < 1 || k < 1 || s < 1 || p < 1 {
            return Err(Error::InvalidParameter(
                "moment query requires n, k, s, p >= 1".into(),
            ));
        }
        Ok(Self { n, k, s, p })
    }
}

/// An exactly evaluated `E Tr(R^p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMoment {
    pub query: MomentQuery,
    pub value: BigInt,
}

impl ExactMoment {
    /// The normalized moment `E (nk)^-1 Tr((R/d)^p)` for a scale divisor `d`.
    pub fn normalized(&self, divisor: f64) -> f64 {
        let q = &self.query;
        big_to_f64(&self.value) / (divisor.powi(q.p as i32) * (q.n * q.k) as f64)
    }
}

fn big_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().expect("BigInt magnitude exceeds f64 range")
}

/// `E Tr(R^p)` by the full sum over `S_p x F_p`, with the default `p <= 8` cap.
pub fn exact_trace_moment(query: &MomentQuery) -> Result<ExactMoment> {
    exact_trace_moment_with_cap(query, DEFAULT_SYMMETRIC_CAP)
}

/// As [`exact_trace_moment`] with a caller-chosen cap (hard limit `p <= 12`;
/// the pair count is `p! 2^p`).
pub fn exact_trace_moment_with_cap(query: &MomentQuery, cap: usize) -> Result<ExactMoment> {
    let p = query.p;
    if p > cap.min(MAX_SYMMETRIC_CAP) {
        return Err(Error::SizeLimitExceeded {
            what: "exact moment order",
            requested: p,
            cap: cap.min(MAX_SYMMETRIC_CAP),
        });
    }

    // Per choice function: P_f^-1 as an image table, the sign, and the extra
    // k-exponent 1_{f==1}. Built once, shared across the alpha loop.
    struct FData {
        pf_inv: Vec<usize>,
        sign: i64,
        all_ones: usize,
    }
    let f_table: Vec<FData> = ChoiceFunction::all(p)
        .map(|f| FData {
            pf_inv: build_choice_permutation(&f).inverse().images().to_vec(),
            sign: if f.twos_count() % 2 == 0 { 1 } else { -1 },
            all_ones: usize::from(f.is_all_ones()),
        })
        .collect();

    // Signed multiplicity of each exponent triple (#alpha, #(gamma^-1 alpha),
    // k-exponent). Multiplicities stay far below i64 even at the hard cap.
    let dim_a = p + 1;
    let dim_e = p + 2;
    let cell = |ca: usize, cga: usize, e: usize| (ca * dim_a + cga) * dim_e + e;

    let mut alphas: Vec<Vec<usize>> = Vec::new();
    combinatorics::for_each_permutation(p, |images| alphas.push(images.to_vec()));

    let chunk = alphas.len().div_ceil(4 * rayon::current_num_threads()).max(1);
    let counts: Vec<i64> = alphas
        .par_chunks(chunk)
        .map(|chunk| {
            let mut acc = vec![0i64; dim_a * dim_a * dim_e];
            for alpha in chunk {
                let ca = combinatorics::cycle_count_of(p, |i| alpha[i]);
                // gamma^-1 maps i to i+1 mod p
                let cga = combinatorics::cycle_count_of(p, |i| (alpha[i] + 1) % p);
                for fd in &f_table {
                    let e = fd.all_ones
                        + combinatorics::cycle_count_of(p, |i| fd.pf_inv[alpha[i]]);
                    acc[cell(ca, cga, e)] += fd.sign;
                }
            }
            acc
        })
        .reduce(
            || vec![0i64; dim_a * dim_a * dim_e],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let pow_table = |base: u64, up_to: usize| -> Vec<BigInt> {
        let mut t = Vec::with_capacity(up_to + 1);
        t.push(BigInt::from(1u64));
        for i in 1..=up_to {
            let prev = t[i - 1].clone();
            t.push(prev * base);
        }
        t
    };
    let s_pow = pow_table(query.s, p);
    let n_pow = pow_table(query.n, p + 1);
    let k_pow = pow_table(query.k, p + 1);

    let mut value = BigInt::from(0);
    for ca in 1..=p {
        for cga in 1..=p {
            for e in 1..=p + 1 {
                let c = counts[cell(ca, cga, e)];
                if c != 0 {
                    value += BigInt::from(c) * &s_pow[ca] * &n_pow[cga] * &k_pow[e];
                }
            }
        }
    }
    Ok(ExactMoment {
        query: *query,
        value,
    })
}

/// The printed closed forms for the first two moments:
/// `E Tr R = nk(k-1)s` and
/// `E Tr R^2 = (k-2)[(ks)^2 n + ks n^2] + nks^2 + (nk)^2 s`.
pub fn closed_form_moment(query: &MomentQuery) -> Result<ExactMoment> {
    let (n, k, s) = (
        BigInt::from(query.n),
        BigInt::from(query.k),
        BigInt::from(query.s),
    );
    let value = match query.p {
        1 => &n * &k * (&k - 1) * &s,
        2 => {
            let ks = &k * &s;
            (&k - 2) * (&ks * &ks * &n + &ks * &n * &n) + &n * &k * &s * &s + (&n * &k).pow(2) * &s
        }
        p => {
            return Err(Error::InvalidParameter(format!(
                "closed forms exist for p in {{1, 2}}, got p = {p}"
            )))
        }
    };
    Ok(ExactMoment {
        query: *query,
        value,
    })
}

/// Asymptotic regime for the limiting spectral law of the reduced matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `n -> inf`, `k ~ tn`, `s ~ cnk`; moments taken of `R/(ks)`.
    Balanced,
    /// `n` fixed, `k -> inf`, `s ~ cnk`; moments taken of `R/(ks)`.
    UnbalancedFirst,
    /// `k` fixed, `n -> inf`, `s ~ cnk`; moments taken of `R/n`.
    UnbalancedSecond,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Balanced => "balanced",
            Regime::UnbalancedFirst => "unbalanced_first",
            Regime::UnbalancedSecond => "unbalanced_second",
        };
        f.write_str(s)
    }
}

/// Free cumulant of the limiting law in the second unbalanced regime:
/// `kappa_p = c[(1-k)^p + k^2 - 1]`. `k` is a real parameter here.
pub fn free_cumulant(k: f64, c: f64, p: usize) -> f64 {
    c * ((1.0 - k).powi(p as i32) + k * k - 1.0)
}

/// Limit of the normalized moments of the reduced matrix.
///
/// The normalization is fixed per regime: `R/(ks)` in the balanced and first
/// unbalanced regimes (where the limit is the Dirac mass at 1, so every moment
/// is 1), and `R/n` in the second unbalanced regime, where the `p`-th moment
/// is the non-crossing partition sum `sum_{pi in NC(p)} prod_b kappa_{|b|}`.
pub fn limit_moment(regime: Regime, k: f64, c: f64, p: usize) -> Result<f64> {
    limit_moment_with_cap(regime, k, c, p, DEFAULT_NC_CAP)
}

/// As [`limit_moment`] with an explicit order cap (hard limit `p <= 16`).
pub fn limit_moment_with_cap(regime: Regime, k: f64, c: f64, p: usize, cap: usize) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidParameter("moment order must be >= 1".into()));
    }
    if c <= 0.0 || c.is_nan() {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    match regime {
        Regime::Balanced | Regime::UnbalancedFirst => Ok(1.0),
        Regime::UnbalancedSecond => {
            if k < 2.0 || k.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "second unbalanced regime requires k >= 2, got {k}"
                )));
            }
            if p > cap.min(MAX_NONCROSSING) {
                return Err(Error::SizeLimitExceeded {
                    what: "limit moment order",
                    requested: p,
                    cap: cap.min(MAX_NONCROSSING),
                });
            }
            let cumulants: Vec<f64> = (1..=p).map(|q| free_cumulant(k, c, q)).collect();
            nc_partition_sum(&cumulants, p)
        }
    }
}

/// Moment-cumulant formula `m_p = sum_{pi in NC(p)} prod_{b in pi} kappa_{|b|}`.
/// `cumulants[q-1]` must hold `kappa_q` for `q <= p`.
pub fn moments_from_cumulants(cumulants: &[f64], p: usize) -> Result<f64> {
    moments_from_cumulants_with_cap(cumulants, p, DEFAULT_NC_CAP)
}

/// As [`moments_from_cumulants`] with an explicit order cap (hard limit 16).
pub fn moments_from_cumulants_with_cap(cumulants: &[f64], p: usize, cap: usize) -> Result<f64> {
    if cumulants.len() < p {
        return Err(Error::InsufficientCumulants {
            needed: p,
            got: cumulants.len(),
        });
    }
    if p > cap.min(MAX_NONCROSSING) {
        return Err(Error::SizeLimitExceeded {
            what: "moment-cumulant order",
            requested: p,
            cap: cap.min(MAX_NONCROSSING),
        });
    }
    nc_partition_sum(cumulants, p)
}

fn nc_partition_sum(cumulants: &[f64], p: usize) -> Result<f64> {
    let mut total = 0.0;
    for_each_noncrossing(p, |blocks| {
        let mut prod = 1.0;
        for b in blocks {
            prod *= cumulants[b.len() - 1];
        }
        total += prod;
    })?;
    Ok(total)
}
