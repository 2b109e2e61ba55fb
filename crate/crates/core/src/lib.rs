//! Reduction-criterion laboratory for Wishart random matrices.
//!
//! A Wishart matrix `W = XX*` on `C^n ⊗ C^k` models an unnormalized random
//! bipartite quantum state; applying the reduction map to its second factor
//! gives `R = W_A ⊗ I_k - W`, whose positivity is the reduction entanglement
//! criterion. This crate computes, exactly and asymptotically, everything the
//! criterion needs at scale:
//!
//! - [`combinatorics`]: permutations, non-crossing partitions, geodesic
//!   structure, and the choice permutation `P_f` with its cycle-count
//!   formulas.
//! - [`moments`]: exact integer `E Tr(R^p)` by a sum over `S_p x {1,2}^p`,
//!   printed closed forms for `p = 1, 2`, and the limiting moments in the
//!   three asymptotic regimes.
//! - [`limitlaw`]: the compound free Poisson limit `mu_{k,c}` — Cauchy
//!   transform, density by Stieltjes inversion, atom, support endpoints,
//!   six-region phase classification, and the threshold curves
//!   (`c_red` vs `c_PPT`).
//! - [`randmat`]: a seeded, reproducible Monte Carlo engine (Ginibre and
//!   Wishart sampling, partial traces, reductions, partial transpose,
//!   Hermitian spectra) validating every analytic result.
//! - [`verify`]: the module invariants bundled as runnable check suites.

pub mod combinatorics;
pub mod error;
pub mod limitlaw;
pub mod moments;
pub mod randmat;
pub mod verify;

pub use error::{Error, Result};
