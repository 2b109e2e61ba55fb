//! Self-check suites: each module's documented invariants packaged as named
//! pass/fail checks, shared between the CLI `verify` subcommand and the test
//! suite. Monte Carlo checks here run at desk scale; the full-size
//! configurations live in the acceptance tests.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;

use crate::combinatorics::{
    all_permutations, build_choice_permutation, catalan_numbers, enumerate_noncrossing,
    for_each_noncrossing, pf_cycle_counts, pf_inverse_alpha_cycles, ChoiceFunction, Permutation,
};
use crate::error::Error;
use crate::limitlaw::{
    curve_c0, curve_c1, curve_c2, curve_intersection_k0, descartes_all_positive, threshold_ppt,
    threshold_red, CompoundFreePoissonLaw,
};
use crate::moments::{
    closed_form_moment, exact_trace_moment, free_cumulant, limit_moment, moments_from_cumulants,
    MomentQuery, Regime,
};
use crate::randmat::{
    choi_composed_map, choi_reduction_map, empirical_moment, hermitian_eigenvalues, ks_statistic,
    kron, matrix_trace, partial_trace_second, reduce, run_reduction_ensemble, sample_ginibre,
    wishart, Normalization, SimulationConfig,
};

/// Outcome of one named invariant check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub millis: u128,
}

fn run_check(name: &'static str, body: impl FnOnce() -> Result<String, String>) -> Check {
    let start = Instant::now();
    let outcome = body();
    let millis = start.elapsed().as_millis();
    match outcome {
        Ok(details) => Check {
            name,
            passed: true,
            details,
            millis,
        },
        Err(details) => Check {
            name,
            passed: false,
            details,
            millis,
        },
    }
}

macro_rules! vensure {
    ($cond:expr, $($arg:tt)*) => {
        if $cond {
        } else {
            return Err(format!($($arg)*));
        }
    };
}

/// Which suite to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Combinatorics,
    Moments,
    Limitlaw,
    Randmat,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "combinatorics" => Ok(Suite::Combinatorics),
            "moments" => Ok(Suite::Moments),
            "limitlaw" => Ok(Suite::Limitlaw),
            "randmat" => Ok(Suite::Randmat),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Combinatorics => combinatorics_suite(),
        Suite::Moments => moments_suite(),
        Suite::Limitlaw => limitlaw_suite(),
        Suite::Randmat => randmat_suite(),
        Suite::All => {
            let mut checks = combinatorics_suite();
            checks.extend(moments_suite());
            checks.extend(limitlaw_suite());
            checks.extend(randmat_suite());
            checks
        }
    }
}

pub fn combinatorics_suite() -> Vec<Check> {
    vec![
        run_check("nc_counts_are_catalan", || {
            let catalan = catalan_numbers(10);
            for (p, &expected) in catalan.iter().enumerate().skip(1) {
                let mut count = 0u64;
                for_each_noncrossing(p, |_| count += 1).map_err(|e| e.to_string())?;
                vensure!(count == expected, "NC({p}) = {count}, want {expected}");
            }
            Ok("|NC(p)| = Catalan(p) for p <= 10".into())
        }),
        run_check("choice_permutations_geodesic", || {
            for p in 1..=7 {
                let gamma = Permutation::full_cycle(p);
                for f in ChoiceFunction::all(p) {
                    let pf = build_choice_permutation(&f);
                    vensure!(pf.is_geodesic(), "P_f not geodesic at p={p}, f={:?}", f.values());
                    let (cp, cpg) = pf_cycle_counts(&f);
                    vensure!(cp == pf.cycle_count(), "#P_f mismatch at p={p}");
                    vensure!(
                        cpg == pf.inverse().compose(&gamma).cycle_count(),
                        "#(P_f^-1 gamma) mismatch at p={p}"
                    );
                }
            }
            Ok("all P_f geodesic with matching closed-form counts, p <= 7".into())
        }),
        run_check("geodesic_cycle_formula_exhaustive", || {
            let mut pairs = 0usize;
            for p in 1..=6 {
                for alpha in all_permutations(p, 8).map_err(|e| e.to_string())? {
                    if !alpha.is_geodesic() {
                        continue;
                    }
                    for f in ChoiceFunction::all(p) {
                        let direct = build_choice_permutation(&f)
                            .inverse()
                            .compose(&alpha)
                            .cycle_count();
                        let formula =
                            pf_inverse_alpha_cycles(&f, &alpha).map_err(|e| e.to_string())?;
                        vensure!(
                            direct == formula,
                            "formula {formula} != direct {direct} at p={p}"
                        );
                        pairs += 1;
                    }
                }
            }
            Ok(format!("formula = direct count on {pairs} geodesic (alpha, f) pairs"))
        }),
        run_check("non_geodesic_counterexample", || {
            // alpha = (1 3)(2 4), f = (1,2,1,2): the formula expression
            // 4-2+2(1+0)+1-2-0 evaluates to 3, while P_f^-1 alpha is the
            // lone transposition (1 3) — a single non-trivial cycle. With
            // f == 2 the clash is convention-free: a 4-cycle (count 1)
            // against formula value 3. Both must be rejected as
            // non-geodesic.
            let alpha = Permutation::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap();
            let f = ChoiceFunction::new(vec![1, 2, 1, 2]).unwrap();
            let composed = build_choice_permutation(&f).inverse().compose(&alpha);
            let expected = Permutation::from_cycles(4, &[&[1, 3]]).unwrap();
            vensure!(composed == expected, "P_f^-1 alpha is {composed:?}, want (1 3)");
            let nontrivial = composed.cycles().iter().filter(|c| c.len() > 1).count();
            vensure!(nontrivial == 1, "non-trivial cycle count {nontrivial}, want 1");
            let blocks_all_ones = alpha
                .cycles()
                .iter()
                .filter(|b| b.iter().all(|&i| f.values()[i] == 1))
                .count();
            let formula_value = 4 - f.ones_count() + 2 * blocks_all_ones + 1 - 2;
            vensure!(formula_value == 3, "formula value is {formula_value}, want 3");
            vensure!(
                matches!(pf_inverse_alpha_cycles(&f, &alpha), Err(Error::NonGeodesic)),
                "non-geodesic input was not rejected"
            );
            let f_all_two = ChoiceFunction::new(vec![2; 4]).unwrap();
            let direct = build_choice_permutation(&f_all_two)
                .inverse()
                .compose(&alpha)
                .cycle_count();
            vensure!(direct == 1, "f == 2 direct count is {direct}, want 1");
            vensure!(
                matches!(pf_inverse_alpha_cycles(&f_all_two, &alpha), Err(Error::NonGeodesic)),
                "non-geodesic input was not rejected for f == 2"
            );
            Ok("formula value 3 vs true value 1; non-geodesic inputs rejected".into())
        }),
        run_check("nc_permutation_bijection", || {
            for p in 1..=8 {
                let parts = enumerate_noncrossing(p).map_err(|e| e.to_string())?;
                let mut seen = std::collections::HashSet::new();
                for part in &parts {
                    let perm = part.to_permutation();
                    vensure!(perm.is_geodesic(), "image not geodesic at p={p}");
                    vensure!(
                        perm.cycle_count() == part.block_count(),
                        "cycle/block count mismatch at p={p}"
                    );
                    vensure!(seen.insert(perm.images().to_vec()), "map not injective at p={p}");
                    let blocks: Vec<Vec<usize>> = perm
                        .cycle_partition()
                        .into_iter()
                        .map(|b| b.into_iter().map(|e| e + 1).collect())
                        .collect();
                    vensure!(blocks.as_slice() == part.blocks(), "round trip failed at p={p}");
                }
            }
            Ok("t(pi) injective, geodesic, cycle partition round-trips, p <= 8".into())
        }),
    ]
}

pub fn moments_suite() -> Vec<Check> {
    vec![
        run_check("closed_form_identity_grid", || {
            for n in 1..=5u64 {
                for k in 1..=5u64 {
                    for s in 1..=5u64 {
                        for p in 1..=2usize {
                            let q = MomentQuery::new(n, k, s, p).unwrap();
                            let exact = exact_trace_moment(&q).map_err(|e| e.to_string())?;
                            let closed = closed_form_moment(&q).map_err(|e| e.to_string())?;
                            vensure!(
                                exact.value == closed.value,
                                "mismatch at n={n} k={k} s={s} p={p}: {} vs {}",
                                exact.value,
                                closed.value
                            );
                        }
                    }
                }
            }
            Ok("exact = closed form on the full {1..5}^3 grid, p in {1,2}".into())
        }),
        run_check("k1_annihilation", || {
            for n in [1u64, 2, 5] {
                for s in [1u64, 3, 5] {
                    for p in 1..=5usize {
                        let q = MomentQuery::new(n, 1, s, p).unwrap();
                        let m = exact_trace_moment(&q).map_err(|e| e.to_string())?;
                        vensure!(
                            m.value == num_bigint::BigInt::from(0),
                            "E Tr R^{p} != 0 at n={n}, k=1, s={s}"
                        );
                    }
                }
            }
            Ok("E Tr(R^p) = 0 whenever k = 1".into())
        }),
        run_check("second_unbalanced_limit_consistency", || {
            let (k, c) = (3u64, 2.0);
            for p in 1..=5usize {
                let limit = limit_moment(Regime::UnbalancedSecond, k as f64, c, p)
                    .map_err(|e| e.to_string())?;
                let mut errors = Vec::new();
                for n in [50u64, 100, 200] {
                    let s = (c * (n * k) as f64).round() as u64;
                    let q = MomentQuery::new(n, k, s, p).unwrap();
                    let normalized = exact_trace_moment(&q)
                        .map_err(|e| e.to_string())?
                        .normalized(n as f64);
                    errors.push(((normalized - limit) / limit).abs());
                }
                vensure!(
                    errors[0] >= errors[1] && errors[1] >= errors[2],
                    "deviation not monotone at p={p}: {errors:?}"
                );
                vensure!(errors[2] <= 0.05, "deviation {} > 5% at n=200, p={p}", errors[2]);
            }
            Ok("normalized exact moments approach the NC sum monotonically".into())
        }),
        run_check("balanced_limit_consistency", || {
            // deviation from 1 is p/k to leading order; monotone in n = k
            for p in 1..=3usize {
                let mut deviations = Vec::new();
                for n in [8u64, 12, 16] {
                    let q = MomentQuery::new(n, n, n * n, p).unwrap();
                    let normalized = exact_trace_moment(&q)
                        .map_err(|e| e.to_string())?
                        .normalized((n * n * n) as f64);
                    deviations.push((normalized - 1.0).abs());
                }
                vensure!(
                    deviations[0] > deviations[1] && deviations[1] > deviations[2],
                    "balanced deviation not monotone at p={p}: {deviations:?}"
                );
                vensure!(
                    deviations[2] <= (p as f64 + 0.5) / 16.0,
                    "balanced deviation {deviations:?} beyond (p + 1/2)/k at p={p}"
                );
            }
            Ok("moments of R/(ks) at n = k approach 1 at the p/k rate".into())
        }),
        run_check("cumulant_route_agreement", || {
            for (k, c) in [(3.0, 2.0), (2.0, 0.5), (6.0, 1.3)] {
                let kappa: Vec<f64> = (1..=8).map(|q| free_cumulant(k, c, q)).collect();
                for p in 1..=8usize {
                    let a = moments_from_cumulants(&kappa, p).map_err(|e| e.to_string())?;
                    let b = limit_moment(Regime::UnbalancedSecond, k, c, p)
                        .map_err(|e| e.to_string())?;
                    vensure!(
                        (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                        "cumulant route disagrees at k={k} c={c} p={p}"
                    );
                }
            }
            Ok("moment-cumulant formula matches the NC sum to 1e-12, p <= 8".into())
        }),
    ]
}

pub fn limitlaw_suite() -> Vec<Check> {
    vec![
        run_check("threshold_comparison", || {
            let equality = (threshold_red(2.0) - threshold_ppt(2.0)).abs();
            vensure!(equality <= 1e-12, "c_red(2) != c_PPT(2): gap {equality}");
            let mut k = 3.0;
            while k <= 100.0 {
                vensure!(
                    threshold_red(k) < threshold_ppt(k),
                    "c_red >= c_PPT at k = {k}"
                );
                k += 0.5;
            }
            Ok("c_red < c_PPT on [3, 100], equality at k = 2".into())
        }),
        run_check("curve_intersection_k0", || {
            let k0 = curve_intersection_k0();
            vensure!((k0 - 13.637).abs() <= 0.01, "k0 = {k0}");
            Ok(format!("c0 and c2 intersect at k0 = {k0:.4}"))
        }),
        run_check("curve_ordering", || {
            for i in 0..=980 {
                let k = 2.0 + 0.1 * i as f64;
                let inv = 1.0 / (k * k);
                let (c1, c2) = (curve_c1(k), curve_c2(k));
                vensure!(inv <= c1 && c1 < c2, "1/k^2 <= c1 < c2 fails at k = {k}");
            }
            for i in 1..=490 {
                let k = 1.0 + 0.1 * i as f64;
                let c0 = curve_c0(k).map_err(|e| e.to_string())?;
                vensure!(c0 > curve_c1(k), "c0 <= c1 at k = {k}");
            }
            Ok("1/k^2 <= c1 < c2 and c1 < c0 across the sampled ranges".into())
        }),
        run_check("c0_residual", || {
            for i in 0..=196 {
                let k = 2.0 + 0.5 * i as f64;
                curve_c0(k).map_err(|e| format!("k = {k}: {e}"))?;
            }
            let far = curve_c0(1e6).map_err(|e| e.to_string())?;
            vensure!((far - 0.125).abs() <= 1e-3, "c0(1e6) = {far}");
            Ok("|f(c0)| <= 1e-9 k^4 on [2, 100]; c0 -> 1/8".into())
        }),
        run_check("golden_ratio_touching_point", || {
            let phi = (5.0f64.sqrt() + 1.0) / 2.0;
            let gap = (curve_c1(phi) - 1.0 / (phi * phi)).abs();
            vensure!(gap <= 1e-12, "c1(phi) - 1/phi^2 = {gap}");
            for delta in [-0.05, -0.01, 0.01, 0.05] {
                let k = phi + delta;
                vensure!(curve_c1(k) - 1.0 / (k * k) >= 0.0, "sign change near phi at k={k}");
            }
            Ok("c1 touches 1/k^2 exactly at the golden ratio".into())
        }),
        run_check("density_normalization_and_mean", || {
            for (k, c) in [(3.0, 2.0), (5.0, 1.0), (2.0, 4.0), (3.0, 0.05)] {
                let law = CompoundFreePoissonLaw::new(k, c).unwrap();
                let moments = law.density_moments(1).map_err(|e| e.to_string())?;
                let continuous = 1.0 - law.atom_mass();
                vensure!(
                    (moments[0] - continuous).abs() <= 1e-3,
                    "mass {} != {} at (k={k}, c={c})",
                    moments[0],
                    continuous
                );
                let mean = law.mean();
                vensure!(
                    (moments[1] - mean).abs() <= 0.01 * mean,
                    "mean {} != {} at (k={k}, c={c})",
                    moments[1],
                    mean
                );
                vensure!(moments[1] > 0.0, "mean not positive at (k={k}, c={c})");
            }
            Ok("density integrates to 1 - atom and to the positive mean ck(k-1)".into())
        }),
        run_check("density_moments_match_cumulant_moments", || {
            for (k, c) in [(3.0, 2.0), (5.0, 1.0), (2.0, 4.0), (3.0, 0.05)] {
                let law = CompoundFreePoissonLaw::new(k, c).unwrap();
                let quad = law.density_moments(4).map_err(|e| e.to_string())?;
                for (p, &value) in quad.iter().enumerate().skip(1) {
                    let reference = law.moment(p).map_err(|e| e.to_string())?;
                    vensure!(
                        (value - reference).abs() <= 0.01 * reference.abs(),
                        "moment {p} off at (k={k}, c={c}): {value} vs {reference}"
                    );
                }
            }
            Ok("quadrature moments match NC-sum moments within 1% up to p = 4".into())
        }),
        run_check("density_support_profile", || {
            for (k, c) in [(3.0, 2.0), (3.0, 1.0), (3.0, 0.12)] {
                let law = CompoundFreePoissonLaw::new(k, c).unwrap();
                let roots = law.support_endpoints().map_err(|e| e.to_string())?;
                for pair in roots.chunks(2) {
                    let (a, b) = (pair[0], pair[1]);
                    let margin = 0.05 * (b - a);
                    let below = law.density(a - margin).map_err(|e| e.to_string())?;
                    let above = law.density(b + margin).map_err(|e| e.to_string())?;
                    let mid = law.density(0.5 * (a + b)).map_err(|e| e.to_string())?;
                    vensure!(below <= 1e-6, "density {below} below support at (k={k}, c={c})");
                    vensure!(above <= 1e-6, "density {above} above support at (k={k}, c={c})");
                    vensure!(mid > 1e-6, "density {mid} not positive inside at (k={k}, c={c})");
                }
            }
            Ok("density vanishes 5% outside the endpoints, positive at midpoints".into())
        }),
        run_check("descartes_cross_check", || {
            let mut applied = 0usize;
            for &k in &[3.0, 5.0, 10.0, 14.0, 20.0, 40.0] {
                for &c in &[0.005, 0.02, 0.05, 0.1, 0.13, 0.16, 0.2, 0.3] {
                    let Ok(law) = CompoundFreePoissonLaw::new(k, c) else {
                        continue;
                    };
                    let Ok(roots) = law.support_endpoints() else {
                        continue;
                    };
                    if roots.len() != 4 {
                        continue;
                    }
                    let q = law.discriminant_coefficients();
                    if let Some(all_positive) = descartes_all_positive(&q) {
                        vensure!(
                            all_positive == roots.iter().all(|&r| r > 0.0),
                            "Descartes disagrees with root signs at (k={k}, c={c})"
                        );
                        applied += 1;
                    }
                }
            }
            vensure!(applied > 10, "too few four-root cases exercised ({applied})");
            Ok(format!("sign test matches root signs on {applied} four-root laws"))
        }),
        run_check("region_positive_iff_threshold", || {
            for &k in &[2.0, 3.0, 7.0, 14.0, 20.0] {
                for &c in &[0.02, 0.1, 0.3, 0.9, 1.7, 2.5, 4.0] {
                    let law = CompoundFreePoissonLaw::new(k, c).unwrap();
                    let report = law.classify();
                    if report.region == crate::limitlaw::Region::Boundary {
                        continue;
                    }
                    let expected = matches!(
                        report.region,
                        crate::limitlaw::Region::E | crate::limitlaw::Region::F
                    );
                    vensure!(
                        report.positive_support == expected
                            && (c > threshold_red(k)) == expected,
                        "region/threshold/positivity disagree at (k={k}, c={c})"
                    );
                }
            }
            Ok("positive support exactly in regions E, F, i.e. above c_red".into())
        }),
    ]
}

pub fn randmat_suite() -> Vec<Check> {
    vec![
        run_check("ensemble_determinism", || {
            let cfg = SimulationConfig::new(4, 3, 10, 77, 5).unwrap();
            let base = run_reduction_ensemble(&cfg, Normalization::None)
                .map_err(|e| e.to_string())?;
            for threads in [1usize, 2] {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| e.to_string())?;
                let run = pool
                    .install(|| run_reduction_ensemble(&cfg, Normalization::None))
                    .map_err(|e| e.to_string())?;
                for (a, b) in base.iter().zip(run.iter()) {
                    vensure!(
                        a.eigenvalues == b.eigenvalues,
                        "eigenvalues changed with {threads} worker(s)"
                    );
                }
            }
            Ok("bit-identical spectra across worker counts".into())
        }),
        run_check("hermiticity_and_trace_identity", || {
            let (n, k, s) = (4usize, 3usize, 6usize);
            let x = sample_ginibre(n * k, s, 1234).map_err(|e| e.to_string())?;
            let w = wishart(&x);
            hermitian_eigenvalues(&w).map_err(|e| format!("W not Hermitian: {e}"))?;
            let r = reduce(&w, n, k).map_err(|e| e.to_string())?;
            hermitian_eigenvalues(&r).map_err(|e| format!("R not Hermitian: {e}"))?;
            let lhs = matrix_trace(&r).re;
            let rhs = (k as f64 - 1.0) * matrix_trace(&w).re;
            vensure!(
                (lhs - rhs).abs() <= 1e-9 * rhs.abs(),
                "Tr R = (k-1) Tr W violated: {lhs} vs {rhs}"
            );
            Ok("W, R Hermitian; Tr R = (k-1) Tr W to 1e-9 relative".into())
        }),
        run_check("ginibre_entry_moments", || {
            let x = sample_ginibre(1000, 1000, 2718).map_err(|e| e.to_string())?;
            let mean = x.sum() / Complex64::new(1e6, 0.0);
            vensure!(mean.norm() <= 5e-3, "entry mean {mean}");
            let mean_sq = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / 1e6;
            vensure!((mean_sq - 1.0).abs() <= 1e-2, "E|x|^2 = {mean_sq}");
            Ok(format!("10^6 entries: |mean| = {:.2e}, E|x|^2 = {mean_sq:.4}", mean.norm()))
        }),
        run_check("choi_spectra", || {
            for k in 2..=6usize {
                let eigs = hermitian_eigenvalues(&choi_reduction_map(k))
                    .map_err(|e| e.to_string())?;
                vensure!(
                    (eigs[0] - (1.0 - k as f64)).abs() <= 1e-10,
                    "smallest C_phi eigenvalue at k={k} is {}",
                    eigs[0]
                );
                vensure!(
                    eigs[1..].iter().all(|&l| (l - 1.0).abs() <= 1e-10),
                    "C_phi spectrum at k={k} not {{1-k, 1^(k^2-1)}}"
                );
                let psi = hermitian_eigenvalues(&choi_composed_map(k))
                    .map_err(|e| e.to_string())?;
                vensure!(psi.iter().all(|&l| l >= -1e-10), "C_psi not PSD at k={k}");
            }
            Ok("C_phi spectrum {1-k, 1^(k^2-1)}; C_psi PSD, k = 2..6".into())
        }),
        run_check("partial_trace_kron_oracle", || {
            let a = sample_ginibre(3, 3, 5).map_err(|e| e.to_string())?;
            let b = sample_ginibre(2, 2, 6).map_err(|e| e.to_string())?;
            let prod = kron(&a, &b);
            let got = partial_trace_second(&prod, 3, 2).map_err(|e| e.to_string())?;
            let tb = matrix_trace(&b);
            for i in 0..3 {
                for j in 0..3 {
                    vensure!(
                        (got[[i, j]] - a[[i, j]] * tb).norm() <= 1e-12,
                        "partial trace misses (Tr B) A at ({i},{j})"
                    );
                }
            }
            Ok("partial_trace_second(A ⊗ B) = (Tr B) A to 1e-12".into())
        }),
        run_check("image_containment", || {
            // for rank-one w = xx*, x lies in the range of W_A ⊗ I_k
            let (n, k) = (5usize, 3usize);
            let raw = sample_ginibre(n * k, 1, 31).map_err(|e| e.to_string())?;
            let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let x = raw.mapv(|v| v / norm);
            let w = wishart(&x);
            let wa = partial_trace_second(&w, n, k).map_err(|e| e.to_string())?;
            let (vals, vecs) = crate::randmat::hermitian_eigenpairs(&wa).map_err(|e| e.to_string())?;
            let vmax = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            // projector onto range(W_A) ⊗ I_k
            let mut projector = Array2::<Complex64>::zeros((n, n));
            for (idx, &l) in vals.iter().enumerate() {
                if l.abs() > 1e-12 * vmax {
                    let v = vecs.column(idx);
                    for i in 0..n {
                        for j in 0..n {
                            projector[[i, j]] += v[i] * v[j].conj();
                        }
                    }
                }
            }
            let full = kron(&projector, &Array2::<Complex64>::eye(k));
            let mut deviation = 0.0f64;
            for i in 0..n * k {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n * k {
                    acc += full[[i, j]] * x[[j, 0]];
                }
                deviation = deviation.max((acc - x[[i, 0]]).norm());
            }
            vensure!(deviation <= 1e-8, "projection moved x by {deviation}");
            Ok(format!("range projector fixes x up to {deviation:.2e}"))
        }),
        run_check("rank_bound_quick", || {
            let cfg = SimulationConfig::new(50, 2, 10, 13, 1).unwrap();
            let report = crate::randmat::rank_check(&cfg).map_err(|e| e.to_string())?;
            vensure!(
                report.observed_rank <= report.bound,
                "rank {} exceeds bound {}",
                report.observed_rank,
                report.bound
            );
            Ok(format!(
                "rank {} <= k^2 s = {} out of {}",
                report.observed_rank, report.bound, report.dimension
            ))
        }),
        run_check("mc_matches_exact_moments_quick", || {
            let cfg = SimulationConfig::new(2, 2, 4, 99, 4000).unwrap();
            let samples = run_reduction_ensemble(&cfg, Normalization::None)
                .map_err(|e| e.to_string())?;
            for p in 1..=3usize {
                let exact = exact_trace_moment(&MomentQuery::new(2, 2, 4, p).unwrap())
                    .map_err(|e| e.to_string())?
                    .normalized(1.0);
                let per_trial: Vec<f64> =
                    samples.iter().map(|s| empirical_moment(s, p)).collect();
                let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
                let var = per_trial.iter().map(|m| (m - mean).powi(2)).sum::<f64>()
                    / (per_trial.len() - 1) as f64;
                let se = (var / per_trial.len() as f64).sqrt();
                vensure!(
                    (mean - exact).abs() <= 5.0 * se,
                    "p={p}: empirical {mean} vs exact {exact} (se {se})"
                );
            }
            Ok("empirical trace moments within 5 standard errors of exact, p <= 3".into())
        }),
        run_check("empirical_cdf_vs_density_quick", || {
            // desk-scale version of the spectral comparison: n = 300, k = 3,
            // c = 2; the acceptance suite runs n = 1000
            let (n, k, c) = (300usize, 3usize, 2.0);
            let s = (c * (n * k) as f64).round() as usize;
            let cfg = SimulationConfig::new(n, k, s, 4242, 1).unwrap();
            let samples = run_reduction_ensemble(&cfg, Normalization::OverN)
                .map_err(|e| e.to_string())?;
            let law = CompoundFreePoissonLaw::new(k as f64, c).unwrap();
            let table = law.cdf_table(400).map_err(|e| e.to_string())?;
            let d = ks_statistic(&samples[0].eigenvalues, |x| table.eval(x));
            vensure!(d <= 0.08, "KS distance {d} too large at n = 300");
            Ok(format!("KS distance {d:.4} at n = 300"))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinatorics_checks_pass() {
        for check in combinatorics_suite() {
            assert!(check.passed, "{}: {}", check.name, check.details);
        }
    }

    #[test]
    fn moments_checks_pass() {
        for check in moments_suite() {
            assert!(check.passed, "{}: {}", check.name, check.details);
        }
    }

    #[test]
    fn limitlaw_checks_pass() {
        for check in limitlaw_suite() {
            assert!(check.passed, "{}: {}", check.name, check.details);
        }
    }

    #[test]
    fn randmat_checks_pass() {
        for check in randmat_suite() {
            assert!(check.passed, "{}: {}", check.name, check.details);
        }
    }

    #[test]
    fn suite_parsing() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert_eq!("limitlaw".parse::<Suite>().unwrap(), Suite::Limitlaw);
        assert!("nope".parse::<Suite>().is_err());
    }
}
