//! Support geometry of the limiting law: the quartic whose real roots are the
//! support endpoints, the six-region phase classification in the `(k, c)`
//! plane, and the threshold curves.
//!
//! The analyticity of the Cauchy transform breaks exactly at the real roots
//! of the discriminant `Delta(z) = k(alpha z^4 + ... + epsilon)` of the cubic
//! satisfied by `G`. Whether `Delta` has 2 or 4 real
//! roots is decided by the sign of its own discriminant `Delta_2`, which
//! reduces to the sign of a cubic `f(c)`; the remaining region boundaries are
//! the curves `1/k^2` (atom), `c_1`, `c_2` (is 0 inside the support) and `c_0`
//! (interval count).

use ndarray::Array2;
use ndarray_linalg::EigVals;

use super::{CompoundFreePoissonLaw, Region::*};
use crate::error::{Error, Result};
use crate::moments::Regime;

/// Relative tolerance against each region curve; inside it the classification
/// refuses to guess and returns [`Region::Boundary`].
const CURVE_TOLERANCE: f64 = 1e-8;
/// Imaginary-part threshold for calling a companion-matrix eigenvalue real.
const REAL_ROOT_TOLERANCE: f64 = 1e-8;

/// Coefficients `alpha..epsilon` of the quartic inside
/// `Delta(z) = k (alpha z^4 + beta z^3 + gamma z^2 + delta z + epsilon)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticDiscriminant {
    pub coeff_a4: f64,
    pub coeff_a3: f64,
    pub coeff_a2: f64,
    pub coeff_a1: f64,
    pub coeff_a0: f64,
}

impl QuarticDiscriminant {
    /// The quartic factor `alpha z^4 + ... + epsilon` (without the overall `k`).
    pub fn eval(&self, z: f64) -> f64 {
        (((self.coeff_a4 * z + self.coeff_a3) * z + self.coeff_a2) * z + self.coeff_a1) * z
            + self.coeff_a0
    }

    pub fn eval_derivative(&self, z: f64) -> f64 {
        ((4.0 * self.coeff_a4 * z + 3.0 * self.coeff_a3) * z + 2.0 * self.coeff_a2) * z
            + self.coeff_a1
    }

    /// `Delta(z)` including the leading factor `k = coeff_a4`.
    pub fn delta(&self, z: f64) -> f64 {
        self.coeff_a4 * self.eval(z)
    }
}

/// Labels of the support phase diagram. `Boundary` is returned whenever the
/// parameters sit within tolerance of a region curve; the table of regions is
/// only defined on the open cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
    E,
    F,
    Boundary,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Support description of one law: ordered disjoint closed intervals of the
/// absolutely continuous part, the atom mass at 0, the phase-diagram region,
/// and whether the whole measure lives on the open positive half-line.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SupportReport {
    pub intervals: Vec<(f64, f64)>,
    pub atom_mass: f64,
    pub region: Region,
    pub positive_support: bool,
}

impl CompoundFreePoissonLaw {
    /// The printed coefficient polynomials of the discriminant quartic.
    pub fn discriminant_coefficients(&self) -> QuarticDiscriminant {
        let (k, c) = (self.k(), self.c());
        let alpha = k;
        let beta = 2.0 * (k * (k - 2.0) - 2.0 * c * (k - 1.0) * (k - 1.0) * (k + 1.0));
        let gamma = 2.0 * c * c * k * (k - 1.0) * (k - 1.0) * (3.0 * k * k - 4.0)
            - c * (6.0 * k.powi(4) - 8.0 * k.powi(3) - 4.0 * k * k + 18.0 * k - 12.0)
            + k * (k * k - 6.0 * k + 6.0);
        let delta = -2.0
            * (k - 1.0)
            * (2.0 * c.powi(3) * k * k * (k + 1.0) * (k - 1.0).powi(3)
                - c * c * k * (3.0 * k.powi(4) + k.powi(3) - 8.0 * k * k - 6.0 * k + 10.0)
                + c * (k.powi(4) - k.powi(3) - k * k + 6.0 * k - 6.0)
                + k * (k - 2.0));
        let epsilon = (k - 1.0) * (k - 1.0)
            * (c * k * k - 1.0)
            * (c * k * k - 1.0)
            * (c * c * k * (k - 1.0) * (k - 1.0) - 2.0 * c * (k * k + k - 2.0) + k);
        QuarticDiscriminant {
            coeff_a4: alpha,
            coeff_a3: beta,
            coeff_a2: gamma,
            coeff_a1: delta,
            coeff_a0: epsilon,
        }
    }

    /// The cubic `f(c)` controlling the sign of the quartic's discriminant:
    /// `f = 8k(k-1)^3 c^3 + 3(k-1)^2 (5k^2-9) c^2 + 6k^3 (k-1) c - k^4`.
    pub fn interval_count_cubic(&self) -> f64 {
        cubic_f(self.k(), self.c())
    }

    /// Discriminant `Delta_2 = -256 c^2 k^2 (k+1)(k-1)^3 f^3` of the quartic:
    /// negative means 2 real roots (one interval), positive means 4 (two).
    pub fn quartic_discriminant(&self) -> f64 {
        let (k, c) = (self.k(), self.c());
        -256.0 * c * c * k * k * (k + 1.0) * (k - 1.0).powi(3) * self.interval_count_cubic().powi(3)
    }

    /// Real roots of `Delta(z) = 0`, ascending: 2 or 4 of them, delimiting the
    /// intervals of the continuous support. Errors with
    /// [`Error::BoundaryProximity`] when `Delta_2` is too close to zero for
    /// the root pattern to be trusted.
    pub fn support_endpoints(&self) -> Result<Vec<f64>> {
        let f = self.interval_count_cubic();
        if f.abs() <= 1e-9 * self.k().powi(4) {
            return Err(Error::BoundaryProximity);
        }
        let roots = self.real_quartic_roots()?;
        let expected = if f > 0.0 { 2 } else { 4 };
        if roots.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} real endpoints, found {} at k={} c={}",
                roots.len(),
                self.k(),
                self.c()
            )));
        }
        Ok(roots)
    }

    /// Real roots of the quartic via its companion matrix, Newton-polished.
    fn real_quartic_roots(&self) -> Result<Vec<f64>> {
        let q = self.discriminant_coefficients();
        let mut companion = Array2::<f64>::zeros((4, 4));
        let monic = [
            q.coeff_a3 / q.coeff_a4,
            q.coeff_a2 / q.coeff_a4,
            q.coeff_a1 / q.coeff_a4,
            q.coeff_a0 / q.coeff_a4,
        ];
        for i in 0..4 {
            companion[[i, 3]] = -monic[3 - i];
            if i > 0 {
                companion[[i, i - 1]] = 1.0;
            }
        }
        let eigenvalues = companion.eigvals().map_err(|e| Error::Lapack {
            routine: "dgeev",
            detail: e.to_string(),
        })?;
        let mut roots: Vec<f64> = eigenvalues
            .iter()
            .filter(|l| l.im.abs() <= REAL_ROOT_TOLERANCE * (1.0 + l.norm()))
            .map(|l| {
                let mut z = l.re;
                for _ in 0..2 {
                    let d = q.eval_derivative(z);
                    if d != 0.0 {
                        z -= q.eval(z) / d;
                    }
                }
                z
            })
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(roots)
    }

    /// Like [`Self::support_endpoints`] but tolerant: near-coincident roots
    /// are merged and no count is enforced. Used to still report something on
    /// region boundaries.
    fn support_endpoints_lenient(&self) -> Vec<(f64, f64)> {
        let mut roots = match self.real_quartic_roots() {
            Ok(r) => r,
            Err(_) => return Vec::new(),
        };
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + a.abs()));
        match roots.len() {
            4 => vec![(roots[0], roots[1]), (roots[2], roots[3])],
            3 => vec![(roots[0], roots[2])],
            2 => vec![(roots[0], roots[1])],
            _ => Vec::new(),
        }
    }

    /// Region label from curve comparisons alone.
    fn region_label(&self) -> Region {
        let (k, c) = (self.k(), self.c());
        let atom_curve = 1.0 / (k * k);
        let c1 = curve_c1(k);
        let c2 = curve_c2(k);
        let c0 = match curve_c0(k) {
            Ok(v) => v,
            Err(_) => return Boundary,
        };
        let near = |t: f64| (c - t).abs() <= CURVE_TOLERANCE * t.abs().max(f64::MIN_POSITIVE);
        if near(atom_curve) || near(c1) || near(c2) || near(c0) {
            return Boundary;
        }
        if c < atom_curve {
            A
        } else if c < c1 {
            B
        } else if c < c2 {
            if c < c0 {
                C
            } else {
                D
            }
        } else if c < c0 {
            E
        } else {
            F
        }
    }

    /// Full support classification. Boundary parameters are absorbed into the
    /// `Boundary` label instead of erroring; interval data is then best-effort.
    pub fn classify(&self) -> SupportReport {
        let region = self.region_label();
        let intervals = match region {
            Boundary => self.support_endpoints_lenient(),
            _ => match self.support_endpoints() {
                Ok(roots) => roots.chunks(2).map(|p| (p[0], p[1])).collect(),
                Err(_) => self.support_endpoints_lenient(),
            },
        };
        let atom_mass = self.atom_mass();
        let positive_support = atom_mass == 0.0
            && !intervals.is_empty()
            && intervals.iter().all(|&(a, b)| a > 0.0 && b > 0.0);
        SupportReport {
            intervals,
            atom_mass,
            region,
            positive_support,
        }
    }
}

fn cubic_f(k: f64, c: f64) -> f64 {
    8.0 * k * (k - 1.0).powi(3) * c.powi(3)
        + 3.0 * (k - 1.0) * (k - 1.0) * (5.0 * k * k - 9.0) * c * c
        + 6.0 * k.powi(3) * (k - 1.0) * c
        - k.powi(4)
}

/// Descartes cross-check from the positivity proof: with `epsilon > 0`,
/// `alpha > 0` and four real nonzero roots, all roots are positive exactly
/// when `beta < 0`, `gamma > 0`, `delta < 0`. Returns `None` when
/// `epsilon <= 0` (the test does not apply).
pub fn descartes_all_positive(q: &QuarticDiscriminant) -> Option<bool> {
    if q.coeff_a0 <= 0.0 {
        return None;
    }
    Some(q.coeff_a3 < 0.0 && q.coeff_a2 > 0.0 && q.coeff_a1 < 0.0)
}

/// The unique real root of `f(c) = 0` separating one-interval from
/// two-interval supports, by its closed form with the cube roots
/// `u = ((k-1)(k+1)^2)^(1/3)` and `v = ((k-1)^2 (k+1))^(1/3)`. The result is
/// rejected unless `|f(c0)| <= 1e-9 k^4`.
pub fn curve_c0(k: f64) -> Result<f64> {
    if k <= 1.0 || k.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "c0 is defined for k > 1, got {k}"
        )));
    }
    let u = ((k - 1.0) * (k + 1.0) * (k + 1.0)).cbrt();
    let v = ((k - 1.0) * (k - 1.0) * (k + 1.0)).cbrt();
    let numerator = 3.0 * k.powi(3) - k * k * (5.0 * v - 3.0 * u + 9.0)
        + 3.0 * k * (2.0 * u - 1.0)
        + 9.0 * (v - u + 1.0);
    let c0 = numerator / (8.0 * k * (k - 1.0) * v);
    let residual = cubic_f(k, c0).abs();
    let bound = 1e-9 * k.powi(4);
    if residual > bound {
        return Err(Error::ResidualCheck { residual, bound });
    }
    Ok(c0)
}

/// `c_1(k) = (sqrt(k+1) - 1)^2 / (k(k-1))`: below it, 0 leaves the support.
pub fn curve_c1(k: f64) -> f64 {
    assert!(k > 1.0, "c1 requires k > 1");
    ((k + 1.0).sqrt() - 1.0).powi(2) / (k * (k - 1.0))
}

/// `c_2(k) = (sqrt(k+1) + 1)^2 / (k(k-1))`: above it, 0 leaves the support
/// again; this curve is the reduction threshold.
pub fn curve_c2(k: f64) -> f64 {
    assert!(k > 1.0, "c2 requires k > 1");
    ((k + 1.0).sqrt() + 1.0).powi(2) / (k * (k - 1.0))
}

/// Threshold of the reduction criterion in the second unbalanced regime.
pub fn threshold_red(k: f64) -> f64 {
    assert!(k >= 2.0, "reduction threshold requires k >= 2");
    curve_c2(k)
}

/// Threshold of the PPT criterion in the same regime:
/// `c_PPT = 2 + 2 sqrt(1 - 1/k^2)`.
pub fn threshold_ppt(k: f64) -> f64 {
    assert!(k >= 2.0, "PPT threshold requires k >= 2");
    2.0 + 2.0 * (1.0 - 1.0 / (k * k)).sqrt()
}

/// Threshold for the simultaneous criterion (both reductions positive):
/// trivial in the balanced regime, `threshold_red(min(n,k))` otherwise.
pub fn threshold_simultaneous(regime: Regime, m: u32) -> Result<f64> {
    match regime {
        Regime::Balanced => Ok(0.0),
        Regime::UnbalancedFirst | Regime::UnbalancedSecond => {
            if m < 2 {
                return Err(Error::InvalidParameter(format!(
                    "simultaneous threshold requires min(n, k) >= 2, got {m}"
                )));
            }
            Ok(threshold_red(m as f64))
        }
    }
}

/// The crossing point `k_0` of the `c_0` and `c_2` curves, located by
/// bisection; above it two-interval positive supports (region E) exist.
pub fn curve_intersection_k0() -> f64 {
    let g = |k: f64| curve_c0(k).expect("c0 defined on the bracket") - curve_c2(k);
    let (mut lo, mut hi) = (12.0, 16.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
