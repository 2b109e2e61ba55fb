//! Cauchy transform and Stieltjes inversion for the limiting law.
//!
//! The transform `G` of `mu_{k,c}` satisfies
//!
//! ```text
//! 1/G + c(k^2-1)/(1-G) - c(k-1)/(1+(k-1)G) = z,
//! ```
//!
//! which clears to the cubic
//!
//! ```text
//! (k-1)z G^3 + [(k-1)(ck^2-1) - (k-2)z] G^2 + [(k-2) + ck(k-1) - z] G + 1 = 0.
//! ```
//!
//! All three roots are computed per evaluation point; the physical branch is
//! the one with `Im G < 0` and `G ~ 1/z` at infinity. Naive per-point branch
//! picking is discontinuous across the support, so every evaluation tracks the
//! root down a vertical path from high up in the half-plane, where `1/z`
//! identifies it unambiguously, to the requested point.

use num_complex::Complex64;

use super::CompoundFreePoissonLaw;
use crate::error::{Error, Result};

/// Stieltjes-inversion offsets: the density is evaluated at `x + i eta` for
/// these `eta` and Richardson-extrapolated to `eta = 0`.
const INVERSION_ETAS: [f64; 3] = [1e-4, 1e-5, 1e-6];
/// Geometric step of the vertical continuation path.
const PATH_RATIO: f64 = 0.72;
/// Acceptable upward leakage of `Im G` at the end of a continuation.
const IM_TOLERANCE: f64 = 1e-9;

impl CompoundFreePoissonLaw {
    /// Coefficients `[g3, g2, g1, g0]` of the cubic satisfied by `G(z)`.
    fn cubic_coefficients(&self, z: Complex64) -> [Complex64; 4] {
        let (k, c) = (self.k(), self.c());
        [
            z * (k - 1.0),
            Complex64::from((k - 1.0) * (c * k * k - 1.0)) - z * (k - 2.0),
            Complex64::from(k - 2.0 + c * k * (k - 1.0)) - z,
            Complex64::from(1.0),
        ]
    }

    /// The inverse `K(g) = R(g) + 1/g` of the Cauchy transform, used as an
    /// independent round-trip oracle on `G`.
    pub fn inverse_cauchy_transform(&self, g: Complex64) -> Complex64 {
        let (k, c) = (self.k(), self.c());
        1.0 / g + c * (k * k - 1.0) / (1.0 - g) - c * (k - 1.0) / (1.0 + (k - 1.0) * g)
    }

    /// Upper bound for the spectral scale, used to start continuation paths
    /// above everything interesting.
    fn spectral_scale(&self) -> f64 {
        let (k, c) = (self.k(), self.c());
        k * ((c * k).sqrt() + 1.0).powi(2) + k
    }

    /// `G(z)` for `Im z > 0`: the cubic root with `Im G < 0` continued from
    /// the `1/z` asymptotic regime.
    pub fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 || z.im.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "Cauchy transform requires Im z > 0, got z = {z}"
            )));
        }
        let g = self.continue_branch(z.re, &[z.im])?[0];
        Ok(g)
    }

    /// Walks the physical branch from high imaginary part down to each of the
    /// requested offsets (descending), returning `G(x + i eta)` per offset.
    fn continue_branch(&self, x: f64, etas_desc: &[f64]) -> Result<Vec<Complex64>> {
        debug_assert!(etas_desc.windows(2).all(|w| w[0] >= w[1]));
        let eta_top = 10.0 * (self.spectral_scale() + x.abs()).max(etas_desc[0]);
        let mut eta = eta_top;
        let mut g = 1.0 / Complex64::new(x, eta);
        g = nearest_root(&self.cubic_coefficients(Complex64::new(x, eta)), g);
        let mut out = Vec::with_capacity(etas_desc.len());
        for &target in etas_desc {
            while eta > target {
                eta = (eta * PATH_RATIO).max(target);
                g = nearest_root(&self.cubic_coefficients(Complex64::new(x, eta)), g);
            }
            if g.im > IM_TOLERANCE {
                return Err(Error::BranchSelectionFailure { re: x, im: target });
            }
            out.push(g);
        }
        Ok(out)
    }

    /// Density of the absolutely continuous part at `x`, by Stieltjes
    /// inversion `rho(x) = -(1/pi) lim Im G(x + i eta)` with Richardson
    /// extrapolation over the fixed `eta` ladder. Clamped at zero; the atom is
    /// reported separately by [`CompoundFreePoissonLaw::atom_mass`].
    pub fn density(&self, x: f64) -> Result<f64> {
        let gs = self.continue_branch(x, &INVERSION_ETAS)?;
        let ys: Vec<f64> = gs.iter().map(|g| -g.im / std::f64::consts::PI).collect();
        Ok(extrapolate_to_zero(&INVERSION_ETAS, &ys).max(0.0))
    }

    /// Integrals `[∫rho, ∫x rho, ..., ∫x^max_power rho]` over the continuous
    /// support. The trigonometric substitution absorbs the square-root edge
    /// behavior, so a modest trapezoid grid converges far below the test
    /// tolerances.
    pub fn density_moments(&self, max_power: usize) -> Result<Vec<f64>> {
        let endpoints = self.support_endpoints()?;
        let mut totals = vec![0.0; max_power + 1];
        for pair in endpoints.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let rad = 0.5 * (b - a);
            let n = 320usize;
            for j in 0..=n {
                let theta = -std::f64::consts::FRAC_PI_2
                    + std::f64::consts::PI * (j as f64) / (n as f64);
                let x = mid + rad * theta.sin();
                let weight = if j == 0 || j == n { 0.5 } else { 1.0 };
                let dx = rad * theta.cos() * std::f64::consts::PI / (n as f64);
                let rho = self.density(x)?;
                let mut xp = 1.0;
                for total in totals.iter_mut() {
                    *total += weight * rho * xp * dx;
                    xp *= x;
                }
            }
        }
        Ok(totals)
    }

    /// Tabulated CDF of the full measure (atom included) for distribution
    /// comparisons.
    pub fn cdf_table(&self, nodes_per_interval: usize) -> Result<CdfTable> {
        let endpoints = self.support_endpoints()?;
        let mut xs = Vec::new();
        let mut masses = Vec::new();
        for pair in endpoints.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let rad = 0.5 * (b - a);
            let n = nodes_per_interval.max(16);
            let mut prev_x = a;
            let mut prev_rho = 0.0;
            for j in 0..=n {
                let theta = -std::f64::consts::FRAC_PI_2
                    + std::f64::consts::PI * (j as f64) / (n as f64);
                let x = mid + rad * theta.sin();
                let rho = self.density(x)?;
                let mass = 0.5 * (rho + prev_rho) * (x - prev_x);
                xs.push(x);
                masses.push(mass);
                prev_x = x;
                prev_rho = rho;
            }
        }
        Ok(CdfTable::new(xs, masses, self.atom_mass()))
    }
}

/// Cumulative distribution table of a law with an optional atom at 0.
#[derive(Clone, Debug)]
pub struct CdfTable {
    xs: Vec<f64>,
    cumulative: Vec<f64>,
    atom: f64,
}

impl CdfTable {
    fn new(xs: Vec<f64>, masses: Vec<f64>, atom: f64) -> Self {
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Self { xs, cumulative, atom }
    }

    /// `F(x)`, counting the atom at 0 as soon as `x >= 0`.
    pub fn eval(&self, x: f64) -> f64 {
        let atom = if x >= 0.0 { self.atom } else { 0.0 };
        let continuous = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => self.cumulative[i],
            Err(0) => 0.0,
            Err(i) if i == self.xs.len() => *self.cumulative.last().unwrap(),
            Err(i) => {
                // linear interpolation inside one panel
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (c0, c1) = (self.cumulative[i - 1], self.cumulative[i]);
                c0 + (c1 - c0) * (x - x0) / (x1 - x0)
            }
        };
        atom + continuous
    }

    /// Total mass of the table (atom plus quadrature of the density); close
    /// to 1 up to quadrature error.
    pub fn total_mass(&self) -> f64 {
        self.atom + self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// All roots of a complex cubic `c3 x^3 + c2 x^2 + c1 x + c0`, via Cardano
/// plus one Newton polish per root. Degenerate leading coefficients fall back
/// to the quadratic/linear formulas.
fn cubic_roots(coeffs: &[Complex64; 4]) -> Vec<Complex64> {
    let [c3, c2, c1, c0] = *coeffs;
    let scale = c3.norm().max(c2.norm()).max(c1.norm()).max(c0.norm());
    if c3.norm() <= 1e-14 * scale {
        return quadratic_roots(c2, c1, c0);
    }
    let b = c2 / c3;
    let c = c1 / c3;
    let d = c0 / c3;
    // depressed cubic t^3 + p t + q, x = t - b/3
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let sq = disc.sqrt();
    // pick the better-conditioned branch of u^3 = -q/2 +- sqrt(disc)
    let u3a = -q / 2.0 + sq;
    let u3b = -q / 2.0 - sq;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    let mut roots = Vec::with_capacity(3);
    if u3.norm() == 0.0 {
        let t = (-q).cbrt();
        for j in 0..3 {
            roots.push(t * omega(j) - shift);
        }
    } else {
        let u = u3.cbrt();
        for j in 0..3 {
            let uj = u * omega(j);
            roots.push(uj - p / (3.0 * uj) - shift);
        }
    }
    for r in &mut roots {
        *r = newton_polish(coeffs, *r);
    }
    roots
}

fn omega(j: usize) -> Complex64 {
    match j {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(-0.5, 0.75f64.sqrt()),
        _ => Complex64::new(-0.5, -(0.75f64.sqrt())),
    }
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        if b.norm() == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let sq = (b * b - 4.0 * a * c).sqrt();
    // avoid cancellation: use the larger-magnitude numerator
    let q = if (b + sq).norm() >= (b - sq).norm() {
        -(b + sq) / 2.0
    } else {
        -(b - sq) / 2.0
    };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0), -b / a];
    }
    vec![q / a, c / q]
}

fn newton_polish(coeffs: &[Complex64; 4], mut x: Complex64) -> Complex64 {
    for _ in 0..2 {
        let f = ((coeffs[0] * x + coeffs[1]) * x + coeffs[2]) * x + coeffs[3];
        let df = (3.0 * coeffs[0] * x + 2.0 * coeffs[1]) * x + coeffs[2];
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

fn nearest_root(coeffs: &[Complex64; 4], target: Complex64) -> Complex64 {
    cubic_roots(coeffs)
        .into_iter()
        .min_by(|a, b| {
            (a - target)
                .norm_sqr()
                .partial_cmp(&(b - target).norm_sqr())
                .unwrap()
        })
        .expect("cubic with nonzero leading coefficient has roots")
}

/// Lagrange extrapolation of `(etas[i], ys[i])` to `eta = 0`.
fn extrapolate_to_zero(etas: &[f64; 3], ys: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= etas[j] / (etas[j] - etas[i]);
            }
        }
        total += w * ys[i];
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(k: f64, c: f64) -> CompoundFreePoissonLaw {
        CompoundFreePoissonLaw::new(k, c).unwrap()
    }

    #[test]
    fn cubic_solver_recovers_known_roots() {
        // (x - 1)(x - 2i)(x + 3) = x^3 + (2 - 2i)x^2 + (-3 - 4i)x + 6i
        let coeffs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, -2.0),
            Complex64::new(-3.0, -4.0),
            Complex64::new(0.0, 6.0),
        ];
        let mut roots = cubic_roots(&coeffs);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expected = [
            Complex64::new(-3.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 0.0),
        ];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).norm() < 1e-10, "{r} vs {e}");
        }
    }

    #[test]
    fn transform_has_one_over_z_asymptotics() {
        let law = law(3.0, 2.0);
        let z = Complex64::new(1e6, 1.0);
        let g = law.cauchy_transform(z).unwrap();
        assert!((g - 1.0 / z).norm() <= 1e-9);
    }

    #[test]
    fn transform_second_order_expansion() {
        // z = m1 + i 10^3: G - 1/(i 10^3) is O(1e-6) because the 1/z and
        // m1/z^2 corrections cancel against the shift of Re z by m1.
        let law = law(3.0, 2.0);
        let z = Complex64::new(law.mean(), 1e3);
        let g = law.cauchy_transform(z).unwrap();
        let target = 1.0 / Complex64::new(0.0, 1e3);
        assert!((g - target).norm() <= 1e-6, "{}", (g - target).norm());
    }

    #[test]
    fn transform_round_trips_through_k() {
        let law = law(3.0, 1.0);
        let z = Complex64::new(5.0, 2.0);
        let g = law.cauchy_transform(z).unwrap();
        assert!((law.inverse_cauchy_transform(g) - z).norm() <= 1e-8);
        assert!(g.im < 0.0);
    }

    #[test]
    fn transform_rejects_lower_half_plane() {
        let law = law(3.0, 1.0);
        assert!(law.cauchy_transform(Complex64::new(1.0, -0.5)).is_err());
        assert!(law.cauchy_transform(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn density_integrates_to_continuous_mass() {
        // c > 1/k^2: no atom, total mass 1
        let law = law(3.0, 2.0);
        let moments = law.density_moments(1).unwrap();
        assert!((moments[0] - 1.0).abs() <= 1e-3, "mass {}", moments[0]);
        assert!(
            (moments[1] - law.mean()).abs() <= 0.01 * law.mean(),
            "mean {} vs {}",
            moments[1],
            law.mean()
        );
    }

    #[test]
    fn density_with_atom_integrates_to_ck2() {
        let law = law(3.0, 0.05);
        let moments = law.density_moments(0).unwrap();
        let expected = 1.0 - law.atom_mass(); // = c k^2 = 0.45
        assert!((expected - 0.45).abs() < 1e-15);
        assert!(
            (moments[0] - expected).abs() <= 1e-3,
            "mass {} vs {}",
            moments[0],
            expected
        );
    }

    proptest::proptest! {
        #[test]
        fn prop_transform_round_trips(
            k in 2.0f64..12.0,
            c in 0.01f64..6.0,
            re in -20.0f64..30.0,
            im in 1e-3f64..50.0,
        ) {
            let law = CompoundFreePoissonLaw::new(k, c).unwrap();
            let z = Complex64::new(re, im);
            let g = law.cauchy_transform(z).unwrap();
            proptest::prop_assert!(g.im <= 1e-9);
            let back = law.inverse_cauchy_transform(g);
            proptest::prop_assert!(
                (back - z).norm() <= 1e-6 * (1.0 + z.norm()),
                "K(G(z)) = {back} vs z = {z}"
            );
        }
    }

    #[test]
    fn cdf_table_is_monotone_and_normalized() {
        let law = law(3.0, 2.0);
        let table = law.cdf_table(200).unwrap();
        assert!((table.total_mass() - 1.0).abs() < 2e-3);
        let lo = table.eval(0.0);
        let hi = table.eval(100.0);
        assert!(lo >= 0.0 && hi <= 1.0 + 1e-6 && lo <= hi);
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        for w in xs.windows(2) {
            assert!(table.eval(w[0]) <= table.eval(w[1]) + 1e-12);
        }
    }
}
