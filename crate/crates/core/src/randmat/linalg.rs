//! Dense complex matrix operations behind the Monte Carlo engine.
//!
//! Matrices are `ndarray::Array2<Complex64>` in standard (row-major) layout.
//! The two hot paths go straight to the system BLAS/LAPACK: `W = X X*` via
//! `cblas_zherk`, and Hermitian spectra via the two-stage values-only solver
//! `zheev_2stage`, which is several times faster than the classic
//! tridiagonalization at the 3000x3000 scale the phase-transition runs need.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::randmat::MAX_SAMPLE_ENTRIES;

#[link(name = "openblas")]
extern "C" {
    fn zheev_2stage_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut [f64; 2],
        lda: *const i32,
        w: *mut f64,
        work: *mut [f64; 2],
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// A `rows x cols` matrix of i.i.d. standard complex Gaussians (variance 1
/// per complex entry, so real and imaginary parts each have variance 1/2),
/// deterministic in the seed.
pub fn sample_ginibre(rows: usize, cols: usize, seed: u64) -> Result<Array2<Complex64>> {
    if rows < 1 || cols < 1 {
        return Err(Error::InvalidParameter(
            "Ginibre dimensions must be >= 1".into(),
        ));
    }
    let entries = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::InvalidParameter("dimension overflow".into()))?;
    if entries > MAX_SAMPLE_ENTRIES {
        return Err(Error::SizeLimitExceeded {
            what: "Ginibre sample entries",
            requested: entries,
            cap: MAX_SAMPLE_ENTRIES,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Ok(Array2::from_shape_fn((rows, cols), |_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    }))
}

/// The Wishart matrix `W = X X*`, Hermitian positive semidefinite.
pub fn wishart(x: &Array2<Complex64>) -> Array2<Complex64> {
    let (d, s) = x.dim();
    let mut w = Array2::<Complex64>::zeros((d, d));
    debug_assert!(x.is_standard_layout());
    unsafe {
        cblas_sys::cblas_zherk(
            cblas_sys::CBLAS_LAYOUT::CblasRowMajor,
            cblas_sys::CBLAS_UPLO::CblasLower,
            cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
            d as i32,
            s as i32,
            1.0,
            x.as_ptr() as *const [f64; 2],
            s as i32,
            0.0,
            w.as_mut_ptr() as *mut [f64; 2],
            d as i32,
        );
    }
    // zherk fills one triangle; mirror it
    for i in 0..d {
        for j in (i + 1)..d {
            w[[i, j]] = w[[j, i]].conj();
        }
    }
    w
}

fn expect_square_bipartite(
    w: &Array2<Complex64>,
    n: usize,
    k: usize,
) -> Result<()> {
    let d = n * k;
    if w.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: format!("{d}x{d} (n={n}, k={k})"),
            got: format!("{}x{}", w.nrows(), w.ncols()),
        });
    }
    Ok(())
}

/// Partial trace over the second factor: `W_A[i,j] = sum_b W[(i,b),(j,b)]`,
/// an `n x n` matrix. Composite indices are `(i, b) -> i*k + b`.
pub fn partial_trace_second(w: &Array2<Complex64>, n: usize, k: usize) -> Result<Array2<Complex64>> {
    expect_square_bipartite(w, n, k)?;
    let mut out = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..k {
                acc += w[[i * k + b, j * k + b]];
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

/// Partial trace over the first factor: `W_B[a,b] = sum_i W[(i,a),(i,b)]`,
/// a `k x k` matrix.
pub fn partial_trace_first(w: &Array2<Complex64>, n: usize, k: usize) -> Result<Array2<Complex64>> {
    expect_square_bipartite(w, n, k)?;
    let mut out = Array2::<Complex64>::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += w[[i * k + a, i * k + b]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

/// The reduction on the second factor: `R = W_A ⊗ I_k - W`.
pub fn reduce(w: &Array2<Complex64>, n: usize, k: usize) -> Result<Array2<Complex64>> {
    let wa = partial_trace_second(w, n, k)?;
    let mut r = w.mapv(|v| -v);
    for i in 0..n {
        for j in 0..n {
            for b in 0..k {
                r[[i * k + b, j * k + b]] += wa[[i, j]];
            }
        }
    }
    Ok(r)
}

/// The reduction on the first factor: `R~ = I_n ⊗ W_B - W`.
pub fn reduce_first(w: &Array2<Complex64>, n: usize, k: usize) -> Result<Array2<Complex64>> {
    let wb = partial_trace_first(w, n, k)?;
    let mut r = w.mapv(|v| -v);
    for i in 0..n {
        for a in 0..k {
            for b in 0..k {
                r[[i * k + a, i * k + b]] += wb[[a, b]];
            }
        }
    }
    Ok(r)
}

/// Partial transpose on the second factor: every `k x k` block transposed in
/// place, `PT[(i,a),(j,b)] = W[(i,b),(j,a)]`.
pub fn partial_transpose(w: &Array2<Complex64>, n: usize, k: usize) -> Result<Array2<Complex64>> {
    expect_square_bipartite(w, n, k)?;
    let mut out = Array2::<Complex64>::zeros(w.dim());
    for i in 0..n {
        for j in 0..n {
            for a in 0..k {
                for b in 0..k {
                    out[[i * k + a, j * k + b]] = w[[i * k + b, j * k + a]];
                }
            }
        }
    }
    Ok(out)
}

/// Choi matrix of the reduction map `phi(X) = I_k Tr X - X`:
/// `C_phi = I_{k^2} - E_k` where `E_k = sum_{ij} |ii><jj|`. Its spectrum is
/// `1 - k` once and `1` with multiplicity `k^2 - 1`; for `k = 1` it vanishes.
pub fn choi_reduction_map(k: usize) -> Array2<Complex64> {
    let d = k * k;
    let mut c = Array2::<Complex64>::eye(d);
    for i in 0..k {
        for j in 0..k {
            c[[i * k + i, j * k + j]] -= Complex64::new(1.0, 0.0);
        }
    }
    c
}

/// Choi matrix of the composed (completely positive) map
/// `psi(X) = I_k Tr X - X^t`: the identity minus the swap operator, which is
/// twice a projector and in particular positive semidefinite.
pub fn choi_composed_map(k: usize) -> Array2<Complex64> {
    let d = k * k;
    let mut c = Array2::<Complex64>::eye(d);
    for a in 0..k {
        for b in 0..k {
            c[[a * k + b, b * k + a]] -= Complex64::new(1.0, 0.0);
        }
    }
    c
}

/// Kronecker product, row-major composite indexing `(i, a) -> i * cols_b + a`.
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::<Complex64>::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for x in 0..rb {
                for y in 0..cb {
                    out[[i * rb + x, j * cb + y]] = a[[i, j]] * b[[x, y]];
                }
            }
        }
    }
    out
}

pub fn matrix_trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().sum()
}

/// Full ascending spectrum of a Hermitian matrix.
///
/// The input is checked against `M = M*` (relative tolerance `1e-10` on the
/// largest entry) and then handed to LAPACK's values-only two-stage solver.
pub fn hermitian_eigenvalues(m: &Array2<Complex64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{rows}x{cols}"),
        });
    }
    let scale = m
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tolerance = 1e-10;
    let mut deviation = 0.0f64;
    for i in 0..rows {
        for j in i..cols {
            deviation = deviation.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    if deviation > tolerance * scale {
        return Err(Error::NonHermitian {
            deviation: deviation / scale,
            tolerance,
        });
    }
    let mut a = m.as_standard_layout().into_owned();
    zheev_2stage_values(&mut a)
}

/// Hermitian eigendecomposition with eigenvectors, for the small matrices the
/// oracles need. The backend hands a row-major complex buffer to LAPACK as if
/// it were column-major, i.e. it diagonalizes the conjugate matrix, so the
/// returned eigenvector columns must be conjugated to satisfy `M v = λ v`.
pub fn hermitian_eigenpairs(m: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    use ndarray_linalg::{Eigh, UPLO};
    let a = m.as_standard_layout().into_owned();
    let (vals, vecs) = a.eigh(UPLO::Lower).map_err(|e| Error::Lapack {
        routine: "zheev",
        detail: e.to_string(),
    })?;
    Ok((vals.to_vec(), vecs.mapv(|z| z.conj())))
}

/// Raw call into `zheev_2stage` (JOBZ='N'). The row-major buffer is passed as
/// column-major, i.e. as the conjugate of `M`, which has the same spectrum.
fn zheev_2stage_values(a: &mut Array2<Complex64>) -> Result<Vec<f64>> {
    let n = a.nrows() as i32;
    let mut w = vec![0.0f64; n as usize];
    let mut rwork = vec![0.0f64; (3 * n as usize).saturating_sub(2).max(1)];
    let mut info = 0i32;
    let lda = n.max(1);
    // workspace query
    let mut wkopt = [0.0f64; 2];
    let query = -1i32;
    unsafe {
        zheev_2stage_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &n,
            a.as_mut_ptr() as *mut [f64; 2],
            &lda,
            w.as_mut_ptr(),
            &mut wkopt,
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheev_2stage (workspace query)",
            detail: format!("info = {info}"),
        });
    }
    let lwork = (wkopt[0] as i32).max(1);
    let mut work = vec![[0.0f64; 2]; lwork as usize];
    unsafe {
        zheev_2stage_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &n,
            a.as_mut_ptr() as *mut [f64; 2],
            &lda,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheev_2stage",
            detail: format!("info = {info}"),
        });
    }
    Ok(w)
}
