//! Dense complex matrix helpers: Hermitian calculus, matrix functions,
//! pseudo-inverses, norms, and seeded random matrices.
//!
//! Matrix functions of Hermitian arguments go through the eigendecomposition;
//! logarithms of general arguments go through a diagonalizable
//! eigendecomposition and refuse defective input. The matrix exponential uses
//! Padé 13 scaling-and-squaring so it also covers non-Hermitian generators.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, Eig, Eigh, Inverse, UPLO};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().map(|z| z.conj())
}

/// Identity matrix.
pub fn eye(n: usize) -> CMat {
    CMat::eye(n)
}

/// `⟨x, y⟩`, antilinear in the first argument.
pub fn inner(x: &CVec, y: &CVec) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Largest entry modulus; 0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Max entry modulus of `m - m†`.
pub fn hermitian_residual(m: &CMat) -> f64 {
    max_abs(&(m - &dagger(m)))
}

/// `(m + m†)/2`, the Hermitian part.
pub fn hermitize(m: &CMat) -> CMat {
    (m + &dagger(m)).mapv(|z| 0.5 * z)
}

/// Kronecker product, second factor fastest.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let f = a[(ia, ja)];
            if f.is_zero() {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first; callers are expected to have checked the
/// Hermiticity residual against their tolerance already.
pub fn eigh(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok((Array1::zeros(0), CMat::zeros((0, 0))));
    }
    let (w, v) = hermitize(m).eigh(UPLO::Lower)?;
    Ok((w, v))
}

/// Smallest eigenvalue of a Hermitian matrix; +inf for the empty matrix.
pub fn min_eigval(m: &CMat) -> Result<f64> {
    let (w, _) = eigh(m)?;
    Ok(w.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `V f(Λ) V†` for Hermitian `m = V Λ V†`.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (w, v) = eigh(m)?;
    Ok(recompose(&w.mapv(f), &v))
}

/// Assemble `V diag(w) V†`.
pub fn recompose(w: &Array1<f64>, v: &CMat) -> CMat {
    let scaled = scale_columns_re(v, w);
    scaled.dot(&dagger(v))
}

fn scale_columns_re(v: &CMat, w: &Array1<f64>) -> CMat {
    let mut out = v.clone();
    for (j, col) in out.columns_mut().into_iter().enumerate() {
        let mut col = col;
        col.mapv_inplace(|z| z * w[j]);
    }
    out
}

/// Square root of a positive semidefinite matrix; small negative eigenvalues
/// are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    herm_fn(m, |x| x.max(0.0).sqrt())
}

/// Determinant via LU with partial pivoting; 1 for the empty matrix.
pub fn det(m: &CMat) -> Result<C64> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(C64::one());
    }
    Ok(m.det()?)
}

pub fn inv(m: &CMat) -> Result<CMat> {
    if m.nrows() == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    Ok(m.inv()?)
}

/// Singular values, descending; empty for degenerate shapes.
pub fn singular_values(m: &CMat) -> Result<Array1<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Array1::zeros(0));
    }
    // Singular values via the Hermitian eigenproblem of the Gram matrix is
    // not accurate enough for rank decisions; use the LAPACK SVD.
    use ndarray_linalg::SVD;
    let (_, s, _) = m.svd(false, false)?;
    Ok(s)
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff
/// `rcond * s_max`.
pub fn pinv(m: &CMat, rcond: f64) -> Result<CMat> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Ok(CMat::zeros((cols, rows)));
    }
    use ndarray_linalg::SVD;
    let (u, s, vt) = m.svd(true, true)?;
    let u = u.expect("svd with calc_u");
    let vt = vt.expect("svd with calc_vt");
    let smax = s.iter().copied().fold(0.0, f64::max);
    let cutoff = rcond * smax;
    let k = s.len();
    let mut sinv = CMat::zeros((k, k));
    for i in 0..k {
        if s[i] > cutoff && s[i] > 0.0 {
            sinv[(i, i)] = C64::new(1.0 / s[i], 0.0);
        }
    }
    // m = u s vt  =>  m+ = v s+ u†
    Ok(dagger(&vt).dot(&sinv).dot(&dagger(&u)))
}

/// Rank with relative cutoff `rcond * s_max`.
pub fn rank(m: &CMat, rcond: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let smax = s.iter().copied().fold(0.0, f64::max);
    Ok(s.iter().filter(|&&x| x > rcond * smax && x > 0.0).count())
}

/// Operator (spectral) norm.
pub fn opnorm(m: &CMat) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

/// Trace norm `‖m‖₁`, the sum of singular values.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.sum())
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

/// Matrix exponential by Padé 13 with scaling and squaring.
pub fn expm(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    // Hermitian inputs take the exact spectral route.
    if hermitian_residual(m) <= 1e-13 * (1.0 + max_abs(m)) {
        let (w, v) = eigh(m)?;
        return Ok(recompose(&w.mapv(f64::exp), &v));
    }
    // ‖m‖₁ (max column sum) controls the scaling power.
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 { (norm1 / theta13).log2().ceil() as i32 } else { 0 };
    let a = m.mapv(|z| z / C64::new(2f64.powi(s), 0.0));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &a6.mapv(|z| z * B[13])
        + &a4.mapv(|z| z * B[11])
        + &a2.mapv(|z| z * B[9]);
    let u = a.dot(&(a6.dot(&u_inner)
        + &a6.mapv(|z| z * B[7])
        + &a4.mapv(|z| z * B[5])
        + &a2.mapv(|z| z * B[3])
        + &id.mapv(|z| z * B[1])));
    let v_inner = &a6.mapv(|z| z * B[12])
        + &a4.mapv(|z| z * B[10])
        + &a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_inner)
        + &a6.mapv(|z| z * B[6])
        + &a4.mapv(|z| z * B[4])
        + &a2.mapv(|z| z * B[2])
        + &id.mapv(|z| z * B[0]);
    let mut r = inv(&(&v - &u))?.dot(&(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Principal logarithm of a diagonalizable matrix.
///
/// Errors with [`Error::NoPrincipalLog`] when an eigenvalue sits on the closed
/// negative real axis (including 0) and with [`Error::Defective`] when the
/// eigenbasis is numerically singular.
pub fn principal_log(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    let scale = max_abs(m).max(1e-300);
    // Hermitian positive definite inputs: spectral route, no eigenbasis
    // conditioning concerns.
    if hermitian_residual(m) <= 1e-13 * (1.0 + scale) {
        let (w, v) = eigh(m)?;
        if let Some(&bad) = w.iter().find(|&&x| x <= 0.0) {
            return Err(Error::NoPrincipalLog { eigenvalue: C64::new(bad, 0.0) });
        }
        return Ok(recompose(&w.mapv(f64::ln), &v));
    }
    let (w, v) = m.eig()?;
    for &lam in w.iter() {
        if lam.norm() <= 1e-14 * scale {
            return Err(Error::NoPrincipalLog { eigenvalue: lam });
        }
        if lam.re < 0.0 && lam.im.abs() <= 1e-12 * lam.norm() {
            return Err(Error::NoPrincipalLog { eigenvalue: lam });
        }
    }
    let sv = singular_values(&v)?;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cond = smin / smax.max(1e-300);
    if !(cond > 1e-9) {
        return Err(Error::Defective { condition: cond });
    }
    let vinv = inv(&v)?;
    let mut logd = CMat::zeros((n, n));
    for i in 0..n {
        logd[(i, i)] = w[i].ln();
    }
    Ok(v.dot(&logd).dot(&vinv))
}

/// Complex matrix with independent standard complex Gaussian entries.
pub fn random_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_shape_fn((rows, cols), |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    })
}

/// Random Hermitian matrix (Hermitian part of a Gaussian matrix).
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    hermitize(&random_gaussian(n, n, rng))
}

/// Random Hermitian matrix with spectrum mapped affinely onto `[lo, hi]`.
pub fn random_hermitian_in(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<CMat> {
    assert!(lo <= hi, "empty spectral interval");
    let g = random_hermitian(n, rng);
    let (w, v) = eigh(&g)?;
    let (wmin, wmax) = (
        w.iter().copied().fold(f64::INFINITY, f64::min),
        w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let spread = wmax - wmin;
    let mapped = if spread < 1e-12 {
        w.mapv(|_| 0.5 * (lo + hi))
    } else {
        w.mapv(|x| lo + (hi - lo) * (x - wmin) / spread)
    };
    Ok(recompose(&mapped, &v))
}

/// Haar-ish random unitary via QR of a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> Result<CMat> {
    use ndarray_linalg::QR;
    let g = random_gaussian(n, n, rng);
    let (q, r) = g.qr()?;
    // fix the phase so the factorization is unique-ish
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::one() };
        q.column_mut(j).mapv_inplace(|z| z * phase.conj());
    }
    Ok(q)
}

/// Random complex vector with Gaussian entries.
pub fn random_vector(n: usize, rng: &mut impl Rng) -> CVec {
    CVec::from_shape_fn(n, |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expm_matches_spectral_route_on_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(5, &mut rng);
        let skew = h.mapv(|z| z * C64::new(0.0, 1.0)); // anti-Hermitian, general path
        let e1 = expm(&skew).unwrap();
        // exp(iH) = V exp(iΛ) V†
        let (w, v) = eigh(&h).unwrap();
        let mut d = CMat::zeros((5, 5));
        for i in 0..5 {
            d[(i, i)] = C64::new(0.0, w[i]).exp();
        }
        let e2 = v.dot(&d).dot(&dagger(&v));
        assert!(max_abs(&(&e1 - &e2)) < 1e-12);
    }

    #[test]
    fn principal_log_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_gaussian(4, 4, &mut rng).mapv(|z| z * 0.3) + &eye(4);
        let l = principal_log(&g).unwrap();
        let back = expm(&l).unwrap();
        assert!(max_abs(&(&back - &g)) < 1e-11);
    }

    #[test]
    fn principal_log_rejects_negative_axis() {
        let mut m = eye(2);
        m[(0, 0)] = C64::new(-1.0, 0.0);
        assert!(matches!(principal_log(&m), Err(Error::NoPrincipalLog { .. })));
    }

    #[test]
    fn pinv_recovers_inverse_on_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_gaussian(4, 4, &mut rng) + &eye(4).mapv(|z| z * 3.0);
        let p = pinv(&g, 1e-12).unwrap();
        assert!(max_abs(&(g.dot(&p) - eye(4))) < 1e-10);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unitary(6, &mut rng).unwrap();
        assert!(max_abs(&(dagger(&u).dot(&u) - eye(6))) < 1e-12);
    }

    #[test]
    fn kron_dims_and_values() {
        let a = CMat::from_shape_fn((2, 2), |(i, j)| C64::new((2 * i + j) as f64, 0.0));
        let b = eye(3);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (6, 6));
        assert_eq!(k[(3, 0)], C64::new(2.0, 0.0));
        assert_eq!(k[(4, 1)], C64::new(2.0, 0.0));
    }
}
