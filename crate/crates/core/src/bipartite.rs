//! Generic bipartite machinery on finite-dimensional matrix algebras:
//! conditional functionals of density matrices, correlation dimension via the
//! realignment map, Schmidt decomposition, and the manifestly positive model
//! for conditional states of pure states.

use ndarray::{Array1, Array4};

use crate::mat::{hermitize, kron, min_eigval, trace, CMat, CVec, C64};
use crate::{Error, Result, Tolerances};

/// A bipartite density matrix with an explicit tensor factorization
/// `dims = (d₁, d₂)`; row/column index `(i, k)` flattens to `i·d₂ + k`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: CMat,
    dims: (usize, usize),
}

impl DensityMatrix {
    pub fn new(rho: &CMat, dims: (usize, usize), tol: &Tolerances) -> Result<DensityMatrix> {
        let (d1, d2) = dims;
        let n = d1 * d2;
        if rho.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n * n, got: rho.len() });
        }
        let residual = crate::mat::hermitian_residual(rho);
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual, tol: tol.herm });
        }
        let rho = hermitize(rho);
        let tr = trace(&rho).re;
        if (tr - 1.0).abs() > tol.psd.max(1e-9) {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let min_eig = min_eigval(&rho)?;
        if min_eig < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min_eig });
        }
        Ok(DensityMatrix { rho, dims })
    }

    /// Pure state `|Ω⟩⟨Ω|`.
    pub fn from_pure(omega: &CVec, dims: (usize, usize), tol: &Tolerances) -> Result<DensityMatrix> {
        let n = dims.0 * dims.1;
        if omega.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: omega.len() });
        }
        let rho = CMat::from_shape_fn((n, n), |(i, j)| omega[i] * omega[j].conj());
        DensityMatrix::new(&rho, dims, tol)
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// The conditional state `σ` on party 1 induced by a positive,
    /// normalized `A₂`: `tr(σ A₁) = tr(ρ A₁ ⊗ A₂)`.
    ///
    /// `A₂` must satisfy `⟨1 ⊗ A₂⟩ = 1` up to `1e-6` (it is renormalized
    /// internally inside that window).
    pub fn conditional_functional(&self, a2: &CMat, tol: &Tolerances) -> Result<CMat> {
        let (d1, d2) = self.dims;
        if a2.dim() != (d2, d2) {
            return Err(Error::DimensionMismatch { expected: d2 * d2, got: a2.len() });
        }
        let min_eig = min_eigval(a2)?;
        if min_eig < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min_eig });
        }
        let lifted = kron(&crate::mat::eye(d1), a2);
        let weight = self.rho.dot(&lifted);
        let expect = trace(&weight).re;
        if expect <= tol.psd {
            return Err(Error::NotNormalizable { expectation: expect });
        }
        if (expect - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { value: expect, tol: 1e-6 });
        }
        // σ = Tr₂[ρ (1 ⊗ A₂)] / ⟨1 ⊗ A₂⟩
        let mut sigma = CMat::zeros((d1, d1));
        for i in 0..d1 {
            for j in 0..d1 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d2 {
                    acc += weight[(i * d2 + k, j * d2 + k)];
                }
                sigma[(i, j)] = acc / expect;
            }
        }
        Ok(hermitize(&sigma))
    }

    /// Rank of the realignment of `ρ` viewed as the map `A₂ → A₁*`; entry
    /// `((i,k),(j,l))` of `ρ` is regrouped to map indices `((i,j),(k,l))`.
    pub fn correlation_dimension(&self, tol: &Tolerances) -> Result<usize> {
        let (d1, d2) = self.dims;
        let mut r = CMat::zeros((d1 * d1, d2 * d2));
        for i in 0..d1 {
            for j in 0..d1 {
                for k in 0..d2 {
                    for l in 0..d2 {
                        r[(i * d1 + j, k * d2 + l)] = self.rho[(i * d2 + k, j * d2 + l)];
                    }
                }
            }
        }
        crate::mat::rank(&r, tol.psd)
    }
}

/// A normalized bipartite pure state together with its Schmidt data.
#[derive(Clone, Debug)]
pub struct PureBipartite {
    omega: CVec,
    dims: (usize, usize),
    /// Schmidt coefficients `r_i^{1/2}`, descending and strictly positive.
    coeffs: Array1<f64>,
    /// Orthonormal left vectors, `d₁ × p`.
    left: CMat,
    /// Orthonormal right vectors, `d₂ × p`.
    right: CMat,
}

/// Schmidt-decompose a normalized vector in `C^{d₁} ⊗ C^{d₂}`.
pub fn schmidt(omega: &CVec, dims: (usize, usize), tol: &Tolerances) -> Result<PureBipartite> {
    let (d1, d2) = dims;
    if omega.len() != d1 * d2 {
        return Err(Error::DimensionMismatch { expected: d1 * d2, got: omega.len() });
    }
    let norm = omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol.psd.max(1e-9) {
        return Err(Error::NotNormalized { value: norm, tol: tol.psd.max(1e-9) });
    }
    let m = CMat::from_shape_fn((d1, d2), |(i, k)| omega[i * d2 + k]);
    use ndarray_linalg::SVD;
    let (u, s, vt) = m.svd(true, true)?;
    let u = u.expect("svd with calc_u");
    let vt = vt.expect("svd with calc_vt");
    let smax = s.iter().copied().fold(0.0, f64::max);
    let p = s.iter().filter(|&&x| x > 1e-12 * smax).count();
    let mut coeffs = Array1::zeros(p);
    let mut left = CMat::zeros((d1, p));
    let mut right = CMat::zeros((d2, p));
    for j in 0..p {
        coeffs[j] = s[j];
        left.column_mut(j).assign(&u.column(j));
        // Ω_{(i,k)} = Σ_j s_j U[i,j] conj(V[k,j]): right vectors are the
        // conjugated rows of V†
        for k in 0..d2 {
            right[(k, j)] = vt[(j, k)];
        }
    }
    Ok(PureBipartite { omega: omega.clone(), dims, coeffs, left, right })
}

impl PureBipartite {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn omega(&self) -> &CVec {
        &self.omega
    }

    /// Schmidt rank `p`.
    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    /// Schmidt coefficients `r_i^{1/2}`, descending.
    pub fn coefficients(&self) -> &Array1<f64> {
        &self.coeffs
    }

    pub fn left_vectors(&self) -> &CMat {
        &self.left
    }

    pub fn right_vectors(&self) -> &CMat {
        &self.right
    }

    /// `‖Ω - Σ r_i^{1/2} e_i ⊗ f_i‖`.
    pub fn reconstruction_residual(&self) -> f64 {
        let (d1, d2) = self.dims;
        let mut rebuilt = CVec::zeros(d1 * d2);
        for j in 0..self.rank() {
            for i in 0..d1 {
                for k in 0..d2 {
                    rebuilt[i * d2 + k] += self.left[(i, j)] * self.right[(k, j)] * self.coeffs[j];
                }
            }
        }
        (&rebuilt - &self.omega).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The manifestly positive model for the conditional states of a pure
    /// state: `Λ(A₁)[k,l] = r_k^{1/2} r_l^{1/2} ⟨e_k, A₁ e_l⟩` on the
    /// `p`-dimensional model space, and its unital normalization
    /// `Γ(A₁) = Λ(1)^{-1/2} Λ(A₁) Λ(1)^{-1/2}`.
    pub fn pure_conditional_model(&self) -> PureConditionalModel {
        let p = self.rank();
        let d1 = self.dims.0;
        let mut lambda = Array4::zeros((p, p, d1, d1));
        let mut gamma = Array4::zeros((p, p, d1, d1));
        for k in 0..p {
            for l in 0..p {
                let w = self.coeffs[k] * self.coeffs[l];
                for i in 0..d1 {
                    for j in 0..d1 {
                        let base = self.left[(i, k)].conj() * self.left[(j, l)];
                        lambda[(k, l, i, j)] = base * w;
                        gamma[(k, l, i, j)] = base;
                    }
                }
            }
        }
        PureConditionalModel { lambda, gamma, coeffs: self.coeffs.clone() }
    }
}

/// The pair of linear maps `Λ` and `Γ` from a pure-state model, stored as
/// 4-index arrays: `map(A₁)[k,l] = Σ_{ij} T[k,l,i,j] A₁[i,j]`.
#[derive(Clone, Debug)]
pub struct PureConditionalModel {
    pub lambda: Array4<C64>,
    pub gamma: Array4<C64>,
    coeffs: Array1<f64>,
}

impl PureConditionalModel {
    pub fn model_dim(&self) -> usize {
        self.lambda.dim().0
    }

    pub fn apply_lambda(&self, a1: &CMat) -> CMat {
        apply_4idx(&self.lambda, a1)
    }

    pub fn apply_gamma(&self, a1: &CMat) -> CMat {
        apply_4idx(&self.gamma, a1)
    }

    /// `Λ(1) = diag(r_i)`.
    pub fn lambda_of_identity(&self) -> CMat {
        let p = self.model_dim();
        let mut m = CMat::zeros((p, p));
        for i in 0..p {
            m[(i, i)] = C64::new(self.coeffs[i] * self.coeffs[i], 0.0);
        }
        m
    }

    /// Choi matrix of `Γ`, an element of `M_{d₁} ⊗ M_p`; positive
    /// semidefinite iff `Γ` is completely positive.
    pub fn gamma_choi(&self) -> CMat {
        let (p, _, d1, _) = self.gamma.dim();
        let mut choi = CMat::zeros((d1 * p, d1 * p));
        for i in 0..d1 {
            for j in 0..d1 {
                // Γ(E_ij)[k,l] = T[k,l,i,j]
                for k in 0..p {
                    for l in 0..p {
                        choi[(i * p + k, j * p + l)] = self.gamma[(k, l, i, j)];
                    }
                }
            }
        }
        choi
    }

    /// The model state `σ' = Λ(1)^{1/2} F^T Λ(1)^{1/2} / tr(Λ(1) F^T)` for a
    /// perturbation `A₂`, where `F[k,l] = ⟨f_k, A₂ f_l⟩`; satisfies
    /// `⟨A₁ ⊗ A₂⟩ / ⟨1 ⊗ A₂⟩ = tr(σ' Γ(A₁))`.
    pub fn model_state(&self, pb: &PureBipartite, a2: &CMat) -> Result<CMat> {
        let p = self.model_dim();
        let mut f = CMat::zeros((p, p));
        for k in 0..p {
            for l in 0..p {
                let fk = pb.right.column(k).to_owned();
                let fl = pb.right.column(l).to_owned();
                f[(k, l)] = crate::mat::inner(&fk, &a2.dot(&fl));
            }
        }
        let ft = f.t().to_owned();
        let lam1 = self.lambda_of_identity();
        let sqrt_lam = lam1.mapv(|z| C64::new(z.re.max(0.0).sqrt(), 0.0));
        let norm = trace(&lam1.dot(&ft)).re;
        if norm <= 0.0 {
            return Err(Error::NotNormalizable { expectation: norm });
        }
        Ok(sqrt_lam.dot(&ft).dot(&sqrt_lam).mapv(|z| z / norm))
    }
}

fn apply_4idx(t: &Array4<C64>, a: &CMat) -> CMat {
    let (p, q, d, _) = t.dim();
    let mut out = CMat::zeros((p, q));
    for k in 0..p {
        for l in 0..q {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += t[(k, l, i, j)] * a[(i, j)];
                }
            }
            out[(k, l)] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::eye;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn basis_vec(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// Random pure state with prescribed Schmidt rank.
    fn random_pure_with_rank(
        d1: usize,
        d2: usize,
        p: usize,
        rng: &mut ChaCha8Rng,
    ) -> CVec {
        let u = crate::mat::random_unitary(d1, rng).unwrap();
        let v = crate::mat::random_unitary(d2, rng).unwrap();
        let mut r: Vec<f64> = (0..p).map(|_| rand::Rng::random_range(rng, 0.2..1.0)).collect();
        let total: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= total);
        let mut omega = CVec::zeros(d1 * d2);
        for (j, &rj) in r.iter().enumerate() {
            for i in 0..d1 {
                for k in 0..d2 {
                    omega[i * d2 + k] += u[(i, j)] * v[(k, j)] * rj.sqrt();
                }
            }
        }
        omega
    }

    #[test]
    fn product_state_conditional_is_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r1 = crate::mat::random_hermitian_in(2, 0.0, 1.0, &mut rng).unwrap();
        let r1 = r1.mapv(|z| z / trace(&r1));
        let r2 = crate::mat::random_hermitian_in(3, 0.0, 1.0, &mut rng).unwrap();
        let r2 = r2.mapv(|z| z / trace(&r2));
        let rho = DensityMatrix::new(&kron(&r1, &r2), (2, 3), &tol()).unwrap();
        // any admissible A2 returns the marginal of party 1
        let a2 = {
            let g = crate::mat::random_gaussian(3, 3, &mut rng);
            let pos = dagger(&g).dot(&g);
            let expect = trace(&r2.dot(&pos)).re;
            pos.mapv(|z| z / expect)
        };
        let sigma = rho.conditional_functional(&a2, &tol()).unwrap();
        assert!(max_abs(&(sigma - r1)) < 1e-10);
    }

    #[test]
    fn identity_a2_gives_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = crate::mat::random_gaussian(6, 6, &mut rng);
        let rho_raw = dagger(&g).dot(&g);
        let rho_raw = rho_raw.mapv(|z| z / trace(&rho_raw));
        let rho = DensityMatrix::new(&rho_raw, (2, 3), &tol()).unwrap();
        let sigma = rho.conditional_functional(&eye(3), &tol()).unwrap();
        // direct partial trace
        let mut pt = CMat::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    pt[(i, j)] += rho_raw[(i * 3 + k, j * 3 + k)];
                }
            }
        }
        assert!(max_abs(&(sigma - pt)) < 1e-12);
        assert!((trace(&rho.conditional_functional(&eye(3), &tol()).unwrap()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_conditional_collapses() {
        // Ω = (|00⟩ + |11⟩)/√2, A₂ = 2|0⟩⟨0| → σ = |0⟩⟨0|
        let mut omega = CVec::zeros(4);
        omega[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        omega[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::from_pure(&omega, (2, 2), &tol()).unwrap();
        let mut a2 = CMat::zeros((2, 2));
        a2[(0, 0)] = C64::new(2.0, 0.0);
        let sigma = rho.conditional_functional(&a2, &tol()).unwrap();
        assert!((sigma[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(sigma[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn conditional_rejects_negative_and_unnormalizable() {
        let mut omega = CVec::zeros(4);
        omega[0] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::from_pure(&omega, (2, 2), &tol()).unwrap();
        let mut neg = eye(2);
        neg[(0, 0)] = C64::new(-1.0, 0.0);
        assert!(matches!(
            rho.conditional_functional(&neg, &tol()),
            Err(Error::NotPositive { .. })
        ));
        // A2 supported where rho has no weight
        let mut a2 = CMat::zeros((2, 2));
        a2[(1, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            rho.conditional_functional(&a2, &tol()),
            Err(Error::NotNormalizable { .. })
        ));
    }

    #[test]
    fn correlation_dimension_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r1 = crate::mat::random_hermitian_in(3, 0.1, 1.0, &mut rng).unwrap();
        let r1 = r1.mapv(|z| z / trace(&r1));
        let r2 = crate::mat::random_hermitian_in(2, 0.1, 1.0, &mut rng).unwrap();
        let r2 = r2.mapv(|z| z / trace(&r2));
        let rho = DensityMatrix::new(&kron(&r1, &r2), (3, 2), &tol()).unwrap();
        assert_eq!(rho.correlation_dimension(&tol()).unwrap(), 1);
    }

    #[test]
    fn correlation_dimension_maximally_entangled() {
        let mut omega = CVec::zeros(4);
        omega[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        omega[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::from_pure(&omega, (2, 2), &tol()).unwrap();
        assert_eq!(rho.correlation_dimension(&tol()).unwrap(), 4);
    }

    #[test]
    fn correlation_dimension_is_schmidt_rank_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in 1..=3 {
            let omega = random_pure_with_rank(4, 4, p, &mut rng);
            let rho = DensityMatrix::from_pure(&omega, (4, 4), &tol()).unwrap();
            assert_eq!(rho.correlation_dimension(&tol()).unwrap(), p * p, "rank {p}");
        }
    }

    #[test]
    fn correlation_dimension_symmetric_under_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let omega = random_pure_with_rank(3, 4, 2, &mut rng);
        let rho = DensityMatrix::from_pure(&omega, (3, 4), &tol()).unwrap();
        // swap parties: index (k, i) -> k*3 + i
        let mut swapped = CVec::zeros(12);
        for i in 0..3 {
            for k in 0..4 {
                swapped[k * 3 + i] = omega[i * 4 + k];
            }
        }
        let rho_swapped = DensityMatrix::from_pure(&swapped, (4, 3), &tol()).unwrap();
        assert_eq!(
            rho.correlation_dimension(&tol()).unwrap(),
            rho_swapped.correlation_dimension(&tol()).unwrap()
        );
    }

    #[test]
    fn schmidt_product_vector() {
        let omega = {
            let mut v = CVec::zeros(6);
            v[0] = C64::new(1.0, 0.0); // e1 ⊗ f1
            v
        };
        let pb = schmidt(&omega, (2, 3), &tol()).unwrap();
        assert_eq!(pb.rank(), 1);
        assert!((pb.coefficients()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schmidt_bell_state() {
        let mut omega = CVec::zeros(4);
        omega[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        omega[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let pb = schmidt(&omega, (2, 2), &tol()).unwrap();
        assert_eq!(pb.rank(), 2);
        for j in 0..2 {
            assert!((pb.coefficients()[j].powi(2) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn schmidt_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut omega = crate::mat::random_vector(12, &mut rng);
        let norm = omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        omega.mapv_inplace(|z| z / norm);
        let pb = schmidt(&omega, (3, 4), &tol()).unwrap();
        assert!(pb.reconstruction_residual() < 1e-12);
        // orthonormal families
        let gram_l = dagger(pb.left_vectors()).dot(pb.left_vectors());
        let gram_r = dagger(pb.right_vectors()).dot(pb.right_vectors());
        assert!(max_abs(&(gram_l - eye(pb.rank()))) < 1e-12);
        assert!(max_abs(&(gram_r - eye(pb.rank()))) < 1e-12);
    }

    #[test]
    fn schmidt_rejects_unnormalized() {
        let omega = CVec::from_elem(4, C64::new(1.0, 0.0));
        assert!(matches!(
            schmidt(&omega, (2, 2), &tol()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn model_rank_one_is_scalar() {
        let omega = basis_vec(4, 1); // e1 ⊗ f2
        let pb = schmidt(&omega, (2, 2), &tol()).unwrap();
        let model = pb.pure_conditional_model();
        assert_eq!(model.model_dim(), 1);
        let mut a1 = CMat::zeros((2, 2));
        a1[(0, 0)] = C64::new(0.7, 0.0);
        let g = model.apply_gamma(&a1);
        assert!((g[(0, 0)] - C64::new(0.7, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn model_gamma_unital_and_cp() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let omega = random_pure_with_rank(4, 5, 3, &mut rng);
        let mut omega = omega;
        let norm = omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        omega.mapv_inplace(|z| z / norm);
        let pb = schmidt(&omega, (4, 5), &tol()).unwrap();
        let model = pb.pure_conditional_model();
        let g1 = model.apply_gamma(&eye(4));
        assert!(max_abs(&(g1 - eye(3))) < 1e-12);
        let choi = model.gamma_choi();
        assert!(min_eigval(&choi).unwrap() > -1e-10);
    }

    #[test]
    fn model_equal_coefficients_compression() {
        // equal Schmidt weights: Λ(1) = (1/p)·1 and Γ is the compression to
        // the span of the left vectors
        let mut omega = CVec::zeros(9);
        for i in 0..3 {
            omega[i * 3 + i] = C64::new(1.0 / 3f64.sqrt(), 0.0);
        }
        let pb = schmidt(&omega, (3, 3), &tol()).unwrap();
        let model = pb.pure_conditional_model();
        let lam1 = model.lambda_of_identity();
        assert!(max_abs(&(lam1 - eye(3).mapv(|z| z / 3.0))) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a1 = crate::mat::random_hermitian(3, &mut rng);
        let compressed = dagger(pb.left_vectors()).dot(&a1).dot(pb.left_vectors());
        assert!(max_abs(&(model.apply_gamma(&a1) - compressed)) < 1e-12);
    }

    #[test]
    fn model_state_reproduces_conditional_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut omega = random_pure_with_rank(3, 4, 3, &mut rng);
        let norm = omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        omega.mapv_inplace(|z| z / norm);
        let pb = schmidt(&omega, (3, 4), &tol()).unwrap();
        let model = pb.pure_conditional_model();
        let rho = DensityMatrix::from_pure(&omega, (3, 4), &tol()).unwrap();
        for _ in 0..10 {
            let g = crate::mat::random_gaussian(4, 4, &mut rng);
            let pos = dagger(&g).dot(&g);
            let lifted = kron(&eye(3), &pos);
            let expect = trace(&rho.matrix().dot(&lifted)).re;
            let a2 = pos.mapv(|z| z / expect);
            let sigma_direct = rho.conditional_functional(&a2, &tol()).unwrap();
            let sigma_model = model.model_state(&pb, &a2).unwrap();
            // tr(σ' Γ(A₁)) = tr(E σ' E† A₁) must match tr(σ A₁)
            let e = pb.left_vectors();
            let pulled = e.dot(&sigma_model).dot(&dagger(e));
            assert!(max_abs(&(pulled - sigma_direct)) < 1e-9);
            assert!(min_eigval(&sigma_model).unwrap() > -1e-10);
            assert!((trace(&sigma_model).re - 1.0).abs() < 1e-10);
        }
    }
}
