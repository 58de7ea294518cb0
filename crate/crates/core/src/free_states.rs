//! Closed-form expectations of gauge-invariant free states: two-point
//! functions, Wick determinants for monomials, and the determinant formula
//! for exponential elements.
//!
//! Inner products are antilinear in the **first** argument, so the two-point
//! function reads `ω(a*(φ) a(ψ)) = ⟨ψ, Q φ⟩`. Getting this backwards silently
//! swaps `B` and `B†` in every bipartite formula; all call sites in this crate
//! rely on the convention fixed here.

use crate::mat::{det, eye, inner, CMat, CVec, C64};
use crate::symbols::Symbol;
use crate::{Error, Result, Tolerances};

/// A gauge-invariant free state, wrapping its symbol.
#[derive(Clone, Debug)]
pub struct FreeState {
    symbol: Symbol,
}

impl FreeState {
    pub fn new(symbol: Symbol) -> FreeState {
        FreeState { symbol }
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    /// `ω(a*(φ) a(ψ)) = ⟨ψ, Q φ⟩`.
    pub fn two_point(&self, phi: &CVec, psi: &CVec) -> Result<C64> {
        let n = self.dim();
        if phi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: phi.len() });
        }
        if psi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: psi.len() });
        }
        let qphi = self.symbol.matrix().dot(phi);
        Ok(inner(psi, &qphi))
    }

    /// Wick expectation of a balanced monomial:
    /// `ω(a*(φ₁)…a*(φₙ) a(ψₙ)…a(ψ₁)) = det[⟨ψ_k, Q φ_ℓ⟩]`.
    ///
    /// The empty monomial is the identity and evaluates to 1.
    pub fn wick_expectation(&self, m: &Monomial) -> Result<C64> {
        let n = m.order();
        let dim = self.dim();
        for v in m.creators.iter().chain(m.annihilators.iter()) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        if n == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        let mut w = CMat::zeros((n, n));
        for k in 0..n {
            let psi_k = m.annihilator_by_index(k + 1);
            for l in 0..n {
                let qphi = self.symbol.matrix().dot(&m.creators[l]);
                w[(k, l)] = inner(psi_k, &qphi);
            }
        }
        det(&w)
    }

    /// Expectation of the exponential element:
    /// `ω(E(X)) = det(1 - Q + Q X)`. `X` need not be invertible.
    pub fn exp_expectation(&self, x: &CMat) -> Result<C64> {
        let n = self.dim();
        if x.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n * n, got: x.len() });
        }
        let q = self.symbol.matrix();
        det(&(eye(n) - q + q.dot(x)))
    }

    /// Factorize the state along the kernel decomposition of its symbol into
    /// a pure Fock part, a strictly mixed part, and a pure anti-Fock part.
    pub fn factorize(&self, tol: &Tolerances) -> Result<Factorization> {
        let evals = self.symbol.eigenvalues();
        let evecs = self.symbol.eigenvectors();
        let mut groups: [Vec<usize>; 3] = [vec![], vec![], vec![]];
        for (i, &lam) in evals.iter().enumerate() {
            if lam <= tol.psd {
                groups[0].push(i);
            } else if lam >= 1.0 - tol.psd {
                groups[2].push(i);
            } else {
                groups[1].push(i);
            }
        }
        let part = |idx: &[usize]| -> Result<FactorPart> {
            let k = idx.len();
            let mut basis = CMat::zeros((self.dim(), k));
            let mut q = CMat::zeros((k, k));
            for (j, &i) in idx.iter().enumerate() {
                basis.column_mut(j).assign(&evecs.column(i));
                q[(j, j)] = evals[i].into();
            }
            Ok(FactorPart { basis, state: FreeState::new(Symbol::validate(&q, tol)?) })
        };
        Ok(Factorization {
            fock: part(&groups[0])?,
            mixed: part(&groups[1])?,
            anti_fock: part(&groups[2])?,
        })
    }
}

/// A balanced (gauge-invariant) monomial
/// `a*(φ₁) … a*(φₙ) a(ψₙ) … a(ψ₁)`.
///
/// `creators` stores `φ₁ … φₙ` and `annihilators` stores the annihilator
/// vectors in the order they appear in the product, i.e. `ψₙ … ψ₁`. The Wick
/// matrix `[⟨ψ_k, Q φ_ℓ⟩]` is then written exactly as printed.
#[derive(Clone, Debug)]
pub struct Monomial {
    creators: Vec<CVec>,
    annihilators: Vec<CVec>,
}

impl Monomial {
    /// Build a monomial; the counts must balance.
    pub fn new(creators: Vec<CVec>, annihilators_in_product_order: Vec<CVec>) -> Result<Monomial> {
        if creators.len() != annihilators_in_product_order.len() {
            return Err(Error::UnbalancedMonomial {
                creators: creators.len(),
                annihilators: annihilators_in_product_order.len(),
            });
        }
        Ok(Monomial { creators, annihilators: annihilators_in_product_order })
    }

    /// The identity monomial.
    pub fn identity() -> Monomial {
        Monomial { creators: vec![], annihilators: vec![] }
    }

    pub fn order(&self) -> usize {
        self.creators.len()
    }

    pub fn creators(&self) -> &[CVec] {
        &self.creators
    }

    /// Annihilators in product order, `ψₙ … ψ₁`.
    pub fn annihilators(&self) -> &[CVec] {
        &self.annihilators
    }

    /// `ψ_k` by paper subscript, `k = 1 ..= n`.
    pub fn annihilator_by_index(&self, k: usize) -> &CVec {
        &self.annihilators[self.order() - k]
    }

    /// The adjoint monomial: creators and annihilators swap subscript-wise.
    pub fn adjoint(&self) -> Monomial {
        let n = self.order();
        // (a*(φ₁)…a*(φₙ) a(ψₙ)…a(ψ₁))† = a*(ψ₁)…a*(ψₙ) a(φₙ)…a(φ₁)
        let creators: Vec<CVec> = (1..=n).map(|k| self.annihilator_by_index(k).clone()).collect();
        let annihilators: Vec<CVec> = (0..n).map(|j| self.creators[n - 1 - j].clone()).collect();
        Monomial { creators, annihilators }
    }
}

/// Restriction of a free state to one subspace of the kernel decomposition.
#[derive(Clone, Debug)]
pub struct FactorPart {
    /// Isometry from the retained subspace into the original one-mode space.
    pub basis: CMat,
    /// The restricted free state on that subspace.
    pub state: FreeState,
}

/// Output of [`FreeState::factorize`].
#[derive(Clone, Debug)]
pub struct Factorization {
    pub fock: FactorPart,
    pub mixed: FactorPart,
    pub anti_fock: FactorPart,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::max_abs;
    use ndarray::array;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn two_point_diagonal() {
        let q = Symbol::from_diag(&[0.3, 0.7], &tol()).unwrap();
        let st = FreeState::new(q);
        let v = st.two_point(&e(2, 0), &e(2, 0)).unwrap();
        assert!((v - C64::new(0.3, 0.0)).norm() < 1e-15);
        let v = st.two_point(&e(2, 0), &e(2, 1)).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn two_point_dimension_mismatch() {
        let q = Symbol::from_diag(&[0.3, 0.7], &tol()).unwrap();
        let st = FreeState::new(q);
        assert!(st.two_point(&e(3, 0), &e(2, 0)).is_err());
    }

    #[test]
    fn wick_empty_monomial_is_one() {
        let st = FreeState::new(Symbol::from_diag(&[0.4], &tol()).unwrap());
        let v = st.wick_expectation(&Monomial::identity()).unwrap();
        assert_eq!(v, C64::new(1.0, 0.0));
    }

    #[test]
    fn wick_diagonal_order_two() {
        // a*(e1) a*(e2) a(e2) a(e1) on Q = diag(q1, q2) gives q1 q2
        let st = FreeState::new(Symbol::from_diag(&[0.3, 0.8], &tol()).unwrap());
        let m = Monomial::new(
            vec![e(2, 0), e(2, 1)],
            vec![e(2, 1), e(2, 0)], // product order: a(e2) a(e1)
        )
        .unwrap();
        let v = st.wick_expectation(&m).unwrap();
        assert!((v - C64::new(0.24, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn wick_order_one_equals_two_point() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        use rand::SeedableRng;
        let st = FreeState::new(crate::symbols::random_symbol_in(3, 0.1, 0.9, &mut rng));
        let phi = crate::mat::random_vector(3, &mut rng);
        let psi = crate::mat::random_vector(3, &mut rng);
        let m = Monomial::new(vec![phi.clone()], vec![psi.clone()]).unwrap();
        let a = st.wick_expectation(&m).unwrap();
        let b = st.two_point(&phi, &psi).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn wick_adjoint_conjugates() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let st = FreeState::new(crate::symbols::random_symbol_in(4, 0.1, 0.9, &mut rng));
        let m = Monomial::new(
            (0..3).map(|_| crate::mat::random_vector(4, &mut rng)).collect(),
            (0..3).map(|_| crate::mat::random_vector(4, &mut rng)).collect(),
        )
        .unwrap();
        let v = st.wick_expectation(&m).unwrap();
        let w = st.wick_expectation(&m.adjoint()).unwrap();
        assert!((v.conj() - w).norm() < 1e-12);
    }

    #[test]
    fn unbalanced_monomial_rejected() {
        assert!(matches!(
            Monomial::new(vec![e(2, 0)], vec![]),
            Err(Error::UnbalancedMonomial { .. })
        ));
    }

    #[test]
    fn exp_expectation_identity() {
        let st = FreeState::new(Symbol::from_diag(&[0.2, 0.9], &tol()).unwrap());
        let v = st.exp_expectation(&eye(2)).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exp_expectation_diagonal_product() {
        let st = FreeState::new(Symbol::from_diag(&[0.2, 0.9], &tol()).unwrap());
        let x = array![
            [C64::new(3.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        ];
        let v = st.exp_expectation(&x).unwrap();
        let expect = (1.0 - 0.2 + 0.2 * 3.0) * (1.0 - 0.9 + 0.9 * (-1.0));
        assert!((v - C64::new(expect, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exp_expectation_accepts_singular_x() {
        let st = FreeState::new(Symbol::from_diag(&[0.4], &tol()).unwrap());
        let v = st.exp_expectation(&CMat::zeros((1, 1))).unwrap();
        assert!((v - C64::new(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn factorize_pure_parts() {
        let st = FreeState::new(Symbol::from_diag(&[0.0, 1.0], &tol()).unwrap());
        let f = st.factorize(&tol()).unwrap();
        assert_eq!(f.fock.state.dim(), 1);
        assert_eq!(f.mixed.state.dim(), 0);
        assert_eq!(f.anti_fock.state.dim(), 1);
    }

    #[test]
    fn factorize_strict_is_all_mixed() {
        let st = FreeState::new(Symbol::from_diag(&[0.5, 0.3], &tol()).unwrap());
        let f = st.factorize(&tol()).unwrap();
        assert_eq!(f.mixed.state.dim(), 2);
        assert_eq!(f.fock.state.dim(), 0);
        assert_eq!(f.anti_fock.state.dim(), 0);
        // the mixed symbol is Q expressed in the retained eigenbasis
        let rotated = crate::mat::dagger(&f.mixed.basis)
            .dot(st.symbol().matrix())
            .dot(&f.mixed.basis);
        assert!(max_abs(&(f.mixed.state.symbol().matrix() - &rotated)) < 1e-12);
    }
}
