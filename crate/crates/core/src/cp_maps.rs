//! Gauge-invariant free completely positive identity-preserving maps and the
//! minimal generalized-subsystem model: a pair `(R, S)` with
//! `0 ≤ S ≤ 1 - R†R` acts on symbols by `T ↦ R†TR + S`, and the pull-backs of
//! all free states on the target sweep exactly the closed conditional set of
//! a trimmed block.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conditioning::{conditional_bounds, membership, Membership};
use crate::mat::{dagger, eye, hermitize, max_abs, min_eigval, pinv, sqrt_psd, CMat};
use crate::symbols::{BlockSymbol, Symbol};
use crate::{Error, Result, Tolerances};

/// A free completely positive identity-preserving map, determined by
/// `R: H → K` and Hermitian `S` on `H` with `0 ≤ S ≤ 1 - R†R`.
#[derive(Clone, Debug)]
pub struct FreeCPMap {
    r: CMat,
    s: CMat,
}

impl FreeCPMap {
    /// Validate the defining inequalities.
    pub fn new(r: &CMat, s: &CMat, tol: &Tolerances) -> Result<FreeCPMap> {
        let h_dim = s.nrows();
        if s.ncols() != h_dim {
            return Err(Error::NotSquare { rows: s.nrows(), cols: s.ncols() });
        }
        if r.ncols() != h_dim {
            return Err(Error::DimensionMismatch { expected: h_dim, got: r.ncols() });
        }
        let residual = crate::mat::hermitian_residual(s);
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual, tol: tol.herm });
        }
        let s = hermitize(s);
        let s_min = min_eigval(&s)?;
        if s_min < -tol.psd {
            return Err(Error::SNotPositive { min_eigenvalue: s_min });
        }
        let slack = eye(h_dim) - dagger(r).dot(r) - &s;
        let slack_min = min_eigval(&slack)?;
        if slack_min < -tol.psd {
            return Err(Error::SExceedsComplement { min_eigenvalue: slack_min });
        }
        Ok(FreeCPMap { r: r.clone(), s })
    }

    /// `R`, mapping `H` into the target space `K` (a `dim K × dim H` matrix).
    pub fn r(&self) -> &CMat {
        &self.r
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn source_dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.r.nrows()
    }

    /// Pull back a free state on the target: symbol `R† T R + S`.
    pub fn pullback(&self, t: &Symbol, tol: &Tolerances) -> Result<Symbol> {
        if t.dim() != self.target_dim() {
            return Err(Error::DimensionMismatch { expected: self.target_dim(), got: t.dim() });
        }
        let m = dagger(&self.r).dot(t.matrix()).dot(&self.r) + &self.s;
        Symbol::validate(&hermitize(&m), tol)
    }
}

/// The minimal free CP map whose pull-backs sweep the closed conditional set
/// of a trimmed block: target `K = ran(B)`,
/// `S = A - B C⁻¹ B†`, and `R = √(B C⁻¹ B† + B (1-C)⁻¹ B†)` compressed to
/// `K`. The free unitary on `K` is fixed to the identity.
pub fn minimal_model(block: &BlockSymbol, tol: &Tolerances) -> Result<FreeCPMap> {
    let (d1, _) = block.dims();
    let b = block.b();
    use ndarray_linalg::SVD;
    let rank = if b.nrows() == 0 || b.ncols() == 0 {
        0
    } else {
        let (_, sv, _) = b.svd(false, false)?;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            0
        } else if smax < tol.psd {
            return Err(Error::RankDeficient { sigma_max: smax });
        } else {
            sv.iter().filter(|&&x| x > tol.psd * smax).count()
        }
    };
    let bounds = conditional_bounds(block, tol)?;
    let s = bounds.lower.clone();
    if rank == 0 {
        // uncorrelated parties: empty target space, pull-back set is {A}
        return FreeCPMap::new(&CMat::zeros((0, d1)), &s, tol);
    }
    let delta = hermitize(&(&bounds.upper - &bounds.lower)); // B C⁻¹ B† + B (1-C)⁻¹ B†
    let sqrt_delta = sqrt_psd(&delta)?;
    // Orthonormal basis of ran(B) = ran(Δ): top eigenvectors of Δ.
    let (w, v) = crate::mat::eigh(&delta)?;
    let n = w.len();
    let mut basis = CMat::zeros((d1, rank));
    for j in 0..rank {
        basis.column_mut(j).assign(&v.column(n - 1 - j));
    }
    let r = dagger(&basis).dot(&sqrt_delta);
    FreeCPMap::new(&r, &s, tol)
}

/// Report from [`model_equivalence_check`].
#[derive(Clone, Debug)]
pub struct ModelEquivalenceReport {
    pub trials: usize,
    pub interior: usize,
    pub boundary: usize,
    pub outside: usize,
    /// Largest `‖R†TR + S - Ã‖` over the recovered interior targets.
    pub max_recovery_residual: f64,
    /// Largest violation of the conditional bounds by a pull-back.
    pub max_bound_violation: f64,
}

impl ModelEquivalenceReport {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.outside == 0
            && self.max_recovery_residual <= tol.oracle
            && self.max_bound_violation <= tol.oracle
    }
}

/// Sweep the model: random pull-backs must classify as interior/boundary of
/// the conditional set, and random interior symbols must be recovered as
/// pull-backs via pseudo-inverses of `R`.
pub fn model_equivalence_check(
    block: &BlockSymbol,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ModelEquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = minimal_model(block, tol)?;
    let k_dim = map.target_dim();
    let bounds = conditional_bounds(block, tol)?;

    let mut interior = 0;
    let mut boundary = 0;
    let mut outside = 0;
    let mut max_bound_violation: f64 = 0.0;
    let mut max_recovery_residual: f64 = 0.0;

    for _ in 0..trials {
        let t = random_symbol_full_range(k_dim, &mut rng, tol);
        let pulled = map.pullback(&t, tol)?;
        match membership(block, &pulled, tol)? {
            Membership::Interior => interior += 1,
            Membership::Boundary => boundary += 1,
            Membership::Outside => outside += 1,
        }
        let v1 = -min_eigval(&(pulled.matrix() - &bounds.lower))?;
        let v2 = -min_eigval(&(&bounds.upper - pulled.matrix()))?;
        max_bound_violation = max_bound_violation.max(v1.max(v2)).max(0.0);
    }

    // Interior targets are generated as pull-backs of strict symbols, then
    // recovered through T = (R†)⁺ (Ã - S) R⁺ clipped into [0, 1].
    let r_pinv = pinv(map.r(), tol.psd)?;
    for _ in 0..trials {
        let t_strict = crate::symbols::random_symbol_in(k_dim, 0.1, 0.9, &mut rng);
        let target = map.pullback(&t_strict, tol)?;
        let diff = target.matrix() - map.s();
        let t_rec = hermitize(&dagger(&r_pinv).dot(&diff).dot(&r_pinv));
        let t_rec = clip_unit_interval(&t_rec)?;
        let rebuilt = dagger(map.r()).dot(&t_rec).dot(map.r()) + map.s();
        let residual = max_abs(&(rebuilt - target.matrix()));
        max_recovery_residual = max_recovery_residual.max(residual);
    }

    Ok(ModelEquivalenceReport {
        trials,
        interior,
        boundary,
        outside,
        max_recovery_residual,
        max_bound_violation,
    })
}

fn clip_unit_interval(m: &CMat) -> Result<CMat> {
    let (w, v) = crate::mat::eigh(m)?;
    Ok(crate::mat::recompose(&w.mapv(|x| x.clamp(0.0, 1.0)), &v))
}

fn random_symbol_full_range(dim: usize, rng: &mut impl Rng, tol: &Tolerances) -> Symbol {
    if dim == 0 {
        return Symbol::validate(&CMat::zeros((0, 0)), tol).expect("empty symbol");
    }
    crate::symbols::random_symbol_in(dim, 0.0, 1.0, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::random_block_symbol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn m1(x: f64) -> CMat {
        CMat::from_elem((1, 1), C64::new(x, 0.0))
    }

    #[test]
    fn validate_vacuum_map() {
        let map = FreeCPMap::new(&CMat::zeros((1, 1)), &CMat::zeros((1, 1)), &tol()).unwrap();
        let t = Symbol::validate(&m1(0.7), &tol()).unwrap();
        let pulled = map.pullback(&t, &tol()).unwrap();
        assert!(max_abs(pulled.matrix()) < 1e-14);
    }

    #[test]
    fn validate_identity_map() {
        let map = FreeCPMap::new(&eye(2), &CMat::zeros((2, 2)), &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = crate::symbols::random_symbol_in(2, 0.1, 0.9, &mut rng);
        let pulled = map.pullback(&t, &tol()).unwrap();
        assert!(max_abs(&(pulled.matrix() - t.matrix())) < 1e-12);
    }

    #[test]
    fn validate_rejects_s_exceeding_complement() {
        let s = m1(0.1);
        assert!(matches!(
            FreeCPMap::new(&eye(1), &s, &tol()),
            Err(Error::SExceedsComplement { .. })
        ));
    }

    #[test]
    fn validate_rejects_negative_s() {
        assert!(matches!(
            FreeCPMap::new(&CMat::zeros((1, 1)), &m1(-0.3), &tol()),
            Err(Error::SNotPositive { .. })
        ));
    }

    #[test]
    fn pullback_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = crate::mat::random_gaussian(2, 2, &mut rng).mapv(|z| z * 0.3);
        let s = crate::mat::random_hermitian_in(2, 0.2, 0.4, &mut rng).unwrap();
        let map = FreeCPMap::new(&r, &s, &tol()).unwrap();
        let zero = Symbol::from_diag(&[0.0, 0.0], &tol()).unwrap();
        let one = Symbol::from_diag(&[1.0, 1.0], &tol()).unwrap();
        let p0 = map.pullback(&zero, &tol()).unwrap();
        let p1 = map.pullback(&one, &tol()).unwrap();
        assert!(max_abs(&(p0.matrix() - map.s())) < 1e-12);
        let expected = dagger(map.r()).dot(map.r()) + map.s();
        assert!(max_abs(&(p1.matrix() - &expected)) < 1e-12);
    }

    #[test]
    fn minimal_model_uncorrelated() {
        let blk = crate::symbols::BlockSymbol::new(
            &m1(0.4),
            &CMat::zeros((1, 1)),
            &m1(0.5),
            &tol(),
        )
        .unwrap();
        let map = minimal_model(&blk, &tol()).unwrap();
        assert_eq!(map.target_dim(), 0);
        assert!((map.s()[(0, 0)].re - 0.4).abs() < 1e-12);
        // pull-back of the unique (empty) target state is A itself
        let empty = Symbol::validate(&CMat::zeros((0, 0)), &tol()).unwrap();
        let pulled = map.pullback(&empty, &tol()).unwrap();
        assert!((pulled.matrix()[(0, 0)].re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn minimal_model_worked_example() {
        // A = C = 0.5, B = 0.25: S = 0.375, R = 0.5, pull-backs sweep
        // [0.375, 0.625]
        let blk = crate::symbols::BlockSymbol::new(&m1(0.5), &m1(0.25), &m1(0.5), &tol()).unwrap();
        let map = minimal_model(&blk, &tol()).unwrap();
        assert!((map.s()[(0, 0)].re - 0.375).abs() < 1e-12);
        assert!((map.r()[(0, 0)].norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn minimal_model_endpoints_match_bounds() {
        let blk = random_block_symbol(3, 2, 7, 0.1);
        let t = tol();
        let map = minimal_model(&blk, &t).unwrap();
        let bounds = conditional_bounds(&blk, &t).unwrap();
        let k = map.target_dim();
        assert_eq!(k, 2); // rank of a random 3x2 B
        let zero = Symbol::validate(&CMat::zeros((k, k)), &t).unwrap();
        let one = Symbol::validate(&eye(k), &t).unwrap();
        let p0 = map.pullback(&zero, &t).unwrap();
        let p1 = map.pullback(&one, &t).unwrap();
        assert!(max_abs(&(p0.matrix() - &bounds.lower)) < 1e-10);
        assert!(max_abs(&(p1.matrix() - &bounds.upper)) < 1e-10);
    }

    #[test]
    fn minimality_rank_identity() {
        // any map reproducing both endpoints needs R†R = upper - lower, so
        // the target dimension cannot drop below rank(B)
        let blk = random_block_symbol(3, 3, 11, 0.1);
        let t = tol();
        let map = minimal_model(&blk, &t).unwrap();
        let bounds = conditional_bounds(&blk, &t).unwrap();
        let delta = &bounds.upper - &bounds.lower;
        let rank_delta = crate::mat::rank(&delta, t.psd).unwrap();
        let rank_b = crate::mat::rank(blk.b(), t.psd).unwrap();
        assert_eq!(rank_delta, rank_b);
        assert_eq!(map.target_dim(), rank_b);
    }

    #[test]
    fn pullback_monotone_in_t() {
        let blk = random_block_symbol(2, 2, 13, 0.1);
        let t = tol();
        let map = minimal_model(&blk, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t1 = crate::symbols::random_symbol_in(2, 0.1, 0.5, &mut rng);
        // t2 = t1 + positive perturbation, still a symbol
        let bump = crate::mat::random_gaussian(2, 2, &mut rng);
        let bump = dagger(&bump).dot(&bump).mapv(|z| z * 0.05);
        let t2 = Symbol::validate(&(t1.matrix() + &bump), &t).unwrap();
        let p1 = map.pullback(&t1, &t).unwrap();
        let p2 = map.pullback(&t2, &t).unwrap();
        assert!(min_eigval(&(p2.matrix() - p1.matrix())).unwrap() > -1e-12);
    }

    #[test]
    fn equivalence_check_worked_block() {
        let blk = crate::symbols::BlockSymbol::new(&m1(0.5), &m1(0.25), &m1(0.5), &tol()).unwrap();
        let report = model_equivalence_check(&blk, 50, 17, &tol()).unwrap();
        assert_eq!(report.outside, 0);
        assert!(report.max_recovery_residual < 1e-10);
    }

    #[test]
    fn equivalence_check_random_blocks() {
        for seed in [1u64, 2, 3] {
            let blk = random_block_symbol(2, 2, seed, 0.1);
            let report = model_equivalence_check(&blk, 40, seed * 5 + 1, &tol()).unwrap();
            assert_eq!(report.outside, 0, "seed {seed}");
            assert!(report.max_bound_violation < 1e-8, "seed {seed}");
            assert!(report.max_recovery_residual < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn pullback_two_point_matches_fock_action() {
        // ω_T(a*(Rφ) a(Rψ) + ⟨ψ, Sφ⟩) = ⟨ψ, (R†TR + S) φ⟩ on the Fock space
        let blk = random_block_symbol(2, 2, 19, 0.1);
        let t = tol();
        let map = minimal_model(&blk, &t).unwrap();
        let k_dim = map.target_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t_sym = crate::symbols::random_symbol_in(k_dim, 0.1, 0.9, &mut rng);
        let rep = crate::fock::FockRep::build(k_dim).unwrap();
        let rho = rep.free_density_matrix(&t_sym).unwrap();
        let phi = crate::mat::random_vector(2, &mut rng);
        let psi = crate::mat::random_vector(2, &mut rng);
        let r_phi = map.r().dot(&phi);
        let r_psi = map.r().dot(&psi);
        let op = rep.creator(&r_phi).dot(&rep.annihilator(&r_psi));
        let s_term = crate::mat::inner(&psi, &map.s().dot(&phi));
        let lhs = rho.expect(&op) + s_term;
        let pulled = map.pullback(&t_sym, &t).unwrap();
        let rhs = crate::mat::inner(&psi, &pulled.matrix().dot(&phi));
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
