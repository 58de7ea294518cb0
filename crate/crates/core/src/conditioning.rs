//! Conditional states of a bipartite free state: the closed-form conditional
//! symbol for exponential conditioners, the two-sided bounds on all reachable
//! conditional symbols, the inverse construction of a conditioner for a
//! target symbol, and the membership classification for the closure of the
//! conditional set.
//!
//! Everything here works on trimmed blocks (`0 < C < 1` strictly); call
//! [`crate::symbols::BlockSymbol::trim`] first when `C` has kernels. The
//! bounds implemented are the `C⁻¹ / (1-C)⁻¹` family: conditioners with
//! shrink factor `ε → 0` drive the conditional symbol onto these bounds,
//! which is exercised by the verification suites.

use crate::fock::{embed_h2_even, FockRep, FockState};
use crate::mat::{
    dagger, det, eigh, eye, hermitize, inv, max_abs, min_eigval, pinv, recompose, sqrt_psd, trace,
    CMat, C64,
};
use crate::symbols::{BlockSymbol, Symbol};
use crate::{Error, Result, Tolerances};

/// A normalized exponential conditioning element `E(L) / ω_Q(E(L))`,
/// determined by a positive semidefinite `L` on `H₂`. The normalization
/// `ω_Q(E(L)) = det(1 - C + CL)` is computed against the block the
/// conditioner was built for.
#[derive(Clone, Debug)]
pub struct ExponentialConditioner {
    l: CMat,
    normalization: f64,
}

impl ExponentialConditioner {
    /// Validate `L ≥ 0` and a nondegenerate normalization for `block`.
    pub fn new(l: &CMat, block: &BlockSymbol, tol: &Tolerances) -> Result<ExponentialConditioner> {
        let (_, d2) = block.dims();
        if l.dim() != (d2, d2) {
            return Err(Error::DimensionMismatch { expected: d2 * d2, got: l.len() });
        }
        let residual = crate::mat::hermitian_residual(l);
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual, tol: tol.herm });
        }
        let l = hermitize(l);
        let min_eig = min_eigval(&l)?;
        if min_eig < -tol.psd {
            return Err(Error::ConditionerNotPositive { min_eigenvalue: min_eig });
        }
        let normalization = normalization_det(block, &l)?;
        if normalization.norm() <= tol.det {
            return Err(Error::SingularResolvent { det_modulus: normalization.norm() });
        }
        Ok(ExponentialConditioner { l, normalization: normalization.re })
    }

    pub fn l(&self) -> &CMat {
        &self.l
    }

    /// `ω_Q(E(L)) = det(1 - C + CL)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }
}

fn normalization_det(block: &BlockSymbol, l: &CMat) -> Result<C64> {
    let d2 = block.c().dim();
    let c = block.c().matrix();
    det(&(eye(d2) - c + c.dot(l)))
}

/// The two-sided bounds on conditional symbols of a trimmed block:
/// `lower = A - B C⁻¹ B†` and `upper = A + B (1-C)⁻¹ B†`.
#[derive(Clone, Debug)]
pub struct ConditionalBounds {
    pub lower: CMat,
    pub upper: CMat,
}

/// Compute the conditional bounds. Errors with [`Error::SingularC`] on an
/// untrimmed degenerate block.
pub fn conditional_bounds(block: &BlockSymbol, tol: &Tolerances) -> Result<ConditionalBounds> {
    ensure_trimmed(block, tol)?;
    let b = block.b();
    let bd = dagger(b);
    let c_inv = block.c().apply_fn(|x| 1.0 / x);
    let compl_inv = block.c().apply_fn(|x| 1.0 / (1.0 - x));
    let lower = hermitize(&(block.a().matrix() - &b.dot(&c_inv).dot(&bd)));
    let upper = hermitize(&(block.a().matrix() + &b.dot(&compl_inv).dot(&bd)));
    Ok(ConditionalBounds { lower, upper })
}

fn ensure_trimmed(block: &BlockSymbol, tol: &Tolerances) -> Result<()> {
    if block.c().dim() == 0 {
        return Ok(());
    }
    let w = block.c().eigenvalues();
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min <= tol.psd {
        return Err(Error::SingularC { eigenvalue: min });
    }
    if max >= 1.0 - tol.psd {
        return Err(Error::SingularC { eigenvalue: max });
    }
    Ok(())
}

/// Closed-form symbol of the conditional state for an exponential
/// conditioner: `Ã = A - B (L - 1)(1 - C + CL)⁻¹ B†`.
pub fn conditional_symbol(
    block: &BlockSymbol,
    cond: &ExponentialConditioner,
    tol: &Tolerances,
) -> Result<Symbol> {
    let (_, d2) = block.dims();
    let c = block.c().matrix();
    let l = cond.l();
    let resolvent = eye(d2) - c + c.dot(l);
    let dd = det(&resolvent)?;
    if dd.norm() <= tol.det {
        return Err(Error::SingularResolvent { det_modulus: dd.norm() });
    }
    let res_inv = inv(&resolvent)?;
    let lm1 = l - &eye(d2);
    let b = block.b();
    let a_tilde = block.a().matrix() - &b.dot(&lm1).dot(&res_inv).dot(&dagger(b));
    // (L-1)(1-C+CL)⁻¹ is Hermitian in exact arithmetic; symmetrize round-off.
    Symbol::validate(&hermitize(&a_tilde), tol)
}

/// Classification of a candidate symbol against the conditional bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Membership::Interior => write!(f, "interior"),
            Membership::Boundary => write!(f, "boundary"),
            Membership::Outside => write!(f, "outside"),
        }
    }
}

/// Classify `candidate` against the closure of the conditional set by the
/// smallest eigenvalues of `candidate - lower` and `upper - candidate`.
pub fn membership(
    block: &BlockSymbol,
    candidate: &Symbol,
    tol: &Tolerances,
) -> Result<Membership> {
    let (d1, _) = block.dims();
    if candidate.dim() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, got: candidate.dim() });
    }
    let bounds = conditional_bounds(block, tol)?;
    let e1 = min_eigval(&(candidate.matrix() - &bounds.lower))?;
    let e2 = min_eigval(&(&bounds.upper - candidate.matrix()))?;
    let worst = e1.min(e2);
    Ok(if worst < -tol.psd {
        Membership::Outside
    } else if worst <= tol.psd {
        Membership::Boundary
    } else {
        Membership::Interior
    })
}

/// Construct an exponential conditioner whose conditional symbol is `target`.
///
/// `K` is recovered from `target = A + B K B†` through pseudo-inverses of
/// `B`, clipped to the admissible interval
/// `-(1-ε) C⁻¹ ≤ K ≤ (1-ε)(1-C)⁻¹`, and converted to `L = 1 - K (1 + CK)⁻¹`.
/// Targets outside the ε-shrunk bounds are rejected: the unshrunk boundary is
/// reachable only through weak* limits, not by finite conditioners.
pub fn conditioner_for_target(
    block: &BlockSymbol,
    target: &Symbol,
    eps: f64,
    tol: &Tolerances,
) -> Result<ExponentialConditioner> {
    assert!(eps > 0.0 && eps < 1.0, "shrink factor must lie in (0, 1)");
    ensure_trimmed(block, tol)?;
    let (d1, d2) = block.dims();
    if target.dim() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, got: target.dim() });
    }
    let b = block.b();
    let bd = dagger(b);
    let diff = target.matrix() - block.a().matrix();

    // shrunk-bounds check
    let c_inv = block.c().apply_fn(|x| 1.0 / x);
    let compl_inv = block.c().apply_fn(|x| 1.0 / (1.0 - x));
    let lower_s = block.a().matrix() - &b.dot(&c_inv).dot(&bd).mapv(|z| z * (1.0 - eps));
    let upper_s = block.a().matrix() + &b.dot(&compl_inv).dot(&bd).mapv(|z| z * (1.0 - eps));
    let m1 = min_eigval(&hermitize(&(target.matrix() - &lower_s)))?;
    let m2 = min_eigval(&hermitize(&(&upper_s - target.matrix())))?;
    let margin = m1.min(m2);
    if margin < -tol.psd {
        return Err(Error::TargetOutOfRange { margin });
    }

    // K = B⁺ (target - A) (B†)⁺, supported on ran(B†)
    let b_pinv = pinv(b, tol.psd)?;
    let k = hermitize(&b_pinv.dot(&diff).dot(&dagger(&b_pinv)));
    let reach_residual = max_abs(&(b.dot(&k).dot(&bd) - &diff));
    if reach_residual > tol.psd.max(1e3 * f64::EPSILON * (1.0 + max_abs(&diff))) {
        return Err(Error::TargetNotReachable { residual: reach_residual });
    }

    let k = clip_to_interval(&k, block, eps)?;

    // invertibility of 1 + CK, then N = -K (1 + CK)⁻¹ and L = 1 + N
    let one_plus_ck = eye(d2) + block.c().matrix().dot(&k);
    let dd = det(&one_plus_ck)?;
    if dd.norm() <= tol.det {
        return Err(Error::SingularResolvent { det_modulus: dd.norm() });
    }
    let n = -k.dot(&inv(&one_plus_ck)?);
    let l = hermitize(&(eye(d2) + n));
    ExponentialConditioner::new(&l, block, tol)
}

/// Clip a Hermitian `K` into `-(1-ε) C⁻¹ ≤ K ≤ (1-ε)(1-C)⁻¹`.
///
/// The two constraints are enforced sequentially in the frames where they
/// become scalar: `C^{1/2} K C^{1/2} ≥ -(1-ε)` and
/// `(1-C)^{1/2} K (1-C)^{1/2} ≤ 1-ε`. For `K` already inside the interval
/// both passes are identities.
fn clip_to_interval(k: &CMat, block: &BlockSymbol, eps: f64) -> Result<CMat> {
    let bound = 1.0 - eps;
    let sqrt_c = sqrt_psd(block.c().matrix())?;
    let sqrt_c_inv = block.c().apply_fn(|x| 1.0 / x.sqrt());
    let compl = eye(block.c().dim()) - block.c().matrix();
    let sqrt_compl = sqrt_psd(&compl)?;
    let sqrt_compl_inv = block.c().apply_fn(|x| 1.0 / (1.0 - x).sqrt());

    let clip_below = |m: &CMat| -> Result<CMat> {
        let (w, v) = eigh(m)?;
        Ok(recompose(&w.mapv(|x| x.max(-bound)), &v))
    };
    let clip_above = |m: &CMat| -> Result<CMat> {
        let (w, v) = eigh(m)?;
        Ok(recompose(&w.mapv(|x| x.min(bound)), &v))
    };

    let m1 = sqrt_c.dot(k).dot(&sqrt_c);
    let k = sqrt_c_inv.dot(&clip_below(&m1)?).dot(&sqrt_c_inv);
    let m2 = sqrt_compl.dot(&k).dot(&sqrt_compl);
    let k = sqrt_compl_inv.dot(&clip_above(&m2)?).dot(&sqrt_compl_inv);
    Ok(hermitize(&k))
}

/// Oracle hook: pre-assembled Fock machinery for conditioning one block.
///
/// Holds the full `(d₁+d₂)`-mode representation and the density matrix of the
/// block's free state so that repeated conditional evaluations stay cheap.
pub struct ConditioningOracle {
    rep_full: FockRep,
    rep2: FockRep,
    rho: FockState,
    d1: usize,
}

impl ConditioningOracle {
    pub fn new(block: &BlockSymbol) -> Result<ConditioningOracle> {
        let (d1, d2) = block.dims();
        let rep_full = FockRep::build_with_cap(d1 + d2, HARD_CAP_FOR_ORACLE)?;
        let rep2 = FockRep::build_with_cap(d2, HARD_CAP_FOR_ORACLE)?;
        let rho = rep_full.free_density_matrix(&block.assemble())?;
        Ok(ConditioningOracle { rep_full, rep2, rho, d1 })
    }

    pub fn rep_full(&self) -> &FockRep {
        &self.rep_full
    }

    pub fn rep2(&self) -> &FockRep {
        &self.rep2
    }

    pub fn rho(&self) -> &FockState {
        &self.rho
    }

    /// Conditional two-point matrix `Ã` for a positive gauge-invariant
    /// normalized `y` given on the Fock space of `H₂`; entries are arranged
    /// so that `⟨ψ, Ã φ⟩ = ω_Q(a*(φ) a(ψ) Y)`.
    pub fn conditional_two_point(&self, y: &CMat, tol: &Tolerances) -> Result<Symbol> {
        let dim2 = self.rep2.dim();
        if y.dim() != (dim2, dim2) {
            return Err(Error::DimensionMismatch { expected: dim2 * dim2, got: y.len() });
        }
        let comm = y.dot(self.rep2.number_op()) - self.rep2.number_op().dot(y);
        let comm_res = max_abs(&comm);
        if comm_res > tol.oracle.max(1e-10) {
            return Err(Error::NotGaugeInvariant { residual: comm_res });
        }
        let min_eig = min_eigval(y)?;
        if min_eig < -tol.psd.max(1e-10) {
            return Err(Error::NotPositive { min_eigenvalue: min_eig });
        }
        let y_full = embed_h2_even(y, self.d1);
        let expect = trace(&self.rho.rho.dot(&y_full)).re;
        if expect.abs() <= tol.psd {
            return Err(Error::NotNormalizable { expectation: expect });
        }
        if (expect - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { value: expect, tol: 1e-6 });
        }
        let weight = y_full.dot(&self.rho.rho).mapv(|z| z / expect);
        let full = self.rep_full.quadratic_trace_matrix(&weight);
        let a_tilde = full.slice(ndarray::s![..self.d1, ..self.d1]).to_owned();
        // oracle round-off can push eigenvalues slightly past [0,1]
        let mut tol_oracle = *tol;
        tol_oracle.psd = tol.psd.max(tol.oracle);
        tol_oracle.herm = tol.herm.max(tol.oracle);
        Symbol::validate(&hermitize(&a_tilde), &tol_oracle)
    }

    /// Conditional two-point matrix for a normalized exponential element,
    /// evaluated entirely on the Fock space.
    pub fn conditional_from_conditioner(
        &self,
        cond: &ExponentialConditioner,
        tol: &Tolerances,
    ) -> Result<Symbol> {
        let e_l = self.rep2.exp_element(cond.l())?;
        let y = e_l.mapv(|z| z / cond.normalization());
        self.conditional_two_point(&y, tol)
    }
}

const HARD_CAP_FOR_ORACLE: usize = crate::fock::HARD_MODE_CAP;

/// One-shot oracle evaluation of the conditional symbol for a gauge-invariant
/// positive normalized `y` on the Fock space of `H₂`.
pub fn oracle_conditional_symbol(
    block: &BlockSymbol,
    y: &CMat,
    tol: &Tolerances,
) -> Result<Symbol> {
    ConditioningOracle::new(block)?.conditional_two_point(y, tol)
}
