//! Brute-force ground truth: a dense Jordan-Wigner representation of the CAR
//! algebra on the 2^n-dimensional Fock space.
//!
//! Basis ordering: occupation-number basis with mode 1 as the fastest-varying
//! bit and the vacuum first, so basis index `b` has mode `i` occupied iff bit
//! `i - 1` of `b` is set. The Jordan-Wigner convention is
//! `a_i = Z^{⊗(i-1)} ⊗ σ⁻ ⊗ 1^{⊗(n-i)}` in that ordering, which makes
//! serialized matrices reproducible bit for bit. With this convention the
//! basis vector for an occupied set `{s₁ < … < s_k}` equals
//! `a*(e_{s₁}) ⋯ a*(e_{s_k})` applied to the vacuum, with no extra sign.

use rand::Rng;

use crate::mat::{
    dagger, expm, eye, max_abs, min_eigval, opnorm, principal_log, trace, trace_norm, CMat,
    CVec, C64,
};
use crate::symbols::Symbol;
use crate::{Error, Result, Tolerances};

/// Default cap on the number of modes (dense 1024² complex matrices).
pub const DEFAULT_MAX_MODES: usize = 10;
/// Hard cap; 2^12 = 4096 rows is the largest dense representation we permit.
pub const HARD_MODE_CAP: usize = 12;

/// Dense matrices for the annihilation operators of `n` modes, plus the total
/// number operator.
#[derive(Clone, Debug)]
pub struct FockRep {
    n_modes: usize,
    ann: Vec<CMat>,
    number_op: CMat,
}

impl FockRep {
    /// Build the representation, capped at [`DEFAULT_MAX_MODES`].
    pub fn build(n: usize) -> Result<FockRep> {
        FockRep::build_with_cap(n, DEFAULT_MAX_MODES)
    }

    /// Build with an explicit cap; the cap itself saturates at
    /// [`HARD_MODE_CAP`].
    pub fn build_with_cap(n: usize, cap: usize) -> Result<FockRep> {
        let cap = cap.min(HARD_MODE_CAP);
        if n == 0 || n > cap {
            return Err(Error::TooManyModes { requested: n, cap });
        }
        let dim = 1usize << n;
        let mut ann = Vec::with_capacity(n);
        for mode in 0..n {
            let mut m = CMat::zeros((dim, dim));
            let bit = 1usize << mode;
            for b in 0..dim {
                if b & bit != 0 {
                    let sign = jw_sign(b, mode);
                    m[(b & !bit, b)] = C64::new(sign, 0.0);
                }
            }
            ann.push(m);
        }
        let mut number_op = CMat::zeros((dim, dim));
        for b in 0..dim {
            number_op[(b, b)] = C64::new(b.count_ones() as f64, 0.0);
        }
        Ok(FockRep { n_modes: n, ann, number_op })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    /// The annihilation operator of mode `i` (0-based).
    pub fn ann(&self, i: usize) -> &CMat {
        &self.ann[i]
    }

    pub fn number_op(&self) -> &CMat {
        &self.number_op
    }

    /// `a(φ) = Σ conj(φ_i) a_i`, antilinear in `φ`.
    pub fn annihilator(&self, phi: &CVec) -> CMat {
        let mut out = CMat::zeros((self.dim(), self.dim()));
        for (i, a) in self.ann.iter().enumerate() {
            let w = phi[i].conj();
            if w.norm() > 0.0 {
                out.scaled_add(w, a);
            }
        }
        out
    }

    /// `a*(φ)`, complex linear in `φ`.
    pub fn creator(&self, phi: &CVec) -> CMat {
        dagger(&self.annihilator(phi))
    }

    /// Density matrix of the free state with the given symbol,
    /// `ρ = Π_i [(1-λ_i) + (2λ_i - 1) a*(v_i) a(v_i)]` over the eigenpairs of
    /// `Q`. The factors commute, and eigenvalues 0 and 1 come out exactly as
    /// pure Fock / anti-Fock factors.
    pub fn free_density_matrix(&self, q: &Symbol) -> Result<FockState> {
        if q.dim() != self.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, got: q.dim() });
        }
        let dim = self.dim();
        let mut rho = eye(dim);
        for (i, &lam) in q.eigenvalues().iter().enumerate() {
            let v = q.eigenvectors().column(i).to_owned();
            let a = self.annihilator(&v);
            let occ = dagger(&a).dot(&a);
            let mut factor = occ.mapv(|z| z * (2.0 * lam - 1.0));
            for d in 0..dim {
                factor[(d, d)] += 1.0 - lam;
            }
            rho = rho.dot(&factor);
        }
        Ok(FockState { rho })
    }

    /// Second quantization `Γ(A) = Σ A_{kℓ} a*_k a_ℓ`, filled directly from
    /// the sparse action of `a*_k a_ℓ` on occupation states.
    pub fn gamma(&self, a_mat: &CMat) -> Result<CMat> {
        let n = self.n_modes;
        if a_mat.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n * n, got: a_mat.len() });
        }
        let dim = self.dim();
        let mut out = CMat::zeros((dim, dim));
        for t in 0..dim {
            for l in 0..n {
                if t & (1 << l) == 0 {
                    continue;
                }
                let t1 = t & !(1 << l);
                let sign_l = jw_sign(t, l);
                for k in 0..n {
                    if t1 & (1 << k) != 0 {
                        continue;
                    }
                    let s = t1 | (1 << k);
                    let sign = sign_l * jw_sign(s, k);
                    out[(s, t)] += a_mat[(k, l)] * sign;
                }
            }
        }
        Ok(out)
    }

    /// Exponential element `E(X) = exp(Γ(log X))` for invertible
    /// diagonalizable `X` with a principal logarithm.
    pub fn exp_element(&self, x: &CMat) -> Result<CMat> {
        let logx = principal_log(x)?;
        expm(&self.gamma(&logx)?)
    }

    /// Check the operator-norm bounds of the exponential map on `1 + A` for
    /// positive `A`:
    /// `1 + ‖A‖₁ ≤ ‖E(1+A)‖ ≤ exp(‖A‖₁)` and `‖E(1+A) - 1‖ ≤ exp(‖A‖₁) - 1`.
    pub fn e_map_bounds_check(&self, a_pos: &CMat, tol: &Tolerances) -> Result<EMapBounds> {
        let min_eig = min_eigval(a_pos)?;
        if min_eig < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min_eig });
        }
        let n = self.n_modes;
        if a_pos.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n * n, got: a_pos.len() });
        }
        let tn = trace_norm(a_pos)?;
        let e = self.exp_element(&(eye(n) + a_pos))?;
        let norm_e = opnorm(&e)?;
        let norm_e_minus_1 = opnorm(&(&e - &eye(self.dim())))?;
        Ok(EMapBounds {
            trace_norm_a: tn,
            norm_e,
            norm_e_minus_one: norm_e_minus_1,
            lower_margin: norm_e - (1.0 + tn),
            upper_margin: tn.exp() - norm_e,
            difference_margin: (tn.exp() - 1.0) - norm_e_minus_1,
        })
    }

    /// Matrix `M` with `M[l, k] = tr(a*_k a_l W)`, computed from the sparse
    /// action of the quadratic monomials.
    pub fn quadratic_trace_matrix(&self, w: &CMat) -> CMat {
        let n = self.n_modes;
        let dim = self.dim();
        let mut out = CMat::zeros((n, n));
        // tr(a*_k a_l W) = Σ_t sign ⋅ W[t, s],  s = (t \ l) ∪ k
        for t in 0..dim {
            for l in 0..n {
                if t & (1 << l) == 0 {
                    continue;
                }
                let t1 = t & !(1 << l);
                let sign_l = jw_sign(t, l);
                for k in 0..n {
                    if t1 & (1 << k) != 0 {
                        continue;
                    }
                    let s = t1 | (1 << k);
                    let sign = sign_l * jw_sign(s, k);
                    out[(l, k)] += w[(t, s)] * sign;
                }
            }
        }
        out
    }

    /// Residuals of the Gaussian integration-by-parts identity
    /// `ω(a*(φ) Y a(φ)) = ω(a*(φ) a(φ)) ω(Y) + ω({a(χ), [a*(χ), Y]})`
    /// evaluated both with the smeared mode `χ = Qφ` and with the plain mode
    /// `χ = φ`. Only the smeared variant is an identity; the plain one is
    /// reported so the discrepancy stays visible.
    pub fn lemma1_residuals(
        &self,
        q: &Symbol,
        phi: &CVec,
        y: &CMat,
        tol: &Tolerances,
    ) -> Result<Lemma1Residuals> {
        let n = self.n_modes;
        if q.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.dim() });
        }
        if phi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: phi.len() });
        }
        let comm = y.dot(&self.number_op) - self.number_op.dot(y);
        let comm_residual = max_abs(&comm);
        if comm_residual > tol.oracle.max(1e-10) {
            return Err(Error::NotGaugeInvariant { residual: comm_residual });
        }
        let rho = self.free_density_matrix(q)?;
        let a_phi = self.annihilator(phi);
        let ad_phi = dagger(&a_phi);
        let lhs = trace(&rho.rho.dot(&ad_phi).dot(y).dot(&a_phi));
        let base = trace(&rho.rho.dot(&ad_phi).dot(&a_phi)) * trace(&rho.rho.dot(y));
        let corr = |chi: &CVec| -> C64 {
            let a = self.annihilator(chi);
            let ad = dagger(&a);
            let inner_comm = ad.dot(y) - y.dot(&ad);
            let anti = a.dot(&inner_comm) + inner_comm.dot(&a);
            trace(&rho.rho.dot(&anti))
        };
        let qphi = q.matrix().dot(phi);
        let smeared = (lhs - base - corr(&qphi)).norm();
        let plain = (lhs - base - corr(phi)).norm();
        Ok(Lemma1Residuals { smeared, plain })
    }

    /// Random positive gauge-invariant `Y` with `ω_Q(Y) = 1`, generated
    /// block-diagonally in the number sectors.
    pub fn random_gauge_invariant_positive(
        &self,
        q: &Symbol,
        rng: &mut impl Rng,
    ) -> Result<CMat> {
        let dim = self.dim();
        let mut sectors: Vec<Vec<usize>> = vec![vec![]; self.n_modes + 1];
        for b in 0..dim {
            sectors[b.count_ones() as usize].push(b);
        }
        let mut y = CMat::zeros((dim, dim));
        for idx in &sectors {
            let m = idx.len();
            let g = crate::mat::random_gaussian(m, m, rng);
            let blk = dagger(&g).dot(&g);
            for (i, &bi) in idx.iter().enumerate() {
                for (j, &bj) in idx.iter().enumerate() {
                    y[(bi, bj)] = blk[(i, j)];
                }
            }
        }
        let rho = self.free_density_matrix(q)?;
        let norm = trace(&rho.rho.dot(&y)).re;
        if norm <= 0.0 {
            return Err(Error::NotNormalizable { expectation: norm });
        }
        Ok(y.mapv(|z| z / norm))
    }
}

// (-1)^{number of occupied modes below `mode` in `state`}
fn jw_sign(state: usize, mode: usize) -> f64 {
    let below = state & ((1usize << mode) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A density matrix on the Fock space.
#[derive(Clone, Debug)]
pub struct FockState {
    pub rho: CMat,
}

impl FockState {
    /// `tr(ρ op)`.
    pub fn expect(&self, op: &CMat) -> C64 {
        trace(&self.rho.dot(op))
    }

    /// Two-point matrix `M[l, k] = tr(ρ a*_k a_l)` against a representation.
    pub fn two_point_matrix(&self, rep: &FockRep) -> CMat {
        rep.quadratic_trace_matrix(&self.rho)
    }

    pub fn trace(&self) -> C64 {
        trace(&self.rho)
    }
}

/// Margins from [`FockRep::e_map_bounds_check`]; all three margins are
/// nonnegative when the bounds hold.
#[derive(Clone, Copy, Debug)]
pub struct EMapBounds {
    pub trace_norm_a: f64,
    pub norm_e: f64,
    pub norm_e_minus_one: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub difference_margin: f64,
}

/// Residuals of the two readings of the integration-by-parts identity.
#[derive(Clone, Copy, Debug)]
pub struct Lemma1Residuals {
    /// Correlation term evaluated with `a(Qφ)`, `a*(Qφ)`; this is the
    /// identity that actually holds.
    pub smeared: f64,
    /// Correlation term evaluated with `a(φ)`, `a*(φ)`; kept for the record,
    /// generically large.
    pub plain: f64,
}

/// Embed an even (gauge-invariant) operator on the Fock space of the last
/// `d2` modes into the full space of `d1 + d2` modes.
///
/// With mode 1 as the fastest bit, the `H₂` modes are the slow bits, so the
/// embedding of an even element is the Kronecker product with the identity on
/// the fast factor. (Odd elements would pick up Jordan-Wigner strings across
/// `H₁`; this helper must only be used for even operators.)
pub fn embed_h2_even(y2: &CMat, d1: usize) -> CMat {
    crate::mat::kron(y2, &eye(1 << d1))
}
