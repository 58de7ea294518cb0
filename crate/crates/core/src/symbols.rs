//! Symbols and block symbols: validation, positivity characterizations,
//! kernel decomposition, degenerate-kernel trimming, and the modular
//! Hamiltonian.

use ndarray::{s, Array1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mat::{
    self, dagger, eigh, eye, hermitian_residual, hermitize, max_abs, pinv, recompose, sqrt_psd,
    CMat,
};
use crate::{Error, Result, Tolerances};

/// The complete datum of a gauge-invariant free state: a Hermitian matrix `Q`
/// with spectrum in `[0, 1]`.
///
/// Validation symmetrizes the input, clips eigenvalues that stray outside
/// `[0, 1]` by at most the spectral tolerance, and keeps the
/// eigendecomposition around for the matrix functions used downstream.
#[derive(Clone, Debug)]
pub struct Symbol {
    q: CMat,
    evals: Array1<f64>,
    evecs: CMat,
}

impl Symbol {
    /// Validate a matrix as a symbol.
    pub fn validate(m: &CMat, tol: &Tolerances) -> Result<Symbol> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !mat::is_finite(m) {
            return Err(Error::NonFinite);
        }
        let residual = hermitian_residual(m);
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual, tol: tol.herm });
        }
        let (w, v) = eigh(m)?;
        for &lam in w.iter() {
            if lam < -tol.psd || lam > 1.0 + tol.psd {
                return Err(Error::SpectrumOutOfRange { eigenvalue: lam });
            }
        }
        let clipped = w.mapv(|x| x.clamp(0.0, 1.0));
        let q = recompose(&clipped, &v);
        Ok(Symbol { q, evals: clipped, evecs: v })
    }

    /// Symbol with the given diagonal.
    pub fn from_diag(d: &[f64], tol: &Tolerances) -> Result<Symbol> {
        let n = d.len();
        let mut m = CMat::zeros((n, n));
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x.into();
        }
        Symbol::validate(&m, tol)
    }

    /// Number of modes.
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.q
    }

    /// Eigenvalues, ascending, clipped into `[0, 1]`.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.evals
    }

    /// Orthonormal eigenvectors, columns matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMat {
        &self.evecs
    }

    /// True when the spectrum stays away from both 0 and 1 by more than the
    /// spectral tolerance.
    pub fn is_strict(&self, tol: &Tolerances) -> bool {
        self.evals.iter().all(|&x| x > tol.psd && x < 1.0 - tol.psd)
    }

    /// Orthogonal projectors onto `ker(Q)`, the strictly mixed part, and
    /// `ker(1 - Q)`. They sum to the identity.
    pub fn kernel_decomposition(&self, tol: &Tolerances) -> KernelProjectors {
        let n = self.dim();
        let mut zero = CMat::zeros((n, n));
        let mut mixed = CMat::zeros((n, n));
        let mut one = CMat::zeros((n, n));
        for (i, &lam) in self.evals.iter().enumerate() {
            let v = self.evecs.column(i);
            let proj = CMat::from_shape_fn((n, n), |(r, c)| v[r] * v[c].conj());
            if lam <= tol.psd {
                zero += &proj;
            } else if lam >= 1.0 - tol.psd {
                one += &proj;
            } else {
                mixed += &proj;
            }
        }
        KernelProjectors { zero, mixed, one }
    }

    /// Modular Hamiltonian `h = ln(1 - Q) - ln Q`, defined for strict symbols;
    /// satisfies `Q = (1 + e^h)^{-1}`.
    pub fn modular_hamiltonian(&self, tol: &Tolerances) -> Result<CMat> {
        for &lam in self.evals.iter() {
            if lam <= tol.psd || lam >= 1.0 - tol.psd {
                return Err(Error::SingularSpectrum { eigenvalue: lam });
            }
        }
        let h = self.evals.mapv(|x| (1.0 - x).ln() - x.ln());
        Ok(recompose(&h, &self.evecs))
    }

    /// `V f(Λ) V†` over the stored eigendecomposition.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMat {
        recompose(&self.evals.mapv(f), &self.evecs)
    }
}

/// Projectors from [`Symbol::kernel_decomposition`].
#[derive(Clone, Debug)]
pub struct KernelProjectors {
    pub zero: CMat,
    pub mixed: CMat,
    pub one: CMat,
}

/// A bipartite symbol partitioned over `H₁ ⊕ H₂`:
///
/// ```text
/// Q = [ A  B  ]
///     [ B† C  ]
/// ```
///
/// `B` carries all inter-party correlations. Construction validates the
/// assembled matrix, so every held block symbol is a valid symbol.
#[derive(Clone, Debug)]
pub struct BlockSymbol {
    a: Symbol,
    b: CMat,
    c: Symbol,
    assembled: Symbol,
}

impl BlockSymbol {
    /// Build and validate a block symbol from its parts.
    pub fn new(a: &CMat, b: &CMat, c: &CMat, tol: &Tolerances) -> Result<BlockSymbol> {
        let d1 = a.nrows();
        let d2 = c.nrows();
        if a.ncols() != d1 {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        if c.ncols() != d2 {
            return Err(Error::NotSquare { rows: c.nrows(), cols: c.ncols() });
        }
        if b.dim() != (d1, d2) {
            return Err(Error::DimensionMismatch { expected: d1 * d2, got: b.len() });
        }
        let full = assemble_raw(a, b, c);
        let assembled = Symbol::validate(&full, tol)?;
        // Blocks are re-extracted from the clipped assembly so that the parts
        // and the assembled symbol stay consistent.
        let fq = assembled.matrix();
        let a = Symbol::validate(&fq.slice(s![..d1, ..d1]).to_owned(), tol)?;
        let c = Symbol::validate(&fq.slice(s![d1.., d1..]).to_owned(), tol)?;
        let b = fq.slice(s![..d1, d1..]).to_owned();
        Ok(BlockSymbol { a, b, c, assembled })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.dim(), self.c.dim())
    }

    pub fn a(&self) -> &Symbol {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn c(&self) -> &Symbol {
        &self.c
    }

    /// The assembled `(d₁+d₂)`-mode symbol.
    pub fn assemble(&self) -> Symbol {
        self.assembled.clone()
    }

    /// Contractions `D₁`, `D₂` with `B = A^{1/2} D₁ C^{1/2}`
    /// and `B = (1-A)^{1/2} D₂ (1-C)^{1/2}`.
    pub fn positivity_witnesses(&self, tol: &Tolerances) -> Result<PositivityWitnesses> {
        let sqrt_a = sqrt_psd(self.a.matrix())?;
        let sqrt_c = sqrt_psd(self.c.matrix())?;
        let compl_a = sqrt_psd(&(eye(self.a.dim()) - self.a.matrix()))?;
        let compl_c = sqrt_psd(&(eye(self.c.dim()) - self.c.matrix()))?;
        let d1 = pinv(&sqrt_a, tol.psd)?.dot(&self.b).dot(&pinv(&sqrt_c, tol.psd)?);
        let d2 = pinv(&compl_a, tol.psd)?.dot(&self.b).dot(&pinv(&compl_c, tol.psd)?);
        let residual_1 = max_abs(&(sqrt_a.dot(&d1).dot(&sqrt_c) - &self.b));
        let residual_2 = max_abs(&(compl_a.dot(&d2).dot(&compl_c) - &self.b));
        let worst = residual_1.max(residual_2);
        if worst > tol.psd {
            return Err(Error::ReconstructionFailed { residual: worst });
        }
        Ok(PositivityWitnesses { d1, d2, residual_1, residual_2 })
    }

    /// The restated positivity conditions for trimmed blocks:
    /// `B C^{-1} B† ≤ A` and `B (1-C)^{-1} B† ≤ 1 - A`.
    ///
    /// Errors when `C` or `1 - C` is singular beyond tolerance; run
    /// [`Self::trim`] first in that case.
    pub fn restated_positivity_check(&self, tol: &Tolerances) -> Result<bool> {
        let c_min = self.c.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = self.c.eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.c.dim() > 0 && (c_min <= tol.psd || c_max >= 1.0 - tol.psd) {
            let offending = if c_min <= tol.psd { c_min } else { c_max };
            return Err(Error::SingularC { eigenvalue: offending });
        }
        let c_inv = self.c.apply_fn(|x| 1.0 / x);
        let compl_inv = self.c.apply_fn(|x| 1.0 / (1.0 - x));
        let bd = dagger(&self.b);
        let slack_low = hermitize(&(self.a.matrix() - &self.b.dot(&c_inv).dot(&bd)));
        let slack_high = hermitize(
            &(eye(self.a.dim()) - self.a.matrix() - self.b.dot(&compl_inv).dot(&bd)),
        );
        Ok(mat::min_eigval(&slack_low)? >= -tol.psd && mat::min_eigval(&slack_high)? >= -tol.psd)
    }

    /// Restrict the block to the orthogonal complement of
    /// `ker(C) ⊕ ker(1-C)` inside `H₂`.
    ///
    /// Returns the trimmed block, on which `0 < C < 1` strictly, and the
    /// isometry from the retained subspace into the original `H₂`. An empty
    /// retained subspace is legal: `B` becomes a `d₁ × 0` matrix.
    pub fn trim(&self, tol: &Tolerances) -> Result<(BlockSymbol, CMat)> {
        let keep: Vec<usize> = self
            .c
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam > tol.psd && lam < 1.0 - tol.psd)
            .map(|(i, _)| i)
            .collect();
        let d2p = keep.len();
        let mut basis = CMat::zeros((self.c.dim(), d2p));
        let mut c_new = CMat::zeros((d2p, d2p));
        for (j, &i) in keep.iter().enumerate() {
            basis.column_mut(j).assign(&self.c.eigenvectors().column(i));
            c_new[(j, j)] = self.c.eigenvalues()[i].into();
        }
        let b_new = self.b.dot(&basis);
        let trimmed = BlockSymbol::new(self.a.matrix(), &b_new, &c_new, tol)?;
        Ok((trimmed, basis))
    }
}

/// Witness pair from [`BlockSymbol::positivity_witnesses`], with the
/// reconstruction residuals that were checked against tolerance.
#[derive(Clone, Debug)]
pub struct PositivityWitnesses {
    pub d1: CMat,
    pub d2: CMat,
    pub residual_1: f64,
    pub residual_2: f64,
}

fn assemble_raw(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let d1 = a.nrows();
    let d2 = c.nrows();
    let n = d1 + d2;
    let mut full = CMat::zeros((n, n));
    full.slice_mut(s![..d1, ..d1]).assign(a);
    full.slice_mut(s![..d1, d1..]).assign(b);
    full.slice_mut(s![d1.., ..d1]).assign(&dagger(b));
    full.slice_mut(s![d1.., d1..]).assign(c);
    full
}

/// Random Hermitian matrix with spectrum in `[lo, hi]`, validated as a symbol.
pub fn random_symbol_in(dim: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Symbol {
    let m = mat::random_hermitian_in(dim, lo, hi, rng).expect("eigh of a random Hermitian matrix");
    Symbol::validate(&m, &Tolerances::default()).expect("spectrum constructed inside [0, 1]")
}

/// Deterministic random block symbol whose assembled spectrum lies in
/// `[margin, 1 - margin]`.
pub fn random_block_symbol(d1: usize, d2: usize, seed: u64, margin: f64) -> BlockSymbol {
    assert!(margin > 0.0 && margin < 0.5, "margin must lie in (0, 0.5)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_block_symbol_with(d1, d2, margin, &mut rng)
}

/// Same as [`random_block_symbol`] but drawing from a caller-owned generator.
pub fn random_block_symbol_with(
    d1: usize,
    d2: usize,
    margin: f64,
    rng: &mut impl Rng,
) -> BlockSymbol {
    assert!(margin > 0.0 && margin < 0.5, "margin must lie in (0, 0.5)");
    let tol = Tolerances::default();
    let full = random_symbol_in(d1 + d2, margin, 1.0 - margin, rng);
    let fq = full.matrix();
    let a = fq.slice(s![..d1, ..d1]).to_owned();
    let b = fq.slice(s![..d1, d1..]).to_owned();
    let c = fq.slice(s![d1.., d1..]).to_owned();
    BlockSymbol::new(&a, &b, &c, &tol).expect("blocks of a valid symbol form a valid block symbol")
}
