//! Dense complex linear algebra on `d'⊗d` composite spaces.
//!
//! Matrices are `nalgebra` dynamic matrices of `Complex<f64>`. Composite
//! indices are `a·d + b` with `a` on the `d'`-system and `b` on the `d`-system.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerances applied when validating a [`DensityMatrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Tolerances {
    pub const STRICT: Tolerances = Tolerances { hermitian: HERMITIAN_TOL, trace: TRACE_TOL, psd: PSD_TOL };

    pub fn uniform(tol: f64) -> Self {
        Tolerances { hermitian: tol, trace: tol, psd: tol }
    }
}

/// Dimensions of a `d'⊗d` system, `d' = k·d + r` with `0 ≤ r < d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BipartiteDims {
    d_prime: usize,
    d: usize,
    k: usize,
    r: usize,
}

impl BipartiteDims {
    pub fn new(d_prime: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDims(format!("d = {d} must be at least 2")));
        }
        if d_prime < d {
            return Err(Error::InvalidDims(format!("d' = {d_prime} must be at least d = {d}")));
        }
        Ok(BipartiteDims { d_prime, d, k: d_prime / d, r: d_prime % d })
    }

    pub fn d_prime(&self) -> usize {
        self.d_prime
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of full `d`-blocks in the first subsystem.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Dimension of the composite space, `d'·d`.
    pub fn total(&self) -> usize {
        self.d_prime * self.d
    }

    /// Composite index of `|a⟩⊗|b⟩`.
    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.d + b
    }

    /// Index `i + (m-1)·d` in the first subsystem; `m` is 1-based.
    #[inline]
    pub fn block_row(&self, i: usize, m: usize) -> usize {
        i + (m - 1) * self.d
    }

    pub(crate) fn check_block(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.k {
            return Err(Error::BlockOutOfRange { m, k: self.k });
        }
        Ok(())
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}⊗{}", self.d_prime, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Kronecker product; entry `(i·b.rows + p, j·b.cols + q) = a(i,j)·b(p,q)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
/// Column `j` of the returned matrix is the eigenvector for value `j`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitian_part(a)).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Reduced matrix after tracing out `traced` from a `(d'·d)×(d'·d)` matrix.
pub fn partial_trace(mat: &CMatrix, dims: BipartiteDims, traced: Subsystem) -> Result<CMatrix> {
    let n = dims.total();
    if mat.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: format!("{n}×{n}"), found: format!("{}×{}", mat.nrows(), mat.ncols()) });
    }
    let (dp, d) = (dims.d_prime, dims.d);
    Ok(match traced {
        Subsystem::First => CMatrix::from_fn(d, d, |b, bb| (0..dp).map(|a| mat[(dims.index(a, b), dims.index(a, bb))]).sum()),
        Subsystem::Second => CMatrix::from_fn(dp, dp, |a, aa| (0..d).map(|b| mat[(dims.index(a, b), dims.index(aa, b))]).sum()),
    })
}

/// `(U⊗I)·M`, applying `U` to the first factor of every column of `m` without
/// forming the Kronecker product.
pub fn apply_first(u: &CMatrix, m: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (dp, d) = (dims.d_prime, dims.d);
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for col in 0..m.ncols() {
        for a in 0..dp {
            for aa in 0..dp {
                let w = u[(a, aa)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..d {
                    out[(a * d + b, col)] += w * m[(aa * d + b, col)];
                }
            }
        }
    }
    out
}

/// Bipartite density matrix on the `d'·d` composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: BipartiteDims, mat: CMatrix) -> Result<Self> {
        Self::with_tolerances(dims, mat, Tolerances::STRICT)
    }

    /// Validates Hermiticity, unit trace and positivity, in that order.
    pub fn with_tolerances(dims: BipartiteDims, mat: CMatrix, tol: Tolerances) -> Result<Self> {
        let n = dims.total();
        if mat.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}×{n} for {dims}"),
                found: format!("{}×{}", mat.nrows(), mat.ncols()),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = hermiticity_residual(&mat);
        if residual > tol.hermitian {
            return Err(Error::NotHermitian { residual });
        }
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue = min_eigenvalue(&mat);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { dims, mat })
    }

    /// `I/(d'·d)`.
    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        DensityMatrix { dims, mat: CMatrix::identity(n, n).unscale(n as f64) }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `Tr(ρ·O)`, real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        // Tr(ρO) = Σ ρ_ij O_ji
        self.mat.iter().zip(op.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }

    pub fn reduced(&self, traced: Subsystem) -> CMatrix {
        partial_trace(&self.mat, self.dims, traced).expect("validated dimensions")
    }

    /// `p·self + (1-p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.dims.to_string(), found: other.dims.to_string() });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbabilities(format!("mixing weight {p} outside [0, 1]")));
        }
        DensityMatrix::new(self.dims, self.mat.scale(p) + other.mat.scale(1.0 - p))
    }

    /// `(A⊗B)ρ(A⊗B)†`.
    pub fn apply_local(&self, a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<DensityMatrix> {
        if a.n() != self.dims.d_prime || b.n() != self.dims.d {
            return Err(Error::DimensionMismatch {
                expected: format!("local unitaries of size {} and {}", self.dims.d_prime, self.dims.d),
                found: format!("{} and {}", a.n(), b.n()),
            });
        }
        let ab = kron(a.matrix(), b.matrix());
        Ok(self.conjugated(&ab))
    }

    /// `(U⊗I)ρ(U⊗I)†`.
    pub fn apply_first(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        if u.n() != self.dims.d_prime {
            return Err(Error::DimensionMismatch { expected: format!("{}", self.dims.d_prime), found: format!("{}", u.n()) });
        }
        let left = apply_first(u.matrix(), &self.mat, self.dims);
        let both = apply_first(u.matrix(), &left.adjoint(), self.dims).adjoint();
        Ok(DensityMatrix { dims: self.dims, mat: hermitian_part(&both) })
    }

    fn conjugated(&self, w: &CMatrix) -> DensityMatrix {
        DensityMatrix { dims: self.dims, mat: hermitian_part(&(w * &self.mat * w.adjoint())) }
    }

    /// `ρ_A ⊗ ρ_B` from a `d'×d'` and a `d×d` density operator.
    pub fn product(dims: BipartiteDims, rho_a: &CMatrix, rho_b: &CMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(dims, kron(rho_a, rho_b))
    }
}

/// Unit vector on the `d'·d` composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: BipartiteDims,
    vec: CVector,
}

impl PureState {
    pub fn new(dims: BipartiteDims, vec: CVector) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(Error::DimensionMismatch { expected: format!("{}", dims.total()), found: format!("{}", vec.len()) });
        }
        let norm_sq = vec.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(PureState { dims, vec })
    }

    /// Normalizes `vec` first; fails only on a zero or mis-sized vector.
    pub fn normalized(dims: BipartiteDims, vec: CVector) -> Result<Self> {
        let norm = vec.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        PureState::new(dims, vec.unscale(norm))
    }

    /// `|a⟩⊗|b⟩`.
    pub fn product_basis(dims: BipartiteDims, a: usize, b: usize) -> Result<Self> {
        if a >= dims.d_prime || b >= dims.d {
            return Err(Error::DimensionMismatch {
                expected: format!("a < {}, b < {}", dims.d_prime, dims.d),
                found: format!("a = {a}, b = {b}"),
            });
        }
        let mut v = CVector::zeros(dims.total());
        v[dims.index(a, b)] = C64::new(1.0, 0.0);
        Ok(PureState { dims, vec: v })
    }

    /// `Σ_i √w_i |i⟩|i⟩` for weights `w` (normalized internally).
    pub fn from_schmidt_weights(dims: BipartiteDims, weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.len() > dims.d || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("Schmidt weights must be 1..={} non-negative values", dims.d)));
        }
        let mut v = CVector::zeros(dims.total());
        for (i, &w) in weights.iter().enumerate() {
            v[dims.index(i, i)] = C64::new(w.sqrt(), 0.0);
        }
        PureState::normalized(dims, v)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn vector(&self) -> &CVector {
        &self.vec
    }

    pub fn projector(&self) -> DensityMatrix {
        let mat = &self.vec * self.vec.adjoint();
        DensityMatrix { dims: self.dims, mat: hermitian_part(&mat) }
    }

    /// `d'×d` matrix `C` with `ψ = Σ C[a,b] |a⟩|b⟩`.
    pub fn coefficient_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dims.d_prime, self.dims.d, |a, b| self.vec[self.dims.index(a, b)])
    }
}

/// Square unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let residual = unitarity_residual(&mat);
        if residual > UNITARY_TOL || residual.is_nan() {
            return Err(Error::NotUnitary { residual });
        }
        Ok(UnitaryMatrix(mat))
    }

    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        debug_assert!(unitarity_residual(&mat) < 1e-8);
        UnitaryMatrix(mat)
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn compose(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &other.0)
    }
}

/// `ψ = Σ_i s_i |left_i⟩⊗|right_i⟩` with `s` descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> CVector {
        let dp = self.left_vectors.first().map_or(0, |v| v.len());
        let d = self.right_vectors.first().map_or(0, |v| v.len());
        let mut out = CVector::zeros(dp * d);
        for ((s, l), r) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors) {
            for a in 0..dp {
                for b in 0..d {
                    out[a * d + b] += l[a] * r[b] * *s;
                }
            }
        }
        out
    }
}

/// Schmidt decomposition via the SVD of the `d'×d` coefficient matrix.
///
/// Ties between equal singular values keep the order returned by the SVD.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    let norm_sq = psi.vec.norm_squared();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    let d = psi.dims.d;
    let svd = SVD::new(psi.coefficient_matrix(), true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    // C = Σ s_i u_i v_i†, so C[a,b] = Σ s_i u_i[a] v_t[i,b]: the right vector is row i of v_t.
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&i| svd.singular_values[i]).collect(),
        left_vectors: order.iter().map(|&i| u.column(i).into_owned()).collect(),
        right_vectors: order.iter().map(|&i| v_t.row(i).transpose()).collect(),
    })
}

/// Deterministic RNG for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n×n` unitary: Ginibre matrix, QR, then the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary_from<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    assert!(n >= 1, "unitary size must be positive");
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix(q)
}

pub fn haar_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    haar_unitary_from(n, &mut stream_rng(seed, 0))
}

/// Haar-random unit vector of length `n`.
pub fn haar_vector_from<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v.unscale(norm);
        }
    }
}

pub fn random_pure(dims: BipartiteDims, seed: u64) -> PureState {
    let v = haar_vector_from(dims.total(), &mut stream_rng(seed, 0));
    PureState::normalized(dims, v).expect("non-zero Gaussian vector")
}

/// `V·diag(spectrum)·V†` with Haar `V`; `spectrum` is normalized to unit sum.
pub fn density_with_spectrum(dims: BipartiteDims, spectrum: &[f64], seed: u64) -> Result<DensityMatrix> {
    let n = dims.total();
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch { expected: format!("{n} eigenvalues"), found: format!("{}", spectrum.len()) });
    }
    let sum: f64 = spectrum.iter().sum();
    if spectrum.iter().any(|&x| x < 0.0 || !x.is_finite()) || sum <= 0.0 {
        return Err(Error::InvalidProbabilities("spectrum must be non-negative with positive sum".into()));
    }
    let v = haar_unitary(n, seed);
    let v = v.matrix();
    let mut mat = CMatrix::zeros(n, n);
    for (k, &lam) in spectrum.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let col = v.column(k);
        mat += (col * col.adjoint()).scale(lam / sum);
    }
    DensityMatrix::new(dims, hermitian_part(&mat))
}

/// Random density matrix of the given rank: Haar eigenbasis and
/// exponentially distributed eigenvalues on `rank` of its vectors.
pub fn random_density(dims: BipartiteDims, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let n = dims.total();
    if rank == 0 || rank > n {
        return Err(Error::RankOutOfRange { rank, max: n });
    }
    let mut rng = stream_rng(seed, 1);
    let mut spectrum = vec![0.0; n];
    for x in spectrum.iter_mut().take(rank) {
        // keep eigenvalues well clear of the 1e-12 numerical-rank cutoff
        let e: f64 = rng.sample(Exp1);
        *x = e + 1e-3;
    }
    density_with_spectrum(dims, &spectrum, seed)
}

/// Random Hermitian PSD unit-trace `n×n` matrix (Ginibre-induced, full rank).
pub fn random_local_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, rank.max(1), |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    hermitian_part(&m.unscale(tr))
}

/// `ρ_A ⊗ ρ_B` with independently drawn local states of random rank.
pub fn random_product(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    let mut rng = stream_rng(seed, 2);
    let ra = rng.random_range(1..=dims.d_prime);
    let rb = rng.random_range(1..=dims.d);
    let a = random_local_density(dims.d_prime, ra, &mut rng);
    let b = random_local_density(dims.d, rb, &mut rng);
    DensityMatrix::product(dims, &a, &b).expect("product of local states")
}

/// `exp(i·step·h)·u`, the exponential taken through the eigen-decomposition of `h`.
pub fn retract_unitary(u: &UnitaryMatrix, h: &CMatrix, step: f64) -> Result<UnitaryMatrix> {
    if h.shape() != (u.n(), u.n()) {
        return Err(Error::DimensionMismatch { expected: format!("{}×{}", u.n(), u.n()), found: format!("{}×{}", h.nrows(), h.ncols()) });
    }
    let residual = hermiticity_residual(h);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(UnitaryMatrix(hermitian_exp(h, step) * u.matrix()))
}

/// `exp(i·step·h)` for Hermitian `h`.
pub(crate) fn hermitian_exp(h: &CMatrix, step: f64) -> CMatrix {
    if step == 0.0 {
        return CMatrix::identity(h.nrows(), h.ncols());
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|w| C64::from_polar(1.0, step * w));
    let mut scaled = v.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= p;
        }
    }
    scaled * v.adjoint()
}

/// Gram–Schmidt completion of orthonormal `vectors` to a basis of `C^n`,
/// re-orthonormalizing the inputs on the way. Returns the basis as columns.
pub(crate) fn complete_basis(vectors: &[CVector], n: usize) -> CMatrix {
    let mut basis: Vec<CVector> = Vec::with_capacity(n);
    let push = |v: &CVector, basis: &mut Vec<CVector>| -> bool {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            basis.push(w.unscale(norm));
            true
        } else {
            false
        }
    };
    for v in vectors {
        push(v, &mut basis);
    }
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[e] = C64::new(1.0, 0.0);
        push(&v, &mut basis);
    }
    CMatrix::from_columns(&basis)
}
