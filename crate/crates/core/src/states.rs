//! Canonical maximally entangled states and the structural test for maximal
//! entanglement of mixed states.
//!
//! A mixed state on `d'⊗d` is maximally entangled iff it is a mixture of at
//! most `K` pure states `|ψ_m⟩ = d^{-1/2} Σ_i |f_im⟩⊗|e_i⟩` sharing one
//! orthonormal basis `{e_i}` and with `⟨f_i'm'|f_im⟩ = δ_ii' δ_mm'`. Every such
//! state is `(U†⊗I)(Σ_m p_m |χ_m⟩⟨χ_m|)(U⊗I)` for some unitary `U`.

use crate::error::{Error, Result};
use crate::linalg::{
    complete_basis, hermitian_eigen, max_abs_diff, schmidt_decompose, BipartiteDims, CMatrix, CVector, DensityMatrix, PureState,
    UnitaryMatrix, C64,
};

/// Default tolerance for the exact structural identities.
pub const STRUCTURAL_TOL: f64 = 1e-8;
/// Default tolerance for optimizer-based certificates.
pub const VARIATIONAL_TOL: f64 = 1e-4;

const PROB_SUM_TOL: f64 = 1e-12;

/// `|χ_m⟩ = d^{-1/2} Σ_i |i + (m-1)d⟩⊗|i⟩`, `m` in `1..=K`.
pub fn chi_state(dims: BipartiteDims, m: usize) -> Result<PureState> {
    dims.check_block(m)?;
    let amp = C64::new(1.0 / (dims.d() as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(dims.total());
    for i in 0..dims.d() {
        v[dims.index(dims.block_row(i, m), i)] = amp;
    }
    PureState::new(dims, v)
}

/// `p|χ_1⟩⟨χ_1| + (1-p)·I/d²` on `d⊗d`.
pub fn isotropic(d: usize, p: f64) -> Result<DensityMatrix> {
    let dims = BipartiteDims::new(d, d)?;
    let chi = chi_state(dims, 1)?.projector();
    chi.mix(&DensityMatrix::maximally_mixed(dims), p)
}

/// Local-unitary canonical form `(u†⊗I)(Σ_m p_m |χ_m⟩⟨χ_m|)(u⊗I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalMixture {
    pub dims: BipartiteDims,
    pub probs: Vec<f64>,
    pub u: UnitaryMatrix,
}

impl CanonicalMixture {
    pub fn new(dims: BipartiteDims, probs: Vec<f64>, u: UnitaryMatrix) -> Result<Self> {
        validate_probs(dims, &probs)?;
        if u.n() != dims.d_prime() {
            return Err(Error::DimensionMismatch { expected: format!("unitary of size {}", dims.d_prime()), found: format!("{}", u.n()) });
        }
        Ok(CanonicalMixture { dims, probs, u })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut core = CMatrix::zeros(self.dims.total(), self.dims.total());
        for (m, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let chi = chi_state(self.dims, m + 1).expect("m within 1..=K");
            core += chi.projector().matrix().scale(p);
        }
        let core = DensityMatrix::new(self.dims, core).expect("mixture of orthogonal projectors");
        core.apply_first(&self.u.adjoint()).expect("u has size d'")
    }
}

fn validate_probs(dims: BipartiteDims, probs: &[f64]) -> Result<()> {
    if probs.len() != dims.k() {
        return Err(Error::InvalidProbabilities(format!("expected {} weights for {dims}, got {}", dims.k(), probs.len())));
    }
    if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidProbabilities("weights must be finite and non-negative".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

pub fn canonical_mixture(dims: BipartiteDims, probs: &[f64], u: &UnitaryMatrix) -> Result<DensityMatrix> {
    Ok(CanonicalMixture::new(dims, probs.to_vec(), u.clone())?.to_density())
}

/// True iff every Schmidt coefficient is within `tol` of `1/√d`.
pub fn is_max_entangled_pure(psi: &PureState, tol: f64) -> bool {
    let target = 1.0 / (psi.dims().d() as f64).sqrt();
    match schmidt_decompose(psi) {
        Ok(s) => s.coefficients.iter().all(|c| (c - target).abs() <= tol),
        Err(_) => false,
    }
}

/// Support of a maximally entangled state decomposed into the block structure.
struct Structure {
    weights: Vec<f64>,
    /// `f[k][i]` = `√d (I⊗⟨e_i|)|ψ_k⟩`.
    f: Vec<Vec<CVector>>,
    /// Shared right basis `{e_i}`.
    e: Vec<CVector>,
}

/// `√d·(I⊗⟨e|)ψ`, a vector on the `d'`-system.
fn contract_second(psi: &CVector, e: &CVector, dims: BipartiteDims) -> CVector {
    let scale = (dims.d() as f64).sqrt();
    CVector::from_fn(dims.d_prime(), |a, _| (0..dims.d()).map(|b| e[b].conj() * psi[dims.index(a, b)]).sum::<C64>() * scale)
}

fn decompose(rho: &DensityMatrix, tol: f64) -> Option<Structure> {
    let dims = rho.dims();
    let (values, vectors) = hermitian_eigen(rho.matrix());
    let support: Vec<usize> = (0..values.len()).filter(|&j| values[j] > tol).collect();
    if support.is_empty() || support.len() > dims.k() {
        return None;
    }
    let psis: Vec<PureState> =
        support.iter().map(|&j| PureState::normalized(dims, vectors.column(j).into_owned())).collect::<Result<_>>().ok()?;

    // (a) every eigenvector in the support is maximally entangled
    if !psis.iter().all(|psi| is_max_entangled_pure(psi, tol.max(1e-10))) {
        return None;
    }

    // (b) a common right basis, taken from the first eigenvector
    let e = schmidt_decompose(&psis[0]).ok()?.right_vectors;
    let d = dims.d();
    let scale = 1.0 / (d as f64).sqrt();
    let mut f = Vec::with_capacity(psis.len());
    for psi in &psis {
        let fk: Vec<CVector> = e.iter().map(|ei| contract_second(psi.vector(), ei, dims)).collect();
        let mut rebuilt = CVector::zeros(dims.total());
        for (fi, ei) in fk.iter().zip(&e) {
            for a in 0..dims.d_prime() {
                for b in 0..d {
                    rebuilt[dims.index(a, b)] += fi[a] * ei[b] * scale;
                }
            }
        }
        if (rebuilt - psi.vector()).camax() > tol {
            return None;
        }
        f.push(fk);
    }

    // (c) ⟨f_i'k'|f_ik⟩ = δ_ii' δ_kk'
    let flat: Vec<&CVector> = f.iter().flatten().collect();
    for (x, fx) in flat.iter().enumerate() {
        for (y, fy) in flat.iter().enumerate().skip(x) {
            let target = if x == y { 1.0 } else { 0.0 };
            if (fx.dotc(fy) - C64::new(target, 0.0)).norm() > tol {
                return None;
            }
        }
    }

    let weights = support.iter().map(|&j| values[j]).collect();
    Some(Structure { weights, f, e })
}

/// Structural test: the support eigenvectors are maximally entangled, share a
/// right Schmidt basis, and their left vectors are jointly orthonormal.
pub fn is_max_entangled_structural(rho: &DensityMatrix, tol: f64) -> bool {
    decompose(rho, tol).is_some()
}

/// Recovers `(probs, U)` with `ρ = (U†⊗I)(Σ p_m |χ_m⟩⟨χ_m|)(U⊗I)`; `probs`
/// are the support eigenvalues in descending order, padded with zeros to `K`.
pub fn canonicalize(rho: &DensityMatrix, tol: f64) -> Result<CanonicalMixture> {
    let dims = rho.dims();
    let s = decompose(rho, tol).ok_or(Error::NotMaximallyEntangled)?;
    let (dp, d, k) = (dims.d_prime(), dims.d(), dims.k());

    // Ũ1 maps f_im to |i + (m-1)d⟩; the completion vectors go to the remaining rows in order.
    let ordered: Vec<CVector> = s.f.iter().flatten().cloned().collect();
    let basis = complete_basis(&ordered, dp);
    let u1 = basis.adjoint();

    // Ũ2 maps e_i to |i⟩; G = diag(Ũ2†, …, Ũ2†, I_r).
    let u2 = CMatrix::from_fn(d, d, |i, b| s.e[i][b].conj());
    let u2_dag = u2.adjoint();
    let mut g = CMatrix::identity(dp, dp);
    for m in 0..k {
        g.view_mut((m * d, m * d), (d, d)).copy_from(&u2_dag);
    }
    // U† = Ũ1† Gᵀ  ⇒  U = conj(G) Ũ1
    let u = g.map(|z| z.conj()) * u1;
    let u = UnitaryMatrix::new(u).map_err(|e| Error::Inconsistent(format!("canonical unitary: {e}")))?;

    let total: f64 = s.weights.iter().sum();
    let mut probs: Vec<f64> = s.weights.iter().map(|w| w / total).collect();
    probs.resize(k, 0.0);
    CanonicalMixture::new(dims, probs, u)
}

/// Entrywise residual between `rho` and the density of `form`.
pub fn reconstruction_residual(rho: &DensityMatrix, form: &CanonicalMixture) -> f64 {
    max_abs_diff(rho.matrix(), form.to_density().matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, random_density, random_product, random_pure, unitarity_residual};

    fn dims(dp: usize, d: usize) -> BipartiteDims {
        BipartiteDims::new(dp, d).unwrap()
    }

    #[test]
    fn chi_examples() {
        let h = 1.0 / 2f64.sqrt();
        let v = chi_state(dims(2, 2), 1).unwrap();
        let expected = [h, 0.0, 0.0, h];
        for (x, e) in v.vector().iter().zip(expected) {
            assert_eq!(*x, C64::new(e, 0.0));
        }
        // (|2⟩|0⟩ + |3⟩|1⟩)/√2 in 4⊗2: composite indices 4 and 7
        let v = chi_state(dims(4, 2), 2).unwrap();
        let nz: Vec<usize> = (0..8).filter(|&i| v.vector()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![4, 7]);
        assert_eq!(v.vector()[4], C64::new(h, 0.0));

        assert!(matches!(chi_state(dims(4, 2), 3), Err(Error::BlockOutOfRange { m: 3, k: 2 })));
        assert!(chi_state(dims(4, 2), 0).is_err());
    }

    #[test]
    fn chi_states_are_orthonormal() {
        for d in 2..=4 {
            for dp in d..=9 {
                let x = dims(dp, d);
                for m in 1..=x.k() {
                    for mm in 1..=x.k() {
                        let ip = chi_state(x, m).unwrap().vector().dotc(chi_state(x, mm).unwrap().vector());
                        let target = if m == mm { 1.0 } else { 0.0 };
                        assert!((ip - C64::new(target, 0.0)).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_mixture_examples() {
        let x = dims(4, 2);
        let id = UnitaryMatrix::identity(4);
        let rho = canonical_mixture(x, &[1.0, 0.0], &id).unwrap();
        assert!(max_abs_diff(rho.matrix(), chi_state(x, 1).unwrap().projector().matrix()) < 1e-15);

        // (1/d)(p1 Σ|ii⟩⟨jj| + p2 Σ|i+d,i⟩⟨j+d,j|)
        let (p1, p2) = (0.3, 0.7);
        let rho = canonical_mixture(x, &[p1, p2], &id).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        for i in 0..2 {
            for j in 0..2 {
                expected[(x.index(i, i), x.index(j, j))] += C64::new(p1 / 2.0, 0.0);
                expected[(x.index(i + 2, i), x.index(j + 2, j))] += C64::new(p2 / 2.0, 0.0);
            }
        }
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);

        assert!(canonical_mixture(x, &[1.0], &id).is_err());
        assert!(canonical_mixture(x, &[0.6, 0.6], &id).is_err());
        assert!(canonical_mixture(x, &[1.2, -0.2], &id).is_err());
        assert!(canonical_mixture(x, &[0.5, 0.5], &UnitaryMatrix::identity(3)).is_err());
    }

    #[test]
    fn pure_criterion() {
        assert!(is_max_entangled_pure(&chi_state(dims(4, 2), 1).unwrap(), 1e-10));
        assert!(!is_max_entangled_pure(&PureState::product_basis(dims(2, 2), 0, 0).unwrap(), 1e-10));
        let partial = PureState::from_schmidt_weights(dims(2, 2), &[0.6, 0.4]).unwrap();
        assert!(!is_max_entangled_pure(&partial, 1e-8));
    }

    #[test]
    fn structural_examples() {
        let x = dims(4, 2);
        let rho = canonical_mixture(x, &[0.3, 0.7], &haar_unitary(4, 3)).unwrap();
        assert!(is_max_entangled_structural(&rho, STRUCTURAL_TOL));
        assert!(!is_max_entangled_structural(&DensityMatrix::maximally_mixed(x), STRUCTURAL_TOL));

        let half = chi_state(x, 1).unwrap().projector().mix(&PureState::product_basis(x, 0, 0).unwrap().projector(), 0.5).unwrap();
        // the eigenvectors of this mixture are not maximally entangled
        let (vals, vecs) = hermitian_eigen(half.matrix());
        let top = PureState::normalized(x, vecs.column(0).into_owned()).unwrap();
        assert!(vals[1] > 1e-3 && !is_max_entangled_pure(&top, 1e-6));
        assert!(!is_max_entangled_structural(&half, STRUCTURAL_TOL));
    }

    #[test]
    fn structural_handles_degenerate_weights() {
        // equal weights make the support eigenspace degenerate
        for (dp, d) in [(4, 2), (6, 3), (9, 3), (7, 3)] {
            let x = dims(dp, d);
            let probs = vec![1.0 / x.k() as f64; x.k()];
            let rho = canonical_mixture(x, &probs, &haar_unitary(dp, 17)).unwrap();
            assert!(is_max_entangled_structural(&rho, STRUCTURAL_TOL), "{x}");
            let form = canonicalize(&rho, STRUCTURAL_TOL).unwrap();
            assert!(reconstruction_residual(&rho, &form) < 1e-8);
        }
    }

    #[test]
    fn relabelled_blocks_pass_and_overlapping_supports_fail() {
        // |χ1⟩ and a block-2 state with a rotated second-system basis
        let x = dims(4, 2);
        let mut v = CVector::zeros(8);
        let h = 1.0 / 2f64.sqrt();
        v[x.index(2, 1)] = C64::new(h, 0.0);
        v[x.index(3, 0)] = C64::new(h, 0.0);
        let other = PureState::new(x, v).unwrap();
        assert!(is_max_entangled_pure(&other, 1e-12));
        let rho = chi_state(x, 1).unwrap().projector().mix(&other.projector(), 0.4).unwrap();
        // block 2 pairs its rows with the second-system basis in swapped order
        assert!(is_max_entangled_structural(&rho, STRUCTURAL_TOL));

        // overlapping f-supports are rejected
        let mut w = CVector::zeros(8);
        w[x.index(0, 0)] = C64::new(h, 0.0);
        w[x.index(2, 1)] = C64::new(h, 0.0);
        let overlap = PureState::new(x, w).unwrap();
        let rho = chi_state(x, 1).unwrap().projector().mix(&overlap.projector(), 0.5).unwrap();
        assert!(!is_max_entangled_structural(&rho, STRUCTURAL_TOL));
    }

    #[test]
    fn canonicalize_diagonal_mixture_gives_block_phases() {
        let x = dims(4, 2);
        let rho = canonical_mixture(x, &[0.7, 0.3], &UnitaryMatrix::identity(4)).unwrap();
        let form = canonicalize(&rho, STRUCTURAL_TOL).unwrap();
        assert!((form.probs[0] - 0.7).abs() < 1e-12 && (form.probs[1] - 0.3).abs() < 1e-12);
        let u = form.u.matrix();
        for m in 0..2 {
            let phase = u[(2 * m, 2 * m)];
            assert!((phase.norm() - 1.0).abs() < 1e-10);
            let block = u.view((2 * m, 2 * m), (2, 2)).into_owned();
            assert!(max_abs_diff(&block, &CMatrix::identity(2, 2).map(|z| z * phase)) < 1e-10);
        }
        assert!(reconstruction_residual(&rho, &form) < 1e-8);

        // sorted descending when the input is ascending
        let rho = canonical_mixture(x, &[0.2, 0.8], &UnitaryMatrix::identity(4)).unwrap();
        let form = canonicalize(&rho, STRUCTURAL_TOL).unwrap();
        assert!((form.probs[0] - 0.8).abs() < 1e-12);
        assert!(reconstruction_residual(&rho, &form) < 1e-8);
    }

    #[test]
    fn canonicalize_round_trips() {
        for (dp, d) in [(2, 2), (4, 2), (6, 3), (5, 2), (7, 3)] {
            let x = dims(dp, d);
            for seed in 0..50u64 {
                let raw: Vec<f64> = (0..x.k()).map(|m| ((seed * 7 + m as u64 * 13) % 10 + 1) as f64).collect();
                let sum: f64 = raw.iter().sum();
                let probs: Vec<f64> = raw.iter().map(|p| p / sum).collect();
                let v = haar_unitary(dp, seed);
                let rho = canonical_mixture(x, &probs, &v).unwrap();
                let form = canonicalize(&rho, STRUCTURAL_TOL).unwrap();
                assert!(reconstruction_residual(&rho, &form) <= 1e-8, "{x} seed {seed}");
                assert!(unitarity_residual(form.u.matrix()) < 1e-10);
                let mut sorted = probs.clone();
                sorted.sort_by(|a, b| b.total_cmp(a));
                for (a, b) in form.probs.iter().zip(&sorted) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn canonicalize_single_vector_under_haar_v() {
        let x = dims(4, 2);
        let v = haar_unitary(4, 99);
        let rho = chi_state(x, 1).unwrap().projector().apply_first(&v.adjoint()).unwrap();
        let form = canonicalize(&rho, STRUCTURAL_TOL).unwrap();
        assert_eq!(form.probs, vec![1.0, 0.0]);
        assert!(reconstruction_residual(&rho, &form) <= 1e-8);
    }

    #[test]
    fn canonicalize_rejects_non_maximal() {
        let x = dims(4, 2);
        let rho = PureState::product_basis(x, 0, 0).unwrap().projector();
        assert_eq!(canonicalize(&rho, STRUCTURAL_TOL), Err(Error::NotMaximallyEntangled));
    }

    #[test]
    fn structural_rejects_generic_states() {
        let x = dims(4, 2);
        for seed in 0..20 {
            assert!(!is_max_entangled_structural(&random_density(x, 1 + (seed as usize % 8), seed).unwrap(), STRUCTURAL_TOL));
            assert!(!is_max_entangled_structural(&random_product(x, seed), STRUCTURAL_TOL));
            assert!(!is_max_entangled_structural(&random_pure(x, seed).projector(), STRUCTURAL_TOL));
        }
    }

    #[test]
    fn isotropic_endpoints() {
        let iso = isotropic(2, 0.0).unwrap();
        assert!(max_abs_diff(iso.matrix(), DensityMatrix::maximally_mixed(dims(2, 2)).matrix()) < 1e-15);
        let iso = isotropic(3, 1.0).unwrap();
        assert!(is_max_entangled_structural(&iso, STRUCTURAL_TOL));
    }
}
