//! Teleportation of a `d`-dimensional state through a `d'⊗d` resource.
//!
//! Alice measures her input together with her `d'`-half in the frame
//! `|φ_stm⟩ = (U_st⊗I) d^{-1/2} Σ_i |i⟩|i+(m-1)d⟩`, `U_st = h^t g^s`, and Bob
//! corrects his `d`-system according to the outcome. When `r > 0` the frame
//! does not span the measurement space and the leftover projector is an extra,
//! uncorrected outcome.
//!
//! A correction map stores, per outcome, the operator `T_stm` that appears in
//! the closed form
//!
//! ```text
//! f = 1/(d+1) + 1/(d(d+1)) Σ_stm ⟨χ_m|(I⊗U_st†T_stm†) ρ (I⊗T_stm U_st)|χ_m⟩.
//! ```
//!
//! Bob's physical correction is `T_stm†`; with that reading the closed form is
//! the exact Haar-averaged fidelity of the simulated protocol.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::{chunked_sum, Execution};
use crate::fef::{compute_fef, FefConfig, FefResult};
use crate::linalg::{
    haar_vector_from, partial_trace, stream_rng, BipartiteDims, CMatrix, CVector, DensityMatrix, Subsystem, UnitaryMatrix, C64,
};

/// `(s, t)` with both in `1..=d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylIndex {
    s: usize,
    t: usize,
}

impl WeylIndex {
    pub fn new(d: usize, s: usize, t: usize) -> Result<Self> {
        if s == 0 || t == 0 || s > d || t > d {
            return Err(Error::WeylOutOfRange { s, t, d });
        }
        Ok(WeylIndex { s, t })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// `U_st = h^t g^s` with `h|j⟩ = |j+1 mod d⟩`, `g|j⟩ = ω^j|j⟩`, `ω = e^{-2πi/d}`.
pub fn weyl_unitary(d: usize, idx: WeylIndex) -> UnitaryMatrix {
    let omega = |j: usize| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((j * idx.s) % d) as f64 / d as f64);
    // (h^t g^s)|j⟩ = ω^{js} |j + t mod d⟩
    let mut u = CMatrix::zeros(d, d);
    for j in 0..d {
        u[((j + idx.t) % d, j)] = omega(j);
    }
    UnitaryMatrix::new_unchecked(u)
}

/// Measurement outcome `(s, t, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub s: usize,
    pub t: usize,
    pub m: usize,
}

/// All `d²K` outcomes in `(s, t, m)` lexicographic order.
pub fn outcomes(dims: BipartiteDims) -> Vec<Outcome> {
    let d = dims.d();
    let mut out = Vec::with_capacity(d * d * dims.k());
    for s in 1..=d {
        for t in 1..=d {
            for m in 1..=dims.k() {
                out.push(Outcome { s, t, m });
            }
        }
    }
    out
}

/// `|φ_stm⟩` on the `d⊗d'` measurement space (input first, index `i·d' + a`).
pub fn bell_vector(dims: BipartiteDims, idx: WeylIndex, m: usize) -> Result<CVector> {
    dims.check_block(m)?;
    if idx.s > dims.d() || idx.t > dims.d() {
        return Err(Error::WeylOutOfRange { s: idx.s, t: idx.t, d: dims.d() });
    }
    let (d, dp) = (dims.d(), dims.d_prime());
    let amp = 1.0 / (d as f64).sqrt();
    let mut base = CVector::zeros(d * dp);
    for i in 0..d {
        base[i * dp + dims.block_row(i, m)] = C64::new(amp, 0.0);
    }
    let u = weyl_unitary(d, idx);
    let mut out = CVector::zeros(d * dp);
    for j in 0..d {
        for i in 0..d {
            let w = u.matrix()[(j, i)];
            if w.norm() == 0.0 {
                continue;
            }
            for a in 0..dp {
                out[j * dp + a] += w * base[i * dp + a];
            }
        }
    }
    Ok(out)
}

/// Correction operators keyed by outcome, with a label for reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Corrections {
    pub scheme: String,
    pub map: BTreeMap<Outcome, UnitaryMatrix>,
}

impl Corrections {
    /// `T_stm = U_st†`, which undoes the Weyl operator of each outcome.
    pub fn standard(dims: BipartiteDims) -> Self {
        let d = dims.d();
        let map = outcomes(dims).into_iter().map(|o| (o, weyl_unitary(d, WeylIndex { s: o.s, t: o.t }).adjoint())).collect();
        Corrections { scheme: "standard".into(), map }
    }

    /// Standard corrections followed by `V`: `T_stm = V·U_st†`.
    pub fn rotated(dims: BipartiteDims, v: &UnitaryMatrix) -> Result<Self> {
        if v.n() != dims.d() {
            return Err(Error::DimensionMismatch { expected: format!("{}", dims.d()), found: format!("{}", v.n()) });
        }
        let mut c = Corrections::standard(dims);
        for t in c.map.values_mut() {
            *t = v.compose(t);
        }
        c.scheme = "rotated".into();
        Ok(c)
    }

    fn get(&self, o: Outcome, d: usize) -> Result<&UnitaryMatrix> {
        let t = self.map.get(&o).ok_or(Error::MissingCorrection { s: o.s, t: o.t, m: o.m })?;
        if t.n() != d {
            return Err(Error::DimensionMismatch { expected: format!("correction of size {d}"), found: format!("{}", t.n()) });
        }
        Ok(t)
    }
}

/// Closed-form transmission fidelity for the given corrections.
pub fn transmission_fidelity(rho: &DensityMatrix, corrections: &Corrections) -> Result<f64> {
    let dims = rho.dims();
    let d = dims.d();
    let amp = 1.0 / (d as f64).sqrt();
    let mut sum = 0.0;
    for o in outcomes(dims) {
        let t = corrections.get(o, d)?;
        let a = t.matrix() * weyl_unitary(d, WeylIndex { s: o.s, t: o.t }).matrix();
        // v = (I⊗A)|χ_m⟩, v[(b_m(i), j)] = A[j, i]/√d
        let mut v = CVector::zeros(dims.total());
        for i in 0..d {
            for j in 0..d {
                v[dims.index(dims.block_row(i, o.m), j)] = a[(j, i)] * amp;
            }
        }
        sum += v.dotc(&(rho.matrix() * &v)).re;
    }
    let df = d as f64;
    Ok(1.0 / (df + 1.0) + sum / (df * (df + 1.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeleportReport {
    pub formula_fidelity: f64,
    pub mc_fidelity: f64,
    pub mc_stderr: f64,
    pub samples: usize,
    pub correction_scheme: String,
    /// Contribution of the remainder outcome missing from the closed form; zero when `r = 0`.
    pub remainder_term: f64,
}

impl TeleportReport {
    /// `|mc − formula| ≤ sigmas·stderr`.
    pub fn agrees_within(&self, sigmas: f64) -> bool {
        (self.formula_fidelity - self.mc_fidelity).abs() <= sigmas * self.mc_stderr + 1e-12
    }

    /// Same comparison against `formula + remainder_term`.
    pub fn agrees_with_remainder_within(&self, sigmas: f64) -> bool {
        (self.formula_fidelity + self.remainder_term - self.mc_fidelity).abs() <= sigmas * self.mc_stderr + 1e-12
    }
}

/// `w_R/(d(d+1))` with `w_R = Tr[(R⊗I)ρ]` and `R` the projector onto the last
/// `r` rows of the first subsystem.
///
/// The closed form assigns the Bell outcomes total weight 1. With `r > 0` they
/// carry `1 − w_R`, and the uncorrected remainder outcome returns an average
/// overlap `w_R/d`; the difference is this term.
pub fn remainder_term(rho: &DensityMatrix) -> f64 {
    let dims = rho.dims();
    let m = rho.matrix();
    let w: f64 =
        (dims.k() * dims.d()..dims.d_prime()).flat_map(|a| (0..dims.d()).map(move |b| dims.index(a, b))).map(|i| m[(i, i)].re).sum();
    let df = dims.d() as f64;
    w / (df * (df + 1.0))
}

/// Per-outcome data reused across Monte-Carlo samples.
struct Frame {
    outcome_vectors: Vec<CVector>,
    corrections: Vec<CMatrix>,
    bob_marginal: CMatrix,
}

impl Frame {
    fn new(rho: &DensityMatrix, corrections: &Corrections) -> Result<Self> {
        let dims = rho.dims();
        let d = dims.d();
        let mut outcome_vectors = Vec::new();
        let mut mats = Vec::new();
        for o in outcomes(dims) {
            let idx = WeylIndex { s: o.s, t: o.t };
            outcome_vectors.push(bell_vector(dims, idx, o.m)?);
            mats.push(corrections.get(o, d)?.matrix().clone());
        }
        let bob_marginal = partial_trace(rho.matrix(), dims, Subsystem::First)?;
        Ok(Frame { outcome_vectors, corrections: mats, bob_marginal })
    }

    /// Input fidelity averaged over measurement outcomes for one input `ψ`.
    fn fidelity(&self, rho: &DensityMatrix, psi: &CVector) -> f64 {
        let dims = rho.dims();
        let (d, dp) = (dims.d(), dims.d_prime());
        let m = rho.matrix();
        let mut total = 0.0;
        let mut captured = CMatrix::zeros(d, d);
        for (phi, t) in self.outcome_vectors.iter().zip(&self.corrections) {
            // ℓ[a] = Σ_i conj(φ[(i, a)]) ψ_i
            let ell = CVector::from_fn(dp, |a, _| (0..d).map(|i| phi[i * dp + a].conj() * psi[i]).sum::<C64>());
            // Bob's unnormalized state σ[j, j'] = Σ_{a,a'} ℓ_a conj(ℓ_a') ρ[(a,j),(a',j')]
            let mut sigma = CMatrix::zeros(d, d);
            for a in 0..dp {
                if ell[a].norm() == 0.0 {
                    continue;
                }
                for aa in 0..dp {
                    let w = ell[a] * ell[aa].conj();
                    if w.norm() == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        for jj in 0..d {
                            sigma[(j, jj)] += w * m[(dims.index(a, j), dims.index(aa, jj))];
                        }
                    }
                }
            }
            // Bob applies T†: ⟨ψ|T† σ T|ψ⟩
            let tpsi = t * psi;
            total += tpsi.dotc(&(&sigma * &tpsi)).re;
            captured += sigma;
        }
        if dims.r() > 0 {
            let rest = &self.bob_marginal - captured;
            total += psi.dotc(&(rest * psi)).re;
        }
        total
    }
}

/// Monte-Carlo simulation over Haar-random inputs. Sample `j` draws its input
/// from stream `j` of `seed`; each sample's value is the fidelity averaged over
/// the Born distribution of outcomes.
pub fn simulate_protocol(rho: &DensityMatrix, corrections: &Corrections, n_samples: usize, seed: u64) -> Result<TeleportReport> {
    simulate_protocol_with(rho, corrections, n_samples, seed, Execution::default())
}

pub fn simulate_protocol_with(
    rho: &DensityMatrix,
    corrections: &Corrections,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<TeleportReport> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("at least one sample is required".into()));
    }
    let formula_fidelity = transmission_fidelity(rho, corrections)?;
    let frame = Frame::new(rho, corrections)?;
    let d = rho.dims().d();
    let sums = chunked_sum(n_samples, 1024, exec, |range| {
        let (mut s, mut s2) = (0.0, 0.0);
        for j in range {
            let psi = haar_vector_from(d, &mut stream_rng(seed, j as u64));
            let f = frame.fidelity(rho, &psi);
            s += f;
            s2 += f * f;
        }
        vec![s, s2]
    });
    let n = n_samples as f64;
    let mean = sums[0] / n;
    let var = if n_samples > 1 { ((sums[1] - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(TeleportReport {
        formula_fidelity,
        mc_fidelity: mean,
        mc_stderr: (var / n).sqrt(),
        samples: n_samples,
        correction_scheme: corrections.scheme.clone(),
        remainder_term: remainder_term(rho),
    })
}

/// `1/(d+1) + d·F/(d+1)`.
pub fn fidelity_from_fef(d: usize, fef: f64) -> f64 {
    let df = d as f64;
    1.0 / (df + 1.0) + df * fef / (df + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalFidelity {
    pub value: f64,
    pub fef: FefResult,
}

impl OptimalFidelity {
    pub fn converged(&self) -> bool {
        self.fef.converged
    }
}

/// Optimal fidelity when local unitaries may precede the protocol.
pub fn optimal_fidelity(rho: &DensityMatrix, cfg: &FefConfig) -> Result<OptimalFidelity> {
    let fef = compute_fef(rho, cfg)?;
    Ok(OptimalFidelity { value: fidelity_from_fef(rho.dims().d(), fef.value), fef })
}

/// The resource after Alice applies the maximizing unitary `u_opt` to her half.
pub fn preprocess(rho: &DensityMatrix, fef: &FefResult) -> Result<DensityMatrix> {
    rho.apply_first(&fef.u_opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, max_abs_diff, random_density, random_local_density, random_product};
    use crate::states::{canonical_mixture, chi_state};

    fn dims(dp: usize, d: usize) -> BipartiteDims {
        BipartiteDims::new(dp, d).unwrap()
    }

    fn w(d: usize, s: usize, t: usize) -> UnitaryMatrix {
        weyl_unitary(d, WeylIndex::new(d, s, t).unwrap())
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(w(2, 2, 2), UnitaryMatrix::identity(2));
        let x = w(2, 2, 1);
        let swap = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(max_abs_diff(x.matrix(), &swap) < 1e-15);
        assert!(WeylIndex::new(3, 0, 1).is_err());
        assert!(WeylIndex::new(3, 1, 4).is_err());
    }

    #[test]
    fn weyl_operators_are_unitary_and_orthogonal() {
        for d in 2..=4 {
            let ops: Vec<CMatrix> = (1..=d).flat_map(|s| (1..=d).map(move |t| (s, t))).map(|(s, t)| w(d, s, t).into_matrix()).collect();
            for (i, a) in ops.iter().enumerate() {
                assert!(max_abs_diff(&(a.adjoint() * a), &CMatrix::identity(d, d)) < 1e-12);
                for (j, b) in ops.iter().enumerate() {
                    let ip = (a.adjoint() * b).trace();
                    let target = if i == j { d as f64 } else { 0.0 };
                    assert!((ip - C64::new(target, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weyl_twirl_is_completely_depolarizing() {
        let mut rng = stream_rng(5, 0);
        for d in 2..=4 {
            let a = random_local_density(d, d, &mut rng) + CMatrix::from_fn(d, d, |i, j| C64::new(i as f64, j as f64 * 0.5));
            let mut twirl = CMatrix::zeros(d, d);
            for s in 1..=d {
                for t in 1..=d {
                    let u = w(d, s, t);
                    twirl += u.matrix() * &a * u.matrix().adjoint();
                }
            }
            let twirl = twirl.unscale((d * d) as f64);
            let expected = CMatrix::identity(d, d) * (a.trace() / C64::new(d as f64, 0.0));
            assert!(max_abs_diff(&twirl, &expected) < 1e-10);
        }
    }

    fn frame_gram(x: BipartiteDims) -> (CMatrix, CMatrix) {
        let vecs: Vec<CVector> =
            outcomes(x).iter().map(|o| bell_vector(x, WeylIndex::new(x.d(), o.s, o.t).unwrap(), o.m).unwrap()).collect();
        let f = CMatrix::from_columns(&vecs);
        (f.adjoint() * &f, &f * f.adjoint())
    }

    #[test]
    fn bell_examples() {
        let x = dims(2, 2);
        let v = bell_vector(x, WeylIndex::new(2, 2, 2).unwrap(), 1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((v - CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)])).camax() < 1e-15);

        let (_, sum) = frame_gram(dims(4, 2));
        assert!(max_abs_diff(&sum, &CMatrix::identity(8, 8)) < 1e-12);

        let (_, sum) = frame_gram(dims(5, 2));
        let (vals, _) = crate::linalg::hermitian_eigen(&sum);
        assert_eq!(vals.iter().filter(|&&v| v > 0.5).count(), 8);
        assert!(max_abs_diff(&sum, &CMatrix::identity(10, 10)) > 0.5);
    }

    #[test]
    fn bell_frames_are_orthonormal() {
        for (dp, d) in [(2, 2), (4, 2), (6, 3)] {
            let x = dims(dp, d);
            let (gram, _) = frame_gram(x);
            let n = gram.nrows();
            assert!(max_abs_diff(&gram, &CMatrix::identity(n, n)) <= 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let x = dims(2, 2);
        let chi = chi_state(x, 1).unwrap().projector();
        assert!((transmission_fidelity(&chi, &Corrections::standard(x)).unwrap() - 1.0).abs() < 1e-14);

        for (dp, d) in [(2, 2), (4, 2), (5, 2), (6, 3)] {
            let x = dims(dp, d);
            let mixed = DensityMatrix::maximally_mixed(x);
            let expected = 1.0 / (d as f64 + 1.0) + x.k() as f64 / (dp as f64 * (d as f64 + 1.0));
            let v = haar_unitary(d, 3);
            for c in [Corrections::standard(x), Corrections::rotated(x, &v).unwrap()] {
                assert!((transmission_fidelity(&mixed, &c).unwrap() - expected).abs() < 1e-14);
            }
        }
        let mixed = DensityMatrix::maximally_mixed(x);
        assert!((transmission_fidelity(&mixed, &Corrections::standard(x)).unwrap() - 0.5).abs() < 1e-15);

        let mut partial = Corrections::standard(x);
        partial.map.remove(&Outcome { s: 1, t: 2, m: 1 });
        assert_eq!(transmission_fidelity(&mixed, &partial), Err(Error::MissingCorrection { s: 1, t: 2, m: 1 }));
    }

    #[test]
    fn best_rotated_correction_reaches_the_optimal_expression() {
        // with corrections V·U_st† the sum collapses to d²·Σ_m ⟨χ_m|(I⊗V†)ρ(I⊗V)|χ_m⟩;
        // for ρ = (I⊗W)ρ₀(I⊗W†) with ρ₀ maximally entangled, V = W is optimal
        let x = dims(4, 2);
        let wv = haar_unitary(2, 8);
        let rho =
            canonical_mixture(x, &[0.6, 0.4], &UnitaryMatrix::identity(4)).unwrap().apply_local(&UnitaryMatrix::identity(4), &wv).unwrap();
        let best = transmission_fidelity(&rho, &Corrections::rotated(x, &wv).unwrap()).unwrap();
        assert!((best - 1.0).abs() < 1e-12);
        for s in 0..20 {
            let other = transmission_fidelity(&rho, &Corrections::rotated(x, &haar_unitary(2, 100 + s)).unwrap()).unwrap();
            assert!(other <= best + 1e-12);
        }
    }

    #[test]
    fn simulation_of_perfect_resource_is_exact() {
        let x = dims(2, 2);
        let chi = chi_state(x, 1).unwrap().projector();
        let rep = simulate_protocol(&chi, &Corrections::standard(x), 2000, 4).unwrap();
        assert!((rep.mc_fidelity - 1.0).abs() < 1e-12);
        assert!(rep.mc_stderr < 1e-7);
    }

    #[test]
    fn simulation_agrees_with_formula() {
        let cases: Vec<DensityMatrix> = vec![
            DensityMatrix::maximally_mixed(dims(2, 2)),
            random_density(dims(4, 2), 3, 5).unwrap(),
            random_product(dims(4, 2), 6),
            random_density(dims(3, 3), 4, 7).unwrap(),
        ];
        for rho in cases {
            let x = rho.dims();
            for c in [Corrections::standard(x), Corrections::rotated(x, &haar_unitary(x.d(), 1)).unwrap()] {
                let rep = simulate_protocol(&rho, &c, 20_000, 9).unwrap();
                assert!(rep.agrees_within(3.0), "{x}: {rep:?}");
            }
        }
    }

    #[test]
    fn remainder_outcome_adds_its_weight() {
        let x = dims(5, 2);
        let mixed = DensityMatrix::maximally_mixed(x);
        assert!((remainder_term(&mixed) - 1.0 / 30.0).abs() < 1e-15);
        let rep = simulate_protocol(&mixed, &Corrections::standard(x), 1000, 0).unwrap();
        assert!((rep.mc_fidelity - 0.5).abs() < 1e-12);
        assert!(!rep.agrees_within(3.0));
        assert!(rep.agrees_with_remainder_within(3.0));
        for s in 1..4 {
            let rho = random_density(dims(7, 3), s, s as u64).unwrap();
            let rep = simulate_protocol(&rho, &Corrections::standard(rho.dims()), 20_000, s as u64).unwrap();
            assert!(rep.remainder_term > 0.0);
            assert!(rep.agrees_with_remainder_within(3.0), "{rep:?}");
        }
        assert_eq!(remainder_term(&random_density(dims(4, 2), 3, 0).unwrap()), 0.0);
    }

    #[test]
    fn simulation_is_schedule_independent() {
        let x = dims(4, 2);
        let rho = random_density(x, 2, 1).unwrap();
        let c = Corrections::standard(x);
        let a = simulate_protocol_with(&rho, &c, 5000, 3, Execution::Sequential).unwrap();
        let b = simulate_protocol_with(&rho, &c, 5000, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn optimal_fidelity_examples() {
        assert_eq!(fidelity_from_fef(2, 1.0), 1.0);
        for d in 2..=4 {
            assert!((fidelity_from_fef(d, 1.0 / d as f64) - 2.0 / (d as f64 + 1.0)).abs() < 1e-15);
        }
        let x = dims(4, 2);
        for s in 0..5 {
            let rho = random_product(x, s);
            let opt = optimal_fidelity(&rho, &FefConfig::for_dims(x, s)).unwrap();
            assert!(opt.value <= 2.0 / 3.0 + 1e-4);
        }
        let chi = chi_state(x, 2).unwrap().projector();
        let opt = optimal_fidelity(&chi, &FefConfig::for_dims(x, 0)).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-10 && opt.converged());
    }
}
