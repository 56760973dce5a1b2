//! Hermitian operator bases on both subsystems and the witness `Γ`.
//!
//! On the first subsystem, per block `m`:
//!
//! ```text
//! λ_{i,m}    = |(m-1)d⟩⟨(m-1)d| − |i+(m-1)d⟩⟨i+(m-1)d|          i = 1..d-1
//! λ_{kl,m}   = |k+(m-1)d⟩⟨l+(m-1)d| + h.c.                       0 ≤ k < l < d
//! λ'_{kl,m}  = i(|k+(m-1)d⟩⟨l+(m-1)d| − |l+(m-1)d⟩⟨k+(m-1)d|)
//! ```
//!
//! and the same pattern without `m` on the second subsystem. With `Π_m` the
//! projector onto block `m` of the first subsystem,
//!
//! ```text
//! |χ_m⟩⟨χ_m| = 1/d² [Π_m⊗I + d Σ_i λ_{i,m}⊗λ_i − Σ_ij λ_{i,m}⊗λ_j]
//!             + 1/(2d) Σ_{k<l} [λ_{kl,m}⊗λ_kl − λ'_{kl,m}⊗λ'_kl].
//! ```
//!
//! Summing over `m` and conjugating by `U` yields `Γ(U) = (U†⊗I) P (U⊗I)`, so
//! `⟨Γ(U)⟩_ρ` is exactly the FEF objective at `U`.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::fef::{compute_fef, FefConfig};
use crate::linalg::{hermiticity_residual, kron, max_abs_diff, BipartiteDims, CMatrix, DensityMatrix, UnitaryMatrix, C64};
use crate::states::chi_state;

/// Key of an operator on the first subsystem; `m` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FirstKey {
    Diagonal { i: usize, m: usize },
    Symmetric { k: usize, l: usize, m: usize },
    Antisymmetric { k: usize, l: usize, m: usize },
}

/// Key of an operator on the second subsystem, or of a block-summed `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalKey {
    Diagonal { i: usize },
    Symmetric { k: usize, l: usize },
    Antisymmetric { k: usize, l: usize },
}

impl LocalKey {
    fn with_block(self, m: usize) -> FirstKey {
        match self {
            LocalKey::Diagonal { i } => FirstKey::Diagonal { i, m },
            LocalKey::Symmetric { k, l } => FirstKey::Symmetric { k, l, m },
            LocalKey::Antisymmetric { k, l } => FirstKey::Antisymmetric { k, l, m },
        }
    }
}

/// Convention for the `μ'` operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MuConvention {
    /// `μ'_kl = Σ_m λ'_{kl,m}` (Hermitian).
    #[default]
    Resolved,
    /// `μ'_kl = i·Σ_m λ'_{kl,m}`, an anti-Hermitian operator.
    Printed,
}

/// Convention for the identity term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IdentityTerm {
    /// Projector onto the occupied blocks of the first subsystem.
    #[default]
    Block,
    /// The full identity `I_{d'}` in every term.
    Literal,
}

fn ket_bra(n: usize, r: usize, c: usize, v: C64) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(r, c)] = v;
    m
}

/// Local keys for dimension `d`: `d-1` diagonal, then symmetric and
/// antisymmetric pairs `k < l`.
fn local_keys(d: usize) -> Vec<LocalKey> {
    let mut keys: Vec<LocalKey> = (1..d).map(|i| LocalKey::Diagonal { i }).collect();
    for k in 0..d {
        for l in k + 1..d {
            keys.push(LocalKey::Symmetric { k, l });
        }
    }
    for k in 0..d {
        for l in k + 1..d {
            keys.push(LocalKey::Antisymmetric { k, l });
        }
    }
    keys
}

/// The operator for `key` on an `n`-dimensional space with rows offset by `base`.
fn local_operator(n: usize, base: usize, key: LocalKey) -> CMatrix {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match key {
        LocalKey::Diagonal { i: idx } => ket_bra(n, base, base, one) - ket_bra(n, base + idx, base + idx, one),
        LocalKey::Symmetric { k, l } => ket_bra(n, base + k, base + l, one) + ket_bra(n, base + l, base + k, one),
        LocalKey::Antisymmetric { k, l } => ket_bra(n, base + k, base + l, i) - ket_bra(n, base + l, base + k, i),
    }
}

/// `λ_{i+(m-1)d}`, `λ_{k+(m-1)d, l+(m-1)d}`, `λ'_{k+(m-1)d, l+(m-1)d}` on the `d'`-space.
pub fn lambda_first(dims: BipartiteDims) -> BTreeMap<FirstKey, CMatrix> {
    let mut out = BTreeMap::new();
    for m in 1..=dims.k() {
        let base = dims.block_row(0, m);
        for key in local_keys(dims.d()) {
            out.insert(key.with_block(m), local_operator(dims.d_prime(), base, key));
        }
    }
    out
}

/// `λ_i`, `λ_kl`, `λ'_kl` on the `d`-space.
pub fn lambda_second(d: usize) -> BTreeMap<LocalKey, CMatrix> {
    local_keys(d).into_iter().map(|key| (key, local_operator(d, 0, key))).collect()
}

pub fn mu_operators(dims: BipartiteDims) -> BTreeMap<LocalKey, CMatrix> {
    mu_operators_with(dims, MuConvention::Resolved)
}

/// `μ = Σ_m λ_{·,m}` per local key.
pub fn mu_operators_with(dims: BipartiteDims, convention: MuConvention) -> BTreeMap<LocalKey, CMatrix> {
    let dp = dims.d_prime();
    local_keys(dims.d())
        .into_iter()
        .map(|key| {
            let mut mu = CMatrix::zeros(dp, dp);
            for m in 1..=dims.k() {
                mu += local_operator(dp, dims.block_row(0, m), key);
            }
            if convention == MuConvention::Printed && matches!(key, LocalKey::Antisymmetric { .. }) {
                mu = mu.map(|z| z * C64::new(0.0, 1.0));
            }
            (key, mu)
        })
        .collect()
}

fn identity_term(dims: BipartiteDims, blocks: impl Iterator<Item = usize>, convention: IdentityTerm) -> CMatrix {
    let dp = dims.d_prime();
    match convention {
        IdentityTerm::Literal => CMatrix::identity(dp, dp),
        IdentityTerm::Block => {
            let mut p = CMatrix::zeros(dp, dp);
            for m in blocks {
                for i in 0..dims.d() {
                    let r = dims.block_row(i, m);
                    p[(r, r)] = C64::new(1.0, 0.0);
                }
            }
            p
        }
    }
}

/// `1/d² [I⊗I + d Σ_i X_i⊗λ_i − Σ_ij X_i⊗λ_j] + 1/(2d) Σ [X_kl⊗λ_kl − X'_kl⊗λ'_kl]`
/// for first-subsystem operators `first(key)` and identity term `id`.
fn assemble(d: usize, id: &CMatrix, first: impl Fn(LocalKey) -> CMatrix) -> CMatrix {
    let second = lambda_second(d);
    let df = d as f64;
    let id_d = CMatrix::identity(d, d);
    let mut out = kron(id, &id_d).unscale(df * df);
    for i in 1..d {
        let xi = first(LocalKey::Diagonal { i });
        out += kron(&xi, &second[&LocalKey::Diagonal { i }]).scale(1.0 / df);
        for j in 1..d {
            out -= kron(&xi, &second[&LocalKey::Diagonal { i: j }]).unscale(df * df);
        }
    }
    for k in 0..d {
        for l in k + 1..d {
            let sym = LocalKey::Symmetric { k, l };
            let anti = LocalKey::Antisymmetric { k, l };
            out += kron(&first(sym), &second[&sym]).unscale(2.0 * df);
            out -= kron(&first(anti), &second[&anti]).unscale(2.0 * df);
        }
    }
    out
}

/// `|χ_m⟩⟨χ_m|` rebuilt from the operator bases.
pub fn chi_expansion(dims: BipartiteDims, m: usize, convention: IdentityTerm) -> Result<CMatrix> {
    dims.check_block(m)?;
    let lambdas = lambda_first(dims);
    let id = identity_term(dims, std::iter::once(m), convention);
    Ok(assemble(dims.d(), &id, |key| lambdas[&key.with_block(m)].clone()))
}

/// Max-norm residual between the expansion and `|χ_m⟩⟨χ_m|`.
pub fn expansion_residual(dims: BipartiteDims, m: usize) -> Result<f64> {
    expansion_residual_with(dims, m, IdentityTerm::Block)
}

pub fn expansion_residual_with(dims: BipartiteDims, m: usize, convention: IdentityTerm) -> Result<f64> {
    let rebuilt = chi_expansion(dims, m, convention)?;
    let chi = chi_state(dims, m)?.projector();
    Ok(max_abs_diff(&rebuilt, chi.matrix()))
}

/// `Γ` together with the unitary that parameterizes it.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessOperator {
    pub dims: BipartiteDims,
    pub u: UnitaryMatrix,
    pub gamma: CMatrix,
}

impl WitnessOperator {
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        rho.expectation(&self.gamma)
    }
}

pub fn build_gamma(dims: BipartiteDims, u: &UnitaryMatrix) -> Result<WitnessOperator> {
    build_gamma_with(dims, u, IdentityTerm::Block)
}

/// `Γ(U)` with `A = U† μ U`; with the block identity term this equals
/// `(U†⊗I) P (U⊗I)`.
pub fn build_gamma_with(dims: BipartiteDims, u: &UnitaryMatrix, convention: IdentityTerm) -> Result<WitnessOperator> {
    if u.n() != dims.d_prime() {
        return Err(crate::Error::DimensionMismatch {
            expected: format!("unitary of size {}", dims.d_prime()),
            found: format!("{}", u.n()),
        });
    }
    let mu = mu_operators(dims);
    let um = u.matrix();
    let conj = |x: &CMatrix| um.adjoint() * x * um;
    let id = conj(&identity_term(dims, 1..=dims.k(), convention));
    let gamma = assemble(dims.d(), &id, |key| conj(&mu[&key]));
    debug_assert!(hermiticity_residual(&gamma) < 1e-10);
    Ok(WitnessOperator { dims, u: u.clone(), gamma })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub max_entangled: bool,
    pub teleport_useful: bool,
    pub best_expectation: f64,
    pub u_best: UnitaryMatrix,
    pub converged: bool,
    /// `⟨Γ⟩` with the literal `I_{d'}` identity term at `u_best`, reported when `r > 0`.
    pub literal_expectation: Option<f64>,
}

/// Margin below 1 accepted as maximal entanglement.
pub const MAX_ENTANGLED_MARGIN: f64 = 1e-4;
/// Margin above `1/d` required for teleportation usefulness.
pub const USEFUL_MARGIN: f64 = 1e-6;

/// Maximizes `⟨Γ(U)⟩_ρ` through the FEF optimizer and applies the thresholds 1 and `1/d`.
pub fn classify(rho: &DensityMatrix, cfg: &FefConfig) -> Result<Classification> {
    let dims = rho.dims();
    let fef = compute_fef(rho, cfg)?;
    let witness = build_gamma(dims, &fef.u_opt)?;
    let best_expectation = witness.expectation(rho);
    let literal_expectation =
        if dims.r() > 0 { Some(build_gamma_with(dims, &fef.u_opt, IdentityTerm::Literal)?.expectation(rho)) } else { None };
    Ok(Classification {
        max_entangled: best_expectation >= 1.0 - MAX_ENTANGLED_MARGIN,
        teleport_useful: best_expectation > 1.0 / dims.d() as f64 + USEFUL_MARGIN,
        best_expectation,
        u_best: fef.u_opt,
        converged: fef.converged,
        literal_expectation,
    })
}
