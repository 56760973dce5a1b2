//! Generalized fully entangled fraction
//!
//! ```text
//! F(ρ) = max_U Σ_{m=1..K} ⟨χ_m|(U⊗I) ρ (U†⊗I)|χ_m⟩ = max_U Tr[(U⊗I)ρ(U†⊗I) P]
//! ```
//!
//! with `P` the block projector. The maximum is searched by gradient ascent on
//! the unitary group, `U ← exp(i·t·H)·U`, where `H` is the Riemannian gradient
//! in the Hermitian parameterization, with Armijo backtracking and Haar
//! restarts. Restarts are independent; restart `j` draws its start point from
//! stream `j` of the configured seed.

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::{
    haar_unitary_from, hermitian_exp, retract_unitary, schmidt_decompose, stream_rng, BipartiteDims, CMatrix, DensityMatrix, PureState,
    UnitaryMatrix, C64,
};
use crate::states::chi_state;

/// Imaginary residue tolerated in `Tr[σP]` before it is discarded.
const IMAG_TOL: f64 = 1e-10;
/// Slack on the `[K/(d'd), 1]` range before a value is treated as a bug.
const RANGE_TOL: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
/// Iterations over which the value must stall to declare a plateau.
const PLATEAU_WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct FefConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol_grad: f64,
    pub tol_value: f64,
    pub seed: u64,
}

impl Default for FefConfig {
    fn default() -> Self {
        FefConfig { restarts: 20, max_iters: 2000, step_init: 0.1, tol_grad: 1e-8, tol_value: 1e-10, seed: 0 }
    }
}

impl FefConfig {
    /// Defaults with the restart count raised to 50 once `d'·d > 16`.
    pub fn for_dims(dims: BipartiteDims, seed: u64) -> Self {
        let restarts = if dims.total() > 16 { 50 } else { 20 };
        FefConfig { restarts, seed, ..FefConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig("restarts and max_iters must be at least 1".into()));
        }
        for (name, v) in [("step_init", self.step_init), ("tol_grad", self.tol_grad), ("tol_value", self.tol_value)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FefResult {
    pub value: f64,
    pub u_opt: UnitaryMatrix,
    /// The best restart stopped on the gradient or plateau criterion rather
    /// than on `max_iters`.
    pub converged: bool,
    pub iterations_per_restart: Vec<usize>,
    pub best_restart: usize,
    /// Max-norm of the Riemannian gradient at `u_opt`.
    pub gradient_norm: f64,
}

/// `P = Σ_m |χ_m⟩⟨χ_m|`.
pub fn block_projector(dims: BipartiteDims) -> CMatrix {
    let n = dims.total();
    let mut p = CMatrix::zeros(n, n);
    for m in 1..=dims.k() {
        let chi = chi_state(dims, m).expect("m in range");
        p += chi.vector() * chi.vector().adjoint();
    }
    p
}

/// Objective and gradient evaluator bound to one state.
///
/// With `w_m = (U†⊗I)|χ_m⟩` the objective is `Σ_m w_m† ρ w_m`, and with
/// `y_m = (U⊗I) ρ w_m` the gradient is `H = i(Z† − Z)` where
/// `Z = Σ_m Tr_2(|χ_m⟩⟨y_m|)`.
pub(crate) struct Objective<'a> {
    rho: &'a CMatrix,
    dims: BipartiteDims,
    amp: f64,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(rho: &'a DensityMatrix) -> Self {
        let dims = rho.dims();
        Objective { rho: rho.matrix(), dims, amp: 1.0 / (dims.d() as f64).sqrt() }
    }

    /// Columns `w_m`, `m = 1..=K`.
    fn block_vectors(&self, u: &CMatrix) -> CMatrix {
        let dims = self.dims;
        let (dp, d) = (dims.d_prime(), dims.d());
        let mut w = CMatrix::zeros(dims.total(), dims.k());
        for m in 1..=dims.k() {
            for i in 0..d {
                let row = dims.block_row(i, m);
                for a in 0..dp {
                    // (U†)[a, row] = conj(U[row, a])
                    w[(dims.index(a, i), m - 1)] = u[(row, a)].conj() * self.amp;
                }
            }
        }
        w
    }

    fn raw_value(&self, w: &CMatrix, rho_w: &CMatrix) -> C64 {
        (0..w.ncols()).map(|m| w.column(m).dotc(&rho_w.column(m))).sum()
    }

    pub(crate) fn value(&self, u: &CMatrix) -> f64 {
        let w = self.block_vectors(u);
        let rho_w = self.rho * &w;
        self.raw_value(&w, &rho_w).re
    }

    /// Value with its imaginary residue, for consistency checks.
    fn complex_value(&self, u: &CMatrix) -> C64 {
        let w = self.block_vectors(u);
        let rho_w = self.rho * &w;
        self.raw_value(&w, &rho_w)
    }

    pub(crate) fn value_and_gradient(&self, u: &CMatrix) -> (f64, CMatrix) {
        let dims = self.dims;
        let (dp, d) = (dims.d_prime(), dims.d());
        let w = self.block_vectors(u);
        let rho_w = self.rho * &w;
        let value = self.raw_value(&w, &rho_w).re;

        let mut z = CMatrix::zeros(dp, dp);
        for m in 1..=dims.k() {
            let x = rho_w.column(m - 1);
            for j in 0..d {
                let row = dims.block_row(j, m);
                for c in 0..dp {
                    // y[(c, j)] = Σ_a U[c, a] x[(a, j)]
                    let y: C64 = (0..dp).map(|a| u[(c, a)] * x[dims.index(a, j)]).sum();
                    z[(row, c)] += y.conj() * self.amp;
                }
            }
        }
        let i = C64::new(0.0, 1.0);
        let h = (z.adjoint() - z).map(|v| v * i);
        (value, h)
    }
}

fn check_size(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<()> {
    if u.n() != rho.dims().d_prime() {
        return Err(Error::DimensionMismatch {
            expected: format!("unitary of size {}", rho.dims().d_prime()),
            found: format!("{}", u.n()),
        });
    }
    Ok(())
}

/// `Tr[(U⊗I)ρ(U†⊗I) P]`, the quantity maximized by `F`.
pub fn fef_objective(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<f64> {
    check_size(rho, u)?;
    let v = Objective::new(rho).complex_value(u.matrix());
    if v.im.abs() > IMAG_TOL {
        return Err(Error::Inconsistent(format!("objective has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

/// Hermitian `H` with `d/dε fef_objective(ρ, exp(iεH')U)|₀ = Tr(H'H)` for every Hermitian `H'`.
pub fn fef_gradient(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<CMatrix> {
    check_size(rho, u)?;
    Ok(Objective::new(rho).value_and_gradient(u.matrix()).1)
}

fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
struct Ascent {
    value: f64,
    u: CMatrix,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
}

fn ascend(obj: &Objective<'_>, start: CMatrix, cfg: &FefConfig) -> Ascent {
    let mut u = start;
    let (mut value, mut grad) = obj.value_and_gradient(&u);
    let mut step = cfg.step_init;
    let mut recent: Vec<f64> = Vec::with_capacity(PLATEAU_WINDOW + 1);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if max_norm(&grad) <= cfg.tol_grad {
            converged = true;
            break;
        }
        iterations += 1;
        let slope = grad.norm_squared();
        let mut t = step;
        let accepted = loop {
            let cand = hermitian_exp(&grad, t) * &u;
            let v = obj.value(&cand);
            if v >= value + ARMIJO * t * slope {
                break Some((cand, v));
            }
            t *= SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((cand, v)) = accepted else {
            // no ascent possible at double precision
            converged = true;
            break;
        };
        let gain = v - value;
        u = cand;
        (value, grad) = obj.value_and_gradient(&u);
        step = (2.0 * t).min(1e3);

        recent.push(gain);
        if recent.len() > PLATEAU_WINDOW {
            recent.remove(0);
        }
        if recent.len() == PLATEAU_WINDOW && recent.iter().all(|g| g.abs() <= cfg.tol_value) {
            converged = true;
            break;
        }
    }
    if !converged && max_norm(&grad) <= cfg.tol_grad {
        converged = true;
    }
    Ascent { value, gradient_norm: max_norm(&grad), u, iterations, converged }
}

/// Start point of restart `j`: the identity for `j = 0`, Haar otherwise.
fn start_point(n: usize, seed: u64, j: usize) -> CMatrix {
    if j == 0 {
        CMatrix::identity(n, n)
    } else {
        haar_unitary_from(n, &mut stream_rng(seed, j as u64)).into_matrix()
    }
}

pub fn compute_fef(rho: &DensityMatrix, cfg: &FefConfig) -> Result<FefResult> {
    compute_fef_with(rho, cfg, Execution::default())
}

pub fn compute_fef_with(rho: &DensityMatrix, cfg: &FefConfig, exec: Execution) -> Result<FefResult> {
    cfg.validate()?;
    let dims = rho.dims();
    let obj = Objective::new(rho);
    let runs = map_indexed(cfg.restarts, exec, |j| ascend(&obj, start_point(dims.d_prime(), cfg.seed, j), cfg));

    // ties go to the lowest restart index
    let best_restart = runs.iter().enumerate().fold(0, |best, (j, r)| if r.value > runs[best].value { j } else { best });
    let best = &runs[best_restart];
    let u_opt = UnitaryMatrix::new(best.u.clone()).map_err(|e| Error::Inconsistent(format!("optimizer left the unitary group: {e}")))?;
    let value = fef_objective(rho, &u_opt)?;

    // an unconverged run is only a lower estimate of F, so only the upper bound applies to it
    let lower = dims.k() as f64 / dims.total() as f64;
    if (best.converged && value < lower - RANGE_TOL) || value > 1.0 + RANGE_TOL {
        return Err(Error::Inconsistent(format!("FEF value {value} outside [{lower}, 1]")));
    }
    Ok(FefResult {
        value,
        u_opt,
        converged: best.converged,
        iterations_per_restart: runs.iter().map(|r| r.iterations).collect(),
        best_restart,
        gradient_norm: best.gradient_norm,
    })
}

/// `max(objective(I), objective(U_1), …, objective(U_n))` over Haar `U_j`;
/// a lower bound on `F(ρ)`.
pub fn fef_sampling_oracle(rho: &DensityMatrix, n_samples: usize, seed: u64) -> f64 {
    fef_sampling_oracle_with(rho, n_samples, seed, Execution::default())
}

pub fn fef_sampling_oracle_with(rho: &DensityMatrix, n_samples: usize, seed: u64, exec: Execution) -> f64 {
    let obj = Objective::new(rho);
    let n = rho.dims().d_prime();
    const CHUNK: usize = 256;
    let chunks = n_samples.div_ceil(CHUNK);
    let best = map_indexed(chunks, exec, |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(n_samples)).map(|j| obj.value(&start_point(n, seed, j + 1))).fold(f64::NEG_INFINITY, f64::max)
    });
    best.into_iter().fold(obj.value(&CMatrix::identity(n, n)), f64::max)
}

/// `(Σ_i s_i)²/d` from the Schmidt coefficients.
///
/// Mapping every left Schmidt vector into block 1 attains it. It is also an
/// upper bound for any `K`: with `X_m` the block-`m` part of `U` restricted to
/// the Schmidt support and `S = diag(s)`, Cauchy–Schwarz gives
/// `Σ_m |Tr(X_m S)|² ≤ Tr S · Σ_m Tr(S^½ X_m† X_m S^½) ≤ (Tr S)²`.
/// Callers still cross-check it against [`compute_fef`].
pub fn fef_pure_schmidt(psi: &PureState) -> Result<f64> {
    let s = schmidt_decompose(psi)?;
    let sum: f64 = s.coefficients.iter().sum();
    Ok(sum * sum / psi.dims().d() as f64)
}

/// One ascent step from `u` along the gradient, exposed for diagnostics.
pub fn gradient_step(rho: &DensityMatrix, u: &UnitaryMatrix, step: f64) -> Result<UnitaryMatrix> {
    let g = fef_gradient(rho, u)?;
    retract_unitary(u, &g, step)
}
