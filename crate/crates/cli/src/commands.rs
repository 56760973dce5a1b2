use std::path::Path;

use clap::ValueEnum;
use fef_core::fef::fef_pure_schmidt;
use fef_core::linalg::{haar_unitary, hermitian_eigen, random_density, random_product};
use fef_core::states::{
    canonical_mixture, canonicalize, chi_state, is_max_entangled_structural, isotropic, reconstruction_residual, STRUCTURAL_TOL,
    VARIATIONAL_TOL,
};
use fef_core::teleport::{fidelity_from_fef, simulate_protocol, Corrections};
use fef_core::witness::classify;
use fef_core::{compute_fef, BipartiteDims, CVector, DensityMatrix, FefConfig, PureState};
use serde_json::{json, Value};

use crate::io::{matrix_to_rows, read_state, state_json, Report};
use crate::{Cli, CliError, Command, MakeArgs, MakeKind};

/// Agreement required before the Schmidt fast path is reported.
const SCHMIDT_AGREEMENT: f64 = 1e-4;
/// Largest eigenvalue at which an input counts as a pure state.
const PURE_TOL: f64 = 1e-8;
const MIN_SAMPLES: usize = 100;

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Make(args) => {
            let rho = make_state(args, cli.seed)?;
            let text = state_json(&rho);
            match &cli.out {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
            if cli.out.is_some() && cli.json {
                print!("{text}");
            }
            Ok(0)
        }
        Command::Fef { input, restarts, max_iters } => {
            let (report, code) = cmd_fef(input, cli, *restarts, *max_iters)?;
            emit(cli, &report)?;
            Ok(code)
        }
        Command::Check { input } => {
            let (report, code) = cmd_check(input, cli)?;
            emit(cli, &report)?;
            Ok(code)
        }
        Command::Witness { input, restarts } => {
            let (report, code) = cmd_witness(input, cli, *restarts)?;
            emit(cli, &report)?;
            Ok(code)
        }
        Command::Teleport { input, samples } => {
            let report = cmd_teleport(input, cli, *samples)?;
            emit(cli, &report)?;
            Ok(0)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let text = report.to_json();
    if let Some(path) = &cli.out {
        write(path, &text)?;
    }
    if cli.json {
        print!("{text}");
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("make {kind} requires --{flag}")))
}

pub fn make_state(args: &MakeArgs, seed: u64) -> Result<DensityMatrix, CliError> {
    let kind = args.kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let kind = kind.as_str();
    let dims = |dp: Option<usize>, d: Option<usize>| -> Result<BipartiteDims, CliError> {
        Ok(BipartiteDims::new(need(dp, "dprime", kind)?, need(d, "d", kind)?)?)
    };
    let rho = match args.kind {
        MakeKind::Chi => chi_state(dims(args.dprime, args.d)?, need(args.m, "m", kind)?)?.projector(),
        MakeKind::CanonicalMixture => {
            let x = dims(args.dprime, args.d)?;
            let probs = args.probs.as_ref().ok_or_else(|| CliError::Input("make canonical-mixture requires --probs".into()))?;
            canonical_mixture(x, probs, &haar_unitary(x.d_prime(), seed))?
        }
        MakeKind::Isotropic => isotropic(need(args.d, "d", kind)?, need(args.p, "p", kind)?)?,
        MakeKind::Product => {
            let x = dims(args.dprime, args.d)?;
            match (args.a, args.b) {
                (Some(a), Some(b)) => PureState::product_basis(x, a, b)?.projector(),
                (None, None) => random_product(x, seed),
                _ => return Err(CliError::Input("make product takes both --a and --b or neither".into())),
            }
        }
        MakeKind::Random => {
            let x = dims(args.dprime, args.d)?;
            random_density(x, args.rank.unwrap_or(x.total()), seed)?
        }
        MakeKind::Schmidt => {
            let x = dims(args.dprime, args.d)?;
            let w = args.weights.as_ref().ok_or_else(|| CliError::Input("make schmidt requires --weights".into()))?;
            PureState::from_schmidt_weights(x, w)?.projector()
        }
    };
    Ok(rho)
}

fn echo_state(report: &mut Report, input: &Path, rho: &DensityMatrix) {
    report.input("input", input.display().to_string());
    report.input("d_prime", rho.dims().d_prime());
    report.input("d", rho.dims().d());
}

fn config(rho: &DensityMatrix, seed: u64, restarts: Option<usize>, max_iters: Option<usize>, tol: Option<f64>) -> FefConfig {
    let mut cfg = FefConfig::for_dims(rho.dims(), seed);
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    if let Some(t) = tol {
        cfg.tol_grad = t;
    }
    cfg
}

fn echo_config(report: &mut Report, cfg: &FefConfig) {
    report.input("restarts", cfg.restarts);
    report.input("max_iters", cfg.max_iters);
    report.input("tol_grad", cfg.tol_grad);
    report.input("tol_value", cfg.tol_value);
}

/// The state vector when `rho` is pure.
fn pure_part(rho: &DensityMatrix) -> Option<PureState> {
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    if vals[0] < 1.0 - PURE_TOL {
        return None;
    }
    PureState::normalized(rho.dims(), CVector::from(vecs.column(0))).ok()
}

pub fn cmd_fef(input: &Path, cli: &Cli, restarts: Option<usize>, max_iters: Option<usize>) -> Result<(Report, u8), CliError> {
    let rho = read_state(input)?;
    let cfg = config(&rho, cli.seed, restarts, max_iters, cli.tol);
    let mut report = Report::new("fef", cli.seed);
    echo_state(&mut report, input, &rho);
    echo_config(&mut report, &cfg);

    let res = compute_fef(&rho, &cfg)?;
    report.number("fef", res.value)?;
    report.number("f_max", fidelity_from_fef(rho.dims().d(), res.value))?;
    report.result("converged", res.converged);
    report.result("best_restart", res.best_restart);
    report.number("gradient_norm", res.gradient_norm)?;
    report.result("u_opt", json!(matrix_to_rows(res.u_opt.matrix())));
    if let Some(psi) = pure_part(&rho) {
        let fast = fef_pure_schmidt(&psi)?;
        if (fast - res.value).abs() <= SCHMIDT_AGREEMENT {
            report.number("schmidt_fef", fast)?;
        } else {
            report.result("schmidt_fef", Value::Null);
            report.number("schmidt_discrepancy", fast - res.value)?;
        }
    }
    Ok((report, if res.converged { 0 } else { 2 }))
}

pub fn cmd_check(input: &Path, cli: &Cli) -> Result<(Report, u8), CliError> {
    let rho = read_state(input)?;
    let tol = cli.tol.unwrap_or(STRUCTURAL_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
    }
    let cfg = FefConfig::for_dims(rho.dims(), cli.seed);
    let mut report = Report::new("check", cli.seed);
    echo_state(&mut report, input, &rho);
    report.input("structural_tol", tol);
    report.input("variational_tol", VARIATIONAL_TOL);
    echo_config(&mut report, &cfg);

    let structural = is_max_entangled_structural(&rho, tol);
    let fef = compute_fef(&rho, &cfg)?;
    let variational = (fef.value - 1.0).abs() <= VARIATIONAL_TOL;
    report.result("structural", structural);
    report.result("variational", variational);
    report.number("fef", fef.value)?;
    let canonical = if structural {
        let form = canonicalize(&rho, tol)?;
        json!({
            "probs": form.probs,
            "u": matrix_to_rows(form.u.matrix()),
            "reconstruction_residual": reconstruction_residual(&rho, &form),
        })
    } else {
        Value::Null
    };
    report.result("canonical", canonical);
    Ok((report, if structural == variational { 0 } else { 3 }))
}

pub fn cmd_witness(input: &Path, cli: &Cli, restarts: Option<usize>) -> Result<(Report, u8), CliError> {
    let rho = read_state(input)?;
    let cfg = config(&rho, cli.seed, restarts, None, None);
    let mut report = Report::new("witness", cli.seed);
    echo_state(&mut report, input, &rho);
    echo_config(&mut report, &cfg);

    let c = classify(&rho, &cfg)?;
    report.number("best_expectation", c.best_expectation)?;
    report.result("max_entangled", c.max_entangled);
    report.result("teleport_useful", c.teleport_useful);
    report.result("converged", c.converged);
    if let Some(lit) = c.literal_expectation {
        report.number("literal_identity_expectation", lit)?;
    }
    report.result("u_best", json!(matrix_to_rows(c.u_best.matrix())));
    Ok((report, if c.converged { 0 } else { 2 }))
}

pub fn cmd_teleport(input: &Path, cli: &Cli, samples: usize) -> Result<Report, CliError> {
    let rho = read_state(input)?;
    if samples < MIN_SAMPLES {
        return Err(CliError::Input(format!("--samples must be at least {MIN_SAMPLES}, got {samples}")));
    }
    let mut report = Report::new("teleport", cli.seed);
    echo_state(&mut report, input, &rho);
    report.input("samples", samples);
    report.input("corrections", "standard");

    let rep = simulate_protocol(&rho, &Corrections::standard(rho.dims()), samples, cli.seed)?;
    report.number("formula_fidelity", rep.formula_fidelity)?;
    report.number("mc_fidelity", rep.mc_fidelity)?;
    report.number("mc_stderr", rep.mc_stderr)?;
    report.result("agree_3sigma", rep.agrees_within(3.0));
    if rho.dims().r() > 0 {
        report.number("remainder_term", rep.remainder_term)?;
        report.result("agree_3sigma_with_remainder", rep.agrees_with_remainder_within(3.0));
    }
    Ok(report)
}
