//! JSON state and report files.

use std::path::Path;

use fef_core::linalg::Tolerances;
use fef_core::{BipartiteDims, CMatrix, DensityMatrix, C64};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Validation tolerance for externally produced state files.
pub const FILE_TOL: f64 = 1e-8;

/// `ρ` as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub d_prime: usize,
    pub d: usize,
    pub rho: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let dims = rho.dims();
        StateFile { d_prime: dims.d_prime(), d: dims.d(), rho: matrix_to_rows(rho.matrix()) }
    }

    pub fn to_density(&self) -> Result<DensityMatrix, CliError> {
        let dims = BipartiteDims::new(self.d_prime, self.d).map_err(|e| CliError::Input(e.to_string()))?;
        let n = dims.total();
        if self.rho.len() != n {
            return Err(CliError::Input(format!("rho has {} rows, expected d'·d = {n}", self.rho.len())));
        }
        if let Some((i, row)) = self.rho.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CliError::Input(format!("rho row {i} has {} entries, expected {n}", row.len())));
        }
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(self.rho[i][j][0], self.rho[i][j][1]));
        DensityMatrix::with_tolerances(dims, m, Tolerances::uniform(FILE_TOL)).map_err(|e| CliError::Input(e.to_string()))
    }
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed state file {}: {e}", path.display())))?;
    file.to_density()
}

/// One matrix row per line.
pub fn state_json(rho: &DensityMatrix) -> String {
    let file = StateFile::from_density(rho);
    let rows: Vec<String> = file.rho.iter().map(|r| format!("    {}", serde_json::to_string(r).expect("finite rows serialize"))).collect();
    format!("{{\n  \"d_prime\": {},\n  \"d\": {},\n  \"rho\": [\n{}\n  ]\n}}\n", file.d_prime, file.d, rows.join(",\n"))
}

/// Command report with `command`, `inputs`, `results`, `seed`, `version`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub seed: u64,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report { command: command.into(), inputs: Map::new(), results: Map::new(), seed }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.into(), v.into());
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }

    /// Rejects non-finite numbers, which JSON would silently turn into `null`.
    pub fn number(&mut self, key: &str, x: f64) -> Result<(), CliError> {
        if !x.is_finite() {
            return Err(CliError::Inconsistent(format!("result {key} is not finite ({x})")));
        }
        self.result(key, x);
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("inputs".into(), Value::Object(self.inputs.clone()));
        top.insert("results".into(), Value::Object(self.results.clone()));
        top.insert("seed".into(), Value::from(self.seed));
        top.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        Value::Object(top)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// One `key: value` line per result, matrices abbreviated.
    pub fn summary(&self) -> String {
        let mut out = format!("{}\n", self.command);
        for (k, v) in &self.results {
            let shown = match v {
                Value::Array(rows) => format!("[{} rows]", rows.len()),
                Value::Object(_) => "{…}".to_string(),
                other => other.to_string(),
            };
            out.push_str(&format!("  {k}: {shown}\n"));
        }
        out
    }
}
