//! Experiment configuration files and the objects built from them.

use std::fs;
use std::path::{Path, PathBuf};

use kwh_core::gabor::{self, frame_operator, lattice_shifts, AtomMatrix, FrameOperatorMatrix, GaborSystem};
use kwh_core::numerics::{ComplexMatrix, DEFAULT_RANK_THRESHOLD};
use kwh_core::operators::{fourier_diagonal_pair, modulation_op, translation_op, BoundedOperator, GridSpec, Signal};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid sizes `[N_1, …, N_d]`.
    pub grid: Vec<usize>,
    pub window: WindowSpec,
    pub frequencies: FrequencySpec,
    pub shifts: ShiftSpec,
    pub k: OperatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<TransformSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Block on which the exponential lower bound `A₀` is computed; defaults
    /// to the bounding block of the window support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_window: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowSpec {
    Indicator {
        lengths: Vec<usize>,
        #[serde(default = "one")]
        height: f64,
    },
    Gaussian {
        center: Vec<f64>,
        width: Vec<f64>,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencySpec {
    /// Product of the per-axis integer ranges `[start_j, end_j)`.
    IntegerRange { start: Vec<i64>, end: Vec<i64> },
    Explicit { values: Vec<Vec<f64>> },
    /// Multiples `k·step_j` in `[0, N_j)` on every axis.
    LatticeStep { step: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftSpec {
    /// Integer lattice generated by the columns of `matrix` (rows listed).
    Generator { matrix: Vec<Vec<i64>> },
    Explicit { values: Vec<Vec<i64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Translation { shift: Vec<i64> },
    Modulation { frequency: Vec<f64> },
    /// `F D F*` with a seeded random diagonal `D`.
    FourierDiagonal { seed: u64 },
    MatrixCsv { path: PathBuf },
    Identity,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub operator: OperatorSpec,
    /// For `fourier_diagonal`, draw a unit-modulus spectrum; otherwise assert
    /// that the operator is unitary.
    #[serde(default)]
    pub unitary: bool,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rank_threshold")]
    pub rank_threshold: f64,
    #[serde(default = "default_tol")]
    pub psd_tol: f64,
    #[serde(default = "default_tol")]
    pub verdict_tol: f64,
}

fn default_rank_threshold() -> f64 {
    DEFAULT_RANK_THRESHOLD
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_threshold: default_rank_threshold(),
            psd_tol: default_tol(),
            verdict_tol: default_tol(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub rank_threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.tol {
            self.tolerances.psd_tol = t;
            self.tolerances.verdict_tol = t;
        }
        if let Some(r) = o.rank_threshold {
            self.tolerances.rank_threshold = r;
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Everything a check needs, built and validated from a config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub grid: GridSpec,
    pub system: GaborSystem,
    pub atoms: AtomMatrix,
    pub frame_operator: FrameOperatorMatrix,
    pub k: BoundedOperator,
    pub u: Option<BoundedOperator>,
    pub exp_window: Vec<usize>,
}

impl Experiment {
    /// Relative paths in `config` are resolved against `base`.
    pub fn build(config: ExperimentConfig, base: &Path) -> Result<Self> {
        let t = &config.tolerances;
        if !(t.rank_threshold > 0.0 && t.rank_threshold < 1.0) {
            return Err(CliError::Config(format!("rank_threshold {} not in (0, 1)", t.rank_threshold)));
        }
        if !(t.psd_tol >= 0.0 && t.verdict_tol >= 0.0) {
            return Err(CliError::Config("tolerances must be nonnegative".into()));
        }
        let grid = GridSpec::new(config.grid.clone())?;
        let window = build_window(&config.window, &grid, base)?;
        let frequencies = build_frequencies(&config.frequencies, &grid)?;
        let shifts = match &config.shifts {
            ShiftSpec::Generator { matrix } => lattice_shifts(matrix, &grid)?,
            ShiftSpec::Explicit { values } => values.clone(),
        };
        let system = GaborSystem::new(window, frequencies, shifts)?;
        let atoms = gabor::atoms(&system);
        let frame_operator = frame_operator(&atoms);
        let k = build_operator(&config.k, &grid, base, false)?;
        let u = match &config.u {
            None => None,
            Some(spec) => {
                let op = build_operator(&spec.operator, &grid, base, spec.unitary)?;
                if !spec.scale.is_finite() || spec.scale == 0.0 {
                    return Err(CliError::Config(format!("u.scale must be finite and nonzero, got {}", spec.scale)));
                }
                let op = op.scaled(Complex64::new(spec.scale, 0.0));
                if spec.unitary && !op.is_unitary() {
                    return Err(CliError::Config("u is declared unitary but is not".into()));
                }
                Some(op)
            }
        };
        let exp_window = match &config.exp_window {
            Some(w) => {
                grid.check_dim(w.len())?;
                if w.iter().zip(grid.sizes()).any(|(&l, &n)| l == 0 || l > n) {
                    return Err(CliError::Config(format!("exp_window {w:?} does not fit the grid")));
                }
                w.clone()
            }
            None => gabor::support_extent(system.window()),
        };
        Ok(Self {
            config,
            grid,
            system,
            atoms,
            frame_operator,
            k,
            u,
            exp_window,
        })
    }

    pub fn from_path(path: &Path, overrides: &Overrides) -> Result<Self> {
        let mut config = ExperimentConfig::load(path)?;
        config.apply(overrides);
        Self::build(config, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn tolerances(&self) -> Tolerances {
        self.config.tolerances
    }
}

fn build_window(spec: &WindowSpec, grid: &GridSpec, base: &Path) -> Result<Signal> {
    Ok(match spec {
        WindowSpec::Indicator { lengths, height } => Signal::indicator_block(grid, lengths, *height)?,
        WindowSpec::Gaussian { center, width } => Signal::gaussian(grid, center, width)?,
        WindowSpec::Csv { path } => {
            let values = read_signal_csv(&base.join(path))?;
            if values.len() != grid.total() {
                return Err(CliError::Config(format!(
                    "window csv has {} entries, grid has {}",
                    values.len(),
                    grid.total()
                )));
            }
            Signal::new(grid.clone(), values)?
        }
    })
}

fn build_frequencies(spec: &FrequencySpec, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let axes: Vec<Vec<f64>> = match spec {
        FrequencySpec::Explicit { values } => return Ok(values.clone()),
        FrequencySpec::IntegerRange { start, end } => {
            grid.check_dim(start.len())?;
            grid.check_dim(end.len())?;
            start.iter().zip(end).map(|(&a, &b)| (a..b).map(|x| x as f64).collect()).collect()
        }
        FrequencySpec::LatticeStep { step } => {
            grid.check_dim(step.len())?;
            if step.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(CliError::Config("lattice steps must be positive".into()));
            }
            step.iter()
                .zip(grid.sizes())
                .map(|(&s, &n)| {
                    (0..)
                        .map(|k| k as f64 * s)
                        .take_while(|&x| x < n as f64)
                        .collect()
                })
                .collect()
        }
    };
    let mut out = vec![vec![]];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

fn build_operator(spec: &OperatorSpec, grid: &GridSpec, base: &Path, unitary: bool) -> Result<BoundedOperator> {
    Ok(match spec {
        OperatorSpec::Translation { shift } => translation_op(grid, shift)?,
        OperatorSpec::Modulation { frequency } => modulation_op(grid, frequency)?,
        OperatorSpec::FourierDiagonal { seed } => {
            let (k, u) = fourier_diagonal_pair(grid, *seed, unitary);
            if unitary {
                u
            } else {
                k
            }
        }
        OperatorSpec::MatrixCsv { path } => {
            let n = grid.total();
            BoundedOperator::from_matrix(grid, read_matrix_csv(&base.join(path), n)?)?
        }
        OperatorSpec::Identity => BoundedOperator::identity(grid),
        OperatorSpec::Zero => BoundedOperator::zero(grid),
    })
}

fn csv_records(path: &Path, width: usize) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if rec.len() != width {
            return Err(CliError::Config(format!(
                "{}: line {} has {} fields, expected {width}",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    // An optional header is recognised by its first field not being numeric.
    if rows.first().is_some_and(|r: &Vec<String>| r[0].parse::<f64>().is_err()) {
        rows.remove(0);
    }
    Ok(rows)
}

fn number<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| CliError::Config(format!("{}: line {line}: cannot parse `{field}`", path.display())))
}

/// One `re,im` pair per line.
pub fn read_signal_csv(path: &Path) -> Result<Vec<Complex64>> {
    csv_records(path, 2)?
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(Complex64::new(number(path, i + 1, &r[0])?, number(path, i + 1, &r[1])?)))
        .collect()
}

/// Sparse `row,col,re,im` triplets of an `n × n` matrix; repeated entries add.
pub fn read_matrix_csv(path: &Path, n: usize) -> Result<ComplexMatrix> {
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, r) in csv_records(path, 4)?.iter().enumerate() {
        let row: usize = number(path, i + 1, &r[0])?;
        let col: usize = number(path, i + 1, &r[1])?;
        if row >= n || col >= n {
            return Err(CliError::Config(format!(
                "{}: line {}: index ({row}, {col}) outside {n}x{n}",
                path.display(),
                i + 1
            )));
        }
        entries[row * n + col] += Complex64::new(number(path, i + 1, &r[2])?, number(path, i + 1, &r[3])?);
    }
    ComplexMatrix::from_row_major(n, n, entries).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
