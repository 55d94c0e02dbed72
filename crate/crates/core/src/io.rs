//! File formats: JSON for marginal sets, states, and plain Hermitian
//! operators, plus the CSV trace and table renderings used by the CLI.
//!
//! All numeric payloads are `f64`. JSON floats are written in shortest
//! round-trip decimal form, so save/load is lossless at double precision.

use std::fs;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::FractionResult;
use crate::marginals::MarginalSet;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::reconstruct::TraceRow;
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SystemShape};

/// Absolute tolerance for Hermiticity and trace checks on loaded files.
pub const FILE_TOL: f64 = 1e-8;

#[derive(Serialize, Deserialize)]
struct MarginalRecord {
    parties: Vec<usize>,
    /// Row-major, each entry `[re, im]`.
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct MarginalFileBody {
    dims: Vec<usize>,
    marginals: Vec<MarginalRecord>,
}

#[derive(Serialize, Deserialize)]
struct StateFileBody {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<'a, D: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<D> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn format_error(path: &Path, detail: String) -> Error {
    Error::FileFormat {
        path: path.to_path_buf(),
        detail,
    }
}

fn matrix_to_rows(matrix: &DMatrix<Complex<f64>>) -> Vec<Vec<[f64; 2]>> {
    (0..matrix.nrows())
        .map(|r| {
            (0..matrix.ncols())
                .map(|c| {
                    let z = matrix[(r, c)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

/// Parses a nested row-major array into a square matrix, checking shape,
/// finiteness, Hermiticity, and (optionally) unit trace at [`FILE_TOL`].
fn rows_to_matrix(
    path: &Path,
    label: &str,
    rows: &[Vec<[f64; 2]>],
    expected_dim: usize,
    require_unit_trace: bool,
) -> Result<DMatrix<Complex<f64>>> {
    let d = rows.len();
    if d != expected_dim || rows.iter().any(|row| row.len() != d) {
        return Err(format_error(
            path,
            format!("{label}: matrix must be {expected_dim}x{expected_dim}"),
        ));
    }
    let mut matrix = DMatrix::<Complex<f64>>::zeros(d, d);
    for (r, row) in rows.iter().enumerate() {
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(format_error(
                    path,
                    format!("{label}: non-finite entry at ({r}, {c})"),
                ));
            }
            matrix[(r, c)] = Complex::new(re, im);
        }
    }
    for r in 0..d {
        for c in r..d {
            let deviation = (matrix[(r, c)] - matrix[(c, r)].conj()).norm();
            if deviation > FILE_TOL {
                return Err(format_error(
                    path,
                    format!(
                        "{label}: not Hermitian at ({r}, {c}), deviation {deviation:.3e} exceeds {FILE_TOL:.0e}"
                    ),
                ));
            }
        }
    }
    if require_unit_trace {
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > FILE_TOL || trace.im.abs() > FILE_TOL {
            return Err(format_error(
                path,
                format!("{label}: trace {trace} is not 1 within {FILE_TOL:.0e}"),
            ));
        }
    }
    // Symmetrize so downstream exact-Hermiticity checks accept the data.
    let adjoint = matrix.adjoint();
    Ok((matrix + adjoint).scale(0.5))
}

/// Renormalizes an in-tolerance trace to exactly 1 and certifies a state.
///
/// The positivity tolerance scales with both the file tolerance and the
/// dimension, so data rounded at [`FILE_TOL`] still loads.
fn state_from_matrix(
    path: &Path,
    label: &str,
    shape: SystemShape,
    matrix: DMatrix<Complex<f64>>,
) -> Result<DensityMatrix<f64>> {
    let trace = matrix.trace().re;
    let normalized = matrix.scale(1.0 / trace);
    let op = HermitianOperator::new(shape, normalized)
        .map_err(|e| format_error(path, format!("{label}: {e}")))?;
    let psd_tol = FILE_TOL * op.dim() as f64;
    DensityMatrix::with_psd_tol(op, psd_tol).map_err(|e| format_error(path, format!("{label}: {e}")))
}

/// Loads a marginal set, rejecting malformed party lists, non-Hermitian
/// or wrongly normalized matrices, and duplicate party sets.
pub fn load_marginals(path: &Path) -> Result<MarginalSet<f64>> {
    let text = read_to_string(path)?;
    let body: MarginalFileBody = parse_json(path, &text)?;
    let shape = SystemShape::new(body.dims).map_err(|e| format_error(path, format!("dims: {e}")))?;
    let mut entries = Vec::with_capacity(body.marginals.len());
    for (index, record) in body.marginals.iter().enumerate() {
        let label = format!("marginals[{index}]");
        let subset = PartySubset::new(record.parties.clone())
            .map_err(|e| format_error(path, format!("{label}.parties: {e}")))?;
        let sub_shape = shape
            .sub_shape(&subset)
            .map_err(|e| format_error(path, format!("{label}.parties: {e}")))?;
        let matrix = rows_to_matrix(path, &label, &record.matrix, sub_shape.total_dim(), true)?;
        let state = state_from_matrix(path, &label, sub_shape, matrix)?;
        entries.push((subset, state));
    }
    MarginalSet::new(shape, entries).map_err(|e| format_error(path, e.to_string()))
}

pub fn save_marginals(path: &Path, marginals: &MarginalSet<f64>) -> Result<()> {
    let body = MarginalFileBody {
        dims: marginals.shape().dims().to_vec(),
        marginals: marginals
            .iter()
            .map(|entry| MarginalRecord {
                parties: entry.subset.indices().to_vec(),
                matrix: matrix_to_rows(entry.state.matrix()),
            })
            .collect(),
    };
    write_string(path, &to_pretty_json(&body))
}

/// Loads a density matrix (Hermitian, trace 1, positive within file
/// tolerance) on the full system shape recorded in the file.
pub fn load_state(path: &Path) -> Result<DensityMatrix<f64>> {
    let text = read_to_string(path)?;
    let body: StateFileBody = parse_json(path, &text)?;
    let shape = SystemShape::new(body.dims).map_err(|e| format_error(path, format!("dims: {e}")))?;
    let matrix = rows_to_matrix(path, "matrix", &body.matrix, shape.total_dim(), true)?;
    state_from_matrix(path, "matrix", shape, matrix)
}

pub fn save_state(path: &Path, state: &DensityMatrix<f64>) -> Result<()> {
    save_operator(path, state.as_operator())
}

/// Loads a Hermitian operator without trace or positivity requirements;
/// imposition output can fail both and still round-trip through files.
pub fn load_operator(path: &Path) -> Result<HermitianOperator<f64>> {
    let text = read_to_string(path)?;
    let body: StateFileBody = parse_json(path, &text)?;
    let shape = SystemShape::new(body.dims).map_err(|e| format_error(path, format!("dims: {e}")))?;
    let matrix = rows_to_matrix(path, "matrix", &body.matrix, shape.total_dim(), false)?;
    HermitianOperator::new(shape, matrix).map_err(|e| format_error(path, format!("matrix: {e}")))
}

pub fn save_operator(path: &Path, op: &HermitianOperator<f64>) -> Result<()> {
    let body = StateFileBody {
        dims: op.shape().dims().to_vec(),
        matrix: matrix_to_rows(op.matrix()),
    };
    write_string(path, &to_pretty_json(&body))
}

fn to_pretty_json<S: Serialize>(body: &S) -> String {
    let mut text = serde_json::to_string_pretty(body).expect("serialization cannot fail");
    text.push('\n');
    text
}

/// Writes convergence rows as `iter,D_lambda,D_M,D_T`, keeping every
/// `stride`-th row plus the final one.
pub fn write_trace_csv<W: std::io::Write, T: Scalar>(
    writer: &mut W,
    rows: &[TraceRow<T>],
    stride: usize,
) -> std::io::Result<()> {
    let stride = stride.max(1);
    writeln!(writer, "iter,D_lambda,D_M,D_T")?;
    for (i, row) in rows.iter().enumerate() {
        if i % stride == 0 || i + 1 == rows.len() {
            writeln!(
                writer,
                "{},{},{},{}",
                row.iteration,
                row.d_lambda.to_f64().unwrap_or(f64::NAN),
                row.d_marginal.to_f64().unwrap_or(f64::NAN),
                row.d_total.to_f64().unwrap_or(f64::NAN),
            )?;
        }
    }
    Ok(())
}

pub const FRACTION_CSV_HEADER: &str = "n,k,samples,successes,fraction,seed,seconds";

pub fn fraction_csv_row(result: &FractionResult) -> String {
    format!(
        "{},{},{},{},{},{},{:.3}",
        result.n,
        result.k,
        result.samples,
        result.successes,
        result.fraction,
        result.master_seed,
        result.wall_time,
    )
}

pub fn write_fraction_csv<W: std::io::Write>(
    writer: &mut W,
    results: &[FractionResult],
) -> std::io::Result<()> {
    writeln!(writer, "{FRACTION_CSV_HEADER}")?;
    for result in results {
        writeln!(writer, "{}", fraction_csv_row(result))?;
    }
    Ok(())
}

/// Renders fraction cells as a grid with one row per k and one column
/// per n, dashes where no cell was computed.
pub fn render_fraction_table(results: &[FractionResult]) -> String {
    let mut ns: Vec<usize> = results.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut ks: Vec<usize> = results.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut out = String::new();
    out.push_str("k\\n ");
    for n in &ns {
        out.push_str(&format!("{n:>7}"));
    }
    out.push('\n');
    for k in &ks {
        out.push_str(&format!("{k:<4}"));
        for n in &ns {
            match results.iter().find(|r| r.n == *n && r.k == *k) {
                Some(cell) => out.push_str(&format!("{:>7.3}", cell.fraction)),
                None => out.push_str(&format!("{:>7}", "-")),
            }
        }
        out.push('\n');
    }
    out
}
