//! Dense Hermitian operators and density matrices on multipartite registers.
//!
//! Everything downstream (imposition, reconstruction, Monte Carlo) reduces to
//! four primitives defined here: partial trace, identity embedding, Hermitian
//! eigendecomposition, and the squared Hilbert-Schmidt distance
//! `Tr[(A-B)^2]`. All storage is dense; target dimensions (up to a few
//! thousand) fit dense eigensolvers comfortably.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SubsetMap, SystemShape};

/// Allowed Hermiticity deviation, relative to the largest entry modulus.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Default PSD tolerance per unit of total dimension.
pub const PSD_TOL_PER_DIM: f64 = 1e-10;

/// A Hermitian operator on the full Hilbert space of a [`SystemShape`].
///
/// The constructor validates Hermiticity and then stores the symmetrized
/// matrix `(M + M^H)/2`, so the stored data is Hermitian to the last bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Scalar> {
    shape: SystemShape,
    matrix: DMatrix<Complex<T>>,
}

impl<T: Scalar> HermitianOperator<T> {
    pub fn new(shape: SystemShape, matrix: DMatrix<Complex<T>>) -> Result<Self> {
        let d = shape.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::MatrixSizeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: d,
            });
        }
        let mut max_abs = T::zero();
        for j in 0..d {
            for i in 0..d {
                let z = matrix[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
                max_abs = max_abs.max(complex_abs(z));
            }
        }
        let tol = T::from_f64_lossy(HERMITICITY_TOL) * max_abs;
        for j in 0..d {
            for i in 0..=j {
                let dev = complex_abs(matrix[(i, j)] - matrix[(j, i)].conj());
                if dev > tol {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation: dev.to_f64().unwrap_or(f64::NAN),
                        tolerance: tol.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(Self::new_unchecked(shape, symmetrized(matrix)))
    }

    /// Skips validation; callers guarantee Hermiticity by construction.
    pub(crate) fn new_unchecked(shape: SystemShape, matrix: DMatrix<Complex<T>>) -> Self {
        Self { shape, matrix }
    }

    /// The identity operator (trace = total dimension).
    pub fn identity(shape: SystemShape) -> Self {
        let d = shape.total_dim();
        Self::new_unchecked(shape, DMatrix::identity(d, d))
    }

    pub fn zero(shape: SystemShape) -> Self {
        let d = shape.total_dim();
        Self::new_unchecked(shape, DMatrix::zeros(d, d))
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.shape.total_dim()
    }

    pub fn trace(&self) -> T {
        let mut sum = T::zero();
        for i in 0..self.matrix.nrows() {
            sum += self.matrix[(i, i)].re;
        }
        sum
    }

    /// `self + other`, shapes must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "operator addition")?;
        Ok(Self::new_unchecked(
            self.shape.clone(),
            &self.matrix + &other.matrix,
        ))
    }

    /// `self - other`, shapes must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "operator subtraction")?;
        Ok(Self::new_unchecked(
            self.shape.clone(),
            &self.matrix - &other.matrix,
        ))
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::new_unchecked(
            self.shape.clone(),
            self.matrix.map(|z| z * Complex::new(factor, T::zero())),
        )
    }

    /// Reduction onto `keep`: sums out every site not in `keep`.
    ///
    /// The result lives on the sub-shape of `keep` (sites in increasing
    /// order). `keep` may be empty (yielding the 1x1 trace) or full (a copy).
    pub fn partial_trace(&self, keep: &PartySubset) -> Result<Self> {
        let sub = self.shape.sub_shape(keep)?;
        let map = SubsetMap::new(&self.shape, keep)?;
        let dk = sub.total_dim();
        let d = self.matrix.nrows();
        let src = self.matrix.as_slice();
        let mut out = DMatrix::zeros(dk, dk);
        for a2 in 0..dk {
            let col = map.keep_offsets[a2];
            for a1 in 0..dk {
                let row = map.keep_offsets[a1];
                let mut acc = Complex::new(T::zero(), T::zero());
                for &b in &map.comp_offsets {
                    acc += src[(row + b) + (col + b) * d];
                }
                out[(a1, a2)] = acc;
            }
        }
        Ok(Self::new_unchecked(sub, out))
    }

    /// Tensor-extends `self` (living on the sub-shape of `at` in `full`) by
    /// the normalized identity on the complement, permuted into site order.
    ///
    /// Trace is preserved: the complement factor is `I/d_comp`.
    pub fn embed(&self, full: &SystemShape, at: &PartySubset) -> Result<Self> {
        let expected = full.sub_shape(at)?;
        if expected.dims() != self.shape.dims() {
            return Err(Error::ShapeMismatch {
                context: "embed",
                expected: expected.dims().to_vec(),
                got: self.shape.dims().to_vec(),
            });
        }
        let map = SubsetMap::new(full, at)?;
        let d = full.total_dim();
        let mut out = DMatrix::zeros(d, d);
        embed_add_scaled(&mut out, &self.matrix, &map, T::one());
        Ok(Self::new_unchecked(full.clone(), out))
    }

    pub(crate) fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.shape.dims().to_vec(),
                got: other.shape.dims().to_vec(),
            });
        }
        Ok(())
    }
}

/// Adds `alpha * (small ⊗ I/d_comp)` onto `acc` in place.
///
/// `map` must come from the shape of `acc` and the subset `small` lives on.
pub(crate) fn embed_add_scaled<T: Scalar>(
    acc: &mut DMatrix<Complex<T>>,
    small: &DMatrix<Complex<T>>,
    map: &SubsetMap,
    alpha: T,
) {
    let weight = alpha / T::from_f64_lossy(map.comp_offsets.len() as f64);
    let d = acc.nrows();
    let dk = small.nrows();
    let dst = acc.as_mut_slice();
    for a2 in 0..dk {
        let col = map.keep_offsets[a2];
        for a1 in 0..dk {
            let row = map.keep_offsets[a1];
            let v = small[(a1, a2)] * weight;
            for &b in &map.comp_offsets {
                dst[(row + b) + (col + b) * d] += v;
            }
        }
    }
}

fn symmetrized<T: Scalar>(matrix: DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let half = Complex::new(T::from_f64_lossy(0.5), T::zero());
    let adj = matrix.adjoint();
    (matrix + adj) * half
}

pub(crate) fn complex_abs<T: Scalar>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Scalar> {
    /// Real eigenvalues, sorted descending.
    pub values: DVector<T>,
    /// Orthonormal eigenvectors, column `i` matching `values[i]`.
    pub vectors: DMatrix<Complex<T>>,
}

/// Full eigendecomposition with eigenvalues sorted descending.
///
/// The matrix is re-symmetrized first to absorb floating-point drift from
/// operator arithmetic.
pub fn hermitian_eig<T: Scalar>(op: &HermitianOperator<T>) -> Result<EigenDecomposition<T>> {
    let se = symmetrized(op.matrix().clone()).symmetric_eigen();
    if se.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { iteration: None });
    }
    let d = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("finite eigenvalues compare")
    });
    let values = DVector::from_iterator(d, order.iter().map(|&i| se.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, sorted descending. Cheaper than [`hermitian_eig`] when
/// eigenvectors are not needed (positivity checks in Monte Carlo loops).
pub fn hermitian_eigenvalues<T: Scalar>(op: &HermitianOperator<T>) -> Result<DVector<T>> {
    let values = symmetrized(op.matrix().clone()).symmetric_eigenvalues();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { iteration: None });
    }
    let mut sorted: Vec<T> = values.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues compare"));
    Ok(DVector::from_vec(sorted))
}

/// Squared Hilbert-Schmidt distance `Tr[(A-B)^2]`.
///
/// For Hermitian arguments this equals the squared Frobenius norm of the
/// difference, which is how it is computed; the result is never negative.
pub fn hs_distance_sq<T: Scalar>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<T> {
    a.check_same_shape(b, "hs_distance_sq")?;
    let mut sum = T::zero();
    for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
        sum += (x - y).norm_sqr();
    }
    Ok(sum)
}

/// Synthesizes the state obtained by keeping the top `r` eigenpairs of a
/// decomposition, clamping retained negative eigenvalues to zero and
/// renormalizing to trace 1.
///
/// Returns the matrix and a flag that is true when the retained trace was
/// at most 1e-14 and the uniform mixture of the top-`r` eigenvectors was
/// substituted (rescaling is ill-defined there).
pub(crate) fn clamped_spectral_state<T: Scalar>(
    eig: &EigenDecomposition<T>,
    r: usize,
) -> (DMatrix<Complex<T>>, bool) {
    let mut kept: Vec<T> = eig.values.iter().take(r).map(|&v| v.max(T::zero())).collect();
    let total = kept.iter().fold(T::zero(), |acc, &v| acc + v);
    let fallback = total <= T::from_f64_lossy(1e-14);
    if fallback {
        let uniform = T::one() / T::from_f64_lossy(r as f64);
        kept = vec![uniform; r];
    } else {
        for v in &mut kept {
            *v /= total;
        }
    }
    let d = eig.vectors.nrows();
    let mut out = DMatrix::zeros(d, d);
    for (i, &v) in kept.iter().enumerate() {
        if v > T::zero() {
            let col = eig.vectors.column(i);
            out += col * col.adjoint() * Complex::new(v, T::zero());
        }
    }
    (out, fallback)
}

/// A trace-1 positive semidefinite [`HermitianOperator`].
///
/// Construction certifies trace and spectrum; operations that are PSD by
/// construction (partial traces of states, spectral projections) bypass the
/// eigendecomposition internally.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    op: HermitianOperator<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Certifies `op` as a state with the default PSD tolerance
    /// `1e-10 * total_dim` on the smallest eigenvalue.
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        let tol = T::from_f64_lossy(PSD_TOL_PER_DIM * op.dim() as f64);
        Self::with_psd_tol(op, tol)
    }

    pub fn with_psd_tol(op: HermitianOperator<T>, psd_tol: T) -> Result<Self> {
        let trace = op.trace();
        let trace_tol = T::from_f64_lossy(TRACE_TOL);
        if ComplexField::abs(trace - T::one()) > trace_tol {
            return Err(Error::TraceNotOne {
                trace: trace.to_f64().unwrap_or(f64::NAN),
                tolerance: TRACE_TOL,
            });
        }
        let values = hermitian_eigenvalues(&op)?;
        let lambda_min = values[values.len() - 1];
        if lambda_min < -psd_tol {
            return Err(Error::NotPositive {
                lambda_min: lambda_min.to_f64().unwrap_or(f64::NAN),
                tolerance: psd_tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { op })
    }

    /// Callers guarantee trace 1 and positivity by construction.
    pub(crate) fn new_unchecked(op: HermitianOperator<T>) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let d = shape.total_dim();
        let op = HermitianOperator::identity(shape).scale(T::one() / T::from_f64_lossy(d as f64));
        Self { op }
    }

    pub fn as_operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator<T> {
        self.op
    }

    /// `Tr[rho^2]`, 1 exactly for pure states, `1/d` for maximally mixed.
    pub fn purity(&self) -> T {
        let mut sum = T::zero();
        for z in self.op.matrix().iter() {
            sum += z.norm_sqr();
        }
        sum
    }

    /// Reduction onto `keep`; PSD and trace-1 by construction.
    pub fn partial_trace_state(&self, keep: &PartySubset) -> Result<Self> {
        Ok(Self::new_unchecked(self.op.partial_trace(keep)?))
    }
}

impl<T: Scalar> std::ops::Deref for DensityMatrix<T> {
    type Target = HermitianOperator<T>;

    fn deref(&self) -> &Self::Target {
        &self.op
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{PartySubset, SystemShape};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Independent qubit-only partial trace working directly on bit masks,
    /// sharing no index machinery with the production path.
    fn naive_qubit_partial_trace(
        m: &DMatrix<Complex<f64>>,
        n: usize,
        keep: &[usize],
    ) -> DMatrix<Complex<f64>> {
        let dk = 1usize << keep.len();
        let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        let dt = 1usize << traced.len();
        // Site s occupies bit n-1-s: site 0 is most significant.
        let place = |sites: &[usize], value: usize| -> usize {
            let mut row = 0;
            for (pos, &site) in sites.iter().enumerate() {
                let bit = (value >> (sites.len() - 1 - pos)) & 1;
                row |= bit << (n - 1 - site);
            }
            row
        };
        DMatrix::from_fn(dk, dk, |a1, a2| {
            (0..dt)
                .map(|b| {
                    let r = place(keep, a1) + place(&traced, b);
                    let cidx = place(keep, a2) + place(&traced, b);
                    m[(r, cidx)]
                })
                .sum()
        })
    }

    fn ghz3() -> HermitianOperator<f64> {
        let mut m = DMatrix::zeros(8, 8);
        for &(i, j) in &[(0, 0), (0, 7), (7, 0), (7, 7)] {
            m[(i, j)] = c(0.5, 0.0);
        }
        HermitianOperator::new(SystemShape::qubits(3).unwrap(), m).unwrap()
    }

    fn random_hermitian(shape: &SystemShape, seed: u64) -> HermitianOperator<f64> {
        // Deterministic pseudo-random entries; quality is irrelevant here.
        let d = shape.total_dim();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = c(next(), 0.0);
            for j in (i + 1)..d {
                let z = c(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianOperator::new(shape.clone(), m).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let shape = SystemShape::qubits(1).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianOperator::new(shape, m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let shape = SystemShape::qubits(1).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(f64::NAN, 0.0); 4]);
        assert!(matches!(
            HermitianOperator::new(shape, m),
            Err(Error::NonFiniteEntry { .. })
        ));
    }

    #[test]
    fn ghz_two_body_marginal() {
        // Tracing any qubit out of GHZ_3 leaves (|00><00| + |11><11|)/2.
        let ghz = ghz3();
        for keep in [[0, 1], [0, 2], [1, 2]] {
            let sub = PartySubset::new(keep.to_vec()).unwrap();
            let red = ghz.partial_trace(&sub).unwrap();
            let mut want = DMatrix::zeros(4, 4);
            want[(0, 0)] = c(0.5, 0.0);
            want[(3, 3)] = c(0.5, 0.0);
            assert_relative_eq!(
                (red.matrix() - &want).norm(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn partial_trace_matches_naive_qubit_path() {
        let shape = SystemShape::qubits(4).unwrap();
        let op = random_hermitian(&shape, 7);
        for keep in [vec![0], vec![2], vec![0, 3], vec![1, 2], vec![0, 1, 3]] {
            let sub = PartySubset::new(keep.clone()).unwrap();
            let fast = op.partial_trace(&sub).unwrap();
            let slow = naive_qubit_partial_trace(op.matrix(), 4, &keep);
            assert_relative_eq!((fast.matrix() - &slow).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_linearity() {
        let shape = SystemShape::new(vec![2, 3, 2]).unwrap();
        let a = random_hermitian(&shape, 1);
        let b = random_hermitian(&shape, 2);
        let keep = PartySubset::new(vec![1]).unwrap();
        let lhs = a
            .scale(0.3)
            .add(&b.scale(0.7))
            .unwrap()
            .partial_trace(&keep)
            .unwrap();
        let rhs = a
            .partial_trace(&keep)
            .unwrap()
            .scale(0.3)
            .add(&b.partial_trace(&keep).unwrap().scale(0.7))
            .unwrap();
        assert_relative_eq!((lhs.matrix() - rhs.matrix()).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(a.partial_trace(&keep).unwrap().trace(), a.trace(), epsilon = 1e-12);
    }

    #[test]
    fn embed_round_trip_non_contiguous() {
        let full = SystemShape::qubits(3).unwrap();
        let at = PartySubset::new(vec![0, 2]).unwrap();
        let sigma = random_hermitian(&full.sub_shape(&at).unwrap(), 3);
        let embedded = sigma.embed(&full, &at).unwrap();
        assert_relative_eq!(embedded.trace(), sigma.trace(), epsilon = 1e-13);
        let back = embedded.partial_trace(&at).unwrap();
        assert_relative_eq!((back.matrix() - sigma.matrix()).norm(), 0.0, epsilon = 1e-12);
        // Disjoint reduction of an embedded operator sees only the identity.
        let disjoint = PartySubset::new(vec![1]).unwrap();
        let other = embedded.partial_trace(&disjoint).unwrap();
        let want = DMatrix::identity(2, 2) * c(sigma.trace() / 2.0, 0.0);
        assert_relative_eq!((other.matrix() - &want).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_reconstructs_input() {
        let shape = SystemShape::qubits(3).unwrap();
        let op = random_hermitian(&shape, 11);
        let eig = hermitian_eig(&op).unwrap();
        let d = op.dim();
        let mut rebuilt = DMatrix::zeros(d, d);
        for i in 0..d {
            let v = eig.vectors.column(i);
            rebuilt += v * v.adjoint() * c(eig.values[i], 0.0);
        }
        assert_relative_eq!((op.matrix() - &rebuilt).norm(), 0.0, epsilon = 1e-12);
        // Sorted descending, orthonormal columns, trace = sum of eigenvalues.
        assert!(eig.values.iter().zip(eig.values.iter().skip(1)).all(|(a, b)| a >= b));
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert_relative_eq!((gram - DMatrix::identity(d, d)).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(eig.values.sum(), op.trace(), epsilon = 1e-10);
        let only = hermitian_eigenvalues(&op).unwrap();
        assert_relative_eq!((only - eig.values).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn hs_distance_of_orthogonal_pure_states() {
        // D(|0><0|, |1><1|) = Tr[(|0><0| - |1><1|)^2] = 2.
        let shape = SystemShape::qubits(1).unwrap();
        let mut zero = DMatrix::zeros(2, 2);
        zero[(0, 0)] = c(1.0, 0.0);
        let mut one = DMatrix::zeros(2, 2);
        one[(1, 1)] = c(1.0, 0.0);
        let a = HermitianOperator::new(shape.clone(), zero).unwrap();
        let b = HermitianOperator::new(shape, one).unwrap();
        assert_relative_eq!(hs_distance_sq(&a, &b).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(hs_distance_sq(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_certification() {
        let shape = SystemShape::qubits(2).unwrap();
        let mm = DensityMatrix::<f64>::maximally_mixed(shape.clone());
        assert_relative_eq!(mm.trace(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(mm.purity(), 0.25, epsilon = 1e-15);

        let wrong_trace = HermitianOperator::<f64>::identity(shape.clone());
        assert!(matches!(
            DensityMatrix::new(wrong_trace),
            Err(Error::TraceNotOne { .. })
        ));

        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        let indefinite = HermitianOperator::new(shape, m).unwrap();
        assert!(matches!(
            DensityMatrix::new(indefinite),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn ghz_is_a_valid_state() {
        let state = DensityMatrix::new(ghz3()).unwrap();
        assert_relative_eq!(state.purity(), 1.0, epsilon = 1e-12);
        let single = state
            .partial_trace_state(&PartySubset::new(vec![1]).unwrap())
            .unwrap();
        assert_relative_eq!(single.purity(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn generic_scalar_compiles_at_f32() {
        let shape = SystemShape::qubits(1).unwrap();
        let mm = DensityMatrix::<f32>::maximally_mixed(shape);
        assert!((mm.purity() - 0.5).abs() < 1e-6);
        let eig = hermitian_eig(mm.as_operator()).unwrap();
        assert!((eig.values[0] - 0.5).abs() < 1e-6);
    }
}
