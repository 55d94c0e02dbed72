//! Reproducible random generator states.
//!
//! Randomness flows through [`RngStream`], a (master seed, stream id) pair
//! mapped onto a counter-based generator. Monte Carlo drivers derive one
//! stream per sample, which makes results independent of evaluation order
//! and thread schedule.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::marginals::MarginalSet;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SystemShape};

/// Addressable random stream: the same (master_seed, stream_id) always
/// yields the same byte sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for sample `index`. Derivation is flat: children are
    /// offsets past the parent's id, so a driver should derive all its
    /// streams from one parent rather than nesting derivations.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: self.stream_id.wrapping_add(1).wrapping_add(index),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn complex_normals<T: Scalar>(rng: &mut ChaCha8Rng, count: usize) -> Vec<Complex<T>>
where
    StandardNormal: Distribution<T>,
{
    // Explicit draw order (re, im per entry) keeps streams stable across
    // matrix-library internals.
    (0..count)
        .map(|_| {
            let re = rng.sample(StandardNormal);
            let im = rng.sample(StandardNormal);
            Complex::new(re, im)
        })
        .collect()
}

/// Hilbert-Schmidt-measure mixed state: `G G^H / Tr[G G^H]` for a square
/// Ginibre matrix `G`. Full rank with probability 1.
pub fn sample_hs_state<T: Scalar>(shape: &SystemShape, stream: &RngStream) -> DensityMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let d = shape.total_dim();
    let mut rng = stream.rng();
    // Same (re, im) draw order as `complex_normals`, kept as two real
    // factors: for G = A + iB the Gram matrix is
    // G G^H = (A A^T + B B^T) + i (B A^T - A B^T), four real products on
    // the fast matmul path instead of one slow complex product.
    let mut re = Vec::with_capacity(d * d);
    let mut im = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        re.push(rng.sample(StandardNormal));
        im.push(rng.sample(StandardNormal));
    }
    let a = DMatrix::<T>::from_vec(d, d, re);
    let b = DMatrix::<T>::from_vec(d, d, im);
    let at = a.transpose();
    let bt = b.transpose();
    let sym = &a * &at + &b * &bt;
    let skew = &b * &at - &a * &bt;
    let trace: T = (0..d).fold(T::zero(), |acc, i| acc + sym[(i, i)]);
    let inv = T::one() / trace;
    let matrix =
        DMatrix::from_fn(d, d, |r, c| Complex::new(sym[(r, c)] * inv, skew[(r, c)] * inv));
    DensityMatrix::new_unchecked(HermitianOperator::new_unchecked(shape.clone(), matrix))
}

/// Haar-random pure state `v v^H` from a normalized complex Gaussian vector.
pub fn sample_haar_pure<T: Scalar>(shape: &SystemShape, stream: &RngStream) -> DensityMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let d = shape.total_dim();
    let mut rng = stream.rng();
    let mut v = complex_normals::<T>(&mut rng, d);
    let norm_sq = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let inv = T::one() / norm_sq.sqrt();
    for z in &mut v {
        *z = *z * inv;
    }
    let mut matrix = DMatrix::zeros(d, d);
    for (j, zj) in v.iter().enumerate() {
        for (i, zi) in v.iter().enumerate() {
            matrix[(i, j)] = zi * zj.conj();
        }
    }
    DensityMatrix::new_unchecked(HermitianOperator::new_unchecked(shape.clone(), matrix))
}

/// The marginal family of `state` on the given subsets, in the given order.
pub fn marginals_of<T: Scalar>(
    state: &DensityMatrix<T>,
    subsets: &[PartySubset],
) -> Result<MarginalSet<T>> {
    let entries = subsets
        .iter()
        .map(|subset| Ok((subset.clone(), state.partial_trace_state(subset)?)))
        .collect::<Result<Vec<_>>>()?;
    MarginalSet::new(state.shape().clone(), entries)
}
