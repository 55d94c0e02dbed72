//! Analytic feasibility: explicit imposition formulas for complete uniform
//! marginal families, the depolarization threshold with its positivity
//! bound, direct mixed-state reconstruction, and constraint counting.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::imposition::{check_self_consistency, impose_all, ConsistencyReport, CONSISTENCY_TOL};
use crate::marginals::MarginalSet;
use crate::operator::{
    clamped_spectral_state, hermitian_eig, DensityMatrix, HermitianOperator,
};
use crate::scalar::Scalar;
use crate::shape::PartySubset;

/// Evaluates the composite imposition at the maximally mixed state through
/// the known explicit expressions instead of sequential imposition.
///
/// Supported families of all `C(n,k)` k-body marginals:
/// - `k = 1`: `sum_i sigma_i - (n-1) I/d`
/// - `k = 2`: `sum_{ij} sigma_ij - (n-2) sum_i sigma_i + xi I/d` with
///   `xi = 1 + n^2/2 - 3n/2`
/// - `(n,k) = (5,3)`: 3-body sum `- 2` 2-body `+ 3` 1-body `- 4 I/d`
///
/// with every term embedded into the full space and lower-order reductions
/// traced down from the first listed marginal containing them (for
/// self-consistent families the choice is irrelevant). `I` denotes the
/// maximally mixed state `I/d`, which is the only normalization under which
/// each expression has trace 1.
pub fn analytic_uniform<T: Scalar>(marginals: &MarginalSet<T>) -> Result<HermitianOperator<T>> {
    let n = marginals.shape().num_sites();
    let k = marginals.is_complete_k_family().ok_or(Error::BadArgument {
        context: "analytic_uniform",
        requirement: "the complete family of all C(n,k) k-body marginals",
        got: "an incomplete or mixed-size family".to_string(),
    })?;
    // Coefficient on each level of reduction, plus the I/d offset.
    let nf = n as f64;
    let (level_coeffs, offset): (Vec<(usize, f64)>, f64) = match (n, k) {
        (_, 1) if n >= 2 => (vec![(1, 1.0)], -(nf - 1.0)),
        (_, 2) if n >= 3 => (
            vec![(2, 1.0), (1, -(nf - 2.0))],
            1.0 + nf * nf / 2.0 - 3.0 * nf / 2.0,
        ),
        (5, 3) => (vec![(3, 1.0), (2, -2.0), (1, 3.0)], -4.0),
        _ => {
            return Err(Error::BadArgument {
                context: "analytic_uniform",
                requirement: "k=1 (n>=2), k=2 (n>=3), or (n,k)=(5,3)",
                got: format!("n={n}, k={k}"),
            })
        }
    };

    let shape = marginals.shape().clone();
    let d = shape.total_dim();
    let mut acc = HermitianOperator::<T>::identity(shape.clone())
        .scale(T::from_f64_lossy(offset / d as f64))
        .into_matrix();
    for (level, coeff) in level_coeffs {
        for x in PartySubset::enumerate(n, level) {
            let source = marginals
                .iter()
                .find(|e| x.positions_in(&e.subset).is_some())
                .expect("complete k-family contains every smaller subset");
            let local = x.positions_in(&source.subset).unwrap();
            let sigma_x = source.state.partial_trace(&local)?;
            let map = crate::shape::SubsetMap::new(&shape, &x)?;
            crate::operator::embed_add_scaled(
                &mut acc,
                sigma_x.matrix(),
                &map,
                T::from_f64_lossy(coeff),
            );
        }
    }
    Ok(HermitianOperator::new_unchecked(shape, acc))
}

/// All distinct nonempty party sets realizable as intersections of the given
/// subsets (the subsets themselves included), in sorted order.
///
/// Computed as the closure under pairwise intersection, which reaches every
/// multi-way intersection without enumerating the `2^m` index subsets.
pub fn intersection_family(subsets: &[PartySubset]) -> Vec<PartySubset> {
    let mut family: BTreeSet<PartySubset> =
        subsets.iter().filter(|s| !s.is_empty()).cloned().collect();
    let mut grew = true;
    while grew {
        grew = false;
        let snapshot: Vec<PartySubset> = family.iter().cloned().collect();
        for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                let meet = snapshot[i].intersection(&snapshot[j]);
                if !meet.is_empty() && family.insert(meet) {
                    grew = true;
                }
            }
        }
    }
    family.into_iter().collect()
}

/// Depolarization strength above which the imposition of the depolarized
/// family at `I/d` is guaranteed positive semidefinite:
/// `eps* = max(0, 1 - 1/(|F|(d-1)))` where `|F|` counts the distinct
/// nonempty intersections realized by the family and `d` is the total
/// dimension.
pub fn epsilon_star<T: Scalar>(marginals: &MarginalSet<T>) -> T {
    let subsets: Vec<PartySubset> = marginals.subsets().cloned().collect();
    let family_size = intersection_family(&subsets).len();
    let d = marginals.shape().total_dim();
    let denom = family_size as f64 * (d as f64 - 1.0);
    if denom <= 1.0 {
        T::zero()
    } else {
        T::from_f64_lossy(1.0 - 1.0 / denom)
    }
}

/// Applies the depolarizing channel `(1-eps) sigma + eps I/d_J` to every
/// marginal, each with its own local dimension. Self-consistency is
/// preserved because partial trace is affine and maps `I/d_J` to `I/d_X`.
pub fn depolarize_set<T: Scalar>(marginals: &MarginalSet<T>, eps: T) -> Result<MarginalSet<T>> {
    if eps < T::zero() || eps > T::one() {
        return Err(Error::BadArgument {
            context: "depolarize_set",
            requirement: "0 <= eps <= 1",
            got: format!("{:?}", eps.to_f64()),
        });
    }
    let entries = marginals
        .iter()
        .map(|entry| {
            let d_j = entry.state.dim();
            let mixed = T::one() / T::from_f64_lossy(d_j as f64);
            let mut m = entry.state.matrix().scale(T::one() - eps);
            for i in 0..d_j {
                m[(i, i)] += num_complex::Complex::new(eps * mixed, T::zero());
            }
            let op = HermitianOperator::new_unchecked(entry.state.shape().clone(), m);
            (entry.subset.clone(), DensityMatrix::new_unchecked(op))
        })
        .collect();
    MarginalSet::new(marginals.shape().clone(), entries)
}

/// Outcome of imposing a marginal family on the maximally mixed state.
#[derive(Clone, Debug)]
pub struct MixedReconstruction<T: Scalar> {
    /// Smallest eigenvalue of the imposed operator.
    pub lambda_min: T,
    /// The certified state when `lambda_min >= -psd_tol`, `None` otherwise.
    pub state: Option<DensityMatrix<T>>,
    /// Pairwise consistency of the input family; an inconsistent family
    /// makes the result order-dependent but the evaluation proceeds.
    pub consistency: ConsistencyReport<T>,
}

impl<T: Scalar> MixedReconstruction<T> {
    pub fn is_success(&self) -> bool {
        self.state.is_some()
    }
}

/// Imposes the family on `I/d` and certifies positivity.
///
/// When the smallest eigenvalue of the result stays above `-psd_tol`, the
/// spectrum is clamped at zero, renormalized, and returned as a state that
/// carries every listed marginal (up to the clamped mass). A more negative
/// eigenvalue is reported as failure; nothing in it rules the family out,
/// it only means this particular candidate is not a state.
pub fn mixed_reconstruct<T: Scalar>(
    marginals: &MarginalSet<T>,
    psd_tol: T,
) -> Result<MixedReconstruction<T>> {
    let consistency = check_self_consistency(marginals, T::from_f64_lossy(CONSISTENCY_TOL));
    let mm = DensityMatrix::maximally_mixed(marginals.shape().clone());
    let imposed = impose_all(mm.as_operator(), marginals)?;
    let eig = hermitian_eig(&imposed)?;
    let lambda_min = eig.values[eig.values.len() - 1];
    let state = if lambda_min >= -psd_tol {
        let (matrix, _) = clamped_spectral_state(&eig, eig.values.len());
        Some(DensityMatrix::new_unchecked(HermitianOperator::new_unchecked(
            marginals.shape().clone(),
            matrix,
        )))
    } else {
        None
    };
    Ok(MixedReconstruction {
        lambda_min,
        state,
        consistency,
    })
}

/// Scalar constraint counts for the two formulations of the marginal
/// problem on `n` sites of dimension `d` with all `k`-body marginals:
/// `standard = d^{2k} C(n,k)` entrywise marginal equations versus
/// `compressed = d^{2n}` equations of the single fixed-point condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintCounts {
    pub standard: u128,
    pub compressed: u128,
    /// `standard - compressed`; positive means the compressed form wins.
    pub advantage: i128,
}

pub fn constraint_counts(n: usize, k: usize, local_dim: usize) -> Result<ConstraintCounts> {
    if k == 0 || k >= n {
        return Err(Error::BadArgument {
            context: "constraint_counts",
            requirement: "1 <= k < n",
            got: format!("n={n}, k={k}"),
        });
    }
    if local_dim < 2 {
        return Err(Error::BadLocalDimension {
            site: 0,
            dim: local_dim,
        });
    }
    let overflow = |_| Error::CountOverflow {
        context: "constraint_counts",
    };
    let d = local_dim as u128;
    let binom = binomial(n, k)?;
    let standard = checked_pow(d, 2 * k)
        .and_then(|p| p.checked_mul(binom))
        .ok_or(Error::CountOverflow {
            context: "constraint_counts",
        })?;
    let compressed = checked_pow(d, 2 * n).ok_or(Error::CountOverflow {
        context: "constraint_counts",
    })?;
    let advantage = i128::try_from(standard)
        .map_err(overflow)?
        .checked_sub(i128::try_from(compressed).map_err(overflow)?)
        .ok_or(Error::CountOverflow {
            context: "constraint_counts",
        })?;
    Ok(ConstraintCounts {
        standard,
        compressed,
        advantage,
    })
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Exact binomial coefficient; the running product is divisible at every
/// step.
fn binomial(n: usize, k: usize) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(Error::CountOverflow {
                context: "binomial",
            })?
            / i as u128;
    }
    Ok(acc)
}
