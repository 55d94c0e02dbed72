//! Iterative reconstruction of a global state from its marginals:
//! alternate composite imposition with a rank-constrained spectral
//! projection until the total distance falls below the accuracy target.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::imposition::{check_self_consistency, impose_one, CONSISTENCY_TOL};
use crate::marginals::MarginalSet;
use crate::operator::{
    clamped_spectral_state, hermitian_eig, hermitian_eigenvalues, hs_distance_sq, DensityMatrix,
    HermitianOperator,
};
use crate::sampling::{sample_hs_state, RngStream};
use crate::scalar::Scalar;

/// Starting point of the iteration.
#[derive(Clone, Debug)]
pub enum SeedState<T: Scalar> {
    MaximallyMixed,
    /// Hilbert-Schmidt random state drawn from the config's stream; used
    /// for multi-start searches.
    RandomHs,
    Provided(DensityMatrix<T>),
}

#[derive(Clone, Debug)]
pub struct ReconstructionConfig<T: Scalar> {
    pub marginals: MarginalSet<T>,
    /// Target rank of the iterate; 1 searches for a pure state.
    pub rank: usize,
    /// Convergence threshold on the total distance.
    pub eps: T,
    pub max_iters: usize,
    /// Iterations without relative improvement of the best total distance
    /// before the run is declared stalled.
    pub stall_window: usize,
    pub seed_state: SeedState<T>,
    pub rng: RngStream,
}

impl<T: Scalar> ReconstructionConfig<T> {
    pub fn new(marginals: MarginalSet<T>, rank: usize) -> Self {
        Self {
            marginals,
            rank,
            eps: T::from_f64_lossy(1e-7),
            max_iters: 100_000,
            stall_window: 500,
            seed_state: SeedState::MaximallyMixed,
            rng: RngStream::new(0),
        }
    }
}

/// Distances after one iteration; `d_total` is the Euclidean combination of
/// the spectral and marginal parts.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub d_lambda: T,
    pub d_marginal: T,
    pub d_total: T,
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport<T: Scalar> {
    pub converged: bool,
    pub iterations: usize,
    pub final_state: DensityMatrix<T>,
    pub trace: Vec<TraceRow<T>>,
    pub stall_detected: bool,
    /// True when some projection hit the degenerate all-clamped case and
    /// substituted the uniform mixture of the top eigenvectors.
    pub projection_fallback: bool,
}

/// Keeps the top `r` eigenpairs, clamps retained negative eigenvalues to
/// zero and renormalizes to trace 1.
///
/// The flag is true when the retained trace was at most 1e-14 and the
/// uniform mixture of the top-`r` eigenvectors was substituted.
pub fn project_top_r<T: Scalar>(
    op: &HermitianOperator<T>,
    r: usize,
) -> Result<(DensityMatrix<T>, bool)> {
    if r == 0 || r > op.dim() {
        return Err(Error::BadRank {
            rank: r,
            dim: op.dim(),
        });
    }
    let eig = hermitian_eig(op)?;
    let (matrix, fallback) = clamped_spectral_state(&eig, r);
    Ok((
        DensityMatrix::new_unchecked(HermitianOperator::new_unchecked(
            op.shape().clone(),
            matrix,
        )),
        fallback,
    ))
}

/// Distance triple for one iteration: spectral weight beyond rank `r` of
/// the post-imposition operator, marginal mismatch of the current iterate,
/// and their Euclidean combination.
pub fn distances<T: Scalar>(
    rho1: &HermitianOperator<T>,
    rank: usize,
    marginals: &MarginalSet<T>,
    current: &DensityMatrix<T>,
) -> Result<(T, T, T)> {
    if rank == 0 || rank > rho1.dim() {
        return Err(Error::BadRank {
            rank,
            dim: rho1.dim(),
        });
    }
    let values = hermitian_eigenvalues(rho1)?;
    let d_lambda = discarded_weight(values.as_slice(), rank);
    let d_marginal = marginal_distance(current, marginals)?;
    Ok(combine(d_lambda, d_marginal))
}

/// `sqrt(sum of squared eigenvalues past the first r)`, eigenvalues sorted
/// descending.
fn discarded_weight<T: Scalar>(sorted_values: &[T], rank: usize) -> T {
    sorted_values[rank.min(sorted_values.len())..]
        .iter()
        .fold(T::zero(), |acc, &v| acc + v * v)
        .sqrt()
}

/// Root mean square of the squared Hilbert-Schmidt mismatches between the
/// iterate's reductions and the targets.
fn marginal_distance<T: Scalar>(
    current: &DensityMatrix<T>,
    marginals: &MarginalSet<T>,
) -> Result<T> {
    let m = marginals.len();
    let mut acc = T::zero();
    for entry in marginals.iter() {
        let reduced = current.partial_trace(&entry.subset)?;
        let mismatch = hs_distance_sq(&reduced, entry.state.as_operator())?;
        acc += mismatch * mismatch;
    }
    Ok((acc / T::from_f64_lossy(m as f64)).sqrt())
}

fn combine<T: Scalar>(d_lambda: T, d_marginal: T) -> (T, T, T) {
    (
        d_lambda,
        d_marginal,
        (d_lambda * d_lambda + d_marginal * d_marginal).sqrt(),
    )
}

/// Runs the alternating iteration until convergence, stall, or the
/// iteration budget runs out.
///
/// Hard-errors on mutually inconsistent marginals (the sequential
/// imposition would depend on list order) and on numeric breakdown, naming
/// the iteration.
pub fn run<T: Scalar>(config: &ReconstructionConfig<T>) -> Result<ReconstructionReport<T>>
where
    StandardNormal: Distribution<T>,
{
    let marginals = &config.marginals;
    let shape = marginals.shape().clone();
    let d = shape.total_dim();
    if config.rank == 0 || config.rank > d {
        return Err(Error::BadRank {
            rank: config.rank,
            dim: d,
        });
    }
    if !(config.eps > T::zero() && config.eps < T::one()) {
        return Err(Error::BadArgument {
            context: "reconstruction eps",
            requirement: "0 < eps < 1",
            got: format!("{:?}", config.eps.to_f64()),
        });
    }
    if marginals.is_empty() {
        return Err(Error::BadArgument {
            context: "reconstruction marginals",
            requirement: "at least one marginal",
            got: "an empty family".to_string(),
        });
    }
    let consistency = check_self_consistency(marginals, T::from_f64_lossy(CONSISTENCY_TOL));
    if !consistency.pass {
        let (first, second) = consistency.worst_pair.expect("failing report has a worst pair");
        let overlap = marginals.entries()[first]
            .subset
            .intersection(&marginals.entries()[second].subset);
        return Err(Error::InconsistentMarginals {
            first,
            second,
            parties: overlap.indices().to_vec(),
            distance: consistency.worst_distance.to_f64().unwrap_or(f64::NAN),
            tolerance: CONSISTENCY_TOL,
        });
    }

    let mut rho0 = match &config.seed_state {
        SeedState::MaximallyMixed => DensityMatrix::maximally_mixed(shape.clone()),
        SeedState::RandomHs => sample_hs_state(&shape, &config.rng),
        SeedState::Provided(state) => {
            if state.shape().dims() != shape.dims() {
                return Err(Error::ShapeMismatch {
                    context: "provided seed state",
                    expected: shape.dims().to_vec(),
                    got: state.shape().dims().to_vec(),
                });
            }
            state.clone()
        }
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut stall_detected = false;
    let mut projection_fallback = false;
    let mut iterations = 0;
    let mut best = T::max_value().unwrap_or_else(T::one);
    let mut last_improvement = 0usize;
    let relative_floor = T::from_f64_lossy(1e-12);

    for iteration in 1..=config.max_iters {
        iterations = iteration;
        let mut rho1 = rho0.as_operator().clone();
        for entry in marginals.iter() {
            rho1 = impose_one(&rho1, &entry.subset, &entry.state)?;
        }
        let eig = hermitian_eig(&rho1).map_err(|e| match e {
            Error::EigenFailure { .. } => Error::EigenFailure {
                iteration: Some(iteration),
            },
            other => other,
        })?;
        let d_lambda = discarded_weight(eig.values.as_slice(), config.rank);
        let (matrix, fallback) = clamped_spectral_state(&eig, config.rank);
        projection_fallback |= fallback;
        rho0 = DensityMatrix::new_unchecked(HermitianOperator::new_unchecked(
            shape.clone(),
            matrix,
        ));
        let d_marginal = marginal_distance(&rho0, marginals)?;
        let (d_lambda, d_marginal, d_total) = combine(d_lambda, d_marginal);
        trace.push(TraceRow {
            iteration,
            d_lambda,
            d_marginal,
            d_total,
        });
        if !d_total.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        if d_total < config.eps {
            converged = true;
            break;
        }
        if d_total < best * (T::one() - relative_floor) {
            best = d_total;
            last_improvement = iteration;
        } else if iteration - last_improvement >= config.stall_window {
            stall_detected = true;
            break;
        }
    }

    Ok(ReconstructionReport {
        converged,
        iterations,
        final_state: rho0,
        trace,
        stall_detected,
        projection_fallback,
    })
}
