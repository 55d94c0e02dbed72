//! Batch experiments: Monte Carlo positivity fractions over random
//! generator states, searches for absolutely maximally entangled states,
//! and sweeps of the analytic imposition identities.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analytic::analytic_uniform;
#[cfg(test)]
use crate::analytic::mixed_reconstruct;
use crate::error::{Error, Result};
use crate::imposition::impose_all;
use crate::marginals::MarginalSet;
use crate::operator::{hermitian_eigenvalues, hs_distance_sq, DensityMatrix};
use crate::reconstruct::{run, ReconstructionConfig, ReconstructionReport, SeedState};
use crate::sampling::{marginals_of, sample_hs_state, RngStream};
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SystemShape};

/// Refuse dense Monte Carlo above this estimated working set.
const MEMORY_LIMIT_BYTES: u128 = 8 << 30;

/// Outcome of one Monte Carlo cell: how often the imposition of a random
/// generator's k-body marginals on `I/d` is itself a state.
#[derive(Clone, Copy, Debug)]
pub struct FractionResult {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub successes: usize,
    pub fraction: f64,
    pub psd_tol: f64,
    pub master_seed: u64,
    /// Seconds spent evaluating the cell.
    pub wall_time: f64,
}

/// The default success threshold on the smallest eigenvalue for an
/// `n`-qubit cell.
pub fn default_fraction_psd_tol(n: usize) -> f64 {
    1e-10 * (1u64 << n) as f64
}

/// Estimated bytes of dense working set for one sample at dimension `d`.
fn working_set_bytes(d: u128) -> u128 {
    // Generator, imposed operator, and roughly two matrices of
    // eigensolver scratch, all complex doubles.
    4 * d * d * 16
}

/// Runs one feasibility cell: `samples` Hilbert-Schmidt random generators
/// on `n` qubits, each reduced to all `C(n,k)` k-body marginals, counting
/// how often the imposition on `I/d` stays positive semidefinite within
/// `psd_tol`.
///
/// Samples draw from substreams of `stream`, so the count is reproducible
/// for a given seed regardless of thread schedule.
pub fn fraction_experiment<T: Scalar>(
    n: usize,
    k: usize,
    samples: usize,
    stream: &RngStream,
    psd_tol: T,
) -> Result<FractionResult>
where
    StandardNormal: Distribution<T>,
{
    if k == 0 || k >= n {
        return Err(Error::BadArgument {
            context: "fraction_experiment",
            requirement: "1 <= k < n",
            got: format!("n={n}, k={k}"),
        });
    }
    if samples == 0 {
        return Err(Error::BadArgument {
            context: "fraction_experiment",
            requirement: "samples >= 1",
            got: "0".to_string(),
        });
    }
    let estimate = working_set_bytes(1u128 << n);
    if estimate > MEMORY_LIMIT_BYTES {
        return Err(Error::SystemTooLarge {
            n,
            local_dim: 2,
            estimate_bytes: estimate,
            limit_bytes: MEMORY_LIMIT_BYTES,
        });
    }
    let shape = SystemShape::qubits(n)?;
    let subsets = PartySubset::enumerate(n, k);
    let started = Instant::now();
    let successes = (0..samples as u64)
        .into_par_iter()
        .filter(|&i| {
            let generator = sample_hs_state::<T>(&shape, &stream.substream(i));
            let marginals =
                marginals_of(&generator, &subsets).expect("subsets are valid for the shape");
            let mm = DensityMatrix::maximally_mixed(shape.clone());
            let imposed =
                impose_all(mm.as_operator(), &marginals).expect("shapes agree by construction");
            let values =
                hermitian_eigenvalues(&imposed).expect("imposition output stays finite");
            values[values.len() - 1] >= -psd_tol
        })
        .count();
    let wall_time = started.elapsed().as_secs_f64();
    Ok(FractionResult {
        n,
        k,
        samples,
        successes,
        fraction: successes as f64 / samples as f64,
        psd_tol: psd_tol.to_f64().unwrap_or(f64::NAN),
        master_seed: stream.master_seed(),
        wall_time,
    })
}

/// Knobs for [`ame_search`]; defaults match the reconstruction defaults
/// with a ten-thousand-iteration budget.
#[derive(Clone, Copy, Debug)]
pub struct AmeOptions<T: Scalar> {
    pub eps: T,
    pub max_iters: usize,
    pub stall_window: usize,
    /// Random restarts before giving up.
    pub attempts: usize,
    pub rng: RngStream,
}

impl<T: Scalar> Default for AmeOptions<T> {
    fn default() -> Self {
        Self {
            eps: T::from_f64_lossy(1e-7),
            max_iters: 10_000,
            stall_window: 500,
            attempts: 10,
            rng: RngStream::new(0),
        }
    }
}

/// Result of an AME search: the last reconstruction report plus the
/// entanglement certificate of its final state.
#[derive(Clone, Debug)]
pub struct AmeSearchResult<T: Scalar> {
    pub report: ReconstructionReport<T>,
    pub attempts_used: usize,
    pub purity: T,
    /// Largest squared Hilbert-Schmidt gap between a half-size reduction
    /// and the maximally mixed state.
    pub worst_marginal_gap: T,
    /// Converged, pure within `10*eps`, and every half-size reduction
    /// maximally mixed within `10*eps`.
    pub certified: bool,
}

/// Searches for a pure state of `n` parties of dimension `local_dim` whose
/// `k`-body reductions are all maximally mixed, restarting from fresh
/// random seeds until one attempt converges.
pub fn ame_search<T: Scalar>(
    n: usize,
    local_dim: usize,
    k: usize,
    options: &AmeOptions<T>,
) -> Result<AmeSearchResult<T>>
where
    StandardNormal: Distribution<T>,
{
    if options.attempts == 0 {
        return Err(Error::BadArgument {
            context: "ame_search",
            requirement: "at least one attempt",
            got: "0".to_string(),
        });
    }
    let shape = SystemShape::uniform(n, local_dim)?;
    let marginals = MarginalSet::uniform_mixed(shape.clone(), k)?;
    let mut last: Option<(ReconstructionReport<T>, usize)> = None;
    for attempt in 0..options.attempts {
        let config = ReconstructionConfig {
            marginals: marginals.clone(),
            rank: 1,
            eps: options.eps,
            max_iters: options.max_iters,
            stall_window: options.stall_window,
            seed_state: SeedState::RandomHs,
            rng: options.rng.substream(attempt as u64),
        };
        let report = run(&config)?;
        let converged = report.converged;
        last = Some((report, attempt + 1));
        if converged {
            break;
        }
    }
    let (report, attempts_used) = last.expect("at least one attempt ran");
    let state = &report.final_state;
    let purity = state.purity();
    let half = (n / 2).max(1);
    let mut worst_gap = T::zero();
    for subset in PartySubset::enumerate(n, half) {
        let reduced = state.partial_trace_state(&subset)?;
        let mm = DensityMatrix::maximally_mixed(reduced.shape().clone());
        let gap = hs_distance_sq(reduced.as_operator(), mm.as_operator())?;
        worst_gap = worst_gap.max(gap);
    }
    let slack = options.eps * T::from_f64_lossy(10.0);
    let certified = report.converged && purity > T::one() - slack && worst_gap < slack;
    Ok(AmeSearchResult {
        report,
        attempts_used,
        purity,
        worst_marginal_gap: worst_gap,
        certified,
    })
}

/// One verified identity instance.
#[derive(Clone, Copy, Debug)]
pub struct IdentityCheck {
    pub n: usize,
    pub k: usize,
    /// Coefficient of `I/d` in the two-body expression, `None` otherwise.
    pub xi: Option<f64>,
    /// Hilbert-Schmidt norm between the explicit formula and sequential
    /// imposition at `I/d`.
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    pub max_deviation: f64,
}

/// Checks every known explicit imposition formula against sequential
/// imposition on random generator marginals: one-body families for
/// `n = 2..=max_n`, two-body for `n = 3..=max_n`, and the five-qubit
/// three-body expression once `max_n >= 5`.
pub fn verify_identities<T: Scalar>(max_n: usize, stream: &RngStream) -> Result<IdentityReport>
where
    StandardNormal: Distribution<T>,
{
    if !(2..=6).contains(&max_n) {
        return Err(Error::BadArgument {
            context: "verify_identities",
            requirement: "2 <= max_n <= 6",
            got: max_n.to_string(),
        });
    }
    let mut cases: Vec<(usize, usize)> = (2..=max_n).map(|n| (n, 1)).collect();
    cases.extend((3..=max_n).map(|n| (n, 2)));
    if max_n >= 5 {
        cases.push((5, 3));
    }
    let mut checks = Vec::with_capacity(cases.len());
    let mut max_deviation = 0.0f64;
    for (index, (n, k)) in cases.into_iter().enumerate() {
        let shape = SystemShape::qubits(n)?;
        let generator = sample_hs_state::<T>(&shape, &stream.substream(index as u64));
        let marginals = marginals_of(&generator, &PartySubset::enumerate(n, k))?;
        let explicit = analytic_uniform(&marginals)?;
        let mm = DensityMatrix::maximally_mixed(shape);
        let sequential = impose_all(mm.as_operator(), &marginals)?;
        let deviation = hs_distance_sq(&explicit, &sequential)?
            .sqrt()
            .to_f64()
            .unwrap_or(f64::NAN);
        let xi = (k == 2).then(|| {
            let nf = n as f64;
            1.0 + nf * nf / 2.0 - 3.0 * nf / 2.0
        });
        max_deviation = max_deviation.max(deviation);
        checks.push(IdentityCheck { n, k, xi, deviation });
    }
    Ok(IdentityReport {
        checks,
        max_deviation,
    })
}

/// Spot check for fraction cells: every success means the imposed operator
/// certifies as a state whose listed marginals match the generator's.
#[cfg(test)]
fn success_state_carries_marginals(n: usize, k: usize, stream: &RngStream) -> bool {
    let shape = SystemShape::qubits(n).unwrap();
    let generator = sample_hs_state::<f64>(&shape, stream);
    let marginals = marginals_of(&generator, &PartySubset::enumerate(n, k)).unwrap();
    let outcome = mixed_reconstruct(&marginals, default_fraction_psd_tol(n)).unwrap();
    match outcome.state {
        None => true,
        Some(state) => marginals.iter().all(|entry| {
            let reduced = state.partial_trace_state(&entry.subset).unwrap();
            hs_distance_sq(reduced.as_operator(), entry.state.as_operator()).unwrap() < 1e-8
        }),
    }
}
