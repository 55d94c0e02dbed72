//! Marginal imposition operators.
//!
//! `impose_one` overwrites a single reduction of an operator while leaving
//! every disjoint observable untouched; `impose_all` composes impositions
//! sequentially; `closed_form` evaluates the same composite map as an
//! explicit alternating sum over intersections of the imposed subsets. The
//! two evaluation routes are independent and agree for arbitrary (even
//! mutually inconsistent) marginal families, which the tests exploit.

use crate::error::{Error, Result};
use crate::marginals::MarginalSet;
use crate::operator::{embed_add_scaled, hs_distance_sq, HermitianOperator};
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SubsetMap};
use crate::DensityMatrix;

/// Largest marginal count accepted by [`closed_form`]; the expansion has
/// `2^m - 1` terms, so sequential [`impose_all`] is the production path.
pub const CLOSED_FORM_LIMIT: usize = 20;

/// Default tolerance on the squared Hilbert-Schmidt mismatch between two
/// reductions of overlapping marginals.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Replaces the reduction of `rho` on `subset` by `sigma`.
///
/// The result is `rho - rho_J + sigma_J` with both small operators extended
/// by maximally mixed complements. Trace-1 inputs keep trace 1; reductions
/// onto sets disjoint from `subset` are unchanged.
pub fn impose_one<T: Scalar>(
    rho: &HermitianOperator<T>,
    subset: &PartySubset,
    sigma: &DensityMatrix<T>,
) -> Result<HermitianOperator<T>> {
    let sub = rho.shape().sub_shape(subset)?;
    if sigma.shape().dims() != sub.dims() {
        return Err(Error::ShapeMismatch {
            context: "impose_one marginal",
            expected: sub.dims().to_vec(),
            got: sigma.shape().dims().to_vec(),
        });
    }
    let reduced = rho.partial_trace(subset)?;
    let delta = sigma.matrix() - reduced.matrix();
    let map = SubsetMap::new(rho.shape(), subset)?;
    let mut acc = rho.matrix().clone();
    embed_add_scaled(&mut acc, &delta, &map, T::one());
    Ok(HermitianOperator::new_unchecked(rho.shape().clone(), acc))
}

/// Sequential imposition of every marginal in list order (first entry
/// applied first).
pub fn impose_all<T: Scalar>(
    rho: &HermitianOperator<T>,
    marginals: &MarginalSet<T>,
) -> Result<HermitianOperator<T>> {
    check_set_shape(rho, marginals)?;
    let mut state = rho.clone();
    for entry in marginals.iter() {
        state = impose_one(&state, &entry.subset, &entry.state)?;
    }
    Ok(state)
}

/// Sequential imposition in an explicit order; `order[0]` is applied first.
///
/// For self-consistent families every order gives the same result; for
/// inconsistent ones the last-imposed marginal wins on overlaps.
pub fn impose_all_ordered<T: Scalar>(
    rho: &HermitianOperator<T>,
    marginals: &MarginalSet<T>,
    order: &[usize],
) -> Result<HermitianOperator<T>> {
    check_set_shape(rho, marginals)?;
    let m = marginals.len();
    let mut seen = vec![false; m];
    for &i in order {
        if i >= m || seen[i] {
            return Err(Error::BadImpositionOrder {
                order: order.to_vec(),
                len: m,
            });
        }
        seen[i] = true;
    }
    if order.len() != m {
        return Err(Error::BadImpositionOrder {
            order: order.to_vec(),
            len: m,
        });
    }
    let entries = marginals.entries();
    let mut state = rho.clone();
    for &i in order {
        state = impose_one(&state, &entries[i].subset, &entries[i].state)?;
    }
    Ok(state)
}

/// One term of the closed-form expansion: the formal index subset `S`, the
/// party intersection it induces, and the sign `(-1)^|S|`.
///
/// Coinciding party sets arising from different `S` stay separate terms;
/// the alternating sum is over formal index subsets, not over party sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionTerm {
    pub index_subset: Vec<usize>,
    pub parties: PartySubset,
    pub sign: i8,
}

/// Enumerates all `2^m - 1` nonempty index subsets with their party
/// intersections, in increasing bitmask order.
pub fn intersection_terms(
    subsets: &[PartySubset],
    limit: usize,
) -> Result<Vec<IntersectionTerm>> {
    let m = subsets.len();
    if m > limit {
        return Err(Error::ClosedFormTooLarge {
            count: m,
            terms: (1u128 << m) - 1,
            limit,
        });
    }
    let mut terms = Vec::with_capacity((1usize << m) - 1);
    for mask in 1u64..(1u64 << m) {
        let index_subset: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let mut parties = subsets[index_subset[0]].clone();
        for &i in &index_subset[1..] {
            parties = parties.intersection(&subsets[i]);
        }
        let sign = if index_subset.len() % 2 == 1 { -1 } else { 1 };
        terms.push(IntersectionTerm {
            index_subset,
            parties,
            sign,
        });
    }
    Ok(terms)
}

/// Closed-form evaluation of the composite imposition map:
/// `rho + sum over nonempty S of (-1)^|S| (rho_X - sigma_X)` with
/// `X = intersection of the subsets indexed by S`.
///
/// Equals [`impose_all`] in list order for arbitrary marginals. Terms with
/// empty intersection are skipped: there both reductions embed to `I/d` and
/// cancel exactly. `sigma_X` is obtained by tracing the lowest-indexed
/// involved marginal down to `X`; for self-consistent families the choice
/// does not matter, and `check_self_consistency` guards that assumption.
///
/// Cost grows as `2^m`, so this is a verification tool for small families;
/// use [`impose_all`] for production evaluation.
pub fn closed_form<T: Scalar>(
    rho: &HermitianOperator<T>,
    marginals: &MarginalSet<T>,
) -> Result<HermitianOperator<T>> {
    check_set_shape(rho, marginals)?;
    let subsets: Vec<PartySubset> = marginals.subsets().cloned().collect();
    let terms = intersection_terms(&subsets, CLOSED_FORM_LIMIT)?;
    let entries = marginals.entries();
    let mut acc = rho.matrix().clone();
    for term in &terms {
        if term.parties.is_empty() {
            continue;
        }
        let rho_x = rho.partial_trace(&term.parties)?;
        let lowest = term.index_subset[0];
        let local = term
            .parties
            .positions_in(&entries[lowest].subset)
            .expect("intersection is contained in every involved subset");
        let sigma_x = entries[lowest].state.partial_trace(&local)?;
        let delta = rho_x.matrix() - sigma_x.matrix();
        let sign = if term.sign < 0 { -T::one() } else { T::one() };
        let map = SubsetMap::new(rho.shape(), &term.parties)?;
        embed_add_scaled(&mut acc, &delta, &map, sign);
    }
    Ok(HermitianOperator::new_unchecked(rho.shape().clone(), acc))
}

/// Mismatch of one overlapping pair: the squared Hilbert-Schmidt distance
/// between the two reductions onto the shared parties.
#[derive(Clone, Debug)]
pub struct PairConsistency<T: Scalar> {
    pub pair: (usize, usize),
    pub overlap: PartySubset,
    pub distance: T,
}

/// Result of pairwise self-consistency checking.
#[derive(Clone, Debug)]
pub struct ConsistencyReport<T: Scalar> {
    pub pass: bool,
    pub tol: T,
    /// Worst overlapping pair, `None` when all pairs are disjoint.
    pub worst_pair: Option<(usize, usize)>,
    /// Squared Hilbert-Schmidt mismatch of the worst pair, 0 if none.
    pub worst_distance: T,
    /// One row per overlapping pair; disjoint pairs pass vacuously.
    pub per_pair: Vec<PairConsistency<T>>,
}

/// Compares the two reductions onto every pairwise overlap.
///
/// `tol` bounds the squared Hilbert-Schmidt mismatch; the report passes
/// when the worst overlapping pair is within `tol`.
pub fn check_self_consistency<T: Scalar>(
    marginals: &MarginalSet<T>,
    tol: T,
) -> ConsistencyReport<T> {
    let entries = marginals.entries();
    let mut per_pair = Vec::new();
    let mut worst: Option<(usize, usize, T)> = None;
    for i in 0..entries.len() {
        for j in (i + 1)..entries.len() {
            let overlap = entries[i].subset.intersection(&entries[j].subset);
            if overlap.is_empty() {
                continue;
            }
            let local_i = overlap
                .positions_in(&entries[i].subset)
                .expect("overlap is contained in both subsets");
            let local_j = overlap
                .positions_in(&entries[j].subset)
                .expect("overlap is contained in both subsets");
            let red_i = entries[i]
                .state
                .partial_trace(&local_i)
                .expect("overlap positions are valid");
            let red_j = entries[j]
                .state
                .partial_trace(&local_j)
                .expect("overlap positions are valid");
            let distance =
                hs_distance_sq(&red_i, &red_j).expect("reductions share the overlap shape");
            if worst.is_none_or(|(_, _, w)| distance > w) {
                worst = Some((i, j, distance));
            }
            per_pair.push(PairConsistency {
                pair: (i, j),
                overlap,
                distance,
            });
        }
    }
    let (worst_pair, worst_distance) = match worst {
        Some((i, j, w)) => (Some((i, j)), w),
        None => (None, T::zero()),
    };
    ConsistencyReport {
        pass: worst_distance <= tol,
        tol,
        worst_pair,
        worst_distance,
        per_pair,
    }
}

/// `sqrt(Tr[(Q(rho) - rho)^2])`: zero exactly when `rho` already carries
/// every listed marginal.
pub fn fixed_point_residual<T: Scalar>(
    rho: &HermitianOperator<T>,
    marginals: &MarginalSet<T>,
) -> Result<T> {
    let imposed = impose_all(rho, marginals)?;
    Ok(hs_distance_sq(&imposed, rho)?.sqrt())
}

fn check_set_shape<T: Scalar>(
    rho: &HermitianOperator<T>,
    marginals: &MarginalSet<T>,
) -> Result<()> {
    if rho.shape() != marginals.shape() {
        return Err(Error::ShapeMismatch {
            context: "imposition target",
            expected: marginals.shape().dims().to_vec(),
            got: rho.shape().dims().to_vec(),
        });
    }
    Ok(())
}
