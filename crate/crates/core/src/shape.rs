//! Multipartite system shapes and subsets of parties.
//!
//! Index convention: site 0 is the most significant digit. The row index of a
//! basis state is the mixed-radix number with digits ordered by site, so for
//! dims `[2, 3]` the basis order is `|00>, |01>, |02>, |10>, |11>, |12>`.
//! Sub-systems inherit the same rule with parties in increasing order.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local dimensions of a multipartite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    dims: Vec<usize>,
    total: usize,
}

impl SystemShape {
    /// A system with the given local dimensions, each at least 2.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let mut total: usize = 1;
        for (site, &dim) in dims.iter().enumerate() {
            if dim < 2 {
                return Err(Error::BadLocalDimension { site, dim });
            }
            total = total
                .checked_mul(dim)
                .ok_or_else(|| Error::DimensionOverflow { dims: dims.clone() })?;
        }
        Ok(Self { dims, total })
    }

    /// `n` sites of equal dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    /// Product of all local dimensions.
    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Shape of the subsystem on `subset`, sites kept in increasing order.
    ///
    /// The subset must be valid for this shape. An empty subset yields the
    /// zero-site shape with total dimension 1.
    pub fn sub_shape(&self, subset: &PartySubset) -> Result<Self> {
        subset.check_range(self.num_sites())?;
        let dims: Vec<usize> = subset.iter().map(|s| self.dims[s]).collect();
        // Sub-products of a non-overflowing product cannot overflow.
        let total = dims.iter().product();
        Ok(Self { dims, total })
    }

    /// Row strides per site under the most-significant-first convention.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut strides = vec![1usize; n];
        for site in (0..n.saturating_sub(1)).rev() {
            strides[site] = strides[site + 1] * self.dims[site + 1];
        }
        strides
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.dims)
    }
}

/// A set of party indices, stored strictly increasing. May be empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartySubset {
    indices: Vec<usize>,
}

impl PartySubset {
    /// Builds a subset from strictly increasing indices.
    pub fn new(indices: impl Into<Vec<usize>>) -> Result<Self> {
        let indices = indices.into();
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedParties { indices });
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    /// All parties of an `n`-site system.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Errors if any index is `>= n_sites`.
    pub fn check_range(&self, n_sites: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= n_sites => Err(Error::PartyOutOfRange {
                index: last,
                n_sites,
            }),
            _ => Ok(()),
        }
    }

    /// Parties of an `n`-site system not in this subset.
    pub fn complement(&self, n_sites: usize) -> Self {
        let mut indices = Vec::with_capacity(n_sites - self.indices.len().min(n_sites));
        let mut held = self.indices.iter().peekable();
        for site in 0..n_sites {
            if held.peek() == Some(&&site) {
                held.next();
            } else {
                indices.push(site);
            }
        }
        Self { indices }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut indices = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    indices.push(self.indices[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { indices }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    /// Positions of `self`'s sites within `superset`'s ordering, or `None`
    /// if `self` is not contained in `superset`.
    ///
    /// Used to address a sub-marginal inside a marginal's own local basis.
    pub fn positions_in(&self, superset: &Self) -> Option<Self> {
        let mut positions = Vec::with_capacity(self.indices.len());
        for &site in &self.indices {
            match superset.indices.binary_search(&site) {
                Ok(pos) => positions.push(pos),
                Err(_) => return None,
            }
        }
        Some(Self { indices: positions })
    }

    /// All `k`-element subsets of `0..n` in lexicographic order.
    pub fn enumerate(n: usize, k: usize) -> Vec<Self> {
        (0..n)
            .combinations(k)
            .map(|indices| Self { indices })
            .collect()
    }
}

impl fmt::Display for PartySubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices)
    }
}

/// Precomputed row offsets splitting a full index into a kept part and a
/// complement part: `full = keep_offsets[a] + comp_offsets[b]`.
///
/// Every partial trace and embedding runs through this table, which is what
/// keeps those operations at one multiply-free add per matrix entry.
pub(crate) struct SubsetMap {
    pub keep_offsets: Vec<usize>,
    pub comp_offsets: Vec<usize>,
}

impl SubsetMap {
    pub fn new(shape: &SystemShape, keep: &PartySubset) -> Result<Self> {
        keep.check_range(shape.num_sites())?;
        let strides = shape.strides();
        let comp = keep.complement(shape.num_sites());
        Ok(Self {
            keep_offsets: offsets_for(shape, &strides, keep),
            comp_offsets: offsets_for(shape, &strides, &comp),
        })
    }
}

/// Row offsets of all basis states of the subsystem on `sites`, enumerated in
/// the subsystem's own basis order.
fn offsets_for(shape: &SystemShape, strides: &[usize], sites: &PartySubset) -> Vec<usize> {
    let dims: Vec<usize> = sites.iter().map(|s| shape.dim(s)).collect();
    let size: usize = dims.iter().product();
    let mut offsets = Vec::with_capacity(size);
    let mut digits = vec![0usize; dims.len()];
    let mut current = 0usize;
    offsets.push(current);
    for _ in 1..size {
        // Odometer increment, least significant digit last.
        for pos in (0..dims.len()).rev() {
            let stride = strides[sites.indices()[pos]];
            if digits[pos] + 1 < dims[pos] {
                digits[pos] += 1;
                current += stride;
                break;
            }
            current -= digits[pos] * stride;
            digits[pos] = 0;
        }
        offsets.push(current);
    }
    offsets
}
