//! Families of target marginals indexed by party subsets.

use crate::error::{Error, Result};
use crate::operator::DensityMatrix;
use crate::scalar::Scalar;
use crate::shape::{PartySubset, SystemShape};

/// One target reduction: a state on the sub-shape of `subset`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalEntry<T: Scalar> {
    pub subset: PartySubset,
    pub state: DensityMatrix<T>,
}

/// An ordered family of marginals on a common full-system shape.
///
/// Order matters for sequential imposition of mutually inconsistent
/// families; self-consistent families behave the same in any order.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSet<T: Scalar> {
    shape: SystemShape,
    entries: Vec<MarginalEntry<T>>,
}

impl<T: Scalar> MarginalSet<T> {
    /// Validates that every subset is nonempty, in range, and unique, and
    /// that every state lives on the matching sub-shape.
    pub fn new(
        shape: SystemShape,
        entries: Vec<(PartySubset, DensityMatrix<T>)>,
    ) -> Result<Self> {
        for (index, (subset, state)) in entries.iter().enumerate() {
            if subset.is_empty() {
                return Err(Error::EmptyMarginal { index });
            }
            let sub = shape.sub_shape(subset)?;
            if state.shape().dims() != sub.dims() {
                return Err(Error::ShapeMismatch {
                    context: "marginal state",
                    expected: sub.dims().to_vec(),
                    got: state.shape().dims().to_vec(),
                });
            }
        }
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                if entries[i].0 == entries[j].0 {
                    return Err(Error::DuplicateSubset {
                        first: i,
                        second: j,
                        parties: entries[i].0.indices().to_vec(),
                    });
                }
            }
        }
        Ok(Self {
            shape,
            entries: entries
                .into_iter()
                .map(|(subset, state)| MarginalEntry { subset, state })
                .collect(),
        })
    }

    /// All `C(n,k)` k-body marginals fixed to the maximally mixed state.
    pub fn uniform_mixed(shape: SystemShape, k: usize) -> Result<Self> {
        let n = shape.num_sites();
        if k == 0 || k > n {
            return Err(Error::BadArgument {
                context: "uniform_mixed",
                requirement: "1 <= k <= num_sites",
                got: format!("k={k}, n={n}"),
            });
        }
        let entries = PartySubset::enumerate(n, k)
            .into_iter()
            .map(|subset| {
                let sub = shape.sub_shape(&subset)?;
                Ok((subset, DensityMatrix::maximally_mixed(sub)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, entries)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn entries(&self) -> &[MarginalEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn subsets(&self) -> impl Iterator<Item = &PartySubset> {
        self.entries.iter().map(|e| &e.subset)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MarginalEntry<T>> {
        self.entries.iter()
    }

    /// True when the family contains every k-subset for a single k.
    pub fn is_complete_k_family(&self) -> Option<usize> {
        let first = self.entries.first()?;
        let k = first.subset.len();
        let n = self.shape.num_sites();
        let expected = PartySubset::enumerate(n, k);
        if expected.len() != self.entries.len() {
            return None;
        }
        let mut seen: Vec<&PartySubset> = self.subsets().collect();
        seen.sort();
        if seen.iter().map(|s| (*s).clone()).eq(expected) {
            Some(k)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_shapes() {
        let shape = SystemShape::qubits(3).unwrap();
        let sub01 = PartySubset::new(vec![0, 1]).unwrap();
        let mm2 = DensityMatrix::<f64>::maximally_mixed(SystemShape::qubits(2).unwrap());
        let err = MarginalSet::new(
            shape.clone(),
            vec![
                (sub01.clone(), mm2.clone()),
                (sub01.clone(), mm2.clone()),
            ],
        );
        assert!(matches!(err, Err(Error::DuplicateSubset { first: 0, second: 1, .. })));

        let mm1 = DensityMatrix::<f64>::maximally_mixed(SystemShape::qubits(1).unwrap());
        let err = MarginalSet::new(shape.clone(), vec![(sub01, mm1)]);
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));

        let err = MarginalSet::new(shape, vec![(PartySubset::empty(), mm2)]);
        assert!(matches!(err, Err(Error::EmptyMarginal { index: 0 })));
    }

    #[test]
    fn complete_family_detection() {
        let shape = SystemShape::qubits(4).unwrap();
        let set = MarginalSet::<f64>::uniform_mixed(shape.clone(), 2).unwrap();
        assert_eq!(set.len(), 6);
        assert_eq!(set.is_complete_k_family(), Some(2));

        let partial = MarginalSet::new(
            shape.clone(),
            set.entries()[..5]
                .iter()
                .map(|e| (e.subset.clone(), e.state.clone()))
                .collect(),
        )
        .unwrap();
        assert_eq!(partial.is_complete_k_family(), None);
    }

    #[test]
    fn heterogeneous_marginal_shapes_enforced() {
        let shape = SystemShape::new(vec![2, 3]).unwrap();
        let set = MarginalSet::<f64>::uniform_mixed(shape, 1).unwrap();
        assert_eq!(set.entries()[0].state.dim(), 2);
        assert_eq!(set.entries()[1].state.dim(), 3);
    }
}
