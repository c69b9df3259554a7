//! Fragmentation of the PXP model into disconnected Krylov sectors.
//!
//! Starting from the unvisited basis state with the smallest index, a
//! breadth-first search over allowed PXP flips collects one equivalence
//! class; this repeats until every state is assigned. Classes come out sorted
//! by their representative, which is the smallest index they contain.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::basis::{cdea_value, magnetization_of, pxp_neighbors, BasisState};
use crate::error::{Error, Result};

/// Largest chain enumerated exhaustively.
pub const MAX_ENUMERATION_SITES: usize = 24;

/// One fragment of the Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    members: Vec<BasisState>,
    cdea: u64,
    magnetization_sum: i64,
}

impl EquivalenceClass {
    /// Builds a class from its members, checking that they share one CDEA
    /// value.
    pub fn from_members(mut members: Vec<BasisState>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        let first = *members.first().ok_or(Error::InvalidParameter {
            field: "members",
            reason: "empty class".into(),
        })?;
        let cdea = cdea_value(first);
        for &m in &members[1..] {
            let other = cdea_value(m);
            if other != cdea {
                return Err(Error::InconsistentClass { first: cdea, other });
            }
        }
        let magnetization_sum = members.iter().map(|&m| magnetization_of(m)).sum();
        Ok(Self { members, cdea, magnetization_sum })
    }

    /// Members in increasing index order.
    pub fn members(&self) -> &[BasisState] {
        &self.members
    }

    pub fn representative(&self) -> BasisState {
        self.members[0]
    }

    pub fn dimension(&self) -> usize {
        self.members.len()
    }

    pub fn cdea(&self) -> u64 {
        self.cdea
    }

    /// Stationary purity `1/d`.
    pub fn p_stationary(&self) -> Ratio<i64> {
        Ratio::new(1, self.members.len() as i64)
    }

    /// Class-averaged magnetization.
    pub fn m_stationary(&self) -> Ratio<i64> {
        Ratio::new(self.magnetization_sum, self.members.len() as i64)
    }

    pub fn is_frozen(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains(&self, state: BasisState) -> bool {
        self.members.binary_search(&state).is_ok()
    }
}

/// `(P, M, ⟨𝒜⟩)` of the fragment's maximally mixed state.
pub fn class_observables(class: &EquivalenceClass) -> Result<(Ratio<i64>, Ratio<i64>, u64)> {
    let cdea = cdea_value(class.representative());
    if let Some(&bad) = class.members().iter().find(|&&m| cdea_value(m) != cdea) {
        return Err(Error::InconsistentClass { first: cdea, other: cdea_value(bad) });
    }
    Ok((class.p_stationary(), class.m_stationary(), cdea))
}

/// All equivalence classes of an `len`-site chain, sorted by representative.
pub fn enumerate_classes(len: usize) -> Result<Vec<EquivalenceClass>> {
    if len == 0 || len > MAX_ENUMERATION_SITES {
        return Err(Error::InvalidParameter {
            field: "length",
            reason: alloc::format!("must be between 1 and {MAX_ENUMERATION_SITES}, got {len}"),
        });
    }
    let dim = 1usize << len;
    let mut visited = vec![false; dim];
    let mut classes = Vec::new();
    let mut queue = VecDeque::new();
    for start in BasisState::all(len)? {
        if visited[start.index() as usize] {
            continue;
        }
        visited[start.index() as usize] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(s) = queue.pop_front() {
            members.push(s);
            for n in pxp_neighbors(s) {
                let seen = &mut visited[n.index() as usize];
                if !*seen {
                    *seen = true;
                    queue.push_back(n);
                }
            }
        }
        classes.push(EquivalenceClass::from_members(members)?);
    }
    Ok(classes)
}

/// Whether `classes` are pairwise disjoint and cover all `2^len` states.
pub fn verify_partition(classes: &[EquivalenceClass], len: usize) -> bool {
    if len == 0 || len > MAX_ENUMERATION_SITES {
        return false;
    }
    let dim = 1usize << len;
    let mut seen = vec![false; dim];
    let mut total = 0usize;
    for class in classes {
        for m in class.members() {
            if m.len() != len || seen[m.index() as usize] {
                return false;
            }
            seen[m.index() as usize] = true;
            total += 1;
        }
    }
    total == dim
}
