//! Computational basis states of the chain and the local structure queries
//! that the rest of the crate is built on.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Longest chain a [`BasisState`] can describe.
pub const MAX_SITES: usize = 63;

/// A z-basis state `|s_1 s_2 … s_L⟩`.
///
/// The index is the binary number `s_1 s_2 … s_L` with site 1 as the most
/// significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    index: u64,
    len: u8,
}

impl BasisState {
    pub fn new(index: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::InvalidParameter {
                field: "length",
                reason: alloc::format!("must be in 1..={MAX_SITES}, got {len}"),
            });
        }
        if index >> len != 0 {
            return Err(Error::InvalidParameter {
                field: "index",
                reason: alloc::format!("{index} does not fit in {len} sites"),
            });
        }
        Ok(Self { index, len: len as u8 })
    }

    /// Builds a state from site values `s_1 … s_L` (nonzero means excited).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let index = bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b != 0));
        Self::new(index, bits.len())
    }

    pub fn index(self) -> u64 {
        self.index
    }

    pub fn len(self) -> usize {
        usize::from(self.len)
    }

    /// Site value `s_j` for `1 ≤ j ≤ L`.
    pub fn site(self, j: usize) -> bool {
        debug_assert!((1..=self.len()).contains(&j));
        (self.index >> (self.len() - j)) & 1 == 1
    }

    pub fn bits(self) -> Vec<u8> {
        (1..=self.len()).map(|j| u8::from(self.site(j))).collect()
    }

    pub fn excitations(self) -> u32 {
        self.index.count_ones()
    }

    /// The state with site `j` flipped.
    pub fn flipped(self, j: usize) -> Self {
        Self {
            index: self.index ^ site_mask(self.len(), j),
            len: self.len,
        }
    }

    /// Every basis state of an `len`-site chain in index order.
    pub fn all(len: usize) -> Result<impl Iterator<Item = BasisState>> {
        Self::new(0, len)?;
        Ok((0..1u64 << len).map(move |index| BasisState { index, len: len as u8 }))
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 1..=self.len() {
            f.write_str(if self.site(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidBitstring {
            text: String::from(s),
            reason,
        };
        if s.is_empty() {
            return Err(invalid("empty"));
        }
        if s.len() > MAX_SITES {
            return Err(invalid("too many sites"));
        }
        let mut index = 0u64;
        for c in s.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(invalid("only '0' and '1' are allowed")),
                };
        }
        Self::new(index, s.len())
    }
}

/// Bit of the index that holds site `j`.
#[inline]
pub(crate) fn site_mask(len: usize, j: usize) -> u64 {
    1u64 << (len - j)
}

/// Physical parameters of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub length: usize,
    pub omega: f64,
    /// Nearest-neighbour interaction; shell `r` carries `v / r^6`.
    pub v: f64,
    pub gamma: f64,
    /// Number of interaction shells kept.
    pub range: usize,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            length: 6,
            omega: 1.0,
            v: 50.0,
            gamma: 2.0,
            range: 3,
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidParameter {
                field,
                reason: String::from(reason),
            })
        };
        if self.length == 0 || self.length > MAX_SITES {
            return bad("length", "must be between 1 and 63");
        }
        if !self.omega.is_finite() {
            return bad("omega", "must be finite");
        }
        if !self.v.is_finite() {
            return bad("v", "must be finite");
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return bad("gamma", "must be finite and non-negative");
        }
        if self.range == 0 {
            return bad("range", "must be at least 1");
        }
        Ok(())
    }
}

/// `Σ_{j=1}^{L-1} 2^j s_j s_{j+1}`, the eigenvalue of the CDEA operator.
pub fn cdea_value(state: BasisState) -> u64 {
    cdea_of_index(state.index, state.len())
}

pub(crate) fn cdea_of_index(index: u64, len: usize) -> u64 {
    // bit p and p+1 set <=> sites j = len-p-1 and j+1 excited
    let mut pairs = index & (index >> 1);
    let mut value = 0;
    while pairs != 0 {
        let p = pairs.trailing_zeros() as usize;
        value += 1u64 << (len - p - 1);
        pairs &= pairs - 1;
    }
    value
}

/// Number of excited minus number of unexcited sites.
pub fn magnetization_of(state: BasisState) -> i64 {
    2 * i64::from(state.excitations()) - state.len() as i64
}

/// Whether the PXP term can flip site `j` of the state with this index.
///
/// Interior sites need both neighbours unexcited, the two edge sites only
/// their single neighbour. A one-site chain is always flippable.
#[inline]
pub(crate) fn pxp_flip_allowed(index: u64, len: usize, j: usize) -> bool {
    let left = j > 1 && index & site_mask(len, j - 1) != 0;
    let right = j < len && index & site_mask(len, j + 1) != 0;
    !left && !right
}

/// States reachable from `state` by one allowed PXP flip, ordered by site.
pub fn pxp_neighbors(state: BasisState) -> Vec<BasisState> {
    let len = state.len();
    (1..=len)
        .filter(|&j| pxp_flip_allowed(state.index, len, j))
        .map(|j| state.flipped(j))
        .collect()
}

/// A state with no allowed flip is a stationary state of the PXP model.
pub fn is_frozen(state: BasisState) -> bool {
    let len = state.len();
    !(1..=len).any(|j| pxp_flip_allowed(state.index, len, j))
}
