//! Dense operators on the `2^L`-dimensional chain Hilbert space.

use alloc::vec;
use alloc::vec::Vec;

use faer::MatRef;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{cdea_of_index, pxp_flip_allowed, site_mask, ChainParams, MAX_SITES};
use crate::error::{Error, Result};
use crate::C64;

/// Upper bound on the size of any single dense allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryBudget {
    bytes: u128,
}

impl MemoryBudget {
    pub const DEFAULT_MEGABYTES: u64 = 2048;

    pub fn from_megabytes(mb: u64) -> Self {
        Self { bytes: u128::from(mb) << 20 }
    }

    pub fn unlimited() -> Self {
        Self { bytes: u128::MAX }
    }

    pub fn bytes(self) -> u128 {
        self.bytes
    }

    pub fn check(self, what: &'static str, required_bytes: u128) -> Result<()> {
        if required_bytes > self.bytes {
            Err(Error::SizeBudget { what, required_bytes, budget_bytes: self.bytes })
        } else {
            Ok(())
        }
    }

    /// Checks a dense complex square matrix of side `2^exponent`.
    pub(crate) fn check_square(self, what: &'static str, exponent: usize) -> Result<()> {
        let required = if exponent >= 60 {
            u128::MAX
        } else {
            16u128 << (2 * exponent)
        };
        self.check(what, required)
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::from_megabytes(Self::DEFAULT_MEGABYTES)
    }
}

/// Dense complex square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_faer(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.data
            .iter()
            .enumerate()
            .all(|(k, z)| k / self.dim == k % self.dim || *z == C64::new(0.0, 0.0))
    }

    /// `max |A − A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// Hermitian to within `1e-12` of the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= 1e-12 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Nonzero entries of each row as `(column, value)`.
    pub fn row_nonzeros(&self, row: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.data[row * self.dim..(row + 1) * self.dim]
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, z)| *z != C64::new(0.0, 0.0))
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|z| **z != C64::new(0.0, 0.0)).count()
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let product = self.as_faer() * rhs.as_faer();
        OperatorMatrix {
            dim: self.dim,
            data: (0..self.dim * self.dim)
                .map(|k| product[(k / self.dim, k % self.dim)])
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `[self, rhs]`. When either side is diagonal each entry is a single
    /// product difference, which keeps integer-valued inputs exact.
    pub fn commutator(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        if rhs.is_diagonal() {
            let d = rhs.diagonal();
            let mut out = OperatorMatrix::zeros(n);
            for r in 0..n {
                for c in 0..n {
                    out.data[r * n + c] = self.data[r * n + c] * (d[c] - d[r]);
                }
            }
            out
        } else if self.is_diagonal() {
            let mut out = rhs.commutator(self);
            out.data.iter_mut().for_each(|z| *z = -*z);
            out
        } else {
            self.matmul(rhs).sub(&rhs.matmul(self))
        }
    }
}

fn dimension_for(len: usize, budget: MemoryBudget, what: &'static str) -> Result<usize> {
    if len == 0 || len > MAX_SITES {
        return Err(Error::InvalidParameter {
            field: "length",
            reason: alloc::format!("must be between 1 and {MAX_SITES}, got {len}"),
        });
    }
    budget.check_square(what, len)?;
    Ok(1usize << len)
}

/// Diagonal of `Σ_{j<k, k−j ≤ range} V/|j−k|^6 Q_j Q_k`, restricted to
/// separations in `min_shell..=range`.
pub fn interaction_energies(params: &ChainParams, min_shell: usize) -> Vec<f64> {
    let len = params.length;
    let dim = 1usize << len;
    let shells: Vec<(usize, f64)> = (min_shell.max(1)..=params.range.min(len.saturating_sub(1)))
        .map(|r| (r, params.v / (r as f64).powi(6)))
        .collect();
    (0..dim as u64)
        .map(|index| {
            let mut e = 0.0;
            for &(r, vr) in &shells {
                // pairs of excited sites at separation r
                e += vr * f64::from((index & (index >> r)).count_ones());
            }
            e
        })
        .collect()
}

/// `H_o = Ω Σ_j σ^x_j + Σ_{j<k} V/|j−k|^6 Q_j Q_k`, shells beyond
/// `params.range` dropped.
pub fn build_rydberg_hamiltonian(params: &ChainParams, budget: MemoryBudget) -> Result<OperatorMatrix> {
    params.validate()?;
    let len = params.length;
    let dim = dimension_for(len, budget, "Rydberg Hamiltonian")?;
    let mut h = OperatorMatrix::from_diagonal(&interaction_energies(params, 1));
    let omega = C64::new(params.omega, 0.0);
    if params.omega != 0.0 {
        for s in 0..dim {
            for j in 1..=len {
                let t = s ^ site_mask(len, j) as usize;
                h.data[t * dim + s] = omega;
            }
        }
    }
    Ok(h)
}

/// `Ω Σ_{j=2}^{L−1} P_{j−1} σ^x_j P_{j+1} + Ω σ^x_1 P_2 + Ω P_{L−1} σ^x_L`.
pub fn build_pxp_hamiltonian(len: usize, omega: f64, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "PXP Hamiltonian")?;
    let mut h = OperatorMatrix::zeros(dim);
    let omega = C64::new(omega, 0.0);
    for s in 0..dim {
        for j in 1..=len {
            if pxp_flip_allowed(s as u64, len, j) {
                let t = s ^ site_mask(len, j) as usize;
                h.data[t * dim + s] = omega;
            }
        }
    }
    Ok(h)
}

/// The CDEA operator `𝒜 = Σ_{j=1}^{L−1} 2^j Q_j Q_{j+1}`.
pub fn build_cdea_operator(len: usize, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "CDEA operator")?;
    let diag: Vec<f64> = (0..dim as u64).map(|s| cdea_of_index(s, len) as f64).collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `N = Σ_j Q_j Q_{j+1}`, the number of adjacent excited pairs.
pub fn build_pair_number_operator(len: usize, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "pair number operator")?;
    let diag: Vec<f64> = (0..dim as u64).map(|s| f64::from((s & (s >> 1)).count_ones())).collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `Q_j = |1⟩⟨1|` on site `j` (1-based).
pub fn build_projector(len: usize, site: usize, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "projector")?;
    check_site(len, site)?;
    let mask = site_mask(len, site);
    let diag: Vec<f64> = (0..dim as u64).map(|s| if s & mask != 0 { 1.0 } else { 0.0 }).collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `σ^x_j = |1⟩⟨0| + |0⟩⟨1|` on site `j`.
pub fn build_sigma_x(len: usize, site: usize, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "sigma_x")?;
    check_site(len, site)?;
    let mut m = OperatorMatrix::zeros(dim);
    for s in 0..dim {
        m.data[(s ^ site_mask(len, site) as usize) * dim + s] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `Σ_j σ^z_j`, the total magnetization (`σ^z = Q − P`).
pub fn build_total_sigma_z(len: usize, budget: MemoryBudget) -> Result<OperatorMatrix> {
    let dim = dimension_for(len, budget, "total sigma_z")?;
    let diag: Vec<f64> = (0..dim as u64)
        .map(|s| 2.0 * f64::from(s.count_ones()) - len as f64)
        .collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

fn check_site(len: usize, site: usize) -> Result<()> {
    if (1..=len).contains(&site) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "site",
            reason: alloc::format!("{site} is outside 1..={len}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{pxp_neighbors, BasisState};

    fn budget() -> MemoryBudget {
        MemoryBudget::default()
    }

    fn re(z: C64) -> f64 {
        assert_eq!(z.im, 0.0);
        z.re
    }

    #[test]
    fn two_site_rydberg_matrix_by_hand() {
        let p = ChainParams { length: 2, omega: 1.0, v: 50.0, gamma: 2.0, range: 1 };
        let h = build_rydberg_hamiltonian(&p, budget()).unwrap();
        let diag: Vec<f64> = h.diagonal().into_iter().map(re).collect();
        assert_eq!(diag, [0.0, 0.0, 0.0, 50.0]);
        // single flips: 00-01, 00-10, 01-11, 10-11
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            assert_eq!(h.get(a, b), C64::new(1.0, 0.0));
            assert_eq!(h.get(b, a), C64::new(1.0, 0.0));
        }
        assert_eq!(h.get(0, 3), C64::new(0.0, 0.0));
        assert_eq!(h.get(1, 2), C64::new(0.0, 0.0));
        assert!(h.is_hermitian());
    }

    #[test]
    fn interaction_tail_is_included_up_to_range() {
        let p = ChainParams { length: 3, omega: 1.0, v: 50.0, gamma: 2.0, range: 2 };
        let h = build_rydberg_hamiltonian(&p, budget()).unwrap();
        assert_eq!(re(h.get(0b110, 0b110)), 50.0);
        assert_eq!(re(h.get(0b101, 0b101)), 50.0 / 64.0);
        assert_eq!(re(h.get(0b111, 0b111)), 100.0 + 50.0 / 64.0);
        let p1 = ChainParams { range: 1, ..p };
        let h1 = build_rydberg_hamiltonian(&p1, budget()).unwrap();
        assert_eq!(re(h1.get(0b101, 0b101)), 0.0);
    }

    #[test]
    fn zero_drive_is_diagonal() {
        let p = ChainParams { omega: 0.0, ..Default::default() };
        assert!(build_rydberg_hamiltonian(&p, budget()).unwrap().is_diagonal());
    }

    #[test]
    fn pxp_two_sites_leaves_doubly_excited_decoupled() {
        let h = build_pxp_hamiltonian(2, 1.0, budget()).unwrap();
        assert_eq!(h.nonzero_count(), 4);
        assert_eq!(h.get(0b01, 0b00), C64::new(1.0, 0.0));
        assert_eq!(h.get(0b10, 0b00), C64::new(1.0, 0.0));
        assert!(h.row_nonzeros(0b11).next().is_none());
    }

    #[test]
    fn pxp_rows_match_neighbor_enumeration() {
        for len in 1..=8 {
            let h = build_pxp_hamiltonian(len, 1.0, budget()).unwrap();
            let mut expected_nnz = 0;
            for s in BasisState::all(len).unwrap() {
                let neighbors = pxp_neighbors(s);
                expected_nnz += neighbors.len();
                let mut cols: Vec<usize> = h.row_nonzeros(s.index() as usize).map(|(c, _)| c).collect();
                cols.sort_unstable();
                let mut want: Vec<usize> = neighbors.iter().map(|n| n.index() as usize).collect();
                want.sort_unstable();
                assert_eq!(cols, want, "L={len} state {s}");
                assert_eq!(h.get(s.index() as usize, s.index() as usize), C64::new(0.0, 0.0));
            }
            assert_eq!(h.nonzero_count(), expected_nnz);
        }
        let h = build_pxp_hamiltonian(6, 1.0, budget()).unwrap();
        assert!(h.row_nonzeros(63).next().is_none());
    }

    #[test]
    fn cdea_operator_entries_and_trace() {
        let a = build_cdea_operator(6, budget()).unwrap();
        assert_eq!(re(a.get(0b110000, 0b110000)), 2.0);
        assert_eq!(re(a.get(0, 0)), 0.0);
        assert_eq!(a.trace().re / 64.0, 31.0 / 2.0);
        for len in 2..=10 {
            let a = build_cdea_operator(len, budget()).unwrap();
            let dim = (1u64 << len) as f64;
            assert_eq!(a.trace().re / dim, (dim - 2.0) / 4.0);
        }
    }

    #[test]
    fn cdea_commutes_with_pxp_and_projectors_but_not_with_drive() {
        for len in 2..=8 {
            let a = build_cdea_operator(len, budget()).unwrap();
            let h = build_pxp_hamiltonian(len, 1.0, budget()).unwrap();
            assert_eq!(h.commutator(&a).max_abs(), 0.0);
            for j in 1..=len {
                let q = build_projector(len, j, budget()).unwrap();
                assert_eq!(a.commutator(&q).max_abs(), 0.0);
            }
        }
        let p = ChainParams::default();
        let a = build_cdea_operator(6, budget()).unwrap();
        let h = build_rydberg_hamiltonian(&p, budget()).unwrap();
        assert!(h.commutator(&a).max_abs() > 0.0);
        let tail = OperatorMatrix::from_diagonal(&interaction_energies(&p, 2));
        assert_eq!(tail.commutator(&a).max_abs(), 0.0);
    }

    #[test]
    fn commutator_fast_path_matches_matmul() {
        let h = build_pxp_hamiltonian(4, 0.7, budget()).unwrap();
        let n = build_pair_number_operator(4, budget()).unwrap();
        let x = build_sigma_x(4, 2, budget()).unwrap();
        let dense = h.matmul(&n).sub(&n.matmul(&h));
        assert!(h.commutator(&n).sub(&dense).max_abs() < 1e-14);
        let dense = n.matmul(&x).sub(&x.matmul(&n));
        assert!(n.commutator(&x).sub(&dense).max_abs() < 1e-14);
    }

    #[test]
    fn total_sigma_z_and_pair_number() {
        let z = build_total_sigma_z(3, budget()).unwrap();
        assert_eq!(re(z.get(0, 0)), -3.0);
        assert_eq!(re(z.get(7, 7)), 3.0);
        let n = build_pair_number_operator(4, budget()).unwrap();
        assert_eq!(re(n.get(0b1111, 0b1111)), 3.0);
        assert_eq!(re(n.get(0b1011, 0b1011)), 1.0);
    }

    #[test]
    fn budget_rejects_oversized_matrices() {
        let tiny = MemoryBudget::from_megabytes(1);
        let err = build_pxp_hamiltonian(12, 1.0, tiny).unwrap_err();
        assert!(matches!(err, Error::SizeBudget { .. }));
        assert!(build_pxp_hamiltonian(8, 1.0, tiny).is_ok());
        assert!(build_projector(4, 5, budget()).is_err());
    }
}
