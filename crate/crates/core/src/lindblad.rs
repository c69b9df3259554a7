//! Lindblad master equation with local dephasing on every excited site:
//!
//! `dρ/dt = −i[H, ρ] + γ Σ_j (Q_j ρ Q_j − ½{Q_j, ρ})`.
//!
//! Two representations of the same generator live here. [`LindbladGenerator`]
//! applies the right-hand side directly to a `2^L × 2^L` density matrix and
//! drives the time integration. [`LiouvillianMatrix`] is the materialized
//! `4^L × 4^L` superoperator, assembled independently from Kronecker products
//! of the Hamiltonian and the jump operators, and feeds the eigensolver.

use alloc::vec;
use alloc::vec::Vec;

use faer::{MatRef, Side};
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{cdea_of_index, BasisState, ChainParams};
use crate::error::{Error, Result};
use crate::operators::{build_projector, MemoryBudget, OperatorMatrix};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Density matrix of an `L`-site chain, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    sites: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// `|s⟩⟨s|`.
    pub fn pure_basis(state: BasisState) -> Self {
        let sites = state.len();
        let dim = 1usize << sites;
        let mut data = vec![ZERO; dim * dim];
        let s = state.index() as usize;
        data[s * dim + s] = C64::new(1.0, 0.0);
        Self { sites, data }
    }

    /// `𝕀 / 2^L`.
    pub fn maximally_mixed(sites: usize) -> Self {
        let dim = 1usize << sites;
        let mut data = vec![ZERO; dim * dim];
        for s in 0..dim {
            data[s * dim + s] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { sites, data }
    }

    /// Uniform mixture of the given basis states, `𝕀_d / d` on their span.
    pub fn uniform_mixture(states: &[BasisState]) -> Result<Self> {
        let first = states.first().ok_or(Error::InvalidParameter {
            field: "states",
            reason: "empty mixture".into(),
        })?;
        let sites = first.len();
        let dim = 1usize << sites;
        let weight = C64::new(1.0 / states.len() as f64, 0.0);
        let mut data = vec![ZERO; dim * dim];
        for s in states {
            if s.len() != sites {
                return Err(Error::DimensionMismatch { expected: sites, actual: s.len() });
            }
            let i = s.index() as usize;
            data[i * dim + i] += weight;
        }
        Ok(Self { sites, data })
    }

    pub fn from_operator(sites: usize, op: &OperatorMatrix) -> Result<Self> {
        let dim = 1usize << sites;
        if op.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: op.dim() });
        }
        Ok(Self { sites, data: op.as_slice().to_vec() })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_row_major(self.dim(), self.data.clone()).expect("square by construction")
    }

    /// Column-stacked vector, `v[a + D·b] = ρ[a, b]`.
    pub fn vectorize(&self) -> Vec<C64> {
        let dim = self.dim();
        (0..dim * dim).map(|k| self.data[(k % dim) * dim + k / dim]).collect()
    }

    pub fn from_vectorized(sites: usize, v: &[C64]) -> Result<Self> {
        let dim = 1usize << sites;
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: v.len() });
        }
        let data = (0..dim * dim).map(|k| v[(k % dim) * dim + k / dim]).collect();
        Ok(Self { sites, data })
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.data, self.dim())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.data, self.dim())
    }

    /// Checks trace, Hermiticity and positivity against `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        check_invariants(&self.data, self.dim(), 0.0, tol, true)
    }
}

fn hermiticity_deviation(data: &[C64], dim: usize) -> f64 {
    let mut dev = 0.0f64;
    for r in 0..dim {
        for c in r..dim {
            dev = dev.max((data[r * dim + c] - data[c * dim + r].conj()).norm());
        }
    }
    dev
}

fn min_eigenvalue(data: &[C64], dim: usize) -> Result<f64> {
    let m = MatRef::from_row_major_slice(data, dim, dim);
    let evs = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenSolver)?;
    Ok(evs.first().copied().unwrap_or(0.0))
}

fn check_invariants(data: &[C64], dim: usize, time: f64, tol: f64, positivity: bool) -> Result<()> {
    let trace: C64 = (0..dim).map(|i| data[i * dim + i]).sum();
    let trace_err = (trace - C64::new(1.0, 0.0)).norm();
    if !(trace_err < tol) {
        return Err(Error::InvariantViolation { invariant: "trace", time, value: trace_err });
    }
    let herm = hermiticity_deviation(data, dim);
    if !(herm < tol) {
        return Err(Error::InvariantViolation { invariant: "hermiticity", time, value: herm });
    }
    if positivity {
        let min_ev = min_eigenvalue(data, dim)?;
        if min_ev < -tol {
            return Err(Error::InvariantViolation { invariant: "positivity", time, value: min_ev });
        }
    }
    Ok(())
}

/// `Tr(ρ Σ_j σ^z_j)`.
pub fn magnetization(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let len = rho.sites as f64;
    (0..dim)
        .map(|a| rho.data[a * dim + a].re * (2.0 * f64::from((a as u64).count_ones()) - len))
        .sum()
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr ρ² = Σ_ab ρ_ab ρ_ba; for Hermitian ρ this is Σ |ρ_ab|²
    let dim = rho.dim();
    let mut acc = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            acc += (rho.data[a * dim + b] * rho.data[b * dim + a]).re;
        }
    }
    acc
}

/// `Tr(ρ 𝒜)`.
pub fn cdea_expectation(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    (0..dim)
        .map(|a| rho.data[a * dim + a].re * cdea_of_index(a as u64, rho.sites) as f64)
        .sum()
}

/// Right-hand side of the master equation, applied without forming the
/// superoperator.
///
/// Dephasing with `Q_j` on every site only rescales coherences:
/// `D(ρ)_ab = −(γ/2) · #{j : s_j(a) ≠ s_j(b)} · ρ_ab`, so together with the
/// diagonal of `H` it folds into one rate per matrix element. The
/// off-diagonal part of `H` is kept in compressed rows.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    sites: usize,
    dim: usize,
    gamma: f64,
    /// `−i(H_aa − H_bb) − (γ/2)|a ⊕ b|`, row-major.
    local: Vec<C64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl LindbladGenerator {
    pub fn new(h: &OperatorMatrix, gamma: f64, sites: usize) -> Result<Self> {
        let dim = 1usize << sites;
        if h.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: h.dim() });
        }
        if !h.is_hermitian() {
            return Err(Error::NotHermitian { deviation: h.hermiticity_deviation() });
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "gamma",
                reason: "must be finite and non-negative".into(),
            });
        }
        let diag: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        let mut local = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let flips = ((a ^ b) as u64).count_ones() as f64;
                local.push(C64::new(-0.5 * gamma * flips, -(diag[a] - diag[b])));
            }
        }
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for r in 0..dim {
            for (c, v) in h.row_nonzeros(r) {
                if c != r {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self { sites, dim, gamma, local, row_start, cols, vals })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `out = 𝓛(ρ)` for any (not necessarily Hermitian) row-major matrix.
    pub fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let dim = self.dim;
        assert_eq!(rho.len(), dim * dim);
        assert_eq!(out.len(), dim * dim);
        for a in 0..dim {
            let row_rho = &rho[a * dim..(a + 1) * dim];
            let row_out = &mut out[a * dim..(a + 1) * dim];
            for ((o, &l), &r) in row_out.iter_mut().zip(&self.local[a * dim..(a + 1) * dim]).zip(row_rho) {
                *o = l * r;
            }
            // −i (H_off ρ)_a·
            for idx in self.row_start[a]..self.row_start[a + 1] {
                let f = -I * self.vals[idx];
                let src = &rho[self.cols[idx] * dim..(self.cols[idx] + 1) * dim];
                for (o, &r) in row_out.iter_mut().zip(src) {
                    *o += f * r;
                }
            }
            // +i (ρ H_off)_a·
            for (k, &r) in row_rho.iter().enumerate() {
                if r == ZERO {
                    continue;
                }
                let g = I * r;
                for idx in self.row_start[k]..self.row_start[k + 1] {
                    row_out[self.cols[idx]] += g * self.vals[idx];
                }
            }
        }
    }

    pub fn apply_to(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.sites != self.sites {
            return Err(Error::DimensionMismatch { expected: self.sites, actual: rho.sites });
        }
        let mut out = vec![ZERO; self.dim * self.dim];
        self.apply(&rho.data, &mut out);
        Ok(DensityMatrix { sites: self.sites, data: out })
    }
}

/// Materialized superoperator acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct LiouvillianMatrix {
    sites: usize,
    size: usize,
    /// Row-major `size × size`.
    data: Vec<C64>,
}

impl LiouvillianMatrix {
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `4^L`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.size + col]
    }

    pub fn as_faer(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.data, self.size, self.size)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.size);
        self.data
            .chunks_exact(self.size)
            .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }

    pub(crate) fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.size..(r + 1) * self.size]
    }
}

/// Builds `𝓛̃` for `H` and dephasing `γ` on every site of an `L`-site chain.
pub fn build_liouvillian(
    h: &OperatorMatrix,
    gamma: f64,
    sites: usize,
    budget: MemoryBudget,
) -> Result<LiouvillianMatrix> {
    let jumps = (1..=sites)
        .map(|j| build_projector(sites, j, budget).map(|q| (gamma, q)))
        .collect::<Result<Vec<_>>>()?;
    build_liouvillian_with_jumps(h, &jumps, budget)
}

/// Generic Lindblad superoperator
/// `−i(𝕀⊗H − Hᵀ⊗𝕀) + Σ_k γ_k (L̄_k⊗L_k − ½ 𝕀⊗L_k†L_k − ½ (L_k†L_k)ᵀ⊗𝕀)`
/// in the column-stacking convention `vec(AXB) = (Bᵀ⊗A) vec(X)`.
pub fn build_liouvillian_with_jumps(
    h: &OperatorMatrix,
    jumps: &[(f64, OperatorMatrix)],
    budget: MemoryBudget,
) -> Result<LiouvillianMatrix> {
    let dim = h.dim();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidParameter {
            field: "hamiltonian",
            reason: "dimension must be a power of two".into(),
        });
    }
    let sites = dim.trailing_zeros() as usize;
    budget.check_square("Liouvillian matrix", 2 * sites)?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { deviation: h.hermiticity_deviation() });
    }
    let size = dim * dim;
    let mut data = vec![ZERO; size * size];
    let mut add = |row: usize, col: usize, v: C64| data[row * size + col] += v;
    let nonzeros = |m: &OperatorMatrix| -> Vec<(usize, usize, C64)> {
        (0..m.dim()).flat_map(|r| m.row_nonzeros(r).map(move |(c, v)| (r, c, v))).collect()
    };

    for (r, c, v) in nonzeros(h) {
        for k in 0..dim {
            // 𝕀⊗H: (a', b') = (r, k), (a, b) = (c, k)
            add(r + dim * k, c + dim * k, -I * v);
            // Hᵀ⊗𝕀: (a', b') = (k, c), (a, b) = (k, r)
            add(k + dim * c, k + dim * r, I * v);
        }
    }
    for (rate, l) in jumps {
        if l.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: l.dim() });
        }
        let rate = C64::new(*rate, 0.0);
        let l_nz = nonzeros(l);
        for &(r1, c1, v1) in &l_nz {
            for &(r2, c2, v2) in &l_nz {
                // L̄⊗L: row (r1, r2), col (c1, c2), weight L[r1,c1] conj(L[r2,c2])
                add(r1 + dim * r2, c1 + dim * c2, rate * v1 * v2.conj());
            }
        }
        let l_dag = conj_transpose(l);
        let k = l_dag.matmul(l);
        for (r, c, v) in nonzeros(&k) {
            for m in 0..dim {
                add(r + dim * m, c + dim * m, -0.5 * rate * v);
                add(m + dim * c, m + dim * r, -0.5 * rate * v);
            }
        }
    }
    Ok(LiouvillianMatrix { sites, size, data })
}

fn conj_transpose(m: &OperatorMatrix) -> OperatorMatrix {
    let n = m.dim();
    let mut out = OperatorMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            out.set(c, r, m.get(r, c).conj());
        }
    }
    out
}

/// Fixed-step classical Runge–Kutta settings.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Re-integrate the last grid interval with `dt/2` and reject the run if
    /// the final states differ by more than `self_check_tol` (max norm).
    pub self_check: bool,
    pub self_check_tol: f64,
    /// Check trace, Hermiticity and positivity at every `invariant_stride`-th
    /// output time; `0` disables the checks.
    pub invariant_stride: usize,
    pub invariant_tol: f64,
    /// Output times at which a copy of ρ is kept.
    pub snapshot_times: Vec<f64>,
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            self_check: true,
            self_check_tol: 1e-6,
            invariant_stride: 1,
            invariant_tol: 1e-8,
            snapshot_times: Vec::new(),
        }
    }

    /// `dt = 0.1 / max(|V|, γ, |Ω|)`.
    pub fn for_chain(params: &ChainParams) -> Self {
        Self::with_dt(default_dt(params))
    }
}

pub fn default_dt(params: &ChainParams) -> f64 {
    let scale = params.v.abs().max(params.gamma).max(params.omega.abs());
    if scale > 0.0 {
        0.1 / scale
    } else {
        0.1
    }
}

/// Observables sampled along a trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub magnetization: Vec<f64>,
    pub purity: Vec<f64>,
    pub cdea: Vec<f64>,
    pub snapshots: Vec<(f64, DensityMatrix)>,
}

impl TimeSeries {
    fn record(&mut self, t: f64, rho: &DensityMatrix) {
        self.times.push(t);
        self.magnetization.push(magnetization(rho));
        self.purity.push(purity(rho));
        self.cdea.push(cdea_expectation(rho));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final density matrix, when it was requested as a snapshot.
    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.snapshots.last().filter(|(t, _)| Some(t) == self.times.last()).map(|(_, r)| r)
    }
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            tmp: vec![ZERO; n],
        }
    }

    fn step(&mut self, generator: &LindbladGenerator, y: &mut [C64], h: f64) {
        let half = 0.5 * h;
        generator.apply(y, &mut self.k1);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + k * half;
        }
        generator.apply(&self.tmp, &mut self.k2);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + k * half;
        }
        generator.apply(&self.tmp, &mut self.k3);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + k * h;
        }
        generator.apply(&self.tmp, &mut self.k4);
        let w = h / 6.0;
        for (i, y) in y.iter_mut().enumerate() {
            *y += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }

    /// Integrates over `span` with the largest step `≤ dt` that divides it.
    fn advance(&mut self, generator: &LindbladGenerator, y: &mut [C64], span: f64, dt: f64) {
        if span <= 0.0 {
            return;
        }
        let steps = (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            self.step(generator, y, h);
        }
    }
}

fn validate_grid(t_grid: &[f64], dt: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter { field: "t_grid", reason: "empty".into() });
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            field: "t_grid",
            reason: "times must be finite and strictly increasing".into(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter { field: "dt", reason: "must be positive".into() });
    }
    Ok(())
}

/// Integrates `dρ/dt = 𝓛(ρ)` from `rho0` at `t_grid[0]` and records
/// magnetization, purity and `⟨𝒜⟩` at every grid time.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &OperatorMatrix,
    gamma: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    let generator = LindbladGenerator::new(h, gamma, rho0.sites)?;
    evolve_with(&generator, rho0, t_grid, cfg)
}

/// [`evolve`] with a prebuilt generator, for sweeps over initial states.
pub fn evolve_with(
    generator: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    if rho0.sites != generator.sites {
        return Err(Error::DimensionMismatch { expected: generator.sites, actual: rho0.sites });
    }
    validate_grid(t_grid, cfg.dt)?;
    let dim = generator.dim;
    let mut rho = rho0.clone();
    let mut rk = Rk4::new(dim * dim);
    let mut series = TimeSeries::default();
    let mut previous: Option<DensityMatrix> = None;
    let last = t_grid.len() - 1;
    let scale = t_grid[last].abs().max(1.0);

    for (i, &t) in t_grid.iter().enumerate() {
        if i > 0 {
            if i == last && cfg.self_check {
                previous = Some(rho.clone());
            }
            rk.advance(generator, &mut rho.data, t - t_grid[i - 1], cfg.dt);
        }
        if cfg.invariant_stride > 0 && (i % cfg.invariant_stride == 0 || i == last) {
            check_invariants(&rho.data, dim, t, cfg.invariant_tol, true)?;
        }
        series.record(t, &rho);
        if cfg.snapshot_times.iter().any(|&s| (s - t).abs() <= 1e-12 * scale) {
            series.snapshots.push((t, rho.clone()));
        }
    }

    if let Some(mut check) = previous {
        rk.advance(generator, &mut check.data, t_grid[last] - t_grid[last - 1], 0.5 * cfg.dt);
        let deviation = check
            .data
            .iter()
            .zip(&rho.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        if deviation > cfg.self_check_tol {
            return Err(Error::StepSizeRejected { deviation, tolerance: cfg.self_check_tol });
        }
    }
    Ok(series)
}

/// `n` equally spaced times from `0` to `t_max` inclusive.
pub fn linear_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_pxp_hamiltonian, build_rydberg_hamiltonian};

    fn pseudo_random(n: usize, seed: u64) -> Vec<C64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| C64::new(next(), next())).collect()
    }

    fn st(s: &str) -> BasisState {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_pure_dephasing_spectrum() {
        let h = OperatorMatrix::zeros(2);
        let l = build_liouvillian(&h, 1.0, 1, MemoryBudget::default()).unwrap();
        // diagonal superoperator: populations fixed, coherences decay at γ/2
        let diag: Vec<C64> = (0..4).map(|k| l.get(k, k)).collect();
        assert_eq!(diag, [ZERO, C64::new(-0.5, 0.0), C64::new(-0.5, 0.0), ZERO]);
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(l.get(r, c), ZERO);
                }
            }
        }
    }

    #[test]
    fn superoperator_is_trace_preserving_and_fixes_identity() {
        for (len, pxp) in [(2, false), (3, true), (4, false)] {
            let h = if pxp {
                build_pxp_hamiltonian(len, 1.3, MemoryBudget::default()).unwrap()
            } else {
                let p = ChainParams { length: len, omega: 0.8, v: 7.0, gamma: 1.5, range: 2 };
                build_rydberg_hamiltonian(&p, MemoryBudget::default()).unwrap()
            };
            let l = build_liouvillian(&h, 1.5, len, MemoryBudget::default()).unwrap();
            let dim = 1usize << len;
            // Tr ρ = Σ_a v[a + D a]; trace preservation means those rows sum to zero per column
            for col in 0..l.size() {
                let s: C64 = (0..dim).map(|a| l.get(a + dim * a, col)).sum();
                assert!(s.norm() < 1e-12);
            }
            let id = DensityMatrix::maximally_mixed(len).vectorize();
            assert!(l.apply(&id).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn matrix_free_rhs_matches_materialized_superoperator() {
        for len in 1..=4 {
            let p = ChainParams { length: len, omega: 1.0, v: 50.0, gamma: 2.0, range: 3 };
            for h in [
                build_rydberg_hamiltonian(&p, MemoryBudget::default()).unwrap(),
                build_pxp_hamiltonian(len, 1.0, MemoryBudget::default()).unwrap(),
            ] {
                let l = build_liouvillian(&h, 2.0, len, MemoryBudget::default()).unwrap();
                let g = LindbladGenerator::new(&h, 2.0, len).unwrap();
                let dim = 1usize << len;
                let rho = pseudo_random(dim * dim, 7 + len as u64);
                let mut out = vec![ZERO; dim * dim];
                g.apply(&rho, &mut out);
                let as_density = DensityMatrix { sites: len, data: rho };
                let expected = l.apply(&as_density.vectorize());
                let got = DensityMatrix { sites: len, data: out }.vectorize();
                let dev = expected.iter().zip(&got).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                assert!(dev < 1e-12, "L={len}: {dev}");
            }
        }
    }

    #[test]
    fn observables_of_reference_states() {
        let mixed = DensityMatrix::maximally_mixed(6);
        assert!(magnetization(&mixed).abs() < 1e-15);
        assert!((purity(&mixed) - 1.0 / 64.0).abs() < 1e-15);
        assert!((cdea_expectation(&mixed) - 15.5).abs() < 1e-13);

        let pure = DensityMatrix::pure_basis(st("110000"));
        assert_eq!(magnetization(&pure), -2.0);
        assert_eq!(purity(&pure), 1.0);
        assert_eq!(cdea_expectation(&pure), 2.0);
        pure.validate(1e-12).unwrap();
    }

    #[test]
    fn mixed_state_is_a_fixed_point() {
        let p = ChainParams { length: 4, ..Default::default() };
        let h = build_rydberg_hamiltonian(&p, MemoryBudget::default()).unwrap();
        let cfg = IntegratorConfig::with_dt(0.002);
        let ts = evolve(&DensityMatrix::maximally_mixed(4), &h, 2.0, &linear_grid(1.0, 5), &cfg).unwrap();
        for k in 0..ts.len() {
            assert!(ts.magnetization[k].abs() < 1e-13);
            assert!((ts.purity[k] - 1.0 / 16.0).abs() < 1e-13);
        }
    }

    #[test]
    fn frozen_state_stays_put_in_pxp_model() {
        let h = build_pxp_hamiltonian(6, 1.0, MemoryBudget::default()).unwrap();
        let cfg = IntegratorConfig::with_dt(0.01);
        let ts = evolve(&DensityMatrix::pure_basis(st("111111")), &h, 2.0, &linear_grid(5.0, 6), &cfg).unwrap();
        assert!(ts.magnetization.iter().all(|&m| m == 6.0));
        assert!(ts.purity.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn rabi_oscillation_of_one_atom() {
        // H = Ω σ^x, γ = 0: ⟨Q⟩(t) = sin²(Ωt), so M = −cos(2Ωt)
        let p = ChainParams { length: 1, omega: 1.0, v: 0.0, gamma: 0.0, range: 1 };
        let h = build_rydberg_hamiltonian(&p, MemoryBudget::default()).unwrap();
        let grid = linear_grid(3.0, 31);
        let ts = evolve(&DensityMatrix::pure_basis(st("0")), &h, 0.0, &grid, &IntegratorConfig::with_dt(1e-3)).unwrap();
        for (t, m) in grid.iter().zip(&ts.magnetization) {
            assert!((m + (2.0 * t).cos()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn snapshots_and_self_check() {
        let h = build_pxp_hamiltonian(3, 1.0, MemoryBudget::default()).unwrap();
        let mut cfg = IntegratorConfig::with_dt(0.01);
        cfg.snapshot_times = vec![0.5, 1.0];
        let ts = evolve(&DensityMatrix::pure_basis(st("000")), &h, 2.0, &linear_grid(1.0, 3), &cfg).unwrap();
        assert_eq!(ts.snapshots.len(), 2);
        assert!(ts.final_state().is_some());

        // a step far beyond the stability limit is caught by the half-step rerun
        let p = ChainParams { length: 3, ..Default::default() };
        let h = build_rydberg_hamiltonian(&p, MemoryBudget::default()).unwrap();
        let mut cfg = IntegratorConfig::with_dt(0.2);
        cfg.invariant_stride = 0;
        let err = evolve(&DensityMatrix::pure_basis(st("000")), &h, 2.0, &linear_grid(2.0, 3), &cfg).unwrap_err();
        assert!(matches!(err, Error::StepSizeRejected { .. }));
    }

    #[test]
    fn rejects_bad_grids_and_inputs() {
        let h = build_pxp_hamiltonian(2, 1.0, MemoryBudget::default()).unwrap();
        let rho = DensityMatrix::pure_basis(st("00"));
        let cfg = IntegratorConfig::with_dt(0.01);
        assert!(evolve(&rho, &h, 2.0, &[0.0, 1.0, 1.0], &cfg).is_err());
        assert!(evolve(&rho, &h, 2.0, &[], &cfg).is_err());
        assert!(evolve(&rho, &h, -1.0, &[0.0, 1.0], &cfg).is_err());
        let mut bad = h.clone();
        bad.set(0, 1, C64::new(0.0, 1.0));
        assert!(matches!(LindbladGenerator::new(&bad, 1.0, 2), Err(Error::NotHermitian { .. })));
        assert!(evolve(&DensityMatrix::pure_basis(st("000")), &h, 2.0, &[0.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn liouvillian_respects_budget() {
        let h = build_pxp_hamiltonian(6, 1.0, MemoryBudget::default()).unwrap();
        let err = build_liouvillian(&h, 2.0, 6, MemoryBudget::from_megabytes(100)).unwrap_err();
        assert!(matches!(err, Error::SizeBudget { .. }));
    }

    #[test]
    fn vectorization_roundtrip() {
        let rho = DensityMatrix { sites: 2, data: pseudo_random(16, 3) };
        let v = rho.vectorize();
        assert_eq!(v[1 + 4 * 2], rho.get(1, 2));
        assert_eq!(DensityMatrix::from_vectorized(2, &v).unwrap(), rho);
    }
}
