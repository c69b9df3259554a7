//! Liouvillian spectra: dense diagonalization, zero and slow mode counts, the
//! spectral gap, and a residual check of the fragment steady states.
//!
//! The dense eigenproblem is split before it reaches the eigensolver. Every
//! transformation used is an exact similarity, so the union of the block
//! spectra is the spectrum of the full matrix:
//!
//! 1. Connected components of the sparsity graph. For the dephasing PXP model
//!    these are the products of fragments, `|a⟩⟨b|` with `a ∈ c`, `b ∈ c'`.
//! 2. Hermiticity preservation, `𝓛(ρ†) = 𝓛(ρ)†`. In the basis
//!    `e_x`, `(e_x + e_x̄)/√2`, `i(e_x − e_x̄)/√2` (with `x̄` the transposed
//!    pair) the generator is a real matrix.
//! 3. Mirror symmetry of the chain, `j ↦ L + 1 − j`, which is a signed
//!    permutation of that real basis and splits it into even and odd sectors.
//!
//! Steps 2 and 3 are only used after checking that the matrix really has the
//! symmetry, so arbitrary superoperators are handled correctly.

use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;

use crate::error::{Error, Result};
use crate::fragmentation::EquivalenceClass;
use crate::lindblad::{DensityMatrix, LindbladGenerator, LiouvillianMatrix};
use crate::C64;

/// Default relative tolerance for calling an eigenvalue zero.
pub const ZERO_MODE_TOL: f64 = 1e-8;

/// Components up to this size go straight to the complex eigensolver.
const SMALL_BLOCK: usize = 16;

/// Eigenvalues of a Liouvillian.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    eigenvalues: Vec<C64>,
    block_sizes: Vec<usize>,
}

impl SpectrumResult {
    pub fn from_eigenvalues(eigenvalues: Vec<C64>) -> Self {
        let n = eigenvalues.len();
        Self { eigenvalues, block_sizes: vec![n] }
    }

    /// Eigenvalues sorted by decreasing real part, then by imaginary part.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Sizes of the independent blocks that were diagonalized.
    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn zero_mode_count(&self) -> usize {
        count_zero_modes(self, ZERO_MODE_TOL)
    }

    /// Eigenvalues with `|Re λ| < threshold`.
    pub fn slow_mode_count(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|z| z.re.abs() < threshold).count()
    }

    pub fn gap(&self) -> Result<f64> {
        spectral_gap(self)
    }

    /// Largest real part, which is never meaningfully positive for a
    /// Lindblad generator.
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
    }
}

/// Number of eigenvalues with `|λ| < tol · max(1, max|λ|)`.
pub fn count_zero_modes(result: &SpectrumResult, tol: f64) -> usize {
    let cutoff = tol * result.spectral_radius().max(1.0);
    result.eigenvalues.iter().filter(|z| z.norm() < cutoff).count()
}

/// Slowest decay rate: the smallest `|Re λ|` among eigenvalues with
/// `Re λ < −10⁻⁹ max|λ|`.
pub fn spectral_gap(result: &SpectrumResult) -> Result<f64> {
    let eps = 1e-9 * result.spectral_radius();
    result
        .eigenvalues
        .iter()
        .filter(|z| z.re < -eps)
        .map(|z| -z.re)
        .fold(None, |best: Option<f64>, r| Some(best.map_or(r, |b| b.min(r))))
        .ok_or(Error::UndefinedGap)
}

/// All `4^L` eigenvalues of `liouvillian`.
pub fn full_spectrum(liouvillian: &LiouvillianMatrix) -> Result<SpectrumResult> {
    let n = liouvillian.size();
    let scale = (0..n)
        .flat_map(|r| liouvillian.row(r).iter())
        .fold(0.0f64, |m, z| m.max(z.norm()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;

    let mut eigenvalues = Vec::with_capacity(n);
    let mut block_sizes = Vec::new();
    let (component_of, components) = components(liouvillian);
    for comp in &components {
        for block in reduce_component(liouvillian, comp, &component_of, tol) {
            block_sizes.push(block.size());
            eigenvalues.extend(block.eigenvalues()?);
        }
    }
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumResult { eigenvalues, block_sizes })
}

/// Anything that can evaluate `𝓛(ρ)`.
pub trait Superoperator {
    fn sites(&self) -> usize;
    fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;
}

impl Superoperator for LindbladGenerator {
    fn sites(&self) -> usize {
        LindbladGenerator::sites(self)
    }

    fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_to(rho)
    }
}

impl Superoperator for LiouvillianMatrix {
    fn sites(&self) -> usize {
        LiouvillianMatrix::sites(self)
    }

    fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.sites() != LiouvillianMatrix::sites(self) {
            return Err(Error::DimensionMismatch { expected: LiouvillianMatrix::sites(self), actual: rho.sites() });
        }
        DensityMatrix::from_vectorized(rho.sites(), &self.apply(&rho.vectorize()))
    }
}

/// `max_c ‖𝓛(𝕀_c / d_c)‖_max` over the given fragments.
pub fn verify_class_steady_states<S: Superoperator>(classes: &[EquivalenceClass], liouvillian: &S) -> Result<f64> {
    let mut worst = 0.0f64;
    for class in classes {
        let rho = DensityMatrix::uniform_mixture(class.members())?;
        let out = liouvillian.apply_density(&rho)?;
        worst = out.as_slice().iter().fold(worst, |m, z| m.max(z.norm()));
    }
    Ok(worst)
}

fn components(l: &LiouvillianMatrix) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = l.size();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..n {
        for (c, z) in l.row(r).iter().enumerate() {
            if c != r && *z != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut component_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut root_to_comp = vec![usize::MAX; n];
    for x in 0..n {
        let root = find(&mut parent, x);
        if root_to_comp[root] == usize::MAX {
            root_to_comp[root] = comps.len();
            comps.push(Vec::new());
        }
        component_of[x] = root_to_comp[root];
        comps[root_to_comp[root]].push(x);
    }
    (component_of, comps)
}

/// A basis vector given by at most four weighted unit vectors.
#[derive(Clone, Copy, Debug)]
struct Sparse4 {
    len: usize,
    terms: [(usize, C64); 4],
}

impl Sparse4 {
    fn unit(x: usize) -> Self {
        Self::from_terms(&[(x, C64::new(1.0, 0.0))])
    }

    fn from_terms(terms: &[(usize, C64)]) -> Self {
        let mut out = Self { len: 0, terms: [(0, C64::new(0.0, 0.0)); 4] };
        for &(x, c) in terms {
            if let Some(slot) = out.terms[..out.len].iter_mut().find(|(y, _)| *y == x) {
                slot.1 += c;
            } else {
                out.terms[out.len] = (x, c);
                out.len += 1;
            }
        }
        out
    }

    fn terms(&self) -> &[(usize, C64)] {
        &self.terms[..self.len]
    }

    fn combine(a: &Sparse4, b: &Sparse4, sign: f64) -> Self {
        let w = core::f64::consts::FRAC_1_SQRT_2;
        let mut all = [(0, C64::new(0.0, 0.0)); 4];
        let mut k = 0;
        for &(x, c) in a.terms() {
            all[k] = (x, c * w);
            k += 1;
        }
        for &(x, c) in b.terms() {
            all[k] = (x, c * (sign * w));
            k += 1;
        }
        Self::from_terms(&all[..k])
    }
}

enum Block {
    Complex(Mat<C64>),
    Real(Mat<f64>),
}

impl Block {
    fn size(&self) -> usize {
        match self {
            Block::Complex(m) => m.nrows(),
            Block::Real(m) => m.nrows(),
        }
    }

    fn eigenvalues(&self) -> Result<Vec<C64>> {
        match self {
            Block::Complex(m) if m.nrows() == 1 => Ok(vec![m[(0, 0)]]),
            Block::Real(m) if m.nrows() == 1 => Ok(vec![C64::new(m[(0, 0)], 0.0)]),
            Block::Complex(m) => m.eigenvalues().map_err(|_| Error::EigenSolver),
            Block::Real(m) => m.eigenvalues().map_err(|_| Error::EigenSolver),
        }
    }
}

fn reduce_component(l: &LiouvillianMatrix, comp: &[usize], component_of: &[usize], tol: f64) -> Vec<Block> {
    let n = l.size();
    let dim = 1usize << l.sites();
    let sites = l.sites();
    let complex_block = || Block::Complex(Mat::from_fn(comp.len(), comp.len(), |i, j| l.get(comp[i], comp[j])));
    if comp.len() <= SMALL_BLOCK {
        return vec![complex_block()];
    }
    let id = component_of[comp[0]];

    // x = a + D b  ↦  x̄ = b + D a
    let transpose = |x: usize| (x / dim) + dim * (x % dim);
    if comp.iter().any(|&x| component_of[transpose(x)] != id)
        || !comp.iter().all(|&x| {
            comp.iter()
                .all(|&y| (l.get(transpose(x), transpose(y)) - l.get(x, y).conj()).norm() <= tol)
        })
    {
        return vec![complex_block()];
    }

    // Real basis of Hermitian-like combinations, indexed by position.
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Diag,
        Plus,
        Minus,
    }
    let mut real_basis: Vec<(usize, Kind)> = Vec::with_capacity(comp.len());
    for &x in comp {
        let xt = transpose(x);
        if x == xt {
            real_basis.push((x, Kind::Diag));
        } else if x < xt {
            real_basis.push((x, Kind::Plus));
            real_basis.push((x, Kind::Minus));
        }
    }
    let vector_of = |&(x, kind): &(usize, Kind)| -> Sparse4 {
        let w = core::f64::consts::FRAC_1_SQRT_2;
        match kind {
            Kind::Diag => Sparse4::unit(x),
            Kind::Plus => Sparse4::from_terms(&[(x, C64::new(w, 0.0)), (transpose(x), C64::new(w, 0.0))]),
            Kind::Minus => Sparse4::from_terms(&[(x, C64::new(0.0, w)), (transpose(x), C64::new(0.0, -w))]),
        }
    };

    // Mirror symmetry on basis states, lifted to vectorized indices.
    let mirror_state = |a: usize| (a.reverse_bits() >> (usize::BITS as usize - sites)) & (dim - 1);
    let mirror = |x: usize| mirror_state(x % dim) + dim * mirror_state(x / dim);
    let has_mirror = sites > 1
        && comp.iter().all(|&x| component_of[mirror(x)] == id)
        && comp
            .iter()
            .all(|&x| comp.iter().all(|&y| (l.get(mirror(x), mirror(y)) - l.get(x, y)).norm() <= tol));

    let mut sectors: Vec<Vec<Sparse4>> = Vec::new();
    if has_mirror {
        let mut position = vec![usize::MAX; 2 * n];
        let key = |x: usize, kind: Kind| 2 * x + usize::from(kind == Kind::Minus);
        for (k, &(x, kind)) in real_basis.iter().enumerate() {
            position[key(x, kind)] = k;
        }
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (k, entry) in real_basis.iter().enumerate() {
            let (x, kind) = *entry;
            let rx = mirror(x);
            let base = rx.min(transpose(rx));
            let sign = if kind == Kind::Minus && rx != base { -1.0 } else { 1.0 };
            let image = position[key(base, kind)];
            let fk = vector_of(entry);
            if image == k {
                if sign > 0.0 {
                    even.push(fk);
                } else {
                    odd.push(fk);
                }
            } else if image > k {
                let fi = vector_of(&real_basis[image]);
                even.push(Sparse4::combine(&fk, &fi, sign));
                odd.push(Sparse4::combine(&fk, &fi, -sign));
            }
        }
        sectors.push(even);
        sectors.push(odd);
    } else {
        sectors.push(real_basis.iter().map(vector_of).collect());
    }

    let mut blocks = Vec::new();
    for basis in sectors.into_iter().filter(|b| !b.is_empty()) {
        let m = basis.len();
        let mut max_imag = 0.0f64;
        let block = Mat::<f64>::from_fn(m, m, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for &(x, cx) in basis[i].terms() {
                for &(y, cy) in basis[j].terms() {
                    acc += cx.conj() * l.get(x, y) * cy;
                }
            }
            max_imag = max_imag.max(acc.im.abs());
            acc.re
        });
        if max_imag > tol * 16.0 {
            return vec![complex_block()];
        }
        blocks.push(Block::Real(block));
    }
    blocks
}
