//! Counting the fragments: the recursion `f(L) = f(L−1) + f(L−2) + f(L−4)`,
//! a brute-force count of bitstrings without isolated excitations, the roots
//! of the characteristic polynomial and the resulting asymptotics.

use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::Mat;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// Largest `L` accepted by [`count_no_isolated_ones`].
pub const MAX_BRUTE_FORCE_SITES: usize = 24;

/// `f(L)` from the recursion with `f(0) = 1`, `f(−1) = 1`, `f(−2) = 0`,
/// `f(−3) = −1`. Exact; fails once the value leaves `i128`.
pub fn f_recursive(length: i64) -> Result<i128> {
    if length < -3 {
        return Err(Error::InvalidParameter {
            field: "length",
            reason: alloc::format!("recursion starts at L = -3, got {length}"),
        });
    }
    // window holds f(k-3), f(k-2), f(k-1), f(k) for k = 0
    let mut window: [i128; 4] = [-1, 0, 1, 1];
    if length <= 0 {
        return Ok(window[(length + 3) as usize]);
    }
    for k in 1..=length {
        let next = window[3]
            .checked_add(window[2])
            .and_then(|s| s.checked_add(window[0]))
            .ok_or(Error::CountOverflow { length: k })?;
        window = [window[1], window[2], window[3], next];
    }
    Ok(window[3])
}

/// Fibonacci numbers with `F(1) = F(2) = 1`.
pub fn fibonacci(n: u32) -> Result<u128> {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        let next = a.checked_add(b).ok_or(Error::CountOverflow { length: i64::from(n) })?;
        a = b;
        b = next;
    }
    Ok(a)
}

/// Length-`L` bitstrings in which every 1 has an adjacent 1, by exhaustion.
pub fn count_no_isolated_ones(length: usize) -> Result<u64> {
    if length == 0 || length > MAX_BRUTE_FORCE_SITES {
        return Err(Error::InvalidParameter {
            field: "length",
            reason: alloc::format!("brute force covers 1..={MAX_BRUTE_FORCE_SITES}, got {length}"),
        });
    }
    let mask = (1u64 << length) - 1;
    Ok((0..=mask)
        .filter(|&s| {
            let paired = (s << 1 | s >> 1) & mask;
            s & !paired == 0
        })
        .count() as u64)
}

/// Roots of `r⁴ − r³ − r² − 1 = (r + 1)(r³ − 2r² + r − 1)` and the weights
/// `A_i` that reproduce `f(1..=4)` as `Σ A_i r_i^L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootSet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_plus: C64,
    pub gamma_minus: C64,
    /// Weights of `α`, `β`, `γ₊`, `γ₋` in that order.
    pub coefficients: [C64; 4],
}

impl RootSet {
    pub fn roots(&self) -> [C64; 4] {
        [
            C64::new(self.alpha, 0.0),
            C64::new(self.beta, 0.0),
            self.gamma_plus,
            self.gamma_minus,
        ]
    }

    /// Dominant weight `A₁`.
    pub fn amplitude(&self) -> f64 {
        self.coefficients[0].re
    }

    /// `Σ A_i r_i^L`, real part.
    pub fn closed_form(&self, length: i32) -> f64 {
        self.roots()
            .iter()
            .zip(&self.coefficients)
            .map(|(r, a)| a * r.powi(length))
            .sum::<C64>()
            .re
    }
}

/// `r⁴ − r³ − r² − 1`.
pub fn characteristic_polynomial(r: C64) -> C64 {
    r.powi(4) - r.powi(3) - r * r - C64::new(1.0, 0.0)
}

fn polish(mut r: C64) -> C64 {
    for _ in 0..8 {
        let p = characteristic_polynomial(r);
        let dp = r.powi(3) * 4.0 - r * r * 3.0 - r * 2.0;
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        r -= step;
        if step.norm() <= f64::EPSILON * r.norm() {
            break;
        }
    }
    r
}

pub fn char_roots() -> RootSet {
    // real root of the cubic r³ − 2r² + r − 1: bracket [1, 2], then Newton
    let cubic = |r: f64| ((r - 2.0) * r + 1.0) * r - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cubic(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha = polish(C64::new(0.5 * (lo + hi), 0.0)).re;
    // deflate: r³ − 2r² + r − 1 = (r − α)(r² + b r + c)
    let b = alpha - 2.0;
    let c = 1.0 + alpha * b;
    let im = (4.0 * c - b * b).sqrt() / 2.0;
    let gamma_plus = polish(C64::new(-b / 2.0, im));
    let gamma_minus = gamma_plus.conj();
    let beta = -1.0;

    let roots = [C64::new(alpha, 0.0), C64::new(beta, 0.0), gamma_plus, gamma_minus];
    let vandermonde = Mat::<C64>::from_fn(4, 4, |row, col| roots[col].powi(row as i32 + 1));
    let rhs = Mat::<C64>::from_fn(4, 1, |row, _| {
        C64::new(f_recursive(row as i64 + 1).expect("small") as f64, 0.0)
    });
    let weights = vandermonde.partial_piv_lu().solve(&rhs);
    RootSet {
        alpha,
        beta,
        gamma_plus,
        gamma_minus,
        coefficients: [weights[(0, 0)], weights[(1, 0)], weights[(2, 0)], weights[(3, 0)]],
    }
}

/// `A₁ α^L`.
pub fn f_asymptotic(length: u32) -> f64 {
    let roots = char_roots();
    roots.amplitude() * roots.alpha.powi(length as i32)
}

/// One row of the count table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingResult {
    pub length: u32,
    pub f: i128,
    pub fib: u128,
    pub asymptotic: f64,
    pub rel_error: f64,
}

pub fn counting_table(max_length: u32) -> Result<Vec<CountingResult>> {
    let roots = char_roots();
    (1..=max_length)
        .map(|length| {
            let f = f_recursive(i64::from(length))?;
            let fib = fibonacci(length)?;
            let asymptotic = roots.amplitude() * roots.alpha.powi(length as i32);
            let rel_error = (f as f64 - asymptotic).abs() / f as f64;
            Ok(CountingResult { length, f, fib, asymptotic, rel_error })
        })
        .collect()
}
