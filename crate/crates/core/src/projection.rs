//! Finite-dimensional randomized verifier of the commuting-projection
//! inequality `||P_1 xi_1 + ... + P_m xi_m||^2 <= (m-1) sum ||xi_i||^2`
//! (valid whenever `P_1 ... P_m xi_i = 0` for every `i`) and of its
//! equality-case structure.
//!
//! Commuting projections are simultaneously diagonalizable, so the family is
//! modeled diagonally: each basis vector carries a joint eigenvalue pattern
//! `eps` in `{0,1}^m`, and `P_j` acts as the indicator of `eps_j = 1`. This
//! is fully general up to a unitary change of basis and makes all eigenspace
//! bookkeeping exact.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// A family of `m` commuting orthogonal projections on `R^D`, carried as a
/// joint eigenvalue pattern per basis vector.
#[derive(Debug, Clone)]
pub struct CommutingProjectionFamily {
    pub dimension: usize,
    pub m: usize,
    /// `patterns[k]` has bit `j` set iff `P_j` fixes basis vector `k`.
    patterns: Vec<u32>,
}

impl CommutingProjectionFamily {
    /// Builds a family from explicit per-basis-vector patterns.
    pub fn from_patterns(m: usize, patterns: Vec<u32>) -> Self {
        assert!((1..=6).contains(&m));
        assert!(patterns.iter().all(|&p| p < (1 << m)));
        CommutingProjectionFamily { dimension: patterns.len(), m, patterns }
    }

    /// The joint eigenvalue pattern of basis vector `k`.
    pub fn pattern(&self, k: usize) -> u32 {
        self.patterns[k]
    }

    /// `P_j xi` (projection index `j` in `0..m`).
    pub fn apply(&self, j: usize, xi: &[f64]) -> Vec<f64> {
        assert!(j < self.m);
        xi.iter()
            .enumerate()
            .map(|(k, &v)| if self.patterns[k] >> j & 1 == 1 { v } else { 0.0 })
            .collect()
    }

    /// `P_j` as a dense `D x D` matrix (diagonal), for cross-checks.
    pub fn dense(&self, j: usize) -> Vec<f64> {
        let d = self.dimension;
        let mut out = vec![0.0; d * d];
        for k in 0..d {
            if self.patterns[k] >> j & 1 == 1 {
                out[k * d + k] = 1.0;
            }
        }
        out
    }

    /// Basis indices whose joint pattern equals `eps`.
    pub fn eigenspace(&self, eps: u32) -> Vec<usize> {
        (0..self.dimension).filter(|&k| self.patterns[k] == eps).collect()
    }
}

/// Resolution of a vector into its joint-eigenspace components `xi_eps`.
#[derive(Debug, Clone)]
pub struct EpsilonDecomposition {
    pub m: usize,
    /// `components[eps]` is the component of the vector in `H_eps`.
    pub components: Vec<Vec<f64>>,
}

impl EpsilonDecomposition {
    /// Squared norm carried by pattern `eps`.
    pub fn norm_sq(&self, eps: u32) -> f64 {
        self.components[eps as usize].iter().map(|v| v * v).sum()
    }

    /// Total squared norm over all patterns.
    pub fn total_norm_sq(&self) -> f64 {
        (0..self.components.len() as u32).map(|e| self.norm_sq(e)).sum()
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Splits `xi` into its joint-eigenspace components; they are mutually
/// orthogonal and sum back to `xi` exactly.
pub fn decompose(family: &CommutingProjectionFamily, xi: &[f64]) -> EpsilonDecomposition {
    assert_eq!(xi.len(), family.dimension);
    let mut components = vec![vec![0.0; family.dimension]; 1 << family.m];
    for (k, &v) in xi.iter().enumerate() {
        components[family.patterns[k] as usize][k] = v;
    }
    EpsilonDecomposition { m: family.m, components }
}

/// Samples a family with every one of the `2^m` joint eigenvalue patterns
/// realized by at least one basis vector; the remaining `D - 2^m` basis
/// vectors get independent uniform patterns.
pub fn random_family(
    dimension: usize,
    m: usize,
    seed: u64,
) -> Result<CommutingProjectionFamily> {
    assert!((2..=6).contains(&m));
    if dimension < 1 << m {
        return Err(Error::DimensionTooSmall);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patterns: Vec<u32> = (0..1u32 << m).collect();
    patterns.extend((0..dimension - (1 << m)).map(|_| rng.next_u32() & ((1 << m) - 1)));
    // Fisher-Yates so pattern placement is not positional
    for i in (1..patterns.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        patterns.swap(i, j);
    }
    Ok(CommutingProjectionFamily { dimension, m, patterns })
}

/// Removes the component of `xi` in the joint range of all projections, so
/// that the output satisfies the hypothesis `P_1 ... P_m xi = 0` exactly.
pub fn project_out_common(family: &CommutingProjectionFamily, xi: &[f64]) -> Vec<f64> {
    let all = (1u32 << family.m) - 1;
    xi.iter()
        .enumerate()
        .map(|(k, &v)| if family.patterns[k] == all { 0.0 } else { v })
        .collect()
}

/// Evaluates both sides of the inequality.
///
/// Returns `(lhs, rhs, holds)` with `lhs = ||sum_i P_i xi_i||^2`,
/// `rhs = (m-1) sum_i ||xi_i||^2` and `holds = (lhs <= rhs + 1e-10)`.
/// Rejects inputs violating the joint-kernel hypothesis beyond `1e-10`.
pub fn check_inequality(
    family: &CommutingProjectionFamily,
    xis: &[Vec<f64>],
) -> Result<(f64, f64, bool)> {
    assert_eq!(xis.len(), family.m);
    let all = (1u32 << family.m) - 1;
    let mut sum = vec![0.0; family.dimension];
    let mut rhs = 0.0;
    for (i, xi) in xis.iter().enumerate() {
        assert_eq!(xi.len(), family.dimension);
        let mut residual = 0.0;
        for (k, &v) in xi.iter().enumerate() {
            if family.patterns[k] == all {
                residual += v * v;
            }
            if family.patterns[k] >> i & 1 == 1 {
                sum[k] += v;
            }
        }
        if residual.sqrt() > 1e-10 * norm_sq(xi).sqrt().max(1.0) {
            return Err(Error::HypothesisViolated);
        }
        rhs += norm_sq(xi);
    }
    let lhs = norm_sq(&sum);
    let rhs = (family.m as f64 - 1.0) * rhs;
    Ok((lhs, rhs, lhs <= rhs + 1e-10))
}

/// Verdict of the equality-case witness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessVerdict {
    /// Every `xi_i` is supported (within tolerance) on the single-zero
    /// patterns avoiding position `i`.
    Pass,
    /// Some `xi_i` carries relative mass above tolerance outside those
    /// patterns.
    Fail,
}

/// For an equality case, verifies the structural conclusion: each `xi_i`
/// must lie in the span of the eigenspaces `H_j`, `j != i`, where `H_j`
/// collects the patterns with exactly one zero, at position `j`.
pub fn equality_witness_check(
    family: &CommutingProjectionFamily,
    xis: &[Vec<f64>],
) -> Result<WitnessVerdict> {
    let (lhs, rhs, _) = check_inequality(family, xis)?;
    if (lhs - rhs).abs() >= 1e-8 * rhs.max(1e-300) {
        return Err(Error::NotAnEqualityCase);
    }
    let all = (1u32 << family.m) - 1;
    for (i, xi) in xis.iter().enumerate() {
        let dec = decompose(family, xi);
        let total = dec.total_norm_sq();
        if total == 0.0 {
            continue;
        }
        let mut allowed = 0.0;
        for j in 0..family.m {
            if j != i {
                allowed += dec.norm_sq(all & !(1 << j));
            }
        }
        if (total - allowed) > 1e-8 * total {
            return Ok(WitnessVerdict::Fail);
        }
    }
    Ok(WitnessVerdict::Pass)
}

/// Gaussian vector supported on the basis vectors whose joint pattern is
/// `eps` (zero if the eigenspace is empty).
pub fn random_eigenvector(
    family: &CommutingProjectionFamily,
    eps: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut v = vec![0.0; family.dimension];
    for k in family.eigenspace(eps) {
        v[k] = standard_normal(rng);
    }
    v
}

/// Constructs vectors achieving equality: one shared component `u_j` is
/// drawn in each single-zero eigenspace `H_j`, and `xi_i = sum_{j != i} u_j`.
/// The shared components realize the Cauchy-Schwarz equality condition of
/// the proof (per-pattern components parallel to `(1, ..., 1)` across the
/// summand index).
pub fn equality_case(
    family: &CommutingProjectionFamily,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = (1u32 << family.m) - 1;
    let us: Vec<Vec<f64>> = (0..family.m)
        .map(|j| {
            let mut u = random_eigenvector(family, all & !(1 << j), &mut rng);
            // normalize so every xi_i carries comparable weight and
            // relative perturbations stay relative to the whole family
            let n = norm_sq(&u).sqrt();
            if n > 0.0 {
                for v in u.iter_mut() {
                    *v /= n;
                }
            }
            u
        })
        .collect();
    (0..family.m)
        .map(|i| {
            let mut xi = vec![0.0; family.dimension];
            for (j, u) in us.iter().enumerate() {
                if j != i {
                    for (x, &v) in xi.iter_mut().zip(u) {
                        *x += v;
                    }
                }
            }
            xi
        })
        .collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
    let u2 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
    (-2.0 * u1.ln()).sqrt() * libm::cos(2.0 * core::f64::consts::PI * u2)
}
