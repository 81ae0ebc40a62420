//! Theorem-level checks: monotone entropy sequences along central-limit
//! rescalings, equality detection with Gaussianity / semicircularity
//! follow-up, Fisher-information superadditivity, entropy convexity and free
//! stability.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::classical::{
    convolve, dilate, entropy, fisher, gaussianity_test, resample,
};
use crate::free::{free_convolve, free_entropy, free_fisher, free_power, semicircularity_test};
use crate::grid::Grid;
use crate::measures::{
    distance, law_from_spec, realize, standardize_spec, GridDensity, Law, LawSpec, Metric,
};
use crate::{Error, Result};

/// Which convolution structure a sequence lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Classical,
    Free,
}

/// Entropies of the rescaled partial sums `(x_1 + ... + x_n)/sqrt(n)`,
/// `n = 1..=N`, of i.i.d. (resp. freely i.i.d.) copies of a standardized
/// law; `-inf` encodes divergent entropy.
#[derive(Debug, Clone)]
pub struct EntropySequence {
    pub kind: SequenceKind,
    /// The standardized law the sequence was computed from.
    pub spec: LawSpec,
    /// `values[i]` is the entropy at `n = i + 1`.
    pub values: Vec<f64>,
    /// `deltas[i] = values[i+1] - values[i]`.
    pub deltas: Vec<f64>,
    /// All entries `-inf` (atomic classical input), so the monotonicity
    /// statement is vacuous for this run.
    pub vacuous: bool,
}

impl EntropySequence {
    fn from_values(kind: SequenceKind, spec: LawSpec, values: Vec<f64>) -> Self {
        let deltas = values.windows(2).map(|w| w[1] - w[0]).collect();
        let vacuous = values.iter().all(|v| *v == f64::NEG_INFINITY);
        EntropySequence { kind, spec, values, deltas, vacuous }
    }
}

/// Classical entropy sequence via the recurrence
/// `nu_{n+1} = D_{sqrt(n/(n+1))} nu_n * D_{1/sqrt(n+1)} mu`
/// (`D_a` = dilation by `a`, `*` = convolution), which keeps every iterate
/// standardized on the working grid.
///
/// Atomic inputs stay atomic under finite convolution, so every entry is
/// `-inf` and the sequence is flagged vacuous.
pub fn classical_sequence(spec: &LawSpec, n_max: usize, grid: Grid) -> Result<EntropySequence> {
    assert!((1..=8).contains(&n_max));
    let (std_spec, _) = standardize_spec(spec)?;
    if std_spec.contains_atoms() {
        return Ok(EntropySequence::from_values(
            SequenceKind::Classical,
            std_spec,
            alloc::vec![f64::NEG_INFINITY; n_max],
        ));
    }
    let d = realize(&std_spec, grid)?;
    let mut nu = d.clone();
    let mut values = Vec::with_capacity(n_max);
    values.push(entropy(&nu));
    for n in 1..n_max {
        let nf = n as f64;
        let shrunk = dilate(&nu, (nf / (nf + 1.0)).sqrt())?;
        let fresh = dilate(&d, 1.0 / (nf + 1.0).sqrt())?;
        nu = resample(&convolve(&shrunk, &fresh)?, grid)?;
        values.push(entropy(&nu));
    }
    Ok(EntropySequence::from_values(SequenceKind::Classical, std_spec, values))
}

/// Free entropy sequence `chi(free_power(mu, n))`, `n = 1..=N`, of a
/// standardized law; atomic inputs have `chi_1 = -inf` and become absolutely
/// continuous from `n = 2` on.
pub fn free_sequence(spec: &LawSpec, n_max: usize, grid: Grid) -> Result<EntropySequence> {
    assert!((1..=8).contains(&n_max));
    let (std_spec, _) = standardize_spec(spec)?;
    let law = law_from_spec(&std_spec, grid)?;
    let mut values = Vec::with_capacity(n_max);
    values.push(free_entropy(&law));
    for n in 2..=n_max {
        let d = free_power(&law, n)?;
        values.push(free_entropy(&Law::Grid(d)));
    }
    Ok(EntropySequence::from_values(SequenceKind::Free, std_spec, values))
}

/// Consistency report between sequence plateaus and the equality-case
/// characterization test on the originating law.
#[derive(Debug, Clone)]
pub struct EqualityReport {
    /// Per delta index: both neighbors finite and `|delta| < tol`.
    pub plateaus: Vec<bool>,
    /// Verdict of the gaussianity (classical) / semicircularity (free) test
    /// on the standardized input law.
    pub test_pass: bool,
    /// A plateau co-occurs with a PASS and a PASS with all-plateaus.
    pub consistent: bool,
    /// The sequence was identically `-inf`; the theorem is silent.
    pub vacuous: bool,
}

/// Checks the equality dichotomy of the monotonicity theorems: entropy
/// plateaus at tolerance `tol` must co-occur with the law being Gaussian
/// (classical) resp. semicircular (free) at the same tolerance.
pub fn equality_detector(seq: &EntropySequence, tol: f64, grid: Grid) -> Result<EqualityReport> {
    assert!(tol > 0.0);
    if seq.vacuous {
        return Ok(EqualityReport {
            plateaus: alloc::vec![false; seq.deltas.len()],
            test_pass: false,
            consistent: true,
            vacuous: true,
        });
    }
    let plateaus: Vec<bool> = seq
        .deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            seq.values[i].is_finite() && seq.values[i + 1].is_finite() && d.abs() < tol
        })
        .collect();
    let test_pass = if seq.spec.contains_atoms() {
        // an atomic law is neither Gaussian nor semicircular
        false
    } else {
        let d = realize(&seq.spec, grid)?;
        match seq.kind {
            SequenceKind::Classical => gaussianity_test(&d, tol).pass,
            SequenceKind::Free => semicircularity_test(&d, tol).pass,
        }
    };
    let any_plateau = plateaus.iter().any(|&p| p);
    let all_plateau = !plateaus.is_empty() && plateaus.iter().all(|&p| p);
    let consistent = (!any_plateau || test_pass) && (!test_pass || all_plateau);
    Ok(EqualityReport { plateaus, test_pass, consistent, vacuous: false })
}

/// Coefficients `(a_j, b_j)` of the superadditivity inequality:
/// `sum a_j^2 = 1` and `sum b_j sqrt(1 - a_j^2) = 1`.
#[derive(Debug, Clone)]
pub struct WeightVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl WeightVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(Error::HypothesisViolated);
        }
        let sum_a2: f64 = a.iter().map(|x| x * x).sum();
        if (sum_a2 - 1.0).abs() > 1e-12 || a.iter().any(|&x| 1.0 - x * x <= 0.0) {
            return Err(Error::HypothesisViolated);
        }
        let sum_b: f64 = a.iter().zip(&b).map(|(&x, &y)| y * (1.0 - x * x).sqrt()).sum();
        if (sum_b - 1.0).abs() > 1e-12 {
            return Err(Error::HypothesisViolated);
        }
        Ok(WeightVector { a, b })
    }

    /// The symmetric choice over `n + 1` summands:
    /// `a_j = 1/sqrt(n+1)`, `b_j = sqrt(1 - a_j^2)/n`.
    pub fn symmetric(n: usize) -> Self {
        assert!(n >= 1);
        let len = n + 1;
        let a = 1.0 / (len as f64).sqrt();
        let b = (1.0 - a * a).sqrt() / n as f64;
        WeightVector { a: alloc::vec![a; len], b: alloc::vec![b; len] }
    }
}

/// Law of the weighted sum `sum_j a_j x_j` of (freely) independent copies of
/// the grid law `d`; weights with `|a_j| < 1e-12` contribute a point mass at
/// zero and are skipped.
fn weighted_sum(d: &GridDensity, weights: &[f64], kind: SequenceKind) -> Result<GridDensity> {
    let grid = d.grid;
    let mut acc: Option<GridDensity> = None;
    for &a in weights {
        if a.abs() < 1e-12 {
            continue;
        }
        let part = dilate(d, a)?;
        acc = Some(match acc {
            None => part,
            Some(prev) => match kind {
                SequenceKind::Classical => resample(&convolve(&prev, &part)?, grid)?,
                SequenceKind::Free => free_convolve(&Law::Grid(prev), &Law::Grid(part))?,
            },
        });
    }
    acc.ok_or(Error::DegenerateLaw)
}

/// Fisher information of the matching kind.
fn fisher_of(d: &GridDensity, kind: SequenceKind) -> Result<f64> {
    match kind {
        SequenceKind::Classical => fisher(d),
        SequenceKind::Free => Ok(free_fisher(d)?.0),
    }
}

/// Superadditivity of (free) Fisher information along weighted sums:
/// `Phi(sum_j a_j x_j) <= n sum_j b_j^2 Phi(sum_{k != j} a_k x_k / sqrt(1 - a_j^2))`.
///
/// Returns `(lhs, rhs, holds)` with `holds = (lhs <= rhs + 2e-3)`.
pub fn fisher_superadditivity_check(
    spec: &LawSpec,
    w: &WeightVector,
    kind: SequenceKind,
    grid: Grid,
) -> Result<(f64, f64, bool)> {
    let (std_spec, _) = standardize_spec(spec)?;
    let d = realize(&std_spec, grid)?;
    let n = w.a.len() - 1;
    let lhs = fisher_of(&weighted_sum(&d, &w.a, kind)?, kind)?;
    let mut rhs = 0.0;
    for j in 0..w.a.len() {
        let scale = (1.0 - w.a[j] * w.a[j]).sqrt();
        let rest: Vec<f64> = w
            .a
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &a)| a / scale)
            .collect();
        let phi = fisher_of(&weighted_sum(&d, &rest, kind)?, kind)?;
        rhs += w.b[j] * w.b[j] * phi;
    }
    rhs *= n as f64;
    Ok((lhs, rhs, lhs <= rhs + 2e-3))
}

/// Concavity-type bound for free entropy along weighted free sums:
/// `chi(sum_j a_j x_j) >= sum_j ((1 - a_j^2)/n) chi(sum_{k != j} a_k x_k / sqrt(1 - a_j^2))`.
///
/// Returns `(lhs, rhs, holds)` with `holds = (lhs >= rhs - 2e-3)`.
pub fn entropy_convexity_check(
    spec: &LawSpec,
    a: &[f64],
    grid: Grid,
) -> Result<(f64, f64, bool)> {
    let sum_a2: f64 = a.iter().map(|x| x * x).sum();
    if a.len() < 2 || (sum_a2 - 1.0).abs() > 1e-12 {
        return Err(Error::HypothesisViolated);
    }
    let (std_spec, _) = standardize_spec(spec)?;
    let d = realize(&std_spec, grid)?;
    let n = (a.len() - 1) as f64;
    let lhs = free_entropy(&Law::Grid(weighted_sum(&d, a, SequenceKind::Free)?));
    let mut rhs = 0.0;
    for j in 0..a.len() {
        let rest_sq = 1.0 - a[j] * a[j];
        if rest_sq <= 1e-12 {
            continue; // zero coefficient in the bound
        }
        let scale = rest_sq.sqrt();
        let rest: Vec<f64> = a
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &v)| v / scale)
            .collect();
        let chi = free_entropy(&Law::Grid(weighted_sum(&d, &rest, SequenceKind::Free)?));
        rhs += rest_sq / n * chi;
    }
    Ok((lhs, rhs, lhs >= rhs - 2e-3))
}

/// Free stability probe: distance between a law and the normalized free
/// convolution square of itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    NotStable,
}

/// KS distance between `free_power(law, 2)` and `law`; STABLE iff `< 0.01`.
pub fn stability_check(law: &Law) -> Result<(f64, StabilityVerdict)> {
    let squared = free_power(law, 2)?;
    let dist = distance(&Law::Grid(squared), law, Metric::KS)?;
    let verdict = if dist < 0.01 {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::NotStable
    };
    Ok((dist, verdict))
}
