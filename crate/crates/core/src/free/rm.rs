//! Monte Carlo oracle for free convolutions: spectra of sums of randomly
//! rotated diagonal matrices.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::linalg::{add_conjugated_diagonal, haar_q_from_gaussian, symmetric_eigenvalues};
use crate::measures::{GridDensity, Law};
use crate::Result;

/// Pooled eigenvalue sample of `(A_1 + Q_2 A_2 Q_2^T + ... ) / sqrt(n)`
/// over independent trials.
#[derive(Debug, Clone)]
pub struct EmpiricalSpectrum {
    /// All eigenvalues across trials, ascending.
    pub eigenvalues: Vec<f64>,
    pub matrix_size: usize,
    pub trials: usize,
}

impl EmpiricalSpectrum {
    /// KS distance of the pooled sample against a reference CDF.
    ///
    /// Handles tied samples and reference jumps at sample points (atomic
    /// references) by comparing against the CDF's left limit below each
    /// distinct value.
    pub fn ks_against(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.eigenvalues.len() as f64;
        let mut worst = 0.0f64;
        let mut below = 0usize;
        let mut i = 0;
        while i < self.eigenvalues.len() {
            let x = self.eigenvalues[i];
            let mut after = i + 1;
            while after < self.eigenvalues.len() && self.eigenvalues[after] == x {
                after += 1;
            }
            let f_at = cdf(x);
            let f_left = cdf(x - 1e-9 * (1.0 + x.abs()));
            worst = worst.max((after as f64 / n - f_at).abs());
            worst = worst.max((below as f64 / n - f_left).abs());
            below = after;
            i = after;
        }
        worst
    }

    /// Histogram density of the pooled sample on `grid`.
    pub fn to_density(&self, grid: Grid) -> Result<GridDensity> {
        let mut counts = vec![0.0; grid.count];
        for &x in &self.eigenvalues {
            let i = ((x - grid.x0) / grid.dx + 0.5) as isize;
            if i >= 0 && (i as usize) < grid.count {
                counts[i as usize] += 1.0;
            }
        }
        let norm = 1.0 / (self.eigenvalues.len() as f64 * grid.dx);
        for c in counts.iter_mut() {
            *c *= norm;
        }
        GridDensity::new(grid, counts)
    }
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits, strictly inside (0, 1)
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform01(rng);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * libm::cos(2.0 * core::f64::consts::PI * u2)
}

fn sample_law(law: &Law, u: f64) -> f64 {
    match law {
        Law::Grid(d) => d.quantile(u),
        Law::Atoms(a) => {
            let mut acc = 0.0;
            for &(pos, w) in &a.atoms {
                acc += w;
                if u <= acc {
                    return pos;
                }
            }
            a.atoms[a.atoms.len() - 1].0
        }
    }
}

/// Spectra of `(A_1 + sum_i Q_i A_i Q_i^T) / sqrt(n)` with `A_i` diagonal
/// matrices of i.i.d. draws from `law` and `Q_i` independent Haar-orthogonal;
/// deterministic given `seed` (each trial derives its own stream).
pub fn rm_oracle(
    law: &Law,
    n: usize,
    size: usize,
    trials: usize,
    seed: u64,
) -> EmpiricalSpectrum {
    assert!(n >= 1 && size >= 500 && trials >= 1);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut eigenvalues = Vec::with_capacity(size * trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut s = vec![0.0; size * size];
        for summand in 0..n {
            let d: Vec<f64> = (0..size).map(|_| sample_law(law, uniform01(&mut rng))).collect();
            if summand == 0 {
                for (i, &v) in d.iter().enumerate() {
                    s[i * size + i] += v;
                }
            } else {
                let mut gauss: Vec<f64> =
                    (0..size * size).map(|_| standard_normal(&mut rng)).collect();
                let q = haar_q_from_gaussian(&mut gauss, size);
                add_conjugated_diagonal(&mut s, &q, &d, size);
            }
        }
        for v in s.iter_mut() {
            *v *= inv_sqrt_n;
        }
        eigenvalues.extend(symmetric_eigenvalues(&mut s, size));
    }
    eigenvalues.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    EmpiricalSpectrum { eigenvalues, matrix_size: size, trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{realize, AtomicLaw, LawSpec};

    #[test]
    fn n_one_reproduces_the_input_law() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let spec = rm_oracle(&a, 1, 500, 2, 7);
        assert_eq!(spec.eigenvalues.len(), 1000);
        let ks = spec.ks_against(|x| {
            if x < -1.0 {
                0.0
            } else if x < 1.0 {
                0.5
            } else {
                1.0
            }
        });
        assert!(ks < 0.02, "ks={ks}");
    }

    #[test]
    fn semicircle_input_stays_semicircular() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), Grid::default_working()).unwrap();
        let spec = rm_oracle(&Law::Grid(d), 2, 500, 4, 11);
        let ks = spec.ks_against(|x| LawSpec::semicircle(0.0, 1.0).cdf(x));
        assert!(ks < 0.03, "ks={ks}");
    }

    #[test]
    fn rademacher_free_square_is_arcsine() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let spec = rm_oracle(&a, 2, 500, 4, 3);
        let s2 = core::f64::consts::SQRT_2;
        let ks = spec.ks_against(|x: f64| {
            if x <= -s2 {
                0.0
            } else if x >= s2 {
                1.0
            } else {
                0.5 + libm::asin(x / s2) / core::f64::consts::PI
            }
        });
        assert!(ks < 0.03, "ks={ks}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let s1 = rm_oracle(&a, 2, 500, 1, 42);
        let s2 = rm_oracle(&a, 2, 500, 1, 42);
        assert_eq!(s1.eigenvalues, s2.eigenvalues);
        let s3 = rm_oracle(&a, 2, 500, 1, 43);
        assert_ne!(s1.eigenvalues, s3.eigenvalues);
    }
}
