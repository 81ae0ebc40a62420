//! Conjugate variables (free score), free Fisher information and the
//! semicircularity test.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::grid::Grid;
use crate::measures::{distance, realize, GridDensity, Law, LawSpec, Metric};
use crate::{Error, Result};

/// Relative density floor defining the support mask of a conjugate variable.
const MASK_FLOOR: f64 = 1e-10;

/// The conjugate variable `J = 2 pi H[p]` (twice the principal-value
/// integral of `p(t)/(x - t)`), sampled on the density's grid.
#[derive(Debug, Clone)]
pub struct ConjugateVariable {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ConjugateVariable {
    /// `<J, g>` in `L^2(mu)`.
    pub fn inner(&self, density: &GridDensity, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.count {
            if self.mask[i] {
                acc += self.values[i] * g(self.grid.node(i)) * density.values[i];
            }
        }
        acc * self.grid.dx
    }
}

fn mask_runs(values: &[f64]) -> Vec<(usize, usize)> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let floor = MASK_FLOOR * peak;
    let mut runs = Vec::new();
    let mut start = None;
    for i in 0..=values.len() {
        let above = i < values.len() && values[i] > floor;
        match (above, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= 5 {
                    runs.push((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Conjugate variable of a grid density.
///
/// Principal value per support run by singularity subtraction:
/// `PV int p/(x_i - t) = int (p(t) - p_i)/(x_i - t) + p_i log((x_i-A)/(B-x_i))`,
/// with the first integrand regular at `t = x_i` (value `-p'(x_i)`), so the
/// midpoint rule applies everywhere; other runs contribute regular sums.
pub fn conjugate(d: &GridDensity) -> Result<ConjugateVariable> {
    let runs = mask_runs(&d.values);
    let dx = d.grid.dx;
    let mut mask = vec![false; d.grid.count];
    let mut values = vec![0.0; d.grid.count];
    let mut mask_mass = 0.0;
    for &(lo, hi) in &runs {
        mask_mass += dx * d.values[lo..hi].iter().sum::<f64>();
    }
    if mask_mass < 0.99 {
        return Err(Error::SupportTooThin { mask_mass });
    }
    for &(lo, hi) in &runs {
        let a_edge = d.grid.node(lo) - 0.5 * dx;
        let b_edge = d.grid.node(hi - 1) + 0.5 * dx;
        for i in lo..hi {
            let xi = d.grid.node(i);
            let pi = d.values[i];
            let mut pv = 0.0;
            // own run, singularity subtracted
            for j in lo..hi {
                if j != i {
                    pv += (d.values[j] - pi) / (xi - d.grid.node(j));
                }
            }
            let deriv = if i == lo {
                (d.values[lo + 1] - pi) / dx
            } else if i == hi - 1 {
                (pi - d.values[hi - 2]) / dx
            } else {
                (d.values[i + 1] - d.values[i - 1]) / (2.0 * dx)
            };
            pv -= deriv;
            pv *= dx;
            pv += pi * ((xi - a_edge) / (b_edge - xi)).ln();
            // other runs are regular
            for &(lo2, hi2) in &runs {
                if lo2 == lo {
                    continue;
                }
                let mut acc = 0.0;
                for j in lo2..hi2 {
                    acc += d.values[j] / (xi - d.grid.node(j));
                }
                pv += acc * dx;
            }
            values[i] = 2.0 * pv;
            mask[i] = true;
        }
    }
    Ok(ConjugateVariable { grid: d.grid, values, mask })
}

/// Free Fisher information two ways: `phi_primary = ||J||^2 in L^2(mu)` and
/// the cubic formula `phi_cubic = (4 pi^2 / 3) int p^3`; the two agree for
/// smooth densities and cross-validate the Hilbert transform.
pub fn free_fisher(d: &GridDensity) -> Result<(f64, f64)> {
    let j = conjugate(d)?;
    let mut primary = 0.0;
    for i in 0..d.grid.count {
        if j.mask[i] {
            primary += j.values[i] * j.values[i] * d.values[i];
        }
    }
    primary *= d.grid.dx;
    let pi = core::f64::consts::PI;
    let cubic = (4.0 * pi * pi / 3.0)
        * d.grid.dx
        * d.values.iter().map(|&p| p * p * p).sum::<f64>();
    Ok((primary, cubic))
}

/// Outcome of the semicircularity equality-case test.
#[derive(Debug, Clone, Copy)]
pub struct SemicircularityReport {
    /// `sup |J(x) - x|` over the central 90% of the mass.
    pub sup_j_linearity: f64,
    /// KS distance to the standard semicircle.
    pub ks: f64,
    pub pass: bool,
}

/// Tests whether a standardized grid law is (numerically) the standard
/// semicircle: the conjugate variable must be linear (`J(x) = x`, the
/// free-probability equality case) on the central 90% of the mass within
/// `tol`, and the KS distance to semicircle(0,1) must be below `5 * tol`.
pub fn semicircularity_test(d: &GridDensity, tol: f64) -> SemicircularityReport {
    let reference = realize(&LawSpec::semicircle(0.0, 1.0), d.grid)
        .expect("reference semicircle fits any reasonable working grid");
    let ks = distance(&Law::Grid(d.clone()), &Law::Grid(reference), Metric::KS)
        .expect("same grid");
    let sup = match conjugate(d) {
        Ok(j) => {
            let lo = d.quantile(0.05);
            let hi = d.quantile(0.95);
            let mut worst = 0.0f64;
            for i in 0..d.grid.count {
                let x = d.grid.node(i);
                if j.mask[i] && x >= lo && x <= hi {
                    worst = worst.max((j.values[i] - x).abs());
                }
            }
            worst
        }
        Err(_) => f64::INFINITY,
    };
    SemicircularityReport { sup_j_linearity: sup, ks, pass: sup < tol && ks < 5.0 * tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::subordination::{free_power, semicircular_flow};
    use crate::measures::AtomicLaw;

    fn wg() -> Grid {
        Grid::default_working()
    }

    fn sc(gamma: f64) -> GridDensity {
        realize(&LawSpec::semicircle(0.0, gamma), wg()).unwrap()
    }

    #[test]
    fn conjugate_of_unit_semicircle_is_identity() {
        let d = sc(1.0);
        let j = conjugate(&d).unwrap();
        for i in 0..d.grid.count {
            let x = d.grid.node(i);
            if j.mask[i] && x.abs() <= 1.8 {
                assert!((j.values[i] - x).abs() < 5e-3, "x={x} J={}", j.values[i]);
            }
        }
    }

    #[test]
    fn conjugate_scales_with_variance() {
        let d = sc(2.0);
        let j = conjugate(&d).unwrap();
        for i in 0..d.grid.count {
            let x = d.grid.node(i);
            if j.mask[i] && x.abs() <= 2.5 {
                assert!((j.values[i] - x / 2.0).abs() < 5e-3, "x={x} J={}", j.values[i]);
            }
        }
    }

    #[test]
    fn conjugate_normalizations() {
        let d = sc(1.0);
        let j = conjugate(&d).unwrap();
        assert!(j.inner(&d, |_| 1.0).abs() < 1e-3);
        assert!((j.inner(&d, |x| x) - 1.0).abs() < 2e-2);
    }

    #[test]
    fn conjugate_of_symmetric_law_is_odd() {
        let d = sc(1.0);
        let j = conjugate(&d).unwrap();
        let n = d.grid.count;
        // node i reflects to node n - i on a [-w, w) grid
        for i in 1..n {
            if j.mask[i] && j.mask[n - i] {
                assert!((j.values[i] + j.values[n - i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fisher_of_semicircles() {
        let (p1, c1) = free_fisher(&sc(1.0)).unwrap();
        assert!((p1 - 1.0).abs() < 1e-3, "phi={p1}");
        assert!((c1 - 1.0).abs() < 1e-3, "cubic={c1}");
        let (p2, _) = free_fisher(&sc(2.0)).unwrap();
        assert!((p2 - 0.5).abs() < 1e-3, "phi={p2}");
    }

    #[test]
    fn fisher_cross_formula_on_flowed_atoms() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let d = semicircular_flow(&a, 1.0).unwrap();
        let (p, c) = free_fisher(&d).unwrap();
        assert!((p - c).abs() / c < 1e-3, "primary={p} cubic={c}");
    }

    #[test]
    fn free_cramer_rao() {
        let laws = [sc(1.0), sc(2.0), semicircular_flow(&Law::Atoms(AtomicLaw::rademacher()), 1.0).unwrap()];
        for d in &laws {
            let (p, _) = free_fisher(d).unwrap();
            assert!(p >= 1.0 / d.variance() - 1e-4, "phi={p} var={}", d.variance());
        }
    }

    #[test]
    fn semicircularity_verdicts() {
        let tol = 1e-2;
        assert!(semicircularity_test(&sc(1.0), tol).pass);
        let arcsine = free_power(&Law::Atoms(AtomicLaw::rademacher()), 2).unwrap();
        assert!(!semicircularity_test(&arcsine, tol).pass);
        let gauss = realize(&LawSpec::gaussian(0.0, 1.0), wg()).unwrap();
        assert!(!semicircularity_test(&gauss, tol).pass);
    }
}
