//! Cauchy transforms G(z) = integral d mu(t) / (z - t) and Stieltjes
//! inversion.

use alloc::vec::Vec;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::grid::Grid;
use crate::measures::{AtomicLaw, GridDensity, Law};
use crate::{Error, Result};

/// Node radius around `Re z` treated with the exact piecewise-linear
/// Stieltjes integral; everything further away uses the pole sum.
const NEAR_WINDOW: isize = 60;

/// Evaluates G(z) for a law, with closed forms where available.
#[derive(Debug, Clone)]
pub enum CauchyEvaluator {
    Grid(GridCauchy),
    Atoms(AtomicLaw),
    Semicircle { mean: f64, variance: f64 },
}

impl CauchyEvaluator {
    pub fn from_law(law: &Law) -> Self {
        match law {
            Law::Grid(d) => CauchyEvaluator::Grid(GridCauchy::new(d)),
            Law::Atoms(a) => CauchyEvaluator::Atoms(a.clone()),
        }
    }

    pub fn semicircle(mean: f64, variance: f64) -> Self {
        CauchyEvaluator::Semicircle { mean, variance }
    }

    /// G(z) for Im z > 0.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::BelowAxis);
        }
        Ok(self.eval_upper(z))
    }

    /// Like [`eval`](Self::eval) but assumes `Im z > 0` (hot path for
    /// fixed-point iterations).
    pub(crate) fn eval_upper(&self, z: Complex64) -> Complex64 {
        self.eval_with_deriv(z).0
    }

    /// `(G(z), G'(z))` for `Im z > 0`; the derivative feeds Newton steps in
    /// the subordination solves.
    pub(crate) fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            CauchyEvaluator::Grid(g) => g.eval_with_deriv(z),
            CauchyEvaluator::Atoms(a) => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut dacc = Complex64::new(0.0, 0.0);
                for &(pos, w) in &a.atoms {
                    let r = 1.0 / (z - pos);
                    acc += w * r;
                    dacc -= w * r * r;
                }
                (acc, dacc)
            }
            CauchyEvaluator::Semicircle { mean, variance } => {
                let g = *variance;
                let zc = z - mean;
                let r = 2.0 * g.sqrt();
                // sqrt(zc - r) * sqrt(zc + r) picks the branch with
                // G ~ 1/z at infinity for Im z > 0
                let root = (zc - r).sqrt() * (zc + r).sqrt();
                ((zc - root) / (2.0 * g), (1.0 - zc / root) / (2.0 * g))
            }
        }
    }
}

/// Pole-sum / exact-near-field hybrid evaluator for a grid density.
///
/// Far from `Re z` the cell masses act as point poles (midpoint rule, which
/// is highly accurate there); the cells within [`NEAR_WINDOW`] nodes are
/// integrated exactly against the piecewise-linear interpolant, which keeps
/// the evaluation stable arbitrarily close to the real axis.
#[derive(Debug, Clone)]
pub struct GridCauchy {
    grid: Grid,
    values: Vec<f64>,
    masses: Vec<f64>,
}

impl GridCauchy {
    pub fn new(d: &GridDensity) -> Self {
        let masses = d.values.iter().map(|&p| p * d.grid.dx).collect();
        GridCauchy { grid: d.grid, values: d.values.clone(), masses }
    }

    fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let n = self.grid.count as isize;
        let center = ((z.re - self.grid.x0) / self.grid.dx) as isize;
        let a = (center - NEAR_WINDOW).clamp(0, n - 1) as usize;
        let b = (center + NEAR_WINDOW).clamp(0, n - 1) as usize;
        let near_active = center >= -NEAR_WINDOW && center <= n - 1 + NEAR_WINDOW && b > a;

        let mut acc = Complex64::new(0.0, 0.0);
        let mut dacc = Complex64::new(0.0, 0.0);
        let (lo, hi) = if near_active { (a, b) } else { (1, 0) };
        for (j, &m) in self.masses.iter().enumerate() {
            if near_active && j >= lo && j <= hi {
                continue;
            }
            if m != 0.0 {
                let r = 1.0 / (z - self.grid.node(j));
                acc += m * r;
                dacc -= m * r * r;
            }
        }
        if near_active {
            let (nf, dnf) = self.near_field(z, lo, hi);
            acc += nf;
            dacc += dnf;
        }
        (acc, dacc)
    }

    /// Exact Stieltjes transform (and its derivative) of the linear
    /// interpolant on the cells `[t_lo, t_hi]`, plus constant-density
    /// half-cells at both ends so the covered region tiles against the
    /// far-field midpoint cells.
    fn near_field(&self, z: Complex64, lo: usize, hi: usize) -> (Complex64, Complex64) {
        let dx = self.grid.dx;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut dacc = Complex64::new(0.0, 0.0);
        for j in lo..hi {
            let tj = self.grid.node(j);
            let pj = self.values[j];
            let pj1 = self.values[j + 1];
            if pj == 0.0 && pj1 == 0.0 {
                continue;
            }
            let slope = (pj1 - pj) / dx;
            let ra = 1.0 / (z - tj);
            let rb = 1.0 / (z - (tj + dx));
            let l = ((z - tj) * rb).ln();
            acc += pj * l + slope * ((z - tj) * l - dx);
            dacc += pj * (ra - rb) + slope * (l + (z - tj) * (ra - rb));
        }
        let t_lo = self.grid.node(lo);
        if self.values[lo] != 0.0 {
            let p = self.values[lo];
            acc += p * ((z - (t_lo - 0.5 * dx)) / (z - t_lo)).ln();
            dacc += p * (1.0 / (z - (t_lo - 0.5 * dx)) - 1.0 / (z - t_lo));
        }
        let t_hi = self.grid.node(hi);
        if self.values[hi] != 0.0 {
            let p = self.values[hi];
            acc += p * ((z - t_hi) / (z - (t_hi + 0.5 * dx))).ln();
            dacc += p * (1.0 / (z - t_hi) - 1.0 / (z - (t_hi + 0.5 * dx)));
        }
        (acc, dacc)
    }
}

/// Top-level transform: G(z) of a law at a single point.
pub fn cauchy(law: &Law, z: Complex64) -> Result<Complex64> {
    CauchyEvaluator::from_law(law).eval(z)
}

/// Stieltjes inversion `p(x) = -Im G(x + i eps) / pi` on `grid`, clipped to
/// nonnegative values and renormalized.
pub fn density_from_cauchy(g: &CauchyEvaluator, grid: Grid, eps: f64) -> Result<GridDensity> {
    assert!(eps > 0.0);
    let inv_pi = 1.0 / core::f64::consts::PI;
    let vals: Vec<f64> = grid
        .nodes()
        .map(|x| (-g.eval_upper(Complex64::new(x, eps)).im * inv_pi).max(0.0))
        .collect();
    let mass = grid.integrate(&vals);
    if (mass - 1.0).abs() > 1e-2 {
        return Err(Error::MassLoss { factor: mass });
    }
    GridDensity::new(grid, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{distance, realize, LawSpec, Metric};

    fn wg() -> Grid {
        Grid::default_working()
    }

    #[test]
    fn semicircle_closed_form_at_2i() {
        let g = CauchyEvaluator::semicircle(0.0, 1.0);
        let got = g.eval(Complex64::new(0.0, 2.0)).unwrap();
        // (z - sqrt(z^2 - 4))/2 at z = 2i is i (1 - sqrt 2)
        let want = Complex64::new(0.0, 1.0 - core::f64::consts::SQRT_2);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn grid_quadrature_matches_semicircle_closed_form() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let g = CauchyEvaluator::from_law(&Law::Grid(d));
        let exact = CauchyEvaluator::semicircle(0.0, 1.0);
        for &(x, y) in &[(0.0, 2.0), (1.3, 0.5), (-0.4, 0.01), (3.0, 0.001), (0.7, 1e-6)] {
            let z = Complex64::new(x, y);
            let diff = (g.eval(z).unwrap() - exact.eval(z).unwrap()).norm();
            assert!(diff < 1e-4, "z={z} diff={diff:.2e}");
        }
    }

    #[test]
    fn atoms_at_i() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let got = cauchy(&a, Complex64::new(0.0, 1.0)).unwrap();
        // (1/(i+1) + 1/(i-1))/2 = -i/2
        assert!((got - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn one_over_z_asymptotics() {
        let z = Complex64::new(0.0, 1e3);
        let laws = [
            Law::Grid(realize(&LawSpec::gaussian(0.0, 1.0), wg()).unwrap()),
            Law::Atoms(AtomicLaw::rademacher()),
        ];
        for law in &laws {
            let g = cauchy(law, z).unwrap();
            let inv_z = 1.0 / z;
            assert!((g - inv_z).norm() < 1e-4 * inv_z.norm());
        }
    }

    #[test]
    fn imaginary_part_is_negative_in_upper_half_plane() {
        let d = realize(&LawSpec::uniform(-1.0, 1.0), wg()).unwrap();
        let g = CauchyEvaluator::from_law(&Law::Grid(d));
        for &(x, y) in &[(0.0, 0.5), (0.9, 1e-4), (-2.0, 3.0), (15.0, 1e-2)] {
            assert!(g.eval(Complex64::new(x, y)).unwrap().im < 0.0);
        }
    }

    #[test]
    fn below_axis_rejected() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        assert_eq!(cauchy(&a, Complex64::new(0.0, -1.0)).unwrap_err(), Error::BelowAxis);
        assert_eq!(cauchy(&a, Complex64::new(1.0, 0.0)).unwrap_err(), Error::BelowAxis);
    }

    #[test]
    fn inversion_round_trip_semicircle() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let g = CauchyEvaluator::from_law(&Law::Grid(d.clone()));
        let back = density_from_cauchy(&g, wg(), 1e-4).unwrap();
        let l1 = distance(&Law::Grid(back), &Law::Grid(d), Metric::L1).unwrap();
        assert!(l1 < 1e-3, "l1={l1}");
    }

    #[test]
    fn inversion_round_trip_gaussian() {
        let d = realize(&LawSpec::gaussian(0.0, 1.0), wg()).unwrap();
        let g = CauchyEvaluator::from_law(&Law::Grid(d.clone()));
        let back = density_from_cauchy(&g, wg(), 1e-4).unwrap();
        let l1 = distance(&Law::Grid(back), &Law::Grid(d), Metric::L1).unwrap();
        assert!(l1 < 1e-3, "l1={l1}");
    }

    #[test]
    fn inversion_error_grows_with_eps() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let g = CauchyEvaluator::from_law(&Law::Grid(d.clone()));
        let err = |eps: f64| {
            let back = density_from_cauchy(&g, wg(), eps).unwrap();
            distance(&Law::Grid(back), &Law::Grid(d.clone()), Metric::L1).unwrap()
        };
        assert!(err(1e-1) > err(1e-4));
    }
}
