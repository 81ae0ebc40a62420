//! Semicircular flow and free convolution powers via subordination fixed
//! points.
//!
//! Both operations reduce to solving, for each grid abscissa `z = x + i eps`,
//! a fixed-point equation whose map sends the upper half-plane into itself,
//! so damped iteration converges by the Denjoy-Wolff theorem; warm-starting
//! from the neighbouring abscissa keeps iteration counts low.

use alloc::vec::Vec;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::cauchy::CauchyEvaluator;
use crate::grid::Grid;
use crate::measures::{GridDensity, Law};
use crate::{Error, Result};

/// Imaginary height at which densities are read off by Stieltjes inversion.
const INVERSION_EPS: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-11;
const ITERATION_BUDGET: usize = 2000;
/// Cells whose density jump exceeds this fraction of the running peak get
/// cell-averaged by adaptive quadrature (spectral edges, near-singularities).
const REFINE_JUMP_FRACTION: f64 = 0.02;

/// Newton iteration on `F(w) = 0` where `f` returns `(F(w), F'(w))`.
///
/// Steps are trust-region-clamped and backtracked until |F| decreases, with
/// a damped-Picard fallback, so the iteration stays robust near spectral
/// edges where `F'` nearly vanishes. Iterates are clamped to `Im w >= floor`.
/// The residual |F| of the returned root is below
/// `RESIDUAL_TOL * max(1, |w|)`.
fn newton_solve(
    f: impl Fn(Complex64) -> (Complex64, Complex64),
    start: Complex64,
    floor: f64,
) -> Result<Complex64> {
    let mut w = if start.im > floor { start } else { Complex64::new(start.re, floor) };
    let (mut fv, mut fd) = f(w);
    let mut best = w;
    let mut best_residual = f64::INFINITY;
    let mut stagnant = 0;
    for _ in 0..ITERATION_BUDGET {
        let residual = fv.norm();
        if residual <= RESIDUAL_TOL * w.norm().max(1.0) {
            return Ok(w);
        }
        if residual < 0.999 * best_residual {
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if residual < best_residual {
            best_residual = residual;
            best = w;
        }
        // the hybrid grid evaluator is only piecewise continuous (its
        // near-field window shifts with Re w), which bounds the attainable
        // residual from below; accept a stagnated iterate that is already
        // far more accurate than the density discretization
        if stagnant >= 40 && best_residual <= 1e-6 * best.norm().max(1.0) {
            return Ok(best);
        }
        let mut step = if fd.norm() > 1e-300 { -fv / fd } else { -0.5 * fv };
        if step.norm() > 2.0 {
            step *= 2.0 / step.norm();
        }
        // backtrack until the residual actually decreases
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..10 {
            let mut cand = w + lambda * step;
            if cand.im < floor {
                cand.im = floor;
            }
            let (cfv, cfd) = f(cand);
            if cfv.norm() < residual {
                w = cand;
                fv = cfv;
                fd = cfd;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            // fixed-point map value: F(w) = w - map(w), so map(w) = w - F(w);
            // the damped map is a strict upper-half-plane contraction and
            // makes progress even where Newton's direction is unusable
            w += 0.5 * (-fv);
            if w.im < floor {
                w.im = floor;
            }
            let next = f(w);
            fv = next.0;
            fd = next.1;
        }
    }
    if best_residual <= 1e-6 * best.norm().max(1.0) {
        Ok(best)
    } else {
        Err(Error::NoConvergence { residual: best_residual })
    }
}

/// Solves the fixed point at `z`, falling back to continuation in the
/// evaluation height when the direct solve stalls.
///
/// Near spectral edges the fixed-point map at `Im z = eps` is almost
/// parabolic and both Newton and damped iteration can stall; the same map a
/// few decades higher in the half-plane is strongly contractive, and the
/// root moves continuously with the height, so walking the height down in
/// decade steps keeps every stage warm-started close to its root.
fn solve_robust(
    f: &impl Fn(Complex64, Complex64) -> (Complex64, Complex64),
    z: Complex64,
    warm: Complex64,
) -> Result<Complex64> {
    if let Ok(w) = newton_solve(|w| f(z, w), warm, z.im) {
        return Ok(w);
    }
    let mut w = warm;
    for j in (0..=4).rev() {
        let zj = Complex64::new(z.re, z.im * 10f64.powi(j));
        w = newton_solve(|w| f(zj, w), w, zj.im)?;
    }
    Ok(w)
}

/// Composite adaptive Simpson average of `f` over `[a, b]`, robust to
/// integrable edge singularities.
fn adaptive_cell_average(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
) -> Result<f64> {
    fn recurse(
        f: &mut impl FnMut(f64) -> Result<f64>,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        depth: usize,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() < 1e-10 {
            return Ok(left + right);
        }
        Ok(recurse(f, a, fa, m, fm, lm, flm, left, depth - 1)?
            + recurse(f, m, fm, b, fb, rm, frm, right, depth - 1)?)
    }
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fb = f(b)?;
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Ok(recurse(f, a, fa, b, fb, m, fm, whole, 24)? / (b - a))
}

/// Inverts a subordinated Cauchy transform on `grid`: pass one solves the
/// fixed point at every node, pass two replaces node values in steep cells
/// by adaptive cell averages so that near-singular spectral edges carry
/// their full mass.
fn invert_subordinated(
    grid: Grid,
    density_at: &mut impl FnMut(f64, Complex64) -> Result<(f64, Complex64)>,
    warm0: Complex64,
) -> Result<GridDensity> {
    let mut vals = Vec::with_capacity(grid.count);
    let mut roots = Vec::with_capacity(grid.count);
    let mut warm = warm0;
    for x in grid.nodes() {
        let (p, w) = density_at(x, warm)?;
        warm = Complex64::new(w.re, w.im);
        vals.push(p);
        roots.push(w);
    }
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    let jump = REFINE_JUMP_FRACTION * peak;
    let h = grid.dx;
    for i in 0..grid.count {
        let steep_left = i > 0 && (vals[i] - vals[i - 1]).abs() > jump;
        let steep_right = i + 1 < grid.count && (vals[i + 1] - vals[i]).abs() > jump;
        if steep_left || steep_right {
            let x = grid.node(i);
            // chain the warm start through the cell so sub-points next to a
            // steep feature start from a nearby converged root
            let mut warm_cell = roots[i];
            let mut f = |u: f64| {
                density_at(u, warm_cell).map(|(p, w)| {
                    warm_cell = w;
                    p
                })
            };
            vals[i] = adaptive_cell_average(&mut f, x - 0.5 * h, x + 0.5 * h)?;
        }
    }
    GridDensity::new(grid, vals)
}

/// Law of `x + sqrt(t) s` with `s` a standard semicircular element freely
/// independent of `x`: per abscissa, solve `w = z - t G_mu(w)` by Newton's
/// method and read off `G_t(z) = G_mu(w)`.
pub fn semicircular_flow(law: &Law, t: f64) -> Result<GridDensity> {
    assert!(t >= 0.0);
    let grid = match law {
        Law::Grid(d) => d.grid,
        Law::Atoms(_) => Grid::default_working(),
    };
    if t == 0.0 {
        return match law {
            Law::Grid(d) => Ok(d.clone()),
            Law::Atoms(_) => Err(Error::AtomicNotRealizable),
        };
    }
    let g_mu = CauchyEvaluator::from_law(law);
    let inv_pi = 1.0 / core::f64::consts::PI;
    let f = |z: Complex64, w: Complex64| {
        let (g, dg) = g_mu.eval_with_deriv(w);
        (w - z + t * g, Complex64::new(1.0, 0.0) + t * dg)
    };
    let mut density_at = |x: f64, warm: Complex64| {
        let w = solve_robust(&f, Complex64::new(x, INVERSION_EPS), warm)?;
        Ok(((-g_mu.eval_upper(w).im * inv_pi).max(0.0), w))
    };
    invert_subordinated(grid, &mut density_at, Complex64::new(grid.x0, 1.0))
}

/// Law of `(x_1 + ... + x_n)/sqrt(n)` for freely independent copies of a
/// standardized law.
///
/// The n-fold free self-convolution is solved in one subordination fixed
/// point, `omega = z + (n-1) h(omega)` with `h = 1/G - id`, which gives
/// `G_{mu^(+n)}(z) = G_mu(omega)`; evaluating at `sqrt(n) z` and scaling by
/// `sqrt(n)` performs the normalization.
pub fn free_power(law: &Law, n: usize) -> Result<GridDensity> {
    assert!(n >= 1);
    let grid = match law {
        Law::Grid(d) => d.grid,
        Law::Atoms(_) => Grid::default_working(),
    };
    if n == 1 {
        return match law {
            Law::Grid(d) => Ok(d.clone()),
            Law::Atoms(_) => Err(Error::AtomicNotRealizable),
        };
    }
    let g_mu = CauchyEvaluator::from_law(law);
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let inv_pi = 1.0 / core::f64::consts::PI;
    let f = |z: Complex64, w: Complex64| {
        let (g, dg) = g_mu.eval_with_deriv(w);
        // F(w) = w - z - (n-1) (1/G(w) - w); F' = n + (n-1) G'/G^2
        let inv_g = 1.0 / g;
        (
            w - z - (nf - 1.0) * (inv_g - w),
            Complex64::new(nf, 0.0) + (nf - 1.0) * dg * inv_g * inv_g,
        )
    };
    let mut density_at = |x: f64, warm: Complex64| {
        // G_{nu_n}(x + i eps) = sqrt(n) G_{mu^(+n)}(sqrt(n) (x + i eps))
        let z = sqrt_n * Complex64::new(x, INVERSION_EPS);
        let omega = solve_robust(&f, z, warm)?;
        Ok(((-sqrt_n * g_mu.eval_upper(omega).im * inv_pi).max(0.0), omega))
    };
    invert_subordinated(grid, &mut density_at, Complex64::new(sqrt_n * grid.x0, 1.0))
}

/// Free additive convolution `a ⊞ b` of two (possibly atomic) laws.
///
/// Uses the two-sided subordination system: with `h(w) = 1/G(w) - w`, the
/// second subordination function solves the one-variable fixed point
/// `omega = z + h_a(z + h_b(omega))` and the convolution's Cauchy transform
/// is `G_b(omega)`.
pub fn free_convolve(a: &Law, b: &Law) -> Result<GridDensity> {
    let grid = match (a, b) {
        (Law::Grid(d), _) | (_, Law::Grid(d)) => d.grid,
        _ => Grid::default_working(),
    };
    let g_a = CauchyEvaluator::from_law(a);
    let g_b = CauchyEvaluator::from_law(b);
    let inv_pi = 1.0 / core::f64::consts::PI;
    let f = |z: Complex64, w: Complex64| {
        let (gb, dgb) = g_b.eval_with_deriv(w);
        let inv_gb = 1.0 / gb;
        let u = z + inv_gb - w; // z + h_b(w)
        let du = -dgb * inv_gb * inv_gb - 1.0; // h_b'(w)
        let (ga, dga) = g_a.eval_with_deriv(u);
        let inv_ga = 1.0 / ga;
        // F(w) = w - z - h_a(u); F' = 1 - h_a'(u) h_b'(w)
        (
            w - z - (inv_ga - u),
            Complex64::new(1.0, 0.0) - (-dga * inv_ga * inv_ga - 1.0) * du,
        )
    };
    let mut density_at = |x: f64, warm: Complex64| {
        let omega = solve_robust(&f, Complex64::new(x, INVERSION_EPS), warm)?;
        Ok(((-g_b.eval_upper(omega).im * inv_pi).max(0.0), omega))
    };
    invert_subordinated(grid, &mut density_at, Complex64::new(grid.x0, 1.0))
}
