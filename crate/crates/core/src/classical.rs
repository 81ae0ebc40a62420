//! Classical side: convolution, Gaussian heat flow, differential entropy,
//! score functions, Fisher information, the score/entropy flow formula and
//! Hermite machinery.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::fft::convolve_real;
use crate::grid::Grid;
use crate::measures::{realize, AtomicLaw, GridDensity, Law, LawSpec, Metric};
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.5066282746310002;

/// Relative density floor below which the score is left undefined.
const SCORE_FLOOR: f64 = 1e-12;

/// The score function `j = -rho'/rho` sampled on the density's grid.
///
/// Values are only meaningful where `mask` is set (density above the floor);
/// masked-out entries are stored as 0 and excluded from all integrals.
#[derive(Debug, Clone)]
pub struct ScoreFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ScoreFunction {
    /// `<j, g>` in `L^2(mu)`: integral of `j(x) g(x) rho(x)`.
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

/// Hermite expansion coefficients of a score function, index `m = 0..=M`.
#[derive(Debug, Clone)]
pub struct HermiteCoefficients {
    pub alpha: Vec<f64>,
}

impl HermiteCoefficients {
    /// Squared norm of the `m`-th basis polynomial under the standard
    /// Gaussian weight: `2^m m!`.
    pub fn basis_norm_sq(m: usize) -> f64 {
        let mut v = 1.0;
        for k in 1..=m {
            v *= 2.0 * k as f64;
        }
        v
    }

    pub fn max_abs_in(&self, range: core::ops::RangeInclusive<usize>) -> f64 {
        range
            .filter(|&m| m < self.alpha.len())
            .map(|m| self.alpha[m].abs())
            .fold(0.0, f64::max)
    }
}

/// Density of `X1 + X2` for independent summands given on step-aligned grids.
pub fn convolve(d1: &GridDensity, d2: &GridDensity) -> Result<GridDensity> {
    if (d1.grid.dx - d2.grid.dx).abs() > 1e-12 * d1.grid.dx {
        return Err(Error::GridMismatch);
    }
    let vals = convolve_real(&d1.values, &d2.values);
    let grid = Grid::new(d1.grid.x0 + d2.grid.x0, d1.grid.dx, vals.len());
    let scaled: Vec<f64> = vals.iter().map(|v| v * d1.grid.dx).collect();
    GridDensity::new(grid, scaled)
}

/// Resamples a density onto `target` (cubic interpolation, renormalized).
pub fn resample(d: &GridDensity, target: Grid) -> Result<GridDensity> {
    let vals: Vec<f64> = target
        .nodes()
        .map(|x| d.grid.interp_cubic(&d.values, x).max(0.0))
        .collect();
    GridDensity::new(target, vals)
}

/// Density of `a * X` resampled onto the same grid (`a != 0`; negative `a`
/// reflects).
pub fn dilate(d: &GridDensity, a: f64) -> Result<GridDensity> {
    assert!(a != 0.0);
    let vals: Vec<f64> = d
        .grid
        .nodes()
        .map(|x| d.grid.interp_cubic(&d.values, x / a).max(0.0) / a.abs())
        .collect();
    GridDensity::new(d.grid, vals)
}

fn gaussian_kernel(t: f64, dx: f64) -> (Vec<f64>, usize) {
    let sd = t.sqrt();
    let half = ((10.0 * sd / dx).ceil() as usize).max(2);
    let n = 2 * half + 1;
    let inv = 1.0 / (sd * core::f64::consts::SQRT_2);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 - half as f64) * dx;
        let cell =
            0.5 * (libm::erf((x + 0.5 * dx) * inv) - libm::erf((x - 0.5 * dx) * inv)) / dx;
        vals.push(cell);
    }
    (vals, half)
}

/// Law of `X + sqrt(t) G` with `G` standard Gaussian independent of `X`.
///
/// Grid laws come back on their own grid; atomic laws become Gaussian
/// mixtures realized on `grid` (and are returned unchanged for `t = 0`).
pub fn heat_flow(law: &Law, t: f64, grid: Grid) -> Result<Law> {
    assert!(t >= 0.0);
    match law {
        Law::Atoms(a) => {
            if t == 0.0 {
                return Ok(Law::Atoms(a.clone()));
            }
            let inv = 1.0 / (t.sqrt() * core::f64::consts::SQRT_2);
            let h = 0.5 * grid.dx;
            let vals: Vec<f64> = grid
                .nodes()
                .map(|x| {
                    a.atoms
                        .iter()
                        .map(|&(p, w)| {
                            w * 0.5
                                * (libm::erf((x + h - p) * inv) - libm::erf((x - h - p) * inv))
                                / grid.dx
                        })
                        .sum()
                })
                .collect();
            Ok(Law::Grid(GridDensity::new(grid, vals)?))
        }
        Law::Grid(d) => {
            if t == 0.0 {
                return Ok(Law::Grid(d.clone()));
            }
            let (kernel, half) = gaussian_kernel(t, d.grid.dx);
            let conv = convolve_real(&d.values, &kernel);
            // kernel is index-centered at `half`: crop back without resampling
            let vals: Vec<f64> =
                (0..d.grid.count).map(|i| conv[i + half] * d.grid.dx).collect();
            Ok(Law::Grid(GridDensity::new(d.grid, vals)?))
        }
    }
}

/// Shannon differential entropy `-integral rho log rho` (nats).
pub fn entropy(d: &GridDensity) -> f64 {
    let mut acc = 0.0;
    for &p in &d.values {
        if p > 0.0 {
            acc -= p * p.ln();
        }
    }
    acc * d.grid.dx
}

fn support_runs(values: &[f64]) -> Vec<(usize, usize)> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let floor = SCORE_FLOOR * peak;
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

/// Score `j = -rho'/rho` via central differences of `log rho` on every
/// connected region above the density floor (one-sided stencils at region
/// edges, so multimodal densities with deep gaps keep all their mass).
pub fn score(d: &GridDensity) -> Result<ScoreFunction> {
    let runs = support_runs(&d.values);
    let mut mask = vec![false; d.grid.count];
    let mut values = vec![0.0; d.grid.count];
    let mut mask_mass = 0.0;
    let inv2h = 1.0 / (2.0 * d.grid.dx);
    for &(lo, hi) in &runs {
        let logs: Vec<f64> = d.values[lo..hi].iter().map(|&p| p.ln()).collect();
        for i in lo..hi {
            let k = i - lo;
            let dlog = if k == 0 {
                (-3.0 * logs[0] + 4.0 * logs[1] - logs[2]) * inv2h
            } else if k == logs.len() - 1 {
                (3.0 * logs[k] - 4.0 * logs[k - 1] + logs[k - 2]) * inv2h
            } else {
                (logs[k + 1] - logs[k - 1]) * inv2h
            };
            values[i] = -dlog;
            mask[i] = true;
        }
        mask_mass += d.grid.dx * d.values[lo..hi].iter().sum::<f64>();
    }
    if mask_mass < 0.99 {
        return Err(Error::SupportTooThin { mask_mass });
    }
    Ok(ScoreFunction { grid: d.grid, values, mask })
}

/// Fisher information `F = integral j^2 rho`.
pub fn fisher(d: &GridDensity) -> Result<f64> {
    let j = score(d)?;
    Ok(j_sq(&j, d))
}

fn j_sq(j: &ScoreFunction, d: &GridDensity) -> f64 {
    let mut acc = 0.0;
    for i in 0..d.grid.count {
        if j.mask[i] {
            acc += j.values[i] * j.values[i] * d.values[i];
        }
    }
    acc * d.grid.dx
}

/// Quadrature layout for the entropy flow integral.
#[derive(Debug, Clone, Copy)]
pub struct FlowQuadrature {
    /// Nodes on the `sqrt(t)` scale covering `t` in `[0, s_split^2]`.
    pub sqrt_nodes: usize,
    pub s_split: f64,
    /// Nodes on the `log(1+t)` scale covering `(s_split^2, t_max]`.
    pub log_nodes: usize,
    /// Truncation point of the flow integral for atomic inputs, which have
    /// a divergent integrand at `t = 0`.
    pub atomic_t_min: f64,
}

impl Default for FlowQuadrature {
    fn default() -> Self {
        FlowQuadrature { sqrt_nodes: 48, s_split: 1.2, log_nodes: 48, atomic_t_min: 0.01 }
    }
}

/// Law of `(X + sqrt(t) G) / sqrt(1 + t)`, which stays inside the working
/// grid for every `t`.
pub fn flow_rescaled(law: &Law, t: f64, grid: Grid) -> Result<GridDensity> {
    let a = 1.0 / (1.0 + t).sqrt();
    let shrunk = match law {
        Law::Grid(d) => Law::Grid(dilate(d, a)?),
        Law::Atoms(at) => Law::Atoms(AtomicLaw::new(
            at.atoms.iter().map(|&(p, w)| (p * a, w)).collect(),
        )?),
    };
    match heat_flow(&shrunk, t / (1.0 + t), grid)? {
        Law::Grid(d) => Ok(d),
        Law::Atoms(_) => unreachable!("t > 0 smooths atoms"),
    }
}

fn flow_integrand(law: &Law, t: f64, grid: Grid) -> Result<f64> {
    // F(X + sqrt(t) G) = F(rescaled) / (1 + t)
    let d = flow_rescaled(law, t, grid)?;
    Ok((1.0 - fisher(&d)?) / (1.0 + t))
}

/// Entropy through the score-flow formula
/// `H = 1/2 * integral_0^inf [1/(1+t) - F(X^(t))] dt + 1/2 log(2 pi e)`,
/// truncated at `t_max` with the Gaussian-equivalent analytic tail.
///
/// Atomic inputs (entropy `-inf`) are integrated from `atomic_t_min`
/// instead of 0; the result then equals
/// `H(X^(t_min)) - 1/2 log(1 + t_min)`.
pub fn entropy_via_flow(law: &Law, t_max: f64, quad: &FlowQuadrature) -> Result<f64> {
    let grid = match law {
        Law::Grid(d) => d.grid,
        Law::Atoms(_) => Grid::default_working(),
    };
    let tail_probe = flow_integrand(law, t_max, grid)?;
    if tail_probe.abs() > 1e-3 {
        return Err(Error::TailTooFat { integrand: tail_probe });
    }

    let mut integral = 0.0;
    let s_lo = if law.is_atomic() { quad.atomic_t_min.sqrt() } else { 0.0 };
    // sqrt-scale segment: integrand 2 s * I(s^2) is bounded at s = 0
    let ds = (quad.s_split - s_lo) / quad.sqrt_nodes as f64;
    let mut g_prev = if law.is_atomic() {
        2.0 * s_lo * flow_integrand(law, s_lo * s_lo, grid)?
    } else {
        // linear extrapolation to s = 0 from the first two interior nodes
        let g1 = ds * 2.0 * flow_integrand(law, ds * ds, grid)?;
        let g2 = 2.0 * ds * 2.0 * flow_integrand(law, 4.0 * ds * ds, grid)?;
        2.0 * g1 - g2
    };
    for k in 1..=quad.sqrt_nodes {
        let s = s_lo + k as f64 * ds;
        let g = 2.0 * s * flow_integrand(law, s * s, grid)?;
        integral += 0.5 * (g_prev + g) * ds;
        g_prev = g;
    }
    // log-scale segment: u = log(1+t), integrand (1+t) I(t) = 1 - F(rescaled)
    let u_lo = (1.0 + quad.s_split * quad.s_split).ln();
    let u_hi = (1.0 + t_max).ln();
    let du = (u_hi - u_lo) / quad.log_nodes as f64;
    let mut h_prev = {
        let t = quad.s_split * quad.s_split;
        flow_integrand(law, t, grid)? * (1.0 + t)
    };
    for k in 1..=quad.log_nodes {
        let t = (u_lo + k as f64 * du).exp() - 1.0;
        let h = flow_integrand(law, t, grid)? * (1.0 + t);
        integral += 0.5 * (h_prev + h) * du;
        h_prev = h;
    }
    // analytic tail for variance != 1
    let var = law.variance();
    integral += ((1.0 + t_max) / (var + t_max)).ln();

    Ok(0.5 * integral + crate::HALF_LOG_TWO_PI_E)
}

/// Physicists' Hermite polynomial `H_m(x)` by the three-term recursion.
pub fn hermite(m: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if m == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn compositions(m: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 1 {
        prefix.push(m);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=m {
        prefix.push(k);
        compositions(m - k, n - 1, prefix, out);
        prefix.pop();
    }
}

/// Max residual of the Hermite multinomial identity
/// `n^(m/2) H_m((x_1+..+x_n)/sqrt(n)) = sum m!/(k_1!..k_n!) prod H_{k_i}(x_i)`
/// over the given sample points (each a point of `R^n`).
pub fn hermite_multinomial_check(m: usize, n: usize, sample_points: &[Vec<f64>]) -> f64 {
    assert!(m <= 8 && n <= 4 && n >= 1);
    let mut comps = Vec::new();
    compositions(m, n, &mut Vec::new(), &mut comps);
    let factorial = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let m_fact = factorial(m);
    let mut worst = 0.0f64;
    for pt in sample_points {
        assert_eq!(pt.len(), n);
        let s: f64 = pt.iter().sum();
        let lhs = (n as f64).powf(0.5 * m as f64) * hermite(m, s / (n as f64).sqrt());
        let mut rhs = 0.0;
        for comp in &comps {
            let coeff = m_fact / comp.iter().map(|&k| factorial(k)).product::<f64>();
            let prod: f64 = comp.iter().zip(pt).map(|(&k, &x)| hermite(k, x)).product();
            rhs += coeff * prod;
        }
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Expands a score function in the polynomials `H_m(x / sqrt(2))`, which are
/// orthogonal under the standard Gaussian with squared norms `2^m m!`.
///
/// The input must be the standardized law of a unit-Gaussian-smoothed
/// variable so that the score lies in `L^2` of the Gaussian reference.
pub fn score_hermite_coefficients(d: &GridDensity, m_max: usize) -> Result<HermiteCoefficients> {
    assert!(m_max >= 6);
    let j = score(d)?;
    let mut alpha = Vec::with_capacity(m_max + 1);
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    for m in 0..=m_max {
        let mut acc = 0.0;
        for i in 0..d.grid.count {
            if j.mask[i] {
                let x = d.grid.node(i);
                let weight = (-0.5 * x * x).exp() / SQRT_2PI;
                acc += j.values[i] * hermite(m, x * inv_sqrt2) * weight;
            }
        }
        alpha.push(acc * d.grid.dx / HermiteCoefficients::basis_norm_sq(m));
    }
    Ok(HermiteCoefficients { alpha })
}

/// Outcome of the Gaussianity equality-case test.
#[derive(Debug, Clone, Copy)]
pub struct GaussianityReport {
    /// `max |alpha_m|` for `2 <= m <= 6` of the unit-smoothed score.
    pub max_alpha: f64,
    /// KS distance of the input to the standard Gaussian.
    pub ks: f64,
    pub pass: bool,
}

/// Tests whether a standardized law is (numerically) standard Gaussian:
/// nonlinear Hermite components of the smoothed score below `tol` and KS
/// distance below `5 * tol`.
///
/// The Hermite statistics are computed on the unit-Gaussian-smoothed and
/// re-standardized law, which both satisfies the expansion's domain
/// requirement and preserves Gaussianity exactly.
pub fn gaussianity_test(d: &GridDensity, tol: f64) -> GaussianityReport {
    let gauss = realize(&LawSpec::gaussian(0.0, 1.0), d.grid)
        .expect("reference Gaussian fits any reasonable working grid");
    let ks = crate::measures::distance(
        &Law::Grid(d.clone()),
        &Law::Grid(gauss),
        Metric::KS,
    )
    .expect("same grid");

    let max_alpha = (|| -> Result<f64> {
        let smoothed = match heat_flow(&Law::Grid(d.clone()), 1.0, d.grid)? {
            Law::Grid(s) => s,
            Law::Atoms(_) => unreachable!(),
        };
        let (std_law, _) = crate::measures::standardize(&Law::Grid(smoothed))?;
        let coeffs = score_hermite_coefficients(std_law.as_grid()?, 6)?;
        Ok(coeffs.max_abs_in(2..=6))
    })()
    .unwrap_or(f64::INFINITY);

    GaussianityReport { max_alpha, ks, pass: max_alpha < tol && ks < 5.0 * tol }
}

/// Computes `phi(s) = integral f(u) exp(-u^2/2t) exp(su/t) du` on the grid
/// and returns its infimum together with the positivity verdict.
///
/// Requires mass on both half-lines; evaluated in log space to survive the
/// growth of the exponential factor.
pub fn gaussian_domination_check(d: &GridDensity, t: f64) -> Result<(f64, bool)> {
    assert!(t > 0.0);
    let dx = d.grid.dx;
    let mass_neg: f64 = (0..d.grid.count)
        .filter(|&i| d.grid.node(i) <= 0.0)
        .map(|i| d.values[i])
        .sum::<f64>()
        * dx;
    let mass_pos: f64 = (0..d.grid.count)
        .filter(|&i| d.grid.node(i) >= 0.0)
        .map(|i| d.values[i])
        .sum::<f64>()
        * dx;
    if mass_neg < 1e-12 || mass_pos < 1e-12 {
        return Err(Error::HypothesisViolated);
    }
    let mut inf_log_phi = f64::INFINITY;
    let stride = (d.grid.count / 512).max(1);
    for si in (0..d.grid.count).step_by(stride) {
        let s = d.grid.node(si);
        // log-sum-exp over u
        let mut max_e = f64::NEG_INFINITY;
        let exps: Vec<f64> = (0..d.grid.count)
            .map(|ui| {
                let u = d.grid.node(ui);
                let e = -u * u / (2.0 * t) + s * u / t;
                if d.values[ui] > 0.0 && e > max_e {
                    max_e = e;
                }
                e
            })
            .collect();
        let mut acc = 0.0;
        for (ui, e) in exps.iter().enumerate() {
            if d.values[ui] > 0.0 {
                acc += d.values[ui] * (e - max_e).exp();
            }
        }
        let log_phi = max_e + (acc * dx).ln();
        if log_phi < inf_log_phi {
            inf_log_phi = log_phi;
        }
    }
    let inf_phi = inf_log_phi.exp();
    Ok((inf_phi, inf_phi > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{distance, realize, standardize};
    use crate::HALF_LOG_TWO_PI_E;

    fn wg() -> Grid {
        Grid::default_working()
    }

    fn grid_law(spec: &LawSpec) -> GridDensity {
        realize(spec, wg()).unwrap()
    }

    #[test]
    fn convolve_uniform_triangle() {
        let u = grid_law(&LawSpec::uniform(-0.5, 0.5));
        let tri = convolve(&u, &u).unwrap();
        let peak = tri.grid.interp_cubic(&tri.values, 0.0);
        assert!((peak - 1.0).abs() < 1e-3, "peak={peak}");
        assert!((tri.variance() - 1.0 / 6.0).abs() < 1e-5);
    }

    #[test]
    fn convolve_gaussians() {
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        let g2 = convolve(&g, &g).unwrap();
        let want = realize(&LawSpec::gaussian(0.0, 2.0), g2.grid).unwrap();
        let l1 = distance(&Law::Grid(g2), &Law::Grid(want), Metric::L1).unwrap();
        assert!(l1 < 1e-5, "l1={l1}");
    }

    #[test]
    fn convolve_rescaled_uniform_is_triangular() {
        let s3 = 3.0f64.sqrt();
        let u = grid_law(&LawSpec::uniform(-s3, s3));
        let sum = convolve(&u, &u).unwrap();
        let tri = dilate(&resample(&sum, wg()).unwrap(), 1.0).unwrap();
        let scaled = dilate(&tri, 1.0 / core::f64::consts::SQRT_2).unwrap();
        // density (sqrt(6)-|x|)/6 on [-sqrt(6), sqrt(6)]
        let s6 = 6.0f64.sqrt();
        for &x in &[0.0f64, 1.0, -2.0, 2.4] {
            let want = (s6 - x.abs()).max(0.0) / 6.0;
            let got = scaled.grid.interp_cubic(&scaled.values, x);
            assert!((got - want).abs() < 2e-3, "x={x} got={got} want={want}");
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = grid_law(&LawSpec::gaussian(0.0, 1.0));
        let b = realize(&LawSpec::gaussian(0.0, 1.0), Grid::symmetric(20.0, 4096)).unwrap();
        assert_eq!(convolve(&a, &b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn heat_flow_gaussian() {
        let g = Law::Grid(grid_law(&LawSpec::gaussian(0.0, 1.0)));
        let flowed = heat_flow(&g, 1.0, wg()).unwrap();
        let want = Law::Grid(grid_law(&LawSpec::gaussian(0.0, 2.0)));
        assert!(distance(&flowed, &want, Metric::L1).unwrap() < 1e-5);
    }

    #[test]
    fn heat_flow_atoms_two_bumps() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        let flowed = heat_flow(&a, 0.25, wg()).unwrap();
        let want = LawSpec::Mixture {
            components: alloc::vec![
                (0.5, alloc::boxed::Box::new(LawSpec::gaussian(-1.0, 0.25))),
                (0.5, alloc::boxed::Box::new(LawSpec::gaussian(1.0, 0.25))),
            ],
        };
        let want = Law::Grid(grid_law(&want));
        assert!(distance(&flowed, &want, Metric::L1).unwrap() < 1e-5);
        assert!((flowed.variance() - 1.25).abs() < 1e-5);
    }

    #[test]
    fn heat_flow_small_t_limit() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let mut prev = f64::INFINITY;
        for &t in &[1e-2, 1e-3] {
            let flowed = heat_flow(&u, t, wg()).unwrap();
            let l1 = distance(&flowed, &u, Metric::L1).unwrap();
            assert!(l1 < prev);
            prev = l1;
        }
        assert!(prev < 0.02, "l1 at t=1e-3 is {prev}");
    }

    #[test]
    fn heat_flow_variance_additive() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let flowed = heat_flow(&u, 0.7, wg()).unwrap();
        assert!((flowed.variance() - 1.7).abs() < 1e-5);
    }

    #[test]
    fn heat_flow_semigroup() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let two_step = heat_flow(&heat_flow(&u, 0.3, wg()).unwrap(), 0.5, wg()).unwrap();
        let one_step = heat_flow(&u, 0.8, wg()).unwrap();
        assert!(distance(&two_step, &one_step, Metric::L1).unwrap() < 1e-6);
    }

    #[test]
    fn entropy_closed_forms() {
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        assert!((entropy(&g) - HALF_LOG_TWO_PI_E).abs() < 1e-6);
        let s3 = 3.0f64.sqrt();
        let u = grid_law(&LawSpec::uniform(-s3, s3));
        assert!((entropy(&u) - (2.0 * s3).ln()).abs() < 1e-3);
    }

    #[test]
    fn entropy_of_variance_one_triangle() {
        // convolution + quadrature checked against the closed form
        let s3 = 3.0f64.sqrt();
        let u = grid_law(&LawSpec::uniform(-s3, s3));
        let sum = convolve(&u, &u).unwrap();
        let tri = dilate(&resample(&sum, wg()).unwrap(), 1.0 / core::f64::consts::SQRT_2).unwrap();
        let want = 0.5 + 0.5 * 6.0f64.ln();
        assert!((entropy(&tri) - want).abs() < 1e-3, "H={}", entropy(&tri));
    }

    #[test]
    fn score_of_gaussian_is_linear() {
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        let j = score(&g).unwrap();
        for i in 0..g.grid.count {
            let x = g.grid.node(i);
            if x.abs() <= 4.0 {
                assert!(j.mask[i]);
                assert!((j.values[i] - x).abs() < 1e-3, "x={x} j={}", j.values[i]);
            }
        }
        assert!((j.inner(&g, |x| x) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn score_of_scaled_gaussian() {
        let g = grid_law(&LawSpec::gaussian(0.0, 2.0));
        let j = score(&g).unwrap();
        for i in 0..g.grid.count {
            let x = g.grid.node(i);
            if x.abs() <= 4.0 {
                assert!((j.values[i] - x / 2.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn score_normalization_smoothed_uniform() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let flowed = heat_flow(&u, 1.0, wg()).unwrap();
        let d = flowed.as_grid().unwrap();
        let j = score(d).unwrap();
        assert!((j.inner(d, |x| x) - 1.0).abs() < 2e-2);
    }

    #[test]
    fn fisher_closed_forms() {
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        assert!((fisher(&g).unwrap() - 1.0).abs() < 1e-5);
        for &t in &[1.0, 3.0] {
            let gt = grid_law(&LawSpec::gaussian(0.0, 1.0 + t));
            assert!((fisher(&gt).unwrap() - 1.0 / (1.0 + t)).abs() < 1e-5);
        }
    }

    #[test]
    fn fisher_smoothed_uniform_bounds() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let flowed = heat_flow(&u, 1.0, wg()).unwrap();
        let f = fisher(flowed.as_grid().unwrap()).unwrap();
        // variance 2, non-Gaussian: strictly between Cramer-Rao and Gaussian value
        assert!(f >= 0.5 && f < 1.0, "F={f}");
    }

    #[test]
    fn entropy_flow_gaussian() {
        let g = Law::Grid(grid_law(&LawSpec::gaussian(0.0, 1.0)));
        let h = entropy_via_flow(&g, 400.0, &FlowQuadrature::default()).unwrap();
        assert!((h - HALF_LOG_TWO_PI_E).abs() < 1e-3, "h={h}");
    }

    #[test]
    fn entropy_flow_uniform() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let h = entropy_via_flow(&u, 400.0, &FlowQuadrature::default()).unwrap();
        assert!((h - (2.0 * s3).ln()).abs() < 1e-2, "h={h}");
    }

    #[test]
    fn entropy_flow_atoms_truncated() {
        let quad = FlowQuadrature::default();
        let a = Law::Atoms(AtomicLaw::rademacher());
        let h = entropy_via_flow(&a, 400.0, &quad).unwrap();
        let t0 = quad.atomic_t_min;
        let smoothed = heat_flow(&a, t0, wg()).unwrap();
        let want = entropy(smoothed.as_grid().unwrap()) - 0.5 * (1.0 + t0).ln();
        assert!((h - want).abs() < 5e-2, "h={h} want={want}");
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(2, 1.0), 2.0); // 4x^2 - 2
        assert_eq!(hermite(3, 2.0), 40.0); // 8x^3 - 12x
        assert_eq!(hermite(5, 0.0), 0.0); // odd polynomial
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(1, -1.5), -3.0);
    }

    #[test]
    fn hermite_multinomial_identity() {
        let pts2: Vec<Vec<f64>> = alloc::vec![
            alloc::vec![0.3, -1.1],
            alloc::vec![2.0, 0.5],
            alloc::vec![-0.7, -0.2],
        ];
        assert!(hermite_multinomial_check(2, 2, &pts2) < 1e-10);
        assert!(hermite_multinomial_check(1, 2, &pts2) < 1e-12);
        assert!(hermite_multinomial_check(0, 2, &pts2) < 1e-14);
        let pts3: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.4, 1.2, -0.9]];
        assert!(hermite_multinomial_check(3, 3, &pts3) < 1e-9);
    }

    #[test]
    fn hermite_m2_n2_closed_form() {
        // both sides equal 4 (x1 + x2)^2 - 4
        for &(x1, x2) in &[(0.25, -1.5), (1.0, 1.0)] {
            let lhs = 2.0 * hermite(2, (x1 + x2) / core::f64::consts::SQRT_2);
            let want = 4.0 * (x1 + x2) * (x1 + x2) - 4.0;
            assert!((lhs - want).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothed_gaussian_score_has_linear_expansion() {
        let g = Law::Grid(grid_law(&LawSpec::gaussian(0.0, 2.0)));
        let (std_law, _) = standardize(&g).unwrap();
        let coeffs = score_hermite_coefficients(std_law.as_grid().unwrap(), 8).unwrap();
        assert!(coeffs.max_abs_in(2..=8) < 1e-4, "alpha={:?}", coeffs.alpha);
        // alpha_1 carries the whole linear score: x = sqrt(2) alpha_1 x
        assert!((coeffs.alpha[1] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn smoothed_uniform_score_has_nonlinear_components() {
        let s3 = 3.0f64.sqrt();
        let u = Law::Grid(grid_law(&LawSpec::uniform(-s3, s3)));
        let flowed = heat_flow(&u, 1.0, wg()).unwrap();
        let (std_law, _) = standardize(&flowed).unwrap();
        let coeffs = score_hermite_coefficients(std_law.as_grid().unwrap(), 6).unwrap();
        assert!(coeffs.max_abs_in(2..=6) > 1e-3, "alpha={:?}", coeffs.alpha);
    }

    #[test]
    fn parseval_cross_check() {
        let g = Law::Grid(grid_law(&LawSpec::gaussian(0.0, 2.0)));
        let (std_law, _) = standardize(&g).unwrap();
        let d = std_law.as_grid().unwrap();
        let coeffs = score_hermite_coefficients(d, 10).unwrap();
        let sum: f64 = coeffs
            .alpha
            .iter()
            .enumerate()
            .map(|(m, &a)| a * a * HermiteCoefficients::basis_norm_sq(m))
            .sum();
        assert!((sum - fisher(d).unwrap()).abs() < 2e-2);
    }

    #[test]
    fn gaussianity_verdicts() {
        let tol = 1e-3;
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        assert!(gaussianity_test(&g, tol).pass);
        let s3 = 3.0f64.sqrt();
        let u = grid_law(&LawSpec::uniform(-s3, s3));
        assert!(!gaussianity_test(&u, tol).pass);
        let sc = grid_law(&LawSpec::semicircle(0.0, 1.0));
        assert!(!gaussianity_test(&sc, tol).pass);
    }

    #[test]
    fn domination_check_uniform() {
        let s3 = 3.0f64.sqrt();
        let u = grid_law(&LawSpec::uniform(-s3, s3));
        let (inf_phi, pass) = gaussian_domination_check(&u, 1.0).unwrap();
        assert!(pass);
        // lower bound from one-sided mass: integral_0^inf f e^{-u^2/2}
        let mut bound = 0.0;
        for i in 0..u.grid.count {
            let x = u.grid.node(i);
            if x >= 0.0 {
                bound += u.values[i] * (-0.5 * x * x).exp();
            }
        }
        bound *= u.grid.dx;
        assert!(inf_phi >= bound - 1e-9, "inf={inf_phi} bound={bound}");
    }

    #[test]
    fn domination_check_gaussian() {
        let g = grid_law(&LawSpec::gaussian(0.0, 1.0));
        let (inf_phi, pass) = gaussian_domination_check(&g, 1.0).unwrap();
        assert!(pass && inf_phi > 0.3, "inf={inf_phi}");
    }

    #[test]
    fn domination_check_one_sided_rejected() {
        let u = grid_law(&LawSpec::uniform(1.0, 2.0));
        assert_eq!(gaussian_domination_check(&u, 1.0).unwrap_err(), Error::HypothesisViolated);
    }
}
