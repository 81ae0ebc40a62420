//! Free entropy: logarithmic energy plus the semicircular normalization
//! constant.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::classical::{dilate, FlowQuadrature};
use crate::measures::{AtomicLaw, GridDensity, Law};
use crate::{Error, Result};

/// Logarithmic self-energy of a grid law,
/// `E = double integral of log|s - t| d mu(s) d mu(t)`.
///
/// Each pair of grid cells at index distance `k` contributes its mass times
/// the exact cell-pair average of `log|s - t|`, which on a uniform grid is
/// `log h + I(k)` with
/// `I(k) = ((k+1)^2 log(k+1) + (k-1)^2 log(k-1))/2 - k^2 log k - 3/2`
/// (and `I(0) = -3/2` for the diagonal cell). Using exact averages instead
/// of midpoint values removes the bias the log kernel would otherwise leave
/// in the near-diagonal bands.
pub fn log_energy(d: &GridDensity) -> f64 {
    let n = d.grid.count;
    let h = d.grid.dx;
    let band = band_table(n, h);
    let w: Vec<f64> = d.values.iter().map(|&p| p * h).collect();

    let mut energy = 0.0;
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for j in (i + 1)..n {
            acc += w[j] * band[j - i];
        }
        energy += w[i] * (2.0 * acc + w[i] * band[0]);
    }
    energy
}

/// Exact cell-pair averages of `log|s - t|` by index distance (shared with
/// the log-energy gradient in the extremal solver).
pub(crate) fn band_table(count: usize, h: f64) -> Vec<f64> {
    let log_h = h.ln();
    let xlnx = |v: f64| if v == 0.0 { 0.0 } else { v * v * v.abs().ln() };
    (0..count)
        .map(|k| {
            let kf = k as f64;
            log_h + 0.5 * (xlnx(kf + 1.0) + xlnx(kf - 1.0)) - xlnx(kf) - 1.5
        })
        .collect()
}

/// Free entropy `chi = E + 3/4 + (1/2) log(2 pi)`; atomic laws have
/// divergent self-energy and return `-inf`.
pub fn free_entropy(law: &Law) -> f64 {
    match law {
        Law::Atoms(_) => f64::NEG_INFINITY,
        Law::Grid(d) => {
            log_energy(d)
                + 0.75
                + 0.5 * (2.0 * core::f64::consts::PI).ln()
        }
    }
}

/// Law of `(X + sqrt(t) S) / sqrt(1 + t)` (`S` a standard semicircular
/// element), which stays inside the working grid for every `t`.
fn flow_rescaled(law: &Law, t: f64) -> Result<GridDensity> {
    let a = 1.0 / (1.0 + t).sqrt();
    let shrunk = match law {
        Law::Grid(d) => Law::Grid(dilate(d, a)?),
        Law::Atoms(at) => Law::Atoms(AtomicLaw::new(
            at.atoms.iter().map(|&(p, w)| (p * a, w)).collect(),
        )?),
    };
    super::subordination::semicircular_flow(&shrunk, t / (1.0 + t))
}

fn flow_integrand(law: &Law, t: f64) -> Result<f64> {
    // Phi(X + sqrt(t) S) = Phi(rescaled) / (1 + t)
    let d = flow_rescaled(law, t)?;
    Ok((1.0 - super::conjugate::free_fisher(&d)?.0) / (1.0 + t))
}

/// Free entropy through the conjugate-variable flow formula
/// `chi = 1/2 * integral_0^inf [1/(1+t) - Phi(X^(t))] dt + 1/2 log(2 pi e)`,
/// truncated at `t_max` with the semicircle-equivalent analytic tail.
///
/// Atomic inputs (`chi_1` can still be finite under the flow) are integrated
/// from `atomic_t_min` instead of 0, mirroring the classical routine.
pub fn chi_via_flow(law: &Law, t_max: f64, quad: &FlowQuadrature) -> Result<f64> {
    let tail_probe = flow_integrand(law, t_max)?;
    if tail_probe.abs() > 1e-3 {
        return Err(Error::TailTooFat { integrand: tail_probe });
    }

    let mut integral = 0.0;
    let s_lo = if law.is_atomic() { quad.atomic_t_min.sqrt() } else { 0.0 };
    // sqrt-scale segment: integrand 2 s * I(s^2) is bounded at s = 0
    let ds = (quad.s_split - s_lo) / quad.sqrt_nodes as f64;
    let mut g_prev = if law.is_atomic() {
        2.0 * s_lo * flow_integrand(law, s_lo * s_lo)?
    } else {
        // linear extrapolation to s = 0 from the first two interior nodes
        let g1 = ds * 2.0 * flow_integrand(law, ds * ds)?;
        let g2 = 2.0 * ds * 2.0 * flow_integrand(law, 4.0 * ds * ds)?;
        2.0 * g1 - g2
    };
    for k in 1..=quad.sqrt_nodes {
        let s = s_lo + k as f64 * ds;
        let g = 2.0 * s * flow_integrand(law, s * s)?;
        integral += 0.5 * (g_prev + g) * ds;
        g_prev = g;
    }
    // log-scale segment: u = log(1+t), integrand (1+t) I(t) = 1 - Phi(rescaled)
    let u_lo = (1.0 + quad.s_split * quad.s_split).ln();
    let u_hi = (1.0 + t_max).ln();
    let du = (u_hi - u_lo) / quad.log_nodes as f64;
    let mut h_prev = {
        let t = quad.s_split * quad.s_split;
        flow_integrand(law, t)? * (1.0 + t)
    };
    for k in 1..=quad.log_nodes {
        let t = (u_lo + k as f64 * du).exp() - 1.0;
        let h = flow_integrand(law, t)? * (1.0 + t);
        integral += 0.5 * (h_prev + h) * du;
        h_prev = h;
    }
    // analytic tail for variance != 1
    let var = law.variance();
    integral += ((1.0 + t_max) / (var + t_max)).ln();

    Ok(0.5 * integral + crate::HALF_LOG_TWO_PI_E)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::measures::{realize, AtomicLaw, LawSpec};
    use crate::HALF_LOG_TWO_PI_E;

    fn wg() -> Grid {
        Grid::default_working()
    }

    #[test]
    fn unit_semicircle_log_energy_is_minus_quarter() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let e = log_energy(&d);
        assert!((e + 0.25).abs() < 1e-4, "E={e}");
    }

    #[test]
    fn unit_semicircle_entropy_matches_gaussian_constant() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let chi = free_entropy(&Law::Grid(d));
        assert!((chi - HALF_LOG_TWO_PI_E).abs() < 1e-4, "chi={chi}");
    }

    #[test]
    fn semicircle_scaling_law() {
        // chi(semicircle(0, gamma)) = (1/2) log gamma + (1/2) log(2 pi e)
        let d = realize(&LawSpec::semicircle(0.0, 4.0), wg()).unwrap();
        let chi = free_entropy(&Law::Grid(d));
        let want = 0.5 * 4.0f64.ln() + HALF_LOG_TWO_PI_E;
        assert!((chi - want).abs() < 1e-4, "chi={chi} want={want}");
        assert!((want - 2.112).abs() < 1e-3);
    }

    #[test]
    fn atoms_have_minus_infinity() {
        let a = Law::Atoms(AtomicLaw::rademacher());
        assert_eq!(free_entropy(&a), f64::NEG_INFINITY);
    }

    #[test]
    fn arcsine_log_energy() {
        // the arcsine law on (-sqrt 2, sqrt 2) is the equilibrium measure of
        // its support interval: E = log(capacity) = log(sqrt 2 / 2)
        let cdf = |x: f64| {
            let s2 = core::f64::consts::SQRT_2;
            if x <= -s2 {
                0.0
            } else if x >= s2 {
                1.0
            } else {
                0.5 + libm::asin(x / s2) / core::f64::consts::PI
            }
        };
        let grid = wg();
        let h = 0.5 * grid.dx;
        let vals: alloc::vec::Vec<f64> =
            grid.nodes().map(|x| (cdf(x + h) - cdf(x - h)) / grid.dx).collect();
        let d = crate::measures::GridDensity::new(grid, vals).unwrap();
        let e = log_energy(&d);
        let want = -0.5 * 2.0f64.ln();
        // the inverse-square-root edge cells carry percent-level mass that
        // the cell-uniform band model misprices, so convergence here is only
        // O(sqrt(dx)) rather than the O(dx^2) seen on smooth densities
        assert!((e - want).abs() < 2e-3, "E={e} want={want}");
    }

    #[test]
    fn chi_via_flow_matches_direct_for_semicircle() {
        let d = realize(&LawSpec::semicircle(0.0, 1.0), wg()).unwrap();
        let quad =
            FlowQuadrature { sqrt_nodes: 16, s_split: 1.2, log_nodes: 16, atomic_t_min: 0.01 };
        let chi = chi_via_flow(&Law::Grid(d), 200.0, &quad).unwrap();
        assert!((chi - HALF_LOG_TWO_PI_E).abs() < 1e-2, "chi={chi}");
    }

    #[test]
    fn chi_via_flow_matches_direct_for_smoothed_bernoulli() {
        // flow the two-atom law a little, restandardize, then compare the
        // flow-integral free entropy against the direct log-energy value
        let flowed =
            super::super::subordination::semicircular_flow(&Law::Atoms(AtomicLaw::rademacher()), 0.5)
                .unwrap();
        // mean is 0, variance 1.5; dilate clips interpolation overshoot
        let std_law = Law::Grid(dilate(&flowed, 1.0 / 1.5f64.sqrt()).unwrap());
        let direct = free_entropy(&std_law);
        let quad =
            FlowQuadrature { sqrt_nodes: 16, s_split: 1.2, log_nodes: 16, atomic_t_min: 0.01 };
        let via_flow = chi_via_flow(&std_law, 200.0, &quad).unwrap();
        assert!((via_flow - direct).abs() < 1e-2, "flow={via_flow} direct={direct}");
    }

    #[test]
    fn gaussian_free_entropy_below_semicircle() {
        // the semicircle maximizes chi at fixed variance
        let g = realize(&LawSpec::gaussian(0.0, 1.0), wg()).unwrap();
        let chi = free_entropy(&Law::Grid(g));
        assert!(chi < HALF_LOG_TWO_PI_E);
        assert!(chi > HALF_LOG_TWO_PI_E - 0.5);
    }
}
