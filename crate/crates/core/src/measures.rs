//! Probability laws on the real line: grid densities, atomic laws, law
//! specifications, standardization and distances.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::grid::Grid;
use crate::{Error, Result};

/// An absolutely continuous law sampled on a uniform grid.
///
/// `values[i]` is the density at `grid.node(i)` (units 1/x). Mass is
/// normalized to 1 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridDensity {
    /// Wraps raw samples, clipping negative round-off and normalizing mass.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        assert_eq!(values.len(), grid.count);
        let peak = values.iter().cloned().fold(0.0, f64::max);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-9 * peak.max(1.0) {
                    return Err(Error::MassLoss { factor: *v });
                }
                *v = 0.0;
            }
        }
        let mass = grid.integrate(&values);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::DegenerateLaw);
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(GridDensity { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        GridDensity::new(grid, values)
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn moment(&self, k: u32) -> f64 {
        let mut acc = 0.0;
        for (i, &p) in self.values.iter().enumerate() {
            acc += self.grid.node(i).powi(k as i32) * p;
        }
        acc * self.grid.dx
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// Midpoint-rule CDF sampled at the grid nodes.
    pub fn cdf(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        for &p in &self.values {
            let half = 0.5 * p * self.grid.dx;
            acc += half;
            out.push(acc.min(1.0));
            acc += half;
        }
        out
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Density of `(X - s) / r` resampled onto the same grid.
    pub fn affine(&self, s: f64, r: f64) -> Result<Self> {
        assert!(r > 0.0);
        let vals: Vec<f64> = self
            .grid
            .nodes()
            .map(|y| r * self.grid.interp_cubic(&self.values, r * y + s))
            .collect();
        GridDensity::new(self.grid, vals)
    }

    /// Quantile by linear interpolation of the CDF.
    pub fn quantile(&self, q: f64) -> f64 {
        let cdf = self.cdf();
        let idx = cdf.partition_point(|&c| c < q);
        if idx == 0 {
            return self.grid.node(0);
        }
        if idx >= cdf.len() {
            return self.grid.last();
        }
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let t = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.0 };
        self.grid.node(idx - 1) + t * self.grid.dx
    }
}

/// A purely atomic law; positions strictly increasing, weights positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl AtomicLaw {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(_, w)| w <= 0.0) {
            return Err(Error::DegenerateLaw);
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, w) in atoms {
            match merged.last_mut() {
                Some(last) if (last.0 - t).abs() < 1e-12 => last.1 += w,
                _ => merged.push((t, w)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            for a in merged.iter_mut() {
                a.1 /= total;
            }
        }
        Ok(AtomicLaw { atoms: merged })
    }

    /// The symmetric two-atom law at +/-1.
    pub fn rademacher() -> Self {
        AtomicLaw { atoms: vec![(-1.0, 0.5), (1.0, 0.5)] }
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|&(t, w)| w * t.powi(k as i32)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// CDF evaluated from the right-continuous step function.
    pub fn cdf_at(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|&&(t, _)| t <= x).map(|&(_, w)| w).sum()
    }
}

/// A law carried either as a grid density or as an atomic law.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Grid(GridDensity),
    Atoms(AtomicLaw),
}

impl Law {
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            Law::Grid(d) => d.moment(k),
            Law::Atoms(a) => a.moment(k),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Law::Atoms(_))
    }

    pub fn as_grid(&self) -> Result<&GridDensity> {
        match self {
            Law::Grid(d) => Ok(d),
            Law::Atoms(_) => Err(Error::AtomicNotRealizable),
        }
    }
}

/// Declarative description of a law; the JSON wire format of the toolkit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "lowercase"))]
pub enum LawSpec {
    Gaussian { mean: f64, variance: f64 },
    Semicircle { mean: f64, variance: f64 },
    Uniform { a: f64, b: f64 },
    Atoms { atoms: Vec<(f64, f64)> },
    Mixture { components: Vec<(f64, Box<LawSpec>)> },
    Grid { x0: f64, dx: f64, values: Vec<f64> },
}

impl LawSpec {
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        assert!(variance > 0.0);
        LawSpec::Gaussian { mean, variance }
    }

    pub fn semicircle(mean: f64, variance: f64) -> Self {
        assert!(variance > 0.0);
        LawSpec::Semicircle { mean, variance }
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        assert!(b > a);
        LawSpec::Uniform { a, b }
    }

    pub fn contains_atoms(&self) -> bool {
        match self {
            LawSpec::Atoms { .. } => true,
            LawSpec::Mixture { components } => {
                components.iter().any(|(_, c)| c.contains_atoms())
            }
            _ => false,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            LawSpec::Gaussian { mean, .. } | LawSpec::Semicircle { mean, .. } => *mean,
            LawSpec::Uniform { a, b } => 0.5 * (a + b),
            LawSpec::Atoms { atoms } => atoms.iter().map(|&(t, w)| t * w).sum(),
            LawSpec::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.mean()).sum()
            }
            LawSpec::Grid { x0, dx, values } => {
                grid_of(*x0, *dx, values.len()).integrate(
                    &values
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| (x0 + i as f64 * dx) * p)
                        .collect::<Vec<_>>(),
                )
            }
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean() * self.mean()
    }

    fn second_moment(&self) -> f64 {
        match self {
            LawSpec::Gaussian { mean, variance } | LawSpec::Semicircle { mean, variance } => {
                variance + mean * mean
            }
            LawSpec::Uniform { a, b } => {
                let m = 0.5 * (a + b);
                (b - a) * (b - a) / 12.0 + m * m
            }
            LawSpec::Atoms { atoms } => atoms.iter().map(|&(t, w)| t * t * w).sum(),
            LawSpec::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.second_moment()).sum()
            }
            LawSpec::Grid { x0, dx, values } => grid_of(*x0, *dx, values.len()).integrate(
                &values
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let t = x0 + i as f64 * dx;
                        t * t * p
                    })
                    .collect::<Vec<_>>(),
            ),
        }
    }

    /// CDF of an atom-free spec (used for cell-averaged realization).
    pub(crate) fn cdf(&self, x: f64) -> f64 {
        match self {
            LawSpec::Gaussian { mean, variance } => {
                0.5 * (1.0 + libm::erf((x - mean) / (2.0 * variance).sqrt()))
            }
            LawSpec::Semicircle { mean, variance } => {
                let g = *variance;
                let u = x - mean;
                let r = 2.0 * g.sqrt();
                if u <= -r {
                    0.0
                } else if u >= r {
                    1.0
                } else {
                    0.5 + u * (4.0 * g - u * u).sqrt() / (4.0 * core::f64::consts::PI * g)
                        + (u / r).asin() / core::f64::consts::PI
                }
            }
            LawSpec::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            LawSpec::Mixture { components } => {
                components.iter().map(|(w, c)| w * c.cdf(x)).sum()
            }
            LawSpec::Atoms { .. } | LawSpec::Grid { .. } => unreachable!(),
        }
    }

    /// The interval holding all but ~1e-12 of the mass.
    pub fn essential_support(&self) -> (f64, f64) {
        match self {
            LawSpec::Gaussian { mean, variance } => {
                let s = variance.sqrt();
                (mean - 8.0 * s, mean + 8.0 * s)
            }
            LawSpec::Semicircle { mean, variance } => {
                let r = 2.0 * variance.sqrt();
                (mean - r, mean + r)
            }
            LawSpec::Uniform { a, b } => (*a, *b),
            LawSpec::Atoms { atoms } => (atoms[0].0, atoms[atoms.len() - 1].0),
            LawSpec::Mixture { components } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (_, c) in components {
                    let (a, b) = c.essential_support();
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                (lo, hi)
            }
            LawSpec::Grid { x0, dx, values } => (*x0, x0 + dx * (values.len() - 1) as f64),
        }
    }
}

fn grid_of(x0: f64, dx: f64, count: usize) -> Grid {
    Grid::new(x0, dx, count)
}

/// Samples a spec's density on `grid`, cell-averaged through the CDF so that
/// jump discontinuities (uniform laws) and square-root edges (semicircles)
/// carry the right per-cell mass.
pub fn realize(spec: &LawSpec, grid: Grid) -> Result<GridDensity> {
    if matches!(spec, LawSpec::Atoms { .. }) {
        return Err(Error::AtomicNotRealizable);
    }
    if spec.contains_atoms() {
        return Err(Error::AtomicNotRealizable);
    }
    let values = realize_values(spec, grid)?;
    // cell-averaged sampling integrates to exactly the covered mass
    let truncated = 1.0 - grid.integrate(&values);
    if truncated > 1e-5 {
        return Err(Error::GridTooNarrow { truncated_mass: truncated });
    }
    GridDensity::new(grid, values)
}

fn realize_values(spec: &LawSpec, grid: Grid) -> Result<Vec<f64>> {
    let h = 0.5 * grid.dx;
    match spec {
        LawSpec::Grid { x0, dx, values } => {
            let src = grid_of(*x0, *dx, values.len());
            if src.matches(&grid) {
                return Ok(values.clone());
            }
            Ok(grid
                .nodes()
                .map(|x| src.interp_cubic(values, x).max(0.0))
                .collect())
        }
        LawSpec::Mixture { components } => {
            let mut acc = vec![0.0; grid.count];
            for (w, c) in components {
                let part = realize_values(c, grid)?;
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += w * p;
                }
            }
            Ok(acc)
        }
        _ => Ok(grid
            .nodes()
            .map(|x| (spec.cdf(x + h) - spec.cdf(x - h)) / grid.dx)
            .collect()),
    }
}

/// Realizes a spec as a [`Law`]: atomic specs stay atomic, everything else
/// becomes a grid density.
pub fn law_from_spec(spec: &LawSpec, grid: Grid) -> Result<Law> {
    match spec {
        LawSpec::Atoms { atoms } => Ok(Law::Atoms(AtomicLaw::new(atoms.clone())?)),
        _ => Ok(Law::Grid(realize(spec, grid)?)),
    }
}

/// The affine standardization record: `t -> (t - s) / r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineMap {
    pub s: f64,
    pub r: f64,
}

impl AffineMap {
    pub fn apply(&self, t: f64) -> f64 {
        (t - self.s) / self.r
    }

    pub fn inverse(&self, y: f64) -> f64 {
        self.r * y + self.s
    }
}

/// Centers and scales a law to mean 0 and variance 1.
pub fn standardize(law: &Law) -> Result<(Law, AffineMap)> {
    let var = law.variance();
    if var < 1e-12 {
        return Err(Error::DegenerateLaw);
    }
    let map = AffineMap { s: law.mean(), r: var.sqrt() };
    let out = match law {
        Law::Grid(d) => Law::Grid(d.affine(map.s, map.r)?),
        Law::Atoms(a) => Law::Atoms(AtomicLaw::new(
            a.atoms.iter().map(|&(t, w)| (map.apply(t), w)).collect(),
        )?),
    };
    Ok((out, map))
}

/// Standardizes at the spec level, keeping closed-form families closed-form.
pub fn standardize_spec(spec: &LawSpec) -> Result<(LawSpec, AffineMap)> {
    let var = spec.variance();
    if var < 1e-12 {
        return Err(Error::DegenerateLaw);
    }
    let map = AffineMap { s: spec.mean(), r: var.sqrt() };
    Ok((transform_spec(spec, &map), map))
}

fn transform_spec(spec: &LawSpec, map: &AffineMap) -> LawSpec {
    let (s, r) = (map.s, map.r);
    match spec {
        LawSpec::Gaussian { mean, variance } => {
            LawSpec::Gaussian { mean: (mean - s) / r, variance: variance / (r * r) }
        }
        LawSpec::Semicircle { mean, variance } => {
            LawSpec::Semicircle { mean: (mean - s) / r, variance: variance / (r * r) }
        }
        LawSpec::Uniform { a, b } => LawSpec::Uniform { a: (a - s) / r, b: (b - s) / r },
        LawSpec::Atoms { atoms } => LawSpec::Atoms {
            atoms: atoms.iter().map(|&(t, w)| ((t - s) / r, w)).collect(),
        },
        LawSpec::Mixture { components } => LawSpec::Mixture {
            components: components
                .iter()
                .map(|(w, c)| (*w, Box::new(transform_spec(c, map))))
                .collect(),
        },
        LawSpec::Grid { x0, dx, values } => LawSpec::Grid {
            x0: (x0 - s) / r,
            dx: dx / r,
            values: values.iter().map(|&p| p * r).collect(),
        },
    }
}

/// Distance metrics between laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Kolmogorov-Smirnov: sup-norm of the CDF difference.
    KS,
    /// L1 distance between densities (grid laws only).
    L1,
    /// 1-Wasserstein: L1 distance between CDFs.
    W1,
}

pub fn distance(d1: &Law, d2: &Law, metric: Metric) -> Result<f64> {
    match (d1, d2) {
        (Law::Grid(a), Law::Grid(b)) => {
            if !a.grid.matches(&b.grid) {
                return Err(Error::GridMismatch);
            }
            Ok(match metric {
                Metric::KS => a
                    .cdf()
                    .iter()
                    .zip(b.cdf())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
                Metric::L1 => a
                    .grid
                    .integrate(&a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()),
                Metric::W1 => a
                    .grid
                    .integrate(&a.cdf().iter().zip(b.cdf()).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()),
            })
        }
        (Law::Atoms(a), Law::Atoms(b)) => match metric {
            Metric::L1 => Err(Error::IncompatibleSupports),
            Metric::KS => {
                let mut pts: Vec<f64> = a.atoms.iter().chain(&b.atoms).map(|&(t, _)| t).collect();
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                Ok(pts
                    .iter()
                    .map(|&t| (a.cdf_at(t) - b.cdf_at(t)).abs())
                    .fold(0.0, f64::max))
            }
            Metric::W1 => {
                let mut pts: Vec<f64> = a.atoms.iter().chain(&b.atoms).map(|&(t, _)| t).collect();
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                pts.dedup();
                let mut acc = 0.0;
                for w in pts.windows(2) {
                    acc += (a.cdf_at(w[0]) - b.cdf_at(w[0])).abs() * (w[1] - w[0]);
                }
                Ok(acc)
            }
        },
        (Law::Grid(g), Law::Atoms(a)) | (Law::Atoms(a), Law::Grid(g)) => match metric {
            Metric::L1 => Err(Error::IncompatibleSupports),
            Metric::KS => {
                let cdf = g.cdf();
                let mut sup = 0.0f64;
                for (i, &f) in cdf.iter().enumerate() {
                    let x = g.grid.node(i);
                    sup = sup.max((f - a.cdf_at(x)).abs());
                    // atoms jump between nodes; check the left limit too
                    sup = sup.max((f - a.cdf_at(x - g.grid.dx)).abs().min(1.0));
                }
                Ok(sup)
            }
            Metric::W1 => {
                let cdf = g.cdf();
                let vals: Vec<f64> = cdf
                    .iter()
                    .enumerate()
                    .map(|(i, &f)| (f - a.cdf_at(g.grid.node(i))).abs())
                    .collect();
                Ok(g.grid.integrate(&vals))
            }
        },
    }
}
