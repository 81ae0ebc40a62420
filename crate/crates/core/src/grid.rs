use alloc::vec::Vec;

/// A uniform grid on the real line: nodes `x0 + i * dx` for `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, count: usize) -> Self {
        assert!(dx > 0.0 && count > 1);
        Grid { x0, dx, count }
    }

    /// Symmetric grid starting at `-half_width` with step `2*half_width/count`
    /// (the last node is `half_width - dx`, so grid sums stay step-aligned
    /// under convolution).
    pub fn symmetric(half_width: f64, count: usize) -> Self {
        let dx = 2.0 * half_width / count as f64;
        Grid { x0: -half_width, dx, count }
    }

    /// Default working grid: `[-20, 20]` with 2^13 nodes.
    pub fn default_working() -> Self {
        Grid::symmetric(20.0, 1 << 13)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.node(self.count - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    pub fn nodes_vec(&self) -> Vec<f64> {
        self.nodes().collect()
    }

    /// Quadrature of sampled values; node weights are `dx` (trapezoid with
    /// vanishing boundary values, which is the regime all densities here
    /// live in).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.count);
        self.dx * values.iter().sum::<f64>()
    }

    /// Same-grid check up to floating noise.
    pub fn matches(&self, other: &Grid) -> bool {
        self.count == other.count
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.x0 - other.x0).abs() <= 1e-9 * self.dx.max(1.0)
    }

    /// Cubic (Catmull-Rom) interpolation of sampled values at `x`.
    /// Returns 0 outside the grid.
    pub fn interp_cubic(&self, values: &[f64], x: f64) -> f64 {
        let s = (x - self.x0) / self.dx;
        if s < 0.0 || s > (self.count - 1) as f64 {
            return 0.0;
        }
        let i = (s as usize).min(self.count - 2);
        let t = s - i as f64;
        let vm = if i == 0 { 2.0 * values[0] - values[1] } else { values[i - 1] };
        let v0 = values[i];
        let v1 = values[i + 1];
        let vp = if i + 2 >= self.count {
            2.0 * values[self.count - 1] - values[self.count - 2]
        } else {
            values[i + 2]
        };
        let a = -0.5 * vm + 1.5 * v0 - 1.5 * v1 + 0.5 * vp;
        let b = vm - 2.5 * v0 + 2.0 * v1 - 0.5 * vp;
        let c = 0.5 * (v1 - vm);
        ((a * t + b) * t + c) * t + v0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_endpoints() {
        let g = Grid::symmetric(20.0, 8192);
        assert_eq!(g.node(0), -20.0);
        assert_eq!(g.dx, 0.0048828125);
        assert!((g.last() - (20.0 - g.dx)).abs() < 1e-12);
    }

    #[test]
    fn cubic_interp_reproduces_quadratics() {
        // Catmull-Rom tangents are central differences, exact for quadratics
        let g = Grid::symmetric(2.0, 101);
        let f = |x: f64| 0.3 * x * x - x + 0.7;
        let vals: alloc::vec::Vec<f64> = g.nodes().map(f).collect();
        for &x in &[-1.3, 0.02, 0.77, 1.9] {
            assert!((g.interp_cubic(&vals, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_interp_third_order_on_smooth_data() {
        let f = |x: f64| (1.5 * x).sin();
        let err_at = |count: usize| {
            let g = Grid::symmetric(2.0, count);
            let vals: alloc::vec::Vec<f64> = g.nodes().map(f).collect();
            let mut worst = 0.0f64;
            for k in 0..1000 {
                let probe = -1.5 + 3.0 * k as f64 / 999.0;
                worst = worst.max((g.interp_cubic(&vals, probe) - f(probe)).abs());
            }
            worst
        };
        let coarse = err_at(100);
        let fine = err_at(400);
        // third-order scheme: 4x refinement should shrink the sup error ~64x
        assert!(fine < coarse / 20.0, "coarse={coarse:.3e} fine={fine:.3e}");
    }
}
