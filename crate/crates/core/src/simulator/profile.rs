use serde::Serialize;

/// Sampled density on one edge, linearly interpolated between samples and
/// zero outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub edge: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl EdgeProfile {
    /// Uniform grid of `cells + 1` points on `[0, len]`.
    pub fn sample<F: Fn(f64) -> f64>(edge: &str, len: f64, cells: usize, f: F) -> Self {
        let grid: Vec<f64> = (0..=cells).map(|i| len * i as f64 / cells as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        EdgeProfile {
            edge: edge.to_string(),
            grid,
            values,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if n == 0 || x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        if n == 1 {
            return self.values[0];
        }
        let i = self.grid.partition_point(|&g| g <= x).clamp(1, n - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        if x == x1 {
            return y1;
        }
        let w = (x - x0) / (x1 - x0);
        y0 + (y1 - y0) * w
    }

    /// Composite trapezoid rule over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
            .sum()
    }
}
