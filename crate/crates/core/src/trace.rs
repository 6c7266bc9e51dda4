use serde::Serialize;

use crate::TWO_PI;

/// A function of the interferometer phase sampled on `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
}

/// `n` equally spaced phases `2 pi k / n`, `k = 0..n`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TWO_PI * k as f64 / n as f64).collect()
}

impl Trace {
    pub fn new(phis: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(phis.len(), values.len());
        Self { phis, values }
    }

    /// Samples `f` on the uniform `n`-point phase grid.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let phis = phase_grid(n);
        let values = phis.iter().map(|&p| f(p)).collect();
        Self { phis, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid spacing, assuming a uniform grid over one period.
    pub fn step(&self) -> f64 {
        TWO_PI / self.len() as f64
    }

    /// Divides by the sampled maximum. An all-zero trace is returned as is.
    pub fn normalized(&self) -> Trace {
        let peak = self.max();
        if peak > 0.0 {
            Trace::new(self.phis.clone(), self.values.iter().map(|v| v / peak).collect())
        } else {
            self.clone()
        }
    }

    /// Largest absolute pointwise difference. Both traces must share a grid.
    pub fn max_abs_diff(&self, other: &Trace) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn pointwise_product(&self, other: &Trace) -> Trace {
        Trace::new(
            self.phis.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_half_open_and_increasing() {
        let g = phase_grid(16);
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 0.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(*g.last().unwrap() < TWO_PI);
    }

    #[test]
    fn normalization() {
        let t = Trace::sample(8, |p| 3.0 * (1.0 + p.cos()));
        let n = t.normalized();
        assert_eq!(n.max(), 1.0);
        let zero = Trace::sample(8, |_| 0.0);
        assert_eq!(zero.normalized(), zero);
    }
}
