//! Periodic trapezoid rule on `[0, 2π)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 4096;
pub const MIN_NODES: usize = 16;

/// Number of uniform nodes on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureSpec {
    nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: DEFAULT_NODES }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::InvalidWindow(format!(
                "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        Ok(QuadratureSpec { nodes })
    }

    /// Node count for a spectral parameter a distance `gap` outside the band:
    /// `max(4096, ⌈64/√gap⌉)`. The integrand's analyticity strip narrows like
    /// `√gap`, so the node count must grow as its inverse.
    pub fn for_threshold_gap(gap: f64) -> Self {
        let scaled = (64.0 / gap.sqrt()).ceil();
        let nodes = if scaled.is_finite() && scaled > DEFAULT_NODES as f64 {
            scaled as usize
        } else {
            DEFAULT_NODES
        };
        QuadratureSpec { nodes }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// The node `2πm/M`.
    #[inline]
    pub fn node(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.nodes as f64
    }

    /// `(1/M) Σ g(k_m)`, the trapezoid approximation of `∫ g dk/2π`.
    pub fn average<F: FnMut(f64) -> Complex64>(&self, mut g: F) -> Complex64 {
        let sum: Complex64 = (0..self.nodes).map(|m| g(self.node(m))).sum();
        sum / self.nodes as f64
    }

    /// `e^{i k_m}` for every node, computed directly (not by recurrence).
    pub fn roots_of_unity(&self) -> Vec<Complex64> {
        (0..self.nodes)
            .map(|m| Complex64::from_polar(1.0, self.node(m)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_node_counts() {
        assert!(QuadratureSpec::new(8).is_err());
        assert_eq!(QuadratureSpec::new(16).unwrap().nodes(), 16);
    }

    #[test]
    fn threshold_scaling() {
        assert_eq!(QuadratureSpec::for_threshold_gap(1e-2).nodes(), 4096);
        let fine = QuadratureSpec::for_threshold_gap(1e-6).nodes();
        assert!((64_000..=64_001).contains(&fine));
        assert_eq!(QuadratureSpec::for_threshold_gap(0.0).nodes(), 4096);
    }

    #[test]
    fn exact_for_low_trig_polynomials() {
        let q = QuadratureSpec::new(32).unwrap();
        let mean = q.average(|k| Complex64::new(1.0 + 3.0 * k.cos() + (5.0 * k).sin(), 0.0));
        assert!((mean.re - 1.0).abs() < 1e-14 && mean.im == 0.0);
    }

    #[test]
    fn geometric_convergence_for_analytic_integrand() {
        // ∫ dk/2π / (a − cos k) = 1/√(a² − 1).
        let a = 1.5f64;
        let exact = 1.0 / (a * a - 1.0).sqrt();
        let approx = QuadratureSpec::new(64)
            .unwrap()
            .average(|k| Complex64::new(1.0 / (a - k.cos()), 0.0));
        assert!((approx.re - exact).abs() < 1e-13);
    }
}
