//! Uniform phase-space and quadrature grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform rectangular grid over the (q, p) plane, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl PhaseSpaceGrid {
    pub fn new(
        q_min: f64,
        q_max: f64,
        p_min: f64,
        p_max: f64,
        n_q: usize,
        n_p: usize,
    ) -> Result<Self> {
        if !(q_max > q_min) || !(p_max > p_min) {
            return Err(Error::InvalidGrid(format!(
                "ranges must be nonempty: q [{q_min}, {q_max}], p [{p_min}, {p_max}]"
            )));
        }
        if n_q < 16 || n_p < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 points per axis, got {n_q} x {n_p}"
            )));
        }
        Ok(Self { q_min, q_max, p_min, p_max, n_q, n_p })
    }

    /// Symmetric square grid [-half, half]^2.
    pub fn symmetric(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    /// Default grid: [-6, 6]^2 with 256 points per axis.
    pub fn default_grid() -> Self {
        Self::symmetric(6.0, 256).expect("default grid is valid")
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.n_q).map(|i| self.q(i)).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n_q == other.n_q
            && self.n_p == other.n_p
            && (self.q_min - other.q_min).abs() < tol
            && (self.q_max - other.q_max).abs() < tol
            && (self.p_min - other.p_min).abs() < tol
            && (self.p_max - other.p_max).abs() < tol
    }
}

/// Uniform 1-D grid for tomograms, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl QuadratureGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidGrid(format!("empty range [{x_min}, {x_max}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn symmetric(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && (self.x_min - other.x_min).abs() < tol
            && (self.x_max - other.x_max).abs() < tol
    }
}

/// Trapezoid weights on a uniform 1-D grid: h at interior points, h/2 at ends.
pub fn trapezoid_weight(i: usize, n: usize, h: f64) -> f64 {
    if i == 0 || i == n - 1 {
        0.5 * h
    } else {
        h
    }
}

/// Trapezoid integral of sampled values on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_points() {
        let g = PhaseSpaceGrid::symmetric(6.0, 256).unwrap();
        assert!((g.dq() - 12.0 / 255.0).abs() < 1e-15);
        assert_eq!(g.q(0), -6.0);
        assert!((g.q(255) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(PhaseSpaceGrid::new(-1.0, 1.0, -1.0, 1.0, 8, 32).is_err());
        assert!(PhaseSpaceGrid::new(1.0, -1.0, -1.0, 1.0, 32, 32).is_err());
    }

    #[test]
    fn trapezoid_integrates_gaussian() {
        let g = QuadratureGrid::symmetric(8.0, 512).unwrap();
        let vals: Vec<f64> = g.values().iter().map(|&x| (-x * x).exp()).collect();
        let integral = trapezoid(&vals, g.dx());
        assert!((integral - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
