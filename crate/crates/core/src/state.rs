//! Fock-truncated density operators and common state constructors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::ln_factorial;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-9;

/// Fock-truncated complex Hermitian matrix representing a single-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    elements: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace, and positivity up to truncation
    /// tolerance before accepting the matrix.
    pub fn new(elements: DMatrix<Complex64>) -> Result<Self> {
        let dim = elements.nrows();
        if dim == 0 || elements.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "expected square nonempty matrix, got {}x{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        for i in 0..dim {
            for j in 0..=i {
                let delta = (elements[(i, j)] - elements[(j, i)].conj()).norm();
                if delta > HERMITICITY_TOL {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i},{j}): deviation {delta:.3e}"
                    )));
                }
            }
        }
        let trace: Complex64 = (0..dim).map(|i| elements[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = min_eigenvalue_hermitian(&elements);
        if min_eig < -EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min_eig:.3e} below truncation tolerance"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn element(&self, n: usize, m: usize) -> Complex64 {
        self.elements[(n, m)]
    }

    pub fn population(&self, n: usize) -> f64 {
        self.elements[(n, n)].re
    }

    /// Population in the top 10% of retained Fock levels; used as a truncation
    /// convergence check.
    pub fn truncation_tail(&self) -> f64 {
        let start = self.dim - (self.dim / 10).max(1);
        (start..self.dim).map(|n| self.population(n)).sum()
    }

    pub fn truncation_converged(&self) -> bool {
        self.truncation_tail() <= 1e-6
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue_hermitian(&self.elements)
    }

    pub fn purity(&self) -> f64 {
        let prod = &self.elements * &self.elements;
        (0..self.dim).map(|i| prod[(i, i)].re).sum()
    }

    /// |n⟩⟨n| in a `dim`-level truncation.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::IndexError(format!("fock level {n} outside dim {dim}")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(dim, 0).expect("vacuum always fits")
    }

    /// Pure state from (not necessarily normalized) Fock amplitudes.
    pub fn pure(amplitudes: &[Complex64], dim: usize) -> Result<Self> {
        if amplitudes.len() > dim {
            return Err(Error::IndexError(format!(
                "{} amplitudes exceed truncation {dim}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let scale = norm2.sqrt();
        let mut m = DMatrix::zeros(dim, dim);
        for (i, ai) in amplitudes.iter().enumerate() {
            for (j, aj) in amplitudes.iter().enumerate() {
                m[(i, j)] = (ai / scale) * (aj / scale).conj();
            }
        }
        Self::new(m)
    }

    /// The four-component superposition (|0⟩ + 2|1⟩ + |2⟩ + 2|3⟩)/√10 used as
    /// the worked example throughout the test suite.
    pub fn example_superposition(dim: usize) -> Result<Self> {
        let amps: Vec<Complex64> = [1.0, 2.0, 1.0, 2.0]
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        Self::pure(&amps, dim)
    }

    /// Coherent state |α⟩⟨α| truncated to `dim` levels and renormalized.
    pub fn coherent(dim: usize, alpha: Complex64) -> Result<Self> {
        let mut amps = Vec::with_capacity(dim);
        for n in 0..dim {
            let ln_amp = -(alpha.norm_sqr()) / 2.0 - 0.5 * ln_factorial(n);
            amps.push(alpha.powu(n as u32) * ln_amp.exp());
        }
        Self::pure(&amps, dim)
    }

    /// Thermal state with mean occupation `nbar`, truncated and renormalized.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        if nbar < 0.0 {
            return Err(Error::InvalidParameter(format!("nbar = {nbar} < 0")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let ratio = nbar / (1.0 + nbar);
        let mut total = 0.0;
        let mut pops = Vec::with_capacity(dim);
        for n in 0..dim {
            let p = ratio.powi(n as i32) / (1.0 + nbar);
            pops.push(p);
            total += p;
        }
        for (n, p) in pops.iter().enumerate() {
            m[(n, n)] = Complex64::new(p / total, 0.0);
        }
        Self::new(m)
    }

    /// Squeezed vacuum with squeezing parameter `r` (even Fock amplitudes).
    pub fn squeezed_vacuum(dim: usize, r: f64) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let th = r.tanh();
        for n in 0..(dim + 1) / 2 {
            let ln_mag = 0.5 * ln_factorial(2 * n) - ln_factorial(n)
                - n as f64 * std::f64::consts::LN_2
                + n as f64 * th.abs().max(1e-300).ln();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 } * th.signum().powi(n as i32);
            let mag = if r == 0.0 && n > 0 { 0.0 } else { ln_mag.exp() };
            amps[2 * n] = Complex64::new(sign * mag, 0.0);
        }
        amps[0] = Complex64::new(1.0, 0.0);
        // (cosh r)^{-1/2} normalization is restored inside `pure`.
        Self::pure(&amps, dim)
    }
}

/// Smallest eigenvalue of a complex Hermitian matrix, via the real symmetric
/// embedding [[X, -Y], [Y, X]] of H = X + iY (eigenvalues doubled in
/// multiplicity, unchanged in value).
pub fn min_eigenvalue_hermitian(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            real[(i, j)] = z.re;
            real[(i + n, j + n)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
        }
    }
    // Symmetrize away roundoff before factorizing.
    let sym = (&real + real.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
