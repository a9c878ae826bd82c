//! s-parameterized Weyl-Wigner calculus on uniform phase-space grids:
//! Fock-basis kernels, quasiprobability distributions, trace pairings, and
//! Gaussian order shifting.
//!
//! The α-form distribution W(α;s) = Tr Λ T(α;s) and the (q,p)-form are related
//! by W(α;s) = 2π W(q,p;s) with α = (q + ip)/√2, so that ∫ dq dp W(q,p;s) = 1.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::gaussian_convolve_2d;
use crate::grid::{trapezoid, trapezoid_weight, PhaseSpaceGrid, QuadratureGrid};
use crate::hermite::{binomial, factorial, incomplete_hermite_2d, ln_factorial, MAX_HERMITE_INDEX};
use crate::state::DensityOperator;

/// Real-valued distribution on a phase-space grid, tagged with its order s.
#[derive(Debug, Clone)]
pub struct QuasiDistribution {
    pub grid: PhaseSpaceGrid,
    pub values: Array2<f64>,
    pub s: f64,
    /// Set when the source state had not converged in its Fock truncation.
    pub truncation_warning: bool,
    /// Set by reconstructions that ran with too few angles for full quality.
    pub quality_warning: bool,
}

/// 1-D quadrature marginal, tagged with quadrature angle φ and order s.
#[derive(Debug, Clone)]
pub struct Tomogram {
    pub grid: QuadratureGrid,
    pub values: Vec<f64>,
    pub phi: f64,
    pub s: f64,
}

impl QuasiDistribution {
    pub fn integral(&self) -> f64 {
        let dq = self.grid.dq();
        let dp = self.grid.dp();
        let mut total = 0.0;
        for i in 0..self.grid.n_q {
            let wi = trapezoid_weight(i, self.grid.n_q, dq);
            for j in 0..self.grid.n_p {
                total += wi * trapezoid_weight(j, self.grid.n_p, dp) * self.values[(i, j)];
            }
        }
        total
    }

    pub fn renormalize(&mut self) {
        let total = self.integral();
        if total.abs() > 1e-300 {
            self.values.mapv_inplace(|v| v / total);
        }
    }

    /// Marginal over p (projection onto the q axis).
    pub fn q_marginal(&self) -> Tomogram {
        let dp = self.grid.dp();
        let values: Vec<f64> = (0..self.grid.n_q)
            .map(|i| {
                let row: Vec<f64> = (0..self.grid.n_p).map(|j| self.values[(i, j)]).collect();
                trapezoid(&row, dp)
            })
            .collect();
        Tomogram {
            grid: QuadratureGrid { x_min: self.grid.q_min, x_max: self.grid.q_max, n: self.grid.n_q },
            values,
            phi: 0.0,
            s: self.s,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl Tomogram {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx())
    }

    pub fn renormalize(&mut self) {
        let total = self.integral();
        if total.abs() > 1e-300 {
            for v in &mut self.values {
                *v /= total;
            }
        }
    }

    pub fn sup_distance(&self, other: &Tomogram) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Analytic s-tomogram of the vacuum: exp(-x²/(1-s)) / sqrt(π (1-s)).
    pub fn vacuum(grid: QuadratureGrid, phi: f64, s: f64) -> Result<Self> {
        if s >= 1.0 {
            return Err(Error::InvalidOrder(format!("vacuum tomogram singular at s = {s}")));
        }
        let values = grid
            .values()
            .iter()
            .map(|&x| (-x * x / (1.0 - s)).exp() / (std::f64::consts::PI * (1.0 - s)).sqrt())
            .collect();
        Ok(Self { grid, values, phi, s })
    }

    /// Normalized Gaussian tomogram with given mean and variance.
    pub fn gaussian(grid: QuadratureGrid, phi: f64, s: f64, mean: f64, variance: f64) -> Self {
        let values = grid
            .values()
            .iter()
            .map(|&x| {
                (-(x - mean) * (x - mean) / (2.0 * variance)).exp()
                    / (2.0 * std::f64::consts::PI * variance).sqrt()
            })
            .collect();
        Self { grid, values, phi, s }
    }
}

/// Fock-basis phase-space kernel W_{|n⟩⟨m|}(α;s) in the α-form convention.
pub fn fock_kernel(n: usize, m: usize, alpha: Complex64, s: f64) -> Result<Complex64> {
    if s >= 1.0 {
        return Err(Error::InvalidOrder(format!("kernel singular at s = {s}")));
    }
    if s < -1.0 {
        return Err(Error::InvalidOrder(format!("order s = {s} outside [-1, 1)")));
    }
    let eps = Complex64::new((s * s - 1.0) / 4.0, 0.0);
    let h = incomplete_hermite_2d(n, m, alpha.conj(), alpha, eps)?;
    let two_over = 2.0 / (1.0 - s);
    let ln_norm = -(0.5) * (ln_factorial(n) + ln_factorial(m));
    let prefactor = two_over.powi((m + n + 1) as i32) * ln_norm.exp();
    Ok(prefactor * h * (-2.0 * alpha.norm_sqr() / (1.0 - s)).exp())
}

/// Coefficients P_{ab} of the polynomial Σ_{a,b} P_{ab} (α*)^a α^b such that
/// Tr ρ T(α;s) = e^{-2|α|²/(1-s)} Σ P_{ab} (α*)^a α^b. Shared by the grid
/// evaluator; mathematically identical to summing `fock_kernel` over (n, m).
fn kernel_polynomial(rho: &DensityOperator, s: f64) -> Array2<Complex64> {
    let dim = rho.dim();
    let eps = (s * s - 1.0) / 4.0;
    let two_over = 2.0 / (1.0 - s);
    let mut p = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for n in 0..dim {
        for m in 0..dim {
            let rnm = rho.element(n, m);
            if rnm.norm() < 1e-300 {
                continue;
            }
            let base = two_over.powi((n + m + 1) as i32)
                * (-(0.5) * (ln_factorial(n) + ln_factorial(m))).exp();
            for i in 0..=n.min(m) {
                let coeff = binomial(n, i) * binomial(m, i) * factorial(i) * eps.powi(i as i32);
                p[(n - i, m - i)] += rnm * base * coeff;
            }
        }
    }
    p
}

/// Evaluates the s-parameterized quasiprobability distribution of `rho`
/// on `grid`, in the (q,p) convention with unit integral.
pub fn quasi_distribution(
    rho: &DensityOperator,
    grid: &PhaseSpaceGrid,
    s: f64,
) -> Result<QuasiDistribution> {
    if !(-1.0..1.0).contains(&s) {
        return Err(Error::InvalidOrder(format!("order s = {s} outside [-1, 1)")));
    }
    if rho.dim() > MAX_HERMITE_INDEX + 1 {
        return Err(Error::IndexError(format!(
            "truncation {} exceeds kernel limit {}",
            rho.dim(),
            MAX_HERMITE_INDEX + 1
        )));
    }
    let truncation_warning = !rho.truncation_converged();
    let poly = kernel_polynomial(rho, s);
    let dim = rho.dim();
    let inv_two_pi = 1.0 / (2.0 * std::f64::consts::PI);
    let decay = -2.0 / (1.0 - s);
    let q_vals = grid.q_values();
    let p_vals = grid.p_values();
    let mut values = Array2::zeros((grid.n_q, grid.n_p));
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    for (i, &q) in q_vals.iter().enumerate() {
        for (j, &p) in p_vals.iter().enumerate() {
            let alpha = Complex64::new(q * sqrt_half, p * sqrt_half);
            let ac = alpha.conj();
            // Powers of α* and α up to dim-1.
            let mut pow_ac = vec![Complex64::new(1.0, 0.0); dim];
            let mut pow_a = vec![Complex64::new(1.0, 0.0); dim];
            for k in 1..dim {
                pow_ac[k] = pow_ac[k - 1] * ac;
                pow_a[k] = pow_a[k - 1] * alpha;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..dim {
                for b in 0..dim {
                    let c = poly[(a, b)];
                    if c.norm_sqr() > 0.0 {
                        acc += c * pow_ac[a] * pow_a[b];
                    }
                }
            }
            values[(i, j)] = (acc * (decay * alpha.norm_sqr()).exp()).re * inv_two_pi;
        }
    }
    Ok(QuasiDistribution { grid: *grid, values, s, truncation_warning, quality_warning: false })
}

/// Phase-space trace rule: Tr(Â B̂) = 2π ∫ dq dp W_A(q,p;s) W_B(q,p;-s).
pub fn trace_pairing(wa: &QuasiDistribution, wb: &QuasiDistribution) -> Result<f64> {
    if !wa.grid.approx_eq(&wb.grid, 1e-12) {
        return Err(Error::GridMismatch("trace pairing needs identical grids".into()));
    }
    if (wa.s + wb.s).abs() > 1e-12 {
        return Err(Error::OrderMismatch { expected: -wa.s, got: wb.s });
    }
    let dq = wa.grid.dq();
    let dp = wa.grid.dp();
    let mut total = 0.0;
    for i in 0..wa.grid.n_q {
        let wi = trapezoid_weight(i, wa.grid.n_q, dq);
        for j in 0..wa.grid.n_p {
            total += wi
                * trapezoid_weight(j, wa.grid.n_p, dp)
                * wa.values[(i, j)]
                * wb.values[(i, j)];
        }
    }
    Ok(2.0 * std::f64::consts::PI * total)
}

/// Shifts a distribution to a lower order s_target ≤ s by Gaussian smoothing
/// with per-axis variance (s - s_target)/2. Sharpening is refused; the unstable
/// deconvolution demo lives in the protocol module.
pub fn order_shift(w: &QuasiDistribution, s_target: f64) -> Result<QuasiDistribution> {
    let delta = s_target - w.s;
    if delta > 0.0 {
        return Err(Error::InvalidOrder(format!(
            "refusing to sharpen from s = {} to s = {s_target}",
            w.s
        )));
    }
    if delta == 0.0 {
        let mut out = w.clone();
        out.s = s_target;
        return Ok(out);
    }
    let v = -delta / 2.0;
    let values = gaussian_convolve_2d(&w.values, w.grid.dq(), w.grid.dp(), [[v, 0.0], [0.0, v]]);
    Ok(QuasiDistribution {
        grid: w.grid,
        values,
        s: s_target,
        truncation_warning: w.truncation_warning,
        quality_warning: w.quality_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::symmetric(6.0, 128).unwrap()
    }

    #[test]
    fn vacuum_kernel_at_origin() {
        let k = fock_kernel(0, 0, Complex64::new(0.0, 0.0), 0.0).unwrap();
        assert!((k - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_photon_kernel_at_origin() {
        // (2)^3 * h_{1,1}(0,0|-1/4) = 8 * (-1/4) = -2, i.e. -1/π in (q,p) form.
        let k = fock_kernel(1, 1, Complex64::new(0.0, 0.0), 0.0).unwrap();
        assert!((k - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kernel_hermitian_symmetry() {
        let alpha = Complex64::new(0.7, -0.4);
        for s in [-0.5, 0.0, 0.3] {
            let a = fock_kernel(0, 1, alpha, s).unwrap();
            let b = fock_kernel(1, 0, alpha, s).unwrap();
            assert!((a - b.conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn kernel_rejects_singular_order() {
        assert!(fock_kernel(0, 0, Complex64::new(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn vacuum_wigner_matches_closed_form() {
        let rho = DensityOperator::vacuum(10);
        let w = quasi_distribution(&rho, &grid(), 0.0).unwrap();
        for (i, &q) in w.grid.q_values().iter().enumerate().step_by(7) {
            for (j, &p) in w.grid.p_values().iter().enumerate().step_by(7) {
                let expected = (-(q * q + p * p)).exp() / PI;
                assert!((w.values[(i, j)] - expected).abs() < 1e-12);
            }
        }
        assert!((w.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_photon_wigner_negative_at_origin() {
        let rho = DensityOperator::fock(10, 1).unwrap();
        let g = PhaseSpaceGrid::symmetric(6.0, 129).unwrap(); // odd: origin on-grid
        let w = quasi_distribution(&rho, &g, 0.0).unwrap();
        assert!((w.values[(64, 64)] + 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn vacuum_q_function_matches_overlap_oracle() {
        let rho = DensityOperator::vacuum(10);
        let w = quasi_distribution(&rho, &grid(), -1.0).unwrap();
        for (i, &q) in w.grid.q_values().iter().enumerate().step_by(11) {
            for (j, &p) in w.grid.p_values().iter().enumerate().step_by(11) {
                // Q(α) = |<α|0>|²/π in the α-form, i.e. e^{-|α|²}/(2π) in (q,p).
                let alpha_sq = (q * q + p * p) / 2.0;
                let expected = (-alpha_sq).exp() / (2.0 * PI);
                assert!((w.values[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distribution_is_linear_in_rho() {
        let g = grid();
        let rho1 = DensityOperator::fock(8, 1).unwrap();
        let rho2 = DensityOperator::thermal(8, 0.5).unwrap();
        let a = 0.3;
        let mixed = {
            let m = rho1.elements() * Complex64::new(a, 0.0)
                + rho2.elements() * Complex64::new(1.0 - a, 0.0);
            DensityOperator::new(m).unwrap()
        };
        let w1 = quasi_distribution(&rho1, &g, 0.0).unwrap();
        let w2 = quasi_distribution(&rho2, &g, 0.0).unwrap();
        let wm = quasi_distribution(&mixed, &g, 0.0).unwrap();
        for i in (0..g.n_q).step_by(13) {
            for j in (0..g.n_p).step_by(13) {
                let expected = a * w1.values[(i, j)] + (1.0 - a) * w2.values[(i, j)];
                assert!((wm.values[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn purity_via_trace_pairing() {
        let g = grid();
        let rho = DensityOperator::vacuum(8);
        let w = quasi_distribution(&rho, &g, 0.0).unwrap();
        let purity = trace_pairing(&w, &w).unwrap();
        assert!((purity - 1.0).abs() < 1e-4);
    }

    #[test]
    fn orthogonal_states_pair_to_zero() {
        let g = grid();
        let w0 = quasi_distribution(&DensityOperator::vacuum(8), &g, 0.0).unwrap();
        let w1 = quasi_distribution(&DensityOperator::fock(8, 1).unwrap(), &g, 0.0).unwrap();
        assert!(trace_pairing(&w0, &w1).unwrap().abs() < 1e-4);
    }

    #[test]
    fn example_state_single_photon_overlap() {
        let g = grid();
        let psi = DensityOperator::example_superposition(16).unwrap();
        let w_psi = quasi_distribution(&psi, &g, 0.0).unwrap();
        let w_1 = quasi_distribution(&DensityOperator::fock(16, 1).unwrap(), &g, 0.0).unwrap();
        let overlap = trace_pairing(&w_psi, &w_1).unwrap();
        assert!((overlap - 0.4).abs() < 1e-4);
    }

    #[test]
    fn trace_pairing_rejects_mismatched_orders() {
        let g = grid();
        let w0 = quasi_distribution(&DensityOperator::vacuum(8), &g, 0.0).unwrap();
        let wq = quasi_distribution(&DensityOperator::vacuum(8), &g, -0.5).unwrap();
        assert!(trace_pairing(&w0, &wq).is_err());
    }

    #[test]
    fn order_shift_identity_at_zero_delta() {
        let g = grid();
        let w = quasi_distribution(&DensityOperator::vacuum(8), &g, 0.0).unwrap();
        let shifted = order_shift(&w, 0.0).unwrap();
        for (a, b) in w.values.iter().zip(shifted.values.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn order_shift_vacuum_to_q_function() {
        let g = grid();
        let w = quasi_distribution(&DensityOperator::vacuum(8), &g, 0.0).unwrap();
        let shifted = order_shift(&w, -1.0).unwrap();
        let direct = quasi_distribution(&DensityOperator::vacuum(8), &g, -1.0).unwrap();
        for (a, b) in shifted.values.iter().zip(direct.values.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn order_shift_single_photon_q_nonnegative() {
        let g = grid();
        let w = quasi_distribution(&DensityOperator::fock(8, 1).unwrap(), &g, 0.0).unwrap();
        assert!(w.min_value() < -0.2); // Wigner is negative
        let q = order_shift(&w, -1.0).unwrap();
        assert!(q.min_value() > -1e-9);
    }

    #[test]
    fn order_shift_refuses_sharpening() {
        let g = grid();
        let w = quasi_distribution(&DensityOperator::vacuum(8), &g, -0.5).unwrap();
        assert!(order_shift(&w, 0.0).is_err());
    }

    #[test]
    fn overlap_invariance_under_order_exchange() {
        // Tr(AB) computed at (s+Δ, -s-Δ) equals the pairing with the shift
        // moved to the other factor.
        let g = PhaseSpaceGrid::symmetric(7.0, 128).unwrap();
        let rho_a = DensityOperator::example_superposition(16).unwrap();
        let rho_b = DensityOperator::thermal(16, 1.0).unwrap();
        for delta in [0.3, 0.6] {
            let wa_hi = quasi_distribution(&rho_a, &g, 0.0).unwrap();
            let wb_lo = quasi_distribution(&rho_b, &g, 0.0).unwrap();
            let wa_shifted = order_shift(&wa_hi, -delta).unwrap();
            let wb_shifted = quasi_distribution(&rho_b, &g, delta).unwrap();
            let lhs = trace_pairing(&wa_shifted, &wb_shifted).unwrap();
            let rhs = trace_pairing(&wa_hi, &wb_lo).unwrap();
            assert!((lhs - rhs).abs() < 1e-4, "delta {delta}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn marginals_match_fock_wavefunctions() {
        // ∫ dp W_n(q,p;0) = |ψ_n(q)|² with ψ_n the oscillator eigenfunctions.
        let g = PhaseSpaceGrid::symmetric(7.0, 192).unwrap();
        let hermite_phys = |n: usize, x: f64| -> f64 {
            match n {
                0 => 1.0,
                1 => 2.0 * x,
                2 => 4.0 * x * x - 2.0,
                3 => 8.0 * x * x * x - 12.0 * x,
                _ => unreachable!(),
            }
        };
        for n in 0..=3usize {
            let rho = DensityOperator::fock(12, n).unwrap();
            let w = quasi_distribution(&rho, &g, 0.0).unwrap();
            let marg = w.q_marginal();
            for (i, &q) in marg.grid.values().iter().enumerate().step_by(9) {
                let hn = hermite_phys(n, q);
                let norm = PI.sqrt() * 2f64.powi(n as i32) * factorial(n);
                let expected = hn * hn * (-q * q).exp() / norm;
                assert!(
                    (marg.values[i] - expected).abs() < 1e-4,
                    "n = {n}, q = {q}: {} vs {expected}",
                    marg.values[i]
                );
            }
        }
    }

    #[test]
    fn truncation_warning_on_unconverged_state() {
        // Coherent state with |α|² = 9 barely fits in 12 levels.
        let rho = DensityOperator::coherent(12, Complex64::new(3.0, 0.0)).unwrap();
        let w = quasi_distribution(&rho, &grid(), 0.0).unwrap();
        assert!(w.truncation_warning);
    }

    #[test]
    fn bounded_for_nonpositive_orders() {
        let rho = DensityOperator::example_superposition(16).unwrap();
        for s in [0.0, -0.5, -1.0] {
            let w = quasi_distribution(&rho, &grid(), s).unwrap();
            let max = w.values.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
            // α-form |W| ≤ 2/(1-s)  ⇒  (q,p)-form |W| ≤ (1/π)/(1-s)
            assert!(max <= (1.0 / PI) / (1.0 - s) + 1e-9, "s = {s}");
        }
    }
}
