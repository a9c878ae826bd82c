//! Symplectic mode transforms for the pulsed interaction, Kerr correction, and
//! optical rotation, plus pulse-condition solving and phase-space transport.
//!
//! Transforms act on the row vector A = (a†, b†, a, b) as A' = A·S + D, where
//! D = (D_a*, D_b*, D_a, D_b). Mode a is optical, mode b mechanical.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

type CMat4 = SMatrix<Complex64, 4, 4>;
type CRow4 = SMatrix<Complex64, 1, 4>;

const C1: Complex64 = Complex64::new(1.0, 0.0);

fn cis(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

/// Physical parameters of one pulsed-readout run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Single-photon coupling rate, rad/s.
    pub g0: f64,
    /// Mechanical angular frequency, rad/s.
    pub omega_m: f64,
    /// Optical angular frequency, rad/s.
    pub omega_o: f64,
    /// Pulse duration, s.
    pub tau: f64,
    /// Post-pulse delay before the output displacement, s.
    pub tau0: f64,
    /// Pre-interaction delay setting the probed quadrature angle, s.
    pub tau_d: f64,
    /// Coherent amplitude of the probe pulse (real, ≥ 0).
    pub r: f64,
    /// Initial optical phase, rad.
    pub theta: f64,
    /// Probe squeezing parameter, ≥ 0.
    pub epsilon: f64,
    /// Kerr-cancellation integer (even, positive).
    pub k: u32,
    /// Rotation-condition integer: (tau0 + tau)·omega_o = 2π·m_rot.
    pub m_rot: u64,
}

impl ProtocolParams {
    /// Effective coupling χ = g0 r / ω_m.
    pub fn chi(&self) -> f64 {
        self.g0 * self.r / self.omega_m
    }

    /// u = √(2(1 − cos ω_m τ)) ∈ (0, 2].
    pub fn u(&self) -> f64 {
        (2.0 * (1.0 - (self.omega_m * self.tau).cos())).sqrt()
    }

    /// φ = atan2(sin ω_m τ, 1 − cos ω_m τ).
    pub fn phi(&self) -> f64 {
        let wt = self.omega_m * self.tau;
        wt.sin().atan2(1.0 - wt.cos())
    }

    /// Accumulated Kerr phase v̄ = 2√3 χ² (ω_m τ − sin ω_m τ).
    pub fn v_bar(&self) -> f64 {
        let wt = self.omega_m * self.tau;
        2.0 * 3f64.sqrt() * self.chi() * self.chi() * (wt - wt.sin())
    }

    /// Mechanical rotation angle accumulated during the pre-interaction delay.
    pub fn phi_d(&self) -> f64 {
        self.omega_m * self.tau_d
    }

    /// Readout order s* = (2 χ u e^ε)^{-2} of the extracted tomograms.
    pub fn s_star(&self) -> f64 {
        let g = 2.0 * self.chi() * self.u() * self.epsilon.exp();
        1.0 / (g * g)
    }

    pub fn pulse_condition_residual(&self) -> f64 {
        let wt = self.omega_m * self.tau;
        let chi = self.chi();
        (wt - wt.sin() - f64::from(self.k) * PI / (2.0 * 3f64.sqrt() * chi * chi)).abs()
    }

    /// Optical rotation angle reduced modulo 2π·m_rot. Computed as a small
    /// difference in the time domain; the raw angle (τ0+τ)ω_o ~ 1e11 rad is
    /// not representable to useful absolute precision.
    pub fn rotation_angle(&self) -> f64 {
        let tau0_exact = 2.0 * PI * self.m_rot as f64 / self.omega_o - self.tau;
        (self.tau0 - tau0_exact) * self.omega_o
    }

    pub fn rotation_residual(&self) -> f64 {
        self.rotation_angle().abs()
    }

    pub fn conditions_satisfied(&self) -> bool {
        let wt = self.omega_m * self.tau;
        self.pulse_condition_residual() <= 1e-6
            && self.rotation_residual() <= 1e-6
            && (0.1 * PI..=1.9 * PI).contains(&wt)
    }
}

/// Solves ω_m τ − sin(ω_m τ) = kπ/(2√3 χ²) for τ by bisection on the monotone
/// window ω_m τ ∈ [0.1π, 1.9π], then fixes τ0 so (τ0+τ)ω_o is a multiple of 2π.
pub fn solve_pulse_conditions(
    g0: f64,
    omega_m: f64,
    omega_o: f64,
    chi_target: f64,
    k: u32,
) -> Result<ProtocolParams> {
    if chi_target <= 0.0 || !chi_target.is_finite() {
        return Err(Error::InvalidParameter(format!("chi must be positive, got {chi_target}")));
    }
    if k == 0 || k % 2 != 0 {
        return Err(Error::InvalidParameter(format!("k must be even and positive, got {k}")));
    }
    if g0 <= 0.0 || omega_m <= 0.0 || omega_o <= 0.0 {
        return Err(Error::InvalidParameter("rates must be positive".into()));
    }
    let f = |x: f64| x - x.sin();
    let target = f64::from(k) * PI / (2.0 * 3f64.sqrt() * chi_target * chi_target);
    let (mut lo, mut hi) = (0.1 * PI, 1.9 * PI);
    if target < f(lo) || target > f(hi) {
        let chi_min = (f64::from(k) * PI / (2.0 * 3f64.sqrt() * f(hi))).sqrt();
        let chi_max = (f64::from(k) * PI / (2.0 * 3f64.sqrt() * f(lo))).sqrt();
        return Err(Error::PulseConditions(format!(
            "no pulse length in the admissible window for chi = {chi_target}, k = {k}; \
             admissible chi range is [{chi_min:.6}, {chi_max:.6}]"
        )));
    }
    while hi - lo > 1e-15 && (f(0.5 * (lo + hi)) - target).abs() > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if (f(x) - target).abs() > 1e-9 {
        return Err(Error::NonConvergence("pulse-condition bisection stalled".into()));
    }
    let tau = x / omega_m;
    let r = chi_target * omega_m / g0;
    let m_rot = (tau * omega_o / (2.0 * PI)).ceil().max(1.0) as u64;
    let tau0 = 2.0 * PI * m_rot as f64 / omega_o - tau;
    Ok(ProtocolParams {
        g0,
        omega_m,
        omega_o,
        tau,
        tau0,
        tau_d: 0.0,
        r,
        theta: 0.0,
        epsilon: 0.0,
        k,
        m_rot,
    })
}

/// Affine symplectic transform A' = A·S + D on (a†, b†, a, b).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    pub s: CMat4,
    pub d: CRow4,
}

fn sigma() -> CMat4 {
    let mut m = CMat4::zeros();
    m[(0, 2)] = C1;
    m[(1, 3)] = C1;
    m[(2, 0)] = -C1;
    m[(3, 1)] = -C1;
    m
}

impl SymplecticTransform {
    pub fn identity() -> Self {
        Self { s: CMat4::identity(), d: CRow4::zeros() }
    }

    /// Checks det S = 1, S Σ Sᵀ = Σ, and that the daggered components stay
    /// conjugate to the undaggered ones.
    pub fn validate(&self) -> Result<()> {
        let det = self.s.determinant();
        if (det - C1).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("det S = {det}, expected 1")));
        }
        let sig = sigma();
        let res = self.s * sig * self.s.transpose() - sig;
        if res.iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::InvalidParameter("S does not preserve the commutators".into()));
        }
        let swap = |i: usize| (i + 2) % 4;
        for i in 0..4 {
            if (self.d[i] - self.d[swap(i)].conj()).norm() > 1e-10 {
                return Err(Error::InvalidParameter("displacement breaks conjugation".into()));
            }
            for j in 0..4 {
                if (self.s[(i, j)] - self.s[(swap(i), swap(j))].conj()).norm() > 1e-10 {
                    return Err(Error::InvalidParameter("S breaks conjugation symmetry".into()));
                }
            }
        }
        Ok(())
    }

    /// Pulsed interaction at θ = 0 with the Kerr phase already cancelled:
    /// a' = a + i√2 χu X̂(φ+π/2), b' = b − √2 χu e^{iφ}(x̂ + r).
    pub fn om(params: &ProtocolParams) -> Result<Self> {
        if params.theta.abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "simplified interaction assumes theta = 0; use general_om".into(),
            ));
        }
        let chi = params.chi();
        if chi > 0.0 && !params.conditions_satisfied() {
            return Err(Error::PulseConditions(
                "pulse or rotation condition not satisfied; solve_pulse_conditions first".into(),
            ));
        }
        Ok(Self::general_om(params))
    }

    /// Pulsed interaction at arbitrary θ:
    /// a' = a + i√2 χu e^{iθ} X̂(φ+π/2), b' = b − √2 χu e^{iφ}(x̂(θ) + r).
    /// The relative sign between the two lines is fixed by requiring
    /// [a', b'] = [a', b'†] = 0, matching the generator derivation.
    pub fn general_om(params: &ProtocolParams) -> Self {
        let g = Complex64::new(params.chi() * params.u(), 0.0);
        let ephi = cis(params.phi());
        let eth = cis(params.theta);
        let mut s = CMat4::identity();
        // Column 0: a'†;  column 1: b'†;  column 2: a';  column 3: b'.
        s[(1, 0)] = g * eth.conj() * ephi;
        s[(3, 0)] = -g * eth.conj() * ephi.conj();
        s[(0, 1)] = -g * eth * ephi.conj();
        s[(2, 1)] = -g * eth.conj() * ephi.conj();
        s[(1, 2)] = -g * eth * ephi;
        s[(3, 2)] = g * eth * ephi.conj();
        s[(0, 3)] = -g * eth * ephi;
        s[(2, 3)] = -g * eth.conj() * ephi;
        let db = -Complex64::new(2f64.sqrt() * params.r, 0.0) * g * ephi;
        let mut d = CRow4::zeros();
        d[1] = db.conj();
        d[3] = db;
        Self { s, d }
    }

    /// Residual Kerr evolution of the optical mode with accumulated phase v̄.
    pub fn kerr(params: &ProtocolParams) -> Self {
        let v = params.v_bar();
        let (sv, cv) = v.sin_cos();
        let i_s3 = Complex64::new(0.0, 1.0 / 3f64.sqrt());
        let eth = cis(params.theta);
        let mut s = CMat4::identity();
        s[(0, 0)] = Complex64::new(cv, 0.0) + 2.0 * i_s3 * sv;
        s[(0, 2)] = -i_s3 * eth * eth * sv;
        s[(2, 0)] = i_s3 * (eth * eth).conj() * sv;
        s[(2, 2)] = Complex64::new(cv, 0.0) - 2.0 * i_s3 * sv;
        let da = (params.r / 3.0)
            * eth
            * (Complex64::new(cv - 1.0, 0.0) - Complex64::new(0.0, 3f64.sqrt()) * sv);
        let mut d = CRow4::zeros();
        d[0] = da.conj();
        d[2] = da;
        Self { s, d }
    }

    /// Optical rotation by Θ = (τ0+τ)ω_o around the displaced origin α = r e^{iθ}:
    /// a' = a e^{iΘ} + (e^{iΘ} − 1)α.
    pub fn optical_rotation(params: &ProtocolParams) -> Self {
        Self::rotation_about(
            params.rotation_angle(),
            Complex64::from_polar(params.r, params.theta),
        )
    }

    /// Optical phase rotation by `angle` around the phase-space point `alpha`.
    pub fn rotation_about(angle: f64, alpha: Complex64) -> Self {
        let e = cis(angle);
        let mut s = CMat4::identity();
        s[(0, 0)] = e.conj();
        s[(2, 2)] = e;
        let da = (e - C1) * alpha;
        let mut d = CRow4::zeros();
        d[0] = da.conj();
        d[2] = da;
        Self { s, d }
    }

    /// Free mechanical rotation b' = b e^{iϑ} (optical mode untouched).
    pub fn mechanical_rotation(angle: f64) -> Self {
        let e = cis(angle);
        let mut s = CMat4::identity();
        s[(1, 1)] = e.conj();
        s[(3, 3)] = e;
        Self { s, d: CRow4::zeros() }
    }

    /// Inverse transform: A = (A' − D)·S⁻¹.
    pub fn inverse(&self) -> Self {
        let s_inv = self.s.try_inverse().expect("valid symplectic transforms are invertible");
        Self { s: s_inv, d: -self.d * s_inv }
    }
}

/// Sequential composition: applies `first`, then `then`.
/// A'' = (A·S₁ + D₁)·S₂ + D₂.
pub fn compose(first: &SymplecticTransform, then: &SymplecticTransform) -> SymplecticTransform {
    SymplecticTransform { s: first.s * then.s, d: first.d * then.s + then.d }
}

/// Transports a phase-space point per the Weyl-kernel transformation rule:
/// (α'*, β'*, α', β') = [(α*, β*, α, β) − D]·S⁻¹.
pub fn lemma1_transport(
    point: (Complex64, Complex64),
    t: &SymplecticTransform,
) -> (Complex64, Complex64) {
    let (alpha, beta) = point;
    let row = CRow4::from_row_slice(&[alpha.conj(), beta.conj(), alpha, beta]);
    let s_inv = t.s.try_inverse().expect("valid symplectic transforms are invertible");
    let out = (row - t.d) * s_inv;
    (out[2], out[3])
}
