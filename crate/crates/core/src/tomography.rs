//! Radon and inverse Radon transforms between phase-space distributions and
//! quadrature tomogram sets, including Gaussian-string sampling at positive
//! orders and filtered back-projection.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::apply_spectral_multiplier;
use crate::grid::{trapezoid, PhaseSpaceGrid, QuadratureGrid};
use crate::phase_space::{QuasiDistribution, Tomogram};

/// A set of tomograms sharing one quadrature grid and one order.
#[derive(Debug, Clone)]
pub struct TomogramSet {
    tomograms: Vec<Tomogram>,
    pub s: f64,
}

impl TomogramSet {
    pub fn new(tomograms: Vec<Tomogram>) -> Result<Self> {
        if tomograms.len() < 2 {
            return Err(Error::TomogramSet("need at least 2 tomograms".into()));
        }
        let s = tomograms[0].s;
        let grid = tomograms[0].grid;
        let full_span =
            if tomograms.iter().any(|t| t.phi >= std::f64::consts::PI) { 2.0 } else { 1.0 }
                * std::f64::consts::PI;
        for (i, t) in tomograms.iter().enumerate() {
            if (t.s - s).abs() > 1e-12 {
                return Err(Error::OrderMismatch { expected: s, got: t.s });
            }
            if (t.grid.x_min - grid.x_min).abs() > 1e-12
                || (t.grid.x_max - grid.x_max).abs() > 1e-12
                || t.grid.n != grid.n
            {
                return Err(Error::TomogramSet("tomograms must share one x-grid".into()));
            }
            if !(0.0..full_span).contains(&t.phi) {
                return Err(Error::TomogramSet(format!("angle {} outside [0, {full_span})", t.phi)));
            }
            if i > 0 && t.phi <= tomograms[i - 1].phi {
                return Err(Error::TomogramSet("angles must be strictly increasing".into()));
            }
            let total = t.integral();
            if (total - 1.0).abs() > 1e-5 {
                return Err(Error::TomogramSet(format!(
                    "tomogram {i} integrates to {total}, expected 1 within 1e-5"
                )));
            }
        }
        Ok(Self { tomograms, s })
    }

    pub fn tomograms(&self) -> &[Tomogram] {
        &self.tomograms
    }

    pub fn len(&self) -> usize {
        self.tomograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tomograms.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.tomograms.iter().map(|t| t.phi).collect()
    }
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    0.5 * (2.0 * p1
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
}

/// Separable cubic interpolation; zero outside the grid.
pub(crate) fn bicubic(values: &Array2<f64>, grid: &PhaseSpaceGrid, q: f64, p: f64) -> f64 {
    let fq = (q - grid.q_min) / grid.dq();
    let fp = (p - grid.p_min) / grid.dp();
    if fq < 0.0 || fp < 0.0 || fq > (grid.n_q - 1) as f64 || fp > (grid.n_p - 1) as f64 {
        return 0.0;
    }
    let i1 = (fq.floor() as usize).min(grid.n_q - 2);
    let j1 = (fp.floor() as usize).min(grid.n_p - 2);
    let tq = fq - i1 as f64;
    let tp = fp - j1 as f64;
    let clamp_i = |i: isize| -> usize { i.clamp(0, grid.n_q as isize - 1) as usize };
    let clamp_j = |j: isize| -> usize { j.clamp(0, grid.n_p as isize - 1) as usize };
    let mut rows = [0.0; 4];
    for (r, row) in rows.iter_mut().enumerate() {
        let i = clamp_i(i1 as isize + r as isize - 1);
        let c = |dj: isize| values[(i, clamp_j(j1 as isize + dj))];
        *row = catmull_rom(c(-1), c(0), c(1), c(2), tp);
    }
    catmull_rom(rows[0], rows[1], rows[2], rows[3], tq)
}

fn check_radon_grid(grid: &PhaseSpaceGrid) -> Result<()> {
    if grid.n_q < 32 || grid.n_p < 32 {
        return Err(Error::InvalidGrid("radon needs at least a 32-point grid per axis".into()));
    }
    if (grid.q_min + grid.q_max).abs() > 1e-9 || (grid.p_min + grid.p_max).abs() > 1e-9 {
        return Err(Error::InvalidGrid("radon assumes a grid centered on the origin".into()));
    }
    Ok(())
}

/// Line samples along the direction orthogonal to the φ-quadrature axis.
/// Values strictly on the grid; zero outside. Angles φ ≥ π are folded onto
/// [0, π) by reversing x, so the φ → φ+π parity is exact on symmetric grids.
fn radon_values(w: &QuasiDistribution, phi: f64) -> Vec<f64> {
    let grid = &w.grid;
    let two_pi = 2.0 * std::f64::consts::PI;
    let folded = phi.rem_euclid(two_pi);
    let flip = folded >= std::f64::consts::PI;
    // folded − π is exact for folded in [π, 2π) (Sterbenz), so φ and φ+π fold
    // onto the same base angle whenever φ+π is itself exact, and the parity
    // w(x, φ+π) = w(−x, φ) holds bit-for-bit.
    let base = if flip { folded - std::f64::consts::PI } else { folded };
    let (sin_f, cos_f) = base.sin_cos();
    let half_diag = 0.5 * ((grid.q_max - grid.q_min).powi(2) + (grid.p_max - grid.p_min).powi(2)).sqrt();
    let h = grid.dq().min(grid.dp());
    let n_t = (2.0 * half_diag / h).ceil() as usize + 1;
    let xs: Vec<f64> = grid.q_values();
    let mut values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for k in 0..=n_t {
                let t = -half_diag + k as f64 * 2.0 * half_diag / n_t as f64;
                let q = x * cos_f - t * sin_f;
                let p = x * sin_f + t * cos_f;
                let weight = if k == 0 || k == n_t { 0.5 } else { 1.0 };
                acc += weight * bicubic(&w.values, grid, q, p);
            }
            acc * 2.0 * half_diag / n_t as f64
        })
        .collect();
    // Exact mass conservation: rescale so the projection integrates to the
    // same trapezoid total as the input distribution.
    let total = trapezoid(&values, grid.dq());
    let target = w.integral();
    if total.abs() > 1e-12 {
        let scale = target / total;
        values.iter_mut().for_each(|v| *v *= scale);
    }
    if flip {
        values.reverse();
    }
    values
}

/// Radon transform of a distribution at order s ≤ 0: the delta-line projection
/// w(x,φ) = ∫ W δ(x − q cosφ − p sinφ), tagged with the input's order. Orders
/// above 0 need the Gaussian string of `radon_s` instead.
pub fn radon(w: &QuasiDistribution, phi: f64) -> Result<Tomogram> {
    check_radon_grid(&w.grid)?;
    if w.s > 1e-12 {
        return Err(Error::OrderMismatch { expected: 0.0, got: w.s });
    }
    Ok(Tomogram {
        grid: QuadratureGrid { x_min: w.grid.q_min, x_max: w.grid.q_max, n: w.grid.n_q },
        values: radon_values(w, phi),
        phi,
        s: w.s,
    })
}

/// Gaussian-string sampling at order s > 0: the delta line is replaced by a
/// Gaussian cross-section exp(−(x−⋅)²/s)/√(sπ), applied to the distribution
/// of matching order +s. Equivalent to the plain projection followed by a 1-D
/// Gaussian blur of variance s/2.
pub fn radon_s(w: &QuasiDistribution, phi: f64, s: f64) -> Result<Tomogram> {
    if s <= 0.0 {
        return Err(Error::InvalidOrder(format!(
            "string width s = {s} must be positive; use radon for the delta string"
        )));
    }
    if (w.s - s).abs() > 1e-12 {
        return Err(Error::OrderMismatch { expected: s, got: w.s });
    }
    check_radon_grid(&w.grid)?;
    let raw = radon_values(w, phi);
    let dx = w.grid.dq();
    let blurred = apply_spectral_multiplier(&raw, dx, |k| (-s * k * k / 4.0).exp());
    Ok(Tomogram {
        grid: QuadratureGrid { x_min: w.grid.q_min, x_max: w.grid.q_max, n: w.grid.n_q },
        values: blurred,
        phi,
        s,
    })
}

/// Filtered back-projection with a ramp filter under a raised-cosine window.
/// `cutoff` is the window cutoff as a fraction of the Nyquist frequency.
pub fn inverse_radon_with_cutoff(ts: &TomogramSet, cutoff: f64) -> Result<QuasiDistribution> {
    let n_angles = ts.len();
    if n_angles < 8 {
        return Err(Error::TomogramSet(format!(
            "{n_angles} angles are too few for back-projection (need at least 8)"
        )));
    }
    if !(0.0..=1.0).contains(&cutoff) || cutoff == 0.0 {
        return Err(Error::InvalidParameter(format!("cutoff fraction {cutoff} outside (0, 1]")));
    }
    let x_grid = ts.tomograms[0].grid;
    let dx = x_grid.dx();
    let k_nyquist = std::f64::consts::PI / dx;
    let k_cut = cutoff * k_nyquist;
    let window = |k: f64| -> f64 {
        let a = k.abs();
        if a >= k_cut {
            0.0
        } else {
            a * 0.5 * (1.0 + (std::f64::consts::PI * a / k_cut).cos())
        }
    };
    // Pad before ramp filtering: the ramp kernel has 1/x² tails, and cyclic
    // filtering at the bare length pushes them back into the support, which
    // drains roughly half the reconstructed mass.
    let n_pad = (4 * x_grid.n).next_power_of_two();
    let filtered: Vec<Vec<f64>> = ts
        .tomograms
        .par_iter()
        .map(|t| {
            let mut padded = vec![0.0; n_pad];
            padded[..t.values.len()].copy_from_slice(&t.values);
            let mut out = apply_spectral_multiplier(&padded, dx, window);
            out.truncate(t.values.len());
            out
        })
        .collect();

    let n = x_grid.n;
    let grid = PhaseSpaceGrid {
        q_min: x_grid.x_min,
        q_max: x_grid.x_max,
        p_min: x_grid.x_min,
        p_max: x_grid.x_max,
        n_q: n,
        n_p: n,
    };
    let qs = grid.q_values();
    let ps = grid.p_values();
    let weight = std::f64::consts::PI / n_angles as f64 / (2.0 * std::f64::consts::PI);
    let mut values = Array2::zeros((n, n));
    // Fixed angle order keeps the accumulation bit-stable.
    for (t, proj) in ts.tomograms.iter().zip(&filtered) {
        let (sin_a, cos_a) = t.phi.sin_cos();
        for (i, &q) in qs.iter().enumerate() {
            for (j, &p) in ps.iter().enumerate() {
                let x = q * cos_a + p * sin_a;
                let f = (x - x_grid.x_min) / dx;
                if f >= 0.0 && f <= (n - 1) as f64 {
                    let i0 = (f.floor() as usize).min(n - 2);
                    let frac = f - i0 as f64;
                    values[(i, j)] +=
                        weight * (proj[i0] * (1.0 - frac) + proj[i0 + 1] * frac);
                }
            }
        }
    }
    let mut out = QuasiDistribution {
        grid,
        values,
        s: ts.s,
        truncation_warning: false,
        quality_warning: n_angles < 32,
    };
    let total = out.integral();
    if total.abs() < 1e-6 {
        return Err(Error::TomogramSet(
            "back-projection integrates to zero; input tomograms are degenerate".into(),
        ));
    }
    out.values.mapv_inplace(|v| v / total);
    Ok(out)
}

/// Back-projection with the default 0.9-Nyquist raised-cosine cutoff.
pub fn inverse_radon(ts: &TomogramSet) -> Result<QuasiDistribution> {
    inverse_radon_with_cutoff(ts, 0.9)
}

/// Uniformly spaced projections of `w` over [0, π).
pub fn project_uniform(w: &QuasiDistribution, n_angles: usize) -> Result<TomogramSet> {
    let angles: Vec<f64> =
        (0..n_angles).map(|i| i as f64 * std::f64::consts::PI / n_angles as f64).collect();
    let tomograms: Vec<Tomogram> =
        angles.par_iter().map(|&phi| radon(w, phi)).collect::<Result<_>>()?;
    TomogramSet::new(tomograms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::quasi_distribution;
    use crate::state::DensityOperator;
    use std::f64::consts::PI;

    fn wigner(rho: &DensityOperator, extent: f64, n: usize) -> QuasiDistribution {
        let g = PhaseSpaceGrid::symmetric(extent, n).unwrap();
        quasi_distribution(rho, &g, 0.0).unwrap()
    }

    fn l2_relative(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn vacuum_projection_is_isotropic_gaussian() {
        let w = wigner(&DensityOperator::vacuum(8), 6.0, 128);
        for phi in [0.0, 0.7, PI / 2.0, 2.9] {
            let t = radon(&w, phi).unwrap();
            for (i, &x) in t.grid.values().iter().enumerate().step_by(5) {
                let expected = (-x * x).exp() / PI.sqrt();
                assert!((t.values[i] - expected).abs() < 2e-4, "phi={phi}, x={x}");
            }
            assert!((t.integral() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn single_photon_projection_matches_closed_form() {
        let w = wigner(&DensityOperator::fock(8, 1).unwrap(), 6.0, 192);
        let t = radon(&w, 0.0).unwrap();
        for (i, &x) in t.grid.values().iter().enumerate().step_by(7) {
            let expected = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
            assert!((t.values[i] - expected).abs() < 2e-4, "x={x}");
        }
    }

    #[test]
    fn projection_parity_is_exact() {
        let w = wigner(&DensityOperator::example_superposition(16).unwrap(), 6.0, 128);
        // 0 + π is exact, so the mirror identity holds bit-for-bit there.
        let a = radon(&w, 0.0).unwrap();
        let b = radon(&w, PI).unwrap();
        let n = a.values.len();
        for i in 0..n {
            assert_eq!(a.values[i], b.values[n - 1 - i]);
        }
        // Elsewhere φ+π rounds, so the two fold onto base angles an ulp apart.
        for phi in [0.4, 1.3] {
            let a = radon(&w, phi).unwrap();
            let b = radon(&w, phi + PI).unwrap();
            for i in 0..n {
                assert!((a.values[i] - b.values[n - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_rejects_coarse_or_offcenter_grids() {
        let g = PhaseSpaceGrid::symmetric(6.0, 16).unwrap();
        let w = quasi_distribution(&DensityOperator::vacuum(4), &g, 0.0).unwrap();
        assert!(radon(&w, 0.0).is_err());
        let g = PhaseSpaceGrid { q_min: -4.0, q_max: 6.0, p_min: -6.0, p_max: 6.0, n_q: 64, n_p: 64 };
        let w = quasi_distribution(&DensityOperator::vacuum(4), &g, 0.0).unwrap();
        assert!(radon(&w, 0.0).is_err());
    }

    #[test]
    fn string_sampling_approaches_delta_limit() {
        let s = 1e-4;
        let g = PhaseSpaceGrid::symmetric(6.0, 128).unwrap();
        let rho = DensityOperator::vacuum(8);
        let w0 = quasi_distribution(&rho, &g, 0.0).unwrap();
        let ws = quasi_distribution(&rho, &g, s).unwrap();
        let plain = radon(&w0, 0.3).unwrap();
        let string = radon_s(&ws, 0.3, s).unwrap();
        assert!(plain.sup_distance(&string) < 1e-4);
    }

    #[test]
    fn string_sampling_of_vacuum_recovers_wigner_marginal() {
        // Projecting the order-s distribution with a width-s string gives the
        // same marginal as the delta projection of the Wigner function.
        let s = 0.6;
        let g = PhaseSpaceGrid::symmetric(6.0, 128).unwrap();
        let ws = quasi_distribution(&DensityOperator::vacuum(8), &g, s).unwrap();
        let t = radon_s(&ws, 0.0, s).unwrap();
        for (i, &x) in t.grid.values().iter().enumerate().step_by(5) {
            let expected = (-x * x).exp() / PI.sqrt();
            assert!((t.values[i] - expected).abs() < 3e-4, "x={x}");
        }
    }

    #[test]
    fn string_sampling_of_single_photon_is_nonnegative() {
        let s = 0.5;
        let g = PhaseSpaceGrid::symmetric(6.0, 128).unwrap();
        let ws = quasi_distribution(&DensityOperator::fock(8, 1).unwrap(), &g, s).unwrap();
        let t = radon_s(&ws, 1.1, s).unwrap();
        assert!(t.values.iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn string_sampling_rejects_bad_orders() {
        let g = PhaseSpaceGrid::symmetric(6.0, 64).unwrap();
        let w = quasi_distribution(&DensityOperator::vacuum(4), &g, 0.0).unwrap();
        assert!(radon_s(&w, 0.0, -0.5).is_err());
        assert!(radon_s(&w, 0.0, 0.5).is_err()); // order mismatch
    }

    #[test]
    fn string_equals_smooth_then_project() {
        let s = 0.4;
        let g = PhaseSpaceGrid::symmetric(7.0, 128).unwrap();
        let rho = DensityOperator::example_superposition(16).unwrap();
        let ws = quasi_distribution(&rho, &g, s).unwrap();
        let direct = radon_s(&ws, 0.8, s).unwrap();
        let smoothed = crate::phase_space::order_shift(&ws, 0.0).unwrap();
        let via_wigner = radon(&smoothed, 0.8).unwrap();
        assert!(direct.sup_distance(&via_wigner) < 1e-4);
    }

    #[test]
    fn set_construction_validates() {
        let w = wigner(&DensityOperator::vacuum(8), 6.0, 64);
        let a = radon(&w, 0.0).unwrap();
        let b = radon(&w, 1.0).unwrap();
        assert!(TomogramSet::new(vec![a.clone()]).is_err());
        assert!(TomogramSet::new(vec![b.clone(), a.clone()]).is_err()); // not increasing
        let mut bad = b.clone();
        bad.values.iter_mut().for_each(|v| *v *= 1.1);
        assert!(TomogramSet::new(vec![a.clone(), bad]).is_err()); // not normalized
        assert!(TomogramSet::new(vec![a, b]).is_ok());
    }

    #[test]
    fn vacuum_round_trip() {
        let w = wigner(&DensityOperator::vacuum(8), 6.0, 256);
        let ts = project_uniform(&w, 64).unwrap();
        let rec = inverse_radon(&ts).unwrap();
        assert!(!rec.quality_warning);
        assert!(l2_relative(&rec.values, &w.values) < 0.02);
    }

    #[test]
    fn superposition_round_trip() {
        let w = wigner(&DensityOperator::example_superposition(16).unwrap(), 6.0, 256);
        let ts = project_uniform(&w, 180).unwrap();
        let rec = inverse_radon(&ts).unwrap();
        assert!(l2_relative(&rec.values, &w.values) < 0.05);
        // Wigner negativity survives reconstruction.
        assert!(rec.min_value() < -0.01);
    }

    #[test]
    fn tomogram_round_trip_sup_norm() {
        let w = wigner(&DensityOperator::example_superposition(16).unwrap(), 6.0, 256);
        let ts = project_uniform(&w, 64).unwrap();
        let rec = inverse_radon(&ts).unwrap();
        for phi in [0.0, 0.5, 1.7] {
            let orig = radon(&w, phi).unwrap();
            let back = radon(&rec, phi).unwrap();
            let peak = orig.values.iter().cloned().fold(0.0f64, f64::max);
            assert!(orig.sup_distance(&back) < 0.02 * peak.max(1.0));
        }
    }

    #[test]
    fn angle_count_thresholds() {
        let w = wigner(&DensityOperator::vacuum(8), 6.0, 128);
        let few = project_uniform(&w, 6);
        assert!(few.is_err() || inverse_radon(&few.unwrap()).is_err());
        let warn_set = project_uniform(&w, 12).unwrap();
        let rec = inverse_radon(&warn_set).unwrap();
        assert!(rec.quality_warning);
    }

    #[test]
    fn degenerate_tomograms_rejected() {
        let grid = QuadratureGrid { x_min: -6.0, x_max: 6.0, n: 64 };
        let zeros: Vec<Tomogram> = (0..16)
            .map(|i| Tomogram {
                grid,
                values: vec![0.0; 64],
                phi: i as f64 * PI / 16.0,
                s: 0.0,
            })
            .collect();
        assert!(TomogramSet::new(zeros).is_err());
    }
}

