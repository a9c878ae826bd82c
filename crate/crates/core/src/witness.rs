//! P-nonclassicality witnesses from a single quadrature tomogram: the two
//! demarginalization maps build a fictitious two-mode-free distribution whose
//! failure to be a legitimate quantum state certifies nonclassicality of the
//! source.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, PhaseSpaceGrid};
use crate::hermite::{ln_factorial, MAX_HERMITE_INDEX};
use crate::phase_space::{QuasiDistribution, Tomogram};
use crate::protocol::{extract_mech_tomogram, ReadoutConfig};

/// Which demarginalization map produced a fictitious distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemarginalizationMap {
    /// Product with the vacuum tomogram at the same order.
    First,
    /// Product with a duplicate of the input tomogram.
    Second,
}

/// Separable 2-D distribution built from one tomogram; exact product form
/// values[i][j] = w1(x_i)·w2(p_j).
#[derive(Debug, Clone)]
pub struct FictitiousDistribution {
    pub dist: QuasiDistribution,
    pub provenance: DemarginalizationMap,
    /// Identifier of the source tomogram (angle and order).
    pub source_tomogram_id: String,
    factor_x: Vec<f64>,
    factor_p: Vec<f64>,
}

impl FictitiousDistribution {
    pub fn factors(&self) -> (&[f64], &[f64]) {
        (&self.factor_x, &self.factor_p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Legitimate,
    Illegitimate,
    Inconclusive,
}

/// Result of reconstructing the fictitious operator in the number basis.
#[derive(Debug, Clone)]
pub struct LegitimacyReport {
    pub fock_matrix: DMatrix<Complex64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub verdict: Verdict,
    pub dim: usize,
}

/// Eigenvalue floor below which a fictitious operator is called illegitimate.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-6;

/// Highest-level population above which the truncation is deemed unconverged.
const CONVERGENCE_TOLERANCE: f64 = 1e-6;

fn check_map_input(t: &Tomogram) -> Result<()> {
    if !(t.s > -1.0 && t.s <= 1.0) {
        return Err(Error::InvalidOrder(format!("tomogram order {} outside (-1, 1]", t.s)));
    }
    let total = t.integral();
    if (total - 1.0).abs() > 1e-4 {
        return Err(Error::InvalidState(format!(
            "tomogram integrates to {total}; demarginalization needs a normalized input"
        )));
    }
    Ok(())
}

fn product_distribution(
    t: &Tomogram,
    factor_p: Vec<f64>,
    provenance: DemarginalizationMap,
) -> FictitiousDistribution {
    let n = t.grid.n;
    let grid = PhaseSpaceGrid {
        q_min: t.grid.x_min,
        q_max: t.grid.x_max,
        p_min: t.grid.x_min,
        p_max: t.grid.x_max,
        n_q: n,
        n_p: n,
    };
    let mut values = Array2::zeros((n, n));
    for (i, &a) in t.values.iter().enumerate() {
        for (j, &b) in factor_p.iter().enumerate() {
            values[(i, j)] = a * b;
        }
    }
    FictitiousDistribution {
        dist: QuasiDistribution {
            grid,
            values,
            s: t.s,
            truncation_warning: false,
            quality_warning: false,
        },
        provenance,
        source_tomogram_id: format!("phi={:.6},s={:.6}", t.phi, t.s),
        factor_x: t.values.clone(),
        factor_p,
    }
}

/// First demarginalization map: the tomogram times the vacuum tomogram
/// w_0(p; s) = e^{−p²/(1−s)}/√(π(1−s)) at the same order.
pub fn demarginalize_first(t: &Tomogram) -> Result<FictitiousDistribution> {
    check_map_input(t)?;
    let norm = (PI * (1.0 - t.s)).sqrt();
    let vac: Vec<f64> =
        t.grid.values().iter().map(|&p| (-p * p / (1.0 - t.s)).exp() / norm).collect();
    Ok(product_distribution(t, vac, DemarginalizationMap::First))
}

/// Second demarginalization map: the tomogram times its own duplicate,
/// relabeled x → p.
pub fn demarginalize_second(t: &Tomogram) -> Result<FictitiousDistribution> {
    check_map_input(t)?;
    Ok(product_distribution(t, t.values.clone(), DemarginalizationMap::Second))
}

/// 1-D characteristic function χ(u) = ∫ f(x) e^{iux} dx on the given grid,
/// evaluated at each requested frequency by direct trapezoid quadrature.
fn characteristic_1d(values: &[f64], grid: &crate::grid::QuadratureGrid, us: &[f64]) -> Vec<Complex64> {
    let xs = grid.values();
    let dx = grid.dx();
    us.iter()
        .map(|&u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in xs.iter().enumerate() {
                let w = if k == 0 || k == xs.len() - 1 { 0.5 } else { 1.0 };
                acc += w * values[k] * Complex64::new(0.0, u * x).exp();
            }
            acc * dx
        })
        .collect()
}

/// Matrix elements D[m][n] = ⟨m|D(β)|n⟩ of the displacement operator, filled
/// by the stable recurrences
///   D_{00} = e^{−|β|²/2},  D_{m0} = (β/√m) D_{m−1,0},
///   D_{m,n+1} = (√m D_{m−1,n} − β* D_{mn}) / √(n+1).
fn displacement_elements(beta: Complex64, dim: usize, out: &mut [Complex64]) {
    let bc = beta.conj();
    out[0] = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for m in 1..dim {
        out[m * dim] = beta / (m as f64).sqrt() * out[(m - 1) * dim];
    }
    for n in 0..dim - 1 {
        let rn = 1.0 / ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let upper = if m > 0 { (m as f64).sqrt() * out[(m - 1) * dim + n] } else { Complex64::new(0.0, 0.0) };
            out[m * dim + n + 1] = (upper - bc * out[m * dim + n]) * rn;
        }
    }
}

fn min_eigenvalue_hermitian(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    // Real symmetric embedding [[Re, −Im], [Im, Re]] has the same spectrum,
    // doubled.
    let mut embed = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let v = (m[(i, j)] + m[(j, i)].conj()) / 2.0;
            embed[(i, j)] = v.re;
            embed[(i + d, j + d)] = v.re;
            embed[(i + d, j)] = v.im;
            embed[(i, j + d)] = -v.im;
        }
    }
    let eig = SymmetricEigen::new(embed);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Number-basis matrix elements of the fictitious operator:
/// ⟨m|ρ_f|n⟩ = ∬ W_f(q,p; s) K_{nm}(α; −s) dq dp, evaluated through the
/// separable moment table rather than a per-point kernel grid.
pub fn reconstruct_fictitious_operator(
    f: &FictitiousDistribution,
    dim: usize,
) -> Result<LegitimacyReport> {
    if dim < 2 || dim - 1 > MAX_HERMITE_INDEX {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} outside [2, {}]",
            MAX_HERMITE_INDEX + 1
        )));
    }
    // Coverage: the grid must span ≥ 6 standard deviations of each factor.
    let axis = crate::grid::QuadratureGrid {
        x_min: f.dist.grid.q_min,
        x_max: f.dist.grid.q_max,
        n: f.dist.grid.n_q,
    };
    let extent = axis.x_max - axis.x_min;
    for factor in [&f.factor_x, &f.factor_p] {
        let xs = axis.values();
        let total = trapezoid(factor, axis.dx());
        let mean: f64 =
            xs.iter().zip(factor.iter()).map(|(x, v)| x * v).sum::<f64>() * axis.dx() / total;
        let var: f64 = xs
            .iter()
            .zip(factor.iter())
            .map(|(x, v)| (x - mean) * (x - mean) * v)
            .sum::<f64>()
            * axis.dx()
            / total;
        if extent < 6.0 * var.max(0.0).sqrt() {
            return Ok(LegitimacyReport {
                fock_matrix: DMatrix::zeros(dim, dim),
                min_eigenvalue: f64::NAN,
                trace: f64::NAN,
                verdict: Verdict::Inconclusive,
                dim,
            });
        }
    }

    // Reconstruction through the characteristic function,
    //   ⟨m|ρ_f|n⟩ = (1/2π) ∬ χ1(u) χ2(v) e^{−s(u²+v²)/4} ⟨m|D(β)|n⟩ du dv,
    // with β = (v − iu)/√2. Every factor is O(1) (the displacement elements
    // are bounded by 1), so the quadrature carries no catastrophic
    // cancellation at any truncation dimension.
    let s = f.dist.s;
    let nmax = (dim - 1) as f64;
    // Integrand envelope in R = |β|: e^{−(1+s)R²/2} R^{2n}/n! with |χ| ≤ O(1).
    let env = |r: f64| -> f64 {
        -(1.0 + s) * r * r / 2.0 + 2.0 * nmax * r.ln() - ln_factorial(dim - 1)
    };
    let r_peak = (2.0 * nmax / (1.0 + s)).sqrt().max(1.0);
    let mut r_max = r_peak;
    while env(r_max) > env(r_peak) - 40.0 {
        r_max += 0.25;
    }
    let half_extent = axis.x_max.abs().max(axis.x_min.abs());
    let u_max = (r_max * std::f64::consts::SQRT_2).min(PI / axis.dx());
    let du = PI / (half_extent + (2.0 * dim as f64).sqrt() + 2.0);
    let half = (u_max / du).ceil() as i64;
    let us: Vec<f64> = (-half..=half).map(|i| i as f64 * du).collect();
    let chi1 = characteristic_1d(&f.factor_x, &axis, &us);
    let chi2 = characteristic_1d(&f.factor_p, &axis, &us);

    let weight0 = du * du / (2.0 * PI);
    let rows: Vec<Vec<Complex64>> = us
        .par_iter()
        .enumerate()
        .map(|(iu, &u)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut d = vec![Complex64::new(0.0, 0.0); dim * dim];
            for (iv, &v) in us.iter().enumerate() {
                let damp = (-s * (u * u + v * v) / 4.0).exp();
                let w = chi1[iu] * chi2[iv] * (damp * weight0);
                if w.norm_sqr() < 1e-60 {
                    continue;
                }
                let beta = Complex64::new(v, -u) / std::f64::consts::SQRT_2;
                displacement_elements(beta, dim, &mut d);
                for (a, &e) in acc.iter_mut().zip(d.iter()) {
                    *a += w * e;
                }
            }
            acc
        })
        .collect();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for row in rows {
        for m in 0..dim {
            for n in 0..dim {
                rho[(m, n)] += row[m * dim + n];
            }
        }
    }

    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    if !trace.is_finite() || trace.abs() < 1e-6 {
        return Ok(LegitimacyReport {
            fock_matrix: rho,
            min_eigenvalue: f64::NAN,
            trace,
            verdict: Verdict::Inconclusive,
            dim,
        });
    }
    let normalized = rho.map(|v| v / Complex64::new(trace, 0.0));
    let top_population = normalized[(dim - 1, dim - 1)].re;
    let min_eig = min_eigenvalue_hermitian(&normalized);
    let verdict = if top_population.abs() > CONVERGENCE_TOLERANCE {
        Verdict::Inconclusive
    } else if min_eig < -EIGENVALUE_TOLERANCE {
        Verdict::Illegitimate
    } else {
        Verdict::Legitimate
    };
    Ok(LegitimacyReport { fock_matrix: normalized, min_eigenvalue: min_eig, trace, verdict, dim })
}

/// Dimensions over which a verdict must be stable to count.
pub const DEFAULT_DIMS: [usize; 3] = [10, 20, 30];

/// Reconstructs at several truncation dimensions and keeps the verdict only if
/// it is stable across them. Dimensions whose truncation has not converged
/// (flagged inconclusive by the top-population check) do not vote — a broad
/// state legitimately needs the larger dimensions — but the converged ones
/// must agree; disagreement among them, or no converged dimension at all, is
/// inconclusive.
pub fn legitimacy_sweep(
    f: &FictitiousDistribution,
    dims: &[usize],
) -> Result<(Verdict, Vec<LegitimacyReport>)> {
    let reports: Vec<LegitimacyReport> =
        dims.iter().map(|&d| reconstruct_fictitious_operator(f, d)).collect::<Result<_>>()?;
    let converged: Vec<Verdict> = reports
        .iter()
        .map(|r| r.verdict)
        .filter(|v| *v != Verdict::Inconclusive)
        .collect();
    let verdict = match converged.first() {
        Some(&first) if converged.iter().all(|v| *v == first) => first,
        _ => Verdict::Inconclusive,
    };
    Ok((verdict, reports))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessVerdict {
    Nonclassical,
    Classical,
    Inconclusive,
}

/// Combined outcome of running both maps on one extracted tomogram.
#[derive(Debug)]
pub struct WitnessReport {
    pub verdict: WitnessVerdict,
    /// First-map sweep; None when an uncharacterized noise channel makes the
    /// order correction unavailable.
    pub first_map: Option<(Verdict, Vec<LegitimacyReport>)>,
    pub second_map: (Verdict, Vec<LegitimacyReport>),
    /// Order used for the first map after noise correction.
    pub corrected_order: f64,
    pub tomogram_order: f64,
}

fn combine(verdicts: &[Verdict]) -> WitnessVerdict {
    if verdicts.iter().any(|v| *v == Verdict::Illegitimate) {
        WitnessVerdict::Nonclassical
    } else if verdicts.iter().all(|v| *v == Verdict::Legitimate) {
        WitnessVerdict::Classical
    } else {
        WitnessVerdict::Inconclusive
    }
}

/// Runs the readout once, then both demarginalization maps on the single
/// extracted tomogram. A characterized noise channel lowers the order used by
/// the first map (the measured tomogram is a genuine tomogram at
/// s − 2·added-variance); the second map uses the tomogram as tagged.
pub fn witness_from_protocol(cfg: &ReadoutConfig) -> Result<WitnessReport> {
    let t = extract_mech_tomogram(cfg)?;
    let noise_var = cfg.noise_variance();
    let corrected_order = t.s - 2.0 * noise_var;
    let characterized = cfg.noise.as_ref().map(|n| n.characterized).unwrap_or(true);

    let first_map = if characterized {
        let mut tc = t.clone();
        tc.s = corrected_order;
        let f1 = demarginalize_first(&tc)?;
        Some(legitimacy_sweep(&f1, &DEFAULT_DIMS)?)
    } else {
        None
    };
    let f2 = demarginalize_second(&t)?;
    let second_map = legitimacy_sweep(&f2, &DEFAULT_DIMS)?;

    let mut verdicts = vec![second_map.0];
    if let Some((v, _)) = &first_map {
        verdicts.push(*v);
    }
    Ok(WitnessReport {
        verdict: combine(&verdicts),
        first_map,
        second_map,
        corrected_order,
        tomogram_order: t.s,
    })
}
