//! Python bindings for the pulsed-readout toolkit: states, grids,
//! distributions, tomograms, the readout protocol, nonclassicality
//! witnesses, and the feasibility screener.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use omtomo::feasibility::{feasibility_table, reference_systems, FeasibilityAssumptions};
use omtomo::grid::PhaseSpaceGrid;
use omtomo::phase_space::{self, Tomogram};
use omtomo::protocol::{self, NoiseChannel, ReadoutConfig};
use omtomo::state::DensityOperator;
use omtomo::tomography::{self, TomogramSet};
use omtomo::transform::{self, ProtocolParams};
use omtomo::witness::{self, LegitimacyReport, Verdict, WitnessVerdict, DEFAULT_DIMS};

fn err(e: omtomo::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Fock-truncated density operator of one mode.
#[pyclass(name = "DensityOperator")]
#[derive(Clone)]
struct PyDensityOperator {
    inner: DensityOperator,
}

#[pymethods]
impl PyDensityOperator {
    #[staticmethod]
    fn vacuum(dim: usize) -> Self {
        Self { inner: DensityOperator::vacuum(dim) }
    }

    #[staticmethod]
    fn fock(dim: usize, n: usize) -> PyResult<Self> {
        Ok(Self { inner: DensityOperator::fock(dim, n).map_err(err)? })
    }

    #[staticmethod]
    fn thermal(dim: usize, mean_occupation: f64) -> PyResult<Self> {
        Ok(Self { inner: DensityOperator::thermal(dim, mean_occupation).map_err(err)? })
    }

    #[staticmethod]
    fn coherent(dim: usize, alpha_re: f64, alpha_im: f64) -> PyResult<Self> {
        let alpha = Complex64::new(alpha_re, alpha_im);
        Ok(Self { inner: DensityOperator::coherent(dim, alpha).map_err(err)? })
    }

    #[staticmethod]
    fn squeezed_vacuum(dim: usize, r: f64) -> PyResult<Self> {
        Ok(Self { inner: DensityOperator::squeezed_vacuum(dim, r).map_err(err)? })
    }

    /// The worked four-component superposition (|0> + 2|1> + |2> + 2|3>)/sqrt(10).
    #[staticmethod]
    fn superposition(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: DensityOperator::example_superposition(dim).map_err(err)? })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn population(&self, n: usize) -> f64 {
        self.inner.population(n)
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn __repr__(&self) -> String {
        format!("DensityOperator(dim={}, purity={:.6})", self.inner.dim(), self.inner.purity())
    }
}

/// Uniform rectangular phase-space grid in (q, p).
#[pyclass(name = "PhaseSpaceGrid")]
#[derive(Clone, Copy)]
struct PyPhaseSpaceGrid {
    inner: PhaseSpaceGrid,
}

#[pymethods]
impl PyPhaseSpaceGrid {
    #[new]
    fn new(q_min: f64, q_max: f64, p_min: f64, p_max: f64, n_q: usize, n_p: usize) -> PyResult<Self> {
        Ok(Self { inner: PhaseSpaceGrid::new(q_min, q_max, p_min, p_max, n_q, n_p).map_err(err)? })
    }

    #[staticmethod]
    fn symmetric(half_extent: f64, points: usize) -> PyResult<Self> {
        Ok(Self { inner: PhaseSpaceGrid::symmetric(half_extent, points).map_err(err)? })
    }

    fn q_values(&self) -> Vec<f64> {
        self.inner.q_values()
    }

    fn p_values(&self) -> Vec<f64> {
        self.inner.p_values()
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "PhaseSpaceGrid(q=[{}, {}], p=[{}, {}], n_q={}, n_p={})",
            g.q_min, g.q_max, g.p_min, g.p_max, g.n_q, g.n_p
        )
    }
}

/// s-parameterized quasiprobability distribution on a grid.
#[pyclass(name = "QuasiDistribution")]
#[derive(Clone)]
struct PyQuasiDistribution {
    inner: phase_space::QuasiDistribution,
}

#[pymethods]
impl PyQuasiDistribution {
    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn grid(&self) -> PyPhaseSpaceGrid {
        PyPhaseSpaceGrid { inner: self.inner.grid }
    }

    /// Values as a row-major nested list, rows indexed by q.
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.inner.grid.n_q)
            .map(|i| (0..self.inner.grid.n_p).map(|j| self.inner.values[(i, j)]).collect())
            .collect()
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    fn min_value(&self) -> f64 {
        self.inner.min_value()
    }

    /// Gaussian-smooths the distribution down to a lower order.
    fn order_shift(&self, s_target: f64) -> PyResult<Self> {
        Ok(Self { inner: phase_space::order_shift(&self.inner, s_target).map_err(err)? })
    }

    /// Marginal along the quadrature rotated by phi.
    fn radon(&self, phi: f64) -> PyResult<PyTomogram> {
        Ok(PyTomogram { inner: tomography::radon(&self.inner, phi).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "QuasiDistribution(s={}, integral={:.6}, min={:.6})",
            self.inner.s,
            self.inner.integral(),
            self.inner.min_value()
        )
    }
}

/// 1-D quadrature marginal tagged with its angle and order.
#[pyclass(name = "Tomogram")]
#[derive(Clone)]
struct PyTomogram {
    inner: Tomogram,
}

#[pymethods]
impl PyTomogram {
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    fn xs(&self) -> Vec<f64> {
        self.inner.grid.values()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    fn __repr__(&self) -> String {
        format!("Tomogram(phi={:.6}, s={}, n={})", self.inner.phi, self.inner.s, self.inner.values.len())
    }
}

/// Solved pulse parameters for the readout protocol.
#[pyclass(name = "ProtocolParams")]
#[derive(Clone, Copy)]
struct PyProtocolParams {
    inner: ProtocolParams,
}

#[pymethods]
impl PyProtocolParams {
    fn chi(&self) -> f64 {
        self.inner.chi()
    }

    fn u(&self) -> f64 {
        self.inner.u()
    }

    fn phi(&self) -> f64 {
        self.inner.phi()
    }

    fn s_star(&self) -> f64 {
        self.inner.s_star()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[setter]
    fn set_epsilon(&mut self, epsilon: f64) {
        self.inner.epsilon = epsilon;
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    fn __repr__(&self) -> String {
        format!(
            "ProtocolParams(chi={:.4}, u={:.4}, tau={:.4e}, s_star={:.4e})",
            self.inner.chi(),
            self.inner.u(),
            self.inner.tau,
            self.inner.s_star()
        )
    }
}

/// One configured readout run: pulse parameters, mechanical state, grid.
#[pyclass(name = "ReadoutConfig")]
struct PyReadoutConfig {
    inner: ReadoutConfig,
}

#[pymethods]
impl PyReadoutConfig {
    #[new]
    #[pyo3(signature = (params, state, phi_d, grid, noise_covariance=None, characterized=true))]
    fn new(
        params: PyProtocolParams,
        state: PyDensityOperator,
        phi_d: f64,
        grid: PyPhaseSpaceGrid,
        noise_covariance: Option<[[f64; 2]; 2]>,
        characterized: bool,
    ) -> PyResult<Self> {
        let noise = match noise_covariance {
            None => None,
            Some(cov) => {
                let mut nc = NoiseChannel::new(cov, None).map_err(err)?;
                nc.characterized = characterized;
                Some(nc)
            }
        };
        Ok(Self {
            inner: ReadoutConfig::new(params.inner, state.inner, phi_d, grid.inner, noise)
                .map_err(err)?,
        })
    }

    fn s_star(&self) -> f64 {
        self.inner.s_star()
    }

    fn wigner_regime(&self) -> bool {
        self.inner.wigner_regime()
    }

    fn readout_angle(&self) -> f64 {
        self.inner.readout_angle()
    }
}

/// Solves the pulse and rotation conditions for the given coupling target.
#[pyfunction]
fn solve_pulse_conditions(
    g0: f64,
    omega_m: f64,
    omega_o: f64,
    chi: f64,
    k: u32,
) -> PyResult<PyProtocolParams> {
    Ok(PyProtocolParams {
        inner: transform::solve_pulse_conditions(g0, omega_m, omega_o, chi, k).map_err(err)?,
    })
}

/// Evaluates the order-s quasiprobability distribution of a state.
#[pyfunction]
fn quasi_distribution(
    state: &PyDensityOperator,
    grid: &PyPhaseSpaceGrid,
    s: f64,
) -> PyResult<PyQuasiDistribution> {
    Ok(PyQuasiDistribution {
        inner: phase_space::quasi_distribution(&state.inner, &grid.inner, s).map_err(err)?,
    })
}

/// Extracts the mechanical quadrature tomogram from one readout run.
#[pyfunction]
fn extract_mech_tomogram(cfg: &PyReadoutConfig) -> PyResult<PyTomogram> {
    Ok(PyTomogram { inner: protocol::extract_mech_tomogram(&cfg.inner).map_err(err)? })
}

/// Runs the readout over uniformly spaced angles and reconstructs the
/// distribution by filtered back-projection.
#[pyfunction]
fn full_tomography(
    cfg: &PyReadoutConfig,
    angles: usize,
) -> PyResult<(Vec<PyTomogram>, PyQuasiDistribution)> {
    let targets: Vec<f64> =
        (0..angles).map(|i| std::f64::consts::PI * i as f64 / angles as f64).collect();
    let (set, rec) = protocol::full_tomography(&cfg.inner, &targets).map_err(err)?;
    let tomos = set.tomograms().iter().map(|t| PyTomogram { inner: t.clone() }).collect();
    Ok((tomos, PyQuasiDistribution { inner: rec }))
}

/// Filtered back-projection of a set of tomograms.
#[pyfunction]
fn inverse_radon(tomograms: Vec<PyTomogram>) -> PyResult<PyQuasiDistribution> {
    let set = TomogramSet::new(tomograms.into_iter().map(|t| t.inner).collect()).map_err(err)?;
    Ok(PyQuasiDistribution { inner: tomography::inverse_radon(&set).map_err(err)? })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Legitimate => "legitimate",
        Verdict::Illegitimate => "illegitimate",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn sweep_dict<'py>(
    py: Python<'py>,
    verdict: Verdict,
    reports: &[LegitimacyReport],
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("verdict", verdict_str(verdict))?;
    let dims: Vec<Bound<'py, PyDict>> = reports
        .iter()
        .map(|r| {
            let e = PyDict::new_bound(py);
            e.set_item("dim", r.dim)?;
            e.set_item("verdict", verdict_str(r.verdict))?;
            e.set_item("min_eigenvalue", r.min_eigenvalue)?;
            e.set_item("trace", r.trace)?;
            Ok(e)
        })
        .collect::<PyResult<_>>()?;
    d.set_item("dims", dims)?;
    Ok(d)
}

/// Runs both demarginalization maps on one tomogram and reports the
/// per-dimension legitimacy sweeps.
#[pyfunction]
fn witness_tomogram<'py>(py: Python<'py>, t: &PyTomogram) -> PyResult<Bound<'py, PyDict>> {
    let f1 = witness::demarginalize_first(&t.inner).map_err(err)?;
    let (v1, r1) = witness::legitimacy_sweep(&f1, &DEFAULT_DIMS).map_err(err)?;
    let f2 = witness::demarginalize_second(&t.inner).map_err(err)?;
    let (v2, r2) = witness::legitimacy_sweep(&f2, &DEFAULT_DIMS).map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item("first_map", sweep_dict(py, v1, &r1)?)?;
    d.set_item("second_map", sweep_dict(py, v2, &r2)?)?;
    let nonclassical = v1 == Verdict::Illegitimate || v2 == Verdict::Illegitimate;
    let classical = v1 == Verdict::Legitimate && v2 == Verdict::Legitimate;
    d.set_item(
        "verdict",
        if nonclassical { "nonclassical" } else if classical { "classical" } else { "inconclusive" },
    )?;
    Ok(d)
}

/// Full protocol witness: readout extraction followed by both maps.
#[pyfunction]
fn witness_from_protocol<'py>(
    py: Python<'py>,
    cfg: &PyReadoutConfig,
) -> PyResult<Bound<'py, PyDict>> {
    let report = witness::witness_from_protocol(&cfg.inner).map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item(
        "verdict",
        match report.verdict {
            WitnessVerdict::Nonclassical => "nonclassical",
            WitnessVerdict::Classical => "classical",
            WitnessVerdict::Inconclusive => "inconclusive",
        },
    )?;
    d.set_item("tomogram_order", report.tomogram_order)?;
    d.set_item("corrected_order", report.corrected_order)?;
    match &report.first_map {
        Some((v, r)) => d.set_item("first_map", sweep_dict(py, *v, r)?)?,
        None => d.set_item("first_map", py.None())?,
    }
    d.set_item("second_map", sweep_dict(py, report.second_map.0, &report.second_map.1)?)?;
    Ok(d)
}

/// Continuous-measurement comparison tomogram for the same state.
#[pyfunction]
#[pyo3(signature = (state, efficiency, sigma_p, phi=0.0))]
fn classical_readout_tomogram(
    state: &PyDensityOperator,
    efficiency: f64,
    sigma_p: f64,
    phi: f64,
) -> PyResult<PyTomogram> {
    Ok(PyTomogram {
        inner: protocol::classical_readout_tomogram(&state.inner, efficiency, sigma_p, phi)
            .map_err(err)?,
    })
}

/// Naive frequency-domain deconvolution of the classical readout kernel;
/// returns the recovered tomogram and an instability report.
#[pyfunction]
#[pyo3(signature = (t, efficiency, noise_amplitude, seed=0))]
fn naive_deconvolution<'py>(
    py: Python<'py>,
    t: &PyTomogram,
    efficiency: f64,
    noise_amplitude: f64,
    seed: u64,
) -> PyResult<(PyTomogram, Bound<'py, PyDict>)> {
    let (rec, report) =
        protocol::naive_deconvolution(&t.inner, efficiency, noise_amplitude, seed).map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item("input_relative_error", report.input_relative_error)?;
    d.set_item("output_relative_error", report.output_relative_error)?;
    d.set_item("amplification", report.amplification)?;
    Ok((PyTomogram { inner: rec }, d))
}

/// Screens the built-in published platforms; one dict per row.
#[pyfunction]
fn feasibility_reference_table(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    let reports = feasibility_table(&reference_systems(), &FeasibilityAssumptions::default())
        .map_err(err)?;
    reports
        .iter()
        .map(|r| {
            let d = PyDict::new_bound(py);
            d.set_item("name", &r.name)?;
            d.set_item("sideband_ratio", r.sideband_ratio)?;
            d.set_item("regime", format!("{:?}", r.regime_flag))?;
            d.set_item("k", r.k)?;
            d.set_item("chi", r.chi)?;
            d.set_item("tau_opt", r.tau_opt)?;
            d.set_item("photon_number", r.photon_number)?;
            d.set_item("pulse_energy", r.pulse_energy)?;
            d.set_item("error", r.error.clone())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn omtomo_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityOperator>()?;
    m.add_class::<PyPhaseSpaceGrid>()?;
    m.add_class::<PyQuasiDistribution>()?;
    m.add_class::<PyTomogram>()?;
    m.add_class::<PyProtocolParams>()?;
    m.add_class::<PyReadoutConfig>()?;
    m.add_function(wrap_pyfunction!(solve_pulse_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(extract_mech_tomogram, m)?)?;
    m.add_function(wrap_pyfunction!(full_tomography, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_radon, m)?)?;
    m.add_function(wrap_pyfunction!(witness_tomogram, m)?)?;
    m.add_function(wrap_pyfunction!(witness_from_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(classical_readout_tomogram, m)?)?;
    m.add_function(wrap_pyfunction!(naive_deconvolution, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_reference_table, m)?)?;
    Ok(())
}
