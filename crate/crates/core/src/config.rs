//! Run configuration: a single TOML file with nested sections and explicit
//! unit suffixes in every physical key (e.g. `omega_m_rad_per_s`), so the
//! Hz-vs-rad/s ambiguity cannot cross the boundary. Parsing is strict —
//! unknown keys are errors reported with their path.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{FeasibilityAssumptions, SystemRecord, DEFAULT_OMEGA_O};
use crate::grid::PhaseSpaceGrid;
use crate::protocol::{NoiseChannel, ReadoutConfig};
use crate::state::DensityOperator;
use crate::transform::solve_pulse_conditions;

/// Format version written into every config and output header.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Schema version; must equal [`CONFIG_VERSION`].
    pub version: u32,
    pub protocol: Option<ProtocolSection>,
    pub state: Option<StateSection>,
    pub grid: Option<GridSection>,
    pub tomography: Option<TomographySection>,
    pub noise: Option<NoiseSection>,
    pub compare_classical: Option<CompareClassicalSection>,
    pub feasibility: Option<FeasibilitySection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub g0_rad_per_s: f64,
    pub omega_m_rad_per_s: f64,
    /// Optical carrier; defaults to 1.77e15 rad/s (1064 nm).
    pub omega_o_rad_per_s: Option<f64>,
    /// Even pulse-area index; fixes χ = √(k/(2√3)).
    pub k: u32,
    /// Probe squeezing parameter (0 = coherent probe).
    pub epsilon: Option<f64>,
    /// Readout delay angle φ_d = ω_m τ_d, radians.
    pub phi_d_rad: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum StateSection {
    Vacuum {
        truncation: usize,
    },
    Fock {
        truncation: usize,
        n: usize,
    },
    Thermal {
        truncation: usize,
        mean_occupation: f64,
    },
    Coherent {
        truncation: usize,
        alpha_re: f64,
        alpha_im: f64,
    },
    SqueezedVacuum {
        truncation: usize,
        squeezing: f64,
    },
    /// The built-in non-Gaussian demonstration state (a 0-1-2 superposition).
    Superposition {
        truncation: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Symmetric half-extent of the (q, p) grid in natural units.
    pub half_extent: f64,
    /// Points per axis.
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TomographySection {
    /// Number of uniformly spaced projection angles over [0, π).
    pub angles: usize,
    /// Ramp-filter cutoff as a fraction of Nyquist (default 0.9).
    pub filter_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma_qq: f64,
    pub sigma_qp: f64,
    pub sigma_pp: f64,
    /// Detection transmissivity η ∈ (0, 1]; absent means lossless.
    pub transmissivity: Option<f64>,
    /// Whether the channel is characterized well enough to correct the
    /// tomogram order downstream (default true).
    pub characterized: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareClassicalSection {
    /// Detection efficiency η of the classical pulsed readout.
    pub efficiency: f64,
    /// Phase-noise standard deviation σ_p of the classical readout kernel.
    pub sigma_p: f64,
    /// Relative amplitude of the synthetic measurement noise fed to the
    /// naive deconvolution demonstration.
    pub noise_amplitude: f64,
    /// Quadrature angle of the compared tomogram, radians.
    pub phi_rad: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySection {
    /// Include the built-in published-platform rows.
    pub include_reference_systems: bool,
    pub k: Option<u32>,
    pub omega_o_rad_per_s: Option<f64>,
    #[serde(default)]
    pub systems: Vec<SystemRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemRow {
    pub name: String,
    pub omega_m_rad_per_s: f64,
    pub mass_kg: f64,
    pub gamma_m_rad_per_s: f64,
    pub g0_rad_per_s: f64,
    pub kappa_o_rad_per_s: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("{e}")))
    }

    fn section<'a, T>(opt: &'a Option<T>, name: &str) -> Result<&'a T> {
        opt.as_ref()
            .ok_or_else(|| Error::Config(format!("{name}: section required for this run mode")))
    }

    pub fn build_state(&self) -> Result<DensityOperator> {
        match Self::section(&self.state, "state")? {
            StateSection::Vacuum { truncation } => Ok(DensityOperator::vacuum(*truncation)),
            StateSection::Fock { truncation, n } => DensityOperator::fock(*truncation, *n),
            StateSection::Thermal { truncation, mean_occupation } => {
                DensityOperator::thermal(*truncation, *mean_occupation)
            }
            StateSection::Coherent { truncation, alpha_re, alpha_im } => {
                DensityOperator::coherent(*truncation, Complex64::new(*alpha_re, *alpha_im))
            }
            StateSection::SqueezedVacuum { truncation, squeezing } => {
                DensityOperator::squeezed_vacuum(*truncation, *squeezing)
            }
            StateSection::Superposition { truncation } => {
                DensityOperator::example_superposition(*truncation)
            }
        }
    }

    pub fn build_grid(&self) -> Result<PhaseSpaceGrid> {
        let g = Self::section(&self.grid, "grid")?;
        PhaseSpaceGrid::symmetric(g.half_extent, g.points)
    }

    pub fn build_noise(&self) -> Result<Option<NoiseChannel>> {
        match &self.noise {
            None => Ok(None),
            Some(n) => {
                let mut ch = NoiseChannel::new(
                    [[n.sigma_qq, n.sigma_qp], [n.sigma_qp, n.sigma_pp]],
                    n.transmissivity,
                )?;
                ch.characterized = n.characterized.unwrap_or(true);
                Ok(Some(ch))
            }
        }
    }

    pub fn build_readout(&self) -> Result<ReadoutConfig> {
        let p = Self::section(&self.protocol, "protocol")?;
        let omega_o = p.omega_o_rad_per_s.unwrap_or(DEFAULT_OMEGA_O);
        let chi = (f64::from(p.k) / (2.0 * 3f64.sqrt())).sqrt();
        let mut params =
            solve_pulse_conditions(p.g0_rad_per_s, p.omega_m_rad_per_s, omega_o, chi, p.k)?;
        params.epsilon = p.epsilon.unwrap_or(0.0);
        ReadoutConfig::new(
            params,
            self.build_state()?,
            p.phi_d_rad.unwrap_or(0.0),
            self.build_grid()?,
            self.build_noise()?,
        )
    }

    pub fn build_feasibility(&self) -> Result<(Vec<SystemRecord>, FeasibilityAssumptions)> {
        let f = Self::section(&self.feasibility, "feasibility")?;
        let mut assumptions = FeasibilityAssumptions::default();
        if let Some(k) = f.k {
            assumptions.k = k;
        }
        if let Some(w) = f.omega_o_rad_per_s {
            assumptions.omega_o = w;
        }
        let mut systems = Vec::new();
        if f.include_reference_systems {
            systems.extend(crate::feasibility::reference_systems());
        }
        for s in &f.systems {
            systems.push(SystemRecord {
                name: s.name.clone(),
                omega_m: s.omega_m_rad_per_s,
                mass: s.mass_kg,
                gamma_m: s.gamma_m_rad_per_s,
                g0: s.g0_rad_per_s,
                kappa_o: s.kappa_o_rad_per_s,
            });
        }
        if systems.is_empty() {
            return Err(Error::Config("feasibility: no systems to screen".into()));
        }
        Ok((systems, assumptions))
    }

    pub fn tomography_angles(&self) -> Result<Vec<f64>> {
        let t = Self::section(&self.tomography, "tomography")?;
        if t.angles < 8 {
            return Err(Error::Config(format!(
                "tomography.angles: need at least 8, got {}",
                t.angles
            )));
        }
        Ok((0..t.angles)
            .map(|i| i as f64 * std::f64::consts::PI / t.angles as f64)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1

[protocol]
g0_rad_per_s = 100.0
omega_m_rad_per_s = 1.0e4
k = 32

[state]
kind = "vacuum"
truncation = 8

[grid]
half_extent = 8.0
points = 128

[tomography]
angles = 16
"#;

    #[test]
    fn minimal_config_parses_and_builds() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        let readout = cfg.build_readout().unwrap();
        assert!(readout.s_star() > 0.0);
        assert_eq!(cfg.tomography_angles().unwrap().len(), 16);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        let text = cfg.serialize().unwrap();
        let again = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let bad = format!("{MINIMAL}\n[protocol.extra]\nfoo = 1\n");
        let err = RunConfig::parse(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("protocol") || msg.contains("extra"), "{msg}");
    }

    #[test]
    fn wrong_version_is_rejected() {
        let bad = MINIMAL.replace("version = 1", "version = 99");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn missing_section_reports_the_mode_requirement() {
        let cfg = RunConfig::parse(
            "version = 1\n\n[grid]\nhalf_extent = 6.0\npoints = 64\n",
        )
        .unwrap();
        let err = cfg.build_readout().unwrap_err();
        assert!(err.to_string().contains("protocol"));
    }

    #[test]
    fn feasibility_defaults_use_reference_rows() {
        let cfg = RunConfig::parse(
            "version = 1\n\n[feasibility]\ninclude_reference_systems = true\n",
        )
        .unwrap();
        let (systems, a) = cfg.build_feasibility().unwrap();
        assert_eq!(systems.len(), 11);
        assert_eq!(a.k, 32);
    }

    #[test]
    fn custom_feasibility_rows_are_converted() {
        let cfg = RunConfig::parse(
            r#"
version = 1

[feasibility]
include_reference_systems = false

[[feasibility.systems]]
name = "bench"
omega_m_rad_per_s = 1.0e5
mass_kg = 1.0e-12
gamma_m_rad_per_s = 1.0
g0_rad_per_s = 100.0
kappa_o_rad_per_s = 1.0e6
"#,
        )
        .unwrap();
        let (systems, _) = cfg.build_feasibility().unwrap();
        assert_eq!(systems.len(), 1);
        assert_eq!(systems[0].name, "bench");
        assert!((systems[0].sideband_ratio() - 10.0).abs() < 1e-12);
    }
}
