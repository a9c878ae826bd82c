//! Pipeline orchestration: maps a parsed configuration and an output
//! directory to one of the four run modes, serializes everything through a
//! staged (all-or-nothing) directory, and translates failures into process
//! exit codes.

use std::path::PathBuf;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{
    distribution_to_svg, distribution_to_text, tomogram_to_svg, tomogram_to_text, OutputStage,
};
use crate::protocol::{
    classical_readout_tomogram, extract_mech_tomogram, full_tomography, naive_deconvolution,
};
use crate::witness::{witness_from_protocol, LegitimacyReport, Verdict, WitnessVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Tomography,
    Witness,
    CompareClassical,
    Feasibility,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub plots: bool,
}

/// What a successful run amounts to, for exit-code purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Done,
    /// The witness could not decide; distinct from a classical verdict.
    WitnessInconclusive,
}

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_WITNESS_INCONCLUSIVE: i32 = 4;

/// Maps a finished run to its process exit code: bad inputs are 2, numerical
/// failures are 3, an inconclusive witness is 4.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(RunOutcome::Done) => EXIT_SUCCESS,
        Ok(RunOutcome::WitnessInconclusive) => EXIT_WITNESS_INCONCLUSIVE,
        Err(
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::InvalidState(_)
            | Error::InvalidOrder(_)
            | Error::InvalidNoise(_),
        ) => EXIT_CONFIG_ERROR,
        Err(_) => EXIT_NON_CONVERGENCE,
    }
}

#[derive(Serialize)]
struct RunHeader {
    format_version: u32,
    mode: &'static str,
    seed: u64,
}

#[derive(Serialize)]
struct TomographyReport {
    header: RunHeader,
    s_star: f64,
    wigner_regime: bool,
    tomogram_order: f64,
    angles: Vec<f64>,
    reconstruction_integral: f64,
    reconstruction_min_value: f64,
}

#[derive(Serialize)]
struct DimSummary {
    dim: usize,
    verdict: String,
    min_eigenvalue: f64,
    trace: f64,
}

#[derive(Serialize)]
struct MapSummary {
    verdict: String,
    dims: Vec<DimSummary>,
}

#[derive(Serialize)]
struct WitnessRunReport {
    header: RunHeader,
    verdict: String,
    tomogram_order: f64,
    corrected_order: f64,
    first_map: Option<MapSummary>,
    second_map: MapSummary,
}

#[derive(Serialize)]
struct CompareClassicalReport {
    header: RunHeader,
    efficiency: f64,
    sigma_p: f64,
    classical_order: f64,
    noise_amplitude: f64,
    input_relative_error: f64,
    output_relative_error: f64,
    amplification: f64,
}

#[derive(Serialize)]
struct FeasibilityRunReport {
    header: RunHeader,
    rows: Vec<crate::feasibility::FeasibilityReport>,
}

fn verdict_name(v: Verdict) -> String {
    match v {
        Verdict::Legitimate => "legitimate",
        Verdict::Illegitimate => "illegitimate",
        Verdict::Inconclusive => "inconclusive",
    }
    .to_string()
}

fn map_summary(verdict: Verdict, reports: &[LegitimacyReport]) -> MapSummary {
    MapSummary {
        verdict: verdict_name(verdict),
        dims: reports
            .iter()
            .map(|r| DimSummary {
                dim: r.dim,
                verdict: verdict_name(r.verdict),
                min_eigenvalue: r.min_eigenvalue,
                trace: r.trace,
            })
            .collect(),
    }
}

/// Runs one pipeline end to end and commits its output directory.
pub fn execute(mode: Mode, opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = RunConfig::from_file(&opts.config)?;
    let stage = OutputStage::new(&opts.out)?;
    stage.write_text("config.toml", &cfg.serialize()?)?;
    let outcome = match mode {
        Mode::Tomography => run_tomography(&cfg, opts, &stage)?,
        Mode::Witness => run_witness(&cfg, opts, &stage)?,
        Mode::CompareClassical => run_compare_classical(&cfg, opts, &stage)?,
        Mode::Feasibility => run_feasibility(&cfg, opts, &stage)?,
    };
    stage.commit()?;
    Ok(outcome)
}

fn run_tomography(cfg: &RunConfig, opts: &RunOptions, stage: &OutputStage) -> Result<RunOutcome> {
    let readout = cfg.build_readout()?;
    let angles = cfg.tomography_angles()?;
    let (set, rec) = full_tomography(&readout, &angles)?;
    for (i, t) in set.tomograms().iter().enumerate() {
        let name = format!("tomogram_{i:04}.txt");
        stage.write_text(&name, &tomogram_to_text(t, "readout extraction"))?;
        if opts.plots {
            stage.write_text(&format!("tomogram_{i:04}.svg"), &tomogram_to_svg(t))?;
        }
    }
    stage.write_text(
        "reconstruction.txt",
        &distribution_to_text(&rec, "filtered back-projection of readout tomograms"),
    )?;
    if opts.plots {
        stage.write_text("reconstruction.svg", &distribution_to_svg(&rec))?;
    }
    stage.write_json(
        "report.json",
        &TomographyReport {
            header: RunHeader {
                format_version: crate::io::FORMAT_VERSION,
                mode: "tomography",
                seed: opts.seed,
            },
            s_star: readout.s_star(),
            wigner_regime: readout.wigner_regime(),
            tomogram_order: readout.tag_order(),
            angles,
            reconstruction_integral: rec.integral(),
            reconstruction_min_value: rec.min_value(),
        },
    )?;
    Ok(RunOutcome::Done)
}

fn run_witness(cfg: &RunConfig, opts: &RunOptions, stage: &OutputStage) -> Result<RunOutcome> {
    let readout = cfg.build_readout()?;
    let tomogram = extract_mech_tomogram(&readout)?;
    stage.write_text("tomogram.txt", &tomogram_to_text(&tomogram, "readout extraction"))?;
    if opts.plots {
        stage.write_text("tomogram.svg", &tomogram_to_svg(&tomogram))?;
    }
    let report = witness_from_protocol(&readout)?;
    let verdict = match report.verdict {
        WitnessVerdict::Nonclassical => "nonclassical",
        WitnessVerdict::Classical => "classical",
        WitnessVerdict::Inconclusive => "inconclusive",
    };
    stage.write_json(
        "report.json",
        &WitnessRunReport {
            header: RunHeader {
                format_version: crate::io::FORMAT_VERSION,
                mode: "witness",
                seed: opts.seed,
            },
            verdict: verdict.to_string(),
            tomogram_order: report.tomogram_order,
            corrected_order: report.corrected_order,
            first_map: report.first_map.as_ref().map(|(v, r)| map_summary(*v, r)),
            second_map: map_summary(report.second_map.0, &report.second_map.1),
        },
    )?;
    if report.verdict == WitnessVerdict::Inconclusive {
        Ok(RunOutcome::WitnessInconclusive)
    } else {
        Ok(RunOutcome::Done)
    }
}

fn run_compare_classical(
    cfg: &RunConfig,
    opts: &RunOptions,
    stage: &OutputStage,
) -> Result<RunOutcome> {
    let section = cfg
        .compare_classical
        .as_ref()
        .ok_or_else(|| Error::Config("compare_classical: section required".into()))?;
    let state = cfg.build_state()?;
    let phi = section.phi_rad.unwrap_or(0.0);
    let t = classical_readout_tomogram(&state, section.efficiency, section.sigma_p, phi)?;
    stage.write_text(
        "classical_tomogram.txt",
        &tomogram_to_text(&t, "continuous-readout kernel applied to the state tomogram"),
    )?;
    if opts.plots {
        stage.write_text("classical_tomogram.svg", &tomogram_to_svg(&t))?;
    }
    let (recovered, report) =
        naive_deconvolution(&t, section.efficiency, section.noise_amplitude, opts.seed)?;
    stage.write_text(
        "deconvolved_tomogram.txt",
        &tomogram_to_text(&recovered, "frequency-domain inversion of the readout kernel"),
    )?;
    stage.write_json(
        "report.json",
        &CompareClassicalReport {
            header: RunHeader {
                format_version: crate::io::FORMAT_VERSION,
                mode: "compare-classical",
                seed: opts.seed,
            },
            efficiency: section.efficiency,
            sigma_p: section.sigma_p,
            classical_order: t.s,
            noise_amplitude: section.noise_amplitude,
            input_relative_error: report.input_relative_error,
            output_relative_error: report.output_relative_error,
            amplification: report.amplification,
        },
    )?;
    Ok(RunOutcome::Done)
}

fn run_feasibility(cfg: &RunConfig, opts: &RunOptions, stage: &OutputStage) -> Result<RunOutcome> {
    let (systems, assumptions) = cfg.build_feasibility()?;
    let rows = crate::feasibility::feasibility_table(&systems, &assumptions)?;
    let mut table = String::new();
    table.push_str(&format!("# omtomo feasibility v{}\n", crate::io::FORMAT_VERSION));
    table.push_str("# name\tsideband_ratio\tregime\ttau_opt_s\tpulse_energy_J\n");
    for r in &rows {
        let regime = match r.regime_flag {
            crate::feasibility::RegimeFlag::NonResolved => "non-resolved",
            crate::feasibility::RegimeFlag::Marginal => "marginal",
            crate::feasibility::RegimeFlag::Resolved => "resolved",
        };
        table.push_str(&format!(
            "{}\t{:.4e}\t{}\t{}\t{}\n",
            r.name,
            r.sideband_ratio,
            regime,
            r.tau_opt.map_or("-".into(), |v| format!("{v:.4e}")),
            r.pulse_energy.map_or("-".into(), |v| format!("{v:.4e}")),
        ));
    }
    stage.write_text("feasibility.txt", &table)?;
    stage.write_json(
        "report.json",
        &FeasibilityRunReport {
            header: RunHeader {
                format_version: crate::io::FORMAT_VERSION,
                mode: "feasibility",
                seed: opts.seed,
            },
            rows,
        },
    )?;
    Ok(RunOutcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &std::path::Path, text: &str) -> PathBuf {
        let path = dir.join("config.toml");
        std::fs::write(&path, text).unwrap();
        path
    }

    const TOMO_CONFIG: &str = r#"
version = 1

[protocol]
g0_rad_per_s = 100.0
omega_m_rad_per_s = 1.0e4
k = 32

[state]
kind = "vacuum"
truncation = 8

[grid]
half_extent = 6.0
points = 64

[tomography]
angles = 8
"#;

    #[test]
    fn tomography_run_produces_a_complete_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), TOMO_CONFIG);
        let out = dir.path().join("out");
        let opts = RunOptions { config, out: out.clone(), seed: 0, plots: true };
        let outcome = execute(Mode::Tomography, &opts).unwrap();
        assert_eq!(outcome, RunOutcome::Done);
        for name in ["report.json", "reconstruction.txt", "reconstruction.svg", "tomogram_0000.txt"] {
            assert!(out.join(name).exists(), "{name} missing");
        }
        // every emitted distribution re-loads and integrates to 1
        let rec = crate::io::distribution_from_text(
            &std::fs::read_to_string(out.join("reconstruction.txt")).unwrap(),
        )
        .unwrap();
        assert!((rec.integral() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn runs_are_reproducible_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), TOMO_CONFIG);
        let mut bundles = Vec::new();
        for name in ["a", "b"] {
            let out = dir.path().join(name);
            let opts =
                RunOptions { config: config.clone(), out: out.clone(), seed: 7, plots: false };
            execute(Mode::Tomography, &opts).unwrap();
            bundles.push(std::fs::read_to_string(out.join("reconstruction.txt")).unwrap());
        }
        assert_eq!(bundles[0], bundles[1]);
    }

    #[test]
    fn feasibility_run_reports_all_reference_rows() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(
            dir.path(),
            "version = 1\n\n[feasibility]\ninclude_reference_systems = true\n",
        );
        let out = dir.path().join("out");
        let opts = RunOptions { config, out: out.clone(), seed: 0, plots: false };
        execute(Mode::Feasibility, &opts).unwrap();
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report["rows"].as_array().unwrap().len(), 11);
    }

    #[test]
    fn config_errors_map_to_exit_code_2() {
        let r: Result<RunOutcome> = Err(Error::Config("x".into()));
        assert_eq!(exit_code(&r), EXIT_CONFIG_ERROR);
        let r: Result<RunOutcome> = Err(Error::NonConvergence("x".into()));
        assert_eq!(exit_code(&r), EXIT_NON_CONVERGENCE);
        assert_eq!(exit_code(&Ok(RunOutcome::WitnessInconclusive)), EXIT_WITNESS_INCONCLUSIVE);
        assert_eq!(exit_code(&Ok(RunOutcome::Done)), EXIT_SUCCESS);
    }

    #[test]
    fn failed_run_leaves_no_output_directory() {
        let dir = tempfile::tempdir().unwrap();
        // angles below the minimum → the run fails after staging begins
        let config = write_config(dir.path(), &TOMO_CONFIG.replace("angles = 8", "angles = 4"));
        let out = dir.path().join("out");
        let opts = RunOptions { config, out: out.clone(), seed: 0, plots: false };
        assert!(execute(Mode::Tomography, &opts).is_err());
        assert!(!out.exists());
    }
}
