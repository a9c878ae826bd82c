//! Output serialization: delimited-text matrices for distributions, one file
//! per tomogram, JSON reports, and optional SVG plots. Every file starts with
//! a versioned header. All writes go through a staging directory that is
//! renamed into place at the end of a run, so a failed run never leaves
//! partial outputs behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PhaseSpaceGrid, QuadratureGrid};
use crate::phase_space::{QuasiDistribution, Tomogram};

/// Version stamped into every output file's first line.
pub const FORMAT_VERSION: u32 = 1;

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips exactly.
    format!("{v:?}")
}

/// Serializes a 2-D distribution as a tab-delimited matrix (rows = q axis)
/// with a commented header holding the grid spec, order, and provenance.
pub fn distribution_to_text(w: &QuasiDistribution, provenance: &str) -> String {
    let g = &w.grid;
    let mut out = String::new();
    let _ = writeln!(out, "# omtomo distribution v{FORMAT_VERSION}");
    let _ = writeln!(out, "# provenance: {provenance}");
    let _ = writeln!(out, "# s: {}", fmt_f64(w.s));
    let _ = writeln!(
        out,
        "# grid: q_min={} q_max={} n_q={} p_min={} p_max={} n_p={}",
        fmt_f64(g.q_min),
        fmt_f64(g.q_max),
        g.n_q,
        fmt_f64(g.p_min),
        fmt_f64(g.p_max),
        g.n_p
    );
    let _ = writeln!(
        out,
        "# warnings: truncation={} quality={}",
        w.truncation_warning, w.quality_warning
    );
    for i in 0..g.n_q {
        let row: Vec<String> = (0..g.n_p).map(|j| fmt_f64(w.values[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}

fn header_field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Io(format!("missing {key} in header line: {line}")))
}

fn parse_f64(text: &str, what: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|e| Error::Io(format!("{what}: {e}")))
}

fn parse_usize(text: &str, what: &str) -> Result<usize> {
    text.parse::<usize>().map_err(|e| Error::Io(format!("{what}: {e}")))
}

fn expect_line<'a>(lines: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<&'a str> {
    lines.next().ok_or_else(|| Error::Io(format!("truncated file: expected {what}")))
}

/// Parses a distribution written by [`distribution_to_text`].
pub fn distribution_from_text(text: &str) -> Result<QuasiDistribution> {
    let mut lines = text.lines();
    let magic = expect_line(&mut lines, "magic line")?;
    if magic.trim() != format!("# omtomo distribution v{FORMAT_VERSION}") {
        return Err(Error::Io(format!("unrecognized distribution header: {magic}")));
    }
    let _provenance = expect_line(&mut lines, "provenance")?;
    let s_line = expect_line(&mut lines, "order line")?;
    let s = parse_f64(s_line.trim_start_matches("# s:").trim(), "s")?;
    let grid_line = expect_line(&mut lines, "grid line")?;
    let grid = PhaseSpaceGrid::new(
        parse_f64(header_field(grid_line, "q_min")?, "q_min")?,
        parse_f64(header_field(grid_line, "q_max")?, "q_max")?,
        parse_f64(header_field(grid_line, "p_min")?, "p_min")?,
        parse_f64(header_field(grid_line, "p_max")?, "p_max")?,
        parse_usize(header_field(grid_line, "n_q")?, "n_q")?,
        parse_usize(header_field(grid_line, "n_p")?, "n_p")?,
    )?;
    let warn_line = expect_line(&mut lines, "warnings line")?;
    let truncation_warning = header_field(warn_line, "truncation")? == "true";
    let quality_warning = header_field(warn_line, "quality")? == "true";
    let mut values = ndarray::Array2::zeros((grid.n_q, grid.n_p));
    for i in 0..grid.n_q {
        let row = expect_line(&mut lines, "matrix row")?;
        let cells: Vec<&str> = row.split('\t').collect();
        if cells.len() != grid.n_p {
            return Err(Error::Io(format!(
                "row {i}: expected {} cells, got {}",
                grid.n_p,
                cells.len()
            )));
        }
        for (j, cell) in cells.iter().enumerate() {
            values[(i, j)] = parse_f64(cell, "matrix cell")?;
        }
    }
    Ok(QuasiDistribution { grid, values, s, truncation_warning, quality_warning })
}

/// Serializes a tomogram as one value per line with a commented header.
pub fn tomogram_to_text(t: &Tomogram, provenance: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# omtomo tomogram v{FORMAT_VERSION}");
    let _ = writeln!(out, "# provenance: {provenance}");
    let _ = writeln!(out, "# phi: {} s: {}", fmt_f64(t.phi), fmt_f64(t.s));
    let _ = writeln!(
        out,
        "# grid: x_min={} x_max={} n={}",
        fmt_f64(t.grid.x_min),
        fmt_f64(t.grid.x_max),
        t.grid.n
    );
    for v in &t.values {
        let _ = writeln!(out, "{}", fmt_f64(*v));
    }
    out
}

/// Parses a tomogram written by [`tomogram_to_text`].
pub fn tomogram_from_text(text: &str) -> Result<Tomogram> {
    let mut lines = text.lines();
    let magic = expect_line(&mut lines, "magic line")?;
    if magic.trim() != format!("# omtomo tomogram v{FORMAT_VERSION}") {
        return Err(Error::Io(format!("unrecognized tomogram header: {magic}")));
    }
    let _provenance = expect_line(&mut lines, "provenance")?;
    let tag_line = expect_line(&mut lines, "tag line")?;
    let mut tags = tag_line.trim_start_matches('#').split_whitespace();
    let phi = match (tags.next(), tags.next()) {
        (Some("phi:"), Some(v)) => parse_f64(v, "phi")?,
        _ => return Err(Error::Io(format!("malformed tag line: {tag_line}"))),
    };
    let s = match (tags.next(), tags.next()) {
        (Some("s:"), Some(v)) => parse_f64(v, "s")?,
        _ => return Err(Error::Io(format!("malformed tag line: {tag_line}"))),
    };
    let grid_line = expect_line(&mut lines, "grid line")?;
    let grid = QuadratureGrid::new(
        parse_f64(header_field(grid_line, "x_min")?, "x_min")?,
        parse_f64(header_field(grid_line, "x_max")?, "x_max")?,
        parse_usize(header_field(grid_line, "n")?, "n")?,
    )?;
    let mut values = Vec::with_capacity(grid.n);
    for _ in 0..grid.n {
        values.push(parse_f64(expect_line(&mut lines, "value")?, "value")?);
    }
    Ok(Tomogram { grid, values, phi, s })
}

/// Minimal SVG heatmap of a distribution (blue = negative, red = positive).
pub fn distribution_to_svg(w: &QuasiDistribution) -> String {
    let (nq, np) = (w.grid.n_q, w.grid.n_p);
    let cell = 2.0;
    let peak = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         viewBox=\"0 0 {:.0} {:.0}\">",
        nq as f64 * cell,
        np as f64 * cell,
        nq as f64 * cell,
        np as f64 * cell
    );
    let _ = writeln!(out, "<!-- omtomo heatmap v{FORMAT_VERSION}; s = {} -->", fmt_f64(w.s));
    for i in 0..nq {
        for j in 0..np {
            let v = w.values[(i, j)] / peak;
            let (r, g, b) = if v >= 0.0 {
                (255, (255.0 * (1.0 - v)) as u8, (255.0 * (1.0 - v)) as u8)
            } else {
                ((255.0 * (1.0 + v)) as u8, (255.0 * (1.0 + v)) as u8, 255)
            };
            // y axis points up: row j = np-1-j from the top.
            let _ = writeln!(
                out,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"rgb({r},{g},{b})\"/>",
                i as f64 * cell,
                (np - 1 - j) as f64 * cell
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Minimal SVG line plot of a tomogram.
pub fn tomogram_to_svg(t: &Tomogram) -> String {
    let (w, h) = (640.0, 360.0);
    let lo = t.values.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = t.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-300);
    let n = t.values.len().max(2);
    let pts: Vec<String> = t
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = i as f64 / (n - 1) as f64 * w;
            let y = h - (v - lo) / (hi - lo) * h;
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\">\n<!-- omtomo tomogram plot v{FORMAT_VERSION}; \
         phi = {}, s = {} -->\n<polyline fill=\"none\" stroke=\"black\" \
         stroke-width=\"1.5\" points=\"{}\"/>\n</svg>\n",
        fmt_f64(t.phi),
        fmt_f64(t.s),
        pts.join(" ")
    )
}

/// Staged output directory: files accumulate in a hidden sibling directory
/// and appear at the target path only when [`OutputStage::commit`] succeeds.
pub struct OutputStage {
    target: PathBuf,
    staging: PathBuf,
    committed: bool,
}

impl OutputStage {
    pub fn new(target: &Path) -> Result<Self> {
        if target.exists() {
            let occupied = target
                .read_dir()
                .map_err(|e| Error::Io(format!("{}: {e}", target.display())))?
                .next()
                .is_some();
            if occupied {
                return Err(Error::Io(format!(
                    "output directory {} already exists and is not empty",
                    target.display()
                )));
            }
        }
        let file_name = target
            .file_name()
            .ok_or_else(|| Error::Io(format!("bad output path {}", target.display())))?
            .to_string_lossy()
            .to_string();
        let staging = target.with_file_name(format!(".{file_name}.staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(Self { target: target.to_path_buf(), staging, committed: false })
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.staging.join(name), text)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Io(format!("{name}: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Renames the staging directory onto the target path.
    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir(&self.target)?; // verified empty at creation
        }
        fs::rename(&self.staging, &self.target)?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for OutputStage {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
