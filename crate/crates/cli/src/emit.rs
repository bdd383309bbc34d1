//! Deterministic artifact emission: CSV, SVG plots, field files and the
//! run manifest with content hashes.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};


pub struct Emitter {
    out_dir: PathBuf,
    artifacts: Vec<(String, String)>,
}

impl Emitter {
    pub fn new(out_dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, content)?;
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        self.artifacts
            .push((name.to_string(), format!("{:x}", hasher.finalize())));
        Ok(path)
    }

    /// Write the manifest listing every artifact with its content hash.
    pub fn finish(mut self, command: &str, seed: u64, config_echo: &str) -> std::io::Result<()> {
        self.artifacts.sort();
        let mut body = String::new();
        body.push_str("{\n");
        let _ = writeln!(body, "  \"command\": {:?},", command);
        let _ = writeln!(body, "  \"seed\": {},", seed);
        let _ = writeln!(body, "  \"config\": {},", config_echo.trim());
        body.push_str("  \"artifacts\": [\n");
        for (i, (name, hash)) in self.artifacts.iter().enumerate() {
            let comma = if i + 1 == self.artifacts.len() { "" } else { "," };
            let _ = writeln!(body, "    {{\"path\": {name:?}, \"sha256\": {hash:?}}}{comma}");
        }
        body.push_str("  ]\n}\n");
        fs::write(self.out_dir.join("manifest.json"), body)
    }
}

/// CSV with a header line; rows formatted with Rust's shortest-roundtrip
/// float printing (bit-reproducible given identical inputs).
pub fn csv_table(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}

/// CSV with a leading comment line recording the row count.
pub fn csv_table_counted(header: &str, rows: &[Vec<f64>]) -> String {
    format!("# rows={}\n{}", rows.len(), csv_table(header, rows))
}

/// Minimal static SVG log-log plot of one or more series.
pub fn svg_loglog(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (640.0, 440.0);
    let margin = 60.0;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (_, s) in series {
        for &(x, y) in s {
            if x > 0.0 && y > 0.0 {
                pts.push((x.log10(), y.log10()));
            }
        }
    }
    if pts.is_empty() {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"><text x=\"20\" y=\"30\">{title}: no positive data</text></svg>\n");
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/><text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        title
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{margin}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/><line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{0}\" stroke=\"black\"/>",
        h - margin,
        w - margin
    );
    // decade tick labels
    for d in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let x = sx(d as f64);
        if x >= margin - 1.0 && x <= w - margin + 1.0 {
            let _ = writeln!(
                svg,
                "<text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>",
                h - margin + 18.0
            );
        }
    }
    for d in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let y = sy(d as f64);
        if y >= margin - 1.0 && y <= h - margin + 1.0 {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{y}\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>",
                margin - 8.0
            );
        }
    }
    for (si, (label, s)) in series.iter().enumerate() {
        let color = colors[si % colors.len()];
        let mut path = String::new();
        let mut first = true;
        for &(x, y) in s {
            if x <= 0.0 || y <= 0.0 {
                continue;
            }
            let cmd = if first { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2},{:.2} ", sx(x.log10()), sy(y.log10()));
            first = false;
        }
        let _ = writeln!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            w - margin - 150.0,
            margin + 16.0 * si as f64 + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One `re im` line per node.
pub fn field_file(values: &[num_complex::Complex64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        let _ = writeln!(out, "{} {}", v.re, v.im);
    }
    out
}
