//! Deterministic report writers. Nothing here reads the clock or the
//! environment, so equal inputs give byte-identical files.

use super::config::ExperimentConfig;
use crate::error::{domain, Error, Result};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Version stamp embedded in every report.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One asserted invariant of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// A report with the stamp and config flattened next to its own fields.
#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    version: &'static str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    report: &'a T,
}

/// Collects the files of one run inside the output directory.
pub struct Emitter<'a> {
    config: &'a ExperimentConfig,
    dir: PathBuf,
    files: Vec<String>,
}

impl<'a> Emitter<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let dir = config.out_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| io_context(e, &dir))?;
        Ok(Emitter { config, dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn create(&mut self, name: &str) -> Result<fs::File> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_context(e, &path))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(file)
    }

    /// JSON with `version` and `config` added at the top level.
    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        let stamped = Stamped { version: CODE_VERSION, config: self.config, report };
        let mut text = serde_json::to_string_pretty(&stamped)?;
        text.push('\n');
        self.create(name)?.write_all(text.as_bytes())?;
        Ok(())
    }

    /// Any writer-based emitter, e.g. a CSV routine from another module.
    pub fn with_file(&mut self, name: &str, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
        let mut file = self.create(name)?;
        write(&mut file)
    }

    /// CSV from a header and rows of preformatted cells.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        self.with_file(name, |file| write_table(file, header, rows))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        self.create(name)?.write_all(body.as_bytes())?;
        Ok(())
    }

    /// manifest.json listing the files and the checks of the run.
    pub fn manifest(&mut self, checks: &[Check]) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            experiment: &'a str,
            model: &'a str,
            files: &'a [String],
            checks: &'a [Check],
            passed: bool,
        }
        let files = self.files.clone();
        let m = Manifest {
            experiment: self.config.experiment.name(),
            model: self.config.model.name(),
            files: &files,
            checks,
            passed: checks.iter().all(|c| c.passed),
        };
        self.json("manifest.json", &m)
    }
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return domain(format!("row has {} cells, header has {}", row.len(), header.len()));
        }
        wr.write_record(row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Text for a float cell: shortest round-trip form, empty for missing values.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// A named series for [`log_log_svg`].
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Log-log plot of positive series with an optional reference line of the
/// given slope through the first point of the first series.
pub fn log_log_svg(title: &str, series: &[Series], guide_slope: Option<f64>) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!("<title>{}</title>\n", escape(title)));
    svg.push_str(&format!("<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"));
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    ));
    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(d as f64);
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>\n",
            HEIGHT - MARGIN + 18.0
        ));
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(d as f64);
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"end\">1e{d}</text>\n",
            MARGIN - 6.0
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
            .collect();
        if coords.is_empty() {
            continue;
        }
        let colour = COLOURS[i % COLOURS.len()];
        svg.push_str(&format!(
            "<polyline class=\"series\" data-label=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>\n",
            escape(s.label),
            coords.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{colour}\">{}</text>\n",
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            escape(s.label)
        ));
    }
    if let (Some(slope), Some(&(ax, ay))) = (guide_slope, series.first().and_then(|s| s.points.first())) {
        if ax > 0.0 && ay > 0.0 {
            let (lx, ly) = (ax.log10(), ay.log10());
            let yb = ly + slope * (x1 - lx);
            svg.push_str(&format!(
                "<line class=\"guide\" data-slope=\"{slope}\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
                sx(lx),
                sy(ly),
                sx(x1),
                sy(yb)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_has_header_only() {
        let mut buf = Vec::new();
        write_table(&mut buf, &["n", "upper"], &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,upper\n");
    }

    #[test]
    fn ragged_rows_are_refused() {
        let mut buf = Vec::new();
        assert!(write_table(&mut buf, &["a", "b"], &[vec!["1".into()]]).is_err());
    }

    #[test]
    fn guide_line_carries_its_slope() {
        let s = Series { label: "upper", points: vec![(10.0, 1.0), (100.0, 0.01)] };
        let svg = log_log_svg("t", &[s], Some(-2.0));
        assert!(svg.contains("class=\"guide\" data-slope=\"-2\""));
        assert!(svg.contains("class=\"series\""));
        assert!(log_log_svg("t", &[], None).ends_with("</svg>\n"));
    }
}
