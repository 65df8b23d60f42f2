//! Serialization of experiment inputs and outputs: series text files,
//! results CSV, summary JSON, experiment config files, and the two SVG
//! figure types (decision scatter, sample series).
//!
//! Numeric results are written with 17 significant digits so that files
//! round-trip 64-bit floats exactly and reruns can be diffed byte-wise.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    outcome, ClassificationSummary, ExperimentConfig, ModelLabel, ReplicationResult,
    ReplicationOutcome,
};
use crate::model::Series;
use crate::scoring::Decision;

/// 17-significant-digit scientific notation; round-trip exact for f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// series text format
// ---------------------------------------------------------------------------

/// Writes a series in the plain text format: one value per line.
pub fn write_series<W: Write>(series: &Series, out: &mut W) -> Result<()> {
    for x in series.values() {
        writeln!(out, "{x}")?;
    }
    Ok(())
}

/// Reads a series from the plain text format: one value per line, blank
/// lines and lines starting with `#` ignored.
pub fn read_series<R: BufRead>(input: R) -> Result<Series> {
    let mut values = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("expected a number, got {trimmed:?}: {e}"),
        })?;
        values.push(value);
    }
    Ok(Series::new(values))
}

// ---------------------------------------------------------------------------
// results CSV
// ---------------------------------------------------------------------------

const CSV_HEADER: &str = "rep_id,delta_log,delta_hyv,decision_log,decision_hyv";

/// Writes results as CSV with LF line endings, one row per replication.
pub fn write_results_csv<W: Write>(results: &[ReplicationResult], out: &mut W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.rep_id,
            fmt_f64(r.cumulative_log),
            fmt_f64(r.cumulative_hyv),
            r.decision_log,
            r.decision_hyv
        )?;
    }
    Ok(())
}

fn parse_decision(token: &str, line: usize) -> Result<Decision> {
    match token {
        "P" => Ok(Decision::SelectP),
        "Q" => Ok(Decision::SelectQ),
        "TIE" => Ok(Decision::Tie),
        other => Err(Error::Parse {
            line,
            message: format!("expected decision P, Q or TIE, got {other:?}"),
        }),
    }
}

/// Parses a results CSV produced by [`write_results_csv`].
pub fn read_results_csv<R: BufRead>(input: R) -> Result<Vec<ReplicationResult>> {
    let mut lines = input.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).transpose()?;
    if header.as_deref().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {CSV_HEADER:?}"),
        });
    }
    let mut results = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("expected a number, got {s:?}: {e}"),
            })
        };
        results.push(ReplicationResult {
            rep_id: fields[0].parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("expected a replication id, got {:?}: {e}", fields[0]),
            })?,
            cumulative_log: num(fields[1])?,
            cumulative_hyv: num(fields[2])?,
            decision_log: parse_decision(fields[3], line_no)?,
            decision_hyv: parse_decision(fields[4], line_no)?,
        });
    }
    Ok(results)
}

// ---------------------------------------------------------------------------
// summary JSON
// ---------------------------------------------------------------------------

/// On-disk shape of the summary document: the five counts at the top
/// level, the full config echo, and the artifact version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    #[serde(flatten)]
    pub counts: ClassificationSummary,
    pub config: ExperimentConfig,
    pub version: String,
}

/// Writes the summary JSON (pretty-printed, trailing newline).
pub fn write_summary_json<W: Write>(
    summary: &ClassificationSummary,
    config: &ExperimentConfig,
    out: &mut W,
) -> Result<()> {
    let doc = SummaryDocument {
        counts: *summary,
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)
        .map_err(|e| Error::InvalidConfig(format!("summary serialization failed: {e}")))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Parses a summary document written by [`write_summary_json`].
pub fn read_summary_json(text: &str) -> Result<SummaryDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// experiment config files (TOML)
// ---------------------------------------------------------------------------

/// Parses an experiment config file. Keys mirror [`ExperimentConfig`]
/// (`replications`, `series_length`, `model_p.{mean,phi,innovation_variance}`,
/// `model_q.{...}`, `generator`, optional `contamination.{index,shift}`,
/// `seed`, `cutoff`); unknown keys are a hard error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Renders a config in the file format accepted by [`parse_config`].
pub fn render_config(config: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(config)
        .map_err(|e| Error::InvalidConfig(format!("config serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

const SCATTER_WIDTH: f64 = 720.0;
const SCATTER_HEIGHT: f64 = 540.0;
const SERIES_WIDTH: f64 = 720.0;
const SERIES_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 58.0;

fn outcome_color(outcome: ReplicationOutcome) -> &'static str {
    match outcome {
        ReplicationOutcome::BothCorrect => "#1f77b4",
        ReplicationOutcome::BothWrong => "#d62728",
        ReplicationOutcome::OnlyHyvWrong => "#ff7f0e",
        ReplicationOutcome::OnlyLogWrong => "#9467bd",
        ReplicationOutcome::AnyTie => "#7f7f7f",
    }
}

fn outcome_label(outcome: ReplicationOutcome) -> &'static str {
    match outcome {
        ReplicationOutcome::BothCorrect => "both correct",
        ReplicationOutcome::BothWrong => "both wrong",
        ReplicationOutcome::OnlyHyvWrong => "only Hyvarinen wrong",
        ReplicationOutcome::OnlyLogWrong => "only log wrong",
        ReplicationOutcome::AnyTie => "tie",
    }
}

/// Maps a data interval to pixel coordinates, padding degenerate ranges.
struct Axis {
    data_min: f64,
    data_max: f64,
    pixel_min: f64,
    pixel_max: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, pixel_min: f64, pixel_max: f64) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        let span = hi - lo;
        let pad = if span > 0.0 { 0.05 * span } else { 1.0 };
        Self {
            data_min: lo - pad,
            data_max: hi + pad,
            pixel_min,
            pixel_max,
        }
    }

    fn to_pixel(&self, v: f64) -> f64 {
        let t = (v - self.data_min) / (self.data_max - self.data_min);
        self.pixel_min + t * (self.pixel_max - self.pixel_min)
    }

    fn contains(&self, v: f64) -> bool {
        v >= self.data_min && v <= self.data_max
    }
}

fn svg_open(out: &mut impl Write, width: f64, height: f64) -> Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )?;
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#)?;
    Ok(())
}

fn svg_frame_and_labels(
    out: &mut impl Write,
    width: f64,
    height: f64,
    x: &Axis,
    y: &Axis,
    x_label: &str,
    y_label: &str,
) -> Result<()> {
    let left = MARGIN_LEFT;
    let right = width - MARGIN_RIGHT;
    let top = MARGIN_TOP;
    let bottom = height - MARGIN_BOTTOM;
    writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        right - left,
        bottom - top
    )?;
    // min/max tick labels
    writeln!(
        out,
        r#"<text x="{left}" y="{}" font-size="12" text-anchor="middle">{:.3}</text>"#,
        bottom + 18.0,
        x.data_min
    )?;
    writeln!(
        out,
        r#"<text x="{right}" y="{}" font-size="12" text-anchor="middle">{:.3}</text>"#,
        bottom + 18.0,
        x.data_max
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{bottom}" font-size="12" text-anchor="end">{:.3}</text>"#,
        left - 6.0,
        y.data_min
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.3}</text>"#,
        left - 6.0,
        top + 10.0,
        y.data_max
    )?;
    // axis titles
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{x_label}</text>"#,
        (left + right) / 2.0,
        height - 14.0
    )?;
    writeln!(
        out,
        r#"<text x="16" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    )?;
    Ok(())
}

/// Scatter of cumulative (delta log, delta Hyvarinen) scores, one circle
/// per replication, colored by how the two decisions relate to the truth.
/// Dashed reference lines mark zero on both axes.
pub fn render_scatter_svg<W: Write>(
    results: &[ReplicationResult],
    truth: ModelLabel,
    out: &mut W,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let x_axis = Axis::new(
        results.iter().map(|r| r.cumulative_log).chain([0.0]),
        MARGIN_LEFT,
        SCATTER_WIDTH - MARGIN_RIGHT,
    );
    let y_axis = Axis::new(
        results.iter().map(|r| r.cumulative_hyv).chain([0.0]),
        SCATTER_HEIGHT - MARGIN_BOTTOM,
        MARGIN_TOP,
    );
    svg_open(out, SCATTER_WIDTH, SCATTER_HEIGHT)?;
    // zero reference lines
    let x0 = x_axis.to_pixel(0.0);
    let y0 = y_axis.to_pixel(0.0);
    writeln!(
        out,
        r##"<line x1="{x0}" y1="{}" x2="{x0}" y2="{}" stroke="#999999" stroke-dasharray="4 3"/>"##,
        MARGIN_TOP,
        SCATTER_HEIGHT - MARGIN_BOTTOM
    )?;
    writeln!(
        out,
        r##"<line x1="{}" y1="{y0}" x2="{}" y2="{y0}" stroke="#999999" stroke-dasharray="4 3"/>"##,
        MARGIN_LEFT,
        SCATTER_WIDTH - MARGIN_RIGHT
    )?;
    for r in results {
        let cat = outcome(r, truth);
        writeln!(
            out,
            r#"<circle class="pt" cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.8"/>"#,
            x_axis.to_pixel(r.cumulative_log),
            y_axis.to_pixel(r.cumulative_hyv),
            outcome_color(cat)
        )?;
    }
    // legend (rect swatches, so circles remain one per data point)
    let legend = [
        ReplicationOutcome::BothCorrect,
        ReplicationOutcome::BothWrong,
        ReplicationOutcome::OnlyHyvWrong,
        ReplicationOutcome::OnlyLogWrong,
        ReplicationOutcome::AnyTie,
    ];
    for (i, cat) in legend.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#,
            MARGIN_LEFT + 10.0,
            ly - 9.0,
            outcome_color(*cat)
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-size="12">{}</text>"#,
            MARGIN_LEFT + 25.0,
            outcome_label(*cat)
        )?;
    }
    svg_frame_and_labels(
        out,
        SCATTER_WIDTH,
        SCATTER_HEIGHT,
        &x_axis,
        &y_axis,
        "cumulative delta log-score",
        "cumulative delta Hyvarinen score",
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}

/// Polyline of a series against its (1-based) observation index; if a
/// contamination index is given, that observation gets a red marker.
pub fn render_series_svg<W: Write>(
    series: &Series,
    contamination_index: Option<usize>,
    out: &mut W,
) -> Result<()> {
    if series.is_empty() {
        return Err(Error::EmptyResults);
    }
    if let Some(index) = contamination_index {
        if index == 0 || index > series.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: series.len(),
            });
        }
    }
    let values = series.values();
    let x_axis = Axis::new(
        [1.0, values.len() as f64].into_iter(),
        MARGIN_LEFT,
        SERIES_WIDTH - MARGIN_RIGHT,
    );
    let y_axis = Axis::new(
        values.iter().copied(),
        SERIES_HEIGHT - MARGIN_BOTTOM,
        MARGIN_TOP,
    );
    svg_open(out, SERIES_WIDTH, SERIES_HEIGHT)?;
    if y_axis.contains(0.0) {
        let y0 = y_axis.to_pixel(0.0);
        writeln!(
            out,
            r##"<line x1="{}" y1="{y0}" x2="{}" y2="{y0}" stroke="#999999" stroke-dasharray="4 3"/>"##,
            MARGIN_LEFT,
            SERIES_WIDTH - MARGIN_RIGHT
        )?;
    }
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            format!(
                "{:.2},{:.2}",
                x_axis.to_pixel((i + 1) as f64),
                y_axis.to_pixel(*v)
            )
        })
        .collect();
    writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        points.join(" ")
    )?;
    if let Some(index) = contamination_index {
        writeln!(
            out,
            r#"<circle class="outlier" cx="{:.2}" cy="{:.2}" r="5" fill="red"/>"#,
            x_axis.to_pixel(index as f64),
            y_axis.to_pixel(values[index - 1])
        )?;
    }
    svg_frame_and_labels(
        out,
        SERIES_WIDTH,
        SERIES_HEIGHT,
        &x_axis,
        &y_axis,
        "observation index",
        "value",
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}
