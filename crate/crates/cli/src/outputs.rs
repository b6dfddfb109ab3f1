//! Deterministic experiment outputs: curves CSV, summary JSON, SVG plot.
//!
//! The CSV is the contract for golden-file comparisons: long format with
//! one row per (series, epoch), series sorted by name, floats in shortest
//! round-trip form. Re-running on the same records overwrites the files
//! byte-identically.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::experiments::EvalSeries;

/// One plotted/logged curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub name: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeriesSummary {
    pub asp: Option<usize>,
    pub gate_count: usize,
    pub final_mean_e: f64,
    pub final_std_e: f64,
    pub min_scaled_energy: f64,
    pub final_bitstring: String,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub asp_tolerance: f64,
    pub seed: u64,
    pub epochs: usize,
    pub series: BTreeMap<String, SeriesSummary>,
}

impl Summary {
    pub fn from_series(series: &[EvalSeries], asp_tolerance: f64, seed: u64) -> Self {
        let epochs = series.first().map_or(0, |s| s.mean.len().saturating_sub(1));
        Self {
            asp_tolerance,
            seed,
            epochs,
            series: series
                .iter()
                .map(|s| {
                    (
                        s.name.clone(),
                        SeriesSummary {
                            asp: s.asp,
                            gate_count: s.gate_count,
                            final_mean_e: s.final_mean,
                            final_std_e: s.final_std,
                            min_scaled_energy: s.min_scaled_energy,
                            final_bitstring: s.final_bitstring.clone(),
                            trials: s.trials,
                        },
                    )
                })
                .collect(),
        }
    }
}

pub fn curves_from_series(series: &[EvalSeries]) -> Vec<CurveSeries> {
    series
        .iter()
        .map(|s| CurveSeries {
            name: s.name.clone(),
            mean: s.mean.clone(),
            std: s.std.clone(),
        })
        .collect()
}

fn write_curves_csv(path: &Path, curves: &[CurveSeries]) -> Result<()> {
    let mut ordered: Vec<&CurveSeries> = curves.iter().collect();
    ordered.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    writeln!(out, "series,epoch,mean_e,std_e")?;
    for series in ordered {
        for (epoch, (m, s)) in series.mean.iter().zip(&series.std).enumerate() {
            writeln!(out, "{},{epoch},{m},{s}", series.name)?;
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_summary_json(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_plot_svg(path: &Path, curves: &[CurveSeries]) -> Result<()> {
    use plotters::prelude::*;

    let epochs = curves.iter().map(|c| c.mean.len()).max().unwrap_or(1);
    let mut ordered: Vec<&CurveSeries> = curves.iter().collect();
    ordered.sort_by(|a, b| a.name.cmp(&b.name));

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 560)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(16)
            .x_label_area_size(38)
            .y_label_area_size(48)
            .build_cartesian_2d(0f64..(epochs.max(2) - 1) as f64, 0f64..1f64)?;
        chart
            .configure_mesh()
            .x_desc("epoch")
            .y_desc("scaled energy")
            .draw()?;

        let palette = [
            RGBColor(204, 37, 41),
            RGBColor(57, 106, 177),
            RGBColor(62, 150, 81),
            RGBColor(218, 124, 48),
            RGBColor(107, 76, 154),
            RGBColor(146, 36, 40),
        ];
        for (i, series) in ordered.iter().enumerate() {
            let color = palette[i % palette.len()];
            let band: Vec<(f64, f64)> = series
                .mean
                .iter()
                .zip(&series.std)
                .enumerate()
                .map(|(e, (m, s))| (e as f64, (m + s).min(1.0)))
                .chain(
                    series
                        .mean
                        .iter()
                        .zip(&series.std)
                        .enumerate()
                        .rev()
                        .map(|(e, (m, s))| (e as f64, (m - s).max(0.0))),
                )
                .collect();
            chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.18))))?;
            chart
                .draw_series(LineSeries::new(
                    series
                        .mean
                        .iter()
                        .enumerate()
                        .map(|(e, &m)| (e as f64, m)),
                    color.stroke_width(2),
                ))?
                .label(series.name.clone())
                .legend(move |(x, y)| {
                    PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
                });
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()?;
        root.present()?;
    }
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write `curves.csv`, `summary.json`, and `curves.svg` into `out_dir`.
///
/// Every reported mean must be a scaled energy in [0, 1]; empty records
/// are rejected.
pub fn emit_outputs(
    out_dir: &Path,
    curves: &[CurveSeries],
    summary: &Summary,
    with_plot: bool,
) -> Result<Vec<PathBuf>> {
    anyhow::ensure!(!curves.is_empty(), "no series to emit");
    for series in curves {
        anyhow::ensure!(
            !series.mean.is_empty(),
            "series `{}` has an empty epoch list",
            series.name
        );
        anyhow::ensure!(
            series.mean.len() == series.std.len(),
            "series `{}` mean/std length mismatch",
            series.name
        );
        for &m in &series.mean {
            anyhow::ensure!(
                (0.0..=1.0).contains(&m),
                "series `{}` reports scaled energy {m} outside [0, 1]",
                series.name
            );
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let csv = out_dir.join("curves.csv");
    let json = out_dir.join("summary.json");
    write_curves_csv(&csv, curves)?;
    write_summary_json(&json, summary)?;
    let mut written = vec![csv, json];
    if with_plot {
        let svg = out_dir.join("curves.svg");
        write_plot_svg(&svg, curves)?;
        written.push(svg);
    }
    Ok(written)
}

/// Re-derive the per-series ASP from an emitted curves CSV.
pub fn asp_from_csv(path: &Path, tolerance: f64) -> Result<BTreeMap<String, Option<usize>>> {
    let text = std::fs::read_to_string(path)?;
    let mut curves: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            anyhow::ensure!(line == "series,epoch,mean_e,std_e", "unexpected header");
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(parts.len() == 4, "bad row: {line}");
        curves
            .entry(parts[0].to_string())
            .or_default()
            .push((parts[1].parse()?, parts[2].parse()?));
    }
    Ok(curves
        .into_iter()
        .map(|(name, mut rows)| {
            rows.sort_by_key(|&(e, _)| e);
            let asp = rows.iter().find(|&&(_, m)| m <= tolerance).map(|&(e, _)| e);
            (name, asp)
        })
        .collect())
}
