//! Grid evaluation and artifact emission.
//!
//! Grid points run on a rayon pool; rows are collected and written in grid
//! order (p outer, tau inner), so a fixed spec and seed produce
//! byte-identical CSV output regardless of scheduling.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use aoii_core::{
    expected_aoii, run_simulation, run_traced, AoiiReport, ModelParams, PolicyThreshold, SimConfig,
    SimResult,
};
use rayon::prelude::*;

use crate::spec::{ExperimentSpec, Mode};

pub const CSV_HEADER: &str = "assumption,delay,delay_params,p,tau,aoii_analytic,idle_sum,\
head_busy_sum,tail_sigma,aoii_sim_mean,aoii_sim_stderr,runs,epochs,seed";

pub struct Row {
    pub p: f64,
    pub tau: PolicyThreshold,
    pub analytic: Option<AoiiReport>,
    pub sim: Option<SimResult>,
}

impl Row {
    pub fn z_score(&self) -> Option<f64> {
        match (&self.analytic, &self.sim) {
            (Some(a), Some(s)) if s.stderr > 0.0 => {
                Some((s.mean_aoii - a.expected_aoii).abs() / s.stderr)
            }
            _ => None,
        }
    }
}

/// Evaluate every grid point for the given mode.
pub fn evaluate_grid(spec: &ExperimentSpec) -> Result<Vec<Row>, String> {
    let delay = spec.delay_spec()?;
    let want_analytic = matches!(spec.mode, Mode::Analytic | Mode::Compare | Mode::Sweep);
    let want_sim = matches!(spec.mode, Mode::Simulate | Mode::Compare | Mode::Sweep);

    let mut points = Vec::new();
    for &p in &spec.ps {
        for &tau in &spec.taus {
            points.push((p, tau));
        }
    }

    let rows: Result<Vec<Row>, String> = points
        .par_iter()
        .map(|&(p, tau)| {
            let params =
                ModelParams::new(p, spec.assumption, delay.clone()).map_err(|e| e.to_string())?;
            let analytic = if want_analytic {
                Some(expected_aoii(&params, tau).map_err(|e| e.to_string())?)
            } else {
                None
            };
            let sim = if want_sim {
                let config = SimConfig {
                    params,
                    tau,
                    epochs: spec.epochs,
                    runs: spec.runs,
                    seed: spec.seed,
                };
                Some(run_simulation(&config).map_err(|e| e.to_string())?)
            } else {
                None
            };
            Ok(Row {
                p,
                tau,
                analytic,
                sim,
            })
        })
        .collect();
    rows
}

/// Render the rows as the documented CSV schema; `compare` appends a
/// `z_score` column after the stable fourteen.
pub fn render_csv(spec: &ExperimentSpec, rows: &[Row]) -> String {
    let with_z = spec.mode == Mode::Compare;
    let mut out = String::from(CSV_HEADER);
    if with_z {
        out.push_str(",z_score");
    }
    out.push('\n');
    for row in rows {
        let (analytic, idle, busy, tail) = match &row.analytic {
            Some(a) => (
                a.expected_aoii.to_string(),
                a.idle_sum.to_string(),
                a.head_busy_sum.to_string(),
                a.tail_sigma.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let (mean, stderr, runs, epochs, seed) = match &row.sim {
            Some(s) => (
                s.mean_aoii.to_string(),
                s.stderr.to_string(),
                spec.runs.to_string(),
                spec.epochs.to_string(),
                spec.seed.to_string(),
            ),
            None => (
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{analytic},{idle},{busy},{tail},{mean},{stderr},{runs},{epochs},{seed}",
            spec.assumption,
            spec.delay_kind.name(),
            spec.delay_kind.params_string(),
            row.p,
            row.tau,
        ));
        if with_z {
            out.push(',');
            if let Some(z) = row.z_score() {
                out.push_str(&z.to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_artifacts(spec: &ExperimentSpec, rows: &[Row]) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(&spec.out).map_err(|e| format!("{}: {e}", spec.out.display()))?;
    let mut written = Vec::new();

    let csv_path = spec.out.join("results.csv");
    fs::write(&csv_path, render_csv(spec, rows))
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    written.push(csv_path);

    if spec.mode == Mode::Sweep {
        let svg_path = spec.out.join(format!(
            "sweep_{}_{}.svg",
            spec.assumption,
            spec.delay_kind.name()
        ));
        fs::write(&svg_path, render_svg(spec, rows))
            .map_err(|e| format!("{}: {e}", svg_path.display()))?;
        written.push(svg_path);
    }

    if spec.trace && spec.mode != Mode::Analytic {
        written.extend(write_traces(spec)?);
    }

    Ok(written)
}

/// One sample-path trace per grid point (run 0 of the same seeded batch).
fn write_traces(spec: &ExperimentSpec) -> Result<Vec<PathBuf>, String> {
    let delay = spec.delay_spec()?;
    let mut written = Vec::new();
    for &p in &spec.ps {
        for &tau in &spec.taus {
            let params =
                ModelParams::new(p, spec.assumption, delay.clone()).map_err(|e| e.to_string())?;
            let config = SimConfig {
                params,
                tau,
                epochs: spec.epochs,
                runs: spec.runs,
                seed: spec.seed,
            };
            let path = spec.out.join(format!("trace_p{p}_tau{tau}.csv"));
            let mut sink = Vec::new();
            run_traced(&config, &mut sink).map_err(|e| e.to_string())?;
            fs::write(&path, sink).map_err(|e| format!("{}: {e}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Self-contained SVG: x = p, one line per tau from the analytic engine,
/// circle markers for the simulation means.
pub fn render_svg(spec: &ExperimentSpec, rows: &[Row]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const ML: f64 = 62.0; // left margin
    const MR: f64 = 24.0;
    const MT: f64 = 28.0;
    const MB: f64 = 52.0;
    const PALETTE: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    ];

    let xs: Vec<f64> = spec.ps.clone();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(0.0, f64::max);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let mut y_max: f64 = 0.0;
    for row in rows {
        if let Some(a) = &row.analytic {
            y_max = y_max.max(a.expected_aoii);
        }
        if let Some(s) = &row.sim {
            y_max = y_max.max(s.mean_aoii);
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    y_max *= 1.08;

    let x_of = |p: f64| ML + (p - x_min) / x_span * (W - ML - MR);
    let y_of = |v: f64| H - MB - v / y_max * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));

    // X ticks at the grid's p values.
    for &p in &xs {
        let x = x_of(p);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{p}</text>\n",
            H - MB + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">source flip probability p</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 12.0
    ));

    // Y ticks.
    let ticks = 5;
    for k in 0..=ticks {
        let v = y_max * k as f64 / ticks as f64;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2}</text>\n",
            ML - 8.0,
            y + 4.0,
            v
        ));
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">expected AoII (slots)</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    ));

    // One series per tau, in grid order.
    for (ti, &tau) in spec.taus.iter().enumerate() {
        let color = PALETTE[ti % PALETTE.len()];
        let series: Vec<&Row> = rows.iter().filter(|r| r.tau == tau).collect();

        let line: Vec<String> = series
            .iter()
            .filter_map(|r| r.analytic.as_ref().map(|a| (r.p, a.expected_aoii)))
            .map(|(p, v)| format!("{},{}", x_of(p), y_of(v)))
            .collect();
        if line.len() > 1 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                line.join(" ")
            ));
        }
        for row in &series {
            if let Some(s) = &row.sim {
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    x_of(row.p),
                    y_of(s.mean_aoii)
                ));
            }
        }

        // Legend entry.
        let ly = MT + 6.0 + 16.0 * ti as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            ML + 10.0,
            ML + 34.0
        ));
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{ly}\" r=\"3.5\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            ML + 22.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">tau = {tau}</text>\n",
            ML + 40.0,
            ly + 4.0
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Human summary printed to stdout after a grid mode.
pub fn print_summary(
    spec: &ExperimentSpec,
    rows: &[Row],
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{} grid points ({} p values x {} thresholds), mode {}",
        rows.len(),
        spec.ps.len(),
        spec.taus.len(),
        spec.mode.as_str()
    )?;
    if spec.mode == Mode::Compare {
        let max_z = rows.iter().filter_map(Row::z_score).fold(0.0, f64::max);
        writeln!(out, "max |analytic - sim| / stderr = {max_z:.3}")?;
    }
    Ok(())
}
