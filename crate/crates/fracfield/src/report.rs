//! CSV and SVG emission for study artifacts.
//!
//! Every file opens with `#`-prefixed provenance lines so a result can be
//! traced to its exact inputs. Numbers are written in shortest
//! round-trip form, which keeps re-runs byte-identical apart from the
//! timestamp line.

use std::io::Write;

use crate::error::Result;
use crate::grid::Grid;
use crate::sampler::FieldRealization;
use crate::spectral::Functional;
use crate::study::{StudyResult, StudyRow};
use crate::VERSION;

/// `# key: value` provenance block shared by all artifact files.
pub fn write_provenance<W: Write>(w: &mut W, entries: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# fracfield v{VERSION}")?;
    for (key, value) in entries {
        writeln!(w, "# {key}: {value}")?;
    }
    Ok(())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Provenance entries describing a study configuration.
pub fn study_provenance(result: &StudyResult, timestamp: &str) -> Vec<(&'static str, String)> {
    let config = &result.config;
    let functionals: Vec<String> =
        config.functionals.iter().map(Functional::spec_string).collect();
    vec![
        ("dimension", config.dimension.to_string()),
        ("kappa", config.kappa.to_string()),
        ("betas", join(&config.betas)),
        ("meshes", join(&config.meshes)),
        ("calibration", config.calibration.to_string()),
        ("n_ok", config.n_ok.to_string()),
        ("grid_points", config.grid_points.to_string()),
        ("functionals", functionals.join(";")),
        ("memory_cap", config.memory_cap.to_string()),
        ("generator", crate::sampler::GENERATOR_NAME.to_string()),
        ("timestamp", timestamp.to_string()),
    ]
}

/// Per-cell study table.
pub fn write_rows_csv<W: Write>(
    w: &mut W,
    result: &StudyResult,
    timestamp: &str,
) -> Result<()> {
    write_provenance(w, &study_provenance(result, timestamp))?;
    writeln!(w, "beta,d,N_h,h,k,K_minus,K_plus,functional,E_ref,E_disc,abs_error")?;
    for row in &result.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{:e},{:e},{:e}",
            row.beta,
            row.dimension,
            row.dof_count,
            row.mesh_size,
            row.step,
            row.k_minus,
            row.k_plus,
            row.functional.spec_string(),
            row.e_ref,
            row.e_disc,
            row.abs_error
        )?;
    }
    Ok(())
}

/// Fitted convergence rates.
pub fn write_rates_csv<W: Write>(
    w: &mut W,
    result: &StudyResult,
    timestamp: &str,
) -> Result<()> {
    write_provenance(w, &study_provenance(result, timestamp))?;
    writeln!(w, "beta,d,functional,rate_observed,rate_theory,intercept")?;
    for fit in &result.rates {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fit.beta,
            result.config.dimension,
            fit.functional.spec_string(),
            fit.rate,
            fit.rate_theory,
            fit.intercept
        )?;
    }
    Ok(())
}

/// Reference and discrete variances side by side on the evaluation grid.
pub fn write_variance_csv<W: Write>(
    w: &mut W,
    grid: &Grid,
    sigma2_ref: &[f64],
    sigma2_disc: &[f64],
    provenance: &[(&str, String)],
) -> Result<()> {
    write_provenance(w, provenance)?;
    match grid.dimension() {
        1 => writeln!(w, "x,sigma2_ref,sigma2_disc")?,
        _ => writeln!(w, "x,y,sigma2_ref,sigma2_disc")?,
    }
    for idx in 0..grid.len() {
        let point = grid.point(idx);
        let coords = join(&point);
        writeln!(w, "{},{:e},{:e}", coords, sigma2_ref[idx], sigma2_disc[idx])?;
    }
    Ok(())
}

/// Sampled realizations, one row per (realization, node).
pub fn write_samples_csv<W: Write>(
    w: &mut W,
    realizations: &[FieldRealization],
    provenance: &[(&str, String)],
) -> Result<()> {
    write_provenance(w, provenance)?;
    let header = match realizations.first().map(|r| r.mesh().dimension()) {
        Some(2) => "realization,x,y,value",
        _ => "realization,x,value",
    };
    writeln!(w, "{header}")?;
    for (id, realization) in realizations.iter().enumerate() {
        let mesh = realization.mesh();
        for (node, value) in realization.coefficients().iter().enumerate() {
            let coords = join(&mesh.node_point(node));
            writeln!(w, "{id},{coords},{value:e}")?;
        }
    }
    Ok(())
}

const PLOT_WIDTH: f64 = 640.0;
const PLOT_HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log plot of weak error against mesh size for one functional, one
/// series per beta. Static SVG, no external assets.
pub fn plot_rates_svg<W: Write>(
    w: &mut W,
    result: &StudyResult,
    functional: &Functional,
) -> Result<()> {
    let rows: Vec<&StudyRow> = result
        .rows
        .iter()
        .filter(|r| r.functional == *functional && r.abs_error > 0.0)
        .collect();
    if rows.is_empty() {
        return Err(crate::Error::TooFewPoints(0));
    }

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &rows {
        x_lo = x_lo.min(row.mesh_size.ln());
        x_hi = x_hi.max(row.mesh_size.ln());
        y_lo = y_lo.min(row.abs_error.ln());
        y_hi = y_hi.max(row.abs_error.ln());
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad_x = 0.05 * (x_hi - x_lo);
    let pad_y = 0.08 * (y_hi - y_lo);
    x_lo -= pad_x;
    x_hi += pad_x;
    y_lo -= pad_y;
    y_hi += pad_y;

    let span_x = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let span_y = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |v: f64| MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * span_x;
    let to_y = |v: f64| MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * span_y;

    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )?;
    writeln!(
        w,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{span_x}\" height=\"{span_y}\" fill=\"white\" stroke=\"black\"/>"
    )?;
    writeln!(
        w,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\">weak error, functional {}</text>",
        MARGIN_LEFT + span_x / 2.0,
        functional
    )?;

    // Decade gridlines and labels on the error axis.
    let dec_lo = (y_lo / std::f64::consts::LN_10).ceil() as i64;
    let dec_hi = (y_hi / std::f64::consts::LN_10).floor() as i64;
    for dec in dec_lo..=dec_hi {
        let y = to_y(dec as f64 * std::f64::consts::LN_10);
        writeln!(
            w,
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT + span_x
        )?;
        writeln!(
            w,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{dec}</text>",
            MARGIN_LEFT - 6.0,
            y + 4.0
        )?;
    }

    // One tick per distinct mesh size.
    let mut hs: Vec<f64> = rows.iter().map(|r| r.mesh_size).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    for h in &hs {
        let x = to_x(h.ln());
        writeln!(
            w,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_TOP,
            MARGIN_TOP + span_y
        )?;
        writeln!(
            w,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{h:.5}</text>",
            MARGIN_TOP + span_y + 18.0
        )?;
    }
    writeln!(
        w,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">mesh size h</text>",
        MARGIN_LEFT + span_x / 2.0,
        PLOT_HEIGHT - 12.0
    )?;

    let mut betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    for (bi, &beta) in betas.iter().enumerate() {
        let color = PALETTE[bi % PALETTE.len()];
        let mut series: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.beta == beta)
            .map(|r| (r.mesh_size.ln(), r.abs_error.ln()))
            .collect();
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = series
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", to_x(x), to_y(y)))
            .collect();
        writeln!(
            w,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.join(" ")
        )?;
        for &(x, y) in &series {
            writeln!(
                w,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                to_x(x),
                to_y(y)
            )?;
        }
        let ly = MARGIN_TOP + 16.0 + 18.0 * bi as f64;
        writeln!(
            w,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            PLOT_WIDTH - MARGIN_RIGHT + 10.0,
            PLOT_WIDTH - MARGIN_RIGHT + 34.0
        )?;
        writeln!(
            w,
            "<text x=\"{:.1}\" y=\"{:.1}\">beta={beta}</text>",
            PLOT_WIDTH - MARGIN_RIGHT + 40.0,
            ly + 4.0
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}
