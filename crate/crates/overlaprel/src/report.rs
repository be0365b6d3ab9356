//! Report emission: CSV and JSON exports of matrices and outlier reports,
//! an SVG lower-triangle heatmap, and a merged markdown summary.
//!
//! Values are stored at full double precision; the 3-decimal rounding here
//! is display-only. JSON uses the shortest round-trip float representation,
//! which is byte-stable across runs.

use crate::outlier::OutlierReport;
use crate::overlap::OverlapMatrix;
use crate::spectral::SummaryResult;

/// CSV with labels in the header row and first column; entries rounded to
/// 3 decimals for display.
pub fn matrix_to_csv(matrix: &OverlapMatrix) -> String {
    let mut out = String::from("label");
    for l in matrix.labels() {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for j in 0..matrix.m() {
        out.push_str(&matrix.labels()[j]);
        for l in 0..matrix.m() {
            out.push_str(&format!(",{:.3}", matrix.get(j, l)));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(matrix: &OverlapMatrix) -> String {
    serde_json::to_string_pretty(matrix).expect("matrix serialization cannot fail")
}

pub fn summary_to_json(summary: &SummaryResult) -> String {
    serde_json::to_string_pretty(summary).expect("summary serialization cannot fail")
}

pub fn outlier_report_to_json(report: &OutlierReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

/// One row per study: index, label, leave-one-out summary, zeta, s, tau, p
/// and the q levels the study was flagged at.
pub fn outlier_report_to_csv(report: &OutlierReport) -> String {
    let mut out = String::from("j,label,omega_minus_j,zeta,s,tau,p,flagged_at\n");
    for r in &report.records {
        let flags: Vec<String> = report
            .decisions
            .iter()
            .filter(|d| d.flagged.iter().any(|f| f.study_index == r.study_index))
            .map(|d| format!("q={}", d.q))
            .collect();
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{}\n",
            r.study_index,
            r.label,
            r.omega_minus_j,
            r.zeta_minus_j,
            r.s2.sqrt(),
            r.tau,
            r.p_value,
            flags.join(";")
        ));
    }
    out
}

/// Lower-triangle heatmap of the off-diagonal entries. The color ramp is a
/// documented linear interpolation from white (0) to dark blue (1).
pub fn matrix_to_svg(matrix: &OverlapMatrix) -> String {
    const CELL: usize = 40;
    const MARGIN: usize = 80;
    let m = matrix.m();
    let size = MARGIN + m * CELL + 10;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         font-family=\"monospace\" font-size=\"10\">\n"
    );
    for j in 1..m {
        for l in 0..j {
            let v = matrix.get(j, l);
            let (r, g, b) = ramp(v);
            let x = MARGIN + l * CELL;
            let y = MARGIN + j * CELL;
            out.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" \
                 fill=\"rgb({r},{g},{b})\" stroke=\"#888\"/>\n"
            ));
            let tx = x + CELL / 2;
            let ty = y + CELL / 2 + 3;
            let text_fill = if v > 0.6 { "#fff" } else { "#000" };
            out.push_str(&format!(
                "<text x=\"{tx}\" y=\"{ty}\" text-anchor=\"middle\" fill=\"{text_fill}\">{v:.3}</text>\n"
            ));
        }
    }
    for (i, label) in matrix.labels().iter().enumerate() {
        if i > 0 {
            let y = MARGIN + i * CELL + CELL / 2 + 3;
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{label}</text>\n",
                MARGIN - 6
            ));
        }
        if i < m - 1 {
            let x = MARGIN + i * CELL + CELL / 2;
            out.push_str(&format!(
                "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{label}</text>\n",
                MARGIN - 6
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Linear white-to-blue ramp over [0, 1].
fn ramp(v: f64) -> (u8, u8, u8) {
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - v)) as u8;
    let g = (255.0 * (1.0 - 0.75 * v)) as u8;
    let b = (255.0 - 115.0 * v) as u8;
    (r, g, b)
}

/// Merges previously produced JSON artifacts into one markdown summary.
pub fn merge_markdown(
    matrices: &[OverlapMatrix],
    summaries: &[SummaryResult],
    reports: &[OutlierReport],
) -> String {
    let mut out = String::from("# Reproducibility report\n");
    for m in matrices {
        out.push_str(&format!(
            "\n## Overlap matrix ({:?}, M = {})\n\n",
            m.kind(),
            m.m()
        ));
        out.push_str("```\n");
        out.push_str(&matrix_to_csv(m));
        out.push_str("```\n");
    }
    for s in summaries {
        out.push_str(&format!(
            "\n## Summarized overlap ({:?}, M = {})\n\nvalue: {:.3}\n\neigenvalues: {}\n",
            s.kind,
            s.m,
            s.value,
            s.spectrum
                .eigenvalues
                .iter()
                .map(|e| format!("{e:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    for r in reports {
        out.push_str(&format!(
            "\n## Outlier test ({:?}, M = {})\n\nfull summary: {:.3}\n\n",
            r.kind, r.m, r.full_summary.value
        ));
        out.push_str("| j | label | omega_-j | tau | p | flagged at |\n");
        out.push_str("|---|-------|----------|-----|---|------------|\n");
        for rec in &r.records {
            let flags: Vec<String> = r
                .decisions
                .iter()
                .filter(|d| d.flagged.iter().any(|f| f.study_index == rec.study_index))
                .map(|d| format!("q={}", d.q))
                .collect();
            out.push_str(&format!(
                "| {} | {} | {:.3} | {:.3} | {:.3} | {} |\n",
                rec.study_index,
                rec.label,
                rec.omega_minus_j,
                rec.tau,
                rec.p_value,
                if flags.is_empty() {
                    "-".to_string()
                } else {
                    flags.join("; ")
                }
            ));
        }
    }
    out
}
