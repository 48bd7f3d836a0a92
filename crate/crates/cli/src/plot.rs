//! Log-log SVG rendering of criteria and escape CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use percolate_core::criteria::CRITERIA_CSV_HEADER;
use percolate_core::wos::ESCAPE_CSV_HEADER;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("unknown CSV columns: {0}")]
    UnknownColumns(String),
    #[error("bad CSV row {row}: {message}")]
    BadRow { row: usize, message: String },
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#00798c", "#8d6a9f", "#3d3d3d"];

struct Point {
    x: f64,
    y: f64,
    err: Option<f64>,
}

fn field(rec: &csv::StringRecord, i: usize, row: usize) -> Result<f64, PlotError> {
    rec.get(i)
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| PlotError::BadRow { row, message: format!("column {i} is not a number") })
}

/// Series keyed by label, in first-appearance order.
fn read_series(csv_text: &str) -> Result<Vec<(String, Vec<Point>)>, PlotError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(csv_text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| PlotError::UnknownColumns(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let escape = if header == CRITERIA_CSV_HEADER {
        false
    } else if header == ESCAPE_CSV_HEADER {
        true
    } else {
        return Err(PlotError::UnknownColumns(header));
    };
    let mut order: Vec<String> = Vec::new();
    let mut series: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| PlotError::BadRow { row, message: e.to_string() })?;
        let (label, point) = if escape {
            let label = format!("{} escape", &rec[0]);
            (label, Point { x: field(&rec, 1, row)?, y: field(&rec, 2, row)?, err: Some(field(&rec, 3, row)?) })
        } else {
            let label = format!("{} [{}]", &rec[0], rec.get(5).unwrap_or(""));
            (label, Point { x: field(&rec, 1, row)?, y: field(&rec, 2, row)?, err: None })
        };
        if !series.contains_key(&label) {
            order.push(label.clone());
        }
        series.entry(label).or_default().push(point);
    }
    Ok(order.into_iter().map(|l| { let pts = series.remove(&l).unwrap(); (l, pts) }).collect())
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Decade-aligned range of `log10` of the positive values, at least one decade wide.
fn log_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

/// SVG of the CSV produced by a run; `x = 1/ε` and `y` are logarithmic.
pub fn emit_plot(csv_text: &str) -> Result<String, PlotError> {
    let series = read_series(csv_text)?;
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (x0, x1) = log_range(all().map(|p| 1.0 / p.x));
    let (y0, y1) = log_range(all().flat_map(|p| [p.y, p.y + p.err.unwrap_or(0.0)]));
    let sx = |x: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * ((1.0 / x).log10() - x0) / (x1 - x0);
    let sy = |y: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (y.log10() - y0) / (y1 - y0);

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(svg, r#"<path d="M{left:.2} {top:.2} V{bottom:.2} H{right:.2}" fill="none" stroke="black"/>"#).unwrap();
    for k in (x0 as i32)..=(x1 as i32) {
        let x = sx(10f64.powi(-k));
        writeln!(svg, r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 5.0).unwrap();
        writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">1e{k}</text>"#, bottom + 18.0).unwrap();
    }
    for k in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(k));
        writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/>"#, left - 5.0).unwrap();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{k}</text>"#, left - 8.0, y + 4.0).unwrap();
    }
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">1/epsilon</text>"#, WIDTH / 2.0, HEIGHT - 15.0).unwrap();

    for (i, (label, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let visible: Vec<&Point> = points.iter().filter(|p| p.y > 0.0 && p.y.is_finite() && p.x > 0.0).collect();
        let coords: Vec<String> = visible.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y))).collect();
        writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" ")).unwrap();
        for p in &visible {
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(p.x), sy(p.y)).unwrap();
            if let Some(e) = p.err.filter(|e| *e > 0.0) {
                let lo = (p.y - e).max(10f64.powf(y0));
                writeln!(
                    svg,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    sy(lo),
                    sy(p.y + e),
                    x = sx(p.x)
                )
                .unwrap();
            }
        }
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{}</text>"#,
            left + 8.0,
            top + 12.0 * (i as f64 + 1.0),
            escape_xml(label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline_ys(svg: &str) -> Vec<Vec<f64>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let pts = l.split('"').nth(1).unwrap();
                pts.split_whitespace().map(|p| p.split(',').nth(1).unwrap().parse().unwrap()).collect()
            })
            .collect()
    }

    #[test]
    fn empty_data_gives_axes_only() {
        let svg = emit_plot(&format!("# schema=1\n{CRITERIA_CSV_HEADER}\n")).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("<path"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn monotone_ladder_gives_monotone_polyline() {
        let csv = format!(
            "# schema=1\n{CRITERIA_CSV_HEADER}\nradial,1e-1,0.5,converges,flat,\"d=3;a,b\"\nradial,1e-2,0.7,converges,flat,\"d=3;a,b\"\nradial,1e-3,0.71,converges,flat,\"d=3;a,b\"\n"
        );
        let ys = polyline_ys(&emit_plot(&csv).unwrap());
        assert_eq!(ys.len(), 1);
        // Larger values sit higher, i.e. at smaller SVG y.
        assert!(ys[0].windows(2).all(|w| w[1] <= w[0]), "{ys:?}");
    }

    #[test]
    fn identical_input_gives_identical_output() {
        let csv = format!("# schema=1\n{ESCAPE_CSV_HEADER}\ns,1e-1,0.5,0.01,0.4,1,20,100,0,0\ns,1e-2,0.3,0.02,0.2,1,20,100,0,0\n");
        assert_eq!(emit_plot(&csv).unwrap(), emit_plot(&csv).unwrap());
        assert!(emit_plot(&csv).unwrap().contains("s escape"));
    }

    #[test]
    fn unknown_columns_are_rejected() {
        assert!(matches!(emit_plot("a,b,c\n1,2,3\n"), Err(PlotError::UnknownColumns(_))));
        let bad = format!("{CRITERIA_CSV_HEADER}\nradial,x,0.5,converges,flat,p\n");
        assert!(matches!(emit_plot(&bad), Err(PlotError::BadRow { .. })));
    }
}
