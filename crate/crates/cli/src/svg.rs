use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::Result;

use crate::io::create;
use crate::sweep::Row;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;
const COLORS: [(&str, &str); 4] = [
    ("quantization", "#1f77b4"),
    ("ap_gaussian", "#d62728"),
    ("distp_laplace", "#2ca02c"),
    ("dp_histogram", "#9467bd"),
];

/// Scatter of (Π̃, Δ̃) per sweep point, with the Δ̃ = -Π̃ frontier when `frontier` is set.
pub fn write_scatter(path: &Path, rows: &[Row], frontier: bool) -> Result<()> {
    let pts: Vec<(&str, f64, f64)> =
        rows.iter().filter_map(|r| r.result.as_ref().ok().map(|&(p, d)| (r.mechanism, p, d))).collect();
    let xmin = pts.iter().map(|p| p.1).fold(0.0f64, f64::min).min(-1e-12);
    let ymax = pts.iter().map(|p| p.2).fold(0.0f64, f64::max).max(-xmin).max(1e-12);
    let sx = |x: f64| PAD + (x - xmin) / (0.0 - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / ymax * (H - 2.0 * PAD);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        s,
        r#"<path d="M{} {} L{} {} L{} {}" stroke="black" fill="none"/>"#,
        PAD,
        PAD,
        PAD,
        H - PAD,
        W - PAD,
        H - PAD
    )?;
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">surrogate privacy</text>"#, W / 2.0, H - 20.0)?;
    writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">surrogate distortion</text>"#,
        H / 2.0,
        H / 2.0
    )?;
    writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="middle">{:.3}</text>"#, H - PAD + 16.0, xmin)?;
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">0</text>"#, W - PAD, H - PAD + 16.0)?;
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, PAD - 4.0, PAD + 4.0, ymax)?;
    if frontier {
        let x0 = xmin.max(-ymax);
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            sx(x0),
            sy(-x0),
            sx(0.0),
            sy(0.0)
        )?;
    }
    for (m, x, y) in &pts {
        let color = COLORS.iter().find(|c| c.0 == *m).map_or("black", |c| c.1);
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(*x), sy(*y))?;
    }
    for (i, (name, color)) in COLORS.iter().enumerate() {
        let y = PAD + 16.0 * i as f64;
        writeln!(s, r#"<circle cx="{}" cy="{y}" r="4" fill="{color}"/>"#, W - PAD - 110.0)?;
        writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, W - PAD - 100.0, y + 4.0)?;
    }
    if frontier {
        let y = PAD + 16.0 * COLORS.len() as f64;
        writeln!(s, r#"<text x="{}" y="{}" fill="gray">frontier</text>"#, W - PAD - 100.0, y + 4.0)?;
    }
    writeln!(s, "</svg>")?;
    let mut f = create(path)?;
    f.write_all(s.as_bytes())?;
    f.flush()?;
    Ok(())
}
