//! Minimal hand-written SVG plots.

use std::fmt::Write;

use crate::metrics::{DensityHeatmap, PopulationSummary};

const W: f64 = 800.0;
const H: f64 = 400.0;
const M: f64 = 40.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{M}" y="24" font-family="sans-serif" font-size="14">{title}</text>"#);
    s
}

/// Diverging red/blue map of `diff` (synthetic minus real density): timestep on x,
/// amplitude on y. Red marks bins where the synthetic population is denser.
pub fn heatmap_svg(h: &DensityHeatmap) -> String {
    let mut s = header("Density difference (synthetic - real)");
    let steps = h.timesteps();
    let bins = h.bin_edges.len().saturating_sub(1);
    if steps == 0 || bins == 0 {
        s.push_str("</svg>\n");
        return s;
    }
    let peak = h.diff.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let cw = (W - 2.0 * M) / steps as f64;
    let ch = (H - 2.0 * M) / bins as f64;
    for (t, col) in h.diff.iter().enumerate() {
        for (b, &v) in col.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let level = if peak > 0.0 { (v.abs() / peak).min(1.0) } else { 0.0 };
            let fade = (255.0 * (1.0 - level)).round() as u8;
            let color = if v > 0.0 {
                format!("#ff{fade:02x}{fade:02x}")
            } else {
                format!("#{fade:02x}{fade:02x}ff")
            };
            let x = M + t as f64 * cw;
            let y = H - M - (b + 1) as f64 * ch;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#, cw + 0.01, ch + 0.01);
        }
    }
    let lo = h.bin_edges[0];
    let hi = h.bin_edges[bins];
    let _ = writeln!(s, r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{hi:.2}</text>"#, M + 8.0);
    let _ = writeln!(s, r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{lo:.2}</text>"#, H - M);
    let _ = writeln!(s, r#"<text x="{M}" y="{:.2}" font-family="sans-serif" font-size="10">timestep 0..{}</text>"#, H - 12.0, steps - 1);
    s.push_str("</svg>\n");
    s
}

/// Mean beat with a +-1 std band for two populations.
pub fn overlay_svg(real: &PopulationSummary<f64>, synth: &PopulationSummary<f64>) -> String {
    let mut s = header("Mean beat +- std (real: blue, synthetic: red)");
    let n = real.mean.len().max(synth.mean.len());
    if n < 2 {
        s.push_str("</svg>\n");
        return s;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in [real, synth] {
        for (m, sd) in p.mean.iter().zip(&p.std) {
            lo = lo.min(m - sd);
            hi = hi.max(m + sd);
        }
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let x = |i: usize| M + i as f64 * (W - 2.0 * M) / (n - 1) as f64;
    let y = |v: f64| H - M - (v - lo) / (hi - lo) * (H - 2.0 * M);
    for (p, color) in [(real, "#1f4fd1"), (synth, "#d1301f")] {
        let mut band = String::new();
        for (i, (m, sd)) in p.mean.iter().zip(&p.std).enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", x(i), y(m + sd));
        }
        for (i, (m, sd)) in p.mean.iter().zip(&p.std).enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", x(i), y(m - sd));
        }
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.trim_end());
        let line: Vec<String> = p.mean.iter().enumerate().map(|(i, &m)| format!("{:.2},{:.2}", x(i), y(m))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
    }
    let _ = writeln!(s, r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{hi:.2} mV</text>"#, M + 8.0);
    let _ = writeln!(s, r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="10">{lo:.2} mV</text>"#, H - M);
    s.push_str("</svg>\n");
    s
}
