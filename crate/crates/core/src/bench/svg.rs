//! Minimal standalone SVG plots: BER curves and spectrogram heatmaps.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::record::BerRecord;
use super::spectrogram::Spectrogram;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn label(r: &BerRecord) -> String {
    let mut s = format!("{:?} s_f={}", r.scheme, r.spreading_factor).to_lowercase();
    if let Some(e) = r.epsilon {
        let _ = write!(s, " eps={e}");
    }
    if let Some(a) = r.alpha.filter(|a| *a != 0.0) {
        let _ = write!(s, " alpha={a}");
    }
    s
}

/// Error rate on a log axis against `sigma` (Eb/N0 for baseline rows).
/// Hollow markers are zero-error upper bounds.
pub fn ber_svg(records: &[BerRecord]) -> String {
    let mut groups: BTreeMap<String, Vec<&BerRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(label(r)).or_default().push(r);
    }
    let xs = records.iter().map(|r| r.sigma);
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
    let lo = records.iter().map(|r| r.pe.log10().floor()).fold(0.0f64, f64::min).min(-1.0);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |p: f64| PAD + (p.log10() / lo) * (H - 2.0 * PAD);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for d in (lo as i64)..=0 {
        let y = py(10f64.powi(d as i32));
        let _ = writeln!(
            s,
            "<line x1=\"{PAD}\" x2=\"{}\" y1=\"{y:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/><text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{d}</text>",
            W - PAD,
            PAD - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x0} .. {x1}</text>", W / 2.0, H - 16.0);
    for (g, (name, rows)) in groups.iter().enumerate() {
        let c = COLORS[g % COLORS.len()];
        let mut rows = rows.clone();
        rows.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
        let pts: Vec<String> = rows.iter().map(|r| format!("{:.1},{:.1}", px(r.sigma), py(r.pe))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{c}\" points=\"{}\"/>", pts.join(" "));
        for r in &rows {
            let fill = if r.pe_is_upper_bound { "white" } else { c };
            let _ = writeln!(
                s,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" stroke=\"{c}\" fill=\"{fill}\"/>",
                px(r.sigma),
                py(r.pe)
            );
        }
        let _ =
            writeln!(s, "<text x=\"{}\" y=\"{}\" fill=\"{c}\">{name}</text>", PAD + 8.0, PAD + 14.0 * (g as f64 + 1.0));
    }
    s.push_str("</svg>\n");
    s
}

/// Grey-scale heatmap of `20 log10` magnitudes over a 60 dB range.
pub fn spectrogram_svg(spec: &Spectrogram) -> String {
    let cols = spec.mag.len().max(1);
    let bins = spec.mag.first().map_or(1, Vec::len);
    let db: Vec<Vec<f64>> = spec.mag.iter().map(|c| c.iter().map(|v| 20.0 * v.max(1e-300).log10()).collect()).collect();
    let top = db.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let (cw, ch) = ((W - 2.0 * PAD) / cols as f64, (H - 2.0 * PAD) / bins as f64);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" shape-rendering=\"crispEdges\">\n"
    );
    for (c, col) in db.iter().enumerate() {
        for (k, v) in col.iter().enumerate() {
            let level = ((v - top + 60.0) / 60.0).clamp(0.0, 1.0);
            let g = (255.0 * (1.0 - level)).round() as u8;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                PAD + c as f64 * cw,
                H - PAD - (k + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
