//! Minimal deterministic SVG charts. Output depends only on the inputs.

use std::fmt::Write;

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, width: u32, height: u32, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        width / 2,
        escape(title)
    );
}

fn text_width(label: &str) -> u32 {
    label.chars().count() as u32 * 7
}

/// Shade from near-white (0) to dark blue (1).
fn shade(t: f64) -> (u8, u8, u8) {
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// Square count matrix with row and column labels.
pub fn heatmap(title: &str, labels: &[&str], counts: &[Vec<u64>]) -> String {
    const CELL: u32 = 44;
    let n = labels.len() as u32;
    let left = labels.iter().map(|l| text_width(l)).max().unwrap_or(0) + 16;
    let top = 40 + left * 7 / 10;
    let width = left + n * CELL + 20;
    let height = top + n * CELL + 20;
    let max = counts.iter().flatten().copied().max().unwrap_or(0);

    let mut out = String::new();
    header(&mut out, width, height, title);
    for (i, label) in labels.iter().enumerate() {
        let i = i as u32;
        let y = top + i * CELL + CELL / 2 + 4;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            left - 6,
            escape(label)
        );
        let x = left + i * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="start" transform="rotate(-45 {x} {})">{}</text>"#,
            top - 6,
            top - 6,
            escape(label)
        );
    }
    for (r, row) in counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = if max == 0 { 0.0 } else { v as f64 / max as f64 };
            let (red, green, blue) = shade(t);
            let x = left + c as u32 * CELL;
            let y = top + r as u32 * CELL;
            let _ = writeln!(
                out,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({red},{green},{blue})" stroke="#ffffff"/>"##
            );
            let ink = if t > 0.55 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 4
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Horizontal bars, one per item, in the given order.
pub fn bar_chart(title: &str, items: &[(String, f64)]) -> String {
    const ROW: u32 = 22;
    const BAR_AREA: f64 = 360.0;
    let left = items
        .iter()
        .map(|(l, _)| text_width(l))
        .max()
        .unwrap_or(0)
        .clamp(60, 360)
        + 16;
    let width = left + BAR_AREA as u32 + 80;
    let height = 40 + items.len() as u32 * ROW + 10;
    let max = items.iter().map(|(_, v)| *v).fold(0.0, f64::max);

    let mut out = String::new();
    header(&mut out, width, height, title);
    for (i, (label, value)) in items.iter().enumerate() {
        let y = 36 + i as u32 * ROW;
        let w = if max > 0.0 {
            value.max(0.0) / max * BAR_AREA
        } else {
            0.0
        };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 6,
            y + 14,
            escape(label)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{left}" y="{y}" width="{w:.2}" height="{}" fill="#3b6ea5"/>"##,
            ROW - 6
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}">{}</text>"#,
            left as f64 + w + 4.0,
            y + 14,
            format_value(*value)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\"'"), "a&lt;b &amp; &quot;c&quot;&apos;");
    }

    #[test]
    fn bar_chart_is_well_formed_with_awkward_labels() {
        let svg = bar_chart("N-grams <&>", &[("a & b".into(), 3.0), ("<c>".into(), 0.0)]);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(
            doc.descendants().filter(|n| n.has_tag_name("rect")).count(),
            3
        );
    }

    #[test]
    fn heatmap_all_zero() {
        let counts = vec![vec![0u64; 2]; 2];
        let svg = heatmap("empty", &["x", "y"], &counts);
        roxmltree::Document::parse(&svg).unwrap();
        assert!(svg.contains("rgb(247,251,255)"));
    }
}
