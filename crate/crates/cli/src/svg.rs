//! Minimal SVG bar-chart emission for evaluation reports.

/// Render a bar chart of values in `[0, 1]` with one bar per label.
pub fn bar_chart(title: &str, labels: &[String], values: &[f64]) -> String {
    let n = labels.len().max(1);
    let bar_w = 22.0;
    let gap = 8.0;
    let plot_h = 240.0;
    let left = 50.0;
    let bottom = 40.0;
    let width = left + n as f64 * (bar_w + gap) + 20.0;
    let height = plot_h + bottom + 40.0;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{left}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        xml_escape(title)
    ));
    // Axis and gridlines at 0, 0.5, 1.
    for (frac, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let y = 30.0 + plot_h * (1.0 - frac);
        out.push_str(&format!(
            "  <line x1=\"{left}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#ccc\" stroke-width=\"1\"/>\n",
            width - 10.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{label}</text>\n",
            left - 6.0,
            y + 3.0
        ));
    }
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let clamped = v.clamp(0.0, 1.0);
        let x = left + i as f64 * (bar_w + gap);
        let h = plot_h * clamped;
        let y = 30.0 + plot_h - h;
        out.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w}\" height=\"{h:.1}\" \
             fill=\"#4878a8\"/>\n"
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"9\" \
             text-anchor=\"end\" transform=\"rotate(-60 {:.1} {:.1})\">{}</text>\n",
            x + bar_w / 2.0,
            30.0 + plot_h + 12.0,
            x + bar_w / 2.0,
            30.0 + plot_h + 12.0,
            xml_escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_bars_and_title() {
        let svg = bar_chart(
            "demo",
            &["a".to_string(), "b".to_string()],
            &[0.5, 1.0],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.contains("demo"));
    }
}
