use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ReportError, Result};

/// One group of bars, vowel then consonant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGroup {
    pub label: String,
    pub vowel: Option<f64>,
    pub consonant: Option<f64>,
}

const WIDTH_PER_GROUP: f64 = 90.0;
const BAR_WIDTH: f64 = 30.0;
const PLOT_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 50.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const VOWEL_FILL: &str = "#4c72b0";
const CONSONANT_FILL: &str = "#dd8452";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Grouped bar chart as a standalone SVG document. Bar heights are linear in
/// the value with the largest value filling the plot; negative values are
/// drawn at zero height. Missing values get no bar and an "n/a" label.
pub fn render_bar_chart(groups: &[ChartGroup], title: &str) -> Result<String> {
    let values: Vec<f64> = groups
        .iter()
        .flat_map(|g| [g.vowel, g.consonant])
        .flatten()
        .filter(|v| v.is_finite())
        .collect();
    if values.is_empty() {
        return Err(ReportError::NoChartValues);
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { PLOT_HEIGHT / max } else { 0.0 };

    let width = MARGIN_LEFT * 2.0 + WIDTH_PER_GROUP * groups.len() as f64;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let baseline = MARGIN_TOP + PLOT_HEIGHT;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="black"/>"#,
        width - MARGIN_LEFT
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{baseline}" stroke="black"/>"#
    );
    for (i, g) in groups.iter().enumerate() {
        let x0 = MARGIN_LEFT + WIDTH_PER_GROUP * i as f64 + (WIDTH_PER_GROUP - 2.0 * BAR_WIDTH) / 2.0;
        for (j, (value, fill, class)) in [(g.vowel, VOWEL_FILL, "vowel"), (g.consonant, CONSONANT_FILL, "consonant")]
            .into_iter()
            .enumerate()
        {
            let x = x0 + BAR_WIDTH * j as f64;
            let cx = x + BAR_WIDTH / 2.0;
            match value.filter(|v| v.is_finite()) {
                Some(v) => {
                    let h = v.max(0.0) * scale;
                    let y = baseline - h;
                    let _ = writeln!(
                        svg,
                        r#"<rect class="{class}" x="{x}" y="{y}" width="{BAR_WIDTH}" height="{h}" fill="{fill}"/>"#
                    );
                    let _ = writeln!(
                        svg,
                        r#"<text x="{cx}" y="{}" text-anchor="middle" font-size="11">{v:.1}</text>"#,
                        y - 4.0
                    );
                }
                None => {
                    let _ = writeln!(
                        svg,
                        r#"<text x="{cx}" y="{}" text-anchor="middle" font-size="11">n/a</text>"#,
                        baseline - 4.0
                    );
                }
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            x0 + BAR_WIDTH,
            baseline + 20.0,
            escape(&g.label)
        );
    }
    let legend_y = height - 14.0;
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT}" y="{legend_y}" font-size="12" fill="{VOWEL_FILL}">vowel</text>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{legend_y}" font-size="12" fill="{CONSONANT_FILL}">consonant</text>"#,
        MARGIN_LEFT + 60.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_bar_chart(groups: &[ChartGroup], title: &str, out_path: &Path) -> Result<String> {
    let svg = render_bar_chart(groups, title)?;
    fs::write(out_path, &svg).map_err(|source| ReportError::Io {
        path: out_path.to_path_buf(),
        source,
    })?;
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(tag: &str, name: &str) -> f64 {
        let key = format!(" {name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    fn rects(svg: &str) -> Vec<&str> {
        svg.lines().filter(|l| l.starts_with("<rect")).collect()
    }

    fn group(label: &str, v: Option<f64>, c: Option<f64>) -> ChartGroup {
        ChartGroup {
            label: label.into(),
            vowel: v,
            consonant: c,
        }
    }

    #[test]
    fn heights_are_linear() {
        let svg = render_bar_chart(&[group("sysA", Some(2.0), Some(4.0))], "t").unwrap();
        let r = rects(&svg);
        assert_eq!(r.len(), 2);
        assert_eq!(attr(r[1], "height") / attr(r[0], "height"), 2.0);
    }

    #[test]
    fn seven_systems_fourteen_bars() {
        let groups: Vec<ChartGroup> = (0..7)
            .map(|i| group(&format!("s{i}"), Some(i as f64), Some(2.0 * i as f64 + 1.0)))
            .collect();
        let svg = render_bar_chart(&groups, "seven").unwrap();
        assert_eq!(svg.matches("<rect").count(), 14);
    }

    #[test]
    fn zero_value_bar() {
        let svg = render_bar_chart(&[group("z", Some(0.0), Some(3.0))], "t").unwrap();
        let r = rects(&svg);
        assert_eq!(attr(r[0], "height"), 0.0);
        assert!(svg.contains(">0.0</text>"));
        assert!(svg.contains(">3.0</text>"));
    }

    #[test]
    fn missing_values() {
        assert!(matches!(
            render_bar_chart(&[group("a", None, None)], "t"),
            Err(ReportError::NoChartValues)
        ));
        let svg = render_bar_chart(&[group("a", None, Some(1.0))], "t").unwrap();
        assert_eq!(rects(&svg).len(), 1);
        assert!(svg.contains(">n/a</text>"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_bar_chart(&[group("a<b&c", Some(1.0), Some(1.0))], "x\"y").unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("x&quot;y"));
    }
}
