//! Self-contained SVG figures. Every renderer is a pure function of report
//! data and formats numbers with fixed precision, so output is byte-stable.

use std::fmt::Write;

use hemascreen_core::metrics::{roc_curve, EvalReport};
use hemascreen_core::models::Importance;
use hemascreen_core::stats::{BoxSummary, ScreenRow};

const POSITIVE: &str = "#d62728";
const NEGATIVE: &str = "#1f77b4";
const FOLD_COLORS: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Doc {
    body: String,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        let mut body = String::new();
        write!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        body.push('\n');
        write!(body, r#"<rect width="{width:.0}" height="{height:.0}" fill="white"/>"#).unwrap();
        body.push('\n');
        Doc { body }
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, s: &str) {
        writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size:.0}">{}</text>"#,
            escape(s)
        )
        .unwrap();
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        writeln!(self.body, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{extra}/>"#)
            .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        writeln!(self.body, r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"{extra}/>"#)
            .unwrap();
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Per-fold ROC curves with a legend of fold AUCs and the mean.
pub fn roc_plot(report: &EvalReport) -> String {
    let (w, h) = (560.0, 460.0);
    let (left, top, size) = (60.0, 40.0, 360.0);
    let mut d = Doc::new(w, h);
    let a = &report.aggregate.auc;
    d.text(
        left + size / 2.0,
        22.0,
        "middle",
        13.0,
        &format!("ROC, {} on {} (AUC {:.2} ± {:.2})", report.meta.model, report.meta.cohort, a.mean, a.sd),
    );
    d.rect(left, top, size, size, "none", r##" stroke="#333""##);
    d.line(left, top + size, left + size, top, "#999", r#" stroke-dasharray="4 3""#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let x = left + t * size;
        let y = top + size - t * size;
        d.line(x, top + size, x, top + size + 4.0, "#333", "");
        d.text(x, top + size + 16.0, "middle", 10.0, &format!("{t:.1}"));
        d.line(left - 4.0, y, left, y, "#333", "");
        d.text(left - 7.0, y + 3.5, "end", 10.0, &format!("{t:.1}"));
    }
    d.text(left + size / 2.0, top + size + 34.0, "middle", 11.0, "False positive rate");
    writeln!(
        d.body,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">True positive rate</text>"#,
        top + size / 2.0,
        top + size / 2.0
    )
    .unwrap();

    for (i, fold) in report.folds.iter().enumerate() {
        let color = FOLD_COLORS[i % FOLD_COLORS.len()];
        if let Ok(roc) = roc_curve(&fold.test_scores, &fold.test_labels) {
            let pts: Vec<String> = roc
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", left + p.fpr * size, top + size - p.tpr * size))
                .collect();
            writeln!(d.body, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "))
                .unwrap();
        }
        let ly = top + 6.0 + i as f64 * 15.0;
        if ly < h - 10.0 {
            d.line(left + size + 12.0, ly, left + size + 28.0, ly, color, r#" stroke-width="2""#);
            let name = if report.meta.repeats > 1 {
                format!("r{} f{} ({:.2})", fold.repeat + 1, fold.fold + 1, fold.auc)
            } else {
                format!("Fold {} ({:.2})", fold.fold + 1, fold.auc)
            };
            d.text(left + size + 32.0, ly + 4.0, "start", 10.0, &name);
        }
    }
    d.finish()
}

/// Row-normalized confusion matrix of the fold with the lowest AUC.
pub fn confusion_plot(report: &EvalReport) -> String {
    let mut d = Doc::new(380.0, 340.0);
    let Some(fold) = report.worst_fold() else { return d.finish() };
    let m = &fold.at_cutoff.normalized_confusion;
    let (left, top, cell) = (110.0, 60.0, 110.0);
    d.text(
        190.0,
        24.0,
        "middle",
        13.0,
        &format!("{} on {}: fold {} (lowest AUC, {:.2})", report.meta.model, report.meta.cohort, fold.fold + 1, fold.auc),
    );
    let classes = ["Negative", "Positive"];
    for (r, row) in m.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            // white to dark blue
            let shade = (255.0 - v.clamp(0.0, 1.0) * 200.0).round() as u8;
            let fill = format!("#{shade:02x}{shade:02x}ff");
            let (x, y) = (left + c as f64 * cell, top + r as f64 * cell);
            d.rect(x, y, cell, cell, &fill, r##" stroke="#333""##);
            d.text(x + cell / 2.0, y + cell / 2.0 + 5.0, "middle", 16.0, &format!("{v:.2}"));
        }
        d.text(left - 8.0, top + r as f64 * cell + cell / 2.0 + 4.0, "end", 11.0, classes[r]);
        d.text(left + r as f64 * cell + cell / 2.0, top + 2.0 * cell + 18.0, "middle", 11.0, classes[r]);
    }
    d.text(left + cell, top + 2.0 * cell + 36.0, "middle", 11.0, "Predicted label");
    d.text(left - 8.0, top - 10.0, "end", 11.0, "True label");
    d.finish()
}

/// Horizontal bars, largest first.
pub fn importance_plot(title: &str, importance: &[Importance]) -> String {
    let row = 22.0;
    let (left, top, span) = (110.0, 40.0, 360.0);
    let h = top + importance.len() as f64 * row + 40.0;
    let mut d = Doc::new(520.0, h);
    d.text(260.0, 22.0, "middle", 13.0, title);
    for (i, imp) in importance.iter().enumerate() {
        let y = top + i as f64 * row;
        d.text(left - 8.0, y + row / 2.0 + 4.0, "end", 11.0, imp.feature.name());
        d.rect(left, y + 3.0, imp.importance / 100.0 * span, row - 6.0, "#4c72b0", "");
        d.text(left + imp.importance / 100.0 * span + 4.0, y + row / 2.0 + 4.0, "start", 10.0, &format!("{:.1}", imp.importance));
    }
    let base = top + importance.len() as f64 * row;
    d.line(left, top, left, base, "#333", "");
    for t in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let x = left + t / 100.0 * span;
        d.line(x, base, x, base + 4.0, "#333", "");
        d.text(x, base + 16.0, "middle", 10.0, &format!("{t:.0}"));
    }
    d.finish()
}

fn draw_box(d: &mut Doc, b: &BoxSummary, cx: f64, half: f64, y: &dyn Fn(f64) -> f64, color: &str) {
    d.line(cx, y(b.whisker_low), cx, y(b.q1), color, "");
    d.line(cx, y(b.q3), cx, y(b.whisker_high), color, "");
    d.line(cx - half / 2.0, y(b.whisker_low), cx + half / 2.0, y(b.whisker_low), color, "");
    d.line(cx - half / 2.0, y(b.whisker_high), cx + half / 2.0, y(b.whisker_high), color, "");
    let extra = format!(r#" stroke="{color}" fill-opacity="0.25""#);
    d.rect(cx - half, y(b.q3), 2.0 * half, (y(b.q1) - y(b.q3)).max(0.5), color, &extra);
    d.line(cx - half, y(b.median), cx + half, y(b.median), color, r#" stroke-width="2""#);
    for &o in &b.outliers {
        writeln!(d.body, r#"<circle cx="{cx:.2}" cy="{:.2}" r="1.8" fill="none" stroke="{color}"/>"#, y(o)).unwrap();
    }
}

/// Grid of positive (red) vs negative (blue) box plots: one row per group,
/// one panel per variable, p-value under each panel.
pub fn boxplot_grid(title: &str, groups: &[(String, Vec<&ScreenRow>)]) -> String {
    let (pw, ph) = (120.0, 170.0);
    let cols = groups.iter().map(|(_, r)| r.len()).max().unwrap_or(0).max(1);
    let (left, top) = (90.0, 50.0);
    let w = left + cols as f64 * pw + 20.0;
    let h = top + groups.len() as f64 * (ph + 40.0) + 30.0;
    let mut d = Doc::new(w, h);
    d.text(w / 2.0, 22.0, "middle", 14.0, title);
    let lx = w - 200.0;
    d.rect(lx, 30.0, 10.0, 10.0, POSITIVE, "");
    d.text(lx + 14.0, 39.0, "start", 10.0, "positive");
    d.rect(lx + 80.0, 30.0, 10.0, 10.0, NEGATIVE, "");
    d.text(lx + 94.0, 39.0, "start", 10.0, "negative");

    for (g, (name, rows)) in groups.iter().enumerate() {
        let gy = top + g as f64 * (ph + 40.0);
        d.text(left - 10.0, gy + ph / 2.0, "end", 12.0, name);
        for (i, row) in rows.iter().enumerate() {
            let px = left + i as f64 * pw;
            let all = [&row.positive, &row.negative];
            let lo = all.iter().flat_map(|b| b.outliers.iter().copied().chain([b.whisker_low])).fold(f64::INFINITY, f64::min);
            let hi =
                all.iter().flat_map(|b| b.outliers.iter().copied().chain([b.whisker_high])).fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            let (y0, y1) = (gy + 18.0, gy + ph - 8.0);
            let y = move |v: f64| y1 - (v - lo) / span * (y1 - y0);
            d.rect(px + 4.0, gy, pw - 8.0, ph, "none", r##" stroke="#ccc""##);
            d.text(px + pw / 2.0, gy + 12.0, "middle", 10.0, &row.variable);
            draw_box(&mut d, &row.positive, px + pw * 0.33, 14.0, &y, POSITIVE);
            draw_box(&mut d, &row.negative, px + pw * 0.67, 14.0, &y, NEGATIVE);
            let star = if row.p_value < 0.05 { " *" } else { "" };
            d.text(px + pw / 2.0, gy + ph + 14.0, "middle", 10.0, &format!("p = {}{star}", format_p(row.p_value)));
        }
    }
    d.finish()
}

fn format_p(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.1e}")
    } else {
        format!("{p:.3}")
    }
}
