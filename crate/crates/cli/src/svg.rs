//! Bare-bones SVG plots.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 480.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        for (lo, hi) in [(&mut f.x0, &mut f.x1), (&mut f.y0, &mut f.y1)] {
            if !lo.is_finite() || !hi.is_finite() {
                (*lo, *hi) = (0.0, 1.0);
            } else if *hi <= *lo {
                *lo -= 0.5;
                *hi += 0.5;
            }
        }
        f
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD);
        let py = H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD);
        (px, py)
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
}

fn label(out: &mut String, x: f64, y: f64, anchor: &str, text: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" font-size="11" font-family="sans-serif" text-anchor="{anchor}">{text}</text>"#
    );
}

/// Points drawn as dots in data coordinates.
pub fn scatter(points: &[(f64, f64)], title: &str) -> String {
    let frame = Frame::fit(points.iter().copied());
    let mut out = String::new();
    header(&mut out);
    for &(x, y) in points {
        let (px, py) = frame.map(x, y);
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="2" fill="{}"/>"#,
            COLORS[0]
        );
    }
    label(&mut out, W / 2.0, PAD / 2.0, "middle", title);
    out.push_str("</svg>\n");
    out
}

/// Polylines on log10-log10 axes. Nonpositive values are skipped.
pub fn loglog(series: &[(&str, Vec<(f64, f64)>)], xlabel: &str, title: &str) -> String {
    let logged: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(name, pts)| {
            let v = pts
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect();
            (*name, v)
        })
        .collect();
    let mut frame = Frame::fit(logged.iter().flat_map(|(_, v)| v.iter().copied()));
    frame.y0 = frame.y0.floor();
    frame.y1 = frame.y1.ceil();
    let mut out = String::new();
    header(&mut out);
    for e in frame.y0 as i32..=frame.y1 as i32 {
        let (_, py) = frame.map(frame.x0, e as f64);
        label(&mut out, PAD - 4.0, py + 4.0, "end", &format!("1e{e}"));
    }
    for x in [frame.x0, frame.x1] {
        let (px, _) = frame.map(x, frame.y0);
        label(
            &mut out,
            px,
            H - PAD + 14.0,
            "middle",
            &format!("{:.0}", 10f64.powf(x)),
        );
    }
    label(&mut out, W / 2.0, H - 10.0, "middle", xlabel);
    label(&mut out, W / 2.0, PAD / 2.0, "middle", title);
    for (i, (name, pts)) in logged.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (px, py) = frame.map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let (px, py) = frame.map(x, y);
            let _ = writeln!(
                out,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#
            );
        }
        label(
            &mut out,
            W - PAD - 6.0,
            PAD + 16.0 * (i + 1) as f64,
            "end",
            name,
        );
    }
    out.push_str("</svg>\n");
    out
}
