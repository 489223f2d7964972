//! Static SVG figures of the belief simplex: a segment for two states, an
//! equilateral triangle for three.

use std::fmt::Write;

use nonbayes_core::Hyperplane;

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 40.0;

pub struct Marker {
    pub label: String,
    pub belief: Vec<f64>,
}

pub struct Figure {
    pub states: usize,
    pub prior: Vec<f64>,
    pub bayes: Vec<Marker>,
    pub distorted: Vec<Marker>,
    pub hyperplanes: Vec<(String, Hyperplane)>,
}

fn vertices(n: usize) -> Vec<(f64, f64)> {
    let side = WIDTH - 2.0 * MARGIN;
    match n {
        2 => vec![(MARGIN, HEIGHT / 2.0), (WIDTH - MARGIN, HEIGHT / 2.0)],
        3 => {
            let base = HEIGHT - MARGIN;
            vec![
                (MARGIN, base),
                (WIDTH - MARGIN, base),
                (WIDTH / 2.0, base - side * 3f64.sqrt() / 2.0),
            ]
        }
        _ => panic!("only two or three states are drawable"),
    }
}

/// Barycentric-to-planar map.
fn planar(v: &[(f64, f64)], x: &[f64]) -> (f64, f64) {
    v.iter()
        .zip(x)
        .fold((0.0, 0.0), |(a, b), ((px, py), w)| (a + w * px, b + w * py))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Endpoints of `{x : α·x = β}` inside the simplex, if it crosses it.
fn chord(h: &Hyperplane, n: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (ai, aj) = (h.alpha[i], h.alpha[j]);
            if (aj - ai).abs() < 1e-15 {
                continue;
            }
            let t = (h.beta - ai) / (aj - ai);
            if (-1e-12..=1.0 + 1e-12).contains(&t) {
                let mut x = vec![0.0; n];
                x[i] = 1.0 - t;
                x[j] = t;
                // a chord through a vertex meets two edges there
                if !pts.iter().any(|p| p.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12)) {
                    pts.push(x);
                }
            }
        }
    }
    pts
}

pub fn render(fig: &Figure) -> String {
    let v = vertices(fig.states);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>"#
    );
    let outline: Vec<String> = v.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        s,
        r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        outline.join(" ")
    );
    for (i, (x, y)) in v.iter().enumerate() {
        let dy = if fig.states == 3 && i == 2 { -8.0 } else { 18.0 };
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">state {i}</text>"#, y + dy);
    }
    for (label, h) in &fig.hyperplanes {
        let pts = chord(h, fig.states);
        let (Some(a), Some(b)) = (pts.first(), pts.last()) else {
            continue;
        };
        let (x1, y1) = planar(&v, a);
        let (x2, y2) = planar(&v, b);
        if fig.states == 2 {
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="crimson" stroke-width="1"><title>{}</title></line>"#,
                y1 - 30.0,
                y1 + 30.0,
                escape(label)
            );
        } else {
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="crimson" stroke-width="1"><title>{}</title></line>"#,
                escape(label)
            );
        }
    }
    let mut dot = |x: &[f64], fill: &str, r: f64, label: &str| {
        let (px, py) = planar(&v, x);
        let _ = writeln!(
            s,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r}" fill="{fill}"><title>{}</title></circle>"#,
            escape(label)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="{fill}">{}</text>"#, px + 6.0, py - 6.0, escape(label));
    };
    dot(&fig.prior, "black", 4.0, "μ");
    for m in &fig.bayes {
        dot(&m.belief, "royalblue", 4.0, &m.label);
    }
    for m in &fig.distorted {
        dot(&m.belief, "darkorange", 3.0, &m.label);
    }
    s.push_str("</svg>\n");
    s
}
