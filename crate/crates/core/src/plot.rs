//! Phase-plane output: a self-contained SVG polyline with axes, or a
//! two-column CSV for external plotting.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, read_trajectory};
use crate::state::StateVec;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
/// Polylines longer than this are thinned to keep files small.
const MAX_POINTS: usize = 20_000;

/// Coordinate pair `(i, j)` with `1 <= i, j <= 3`.
pub fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::config("--pair", format!("expected `i,j` with i, j in 1..=3 and i != j, found `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i == j {
        return Err(bad());
    }
    Ok((i, j))
}

fn padded_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

fn label(v: f64) -> String {
    format!("{v:.4e}")
}

/// SVG of `x_i` (horizontal) against `x_j` (vertical).
pub fn phase_svg(states: &[StateVec], pair: (usize, usize)) -> Result<String> {
    let (i, j) = (pair.0 - 1, pair.1 - 1);
    if states.is_empty() {
        return Err(Error::domain("no states to plot"));
    }
    if states.iter().any(|x| !x[i].is_finite() || !x[j].is_finite()) {
        return Err(Error::NonFinite("plotted coordinates"));
    }
    let (xlo, xhi) = padded_range(states.iter().map(|x| x[i]));
    let (ylo, yhi) = padded_range(states.iter().map(|x| x[j]));
    let sx = |v: f64| MARGIN + (v - xlo) / (xhi - xlo) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - ylo) / (yhi - ylo) * (HEIGHT - 2.0 * MARGIN);
    let stride = states.len().div_ceil(MAX_POINTS).max(1);
    let degenerate = states.iter().all(|x| x[i] == states[0][i] && x[j] == states[0][j]);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    let _ = writeln!(s, r#"<text x="{l}" y="{}" text-anchor="start">{}</text>"#, b + 16.0, label(xlo));
    let _ = writeln!(s, r#"<text x="{r}" y="{}" text-anchor="end">{}</text>"#, b + 16.0, label(xhi));
    let _ = writeln!(s, r#"<text x="{}" y="{b}" text-anchor="end">{}</text>"#, l - 4.0, label(ylo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, t + 4.0, label(yhi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">x{}</text>"#, (l + r) / 2.0, b + 36.0, pair.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">x{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        pair.1
    );
    let _ = writeln!(s, "</g>");
    if degenerate {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="steelblue"/>"#,
            sx(states[0][i]),
            sy(states[0][j])
        );
    } else {
        s.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points=""#);
        let last = states.len() - 1;
        for (k, x) in states.iter().enumerate() {
            if k % stride == 0 || k == last {
                let _ = write!(s, "{:.3},{:.3} ", sx(x[i]), sy(x[j]));
            }
        }
        s.push_str("\"/>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Two-column CSV `x_i,x_j`.
pub fn phase_csv(states: &[StateVec], pair: (usize, usize)) -> String {
    let (i, j) = (pair.0 - 1, pair.1 - 1);
    let mut s = format!("x{},x{}\n", pair.0, pair.1);
    for x in states {
        let _ = writeln!(s, "{},{}", fmt_f64(x[i]), fmt_f64(x[j]));
    }
    s
}

/// Reads a trajectory file and renders the requested projection.
pub fn emit_plot_data(path: &Path, pair: (usize, usize), svg: bool) -> Result<String> {
    if !(1..=3).contains(&pair.0) || !(1..=3).contains(&pair.1) || pair.0 == pair.1 {
        return Err(Error::config("--pair", format!("invalid pair {pair:?}")));
    }
    let table = read_trajectory(path)?;
    if svg {
        phase_svg(&table.states, pair)
    } else {
        Ok(phase_csv(&table.states, pair))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("2,3").unwrap(), (2, 3));
        assert_eq!(parse_pair(" 1 , 3 ").unwrap(), (1, 3));
        for bad in ["1", "0,2", "2,2", "1,4", "a,b"] {
            assert!(parse_pair(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn svg_has_polyline_and_axes() {
        let states: Vec<_> = (0..100)
            .map(|k| {
                let t = k as f64 * 0.1;
                StateVec::new(0.0, t.cos(), t.sin())
            })
            .collect();
        let svg = phase_svg(&states, (2, 3)).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline") && svg.contains("<line"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn constant_trajectory_is_a_marker() {
        let states = vec![StateVec::new(1.0, 0.0, 0.0); 10];
        let svg = phase_svg(&states, (1, 2)).unwrap();
        assert!(svg.contains("<circle") && !svg.contains("<polyline"));
    }

    #[test]
    fn csv_projection() {
        let states = vec![StateVec::new(1.0, 2.0, 3.0)];
        assert_eq!(phase_csv(&states, (3, 1)), "x3,x1\n3.0000000000000000e0,1.0000000000000000e0\n");
    }
}
