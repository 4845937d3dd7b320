//! SVG lattice plots of an observed distribution against its prediction.
//!
//! Every state gets a gray marker. Yellow discs have area proportional to
//! the observed density; red (blue) discs show positive (negative) residuals
//! `ρ_ij - E_ij`, magnified five times. A red star marks the mean. Numbers
//! label the observed counts. All coordinates are printed with fixed
//! precision, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::SessionIoError;
use crate::lattice::{self, LatticeDistribution, MeanObservation};
use crate::maxent::MaxentPrediction;

/// Area magnification of the residual discs relative to the observed ones.
pub const RESIDUAL_MAGNIFICATION: f64 = 5.0;

const SPACING: f64 = 80.0;
const MARGIN: f64 = 60.0;
/// Disc area (px²) of a unit density.
const UNIT_AREA: f64 = 2.5 * SPACING * SPACING;
const RESIDUAL_FLOOR: f64 = 1e-12;

fn radius(density: f64) -> f64 {
    (density.abs() * UNIT_AREA / std::f64::consts::PI).sqrt()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn star(cx: f64, cy: f64, outer: f64) -> String {
    let inner = outer * 0.45;
    (0..10)
        .map(|k| {
            let r = if k % 2 == 0 { outer } else { inner };
            let angle = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 5.0;
            format!("{:.2},{:.2}", cx + r * angle.cos(), cy + r * angle.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// The SVG document as a string. `title`, if given, is drawn above the plot.
pub fn lattice_svg(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    mean: MeanObservation,
    title: Option<&str>,
) -> String {
    let n = observed.n();
    let side = 2.0 * MARGIN + n as f64 * SPACING;
    let x_of = |i: f64| MARGIN + i * SPACING;
    let y_of = |j: f64| MARGIN + (n as f64 - j) * SPACING;

    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{side:.0}" height="{side:.0}" viewBox="0 0 {side:.0} {side:.0}">"##
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{side:.0}" height="{side:.0}" fill="white"/>"##
    );
    if let Some(t) = title {
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"##,
            side / 2.0,
            escape(t)
        );
    }

    let _ = writeln!(
        s,
        r##"<g class="axes" font-family="sans-serif" font-size="11" fill="#444">"##
    );
    for k in 0..=n {
        let v = k as f64;
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{k}/{n}</text>"##,
            x_of(v),
            side - MARGIN / 3.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{k}/{n}</text>"##,
            MARGIN / 2.0,
            y_of(v) + 4.0
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<g class="observed" fill="#f2c500" fill-opacity="0.8">"##
    );
    for (i, j) in lattice::cells(n) {
        let rho = observed.density(i, j);
        if rho > 0.0 {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{:.3}"/>"##,
                x_of(i as f64),
                y_of(j as f64),
                radius(rho)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g class="residuals" fill-opacity="0.6">"##);
    for (i, j) in lattice::cells(n) {
        let r = observed.density(i, j) - predicted.density(i, j);
        if r.abs() < RESIDUAL_FLOOR {
            continue;
        }
        let (class, colour) = if r > 0.0 {
            ("residual-pos", "#d62728")
        } else {
            ("residual-neg", "#1f5bd6")
        };
        let _ = writeln!(
            s,
            r##"<circle class="{class}" fill="{colour}" cx="{:.2}" cy="{:.2}" r="{:.3}"/>"##,
            x_of(i as f64),
            y_of(j as f64),
            radius(RESIDUAL_MAGNIFICATION * r)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g class="states" fill="#888">"##);
    for (i, j) in lattice::cells(n) {
        let _ = writeln!(
            s,
            r##"<circle class="state" cx="{:.2}" cy="{:.2}" r="2.5"/>"##,
            x_of(i as f64),
            y_of(j as f64)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<g class="counts" font-family="sans-serif" font-size="10" fill="black">"##
    );
    for (i, j) in lattice::cells(n) {
        let count = observed.count(i, j);
        if count > 0 {
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}">{count}</text>"##,
                x_of(i as f64) + 5.0,
                y_of(j as f64) - 5.0
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let (mx, my) = (x_of(mean.o_p * n as f64), y_of(mean.o_q * n as f64));
    let _ = writeln!(
        s,
        r##"<polygon class="mean" fill="#e00000" stroke="black" stroke-width="0.5" points="{}"/>"##,
        star(mx, my, 9.0)
    );
    s.push_str("</svg>\n");
    s
}

pub fn render_lattice_svg(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    mean: MeanObservation,
    path: impl AsRef<Path>,
) -> Result<(), SessionIoError> {
    let path = path.as_ref();
    std::fs::write(path, lattice_svg(observed, predicted, mean, None))
        .map_err(|e| SessionIoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{degeneracy, mean_observation, LatticeDistribution};
    use crate::maxent::binomial_prediction;

    fn uniform_microstates() -> LatticeDistribution {
        LatticeDistribution::from_counts(
            4,
            lattice::cells(4).map(|(i, j)| ((i, j), degeneracy(4, i, j).unwrap() as u64)),
        )
        .unwrap()
    }

    #[test]
    fn exact_fit_has_no_residual_discs() {
        let observed = uniform_microstates();
        let mean = mean_observation(&observed);
        let svg = lattice_svg(&observed, &binomial_prediction(mean, 4), mean, None);
        assert!(!svg.contains("residual-pos") && !svg.contains("residual-neg"));
        assert_eq!(svg.matches(r##"class="state""##).count(), 25);
    }

    #[test]
    fn residual_discs_are_magnified() {
        let observed = LatticeDistribution::from_counts(4, [((2, 2), 3), ((1, 1), 1)]).unwrap();
        let mean = mean_observation(&observed);
        let pred = binomial_prediction(mean, 4);
        let svg = lattice_svg(&observed, &pred, mean, Some("3-1 <Z>"));
        let r = observed.density(2, 2) - pred.density(2, 2);
        let expected = format!(
            r##"r="{:.3}""##,
            (5.0 * r * UNIT_AREA / std::f64::consts::PI).sqrt()
        );
        assert!(svg.contains(&expected), "{expected} not in output");
        assert!(svg.contains("3-1 &lt;Z&gt;"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn marker_count_scales_with_population() {
        let observed = LatticeDistribution::from_counts(6, [((3, 3), 10)]).unwrap();
        let mean = mean_observation(&observed);
        let svg = lattice_svg(&observed, &binomial_prediction(mean, 6), mean, None);
        assert_eq!(svg.matches(r##"class="state""##).count(), 49);
    }

    #[test]
    fn writes_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let observed = uniform_microstates();
        let mean = mean_observation(&observed);
        let pred = binomial_prediction(mean, 4);
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        render_lattice_svg(&observed, &pred, mean, &a).unwrap();
        render_lattice_svg(&observed, &pred, mean, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
