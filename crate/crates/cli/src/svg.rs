//! Minimal self-contained SVG plots. Everything is inline — no external
//! CSS, fonts, or scripts — so the files render anywhere and diff cleanly.

use rydtc_core::observables::Spectrum;
use rydtc_core::sweep::{PhaseCell, PhaseClass};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 460.0;
/// Blue marks the period-doubled sign (−1), yellow the reverted sign (+1).
const Q_MINUS: &str = "#2166ac";
const Q_PLUS: &str = "#f6c915";

fn header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
            "<text x=\"20\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{t}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        t = escape(title),
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn lerp(value: f64, lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> f64 {
    if hi == lo {
        return 0.5 * (px_lo + px_hi);
    }
    px_lo + (value - lo) / (hi - lo) * (px_hi - px_lo)
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>\n",
        coords.join(" ")
    )
}

fn axis_labels(x_label: &str, y_label: &str) -> String {
    format!(
        concat!(
            "<text x=\"440\" y=\"450\" font-family=\"monospace\" font-size=\"12\" ",
            "text-anchor=\"middle\">{x}</text>\n",
            "<text x=\"16\" y=\"200\" font-family=\"monospace\" font-size=\"12\" ",
            "transform=\"rotate(-90 16 200)\" text-anchor=\"middle\">{y}</text>\n"
        ),
        x = escape(x_label),
        y = escape(y_label),
    )
}

/// Imbalance trace over cycles with the order-parameter strip underneath.
/// `p[n]` is the imbalance after n cycles (so `p[0]` is the initial state);
/// `q` holds one sign per completed cycle.
pub fn trajectory(p: &[f64], q: &[i8], title: &str) -> String {
    let (x0, x1) = (60.0, 850.0);
    let (y0, y1) = (40.0, 330.0); // P ∈ [+1.1, −1.1] maps top→bottom
    let n = q.len();
    let mut out = header(title);

    // Frame and the P = 0 guide line.
    out.push_str(&format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
        x1 - x0,
        y1 - y0
    ));
    let y_mid = lerp(0.0, 1.1, -1.1, y0, y1);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y_mid:.2}\" x2=\"{x1}\" y2=\"{y_mid:.2}\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>\n"
    ));
    for (value, label) in [(1.0, "1"), (0.0, "0"), (-1.0, "-1")] {
        let y = lerp(value, 1.1, -1.1, y0, y1);
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{label}</text>\n",
            x0 - 6.0,
            y + 4.0
        ));
    }

    // P(n) from the initial state onwards.
    let pts: Vec<(f64, f64)> = p
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            (
                lerp(i as f64, 0.0, n as f64, x0, x1),
                lerp(value, 1.1, -1.1, y0, y1),
            )
        })
        .collect();
    out.push_str(&polyline(&pts, "#b2182b"));

    // Order-parameter strip: one cell per cycle.
    let (strip_y, strip_h) = (350.0, 28.0);
    let cell_w = (x1 - x0) / n.max(1) as f64;
    for (i, &sign) in q.iter().enumerate() {
        let color = if sign < 0 { Q_MINUS } else { Q_PLUS };
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{strip_y}\" width=\"{:.2}\" height=\"{strip_h}\" fill=\"{color}\"/>\n",
            x0 + cell_w * i as f64,
            cell_w + 0.5, // slight overlap hides hairline gaps between cells
        ));
    }
    out.push_str(&format!(
        "<text x=\"{x0}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">Q(n):  blue = -1, yellow = +1</text>\n",
        strip_y + strip_h + 14.0
    ));

    // Cycle-number ticks at both ends.
    out.push_str(&format!(
        "<text x=\"{x0}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">0</text>\n",
        y1 + 14.0
    ));
    out.push_str(&format!(
        "<text x=\"{x1}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{n}</text>\n",
        y1 + 14.0
    ));
    out.push_str(&axis_labels("cycle n", "P(n)"));
    out.push_str("</svg>\n");
    out
}

/// Magnitude spectrum with the strongest bins annotated.
pub fn spectrum(spec: &Spectrum, title: &str) -> String {
    let (x0, x1) = (60.0, 850.0);
    let (y0, y1) = (40.0, 400.0);
    let max_mag = spec.magnitude.iter().cloned().fold(1e-300, f64::max);
    let mut out = header(title);
    out.push_str(&format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
        x1 - x0,
        y1 - y0
    ));

    let pts: Vec<(f64, f64)> = spec
        .nu
        .iter()
        .zip(&spec.magnitude)
        .map(|(&nu, &mag)| {
            (
                lerp(nu, 0.0, 1.0, x0, x1),
                lerp(mag, 0.0, max_mag * 1.05, y1, y0),
            )
        })
        .collect();
    out.push_str(&polyline(&pts, "#2166ac"));

    for (rank, (nu, mag)) in spec.top_peaks(3).into_iter().enumerate() {
        let x = lerp(nu, 0.0, 1.0, x0, x1);
        let y = lerp(mag, 0.0, max_mag * 1.05, y1, y0);
        out.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#b2182b\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">#{} nu={nu:.4} |S|={mag:.4}</text>\n",
            x + 6.0,
            y - 4.0 + 14.0 * rank as f64,
            rank + 1,
        ));
    }

    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = lerp(tick, 0.0, 1.0, x0, x1);
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{tick}</text>\n",
            y1 + 14.0
        ));
    }
    out.push_str(&axis_labels("frequency nu (cycles^-1)", "|S(nu)|"));
    out.push_str("</svg>\n");
    out
}

fn class_color(class: PhaseClass) -> &'static str {
    match class {
        PhaseClass::Growing => "#1a9850",
        PhaseClass::Flat => "#bdbdbd",
        PhaseClass::Shrinking => "#d73027",
    }
}

/// Heatmap of δn_c classes over the (ε, L) grid. Censored cells are drawn
/// translucent because their δn_c saturated at the cycle budget.
pub fn phase(cells: &[PhaseCell], title: &str) -> String {
    let mut eps_values: Vec<f64> = cells.iter().map(|c| c.epsilon).collect();
    eps_values.sort_by(f64::total_cmp);
    eps_values.dedup();
    let mut l_values: Vec<usize> = cells.iter().map(|c| c.l).collect();
    l_values.sort_unstable();
    l_values.dedup();

    let (x0, x1) = (60.0, 850.0);
    let (y0, y1) = (40.0, 380.0);
    let cell_w = (x1 - x0) / eps_values.len().max(1) as f64;
    let cell_h = (y1 - y0) / l_values.len().max(1) as f64;

    let mut out = header(title);
    for cell in cells {
        let col = eps_values
            .iter()
            .position(|&e| e == cell.epsilon)
            .unwrap_or(0);
        // Smallest L on the bottom row, as on a physical axis.
        let row = l_values.iter().position(|&l| l == cell.l).unwrap_or(0);
        let x = x0 + cell_w * col as f64;
        let y = y1 - cell_h * (row + 1) as f64;
        let opacity = if cell.censored { "0.45" } else { "1" };
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" fill=\"{}\" fill-opacity=\"{opacity}\"/>\n",
            class_color(cell.class),
        ));
    }

    out.push_str(&format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
        x1 - x0,
        y1 - y0
    ));
    for (i, l) in l_values.iter().enumerate() {
        let y = y1 - cell_h * (i as f64 + 0.5);
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{l}</text>\n",
            x0 - 6.0,
            y + 4.0
        ));
    }
    if let (Some(first), Some(last)) = (eps_values.first(), eps_values.last()) {
        out.push_str(&format!(
            "<text x=\"{x0}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{first}</text>\n",
            y1 + 14.0
        ));
        out.push_str(&format!(
            "<text x=\"{x1}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{last}</text>\n",
            y1 + 14.0
        ));
    }
    out.push_str(&format!(
        concat!(
            "<text x=\"{x}\" y=\"420\" font-family=\"monospace\" font-size=\"11\">",
            "green = growing, gray = flat, red = shrinking; translucent = censored at budget",
            "</text>\n"
        ),
        x = x0
    ));
    out.push_str(&axis_labels("epsilon (rad/us)", "L"));
    out.push_str("</svg>\n");
    out
}
