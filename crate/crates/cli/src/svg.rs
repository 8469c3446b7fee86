//! Static SVG rendering for 1-D model curves: mean line, shaded confidence
//! band, and scatter layers for training, low-fidelity, and test points.
//! Output is a pure function of the inputs, so identical runs produce
//! byte-identical files.

pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub train: Vec<(f64, f64)>,
    pub lf: Vec<(f64, f64)>,
    pub test: Vec<(f64, f64)>,
    pub band_label: String,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;

const MEAN_COLOR: &str = "#ff7f0e";
const BAND_COLOR: &str = "#ffbb78";
const TRAIN_COLOR: &str = "#1f77b4";
const LF_COLOR: &str = "#2ca02c";
const TEST_COLOR: &str = "#d62728";

struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn from_values<'a>(values: impl Iterator<Item = &'a f64>) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            min = 0.0;
            max = 1.0;
        }
        if min == max {
            min -= 0.5;
            max += 0.5;
        }
        let pad = 0.05 * (max - min);
        Axis {
            min: min - pad,
            max: max + pad,
        }
    }
}

/// Tick positions at "nice" multiples of 1, 2, or 5 times a power of ten.
fn ticks(axis: &Axis, target: usize) -> (Vec<f64>, usize) {
    let raw_step = (axis.max - axis.min) / target as f64;
    let mag = 10f64.powf(raw_step.abs().log10().floor());
    let norm = raw_step / mag;
    let factor = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    let step = factor * mag;
    let first = (axis.min / step).ceil() as i64;
    let last = (axis.max / step).floor() as i64;
    let ticks: Vec<f64> = (first..=last).map(|k| k as f64 * step).collect();
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor() as i32).clamp(0, 9) as usize
    };
    (ticks, decimals)
}

fn fmt_tick(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Render the chart. Panics never; degenerate inputs produce an empty frame.
pub fn render(spec: &PlotSpec) -> String {
    let xs = spec
        .grid
        .iter()
        .chain(spec.train.iter().map(|p| &p.0))
        .chain(spec.lf.iter().map(|p| &p.0))
        .chain(spec.test.iter().map(|p| &p.0));
    let x_axis = Axis::from_values(xs);
    let ys = spec
        .mean
        .iter()
        .chain(spec.lower.iter())
        .chain(spec.upper.iter())
        .chain(spec.train.iter().map(|p| &p.1))
        .chain(spec.lf.iter().map(|p| &p.1))
        .chain(spec.test.iter().map(|p| &p.1));
    let y_axis = Axis::from_values(ys);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_axis.min) / (x_axis.max - x_axis.min) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_axis.max - y) / (y_axis.max - y_axis.min) * plot_h;

    let mut s = String::with_capacity(16 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // grid lines and tick labels
    let (xticks, xdec) = ticks(&x_axis, 6);
    let (yticks, ydec) = ticks(&y_axis, 6);
    for &t in &xticks {
        let x = px(t);
        s.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{top:.2}\" x2=\"{x:.2}\" y2=\"{bot:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            top = MARGIN_TOP,
            bot = MARGIN_TOP + plot_h
        ));
        s.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" fill=\"#333333\">{label}</text>\n",
            y = MARGIN_TOP + plot_h + 18.0,
            label = fmt_tick(t, xdec)
        ));
    }
    for &t in &yticks {
        let y = py(t);
        s.push_str(&format!(
            "<line x1=\"{left:.2}\" y1=\"{y:.2}\" x2=\"{right:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            left = MARGIN_LEFT,
            right = MARGIN_LEFT + plot_w
        ));
        s.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{yy:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\" fill=\"#333333\">{label}</text>\n",
            x = MARGIN_LEFT - 8.0,
            yy = y + 4.0,
            label = fmt_tick(t, ydec)
        ));
    }

    // confidence band as a closed polygon: upper edge forward, lower edge back
    if !spec.grid.is_empty() {
        let mut d = String::new();
        for (i, (&x, &u)) in spec.grid.iter().zip(&spec.upper).enumerate() {
            d.push_str(if i == 0 { "M" } else { "L" });
            d.push_str(&format!("{:.2},{:.2} ", px(x), py(u)));
        }
        for (&x, &l) in spec.grid.iter().zip(&spec.lower).rev() {
            d.push_str(&format!("L{:.2},{:.2} ", px(x), py(l)));
        }
        d.push('Z');
        s.push_str(&format!(
            "<path d=\"{d}\" fill=\"{BAND_COLOR}\" fill-opacity=\"0.45\" stroke=\"none\"/>\n"
        ));

        let mut line = String::new();
        for (i, (&x, &m)) in spec.grid.iter().zip(&spec.mean).enumerate() {
            line.push_str(if i == 0 { "M" } else { "L" });
            line.push_str(&format!("{:.2},{:.2} ", px(x), py(m)));
        }
        s.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{MEAN_COLOR}\" stroke-width=\"2\"/>\n",
            line.trim_end()
        ));
    }

    for &(x, y) in &spec.lf {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{LF_COLOR}\"/>\n",
            px(x),
            py(y)
        ));
    }
    for &(x, y) in &spec.train {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{TRAIN_COLOR}\"/>\n",
            px(x),
            py(y)
        ));
    }
    for &(x, y) in &spec.test {
        let (cx, cy) = (px(x), py(y));
        s.push_str(&format!(
            "<path d=\"M{a:.2},{b:.2} L{c:.2},{d:.2} M{a:.2},{d:.2} L{c:.2},{b:.2}\" \
             stroke=\"{TEST_COLOR}\" stroke-width=\"2\"/>\n",
            a = cx - 4.0,
            b = cy - 4.0,
            c = cx + 4.0,
            d = cy + 4.0
        ));
    }

    // frame
    s.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
    ));

    // title and axis labels
    s.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\" fill=\"#111111\">{t}</text>\n",
        x = WIDTH / 2.0,
        t = escape(&spec.title)
    ));
    s.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#111111\">{t}</text>\n",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 14.0,
        t = escape(&spec.x_label)
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#111111\" transform=\"rotate(-90 18 {y:.2})\">{t}</text>\n",
        y = MARGIN_TOP + plot_h / 2.0,
        t = escape(&spec.y_label)
    ));

    // legend
    let mut items: Vec<(String, &str, &str)> = Vec::new();
    if !spec.grid.is_empty() {
        items.push(("mean".to_string(), MEAN_COLOR, "line"));
        items.push((spec.band_label.clone(), BAND_COLOR, "box"));
    }
    if !spec.train.is_empty() {
        items.push(("training".to_string(), TRAIN_COLOR, "dot"));
    }
    if !spec.lf.is_empty() {
        items.push(("low fidelity".to_string(), LF_COLOR, "dot"));
    }
    if !spec.test.is_empty() {
        items.push(("test".to_string(), TEST_COLOR, "cross"));
    }
    let lx = MARGIN_LEFT + 12.0;
    for (i, (label, color, kind)) in items.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + i as f64 * 18.0;
        match *kind {
            "line" => s.push_str(&format!(
                "<line x1=\"{lx}\" y1=\"{y:.2}\" x2=\"{x2}\" y2=\"{y:.2}\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n",
                x2 = lx + 22.0
            )),
            "box" => s.push_str(&format!(
                "<rect x=\"{lx}\" y=\"{yy:.2}\" width=\"22\" height=\"10\" fill=\"{color}\" \
                 fill-opacity=\"0.45\"/>\n",
                yy = y - 6.0
            )),
            "dot" => s.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{y:.2}\" r=\"4\" fill=\"{color}\"/>\n",
                cx = lx + 11.0
            )),
            _ => s.push_str(&format!(
                "<path d=\"M{a},{b:.2} L{c},{d:.2} M{a},{d:.2} L{c},{b:.2}\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n",
                a = lx + 7.0,
                b = y - 4.0,
                c = lx + 15.0,
                d = y + 4.0
            )),
        }
        s.push_str(&format!(
            "<text x=\"{tx}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#333333\">{label}</text>\n",
            tx = lx + 30.0,
            ty = y + 4.0,
            label = escape(label)
        ));
    }

    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_spec() -> PlotSpec {
        PlotSpec {
            title: "demo".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            grid: vec![0.0, 0.5, 1.0],
            mean: vec![1.0, 2.0, 1.5],
            lower: vec![0.5, 1.5, 1.0],
            upper: vec![1.5, 2.5, 2.0],
            train: vec![(0.0, 1.0)],
            lf: vec![(0.25, 1.2)],
            test: vec![(0.75, 1.9)],
            band_label: "±1.96σ".into(),
        }
    }

    #[test]
    fn render_is_deterministic() {
        let a = render(&demo_spec());
        let b = render(&demo_spec());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn layers_appear_when_present() {
        let svg = render(&demo_spec());
        assert!(svg.contains(MEAN_COLOR));
        assert!(svg.contains(TRAIN_COLOR));
        assert!(svg.contains(LF_COLOR));
        assert!(svg.contains(TEST_COLOR));
        assert!(svg.contains("training"));
        assert!(svg.contains("low fidelity"));
    }

    #[test]
    fn titles_are_escaped() {
        let mut spec = demo_spec();
        spec.title = "a<b & c".into();
        let svg = render(&spec);
        assert!(svg.contains("a&lt;b &amp; c"));
    }

    #[test]
    fn nice_ticks_cover_the_range() {
        let axis = Axis {
            min: 280.0,
            max: 1520.0,
        };
        let (t, dec) = ticks(&axis, 6);
        assert!(t.len() >= 4);
        assert_eq!(dec, 0);
        assert!(t.first().unwrap() >= &axis.min && t.last().unwrap() <= &axis.max);
    }
}
