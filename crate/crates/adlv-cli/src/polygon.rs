//! Rendering of the two polygons whose strictly-between lattice points count
//! the dimension: the straight `ν`-line from `(0,0)` to `(h,m)` and the
//! `μ`-polygon through the prefix sums.

use adlv_core::{d_formula, Coweight, Error, Slope};

fn prefix_sums(mu: &Coweight) -> Vec<i64> {
    let mut out = vec![0i64];
    let mut s = 0;
    for &e in mu.entries() {
        s += e;
        out.push(s);
    }
    out
}

fn is_counted(slope: Slope, prefix: &[i64], x: i64, y: i64) -> bool {
    x >= 1 && x < slope.h() && y > prefix[x as usize] && slope.h() * y < slope.m() * x
}

/// Plain-text picture: `+` marks the `μ`-polygon vertices, `*` the counted
/// lattice points, `.` the remaining grid points. The `ν`-line runs from the
/// lower-left `+` to the upper-right `+` with slope `m/h`.
pub fn render_text(slope: Slope, mu: &Coweight) -> Result<String, Error> {
    let d = d_formula(slope, mu)?;
    let (m, h) = (slope.m(), slope.h());
    let prefix = prefix_sums(mu);
    let mut out = String::new();
    out.push_str(&format!(
        "lattice points strictly between the nu-line (slope {m}/{h}) and the mu-polygon\n"
    ));
    out.push_str(&format!("mu = {mu}, vertex heights {prefix:?}\n\n"));
    for y in (0..=m).rev() {
        out.push_str(&format!("{y:>4} |"));
        for x in 0..=h {
            let c = if prefix[x as usize] == y {
                '+'
            } else if is_counted(slope, &prefix, x, y) {
                '*'
            } else {
                '.'
            };
            out.push(' ');
            out.push(c);
        }
        out.push('\n');
    }
    out.push_str("     +");
    for _ in 0..=h {
        out.push_str("--");
    }
    out.push('\n');
    out.push_str("      ");
    for x in 0..=h {
        out.push_str(&format!("{x:>2}"));
    }
    out.push('\n');
    out.push_str(&format!("\nd = {d}\n"));
    Ok(out)
}

/// Self-contained SVG with both polygons and the counted points.
pub fn render_svg(slope: Slope, mu: &Coweight) -> Result<String, Error> {
    let d = d_formula(slope, mu)?;
    let (m, h) = (slope.m(), slope.h());
    let prefix = prefix_sums(mu);
    let cell = 48i64;
    let margin = 40i64;
    let width = h * cell + 2 * margin;
    let height = m * cell + 2 * margin;
    let px = |x: i64| margin + x * cell;
    let py = |y: i64| height - margin - y * cell;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(&format!(
        "  <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    // grid points
    for x in 0..=h {
        for y in 0..=m {
            s.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"#cccccc\"/>\n",
                px(x),
                py(y)
            ));
        }
    }
    // nu line
    s.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#2266cc\" stroke-width=\"2\"/>\n",
        px(0),
        py(0),
        px(h),
        py(m)
    ));
    // mu polygon
    let pts: Vec<String> = (0..=h)
        .map(|x| format!("{},{}", px(x), py(prefix[x as usize])))
        .collect();
    s.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#cc3322\" stroke-width=\"2\"/>\n",
        pts.join(" ")
    ));
    // counted points
    for x in 1..h {
        for y in 0..=m {
            if is_counted(slope, &prefix, x, y) {
                s.push_str(&format!(
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"#111111\"/>\n",
                    px(x),
                    py(y)
                ));
            }
        }
    }
    s.push_str(&format!(
        "  <text x=\"{margin}\" y=\"24\" font-family=\"monospace\" font-size=\"16\">mu = {mu}, nu slope = {m}/{h}, d = {d}</text>\n"
    ));
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_picture_counts_match() {
        let slope = Slope::new(4, 5).unwrap();
        let mu = Coweight::new(vec![0, 0, 1, 1, 2]);
        let text = render_text(slope, &mu).unwrap();
        assert_eq!(text.matches('*').count(), 3);
        assert!(text.contains("d = 3"));
        let svg = render_svg(slope, &mu).unwrap();
        assert_eq!(svg.matches("r=\"5\"").count(), 3);
        assert!(svg.contains("d = 3"));
    }

    #[test]
    fn no_counted_points_for_minimal_slope() {
        let slope = Slope::new(1, 4).unwrap();
        let mu = Coweight::new(vec![0, 0, 0, 1]);
        let text = render_text(slope, &mu).unwrap();
        assert_eq!(text.matches('*').count(), 0);
        assert!(text.contains("d = 0"));
    }
}
