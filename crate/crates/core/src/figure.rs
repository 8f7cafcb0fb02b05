//! Self-contained SVG figures, each written beside a CSV of the numbers it
//! shows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

/// Color for the `i`-th distinct value; beyond the palette hues are spread
/// by the golden angle.
pub fn color(i: usize) -> String {
    match PALETTE.get(i) {
        Some(c) => c.to_string(),
        None => format!("hsl({:.1},65%,55%)", (i as f64 * 137.507_764) % 360.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    /// Equal-width bins over the data range.
    Histogram { title: String, values: Vec<f64>, bins: usize },
    /// Points colored by group.
    Scatter { title: String, points: Vec<(f64, f64)>, groups: Vec<usize> },
    /// Grid of labels; `cells[i][j]` sits at row `i` from the bottom and
    /// column `j` from the left.
    Raster {
        title: String,
        cells: Vec<Vec<u64>>,
        x_range: (f64, f64),
        y_range: (f64, f64),
    },
    /// Named polylines.
    Lines {
        title: String,
        x_label: String,
        y_label: String,
        series: Vec<(String, Vec<(f64, f64)>)>,
    },
}

/// Bin edges and counts; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.is_empty() || bins == 0 {
        return Err(Error::InputFormat("histogram needs data and at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InputFormat("histogram data must be finite".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    Ok((edges, counts))
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Frame {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Frame { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, svg: &mut String) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            svg,
            r##"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text x="{l}" y="{}" font-size="11">{:.3}</text><text x="{}" y="{}" font-size="11" text-anchor="end">{:.3}</text>"##,
            b + 15.0,
            self.x.0,
            r,
            b + 15.0,
            self.x.1
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{b}" font-size="11" text-anchor="end">{:.3}</text><text x="{}" y="{}" font-size="11" text-anchor="end">{:.3}</text>"##,
            l - 4.0,
            self.y.0,
            l - 4.0,
            t + 10.0,
            self.y.1
        );
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"25\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

/// SVG text and companion CSV text of a figure.
pub fn render(fig: &Figure) -> Result<(String, String)> {
    let empty = || Error::InputFormat("figure data is empty".into());
    let mut csv = String::new();
    let svg = match fig {
        Figure::Histogram { title, values, bins } => {
            let (edges, counts) = histogram(values, *bins).map_err(|_| empty())?;
            csv.push_str("bin_lo,bin_hi,count\n");
            let top = *counts.iter().max().unwrap_or(&1) as f64;
            let frame = Frame::new((edges[0], edges[*bins]), (0.0, top));
            let mut svg = header(title);
            for (i, c) in counts.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{c}", edges[i], edges[i + 1]);
                let (x0, x1) = (frame.px(edges[i]), frame.px(edges[i + 1]));
                let y = frame.py(*c as f64);
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white" stroke-width="0.5"/>"##,
                    x1 - x0,
                    frame.py(0.0) - y,
                    PALETTE[0]
                );
            }
            frame.axes(&mut svg);
            svg
        }
        Figure::Scatter { title, points, groups } => {
            if points.is_empty() {
                return Err(empty());
            }
            if groups.len() != points.len() {
                return Err(Error::shape("one group per point is required"));
            }
            csv.push_str("x,y,group\n");
            let frame = Frame::new(range(points.iter().map(|p| p.0)), range(points.iter().map(|p| p.1)));
            let mut svg = header(title);
            for (&(x, y), g) in points.iter().zip(groups) {
                let _ = writeln!(csv, "{x},{y},{g}");
                let _ = writeln!(
                    svg,
                    r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}" fill-opacity="0.7"/>"##,
                    frame.px(x),
                    frame.py(y),
                    color(*g)
                );
            }
            frame.axes(&mut svg);
            svg
        }
        Figure::Raster {
            title,
            cells,
            x_range,
            y_range,
        } => {
            let cols = cells.first().map_or(0, Vec::len);
            if cols == 0 {
                return Err(empty());
            }
            if cells.iter().any(|r| r.len() != cols) {
                return Err(Error::shape("raster rows differ in length"));
            }
            let mut levels: BTreeMap<u64, usize> = BTreeMap::new();
            cells.iter().flatten().for_each(|v| {
                levels.insert(*v, 0);
            });
            levels.values_mut().enumerate().for_each(|(i, c)| *c = i);
            csv.push_str("row,col,value\n");
            let rows = cells.len();
            let frame = Frame::new(*x_range, *y_range);
            let (cw, ch) = ((WIDTH - 2.0 * MARGIN) / cols as f64, (HEIGHT - 2.0 * MARGIN) / rows as f64);
            let mut svg = header(title);
            for (i, row) in cells.iter().enumerate() {
                let y = HEIGHT - MARGIN - (i + 1) as f64 * ch;
                let mut j = 0;
                while j < cols {
                    let start = j;
                    while j < cols && row[j] == row[start] {
                        j += 1;
                    }
                    let _ = writeln!(
                        svg,
                        r##"<rect x="{:.3}" y="{y:.3}" width="{:.3}" height="{ch:.3}" fill="{}"/>"##,
                        MARGIN + start as f64 * cw,
                        (j - start) as f64 * cw,
                        color(levels[&row[start]])
                    );
                }
                for (j, v) in row.iter().enumerate() {
                    let _ = writeln!(csv, "{i},{j},{v}");
                }
            }
            frame.axes(&mut svg);
            svg
        }
        Figure::Lines {
            title,
            x_label,
            y_label,
            series,
        } => {
            if series.iter().all(|(_, pts)| pts.is_empty()) {
                return Err(empty());
            }
            csv.push_str("series,x,y\n");
            let all = || series.iter().flat_map(|(_, p)| p.iter());
            let frame = Frame::new(range(all().map(|p| p.0)), range(all().map(|p| p.1)));
            let mut svg = header(title);
            for (s, (name, pts)) in series.iter().enumerate() {
                let mut d = String::new();
                for (i, &(x, y)) in pts.iter().enumerate() {
                    let _ = writeln!(csv, "{name},{x},{y}");
                    let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, frame.px(x), frame.py(y));
                }
                let _ = writeln!(
                    svg,
                    r##"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
                    d.trim_end(),
                    color(s)
                );
                let _ = writeln!(
                    svg,
                    r##"<text x="{}" y="{}" font-size="11" fill="{}">{}</text>"##,
                    WIDTH - MARGIN + 4.0 - 100.0,
                    MARGIN + 14.0 * (s + 1) as f64,
                    color(s),
                    escape(name)
                );
            }
            let _ = writeln!(
                svg,
                r##"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text><text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"##,
                WIDTH / 2.0,
                HEIGHT - 12.0,
                escape(x_label),
                HEIGHT / 2.0,
                HEIGHT / 2.0,
                escape(y_label)
            );
            frame.axes(&mut svg);
            svg
        }
    };
    Ok((svg + "</svg>\n", csv))
}

/// Writes `path` (SVG) and the same path with a `.csv` extension.
pub fn emit_figure(fig: &Figure, path: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let (svg, csv) = render(fig)?;
    let svg_path = path.as_ref().to_path_buf();
    let csv_path = svg_path.with_extension("csv");
    std::fs::write(&svg_path, svg)?;
    std::fs::write(&csv_path, csv)?;
    Ok((svg_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use std::collections::HashSet;

    fn fills(svg: &str) -> HashSet<String> {
        svg.lines()
            .filter(|l| l.starts_with("<rect x="))
            .filter_map(|l| l.split("fill=\"").nth(1).map(|s| s.split('"').next().unwrap().to_string()))
            .collect()
    }

    #[test]
    fn histogram_of_normals() {
        let mut rng = Rng::new(1);
        let values: Vec<f64> = (0..10_000).map(|_| rng.normal()).collect();
        let dir = tempfile::tempdir().unwrap();
        let fig = Figure::Histogram {
            title: "normal".into(),
            values,
            bins: 50,
        };
        let (svg, csv) = emit_figure(&fig, dir.path().join("h.svg")).unwrap();
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 51);
        let total: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
        assert_eq!(total, 10_000);
        let svg = std::fs::read_to_string(svg).unwrap();
        assert_eq!(svg.matches("<rect x=").count(), 50);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn one_line_raster_has_two_colors() {
        let cells: Vec<Vec<u64>> = (0..20).map(|i| (0..20).map(|j| u64::from(i + j > 19)).collect()).collect();
        let (svg, _) = render(&Figure::Raster {
            title: "one line".into(),
            cells,
            x_range: (-1.0, 1.0),
            y_range: (-1.0, 1.0),
        })
        .unwrap();
        assert_eq!(fills(&svg).len(), 2);
    }

    #[test]
    fn empty_data_refused() {
        let err = render(&Figure::Histogram {
            title: String::new(),
            values: vec![],
            bins: 50,
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(render(&Figure::Lines {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            series: vec![("a".into(), vec![])],
        })
        .is_err());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let fig = Figure::Scatter {
            title: "s".into(),
            points: vec![(0.0, 1.0)],
            groups: vec![0],
        };
        let err = emit_figure(&fig, "/nonexistent/dir/f.svg").unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn distinct_colors_beyond_palette() {
        let c: HashSet<String> = (0..40).map(color).collect();
        assert_eq!(c.len(), 40);
    }
}
