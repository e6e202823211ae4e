//! SVG line plots written by hand: axes, ticks, polylines and a legend.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::output::{RunManifest, Table, MANIFEST_NAME};
use crate::error::{Error, Result};

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Four significant digits.
fn sig(v: f64) -> String {
    let e = v.abs().log10().floor();
    if (-3.0..4.0).contains(&e) {
        format!("{v:.*}", (3.0 - e) as usize)
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let ty = |y: f64| if p.log_y { y.log10() } else { y };
    let usable: Vec<Vec<(f64, f64)>> = p
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!p.log_y || *y > 0.0))
                .map(|&(x, y)| (x, ty(y)))
                .collect()
        })
        .collect();
    let all = usable.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.05 * y0.abs() };
        (y0, y1) = (y0 - pad, y1 + pad);
    } else {
        let pad = 0.04 * (y1 - y0);
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let px = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| oy + MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let _ = writeln!(
        out,
        r#"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#,
        ox + MARGIN_L,
        oy + MARGIN_T
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        ox + MARGIN_L + pw / 2.0,
        oy + 18.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
        ox + MARGIN_L + pw / 2.0,
        oy + PANEL_H - 6.0,
        escape(&p.x_label)
    );
    for t in ticks(x0, x1) {
        let x = px(t);
        let yb = oy + MARGIN_T + ph;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{yb:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            yb + 4.0,
            yb + 15.0,
            label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = py(t);
        let xl = ox + MARGIN_L;
        let text = if p.log_y { sig(10f64.powf(t)) } else { label(t) };
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{xl:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            xl - 4.0,
            xl - 6.0,
            y + 3.5,
            escape(&text)
        );
    }
    for (i, (s, pts)) in p.series.iter().zip(&usable).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.3" points="{}"/>"#,
            path.join(" ")
        );
        let ly = oy + MARGIN_T + 12.0 + 13.0 * i as f64;
        let lx = ox + PANEL_W - MARGIN_R - 80.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}" font-size="10">{}</text>"#,
            ly - 3.5,
            lx + 14.0,
            ly - 3.5,
            lx + 18.0,
            escape(&s.label)
        );
    }
}

/// Lays the panels out on a grid with `columns` per row.
pub fn render(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns);
    let (w, h) = (PANEL_W * columns as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_W * (i % columns) as f64, PANEL_H * (i / columns) as f64);
    }
    out.push_str("</svg>\n");
    out
}

fn read_table(dir: &Path, name: &str) -> Result<Table> {
    let path = dir.join(name);
    Table::parse(&fs::read_to_string(&path).map_err(|e| {
        Error::InvalidParameter(format!("{}: {e}", path.display()))
    })?)
}

/// Curves of one column against another, one per distinct value of `group`.
fn grouped(table: &Table, group: &str, x: &str, y: impl Fn(&[f64]) -> f64, needed: &[&str]) -> Result<Vec<Series>> {
    for c in needed.iter().chain([&group, &x]) {
        table.column(c)?;
    }
    let gi = table.columns.iter().position(|c| c == group).expect("checked");
    let xi = table.columns.iter().position(|c| c == x).expect("checked");
    let mut by: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let key = row[gi];
        let point = (row[xi], y(row));
        match by.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(point),
            None => by.push((key, vec![point])),
        }
    }
    Ok(by
        .into_iter()
        .map(|(k, points)| Series {
            label: format!("{group} = {}", label(k)),
            points,
        })
        .collect())
}

fn col_index(table: &Table, name: &str) -> Result<usize> {
    table.column(name)?;
    Ok(table.columns.iter().position(|c| c == name).expect("checked"))
}

/// Six panels of `‖u‖_{H^N_h}` against `t`, one curve per `K`.
pub fn sobolev_figure(runs: &BTreeMap<u32, Table>) -> Result<String> {
    let mut panels = Vec::new();
    for n in 0..=5 {
        let name = format!("h{n}");
        let mut series = Vec::new();
        for (k, table) in runs {
            let (t, v) = (table.column("t")?, table.column(&name)?);
            series.push(Series {
                label: format!("K = {k}"),
                points: t.into_iter().zip(v).collect(),
            });
        }
        panels.push(Panel {
            title: format!("H^{n}_h norm"),
            x_label: "t".into(),
            log_y: true,
            series,
        });
    }
    Ok(render(&panels, 3))
}

/// Real and imaginary parts against `x` at each snapshot time.
pub fn snapshot_figure(snapshots: &Table) -> Result<String> {
    let (re, im) = (col_index(snapshots, "re")?, col_index(snapshots, "im")?);
    let panels = vec![
        Panel {
            title: "Re u".into(),
            x_label: "x".into(),
            log_y: false,
            series: grouped(snapshots, "t", "x", |r| r[re], &["re"])?,
        },
        Panel {
            title: "Im u".into(),
            x_label: "x".into(),
            log_y: false,
            series: grouped(snapshots, "t", "x", |r| r[im], &["im"])?,
        },
    ];
    Ok(render(&panels, 2))
}

/// `|u|` against `x` at the snapshot times, and `min |u|` against `t`.
pub fn modulus_figure(snapshots: &Table, diagnostics: &Table) -> Result<String> {
    let (re, im) = (col_index(snapshots, "re")?, col_index(snapshots, "im")?);
    let t = diagnostics.column("t")?;
    let m = diagnostics.column("min_abs_u")?;
    let panels = vec![
        Panel {
            title: "|u|".into(),
            x_label: "x".into(),
            log_y: false,
            series: grouped(snapshots, "t", "x", |r| r[re].hypot(r[im]), &["re", "im"])?,
        },
        Panel {
            title: "min |u|".into(),
            x_label: "t".into(),
            log_y: false,
            series: vec![Series {
                label: "min_x |u|".into(),
                points: t.into_iter().zip(m).collect(),
            }],
        },
    ];
    Ok(render(&panels, 2))
}

fn find_manifests(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_manifests(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == MANIFEST_NAME) {
            out.push(p);
        }
    }
    Ok(())
}

fn k_of(file: &str) -> Option<u32> {
    file.strip_prefix("sweep_sobolev_K")?.strip_suffix(".csv")?.parse().ok()
}

/// Writes the figures for every manifest found below `dir`. Sobolev sweeps
/// found anywhere below `dir` are merged into one figure at `dir`; the
/// snapshot figures go next to their manifests.
pub fn emit_figures(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut manifests = Vec::new();
    find_manifests(dir, &mut manifests)?;
    let mut written = Vec::new();
    let mut sweep: BTreeMap<u32, Table> = BTreeMap::new();
    for path in manifests {
        let m = RunManifest::read(&path)?;
        let here = path.parent().unwrap_or(dir);
        let mut emit = |name: &str, svg: String| -> Result<()> {
            let p = here.join(name);
            fs::write(&p, svg)?;
            written.push(p);
            Ok(())
        };
        match m.scenario.as_str() {
            "sweep_sobolev" => {
                for f in &m.files {
                    if let Some(k) = k_of(&f.path) {
                        if let std::collections::btree_map::Entry::Vacant(e) = sweep.entry(k) {
                            e.insert(read_table(here, &f.path)?);
                        }
                    }
                }
            }
            "tanh_evolution" => {
                emit("tanh_snapshots.svg", snapshot_figure(&read_table(here, "tanh_evolution_snapshots.csv")?)?)?;
            }
            "cos_probe" => {
                let snaps = read_table(here, "cos_probe_snapshots.csv")?;
                let diag = read_table(here, "cos_probe.csv")?;
                emit("cos_probe.svg", modulus_figure(&snaps, &diag)?)?;
            }
            _ => {}
        }
    }
    if !sweep.is_empty() {
        let p = dir.join("sobolev_norms.svg");
        fs::write(&p, sobolev_figure(&sweep)?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_range() {
        let t = ticks(0.0, 0.1);
        assert!(t.len() >= 3 && t.len() <= 7, "{t:?}");
        assert_eq!(t[0], 0.0);
        assert!(*t.last().unwrap() <= 0.1 + 1e-12);
    }

    #[test]
    fn panels_render_one_polyline_per_series() {
        let p = Panel {
            title: "a<b".into(),
            x_label: "t".into(),
            log_y: true,
            series: vec![
                Series { label: "one".into(), points: vec![(0.0, 1.0), (1.0, 10.0)] },
                Series { label: "two".into(), points: vec![(0.0, 0.0), (1.0, 100.0)] },
            ],
        };
        let svg = render(&[p], 1);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn missing_columns_are_errors() {
        let mut t = Table::new(&["t", "x", "re"]);
        t.push(vec![0.0, 0.0, 1.0]);
        assert!(snapshot_figure(&t).is_err());
        let mut d = Table::new(&["t", "mass"]);
        d.push(vec![0.0, 1.0]);
        let mut s = Table::new(&["t", "x", "re", "im"]);
        s.push(vec![0.0, 0.0, 1.0, 0.0]);
        assert!(modulus_figure(&s, &d).is_err());
        assert!(snapshot_figure(&s).is_ok());
    }

    #[test]
    fn snapshot_groups_follow_time() {
        let mut s = Table::new(&["t", "x", "re", "im"]);
        for t in [0.0, 0.5] {
            for x in [-1.0, 0.0, 1.0] {
                s.push(vec![t, x, x * t, 0.0]);
            }
        }
        let svg = snapshot_figure(&s).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("t = 0.5"));
    }
}
