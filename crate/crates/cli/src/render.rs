//! SVG rendering of a map, a path and the HD regions.

use std::fmt::Write as _;

use mrplan::executive::split_segments;
use mrplan::graph::HdRegion;
use mrplan::path::Path;
use mrplan::{Controller, Terrain, World};

const CELL: i32 = 16;

pub fn terrain_color(t: Terrain) -> &'static str {
    match t {
        Terrain::Free => "#ffffff",
        Terrain::Wall => "#000000",
        Terrain::Low => "#800080",
        Terrain::Rubble => "#ffa500",
    }
}

pub fn controller_color(c: Controller) -> &'static str {
    match c {
        Controller::Walk => "#1f77b4",
        Controller::Crawl => "#2ca02c",
        Controller::FullBody => "#d62728",
    }
}

fn center(v: i32) -> i32 {
    v * CELL + CELL / 2
}

pub fn render_svg(w: &World, path: Option<&Path>, regions: &[HdRegion]) -> String {
    let (pw, ph) = (w.width() as i32 * CELL, w.height() as i32 * CELL);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw}" height="{ph}" viewBox="0 0 {pw} {ph}">"#
    )
    .unwrap();
    for (x, y) in w.cells() {
        writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" stroke="#cccccc" stroke-width="0.5"/>"##,
            x * CELL,
            y * CELL,
            terrain_color(w.terrain(x, y))
        )
        .unwrap();
    }
    for r in regions {
        let rad = r.radius as i32;
        let side = (2 * rad + 1) * CELL;
        writeln!(
            s,
            r##"<rect class="region" x="{}" y="{}" width="{side}" height="{side}" fill="none" stroke="#444444" stroke-width="2" stroke-dasharray="6,3"/>"##,
            (r.x - rad) * CELL,
            (r.y - rad) * CELL
        )
        .unwrap();
    }
    if let Some(p) = path {
        for seg in split_segments(p) {
            let pts: Vec<String> = seg
                .path
                .states()
                .iter()
                .map(|st| {
                    let (x, y) = st.cell();
                    format!("{},{}", center(x), center(y))
                })
                .collect();
            writeln!(
                s,
                r#"<polyline class="segment" points="{}" fill="none" stroke="{}" stroke-width="3"/>"#,
                pts.join(" "),
                controller_color(seg.controller)
            )
            .unwrap();
        }
        let (sx, sy) = p.start.cell();
        let (gx, gy) = p.end().cell();
        writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="4" fill="#1f77b4"/>"##,
            center(sx),
            center(sy)
        )
        .unwrap();
        writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="4" fill="#d62728"/>"##,
            center(gx),
            center(gy)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
