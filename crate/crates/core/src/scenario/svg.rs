use std::fmt::Write;

use crate::gridmap::TRAVERSABILITY;
use crate::mission::MissionRun;

const PX_PER_M: f64 = 80.0;

/// Red-to-green ramp for traversability in [0, 1].
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - t)).round() as u8;
    let g = (200.0 * t + 30.0).round() as u8;
    format!("#{r:02x}{g:02x}40")
}

/// Annotated top view: traversability, obstacles, both trajectories and the
/// detected anchor and landing site. No timestamps, so output is stable.
pub fn render_svg(run: &MissionRun) -> String {
    let b = *run.world.bounds();
    let w = b.width() * PX_PER_M;
    let h = b.height() * PX_PER_M;
    let sx = |x: f64| (x - b.min[0]) * PX_PER_M;
    let sy = |y: f64| (b.max[1] - y) * PX_PER_M;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#9a9a9a"/>"##);
    let map = &run.map;
    let res = map.resolution();
    if let Ok(trav) = map.layer(TRAVERSABILITY) {
        let _ = writeln!(s, r#"<g id="traversability" stroke="none">"#);
        for idx in map.indices() {
            let Some(t) = trav[map.flat(idx)] else {
                continue;
            };
            let c = map.center(idx);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                sx(c.x - res / 2.0),
                sy(c.y + res / 2.0),
                res * PX_PER_M,
                res * PX_PER_M,
                colour(t)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    for o in run.world.obstacles() {
        let (lo, hi) = (o.min(), o.max());
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="2"/>"#,
            sx(lo.x),
            sy(hi.y),
            (hi.x - lo.x) * PX_PER_M,
            (hi.y - lo.y) * PX_PER_M
        );
    }
    for p in run.world.poles() {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="black"/>"#,
            sx(p.center[0]),
            sy(p.center[1]),
            (p.radius * PX_PER_M).max(2.0)
        );
    }
    let polyline = |pts: Vec<(f64, f64)>, stroke: &str| {
        let mut out = String::from("<polyline fill=\"none\" stroke-width=\"2\" stroke=\"");
        out.push_str(stroke);
        out.push_str("\" points=\"");
        for (x, y) in pts {
            let _ = write!(out, "{:.2},{:.2} ", sx(x), sy(y));
        }
        out.push_str("\"/>");
        out
    };
    let recs = &run.log.records;
    let _ = writeln!(s, "{}", polyline(recs.iter().map(|r| (r.uav.x, r.uav.y)).collect(), "#e07b00"));
    let _ = writeln!(s, "{}", polyline(recs.iter().map(|r| (r.ugv.x, r.ugv.y)).collect(), "#1f4fd0"));
    if let Some(a) = &run.anchor {
        let (x, y) = (sx(a.position[0]), sy(a.position[1]));
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="red" stroke-width="3"/>"#,
            x - 8.0,
            y - 8.0,
            x + 8.0,
            y + 8.0,
            x - 8.0,
            y + 8.0,
            x + 8.0,
            y - 8.0
        );
    }
    if let Some(l) = &run.landing {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="7" fill="none" stroke="purple" stroke-width="2"/>"#,
            sx(l.position[0]),
            sy(l.position[1])
        );
    }
    s.push_str("</svg>\n");
    s
}
