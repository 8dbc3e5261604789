//! Static SVG plot of one winter: observations, smoothed curve, fitted
//! shape and event markers.

use std::fmt::Write;

use lakeice_core::phenology::model_nf_at;
use lakeice_core::{LipEvent, PhenologyRecord, WinterTimeline};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 50.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

const MONTHS: [(&str, u32); 9] = [
    ("Sep", 9),
    ("Oct", 10),
    ("Nov", 11),
    ("Dec", 12),
    ("Jan", 1),
    ("Feb", 2),
    ("Mar", 3),
    ("Apr", 4),
    ("May", 5),
];

const STYLE: &str = "\
text{font-family:sans-serif;font-size:11px;fill:#333}\
.frame{fill:none;stroke:#999}\
.grid{stroke:#ddd}\
.raw{fill:#1f77b4}\
.smoothed{fill:none;stroke:#ff7f0e;stroke-width:1.2}\
.fit{fill:none;stroke:#17becf;stroke-width:2}\
.event{stroke:#d62728;stroke-dasharray:4 3}";

struct Frame {
    days: f64,
}

impl Frame {
    fn x(&self, day: f64) -> f64 {
        LEFT + day / (self.days - 1.0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, nf: f64) -> f64 {
        TOP + (100.0 - nf) / 100.0 * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render `raw` (points), `smoothed` (line) and the record's fit. Output is
/// a pure function of the inputs.
pub fn render_svg_timeline(raw: &WinterTimeline, smoothed: Option<&WinterTimeline>, record: &PhenologyRecord) -> String {
    let season = raw.season;
    let f = Frame {
        days: season.len() as f64,
    };
    let mut s = String::with_capacity(16 * 1024);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<style>{STYLE}</style>");
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18">{} {} (non-frozen %)</text>"#,
        escape(&raw.lake_id),
        season
    );
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    for nf in [0.0, 50.0, 100.0] {
        let y = f.y(nf);
        let _ = writeln!(
            s,
            r#"<line class="grid" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/><text x="{:.2}" y="{:.2}" text-anchor="end">{nf}</text>"#,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (name, month) in MONTHS {
        let Ok(day) = season.index_of_month_day(month, 1) else { continue };
        let x = f.x(day.0 as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#,
            HEIGHT - BOTTOM + 16.0
        );
    }
    for p in raw.points() {
        let _ = writeln!(
            s,
            r#"<circle class="raw" cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
            f.x(p.day.0 as f64),
            f.y(p.nf_percent)
        );
    }
    if let Some(sm) = smoothed.filter(|t| !t.is_empty()) {
        let pts: Vec<String> = sm
            .points()
            .iter()
            .map(|p| format!("{:.2},{:.2}", f.x(p.day.0 as f64), f.y(p.nf_percent)))
            .collect();
        let _ = writeln!(s, r#"<polyline class="smoothed" points="{}"/>"#, pts.join(" "));
    }
    if let Some(dates) = record.dates() {
        let last = f.days - 1.0;
        let [a, b, c, d] = dates.as_array().map(|x| x.0 as f64);
        // Vertices of the shape; equal dates give vertical steps.
        let vertices = [(0.0, model_nf_at(0.0, &dates)), (a, 100.0), (b, 0.0), (c, 0.0), (d, 100.0), (last, 100.0)];
        let pts: Vec<String> = vertices
            .iter()
            .map(|&(t, nf)| format!("{:.2},{:.2}", f.x(t), f.y(nf)))
            .collect();
        let _ = writeln!(s, r#"<polyline class="fit" points="{}"/>"#, pts.join(" "));
    }
    for e in LipEvent::ALL {
        let Some(day) = record.get(e) else { continue };
        let x = f.x(day.0 as f64);
        let _ = writeln!(
            s,
            r#"<line class="event" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{e}</text>"#,
            HEIGHT - BOTTOM,
            TOP - 3.0 - 10.0 * (e.index() % 2) as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use lakeice_core::phenology::derive_durations;
    use lakeice_core::{DayIndex, TimelinePoint, WinterSeason};

    fn timeline() -> WinterTimeline {
        let pts = [(100, 100.0), (120, 40.0), (130, 0.0), (230, 0.0), (240, 100.0)]
            .map(|(d, nf)| TimelinePoint {
                day: DayIndex(d),
                nf_percent: nf,
                cloud_free: 1.0,
                n_pixels: 10,
            })
            .to_vec();
        WinterTimeline::new("a<b", WinterSeason::new(2010).unwrap(), pts).unwrap()
    }

    #[test]
    fn empty_record_has_points_only() {
        let tl = timeline();
        let rec = PhenologyRecord::empty("a<b", tl.season);
        let svg = render_svg_timeline(&tl, None, &rec);
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(!svg.contains("polyline"));
        assert!(!svg.contains(r#"class="event""#));
        assert!(svg.contains("a&lt;b"));
    }

    #[test]
    fn complete_record_has_four_markers() {
        let tl = timeline();
        let mut rec = PhenologyRecord::empty("a<b", tl.season);
        [rec.fus, rec.fue, rec.bus, rec.bue] = [118, 125, 232, 238].map(|d| Some(DayIndex(d)));
        let rec = derive_durations(rec);
        let svg = render_svg_timeline(&tl, Some(&tl), &rec);
        assert_eq!(svg.matches(r#"<line class="event""#).count(), 4);
        assert_eq!(svg.matches(r#"class="fit""#).count(), 1);
        assert_eq!(svg, render_svg_timeline(&tl, Some(&tl), &rec));
    }
}
