use std::path::Path;
use std::process::{Command, Output};

use lakeice_cli::render_svg_timeline;
use lakeice_core::phenology::derive_durations;
use lakeice_core::{DayIndex, PhenologyRecord, TimelinePoint, WinterSeason, WinterTimeline};

fn lakeice(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lakeice"))
        .args(args)
        .arg("--out")
        .arg(out)
        .args(["--synth-first-winter", "2004", "--synth-last-winter", "2006"])
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn full_chain_writes_a_report_row_per_lake_winter() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["simulate", "train", "classify", "timeline", "phenology", "trends", "correlate", "report"] {
        let o = lakeice(dir.path(), &[cmd]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        assert!(dir.path().join(format!("{cmd}.manifest.json")).is_file());
    }
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some(lakeice_cli::commands::REPORT_HEADER));
    assert_eq!(lines.count(), 9);
    let svgs = std::fs::read_dir(dir.path().join("svg")).unwrap().count();
    assert_eq!(svgs, 9);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("phenology.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "phenology");
    assert!(manifest["residual_unit"].as_str().unwrap().contains("percentage points"));
}

#[test]
fn missing_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = lakeice(dir.path(), &["phenology"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing input"), "{}", stderr(&o));
    assert!(!dir.path().join("phenology.json").exists());
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "sigma_day = 2.0\n").unwrap();
    let o = lakeice(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sigma_day"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = lakeice(&blocker.join("out"), &["simulate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn golden_inputs() -> (WinterTimeline, WinterTimeline, PhenologyRecord) {
    let season = WinterSeason::new(2012).unwrap();
    let pt = |day: u32, nf: f64| TimelinePoint {
        day: DayIndex(day),
        nf_percent: nf,
        cloud_free: 0.9,
        n_pixels: 12,
    };
    let raw: Vec<_> = [(80, 100.0), (105, 96.0), (118, 70.0), (121, 35.0), (126, 4.0), (170, 0.0), (225, 8.0), (236, 55.0), (244, 100.0)]
        .map(|(d, nf)| pt(d, nf))
        .to_vec();
    let smooth: Vec<_> = [(80, 99.0), (105, 93.0), (118, 66.0), (121, 38.0), (126, 9.0), (170, 1.0), (225, 12.0), (236, 52.0), (244, 96.0)]
        .map(|(d, nf)| pt(d, nf))
        .to_vec();
    let mut rec = PhenologyRecord::empty("sils", season);
    [rec.fus, rec.fue, rec.bus, rec.bue] = [118, 126, 225, 244].map(|d| Some(DayIndex(d)));
    (
        WinterTimeline::new("sils", season, raw).unwrap(),
        WinterTimeline::new("sils", season, smooth).unwrap(),
        derive_durations(rec),
    )
}

#[test]
fn svg_matches_golden() {
    let (raw, smooth, rec) = golden_inputs();
    let svg = render_svg_timeline(&raw, Some(&smooth), &rec);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sils_2012.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(svg, want);
}
