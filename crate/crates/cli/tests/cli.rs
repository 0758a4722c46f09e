use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn mixmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_small(extra: &[&str]) -> Output {
    let net = data("metro60.net");
    let shape = data("heart.shape");
    let mut args = vec![
        "run",
        "--network",
        net.to_str().unwrap(),
        "--shape",
        shape.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    mixmap(&args)
}

fn report(out: &Output) -> toml::Table {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn defaults_populate_every_stage() {
    let r = report(&run_small(&[]));
    let times = r["times"].as_table().unwrap();
    for k in ["normalize", "route", "smooth", "mixed", "grid", "total"] {
        assert!(times[k].as_float().unwrap() >= 0.0, "{k}");
    }
    let sum: f64 = ["normalize", "route", "smooth", "mixed", "grid"]
        .iter()
        .map(|k| times[*k].as_float().unwrap())
        .sum();
    let total = times["total"].as_float().unwrap();
    assert!((sum - total).abs() <= 0.05 * total, "{sum} vs {total}");
    assert!(r.contains_key("smooth") && r.contains_key("mixed") && r.contains_key("grid"));
    let octo = &r["grid"]["octolinearity"]["fraction"];
    assert!((0.0..=1.0).contains(&octo.as_float().unwrap()));
}

#[test]
fn smooth_stage_skips_later_timings() {
    let r = report(&run_small(&["--stage", "smooth"]));
    let times = r["times"].as_table().unwrap();
    assert!(times.contains_key("smooth"));
    assert!(!times.contains_key("mixed") && !times.contains_key("grid"));
    assert!(!r.contains_key("mixed") && !r.contains_key("grid"));
}

#[test]
fn outputs_are_written_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let rep = dir.path().join("report.toml");
        let out = run_small(&[
            "--emit-stages",
            "--out",
            dir.path().to_str().unwrap(),
            "--report",
            rep.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
        assert!(rep.exists());
    }
    for f in [
        "layout.txt",
        "map.svg",
        "shape.txt",
        "smooth.layout",
        "smooth.svg",
        "mixed.layout",
        "mixed.svg",
    ] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, y, "{f} differs between runs");
    }
    let svg = fs::read_to_string(a.path().join("map.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    assert!(svg.contains("<circle"));
}

#[test]
fn weights_and_grid_flags_are_accepted() {
    let r = report(&run_small(&[
        "--w-c",
        "3,8",
        "--w-l",
        "1",
        "--w-a",
        "2",
        "--w-p",
        "0.2",
        "--w-o",
        "2",
        "--grid-factor",
        "0.4",
        "--c-hop",
        "15",
        "--dummy-threshold",
        "1.0",
        "--samples",
        "48",
    ]));
    assert!(r.contains_key("grid"));
}

#[test]
fn manual_route_is_used() {
    let r = report(&run_small(&[
        "--stage",
        "smooth",
        "--route",
        "s54,s53,s52,s51,s50",
    ]));
    assert_eq!(r["route"]["manual"].as_bool(), Some(true));
    assert_eq!(r["route"]["stations"].as_array().unwrap().len(), 5);
}

#[test]
fn malformed_network_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bad.net");
    fs::write(&net, "station a 0 zero A\n").unwrap();
    let shape = data("heart.shape");
    let out = mixmap(&[
        "run",
        "--network",
        net.to_str().unwrap(),
        "--shape",
        shape.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("1:"), "{msg}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = mixmap(&[
        "run",
        "--network",
        "/nonexistent.net",
        "--shape",
        "/nonexistent.shape",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn broken_route_is_a_stage_error() {
    let out = run_small(&["--route", "s0,s50"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("route:"), "{msg}");
}

#[test]
fn synth_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("g.net");
    let shape = dir.path().join("s.shape");
    let o = mixmap(&[
        "synth",
        "network",
        "--kind",
        "grid",
        "--size",
        "4x5",
        "--seed",
        "2",
        "-o",
        net.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = mixmap(&[
        "synth",
        "shape",
        "--name",
        "square",
        "-o",
        shape.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = mixmap(&[
        "run",
        "--network",
        net.to_str().unwrap(),
        "--shape",
        shape.to_str().unwrap(),
        "--stage",
        "mixed",
    ]);
    let r = report(&o);
    assert_eq!(r["stations"].as_integer(), Some(20));
}
