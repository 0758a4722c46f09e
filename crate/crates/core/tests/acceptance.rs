//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixmap::deform::{mixed_energy, rotation, smooth_energy, station_sectors};
use mixmap::geometry::{crossing_pairs, integral_frechet, Similarity};
use mixmap::io::{parse_network, parse_shape};
use mixmap::network::{default_dummy_threshold, insert_dummy_edges};
use mixmap::pipeline::routed_crossings;
use mixmap::{
    synth, GuideShape, MatchConfig, PipelineConfig, PipelineOutput, Point, Polyline, TransitNetwork,
};

const SAMPLES: usize = 64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Instance {
    name: &'static str,
    out: PipelineOutput,
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn load(net: &str, shape: &str) -> (TransitNetwork, GuideShape) {
    let n = parse_network(&std::fs::read_to_string(data(net)).unwrap()).unwrap();
    let s = parse_shape(&std::fs::read_to_string(data(shape)).unwrap()).unwrap();
    (n, s)
}

const BUNDLED: [(&str, &str, &str); 3] = [
    ("metro60+heart", "metro60.net", "heart.shape"),
    ("metro100+flower", "metro100.net", "flower.shape"),
    ("metro260+eye", "metro260.net", "eye.shape"),
];

fn bundled() -> Vec<Instance> {
    BUNDLED
        .iter()
        .map(|&(name, n, s)| {
            let (net, shape) = load(n, s);
            let out = mixmap::run_pipeline(&net, &shape, &PipelineConfig::default()).unwrap();
            Instance { name, out }
        })
        .collect()
}

fn matching_net(net: &TransitNetwork) -> TransitNetwork {
    let net = net.normalize().unwrap();
    insert_dummy_edges(&net, default_dummy_threshold(&net))
}

fn frechet_invariance() -> Outcome {
    let nets = [
        ("grid 4x5", synth::grid(4, 5, 1)),
        ("grid 7x8", synth::grid(7, 8, 2)),
        ("grid 10x10", synth::grid(10, 10, 3)),
        ("ring 24", synth::ring(24, 4, 4)),
        ("ring 64", synth::ring(64, 6, 5)),
        ("tree 30", synth::tree(30, 6)),
        ("tree 60", synth::tree(60, 7)),
        ("tree 100", synth::tree(100, 8)),
    ];
    let shapes = [synth::heart(), synth::flower(), synth::eye()];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = MatchConfig::default();
    let mut slowest = 0.0f64;
    for (k, (name, net)) in nets.iter().enumerate() {
        let t = Instant::now();
        let m = matching_net(net);
        let shape = &shapes[k % shapes.len()];
        let base = mixmap::matching::match_route(&m, shape, &cfg)
            .unwrap()
            .stations;
        for _ in 0..10 {
            let s = rng.gen_range(0.5..2.0);
            let tr = Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let moved = shape.transformed(&Similarity {
                scale: s,
                offset: tr,
            });
            let got = mixmap::matching::match_route(&m, &moved, &cfg)
                .unwrap()
                .stations;
            if got != base {
                return outcome(
                    false,
                    format!("{name}: sequence changed under scale {s:.3}"),
                );
            }
        }
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        if secs >= 60.0 {
            return outcome(false, format!("{name}: {secs:.1} s"));
        }
    }
    outcome(
        true,
        format!("8 networks x 10 perturbations identical, slowest {slowest:.2} s"),
    )
}

/// Minimum distance over every simple path and cycle with at most `max_edges` edges.
fn exhaustive_min(net: &TransitNetwork, anchor: &Polyline, max_edges: usize) -> (f64, usize) {
    fn rec(
        net: &TransitNetwork,
        anchor: &Polyline,
        pos: &[Point],
        path: &mut Vec<usize>,
        on: &mut [bool],
        max_edges: usize,
        best: &mut (f64, usize),
    ) {
        let tail = *path.last().unwrap();
        for &(v, _) in net.neighbors(tail) {
            if v == path[0] && path.len() >= 3 {
                let pts = path.iter().map(|&s| pos[s]).collect();
                let d =
                    integral_frechet(&Polyline::new(pts, true).unwrap(), anchor, SAMPLES).distance;
                best.0 = best.0.min(d);
                best.1 += 1;
            }
            if on[v] || path.len() > max_edges {
                continue;
            }
            path.push(v);
            on[v] = true;
            let pts = path.iter().map(|&s| pos[s]).collect();
            let d = integral_frechet(&Polyline::new(pts, false).unwrap(), anchor, SAMPLES).distance;
            best.0 = best.0.min(d);
            best.1 += 1;
            rec(net, anchor, pos, path, on, max_edges, best);
            on[v] = false;
            path.pop();
        }
    }
    let pos = net.positions();
    let mut best = (f64::INFINITY, 0);
    for s in 0..net.station_count() {
        let mut on = vec![false; net.station_count()];
        on[s] = true;
        rec(
            net,
            anchor,
            &pos,
            &mut vec![s],
            &mut on,
            max_edges,
            &mut best,
        );
    }
    best
}

/// Unit lattice with one line per row and per column.
fn lattice(n: usize) -> TransitNetwork {
    let mut doc = String::new();
    for y in 0..n {
        for x in 0..n {
            doc += &format!("station s{y}_{x} {x} {y} S\n");
        }
    }
    for y in 0..n {
        for x in 0..n {
            if x + 1 < n {
                doc += &format!("connection h{y}_{x} s{y}_{x} s{y}_{} r{y}\n", x + 1);
            }
            if y + 1 < n {
                doc += &format!("connection v{y}_{x} s{y}_{x} s{}_{x} c{x}\n", y + 1);
            }
        }
    }
    for k in 0..n {
        let row: Vec<String> = (0..n).map(|x| format!("s{k}_{x}")).collect();
        let col: Vec<String> = (0..n).map(|y| format!("s{y}_{k}")).collect();
        doc += &format!(
            "line r{k} #d62728 {}\nline c{k} #1f77b4 {}\n",
            row.join(" "),
            col.join(" ")
        );
    }
    parse_network(&doc).unwrap()
}

fn route_oracle() -> Outcome {
    let t = Instant::now();
    let net = lattice(4);
    let shape = synth::square();
    let r = mixmap::matching::match_route(&net, &shape, &MatchConfig::default()).unwrap();
    let (min, count) = exhaustive_min(&net, shape.anchor_polyline(), 12);
    let secs = t.elapsed().as_secs_f64();
    let pass = (r.score - min).abs() <= 1e-12 && secs < 10.0;
    outcome(
        pass,
        format!(
            "W = {:?} scores {:.3e}, exhaustive minimum {:.3e} over {count} walks, {secs:.2} s",
            net.ids(&r.stations),
            r.score,
            min
        ),
    )
}

fn energy_monotonicity(inst: &[Instance]) -> Outcome {
    let mut violations = 0;
    let mut mismatch = Vec::new();
    let mut iters = 0;
    for i in inst {
        let o = &i.out;
        let s = o.smooth.as_ref().unwrap();
        let m = o.mixed.as_ref().unwrap();
        for tr in [&s.trace, &m.trace] {
            iters += tr.len();
            violations += tr
                .windows(2)
                .filter(|w| w[1].energy - w[0].energy > 1e-9 * w[0].energy.abs())
                .count();
        }
        // the recorded final energies must be the energies of the final positions
        let es = smooth_energy(s, &o.network, &o.shape, o.smooth_weights);
        let em = mixed_energy(m, &s.positions, &o.network, &o.shape, o.mixed_weights);
        if (es - s.energy).abs() > 1e-9 * es.abs().max(1.0)
            || (em - m.energy).abs() > 1e-9 * em.abs().max(1.0)
        {
            mismatch.push(i.name);
        }
    }
    outcome(
        violations == 0 && mismatch.is_empty(),
        format!("{violations} violations over {iters} accepted iterates, recomputed energy mismatches {mismatch:?}"),
    )
}

fn planarity(inst: &[Instance]) -> Outcome {
    let mut bad = Vec::new();
    let mut iters = 0;
    for i in inst {
        let o = &i.out;
        let s = o.smooth.as_ref().unwrap();
        let m = o.mixed.as_ref().unwrap();
        iters += s.trace.len() + m.trace.len();
        let per_iter = s
            .trace
            .iter()
            .chain(&m.trace)
            .map(|r| r.crossings)
            .sum::<usize>();
        let sweep_smooth = crossing_pairs(&o.network.segments(&s.positions)).len();
        let sweep_mixed = crossing_pairs(&o.network.segments(&m.positions)).len();
        let routed = routed_crossings(o.grid.as_ref().unwrap());
        if per_iter + sweep_smooth + sweep_mixed + routed > 0 {
            bad.push(format!(
                "{}: {per_iter}/{sweep_smooth}/{sweep_mixed}/{routed}",
                i.name
            ));
        }
    }
    outcome(
        bad.is_empty(),
        format!("0 crossings expected over {iters} iterates and 3 routed layouts {bad:?}"),
    )
}

fn sector_optimality() -> Outcome {
    fn best(angles: &[f64], used: &mut [bool; 8], acc: f64, out: &mut f64) {
        let Some((&a, rest)) = angles.split_first() else {
            *out = out.min(acc);
            return;
        };
        for k in 0..8u8 {
            if !used[k as usize] {
                used[k as usize] = true;
                best(rest, used, acc + rotation(a, k), out);
                used[k as usize] = false;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut wrong = 0;
    for _ in 0..100 {
        let d = rng.gen_range(1..=6);
        let angles: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let ks = station_sectors(&angles);
        let got: f64 = angles
            .iter()
            .zip(&ks)
            .fold(0.0, |acc, (&a, &k)| acc + rotation(a, k));
        let mut want = f64::INFINITY;
        best(&angles, &mut [false; 8], 0.0, &mut want);
        let mut seen = [false; 8];
        let distinct = ks
            .iter()
            .all(|&k| !std::mem::replace(&mut seen[k as usize], true));
        if got != want || !distinct {
            wrong += 1;
        }
    }
    outcome(
        wrong == 0,
        format!(
            "{} of 100 stations equal the exhaustive optimum",
            100 - wrong
        ),
    )
}

fn octolinearity(inst: &[Instance]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for i in inst {
        let o = i.out.report.grid.as_ref().unwrap().octolinearity;
        let share = o.excluded as f64 / o.total as f64;
        pass &= o.fraction == 1.0 && share < 0.1;
        parts.push(format!(
            "{} {:.4} ({} excluded of {})",
            i.name, o.fraction, o.excluded, o.total
        ));
    }
    outcome(pass, parts.join(", "))
}

fn fidelity(inst: &[Instance]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for i in inst {
        let f = &i.out.report.fidelity;
        match (f.geographic, f.final_layout) {
            (Some(g), Some(e)) => {
                pass &= e < g;
                parts.push(format!("{} {g:.4} -> {e:.4}", i.name));
            }
            _ => {
                pass = false;
                parts.push(format!("{} missing", i.name));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn failure_budget(inst: &[Instance]) -> Outcome {
    let densest = inst.iter().max_by_key(|i| i.out.report.stations).unwrap();
    let g = densest.out.report.grid.as_ref().unwrap();
    let pass = densest.out.report.stations >= 250
        && g.failed_edges < 5
        && g.failed.len() == g.failed_edges;
    outcome(
        pass,
        format!(
            "{} ({} stations): {} failed {:?}",
            densest.name, densest.out.report.stations, g.failed_edges, g.failed
        ),
    )
}

fn runtime_budget() -> Outcome {
    let (net, shape) = load("metro100.net", "flower.shape");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let out =
        pool.install(|| mixmap::run_pipeline(&net, &shape, &PipelineConfig::default()).unwrap());
    let t = &out.report.times;
    let front = t.normalize + t.route + t.smooth.unwrap() + t.mixed.unwrap();
    let grid = t.grid.unwrap();
    outcome(
        front < 120.0 && grid < 300.0,
        format!(
            "{} stations: route+smooth+mixed {front:.2} s, grid {grid:.2} s",
            out.report.stations
        ),
    )
}

/// A smooth random curve: sum of two sinusoids along a gently turning path.
fn smooth_curve(rng: &mut ChaCha8Rng) -> Polyline {
    let n = rng.gen_range(20..60);
    let (a1, f1, p1) = (
        rng.gen_range(0.2..1.5),
        rng.gen_range(0.5..2.5),
        rng.gen_range(0.0..6.3),
    );
    let (a2, f2, p2) = (
        rng.gen_range(0.0..0.5),
        rng.gen_range(2.0..4.0),
        rng.gen_range(0.0..6.3),
    );
    let pts = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64 * 2.0 * std::f64::consts::PI;
            Point::new(t, a1 * (f1 * t + p1).sin() + a2 * (f2 * t + p2).sin())
        })
        .collect();
    Polyline::new(pts, false).unwrap()
}

fn frechet_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a = smooth_curve(&mut rng);
        let b = smooth_curve(&mut rng);
        let d1 = integral_frechet(&a, &b, SAMPLES).distance;
        let d4 = integral_frechet(&a, &b, 4 * SAMPLES).distance;
        let rel = (d1 - d4).abs() / d1.abs().max(d4.abs()).max(1e-12);
        worst = worst.max(rel);
    }
    outcome(
        worst < 0.02,
        format!(
            "worst relative difference {worst:.2e} (n = {SAMPLES} vs {})",
            4 * SAMPLES
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let t = Instant::now();
    let inst = bundled();
    println!(
        "pipeline on {} bundled instances: {:.2} s",
        inst.len(),
        t.elapsed().as_secs_f64()
    );
    let checks: Vec<(&str, Check)> = vec![
        ("fréchet invariance", Box::new(frechet_invariance)),
        ("route-matching oracle", Box::new(route_oracle)),
        (
            "energy monotonicity",
            Box::new(|| energy_monotonicity(&inst)),
        ),
        ("planarity", Box::new(|| planarity(&inst))),
        ("sector-assignment optimality", Box::new(sector_optimality)),
        ("octolinearity", Box::new(|| octolinearity(&inst))),
        ("shape fidelity improvement", Box::new(|| fidelity(&inst))),
        ("routing failure budget", Box::new(|| failure_budget(&inst))),
        ("runtime budget", Box::new(runtime_budget)),
        ("fréchet convergence", Box::new(frechet_convergence)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {name}: {} ({})",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
