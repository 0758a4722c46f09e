//! `mixmap`: lay out a transit network around a guide shape.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use mixmap::deform::DeformConfig;
use mixmap::io::{
    emit_grid_layout, emit_layout, emit_network, emit_shape, emit_svg, parse_network, parse_shape,
    Drawing,
};
use mixmap::pipeline::{run_pipeline_observed, StageArtifact};
use mixmap::{synth, BBox, PipelineConfig, Point, Stage};

#[derive(Parser)]
#[command(
    name = "mixmap",
    version,
    about = "Shape-guided mixed metro map layout"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the layout pipeline on a network and a guide shape.
    Run(Box<RunArgs>),
    /// Write a synthetic network or guide shape.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    shape: PathBuf,
    /// Last stage to run.
    #[arg(long, default_value = "grid", value_parser = parse_stage)]
    stage: Stage,
    /// Shape term weight; `S` sets both stages, `S,M` sets smooth and mixed.
    #[arg(long, value_name = "W[,W]")]
    w_c: Option<String>,
    /// Length term weight (smooth stage).
    #[arg(long)]
    w_l: Option<f64>,
    /// Angle term weight (smooth stage).
    #[arg(long)]
    w_a: Option<f64>,
    /// Position term weight; `S` sets both stages, `S,M` sets smooth and mixed.
    #[arg(long, value_name = "W[,W]")]
    w_p: Option<String>,
    /// Octilinearity term weight (mixed stage).
    #[arg(long)]
    w_o: Option<f64>,
    #[arg(long)]
    smooth_iter: Option<usize>,
    #[arg(long)]
    mixed_iter: Option<usize>,
    /// Grid cell size as a fraction of the average connection length.
    #[arg(long)]
    grid_factor: Option<f64>,
    /// Cost of one grid hop.
    #[arg(long)]
    c_hop: Option<f64>,
    /// Shortcut threshold as a multiple of the average connection length.
    #[arg(long)]
    dummy_threshold: Option<f64>,
    /// Only start route matching from stations inside this box.
    #[arg(long, value_name = "X0,Y0,X1,Y1", value_parser = parse_window)]
    route_window: Option<BBox>,
    /// Use these comma-separated station ids as the route instead of matching.
    #[arg(long, value_name = "ID,ID,...")]
    route: Option<String>,
    /// Samples per curve for distance evaluation.
    #[arg(long)]
    samples: Option<usize>,
    /// Also write the smooth and mixed layouts.
    #[arg(long)]
    emit_stages: bool,
    /// Directory for layouts and SVG files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCommand {
    Network {
        #[arg(long, value_enum, default_value = "metro")]
        kind: NetworkKind,
        /// Station count (metro, ring, tree) or rows and columns (grid, `RxC`).
        #[arg(long, default_value = "60")]
        size: String,
        /// Lines (metro) or spokes (ring).
        #[arg(long)]
        lines: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Shape {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(synth::SHAPES))]
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkKind {
    Metro,
    Grid,
    Ring,
    Tree,
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    s.parse()
}

fn parse_window(s: &str) -> Result<BBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [x0, y0, x1, y1] = v[..] else {
        return Err("expected four numbers x0,y0,x1,y1".into());
    };
    BBox::of_points([Point::new(x0, y0), Point::new(x1, y1)])
        .ok_or_else(|| "window is not finite".into())
}

/// One or two comma-separated weights.
fn stage_pair(s: &str) -> anyhow::Result<(f64, f64)> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad weight `{s}`"))?;
    match v[..] {
        [a] => Ok((a, a)),
        [a, b] => Ok((a, b)),
        _ => bail!("expected one or two weights, found `{s}`"),
    }
}

fn config(args: &RunArgs) -> anyhow::Result<PipelineConfig> {
    let mut cfg = PipelineConfig {
        stage: args.stage,
        ..Default::default()
    };
    if let Some(w) = &args.w_c {
        (cfg.smooth.w_c, cfg.mixed.w_c) = stage_pair(w)?;
    }
    if let Some(w) = &args.w_p {
        (cfg.smooth.w_p, cfg.mixed.w_p) = stage_pair(w)?;
    }
    if let Some(w) = args.w_l {
        cfg.smooth.w_l = w;
    }
    if let Some(w) = args.w_a {
        cfg.smooth.w_a = w;
    }
    if let Some(w) = args.w_o {
        cfg.mixed.w_o = w;
    }
    let weights = [
        cfg.smooth.w_c,
        cfg.smooth.w_l,
        cfg.smooth.w_a,
        cfg.smooth.w_p,
        cfg.mixed.w_c,
        cfg.mixed.w_p,
        cfg.mixed.w_o,
    ];
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        bail!("weights must be finite and non-negative");
    }
    if let Some(n) = args.smooth_iter {
        cfg.smooth_iter = DeformConfig {
            max_iter: n,
            ..cfg.smooth_iter
        };
    }
    if let Some(n) = args.mixed_iter {
        cfg.mixed_iter = DeformConfig {
            max_iter: n,
            ..cfg.mixed_iter
        };
    }
    if let Some(f) = args.grid_factor {
        if !(f > 0.0 && f.is_finite()) {
            bail!("--grid-factor must be positive");
        }
        cfg.grid_factor = Some(f);
    }
    if let Some(c) = args.c_hop {
        if !(c > 0.0 && c.is_finite()) {
            bail!("--c-hop must be positive");
        }
        cfg.c_hop = c;
    }
    if let Some(t) = args.dummy_threshold {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("--dummy-threshold must be non-negative");
        }
        cfg.dummy_factor = t;
    }
    if let Some(n) = args.samples {
        if n < 2 {
            bail!("--samples must be at least 2");
        }
        cfg.matching.n_samples = n;
    }
    cfg.matching.window = args.route_window;
    cfg.manual_route = args.route.as_ref().map(|r| {
        r.split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    });
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_stage(dir: &Path, a: &StageArtifact) -> anyhow::Result<()> {
    let name = a.stage.name();
    let st = a.state;
    write(
        &dir.join(format!("{name}.layout")),
        &emit_layout(a.network, &st.positions, &st.shape_stations),
    )?;
    let svg = emit_svg(&Drawing::straight(a.network, &st.positions, Some(a.shape)));
    write(&dir.join(format!("{name}.svg")), &svg)
}

enum Failure {
    Input(anyhow::Error),
    Stage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Stage(e)
    }
}

fn input<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let text = input(
        fs::read_to_string(&args.network)
            .with_context(|| format!("reading {}", args.network.display())),
    )?;
    let net = input(parse_network(&text).with_context(|| args.network.display().to_string()))?;
    let text = input(
        fs::read_to_string(&args.shape)
            .with_context(|| format!("reading {}", args.shape.display())),
    )?;
    let shape = input(parse_shape(&text).with_context(|| args.shape.display().to_string()))?;
    let cfg = input(config(args))?;

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut emit_err = None;
    let mut observe = |a: &StageArtifact| {
        if let (true, Some(dir), None) = (args.emit_stages, &args.out, &emit_err) {
            if let Err(e) = write_stage(dir, a) {
                emit_err = Some(e);
            }
        }
    };
    let out = match run_pipeline_observed(&net, &shape, &cfg, &mut observe) {
        Ok(out) => out,
        Err(e) if e.is_input_error() => return Err(Failure::Input(e.into())),
        Err(e) => return Err(Failure::Stage(e.into())),
    };
    if let Some(e) = emit_err {
        return Err(e.into());
    }

    if let Some(dir) = &args.out {
        let shape_st = out.shape_stations();
        let (layout, drawing) = match &out.grid {
            Some(g) => (
                emit_grid_layout(&out.network, g, &shape_st),
                Drawing::grid(&out.network, g, Some(&out.shape)),
            ),
            None => {
                let pos = out.final_positions();
                (
                    emit_layout(&out.network, &pos, &shape_st),
                    Drawing::straight(&out.network, &pos, Some(&out.shape)),
                )
            }
        };
        write(&dir.join("layout.txt"), &layout)?;
        write(&dir.join("map.svg"), &emit_svg(&drawing))?;
        write(&dir.join("shape.txt"), &emit_shape(&out.shape))?;
        info!("wrote {}", dir.display());
    }
    let report = out.report.to_toml();
    match &args.report {
        Some(p) => write(p, &report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn size(s: &str) -> anyhow::Result<(usize, usize)> {
    let bad = || anyhow!("bad size `{s}`");
    match s.split_once(['x', 'X']) {
        Some((r, c)) => Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?)),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

fn run_synth(what: &SynthCommand) -> anyhow::Result<()> {
    let (text, output) = match what {
        SynthCommand::Network {
            kind,
            size: sz,
            lines,
            seed,
            output,
        } => {
            let (a, b) = size(sz)?;
            if a < 2 || b < 2 {
                bail!("size must be at least 2");
            }
            let net = match kind {
                NetworkKind::Metro => synth::metro(a, lines.unwrap_or((a / 12).max(4)), *seed),
                NetworkKind::Grid => synth::grid(a, b, *seed),
                NetworkKind::Ring => synth::ring(a, lines.unwrap_or(4), *seed),
                NetworkKind::Tree => synth::tree(a, *seed),
            };
            (emit_network(&net), output)
        }
        SynthCommand::Shape { name, output } => {
            let shape =
                synth::shape_by_name(name).ok_or_else(|| anyhow!("unknown shape `{name}`"))?;
            (emit_shape(&shape), output)
        }
    };
    match output {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(args) => run(args),
        Command::Synth { what } => run_synth(what).map_err(Failure::Input),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
