//! Subcommand definitions and their implementations.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use cablewalk::dataset::{list_samples, read_sample, write_scene};
use cablewalk::eval::{evaluate_cases, EvalCase, EvalReport};
use cablewalk::synth::{generate_scene, random_scene, SceneKind, SceneSpec};
use cablewalk::{segment, Image, PipelineConfig, Point2};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{exit_code, CliError};
use crate::options::PipelineArgs;
use crate::output::{to_json, write_segmentation, write_walks};
use crate::seeds::{parse_seed, read_seeds_file};

#[derive(Debug, Parser)]
#[command(name = "cablewalk", version, about = "Segment cables and other thin deformable objects from endpoint seeds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment the objects between seed points in one image.
    Segment(SegmentArgs),
    /// Run the pipeline over a labeled dataset and report IoU.
    Evaluate(EvaluateArgs),
    /// Generate synthetic scenes with ground truth.
    Synth(SynthArgs),
    /// Serve the labeling HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub image: PathBuf,
    /// Seed point, repeatable.
    #[arg(long = "seed", value_name = "X,Y", value_parser = parse_seed)]
    pub seed: Vec<Point2>,
    /// JSON seed file.
    #[arg(long, value_name = "PATH")]
    pub seeds: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Include per-step scores in walks.json and print stage timings.
    #[arg(long)]
    pub verbose: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset root: sample directories, or a single sample directory.
    pub dataset: PathBuf,
    /// Report and prediction directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub verbose: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Homogeneous,
    Crossing,
    SelfCrossing,
    Adversarial,
}

impl From<KindArg> for SceneKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Homogeneous => SceneKind::Homogeneous,
            KindArg::Crossing => SceneKind::Crossing,
            KindArg::SelfCrossing => SceneKind::SelfCrossing,
            KindArg::Adversarial => SceneKind::Adversarial,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "homogeneous")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// RNG seed of the first scene; scene i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 320)]
    pub width: u32,
    #[arg(long, default_value_t = 240)]
    pub height: u32,
    /// Render this scene description instead of random scenes.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory accepted sessions are written to.
    #[arg(long, value_name = "DIR", default_value = "sessions")]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Segment(a) => cmd_segment(&a),
        Command::Evaluate(a) => cmd_evaluate(&a).map(|_| ()),
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
        Command::Serve(a) => cmd_serve(&a),
    }
}

fn load_image(path: &Path) -> Result<Image, CliError> {
    Image::open(path).map_err(|e| CliError::image(format!("{}: {e}", path.display())))
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<(), CliError> {
    let config = args.pipeline.resolve()?;
    let image = load_image(&args.image)?;
    let mut seeds = match &args.seeds {
        Some(path) => read_seeds_file(path)?,
        None => Vec::new(),
    };
    seeds.extend(args.seed.iter().copied());

    let output = segment(&image, &seeds, &config).map_err(CliError::pipeline)?;
    if args.verbose {
        eprintln!("{:#?}", output.timings);
    }
    if !output.any_closed() {
        write_walks(&args.out, &output, &config, args.verbose).map_err(CliError::pipeline)?;
        return Err(CliError::new(
            exit_code::NO_WALK_CLOSED,
            format!("no walk connected two of the {} seeds", seeds.len()),
        ));
    }
    write_segmentation(&args.out, &image, &output, &output.result, &config, args.verbose)
        .map_err(CliError::pipeline)?;
    println!("{} object(s) from {} seeds written to {}", output.result.objects.len(), seeds.len(), args.out.display());
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport, CliError> {
    let config = args.pipeline.resolve()?;
    let dirs =
        list_samples(&args.dataset).map_err(|e| CliError::generic(format!("{}: {e}", args.dataset.display())))?;
    if dirs.is_empty() {
        return Err(CliError::generic(format!("no samples under {}", args.dataset.display())));
    }
    let predictions = args.out.join("predictions");
    let mut runs = Vec::with_capacity(dirs.len());
    for dir in &dirs {
        let sample = read_sample(dir).map_err(|e| CliError::image(format!("{}: {e}", dir.display())))?;
        let output = segment(&sample.image, &sample.seed_points(), &config)
            .map_err(|e| CliError::pipeline(e).context(&sample.name))?;
        if args.verbose {
            eprintln!("{}: {} object(s), {:.1} ms", sample.name, output.result.objects.len(), output.timings.total_ms);
        }
        write_segmentation(&predictions.join(&sample.name), &sample.image, &output, &output.result, &config, false)
            .map_err(CliError::pipeline)?;
        runs.push((sample, output));
    }
    let cases: Vec<EvalCase<'_>> = runs
        .iter()
        .map(|(sample, output)| EvalCase {
            name: &sample.name,
            result: &output.result,
            truth: &sample.truth,
            timings: output.timings,
        })
        .collect();
    let report = evaluate_cases(&cases, config.execution).map_err(CliError::pipeline)?;
    let table = report.to_table();
    fs::write(args.out.join("report.json"), to_json(&report).map_err(CliError::pipeline)?)?;
    fs::write(args.out.join("report.txt"), &table)?;
    print!("{table}");
    Ok(report)
}

fn kind_name(kind: SceneKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| format!("{kind:?}").to_lowercase())
}

fn write_scene_dir(dir: &Path, spec: &SceneSpec) -> Result<(), CliError> {
    let scene = generate_scene(spec).map_err(CliError::config)?;
    write_scene(dir, &scene).map_err(CliError::pipeline)?;
    fs::write(dir.join("scene.json"), to_json(spec).map_err(CliError::pipeline)?)?;
    Ok(())
}

/// Returns the sample directories written.
pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<PathBuf>, CliError> {
    if let Some(path) = &args.spec {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let spec: SceneSpec = serde_json::from_str(&text).map_err(CliError::config)?;
        write_scene_dir(&args.out, &spec)?;
        println!("wrote {}", args.out.display());
        return Ok(vec![args.out.clone()]);
    }
    let kind = SceneKind::from(args.kind);
    let mut dirs = Vec::new();
    for i in 0..args.count {
        let seed = args.seed + i;
        let dir = args.out.join(format!("{}_{seed:04}", kind_name(kind)));
        write_scene_dir(&dir, &random_scene(kind, seed, args.width, args.height))?;
        dirs.push(dir);
    }
    println!("wrote {} scene(s) to {}", dirs.len(), args.out.display());
    Ok(dirs)
}

pub fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let config: PipelineConfig = args.pipeline.resolve()?;
    let addr: SocketAddr =
        format!("{}:{}", args.host, args.port).parse().map_err(|e| CliError::generic(format!("bad address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(crate::serve::serve(addr, crate::serve::AppState::new(config, args.out.clone())))
        .map_err(|e| CliError::generic(e.to_string()))
}
