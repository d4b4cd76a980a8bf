//! Prints per-scene results on a synthetic suite.
//!
//! `cargo run --release --example suite_report -- homogeneous 50`

use cablewalk::eval::iou;
use cablewalk::synth::{generate_scene, random_scene, SceneKind};
use cablewalk::{segment, PipelineConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("crossing") => SceneKind::Crossing,
        Some("self_crossing") => SceneKind::SelfCrossing,
        Some("adversarial") => SceneKind::Adversarial,
        _ => SceneKind::Homogeneous,
    };
    let count: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let config = match args.next() {
        Some(path) => PipelineConfig::load(path.as_ref()).expect("config"),
        None => PipelineConfig::default(),
    };
    let mut total = 0.0;
    for seed in 0..count {
        let scene = generate_scene(&random_scene(kind, seed, 640, 480)).expect("scene");
        let out = segment(&scene.image, &scene.seed_points(), &config).expect("segment");
        if let Ok(dir) = std::env::var("OVERLAY_DIR") {
            let overlay = cablewalk::pipeline::render_overlay(&scene.image, &out);
            overlay.save_png(format!("{dir}/overlay_{seed}.png")).expect("overlay");
        }
        let u = iou(&out.result.union, &scene.truth.union).unwrap();
        total += u;
        let pairs: Vec<String> = out
            .result
            .objects
            .iter()
            .map(|o| {
                let best = scene.truth.cables.iter().map(|c| iou(&o.mask, &c.mask).unwrap()).fold(0.0, f64::max);
                format!("{}-{} w{:.1} iou{:.2}", o.seed_start, o.seed_end, o.spline.thickness_px, best)
            })
            .collect();
        let widths: Vec<f64> = random_scene(kind, seed, 640, 480).cables.iter().map(|c| c.width_px).collect();
        println!(
            "{seed:3} cables {} widths {:?} union {:.3} {:6.0} ms steps {} [{}]",
            scene.truth.cable_count(),
            widths,
            u,
            out.timings.total_ms,
            out.run.total_steps,
            pairs.join(", ")
        );
    }
    println!("mean union IoU {:.3}", total / count as f64);
}
