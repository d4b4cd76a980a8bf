#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use cablewalk::synth::{generate_scene, Background, CableSpec, Scene, SceneSpec, CABLE_PALETTE};
use cablewalk::Point2;

pub fn cablewalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cablewalk")).args(args).output().expect("spawn cablewalk")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// One horizontal cable from (40.5, 120.5) to (280.5, 120.5) on a light background.
pub fn straight_spec() -> SceneSpec {
    SceneSpec {
        width: 320,
        height: 240,
        cables: vec![CableSpec {
            control_polygon: vec![Point2::new(40.5, 120.5), Point2::new(160.5, 120.5), Point2::new(280.5, 120.5)],
            width_px: 10.0,
            color: CABLE_PALETTE[1],
        }],
        background: Background::Uniform { color: [235, 235, 235] },
        rng_seed: 0,
    }
}

pub const STRAIGHT_SEEDS: [&str; 2] = ["40.5,120.5", "280.5,120.5"];

/// Writes the straight scene as a sample directory and returns it.
pub fn write_straight_scene(dir: &Path) -> Scene {
    let scene = generate_scene(&straight_spec()).unwrap();
    cablewalk::dataset::write_scene(dir, &scene).unwrap();
    scene
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
