mod common;

use std::f64::consts::PI;

use cablewalk::eval::iou;
use cablewalk::geometry::{point_segment_distance, polyline_length};
use cablewalk::model::{
    estimate_thickness, fit_spline, render_mask, sample_spline, SegmentationResult, SegmentedObject, SplineModel,
};
use cablewalk::pipeline::fit_points;
use cablewalk::synth::{generate_scene, random_scene, Background, CableSpec, SceneKind, SceneSpec, CABLE_PALETTE};
use cablewalk::walker::Walk;
use cablewalk::{segment, Mask, PipelineConfig, Point2, WalkerParams};
use common::{random_graph, rng, solid_vertex, walk_along};
use proptest::prelude::*;

fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
    v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
}

fn quarter_circle(n: usize) -> Vec<Point2> {
    (0..n)
        .map(|i| {
            let a = PI / 2.0 * i as f64 / (n - 1) as f64;
            Point2::new(100.0 * a.cos(), 100.0 * a.sin())
        })
        .collect()
}

fn assert_clamped(model: &SplineModel) {
    model.validate().unwrap();
    let p = model.degree;
    let k = &model.knots;
    assert_eq!(k.len(), model.control_points.len() + p + 1);
    assert!(k[..=p].iter().all(|&v| v == 0.0));
    assert!(k[k.len() - p - 1..].iter().all(|&v| v == 1.0));
    assert!(k.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn collinear_points_stay_on_the_line() {
    // Unevenly spaced points on the line through (3, -2) with direction (7, 4.5).
    let data: Vec<Point2> = (0..10)
        .map(|i| {
            let t = i as f64 + (i % 3) as f64 * 0.2;
            Point2::new(3.0 + 7.0 * t, -2.0 + 4.5 * t)
        })
        .collect();
    let model = fit_spline(&data, 3).unwrap();
    assert_clamped(&model);
    let (a, b) = (data[0], data[9]);
    for s in sample_spline(&model, 0.5) {
        let cross = ((b.x - a.x) * (s.y - a.y) - (b.y - a.y) * (s.x - a.x)) / a.distance(b);
        assert!(cross.abs() < 1e-6, "off-line by {cross}");
    }
}

#[test]
fn quarter_circle_fit_is_close() {
    let data = quarter_circle(20);
    let model = fit_spline(&data, 3).unwrap();
    assert_clamped(&model);
    assert!(model.rms_residual(&data) < 0.5);
    let samples = sample_spline(&model, 1.0);
    let length = polyline_length(&samples);
    assert!((length - 50.0 * PI).abs() <= 0.01 * 50.0 * PI, "arc length {length}");
}

#[test]
fn four_points_give_one_bezier_with_exact_ends() {
    let data = pts(&[(0.0, 0.0), (10.0, 20.0), (30.0, 25.0), (50.0, 0.0)]);
    let model = fit_spline(&data, 3).unwrap();
    assert_eq!(model.knots, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    assert_eq!(model.evaluate(0.0), data[0]);
    assert_eq!(model.evaluate(1.0), data[3]);
}

#[test]
fn fit_rejects_bad_input() {
    assert!(fit_spline(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]), 3).is_err());
    assert!(fit_spline(&pts(&[(5.0, 5.0); 6]), 3).is_err());
    assert!(fit_spline(&pts(&[(0.0, 0.0), (f64::NAN, 1.0), (2.0, 0.0), (3.0, 3.0)]), 3).is_err());
}

#[test]
fn straight_spline_sampling() {
    let data: Vec<Point2> = (0..=10).map(|i| Point2::new(20.0 + 10.0 * i as f64, 40.0)).collect();
    let model = fit_spline(&data, 3).unwrap();
    let samples = sample_spline(&model, 1.0);
    assert!(samples.len() >= 101);
    assert_eq!(samples[0], data[0]);
    assert_eq!(*samples.last().unwrap(), data[10]);
    for s in &samples {
        assert!(point_segment_distance(*s, data[0], data[10]) < 1e-6);
    }
}

#[test]
fn straight_mask_matches_stadium_area() {
    let data: Vec<Point2> = (0..=10).map(|i| Point2::new(30.5 + 10.0 * i as f64, 50.5)).collect();
    let mut model = fit_spline(&data, 3).unwrap();
    model.thickness_px = 5.0;
    let mask = render_mask(&model, (200, 100));
    let expected = 500.0 + PI * 2.5 * 2.5;
    assert!((mask.count() as f64 - expected).abs() <= 0.03 * expected, "area {}", mask.count());
    // Clipped at the border, never out of bounds.
    model.control_points.iter_mut().for_each(|p| p.y -= 49.0);
    let clipped = render_mask(&model, (200, 100));
    assert!(clipped.count() > 0 && clipped.count() < mask.count());
}

fn equal_area_walk(areas: &[usize]) -> (Walk, cablewalk::RegionGraph) {
    let vertices = areas.iter().enumerate().map(|(i, &a)| solid_vertex(i as u32, 10.0 * i as f64, 0.0, 0, a)).collect();
    let edges: Vec<(u32, u32)> = (1..areas.len() as u32).map(|i| (i - 1, i)).collect();
    let g = cablewalk::RegionGraph::from_parts(vertices, &edges, 3).unwrap();
    let path: Vec<u32> = (0..areas.len() as u32).collect();
    (walk_along(&g, &path, &WalkerParams::default()), g)
}

#[test]
fn thickness_examples() {
    let (w, g) = equal_area_walk(&[100, 100, 100]);
    assert_eq!(estimate_thickness(&w, &g), 10.0);
    let (w, g) = equal_area_walk(&[64, 144]);
    assert_eq!(estimate_thickness(&w, &g), 10.0);
    let (w, g) = equal_area_walk(&[0, 0]);
    assert_eq!(estimate_thickness(&w, &g), 1.0);
}

fn tube_scene(width: f64) -> cablewalk::synth::Scene {
    generate_scene(&SceneSpec {
        width: 640,
        height: 480,
        cables: vec![CableSpec {
            control_polygon: pts(&[(90.0, 380.0), (250.0, 300.0), (400.0, 180.0), (560.0, 100.0)]),
            width_px: width,
            color: CABLE_PALETTE[4],
        }],
        background: Background::Uniform { color: [240, 240, 235] },
        rng_seed: 0,
    })
    .unwrap()
}

#[test]
fn tube_width_is_recovered() {
    let scene = tube_scene(12.0);
    let out = segment(&scene.image, &scene.seed_points(), &PipelineConfig::default()).unwrap();
    let walk = &out.run.walks[0];
    let spec_estimate = estimate_thickness(walk, &out.graph);
    assert!((8.0..=18.0).contains(&spec_estimate), "sqrt-area estimate {spec_estimate}");
    let fitted = out.result.objects[0].spline.thickness_px;
    assert!((8.0..=18.0).contains(&fitted), "pipeline estimate {fitted}");
}

#[test]
fn residual_stays_below_region_spacing() {
    for seed in 0..6 {
        let kind = if seed % 2 == 0 { SceneKind::Homogeneous } else { SceneKind::Crossing };
        let scene = generate_scene(&random_scene(kind, seed, 640, 480)).unwrap();
        let config = PipelineConfig::default();
        let out = segment(&scene.image, &scene.seed_points(), &config).unwrap();
        let spacing = out.map.mean_spacing();
        for (walk, object) in out.run.walks.iter().zip(&out.result.objects) {
            let points = fit_points(walk, &out.graph, &out.seeds, config.spline.anchor_seeds);
            assert_clamped(&object.spline);
            let rms = object.spline.rms_residual(&points);
            assert!(rms <= spacing, "scene {seed}: rms {rms} > spacing {spacing}");
        }
    }
}

#[test]
fn union_is_or_of_object_masks() {
    let scene = generate_scene(&random_scene(SceneKind::Homogeneous, 7, 640, 480)).unwrap();
    let out = segment(&scene.image, &scene.seed_points(), &PipelineConfig::default()).unwrap();
    let r = &out.result;
    for i in 0..r.union.as_slice().len() {
        assert_eq!(r.union.as_slice()[i], r.objects.iter().any(|o| o.mask.as_slice()[i]));
    }
    let rebuilt = SegmentationResult::new(r.width, r.height, r.objects.clone()).unwrap();
    assert_eq!(rebuilt.union, r.union);
    assert!(iou(&r.union, &scene.truth.union).unwrap() > 0.7);
}

#[test]
fn empty_result_has_empty_union() {
    let r = SegmentationResult::new(10, 10, Vec::new()).unwrap();
    assert!(r.union.is_empty());
    let bad = SegmentedObject {
        walk_id: 0,
        seed_start: 0,
        seed_end: 1,
        spline: fit_spline(&quarter_circle(5), 3).unwrap(),
        mask: Mask::new(3, 3),
    };
    assert!(SegmentationResult::new(10, 10, vec![bad]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_moves_control_points_exactly(
        seed in 0u64..100_000,
        n in 4usize..40,
        tx in -500i32..500,
        ty in -500i32..500,
    ) {
        use rand::Rng;
        let mut r = rng(seed);
        let data: Vec<Point2> = (0..n)
            .map(|i| Point2::new(i as f64 * 7.0 + r.random_range(-3.0..3.0), r.random_range(-40.0..40.0)))
            .collect();
        let (tx, ty) = (tx as f64 * 0.25, ty as f64 * 0.25);
        let moved: Vec<Point2> = data.iter().map(|p| Point2::new(p.x + tx, p.y + ty)).collect();
        let a = fit_spline(&data, 3).unwrap();
        let b = fit_spline(&moved, 3).unwrap();
        prop_assert_eq!(&a.knots, &b.knots);
        for (p, q) in a.control_points.iter().zip(&b.control_points) {
            prop_assert!((q.x - p.x - tx).abs() <= 1e-9 && (q.y - p.y - ty).abs() <= 1e-9);
        }
    }

    #[test]
    fn samples_respect_the_gap(seed in 0u64..100_000, n in 4usize..30, gap in 0.25f64..4.0) {
        use rand::Rng;
        let mut r = rng(seed);
        let data: Vec<Point2> = (0..n).map(|_| Point2::new(r.random_range(0.0..300.0), r.random_range(0.0..300.0))).collect();
        let Ok(model) = fit_spline(&data, 3) else { return Ok(()) };
        assert_clamped(&model);
        let s = sample_spline(&model, gap);
        prop_assert_eq!(s[0], model.evaluate(0.0));
        prop_assert_eq!(*s.last().unwrap(), model.evaluate(1.0));
        for w in s.windows(2) {
            prop_assert!(w[0].distance(w[1]) <= gap + 1e-9);
        }
    }

    #[test]
    fn masks_stay_inside_the_image(seed in 0u64..100_000, w in 5u32..80, h in 5u32..80, t in 1.0f64..20.0) {
        let rg = random_graph(&mut rng(seed), 6, 0);
        let data: Vec<Point2> = rg.graph.vertices().iter().map(|v| Point2::new(v.centroid.x - 60.0, v.centroid.y - 60.0)).collect();
        let Ok(mut model) = fit_spline(&data, 3) else { return Ok(()) };
        model.thickness_px = t;
        let mask = render_mask(&model, (w, h));
        prop_assert_eq!(mask.dims(), (w, h));
    }
}
