//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Tolerances are pinned below.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use boundline::assessment::{assess_lines, confusion_series, AssessmentConfig, GridSpec};
use boundline::contours::{detect_contours, CueParams};
use boundline::delineation::{connect_nodes, simplify_line, sinuosity, DelineationSession};
use boundline::fixtures::{parcels, two_color_split};
use boundline::geometry::Polyline;
use boundline::pipeline::{generate_network, PipelineParams};
use boundline::raster::{rgb_to_lab, GeoTransform, ImageGrid};
use boundline::superpixels::{slic, SlicParams};
use boundline::vectornet::{buffer_filter, clean_topology};
use boundline::Error;
use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIRST_BAND_MIN_PCT: f64 = 90.0;
const PIPELINE_MAX_SECS: f64 = 60.0;
const MAX_DIM: usize = 1000;
const EXTENT_TOL_COARSE_PX: f64 = 1.0;
const ADHERENCE_MIN: f64 = 0.95;
const ADHERENCE_PX: usize = 1;
const LENGTH_REL_TOL: f64 = 1e-9;
const STEINER_FACTOR: f64 = 2.0;
const GEOM_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok { Ok(msg) } else { Err(msg) }
}

fn synthetic_pipeline() -> Outcome {
    let fx = parcels(512, 0.05, 6, 7);
    let t0 = Instant::now();
    let run = generate_network(&fx.image, &PipelineParams::default()).map_err(|e| e.to_string())?;
    let mut s = DelineationSession::new(run.network);
    for b in &fx.boundaries {
        let a = s.network.nearest_node(b.start()).ok_or("empty network")?;
        let z = s.network.nearest_node(b.end()).ok_or("empty network")?;
        if a == z {
            continue;
        }
        s.connect(&[a, z], true).map_err(|e| e.to_string())?;
        s.accept_candidate().map_err(|e| e.to_string())?;
    }
    let delineated: Vec<_> = s.accepted.iter().flat_map(|a| a.parts.clone()).collect();
    let cfg = AssessmentConfig::new(GridSpec::new(fx.image.transform, 512, 512).map_err(|e| e.to_string())?);
    let series = assess_lines(&delineated, &fx.boundaries, &cfg).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let pct = series.band_percent(0);
    check(
        pct >= FIRST_BAND_MIN_PCT && secs < PIPELINE_MAX_SECS,
        format!("{pct:.1}% of TP pixels in 0-0.2 m (>= {FIRST_BAND_MIN_PCT}), {secs:.1} s (< {PIPELINE_MAX_SECS})"),
    )
}

fn size_cap() -> Outcome {
    let t = GeoTransform::north_up(500.0, 800.0, 0.05);
    let img = ImageGrid::from_fn(1200, 1200, t, |c, r| if (c / 300 + r / 300) % 2 == 0 { [30, 60, 90] } else { [200, 180, 20] })
        .map_err(|e| e.to_string())?;
    let params = CueParams { radii: vec![3], weights: vec![[1.0, 1.0, 1.0, 0.0]], spectral: false, ..Default::default() };
    let res = detect_contours(&rgb_to_lab(&img), &params).map_err(|e| e.to_string())?;
    let g = &res.gpb;
    let (ex, ey) = img.extent();
    let (cx, cy) = (g.transform.pixel_size_x * g.width as f64, -g.transform.pixel_size_y * g.height as f64);
    let coarse = g.transform.gsd();
    let dev = (ex - cx).abs().max((ey - cy).abs()) / coarse;
    check(
        g.width.max(g.height) <= MAX_DIM && dev <= EXTENT_TOL_COARSE_PX,
        format!("1200x1200 -> {}x{}, extent deviation {dev:.3} coarse px", g.width, g.height),
    )
}

fn slic_adherence() -> Outcome {
    let (w, h, split) = (200, 120, 87);
    let lab = rgb_to_lab(&two_color_split(w, h, split, 0.05).image);
    let p = SlicParams::default();
    let a = slic(&lab, &p).map_err(|e| e.to_string())?;
    let b = slic(&lab, &p).map_err(|e| e.to_string())?;
    // true edge pixels: the two columns either side of the crack
    let mut hit = 0;
    let mut total = 0;
    for r in 0..h {
        for c in [split - 1, split] {
            total += 1;
            let near = (c.saturating_sub(ADHERENCE_PX + 1)..=(c + ADHERENCE_PX).min(w - 2))
                .any(|k| a.at(k, r) != a.at(k + 1, r));
            hit += near as usize;
        }
    }
    let frac = hit as f64 / total as f64;
    check(
        frac >= ADHERENCE_MIN && a == b,
        format!("{:.1}% edge pixels within {ADHERENCE_PX} px of a superpixel boundary, reruns identical: {}", 100.0 * frac, a == b),
    )
}

fn path_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..200 {
        let net = random_network(&mut rng, 10);
        let n = net.nodes.len();
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        match (connect_nodes(&net, &[a, b]), brute_shortest(&net, a, b)) {
            (Ok(c), Some(best)) if (c.length() - best).abs() <= LENGTH_REL_TOL * best.max(1.0) => {}
            (Err(Error::NoPath(_)), None) => {}
            (got, want) => return Err(format!("shortest path trial {trial}: {got:?} vs {want:?}")),
        }
    }
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 50 {
        let net = random_network(&mut rng, 8);
        let n = net.nodes.len();
        if n < 4 {
            continue;
        }
        let k = rng.random_range(3..=4.min(n));
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let terms = &ids[..k];
        let Some(opt) = brute_steiner(&net, terms) else { continue };
        let cand = connect_nodes(&net, terms).map_err(|e| e.to_string())?;
        let tree: f64 = cand.edges.iter().map(|&e| net.edges[e].length).sum();
        worst = worst.max(tree / opt.max(1e-12));
        done += 1;
    }
    check(
        worst <= STEINER_FACTOR + 1e-9,
        format!("200 shortest paths exact, 50 Steiner instances worst ratio {worst:.3} (<= {STEINER_FACTOR})"),
    )
}

fn assessment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let grid = GridSpec::new(GeoTransform::north_up(0.0, 1.6, 0.05), 32, 32).map_err(|e| e.to_string())?;
    let cfg = AssessmentConfig::new(grid);
    let mut trials = 0;
    while trials < 20 {
        let (dd, rd) = (rng.random_range(0.0..0.1), rng.random_range(0.005..0.1));
        let d = random_mask(&mut rng, 32, 32, dd);
        let r = random_mask(&mut rng, 32, 32, rd);
        if r.count() == 0 {
            continue;
        }
        let s = confusion_series(&d, &r, &cfg).map_err(|e| e.to_string())?;
        if s.counts != brute_confusion(&d, &r, &cfg) {
            return Err(format!("trial {trials}: counts differ from all-pairs oracle"));
        }
        if !s.counts.windows(2).all(|w| w[0].tp <= w[1].tp) {
            return Err(format!("trial {trials}: TP not monotone"));
        }
        trials += 1;
    }
    Ok("20 random 32x32 pairs match the all-pairs oracle exactly, TP monotone".into())
}

fn geometry_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for i in 0..1000 {
        let p = random_polyline(&mut rng, 12);
        let s = sinuosity(&p).map_err(|e| e.to_string())?;
        if !(0.0..=1.0).contains(&s) {
            return Err(format!("sinuosity {s} out of range on polyline {i}"));
        }
        if p.vertices().len() > 2 && s >= 1.0 - GEOM_TOL {
            let a = p.start();
            let b = p.end();
            let inline = p.vertices().iter().all(|v| boundline::geometry::point_segment_distance(*v, a, b) < 1e-6);
            if !inline {
                return Err(format!("sinuosity 1 on a bent polyline {i}"));
            }
        }
        let q = random_straight_polyline(&mut rng, 8);
        let sq = sinuosity(&q).map_err(|e| e.to_string())?;
        if (sq - 1.0).abs() > GEOM_TOL {
            return Err(format!("straight polyline {i} has sinuosity {sq}"));
        }
    }
    for i in 0..1000 {
        let p = random_polyline(&mut rng, 30);
        let tol = rng.random_range(0.0..20.0);
        let q = simplify_line(&p, tol);
        let (pv, qv) = (p.vertices(), q.vertices());
        let mut it = pv.iter();
        let subseq = qv.iter().all(|v| it.any(|x| x == v));
        let ends = qv[0] == pv[0] && qv.last() == pv.last();
        let dev = pv.iter().all(|v| q.distance_to(*v) <= tol + GEOM_TOL);
        let idem = simplify_line(&q, tol) == q;
        if !(subseq && ends && dev && idem) {
            return Err(format!("Douglas-Peucker case {i}: subseq {subseq} ends {ends} deviation {dev} idempotent {idem}"));
        }
    }
    for i in 0..300 {
        let lines = random_lattice_lines(&mut rng, 8);
        let dangle = rng.random_range(0.0..1.5);
        let once = clean_topology(&lines, 0.05, dangle);
        if clean_topology(&once, 0.05, dangle) != once {
            return Err(format!("clean_topology not idempotent on case {i}"));
        }
    }
    for i in 0..300 {
        let slic_lines: Vec<Polyline<f64>> = (0..rng.random_range(1..5)).map(|_| random_polyline(&mut rng, 6)).collect();
        let gpb: Vec<Polyline<f64>> = (0..rng.random_range(1..4)).map(|_| random_polyline(&mut rng, 4)).collect();
        let radius = rng.random_range(0.5..30.0);
        for l in buffer_filter(&slic_lines, &gpb, radius).lines {
            for p in l.sample(0.05) {
                let d = distance_to_lines(p, &gpb);
                if d > radius + 1e-6 {
                    return Err(format!("buffer case {i}: retained sample at {d} > {radius}"));
                }
            }
        }
    }
    Ok("1000 sinuosity, 1000 Douglas-Peucker, 300 clean_topology idempotence, 300 buffer dense-sampling cases".into())
}

fn buffer_examples() -> Outcome {
    let gpb = vec![Polyline::from_xy(0, &[(0.0, -20.0), (0.0, 20.0)]).unwrap()];
    let six = Polyline::from_xy(1, &[(6.0, -2.0), (6.0, 2.0)]).unwrap();
    let three = Polyline::from_xy(2, &[(3.0, -2.0), (3.0, 2.0)]).unwrap();
    let out = buffer_filter(&[six, three.clone()], &gpb, 5.0).lines;
    check(
        out.len() == 1 && out[0].vertices() == three.vertices(),
        format!("radius 5 m keeps {} of 2 lines (6 m removed, 3 m kept)", out.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("synthetic parcels: step I + scripted delineation", synthetic_pipeline),
        ("size cap: oversized input reduced", size_cap),
        ("SLIC adherence and determinism", slic_adherence),
        ("shortest path and Steiner oracles", path_oracles),
        ("assessment oracle", assessment_oracle),
        ("geometry invariant suites", geometry_suites),
        ("buffer radius semantics", buffer_examples),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
