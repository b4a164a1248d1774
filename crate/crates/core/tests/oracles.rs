mod common;

use boundline::assessment::{confusion_series, squared_distance_pixels, AssessmentConfig, GridSpec};
use boundline::delineation::connect_nodes;
use boundline::raster::GeoTransform;
use boundline::Error;
use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn shortest_path_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let net = random_network(&mut rng, 10);
        let n = net.nodes.len();
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        match (connect_nodes(&net, &[a, b]), brute_shortest(&net, a, b)) {
            (Ok(c), Some(best)) => {
                assert!((c.length() - best).abs() <= 1e-9 * best.max(1.0), "{} vs {best}", c.length());
                assert_eq!(c.parts[0].start(), net.nodes[a].point);
                assert_eq!(c.parts[0].end(), net.nodes[b].point);
            }
            (Err(Error::NoPath(pairs)), None) => assert_eq!(pairs, vec![(a, b)]),
            (got, want) => panic!("mismatch: {got:?} vs {want:?}"),
        }
    }
}

#[test]
fn steiner_within_twice_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
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
        let Some(opt) = brute_steiner(&net, terms) else {
            assert!(matches!(connect_nodes(&net, terms), Err(Error::NoPath(_))));
            continue;
        };
        let cand = connect_nodes(&net, terms).unwrap();
        let tree: f64 = cand.edges.iter().map(|&e| net.edges[e].length).sum();
        assert!(tree <= 2.0 * opt + 1e-9, "{tree} > 2 x {opt}");
        assert!(tree + 1e-9 >= opt);
        done += 1;
    }
}

#[test]
fn distance_transform_matches_all_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let density = rng.random_range(0.005..0.2);
        let m = random_mask(&mut rng, 32, 32, density);
        let Some(fast) = squared_distance_pixels(&m) else { continue };
        let slow = brute_sq_distances(&m);
        for (f, s) in fast.iter().zip(slow) {
            assert_eq!(*f, s.unwrap() as f64);
        }
    }
}

#[test]
fn confusion_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let grid = GridSpec::new(GeoTransform::north_up(0.0, 1.6, 0.05), 32, 32).unwrap();
    let cfg = AssessmentConfig::new(grid);
    let mut trials = 0;
    while trials < 20 {
        let (dd, rd) = (rng.random_range(0.0..0.1), rng.random_range(0.005..0.1));
        let d = random_mask(&mut rng, 32, 32, dd);
        let r = random_mask(&mut rng, 32, 32, rd);
        if r.count() == 0 {
            continue;
        }
        let s = confusion_series(&d, &r, &cfg).unwrap();
        assert_eq!(s.counts, brute_confusion(&d, &r, &cfg));
        assert!(s.counts.windows(2).all(|w| w[0].tp <= w[1].tp && w[0].fp >= w[1].fp));
        assert_eq!(s.matched_tp(), s.counts.last().unwrap().tp);
        trials += 1;
    }
}
