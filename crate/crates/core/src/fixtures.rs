//! Synthetic orthoimages with known boundaries, for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, Polyline};
use crate::raster::{GeoTransform, ImageGrid};

/// Image plus the boundary segments it was painted from, in world meters.
pub struct Fixture {
    pub image: ImageGrid,
    /// Boundary pieces between junctions and image-border ends.
    pub boundaries: Vec<Polyline<f64>>,
}

const PARCEL_COLORS: [[u8; 3]; 6] = [
    [168, 148, 92],
    [92, 140, 70],
    [196, 182, 140],
    [60, 98, 52],
    [140, 110, 80],
    [120, 160, 110],
];

fn noisy(base: [u8; 3], rng: &mut ChaCha8Rng, amp: i32) -> [u8; 3] {
    base.map(|v| (v as i32 + rng.random_range(-amp..=amp)).clamp(0, 255) as u8)
}

/// Six parcels: a full-height vertical boundary at 40% of the width,
/// the left strip split at 35% and 68% of the height, the right strip at
/// 29% and 59%, so the T-junctions on the vertical line are offset.
/// Boundaries follow pixel edges exactly. Pixel values carry seeded
/// uniform noise of +-`noise`.
pub fn parcels(size: usize, gsd: f64, noise: u8, seed: u64) -> Fixture {
    let t = GeoTransform::north_up(1000.0, 2000.0 + size as f64 * gsd, gsd);
    let v = size * 2 / 5;
    let left = [size * 35 / 100, size * 68 / 100];
    let right = [size * 29 / 100, size * 59 / 100];
    let parcel = |c: usize, r: usize| -> usize {
        if c < v {
            left.iter().filter(|&&y| r >= y).count()
        } else {
            3 + right.iter().filter(|&&y| r >= y).count()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(size * size * 3);
    for r in 0..size {
        for c in 0..size {
            data.extend_from_slice(&noisy(PARCEL_COLORS[parcel(c, r)], &mut rng, noise as i32));
        }
    }
    let image = ImageGrid::new(size, size, data, t).expect("fixture dimensions");

    let corner = |cx: usize, cy: usize| t.corner_to_world(cx as f64, cy as f64);
    let seg = |a: Point<f64>, b: Point<f64>| Polyline::new(0, vec![a, b]).unwrap();
    let mut cuts: Vec<usize> = vec![0, size];
    cuts.extend(left);
    cuts.extend(right);
    cuts.sort_unstable();
    let mut boundaries: Vec<Polyline<f64>> = cuts.windows(2).map(|w| seg(corner(v, w[0]), corner(v, w[1]))).collect();
    boundaries.extend(left.iter().map(|&y| seg(corner(0, y), corner(v, y))));
    boundaries.extend(right.iter().map(|&y| seg(corner(v, y), corner(size, y))));
    let boundaries = boundaries.into_iter().enumerate().map(|(i, l)| l.with_id(i as u64)).collect();
    Fixture { image, boundaries }
}

/// Two colors split at column `split`.
pub fn two_color_split(width: usize, height: usize, split: usize, gsd: f64) -> Fixture {
    let t = GeoTransform::north_up(0.0, height as f64 * gsd, gsd);
    let image = ImageGrid::from_fn(width, height, t, |c, _| if c < split { [200, 60, 40] } else { [40, 90, 200] })
        .expect("fixture dimensions");
    let line = Polyline::new(0, vec![t.corner_to_world(split as f64, 0.0), t.corner_to_world(split as f64, height as f64)]).unwrap();
    Fixture { image, boundaries: vec![line] }
}

/// Square image with a dark disc on a light background.
pub fn ring(size: usize, radius: f64, gsd: f64) -> ImageGrid {
    let t = GeoTransform::north_up(0.0, size as f64 * gsd, gsd);
    let c = size as f64 / 2.0;
    ImageGrid::from_fn(size, size, t, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
        if (dx * dx + dy * dy).sqrt() < radius {
            [50, 60, 70]
        } else {
            [220, 210, 190]
        }
    })
    .expect("fixture dimensions")
}

/// Uniform image.
pub fn constant(width: usize, height: usize, gsd: f64, rgb: [u8; 3]) -> ImageGrid {
    let t = GeoTransform::north_up(0.0, height as f64 * gsd, gsd);
    ImageGrid::from_fn(width, height, t, |_, _| rgb).expect("fixture dimensions")
}
