//! Interactive delineation: connect selected network nodes, score the
//! result by sinuosity, simplify, and keep accepted boundaries.

mod connect;
mod session;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Polyline};
use crate::scalar::Scalar;

pub use connect::{connect_nodes, shortest_path, CandidateLine, PathResult};
pub use session::{AcceptedLine, DelineationSession, Operation};

/// Traffic-light usability class. Ordered `Red < Yellow < Green`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficLight {
    Red,
    Yellow,
    Green,
}

impl TrafficLight {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficLight::Red => "red",
            TrafficLight::Yellow => "yellow",
            TrafficLight::Green => "green",
        }
    }
}

/// Endpoint distance over path length; 1 for a straight line.
pub fn sinuosity<T: Scalar>(p: &Polyline<T>) -> Result<T> {
    let len = p.length();
    if !(len > T::zero()) {
        return Err(Error::UndefinedMeasure("sinuosity of a zero-length line".into()));
    }
    let s = p.start().distance(p.end()) / len;
    Ok(s.min(T::one()))
}

/// Thirds of `[0, 1]`, straighter is greener. Upper bounds are inclusive.
pub fn classify_sinuosity<T: Scalar>(s: T) -> Result<TrafficLight> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::Domain(format!("sinuosity {s} outside [0, 1]")));
    }
    let third = T::one() / T::lit(3.0);
    Ok(if s <= third {
        TrafficLight::Red
    } else if s <= third + third {
        TrafficLight::Yellow
    } else {
        TrafficLight::Green
    })
}

/// Douglas-Peucker simplification. Endpoints are always kept; a vertex is
/// dropped only if it lies within `tolerance` of the simplified segment.
pub fn simplify_line<T: Scalar>(p: &Polyline<T>, tolerance: T) -> Polyline<T> {
    let v = p.vertices();
    let n = v.len();
    if n <= 2 || !(tolerance > T::zero()) {
        return p.clone();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let (mut worst, mut at) = (T::neg_infinity(), a);
        for i in a + 1..b {
            let d = point_segment_distance(v[i], v[a], v[b]);
            if d > worst {
                worst = d;
                at = i;
            }
        }
        if worst > tolerance {
            keep[at] = true;
            stack.push((a, at));
            stack.push((at, b));
        }
    }
    let pts = v.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
    // a closed ring can collapse onto its endpoints; keep the input then
    Polyline::new(p.id, pts).unwrap_or_else(|_| p.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xy: &[(f64, f64)]) -> Polyline<f64> {
        Polyline::from_xy(0, xy).unwrap()
    }

    #[test]
    fn sinuosity_examples() {
        assert_eq!(sinuosity(&line(&[(0.0, 0.0), (10.0, 0.0)])).unwrap(), 1.0);
        let s = sinuosity(&line(&[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)])).unwrap();
        assert!((s - 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(sinuosity(&line(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)])).unwrap(), 0.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_sinuosity(1.0).unwrap(), TrafficLight::Green);
        assert_eq!(classify_sinuosity(0.5).unwrap(), TrafficLight::Yellow);
        assert_eq!(classify_sinuosity(5.0 / 7.0).unwrap(), TrafficLight::Green);
        assert_eq!(classify_sinuosity(1.0 / 3.0).unwrap(), TrafficLight::Red);
        assert_eq!(classify_sinuosity(0.0).unwrap(), TrafficLight::Red);
        assert!(matches!(classify_sinuosity(1.01), Err(Error::Domain(_))));
        assert!(matches!(classify_sinuosity(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn simplify_examples() {
        let p = line(&[(0.0, 0.0), (5.0, 0.01), (10.0, 0.0)]);
        assert_eq!(simplify_line(&p, 0.1).vertices().len(), 2);
        assert_eq!(simplify_line(&p, 0.001).vertices().len(), 3);
        assert_eq!(simplify_line(&p, 0.0), p);
    }
}
