//! Minimal GeoJSON reading and writing for line layers and networks.
//!
//! Only what the toolkit exchanges is supported: `LineString` and
//! `MultiLineString` features (reading also accepts bare geometries and
//! single features), and `Point` features for network nodes.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};
use crate::scalar::Scalar;
use crate::vectornet::LineNetwork;

fn coords<T: Scalar>(l: &Polyline<T>) -> Value {
    Value::Array(
        l.vertices()
            .iter()
            .map(|p| json!([p.x.as_f64(), p.y.as_f64()]))
            .collect(),
    )
}

/// `LineString` for one part, `MultiLineString` otherwise.
pub fn line_geometry<T: Scalar>(parts: &[Polyline<T>]) -> Value {
    if parts.len() == 1 {
        json!({"type": "LineString", "coordinates": coords(&parts[0])})
    } else {
        json!({
            "type": "MultiLineString",
            "coordinates": parts.iter().map(coords).collect::<Vec<_>>(),
        })
    }
}

pub fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({"type": "Feature", "geometry": geometry, "properties": properties})
}

pub fn feature_collection(features: Vec<Value>) -> Value {
    json!({"type": "FeatureCollection", "features": features})
}

/// Plain line layer; each feature carries its polyline id.
pub fn lines_to_geojson<T: Scalar>(lines: &[Polyline<T>]) -> Value {
    feature_collection(
        lines
            .iter()
            .map(|l| {
                let mut props = Map::new();
                props.insert("id".into(), json!(l.id));
                feature(line_geometry(std::slice::from_ref(l)), props)
            })
            .collect(),
    )
}

/// Nodes as `Point` features with `node_id`, then edges as `LineString`
/// features with `edge_id`, `node_a`, `node_b` and `length_m`.
pub fn network_to_geojson<T: Scalar>(net: &LineNetwork<T>) -> Value {
    let nodes = net.nodes.iter().map(|n| {
        let mut props = Map::new();
        props.insert("node_id".into(), json!(n.id));
        feature(
            json!({"type": "Point", "coordinates": [n.point.x.as_f64(), n.point.y.as_f64()]}),
            props,
        )
    });
    let edges = net.edges.iter().map(|e| {
        let mut props = Map::new();
        props.insert("edge_id".into(), json!(e.id));
        props.insert("node_a".into(), json!(e.node_a));
        props.insert("node_b".into(), json!(e.node_b));
        props.insert("length_m".into(), json!(e.length.as_f64()));
        feature(line_geometry(std::slice::from_ref(&e.geometry)), props)
    });
    feature_collection(nodes.chain(edges).collect())
}

/// A line feature read back from GeoJSON.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFeature<T> {
    pub parts: Vec<Polyline<T>>,
    pub properties: Map<String, Value>,
}

impl<T> LineFeature<T> {
    /// `false` only when the feature is explicitly tagged `"exact": false`.
    pub fn is_exact(&self) -> bool {
        self.properties.get("exact").and_then(Value::as_bool).unwrap_or(true)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::GeoJson(msg.into())
}

fn parse_coords<T: Scalar>(v: &Value) -> Result<Polyline<T>> {
    let arr = v.as_array().ok_or_else(|| bad("coordinates must be an array"))?;
    let mut pts = Vec::with_capacity(arr.len());
    for c in arr {
        let xy = c.as_array().filter(|a| a.len() >= 2).ok_or_else(|| bad("position needs x and y"))?;
        let x = xy[0].as_f64().ok_or_else(|| bad("non-numeric coordinate"))?;
        let y = xy[1].as_f64().ok_or_else(|| bad("non-numeric coordinate"))?;
        pts.push(Point::new(T::lit(x), T::lit(y)));
    }
    Polyline::new(0, pts).map_err(|e| bad(e.to_string()))
}

/// Parts of a `LineString` or `MultiLineString` geometry object.
pub fn parse_line_geometry<T: Scalar>(g: &Value) -> Result<Vec<Polyline<T>>> {
    let kind = g.get("type").and_then(Value::as_str).ok_or_else(|| bad("geometry without type"))?;
    let c = g.get("coordinates").ok_or_else(|| bad("geometry without coordinates"))?;
    match kind {
        "LineString" => Ok(vec![parse_coords(c)?]),
        "MultiLineString" => c
            .as_array()
            .ok_or_else(|| bad("coordinates must be an array"))?
            .iter()
            .map(parse_coords)
            .collect(),
        other => Err(bad(format!("unsupported geometry type {other}"))),
    }
}

/// A single line from a geometry object or a feature wrapping one.
pub fn parse_linestring<T: Scalar>(v: &Value) -> Result<Polyline<T>> {
    let g = match v.get("type").and_then(Value::as_str) {
        Some("Feature") => v.get("geometry").ok_or_else(|| bad("feature without geometry"))?,
        _ => v,
    };
    let mut parts = parse_line_geometry(g)?;
    if parts.len() != 1 {
        return Err(bad("expected a single LineString"));
    }
    Ok(parts.pop().unwrap())
}

/// Line features of a FeatureCollection, a Feature or a bare geometry.
/// Features with non-line geometry are skipped.
pub fn parse_line_features<T: Scalar>(v: &Value) -> Result<Vec<LineFeature<T>>> {
    match v.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            let feats = v
                .get("features")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("FeatureCollection without features"))?;
            let mut out = Vec::new();
            for f in feats {
                out.extend(parse_line_features(f)?);
            }
            Ok(out)
        }
        Some("Feature") => {
            let g = match v.get("geometry") {
                Some(Value::Null) | None => return Ok(Vec::new()),
                Some(g) => g,
            };
            if !matches!(g.get("type").and_then(Value::as_str), Some("LineString" | "MultiLineString")) {
                return Ok(Vec::new());
            }
            let properties = v.get("properties").and_then(Value::as_object).cloned().unwrap_or_default();
            Ok(vec![LineFeature { parts: parse_line_geometry(g)?, properties }])
        }
        Some(_) => Ok(vec![LineFeature { parts: parse_line_geometry(v)?, properties: Map::new() }]),
        None => Err(bad("missing type member")),
    }
}

/// Flattened polylines, numbered in reading order. With `exact_only`,
/// features tagged `"exact": false` are dropped.
pub fn read_lines<T: Scalar>(v: &Value, exact_only: bool) -> Result<Vec<Polyline<T>>> {
    Ok(parse_line_features(v)?
        .into_iter()
        .filter(|f| !exact_only || f.is_exact())
        .flat_map(|f| f.parts)
        .enumerate()
        .map(|(i, l)| l.with_id(i as u64))
        .collect())
}

pub fn read_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_file(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v)?)?;
    Ok(())
}
