//! Node/edge network from cleaned lines.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{segment_intersection, BBox, Point, Polyline, SegmentGrid, SegmentIntersection};
use crate::scalar::Scalar;

use super::graph::{pkey, SegGraph};
use super::{Edge, LineNetwork, Node};

fn check_noded<T: Scalar>(segs: &[(Point<T>, Point<T>)]) -> Result<()> {
    let grid = SegmentGrid::build(segs, T::geom_eps());
    let shared = |p: Point<T>, a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>| {
        let k = pkey(p);
        (k == pkey(a) || k == pkey(b)) && (k == pkey(c) || k == pkey(d))
    };
    for (i, &(a, b)) in segs.iter().enumerate() {
        let bb = BBox::of_points(&[a, b]).expand(T::geom_eps());
        for j in grid.query(&bb) {
            if j <= i {
                continue;
            }
            let (c, d) = segs[j];
            match segment_intersection(a, b, c, d) {
                SegmentIntersection::None => {}
                SegmentIntersection::Point(p) if shared(p, a, b, c, d) => {}
                SegmentIntersection::Point(p) | SegmentIntersection::Overlap(p, _) => {
                    return Err(Error::Topology { x: p.x.as_f64(), y: p.y.as_f64() });
                }
            }
        }
    }
    Ok(())
}

/// Build the network. Nodes sit at line endpoints and at vertices shared
/// by three or more segments; edges are the chains between nodes.
/// Crossings that are not shared vertices are rejected.
pub fn build_network<T: Scalar>(lines: &[Polyline<T>]) -> Result<LineNetwork<T>> {
    let segs: Vec<(Point<T>, Point<T>)> = lines.iter().flat_map(|l| l.segments()).collect();
    check_noded(&segs)?;
    let g = SegGraph::build(&segs);
    let ends: HashSet<_> = lines.iter().flat_map(|l| [pkey(l.start()), pkey(l.end())]).collect();
    let mut is_node: Vec<bool> = (0..g.pts.len())
        .map(|v| g.adj[v].len() != 2 || ends.contains(&pkey(g.pts[v])))
        .collect();

    let mut chains = g.chains(&|v| is_node[v]);
    // isolated cycles have no node yet; their first vertex becomes one
    for c in &chains {
        is_node[c[0]] = true;
    }
    chains = chains.into_iter().map(|c| g.canonical(c)).collect();

    let mut node_vs: Vec<usize> = (0..g.pts.len()).filter(|&v| is_node[v]).collect();
    node_vs.sort_by(|&a, &b| g.pts[a].lex_cmp(&g.pts[b]));
    let mut node_of = vec![usize::MAX; g.pts.len()];
    for (i, &v) in node_vs.iter().enumerate() {
        node_of[v] = i;
    }
    let nodes = node_vs
        .iter()
        .enumerate()
        .map(|(id, &v)| Node { id, point: g.pts[v] })
        .collect();

    let mut edges: Vec<(usize, usize, Vec<Point<T>>)> = chains
        .into_iter()
        .map(|c| {
            let (mut a, mut b) = (node_of[c[0]], node_of[*c.last().unwrap()]);
            let mut pts: Vec<Point<T>> = c.iter().map(|&v| g.pts[v]).collect();
            if a > b {
                std::mem::swap(&mut a, &mut b);
                pts.reverse();
            }
            (a, b, pts)
        })
        .collect();
    edges.sort_by(|x, y| {
        (x.0, x.1).cmp(&(y.0, y.1)).then_with(|| {
            x.2.iter()
                .zip(y.2.iter())
                .map(|(p, q)| p.lex_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(x.2.len().cmp(&y.2.len()))
        })
    });
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(id, (a, b, pts))| {
            let geometry = Polyline::new(id as u64, pts)?;
            let length = geometry.length();
            Ok(Edge { id, node_a: a, node_b: b, geometry, length })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LineNetwork { nodes, edges })
}
