//! Fusion of the superpixel and contour line layers into a clean
//! node/edge network.

mod buffer;
mod clean;
mod graph;
mod network;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Polyline};
use crate::scalar::Scalar;

pub use buffer::{buffer_filter, BufferFiltered};
pub use clean::clean_topology;
pub use network::build_network;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node<T> {
    pub id: usize,
    pub point: Point<T>,
}

/// Edge geometry runs from `node_a` to `node_b`, and `node_a <= node_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub id: usize,
    pub node_a: usize,
    pub node_b: usize,
    pub geometry: Polyline<T>,
    pub length: T,
}

impl<T: Scalar> Edge<T> {
    pub fn other(&self, node: usize) -> usize {
        if node == self.node_a {
            self.node_b
        } else {
            self.node_a
        }
    }

    /// Geometry oriented to start at `from`.
    pub fn oriented_from(&self, from: usize) -> Polyline<T> {
        if from == self.node_a {
            self.geometry.clone()
        } else {
            self.geometry.reversed()
        }
    }
}

/// Planar line network. Node and edge ids are dense and equal to their
/// position.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LineNetwork<T> {
    pub nodes: Vec<Node<T>>,
    pub edges: Vec<Edge<T>>,
}

impl<T: Scalar> LineNetwork<T> {
    pub fn node(&self, id: usize) -> Option<&Node<T>> {
        self.nodes.get(id)
    }

    /// For every node, `(edge id, neighbour id)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.node_a].push((e.id, e.node_b));
            if e.node_b != e.node_a {
                adj[e.node_b].push((e.id, e.node_a));
            }
        }
        adj
    }

    pub fn degree(&self, id: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.node_a == id) as usize + (e.node_b == id) as usize)
            .sum()
    }

    pub fn nearest_node(&self, p: Point<T>) -> Option<usize> {
        self.nodes
            .iter()
            .min_by(|a, b| {
                a.point
                    .distance_sq(p)
                    .partial_cmp(&b.point.distance_sq(p))
                    .unwrap()
            })
            .map(|n| n.id)
    }

    pub fn total_length(&self) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| acc + e.length)
    }
}
