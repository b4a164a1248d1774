//! Mutable delineation state for one user working on one network.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geojson::{feature, feature_collection, line_geometry};
use crate::geometry::Polyline;
use crate::scalar::Scalar;
use crate::vectornet::LineNetwork;

use super::connect::{connect_nodes, CandidateLine};
use super::TrafficLight;

/// A stored boundary. Never modified after acceptance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedLine<T> {
    /// 1-based acceptance order.
    pub order: usize,
    pub parts: Vec<Polyline<T>>,
    pub terminals: Vec<usize>,
    pub sinuosity: T,
    pub color: TrafficLight,
    pub simplified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    Connect { terminals: Vec<usize> },
    Simplify { tolerance: f64 },
    ReplaceGeometry,
    Accept { order: usize },
    Delete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelineationSession<T> {
    pub network: LineNetwork<T>,
    pub candidate: Option<CandidateLine<T>>,
    pub accepted: Vec<AcceptedLine<T>>,
    pub history: Vec<Operation>,
    /// Last terminal of the most recently accepted line.
    pub suggested_next_node: Option<usize>,
}

impl<T: Scalar> DelineationSession<T> {
    pub fn new(network: LineNetwork<T>) -> Self {
        Self {
            network,
            candidate: None,
            accepted: Vec::new(),
            history: Vec::new(),
            suggested_next_node: None,
        }
    }

    fn candidate_mut(&mut self) -> Result<&mut CandidateLine<T>> {
        self.candidate.as_mut().ok_or_else(|| Error::State("no candidate line".into()))
    }

    /// Compute a new candidate. A pending one is only overwritten with
    /// `replace`.
    pub fn connect(&mut self, terminals: &[usize], replace: bool) -> Result<&CandidateLine<T>> {
        if self.candidate.is_some() && !replace {
            return Err(Error::State("a candidate is already pending".into()));
        }
        let cand = connect_nodes(&self.network, terminals)?;
        self.history.push(Operation::Connect { terminals: terminals.to_vec() });
        Ok(self.candidate.insert(cand))
    }

    pub fn simplify_candidate(&mut self, tolerance: T) -> Result<&CandidateLine<T>> {
        if !(tolerance >= T::zero()) {
            return Err(Error::Parameter("simplification tolerance must be >= 0".into()));
        }
        self.candidate_mut()?.simplify(tolerance)?;
        self.history.push(Operation::Simplify { tolerance: tolerance.as_f64() });
        Ok(self.candidate.as_ref().unwrap())
    }

    pub fn replace_candidate_geometry(&mut self, line: Polyline<T>) -> Result<&CandidateLine<T>> {
        self.candidate_mut()?.replace_geometry(line)?;
        self.history.push(Operation::ReplaceGeometry);
        Ok(self.candidate.as_ref().unwrap())
    }

    pub fn accept_candidate(&mut self) -> Result<&AcceptedLine<T>> {
        let c = self.candidate.take().ok_or_else(|| Error::State("no candidate line".into()))?;
        let order = self.accepted.len() + 1;
        self.suggested_next_node = c.terminals.last().copied();
        self.accepted.push(AcceptedLine {
            order,
            parts: c.parts,
            terminals: c.terminals,
            sinuosity: c.sinuosity,
            color: c.color,
            simplified: c.simplified,
        });
        self.history.push(Operation::Accept { order });
        Ok(self.accepted.last().unwrap())
    }

    pub fn delete_candidate(&mut self) -> Result<()> {
        if self.candidate.take().is_none() {
            return Err(Error::State("no candidate line".into()));
        }
        self.history.push(Operation::Delete);
        Ok(())
    }

    /// Accepted lines in acceptance order.
    pub fn export_boundaries(&self) -> Value {
        feature_collection(
            self.accepted
                .iter()
                .map(|a| {
                    let mut props = Map::new();
                    props.insert("sinuosity".into(), json!(a.sinuosity.as_f64()));
                    props.insert("color".into(), json!(a.color.as_str()));
                    props.insert("simplified".into(), json!(a.simplified));
                    props.insert("accepted_order".into(), json!(a.order));
                    feature(line_geometry(&a.parts), props)
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
