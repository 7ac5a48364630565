//! Random geometric sensor networks.
//!
//! Sensors are placed uniformly at random in a cube `[-half_width, half_width]^n`
//! and linked whenever their Euclidean distance is strictly below the
//! connectivity radius. Degree bounds are enforced by resampling the
//! positions of violating nodes (never by pruning edges, so adjacency stays a
//! pure function of positions); a layout that cannot be repaired or ends up
//! disconnected is discarded and redrawn from scratch. Rejecting whole
//! layouts outright is hopeless at realistic densities: at the reference
//! parameters the chance that all 31 nodes of a raw draw reach the minimum
//! degree is below 1e-7.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::Point;
use crate::rng;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),
    #[error("no valid layout after {attempts} rejection-sampling attempts")]
    GenerationExhausted { attempts: usize },
    #[error("node index {index} out of range for {nodes} nodes")]
    IndexOutOfRange { index: usize, nodes: usize },
    #[error("invalid network document: {0}")]
    InvalidDocument(String),
}

/// Generation parameters for a random geometric network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkParams {
    /// Number of sensors L.
    pub nodes: usize,
    /// Spatial dimension n.
    pub dimension: usize,
    /// Positions are drawn from `[-half_width, half_width]^dimension`.
    pub half_width: f64,
    /// Nodes are adjacent iff their distance is strictly less than this.
    pub connect_radius: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Rejection-sampling budget before giving up.
    pub max_attempts: usize,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let fail = |msg: String| Err(NetworkError::InvalidParams(msg));
        if self.nodes < 2 {
            return fail(format!("nodes must be >= 2, got {}", self.nodes));
        }
        if self.dimension < 1 {
            return fail("dimension must be >= 1".into());
        }
        if !self.half_width.is_finite() || self.half_width < 0.0 {
            return fail(format!("half_width must be finite and >= 0, got {}", self.half_width));
        }
        if !self.connect_radius.is_finite() || self.connect_radius <= 0.0 {
            return fail(format!(
                "connect_radius must be finite and > 0, got {}",
                self.connect_radius
            ));
        }
        if self.min_degree > self.max_degree {
            return fail(format!(
                "min_degree ({}) must not exceed max_degree ({})",
                self.min_degree, self.max_degree
            ));
        }
        if self.max_attempts < 1 {
            return fail("max_attempts must be >= 1".into());
        }
        Ok(())
    }
}

/// An immutable sensor network: positions plus a symmetric, loop-free,
/// connected adjacency with per-node degrees inside the configured bounds.
///
/// Node indices are zero-based throughout.
#[derive(Debug, Clone)]
pub struct SensorNetwork {
    positions: Vec<Point>,
    /// Sorted neighbor lists; `neighbors[i]` never contains `i`.
    neighbors: Vec<Vec<usize>>,
    params: NetworkParams,
    seed: u64,
}

impl SensorNetwork {
    /// Number of sensors L.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.params.dimension
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self, i: usize) -> &Point {
        &self.positions[i]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// The neighborhood of node `i`, sorted ascending.
    pub fn neighbors(&self, i: usize) -> Result<&[usize], NetworkError> {
        self.neighbors
            .get(i)
            .map(Vec::as_slice)
            .ok_or(NetworkError::IndexOutOfRange {
                index: i,
                nodes: self.len(),
            })
    }

    /// All neighbor lists; for hot loops that already hold valid indices.
    pub fn neighbor_lists(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Undirected edges as `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                out.push([i, j]);
            }
        }
        out
    }

    /// True iff every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        adjacency_connected(&self.neighbors)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            seed: self.seed,
            params: self.params.clone(),
            positions: self.positions.iter().map(|p| p.coords().to_vec()).collect(),
            edges: self.edges(),
        }
    }

    /// Rebuild a network from its serialized document, re-validating every
    /// structural invariant. Rejects documents whose edge list disagrees with
    /// the adjacency implied by positions and radius.
    pub fn from_document(doc: &NetworkDocument) -> Result<Self, NetworkError> {
        let bad = |msg: String| Err(NetworkError::InvalidDocument(msg));
        doc.params.validate()?;
        let p = &doc.params;
        if doc.positions.len() != p.nodes {
            return bad(format!(
                "expected {} positions, found {}",
                p.nodes,
                doc.positions.len()
            ));
        }
        for (i, coords) in doc.positions.iter().enumerate() {
            if coords.len() != p.dimension {
                return bad(format!("position {} has dimension {}", i, coords.len()));
            }
            if coords.iter().any(|c| !c.is_finite() || c.abs() > p.half_width) {
                return bad(format!("position {} outside the deployment cube", i));
            }
        }
        let positions: Vec<Point> = doc.positions.iter().cloned().map(Point::new).collect();
        let neighbors = adjacency_from_positions(&positions, p.connect_radius);

        let mut listed = vec![Vec::new(); p.nodes];
        for &[i, j] in &doc.edges {
            if i >= p.nodes || j >= p.nodes {
                return bad(format!("edge ({i}, {j}) out of range"));
            }
            if i >= j {
                return bad(format!("edge ({i}, {j}) not in i < j form"));
            }
            listed[i].push(j);
            listed[j].push(i);
        }
        for l in &mut listed {
            l.sort_unstable();
            l.dedup();
        }
        if listed != neighbors {
            return bad("edge list disagrees with positions and connect_radius".into());
        }

        let net = SensorNetwork {
            positions,
            neighbors,
            params: doc.params.clone(),
            seed: doc.seed,
        };
        check_constraints(&net.neighbors, p).map_err(NetworkError::InvalidDocument)?;
        Ok(net)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network document serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDocument = serde_json::from_str(s)
            .map_err(|e| NetworkError::InvalidDocument(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Serialized form of a network: everything needed to reconstruct a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub seed: u64,
    pub params: NetworkParams,
    pub positions: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

/// Draw a network: sample all positions uniformly, resample violating nodes
/// until every degree is in bounds, and redraw the whole layout if the repair
/// budget runs out or the graph is disconnected. Deterministic in
/// `(seed, params)`.
pub fn generate_network(seed: u64, params: &NetworkParams) -> Result<SensorNetwork, NetworkError> {
    params.validate()?;
    let mut rng = rng::stream(seed, &[]);
    let repair_budget = 40 * params.nodes;
    for _ in 0..params.max_attempts {
        let mut positions = draw_positions(&mut rng, params);
        let mut neighbors = adjacency_from_positions(&positions, params.connect_radius);
        for _ in 0..repair_budget {
            let Some(v) = first_degree_violation(&neighbors, params) else {
                break;
            };
            positions[v] = sample_in_cube(&mut rng, params.dimension, params.half_width);
            neighbors = adjacency_from_positions(&positions, params.connect_radius);
        }
        if check_constraints(&neighbors, params).is_ok() {
            return Ok(SensorNetwork {
                positions,
                neighbors,
                params: params.clone(),
                seed,
            });
        }
    }
    Err(NetworkError::GenerationExhausted {
        attempts: params.max_attempts,
    })
}

fn first_degree_violation(neighbors: &[Vec<usize>], params: &NetworkParams) -> Option<usize> {
    neighbors
        .iter()
        .position(|n| n.len() < params.min_degree || n.len() > params.max_degree)
}

/// Draw a point uniformly from the deployment cube.
pub fn sample_in_cube<R: Rng>(rng: &mut R, dimension: usize, half_width: f64) -> Point {
    let coords = (0..dimension)
        .map(|_| {
            if half_width > 0.0 {
                rng.gen_range(-half_width..half_width)
            } else {
                0.0
            }
        })
        .collect();
    Point::new(coords)
}

fn draw_positions<R: Rng>(rng: &mut R, params: &NetworkParams) -> Vec<Point> {
    (0..params.nodes)
        .map(|_| sample_in_cube(rng, params.dimension, params.half_width))
        .collect()
}

/// Distance-rule adjacency: `i ~ j` iff `dist(i, j) < radius`, strictly.
fn adjacency_from_positions(positions: &[Point], radius: f64) -> Vec<Vec<usize>> {
    let l = positions.len();
    let mut neighbors = vec![Vec::new(); l];
    for i in 0..l {
        for j in (i + 1)..l {
            if positions[i].distance_to(&positions[j]) < radius {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    neighbors
}

fn check_constraints(neighbors: &[Vec<usize>], params: &NetworkParams) -> Result<(), String> {
    for (i, nbrs) in neighbors.iter().enumerate() {
        if nbrs.len() < params.min_degree || nbrs.len() > params.max_degree {
            return Err(format!(
                "node {} has degree {} outside [{}, {}]",
                i,
                nbrs.len(),
                params.min_degree,
                params.max_degree
            ));
        }
    }
    if !adjacency_connected(neighbors) {
        return Err("graph is not connected".into());
    }
    Ok(())
}

/// Breadth-first reachability from node 0 over adjacency lists.
pub(crate) fn adjacency_connected(neighbors: &[Vec<usize>]) -> bool {
    if neighbors.is_empty() {
        return true;
    }
    let mut seen = vec![false; neighbors.len()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &neighbors[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == neighbors.len()
}

/// The sensor layout of the reference experiments: 31 nodes in `[-3,3]^3`,
/// radius 1.75, degrees in `[2, 10]`.
pub fn reference_params() -> NetworkParams {
    NetworkParams {
        nodes: 31,
        dimension: 3,
        half_width: 3.0,
        connect_radius: 1.75,
        min_degree: 2,
        max_degree: 10,
        max_attempts: 20_000,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: recompute the distance graph from scratch and BFS
    /// it with its own bookkeeping.
    fn bfs_oracle_connected(positions: &[Point], radius: f64) -> bool {
        let l = positions.len();
        let mut reach = vec![false; l];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..l {
                if j != i && !reach[j] && positions[i].distance_to(&positions[j]) < radius {
                    reach[j] = true;
                    stack.push(j);
                }
            }
        }
        reach.into_iter().all(|r| r)
    }

    #[test]
    fn reference_network_satisfies_all_invariants() {
        let params = reference_params();
        let net = generate_network(7, &params).expect("generation succeeds");
        assert_eq!(net.len(), 31);
        assert_eq!(net.dimension(), 3);
        for i in 0..net.len() {
            let deg = net.degree(i);
            assert!((2..=10).contains(&deg), "degree {deg} out of bounds");
            assert!(!net.neighbors(i).unwrap().contains(&i), "self-loop at {i}");
            for &j in net.neighbors(i).unwrap() {
                assert!(net.adjacent(j, i), "asymmetric edge ({i}, {j})");
                assert!(
                    net.position(i).distance_to(net.position(j)) < params.connect_radius,
                    "edge ({i}, {j}) violates the distance rule"
                );
            }
        }
        assert!(net.is_connected());
        assert!(bfs_oracle_connected(net.positions(), params.connect_radius));
    }

    #[test]
    fn generation_is_deterministic() {
        let params = reference_params();
        let a = generate_network(123, &params).unwrap();
        let b = generate_network(123, &params).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.neighbor_lists(), b.neighbor_lists());
        let c = generate_network(124, &params).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn degenerate_two_node_network() {
        // half_width = 0 forces both nodes onto the origin; distance 0 < 1.
        let params = NetworkParams {
            nodes: 2,
            dimension: 1,
            half_width: 0.0,
            connect_radius: 1.0,
            min_degree: 1,
            max_degree: 1,
            max_attempts: 1,
        };
        let net = generate_network(0, &params).unwrap();
        assert_eq!(net.neighbors(0).unwrap(), &[1]);
        assert_eq!(net.neighbors(1).unwrap(), &[0]);
        assert_eq!(net.edges(), vec![[0, 1]]);
    }

    #[test]
    fn neighbors_rejects_out_of_range() {
        let net = generate_network(1, &reference_params()).unwrap();
        assert!(matches!(
            net.neighbors(31),
            Err(NetworkError::IndexOutOfRange { index: 31, nodes: 31 })
        ));
    }

    #[test]
    fn connectivity_on_hand_built_graphs() {
        // Path on three nodes.
        assert!(adjacency_connected(&[vec![1], vec![0, 2], vec![1]]));
        // Two isolated nodes.
        assert!(!adjacency_connected(&[vec![], vec![]]));
        // Two components.
        assert!(!adjacency_connected(&[vec![1], vec![0], vec![3], vec![2]]));
    }

    #[test]
    fn exhaustion_reports_error() {
        // Two nodes forced apart by geometry: 1-D cube of width 2 with an
        // impossible degree floor.
        let params = NetworkParams {
            nodes: 2,
            dimension: 1,
            half_width: 1.0,
            connect_radius: 1e-12,
            min_degree: 1,
            max_degree: 1,
            max_attempts: 50,
        };
        assert!(matches!(
            generate_network(5, &params),
            Err(NetworkError::GenerationExhausted { attempts: 50 })
        ));
    }

    #[test]
    fn document_round_trip() {
        let net = generate_network(99, &reference_params()).unwrap();
        let json = net.to_json_string();
        let back = SensorNetwork::from_json_str(&json).unwrap();
        assert_eq!(back.positions(), net.positions());
        assert_eq!(back.neighbor_lists(), net.neighbor_lists());
        assert_eq!(back.seed(), net.seed());
    }

    #[test]
    fn document_with_tampered_edges_is_rejected() {
        let net = generate_network(99, &reference_params()).unwrap();
        let mut doc = net.to_document();
        doc.edges.pop();
        assert!(matches!(
            SensorNetwork::from_document(&doc),
            Err(NetworkError::InvalidDocument(_))
        ));
    }

    #[test]
    fn document_with_nonfinite_position_is_rejected() {
        let net = generate_network(99, &reference_params()).unwrap();
        let mut doc = net.to_document();
        doc.positions[0][0] = f64::NAN;
        assert!(SensorNetwork::from_document(&doc).is_err());
    }
}
