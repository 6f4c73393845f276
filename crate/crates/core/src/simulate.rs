//! The network model and its time-domain execution.
//!
//! A network couples a DAG with one univariate polynomial per edge. Each
//! node outputs its own excitation delayed by one step plus every incoming
//! edge function applied to the neighbor's previous output. `run` executes
//! that update exactly; `consistency_check` verifies on concrete
//! trajectories that the executed outputs match the symbolic response
//! functions, which ties the simulator and the response module together.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, NodeId};
use crate::poly::{FunctionClass, Poly};
use crate::rat::{format_rat, Rat};
use crate::response::{build_response_with_cap, Assignment, DelayedInput, ResponseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("edge {0:?} has no function attached")]
    MissingEdgeFunction(Edge),
    #[error("function attached to {0:?}, which is not an edge")]
    UnexpectedEdgeFunction(Edge),
    #[error("edge {0:?} carries the zero function; an edge present in the topology must be nonzero")]
    ZeroEdgeFunction(Edge),
}

/// A static nonlinear network: topology plus edge functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    graph: Graph,
    edge_fn: BTreeMap<Edge, Poly>,
}

impl Network {
    /// Strict constructor: functions must cover exactly the edge set and be
    /// nonzero.
    pub fn new(graph: Graph, edge_fn: BTreeMap<Edge, Poly>) -> Result<Self, NetworkError> {
        for (e, f) in &edge_fn {
            if f.is_zero() {
                return Err(NetworkError::ZeroEdgeFunction(*e));
            }
        }
        Self::new_allow_zero_edges(graph, edge_fn)
    }

    /// Like `new` but permits zero functions. Ambiguity witnesses in the
    /// linear class can drive an edge function to zero while leaving the
    /// measured response unchanged; such networks are representable even
    /// though they are not valid identification inputs.
    pub fn new_allow_zero_edges(
        graph: Graph,
        edge_fn: BTreeMap<Edge, Poly>,
    ) -> Result<Self, NetworkError> {
        for e in &edge_fn {
            if !graph.edges().contains(e.0) {
                return Err(NetworkError::UnexpectedEdgeFunction(*e.0));
            }
        }
        for e in graph.edges() {
            if !edge_fn.contains_key(e) {
                return Err(NetworkError::MissingEdgeFunction(*e));
            }
        }
        Ok(Network { graph, edge_fn })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn edge_fn(&self, from: NodeId, to: NodeId) -> Option<&Poly> {
        self.edge_fn.get(&(from, to))
    }

    pub fn edge_fns(&self) -> &BTreeMap<Edge, Poly> {
        &self.edge_fn
    }

    /// New network with one edge function replaced.
    pub fn with_edge_fn(&self, from: NodeId, to: NodeId, f: Poly) -> Result<Self, NetworkError> {
        if !self.graph.has_edge(from, to) {
            return Err(NetworkError::UnexpectedEdgeFunction((from, to)));
        }
        let mut edge_fn = self.edge_fn.clone();
        edge_fn.insert((from, to), f);
        Self::new_allow_zero_edges(self.graph.clone(), edge_fn)
    }

    /// Narrowest function class containing every edge: all edges free of
    /// constant terms gives the zero-at-zero class, all of them genuinely
    /// nonlinear on top of that gives the nonlinear subclass.
    pub fn class(&self) -> FunctionClass {
        let mut all_fz = true;
        let mut all_fznl = true;
        for f in self.edge_fn.values() {
            match f.classify() {
                Ok(c) => {
                    all_fz &= c.in_fz;
                    all_fznl &= c.in_fznl;
                }
                Err(_) => all_fznl = false, // zero function: zero at zero, not nonlinear
            }
        }
        if all_fz && all_fznl {
            FunctionClass::FZNL
        } else if all_fz {
            FunctionClass::FZ
        } else {
            FunctionClass::General
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("excitation matrix must be {nodes} rows of {horizon} values")]
    BadExcitation { nodes: usize, horizon: usize },
    #[error("horizon {got} too short: warm-up needs at least {needed}")]
    HorizonTooShort { needed: usize, got: usize },
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Exact trajectory: excitations `u[node][t]` for `t < horizon` and outputs
/// `y[node][k]` for `k <= horizon`, with `y[_][0] = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub horizon: usize,
    pub u: Vec<Vec<Rat>>,
    pub y: Vec<Vec<Rat>>,
}

impl Trajectory {
    /// CSV with header `t,node,u,y`; rationals render as `p/q`. Nodes are
    /// printed with `labels` when given, ids otherwise. The excitation
    /// column reads 0 at the final instant, where it no longer acts.
    pub fn to_csv(&self, labels: Option<&[String]>) -> String {
        let mut out = String::from("t,node,u,y\n");
        let nodes = self.y.len();
        for t in 0..=self.horizon {
            for i in 0..nodes {
                let u = if t < self.horizon {
                    format_rat(&self.u[i][t])
                } else {
                    "0".to_string()
                };
                let name = match labels {
                    Some(ls) => ls[i].clone(),
                    None => i.to_string(),
                };
                out.push_str(&format!("{t},{name},{u},{}\n", format_rat(&self.y[i][t])));
            }
        }
        out
    }
}

/// Runs the network update for `horizon` steps from the zero initial state.
pub fn run(net: &Network, u: &[Vec<Rat>], horizon: usize) -> Result<Trajectory, SimError> {
    let n = net.graph().node_count();
    if u.len() != n || u.iter().any(|row| row.len() < horizon) {
        return Err(SimError::BadExcitation { nodes: n, horizon });
    }
    let mut y = vec![vec![Rat::zero(); horizon + 1]; n];
    for k in 1..=horizon {
        for i in 0..n {
            let mut acc = u[i][k - 1].clone();
            for &j in net.graph().in_neighbors(i)? {
                let f = net.edge_fn(j, i).expect("edge function present");
                acc += f.eval(&y[j][k - 1]);
            }
            y[i][k] = acc;
        }
    }
    Ok(Trajectory {
        horizon,
        u: u.iter().map(|row| row[..horizon].to_vec()).collect(),
        y,
    })
}

/// Verifies on a concrete trajectory that, past the warm-up window, the
/// output of `i` equals its own delayed excitation plus its symbolic
/// response evaluated at the delayed inputs.
pub fn consistency_check(
    net: &Network,
    i: NodeId,
    u: &[Vec<Rat>],
    horizon: usize,
) -> Result<bool, SimError> {
    consistency_check_with_cap(net, i, u, horizon, crate::response::DEFAULT_TERM_CAP)
}

/// `consistency_check` with an explicit term cap for the response build.
pub fn consistency_check_with_cap(
    net: &Network,
    i: NodeId,
    u: &[Vec<Rat>],
    horizon: usize,
    cap: usize,
) -> Result<bool, SimError> {
    let warmup = net.graph().max_depth_to(i)? + 2;
    if horizon < warmup {
        return Err(SimError::HorizonTooShort {
            needed: warmup,
            got: horizon,
        });
    }
    let response = build_response_with_cap(net, i, cap)?;
    let traj = run(net, u, horizon)?;
    let vars: Vec<DelayedInput> = response.variables().into_iter().collect();
    for k in warmup..=horizon {
        let mut asgn = Assignment::new();
        for v in &vars {
            let d = v.delay as usize;
            if k >= d {
                asgn.insert(*v, u[v.node][k - d].clone());
            }
        }
        let expected = u[i][k - 1].clone() + response.eval(&asgn);
        if traj.y[i][k] != expected {
            return Ok(false);
        }
    }
    Ok(true)
}
