//! Capacitated min-cost flow networks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{vstack, Matrix, Vector};
use crate::problems::lagrangian::LinearLagrangian;
use crate::problems::lp::LinearProgram;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub cost: f64,
    pub capacity: f64,
}

/// Directed network with node injections (positive = supply).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub node_ids: Vec<String>,
    pub injections: Vector,
    pub edges: Vec<Edge>,
}

impl FlowNetwork {
    pub fn new(node_ids: Vec<String>, injections: Vector, edges: Vec<Edge>) -> Result<Self> {
        crate::error::check_dim("injections", node_ids.len(), injections.len())?;
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= node_ids.len() || e.head >= node_ids.len() {
                return Err(Error::InvalidParameter {
                    name: "edge",
                    reason: format!("edge {k} references a missing node"),
                });
            }
            if e.capacity.is_nan() || e.capacity < 0.0 || !e.cost.is_finite() || !e.capacity.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "edge",
                    reason: format!("edge {k} needs finite cost and nonnegative finite capacity"),
                });
            }
        }
        Ok(Self {
            node_ids,
            injections,
            edges,
        })
    }

    /// Parses the line format `node <id> <injection>` /
    /// `edge <tail> <head> <cost> <capacity>`, with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut inj: Vec<f64> = Vec::new();
        let mut edges = Vec::new();
        let num = |tok: Option<&str>, line: usize, what: &str| -> Result<f64> {
            let tok = tok.ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {what}"),
            })?;
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{what} '{tok}' is not a number"),
            })
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut toks = content.split_whitespace();
            match toks.next() {
                Some("node") => {
                    let id = toks.next().ok_or_else(|| Error::Parse {
                        line,
                        message: "missing node id".into(),
                    })?;
                    let d = num(toks.next(), line, "injection")?;
                    if index.contains_key(id) {
                        return Err(Error::Parse {
                            line,
                            message: format!("duplicate node '{id}'"),
                        });
                    }
                    index.insert(id.to_string(), ids.len());
                    ids.push(id.to_string());
                    inj.push(d);
                }
                Some("edge") => {
                    let mut node = |what: &str| -> Result<usize> {
                        let id = toks.next().ok_or_else(|| Error::Parse {
                            line,
                            message: format!("missing {what}"),
                        })?;
                        index.get(id).copied().ok_or_else(|| Error::Parse {
                            line,
                            message: format!("unknown node '{id}'"),
                        })
                    };
                    let tail = node("tail")?;
                    let head = node("head")?;
                    let cost = num(toks.next(), line, "cost")?;
                    let capacity = num(toks.next(), line, "capacity")?;
                    edges.push(Edge {
                        tail,
                        head,
                        cost,
                        capacity,
                    });
                }
                Some(other) => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown record '{other}'"),
                    })
                }
                None => {}
            }
            if toks.next().is_some() {
                return Err(Error::Parse {
                    line,
                    message: "trailing tokens".into(),
                });
            }
        }
        Self::new(ids, Vector::from_vec(inj), edges)
    }

    /// Seeded 5-node, 7-edge test network with injections `(3, 1, 0, -1, -3)`,
    /// capacities in `[2, 5]` and costs in `[1, 5)` rounded to two decimals.
    pub fn canonical(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)];
        let edges = topology
            .iter()
            .map(|&(tail, head)| {
                let capacity = (rng.random_range(2.0..=5.0f64) * 100.0).round() / 100.0;
                let cost = (rng.random_range(1.0..5.0f64) * 100.0).round() / 100.0;
                Edge {
                    tail,
                    head,
                    cost,
                    capacity,
                }
            })
            .collect();
        Self {
            node_ids: (0..5).map(|i| i.to_string()).collect(),
            injections: Vector::from_vec(vec![3.0, 1.0, 0.0, -1.0, -3.0]),
            edges,
        }
    }

    /// Node-edge incidence: `+1` at the tail, `-1` at the head.
    pub fn incidence(&self) -> Matrix {
        let mut b = Matrix::zeros(self.node_ids.len(), self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            b[(e.tail, k)] += 1.0;
            b[(e.head, k)] -= 1.0;
        }
        b
    }

    pub fn costs(&self) -> Vector {
        Vector::from_iterator(self.edges.len(), self.edges.iter().map(|e| e.cost))
    }

    pub fn capacities(&self) -> Vector {
        Vector::from_iterator(self.edges.len(), self.edges.iter().map(|e| e.capacity))
    }
}

/// The min-cost flow program and its Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCostFlow {
    pub network: FlowNetwork,
    /// `min c'x  s.t.  Bx - d = 0,  [I; -I] x - (cap, 0) <= 0`.
    pub lp: LinearProgram,
    /// Lagrangian over `(x, y^E, y^I)` with only `y^I` sign constrained.
    pub lagrangian: LinearLagrangian,
}

impl MinCostFlow {
    pub fn edges(&self) -> usize {
        self.network.edges.len()
    }

    /// Edge flows from a Lagrangian state `(x, y)` or an augmented state
    /// `(x, x_hat, y, y_hat)`: the first `|E|` entries.
    pub fn recover(&self, state: &Vector) -> Vector {
        state.rows(0, self.edges()).into_owned()
    }

    pub fn objective(&self, flows: &Vector) -> f64 {
        self.lp.objective(flows)
    }
}

pub fn make_min_cost_flow(net: &FlowNetwork) -> Result<MinCostFlow> {
    let total: f64 = net.injections.sum();
    if total.abs() > 1e-9 * (1.0 + net.injections.amax()) {
        return Err(Error::Unbalanced(total));
    }
    let e = net.edges.len();
    let a_in = vstack(&Matrix::identity(e, e), &(-Matrix::identity(e, e)));
    let b_in = crate::linalg::stack(&net.capacities(), &Vector::zeros(e));
    let lp = LinearProgram::new(net.costs(), a_in, b_in)?
        .with_equalities(net.incidence(), net.injections.clone())?;
    let lagrangian = crate::problems::lp::make_lp(&lp)?;
    Ok(MinCostFlow {
        network: net.clone(),
        lp,
        lagrangian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_incidence() {
        let net = FlowNetwork::parse("# two nodes\nnode a 1\nnode b -1\nedge a b 3 2 # cheap\n").unwrap();
        assert_eq!(net.incidence(), Matrix::from_row_slice(2, 1, &[1.0, -1.0]));
        assert_eq!(net.edges[0].cost, 3.0);
        assert_eq!(net.edges[0].capacity, 2.0);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = FlowNetwork::parse("node a 1\nedge a z 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = FlowNetwork::parse("node a x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unbalanced_rejected() {
        let net = FlowNetwork::parse("node a 1\nnode b 0\nedge a b 1 1\n").unwrap();
        assert!(matches!(make_min_cost_flow(&net), Err(Error::Unbalanced(_))));
    }

    #[test]
    fn canonical_is_reproducible() {
        let a = FlowNetwork::canonical(7);
        let b = FlowNetwork::canonical(7);
        assert_eq!(a, b);
        assert_eq!(a.edges.len(), 7);
        assert!(a.edges.iter().all(|e| (2.0..=5.0).contains(&e.capacity) && (1.0..=5.0).contains(&e.cost)));
    }
}
