//! Lumped-element netlists with static and pumped mutual inductances.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node name reserved for ground.
pub const GROUND: &str = "0";

/// How a pumped mutual enters the conversion equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpModel {
    /// Modulates the inverse-inductance coupling between the two branches by
    /// `-dM / (L1 L2)`, the first-order image of the mutual. Linear in the
    /// pump amplitude, so a balanced bridge adds no static dressing.
    #[default]
    Reluctance,
    /// Modulates the off-diagonal entry of the branch inductance matrix.
    Inductance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacitor {
    pub name: String,
    pub a: String,
    pub b: String,
    /// F.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inductor {
    pub name: String,
    pub a: String,
    pub b: String,
    /// H.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mutual {
    pub l1: String,
    pub l2: String,
    /// H.
    pub value: f64,
}

/// `M(t) = m0 + delta_m * cos(wp t - theta)` between two inductors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpedMutual {
    pub name: String,
    pub l1: String,
    pub l2: String,
    pub m0: f64,
    pub delta_m: f64,
    /// rad.
    pub theta: f64,
}

/// A matched source/load from `node` to ground. `harmonic` is the sideband the
/// port lives at when the probe sits in the lowest band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub label: String,
    pub node: String,
    pub z0: f64,
    pub harmonic: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub omega_p: f64,
    pub pump_model: PumpModel,
    pub capacitors: Vec<Capacitor>,
    pub inductors: Vec<Inductor>,
    pub mutuals: Vec<Mutual>,
    pub pumps: Vec<PumpedMutual>,
    pub ports: Vec<Port>,
    /// Index into `pumps` whose `theta` is the swept relative phase.
    pub phase_pump: Option<usize>,
}

/// Index-resolved form of a [`Netlist`]. Node `None` is ground.
#[derive(Debug, Clone)]
pub(crate) struct Topology {
    pub nodes: Vec<String>,
    pub caps: Vec<(Option<usize>, Option<usize>, f64)>,
    pub branches: Vec<(Option<usize>, Option<usize>)>,
    /// Static branch inductance matrix including pumped-mutual offsets.
    pub inductance: DMatrix<f64>,
    /// Nodal inverse-inductance matrix `A L^-1 A^T`.
    pub node_reluctance: DMatrix<f64>,
    pub pumps: Vec<ResolvedPump>,
    pub ports: Vec<ResolvedPort>,
}

#[derive(Debug, Clone)]
pub(crate) struct ResolvedPump {
    pub b1: usize,
    pub b2: usize,
    pub delta_m: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ResolvedPort {
    pub node: usize,
    pub z0: f64,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidNetlist(msg.into()))
}

fn positive(kind: &str, name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return invalid(format!("{kind} '{name}' has non-positive value {v}"));
    }
    Ok(())
}

impl Netlist {
    pub fn empty(omega_p: f64) -> Self {
        Self {
            omega_p,
            pump_model: PumpModel::default(),
            capacitors: Vec::new(),
            inductors: Vec::new(),
            mutuals: Vec::new(),
            pumps: Vec::new(),
            ports: Vec::new(),
            phase_pump: None,
        }
    }

    pub fn cap(&mut self, name: &str, a: &str, b: &str, value: f64) -> &mut Self {
        self.capacitors.push(Capacitor {
            name: name.into(),
            a: a.into(),
            b: b.into(),
            value,
        });
        self
    }

    pub fn ind(&mut self, name: &str, a: &str, b: &str, value: f64) -> &mut Self {
        self.inductors.push(Inductor {
            name: name.into(),
            a: a.into(),
            b: b.into(),
            value,
        });
        self
    }

    pub fn mutual(&mut self, l1: &str, l2: &str, value: f64) -> &mut Self {
        self.mutuals.push(Mutual {
            l1: l1.into(),
            l2: l2.into(),
            value,
        });
        self
    }

    pub fn pump(&mut self, name: &str, l1: &str, l2: &str, delta_m: f64, theta: f64) -> &mut Self {
        self.pumps.push(PumpedMutual {
            name: name.into(),
            l1: l1.into(),
            l2: l2.into(),
            m0: 0.0,
            delta_m,
            theta,
        });
        self
    }

    pub fn port(&mut self, label: &str, node: &str, z0: f64, harmonic: i32) -> &mut Self {
        self.ports.push(Port {
            label: label.into(),
            node: node.into(),
            z0,
            harmonic,
        });
        self
    }

    /// The swept pump: explicit choice, else the last one.
    pub fn phase_pump_index(&self) -> Option<usize> {
        self.phase_pump.or_else(|| self.pumps.len().checked_sub(1))
    }

    pub fn with_phase(&self, dtheta: f64) -> Result<Netlist> {
        let k = self
            .phase_pump_index()
            .ok_or_else(|| Error::InvalidNetlist("netlist has no pumped mutual to phase".into()))?;
        let mut n = self.clone();
        n.pumps[k].theta = dtheta;
        Ok(n)
    }

    pub fn phase(&self) -> f64 {
        self.phase_pump_index()
            .map(|k| self.pumps[k].theta)
            .unwrap_or(0.0)
    }

    /// Copy with every pump amplitude set to `delta_m`.
    pub fn with_delta_m(&self, delta_m: f64) -> Netlist {
        let mut n = self.clone();
        for p in &mut n.pumps {
            p.delta_m = delta_m;
        }
        n
    }

    pub fn inductor(&self, name: &str) -> Option<&Inductor> {
        self.inductors.iter().find(|l| l.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.topology().map(|_| ())
    }

    pub(crate) fn topology(&self) -> Result<Topology> {
        if !self.omega_p.is_finite() || self.omega_p < 0.0 {
            return invalid(format!("pump frequency {} is invalid", self.omega_p));
        }
        let mut nodes: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut node = |name: &str| -> Option<usize> {
            if name == GROUND {
                return None;
            }
            Some(*index.entry(name.to_string()).or_insert_with(|| {
                nodes.push(name.to_string());
                nodes.len() - 1
            }))
        };

        let mut caps = Vec::with_capacity(self.capacitors.len());
        for c in &self.capacitors {
            positive("capacitor", &c.name, c.value)?;
            if c.a == c.b {
                return invalid(format!("capacitor '{}' is shorted", c.name));
            }
            caps.push((node(&c.a), node(&c.b), c.value));
        }
        let mut branch_index = HashMap::new();
        let mut branches = Vec::with_capacity(self.inductors.len());
        for (k, l) in self.inductors.iter().enumerate() {
            positive("inductor", &l.name, l.value)?;
            if l.a == l.b {
                return invalid(format!("inductor '{}' is shorted", l.name));
            }
            if branch_index.insert(l.name.as_str(), k).is_some() {
                return invalid(format!("duplicate inductor name '{}'", l.name));
            }
            branches.push((node(&l.a), node(&l.b)));
        }
        let mut ports = Vec::with_capacity(self.ports.len());
        let mut labels = std::collections::HashSet::new();
        for p in &self.ports {
            positive("port impedance of", &p.label, p.z0)?;
            if p.node == GROUND {
                return invalid(format!("port '{}' is attached to ground", p.label));
            }
            if !labels.insert(p.label.as_str()) {
                return invalid(format!("duplicate port label '{}'", p.label));
            }
            let n = node(&p.node).expect("non-ground node");
            ports.push(ResolvedPort { node: n, z0: p.z0 });
        }
        let port_nodes: std::collections::HashSet<usize> = ports.iter().map(|p| p.node).collect();
        if port_nodes.len() != ports.len() {
            return invalid("two ports share a node");
        }

        let nb = branches.len();
        let mut inductance = DMatrix::<f64>::zeros(nb, nb);
        for (k, l) in self.inductors.iter().enumerate() {
            inductance[(k, k)] = l.value;
        }
        let lookup = |name: &str| -> Result<usize> {
            branch_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidNetlist(format!("unknown inductor '{name}'")))
        };
        let mut coupled = std::collections::HashSet::new();
        let mut couple = |i: usize, j: usize, what: &str| -> Result<()> {
            if i == j {
                return invalid(format!("{what} couples an inductor to itself"));
            }
            if !coupled.insert((i.min(j), i.max(j))) {
                return invalid(format!("{what} duplicates an existing coupling"));
            }
            Ok(())
        };
        for m in &self.mutuals {
            let (i, j) = (lookup(&m.l1)?, lookup(&m.l2)?);
            couple(i, j, "mutual")?;
            if !m.value.is_finite() {
                return invalid("mutual inductance is not finite");
            }
            inductance[(i, j)] = m.value;
            inductance[(j, i)] = m.value;
        }
        let mut pumps = Vec::with_capacity(self.pumps.len());
        for p in &self.pumps {
            let (i, j) = (lookup(&p.l1)?, lookup(&p.l2)?);
            couple(i, j, "pumped mutual")?;
            if !(p.m0.is_finite() && p.delta_m.is_finite() && p.theta.is_finite()) {
                return invalid(format!(
                    "pumped mutual '{}' has non-finite parameters",
                    p.name
                ));
            }
            let limit = (inductance[(i, i)] * inductance[(j, j)]).sqrt();
            if p.m0.abs() + p.delta_m.abs() >= limit {
                return invalid(format!(
                    "pumped mutual '{}' exceeds the coupling limit sqrt(L1 L2) = {limit:e}",
                    p.name
                ));
            }
            inductance[(i, j)] = p.m0;
            inductance[(j, i)] = p.m0;
            pumps.push(ResolvedPump {
                b1: i,
                b2: j,
                delta_m: p.delta_m,
                theta: p.theta,
            });
        }
        if let Some(k) = self.phase_pump {
            if k >= self.pumps.len() {
                return invalid(format!("phase pump index {k} is out of range"));
            }
        }
        let n = nodes.len();
        let node_reluctance = if nb == 0 {
            DMatrix::zeros(n, n)
        } else {
            let Some(chol) = inductance.clone().cholesky() else {
                return invalid("inductance matrix is not positive definite");
            };
            let mut incidence = DMatrix::<f64>::zeros(n, nb);
            for (k, &(a, b)) in branches.iter().enumerate() {
                if let Some(a) = a {
                    incidence[(a, k)] += 1.0;
                }
                if let Some(b) = b {
                    incidence[(b, k)] -= 1.0;
                }
            }
            &incidence * chol.inverse() * incidence.transpose()
        };
        Ok(Topology {
            nodes,
            caps,
            branches,
            inductance,
            node_reluctance,
            pumps,
            ports,
        })
    }
}
