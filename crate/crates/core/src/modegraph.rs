//! Coupled-mode (input-output) scattering of a graph of resonant modes.
//!
//! Each mode lives in the rotating frame of its pump harmonic: a mode with
//! harmonic `h` is probed at `w + h*wp`. Beam-splitter couplings between
//! harmonics `h` and `h+1` carry a phase `phi`: the matrix entry driving the
//! higher-harmonic mode from the lower one is `i*g*e^{+i phi}` and its
//! transpose partner `i*g*e^{-i phi}`. Same-harmonic edges use the same rule
//! with the endpoint order `a -> b` taking the `+i phi` side on `b`'s row.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};
use crate::scatter::{check_grid, Channel, NonreciprocityMap, Normalization, ScatterResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    /// Natural frequency, rad/s.
    pub omega0: f64,
    /// Energy decay rate into the attached port, rad/s.
    pub gamma_ext: f64,
    /// Internal energy decay rate, rad/s.
    pub gamma_int: f64,
    pub harmonic: i32,
    pub port: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Passive,
    Parametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// Coupling rate, rad/s.
    pub magnitude: f64,
    /// rad.
    pub phase: f64,
}

impl CouplingEdge {
    pub fn passive(a: usize, b: usize, magnitude: f64) -> Self {
        Self {
            a,
            b,
            kind: EdgeKind::Passive,
            magnitude,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGraph {
    pub modes: Vec<Mode>,
    pub edges: Vec<CouplingEdge>,
    pub omega_p: f64,
    /// Edge whose phase a sweep overrides.
    pub phase_edge: Option<usize>,
}

impl ModeGraph {
    /// Validates the graph. Without an explicit `phase_edge` the last
    /// parametric edge (if any) is used.
    pub fn new(
        modes: Vec<Mode>,
        edges: Vec<CouplingEdge>,
        omega_p: f64,
        phase_edge: Option<usize>,
    ) -> Result<Self> {
        let phase_edge =
            phase_edge.or_else(|| edges.iter().rposition(|e| e.kind == EdgeKind::Parametric));
        let graph = Self {
            modes,
            edges,
            omega_p,
            phase_edge,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGraph(msg));
        if self.modes.is_empty() {
            return bad("graph has no modes".into());
        }
        if !self.omega_p.is_finite() || self.omega_p < 0.0 {
            return bad(format!("pump frequency {} is invalid", self.omega_p));
        }
        let mut labels = std::collections::HashSet::new();
        let mut ports = std::collections::HashSet::new();
        for m in &self.modes {
            if !labels.insert(m.label.as_str()) {
                return bad(format!("duplicate mode label '{}'", m.label));
            }
            if !m.omega0.is_finite() || m.omega0 <= 0.0 {
                return bad(format!("mode '{}' has invalid frequency", m.label));
            }
            for rate in [m.gamma_ext, m.gamma_int] {
                if !rate.is_finite() || rate < 0.0 {
                    return bad(format!(
                        "mode '{}' has a negative or non-finite decay rate",
                        m.label
                    ));
                }
            }
            if let Some(p) = &m.port {
                if !ports.insert(p.as_str()) {
                    return bad(format!("port '{p}' is attached to more than one mode"));
                }
                if m.gamma_ext <= 0.0 {
                    return bad(format!(
                        "port mode '{}' needs a positive external rate",
                        m.label
                    ));
                }
            } else if m.gamma_ext != 0.0 {
                return bad(format!("mode '{}' has external loss but no port", m.label));
            }
        }
        if ports.is_empty() {
            return bad("graph has no ports".into());
        }
        let mut pairs = std::collections::HashSet::new();
        for (k, e) in self.edges.iter().enumerate() {
            if e.a >= self.modes.len() || e.b >= self.modes.len() {
                return bad(format!("edge {k} references a missing mode"));
            }
            if e.a == e.b {
                return bad(format!("edge {k} is a self-loop"));
            }
            if !pairs.insert((e.a.min(e.b), e.a.max(e.b))) {
                return bad(format!("edge {k} duplicates an earlier coupling"));
            }
            if !e.magnitude.is_finite() || e.magnitude < 0.0 || !e.phase.is_finite() {
                return bad(format!("edge {k} has an invalid magnitude or phase"));
            }
            let dh = self.modes[e.b].harmonic - self.modes[e.a].harmonic;
            match e.kind {
                EdgeKind::Passive if dh != 0 => {
                    return bad(format!("passive edge {k} joins different harmonics"));
                }
                EdgeKind::Parametric if dh.abs() != 1 => {
                    return bad(format!("parametric edge {k} must join adjacent harmonics"));
                }
                _ => {}
            }
        }
        if let Some(p) = self.phase_edge {
            match self.edges.get(p) {
                Some(e) if e.kind == EdgeKind::Parametric => {}
                _ => return bad(format!("phase edge {p} is not a parametric edge")),
            }
        }
        Ok(())
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    /// Indices of modes with an attached port, in mode order.
    pub fn port_modes(&self) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&k| self.modes[k].port.is_some())
            .collect()
    }

    pub fn channels(&self) -> Vec<Channel> {
        self.port_modes()
            .into_iter()
            .map(|k| {
                Channel::new(
                    self.modes[k].port.clone().unwrap_or_default(),
                    self.modes[k].harmonic,
                )
            })
            .collect()
    }

    /// Copy with the phase edge set to `dtheta`.
    pub fn with_phase(&self, dtheta: f64) -> Result<ModeGraph> {
        let p = self
            .phase_edge
            .ok_or_else(|| Error::InvalidGraph("graph has no parametric edge to phase".into()))?;
        let mut g = self.clone();
        g.edges[p].phase = dtheta;
        Ok(g)
    }

    pub fn phase(&self) -> f64 {
        self.phase_edge.map(|p| self.edges[p].phase).unwrap_or(0.0)
    }

    /// Off-diagonal coupling block `i*G`; `G` is Hermitian.
    pub fn coupling_matrix(&self) -> CMatrix {
        let n = self.modes.len();
        let mut m = CMatrix::zeros(n, n);
        let i = Complex64::i();
        for e in &self.edges {
            let (lo, hi) = if self.modes[e.b].harmonic >= self.modes[e.a].harmonic {
                (e.a, e.b)
            } else {
                (e.b, e.a)
            };
            let fwd = Complex64::from_polar(e.magnitude, e.phase);
            m[(hi, lo)] += i * fwd;
            m[(lo, hi)] += i * fwd.conj();
        }
        m
    }

    /// `M(w) = diag(gamma/2 - i(w + h*wp - w0)) + i*G`.
    pub fn system_matrix(&self, omega: f64) -> CMatrix {
        let mut m = self.coupling_matrix();
        for (k, mode) in self.modes.iter().enumerate() {
            let detuning = omega + mode.harmonic as f64 * self.omega_p - mode.omega0;
            m[(k, k)] += Complex64::new(0.5 * (mode.gamma_ext + mode.gamma_int), -detuning);
        }
        m
    }

    /// Photon-flux S-matrix over the port channels at probe frequency `omega`.
    pub fn scattering(&self, omega: f64) -> Result<CMatrix> {
        let ports = self.port_modes();
        let lu = Lu::new(self.system_matrix(omega)).ok_or(Error::Singular {
            freq_hz: crate::units::rad_to_hz(omega),
            context: Some("coupled-mode system".into()),
        })?;
        let n = self.modes.len();
        let mut rhs = CMatrix::zeros(n, ports.len());
        for (c, &p) in ports.iter().enumerate() {
            rhs[(p, c)] = Complex64::new(self.modes[p].gamma_ext.sqrt(), 0.0);
        }
        let x = lu.solve(&rhs).ok_or(Error::Singular {
            freq_hz: crate::units::rad_to_hz(omega),
            context: Some("coupled-mode system".into()),
        })?;
        let mut s = CMatrix::identity(ports.len(), ports.len());
        for (r, &p) in ports.iter().enumerate() {
            let k = self.modes[p].gamma_ext.sqrt();
            for c in 0..ports.len() {
                s[(r, c)] -= x[(p, c)] * k;
            }
        }
        Ok(s)
    }
}

/// S-matrix over `omegas` with the phase edge set to `dtheta` (if given).
pub fn cme_sweep(
    graph: &ModeGraph,
    omegas: &[f64],
    dtheta: Option<f64>,
    normalization: Normalization,
) -> Result<ScatterResult> {
    check_grid(omegas)?;
    let graph = match dtheta {
        Some(t) => graph.with_phase(t)?,
        None => graph.clone(),
    };
    let s = crate::parallel::pool().install(|| {
        omegas
            .par_iter()
            .enumerate()
            .map(|(index, &w)| {
                graph.scattering(w).map_err(|e| Error::AtGridPoint {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let result = ScatterResult {
        channels: graph.channels(),
        omegas: omegas.to_vec(),
        omega_p: graph.omega_p,
        dtheta: graph.phase(),
        normalization: Normalization::PhotonFlux,
        s,
    };
    Ok(result.renormalized(normalization))
}

/// Photon-flux sweeps at every phase in `dthetas`.
pub fn cme_phase_sweeps(
    graph: &ModeGraph,
    omegas: &[f64],
    dthetas: &[f64],
) -> Result<Vec<ScatterResult>> {
    if dthetas.is_empty() {
        return Err(Error::InvalidGrid("phase grid is empty".into()));
    }
    dthetas
        .iter()
        .map(|&t| cme_sweep(graph, omegas, Some(t), Normalization::PhotonFlux))
        .collect()
}

/// Cyclic-pair nonreciprocity over a phase x frequency grid.
pub fn nonreciprocity_map(
    graph: &ModeGraph,
    omegas: &[f64],
    dthetas: &[f64],
) -> Result<NonreciprocityMap> {
    NonreciprocityMap::from_results(&cme_phase_sweeps(graph, omegas, dthetas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    fn mode(label: &str, w0: f64, gext: f64, h: i32, port: Option<&str>) -> Mode {
        Mode {
            label: label.into(),
            omega0: w0,
            gamma_ext: gext,
            gamma_int: 0.0,
            harmonic: h,
            port: port.map(String::from),
        }
    }

    #[test]
    fn single_mode_reflects_minus_one_on_resonance() {
        let g =
            ModeGraph::new(vec![mode("A", 10.0, 1.0, 0, Some("A"))], vec![], 0.0, None).unwrap();
        let s = g.scattering(10.0).unwrap();
        assert!((s[(0, 0)] + 1.0).norm() < 1e-14);
        let s = g.scattering(10.7).unwrap();
        assert!((s[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_mode_with_internal_loss_matches_closed_form() {
        let mut m = mode("A", 10.0, 1.0, 0, Some("A"));
        m.gamma_int = 0.3;
        let g = ModeGraph::new(vec![m], vec![], 0.0, None).unwrap();
        for w in [9.0, 9.8, 10.0, 10.4] {
            let d = w - 10.0;
            let want = Complex64::new(1.0, 0.0) - 1.0 / Complex64::new(0.65, -d);
            let got = g.scattering(w).unwrap()[(0, 0)];
            assert!((got - want).norm() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_malformed_graphs() {
        let a = mode("A", 10.0, 1.0, 0, Some("A"));
        let c = mode("C", 14.0, 1.0, 1, Some("C"));
        let par_same = CouplingEdge {
            a: 0,
            b: 1,
            kind: EdgeKind::Parametric,
            magnitude: 0.1,
            phase: 0.0,
        };
        let b = mode("B", 10.0, 1.0, 0, Some("B"));
        assert!(ModeGraph::new(vec![a.clone(), b.clone()], vec![par_same], 4.0, None).is_err());
        assert!(ModeGraph::new(
            vec![a.clone(), c.clone()],
            vec![CouplingEdge::passive(0, 1, 0.1)],
            4.0,
            None
        )
        .is_err());
        assert!(ModeGraph::new(vec![a.clone(), a.clone()], vec![], 4.0, None).is_err());
        assert!(ModeGraph::new(
            vec![a.clone()],
            vec![CouplingEdge::passive(0, 3, 0.1)],
            4.0,
            None
        )
        .is_err());
        let twice = vec![
            CouplingEdge::passive(0, 1, 0.1),
            CouplingEdge::passive(1, 0, 0.2),
        ];
        assert!(ModeGraph::new(vec![a.clone(), b.clone()], twice, 4.0, None).is_err());
        let mut neg = a.clone();
        neg.gamma_int = -1.0;
        assert!(ModeGraph::new(vec![neg], vec![], 4.0, None).is_err());
    }

    #[test]
    fn coupling_block_is_anti_hermitian() {
        let g =
            crate::synthesis::build_circulator_graph(&crate::synthesis::ReducedDesign::reference())
                .unwrap();
        let k = g.with_phase(0.7).unwrap().coupling_matrix();
        let herm = &k * -Complex64::i();
        assert!((herm.adjoint() - &herm).norm() < 1e-9);
    }

    #[test]
    fn lossless_reference_graph_is_unitary() {
        let g =
            crate::synthesis::build_circulator_graph(&crate::synthesis::ReducedDesign::reference())
                .unwrap();
        for w in [4.5e9, 5e9, 5.3e9] {
            let s = g.scattering(std::f64::consts::TAU * w).unwrap();
            assert!(unitarity_defect(&s) < 1e-12);
        }
    }

    #[test]
    fn phase_edge_defaults_to_last_parametric() {
        let a = mode("A", 10.0, 1.0, 0, Some("A"));
        let c = mode("C", 14.0, 1.0, 1, Some("C"));
        let e = CouplingEdge {
            a: 0,
            b: 1,
            kind: EdgeKind::Parametric,
            magnitude: 0.1,
            phase: 0.0,
        };
        let g = ModeGraph::new(vec![a, c], vec![e], 4.0, None).unwrap();
        assert_eq!(g.phase_edge, Some(0));
    }
}
