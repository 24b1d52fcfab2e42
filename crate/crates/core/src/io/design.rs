use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modegraph::{CouplingEdge, EdgeKind, Mode, ModeGraph};
use crate::synthesis::{Prototype, ReducedDesign};
use crate::units::{deg_to_rad, hz_to_rad, rad_to_deg, rad_to_hz};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub label: String,
    pub omega0_hz: f64,
    pub gamma_ext_hz: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub gamma_int_hz: f64,
    pub harmonic: i32,
    #[serde(default)]
    pub port: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
    /// Coupling rate in units of `gamma0_hz`.
    pub beta: f64,
    #[serde(default)]
    pub phase_deg: f64,
    /// Marks the edge whose phase sweeps override.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sweep_phase: bool,
}

/// Serialized coupled-mode design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub modes: Vec<ModeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub gamma0_hz: f64,
    pub omegap_hz: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl DesignFile {
    /// Edge magnitudes are written relative to `gamma0`.
    pub fn from_graph(graph: &ModeGraph, gamma0: f64) -> Self {
        let modes = graph
            .modes
            .iter()
            .map(|m| ModeRecord {
                label: m.label.clone(),
                omega0_hz: rad_to_hz(m.omega0),
                gamma_ext_hz: rad_to_hz(m.gamma_ext),
                gamma_int_hz: rad_to_hz(m.gamma_int),
                harmonic: m.harmonic,
                port: m.port.clone(),
            })
            .collect();
        let edges = graph
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| EdgeRecord {
                a: graph.modes[e.a].label.clone(),
                b: graph.modes[e.b].label.clone(),
                kind: e.kind,
                beta: e.magnitude / gamma0,
                phase_deg: rad_to_deg(e.phase),
                sweep_phase: graph.phase_edge == Some(k),
            })
            .collect();
        Self {
            modes,
            edges,
            gamma0_hz: rad_to_hz(gamma0),
            omegap_hz: rad_to_hz(graph.omega_p),
        }
    }

    pub fn to_graph(&self) -> Result<ModeGraph> {
        if !(self.gamma0_hz > 0.0) || !self.gamma0_hz.is_finite() {
            return Err(Error::InvalidGraph("gamma0_hz must be positive".into()));
        }
        let gamma0 = hz_to_rad(self.gamma0_hz);
        let modes: Vec<Mode> = self
            .modes
            .iter()
            .map(|m| Mode {
                label: m.label.clone(),
                omega0: hz_to_rad(m.omega0_hz),
                gamma_ext: hz_to_rad(m.gamma_ext_hz),
                gamma_int: hz_to_rad(m.gamma_int_hz),
                harmonic: m.harmonic,
                port: m.port.clone(),
            })
            .collect();
        let find = |label: &str, field: &str, k: usize| -> Result<usize> {
            modes.iter().position(|m| m.label == label).ok_or_else(|| {
                Error::InvalidGraph(format!("edges[{k}].{field}: unknown mode '{label}'"))
            })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut phase_edge = None;
        let mut pairs = std::collections::HashSet::new();
        for (k, e) in self.edges.iter().enumerate() {
            let (a, b) = (find(&e.a, "a", k)?, find(&e.b, "b", k)?);
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!(
                    "edges[{k}] duplicates a mode pair"
                )));
            }
            if e.sweep_phase {
                if phase_edge.is_some() {
                    return Err(Error::InvalidGraph(
                        "more than one edge is marked sweep_phase".into(),
                    ));
                }
                phase_edge = Some(k);
            }
            edges.push(CouplingEdge {
                a,
                b,
                kind: e.kind,
                magnitude: e.beta * gamma0,
                phase: deg_to_rad(e.phase_deg),
            });
        }
        ModeGraph::new(modes, edges, hz_to_rad(self.omegap_hz), phase_edge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeRecord {
    pub order: usize,
    pub ripple_db: f64,
    pub g: Vec<f64>,
    pub center_low_hz: f64,
    pub center_high_hz: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRecord {
    pub gamma0_hz: f64,
    /// Matching-ladder couplings, core end first; `beta12` is the first entry.
    pub ladder: Vec<f64>,
    pub beta12: Option<f64>,
    pub beta_ab: f64,
    pub beta_p: f64,
    pub dtheta_deg: f64,
    pub omega_a_hz: f64,
    pub omega_c_hz: f64,
    pub omegap_hz: f64,
}

/// Output of the synthesis step: the design graph plus the numbers it came from.
/// Readable as a plain [`DesignFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisFile {
    pub prototype: PrototypeRecord,
    pub reduced: ReducedRecord,
    #[serde(flatten)]
    pub design: DesignFile,
}

impl SynthesisFile {
    pub fn new(proto: &Prototype, design: &ReducedDesign, graph: &ModeGraph) -> Self {
        Self {
            prototype: PrototypeRecord {
                order: proto.order,
                ripple_db: proto.ripple_db,
                g: proto.g.clone(),
                center_low_hz: rad_to_hz(proto.center_low),
                center_high_hz: rad_to_hz(proto.center_high),
                bandwidth_hz: rad_to_hz(proto.bandwidth),
            },
            reduced: ReducedRecord {
                gamma0_hz: rad_to_hz(design.gamma0),
                ladder: design.ladder.clone(),
                beta12: design.beta12(),
                beta_ab: design.beta_ab,
                beta_p: design.beta_p,
                dtheta_deg: rad_to_deg(design.dtheta),
                omega_a_hz: rad_to_hz(design.omega_a),
                omega_c_hz: rad_to_hz(design.omega_c),
                omegap_hz: rad_to_hz(design.omega_p),
            },
            design: DesignFile::from_graph(graph, design.gamma0),
        }
    }
}

pub fn read_design(path: &Path) -> Result<ModeGraph> {
    super::read_json::<DesignFile>(path)?.to_graph()
}

pub fn write_design(path: &Path, graph: &ModeGraph, gamma0: f64) -> Result<()> {
    std::fs::write(
        path,
        super::to_json_string(&DesignFile::from_graph(graph, gamma0))?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{build_circulator_graph, ReducedDesign};

    #[test]
    fn graph_round_trips_through_json() {
        let d = ReducedDesign::reference();
        let g = build_circulator_graph(&d).unwrap();
        let text = serde_json::to_string(&DesignFile::from_graph(&g, d.gamma0)).unwrap();
        let back: DesignFile = serde_json::from_str(&text).unwrap();
        let g2 = back.to_graph().unwrap();
        assert_eq!(g.modes.len(), g2.modes.len());
        assert_eq!(g.phase_edge, g2.phase_edge);
        for (a, b) in g.edges.iter().zip(&g2.edges) {
            assert!((a.magnitude - b.magnitude).abs() < 1e-6 * a.magnitude.max(1.0));
            assert!((a.phase - b.phase).abs() < 1e-12);
        }
        for (a, b) in g.modes.iter().zip(&g2.modes) {
            assert!((a.omega0 - b.omega0).abs() < 1e-6);
        }
    }

    #[test]
    fn unknown_edge_endpoint_names_the_field() {
        let text = r#"{"modes":[{"label":"A","omega0_hz":5e9,"gamma_ext_hz":1e8,"harmonic":0,"port":"A"}],
            "edges":[{"a":"A","b":"Z","kind":"passive","beta":0.5}],"gamma0_hz":1e8,"omegap_hz":2e9}"#;
        let f: DesignFile = serde_json::from_str(text).unwrap();
        let err = f.to_graph().unwrap_err().to_string();
        assert!(err.contains("edges[0].b"), "{err}");
    }

    #[test]
    fn synthesis_output_reads_as_design() {
        let proto =
            Prototype::new(2, 0.01, hz_to_rad(5e9), hz_to_rad(7e9), hz_to_rad(250e6)).unwrap();
        let d = ReducedDesign::reference();
        let g = build_circulator_graph(&d).unwrap();
        let text = serde_json::to_string(&SynthesisFile::new(&proto, &d, &g)).unwrap();
        let f: DesignFile = serde_json::from_str(&text).unwrap();
        assert_eq!(f.to_graph().unwrap().modes.len(), 6);
    }
}
