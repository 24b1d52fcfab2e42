use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Capacitor, Inductor, Mutual, Netlist, Port, PumpModel, PumpedMutual};
use crate::error::{Error, Result};
use crate::units::{deg_to_rad, hz_to_rad, rad_to_deg, rad_to_hz};

/// One netlist element, tagged by `type`. SI units; ground is node `"0"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ElementRecord {
    Cap {
        name: String,
        a: String,
        b: String,
        value: f64,
    },
    Ind {
        name: String,
        a: String,
        b: String,
        value: f64,
    },
    Mut {
        l1: String,
        l2: String,
        value: f64,
    },
    Pmut {
        name: String,
        l1: String,
        l2: String,
        #[serde(default)]
        m0: f64,
        delta_m: f64,
        #[serde(default)]
        theta_deg: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        sweep_phase: bool,
    },
    Port {
        label: String,
        node: String,
        #[serde(default = "default_z0")]
        z0: f64,
        #[serde(default)]
        harmonic: i32,
    },
}

fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetlistFile {
    pub omegap_hz: f64,
    #[serde(default)]
    pub pump_model: PumpModel,
    pub elements: Vec<ElementRecord>,
}

impl NetlistFile {
    pub fn from_netlist(n: &Netlist) -> Self {
        let mut elements = Vec::new();
        for c in &n.capacitors {
            elements.push(ElementRecord::Cap {
                name: c.name.clone(),
                a: c.a.clone(),
                b: c.b.clone(),
                value: c.value,
            });
        }
        for l in &n.inductors {
            elements.push(ElementRecord::Ind {
                name: l.name.clone(),
                a: l.a.clone(),
                b: l.b.clone(),
                value: l.value,
            });
        }
        for m in &n.mutuals {
            elements.push(ElementRecord::Mut {
                l1: m.l1.clone(),
                l2: m.l2.clone(),
                value: m.value,
            });
        }
        for (k, p) in n.pumps.iter().enumerate() {
            elements.push(ElementRecord::Pmut {
                name: p.name.clone(),
                l1: p.l1.clone(),
                l2: p.l2.clone(),
                m0: p.m0,
                delta_m: p.delta_m,
                theta_deg: rad_to_deg(p.theta),
                sweep_phase: n.phase_pump == Some(k),
            });
        }
        for p in &n.ports {
            elements.push(ElementRecord::Port {
                label: p.label.clone(),
                node: p.node.clone(),
                z0: p.z0,
                harmonic: p.harmonic,
            });
        }
        Self {
            omegap_hz: rad_to_hz(n.omega_p),
            pump_model: n.pump_model,
            elements,
        }
    }

    pub fn to_netlist(&self) -> Result<Netlist> {
        let mut n = Netlist::empty(hz_to_rad(self.omegap_hz));
        n.pump_model = self.pump_model;
        for (k, e) in self.elements.iter().enumerate() {
            match e.clone() {
                ElementRecord::Cap { name, a, b, value } => {
                    n.capacitors.push(Capacitor { name, a, b, value })
                }
                ElementRecord::Ind { name, a, b, value } => {
                    n.inductors.push(Inductor { name, a, b, value })
                }
                ElementRecord::Mut { l1, l2, value } => n.mutuals.push(Mutual { l1, l2, value }),
                ElementRecord::Pmut {
                    name,
                    l1,
                    l2,
                    m0,
                    delta_m,
                    theta_deg,
                    sweep_phase,
                } => {
                    if sweep_phase {
                        if n.phase_pump.is_some() {
                            return Err(Error::InvalidNetlist(format!(
                                "elements[{k}]: more than one pmut is marked sweep_phase"
                            )));
                        }
                        n.phase_pump = Some(n.pumps.len());
                    }
                    n.pumps.push(PumpedMutual {
                        name,
                        l1,
                        l2,
                        m0,
                        delta_m,
                        theta: deg_to_rad(theta_deg),
                    })
                }
                ElementRecord::Port {
                    label,
                    node,
                    z0,
                    harmonic,
                } => n.ports.push(Port {
                    label,
                    node,
                    z0,
                    harmonic,
                }),
            }
        }
        n.validate()?;
        Ok(n)
    }
}

pub fn read_netlist(path: &Path) -> Result<Netlist> {
    super::read_json::<NetlistFile>(path)?.to_netlist()
}

pub fn write_netlist(path: &Path, netlist: &Netlist) -> Result<()> {
    std::fs::write(
        path,
        super::to_json_string(&NetlistFile::from_netlist(netlist))?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::reference_netlist;

    #[test]
    fn reference_netlist_round_trips() {
        let n = reference_netlist(2e-10, -1.3);
        let text = serde_json::to_string(&NetlistFile::from_netlist(&n)).unwrap();
        let back: NetlistFile = serde_json::from_str(&text).unwrap();
        let n2 = back.to_netlist().unwrap();
        assert_eq!(n.capacitors, n2.capacitors);
        assert_eq!(n.inductors, n2.inductors);
        assert_eq!(n.ports, n2.ports);
        assert_eq!(n.phase_pump, n2.phase_pump);
        assert!((n.omega_p - n2.omega_p).abs() < 1e-3);
        assert!((n.pumps[1].theta - n2.pumps[1].theta).abs() < 1e-12);
    }

    #[test]
    fn bad_tag_is_a_parse_error() {
        let text = r#"{"omegap_hz":2e9,"elements":[{"type":"resistor","name":"R","a":"x","b":"0","value":1}]}"#;
        assert!(serde_json::from_str::<NetlistFile>(text).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = r#"{"omegap_hz":2e9,"elements":[{"type":"cap","name":"C","a":"x","b":"0","value":-1e-12}]}"#;
        let f: NetlistFile = serde_json::from_str(text).unwrap();
        assert!(f.to_netlist().is_err());
    }
}
