//! Lumped-element realization of the reference 5/7 GHz circulator.

use std::f64::consts::TAU;

use super::netlist::{Netlist, PumpModel};

const PF: f64 = 1e-12;
const PH: f64 = 1e-12;

/// Three balanced cores (A, B at 5 GHz; C at 7 GHz), each behind one matching
/// resonator and a coupling capacitor to a 50 ohm port. Every core carries a
/// snake inductor; the A and B snakes are pump-coupled to the C snake at
/// 2 GHz, with `dtheta` on the B-C pump.
///
/// The C matching resonator uses 404 pH and a 28.5 pH core mutual, which puts
/// both C-band poles near 7 GHz.
pub fn reference_netlist(delta_m: f64, dtheta: f64) -> Netlist {
    let mut n = Netlist::empty(TAU * 2e9);
    n.pump_model = PumpModel::Reluctance;
    // cores; A and C grounded, B floating and tied to A by a balanced pair
    n.cap("C1A", "a1", "0", 4.36 * PF)
        .ind("L1A", "a1", "0", 400.0 * PH)
        .ind("LSA", "a1", "0", 427.0 * PH);
    n.cap("C1B", "b1p", "b1n", 4.36 * PF)
        .ind("L1B", "b1p", "b1n", 400.0 * PH)
        .ind("LSB", "b1p", "b1n", 427.0 * PH);
    n.cap("CABP", "a1", "b1p", 1.09 * PF)
        .cap("CABN", "0", "b1n", 1.09 * PF);
    n.cap("C1C", "c1", "0", 3.72 * PF)
        .ind("L1C", "c1", "0", 200.0 * PH)
        .ind("LSC", "c1", "0", 427.0 * PH);
    // matching resonators
    n.ind("L2A", "a2", "0", 405.0 * PH)
        .cap("C2A", "a2", "0", 2.22 * PF);
    n.ind("L2B", "b2", "0", 405.0 * PH)
        .cap("C2B", "b2", "0", 2.22 * PF);
    n.ind("L2C", "c2", "0", 404.0 * PH)
        .cap("C2C", "c2", "0", 1.1 * PF);
    n.mutual("L1A", "L2A", 65.0 * PH)
        .mutual("L1B", "L2B", 65.0 * PH)
        .mutual("L1C", "L2C", 28.5 * PH);
    // port coupling
    n.cap("C23A", "a2", "pa", 0.57 * PF)
        .cap("C23B", "b2", "pb", 0.57 * PF)
        .cap("C23C", "c2", "pc", 0.246 * PF);
    n.port("A", "pa", 50.0, 0)
        .port("B", "pb", 50.0, 0)
        .port("C", "pc", 50.0, 1);
    n.pump("PAC", "LSA", "LSC", delta_m, 0.0)
        .pump("PBC", "LSB", "LSC", delta_m, dtheta);
    n.phase_pump = Some(1);
    n
}
