//! Lumped-element circuit model: netlists, pumped conversion-matrix
//! scattering, natural modes, and pump calibration.

mod calibrate;
mod conversion;
mod modal;
mod netlist;
mod reference;

pub use calibrate::{calibrate_pump, optimal_phase, Handedness, PhaseOptimum, PumpCalibration};
pub use conversion::{
    circuit_channels, circuit_phase_sweeps, circuit_scattering, circuit_sweep, conversion_matrix,
    ConversionSystem, ProbeBand, MAX_HARMONICS,
};
pub use modal::{lossless_frequencies, modal_analysis, NaturalMode};
pub use netlist::{Capacitor, Inductor, Mutual, Netlist, Port, PumpModel, PumpedMutual, GROUND};
pub use reference::reference_netlist;
