//! Pump-amplitude calibration against the coupled-mode design and the search
//! for the circulating pump phase.

use serde::{Deserialize, Serialize};

use super::conversion::{circuit_channels, circuit_phase_sweeps, circuit_scattering, ProbeBand};
use super::netlist::Netlist;
use crate::error::{Error, Result};
use crate::scatter::{check_grid, linspace, nonreciprocity_db, ScatterResult};
use crate::synthesis::{build_circulator_graph, ReducedDesign};

/// Upper end of the calibration search as a fraction of `sqrt(L1 L2)`.
const MAX_COUPLING_FRACTION: f64 = 0.9;
const BRACKET_STEP: f64 = 1.2;
const ROOT_RTOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpCalibration {
    /// Calibrated pump amplitude, H. Applies to every pumped mutual.
    pub delta_m: f64,
    /// Lumped-element estimate the search started from, H.
    pub seed: f64,
    /// Conversion-port reflection magnitude of the one-pump reference graph.
    pub target: f64,
    pub achieved: f64,
    pub evaluations: usize,
}

/// Parallel combination of all inductors across the same node pair as `name`.
fn effective_inductance(netlist: &Netlist, name: &str) -> Result<f64> {
    let l = netlist
        .inductor(name)
        .ok_or_else(|| Error::InvalidNetlist(format!("unknown inductor '{name}'")))?;
    let same =
        |x: &super::netlist::Inductor| (x.a == l.a && x.b == l.b) || (x.a == l.b && x.b == l.a);
    let inv: f64 = netlist
        .inductors
        .iter()
        .filter(|x| same(x))
        .map(|x| 1.0 / x.value)
        .sum();
    Ok(1.0 / inv)
}

/// Finds the pump amplitude at which the lumped circuit, pumped on a single
/// bridge (the first pump that is not phase-swept), reflects at its
/// up-converted port with the same magnitude as the coupled-mode graph pumped
/// on the corresponding single edge at `target_beta_p`. Both are probed at
/// the low-band center. The result is applied to all pumps.
pub fn calibrate_pump(
    netlist: &Netlist,
    design: &ReducedDesign,
    target_beta_p: f64,
    harmonics: usize,
) -> Result<PumpCalibration> {
    netlist.validate()?;
    if !target_beta_p.is_finite() || target_beta_p < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target coupling {target_beta_p} must be non-negative"
        )));
    }
    let phase_idx = netlist.phase_pump_index();
    let reference = (0..netlist.pumps.len())
        .find(|&k| Some(k) != phase_idx)
        .ok_or_else(|| {
            Error::InvalidNetlist("calibration needs a pump besides the phase-swept one".into())
        })?;
    let conv_port = {
        let ups: Vec<_> = netlist.ports.iter().filter(|p| p.harmonic != 0).collect();
        match ups.as_slice() {
            [p] => p.label.clone(),
            _ => {
                return Err(Error::InvalidNetlist(
                    "calibration needs exactly one up-converted port".into(),
                ))
            }
        }
    };

    let mut graph = build_circulator_graph(&design.clone().with_core(
        design.beta_ab,
        target_beta_p,
        design.dtheta,
    ))?;
    if let Some(p) = graph.phase_edge {
        graph.edges[p].magnitude = 0.0;
    }
    let g_chan = graph
        .channels()
        .iter()
        .position(|c| c.port == conv_port)
        .ok_or_else(|| Error::InvalidArgument(format!("design has no port '{conv_port}'")))?;
    let target = graph.scattering(design.omega_a)?[(g_chan, g_chan)].norm();

    let pump = &netlist.pumps[reference];
    let l1 = netlist
        .inductor(&pump.l1)
        .map(|l| l.value)
        .unwrap_or_default();
    let l2 = netlist
        .inductor(&pump.l2)
        .map(|l| l.value)
        .unwrap_or_default();
    let leff1 = effective_inductance(netlist, &pump.l1)?;
    let leff2 = effective_inductance(netlist, &pump.l2)?;
    let coupling = target_beta_p * design.gamma0;
    let seed = 4.0 * coupling * l1 * l2
        / ((design.omega_a * design.omega_c).sqrt() * (leff1 * leff2).sqrt());

    if target_beta_p == 0.0 {
        return Ok(PumpCalibration {
            delta_m: 0.0,
            seed: 0.0,
            target,
            achieved: target,
            evaluations: 0,
        });
    }

    let c_chan = circuit_channels(netlist, ProbeBand::Low)
        .iter()
        .position(|c| c.port == conv_port)
        .expect("port exists");
    let mut single = netlist.with_delta_m(0.0);
    let mut evaluations = 0usize;
    let mut residual = |dm: f64| -> Result<f64> {
        evaluations += 1;
        single.pumps[reference].delta_m = dm;
        let s = circuit_scattering(&single, design.omega_a, harmonics, ProbeBand::Low)?;
        Ok(s[(c_chan, c_chan)].norm() - target)
    };

    let upper = MAX_COUPLING_FRACTION * (l1 * l2).sqrt();
    let start = seed.clamp(1e-6 * upper, upper);
    let f_start = residual(start)?;
    let (mut lo, mut hi) = if f_start > 0.0 {
        let mut hi = start;
        loop {
            if hi >= upper {
                return Err(Error::Calibration(format!(
                    "no sign change below the coupling limit ({upper:e} H)"
                )));
            }
            let lo = hi;
            hi = (hi * BRACKET_STEP).min(upper);
            if residual(hi)? <= 0.0 {
                break (lo, hi);
            }
        }
    } else {
        let mut hi = start;
        loop {
            let lo = hi / BRACKET_STEP;
            if lo < 1e-6 * upper {
                return Err(Error::Calibration("no sign change above zero pump".into()));
            }
            if residual(lo)? > 0.0 {
                break (lo, hi);
            }
            hi = lo;
        }
    };
    while hi - lo > ROOT_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta_m = 0.5 * (lo + hi);
    let achieved = residual(delta_m)? + target;
    Ok(PumpCalibration {
        delta_m,
        seed,
        target,
        achieved,
        evaluations,
    })
}

/// Sense of circulation between the first two ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    /// Transmission from the first port to the second dominates.
    Right,
    /// Transmission from the second port to the first dominates.
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptimum {
    /// rad, in `(-pi, pi]`.
    pub dtheta: f64,
    /// Band-mean nonreciprocity in the chosen sense, dB.
    pub mean_nonreciprocity_db: f64,
}

/// Coarse grid spacing of the phase search.
const COARSE_POINTS: usize = 73;
const REFINE_TOL: f64 = 1e-4;

fn mean_forward_nr(r: &ScatterResult, handedness: Handedness) -> f64 {
    let (out, inp) = match handedness {
        Handedness::Right => (1, 0),
        Handedness::Left => (0, 1),
    };
    let total: f64 =
        r.s.iter()
            .map(|m| nonreciprocity_db(m[(out, inp)], m[(inp, out)]).0)
            .sum();
    total / r.s.len() as f64
}

/// Relative pump phase maximizing the band-mean nonreciprocity between the
/// first two ports in the chosen sense: a 5-degree scan over a full turn,
/// then golden-section refinement around the best grid point.
pub fn optimal_phase(
    netlist: &Netlist,
    omegas: &[f64],
    harmonics: usize,
    handedness: Handedness,
) -> Result<PhaseOptimum> {
    check_grid(omegas)?;
    if netlist.ports.len() < 2 {
        return Err(Error::InvalidNetlist("phase search needs two ports".into()));
    }
    let pi = std::f64::consts::PI;
    let grid: Vec<f64> = linspace(-pi, pi, COARSE_POINTS)[..COARSE_POINTS - 1].to_vec();
    let sweeps = circuit_phase_sweeps(netlist, omegas, &grid, harmonics, ProbeBand::Low)?;
    let scores: Vec<f64> = sweeps
        .iter()
        .map(|r| mean_forward_nr(r, handedness))
        .collect();
    let best = (0..scores.len())
        .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .expect("non-empty grid");
    let step = grid[1] - grid[0];

    let score = |t: f64| -> Result<f64> {
        let r = circuit_phase_sweeps(netlist, omegas, &[t], harmonics, ProbeBand::Low)?;
        Ok(mean_forward_nr(&r[0], handedness))
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (grid[best] - step, grid[best] + step);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (score(x1)?, score(x2)?);
    while b - a > REFINE_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = score(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = score(x2)?;
        }
    }
    let (mut t, mut f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if scores[best] > f {
        t = grid[best];
        f = scores[best];
    }
    let wrapped = (t + pi).rem_euclid(2.0 * pi) - pi;
    let wrapped = if wrapped <= -pi {
        wrapped + 2.0 * pi
    } else {
        wrapped
    };
    Ok(PhaseOptimum {
        dtheta: wrapped,
        mean_nonreciprocity_db: f,
    })
}
