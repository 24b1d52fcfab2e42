//! Harmonic-balance conversion matrix of a linear time-periodic netlist.
//!
//! Harmonics `k` (frequency `w_k = w + k*wp`) are stacked from `-K` to `K`.
//! Node rows are KCL (currents leaving the node). With the reluctance pump
//! model the unknowns are node voltages only and inductors enter through
//! `A L^-1 A^T / (i w_k)`. With the inductance model each harmonic also
//! carries branch currents, with rows `V_a - V_b - i w_k (L I)_k = 0`.
//! A pump `dM cos(wp t - theta)` couples harmonic `k` to `k-1` with weight
//! `e^{-i theta}/2` and to `k+1` with `e^{+i theta}/2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::netlist::{Netlist, PumpModel, Topology};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};
use crate::scatter::{check_grid, Channel, Normalization, ScatterResult};
use crate::units::rad_to_hz;

/// Sidebands closer to DC than this fraction of the probe frequency make the
/// flux/voltage relation singular.
const DC_GUARD: f64 = 1e-9;

/// Which band the probe frequency sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeBand {
    /// Probe at harmonic 0 of the low-band ports.
    #[default]
    Low,
    /// Probe at the high band; low-band ports are read one pump quantum below.
    High,
}

impl ProbeBand {
    fn offset(self) -> i32 {
        match self {
            ProbeBand::Low => 0,
            ProbeBand::High => 1,
        }
    }
}

impl std::str::FromStr for ProbeBand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Self::Low),
            "high" => Ok(Self::High),
            other => Err(Error::InvalidArgument(format!(
                "unknown probe band '{other}'"
            ))),
        }
    }
}

/// Port channels in port order for a probe in `band`.
pub fn circuit_channels(netlist: &Netlist, band: ProbeBand) -> Vec<Channel> {
    netlist
        .ports
        .iter()
        .map(|p| Channel::new(p.label.clone(), p.harmonic - band.offset()))
        .collect()
}

struct Layout {
    nodes: usize,
    branches: usize,
    harmonics: usize,
}

impl Layout {
    fn block(&self) -> usize {
        self.nodes + self.branches
    }
    fn dim(&self) -> usize {
        self.block() * (2 * self.harmonics + 1)
    }
    fn v(&self, node: usize, k: i32) -> usize {
        (k + self.harmonics as i32) as usize * self.block() + node
    }
    fn i(&self, branch: usize, k: i32) -> usize {
        (k + self.harmonics as i32) as usize * self.block() + self.nodes + branch
    }
}

/// Adds `val * (V_c - V_d)` at harmonic `kc` to the currents leaving `a` (and
/// entering `b`) at harmonic `kr`.
#[allow(clippy::too_many_arguments)]
fn stamp(
    y: &mut CMatrix,
    lay: &Layout,
    kr: i32,
    kc: i32,
    (a, b): (Option<usize>, Option<usize>),
    (c, d): (Option<usize>, Option<usize>),
    val: Complex64,
) {
    for (row, sr) in [(a, 1.0), (b, -1.0)] {
        let Some(row) = row else { continue };
        for (col, sc) in [(c, 1.0), (d, -1.0)] {
            let Some(col) = col else { continue };
            y[(lay.v(row, kr), lay.v(col, kc))] += val * (sr * sc);
        }
    }
}

fn assemble(
    topo: &Topology,
    model: PumpModel,
    omega: f64,
    omega_p: f64,
    harmonics: usize,
) -> Result<(CMatrix, Layout)> {
    let nodal = model == PumpModel::Reluctance;
    let lay = Layout {
        nodes: topo.nodes.len(),
        branches: if nodal { 0 } else { topo.branches.len() },
        harmonics,
    };
    let kmax = harmonics as i32;
    let wk = |k: i32| omega + k as f64 * omega_p;
    for k in -kmax..=kmax {
        if wk(k).abs() <= DC_GUARD * omega.abs() {
            return Err(Error::Singular {
                freq_hz: rad_to_hz(omega),
                context: Some(format!("sideband {k} falls on DC")),
            });
        }
    }
    let i = Complex64::i();
    let mut y = CMatrix::zeros(lay.dim(), lay.dim());
    for k in -kmax..=kmax {
        let w = wk(k);
        for &(a, b, c) in &topo.caps {
            stamp(&mut y, &lay, k, k, (a, b), (a, b), i * w * c);
        }
        for p in &topo.ports {
            y[(lay.v(p.node, k), lay.v(p.node, k))] += 1.0 / p.z0;
        }
        if nodal {
            let inv_jw = 1.0 / (i * w);
            for r in 0..lay.nodes {
                for c in 0..lay.nodes {
                    let g = topo.node_reluctance[(r, c)];
                    if g != 0.0 {
                        y[(lay.v(r, k), lay.v(c, k))] += inv_jw * g;
                    }
                }
            }
        }
        for (br, &(a, b)) in topo.branches.iter().enumerate().filter(|_| !nodal) {
            let col = lay.i(br, k);
            let row = lay.i(br, k);
            if let Some(a) = a {
                y[(lay.v(a, k), col)] += 1.0;
                y[(row, lay.v(a, k))] += 1.0;
            }
            if let Some(b) = b {
                y[(lay.v(b, k), col)] -= 1.0;
                y[(row, lay.v(b, k))] -= 1.0;
            }
            for other in 0..lay.branches {
                let l = topo.inductance[(br, other)];
                if l != 0.0 {
                    y[(row, lay.i(other, k))] -= i * w * l;
                }
            }
        }
        for p in &topo.pumps {
            if p.delta_m == 0.0 {
                continue;
            }
            for (kc, phase) in [
                (k - 1, Complex64::from_polar(0.5, -p.theta)),
                (k + 1, Complex64::from_polar(0.5, p.theta)),
            ] {
                if kc.abs() > kmax {
                    continue;
                }
                match model {
                    PumpModel::Inductance => {
                        let coef = -i * w * p.delta_m * phase;
                        y[(lay.i(p.b1, k), lay.i(p.b2, kc))] += coef;
                        y[(lay.i(p.b2, k), lay.i(p.b1, kc))] += coef;
                    }
                    PumpModel::Reluctance => {
                        let l1 = topo.inductance[(p.b1, p.b1)];
                        let l2 = topo.inductance[(p.b2, p.b2)];
                        let d_gamma = -p.delta_m / (l1 * l2);
                        // branch current d_gamma * flux, flux = V / (i w)
                        let coef = d_gamma * phase / (i * wk(kc));
                        let n1 = topo.branches[p.b1];
                        let n2 = topo.branches[p.b2];
                        stamp(&mut y, &lay, k, kc, n1, n2, coef);
                        stamp(&mut y, &lay, k, kc, n2, n1, coef);
                    }
                }
            }
        }
    }
    Ok((y, lay))
}

/// Assembled conversion matrix. Unknowns are grouped in blocks of `block`
/// per harmonic, harmonics ascending from `-harmonics`.
#[derive(Debug, Clone)]
pub struct ConversionSystem {
    pub matrix: CMatrix,
    pub block: usize,
    pub harmonics: usize,
}

impl ConversionSystem {
    /// Harmonic index of unknown `idx`.
    pub fn harmonic_of(&self, idx: usize) -> i32 {
        (idx / self.block) as i32 - self.harmonics as i32
    }
}

/// The conversion matrix of `netlist` at probe frequency `omega`.
pub fn conversion_matrix(
    netlist: &Netlist,
    omega: f64,
    harmonics: usize,
) -> Result<ConversionSystem> {
    if !(1..=MAX_HARMONICS).contains(&harmonics) {
        return Err(Error::InvalidGrid(format!(
            "harmonic order {harmonics} is outside 1..={MAX_HARMONICS}"
        )));
    }
    let topo = netlist.topology()?;
    let (matrix, lay) = assemble(&topo, netlist.pump_model, omega, netlist.omega_p, harmonics)?;
    Ok(ConversionSystem {
        matrix,
        block: lay.block(),
        harmonics,
    })
}

/// Largest supported harmonic truncation order.
pub const MAX_HARMONICS: usize = 5;

fn check_harmonics(channels: &[Channel], harmonics: usize) -> Result<()> {
    if !(1..=MAX_HARMONICS).contains(&harmonics) {
        return Err(Error::InvalidGrid(format!(
            "harmonic order {harmonics} is outside 1..={MAX_HARMONICS}"
        )));
    }
    if channels.is_empty() {
        return Err(Error::InvalidNetlist("netlist has no ports".into()));
    }
    if let Some(c) = channels
        .iter()
        .find(|c| c.harmonic.unsigned_abs() as usize > harmonics)
    {
        return Err(Error::InvalidGrid(format!(
            "channel {}@{} lies outside the {harmonics}-harmonic truncation",
            c.port, c.harmonic
        )));
    }
    Ok(())
}

/// Photon-flux S-matrix between the port channels at probe frequency `omega`,
/// with harmonics `-harmonics..=harmonics` retained.
pub fn circuit_scattering(
    netlist: &Netlist,
    omega: f64,
    harmonics: usize,
    band: ProbeBand,
) -> Result<CMatrix> {
    let topo = netlist.topology()?;
    let channels = circuit_channels(netlist, band);
    check_harmonics(&channels, harmonics)?;
    scatter_point(netlist, &topo, &channels, omega, harmonics)
}

fn scatter_point(
    netlist: &Netlist,
    topo: &Topology,
    channels: &[Channel],
    omega: f64,
    harmonics: usize,
) -> Result<CMatrix> {
    let singular = || Error::Singular {
        freq_hz: rad_to_hz(omega),
        context: Some("conversion matrix".into()),
    };
    let freqs: Vec<f64> = channels
        .iter()
        .map(|c| c.omega(omega, netlist.omega_p))
        .collect();
    if let Some(f) = freqs.iter().find(|f| **f <= 0.0) {
        return Err(Error::InvalidGrid(format!(
            "channel frequency {f} is not positive"
        )));
    }
    let (y, lay) = assemble(topo, netlist.pump_model, omega, netlist.omega_p, harmonics)?;
    let n = channels.len();
    // Norton equivalent of a unit source behind z0 at each channel in turn.
    let mut rhs = CMatrix::zeros(lay.dim(), n);
    for (j, (c, p)) in channels.iter().zip(&topo.ports).enumerate() {
        rhs[(lay.v(p.node, c.harmonic), j)] = Complex64::new(1.0 / p.z0, 0.0);
    }
    let x = Lu::new(y)
        .ok_or_else(singular)?
        .solve(&rhs)
        .ok_or_else(singular)?;
    let mut s = CMatrix::zeros(n, n);
    for j in 0..n {
        let zj = topo.ports[j].z0;
        let a = 0.5 / zj.sqrt();
        for i in 0..n {
            let zi = topo.ports[i].z0;
            let v = x[(lay.v(topo.ports[i].node, channels[i].harmonic), j)];
            let mut b = v / zi.sqrt();
            if i == j {
                b -= a;
            }
            s[(i, j)] = b / a * (freqs[j] / freqs[i]).sqrt();
        }
    }
    Ok(s)
}

/// Circuit S-matrix over a probe grid at the netlist's current pump phase.
pub fn circuit_sweep(
    netlist: &Netlist,
    omegas: &[f64],
    harmonics: usize,
    band: ProbeBand,
    normalization: Normalization,
) -> Result<ScatterResult> {
    check_grid(omegas)?;
    let topo = netlist.topology()?;
    let channels = circuit_channels(netlist, band);
    check_harmonics(&channels, harmonics)?;
    let s = crate::parallel::pool().install(|| {
        omegas
            .par_iter()
            .enumerate()
            .map(|(index, &w)| {
                scatter_point(netlist, &topo, &channels, w, harmonics).map_err(|e| {
                    Error::AtGridPoint {
                        index,
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let result = ScatterResult {
        channels,
        omegas: omegas.to_vec(),
        omega_p: netlist.omega_p,
        dtheta: netlist.phase(),
        normalization: Normalization::PhotonFlux,
        s,
    };
    Ok(result.renormalized(normalization))
}

/// Photon-flux sweeps at every relative pump phase in `dthetas`, evaluated
/// in parallel over the whole phase x frequency grid.
pub fn circuit_phase_sweeps(
    netlist: &Netlist,
    omegas: &[f64],
    dthetas: &[f64],
    harmonics: usize,
    band: ProbeBand,
) -> Result<Vec<ScatterResult>> {
    check_grid(omegas)?;
    if dthetas.is_empty() {
        return Err(Error::InvalidGrid("phase grid is empty".into()));
    }
    if let Some(t) = dthetas.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("phase {t} is not finite")));
    }
    let phased: Vec<Netlist> = dthetas
        .iter()
        .map(|&t| netlist.with_phase(t))
        .collect::<Result<_>>()?;
    let topos: Vec<Topology> = phased.iter().map(|n| n.topology()).collect::<Result<_>>()?;
    let channels = circuit_channels(netlist, band);
    check_harmonics(&channels, harmonics)?;
    let nf = omegas.len();
    let flat = crate::parallel::pool().install(|| {
        (0..dthetas.len() * nf)
            .into_par_iter()
            .map(|idx| {
                let (p, f) = (idx / nf, idx % nf);
                scatter_point(&phased[p], &topos[p], &channels, omegas[f], harmonics).map_err(|e| {
                    Error::AtGridPoint {
                        index: idx,
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut it = flat.into_iter();
    Ok(dthetas
        .iter()
        .map(|&t| ScatterResult {
            channels: channels.clone(),
            omegas: omegas.to_vec(),
            omega_p: netlist.omega_p,
            dtheta: t,
            normalization: Normalization::PhotonFlux,
            s: it.by_ref().take(nf).collect(),
        })
        .collect())
}
