//! Scattering results shared by the coupled-mode and circuit solvers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::units::amplitude_db;

/// Magnitudes below this are clamped before taking a nonreciprocity ratio.
pub const NR_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Amplitudes normalized to photon flux; unitary for lossless conversion.
    #[default]
    PhotonFlux,
    /// Amplitudes normalized to power; differs by `sqrt(w_out / w_in)`.
    PowerWave,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "photon_flux" | "photon-flux" | "photon" => Ok(Self::PhotonFlux),
            "power_wave" | "power-wave" | "power" => Ok(Self::PowerWave),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}

/// A port seen at one sideband: its signal oscillates at `w + harmonic * wp`
/// when the probe frequency is `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub port: String,
    pub harmonic: i32,
}

impl Channel {
    pub fn new(port: impl Into<String>, harmonic: i32) -> Self {
        Self {
            port: port.into(),
            harmonic,
        }
    }

    pub fn omega(&self, probe: f64, omega_p: f64) -> f64 {
        probe + self.harmonic as f64 * omega_p
    }
}

/// S-matrices over a probe-frequency grid at one pump phase.
/// `s[i][(out, in)]` is indexed in `channels` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    pub channels: Vec<Channel>,
    /// Probe frequencies of the harmonic-0 frame, rad/s.
    pub omegas: Vec<f64>,
    pub omega_p: f64,
    /// Relative pump phase, rad.
    pub dtheta: f64,
    pub normalization: Normalization,
    pub s: Vec<CMatrix>,
}

impl ScatterResult {
    pub fn channel_index(&self, port: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.port == port)
    }

    fn require(&self, port: &str) -> Result<usize> {
        self.channel_index(port)
            .ok_or_else(|| Error::InvalidArgument(format!("no channel for port '{port}'")))
    }

    /// `S[out, in]` at every grid point.
    pub fn entry(&self, out: &str, inp: &str) -> Result<Vec<Complex64>> {
        let (o, i) = (self.require(out)?, self.require(inp)?);
        Ok(self.s.iter().map(|m| m[(o, i)]).collect())
    }

    pub fn entry_db(&self, out: &str, inp: &str) -> Result<Vec<f64>> {
        Ok(self
            .entry(out, inp)?
            .iter()
            .map(|z| amplitude_db(z.norm()))
            .collect())
    }

    /// Same data in the other amplitude normalization.
    pub fn renormalized(&self, target: Normalization) -> ScatterResult {
        if target == self.normalization {
            return self.clone();
        }
        let mut out = self.clone();
        out.normalization = target;
        for (m, &w) in out.s.iter_mut().zip(&self.omegas) {
            let freqs: Vec<f64> = self
                .channels
                .iter()
                .map(|c| c.omega(w, self.omega_p))
                .collect();
            for o in 0..freqs.len() {
                for i in 0..freqs.len() {
                    // power = photon * sqrt(w_out / w_in)
                    let ratio = (freqs[o] / freqs[i]).sqrt();
                    m[(o, i)] *= match target {
                        Normalization::PowerWave => ratio,
                        Normalization::PhotonFlux => 1.0 / ratio,
                    };
                }
            }
        }
        out
    }

    /// Restricts to grid points with `lo <= w <= hi`.
    pub fn band(&self, lo: f64, hi: f64) -> ScatterResult {
        let keep: Vec<usize> = (0..self.omegas.len())
            .filter(|&k| self.omegas[k] >= lo && self.omegas[k] <= hi)
            .collect();
        ScatterResult {
            omegas: keep.iter().map(|&k| self.omegas[k]).collect(),
            s: keep.iter().map(|&k| self.s[k].clone()).collect(),
            ..self.clone()
        }
    }
}

/// Value reported for a cell whose reverse transmission vanished.
pub const NR_CLAMPED_DB: f64 = 300.0;

/// `20 log10(|S_fwd| / |S_rev|)`. When `|S_rev| < NR_CLAMP` the ratio is
/// replaced by [`NR_CLAMPED_DB`] (or 0 if the forward entry vanished too) and
/// the flag is set.
pub fn nonreciprocity_db(fwd: Complex64, rev: Complex64) -> (f64, bool) {
    let (f, r) = (fwd.norm(), rev.norm());
    if r < NR_CLAMP {
        return (if f < NR_CLAMP { 0.0 } else { NR_CLAMPED_DB }, true);
    }
    (20.0 * (f.max(NR_CLAMP) / r).log10(), false)
}

/// Nonreciprocity of one ordered port pair over a phase x frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMap {
    /// E.g. `"BA"` for transmission A -> B over B -> A.
    pub name: String,
    pub out: String,
    pub inp: String,
    /// `n_db[phase][freq]`.
    pub n_db: Vec<Vec<f64>>,
    /// Cells where the reverse entry was clamped, same indexing.
    pub clamped: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonreciprocityMap {
    pub omegas: Vec<f64>,
    pub dthetas: Vec<f64>,
    pub pairs: Vec<PairMap>,
}

impl NonreciprocityMap {
    /// Builds the map for the cyclic pairs `(p1,p0)`, `(p2,p1)`, `(p0,p2)`
    /// of the first three channels. Each result must share one grid.
    pub fn from_results(results: &[ScatterResult]) -> Result<Self> {
        let first = results
            .first()
            .ok_or_else(|| Error::InvalidArgument("no sweeps to build a map from".into()))?;
        if first.channels.len() < 3 {
            return Err(Error::InvalidArgument(
                "nonreciprocity map needs three ports".into(),
            ));
        }
        let ports: Vec<&str> = first.channels[..3]
            .iter()
            .map(|c| c.port.as_str())
            .collect();
        let cycle = [
            (ports[1], ports[0]),
            (ports[2], ports[1]),
            (ports[0], ports[2]),
        ];
        let mut pairs = Vec::new();
        for (out, inp) in cycle {
            let mut n_db = Vec::with_capacity(results.len());
            let mut clamped = Vec::with_capacity(results.len());
            for r in results {
                if r.omegas != first.omegas || r.channels != first.channels {
                    return Err(Error::InvalidArgument("sweeps do not share a grid".into()));
                }
                let fwd = r.entry(out, inp)?;
                let rev = r.entry(inp, out)?;
                let (row, flags): (Vec<f64>, Vec<bool>) = fwd
                    .iter()
                    .zip(&rev)
                    .map(|(f, b)| nonreciprocity_db(*f, *b))
                    .unzip();
                n_db.push(row);
                clamped.push(flags);
            }
            pairs.push(PairMap {
                name: format!("{out}{inp}"),
                out: out.to_string(),
                inp: inp.to_string(),
                n_db,
                clamped,
            });
        }
        Ok(Self {
            omegas: first.omegas.clone(),
            dthetas: results.iter().map(|r| r.dtheta).collect(),
            pairs,
        })
    }

    pub fn pair(&self, name: &str) -> Option<&PairMap> {
        self.pairs.iter().find(|p| p.name == name)
    }
}

/// Rejects empty, unsorted, non-finite or non-positive probe grids.
pub fn check_grid(omegas: &[f64]) -> Result<()> {
    if omegas.is_empty() {
        return Err(Error::InvalidGrid("frequency grid is empty".into()));
    }
    if let Some(w) = omegas.iter().find(|w| !w.is_finite() || **w <= 0.0) {
        return Err(Error::InvalidGrid(format!(
            "frequency {w} is not a positive finite number"
        )));
    }
    if let Some(k) = (1..omegas.len()).find(|&k| omegas[k] <= omegas[k - 1]) {
        return Err(Error::InvalidGrid(format!(
            "frequency grid is not increasing at index {k}"
        )));
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
