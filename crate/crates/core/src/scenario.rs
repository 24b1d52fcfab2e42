//! Scenario engine behind the command line: one serializable config per run,
//! deterministic file outputs, and the scattering comparison report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{
    calibrate_pump, circuit_phase_sweeps, optimal_phase, reference_netlist, Handedness, Netlist,
    ProbeBand, PumpModel, MAX_HARMONICS,
};
use crate::error::{Error, Result};
use crate::io::{
    read_design, read_netlist, read_scatter_csv, write_nonreciprocity_csv, write_scatter_csv,
    SynthesisFile,
};
use crate::modegraph::{cme_phase_sweeps, ModeGraph};
use crate::scatter::{linspace, NonreciprocityMap, Normalization, ScatterResult};
use crate::synthesis::{build_circulator_graph, reduced_parameters, Prototype, ReducedDesign};
use crate::units::{deg_to_rad, hz_to_rad, rad_to_deg, rad_to_hz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Synth,
    CmeSweep,
    CmeMap,
    CircuitSweep,
    CircuitMap,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl FreqGrid {
    pub fn omegas(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidArgument(
                "freq.points must be at least 1".into(),
            ));
        }
        if !(self.start_hz > 0.0) || !self.stop_hz.is_finite() || self.stop_hz < self.start_hz {
            return Err(Error::InvalidArgument(
                "freq grid needs 0 < start_hz <= stop_hz".into(),
            ));
        }
        if self.points > 1 && self.stop_hz == self.start_hz {
            return Err(Error::InvalidArgument(
                "freq grid with several points needs stop_hz > start_hz".into(),
            ));
        }
        Ok(linspace(
            hz_to_rad(self.start_hz),
            hz_to_rad(self.stop_hz),
            self.points,
        ))
    }
}

/// A single phase (`stop_deg` absent, one point) or an inclusive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub start_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_deg: Option<f64>,
    #[serde(default = "one")]
    pub points: usize,
}

fn one() -> usize {
    1
}

impl PhaseGrid {
    pub fn single(deg: f64) -> Self {
        Self {
            start_deg: deg,
            stop_deg: None,
            points: 1,
        }
    }

    pub fn radians(&self) -> Result<Vec<f64>> {
        let stop = self.stop_deg.unwrap_or(self.start_deg);
        if self.points == 0 {
            return Err(Error::InvalidArgument(
                "dtheta.points must be at least 1".into(),
            ));
        }
        if !self.start_deg.is_finite() || !stop.is_finite() || stop < self.start_deg {
            return Err(Error::InvalidArgument(
                "dtheta grid needs start_deg <= stop_deg".into(),
            ));
        }
        if self.points > 1 && stop == self.start_deg {
            return Err(Error::InvalidArgument(
                "dtheta grid with several points needs stop_deg > start_deg".into(),
            ));
        }
        Ok(linspace(self.start_deg, stop, self.points)
            .into_iter()
            .map(deg_to_rad)
            .collect())
    }
}

/// Parameters of the synthesized design (also the default design of the
/// coupled-mode scenarios and the calibration reference of the circuit ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub order: usize,
    pub ripple_db: f64,
    pub bw_hz: f64,
    pub center_low_hz: f64,
    pub center_high_hz: f64,
    pub beta_ab: f64,
    pub beta_p: f64,
    pub dtheta_deg: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            order: 2,
            ripple_db: 0.01,
            bw_hz: 250e6,
            center_low_hz: 5e9,
            center_high_hz: 7e9,
            beta_ab: 0.5,
            beta_p: 0.5,
            dtheta_deg: -90.0,
        }
    }
}

impl SynthParams {
    pub fn prototype(&self) -> Result<Prototype> {
        Prototype::new(
            self.order,
            self.ripple_db,
            hz_to_rad(self.center_low_hz),
            hz_to_rad(self.center_high_hz),
            hz_to_rad(self.bw_hz),
        )
    }

    pub fn design(&self) -> Result<ReducedDesign> {
        Ok(reduced_parameters(&self.prototype()?)?.with_core(
            self.beta_ab,
            self.beta_p,
            deg_to_rad(self.dtheta_deg),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitParams {
    pub probe_band: ProbeBand,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_model: Option<PumpModel>,
    /// Pump amplitude in H; takes precedence over calibration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    /// Calibrate the pump to this reduced coupling. Defaults to the design
    /// value when the built-in netlist is used and `delta_m` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate_beta_p: Option<f64>,
    /// Replace the phase grid by the optimum for this circulation sense.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<Handedness>,
    /// Band for the phase optimum, Hz; defaults to 200 MHz around the low band.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize_band_hz: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    pub a: PathBuf,
    pub b: PathBuf,
    pub band_hz: [f64; 2],
    pub threshold_db: f64,
    /// Entries as `<out><in>` port labels, e.g. `"BA"`; all entries if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_dtheta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_dtheta_deg: Option<f64>,
}

pub const DEFAULT_HARMONICS: usize = 2;

fn default_harmonics() -> usize {
    DEFAULT_HARMONICS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<FreqGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtheta: Option<PhaseGrid>,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub netlist: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub synth: SynthParams,
    #[serde(default)]
    pub circuit: CircuitParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareParams>,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            freq: None,
            dtheta: None,
            harmonics: DEFAULT_HARMONICS,
            design: None,
            netlist: None,
            output: None,
            normalization: Normalization::default(),
            synth: SynthParams::default(),
            circuit: CircuitParams::default(),
            compare: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::to_json_string(self)
    }

    pub fn validate(&self) -> Result<()> {
        use ScenarioKind::*;
        if !(1..=MAX_HARMONICS).contains(&self.harmonics) {
            return Err(Error::InvalidArgument(format!(
                "harmonics must be in 1..={MAX_HARMONICS}"
            )));
        }
        if let Some(f) = &self.freq {
            f.omegas()?;
        }
        if let Some(p) = &self.dtheta {
            p.radians()?;
        }
        match self.scenario {
            Synth => {
                self.synth.design()?;
            }
            CmeSweep | CmeMap | CircuitSweep | CircuitMap => {
                if self.freq.is_none() {
                    return Err(Error::InvalidArgument(
                        "freq grid is required for sweeps".into(),
                    ));
                }
            }
            Compare => {
                let c = self.compare.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("compare parameters are required".into())
                })?;
                if !(c.band_hz[0] <= c.band_hz[1]) {
                    return Err(Error::InvalidArgument("compare band needs lo <= hi".into()));
                }
                if !(c.threshold_db >= 0.0) {
                    return Err(Error::InvalidArgument(
                        "threshold_db must be non-negative".into(),
                    ));
                }
            }
        }
        if matches!(self.scenario, CmeMap | CircuitMap) && self.circuit.optimal.is_some() {
            return Err(Error::InvalidArgument(
                "maps take a phase grid, not an optimal phase".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDiff {
    pub entry: String,
    pub max_abs_db: f64,
    pub mean_abs_db: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub band_hz: [f64; 2],
    pub threshold_db: f64,
    pub entries: Vec<EntryDiff>,
    pub passed: bool,
}

/// Splits `"BA"` into `(out, in)` channel indices using the result's port labels.
fn parse_entry(r: &ScatterResult, name: &str) -> Result<(usize, usize)> {
    let name = name.trim().trim_start_matches("S_").trim_start_matches('S');
    for cut in 1..name.len() {
        if !name.is_char_boundary(cut) {
            continue;
        }
        if let (Some(o), Some(i)) = (r.channel_index(&name[..cut]), r.channel_index(&name[cut..])) {
            return Ok((o, i));
        }
    }
    Err(Error::InvalidArgument(format!(
        "entry '{name}' does not name two ports"
    )))
}

/// Per-entry `|dB(a) - dB(b)|` statistics over `[lo, hi]` (rad/s). Both inputs
/// must carry the same channels and exactly the same in-band frequencies.
pub fn compare_results(
    a: &ScatterResult,
    b: &ScatterResult,
    band: (f64, f64),
    threshold_db: f64,
    entries: Option<&[String]>,
) -> Result<ComparisonReport> {
    if a.channels != b.channels {
        return Err(Error::InvalidArgument(
            "inputs have different channels".into(),
        ));
    }
    let (ba, bb) = (a.band(band.0, band.1), b.band(band.0, band.1));
    if ba.omegas.is_empty() {
        return Err(Error::InvalidGrid(
            "no frequencies inside the comparison band".into(),
        ));
    }
    let same = ba.omegas.len() == bb.omegas.len()
        && ba
            .omegas
            .iter()
            .zip(&bb.omegas)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()));
    if !same {
        let first = ba
            .omegas
            .iter()
            .zip(&bb.omegas)
            .find(|(x, y)| (*x - *y).abs() > 1e-12 * x.abs().max(y.abs()))
            .map(|(x, _)| format!(" (first mismatch near {:.6e} Hz)", rad_to_hz(*x)))
            .unwrap_or_default();
        return Err(Error::InvalidGrid(format!(
            "frequency grids differ inside the band{first}"
        )));
    }
    let pairs: Vec<(usize, usize)> = match entries {
        Some(list) => list
            .iter()
            .map(|e| parse_entry(a, e))
            .collect::<Result<_>>()?,
        None => {
            let n = a.channels.len();
            (0..n).flat_map(|o| (0..n).map(move |i| (o, i))).collect()
        }
    };
    let mut out = Vec::with_capacity(pairs.len());
    for (o, i) in pairs {
        let diffs: Vec<f64> =
            ba.s.iter()
                .zip(&bb.s)
                .map(|(x, y)| {
                    (crate::units::amplitude_db(x[(o, i)].norm())
                        - crate::units::amplitude_db(y[(o, i)].norm()))
                    .abs()
                })
                .collect();
        out.push(EntryDiff {
            entry: format!("{}{}", a.channels[o].port, a.channels[i].port),
            max_abs_db: diffs.iter().cloned().fold(0.0, f64::max),
            mean_abs_db: diffs.iter().sum::<f64>() / diffs.len() as f64,
            points: diffs.len(),
        });
    }
    let passed = out.iter().all(|e| e.max_abs_db <= threshold_db);
    Ok(ComparisonReport {
        band_hz: [rad_to_hz(band.0), rad_to_hz(band.1)],
        threshold_db,
        entries: out,
        passed,
    })
}

fn select_phase<'a>(
    results: &'a [ScatterResult],
    deg: Option<f64>,
    which: &str,
) -> Result<&'a ScatterResult> {
    match deg {
        Some(d) => results
            .iter()
            .find(|r| (rad_to_deg(r.dtheta) - d).abs() < 1e-6)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("input {which} has no sweep at {d} deg"))
            }),
        None if results.len() == 1 => Ok(&results[0]),
        None => Err(Error::InvalidArgument(format!(
            "input {which} holds {} phases; select one",
            results.len()
        ))),
    }
}

/// What a scenario produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioOutcome {
    pub written: Vec<PathBuf>,
    /// Main output when no output path was configured.
    pub stdout: Option<String>,
    /// Human-readable notes (calibration, chosen phase).
    pub notes: Vec<String>,
    pub report: Option<ComparisonReport>,
}

impl ScenarioOutcome {
    /// False only for a comparison that exceeded its threshold.
    pub fn passed(&self) -> bool {
        self.report.as_ref().map(|r| r.passed).unwrap_or(true)
    }
}

fn emit(cfg: &ScenarioConfig, outcome: &mut ScenarioOutcome, bytes: Vec<u8>) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, bytes)?;
            outcome.written.push(path.clone());
        }
        None => outcome.stdout = Some(String::from_utf8(bytes).expect("outputs are UTF-8")),
    }
    Ok(())
}

fn load_graph(cfg: &ScenarioConfig) -> Result<ModeGraph> {
    match &cfg.design {
        Some(p) => read_design(p),
        None => build_circulator_graph(&cfg.synth.design()?),
    }
}

/// Netlist with pump amplitude resolved, plus notes on how it was chosen.
pub fn prepare_netlist(cfg: &ScenarioConfig, notes: &mut Vec<String>) -> Result<Netlist> {
    let from_file = cfg.netlist.is_some();
    let mut netlist = match &cfg.netlist {
        Some(p) => read_netlist(p)?,
        None => reference_netlist(0.0, 0.0),
    };
    if let Some(m) = cfg.circuit.pump_model {
        netlist.pump_model = m;
    }
    let design = cfg.synth.design()?;
    let target = cfg
        .circuit
        .calibrate_beta_p
        .or((!from_file).then_some(design.beta_p));
    if let Some(dm) = cfg.circuit.delta_m {
        netlist = netlist.with_delta_m(dm);
        netlist.validate()?;
    } else if let Some(beta_p) = target {
        let cal = calibrate_pump(&netlist, &design, beta_p, cfg.harmonics)?;
        notes.push(format!(
            "calibrated pump: delta_m = {:.6e} H (seed {:.6e} H, {} evaluations)",
            cal.delta_m, cal.seed, cal.evaluations
        ));
        netlist = netlist.with_delta_m(cal.delta_m);
    }
    Ok(netlist)
}

fn circuit_results(cfg: &ScenarioConfig, notes: &mut Vec<String>) -> Result<Vec<ScatterResult>> {
    let netlist = prepare_netlist(cfg, notes)?;
    let omegas = cfg.freq.as_ref().expect("validated").omegas()?;
    let dthetas = if let Some(h) = cfg.circuit.optimal {
        let design = cfg.synth.design()?;
        let [lo, hi] = cfg.circuit.optimize_band_hz.unwrap_or([
            rad_to_hz(design.omega_a) - 100e6,
            rad_to_hz(design.omega_a) + 100e6,
        ]);
        let band = linspace(hz_to_rad(lo), hz_to_rad(hi), 21);
        let opt = optimal_phase(&netlist, &band, cfg.harmonics, h)?;
        notes.push(format!(
            "optimal {:?}-handed phase: {:.4} deg (mean nonreciprocity {:.3} dB)",
            h,
            rad_to_deg(opt.dtheta),
            opt.mean_nonreciprocity_db
        ));
        vec![opt.dtheta]
    } else {
        match &cfg.dtheta {
            Some(p) => p.radians()?,
            None => vec![netlist.phase()],
        }
    };
    circuit_phase_sweeps(
        &netlist,
        &omegas,
        &dthetas,
        cfg.harmonics,
        cfg.circuit.probe_band,
    )
}

fn cme_results(cfg: &ScenarioConfig) -> Result<Vec<ScatterResult>> {
    let graph = load_graph(cfg)?;
    let omegas = cfg.freq.as_ref().expect("validated").omegas()?;
    let dthetas = match &cfg.dtheta {
        Some(p) => p.radians()?,
        None => vec![graph.phase()],
    };
    cme_phase_sweeps(&graph, &omegas, &dthetas)
}

fn scatter_bytes(results: &[ScatterResult], normalization: Normalization) -> Result<Vec<u8>> {
    let renorm: Vec<ScatterResult> = results
        .iter()
        .map(|r| r.renormalized(normalization))
        .collect();
    let mut buf = Vec::new();
    write_scatter_csv(&renorm, &mut buf)?;
    Ok(buf)
}

fn map_bytes(results: &[ScatterResult]) -> Result<Vec<u8>> {
    let map = NonreciprocityMap::from_results(results)?;
    let mut buf = Vec::new();
    write_nonreciprocity_csv(&map, &mut buf)?;
    Ok(buf)
}

fn read_results(path: &Path) -> Result<Vec<ScatterResult>> {
    let file = std::fs::File::open(path)?;
    read_scatter_csv(file).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let mut outcome = ScenarioOutcome::default();
    match cfg.scenario {
        ScenarioKind::Synth => {
            let proto = cfg.synth.prototype()?;
            let design = cfg.synth.design()?;
            let graph = build_circulator_graph(&design)?;
            let text = crate::io::to_json_string(&SynthesisFile::new(&proto, &design, &graph))?;
            emit(cfg, &mut outcome, text.into_bytes())?;
        }
        ScenarioKind::CmeSweep => {
            let bytes = scatter_bytes(&cme_results(cfg)?, cfg.normalization)?;
            emit(cfg, &mut outcome, bytes)?;
        }
        ScenarioKind::CmeMap => {
            let bytes = map_bytes(&cme_results(cfg)?)?;
            emit(cfg, &mut outcome, bytes)?;
        }
        ScenarioKind::CircuitSweep => {
            let mut notes = Vec::new();
            let bytes = scatter_bytes(&circuit_results(cfg, &mut notes)?, cfg.normalization)?;
            outcome.notes = notes;
            emit(cfg, &mut outcome, bytes)?;
        }
        ScenarioKind::CircuitMap => {
            let mut notes = Vec::new();
            let bytes = map_bytes(&circuit_results(cfg, &mut notes)?)?;
            outcome.notes = notes;
            emit(cfg, &mut outcome, bytes)?;
        }
        ScenarioKind::Compare => {
            let c = cfg.compare.as_ref().expect("validated");
            let a_all = read_results(&c.a)?;
            let b_all = read_results(&c.b)?;
            let a = select_phase(&a_all, c.a_dtheta_deg, "a")?;
            let b = select_phase(&b_all, c.b_dtheta_deg, "b")?;
            let report = compare_results(
                a,
                b,
                (hz_to_rad(c.band_hz[0]), hz_to_rad(c.band_hz[1])),
                c.threshold_db,
                c.entries.as_deref(),
            )?;
            let text = crate::io::to_json_string(&report)?;
            emit(cfg, &mut outcome, text.into_bytes())?;
            outcome.report = Some(report);
        }
    }
    Ok(outcome)
}
