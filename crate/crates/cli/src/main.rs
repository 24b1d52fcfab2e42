use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paracirc::circuit::{modal_analysis, reference_netlist, Handedness, ProbeBand, PumpModel};
use paracirc::io::{read_netlist, write_design, write_netlist};
use paracirc::scenario::{
    run_scenario, CompareParams, FreqGrid, PhaseGrid, ScenarioConfig, ScenarioKind, SynthParams,
    DEFAULT_HARMONICS,
};
use paracirc::synthesis::build_circulator_graph;
use paracirc::units::rad_to_hz;
use paracirc::{Error, Normalization};

const EXIT_COMPARE_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "paracirc",
    version,
    about = "Chebyshev-matched parametric circulator design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the coupled-mode design from a Chebyshev prototype.
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled-mode S-matrix sweep to CSV.
    CmeSweep(SweepArgs),
    /// Coupled-mode nonreciprocity map to CSV.
    CmeMap(SweepArgs),
    /// Circuit conversion-matrix S-matrix sweep to CSV.
    CircuitSweep(CircuitArgs),
    /// Circuit nonreciprocity map to CSV.
    CircuitMap(CircuitArgs),
    /// Compare two scattering CSVs in dB over a band.
    Compare(CompareArgs),
    /// Run a scenario described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the default coupled-mode design as JSON.
    DefaultDesign {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in circuit netlist as JSON.
    DefaultNetlist {
        #[arg(long)]
        out: PathBuf,
    },
    /// Natural modes of a netlist (built-in if none given), pumps off.
    Modes {
        #[arg(long)]
        netlist: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value_t = 0.01)]
    ripple_db: f64,
    #[arg(long, default_value_t = 250e6)]
    bw_hz: f64,
    #[arg(long, default_value_t = 5e9)]
    center_low_hz: f64,
    #[arg(long, default_value_t = 7e9)]
    center_high_hz: f64,
    #[arg(long, default_value_t = 0.5)]
    beta_ab: f64,
    #[arg(long, default_value_t = 0.5)]
    beta_p: f64,
    #[arg(long, default_value_t = -90.0, allow_hyphen_values = true)]
    design_dtheta_deg: f64,
}

impl SynthArgs {
    fn params(&self) -> SynthParams {
        SynthParams {
            order: self.order,
            ripple_db: self.ripple_db,
            bw_hz: self.bw_hz,
            center_low_hz: self.center_low_hz,
            center_high_hz: self.center_high_hz,
            beta_ab: self.beta_ab,
            beta_p: self.beta_p,
            dtheta_deg: self.design_dtheta_deg,
        }
    }
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long)]
    f_start_hz: f64,
    #[arg(long)]
    f_stop_hz: f64,
    #[arg(long, default_value_t = 1)]
    points: usize,
    /// Single relative pump phase.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "dtheta_start_deg")]
    dtheta_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "dtheta_stop_deg")]
    dtheta_start_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dtheta_stop_deg: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dtheta_points: usize,
    #[arg(long, default_value = "photon_flux")]
    normalization: Normalization,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GridArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        cfg.freq = Some(FreqGrid {
            start_hz: self.f_start_hz,
            stop_hz: self.f_stop_hz,
            points: self.points,
        });
        cfg.dtheta = match (self.dtheta_deg, self.dtheta_start_deg) {
            (Some(d), _) => Some(PhaseGrid::single(d)),
            (None, Some(start)) => Some(PhaseGrid {
                start_deg: start,
                stop_deg: self.dtheta_stop_deg,
                points: self.dtheta_points,
            }),
            (None, None) => None,
        };
        cfg.normalization = self.normalization;
        cfg.output = self.out.clone();
    }
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Design JSON; the synthesized default design if absent.
    #[arg(long)]
    design: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Netlist JSON; the built-in netlist (pump calibrated) if absent.
    #[arg(long)]
    netlist: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HARMONICS)]
    harmonics: usize,
    #[arg(long, default_value = "low")]
    probe_band: ProbeBand,
    /// Pump amplitude in H.
    #[arg(long, conflicts_with = "calibrate_beta_p")]
    delta_m: Option<f64>,
    #[arg(long)]
    calibrate_beta_p: Option<f64>,
    #[arg(long, value_parser = parse_pump_model)]
    pump_model: Option<PumpModel>,
    /// Use the optimal phase for this circulation sense instead of a phase grid.
    #[arg(long, value_parser = parse_handedness, conflicts_with_all = ["dtheta_deg", "dtheta_start_deg"])]
    optimal: Option<Handedness>,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args, Clone)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// `lo:hi` in Hz.
    #[arg(long, value_parser = parse_band)]
    band: [f64; 2],
    #[arg(long, default_value_t = 1.0)]
    threshold_db: f64,
    /// Comma-separated entries such as `BA,AB`; all entries if absent.
    #[arg(long, value_delimiter = ',')]
    entries: Option<Vec<String>>,
    #[arg(long, allow_hyphen_values = true)]
    a_dtheta_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b_dtheta_deg: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_band(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower edge '{lo}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper edge '{hi}'"))?;
    Ok([lo, hi])
}

fn parse_handedness(s: &str) -> Result<Handedness, String> {
    match s {
        "right" | "rh" => Ok(Handedness::Right),
        "left" | "lh" => Ok(Handedness::Left),
        _ => Err(format!("expected right or left, got '{s}'")),
    }
}

fn parse_pump_model(s: &str) -> Result<PumpModel, String> {
    match s {
        "reluctance" => Ok(PumpModel::Reluctance),
        "inductance" => Ok(PumpModel::Inductance),
        _ => Err(format!("expected reluctance or inductance, got '{s}'")),
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_CONFIG
    }
}

fn circuit_config(kind: ScenarioKind, args: &CircuitArgs) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(kind);
    args.grid.apply(&mut cfg);
    cfg.netlist = args.netlist.clone();
    cfg.harmonics = args.harmonics;
    cfg.synth = args.synth.params();
    cfg.circuit.probe_band = args.probe_band;
    cfg.circuit.delta_m = args.delta_m;
    cfg.circuit.calibrate_beta_p = args.calibrate_beta_p;
    cfg.circuit.pump_model = args.pump_model;
    cfg.circuit.optimal = args.optimal;
    cfg
}

fn sweep_config(kind: ScenarioKind, args: &SweepArgs) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(kind);
    args.grid.apply(&mut cfg);
    cfg.design = args.design.clone();
    cfg.synth = args.synth.params();
    cfg
}

fn run(cli: Cli) -> Result<u8, Error> {
    let cfg = match cli.command {
        Command::Synth { synth, out } => {
            let mut cfg = ScenarioConfig::new(ScenarioKind::Synth);
            cfg.synth = synth.params();
            cfg.output = out;
            cfg
        }
        Command::CmeSweep(a) => sweep_config(ScenarioKind::CmeSweep, &a),
        Command::CmeMap(a) => sweep_config(ScenarioKind::CmeMap, &a),
        Command::CircuitSweep(a) => circuit_config(ScenarioKind::CircuitSweep, &a),
        Command::CircuitMap(a) => circuit_config(ScenarioKind::CircuitMap, &a),
        Command::Compare(a) => {
            let mut cfg = ScenarioConfig::new(ScenarioKind::Compare);
            cfg.compare = Some(CompareParams {
                a: a.a,
                b: a.b,
                band_hz: a.band,
                threshold_db: a.threshold_db,
                entries: a.entries,
                a_dtheta_deg: a.a_dtheta_deg,
                b_dtheta_deg: a.b_dtheta_deg,
            });
            cfg.output = a.out;
            cfg
        }
        Command::Run { config } => ScenarioConfig::from_file(&config)?,
        Command::DefaultDesign { synth, out } => {
            let design = synth.params().design()?;
            write_design(&out, &build_circulator_graph(&design)?, design.gamma0)?;
            return Ok(0);
        }
        Command::DefaultNetlist { out } => {
            write_netlist(&out, &reference_netlist(0.0, 0.0))?;
            return Ok(0);
        }
        Command::Modes { netlist } => {
            let n = match netlist {
                Some(p) => read_netlist(&p)?,
                None => reference_netlist(0.0, 0.0),
            };
            let modes: Vec<serde_json::Value> = modal_analysis(&n)?
                .iter()
                .map(|m| serde_json::json!({"f_hz": rad_to_hz(m.omega), "decay_rate_hz": rad_to_hz(m.decay_rate)}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&modes)?);
            return Ok(0);
        }
    };
    let outcome = run_scenario(&cfg)?;
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    if let Some(text) = &outcome.stdout {
        print!("{text}");
    }
    for path in &outcome.written {
        eprintln!("wrote {}", path.display());
    }
    if let Some(report) = &outcome.report {
        for e in &report.entries {
            eprintln!(
                "S{}: max |dB diff| {:.4}, mean {:.4} over {} points",
                e.entry, e.max_abs_db, e.mean_abs_db, e.points
            );
        }
        eprintln!("{}", if report.passed { "PASS" } else { "FAIL" });
    }
    Ok(if outcome.passed() {
        0
    } else {
        EXIT_COMPARE_FAILED
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
