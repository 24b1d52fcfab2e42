//! Harmonic-balance solver and modal analysis against closed forms and an
//! independently assembled nodal model.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use paracirc::circuit::{
    calibrate_pump, circuit_scattering, circuit_sweep, conversion_matrix, lossless_frequencies,
    modal_analysis, reference_netlist, Netlist, ProbeBand, PumpModel, GROUND,
};
use paracirc::linalg::{max_abs_diff, unitarity_defect, CMatrix, Lu};
use paracirc::scatter::linspace;
use paracirc::units::{hz_to_rad, rad_to_hz};
use paracirc::{Normalization, ReducedDesign};

/// Calibrated pump amplitude and right-handed phase of the reference netlist.
const DELTA_M: f64 = 221.87e-12;
const RH_DEG: f64 = -74.73;

fn operating_point() -> Netlist {
    reference_netlist(DELTA_M, RH_DEG.to_radians())
}

fn block(m: &CMatrix, size: usize, i: usize, j: usize) -> f64 {
    m.view((i * size, j * size), (size, size))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn unpumped_conversion_matrix_is_block_diagonal() {
    for k in 1..=3 {
        let sys = conversion_matrix(&reference_netlist(0.0, 0.0), hz_to_rad(5e9), k).unwrap();
        let blocks = 2 * k + 1;
        for i in 0..blocks {
            assert!(block(&sys.matrix, sys.block, i, i) > 0.0);
            for j in (0..blocks).filter(|j| *j != i) {
                assert_eq!(
                    block(&sys.matrix, sys.block, i, j),
                    0.0,
                    "K={k} block ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn pumped_conversion_matrix_couples_neighbouring_harmonics_only() {
    for model in [PumpModel::Reluctance, PumpModel::Inductance] {
        let mut n = operating_point();
        n.pump_model = model;
        let sys = conversion_matrix(&n, hz_to_rad(5e9), 3).unwrap();
        for i in 0..7usize {
            for j in 0..7usize {
                let b = block(&sys.matrix, sys.block, i, j);
                match i.abs_diff(j) {
                    0 | 1 => assert!(b > 0.0, "{model:?} block ({i},{j}) empty"),
                    _ => assert_eq!(b, 0.0, "{model:?} block ({i},{j})"),
                }
            }
        }
        assert_eq!(sys.harmonic_of(0), -3);
        assert_eq!(sys.harmonic_of(sys.matrix.nrows() - 1), 3);
    }
}

#[test]
fn conversion_solve_residual_is_small() {
    for model in [PumpModel::Reluctance, PumpModel::Inductance] {
        let mut n = operating_point();
        n.pump_model = model;
        for f in [4.8e9, 5.0e9, 5.2e9] {
            let sys = conversion_matrix(&n, hz_to_rad(f), 3).unwrap();
            let dim = sys.matrix.nrows();
            let rhs = CMatrix::from_fn(dim, 2, |i, j| {
                Complex64::new((i as f64 + 1.0).sin(), (j as f64 + i as f64).cos())
            });
            let x = Lu::new(sys.matrix.clone()).unwrap().solve(&rhs).unwrap();
            let residual = (&sys.matrix * &x - &rhs).norm() / (sys.matrix.norm() * x.norm());
            assert!(residual <= 1e-10, "{model:?} at {f}: {residual:e}");
        }
    }
}

#[test]
fn unpumped_circuit_is_reciprocal_and_bands_decouple() {
    let n = reference_netlist(0.0, 0.7);
    for f in linspace(4.5e9, 5.5e9, 21) {
        let s = circuit_scattering(&n, hz_to_rad(f), 2, ProbeBand::Low).unwrap();
        assert!(max_abs_diff(&s, &s.transpose()) <= 1e-10);
        for i in 0..2 {
            assert!(s[(i, 2)].norm() <= 1e-12 && s[(2, i)].norm() <= 1e-12);
        }
        assert!(unitarity_defect(&s) <= 1e-10);
    }
}

#[test]
fn nodal_and_branch_current_formulations_agree_without_pump() {
    let nodal = reference_netlist(0.0, 0.0);
    let mut mna = nodal.clone();
    mna.pump_model = PumpModel::Inductance;
    for f in linspace(4.5e9, 5.5e9, 11) {
        let a = circuit_scattering(&nodal, hz_to_rad(f), 2, ProbeBand::Low).unwrap();
        let b = circuit_scattering(&mna, hz_to_rad(f), 2, ProbeBand::Low).unwrap();
        assert!(
            max_abs_diff(&a, &b) <= 1e-9,
            "{f}: {}",
            max_abs_diff(&a, &b)
        );
    }
}

#[test]
fn truncation_error_shrinks_with_order() {
    let n = operating_point();
    let omegas = linspace(hz_to_rad(4.875e9), hz_to_rad(5.125e9), 11);
    let sweeps: Vec<_> = (1..=4)
        .map(|k| circuit_sweep(&n, &omegas, k, ProbeBand::Low, Normalization::PhotonFlux).unwrap())
        .collect();
    let diffs: Vec<f64> = sweeps
        .windows(2)
        .map(|w| {
            w[0].s
                .iter()
                .zip(&w[1].s)
                .map(|(a, b)| max_abs_diff(a, b))
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{diffs:?}");
    assert!(diffs[1] <= 0.01);
}

#[test]
fn truncated_pumped_circuit_is_nearly_unitary() {
    let n = operating_point();
    for f in linspace(4.875e9, 5.125e9, 11) {
        let s = circuit_scattering(&n, hz_to_rad(f), 3, ProbeBand::Low).unwrap();
        assert!(
            unitarity_defect(&s) <= 0.02,
            "{f}: {}",
            unitarity_defect(&s)
        );
    }
}

#[test]
fn high_band_probe_sees_the_same_process() {
    // Probing C at w + wp is the same conversion as probing A/B at w, up to
    // channel phases and the shifted truncation window.
    let n = operating_point();
    let w = hz_to_rad(5.03e9);
    for (k, tol) in [(3, 1e-3), (4, 1e-4)] {
        let low = circuit_scattering(&n, w, k, ProbeBand::Low).unwrap();
        let high = circuit_scattering(&n, w + n.omega_p, k, ProbeBand::High).unwrap();
        let diff = low
            .iter()
            .zip(high.iter())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
        assert!(diff <= tol, "K={k}: {diff:e}");
    }
}

#[test]
fn pump_calibration_reproduces_operating_point() {
    let cal = calibrate_pump(
        &reference_netlist(0.0, 0.0),
        &ReducedDesign::reference(),
        0.5,
        2,
    )
    .unwrap();
    assert!(
        (cal.delta_m - DELTA_M).abs() <= 1e-3 * DELTA_M,
        "{:e}",
        cal.delta_m
    );
    assert!((cal.achieved - cal.target).abs() <= 1e-5);
    let zero = calibrate_pump(
        &reference_netlist(0.0, 0.0),
        &ReducedDesign::reference(),
        0.0,
        2,
    )
    .unwrap();
    assert_eq!(zero.delta_m, 0.0);
}

fn two_port_resonator() -> Netlist {
    let mut n = Netlist::empty(TAU * 2e9);
    n.port("P1", "in", 50.0, 0)
        .cap("CIN", "in", "t", 0.05e-12)
        .cap("CT", "t", GROUND, 1e-12)
        .ind("LT", "t", GROUND, 1e-9)
        .cap("COUT", "t", "out", 0.05e-12)
        .port("P2", "out", 50.0, 0);
    n
}

#[test]
fn transmission_peaks_at_the_natural_mode() {
    let n = two_port_resonator();
    let modes = modal_analysis(&n).unwrap();
    assert_eq!(modes.len(), 1);
    let f_mode = rad_to_hz(modes[0].omega);
    let grid = linspace(0.97 * f_mode, 1.03 * f_mode, 601);
    let (f_peak, peak) = grid
        .iter()
        .map(|f| {
            (
                *f,
                circuit_scattering(&n, hz_to_rad(*f), 1, ProbeBand::Low).unwrap()[(1, 0)].norm(),
            )
        })
        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    assert!(
        (f_peak - f_mode).abs() <= 2.0 * (grid[1] - grid[0]),
        "{f_peak} vs {f_mode}"
    );
    assert!((peak - 1.0).abs() <= 1e-3);
    // half-power width equals the modal decay rate
    let half = |f: f64| {
        circuit_scattering(&n, hz_to_rad(f), 1, ProbeBand::Low).unwrap()[(1, 0)].norm_sqr() - 0.5
    };
    let edge = |lo: f64, hi: f64| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if (half(a) > 0.0) == (half(m) > 0.0) {
                a = m
            } else {
                b = m
            }
        }
        0.5 * (a + b)
    };
    let width = edge(f_peak, 1.2 * f_peak) - edge(0.8 * f_peak, f_peak);
    let expect = rad_to_hz(modes[0].decay_rate);
    assert!(
        (width - expect).abs() <= 0.01 * expect,
        "{width} vs {expect}"
    );
}

#[test]
fn isolated_tank_has_the_textbook_frequency() {
    let mut n = Netlist::empty(TAU * 1e9);
    n.cap("C", "t", GROUND, 1e-12).ind("L", "t", GROUND, 1e-9);
    let f = lossless_frequencies(&n).unwrap();
    assert_eq!(f.len(), 1);
    assert!((rad_to_hz(f[0]) / 1e9 - 5.0329).abs() < 1e-4);
    let m = modal_analysis(&n).unwrap();
    assert!((m[0].omega - f[0]).abs() <= 1e-9 * f[0]);
    assert!(m[0].decay_rate.abs() <= 1e-6 * f[0]);
}

#[test]
fn coupled_tanks_split_by_the_coupling_coefficient() {
    let coupling = 0.2;
    let mut n = Netlist::empty(TAU * 1e9);
    n.cap("C1", "x", GROUND, 1e-12)
        .ind("L1", "x", GROUND, 1e-9)
        .cap("C2", "y", GROUND, 1e-12)
        .ind("L2", "y", GROUND, 1e-9)
        .mutual("L1", "L2", coupling * 1e-9);
    let f0 = 1.0 / (TAU * (1e-9f64 * 1e-12).sqrt());
    let got: Vec<f64> = lossless_frequencies(&n)
        .unwrap()
        .into_iter()
        .map(rad_to_hz)
        .collect();
    let want = [f0 / (1.0 + coupling).sqrt(), f0 / (1.0 - coupling).sqrt()];
    assert_eq!(got.len(), 2);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-9 * w, "{g} vs {w}");
    }
}

/// Nodal admittance `s C + G + Gamma / s` assembled from the element lists
/// with its own node numbering.
fn admittance(n: &Netlist, s: Complex64) -> CMatrix {
    let mut nodes = BTreeMap::new();
    let mut id = |name: &str| -> Option<usize> {
        if name == GROUND {
            return None;
        }
        let next = nodes.len();
        Some(*nodes.entry(name.to_string()).or_insert(next))
    };
    let caps: Vec<_> = n
        .capacitors
        .iter()
        .map(|c| (id(&c.a), id(&c.b), c.value))
        .collect();
    let inds: Vec<_> = n.inductors.iter().map(|l| (id(&l.a), id(&l.b))).collect();
    let ports: Vec<_> = n.ports.iter().map(|p| (id(&p.node), p.z0)).collect();
    let size = nodes.len();

    let branch = |name: &str| n.inductors.iter().position(|l| l.name == name).unwrap();
    let mut l = DMatrix::<f64>::zeros(inds.len(), inds.len());
    for (i, ind) in n.inductors.iter().enumerate() {
        l[(i, i)] = ind.value;
    }
    for m in &n.mutuals {
        let (i, j) = (branch(&m.l1), branch(&m.l2));
        l[(i, j)] += m.value;
        l[(j, i)] += m.value;
    }
    let gamma = l.try_inverse().unwrap();

    let mut y = CMatrix::zeros(size, size);
    let mut stamp = |a: Option<usize>, b: Option<usize>, v: Complex64| {
        if let Some(i) = a {
            y[(i, i)] += v;
        }
        if let Some(j) = b {
            y[(j, j)] += v;
        }
        if let (Some(i), Some(j)) = (a, b) {
            y[(i, j)] -= v;
            y[(j, i)] -= v;
        }
    };
    for (a, b, c) in caps {
        stamp(a, b, s * c);
    }
    for (node, z0) in ports {
        stamp(node, None, Complex64::new(1.0 / z0, 0.0));
    }
    let incidence = |k: usize, node: usize| -> f64 {
        let (a, b) = inds[k];
        (a == Some(node)) as i32 as f64 - (b == Some(node)) as i32 as f64
    };
    for p in 0..size {
        for q in 0..size {
            let mut acc = 0.0;
            for i in 0..inds.len() {
                for j in 0..inds.len() {
                    acc += incidence(i, p) * gamma[(i, j)] * incidence(j, q);
                }
            }
            y[(p, q)] += Complex64::new(acc, 0.0) / s;
        }
    }
    y
}

#[test]
fn reference_modes_are_zeros_of_an_independent_admittance() {
    let n = reference_netlist(0.0, 0.0);
    let modes = modal_analysis(&n).unwrap();
    assert_eq!(modes.len(), 6);
    for m in &modes {
        let s = Complex64::new(-0.5 * m.decay_rate, m.omega);
        let sv = admittance(&n, s).singular_values();
        let ratio = sv.min() / sv.max();
        assert!(
            ratio <= 1e-9,
            "mode at {} GHz: {ratio:e}",
            rad_to_hz(m.omega) / 1e9
        );
        // a nearby point is far from singular, so the test is discriminating
        let off = admittance(&n, s + Complex64::new(0.0, 0.01 * m.omega)).singular_values();
        assert!(off.min() / off.max() > 1e3 * ratio);
    }
}
