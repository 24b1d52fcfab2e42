//! Natural modes of the unpumped netlist.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::netlist::{Netlist, Topology};
use crate::error::{Error, Result};

/// Relative threshold below which an eigenfrequency is treated as a DC or
/// purely damped solution.
const ZERO_FREQ_RTOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalMode {
    /// Oscillation frequency, rad/s.
    pub omega: f64,
    /// Energy decay rate into the ports, rad/s (`-2 Re s`).
    pub decay_rate: f64,
}

struct Matrices {
    cap: DMatrix<f64>,
    cond: DMatrix<f64>,
    stiff: DMatrix<f64>,
}

fn matrices(topo: &Topology) -> Result<Matrices> {
    let n = topo.nodes.len();
    let mut cap = DMatrix::<f64>::zeros(n, n);
    for &(a, b, c) in &topo.caps {
        for (r, sr) in [(a, 1.0), (b, -1.0)] {
            for (q, sq) in [(a, 1.0), (b, -1.0)] {
                if let (Some(r), Some(q)) = (r, q) {
                    cap[(r, q)] += sr * sq * c;
                }
            }
        }
    }
    let mut cond = DMatrix::<f64>::zeros(n, n);
    for p in &topo.ports {
        cond[(p.node, p.node)] += 1.0 / p.z0;
    }
    let stiff = topo.node_reluctance.clone();
    Ok(Matrices { cap, cond, stiff })
}

fn cap_cholesky(m: &Matrices, topo: &Topology) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    m.cap.clone().cholesky().ok_or_else(|| {
        let floating = (0..topo.nodes.len())
            .find(|&k| m.cap[(k, k)] <= 0.0)
            .map(|k| format!(" (node '{}' has no capacitance)", topo.nodes[k]))
            .unwrap_or_default();
        Error::InvalidNetlist(format!("capacitance matrix is singular{floating}"))
    })
}

/// Damped natural modes with port loading, from `s^2 C + s G + K = 0`.
/// Pumps are ignored. Sorted by frequency.
pub fn modal_analysis(netlist: &Netlist) -> Result<Vec<NaturalMode>> {
    let topo = netlist.topology()?;
    let m = matrices(&topo)?;
    let n = topo.nodes.len();
    let chol = cap_cholesky(&m, &topo)?;
    let ck = chol.solve(&m.stiff);
    let cg = chol.solve(&m.cond);
    // Work in units of a typical frequency so the Schur iteration sees O(1) entries.
    let scale_w = (ck.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max))
        .sqrt()
        .max(1.0);
    let ck = ck / (scale_w * scale_w);
    let cg = cg / scale_w;
    let mut state = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        state[(k, n + k)] = 1.0;
    }
    state.view_mut((n, 0), (n, n)).copy_from(&(-ck));
    state.view_mut((n, n), (n, n)).copy_from(&(-cg));
    let eig = state.complex_eigenvalues();
    let scale = eig.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let mut modes: Vec<NaturalMode> = eig
        .iter()
        .filter(|s| s.im > ZERO_FREQ_RTOL * scale)
        .map(|s| NaturalMode {
            omega: s.im * scale_w,
            decay_rate: -2.0 * s.re * scale_w,
        })
        .collect();
    modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(modes)
}

/// Lossless natural frequencies with the ports open, from the symmetric
/// generalized problem `K x = w^2 C x`. Sorted ascending.
pub fn lossless_frequencies(netlist: &Netlist) -> Result<Vec<f64>> {
    let topo = netlist.topology()?;
    let m = matrices(&topo)?;
    let chol = cap_cholesky(&m, &topo)?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::InvalidNetlist("capacitance matrix is singular".into()))?;
    let sym = &l_inv * &m.stiff * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut w: Vec<f64> = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > ZERO_FREQ_RTOL * ZERO_FREQ_RTOL * top)
        .map(|l| l.sqrt())
        .collect();
    w.sort_by(f64::total_cmp);
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn isolated_tank_has_one_mode() {
        let mut n = Netlist::empty(0.0);
        n.cap("C", "x", "0", 1e-12)
            .ind("L", "x", "0", 1e-9)
            .port("P", "x", 1e9, 0);
        let modes = modal_analysis(&n).unwrap();
        assert_eq!(modes.len(), 1);
        let w0 = 1.0 / (1e-21f64).sqrt();
        assert!((modes[0].omega - w0).abs() / w0 < 1e-6);
        let lossless = lossless_frequencies(&n).unwrap();
        assert_eq!(lossless.len(), 1);
        assert!((lossless[0] - w0).abs() / w0 < 1e-9);
    }

    #[test]
    fn shunt_rc_loading_matches_closed_form() {
        // s^2 LC + s L/R + 1 = 0: decay rate 1/(RC), w = sqrt(w0^2 - (1/2RC)^2).
        let (c, l, r) = (1e-12, 1e-9, 2000.0);
        let mut n = Netlist::empty(0.0);
        n.cap("C", "x", "0", c)
            .ind("L", "x", "0", l)
            .port("P", "x", r, 0);
        let m = modal_analysis(&n).unwrap();
        let rate = 1.0 / (r * c);
        let w = (1.0 / (l * c) - rate * rate / 4.0).sqrt();
        assert!((m[0].decay_rate - rate).abs() / rate < 1e-6);
        assert!((m[0].omega - w).abs() / w < 1e-9);
    }

    #[test]
    fn floating_node_is_reported() {
        let mut n = Netlist::empty(0.0);
        n.cap("C", "x", "0", 1e-12)
            .ind("L", "x", "y", 1e-9)
            .ind("L2", "y", "0", 1e-9)
            .port("P", "x", 50.0, 0);
        assert!(matches!(modal_analysis(&n), Err(Error::InvalidNetlist(_))));
    }
}
