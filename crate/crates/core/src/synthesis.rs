//! Chebyshev prototypes and the reduced coupled-mode design derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modegraph::{CouplingEdge, EdgeKind, Mode, ModeGraph};

/// `40 / ln 10`, the dB-to-neper style constant of the ripple formula.
const DB_PER_NEPER_SQ: f64 = 17.371_779_276_130_07;

/// Low-pass Chebyshev ladder coefficients `g0..g_{n+1}` for `order` reactive
/// elements and `ripple_db` passband ripple.
pub fn chebyshev_prototype(order: usize, ripple_db: f64) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "prototype order must be at least 1".into(),
        ));
    }
    if !(ripple_db > 0.0) || !ripple_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ripple must be a positive number of dB, got {ripple_db}"
        )));
    }
    let n = order as f64;
    let beta = (1.0 / (ripple_db / DB_PER_NEPER_SQ).tanh()).ln();
    let gamma = (beta / (2.0 * n)).sinh();
    let a = |k: usize| ((2 * k - 1) as f64 * std::f64::consts::PI / (2.0 * n)).sin();
    let b = |k: usize| gamma * gamma + (k as f64 * std::f64::consts::PI / n).sin().powi(2);

    let mut g = Vec::with_capacity(order + 2);
    g.push(1.0);
    g.push(2.0 * a(1) / gamma);
    for k in 2..=order {
        let prev = g[k - 1];
        g.push(4.0 * a(k - 1) * a(k) / (b(k - 1) * prev));
    }
    let load = if order % 2 == 1 {
        1.0
    } else {
        let c = 1.0 / (beta / 4.0).tanh();
        c * c
    };
    g.push(load);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub order: usize,
    pub ripple_db: f64,
    /// `g0..g_{n+1}`.
    pub g: Vec<f64>,
    /// Low-band (A/B) center, rad/s.
    pub center_low: f64,
    /// High-band (C) center, rad/s.
    pub center_high: f64,
    /// Design bandwidth, rad/s.
    pub bandwidth: f64,
}

impl Prototype {
    pub fn new(
        order: usize,
        ripple_db: f64,
        center_low: f64,
        center_high: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        let g = chebyshev_prototype(order, ripple_db)?;
        let proto = Self {
            order,
            ripple_db,
            g,
            center_low,
            center_high,
            bandwidth,
        };
        proto.validate()?;
        Ok(proto)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        if n == 0 || self.g.len() != n + 2 {
            return Err(Error::InvalidArgument(format!(
                "prototype of order {n} needs {} coefficients, got {}",
                n + 2,
                self.g.len()
            )));
        }
        if self.g[0] != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "g0 must be exactly 1, got {}",
                self.g[0]
            )));
        }
        if let Some((k, v)) = self
            .g
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "g{k} = {v} is not positive"
            )));
        }
        if n % 2 == 1 {
            for k in 0..=n + 1 {
                if (self.g[k] - self.g[n + 1 - k]).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "odd-order prototype is not palindromic at g{k}"
                    )));
                }
            }
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidArgument("bandwidth must be positive".into()));
        }
        if self.bandwidth >= self.center_low.min(self.center_high) {
            return Err(Error::InvalidArgument(
                "bandwidth must be smaller than both band centers".into(),
            ));
        }
        Ok(())
    }
}

/// Coupled-mode design parameters. Rates in rad/s, couplings reduced by `gamma0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDesign {
    pub gamma0: f64,
    /// Matching-ladder couplings `beta_{k,k+1}`, `k = 1..n-1`, core end first.
    pub ladder: Vec<f64>,
    pub beta_ab: f64,
    pub beta_p: f64,
    pub dtheta: f64,
    pub omega_a: f64,
    pub omega_c: f64,
    pub omega_p: f64,
}

impl ReducedDesign {
    /// `beta12` of a second-order design (the coupling next to the core).
    pub fn beta12(&self) -> Option<f64> {
        self.ladder.first().copied()
    }

    /// Number of modes per port (core plus matching sections).
    pub fn modes_per_port(&self) -> usize {
        self.ladder.len() + 1
    }

    pub fn with_core(mut self, beta_ab: f64, beta_p: f64, dtheta: f64) -> Self {
        self.beta_ab = beta_ab;
        self.beta_p = beta_p;
        self.dtheta = dtheta;
        self
    }

    /// The reference design: 5 and 7 GHz bands, 250 MHz 0.01 dB two-pole match,
    /// `beta_AB = |beta_p| = 0.5`, right-handed pump phase.
    pub fn reference() -> Self {
        use crate::units::hz_to_rad;
        let proto = Prototype::new(2, 0.01, hz_to_rad(5e9), hz_to_rad(7e9), hz_to_rad(250e6))
            .expect("reference prototype is valid");
        reduced_parameters(&proto)
            .expect("reference prototype has positive coefficients")
            .with_core(0.5, 0.5, -std::f64::consts::FRAC_PI_2)
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma0,
            self.beta_ab,
            self.beta_p,
            self.dtheta,
            self.omega_a,
            self.omega_c,
            self.omega_p,
        ];
        if finite.iter().any(|v| !v.is_finite()) || self.ladder.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "design contains non-finite values".into(),
            ));
        }
        if !(self.gamma0 > 0.0) {
            return Err(Error::InvalidArgument("gamma0 must be positive".into()));
        }
        if self.beta_ab < 0.0 || self.beta_p < 0.0 || self.ladder.iter().any(|b| *b < 0.0) {
            return Err(Error::InvalidArgument(
                "reduced couplings must be non-negative".into(),
            ));
        }
        if (self.omega_p - (self.omega_c - self.omega_a)).abs() > 1e-9 * self.omega_c.abs() {
            return Err(Error::InvalidArgument(
                "pump frequency must equal omega_c - omega_a".into(),
            ));
        }
        Ok(())
    }
}

/// `gamma0 = dw / (g_n g_{n+1})` and `beta_{k,k+1} = dw / (2 gamma0 sqrt(g_k g_{k+1}))`.
/// Core couplings are left at zero; set them with [`ReducedDesign::with_core`].
pub fn reduced_parameters(proto: &Prototype) -> Result<ReducedDesign> {
    let n = proto.order;
    if proto.g.len() != n + 2 {
        return Err(Error::InvalidArgument(
            "coefficient count does not match order".into(),
        ));
    }
    if let Some((k, v)) = proto.g.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "g{k} = {v} is not positive"
        )));
    }
    if !(proto.bandwidth > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let dw = proto.bandwidth;
    let g = &proto.g;
    let gamma0 = dw / (g[n] * g[n + 1]);
    let ladder = (1..n)
        .map(|k| dw / (2.0 * gamma0 * (g[k] * g[k + 1]).sqrt()))
        .collect();
    Ok(ReducedDesign {
        gamma0,
        ladder,
        beta_ab: 0.0,
        beta_p: 0.0,
        dtheta: 0.0,
        omega_a: proto.center_low,
        omega_c: proto.center_high,
        omega_p: proto.center_high - proto.center_low,
    })
}

/// Three ladders (A, B at `omega_a`; C at `omega_c` seen through one pump
/// quantum) joined at their core modes: A1-B1 passive, A1-C1 and B1-C1
/// parametric with the relative pump phase on B1-C1.
pub fn build_circulator_graph(design: &ReducedDesign) -> Result<ModeGraph> {
    design.validate()?;
    let per_port = design.modes_per_port();
    let g0 = design.gamma0;
    let mut modes = Vec::with_capacity(3 * per_port);
    let mut edges = Vec::new();

    let bands = [
        ("A", design.omega_a, 0),
        ("B", design.omega_a, 0),
        ("C", design.omega_c, 1),
    ];
    let mut core_index = [0usize; 3];
    for (b, (name, omega0, harmonic)) in bands.iter().enumerate() {
        let first = modes.len();
        core_index[b] = first;
        for k in 1..=per_port {
            let is_port = k == per_port;
            modes.push(Mode {
                label: format!("{name}{k}"),
                omega0: *omega0,
                gamma_ext: if is_port { g0 } else { 0.0 },
                gamma_int: 0.0,
                harmonic: *harmonic,
                port: is_port.then(|| name.to_string()),
            });
        }
        for (k, beta) in design.ladder.iter().enumerate() {
            edges.push(CouplingEdge::passive(first + k, first + k + 1, beta * g0));
        }
    }
    let [a1, b1, c1] = core_index;
    edges.push(CouplingEdge::passive(a1, b1, design.beta_ab * g0));
    edges.push(CouplingEdge {
        a: a1,
        b: c1,
        kind: EdgeKind::Parametric,
        magnitude: design.beta_p * g0,
        phase: 0.0,
    });
    edges.push(CouplingEdge {
        a: b1,
        b: c1,
        kind: EdgeKind::Parametric,
        magnitude: design.beta_p * g0,
        phase: design.dtheta,
    });
    let phase_edge = edges.len() - 1;
    ModeGraph::new(modes, edges, design.omega_p, Some(phase_edge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz_to_rad;
    use approx::assert_abs_diff_eq;

    /// Transducer gain of the prototype ladder terminated in g0 and g_{n+1},
    /// computed by cascading ABCD matrices.
    fn ladder_gain(g: &[f64], w: f64) -> f64 {
        use num_complex::Complex64 as C;
        let n = g.len() - 2;
        let mut abcd = [
            [C::new(1.0, 0.0), C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
        ];
        for (k, gk) in g[1..=n].iter().enumerate() {
            let el = if k % 2 == 0 {
                // shunt capacitor
                [
                    [C::new(1.0, 0.0), C::new(0.0, 0.0)],
                    [C::new(0.0, w * gk), C::new(1.0, 0.0)],
                ]
            } else {
                // series inductor
                [
                    [C::new(1.0, 0.0), C::new(0.0, w * gk)],
                    [C::new(0.0, 0.0), C::new(1.0, 0.0)],
                ]
            };
            abcd = [
                [
                    abcd[0][0] * el[0][0] + abcd[0][1] * el[1][0],
                    abcd[0][0] * el[0][1] + abcd[0][1] * el[1][1],
                ],
                [
                    abcd[1][0] * el[0][0] + abcd[1][1] * el[1][0],
                    abcd[1][0] * el[0][1] + abcd[1][1] * el[1][1],
                ],
            ];
        }
        let rs = g[0];
        // g_{n+1} is a resistance after a shunt capacitor, a conductance after a series inductor
        let rl = if n % 2 == 1 { g[n + 1] } else { 1.0 / g[n + 1] };
        let den = abcd[0][0] * rl + abcd[0][1] + abcd[1][0] * rs * rl + abcd[1][1] * rs;
        4.0 * rs * rl / den.norm_sqr()
    }

    fn chebyshev_t(n: usize, x: f64) -> f64 {
        let (mut t0, mut t1) = (1.0, x);
        if n == 0 {
            return t0;
        }
        for _ in 1..n {
            let t2 = 2.0 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        t1
    }

    #[test]
    fn second_order_matches_published_table() {
        let g = chebyshev_prototype(2, 0.01).unwrap();
        let expected = [1.0, 0.449, 0.408, 1.101];
        for (got, want) in g.iter().zip(expected) {
            assert!((got - want).abs() < 5e-4, "{got} vs {want}");
        }
        assert_abs_diff_eq!(g[1], 0.4489, epsilon = 1e-4);
        assert_abs_diff_eq!(g[2], 0.4078, epsilon = 1e-4);
        assert_abs_diff_eq!(g[3], 1.1008, epsilon = 1e-4);
    }

    #[test]
    fn matches_tabulated_higher_orders() {
        // 0.01 dB ripple rows of the standard low-pass prototype tables.
        let rows: [&[f64]; 3] = [
            &[1.0, 0.0960, 1.0],
            &[1.0, 0.6291, 0.9702, 0.6291, 1.0],
            &[1.0, 0.7128, 1.2003, 1.3212, 0.6476, 1.1007],
        ];
        for row in rows {
            let g = chebyshev_prototype(row.len() - 2, 0.01).unwrap();
            for (got, want) in g.iter().zip(row) {
                assert!(
                    (got - want).abs() < 1e-3,
                    "order {}: {got} vs {want}",
                    row.len() - 2
                );
            }
        }
    }

    #[test]
    fn ladder_response_is_equiripple() {
        // Analysis route: the synthesized ladder must reproduce 1/(1 + eps^2 T_n^2).
        for order in 1..=7 {
            for ripple in [0.01, 0.1, 0.5] {
                let g = chebyshev_prototype(order, ripple).unwrap();
                let eps2 = 10f64.powf(ripple / 10.0) - 1.0;
                for i in 0..=40 {
                    let w = 2.0 * i as f64 / 40.0;
                    let want = 1.0 / (1.0 + eps2 * chebyshev_t(order, w).powi(2));
                    let got = ladder_gain(&g, w);
                    assert!(
                        (got - want).abs() < 1e-9,
                        "n={order} r={ripple} w={w}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn odd_orders_are_palindromic() {
        for order in (1..=9).step_by(2) {
            let g = chebyshev_prototype(order, 0.01).unwrap();
            assert_eq!(g[0], 1.0);
            for k in 0..=order + 1 {
                assert!((g[k] - g[order + 1 - k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(chebyshev_prototype(0, 0.01).is_err());
        assert!(chebyshev_prototype(2, 0.0).is_err());
        assert!(chebyshev_prototype(2, -1.0).is_err());
    }

    #[test]
    fn reference_reduced_values() {
        let proto =
            Prototype::new(2, 0.01, hz_to_rad(5e9), hz_to_rad(7e9), hz_to_rad(250e6)).unwrap();
        let d = reduced_parameters(&proto).unwrap();
        assert!((d.gamma0 - hz_to_rad(557e6)).abs() < hz_to_rad(1e6));
        assert!((d.beta12().unwrap() - 0.525).abs() < 1e-3);
        assert_eq!(d.omega_p, d.omega_c - d.omega_a);
    }

    #[test]
    fn unit_tail_gives_gamma0_equal_bandwidth() {
        let proto = Prototype {
            order: 2,
            ripple_db: 0.01,
            g: vec![1.0, 0.5, 1.0, 1.0],
            center_low: 10.0,
            center_high: 14.0,
            bandwidth: 1.5,
        };
        let d = reduced_parameters(&proto).unwrap();
        assert_eq!(d.gamma0, 1.5);
    }

    #[test]
    fn third_order_couplings_satisfy_bandwidth_free_identity() {
        let proto = Prototype::new(3, 0.01, 10.0, 14.0, 0.7).unwrap();
        let d = reduced_parameters(&proto).unwrap();
        let g = &proto.g;
        assert_eq!(d.ladder.len(), 2);
        for (k, beta) in d.ladder.iter().enumerate() {
            let idx = k + 1;
            let identity = g[3] * g[4] / (2.0 * (g[idx] * g[idx + 1]).sqrt());
            assert!((beta - identity).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_in_bandwidth() {
        let base = Prototype::new(2, 0.01, 100.0, 140.0, 2.0).unwrap();
        let d0 = reduced_parameters(&base).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let mut p = base.clone();
            p.bandwidth *= s;
            let d = reduced_parameters(&p).unwrap();
            assert!((d.gamma0 - d0.gamma0 * s).abs() < 1e-12 * d.gamma0);
            for (x, y) in d.ladder.iter().zip(&d0.ladder) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_positive_coefficients() {
        let mut p = Prototype::new(2, 0.01, 10.0, 14.0, 1.0).unwrap();
        p.g[2] = 0.0;
        assert!(reduced_parameters(&p).is_err());
        p.g[2] = -0.3;
        assert!(p.validate().is_err());
    }

    #[test]
    fn prototype_spec_checks_bandwidth() {
        assert!(Prototype::new(2, 0.01, 10.0, 14.0, 10.0).is_err());
        assert!(Prototype::new(2, 0.01, 10.0, 14.0, 0.0).is_err());
    }

    #[test]
    fn reference_graph_structure() {
        let g = build_circulator_graph(&ReducedDesign::reference()).unwrap();
        assert_eq!(g.modes.len(), 6);
        assert_eq!(g.edges.len(), 6);
        assert_eq!(g.port_modes().len(), 3);
        let passive = g
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Passive)
            .count();
        assert_eq!(passive, 4);
        let pe = &g.edges[g.phase_edge.unwrap()];
        assert_eq!(g.modes[pe.a].label, "B1");
        assert_eq!(g.modes[pe.b].label, "C1");
    }

    #[test]
    fn graph_build_is_deterministic() {
        let d = ReducedDesign::reference();
        assert_eq!(
            build_circulator_graph(&d).unwrap(),
            build_circulator_graph(&d).unwrap()
        );
    }

    #[test]
    fn pump_off_disconnects_the_high_band() {
        let d = ReducedDesign::reference().with_core(0.5, 0.0, 0.0);
        let g = build_circulator_graph(&d).unwrap();
        for e in &g.edges {
            let (ha, hb) = (g.modes[e.a].harmonic, g.modes[e.b].harmonic);
            if ha != hb {
                assert_eq!(e.magnitude, 0.0);
            }
        }
    }
}
