//! Collective gate catalog, per-block exponentiation and circuit execution.
//!
//! Every gate is `K = exp(-i θ G)` for a collective generator `G`. Because
//! `G` is block diagonal, `K` is computed block by block and only for the
//! blocks a state actually populates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BlockLedger;
use crate::error::{domain, Error, Result};
use crate::linalg::{conjugate, expm_general, expm_hermitian, Mat, I};
use crate::noise;
use crate::operator::{spin_plus, spin_z, Axis, CollectiveOperator};
use crate::state::CollectiveState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    RN,
    #[serde(rename = "R_PLUS")]
    RPlus,
    #[serde(rename = "R_MINUS")]
    RMinus,
    RX2,
    RY2,
    RZ2,
    OAT,
    TAT,
    TNT,
    GMS,
}

impl GateKind {
    pub const ALL: [GateKind; 13] = [
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::RN,
        GateKind::RPlus,
        GateKind::RMinus,
        GateKind::RX2,
        GateKind::RY2,
        GateKind::RZ2,
        GateKind::OAT,
        GateKind::TAT,
        GateKind::TNT,
        GateKind::GMS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::RN => "RN",
            GateKind::RPlus => "R_PLUS",
            GateKind::RMinus => "R_MINUS",
            GateKind::RX2 => "RX2",
            GateKind::RY2 => "RY2",
            GateKind::RZ2 => "RZ2",
            GateKind::OAT => "OAT",
            GateKind::TAT => "TAT",
            GateKind::TNT => "TNT",
            GateKind::GMS => "GMS",
        }
    }

    fn param_count(self) -> usize {
        match self {
            GateKind::RN | GateKind::GMS | GateKind::TNT => 2,
            _ => 1,
        }
    }

    fn axis_count(self) -> usize {
        match self {
            GateKind::OAT => 1,
            GateKind::TAT | GateKind::TNT => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown gate kind '{s}'")))
    }
}

/// One catalog gate with its parameters, as it appears in circuit JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

impl GateSpec {
    pub fn new(kind: GateKind, params: &[f64]) -> Self {
        Self {
            kind,
            params: params.to_vec(),
            axes: None,
            noise: None,
        }
    }

    pub fn rx(theta: f64) -> Self {
        Self::new(GateKind::RX, &[theta])
    }

    pub fn ry(theta: f64) -> Self {
        Self::new(GateKind::RY, &[theta])
    }

    pub fn rz(theta: f64) -> Self {
        Self::new(GateKind::RZ, &[theta])
    }

    pub fn rn(theta: f64, phi: f64) -> Self {
        Self::new(GateKind::RN, &[theta, phi])
    }

    pub fn oat(theta: f64, axis: &str) -> Self {
        Self::new(GateKind::OAT, &[theta]).with_axes(axis)
    }

    pub fn tat(theta: f64, axes: &str) -> Self {
        Self::new(GateKind::TAT, &[theta]).with_axes(axes)
    }

    pub fn tnt(theta: f64, lambda: f64, axes: &str) -> Self {
        Self::new(GateKind::TNT, &[theta, lambda]).with_axes(axes)
    }

    pub fn gms(theta: f64, phi: f64) -> Self {
        Self::new(GateKind::GMS, &[theta, phi])
    }

    pub fn with_axes(mut self, axes: &str) -> Self {
        self.axes = Some(axes.to_string());
        self
    }

    pub fn with_noise(mut self, epsilon: f64) -> Self {
        self.noise = Some(epsilon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let want = self.kind.param_count();
        if self.params.len() != want {
            return domain(format!(
                "{} takes {want} parameter(s), got {}",
                self.kind,
                self.params.len()
            ));
        }
        if self.params.iter().any(|p| p.is_nan()) {
            return domain(format!("{} has a NaN parameter", self.kind));
        }
        if self.kind == GateKind::TNT && self.params[1] == 0.0 {
            return domain("TNT coupling Lambda must be nonzero");
        }
        if let Some(eps) = self.noise {
            if !(0.0..=1.0).contains(&eps) {
                return domain(format!("noise probability {eps} outside [0, 1]"));
            }
        }
        self.parsed_axes().map(|_| ())
    }

    /// Axis labels from the `axes` tag, checked against the gate kind.
    pub fn parsed_axes(&self) -> Result<Vec<Axis>> {
        let want = self.kind.axis_count();
        if want == 0 {
            return Ok(Vec::new());
        }
        let tag = self
            .axes
            .as_deref()
            .ok_or_else(|| Error::Domain(format!("{} requires an axes tag", self.kind)))?;
        let axes = parse_axes(tag)?;
        if axes.len() != want {
            return domain(format!("{} expects {want} axis label(s), got '{tag}'", self.kind));
        }
        if self.kind == GateKind::OAT && !axes[0].is_cartesian() {
            return domain(format!("OAT axis must be x, y or z, got '{tag}'"));
        }
        Ok(axes)
    }

    /// Whether the generator is Hermitian (so the gate is unitary).
    pub fn is_unitary(&self) -> bool {
        match self.kind {
            GateKind::RPlus | GateKind::RMinus => false,
            GateKind::TAT | GateKind::TNT => self
                .parsed_axes()
                .map(|a| a.iter().all(|x| x.is_cartesian()))
                .unwrap_or(false),
            _ => true,
        }
    }
}

/// Split an axis tag like `"zx"`, `"ZY"`, `"plusminus"` or `"z,plus"`.
pub fn parse_axes(tag: &str) -> Result<Vec<Axis>> {
    let lowered: String = tag
        .chars()
        .filter(|ch| ch.is_ascii_alphabetic())
        .collect::<String>()
        .to_ascii_lowercase();
    let mut rest = lowered.as_str();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (axis, len) = if rest.starts_with("plus") {
            (Axis::Plus, 4)
        } else if rest.starts_with("minus") {
            (Axis::Minus, 5)
        } else {
            let a = Axis::parse(&rest[..1])
                .ok_or_else(|| Error::Domain(format!("unknown axis tag '{tag}'")))?;
            (a, 1)
        };
        out.push(axis);
        rest = &rest[len..];
    }
    if out.is_empty() {
        return domain(format!("empty axis tag '{tag}'"));
    }
    Ok(out)
}

/// Single-block spin operator for one axis.
fn axis_block(two_j: u32, axis: Axis) -> Mat {
    let p = spin_plus(two_j);
    match axis {
        Axis::X => (&p + p.transpose()).scale(0.5),
        Axis::Y => (&p - p.transpose()) * (-I * 0.5),
        Axis::Z => spin_z(two_j),
        Axis::Plus => p,
        Axis::Minus => p.transpose(),
    }
}

/// Generator block `G_j` and rotation angle for one spin block.
pub fn generator_block(spec: &GateSpec, n: u32, two_j: u32) -> Result<(Mat, f64)> {
    spec.validate()?;
    let theta = spec.params[0];
    let sq = |a: Axis| {
        let m = axis_block(two_j, a);
        &m * &m
    };
    let g = match spec.kind {
        GateKind::RX => axis_block(two_j, Axis::X),
        GateKind::RY => axis_block(two_j, Axis::Y),
        GateKind::RZ => axis_block(two_j, Axis::Z),
        GateKind::RPlus => axis_block(two_j, Axis::Plus),
        GateKind::RMinus => axis_block(two_j, Axis::Minus),
        GateKind::RN => {
            // exp(-iθ J·n), n = (-sin φ, cos φ, 0)
            let (s, co) = spec.params[1].sin_cos();
            axis_block(two_j, Axis::X).scale(-s) + axis_block(two_j, Axis::Y).scale(co)
        }
        GateKind::RX2 => sq(Axis::X),
        GateKind::RY2 => sq(Axis::Y),
        GateKind::RZ2 => sq(Axis::Z),
        GateKind::OAT => sq(spec.parsed_axes()?[0]),
        GateKind::TAT => {
            let a = spec.parsed_axes()?;
            sq(a[0]) - sq(a[1])
        }
        GateKind::TNT => {
            let a = spec.parsed_axes()?;
            let lambda = spec.params[1];
            sq(a[0]) - axis_block(two_j, a[1]).scale(n as f64 / lambda)
        }
        GateKind::GMS => {
            let (s, co) = spec.params[1].sin_cos();
            let m = axis_block(two_j, Axis::X).scale(co) + axis_block(two_j, Axis::Y).scale(s);
            &m * &m
        }
    };
    Ok((g, theta))
}

/// The full collective generator `G` with `K = exp(-iθG)`.
pub fn generator(spec: &GateSpec, ledger: &BlockLedger) -> Result<(CollectiveOperator, f64)> {
    let n = ledger.n_particles();
    let mut blocks = Vec::with_capacity(ledger.len());
    let mut theta = 0.0;
    for b in ledger.blocks() {
        let (g, t) = generator_block(spec, n, b.two_j)?;
        theta = t;
        blocks.push(g);
    }
    Ok((
        CollectiveOperator::from_blocks(ledger, blocks, spec.is_unitary()),
        theta,
    ))
}

/// `exp(-i angle G_j)` for every block of `op`.
pub fn exponentiate(op: &CollectiveOperator, angle: f64) -> Result<Vec<Mat>> {
    let hermitian = op.is_hermitian();
    op.blocks()
        .par_iter()
        .enumerate()
        .map(|(i, g)| exp_block(g, angle, hermitian).map_err(|e| tag_block(e, op.ledger(), i)))
        .collect()
}

fn exp_block(g: &Mat, angle: f64, hermitian: bool) -> Result<Mat> {
    if hermitian {
        expm_hermitian(g, angle)
    } else {
        expm_general(g, angle)
    }
}

fn tag_block(e: Error, ledger: &BlockLedger, index: usize) -> Error {
    match e {
        Error::Numeric(msg) => Error::Numeric(format!(
            "block {index} (j = {}): {msg}",
            ledger.block(index).j()
        )),
        other => other,
    }
}

/// Largest estimated relative error accepted after a non-unitary gate.
pub const PRECISION_LOSS_LIMIT: f64 = 1e-8;

/// Apply one gate: `rho -> K rho K^dagger` per active block, then the
/// optional depolarizing channel. Non-unitary gates renormalize the trace.
pub fn apply_gate(state: &CollectiveState, spec: &GateSpec) -> Result<CollectiveState> {
    spec.validate()?;
    let unitary = spec.is_unitary();
    let n = state.n_particles();
    let ledger = state.ledger();
    // each active block yields K rho K^dagger and the scale ||K||_F^2 tr(rho)
    // of the terms that were summed to form it
    let evolved: Vec<Option<(Mat, f64)>> = state
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, rho)| match rho {
            None => Ok(None),
            Some(rho) => {
                let (g, theta) = generator_block(spec, n, ledger.block(i).two_j)?;
                let k = exp_block(&g, theta, unitary).map_err(|e| tag_block(e, ledger, i))?;
                let scale = if unitary { 0.0 } else { k.norm_squared() * crate::linalg::trace(rho).re };
                Ok(Some((conjugate(&k, rho), scale)))
            }
        })
        .collect::<Result<_>>()?;
    let scale: f64 = evolved.iter().flatten().map(|(_, s)| s).sum();
    let mut out = state.with_blocks(evolved.into_iter().map(|b| b.map(|(m, _)| m)).collect());
    if !unitary {
        // K amplifies some components and the state may cancel them; when
        // the surviving trace is tiny next to the amplified terms, the
        // renormalized result carries no significant digits
        let tr = out.trace().re;
        let loss = if tr > 0.0 { f64::EPSILON * scale / tr } else { f64::INFINITY };
        if !(loss <= PRECISION_LOSS_LIMIT) {
            return Err(Error::Numeric(format!(
                "{} gate lost precision: estimated relative error {loss:.1e} in the renormalized state",
                spec.kind
            )));
        }
        out = out.normalized()?;
        out.mark_conditioned();
    }
    match spec.noise {
        Some(eps) if eps > 0.0 => noise::depolarize(&out, eps),
        _ => Ok(out),
    }
}

/// A register size plus an ordered gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: u32,
    pub gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(n: u32) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: GateSpec) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("circuit needs at least one particle");
        }
        self.gates.iter().try_for_each(GateSpec::validate)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let circuit: Circuit = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("circuit JSON line {} column {}: {e}", e.line(), e.column()))
        })?;
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    /// Run from the ground state.
    pub fn run(&self) -> Result<CollectiveState> {
        apply_circuit(self, &CollectiveState::ground(self.n)?)
    }
}

/// Left fold of [`apply_gate`] over the circuit.
pub fn apply_circuit(circuit: &Circuit, initial: &CollectiveState) -> Result<CollectiveState> {
    if initial.n_particles() != circuit.n {
        return domain(format!(
            "state has {} particles but circuit has {}",
            initial.n_particles(),
            circuit.n
        ));
    }
    circuit
        .gates
        .iter()
        .try_fold(initial.clone(), |state, gate| apply_gate(&state, gate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};
    use crate::state::InvariantTolerance;
    use std::f64::consts::PI;

    fn populations(s: &CollectiveState) -> Vec<f64> {
        s.block(0).unwrap().diagonal().iter().map(|z| z.re).collect()
    }

    #[test]
    fn generator_examples() {
        let ledger = BlockLedger::new(2).unwrap();
        let (g, t) = generator(&GateSpec::rz(0.4), &ledger).unwrap();
        assert_eq!(t, 0.4);
        assert_eq!(g.block(0), &spin_z(2));

        let (oat, _) = generator(&GateSpec::oat(0.1, "z"), &ledger).unwrap();
        let diag: Vec<f64> = oat.block(0).diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 1.0]);

        let l5 = BlockLedger::new(5).unwrap();
        let (gms, _) = generator(&GateSpec::gms(0.3, 0.0), &l5).unwrap();
        let (rx2, _) = generator(&GateSpec::new(GateKind::RX2, &[0.3]), &l5).unwrap();
        for (a, b) in gms.blocks().iter().zip(rx2.blocks()) {
            assert!(max_abs(&(a - b)) < 1e-15);
        }
    }

    #[test]
    fn generator_errors() {
        let ledger = BlockLedger::new(3).unwrap();
        assert!(generator(&GateSpec::tnt(0.1, 0.0, "zx"), &ledger).is_err());
        assert!(generator(&GateSpec::tat(0.1, "zq"), &ledger).is_err());
        assert!(generator(&GateSpec::oat(0.1, "plus"), &ledger).is_err());
        assert!(generator(&GateSpec::new(GateKind::RN, &[0.1]), &ledger).is_err());
        assert!(GateSpec::rx(0.1).with_noise(1.5).validate().is_err());
    }

    #[test]
    fn exponentiate_examples() {
        let ledger = BlockLedger::new(2).unwrap();
        let zero = CollectiveOperator::zero(&ledger);
        for k in exponentiate(&zero, 2.5).unwrap() {
            assert_eq!(k.clone(), Mat::identity(k.nrows(), k.nrows()));
        }
        let (jz, _) = generator(&GateSpec::rz(PI), &ledger).unwrap();
        let k = &exponentiate(&jz, PI).unwrap()[0];
        let expect = [-1.0, 1.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((k[(i, i)] - c(*e)).norm() < 1e-15);
        }
    }

    #[test]
    fn every_hermitian_gate_is_unitary() {
        let ledger = BlockLedger::new(6).unwrap();
        let specs = [
            GateSpec::rx(0.7),
            GateSpec::ry(-1.1),
            GateSpec::rn(0.4, 2.2),
            GateSpec::new(GateKind::RY2, &[0.9]),
            GateSpec::oat(0.3, "x"),
            GateSpec::tat(0.2, "xy"),
            GateSpec::tnt(0.2, 3.0, "zx"),
            GateSpec::gms(0.5, 0.8),
        ];
        for spec in specs {
            let (g, t) = generator(&spec, &ledger).unwrap();
            assert!(g.is_hermitian());
            for k in exponentiate(&g, t).unwrap() {
                let d = k.nrows();
                assert!(max_abs(&(&k * k.adjoint() - Mat::identity(d, d))) < 1e-12, "{spec:?}");
            }
        }
        assert!(!GateSpec::tat(0.2, "plusz").is_unitary());
        assert!(!GateSpec::new(GateKind::RPlus, &[0.2]).is_unitary());
    }

    #[test]
    fn rotation_maps_ground_to_excited() {
        for n in [1, 4, 9] {
            let g = CollectiveState::ground(n).unwrap();
            let e = apply_gate(&g, &GateSpec::rn(PI, 0.7)).unwrap();
            assert!((populations(&e)[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_prepares_equatorial_css() {
        let g = CollectiveState::ground(50).unwrap();
        let s = apply_gate(&g, &GateSpec::rn(-PI / 2.0, PI / 4.0)).unwrap();
        let css = CollectiveState::css(50, PI / 2.0, PI / 4.0).unwrap();
        assert!(s.distance(&css) < 1e-10);
    }

    #[test]
    fn gms_half_pi_makes_cat() {
        for n in [2, 4, 6, 10] {
            let s = apply_gate(&CollectiveState::ground(n).unwrap(), &GateSpec::gms(PI / 2.0, 0.0))
                .unwrap();
            let p = populations(&s);
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[n as usize] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_rotations_and_composition() {
        let start = apply_gate(
            &CollectiveState::ground(7).unwrap(),
            &GateSpec::rn(-1.0, 0.3).with_noise(0.2),
        )
        .unwrap();
        let mut c1 = Circuit::new(7);
        c1.push(GateSpec::rx(0.9)).push(GateSpec::rx(-0.9));
        assert!(apply_circuit(&c1, &start).unwrap().distance(&start) < 1e-12);

        let mut two = Circuit::new(7);
        two.push(GateSpec::rz(0.4)).push(GateSpec::rz(1.3));
        let mut one = Circuit::new(7);
        one.push(GateSpec::rz(1.7));
        let a = apply_circuit(&two, &start).unwrap();
        let b = apply_circuit(&one, &start).unwrap();
        assert!(a.distance(&b) < 1e-10);
    }

    #[test]
    fn rz_leaves_ground_alone() {
        let mut circ = Circuit::new(5);
        circ.push(GateSpec::rz(0.3)).push(GateSpec::rz(2.0));
        let g = CollectiveState::ground(5).unwrap();
        assert!(apply_circuit(&circ, &g).unwrap().distance(&g) < 1e-15);
    }

    #[test]
    fn non_unitary_gate_renormalizes() {
        let g = CollectiveState::ground(4).unwrap();
        let s = apply_gate(&g, &GateSpec::new(GateKind::RPlus, &[0.8])).unwrap();
        assert!(s.is_conditioned());
        s.check_invariants(InvariantTolerance::default()).unwrap();
    }

    #[test]
    fn circuit_json_round_trip_and_errors() {
        let text = r#"{"n": 3, "gates": [
            {"kind": "RN", "params": [1.0, 0.5]},
            {"kind": "TNT", "params": [0.1, 2.0], "axes": "zx", "noise": 0.05},
            {"kind": "R_PLUS", "params": [0.2]}
        ]}"#;
        let c = Circuit::from_json(text).unwrap();
        assert_eq!(c.gates.len(), 3);
        assert_eq!(c.gates[2].kind, GateKind::RPlus);
        assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c);

        let bad = Circuit::from_json("{\"n\": 3, \"gates\": [{\"kind\": \"FOO\", \"params\": []}]}");
        assert!(matches!(bad, Err(Error::Parse(_))));
        let wrong_arity = Circuit::from_json("{\"n\": 3, \"gates\": [{\"kind\": \"RX\", \"params\": []}]}");
        assert!(matches!(wrong_arity, Err(Error::Domain(_))));
    }

    #[test]
    fn large_register_layers() {
        let mut circ = Circuit::new(200);
        for _ in 0..3 {
            circ.push(GateSpec::rx(PI / 3.0))
                .push(GateSpec::ry(PI / 3.0))
                .push(GateSpec::rz(PI / 3.0));
        }
        let s = circ.run().unwrap();
        assert!((s.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tnt_approaches_oat_for_large_lambda() {
        let css = CollectiveState::css(10, PI / 2.0, 0.0).unwrap();
        let oat = apply_gate(&css, &GateSpec::oat(0.2, "z")).unwrap();
        let mut last = f64::INFINITY;
        for lambda in [10.0, 100.0, 1e3, 1e4, 1e6] {
            let tnt = apply_gate(&css, &GateSpec::tnt(0.2, lambda, "zx")).unwrap();
            let d = tnt.distance(&oat);
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn cancelling_ladder_gates_report_precision_loss() {
        let mut mild = Circuit::new(4);
        mild.push(GateSpec::new(GateKind::RPlus, &[0.5])).push(GateSpec::new(GateKind::RPlus, &[-0.5]));
        let back = mild.run().unwrap();
        assert!(back.distance(&CollectiveState::ground(4).unwrap()) < 1e-12);

        let mut wild = Circuit::new(11);
        wild.push(GateSpec::new(GateKind::RPlus, &[3.0])).push(GateSpec::new(GateKind::RPlus, &[-3.0]));
        match wild.run() {
            Err(Error::Numeric(msg)) => assert!(msg.contains("lost precision"), "{msg}"),
            other => panic!("expected precision loss, got {other:?}"),
        }
    }
}
