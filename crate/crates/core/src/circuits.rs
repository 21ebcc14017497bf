//! Parameterized circuits and the ansatz families.
//!
//! A gate angle is either a constant or `multiplier * theta[slot]`. Pauli
//! rotations follow `PAULI_ROT(P, a) = exp(-i (a/2) P)`, the same convention
//! as RX/RY/RZ, so a QAOA cost term `c_k P_k` gets angle `2 c_k gamma` and the
//! mixer gets `RX(2 beta)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng::Rng;
use crate::statevector::sampling::group_qubit_wise;
use crate::statevector::{gates, noise, NoiseConfig, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    U3 { theta: f64, phi: f64, lambda: f64 },
    Cx,
    PauliRot(PauliString),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::H => "H",
            GateKind::U3 { .. } => "U3",
            GateKind::Cx => "CX",
            GateKind::PauliRot(_) => "PAULI_ROT",
        }
    }

    fn is_rotation(&self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::PauliRot(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { slot: usize, multiplier: f64 },
}

impl Angle {
    pub fn param(slot: usize) -> Self {
        Angle::Param {
            slot,
            multiplier: 1.0,
        }
    }

    fn bind(&self, theta: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(a) => a,
            Angle::Param { slot, multiplier } => multiplier * theta[slot],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// Target qubits; `[control, target]` for CX, the support for PAULI_ROT.
    pub qubits: Vec<usize>,
    /// Present exactly for rotation gates.
    pub angle: Option<Angle>,
}

impl fmt::Display for Gate {
    /// `kind qubits slot multiplier`, with `-` for an absent slot.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qubits = self
            .qubits
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let kind = match &self.kind {
            GateKind::PauliRot(p) => format!("PAULI_ROT[{}]", p.label()),
            k => k.name().to_string(),
        };
        match self.angle {
            Some(Angle::Param { slot, multiplier }) => {
                write!(f, "{kind} {qubits} {slot} {multiplier}")
            }
            Some(Angle::Fixed(a)) => write!(f, "{kind} {qubits} - {a}"),
            None => write!(f, "{kind} {qubits} - -"),
        }
    }
}

/// Ordered gate list over `n_qubits` with `n_params` parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &q in &gate.qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        match &gate.kind {
            GateKind::Cx => {
                if gate.qubits.len() != 2 {
                    return Err(Error::InvalidArgument("CX takes two qubits".into()));
                }
                if gate.qubits[0] == gate.qubits[1] {
                    return Err(Error::SameQubit(gate.qubits[0]));
                }
            }
            GateKind::PauliRot(p) => {
                if p.n_qubits() != self.n_qubits {
                    return Err(Error::QubitMismatch {
                        expected: self.n_qubits,
                        found: p.n_qubits(),
                    });
                }
                if p.is_identity() {
                    return Err(Error::IdentityRotation);
                }
            }
            _ => {
                if gate.qubits.len() != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "{} takes one qubit",
                        gate.kind.name()
                    )));
                }
            }
        }
        if gate.kind.is_rotation() != gate.angle.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} angle presence mismatch",
                gate.kind.name()
            )));
        }
        if let Some(Angle::Param { slot, multiplier }) = gate.angle {
            if !multiplier.is_finite() {
                return Err(Error::InvalidArgument("non-finite multiplier".into()));
            }
            self.n_params = self.n_params.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    fn rot(&mut self, kind: GateKind, q: usize, angle: Angle) -> Result<()> {
        self.push(Gate {
            kind,
            qubits: vec![q],
            angle: Some(angle),
        })
    }

    pub fn rx(&mut self, q: usize, angle: Angle) -> Result<()> {
        self.rot(GateKind::Rx, q, angle)
    }

    pub fn ry(&mut self, q: usize, angle: Angle) -> Result<()> {
        self.rot(GateKind::Ry, q, angle)
    }

    pub fn rz(&mut self, q: usize, angle: Angle) -> Result<()> {
        self.rot(GateKind::Rz, q, angle)
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.push(Gate {
            kind: GateKind::H,
            qubits: vec![q],
            angle: None,
        })
    }

    pub fn u3(&mut self, q: usize, theta: f64, phi: f64, lambda: f64) -> Result<()> {
        self.push(Gate {
            kind: GateKind::U3 { theta, phi, lambda },
            qubits: vec![q],
            angle: None,
        })
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate {
            kind: GateKind::Cx,
            qubits: vec![control, target],
            angle: None,
        })
    }

    pub fn pauli_rot(&mut self, p: PauliString, angle: Angle) -> Result<()> {
        let qubits = (0..p.n_qubits()).filter(|&q| p.get(q) != Pauli::I).collect();
        self.push(Gate {
            kind: GateKind::PauliRot(p),
            qubits,
            angle: Some(angle),
        })
    }

    /// Every slot in `0..n_params` must feed at least one gate.
    pub fn check_slots(&self) -> Result<()> {
        let mut used = vec![false; self.n_params];
        for g in &self.gates {
            if let Some(Angle::Param { slot, .. }) = g.angle {
                used[slot] = true;
            }
        }
        match used.iter().position(|u| !u) {
            Some(slot) => Err(Error::InvalidArgument(format!("parameter slot {slot} is unused"))),
            None => Ok(()),
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::ParamLength {
                expected: self.n_params,
                found: theta.len(),
            });
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("theta[{i}] is not finite")));
        }
        Ok(())
    }

    fn apply_gate(&self, g: &Gate, theta: &[f64], s: &mut StateVector) {
        let angle = || g.angle.expect("rotation has an angle").bind(theta);
        match &g.kind {
            GateKind::Rx => s.apply_1q_unchecked(&gates::rx(angle()), g.qubits[0]),
            GateKind::Ry => s.apply_1q_unchecked(&gates::ry(angle()), g.qubits[0]),
            GateKind::Rz => s.apply_1q_unchecked(&gates::rz(angle()), g.qubits[0]),
            GateKind::H => s.apply_1q_unchecked(&gates::hadamard(), g.qubits[0]),
            GateKind::U3 { theta, phi, lambda } => {
                s.apply_1q_unchecked(&gates::u3(*theta, *phi, *lambda), g.qubits[0])
            }
            GateKind::Cx => s.apply_cx_unchecked(g.qubits[0], g.qubits[1]),
            GateKind::PauliRot(p) => s.apply_pauli_rotation_unchecked(p, angle()),
        }
    }

    /// Applies the bound circuit to `s` without noise.
    pub fn apply(&self, theta: &[f64], s: &mut StateVector) -> Result<()> {
        self.check_theta(theta)?;
        if s.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        for g in &self.gates {
            self.apply_gate(g, theta, s);
        }
        Ok(())
    }

    /// `U(theta)|0...0>`
    pub fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n_qubits)?;
        self.apply(theta, &mut s)?;
        Ok(s)
    }

    /// One noisy trajectory: each gate of the list is followed by a
    /// depolarizing Pauli draw on the qubits it touches (`p1` for one qubit,
    /// `p2` otherwise). A Pauli rotation counts as one gate.
    pub fn apply_noisy(
        &self,
        theta: &[f64],
        s: &mut StateVector,
        noise: &NoiseConfig,
        rng: &mut Rng,
    ) -> Result<()> {
        if !noise.enabled {
            return self.apply(theta, s);
        }
        noise.validate()?;
        self.check_theta(theta)?;
        if s.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        for g in &self.gates {
            self.apply_gate(g, theta, s);
            let p = if g.qubits.len() == 1 { noise.p1 } else { noise.p2 };
            noise::depolarize(s, &g.qubits, p, rng);
        }
        Ok(())
    }

    /// Rewrites every PAULI_ROT into basis changes, a CX parity ladder and
    /// one RZ, which is what a device would run. Parameter slots carry over.
    pub fn lowered(&self) -> Circuit {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            gates: Vec::with_capacity(self.gates.len()),
            n_params: self.n_params,
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        for g in &self.gates {
            let GateKind::PauliRot(p) = &g.kind else {
                out.gates.push(g.clone());
                continue;
            };
            let support = &g.qubits;
            let basis = |out: &mut Circuit, undo: bool| {
                for &q in support {
                    match p.get(q) {
                        Pauli::X => out.h(q).expect("valid qubit"),
                        Pauli::Y => out
                            .rx(q, Angle::Fixed(if undo { -half_pi } else { half_pi }))
                            .expect("valid qubit"),
                        _ => {}
                    }
                }
            };
            basis(&mut out, false);
            for w in support.windows(2) {
                out.cx(w[0], w[1]).expect("distinct qubits");
            }
            let last = *support.last().expect("non-identity");
            out.rz(last, g.angle.expect("rotation has an angle"))
                .expect("valid qubit");
            for w in support.windows(2).rev() {
                out.cx(w[0], w[1]).expect("distinct qubits");
            }
            basis(&mut out, true);
        }
        out
    }

    /// One line per gate: `kind qubits slot multiplier`.
    pub fn dump(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }

    /// For each slot, the multiplier of the single rotation gate it feeds.
    ///
    /// Fails with [`Error::ShiftUnsupported`] if a slot feeds several gates
    /// or a gate without a two-eigenvalue generator.
    pub fn shift_multipliers(&self) -> Result<Vec<f64>> {
        let mut mult: Vec<Option<f64>> = vec![None; self.n_params];
        for g in &self.gates {
            if let Some(Angle::Param { slot, multiplier }) = g.angle {
                if !g.kind.is_rotation() || mult[slot].is_some() || multiplier == 0.0 {
                    return Err(Error::ShiftUnsupported(slot));
                }
                mult[slot] = Some(multiplier);
            }
        }
        mult.into_iter()
            .enumerate()
            .map(|(slot, m)| m.ok_or(Error::ShiftUnsupported(slot)))
            .collect()
    }
}

/// Greedy ASAP layering: each gate lands one layer after the latest gate
/// sharing a qubit with it. Counted on the native (lowered) gate list, so a
/// Pauli rotation costs its basis changes, CX ladder and RZ.
pub fn circuit_depth(c: &Circuit) -> usize {
    asap_depth(&c.lowered())
}

/// ASAP layering of the gate list exactly as written.
pub fn asap_depth(c: &Circuit) -> usize {
    let mut layer = vec![0usize; c.n_qubits()];
    let mut depth = 0;
    for g in c.gates() {
        let d = 1 + g.qubits.iter().map(|&q| layer[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            layer[q] = d;
        }
        depth = depth.max(d);
    }
    depth
}

/// Applies `c(theta)` to a copy of `s0`, with trajectory noise when enabled.
pub fn run_circuit(
    c: &Circuit,
    theta: &[f64],
    s0: &StateVector,
    noise: &NoiseConfig,
    rng: &mut Rng,
) -> Result<StateVector> {
    let mut s = s0.clone();
    c.apply_noisy(theta, &mut s, noise, rng)?;
    Ok(s)
}

/// Hardware-efficient ansatz: `reps + 1` rotation blocks (RY layer then RZ
/// layer) with a linear CX chain between consecutive blocks.
pub fn build_efficient_su2(n: usize, reps: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "EfficientSU2 needs at least 2 qubits (got {n})"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let mut c = Circuit::new(n);
    let mut slot = 0;
    for block in 0..=reps {
        for q in 0..n {
            c.ry(q, Angle::param(slot))?;
            slot += 1;
        }
        for q in 0..n {
            c.rz(q, Angle::param(slot))?;
            slot += 1;
        }
        if block < reps {
            for q in 0..n - 1 {
                c.cx(q, q + 1)?;
            }
        }
    }
    Ok(c)
}

/// `p`-level QAOA: H on every qubit, then per level a cost layer (one Pauli
/// rotation per non-identity term, sharing slot `gamma_j`) and a mixer
/// layer `RX(2 beta_j)`. Slots run `gamma_1, beta_1, ...`.
///
/// The cost layer visits terms clique by clique, using the qubit-wise
/// commuting grouping of the measurement estimator (term order inside a
/// clique). Terms inside a clique commute, so each clique is exponentiated
/// exactly. Bond-by-bond order would be wrong for Heisenberg couplings:
/// `XX`, `YY`, `ZZ` on one bond combine into `exp(-i g s.s)`, which
/// conserves total spin and pins the uniform start state to the fully
/// symmetric multiplet.
pub fn build_qaoa_ansatz(h: &Observable, p: usize) -> Result<Circuit> {
    if p == 0 {
        return Err(Error::InvalidArgument("QAOA level p must be >= 1".into()));
    }
    if h.terms().iter().all(|t| t.string.is_identity()) {
        return Err(Error::InvalidArgument(
            "QAOA cost observable has no non-identity term".into(),
        ));
    }
    let n = h.n_qubits();
    let cost_order: Vec<usize> = group_qubit_wise(h).into_iter().flat_map(|g| g.terms).collect();
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.h(q)?;
    }
    for level in 0..p {
        let (gamma, beta) = (2 * level, 2 * level + 1);
        for t in cost_order.iter().map(|&i| &h.terms()[i]) {
            c.pauli_rot(
                t.string,
                Angle::Param {
                    slot: gamma,
                    multiplier: 2.0 * t.coefficient,
                },
            )?;
        }
        for q in 0..n {
            c.rx(
                q,
                Angle::Param {
                    slot: beta,
                    multiplier: 2.0,
                },
            )?;
        }
    }
    Ok(c)
}

/// Trotterized cluster ansatz: `reps` sweeps of one Pauli rotation per
/// string, each with its own slot.
pub fn build_pauli_cluster_ansatz(strings: &[PauliString], reps: usize) -> Result<Circuit> {
    let first = strings
        .first()
        .ok_or_else(|| Error::InvalidArgument("cluster ansatz needs at least one string".into()))?;
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let mut c = Circuit::new(first.n_qubits());
    let mut slot = 0;
    for _ in 0..reps {
        for p in strings {
            c.pauli_rot(*p, Angle::param(slot))?;
            slot += 1;
        }
    }
    Ok(c)
}
