//! Single-qubit gates of the demonstration experiments together with the
//! pulse sequences that realize their controlled versions on a two-spin
//! (ancilla + system) register.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{DropsError, Result};
use crate::pulse::{PulseEvent, PulseSequence, PHASE_MINUS_X, PHASE_MINUS_Y, PHASE_X, PHASE_Y};
use crate::spinop::{spin_rotation, Operator, C64};

const X_AXIS: [f64; 3] = [1.0, 0.0, 0.0];

/// One row of the gate table.
#[derive(Clone, Copy, Debug)]
pub struct TableGate {
    pub name: &'static str,
    pub description: &'static str,
    kind: GateKind,
}

#[derive(Clone, Copy, Debug)]
enum GateKind {
    Id,
    Not,
    SqrtNot,
    Hadamard,
    /// Phase shift by `quarter · π/2`.
    Phase(u8),
    /// Rotation about x by `quarter · π/2`.
    Rx(u8),
}

pub const TABLE: [TableGate; 16] = [
    TableGate { name: "id", description: "identity", kind: GateKind::Id },
    TableGate { name: "not", description: "NOT", kind: GateKind::Not },
    TableGate { name: "sqrt-not", description: "square root of NOT", kind: GateKind::SqrtNot },
    TableGate { name: "hadamard", description: "Hadamard", kind: GateKind::Hadamard },
    TableGate { name: "phase-pi/2", description: "π/2 phase shift", kind: GateKind::Phase(1) },
    TableGate { name: "phase-pi", description: "π phase shift", kind: GateKind::Phase(2) },
    TableGate { name: "phase-3pi/2", description: "3π/2 phase shift", kind: GateKind::Phase(3) },
    TableGate { name: "phase-2pi", description: "2π phase shift", kind: GateKind::Phase(4) },
    TableGate { name: "rx-pi/2", description: "[π/2]_x rotation", kind: GateKind::Rx(1) },
    TableGate { name: "rx-pi", description: "[π]_x rotation", kind: GateKind::Rx(2) },
    TableGate { name: "rx-3pi/2", description: "[3π/2]_x rotation", kind: GateKind::Rx(3) },
    TableGate { name: "rx-2pi", description: "[2π]_x rotation", kind: GateKind::Rx(4) },
    TableGate { name: "rx-5pi/2", description: "[5π/2]_x rotation", kind: GateKind::Rx(5) },
    TableGate { name: "rx-3pi", description: "[3π]_x rotation", kind: GateKind::Rx(6) },
    TableGate { name: "rx-7pi/2", description: "[7π/2]_x rotation", kind: GateKind::Rx(7) },
    TableGate { name: "rx-4pi", description: "[4π]_x rotation", kind: GateKind::Rx(8) },
];

/// Looks up a table row by name (case-insensitive; `h` and `sqrtnot` are accepted aliases).
pub fn lookup(name: &str) -> Option<&'static TableGate> {
    let key = name.trim().to_ascii_lowercase();
    let key = match key.as_str() {
        "h" => "hadamard",
        "sqrtnot" | "sqrt_not" => "sqrt-not",
        "x" => "not",
        other => other,
    };
    TABLE.iter().find(|g| g.name == key)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Phase-shift gate `diag(1, e^{iγ})`.
pub fn phase_gate(gamma: f64) -> Operator {
    Operator::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), C64::from_polar(1.0, gamma)]])
        .expect("2x2")
}

/// Rotation about x, `exp(-iδ I_x)`.
pub fn rx(delta: f64) -> Operator {
    spin_rotation(delta, X_AXIS)
}

impl TableGate {
    /// The propagator `U` as listed in the table.
    pub fn matrix(&self) -> Operator {
        let h = FRAC_1_SQRT_2;
        let rows = |m: [[C64; 2]; 2]| Operator::from_rows(&[m[0].to_vec(), m[1].to_vec()]).expect("2x2");
        match self.kind {
            GateKind::Id => Operator::identity(1),
            GateKind::Not => rows([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
            GateKind::SqrtNot => rows([[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]]),
            GateKind::Hadamard => rows([[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]]),
            GateKind::Phase(q) => {
                let u = match q {
                    1 => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]],
                    2 => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
                    3 => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]],
                    _ => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
                };
                rows(u)
            }
            GateKind::Rx(q) => {
                let u = match q {
                    1 => [[c(h, 0.), c(0., -h)], [c(0., -h), c(h, 0.)]],
                    2 => [[c(0., 0.), c(0., -1.)], [c(0., -1.), c(0., 0.)]],
                    3 => [[c(-h, 0.), c(0., -h)], [c(0., -h), c(-h, 0.)]],
                    4 => [[c(-1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
                    5 => [[c(-h, 0.), c(0., h)], [c(0., h), c(-h, 0.)]],
                    6 => [[c(0., 0.), c(0., 1.)], [c(0., 1.), c(0., 0.)]],
                    7 => [[c(h, 0.), c(0., h)], [c(0., h), c(h, 0.)]],
                    _ => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
                };
                rows(u)
            }
        }
    }

    /// Pulse sequence realizing `cU` (up to a global phase) for coupling `j_hz`.
    pub fn sequence(&self, j_hz: f64) -> PulseSequence {
        let p = PulseEvent::pulse;
        let d = PulseEvent::delay;
        let events = match self.kind {
            GateKind::Id => vec![],
            GateKind::Not | GateKind::SqrtNot => {
                let (tau, flip) = match self.kind {
                    GateKind::Not => (1.0 / (2.0 * j_hz), PI / 2.0),
                    _ => (1.0 / (4.0 * j_hz), PI / 4.0),
                };
                vec![
                    p(&[1], PI / 2.0, PHASE_Y),
                    d(tau),
                    p(&[0, 1], PI / 2.0, PHASE_MINUS_Y),
                    p(&[0], flip, PHASE_MINUS_X),
                    p(&[1], flip, PHASE_X),
                    p(&[0], PI / 2.0, PHASE_Y),
                ]
            }
            GateKind::Hadamard => vec![
                p(&[0], PI, PHASE_MINUS_X),
                p(&[1], PI / 4.0, PHASE_MINUS_Y),
                d(1.0 / (2.0 * j_hz)),
                p(&[0], PI / 2.0, PHASE_X),
                p(&[1], PI / 2.0, PHASE_Y),
                p(&[0], PI / 2.0, PHASE_Y),
                p(&[1], PI / 2.0, PHASE_X),
                p(&[0], PI / 2.0, PHASE_X),
                p(&[1], PI / 4.0, PHASE_MINUS_Y),
            ],
            GateKind::Phase(q) => {
                let q = f64::from(q);
                vec![
                    p(&[0], PI, PHASE_X),
                    d(q / (4.0 * j_hz)),
                    p(&[0], PI, PHASE_MINUS_X),
                    p(&[0, 1], PI / 2.0, PHASE_Y),
                    p(&[0, 1], q * PI / 4.0, PHASE_X),
                    p(&[0, 1], PI / 2.0, PHASE_MINUS_Y),
                ]
            }
            GateKind::Rx(q) => {
                let mut events = Vec::new();
                for _ in 0..q / 2 {
                    events.extend(controlled_rx_block(2, j_hz));
                }
                if q % 2 == 1 {
                    events.extend(controlled_rx_block(1, j_hz));
                }
                events
            }
        };
        PulseSequence::new(events, j_hz).expect("table sequences are valid")
    }
}

/// `c[[q·π/2]_x rotation]` for `q ∈ {1, 2}`.
fn controlled_rx_block(q: u8, j_hz: f64) -> Vec<PulseEvent> {
    let q = f64::from(q);
    vec![
        PulseEvent::pulse(&[1], PI / 2.0, PHASE_Y),
        PulseEvent::delay(q / (4.0 * j_hz)),
        PulseEvent::pulse(&[1], PI / 2.0, PHASE_MINUS_Y),
        PulseEvent::pulse(&[1], q * PI / 4.0, PHASE_X),
    ]
}

/// Resolves a gate spec: a table name, or a parametric form
/// `rx:<angle>`, `ry:<angle>`, `rz:<angle>`, `phase:<angle>` with the angle in radians.
pub fn resolve_with(spec: &str, parse_angle: impl Fn(&str) -> Result<f64>) -> Result<Operator> {
    if let Some(gate) = lookup(spec) {
        return Ok(gate.matrix());
    }
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| DropsError::Invalid(format!("unknown gate '{spec}'")))?;
    let angle = parse_angle(arg)?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "rx" => Ok(rx(angle)),
        "ry" => Ok(spin_rotation(angle, [0.0, 1.0, 0.0])),
        "rz" => Ok(spin_rotation(angle, [0.0, 0.0, 1.0])),
        "phase" | "ph" => Ok(phase_gate(angle)),
        other => Err(DropsError::Invalid(format!("unknown gate family '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinop::{controlled, EPS_ALG};

    #[test]
    fn sixteen_rows_all_unitary() {
        assert_eq!(TABLE.len(), 16);
        for g in &TABLE {
            assert!(g.matrix().is_unitary(EPS_ALG), "{}", g.name);
            assert!(controlled(&g.matrix()).is_ok());
        }
    }

    #[test]
    fn rotation_rows_equal_rx() {
        for (q, name) in ["rx-pi/2", "rx-pi", "rx-3pi/2", "rx-2pi", "rx-5pi/2", "rx-3pi", "rx-7pi/2", "rx-4pi"]
            .iter()
            .enumerate()
        {
            let delta = (q + 1) as f64 * PI / 2.0;
            assert!(lookup(name).unwrap().matrix().approx_eq(&rx(delta), EPS_ALG), "{name}");
        }
    }

    #[test]
    fn phase_rows_equal_phase_gate() {
        for (q, name) in ["phase-pi/2", "phase-pi", "phase-3pi/2", "phase-2pi"].iter().enumerate() {
            let gamma = (q + 1) as f64 * PI / 2.0;
            assert!(lookup(name).unwrap().matrix().approx_eq(&phase_gate(gamma), EPS_ALG), "{name}");
        }
    }

    #[test]
    fn lookup_aliases() {
        assert_eq!(lookup("H").unwrap().name, "hadamard");
        assert_eq!(lookup(" NOT ").unwrap().name, "not");
        assert!(lookup("toffoli").is_none());
    }

    #[test]
    fn parametric_gates() {
        let parse = |s: &str| s.parse::<f64>().map_err(|e| DropsError::Invalid(e.to_string()));
        let u = resolve_with("rx:3.141592653589793", parse).unwrap();
        assert!(u.approx_eq(&lookup("rx-pi").unwrap().matrix(), EPS_ALG));
        assert!(resolve_with("qq:1", parse).is_err());
        assert!(resolve_with("bogus", parse).is_err());
    }
}
