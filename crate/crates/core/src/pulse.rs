//! Pulse sequences and their propagators.
//!
//! Conventions: a pulse `[β]_φ` on spin set `S` is
//! `exp(-iβ Σ_{k∈S}(cos φ I_kx + sin φ I_ky))`; a delay `τ` under the weak
//! coupling between spins 0 and 1 is `exp(-i 2πJτ I_0z I_1z)` (doubly rotating
//! frame, no chemical shifts). Events are listed in temporal order.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};
use crate::spinop::{local_product, spin_rotation, zeeman, Operator, C64};

/// Phase shorthands `x`, `y`, `-x`, `-y`.
pub const PHASE_X: f64 = 0.0;
pub const PHASE_Y: f64 = PI / 2.0;
pub const PHASE_MINUS_X: f64 = PI;
pub const PHASE_MINUS_Y: f64 = 3.0 * PI / 2.0;

/// Coupling constant of the chloroform H–C pair used in the experiments, in Hz.
pub const J_HC: f64 = 214.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PulseEvent {
    Pulse { spins: Vec<usize>, flip: f64, phase: f64 },
    Delay { duration: f64 },
    Gradient { spins: Vec<usize> },
}

impl PulseEvent {
    pub fn pulse(spins: &[usize], flip: f64, phase: f64) -> Self {
        PulseEvent::Pulse {
            spins: spins.to_vec(),
            flip,
            phase,
        }
    }

    pub fn delay(duration: f64) -> Self {
        PulseEvent::Delay { duration }
    }

    fn validate(&self, n_spins: usize) -> Result<()> {
        let check_spins = |spins: &[usize]| -> Result<()> {
            match spins.iter().find(|&&k| k >= n_spins) {
                Some(&index) => Err(DropsError::SpinIndexOutOfRange { index, n_spins }),
                None => Ok(()),
            }
        };
        match self {
            PulseEvent::Pulse { spins, flip, phase } => {
                if !flip.is_finite() || !phase.is_finite() {
                    return Err(DropsError::InvalidEvent("flip and phase must be finite".into()));
                }
                check_spins(spins)
            }
            PulseEvent::Delay { duration } => {
                if !(duration.is_finite() && *duration >= 0.0) {
                    return Err(DropsError::InvalidEvent(format!("bad delay duration {duration}")));
                }
                Ok(())
            }
            PulseEvent::Gradient { spins } => check_spins(spins),
        }
    }

    /// Propagator of this event over `n_spins` spins with coupling `j_hz`.
    pub fn propagator(&self, n_spins: usize, j_hz: f64) -> Result<Operator> {
        self.validate(n_spins)?;
        match self {
            PulseEvent::Pulse { spins, flip, phase } => {
                if spins.is_empty() {
                    return Ok(Operator::identity(n_spins));
                }
                let single = spin_rotation(*flip, [phase.cos(), phase.sin(), 0.0]);
                local_product(&single, spins, n_spins)
            }
            PulseEvent::Delay { duration } => coupling_evolution(2.0 * PI * j_hz * duration, n_spins),
            PulseEvent::Gradient { .. } => Err(DropsError::GradientNotUnitary),
        }
    }
}

/// `exp(-i θ I_0z I_1z)`, diagonal in the Zeeman basis.
fn coupling_evolution(theta: f64, n_spins: usize) -> Result<Operator> {
    if n_spins < 2 {
        return Err(DropsError::InvalidEvent("coupling delay needs at least two spins".into()));
    }
    let d = 1usize << n_spins;
    let diag: Vec<C64> = (0..d)
        .map(|i| C64::from_polar(1.0, -theta * zeeman(i, 0, n_spins) * zeeman(i, 1, n_spins)))
        .collect();
    Operator::new(n_spins, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Ordered events plus the coupling constant `J_01` in Hz.
///
/// An empty event list is the identity (the `Id` row of the gate table).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub coupling_hz: f64,
    pub events: Vec<PulseEvent>,
}

impl PulseSequence {
    pub fn new(events: Vec<PulseEvent>, coupling_hz: f64) -> Result<Self> {
        let has_delay = events.iter().any(|e| matches!(e, PulseEvent::Delay { .. }));
        if has_delay && !(coupling_hz.is_finite() && coupling_hz > 0.0) {
            return Err(DropsError::InvalidEvent(format!(
                "coupling constant must be positive when delays are present, got {coupling_hz}"
            )));
        }
        Ok(Self { coupling_hz, events })
    }

    /// Concatenates sequences in time order (`self` first).
    pub fn then(mut self, other: &PulseSequence) -> Self {
        self.events.extend(other.events.iter().cloned());
        self
    }

    pub fn max_spin(&self) -> Option<usize> {
        self.events
            .iter()
            .flat_map(|e| match e {
                PulseEvent::Pulse { spins, .. } | PulseEvent::Gradient { spins } => spins.clone(),
                PulseEvent::Delay { .. } => vec![0, 1],
            })
            .max()
    }

    /// Parses either `{"coupling_hz": J, "events": [...]}` or a bare event list,
    /// in which case `default_coupling_hz` is used.
    pub fn from_json(text: &str, default_coupling_hz: f64) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let seq = if value.is_array() {
            let events: Vec<PulseEvent> = serde_json::from_value(value)?;
            PulseSequence {
                coupling_hz: default_coupling_hz,
                events,
            }
        } else {
            serde_json::from_value(value)?
        };
        Self::new(seq.events, seq.coupling_hz)
    }
}

/// Product of event propagators in temporal order (last event leftmost).
pub fn sequence_propagator(seq: &PulseSequence, n_spins: usize) -> Result<Operator> {
    let mut u = Operator::identity(n_spins);
    for event in &seq.events {
        u = &event.propagator(n_spins, seq.coupling_hz)? * &u;
    }
    Ok(u)
}
