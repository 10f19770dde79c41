//! Spinor sweeps, perturbed rotations, and recovery of rotation parameters
//! from single-qubit droplet coefficients.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::drops::{check_unit_axis, decompose, evaluate, synthesize, DropletCoefficients};
use crate::error::{DropsError, Result};
use crate::gates::{phase_gate, rx};
use crate::spinop::{pauli, spin_rotation, Axis, C64, I};
use crate::tensors::{droplet_basis, DropletLabel};

const L0: DropletLabel = DropletLabel::Empty;
const L1: DropletLabel = DropletLabel::Linear(1);

/// Below this `|sin(Ψ/2)|` the rotation axis is not determined.
pub const AXIS_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// `exp(-iδ I_x)`.
    Rotation,
    /// `diag(1, e^{iγ})`.
    PhaseShift,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub angle: f64,
    /// `f^∅`, constant over the sphere.
    pub f0: C64,
    /// Direction where `|f^{1}|` is largest, and the value there.
    pub f1_peak: ([f64; 3], C64),
    /// `±1`: whether the droplets equal or negate those at `angle mod 2π`.
    pub droplet_sign: i8,
    pub coefficients: DropletCoefficients,
}

fn sweep_coefficients(kind: SweepKind, angle: f64) -> Result<DropletCoefficients> {
    let u = match kind {
        SweepKind::Rotation => rx(angle),
        SweepKind::PhaseShift => phase_gate(angle),
    };
    decompose(&u)
}

/// Cartesian vector `v` with `f^{1}(n) = √(3/4π) v·n`.
pub fn rank_one_vector(coeffs: &DropletCoefficients) -> [C64; 3] {
    let cm = coeffs.coefficient(L1, 1, -1);
    let c0 = coeffs.coefficient(L1, 1, 0);
    let cp = coeffs.coefficient(L1, 1, 1);
    [(cm - cp) * FRAC_1_SQRT_2, -I * (cp + cm) * FRAC_1_SQRT_2, c0]
}

/// Maximizer of `|f^{1}|` over the sphere (sign fixed so the largest
/// component is positive) and the droplet value there.
pub fn f1_peak(coeffs: &DropletCoefficients) -> ([f64; 3], C64) {
    let v = rank_one_vector(coeffs);
    let m = Matrix3::from_fn(|r, c| (v[r].conj() * v[c]).re);
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.imax();
    let mut dir = [0.0; 3];
    for (k, d) in dir.iter_mut().enumerate() {
        *d = eig.eigenvectors[(k, top)];
    }
    let lead = (0..3).max_by(|&a, &b| dir[a].abs().total_cmp(&dir[b].abs())).unwrap_or(0);
    if dir[lead] < 0.0 {
        dir.iter_mut().for_each(|d| *d = -*d);
    }
    let value = v.iter().zip(dir).map(|(a, b)| a * b).sum::<C64>() * (3.0 / (4.0 * PI)).sqrt();
    (dir, value)
}

fn inner(a: &DropletCoefficients, b: &DropletCoefficients) -> C64 {
    a.iter().map(|(k, v)| v.conj() * b.get(*k)).sum()
}

/// Decomposes the swept single-qubit gate at each angle.
pub fn spinor_sweep(kind: SweepKind, angles: &[f64]) -> Result<Vec<SweepRecord>> {
    angles
        .iter()
        .map(|&angle| {
            let coefficients = sweep_coefficients(kind, angle)?;
            let reference = sweep_coefficients(kind, angle.rem_euclid(2.0 * PI))?;
            let droplet_sign = if inner(&reference, &coefficients).re < 0.0 { -1 } else { 1 };
            Ok(SweepRecord {
                angle,
                f0: evaluate(&coefficients, L0, 0.0, 0.0, None)?,
                f1_peak: f1_peak(&coefficients),
                droplet_sign,
                coefficients,
            })
        })
        .collect()
}

/// CSV with columns `angle, f0_re, f0_im, sign`.
pub fn sweep_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["angle", "f0_re", "f0_im", "sign"])?;
    for r in records {
        w.write_record([
            format!("{:.16e}", r.angle),
            format!("{:.16e}", r.f0.re),
            format!("{:.16e}", r.f0.im),
            r.droplet_sign.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| DropsError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Rotates `axis` about z by `tilt`.
pub fn tilt_axis(axis: [f64; 3], tilt: f64) -> [f64; 3] {
    let (s, c) = tilt.sin_cos();
    [c * axis[0] - s * axis[1], s * axis[0] + c * axis[1], axis[2]]
}

/// Droplets of a rotation with a scaled flip angle and an axis tilted about z.
pub fn perturbed_rotation(psi: f64, axis: [f64; 3], flip_error: f64, axis_tilt: f64) -> Result<DropletCoefficients> {
    check_unit_axis(axis)?;
    if !flip_error.is_finite() || !axis_tilt.is_finite() || !psi.is_finite() {
        return Err(DropsError::Invalid("rotation parameters must be finite".into()));
    }
    decompose(&spin_rotation(psi * flip_error, tilt_axis(axis, axis_tilt)))
}

/// `U = e^{-iη} exp(-iΨ n·I)` with `Ψ ∈ [0, 2π]` and `η ∈ [-π/2, π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub psi: f64,
    /// `None` when `|sin(Ψ/2)|` is below [`AXIS_THRESHOLD`].
    pub axis: Option<[f64; 3]>,
    pub global_phase: f64,
}

/// Inverts the single-qubit droplet formulas.
pub fn estimate_rotation_params(coeffs: &DropletCoefficients) -> Result<RotationEstimate> {
    if coeffs.n_spins() != 1 {
        return Err(DropsError::UnsupportedSpins(coeffs.n_spins()));
    }
    let u = synthesize(coeffs)?;
    let dev = u.unitarity_deviation();
    if dev > 1e-9 {
        return Err(DropsError::NotUnitary(dev));
    }
    let half = |op: &crate::spinop::Operator| (op * &u).trace() * 0.5;
    let sigma = |a| pauli(a).scale(C64::new(2.0, 0.0));
    let p = [
        u.trace() * 0.5,
        I * half(&sigma(Axis::X)),
        I * half(&sigma(Axis::Y)),
        I * half(&sigma(Axis::Z)),
    ];
    let sum_sq: C64 = p.iter().map(|x| x * x).sum();
    let mut eta = -sum_sq.arg() / 2.0;
    // the phase is defined modulo π; bring it into [-π/2, π/2)
    if eta >= PI / 2.0 - 1e-12 {
        eta -= PI;
    } else if eta < -PI / 2.0 - 1e-12 {
        eta += PI;
    }
    let phase = C64::from_polar(1.0, eta);
    let a: Vec<f64> = p.iter().map(|x| (phase * x).re).collect();
    let s = (a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt();
    let psi = 2.0 * s.atan2(a[0]);
    let axis = (s >= AXIS_THRESHOLD).then(|| [a[1] / s, a[2] / s, a[3] / s]);
    Ok(RotationEstimate {
        psi,
        axis,
        global_phase: eta,
    })
}

/// Sphere `L²` distance between two droplets, i.e. the Euclidean norm of the
/// coefficient differences for that label.
pub fn droplet_distance(a: &DropletCoefficients, b: &DropletCoefficients, label: DropletLabel) -> Result<f64> {
    if a.n_spins() != b.n_spins() {
        return Err(DropsError::DimensionMismatch {
            left: 1 << a.n_spins(),
            right: 1 << b.n_spins(),
        });
    }
    let ranks = droplet_basis(a.n_spins())?
        .into_iter()
        .find(|(l, _)| *l == label)
        .map(|(_, r)| r)
        .ok_or_else(|| DropsError::InvalidTensor(format!("label {label} is not in the basis")))?;
    let mut sq = 0.0;
    for &j in ranks {
        for m in -(j as i32)..=(j as i32) {
            sq += (a.coefficient(label, j, m) - b.coefficient(label, j, m)).norm_sqr();
        }
    }
    Ok(sq.sqrt())
}
