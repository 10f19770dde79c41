//! The bijective map between operators and droplet functions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};
use crate::spinop::{expectation, Operator, C64, I, ZERO};
use crate::tensors::{all_indices, droplet_basis, tensor_op, DropletLabel, TensorIndex};

/// Expansion coefficients `c_jm^(ℓ)` of an operator in the droplet basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DropletCoefficients {
    n_spins: usize,
    entries: BTreeMap<TensorIndex, C64>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    label: DropletLabel,
    j: u32,
    m: i32,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefficientsRepr {
    n_spins: usize,
    entries: Vec<EntryRepr>,
}

impl DropletCoefficients {
    pub fn new(n_spins: usize) -> Result<Self> {
        droplet_basis(n_spins)?;
        Ok(Self {
            n_spins,
            entries: BTreeMap::new(),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Stores `c` at `idx`, validating the index against the basis.
    pub fn insert(&mut self, idx: TensorIndex, c: C64) -> Result<()> {
        TensorIndex::new(idx.label, idx.j, idx.m)?;
        if !droplet_basis(self.n_spins)?.iter().any(|(l, _)| *l == idx.label) {
            return Err(DropsError::InvalidTensor(format!(
                "label {} is not available for {} system spin(s)",
                idx.label, self.n_spins
            )));
        }
        self.entries.insert(idx, c);
        Ok(())
    }

    /// Coefficient at `idx`; absent entries are zero.
    pub fn get(&self, idx: TensorIndex) -> C64 {
        self.entries.get(&idx).copied().unwrap_or(ZERO)
    }

    pub fn coefficient(&self, label: DropletLabel, j: u32, m: i32) -> C64 {
        self.get(TensorIndex { label, j, m })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TensorIndex, &C64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            n_spins: self.n_spins,
            entries: self.entries.iter().map(|(k, v)| (*k, v * factor)).collect(),
        }
    }

    /// The `2j+1` coefficients of one `(ℓ, j)` in order `m = -j..=j`.
    pub fn rank_vector(&self, label: DropletLabel, j: u32) -> Vec<C64> {
        (-(j as i32)..=(j as i32)).map(|m| self.coefficient(label, j, m)).collect()
    }

    /// Largest `|a - b|` over the union of keys.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .map(|k| (self.get(*k) - other.get(*k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Serialize for DropletCoefficients {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoefficientsRepr {
            n_spins: self.n_spins,
            entries: self
                .entries
                .iter()
                .map(|(k, c)| EntryRepr {
                    label: k.label,
                    j: k.j,
                    m: k.m,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DropletCoefficients {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CoefficientsRepr::deserialize(deserializer)?;
        let mut out = DropletCoefficients::new(repr.n_spins).map_err(serde::de::Error::custom)?;
        for e in repr.entries {
            let idx = TensorIndex::new(e.label, e.j, e.m).map_err(serde::de::Error::custom)?;
            out.insert(idx, C64::new(e.re, e.im)).map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

/// `c_jm^(ℓ) = tr(T_jm^(ℓ)† A)` for every basis element.
pub fn decompose(a: &Operator) -> Result<DropletCoefficients> {
    let n = a.n_spins();
    let mut out = DropletCoefficients::new(n)?;
    for idx in all_indices(n)? {
        let t = tensor_op(idx, n)?;
        out.entries.insert(idx, expectation(&t.adjoint(), a)?);
    }
    Ok(out)
}

/// `Σ c_jm^(ℓ) T_jm^(ℓ)`.
pub fn synthesize(coeffs: &DropletCoefficients) -> Result<Operator> {
    let n = coeffs.n_spins;
    let mut out = Operator::zeros(n);
    for (idx, c) in &coeffs.entries {
        out = &out + &tensor_op(*idx, n)?.scale(*c);
    }
    Ok(out)
}

/// Orthonormal spherical harmonic `Y_jm(θ, φ)` (Condon–Shortley phase), `j ≤ 2`.
pub fn spherical_harmonic(j: u32, m: i32, theta: f64, phi: f64) -> Result<C64> {
    let (s, c) = theta.sin_cos();
    let e = |k: i32| C64::from_polar(1.0, f64::from(k) * phi);
    let y = match (j, m) {
        (0, 0) => C64::new((1.0 / (4.0 * PI)).sqrt(), 0.0),
        (1, 0) => C64::new((3.0 / (4.0 * PI)).sqrt() * c, 0.0),
        (1, 1) | (1, -1) => e(m) * (-f64::from(m) * (3.0 / (8.0 * PI)).sqrt() * s),
        (2, 0) => C64::new(0.25 * (5.0 / PI).sqrt() * (3.0 * c * c - 1.0), 0.0),
        (2, 1) | (2, -1) => e(m) * (-f64::from(m) * 0.5 * (15.0 / (2.0 * PI)).sqrt() * s * c),
        (2, 2) | (2, -2) => e(m) * (0.25 * (15.0 / (2.0 * PI)).sqrt() * s * s),
        _ => return Err(DropsError::InvalidTensor(format!("spherical harmonic (j={j}, m={m})"))),
    };
    Ok(y)
}

/// `f^(ℓ)(θ, φ) = Σ_j Σ_m c_jm^(ℓ) Y_jm(θ, φ)` restricted to `ranks` when given.
pub fn evaluate(
    coeffs: &DropletCoefficients,
    label: DropletLabel,
    theta: f64,
    phi: f64,
    ranks: Option<&[u32]>,
) -> Result<C64> {
    let (_, label_ranks) = droplet_basis(coeffs.n_spins)?
        .into_iter()
        .find(|(l, _)| *l == label)
        .ok_or_else(|| DropsError::InvalidTensor(format!("label {label} is not in the basis")))?;
    let mut f = ZERO;
    for &j in label_ranks.iter().filter(|j| ranks.is_none_or(|r| r.contains(j))) {
        for m in -(j as i32)..=(j as i32) {
            let c = coeffs.coefficient(label, j, m);
            if c != ZERO {
                f += c * spherical_harmonic(j, m, theta, phi)?;
            }
        }
    }
    Ok(f)
}

/// Sum of all droplets, the convenient single-function view for one qubit.
pub fn evaluate_combined(coeffs: &DropletCoefficients, theta: f64, phi: f64) -> Result<C64> {
    let mut f = ZERO;
    for (label, _) in droplet_basis(coeffs.n_spins)? {
        f += evaluate(coeffs, label, theta, phi, None)?;
    }
    Ok(f)
}

pub(crate) fn check_unit_axis(axis: [f64; 3]) -> Result<()> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(DropsError::NonUnitAxis(norm));
    }
    Ok(())
}

/// Closed-form droplets `(f^∅, f^{1})` of `exp(-iΨ n·I)`.
pub fn analytic_rotation_droplet(psi: f64, axis: [f64; 3], theta: f64, phi: f64) -> Result<(C64, C64)> {
    check_unit_axis(axis)?;
    let f0 = C64::new((1.0 / (2.0 * PI)).sqrt() * (psi / 2.0).cos(), 0.0);
    let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let proj: f64 = axis.iter().zip(dir).map(|(a, d)| a * d).sum();
    let f1 = -I * ((3.0 / (2.0 * PI)).sqrt() * (psi / 2.0).sin() * proj);
    Ok((f0, f1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{lookup, rx};
    use crate::spinop::{pauli, product_operator, rotation, spin_rotation, Axis, EPS_ALG, ONE};
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    const L0: DropletLabel = DropletLabel::Empty;
    const L1: DropletLabel = DropletLabel::Linear(1);

    fn random_operator(n: usize, vals: &[f64]) -> Operator {
        let d = 1 << n;
        let rows: Vec<Vec<C64>> = (0..d)
            .map(|r| (0..d).map(|c| C64::new(vals[2 * (r * d + c)], vals[2 * (r * d + c) + 1])).collect())
            .collect();
        Operator::from_rows(&rows).unwrap()
    }

    fn hermitian(a: &Operator) -> Operator {
        (a + &a.adjoint()).scale(C64::new(0.5, 0.0))
    }

    fn unit(v: [f64; 3]) -> [f64; 3] {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }

    #[test]
    fn identity_decomposes_to_empty_droplet() {
        let c = decompose(&Operator::identity(1)).unwrap();
        for (idx, v) in c.iter() {
            let want = if idx.label == L0 { C64::new(SQRT_2, 0.0) } else { ZERO };
            assert!((v - want).norm() < EPS_ALG);
        }
    }

    #[test]
    fn not_gate_coefficients() {
        let c = decompose(&lookup("not").unwrap().matrix()).unwrap();
        assert!((c.coefficient(L1, 1, -1) - ONE).norm() < EPS_ALG);
        assert!((c.coefficient(L1, 1, 1) + ONE).norm() < EPS_ALG);
        assert!(c.coefficient(L1, 1, 0).norm() < EPS_ALG);
        assert!(c.coefficient(L0, 0, 0).norm() < EPS_ALG);
    }

    #[test]
    fn mixed_product_operator_touches_every_label() {
        let half = Operator::identity(2).scale(C64::new(0.5, 0.0));
        let terms: [&[(usize, Axis)]; 5] = [
            &[(0, Axis::X)],
            &[(1, Axis::Z)],
            &[(0, Axis::X), (1, Axis::X)],
            &[(0, Axis::X), (1, Axis::Y)],
            &[(0, Axis::X), (1, Axis::Z)],
        ];
        let a = terms
            .iter()
            .fold(half, |acc, t| &acc + &product_operator(t, 2, 1.0).unwrap());
        let c = decompose(&a).unwrap();
        for (label, _) in droplet_basis(2).unwrap() {
            let weight: f64 = c.iter().filter(|(k, _)| k.label == label).map(|(_, v)| v.norm_sqr()).sum();
            assert!(weight > 1e-3, "{label}");
        }
        assert!(synthesize(&c).unwrap().approx_eq(&a, 1e-12));
    }

    #[test]
    fn synthesize_examples() {
        let h = lookup("hadamard").unwrap().matrix();
        assert!(synthesize(&decompose(&h).unwrap()).unwrap().approx_eq(&h, EPS_ALG));
        let empty = DropletCoefficients::new(2).unwrap();
        assert!(synthesize(&empty).unwrap().approx_eq(&Operator::zeros(2), 0.0));
        assert!(decompose(&Operator::identity(3)).is_err());
    }

    #[test]
    fn spherical_harmonic_values() {
        assert!((spherical_harmonic(0, 0, 1.2, 0.3).unwrap().re - 0.28209479177387814).abs() < 1e-15);
        assert!((spherical_harmonic(1, 0, 0.0, 0.0).unwrap().re - 0.4886025119029199).abs() < 1e-15);
        assert!((spherical_harmonic(1, 1, PI / 2.0, 0.0).unwrap().re + 0.34549414947133544).abs() < 1e-15);
        assert!(spherical_harmonic(3, 0, 0.0, 0.0).is_err());
        assert!(spherical_harmonic(1, 2, 0.0, 0.0).is_err());
    }

    #[test]
    fn spherical_harmonic_conjugation_symmetry() {
        for j in 0..=2u32 {
            for m in -(j as i32)..=(j as i32) {
                let a = spherical_harmonic(j, m, 0.7, 2.1).unwrap();
                let b = spherical_harmonic(j, -m, 0.7, 2.1).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a.conj() - b * sign).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let id = decompose(&Operator::identity(1)).unwrap();
        let f = evaluate(&id, L0, 0.3, 1.9, None).unwrap();
        assert!((f.re - (1.0 / (2.0 * PI)).sqrt()).abs() < EPS_ALG && f.im.abs() < EPS_ALG);

        let not = decompose(&lookup("not").unwrap().matrix()).unwrap();
        let f = evaluate(&not, L1, PI / 2.0, 0.0, None).unwrap();
        assert!((f.norm() - (3.0 / (2.0 * PI)).sqrt()).abs() < EPS_ALG);
        assert!((f.re - 0.690988298942671).abs() < 1e-12);
        assert!(evaluate(&not, L0, 1.0, 1.0, None).unwrap().norm() < EPS_ALG);
        assert!(evaluate(&not, DropletLabel::Linear(2), 1.0, 1.0, None).is_err());
        assert_eq!(evaluate(&not, L1, 1.0, 1.0, Some(&[0])).unwrap(), ZERO);
    }

    #[test]
    fn combined_view_is_sum_of_labels() {
        let c = decompose(&rx(1.3)).unwrap();
        let sum = evaluate(&c, L0, 0.4, 0.8, None).unwrap() + evaluate(&c, L1, 0.4, 0.8, None).unwrap();
        assert_eq!(evaluate_combined(&c, 0.4, 0.8).unwrap(), sum);
    }

    #[test]
    fn analytic_examples() {
        let s = (1.0 / (2.0 * PI)).sqrt();
        let (f0, f1) = analytic_rotation_droplet(0.0, [0.0, 0.0, 1.0], 0.5, 0.5).unwrap();
        assert!((f0.re - s).abs() < 1e-15 && f1.norm() < 1e-15);
        let (f0, f1) = analytic_rotation_droplet(2.0 * PI, [0.0, 0.0, 1.0], 0.5, 0.5).unwrap();
        assert!((f0.re + s).abs() < 1e-15 && f1.norm() < 1e-15);
        let (f0, f1) = analytic_rotation_droplet(PI, [1.0, 0.0, 0.0], PI / 2.0, 0.0).unwrap();
        assert!(f0.norm() < 1e-15);
        assert!((f1 - C64::new(0.0, -(3.0 / (2.0 * PI)).sqrt())).norm() < 1e-15);
        assert!(matches!(
            analytic_rotation_droplet(1.0, [1.0, 1.0, 0.0], 0.0, 0.0),
            Err(DropsError::NonUnitAxis(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let c = decompose(&lookup("hadamard").unwrap().matrix()).unwrap();
        let text = c.to_json().unwrap();
        assert!(text.contains("\"label\": \"empty\""));
        assert_eq!(DropletCoefficients::from_json(&text).unwrap(), c);
        let bad = r#"{"n_spins":1,"entries":[{"label":"2","j":1,"m":0,"re":1,"im":0}]}"#;
        assert!(DropletCoefficients::from_json(bad).is_err());
    }

    proptest! {
        #[test]
        fn bijectivity(vals in prop::collection::vec(-1.0f64..1.0, 32), n in 1usize..=2) {
            let a = random_operator(n, &vals);
            let back = synthesize(&decompose(&a).unwrap()).unwrap();
            prop_assert!(back.approx_eq(&a, EPS_ALG));
        }

        #[test]
        fn oracle_equivalence(
            psi in 0.0f64..(4.0 * PI),
            v in prop::array::uniform3(-1.0f64..1.0),
            points in prop::collection::vec((0.0f64..PI, 0.0f64..(2.0 * PI)), 100),
        ) {
            prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-3);
            let axis = unit(v);
            let c = decompose(&spin_rotation(psi, axis)).unwrap();
            for (theta, phi) in points {
                let (f0, f1) = analytic_rotation_droplet(psi, axis, theta, phi).unwrap();
                prop_assert!((evaluate(&c, L0, theta, phi, None).unwrap() - f0).norm() < 1e-10);
                prop_assert!((evaluate(&c, L1, theta, phi, None).unwrap() - f1).norm() < 1e-10);
            }
        }

        #[test]
        fn rotation_equivariance(
            vals in prop::collection::vec(-1.0f64..1.0, 32),
            n in 1usize..=2,
            alpha in 0.0f64..(2.0 * PI),
            beta in 0.0f64..PI,
            theta in 0.0f64..PI,
            phi in 0.0f64..(2.0 * PI),
        ) {
            let a = random_operator(n, &vals);
            let spins: Vec<usize> = (0..n).collect();
            let r = rotation(alpha, beta, &spins, n).unwrap();
            let rotated = decompose(&a.conjugate_by(&r)).unwrap();
            let original = decompose(&a).unwrap();
            // R^{-1} = Ry(-β) Rz(-α) applied to the point direction
            let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            let (x, y) = (alpha.cos() * x + alpha.sin() * y, -alpha.sin() * x + alpha.cos() * y);
            let (x, z) = (beta.cos() * x - beta.sin() * z, beta.sin() * x + beta.cos() * z);
            let (t2, p2) = (z.clamp(-1.0, 1.0).acos(), y.atan2(x));
            for (label, _) in droplet_basis(n).unwrap() {
                let lhs = evaluate(&rotated, label, theta, phi, None).unwrap();
                let rhs = evaluate(&original, label, t2, p2, None).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-10, "{} {} {}", label, lhs, rhs);
            }
        }

        #[test]
        fn hermitian_coefficient_symmetry(vals in prop::collection::vec(-1.0f64..1.0, 32), n in 1usize..=2) {
            let c = decompose(&hermitian(&random_operator(n, &vals))).unwrap();
            for (idx, v) in c.iter() {
                let sign = if idx.m % 2 == 0 { 1.0 } else { -1.0 };
                let partner = c.coefficient(idx.label, idx.j, -idx.m);
                prop_assert!((partner - v.conj() * sign).norm() < EPS_ALG);
            }
        }

        #[test]
        fn global_phase_is_linear(eta in -PI..PI, psi in 0.0f64..(4.0 * PI)) {
            let u = spin_rotation(psi, [0.0, 1.0, 0.0]);
            let phase = C64::from_polar(1.0, eta);
            let lhs = decompose(&u.scale(phase)).unwrap();
            let rhs = decompose(&u).unwrap().scale(phase);
            prop_assert!(lhs.max_abs_diff(&rhs) < EPS_ALG);
        }
    }

    #[test]
    fn pauli_droplets_point_along_axes() {
        // σ_x = i·Rx(π), so its linear droplet peaks on ±x
        let c = decompose(&pauli(Axis::X).scale(C64::new(2.0, 0.0))).unwrap();
        let fx = evaluate(&c, L1, PI / 2.0, 0.0, None).unwrap();
        let fy = evaluate(&c, L1, PI / 2.0, PI / 2.0, None).unwrap();
        assert!((fx.norm() - (3.0 / (2.0 * PI)).sqrt()).abs() < EPS_ALG);
        assert!(fy.norm() < EPS_ALG);
    }
}
