//! Irreducible spherical tensor operators and the droplet (LISA) basis for one
//! or two system spins.
//!
//! All tensors are trace-orthonormal: `tr(T_a† T_b) = δ_ab` in the `2^N`
//! dimensional system space.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};
use crate::spinop::{pauli, rotation, Axis, Operator, ProductOp, C64, ONE};

/// Identifies one droplet by linearity and the involved (1-based) system spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropletLabel {
    Empty,
    Linear(u8),
    Bilinear(u8, u8),
}

impl DropletLabel {
    /// Ranks `J(ℓ)` occurring in the droplet.
    pub fn ranks(self) -> &'static [u32] {
        match self {
            DropletLabel::Empty => &[0],
            DropletLabel::Linear(_) => &[1],
            DropletLabel::Bilinear(..) => &[0, 1, 2],
        }
    }

    pub fn has_rank(self, j: u32) -> bool {
        self.ranks().contains(&j)
    }

    fn validate(self, n_spins: usize) -> Result<()> {
        let ok = match self {
            DropletLabel::Empty => true,
            DropletLabel::Linear(k) => k >= 1 && usize::from(k) <= n_spins,
            DropletLabel::Bilinear(k, l) => k >= 1 && k < l && usize::from(l) <= n_spins,
        };
        if !ok || n_spins == 0 || n_spins > 2 {
            return Err(DropsError::InvalidTensor(format!(
                "label {self} is not available for {n_spins} system spin(s)"
            )));
        }
        Ok(())
    }

    /// Stable small integer used to key noise draws.
    pub(crate) fn code(self) -> u64 {
        match self {
            DropletLabel::Empty => 0,
            DropletLabel::Linear(k) => u64::from(k),
            DropletLabel::Bilinear(k, l) => 16 * u64::from(k) + u64::from(l),
        }
    }
}

impl fmt::Display for DropletLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropletLabel::Empty => write!(f, "empty"),
            DropletLabel::Linear(k) => write!(f, "{k}"),
            DropletLabel::Bilinear(k, l) => write!(f, "{k}{l}"),
        }
    }
}

impl FromStr for DropletLabel {
    type Err = DropsError;

    /// Accepts `empty`, `{}`, `∅`, `1`, `{1}`, `12`, `{12}`, `1,2`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
        let bad = || DropsError::Invalid(format!("bad droplet label '{s}'"));
        match t {
            "" | "empty" | "∅" | "0" => Ok(DropletLabel::Empty),
            _ => {
                let digits: Vec<u8> = t
                    .chars()
                    .filter(|c| *c != ',' && !c.is_whitespace())
                    .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                    .collect::<Result<_>>()?;
                match digits.as_slice() {
                    [k] if *k >= 1 => Ok(DropletLabel::Linear(*k)),
                    [k, l] if *k >= 1 && k < l => Ok(DropletLabel::Bilinear(*k, *l)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl Serialize for DropletLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DropletLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(ℓ, j, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TensorIndex {
    pub label: DropletLabel,
    pub j: u32,
    pub m: i32,
}

impl TensorIndex {
    pub fn new(label: DropletLabel, j: u32, m: i32) -> Result<Self> {
        if !label.has_rank(j) || m.unsigned_abs() > j {
            return Err(DropsError::InvalidTensor(format!("(ℓ={label}, j={j}, m={m})")));
        }
        Ok(Self { label, j, m })
    }
}

/// One term `r · C` of a Cartesian product-operator expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianTerm {
    pub r: f64,
    /// Factor indices are 0-based positions in the system space.
    pub product: ProductOp,
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Clebsch–Gordan coefficient `⟨j1 m1 j2 m2 | j m⟩` for integer angular
/// momenta (Racah formula, Condon–Shortley phases).
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j || j < (j1 - j2).abs() || j > j1 + j2 {
        return 0.0;
    }
    let pre = ((2 * j + 1) as f64 * factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(-j1 + j2 + j)
        / factorial(j1 + j2 + j + 1))
    .sqrt();
    let pre = pre
        * (factorial(j1 + m1)
            * factorial(j1 - m1)
            * factorial(j2 + m2)
            * factorial(j2 - m2)
            * factorial(j + m)
            * factorial(j - m))
        .sqrt();
    let mut sum = 0.0;
    for k in 0..=(j1 + j2 + j) {
        let denoms = [k, j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k];
        if denoms.iter().any(|&d| d < 0) {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denoms.iter().map(|&d| factorial(d)).product::<f64>();
    }
    pre * sum
}

/// Normalized single-spin tensors: `T00 = 1/√2`, `T1,-1 = I^-`, `T10 = √2 I_z`, `T11 = -I^+`.
pub fn single_spin_tensor(j: u32, m: i32) -> Result<Operator> {
    let s2 = std::f64::consts::SQRT_2;
    match (j, m) {
        (0, 0) => Ok(Operator::identity(1).scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))),
        (1, -1) => Ok(pauli(Axis::Minus)),
        (1, 0) => Ok(pauli(Axis::Z).scale(C64::new(s2, 0.0))),
        (1, 1) => Ok(pauli(Axis::Plus).scale(-ONE)),
        _ => Err(DropsError::InvalidTensor(format!("single-spin (j={j}, m={m})"))),
    }
}

fn build_tensor(idx: TensorIndex, n_spins: usize) -> Result<Operator> {
    idx.label.validate(n_spins)?;
    TensorIndex::new(idx.label, idx.j, idx.m)?;
    let embed_scale = C64::new(2f64.powf(-((n_spins - 1) as f64) / 2.0), 0.0);
    match idx.label {
        DropletLabel::Empty => Ok(Operator::identity(n_spins).scale(C64::new(2f64.powf(-(n_spins as f64) / 2.0), 0.0))),
        DropletLabel::Linear(k) => {
            let single = single_spin_tensor(1, idx.m)?;
            Ok(crate::spinop::embed(&single, usize::from(k) - 1, n_spins)?.scale(embed_scale))
        }
        DropletLabel::Bilinear(k, l) => {
            // Both spins are present, so no identity factor needs normalizing.
            // Plain CG coupling makes the rank-1 part anti-Hermitian; the factor i
            // restores T_jm† = (-1)^m T_j,-m and Hermitian axial tensors.
            debug_assert!(k == 1 && l == 2 && n_spins == 2);
            let phase = if idx.j == 1 { C64::new(0.0, 1.0) } else { ONE };
            let (j, m) = (i64::from(idx.j), i64::from(idx.m));
            let mut out = Operator::zeros(n_spins);
            for m1 in -1..=1i64 {
                let m2 = m - m1;
                if m2.abs() > 1 {
                    continue;
                }
                let cg = clebsch_gordan(1, m1, 1, m2, j, m);
                if cg == 0.0 {
                    continue;
                }
                let term = single_spin_tensor(1, m1 as i32)?.kron(&single_spin_tensor(1, m2 as i32)?);
                out = &out + &term.scale(phase * cg);
            }
            Ok(out)
        }
    }
}

fn cached_basis(n_spins: usize) -> Option<&'static BTreeMap<TensorIndex, Operator>> {
    static ONE_SPIN: OnceLock<BTreeMap<TensorIndex, Operator>> = OnceLock::new();
    static TWO_SPINS: OnceLock<BTreeMap<TensorIndex, Operator>> = OnceLock::new();
    let cell = match n_spins {
        1 => &ONE_SPIN,
        2 => &TWO_SPINS,
        _ => return None,
    };
    Some(cell.get_or_init(|| {
        all_indices(n_spins)
            .expect("supported spin count")
            .into_iter()
            .map(|idx| (idx, build_tensor(idx, n_spins).expect("valid index")))
            .collect()
    }))
}

/// `T_jm^(ℓ)` embedded in the `n_spins` system space.
pub fn tensor_op(idx: TensorIndex, n_spins: usize) -> Result<Operator> {
    if !(1..=2).contains(&n_spins) {
        return Err(DropsError::UnsupportedSpins(n_spins));
    }
    idx.label.validate(n_spins)?;
    TensorIndex::new(idx.label, idx.j, idx.m)?;
    Ok(cached_basis(n_spins).expect("supported")[&idx].clone())
}

/// Droplet labels with their rank sets, in display order.
pub fn droplet_basis(n_spins: usize) -> Result<Vec<(DropletLabel, &'static [u32])>> {
    let labels = match n_spins {
        1 => vec![DropletLabel::Empty, DropletLabel::Linear(1)],
        2 => vec![
            DropletLabel::Empty,
            DropletLabel::Linear(1),
            DropletLabel::Linear(2),
            DropletLabel::Bilinear(1, 2),
        ],
        n => return Err(DropsError::UnsupportedSpins(n)),
    };
    Ok(labels.into_iter().map(|l| (l, l.ranks())).collect())
}

/// Every `(ℓ, j, m)` of the basis.
pub fn all_indices(n_spins: usize) -> Result<Vec<TensorIndex>> {
    let mut out = Vec::new();
    for (label, ranks) in droplet_basis(n_spins)? {
        for &j in ranks {
            for m in -(j as i32)..=(j as i32) {
                out.push(TensorIndex { label, j, m });
            }
        }
    }
    Ok(out)
}

/// `R_{αβ} T_j0^(ℓ) R_{αβ}†` with the rotation acting on all system spins.
pub fn rotated_axial(label: DropletLabel, j: u32, alpha: f64, beta: f64, n_spins: usize) -> Result<Operator> {
    let t = tensor_op(TensorIndex::new(label, j, 0)?, n_spins)?;
    let spins: Vec<usize> = (0..n_spins).collect();
    let r = rotation(alpha, beta, &spins, n_spins)?;
    Ok(t.conjugate_by(&r))
}

/// Expands the axial tensor `T_j0^(ℓ)` into Cartesian product operators
/// `2^(q-1) Π I_{k a}` with real coefficients.
pub fn cartesian_decomposition(label: DropletLabel, j: u32, n_spins: usize) -> Result<Vec<CartesianTerm>> {
    let t = tensor_op(TensorIndex::new(label, j, 0)?, n_spins)?;
    let axes = [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)];
    let mut terms = Vec::new();
    for code in 0..4usize.pow(n_spins as u32) {
        let factors: Vec<(usize, Axis)> = (0..n_spins)
            .filter_map(|k| axes[(code / 4usize.pow(k as u32)) % 4].map(|a| (k, a)))
            .collect();
        let product = ProductOp::conventional(factors);
        let c = product.to_operator(n_spins)?;
        let overlap = crate::spinop::expectation(&c, &t)?;
        let norm = crate::spinop::expectation(&c, &c)?.re;
        let r = overlap / norm;
        debug_assert!(r.im.abs() < 1e-12, "axial tensors are Hermitian");
        if r.norm() > 1e-12 {
            terms.push(CartesianTerm { r: r.re, product });
        }
    }
    Ok(terms)
}

/// Reassembles `Σ r_n C_n`.
pub fn reassemble(terms: &[CartesianTerm], n_spins: usize) -> Result<Operator> {
    let mut out = Operator::zeros(n_spins);
    for term in terms {
        out = &out + &term.product.to_operator(n_spins)?.scale(C64::new(term.r, 0.0));
    }
    Ok(out)
}
