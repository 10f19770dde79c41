//! Simulated Wigner process tomography on an ancilla + system register.
//!
//! The unknown propagator is imprinted on the ancilla coherence by `cU`; each
//! droplet sample is then a complex combination of two (ideal) or more (NMR)
//! real expectation values, optionally perturbed by Gaussian noise.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};
use crate::pulse::{sequence_propagator, PulseEvent, PulseSequence, PHASE_X, PHASE_Y};
use crate::recon::SamplingGrid;
use crate::spinop::{
    expectation, gradient_filter, imprint, local_product, pauli, product_operator, rho0, rotation, spin_rotation,
    Axis, Operator, ProductOp, C64, EPS_ALG,
};
use crate::tensors::{cartesian_decomposition, droplet_basis, rotated_axial, CartesianTerm, DropletLabel};

/// How the initial ancilla coherence `2I_0x` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Preparation {
    Exact,
    /// `[π/2]_x(system) - gradient - [π/2]_y(ancilla)` applied to thermal
    /// polarization `2(γ0 I_0z + γ1 Σ I_kz)`.
    Sequence { gamma0: f64, gamma1: f64 },
}

#[derive(Clone, Debug)]
pub enum Target {
    /// System propagator `U`; `cU` is built exactly.
    Unitary(Operator),
    /// Pulse sequence on ancilla + system realizing `cU` up to a global phase.
    Sequence {
        sequence: PulseSequence,
        n_system: usize,
        preparation: Preparation,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Nmr,
}

/// How the NMR pipeline undoes the sampling rotation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseRotation {
    /// Conjugation by `1 ⊗ R_{αβ}†`.
    #[default]
    Exact,
    /// The pulse `[β]_{α-π/2}` on all system spins.
    Pulse,
}

/// Local unitaries `V` that turn transverse Cartesian terms into
/// longitudinal (directly detectable) ones, keyed by the term.
#[derive(Clone, Debug, Default)]
pub struct VTransforms {
    map: BTreeMap<String, Operator>,
}

impl VTransforms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &ProductOp, v: Operator) {
        self.map.insert(term.to_string(), v);
    }

    pub fn get(&self, term: &ProductOp) -> Option<&Operator> {
        self.map.get(&term.to_string())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Single-spin `π/2` rotations for every transverse term of the basis:
    /// `x → z` by `exp(+iπ/2 I_y)`, `y → z` by `exp(-iπ/2 I_x)`.
    pub fn local(n_system: usize) -> Result<Self> {
        let mut out = Self::new();
        for (label, ranks) in droplet_basis(n_system)? {
            for &j in ranks {
                for term in cartesian_decomposition(label, j, n_system)? {
                    if !term.product.is_longitudinal() {
                        out.insert(&term.product, local_v(&term.product, n_system)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn local_v(term: &ProductOp, n_system: usize) -> Result<Operator> {
    let mut v = Operator::identity(n_system);
    for &(k, axis) in &term.factors {
        let single = match axis {
            Axis::X => spin_rotation(-PI / 2.0, [0.0, 1.0, 0.0]),
            Axis::Y => spin_rotation(PI / 2.0, [1.0, 0.0, 0.0]),
            _ => continue,
        };
        v = &local_product(&single, &[k], n_system)? * &v;
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct TomoConfig {
    pub target: Target,
    pub grid: SamplingGrid,
    /// Droplets to scan; empty means all droplets of the system.
    pub labels: Vec<DropletLabel>,
    pub mode: Mode,
    pub noise_sigma: f64,
    pub seed: u64,
    pub v_transforms: VTransforms,
    pub inverse_rotation: InverseRotation,
}

impl TomoConfig {
    pub fn new(target: Target, grid: SamplingGrid, mode: Mode) -> Self {
        Self {
            target,
            grid,
            labels: Vec::new(),
            mode,
            noise_sigma: 0.0,
            seed: 0,
            v_transforms: VTransforms::new(),
            inverse_rotation: InverseRotation::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub beta: f64,
    pub alpha: f64,
    pub value: C64,
}

/// Sampled droplet values `f_j^(ℓ)(β, α)` per `(ℓ, j)`, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub n_spins: usize,
    pub series: BTreeMap<(DropletLabel, u32), Vec<Sample>>,
}

/// Applies a sequence to a density operator; gradients act as
/// coherence-order filters.
pub fn evolve(rho: &Operator, seq: &PulseSequence) -> Result<Operator> {
    let n = rho.n_spins();
    let mut out = rho.clone();
    for event in &seq.events {
        out = match event {
            PulseEvent::Gradient { spins } => gradient_filter(&out, spins)?,
            _ => out.conjugate_by(&event.propagator(n, seq.coupling_hz)?),
        };
    }
    Ok(out)
}

/// Initial density operator `2I_0x` on `n_spins_total` spins.
pub fn prepare_rho0(n_spins_total: usize, via: Preparation) -> Result<Operator> {
    if n_spins_total < 2 {
        return Err(DropsError::Invalid("the register needs an ancilla and at least one system spin".into()));
    }
    let target = rho0(n_spins_total)?;
    let (gamma0, gamma1) = match via {
        Preparation::Exact => return Ok(target),
        Preparation::Sequence { gamma0, gamma1 } => (gamma0, gamma1),
    };
    if !(gamma0 > 0.0 && gamma0.is_finite() && gamma1.is_finite()) {
        return Err(DropsError::Invalid(format!("bad polarizations γ0={gamma0}, γ1={gamma1}")));
    }
    let mut thermal = product_operator(&[(0, Axis::Z)], n_spins_total, 2.0 * gamma0)?;
    for k in 1..n_spins_total {
        thermal = &thermal + &product_operator(&[(k, Axis::Z)], n_spins_total, 2.0 * gamma1)?;
    }
    let system: Vec<usize> = (1..n_spins_total).collect();
    let block = PulseSequence::new(
        vec![
            PulseEvent::pulse(&system, PI / 2.0, PHASE_X),
            PulseEvent::Gradient { spins: system.clone() },
            PulseEvent::pulse(&[0], PI / 2.0, PHASE_Y),
        ],
        0.0,
    )?;
    let rho = evolve(&thermal, &block)?;
    let scale = expectation(&target, &rho)?.re / expectation(&target, &target)?.re;
    Ok(rho.scale(C64::new(1.0 / scale, 0.0)))
}

/// `ρ_U` for a target.
pub fn rho_u(target: &Target) -> Result<Operator> {
    match target {
        Target::Unitary(u) => imprint(u),
        Target::Sequence {
            sequence,
            n_system,
            preparation,
        } => {
            let n = n_system + 1;
            let rho = prepare_rho0(n, *preparation)?;
            let has_gradient = sequence.events.iter().any(|e| matches!(e, PulseEvent::Gradient { .. }));
            if has_gradient {
                evolve(&rho, sequence)
            } else {
                Ok(rho.conjugate_by(&sequence_propagator(sequence, n)?))
            }
        }
    }
}

fn s_j(j: u32) -> f64 {
    ((2 * j + 1) as f64 / (4.0 * PI)).sqrt()
}

fn system_spins(rho_u: &Operator) -> Result<usize> {
    match rho_u.n_spins() {
        0 | 1 => Err(DropsError::Invalid("ρ_U must include the ancilla and at least one system spin".into())),
        n => Ok(n - 1),
    }
}

/// `(⟨I_x ⊗ T⟩, ⟨I_y ⊗ T⟩)` for the rotated axial tensor.
fn ideal_expectations(rho_u: &Operator, label: DropletLabel, j: u32, alpha: f64, beta: f64) -> Result<[f64; 2]> {
    let n = system_spins(rho_u)?;
    let t = rotated_axial(label, j, alpha, beta, n)?;
    let ex = expectation(&pauli(Axis::X).kron(&t), rho_u)?;
    let ey = expectation(&pauli(Axis::Y).kron(&t), rho_u)?;
    debug_assert!(ex.im.abs() < 1e-9 && ey.im.abs() < 1e-9);
    Ok([ex.re, ey.re])
}

/// Ideal measurement: `s_j (⟨I_x ⊗ T_{j,αβ}⟩ + i⟨I_y ⊗ T_{j,αβ}⟩)`.
pub fn measure_point_ideal(rho_u: &Operator, label: DropletLabel, j: u32, alpha: f64, beta: f64) -> Result<C64> {
    let [x, y] = ideal_expectations(rho_u, label, j, alpha, beta)?;
    Ok(C64::new(x, y) * s_j(j))
}

/// Undoes the sampling rotation on the system spins of `rho`.
pub fn inversely_rotate(rho: &Operator, alpha: f64, beta: f64, how: InverseRotation) -> Result<Operator> {
    let n = rho.n_spins();
    let system: Vec<usize> = (1..n).collect();
    let u = match how {
        InverseRotation::Exact => rotation(alpha, beta, &system, n)?.adjoint(),
        InverseRotation::Pulse => inverse_rotation_pulse(alpha, beta, n - 1).propagator(n, 0.0)?,
    };
    Ok(rho.conjugate_by(&u))
}

/// `[β]_{α-π/2}` on system spins `1..=n_system`; equal to `R_{αβ}†` up to a
/// z-rotation, which leaves axial tensors unchanged.
pub fn inverse_rotation_pulse(alpha: f64, beta: f64, n_system: usize) -> PulseEvent {
    let system: Vec<usize> = (1..=n_system).collect();
    PulseEvent::pulse(&system, beta, alpha - PI / 2.0)
}

struct NmrPlan {
    terms: Vec<CartesianTerm>,
    /// Per term: optional `V` on the system and the detected longitudinal operator.
    detect: Vec<(Option<Operator>, Operator)>,
}

fn nmr_plan(label: DropletLabel, j: u32, n_system: usize, vt: &VTransforms) -> Result<NmrPlan> {
    let terms = cartesian_decomposition(label, j, n_system)?;
    let mut detect = Vec::with_capacity(terms.len());
    for term in &terms {
        let c = term.product.to_operator(n_system)?;
        if term.product.is_longitudinal() {
            detect.push((None, c));
            continue;
        }
        let v = vt
            .get(&term.product)
            .ok_or_else(|| DropsError::MissingTransform(term.product.to_string()))?;
        if v.n_spins() != n_system {
            return Err(DropsError::DimensionMismatch {
                left: v.dim(),
                right: c.dim(),
            });
        }
        v.require_unitary(EPS_ALG.sqrt())?;
        let z = c.conjugate_by(v);
        let off_diagonal = (0..z.dim())
            .flat_map(|r| (0..z.dim()).filter(move |&k| k != r).map(move |k| (r, k)))
            .map(|(r, k)| z.get(r, k).norm())
            .fold(0.0, f64::max);
        if off_diagonal > 1e-9 {
            return Err(DropsError::Invalid(format!(
                "transform for {} does not yield a longitudinal operator",
                term.product
            )));
        }
        detect.push((Some(v.clone()), z));
    }
    Ok(NmrPlan { terms, detect })
}

/// Real expectation values `⟨I_a ⊗ Z_n⟩`, indexed `2n + a`.
fn nmr_expectations(rho_tilde: &Operator, plan: &NmrPlan) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * plan.terms.len());
    for (v, z) in &plan.detect {
        let rho = match v {
            Some(v) => rho_tilde.conjugate_by(&Operator::identity(1).kron(v)),
            None => rho_tilde.clone(),
        };
        for axis in [Axis::X, Axis::Y] {
            let e = expectation(&pauli(axis).kron(z), &rho)?;
            debug_assert!(e.im.abs() < 1e-9);
            out.push(e.re);
        }
    }
    Ok(out)
}

fn combine_nmr(j: u32, plan: &NmrPlan, values: &[f64]) -> C64 {
    let mut f = C64::new(0.0, 0.0);
    for (n, term) in plan.terms.iter().enumerate() {
        f += C64::new(values[2 * n], values[2 * n + 1]) * term.r;
    }
    f * s_j(j)
}

/// NMR-style measurement: inverse rotation, optional `V` per Cartesian term,
/// and detection of `I_0x`/`I_0y` correlated with longitudinal system terms.
pub fn measure_point_nmr(
    rho_u: &Operator,
    label: DropletLabel,
    j: u32,
    alpha: f64,
    beta: f64,
    vt: &VTransforms,
) -> Result<C64> {
    let n = system_spins(rho_u)?;
    let plan = nmr_plan(label, j, n, vt)?;
    let rho_tilde = inversely_rotate(rho_u, alpha, beta, InverseRotation::Exact)?;
    Ok(combine_nmr(j, &plan, &nmr_expectations(&rho_tilde, &plan)?))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one noise draw, independent of evaluation order.
fn noise_key(seed: u64, label: DropletLabel, j: u32, node: usize, observable: usize) -> u64 {
    [label.code(), u64::from(j), node as u64, observable as u64]
        .iter()
        .fold(splitmix(seed), |h, &v| splitmix(h ^ v))
}

/// Scans the configured droplets over the grid.
pub fn run_tomography(config: &TomoConfig) -> Result<SampleSet> {
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(DropsError::Invalid(format!("noise sigma must be ≥ 0, got {}", config.noise_sigma)));
    }
    let rho = rho_u(&config.target)?;
    let n = system_spins(&rho)?;
    let basis = droplet_basis(n)?;
    let labels: Vec<DropletLabel> = if config.labels.is_empty() {
        basis.iter().map(|(l, _)| *l).collect()
    } else {
        for l in &config.labels {
            if !basis.iter().any(|(b, _)| b == l) {
                return Err(DropsError::InvalidTensor(format!("label {l} is not available for {n} system spin(s)")));
            }
        }
        config.labels.clone()
    };
    let normal = Normal::new(0.0, config.noise_sigma).map_err(|e| DropsError::Invalid(e.to_string()))?;
    let noisy = config.noise_sigma > 0.0;
    let perturb = |values: &mut [f64], label, j, node| {
        if noisy {
            for (k, v) in values.iter_mut().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(noise_key(config.seed, label, j, node, k));
                *v += normal.sample(&mut rng);
            }
        }
    };

    let mut series = BTreeMap::new();
    for label in labels {
        for &j in label.ranks() {
            let plan = match config.mode {
                Mode::Nmr => Some(nmr_plan(label, j, n, &config.v_transforms)?),
                Mode::Ideal => None,
            };
            let mut samples = Vec::with_capacity(config.grid.len());
            for (node, &(beta, alpha)) in config.grid.nodes.iter().enumerate() {
                let value = match &plan {
                    None => {
                        let mut e = ideal_expectations(&rho, label, j, alpha, beta)?;
                        perturb(&mut e, label, j, node);
                        C64::new(e[0], e[1]) * s_j(j)
                    }
                    Some(plan) => {
                        let rho_tilde = inversely_rotate(&rho, alpha, beta, config.inverse_rotation)?;
                        let mut e = nmr_expectations(&rho_tilde, plan)?;
                        perturb(&mut e, label, j, node);
                        combine_nmr(j, plan, &e)
                    }
                };
                samples.push(Sample { beta, alpha, value });
            }
            series.insert((label, j), samples);
        }
    }
    Ok(SampleSet { n_spins: n, series })
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    beta: f64,
    alpha: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    label: DropletLabel,
    j: u32,
    samples: Vec<SampleRepr>,
}

#[derive(Serialize, Deserialize)]
struct SampleSetRepr {
    n_spins: usize,
    series: Vec<SeriesRepr>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.series.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest `|a - b|` over matching samples; `None` if the layouts differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.n_spins != other.n_spins || self.series.keys().ne(other.series.keys()) {
            return None;
        }
        let mut worst = 0.0f64;
        for (key, a) in &self.series {
            let b = &other.series[key];
            if a.len() != b.len() {
                return None;
            }
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x.value - y.value).norm());
            }
        }
        Some(worst)
    }

    /// CSV with columns `label, j, beta, alpha, re, im` at full double precision.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "j", "beta", "alpha", "re", "im"])?;
        for ((label, j), samples) in &self.series {
            for s in samples {
                w.write_record([
                    label.to_string(),
                    j.to_string(),
                    format!("{:.16e}", s.beta),
                    format!("{:.16e}", s.alpha),
                    format!("{:.16e}", s.value.re),
                    format!("{:.16e}", s.value.im),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| DropsError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }

    /// Reads the CSV layout written by [`SampleSet::to_csv`]; the number of
    /// system spins is the largest spin referenced by any label.
    pub fn from_csv(text: &str) -> Result<Self> {
        // floats are read as text and parsed by std, which rounds correctly
        #[derive(Deserialize)]
        struct Row {
            label: String,
            j: u32,
            beta: String,
            alpha: String,
            re: String,
            im: String,
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| DropsError::Invalid(format!("bad number '{s}': {e}")))
        };
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut series: BTreeMap<(DropletLabel, u32), Vec<Sample>> = BTreeMap::new();
        for row in reader.deserialize::<Row>() {
            let row = row?;
            let label: DropletLabel = row.label.parse()?;
            if !label.has_rank(row.j) {
                return Err(DropsError::InvalidTensor(format!("rank {} in droplet {label}", row.j)));
            }
            series.entry((label, row.j)).or_default().push(Sample {
                beta: num(&row.beta)?,
                alpha: num(&row.alpha)?,
                value: C64::new(num(&row.re)?, num(&row.im)?),
            });
        }
        let n_spins = series
            .keys()
            .map(|(l, _)| match *l {
                DropletLabel::Empty => 1,
                DropletLabel::Linear(k) => usize::from(k),
                DropletLabel::Bilinear(_, l) => usize::from(l),
            })
            .max()
            .unwrap_or(1);
        droplet_basis(n_spins)?;
        Ok(Self { n_spins, series })
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = SampleSetRepr {
            n_spins: self.n_spins,
            series: self
                .series
                .iter()
                .map(|(&(label, j), samples)| SeriesRepr {
                    label,
                    j,
                    samples: samples
                        .iter()
                        .map(|s| SampleRepr {
                            beta: s.beta,
                            alpha: s.alpha,
                            re: s.value.re,
                            im: s.value.im,
                        })
                        .collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: SampleSetRepr = serde_json::from_str(text)?;
        droplet_basis(repr.n_spins)?;
        let mut series = BTreeMap::new();
        for s in repr.series {
            if !s.label.has_rank(s.j) {
                return Err(DropsError::InvalidTensor(format!("rank {} in droplet {}", s.j, s.label)));
            }
            let samples = s
                .samples
                .into_iter()
                .map(|x| Sample {
                    beta: x.beta,
                    alpha: x.alpha,
                    value: C64::new(x.re, x.im),
                })
                .collect();
            series.insert((s.label, s.j), samples);
        }
        Ok(Self {
            n_spins: repr.n_spins,
            series,
        })
    }
}
