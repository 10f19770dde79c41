//! Dense operator algebra for small systems of spins-1/2.
//!
//! Spin 0 is always the leftmost tensor factor. In the augmented system it is
//! the ancilla; system spin `k` (1-based, as in droplet labels) then sits at
//! factor `k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};

pub type C64 = Complex64;

/// Tolerance for algebraic identities.
pub const EPS_ALG: f64 = 1e-12;
/// Tolerance for composed pulse-sequence propagators.
pub const EPS_SEQ: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A `2^n x 2^n` complex matrix acting on `n` spins-1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    n_spins: usize,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(n_spins: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << n_spins;
        if n_spins == 0 || matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(DropsError::BadShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self { n_spins, matrix })
    }

    /// Infers the spin count from the matrix size.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim < 2 || !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(DropsError::BadShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Self::new(dim.trailing_zeros() as usize, matrix)
    }

    /// Builds an operator from row-major complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(DropsError::Invalid("operator rows must form a square matrix".into()));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn identity(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        Self {
            n_spins,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        Self {
            n_spins,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: &self.matrix * factor,
        }
    }

    /// Kronecker product `self ⊗ other`; `self` becomes the leading factors.
    pub fn kron(&self, other: &Operator) -> Self {
        Self {
            n_spins: self.n_spins + other.n_spins,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `u · self · u†`
    pub fn conjugate_by(&self, u: &Operator) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Operator::identity(self.n_spins))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.n_spins == other.n_spins && self.max_abs_diff(other) <= tol
    }

    pub(crate) fn require_unitary(&self, tol: f64) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > tol {
            return Err(DropsError::NotUnitary(dev));
        }
        Ok(())
    }

    pub(crate) fn require_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(DropsError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            n_spins: self.n_spins,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            n_spins: self.n_spins,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            n_spins: self.n_spins,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale(-ONE)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n_spins: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..d)
                .map(|r| (0..d).map(|c| f(&self.matrix[(r, c)])).collect())
                .collect()
        };
        OperatorJson {
            n_spins: self.n_spins,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = OperatorJson::deserialize(deserializer)?;
        let d = raw.re.len();
        if raw.im.len() != d || raw.re.iter().chain(raw.im.iter()).any(|r| r.len() != d) {
            return Err(D::Error::custom("re and im must be square matrices of equal size"));
        }
        let matrix = DMatrix::from_fn(d, d, |r, c| C64::new(raw.re[r][c], raw.im[r][c]));
        Operator::new(raw.n_spins, matrix).map_err(D::Error::custom)
    }
}

/// Single-spin operator axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Axis {
    pub fn symbol(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::Plus => "+",
            Axis::Minus => "-",
        }
    }
}

/// `I_b = σ_b / 2` for `b ∈ {x, y, z}` and `I± = I_x ± i I_y`.
pub fn pauli(axis: Axis) -> Operator {
    let h = C64::new(0.5, 0.0);
    let m = match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[ZERO, h, h, ZERO]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -I * 0.5, I * 0.5, ZERO]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[h, ZERO, ZERO, -h]),
        Axis::Plus => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]),
        Axis::Minus => DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]),
    };
    Operator { n_spins: 1, matrix: m }
}

fn check_spin(index: usize, n_spins: usize) -> Result<()> {
    if index >= n_spins {
        return Err(DropsError::SpinIndexOutOfRange { index, n_spins });
    }
    Ok(())
}

/// Tensor product with `single` at factor `spin` and identities elsewhere.
pub fn embed(single: &Operator, spin: usize, n_spins: usize) -> Result<Operator> {
    check_spin(spin, n_spins)?;
    if single.n_spins != 1 {
        return Err(DropsError::DimensionMismatch {
            left: single.dim(),
            right: 2,
        });
    }
    Ok(embed_unchecked(&single.matrix, spin, n_spins))
}

fn embed_unchecked(single: &DMatrix<C64>, spin: usize, n_spins: usize) -> Operator {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for k in 0..n_spins {
        out = if k == spin {
            out.kronecker(single)
        } else {
            out.kronecker(&DMatrix::<C64>::identity(2, 2))
        };
    }
    Operator { n_spins, matrix: out }
}

/// A scaled Cartesian product operator such as `2 I_{0x} I_{1z}`.
///
/// Factor indices are 0-based tensor positions of the space the operator is
/// built in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductOp {
    pub factors: Vec<(usize, Axis)>,
    pub scale: f64,
}

impl ProductOp {
    pub fn new(factors: Vec<(usize, Axis)>, scale: f64) -> Self {
        Self { factors, scale }
    }

    /// The conventional prefactor `2^(q-1)` for `q` spin operators (1 for the identity).
    pub fn conventional(factors: Vec<(usize, Axis)>) -> Self {
        let q = factors.len() as i32;
        let scale = if q == 0 { 1.0 } else { 2f64.powi(q - 1) };
        Self { factors, scale }
    }

    pub fn to_operator(&self, n_spins: usize) -> Result<Operator> {
        product_operator(&self.factors, n_spins, self.scale)
    }

    /// True when no factor is transverse, i.e. the term commutes with every `I_kz`.
    pub fn is_longitudinal(&self) -> bool {
        self.factors.iter().all(|(_, a)| *a == Axis::Z)
    }

    /// Shifts every factor index by `offset` (e.g. to make room for an ancilla).
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            factors: self.factors.iter().map(|&(k, a)| (k + offset, a)).collect(),
            scale: self.scale,
        }
    }
}

impl fmt::Display for ProductOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{}·1", self.scale);
        }
        if self.scale != 1.0 {
            write!(f, "{}", self.scale)?;
        }
        for (k, a) in &self.factors {
            write!(f, "I{}{}", k, a.symbol())?;
        }
        Ok(())
    }
}

/// `scale · ⊗_k I_{k,a_k}` with identities on unspecified spins.
pub fn product_operator(factors: &[(usize, Axis)], n_spins: usize, scale: f64) -> Result<Operator> {
    let mut singles: Vec<Option<Axis>> = vec![None; n_spins];
    for &(k, a) in factors {
        check_spin(k, n_spins)?;
        if singles[k].is_some() {
            return Err(DropsError::DuplicateSpin(k));
        }
        singles[k] = Some(a);
    }
    let mut out = DMatrix::<C64>::identity(1, 1);
    for s in singles {
        let m = match s {
            Some(a) => pauli(a).matrix,
            None => DMatrix::identity(2, 2),
        };
        out = out.kronecker(&m);
    }
    Ok(Operator {
        n_spins,
        matrix: out * C64::new(scale, 0.0),
    })
}

/// `exp(-i θ n·I)` for one spin: `cos(θ/2)·1 - 2i sin(θ/2)(n·I)`.
pub fn spin_rotation(theta: f64, axis: [f64; 3]) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, -s * nz),
            C64::new(-s * ny, -s * nx),
            C64::new(s * ny, -s * nx),
            C64::new(c, s * nz),
        ],
    );
    Operator { n_spins: 1, matrix: m }
}

/// Product of commuting single-spin unitaries `single` applied to each spin in `spins`.
pub(crate) fn local_product(single: &Operator, spins: &[usize], n_spins: usize) -> Result<Operator> {
    let mut out = Operator::identity(n_spins);
    let mut seen = vec![false; n_spins];
    for &k in spins {
        check_spin(k, n_spins)?;
        if seen[k] {
            return Err(DropsError::DuplicateSpin(k));
        }
        seen[k] = true;
        out = &embed_unchecked(&single.matrix, k, n_spins) * &out;
    }
    Ok(out)
}

/// `R_{αβ} = exp(-iα F_z) exp(-iβ F_y)` with `F` summed over `spins` only.
pub fn rotation(alpha: f64, beta: f64, spins: &[usize], n_spins: usize) -> Result<Operator> {
    if spins.is_empty() {
        return Err(DropsError::EmptySpinSet);
    }
    let single = &spin_rotation(alpha, [0.0, 0.0, 1.0]) * &spin_rotation(beta, [0.0, 1.0, 0.0]);
    local_product(&single, spins, n_spins)
}

/// `block-diag(1, U)`: identity when the ancilla (spin 0) is up, `U` when it is down.
pub fn controlled(u: &Operator) -> Result<Operator> {
    u.require_unitary(EPS_ALG)?;
    let d = u.dim();
    let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        m[(i, i)] = ONE;
    }
    m.view_mut((d, d), (d, d)).copy_from(&u.matrix);
    Ok(Operator {
        n_spins: u.n_spins + 1,
        matrix: m,
    })
}

/// Initial augmented-system deviation density operator `2 I_{0x}`.
pub fn rho0(n_spins_total: usize) -> Result<Operator> {
    product_operator(&[(0, Axis::X)], n_spins_total, 2.0)
}

/// Imprints `U` on the off-diagonal blocks: `ρ_U = cU (2 I_{0x}) cU† = I^- ⊗ U + I^+ ⊗ U†`.
pub fn imprint(u: &Operator) -> Result<Operator> {
    let cu = controlled(u)?;
    let rho = rho0(u.n_spins + 1)?.conjugate_by(&cu);
    let blocks = &pauli(Axis::Minus).kron(u) + &pauli(Axis::Plus).kron(&u.adjoint());
    assert!(
        rho.max_abs_diff(&blocks) <= 1e-10,
        "imprinted operator disagrees with its block form"
    );
    Ok(rho)
}

/// Magnetic quantum number `m_k ∈ {+1/2, -1/2}` of spin `k` in basis state `index`.
pub(crate) fn zeeman(index: usize, spin: usize, n_spins: usize) -> f64 {
    if (index >> (n_spins - 1 - spin)) & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Keeps only terms of zero coherence order with respect to `spins`: the
/// average of `exp(-iφF_z) ρ exp(iφF_z)` over uniform `φ`, evaluated exactly.
pub fn gradient_filter(rho: &Operator, spins: &[usize]) -> Result<Operator> {
    let n = rho.n_spins;
    for &k in spins {
        check_spin(k, n)?;
    }
    let total_m = |idx: usize| -> f64 { spins.iter().map(|&k| zeeman(idx, k, n)).sum() };
    let d = rho.dim();
    let matrix = DMatrix::from_fn(d, d, |r, c| {
        if (total_m(r) - total_m(c)).abs() < 1e-9 {
            rho.matrix[(r, c)]
        } else {
            ZERO
        }
    });
    Ok(Operator { n_spins: n, matrix })
}

/// `tr(O ρ)`.
pub fn expectation(observable: &Operator, rho: &Operator) -> Result<C64> {
    observable.require_same_dim(rho)?;
    let (a, b) = (&observable.matrix, &rho.matrix);
    let d = a.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// `|tr(A† B)| / 2^n`; equals 1 exactly when `A = e^{iη} B` for unitary `A`, `B`.
pub fn fidelity_up_to_phase(a: &Operator, b: &Operator) -> Result<f64> {
    a.require_same_dim(b)?;
    Ok(expectation(&a.adjoint(), b)?.norm() / a.dim() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn op(rows: &[&[C64]]) -> Operator {
        Operator::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pauli_matrices() {
        assert!(pauli(Axis::Z).approx_eq(&op(&[&[c(0.5, 0.), c(0., 0.)], &[c(0., 0.), c(-0.5, 0.)]]), 0.0));
        assert!(pauli(Axis::Plus).approx_eq(&op(&[&[ZERO, ONE], &[ZERO, ZERO]]), 0.0));
        assert!(pauli(Axis::X).approx_eq(&op(&[&[ZERO, c(0.5, 0.)], &[c(0.5, 0.), ZERO]]), 0.0));
        let plus = &pauli(Axis::X) + &pauli(Axis::Y).scale(I);
        assert!(plus.approx_eq(&pauli(Axis::Plus), EPS_ALG));
    }

    #[test]
    fn rho0_matches_worked_matrix() {
        let rho = product_operator(&[(0, Axis::X)], 2, 2.0).unwrap();
        let expected = op(&[
            &[ZERO, ZERO, ONE, ZERO],
            &[ZERO, ZERO, ZERO, ONE],
            &[ONE, ZERO, ZERO, ZERO],
            &[ZERO, ONE, ZERO, ZERO],
        ]);
        assert!(rho.approx_eq(&expected, 0.0));
    }

    #[test]
    fn product_operator_matches_direct_kronecker() {
        let got = product_operator(&[(0, Axis::X), (1, Axis::Z)], 2, 2.0).unwrap();
        let direct = pauli(Axis::X).kron(&pauli(Axis::Z)).scale(c(2.0, 0.0));
        assert!(got.approx_eq(&direct, 0.0));
        assert_eq!(got.get(0, 2), c(0.5, 0.0));
        assert_eq!(got.get(1, 3), c(-0.5, 0.0));
    }

    #[test]
    fn product_operator_errors() {
        assert!(matches!(
            product_operator(&[(1, Axis::Z)], 1, 1.0),
            Err(DropsError::SpinIndexOutOfRange { index: 1, n_spins: 1 })
        ));
        assert!(matches!(
            product_operator(&[(0, Axis::Z), (0, Axis::X)], 2, 1.0),
            Err(DropsError::DuplicateSpin(0))
        ));
    }

    #[test]
    fn rotation_examples() {
        assert!(rotation(0.0, 0.0, &[0, 1], 2).unwrap().approx_eq(&Operator::identity(2), EPS_ALG));

        let r = rotation(0.0, PI / 2.0, &[0], 1).unwrap();
        let tz = pauli(Axis::Z).scale(c(SQRT_2, 0.0));
        let tx = pauli(Axis::X).scale(c(SQRT_2, 0.0));
        assert!(tz.conjugate_by(&r).approx_eq(&tx, EPS_ALG));

        let r = rotation(PI / 2.0, 0.0, &[0], 1).unwrap();
        let e = C64::from_polar(1.0, -PI / 4.0);
        assert!(r.approx_eq(&op(&[&[e, ZERO], &[ZERO, e.conj()]]), EPS_ALG));
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        let (alpha, beta) = (0.7, 2.1);
        let n = 2;
        let fz = &product_operator(&[(0, Axis::Z)], n, 1.0).unwrap() + &product_operator(&[(1, Axis::Z)], n, 1.0).unwrap();
        let fy = &product_operator(&[(0, Axis::Y)], n, 1.0).unwrap() + &product_operator(&[(1, Axis::Y)], n, 1.0).unwrap();
        let ez = (fz.matrix() * c(0.0, -alpha)).exp();
        let ey = (fy.matrix() * c(0.0, -beta)).exp();
        let oracle = Operator::new(n, ez * ey).unwrap();
        let r = rotation(alpha, beta, &[0, 1], n).unwrap();
        assert!(r.approx_eq(&oracle, EPS_ALG));
        assert!(r.is_unitary(EPS_ALG));
    }

    #[test]
    fn rotation_rejects_empty_spin_set() {
        assert!(matches!(rotation(0.1, 0.2, &[], 1), Err(DropsError::EmptySpinSet)));
    }

    fn generic_u() -> Operator {
        // exp(-i 1.3 n·I) times a global phase
        let n = [0.36, -0.48, 0.8];
        spin_rotation(1.3, n).scale(C64::from_polar(1.0, 0.4))
    }

    #[test]
    fn controlled_worked_example() {
        let u = generic_u();
        let cu = controlled(&u).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let expected = match (r, col) {
                    (0, 0) | (1, 1) => ONE,
                    (2..=3, 2..=3) => u.get(r - 2, col - 2),
                    _ => ZERO,
                };
                assert_eq!(cu.get(r, col), expected);
            }
        }
        assert!(controlled(&Operator::identity(1)).unwrap().approx_eq(&Operator::identity(2), 0.0));
    }

    #[test]
    fn controlled_rejects_non_unitary() {
        let m = pauli(Axis::Z);
        assert!(matches!(controlled(&m), Err(DropsError::NotUnitary(_))));
        assert!(matches!(imprint(&m), Err(DropsError::NotUnitary(_))));
    }

    #[test]
    fn imprint_worked_example() {
        let u = generic_u();
        let rho = imprint(&u).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert!((rho.get(r + 2, col) - u.get(r, col)).norm() < EPS_ALG);
                assert!((rho.get(r, col + 2) - u.get(col, r).conj()).norm() < EPS_ALG);
                assert!(rho.get(r, col).norm() < EPS_ALG);
                assert!(rho.get(r + 2, col + 2).norm() < EPS_ALG);
            }
        }
        assert!(rho.is_hermitian(EPS_ALG));
        assert!(rho.trace().norm() < EPS_ALG);
    }

    #[test]
    fn imprint_identity_and_not() {
        assert!(imprint(&Operator::identity(1)).unwrap().approx_eq(&rho0(2).unwrap(), EPS_ALG));
        let not = pauli(Axis::X).scale(c(2.0, 0.0));
        let rho = imprint(&not).unwrap();
        let expected = op(&[
            &[ZERO, ZERO, ZERO, ONE],
            &[ZERO, ZERO, ONE, ZERO],
            &[ZERO, ONE, ZERO, ZERO],
            &[ONE, ZERO, ZERO, ZERO],
        ]);
        assert!(rho.approx_eq(&expected, EPS_ALG));
    }

    #[test]
    fn gradient_filter_examples() {
        let i1y = product_operator(&[(1, Axis::Y)], 2, 1.0).unwrap();
        assert!(gradient_filter(&i1y, &[1]).unwrap().max_abs() < EPS_ALG);

        let (g0, g1) = (1.0, 0.2514);
        let i0z = product_operator(&[(0, Axis::Z)], 2, 2.0 * g0).unwrap();
        let rho = &i0z - &product_operator(&[(1, Axis::Y)], 2, 2.0 * g1).unwrap();
        assert!(gradient_filter(&rho, &[1]).unwrap().approx_eq(&i0z, EPS_ALG));
    }

    #[test]
    fn gradient_filter_matches_phase_average() {
        let rho = product_operator(&[(0, Axis::X), (1, Axis::Z)], 2, 2.0).unwrap();
        let mixed = &rho + &product_operator(&[(0, Axis::Z), (1, Axis::X)], 2, 2.0).unwrap();
        let filtered = gradient_filter(&mixed, &[1]).unwrap();
        // average over 64 equally spaced dephasing angles
        let steps = 64;
        let mut avg = Operator::zeros(2);
        for s in 0..steps {
            let phi = 2.0 * PI * s as f64 / steps as f64;
            let rz = local_product(&spin_rotation(phi, [0.0, 0.0, 1.0]), &[1], 2).unwrap();
            avg = &avg + &mixed.conjugate_by(&rz);
        }
        let avg = avg.scale(c(1.0 / steps as f64, 0.0));
        assert!(filtered.approx_eq(&avg, EPS_ALG));
        assert!(filtered.approx_eq(&rho, EPS_ALG));
    }

    #[test]
    fn expectation_examples() {
        let iz = pauli(Axis::Z);
        let rho = iz.scale(c(2.0, 0.0));
        assert!((expectation(&iz, &rho).unwrap() - ONE).norm() < EPS_ALG);
        assert!(matches!(
            expectation(&iz, &Operator::identity(2)),
            Err(DropsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let id = Operator::identity(1);
        assert!((fidelity_up_to_phase(&id, &id).unwrap() - 1.0).abs() < EPS_ALG);
        let phased = id.scale(C64::from_polar(1.0, PI / 3.0));
        assert!((fidelity_up_to_phase(&id, &phased).unwrap() - 1.0).abs() < EPS_ALG);
        let sz = pauli(Axis::Z).scale(c(2.0, 0.0));
        assert!(fidelity_up_to_phase(&id, &sz).unwrap().abs() < EPS_ALG);
        assert!(fidelity_up_to_phase(&id, &Operator::identity(2)).is_err());
    }

    #[test]
    fn controlled_rx_pi_twice_is_controlled_minus_identity() {
        let rx_pi = spin_rotation(PI, [1.0, 0.0, 0.0]);
        let c1 = controlled(&rx_pi).unwrap();
        let twice = &c1 * &c1;
        let rx_2pi = controlled(&spin_rotation(2.0 * PI, [1.0, 0.0, 0.0])).unwrap();
        assert!((fidelity_up_to_phase(&twice, &rx_2pi).unwrap() - 1.0).abs() < EPS_ALG);
        let minus = controlled(&Operator::identity(1).scale(-ONE)).unwrap();
        assert!(twice.approx_eq(&minus, EPS_ALG));
    }

    #[test]
    fn operator_json_shape() {
        let u = spin_rotation(PI / 2.0, [1.0, 0.0, 0.0]);
        let v = serde_json::to_value(&u).unwrap();
        assert_eq!(v["n_spins"], 1);
        assert!((v["re"][0][0].as_f64().unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v["im"][0][1].as_f64().unwrap() + FRAC_1_SQRT_2).abs() < 1e-15);
        let back: Operator = serde_json::from_value(v).unwrap();
        assert!(back.approx_eq(&u, 0.0));
        let bad = serde_json::json!({"n_spins": 2, "re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]});
        assert!(serde_json::from_value::<Operator>(bad).is_err());
    }
}
