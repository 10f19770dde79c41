use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DropsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Equiangular,
    GaussLegendre,
}

/// Sampling nodes `(β, α)` on the sphere, optionally with quadrature weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub kind: GridKind,
    pub nodes: Vec<(f64, f64)>,
    pub weights: Option<Vec<f64>>,
}

impl SamplingGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n_beta` polar angles from 0 to π and `n_alpha` azimuths from 0 to 2π
/// inclusive; the duplicated α = 2π column is kept (13×25 gives 325 nodes).
pub fn equiangular_grid(n_beta: usize, n_alpha: usize) -> Result<SamplingGrid> {
    if n_beta < 2 || n_alpha < 2 {
        return Err(DropsError::Invalid(format!(
            "equiangular grid needs at least 2x2 nodes, got {n_beta}x{n_alpha}"
        )));
    }
    let mut nodes = Vec::with_capacity(n_beta * n_alpha);
    for b in 0..n_beta {
        let beta = PI * b as f64 / (n_beta - 1) as f64;
        for a in 0..n_alpha {
            nodes.push((beta, 2.0 * PI * a as f64 / (n_alpha - 1) as f64));
        }
    }
    Ok(SamplingGrid {
        kind: GridKind::Equiangular,
        nodes,
        weights: None,
    })
}

/// Gauss–Legendre abscissae and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n <= 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `(j_max+1)` Gauss–Legendre colatitudes × `(2 j_max+1)` azimuths; exact for
/// products of harmonics up to rank `j_max`. Weights sum to 4π.
pub fn gauss_legendre_grid(j_max: usize) -> SamplingGrid {
    let n_alpha = 2 * j_max + 1;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let gl = if j_max == 0 { vec![(0.0, 2.0)] } else { gauss_legendre_nodes(j_max + 1) };
    for (x, w) in gl {
        for a in 0..n_alpha {
            nodes.push((x.acos(), 2.0 * PI * a as f64 / n_alpha as f64));
            weights.push(w * 2.0 * PI / n_alpha as f64);
        }
    }
    SamplingGrid {
        kind: GridKind::GaussLegendre,
        nodes,
        weights: Some(weights),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drops::spherical_harmonic;
    use crate::spinop::ZERO;

    #[test]
    fn equiangular_examples() {
        let g = equiangular_grid(13, 25).unwrap();
        assert_eq!(g.len(), 325);
        assert!(g
            .nodes
            .iter()
            .any(|&(b, a)| (b - PI / 12.0).abs() < 1e-15 && (a - PI / 12.0).abs() < 1e-15));
        assert_eq!(
            equiangular_grid(2, 2).unwrap().nodes,
            vec![(0.0, 0.0), (0.0, 2.0 * PI), (PI, 0.0), (PI, 2.0 * PI)]
        );
        assert!(equiangular_grid(1, 5).is_err());
    }

    #[test]
    fn legendre_nodes_match_tables() {
        let g = gauss_legendre_nodes(3);
        let x = (0.6f64).sqrt();
        let expected = [(x, 5.0 / 9.0), (0.0, 8.0 / 9.0), (-x, 5.0 / 9.0)];
        for ((a, wa), (b, wb)) in g.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15 && (wa - wb).abs() < 1e-15);
        }
        let g = gauss_legendre_nodes(2);
        assert!((g[0].0 - 1.0 / 3f64.sqrt()).abs() < 1e-15 && (g[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gl_grid_sizes_and_weights() {
        for (j, n) in [(0, 1), (1, 6), (2, 15)] {
            let g = gauss_legendre_grid(j);
            assert_eq!(g.len(), n);
            let total: f64 = g.weights.as_ref().unwrap().iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn gl_quadrature_is_orthonormal() {
        let g = gauss_legendre_grid(2);
        let w = g.weights.as_ref().unwrap();
        let lm: Vec<(u32, i32)> = (0..=2u32).flat_map(|j| (-(j as i32)..=(j as i32)).map(move |m| (j, m))).collect();
        for &(j1, m1) in &lm {
            for &(j2, m2) in &lm {
                let mut s = ZERO;
                for (&(b, a), &wi) in g.nodes.iter().zip(w) {
                    s += spherical_harmonic(j1, m1, b, a).unwrap()
                        * spherical_harmonic(j2, m2, b, a).unwrap().conj()
                        * wi;
                }
                let want = if (j1, m1) == (j2, m2) { 1.0 } else { 0.0 };
                assert!((s.re - want).abs() < 1e-12 && s.im.abs() < 1e-12);
            }
        }
    }
}
