use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::drops::{evaluate, evaluate_combined, DropletCoefficients};
use crate::error::{DropsError, Result};
use crate::spinop::C64;
use crate::tensors::DropletLabel;

/// What to draw: one droplet, or the sum of all droplets.
#[derive(Clone, Copy, Debug)]
pub enum MeshSource<'a> {
    Droplet(&'a DropletCoefficients, DropletLabel),
    Combined(&'a DropletCoefficients),
}

impl MeshSource<'_> {
    fn value(&self, theta: f64, phi: f64) -> Result<C64> {
        match *self {
            MeshSource::Droplet(c, label) => evaluate(c, label, theta, phi, None),
            MeshSource::Combined(c) => evaluate_combined(c, theta, phi),
        }
    }
}

/// Polar surface `r = |f(θ, φ)|` colored by `arg f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropletMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Phase of each vertex in `[0, 2π)`.
    pub phases: Vec<f64>,
    #[serde(skip)]
    pub colors: Vec<[u8; 3]>,
}

const ANCHORS: [[f64; 3]; 5] = [
    [255.0, 0.0, 0.0],
    [255.0, 255.0, 0.0],
    [0.0, 128.0, 0.0],
    [0.0, 0.0, 255.0],
    [255.0, 0.0, 0.0],
];

/// Phase color map: 0 red, π/2 yellow, π green, 3π/2 blue, linear in RGB between.
pub fn phase_color(phase: f64) -> [u8; 3] {
    let p = phase.rem_euclid(2.0 * PI) / (PI / 2.0);
    let k = (p.floor() as usize).min(3);
    let t = p - k as f64;
    let (a, b) = (ANCHORS[k], ANCHORS[k + 1]);
    [0, 1, 2].map(|i| (a[i] + t * (b[i] - a[i])).round() as u8)
}

/// Triangulates the droplet over a `resolution × 2·resolution` (θ, φ) lattice.
pub fn mesh(source: MeshSource<'_>, resolution: usize) -> Result<DropletMesh> {
    if resolution < 8 {
        return Err(DropsError::Invalid(format!("mesh resolution must be at least 8, got {resolution}")));
    }
    let (n_theta, n_phi) = (resolution, 2 * resolution);
    let mut out = DropletMesh {
        vertices: Vec::with_capacity(n_theta * n_phi),
        faces: Vec::new(),
        phases: Vec::with_capacity(n_theta * n_phi),
        colors: Vec::with_capacity(n_theta * n_phi),
    };
    for i in 0..n_theta {
        let theta = PI * i as f64 / (n_theta - 1) as f64;
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let f = source.value(theta, phi)?;
            let r = f.norm();
            let phase = f.arg().rem_euclid(2.0 * PI);
            out.vertices.push([
                r * theta.sin() * phi.cos(),
                r * theta.sin() * phi.sin(),
                r * theta.cos(),
            ]);
            out.phases.push(phase);
            out.colors.push(phase_color(phase));
        }
    }
    let at = |i: usize, k: usize| i * n_phi + k % n_phi;
    for i in 0..n_theta - 1 {
        for k in 0..n_phi {
            // rows 0 and n_theta-1 are the poles, where one triangle of each quad collapses
            if i > 0 {
                out.faces.push([at(i, k), at(i + 1, k), at(i, k + 1)]);
            }
            if i + 1 < n_theta - 1 {
                out.faces.push([at(i, k + 1), at(i + 1, k), at(i + 1, k + 1)]);
            }
        }
    }
    Ok(out)
}

impl DropletMesh {
    /// ASCII PLY with per-vertex `uchar` RGB.
    pub fn to_ply(&self) -> String {
        let mut s = String::new();
        s.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(s, "element vertex {}", self.vertices.len());
        s.push_str("property double x\nproperty double y\nproperty double z\n");
        s.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
        let _ = writeln!(s, "element face {}", self.faces.len());
        s.push_str("property list uchar int vertex_indices\nend_header\n");
        for (v, c) in self.vertices.iter().zip(&self.colors) {
            let _ = writeln!(s, "{:e} {:e} {:e} {} {} {}", v[0], v[1], v[2], c[0], c[1], c[2]);
        }
        for f in &self.faces {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }

    /// JSON `{vertices, faces, phases}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drops::decompose;
    use crate::gates::{lookup, rx};
    use crate::spinop::Operator;

    fn radius(v: &[f64; 3]) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    #[test]
    fn anchor_colors_are_exact() {
        assert_eq!(phase_color(0.0), [255, 0, 0]);
        assert_eq!(phase_color(PI / 2.0), [255, 255, 0]);
        assert_eq!(phase_color(PI), [0, 128, 0]);
        assert_eq!(phase_color(3.0 * PI / 2.0), [0, 0, 255]);
        assert_eq!(phase_color(2.0 * PI), [255, 0, 0]);
        assert_eq!(phase_color(-PI / 2.0), [0, 0, 255]);
        assert_eq!(phase_color(PI / 4.0), [255, 128, 0]);
    }

    #[test]
    fn identity_is_red_sphere() {
        let c = decompose(&Operator::identity(1)).unwrap();
        let m = mesh(MeshSource::Combined(&c), 8).unwrap();
        assert_eq!(m.vertices.len(), 8 * 16);
        for (v, col) in m.vertices.iter().zip(&m.colors) {
            assert!((radius(v) - (1.0 / (2.0 * PI)).sqrt()).abs() < 1e-12);
            assert_eq!(*col, [255, 0, 0]);
        }
    }

    #[test]
    fn two_pi_rotation_is_green_sphere() {
        let c = decompose(&rx(2.0 * PI)).unwrap();
        let m = mesh(MeshSource::Combined(&c), 12).unwrap();
        for (v, col) in m.vertices.iter().zip(&m.colors) {
            assert!((radius(v) - (1.0 / (2.0 * PI)).sqrt()).abs() < 1e-12);
            assert_eq!(*col, [0, 128, 0]);
        }
    }

    #[test]
    fn not_droplet_has_opposite_lobes_on_x() {
        let c = decompose(&lookup("not").unwrap().matrix()).unwrap();
        // odd resolution puts the equator and φ = π on the lattice
        let m = mesh(MeshSource::Droplet(&c, DropletLabel::Linear(1)), 17).unwrap();
        let (mut best, mut idx) = (0.0, 0);
        for (i, v) in m.vertices.iter().enumerate() {
            if radius(v) > best {
                best = radius(v);
                idx = i;
            }
        }
        let v = m.vertices[idx];
        assert!((v[0].abs() - best).abs() < 1e-9, "peak not on x axis: {v:?}");
        let opposite = m
            .vertices
            .iter()
            .position(|w| (w[0] + v[0]).abs() < 1e-9 && w[1].abs() < 1e-9 && w[2].abs() < 1e-9)
            .unwrap();
        let dphase = (m.phases[idx] - m.phases[opposite]).rem_euclid(2.0 * PI);
        assert!((dphase - PI).abs() < 1e-9);
    }

    #[test]
    fn radius_matches_evaluation_and_faces_are_valid() {
        let c = decompose(&lookup("hadamard").unwrap().matrix()).unwrap();
        let res = 10;
        let m = mesh(MeshSource::Droplet(&c, DropletLabel::Linear(1)), res).unwrap();
        for i in 0..res {
            for k in 0..2 * res {
                let theta = PI * i as f64 / (res - 1) as f64;
                let phi = PI * k as f64 / res as f64;
                let f = evaluate(&c, DropletLabel::Linear(1), theta, phi, None).unwrap();
                assert!((radius(&m.vertices[i * 2 * res + k]) - f.norm()).abs() < 1e-12);
            }
        }
        assert_eq!(m.faces.len(), 2 * (2 * res) * (res - 2));
        assert!(m.faces.iter().flatten().all(|&v| v < m.vertices.len()));
        assert!(mesh(MeshSource::Combined(&c), 4).is_err());
    }

    #[test]
    fn exports() {
        let c = decompose(&Operator::identity(1)).unwrap();
        let m = mesh(MeshSource::Combined(&c), 8).unwrap();
        let ply = m.to_ply();
        assert!(ply.starts_with("ply\nformat ascii 1.0\nelement vertex 128\n"));
        assert!(ply.contains("property uchar red"));
        assert_eq!(ply.lines().count(), 12 + m.vertices.len() + m.faces.len());
        let json: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(json["vertices"].as_array().unwrap().len(), 128);
        assert!(json.get("faces").is_some() && json.get("phases").is_some());
    }
}
