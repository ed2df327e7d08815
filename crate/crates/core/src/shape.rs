//! Grid shape functions and their gradients.
//!
//! 2D shapes are tensor products of 1D factors. The uGIMP weight is the
//! average of the linear hat function over the particle's fixed undeformed
//! domain `[x - l, x + l]`, evaluated in closed form from the hat's
//! antiderivative. The contiguous variant (`cpgimp`) stretches that domain
//! by the diagonal of the deformation gradient so neighbouring domains keep
//! tiling under axial stretch.

use crate::error::{config_err, MpmError, Result};
use crate::grid::{Grid, Particle, Vec2};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Linear,
    #[default]
    Ugimp,
    Cpgimp,
    Bspline2,
}

impl FromStr for ShapeKind {
    type Err = MpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "ugimp" => Ok(Self::Ugimp),
            "cpgimp" => Ok(Self::Cpgimp),
            "bspline2" => Ok(Self::Bspline2),
            other => Err(config_err(format!("unknown shape kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeWeight {
    pub node: usize,
    pub weight: f64,
    pub grad: Vec2,
}

/// Nodes influencing one particle with their weights and gradients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShapeSample {
    pub particle: usize,
    pub nodes: Vec<NodeWeight>,
}

impl ShapeSample {
    /// Interpolates a nodal field to the particle, `Σ_i S_pi v_i`.
    pub fn interpolate(&self, values: &[Vec2]) -> Vec2 {
        self.nodes.iter().map(|w| values[w.node] * w.weight).sum()
    }

    /// `Σ_i v_i ⊗ ∇S_pi`.
    pub fn gradient(&self, values: &[Vec2]) -> crate::grid::Mat2 {
        self.nodes.iter().map(|w| values[w.node] * w.grad.transpose()).sum()
    }
}

type Factor = (usize, f64, f64);

/// Linear hat function of the normalised offset `u = (x - x_i)/h`.
fn hat(u: f64) -> f64 {
    (1.0 - u.abs()).max(0.0)
}

/// `∫_{-∞}^{u} hat(t) dt`.
fn hat_integral(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u <= 0.0 {
        0.5 * (u + 1.0) * (u + 1.0)
    } else if u < 1.0 {
        1.0 - 0.5 * (1.0 - u) * (1.0 - u)
    } else {
        1.0
    }
}

fn bspline2(u: f64) -> (f64, f64) {
    let a = u.abs();
    if a < 0.5 {
        (0.75 - u * u, -2.0 * u)
    } else if a < 1.5 {
        let r = 1.5 - a;
        (0.5 * r * r, -r * u.signum())
    } else {
        (0.0, 0.0)
    }
}

/// 1D weights along one axis: `(node index, weight, d weight/dx)`.
fn factors_1d(kind: ShapeKind, x: f64, half: f64, origin: f64, h: f64, n: usize) -> Option<Vec<Factor>> {
    let upper = origin + (n - 1) as f64 * h;
    let s = (x - origin) / h;
    match kind {
        ShapeKind::Linear => {
            if !(x >= origin && x <= upper) {
                return None;
            }
            let cell = (s.floor() as usize).min(n - 2);
            let xi = s - cell as f64;
            Some(vec![(cell, 1.0 - xi, -1.0 / h), (cell + 1, xi, 1.0 / h)])
        }
        ShapeKind::Ugimp | ShapeKind::Cpgimp if half > 0.0 => {
            if !(x - half >= origin - 1e-12 * h && x + half <= upper + 1e-12 * h) {
                return None;
            }
            let l = half / h;
            let lo = ((s - l - 1.0).ceil().max(0.0)) as usize;
            let hi = ((s + l + 1.0).floor() as usize).min(n - 1);
            let mut out = Vec::with_capacity(4);
            for i in lo..=hi {
                let u = s - i as f64;
                let w = (hat_integral(u + l) - hat_integral(u - l)) / (2.0 * l);
                if w > 0.0 {
                    let dw = (hat(u + l) - hat(u - l)) / (2.0 * half);
                    out.push((i, w, dw));
                }
            }
            Some(out)
        }
        ShapeKind::Ugimp | ShapeKind::Cpgimp => factors_1d(ShapeKind::Linear, x, 0.0, origin, h, n),
        ShapeKind::Bspline2 => {
            if !(x >= origin + 0.5 * h && x <= upper - 0.5 * h) {
                return None;
            }
            let lo = (s - 1.5).ceil().max(0.0) as usize;
            let hi = ((s + 1.5).floor() as usize).min(n - 1);
            let mut out = Vec::with_capacity(3);
            for i in lo..=hi {
                let (w, dw) = bspline2(s - i as f64);
                if w > 0.0 {
                    out.push((i, w, dw / h));
                }
            }
            Some(out)
        }
    }
}

/// Evaluates the shape functions of `kind` for one particle.
///
/// Fails with [`MpmError::ParticleOutsideGrid`] when the particle's support is
/// not fully covered by the grid.
pub fn sample_shapes(kind: ShapeKind, grid: &Grid, index: usize, particle: &Particle) -> Result<ShapeSample> {
    let mut sample = ShapeSample::default();
    sample_shapes_into(kind, grid, index, particle, &mut sample)?;
    Ok(sample)
}

pub fn sample_shapes_into(
    kind: ShapeKind,
    grid: &Grid,
    index: usize,
    particle: &Particle,
    out: &mut ShapeSample,
) -> Result<()> {
    let outside = || MpmError::ParticleOutsideGrid { particle: index, x: particle.position.x, y: particle.position.y };
    let origin = grid.origin();
    let cell = grid.cell_size();
    let counts = grid.node_counts();
    let half = if kind == ShapeKind::Cpgimp {
        Vec2::new(
            particle.half_size.x * particle.def_grad[(0, 0)].abs(),
            particle.half_size.y * particle.def_grad[(1, 1)].abs(),
        )
    } else {
        particle.half_size
    };
    let fx = factors_1d(kind, particle.position.x, half.x, origin[0], cell[0], counts[0]).ok_or_else(outside)?;
    let fy = if grid.dim() == 1 {
        vec![(0, 1.0, 0.0)]
    } else {
        factors_1d(kind, particle.position.y, half.y, origin[1], cell[1], counts[1]).ok_or_else(outside)?
    };
    out.particle = index;
    out.nodes.clear();
    for &(iy, wy, dy) in &fy {
        for &(ix, wx, dx) in &fx {
            out.nodes.push(NodeWeight {
                node: grid.node_index(ix, iy),
                weight: wx * wy,
                grad: Vec2::new(dx * wy, wx * dy),
            });
        }
    }
    Ok(())
}
