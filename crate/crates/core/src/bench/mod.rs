//! Benchmark problems run by the `fmpm` tool and the acceptance suite.

pub mod config;
pub mod disks;
pub mod mms;
pub mod oracle_check;
pub mod splitbar;
pub mod vibrate;

use crate::error::{config_err, MpmError, Result};
use crate::grid::{Particle, Vec2};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Vibrate,
    Mms,
    Splitbar,
    Disks,
    Oracle,
}

impl FromStr for Problem {
    type Err = MpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vibrate" => Ok(Self::Vibrate),
            "mms" => Ok(Self::Mms),
            "splitbar" => Ok(Self::Splitbar),
            "disks" => Ok(Self::Disks),
            "oracle" => Ok(Self::Oracle),
            other => Err(config_err(format!("unknown problem `{other}`"))),
        }
    }
}

/// Particles filling `[lo, hi]` at `ppc` per cell per axis, with uniform
/// undeformed domains. In 1D only the `x` range is used and volumes are per
/// unit area.
pub fn fill_box(dim: usize, lo: [f64; 2], hi: [f64; 2], cell: f64, ppc: usize, density: f64) -> Vec<Particle> {
    let h = cell / ppc as f64;
    let nx = ((hi[0] - lo[0]) / h).round() as usize;
    let ny = if dim == 1 { 1 } else { ((hi[1] - lo[1]) / h).round() as usize };
    let volume = if dim == 1 { h } else { h * h };
    let half = if dim == 1 { Vec2::new(0.5 * h, 0.0) } else { Vec2::new(0.5 * h, 0.5 * h) };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let y = if dim == 1 { 0.0 } else { lo[1] + (j as f64 + 0.5) * h };
            let x = lo[0] + (i as f64 + 0.5) * h;
            out.push(Particle::new(density * volume, Vec2::new(x, y), Vec2::zeros(), volume, half));
        }
    }
    out
}

/// Particles of a square lattice whose centres fall inside a disk.
pub fn fill_disk(center: Vec2, radius: f64, cell: f64, ppc: usize, density: f64) -> Vec<Particle> {
    let h = cell / ppc as f64;
    let n = (radius / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in -n..n {
        for i in -n..n {
            let offset = Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if offset.norm() <= radius {
                out.push(Particle::new(
                    density * h * h,
                    center + offset,
                    Vec2::zeros(),
                    h * h,
                    Vec2::new(0.5 * h, 0.5 * h),
                ));
            }
        }
    }
    out
}

/// Mass-weighted mean position and velocity of a particle subset.
pub fn centre_of_mass<'a>(particles: impl IntoIterator<Item = &'a Particle>) -> (Vec2, Vec2) {
    let mut m = 0.0;
    let mut x = Vec2::zeros();
    let mut v = Vec2::zeros();
    for p in particles {
        m += p.mass;
        x += p.position * p.mass;
        v += p.velocity * p.mass;
    }
    if m > 0.0 {
        (x / m, v / m)
    } else {
        (x, v)
    }
}

/// True when a failed run should count as numerical instability rather than
/// a setup error.
pub fn is_instability(err: &MpmError) -> bool {
    matches!(err, MpmError::ElementInversion { .. } | MpmError::ParticleOutsideGrid { .. })
}
