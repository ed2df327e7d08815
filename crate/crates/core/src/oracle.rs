//! Dense truncated-series reference for small instances.
//!
//! Builds `S`, the lumped masses `m = SᵀM1` and `A = I - m⁻¹SᵀMS` explicitly
//! and sums `Σ c_ℓ A^{ℓ-1} m⁻¹p` with matrix powers. Cost is `O(n³k)`, so
//! instances above [`MAX_ORACLE_NODES`] active nodes are refused.

use crate::error::{config_err, MpmError, Result};
use crate::fmpm::blend_coefficients;
use crate::grid::{particles_by_field, FieldSet, Particle, Vec2};
use crate::shape::ShapeSample;
use nalgebra::DMatrix;

pub const MAX_ORACLE_NODES: usize = 200;

/// Reference FMPM velocities per field. Momenta are read from `fields`; the
/// masses are rebuilt from the particles.
pub fn dense_oracle_velocity(
    fields: &FieldSet,
    particles: &[Particle],
    shapes: &[ShapeSample],
    order: usize,
    alpha: f64,
    base: usize,
) -> Result<Vec<Vec<Vec2>>> {
    if order < 1 || base < 1 {
        return Err(config_err("oracle needs order ≥ 1 and blend base ≥ 1"));
    }
    let coeffs = blend_coefficients(order, alpha, base);
    let groups = particles_by_field(particles, fields.fields.len())?;
    let n_all = fields.num_nodes();
    let mut out = Vec::with_capacity(groups.len());
    for (a, members) in groups.iter().enumerate() {
        let mut mass = vec![0.0; n_all];
        for &p in members {
            for w in &shapes[p].nodes {
                mass[w.node] += w.weight * particles[p].mass;
            }
        }
        let active: Vec<usize> = (0..n_all).filter(|&i| mass[i] > fields.mass_tolerance).collect();
        let n = active.len();
        if n > MAX_ORACLE_NODES {
            return Err(MpmError::Unsupported(format!("oracle instance has {n} active nodes")));
        }
        let mut column = vec![usize::MAX; n_all];
        for (c, &i) in active.iter().enumerate() {
            column[i] = c;
        }
        let mut s = DMatrix::<f64>::zeros(members.len(), n);
        for (r, &p) in members.iter().enumerate() {
            for w in &shapes[p].nodes {
                if column[w.node] != usize::MAX {
                    s[(r, column[w.node])] += w.weight;
                }
            }
        }
        let big_m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            members.len(),
            members.iter().map(|&p| particles[p].mass),
        ));
        let inv_m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, active.iter().map(|&i| 1.0 / mass[i])));
        let a_mat = DMatrix::<f64>::identity(n, n) - &inv_m * s.transpose() * &big_m * &s;

        let mut v1 = DMatrix::<f64>::zeros(n, 2);
        for (c, &i) in active.iter().enumerate() {
            let p = fields.fields[a].momentum[i];
            v1[(c, 0)] = p.x / mass[i];
            v1[(c, 1)] = p.y / mass[i];
        }
        let mut power = DMatrix::<f64>::identity(n, n);
        let mut sum = DMatrix::<f64>::zeros(n, 2);
        for (l, c) in coeffs.iter().enumerate() {
            if l > 0 {
                power = &power * &a_mat;
            }
            sum += &power * &v1 * *c;
        }
        let mut v = vec![Vec2::zeros(); n_all];
        for (c, &i) in active.iter().enumerate() {
            v[i] = Vec2::new(sum[(c, 0)], sum[(c, 1)]);
        }
        out.push(v);
    }
    Ok(out)
}
