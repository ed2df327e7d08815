//! Background grid, particle state and the particle→grid scatter of mass,
//! momentum and forces.
//!
//! Each velocity field (one per contacting body) keeps its own dense nodal
//! arrays. In 1D the grid has a single row of nodes and every vector keeps a
//! zero `y` component.

use crate::error::{config_err, MpmError, Result};
use crate::exec::{accumulate, ExecMode};
use crate::shape::ShapeSample;
use std::ops::AddAssign;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Relative cutoff below which a node's mass is treated as empty.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    origin: [f64; 2],
    cell: [f64; 2],
    nodes: [usize; 2],
}

impl Grid {
    pub fn new_1d(origin: f64, cell: f64, nodes: usize) -> Result<Self> {
        Self::build(1, [origin, 0.0], [cell, 1.0], [nodes, 1])
    }

    pub fn new_2d(origin: [f64; 2], cell: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        Self::build(2, origin, cell, nodes)
    }

    fn build(dim: usize, origin: [f64; 2], cell: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        for axis in 0..dim {
            if !(cell[axis] > 0.0 && cell[axis].is_finite()) {
                return Err(config_err(format!("cell size along axis {axis} must be positive")));
            }
            if nodes[axis] < 2 {
                return Err(config_err(format!("need at least 2 nodes along axis {axis}")));
            }
        }
        Ok(Self { dim, origin, cell, nodes })
    }

    /// Grid covering `[lo, hi]` on each axis with the given cell size.
    pub fn covering(dim: usize, lo: [f64; 2], hi: [f64; 2], cell: f64) -> Result<Self> {
        let count = |axis: usize| ((hi[axis] - lo[axis]) / cell).ceil() as usize + 1;
        match dim {
            1 => Self::new_1d(lo[0], cell, count(0)),
            2 => Self::new_2d(lo, [cell, cell], [count(0), count(1)]),
            _ => Err(config_err("grid dimension must be 1 or 2")),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cell_size(&self) -> [f64; 2] {
        self.cell
    }

    pub fn node_counts(&self) -> [usize; 2] {
        self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }

    pub fn min_cell_size(&self) -> f64 {
        if self.dim == 1 {
            self.cell[0]
        } else {
            self.cell[0].min(self.cell[1])
        }
    }

    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nodes[0] * iy
    }

    pub fn node_coords(&self, node: usize) -> [usize; 2] {
        [node % self.nodes[0], node / self.nodes[0]]
    }

    pub fn node_position(&self, node: usize) -> Vec2 {
        let [ix, iy] = self.node_coords(node);
        let y = if self.dim == 1 { 0.0 } else { self.origin[1] + iy as f64 * self.cell[1] };
        Vec2::new(self.origin[0] + ix as f64 * self.cell[0], y)
    }

    /// Coordinate of the last node along `axis`.
    pub fn upper(&self, axis: usize) -> f64 {
        self.origin[axis] + (self.nodes[axis] - 1) as f64 * self.cell[axis]
    }
}

/// Lagrangian material point.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub mass: f64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub def_grad: Mat2,
    /// Elastic Kirchhoff stress (in-plane components).
    pub stress: Mat2,
    /// Kirchhoff-scaled artificial-viscosity pressure, `J q`.
    pub visc_pressure: f64,
    pub volume0: f64,
    /// Half-length of the undeformed uGIMP domain per axis.
    pub half_size: Vec2,
    /// Index into the simulation's material list.
    pub material: usize,
    /// Velocity field (contact body) this particle extrapolates to.
    pub field: usize,
}

impl Particle {
    pub fn new(mass: f64, position: Vec2, velocity: Vec2, volume0: f64, half_size: Vec2) -> Self {
        Self {
            mass,
            position,
            velocity,
            def_grad: Mat2::identity(),
            stress: Mat2::zeros(),
            visc_pressure: 0.0,
            volume0,
            half_size,
            material: 0,
            field: 0,
        }
    }

    pub fn with_field(mut self, field: usize) -> Self {
        self.field = field;
        self
    }

    pub fn with_material(mut self, material: usize) -> Self {
        self.material = material;
        self
    }

    /// Total Kirchhoff stress used for internal forces.
    pub fn total_stress(&self) -> Mat2 {
        self.stress - Mat2::identity() * self.visc_pressure
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.norm_squared()
    }
}

/// Per-node quantities of one velocity field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodalField {
    pub mass: Vec<f64>,
    pub momentum: Vec<Vec2>,
    pub force: Vec<Vec2>,
    pub velocity: Vec<Vec2>,
    pub active: Vec<bool>,
    /// `Σ_p M_p ∇S_pi`, used for contact normals.
    pub mass_gradient: Vec<Vec2>,
    /// `Σ_p S_pi M_p X_p`, used for contact separation.
    pub position_moment: Vec<Vec2>,
}

impl NodalField {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            mass: vec![0.0; num_nodes],
            momentum: vec![Vec2::zeros(); num_nodes],
            force: vec![Vec2::zeros(); num_nodes],
            velocity: vec![Vec2::zeros(); num_nodes],
            active: vec![false; num_nodes],
            mass_gradient: vec![Vec2::zeros(); num_nodes],
            position_moment: vec![Vec2::zeros(); num_nodes],
        }
    }

    pub fn clear(&mut self) {
        self.mass.iter_mut().for_each(|m| *m = 0.0);
        for v in [
            &mut self.momentum,
            &mut self.force,
            &mut self.velocity,
            &mut self.mass_gradient,
            &mut self.position_moment,
        ] {
            v.iter_mut().for_each(|x| *x = Vec2::zeros());
        }
        self.active.iter_mut().for_each(|a| *a = false);
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i)
    }

    /// Lumped velocity `m⁻¹p` on active nodes, zero elsewhere.
    pub fn lumped_velocity(&self) -> Vec<Vec2> {
        self.momentum
            .iter()
            .zip(&self.mass)
            .zip(&self.active)
            .map(|((p, m), a)| if *a { p / *m } else { Vec2::zeros() })
            .collect()
    }
}

/// All velocity fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub fields: Vec<NodalField>,
    /// Absolute activity cutoff set by the last mass scatter.
    pub mass_tolerance: f64,
}

impl FieldSet {
    pub fn new(num_fields: usize, num_nodes: usize) -> Self {
        Self { fields: (0..num_fields).map(|_| NodalField::new(num_nodes)).collect(), mass_tolerance: 0.0 }
    }

    pub fn num_nodes(&self) -> usize {
        self.fields.first().map_or(0, |f| f.mass.len())
    }

    pub fn clear(&mut self) {
        self.fields.iter_mut().for_each(NodalField::clear);
    }

    pub fn total_mass(&self) -> f64 {
        self.fields.iter().flat_map(|f| f.mass.iter()).sum()
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.fields.iter().flat_map(|f| f.momentum.iter()).sum()
    }

    pub fn total_force(&self) -> Vec2 {
        self.fields.iter().flat_map(|f| f.force.iter()).sum()
    }
}

/// Groups particle indices by velocity field.
pub fn particles_by_field(particles: &[Particle], num_fields: usize) -> Result<Vec<Vec<usize>>> {
    let mut groups = vec![Vec::new(); num_fields];
    for (i, p) in particles.iter().enumerate() {
        groups
            .get_mut(p.field)
            .ok_or_else(|| config_err(format!("particle {i} references field {} of {num_fields}", p.field)))?
            .push(i);
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, Default)]
struct MassAccum {
    mass: f64,
    momentum: Vec2,
    mass_gradient: Vec2,
    position_moment: Vec2,
}

impl AddAssign for MassAccum {
    fn add_assign(&mut self, o: Self) {
        self.mass += o.mass;
        self.momentum += o.momentum;
        self.mass_gradient += o.mass_gradient;
        self.position_moment += o.position_moment;
    }
}

fn check_shapes(particles: &[Particle], shapes: &[ShapeSample], num_nodes: usize) -> Result<()> {
    if particles.len() != shapes.len() {
        return Err(MpmError::Internal(format!("{} shape samples for {} particles", shapes.len(), particles.len())));
    }
    for (i, s) in shapes.iter().enumerate() {
        if s.nodes.iter().any(|w| w.node >= num_nodes) {
            let p = &particles[i];
            return Err(MpmError::ParticleOutsideGrid { particle: i, x: p.position.x, y: p.position.y });
        }
    }
    Ok(())
}

/// Clears `fields` and extrapolates particle mass and momentum (plus the mass
/// gradient and position moment used by contact) to the grid.
pub fn scatter_mass_momentum(
    particles: &[Particle],
    shapes: &[ShapeSample],
    fields: &mut FieldSet,
    exec: ExecMode,
) -> Result<()> {
    let num_nodes = fields.num_nodes();
    check_shapes(particles, shapes, num_nodes)?;
    fields.clear();
    let groups = particles_by_field(particles, fields.fields.len())?;
    let mean_mass =
        if particles.is_empty() { 0.0 } else { particles.iter().map(|p| p.mass).sum::<f64>() / particles.len() as f64 };
    fields.mass_tolerance = MASS_TOLERANCE * mean_mass;
    let tol = fields.mass_tolerance;

    for (field, members) in fields.fields.iter_mut().zip(&groups) {
        let acc = accumulate::<MassAccum, _>(exec, num_nodes, members, |p, buf| {
            let part = &particles[p];
            for w in &shapes[p].nodes {
                let a = &mut buf[w.node];
                let sm = w.weight * part.mass;
                a.mass += sm;
                a.momentum += part.velocity * sm;
                a.mass_gradient += w.grad * part.mass;
                a.position_moment += part.position * sm;
            }
        });
        for (i, a) in acc.into_iter().enumerate() {
            field.mass[i] = a.mass;
            field.momentum[i] = a.momentum;
            field.mass_gradient[i] = a.mass_gradient;
            field.position_moment[i] = a.position_moment;
            field.active[i] = a.mass > tol;
            if !field.active[i] {
                field.momentum[i] = Vec2::zeros();
            }
        }
    }
    Ok(())
}

/// Extrapolates internal forces `-Σ ∇S V⁰ τ` and body forces `Σ S M B` to
/// the grid. Mass must already be scattered.
pub fn scatter_forces(
    particles: &[Particle],
    shapes: &[ShapeSample],
    body_force: Vec2,
    fields: &mut FieldSet,
    exec: ExecMode,
) -> Result<()> {
    let num_nodes = fields.num_nodes();
    check_shapes(particles, shapes, num_nodes)?;
    let groups = particles_by_field(particles, fields.fields.len())?;
    for (field, members) in fields.fields.iter_mut().zip(&groups) {
        let acc = accumulate::<Vec2, _>(exec, num_nodes, members, |p, buf| {
            let part = &particles[p];
            let tau = part.total_stress() * part.volume0;
            for w in &shapes[p].nodes {
                buf[w.node] += body_force * (w.weight * part.mass) - tau * w.grad;
            }
        });
        for (i, f) in acc.into_iter().enumerate() {
            field.force[i] = if field.active[i] { f } else { Vec2::zeros() };
        }
    }
    Ok(())
}
