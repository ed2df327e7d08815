//! Grid velocity boundary conditions.
//!
//! Each condition fixes the component of a node's velocity along a unit
//! direction. Lumped velocities get the target speed; every later FMPM
//! increment has that component removed, so the summed result keeps it.

use crate::error::{config_err, Result};
use crate::fmpm::FmpmHook;
use crate::grid::{FieldSet, Grid, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityBc {
    pub node: usize,
    pub direction: Vec2,
    pub speed: f64,
}

impl VelocityBc {
    pub fn new(node: usize, direction: Vec2, speed: f64) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(config_err(format!("BC on node {node} has a zero direction")));
        }
        Ok(Self { node, direction: direction / norm, speed })
    }
}

/// Validated set of conditions, applied to every velocity field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BcSet {
    conditions: Vec<VelocityBc>,
}

impl BcSet {
    /// Fails when two conditions on one node are neither parallel nor
    /// perpendicular.
    pub fn new(mut conditions: Vec<VelocityBc>) -> Result<Self> {
        conditions.sort_by_key(|c| c.node);
        for group in conditions.chunk_by(|a, b| a.node == b.node) {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    let d = a.direction.dot(&b.direction).abs();
                    if d > 1e-9 && (1.0 - d) > 1e-9 {
                        return Err(config_err(format!(
                            "BC directions on node {} are neither parallel nor perpendicular",
                            a.node
                        )));
                    }
                }
            }
        }
        Ok(Self { conditions })
    }

    pub fn conditions(&self) -> &[VelocityBc] {
        &self.conditions
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    /// Merges two sets, re-checking direction compatibility.
    pub fn union(&self, other: &BcSet) -> Result<BcSet> {
        BcSet::new(self.conditions.iter().chain(&other.conditions).copied().collect())
    }
}

/// Node indices whose index along `axis` equals `index`.
pub fn nodes_on_plane(grid: &Grid, axis: usize, index: usize) -> Vec<usize> {
    (0..grid.num_nodes()).filter(|&n| grid.node_coords(n)[axis] == index).collect()
}

/// Lumped-stage conditions on active nodes: first remove every constrained
/// component, then add the targets. Returns the momentum change made, the
/// lumped reaction impulse.
pub fn apply_lumped_bcs(velocities: &mut [Vec<Vec2>], fields: &FieldSet, bcs: &BcSet) -> Vec2 {
    let mut impulse = Vec2::zeros();
    for (v, f) in velocities.iter_mut().zip(&fields.fields) {
        let before: Vec<Vec2> = bcs.conditions.iter().map(|c| v[c.node]).collect();
        for c in &bcs.conditions {
            if f.active[c.node] {
                let vi = v[c.node];
                v[c.node] = vi - c.direction * vi.dot(&c.direction);
            }
        }
        for c in &bcs.conditions {
            if f.active[c.node] {
                v[c.node] += c.direction * c.speed;
            }
        }
        // Count each node once even if several conditions share it.
        let mut seen = std::collections::BTreeSet::new();
        for (c, b) in bcs.conditions.iter().zip(before) {
            if f.active[c.node] && seen.insert(c.node) {
                impulse += (v[c.node] - b) * f.mass[c.node];
            }
        }
    }
    impulse
}

/// Removes constrained components from one pass of increments.
pub fn zero_bc_increment(increments: &mut [Vec<Vec2>], bcs: &BcSet) {
    for dv in increments.iter_mut() {
        for c in &bcs.conditions {
            let d = dv[c.node];
            dv[c.node] = d - c.direction * d.dot(&c.direction);
        }
    }
}

/// Largest `|v·n - v_b|` over conditions on active nodes.
pub fn max_bc_violation(velocities: &[Vec<Vec2>], fields: &FieldSet, bcs: &BcSet) -> f64 {
    let mut worst: f64 = 0.0;
    for (v, f) in velocities.iter().zip(&fields.fields) {
        for node in bcs.conditions.iter().map(|c| c.node) {
            if !f.active[node] {
                continue;
            }
            // Superposed parallel conditions target the sum of their speeds.
            for c in bcs.conditions.iter().filter(|c| c.node == node) {
                let target: f64 = bcs
                    .conditions
                    .iter()
                    .filter(|o| o.node == node && o.direction.dot(&c.direction).abs() > 0.5)
                    .map(|o| o.speed * o.direction.dot(&c.direction))
                    .sum();
                worst = worst.max((v[node].dot(&c.direction) - target).abs());
            }
        }
    }
    worst
}

/// [`FmpmHook`] enforcing a [`BcSet`].
pub struct BcHook<'a> {
    pub bcs: &'a BcSet,
    pub fields: &'a FieldSet,
    /// Lumped-stage impulse from the last `initial` call.
    pub impulse: Vec2,
}

impl<'a> BcHook<'a> {
    pub fn new(bcs: &'a BcSet, fields: &'a FieldSet) -> Self {
        Self { bcs, fields, impulse: Vec2::zeros() }
    }
}

impl FmpmHook for BcHook<'_> {
    fn initial(&mut self, velocities: &mut [Vec<Vec2>]) -> Result<()> {
        self.impulse = apply_lumped_bcs(velocities, self.fields, self.bcs);
        Ok(())
    }

    fn increment(&mut self, _pass: usize, increments: &mut [Vec<Vec2>]) -> Result<()> {
        zero_bc_increment(increments, self.bcs);
        Ok(())
    }
}

/// Which end of the body the wall sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    /// Body lies at larger coordinates than the wall.
    Low,
    /// Body lies at smaller coordinates than the wall.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WallSchedule {
    /// Fixed speed and velocity gradient.
    Constant { speed: f64, gradient: f64 },
    /// Homogeneous stretch at engineering strain rate `rate`:
    /// `v_b = rate x_wall/(1 + rate t)`, `∇v_b = rate/(1 + rate t)`.
    Stretch { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingWall {
    pub position: f64,
    pub axis: usize,
    pub side: WallSide,
    /// Interior depth in cells along `axis`.
    pub depth: f64,
    pub schedule: WallSchedule,
}

impl MovingWall {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.axis >= grid.dim() {
            return Err(config_err(format!("wall axis {} exceeds grid dimension", self.axis)));
        }
        if !(self.depth >= 0.0) {
            return Err(config_err("wall depth must be non-negative"));
        }
        let lo = grid.origin()[self.axis];
        if !(self.position >= lo && self.position <= grid.upper(self.axis)) {
            return Err(config_err(format!("wall at {} lies outside the grid", self.position)));
        }
        Ok(())
    }

    /// Wall speed and velocity gradient at time `t`.
    pub fn kinematics(&self, t: f64) -> (f64, f64) {
        match self.schedule {
            WallSchedule::Constant { speed, gradient } => (speed, gradient),
            WallSchedule::Stretch { rate } => {
                let s = 1.0 + rate * t;
                (rate * self.position / s, rate / s)
            }
        }
    }

    /// Moves the wall by `v_b(t) dt`.
    pub fn advance(&mut self, t: f64, dt: f64) {
        self.position += self.kinematics(t).0 * dt;
    }
}

/// Conditions generated by `wall` at time `t`: massive nodes outside the body
/// and nodes inside it up to the wall depth get
/// `v_i = v_b + ∇v_b (x_i - x_wall)` along the wall axis.
pub fn project_moving_wall(wall: &MovingWall, grid: &Grid, fields: &FieldSet, t: f64) -> Result<Vec<VelocityBc>> {
    wall.validate(grid)?;
    let (speed, gradient) = wall.kinematics(t);
    let h = grid.cell_size()[wall.axis];
    let mut dir = Vec2::zeros();
    dir[wall.axis] = 1.0;
    let mut out = Vec::new();
    for node in 0..grid.num_nodes() {
        if !fields.fields.iter().any(|f| f.active[node]) {
            continue;
        }
        let x = grid.node_position(node)[wall.axis];
        let inside = match wall.side {
            WallSide::Low => x - wall.position,
            WallSide::High => wall.position - x,
        };
        if inside <= wall.depth * h + 1e-12 * h {
            out.push(VelocityBc { node, direction: dir, speed: speed + gradient * (x - wall.position) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NodalField;

    fn one_node_fields(v: Vec2) -> (FieldSet, Vec<Vec<Vec2>>) {
        let mut f = FieldSet::new(1, 1);
        f.fields[0] = NodalField::new(1);
        f.fields[0].mass[0] = 2.0;
        f.fields[0].active[0] = true;
        (f, vec![vec![v]])
    }

    #[test]
    fn single_condition_replaces_component() {
        let (f, mut v) = one_node_fields(Vec2::new(5.0, 2.0));
        let bcs = BcSet::new(vec![VelocityBc::new(0, Vec2::x(), 3.0).unwrap()]).unwrap();
        let imp = apply_lumped_bcs(&mut v, &f, &bcs);
        assert_eq!(v[0][0], Vec2::new(3.0, 2.0));
        assert_eq!(imp, Vec2::new(-4.0, 0.0));
    }

    #[test]
    fn perpendicular_pair_and_order_independence() {
        let a = VelocityBc::new(0, Vec2::x(), 1.0).unwrap();
        let b = VelocityBc::new(0, Vec2::y(), -1.0).unwrap();
        let (f, mut v) = one_node_fields(Vec2::new(7.0, 7.0));
        apply_lumped_bcs(&mut v, &f, &BcSet::new(vec![a, b]).unwrap());
        assert_eq!(v[0][0], Vec2::new(1.0, -1.0));
        // Rotated perpendicular pair, both orders.
        let s = 0.5f64.sqrt();
        let c = VelocityBc::new(0, Vec2::new(s, s), 0.3).unwrap();
        let d = VelocityBc::new(0, Vec2::new(-s, s), 1.7).unwrap();
        let (f, mut v1) = one_node_fields(Vec2::new(-2.0, 4.0));
        let mut v2 = v1.clone();
        apply_lumped_bcs(&mut v1, &f, &BcSet { conditions: vec![c, d] });
        apply_lumped_bcs(&mut v2, &f, &BcSet { conditions: vec![d, c] });
        assert!((v1[0][0] - v2[0][0]).norm() < 1e-14);
        assert!((v1[0][0].dot(&c.direction) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn parallel_pair_superposes() {
        let a = VelocityBc::new(0, Vec2::x(), 1.0).unwrap();
        let b = VelocityBc::new(0, Vec2::x(), 2.5).unwrap();
        let bcs = BcSet::new(vec![a, b]).unwrap();
        let (f, mut v) = one_node_fields(Vec2::new(9.0, 1.0));
        apply_lumped_bcs(&mut v, &f, &bcs);
        assert_eq!(v[0][0], Vec2::new(3.5, 1.0));
        assert!(max_bc_violation(&v, &f, &bcs) < 1e-15);
    }

    #[test]
    fn oblique_pair_is_rejected() {
        let a = VelocityBc::new(0, Vec2::x(), 1.0).unwrap();
        let b = VelocityBc::new(0, Vec2::new(1.0, 1.0), 1.0).unwrap();
        assert!(BcSet::new(vec![a, b]).is_err());
        assert!(VelocityBc::new(0, Vec2::zeros(), 1.0).is_err());
    }

    #[test]
    fn increments_lose_constrained_components() {
        let bcs = BcSet::new(vec![VelocityBc::new(0, Vec2::x(), 3.0).unwrap()]).unwrap();
        let mut dv = vec![vec![Vec2::new(4.0, 1.0)]];
        zero_bc_increment(&mut dv, &bcs);
        assert_eq!(dv[0][0], Vec2::new(0.0, 1.0));
        zero_bc_increment(&mut dv, &bcs);
        assert_eq!(dv[0][0], Vec2::new(0.0, 1.0));
    }

    fn massive_grid() -> (Grid, FieldSet) {
        let g = Grid::new_1d(0.0, 0.5, 11).unwrap();
        let mut f = FieldSet::new(1, g.num_nodes());
        for i in 2..9 {
            f.fields[0].mass[i] = 1.0;
            f.fields[0].active[i] = true;
        }
        (g, f)
    }

    #[test]
    fn wall_projection_formula() {
        let (g, f) = massive_grid();
        let wall = MovingWall {
            position: 1.5,
            axis: 0,
            side: WallSide::Low,
            depth: 1.0,
            schedule: WallSchedule::Constant { speed: 1.0, gradient: 0.1 },
        };
        let bcs = project_moving_wall(&wall, &g, &f, 0.0).unwrap();
        // Massive nodes at x = 1.0, 1.5 outside or on the wall, 2.0 inside within one cell.
        let nodes: Vec<usize> = bcs.iter().map(|b| b.node).collect();
        assert_eq!(nodes, vec![2, 3, 4]);
        assert!((bcs[0].speed - 0.95).abs() < 1e-15);
        assert_eq!(bcs[1].speed, 1.0);
    }

    #[test]
    fn stretch_schedule_is_homogeneous() {
        let (g, f) = massive_grid();
        let rate = 0.01;
        let mut wall = MovingWall {
            position: 4.0,
            axis: 0,
            side: WallSide::High,
            depth: 1.0,
            schedule: WallSchedule::Stretch { rate },
        };
        let t = 3.0;
        wall.position *= 1.0 + rate * t;
        for b in project_moving_wall(&wall, &g, &f, t).unwrap() {
            let x = g.node_position(b.node).x;
            assert!((b.speed - rate * x / (1.0 + rate * t)).abs() < 1e-15);
        }
        let before = wall.position;
        wall.advance(t, 0.5);
        assert!((wall.position - before - rate * 4.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn wall_outside_grid_is_an_error() {
        let (g, f) = massive_grid();
        let wall = MovingWall {
            position: 9.0,
            axis: 0,
            side: WallSide::High,
            depth: 1.0,
            schedule: WallSchedule::Constant { speed: 0.0, gradient: 0.0 },
        };
        assert!(project_moving_wall(&wall, &g, &f, 0.0).is_err());
    }
}
