//! Split-bar contact checks and the two-block impact used for dynamic order
//! control.
//!
//! The split bar is compressed by a wall moving in from its right end. The
//! same bar is run as one body and as two bodies joined by contact at the
//! split; with stick contact the two runs must agree exactly.

use super::config::BenchConfig;
use super::fill_box;
use crate::boundary::{nodes_on_plane, BcSet, MovingWall, VelocityBc, WallSchedule, WallSide};
use crate::error::{config_err, Result};
use crate::fmpm::DynamicMetric;
use crate::grid::{Grid, Particle, Vec2};
use crate::material::{MaterialParams, Viscosity};
use crate::stepper::{ContactConfig, Simulation, StepConfig};

/// Neohookean with ν = 0.3, ρ = 1 and unit wave speed.
pub fn reduced_material() -> MaterialParams {
    let shear = 1.0 / 3.5;
    MaterialParams::neohookean(shear, 1.5 * shear, 1.0).expect("valid constants")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitBar {
    pub length: f64,
    pub height: f64,
    pub cell: f64,
    pub particles_per_cell: usize,
    pub split_at: f64,
    pub material: MaterialParams,
    /// Wall speed as a fraction of the wave speed.
    pub speed_fraction: f64,
    pub wall_depth: f64,
    pub end_time: f64,
    /// Zero `v_y` on all node rows on or outside the top and bottom faces.
    pub confine: bool,
}

impl Default for SplitBar {
    fn default() -> Self {
        Self {
            length: 50.0,
            height: 2.5,
            cell: 0.5,
            particles_per_cell: 2,
            split_at: 40.0,
            material: reduced_material().with_viscosity(Some(Viscosity::default())),
            speed_fraction: 0.4,
            wall_depth: 1.0,
            end_time: 12.0,
            confine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SplitOutcome {
    /// Largest nodal velocity difference between the two runs over all
    /// steps, relative to the largest single-body nodal speed.
    pub max_velocity_discrepancy: f64,
    /// Largest relative momentum change made by any contact pass.
    pub max_contact_momentum_error: f64,
    /// Largest end-state pressure difference per particle, relative to the
    /// peak single-body pressure.
    pub max_pressure_deviation: f64,
    pub peak_pressure: f64,
    pub steps: usize,
}

impl SplitBar {
    pub fn from_config(cfg: &BenchConfig, scale: f64) -> Result<Self> {
        let mut bar = Self::default();
        bar.material = cfg.apply_material(bar.material)?;
        bar.cell = cfg.grid.cell.unwrap_or(bar.cell / scale);
        if let Some(n) = cfg.grid.particles_per_cell {
            bar.particles_per_cell = n;
        }
        if let Some(d) = cfg.bcs.wall_depth {
            bar.wall_depth = d;
        }
        if let Some(c) = cfg.bcs.confine {
            bar.confine = c;
        }
        if let Some(f) = cfg.run.speed_fraction {
            bar.speed_fraction = f;
        }
        if let Some(t) = cfg.run.end_time {
            bar.end_time = t;
        }
        Ok(bar)
    }

    fn grid(&self) -> Result<Grid> {
        let m = 2.0 * self.cell;
        Grid::covering(2, [-m, -m], [self.length + m, self.height + m], self.cell)
    }

    /// Builds the single-body (`contact = None`) or split simulation.
    pub fn build(&self, step: &StepConfig, contact: Option<ContactConfig>) -> Result<Simulation> {
        let grid = self.grid()?;
        let mut particles = fill_box(
            2,
            [0.0, 0.0],
            [self.length, self.height],
            self.cell,
            self.particles_per_cell,
            self.material.density,
        );
        let fields = if contact.is_some() {
            for p in &mut particles {
                if p.position.x > self.split_at {
                    p.field = 1;
                }
            }
            2
        } else {
            1
        };
        let mut bcs = Vec::new();
        if self.confine {
            // Rigid walls: every node row on or beyond the top and bottom faces.
            let bottom = ((0.0 - grid.origin()[1]) / self.cell).round() as usize;
            let top = ((self.height - grid.origin()[1]) / self.cell).round() as usize;
            let rows = grid.node_counts()[1];
            for row in (0..=bottom).chain(top..rows) {
                for n in nodes_on_plane(&grid, 1, row) {
                    bcs.push(VelocityBc::new(n, Vec2::y(), 0.0)?);
                }
            }
        }
        let wall = MovingWall {
            position: self.length,
            axis: 0,
            side: WallSide::High,
            depth: self.wall_depth,
            schedule: WallSchedule::Constant {
                speed: -self.speed_fraction * self.material.wave_speed(),
                gradient: 0.0,
            },
        };
        let step = StepConfig { contact, ..step.clone() };
        Simulation::new(grid, particles, vec![self.material], fields, step)?
            .with_bcs(BcSet::new(bcs)?)
            .with_walls(vec![wall])
    }

    /// Runs the single-body and split bars in lockstep.
    pub fn compare(&self, step: &StepConfig, contact: ContactConfig) -> Result<SplitOutcome> {
        let mut single = self.build(step, None)?;
        let mut split = self.build(step, Some(contact))?;
        let mut out = SplitOutcome::default();
        let slack = 1e-12 * self.end_time.max(1.0);
        while self.end_time - single.time > slack {
            let dt = single.stable_timestep()?.min(self.end_time - single.time);
            single.usl_step(dt)?;
            let r = split.usl_step(dt)?;
            out.steps += 1;
            out.max_contact_momentum_error = out.max_contact_momentum_error.max(r.contact_momentum_error);
            out.max_velocity_discrepancy = out.max_velocity_discrepancy.max(nodal_discrepancy(&single, &split));
        }
        let pressure = |p: &Particle| -p.stress.trace() / (2.0 * p.def_grad.determinant());
        out.peak_pressure = single.particles.iter().map(|p| pressure(p).abs()).fold(0.0, f64::max);
        if out.peak_pressure > 0.0 {
            out.max_pressure_deviation = single
                .particles
                .iter()
                .zip(&split.particles)
                .map(|(a, b)| (pressure(a) - pressure(b)).abs())
                .fold(0.0, f64::max)
                / out.peak_pressure;
        }
        Ok(out)
    }
}

/// Largest difference between single-body nodal velocities and each active
/// split field, relative to the largest single-body speed.
pub fn nodal_discrepancy(single: &Simulation, split: &Simulation) -> f64 {
    let vs = &single.grid_velocities()[0];
    let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (f, v) in split.fields().fields.iter().zip(split.grid_velocities()) {
        for i in f.active_nodes() {
            worst = worst.max((v[i] - vs[i]).norm());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Two identical blocks approaching each other in one velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactBlocks {
    pub width: f64,
    pub height: f64,
    pub cell: f64,
    pub particles_per_cell: usize,
    /// Initial gap in cells.
    pub gap_cells: f64,
    pub material: MaterialParams,
    /// Speed of each block as a fraction of the wave speed.
    pub speed_fraction: f64,
    /// Run time after the blocks first share grid nodes.
    pub post_impact_time: f64,
}

impl Default for ImpactBlocks {
    fn default() -> Self {
        Self {
            width: 10.0,
            height: 4.0,
            cell: 0.5,
            particles_per_cell: 2,
            gap_cells: 3.0,
            material: reduced_material(),
            speed_fraction: 0.05,
            post_impact_time: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImpactOutcome {
    /// First step whose pass-2 metric exceeds `1e-10`.
    pub impact_step: Option<usize>,
    pub orders: Vec<usize>,
    /// Pass-2 metric per step.
    pub first_metrics: Vec<f64>,
    pub mean_order_after_impact: f64,
    pub max_pre_impact_metric: f64,
    pub dissipation: f64,
}

impl ImpactBlocks {
    pub fn build(&self, step: &StepConfig) -> Result<Simulation> {
        let half_gap = 0.5 * self.gap_cells * self.cell;
        let reach = self.width + half_gap + 4.0 * self.cell;
        let grid = Grid::covering(2, [-reach, -4.0 * self.cell], [reach, self.height + 4.0 * self.cell], self.cell)?;
        let speed = self.speed_fraction * self.material.wave_speed();
        let rho = self.material.density;
        let mut left = fill_box(
            2,
            [-half_gap - self.width, 0.0],
            [-half_gap, self.height],
            self.cell,
            self.particles_per_cell,
            rho,
        );
        let mut right =
            fill_box(2, [half_gap, 0.0], [half_gap + self.width, self.height], self.cell, self.particles_per_cell, rho);
        left.iter_mut().for_each(|p| p.velocity = Vec2::new(speed, 0.0));
        right.iter_mut().for_each(|p| p.velocity = Vec2::new(-speed, 0.0));
        left.extend(right);
        Simulation::new(grid, left, vec![self.material], 1, StepConfig { contact: None, ..step.clone() })
    }

    /// Runs with dynamic order control; `step.fmpm` must name a metric.
    pub fn run(&self, step: &StepConfig) -> Result<ImpactOutcome> {
        if step.fmpm.metric == DynamicMetric::None {
            return Err(config_err("the impact benchmark needs a dynamic metric"));
        }
        let mut sim = self.build(step)?;
        let mut out = ImpactOutcome::default();
        let mut end = f64::INFINITY;
        // Closing speed covers the gap within a bounded time; guard the loop.
        let guard = 10.0 * self.gap_cells * self.cell / (self.speed_fraction * self.material.wave_speed());
        while sim.time < end && sim.time < guard + self.post_impact_time {
            let r = sim.step_toward(end.min(guard + self.post_impact_time))?;
            let m = r.metrics.first().copied().unwrap_or(0.0);
            out.orders.push(r.order);
            out.first_metrics.push(m);
            if out.impact_step.is_none() {
                if m > 1e-10 {
                    out.impact_step = Some(out.orders.len() - 1);
                    end = sim.time + self.post_impact_time;
                } else {
                    out.max_pre_impact_metric = out.max_pre_impact_metric.max(m);
                }
            }
        }
        if let Some(i) = out.impact_step {
            let after = &out.orders[i..];
            out.mean_order_after_impact = after.iter().sum::<usize>() as f64 / after.len() as f64;
        }
        out.dissipation = sim.energies().dissipation;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::ContactLaw;
    use crate::fmpm::FmpmOptions;

    #[test]
    fn reduced_material_has_unit_wave_speed() {
        assert!((reduced_material().wave_speed() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn short_stick_run_reverts_to_single_body() {
        let bar = SplitBar { length: 10.0, split_at: 6.0, end_time: 1.5, ..SplitBar::default() };
        let step = StepConfig { fmpm: FmpmOptions::with_order(4), ..StepConfig::default() };
        let contact = ContactConfig { law: ContactLaw::STICK, ..ContactConfig::default() };
        let out = bar.compare(&step, contact).unwrap();
        assert!(out.steps > 0);
        assert!(out.max_velocity_discrepancy < 1e-10, "{}", out.max_velocity_discrepancy);
        assert!(out.max_contact_momentum_error < 1e-12);
    }

    #[test]
    fn blocks_build_with_gap() {
        let b = ImpactBlocks::default();
        let sim = b.build(&StepConfig::default()).unwrap();
        assert_eq!(sim.particles.len(), 2 * 20 * 8 * 4);
        let gap = sim.particles.iter().filter(|p| p.position.x > 0.0).map(|p| p.position.x).fold(f64::MAX, f64::min);
        assert!((gap - (0.75 + 0.125)).abs() < 1e-12);
    }
}
