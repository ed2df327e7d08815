//! Manufactured uniaxial-strain bar driven by moving walls at both ends.
//!
//! The exact motion is `F_xx = 1 + ε̇t` with particle velocities fixed at
//! `ε̇ X_p(0)`, so any change in particle velocity is error.

use super::config::BenchConfig;
use super::fill_box;
use crate::boundary::{MovingWall, WallSchedule, WallSide};
use crate::error::Result;
use crate::grid::{Grid, Vec2};
use crate::material::MaterialParams;
use crate::stepper::{EnergyCsv, Simulation, StepConfig};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct MmsBar {
    pub length: f64,
    pub height: f64,
    pub cell: f64,
    pub particles_per_cell: usize,
    pub material: MaterialParams,
    pub strain_rate: f64,
    pub final_strain: f64,
    /// Wall depth in cells.
    pub wall_depth: f64,
}

impl Default for MmsBar {
    fn default() -> Self {
        Self {
            length: 20.0,
            height: 4.0,
            cell: 0.25,
            particles_per_cell: 2,
            material: MaterialParams::neohookean(0.375, 0.0, 1.0).expect("valid constants"),
            strain_rate: 0.01,
            final_strain: 0.2,
            wall_depth: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsOutcome {
    /// Time-averaged RMS velocity error in percent of `V_end`.
    pub error_percent: f64,
    pub steps: usize,
    /// Mean particle Cauchy `σ_xx` at the end.
    pub final_stress: f64,
    /// Exact `σ_xx` at the end.
    pub exact_stress: f64,
    /// Largest `|v·n - v_b|` over all steps and wall conditions.
    pub max_bc_violation: f64,
    pub v_end: f64,
}

impl MmsBar {
    pub fn from_config(cfg: &BenchConfig) -> Result<Self> {
        let mut bar = Self::default();
        bar.material = cfg.apply_material(bar.material)?;
        if let Some(c) = cfg.grid.cell {
            bar.cell = c;
        }
        if let Some(n) = cfg.grid.particles_per_cell {
            bar.particles_per_cell = n;
        }
        if let Some(d) = cfg.bcs.wall_depth {
            bar.wall_depth = d;
        }
        if let Some(r) = cfg.run.strain_rate {
            bar.strain_rate = r;
        }
        Ok(bar)
    }

    pub fn v_end(&self) -> f64 {
        self.strain_rate * 0.5 * self.length
    }

    pub fn end_time(&self) -> f64 {
        self.final_strain / self.strain_rate
    }

    /// Exact `σ_xx` at engineering strain `e`.
    pub fn exact_stress(&self, e: f64) -> f64 {
        let crate::material::MaterialLaw::Neohookean { shear, .. } = self.material.law else {
            return f64::NAN;
        };
        2.0 * shear * (2.0 + e) * e / (2.0 * (1.0 + e))
    }

    pub fn build(&self, step: StepConfig) -> Result<Simulation> {
        let half = 0.5 * self.length;
        let reach = half * (1.0 + self.final_strain) + 4.0 * self.cell;
        let grid = Grid::covering(2, [-reach, -4.0 * self.cell], [reach, self.height + 4.0 * self.cell], self.cell)?;
        let mut particles =
            fill_box(2, [-half, 0.0], [half, self.height], self.cell, self.particles_per_cell, self.material.density);
        for p in &mut particles {
            p.velocity = Vec2::new(self.strain_rate * p.position.x, 0.0);
        }
        let schedule = WallSchedule::Stretch { rate: self.strain_rate };
        let walls = vec![
            MovingWall { position: -half, axis: 0, side: WallSide::Low, depth: self.wall_depth, schedule },
            MovingWall { position: half, axis: 0, side: WallSide::High, depth: self.wall_depth, schedule },
        ];
        Simulation::new(grid, particles, vec![self.material], 1, step)?.with_walls(walls)
    }

    pub fn run<W: Write>(&self, step: StepConfig, mut csv: Option<&mut EnergyCsv<W>>) -> Result<MmsOutcome> {
        let mut sim = self.build(step)?;
        let v0: Vec<Vec2> = sim.particles.iter().map(|p| p.velocity).collect();
        let n = v0.len() as f64;
        let mut sum_rms = 0.0;
        let mut steps = 0;
        let mut worst: f64 = 0.0;
        sim.run_until(self.end_time(), |s, r| {
            let sq: f64 = s.particles.iter().zip(&v0).map(|(p, v)| (p.velocity - v).norm_squared()).sum();
            sum_rms += (sq / n).sqrt();
            steps += 1;
            worst = worst.max(r.bc_violation);
            if let Some(w) = csv.as_deref_mut() {
                w.record(&s.energies(), r)?;
            }
            Ok(true)
        })?;
        let stress: f64 = sim.particles.iter().map(|p| p.stress[(0, 0)] / p.def_grad.determinant()).sum::<f64>() / n;
        Ok(MmsOutcome {
            error_percent: 100.0 * sum_rms / (steps as f64 * self.v_end()),
            steps,
            final_stress: stress,
            exact_stress: self.exact_stress(self.strain_rate * sim.time),
            max_bc_violation: worst,
            v_end: self.v_end(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution_constants() {
        let bar = MmsBar::default();
        assert!((bar.exact_stress(0.2) - 0.1375).abs() < 1e-15);
        assert!((bar.v_end() - 0.1).abs() < 1e-15);
        assert!((bar.end_time() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn setup_has_walls_on_both_ends() {
        let sim = MmsBar::default().build(StepConfig::default()).unwrap();
        assert_eq!(sim.walls.len(), 2);
        assert_eq!(sim.particles.len(), 160 * 32);
        let p = &sim.particles[0];
        assert!((p.velocity.x - 0.01 * p.position.x).abs() < 1e-15);
    }
}
