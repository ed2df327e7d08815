//! Freely vibrating 1D bar fixed at `x = 0`, used for energy closure and
//! Courant stability limits.

use super::config::BenchConfig;
use super::{fill_box, is_instability};
use crate::boundary::{nodes_on_plane, BcSet, VelocityBc};
use crate::error::Result;
use crate::grid::{Grid, Vec2};
use crate::material::MaterialParams;
use crate::stepper::{EnergyCsv, Simulation, StepConfig, UpdateMode};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct VibratingBar {
    pub length: f64,
    pub cell: f64,
    pub particles_per_cell: usize,
    pub material: MaterialParams,
    pub v0: f64,
    pub periods: f64,
    /// A run is unstable once any particle speed reaches this multiple of `v0`.
    pub blowup_factor: f64,
}

impl Default for VibratingBar {
    fn default() -> Self {
        Self {
            length: 40.0,
            cell: 1.0,
            particles_per_cell: 2,
            material: MaterialParams::elastic_1d(2.0, 0.5).expect("valid constants"),
            v0: 0.16,
            periods: 5.0,
            blowup_factor: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarOutcome {
    pub stable: bool,
    pub steps: usize,
    pub time: f64,
    pub dissipation: f64,
    pub max_speed: f64,
    /// Largest displacement of the free end seen during the run.
    pub max_end_displacement: f64,
}

impl VibratingBar {
    pub fn from_config(cfg: &BenchConfig) -> Result<Self> {
        let mut bar = Self::default();
        bar.material = cfg.apply_material(bar.material)?;
        if let Some(c) = cfg.grid.cell {
            bar.cell = c;
        }
        if let Some(n) = cfg.grid.particles_per_cell {
            bar.particles_per_cell = n;
        }
        if let Some(t) = cfg.run.end_time {
            bar.periods = t / bar.period();
        }
        Ok(bar)
    }

    pub fn wave_speed(&self) -> f64 {
        self.material.wave_speed()
    }

    pub fn period(&self) -> f64 {
        4.0 * self.length / self.wave_speed()
    }

    /// Peak free-end displacement of the exact linear solution.
    pub fn max_displacement(&self) -> f64 {
        2.0 * self.length * self.v0 / (std::f64::consts::PI * self.wave_speed())
    }

    pub fn build(&self, step: StepConfig) -> Result<Simulation> {
        let margin = 2.0 * self.cell;
        let grid =
            Grid::covering(1, [-margin, 0.0], [self.length + 4.0 * self.max_displacement() + margin, 0.0], self.cell)?;
        let mut particles =
            fill_box(1, [0.0, 0.0], [self.length, 0.0], self.cell, self.particles_per_cell, self.material.density);
        for p in &mut particles {
            let x = p.position.x;
            p.velocity = Vec2::new(self.v0 * (std::f64::consts::PI * x / (2.0 * self.length)).sin(), 0.0);
        }
        let fixed = ((0.0 - grid.origin()[0]) / self.cell).round() as usize;
        let bcs = nodes_on_plane(&grid, 0, fixed)
            .into_iter()
            .map(|n| VelocityBc::new(n, Vec2::x(), 0.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Simulation::new(grid, particles, vec![self.material], 1, step)?.with_bcs(BcSet::new(bcs)?))
    }

    /// Runs the configured number of periods, optionally streaming energies.
    /// Blowup, inversion or leaving the grid end the run as unstable.
    pub fn run<W: Write>(&self, step: StepConfig, mut csv: Option<&mut EnergyCsv<W>>) -> Result<BarOutcome> {
        let mut sim = self.build(step)?;
        let end = self.periods * self.period();
        let last = sim.particles.len() - 1;
        let x_end0 = sim.particles[last].position.x;
        let limit = self.blowup_factor * self.v0;
        let mut out = BarOutcome {
            stable: true,
            steps: 0,
            time: 0.0,
            dissipation: 0.0,
            max_speed: 0.0,
            max_end_displacement: 0.0,
        };
        let result = sim.run_until(end, |s, r| {
            let speed = s.particles.iter().map(|p| p.velocity.norm()).fold(0.0, f64::max);
            out.steps += 1;
            out.max_speed = out.max_speed.max(speed);
            out.max_end_displacement = out.max_end_displacement.max((s.particles[last].position.x - x_end0).abs());
            if let Some(w) = csv.as_deref_mut() {
                w.record(&s.energies(), r)?;
            }
            let ok = speed.is_finite() && speed < limit;
            out.stable &= ok;
            Ok(ok)
        });
        match result {
            Err(e) if is_instability(&e) => out.stable = false,
            other => other?,
        }
        out.time = sim.time;
        out.dissipation = sim.energies().dissipation;
        if !out.dissipation.is_finite() {
            out.stable = false;
        }
        Ok(out)
    }
}

/// Bisection for the largest stable Courant number in `[lo, hi]`, to within
/// `tol`. Returns 0 when `lo` itself is unstable.
pub fn stability_search(bar: &VibratingBar, step: &StepConfig, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let stable = |c: f64| -> Result<bool> {
        let cfg = StepConfig { courant: c, ..step.clone() };
        Ok(bar.run::<std::io::Sink>(cfg, None)?.stable)
    };
    let (mut lo, mut hi) = (lo, hi);
    if stable(hi)? {
        return Ok(hi);
    }
    if !stable(lo)? {
        log::warn!("unstable at the lower bracket C = {lo}");
        return Ok(0.0);
    }
    while hi - lo > 2.0 * tol {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Step configuration for a named method: FLIP or FMPM of `order`.
pub fn method_config(mode: UpdateMode, order: usize, courant: f64) -> StepConfig {
    let mut cfg = StepConfig { courant, mode, ..StepConfig::default() };
    cfg.fmpm.order = order;
    cfg
}
