//! Oblique impact of two elastic disks (mm, ms, g units).

use super::config::BenchConfig;
use super::{centre_of_mass, fill_disk};
use crate::contact::ContactLaw;
use crate::error::Result;
use crate::grid::{Grid, Vec2};
use crate::material::MaterialParams;
use crate::stepper::{fmt_f64, ContactConfig, Simulation, StepConfig};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct DiskImpact {
    pub radius: f64,
    /// Centre of the disk moving in `+x`; the other sits at the mirror point.
    pub center: Vec2,
    pub speed: f64,
    pub cell: f64,
    pub particles_per_cell: usize,
    pub material: MaterialParams,
    pub end_time: f64,
}

impl Default for DiskImpact {
    fn default() -> Self {
        Self::at_scale(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSample {
    pub time: f64,
    pub x: [Vec2; 2],
    pub v: [Vec2; 2],
    pub kinetic: f64,
    pub work: f64,
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskOutcome {
    pub steps: usize,
    /// Mean absolute turn of the two centre-of-mass velocities, degrees.
    pub deflection_deg: f64,
    pub dissipation: f64,
    pub final_sample: DiskSample,
}

impl DiskImpact {
    /// Cell size `1/(3·scale)` mm; scale 1 is the fine reference resolution.
    pub fn at_scale(scale: f64) -> Self {
        Self {
            radius: 10.0,
            center: Vec2::new(-11.0, -8.0),
            speed: 81.65,
            cell: 1.0 / (3.0 * scale),
            particles_per_cell: 2,
            material: MaterialParams::from_young(1000.0, 0.33, 1.5e-3).expect("valid constants"),
            end_time: 0.16,
        }
    }

    pub fn from_config(cfg: &BenchConfig, scale: f64) -> Result<Self> {
        let mut d = Self::at_scale(scale);
        d.material = cfg.apply_material(d.material)?;
        if let Some(c) = cfg.grid.cell {
            d.cell = c;
        }
        if let Some(n) = cfg.grid.particles_per_cell {
            d.particles_per_cell = n;
        }
        if let Some(t) = cfg.run.end_time {
            d.end_time = t;
        }
        Ok(d)
    }

    pub fn build(&self, step: &StepConfig, law: ContactLaw) -> Result<Simulation> {
        let travel = self.speed * self.end_time;
        let reach_x = self.center.x.abs() + self.radius + travel + 4.0 * self.cell;
        let reach_y = self.center.y.abs() + self.radius + 0.5 * travel + 4.0 * self.cell;
        let grid = Grid::covering(2, [-reach_x, -reach_y], [reach_x, reach_y], self.cell)?;
        let rho = self.material.density;
        let mut a = fill_disk(self.center, self.radius, self.cell, self.particles_per_cell, rho);
        let mut b = fill_disk(-self.center, self.radius, self.cell, self.particles_per_cell, rho);
        a.iter_mut().for_each(|p| p.velocity = Vec2::new(self.speed, 0.0));
        for p in &mut b {
            p.velocity = Vec2::new(-self.speed, 0.0);
            p.field = 1;
        }
        a.extend(b);
        let contact = step.contact.unwrap_or_default();
        let step = StepConfig { contact: Some(ContactConfig { law, ..contact }), ..step.clone() };
        Simulation::new(grid, a, vec![self.material], 2, step)
    }

    fn sample(sim: &Simulation) -> DiskSample {
        let (xa, va) = centre_of_mass(sim.particles.iter().filter(|p| p.field == 0));
        let (xb, vb) = centre_of_mass(sim.particles.iter().filter(|p| p.field == 1));
        let e = sim.energies();
        DiskSample {
            time: sim.time,
            x: [xa, xb],
            v: [va, vb],
            kinetic: e.kinetic,
            work: e.work,
            dissipation: e.dissipation,
        }
    }

    /// Runs to the end time; `csv` receives one trajectory row per step.
    pub fn run<W: Write>(&self, step: &StepConfig, law: ContactLaw, csv: Option<W>) -> Result<DiskOutcome> {
        let mut sim = self.build(step, law)?;
        let start = Self::sample(&sim);
        let mut writer = csv.map(csv::Writer::from_writer);
        if let Some(w) = writer.as_mut() {
            w.write_record([
                "time",
                "xa",
                "ya",
                "xb",
                "yb",
                "vxa",
                "vya",
                "vxb",
                "vyb",
                "kinetic",
                "work",
                "dissipation",
            ])?;
            write_sample(w, &start)?;
        }
        let mut steps = 0;
        sim.run_until(self.end_time, |s, _| {
            steps += 1;
            if let Some(w) = writer.as_mut() {
                write_sample(w, &Self::sample(s))?;
            }
            Ok(true)
        })?;
        if let Some(mut w) = writer {
            w.flush()?;
        }
        let end = Self::sample(&sim);
        let turn = |a: Vec2, b: Vec2| (a.x * b.y - a.y * b.x).atan2(a.dot(&b)).abs().to_degrees();
        Ok(DiskOutcome {
            steps,
            deflection_deg: 0.5 * (turn(start.v[0], end.v[0]) + turn(start.v[1], end.v[1])),
            dissipation: end.dissipation,
            final_sample: end,
        })
    }
}

fn write_sample<W: Write>(w: &mut csv::Writer<W>, s: &DiskSample) -> Result<()> {
    let vals = [
        s.time,
        s.x[0].x,
        s.x[0].y,
        s.x[1].x,
        s.x[1].y,
        s.v[0].x,
        s.v[0].y,
        s.v[1].x,
        s.v[1].y,
        s.kinetic,
        s.work,
        s.dissipation,
    ];
    w.write_record(vals.iter().map(|&v| fmt_f64(v)))?;
    Ok(())
}
