//! Update-stress-last time step, particle updates and energy accounting.

use crate::boundary::{max_bc_violation, project_moving_wall, BcHook, BcSet, MovingWall};
use crate::contact::{apply_lumped_contact_momentum, contact_geometry, ContactHook, ContactLaw, IncrementalMethod};
use crate::error::{config_err, MpmError, Result};
use crate::exec::ExecMode;
use crate::fmpm::{fmpm_velocity, periodic_schedule, FmpmHook, FmpmOptions, NoHook};
use crate::grid::{scatter_forces, scatter_mass_momentum, FieldSet, Grid, Mat2, Particle, Vec2};
use crate::material::{update_deformation, MaterialParams};
use crate::shape::{sample_shapes_into, ShapeKind, ShapeSample};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    Flip,
    #[default]
    Fmpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactConfig {
    pub law: ContactLaw,
    pub method: IncrementalMethod,
    /// Separation offset in cells.
    pub offset_cells: f64,
    /// Nodes where either field holds less than this share of the mass skip
    /// the separation test.
    pub min_mass_fraction: f64,
}

impl Default for ContactConfig {
    fn default() -> Self {
        Self {
            law: ContactLaw::FRICTIONLESS,
            method: IncrementalMethod::Net,
            offset_cells: 0.8,
            min_mass_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub courant: f64,
    pub mode: UpdateMode,
    /// Time-integration parameter α of the particle position update.
    pub alpha: f64,
    pub fmpm: FmpmOptions,
    pub body_force: Vec2,
    pub shape: ShapeKind,
    pub contact: Option<ContactConfig>,
    pub exec: ExecMode,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            courant: 0.2,
            mode: UpdateMode::Fmpm,
            alpha: 0.5,
            fmpm: FmpmOptions::default(),
            body_force: Vec2::zeros(),
            shape: ShapeKind::Ugimp,
            contact: None,
            exec: ExecMode::Serial,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.courant > 0.0) {
            return Err(config_err("Courant number must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(config_err("update α must lie in [0, 1]"));
        }
        if let Some(c) = &self.contact {
            if !(c.law.friction >= 0.0) {
                return Err(config_err("friction coefficient must be non-negative"));
            }
            if !(0.0..0.5).contains(&c.min_mass_fraction) {
                return Err(config_err("minimum contact mass fraction must lie in [0, 0.5)"));
            }
        }
        self.fmpm.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub time: f64,
    pub kinetic: f64,
    pub work: f64,
    pub total: f64,
    /// `1 - (K + W)/(K₀ + W₀)`; positive is loss.
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub dt: f64,
    pub used_fmpm: bool,
    pub order: usize,
    /// Dynamic metric per pass ℓ ≥ 2.
    pub metrics: Vec<f64>,
    pub contact_nodes: usize,
    pub max_normal_traction: f64,
    /// Largest relative momentum change made by a contact pass.
    pub contact_momentum_error: f64,
    pub bc_count: usize,
    pub bc_violation: f64,
    /// Lumped reaction force of the boundary conditions.
    pub bc_reaction: Vec2,
    pub wall_seconds: f64,
}

/// Stable time step `C Δx_min / max(wave speed, max |V_p|)`.
pub fn compute_timestep(
    courant: f64,
    grid: &Grid,
    materials: &[MaterialParams],
    particles: &[Particle],
) -> Result<f64> {
    let wave = materials.iter().map(|m| m.wave_speed()).fold(0.0, f64::max);
    let vmax = particles.iter().map(|p| p.velocity.norm()).fold(0.0, f64::max);
    let speed = wave.max(vmax);
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(config_err("time step needs a positive, finite wave or particle speed"));
    }
    Ok(courant * grid.min_cell_size() / speed)
}

/// `Σ_i v_i ⊗ ∇S_pi`.
pub fn velocity_gradient(sample: &ShapeSample, velocities: &[Vec2]) -> Mat2 {
    sample.gradient(velocities)
}

/// FLIP update: `V += S a dt`, `X += S v⁺ dt - (1-α) S a dt²`.
pub fn flip_update(
    particle: &mut Particle,
    sample: &ShapeSample,
    v_plus: &[Vec2],
    accel: &[Vec2],
    dt: f64,
    alpha: f64,
) {
    let a = sample.interpolate(accel);
    let v = sample.interpolate(v_plus);
    particle.velocity += a * dt;
    particle.position += v * dt - a * ((1.0 - alpha) * dt * dt);
}

/// PIC-style update: `V = S v⁺`, `X += (α V_new + (1-α) V_old) dt`.
pub fn fmpm_update(particle: &mut Particle, sample: &ShapeSample, v_plus: &[Vec2], dt: f64, alpha: f64) {
    let v_new = sample.interpolate(v_plus);
    particle.position += (v_new * alpha + particle.velocity * (1.0 - alpha)) * dt;
    particle.velocity = v_new;
}

/// Contact hook wrapper auditing momentum across each pass.
struct Audited<'a, 'b> {
    inner: ContactHook<'b>,
    masses: &'a FieldSet,
    worst: f64,
}

impl Audited<'_, '_> {
    fn momentum(&self, v: &[Vec<Vec2>]) -> (Vec2, f64) {
        let mut total = Vec2::zeros();
        let mut scale = 0.0;
        for c in self.inner.nodes.iter() {
            for a in [c.field_a, c.field_b] {
                let p = v[a][c.node] * self.masses.fields[a].mass[c.node];
                total += p;
                scale += p.norm();
            }
        }
        (total, scale)
    }

    fn audit(&mut self, before: (Vec2, f64), v: &[Vec<Vec2>]) {
        let after = self.momentum(v).0;
        if before.1 > 0.0 {
            self.worst = self.worst.max((after - before.0).norm() / before.1);
        }
    }
}

impl FmpmHook for Audited<'_, '_> {
    fn initial(&mut self, v: &mut [Vec<Vec2>]) -> Result<()> {
        let before = self.momentum(v);
        self.inner.initial(v)?;
        self.audit(before, v);
        Ok(())
    }

    fn increment(&mut self, pass: usize, dv: &mut [Vec<Vec2>]) -> Result<()> {
        let before = self.momentum(dv);
        self.inner.increment(pass, dv)?;
        self.audit(before, dv);
        Ok(())
    }
}

/// Complete simulation state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub particles: Vec<Particle>,
    pub materials: Vec<MaterialParams>,
    pub config: StepConfig,
    pub static_bcs: BcSet,
    pub walls: Vec<MovingWall>,
    pub time: f64,
    pub step_index: usize,
    /// Accumulated elastic strain work.
    pub work: f64,
    initial_energy: f64,
    fields: FieldSet,
    shapes: Vec<ShapeSample>,
    velocities: Vec<Vec<Vec2>>,
    bcs: BcSet,
    pub last: StepReport,
}

impl Simulation {
    pub fn new(
        grid: Grid,
        particles: Vec<Particle>,
        materials: Vec<MaterialParams>,
        num_fields: usize,
        config: StepConfig,
    ) -> Result<Self> {
        config.validate()?;
        if num_fields < 1 {
            return Err(config_err("need at least one velocity field"));
        }
        if num_fields > 1 && config.contact.is_none() {
            return Err(config_err("several velocity fields need a contact law"));
        }
        let mut particles = particles;
        for (i, p) in particles.iter_mut().enumerate() {
            if !(p.mass > 0.0 && p.volume0 > 0.0) {
                return Err(config_err(format!("particle {i} needs positive mass and volume")));
            }
            if p.field >= num_fields {
                return Err(config_err(format!("particle {i} references field {}", p.field)));
            }
            let m = materials
                .get(p.material)
                .ok_or_else(|| config_err(format!("particle {i} references material {}", p.material)))?;
            p.stress = m.kirchhoff(&p.def_grad).map_err(|e| tag_particle(e, i))?;
        }
        let n = grid.num_nodes();
        let mut sim = Self {
            fields: FieldSet::new(num_fields, n),
            velocities: vec![vec![Vec2::zeros(); n]; num_fields],
            shapes: Vec::new(),
            grid,
            particles,
            materials,
            config,
            static_bcs: BcSet::default(),
            walls: Vec::new(),
            time: 0.0,
            step_index: 0,
            work: 0.0,
            initial_energy: 0.0,
            bcs: BcSet::default(),
            last: StepReport::default(),
        };
        sim.initial_energy = sim.kinetic_energy();
        Ok(sim)
    }

    pub fn with_bcs(mut self, bcs: BcSet) -> Self {
        self.static_bcs = bcs;
        self
    }

    pub fn with_walls(mut self, walls: Vec<MovingWall>) -> Result<Self> {
        for w in &walls {
            w.validate(&self.grid)?;
        }
        self.walls = walls;
        Ok(self)
    }

    pub fn fields(&self) -> &FieldSet {
        &self.fields
    }

    /// Grid velocities `v⁺` of the last step, per field.
    pub fn grid_velocities(&self) -> &[Vec<Vec2>] {
        &self.velocities
    }

    /// Boundary conditions active during the last step.
    pub fn active_bcs(&self) -> &BcSet {
        &self.bcs
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles.iter().map(Particle::kinetic_energy).sum()
    }

    pub fn energies(&self) -> EnergyReport {
        let kinetic = self.kinetic_energy();
        let total = kinetic + self.work;
        let dissipation = if self.initial_energy > 0.0 { 1.0 - total / self.initial_energy } else { 0.0 };
        EnergyReport { time: self.time, kinetic, work: self.work, total, dissipation }
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.particles.iter().map(|p| p.velocity * p.mass).sum()
    }

    pub fn stable_timestep(&self) -> Result<f64> {
        compute_timestep(self.config.courant, &self.grid, &self.materials, &self.particles)
    }

    fn sample_all(&mut self) -> Result<()> {
        let (kind, grid) = (self.config.shape, &self.grid);
        self.shapes.resize_with(self.particles.len(), ShapeSample::default);
        let one = |(i, (p, s)): (usize, (&Particle, &mut ShapeSample))| sample_shapes_into(kind, grid, i, p, s);
        match self.config.exec {
            ExecMode::Serial => self.particles.iter().zip(self.shapes.iter_mut()).enumerate().try_for_each(one),
            ExecMode::Parallel => {
                self.particles.par_iter().zip(self.shapes.par_iter_mut()).enumerate().try_for_each(one)
            }
        }
    }

    /// Advances one step of size `dt`.
    pub fn usl_step(&mut self, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config_err(format!("invalid time step {dt}")));
        }
        let started = Instant::now();
        let exec = self.config.exec;
        let mut report = StepReport { dt, ..StepReport::default() };

        self.sample_all()?;
        scatter_mass_momentum(&self.particles, &self.shapes, &mut self.fields, exec)?;

        let mut generated = Vec::new();
        for wall in &self.walls {
            generated.extend(project_moving_wall(wall, &self.grid, &self.fields, self.time)?);
        }
        self.bcs = if generated.is_empty() {
            self.static_bcs.clone()
        } else {
            self.static_bcs.union(&BcSet::new(generated)?)?
        };
        report.bc_count = self.bcs.len();

        let contact_cfg = self.config.contact.filter(|_| self.fields.fields.len() > 1);
        let mut contact_nodes = match &contact_cfg {
            Some(c) => {
                let mut nodes = contact_geometry(&self.grid, &self.fields, c.offset_cells, c.min_mass_fraction)?;
                apply_lumped_contact_momentum(&mut nodes, &mut self.fields, &c.law, dt);
                nodes
            }
            None => Vec::new(),
        };
        let v_lumped: Vec<Vec<Vec2>> = self.fields.fields.iter().map(|f| f.lumped_velocity()).collect();

        scatter_forces(&self.particles, &self.shapes, self.config.body_force, &mut self.fields, exec)?;
        for f in &mut self.fields.fields {
            for i in 0..f.mass.len() {
                if f.active[i] {
                    f.momentum[i] += f.force[i] * dt;
                }
            }
        }

        let use_fmpm = self.config.mode == UpdateMode::Fmpm
            && periodic_schedule(self.step_index, self.config.courant, self.config.fmpm.periodic_cx);
        let options = if use_fmpm { self.config.fmpm } else { FmpmOptions { order: 1, ..self.config.fmpm } };
        let mut bc_hook = BcHook::new(&self.bcs, &self.fields);
        let solution = match &contact_cfg {
            Some(c) => {
                let mut hook = Audited {
                    inner: ContactHook::new(&mut contact_nodes, c.law, c.method, dt),
                    masses: &self.fields,
                    worst: 0.0,
                };
                let s = fmpm_velocity(
                    &self.fields,
                    &self.particles,
                    &self.shapes,
                    &options,
                    &mut bc_hook,
                    &mut hook,
                    exec,
                )?;
                report.contact_nodes = hook.inner.in_contact;
                report.max_normal_traction = hook.inner.max_normal_traction;
                report.contact_momentum_error = hook.worst;
                s
            }
            None => {
                fmpm_velocity(&self.fields, &self.particles, &self.shapes, &options, &mut bc_hook, &mut NoHook, exec)?
            }
        };
        report.bc_reaction = bc_hook.impulse / dt;
        report.used_fmpm = use_fmpm;
        report.order = solution.order;
        report.metrics = solution.metrics;
        self.velocities = solution.velocities;
        report.bc_violation = max_bc_violation(&self.velocities, &self.fields, &self.bcs);

        let accel: Vec<Vec<Vec2>> = if use_fmpm {
            Vec::new()
        } else {
            self.velocities
                .iter()
                .zip(&v_lumped)
                .map(|(vp, v1)| vp.iter().zip(v1).map(|(a, b)| (a - b) / dt).collect())
                .collect()
        };
        let alpha = self.config.alpha;
        let dx = self.grid.min_cell_size();
        let (velocities, shapes, materials) = (&self.velocities, &self.shapes, &self.materials);
        let update = |(i, p): (usize, &mut Particle)| -> Result<f64> {
            let s = &shapes[i];
            let v = &velocities[p.field];
            if use_fmpm {
                fmpm_update(p, s, v, dt, alpha);
            } else {
                flip_update(p, s, v, &accel[p.field], dt, alpha);
            }
            let l = velocity_gradient(s, v);
            let d = (l + l.transpose()) * 0.5;
            let m = &materials[p.material];
            p.def_grad = update_deformation(&p.def_grad, &l, dt);
            let tau_new = m.kirchhoff(&p.def_grad).map_err(|e| tag_particle(e, i))?;
            let dw = p.volume0 * 0.5 * (p.stress + tau_new).dot(&d) * dt;
            p.stress = tau_new;
            p.visc_pressure = m.viscous_pressure(d.trace(), dx);
            Ok(dw)
        };
        let dw: f64 = match exec {
            ExecMode::Serial => self.particles.iter_mut().enumerate().map(update).sum::<Result<f64>>()?,
            ExecMode::Parallel => {
                // Collect then sum in index order to keep the total reproducible.
                let parts: Vec<Result<f64>> = self.particles.par_iter_mut().enumerate().map(update).collect();
                parts.into_iter().sum::<Result<f64>>()?
            }
        };
        self.work += dw;

        for wall in &mut self.walls {
            wall.advance(self.time, dt);
        }
        self.time += dt;
        self.step_index += 1;
        report.wall_seconds = started.elapsed().as_secs_f64();
        log::debug!(
            "step {} t={:.6e} dt={:.3e} order={} wall={:.3}ms",
            self.step_index,
            self.time,
            dt,
            report.order,
            1e3 * report.wall_seconds
        );
        self.last = report.clone();
        Ok(report)
    }

    /// One step at the stable time step, clamped so as not to pass `t_end`.
    pub fn step_toward(&mut self, t_end: f64) -> Result<StepReport> {
        let dt = self.stable_timestep()?.min(t_end - self.time);
        self.usl_step(dt)
    }

    /// Steps until `t_end`, calling `observe` after each step. Stops early
    /// when `observe` returns `false`.
    pub fn run_until<F>(&mut self, t_end: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Simulation, &StepReport) -> Result<bool>,
    {
        let slack = 1e-12 * t_end.abs().max(1.0);
        while t_end - self.time > slack {
            let r = self.step_toward(t_end)?;
            if !observe(self, &r)? {
                break;
            }
        }
        Ok(())
    }
}

fn tag_particle(err: MpmError, index: usize) -> MpmError {
    match err {
        MpmError::ElementInversion { det, .. } => MpmError::ElementInversion { particle: index, det },
        other => other,
    }
}

/// Per-step energy stream: time, K, W, K+W, dissipation, FMPM order,
/// contact node count.
pub struct EnergyCsv<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> EnergyCsv<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(["time", "kinetic", "work", "total", "dissipation", "order", "contact_nodes"])?;
        Ok(Self { writer })
    }

    pub fn record(&mut self, e: &EnergyReport, r: &StepReport) -> Result<()> {
        self.writer.write_record([
            fmt_f64(e.time),
            fmt_f64(e.kinetic),
            fmt_f64(e.work),
            fmt_f64(e.total),
            fmt_f64(e.dissipation),
            r.order.to_string(),
            r.contact_nodes.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        self.writer.into_inner().map_err(|e| MpmError::Io(e.into_error()))
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar_particle(x: f64, v: f64) -> Particle {
        Particle::new(0.25, Vec2::new(x, 0.0), Vec2::new(v, 0.0), 0.5, Vec2::new(0.25, 0.0))
    }

    fn sim_1d(particles: Vec<Particle>, mode: UpdateMode, order: usize) -> Simulation {
        let grid = Grid::new_1d(-2.0, 1.0, 20).unwrap();
        let mat = MaterialParams::elastic_1d(2.0, 0.5).unwrap();
        let cfg = StepConfig { mode, fmpm: FmpmOptions::with_order(order), ..StepConfig::default() };
        Simulation::new(grid, particles, vec![mat], 1, cfg).unwrap()
    }

    #[test]
    fn timestep_formula() {
        let grid = Grid::new_1d(0.0, 0.25, 10).unwrap();
        let mat = MaterialParams::elastic_1d(2.0, 0.5).unwrap();
        let ps = vec![bar_particle(1.0, 0.16)];
        let dt = compute_timestep(0.2, &grid, &[mat], &ps).unwrap();
        assert!((dt - 0.025).abs() < 1e-15);
        assert!((compute_timestep(0.4, &grid, &[mat], &ps).unwrap() - 2.0 * dt).abs() < 1e-15);
        let fast = vec![bar_particle(1.0, 5.0)];
        assert!((compute_timestep(0.2, &grid, &[mat], &fast).unwrap() - 0.01).abs() < 1e-15);
        assert!(compute_timestep(0.2, &grid, &[], &[]).is_err());
    }

    #[test]
    fn gradient_of_linear_field() {
        let grid = Grid::new_1d(0.0, 1.0, 2).unwrap();
        let p = Particle::new(1.0, Vec2::new(0.5, 0.0), Vec2::zeros(), 1.0, Vec2::zeros());
        let s = crate::shape::sample_shapes(ShapeKind::Linear, &grid, 0, &p).unwrap();
        let l = velocity_gradient(&s, &[Vec2::zeros(), Vec2::new(1.0, 0.0)]);
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(velocity_gradient(&s, &[Vec2::new(3.0, 1.0); 2]), Mat2::zeros());
    }

    #[test]
    fn particle_update_formulas() {
        let grid = Grid::new_1d(0.0, 1.0, 2).unwrap();
        let mut p = Particle::new(1.0, Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 1.0, Vec2::zeros());
        let s = crate::shape::sample_shapes(ShapeKind::Linear, &grid, 0, &p).unwrap();
        let v = [Vec2::new(2.0, 0.0); 2];
        let a = [Vec2::new(4.0, 0.0); 2];
        let mut q = p.clone();
        flip_update(&mut p, &s, &v, &a, 0.1, 0.5);
        flip_update(&mut q, &s, &v, &a, 0.1, 1.0);
        assert!((p.velocity.x - 1.4).abs() < 1e-15);
        assert!((q.position.x - p.position.x - 0.5 * 4.0 * 0.01).abs() < 1e-15);
        let mut r = Particle::new(1.0, Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 1.0, Vec2::zeros());
        fmpm_update(&mut r, &s, &[Vec2::zeros(); 2], 0.1, 0.5);
        assert_eq!(r.velocity, Vec2::zeros());
        assert!((r.position.x - 0.55).abs() < 1e-15);
    }

    #[test]
    fn rigid_translation_is_preserved() {
        for (mode, k) in [(UpdateMode::Flip, 1), (UpdateMode::Fmpm, 1), (UpdateMode::Fmpm, 6)] {
            let ps: Vec<_> = (0..12).map(|i| bar_particle(2.25 + 0.5 * i as f64, 0.3)).collect();
            let mut sim = sim_1d(ps, mode, k);
            for _ in 0..20 {
                sim.usl_step(0.05).unwrap();
            }
            for p in &sim.particles {
                assert!((p.velocity.x - 0.3).abs() < 1e-12, "{mode:?} {k}");
                assert!((p.def_grad[(0, 0)] - 1.0).abs() < 1e-12);
            }
            assert!((sim.time - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_state_is_unchanged() {
        let ps: Vec<_> = (0..6).map(|i| bar_particle(2.25 + 0.5 * i as f64, 0.0)).collect();
        let mut sim = sim_1d(ps.clone(), UpdateMode::Fmpm, 4);
        sim.usl_step(0.1).unwrap();
        assert_eq!(sim.particles, ps);
    }

    #[test]
    fn two_particle_compression_matches_hand_chain() {
        // Linear shapes, particles at 0.25 and 0.75 of cell [0, 1] on grid 0..3,
        // velocities ±1, no stress: one FLIP step by hand.
        let grid = Grid::new_1d(0.0, 1.0, 4).unwrap();
        let mat = MaterialParams::elastic_1d(2.0, 0.5).unwrap();
        let ps = vec![
            Particle::new(1.0, Vec2::new(1.25, 0.0), Vec2::new(1.0, 0.0), 1.0, Vec2::zeros()),
            Particle::new(1.0, Vec2::new(1.75, 0.0), Vec2::new(-1.0, 0.0), 1.0, Vec2::zeros()),
        ];
        let cfg = StepConfig { mode: UpdateMode::Flip, shape: ShapeKind::Linear, ..StepConfig::default() };
        let mut sim = Simulation::new(grid, ps, vec![mat], 1, cfg).unwrap();
        let dt = 0.01;
        sim.usl_step(dt).unwrap();
        // Nodes 1, 2: m = (1, 1), p = (0.5, -0.5), no force, v = (0.5, -0.5).
        // Particle 1: V_new = 0.75·0.5 + 0.25·(-0.5) = 0.25 under PIC, FLIP keeps V = 1.
        // Grid gradient (v2 - v1)/Δx = -1, so F = e^{-dt}, τ = E ln F = -2 dt.
        let p = &sim.particles[0];
        assert!((p.velocity.x - 1.0).abs() < 1e-12);
        assert!((p.position.x - (1.25 + 0.25 * dt)).abs() < 1e-12);
        assert!((p.def_grad[(0, 0)] - (-dt).exp()).abs() < 1e-12);
        assert!((p.stress[(0, 0)] + 2.0 * dt).abs() < 1e-12);
        // Work: ½(0 + τ)·D·V0·dt with D = -1.
        assert!((sim.work + 0.5 * (-2.0 * dt) * dt * 2.0).abs() < 1e-14);
    }

    #[test]
    fn flip_conserves_particle_momentum() {
        let ps: Vec<_> = (0..20).map(|i| bar_particle(2.25 + 0.5 * i as f64, (0.3 * i as f64).sin())).collect();
        let mut sim = sim_1d(ps, UpdateMode::Flip, 1);
        let before = sim.total_momentum();
        for _ in 0..10 {
            sim.usl_step(0.05).unwrap();
        }
        assert!((sim.total_momentum() - before).norm() < 1e-12 * before.norm().max(1.0));
    }

    #[test]
    fn energy_csv_layout() {
        let e = EnergyReport { time: 1.0, kinetic: 0.5, work: 0.25, total: 0.75, dissipation: 0.0 };
        let r = StepReport { order: 4, contact_nodes: 2, ..StepReport::default() };
        let mut w = EnergyCsv::new(Vec::new()).unwrap();
        w.record(&e, &r).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time,kinetic,work,total,dissipation,order,contact_nodes");
        assert_eq!(
            lines.next().unwrap(),
            "1.0000000000000000e0,5.0000000000000000e-1,2.5000000000000000e-1,7.5000000000000000e-1,0.0000000000000000e0,4,2"
        );
    }
}
