//! Self-checks of the FMPM solver on random small instances: dense-series
//! and binomial-form equivalence, blend coefficients, and the uniform
//! velocity fixed point.

use crate::error::Result;
use crate::exec::ExecMode;
use crate::fmpm::{blend_coefficients, fmpm_velocity, legacy_fmpm_velocity, FmpmOptions, NoHook};
use crate::grid::{scatter_mass_momentum, FieldSet, Grid, Particle, Vec2};
use crate::oracle::dense_oracle_velocity;
use crate::shape::{sample_shapes, ShapeKind, ShapeSample};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORDERS: [usize; 5] = [1, 2, 3, 4, 8];
pub const ALPHAS: [f64; 3] = [1.0, 0.9, 0.8];
pub const BASES: [usize; 2] = [1, 2];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub instances: usize,
    pub base_seed: u64,
    pub tolerance: f64,
    /// Adds this amount to one shape weight of the instance with the given
    /// index, on the solver side only.
    pub perturb: Option<(usize, f64)>,
}

impl Default for OracleCheck {
    fn default() -> Self {
        Self { instances: 50, base_seed: 0x5eed, tolerance: 1e-10, perturb: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFailure {
    pub seed: u64,
    pub check: &'static str,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleReport {
    pub checked: usize,
    pub failures: Vec<OracleFailure>,
    /// Largest relative error seen per check kind: dense, legacy, fixed point.
    pub worst: [f64; 3],
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One random instance and the options drawn for it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub grid: Grid,
    pub particles: Vec<Particle>,
    pub shapes: Vec<ShapeSample>,
    pub fields: FieldSet,
    pub options: FmpmOptions,
}

impl Instance {
    pub fn random(seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=2);
        let kind = *[ShapeKind::Linear, ShapeKind::Ugimp, ShapeKind::Bspline2].choose(&mut rng).expect("nonempty");
        let grid = if dim == 1 {
            Grid::new_1d(0.0, 1.0, rng.gen_range(7..=10))?
        } else {
            let n = [rng.gen_range(6..=8), rng.gen_range(6..=8)];
            Grid::new_2d([0.0, 0.0], [1.0, 1.0], n)?
        };
        let num_fields = rng.gen_range(1..=2);
        let count = rng.gen_range(4..=14);
        let mut particles = Vec::with_capacity(count);
        for i in 0..count {
            let mut pos = Vec2::zeros();
            let mut half = Vec2::zeros();
            for axis in 0..dim {
                pos[axis] = rng.gen_range(2.0..grid.upper(axis) - 2.0);
                half[axis] = rng.gen_range(0.1..0.5);
            }
            let v = Vec2::new(rng.gen_range(-1.0..1.0), if dim == 2 { rng.gen_range(-1.0..1.0) } else { 0.0 });
            let vol = if dim == 1 { 2.0 * half.x } else { 4.0 * half.x * half.y };
            let p = Particle::new(rng.gen_range(0.5..2.0), pos, v, vol, half).with_field(i % num_fields);
            particles.push(p);
        }
        let shapes =
            particles.iter().enumerate().map(|(i, p)| sample_shapes(kind, &grid, i, p)).collect::<Result<Vec<_>>>()?;
        let mut fields = FieldSet::new(num_fields, grid.num_nodes());
        scatter_mass_momentum(&particles, &shapes, &mut fields, ExecMode::Serial)?;
        let options = FmpmOptions {
            order: *ORDERS.choose(&mut rng).expect("nonempty"),
            blend_alpha: *ALPHAS.choose(&mut rng).expect("nonempty"),
            blend_base: *BASES.choose(&mut rng).expect("nonempty"),
            ..FmpmOptions::default()
        };
        Ok(Self { grid, particles, shapes, fields, options })
    }
}

fn relative_error(a: &[Vec<Vec2>], b: &[Vec<Vec2>]) -> f64 {
    let scale = b.iter().flatten().map(|v| v.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let diff = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    diff / scale
}

impl OracleCheck {
    pub fn run(&self) -> Result<OracleReport> {
        let mut report = OracleReport::default();
        let fail = |report: &mut OracleReport, seed, check, error: f64, slot: usize| {
            report.worst[slot] = report.worst[slot].max(error);
            if !(error <= self.tolerance) {
                report.failures.push(OracleFailure { seed, check, error });
            }
        };
        for i in 0..self.instances {
            let seed = self.base_seed.wrapping_add(i as u64);
            let inst = Instance::random(seed)?;
            let mut solver_shapes = inst.shapes.clone();
            if let Some((which, amount)) = self.perturb {
                if which == i {
                    solver_shapes[0].nodes[0].weight += amount;
                }
            }
            let o = inst.options;
            let got = fmpm_velocity(
                &inst.fields,
                &inst.particles,
                &solver_shapes,
                &o,
                &mut NoHook,
                &mut NoHook,
                ExecMode::Serial,
            )?;
            let dense = dense_oracle_velocity(
                &inst.fields,
                &inst.particles,
                &inst.shapes,
                o.order,
                o.blend_alpha,
                o.blend_base,
            )?;
            fail(&mut report, seed, "dense", relative_error(&got.velocities, &dense), 0);
            let plain = FmpmOptions { blend_alpha: 1.0, ..o };
            let got1 = fmpm_velocity(
                &inst.fields,
                &inst.particles,
                &solver_shapes,
                &plain,
                &mut NoHook,
                &mut NoHook,
                ExecMode::Serial,
            )?;
            let legacy = legacy_fmpm_velocity(&inst.fields, &inst.particles, &inst.shapes, o.order)?;
            fail(&mut report, seed, "legacy", relative_error(&got1.velocities, &legacy), 1);

            // Uniform particle velocity is reproduced exactly at any order.
            let u = Vec2::new(0.3, -0.7);
            let mut uniform = inst.particles.clone();
            uniform.iter_mut().for_each(|p| p.velocity = u);
            let mut fields = FieldSet::new(inst.fields.fields.len(), inst.grid.num_nodes());
            scatter_mass_momentum(&uniform, &inst.shapes, &mut fields, ExecMode::Serial)?;
            let fixed =
                fmpm_velocity(&fields, &uniform, &solver_shapes, &o, &mut NoHook, &mut NoHook, ExecMode::Serial)?;
            let expect: Vec<Vec<Vec2>> = fields
                .fields
                .iter()
                .map(|f| f.active.iter().map(|&a| if a { u } else { Vec2::zeros() }).collect())
                .collect();
            fail(&mut report, seed, "fixed-point", relative_error(&fixed.velocities, &expect), 2);
            report.checked += 1;
        }
        // Blend coefficients α^⌊(ℓ-1)/m⌋ against a direct count.
        for &a in &ALPHAS {
            for &m in &BASES {
                let c = blend_coefficients(8, a, m);
                let mut scale = 1.0;
                for (l, &got) in c.iter().enumerate().skip(1) {
                    if m == 1 || (l + 1) % m == 1 {
                        scale *= a;
                    }
                    if (got - scale).abs() > 1e-15 {
                        report.failures.push(OracleFailure { seed: 0, check: "blend", error: (got - scale).abs() });
                    }
                }
            }
        }
        Ok(report)
    }
}
