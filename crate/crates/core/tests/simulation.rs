//! Whole-step behaviour of the USL stepper on small 2D problems.

use fmpm_core::bench::fill_box;
use fmpm_core::bench::splitbar::SplitBar;
use fmpm_core::contact::{ContactLaw, IncrementalMethod};
use fmpm_core::fmpm::FmpmOptions;
use fmpm_core::material::MaterialParams;
use fmpm_core::shape::ShapeKind;
use fmpm_core::stepper::{ContactConfig, Simulation, StepConfig, UpdateMode};
use fmpm_core::{Grid, MpmError, Vec2};

fn block(step: StepConfig, velocity: Vec2) -> Simulation {
    let grid = Grid::covering(2, [-2.0, -2.0], [8.0, 6.0], 0.5).unwrap();
    let mut particles = fill_box(2, [1.0, 1.0], [3.0, 2.5], 0.5, 2, 1.0);
    particles.iter_mut().for_each(|p| p.velocity = velocity);
    let material = MaterialParams::neohookean(1.0, 1.0, 1.0).unwrap();
    Simulation::new(grid, particles, vec![material], 1, step).unwrap()
}

#[test]
fn rigid_translation_is_preserved() {
    let u = Vec2::new(0.3, -0.1);
    for shape in [ShapeKind::Linear, ShapeKind::Ugimp, ShapeKind::Bspline2] {
        for (mode, k) in [(UpdateMode::Flip, 1), (UpdateMode::Fmpm, 1), (UpdateMode::Fmpm, 6)] {
            let step = StepConfig { shape, mode, fmpm: FmpmOptions::with_order(k), ..StepConfig::default() };
            let mut sim = block(step, u);
            let x0: Vec<Vec2> = sim.particles.iter().map(|p| p.position).collect();
            sim.run_until(2.0, |_, _| Ok(true)).unwrap();
            for (p, x) in sim.particles.iter().zip(&x0) {
                assert!((p.velocity - u).norm() < 1e-12, "{shape:?} {mode:?} {k}");
                assert!((p.position - x - u * sim.time).norm() < 1e-11);
                assert!((p.def_grad - fmpm_core::Mat2::identity()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn flip_conserves_particle_momentum() {
    let mut sim = block(StepConfig { mode: UpdateMode::Flip, ..StepConfig::default() }, Vec2::zeros());
    // Nonuniform start so stresses develop.
    for p in &mut sim.particles {
        p.velocity = Vec2::new(0.2 * (p.position.y - 1.75), 0.1 * (p.position.x - 2.0).sin());
    }
    let p0: Vec2 = sim.particles.iter().map(|p| p.velocity * p.mass).sum();
    sim.run_until(3.0, |_, _| Ok(true)).unwrap();
    let p1: Vec2 = sim.particles.iter().map(|p| p.velocity * p.mass).sum();
    let scale: f64 = sim.particles.iter().map(|p| p.mass * p.velocity.norm()).sum();
    assert!((p1 - p0).norm() <= 1e-12 * scale);
}

#[test]
fn leaving_the_grid_is_reported() {
    let mut sim = block(StepConfig::default(), Vec2::new(3.0, 0.0));
    let err = sim.run_until(10.0, |_, _| Ok(true)).unwrap_err();
    assert!(matches!(err, MpmError::ParticleOutsideGrid { .. }), "{err}");
}

#[test]
fn stick_contact_reverts_for_both_methods() {
    let bar = SplitBar { length: 8.0, split_at: 5.0, end_time: 1.0, ..SplitBar::default() };
    for method in [IncrementalMethod::Net, IncrementalMethod::Evolving] {
        for k in [1, 3] {
            let step = StepConfig { fmpm: FmpmOptions::with_order(k), ..StepConfig::default() };
            let contact = ContactConfig { law: ContactLaw::STICK, method, ..ContactConfig::default() };
            let out = bar.compare(&step, contact).unwrap();
            assert!(out.max_velocity_discrepancy < 1e-10, "{method:?} k={k}: {}", out.max_velocity_discrepancy);
        }
    }
}

#[test]
fn serial_and_parallel_agree() {
    let run = |exec| {
        let step = StepConfig { exec, fmpm: FmpmOptions::with_order(4), ..StepConfig::default() };
        let mut sim = block(step, Vec2::zeros());
        for p in &mut sim.particles {
            p.velocity = Vec2::new(0.1 * p.position.y, -0.05 * p.position.x);
        }
        sim.run_until(1.0, |_, _| Ok(true)).unwrap();
        sim.particles.iter().map(|p| p.position).collect::<Vec<_>>()
    };
    let a = run(fmpm_core::exec::ExecMode::Serial);
    let b = run(fmpm_core::exec::ExecMode::Parallel);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-12);
    }
}
