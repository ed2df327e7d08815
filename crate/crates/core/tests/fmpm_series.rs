//! FMPM velocities against a hand-written dense series on 1D hat functions.

use fmpm_core::exec::ExecMode;
use fmpm_core::fmpm::{fmpm_velocity, FmpmOptions, NoHook};
use fmpm_core::grid::{scatter_mass_momentum, FieldSet, Grid, Particle, Vec2};
use fmpm_core::shape::{sample_shapes, ShapeKind};
use proptest::prelude::*;

const NODES: usize = 9;

fn hat(x: f64, node: usize) -> f64 {
    (1.0 - (x - node as f64).abs()).max(0.0)
}

/// `Σ_j α^⌊j/m⌋ A^j m⁻¹p` with `A = I - m⁻¹SᵀMS`, all on plain arrays.
fn reference(xs: &[f64], ms: &[f64], vs: &[f64], order: usize, alpha: f64, base: usize) -> Vec<f64> {
    let s: Vec<Vec<f64>> = xs.iter().map(|&x| (0..NODES).map(|i| hat(x, i)).collect()).collect();
    let mass: Vec<f64> = (0..NODES).map(|i| (0..xs.len()).map(|p| ms[p] * s[p][i]).sum()).collect();
    let mom: Vec<f64> = (0..NODES).map(|i| (0..xs.len()).map(|p| ms[p] * vs[p] * s[p][i]).sum()).collect();
    let active: Vec<bool> = mass.iter().map(|&m| m > 1e-9).collect();
    let apply_a = |u: &[f64]| -> Vec<f64> {
        let up: Vec<f64> = s.iter().map(|row| (0..NODES).filter(|&j| active[j]).map(|j| row[j] * u[j]).sum()).collect();
        (0..NODES)
            .map(|i| {
                if !active[i] {
                    return 0.0;
                }
                let back: f64 = (0..xs.len()).map(|p| ms[p] * s[p][i] * up[p]).sum();
                u[i] - back / mass[i]
            })
            .collect()
    };
    let mut term: Vec<f64> = (0..NODES).map(|i| if active[i] { mom[i] / mass[i] } else { 0.0 }).collect();
    let mut sum = term.clone();
    for j in 1..order {
        term = apply_a(&term);
        let c = alpha.powi((j / base) as i32);
        for (acc, t) in sum.iter_mut().zip(&term) {
            *acc += c * t;
        }
    }
    sum
}

fn solve(xs: &[f64], ms: &[f64], vs: &[f64], options: &FmpmOptions) -> Vec<f64> {
    let grid = Grid::new_1d(0.0, 1.0, NODES).unwrap();
    let particles: Vec<Particle> = xs
        .iter()
        .zip(ms)
        .zip(vs)
        .map(|((&x, &m), &v)| Particle::new(m, Vec2::new(x, 0.0), Vec2::new(v, 0.0), 0.5, Vec2::zeros()))
        .collect();
    let shapes: Vec<_> =
        particles.iter().enumerate().map(|(i, p)| sample_shapes(ShapeKind::Linear, &grid, i, p).unwrap()).collect();
    let mut fields = FieldSet::new(1, grid.num_nodes());
    scatter_mass_momentum(&particles, &shapes, &mut fields, ExecMode::Serial).unwrap();
    let sol = fmpm_velocity(&fields, &particles, &shapes, options, &mut NoHook, &mut NoHook, ExecMode::Serial).unwrap();
    sol.velocities[0].iter().map(|v| v.x).collect()
}

fn cloud() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((1.05..6.95f64, 0.2..3.0f64, -2.0..2.0f64), 3..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_dense_series(cloud in cloud(), order in 1usize..10, alpha in prop::sample::select(vec![1.0, 0.9, 0.8]), base in 1usize..4) {
        let (xs, (ms, vs)): (Vec<f64>, (Vec<f64>, Vec<f64>)) = cloud.iter().map(|&(x, m, v)| (x, (m, v))).unzip();
        let options = FmpmOptions { order, blend_alpha: alpha, blend_base: base, ..FmpmOptions::default() };
        let got = solve(&xs, &ms, &vs, &options);
        let want = reference(&xs, &ms, &vs, order, alpha, base);
        let scale = want.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10 * scale, "{g} vs {w}");
        }
    }

    #[test]
    fn uniform_motion_is_a_fixed_point(cloud in cloud(), order in 1usize..12, u in -3.0..3.0f64) {
        let xs: Vec<f64> = cloud.iter().map(|c| c.0).collect();
        let ms: Vec<f64> = cloud.iter().map(|c| c.1).collect();
        let vs = vec![u; xs.len()];
        let got = solve(&xs, &ms, &vs, &FmpmOptions::with_order(order));
        let want = reference(&xs, &ms, &vs, 1, 1.0, 1);
        for (g, w) in got.iter().zip(&want) {
            if *w != 0.0 {
                prop_assert!((g - u).abs() <= 1e-12 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn grid_momentum_is_order_independent(cloud in cloud(), order in 2usize..10) {
        // SᵀMS is symmetric with row sums m, so each increment carries no momentum.
        let (xs, (ms, vs)): (Vec<f64>, (Vec<f64>, Vec<f64>)) = cloud.iter().map(|&(x, m, v)| (x, (m, v))).unzip();
        let mass: Vec<f64> = (0..NODES).map(|i| xs.iter().zip(&ms).map(|(&x, &m)| m * hat(x, i)).sum()).collect();
        let lumped = solve(&xs, &ms, &vs, &FmpmOptions::with_order(1));
        let full = solve(&xs, &ms, &vs, &FmpmOptions::with_order(order));
        let p1: f64 = lumped.iter().zip(&mass).map(|(v, m)| v * m).sum();
        let pk: f64 = full.iter().zip(&mass).map(|(v, m)| v * m).sum();
        prop_assert!((p1 - pk).abs() <= 1e-11 * (1.0 + p1.abs()));
    }
}
