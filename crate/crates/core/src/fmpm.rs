//! Incremental FMPM(k) grid velocity solve.
//!
//! Starting from lumped velocities `v⁺(1) = m⁻¹p⁺`, each pass forms the next
//! term of the truncated series `Σ A^{ℓ-1} m⁻¹p⁺` with `A = I - S⁺S`, applied
//! to the previous increment rather than recomputed from scratch. Boundary and
//! contact corrections act on every increment through [`FmpmHook`]s.

use crate::error::{config_err, Result};
use crate::exec::{accumulate, ExecMode};
use crate::grid::{particles_by_field, FieldSet, Particle, Vec2};
use crate::shape::ShapeSample;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicMetric {
    #[default]
    None,
    Means,
    Changes,
}

impl FromStr for DynamicMetric {
    type Err = crate::MpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "means" => Ok(Self::Means),
            "changes" => Ok(Self::Changes),
            other => Err(config_err(format!("unknown dynamic metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FmpmOptions {
    /// Maximum order k.
    pub order: usize,
    /// Blend factor α applied every `blend_base`-th pass.
    pub blend_alpha: f64,
    pub blend_base: usize,
    /// Periodic constant C_X; 0 runs the solve every step.
    pub periodic_cx: f64,
    pub metric: DynamicMetric,
    pub threshold: f64,
    pub epsilon_fraction: f64,
}

impl Default for FmpmOptions {
    fn default() -> Self {
        Self {
            order: 1,
            blend_alpha: 1.0,
            blend_base: 1,
            periodic_cx: 0.0,
            metric: DynamicMetric::None,
            threshold: 0.0,
            epsilon_fraction: 0.01,
        }
    }
}

impl FmpmOptions {
    pub fn with_order(order: usize) -> Self {
        Self { order, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(config_err("FMPM order must be at least 1"));
        }
        if !(self.blend_alpha > 0.0 && self.blend_alpha <= 1.0) {
            return Err(config_err("blend α must lie in (0, 1]"));
        }
        if self.blend_base < 1 {
            return Err(config_err("blend base m must be at least 1"));
        }
        if !(self.periodic_cx >= 0.0) {
            return Err(config_err("periodic C_X must be non-negative"));
        }
        if self.metric != DynamicMetric::None && !(self.threshold > 0.0) {
            return Err(config_err("dynamic threshold must be positive"));
        }
        if !(self.epsilon_fraction >= 0.0) {
            return Err(config_err("dynamic ε fraction must be non-negative"));
        }
        Ok(())
    }

    /// Whether pass `pass` (≥ 2) scales its increment by α.
    pub fn blends_pass(&self, pass: usize) -> bool {
        self.blend_base == 1 || pass % self.blend_base == 1
    }
}

/// Series coefficients `c_ℓ`, ℓ = 1..=k, produced by the blended loop.
pub fn blend_coefficients(order: usize, alpha: f64, base: usize) -> Vec<f64> {
    let opts = FmpmOptions { blend_alpha: alpha, blend_base: base, ..FmpmOptions::default() };
    let mut c = Vec::with_capacity(order);
    let mut current = 1.0;
    for pass in 1..=order {
        if pass >= 2 && opts.blends_pass(pass) {
            current *= alpha;
        }
        c.push(current);
    }
    c
}

/// Number of steps between FMPM solves, `max(1, round(C_X / C))`.
pub fn periodic_interval(courant: f64, cx: f64) -> usize {
    if cx <= 0.0 {
        1
    } else {
        ((cx / courant).round() as usize).max(1)
    }
}

/// Whether step `step` runs the FMPM solve and PIC-style update.
pub fn periodic_schedule(step: usize, courant: f64, cx: f64) -> bool {
    step.is_multiple_of(periodic_interval(courant, cx))
}

/// Convergence metric of increments `dv` against running totals `v`.
///
/// Returns `+∞` when every total vanishes but some increment does not.
pub fn convergence_metric(dv: &[Vec2], v: &[Vec2], kind: DynamicMetric, epsilon_fraction: f64) -> f64 {
    let num: f64 = dv.iter().map(|d| d.norm()).sum();
    if num == 0.0 || dv.is_empty() {
        return 0.0;
    }
    match kind {
        DynamicMetric::None => 0.0,
        DynamicMetric::Means => {
            let den: f64 = v.iter().map(|x| x.norm()).sum();
            if den == 0.0 {
                f64::INFINITY
            } else {
                num / den
            }
        }
        DynamicMetric::Changes => {
            let vmax = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if vmax == 0.0 {
                return f64::INFINITY;
            }
            let eps = epsilon_fraction * vmax;
            let total: f64 = dv.iter().zip(v).map(|(d, x)| d.norm() / (x.norm() + eps)).sum();
            total / dv.len() as f64
        }
    }
}

/// Correction applied to the lumped velocities and to every later increment.
pub trait FmpmHook {
    /// Adjusts `v⁺(1)` per field before the loop starts.
    fn initial(&mut self, _velocities: &mut [Vec<Vec2>]) -> Result<()> {
        Ok(())
    }

    /// Adjusts the increments `Δv(ℓ)` of pass `pass` ≥ 2.
    fn increment(&mut self, _pass: usize, _increments: &mut [Vec<Vec2>]) -> Result<()> {
        Ok(())
    }
}

pub struct NoHook;

impl FmpmHook for NoHook {}

#[derive(Debug, Clone, PartialEq)]
pub struct FmpmSolution {
    /// `v⁺(ℓ*)` per field; zero on inactive nodes.
    pub velocities: Vec<Vec<Vec2>>,
    /// Passes executed, ℓ*.
    pub order: usize,
    /// Dynamic metric after each pass ℓ ≥ 2 (empty for k = 1).
    pub metrics: Vec<f64>,
}

/// `S⁺S u` for one field: `Σ_p (M_p S_pi / m_i) Σ_j S_pj u_j`.
pub(crate) fn round_trip(
    fields: &FieldSet,
    field: usize,
    particles: &[Particle],
    shapes: &[ShapeSample],
    members: &[usize],
    input: &[Vec2],
    exec: ExecMode,
) -> Vec<Vec2> {
    let f = &fields.fields[field];
    let mut out = accumulate::<Vec2, _>(exec, f.mass.len(), members, |p, buf| {
        let nodes = &shapes[p].nodes;
        let vp: Vec2 = nodes.iter().filter(|w| f.active[w.node]).map(|w| input[w.node] * w.weight).sum();
        let mp = vp * particles[p].mass;
        for w in nodes {
            buf[w.node] += mp * w.weight;
        }
    });
    for (i, o) in out.iter_mut().enumerate() {
        *o = if f.active[i] { *o / f.mass[i] } else { Vec2::zeros() };
    }
    out
}

/// Incremental FMPM(k) velocities from the masses and updated momenta in
/// `fields`.
///
/// Hooks run in order `bc` then `contact`, on `v⁺(1)` and on each increment.
/// The dynamic exit test follows the hooks.
#[allow(clippy::too_many_arguments)]
pub fn fmpm_velocity(
    fields: &FieldSet,
    particles: &[Particle],
    shapes: &[ShapeSample],
    options: &FmpmOptions,
    bc: &mut dyn FmpmHook,
    contact: &mut dyn FmpmHook,
    exec: ExecMode,
) -> Result<FmpmSolution> {
    options.validate()?;
    let groups = particles_by_field(particles, fields.fields.len())?;
    let mut vstar: Vec<Vec<Vec2>> = fields.fields.iter().map(|f| f.lumped_velocity()).collect();
    bc.initial(&mut vstar)?;
    contact.initial(&mut vstar)?;
    let mut vprev = vstar.clone();
    let mut metrics = Vec::new();
    let mut order = 1;

    for pass in 2..=options.order {
        let scale = if options.blends_pass(pass) { options.blend_alpha } else { 1.0 };
        for (a, members) in groups.iter().enumerate() {
            let next = round_trip(fields, a, particles, shapes, members, &vprev[a], exec);
            let active = &fields.fields[a].active;
            for (i, (p, n)) in vprev[a].iter_mut().zip(next).enumerate() {
                *p = if active[i] { (*p - n) * scale } else { Vec2::zeros() };
            }
        }
        bc.increment(pass, &mut vprev)?;
        contact.increment(pass, &mut vprev)?;
        let mut dv = Vec::new();
        let mut totals = Vec::new();
        for (a, f) in fields.fields.iter().enumerate() {
            for i in f.active_nodes() {
                vstar[a][i] += vprev[a][i];
                dv.push(vprev[a][i]);
                totals.push(vstar[a][i]);
            }
        }
        order = pass;
        let kind = if options.metric == DynamicMetric::None { DynamicMetric::Means } else { options.metric };
        let metric = convergence_metric(&dv, &totals, kind, options.epsilon_fraction);
        metrics.push(metric);
        if options.metric != DynamicMetric::None && metric < options.threshold {
            break;
        }
    }
    Ok(FmpmSolution { velocities: vstar, order, metrics })
}

/// Binomial-weighted FMPM(k) form, used as a cross-check of [`fmpm_velocity`].
///
/// `v*_1 = k m⁻¹p`, `v*_ℓ = ((k+1-ℓ)/ℓ) S⁺S v*_{ℓ-1}`, `v = Σ (-1)^{ℓ+1} v*_ℓ`.
pub fn legacy_fmpm_velocity(
    fields: &FieldSet,
    particles: &[Particle],
    shapes: &[ShapeSample],
    order: usize,
) -> Result<Vec<Vec<Vec2>>> {
    if order < 1 {
        return Err(config_err("FMPM order must be at least 1"));
    }
    let groups = particles_by_field(particles, fields.fields.len())?;
    let mut out = Vec::with_capacity(groups.len());
    for (a, members) in groups.iter().enumerate() {
        let k = order as f64;
        let mut term: Vec<Vec2> = fields.fields[a].lumped_velocity().into_iter().map(|v| v * k).collect();
        let mut sum = term.clone();
        for l in 2..=order {
            let next = round_trip(fields, a, particles, shapes, members, &term, ExecMode::Serial);
            let factor = (k + 1.0 - l as f64) / l as f64;
            term = next.into_iter().map(|v| v * factor).collect();
            let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t * sign;
            }
        }
        out.push(sum);
    }
    Ok(out)
}
