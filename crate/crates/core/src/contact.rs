//! Two-field grid contact.
//!
//! A node where two velocity fields carry mass is a contact candidate. The
//! lumped law corrects the pair toward their centre-of-mass velocity:
//! `Δp(0) = m_red (v^β - v^α)` is the momentum that would do so fully, and the
//! chosen law keeps all of it (stick), its normal part (frictionless), or its
//! normal part plus a capped tangential part (Coulomb). Inside the FMPM loop
//! the same law is re-evaluated on every increment with the Net or Evolving
//! bookkeeping.

use crate::error::{config_err, MpmError, Result};
use crate::fmpm::FmpmHook;
use crate::grid::{FieldSet, Grid, Vec2};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactLawKind {
    Stick,
    Frictionless,
    Coulomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactLaw {
    pub kind: ContactLawKind,
    pub friction: f64,
}

impl ContactLaw {
    pub const STICK: Self = Self { kind: ContactLawKind::Stick, friction: 0.0 };
    pub const FRICTIONLESS: Self = Self { kind: ContactLawKind::Frictionless, friction: 0.0 };

    pub fn coulomb(friction: f64) -> Result<Self> {
        if !(friction >= 0.0) {
            return Err(config_err("friction coefficient must be non-negative"));
        }
        Ok(Self { kind: ContactLawKind::Coulomb, friction })
    }
}

impl FromStr for ContactLawKind {
    type Err = MpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stick" => Ok(Self::Stick),
            "frictionless" => Ok(Self::Frictionless),
            "coulomb" => Ok(Self::Coulomb),
            other => Err(config_err(format!("unknown contact law `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncrementalMethod {
    #[default]
    Net,
    Evolving,
}

impl FromStr for IncrementalMethod {
    type Err = MpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "net" => Ok(Self::Net),
            "evolving" => Ok(Self::Evolving),
            other => Err(config_err(format!("unknown incremental contact method `{other}`"))),
        }
    }
}

/// Per-node contact geometry and incremental ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactNode {
    pub node: usize,
    pub field_a: usize,
    pub field_b: usize,
    pub mass_a: f64,
    pub mass_b: f64,
    /// Outward unit normal of field `a`.
    pub normal: Vec2,
    pub separation: f64,
    pub area: f64,
    pub prior: Vec2,
    pub net: Vec2,
    pub in_contact: bool,
    /// One field holds less than the minimum mass fraction here; it is held
    /// to the centre-of-mass velocity whatever the law.
    pub sliver: bool,
    /// Normal traction `N_c` from the last evaluation.
    pub normal_traction: f64,
}

impl ContactNode {
    pub fn reduced_mass(&self) -> f64 {
        self.mass_a * self.mass_b / (self.mass_a + self.mass_b)
    }

    /// Applies momentum `dp` to field `a` and `-dp` to field `b`.
    fn apply(&self, v: &mut [Vec<Vec2>], dp: Vec2) {
        v[self.field_a][self.node] += dp / self.mass_a;
        v[self.field_b][self.node] -= dp / self.mass_b;
    }
}

/// Contact candidates: nodes where exactly two fields are active.
///
/// `offset_cells` is subtracted from the raw separation, in units of the
/// minimum cell size. Nodes where either field's share of the mass is below
/// `min_fraction` are flagged as slivers.
pub fn contact_geometry(
    grid: &Grid,
    fields: &FieldSet,
    offset_cells: f64,
    min_fraction: f64,
) -> Result<Vec<ContactNode>> {
    let offset = offset_cells * grid.min_cell_size();
    let cell = grid.cell_size();
    let mut out = Vec::new();
    for node in 0..grid.num_nodes() {
        let mut massive = fields.fields.iter().enumerate().filter(|(_, f)| f.active[node]).map(|(a, _)| a);
        let (Some(a), Some(b)) = (massive.next(), massive.next()) else { continue };
        if massive.next().is_some() {
            return Err(MpmError::Unsupported(format!("node {node} has three or more massive fields")));
        }
        let (fa, fb) = (&fields.fields[a], &fields.fields[b]);
        let xa = fa.position_moment[node] / fa.mass[node];
        let xb = fb.position_moment[node] / fb.mass[node];
        // The scattered gradient Σ M_p ∇S_ip is taken at the particles, so it
        // points from a field's material toward the node. Weighting by the
        // other field's mass gives the gradient of the mass fraction, in
        // which a free surface shared by both fields cancels.
        let raw = fa.mass_gradient[node] * fb.mass[node] - fb.mass_gradient[node] * fa.mass[node];
        let normal = if raw.norm() > 0.0 {
            raw.normalize()
        } else if (xb - xa).norm() > 0.0 {
            (xb - xa).normalize()
        } else {
            Vec2::x()
        };
        let area = if grid.dim() == 1 {
            1.0
        } else if normal.x.abs() >= normal.y.abs() {
            cell[1]
        } else {
            cell[0]
        };
        out.push(ContactNode {
            node,
            field_a: a,
            field_b: b,
            mass_a: fa.mass[node],
            mass_b: fb.mass[node],
            normal,
            separation: (xb - xa).dot(&normal) - offset,
            area,
            prior: Vec2::zeros(),
            net: Vec2::zeros(),
            in_contact: false,
            sliver: fa.mass[node].min(fb.mass[node]) < min_fraction * (fa.mass[node] + fb.mass[node]),
            normal_traction: 0.0,
        });
    }
    Ok(out)
}

/// Contact test and corrective momentum for field `a` given the full
/// centre-of-mass correction `dp0`. Returns `None` off contact.
///
/// Stick acts on every candidate node. Sliver nodes skip the separation
/// test, since a field's centroid there says little about the gap.
pub fn lumped_contact_dp(node: &mut ContactNode, dp0: Vec2, law: &ContactLaw, dt: f64) -> Option<Vec2> {
    let dn = dp0.dot(&node.normal);
    node.normal_traction = -dn / (node.area * dt);
    let stick = law.kind == ContactLawKind::Stick;
    node.in_contact = stick || (node.normal_traction > 0.0 && (node.separation < 0.0 || node.sliver));
    if !node.in_contact {
        return None;
    }
    if stick {
        return Some(dp0);
    }
    let normal_part = node.normal * dn;
    Some(match law.kind {
        ContactLawKind::Stick => dp0,
        ContactLawKind::Frictionless => normal_part,
        ContactLawKind::Coulomb => {
            let t = dp0 - normal_part;
            let tn = t.norm();
            // S_slide A_c dt = min(T_c, μ N_c) A_c dt; the area cancels.
            let slide = tn.min(-law.friction * dn);
            if tn > 0.0 {
                normal_part + t * (slide / tn)
            } else {
                normal_part
            }
        }
    })
}

/// Lumped contact on nodal momenta, before forces are added.
/// Returns the number of nodes in contact.
pub fn apply_lumped_contact_momentum(
    nodes: &mut [ContactNode],
    fields: &mut FieldSet,
    law: &ContactLaw,
    dt: f64,
) -> usize {
    let mut count = 0;
    for c in nodes.iter_mut() {
        let pa = fields.fields[c.field_a].momentum[c.node];
        let pb = fields.fields[c.field_b].momentum[c.node];
        let dp0 = (pb * c.mass_a - pa * c.mass_b) / (c.mass_a + c.mass_b);
        if let Some(dp) = lumped_contact_dp(c, dp0, law, dt) {
            fields.fields[c.field_a].momentum[c.node] += dp;
            fields.fields[c.field_b].momentum[c.node] -= dp;
            count += 1;
        }
    }
    count
}

/// [`FmpmHook`] running lumped contact on `v⁺(1)` and the incremental method
/// on later passes.
pub struct ContactHook<'a> {
    pub nodes: &'a mut [ContactNode],
    pub law: ContactLaw,
    pub method: IncrementalMethod,
    pub dt: f64,
    /// Nodes in contact after the last call.
    pub in_contact: usize,
    pub max_normal_traction: f64,
}

impl<'a> ContactHook<'a> {
    pub fn new(nodes: &'a mut [ContactNode], law: ContactLaw, method: IncrementalMethod, dt: f64) -> Self {
        Self { nodes, law, method, dt, in_contact: 0, max_normal_traction: 0.0 }
    }

    fn record(&mut self) {
        self.in_contact = self.nodes.iter().filter(|c| c.in_contact).count();
        self.max_normal_traction =
            self.nodes.iter().filter(|c| c.in_contact).map(|c| c.normal_traction).fold(0.0, f64::max);
    }
}

impl FmpmHook for ContactHook<'_> {
    fn initial(&mut self, v: &mut [Vec<Vec2>]) -> Result<()> {
        for c in self.nodes.iter_mut() {
            let dp0 = (v[c.field_b][c.node] - v[c.field_a][c.node]) * c.reduced_mass();
            let dp = lumped_contact_dp(c, dp0, &self.law, self.dt).unwrap_or_else(Vec2::zeros);
            c.apply(v, dp);
            match self.method {
                IncrementalMethod::Net => {
                    c.prior = dp0;
                    c.net = dp;
                }
                IncrementalMethod::Evolving => {
                    c.prior = dp0 - dp;
                    c.net = Vec2::zeros();
                }
            }
        }
        self.record();
        Ok(())
    }

    fn increment(&mut self, _pass: usize, dv: &mut [Vec<Vec2>]) -> Result<()> {
        for c in self.nodes.iter_mut() {
            let dpl0 = (dv[c.field_b][c.node] - dv[c.field_a][c.node]) * c.reduced_mass();
            let dp0 = c.prior + dpl0;
            let dp = lumped_contact_dp(c, dp0, &self.law, self.dt);
            match self.method {
                IncrementalMethod::Net => {
                    let dp = dp.unwrap_or_else(Vec2::zeros);
                    c.apply(dv, dp - c.net);
                    c.prior = dp0;
                    c.net = dp;
                }
                IncrementalMethod::Evolving => match dp {
                    Some(dp) => {
                        c.apply(dv, dp);
                        c.prior = dp0 - dp;
                    }
                    None => c.prior = dp0,
                },
            }
        }
        self.record();
        Ok(())
    }
}
