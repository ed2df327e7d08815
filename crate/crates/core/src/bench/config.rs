//! TOML overrides for benchmark runs.
//!
//! Every key is optional; anything left out keeps the benchmark's default.
//!
//! ```toml
//! [grid]
//! cell = 0.5
//! shape = "ugimp"
//!
//! [material]
//! shear = 0.375
//! lame = 0.0
//! density = 1.0
//! viscosity = true
//!
//! [contact]
//! law = "coulomb"
//! friction = 0.3
//! method = "net"
//!
//! [bcs]
//! wall_depth = 1.0
//!
//! [fmpm]
//! order = 4
//! blend_alpha = 0.8
//! blend_base = 2
//!
//! [run]
//! courant = 0.2
//! mode = "fmpm"
//! end_time = 20.0
//! ```

use crate::contact::{ContactLaw, ContactLawKind, IncrementalMethod};
use crate::error::{config_err, Result};
use crate::exec::ExecMode;
use crate::fmpm::{DynamicMetric, FmpmOptions};
use crate::material::{MaterialLaw, MaterialParams, Viscosity};
use crate::shape::ShapeKind;
use crate::stepper::{ContactConfig, StepConfig, UpdateMode};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub contact: ContactSection,
    #[serde(default)]
    pub bcs: BcSection,
    #[serde(default)]
    pub fmpm: FmpmSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub cell: Option<f64>,
    pub shape: Option<ShapeKind>,
    pub particles_per_cell: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub shear: Option<f64>,
    pub lame: Option<f64>,
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub density: Option<f64>,
    pub viscosity: Option<bool>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSection {
    pub law: Option<ContactLawKind>,
    pub friction: Option<f64>,
    pub method: Option<IncrementalMethod>,
    pub offset_cells: Option<f64>,
    pub min_mass_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSection {
    pub wall_depth: Option<f64>,
    pub confine: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmpmSection {
    pub order: Option<usize>,
    pub blend_alpha: Option<f64>,
    pub blend_base: Option<usize>,
    pub periodic_cx: Option<f64>,
    pub metric: Option<DynamicMetric>,
    pub threshold: Option<f64>,
    pub epsilon_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub courant: Option<f64>,
    pub mode: Option<UpdateMode>,
    pub alpha: Option<f64>,
    pub end_time: Option<f64>,
    pub parallel: Option<bool>,
    pub strain_rate: Option<f64>,
    pub speed_fraction: Option<f64>,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies the `[fmpm]`, `[run]` and `[grid].shape` overrides to `step`.
    pub fn apply_step(&self, step: &mut StepConfig) -> Result<()> {
        let f = &self.fmpm;
        let o: &mut FmpmOptions = &mut step.fmpm;
        set(&mut o.order, f.order);
        set(&mut o.blend_alpha, f.blend_alpha);
        set(&mut o.blend_base, f.blend_base);
        set(&mut o.periodic_cx, f.periodic_cx);
        set(&mut o.metric, f.metric);
        set(&mut o.threshold, f.threshold);
        set(&mut o.epsilon_fraction, f.epsilon_fraction);
        let r = &self.run;
        set(&mut step.courant, r.courant);
        set(&mut step.mode, r.mode);
        set(&mut step.alpha, r.alpha);
        if let Some(p) = r.parallel {
            step.exec = if p { ExecMode::Parallel } else { ExecMode::Serial };
        }
        set(&mut step.shape, self.grid.shape);
        if let Some(c) = step.contact.as_mut() {
            self.apply_contact(c)?;
        }
        step.validate()
    }

    pub fn apply_contact(&self, c: &mut ContactConfig) -> Result<()> {
        let s = &self.contact;
        let friction = s.friction.unwrap_or(c.law.friction);
        c.law = match s.law.unwrap_or(c.law.kind) {
            ContactLawKind::Coulomb => ContactLaw::coulomb(friction)?,
            ContactLawKind::Stick => ContactLaw::STICK,
            ContactLawKind::Frictionless => ContactLaw::FRICTIONLESS,
        };
        set(&mut c.method, s.method);
        set(&mut c.offset_cells, s.offset_cells);
        set(&mut c.min_mass_fraction, s.min_mass_fraction);
        Ok(())
    }

    /// Applies `[material]` overrides to a default material of the same law.
    pub fn apply_material(&self, base: MaterialParams) -> Result<MaterialParams> {
        let s = &self.material;
        let density = s.density.unwrap_or(base.density);
        let mut m = match base.law {
            MaterialLaw::Neohookean { shear, lame } => match (s.young, s.poisson) {
                (Some(e), Some(nu)) => MaterialParams::from_young(e, nu, density)?,
                (None, None) => MaterialParams::neohookean(s.shear.unwrap_or(shear), s.lame.unwrap_or(lame), density)?,
                _ => return Err(config_err("give both `young` and `poisson` or neither")),
            },
            MaterialLaw::Elastic1d { modulus } => {
                if s.shear.is_some() || s.lame.is_some() || s.poisson.is_some() {
                    return Err(config_err("the 1D elastic law takes `young` and `density` only"));
                }
                MaterialParams::elastic_1d(s.young.unwrap_or(modulus), density)?
            }
        };
        m.viscosity = base.viscosity;
        if let Some(on) = s.viscosity {
            m.viscosity = on.then(Viscosity::default);
        }
        if let Some(v) = m.viscosity.as_mut() {
            set(&mut v.c1, s.c1);
            set(&mut v.c2, s.c2);
        }
        Ok(m)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_keeps_defaults() {
        let c = BenchConfig::parse("").unwrap();
        let mut step = StepConfig::default();
        c.apply_step(&mut step).unwrap();
        assert_eq!(step, StepConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let text = r#"
            [grid]
            shape = "bspline2"
            [fmpm]
            order = 8
            metric = "changes"
            threshold = 0.01
            [run]
            courant = 0.4
            mode = "flip"
            [contact]
            law = "coulomb"
            friction = 0.6
            method = "evolving"
            [material]
            young = 1000.0
            poisson = 0.33
            viscosity = true
        "#;
        let c = BenchConfig::parse(text).unwrap();
        let mut step = StepConfig { contact: Some(ContactConfig::default()), ..StepConfig::default() };
        c.apply_step(&mut step).unwrap();
        assert_eq!(step.fmpm.order, 8);
        assert_eq!(step.fmpm.metric, DynamicMetric::Changes);
        assert_eq!(step.courant, 0.4);
        assert_eq!(step.mode, UpdateMode::Flip);
        assert_eq!(step.shape, ShapeKind::Bspline2);
        let contact = step.contact.unwrap();
        assert_eq!(contact.law, ContactLaw::coulomb(0.6).unwrap());
        assert_eq!(contact.method, IncrementalMethod::Evolving);
        let m = c.apply_material(MaterialParams::neohookean(1.0, 1.0, 1.5e-3).unwrap()).unwrap();
        assert!(m.viscosity.is_some());
        assert!((m.wave_speed() - MaterialParams::from_young(1000.0, 0.33, 1.5e-3).unwrap().wave_speed()).abs() < 1e-9);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(BenchConfig::parse("[grid]\nsize = 3").is_err());
        assert!(BenchConfig::parse("[fmpm]\norder = \"four\"").is_err());
        let c = BenchConfig::parse("[fmpm]\norder = 0").unwrap();
        assert!(c.apply_step(&mut StepConfig::default()).is_err());
        let c = BenchConfig::parse("[material]\nyoung = 3.0").unwrap();
        assert!(c.apply_material(MaterialParams::neohookean(1.0, 1.0, 1.0).unwrap()).is_err());
    }
}
