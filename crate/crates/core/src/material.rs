//! Constitutive laws and the deformation-gradient update.
//!
//! Stresses are returned as in-plane Kirchhoff stress `τ = Jσ`. 2D runs are
//! plane strain (`F_zz = 1`); 1D runs use `F = diag(F_xx, 1)`.

use crate::error::{config_err, MpmError, Result};
use crate::grid::Mat2;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaterialLaw {
    Neohookean {
        shear: f64,
        lame: f64,
    },
    /// Uniaxial law `τ = E ln F_xx`, linear in the small-strain limit.
    Elastic1d {
        modulus: f64,
    },
}

/// Von Neumann-Richtmyer viscosity coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viscosity {
    pub c1: f64,
    pub c2: f64,
}

impl Default for Viscosity {
    fn default() -> Self {
        Self { c1: 0.2, c2: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub law: MaterialLaw,
    pub density: f64,
    pub viscosity: Option<Viscosity>,
}

impl MaterialParams {
    pub fn neohookean(shear: f64, lame: f64, density: f64) -> Result<Self> {
        if !(shear > 0.0) || !(lame >= 0.0) {
            return Err(config_err("Neohookean material needs G > 0 and λ ≥ 0"));
        }
        Self::checked(MaterialLaw::Neohookean { shear, lame }, density)
    }

    /// Neohookean parameters from Young's modulus and Poisson's ratio.
    pub fn from_young(young: f64, poisson: f64, density: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&poisson) {
            return Err(config_err("Poisson's ratio must lie in [0, 0.5)"));
        }
        let shear = young / (2.0 * (1.0 + poisson));
        let lame = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        Self::neohookean(shear, lame, density)
    }

    pub fn elastic_1d(modulus: f64, density: f64) -> Result<Self> {
        if !(modulus > 0.0) {
            return Err(config_err("elastic modulus must be positive"));
        }
        Self::checked(MaterialLaw::Elastic1d { modulus }, density)
    }

    fn checked(law: MaterialLaw, density: f64) -> Result<Self> {
        if !(density > 0.0) {
            return Err(config_err("density must be positive"));
        }
        Ok(Self { law, density, viscosity: None })
    }

    pub fn with_viscosity(mut self, viscosity: Option<Viscosity>) -> Self {
        self.viscosity = viscosity;
        self
    }

    /// Longitudinal wave speed in the reference state.
    pub fn wave_speed(&self) -> f64 {
        match self.law {
            MaterialLaw::Neohookean { shear, lame } => ((lame + 2.0 * shear) / self.density).sqrt(),
            MaterialLaw::Elastic1d { modulus } => (modulus / self.density).sqrt(),
        }
    }

    /// Elastic Kirchhoff stress for deformation gradient `f`.
    pub fn kirchhoff(&self, f: &Mat2) -> Result<Mat2> {
        let j = f.determinant();
        if !(j > 0.0) {
            return Err(MpmError::ElementInversion { particle: usize::MAX, det: j });
        }
        match self.law {
            MaterialLaw::Neohookean { shear, lame } => Ok(neohookean_stress(f, shear, lame)? * j),
            MaterialLaw::Elastic1d { modulus } => Ok(Mat2::new(modulus * f[(0, 0)].ln(), 0.0, 0.0, 0.0)),
        }
    }

    /// Kirchhoff-scaled viscous pressure `J q` for rate of deformation trace
    /// `tr_d` and cell size `dx`. Zero unless viscosity is enabled and the
    /// material is compressing.
    pub fn viscous_pressure(&self, tr_d: f64, dx: f64) -> f64 {
        match self.viscosity {
            // ρ = ρ₀/J, so J q needs the reference density only.
            Some(v) if tr_d < 0.0 => {
                let rate = dx * tr_d.abs();
                self.density * rate * (v.c1 * self.wave_speed() + v.c2 * rate)
            }
            _ => 0.0,
        }
    }
}

/// Neohookean Cauchy stress for a full 3×3 deformation gradient.
pub fn neohookean_cauchy3(f: &Matrix3<f64>, shear: f64, lame: f64) -> Result<Matrix3<f64>> {
    let j = f.determinant();
    if !(j > 0.0) {
        return Err(MpmError::ElementInversion { particle: usize::MAX, det: j });
    }
    let b = f * f.transpose();
    Ok(Matrix3::identity() * (0.5 * lame * (j - 1.0 / j)) + (b - Matrix3::identity()) * (shear / j))
}

/// In-plane Neohookean Cauchy stress under plane strain.
pub fn neohookean_stress(f: &Mat2, shear: f64, lame: f64) -> Result<Mat2> {
    let mut f3 = Matrix3::identity();
    f3.fixed_view_mut::<2, 2>(0, 0).copy_from(f);
    let s = neohookean_cauchy3(&f3, shear, lame)?;
    Ok(s.fixed_view::<2, 2>(0, 0).into_owned())
}

/// Matrix exponential of a 2×2 matrix in closed form.
///
/// With `N = M - (tr M/2) I`, `N² = δ I` where `δ = -det N`, so
/// `exp M = e^{tr M/2} (c(δ) I + s(δ) N)` with hyperbolic or circular `c`, `s`.
pub fn exp2(m: &Mat2) -> Mat2 {
    let half_tr = 0.5 * m.trace();
    let n = m - Mat2::identity() * half_tr;
    let delta = -n.determinant();
    let (c, s) = if delta.abs() < 1e-6 {
        (1.0 + delta / 2.0 + delta * delta / 24.0, 1.0 + delta / 6.0 + delta * delta / 120.0)
    } else if delta > 0.0 {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-delta).sqrt();
        (r.cos(), r.sin() / r)
    };
    (Mat2::identity() * c + n * s) * half_tr.exp()
}

/// `F_new = exp(∇V dt) F`.
pub fn update_deformation(f: &Mat2, velocity_gradient: &Mat2, dt: f64) -> Mat2 {
    exp2(&(velocity_gradient * dt)) * f
}
