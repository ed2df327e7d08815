//! Material point method engine built around an incremental approximate
//! full-mass-matrix velocity solve, FMPM(k).
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] – background grid, particle state and particle→grid scatter.
//! * [`shape`] – linear, uGIMP, stretched cpGIMP and quadratic B-spline shape functions.
//! * [`material`] – Neohookean and 1D elastic laws, deformation update.
//! * [`fmpm`] – the FMPM loop with boundary/contact hooks, blending,
//!   periodic scheduling, dynamic order control, and the dense/legacy oracles.
//! * [`boundary`] – superposable grid velocity conditions and moving walls.
//! * [`contact`] – two-field contact with the incremental Net/Evolving methods.
//! * [`stepper`] – the USL time step and particle updates.
//! * [`bench`] – benchmark problems driven by the `fmpm` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod boundary;
pub mod contact;
pub mod error;
pub mod exec;
pub mod fmpm;
pub mod grid;
pub mod material;
pub mod oracle;
pub mod shape;
pub mod stepper;

pub use error::{MpmError, Result};
pub use grid::{FieldSet, Grid, Mat2, NodalField, Particle, Vec2};
