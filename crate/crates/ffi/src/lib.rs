//! C ABI for fmpm-core.
//!
//! Every function returns an [`FmpmStatus`]. On failure the message for the
//! calling thread is available from [`fmpm_last_error_message`] until the
//! next failing call on that thread. Handles come from
//! [`fmpm_sim_new_benchmark`] and are released with [`fmpm_sim_free`].

#![allow(clippy::missing_safety_doc)]

use fmpm_core::bench::config::BenchConfig;
use fmpm_core::bench::disks::DiskImpact;
use fmpm_core::bench::mms::MmsBar;
use fmpm_core::bench::oracle_check::OracleCheck;
use fmpm_core::bench::splitbar::SplitBar;
use fmpm_core::bench::vibrate::VibratingBar;
use fmpm_core::bench::Problem;
use fmpm_core::contact::ContactLaw;
use fmpm_core::exec::ExecMode;
use fmpm_core::stepper::{ContactConfig, Simulation, StepConfig};
use fmpm_core::MpmError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmpmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    ParticleOutsideGrid = 3,
    ElementInversion = 4,
    Unsupported = 5,
    /// Particle velocities stopped being finite.
    Unstable = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

/// Opaque simulation handle.
pub struct FmpmSim {
    sim: Simulation,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FmpmEnergy {
    pub time: f64,
    pub kinetic: f64,
    pub work: f64,
    pub total: f64,
    /// Positive is loss.
    pub dissipation: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FmpmStepInfo {
    pub dt: f64,
    /// FMPM passes used this step; 0 for a FLIP step.
    pub order: usize,
    pub contact_nodes: usize,
    pub wall_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &MpmError) -> FmpmStatus {
    match err {
        MpmError::ParticleOutsideGrid { .. } => FmpmStatus::ParticleOutsideGrid,
        MpmError::ElementInversion { .. } => FmpmStatus::ElementInversion,
        MpmError::Config(_) | MpmError::Parse(_) => FmpmStatus::InvalidConfig,
        MpmError::Unsupported(_) => FmpmStatus::Unsupported,
        MpmError::Internal(_) | MpmError::Io(_) | MpmError::Csv(_) => FmpmStatus::Internal,
    }
}

struct Failure(FmpmStatus, String);

impl From<MpmError> for Failure {
    fn from(e: MpmError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FmpmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FmpmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmpmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside fmpm");
            FmpmStatus::Internal
        }
    }
}

unsafe fn sim_ref<'a>(sim: *const FmpmSim) -> Result<&'a FmpmSim, Failure> {
    sim.as_ref().ok_or_else(|| null("simulation handle"))
}

unsafe fn sim_mut<'a>(sim: *mut FmpmSim) -> Result<&'a mut FmpmSim, Failure> {
    sim.as_mut().ok_or_else(|| null("simulation handle"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text(p: *const c_char, what: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(FmpmStatus::InvalidConfig, format!("{what} is not UTF-8")))
}

fn build(problem: &str, cfg: &BenchConfig, scale: f64) -> Result<Simulation, Failure> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Failure(FmpmStatus::InvalidConfig, format!("scale must be positive, got {scale}")));
    }
    let problem: Problem = problem.parse()?;
    let step = |contact: Option<ContactConfig>| -> Result<StepConfig, MpmError> {
        let mut s = StepConfig { contact, exec: ExecMode::Serial, ..StepConfig::default() };
        cfg.apply_step(&mut s)?;
        Ok(s)
    };
    let sim = match problem {
        Problem::Vibrate => VibratingBar::from_config(cfg)?.build(step(None)?)?,
        Problem::Mms => {
            let mut bar = MmsBar::from_config(cfg)?;
            if cfg.grid.cell.is_none() {
                bar.cell /= scale;
            }
            bar.build(step(None)?)?
        }
        Problem::Splitbar => {
            let s = step(Some(ContactConfig { law: ContactLaw::STICK, ..ContactConfig::default() }))?;
            SplitBar::from_config(cfg, scale)?.build(&s, s.contact)?
        }
        Problem::Disks => {
            let s = step(Some(ContactConfig::default()))?;
            let law = s.contact.map(|c| c.law).unwrap_or(ContactLaw::FRICTIONLESS);
            DiskImpact::from_config(cfg, scale)?.build(&s, law)?
        }
        Problem::Oracle => {
            return Err(Failure(
                FmpmStatus::Unsupported,
                "oracle is a check, not a simulation; use fmpm_oracle_check".into(),
            ))
        }
    };
    Ok(sim)
}

fn check_finite(sim: &Simulation) -> Result<(), Failure> {
    if sim.particles.iter().all(|p| p.velocity.x.is_finite() && p.velocity.y.is_finite()) {
        Ok(())
    } else {
        Err(Failure(FmpmStatus::Unstable, format!("non-finite particle velocity at t = {}", sim.time)))
    }
}

/// Builds one of the benchmark problems `vibrate`, `mms`, `splitbar` or
/// `disks`. `config_toml` holds TOML overrides and may be null. Runs are
/// serial and bit-reproducible.
///
/// Safety: `problem` and a non-null `config_toml` must be NUL-terminated strings;
/// `out_sim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_new_benchmark(
    problem: *const c_char,
    config_toml: *const c_char,
    scale: f64,
    out_sim: *mut *mut FmpmSim,
) -> FmpmStatus {
    guard(|| {
        let slot = out(out_sim, "output handle")?;
        *slot = ptr::null_mut();
        let problem = text(problem, "problem")?;
        let cfg = if config_toml.is_null() {
            BenchConfig::default()
        } else {
            BenchConfig::parse(&text(config_toml, "config")?)?
        };
        let sim = build(&problem, &cfg, scale)?;
        *slot = Box::into_raw(Box::new(FmpmSim { sim }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// Safety: `sim` must come from [`fmpm_sim_new_benchmark`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_free(sim: *mut FmpmSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one step at the stable time step. `info` may be null.
///
/// Safety: `sim` must be a live handle; a non-null `info` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_step(sim: *mut FmpmSim, info: *mut FmpmStepInfo) -> FmpmStatus {
    guard(|| {
        let s = &mut sim_mut(sim)?.sim;
        let dt = s.stable_timestep()?;
        let r = s.usl_step(dt)?;
        check_finite(s)?;
        if let Some(i) = info.as_mut() {
            *i = FmpmStepInfo {
                dt: r.dt,
                order: if r.used_fmpm { r.order } else { 0 },
                contact_nodes: r.contact_nodes,
                wall_seconds: r.wall_seconds,
            };
        }
        Ok(())
    })
}

/// Steps until the simulation time reaches `t_end`, shortening the last step.
///
/// Safety: `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_run_until(sim: *mut FmpmSim, t_end: f64) -> FmpmStatus {
    guard(|| {
        let s = &mut sim_mut(sim)?.sim;
        if !t_end.is_finite() {
            return Err(Failure(FmpmStatus::InvalidConfig, format!("end time {t_end} is not finite")));
        }
        s.run_until(t_end, |_, _| Ok(true))?;
        check_finite(s)
    })
}

/// Safety: `sim` must be a live handle and `time` writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_time(sim: *const FmpmSim, time: *mut f64) -> FmpmStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        *out(time, "time")? = s.sim.time;
        Ok(())
    })
}

/// Safety: `sim` must be a live handle and `energy` writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_energy(sim: *const FmpmSim, energy: *mut FmpmEnergy) -> FmpmStatus {
    guard(|| {
        let e = sim_ref(sim)?.sim.energies();
        *out(energy, "energy")? =
            FmpmEnergy { time: e.time, kinetic: e.kinetic, work: e.work, total: e.total, dissipation: e.dissipation };
        Ok(())
    })
}

/// Safety: `sim` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_particle_count(sim: *const FmpmSim, count: *mut usize) -> FmpmStatus {
    guard(|| {
        let n = sim_ref(sim)?.sim.particles.len();
        *out(count, "count")? = n;
        Ok(())
    })
}

unsafe fn copy_pairs(
    sim: *const FmpmSim,
    buf: *mut f64,
    len: usize,
    pick: impl Fn(&fmpm_core::Particle) -> fmpm_core::Vec2,
) -> Result<(), Failure> {
    let s = &sim_ref(sim)?.sim;
    let need = 2 * s.particles.len();
    if len < need {
        return Err(Failure(FmpmStatus::BufferTooSmall, format!("buffer holds {len} values, need {need}")));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    let dst = std::slice::from_raw_parts_mut(buf, need);
    for (pair, p) in dst.chunks_exact_mut(2).zip(&s.particles) {
        let v = pick(p);
        pair[0] = v.x;
        pair[1] = v.y;
    }
    Ok(())
}

/// Writes `x0, y0, x1, y1, ...` into `buf`, which holds `len` doubles.
///
/// Safety: `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_copy_positions(sim: *const FmpmSim, buf: *mut f64, len: usize) -> FmpmStatus {
    guard(|| copy_pairs(sim, buf, len, |p| p.position))
}

/// Same layout as [`fmpm_sim_copy_positions`].
///
/// Safety: `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fmpm_sim_copy_velocities(sim: *const FmpmSim, buf: *mut f64, len: usize) -> FmpmStatus {
    guard(|| copy_pairs(sim, buf, len, |p| p.velocity))
}

/// Runs the solver self-check on 50 random instances. `failures` receives
/// the number of failed comparisons and may be null.
///
/// Safety: A non-null `failures` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fmpm_oracle_check(failures: *mut usize) -> FmpmStatus {
    guard(|| {
        let r = OracleCheck::default().run()?;
        if let Some(f) = failures.as_mut() {
            *f = r.failures.len();
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fmpm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
