//! Benchmark runner: `fmpm <problem> [--config FILE] [--csv FILE] [--scale F] [--deterministic]`.

use clap::Parser;
use fmpm_core::bench::config::BenchConfig;
use fmpm_core::bench::disks::DiskImpact;
use fmpm_core::bench::mms::MmsBar;
use fmpm_core::bench::oracle_check::OracleCheck;
use fmpm_core::bench::splitbar::{ImpactBlocks, SplitBar};
use fmpm_core::bench::vibrate::{stability_search, VibratingBar};
use fmpm_core::bench::Problem;
use fmpm_core::contact::ContactLaw;
use fmpm_core::exec::ExecMode;
use fmpm_core::fmpm::DynamicMetric;
use fmpm_core::stepper::{fmt_f64, ContactConfig, EnergyCsv, StepConfig};
use fmpm_core::{MpmError, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "fmpm", version, about = "Run an MPM benchmark problem")]
struct Cli {
    /// vibrate, mms, splitbar, disks or oracle
    problem: Problem,
    /// TOML file of overrides
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write per-step results here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Resolution factor: cells shrink by this factor
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Serial accumulation, bit-reproducible output
    #[arg(long)]
    deterministic: bool,
    /// vibrate: bisect for the largest stable Courant number instead of one run
    #[arg(long)]
    search: bool,
}

type Csv = BufWriter<File>;

fn open_csv(path: &Option<PathBuf>) -> Result<Option<Csv>> {
    path.as_ref().map(|p| Ok(BufWriter::new(File::create(p)?))).transpose()
}

fn step_config(cli: &Cli, cfg: &BenchConfig, contact: Option<ContactConfig>) -> Result<StepConfig> {
    let mut step = StepConfig { contact, exec: ExecMode::Parallel, ..StepConfig::default() };
    if cli.deterministic {
        step.exec = ExecMode::Serial;
    }
    cfg.apply_step(&mut step)?;
    if cli.deterministic {
        step.exec = ExecMode::Serial;
    }
    Ok(step)
}

fn vibrate(cli: &Cli, cfg: &BenchConfig) -> Result<bool> {
    let bar = VibratingBar::from_config(cfg)?;
    let step = step_config(cli, cfg, None)?;
    if cli.search {
        let c = stability_search(&bar, &step, 0.01, 1.2, 0.005)?;
        println!("C_max = {c:.4}");
        return Ok(c > 0.0);
    }
    let mut csv = open_csv(&cli.csv)?.map(EnergyCsv::new).transpose()?;
    let out = bar.run(step, csv.as_mut())?;
    if let Some(w) = csv {
        w.finish()?.flush()?;
    }
    println!(
        "stable {} after {} steps, t = {:.3}; dissipation {:+.4}%; max end displacement {:.3} (expected {:.3})",
        out.stable,
        out.steps,
        out.time,
        100.0 * out.dissipation,
        out.max_end_displacement,
        bar.max_displacement()
    );
    Ok(out.stable)
}

fn mms(cli: &Cli, cfg: &BenchConfig) -> Result<bool> {
    let mut bar = MmsBar::from_config(cfg)?;
    if cfg.grid.cell.is_none() {
        bar.cell /= cli.scale;
    }
    let step = step_config(cli, cfg, None)?;
    let mut csv = open_csv(&cli.csv)?.map(EnergyCsv::new).transpose()?;
    let out = bar.run(step, csv.as_mut())?;
    if let Some(w) = csv {
        w.finish()?.flush()?;
    }
    println!(
        "{} steps; mean RMS velocity error {:.5}% of V_end; σ_xx {:.6} (exact {:.6}); max BC violation {:.2e}",
        out.steps, out.error_percent, out.final_stress, out.exact_stress, out.max_bc_violation
    );
    Ok(true)
}

fn splitbar(cli: &Cli, cfg: &BenchConfig) -> Result<bool> {
    let contact = ContactConfig { law: ContactLaw::STICK, ..ContactConfig::default() };
    let step = step_config(cli, cfg, Some(contact))?;
    if step.fmpm.metric != DynamicMetric::None {
        return impact(cli, cfg, step);
    }
    let bar = SplitBar::from_config(cfg, cli.scale)?;
    let contact = step.contact.expect("contact is set above");
    let out = bar.compare(&step, contact)?;
    if let Some(mut w) = open_csv(&cli.csv)?.map(csv::Writer::from_writer) {
        w.write_record([
            "steps",
            "max_velocity_discrepancy",
            "max_contact_momentum_error",
            "max_pressure_deviation",
            "peak_pressure",
        ])?;
        w.write_record([
            out.steps.to_string(),
            fmt_f64(out.max_velocity_discrepancy),
            fmt_f64(out.max_contact_momentum_error),
            fmt_f64(out.max_pressure_deviation),
            fmt_f64(out.peak_pressure),
        ])?;
        w.flush()?;
    }
    println!(
        "{} steps; nodal velocity discrepancy {:.3e}; contact momentum change {:.3e}; pressure deviation {:.4}% of peak {:.4}",
        out.steps,
        out.max_velocity_discrepancy,
        out.max_contact_momentum_error,
        100.0 * out.max_pressure_deviation,
        out.peak_pressure
    );
    Ok(true)
}

/// Two-block impact with dynamic order control.
fn impact(cli: &Cli, cfg: &BenchConfig, step: StepConfig) -> Result<bool> {
    let mut blocks = ImpactBlocks::default();
    blocks.material = cfg.apply_material(blocks.material)?;
    blocks.cell = cfg.grid.cell.unwrap_or(blocks.cell / cli.scale);
    if let Some(f) = cfg.run.speed_fraction {
        blocks.speed_fraction = f;
    }
    let out = blocks.run(&step)?;
    if let Some(mut w) = open_csv(&cli.csv)?.map(csv::Writer::from_writer) {
        w.write_record(["step", "order", "metric"])?;
        for (i, (o, m)) in out.orders.iter().zip(&out.first_metrics).enumerate() {
            w.write_record([i.to_string(), o.to_string(), fmt_f64(*m)])?;
        }
        w.flush()?;
    }
    println!(
        "impact at step {:?}; mean order after impact {:.3}; largest pre-impact metric {:.2e}; dissipation {:+.4}%",
        out.impact_step,
        out.mean_order_after_impact,
        out.max_pre_impact_metric,
        100.0 * out.dissipation
    );
    Ok(true)
}

fn disks(cli: &Cli, cfg: &BenchConfig) -> Result<bool> {
    let d = DiskImpact::from_config(cfg, cli.scale)?;
    let step = step_config(cli, cfg, Some(ContactConfig::default()))?;
    let law = step.contact.expect("contact is set above").law;
    let out = d.run(&step, law, open_csv(&cli.csv)?)?;
    println!(
        "{} steps; deflection {:.3}°; dissipation {:+.3}%",
        out.steps,
        out.deflection_deg,
        100.0 * out.dissipation
    );
    Ok(true)
}

fn oracle() -> Result<bool> {
    let r = OracleCheck::default().run()?;
    for f in &r.failures {
        println!("FAIL seed {:#x} {}: relative error {:.3e}", f.seed, f.check, f.error);
    }
    println!(
        "{} instances; worst dense {:.2e}, legacy {:.2e}, fixed point {:.2e}; {} failures",
        r.checked,
        r.worst[0],
        r.worst[1],
        r.worst[2],
        r.failures.len()
    );
    Ok(r.passed())
}

fn run(cli: &Cli) -> Result<bool> {
    if !(cli.scale > 0.0 && cli.scale.is_finite()) {
        return Err(MpmError::Config(format!("scale must be positive, got {}", cli.scale)));
    }
    let cfg = match &cli.config {
        Some(p) => BenchConfig::load(p)?,
        None => BenchConfig::default(),
    };
    match cli.problem {
        Problem::Vibrate => vibrate(cli, &cfg),
        Problem::Mms => mms(cli, &cfg),
        Problem::Splitbar => splitbar(cli, &cfg),
        Problem::Disks => disks(cli, &cfg),
        Problem::Oracle => oracle(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
