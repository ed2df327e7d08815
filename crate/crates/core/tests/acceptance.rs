//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion. Pass
//! criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 2 5`. Set `FMPM_ACCEPTANCE_STRICT=1` to
//! exit nonzero when any criterion fails.

use fmpm_core::bench::disks::DiskImpact;
use fmpm_core::bench::mms::MmsBar;
use fmpm_core::bench::oracle_check::OracleCheck;
use fmpm_core::bench::splitbar::{ImpactBlocks, SplitBar};
use fmpm_core::bench::vibrate::{method_config, stability_search, VibratingBar};
use fmpm_core::contact::{ContactLaw, IncrementalMethod};
use fmpm_core::fmpm::{DynamicMetric, FmpmOptions};
use fmpm_core::shape::ShapeKind;
use fmpm_core::stepper::{ContactConfig, StepConfig, UpdateMode};
use std::io::Sink;
use std::time::Instant;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn ac1() -> Outcome {
    let t = Instant::now();
    let r = OracleCheck::default().run().expect("oracle check runs");
    let secs = t.elapsed().as_secs_f64();
    let detail = format!(
        "{} instances, worst dense {:.2e}, legacy {:.2e}, fixed point {:.2e}, {} failures, {secs:.2}s",
        r.checked,
        r.worst[0],
        r.worst[1],
        r.worst[2],
        r.failures.len()
    );
    (r.passed() && r.checked == 50 && secs < 10.0, detail)
}

fn blended(order: usize) -> StepConfig {
    let mut s = method_config(UpdateMode::Fmpm, order, 0.5);
    s.fmpm.blend_alpha = 0.8;
    s.fmpm.blend_base = 2;
    s
}

fn limit(step: &StepConfig) -> f64 {
    stability_search(&VibratingBar::default(), step, 0.01, 1.2, 0.005).expect("search runs")
}

fn cpgimp(mut s: StepConfig) -> StepConfig {
    s.shape = ShapeKind::Cpgimp;
    s
}

fn ac2() -> Outcome {
    let flip = limit(&method_config(UpdateMode::Flip, 1, 0.5));
    let k4 = limit(&method_config(UpdateMode::Fmpm, 4, 0.5));
    let k40 = limit(&method_config(UpdateMode::Fmpm, 40, 0.5));
    let b40 = limit(&blended(40));
    let ok = (0.78..=0.90).contains(&flip) && (0.48..=0.60).contains(&k4) && (0.19..=0.31).contains(&k40) && b40 > k40;
    // Reported only: the same limits with stretched particle domains.
    let cp = [
        limit(&cpgimp(method_config(UpdateMode::Flip, 1, 0.5))),
        limit(&cpgimp(method_config(UpdateMode::Fmpm, 4, 0.5))),
        limit(&cpgimp(method_config(UpdateMode::Fmpm, 40, 0.5))),
    ];
    (
        ok,
        format!(
            "C_max FLIP {flip:.3}, FMPM(4) {k4:.3}, FMPM(40) {k40:.3}, blended FMPM(40) {b40:.3}; cpgimp FLIP {:.3}, FMPM(4) {:.3}, FMPM(40) {:.3}",
            cp[0], cp[1], cp[2]
        ),
    )
}

fn ac3() -> Outcome {
    let bar = VibratingBar::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, mode, k) in [
        ("FLIP", UpdateMode::Flip, 1),
        ("FMPM(2)", UpdateMode::Fmpm, 2),
        ("FMPM(4)", UpdateMode::Fmpm, 4),
        ("FMPM(8)", UpdateMode::Fmpm, 8),
    ] {
        let c = 0.5 * limit(&method_config(mode, k, 0.5));
        let out = bar.run::<Sink>(method_config(mode, k, c), None).expect("bar runs");
        ok &= out.stable && out.dissipation.abs() <= 0.005;
        parts.push(format!("{name} C={c:.3} {:+.3}%", 100.0 * out.dissipation));
    }
    let out = bar.run::<Sink>(method_config(UpdateMode::Fmpm, 1, 0.86), None).expect("bar runs");
    ok &= out.stable && (0.20..=0.35).contains(&out.dissipation);
    parts.push(format!("FMPM(1) C=0.86 stable {} {:.1}%", out.stable, 100.0 * out.dissipation));
    let c = 0.5 * limit(&cpgimp(method_config(UpdateMode::Flip, 1, 0.5)));
    let out = bar.run::<Sink>(cpgimp(method_config(UpdateMode::Flip, 1, c)), None).expect("bar runs");
    parts.push(format!("cpgimp FLIP C={c:.3} {:+.3}%", 100.0 * out.dissipation));
    (ok, parts.join(", "))
}

fn mms_step(mode: UpdateMode, k: usize) -> StepConfig {
    method_config(mode, k, 0.2)
}

fn ac4() -> Outcome {
    let bar = MmsBar::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1, 2, 4, 8] {
        let out = bar.run::<Sink>(mms_step(UpdateMode::Fmpm, k), None).expect("mms runs");
        let rel = out.max_bc_violation / out.v_end;
        ok &= rel < 1e-10;
        parts.push(format!("k={k} {rel:.1e}"));
    }
    (ok, format!("max |v·n - v_b|/V_end: {}", parts.join(", ")))
}

fn ac5() -> Outcome {
    let bar = MmsBar::default();
    let flip = bar.run::<Sink>(mms_step(UpdateMode::Flip, 1), None).expect("mms runs");
    let errs: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&k| bar.run::<Sink>(mms_step(UpdateMode::Fmpm, k), None).expect("mms runs").error_percent)
        .collect();
    let ok = errs[2] <= flip.error_percent / 20.0 && errs[1] <= errs[0] && errs[2] <= errs[1];
    let cp_flip = bar.run::<Sink>(cpgimp(mms_step(UpdateMode::Flip, 1)), None).expect("mms runs").error_percent;
    let cp8 = bar.run::<Sink>(cpgimp(mms_step(UpdateMode::Fmpm, 8)), None).expect("mms runs").error_percent;
    (
        ok,
        format!(
            "error FLIP {:.4}%, FMPM(2) {:.4}%, FMPM(4) {:.4}%, FMPM(8) {:.4}%, ratio {:.1}, σ_xx {:.5} (exact {:.5}); cpgimp FLIP {cp_flip:.4}%, FMPM(8) {cp8:.4}%, ratio {:.1}",
            flip.error_percent,
            errs[0],
            errs[1],
            errs[2],
            flip.error_percent / errs[2],
            flip.final_stress,
            flip.exact_stress,
            cp_flip / cp8
        ),
    )
}

fn ac6() -> Outcome {
    let bar = SplitBar::default();
    let mut ok = true;
    let (mut worst_v, mut worst_p) = (0.0f64, 0.0f64);
    for method in [IncrementalMethod::Net, IncrementalMethod::Evolving] {
        for k in [1, 2, 4, 8, 16] {
            let step = StepConfig { fmpm: FmpmOptions::with_order(k), ..StepConfig::default() };
            let contact = ContactConfig { law: ContactLaw::STICK, method, ..ContactConfig::default() };
            let out = bar.compare(&step, contact).expect("split bar runs");
            ok &= out.max_velocity_discrepancy < 1e-10 && out.max_contact_momentum_error < 1e-12;
            worst_v = worst_v.max(out.max_velocity_discrepancy);
            worst_p = worst_p.max(out.max_contact_momentum_error);
        }
    }
    (ok, format!("worst nodal discrepancy {worst_v:.1e}, worst contact momentum change {worst_p:.1e}"))
}

fn ac7() -> Outcome {
    let bar = SplitBar::default();
    let step = StepConfig { fmpm: FmpmOptions::with_order(8), ..StepConfig::default() };
    let run = |method| {
        let contact =
            ContactConfig { law: ContactLaw::coulomb(0.3).expect("valid"), method, ..ContactConfig::default() };
        bar.compare(&step, contact).expect("split bar runs").max_pressure_deviation
    };
    let net = run(IncrementalMethod::Net);
    let evolving = run(IncrementalMethod::Evolving);
    (net < evolving, format!("max pressure deviation Net {:.3}%, Evolving {:.3}%", 100.0 * net, 100.0 * evolving))
}

fn ac8() -> Outcome {
    let blocks = ImpactBlocks::default();
    let max_order = 8;
    let run = |threshold| {
        let fmpm = FmpmOptions { order: max_order, metric: DynamicMetric::Means, threshold, ..FmpmOptions::default() };
        let step = StepConfig { fmpm, ..StepConfig::default() };
        blocks.run(&step).expect("impact runs")
    };
    let loose = run(0.5);
    let tight = run(1e-6);
    let pre_ok = |o: &fmpm_core::bench::splitbar::ImpactOutcome| {
        o.impact_step.is_some_and(|i| i > 0 && o.orders[..i].iter().all(|&k| k == 2))
            && o.max_pre_impact_metric <= 1e-12
    };
    let ok = pre_ok(&loose)
        && pre_ok(&tight)
        && (loose.mean_order_after_impact - 2.0).abs() <= 0.1
        && tight.mean_order_after_impact == max_order as f64;
    (
        ok,
        format!(
            "impact at step {:?}; mean order after impact: threshold 0.5 → {:.3}, 1e-6 → {:.3}; pre-impact metric ≤ {:.1e}",
            loose.impact_step,
            loose.mean_order_after_impact,
            tight.mean_order_after_impact,
            loose.max_pre_impact_metric.max(tight.max_pre_impact_metric)
        ),
    )
}

fn ac9() -> Outcome {
    let disks = DiskImpact::at_scale(0.5);
    let step = StepConfig { fmpm: FmpmOptions::with_order(4), ..StepConfig::default() };
    let deflection: Vec<f64> = [0.0, 0.3, 0.6]
        .iter()
        .map(|&mu| {
            let law = if mu == 0.0 { ContactLaw::FRICTIONLESS } else { ContactLaw::coulomb(mu).expect("valid") };
            disks.run::<Sink>(&step, law, None).expect("disks run").deflection_deg
        })
        .collect();
    let law = ContactLaw::coulomb(0.3).expect("valid");
    let diss: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&k| {
            let step = StepConfig { fmpm: FmpmOptions::with_order(k), ..StepConfig::default() };
            100.0 * disks.run::<Sink>(&step, law, None).expect("disks run").dissipation
        })
        .collect();
    let ok = deflection[0] < deflection[1]
        && deflection[1] < deflection[2]
        && diss[0] - diss[1] >= 5.0
        && diss[2] <= diss[1] + 0.5
        && diss[3] <= diss[2] + 0.5;
    (
        ok,
        format!(
            "deflection μ=0/0.3/0.6: {:.2}°/{:.2}°/{:.2}°; dissipation FMPM(1/2/4/8): {:.2}/{:.2}/{:.2}/{:.2}%",
            deflection[0], deflection[1], deflection[2], diss[0], diss[1], diss[2], diss[3]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", ac1),
        ("vibrating-bar stability limits", ac2),
        ("energy closure", ac3),
        ("velocity BC satisfaction", ac4),
        ("MMS error ordering", ac5),
        ("contact reversion", ac6),
        ("Net vs Evolving friction", ac7),
        ("dynamic FMPM endpoints", ac8),
        ("disk impact trends", ac9),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = run();
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {n}. {name}: {detail} ({:.1}s)", t.elapsed().as_secs_f64());
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        if std::env::var_os("FMPM_ACCEPTANCE_STRICT").is_some_and(|v| v != "0") {
            std::process::exit(1);
        }
    }
}
