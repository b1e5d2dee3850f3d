//! Simulate a spectral-hole decay measurement, fit the two-exponential
//! population model, and report lifetimes and the branching ratio.
//!
//! Run with: cargo run --example hole_decay

use echo_lab::fit::{fit_hole_decay, FitOptions, ModelKind};
use echo_lab::models;
use echo_lab::params::DecayModelParams;
use echo_lab::synth::{synthesize, ExperimentSchedule, NoiseModel, ScheduleKind};

fn main() -> echo_lab::Result<()> {
    let truth = DecayModelParams::new(0.436, 82e-6, 2.364e-3)?;
    println!("truth: B = {}, T1e = {} us, T1b = {:.3} ms", truth.b(), truth.t1e() * 1e6, truth.t1b() * 1e3);
    println!("hole depth at t = T1e: {:.5}", models::hole_decay_fraction(truth.t1e(), &truth)?);
    println!("branching ratio beta: {:.5}\n", models::branching_beta(&truth)?);

    // 40 log-spaced waiting times, 10 us .. 15 ms, 2% multiplicative noise
    let schedule = ExperimentSchedule::canonical(ScheduleKind::ShbDecay);
    let params = [
        ("amplitude".to_string(), 1.0),
        ("b".to_string(), truth.b()),
        ("t1e".to_string(), truth.t1e()),
        ("t1b".to_string(), truth.t1b()),
    ];
    let noise = NoiseModel::new(0.02, 0.0, 42)?;
    let data = synthesize(ModelKind::HoleDecay, &params, &schedule, &noise)?;
    println!("synthesized {} points, first depth {:.4}", data.len(), data.values()[0]);

    let fit = fit_hole_decay(&data, &FitOptions::default())?;
    println!("\nfit converged: {} in {} iterations", fit.converged, fit.iterations);
    for name in ["amplitude", "b", "t1e", "t1b"] {
        println!(
            "  {name:<10} = {:.6e} +- {:.2e}",
            fit.estimate(name).unwrap(),
            fit.uncertainty(name).unwrap()
        );
    }
    if let Some(beta) = fit.derived_value("beta") {
        println!("  beta       = {beta:.4} (derived)");
    }
    Ok(())
}
